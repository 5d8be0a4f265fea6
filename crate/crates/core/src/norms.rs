//! Sobolev, Bessel-potential, Lebesgue and Besov norms, Littlewood–Paley
//! blocks on sharp dyadic annuli, dealiased products and paraproducts.

use crate::error::{invalid, Error, Result};
use crate::field::SpectralField;
use crate::grid::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self> {
        if !(p >= 1.0) || !(q >= 1.0) || !s.is_finite() {
            return invalid(format!("Besov exponents need p, q >= 1 (got p={p}, q={q}, s={s})"));
        }
        Ok(BesovSpec { s, p, q })
    }
}

/// Function spaces with an implemented norm. `r = f64::INFINITY` selects sup norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Space {
    /// H^s with weight `⟨n⟩^s = (1+|n|²)^{s/2}`.
    Sobolev { s: f64 },
    /// W^{s,r} = ‖F⁻¹(⟨n⟩^s û)‖_{L^r}.
    Bessel { s: f64, r: f64 },
    Lebesgue { r: f64 },
    Besov(BesovSpec),
}

pub fn norm(u: &SpectralField, space: Space) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::NonFinite("norm"));
    }
    let check_r = |r: f64| {
        if !(r >= 1.0) {
            invalid(format!("integrability exponent must be >= 1, got {r}"))
        } else {
            Ok(())
        }
    };
    match space {
        Space::Sobolev { s } => Ok(sobolev(u, s)),
        Space::Bessel { s, r } => {
            check_r(r)?;
            Ok(bessel(u, s, r))
        }
        Space::Lebesgue { r } => {
            check_r(r)?;
            Ok(bessel(u, 0.0, r))
        }
        Space::Besov(b) => Ok(besov(u, b)),
    }
}

pub fn sobolev(u: &SpectralField, s: f64) -> f64 {
    sobolev_sq(u, s).sqrt()
}

pub fn sobolev_sq(u: &SpectralField, s: f64) -> f64 {
    let g = u.grid();
    let jb = &g.multipliers().jb;
    if s == 0.0 {
        return u.l2_sq();
    }
    u.coeffs()
        .iter()
        .zip(jb)
        .map(|(c, &w)| c.norm_sqr() * w.powf(2.0 * s))
        .sum()
}

/// Norm of the pair `(u0, u1)` in `H^s × H^{s-1}`.
pub fn pair_sobolev(u0: &SpectralField, u1: &SpectralField, s: f64) -> f64 {
    (sobolev_sq(u0, s) + sobolev_sq(u1, s - 1.0)).sqrt()
}

/// Mean of |x|^r to the power 1/r; the maximum for `r = ∞`.
pub fn lr_of_samples(samples: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        return samples.iter().fold(0.0, |m, x| m.max(x.abs()));
    }
    let n = samples.len() as f64;
    let sum: f64 = if r == 2.0 {
        samples.iter().map(|x| x * x).sum()
    } else {
        samples.iter().map(|x| x.abs().powf(r)).sum()
    };
    (sum / n).powf(1.0 / r)
}

/// Moduli of the samples on the padded grid (real part for Hermitian fields).
pub fn abs_samples(u: &SpectralField) -> Vec<f64> {
    let m = u.grid().padded();
    let s = u.samples_padded(m);
    if u.is_hermitian() {
        s.into_iter().map(|c| c.re).collect()
    } else {
        s.into_iter().map(|c| c.norm()).collect()
    }
}

pub fn bessel(u: &SpectralField, s: f64, r: f64) -> f64 {
    if r == 2.0 {
        return sobolev(u, s);
    }
    let w = if s == 0.0 {
        u.clone()
    } else {
        let jb = u.grid().multipliers().jb.clone();
        u.map_real(|i| jb[i].powf(s))
    };
    lr_of_samples(&abs_samples(&w), r)
}

pub fn lebesgue(u: &SpectralField, r: f64) -> f64 {
    bessel(u, 0.0, r)
}

/// Highest block index needed to cover the lattice.
pub fn max_block(u: &SpectralField) -> usize {
    let top = u.grid().max_abs2();
    let mut j = 0;
    while (1i64 << (2 * j)) < top {
        j += 1;
    }
    j
}

#[inline]
pub fn in_block(abs2: i64, j: usize) -> bool {
    if j == 0 {
        abs2 <= 1
    } else {
        abs2 > 1i64 << (2 * (j - 1)) && abs2 <= 1i64 << (2 * j)
    }
}

/// Littlewood–Paley block: keeps `|n| ≤ 1` for `j = 0` and `2^{j-1} < |n| ≤ 2^j` otherwise.
pub fn lp_block(u: &SpectralField, j: usize) -> SpectralField {
    let g = u.grid().clone();
    u.map_real(|i| if in_block(g.abs2(i), j) { 1.0 } else { 0.0 })
}

pub fn besov(u: &SpectralField, b: BesovSpec) -> f64 {
    let jmax = max_block(u);
    let terms: Vec<f64> = (0..=jmax)
        .map(|j| {
            let blk = lp_block(u, j);
            let lp = if b.p == 2.0 { blk.l2_sq().sqrt() } else { lebesgue(&blk, b.p) };
            2f64.powf(b.s * j as f64) * lp
        })
        .collect();
    if b.q.is_infinite() {
        terms.into_iter().fold(0.0, f64::max)
    } else {
        terms.iter().map(|t| t.powf(b.q)).sum::<f64>().powf(1.0 / b.q)
    }
}

/// Dealiased product: pointwise product on the padded grid, truncated to the lattice.
pub fn product(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.check_grid(v)?;
    let g = u.grid();
    let m = g.padded();
    let a = u.samples_padded(m);
    let b = v.samples_padded(m);
    let prod: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    Ok(SpectralField::from_padded_samples(g, prod, m, u.is_hermitian() && v.is_hermitian()))
}

/// Bony decomposition `uv = (u<v) + (u=v) + (u>v)` with sharp blocks, computed on the
/// padded grid. `u<v` pairs low blocks of u (k ≤ j−2) with block j of v.
pub fn paraproduct_split(
    u: &SpectralField,
    v: &SpectralField,
) -> Result<(SpectralField, SpectralField, SpectralField)> {
    u.check_grid(v)?;
    let g = u.grid();
    let m = g.padded();
    let jmax = max_block(u);
    let ub: Vec<Vec<C64>> = (0..=jmax).map(|j| lp_block(u, j).samples_padded(m)).collect();
    let vb: Vec<Vec<C64>> = (0..=jmax).map(|j| lp_block(v, j).samples_padded(m)).collect();
    let zero = vec![C64::new(0.0, 0.0); m * m];
    let mut lo = zero.clone();
    let mut eq = zero.clone();
    let mut hi = zero.clone();
    let mut su = zero.clone();
    let mut sv = zero;
    for j in 0..=jmax {
        if j >= 2 {
            for (s, b) in su.iter_mut().zip(&ub[j - 2]) {
                *s += b;
            }
            for (s, b) in sv.iter_mut().zip(&vb[j - 2]) {
                *s += b;
            }
        }
        for x in 0..m * m {
            lo[x] += su[x] * vb[j][x];
            hi[x] += ub[j][x] * sv[x];
        }
        for k in j.saturating_sub(1)..=(j + 1).min(jmax) {
            for x in 0..m * m {
                eq[x] += ub[j][x] * vb[k][x];
            }
        }
    }
    let real = u.is_hermitian() && v.is_hermitian();
    Ok((
        SpectralField::from_padded_samples(g, lo, m, real),
        SpectralField::from_padded_samples(g, eq, m, real),
        SpectralField::from_padded_samples(g, hi, m, real),
    ))
}
