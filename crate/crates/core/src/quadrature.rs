//! Time quadrature: composite Gauss–Legendre panels for L^q_T norms and an
//! adaptive Gauss–Kronrod rule for scalar covariance integrals.

use crate::error::{Error, Result};

const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// The eight Gauss–Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre8(a: f64, b: f64) -> [(f64, f64); 8] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 8];
    for k in 0..4 {
        out[2 * k] = (c - h * GL8_X[k], h * GL8_W[k]);
        out[2 * k + 1] = (c + h * GL8_X[k], h * GL8_W[k]);
    }
    out
}

/// Composite rule on `panels` equal panels of `[0, T]`: returns nodes and weights.
pub fn panel_nodes(t_end: f64, panels: usize) -> Vec<(f64, f64)> {
    let w = t_end / panels as f64;
    (0..panels)
        .flat_map(|k| gauss_legendre8(k as f64 * w, (k + 1) as f64 * w))
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct TimeQuadrature {
    pub initial_panels: usize,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for TimeQuadrature {
    fn default() -> Self {
        TimeQuadrature { initial_panels: 2, rel_tol: 1e-4, max_panels: 1 << 12 }
    }
}

/// Suggested starting panel count: about one panel per half oscillation period.
pub fn panels_for(t_end: f64, max_freq: f64) -> usize {
    ((t_end * max_freq / std::f64::consts::PI).ceil() as usize).clamp(2, 1 << 10)
}

impl TimeQuadrature {
    pub fn with_panels(initial_panels: usize) -> Self {
        TimeQuadrature { initial_panels: initial_panels.max(1), ..Default::default() }
    }

    /// `(∫₀ᵀ g(t)^q dt)^{1/q}` for a non-negative `g`, doubling panels until the
    /// relative change drops below `rel_tol`. `q = ∞` takes the max over nodes.
    pub fn lq_norm(&self, t_end: f64, q: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
        let eval = |panels: usize| -> f64 {
            let nodes = panel_nodes(t_end, panels);
            if q.is_infinite() {
                nodes.iter().fold(0.0, |m, &(t, _)| m.max(g(t)))
            } else {
                nodes.iter().map(|&(t, w)| w * g(t).powf(q)).sum::<f64>().powf(1.0 / q)
            }
        };
        let mut panels = self.initial_panels.max(1);
        let mut prev = eval(panels);
        loop {
            panels *= 2;
            let cur = eval(panels);
            if !cur.is_finite() {
                return Err(Error::NonFinite("time quadrature"));
            }
            let scale = cur.abs().max(f64::MIN_POSITIVE);
            if (cur - prev).abs() <= self.rel_tol * scale {
                return Ok(cur);
            }
            if panels >= self.max_panels {
                return Err(Error::Quadrature { tol: self.rel_tol, estimate: cur, error: (cur - prev).abs() });
            }
            prev = cur;
        }
    }
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK_WK[7];
    let mut g = fc * GK_WG[3];
    for i in 0..7 {
        let x = h * GK_X[i];
        let s = f(c - x) + f(c + x);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integral of `f` over `[a, b]` to
/// `max(abs_tol, rel_tol·|I|)`. Fails explicitly when the subdivision budget runs out.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let f: &dyn Fn(f64) -> f64 = &f;
    let mut intervals: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(f, a, b);
    intervals.push((a, b, v, e));
    let mut total = v;
    let mut err = e;
    let max_intervals = 4000;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if intervals.len() >= max_intervals {
            return Err(Error::Quadrature { tol: abs_tol.max(rel_tol * total.abs()), estimate: total, error: err });
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, iv)| if iv.3 > best.1 { (i, iv.3) } else { best });
        let (lo, hi, v0, e0) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
        if !total.is_finite() {
            return Err(Error::NonFinite("adaptive quadrature"));
        }
    }
    // Re-sum to shed accumulated update round-off.
    Ok(intervals.iter().map(|iv| iv.2).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl8_integrates_degree_15_exactly() {
        let s: f64 = gauss_legendre8(0.0, 2.0).iter().map(|&(x, w)| w * x.powi(15)).sum();
        assert!((s - 2f64.powi(16) / 16.0).abs() < 1e-9);
    }

    #[test]
    fn gk_matches_closed_form() {
        let v = integrate(|x| (-x).exp() * (3.0 * x).sin().powi(2), 0.0, 2.0, 1e-14, 1e-13).unwrap();
        // ∫ e^{-x} sin²(3x) = ½∫e^{-x} − ½∫e^{-x}cos 6x
        let a = 1.0 - (-2f64).exp();
        let c = (1.0 + (-2f64).exp() * (-(12f64).cos() + 6.0 * (12f64).sin())) / 37.0;
        assert!((v - 0.5 * (a - c)).abs() < 1e-13);
    }

    #[test]
    fn lq_norm_of_constant() {
        let q = TimeQuadrature::default();
        let v = q.lq_norm(0.5, 3.0, |_| 2.0).unwrap();
        assert!((v - 2.0 * 0.5f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }
}
