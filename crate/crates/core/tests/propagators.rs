mod common;

use common::random_field;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use vnlw_core::propagators::{
    apply_duhamel_kernel, apply_v, duhamel_moments, half_wave, mode_flow, poisson_smooth, Damping, FlowMatrix, ModeSymbol,
    PhaseState, WaveSign,
};
use vnlw_core::quadrature::integrate;
use vnlw_core::verify::stats::ols;
use vnlw_core::{make_grid, SpectralField};

/// RK4 on `y'' + d y' + (1+d²) y = 0`, the mode equation the flow matrix solves.
fn ode_flow(d: f64, t: f64) -> [[f64; 2]; 2] {
    let k = 20_000;
    let h = t / k as f64;
    let f = |y: [f64; 2]| [y[1], -(1.0 + d * d) * y[0] - d * y[1]];
    let mut cols = [[1.0, 0.0], [0.0, 1.0]];
    for y in cols.iter_mut() {
        for _ in 0..k {
            let k1 = f(*y);
            let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]]);
            for i in 0..2 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
    }
    [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]
}

#[test]
fn flow_matches_ode_oracle() {
    for (n, t) in [([3i64, 4i64], 0.5), ([1, 0], 1.0), ([0, 0], 2.0), ([7, 2], 0.3)] {
        let d = ((n[0] * n[0] + n[1] * n[1]) as f64).sqrt();
        let m = mode_flow(n, t).unwrap().m;
        let o = ode_flow(d, t);
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[i][j] - o[i][j]).abs() < 1e-10, "{n:?} {i}{j}: {} vs {}", m[i][j], o[i][j]);
            }
        }
    }
}

#[test]
fn flow_closed_form_examples() {
    let m = mode_flow([3, 4], 0.5).unwrap().m;
    let jbb = 19.75f64.sqrt();
    let expect = (-1.25f64).exp() * ((0.5 * jbb).cos() + 5.0 / (2.0 * jbb) * (0.5 * jbb).sin());
    assert!((m[0][0] - expect).abs() < 1e-14);

    let z = mode_flow([0, 0], 0.8).unwrap().m;
    assert!((z[0][0] - 0.8f64.cos()).abs() < 1e-15 && (z[0][1] - 0.8f64.sin()).abs() < 1e-15);
    assert_eq!(mode_flow([5, 1], 0.0).unwrap(), FlowMatrix::identity());
    assert!(mode_flow([1, 1], -0.1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn semigroup_and_determinant(n1 in -40i64..40, n2 in -40i64..40, t1 in 0.0f64..3.0, t2 in 0.0f64..3.0) {
        let d = ((n1 * n1 + n2 * n2) as f64).sqrt();
        let a = FlowMatrix::viscous(d, t1);
        let b = FlowMatrix::viscous(d, t2);
        let ab = FlowMatrix::viscous(d, t1 + t2);
        let prod = a.mul(&b);
        let scale = 1.0 + (1.0 + d * d).sqrt();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((prod.m[i][j] - ab.m[i][j]).abs() < 1e-11 * scale);
            }
        }
        prop_assert!((a.det() - (-d * t1).exp()).abs() < 1e-11);
    }
}

#[test]
fn apply_v_examples() {
    let g = make_grid(16, 1.0).unwrap();
    let x = PhaseState::new(0.0, random_field(&g, 1, 1.0), random_field(&g, 2, 0.0)).unwrap();
    let same = apply_v(&x, 0.0).unwrap();
    assert_eq!(same.v.max_abs_diff(&x.v), 0.0);

    let one = PhaseState::new(0.0, SpectralField::cosine_pair(&g, [1, 0], C::new(1.0, 0.0)).unwrap(), SpectralField::zeros(&g)).unwrap();
    let y = apply_v(&one, 1.0).unwrap();
    let m = mode_flow([1, 0], 1.0).unwrap().m;
    assert!((y.v.coeff([1, 0]).re - m[0][0]).abs() < 1e-15);
    assert!((y.vt.coeff([1, 0]).re - m[1][0]).abs() < 1e-15);

    let two = apply_v(&apply_v(&x, 0.3).unwrap(), 0.7).unwrap();
    let direct = apply_v(&x, 1.0).unwrap();
    assert!(two.v.max_abs_diff(&direct.v) < 1e-11 && two.vt.max_abs_diff(&direct.vt) < 1e-11);
    assert!((two.t - 1.0).abs() < 1e-15);
}

#[test]
fn linear_flow_dissipates_quadratic_energy() {
    let g = make_grid(32, 1.0).unwrap();
    let x = PhaseState::new(0.0, random_field(&g, 3, 1.5), random_field(&g, 4, 0.5)).unwrap();
    let quad = |s: &PhaseState| 0.5 * (vnlw_core::norms::sobolev_sq(&s.v, 1.0) + s.vt.l2_sq());
    let mut prev = quad(&x);
    for k in 1..=40 {
        let e = quad(&apply_v(&x, 0.05 * k as f64).unwrap());
        assert!(e < prev, "step {k}: {e} >= {prev}");
        prev = e;
    }
}

#[test]
fn duhamel_kernel_examples() {
    let g = make_grid(16, 1.0).unwrap();
    let f = random_field(&g, 7, 1.0);
    assert_eq!(apply_duhamel_kernel(&f, 0.0, false).unwrap().l2_sq(), 0.0);
    assert!(apply_duhamel_kernel(&f, 0.0, true).unwrap().max_abs_diff(&f) < 1e-15);
    let e = SpectralField::cosine_pair(&g, [2, 0], C::new(1.0, 0.0)).unwrap();
    let k = apply_duhamel_kernel(&e, 0.25, false).unwrap().coeff([2, 0]).re;
    assert!((k - (-0.25f64).exp() * 0.5f64.sin() / 2.0).abs() < 1e-15);
}

#[test]
fn duhamel_moments_match_quadrature() {
    for d in [0.0, 1.0, 5.0, 40.0] {
        for h in [1e-3, 0.05, 0.4] {
            let sym = ModeSymbol::new(d, Damping::Viscous);
            let w = duhamel_moments(sym, h);
            for (j, wj) in w.iter().enumerate() {
                for c in 0..2 {
                    let col = |s: f64| {
                        let m = FlowMatrix::from_symbol(sym, s).m;
                        if c == 0 { m[0][1] } else { m[1][1] }
                    };
                    let q = integrate(|u| col(h - u) * (u / h).powi(j as i32), 0.0, h, 1e-16, 1e-13).unwrap();
                    assert!((wj[c] - q).abs() < 1e-11 * h.max(q.abs()), "d={d} h={h} j={j} c={c}: {} vs {q}", wj[c]);
                }
            }
        }
    }
}

#[test]
fn poisson_examples() {
    let g = make_grid(16, 1.0).unwrap();
    let one = SpectralField::cosine_pair(&g, [0, 0], C::new(0.5, 0.0)).unwrap();
    assert!(poisson_smooth(&one, 0.3, 0.0).unwrap().max_abs_diff(&one) < 1e-15);
    let e = SpectralField::cosine_pair(&g, [1, 0], C::new(1.0, 0.0)).unwrap();
    let p = poisson_smooth(&e, 1.0, 1.0).unwrap().coeff([1, 0]).re;
    assert!((p - (-0.5f64).exp()).abs() < 1e-15);
    assert!(poisson_smooth(&e, 0.0, 1.0).is_err());
}

#[test]
fn schauder_sweep_slope() {
    // log‖D P(t)φ‖/‖φ‖ against log t over [2⁻⁸, 1]: no steeper than t^{−1}.
    let g = make_grid(256, 1.0).unwrap();
    let times: Vec<f64> = (0..=8).map(|k| 2f64.powi(-k)).collect();
    for (seed, decay) in [(1u64, 1.2), (2, 2.0), (3, 3.0)] {
        let phi = random_field(&g, seed, decay);
        let y: Vec<f64> = times
            .iter()
            .map(|&t| (poisson_smooth(&phi, t, 1.0).unwrap().l2_sq() / phi.l2_sq()).sqrt().ln())
            .collect();
        let x: Vec<f64> = times.iter().map(|t| t.ln()).collect();
        let fit = ols(&x, &y).unwrap();
        assert!(fit.slope >= -1.0 - 0.05, "decay {decay}: slope {}", fit.slope);
    }
}

#[test]
fn half_wave_identities() {
    let g = make_grid(16, 1.0).unwrap();
    let f = random_field(&g, 8, 1.0);
    assert!(half_wave(&f, 0.0, WaveSign::Plus).max_abs_diff(&f) < 1e-15);
    let t = 0.7;
    let one = SpectralField::from_fn(&g, |_| C::new(1.0, 0.0));
    let h = half_wave(&one, t, WaveSign::Minus);
    for i in 0..g.len() {
        if !g.is_paired(i) {
            continue;
        }
        let expect = (-0.5 * g.abs_n(i) * t).exp();
        assert!((h.coeffs()[i].norm() - expect).abs() < 1e-14);
    }
    let e = SpectralField::cosine_pair(&g, [2, 1], C::new(1.0, 0.0)).unwrap();
    let avg = half_wave(&e, t, WaveSign::Plus).add(&half_wave(&e, t, WaveSign::Minus)).scale(0.5);
    let sym = ModeSymbol::new(5f64.sqrt(), Damping::Viscous);
    let expect = (-sym.gamma * t).exp() * (sym.omega * t).cos();
    assert!((avg.coeff([2, 1]).re - expect).abs() < 1e-14);
}
