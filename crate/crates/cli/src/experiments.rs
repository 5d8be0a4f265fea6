//! `vnlw verify <experiment> [--key value]...`: experiment registry.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde_json::{json, Value};

use vnlw_core::make_grid;
use vnlw_core::randomize::{fixture_pair, DecayProfile, Distribution, FixtureSpec};
use vnlw_core::verify::exponents::{check_pair_f64, PairKind};
use vnlw_core::verify::probes::{run_probe, Probe};
use vnlw_core::verify::report::Report;
use vnlw_core::verify::sampler::sampler_consistency;
use vnlw_core::verify::strichartz::{sest_check, strichartz_ratio, RatioKind};
use vnlw_core::verify::tails::{default_lambdas, sample_statistic, tail_estimate, TailStatistic};
use vnlw_core::verify::truncation::truncation_convergence;
use vnlw_core::verify::variance::{fit_variance_exponent, VarianceMode};

pub const EXPERIMENTS: [&str; 7] = ["variance-exponent", "truncation", "tails", "strichartz", "admissible", "sampler", "probes"];

/// `--key value` pairs; every key must be consumed by the experiment.
pub struct Overrides {
    values: BTreeMap<String, String>,
    used: std::cell::RefCell<Vec<String>>,
}

impl Overrides {
    pub fn parse(args: &[String]) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        let mut it = args.iter();
        while let Some(k) = it.next() {
            let key = k.strip_prefix("--").ok_or_else(|| format!("expected --key, got {k:?}"))?;
            let v = it.next().ok_or_else(|| format!("--{key} needs a value"))?;
            values.insert(key.to_string(), v.clone());
        }
        Ok(Overrides { values, used: Default::default() })
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, String> {
        self.used.borrow_mut().push(key.to_string());
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| format!("--{key}: cannot parse {v:?}")),
        }
    }

    fn list<T: FromStr>(&self, key: &str, default: &[T]) -> Result<Vec<T>, String>
    where
        T: Clone,
    {
        self.used.borrow_mut().push(key.to_string());
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v.split(',').map(|x| x.trim().parse().map_err(|_| format!("--{key}: cannot parse {x:?}"))).collect(),
        }
    }

    pub fn output(&self, experiment: &str) -> Result<String, String> {
        self.get("out", format!("reports/{experiment}"))
    }

    fn check_unused(&self) -> Result<(), String> {
        let used = self.used.borrow();
        match self.values.keys().find(|k| !used.contains(k)) {
            Some(k) => Err(format!("unknown option --{k}")),
            None => Ok(()),
        }
    }
}

/// Finished experiment: report plus one CSV table.
pub struct Outcome {
    pub report: Report,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

/// Parameter errors are `Err` (exit 64); a failed check is a report with `pass = false`.
pub fn run(name: &str, o: &Overrides) -> Result<Outcome, String> {
    let err = |e: vnlw_core::Error| e.to_string();
    let out = match name {
        "variance-exponent" => {
            let alpha: f64 = o.get("alpha", 0.0)?;
            let t = o.get("t", 1.0)?;
            let n = o.get("n", 128usize)?;
            let band = (o.get("band-lo", 8.0)?, o.get("band-hi", 64.0)?);
            let seed = o.get("seed", 1u64)?;
            let mode = match o.get("mode", "mc".to_string())?.as_str() {
                "mc" => VarianceMode::MonteCarlo { samples: o.get("samples", 2000usize)?, seed },
                "oracle" => VarianceMode::Oracle,
                m => return Err(format!("--mode must be mc or oracle, got {m}")),
            };
            let tol = o.get("tol", 0.1)?;
            o.check_unused()?;
            let f = fit_variance_exponent(alpha, t, band, n, mode).map_err(err)?;
            let expect = -3.0 + 2.0 * alpha;
            let mut r = Report::new(name, json!({ "alpha": alpha, "t": t, "n": n, "band": band, "mode": mode, "tol": tol }), Some(seed));
            r.estimate("slope", f.slope, Some((expect - tol, expect + tol))).estimate("stderr", f.stderr, None);
            r.pass = (f.slope - expect).abs() <= tol;
            r.detail = serde_json::to_value(&f).map_err(|e| e.to_string())?;
            let rows = f.points.iter().map(|&(b, v)| vec![b, v]).collect();
            Outcome { report: r, header: vec!["bracket", "variance"], rows }
        }
        "truncation" => {
            let alpha = o.get("alpha", 0.0)?;
            let t = o.get("t", 1.0)?;
            let n = o.get("n", 256usize)?;
            let cuts = o.list("cuts", &[16.0, 32.0, 64.0])?;
            let paths = o.get("paths", 50usize)?;
            let seed = o.get("seed", 5u64)?;
            let tol = o.get("rel-tol", 0.25)?;
            o.check_unused()?;
            let rep = truncation_convergence(alpha, t, &cuts, n, paths, seed, tol).map_err(err)?;
            let mut r = Report::new(name, json!({ "alpha": alpha, "t": t, "n": n, "cuts": cuts, "paths": paths, "rel_tol": tol }), Some(seed));
            r.estimate("monotone_paths", rep.monotone_paths as f64, Some((paths as f64, paths as f64)));
            for (k, (m, oracle)) in rep.decay_ratios.iter().enumerate() {
                r.estimate(&format!("decay_ratio_{k}"), *m, Some((oracle * (1.0 - tol), oracle * (1.0 + tol))));
            }
            r.pass = rep.pass;
            let rows = cuts.iter().enumerate().map(|(k, &c)| vec![c, rep.mean_errors[k], rep.oracle_tails[k].sqrt()]).collect();
            r.detail = serde_json::to_value(&rep).map_err(|e| e.to_string())?;
            Outcome { report: r, header: vec!["cut", "mean_error", "oracle_rms_tail"], rows }
        }
        "tails" => {
            let n = o.get("n", 16usize)?;
            let q = o.get("q", 4.0)?;
            let rr = o.get("r", 4.0)?;
            let beta = o.get("beta", 0.0)?;
            let t_end = o.get("t", 0.5)?;
            let draws = o.get("draws", 2000usize)?;
            let seed = o.get("seed", 1u64)?;
            let dist: Distribution = o.get("distribution", Distribution::Gaussian)?;
            let s = o.get("s", 0.0)?;
            let exponent = o.get("decay", 1.5)?;
            let points = o.get("points", 12usize)?;
            let min_count = o.get("min-count", 20usize)?;
            let panels = o.get("panels", 4usize)?;
            o.check_unused()?;
            let g = make_grid(n, 1.0).map_err(err)?;
            let spec = FixtureSpec { s_target: s, profile: DecayProfile::Power { exponent }, seed, amplitude: 1.0, position_only: false };
            let (u0, u1) = fixture_pair(&g, &spec).map_err(err)?;
            let stat = TailStatistic::SpaceTime { q, r: rr, beta };
            let vals = sample_statistic(&u0, &u1, dist, seed, draws, stat, t_end, panels).map_err(err)?;
            let lam = default_lambdas(&vals, points);
            let est = tail_estimate(&vals, &lam, min_count);
            let mut r = Report::new(name, json!({ "n": n, "q": q, "r": rr, "beta": beta, "t": t_end, "draws": draws, "distribution": dist, "s": s, "decay": exponent }), Some(seed));
            if let Some((sl, se)) = est.slope {
                r.estimate("slope_lambda_sq", sl, Some((sl - 1.96 * se, sl + 1.96 * se)));
            }
            r.pass = est.gaussian_consistent && !est.inconclusive;
            let rows = (0..lam.len())
                .map(|i| vec![lam[i], est.probabilities[i], est.intervals[i].0, est.intervals[i].1, est.exceed[i] as f64])
                .collect();
            r.detail = serde_json::to_value(&est).map_err(|e| e.to_string())?;
            Outcome { report: r, header: vec!["lambda", "probability", "lower", "upper", "count"], rows }
        }
        "strichartz" => {
            let q = o.get("q", 3.0)?;
            let rr = o.get("r", 3.0)?;
            let s = o.get("s", 0.0)?;
            let t_end = o.get("t", 1.0)?;
            let trials = o.get("trials", 20usize)?;
            let grids = o.list("grids", &[16usize, 32, 64])?;
            let seed = o.get("seed", 7u64)?;
            let sest_n = o.get("sest-grid", 256usize)?;
            o.check_unused()?;
            let rep = strichartz_ratio(q, rr, s, t_end, trials, &grids, RatioKind::Homogeneous, seed).map_err(err)?;
            let sest = sest_check(sest_n, 0.05).map_err(err)?;
            let mut r = Report::new(name, json!({ "q": q, "r": rr, "s": s, "t": t_end, "trials": trials, "grids": grids }), Some(seed));
            r.estimate("variation", rep.variation, Some((0.0, 0.2))).estimate("sest_slope", sest.slope, Some((-0.05, f64::INFINITY)));
            r.pass = rep.trend_pass && sest.pass;
            let rows = grids.iter().zip(&rep.max_ratios).map(|(&n, &m)| vec![n as f64, m]).collect();
            r.detail = json!({ "ratios": rep, "sest": sest });
            Outcome { report: r, header: vec!["N", "max_ratio"], rows }
        }
        "admissible" => {
            let q = o.get("q", 3.0)?;
            let rr = o.get("r", 3.0)?;
            let s = o.get("s", 0.0)?;
            let kind = match o.get("kind", "homogeneous".to_string())?.as_str() {
                "homogeneous" => PairKind::Homogeneous,
                "dual" => PairKind::InhomogeneousDual,
                k => return Err(format!("--kind must be homogeneous or dual, got {k}")),
            };
            o.check_unused()?;
            let c = check_pair_f64(q, rr, s, kind);
            let mut r = Report::new(name, json!({ "q": q, "r": rr, "s": s, "kind": kind }), None);
            r.estimate("residual", c.residual, Some((0.0, 0.0)));
            r.pass = c.pass;
            r.detail = serde_json::to_value(&c).map_err(|e| e.to_string())?;
            Outcome { report: r, header: vec!["q", "r", "s", "residual"], rows: vec![vec![q, rr, s, c.residual]] }
        }
        "sampler" => {
            let alpha = o.get("alpha", 0.0)?;
            let checks = o.get("checks", 20usize)?;
            let samples = o.get("samples", 10_000usize)?;
            let n_max = o.get("n-max", 20i64)?;
            let seed = o.get("seed", 3u64)?;
            o.check_unused()?;
            let rep = sampler_consistency(alpha, checks, samples, n_max, seed).map_err(err)?;
            let mut r = Report::new(name, json!({ "alpha": alpha, "checks": checks, "samples": samples, "n_max": n_max }), Some(seed));
            r.estimate("ks_one_p", rep.ks_one.p_value, Some((0.01, 1.0)))
                .estimate("ks_many_p", rep.ks_many.p_value, Some((0.01, 1.0)))
                .estimate("ks_between_p", rep.ks_between.p_value, Some((0.01, 1.0)));
            r.pass = rep.pass;
            let rows = rep
                .checks
                .iter()
                .map(|c| vec![c.n[0] as f64, c.n[1] as f64, c.t, c.steps as f64, c.trace_one, c.trace_many, c.stderr])
                .collect();
            r.detail = serde_json::to_value(&rep).map_err(|e| e.to_string())?;
            Outcome { report: r, header: vec!["n1", "n2", "t", "steps", "trace_one", "trace_many", "stderr"], rows }
        }
        "probes" => {
            let which = o.get("probe", "all".to_string())?;
            let grids = o.list("grids", &[16usize, 32, 64])?;
            let fields = o.get("fields", 500usize)?;
            let seed = o.get("seed", 11u64)?;
            o.check_unused()?;
            let probes: Vec<Probe> = if which == "all" {
                Probe::ALL.to_vec()
            } else {
                vec![serde_json::from_value(Value::String(which.clone())).map_err(|_| format!("unknown probe {which:?}"))?]
            };
            let mut r = Report::new(name, json!({ "probes": probes, "grids": grids, "fields": fields }), Some(seed));
            let mut rows = Vec::new();
            let mut reps = Vec::new();
            for (k, p) in probes.iter().enumerate() {
                let rep = run_probe(*p, &grids, fields, seed).map_err(err)?;
                let key = serde_json::to_value(p).map_err(|e| e.to_string())?;
                r.estimate(&format!("{}_variation", key.as_str().unwrap_or("probe")), rep.variation, Some((0.0, 0.2)));
                r.pass &= rep.pass;
                for (n, m) in grids.iter().zip(&rep.max_ratios) {
                    rows.push(vec![k as f64, *n as f64, *m]);
                }
                reps.push(rep);
            }
            r.detail = serde_json::to_value(&reps).map_err(|e| e.to_string())?;
            Outcome { report: r, header: vec!["probe", "N", "max_ratio"], rows }
        }
        other => return Err(format!("unknown experiment {other:?}; known: {}", EXPERIMENTS.join(", "))),
    };
    Ok(out)
}
