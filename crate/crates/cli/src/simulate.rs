//! `vnlw simulate`: one run directory per invocation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use vnlw_core::io::{sidecar_path, write_field};
use vnlw_core::randomize::{fixture_pair, randomize_data, FixtureSpec};
use vnlw_core::solver::{dealias_pad, global_run, Forcing, RunStatus, SolverConfig, StochasticForcing};
use vnlw_core::{make_grid, PhaseState, SpectralField};

use crate::config::{ForcingKind, RunConfig};

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config: Value,
    pub version: &'static str,
    pub seeds: crate::config::Seeds,
    pub started: f64,
    pub finished: f64,
    pub status: RunStatus,
    pub t_end: f64,
    /// Time and `H^σ` pair norm when the overflow guard fired.
    pub overflow: Option<(f64, f64)>,
    pub windows: usize,
    pub files: Vec<FileEntry>,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn exit_code(status: RunStatus) -> u8 {
    match status {
        RunStatus::Completed => 0,
        RunStatus::ContractionFailed => 2,
        RunStatus::NormOverflow => 3,
    }
}

fn solver_config(cfg: &RunConfig) -> vnlw_core::Result<SolverConfig> {
    let d = &cfg.dynamics;
    let mut s = SolverConfig::new(d.p, d.sign)?;
    s.damping = d.damping;
    s.integrator = d.integrator;
    s.h = cfg.time.h;
    s.t_loc = cfg.time.t_loc;
    s.cadence = cfg.output.cadence;
    s.pad = cfg.grid.pad.unwrap_or_else(|| dealias_pad(d.p));
    s.picard_tol = cfg.tolerances.picard_tol;
    s.picard_max = cfg.tolerances.picard_max;
    s.overflow = cfg.tolerances.overflow;
    s.window_floor = cfg.tolerances.window_floor;
    s.validate()?;
    Ok(s)
}

fn hash_file(root: &Path, rel: &str) -> std::io::Result<FileEntry> {
    let bytes = fs::read(root.join(rel))?;
    Ok(FileEntry { path: rel.to_string(), bytes: bytes.len() as u64, sha256: format!("{:x}", Sha256::digest(&bytes)) })
}

/// Failure with its exit code: 64 for unusable input, 1 for run or output errors.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn bad(e: impl std::fmt::Display) -> Failure {
    Failure { code: 64, message: e.to_string() }
}

fn fail(e: impl std::fmt::Display) -> Failure {
    Failure { code: 1, message: e.to_string() }
}

/// Runs the configured simulation and writes the run directory.
pub fn run(cfg: &RunConfig, raw: Value) -> Result<RunStatus, Failure> {
    let started = now();
    let scfg = solver_config(cfg).map_err(bad)?;
    let grid = make_grid(cfg.grid.n, scfg.pad).map_err(bad)?;
    let spec = FixtureSpec {
        s_target: cfg.initial.s,
        profile: cfg.initial.profile,
        seed: cfg.seeds.data,
        amplitude: cfg.initial.amplitude,
        position_only: cfg.initial.position_only,
    };
    let (u0, u1) = if cfg.initial.amplitude == 0.0 {
        (SpectralField::zeros(&grid), SpectralField::zeros(&grid))
    } else {
        fixture_pair(&grid, &spec).map_err(bad)?
    };
    // With randomized forcing the data drive the linear part z and v starts at rest.
    let (mut forcing, init) = match cfg.dynamics.forcing {
        ForcingKind::None => (Forcing::None, PhaseState::new(0.0, u0, u1)),
        ForcingKind::Stochastic => {
            let f = StochasticForcing::new(&grid, cfg.dynamics.alpha, cfg.seeds.noise, cfg.seeds.path, scfg.h).map_err(bad)?;
            (Forcing::Stochastic(f), PhaseState::new(0.0, u0, u1))
        }
        ForcingKind::Randomized => {
            let r = randomize_data(&u0, &u1, cfg.dynamics.distribution, cfg.seeds.noise).map_err(bad)?;
            let z = SpectralField::zeros(&grid);
            (Forcing::Randomized(Box::new(r)), PhaseState::new(0.0, z.clone(), z))
        }
    };
    let init = init.map_err(bad)?;

    let dir = PathBuf::from(&cfg.output.directory);
    let io = |e: std::io::Error| fail(format!("writing outputs: {e}"));
    fs::create_dir_all(&dir).map_err(|e| fail(format!("{}: {e}", dir.display())))?;
    let (traj, energies) = global_run(&init, cfg.time.t_final, &mut forcing, &scfg).map_err(fail)?;

    let mut files = Vec::new();
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(&raw).map_err(fail)? + "\n").map_err(io)?;
    files.push("config.json".to_string());

    let mut csv = String::from("t,E,H1,Lp1,quadratic,potential\n");
    for r in &energies {
        // ∫|v|^{p+1} recovered from the potential term.
        let lp1 = (r.potential * (cfg.dynamics.p + 1.0)).powf(1.0 / (cfg.dynamics.p + 1.0));
        csv.push_str(&format!("{},{},{},{},{},{}\n", r.t, r.e, r.h1, lp1, r.quadratic, r.potential));
    }
    fs::write(dir.join("energy.csv"), csv).map_err(io)?;
    files.push("energy.csv".to_string());

    if cfg.output.snapshots {
        fs::create_dir_all(dir.join("snapshots")).map_err(io)?;
        for (k, s) in traj.states.iter().enumerate() {
            for (name, f) in [("v", &s.v), ("vt", &s.vt)] {
                let rel = format!("snapshots/{name}_{k:05}.bin");
                let path = dir.join(&rel);
                write_field(&path, f, s.t).map_err(fail)?;
                files.push(rel.clone());
                let side = sidecar_path(&path);
                files.push(format!("snapshots/{}", side.file_name().expect("file name").to_string_lossy()));
            }
        }
    }

    let windows: Vec<Value> = traj
        .windows
        .iter()
        .map(|w| serde_json::json!({ "length": w.length, "iterations": w.iterations, "ratio": w.ratio, "converged": w.converged }))
        .collect();
    fs::write(dir.join("windows.json"), serde_json::to_string_pretty(&windows).map_err(fail)? + "\n").map_err(io)?;
    files.push("windows.json".to_string());

    let files = files.iter().map(|f| hash_file(&dir, f)).collect::<std::io::Result<Vec<_>>>().map_err(io)?;
    let manifest = RunManifest {
        config: raw,
        version: env!("CARGO_PKG_VERSION"),
        seeds: cfg.seeds.clone(),
        started,
        finished: now(),
        status: traj.status,
        t_end: traj.t_end,
        overflow: traj.overflow,
        windows: traj.windows.len(),
        files,
    };
    // Written last, through a rename, so a present manifest means a finished run.
    let tmp = dir.join(".manifest.json.tmp");
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all((serde_json::to_string_pretty(&manifest).map_err(fail)? + "\n").as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, dir.join("manifest.json")).map_err(io)?;
    Ok(traj.status)
}
