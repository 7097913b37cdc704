use std::time::Instant;

use beltrami_core::analysis::{
    bound_report, check_properties, degree, energy, pointwise_coupling, radial_profile, FOUR_PI2,
};
use beltrami_core::curlspec::{sample_points, AssemblyOptions, Cluster, CurlSpectrum};
use beltrami_core::flow::{flow_grid, minimize, FlowOptions, Profile};
use beltrami_core::maps::suspension::{ArctanProfile, RadialProfile};
use beltrami_core::maps::{make_map, MapFamily, MapS3};
use beltrami_core::s3geom::{GridS3, GridSpec};
use beltrami_core::selftest;
use serde_json::{json, Value};

use crate::config::{FlowInit, RunConfig};
use crate::output::{format_f64, write_csv};
use crate::CliError;

/// Report body plus whether the run's own assertions held.
pub struct Outcome {
    pub body: Value,
    pub ok: bool,
    pub failure: Option<String>,
}

impl Outcome {
    fn pass(body: Value) -> Outcome {
        Outcome {
            body,
            ok: true,
            failure: None,
        }
    }
}

fn build_map(cfg: &RunConfig) -> Result<MapS3, CliError> {
    make_map(&cfg.map).map_err(|e| CliError::Usage(e.to_string()))
}

fn build_grid(spec: GridSpec) -> Result<GridS3, CliError> {
    GridS3::build(spec).map_err(|e| CliError::Usage(e.to_string()))
}

fn is_suspension(m: &MapFamily) -> bool {
    matches!(
        m,
        MapFamily::Suspension { .. } | MapFamily::ProfileSuspension { .. }
    )
}

fn write_radial(cfg: &RunConfig, map: &MapS3) -> Result<(), CliError> {
    let Some(path) = &cfg.radial_csv else {
        return Ok(());
    };
    if !is_suspension(&cfg.map) {
        return Err(CliError::Usage(
            "--radial-csv needs a suspension map".into(),
        ));
    }
    let rows: Vec<Vec<String>> = radial_profile(map, cfg.radial_samples)
        .iter()
        .map(|r| {
            [
                r.s,
                r.beta_sq,
                r.c_pt,
                r.lambda_sq[0],
                r.lambda_sq[1],
                r.lambda_sq[2],
            ]
            .map(format_f64)
            .to_vec()
        })
        .collect();
    write_csv(
        path,
        &[
            "s",
            "beta_sq",
            "c_pt",
            "lambda1_sq",
            "lambda2_sq",
            "lambda3_sq",
        ],
        &rows,
    )
}

pub fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let t = Instant::now();
    let spec = CurlSpectrum::compute(cfg.spectrum.max_degree, &AssemblyOptions::default())?;
    let r = spec.report(cfg.spectrum.tol)?;
    let mut clusters = r.clusters.clone();
    if r.gradient_count > 0 {
        clusters.push(Cluster {
            mu: 0.0,
            multiplicity: r.gradient_count,
        });
    }
    clusters.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    let elapsed = t.elapsed().as_secs_f64();
    Ok(Outcome::pass(json!({
        "K": r.max_degree,
        "clusters": clusters,
        "rankG": r.rank_g,
        "gradient_count": r.gradient_count,
        "total_multiplicity": r.total_multiplicity(),
        "cluster_tol": r.cluster_tol,
        "max_integrality_error": r.max_integrality_error,
        "basis_size": spec.pencil.basis.len(),
        "elapsed_s": elapsed,
    })))
}

pub fn check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let map = build_map(cfg)?;
    let grid = build_grid(cfg.grid)?;
    let coupling = cfg.coupling()?;
    let report = check_properties(&map, &coupling, &grid, &cfg.tolerances)?;
    let cpt: Vec<Option<f64>> = grid.map_nodes(|n| pointwise_coupling(&map, &n.point).value());
    let values: Vec<f64> = cpt.iter().flatten().copied().collect();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    write_radial(cfg, &map)?;
    let failed = report.failed();
    let failure = (!failed.is_empty()).then(|| format!("failed checks: {}", failed.join(", ")));
    Ok(Outcome {
        body: json!({
            "map": report.map,
            "all_passed": failed.is_empty(),
            "report": report,
            "pointwise_coupling": {
                "min": lo,
                "max": hi,
                "critical_points": cpt.len() - values.len(),
            },
        }),
        ok: failed.is_empty(),
        failure,
    })
}

pub fn energy_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let map = build_map(cfg)?;
    let grid = build_grid(cfg.grid)?;
    let r = bound_report(&map, &cfg.coupling()?, &grid)?;
    write_radial(cfg, &map)?;
    Ok(Outcome::pass(json!({
        "map": r.map,
        "E": r.energy,
        "deg": r.degree,
        "degree_resolved": r.degree_resolved,
        "bound": r.bound,
        "ratio": r.ratio,
        "defect": r.defect,
        "c_used": r.c_used,
        "c_value": r.c_value,
        "completion_residual": r.completion_residual,
        "bound_holds": r.bound_holds,
    })))
}

fn initial_profile(cfg: &RunConfig) -> Result<Profile, CliError> {
    let f = &cfg.flow;
    let b = f.degree as f64;
    let p = match f.init {
        FlowInit::Linear => Profile::linear(f.degree, f.nodes),
        FlowInit::Perturbed { amplitude } => {
            Profile::from_fn(f.degree, f.nodes, |s| b * s + amplitude * (2.0 * s).sin())?
        }
        FlowInit::Suspension { a } => {
            if f.degree != 1 {
                return Err(CliError::Usage("a suspension start needs B = 1".into()));
            }
            let prof = ArctanProfile::new(a)?;
            Profile::from_fn(1, f.nodes, |s| prof.alpha(s))?
        }
    };
    Ok(p)
}

pub fn flow(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let f = &cfg.flow;
    let prof0 = initial_profile(cfg).map_err(|e| match e {
        CliError::Core(e) => CliError::Usage(e.to_string()),
        e => e,
    })?;
    let grid = flow_grid(f.nodes, f.per_interval, f.n_theta, f.n_psi)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let opts = FlowOptions {
        c: cfg.c,
        step: f.step,
        max_iter: f.max_iter,
        grad_tol: f.grad_tol,
        fd_step: f.fd_step,
        preconditioner: f.preconditioner,
        ..Default::default()
    };
    let t = Instant::now();
    let r = minimize(&prof0, &grid, &opts).map_err(|e| match e {
        beltrami_core::error::Error::Config(m) => CliError::Usage(m),
        e => CliError::Core(e),
    })?;
    let elapsed = t.elapsed().as_secs_f64();
    let b = f.degree as f64;
    let s_nodes = r.profile.s_nodes();
    if let Some(path) = &f.profile_csv {
        let t = r.profile.table();
        let rows: Vec<Vec<String>> =
            t.s.iter()
                .zip(&t.alpha)
                .map(|(s, a)| vec![format_f64(*s), format_f64(*a)])
                .collect();
        write_csv(path, &["s", "alpha"], &rows)?;
    }
    if let Some(path) = &f.trace_csv {
        let rows: Vec<Vec<String>> = r
            .energy_trace
            .iter()
            .enumerate()
            .map(|(i, e)| vec![i.to_string(), format_f64(*e)])
            .collect();
        write_csv(path, &["iteration", "energy"], &rows)?;
    }
    let monotone = r.energy_trace.windows(2).all(|w| w[1] <= w[0]);
    Ok(Outcome {
        body: json!({
            "B": f.degree,
            "c": cfg.c,
            "converged": r.converged,
            "stagnated": r.stagnated,
            "iterations": r.iterations,
            "grad_sup_norm": r.grad_sup_norm,
            "E": r.report.energy,
            "deg": r.report.degree,
            "defect": r.report.defect,
            "E_over_bound": r.report.energy / (FOUR_PI2 * b),
            "sup_distance_to_linear": r.profile.sup_distance(|s| b * s),
            "trace_monotone": monotone,
            "elapsed_s": elapsed,
            "report": r.report,
            "energy_trace": r.energy_trace,
            "profile": { "s": s_nodes, "alpha": r.profile.alpha },
        }),
        ok: monotone,
        failure: (!monotone).then(|| "energy trace increased".to_string()),
    })
}

/// `log2(|q0 - q1| / |q1 - q2|)`; `None` once differences reach roundoff.
fn observed_order(q: &[f64]) -> Vec<Option<f64>> {
    q.windows(3)
        .map(|w| {
            let (d0, d1) = ((w[0] - w[1]).abs(), (w[1] - w[2]).abs());
            let floor = 1e-13 * w[2].abs().max(1.0);
            (d0 > floor && d1 > floor).then(|| (d0 / d1).log2())
        })
        .collect()
}

pub fn convergence(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let map = build_map(cfg)?;
    let coupling = cfg.coupling()?;
    let levels = cfg.convergence.levels.max(3);
    let mut rows = Vec::new();
    let (mut es, mut ds) = (Vec::new(), Vec::new());
    for k in (0..levels).rev() {
        let f = 1usize << k;
        let g = cfg.grid;
        let spec = GridSpec::new(
            (g.n_s / f).max(GridSpec::MIN),
            (g.n_theta / f).max(GridSpec::MIN),
            (g.n_psi / f).max(GridSpec::MIN),
        );
        let grid = build_grid(spec)?;
        let e = energy(&map, &coupling, &grid)?;
        let d = degree(&map, &grid);
        es.push(e);
        ds.push(d);
        rows.push(json!({ "grid": [spec.n_s, spec.n_theta, spec.n_psi], "E": e, "deg": d }));
    }
    let pts = sample_points(10, cfg.seed);
    Ok(Outcome::pass(json!({
        "map": map.label(),
        "c_used": coupling.label(),
        "levels": rows,
        "energy_order": observed_order(&es),
        "degree_order": observed_order(&ds),
        "fd_richardson_slope": map.richardson_slope(&pts, 1e-3),
    })))
}

pub fn selftest_cmd() -> Result<Outcome, CliError> {
    let checks = selftest::run()?;
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.name)
        .collect();
    let failure = (!failed.is_empty()).then(|| format!("selftest failed: {}", failed.join(", ")));
    Ok(Outcome {
        body: json!({ "passed": failed.is_empty(), "checks": checks }),
        ok: failed.is_empty(),
        failure,
    })
}
