//! Gradient flow of the energy over equivariant (suspension) maps.
//!
//! The unknowns are the interior values of the radial profile `alpha`. Each
//! energy evaluation builds the full map and integrates over the 3D grid.
//! A perturbation of one profile value changes the monotone spline only on
//! a few neighbouring intervals, so finite-difference gradients re-evaluate
//! just the grid nodes whose `s` lies there; every other node contributes
//! bit-identical terms to both sides of the difference.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::analysis::{bound_report, energy, Coupling, EnergyReport};
use crate::error::{Error, Result};
use crate::exec::{compensated_sum, Execution};
use crate::maps::suspension::{ProfileTable, RadialProfile, SplineProfile, SuspensionMap};
use crate::maps::MapS3;
use crate::s3geom::GridS3;

pub const DEFAULT_NODES: usize = 64;
/// Gauss–Legendre nodes in `s` per spline interval of the flow grid.
pub const DEFAULT_PER_INTERVAL: usize = 4;
/// Angular resolution of the flow grid.
pub const DEFAULT_ANGULAR: (usize, usize) = (12, 8);

/// Radial profile on the interior nodes `s_i = i pi / (n + 1)`, with the
/// boundary values `alpha(0) = 0`, `alpha(pi) = B pi` held fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub degree: i32,
    pub alpha: Vec<f64>,
}

impl Profile {
    pub fn new(degree: i32, alpha: Vec<f64>) -> Result<Profile> {
        if alpha.len() < 2 {
            return Err(Error::Config(
                "profile needs at least two interior nodes".into(),
            ));
        }
        if let Some(i) = alpha.iter().position(|a| !a.is_finite()) {
            return Err(Error::Input(format!("profile value {i} is not finite")));
        }
        Ok(Profile { degree, alpha })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(degree: i32, nodes: usize, f: F) -> Result<Profile> {
        let alpha = (1..=nodes).map(|i| f(Self::node(i, nodes))).collect();
        Profile::new(degree, alpha)
    }

    /// `alpha(s) = B s`.
    pub fn linear(degree: i32, nodes: usize) -> Profile {
        Profile::from_fn(degree, nodes, |s| degree as f64 * s).expect("finite")
    }

    fn node(i: usize, nodes: usize) -> f64 {
        i as f64 * PI / (nodes + 1) as f64
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn s_nodes(&self) -> Vec<f64> {
        (1..=self.len())
            .map(|i| Self::node(i, self.len()))
            .collect()
    }

    /// Knots including the two boundary points.
    pub fn table(&self) -> ProfileTable {
        let mut s = vec![0.0];
        s.extend(self.s_nodes());
        s.push(PI);
        let mut alpha = vec![0.0];
        alpha.extend(&self.alpha);
        alpha.push(self.degree as f64 * PI);
        ProfileTable { s, alpha }
    }

    pub fn spline(&self) -> Result<SplineProfile> {
        SplineProfile::from_table(&self.table())
    }

    pub fn to_map(&self) -> Result<MapS3> {
        let b = self.degree;
        Ok(MapS3::new(
            format!("profile_suspension(B={b})"),
            SuspensionMap::new(self.spline()?),
        ))
    }

    /// `max_i |alpha_i - f(s_i)|`.
    pub fn sup_distance<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.s_nodes()
            .iter()
            .zip(&self.alpha)
            .map(|(s, a)| (a - f(*s)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest deviation of the interpolant from `f` on a fine sample.
    pub fn sup_distance_dense<F: Fn(f64) -> f64>(&self, f: F, samples: usize) -> Result<f64> {
        let sp = self.spline()?;
        Ok((0..=samples)
            .map(|k| {
                let s = PI * k as f64 / samples as f64;
                (sp.alpha(s) - f(s)).abs()
            })
            .fold(0.0, f64::max))
    }
}

/// Grid aligned with the profile knots: `per_interval` Gauss–Legendre
/// nodes in `s` on each of the `nodes + 1` spline intervals.
pub fn flow_grid(
    nodes: usize,
    per_interval: usize,
    n_theta: usize,
    n_psi: usize,
) -> Result<GridS3> {
    let breaks: Vec<f64> = (0..=nodes + 1)
        .map(|k| PI * k as f64 / (nodes + 1) as f64)
        .collect();
    GridS3::composite_s(&breaks, per_interval, n_theta, n_psi)
}

pub fn default_flow_grid(nodes: usize) -> Result<GridS3> {
    flow_grid(
        nodes,
        DEFAULT_PER_INTERVAL,
        DEFAULT_ANGULAR.0,
        DEFAULT_ANGULAR.1,
    )
}

/// Energy of the suspension map with this profile at constant coupling.
pub fn reduced_energy(prof: &Profile, c: f64, grid: &GridS3) -> Result<f64> {
    let e = energy(&prof.to_map()?, &Coupling::constant(c)?, grid)?;
    if !e.is_finite() {
        return Err(Error::Evaluation(
            "energy of the profile is not finite".into(),
        ));
    }
    Ok(e)
}

/// Metric used to turn the energy gradient into a descent direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    /// Plain Euclidean gradient on the node values.
    None,
    /// Discrete `H^1_0` metric `(1/h) T + h I`, `T = tridiag(-1, 2, -1)`.
    Sobolev,
    /// Difference Hessian of the energy, shifted towards the Sobolev
    /// metric until positive definite.
    Newton,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub c: f64,
    /// Initial step length.
    pub step: f64,
    pub max_iter: usize,
    /// Stop once the gradient sup-norm falls below this.
    pub grad_tol: f64,
    /// Perturbation of the central-difference gradient.
    pub fd_step: f64,
    pub preconditioner: Preconditioner,
    pub exec: Execution,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            c: 2.0,
            step: 1.0,
            max_iter: 200,
            grad_tol: 1e-8,
            fd_step: 1e-5,
            preconditioner: Preconditioner::Newton,
            exec: Execution::default(),
        }
    }
}

/// Backtracking below this step length is stagnation.
pub const MIN_STEP: f64 = 1e-12;
const ARMIJO: f64 = 1e-4;
const HESSIAN_STEP: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub profile: Profile,
    /// Energy after each accepted step, starting with the initial energy.
    pub energy_trace: Vec<f64>,
    pub report: EnergyReport,
    pub converged: bool,
    pub stagnated: bool,
    pub iterations: usize,
    pub grad_sup_norm: f64,
}

/// Energy evaluator with per-node locality for difference quotients.
struct FlowEnergy<'a> {
    grid: &'a GridS3,
    coupling: Coupling,
    /// Grid node indices sorted by `s`.
    by_s: Vec<usize>,
    sorted_s: Vec<f64>,
}

impl<'a> FlowEnergy<'a> {
    fn new(grid: &'a GridS3, c: f64) -> Result<Self> {
        let mut by_s: Vec<usize> = (0..grid.nodes().len()).collect();
        by_s.sort_by(|&i, &j| grid.nodes()[i].s.total_cmp(&grid.nodes()[j].s));
        let sorted_s = by_s.iter().map(|&i| grid.nodes()[i].s).collect();
        Ok(FlowEnergy {
            grid,
            coupling: Coupling::constant(c)?,
            by_s,
            sorted_s,
        })
    }

    fn total(&self, prof: &Profile) -> Result<f64> {
        let e = energy(&prof.to_map()?, &self.coupling, self.grid)?;
        if !e.is_finite() {
            return Err(Error::Evaluation(
                "energy of the profile is not finite".into(),
            ));
        }
        Ok(e)
    }

    /// Knot range `[lo, hi]` on which the spline depends on interior node `i`.
    fn knot_range(prof: &Profile, i: usize) -> (usize, usize) {
        // Knot k = i + 1; the spline slope at a knot depends on its two
        // neighbours, and the end slopes on the first or last three knots.
        let knots = prof.len() + 2;
        let k = i + 1;
        let lo = k.saturating_sub(2);
        let hi = if k + 3 >= knots { knots - 1 } else { k + 2 };
        (lo, hi)
    }

    fn nodes_between(&self, prof: &Profile, lo: usize, hi: usize) -> &[usize] {
        let h = PI / (prof.len() + 1) as f64;
        let (a, b) = (lo as f64 * h, hi as f64 * h);
        let start = self.sorted_s.partition_point(|&s| s < a);
        let end = self.sorted_s.partition_point(|&s| s <= b);
        &self.by_s[start..end]
    }

    /// Grid nodes whose value depends on interior node `i`.
    fn support(&self, prof: &Profile, i: usize) -> &[usize] {
        let (lo, hi) = Self::knot_range(prof, i);
        self.nodes_between(prof, lo, hi)
    }

    fn shifted(prof: &Profile, moves: &[(usize, f64)]) -> Result<MapS3> {
        let mut p = prof.clone();
        for &(i, d) in moves {
            p.alpha[i] += d;
        }
        p.to_map()
    }

    /// Second differences of the energy; entries whose supports do not
    /// overlap are exactly zero.
    fn hessian(&self, prof: &Profile, delta: f64, exec: Execution) -> Result<DMatrix<f64>> {
        let n = prof.len();
        let rows: Vec<Result<Vec<(usize, f64)>>> = exec.map_range(n, |i| {
            let (lo_i, hi_i) = Self::knot_range(prof, i);
            let mut row = Vec::new();
            let nodes = self.support(prof, i);
            let e0 = self.partial(&prof.to_map()?, nodes)?;
            let ep = self.partial(&Self::shifted(prof, &[(i, delta)])?, nodes)?;
            let em = self.partial(&Self::shifted(prof, &[(i, -delta)])?, nodes)?;
            row.push((i, (ep - 2.0 * e0 + em) / (delta * delta)));
            for j in i + 1..n {
                let (lo_j, hi_j) = Self::knot_range(prof, j);
                let (lo, hi) = (lo_i.max(lo_j), hi_i.min(hi_j));
                if lo >= hi {
                    break;
                }
                let nodes = self.nodes_between(prof, lo, hi);
                let mut acc = 0.0;
                for (si, sj, sign) in [
                    (1.0, 1.0, 1.0),
                    (1.0, -1.0, -1.0),
                    (-1.0, 1.0, -1.0),
                    (-1.0, -1.0, 1.0),
                ] {
                    let m = Self::shifted(prof, &[(i, si * delta), (j, sj * delta)])?;
                    acc += sign * self.partial(&m, nodes)?;
                }
                row.push((j, acc / (4.0 * delta * delta)));
            }
            Ok(row)
        });
        let mut hm = DMatrix::zeros(n, n);
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row? {
                hm[(i, j)] = v;
                hm[(j, i)] = v;
            }
        }
        if hm.iter().any(|x| !x.is_finite()) {
            return Err(Error::Evaluation("non-finite energy Hessian".into()));
        }
        Ok(hm)
    }

    fn partial(&self, map: &MapS3, nodes: &[usize]) -> Result<f64> {
        let nodes_all = self.grid.nodes();
        let mut terms = Vec::with_capacity(nodes.len());
        let c = self.coupling.constant_value().unwrap();
        for &k in nodes {
            let n = &nodes_all[k];
            let s = map.sample(&n.point);
            terms.push(n.weight * 0.5 * (c * s.beta.norm_sq() + s.omega.norm_sq() / c));
        }
        Ok(compensated_sum(terms))
    }

    fn gradient(&self, prof: &Profile, delta: f64, exec: Execution) -> Result<Vec<f64>> {
        let comps: Vec<Result<f64>> = exec.map_range(prof.len(), |i| {
            let nodes = self.support(prof, i);
            let mut plus = prof.clone();
            plus.alpha[i] += delta;
            let mut minus = prof.clone();
            minus.alpha[i] -= delta;
            let ep = self.partial(&plus.to_map()?, nodes)?;
            let em = self.partial(&minus.to_map()?, nodes)?;
            Ok((ep - em) / (2.0 * delta))
        });
        let g: Vec<f64> = comps.into_iter().collect::<Result<_>>()?;
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Evaluation("non-finite energy gradient".into()));
        }
        Ok(g)
    }
}

/// Solves `((1/h) T + h I) x = g` with the Thomas algorithm.
fn sobolev_solve(g: &[f64], h: f64) -> Vec<f64> {
    let n = g.len();
    let diag = 2.0 / h + h;
    let off = -1.0 / h;
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = off / diag;
    d[0] = g[0] / diag;
    for i in 1..n {
        let m = diag - off * c[i - 1];
        c[i] = off / m;
        d[i] = (g[i] - off * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn sobolev_matrix(n: usize, h: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.0 / h + h,
        1 => -1.0 / h,
        _ => 0.0,
    })
}

/// `-(H + mu P)^{-1} g` with the smallest `mu` in `0, t, 10 t, ...` that
/// makes the matrix positive definite (`P` the Sobolev metric).
fn newton_direction(hm: DMatrix<f64>, g: &[f64], h: f64) -> Vec<f64> {
    let n = g.len();
    let p = sobolev_matrix(n, h);
    let rhs = DVector::from_iterator(n, g.iter().map(|x| -x));
    let base = 1e-6 * hm.trace().abs().max(1e-300) / p.trace();
    let mut mu = 0.0;
    loop {
        if let Some(ch) = (&hm + &p * mu).cholesky() {
            return ch.solve(&rhs).iter().copied().collect();
        }
        mu = if mu == 0.0 { base } else { mu * 10.0 };
        if !mu.is_finite() {
            return sobolev_solve(g, h).iter().map(|x| -x).collect();
        }
    }
}

/// Descent with Armijo backtracking.
pub fn minimize(prof0: &Profile, grid: &GridS3, opts: &FlowOptions) -> Result<FlowResult> {
    if prof0.degree < 1 {
        return Err(Error::Config(format!(
            "flow needs a target degree B >= 1, got {}",
            prof0.degree
        )));
    }
    if !(opts.step > 0.0 && opts.step.is_finite()) {
        return Err(Error::Config(format!(
            "flow step {} must be positive",
            opts.step
        )));
    }
    if opts.fd_step.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Config(
            "gradient perturbation must be positive".into(),
        ));
    }
    let fe = FlowEnergy::new(grid, opts.c)?;
    let h = PI / (prof0.len() + 1) as f64;
    let mut prof = prof0.clone();
    let mut e = fe.total(&prof)?;
    let mut trace = vec![e];
    let mut step = opts.step;
    let mut converged = false;
    let mut stagnated = false;
    let mut iterations = 0;
    let mut grad_sup = f64::INFINITY;
    while iterations < opts.max_iter {
        let g = fe.gradient(&prof, opts.fd_step, opts.exec)?;
        grad_sup = g.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
        if grad_sup < opts.grad_tol {
            converged = true;
            break;
        }
        let dir: Vec<f64> = match opts.preconditioner {
            Preconditioner::None => g.iter().map(|x| -x).collect(),
            Preconditioner::Sobolev => sobolev_solve(&g, h).iter().map(|x| -x).collect(),
            Preconditioner::Newton => {
                step = opts.step.min(1.0);
                newton_direction(fe.hessian(&prof, HESSIAN_STEP, opts.exec)?, &g, h)
            }
        };
        let slope: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        let accepted = loop {
            if step < MIN_STEP {
                break None;
            }
            let trial: Vec<f64> = prof
                .alpha
                .iter()
                .zip(&dir)
                .map(|(a, d)| a + step * d)
                .collect();
            let cand = Profile::new(prof.degree, trial)?;
            match fe.total(&cand) {
                Ok(ec) if ec <= e + ARMIJO * step * slope => break Some((cand, ec)),
                Ok(_) | Err(Error::Evaluation(_)) => step *= 0.5,
                Err(other) => return Err(other),
            }
        };
        iterations += 1;
        match accepted {
            Some((cand, ec)) => {
                prof = cand;
                e = ec;
                trace.push(e);
                step *= 2.0;
            }
            None => {
                stagnated = true;
                break;
            }
        }
    }
    let report = bound_report(&prof.to_map()?, &fe.coupling, grid)?;
    Ok(FlowResult {
        profile: prof,
        energy_trace: trace,
        report,
        converged,
        stagnated,
        iterations,
        grad_sup_norm: grad_sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::FOUR_PI2;
    use crate::s3geom::GridSpec;

    fn grid() -> GridS3 {
        GridS3::build(GridSpec::new(16, 8, 8)).unwrap()
    }

    #[test]
    fn linear_profile_is_the_identity() {
        let e = reduced_energy(&Profile::linear(1, 16), 2.0, &grid()).unwrap();
        assert!((e / FOUR_PI2 - 1.0).abs() < 1e-9, "{e}");
    }

    #[test]
    fn vacuum_profile_has_zero_energy() {
        let p = Profile::new(0, vec![0.0; 8]).unwrap();
        assert!(reduced_energy(&p, 2.0, &grid()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn arctan_profile_is_above_the_bound() {
        let p = Profile::from_fn(1, 32, |s| 2.0 * (2.0 * (0.5 * s).tan()).atan()).unwrap();
        assert!(reduced_energy(&p, 2.0, &grid()).unwrap() > FOUR_PI2 * 1.01);
    }

    #[test]
    fn local_gradient_matches_full_differences() {
        let g = grid();
        let p = Profile::from_fn(1, 12, |s| s + 0.3 * (2.0 * s).sin()).unwrap();
        let fe = FlowEnergy::new(&g, 2.0).unwrap();
        let local = fe.gradient(&p, 1e-5, Execution::Sequential).unwrap();
        for i in [0, 1, 5, 10, 11] {
            let mut a = p.clone();
            a.alpha[i] += 1e-5;
            let mut b = p.clone();
            b.alpha[i] -= 1e-5;
            let full = (fe.total(&a).unwrap() - fe.total(&b).unwrap()) / 2e-5;
            assert!(
                (full - local[i]).abs() < 1e-6 * (1.0 + full.abs()),
                "{i}: {full} {}",
                local[i]
            );
        }
    }

    #[test]
    fn sobolev_solve_inverts_the_metric() {
        let h = 0.3;
        let g = [1.0, -2.0, 0.5, 4.0];
        let x = sobolev_solve(&g, h);
        for i in 0..4 {
            let mut r = (2.0 / h + h) * x[i];
            if i > 0 {
                r -= x[i - 1] / h;
            }
            if i < 3 {
                r -= x[i + 1] / h;
            }
            assert!((r - g[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_flow_inputs() {
        let g = grid();
        let p0 = Profile::new(0, vec![0.0; 4]).unwrap();
        assert!(matches!(
            minimize(&p0, &g, &FlowOptions::default()),
            Err(Error::Config(_))
        ));
        let p1 = Profile::linear(1, 4);
        let opts = FlowOptions {
            step: 0.0,
            ..Default::default()
        };
        assert!(matches!(minimize(&p1, &g, &opts), Err(Error::Config(_))));
        assert!(Profile::new(1, vec![0.0, f64::NAN]).is_err());
    }
}
