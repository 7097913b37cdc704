//! Energy, degree, Bogomol'nyi defect and the property checks for
//! Beltrami maps `S^3 -> S^3`.
//!
//! Frame derivatives of sampled quantities are central differences along
//! the frame integral curves, which are great circles:
//! `e_i(f)(p) ~ (f(gamma_i(h)) - f(gamma_i(-h))) / 2h`.
//! Exterior derivatives pick up the commutator term
//! `d beta(e_i, e_j) = e_i(beta_j) - e_j(beta_i) - beta([e_i, e_j])`
//! with `[e_a, e_b] = -2 eps_abc e_c`.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::suspension::ArctanProfile;
use crate::maps::{FormSample, MapS3, Strain};
use crate::poly::FrameField;
use crate::s3geom::{
    axpy4, dot4, frame_at, frame_vector, norm4, scale4, GridS3, OneForm3, Point4, Vec4,
};

/// `2 Vol(S^3) = 4 pi^2`, the energy of a degree-one BPS map.
pub const FOUR_PI2: f64 = 4.0 * PI * PI;
/// Below this `|beta|` the pointwise coupling is undefined.
pub const CRITICAL_BETA: f64 = 1e-10;
/// Distance from an integer beyond which the degree is "unresolved".
pub const DEGREE_RESOLUTION: f64 = 1e-3;
/// Relative quadrature slack allowed below the topological bound.
pub const BOUND_SLACK: f64 = 1e-4;
/// Singular-value threshold of the rank histogram.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Coupling `c` in the energy: a constant, the closed form that makes a
/// suspension map BPS, or the value measured from the map itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Coupling {
    Constant {
        c: f64,
    },
    /// `4a / (1 + a^2 + (1 - a^2) cos s)`.
    Suspension {
        a: f64,
    },
    /// `<*d beta, beta> / |beta|^2` at each point.
    Measured,
}

impl Coupling {
    pub fn constant(c: f64) -> Result<Coupling> {
        let k = Coupling::Constant { c };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Coupling::Constant { c } if !(c > 0.0 && c.is_finite()) => {
                Err(Error::Input(format!("coupling c = {c} must be positive")))
            }
            Coupling::Suspension { a } if !(a > 0.0 && a.is_finite()) => Err(Error::Input(
                format!("suspension coupling needs a > 0, got {a}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Coupling::Constant { c } => Some(*c),
            _ => None,
        }
    }

    /// `"constant"` or `"pointwise"`.
    pub fn label(&self) -> &'static str {
        match self {
            Coupling::Constant { .. } => "constant",
            _ => "pointwise",
        }
    }

    /// Value at `p`; `None` where a measured coupling is undefined.
    fn at(&self, map: &MapS3, p: &Point4) -> Option<f64> {
        match self {
            Coupling::Constant { c } => Some(*c),
            Coupling::Suspension { a } => Some(ArctanProfile { a: *a }.coupling(p.polar_angle())),
            Coupling::Measured => Local::at(map, p).measured_coupling(),
        }
    }

    fn at_sample(&self, map: &MapS3, local: &Local) -> Option<f64> {
        match self {
            Coupling::Measured => local.measured_coupling(),
            _ => self.at(map, &local.sample.point),
        }
    }
}

/// Samples at `p` and at the six frame-geodesic neighbours.
#[derive(Clone, Debug)]
struct Local {
    h: f64,
    sample: FormSample,
    /// `neighbours[i] = [gamma_i(h), gamma_i(-h)]`.
    neighbours: [[FormSample; 2]; 3],
}

fn stencil(p: &Point4, h: f64) -> [[Point4; 2]; 3] {
    let frame = frame_at(p);
    frame
        .vectors
        .map(|e| [p.geodesic(&e, h), p.geodesic(&e, -h)])
}

/// Frame derivative table `d[i][j] = e_i(f_j)` from neighbour values.
fn frame_jacobian(values: &[[[f64; 3]; 2]; 3], h: f64) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| (values[i][0][j] - values[i][1][j]) / (2.0 * h))
    })
}

/// `*d b` for a 1-form with coframe components `b` and derivatives
/// `d[i][j] = e_i(b_j)`.
fn star_d(d: &[[f64; 3]; 3], b: &[f64; 3]) -> OneForm3 {
    OneForm3([
        d[1][2] - d[2][1] + 2.0 * b[0],
        d[2][0] - d[0][2] + 2.0 * b[1],
        d[0][1] - d[1][0] + 2.0 * b[2],
    ])
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl Local {
    fn at(map: &MapS3, p: &Point4) -> Local {
        let h = map.fd_step();
        let pts = stencil(p, h);
        Local {
            h,
            sample: map.sample(p),
            neighbours: pts.map(|pair| pair.map(|q| map.sample(&q))),
        }
    }

    fn beta_derivatives(&self) -> [[f64; 3]; 3] {
        frame_jacobian(&self.neighbours.map(|pair| pair.map(|s| s.beta.0)), self.h)
    }

    /// `*d beta` from differences of `beta`.
    fn star_dbeta(&self) -> OneForm3 {
        star_d(&self.beta_derivatives(), &self.sample.beta.0)
    }

    /// `div xi_hat = sum_i e_i(beta_i)`; the frame is divergence free.
    fn div_xi_hat(&self) -> f64 {
        let d = self.beta_derivatives();
        d[0][0] + d[1][1] + d[2][2]
    }

    fn measured_coupling(&self) -> Option<f64> {
        let b = &self.sample.beta;
        let n2 = b.norm_sq();
        (n2.sqrt() >= CRITICAL_BETA).then(|| self.star_dbeta().dot(b) / n2)
    }

    /// `curl(*omega)`; equals `curl curl beta` since `omega = d beta`.
    fn curl_star_omega(&self) -> OneForm3 {
        let vals = self
            .neighbours
            .map(|pair| pair.map(|s| s.omega.star(1.0).0));
        star_d(
            &frame_jacobian(&vals, self.h),
            &self.sample.omega.star(1.0).0,
        )
    }

    /// Tangential part at `phi(p)` of `sum_i e_i(d phi(e_i))`.
    fn tension(&self) -> Vec4 {
        let mut t = [0.0; 4];
        for (i, pair) in self.neighbours.iter().enumerate() {
            let diff: Vec4 = std::array::from_fn(|k| {
                (pair[0].pushed[i][k] - pair[1].pushed[i][k]) / (2.0 * self.h)
            });
            t = axpy4(1.0, &diff, &t);
        }
        self.sample.image.project_tangent(&t)
    }
}

fn check_coupling(c: Option<f64>, p: &Point4) -> Result<f64> {
    match c {
        Some(c) if c > 0.0 && c.is_finite() => Ok(c),
        Some(c) => Err(Error::Input(format!(
            "coupling sample c = {c} at {:?} is not positive",
            p.coords()
        ))),
        None => Err(Error::Input(format!(
            "coupling undefined at the critical point {:?}",
            p.coords()
        ))),
    }
}

/// `1/2 integral (c |beta|^2 + |omega|^2 / c)`.
pub fn energy(map: &MapS3, coupling: &Coupling, grid: &GridS3) -> Result<f64> {
    coupling.validate()?;
    let vals: Vec<Result<f64>> = grid.map_nodes(|n| {
        let s = map.sample(&n.point);
        let c = check_coupling(coupling.at(map, &n.point), &n.point)?;
        Ok(0.5 * (c * s.beta.norm_sq() + s.omega.norm_sq() / c))
    });
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    Ok(grid.integrate_values(&vals))
}

/// `(1 / 4 pi^2) integral phi^*(eta ^ d eta)`.
pub fn degree(map: &MapS3, grid: &GridS3) -> f64 {
    grid.quadrature(|p| map.sample(p).volume_density()) / FOUR_PI2
}

/// `|| *d beta - c beta ||_{L^2}`.
pub fn bps_defect(map: &MapS3, coupling: &Coupling, grid: &GridS3) -> Result<f64> {
    coupling.validate()?;
    let vals: Vec<Result<f64>> = grid.map_nodes(|n| {
        let local = Local::at(map, &n.point);
        let c = check_coupling(coupling.at_sample(map, &local), &n.point)?;
        Ok(local.star_dbeta().sub(&local.sample.beta.scale(c)).norm())
    });
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    Ok(grid.l2_norm(&vals))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointwiseCoupling {
    /// `|beta| < 1e-10`: a zero of the pulled-back form.
    CriticalPoint {
        beta_norm: f64,
    },
    Value {
        c: f64,
        residual: f64,
    },
}

impl PointwiseCoupling {
    pub fn value(&self) -> Option<f64> {
        match self {
            PointwiseCoupling::Value { c, .. } => Some(*c),
            PointwiseCoupling::CriticalPoint { .. } => None,
        }
    }
}

/// `c_pt = <*d beta, beta> / |beta|^2` and the collinearity residual
/// `|*d beta - c_pt beta|`.
pub fn pointwise_coupling(map: &MapS3, p: &Point4) -> PointwiseCoupling {
    let local = Local::at(map, p);
    let beta = local.sample.beta;
    match local.measured_coupling() {
        None => PointwiseCoupling::CriticalPoint {
            beta_norm: beta.norm(),
        },
        Some(c) => PointwiseCoupling::Value {
            c,
            residual: local.star_dbeta().sub(&beta.scale(c)).norm(),
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckTolerances {
    pub collinearity: f64,
    pub strain_eigenpair: f64,
    pub eigenvalue_identity: f64,
    pub confoliation: f64,
    pub laplacian_eigenform: f64,
    pub divergence_identity: f64,
    pub conformal_rescale: f64,
    pub tension_identity: f64,
    pub determinant_sign: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        CheckTolerances {
            collinearity: 1e-6,
            strain_eigenpair: 1e-6,
            eigenvalue_identity: 1e-5,
            confoliation: 1e-6,
            laplacian_eigenform: 1e-4,
            divergence_identity: 1e-4,
            conformal_rescale: 1e-4,
            tension_identity: 1e-4,
            determinant_sign: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    /// `max`, `l2`, `min` or `count`.
    pub measure: String,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PropertyCheck {
    fn new(name: &str, measure: &str, residual: f64, tolerance: f64) -> Self {
        let status = if residual.is_finite() && residual <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        PropertyCheck {
            name: name.into(),
            measure: measure.into(),
            residual: Some(residual),
            tolerance,
            status,
            note: None,
        }
    }

    fn skipped(name: &str, measure: &str, tolerance: f64, note: &str) -> Self {
        PropertyCheck {
            name: name.into(),
            measure: measure.into(),
            residual: None,
            tolerance,
            status: CheckStatus::Skipped,
            note: Some(note.into()),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub map: String,
    pub coupling: Coupling,
    pub checks: Vec<PropertyCheck>,
    /// Nodes with numerical rank 0, 1, 2, 3.
    pub rank_histogram: [usize; 4],
    /// Nodes with `|beta| < 1e-10`, excluded from pointwise ratios.
    pub critical_points: usize,
    pub min_confoliation: f64,
    pub min_det: f64,
    pub nodes: usize,
}

impl PropertyReport {
    pub fn check(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// True when no check failed; skipped checks do not count.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Per-node quantities behind the property checks.
#[derive(Clone, Copy, Debug, Default)]
struct NodeChecks {
    collinearity: f64,
    /// `None` at critical points.
    strain: Option<f64>,
    eigen_identity: Option<f64>,
    confoliation: f64,
    laplacian: Option<f64>,
    divergence: Option<f64>,
    conformal: Option<f64>,
    tension: f64,
    rank: usize,
    det: f64,
}

/// `|lambda_1^2 - |beta|^2|`, the angle between `xi_hat` and the
/// `lambda_1^2` eigenspace, and the other two eigenvalues. `lambda_1^2`
/// is the strain eigenvalue closest to `|beta|^2`.
fn strain_pair(strain: &Strain, xi_hat: &[f64; 3], cluster_tol: f64) -> (f64, f64, f64, [f64; 2]) {
    let b2 = norm3(xi_hat).powi(2);
    let ev = strain.eigenvalues;
    let k = (0..3)
        .min_by(|&i, &j| (ev[i] - b2).abs().total_cmp(&(ev[j] - b2).abs()))
        .unwrap();
    let l1 = ev[k];
    let v = Vector3::from_column_slice(xi_hat);
    let mut proj = Vector3::zeros();
    for (i, &e_i) in ev.iter().enumerate() {
        if (e_i - l1).abs() <= cluster_tol * l1.abs().max(1.0) {
            let e = strain.eigenvectors.column(i);
            proj += e * e.dot(&v);
        }
    }
    let sin = ((v - proj).norm() / v.norm()).min(1.0);
    let others: Vec<f64> = (0..3).filter(|&i| i != k).map(|i| ev[i]).collect();
    ((l1 - b2).abs(), sin.asin(), l1, [others[0], others[1]])
}

fn node_checks(map: &MapS3, coupling: &Coupling, p: &Point4, tol: &CheckTolerances) -> NodeChecks {
    let local = Local::at(map, p);
    let s = &local.sample;
    let beta = s.beta;
    let xi_hat = s.xi_hat();
    let star_dbeta = local.star_dbeta();
    let div = local.div_xi_hat();

    let xi_target = frame_vector(FrameField::Xi, &s.image);
    let push_xi_hat = (0..3).fold([0.0; 4], |acc, j| axpy4(xi_hat[j], &s.pushed[j], &acc));
    let collinearity = norm4(&axpy4(-beta.norm_sq(), &xi_target, &push_xi_hat));

    let tension = (div - dot4(&local.tension(), &xi_target)).abs();
    let jac = &s.jacobian;
    let mut out = NodeChecks {
        collinearity,
        confoliation: star_dbeta.dot(&beta),
        tension,
        rank: jac.rank(RANK_THRESHOLD),
        det: jac.det(),
        ..Default::default()
    };
    if beta.norm() < CRITICAL_BETA {
        return out;
    }
    let c = coupling.at_sample(map, &local);
    let (dl, angle, l1, [l2, l3]) = strain_pair(&Strain::of(jac), &xi_hat, tol.strain_eigenpair);
    out.strain = Some(dl.max(angle));
    if let Some(c) = c {
        out.eigen_identity = Some((4.0 * l2 * l3 - c * c * l1).abs());
        out.conformal = Some(star_dbeta.scale(1.0 / c).sub(&beta).norm());
        let xi_hat_c = match coupling {
            Coupling::Constant { .. } => 0.0,
            _ => {
                let cs = stencil(p, local.h)
                    .map(|pair| pair.map(|q| coupling.at(map, &q).unwrap_or(f64::NAN)));
                (0..3)
                    .map(|i| xi_hat[i] * (cs[i][0] - cs[i][1]) / (2.0 * local.h))
                    .sum()
            }
        };
        out.divergence = Some(div + xi_hat_c / c);
    }
    if let Some(c) = coupling.constant_value() {
        out.laplacian = Some(local.curl_star_omega().sub(&beta.scale(c * c)).norm());
    }
    out
}

/// Runs checks (a) through (j) over the grid. Failed checks are findings
/// and never errors.
pub fn check_properties(
    map: &MapS3,
    coupling: &Coupling,
    grid: &GridS3,
    tol: &CheckTolerances,
) -> Result<PropertyReport> {
    coupling.validate()?;
    let nodes = grid.map_nodes(|n| node_checks(map, coupling, &n.point, tol));
    let max = |f: &dyn Fn(&NodeChecks) -> f64| nodes.iter().map(f).fold(0.0, f64::max);
    let max_opt = |f: &dyn Fn(&NodeChecks) -> Option<f64>| {
        nodes.iter().filter_map(f).map(f64::abs).fold(0.0, f64::max)
    };
    let l2_opt = |f: &dyn Fn(&NodeChecks) -> Option<f64>| {
        let vals: Vec<f64> = nodes.iter().map(|n| f(n).unwrap_or(0.0)).collect();
        grid.l2_norm(&vals)
    };
    let critical_points = nodes.iter().filter(|n| n.strain.is_none()).count();
    let measured_gaps = nodes
        .iter()
        .filter(|n| n.strain.is_some() && n.eigen_identity.is_none())
        .count();
    let mut rank_histogram = [0usize; 4];
    for n in &nodes {
        rank_histogram[n.rank.min(3)] += 1;
    }
    let min_confoliation = nodes
        .iter()
        .map(|n| n.confoliation)
        .fold(f64::INFINITY, f64::min);
    let min_det = nodes.iter().map(|n| n.det).fold(f64::INFINITY, f64::min);

    let mut checks = vec![
        PropertyCheck::new(
            "collinearity",
            "max",
            max(&|n| n.collinearity),
            tol.collinearity,
        ),
        PropertyCheck::new(
            "strain_eigenpair",
            "max",
            max_opt(&|n| n.strain),
            tol.strain_eigenpair,
        ),
        PropertyCheck::new(
            "eigenvalue_identity",
            "max",
            max_opt(&|n| n.eigen_identity),
            tol.eigenvalue_identity,
        ),
        PropertyCheck::new(
            "confoliation",
            "min",
            (-min_confoliation).max(0.0),
            tol.confoliation,
        ),
    ];
    checks.push(if coupling.constant_value().is_some() {
        PropertyCheck::new(
            "laplacian_eigenform",
            "l2",
            l2_opt(&|n| n.laplacian),
            tol.laplacian_eigenform,
        )
    } else {
        PropertyCheck::skipped(
            "laplacian_eigenform",
            "l2",
            tol.laplacian_eigenform,
            "coupling is not constant",
        )
    });
    checks.push(PropertyCheck::new(
        "divergence_identity",
        "l2",
        l2_opt(&|n| n.divergence),
        tol.divergence_identity,
    ));
    checks.push(PropertyCheck::new(
        "conformal_rescale",
        "l2",
        l2_opt(&|n| n.conformal),
        tol.conformal_rescale,
    ));
    let mut rank = PropertyCheck::new("rank_histogram", "count", rank_histogram[2] as f64, 0.0);
    rank.note = Some(format!("rank 0/1/2/3 counts {rank_histogram:?}"));
    checks.push(rank);
    checks.push(PropertyCheck::new(
        "tension_identity",
        "l2",
        l2_opt(&|n| Some(n.tension)),
        tol.tension_identity,
    ));
    checks.push(PropertyCheck::new(
        "determinant_sign",
        "min",
        (-min_det).max(0.0),
        tol.determinant_sign,
    ));
    if measured_gaps > 0 {
        for c in checks.iter_mut().filter(|c| {
            matches!(
                c.name.as_str(),
                "eigenvalue_identity" | "divergence_identity" | "conformal_rescale"
            )
        }) {
            c.note = Some(format!("{measured_gaps} nodes without a coupling value"));
        }
    }
    Ok(PropertyReport {
        map: map.label().to_string(),
        coupling: coupling.clone(),
        checks,
        rank_histogram,
        critical_points,
        min_confoliation,
        min_det,
        nodes: nodes.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub map: String,
    pub energy: f64,
    pub degree: f64,
    /// `|deg - round(deg)| <= 1e-3`.
    pub degree_resolved: bool,
    /// `4 pi^2 round(deg)`.
    pub bound: f64,
    /// `E / bound`; absent for degree zero.
    pub ratio: Option<f64>,
    pub defect: f64,
    pub c_used: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_value: Option<f64>,
    /// `E - 4 pi^2 deg - 1/2 integral |*d beta - c beta|^2 / c`, relative to
    /// `max(E, 4 pi^2)`.
    pub completion_residual: f64,
    /// `E >= bound - 1e-4 bound`; `None` when the degree is unresolved.
    pub bound_holds: Option<bool>,
}

/// Energy, degree, bound and defect, with the Bogomol'nyi completion
/// `c|b|^2 + |w|^2/c = |w - c b|^2 / c + 2 <b, w>` checked in integrated form.
pub fn bound_report(map: &MapS3, coupling: &Coupling, grid: &GridS3) -> Result<EnergyReport> {
    coupling.validate()?;
    let vals: Vec<Result<[f64; 4]>> = grid.map_nodes(|n| {
        let local = Local::at(map, &n.point);
        let s = &local.sample;
        let c = check_coupling(coupling.at_sample(map, &local), &n.point)?;
        let e = 0.5 * (c * s.beta.norm_sq() + s.omega.norm_sq() / c);
        let r = local.star_dbeta().sub(&s.beta.scale(c)).norm_sq();
        Ok([e, s.volume_density(), r, 0.5 * r / c])
    });
    let vals: Vec<[f64; 4]> = vals.into_iter().collect::<Result<_>>()?;
    let column = |k: usize| grid.integrate_values(&vals.iter().map(|v| v[k]).collect::<Vec<_>>());
    let energy = column(0);
    let degree = column(1) / FOUR_PI2;
    let defect = column(2).max(0.0).sqrt();
    let completion = column(3);
    let rounded = degree.round();
    let bound = FOUR_PI2 * rounded;
    let degree_resolved = (degree - rounded).abs() <= DEGREE_RESOLUTION;
    Ok(EnergyReport {
        map: map.label().to_string(),
        energy,
        degree,
        degree_resolved,
        bound,
        ratio: (rounded != 0.0).then(|| energy / bound),
        defect,
        c_used: coupling.label().to_string(),
        c_value: coupling.constant_value(),
        completion_residual: (energy - FOUR_PI2 * degree - completion).abs() / energy.max(FOUR_PI2),
        bound_holds: degree_resolved
            .then(|| energy - bound >= -BOUND_SLACK * bound.abs().max(FOUR_PI2)),
    })
}

/// Radial data of a suspension map along one direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialSample {
    pub s: f64,
    pub beta_sq: f64,
    /// `NaN` at critical points.
    pub c_pt: f64,
    pub lambda_sq: [f64; 3],
}

/// Samples `n` interior values of `s` along the direction `(1, 1, 1)`.
pub fn radial_profile(map: &MapS3, n: usize) -> Vec<RadialSample> {
    let dir = scale4(1.0 / 3f64.sqrt(), &[0.0, 1.0, 1.0, 1.0]);
    (1..=n)
        .map(|i| {
            let s = PI * i as f64 / (n + 1) as f64;
            let p = Point4::new(axpy4(s.sin(), &dir, &[s.cos(), 0.0, 0.0, 0.0]));
            let sample = map.sample(&p);
            RadialSample {
                s,
                beta_sq: sample.beta.norm_sq(),
                c_pt: pointwise_coupling(map, &p).value().unwrap_or(f64::NAN),
                lambda_sq: Strain::of(&sample.jacobian).eigenvalues,
            }
        })
        .collect()
}
