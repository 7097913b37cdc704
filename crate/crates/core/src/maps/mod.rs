//! Maps `S^3 -> S^3`, their differentials in frame components, the pullbacks
//! of `eta` and `d eta`, and the strain (Cauchy–Green) tensor.

mod fourier;
pub mod quat;
pub mod suspension;

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::s3geom::{deta_eval, frame_at, norm4, OneForm3, Point4, TwoForm3, Vec4};

pub use fourier::FourierTestMap;
pub use suspension::{
    ArctanProfile, MonotoneCubic, ProfileTable, RadialProfile, SplineProfile, SuspensionMap,
};

/// Default geodesic step of the finite-difference differential.
pub const FD_STEP: f64 = 1e-4;

pub trait SphereMap: Send + Sync + fmt::Debug {
    fn apply(&self, p: &Point4) -> Point4;

    /// Analytic `d phi_p(v)` for a tangent vector `v`, if the map has one.
    fn push_forward(&self, _p: &Point4, _v: &Vec4) -> Option<Vec4> {
        None
    }
}

/// Named family of maps, serializable as part of a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MapFamily {
    Identity,
    /// `(x1, y1, x2, y2) -> (x1, -y1, -x2, -y2)`.
    Conjugation,
    Constant {
        target: [f64; 4],
    },
    Suspension {
        a: f64,
    },
    /// `p -> base(p) * u` (quaternion product).
    RightTranslate {
        u: [f64; 4],
        base: Box<MapFamily>,
    },
    ProfileSuspension {
        table: ProfileTable,
    },
    FourierTest {
        seed: u64,
        #[serde(default = "FourierTestMap::default_amplitude")]
        amplitude: f64,
        #[serde(default = "FourierTestMap::default_modes")]
        modes: usize,
    },
}

/// A map together with its label and finite-difference step.
#[derive(Clone)]
pub struct MapS3 {
    inner: Arc<dyn SphereMap>,
    label: String,
    fd_step: f64,
}

impl fmt::Debug for MapS3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapS3")
            .field("label", &self.label)
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

/// `J_ij = <d phi(e_j), e~_i>` in the frames at `p` and `phi(p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jacobian3(pub Matrix3<f64>);

impl Jacobian3 {
    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn cauchy_green(&self) -> Matrix3<f64> {
        self.0.transpose() * self.0
    }

    pub fn singular_values(&self) -> [f64; 3] {
        let mut sv: Vec<f64> = self.0.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| a.total_cmp(b));
        [sv[0], sv[1], sv[2]]
    }

    /// Number of singular values above `threshold`.
    pub fn rank(&self, threshold: f64) -> usize {
        self.singular_values()
            .iter()
            .filter(|&&s| s > threshold)
            .count()
    }

    pub fn apply(&self, v: &[f64; 3]) -> [f64; 3] {
        let r = self.0 * nalgebra::Vector3::from_column_slice(v);
        [r[0], r[1], r[2]]
    }

    pub fn max_abs_diff(&self, other: &Jacobian3) -> f64 {
        (self.0 - other.0).abs().max()
    }
}

/// Eigen-decomposition of `J^T J`, eigenvalues ascending, eigenvectors as
/// columns in the domain frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Strain {
    pub eigenvalues: [f64; 3],
    pub eigenvectors: Matrix3<f64>,
}

impl Strain {
    pub fn of(j: &Jacobian3) -> Strain {
        let eig = SymmetricEigen::new(j.cauchy_green());
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.map(|k| eig.eigenvalues[k]);
        let eigenvectors =
            Matrix3::from_columns(&order.map(|k| eig.eigenvectors.column(k).into_owned()));
        Strain {
            eigenvalues,
            eigenvectors,
        }
    }
}

/// Pointwise data of a map at one domain point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormSample {
    pub point: Point4,
    pub image: Point4,
    /// `phi^* eta`; its frame components are also those of `xi_hat`.
    pub beta: OneForm3,
    /// `phi^* d eta`.
    pub omega: TwoForm3,
    pub jacobian: Jacobian3,
    /// `d phi(e_j)` as ambient vectors at `phi(p)`.
    pub pushed: [Vec4; 3],
}

impl FormSample {
    pub fn xi_hat(&self) -> [f64; 3] {
        self.beta.0
    }

    /// `phi^*(eta ^ d eta)` relative to the volume form.
    pub fn volume_density(&self) -> f64 {
        self.beta.wedge(&self.omega)
    }
}

impl MapS3 {
    pub fn new<M: SphereMap + 'static>(label: impl Into<String>, map: M) -> MapS3 {
        MapS3 {
            inner: Arc::new(map),
            label: label.into(),
            fd_step: FD_STEP,
        }
    }

    pub fn with_fd_step(mut self, h: f64) -> MapS3 {
        self.fd_step = h;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn eval(&self, p: &Point4) -> Point4 {
        self.inner.apply(p)
    }

    pub fn has_analytic_differential(&self) -> bool {
        let p = Point4::new([0.5, 0.5, 0.5, 0.5]);
        self.inner.push_forward(&p, frame_at(&p).xi()).is_some()
    }

    /// `d phi(e_j)` for the domain frame at `p`: analytic when available.
    pub fn push_forwards(&self, p: &Point4) -> [Vec4; 3] {
        let frame = frame_at(p);
        match self.inner.push_forward(p, &frame.vectors[0]) {
            Some(first) => [
                first,
                self.inner.push_forward(p, &frame.vectors[1]).unwrap(),
                self.inner.push_forward(p, &frame.vectors[2]).unwrap(),
            ],
            None => self.push_forwards_fd(p, self.fd_step),
        }
    }

    /// Central differences along the frame geodesics, projected to the
    /// tangent space at `phi(p)`.
    pub fn push_forwards_fd(&self, p: &Point4, h: f64) -> [Vec4; 3] {
        let frame = frame_at(p);
        let image = self.eval(p);
        let denom = 2.0 * h.sin();
        frame.vectors.map(|e| {
            let plus = self.eval(&p.geodesic(&e, h));
            let minus = self.eval(&p.geodesic(&e, -h));
            let diff = std::array::from_fn(|k| (plus.coords()[k] - minus.coords()[k]) / denom);
            image.project_tangent(&diff)
        })
    }

    fn jacobian_from(&self, image: &Point4, pushed: &[Vec4; 3]) -> Jacobian3 {
        let target = frame_at(image);
        let cols = pushed.map(|v| target.components(&v));
        Jacobian3(Matrix3::from_fn(|i, j| cols[j][i]))
    }

    pub fn differential(&self, p: &Point4) -> Jacobian3 {
        let image = self.eval(p);
        self.jacobian_from(&image, &self.push_forwards(p))
    }

    pub fn differential_fd(&self, p: &Point4, h: f64) -> Jacobian3 {
        let image = self.eval(p);
        self.jacobian_from(&image, &self.push_forwards_fd(p, h))
    }

    /// Largest entrywise gap between analytic and FD differentials at `h`.
    pub fn fd_error(&self, points: &[Point4], h: f64) -> Option<f64> {
        if !self.has_analytic_differential() {
            return None;
        }
        Some(
            points
                .iter()
                .map(|p| {
                    self.differential(p)
                        .max_abs_diff(&self.differential_fd(p, h))
                })
                .fold(0.0, f64::max),
        )
    }

    /// `log2(err(h) / err(h/2))`; close to 2 for a central difference.
    pub fn richardson_slope(&self, points: &[Point4], h: f64) -> Option<f64> {
        Some((self.fd_error(points, h)? / self.fd_error(points, 0.5 * h)?).log2())
    }

    pub fn sample(&self, p: &Point4) -> FormSample {
        let image = self.eval(p);
        let pushed = self.push_forwards(p);
        let jacobian = self.jacobian_from(&image, &pushed);
        let beta = OneForm3([jacobian.0[(0, 0)], jacobian.0[(0, 1)], jacobian.0[(0, 2)]]);
        let [u0, u1, u2] = &pushed;
        let omega = TwoForm3([deta_eval(u1, u2), deta_eval(u2, u0), deta_eval(u0, u1)]);
        FormSample {
            point: *p,
            image,
            beta,
            omega,
            jacobian,
            pushed,
        }
    }

    pub fn pullback_eta(&self, p: &Point4) -> OneForm3 {
        self.sample(p).beta
    }

    pub fn pullback_deta(&self, p: &Point4) -> TwoForm3 {
        self.sample(p).omega
    }

    pub fn strain(&self, p: &Point4) -> Strain {
        Strain::of(&self.differential(p))
    }
}

#[derive(Debug)]
struct Identity;

impl SphereMap for Identity {
    fn apply(&self, p: &Point4) -> Point4 {
        *p
    }

    fn push_forward(&self, _p: &Point4, v: &Vec4) -> Option<Vec4> {
        Some(*v)
    }
}

#[derive(Debug)]
struct Conjugation;

impl SphereMap for Conjugation {
    fn apply(&self, p: &Point4) -> Point4 {
        let x = p.coords();
        Point4::new([x[0], -x[1], -x[2], -x[3]])
    }

    fn push_forward(&self, _p: &Point4, v: &Vec4) -> Option<Vec4> {
        Some([v[0], -v[1], -v[2], -v[3]])
    }
}

#[derive(Debug)]
struct ConstantMap(Point4);

impl SphereMap for ConstantMap {
    fn apply(&self, _p: &Point4) -> Point4 {
        self.0
    }

    fn push_forward(&self, _p: &Point4, _v: &Vec4) -> Option<Vec4> {
        Some([0.0; 4])
    }
}

#[derive(Debug)]
struct RightTranslate {
    u: Vec4,
    base: MapS3,
}

impl SphereMap for RightTranslate {
    fn apply(&self, p: &Point4) -> Point4 {
        Point4::new(quat::mul(self.base.eval(p).coords(), &self.u))
    }

    fn push_forward(&self, p: &Point4, v: &Vec4) -> Option<Vec4> {
        let dv = self.base.inner.push_forward(p, v)?;
        Some(quat::mul(&dv, &self.u))
    }
}

fn unit(v: [f64; 4], what: &str) -> Result<Point4> {
    let n = norm4(&v);
    if !n.is_finite() || (n - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "{what} {v:?} is not a unit quaternion"
        )));
    }
    Ok(Point4::new(v))
}

pub fn make_map(family: &MapFamily) -> Result<MapS3> {
    Ok(match family {
        MapFamily::Identity => MapS3::new("identity", Identity),
        MapFamily::Conjugation => MapS3::new("conjugation", Conjugation),
        MapFamily::Constant { target } => {
            MapS3::new("constant", ConstantMap(unit(*target, "constant target")?))
        }
        MapFamily::Suspension { a } => MapS3::new(
            format!("suspension(a={a})"),
            SuspensionMap::new(ArctanProfile::new(*a)?),
        ),
        MapFamily::RightTranslate { u, base } => {
            let base = make_map(base)?;
            let label = format!("right_translate({})", base.label());
            MapS3::new(
                label,
                RightTranslate {
                    u: *unit(*u, "translation")?.coords(),
                    base,
                },
            )
        }
        MapFamily::ProfileSuspension { table } => {
            let profile = SplineProfile::from_table(table)?;
            let b = profile.end_multiple();
            MapS3::new(
                format!("profile_suspension(B={b})"),
                SuspensionMap::new(profile),
            )
        }
        MapFamily::FourierTest {
            seed,
            amplitude,
            modes,
        } => MapS3::new(
            format!("fourier_test(seed={seed})"),
            FourierTestMap::new(*seed, *amplitude, *modes)?,
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::s3geom::dot4;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_points(n: usize, seed: u64) -> Vec<Point4> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Point4::new(std::array::from_fn(|_| rng.gen_range(-1.0..1.0))))
            .collect()
    }

    fn map(f: MapFamily) -> MapS3 {
        make_map(&f).unwrap()
    }

    #[test]
    fn suspension_one_is_identity() {
        let m = map(MapFamily::Suspension { a: 1.0 });
        for p in random_points(100, 1) {
            let q = m.eval(&p);
            for k in 0..4 {
                assert!((q.coords()[k] - p.coords()[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn suspension_two_on_the_equator() {
        let m = map(MapFamily::Suspension { a: 2.0 });
        let q = m.eval(&Point4::from_angles(PI / 2.0, 0.7, 1.9));
        let alpha = q.polar_angle();
        assert!((alpha - 2.0 * 2f64.atan()).abs() < 1e-14);
        assert!((alpha - 2.2143).abs() < 1e-4);
    }

    #[test]
    fn conjugation_is_an_involution_and_reverses_orientation() {
        let m = map(MapFamily::Conjugation);
        for p in random_points(50, 2) {
            let back = m.eval(&m.eval(&p));
            for k in 0..4 {
                assert!((back.coords()[k] - p.coords()[k]).abs() < 1e-15);
            }
            assert!((m.differential(&p).det() + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_differential_is_a_rotation() {
        let m = map(MapFamily::Identity);
        for p in random_points(20, 3) {
            let j = m.differential(&p);
            let jtj = j.cauchy_green();
            assert!((jtj - Matrix3::identity()).abs().max() < 1e-14);
            let s = m.sample(&p);
            assert!((s.beta.0[0] - 1.0).abs() < 1e-14 && s.beta.0[1].abs() < 1e-14);
            assert!((s.omega.0[0] - 2.0).abs() < 1e-14 && s.omega.0[2].abs() < 1e-14);
            let st = m.strain(&p);
            assert!(st.eigenvalues.iter().all(|l| (l - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn constant_map_is_a_vacuum() {
        let m = map(MapFamily::Constant {
            target: [0.0, 0.0, 1.0, 0.0],
        });
        let p = random_points(1, 4)[0];
        let s = m.sample(&p);
        assert_eq!(s.beta.norm_sq(), 0.0);
        assert_eq!(s.omega.norm_sq(), 0.0);
        assert_eq!(m.strain(&p).eigenvalues, [0.0; 3]);
        assert!(make_map(&MapFamily::Constant {
            target: [2.0, 0.0, 0.0, 0.0]
        })
        .is_err());
    }

    #[test]
    fn analytic_differentials_are_tangent() {
        let fams = [
            MapFamily::Suspension { a: 2.0 },
            MapFamily::Suspension { a: 0.5 },
            MapFamily::FourierTest {
                seed: 7,
                amplitude: 0.3,
                modes: 4,
            },
            MapFamily::RightTranslate {
                u: [0.6, 0.0, 0.8, 0.0],
                base: Box::new(MapFamily::Suspension { a: 3.0 }),
            },
        ];
        for f in fams {
            let m = map(f);
            assert!(m.has_analytic_differential());
            for p in random_points(200, 5) {
                let q = m.eval(&p);
                assert!((norm4(q.coords()) - 1.0).abs() < 1e-12);
                for v in m.push_forwards(&p) {
                    assert!(dot4(&v, q.coords()).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn suspension_strain_is_radial_and_tangential_stretch() {
        let a = 2.0;
        let prof = ArctanProfile::new(a).unwrap();
        let m = map(MapFamily::Suspension { a });
        for &s in &[0.3, 1.0, 2.0, 2.9] {
            let p = Point4::from_angles(s, 1.1, 0.4);
            let radial = prof.dalpha(s).powi(2);
            let tangential = (prof.alpha(s).sin() / s.sin()).powi(2);
            let mut want = [radial, tangential, tangential];
            want.sort_by(|x, y| x.total_cmp(y));
            let got = m.strain(&p).eigenvalues;
            for k in 0..3 {
                assert!(
                    (got[k] - want[k]).abs() < 1e-10,
                    "s={s}: {got:?} vs {want:?}"
                );
            }
        }
    }

    #[test]
    fn suspension_beta_norm_is_equivariant() {
        let m = map(MapFamily::Suspension { a: 2.0 });
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for &s in &[0.4, 1.3, 2.6] {
            let vals: Vec<f64> = (0..50)
                .map(|_| {
                    let p = Point4::from_angles(
                        s,
                        rng.gen_range(0.0..PI),
                        rng.gen_range(0.0..2.0 * PI),
                    );
                    m.pullback_eta(&p).norm_sq()
                })
                .collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(hi - lo < 1e-10, "spread {}", hi - lo);
        }
    }

    #[test]
    fn beta_is_bounded_by_the_largest_stretch() {
        let m = map(MapFamily::FourierTest {
            seed: 3,
            amplitude: 0.4,
            modes: 5,
        });
        for p in random_points(300, 6) {
            let b = m.pullback_eta(&p).norm();
            let l3 = m.strain(&p).eigenvalues[2].sqrt();
            assert!(b <= l3 + 1e-12);
        }
    }

    #[test]
    fn right_translation_leaves_the_pullback_invariant() {
        let base = MapFamily::FourierTest {
            seed: 11,
            amplitude: 0.3,
            modes: 4,
        };
        let m0 = map(base.clone());
        let u = *Point4::new([0.3, -0.4, 0.5, 0.7]).coords();
        let m1 = map(MapFamily::RightTranslate {
            u,
            base: Box::new(base),
        });
        for p in random_points(100, 7) {
            let (b0, b1) = (m0.pullback_eta(&p), m1.pullback_eta(&p));
            for k in 0..3 {
                assert!((b0.0[k] - b1.0[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn finite_differences_converge_at_second_order() {
        let m = map(MapFamily::Suspension { a: 2.0 });
        let pts = random_points(10, 8);
        let slope = m.richardson_slope(&pts, 1e-3).unwrap();
        assert!((1.8..=2.2).contains(&slope), "slope {slope}");
        assert!(m.fd_error(&pts, FD_STEP).unwrap() < 1e-6);
        let c = map(MapFamily::FourierTest {
            seed: 1,
            amplitude: 0.3,
            modes: 4,
        });
        let slope = c.richardson_slope(&pts, 1e-3).unwrap();
        assert!((1.8..=2.2).contains(&slope), "slope {slope}");
    }

    #[test]
    fn profile_suspension_matches_the_closed_form() {
        let a = 2.0;
        let prof = ArctanProfile::new(a).unwrap();
        let s: Vec<f64> = (0..=400).map(|i| PI * i as f64 / 400.0).collect();
        let alpha = s.iter().map(|&t| prof.alpha(t)).collect();
        let m = map(MapFamily::ProfileSuspension {
            table: ProfileTable { s, alpha },
        });
        let exact = map(MapFamily::Suspension { a });
        for p in random_points(50, 10) {
            let (q0, q1) = (m.eval(&p), exact.eval(&p));
            for k in 0..4 {
                assert!((q0.coords()[k] - q1.coords()[k]).abs() < 1e-5);
            }
        }
    }
}
