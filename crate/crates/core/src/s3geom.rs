//! Round geometry of S^3 in the global frame `(xi, X1, X2)`.
//!
//! The frame is orthonormal, the contact form is `eta = <xi, .>` and
//! `d eta = 2 (dx1 ^ dy1 + dx2 ^ dy2)`. Forms are stored by their components
//! in the coframe; 2-forms use the cyclic convention
//! `w0 = w(X1, X2)`, `w1 = w(X2, xi)`, `w2 = w(xi, X1)`, so that the Hodge
//! star is the identity on component triples when `(xi, X1, X2)` is declared
//! positively oriented.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{compensated_sum, Execution};
use crate::poly::{integer, FrameField, SpherePoly, SphereScalar};

pub type Vec4 = [f64; 4];

pub fn dot4(a: &Vec4, b: &Vec4) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn norm4(a: &Vec4) -> f64 {
    dot4(a, a).sqrt()
}

pub fn axpy4(alpha: f64, x: &Vec4, y: &Vec4) -> Vec4 {
    [
        alpha * x[0] + y[0],
        alpha * x[1] + y[1],
        alpha * x[2] + y[2],
        alpha * x[3] + y[3],
    ]
}

pub fn scale4(alpha: f64, x: &Vec4) -> Vec4 {
    [alpha * x[0], alpha * x[1], alpha * x[2], alpha * x[3]]
}

/// A point of the unit sphere in ambient coordinates `(x1, y1, x2, y2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point4([f64; 4]);

impl Point4 {
    /// Renormalizes onto S^3. Panics on the zero vector.
    pub fn new(coords: Vec4) -> Point4 {
        let n = norm4(&coords);
        assert!(
            n > 0.0 && n.is_finite(),
            "cannot project {coords:?} onto S^3"
        );
        Point4(scale4(1.0 / n, &coords))
    }

    /// `(cos s, sin s sin t cos u, sin s sin t sin u, sin s cos t)`.
    pub fn from_angles(s: f64, theta: f64, psi: f64) -> Point4 {
        let (ss, cs) = s.sin_cos();
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = psi.sin_cos();
        Point4([cs, ss * st * cp, ss * st * sp, ss * ct])
    }

    pub fn coords(&self) -> &Vec4 {
        &self.0
    }

    /// Polar angle from the pole `(1, 0, 0, 0)`, in `[0, pi]`.
    pub fn polar_angle(&self) -> f64 {
        let r = (self.0[1] * self.0[1] + self.0[2] * self.0[2] + self.0[3] * self.0[3]).sqrt();
        r.atan2(self.0[0])
    }

    /// Point at arclength `t` along the great circle leaving `self` with unit
    /// tangent `dir`.
    pub fn geodesic(&self, dir: &Vec4, t: f64) -> Point4 {
        let (s, c) = t.sin_cos();
        Point4::new(axpy4(s, dir, &scale4(c, &self.0)))
    }

    /// Removes the normal component of an ambient vector.
    pub fn project_tangent(&self, v: &Vec4) -> Vec4 {
        axpy4(-dot4(&self.0, v), &self.0, v)
    }
}

/// Ambient value of a frame field at `p`.
pub fn frame_vector(field: FrameField, p: &Point4) -> Vec4 {
    let a = field.matrix();
    let x = p.coords();
    let mut out = [0.0; 4];
    for (k, row) in a.iter().enumerate() {
        out[k] = row
            .iter()
            .zip(x.iter())
            .map(|(&s, &xj)| s as f64 * xj)
            .sum();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameBasis {
    pub vectors: [Vec4; 3],
}

impl FrameBasis {
    pub fn xi(&self) -> &Vec4 {
        &self.vectors[0]
    }

    pub fn x1(&self) -> &Vec4 {
        &self.vectors[1]
    }

    pub fn x2(&self) -> &Vec4 {
        &self.vectors[2]
    }

    /// Frame components of a tangent vector.
    pub fn components(&self, v: &Vec4) -> [f64; 3] {
        [
            dot4(&self.vectors[0], v),
            dot4(&self.vectors[1], v),
            dot4(&self.vectors[2], v),
        ]
    }

    pub fn combine(&self, c: &[f64; 3]) -> Vec4 {
        let mut out = [0.0; 4];
        for (ci, v) in c.iter().zip(self.vectors.iter()) {
            out = axpy4(*ci, v, &out);
        }
        out
    }
}

pub fn frame_at(p: &Point4) -> FrameBasis {
    FrameBasis {
        vectors: FrameField::ALL.map(|f| frame_vector(f, p)),
    }
}

/// `eta_q(v)`.
pub fn contact_eval(q: &Point4, v: &Vec4) -> f64 {
    dot4(&frame_vector(FrameField::Xi, q), v)
}

/// `d eta(u, v) = 2 (u1 v2 - u2 v1 + u3 v4 - u4 v3)`; independent of the base
/// point.
pub fn deta_eval(u: &Vec4, v: &Vec4) -> f64 {
    2.0 * (u[0] * v[1] - u[1] * v[0] + u[2] * v[3] - u[3] * v[2])
}

/// Coframe components `(b0, b1, b2)` of a 1-form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OneForm3(pub [f64; 3]);

/// Cyclic components `(w(X1,X2), w(X2,xi), w(xi,X1))` of a 2-form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TwoForm3(pub [f64; 3]);

impl OneForm3 {
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &OneForm3) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    /// Hodge star for the metric `c^2 g`, components in the `g`-coframe.
    pub fn star(&self, conformal_factor: f64) -> TwoForm3 {
        TwoForm3(self.0.map(|b| conformal_factor * b))
    }

    /// `(b ^ w)` as a multiple of the volume form.
    pub fn wedge(&self, w: &TwoForm3) -> f64 {
        self.0.iter().zip(w.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn sub(&self, other: &OneForm3) -> OneForm3 {
        OneForm3([
            self.0[0] - other.0[0],
            self.0[1] - other.0[1],
            self.0[2] - other.0[2],
        ])
    }

    pub fn scale(&self, k: f64) -> OneForm3 {
        OneForm3(self.0.map(|b| k * b))
    }
}

impl TwoForm3 {
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    /// Hodge star for the metric `c^2 g`, components in the `g`-coframe.
    pub fn star(&self, conformal_factor: f64) -> OneForm3 {
        OneForm3(self.0.map(|w| w / conformal_factor))
    }

    /// Evaluates an ambient 2-form on the frame at one point.
    pub fn from_bilinear<F: Fn(&Vec4, &Vec4) -> f64>(frame: &FrameBasis, form: F) -> TwoForm3 {
        let [e0, e1, e2] = &frame.vectors;
        TwoForm3([form(e1, e2), form(e2, e0), form(e0, e1)])
    }
}

/// `d eta` at `q` in frame components.
pub fn deta_components(q: &Point4) -> TwoForm3 {
    TwoForm3::from_bilinear(&frame_at(q), deta_eval)
}

/// Verifies `*d eta = 2 eta` with the declared orientation. Every sign in
/// the degree and bound computations depends on it.
pub fn orientation_check(points: &[Point4]) -> Result<()> {
    for q in points {
        let star = deta_components(q).star(1.0);
        let eta = OneForm3(frame_at(q).components(&frame_vector(FrameField::Xi, q)));
        let r = star.sub(&eta.scale(2.0)).norm();
        if r > 1e-12 {
            return Err(Error::Evaluation(format!(
                "orientation check failed at {:?}: *d eta - 2 eta = {r:e}",
                q.coords()
            )));
        }
    }
    Ok(())
}

/// A vector field `f xi + f1 X1 + f2 X2` with polynomial components.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PolyVectorField {
    pub components: [SpherePoly; 3],
}

impl PolyVectorField {
    pub fn new(f: SpherePoly, f1: SpherePoly, f2: SpherePoly) -> Self {
        PolyVectorField {
            components: [f, f1, f2],
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// The frame field itself (constant component 1).
    pub fn frame(field: FrameField) -> Self {
        let mut v = Self::zero();
        v.components[field.index()] = SpherePoly::one();
        v
    }

    /// Frame components of the gradient of `p`.
    pub fn gradient(p: &SpherePoly) -> Self {
        PolyVectorField {
            components: FrameField::ALL.map(|v| p.frame_derive(v)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn degree(&self) -> u32 {
        self.components
            .iter()
            .map(|c| c.degree())
            .max()
            .unwrap_or(0)
    }

    /// `curl X = (2f + X1 f2 - X2 f1) xi + (2f1 + X2 f - xi f2) X1
    ///          + (2f2 + xi f1 - X1 f) X2`.
    pub fn curl(&self) -> Self {
        let [f, f1, f2] = &self.components;
        let two = integer(2);
        let c0 =
            &(&f.scale(&two) + &f2.frame_derive(FrameField::X1)) - &f1.frame_derive(FrameField::X2);
        let c1 =
            &(&f1.scale(&two) + &f.frame_derive(FrameField::X2)) - &f2.frame_derive(FrameField::Xi);
        let c2 =
            &(&f2.scale(&two) + &f1.frame_derive(FrameField::Xi)) - &f.frame_derive(FrameField::X1);
        PolyVectorField::new(c0, c1, c2)
    }

    /// `div X = xi(f) + X1(f1) + X2(f2)`.
    pub fn divergence(&self) -> SpherePoly {
        FrameField::ALL
            .iter()
            .zip(self.components.iter())
            .fold(SpherePoly::zero(), |acc, (v, c)| &acc + &c.frame_derive(*v))
    }

    pub fn inner_product(&self, other: &Self) -> SphereScalar {
        self.components
            .iter()
            .zip(other.components.iter())
            .fold(SphereScalar::zero(), |acc, (a, b)| acc + a.inner_product(b))
    }

    /// `|X|^2 = f^2 + f1^2 + f2^2` as a polynomial.
    pub fn pointwise_norm_sq(&self) -> SpherePoly {
        self.components
            .iter()
            .fold(SpherePoly::zero(), |acc, c| &acc + &(c * c))
    }

    pub fn eval(&self, p: &Point4) -> [f64; 3] {
        self.components.clone().map(|c| c.eval(p.coords()))
    }

    pub fn add(&self, other: &Self) -> Self {
        PolyVectorField {
            components: [0, 1, 2].map(|i| &self.components[i] + &other.components[i]),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        PolyVectorField {
            components: [0, 1, 2].map(|i| &self.components[i] - &other.components[i]),
        }
    }

    pub fn scale(&self, k: &crate::poly::Rational) -> Self {
        PolyVectorField {
            components: self.components.clone().map(|c| c.scale(k)),
        }
    }
}

/// Resolution of a hyperspherical product grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_s: usize,
    pub n_theta: usize,
    pub n_psi: usize,
}

impl GridSpec {
    pub const MIN: usize = 4;

    pub fn new(n_s: usize, n_theta: usize, n_psi: usize) -> Self {
        GridSpec {
            n_s,
            n_theta,
            n_psi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_s < Self::MIN || self.n_theta < Self::MIN || self.n_psi < Self::MIN {
            return Err(Error::Config(format!(
                "grid resolution ({}, {}, {}) below minimum {} in each direction",
                self.n_s,
                self.n_theta,
                self.n_psi,
                Self::MIN
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_s * self.n_theta * self.n_psi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::new(32, 24, 24)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridNode {
    pub point: Point4,
    pub s: f64,
    pub theta: f64,
    pub psi: f64,
    pub weight: f64,
}

/// Gauss–Legendre in `s` (density `sin^2 s`) and `theta` (density
/// `sin theta`), uniform in `psi`.
#[derive(Clone, Debug)]
pub struct GridS3 {
    spec: GridSpec,
    nodes: Vec<GridNode>,
    exec: Execution,
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

impl GridS3 {
    pub fn build(spec: GridSpec) -> Result<GridS3> {
        spec.validate()?;
        let half = PI / 2.0;
        let (xs, ws) = gauss_legendre(spec.n_s);
        let s_rule = xs
            .iter()
            .zip(&ws)
            .map(|(u, v)| (half * (u + 1.0), half * v))
            .collect();
        Ok(Self::product(spec, s_rule))
    }

    /// Composite Gauss–Legendre in `s` with `per_interval` nodes between
    /// consecutive `breaks` (which must run from 0 to pi), for integrands
    /// that are only piecewise smooth in `s`.
    pub fn composite_s(
        breaks: &[f64],
        per_interval: usize,
        n_theta: usize,
        n_psi: usize,
    ) -> Result<GridS3> {
        if breaks.len() < 2
            || breaks
                .windows(2)
                .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::Config("s breaks must be strictly increasing".into()));
        }
        if breaks[0] != 0.0 || (breaks[breaks.len() - 1] - PI).abs() > 1e-12 {
            return Err(Error::Config("s breaks must run from 0 to pi".into()));
        }
        if per_interval == 0 {
            return Err(Error::Config(
                "need at least one node per s interval".into(),
            ));
        }
        let n_s = (breaks.len() - 1) * per_interval;
        let spec = GridSpec::new(n_s.max(GridSpec::MIN), n_theta, n_psi);
        spec.validate()?;
        let (xs, ws) = gauss_legendre(per_interval);
        let mut s_rule = Vec::with_capacity(n_s);
        for w in breaks.windows(2) {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            s_rule.extend(xs.iter().zip(&ws).map(|(u, v)| (mid + half * u, half * v)));
        }
        Ok(Self::product(GridSpec { n_s, ..spec }, s_rule))
    }

    /// `s_rule` holds `(s, weight)` pairs for the plain measure `ds`.
    fn product(spec: GridSpec, s_rule: Vec<(f64, f64)>) -> GridS3 {
        let (xt, wt) = gauss_legendre(spec.n_theta);
        let half = PI / 2.0;
        let dpsi = 2.0 * PI / spec.n_psi as f64;
        let mut nodes = Vec::with_capacity(s_rule.len() * spec.n_theta * spec.n_psi);
        for (s, vs) in s_rule {
            let w_s = vs * s.sin().powi(2);
            for (&ut, &vt) in xt.iter().zip(wt.iter()) {
                let theta = half * (ut + 1.0);
                let w_t = half * vt * theta.sin();
                for k in 0..spec.n_psi {
                    let psi = dpsi * k as f64;
                    nodes.push(GridNode {
                        point: Point4::from_angles(s, theta, psi),
                        s,
                        theta,
                        psi,
                        weight: w_s * w_t * dpsi,
                    });
                }
            }
        }
        GridS3 {
            spec,
            nodes,
            exec: Execution::default(),
        }
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    pub fn total_weight(&self) -> f64 {
        compensated_sum(self.nodes.iter().map(|n| n.weight))
    }

    /// Evaluates `f` at every node, in node order.
    pub fn map_nodes<R, F>(&self, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(&GridNode) -> R + Sync + Send,
    {
        self.exec.map(&self.nodes, f)
    }

    /// Weighted sum of per-node values produced by [`GridS3::map_nodes`].
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.nodes.len());
        compensated_sum(self.nodes.iter().zip(values).map(|(n, v)| n.weight * v))
    }

    pub fn quadrature<F>(&self, integrand: F) -> f64
    where
        F: Fn(&Point4) -> f64 + Sync + Send,
    {
        let vals = self.map_nodes(|n| integrand(&n.point));
        self.integrate_values(&vals)
    }

    /// `sqrt(sum w |r|^2)` over per-node residual magnitudes.
    pub fn l2_norm(&self, residuals: &[f64]) -> f64 {
        let sq: Vec<f64> = residuals.iter().map(|r| r * r).collect();
        self.integrate_values(&sq).max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{monomials_up_to, rational, Rational};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, seed: u64) -> Vec<Point4> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let v: Vec4 = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                Point4::new(v)
            })
            .collect()
    }

    #[test]
    fn frame_at_the_poles() {
        let f = frame_at(&Point4::new([1.0, 0.0, 0.0, 0.0]));
        assert_eq!(
            f.vectors,
            [
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0]
            ]
        );
        let g = frame_at(&Point4::new([0.0, 1.0, 0.0, 0.0]));
        assert_eq!(*g.xi(), [-1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn frame_is_orthonormal_and_tangent() {
        for p in random_points(1000, 1) {
            let f = frame_at(&p);
            let all = [f.vectors[0], f.vectors[1], f.vectors[2], *p.coords()];
            for i in 0..4 {
                for j in 0..4 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot4(&all[i], &all[j]) - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn frame_gram_is_exactly_identity_on_the_sphere() {
        // Entries of the Gram matrix of (xi, X1, X2, p) as polynomials.
        let x: Vec<SpherePoly> = (0..4).map(SpherePoly::var).collect();
        let lin = |f: FrameField| -> Vec<SpherePoly> {
            f.matrix()
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(x.iter())
                        .fold(SpherePoly::zero(), |acc, (&s, xj)| {
                            &acc + &xj.scale(&integer(s as i64))
                        })
                })
                .collect()
        };
        let mut vecs: Vec<Vec<SpherePoly>> = FrameField::ALL.iter().map(|&f| lin(f)).collect();
        vecs.push(x.clone());
        let one = SpherePoly::one();
        for i in 0..4 {
            for j in 0..4 {
                let g = (0..4).fold(SpherePoly::zero(), |acc, k| {
                    &acc + &(&vecs[i][k] * &vecs[j][k])
                });
                let want = if i == j {
                    one.clone()
                } else {
                    SpherePoly::zero()
                };
                assert!(g.restricts_equal(&want), "({i},{j}): {g}");
            }
        }
    }

    #[test]
    fn contact_examples() {
        for q in random_points(50, 2) {
            let f = frame_at(&q);
            assert!((contact_eval(&q, f.xi()) - 1.0).abs() < 1e-14);
            assert!(contact_eval(&q, f.x1()).abs() < 1e-14);
            assert!(deta_eval(f.xi(), f.x1()).abs() < 1e-14);
            assert!(deta_eval(f.xi(), f.x2()).abs() < 1e-14);
        }
    }

    #[test]
    fn star_d_eta_is_two_eta() {
        orientation_check(&random_points(100, 3)).unwrap();
        let w = deta_components(&random_points(1, 4)[0]);
        let star = w.star(1.0);
        assert!((star.0[0] - 2.0).abs() < 1e-14 && star.0[1].abs() < 1e-14);
    }

    #[test]
    fn star_is_an_involution_and_scales_conformally() {
        let b = OneForm3([0.3, -1.2, 2.5]);
        assert_eq!(b.star(1.0).star(1.0), b);
        let c = 1.7;
        let s = b.star(c);
        assert!((s.0[1] - c * b.0[1]).abs() < 1e-15);
        let back = TwoForm3(b.0).star(c);
        assert!((back.0[2] - b.0[2] / c).abs() < 1e-15);
    }

    #[test]
    fn curl_examples() {
        let xi = PolyVectorField::frame(FrameField::Xi);
        assert_eq!(xi.curl(), xi.scale(&integer(2)));
        let grad = PolyVectorField::gradient(&SpherePoly::var(0));
        assert_eq!(
            grad,
            PolyVectorField::new(
                -&SpherePoly::var(1),
                -&SpherePoly::var(2),
                -&SpherePoly::var(3)
            )
        );
        assert!(grad.curl().is_zero());
    }

    #[test]
    fn divergence_examples() {
        assert!(PolyVectorField::frame(FrameField::Xi)
            .divergence()
            .is_zero());
        let x1 = SpherePoly::var(0);
        let div = PolyVectorField::gradient(&x1).divergence();
        assert!((&div + &x1.scale(&integer(3))).is_zero());
        for e in monomials_up_to(3) {
            let p = SpherePoly::monomial(e, Rational::from_integer(1.into()));
            for i in 0..3 {
                let mut v = PolyVectorField::zero();
                v.components[i] = p.clone();
                assert!(v.curl().divergence().is_zero());
                assert!(PolyVectorField::gradient(&p).curl().is_zero());
            }
        }
    }

    #[test]
    fn curl_is_self_adjoint_exactly() {
        let mons = monomials_up_to(2);
        let field = |k: usize| {
            let mut v = PolyVectorField::zero();
            for (j, e) in mons.iter().enumerate() {
                if (j * 7 + k * 3).is_multiple_of(5) {
                    v.components[(j + k) % 3]
                        .add_term(*e, rational((j as i64 % 4) - 2, 1 + k as i64));
                }
            }
            v
        };
        for a in 0..4 {
            for b in 0..4 {
                let (u, v) = (field(a), field(b + 7));
                assert_eq!(u.curl().inner_product(&v), u.inner_product(&v.curl()));
            }
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let sum: f64 = w.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        let m12: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((m12 - 2.0 / 13.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn grid_rejects_coarse_resolution() {
        assert!(matches!(
            GridS3::build(GridSpec::new(3, 8, 8)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn grid_quadrature_examples() {
        let g = GridS3::build(GridSpec::new(16, 16, 16)).unwrap();
        assert!(g.nodes().iter().all(|n| n.weight > 0.0));
        assert!(g
            .nodes()
            .iter()
            .all(|n| n.s > 0.0 && n.s < PI && n.theta > 0.0 && n.theta < PI));
        assert!((g.quadrature(|_| 1.0) - 2.0 * PI * PI).abs() < 1e-10);
        assert!((g.quadrature(|p| p.coords()[0].powi(2)) - PI * PI / 2.0).abs() < 1e-10);
        assert!(g.quadrature(|p| p.coords()[0]).abs() < 1e-12);
    }

    #[test]
    fn grid_weights_sum_to_the_volume() {
        let g = GridS3::build(GridSpec::new(8, 8, 4)).unwrap();
        assert!((g.total_weight() / (2.0 * PI * PI) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn composite_grid_integrates_like_the_product_grid() {
        let breaks: Vec<f64> = (0..=9).map(|k| PI * k as f64 / 9.0).collect();
        let g = GridS3::composite_s(&breaks, 3, 8, 8).unwrap();
        assert_eq!(g.spec().n_s, 27);
        assert!((g.total_weight() / (2.0 * PI * PI) - 1.0).abs() < 1e-10);
        let product = GridS3::build(GridSpec::new(24, 8, 8)).unwrap();
        for f in [
            |p: &Point4| p.coords()[3].powi(2),
            |p: &Point4| p.coords()[0].powi(4),
        ] {
            assert!((g.quadrature(f) - product.quadrature(f)).abs() < 1e-13);
        }
        assert!(GridS3::composite_s(&[0.0, 1.0], 3, 8, 8).is_err());
    }
}
