//! Suspension maps `(cos s, n sin s) -> (cos a(s), n sin a(s))`.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::s3geom::{Point4, Vec4};

use super::SphereMap;

/// A radial profile `alpha` on `[0, pi]` with `alpha(0) = 0` and
/// `alpha(pi) = B pi`.
pub trait RadialProfile: Send + Sync + fmt::Debug {
    fn alpha(&self, s: f64) -> f64;
    fn dalpha(&self, s: f64) -> f64;
    /// The integer `B` with `alpha(pi) = B pi`.
    fn end_multiple(&self) -> i32;
}

/// `alpha(s) = 2 arctan(a tan(s/2))`, on the branch continuous up to
/// `alpha(pi) = pi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArctanProfile {
    pub a: f64,
}

impl ArctanProfile {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Config(format!(
                "suspension parameter a = {a} must be positive"
            )));
        }
        Ok(ArctanProfile { a })
    }

    /// `4a / (1 + a^2 + (1 - a^2) cos s)`, the coupling for which the
    /// suspension solves the Bogomol'nyi equation; equal to `2 alpha'(s)`.
    pub fn coupling(&self, s: f64) -> f64 {
        let a = self.a;
        4.0 * a / (1.0 + a * a + (1.0 - a * a) * s.cos())
    }
}

impl RadialProfile for ArctanProfile {
    fn alpha(&self, s: f64) -> f64 {
        let (sh, ch) = (0.5 * s).sin_cos();
        2.0 * (self.a * sh).atan2(ch)
    }

    fn dalpha(&self, s: f64) -> f64 {
        let c = s.cos();
        2.0 * self.a / ((1.0 + c) + self.a * self.a * (1.0 - c))
    }

    fn end_multiple(&self) -> i32 {
        1
    }
}

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch–Carlson
/// slopes, three-point one-sided end slopes).
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

fn same_sign(a: f64, b: f64) -> bool {
    (a > 0.0 && b > 0.0) || (a < 0.0 && b < 0.0)
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if !same_sign(m, d0) {
        0.0
    } else if !same_sign(d0, d1) && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Config(
                "monotone cubic needs at least two knots".into(),
            ));
        }
        if x.windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(Ordering::Greater))
        {
            return Err(Error::Config("knots must be strictly increasing".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite profile value".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let d: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut m = vec![0.0; n];
        if n == 2 {
            m[0] = d[0];
            m[1] = d[0];
        } else {
            for k in 1..n - 1 {
                if same_sign(d[k - 1], d[k]) {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
                }
            }
            m[0] = end_slope(h[0], h[1], d[0], d[1]);
            m[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
        }
        Ok(MonotoneCubic { x, y, m })
    }

    fn locate(&self, t: f64) -> usize {
        let k = self.x.partition_point(|&xk| xk <= t);
        k.clamp(1, self.x.len() - 1) - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.locate(t);
        let h = self.x[k + 1] - self.x[k];
        let u = (t - self.x[k]) / h;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.y[k] + h10 * h * self.m[k] + h01 * self.y[k + 1] + h11 * h * self.m[k + 1]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let k = self.locate(t);
        let h = self.x[k + 1] - self.x[k];
        let u = (t - self.x[k]) / h;
        let u2 = u * u;
        let d00 = 6.0 * u2 - 6.0 * u;
        let d10 = 3.0 * u2 - 4.0 * u + 1.0;
        let d01 = -6.0 * u2 + 6.0 * u;
        let d11 = 3.0 * u2 - 2.0 * u;
        (d00 * self.y[k] + d01 * self.y[k + 1]) / h + d10 * self.m[k] + d11 * self.m[k + 1]
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }
}

/// Tabulated profile: strictly increasing `s` from 0 to pi, with
/// `alpha(0) = 0` and `alpha(pi)` an integer multiple of pi.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    pub s: Vec<f64>,
    pub alpha: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct ProfileRow {
    s: f64,
    alpha: f64,
}

impl ProfileTable {
    const END_TOL: f64 = 1e-9;

    /// Reads two columns `s,alpha` with a header row.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut s = Vec::new();
        let mut alpha = Vec::new();
        for row in rdr.deserialize() {
            let row: ProfileRow = row?;
            s.push(row.s);
            alpha.push(row.alpha);
        }
        let table = ProfileTable { s, alpha };
        table.validate()?;
        Ok(table)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    /// Checks the boundary conditions and returns `B`.
    pub fn validate(&self) -> Result<i32> {
        if self.s.len() < 3 || self.s.len() != self.alpha.len() {
            return Err(Error::Config(
                "profile table needs at least three rows".into(),
            ));
        }
        if self
            .s
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(Ordering::Greater))
        {
            return Err(Error::Config(
                "profile s column must be strictly increasing".into(),
            ));
        }
        let (first, last) = (self.s[0], self.s[self.s.len() - 1]);
        if first.abs() > Self::END_TOL || (last - PI).abs() > Self::END_TOL {
            return Err(Error::Config(format!(
                "profile must span [0, pi], got [{first}, {last}]"
            )));
        }
        if self.alpha[0].abs() > Self::END_TOL {
            return Err(Error::Config("profile must satisfy alpha(0) = 0".into()));
        }
        let end = self.alpha[self.alpha.len() - 1] / PI;
        let b = end.round();
        if (end - b).abs() > Self::END_TOL {
            return Err(Error::Config(format!(
                "alpha(pi) = {} is not an integer multiple of pi",
                self.alpha[self.alpha.len() - 1]
            )));
        }
        Ok(b as i32)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplineProfile {
    spline: MonotoneCubic,
    end_multiple: i32,
}

impl SplineProfile {
    pub fn from_table(table: &ProfileTable) -> Result<Self> {
        let b = table.validate()?;
        let mut s = table.s.clone();
        let mut alpha = table.alpha.clone();
        // Pin the ends exactly.
        s[0] = 0.0;
        *s.last_mut().unwrap() = PI;
        alpha[0] = 0.0;
        *alpha.last_mut().unwrap() = b as f64 * PI;
        Ok(SplineProfile {
            spline: MonotoneCubic::new(s, alpha)?,
            end_multiple: b,
        })
    }
}

impl RadialProfile for SplineProfile {
    fn alpha(&self, s: f64) -> f64 {
        self.spline.eval(s)
    }

    fn dalpha(&self, s: f64) -> f64 {
        self.spline.derivative(s)
    }

    fn end_multiple(&self) -> i32 {
        self.end_multiple
    }
}

#[derive(Debug)]
pub struct SuspensionMap<P: RadialProfile> {
    pub profile: P,
}

const POLE_RADIUS: f64 = 1e-12;
const SERIES_RADIUS: f64 = 1e-5;

impl<P: RadialProfile> SuspensionMap<P> {
    pub fn new(profile: P) -> Self {
        SuspensionMap { profile }
    }

    /// `sin alpha(s) / sin s`, continuous at the poles.
    fn ratio(&self, s: f64, r: f64) -> f64 {
        if r > POLE_RADIUS {
            self.profile.alpha(s).sin() / r
        } else if s < 0.5 * PI {
            self.profile.dalpha(0.0)
        } else {
            let sign = if self.profile.end_multiple() % 2 == 0 {
                -1.0
            } else {
                1.0
            };
            sign * self.profile.dalpha(PI)
        }
    }
}

impl<P: RadialProfile> SphereMap for SuspensionMap<P> {
    fn apply(&self, p: &Point4) -> Point4 {
        let x = p.coords();
        let r = (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt();
        let s = r.atan2(x[0]);
        let g = self.ratio(s, r);
        Point4::new([self.profile.alpha(s).cos(), g * x[1], g * x[2], g * x[3]])
    }

    fn push_forward(&self, p: &Point4, v: &Vec4) -> Option<Vec4> {
        let x = p.coords();
        let r = (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt();
        let s = r.atan2(x[0]);
        let g = self.ratio(s, r);
        if r <= POLE_RADIUS {
            return Some([0.0, g * v[1], g * v[2], g * v[3]]);
        }
        let dr = (x[1] * v[1] + x[2] * v[2] + x[3] * v[3]) / r;
        let ds = (x[0] * dr - r * v[0]) / (x[0] * x[0] + r * r);
        let alpha = self.profile.alpha(s);
        let da = self.profile.dalpha(s);
        let (sa, ca) = alpha.sin_cos();
        // d/ds (sin alpha / sin s); odd-order small near the poles.
        let dg = if r > SERIES_RADIUS {
            (ca * da * r - sa * x[0]) / (r * r)
        } else {
            0.0
        };
        Some([
            -sa * da * ds,
            g * v[1] + dg * ds * x[1],
            g * v[2] + dg * ds * x[2],
            g * v[3] + dg * ds * x[3],
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arctan_profile_endpoints_and_monotonicity() {
        for a in [0.5, 1.0, 2.0, 5.0] {
            let p = ArctanProfile::new(a).unwrap();
            assert_eq!(p.alpha(0.0), 0.0);
            assert!((p.alpha(PI) - PI).abs() < 1e-15);
            let vals: Vec<f64> = (0..=200).map(|i| p.alpha(PI * i as f64 / 200.0)).collect();
            assert!(vals.windows(2).all(|w| w[1] > w[0]));
        }
        let id = ArctanProfile::new(1.0).unwrap();
        assert!((id.alpha(1.234) - 1.234).abs() < 1e-15);
        assert!(
            (ArctanProfile::new(2.0).unwrap().alpha(PI / 2.0) - 2.0 * 2f64.atan()).abs() < 1e-15
        );
        assert!(ArctanProfile::new(0.0).is_err());
    }

    #[test]
    fn arctan_derivative_matches_finite_differences() {
        let p = ArctanProfile::new(3.0).unwrap();
        for i in 1..20 {
            let s = PI * i as f64 / 20.0;
            let h = 1e-6;
            let fd = (p.alpha(s + h) - p.alpha(s - h)) / (2.0 * h);
            assert!((fd - p.dalpha(s)).abs() < 1e-7);
            assert!((p.coupling(s) - 2.0 * p.dalpha(s)).abs() < 1e-14);
        }
    }

    #[test]
    fn monotone_cubic_reproduces_lines_and_preserves_monotonicity() {
        let x: Vec<f64> = (0..6).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|t| 2.0 * t + 1.0).collect();
        let m = MonotoneCubic::new(x, y).unwrap();
        for t in [0.0, 0.3, 1.1, 2.5] {
            assert!((m.eval(t) - (2.0 * t + 1.0)).abs() < 1e-14);
            assert!((m.derivative(t) - 2.0).abs() < 1e-13);
        }
        let step = MonotoneCubic::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let vals: Vec<f64> = (0..=300)
            .map(|i| step.eval(3.0 * i as f64 / 300.0))
            .collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        assert!(vals.iter().all(|v| (-1e-15..=1.0 + 1e-15).contains(v)));
    }

    #[test]
    fn profile_table_validation() {
        let good = "s,alpha\n0,0\n1.5707963267948966,1.5707963267948966\n3.141592653589793,3.141592653589793\n";
        let t = ProfileTable::from_csv_reader(good.as_bytes()).unwrap();
        assert_eq!(t.validate().unwrap(), 1);
        let bad_end = "s,alpha\n0,0\n1,1\n3.141592653589793,3.0\n";
        assert!(ProfileTable::from_csv_reader(bad_end.as_bytes()).is_err());
        let not_increasing = "s,alpha\n0,0\n2,1\n1,2\n3.141592653589793,3.141592653589793\n";
        assert!(ProfileTable::from_csv_reader(not_increasing.as_bytes()).is_err());
    }

    #[test]
    fn spline_profile_of_identity_is_identity() {
        let s: Vec<f64> = (0..=20).map(|i| PI * i as f64 / 20.0).collect();
        let table = ProfileTable {
            s: s.clone(),
            alpha: s,
        };
        let p = SplineProfile::from_table(&table).unwrap();
        assert!((p.alpha(1.0) - 1.0).abs() < 1e-13);
        assert!((p.dalpha(2.0) - 1.0).abs() < 1e-12);
    }
}
