//! Exact structural checks of the polynomial calculus and the frame.
//!
//! Everything except the quadrature check is decided in rational
//! arithmetic, so a pass means zero residual, not a small one.

use serde::Serialize;

use crate::error::Result;
use crate::poly::{
    integer, monomial_integral, monomials_up_to, FrameField, SpherePoly, SphereScalar,
};
use crate::s3geom::{GridS3, GridSpec, PolyVectorField};

/// Highest monomial degree exercised by the symbolic checks.
pub const SYMBOLIC_DEGREE: u32 = 3;
/// Highest monomial degree in the quadrature check.
pub const QUADRATURE_DEGREE: u32 = 6;
pub const QUADRATURE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct SelfCheck {
    pub name: &'static str,
    pub exact: bool,
    pub cases: usize,
    pub failures: usize,
    /// Largest residual, for the inexact checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

impl SelfCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Default)]
struct Tally {
    cases: usize,
    failures: usize,
    first: Option<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }

    fn finish(self, name: &'static str) -> SelfCheck {
        SelfCheck {
            name,
            exact: true,
            cases: self.cases,
            failures: self.failures,
            max_residual: None,
            first_failure: self.first,
        }
    }
}

fn monomials() -> Vec<SpherePoly> {
    monomials_up_to(SYMBOLIC_DEGREE)
        .into_iter()
        .map(|e| SpherePoly::monomial(e, integer(1)))
        .collect()
}

fn monomial_fields() -> Vec<PolyVectorField> {
    let mut out = Vec::new();
    for p in monomials_up_to(SYMBOLIC_DEGREE - 1) {
        for i in 0..3 {
            let mut v = PolyVectorField::zero();
            v.components[i] = SpherePoly::monomial(p, integer(1));
            out.push(v);
        }
    }
    out
}

/// `[X_a, X_b] = -2 eps_abc X_c` on every monomial.
pub fn structure_constants() -> SelfCheck {
    let cyc = [
        (FrameField::X1, FrameField::X2, FrameField::Xi),
        (FrameField::X2, FrameField::Xi, FrameField::X1),
        (FrameField::Xi, FrameField::X1, FrameField::X2),
    ];
    let mut t = Tally::default();
    for p in monomials() {
        for (a, b, c) in cyc {
            let lhs = &p.frame_derive(b).frame_derive(a) - &p.frame_derive(a).frame_derive(b);
            let rhs = p.frame_derive(c).scale(&integer(-2));
            t.record(lhs == rhs, || {
                format!("[{}, {}] on {p}", a.name(), b.name())
            });
        }
    }
    t.finish("structure_constants")
}

/// `<X p, q> = -<p, X q>` for all monomial pairs.
pub fn integration_by_parts() -> SelfCheck {
    let mons = monomials();
    let mut t = Tally::default();
    for p in &mons {
        let derived: Vec<_> = FrameField::ALL.iter().map(|&f| p.frame_derive(f)).collect();
        for q in &mons {
            for (k, &f) in FrameField::ALL.iter().enumerate() {
                let lhs = derived[k].inner_product(q);
                let rhs = p.inner_product(&q.frame_derive(f));
                t.record(lhs.0 == -rhs.0, || format!("{} with {p}, {q}", f.name()));
            }
        }
    }
    t.finish("integration_by_parts")
}

/// `<curl u, v> = <u, curl v>` on single-component monomial fields.
pub fn curl_self_adjoint() -> SelfCheck {
    let fields = monomial_fields();
    let curls: Vec<_> = fields.iter().map(PolyVectorField::curl).collect();
    let mut t = Tally::default();
    for (i, u) in fields.iter().enumerate() {
        for (j, v) in fields.iter().enumerate().skip(i) {
            let ok = curls[i].inner_product(v) == u.inner_product(&curls[j]);
            t.record(ok, || format!("fields {i} and {j}"));
        }
    }
    t.finish("curl_self_adjoint")
}

/// `div curl v = 0` and `curl grad p = 0` identically.
pub fn div_curl_vanishes() -> SelfCheck {
    let mut t = Tally::default();
    for (i, v) in monomial_fields().iter().enumerate() {
        t.record(v.curl().divergence().is_zero(), || {
            format!("div curl of field {i}")
        });
    }
    for p in monomials() {
        t.record(PolyVectorField::gradient(&p).curl().is_zero(), || {
            format!("curl grad {p}")
        });
    }
    t.finish("div_curl_zero")
}

/// The default grid integrates every monomial of degree <= 6 to `1e-10`.
pub fn quadrature_exactness() -> Result<SelfCheck> {
    let grid = GridS3::build(GridSpec::default())?;
    let mut worst = 0.0f64;
    let mut failures = 0;
    let mut first = None;
    let exps = monomials_up_to(QUADRATURE_DEGREE);
    for e in &exps {
        let exact = SphereScalar(monomial_integral(e)).to_f64();
        let got = grid.quadrature(|p| {
            let x = p.coords();
            (0..4).map(|i| x[i].powi(e[i] as i32)).product()
        });
        let err = (got - exact).abs();
        worst = worst.max(err);
        if err > QUADRATURE_TOL {
            failures += 1;
            first.get_or_insert_with(|| format!("{e:?}: {got} vs {exact}"));
        }
    }
    Ok(SelfCheck {
        name: "quadrature_exactness",
        exact: false,
        cases: exps.len(),
        failures,
        max_residual: Some(worst),
        first_failure: first,
    })
}

pub fn run() -> Result<Vec<SelfCheck>> {
    Ok(vec![
        structure_constants(),
        integration_by_parts(),
        curl_self_adjoint(),
        div_curl_vanishes(),
        quadrature_exactness()?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_self_checks_pass() {
        for c in run().unwrap() {
            assert!(c.passed(), "{}: {:?}", c.name, c.first_failure);
            assert!(c.cases > 0);
        }
    }
}
