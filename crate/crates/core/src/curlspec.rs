//! Exact assembly of the curl operator on vector fields with polynomial
//! frame components, and its spectrum on S^3.
//!
//! The basis is every field `m e_c` with `m` a monomial of degree `<= K` and
//! `e_c` one of the frame fields. Monomials are dependent as functions on the
//! sphere, so the Gram matrix `G` is singular; its kernel (the sphere ideal)
//! is removed by exact Gram–Schmidt before anything is rounded. The only
//! floating-point step is the symmetric eigensolve of the curl matrix in the
//! resulting orthonormal basis.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{compensated_sum, Execution};
use crate::poly::{monomial_integral, monomials_up_to, Exponent, Rational, SpherePoly};
use crate::s3geom::Point4;
pub use crate::s3geom::PolyVectorField;

/// Default cap on the polynomial degree (basis of at most 630 fields).
pub const DEFAULT_MAX_DEGREE_CAP: u32 = 6;
/// Separation used to group eigenvalues into clusters.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Allowed distance of a nonzero eigenvalue from an integer.
pub const INTEGRALITY_TOL: f64 = 1e-9;

const VOLUME_PI2: f64 = 2.0;

fn pi2() -> f64 {
    std::f64::consts::PI * std::f64::consts::PI
}

/// Monomials of degree `<= K` with a reverse index.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    exponents: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
    max_degree: u32,
}

impl MonomialBasis {
    pub fn new(max_degree: u32) -> Self {
        let exponents = monomials_up_to(max_degree);
        let index = exponents.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        MonomialBasis {
            exponents,
            index,
            max_degree,
        }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Exponent] {
        &self.exponents
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn index_of(&self, e: &Exponent) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn monomial(&self, i: usize) -> SpherePoly {
        SpherePoly::monomial(self.exponents[i], Rational::from_integer(1.into()))
    }

    /// Coefficient vector of a polynomial of degree `<= K`.
    pub fn coefficients(&self, p: &SpherePoly) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.len()];
        for (e, c) in p.terms() {
            let i = self
                .index_of(e)
                .unwrap_or_else(|| panic!("monomial {e:?} exceeds degree {}", self.max_degree));
            out[i] = c.clone();
        }
        out
    }

    /// Index of the vector field `m_i e_c`.
    pub fn field_index(&self, component: usize, i: usize) -> usize {
        component * self.len() + i
    }

    pub fn field(&self, a: usize) -> PolyVectorField {
        let mut v = PolyVectorField::zero();
        v.components[a / self.len()] = self.monomial(a % self.len());
        v
    }
}

/// Dense square matrix of exact rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMatrix {
    n: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n));
        RationalMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.n + j]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Entries as floats times `scale`.
    pub fn to_f64(&self, scale: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            self.get(i, j).to_f64().unwrap_or(f64::NAN) * scale
        })
    }
}

/// `C x = mu G x` over the monomial vector-field basis of degree `<= K`.
///
/// Both matrices are stored as multiples of `pi^2`:
/// `C_ab = <curl v_a, v_b>`, `G_ab = <v_a, v_b>`.
#[derive(Clone, Debug)]
pub struct OperatorPencil {
    pub basis: MonomialBasis,
    pub c: RationalMatrix,
    pub g: RationalMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssemblyOptions {
    pub max_degree_cap: u32,
    pub exec: Execution,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            max_degree_cap: DEFAULT_MAX_DEGREE_CAP,
            exec: Execution::default(),
        }
    }
}

/// Exact sphere integrals of all monomials up to a degree.
struct IntegralTable(HashMap<Exponent, Rational>);

impl IntegralTable {
    fn new(max_degree: u32) -> Self {
        IntegralTable(
            monomials_up_to(max_degree)
                .into_iter()
                .filter(|e| e.iter().all(|k| k % 2 == 0))
                .map(|e| {
                    let v = monomial_integral(&e);
                    (e, v)
                })
                .collect(),
        )
    }

    fn pair(&self, a: &Exponent, b: &Exponent) -> Option<&Rational> {
        self.0
            .get(&[a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }
}

pub fn assemble(max_degree: u32, opts: &AssemblyOptions) -> Result<OperatorPencil> {
    if max_degree > opts.max_degree_cap {
        return Err(Error::Resource(format!(
            "curl assembly at degree {max_degree} exceeds the cap {} ({} basis fields)",
            opts.max_degree_cap,
            3 * MonomialBasis::new(max_degree).len()
        )));
    }
    let basis = MonomialBasis::new(max_degree);
    let n = basis.len();
    let table = IntegralTable::new(2 * max_degree);
    let exps = basis.exponents();

    let scalar_gram: Vec<Vec<Rational>> = opts.exec.map_range(n, |i| {
        (0..n)
            .map(|j| {
                table
                    .pair(&exps[i], &exps[j])
                    .cloned()
                    .unwrap_or_else(Rational::zero)
            })
            .collect()
    });

    let curl_coeffs: Vec<Vec<Rational>> = opts.exec.map_range(3 * n, |a| {
        let curl = basis.field(a).curl();
        let mut row = vec![Rational::zero(); 3 * n];
        for (comp, poly) in curl.components.iter().enumerate() {
            for (e, c) in poly.terms() {
                let i = basis.index_of(e).expect("curl does not raise the degree");
                row[basis.field_index(comp, i)] = c.clone();
            }
        }
        row
    });

    let g_rows: Vec<Vec<Rational>> = (0..3 * n)
        .map(|a| {
            (0..3 * n)
                .map(|b| {
                    if a / n == b / n {
                        scalar_gram[a % n][b % n].clone()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();

    // C_ab = sum_d curl_coeffs[a][d] G_db; G is block diagonal.
    let c_rows: Vec<Vec<Rational>> = opts.exec.map_range(3 * n, |a| {
        let row = &curl_coeffs[a];
        (0..3 * n)
            .map(|b| {
                let (comp, j) = (b / n, b % n);
                let mut acc = Rational::zero();
                for i in 0..n {
                    let x = &row[comp * n + i];
                    if x.is_zero() {
                        continue;
                    }
                    let g = &scalar_gram[i][j];
                    if !g.is_zero() {
                        acc += x * g;
                    }
                }
                acc
            })
            .collect()
    });

    Ok(OperatorPencil {
        basis,
        c: RationalMatrix::from_rows(c_rows),
        g: RationalMatrix::from_rows(g_rows),
    })
}

/// Orthogonal (not normalized) basis of the restrictions to S^3 of the
/// scalar polynomials of degree `<= K`, found by exact Gram–Schmidt.
#[derive(Clone, Debug)]
pub struct OrthogonalBasis {
    /// Sparse coefficient vectors over the monomial basis.
    pub vectors: Vec<Vec<(usize, Rational)>>,
    /// Squared norms as multiples of `pi^2`; all positive.
    pub norms: Vec<Rational>,
    /// Number of monomials that were dependent on S^3.
    pub kernel_dim: usize,
}

fn gram_pair(gram: &RationalMatrix, u: &[(usize, Rational)], v: &[(usize, Rational)]) -> Rational {
    let mut acc = Rational::zero();
    for (i, a) in u {
        for (j, b) in v {
            let g = gram.get(*i, *j);
            if !g.is_zero() {
                acc += a * b * g;
            }
        }
    }
    acc
}

impl OrthogonalBasis {
    /// Gram–Schmidt on the scalar block of the pencil's Gram matrix.
    pub fn from_pencil(pencil: &OperatorPencil) -> Self {
        let n = pencil.basis.len();
        let gram = &pencil.g;
        let mut vectors: Vec<Vec<(usize, Rational)>> = Vec::new();
        let mut norms: Vec<Rational> = Vec::new();
        let mut kernel_dim = 0;
        for j in 0..n {
            let mut w: Vec<Rational> = vec![Rational::zero(); n];
            w[j] = Rational::from_integer(1.into());
            for (t, d) in vectors.iter().zip(norms.iter()) {
                let mut proj = Rational::zero();
                for (i, ti) in t {
                    let g = gram.get(j, *i);
                    if !g.is_zero() {
                        proj += ti * g;
                    }
                }
                if proj.is_zero() {
                    continue;
                }
                let k = proj / d;
                for (i, ti) in t {
                    w[*i] -= &k * ti;
                }
            }
            let sparse: Vec<(usize, Rational)> = w
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .collect();
            let d = gram_pair(gram, &sparse, &sparse);
            if d.is_zero() {
                kernel_dim += 1;
            } else {
                debug_assert!(d.is_positive());
                vectors.push(sparse);
                norms.push(d);
            }
        }
        OrthogonalBasis {
            vectors,
            norms,
            kernel_dim,
        }
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub mu: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub max_degree: u32,
    /// Nonzero eigenvalue clusters, ascending.
    pub clusters: Vec<Cluster>,
    /// Multiplicity of the zero eigenvalue (gradient fields).
    pub gradient_count: usize,
    pub rank_g: usize,
    pub cluster_tol: f64,
    /// Largest distance of a nonzero eigenvalue from the nearest integer.
    pub max_integrality_error: f64,
}

impl SpectrumReport {
    pub fn multiplicity(&self, mu: i64) -> usize {
        self.clusters
            .iter()
            .find(|c| (c.mu - mu as f64).abs() < 0.5)
            .map_or(0, |c| c.multiplicity)
    }

    pub fn total_multiplicity(&self) -> usize {
        self.gradient_count + self.clusters.iter().map(|c| c.multiplicity).sum::<usize>()
    }
}

/// Exact field together with its curl, divergence and component Laplacians.
#[derive(Clone, Debug)]
pub struct BasisField {
    pub field: PolyVectorField,
    pub curl: PolyVectorField,
    pub divergence: SpherePoly,
    pub laplacian: PolyVectorField,
    /// `integral |field|^2`, as a multiple of `pi^2`.
    pub norm_sq: Rational,
}

impl BasisField {
    pub fn new(field: PolyVectorField, norm_sq: Rational) -> Self {
        let [f0, f1, f2] = &field.components;
        let laplacian = PolyVectorField::new(
            f0.frame_laplacian(),
            f1.frame_laplacian(),
            f2.frame_laplacian(),
        );
        BasisField {
            curl: field.curl(),
            divergence: field.divergence(),
            laplacian,
            field,
            norm_sq,
        }
    }
}

/// Curl eigenfield: exact orthogonal basis fields mixed with floating
/// weights, normalized so that `integral |v|^2 = 1`.
#[derive(Clone, Debug)]
pub struct EigenField {
    pub mu: f64,
    basis: Arc<Vec<BasisField>>,
    pub weights: Vec<f64>,
}

/// Largest pointwise residuals over a sample, with the largest `|v|` for scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenResiduals {
    pub curl: f64,
    pub divergence: f64,
    /// `None` for gradient fields, which mix Laplace eigenvalues.
    pub laplacian: Option<f64>,
    pub max_norm: f64,
}

impl EigenField {
    fn combine<F: Fn(&BasisField) -> [f64; 3]>(&self, pick: F) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (w, b) in self.weights.iter().zip(self.basis.iter()) {
            if *w == 0.0 {
                continue;
            }
            let v = pick(b);
            for k in 0..3 {
                out[k] += w * v[k];
            }
        }
        out
    }

    pub fn eval(&self, p: &Point4) -> [f64; 3] {
        self.combine(|b| b.field.eval(p))
    }

    pub fn curl_at(&self, p: &Point4) -> [f64; 3] {
        self.combine(|b| b.curl.eval(p))
    }

    pub fn divergence_at(&self, p: &Point4) -> f64 {
        self.combine(|b| [b.divergence.eval(p.coords()), 0.0, 0.0])[0]
    }

    pub fn laplacian_at(&self, p: &Point4) -> [f64; 3] {
        self.combine(|b| b.laplacian.eval(p))
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, &PolyVectorField)> {
        self.weights
            .iter()
            .zip(self.basis.iter())
            .filter(|(w, _)| **w != 0.0)
            .map(|(w, b)| (*w, &b.field))
    }

    /// `integral |v|^2`, from the exact orthogonal norms.
    pub fn l2_norm_sq(&self) -> f64 {
        let s = compensated_sum(
            self.weights
                .iter()
                .zip(self.basis.iter())
                .map(|(w, b)| w * w * b.norm_sq.to_f64().unwrap_or(f64::NAN)),
        );
        s * pi2()
    }

    /// `k` such that the components lie in the Laplace eigenspace of
    /// eigenvalue `-k(k+2)`.
    pub fn laplace_degree(&self) -> Option<u32> {
        let m = self.mu.round() as i64;
        match m {
            0 => None,
            m if m > 0 => Some((m - 2) as u32),
            m => Some((-m) as u32),
        }
    }

    pub fn residuals(&self, samples: usize, seed: u64) -> EigenResiduals {
        let shift = self.laplace_degree().map(|k| (k * (k + 2)) as f64);
        let mut r = EigenResiduals {
            curl: 0.0,
            divergence: 0.0,
            laplacian: shift.map(|_| 0.0),
            max_norm: 0.0,
        };
        for p in sample_points(samples, seed) {
            let v = self.eval(&p);
            let c = self.curl_at(&p);
            let norm = |x: [f64; 3]| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            r.max_norm = r.max_norm.max(norm(v));
            r.curl = r
                .curl
                .max(norm(std::array::from_fn(|k| c[k] - self.mu * v[k])));
            r.divergence = r.divergence.max(self.divergence_at(&p).abs());
            if let (Some(s), Some(acc)) = (shift, r.laplacian.as_mut()) {
                let l = self.laplacian_at(&p);
                *acc = acc.max(norm(std::array::from_fn(|k| l[k] + s * v[k])));
            }
        }
        r
    }
}

/// Anything with pointwise frame components.
pub trait PointwiseField {
    fn eval_components(&self, p: &Point4) -> [f64; 3];

    /// Mean of `|v|^2` over S^3 (integral divided by the volume).
    fn mean_norm_sq(&self) -> f64;
}

impl PointwiseField for PolyVectorField {
    fn eval_components(&self, p: &Point4) -> [f64; 3] {
        self.eval(p)
    }

    fn mean_norm_sq(&self) -> f64 {
        let q = self.pointwise_norm_sq().sphere_integral();
        q.pi2_multiple().to_f64().unwrap_or(f64::NAN) / VOLUME_PI2
    }
}

impl PointwiseField for EigenField {
    fn eval_components(&self, p: &Point4) -> [f64; 3] {
        self.eval(p)
    }

    fn mean_norm_sq(&self) -> f64 {
        self.l2_norm_sq() / (VOLUME_PI2 * pi2())
    }
}

/// Uniform random points on S^3 from a seeded generator.
pub fn sample_points(samples: usize, seed: u64) -> Vec<Point4> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| loop {
            let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let r2: f64 = x.iter().map(|t| t * t).sum();
            if r2 > 1e-6 && r2 <= 1.0 {
                break Point4::new(x);
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormConstancy {
    pub mean: f64,
    pub max_deviation: f64,
}

/// Mean of `|v|^2` and its largest deviation over `samples` random points.
pub fn norm_constancy<F: PointwiseField>(v: &F, samples: usize, seed: u64) -> NormConstancy {
    let mean = v.mean_norm_sq();
    let max_deviation = sample_points(samples, seed)
        .iter()
        .map(|p| {
            let c = v.eval_components(p);
            (c[0] * c[0] + c[1] * c[1] + c[2] * c[2] - mean).abs()
        })
        .fold(0.0, f64::max);
    NormConstancy {
        mean,
        max_deviation,
    }
}

/// The pencil, the deflated orthonormal basis and the eigen-decomposition.
#[derive(Clone, Debug)]
pub struct CurlSpectrum {
    pub pencil: OperatorPencil,
    pub orthogonal: OrthogonalBasis,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns in the orthonormal basis, matching `eigenvalues`.
    eigenvectors: DMatrix<f64>,
    basis_fields: OnceLock<Arc<Vec<BasisField>>>,
}

impl CurlSpectrum {
    pub fn compute(max_degree: u32, opts: &AssemblyOptions) -> Result<Self> {
        let pencil = assemble(max_degree, opts)?;
        let orthogonal = OrthogonalBasis::from_pencil(&pencil);
        let n = pencil.basis.len();
        let rs = orthogonal.rank();
        let r = 3 * rs;

        // W = C T^T, then S = T W, where T holds the orthogonal vectors of
        // every component block.
        let col_vector = |q: usize| -> (usize, &Vec<(usize, Rational)>) {
            (q / rs, &orthogonal.vectors[q % rs])
        };
        let w_rows: Vec<Vec<Rational>> = opts.exec.map_range(3 * n, |a| {
            (0..r)
                .map(|q| {
                    let (comp, t) = col_vector(q);
                    let mut acc = Rational::zero();
                    for (j, tj) in t {
                        let c = pencil.c.get(a, comp * n + j);
                        if !c.is_zero() {
                            acc += c * tj;
                        }
                    }
                    acc
                })
                .collect()
        });
        let s_rows: Vec<Vec<Rational>> = opts.exec.map_range(r, |p| {
            let (comp, t) = col_vector(p);
            (0..r)
                .map(|q| {
                    let mut acc = Rational::zero();
                    for (i, ti) in t {
                        let w = &w_rows[comp * n + i][q];
                        if !w.is_zero() {
                            acc += ti * w;
                        }
                    }
                    acc
                })
                .collect()
        });
        let s = RationalMatrix::from_rows(s_rows);
        if !s.is_symmetric() {
            return Err(Error::Evaluation(
                "curl matrix in the orthogonal basis is not symmetric".into(),
            ));
        }
        let inv_sqrt: Vec<f64> = (0..r)
            .map(|q| 1.0 / orthogonal.norms[q % rs].to_f64().unwrap_or(f64::NAN).sqrt())
            .collect();
        let a = DMatrix::from_fn(r, r, |i, j| {
            s.get(i, j).to_f64().unwrap_or(f64::NAN) * inv_sqrt[i] * inv_sqrt[j]
        });
        let eig = SymmetricEigen::new(a);
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = DMatrix::from_fn(r, r, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(CurlSpectrum {
            pencil,
            orthogonal,
            eigenvalues,
            eigenvectors,
            basis_fields: OnceLock::new(),
        })
    }

    pub fn max_degree(&self) -> u32 {
        self.pencil.basis.max_degree()
    }

    pub fn rank_g(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Groups sorted eigenvalues; fails when two groups are closer than
    /// `10 * tol`.
    fn clusters(&self, tol: f64) -> Result<Vec<(f64, Vec<usize>)>> {
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for (i, &x) in self.eigenvalues.iter().enumerate() {
            match groups.last_mut() {
                Some((_, members)) if x - self.eigenvalues[*members.last().unwrap()] <= tol => {
                    members.push(i)
                }
                _ => {
                    if let Some((_, members)) = groups.last() {
                        let prev = self.eigenvalues[*members.last().unwrap()];
                        if x - prev < 10.0 * tol {
                            return Err(Error::ClusterAmbiguity {
                                near: x,
                                gap: x - prev,
                                raw: self.eigenvalues.clone(),
                            });
                        }
                    }
                    groups.push((x, vec![i]));
                }
            }
        }
        for g in groups.iter_mut() {
            g.0 = compensated_sum(g.1.iter().map(|&i| self.eigenvalues[i])) / g.1.len() as f64;
        }
        Ok(groups)
    }

    pub fn report(&self, tol: f64) -> Result<SpectrumReport> {
        let groups = self.clusters(tol)?;
        let mut clusters = Vec::new();
        let mut gradient_count = 0;
        for (mu, members) in &groups {
            if mu.abs() <= tol {
                gradient_count += members.len();
            } else {
                clusters.push(Cluster {
                    mu: *mu,
                    multiplicity: members.len(),
                });
            }
        }
        let max_integrality_error = self
            .eigenvalues
            .iter()
            .filter(|x| x.abs() > tol)
            .map(|x| (x - x.round()).abs())
            .fold(0.0, f64::max);
        Ok(SpectrumReport {
            max_degree: self.max_degree(),
            clusters,
            gradient_count,
            rank_g: self.rank_g(),
            cluster_tol: tol,
            max_integrality_error,
        })
    }

    fn basis_fields(&self) -> Arc<Vec<BasisField>> {
        self.basis_fields
            .get_or_init(|| {
                let rs = self.orthogonal.rank();
                let exps = self.pencil.basis.exponents();
                let fields: Vec<BasisField> = (0..3 * rs)
                    .map(|q| {
                        let (comp, t) = (q / rs, &self.orthogonal.vectors[q % rs]);
                        let poly =
                            SpherePoly::from_terms(t.iter().map(|(i, c)| (exps[*i], c.clone())));
                        let mut v = PolyVectorField::zero();
                        v.components[comp] = poly;
                        BasisField::new(v, self.orthogonal.norms[q % rs].clone())
                    })
                    .collect();
                Arc::new(fields)
            })
            .clone()
    }

    /// Orthonormal basis of the eigenspace of the cluster containing `mu`.
    pub fn eigenspace(&self, mu: f64) -> Result<Vec<EigenField>> {
        let groups = self.clusters(CLUSTER_TOL)?;
        let (value, members) = groups
            .iter()
            .find(|(v, _)| (v - mu).abs() <= 1e3 * CLUSTER_TOL)
            .ok_or_else(|| {
                Error::NotFound(format!(
                    "eigenvalue {mu} is not in the curl spectrum at degree {}",
                    self.max_degree()
                ))
            })?;
        let basis = self.basis_fields();
        let rs = self.orthogonal.rank();
        let scale = 1.0 / pi2().sqrt();
        Ok(members
            .iter()
            .map(|&col| {
                let weights = (0..3 * rs)
                    .map(|q| {
                        let d = self.orthogonal.norms[q % rs].to_f64().unwrap_or(f64::NAN);
                        scale * self.eigenvectors[(q, col)] / d.sqrt()
                    })
                    .collect();
                EigenField {
                    mu: *value,
                    basis: basis.clone(),
                    weights,
                }
            })
            .collect())
    }
}

pub fn spectrum(max_degree: u32, tol: f64) -> Result<SpectrumReport> {
    CurlSpectrum::compute(max_degree, &AssemblyOptions::default())?.report(tol)
}

pub fn eigenspace(max_degree: u32, mu: f64) -> Result<Vec<EigenField>> {
    CurlSpectrum::compute(max_degree, &AssemblyOptions::default())?.eigenspace(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{integer, FrameField};

    fn spec(k: u32) -> CurlSpectrum {
        CurlSpectrum::compute(k, &AssemblyOptions::default()).unwrap()
    }

    #[test]
    fn degree_zero_pencil() {
        let p = assemble(0, &AssemblyOptions::default()).unwrap();
        assert_eq!(p.c.dim(), 3);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { integer(2) } else { integer(0) };
                assert_eq!(p.g.get(i, j), &want);
                assert_eq!(p.c.get(i, j), &(&want * integer(2)));
            }
        }
        let r = spec(0).report(CLUSTER_TOL).unwrap();
        assert_eq!(
            r.clusters,
            vec![Cluster {
                mu: r.clusters[0].mu,
                multiplicity: 3
            }]
        );
        assert!((r.clusters[0].mu - 2.0).abs() < 1e-12);
    }

    #[test]
    fn pencil_is_symmetric() {
        let p = assemble(2, &AssemblyOptions::default()).unwrap();
        assert!(p.c.is_symmetric());
        assert!(p.g.is_symmetric());
    }

    #[test]
    fn kernel_of_gram_is_the_sphere_ideal() {
        for k in 0..=4u32 {
            let p = assemble(k, &AssemblyOptions::default()).unwrap();
            let o = OrthogonalBasis::from_pencil(&p);
            let harmonic: usize = (0..=k as usize).map(|j| (j + 1) * (j + 1)).sum();
            assert_eq!(o.rank(), harmonic, "K={k}");
            assert_eq!(o.kernel_dim, p.basis.len() - harmonic);
        }
    }

    #[test]
    fn degree_one_spectrum() {
        let r = spec(1).report(CLUSTER_TOL).unwrap();
        assert_eq!(r.rank_g, 15);
        assert_eq!(r.gradient_count, 4);
        assert_eq!(r.multiplicity(2), 3);
        assert_eq!(r.multiplicity(3), 8);
        assert_eq!(r.clusters.len(), 2);
    }

    #[test]
    fn degree_two_spectrum() {
        let r = spec(2).report(CLUSTER_TOL).unwrap();
        assert_eq!(r.rank_g, 42);
        assert_eq!(r.gradient_count, 13);
        assert_eq!(r.multiplicity(2), 3);
        assert_eq!(r.multiplicity(3), 8);
        assert_eq!(r.multiplicity(4), 15);
        assert_eq!(r.multiplicity(-2), 3);
        assert_eq!(r.total_multiplicity(), 42);
        assert!(r.max_integrality_error < INTEGRALITY_TOL);
    }

    #[test]
    fn size_cap_is_enforced() {
        let opts = AssemblyOptions {
            max_degree_cap: 2,
            ..Default::default()
        };
        assert!(matches!(assemble(3, &opts), Err(Error::Resource(_))));
    }

    #[test]
    fn missing_eigenvalue_is_not_found() {
        assert!(matches!(spec(1).eigenspace(7.0), Err(Error::NotFound(_))));
    }

    #[test]
    fn lowest_eigenspace_is_the_frame() {
        let s = spec(2);
        let fields = s.eigenspace(2.0).unwrap();
        assert_eq!(fields.len(), 3);
        for f in &fields {
            assert!((f.l2_norm_sq() - 1.0).abs() < 1e-12);
            // Constant components: every sampled norm equals the mean.
            let nc = norm_constancy(f, 2000, 1);
            assert!(nc.max_deviation < 1e-10, "{nc:?}");
        }
        // xi, X1, X2 each project fully onto the span.
        for v in FrameField::ALL {
            let frame = PolyVectorField::frame(v);
            let total: f64 = fields
                .iter()
                .map(|f| {
                    let ip: f64 = f
                        .terms()
                        .map(|(w, t)| w * t.inner_product(&frame).to_f64())
                        .sum();
                    ip * ip
                })
                .sum();
            assert!((total - 2.0 * pi2()).abs() < 1e-9, "{v:?}: {total}");
        }
    }

    #[test]
    fn eigenfields_satisfy_the_curl_equation() {
        let s = spec(2);
        for mu in [2.0, 3.0, 4.0, -2.0, 0.0] {
            for f in s.eigenspace(mu).unwrap() {
                let r = f.residuals(200, 7);
                assert!(r.curl < 1e-9 * r.max_norm, "mu={mu} {r:?}");
                if mu != 0.0 {
                    assert!(r.divergence < 1e-9 * r.max_norm, "mu={mu} {r:?}");
                    assert!(r.laplacian.unwrap() < 1e-9 * r.max_norm, "mu={mu} {r:?}");
                } else {
                    assert!(r.laplacian.is_none());
                }
            }
        }
    }

    #[test]
    fn eigenspaces_are_orthonormal() {
        let s = spec(2);
        let fields = s.eigenspace(3.0).unwrap();
        assert_eq!(fields.len(), 8);
        for (i, a) in fields.iter().enumerate() {
            for (j, b) in fields.iter().enumerate() {
                let mut ip = 0.0;
                for (wa, ta) in a.terms() {
                    for (wb, tb) in b.terms() {
                        ip += wa * wb * ta.inner_product(tb).to_f64();
                    }
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-10, "{i},{j}: {ip}");
            }
        }
    }

    #[test]
    fn norm_constancy_examples() {
        let v = PolyVectorField::new(
            SpherePoly::constant(integer(3)),
            SpherePoly::zero(),
            SpherePoly::constant(integer(4)),
        );
        let nc = norm_constancy(&v, 10_000, 2);
        assert!((nc.mean - 25.0).abs() < 1e-12);
        assert!(nc.max_deviation < 1e-12);
        let xi = norm_constancy(&PolyVectorField::frame(FrameField::Xi), 1000, 3);
        assert!((xi.mean - 1.0).abs() < 1e-15 && xi.max_deviation == 0.0);

        let s = spec(1);
        let f = &s.eigenspace(3.0).unwrap()[0];
        let nc = norm_constancy(f, 10_000, 4);
        assert!(nc.max_deviation / nc.mean > 0.1, "{nc:?}");
    }
}
