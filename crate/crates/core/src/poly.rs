//! Exact polynomial algebra in the ambient coordinates `(x1, y1, x2, y2)`
//! of R^4, viewed as functions on the unit sphere S^3.
//!
//! Coefficients are arbitrary-precision rationals. Integrals over S^3 are
//! rational multiples of pi^2 and are carried as [`SphereScalar`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// Exponents of `x1^a y1^b x2^c y2^d`.
pub type Exponent = [u32; 4];

pub type Rational = BigRational;

pub fn rational(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub const VAR_NAMES: [&str; 4] = ["x1", "y1", "x2", "y2"];

/// One of the three global frame fields on S^3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameField {
    Xi,
    X1,
    X2,
}

impl FrameField {
    /// Positive orientation order.
    pub const ALL: [FrameField; 3] = [FrameField::Xi, FrameField::X1, FrameField::X2];

    pub fn index(self) -> usize {
        match self {
            FrameField::Xi => 0,
            FrameField::X1 => 1,
            FrameField::X2 => 2,
        }
    }

    pub fn from_index(i: usize) -> FrameField {
        Self::ALL[i]
    }

    /// The field is linear in the ambient coordinates, `V(p) = A p`.
    ///
    /// ```text
    /// xi = -y1 d/dx1 + x1 d/dy1 - y2 d/dx2 + x2 d/dy2
    /// X1 = -x2 d/dx1 + y2 d/dy1 + x1 d/dx2 - y1 d/dy2
    /// X2 = -y2 d/dx1 - x2 d/dy1 + y1 d/dx2 + x1 d/dy2
    /// ```
    pub fn matrix(self) -> [[i8; 4]; 4] {
        match self {
            FrameField::Xi => [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]],
            FrameField::X1 => [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]],
            FrameField::X2 => [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FrameField::Xi => "xi",
            FrameField::X1 => "X1",
            FrameField::X2 => "X2",
        }
    }
}

/// `value * pi^2`, exactly.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct SphereScalar(pub Rational);

impl SphereScalar {
    pub fn zero() -> Self {
        SphereScalar(Rational::zero())
    }

    /// Rational multiplier of pi^2.
    pub fn pi2_multiple(&self) -> &Rational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn scale(&self, k: &Rational) -> Self {
        SphereScalar(&self.0 * k)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI * std::f64::consts::PI
    }
}

impl Add for SphereScalar {
    type Output = SphereScalar;
    fn add(self, rhs: Self) -> Self {
        SphereScalar(self.0 + rhs.0)
    }
}

impl Sub for SphereScalar {
    type Output = SphereScalar;
    fn sub(self, rhs: Self) -> Self {
        SphereScalar(self.0 - rhs.0)
    }
}

impl fmt::Display for SphereScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})*pi^2", self.0)
    }
}

/// Product of odd numbers `(2k-1)!!`, with `(-1)!! = 1`.
fn odd_double_factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, j| acc * BigInt::from(2 * j - 1))
}

/// `(2k)!! = 2^k k!`.
fn even_double_factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, j| acc * BigInt::from(2 * j))
}

/// Exact `pi^-2 * integral over S^3` of `x1^a y1^b x2^c y2^d`.
///
/// Zero unless every exponent is even. For exponents `(2i, 2j, 2k, 2l)` with
/// `n = i+j+k+l` the value is `4 (2i-1)!!(2j-1)!!(2k-1)!!(2l-1)!! / (2n+2)!!`.
pub fn monomial_integral(e: &Exponent) -> Rational {
    if e.iter().any(|x| x % 2 == 1) {
        return Rational::zero();
    }
    let half: Vec<u32> = e.iter().map(|x| x / 2).collect();
    let n: u32 = half.iter().sum();
    let num = half
        .iter()
        .fold(BigInt::from(4), |acc, &k| acc * odd_double_factorial(k));
    BigRational::new(num, even_double_factorial(n + 1))
}

fn add_exp(a: &Exponent, b: &Exponent) -> Exponent {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

/// A polynomial in `(x1, y1, x2, y2)` with exact rational coefficients.
///
/// Stored terms never carry a zero coefficient. Two different term sets may
/// agree as functions on S^3; use [`SpherePoly::restricts_equal`] for that.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct SpherePoly {
    terms: BTreeMap<Exponent, Rational>,
}

impl SpherePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial([0; 4], c)
    }

    pub fn monomial(e: Exponent, c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    /// The coordinate function `x1`, `y1`, `x2` or `y2` (index 0..4).
    pub fn var(i: usize) -> Self {
        let mut e = [0; 4];
        e[i] = 1;
        Self::monomial(e, Rational::one())
    }

    /// `x1^2 + y1^2 + x2^2 + y2^2 - 1`, which vanishes on S^3.
    pub fn sphere_relation() -> Self {
        let mut p = Self::constant(integer(-1));
        for i in 0..4 {
            let mut e = [0; 4];
            e[i] = 2;
            p.add_term(e, Rational::one());
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponent, Rational)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, e: Exponent, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &Exponent) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        SpherePoly {
            terms: self.terms.iter().map(|(e, c)| (*e, c * k)).collect(),
        }
    }

    pub fn partial(&self, var: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut d = *e;
            d[var] -= 1;
            out.add_term(d, c * integer(e[var] as i64));
        }
        out
    }

    /// Directional derivative along one of the frame fields.
    pub fn frame_derive(&self, field: FrameField) -> Self {
        let a = field.matrix();
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            for (k, row) in a.iter().enumerate() {
                if e[k] == 0 {
                    continue;
                }
                let dk = c * integer(e[k] as i64);
                for (j, &s) in row.iter().enumerate() {
                    if s == 0 {
                        continue;
                    }
                    let mut d = *e;
                    d[k] -= 1;
                    d[j] += 1;
                    out.add_term(d, &dk * integer(s as i64));
                }
            }
        }
        out
    }

    /// `xi^2 + X1^2 + X2^2`, which restricts to minus the Laplace–Beltrami
    /// operator of the round sphere.
    pub fn frame_laplacian(&self) -> Self {
        FrameField::ALL.iter().fold(Self::zero(), |acc, &v| {
            &acc + &self.frame_derive(v).frame_derive(v)
        })
    }

    pub fn sphere_integral(&self) -> SphereScalar {
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let m = monomial_integral(e);
            if !m.is_zero() {
                total += c * m;
            }
        }
        SphereScalar(total)
    }

    /// L^2(S^3) inner product, computed without forming the product.
    pub fn inner_product(&self, other: &SpherePoly) -> SphereScalar {
        let mut total = Rational::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = add_exp(ea, eb);
                if e.iter().any(|x| x % 2 == 1) {
                    continue;
                }
                total += ca * cb * monomial_integral(&e);
            }
        }
        SphereScalar(total)
    }

    /// Whether `self` and `other` agree as functions on S^3.
    pub fn restricts_equal(&self, other: &SpherePoly) -> bool {
        let d = self - other;
        d.inner_product(&d).is_zero()
    }

    pub fn eval(&self, p: &[f64; 4]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut m = c.to_f64().unwrap_or(f64::NAN);
            for (x, &k) in p.iter().zip(e.iter()) {
                m *= x.powi(k as i32);
            }
            acc += m;
        }
        acc
    }

    pub fn max_abs_coefficient(&self) -> Rational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

impl<'a> Add<&'a SpherePoly> for &'a SpherePoly {
    type Output = SpherePoly;
    fn add(self, rhs: &SpherePoly) -> SpherePoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a SpherePoly> for &'a SpherePoly {
    type Output = SpherePoly;
    fn sub(self, rhs: &SpherePoly) -> SpherePoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a SpherePoly> for &'a SpherePoly {
    type Output = SpherePoly;
    fn mul(self, rhs: &SpherePoly) -> SpherePoly {
        let mut out = SpherePoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(add_exp(ea, eb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &SpherePoly {
    type Output = SpherePoly;
    fn neg(self) -> SpherePoly {
        self.scale(&integer(-1))
    }
}

impl Add for SpherePoly {
    type Output = SpherePoly;
    fn add(self, rhs: SpherePoly) -> SpherePoly {
        &self + &rhs
    }
}

impl Sub for SpherePoly {
    type Output = SpherePoly;
    fn sub(self, rhs: SpherePoly) -> SpherePoly {
        &self - &rhs
    }
}

impl Mul for SpherePoly {
    type Output = SpherePoly;
    fn mul(self, rhs: SpherePoly) -> SpherePoly {
        &self * &rhs
    }
}

impl fmt::Display for SpherePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (k, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*{}", VAR_NAMES[k])?,
                    _ => write!(f, "*{}^{}", VAR_NAMES[k], p)?,
                }
            }
        }
        Ok(())
    }
}

/// All exponents of total degree at most `max_degree`, ordered by degree
/// and then lexicographically.
pub fn monomials_up_to(max_degree: u32) -> Vec<Exponent> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        for a in (0..=d).rev() {
            for b in (0..=d - a).rev() {
                for c in (0..=d - a - b).rev() {
                    out.push([a, b, c, d - a - b - c]);
                }
            }
        }
    }
    out
}
