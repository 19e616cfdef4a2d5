//! Exact arithmetic in the cyclotomic field ℚ(ζ_m).
//!
//! Elements are stored in the power basis `1, ζ, …, ζ^{φ(m)−1}` of
//! `ℚ[x]/(Φ_m(x))`. Because that basis is also an integral basis of the ring
//! of integers `ℤ[ζ_m]`, integrality is read off coefficient by coefficient.
//!
//! The field generated by the values of two Dirichlet characters of orders
//! `d₁`, `d₂` is realized as ℚ(ζ_m) with `m = lcm(d₁, d₂)`, so its ring of
//! integers is ℤ[ζ_m].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::numtheory::{divisors, euler_phi};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CyclotomicError {
    #[error("modulus mismatch: ℚ(ζ_{left}) vs ℚ(ζ_{right})")]
    ModulusMismatch { left: usize, right: usize },
    #[error("cannot lift from ℚ(ζ_{from}) to ℚ(ζ_{to}): {from} does not divide {to}")]
    NotDivisible { from: usize, to: usize },
    #[error("element does not lie in ℚ(ζ_{0})")]
    NotInSubfield(usize),
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed cyclotomic literal: {0}")]
    Parse(String),
}

/// The m-th cyclotomic polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicPolynomial {
    pub index: usize,
    pub coeffs: Vec<i64>,
}

impl CyclotomicPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Evaluate at an integer point.
    pub fn eval(&self, x: i64) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, &c| acc * x + c)
    }
}

impl fmt::Display for CyclotomicPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (deg, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let abs = c.abs();
            match (deg, abs) {
                (0, _) => write!(f, "{abs}")?,
                (1, 1) => write!(f, "x")?,
                (1, _) => write!(f, "{abs}x")?,
                (_, 1) => write!(f, "x^{deg}")?,
                _ => write!(f, "{abs}x^{deg}")?,
            }
            first = false;
        }
        Ok(())
    }
}

/// Exact quotient of integer polynomials (ascending coefficients), divisor monic.
fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    debug_assert_eq!(den[dn], 1);
    let mut rem = num.to_vec();
    let mut quot = vec![0i64; num.len() - dn];
    for i in (0..quot.len()).rev() {
        let q = rem[i + dn];
        quot[i] = q;
        if q != 0 {
            for (k, &dk) in den.iter().enumerate() {
                rem[i + k] -= q * dk;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0), "inexact polynomial division");
    quot
}

fn poly_mul(x: &[i64], y: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; x.len() + y.len() - 1];
    for (i, &a) in x.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (j, &b) in y.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Φ_m by exact division of x^m − 1 by the product of Φ_d over proper divisors d of m.
pub fn cyclotomic_polynomial(m: usize) -> CyclotomicPolynomial {
    assert!(m >= 1, "cyclotomic index must be positive");
    let mut num = vec![0i64; m + 1];
    num[0] = -1;
    num[m] = 1;
    let mut den = vec![1i64];
    for d in divisors(m as u64) {
        let d = d as usize;
        if d < m {
            den = poly_mul(&den, &cyclotomic_polynomial(d).coeffs);
        }
    }
    CyclotomicPolynomial {
        index: m,
        coeffs: poly_div_exact(&num, &den),
    }
}

/// Precomputed data for one field: Φ_m and the reduced power-basis
/// coordinates of ζ^e for 0 ≤ e < m.
#[derive(Debug)]
pub struct FieldData {
    pub m: usize,
    pub degree: usize,
    pub poly: CyclotomicPolynomial,
    pub powers: Vec<Vec<i64>>,
}

impl FieldData {
    fn build(m: usize) -> Self {
        let poly = cyclotomic_polynomial(m);
        let degree = poly.degree();
        debug_assert_eq!(degree as u64, euler_phi(m as u64));
        let mut powers = Vec::with_capacity(m);
        let mut cur = vec![0i64; degree];
        cur[0] = 1;
        for _ in 0..m {
            powers.push(cur.clone());
            // multiply by x and reduce: x^degree = −Σ poly[k] x^k
            let top = cur[degree - 1];
            for k in (1..degree).rev() {
                cur[k] = cur[k - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for k in 0..degree {
                    cur[k] -= top * poly.coeffs[k];
                }
            }
        }
        FieldData {
            m,
            degree,
            poly,
            powers,
        }
    }
}

/// Shared, lazily built field data for ℚ(ζ_m).
pub fn field(m: usize) -> Arc<FieldData> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<FieldData>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(f) = cache.read().expect("field cache poisoned").get(&m) {
        return f.clone();
    }
    let built = Arc::new(FieldData::build(m));
    cache
        .write()
        .expect("field cache poisoned")
        .entry(m)
        .or_insert(built)
        .clone()
}

/// An element of ℚ(ζ_m) in the power basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CyclotomicNumber {
    modulus: usize,
    coeffs: Vec<BigRational>,
}

impl CyclotomicNumber {
    pub fn zero(m: usize) -> Self {
        let degree = field(m).degree;
        CyclotomicNumber {
            modulus: m,
            coeffs: vec![BigRational::zero(); degree],
        }
    }

    pub fn one(m: usize) -> Self {
        Self::from_rational(BigRational::one(), m)
    }

    pub fn from_rational(r: BigRational, m: usize) -> Self {
        let mut x = Self::zero(m);
        x.coeffs[0] = r;
        x
    }

    pub fn from_integer(n: i64, m: usize) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()), m)
    }

    /// Build from power-basis coordinates; the length must be φ(m).
    pub fn from_coeffs(m: usize, coeffs: Vec<BigRational>) -> Self {
        assert_eq!(coeffs.len(), field(m).degree, "coefficient count must be φ(m)");
        CyclotomicNumber { modulus: m, coeffs }
    }

    /// Σ counts[e]·ζ_m^e divided by `den`. This is the exit point of every
    /// hot loop: integer accumulators indexed by the exponent of ζ_m.
    pub fn from_exponent_counts(m: usize, counts: &[i128], den: &BigInt) -> Self {
        let f = field(m);
        let mut acc = vec![BigInt::zero(); f.degree];
        for (e, &cnt) in counts.iter().enumerate() {
            if cnt == 0 {
                continue;
            }
            let cnt = BigInt::from(cnt);
            for (slot, &p) in acc.iter_mut().zip(&f.powers[e % m]) {
                if p != 0 {
                    *slot += &cnt * p;
                }
            }
        }
        let coeffs = acc
            .into_iter()
            .map(|n| BigRational::new(n, den.clone()))
            .collect();
        CyclotomicNumber { modulus: m, coeffs }
    }

    /// ζ_m^k.
    pub fn root_of_unity(k: i64, m: usize) -> Self {
        let f = field(m);
        let e = k.rem_euclid(m as i64) as usize;
        let coeffs = f.powers[e]
            .iter()
            .map(|&c| BigRational::from_integer(c.into()))
            .collect();
        CyclotomicNumber { modulus: m, coeffs }
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// Power-basis coordinate vector.
    pub fn coordinates(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The rational value if the element lies in ℚ.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then(|| &self.coeffs[0])
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// Least positive D with D·x ∈ ℤ[ζ_m].
    pub fn denominator(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    fn check(&self, other: &Self) -> Result<(), CyclotomicError> {
        if self.modulus == other.modulus {
            Ok(())
        } else {
            Err(CyclotomicError::ModulusMismatch {
                left: self.modulus,
                right: other.modulus,
            })
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, CyclotomicError> {
        self.check(other)?;
        Ok(CyclotomicNumber {
            modulus: self.modulus,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, CyclotomicError> {
        self.check(other)?;
        Ok(CyclotomicNumber {
            modulus: self.modulus,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, CyclotomicError> {
        self.check(other)?;
        let f = field(self.modulus);
        let n = f.degree;
        let mut prod = vec![BigRational::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        // reduce from the top using x^n = −Σ Φ_k x^k
        for top in (n..prod.len()).rev() {
            let lead = std::mem::take(&mut prod[top]);
            if lead.is_zero() {
                continue;
            }
            for (k, &pk) in f.poly.coeffs[..n].iter().enumerate() {
                if pk != 0 {
                    prod[top - n + k] -= &lead * BigRational::from_integer(pk.into());
                }
            }
        }
        prod.truncate(n);
        Ok(CyclotomicNumber {
            modulus: self.modulus,
            coeffs: prod,
        })
    }

    /// Multiplicative inverse, by solving (x·ζ^i)_i · y = 1 over ℚ.
    pub fn try_inv(&self) -> Result<Self, CyclotomicError> {
        if self.is_zero() {
            return Err(CyclotomicError::DivisionByZero);
        }
        let m = self.modulus;
        let n = self.degree();
        let cols: Vec<CyclotomicNumber> = (0..n)
            .map(|i| self * &CyclotomicNumber::root_of_unity(i as i64, m))
            .collect();
        // augmented system: row r, column i = coefficient r of x·ζ^i
        let mut mat: Vec<Vec<BigRational>> = (0..n)
            .map(|r| {
                let mut row: Vec<BigRational> = cols.iter().map(|c| c.coeffs[r].clone()).collect();
                row.push(if r == 0 { BigRational::one() } else { BigRational::zero() });
                row
            })
            .collect();
        for col in 0..n {
            let p = (col..n)
                .find(|&r| !mat[r][col].is_zero())
                .ok_or(CyclotomicError::DivisionByZero)?;
            mat.swap(col, p);
            let inv = mat[col][col].recip();
            for v in mat[col].iter_mut() {
                *v = &*v * &inv;
            }
            for r in 0..n {
                if r != col && !mat[r][col].is_zero() {
                    let factor = mat[r][col].clone();
                    for k in col..=n {
                        let s = &factor * &mat[col][k];
                        mat[r][k] -= s;
                    }
                }
            }
        }
        Ok(CyclotomicNumber {
            modulus: m,
            coeffs: mat.into_iter().map(|mut row| row.pop().expect("augmented")).collect(),
        })
    }

    pub fn try_div(&self, other: &Self) -> Result<Self, CyclotomicError> {
        self.check(other)?;
        self.try_mul(&other.try_inv()?)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        CyclotomicNumber {
            modulus: self.modulus,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// Image under ζ ↦ ζ^k for k coprime to m (a Galois automorphism).
    pub fn galois(&self, k: i64) -> Self {
        let m = self.modulus;
        let f = field(m);
        let mut out = vec![BigRational::zero(); f.degree];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = (k * i as i64).rem_euclid(m as i64) as usize;
            for (slot, &p) in out.iter_mut().zip(&f.powers[e]) {
                if p != 0 {
                    *slot += c * BigRational::from_integer(p.into());
                }
            }
        }
        CyclotomicNumber {
            modulus: m,
            coeffs: out,
        }
    }

    /// Complex conjugation, ζ ↦ ζ^{−1}.
    pub fn conjugate(&self) -> Self {
        self.galois(-1)
    }

    /// Embed into ℚ(ζ_{target}) for m | target, via ζ_m = ζ_{target}^{target/m}.
    pub fn lift(&self, target: usize) -> Result<Self, CyclotomicError> {
        if target % self.modulus != 0 {
            return Err(CyclotomicError::NotDivisible {
                from: self.modulus,
                to: target,
            });
        }
        if target == self.modulus {
            return Ok(self.clone());
        }
        let step = target / self.modulus;
        let f = field(target);
        let mut out = vec![BigRational::zero(); f.degree];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (slot, &p) in out.iter_mut().zip(&f.powers[(i * step) % target]) {
                if p != 0 {
                    *slot += c * BigRational::from_integer(p.into());
                }
            }
        }
        Ok(CyclotomicNumber {
            modulus: target,
            coeffs: out,
        })
    }

    /// Inverse of [`lift`](Self::lift): recover the element of ℚ(ζ_small)
    /// when it lies in that subfield.
    pub fn restrict(&self, small: usize) -> Result<Self, CyclotomicError> {
        if self.modulus % small != 0 {
            return Err(CyclotomicError::NotDivisible {
                from: small,
                to: self.modulus,
            });
        }
        let step = self.modulus / small;
        let big = field(self.modulus);
        let sub = field(small);
        // columns: images of the small power basis; solve A·y = x over ℚ
        let rows = big.degree;
        let cols = sub.degree;
        let mut mat: Vec<Vec<BigRational>> = (0..rows)
            .map(|r| {
                let mut row: Vec<BigRational> = (0..cols)
                    .map(|i| BigRational::from_integer(big.powers[(i * step) % self.modulus][r].into()))
                    .collect();
                row.push(self.coeffs[r].clone());
                row
            })
            .collect();
        let mut pivot_row = 0;
        let mut pivots = Vec::new();
        for col in 0..cols {
            let Some(p) = (pivot_row..rows).find(|&r| !mat[r][col].is_zero()) else {
                continue;
            };
            mat.swap(pivot_row, p);
            let inv = mat[pivot_row][col].recip();
            for v in mat[pivot_row].iter_mut() {
                *v = &*v * &inv;
            }
            for r in 0..rows {
                if r != pivot_row && !mat[r][col].is_zero() {
                    let factor = mat[r][col].clone();
                    for k in 0..=cols {
                        let sub_v = &factor * &mat[pivot_row][k];
                        mat[r][k] -= sub_v;
                    }
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        if mat[pivot_row..].iter().any(|row| !row[cols].is_zero()) {
            return Err(CyclotomicError::NotInSubfield(small));
        }
        let mut y = vec![BigRational::zero(); cols];
        for (r, &col) in pivots.iter().enumerate() {
            y[col] = mat[r][cols].clone();
        }
        Ok(CyclotomicNumber {
            modulus: small,
            coeffs: y,
        })
    }

    /// Numerical value under the embedding ζ_m ↦ e^{2πi/m}.
    pub fn to_complex(&self) -> (f64, f64) {
        let m = self.modulus as f64;
        self.coeffs.iter().enumerate().fold((0.0, 0.0), |(re, im), (k, c)| {
            let v = c.to_f64().unwrap_or(f64::NAN);
            let theta = 2.0 * std::f64::consts::PI * k as f64 / m;
            (re + v * theta.cos(), im + v * theta.sin())
        })
    }

    /// Decimal approximation with `digits` fractional digits.
    pub fn approx_string(&self, digits: usize) -> String {
        let (re, im) = self.to_complex();
        if self.modulus <= 2 {
            format!("{re:.digits$}")
        } else {
            let sign = if im < 0.0 { '-' } else { '+' };
            format!("{re:.digits$} {sign} {:.digits$}i", im.abs())
        }
    }
}

impl fmt::Display for CyclotomicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:[", self.modulus)?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for CyclotomicNumber {
    type Err = CyclotomicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CyclotomicError::Parse(s.to_string());
        let (m, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let m: usize = m.trim().parse().map_err(|_| bad())?;
        if m == 0 {
            return Err(bad());
        }
        let body = rest
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(bad)?;
        let coeffs = body
            .split(',')
            .map(|t| parse_rational(t.trim()).ok_or_else(bad))
            .collect::<Result<Vec<_>, _>>()?;
        if coeffs.len() as u64 != euler_phi(m as u64) {
            return Err(bad());
        }
        Ok(CyclotomicNumber { modulus: m, coeffs })
    }
}

pub(crate) fn parse_rational(t: &str) -> Option<BigRational> {
    match t.split_once('/') {
        Some((p, q)) => {
            let q: BigInt = q.parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p.parse().ok()?, q))
        }
        None => Some(BigRational::from_integer(t.parse().ok()?)),
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl std::ops::$tr<&CyclotomicNumber> for &CyclotomicNumber {
            type Output = CyclotomicNumber;
            /// Panics on modulus mismatch; use the `try_` form to handle it.
            fn $method(self, rhs: &CyclotomicNumber) -> CyclotomicNumber {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl std::ops::$tr for CyclotomicNumber {
            type Output = CyclotomicNumber;
            fn $method(self, rhs: CyclotomicNumber) -> CyclotomicNumber {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl std::ops::Neg for &CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn neg(self) -> CyclotomicNumber {
        CyclotomicNumber {
            modulus: self.modulus,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl std::ops::Neg for CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn neg(self) -> CyclotomicNumber {
        -&self
    }
}

/// Sign of the leading coordinate, used only for deterministic display choices.
pub fn leading_sign(x: &CyclotomicNumber) -> i32 {
    x.coordinates()
        .iter()
        .find(|c| !c.is_zero())
        .map(|c| if c.is_negative() { -1 } else { 1 })
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    // Schoolbook division oracle over ℚ, independent of poly_div_exact.
    fn divide_oracle(num: &[i64], den: &[i64]) -> Vec<i64> {
        let mut rem: Vec<f64> = num.iter().map(|&x| x as f64).collect();
        let dn = den.len() - 1;
        let mut quot = vec![0.0; num.len() - dn];
        for i in (0..quot.len()).rev() {
            let qv = rem[i + dn] / den[dn] as f64;
            quot[i] = qv;
            for (k, &d) in den.iter().enumerate() {
                rem[i + k] -= qv * d as f64;
            }
        }
        assert!(rem.iter().all(|r| r.abs() < 1e-9));
        quot.iter().map(|v| v.round() as i64).collect()
    }

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1).coeffs, vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(4).coeffs, vec![1, 0, 1]);
        // x^6 − 1 divided by Φ1·Φ2·Φ3 = (x−1)(x+1)(x²+x+1)
        let den = poly_mul(&poly_mul(&[-1, 1], &[1, 1]), &[1, 1, 1]);
        let phi6 = divide_oracle(&[-1, 0, 0, 0, 0, 0, 1], &den);
        assert_eq!(phi6, vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(6).coeffs, phi6);
        assert_eq!(cyclotomic_polynomial(6).to_string(), "x^2 - x + 1");
    }

    #[test]
    fn phi_vanishes_at_zeta() {
        for m in 1..=60 {
            let f = field(m);
            let mut acc = CyclotomicNumber::zero(m);
            for (k, &c) in f.poly.coeffs.iter().enumerate() {
                let term = CyclotomicNumber::root_of_unity(k as i64, m)
                    .scale(&BigRational::from_integer(c.into()));
                acc = acc + term;
            }
            assert!(acc.is_zero(), "Φ_{m}(ζ_{m}) ≠ 0");
            // Φ_m divides x^m − 1
            assert_eq!(CyclotomicNumber::root_of_unity(m as i64, m), CyclotomicNumber::one(m));
        }
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(CyclotomicNumber::root_of_unity(0, 5), CyclotomicNumber::one(5));
        assert_eq!(CyclotomicNumber::root_of_unity(2, 4), CyclotomicNumber::from_integer(-1, 4));
        let s = CyclotomicNumber::root_of_unity(1, 3) + CyclotomicNumber::root_of_unity(2, 3);
        assert_eq!(s, CyclotomicNumber::from_integer(-1, 3));
    }

    #[test]
    fn products() {
        let i = CyclotomicNumber::root_of_unity(1, 4);
        assert_eq!(&i * &i, CyclotomicNumber::from_integer(-1, 4));
        assert_eq!(&i * &CyclotomicNumber::one(4), i);
        // (ζ₃ − ζ₃²)² = ζ₃² − 2 + ζ₃ = −3
        let d = CyclotomicNumber::root_of_unity(1, 3) - CyclotomicNumber::root_of_unity(2, 3);
        assert_eq!(&d * &d, CyclotomicNumber::from_integer(-3, 3));
    }

    #[test]
    fn mismatch_is_an_error() {
        let a = CyclotomicNumber::one(3);
        let b = CyclotomicNumber::one(4);
        assert_eq!(
            a.try_add(&b),
            Err(CyclotomicError::ModulusMismatch { left: 3, right: 4 })
        );
        assert!(a.try_mul(&b).is_err());
    }

    #[test]
    fn inverses() {
        for m in [1usize, 3, 4, 5, 8, 12] {
            let x = CyclotomicNumber::one(m) - CyclotomicNumber::root_of_unity(1, m).scale(&q(2, 3));
            let inv = x.try_inv().unwrap();
            assert_eq!(&x * &inv, CyclotomicNumber::one(m));
        }
        assert_eq!(
            CyclotomicNumber::zero(5).try_inv(),
            Err(CyclotomicError::DivisionByZero)
        );
    }

    #[test]
    fn conjugation() {
        let i = CyclotomicNumber::root_of_unity(1, 4);
        assert_eq!(i.conjugate(), -&i);
        let r = CyclotomicNumber::from_rational(q(5, 7), 12);
        assert_eq!(r.conjugate(), r);
    }

    #[test]
    fn lifting() {
        let m1 = CyclotomicNumber::from_integer(-1, 2);
        assert_eq!(m1.lift(6).unwrap(), CyclotomicNumber::from_integer(-1, 6));
        assert_eq!(
            CyclotomicNumber::root_of_unity(1, 3).lift(6).unwrap(),
            CyclotomicNumber::root_of_unity(2, 6)
        );
        assert_eq!(
            CyclotomicNumber::one(4).lift(6),
            Err(CyclotomicError::NotDivisible { from: 4, to: 6 })
        );
        let x = CyclotomicNumber::from_coeffs(5, vec![q(1, 2), q(-3, 1), q(0, 1), q(7, 5)]);
        let up = x.lift(15).unwrap();
        assert_eq!(up.restrict(5).unwrap(), x);
        let (a, b) = x.to_complex();
        let (c, d) = up.to_complex();
        assert!((a - c).abs() < 1e-12 && (b - d).abs() < 1e-12);
        assert!(CyclotomicNumber::root_of_unity(1, 15).restrict(5).is_err());
    }

    #[test]
    fn integrality_and_denominators() {
        let x = CyclotomicNumber::from_integer(2, 3) + CyclotomicNumber::root_of_unity(1, 3).scale(&q(3, 1));
        assert!(x.is_integral());
        assert_eq!(x.denominator(), BigInt::one());
        assert!(!CyclotomicNumber::from_rational(q(1, 2), 1).is_integral());
        let y = (CyclotomicNumber::one(5) + CyclotomicNumber::root_of_unity(1, 5)).scale(&q(1, 5));
        assert!(!y.is_integral());
        let z = CyclotomicNumber::from_rational(q(1, 6), 3)
            + CyclotomicNumber::root_of_unity(1, 3).scale(&q(1, 4));
        assert_eq!(z.denominator(), BigInt::from(12));
    }

    #[test]
    fn coordinates_of_basis() {
        let one = CyclotomicNumber::one(7);
        assert_eq!(one.coordinates()[0], q(1, 1));
        assert!(one.coordinates()[1..].iter().all(Zero::is_zero));
        let z = CyclotomicNumber::root_of_unity(1, 7);
        assert_eq!(z.coordinates()[1], q(1, 1));
        assert_eq!(z.degree(), 6);
    }

    #[test]
    fn text_form() {
        let x = CyclotomicNumber::from_coeffs(4, vec![q(-1, 2), q(3, 1)]);
        assert_eq!(x.to_string(), "4:[-1/2,3]");
        assert_eq!("4:[-1/2,3]".parse::<CyclotomicNumber>().unwrap(), x);
        assert!("4:[1]".parse::<CyclotomicNumber>().is_err());
        assert!("0:[]".parse::<CyclotomicNumber>().is_err());
        assert!("4:[1/0,2]".parse::<CyclotomicNumber>().is_err());
    }
}
