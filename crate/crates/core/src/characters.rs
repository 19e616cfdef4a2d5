//! Dirichlet characters: construction from exponent vectors or Conrey labels,
//! exact evaluation, conductor, parity, primitivity, Gauss sums and B_{1,χ}.
//!
//! A character mod q is identified by its exponents on the generators returned
//! by [`unit_group`]: χ(g_i) = ζ_{o_i}^{e_i}. With those generators the Conrey
//! label `q.n` corresponds to the exponent vector of the discrete log of n.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use thiserror::Error;

use crate::cyclotomic::CyclotomicNumber;
use crate::numtheory::{divisors, unit_group, UnitGroupStructure};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharacterError {
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("expected {expected} exponents for modulus {modulus}, got {got}")]
    ExponentCount { modulus: u64, expected: usize, got: usize },
    #[error("Conrey index {n} is not a unit modulo {q}")]
    NotUnit { q: u64, n: u64 },
    #[error("malformed character label: {0}")]
    Parse(String),
    #[error("character {0} is not primitive")]
    NotPrimitive(String),
    #[error("character {0} is trivial")]
    Trivial(String),
    #[error("parity mismatch: χ₁(−1)·χ₂(−1) = −1 for {0} and {1}")]
    Parity(String, String),
}

/// A Dirichlet character with cached order, value table, conductor and parity.
#[derive(Clone)]
pub struct DirichletCharacter {
    modulus: u64,
    group: Arc<UnitGroupStructure>,
    exponents: Vec<u64>,
    order: u64,
    /// values[n] = Some(e) means χ(n) = ζ_order^e.
    values: Arc<Vec<Option<u64>>>,
    conductor: u64,
    parity: i8,
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DirichletCharacter({})", self.label())
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.exponents == other.exponents
    }
}

impl Eq for DirichletCharacter {}

impl DirichletCharacter {
    pub fn from_exponents(q: u64, exponents: &[u64]) -> Result<Self, CharacterError> {
        if q == 0 {
            return Err(CharacterError::ZeroModulus);
        }
        Self::with_group(Arc::new(unit_group(q)), exponents)
    }

    fn with_group(group: Arc<UnitGroupStructure>, exponents: &[u64]) -> Result<Self, CharacterError> {
        let q = group.modulus;
        if exponents.len() != group.orders.len() {
            return Err(CharacterError::ExponentCount {
                modulus: q,
                expected: group.orders.len(),
                got: exponents.len(),
            });
        }
        let exponents: Vec<u64> = exponents
            .iter()
            .zip(&group.orders)
            .map(|(&e, &o)| e % o)
            .collect();
        let big = group.orders.iter().fold(1u64, |acc, &o| acc.lcm(&o));
        let order = exponents
            .iter()
            .zip(&group.orders)
            .fold(1u64, |acc, (&e, &o)| acc.lcm(&(o / e.gcd(&o))));
        let shrink = big / order;
        let values: Vec<Option<u64>> = group
            .log_table()
            .into_iter()
            .map(|log| {
                log.map(|ks| {
                    let v = ks
                        .iter()
                        .zip(&exponents)
                        .zip(&group.orders)
                        .map(|((&k, &e), &o)| k * e % o * (big / o))
                        .sum::<u64>()
                        % big;
                    debug_assert_eq!(v % shrink, 0);
                    v / shrink
                })
            })
            .collect();
        let minus_one = (q - 1) as usize % q as usize;
        let parity = match values[minus_one] {
            Some(0) => 1,
            _ => -1,
        };
        let mut chi = DirichletCharacter {
            modulus: q,
            group,
            exponents,
            order,
            values: Arc::new(values),
            conductor: q,
            parity,
        };
        chi.conductor = chi.compute_conductor();
        Ok(chi)
    }

    /// Character with Conrey index n modulo q.
    pub fn from_conrey(q: u64, n: u64) -> Result<Self, CharacterError> {
        if q == 0 {
            return Err(CharacterError::ZeroModulus);
        }
        if n.gcd(&q) != 1 && q != 1 {
            return Err(CharacterError::NotUnit { q, n });
        }
        let group = Arc::new(unit_group(q));
        let log = group.log_table()[(n % q) as usize]
            .clone()
            .ok_or(CharacterError::NotUnit { q, n })?;
        Self::with_group(group, &log)
    }

    pub fn trivial(q: u64) -> Result<Self, CharacterError> {
        let k = unit_group(q.max(1)).orders.len();
        Self::from_exponents(q, &vec![0; k])
    }

    fn compute_conductor(&self) -> u64 {
        let q = self.modulus;
        for f in divisors(q) {
            let factors = (1..q)
                .step_by(f as usize)
                .all(|n| matches!(self.values[n as usize], Some(0) | None));
            if factors {
                return f;
            }
        }
        q
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn unit_group(&self) -> &UnitGroupStructure {
        &self.group
    }

    /// Least k ≥ 1 with χ^k trivial.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// χ(−1) ∈ {+1, −1}.
    pub fn parity(&self) -> i8 {
        self.parity
    }

    pub fn is_even(&self) -> bool {
        self.parity == 1
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn is_quadratic(&self) -> bool {
        self.order == 2
    }

    /// Exponent e with χ(n) = ζ_order^e, or `None` when gcd(n, q) > 1.
    pub fn value_exponent(&self, n: i64) -> Option<u64> {
        self.values[n.rem_euclid(self.modulus as i64) as usize]
    }

    /// χ(n) in ℚ(ζ_order).
    pub fn evaluate(&self, n: i64) -> CyclotomicNumber {
        let d = self.order as usize;
        match self.value_exponent(n) {
            Some(e) => CyclotomicNumber::root_of_unity(e as i64, d),
            None => CyclotomicNumber::zero(d),
        }
    }

    /// The complex conjugate character χ̄.
    pub fn conj(&self) -> Self {
        let exps: Vec<u64> = self
            .exponents
            .iter()
            .zip(&self.group.orders)
            .map(|(&e, &o)| (o - e) % o)
            .collect();
        Self::with_group(self.group.clone(), &exps).expect("same group")
    }

    /// χ^k.
    pub fn pow(&self, k: u64) -> Self {
        let exps: Vec<u64> = self
            .exponents
            .iter()
            .zip(&self.group.orders)
            .map(|(&e, &o)| e * (k % o) % o)
            .collect();
        Self::with_group(self.group.clone(), &exps).expect("same group")
    }

    /// The primitive character modulo the conductor that induces χ.
    pub fn primitive_part(&self) -> Self {
        let f = self.conductor;
        if f == self.modulus {
            return self.clone();
        }
        let group = Arc::new(unit_group(f));
        let d = self.order;
        let exps: Vec<u64> = group
            .generators
            .iter()
            .zip(&group.orders)
            .map(|(&g, &o)| {
                let lift = (0..)
                    .map(|t| g + t * f)
                    .find(|n| n.gcd(&self.modulus) == 1)
                    .expect("a coprime lift exists");
                let v = self.values[(lift % self.modulus) as usize].expect("unit");
                debug_assert_eq!(v * o % d, 0);
                v * o / d
            })
            .collect();
        Self::with_group(group, &exps).expect("exponent count matches")
    }

    /// Conrey index n of this character.
    pub fn conrey_index(&self) -> u64 {
        self.group.element(&self.exponents)
    }

    /// Conrey label "q.n".
    pub fn label(&self) -> String {
        format!("{}.{}", self.modulus, self.conrey_index())
    }

    /// Exponent-vector label "q:[e1,e2,...]".
    pub fn exponent_label(&self) -> String {
        let parts: Vec<String> = self.exponents.iter().map(u64::to_string).collect();
        format!("{}:[{}]", self.modulus, parts.join(","))
    }

    /// τ(χ) = Σ_{n mod q} χ(n) ζ_q^n in ℚ(ζ_{lcm(order, q)}).
    pub fn gauss_sum(&self) -> Result<CyclotomicNumber, CharacterError> {
        if !self.is_primitive() {
            return Err(CharacterError::NotPrimitive(self.label()));
        }
        let q = self.modulus;
        let big = self.order.lcm(&q);
        let mut counts = vec![0i128; big as usize];
        for n in 0..q {
            if let Some(e) = self.values[n as usize] {
                let idx = (e * (big / self.order) + n * (big / q)) % big;
                counts[idx as usize] += 1;
            }
        }
        Ok(CyclotomicNumber::from_exponent_counts(big as usize, &counts, &BigInt::from(1)))
    }

    /// B_{1,χ} = (1/q) Σ_{a=0}^{q−1} χ(a)·a in ℚ(ζ_order).
    pub fn bernoulli_b1(&self) -> Result<CyclotomicNumber, CharacterError> {
        if self.is_trivial() {
            return Err(CharacterError::Trivial(self.label()));
        }
        let d = self.order as usize;
        let mut counts = vec![0i128; d];
        for a in 0..self.modulus {
            if let Some(e) = self.values[a as usize] {
                counts[e as usize] += a as i128;
            }
        }
        Ok(CyclotomicNumber::from_exponent_counts(
            d,
            &counts,
            &BigInt::from(self.modulus),
        ))
    }
}

impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for DirichletCharacter {
    type Err = CharacterError;

    /// Accepts "q.n" (Conrey) or "q:[e1,...]" (exponent vector).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || CharacterError::Parse(s.to_string());
        if let Some((q, rest)) = s.split_once(':') {
            let q: u64 = q.parse().map_err(|_| bad())?;
            let body = rest
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(bad)?;
            let exps = if body.trim().is_empty() {
                Vec::new()
            } else {
                body.split(',')
                    .map(|t| t.trim().parse::<u64>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>, _>>()?
            };
            Self::from_exponents(q, &exps)
        } else if let Some((q, n)) = s.split_once('.') {
            let q: u64 = q.parse().map_err(|_| bad())?;
            let n: u64 = n.parse().map_err(|_| bad())?;
            Self::from_conrey(q, n)
        } else {
            Err(bad())
        }
    }
}

/// All primitive characters mod q, ordered lexicographically by exponent vector.
pub fn enumerate_primitive(q: u64) -> Vec<DirichletCharacter> {
    enumerate_all(q)
        .into_iter()
        .filter(DirichletCharacter::is_primitive)
        .collect()
}

/// All characters mod q, ordered lexicographically by exponent vector.
pub fn enumerate_all(q: u64) -> Vec<DirichletCharacter> {
    let group = Arc::new(unit_group(q));
    let k = group.orders.len();
    let mut out = Vec::new();
    let mut exps = vec![0u64; k];
    loop {
        out.push(DirichletCharacter::with_group(group.clone(), &exps).expect("valid exponents"));
        // last coordinate varies fastest
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            exps[i] += 1;
            if exps[i] < group.orders[i] {
                break;
            }
            exps[i] = 0;
        }
    }
}

/// A validated pair (χ₁, χ₂): both primitive and nontrivial with
/// χ₁(−1)·χ₂(−1) = 1. Holds the conjugate value tables lifted to ℚ(ζ_m),
/// m = lcm(ord χ₁, ord χ₂), as exponents of ζ_m.
#[derive(Clone, Debug)]
pub struct CharacterPair {
    pub chi1: DirichletCharacter,
    pub chi2: DirichletCharacter,
    pub q1: u64,
    pub q2: u64,
    pub m: u64,
    chi1_bar: Arc<Vec<Option<u32>>>,
    chi2_bar: Arc<Vec<Option<u32>>>,
}

fn conj_table(chi: &DirichletCharacter, m: u64) -> Vec<Option<u32>> {
    let step = m / chi.order();
    (0..chi.modulus())
        .map(|n| {
            chi.value_exponent(n as i64)
                .map(|e| ((m - (e * step) % m) % m) as u32)
        })
        .collect()
}

impl CharacterPair {
    pub fn new(chi1: DirichletCharacter, chi2: DirichletCharacter) -> Result<Self, CharacterError> {
        for chi in [&chi1, &chi2] {
            if chi.is_trivial() {
                return Err(CharacterError::Trivial(chi.label()));
            }
            if !chi.is_primitive() {
                return Err(CharacterError::NotPrimitive(chi.label()));
            }
        }
        if chi1.parity() * chi2.parity() != 1 {
            return Err(CharacterError::Parity(chi1.label(), chi2.label()));
        }
        let m = chi1.order().lcm(&chi2.order());
        Ok(CharacterPair {
            q1: chi1.modulus(),
            q2: chi2.modulus(),
            m,
            chi1_bar: Arc::new(conj_table(&chi1, m)),
            chi2_bar: Arc::new(conj_table(&chi2, m)),
            chi1,
            chi2,
        })
    }

    /// Both characters odd.
    pub fn is_odd(&self) -> bool {
        self.chi1.parity() == -1
    }

    pub fn is_quadratic(&self) -> bool {
        self.chi1.is_quadratic() && self.chi2.is_quadratic()
    }

    /// The pair (χ₂, χ₁).
    pub fn swapped(&self) -> Self {
        CharacterPair {
            chi1: self.chi2.clone(),
            chi2: self.chi1.clone(),
            q1: self.q2,
            q2: self.q1,
            m: self.m,
            chi1_bar: self.chi2_bar.clone(),
            chi2_bar: self.chi1_bar.clone(),
        }
    }

    /// Exponent of ζ_m in χ̄₁(n), None when gcd(n, q₁) > 1.
    #[inline]
    pub fn chi1_bar(&self, n: u64) -> Option<u32> {
        self.chi1_bar[(n % self.q1) as usize]
    }

    #[inline]
    pub fn chi2_bar(&self, j: u64) -> Option<u32> {
        self.chi2_bar[(j % self.q2) as usize]
    }

    pub fn chi1_bar_table(&self) -> &[Option<u32>] {
        &self.chi1_bar
    }

    pub fn chi2_bar_table(&self) -> &[Option<u32>] {
        &self.chi2_bar
    }

    /// "q1.n1,q2.n2".
    pub fn label(&self) -> String {
        format!("{},{}", self.chi1.label(), self.chi2.label())
    }
}

/// All valid pairs of primitive nontrivial characters with matching parity.
pub fn valid_pairs(q1: u64, q2: u64) -> Vec<CharacterPair> {
    let left = enumerate_primitive(q1);
    let right = enumerate_primitive(q2);
    let mut out = Vec::new();
    for a in &left {
        for b in &right {
            if let Ok(p) = CharacterPair::new(a.clone(), b.clone()) {
                out.push(p);
            }
        }
    }
    out
}

/// Number of primitive characters mod q via Σ_{d|q} μ(q/d) φ(d).
pub fn primitive_count(q: u64) -> i64 {
    divisors(q)
        .into_iter()
        .map(|d| crate::numtheory::mobius(q / d) * crate::numtheory::euler_phi(d) as i64)
        .sum()
}
