//! SL₂(ℤ) matrices, Γ₀/Γ₁ membership, the reciprocity dual, and right-coset
//! enumeration of Γ₁(N) with Schreier generators.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characters::CharacterPair;
use crate::cyclotomic::CyclotomicNumber;
use crate::numtheory::{factorize, mod_inverse};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModGroupError {
    #[error("determinant of ({a},{b};{c},{d}) is not 1")]
    NotUnimodular { a: i64, b: i64, c: i64, d: i64 },
    #[error("gcd({a}, {c}) ≠ 1")]
    NotCoprime { a: i64, c: i64 },
    #[error("matrix {0} is not in Γ₀({1})")]
    NotInGamma0(SL2Matrix, u64),
    #[error("dual matrix needs c = r·{level} with r ≥ 1, got c = {c}")]
    DualPrecondition { c: i64, level: u64 },
    #[error("coset enumeration needs level N ≥ 3, got {0}")]
    LevelTooSmall(u64),
    #[error("matrix entry overflow")]
    Overflow,
    #[error("malformed matrix literal: {0}")]
    Parse(String),
}

/// Integer 2×2 matrix of determinant 1, (a b; c d).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SL2Matrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

pub const S: SL2Matrix = SL2Matrix { a: 0, b: -1, c: 1, d: 0 };
pub const T: SL2Matrix = SL2Matrix { a: 1, b: 1, c: 0, d: 1 };
pub const IDENTITY: SL2Matrix = SL2Matrix { a: 1, b: 0, c: 0, d: 1 };

impl SL2Matrix {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self, ModGroupError> {
        if a as i128 * d as i128 - b as i128 * c as i128 != 1 {
            return Err(ModGroupError::NotUnimodular { a, b, c, d });
        }
        Ok(SL2Matrix { a, b, c, d })
    }

    pub fn t_power(k: i64) -> Self {
        SL2Matrix { a: 1, b: k, c: 0, d: 1 }
    }

    pub fn try_mul(&self, o: &SL2Matrix) -> Result<SL2Matrix, ModGroupError> {
        let f = |x: i64, y: i64, z: i64, w: i64| -> Result<i64, ModGroupError> {
            i64::try_from(x as i128 * y as i128 + z as i128 * w as i128)
                .map_err(|_| ModGroupError::Overflow)
        };
        Ok(SL2Matrix {
            a: f(self.a, o.a, self.b, o.c)?,
            b: f(self.a, o.b, self.b, o.d)?,
            c: f(self.c, o.a, self.d, o.c)?,
            d: f(self.c, o.b, self.d, o.d)?,
        })
    }

    pub fn inverse(&self) -> SL2Matrix {
        SL2Matrix {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == IDENTITY
    }

    pub fn is_gamma0(&self, n: u64) -> bool {
        self.c.rem_euclid(n as i64) == 0
    }

    pub fn is_gamma1(&self, n: u64) -> bool {
        let n = n as i64;
        self.c.rem_euclid(n) == 0 && self.a.rem_euclid(n) == 1 % n && self.d.rem_euclid(n) == 1 % n
    }

    /// Max absolute entry, a proxy for evaluation cost.
    pub fn height(&self) -> u64 {
        [self.a, self.b, self.c, self.d]
            .iter()
            .map(|x| x.unsigned_abs())
            .max()
            .unwrap_or(0)
    }
}

impl std::ops::Mul for SL2Matrix {
    type Output = SL2Matrix;
    fn mul(self, rhs: SL2Matrix) -> SL2Matrix {
        self.try_mul(&rhs).expect("SL2 entry overflow")
    }
}

impl std::ops::Neg for SL2Matrix {
    type Output = SL2Matrix;
    fn neg(self) -> SL2Matrix {
        SL2Matrix {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }
}

impl fmt::Display for SL2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for SL2Matrix {
    type Err = ModGroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<i64> = s
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|_| ModGroupError::Parse(s.to_string()))?;
        match parts[..] {
            [a, b, c, d] => SL2Matrix::new(a, b, c, d),
            _ => Err(ModGroupError::Parse(s.to_string())),
        }
    }
}

/// Some (a b; c d) in SL₂(ℤ) with the given first column. For c ≠ 0 the
/// choice is the one with 0 ≤ d < |c|.
pub fn complete_column(a: i64, c: i64) -> Result<SL2Matrix, ModGroupError> {
    if a.gcd(&c) != 1 {
        return Err(ModGroupError::NotCoprime { a, c });
    }
    if c == 0 {
        // a = ±1
        return Ok(SL2Matrix { a, b: 0, c: 0, d: a });
    }
    let d = mod_inverse(a, c).expect("coprime");
    let b = (a as i128 * d as i128 - 1) / c as i128;
    SL2Matrix::new(a, b as i64, c, d)
}

/// γ′ = (d, −r; −b·N, a) for γ = (a b; rN d) with r ≥ 1.
pub fn dual_gamma(gamma: &SL2Matrix, level: u64) -> Result<SL2Matrix, ModGroupError> {
    let n = level as i64;
    if gamma.c <= 0 || gamma.c % n != 0 {
        return Err(ModGroupError::DualPrecondition { c: gamma.c, level });
    }
    let r = gamma.c / n;
    let c = gamma.b.checked_mul(n).ok_or(ModGroupError::Overflow)?;
    SL2Matrix::new(gamma.d, -r, -c, gamma.a)
}

/// Exponent k with ψ(γ) = χ₁χ̄₂(d) = ζ_m^k.
pub fn psi_exponent(gamma: &SL2Matrix, pair: &CharacterPair) -> Result<u32, ModGroupError> {
    let level = pair.q1 * pair.q2;
    if !gamma.is_gamma0(level) {
        return Err(ModGroupError::NotInGamma0(*gamma, level));
    }
    let m = pair.m as u32;
    let d = gamma.d.rem_euclid(level as i64) as u64;
    let e1 = pair.chi1_bar(d).expect("d is a unit modulo q1q2");
    let e2 = pair.chi2_bar(d).expect("d is a unit modulo q1q2");
    Ok((m - e1 + e2) % m)
}

/// ψ(γ) = χ₁χ̄₂(d) as an element of ℚ(ζ_m).
pub fn psi(gamma: &SL2Matrix, pair: &CharacterPair) -> Result<CyclotomicNumber, ModGroupError> {
    let k = psi_exponent(gamma, pair)?;
    Ok(CyclotomicNumber::root_of_unity(k as i64, pair.m as usize))
}

/// [SL₂(ℤ) : Γ₁(N)] = N² ∏_{p | N} (1 − 1/p²).
pub fn gamma1_index(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n * n, |acc, (p, _)| acc / (p * p) * (p * p - 1))
}

/// Right cosets Γ₁(N)\SL₂(ℤ), labeled by bottom rows (c, d) mod N.
#[derive(Debug, Clone)]
pub struct CosetTable {
    pub level: u64,
    pub labels: Vec<(u64, u64)>,
    /// label of coset i·S
    pub s_action: Vec<usize>,
    /// label of coset i·T
    pub t_action: Vec<usize>,
    /// short representative of each coset, see [`short_representative`]
    pub reps: Vec<SL2Matrix>,
    lookup: Vec<usize>,
}

impl CosetTable {
    /// Breadth-first enumeration from the identity coset under right
    /// multiplication by S and T. Representatives are chosen afterwards with
    /// entries of size O(N) rather than taken from the BFS tree, whose words
    /// produce much larger matrices.
    pub fn new(level: u64) -> Result<Self, ModGroupError> {
        if level < 3 {
            return Err(ModGroupError::LevelTooSmall(level));
        }
        let n = level;
        let nn = (n * n) as usize;
        let mut lookup = vec![usize::MAX; nn];
        let mut labels = Vec::new();
        let mut s_action = Vec::new();
        let mut t_action = Vec::new();
        let key = |c: u64, d: u64| (c * n + d) as usize;

        lookup[key(0, 1)] = 0;
        labels.push((0, 1));
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let (c, d) = labels[i];
            let neighbours = [(d, (n - c) % n), (c, (c + d) % n)];
            let mut targets = [0usize; 2];
            for (slot, (c2, d2)) in neighbours.into_iter().enumerate() {
                let k = key(c2, d2);
                if lookup[k] == usize::MAX {
                    lookup[k] = labels.len();
                    labels.push((c2, d2));
                    queue.push_back(lookup[k]);
                }
                targets[slot] = lookup[k];
            }
            s_action.push(targets[0]);
            t_action.push(targets[1]);
        }
        let reps = labels
            .iter()
            .map(|&(c, d)| short_representative(n, c, d))
            .collect();
        Ok(CosetTable {
            level,
            labels,
            s_action,
            t_action,
            reps,
            lookup,
        })
    }

    pub fn index(&self) -> usize {
        self.labels.len()
    }

    /// Coset label of an arbitrary matrix.
    pub fn label_of(&self, g: &SL2Matrix) -> usize {
        let n = self.level as i64;
        let c = g.c.rem_euclid(n) as u64;
        let d = g.d.rem_euclid(n) as u64;
        self.lookup[(c * self.level + d) as usize]
    }

    /// rep(i)·g·rep(i·g)^{−1} for every coset i and g ∈ {S, T}, in BFS order,
    /// skipping identities. Any transversal with rep = I on the trivial coset
    /// gives a generating set of Γ₁(N).
    pub fn schreier_generators(&self) -> Result<Vec<SL2Matrix>, ModGroupError> {
        let mut out = Vec::new();
        for i in 0..self.index() {
            for (g, j) in [(S, self.s_action[i]), (T, self.t_action[i])] {
                let h = self.reps[i].try_mul(&g)?.try_mul(&self.reps[j].inverse())?;
                if !h.is_identity() {
                    out.push(h);
                }
            }
        }
        Ok(out)
    }
}

/// A matrix with bottom row ≡ (c, d) mod N and small entries: c is the
/// centered residue (N when it would be 0 and d ≢ ±1), d the residue of
/// least absolute value coprime to c, and a the centered inverse of d mod c.
pub fn short_representative(n: u64, c: u64, d: u64) -> SL2Matrix {
    let n = n as i64;
    let centered = |x: i64| {
        let r = x.rem_euclid(n);
        if 2 * r > n {
            r - n
        } else {
            r
        }
    };
    let d0 = centered(d as i64);
    let mut c = centered(c as i64);
    if c == 0 {
        if d0.abs() == 1 {
            return SL2Matrix { a: d0, b: 0, c: 0, d: d0 };
        }
        c = n;
    }
    // gcd(c, d0, N) = 1, so some d0 + kN is coprime to c
    let d = (0..)
        .flat_map(|k| [d0 + k * n, d0 - k * n])
        .find(|d| d.gcd(&c) == 1)
        .expect("coprime lift exists");
    let m = c.abs();
    let mut a = mod_inverse(d, m).expect("d is a unit mod c");
    if 2 * a > m {
        a -= m;
    }
    let b = (a as i128 * d as i128 - 1) / c as i128;
    SL2Matrix { a, b: b as i64, c, d }
}

pub fn coset_table(level: u64) -> Result<CosetTable, ModGroupError> {
    CosetTable::new(level)
}

pub fn schreier_generators(level: u64) -> Result<Vec<SL2Matrix>, ModGroupError> {
    CosetTable::new(level)?.schreier_generators()
}

/// T^k·γ with |a| minimal (ties to the positive side). Left translation keeps
/// c and d, keeps γ in Γ₁(N) and does not change the sum value.
pub fn reduce_generator(gamma: &SL2Matrix) -> SL2Matrix {
    let c = gamma.c;
    if c == 0 {
        return *gamma;
    }
    let cabs = c.abs() as i128;
    let mut a = (gamma.a as i128).rem_euclid(cabs);
    if 2 * a > cabs {
        a -= cabs;
    }
    let k = (a - gamma.a as i128) / c as i128;
    let b = gamma.b as i128 + k * gamma.d as i128;
    SL2Matrix {
        a: a as i64,
        b: b as i64,
        c,
        d: gamma.d,
    }
}

/// Random element of Γ₀(N) with c = ±r·N, 1 ≤ r ≤ max_r, and a drawn
/// from [−max_a, max_a] coprime to c, randomized on the right by T^k.
pub fn random_gamma0<R: Rng + ?Sized>(rng: &mut R, level: u64, max_r: u64, max_a: i64) -> SL2Matrix {
    let n = level as i64;
    loop {
        let r = rng.gen_range(1..=max_r as i64);
        let c = r * n;
        let a = rng.gen_range(-max_a..=max_a);
        if a.gcd(&c) != 1 {
            continue;
        }
        let g = complete_column(a, c).expect("coprime");
        let k = rng.gen_range(-3..=3);
        let g = g * SL2Matrix::t_power(k);
        return if rng.gen_bool(0.5) { g } else { -g };
    }
}

/// Random element of Γ₁(N) with c = r·N, a = 1 + s·N.
pub fn random_gamma1<R: Rng + ?Sized>(rng: &mut R, level: u64, max_r: u64, max_s: i64) -> SL2Matrix {
    let n = level as i64;
    loop {
        let r = rng.gen_range(1..=max_r as i64);
        let c = r * n;
        let a = 1 + rng.gen_range(-max_s..=max_s) * n;
        if a.gcd(&c) != 1 {
            continue;
        }
        // d ≡ a^{-1} (mod c) and a ≡ 1 (mod N) force d ≡ 1 (mod N)
        let g = complete_column(a, c).expect("coprime");
        let k = rng.gen_range(-3..=3);
        return g * SL2Matrix::t_power(k);
    }
}
