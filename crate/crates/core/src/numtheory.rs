//! Elementary exact number theory: sawtooth and fractional parts, the floor-sum
//! closed form, unit-group structure of ℤ/q, and class numbers of imaginary
//! quadratic fields by reduced-form counting.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumTheoryError {
    #[error("class number requires squarefree q ≡ 3 (mod 4) with q > 4, got {0}")]
    ClassNumberPrecondition(u64),
    #[error("floor sum requires positive a and N, got a = {a}, N = {n}")]
    FloorSumPrecondition { a: u64, n: u64 },
}

/// Prime factorization by trial division, ascending primes.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, k) in factorize(n) {
        let base = divs.clone();
        let mut pk = 1;
        for _ in 0..k {
            pk *= p;
            divs.extend(base.iter().map(|d| d * pk));
        }
    }
    divs.sort_unstable();
    divs
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, k)| k > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn is_squarefree(n: u64) -> bool {
    factorize(n).iter().all(|&(_, k)| k == 1)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Extended gcd: returns (g, x, y) with a·x + b·y = g ≥ 0.
pub fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Inverse of a modulo m in [0, m), if it exists.
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let m = m.abs();
    if m == 1 {
        return Some(0);
    }
    let (g, x, _) = egcd(a.rem_euclid(m), m);
    (g == 1).then(|| x.rem_euclid(m))
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let m128 = m as u128;
    let mut result = 1u128 % m128;
    let mut b = base as u128 % m128;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    result as u64
}

/// Multiplicative order of a unit a modulo m.
pub fn multiplicative_order(a: u64, m: u64) -> u64 {
    let phi = euler_phi(m);
    let mut order = phi;
    for (p, _) in factorize(phi) {
        while order % p == 0 && pow_mod(a, order / p, m) == 1 {
            order /= p;
        }
    }
    order
}

/// B₁(x): 0 on integers, x − ⌊x⌋ − 1/2 otherwise.
pub fn sawtooth(x: &BigRational) -> BigRational {
    if x.is_integer() {
        BigRational::zero()
    } else {
        fractional(x) - BigRational::new(BigInt::one(), BigInt::from(2))
    }
}

/// {x} = x − ⌊x⌋ ∈ [0, 1).
pub fn fractional(x: &BigRational) -> BigRational {
    x - x.floor()
}

/// Closed form for Σ_{k=0}^{N−1} ⌊(x + a·k)/N⌋ with d = gcd(a, N):
/// d·⌊x/d⌋ + (a−1)(N−1)/2 + (d−1)/2.
pub fn floor_sum(x: &BigRational, a: u64, n: u64) -> Result<BigRational, NumTheoryError> {
    if a == 0 || n == 0 {
        return Err(NumTheoryError::FloorSumPrecondition { a, n });
    }
    let d = a.gcd(&n);
    let dq = BigRational::from_integer(d.into());
    let head = (x / &dq).floor() * &dq;
    let tail = BigRational::new(
        BigInt::from(a - 1) * BigInt::from(n - 1) + BigInt::from(d - 1),
        BigInt::from(2),
    );
    Ok(head + tail)
}

/// Structure of (ℤ/q)^× as a product of cyclic groups.
///
/// Generators are CRT lifts, one cyclic factor per odd prime power (a primitive
/// root) and up to two for the 2-part (−1, then 5 when 8 | q). The primitive
/// root for p^k is the least g that is a primitive root modulo p², which is a
/// primitive root modulo every power of p; this matches the Conrey labeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitGroupStructure {
    pub modulus: u64,
    pub generators: Vec<u64>,
    pub orders: Vec<u64>,
    /// Prime-power modulus each factor lives on.
    pub components: Vec<u64>,
}

impl UnitGroupStructure {
    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Unit corresponding to an exponent vector.
    pub fn element(&self, exponents: &[u64]) -> u64 {
        let q = self.modulus;
        self.generators
            .iter()
            .zip(exponents)
            .fold(1 % q, |acc, (&g, &e)| {
                ((acc as u128 * pow_mod(g, e, q) as u128) % q as u128) as u64
            })
    }

    /// Discrete logarithm table: entry n holds the exponent vector of n, or
    /// `None` for non-units.
    pub fn log_table(&self) -> Vec<Option<Vec<u64>>> {
        let q = self.modulus as usize;
        let mut table = vec![None; q.max(1)];
        let k = self.orders.len();
        let mut exps = vec![0u64; k];
        loop {
            let n = self.element(&exps) as usize;
            table[n] = Some(exps.clone());
            let mut i = 0;
            loop {
                if i == k {
                    return table;
                }
                exps[i] += 1;
                if exps[i] < self.orders[i] {
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
        }
    }
}

fn is_primitive_root(g: u64, m: u64) -> bool {
    g.gcd(&m) == 1 && multiplicative_order(g, m) == euler_phi(m)
}

fn crt_lift(residue: u64, pk: u64, q: u64) -> u64 {
    let rest = q / pk;
    if rest == 1 {
        return residue % pk;
    }
    // x ≡ residue (mod pk), x ≡ 1 (mod rest)
    let inv = mod_inverse(rest as i64, pk as i64).expect("coprime components") as i128;
    let r = residue as i128;
    let t = ((r - 1).rem_euclid(pk as i128) * inv).rem_euclid(pk as i128);
    (1 + rest as i128 * t).rem_euclid(q as i128) as u64
}

pub fn unit_group(q: u64) -> UnitGroupStructure {
    assert!(q >= 1, "modulus must be positive");
    let mut generators = Vec::new();
    let mut orders = Vec::new();
    let mut components = Vec::new();
    for (p, k) in factorize(q) {
        let pk = p.pow(k);
        if p == 2 {
            if k >= 2 {
                generators.push(crt_lift(pk - 1, pk, q));
                orders.push(2);
                components.push(pk);
            }
            if k >= 3 {
                generators.push(crt_lift(5, pk, q));
                orders.push(pk / 4);
                components.push(pk);
            }
        } else {
            let p2 = p * p;
            let g = (2..p2)
                .find(|&g| is_primitive_root(g, p2))
                .expect("odd prime powers have primitive roots");
            generators.push(crt_lift(g % pk, pk, q));
            orders.push(pk / p * (p - 1));
            components.push(pk);
        }
    }
    UnitGroupStructure {
        modulus: q,
        generators,
        orders,
        components,
    }
}

/// h(−q) for squarefree q ≡ 3 (mod 4), q > 4, by counting reduced forms
/// (a, b, c) with b² − 4ac = −q, |b| ≤ a ≤ c, and b ≥ 0 when |b| = a or a = c.
pub fn class_number(q: u64) -> Result<u64, NumTheoryError> {
    if q <= 4 || q % 4 != 3 || !is_squarefree(q) {
        return Err(NumTheoryError::ClassNumberPrecondition(q));
    }
    let q = q as i64;
    let mut count = 0;
    let mut a = 1i64;
    while 3 * a * a <= q {
        for b in -a..=a {
            let num = b * b + q;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a {
                continue;
            }
            if (b.abs() == a || a == c) && b < 0 {
                continue;
            }
            count += 1;
        }
        a += 1;
    }
    Ok(count)
}
