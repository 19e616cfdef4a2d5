//! ℤ-lattices inside ℚ(ζ_m) in Hermite normal form, and the image lattice
//! S(Γ₁(q₁q₂)) of a newform Dedekind sum.
//!
//! Because S restricted to Γ₁(q₁q₂) is a group homomorphism, its image is the
//! ℤ-span of its values on any generating set; the exact mode evaluates S on
//! every Schreier generator of Γ₁(q₁q₂).

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cyclotomic::{field, CyclotomicError, CyclotomicNumber};
use crate::dedekind::{DedekindContext, DedekindError};
use crate::modgroup::{random_gamma1, reduce_generator, CosetTable, ModGroupError, SL2Matrix};

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error(transparent)]
    Cyclotomic(#[from] CyclotomicError),
    #[error(transparent)]
    Dedekind(#[from] DedekindError),
    #[error(transparent)]
    ModGroup(#[from] ModGroupError),
}

/// Row Hermite normal form of the row span: pivots positive, entries above a
/// pivot reduced into [0, pivot), zero rows dropped.
pub fn hnf(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut mat: Vec<Vec<BigInt>> = rows
        .iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .cloned()
        .collect();
    let Some(cols) = mat.first().map(Vec::len) else {
        return Vec::new();
    };
    let mut prow = 0;
    for col in 0..cols {
        if prow == mat.len() {
            break;
        }
        loop {
            // smallest nonzero entry in this column at or below prow
            let best = (prow..mat.len())
                .filter(|&r| !mat[r][col].is_zero())
                .min_by(|&x, &y| mat[x][col].abs().cmp(&mat[y][col].abs()));
            let Some(best) = best else { break };
            mat.swap(prow, best);
            let mut done = true;
            for r in prow + 1..mat.len() {
                if mat[r][col].is_zero() {
                    continue;
                }
                let q = mat[r][col].div_floor(&mat[prow][col]);
                let (top, rest) = mat.split_at_mut(r);
                sub_multiple(&mut rest[0], &top[prow], &q);
                if !rest[0][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if prow < mat.len() && !mat[prow][col].is_zero() {
            if mat[prow][col].is_negative() {
                for x in mat[prow].iter_mut() {
                    *x = -&*x;
                }
            }
            for r in 0..prow {
                let q = mat[r][col].div_floor(&mat[prow][col]);
                if !q.is_zero() {
                    let (top, rest) = mat.split_at_mut(prow);
                    sub_multiple(&mut top[r], &rest[0], &q);
                }
            }
            prow += 1;
        }
    }
    mat.truncate(prow);
    mat
}

fn sub_multiple(target: &mut [BigInt], src: &[BigInt], q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for (t, s) in target.iter_mut().zip(src) {
        if !s.is_zero() {
            *t -= q * s;
        }
    }
}

fn pivot_col(row: &[BigInt]) -> usize {
    row.iter().position(|x| !x.is_zero()).expect("HNF rows are nonzero")
}

/// The lattice (1/D)·(row span of `basis`) in power-basis coordinates of ℚ(ζ_m).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerLattice {
    modulus: usize,
    denominator: BigInt,
    basis: Vec<Vec<BigInt>>,
}

impl IntegerLattice {
    fn normalized(modulus: usize, denominator: BigInt, rows: &[Vec<BigInt>]) -> Self {
        let basis = hnf(rows);
        let g = basis
            .iter()
            .flatten()
            .fold(denominator.clone(), |acc, x| acc.gcd(x));
        let (denominator, basis) = if g.is_one() || g.is_zero() {
            (denominator, basis)
        } else {
            (
                &denominator / &g,
                basis
                    .into_iter()
                    .map(|r| r.into_iter().map(|x| x / &g).collect())
                    .collect(),
            )
        };
        IntegerLattice {
            modulus,
            denominator,
            basis,
        }
    }

    /// ℤ-span of the given values of ℚ(ζ_m).
    pub fn from_values(modulus: usize, values: &[CyclotomicNumber]) -> Result<Self, LatticeError> {
        for v in values {
            if v.modulus() != modulus {
                return Err(CyclotomicError::ModulusMismatch {
                    left: modulus,
                    right: v.modulus(),
                }
                .into());
            }
        }
        let den = values
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(&v.denominator()));
        let mut rows: Vec<Vec<BigInt>> = values
            .iter()
            .map(|v| scaled_row(v, &den))
            .filter(|r| r.iter().any(|x| !x.is_zero()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        // fold in chunks so the working matrix stays small
        let mut basis: Vec<Vec<BigInt>> = Vec::new();
        while !rows.is_empty() {
            let take = rows.len().min(64);
            let mut chunk: Vec<Vec<BigInt>> = rows.drain(..take).collect();
            chunk.extend(basis);
            basis = hnf(&chunk);
        }
        Ok(Self::normalized(modulus, den, &basis))
    }

    /// s·ℤ[ζ_m].
    pub fn scaled_ring(s: &BigRational, modulus: usize) -> Self {
        let n = field(modulus).degree;
        let rows: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let mut r = vec![BigInt::zero(); n];
                r[i] = s.numer().clone();
                r
            })
            .collect();
        Self::normalized(modulus, s.denom().clone(), &rows)
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_rank(&self) -> usize {
        field(self.modulus).degree
    }

    /// Basis vectors as field elements.
    pub fn generators(&self) -> Vec<CyclotomicNumber> {
        self.basis
            .iter()
            .map(|row| {
                CyclotomicNumber::from_coeffs(
                    self.modulus,
                    row.iter()
                        .map(|x| BigRational::new(x.clone(), self.denominator.clone()))
                        .collect(),
                )
            })
            .collect()
    }

    /// Whether x lies in the lattice: D·x must be an integer vector in the row span.
    pub fn contains(&self, x: &CyclotomicNumber) -> bool {
        if x.modulus() != self.modulus {
            return false;
        }
        let mut v = Vec::with_capacity(x.degree());
        for c in x.coordinates() {
            let s = c * BigRational::from_integer(self.denominator.clone());
            if !s.is_integer() {
                return false;
            }
            v.push(s.to_integer());
        }
        for row in &self.basis {
            let p = pivot_col(row);
            if v[..p].iter().any(|x| !x.is_zero()) {
                return false;
            }
            let (q, r) = v[p].div_rem(&row[p]);
            if !r.is_zero() {
                return false;
            }
            sub_multiple(&mut v, row, &q);
        }
        v.iter().all(Zero::is_zero)
    }

    /// self ⊆ other.
    pub fn is_sublattice(&self, other: &IntegerLattice) -> bool {
        self.modulus == other.modulus && self.generators().iter().all(|g| other.contains(g))
    }

    pub fn equals(&self, other: &IntegerLattice) -> bool {
        self.is_sublattice(other) && other.is_sublattice(self)
    }

    /// s when the lattice is exactly s·ℤ[ζ_m] for a positive rational s.
    pub fn ring_multiple(&self) -> Option<BigRational> {
        let n = self.ambient_rank();
        if self.rank() != n {
            return None;
        }
        let s = &self.basis[0][0];
        let diagonal = self.basis.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, x)| if i == j { x == s } else { x.is_zero() })
        });
        diagonal.then(|| BigRational::new(s.clone(), self.denominator.clone()))
    }

    /// "2ℤ", "2ℤ[i]", "(1/3)ℤ[ω]", "2ℤ[ζ_12]", or an explicit basis.
    pub fn describe(&self) -> String {
        if self.rank() == 0 {
            return "0".to_string();
        }
        let ring = ring_name(self.modulus);
        match self.ring_multiple() {
            Some(s) if s.is_one() => ring,
            Some(s) if s.is_integer() => format!("{s}{ring}"),
            Some(s) => format!("({s}){ring}"),
            None => {
                let gens: Vec<String> = self.generators().iter().map(|g| g.to_string()).collect();
                format!("span{{{}}}", gens.join("; "))
            }
        }
    }
}

/// ℤ[ζ_m] written the usual way: ℤ, ℤ[ω], ℤ[i], ℤ[ζ_m].
pub fn ring_name(m: usize) -> String {
    match m {
        1 | 2 => "ℤ".to_string(),
        3 | 6 => "ℤ[ω]".to_string(),
        4 => "ℤ[i]".to_string(),
        m => format!("ℤ[ζ_{m}]"),
    }
}

/// ℚ(ζ_m) written the usual way: ℚ, ℚ(ω), ℚ(i), ℚ(ζ_m).
pub fn field_name(m: usize) -> String {
    match m {
        1 | 2 => "ℚ".to_string(),
        3 | 6 => "ℚ(ω)".to_string(),
        4 => "ℚ(i)".to_string(),
        m => format!("ℚ(ζ_{m})"),
    }
}

fn scaled_row(v: &CyclotomicNumber, den: &BigInt) -> Vec<BigInt> {
    v.coordinates()
        .iter()
        .map(|c| (c * BigRational::from_integer(den.clone())).to_integer())
        .collect()
}

pub fn lattice_from_values(modulus: usize, values: &[CyclotomicNumber]) -> Result<IntegerLattice, LatticeError> {
    IntegerLattice::from_values(modulus, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageMode {
    /// every Schreier generator of Γ₁(q₁q₂)
    Exact,
    /// random elements of Γ₁(q₁q₂); a sublattice of the image
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    /// image = 2·ℤ[ζ_m]
    pub two_conj: bool,
    /// image ⊆ (1/gcd(q₁,q₂))·ℤ[ζ_m]
    pub thm16: bool,
    /// image ⊆ ℤ[ζ_m]
    pub integral: bool,
    /// rank = φ(m)
    pub full_rank: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Timings {
    pub cosets_ms: u128,
    pub evaluation_ms: u128,
    pub lattice_ms: u128,
    /// largest |c| among evaluated generators
    pub max_c: u64,
}

/// Result of an image computation, serializable as the JSON report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ImageReport {
    pub pair: String,
    pub mode: ImageMode,
    pub q1: u64,
    pub q2: u64,
    /// index m of the ambient field ℚ(ζ_m)
    pub field: usize,
    pub degree: usize,
    pub generators: usize,
    pub skipped: usize,
    #[serde(rename = "D")]
    pub denominator: String,
    pub basis: Vec<Vec<String>>,
    pub rank: usize,
    pub image: String,
    pub verdicts: Verdicts,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings: Option<Timings>,
}

impl ImageReport {
    pub fn lattice(&self) -> IntegerLattice {
        let rows: Vec<Vec<BigInt>> = self
            .basis
            .iter()
            .map(|r| r.iter().map(|x| x.parse().expect("integer entry")).collect())
            .collect();
        IntegerLattice {
            modulus: self.field,
            denominator: self.denominator.parse().expect("integer denominator"),
            basis: rows,
        }
    }
}

/// Options for [`image_lattice`].
#[derive(Debug, Clone, Copy)]
pub struct ImageOptions {
    pub mode: ImageMode,
    pub samples: usize,
    /// sampled mode only: skip elements with |c| above this bound
    pub max_c: Option<u64>,
    pub record_timings: bool,
}

impl Default for ImageOptions {
    fn default() -> Self {
        ImageOptions {
            mode: ImageMode::Exact,
            samples: 200,
            max_c: None,
            record_timings: false,
        }
    }
}

/// The generators S is evaluated on in exact mode, after left translation.
pub fn exact_generators(level: u64) -> Result<Vec<SL2Matrix>, LatticeError> {
    let table = CosetTable::new(level)?;
    Ok(table
        .schreier_generators()?
        .iter()
        .map(reduce_generator)
        .collect())
}

/// Compute S(Γ₁(q₁q₂)) (exact) or a sampled sublattice of it. Evaluations run
/// on the current rayon pool; the result does not depend on its size.
pub fn image_lattice<R: Rng + ?Sized>(
    ctx: &DedekindContext,
    options: &ImageOptions,
    rng: &mut R,
) -> Result<ImageReport, LatticeError> {
    let level = ctx.level();
    let m = ctx.modulus();
    let started = Instant::now();
    let (gens, skipped) = match options.mode {
        ImageMode::Exact => (exact_generators(level)?, 0),
        ImageMode::Sampled => {
            let mut kept = Vec::with_capacity(options.samples);
            let mut skipped = 0;
            for _ in 0..options.samples {
                let g = reduce_generator(&random_gamma1(rng, level, 6, 6));
                match options.max_c {
                    Some(bound) if g.c.unsigned_abs() > bound => skipped += 1,
                    _ => kept.push(g),
                }
            }
            (kept, skipped)
        }
    };
    let cosets_ms = started.elapsed().as_millis();
    let started = Instant::now();
    let values: Vec<CyclotomicNumber> = gens
        .par_iter()
        .map(|g| ctx.eval(g))
        .collect::<Result<_, _>>()?;
    let evaluation_ms = started.elapsed().as_millis();
    let started = Instant::now();
    let lattice = IntegerLattice::from_values(m, &values)?;
    let lattice_ms = started.elapsed().as_millis();

    let (q1, q2) = (ctx.pair().q1, ctx.pair().q2);
    let g = q1.gcd(&q2);
    let bound = IntegerLattice::scaled_ring(&BigRational::new(BigInt::one(), BigInt::from(g)), m);
    let two = IntegerLattice::scaled_ring(&BigRational::from_integer(BigInt::from(2)), m);
    let ring = IntegerLattice::scaled_ring(&BigRational::one(), m);
    let verdicts = Verdicts {
        two_conj: lattice.equals(&two),
        thm16: lattice.is_sublattice(&bound),
        integral: lattice.is_sublattice(&ring),
        full_rank: lattice.rank() == lattice.ambient_rank(),
    };
    let timings = options.record_timings.then(|| Timings {
        cosets_ms,
        evaluation_ms,
        lattice_ms,
        max_c: gens.iter().map(|g| g.c.unsigned_abs()).max().unwrap_or(0),
    });
    Ok(ImageReport {
        pair: ctx.pair().label(),
        mode: options.mode,
        q1,
        q2,
        field: m,
        degree: lattice.ambient_rank(),
        generators: gens.len(),
        skipped,
        denominator: lattice.denominator().to_string(),
        basis: lattice
            .basis()
            .iter()
            .map(|r| r.iter().map(BigInt::to_string).collect())
            .collect(),
        rank: lattice.rank(),
        image: lattice.describe(),
        verdicts,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn hnf_examples() {
        let h = hnf(&[row(&[2, 0]), row(&[0, 2]), row(&[4, 2])]);
        assert_eq!(h, vec![row(&[2, 0]), row(&[0, 2])]);
        let id = vec![row(&[1, 0, 0]), row(&[0, 1, 0]), row(&[0, 0, 1])];
        assert_eq!(hnf(&id), id);
        assert!(hnf(&[row(&[0, 0, 0])]).is_empty());
        let h = hnf(&[row(&[3, 5]), row(&[1, 7])]);
        // determinant 16, pivot 1 in the first column
        assert_eq!(h, vec![row(&[1, 7]), row(&[0, 16])]);
        let h = hnf(&[row(&[2, 3]), row(&[4, 6])]);
        assert_eq!(h, vec![row(&[2, 3])]);
        let h = hnf(&[row(&[-2, 5])]);
        assert_eq!(h, vec![row(&[2, -5])]);
    }

    #[test]
    fn lattices_from_values() {
        let two = CyclotomicNumber::from_integer(2, 3);
        let two_omega = CyclotomicNumber::root_of_unity(1, 3).scale(&q(2, 1));
        let l = IntegerLattice::from_values(3, &[two.clone(), two_omega.clone()]).unwrap();
        assert!(l.equals(&IntegerLattice::scaled_ring(&q(2, 1), 3)));
        assert_eq!(l.describe(), "2ℤ[ω]");
        assert!(l.contains(&two_omega));
        let third = IntegerLattice::from_values(1, &[CyclotomicNumber::from_rational(q(1, 3), 1)]).unwrap();
        assert_eq!(third.denominator(), &BigInt::from(3));
        assert_eq!(third.basis(), &[row(&[1])]);
        let z = IntegerLattice::from_values(
            1,
            &[CyclotomicNumber::from_integer(2, 1), CyclotomicNumber::from_integer(3, 1)],
        )
        .unwrap();
        assert_eq!(z.describe(), "ℤ");
        assert!(IntegerLattice::from_values(4, &[two]).is_err());
    }

    #[test]
    fn containment() {
        let two_z = IntegerLattice::scaled_ring(&q(2, 1), 1);
        assert!(!two_z.contains(&CyclotomicNumber::from_integer(3, 1)));
        assert!(two_z.contains(&CyclotomicNumber::from_integer(-4, 1)));
        let z = IntegerLattice::scaled_ring(&q(1, 1), 1);
        let third = IntegerLattice::scaled_ring(&q(1, 3), 1);
        assert!(z.is_sublattice(&third));
        assert!(!z.equals(&third));
        assert!(!third.is_sublattice(&z));
    }

    #[test]
    fn scaled_ring_two_ways() {
        for m in [4usize, 5, 12] {
            let s = q(3, 2);
            let direct = IntegerLattice::scaled_ring(&s, m);
            let vals: Vec<_> = (0..m as i64)
                .map(|k| CyclotomicNumber::root_of_unity(k, m).scale(&s))
                .collect();
            let spanned = IntegerLattice::from_values(m, &vals).unwrap();
            assert_eq!(direct, spanned);
        }
    }
}
