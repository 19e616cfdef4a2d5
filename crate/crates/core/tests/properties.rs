use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dedesum::characters::enumerate_all;
use dedesum::cyclotomic::field;
use dedesum::lattice::{hnf, image_lattice, ImageMode, ImageOptions, IntegerLattice};
use dedesum::modgroup::random_gamma0;
use dedesum::numtheory::sawtooth;
use dedesum::{CyclotomicNumber, DedekindContext, SL2Matrix};

const MODULI: [usize; 8] = [2, 3, 4, 5, 7, 8, 12, 15];

fn element(m: usize) -> impl Strategy<Value = CyclotomicNumber> {
    let degree = field(m).degree;
    prop::collection::vec((-20i64..=20, 1i64..=6), degree).prop_map(move |c| {
        let coeffs = c.into_iter().map(|(n, d)| BigRational::new(n.into(), d.into())).collect();
        CyclotomicNumber::from_coeffs(m, coeffs)
    })
}

fn triple() -> impl Strategy<Value = (CyclotomicNumber, CyclotomicNumber, CyclotomicNumber)> {
    prop::sample::select(MODULI.to_vec()).prop_flat_map(|m| (element(m), element(m), element(m)))
}

fn close(x: (f64, f64), y: (f64, f64)) -> bool {
    let scale = 1.0 + x.0.abs().max(x.1.abs());
    (x.0 - y.0).abs() < 1e-8 * scale && (x.1 - y.1).abs() < 1e-8 * scale
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

proptest! {
    #[test]
    fn field_axioms((x, y, z) in triple()) {
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&(&x - &y) + &y, x.clone());
        if !x.is_zero() {
            prop_assert_eq!(&x * &x.try_inv().unwrap(), CyclotomicNumber::one(x.modulus()));
        }
    }

    #[test]
    fn complex_embedding_is_a_ring_map((x, y, _z) in triple()) {
        let (a, b) = (x.to_complex(), y.to_complex());
        prop_assert!(close((&x * &y).to_complex(), (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)));
        prop_assert!(close((&x + &y).to_complex(), (a.0 + b.0, a.1 + b.1)));
        prop_assert!(close(x.conjugate().to_complex(), (a.0, -a.1)));
    }

    #[test]
    fn conjugation_is_an_involutive_automorphism((x, y, _z) in triple()) {
        prop_assert_eq!(x.conjugate().conjugate(), x.clone());
        prop_assert_eq!((&x * &y).conjugate(), &x.conjugate() * &y.conjugate());
        prop_assert_eq!((&x + &y).conjugate(), &x.conjugate() + &y.conjugate());
    }

    #[test]
    fn denominator_is_minimal((x, _y, _z) in triple()) {
        let d = x.denominator();
        prop_assert!(x.scale(&BigRational::from_integer(d.clone())).is_integral());
        for p in [2u32, 3, 5] {
            let p = BigInt::from(p);
            if d.is_multiple_of(&p) {
                prop_assert!(!x.scale(&BigRational::from_integer(&d / &p)).is_integral());
            }
        }
    }

    #[test]
    fn lift_and_restrict_round_trip(x in element(4), k in 1usize..=3) {
        let big = x.lift(4 * k).unwrap();
        prop_assert!(close(big.to_complex(), x.to_complex()));
        prop_assert_eq!(big.restrict(4).unwrap(), x);
    }

    #[test]
    fn sawtooth_distribution(num in -500i64..500, den in 1i64..40, n in 1i64..12) {
        // Σ_{j<n} B₁(x + j/n) = B₁(n·x)
        let x = rat(num, den);
        let lhs = (0..n).fold(BigRational::zero(), |acc, j| acc + sawtooth(&(&x + rat(j, n))));
        prop_assert_eq!(lhs, sawtooth(&(&x * rat(n, 1))));
        prop_assert_eq!(sawtooth(&-x.clone()), -sawtooth(&x));
        prop_assert_eq!(sawtooth(&(&x + rat(3, 1))), sawtooth(&x));
    }

    #[test]
    fn characters_are_multiplicative_and_periodic(q in 3u64..60, i in 0usize..64, m in -200i64..200, n in -200i64..200) {
        let chars = enumerate_all(q);
        let chi = &chars[i % chars.len()];
        prop_assert_eq!(chi.evaluate(m * n), &chi.evaluate(m) * &chi.evaluate(n));
        prop_assert_eq!(chi.evaluate(m + q as i64), chi.evaluate(m));
        prop_assert_eq!(chi.evaluate(m).is_zero(), m.gcd(&(q as i64)) != 1);
        let v = chi.evaluate(m);
        if !v.is_zero() {
            prop_assert_eq!(&v * &v.conjugate(), CyclotomicNumber::one(v.modulus()));
        }
    }

    #[test]
    fn hnf_is_idempotent_order_free_and_spans(
        rows in prop::collection::vec(prop::collection::vec(-30i64..30, 4), 1..7),
        rot in 0usize..7,
    ) {
        let rows: Vec<Vec<BigInt>> = rows.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
        let h = hnf(&rows);
        prop_assert_eq!(hnf(&h), h.clone());
        let mut shuffled = rows.clone();
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        prop_assert_eq!(hnf(&shuffled), h.clone());
        // each input row lies in the span of the form and vice versa
        let with_row = |extra: &[Vec<BigInt>]| {
            let mut v = h.clone();
            v.extend_from_slice(extra);
            hnf(&v)
        };
        prop_assert_eq!(with_row(&rows), h.clone());
    }

    #[test]
    fn lattice_contains_its_generators(vals in prop::collection::vec(element(3), 1..5), mult in -3i64..3) {
        let lat = IntegerLattice::from_values(3, &vals).unwrap();
        for v in &vals {
            prop_assert!(lat.contains(v));
        }
        let combo = vals.iter().fold(CyclotomicNumber::zero(3), |acc, v| &acc + &v.scale(&rat(mult, 1)));
        prop_assert!(lat.contains(&combo));
    }
}

fn contexts() -> &'static [DedekindContext] {
    static CTX: OnceLock<Vec<DedekindContext>> = OnceLock::new();
    CTX.get_or_init(|| {
        [("3.2", "7.6"), ("5.4", "8.5"), ("5.2", "5.3"), ("4.3", "3.2"), ("7.3", "5.2")]
            .iter()
            .map(|(a, b)| DedekindContext::from_labels(a, b).unwrap())
            .collect()
    })
}

proptest! {
    #[test]
    fn sum_invariances(i in 0usize..5, seed in any::<u64>(), k in -50i64..50) {
        let ctx = &contexts()[i];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_gamma0(&mut rng, ctx.level(), 4, 4 * ctx.level() as i64);
        let s = ctx.eval(&g).unwrap();
        prop_assert_eq!(ctx.eval(&(g * SL2Matrix::t_power(k))).unwrap(), s.clone());
        prop_assert_eq!(ctx.eval(&(SL2Matrix::t_power(k) * g)).unwrap(), s.clone());
        prop_assert_eq!(ctx.eval(&-g).unwrap(), s);
    }

    #[test]
    fn formulas_agree(i in 0usize..5, r in 1i64..6, a in -2000i64..2000) {
        let ctx = &contexts()[i];
        let c = r * ctx.level() as i64;
        prop_assume!(a.gcd(&c) == 1);
        let b = ctx.eval_bernoulli(a, c).unwrap();
        prop_assert_eq!(ctx.eval_fractional(a, c).unwrap(), b.clone());
        prop_assert_eq!(ctx.eval_floor(a, c).unwrap(), b);
    }
}

fn exact_small() -> &'static IntegerLattice {
    static EXACT: OnceLock<IntegerLattice> = OnceLock::new();
    EXACT.get_or_init(|| {
        let ctx = DedekindContext::from_labels("5.4", "7.2").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        image_lattice(&ctx, &ImageOptions::default(), &mut rng).unwrap().lattice()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn sampled_image_is_inside_exact_image(seed in any::<u64>()) {
        let ctx = DedekindContext::from_labels("5.4", "7.2").unwrap();
        let opts = ImageOptions { mode: ImageMode::Sampled, samples: 40, ..ImageOptions::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sampled = image_lattice(&ctx, &opts, &mut rng).unwrap().lattice();
        prop_assert!(sampled.is_sublattice(exact_small()));
    }
}

#[test]
fn exact_image_of_a_cubic_pair() {
    let two = IntegerLattice::scaled_ring(&rat(2, 1), 6);
    assert!(exact_small().equals(&two));
    assert!(!exact_small().contains(&CyclotomicNumber::one(6)));
}
