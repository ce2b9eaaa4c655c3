//! Algebraic invariants checked on random inputs.

use iwasawa_core::duality::{dual_map, random_matrix, random_unimodular, FreeModuleMap};
use iwasawa_core::linalg::{mat_mul, smith_form};
use iwasawa_core::padic::{pexp, plog, PrecisionContext};
use iwasawa_core::series::{grouplike, omega_sub_unit};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 3] = [3, 5, 7];

fn ctx(p: u64, trunc: usize) -> PrecisionContext {
    PrecisionContext::new(p, 16, trunc).unwrap()
}

fn coprime(p: u64, n: i128) -> bool {
    n.rem_euclid(p as i128) != 0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms(pi in 0..3usize, a in -10_000i128..10_000, b in -10_000i128..10_000, d in 1i128..200) {
        let p = PRIMES[pi];
        let c = ctx(p, 4);
        let (x, y) = (c.int(a), c.int(b));
        let z = c.ratio(a + 1, d).unwrap();
        prop_assert!((x + y).agrees_with(&c.int(a + b), 16));
        prop_assert!((x * y).agrees_with(&c.int(a * b), 16));
        prop_assert!(((x * y) * z).agrees_with(&(x * (y * z)), 12));
        prop_assert!((x * (y + z)).agrees_with(&(x * y + x * z), 12));
        prop_assert!((x - x).is_zero());
    }

    #[test]
    fn units_invert(pi in 0..3usize, a in -10_000i128..10_000) {
        let p = PRIMES[pi];
        prop_assume!(coprime(p, a));
        let c = ctx(p, 4);
        let x = c.int(a);
        prop_assert!((x * x.try_inv().unwrap()).agrees_with(&c.one(), 16));
    }

    #[test]
    fn log_is_a_homomorphism(pi in 0..3usize, s in -500i128..500, t in -500i128..500) {
        let p = PRIMES[pi];
        let c = ctx(p, 4);
        let q = p as i128;
        let (a, b) = (c.int(1 + q * s), c.int(1 + q * t));
        let lhs = plog(&c, &(a * b)).unwrap();
        let rhs = plog(&c, &a).unwrap() + plog(&c, &b).unwrap();
        prop_assert!(lhs.agrees_with(&rhs, 12));
        prop_assert!(pexp(&c, &plog(&c, &a).unwrap()).unwrap().agrees_with(&a, 12));
    }

    #[test]
    fn grouplikes_multiply(pi in 0..3usize, s in -50i128..50, t in -50i128..50, d in 1i128..30) {
        let p = PRIMES[pi];
        prop_assume!(coprime(p, d));
        let c = ctx(p, 12);
        let (u, v) = (c.ratio(s, d).unwrap(), c.int(t));
        let lhs = grouplike(&c, &u).unwrap().mul(&grouplike(&c, &v).unwrap());
        prop_assert!(lhs.agrees_with(&grouplike(&c, &(u + v)).unwrap(), 10));
    }

    #[test]
    fn omega_composes_multiplicatively(pi in 0..3usize, a in -60i128..60, b in -60i128..60) {
        let p = PRIMES[pi];
        prop_assume!(coprime(p, a) && coprime(p, b));
        let c = ctx(p, 10);
        let wa = omega_sub_unit(&c, &c.int(a)).unwrap();
        let wb = omega_sub_unit(&c, &c.int(b)).unwrap();
        let wab = omega_sub_unit(&c, &c.int(a * b)).unwrap();
        prop_assert!(wa.compose(&wb).unwrap().agrees_with(&wab, 10));
    }

    #[test]
    fn smith_form_is_unimodular_invariant(pi in 0..3usize, seed in any::<u64>()) {
        let p = PRIMES[pi];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_matrix(&mut rng, p, 4);
        let u = random_unimodular(&mut rng, f.codomain_rank);
        let v = random_unimodular(&mut rng, f.domain_rank);
        let g = mat_mul(&mat_mul(&u, &f.matrix).unwrap(), &v).unwrap();
        prop_assert_eq!(smith_form(&f.matrix, p, Some(12)).unwrap(), smith_form(&g, p, Some(12)).unwrap());
    }

    #[test]
    fn duality_is_contravariant(pi in 0..3usize, seed in any::<u64>()) {
        let p = PRIMES[pi];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_matrix(&mut rng, p, 4);
        let rows = rng.gen_range(1..=4);
        let entries = (0..rows).map(|_| (0..g.codomain_rank).map(|_| rng.gen_range(-9..=9)).collect()).collect();
        let f = FreeModuleMap::new(g.codomain_rank, rows, entries).unwrap();
        let lhs = dual_map(&f.compose(&g).unwrap());
        let rhs = dual_map(&g).compose(&dual_map(&f)).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(dual_map(&dual_map(&g)), g);
    }
}
