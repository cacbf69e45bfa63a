//! Dense matrices and the seeded random source.

mod matrix;
mod rng;

pub use matrix::{matmul, Matrix};
pub use rng::{sample_normal, sample_uniform, Rng, RngState};

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest};

    proptest! {
        #[test]
        fn matmul_is_associative(seed in any::<u64>(), m in 1usize..5, k in 1usize..5, l in 1usize..5, n in 1usize..5) {
            let mut rng = Rng::new(seed);
            let a = sample_uniform(&mut rng, -1.0, 1.0, m, k).unwrap();
            let b = sample_uniform(&mut rng, -1.0, 1.0, k, l).unwrap();
            let c = sample_uniform(&mut rng, -1.0, 1.0, l, n).unwrap();
            let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
            let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
            prop_assert!(left.sub(&right).unwrap().max_abs() < 1e-9);
        }

        #[test]
        fn equal_seeds_give_bit_equal_streams(seed in any::<u64>()) {
            let mut a = Rng::new(seed);
            let mut b = Rng::new(seed);
            for _ in 0..32 {
                prop_assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
                prop_assert_eq!(a.unit().to_bits(), b.unit().to_bits());
            }
        }
    }
}
