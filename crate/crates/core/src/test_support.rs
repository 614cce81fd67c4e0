//! Shared builders for unit tests.

use crate::block::BlockSystem;
use crate::sparse::{CsrMatrix, DenseMatrix, DenseVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded random system: diagonally dominant blocks, negative couplings.
pub(crate) fn random_system(g: usize, n: usize, seed: u64) -> BlockSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block = |rng: &mut ChaCha8Rng| {
        let mut d = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.gen::<f64>() < 0.4 {
                    d.set(i, j, rng.gen_range(-1.0..1.0));
                }
            }
        }
        for i in 0..n {
            let mut row_abs = 0.0;
            for j in 0..n {
                row_abs += d.get(i, j).abs();
            }
            d.set(i, i, row_abs + rng.gen_range(1.0..2.0));
        }
        CsrMatrix::from_dense(&d)
    };
    let coupling = |rng: &mut ChaCha8Rng| {
        DenseVector::new((0..n).map(|_| rng.gen_range(-0.5..-0.1)).collect()).unwrap()
    };
    let a_groups: Vec<CsrMatrix> = (0..g).map(|_| block(&mut rng)).collect();
    let a_e = block(&mut rng);
    let a_i = block(&mut rng);
    let d_ge: Vec<DenseVector> = (0..g).map(|_| coupling(&mut rng)).collect();
    let d_eg: Vec<DenseVector> = (0..g).map(|_| coupling(&mut rng)).collect();
    let d_ei = coupling(&mut rng);
    let rhs: Vec<DenseVector> = (0..g + 2)
        .map(|_| DenseVector::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap())
        .collect();
    BlockSystem::new(a_groups, a_e, a_i, d_ge, d_eg, d_ei.clone(), d_ei, rhs).unwrap()
}

/// G=1, N=1: A_1=2, A_E=3, A_I=4, all couplings -1, rhs ones.
pub(crate) fn scalar_system() -> BlockSystem {
    let one = |v: f64| CsrMatrix::from_triplets(1, 1, &[(0, 0, v)]).unwrap();
    let c = || DenseVector::new(vec![-1.0]).unwrap();
    BlockSystem::new(
        vec![one(2.0)],
        one(3.0),
        one(4.0),
        vec![c()],
        vec![c()],
        c(),
        c(),
        vec![DenseVector::from_elem(1, 1.0); 3],
    )
    .unwrap()
}

/// Same blocks and rhs as [`random_system`] but with all couplings zeroed.
pub(crate) fn zero_coupling_system(g: usize, n: usize, seed: u64) -> BlockSystem {
    use crate::block::VarId;
    let s = random_system(g, n, seed);
    let zero = DenseVector::zeros(n);
    BlockSystem::new(
        (0..g).map(|i| s.block(VarId::Group(i)).clone()).collect(),
        s.block(VarId::Electron).clone(),
        s.block(VarId::Ion).clone(),
        vec![zero.clone(); g],
        vec![zero.clone(); g],
        zero.clone(),
        zero,
        (0..g + 2)
            .map(|i| {
                let var = if i < g {
                    VarId::Group(i)
                } else if i == g {
                    VarId::Electron
                } else {
                    VarId::Ion
                };
                s.rhs_segment(var).clone()
            })
            .collect(),
    )
    .unwrap()
}
