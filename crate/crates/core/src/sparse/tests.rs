use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn seeded_dense(n_rows: usize, n_cols: usize, seed: u64, density: f64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DenseMatrix::zeros(n_rows, n_cols);
    for i in 0..n_rows {
        for j in 0..n_cols {
            if rng.gen::<f64>() < density {
                m.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
    }
    m
}

fn tridiag(n: usize, lo: f64, di: f64, up: f64) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        if i > 0 {
            t.push((i, i - 1, lo));
        }
        t.push((i, i, di));
        if i + 1 < n {
            t.push((i, i + 1, up));
        }
    }
    CsrMatrix::from_triplets(n, n, &t).unwrap()
}

#[test]
fn spmv_identity() {
    let a = CsrMatrix::identity(3);
    let x = DenseVector::new(vec![1.0, 2.0, 3.0]).unwrap();
    let y = a.spmv(&x).unwrap();
    assert_eq!(y.as_slice(), &[1.0, 2.0, 3.0]);
}

#[test]
fn spmv_constant_vector_row_sums() {
    let a = tridiag(2, -1.0, 2.0, -1.0);
    let y = a.spmv(&DenseVector::from_elem(2, 1.0)).unwrap();
    assert_eq!(y.as_slice(), &[1.0, 1.0]);
}

#[test]
fn spmv_matches_dense_oracle() {
    let d = seeded_dense(10, 10, 11, 0.6);
    let a = CsrMatrix::from_dense(&d);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y = a.spmv(&DenseVector::new(x.clone()).unwrap()).unwrap();
    let y_ref = d.mul_vec(&x);
    for i in 0..10 {
        assert!((y[i] - y_ref[i]).abs() <= 1e-14);
    }
}

#[test]
fn spmv_dimension_mismatch() {
    let a = CsrMatrix::identity(3);
    assert!(a.spmv(&DenseVector::zeros(4)).is_err());
}

#[test]
fn spmv_dense_agreement_up_to_50() {
    for (seed, n) in [(1u64, 7usize), (2, 23), (3, 50)] {
        let d = seeded_dense(n, n, seed, 0.3);
        let a = CsrMatrix::from_dense(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = a.spmv(&DenseVector::new(x.clone()).unwrap()).unwrap();
        let y_ref = d.mul_vec(&x);
        let bound = 1e-14 * a.frobenius_norm() * norm2(&x);
        for i in 0..n {
            assert!((y[i] - y_ref[i]).abs() <= bound.max(1e-15));
        }
    }
}

#[test]
fn transpose_identity() {
    let a = CsrMatrix::identity(3);
    assert_eq!(a.transpose(), a);
}

#[test]
fn transpose_row_to_column() {
    let a = CsrMatrix::from_triplets(1, 3, &[(0, 0, 1.0), (0, 1, 2.0), (0, 2, 3.0)]).unwrap();
    let t = a.transpose();
    assert_eq!(t.n_rows(), 3);
    assert_eq!(t.n_cols(), 1);
    assert_eq!(t.values(), &[1.0, 2.0, 3.0]);
    assert_eq!(t.col_idx(), &[0, 0, 0]);
}

#[test]
fn transpose_involution_bitwise() {
    let d = seeded_dense(9, 6, 21, 0.4);
    let a = CsrMatrix::from_dense(&d);
    let tt = a.transpose().transpose();
    assert_eq!(a, tt);
}

#[test]
fn triple_product_identity_frame() {
    let d = seeded_dense(6, 6, 31, 0.5);
    let a = CsrMatrix::from_dense(&d);
    let i6 = CsrMatrix::identity(6);
    let rap = triple_product(&i6, &a, &i6).unwrap();
    assert_eq!(rap, a);
}

#[test]
fn triple_product_ones_column_sums_entries() {
    let n = 5;
    let ones: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, 0, 1.0)).collect();
    let p = CsrMatrix::from_triplets(n, 1, &ones).unwrap();
    let rap = triple_product(&p.transpose(), &CsrMatrix::identity(n), &p).unwrap();
    assert_eq!(rap.n_rows(), 1);
    assert_eq!(rap.get(0, 0), n as f64);
}

#[test]
fn triple_product_matches_dense_oracle() {
    let ad = seeded_dense(8, 8, 41, 0.5);
    let pd = seeded_dense(8, 3, 42, 0.7);
    let a = CsrMatrix::from_dense(&ad);
    let p = CsrMatrix::from_dense(&pd);
    let rap = triple_product(&p.transpose(), &a, &p).unwrap();
    // independent dense route: P^T (A P)
    let mut pt = DenseMatrix::zeros(3, 8);
    for i in 0..8 {
        for j in 0..3 {
            pt.set(j, i, pd.get(i, j));
        }
    }
    let expect = pt.mul_mat(&ad.mul_mat(&pd));
    let scale = expect.frobenius_norm().max(1.0);
    for i in 0..3 {
        for j in 0..3 {
            assert!((rap.get(i, j) - expect.get(i, j)).abs() <= 1e-13 * scale);
        }
    }
}

#[test]
fn triple_product_symmetric_when_a_symmetric() {
    let n = 12;
    let a = tridiag(n, -1.0, 2.0, -1.0);
    let pd = seeded_dense(n, 4, 43, 0.6);
    let p = CsrMatrix::from_dense(&pd);
    let rap = triple_product(&p.transpose(), &a, &p).unwrap();
    let scale = rap.frobenius_norm().max(1.0);
    for i in 0..4 {
        for j in 0..4 {
            assert!((rap.get(i, j) - rap.get(j, i)).abs() <= 1e-13 * scale);
        }
    }
}

#[test]
fn diag_examples() {
    assert_eq!(CsrMatrix::identity(4).diag().as_slice(), &[1.0; 4]);
    let off = CsrMatrix::from_triplets(2, 2, &[(0, 1, 5.0), (1, 0, -2.0)]).unwrap();
    assert_eq!(off.diag().as_slice(), &[0.0, 0.0]);
    let d = seeded_dense(7, 7, 51, 0.8);
    let a = CsrMatrix::from_dense(&d);
    for i in 0..7 {
        assert_eq!(a.diag()[i], d.get(i, i));
    }
}

#[test]
fn row_sums_examples() {
    assert_eq!(CsrMatrix::identity(3).row_sums().as_slice(), &[1.0; 3]);
    let a = tridiag(2, -1.0, 2.0, -1.0);
    assert_eq!(a.row_sums().as_slice(), &[1.0, 1.0]);
    let d = seeded_dense(6, 6, 52, 0.7);
    let a = CsrMatrix::from_dense(&d);
    let s = a.row_sums();
    for i in 0..6 {
        let mut acc = 0.0;
        for j in 0..6 {
            acc += d.get(i, j);
        }
        assert!((s[i] - acc).abs() <= 1e-15 * acc.abs().max(1.0));
    }
}

#[test]
fn hadamard_examples() {
    let u = DenseVector::new(vec![3.0, -2.5, 0.0]).unwrap();
    let ones = DenseVector::from_elem(3, 1.0);
    assert_eq!(hadamard(&u, &ones).unwrap().as_slice(), u.as_slice());

    let a = DenseVector::new(vec![1.0, 2.0]).unwrap();
    let b = DenseVector::new(vec![3.0, 4.0]).unwrap();
    assert_eq!(hadamard(&a, &b).unwrap().as_slice(), &[3.0, 8.0]);

    assert!(hadamard(&a, &DenseVector::zeros(3)).is_err());

    // chained three-vector product against a dense elementwise oracle
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let n = 16;
    let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let uv = hadamard(
        &DenseVector::new(u.clone()).unwrap(),
        &DenseVector::new(v.clone()).unwrap(),
    )
    .unwrap();
    let uvw = hadamard(&uv, &DenseVector::new(w.clone()).unwrap()).unwrap();
    for i in 0..n {
        assert!((uvw[i] - u[i] * v[i] * w[i]).abs() <= 1e-15 * uvw[i].abs().max(1.0));
    }
}

#[test]
fn lu_identity_solve() {
    let lu = DenseLuFactor::factor(&DenseMatrix::identity(4)).unwrap();
    let b = DenseVector::new(vec![1.0, -2.0, 3.0, 0.5]).unwrap();
    assert_eq!(lu.solve(&b).unwrap().as_slice(), b.as_slice());
}

#[test]
fn lu_hand_2x2() {
    // 2x + y = 3, x + 3y = 4 -> x = y = 1
    let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
    let lu = DenseLuFactor::factor(&a).unwrap();
    let x = lu.solve_slice(&[3.0, 4.0]).unwrap();
    assert!((x[0] - 1.0).abs() <= 1e-14);
    assert!((x[1] - 1.0).abs() <= 1e-14);
}

#[test]
fn lu_hilbert_residual() {
    let n = 5;
    let mut h = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            h.set(i, j, 1.0 / ((i + j + 1) as f64));
        }
    }
    let lu = DenseLuFactor::factor(&h).unwrap();
    let b = vec![1.0; n];
    let x = lu.solve_slice(&b).unwrap();
    let r: Vec<f64> = h
        .mul_vec(&x)
        .iter()
        .zip(b.iter())
        .map(|(ax, bi)| ax - bi)
        .collect();
    assert!(norm2(&r) / norm2(&b) <= 1e-10);
}

#[test]
fn lu_reconstructs_factored_matrix() {
    let d = seeded_dense(8, 8, 71, 0.9);
    let mut a = d.clone();
    for i in 0..8 {
        a.set(i, i, a.get(i, i) + 10.0);
    }
    let lu = DenseLuFactor::factor(&a).unwrap();
    let back = lu.reconstruct();
    let err = back.sub(&a).frobenius_norm() / a.frobenius_norm();
    assert!(err <= 1e-12, "relative reconstruction error {err}");
}

#[test]
fn lu_singular_rejected() {
    let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
    assert!(DenseLuFactor::factor(&a).is_err());
}

#[test]
fn constructor_rejects_malformed() {
    // bad row_ptr length
    assert!(CsrMatrix::new(2, 2, vec![0, 1], vec![0], vec![1.0]).is_err());
    // decreasing row_ptr
    assert!(CsrMatrix::new(2, 2, vec![0, 2, 1], vec![0, 1], vec![1.0, 1.0]).is_err());
    // column out of bounds
    assert!(CsrMatrix::new(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
    // duplicate / unsorted columns
    assert!(CsrMatrix::new(1, 3, vec![0, 2], vec![1, 1], vec![1.0, 2.0]).is_err());
    // NaN value
    assert!(CsrMatrix::new(1, 1, vec![0, 1], vec![0], vec![f64::NAN]).is_err());
    // vector with Inf
    assert!(DenseVector::new(vec![f64::INFINITY]).is_err());
}

#[test]
fn add_and_scale_helpers() {
    let a = tridiag(3, -1.0, 2.0, -1.0);
    let b = CsrMatrix::from_triplets(3, 3, &[(0, 2, 5.0), (1, 1, 1.0)]).unwrap();
    let s = a.add(&b).unwrap();
    assert_eq!(s.get(0, 2), 5.0);
    assert_eq!(s.get(1, 1), 3.0);
    assert_eq!(s.get(2, 1), -1.0);

    let scaled = a.scale_outer(&[2.0, 1.0, 1.0], &[1.0, 3.0, 1.0]);
    assert_eq!(scaled.get(0, 0), 4.0);
    assert_eq!(scaled.get(0, 1), -6.0);
    assert_eq!(scaled.get(2, 2), 2.0);

    let shifted = a.add_to_diag(&[1.0, 1.0, 1.0]).unwrap();
    assert_eq!(shifted.diag().as_slice(), &[3.0, 3.0, 3.0]);
}

#[test]
fn drop_zeros_canonicalizes() {
    let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 0.0), (1, 1, 2.0)]).unwrap();
    assert_eq!(a.nnz(), 3);
    let c = a.drop_explicit_zeros();
    assert_eq!(c.nnz(), 2);
    assert_eq!(c.get(0, 1), 0.0);
}

#[test]
fn matrix_market_round_trip_bitwise() {
    let d = seeded_dense(9, 7, 81, 0.4);
    let a = CsrMatrix::from_dense(&d);
    let mut buf = Vec::new();
    io::write_matrix_market(&a, &mut buf).unwrap();
    let back = io::read_matrix_market(std::io::BufReader::new(buf.as_slice())).unwrap();
    assert_eq!(a, back);
}

#[test]
fn matrix_market_rejects_bad_input() {
    let bad_header = "%%MatrixMarket matrix array real general\n2 2 1\n1 1 1.0\n";
    assert!(io::read_matrix_market(std::io::BufReader::new(bad_header.as_bytes())).is_err());
    let oob = format!("{}\n2 2 1\n3 1 1.0\n", "%%MatrixMarket matrix coordinate real general");
    assert!(io::read_matrix_market(std::io::BufReader::new(oob.as_bytes())).is_err());
}

#[test]
fn vector_round_trip_bitwise() {
    let v = DenseVector::new(vec![1.0 / 3.0, -2.5e-17, 1.23456789012345e8]).unwrap();
    let mut buf = Vec::new();
    io::write_vector(&v, &mut buf).unwrap();
    let back = io::read_vector(std::io::BufReader::new(buf.as_slice())).unwrap();
    assert_eq!(v.as_slice(), back.as_slice());
}
