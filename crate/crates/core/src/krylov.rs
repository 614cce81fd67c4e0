//! Restarted, right-preconditioned GMRES.
//!
//! Right preconditioning keeps the stopping test on the true residual: the
//! Givens estimate drives the inner loop and the unpreconditioned residual
//! is recomputed at every restart and before convergence is reported.

use crate::error::{Error, Result};
use crate::precond::OperationCounters;
use crate::sparse::{axpy, dot, norm2, scale, sub_into, CsrMatrix, DenseVector};

/// Something that maps length-n vectors to length-n vectors.
pub trait LinearOperator {
    fn size(&self) -> usize;
    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

impl LinearOperator for CsrMatrix {
    fn size(&self) -> usize {
        self.n_rows()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.spmv_into(x, y);
        Ok(())
    }
}

/// The do-nothing preconditioner.
pub struct IdentityOperator(pub usize);

impl LinearOperator for IdentityOperator {
    fn size(&self) -> usize {
        self.0
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        y.copy_from_slice(x);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GmresParams {
    /// Krylov directions per restart cycle.
    pub restart: usize,
    pub rel_tol: f64,
    pub max_iters: usize,
}

impl Default for GmresParams {
    fn default() -> Self {
        GmresParams {
            restart: 30,
            rel_tol: 1e-7,
            max_iters: 1000,
        }
    }
}

impl GmresParams {
    pub fn validate(&self) -> Result<()> {
        if self.restart < 1 {
            return Err(Error::InvalidParam("restart must be >= 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParam("rel_tol must be > 0".into()));
        }
        Ok(())
    }
}

/// Outcome of one outer solve.
#[derive(Debug, Clone, Default)]
pub struct SolveReport {
    /// Total Arnoldi steps across all restart cycles.
    pub iterations: usize,
    pub converged: bool,
    /// Relative residuals: the initial one, then one entry per iteration.
    pub residual_history: Vec<f64>,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub counters: OperationCounters,
}

impl SolveReport {
    pub fn final_relative_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }

    /// Residual history as CSV rows of (iteration, relative_residual).
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iteration,relative_residual\n");
        for (k, r) in self.residual_history.iter().enumerate() {
            out.push_str(&format!("{k},{r:.10e}\n"));
        }
        out
    }
}

/// Right-preconditioned GMRES(m): modified Gram-Schmidt Arnoldi with Givens
/// rotations, restarted every `restart` steps.
///
/// `apply_m` must act as a fixed linear operator for the duration of the
/// solve.  Non-convergence within `max_iters` is reported through the
/// `converged` flag; an exact Arnoldi breakdown with a nonzero residual is
/// an error.
pub fn gmres(
    apply_a: &dyn LinearOperator,
    apply_m: &dyn LinearOperator,
    b: &DenseVector,
    x0: &DenseVector,
    params: &GmresParams,
) -> Result<(DenseVector, SolveReport)> {
    params.validate()?;
    let n = b.len();
    if apply_a.size() != n || apply_m.size() != n || x0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "gmres: operator {}x{}, preconditioner {}, b {}, x0 {}",
            apply_a.size(),
            apply_a.size(),
            apply_m.size(),
            n,
            x0.len()
        )));
    }

    let mut report = SolveReport::default();
    let bnorm = b.norm2();
    if bnorm == 0.0 {
        report.converged = true;
        report.residual_history.push(0.0);
        return Ok((DenseVector::zeros(n), report));
    }

    let m = params.restart;
    let mut x = x0.clone().into_vec();
    let mut ax = vec![0.0; n];
    let mut r = vec![0.0; n];
    apply_a.apply_into(&x, &mut ax)?;
    sub_into(b, &ax, &mut r);
    let mut rnorm = norm2(&r);
    report.residual_history.push(rnorm / bnorm);
    if rnorm / bnorm <= params.rel_tol {
        report.converged = true;
        return Ok((DenseVector::from_raw(x), report));
    }

    'outer: while report.iterations < params.max_iters {
        let beta = rnorm;
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut v0 = r.clone();
        scale(&mut v0, 1.0 / beta);
        v.push(v0);

        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;

        let mut k_done = 0;
        let mut happy = false;
        for k in 0..m {
            if report.iterations >= params.max_iters {
                break;
            }
            report.iterations += 1;

            let mut zk = vec![0.0; n];
            apply_m.apply_into(&v[k], &mut zk)?;
            let mut w = vec![0.0; n];
            apply_a.apply_into(&zk, &mut w)?;
            z.push(zk);

            for j in 0..=k {
                h[j][k] = dot(&w, &v[j]);
                axpy(&mut w, -h[j][k], &v[j]);
            }
            h[k + 1][k] = norm2(&w);
            if h[k + 1][k] == 0.0 {
                happy = true;
            } else {
                scale(&mut w, 1.0 / h[k + 1][k]);
                v.push(w);
            }

            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let (c, s) = givens(h[k][k], h[k + 1][k]);
            cs[k] = c;
            sn[k] = s;
            h[k][k] = c * h[k][k] + s * h[k + 1][k];
            h[k + 1][k] = 0.0;
            let t = c * g[k] + s * g[k + 1];
            g[k + 1] = -s * g[k] + c * g[k + 1];
            g[k] = t;

            k_done = k + 1;
            report.residual_history.push(g[k + 1].abs() / bnorm);
            if happy || g[k + 1].abs() / bnorm <= params.rel_tol {
                break;
            }
        }

        // least-squares update x += sum_j y_j z_j
        let mut y = vec![0.0; k_done];
        for i in (0..k_done).rev() {
            let mut acc = g[i];
            for j in (i + 1)..k_done {
                acc -= h[i][j] * y[j];
            }
            if h[i][i] == 0.0 {
                // singular projected system: breakdown without convergence
                return Err(Error::Breakdown(format!(
                    "zero pivot in the least-squares solve at step {i}"
                )));
            }
            y[i] = acc / h[i][i];
        }
        for j in 0..k_done {
            axpy(&mut x, y[j], &z[j]);
        }

        // true residual governs convergence and the next restart
        apply_a.apply_into(&x, &mut ax)?;
        sub_into(b, &ax, &mut r);
        rnorm = norm2(&r);
        let true_rel = rnorm / bnorm;
        if true_rel <= params.rel_tol {
            report.converged = true;
            *report.residual_history.last_mut().unwrap() = true_rel;
            break 'outer;
        }
        if happy {
            return Err(Error::Breakdown(format!(
                "Arnoldi breakdown with relative residual {true_rel:.3e}"
            )));
        }
    }

    Ok((DenseVector::from_raw(x), report))
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else if a.abs() > b.abs() {
        let t = b / a;
        let c = 1.0 / (1.0 + t * t).sqrt();
        (c, c * t)
    } else {
        let t = a / b;
        let s = 1.0 / (1.0 + t * t).sqrt();
        (s * t, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::DenseMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct DiagOp(Vec<f64>);
    impl LinearOperator for DiagOp {
        fn size(&self) -> usize {
            self.0.len()
        }
        fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
            for i in 0..x.len() {
                y[i] = self.0[i] * x[i];
            }
            Ok(())
        }
    }

    fn poisson_2d(nx: usize, ny: usize) -> CsrMatrix {
        let n = nx * ny;
        let idx = |ix: usize, iy: usize| iy * nx + ix;
        let mut t = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                let i = idx(ix, iy);
                t.push((i, i, 4.0));
                if ix > 0 {
                    t.push((i, idx(ix - 1, iy), -1.0));
                }
                if ix + 1 < nx {
                    t.push((i, idx(ix + 1, iy), -1.0));
                }
                if iy > 0 {
                    t.push((i, idx(ix, iy - 1), -1.0));
                }
                if iy + 1 < ny {
                    t.push((i, idx(ix, iy + 1), -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn identity_system_converges_in_one_iteration() {
        let a = CsrMatrix::identity(5);
        let b = DenseVector::new(vec![1.0, -2.0, 3.0, 0.0, 5.0]).unwrap();
        let (x, rep) = gmres(
            &a,
            &IdentityOperator(5),
            &b,
            &DenseVector::zeros(5),
            &GmresParams::default(),
        )
        .unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        for i in 0..5 {
            assert!((x[i] - b[i]).abs() <= 1e-14);
        }
    }

    #[test]
    fn exact_inverse_preconditioner_one_iteration() {
        let diag = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let a = DiagOp(diag.clone());
        let minv = DiagOp(diag.iter().map(|d| 1.0 / d).collect());
        let b = DenseVector::new(vec![2.0, 4.0, 9.0, 8.0, 20.0]).unwrap();
        let p = GmresParams {
            rel_tol: 1e-12,
            ..Default::default()
        };
        let (x, rep) = gmres(&a, &minv, &b, &DenseVector::zeros(5), &p).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        let expect = [2.0, 2.0, 3.0, 2.0, 4.0];
        for i in 0..5 {
            assert!((x[i] - expect[i]).abs() <= 1e-14);
        }
    }

    #[test]
    fn exact_inverse_on_seeded_dense_system() {
        let n = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut d = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                d.set(i, j, rng.gen_range(-1.0..1.0));
            }
            d.set(i, i, d.get(i, i) + n as f64);
        }
        let a = CsrMatrix::from_dense(&d);
        let inv = d.inverse().unwrap();
        let m = CsrMatrix::from_dense(&inv);
        let b = DenseVector::new((0..n).map(|i| (i as f64).cos() + 2.0).collect()).unwrap();
        let p = GmresParams {
            rel_tol: 1e-12,
            ..Default::default()
        };
        let (x, rep) = gmres(&a, &m, &b, &DenseVector::zeros(n), &p).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        let ax = a.spmv(&x).unwrap();
        let mut r = vec![0.0; n];
        sub_into(&b, &ax, &mut r);
        assert!(norm2(&r) / b.norm2() <= 1e-12);
    }

    /// Textbook dense reference: same modified Gram-Schmidt and Givens
    /// arithmetic, written against a dense matrix, used as an iteration
    /// count oracle.
    fn reference_gmres_iterations(a: &DenseMatrix, b: &[f64], m: usize, tol: f64) -> usize {
        let n = b.len();
        let bnorm = norm2(b);
        let mut x = vec![0.0; n];
        let mut iters = 0usize;
        loop {
            let ax = a.mul_vec(&x);
            let mut r = vec![0.0; n];
            for i in 0..n {
                r[i] = b[i] - ax[i];
            }
            let beta = norm2(&r);
            if beta / bnorm <= tol {
                return iters;
            }
            let mut v = vec![r.iter().map(|t| t / beta).collect::<Vec<f64>>()];
            let mut h = vec![vec![0.0; m]; m + 1];
            let (mut cs, mut sn, mut g) = (vec![0.0; m], vec![0.0; m], vec![0.0; m + 1]);
            g[0] = beta;
            let mut k_done = 0;
            for k in 0..m {
                iters += 1;
                let mut w = a.mul_vec(&v[k]);
                for j in 0..=k {
                    h[j][k] = dot(&w, &v[j]);
                    for i in 0..n {
                        w[i] -= h[j][k] * v[j][i];
                    }
                }
                h[k + 1][k] = norm2(&w);
                if h[k + 1][k] != 0.0 {
                    v.push(w.iter().map(|t| t / h[k + 1][k]).collect());
                }
                for j in 0..k {
                    let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                    h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                    h[j][k] = t;
                }
                let (c, s) = super::givens(h[k][k], h[k + 1][k]);
                cs[k] = c;
                sn[k] = s;
                h[k][k] = c * h[k][k] + s * h[k + 1][k];
                h[k + 1][k] = 0.0;
                let t = c * g[k] + s * g[k + 1];
                g[k + 1] = -s * g[k] + c * g[k + 1];
                g[k] = t;
                k_done = k + 1;
                if g[k + 1].abs() / bnorm <= tol {
                    break;
                }
            }
            let mut y = vec![0.0; k_done];
            for i in (0..k_done).rev() {
                let mut acc = g[i];
                for j in (i + 1)..k_done {
                    acc -= h[i][j] * y[j];
                }
                y[i] = acc / h[i][i];
            }
            for j in 0..k_done {
                for i in 0..n {
                    x[i] += y[j] * v[j][i];
                }
            }
        }
    }

    #[test]
    fn iteration_count_matches_dense_reference() {
        let a = poisson_2d(16, 16);
        let n = a.n_rows();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let params = GmresParams::default();
        let (_, rep) = gmres(
            &a,
            &IdentityOperator(n),
            &DenseVector::new(b.clone()).unwrap(),
            &DenseVector::zeros(n),
            &params,
        )
        .unwrap();
        assert!(rep.converged);
        let reference = reference_gmres_iterations(&a.to_dense(), &b, 30, 1e-7);
        assert_eq!(rep.iterations, reference);
    }

    #[test]
    fn history_monotone_within_restart_cycles() {
        let a = poisson_2d(12, 12);
        let n = a.n_rows();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let b = DenseVector::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let p = GmresParams {
            restart: 10,
            ..Default::default()
        };
        let (_, rep) = gmres(&a, &IdentityOperator(n), &b, &DenseVector::zeros(n), &p).unwrap();
        assert!(rep.converged);
        // entries within one cycle (between restart boundaries) do not grow
        for (k, pair) in rep.residual_history.windows(2).enumerate() {
            let within_cycle = (k % p.restart) != 0 || k == 0;
            if within_cycle {
                assert!(
                    pair[1] <= pair[0] * (1.0 + 1e-12),
                    "history grew at step {k}: {} -> {}",
                    pair[0],
                    pair[1]
                );
            }
        }
        assert!(rep.final_relative_residual() <= p.rel_tol);
    }

    #[test]
    fn deterministic_across_runs() {
        let a = poisson_2d(10, 10);
        let n = a.n_rows();
        let b = DenseVector::new((0..n).map(|i| ((i * 7 % 13) as f64) - 6.0).collect()).unwrap();
        let p = GmresParams::default();
        let (x1, r1) = gmres(&a, &IdentityOperator(n), &b, &DenseVector::zeros(n), &p).unwrap();
        let (x2, r2) = gmres(&a, &IdentityOperator(n), &b, &DenseVector::zeros(n), &p).unwrap();
        assert_eq!(r1.iterations, r2.iterations);
        assert_eq!(x1.as_slice(), x2.as_slice());
    }

    #[test]
    fn non_convergence_reported_not_fatal() {
        let a = poisson_2d(16, 16);
        let n = a.n_rows();
        let b = DenseVector::from_elem(n, 1.0);
        let p = GmresParams {
            max_iters: 3,
            rel_tol: 1e-14,
            ..Default::default()
        };
        let (_, rep) = gmres(&a, &IdentityOperator(n), &b, &DenseVector::zeros(n), &p).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 3);
    }

    #[test]
    fn breakdown_with_unreachable_rhs_is_an_error() {
        // rank-deficient operator with b outside its range
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0)]).unwrap();
        let b = DenseVector::new(vec![0.0, 1.0]).unwrap();
        let r = gmres(
            &a,
            &IdentityOperator(2),
            &b,
            &DenseVector::zeros(2),
            &GmresParams::default(),
        );
        assert!(matches!(r, Err(crate::Error::Breakdown(_))));
    }

    #[test]
    fn csr_operator_matches_spmv_bitwise() {
        let a = poisson_2d(5, 5);
        let x: Vec<f64> = (0..25).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut y = vec![0.0; 25];
        a.apply_into(&x, &mut y).unwrap();
        let direct = a.spmv(&DenseVector::new(x).unwrap()).unwrap();
        assert_eq!(y.as_slice(), direct.as_slice());
    }

    #[test]
    fn history_csv_has_one_row_per_iteration() {
        let a = poisson_2d(8, 8);
        let b = DenseVector::from_elem(64, 1.0);
        let (_, rep) = gmres(
            &a,
            &IdentityOperator(64),
            &b,
            &DenseVector::zeros(64),
            &GmresParams::default(),
        )
        .unwrap();
        let csv = rep.history_csv();
        assert_eq!(csv.lines().count(), rep.iterations + 2); // header + initial
        assert!(csv.starts_with("iteration,relative_residual\n0,"));
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = poisson_2d(4, 4);
        let (x, rep) = gmres(
            &a,
            &IdentityOperator(16),
            &DenseVector::zeros(16),
            &DenseVector::zeros(16),
            &GmresParams::default(),
        )
        .unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
        assert!(x.iter().all(|&v| v == 0.0));
    }
}
