//! Verification suites behind `--verify`: fixed-seed property checks with
//! one printed status line per check and a boolean summary result.
//!
//! * `oracle`     - dense reconstruction of the implied preconditioning
//!   matrices against the Schur error formulas, the G=1 exactness of the
//!   first Schur variant, and the indicator definitions;
//! * `counters`   - operation-count conformance of setup and apply phases;
//! * `invariants` - Galerkin identity, V-cycle quality and superposition,
//!   preconditioner linearity and run-to-run determinism.

use mgd_solver::amg::{amg_setup, AmgParams};
use mgd_solver::block::{
    weak_coupling_factor, weak_diag_dominance_factor, BlockSystem, VarId,
};
use mgd_solver::krylov::{gmres, GmresParams, LinearOperator};
use mgd_solver::precond::{
    implied_preconditioner_dense, CountingPrecondOperator, OperationCounters, PrecondConfig,
    PrecondKind, Preconditioner,
};
use mgd_solver::sparse::{CsrMatrix, DenseMatrix, DenseVector};
use mgd_solver::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded dense-ish block system with diagonally dominant blocks and
/// negative couplings; shared by the verify suites and the acceptance run.
pub fn random_block_system(g: usize, n: usize, seed: u64) -> BlockSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block = |rng: &mut ChaCha8Rng| {
        let mut d = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.gen::<f64>() < 0.5 {
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

pub fn poisson_2d(nx: usize, ny: usize) -> CsrMatrix {
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

struct Harness {
    failures: usize,
    checks: usize,
}

impl Harness {
    fn new() -> Self {
        Harness {
            failures: 0,
            checks: 0,
        }
    }

    fn check(&mut self, name: &str, ok: bool, detail: &str) {
        self.checks += 1;
        if ok {
            println!("[PASS] {name}");
        } else {
            self.failures += 1;
            println!("[FAIL] {name}: {detail}");
        }
    }

    fn summary(self, suite: &str) -> bool {
        println!(
            "{suite}: {}/{} checks passed",
            self.checks - self.failures,
            self.checks
        );
        self.failures == 0
    }
}

fn exact_cfg(kind: PrecondKind) -> PrecondConfig {
    PrecondConfig {
        exact_dense: true,
        ..PrecondConfig::with_kind(kind, false)
    }
}

/// Dense evaluation of the two Schur error formulas: fill(i,j) blocks
/// D_iE * inv(core) * D_Ej away from the diagonal, where core is C_E for
/// the first variant and A_E for the second.
fn dense_fill(
    s: &BlockSystem,
    use_ce: bool,
) -> Result<(DenseMatrix, Vec<(usize, usize)>)> {
    let g = s.groups();
    let n = s.block_size();
    let total = s.total_size();
    let core_inv = if use_ce {
        let inv_i = s.block(VarId::Ion).to_dense().inverse()?;
        let mut c_e = s.block(VarId::Electron).to_dense();
        for i in 0..n {
            for j in 0..n {
                c_e.set(
                    i,
                    j,
                    c_e.get(i, j) - s.d_ei()[i] * inv_i.get(i, j) * s.d_ie()[j],
                );
            }
        }
        c_e.inverse()?
    } else {
        s.block(VarId::Electron).to_dense().inverse()?
    };

    // row-coupling and column-coupling vectors per participating variable
    let mut participants: Vec<(usize, &DenseVector, &DenseVector)> = Vec::new();
    for gi in 0..g {
        participants.push((gi, s.d_ge(gi), s.d_eg(gi)));
    }
    if !use_ce {
        participants.push((g + 1, s.d_ie(), s.d_ei()));
    }

    let mut fill = DenseMatrix::zeros(total, total);
    let mut blocks = Vec::new();
    for &(bi, d_row, _) in &participants {
        for &(bj, _, d_col) in &participants {
            if bi == bj {
                continue;
            }
            blocks.push((bi, bj));
            for i in 0..n {
                for j in 0..n {
                    fill.set(
                        bi * n + i,
                        bj * n + j,
                        d_row[i] * core_inv.get(i, j) * d_col[j],
                    );
                }
            }
        }
    }
    Ok((fill, blocks))
}

fn oracle_suite() -> Result<bool> {
    let mut h = Harness::new();

    // implied preconditioning matrices match the error formulas
    for g in 1..=3usize {
        for n in 1..=10usize {
            let s = random_block_system(g, n, (g * 100 + n) as u64);
            let total = s.total_size();
            let a = s.to_monolithic().to_dense();
            for (kind, use_ce) in [(PrecondKind::Schur1, true), (PrecondKind::Schur2, false)] {
                let p = Preconditioner::for_system(&s, &exact_cfg(kind))?;
                let implied = implied_preconditioner_dense(&p, total)?;
                let m = implied.inverse()?;
                let (fill, blocks) = dense_fill(&s, use_ce)?;
                let mut max_err = 0.0f64;
                for i in 0..total {
                    for j in 0..total {
                        let err = (m.get(i, j) - a.get(i, j) - fill.get(i, j)).abs();
                        max_err = max_err.max(err);
                    }
                }
                let expected_blocks = if use_ce { g * (g - 1) } else { g * (g + 1) };
                h.check(
                    &format!("error-formula {kind:?} G={g} N={n}"),
                    max_err <= 1e-11 && blocks.len() == expected_blocks,
                    &format!("max entry error {max_err:.3e}"),
                );
            }
            // structural gap: the second variant fills 2G more blocks
            let (_, b1) = dense_fill(&s, true)?;
            let (_, b2) = dense_fill(&s, false)?;
            if n == 1 {
                h.check(
                    &format!("fill-block gap G={g}"),
                    b2.len() == b1.len() + 2 * g,
                    &format!("{} vs {}", b2.len(), b1.len()),
                );
            }
        }
    }

    // exact Schur1 at G=1 is the true inverse
    let s = random_block_system(1, 6, 7);
    let p = Preconditioner::for_system(&s, &exact_cfg(PrecondKind::Schur1))?;
    let implied = implied_preconditioner_dense(&p, s.total_size())?;
    let inv = s.to_monolithic().to_dense().inverse()?;
    let mut max_err = 0.0f64;
    for i in 0..s.total_size() {
        for j in 0..s.total_size() {
            max_err = max_err.max((implied.get(i, j) - inv.get(i, j)).abs());
        }
    }
    h.check(
        "schur1 G=1 reconstructs the inverse",
        max_err <= 1e-12 * inv.frobenius_norm(),
        &format!("max entry error {max_err:.3e}"),
    );

    // indicator definitions against a dense evaluator, exact counts
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut wd_bad = 0usize;
    let mut wc_bad = 0usize;
    for _ in 0..1000 {
        let n = rng.gen_range(1..30);
        let mut d = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    d.set(i, j, rng.gen_range(0.1..3.0));
                } else if rng.gen::<f64>() < 0.5 {
                    d.set(i, j, rng.gen_range(-1.0..1.0));
                }
            }
        }
        let a = CsrMatrix::from_dense(&d);
        let theta_wd = rng.gen_range(0.05..0.95);
        let mut count = 0usize;
        for k in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                sum += d.get(k, j);
            }
            if sum < theta_wd * d.get(k, k) {
                count += 1;
            }
        }
        if weak_diag_dominance_factor(&a, theta_wd)? != count as f64 / n as f64 {
            wd_bad += 1;
        }

        let coupling =
            DenseVector::new((0..n).map(|_| rng.gen_range(-1.0..0.5)).collect()).unwrap();
        let theta_wc = rng.gen_range(0.01..0.9);
        let mut count = 0usize;
        for k in 0..n {
            if -coupling[k] <= theta_wc * d.get(k, k) {
                count += 1;
            }
        }
        if weak_coupling_factor(&coupling, &a, theta_wc) != count as f64 / n as f64 {
            wc_bad += 1;
        }
    }
    h.check(
        "weak-dominance factor matches dense definition on 1000 instances",
        wd_bad == 0,
        &format!("{wd_bad} mismatches"),
    );
    h.check(
        "weak-coupling factor matches dense definition on 1000 instances",
        wc_bad == 0,
        &format!("{wc_bad} mismatches"),
    );

    Ok(h.summary("oracle"))
}

fn counters_suite() -> Result<bool> {
    let mut h = Harness::new();
    for g in [1usize, 5, 20] {
        let s = random_block_system(g, 6, 500 + g as u64);
        let b: Vec<f64> = (0..s.total_size())
            .map(|i| (i as f64 * 0.37).sin() + 1.2)
            .collect();

        let pctl =
            Preconditioner::for_system(&s, &PrecondConfig::with_kind(PrecondKind::Pctl, false))?;
        h.check(
            &format!("pctl setup inverses G={g}"),
            pctl.setup_counters().matrix_inverse == (g + 1) as u64,
            &format!("got {}", pctl.setup_counters().matrix_inverse),
        );
        h.check(
            &format!("pctl setup matrix updates G={g}"),
            pctl.setup_counters().matrix_update == (g + 2) as u64,
            &format!("got {}", pctl.setup_counters().matrix_update),
        );
        let mut c = OperationCounters::new();
        pctl.apply_flat(&b, &mut c)?;
        h.check(
            &format!("pctl apply inverses G={g}"),
            c.matrix_inverse == (g + 3) as u64,
            &format!("got {}", c.matrix_inverse),
        );

        for (kind, expect) in [(PrecondKind::Schur1, g + 4), (PrecondKind::Schur2, g + 3)] {
            let p = Preconditioner::for_system(&s, &PrecondConfig::with_kind(kind, false))?;
            h.check(
                &format!("{kind:?} setup is free G={g}"),
                p.setup_counters().matrix_inverse == 0 && p.setup_counters().matrix_update == 0,
                "setup counters nonzero",
            );
            let mut c = OperationCounters::new();
            p.apply_flat(&b, &mut c)?;
            h.check(
                &format!("{kind:?} apply inverses G={g}"),
                c.matrix_inverse == expect as u64,
                &format!("got {}, expected {expect}", c.matrix_inverse),
            );
        }
    }
    Ok(h.summary("counters"))
}

fn invariants_suite() -> Result<bool> {
    let mut h = Harness::new();

    // Galerkin identity, complexity and per-cycle residual reduction
    let a = poisson_2d(64, 64);
    let n = a.n_rows();
    let hier = amg_setup(&a, &AmgParams::default())?;
    let mut worst = 0.0f64;
    for (ell, lvl) in hier.levels().iter().enumerate() {
        let next: &CsrMatrix = if ell + 1 < hier.levels().len() {
            &hier.levels()[ell + 1].operator
        } else {
            hier.coarsest_operator()
        };
        let rap = mgd_solver::sparse::triple_product(
            &lvl.restriction,
            &lvl.operator,
            &lvl.interpolation,
        )?;
        let diff = rap.add(&next.scale_outer(
            &vec![-1.0; next.n_rows()],
            &vec![1.0; next.n_cols()],
        ))?;
        worst = worst.max(diff.frobenius_norm() / next.frobenius_norm());
    }
    h.check(
        "galerkin identity on every level",
        worst <= 1e-13,
        &format!("worst relative error {worst:.3e}"),
    );
    h.check(
        "operator complexity within bound",
        hier.operator_complexity() <= 3.0,
        &format!("complexity {}", hier.operator_complexity()),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(7777);
    let b = DenseVector::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let mut x = DenseVector::zeros(n);
    let mut norms = Vec::new();
    for _ in 0..12 {
        x = hier.vcycle(&b, &x)?;
        let r = {
            let ax = a.spmv(&x)?;
            let mut r = vec![0.0; n];
            for i in 0..n {
                r[i] = b[i] - ax[i];
            }
            mgd_solver::sparse::norm2(&r)
        };
        norms.push(r);
    }
    let factor = (norms[11] / norms[3]).powf(1.0 / 8.0);
    h.check(
        "v-cycle residual reduction factor",
        factor <= 0.5,
        &format!("factor {factor:.3}"),
    );

    // superposition of the V-cycle from a zero guess
    let b1 = DenseVector::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let b2 = DenseVector::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let combo = DenseVector::new((0..n).map(|i| 0.3 * b1[i] - 1.1 * b2[i]).collect()).unwrap();
    let zero = DenseVector::zeros(n);
    let y1 = hier.vcycle(&b1, &zero)?;
    let y2 = hier.vcycle(&b2, &zero)?;
    let y = hier.vcycle(&combo, &zero)?;
    let scale = y.norm2().max(1.0);
    let mut max_err = 0.0f64;
    for i in 0..n {
        max_err = max_err.max((y[i] - (0.3 * y1[i] - 1.1 * y2[i])).abs());
    }
    h.check(
        "v-cycle superposition",
        max_err <= 1e-12 * scale,
        &format!("max deviation {max_err:.3e}"),
    );

    // block preconditioner linearity (fixed-sweep options)
    let s = random_block_system(2, 8, 901);
    let p = Preconditioner::for_system(&s, &PrecondConfig::with_kind(PrecondKind::Pctl, false))?;
    let total = s.total_size();
    let b1: Vec<f64> = (0..total).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b2: Vec<f64> = (0..total).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let combo: Vec<f64> = (0..total).map(|i| 0.9 * b1[i] + 0.4 * b2[i]).collect();
    let mut c = OperationCounters::new();
    let w1 = p.apply_flat(&b1, &mut c)?;
    let w2 = p.apply_flat(&b2, &mut c)?;
    let w = p.apply_flat(&combo, &mut c)?;
    let scale = mgd_solver::sparse::norm2(&w).max(1.0);
    let mut max_err = 0.0f64;
    for i in 0..total {
        max_err = max_err.max((w[i] - (0.9 * w1[i] + 0.4 * w2[i])).abs());
    }
    h.check(
        "pctl apply superposition",
        max_err <= 1e-12 * scale,
        &format!("max deviation {max_err:.3e}"),
    );

    // determinism: identical runs produce identical iterates
    let a_small = poisson_2d(16, 16);
    let ns = a_small.n_rows();
    let bs = DenseVector::new((0..ns).map(|i| ((i * 5 % 11) as f64) - 5.0).collect()).unwrap();
    let run = || -> Result<(usize, Vec<f64>)> {
        let p = Preconditioner::mono(&a_small, &AmgParams::default())?;
        let op = CountingPrecondOperator::new(&p);
        let (x, rep) = gmres(
            &a_small,
            &op as &dyn LinearOperator,
            &bs,
            &DenseVector::zeros(ns),
            &GmresParams::default(),
        )?;
        Ok((rep.iterations, x.into_vec()))
    };
    let (i1, x1) = run()?;
    let (i2, x2) = run()?;
    h.check(
        "preconditioned solve determinism",
        i1 == i2 && x1 == x2,
        "iterates differ between identical runs",
    );

    Ok(h.summary("invariants"))
}

/// Runs one named suite; `Ok(true)` means every check passed.
pub fn run_suite(name: &str) -> Result<bool> {
    match name {
        "oracle" => oracle_suite(),
        "counters" => counters_suite(),
        "invariants" => invariants_suite(),
        other => Err(Error::InvalidParam(format!(
            "unknown verify suite {other}; expected oracle | counters | invariants"
        ))),
    }
}
