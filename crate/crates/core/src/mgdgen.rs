//! Synthetic generator of radiation-diffusion style block systems.
//!
//! A cell-centered finite-volume discretization on a structured nx-by-ny
//! grid with unit cells: backward-Euler time term, five-point flux stencil
//! with harmonic-average face coefficients and homogeneous Neumann
//! boundaries, frozen coefficients with a seeded per-cell emission slope.
//! The construction guarantees the structural facts the solvers rely on:
//! positive block diagonals, diagonal couplings with `D_EI = D_IE` and
//! `D_gE != D_Eg`, M-matrix-like diagonal blocks and a nonsymmetric
//! positive definite monolithic matrix at the generated parameter ranges.
//!
//! The right-hand side is manufactured from a smooth positive solution so
//! generated systems have a known answer scale.

use crate::block::BlockSystem;
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, DenseVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One material layer (a vertical slab of the domain).
#[derive(Debug, Clone)]
pub struct MaterialLayer {
    /// group diffusion coefficients (area/time), one per group
    pub d_group: Vec<f64>,
    /// electron conduction coefficient (area/time)
    pub d_electron: f64,
    /// ion conduction coefficient (area/time)
    pub d_ion: f64,
    /// absorption coefficients (1/length), one per group
    pub sigma_p: Vec<f64>,
    /// scattering coefficients (1/length), one per group
    pub sigma_b: Vec<f64>,
    /// electron heat capacity density (energy/volume/temperature)
    pub rho_ce: f64,
    /// ion heat capacity density (energy/volume/temperature)
    pub rho_ci: f64,
    /// electron-ion transfer coefficient (energy/volume/time/temperature)
    pub omega_ie: f64,
}

#[derive(Debug, Clone)]
pub struct MgdCoefficients {
    pub nx: usize,
    pub ny: usize,
    pub groups: usize,
    /// time step (s)
    pub dt: f64,
    /// light speed (length/time)
    pub light_speed: f64,
    pub layers: Vec<MaterialLayer>,
    /// interior layer boundaries as fractions of the x-extent, strictly
    /// increasing in (0,1); length = layers - 1
    pub layer_boundaries: Vec<f64>,
}

impl MgdCoefficients {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidParam(format!(
                "grid {}x{} too small, need at least 2x2",
                self.nx, self.ny
            )));
        }
        if self.groups == 0 {
            return Err(Error::InvalidParam("need at least one energy group".into()));
        }
        if !(self.dt > 0.0) || !(self.light_speed > 0.0) {
            return Err(Error::InvalidParam("dt and light speed must be > 0".into()));
        }
        if self.layers.is_empty() {
            return Err(Error::InvalidParam("need at least one material layer".into()));
        }
        if self.layer_boundaries.len() + 1 != self.layers.len() {
            return Err(Error::InvalidParam(format!(
                "{} layers need {} boundaries, got {}",
                self.layers.len(),
                self.layers.len() - 1,
                self.layer_boundaries.len()
            )));
        }
        let mut prev = 0.0;
        for &b in &self.layer_boundaries {
            if !(b > prev && b < 1.0) {
                return Err(Error::InvalidParam(
                    "layer boundaries must be strictly increasing in (0,1)".into(),
                ));
            }
            prev = b;
        }
        for (li, l) in self.layers.iter().enumerate() {
            if l.d_group.len() != self.groups
                || l.sigma_p.len() != self.groups
                || l.sigma_b.len() != self.groups
            {
                return Err(Error::InvalidParam(format!(
                    "layer {li}: per-group coefficient lengths must equal {} groups",
                    self.groups
                )));
            }
            for &d in l.d_group.iter().chain([l.d_electron, l.d_ion].iter()) {
                if !(d > 0.0) {
                    return Err(Error::InvalidParam(format!(
                        "layer {li}: diffusion coefficients must be > 0"
                    )));
                }
            }
            if !(l.rho_ce > 0.0 && l.rho_ci > 0.0) {
                return Err(Error::InvalidParam(format!(
                    "layer {li}: heat capacities must be > 0"
                )));
            }
            // zero absorption/scattering/transfer expresses decoupling
            for &s in l.sigma_p.iter().chain(l.sigma_b.iter()) {
                if !(s >= 0.0) {
                    return Err(Error::InvalidParam(format!(
                        "layer {li}: opacities must be >= 0"
                    )));
                }
            }
            if !(l.omega_ie >= 0.0) {
                return Err(Error::InvalidParam(format!(
                    "layer {li}: transfer coefficient must be >= 0"
                )));
            }
        }
        Ok(())
    }

    fn layer_of(&self, ix: usize) -> usize {
        let frac = (ix as f64 + 0.5) / self.nx as f64;
        let mut li = 0;
        for &b in &self.layer_boundaries {
            if frac > b {
                li += 1;
            }
        }
        li
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// uniform coefficients, strongly diagonally dominant blocks
    Smooth,
    /// three material layers with 1e3 diffusion jumps
    Layered,
    /// layered diffusion plus 1e6 absorption contrast and a short time
    /// step; mixes weak/strong coupling rows and defeats plain Jacobi on
    /// the high-diffusion slab
    Stiff,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" => Ok(Preset::Smooth),
            "layered" => Ok(Preset::Layered),
            "stiff" => Ok(Preset::Stiff),
            other => Err(Error::InvalidParam(format!("unknown preset {other}"))),
        }
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Preset::Smooth => write!(f, "smooth"),
            Preset::Layered => write!(f, "layered"),
            Preset::Stiff => write!(f, "stiff"),
        }
    }
}

/// Coefficient sets emulating capsule-implosion-like problem families at
/// desk scale.
pub fn capsule_profile(preset: Preset, nx: usize, ny: usize, groups: usize) -> MgdCoefficients {
    let uniform = |d: f64, sigma: f64, omega: f64| MaterialLayer {
        d_group: vec![d; groups],
        d_electron: d,
        d_ion: d,
        sigma_p: vec![sigma; groups],
        sigma_b: vec![sigma; groups],
        rho_ce: 1.0,
        rho_ci: 1.0,
        omega_ie: omega,
    };
    match preset {
        Preset::Smooth => MgdCoefficients {
            nx,
            ny,
            groups,
            dt: 1e-4,
            light_speed: 10.0,
            layers: vec![uniform(1.0, 100.0, 1e3)],
            layer_boundaries: vec![],
        },
        Preset::Layered => MgdCoefficients {
            nx,
            ny,
            groups,
            dt: 1e-4,
            light_speed: 10.0,
            layers: vec![
                uniform(1.0, 100.0, 1e3),
                uniform(1e3, 100.0, 1e3),
                uniform(1.0, 100.0, 1e3),
            ],
            layer_boundaries: vec![0.4, 0.7],
        },
        Preset::Stiff => MgdCoefficients {
            nx,
            ny,
            groups,
            dt: 1e-4,
            light_speed: 10.0,
            layers: vec![
                uniform(1e3, 1e-4, 1e3),
                uniform(1.0, 1e2, 1e3),
                uniform(1e3, 1e-4, 1e3),
            ],
            layer_boundaries: vec![0.2, 0.8],
        },
    }
}

/// Assembles the five-point flux stencil plus a per-cell diagonal on the
/// unit square, so cells are hx-by-hy with hx = 1/nx, hy = 1/ny.  Face
/// transmissibilities use the harmonic average of the two cell
/// coefficients times face length over cell distance.
fn diffusion_block(
    nx: usize,
    ny: usize,
    d_of_cell: &[f64],
    diag_of_cell: &[f64],
) -> Result<CsrMatrix> {
    let n = nx * ny;
    let idx = |ix: usize, iy: usize| iy * nx + ix;
    let (hx, hy) = (1.0 / nx as f64, 1.0 / ny as f64);
    let (fx, fy) = (hy / hx, hx / hy);
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(5 * n);
    for iy in 0..ny {
        for ix in 0..nx {
            let i = idx(ix, iy);
            let mut diag = diag_of_cell[i];
            let neighbor =
                |j: usize, f: f64, trip: &mut Vec<(usize, usize, f64)>, diag: &mut f64| {
                    let harm =
                        f * 2.0 * d_of_cell[i] * d_of_cell[j] / (d_of_cell[i] + d_of_cell[j]);
                    trip.push((i, j, -harm));
                    *diag += harm;
                };
            if ix > 0 {
                neighbor(idx(ix - 1, iy), fx, &mut triplets, &mut diag);
            }
            if ix + 1 < nx {
                neighbor(idx(ix + 1, iy), fx, &mut triplets, &mut diag);
            }
            if iy > 0 {
                neighbor(idx(ix, iy - 1), fy, &mut triplets, &mut diag);
            }
            if iy + 1 < ny {
                neighbor(idx(ix, iy + 1), fy, &mut triplets, &mut diag);
            }
            triplets.push((i, i, diag));
        }
    }
    CsrMatrix::from_triplets(n, n, &triplets)
}

/// Generates a block system from the coefficients; `seed` drives the
/// per-cell emission slopes and the manufactured solution, and identical
/// inputs produce bitwise-identical systems.
pub fn generate(coef: &MgdCoefficients, seed: u64) -> Result<BlockSystem> {
    coef.validate()?;
    let (nx, ny, g) = (coef.nx, coef.ny, coef.groups);
    let n = nx * ny;
    let c = coef.light_speed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // per-cell layer lookup and coefficient fields
    let layer: Vec<usize> = (0..n).map(|i| coef.layer_of(i % nx)).collect();

    // linearized emission slopes beta_g in [0.5, 1.5), seeded per cell
    let beta: Vec<Vec<f64>> = (0..g)
        .map(|_| (0..n).map(|_| rng.gen_range(0.5..1.5)).collect())
        .collect();

    let field = |f: &dyn Fn(&MaterialLayer) -> f64| -> Vec<f64> {
        (0..n).map(|i| f(&coef.layers[layer[i]])).collect()
    };

    let inv_dt = 1.0 / coef.dt;
    // cell volume on the unit square; all reaction/time terms are
    // volume-weighted, matching the flux scaling of diffusion_block
    let vol = 1.0 / (nx as f64 * ny as f64);

    // radiation group blocks and couplings
    let mut a_groups = Vec::with_capacity(g);
    let mut d_ge = Vec::with_capacity(g);
    let mut d_eg = Vec::with_capacity(g);
    for gi in 0..g {
        let d_field = field(&|l: &MaterialLayer| l.d_group[gi]);
        let sigma_p = field(&|l: &MaterialLayer| l.sigma_p[gi]);
        let sigma_b = field(&|l: &MaterialLayer| l.sigma_b[gi]);
        let diag: Vec<f64> = (0..n).map(|i| vol * (inv_dt + c * sigma_p[i])).collect();
        a_groups.push(diffusion_block(nx, ny, &d_field, &diag)?);
        d_ge.push(DenseVector::new(
            (0..n).map(|i| -vol * c * sigma_b[i] * beta[gi][i]).collect(),
        )?);
        d_eg.push(DenseVector::new(
            (0..n).map(|i| -vol * c * sigma_p[i]).collect(),
        )?);
    }

    // electron block absorbs the emission sum and the ion transfer term
    let omega = field(&|l: &MaterialLayer| l.omega_ie);
    let a_electron = {
        let d_field = field(&|l: &MaterialLayer| l.d_electron);
        let rho_ce = field(&|l: &MaterialLayer| l.rho_ce);
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let mut emission = 0.0;
                for (gi, b) in beta.iter().enumerate() {
                    emission += c * coef.layers[layer[i]].sigma_b[gi] * b[i];
                }
                vol * (rho_ce[i] * inv_dt + emission + omega[i])
            })
            .collect();
        diffusion_block(nx, ny, &d_field, &diag)?
    };

    let a_ion = {
        let d_field = field(&|l: &MaterialLayer| l.d_ion);
        let rho_ci = field(&|l: &MaterialLayer| l.rho_ci);
        let diag: Vec<f64> = (0..n).map(|i| vol * (rho_ci[i] * inv_dt + omega[i])).collect();
        diffusion_block(nx, ny, &d_field, &diag)?
    };

    let d_ei = DenseVector::new((0..n).map(|i| -vol * omega[i]).collect())?;

    // manufactured smooth positive solution, one phase pair per variable
    let mut xstar = Vec::with_capacity(g + 2);
    for _ in 0..g + 2 {
        let (phx, phy): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let v: Vec<f64> = (0..n)
            .map(|i| {
                let (ix, iy) = (i % nx, i / nx);
                let sx = (2.0 * std::f64::consts::PI * (ix as f64 / nx as f64 + phx)).sin();
                let sy = (2.0 * std::f64::consts::PI * (iy as f64 / ny as f64 + phy)).sin();
                1.0 + 0.5 * sx * sy
            })
            .collect();
        xstar.push(DenseVector::new(v)?);
    }

    // rhs = A x* assembled blockwise
    let mut rhs = Vec::with_capacity(g + 2);
    for gi in 0..g {
        let mut r = a_groups[gi].spmv(&xstar[gi])?.into_vec();
        for i in 0..n {
            r[i] += d_ge[gi][i] * xstar[g][i];
        }
        rhs.push(DenseVector::new(r)?);
    }
    {
        let mut r = a_electron.spmv(&xstar[g])?.into_vec();
        for gi in 0..g {
            for i in 0..n {
                r[i] += d_eg[gi][i] * xstar[gi][i];
            }
        }
        for i in 0..n {
            r[i] += d_ei[i] * xstar[g + 1][i];
        }
        rhs.push(DenseVector::new(r)?);
    }
    {
        let mut r = a_ion.spmv(&xstar[g + 1])?.into_vec();
        for i in 0..n {
            r[i] += d_ei[i] * xstar[g][i];
        }
        rhs.push(DenseVector::new(r)?);
    }

    BlockSystem::new(
        a_groups,
        a_electron,
        a_ion,
        d_ge,
        d_eg,
        d_ei.clone(),
        d_ei,
        rhs,
    )
}

pub use crate::block::manifest::{load as load_system, save as save_system};
