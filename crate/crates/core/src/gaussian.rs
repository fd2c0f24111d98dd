//! Gaussian states of N optical modes and the maps that act on them.
//!
//! Quadratures are interleaved as `(x1, p1, x2, p2, ...)` and normalised so
//! that the vacuum has unit variance in every quadrature. The symplectic form
//! is block diagonal with blocks `[[0, 1], [-1, 0]]`, and a physical
//! covariance satisfies `cov + iJ >= 0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_range, Error, Result};

/// Tolerance on the minimum eigenvalue of `cov + iJ` accepted as physical.
pub const UNCERTAINTY_TOLERANCE: f64 = 1e-9;

/// Symplectic form for `n_modes` modes in the unit-vacuum convention.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Smallest eigenvalue of the Hermitian matrix `a + i b` (with `a` symmetric
/// and `b` antisymmetric), via its real embedding `[[a, -b], [b, a]]`.
fn min_hermitian_eigenvalue(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut embed = DMatrix::zeros(2 * n, 2 * n);
    embed.view_mut((0, 0), (n, n)).copy_from(a);
    embed.view_mut((n, n), (n, n)).copy_from(a);
    embed.view_mut((n, 0), (n, n)).copy_from(b);
    embed.view_mut((0, n), (n, n)).copy_from(&(-b));
    SymmetricEigen::new(embed).eigenvalues.min()
}

/// A Gaussian state: mean vector and covariance matrix.
///
/// States are values; every map returns a new state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// The N-mode vacuum: zero mean, identity covariance.
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::NoModes);
        }
        Ok(Self {
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes),
        })
    }

    /// Builds a state from raw moments, rejecting anything that violates the
    /// uncertainty relation.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = cov.nrows();
        if dim == 0 {
            return Err(Error::NoModes);
        }
        if !dim.is_multiple_of(2) || cov.ncols() != dim || mean.len() != dim {
            return Err(Error::Dimension(format!(
                "mean has length {}, covariance is {}x{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        let mut cov = cov;
        symmetrize(&mut cov);
        let state = Self { mean, cov };
        let min_eigenvalue = state.uncertainty_min_eigenvalue();
        if min_eigenvalue < -UNCERTAINTY_TOLERANCE {
            return Err(Error::Unphysical { min_eigenvalue });
        }
        Ok(state)
    }

    /// Skips the uncertainty check; for callers that have validated the
    /// moments analytically (a diagonal state with `V- V+ >= 1` per mode).
    pub(crate) fn from_validated(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        Self { mean, cov }
    }

    pub fn n_modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub(crate) fn check_mode(&self, index: usize) -> Result<()> {
        if index < self.n_modes() {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                index,
                n_modes: self.n_modes(),
            })
        }
    }

    /// Minimum eigenvalue of `cov + iJ`; non-negative for physical states.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.cov, &symplectic_form(self.n_modes()))
    }

    pub fn is_physical(&self) -> bool {
        self.uncertainty_min_eigenvalue() >= -UNCERTAINTY_TOLERANCE
    }

    /// Symplectic eigenvalues in ascending order. All equal 1 for a pure state.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let n = self.n_modes();
        let eig = SymmetricEigen::new(self.cov.clone());
        let sqrt_diag =
            DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
        let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
        // `root * J * root` is antisymmetric; `i` times it is Hermitian with
        // eigenvalues +-nu_k, each appearing twice in the real embedding.
        let m = &root * symplectic_form(n) * &root;
        let dim = 2 * n;
        let mut embed = DMatrix::zeros(2 * dim, 2 * dim);
        embed.view_mut((dim, 0), (dim, dim)).copy_from(&m);
        embed.view_mut((0, dim), (dim, dim)).copy_from(&(-&m));
        let mut values: Vec<f64> = SymmetricEigen::new(embed)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        values.sort_by(|a, b| b.total_cmp(a));
        let mut nus: Vec<f64> = values.iter().take(2 * n).step_by(2).copied().collect();
        nus.sort_by(f64::total_cmp);
        nus
    }

    /// Applies `S` as `mean -> S mean`, `cov -> S cov S^T`.
    pub fn transform(&self, map: &SymplecticMap) -> Result<Self> {
        if map.matrix.nrows() != self.cov.nrows() {
            return Err(Error::Dimension(format!(
                "map acts on {} modes, state has {}",
                map.n_modes(),
                self.n_modes()
            )));
        }
        let s = &map.matrix;
        let mut cov = s * &self.cov * s.transpose();
        symmetrize(&mut cov);
        Ok(Self {
            mean: s * &self.mean,
            cov,
        })
    }

    /// Single-mode squeezer. At `angle = 0` the x variance is multiplied by
    /// `exp(-2r)` and the p variance by `exp(2r)`; `angle` rotates the
    /// squeezing axis.
    pub fn squeeze(&self, mode: usize, r: f64, angle: f64) -> Result<Self> {
        self.check_mode(mode)?;
        self.transform(&SymplecticMap::squeezer(self.n_modes(), mode, r, angle)?)
    }

    /// Phase shift, so that measuring x afterwards measures `x cos(phi) + p sin(phi)`.
    pub fn rotate(&self, mode: usize, phi: f64) -> Result<Self> {
        self.check_mode(mode)?;
        self.transform(&SymplecticMap::phase(self.n_modes(), mode, phi)?)
    }

    /// Beam splitter with amplitude transmittance `t`:
    /// `a' = t a + r b`, `b' = -r a + t b`, `r = sqrt(1 - t^2)`.
    pub fn beamsplitter(&self, mode_a: usize, mode_b: usize, t: f64) -> Result<Self> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        self.transform(&SymplecticMap::beamsplitter(
            self.n_modes(),
            mode_a,
            mode_b,
            t,
        )?)
    }

    /// Pure-loss channel: mixes the mode with vacuum at power transmittance
    /// `eta` and discards the ancilla.
    pub fn attenuate(&self, channel: &LossChannel) -> Result<Self> {
        let mode = channel.mode();
        self.check_mode(mode)?;
        let eta = channel.transmittance_power();
        let amp = eta.sqrt();
        let mut cov = self.cov.clone();
        let mut mean = self.mean.clone();
        for q in [2 * mode, 2 * mode + 1] {
            mean[q] *= amp;
            for k in 0..cov.ncols() {
                cov[(q, k)] *= amp;
            }
            for k in 0..cov.nrows() {
                cov[(k, q)] *= amp;
            }
        }
        cov[(2 * mode, 2 * mode)] += 1.0 - eta;
        cov[(2 * mode + 1, 2 * mode + 1)] += 1.0 - eta;
        symmetrize(&mut cov);
        Ok(Self { mean, cov })
    }

    /// Coherent displacement of one mode.
    pub fn displace(&self, mode: usize, dx: f64, dp: f64) -> Result<Self> {
        self.check_mode(mode)?;
        let mut mean = self.mean.clone();
        mean[2 * mode] += dx;
        mean[2 * mode + 1] += dp;
        Ok(Self {
            mean,
            cov: self.cov.clone(),
        })
    }

    /// Restriction to the listed modes, in the listed order.
    pub fn reduce(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::NoModes);
        }
        for (i, &m) in modes.iter().enumerate() {
            self.check_mode(m)?;
            if modes[..i].contains(&m) {
                return Err(Error::DuplicateMode(m));
            }
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let dim = idx.len();
        let mean = DVector::from_fn(dim, |i, _| self.mean[idx[i]]);
        let cov = DMatrix::from_fn(dim, dim, |i, j| self.cov[(idx[i], idx[j])]);
        Ok(Self { mean, cov })
    }
}

/// A linear symplectic transformation on `2N` quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    matrix: DMatrix<f64>,
}

impl SymplecticMap {
    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Wraps a matrix after checking `S J S^T = J` to 1e-12.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || !dim.is_multiple_of(2) || matrix.ncols() != dim {
            return Err(Error::Dimension(format!(
                "symplectic matrix must be 2N x 2N, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let map = Self { matrix };
        let defect = map.symplectic_defect();
        if defect > 1e-12 {
            return Err(Error::Dimension(format!(
                "matrix is not symplectic (defect {defect:e})"
            )));
        }
        Ok(map)
    }

    fn check_mode(n_modes: usize, index: usize) -> Result<()> {
        if index < n_modes {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange { index, n_modes })
        }
    }

    fn embed_block(n_modes: usize, mode: usize, block: [[f64; 2]; 2]) -> Self {
        let mut matrix = DMatrix::identity(2 * n_modes, 2 * n_modes);
        for (i, row) in block.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                matrix[(2 * mode + i, 2 * mode + j)] = v;
            }
        }
        Self { matrix }
    }

    pub fn squeezer(n_modes: usize, mode: usize, r: f64, angle: f64) -> Result<Self> {
        Self::check_mode(n_modes, mode)?;
        if !r.is_finite() || !angle.is_finite() {
            return Err(Error::OutOfRange {
                name: "squeeze parameter",
                value: if r.is_finite() { angle } else { r },
                range: "finite reals",
            });
        }
        // R(angle) diag(e^-r, e^r) R(angle)^T
        let (s, c) = angle.sin_cos();
        let (a, b) = ((-r).exp(), r.exp());
        let block = [
            [a * c * c + b * s * s, (a - b) * c * s],
            [(a - b) * c * s, a * s * s + b * c * c],
        ];
        Ok(Self::embed_block(n_modes, mode, block))
    }

    pub fn phase(n_modes: usize, mode: usize, phi: f64) -> Result<Self> {
        Self::check_mode(n_modes, mode)?;
        if !phi.is_finite() {
            return Err(Error::OutOfRange {
                name: "phase",
                value: phi,
                range: "finite reals",
            });
        }
        let (s, c) = phi.sin_cos();
        Ok(Self::embed_block(n_modes, mode, [[c, s], [-s, c]]))
    }

    pub fn beamsplitter(n_modes: usize, mode_a: usize, mode_b: usize, t: f64) -> Result<Self> {
        Self::check_mode(n_modes, mode_a)?;
        Self::check_mode(n_modes, mode_b)?;
        if mode_a == mode_b {
            return Err(Error::DuplicateMode(mode_a));
        }
        let t = check_range("beam splitter transmittance t", t, 0.0, 1.0, "[0, 1]")?;
        let r = (1.0 - t * t).sqrt();
        let mut matrix = DMatrix::identity(2 * n_modes, 2 * n_modes);
        for q in 0..2 {
            let (a, b) = (2 * mode_a + q, 2 * mode_b + q);
            matrix[(a, a)] = t;
            matrix[(a, b)] = r;
            matrix[(b, a)] = -r;
            matrix[(b, b)] = t;
        }
        Ok(Self { matrix })
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The map that applies `self` first and then `next`.
    pub fn then(&self, next: &SymplecticMap) -> Result<Self> {
        if next.matrix.nrows() != self.matrix.nrows() {
            return Err(Error::Dimension("cannot compose maps of different size".into()));
        }
        Ok(Self {
            matrix: &next.matrix * &self.matrix,
        })
    }

    /// `max |S J S^T - J|`.
    pub fn symplectic_defect(&self) -> f64 {
        let j = symplectic_form(self.n_modes());
        (&self.matrix * &j * self.matrix.transpose() - j).amax()
    }
}

/// Pure-loss channel on one mode with power transmittance `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossChannel {
    mode: usize,
    transmittance_power: f64,
}

impl LossChannel {
    pub fn new(mode: usize, transmittance_power: f64) -> Result<Self> {
        let eta = check_range(
            "loss channel power transmittance",
            transmittance_power,
            0.0,
            1.0,
            "[0, 1]",
        )?;
        Ok(Self {
            mode,
            transmittance_power: eta,
        })
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn transmittance_power(&self) -> f64 {
        self.transmittance_power
    }

    pub fn transmittance_amplitude(&self) -> f64 {
        self.transmittance_power.sqrt()
    }
}
