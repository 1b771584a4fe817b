//! The theta-labelled thermal vacuum and the thermodynamics computed on it.
//!
//! Per mode the vacuum is `sum_n sqrt(W_n) |n, n~>` with
//! `W_n = sinh^{2n}(theta) / cosh^{2(n+1)}(theta)`. Minimizing the free energy
//! `E sinh^2(theta) - S / beta` over theta fixes the condensate number to the
//! Bose occupation `1 / (e^{beta E} - 1)`, and with that choice vacuum
//! expectations coincide with Gibbs traces.
//!
//! Units: `k_B = hbar = 1`, so `beta` is an inverse energy.

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use thiserror::Error;

use crate::fock::{exp_apply, matmul, norm, FockError, FockOperator, FockSpace, Mode, C64};
use crate::hopf::{bogoliubov_generator, HopfError};

/// Largest truncated tail mass accepted by [`build_vacuum`].
pub const VACUUM_TAIL_TOL: f64 = 1e-10;
/// Largest Boltzmann weight allowed on truncation-touching states.
pub const GIBBS_TAIL_TOL: f64 = 1e-12;

const MINIMIZER_MAX_ITERATIONS: usize = 400;
// exp() overflows past this exponent
const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermalError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("mode energy must be positive and finite, got {0}")]
    InvalidEnergy(f64),
    #[error("mode angle must be finite and non-negative, got {0}")]
    InvalidTheta(f64),
    #[error("inverse temperature must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("truncated tail {tail:.3e} exceeds {tolerance:.1e}; use n_max >= {suggested_n_max}")]
    TruncationTail { tail: f64, tolerance: f64, suggested_n_max: usize },
    #[error("Boltzmann weight {tail:.3e} on the truncation edge exceeds {tolerance:.1e}; raise n_max")]
    GibbsTail { tail: f64, tolerance: f64 },
    #[error("mode index {index} out of range for {count} modes")]
    ModeIndex { index: usize, count: usize },
    #[error("expected a single-mode vacuum, got {0} modes")]
    NotSingleMode(usize),
    #[error("minimizer did not converge after {iterations} iterations (gradient residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("analytic continuation overflows: beta * spread(H) = {exponent:.1}; use a smaller n_max or beta")]
    Overflow { exponent: f64 },
    #[error("the Hamiltonian must be diagonal in the number basis")]
    HamiltonianNotDiagonal,
    #[error("observable acts on the tilde factor")]
    MixesTilde,
    #[error("at least {needed} grid points are required, got {got}")]
    GridTooSmall { needed: usize, got: usize },
    #[error("path arrays have different lengths")]
    LengthMismatch,
    #[error("time grid is not uniform")]
    NonUniformGrid,
}

/// One mode: its energy `E_k` and its Bogoliubov angle `theta_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    energy: f64,
    theta: f64,
}

impl ModeSpec {
    pub fn new(energy: f64, theta: f64) -> Result<Self, ThermalError> {
        if !(energy > 0.0) || !energy.is_finite() {
            return Err(ThermalError::InvalidEnergy(energy));
        }
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(ThermalError::InvalidTheta(theta));
        }
        Ok(Self { energy, theta })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `sinh^2 theta`.
    pub fn occupation(&self) -> f64 {
        condensate_occupation(self.theta)
    }
}

/// `sinh^2 theta`, the order parameter of one mode.
pub fn condensate_occupation(theta: f64) -> f64 {
    let s = theta.sinh();
    s * s
}

/// `W_n = tanh^{2n}(theta) / cosh^2(theta)`.
pub fn condensate_weight(theta: f64, n: usize) -> f64 {
    let c = theta.cosh();
    theta.tanh().powi(2 * n as i32) / (c * c)
}

/// Weights `W_0 ..= W_{n_max}`.
pub fn condensate_weights(theta: f64, n_max: usize) -> Vec<f64> {
    let c = theta.cosh();
    let ratio = theta.tanh().powi(2);
    let mut w = Vec::with_capacity(n_max + 1);
    let mut current = 1.0 / (c * c);
    for _ in 0..=n_max {
        w.push(current);
        current *= ratio;
    }
    w
}

/// Mass of the weights beyond `n_max`: `tanh^{2(n_max+1)} theta`.
pub fn tail_bound(theta: f64, n_max: usize) -> f64 {
    theta.tanh().powi(2 * (n_max as i32 + 1))
}

/// Smallest `n_max` with `tail_bound(theta, n_max) <= tolerance`.
pub fn suggested_n_max(theta: f64, tolerance: f64) -> usize {
    let t2 = theta.tanh().powi(2);
    if t2 == 0.0 {
        return 1;
    }
    let needed = (tolerance.ln() / t2.ln()).ceil() - 1.0;
    (needed.max(1.0) as usize).max(1)
}

/// `(1 + N) ln(1 + N) - N ln N`, the entropy of a geometric condensate.
pub fn entropy_closed_form(occupation: f64) -> f64 {
    if occupation <= 0.0 {
        return 0.0;
    }
    (1.0 + occupation) * occupation.ln_1p() - occupation * occupation.ln()
}

/// `1 / (e^{beta E} - 1)`.
pub fn bose_occupation(beta: f64, energy: f64) -> f64 {
    (beta * energy).exp_m1().recip()
}

/// The inverse temperature tied to `theta` by the Bose relation; infinite at
/// `theta = 0`.
pub fn beta_for_theta(theta: f64, energy: f64) -> f64 {
    condensate_occupation(theta).recip().ln_1p() / energy
}

/// Free energy of one mode as a function of its angle.
pub fn mode_free_energy(energy: f64, beta: f64, theta: f64) -> f64 {
    let n = condensate_occupation(theta);
    energy * n - entropy_closed_form(n) / beta
}

/// `d F / d theta = sinh(2 theta) (E - ln(1 + 1/N) / beta)`.
pub fn mode_free_energy_gradient(energy: f64, beta: f64, theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    (2.0 * theta).sinh() * reduced_gradient(energy, beta, theta)
}

// gradient with the sinh(2 theta) factor removed; increasing in theta
fn reduced_gradient(energy: f64, beta: f64, theta: f64) -> f64 {
    energy - condensate_occupation(theta).recip().ln_1p() / beta
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMinimum {
    pub theta: f64,
    pub occupation: f64,
    pub iterations: usize,
    pub gradient: f64,
}

/// Minimize the free energy of one mode over `theta >= 0`.
///
/// Safeguarded Newton iteration on the stationarity condition, using the
/// analytic gradient and keeping a sign bracket so that a bad Newton step
/// falls back to bisection.
pub fn minimize_mode(energy: f64, beta: f64) -> Result<ModeMinimum, ThermalError> {
    check_beta(beta)?;
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(ThermalError::InvalidEnergy(energy));
    }
    let h = |t: f64| reduced_gradient(energy, beta, t);
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while h(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e3 {
            return Err(ThermalError::NonConvergence { iterations: 0, residual: h(hi) });
        }
    }
    let mut theta = 0.5 * (lo + hi);
    for iteration in 1..=MINIMIZER_MAX_ITERATIONS {
        let value = h(theta);
        if value == 0.0 {
            return Ok(finish(energy, beta, theta, iteration));
        }
        if value < 0.0 {
            lo = theta;
        } else {
            hi = theta;
        }
        let slope = 4.0 / (beta * (2.0 * theta).sinh());
        let newton = theta - value / slope;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - theta).abs() <= 4.0 * f64::EPSILON * theta || hi - lo <= f64::EPSILON * hi {
            return Ok(finish(energy, beta, next, iteration));
        }
        theta = next;
    }
    Err(ThermalError::NonConvergence {
        iterations: MINIMIZER_MAX_ITERATIONS,
        residual: mode_free_energy_gradient(energy, beta, theta).abs(),
    })
}

fn finish(energy: f64, beta: f64, theta: f64, iterations: usize) -> ModeMinimum {
    ModeMinimum {
        theta,
        occupation: condensate_occupation(theta),
        iterations,
        gradient: mode_free_energy_gradient(energy, beta, theta),
    }
}

/// Vacuum whose angles minimize the free energy of every mode at `beta`.
///
/// Modes are minimized independently (in parallel); the truncation is the
/// smallest one meeting [`VACUUM_TAIL_TOL`] for every mode.
pub fn minimize_free_energy(energies: &[f64], beta: f64) -> Result<ThermalVacuum, ThermalError> {
    let minima: Vec<ModeMinimum> = energies.par_iter().map(|&e| minimize_mode(e, beta)).collect::<Result<_, _>>()?;
    let modes = energies.iter().zip(&minima).map(|(&e, m)| ModeSpec::new(e, m.theta)).collect::<Result<Vec<_>, _>>()?;
    let n_max = modes.iter().map(|m| suggested_n_max(m.theta(), VACUUM_TAIL_TOL)).max().unwrap_or(1);
    build_vacuum(&modes, n_max)
}

fn check_beta(beta: f64) -> Result<(), ThermalError> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(ThermalError::InvalidBeta(beta));
    }
    Ok(())
}

/// Per-mode condensate numbers `sinh^2 theta_k`; the same for `A` and `A~`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderParameter {
    pub values: Vec<f64>,
}

/// The vacuum `|0(theta)>` as a product over modes, truncated at `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalVacuum {
    modes: Vec<ModeSpec>,
    n_max: usize,
    weights: Vec<Vec<f64>>,
}

/// Build the vacuum, refusing truncations that drop more than
/// [`VACUUM_TAIL_TOL`] of the weight of any mode.
pub fn build_vacuum(modes: &[ModeSpec], n_max: usize) -> Result<ThermalVacuum, ThermalError> {
    FockSpace::single(n_max)?;
    for mode in modes {
        let tail = tail_bound(mode.theta(), n_max);
        if tail > VACUUM_TAIL_TOL {
            return Err(ThermalError::TruncationTail {
                tail,
                tolerance: VACUUM_TAIL_TOL,
                suggested_n_max: suggested_n_max(mode.theta(), VACUUM_TAIL_TOL),
            });
        }
    }
    let weights = modes.iter().map(|m| condensate_weights(m.theta(), n_max)).collect();
    Ok(ThermalVacuum { modes: modes.to_vec(), n_max, weights })
}

/// Closed-form amplitudes `sum_n sqrt(W_n) |n, n~>` on the doubled space,
/// with no tail check.
pub fn condensate_amplitudes(theta: f64, n_max: usize) -> Result<Array1<C64>, ThermalError> {
    let space = FockSpace::doubled(n_max)?;
    let mut v = Array1::zeros(space.dim());
    for (n, w) in condensate_weights(theta, n_max).into_iter().enumerate() {
        v[space.pair_index(n, n)] = C64::new(w.sqrt(), 0.0);
    }
    Ok(v)
}

/// `exp(i theta G)|0, 0~>` on the truncated doubled space, by exponential
/// action on the vector.
pub fn vacuum_by_generator(theta: f64, n_max: usize) -> Result<Array1<C64>, ThermalError> {
    let space = FockSpace::doubled(n_max)?;
    let g = bogoliubov_generator(space).map_err(|e| match e {
        HopfError::Fock(f) => ThermalError::Fock(f),
        _ => ThermalError::InvalidTheta(theta),
    })?;
    Ok(exp_apply(&g.scale(C64::new(0.0, theta)), &space.basis_vector(0))?)
}

/// Largest componentwise gap between [`vacuum_by_generator`] and
/// [`condensate_amplitudes`].
pub fn reconstruction_residual(theta: f64, n_max: usize) -> Result<f64, ThermalError> {
    let by_generator = vacuum_by_generator(theta, n_max)?;
    let closed = condensate_amplitudes(theta, n_max)?;
    Ok(max_abs(&(&by_generator - &closed)))
}

impl ThermalVacuum {
    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// The doubled space carrying one mode of this vacuum.
    pub fn mode_space(&self) -> FockSpace {
        FockSpace::doubled(self.n_max).expect("n_max validated at construction")
    }

    pub fn weights(&self, k: usize) -> Result<&[f64], ThermalError> {
        self.check_mode(k)?;
        Ok(&self.weights[k])
    }

    pub fn tail(&self, k: usize) -> Result<f64, ThermalError> {
        self.check_mode(k)?;
        Ok(tail_bound(self.modes[k].theta(), self.n_max))
    }

    /// Amplitude matrix `psi[n, m]` of mode `k` (diagonal for this vacuum).
    pub fn state_matrix(&self, k: usize) -> Result<Array2<C64>, ThermalError> {
        let w = self.weights(k)?;
        let mut psi = Array2::zeros((self.n_max + 1, self.n_max + 1));
        for (n, &wn) in w.iter().enumerate() {
            psi[[n, n]] = C64::new(wn.sqrt(), 0.0);
        }
        Ok(psi)
    }

    /// State vector of mode `k` on its doubled space.
    pub fn state_vector(&self, k: usize) -> Result<Array1<C64>, ThermalError> {
        let psi = self.state_matrix(k)?;
        Ok(Array1::from_iter(psi.iter().copied()))
    }

    /// `<0(theta)| (O (x) 1) |0(theta)>` for a single-mode operator on mode `k`,
    /// evaluated as `Tr(psi^dag O psi)`.
    pub fn expectation_on_mode(&self, k: usize, op: &FockOperator) -> Result<C64, ThermalError> {
        let space = op.space();
        if space.is_doubled() {
            return Err(FockError::AlreadyDoubled.into());
        }
        if space.n_max() != self.n_max {
            return Err(FockError::SpaceMismatch { left: space, right: self.mode_space().factor() }.into());
        }
        let psi = self.state_matrix(k)?;
        let o_psi = matmul(op.matrix(), &psi);
        Ok(psi.iter().zip(o_psi.iter()).map(|(p, q)| p.conj() * q).sum())
    }

    /// Reduced density matrix of the plain factor of mode `k`.
    pub fn reduced_density(&self, k: usize) -> Result<Array2<C64>, ThermalError> {
        let psi = self.state_matrix(k)?;
        let psi_dag = psi.t().mapv(|z| z.conj());
        Ok(matmul(&psi, &psi_dag))
    }

    /// `<A_k^dag A_k>` from the state vector.
    pub fn condensate_number(&self, k: usize) -> Result<f64, ThermalError> {
        let n = FockOperator::number(self.mode_space().factor(), Mode::Plain)?;
        Ok(self.expectation_on_mode(k, &n)?.re)
    }

    /// `sum_n n^power W_n` for mode `k`.
    pub fn weighted_moment(&self, k: usize, power: i32) -> Result<f64, ThermalError> {
        Ok(self.weights(k)?.iter().enumerate().map(|(n, w)| (n as f64).powi(power) * w).sum())
    }

    pub fn order_parameter(&self) -> OrderParameter {
        OrderParameter { values: self.modes.iter().map(ModeSpec::occupation).collect() }
    }

    /// `-sum_n W_n ln W_n`, summed over modes.
    pub fn entropy_expectation(&self) -> f64 {
        self.weights.iter().map(|w| w.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum::<f64>()).sum()
    }

    /// The same entropy as the expectation of the entropy operator
    /// `S_A = -(A^dag A ln sinh^2 theta - A A^dag ln cosh^2 theta)`.
    pub fn entropy_operator_expectation(&self) -> Result<f64, ThermalError> {
        let mut total = 0.0;
        for (k, mode) in self.modes.iter().enumerate() {
            if mode.theta() == 0.0 {
                // pure |0,0~>: no A quanta, and A A^dag has weight ln cosh^2 0 = 0
                continue;
            }
            let op = entropy_operator(mode.theta(), self.mode_space().factor())?;
            total += self.expectation_on_mode(k, &op)?.re;
        }
        Ok(total)
    }

    /// `sum_k E_k sinh^2 theta_k - S / beta`.
    pub fn free_energy(&self, beta: f64) -> Result<f64, ThermalError> {
        check_beta(beta)?;
        let energy: f64 = self.modes.iter().map(|m| m.energy() * m.occupation()).sum();
        Ok(energy - self.entropy_expectation() / beta)
    }

    fn check_mode(&self, k: usize) -> Result<(), ThermalError> {
        if k >= self.modes.len() {
            return Err(ThermalError::ModeIndex { index: k, count: self.modes.len() });
        }
        Ok(())
    }
}

/// Single-mode entropy operator for `theta > 0`.
pub fn entropy_operator(theta: f64, space: FockSpace) -> Result<FockOperator, ThermalError> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(ThermalError::InvalidTheta(theta));
    }
    let a = FockOperator::annihilator(space, Mode::Plain)?;
    let ln_s2 = condensate_occupation(theta).ln();
    let ln_c2 = theta.cosh().powi(2).ln();
    let n = a.adjoint().compose(&a)?;
    let n_plus = a.compose(&a.adjoint())?;
    Ok(n_plus.scale_real(ln_c2).try_sub(&n.scale_real(ln_s2))?)
}

/// Single-mode overlap `sum_n sqrt(W_n(theta) W_n(theta'))`.
pub fn vacuum_overlap(theta: f64, theta_prime: f64, n_max: usize) -> f64 {
    condensate_weights(theta, n_max)
        .iter()
        .zip(condensate_weights(theta_prime, n_max))
        .map(|(w, v)| (w * v).sqrt())
        .sum()
}

/// Overlap of two product vacua, mode by mode.
pub fn product_overlap(angles: &[(f64, f64)], n_max: usize) -> f64 {
    angles.iter().map(|&(t, tp)| vacuum_overlap(t, tp, n_max)).product()
}

/// `exp(-beta H) / Z` on a truncated space.
#[derive(Debug, Clone)]
pub struct GibbsEnsemble {
    hamiltonian: FockOperator,
    beta: f64,
    density: Array2<C64>,
    tail: f64,
}

impl GibbsEnsemble {
    pub fn new(hamiltonian: FockOperator, beta: f64) -> Result<Self, ThermalError> {
        check_beta(beta)?;
        if !hamiltonian.is_finite() {
            return Err(FockError::NonFinite.into());
        }
        let space = hamiltonian.space();
        let density = if hamiltonian.is_diagonal() {
            let h: Vec<f64> = (0..space.dim()).map(|i| hamiltonian.entry(i, i).re).collect();
            let floor = h.iter().copied().fold(f64::INFINITY, f64::min);
            let boltzmann: Vec<f64> = h.iter().map(|&e| (-beta * (e - floor)).exp()).collect();
            let z: f64 = boltzmann.iter().sum();
            let mut rho = Array2::zeros((space.dim(), space.dim()));
            for (i, b) in boltzmann.into_iter().enumerate() {
                rho[[i, i]] = C64::new(b / z, 0.0);
            }
            rho
        } else {
            let unnormalized = crate::fock::exp_operator(&hamiltonian.scale_real(-beta))?;
            let z: C64 = (0..space.dim()).map(|i| unnormalized.entry(i, i)).sum();
            unnormalized.into_matrix().mapv(|x| x / z)
        };
        let tail = (0..space.dim()).filter(|&i| !space.is_interior(i)).map(|i| density[[i, i]].re).sum();
        Ok(Self { hamiltonian, beta, density, tail })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn hamiltonian(&self) -> &FockOperator {
        &self.hamiltonian
    }

    pub fn density(&self) -> &Array2<C64> {
        &self.density
    }

    /// Boltzmann weight sitting on basis states at the truncation level.
    pub fn truncation_tail(&self) -> f64 {
        self.tail
    }

    fn check_tail(&self) -> Result<(), ThermalError> {
        if self.tail > GIBBS_TAIL_TOL {
            return Err(ThermalError::GibbsTail { tail: self.tail, tolerance: GIBBS_TAIL_TOL });
        }
        Ok(())
    }

    /// `Tr(rho O)` as a complex number.
    pub fn trace_with(&self, obs: &FockOperator) -> Result<C64, ThermalError> {
        self.check_tail()?;
        if obs.space() != self.hamiltonian.space() {
            return Err(FockError::SpaceMismatch { left: obs.space(), right: self.hamiltonian.space() }.into());
        }
        let prod = matmul(obs.matrix(), &self.density);
        Ok((0..prod.nrows()).map(|i| prod[[i, i]]).sum())
    }

    /// `Tr(e^{-beta H} O) / Tr(e^{-beta H})`, real part.
    pub fn average(&self, obs: &FockOperator) -> Result<f64, ThermalError> {
        Ok(self.trace_with(obs)?.re)
    }
}

pub fn gibbs_average(ens: &GibbsEnsemble, obs: &FockOperator) -> Result<f64, ThermalError> {
    ens.average(obs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmsReport {
    /// `<O P(t)>`
    pub lhs: C64,
    /// `<P(t - i beta) O>`
    pub rhs: C64,
    pub residual: f64,
}

/// Evaluate both sides of `<O P(t)> = <P(t - i beta) O>`, continuing
/// `P(z) = e^{iHz} P e^{-iHz}` exactly in the eigenbasis of a diagonal `H`.
pub fn kms_check(ens: &GibbsEnsemble, o: &FockOperator, p: &FockOperator, t: f64) -> Result<KmsReport, ThermalError> {
    let h_op = ens.hamiltonian();
    if !h_op.is_diagonal() {
        return Err(ThermalError::HamiltonianNotDiagonal);
    }
    let dim = h_op.space().dim();
    let h: Vec<f64> = (0..dim).map(|i| h_op.entry(i, i).re).collect();
    let spread = h.iter().copied().fold(f64::NEG_INFINITY, f64::max) - h.iter().copied().fold(f64::INFINITY, f64::min);
    let exponent = ens.beta() * spread;
    if exponent > MAX_EXPONENT {
        return Err(ThermalError::Overflow { exponent });
    }
    let evolved = |z_re: f64, z_im: f64| -> Result<FockOperator, ThermalError> {
        // e^{i (h_j - h_k) z} with z = z_re + i z_im
        let m = Array2::from_shape_fn((dim, dim), |(j, k)| {
            let gap = h[j] - h[k];
            p.entry(j, k) * C64::new(-gap * z_im, gap * z_re).exp()
        });
        Ok(FockOperator::from_matrix(p.space(), m)?)
    };
    let lhs = ens.trace_with(&o.compose(&evolved(t, 0.0)?)?)?;
    let rhs = ens.trace_with(&evolved(t, -ens.beta())?.compose(o)?)?;
    Ok(KmsReport { lhs, rhs, residual: (lhs - rhs).norm() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KroneckerTrace {
    /// `sum_n <n, n~| (O (x) 1) |n, n~>`
    pub doubled_basis_sum: C64,
    /// `sum_n <n| O |n>`
    pub direct_trace: C64,
}

impl KroneckerTrace {
    pub fn is_exact(&self) -> bool {
        self.doubled_basis_sum == self.direct_trace
    }
}

/// Trace of a plain-factor observable read off the doubled diagonal
/// `|n, n~>`, next to the ordinary trace.
///
/// Accepts a single-mode operator (lifted as `O (x) 1`) or a doubled one that
/// must already have that form.
pub fn kronecker_trace(obs: &FockOperator) -> Result<KroneckerTrace, ThermalError> {
    let space = obs.space();
    let (single, lifted) = if space.is_doubled() {
        let levels = space.levels();
        let block =
            Array2::from_shape_fn((levels, levels), |(r, c)| obs.entry(space.pair_index(r, 0), space.pair_index(c, 0)));
        let single = FockOperator::from_matrix(space.factor(), block)?;
        let lifted = single.lift(Mode::Plain)?;
        if lifted != *obs {
            return Err(ThermalError::MixesTilde);
        }
        (single, lifted)
    } else {
        let lifted = obs.lift(Mode::Plain)?;
        (obs.clone(), lifted)
    };
    let doubled = lifted.space();
    let mut doubled_basis_sum = C64::new(0.0, 0.0);
    let mut direct_trace = C64::new(0.0, 0.0);
    for n in 0..doubled.levels() {
        let i = doubled.pair_index(n, n);
        doubled_basis_sum += lifted.entry(i, i);
        direct_trace += single.entry(n, n);
    }
    Ok(KroneckerTrace { doubled_basis_sum, direct_trace })
}

/// The antiunitary `J`: complex conjugation followed by the factor swap.
#[derive(Debug, Clone, Copy)]
pub struct ModularConjugation {
    space: FockSpace,
}

impl ModularConjugation {
    pub fn new(space: FockSpace) -> Result<Self, ThermalError> {
        if !space.is_doubled() {
            return Err(FockError::NotDoubled.into());
        }
        Ok(Self { space })
    }

    fn swap(&self, i: usize) -> usize {
        let (n, m) = self.space.occupations(i);
        self.space.pair_index(m, n)
    }

    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        Array1::from_shape_fn(v.len(), |i| v[self.swap(i)].conj())
    }

    /// `J X J`.
    pub fn conjugate_operator(&self, x: &FockOperator) -> FockOperator {
        let dim = self.space.dim();
        let m = Array2::from_shape_fn((dim, dim), |(r, c)| x.entry(self.swap(r), self.swap(c)).conj());
        FockOperator::from_matrix(self.space, m).expect("same shape")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModularReport {
    pub theta: f64,
    /// Tied to theta by the Bose relation; infinite at `theta = 0`.
    pub beta: f64,
    pub j_squared_exact: bool,
    pub vacuum_fixed_residual: f64,
    pub hbar_annihilates_residual: f64,
    pub hbar_odd_residual: f64,
    /// Residual of `J e^{-beta Hbar/2} M |0> = M^dag |0>` for `M = A`.
    pub relation_residual_a: f64,
    /// The same for `M = A^dag`.
    pub relation_residual_a_dag: f64,
    /// Largest residual over `M` in `A^2, A^dag A, A A^dag, (A^dag)^2`.
    pub relation_residual_degree_two: f64,
}

impl ModularReport {
    /// The first identity whose residual exceeds its tolerance, if any.
    pub fn first_failure(&self, exact_tol: f64, relation_tol: f64) -> Option<(&'static str, f64)> {
        if !self.j_squared_exact {
            return Some(("J^2 = 1", f64::NAN));
        }
        let checks = [
            ("J|0(theta)> = |0(theta)>", self.vacuum_fixed_residual, exact_tol),
            ("Hbar|0(theta)> = 0", self.hbar_annihilates_residual, exact_tol),
            ("J Hbar J = -Hbar", self.hbar_odd_residual, exact_tol),
            ("modular relation, M = A", self.relation_residual_a, relation_tol),
            ("modular relation, M = A^dag", self.relation_residual_a_dag, relation_tol),
            ("modular relation, degree two", self.relation_residual_degree_two, relation_tol),
        ];
        checks.into_iter().find(|(_, r, tol)| !(r <= tol)).map(|(name, r, _)| (name, r))
    }
}

/// Modular conjugation identities on a single-mode vacuum.
///
/// `Hbar = E (A^dag A - A~^dag A~)`, and `beta` follows from theta through the
/// Bose relation. For operators lowering `n - m` the modular relation is
/// checked in the equivalent form `M|0> = e^{beta Hbar/2} J M^dag|0>`, which
/// stays finite at `theta = 0` where the inverse temperature is infinite.
pub fn modular_checks(v: &ThermalVacuum) -> Result<ModularReport, ThermalError> {
    if v.modes().len() != 1 {
        return Err(ThermalError::NotSingleMode(v.modes().len()));
    }
    let mode = v.modes()[0];
    let energy = mode.energy();
    let theta = mode.theta();
    let beta = beta_for_theta(theta, energy);
    let space = v.mode_space();
    let j = ModularConjugation::new(space)?;
    let psi = v.state_vector(0)?;

    let j_squared_exact = j.apply(&j.apply(&psi)) == psi
        && (0..space.dim()).all(|i| {
            let e = space.basis_vector(i).mapv(|z| z * C64::new(0.5, -1.5));
            j.apply(&j.apply(&e)) == e
        });
    let vacuum_fixed_residual = max_abs(&(&j.apply(&psi) - &psi));

    let hbar = FockOperator::number(space, Mode::Plain)?
        .try_sub(&FockOperator::number(space, Mode::Tilde)?)?
        .scale_real(energy);
    let hbar_annihilates_residual = max_abs(&hbar.apply(&psi)?);
    let hbar_odd_residual = j.conjugate_operator(&hbar).max_abs_diff(&-&hbar)?;

    let a = FockOperator::annihilator(space, Mode::Plain)?;
    let a_dag = a.adjoint();
    let relation = |m: &FockOperator| modular_relation_residual(v, m, beta);
    let relation_residual_a = relation(&a)?;
    let relation_residual_a_dag = relation(&a_dag)?;
    let mut relation_residual_degree_two = 0.0f64;
    for m in [a.compose(&a)?, a_dag.compose(&a)?, a.compose(&a_dag)?, a_dag.compose(&a_dag)?] {
        relation_residual_degree_two = relation_residual_degree_two.max(relation(&m)?);
    }

    Ok(ModularReport {
        theta,
        beta,
        j_squared_exact,
        vacuum_fixed_residual,
        hbar_annihilates_residual,
        hbar_odd_residual,
        relation_residual_a,
        relation_residual_a_dag,
        relation_residual_degree_two,
    })
}

/// Interior residual of `J e^{-beta Hbar/2} M |0> = M^dag |0>` on a
/// single-mode vacuum at an arbitrary inverse temperature.
pub fn modular_relation_residual(v: &ThermalVacuum, m: &FockOperator, beta: f64) -> Result<f64, ThermalError> {
    if v.modes().len() != 1 {
        return Err(ThermalError::NotSingleMode(v.modes().len()));
    }
    let space = v.mode_space();
    let beta_e = beta * v.modes()[0].energy();
    let j = ModularConjugation::new(space)?;
    let psi = v.state_vector(0)?;
    let m_psi = m.apply(&psi)?;
    let m_dag_psi = m.adjoint().apply(&psi)?;
    // Evaluate whichever of the two equivalent forms only ever scales by
    // factors <= 1; at beta = infinity the other form is 0 * infinity.
    let diff = if gap_shift(&space, m) >= 0 {
        &j.apply(&modular_scale(&space, &m_psi, beta_e, -0.5)) - &m_dag_psi
    } else {
        &modular_scale(&space, &j.apply(&m_dag_psi), beta_e, 0.5) - &m_psi
    };
    Ok(max_abs_interior(&space, &diff))
}

// Multiply |n, m~> components by exp(sign * beta_e * (n - m)), skipping zeros.
fn modular_scale(space: &FockSpace, v: &Array1<C64>, beta_e: f64, sign: f64) -> Array1<C64> {
    let mut out = v.clone();
    for (i, z) in out.iter_mut().enumerate() {
        if z.re == 0.0 && z.im == 0.0 {
            continue;
        }
        let (n, m) = space.occupations(i);
        if n != m {
            *z *= (sign * beta_e * (n as f64 - m as f64)).exp();
        }
    }
    out
}

// Change of n - m produced by an operator, read from its first nonzero entry.
fn gap_shift(space: &FockSpace, op: &FockOperator) -> i64 {
    let gap = |i: usize| {
        let (n, m) = space.occupations(i);
        n as i64 - m as i64
    };
    op.matrix().indexed_iter().find(|(_, z)| z.norm() != 0.0).map(|((r, c), _)| gap(r) - gap(c)).unwrap_or(0)
}

fn max_abs(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn max_abs_interior(space: &FockSpace, v: &Array1<C64>) -> f64 {
    v.iter().enumerate().filter(|&(i, _)| space.is_interior(i)).map(|(_, z)| z.norm()).fold(0.0, f64::max)
}

/// Largest mismatch between `E dN/dt` and `(1/beta) dS/dt` over the interior
/// of a uniform time grid, both rates by central differences.
///
/// The entropy at each sample is the weight sum of a vacuum truncated so that
/// the dropped tail is below `1e-16`.
pub fn heat_relation_residual(times: &[f64], thetas: &[f64], betas: &[f64], energy: f64) -> Result<f64, ThermalError> {
    if times.len() != thetas.len() || times.len() != betas.len() {
        return Err(ThermalError::LengthMismatch);
    }
    if times.len() < 3 {
        return Err(ThermalError::GridTooSmall { needed: 3, got: times.len() });
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-300)) {
        return Err(ThermalError::NonUniformGrid);
    }
    for &b in betas {
        check_beta(b)?;
    }
    let mut occupation = Vec::with_capacity(thetas.len());
    let mut entropy = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let mode = ModeSpec::new(energy, theta)?;
        let vacuum = build_vacuum(&[mode], suggested_n_max(theta, 1e-16))?;
        occupation.push(mode.occupation());
        entropy.push(vacuum.entropy_expectation());
    }
    let mut worst = 0.0f64;
    for i in 1..thetas.len() - 1 {
        let d_energy = energy * (occupation[i + 1] - occupation[i - 1]) / (2.0 * dt);
        let d_heat = (entropy[i + 1] - entropy[i - 1]) / (2.0 * dt) / betas[i];
        worst = worst.max((d_energy - d_heat).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatConvergence {
    pub coarse_residual: f64,
    pub fine_residual: f64,
    /// `coarse / fine`; about 4 for a second-order scheme.
    pub ratio: f64,
    pub order: f64,
}

/// Run [`heat_relation_residual`] on a path `theta(t)` with beta from the
/// Bose relation, at `points` samples and again with the step halved.
pub fn heat_relation_convergence(
    theta_path: impl Fn(f64) -> f64,
    t_start: f64,
    t_end: f64,
    points: usize,
    energy: f64,
) -> Result<HeatConvergence, ThermalError> {
    let run = |count: usize| -> Result<f64, ThermalError> {
        let dt = (t_end - t_start) / (count - 1) as f64;
        let times: Vec<f64> = (0..count).map(|i| t_start + i as f64 * dt).collect();
        let thetas: Vec<f64> = times.iter().map(|&t| theta_path(t)).collect();
        let betas: Vec<f64> = thetas.iter().map(|&th| beta_for_theta(th, energy)).collect();
        heat_relation_residual(&times, &thetas, &betas, energy)
    };
    if points < 3 {
        return Err(ThermalError::GridTooSmall { needed: 3, got: points });
    }
    let coarse_residual = run(points)?;
    let fine_residual = run(2 * points - 1)?;
    let ratio = coarse_residual / fine_residual;
    Ok(HeatConvergence { coarse_residual, fine_residual, ratio, order: ratio.log2() })
}

/// Norm of a state vector restricted to the interior of its space.
pub fn interior_norm(space: &FockSpace, v: &Array1<C64>) -> f64 {
    let masked = Array1::from_shape_fn(v.len(), |i| if space.is_interior(i) { v[i] } else { C64::new(0.0, 0.0) });
    norm(&masked)
}
