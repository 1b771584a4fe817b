//! A two-level system with mixed states, the free energy generator and the
//! tilde doubling used to read off entropies.
//!
//! Vectors are amplitude pairs `[<0|v>, <1|v>]` and `H = diag(omega1, omega2)`.
//! The Pauli matrices carry a factor one half.

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type Vec2 = [C64; 2];
pub type Mat2 = [[C64; 2]; 2];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };
const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QubitError {
    #[error("the two level frequencies must differ (both are {0})")]
    DegenerateLevels(f64),
    #[error("parameter {0} is not finite")]
    NonFinite(&'static str),
    #[error("phases must differ by a multiple of pi (gamma1 - gamma2 = {0})")]
    PhaseMismatch(f64),
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelParams {
    omega1: f64,
    omega2: f64,
    theta: f64,
    gamma1: f64,
    gamma2: f64,
}

impl TwoLevelParams {
    /// Frequencies of `|0>` and `|1>` and the mixing angle, with zero phases.
    pub fn new(omega1: f64, omega2: f64, theta: f64) -> Result<Self, QubitError> {
        for (name, x) in [("omega1", omega1), ("omega2", omega2), ("theta", theta)] {
            if !x.is_finite() {
                return Err(QubitError::NonFinite(name));
            }
        }
        if omega1 == omega2 {
            return Err(QubitError::DegenerateLevels(omega1));
        }
        Ok(Self { omega1, omega2, theta, gamma1: 0.0, gamma2: 0.0 })
    }

    pub fn with_phases(self, gamma1: f64, gamma2: f64) -> Result<Self, QubitError> {
        if !gamma1.is_finite() || !gamma2.is_finite() {
            return Err(QubitError::NonFinite("gamma"));
        }
        let d = gamma1 - gamma2;
        let turns = d / std::f64::consts::PI;
        if (turns - turns.round()).abs() > 1e-12 * turns.abs().max(1.0) {
            return Err(QubitError::PhaseMismatch(d));
        }
        Ok(Self { gamma1, gamma2, ..self })
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega2(&self) -> f64 {
        self.omega2
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `e^{i gamma1} cos theta`.
    pub fn alpha(&self) -> C64 {
        C64::from_polar(1.0, self.gamma1) * self.theta.cos()
    }

    /// `e^{i gamma2} sin theta`.
    pub fn beta(&self) -> C64 {
        C64::from_polar(1.0, self.gamma2) * self.theta.sin()
    }
}

/// The mixed states `phi = alpha|0> + beta|1>`, `psi = -beta|0> + alpha|1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPair {
    pub phi: Vec2,
    pub psi: Vec2,
}

impl QubitPair {
    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let pp = (inner(&self.phi, &self.phi) - ONE).norm();
        let ss = (inner(&self.psi, &self.psi) - ONE).norm();
        let ps = inner(&self.phi, &self.psi).norm();
        pp.max(ss).max(ps)
    }

    fn rows(&self) -> Mat2 {
        [self.phi, self.psi]
    }
}

pub fn mix(params: &TwoLevelParams) -> QubitPair {
    let (a, b) = (params.alpha(), params.beta());
    QubitPair { phi: [a, b], psi: [-b, a] }
}

/// `<u|v>`.
pub fn inner(u: &Vec2, v: &Vec2) -> C64 {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

pub fn mat_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, entry) in row.iter_mut().enumerate() {
            *entry = x[r][0] * y[0][c] + x[r][1] * y[1][c];
        }
    }
    out
}

pub fn mat_vec(x: &Mat2, v: &Vec2) -> Vec2 {
    [x[0][0] * v[0] + x[0][1] * v[1], x[1][0] * v[0] + x[1][1] * v[1]]
}

pub fn adjoint(x: &Mat2) -> Mat2 {
    [[x[0][0].conj(), x[1][0].conj()], [x[0][1].conj(), x[1][1].conj()]]
}

pub fn mat_sub(x: &Mat2, y: &Mat2) -> Mat2 {
    [[x[0][0] - y[0][0], x[0][1] - y[0][1]], [x[1][0] - y[1][0], x[1][1] - y[1][1]]]
}

pub fn mat_add(x: &Mat2, y: &Mat2) -> Mat2 {
    [[x[0][0] + y[0][0], x[0][1] + y[0][1]], [x[1][0] + y[1][0], x[1][1] + y[1][1]]]
}

pub fn mat_scale(x: &Mat2, s: C64) -> Mat2 {
    [[x[0][0] * s, x[0][1] * s], [x[1][0] * s, x[1][1] * s]]
}

pub fn max_abs_diff(x: &Mat2, y: &Mat2) -> f64 {
    let d = mat_sub(x, y);
    d.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn identity() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

/// `(1/2) [[0, 1], [1, 0]]`.
pub fn sigma1() -> Mat2 {
    [[ZERO, ONE * 0.5], [ONE * 0.5, ZERO]]
}

/// `(1/2) [[0, -i], [i, 0]]`.
pub fn sigma2() -> Mat2 {
    [[ZERO, -I * 0.5], [I * 0.5, ZERO]]
}

/// `(1/2) [[1, 0], [0, -1]]`.
pub fn sigma3() -> Mat2 {
    [[ONE * 0.5, ZERO], [ZERO, -ONE * 0.5]]
}

/// `sigma1 + i sigma2 = [[0, 1], [0, 0]]`.
pub fn sigma_plus() -> Mat2 {
    mat_add(&sigma1(), &mat_scale(&sigma2(), I))
}

/// `sigma1 - i sigma2 = [[0, 0], [1, 0]]`.
pub fn sigma_minus() -> Mat2 {
    mat_sub(&sigma1(), &mat_scale(&sigma2(), I))
}

pub fn hamiltonian(params: &TwoLevelParams) -> Mat2 {
    [[ONE * params.omega1, ZERO], [ZERO, ONE * params.omega2]]
}

/// Row `i` holds the amplitudes of the `i`-th mixed state at time `t`:
/// `[[alpha e^{-i w1 t}, beta e^{-i w2 t}], [-beta e^{-i w1 t}, alpha e^{-i w2 t}]]`.
pub fn evolution_matrix(params: &TwoLevelParams, t: f64) -> Mat2 {
    let p1 = C64::from_polar(1.0, -params.omega1 * t);
    let p2 = C64::from_polar(1.0, -params.omega2 * t);
    let (a, b) = (params.alpha(), params.beta());
    [[a * p1, b * p2], [-b * p1, a * p2]]
}

/// `e^{-iHt}` applied to both states of the pair.
pub fn evolve(pair: &QubitPair, params: &TwoLevelParams, t: f64) -> QubitPair {
    let u = schrodinger_propagator(params, t);
    QubitPair { phi: mat_vec(&u, &pair.phi), psi: mat_vec(&u, &pair.psi) }
}

/// `e^{-iHt}` in the `|0>, |1>` basis.
pub fn schrodinger_propagator(params: &TwoLevelParams, t: f64) -> Mat2 {
    [[C64::from_polar(1.0, -params.omega1 * t), ZERO], [ZERO, C64::from_polar(1.0, -params.omega2 * t)]]
}

/// `U_ij = <xi_i| e^{-iHt} |xi_j>` with `xi = (phi, psi)`; composes exactly.
pub fn pair_propagator(params: &TwoLevelParams, t: f64) -> Mat2 {
    to_pair_basis(params, &schrodinger_propagator(params, t))
}

/// `X_ij = <xi_i| X |xi_j>` for the mixed states at time zero.
pub fn to_pair_basis(params: &TwoLevelParams, x: &Mat2) -> Mat2 {
    let rows = mix(params).rows();
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = inner(&rows[i], &mat_vec(x, &rows[j]));
        }
    }
    out
}

/// `(1/2)(omega2 - omega1) sin(2 theta)`.
pub fn mixing_frequency(params: &TwoLevelParams) -> f64 {
    0.5 * (params.omega2 - params.omega1) * (2.0 * params.theta).sin()
}

/// `<psi(t)| i d/dt |phi(t)>` by a central difference of step `dt`.
pub fn mixing_frequency_numeric(params: &TwoLevelParams, t: f64, dt: f64) -> C64 {
    pair_generator_numeric(params, t, dt)[1][0]
}

/// `G_ij = <xi_i(t)| i d/dt |xi_j(t)>` by central differences.
pub fn pair_generator_numeric(params: &TwoLevelParams, t: f64, dt: f64) -> Mat2 {
    let now = evolve(&mix(params), params, t).rows();
    let ahead = evolve(&mix(params), params, t + dt).rows();
    let behind = evolve(&mix(params), params, t - dt).rows();
    let mut g = [[ZERO; 2]; 2];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let deriv = [(ahead[j][0] - behind[j][0]) / (2.0 * dt), (ahead[j][1] - behind[j][1]) / (2.0 * dt)];
            *entry = I * inner(&now[i], &deriv);
        }
    }
    g
}

/// `omega_{phi psi} (|phi(t)><psi(t)| + |psi(t)><phi(t)|)` in the `|0>, |1>` basis.
pub fn ts_term(params: &TwoLevelParams, t: f64) -> Mat2 {
    let pair = evolve(&mix(params), params, t);
    let w = mixing_frequency(params);
    mat_scale(&mat_add(&outer(&pair.phi, &pair.psi), &outer(&pair.psi, &pair.phi)), ONE * w)
}

/// `|u><v|`.
pub fn outer(u: &Vec2, v: &Vec2) -> Mat2 {
    [[u[0] * v[0].conj(), u[0] * v[1].conj()], [u[1] * v[0].conj(), u[1] * v[1].conj()]]
}

/// `F = H - TS` at time `t`, in the `|0>, |1>` basis.
pub fn free_energy_operator(params: &TwoLevelParams, t: f64) -> Mat2 {
    mat_sub(&hamiltonian(params), &ts_term(params, t))
}

/// The generator of the pair split into its free energy and entropy parts,
/// both in the co-moving `(phi, psi)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGenerator {
    /// `diag(<phi|H|phi>, <psi|H|psi>)`
    pub free_energy: Mat2,
    /// `omega_{phi psi} [[0, 1], [1, 0]]`, that is `2 omega_{phi psi} sigma1`.
    pub entropy_term: Mat2,
}

impl PairGenerator {
    pub fn total(&self) -> Mat2 {
        mat_add(&self.free_energy, &self.entropy_term)
    }
}

pub fn pair_generator(params: &TwoLevelParams) -> PairGenerator {
    let h = to_pair_basis(params, &hamiltonian(params));
    let w = ONE * mixing_frequency(params);
    PairGenerator { free_energy: [[h[0][0], ZERO], [ZERO, h[1][1]]], entropy_term: [[ZERO, w], [w, ZERO]] }
}

/// `a|0> + b|1>` mapped to `a|0,0~> + b|1,1~>`, in the order
/// `|0,0~>, |0,1~>, |1,0~>, |1,1~>`.
pub fn doubled_state(v: &Vec2) -> [C64; 4] {
    [v[0], ZERO, ZERO, v[1]]
}

/// Partial traces of `|w><w|` over the tilde factor and over the plain one.
pub fn reduced_densities(w: &[C64; 4]) -> (Mat2, Mat2) {
    let amp = |n: usize, m: usize| w[2 * n + m];
    let mut system = [[ZERO; 2]; 2];
    let mut tilde = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            for k in 0..2 {
                system[r][c] += amp(r, k) * amp(c, k).conj();
                tilde[r][c] += amp(k, r) * amp(k, c).conj();
            }
        }
    }
    (system, tilde)
}

/// `-Tr(rho ln rho)` for a 2x2 density matrix.
pub fn von_neumann_entropy(rho: &Mat2) -> f64 {
    let tr = (rho[0][0] + rho[1][1]).re;
    let det = (rho[0][0] * rho[1][1] - rho[0][1] * rho[1][0]).re;
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    // eigenvalues of rho / tr are s and 1 - s
    let s = ((0.5 * tr - disc) / tr).clamp(0.0, 0.5);
    if s == 0.0 {
        return 0.0;
    }
    (-s * s.ln() - (1.0 - s) * (-s).ln_1p()).max(0.0)
}

/// Entropies of the two reductions of the doubled state of `v`.
pub fn doubled_entropy(v: &Vec2) -> Result<(f64, f64), QubitError> {
    let norm = inner(v, v).re.sqrt();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(QubitError::NotNormalized { norm });
    }
    let (system, tilde) = reduced_densities(&doubled_state(v));
    Ok((von_neumann_entropy(&system), von_neumann_entropy(&tilde)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEntropy {
    pub phi: (f64, f64),
    pub psi: (f64, f64),
}

pub fn pair_entropy(pair: &QubitPair) -> Result<PairEntropy, QubitError> {
    Ok(PairEntropy { phi: doubled_entropy(&pair.phi)?, psi: doubled_entropy(&pair.psi)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, LN_2, PI};

    fn unitarity_residual(u: &Mat2) -> f64 {
        max_abs_diff(&mat_mul(&adjoint(u), u), &identity())
    }

    #[test]
    fn parameters_are_validated() {
        assert_eq!(TwoLevelParams::new(1.0, 1.0, 0.3), Err(QubitError::DegenerateLevels(1.0)));
        assert_eq!(TwoLevelParams::new(f64::NAN, 1.0, 0.3), Err(QubitError::NonFinite("omega1")));
        let p = TwoLevelParams::new(1.0, 2.0, 0.3).unwrap();
        assert!(p.with_phases(0.4, 0.4 - PI).is_ok());
        assert!(matches!(p.with_phases(0.4, 0.1), Err(QubitError::PhaseMismatch(_))));
    }

    #[test]
    fn mixing_limits() {
        let pair = mix(&TwoLevelParams::new(1.0, 2.0, 0.0).unwrap());
        assert_eq!(pair.phi, [ONE, ZERO]);
        assert_eq!(pair.psi, [-ZERO, ONE]);
        let pair = mix(&TwoLevelParams::new(1.0, 2.0, FRAC_PI_4).unwrap());
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((pair.phi[0] - r).norm() < 1e-15 && (pair.phi[1] - r).norm() < 1e-15);
    }

    #[test]
    fn orthonormal_for_any_angle_and_phase() {
        for k in 0..50 {
            let theta = -3.0 + 0.13 * k as f64;
            let p = TwoLevelParams::new(0.3, 1.7, theta).unwrap().with_phases(0.2 + PI, 0.2).unwrap();
            assert!(mix(&p).orthonormality_residual() < 1e-15);
        }
    }

    #[test]
    fn evolution_is_unitary_and_starts_at_identity_mix() {
        let p = TwoLevelParams::new(1.0, 2.0, FRAC_PI_6).unwrap();
        assert_eq!(evolve(&mix(&p), &p, 0.0), mix(&p));
        let u = evolution_matrix(&p, PI);
        assert!(unitarity_residual(&u) < 1e-12);
        // rows of the evolution matrix against e^{-iHt} computed in the eigenbasis
        let direct = evolve(&mix(&p), &p, PI);
        assert!(max_abs_diff(&u, &direct.rows()) < 1e-12);
    }

    #[test]
    fn zero_angle_is_pure_phase() {
        let p = TwoLevelParams::new(1.0, 2.5, 0.0).unwrap();
        let u = evolution_matrix(&p, 1.3);
        assert_eq!(u[0][1], ZERO);
        assert_eq!(u[1][0], -ZERO);
        assert!((u[0][0] - C64::from_polar(1.0, -1.3)).norm() < 1e-15);
    }

    #[test]
    fn pair_propagator_composes() {
        let p = TwoLevelParams::new(0.7, 2.1, 0.4).unwrap();
        let (t1, t2) = (0.37, 1.91);
        let lhs = pair_propagator(&p, t1 + t2);
        let rhs = mat_mul(&pair_propagator(&p, t2), &pair_propagator(&p, t1));
        assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
        assert!(unitarity_residual(&lhs) < 1e-12);
    }

    #[test]
    fn mixing_frequency_closed_form_and_numeric() {
        assert_eq!(mixing_frequency(&TwoLevelParams::new(1.0, 2.0, 0.0).unwrap()), 0.0);
        assert!((mixing_frequency(&TwoLevelParams::new(1.0, 3.0, FRAC_PI_4).unwrap()) - 1.0).abs() < 1e-15);
        let p = TwoLevelParams::new(1.0, 3.0, 0.3).unwrap();
        let numeric = mixing_frequency_numeric(&p, 0.7, 1e-4);
        assert!((numeric - mixing_frequency(&p)).norm() < 1e-6);
        let g = pair_generator_numeric(&p, 0.7, 1e-4);
        assert!((g[0][1] - g[1][0]).norm() < 1e-6);
    }

    #[test]
    fn free_energy_and_entropy_term() {
        let p = TwoLevelParams::new(1.0, 2.0, 0.0).unwrap();
        assert!(max_abs_diff(&free_energy_operator(&p, 0.4), &hamiltonian(&p)) < 1e-15);

        let p = TwoLevelParams::new(0.5, 2.0, 0.6).unwrap();
        for &t in &[0.0, 0.9, 2.3] {
            let f = free_energy_operator(&p, t);
            assert_eq!(f, adjoint(&f));
            let g = pair_generator_numeric(&p, t, 1e-4);
            assert!(max_abs_diff(&g, &pair_generator(&p).total()) < 1e-6);
        }
        // the entropy term is twice omega sigma1 in the pair basis
        let split = pair_generator(&p);
        let ts_pair = to_pair_basis(&p, &ts_term(&p, 0.0));
        assert!(max_abs_diff(&ts_pair, &split.entropy_term) < 1e-15);
        let w = mixing_frequency(&p);
        assert!(max_abs_diff(&split.entropy_term, &mat_scale(&sigma1(), ONE * (2.0 * w))) < 1e-15);
        assert!(max_abs_diff(&to_pair_basis(&p, &free_energy_operator(&p, 0.0)), &split.free_energy) < 1e-15);
    }

    #[test]
    fn ladder_matrices() {
        assert_eq!(sigma_plus(), [[ZERO, ONE], [ZERO, ZERO]]);
        assert_eq!(sigma_minus(), [[ZERO, ZERO], [ONE, ZERO]]);
        assert_eq!(mat_mul(&sigma_plus(), &sigma_plus()), [[ZERO; 2]; 2]);
    }

    #[test]
    fn doubled_entropies() {
        let p = TwoLevelParams::new(1.0, 2.0, 0.0).unwrap();
        let e = pair_entropy(&evolve(&mix(&p), &p, 3.0)).unwrap();
        assert!(e.phi.0.abs() < 1e-15 && e.phi.1.abs() < 1e-15);
        assert!(e.psi.0.abs() < 1e-15 && e.psi.1.abs() < 1e-15);
        let p = TwoLevelParams::new(1.0, 2.0, FRAC_PI_4).unwrap();
        let (system, tilde) = reduced_densities(&doubled_state(&mix(&p).phi));
        assert!(max_abs_diff(&system, &mat_scale(&identity(), ONE * 0.5)) < 1e-15);
        assert_eq!(system, tilde);
        let (s, st) = doubled_entropy(&mix(&p).phi).unwrap();
        assert!((s - LN_2).abs() < 1e-15 && (st - LN_2).abs() < 1e-15);
        assert!(matches!(doubled_entropy(&[ONE, ONE]), Err(QubitError::NotNormalized { .. })));
    }

    #[test]
    fn entropy_ignores_global_phase() {
        let p = TwoLevelParams::new(1.0, 2.0, 0.5).unwrap();
        let v = mix(&p).phi;
        let rotated = [v[0] * C64::from_polar(1.0, 0.8), v[1] * C64::from_polar(1.0, 0.8)];
        let a = doubled_entropy(&v).unwrap();
        let b = doubled_entropy(&rotated).unwrap();
        assert!((a.0 - b.0).abs() < 1e-15);
    }
}
