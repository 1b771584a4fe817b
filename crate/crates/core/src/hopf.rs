//! Coproducts on the doubled space and the Bogoliubov transformation.
//!
//! The commutative coproduct `O (x) 1 + 1 (x) O` adds an observable over the
//! two factors. The q-deformed one weights the factors by `q` and `1/q` and is
//! not invariant under the factor swap unless `q = 1`. The Bogoliubov pair
//!
//! ```text
//! A(t)  = A cosh t - A~^dag sinh t
//! A~(t) = A~ cosh t - A^dag sinh t
//! ```
//!
//! is built by direct linear recombination, and independently as conjugation
//! by `exp(i t G)` with `G = -i (A^dag A~^dag - A A~)`.

use ndarray::Array2;
use thiserror::Error;

use crate::fock::{commutator, exp_apply, exp_operator, FockError, FockOperator, FockSpace, Mode, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HopfError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("deformation parameter q must be positive and finite, got {0}")]
    InvalidQ(f64),
    #[error("deformation angle must be finite, got {0}")]
    InvalidTheta(f64),
}

/// Real deformation `q = e^theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationParam {
    theta: f64,
    q: f64,
}

impl DeformationParam {
    pub fn from_theta(theta: f64) -> Result<Self, HopfError> {
        if !theta.is_finite() {
            return Err(HopfError::InvalidTheta(theta));
        }
        Ok(Self { theta, q: theta.exp() })
    }

    pub fn from_q(q: f64) -> Result<Self, HopfError> {
        if !(q > 0.0) || !q.is_finite() {
            return Err(HopfError::InvalidQ(q));
        }
        Ok(Self { theta: q.ln(), q })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn is_undeformed(&self) -> bool {
        self.theta == 0.0
    }

    /// `cosh^2 - sinh^2 - 1`, zero up to rounding.
    pub fn hyperbolic_residual(&self) -> f64 {
        let (c, s) = (self.theta.cosh(), self.theta.sinh());
        c * c - s * s - 1.0
    }
}

/// `O (x) 1 + 1 (x) O`.
pub fn commutative_coproduct(op: &FockOperator) -> Result<FockOperator, HopfError> {
    Ok(op.lift(Mode::Plain)?.try_add(&op.lift(Mode::Tilde)?)?)
}

/// `q (O (x) 1) + q^-1 (1 (x) O)`.
pub fn deformed_coproduct(op: &FockOperator, params: &DeformationParam) -> Result<FockOperator, HopfError> {
    let q = params.q();
    Ok(op.lift(Mode::Plain)?.scale_real(q).try_add(&op.lift(Mode::Tilde)?.scale_real(q.recip()))?)
}

/// The transformed ladder operators `A(theta)`, `A~(theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovPair {
    pub a_theta: FockOperator,
    pub a_tilde_theta: FockOperator,
    pub params: DeformationParam,
}

impl BogoliubovPair {
    pub fn theta(&self) -> f64 {
        self.params.theta()
    }

    /// Apply a further transformation of angle `theta` to this pair.
    pub fn then(&self, theta: f64) -> Result<BogoliubovPair, HopfError> {
        rotate(&self.a_theta, &self.a_tilde_theta, theta)
    }
}

/// Bogoliubov transform of the bare ladder operators of a doubled space.
pub fn bogoliubov(theta: f64, space: FockSpace) -> Result<BogoliubovPair, HopfError> {
    if !space.is_doubled() {
        return Err(FockError::NotDoubled.into());
    }
    let a = FockOperator::annihilator(space, Mode::Plain)?;
    let a_tilde = FockOperator::annihilator(space, Mode::Tilde)?;
    rotate(&a, &a_tilde, theta)
}

/// Transform an arbitrary operator pair `(X, X~)` by angle `theta`.
pub fn rotate(a: &FockOperator, a_tilde: &FockOperator, theta: f64) -> Result<BogoliubovPair, HopfError> {
    let params = DeformationParam::from_theta(theta)?;
    let (c, s) = (theta.cosh(), theta.sinh());
    let a_theta = a.scale_real(c).try_sub(&a_tilde.adjoint().scale_real(s))?;
    let a_tilde_theta = a_tilde.scale_real(c).try_sub(&a.adjoint().scale_real(s))?;
    Ok(BogoliubovPair { a_theta, a_tilde_theta, params })
}

/// Recover the untransformed pair: `A = A(t) cosh t + A~(t)^dag sinh t`.
pub fn inverse_bogoliubov(pair: &BogoliubovPair) -> Result<(FockOperator, FockOperator), HopfError> {
    let theta = pair.theta();
    let (c, s) = (theta.cosh(), theta.sinh());
    let a = pair.a_theta.scale_real(c).try_add(&pair.a_tilde_theta.adjoint().scale_real(s))?;
    let a_tilde = pair.a_tilde_theta.scale_real(c).try_add(&pair.a_theta.adjoint().scale_real(s))?;
    Ok((a, a_tilde))
}

/// Interior residuals of `[A, A^dag] = 1`, `[A~, A~^dag] = 1`, `[A, A~] = 0`
/// and `[A, A~^dag] = 0` for a transformed pair.
pub fn ccr_residuals(pair: &BogoliubovPair) -> Result<[f64; 4], HopfError> {
    let (a, at) = (&pair.a_theta, &pair.a_tilde_theta);
    let space = a.space();
    let id = FockOperator::identity(space);
    let zero = FockOperator::zeros(space);
    Ok([
        commutator(a, &a.adjoint())?.max_abs_diff_interior(&id)?,
        commutator(at, &at.adjoint())?.max_abs_diff_interior(&id)?,
        commutator(a, at)?.max_abs_diff_interior(&zero)?,
        commutator(a, &at.adjoint())?.max_abs_diff_interior(&zero)?,
    ])
}

/// `G = -i (A^dag A~^dag - A A~)`.
pub fn bogoliubov_generator(space: FockSpace) -> Result<FockOperator, HopfError> {
    if !space.is_doubled() {
        return Err(FockError::NotDoubled.into());
    }
    let a = FockOperator::annihilator(space, Mode::Plain)?;
    let a_tilde = FockOperator::annihilator(space, Mode::Tilde)?;
    let pair_creation = a.adjoint().compose(&a_tilde.adjoint())?;
    let pair_annihilation = a.compose(&a_tilde)?;
    Ok(pair_creation.try_sub(&pair_annihilation)?.scale(C64::new(0.0, -1.0)))
}

/// `exp(i theta G) X exp(-i theta G)` with full matrix exponentials.
///
/// Only practical on small doubled spaces; see [`conjugated_block`].
pub fn conjugate(op: &FockOperator, theta: f64) -> Result<FockOperator, HopfError> {
    let g = bogoliubov_generator(op.space())?;
    let forward = exp_operator(&g.scale(C64::new(0.0, theta)))?;
    let backward = exp_operator(&g.scale(C64::new(0.0, -theta)))?;
    Ok(forward.compose(op)?.compose(&backward)?)
}

/// The block of `exp(i theta G) X exp(-i theta G)` on basis states with all
/// occupations below `cutoff`, computed column by column with exponential
/// actions on vectors.
///
/// Returned as a matrix indexed by the positions of those basis states in
/// ascending order (see [`core_indices`]).
pub fn conjugated_block(op: &FockOperator, theta: f64, cutoff: usize) -> Result<Array2<C64>, HopfError> {
    let space = op.space();
    let g = bogoliubov_generator(space)?;
    let forward = g.scale(C64::new(0.0, theta));
    let backward = g.scale(C64::new(0.0, -theta));
    let core = core_indices(space, cutoff);
    let mut block = Array2::zeros((core.len(), core.len()));
    for (j, &col) in core.iter().enumerate() {
        let v = exp_apply(&backward, &space.basis_vector(col))?;
        let w = op.apply(&v)?;
        let u = exp_apply(&forward, &w)?;
        for (i, &row) in core.iter().enumerate() {
            block[[i, j]] = u[row];
        }
    }
    Ok(block)
}

/// Basis indices whose occupations all lie below `cutoff`.
pub fn core_indices(space: FockSpace, cutoff: usize) -> Vec<usize> {
    (0..space.dim()).filter(|&i| space.is_within(i, cutoff)).collect()
}

/// Restrict an operator to the basis states listed by [`core_indices`].
pub fn core_block(op: &FockOperator, cutoff: usize) -> Array2<C64> {
    let core = core_indices(op.space(), cutoff);
    Array2::from_shape_fn((core.len(), core.len()), |(i, j)| op.entry(core[i], core[j]))
}
