use std::fmt::Debug;
use std::hash::Hash;

use super::{CoalgebraError, ColoredMachine, FiniteFunction};
use crate::fock::{FockOperator, FockSpace, Mode};
use crate::hopf::{rotate, HopfError};

/// A map between finite sets whose targets are `(color, state)` pairs or
/// plain states, encoded as `color * states + state`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Arrow(Vec<usize>);

impl Arrow {
    /// `self . before`
    fn after(&self, before: &Arrow) -> Arrow {
        Arrow(before.0.iter().map(|&i| self.0[i]).collect())
    }
}

/// An arrow of the opposite category; composition runs the other way.
#[derive(Debug, Clone, PartialEq, Eq)]
struct OpArrow(Arrow);

impl OpArrow {
    /// `self ;op other`, which is `self . other` read with arrows reversed.
    fn op_compose(&self, other: &OpArrow) -> Arrow {
        other.0.after(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquareReading {
    pub state: usize,
    /// `mu' . f = (id x f) . mu` at this state.
    pub coalgebra: bool,
    /// The reversed square `f^op ;op mu'^op = mu^op ;op (id x f)^op` at this state.
    pub algebra_op: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualityReport {
    pub squares: Vec<SquareReading>,
}

impl DualityReport {
    pub fn coalgebra_holds(&self) -> bool {
        self.squares.iter().all(|s| s.coalgebra)
    }

    pub fn algebra_holds(&self) -> bool {
        self.squares.iter().all(|s| s.algebra_op)
    }

    /// Both readings agree at every state.
    pub fn readings_agree(&self) -> bool {
        self.squares.iter().all(|s| s.coalgebra == s.algebra_op)
    }

    pub fn first_failure(&self) -> Option<usize> {
        self.squares.iter().find(|s| !s.coalgebra || !s.algebra_op).map(|s| s.state)
    }
}

/// Evaluate the homomorphism square of `f: m -> target` as a coalgebra square
/// and again as an algebra square in the opposite category.
pub fn alg_coalg_duality_check<C: Clone + Eq + Hash + Debug>(
    m: &ColoredMachine<C>,
    target: &ColoredMachine<C>,
    f: &FiniteFunction,
) -> Result<DualityReport, CoalgebraError> {
    if f.domain() != m.len() {
        return Err(CoalgebraError::NotTotal { got: f.domain(), expected: m.len() });
    }
    if f.codomain() != target.len() {
        return Err(CoalgebraError::NotComposable { left: f.codomain(), right: target.len() });
    }
    let mut palette = m.colors();
    for c in target.colors() {
        if !palette.contains(&c) {
            palette.push(c);
        }
    }
    let color_id = |c: &C| palette.iter().position(|p| p == c).expect("palette holds every color");
    let encode = |machine: &ColoredMachine<C>| {
        Arrow(
            (0..machine.len())
                .map(|x| {
                    let (c, next) = machine.mu(x);
                    color_id(c) * machine.len() + next
                })
                .collect(),
        )
    };
    let mu = encode(m);
    let mu2 = encode(target);
    let f_arrow = Arrow(f.values().to_vec());
    // id x f on C x M
    let id_times_f =
        Arrow((0..palette.len() * m.len()).map(|i| (i / m.len()) * target.len() + f.apply(i % m.len())).collect());

    let left = mu2.after(&f_arrow);
    let right = id_times_f.after(&mu);
    let left_op = OpArrow(f_arrow).op_compose(&OpArrow(mu2));
    let right_op = OpArrow(mu).op_compose(&OpArrow(id_times_f));

    let squares = (0..m.len())
        .map(|x| SquareReading {
            state: x,
            coalgebra: left.0[x] == right.0[x],
            algebra_op: left_op.0[x] == right_op.0[x],
        })
        .collect();
    Ok(DualityReport { squares })
}

/// Largest entry of `(T_b . T_a)^{-1} - T_a^{-1} . T_b^{-1}` on the transformed
/// annihilator, where `T_t` is the Bogoliubov map of angle `t` acting on
/// ladder-operator pairs: inversion reverses composition order.
pub fn bogoliubov_reversal_residual(a: f64, b: f64, space: FockSpace) -> Result<f64, HopfError> {
    let x = FockOperator::annihilator(space, Mode::Plain)?;
    let x_tilde = FockOperator::annihilator(space, Mode::Tilde)?;
    let composite = rotate(&x, &x_tilde, a)?.then(b)?;
    let inverse_of_composite = rotate(&composite.a_theta, &composite.a_tilde_theta, -(a + b))?;
    let reversed = rotate(&composite.a_theta, &composite.a_tilde_theta, -b)?.then(-a)?;
    let first = inverse_of_composite.a_theta.max_abs_diff(&reversed.a_theta)?;
    let second = reversed.a_theta.max_abs_diff(&x)?;
    Ok(first.max(second))
}
