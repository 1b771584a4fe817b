//! Truncated bosonic Fock spaces and dense operators on them.
//!
//! A single mode is truncated at occupation `n_max`, giving dimension
//! `n_max + 1`. The doubled space is the tensor product of a plain mode and
//! its tilde copy, with basis index `n * (n_max + 1) + m` for `|n, m~>`.
//!
//! Truncation breaks the canonical commutation relations only on states that
//! touch the top level `n_max`. Comparisons that are sensitive to this are
//! restricted with [`FockSpace::is_within`].

use std::ops::{Add, Mul, Neg, Sub};

use ndarray::{Array1, Array2, Zip};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("truncation level must be at least 1, got {0}")]
    InvalidTruncation(usize),
    #[error("operator spaces differ: {left:?} vs {right:?}")]
    SpaceMismatch { left: FockSpace, right: FockSpace },
    #[error("matrix shape {got:?} does not match space dimension {dim}")]
    ShapeMismatch { got: (usize, usize), dim: usize },
    #[error("vector length {got} does not match space dimension {dim}")]
    VectorLength { got: usize, dim: usize },
    #[error("a tilde mode needs a doubled space")]
    NotDoubled,
    #[error("operation needs a single-mode operator, got a doubled one")]
    AlreadyDoubled,
    #[error("state is not normalized: norm = {norm}")]
    NotNormalized { norm: f64 },
    #[error("operator has non-finite entries")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeLayout {
    Single,
    Doubled,
}

/// Which factor of a doubled space an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Plain,
    Tilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    n_max: usize,
    layout: ModeLayout,
}

impl FockSpace {
    pub fn single(n_max: usize) -> Result<Self, FockError> {
        Self::new(n_max, ModeLayout::Single)
    }

    pub fn doubled(n_max: usize) -> Result<Self, FockError> {
        Self::new(n_max, ModeLayout::Doubled)
    }

    pub fn new(n_max: usize, layout: ModeLayout) -> Result<Self, FockError> {
        if n_max < 1 {
            return Err(FockError::InvalidTruncation(n_max));
        }
        Ok(Self { n_max, layout })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn is_doubled(&self) -> bool {
        self.layout == ModeLayout::Doubled
    }

    /// Number of levels of one mode, `n_max + 1`.
    pub fn levels(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        match self.layout {
            ModeLayout::Single => self.levels(),
            ModeLayout::Doubled => self.levels() * self.levels(),
        }
    }

    /// The single-mode space with the same truncation.
    pub fn factor(&self) -> FockSpace {
        FockSpace { n_max: self.n_max, layout: ModeLayout::Single }
    }

    /// The doubled space with the same truncation.
    pub fn doubling(&self) -> FockSpace {
        FockSpace { n_max: self.n_max, layout: ModeLayout::Doubled }
    }

    /// Basis index of `|n, m~>`. Panics on a single-mode space.
    pub fn pair_index(&self, n: usize, m: usize) -> usize {
        assert!(self.is_doubled(), "pair_index on a single-mode space");
        n * self.levels() + m
    }

    /// Occupations `(n, m)` of a basis index; `m` is zero on a single-mode space.
    pub fn occupations(&self, index: usize) -> (usize, usize) {
        match self.layout {
            ModeLayout::Single => (index, 0),
            ModeLayout::Doubled => (index / self.levels(), index % self.levels()),
        }
    }

    /// True when every mode occupation of the basis state is below `cutoff`.
    pub fn is_within(&self, index: usize, cutoff: usize) -> bool {
        let (n, m) = self.occupations(index);
        n < cutoff && m < cutoff
    }

    /// The interior subspace: no mode sits on the truncation level.
    pub fn is_interior(&self, index: usize) -> bool {
        self.is_within(index, self.n_max)
    }

    pub fn basis_vector(&self, index: usize) -> Array1<C64> {
        let mut v = Array1::zeros(self.dim());
        v[index] = C64::new(1.0, 0.0);
        v
    }
}

/// Dense complex operator on a [`FockSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    space: FockSpace,
    matrix: Array2<C64>,
}

impl FockOperator {
    pub fn from_matrix(space: FockSpace, matrix: Array2<C64>) -> Result<Self, FockError> {
        let dim = space.dim();
        if matrix.dim() != (dim, dim) {
            return Err(FockError::ShapeMismatch { got: matrix.dim(), dim });
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: FockSpace) -> Self {
        let dim = space.dim();
        Self { space, matrix: Array2::zeros((dim, dim)) }
    }

    pub fn identity(space: FockSpace) -> Self {
        Self { space, matrix: Array2::eye(space.dim()) }
    }

    /// Diagonal operator with real entries `f(index)`.
    pub fn diagonal(space: FockSpace, f: impl Fn(usize) -> f64) -> Self {
        let mut op = Self::zeros(space);
        for i in 0..space.dim() {
            op.matrix[[i, i]] = C64::new(f(i), 0.0);
        }
        op
    }

    /// `a` on a single-mode space, `a (x) 1` or `1 (x) a` on a doubled one.
    pub fn annihilator(space: FockSpace, mode: Mode) -> Result<Self, FockError> {
        let levels = space.levels();
        let mut ladder = Array2::<C64>::zeros((levels, levels));
        for n in 1..levels {
            ladder[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
        }
        match (space.layout(), mode) {
            (ModeLayout::Single, Mode::Plain) => Ok(Self { space, matrix: ladder }),
            (ModeLayout::Single, Mode::Tilde) => Err(FockError::NotDoubled),
            (ModeLayout::Doubled, Mode::Plain) => Ok(Self { space, matrix: kron(&ladder, &Array2::eye(levels)) }),
            (ModeLayout::Doubled, Mode::Tilde) => Ok(Self { space, matrix: kron(&Array2::eye(levels), &ladder) }),
        }
    }

    pub fn creator(space: FockSpace, mode: Mode) -> Result<Self, FockError> {
        Ok(Self::annihilator(space, mode)?.adjoint())
    }

    /// Number operator `a^dag a` for the chosen mode.
    pub fn number(space: FockSpace, mode: Mode) -> Result<Self, FockError> {
        if mode == Mode::Tilde && !space.is_doubled() {
            return Err(FockError::NotDoubled);
        }
        Ok(Self::diagonal(space, |i| {
            let (n, m) = space.occupations(i);
            match mode {
                Mode::Plain => n as f64,
                Mode::Tilde => m as f64,
            }
        }))
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[[row, col]]
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space, matrix: self.matrix.t().mapv(|z| z.conj()) }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { space: self.space, matrix: self.matrix.mapv(|z| z * factor) }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self { space: self.space, matrix: self.matrix.mapv(|z| z * factor) }
    }

    /// Operator product `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self, FockError> {
        self.check_same_space(other)?;
        Ok(Self { space: self.space, matrix: matmul(&self.matrix, &other.matrix) })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, FockError> {
        self.check_same_space(other)?;
        Ok(Self { space: self.space, matrix: &self.matrix + &other.matrix })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, FockError> {
        self.check_same_space(other)?;
        Ok(Self { space: self.space, matrix: &self.matrix - &other.matrix })
    }

    pub fn apply(&self, state: &Array1<C64>) -> Result<Array1<C64>, FockError> {
        let dim = self.space.dim();
        if state.len() != dim {
            return Err(FockError::VectorLength { got: state.len(), dim });
        }
        Ok(matvec(&self.matrix, state))
    }

    /// Embed a single-mode operator into the doubled space on the given factor.
    pub fn lift(&self, mode: Mode) -> Result<Self, FockError> {
        if self.space.is_doubled() {
            return Err(FockError::AlreadyDoubled);
        }
        let eye = Array2::eye(self.space.levels());
        let matrix = match mode {
            Mode::Plain => kron(&self.matrix, &eye),
            Mode::Tilde => kron(&eye, &self.matrix),
        };
        Ok(Self { space: self.space.doubling(), matrix })
    }

    /// `S X S` where `S` swaps the plain and tilde factors.
    pub fn swap_conjugate(&self) -> Result<Self, FockError> {
        if !self.space.is_doubled() {
            return Err(FockError::NotDoubled);
        }
        let levels = self.space.levels();
        let swap = |i: usize| (i % levels) * levels + i / levels;
        let dim = self.space.dim();
        let matrix = Array2::from_shape_fn((dim, dim), |(r, c)| self.matrix[[swap(r), swap(c)]]);
        Ok(Self { space: self.space, matrix })
    }

    pub fn is_diagonal(&self) -> bool {
        self.matrix.indexed_iter().all(|((r, c), z)| r == c || (z.re == 0.0 && z.im == 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Maximum column sum of absolute values.
    pub fn norm_one(&self) -> f64 {
        norm_one(&self.matrix)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, FockError> {
        self.max_abs_diff_within(other, usize::MAX)
    }

    /// Largest entrywise deviation over rows and columns whose basis states
    /// have every occupation below `cutoff`.
    pub fn max_abs_diff_within(&self, other: &Self, cutoff: usize) -> Result<f64, FockError> {
        self.check_same_space(other)?;
        let space = self.space;
        let mut worst = 0.0f64;
        for ((r, c), z) in self.matrix.indexed_iter() {
            if space.is_within(r, cutoff) && space.is_within(c, cutoff) {
                worst = worst.max((z - other.matrix[[r, c]]).norm());
            }
        }
        Ok(worst)
    }

    /// Deviation restricted to the interior subspace.
    pub fn max_abs_diff_interior(&self, other: &Self) -> Result<f64, FockError> {
        self.max_abs_diff_within(other, self.space.n_max())
    }

    fn check_same_space(&self, other: &Self) -> Result<(), FockError> {
        if self.space != other.space {
            return Err(FockError::SpaceMismatch { left: self.space, right: other.space });
        }
        Ok(())
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;

    /// Panics if the spaces differ; use [`FockOperator::try_add`] otherwise.
    fn add(self, rhs: &FockOperator) -> FockOperator {
        self.try_add(rhs).expect("adding operators on different spaces")
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;

    fn sub(self, rhs: &FockOperator) -> FockOperator {
        self.try_sub(rhs).expect("subtracting operators on different spaces")
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;

    fn mul(self, rhs: &FockOperator) -> FockOperator {
        self.compose(rhs).expect("multiplying operators on different spaces")
    }
}

impl Mul<f64> for &FockOperator {
    type Output = FockOperator;

    fn mul(self, rhs: f64) -> FockOperator {
        self.scale_real(rhs)
    }
}

impl Mul<C64> for &FockOperator {
    type Output = FockOperator;

    fn mul(self, rhs: C64) -> FockOperator {
        self.scale(rhs)
    }
}

impl Neg for &FockOperator {
    type Output = FockOperator;

    fn neg(self) -> FockOperator {
        self.scale_real(-1.0)
    }
}

/// `xy - yx`.
pub fn commutator(x: &FockOperator, y: &FockOperator) -> Result<FockOperator, FockError> {
    x.compose(y)?.try_sub(&y.compose(x)?)
}

pub fn norm(state: &Array1<C64>) -> f64 {
    state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(left: &Array1<C64>, right: &Array1<C64>) -> C64 {
    left.iter().zip(right.iter()).map(|(l, r)| l.conj() * r).sum()
}

/// `<state| op |state>` for a normalized state.
pub fn expectation(state: &Array1<C64>, op: &FockOperator) -> Result<C64, FockError> {
    let n = norm(state);
    if (n - 1.0).abs() > NORMALIZATION_TOL {
        return Err(FockError::NotNormalized { norm: n });
    }
    Ok(inner(state, &op.apply(state)?))
}

/// Matrix exponential by scaling and squaring of a Taylor series.
///
/// Diagonal operators are exponentiated entrywise.
pub fn exp_operator(op: &FockOperator) -> Result<FockOperator, FockError> {
    if !op.is_finite() {
        return Err(FockError::NonFinite);
    }
    let space = op.space();
    if op.is_diagonal() {
        let dim = space.dim();
        let mut out = Array2::zeros((dim, dim));
        for i in 0..dim {
            out[[i, i]] = op.matrix[[i, i]].exp();
        }
        return Ok(FockOperator { space, matrix: out });
    }

    let norm = op.norm_one();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = op.matrix.mapv(|z| z / 2f64.powi(squarings as i32));

    let dim = space.dim();
    let mut sum: Array2<C64> = Array2::eye(dim);
    let mut term: Array2<C64> = Array2::eye(dim);
    for k in 1..=40 {
        term = matmul(&term, &scaled).mapv(|z| z / k as f64);
        sum += &term;
        if norm_one(&term) <= f64::EPSILON * 1e-3 * norm_one(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = matmul(&sum, &sum);
    }
    Ok(FockOperator { space, matrix: sum })
}

/// `exp(op) v` without forming the exponential.
///
/// The operator is split into `s >= ||op||_1` slices of norm at most one and
/// the Taylor series of each slice is applied to the running vector.
pub fn exp_apply(op: &FockOperator, state: &Array1<C64>) -> Result<Array1<C64>, FockError> {
    if !op.is_finite() {
        return Err(FockError::NonFinite);
    }
    let dim = op.space().dim();
    if state.len() != dim {
        return Err(FockError::VectorLength { got: state.len(), dim });
    }
    let slices = op.norm_one().ceil().max(1.0) as usize;
    // ladder-built operators are very sparse, so keep only the nonzeros
    let rows: Vec<Vec<(usize, C64)>> = op
        .matrix
        .rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, z)| z.re != 0.0 || z.im != 0.0)
                .map(|(j, z)| (j, z / slices as f64))
                .collect()
        })
        .collect();
    let sparse_apply = |x: &Array1<C64>, k: usize| {
        Array1::from_iter(rows.iter().map(|row| row.iter().map(|&(j, z)| z * x[j]).sum::<C64>() / k as f64))
    };
    let mut v = state.clone();
    for _ in 0..slices {
        let mut term = v.clone();
        let mut acc = v.clone();
        let mut small_in_a_row = 0;
        for k in 1..=80 {
            term = sparse_apply(&term, k);
            acc += &term;
            if norm(&term) <= 1e-18 * norm(&acc).max(f64::MIN_POSITIVE) {
                small_in_a_row += 1;
                if small_in_a_row == 2 {
                    break;
                }
            } else {
                small_in_a_row = 0;
            }
        }
        v = acc;
    }
    Ok(v)
}

pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for ((i, j), x) in a.indexed_iter() {
        if x.re == 0.0 && x.im == 0.0 {
            continue;
        }
        for ((k, l), y) in b.indexed_iter() {
            out[[i * br + k, j * bc + l]] = x * y;
        }
    }
    out
}

/// Dense product that skips zero entries of the left factor.
///
/// Ladder-built operators are mostly zero, so this keeps products on doubled
/// spaces cheap without a sparse representation.
pub(crate) fn matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (rows, inner_dim) = a.dim();
    let cols = b.ncols();
    debug_assert_eq!(inner_dim, b.nrows());
    let mut out = Array2::zeros((rows, cols));
    for i in 0..rows {
        let mut out_row = out.row_mut(i);
        for p in 0..inner_dim {
            let x = a[[i, p]];
            if x.re == 0.0 && x.im == 0.0 {
                continue;
            }
            Zip::from(&mut out_row).and(&b.row(p)).for_each(|o, &y| *o += x * y);
        }
    }
    out
}

pub(crate) fn matvec(a: &Array2<C64>, v: &Array1<C64>) -> Array1<C64> {
    let mut out = Array1::zeros(a.nrows());
    for ((i, j), x) in a.indexed_iter() {
        if x.re == 0.0 && x.im == 0.0 {
            continue;
        }
        out[i] += x * v[j];
    }
    out
}

fn norm_one(m: &Array2<C64>) -> f64 {
    m.columns().into_iter().map(|col| col.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn ladder_entries_match_defining_relation() {
        let space = FockSpace::single(2).unwrap();
        let a = FockOperator::annihilator(space, Mode::Plain).unwrap();
        for r in 0..3 {
            for col in 0..3 {
                let expected = match (r, col) {
                    (0, 1) => 1.0,
                    (1, 2) => 2f64.sqrt(),
                    _ => 0.0,
                };
                assert_eq!(a.entry(r, col), c(expected));
            }
        }
        assert_eq!(a.apply(&space.basis_vector(0)).unwrap(), Array1::zeros(3));
    }

    #[test]
    fn tilde_on_single_space_is_rejected() {
        let space = FockSpace::single(3).unwrap();
        assert_eq!(FockOperator::annihilator(space, Mode::Tilde), Err(FockError::NotDoubled));
        assert_eq!(FockSpace::single(0), Err(FockError::InvalidTruncation(0)));
    }

    #[test]
    fn ccr_holds_on_interior_and_fails_only_at_the_top() {
        let space = FockSpace::single(2).unwrap();
        let a = FockOperator::annihilator(space, Mode::Plain).unwrap();
        let comm = commutator(&a, &a.adjoint()).unwrap();
        let id = FockOperator::identity(space);
        assert!(comm.max_abs_diff_interior(&id).unwrap() < 1e-15);
        // truncation: [a, a^dag] on |n_max> is -n_max
        assert!((comm.entry(2, 2) - c(-2.0)).norm() < 1e-15);
        assert_eq!(commutator(&a, &a).unwrap(), FockOperator::zeros(space));
    }

    #[test]
    fn plain_and_tilde_commute_exactly() {
        let space = FockSpace::doubled(3).unwrap();
        let a = FockOperator::annihilator(space, Mode::Plain).unwrap();
        let at = FockOperator::annihilator(space, Mode::Tilde).unwrap();
        assert_eq!(commutator(&a, &at).unwrap(), FockOperator::zeros(space));
        assert_eq!(commutator(&a, &at.adjoint()).unwrap(), FockOperator::zeros(space));
    }

    #[test]
    fn number_commutator_with_lowering() {
        // [N, a] = -a, checked against an explicit entrywise product
        let space = FockSpace::single(5).unwrap();
        let a = FockOperator::annihilator(space, Mode::Plain).unwrap();
        let n = FockOperator::number(space, Mode::Plain).unwrap();
        let comm = commutator(&n, &a).unwrap();
        let dim = space.dim();
        let mut oracle = Array2::<C64>::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..dim {
                    s += n.entry(i, k) * a.entry(k, j) - a.entry(i, k) * n.entry(k, j);
                }
                oracle[[i, j]] = s;
            }
        }
        assert_eq!(comm.matrix(), &oracle);
        assert!(comm.max_abs_diff_interior(&(-&a)).unwrap() < 1e-15);
    }

    #[test]
    fn adjoint_is_an_involution() {
        let space = FockSpace::doubled(3).unwrap();
        let a = FockOperator::annihilator(space, Mode::Tilde).unwrap();
        let x = &a.scale(C64::new(0.3, -1.7)) + &FockOperator::number(space, Mode::Plain).unwrap();
        assert_eq!(x.adjoint().adjoint(), x);
    }

    #[test]
    fn expectation_requires_normalization() {
        let space = FockSpace::single(4).unwrap();
        let n = FockOperator::number(space, Mode::Plain).unwrap();
        assert_eq!(expectation(&space.basis_vector(0), &n).unwrap(), c(0.0));
        assert_eq!(expectation(&space.basis_vector(1), &n).unwrap(), c(1.0));
        let v = space.basis_vector(1).mapv(|z| z * 2.0);
        assert!(matches!(expectation(&v, &n), Err(FockError::NotNormalized { .. })));
    }

    #[test]
    fn exp_of_zero_and_diagonal() {
        let space = FockSpace::single(4).unwrap();
        let e = exp_operator(&FockOperator::zeros(space)).unwrap();
        assert_eq!(e, FockOperator::identity(space));
        let gen = FockOperator::diagonal(space, |i| i as f64).scale(C64::new(0.0, PI));
        let e = exp_operator(&gen).unwrap();
        let expected = FockOperator::diagonal(space, |i| if i % 2 == 0 { 1.0 } else { -1.0 });
        assert!(e.max_abs_diff(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn exp_of_rotation_generator_at_large_norm() {
        // [[0,-t],[t,0]] exponentiates to a rotation by t
        let space = FockSpace::single(1).unwrap();
        for t in [0.1, 3.0, 17.5, 40.0] {
            let m = ndarray::arr2(&[[c(0.0), c(-t)], [c(t), c(0.0)]]);
            let op = FockOperator::from_matrix(space, m).unwrap();
            let e = exp_operator(&op).unwrap();
            let expected = ndarray::arr2(&[[c(t.cos()), c(-t.sin())], [c(t.sin()), c(t.cos())]]);
            let expected = FockOperator::from_matrix(space, expected).unwrap();
            assert!(e.max_abs_diff(&expected).unwrap() < 1e-10 * t.max(1.0), "t = {t}");
        }
    }

    #[test]
    fn exp_inverse_pair_multiplies_to_identity() {
        let space = FockSpace::doubled(3).unwrap();
        let a = FockOperator::annihilator(space, Mode::Plain).unwrap();
        let at = FockOperator::annihilator(space, Mode::Tilde).unwrap();
        let x = &(&a * &at.adjoint()).scale(C64::new(0.7, 0.2)) + &a.scale(C64::new(-0.4, 1.1));
        assert!(x.norm_one() <= 10.0);
        let prod = exp_operator(&x).unwrap().compose(&exp_operator(&-&x).unwrap()).unwrap();
        assert!(prod.max_abs_diff(&FockOperator::identity(space)).unwrap() < 1e-9);
    }

    #[test]
    fn exp_apply_agrees_with_full_exponential() {
        let space = FockSpace::doubled(4).unwrap();
        let a = FockOperator::annihilator(space, Mode::Plain).unwrap();
        let at = FockOperator::annihilator(space, Mode::Tilde).unwrap();
        let k = &(&a.adjoint() * &at.adjoint()) - &(&a * &at);
        let x = k.scale_real(0.9);
        let v = space.basis_vector(space.pair_index(1, 0));
        let full = exp_operator(&x).unwrap().apply(&v).unwrap();
        let action = exp_apply(&x, &v).unwrap();
        let diff = (&full - &action).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn non_finite_operator_is_rejected() {
        let space = FockSpace::single(1).unwrap();
        let op = FockOperator::diagonal(space, |_| f64::NAN);
        assert_eq!(exp_operator(&op), Err(FockError::NonFinite));
    }

    #[test]
    fn swap_conjugation_exchanges_factors() {
        let space = FockSpace::doubled(3).unwrap();
        let a = FockOperator::annihilator(space, Mode::Plain).unwrap();
        let at = FockOperator::annihilator(space, Mode::Tilde).unwrap();
        assert_eq!(a.swap_conjugate().unwrap(), at);
    }
}
