use std::fmt;
use std::hash::{Hash, Hasher};

use super::{CoalgebraError, ColoredMachine, Lts};
use crate::thermal::condensate_occupation;

/// Significant digits kept in order-parameter labels.
pub const DEFAULT_LABEL_DIGITS: usize = 12;

/// An order-parameter value rounded to a fixed number of significant digits.
#[derive(Debug, Clone, Copy)]
pub struct OrderLabel(f64);

impl OrderLabel {
    pub fn new(value: f64, digits: usize) -> Self {
        let digits = digits.clamp(1, 17);
        let rounded: f64 = format!("{:.*e}", digits - 1, value).parse().expect("formatted float");
        OrderLabel(if rounded == 0.0 { 0.0 } else { rounded })
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl PartialEq for OrderLabel {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for OrderLabel {}

impl Hash for OrderLabel {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl fmt::Display for OrderLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The discretized foliation: states are vacua at the grid angles, labels are
/// their condensate numbers, and each vacuum steps to the next grid point.
/// The last vacuum is stationary.
#[derive(Debug, Clone)]
pub struct Foliation {
    pub thetas: Vec<f64>,
    pub lts: Lts<OrderLabel>,
    pub machine: ColoredMachine<OrderLabel>,
}

pub fn foliation_as_machine(theta_grid: &[f64], digits: usize) -> Result<Foliation, CoalgebraError> {
    if theta_grid.is_empty() {
        return Err(CoalgebraError::EmptyGrid);
    }
    for &t in theta_grid {
        if !t.is_finite() || t < 0.0 {
            return Err(CoalgebraError::InvalidGridValue(t));
        }
    }
    if let Some(i) = theta_grid.windows(2).position(|w| w[1] <= w[0]) {
        return Err(CoalgebraError::NonMonotoneGrid(i + 1));
    }
    let last = theta_grid.len() - 1;
    let names: Vec<String> = theta_grid.iter().map(|t| format!("theta={t}")).collect();
    let mu: Vec<(OrderLabel, usize)> = theta_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| (OrderLabel::new(condensate_occupation(t), digits), (i + 1).min(last)))
        .collect();
    let machine = ColoredMachine::with_names(names, mu)?;
    let lts = machine.to_lts();
    Ok(Foliation { thetas: theta_grid.to_vec(), lts, machine })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::behaviour;

    #[test]
    fn single_stationary_vacuum() {
        let fol = foliation_as_machine(&[0.0], DEFAULT_LABEL_DIGITS).unwrap();
        let stream = behaviour(&fol.machine, 0, 5).unwrap();
        assert!(stream.colors.iter().all(|c| c.value() == 0.0));
    }

    #[test]
    fn two_point_grid() {
        let fol = foliation_as_machine(&[0.0, 1f64.asinh()], DEFAULT_LABEL_DIGITS).unwrap();
        let values: Vec<f64> = behaviour(&fol.machine, 0, 4).unwrap().colors.iter().map(|c| c.value()).collect();
        assert_eq!(values, [0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn grid_validation() {
        assert_eq!(foliation_as_machine(&[0.1, 0.1], 12).unwrap_err(), CoalgebraError::NonMonotoneGrid(1));
        assert_eq!(foliation_as_machine(&[], 12).unwrap_err(), CoalgebraError::EmptyGrid);
        assert!(matches!(foliation_as_machine(&[-1.0], 12), Err(CoalgebraError::InvalidGridValue(_))));
    }

    #[test]
    fn labels_round_to_significant_digits() {
        assert_eq!(OrderLabel::new(0.123456789012345, 12).value(), 0.123456789012);
        assert_eq!(OrderLabel::new(1.0 + 1e-14, 12), OrderLabel::new(1.0, 12));
        assert_ne!(OrderLabel::new(1.0 + 1e-9, 12), OrderLabel::new(1.0, 12));
    }
}
