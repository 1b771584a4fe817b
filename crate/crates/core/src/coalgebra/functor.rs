use std::collections::BTreeSet;

use super::CoalgebraError;

/// Largest carrier the exhaustive powerset checks accept.
pub const POWERSET_CAP: usize = 12;

/// A total function `{0..domain} -> {0..codomain}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteFunction {
    map: Vec<usize>,
    codomain: usize,
}

impl FiniteFunction {
    pub fn new(map: Vec<usize>, codomain: usize) -> Result<Self, CoalgebraError> {
        if let Some((position, &value)) = map.iter().enumerate().find(|(_, &v)| v >= codomain) {
            return Err(CoalgebraError::OutsideCodomain { position, value, codomain });
        }
        Ok(Self { map, codomain })
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect(), codomain: n }
    }

    pub fn constant(domain: usize, value: usize, codomain: usize) -> Result<Self, CoalgebraError> {
        Self::new(vec![value; domain], codomain)
    }

    pub fn domain(&self) -> usize {
        self.map.len()
    }

    pub fn codomain(&self) -> usize {
        self.codomain
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn values(&self) -> &[usize] {
        &self.map
    }

    /// `g . self`.
    pub fn then(&self, g: &FiniteFunction) -> Result<FiniteFunction, CoalgebraError> {
        if self.codomain != g.domain() {
            return Err(CoalgebraError::NotComposable { left: self.codomain, right: g.domain() });
        }
        Ok(FiniteFunction { map: self.map.iter().map(|&y| g.apply(y)).collect(), codomain: g.codomain })
    }

    /// Direct image of a subset given as a bitmask.
    pub fn image(&self, subset: u64) -> u64 {
        self.map.iter().enumerate().filter(|(x, _)| subset >> x & 1 == 1).fold(0, |acc, (_, &y)| acc | 1 << y)
    }

    /// Preimage `{x | f(x) in T}` of a subset given as a bitmask.
    pub fn preimage(&self, subset: u64) -> u64 {
        self.map.iter().enumerate().filter(|(_, &y)| subset >> y & 1 == 1).fold(0, |acc, (x, _)| acc | 1 << x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctorReport {
    /// `P(g . f) = P(g) . P(f)`
    pub covariant_composition: bool,
    /// `P(id) = id` on `X`, `Y` and `Z`
    pub covariant_identity: bool,
    /// `P^op(g . f) = P^op(f) . P^op(g)`
    pub contravariant_composition: bool,
    pub contravariant_identity: bool,
    /// Bitmask image and preimage agree with their set-builder definitions.
    pub definitions_match: bool,
    pub subsets_checked: usize,
}

impl FunctorReport {
    pub fn holds(&self) -> bool {
        self.covariant_composition
            && self.covariant_identity
            && self.contravariant_composition
            && self.contravariant_identity
            && self.definitions_match
    }
}

/// Exhaustive check of the covariant and contravariant powerset functor laws
/// for `f: X -> Y`, `g: Y -> Z`.
pub fn powerset_functor_check(f: &FiniteFunction, g: &FiniteFunction) -> Result<FunctorReport, CoalgebraError> {
    for size in [f.domain(), f.codomain(), g.codomain()] {
        if size > POWERSET_CAP {
            return Err(CoalgebraError::SizeCap { size, cap: POWERSET_CAP });
        }
    }
    let gf = f.then(g)?;
    let (x, y, z) = (f.domain(), f.codomain(), g.codomain());
    let mut subsets_checked = 0;

    let covariant_composition = all_subsets(x).all(|s| gf.image(s) == g.image(f.image(s)));
    let contravariant_composition = all_subsets(z).all(|t| gf.preimage(t) == f.preimage(g.preimage(t)));
    let mut covariant_identity = true;
    let mut contravariant_identity = true;
    for n in [x, y, z] {
        let id = FiniteFunction::identity(n);
        covariant_identity &= all_subsets(n).all(|s| id.image(s) == s);
        contravariant_identity &= all_subsets(n).all(|s| id.preimage(s) == s);
        subsets_checked += 2 << n;
    }
    subsets_checked += (1 << x) + (1 << z);

    let mut definitions_match = true;
    for (h, from, to) in [(f, x, y), (g, y, z), (&gf, x, z)] {
        definitions_match &= all_subsets(from).all(|s| {
            let members: BTreeSet<usize> = (0..from).filter(|i| s >> i & 1 == 1).collect();
            let image: BTreeSet<usize> = members.iter().map(|&i| h.apply(i)).collect();
            h.image(s) == to_mask(&image)
        });
        definitions_match &= all_subsets(to).all(|t| {
            let members: BTreeSet<usize> = (0..to).filter(|i| t >> i & 1 == 1).collect();
            let pre: BTreeSet<usize> = (0..from).filter(|&i| members.contains(&h.apply(i))).collect();
            h.preimage(t) == to_mask(&pre)
        });
        subsets_checked += (1 << from) + (1 << to);
    }

    Ok(FunctorReport {
        covariant_composition,
        covariant_identity,
        contravariant_composition,
        contravariant_identity,
        definitions_match,
        subsets_checked,
    })
}

fn all_subsets(n: usize) -> impl Iterator<Item = u64> {
    0..(1u64 << n)
}

fn to_mask(set: &BTreeSet<usize>) -> u64 {
    set.iter().fold(0, |acc, &i| acc | 1 << i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_acts_trivially() {
        let id = FiniteFunction::identity(5);
        for s in 0..32 {
            assert_eq!(id.image(s), s);
            assert_eq!(id.preimage(s), s);
        }
        assert!(powerset_functor_check(&id, &id).unwrap().holds());
    }

    #[test]
    fn constant_map_image_and_preimage() {
        let f = FiniteFunction::constant(2, 0, 1).unwrap();
        assert_eq!(f.image(0b01), 0b1);
        assert_eq!(f.preimage(0b1), 0b11);
        assert_eq!(f.image(0), 0);
    }

    #[test]
    fn validation() {
        assert_eq!(
            FiniteFunction::new(vec![0, 3], 2),
            Err(CoalgebraError::OutsideCodomain { position: 1, value: 3, codomain: 2 })
        );
        let f = FiniteFunction::identity(13);
        assert_eq!(powerset_functor_check(&f, &f), Err(CoalgebraError::SizeCap { size: 13, cap: 12 }));
        let g = FiniteFunction::identity(3);
        assert_eq!(
            powerset_functor_check(&FiniteFunction::identity(2), &g),
            Err(CoalgebraError::NotComposable { left: 2, right: 3 })
        );
    }

    #[test]
    fn composite_at_the_cap() {
        let f = FiniteFunction::new((0..12).map(|i| (i * 5) % 12).collect(), 12).unwrap();
        let g = FiniteFunction::new((0..12).map(|i| i / 3).collect(), 4).unwrap();
        assert!(powerset_functor_check(&f, &g).unwrap().holds());
    }
}
