use ndarray::Array2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use thermofield::cli::{Cell, Table};
use thermofield::coalgebra::{
    behaviour, foliation_as_machine, observational_equivalence, powerset_functor_check, prefix_homomorphisms,
    ColoredMachine, FiniteFunction, DEFAULT_LABEL_DIGITS,
};
use thermofield::fibonacci::{generate, GenerationMode, StateTree};
use thermofield::fock::{commutator, exp_apply, exp_operator, FockOperator, FockSpace, Mode};
use thermofield::hopf::{
    bogoliubov, bogoliubov_generator, ccr_residuals, conjugated_block, core_indices, deformed_coproduct,
    DeformationParam,
};
use thermofield::qubit::{
    adjoint, evolution_matrix, identity, inner, mat_mul, mat_scale, max_abs_diff, mix, pair_entropy, pair_generator,
    pair_propagator, schrodinger_propagator, Mat2, QubitPair, TwoLevelParams,
};
use thermofield::thermal::{
    build_vacuum, condensate_weights, minimize_mode, mode_free_energy, product_overlap, tail_bound, GibbsEnsemble,
    ModeSpec,
};

fn random_matrix(dim: usize, entries: &[(f64, f64)]) -> Array2<C64> {
    Array2::from_shape_fn((dim, dim), |(r, c)| {
        let (re, im) = entries[(r * dim + c) % entries.len()];
        C64::new(re, im)
    })
}

fn machine_strategy(max_size: usize, max_colors: u8) -> impl Strategy<Value = ColoredMachine<u8>> {
    (1..=max_size, 1..=max_colors).prop_flat_map(|(size, colors)| {
        prop::collection::vec((0..colors, 0..size), size).prop_map(|mu| ColoredMachine::new(mu).unwrap())
    })
}

fn function_strategy(domain: usize, codomain: usize) -> impl Strategy<Value = FiniteFunction> {
    prop::collection::vec(0..codomain, domain).prop_map(move |map| FiniteFunction::new(map, codomain).unwrap())
}

fn cell_strategy() -> impl Strategy<Value = Cell> {
    prop_oneof![
        Just(Cell::Null),
        any::<bool>().prop_map(Cell::Bool),
        any::<i64>().prop_map(Cell::Int),
        any::<f64>().prop_map(Cell::num),
        "[ -~]{0,12}".prop_map(Cell::Text),
    ]
}

/// Difference after rotating `y` onto the global phase of `x` at its (0,0) entry.
fn aligned_diff(x: &Mat2, y: &Mat2) -> f64 {
    let phase = if x[0][0].norm() > 1e-6 && y[0][0].norm() > 1e-6 {
        x[0][0] / y[0][0] * (y[0][0].norm() / x[0][0].norm())
    } else {
        C64::new(1.0, 0.0)
    };
    max_abs_diff(x, &mat_scale(y, phase))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn adjoint_is_an_involution(entries in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..30), n_max in 1usize..6) {
        let space = FockSpace::single(n_max).unwrap();
        let op = FockOperator::from_matrix(space, random_matrix(space.dim(), &entries)).unwrap();
        prop_assert_eq!(op.adjoint().adjoint(), op);
    }

    #[test]
    fn exp_inverse(entries in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..40), n_max in 1usize..6, scale in 0.0..10.0f64) {
        let space = FockSpace::single(n_max).unwrap();
        let raw = FockOperator::from_matrix(space, random_matrix(space.dim(), &entries)).unwrap();
        let norm = raw.norm_one();
        prop_assume!(norm > 0.0);
        let x = raw.scale_real(scale / norm);
        let product = exp_operator(&x).unwrap().compose(&exp_operator(&x.scale_real(-1.0)).unwrap()).unwrap();
        prop_assert!(product.max_abs_diff(&FockOperator::identity(space)).unwrap() < 1e-9);
    }

    #[test]
    fn ccr_hold_on_interior(theta in -2.0..2.0f64, n_max in 3usize..12) {
        let pair = bogoliubov(theta, FockSpace::doubled(n_max).unwrap()).unwrap();
        for r in ccr_residuals(&pair).unwrap() {
            prop_assert!(r < 1e-9, "residual {r}");
        }
    }

    #[test]
    fn su11_closure(theta in -1.5..1.5f64, n_max in 3usize..10) {
        let space = FockSpace::doubled(n_max).unwrap();
        let pair = bogoliubov(theta, space).unwrap();
        let (a, at) = (&pair.a_theta, &pair.a_tilde_theta);
        let k_plus = a.adjoint().compose(&at.adjoint()).unwrap();
        let k_minus = a.compose(at).unwrap();
        let k_zero = a.adjoint().compose(a).unwrap().try_add(&at.compose(&at.adjoint()).unwrap()).unwrap().scale_real(0.5);
        let check = |x: &FockOperator, y: &FockOperator| x.max_abs_diff_interior(y).unwrap();
        prop_assert!(check(&commutator(&k_zero, &k_plus).unwrap(), &k_plus) < 1e-10);
        prop_assert!(check(&commutator(&k_zero, &k_minus).unwrap(), &k_minus.scale_real(-1.0)) < 1e-10);
        prop_assert!(check(&commutator(&k_minus, &k_plus).unwrap(), &k_zero.scale_real(2.0)) < 1e-10);
    }

    #[test]
    fn hyperbolic_constraint(theta in -8.0..8.0f64) {
        let p = DeformationParam::from_theta(theta).unwrap();
        prop_assert!(p.hyperbolic_residual() <= 1e-14 * theta.cosh().powi(2).max(1.0));
    }

    #[test]
    fn coproduct_symmetric_only_at_q_one(theta in prop_oneof![Just(0.0), -2.0..2.0f64], n_max in 2usize..6) {
        let space = FockSpace::single(n_max).unwrap();
        let a = FockOperator::annihilator(space, Mode::Plain).unwrap();
        let p = DeformationParam::from_theta(theta).unwrap();
        let delta = deformed_coproduct(&a, &p).unwrap();
        let swapped = delta.swap_conjugate().unwrap();
        if p.is_undeformed() {
            prop_assert_eq!(swapped, delta);
        } else {
            prop_assert!(swapped != delta);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn bogoliubov_group_law(t1 in -0.4..0.4f64, t2 in -0.4..0.4f64) {
        let space = FockSpace::doubled(20).unwrap();
        let a = FockOperator::annihilator(space, Mode::Plain).unwrap();
        let g = bogoliubov_generator(space).unwrap();
        let cutoff = 4;
        let core = core_indices(space, cutoff);
        let once = conjugated_block(&a, t1 + t2, cutoff).unwrap();
        let mut worst = 0.0f64;
        for (j, &col) in core.iter().enumerate() {
            let mut v = space.basis_vector(col);
            for t in [-t2, -t1] {
                v = exp_apply(&g.scale(C64::new(0.0, t)), &v).unwrap();
            }
            v = a.apply(&v).unwrap();
            for t in [t1, t2] {
                v = exp_apply(&g.scale(C64::new(0.0, t)), &v).unwrap();
            }
            for (i, &row) in core.iter().enumerate() {
                worst = worst.max((v[row] - once[[i, j]]).norm());
            }
        }
        prop_assert!(worst < 1e-7, "group law residual {worst}");
    }

    #[test]
    fn tfd_gibbs_polynomials(beta in 0.2..5.0f64, energy in 0.2..5.0f64) {
        let theta = minimize_mode(energy, beta).unwrap().theta;
        // the dropped tail, weighted by n^3, must sit well below the tolerance
        let t2 = theta.tanh().powi(2);
        let mut n_max = 10usize;
        while t2.powi(n_max as i32 + 1) * ((n_max + 1) as f64).powi(3) > 1e-13 {
            n_max += 10;
        }
        let vacuum = build_vacuum(&[ModeSpec::new(energy, theta).unwrap()], n_max).unwrap();
        let space = FockSpace::single(n_max).unwrap();
        let n = FockOperator::number(space, Mode::Plain).unwrap();
        let ens = GibbsEnsemble::new(n.scale_real(energy), beta).unwrap();
        let mut power = FockOperator::identity(space);
        for _ in 0..3 {
            power = power.compose(&n).unwrap();
            let g = ens.average(&power).unwrap();
            let v = vacuum.expectation_on_mode(0, &power).unwrap().re;
            prop_assert!((g - v).abs() < 1e-8, "beta {beta} E {energy}: {g} vs {v}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn minimizer_is_a_local_minimum(beta in 0.2..5.0f64, energy in 0.2..5.0f64) {
        let m = minimize_mode(energy, beta).unwrap();
        let oracle = 1.0 / ((beta * energy).exp() - 1.0);
        prop_assert!((m.occupation - oracle).abs() <= 1e-10 * oracle.max(1.0));
        let h = 1e-4;
        let f = |t: f64| mode_free_energy(energy, beta, t);
        prop_assert!(f(m.theta + h) - 2.0 * f(m.theta) + f(m.theta - h) > 0.0);
    }

    #[test]
    fn weights_normalized(theta in 0.0..=3.0f64, n_max in 60usize..200) {
        let sum: f64 = condensate_weights(theta, n_max).iter().sum();
        let tail = tail_bound(theta, n_max);
        prop_assert!(sum >= 1.0 - tail - 1e-14 && sum <= 1.0 + 1e-14, "sum {sum} tail {tail}");
    }

    #[test]
    fn foliation_separation(theta in 0.0..1.5f64, delta in 0.01..1.0f64) {
        let n_max = 600;
        let mut previous = 1.0f64;
        for m in 1..=6 {
            let distinct = product_overlap(&vec![(theta, theta + delta); m], n_max);
            prop_assert!(distinct < previous, "m {m}: {distinct} !< {previous}");
            previous = distinct;
            let same = product_overlap(&vec![(theta, theta); m], n_max);
            prop_assert!((same - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn qubit_unitarity_and_composition(w1 in -3.0..3.0f64, w2 in -3.0..3.0f64, theta in -3.2..3.2f64, t1 in -5.0..5.0f64, t2 in -5.0..5.0f64) {
        prop_assume!((w1 - w2).abs() > 1e-3);
        let p = TwoLevelParams::new(w1, w2, theta).unwrap();
        let u = |t| evolution_matrix(&p, t);
        for t in [t1, t2] {
            let m = u(t);
            prop_assert!(max_abs_diff(&mat_mul(&adjoint(&m), &m), &identity()) < 1e-12);
        }
        // rows are states at time t, so the time dependence factors through e^{-iHt}
        let joint = u(t1 + t2);
        let stepped = mat_mul(&u(t1), &schrodinger_propagator(&p, t2));
        prop_assert!(aligned_diff(&joint, &stepped) < 1e-10);
        let composed = mat_mul(&pair_propagator(&p, t2), &pair_propagator(&p, t1));
        prop_assert!(aligned_diff(&pair_propagator(&p, t1 + t2), &composed) < 1e-10);
    }

    #[test]
    fn qubit_symmetry_and_phase_invariance(w1 in -3.0..3.0f64, w2 in -3.0..3.0f64, theta in -3.2..3.2f64, phase in -7.0..7.0f64) {
        prop_assume!((w1 - w2).abs() > 1e-3);
        let p = TwoLevelParams::new(w1, w2, theta).unwrap();
        let g = pair_generator(&p);
        prop_assert_eq!(g.entropy_term[0][1], g.entropy_term[1][0]);

        let pair = mix(&p);
        let z = C64::from_polar(1.0, phase);
        let turned = QubitPair { phi: [pair.phi[0] * z, pair.phi[1] * z], psi: [pair.psi[0] * z, pair.psi[1] * z] };
        let (a, b) = (pair_entropy(&pair).unwrap(), pair_entropy(&turned).unwrap());
        prop_assert!((a.phi.0 - b.phi.0).abs() < 1e-14 && (a.psi.1 - b.psi.1).abs() < 1e-14);
        prop_assert!((inner(&turned.phi, &turned.phi).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fibonacci_paths_agree(depth in 0usize..=20) {
        let tree = generate(depth, GenerationMode::Tree).unwrap();
        let counts = generate(depth, GenerationMode::Counts).unwrap();
        prop_assert_eq!(tree, counts);
    }

    #[test]
    fn fibonacci_edges_verify(depth in 0usize..=12) {
        let tree = StateTree::build(depth).unwrap();
        for (parent, child) in tree.edges() {
            prop_assert!(thermofield::fibonacci::verify_matrix_semantics(parent, child));
        }
    }

    #[test]
    fn behaviour_is_the_unique_prefix_homomorphism(m in machine_strategy(4, 3)) {
        let alphabet: Vec<u8> = (0..3).collect();
        let n = 2 * m.len();
        let families = prefix_homomorphisms(&m, &alphabet, n, 2);
        prop_assert_eq!(families.len(), 1);
        for k in 0..=n {
            for x in 0..m.len() {
                prop_assert_eq!(&families[0][k][x], &behaviour(&m, x, k).unwrap().colors);
            }
        }
    }

    #[test]
    fn equivalence_is_an_equivalence_relation(m in machine_strategy(8, 3)) {
        let size = m.len();
        let eq = |x: usize, y: usize| observational_equivalence(&m, x, &m, y).unwrap().equivalent;
        let table: Vec<Vec<bool>> = (0..size).map(|x| (0..size).map(|y| eq(x, y)).collect()).collect();
        for x in 0..size {
            prop_assert!(table[x][x]);
            for y in 0..size {
                prop_assert_eq!(table[x][y], table[y][x]);
                for z in 0..size {
                    if table[x][y] && table[y][z] {
                        prop_assert!(table[x][z]);
                    }
                }
            }
        }
    }

    #[test]
    fn decisions_agree_across_machines(m in machine_strategy(8, 3), m2 in machine_strategy(8, 3), x in 0usize..8, y in 0usize..8) {
        let (x, y) = (x % m.len(), y % m2.len());
        prop_assert!(observational_equivalence(&m, x, &m2, y).is_ok());
    }

    #[test]
    fn powerset_laws(sizes in (1usize..=6, 1usize..=6, 1usize..=6).prop_flat_map(|(x, y, z)| (function_strategy(x, y), function_strategy(y, z)))) {
        let (f, g) = sizes;
        prop_assert!(powerset_functor_check(&f, &g).unwrap().holds());
    }

    #[test]
    fn foliation_stream_is_monotone(mut grid in prop::collection::btree_set(0u32..3000, 1..12)) {
        let thetas: Vec<f64> = std::mem::take(&mut grid).into_iter().map(|k| k as f64 * 1e-3).collect();
        let fol = foliation_as_machine(&thetas, DEFAULT_LABEL_DIGITS).unwrap();
        let stream = behaviour(&fol.machine, 0, thetas.len() + 3).unwrap();
        for w in stream.colors.windows(2) {
            prop_assert!(w[0].value() <= w[1].value());
        }
    }

    #[test]
    fn json_tables_round_trip(width in 1usize..5, cells in prop::collection::vec(cell_strategy(), 0..40)) {
        let names: Vec<String> = (0..width).map(|i| format!("c{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut table = Table::new(&refs);
        for row in cells.chunks_exact(width) {
            table.push(row.to_vec());
        }
        prop_assert_eq!(Table::from_json(&table.to_json()).unwrap(), table);
    }
}
