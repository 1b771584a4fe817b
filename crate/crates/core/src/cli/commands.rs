use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Cell, CliError, FibMode, RunConfig, Table};
use crate::coalgebra::{
    behaviour, foliation_as_machine, format::parse_machine, observational_equivalence, powerset_functor_check,
    CoalgebraError, ColoredMachine, FiniteFunction,
};
use crate::fibonacci::{generate, GenerationMode};
use crate::fock::{FockOperator, FockSpace, Mode};
use crate::hopf::{bogoliubov, ccr_residuals};
use crate::qubit::{
    adjoint, evolution_matrix, evolve, identity, mat_mul, max_abs_diff, mix, pair_entropy, TwoLevelParams,
};
use crate::thermal::{
    bose_occupation, build_vacuum, condensate_occupation, entropy_closed_form, kms_check, minimize_mode,
    mode_free_energy, modular_checks, suggested_n_max, vacuum_overlap, GibbsEnsemble, ModeSpec, ThermalError,
    VACUUM_TAIL_TOL,
};

pub struct Outcome {
    pub table: Table,
    /// Set when a check exceeded its tolerance; the table is still printed.
    pub failure: Option<String>,
}

impl Outcome {
    fn checked(table: Table, worst: f64, tol: f64, what: &str) -> Self {
        let failure = (!(worst <= tol)).then(|| format!("{what} {worst:.3e} exceeds tolerance {tol:.1e}"));
        Outcome { table, failure }
    }
}

fn positive(flag: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Usage(format!("{flag} must be positive and finite, got {x}")))
    }
}

fn finite(flag: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Usage(format!("{flag} must be finite, got {x}")))
    }
}

fn thermal_err(e: ThermalError) -> CliError {
    match e {
        ThermalError::NonConvergence { .. } => CliError::Numeric(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

fn sweep<T: Sync, R: Send>(config: &RunConfig, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    if config.parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

fn big_cell(n: &BigUint) -> Cell {
    n.to_i64().map(Cell::Int).unwrap_or_else(|| Cell::Text(n.to_string()))
}

pub fn bose(config: &RunConfig, beta: f64, energies: &[f64]) -> Result<Outcome, CliError> {
    positive("--beta", beta)?;
    for &e in energies {
        positive("energy", e)?;
    }
    let tol = config.tol("bose", 1e-10);
    let rows = sweep(config, energies, |&e| minimize_mode(e, beta).map(|m| (e, m)));
    let mut table = Table::new(&["E", "theta_min", "N_bose_closed_form", "N_from_minimizer", "abs_diff"]);
    let mut worst = 0.0f64;
    for row in rows {
        let (e, m) = row.map_err(thermal_err)?;
        let closed = bose_occupation(beta, e);
        let diff = (closed - m.occupation).abs();
        worst = worst.max(diff);
        table.push(vec![e.into(), m.theta.into(), closed.into(), m.occupation.into(), diff.into()]);
    }
    Ok(Outcome::checked(table, worst, tol, "occupation difference"))
}

pub fn gibbs_vs_tfd(config: &RunConfig, beta: f64, energy: f64) -> Result<Outcome, CliError> {
    positive("--beta", beta)?;
    positive("--energy", energy)?;
    let tol = config.tol("gibbs", 1e-8);
    let n_max = config.n_max;
    let theta = minimize_mode(energy, beta).map_err(thermal_err)?.theta;
    let vacuum = build_vacuum(&[ModeSpec::new(energy, theta).map_err(thermal_err)?], n_max).map_err(thermal_err)?;
    let space = FockSpace::single(n_max).map_err(|e| CliError::Usage(e.to_string()))?;
    let h = FockOperator::number(space, Mode::Plain).expect("valid space").scale_real(energy);
    let ens = GibbsEnsemble::new(h, beta).map_err(thermal_err)?;

    let n = FockOperator::number(space, Mode::Plain).expect("valid space");
    let a = FockOperator::annihilator(space, Mode::Plain).expect("valid space");
    let observables = [
        ("N", n.clone()),
        ("N^2", n.compose(&n).expect("same space")),
        ("a+a^dag", a.try_add(&a.adjoint()).expect("same space")),
    ];
    let mut table = Table::new(&["observable", "gibbs_average", "vacuum_expectation", "abs_diff"]);
    let mut worst = 0.0f64;
    for (name, op) in &observables {
        let g = ens.average(op).map_err(thermal_err)?;
        let v = vacuum.expectation_on_mode(0, op).map_err(thermal_err)?.re;
        let diff = (g - v).abs();
        worst = worst.max(diff);
        table.push(vec![(*name).into(), g.into(), v.into(), diff.into()]);
    }
    Ok(Outcome::checked(table, worst, tol, "average difference"))
}

pub fn kms(config: &RunConfig, beta: f64, energy: f64, t_max: f64, points: usize) -> Result<Outcome, CliError> {
    positive("--beta", beta)?;
    positive("--energy", energy)?;
    finite("--t-max", t_max)?;
    if points < 1 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    let tol = config.tol("kms", 1e-8);
    let space = FockSpace::single(config.n_max).map_err(|e| CliError::Usage(e.to_string()))?;
    let n = FockOperator::number(space, Mode::Plain).expect("valid space");
    let a = FockOperator::annihilator(space, Mode::Plain).expect("valid space");
    let ens = GibbsEnsemble::new(n.scale_real(energy), beta).map_err(thermal_err)?;
    let pairs =
        [("a;a^dag", a.clone(), a.adjoint()), ("N;a+a^dag", n.clone(), a.try_add(&a.adjoint()).expect("same space"))];
    let times: Vec<f64> =
        (0..points).map(|k| if points == 1 { 0.0 } else { t_max * k as f64 / (points - 1) as f64 }).collect();
    let mut table = Table::new(&["t", "pair", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "residual"]);
    let mut worst = 0.0f64;
    for (name, o, p) in &pairs {
        let reports = sweep(config, &times, |&t| kms_check(&ens, o, p, t));
        for (&t, r) in times.iter().zip(reports) {
            let r = r.map_err(thermal_err)?;
            worst = worst.max(r.residual);
            table.push(vec![
                t.into(),
                (*name).into(),
                r.lhs.re.into(),
                r.lhs.im.into(),
                r.rhs.re.into(),
                r.rhs.im.into(),
                r.residual.into(),
            ]);
        }
    }
    Ok(Outcome::checked(table, worst, tol, "KMS residual"))
}

pub fn qubit(
    config: &RunConfig,
    omega1: f64,
    omega2: f64,
    theta: f64,
    t_max: f64,
    steps: usize,
) -> Result<Outcome, CliError> {
    finite("--omega1", omega1)?;
    finite("--omega2", omega2)?;
    finite("--theta", theta)?;
    finite("--t-max", t_max)?;
    if steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {steps}")));
    }
    let tol = config.tol("unitarity", 1e-12);
    let params = TwoLevelParams::new(omega1, omega2, theta).map_err(|e| CliError::Usage(e.to_string()))?;
    let pair = mix(&params);
    let times: Vec<f64> = (0..steps).map(|k| t_max * k as f64 / (steps - 1) as f64).collect();
    let rows = sweep(config, &times, |&t| {
        let u = evolution_matrix(&params, t);
        let residual = max_abs_diff(&mat_mul(&adjoint(&u), &u), &identity());
        let state = evolve(&pair, &params, t);
        pair_entropy(&state).map(|s| (t, state, residual, s))
    });
    let mut table = Table::new(&[
        "t",
        "phi0_re",
        "phi0_im",
        "phi1_re",
        "phi1_im",
        "psi0_re",
        "psi0_im",
        "psi1_re",
        "psi1_im",
        "unitarity_residual",
        "S_phi",
        "S_phi_tilde",
        "S_psi",
        "S_psi_tilde",
    ]);
    let mut worst = 0.0f64;
    for row in rows {
        let (t, state, residual, s) = row.map_err(|e| CliError::Numeric(e.to_string()))?;
        worst = worst.max(residual);
        let mut cells: Vec<Cell> = vec![t.into()];
        for z in state.phi.iter().chain(state.psi.iter()) {
            cells.push(z.re.into());
            cells.push(z.im.into());
        }
        cells.extend([residual.into(), s.phi.0.into(), s.phi.1.into(), s.psi.0.into(), s.psi.1.into()]);
        table.push(cells);
    }
    Ok(Outcome::checked(table, worst, tol, "unitarity residual"))
}

fn fibonacci_oracle(n: usize) -> BigUint {
    let (mut a, mut b) = (BigUint::from(0u32), BigUint::from(1u32));
    for _ in 0..n {
        let next = &a + &b;
        a = std::mem::replace(&mut b, next);
    }
    a
}

pub fn fibonacci(depth: usize, mode: FibMode) -> Result<Outcome, CliError> {
    let mode = match mode {
        FibMode::Tree => GenerationMode::Tree,
        FibMode::Counts => GenerationMode::Counts,
    };
    let census = generate(depth, mode).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut table = Table::new(&["depth", "zeros", "ones", "total", "fibonacci_reference", "match"]);
    let mut mismatch = None;
    for c in &census {
        let total = c.total();
        let reference = fibonacci_oracle(c.depth + 1);
        let ok = total == reference;
        if !ok && mismatch.is_none() {
            mismatch = Some(c.depth);
        }
        table.push(vec![
            c.depth.into(),
            big_cell(&c.zeros),
            big_cell(&c.ones),
            big_cell(&total),
            big_cell(&reference),
            ok.into(),
        ]);
    }
    let failure = mismatch.map(|d| format!("census total differs from the Fibonacci reference at depth {d}"));
    Ok(Outcome { table, failure })
}

fn load_machine(path: &Path) -> Result<ColoredMachine<String>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_machine(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn lookup(m: &ColoredMachine<String>, name: &str, path: &Path) -> Result<usize, CliError> {
    m.state(name).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn machine_stream(config: &RunConfig, file: &Path, start: &str, n: usize) -> Result<String, CliError> {
    let m = load_machine(file)?;
    let x = lookup(&m, start, file)?;
    let stream = behaviour(&m, x, n).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(match config.format {
        super::OutputFormat::Csv => stream.colors.join(" ") + "\n",
        super::OutputFormat::Json => serde_json::json!({ "start": start, "stream": stream.colors }).to_string() + "\n",
    })
}

pub fn machine_equiv(
    config: &RunConfig,
    file: &Path,
    x: &str,
    y: &str,
    other: Option<&Path>,
) -> Result<String, CliError> {
    let m = load_machine(file)?;
    let m2 = match other {
        Some(p) => load_machine(p)?,
        None => m.clone(),
    };
    let ix = lookup(&m, x, file)?;
    let iy = lookup(&m2, y, other.unwrap_or(file))?;
    let verdict = observational_equivalence(&m, ix, &m2, iy).map_err(|e| match e {
        CoalgebraError::DecisionMismatch => CliError::Numeric(e.to_string()),
        other => CliError::Usage(other.to_string()),
    })?;
    Ok(match config.format {
        super::OutputFormat::Csv => match verdict.first_difference {
            None => "equivalent\n".to_string(),
            Some(i) => format!("not equivalent (first difference at index {i})\n"),
        },
        super::OutputFormat::Json => {
            serde_json::json!({
                "equivalent": verdict.equivalent,
                "first_difference": verdict.first_difference,
                "prefix_length": verdict.prefix_length,
            })
            .to_string()
                + "\n"
        }
    })
}

pub fn foliation(
    config: &RunConfig,
    theta_min: f64,
    theta_max: f64,
    points: usize,
    energy: f64,
    beta: f64,
    digits: usize,
) -> Result<Outcome, CliError> {
    if points < 2 {
        return Err(CliError::Usage(format!("--points must be at least 2, got {points}")));
    }
    finite("--theta-min", theta_min)?;
    finite("--theta-max", theta_max)?;
    positive("--energy", energy)?;
    positive("--beta", beta)?;
    if theta_min < 0.0 {
        return Err(CliError::Usage(format!("--theta-min must be non-negative, got {theta_min}")));
    }
    if !(theta_max > theta_min) {
        return Err(CliError::Usage(format!("--theta-max must exceed --theta-min, got {theta_max} <= {theta_min}")));
    }
    if !(1..=17).contains(&digits) {
        return Err(CliError::Usage(format!("--digits must lie in 1..=17, got {digits}")));
    }
    let grid: Vec<f64> =
        (0..points).map(|i| theta_min + (theta_max - theta_min) * i as f64 / (points - 1) as f64).collect();
    let fol = foliation_as_machine(&grid, digits).map_err(|e| CliError::Usage(e.to_string()))?;
    let stream = behaviour(&fol.machine, 0, points).expect("state 0 exists");
    let n_max = config.n_max.max(suggested_n_max(theta_max, 1e-14));
    let indices: Vec<usize> = (0..points).collect();
    let overlaps = sweep(config, &indices, |&i| (i + 1 < points).then(|| vacuum_overlap(grid[i], grid[i + 1], n_max)));

    let mut table = Table::new(&["index", "theta", "order_parameter", "entropy", "free_energy", "overlap_next"]);
    for (i, (&theta, label)) in grid.iter().zip(&stream.colors).enumerate() {
        let occupation = condensate_occupation(theta);
        table.push(vec![
            i.into(),
            theta.into(),
            label.value().into(),
            entropy_closed_form(occupation).into(),
            mode_free_energy(energy, beta, theta).into(),
            overlaps[i].map(Cell::num).unwrap_or(Cell::Null),
        ]);
    }
    let bad = overlaps.iter().flatten().find(|&&o| !(o > 0.0 && o < 1.0));
    let failure = bad.map(|o| format!("consecutive overlap {o} outside (0, 1)"));
    Ok(Outcome { table, failure })
}

fn random_machine(rng: &mut ChaCha8Rng, size: usize, colors: usize) -> ColoredMachine<String> {
    let mu = (0..size).map(|_| (format!("c{}", rng.gen_range(0..colors)), rng.gen_range(0..size))).collect();
    ColoredMachine::new(mu).expect("targets are in range")
}

fn random_function(rng: &mut ChaCha8Rng, domain: usize, codomain: usize) -> FiniteFunction {
    FiniteFunction::new((0..domain).map(|_| rng.gen_range(0..codomain)).collect(), codomain).expect("in range")
}

pub fn selfcheck(config: &RunConfig, err: &mut dyn Write) -> Result<Outcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut checks: Vec<(&str, f64, f64)> = Vec::new();
    let num = |e: ThermalError| CliError::Numeric(e.to_string());

    let mut worst = 0.0f64;
    for i in 0..5 {
        for j in 0..5 {
            let (beta, e) = (0.2 + 1.2 * i as f64, 0.2 + 1.2 * j as f64);
            let m = minimize_mode(e, beta).map_err(num)?;
            worst = worst.max((m.occupation - bose_occupation(beta, e)).abs());
        }
    }
    checks.push(("bose", worst, config.tol("bose", 1e-10)));

    let gibbs = gibbs_vs_tfd(config, 1.0, 1.0)?;
    let worst = gibbs.table.column("abs_diff").expect("column").iter().filter_map(|c| c.as_f64()).fold(0.0, f64::max);
    checks.push(("gibbs", worst, config.tol("gibbs", 1e-8)));

    let space = FockSpace::doubled(12).expect("valid");
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let theta = rng.gen_range(-2.0..2.0);
        let pair = bogoliubov(theta, space).map_err(|e| CliError::Numeric(e.to_string()))?;
        let r = ccr_residuals(&pair).map_err(|e| CliError::Numeric(e.to_string()))?;
        worst = r.iter().copied().fold(worst, f64::max);
    }
    checks.push(("ccr", worst, config.tol("ccr", 1e-9)));

    let k = kms(config, 1.0, 1.0, 1.0, 10)?;
    let worst = k.table.column("residual").expect("column").iter().filter_map(|c| c.as_f64()).fold(0.0, f64::max);
    checks.push(("kms", worst, config.tol("kms", 1e-8)));

    let vacuum = build_vacuum(&[ModeSpec::new(1.0, 0.5).map_err(num)?], suggested_n_max(0.5, VACUUM_TAIL_TOL).max(24))
        .map_err(num)?;
    let report = modular_checks(&vacuum).map_err(num)?;
    checks.push((
        "modular",
        report.relation_residual_a.max(report.relation_residual_a_dag),
        config.tol("modular", 1e-8),
    ));

    let params = TwoLevelParams::new(1.0, 2.5, PI / 4.0).map_err(|e| CliError::Usage(e.to_string()))?;
    let worst = (0..100)
        .map(|s| {
            let u = evolution_matrix(&params, 0.1 * s as f64);
            max_abs_diff(&mat_mul(&adjoint(&u), &u), &identity())
        })
        .fold(0.0, f64::max);
    checks.push(("unitarity", worst, config.tol("unitarity", 1e-12)));

    let census = generate(30, GenerationMode::Counts).map_err(|e| CliError::Usage(e.to_string()))?;
    let off = census.iter().filter(|c| c.total() != fibonacci_oracle(c.depth + 1)).count();
    checks.push(("fibonacci", off as f64, 0.0));

    let mut mismatches = 0usize;
    for _ in 0..200 {
        let (size, colors) = (rng.gen_range(1..=6), rng.gen_range(1..=3));
        let m = random_machine(&mut rng, size, colors);
        let (x, y) = (rng.gen_range(0..size), rng.gen_range(0..size));
        if observational_equivalence(&m, x, &m, y).is_err() {
            mismatches += 1;
        }
    }
    checks.push(("equivalence", mismatches as f64, 0.0));

    let mut broken = 0usize;
    for _ in 0..20 {
        let (a, b, c) = (rng.gen_range(1..=5), rng.gen_range(1..=5), rng.gen_range(1..=5));
        let f = random_function(&mut rng, a, b);
        let g = random_function(&mut rng, b, c);
        if !powerset_functor_check(&f, &g).map(|r| r.holds()).unwrap_or(false) {
            broken += 1;
        }
    }
    checks.push(("functor", broken as f64, 0.0));

    let fol = foliation(config, 0.0, 1.0, 5, 1.0, 1.0, crate::coalgebra::DEFAULT_LABEL_DIGITS)?;
    let labels = fol.table.column("order_parameter").expect("column");
    let thetas = fol.table.column("theta").expect("column");
    let worst = labels
        .iter()
        .zip(&thetas)
        .map(|(l, t)| {
            let expected = crate::coalgebra::OrderLabel::new(condensate_occupation(t.as_f64().unwrap_or(f64::NAN)), 12);
            (l.as_f64().unwrap_or(f64::NAN) - expected.value()).abs()
        })
        .fold(0.0, f64::max);
    checks.push(("foliation", worst, 0.0));

    let mut table = Table::new(&["check", "value", "tolerance", "pass"]);
    let mut failed = Vec::new();
    for (name, value, tol) in checks {
        let pass = value <= tol;
        let _ = writeln!(err, "{} {name}: {value:.3e} (tolerance {tol:.1e})", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(name);
        }
        table.push(vec![name.into(), value.into(), tol.into(), pass.into()]);
    }
    let failure = (!failed.is_empty()).then(|| format!("failed checks: {}", failed.join(", ")));
    Ok(Outcome { table, failure })
}
