//! Acceptance gate: one test per criterion, each printing a PASS line with
//! the measured numbers once its assertions hold.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakspot_cli::commands;
use weakspot_cli::config::Experiment;
use weakspot_core::{
    cvar, expectation, run, tensor_grid, Element, ElementCache, Material, Mesh, ParamBox,
    RiskSpec, SampledRV, StrengthField,
};

#[test]
fn acceptance_1_adjoint_gradient_check() {
    let start = Instant::now();
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/truss10_gradcheck.toml");
    let exp = Experiment::load(&config).unwrap();
    assert_eq!(exp.mesh.elements.len(), 10);
    assert_eq!(exp.load_groups.n_groups(), 2);
    assert_eq!(exp.quadrature_order, 3);
    assert_eq!(exp.risk, RiskSpec::expectation());

    let outcome = commands::gradcheck(&exp, 1e-6).unwrap();
    let elapsed = start.elapsed();
    assert!(
        outcome.max_relative_error <= 1e-4,
        "max relative error {:e}",
        outcome.max_relative_error
    );
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 1 PASS adjoint gradient: max rel error {:.3e} (tol 1e-4, target 1e-5 {}) in {elapsed:?}",
        outcome.max_relative_error,
        if outcome.max_relative_error <= 1e-5 { "met" } else { "missed" },
    );
}

#[test]
fn acceptance_2_cvar_tail_average_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240551);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let values: Vec<f64> = (0..1000).map(|_| rng.random_range(-25.0..25.0)).collect();
        let rv = SampledRV::equal_weight(values.clone());
        for beta in [0.5, 0.9, 0.95] {
            let m = ((1.0 - beta) * 1000.0f64).round() as usize;
            let mut sorted = values.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let oracle = sorted[..m].iter().sum::<f64>() / m as f64;
            let (got, _) = cvar(&rv, beta);
            let err = (got - oracle).abs();
            worst = worst.max(err);
            assert!(err <= 1e-10, "beta {beta}: |{got} - {oracle}| = {err:e}");
        }
    }
    println!("ACCEPTANCE 2 PASS cvar tail-average oracle: worst abs error {worst:.3e} (tol 1e-10)");
}

#[test]
fn acceptance_3_coherence_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(31415);
    let tol = 1e-12;
    for trial in 0..100 {
        let n = rng.random_range(2..400usize);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let beta: f64 = rng.random_range(0.05..0.95);
        let beta_hi = rng.random_range(beta..0.99);
        let shift = rng.random_range(-1.0..1.0);
        let lambda = rng.random_range(0.01..2.0);

        let rv = SampledRV::equal_weight(x.clone());
        let (c, _) = cvar(&rv, beta);

        // translation equivariance
        let shifted = SampledRV::equal_weight(x.iter().map(|v| v + shift).collect());
        let (cs, _) = cvar(&shifted, beta);
        assert!((cs - (c + shift)).abs() <= tol, "trial {trial}: translation");

        // positive homogeneity
        let scaled = SampledRV::equal_weight(x.iter().map(|v| v * lambda).collect());
        let (cl, _) = cvar(&scaled, beta);
        assert!((cl - lambda * c).abs() <= tol, "trial {trial}: homogeneity");

        // monotone in beta and dominates the mean
        let (chi, _) = cvar(&rv, beta_hi);
        assert!(c <= chi + tol, "trial {trial}: beta monotonicity");
        assert!(rv.mean() <= c + tol, "trial {trial}: cvar >= mean");

        // subadditivity on shared weights
        let sum = SampledRV::equal_weight(x.iter().zip(&y).map(|(a, b)| a + b).collect());
        let (cxy, _) = cvar(&sum, beta);
        let (cy, _) = cvar(&SampledRV::equal_weight(y), beta);
        assert!(cxy <= c + cy + tol, "trial {trial}: subadditivity");
    }
    println!("ACCEPTANCE 3 PASS coherence properties: 100 randomized trials within 1e-12");
}

#[test]
fn acceptance_4_quadrature_exactness() {
    let (a, b) = (0.8f64, 1.2f64);
    let moment = |p: u32| -> f64 {
        (b.powi(p as i32 + 1) - a.powi(p as i32 + 1)) / ((p as f64 + 1.0) * (b - a))
    };
    let mut worst: f64 = 0.0;
    for dim in [1usize, 2, 4] {
        for n_g in [2usize, 3, 4] {
            let grid = tensor_grid(&ParamBox::new(vec![[a, b]; dim]).unwrap(), n_g).unwrap();
            assert_eq!(grid.len(), n_g.pow(dim as u32));
            let max_p = 2 * n_g as u32 - 1;
            // all multivariate monomials with per-variable degree <= 2n-1
            let mut powers = vec![0u32; dim];
            loop {
                let values: Vec<f64> = (0..grid.len())
                    .map(|k| {
                        grid.node(k)
                            .iter()
                            .zip(&powers)
                            .map(|(x, &p)| x.powi(p as i32))
                            .product()
                    })
                    .collect();
                let got = expectation(&values, &grid).unwrap();
                let want: f64 = powers.iter().map(|&p| moment(p)).product();
                let err = (got - want).abs();
                worst = worst.max(err);
                assert!(err <= 1e-12, "dim {dim} n_g {n_g} powers {powers:?}: {err:e}");

                let mut c = dim;
                loop {
                    if c == 0 {
                        break;
                    }
                    c -= 1;
                    powers[c] += 1;
                    if powers[c] <= max_p {
                        break;
                    }
                    powers[c] = 0;
                }
                if powers.iter().all(|&p| p == 0) {
                    break;
                }
            }
        }
    }
    let grid81 = tensor_grid(&ParamBox::new(vec![[0.9, 1.1]; 4]).unwrap(), 3).unwrap();
    assert_eq!(grid81.len(), 81);
    println!("ACCEPTANCE 4 PASS quadrature exactness: worst moment error {worst:.3e} (tol 1e-12); 3^4 grid has 81 nodes");
}

fn deterministic_plate_config() -> &'static str {
    r#"
        seed = 42
        [mesh]
        generator = "plate"
        nx = 20
        ny = 10
        width = 60.0
        height = 30.0
        thickness = 0.1
        [material]
        young_modulus = 2e9
        poisson = 0.3
        density = 7.8
        [load]
        boundary = "bottom"
        direction = [0.0, -1.0]
        magnitude = 4e5
        [xi]
        intervals = [[0.8, 1.2]]
        [quadrature]
        order = 1
        [risk]
        kind = "expectation"
        [sensors]
        placement = "free_boundary"
        [smoothing]
        steps = 4
        [optimizer]
        max_iters = 200
        [scenario]
        mode = "deterministic"
        [[scenario.weak]]
        region = [24.0, 9.0, 39.0, 21.0]
        alpha = 0.1
    "#
}

#[test]
fn acceptance_5_deterministic_plate_recovery() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut exp = Experiment::from_toml(deterministic_plate_config(), dir.path()).unwrap();
    exp.out_dir = dir.path().join("out");
    assert_eq!(exp.mesh.elements.len(), 400);

    let outcome = commands::invert(&exp).unwrap();
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");

    let initial = outcome.summary.initial_objective;
    let final_objective = outcome.summary.objective;
    let orders = (initial / final_objective).log10();
    assert!(
        outcome.summary.iterations <= 200 && orders >= 2.0,
        "objective {initial:e} -> {final_objective:e} ({orders:.2} orders) in {} iterations",
        outcome.summary.iterations
    );

    let weak = exp.scenario.as_ref().unwrap().weak_elements();
    let alpha = &outcome.result.alpha.values;
    let patch: Vec<f64> = weak.iter().map(|&e| alpha[e]).collect();
    let mut rest: Vec<f64> = (0..alpha.len())
        .filter(|e| !weak.contains(e))
        .map(|e| alpha[e])
        .collect();
    rest.sort_by(f64::total_cmp);
    let patch_mean = patch.iter().sum::<f64>() / patch.len() as f64;
    let p10 = rest[rest.len() / 10];
    assert!(
        patch_mean < p10,
        "patch mean {patch_mean:.3} vs 10th percentile elsewhere {p10:.3}"
    );
    println!(
        "ACCEPTANCE 5 PASS deterministic recovery: {orders:.2} orders in {} iterations; patch mean {patch_mean:.3} < p10 {p10:.3}; {elapsed:?}",
        outcome.summary.iterations
    );
}

fn noisy_plate_config() -> &'static str {
    r#"
        seed = 1
        [mesh]
        generator = "plate"
        nx = 10
        ny = 5
        width = 60.0
        height = 30.0
        thickness = 0.1
        [material]
        young_modulus = 2e9
        poisson = 0.3
        density = 7.8
        [load]
        boundary = "bottom"
        direction = [0.0, -1.0]
        magnitude = 4e5
        [xi]
        intervals = [[0.8, 1.2]]
        [quadrature]
        order = 4
        [risk]
        kind = "expectation"
        [sensors]
        placement = "free_boundary"
        [smoothing]
        steps = 4
        [optimizer]
        max_iters = 100
        [scenario]
        mode = "per_sensor_draw"
        [[scenario.weak]]
        region = [12.0, 6.0, 30.0, 18.0]
        alpha = 0.1
    "#
}

#[test]
fn acceptance_6_cvar_suppresses_false_positives() {
    let dir = tempfile::tempdir().unwrap();
    let base = Experiment::from_toml(noisy_plate_config(), dir.path()).unwrap();
    let weak = base.scenario.as_ref().unwrap().weak_elements();
    let false_positive_mass = |alpha: &StrengthField| -> f64 {
        (0..alpha.len())
            .filter(|e| !weak.contains(e))
            .map(|e| 1.0 - alpha.values[e])
            .sum()
    };

    let mut wins = 0;
    let mut report = Vec::new();
    for seed in 1..=5u64 {
        let run_with = |risk: RiskSpec| -> f64 {
            let mut exp = base.clone();
            exp.seed = seed;
            exp.risk = risk;
            let sensors = commands::inversion_sensors(&exp).unwrap();
            let problem = exp.problem(sensors).unwrap();
            let result = run(&problem, &exp.opt).unwrap();
            false_positive_mass(&result.alpha)
        };
        let neutral = run_with(RiskSpec::expectation());
        let averse = run_with(RiskSpec::cvar(0.5).unwrap());
        if averse <= neutral {
            wins += 1;
        }
        report.push(format!("seed {seed}: cvar {averse:.2} vs expectation {neutral:.2}"));
    }
    assert!(wins >= 3, "cvar won only {wins}/5 seeds: {report:?}");
    println!(
        "ACCEPTANCE 6 PASS risk-averse benefit: cvar false-positive mass <= expectation on {wins}/5 seeds ({})",
        report.join("; ")
    );
}

#[test]
fn acceptance_7_thermal_reaction_force() {
    let area = 5e-4;
    let mesh = Mesh {
        dim: 2,
        coords: vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0],
        elements: vec![
            Element::TrussBar { nodes: [0, 1], area },
            Element::TrussBar { nodes: [1, 2], area },
        ],
        dirichlet: vec![(0, 0), (0, 1), (1, 1), (2, 0), (2, 1)],
    };
    let material =
        Material { young_modulus: 2e9, poisson: 0.3, density: 7.8, alpha_exp: 11e-6 };
    let delta_t = -30.0;
    let alpha = StrengthField::uniform(2, 1.0);
    let cache = ElementCache::build(&mesh, &material).unwrap();
    let dof_map = weakspot_core::DofMap::new(&mesh);
    let f_th = weakspot_core::thermal_load(&mesh, &material, &alpha, delta_t).unwrap();
    let fac = weakspot_core::factorize(&cache, &alpha, &dof_map).unwrap();
    let u = fac.solve(&f_th).unwrap();
    let reactions =
        weakspot_core::reaction_forces(&mesh, &cache, &alpha, &u, &f_th).unwrap();
    let got = reactions.iter().find(|((n, c), _)| *n == 2 && *c == 0).unwrap().1;
    let expected = -material.young_modulus * area * material.alpha_exp * delta_t;
    let rel = ((got - expected) / expected).abs();
    assert!(rel <= 1e-10, "reaction {got:e} vs {expected:e} (rel {rel:e})");
    println!("ACCEPTANCE 7 PASS thermal reaction: {got:.6e} N vs analytic {expected:.6e} N (rel err {rel:.3e})");
}

#[test]
fn acceptance_8_invert_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let text = noisy_plate_config().replace("max_iters = 100", "max_iters = 25");
    let run_once = |out: &Path| -> Vec<u8> {
        let mut exp = Experiment::from_toml(&text, dir.path()).unwrap();
        exp.risk = RiskSpec::cvar(0.5).unwrap();
        exp.seed = 7;
        exp.out_dir = out.to_path_buf();
        commands::invert(&exp).unwrap();
        std::fs::read(out.join("convergence.csv")).unwrap()
    };
    let a = run_once(&dir.path().join("a"));
    let b = run_once(&dir.path().join("b"));
    assert!(!a.is_empty());
    assert_eq!(a, b, "convergence.csv differs between identical runs");
    println!(
        "ACCEPTANCE 8 PASS determinism: repeated inversions give byte-identical convergence.csv ({} bytes)",
        a.len()
    );
}
