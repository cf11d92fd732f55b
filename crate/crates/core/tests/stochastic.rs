use levy_multipliers::levy_measure::{Atom, DiscreteLevyMeasure, JumpModulator};
use levy_multipliers::stochastic::{
    burkholder_bound_check, jump_time_uniformity, l1_mass_check, martingale_property_check,
    run_ensemble, sample_path, shipped_scenarios, CompensatorRule, Estimate, JumpSystem, Scenario,
    Window,
};
use levy_multipliers::transform::{gaussian_bump, GridFunction};
use num_complex::Complex64;

fn unit() -> JumpModulator {
    JumpModulator::Constant(Complex64::new(1.0, 0.0))
}

fn plane_scenario(modulator: JumpModulator, f: GridFunction) -> Scenario {
    Scenario {
        name: "plane".into(),
        system: JumpSystem::new(
            DiscreteLevyMeasure::nearest_neighbour(2, 1.0, 1.0).unwrap(),
            modulator,
            1.0,
        )
        .unwrap(),
        f,
        x: vec![0, 0],
        window: Window::new(0.0, 1.0).unwrap(),
    }
}

fn bump16() -> GridFunction {
    gaussian_bump(&[16, 16], &[16.0, 16.0], &[1.0, 2.0], 1.5).unwrap()
}

#[test]
fn mean_jump_count_is_total_mass() {
    let sys = plane_scenario(unit(), bump16()).system;
    let w = Window::new(0.0, 1.0).unwrap();
    let n = 20_000;
    let counts = run_ensemble(n, 7, 0, |rng| {
        Ok(sample_path(sys.jumps(), w, rng)?.n_jumps() as f64)
    })
    .unwrap();
    let e = Estimate::from_samples(&counts);
    assert!(
        (e.mean - 4.0).abs() <= 3.0 * (4.0 / n as f64).sqrt(),
        "{e:?}"
    );
}

#[test]
fn jump_sizes_follow_normalized_measure() {
    // Symmetric measure: |z| = 1 with total weight 2, |z| = 2 with total weight 6.
    let measure = DiscreteLevyMeasure::new(
        1,
        vec![
            Atom::new(vec![1.0], 1.0),
            Atom::new(vec![-1.0], 1.0),
            Atom::new(vec![2.0], 3.0),
            Atom::new(vec![-2.0], 3.0),
        ],
    )
    .unwrap();
    let sys = JumpSystem::new(measure, unit(), 1.0).unwrap();
    let w = Window::new(0.0, 1.0).unwrap();
    let paths = run_ensemble(5_000, 3, 0, |rng| sample_path(sys.jumps(), w, rng)).unwrap();
    let all: Vec<i64> = paths
        .iter()
        .flat_map(|p| p.jumps().iter().map(|z| z[0]))
        .collect();
    let n = all.len() as f64;
    let short = all.iter().filter(|z| z.abs() == 1).count() as f64 / n;
    assert!(
        (short - 0.25).abs() <= 3.0 * (0.25 * 0.75 / n).sqrt(),
        "{short}"
    );
    let up = all.iter().filter(|&&z| z > 0).count() as f64 / n;
    assert!((up - 0.5).abs() <= 3.0 * (0.25 / n).sqrt(), "{up}");
}

#[test]
fn jump_times_are_uniform_given_count() {
    let sc = &shipped_scenarios().unwrap()[1];
    let paths = run_ensemble(5_000, 11, 0, |rng| {
        sample_path(sc.system.jumps(), sc.window, rng)
    })
    .unwrap();
    let ks = jump_time_uniformity(&paths).unwrap();
    assert!(ks.passed(), "{ks:?}");
}

#[test]
fn martingale_drift_and_tower_property() {
    for sc in shipped_scenarios().unwrap() {
        let pairs = sc
            .simulate(20_000, 21, &[0.25, 0.5, 1.0], CompensatorRule::Exact)
            .unwrap();
        let r = martingale_property_check(&sc, &pairs, 1e-14).unwrap();
        assert!(r.passed(3.0), "{}: {r:?}", sc.name);
    }
}

#[test]
fn unit_modulator_is_centered() {
    let sc = plane_scenario(unit(), bump16());
    let pairs = sc.simulate(20_000, 5, &[], CompensatorRule::Exact).unwrap();
    let f: Vec<f64> = pairs.iter().map(|p| p.f_final.re).collect();
    assert!(Estimate::from_samples(&f).within(0.0, 3.0));
}

#[test]
fn burkholder_trivial_case_and_isometry() {
    // φ ≡ 1 with f shifted so that P_{s,u}f(x) = 0 gives F_u = G_u.
    let sc = plane_scenario(unit(), bump16());
    let start = sc.field().unwrap().value(sc.window.s, &sc.x);
    let sc = Scenario {
        f: sc.f.map(|z| z - start),
        ..sc
    };
    let pairs = sc.simulate(20_000, 8, &[], CompensatorRule::Exact).unwrap();
    assert!(pairs.iter().all(|p| (p.f_final - p.g_final).norm() < 1e-12));
    for row in burkholder_bound_check(&pairs, &[1.5, 2.0, 3.0]).unwrap() {
        assert!(!row.violated(3.0), "{row:?}");
    }
    // E|F_u|² = E[F,F]_u for the square-integrable martingale F.
    let f2: Vec<f64> = pairs
        .iter()
        .map(|p| p.f_final.norm_sqr() - p.qv_f)
        .collect();
    assert!(Estimate::from_samples(&f2).within(0.0, 3.0));
    // [F,F] ≤ [G,G] pathwise.
    assert!(pairs.iter().all(|p| p.qv_f <= p.qv_g));
}

#[test]
fn sign_pattern_cubic_moment() {
    let sc = &shipped_scenarios().unwrap()[2];
    let pairs = sc.simulate(20_000, 9, &[], CompensatorRule::Exact).unwrap();
    let rows = burkholder_bound_check(&pairs, &[3.0]).unwrap();
    assert!(!rows[0].violated(3.0));
    assert!(pairs.iter().all(|p| p.gap_violations == 0));
}

#[test]
fn l1_mass_closed_form_and_doubling() {
    // |ν| = 4, window length 1, ‖f‖₁ = 1 gives 16.
    let f = bump16();
    let l1: f64 = f.samples().iter().map(|z| z.norm()).sum::<f64>() * f.cell_volume();
    let f = f.scale(Complex64::new(1.0 / l1, 0.0));
    let sc = plane_scenario(unit(), f);
    let r = l1_mass_check(&sc, 40_000, 4).unwrap();
    assert!((r.closed_form - 16.0).abs() < 1e-12);
    assert!(r.passed(3.0), "{r:?}");

    let long = Scenario {
        window: Window::new(0.0, 2.0).unwrap(),
        ..sc.clone()
    };
    let r2 = l1_mass_check(&long, 40_000, 5).unwrap();
    assert!((r2.closed_form - 32.0).abs() < 1e-12);
    assert!(r2.passed(3.0), "{r2:?}");

    let zero = Scenario {
        f: sc.f.map(|_| Complex64::new(0.0, 0.0)),
        ..sc
    };
    let r0 = l1_mass_check(&zero, 100, 1).unwrap();
    assert_eq!(r0.mc.mean, 0.0);
    assert_eq!(r0.closed_form, 0.0);
}

#[test]
fn gauss_legendre_compensator_matches_exact_per_path() {
    let sc = &shipped_scenarios().unwrap()[3];
    let exact = sc.simulate(200, 2, &[0.5], CompensatorRule::Exact).unwrap();
    let gl = sc
        .simulate(200, 2, &[0.5], CompensatorRule::gauss_legendre())
        .unwrap();
    for (a, b) in exact.iter().zip(&gl) {
        assert!((a.f_final - b.f_final).norm() < 1e-8);
        assert_eq!(a.g_final, b.g_final);
    }
}
