//! End-to-end learner behavior: certificates, coverage, shifted references,
//! gapped ground-state proxies, and sampling statistics.

use gibbslab::lattice::{bond_family, field_family, tfim_family, LatticeSpec};
use gibbslab::learner::{
    draw_training, estimate, exact_expectation, fit_empirical_constants, gali_estimate, hyperparams,
    indistinguishability_scan, AttachMode, ConstantsMode, Distribution, EstimateMode, LearnerVariant,
    LocalObservable, ScanMode,
};
use gibbslab::operators::gibbs_state;
use gibbslab::pauli::{Pauli, PauliString};
use rand::Rng;

fn z_at(fam: &gibbslab::lattice::HamiltonianFamily, site: usize) -> LocalObservable {
    LocalObservable::new(fam, vec![(1.0, PauliString::new([(site, Pauli::Z)]).unwrap())]).unwrap()
}

#[test]
fn empirical_gamma_lands_in_practical_range() {
    // Field model fit at eps = 0.1 gives a usable cube size.
    let fam = field_family(LatticeSpec::chain(6).unwrap(), Pauli::Z).unwrap();
    let obs = z_at(&fam, 3);
    let consts = fit_empirical_constants(&fam, &obs, 1.0, &[0, 1, 2, 3], 5).unwrap();
    let cfg = hyperparams(0.1, 0.05, 0.05, &consts, ConstantsMode::Empirical, LearnerVariant::ExactState, 6, 1).unwrap();
    assert!(
        cfg.gamma >= 1e-3 && cfg.gamma <= 1e-1,
        "empirical gamma {} outside [1e-3, 1e-1]",
        cfg.gamma
    );
    assert!(cfg.training_size().is_ok());
}

#[test]
fn uniform_draws_pass_a_ks_band() {
    // Kolmogorov-Smirnov 95% band for the per-coordinate empirical CDF.
    let fam = field_family(LatticeSpec::chain(3).unwrap(), Pauli::Z).unwrap();
    let n = 10_000usize;
    let training = draw_training(&fam, Distribution::UniformBox, n, 1.0, 17, AttachMode::ExactLazy).unwrap();
    for coord in 0..3 {
        let mut vals: Vec<f64> = training.entries.iter().map(|e| e.x.values[coord]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut dmax = 0.0f64;
        for (i, v) in vals.iter().enumerate() {
            let cdf = (v + 1.0) / 2.0;
            let emp_hi = (i + 1) as f64 / n as f64;
            let emp_lo = i as f64 / n as f64;
            dmax = dmax.max((emp_hi - cdf).abs()).max((emp_lo - cdf).abs());
        }
        let band = 1.358 / (n as f64).sqrt();
        assert!(dmax <= band, "coordinate {coord}: KS statistic {dmax} above 95% band {band}");
    }
}

#[test]
fn anticoncentration_certificates() {
    let uniform = Distribution::UniformBox;
    assert!((uniform.min_cube_mass(0.2, 3) - (0.1f64).powi(3)).abs() < 1e-15);
    let dirac = Distribution::Dirac(vec![0.0; 3]);
    assert_eq!(dirac.min_cube_mass(0.2, 3), 1.0);
}

#[test]
fn interpolation_consistency_at_zero_distance() {
    // When the training set contains the query's restricted coordinates
    // exactly, the per-term error reduces to the locality term alone.
    let n = 5;
    let beta = 0.6;
    let fam = field_family(LatticeSpec::chain(n).unwrap(), Pauli::Z).unwrap();
    let obs = z_at(&fam, 2);
    let consts = fit_empirical_constants(&fam, &obs, beta, &[0, 1, 2], 23).unwrap();
    let cfg = hyperparams(0.1, 0.05, 0.05, &consts, ConstantsMode::Empirical, LearnerVariant::ExactState, n, 1).unwrap();
    let mut training = draw_training(&fam, Distribution::UniformBox, 30, beta, 23, AttachMode::ExactLazy).unwrap();
    let mut probe = vec![0.31, -0.42, 0.11, 0.87, -0.66];
    let x = fam.param(probe.clone()).unwrap();
    // Insert an entry matching x on the restricted coordinates but differing
    // far away.
    probe[4] = 0.2;
    training.entries.push(gibbslab::learner::TrainingEntry {
        x: fam.param(probe).unwrap(),
        handle: gibbslab::learner::Handle::Exact(std::sync::OnceLock::new()),
    });
    let rep = estimate(&fam, &x, &obs, &training, &cfg, EstimateMode::Exact).unwrap();
    let truth = exact_expectation(&fam, &x, &obs, beta).unwrap();
    let locality_budget = 2.0 * consts.c1 * (-(cfg.r as f64) / (2.0 * consts.xi)).exp() + 1e-9;
    assert!(rep.per_term[0].distances[0] <= 1e-12);
    assert!(
        (rep.total - truth).abs() <= locality_budget,
        "error {} above locality budget {locality_budget}",
        (rep.total - truth).abs()
    );
}

#[test]
fn certificate_soundness_on_field_model() {
    // Across random queries the actual error stays below the reported
    // certificate in at least 95% of trials.
    let n = 4;
    let beta = 0.9;
    let fam = field_family(LatticeSpec::chain(n).unwrap(), Pauli::Z).unwrap();
    let obs = z_at(&fam, 2);
    let consts = fit_empirical_constants(&fam, &obs, beta, &[0, 1, 2], 31).unwrap();
    let cfg = hyperparams(0.15, 0.05, 0.05, &consts, ConstantsMode::Empirical, LearnerVariant::ExactState, n, 1).unwrap();
    let n_train = cfg.training_size().unwrap().min(30_000);
    let training = draw_training(&fam, Distribution::UniformBox, n_train, beta, 31, AttachMode::ExactLazy).unwrap();
    let mut sound = 0usize;
    let trials = 60;
    let mut rng = gibbslab::rng::stream(32, 0, 0);
    for _ in 0..trials {
        let x = fam.param((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let rep = estimate(&fam, &x, &obs, &training, &cfg, EstimateMode::Exact).unwrap();
        let truth = exact_expectation(&fam, &x, &obs, beta).unwrap();
        let cert: f64 = rep.per_term.iter().map(|t| t.certificate).sum();
        if (rep.total - truth).abs() <= cert {
            sound += 1;
        }
    }
    assert!(
        sound as f64 >= 0.95 * trials as f64,
        "certificate sound on only {sound}/{trials} trials"
    );
}

#[test]
fn coverage_shortfall_rate_stays_below_delta() {
    // With the accounting-formula training size, shadow-mode coverage fails
    // with frequency at most delta over repeated runs.
    let n = 3;
    let beta = 0.8;
    let delta = 0.1;
    let fam = field_family(LatticeSpec::chain(n).unwrap(), Pauli::Z).unwrap();
    let obs = z_at(&fam, 1);
    let consts = fit_empirical_constants(&fam, &obs, beta, &[0, 1], 41).unwrap();
    let mut cfg = hyperparams(0.3, delta, 0.3, &consts, ConstantsMode::Empirical, LearnerVariant::Shadow, n, 1).unwrap();
    cfg.t = cfg.t.min(8);
    // Re-solve the accounting for the reduced t:
    let m_r = 2.0 * consts.ell as f64; // [2(r + r0 + k0)]^D ell with r = r0 = 0, k0 = 1
    let n_train = (cfg.t as f64
        * (2.0 / cfg.gamma).powf(m_r)
        * ((1.0f64 / delta).ln() + m_r * (2.0 / cfg.gamma).ln() + (cfg.t as f64).ln()))
    .ceil() as usize;
    let mut shortfalls = 0usize;
    let reps = 100;
    for rep in 0..reps {
        let training = draw_training(
            &fam,
            Distribution::UniformBox,
            n_train,
            beta,
            1000 + rep as u64,
            AttachMode::Shadows { count: 1 },
        )
        .unwrap();
        let x = fam.param(vec![0.4, -0.2, 0.6]).unwrap();
        match estimate(&fam, &x, &obs, &training, &cfg, EstimateMode::Shadow) {
            Ok(_) => {}
            Err(gibbslab::Error::CoverageShortfall { .. }) => shortfalls += 1,
            Err(e) => panic!("unexpected error {e}"),
        }
    }
    assert!(
        (shortfalls as f64) <= delta * reps as f64,
        "coverage shortfall on {shortfalls}/{reps} runs"
    );
}

#[test]
fn gali_on_ferromagnetically_shifted_classical_chain() {
    // All-Z bond chain with a ferromagnetic box center: estimation against
    // the shifted reference stays within the certificate on 50 queries.
    let n = 5;
    let beta = 0.7;
    let lattice = LatticeSpec::chain(n).unwrap();
    let bonds = bond_family(lattice, "ZZ").unwrap();
    let center = vec![-0.8; bonds.n_params()];
    let fam = gibbslab::lattice::HamiltonianFamily::new(bonds.lattice.clone(), bonds.terms.clone(), Some(center.clone()), None).unwrap();
    let obs = z_at(&fam, 2);
    let consts = {
        let mut c = fit_empirical_constants(&fam, &obs, beta, &[0, 1, 2], 51).unwrap();
        c.eta = 0.0;
        c
    };
    let cfg = hyperparams(0.1, 0.05, 0.05, &consts, ConstantsMode::Empirical, LearnerVariant::ExactState, n, 1).unwrap();
    let n_train = cfg.training_size().unwrap().min(20_000);
    let training = draw_training(&fam, Distribution::UniformBox, n_train, beta, 51, AttachMode::ExactLazy).unwrap();
    let mut rng = gibbslab::rng::stream(52, 0, 0);
    let mut sound = 0;
    for _ in 0..50 {
        let x = fam
            .param(center.iter().map(|c| c + rng.gen_range(-1.0..1.0)).collect())
            .unwrap();
        let rep = gali_estimate(&fam, &x, &obs, &training, &cfg, &center).unwrap();
        let truth = exact_expectation(&fam, &x, &obs, beta).unwrap();
        let cert: f64 = rep.per_term.iter().map(|t| t.certificate).sum();
        if (rep.total - truth).abs() <= cert {
            sound += 1;
        }
    }
    assert!(sound >= 48, "estimator within certificate on only {sound}/50 queries");
}

#[test]
fn gapped_ground_proxy_learning() {
    // Strong-transverse-field chain: deep thermal states stand in for the
    // gapped ground states; estimator error stays below 0.1 ||O||.
    let n = 4;
    let beta = 40.0;
    let fam = tfim_family(LatticeSpec::chain(n).unwrap()).unwrap();
    // Box centered at strong fields: bonds near 0.1, fields near 0.9.
    let m = fam.n_params();
    let mut center = vec![0.0; m];
    for b in 0..n - 1 {
        center[b] = 0.1;
    }
    for s in 0..n {
        center[n - 1 + s] = 2.0;
    }
    let fam = gibbslab::lattice::HamiltonianFamily::new(fam.lattice.clone(), fam.terms.clone(), Some(center.clone()), None).unwrap();
    let obs = LocalObservable::new(&fam, vec![(1.0, PauliString::new([(2, Pauli::X)]).unwrap())]).unwrap();
    let consts = fit_empirical_constants(&fam, &obs, beta, &[0, 1, 2], 61).unwrap();
    let cfg = hyperparams(0.1, 0.05, 0.05, &consts, ConstantsMode::Empirical, LearnerVariant::ExactState, n, 1).unwrap();
    let n_train = cfg.training_size().unwrap_or(20_000).min(20_000);
    let training = draw_training(&fam, Distribution::UniformBox, n_train, beta, 61, AttachMode::ExactLazy).unwrap();
    let mut rng = gibbslab::rng::stream(62, 0, 0);
    let mut worst = 0.0f64;
    for _ in 0..25 {
        let x = fam
            .param(center.iter().map(|c| c + rng.gen_range(-1.0..1.0)).collect())
            .unwrap();
        let rep = estimate(&fam, &x, &obs, &training, &cfg, EstimateMode::Exact).unwrap();
        let truth = exact_expectation(&fam, &x, &obs, beta).unwrap();
        worst = worst.max((rep.total - truth).abs());
    }
    assert!(worst <= 0.1, "worst ground-proxy error {worst}");
}

#[test]
fn commuting_all_z_scan_is_flat_beyond_twice_radius() {
    // Diagonal family: restriction error vanishes once the enlargement
    // covers every term whose ball touches the observable.
    let n = 6;
    let fam = bond_family(LatticeSpec::chain(n).unwrap(), "ZZ").unwrap();
    let mut rng = gibbslab::rng::stream(63, 0, 0);
    let x = fam.param((0..fam.n_params()).map(|_| rng.gen_range(-0.9..0.9)).collect()).unwrap();
    let obs = z_at(&fam, 3);
    let scan = indistinguishability_scan(&fam, &x, &obs, &[2, 3, 4], ScanMode::Gibbs { beta: 0.8 }, None).unwrap();
    for (r, v) in &scan.points {
        assert!(*v < 1e-10, "r = {r}: residual {v}");
    }
}

#[test]
fn beta_zero_training_yields_constant_estimates() {
    let fam = field_family(LatticeSpec::chain(3).unwrap(), Pauli::Z).unwrap();
    let obs = z_at(&fam, 1);
    let training = draw_training(&fam, Distribution::UniformBox, 12, 0.0, 71, AttachMode::ExactLazy).unwrap();
    let consts = fit_empirical_constants(&fam, &obs, 0.0, &[0, 1], 71).unwrap();
    let cfg = hyperparams(0.2, 0.05, 0.05, &consts, ConstantsMode::Empirical, LearnerVariant::ExactState, 3, 1).unwrap();
    let mut rng = gibbslab::rng::stream(72, 0, 0);
    for _ in 0..5 {
        let x = fam.param((0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let rep = estimate(&fam, &x, &obs, &training, &cfg, EstimateMode::Exact).unwrap();
        assert!(rep.total.abs() < 1e-12, "beta = 0 estimate should vanish for traceless O");
    }
}

#[test]
fn ground_scan_rejects_degenerate_models() {
    // A pure ZZ chain has a doubly degenerate ground space.
    let fam = bond_family(LatticeSpec::chain(3).unwrap(), "ZZ").unwrap();
    let x = fam.param(vec![-0.5, -0.5]).unwrap();
    let obs = z_at(&fam, 1);
    let res = indistinguishability_scan(&fam, &x, &obs, &[0, 1], ScanMode::Ground, None);
    assert!(matches!(res, Err(gibbslab::Error::DegenerateGroundSpace { .. })));
}
