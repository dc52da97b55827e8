use num_complex::Complex64;
use tensor_moments::counting::{count_melonic_maps, factorial, fuss_catalan};
use tensor_moments::experiments::{
    contraction_experiment, exact_moment, heavy_tail_experiment, lemma_tree_table,
    matrix_resolvent_check, mc_moments, to_csv_string, variance_scaling, ExperimentConfig,
    MomentEstimate,
};
use tensor_moments::limitlaw::moment;
use tensor_moments::tensor::EntryDistribution;
use tensor_moments::Error;

fn estimate(rows: &[MomentEstimate], dim: usize, n: usize) -> &MomentEstimate {
    rows.iter().find(|e| e.dim == dim && e.n == n).unwrap()
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let mut cfg = ExperimentConfig::new(3, 2, vec![6, 9], 24, 11);
    cfg.threads = Some(1);
    let one = to_csv_string(&mc_moments(&cfg).unwrap()).unwrap();
    cfg.threads = Some(4);
    let four = to_csv_string(&mc_moments(&cfg).unwrap()).unwrap();
    assert_eq!(one, four);
    cfg.seed = 12;
    assert_ne!(one, to_csv_string(&mc_moments(&cfg).unwrap()).unwrap());
}

#[test]
fn stderr_shrinks_like_root_samples() {
    let small = mc_moments(&ExperimentConfig::new(3, 2, vec![20], 200, 5)).unwrap();
    let large = mc_moments(&ExperimentConfig::new(3, 2, vec![20], 400, 5)).unwrap();
    let ratio = estimate(&small, 20, 2).stderr / estimate(&large, 20, 2).stderr;
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn second_moment_matches_exact_oracle() {
    let est = mc_moments(&ExperimentConfig::new(3, 3, vec![30], 200, 21)).unwrap();
    let e = estimate(&est, 30, 2);
    let oracle = exact_moment(3, 2, 30, EntryDistribution::GaussianGote).unwrap();
    assert!(
        (e.mean - oracle).abs() <= 3.0 * e.stderr,
        "{} vs {oracle}",
        e.mean
    );
    let odd = estimate(&est, 30, 3);
    assert_eq!(odd.mean, 0.0);
    assert_eq!(odd.target, 0.0);
}

#[test]
fn wigner_matrix_fourth_moment() {
    let est = mc_moments(&ExperimentConfig::new(2, 4, vec![100], 200, 22)).unwrap();
    let e = estimate(&est, 100, 4);
    let oracle = exact_moment(2, 4, 100, EntryDistribution::GaussianGote).unwrap();
    assert_eq!(e.target, 2.0);
    assert!((oracle - 2.0).abs() < 0.06, "oracle {oracle}");
    assert!(
        (e.mean - oracle).abs() <= 3.0 * e.stderr,
        "{} vs {oracle}",
        e.mean
    );
}

#[test]
fn enumeration_guard_is_a_resource_error() {
    let r = mc_moments(&ExperimentConfig::new(3, 8, vec![4], 2, 0));
    assert!(matches!(r, Err(Error::Resource(_))));
}

#[test]
fn variance_scaling_preconditions_and_matrix_rate() {
    let r = variance_scaling(&ExperimentConfig::new(3, 2, vec![16], 10, 0));
    assert!(matches!(r, Err(Error::ContractViolation(_))));
    let v = variance_scaling(&ExperimentConfig::new(2, 2, vec![16, 32, 64], 400, 23)).unwrap();
    assert!((-2.8..=-1.2).contains(&v.slope), "slope {}", v.slope);
}

#[test]
fn per_map_table_limits() {
    let rows = lemma_tree_table(3, 2, &[1_000_000], EntryDistribution::GaussianGote).unwrap();
    let melonic: Vec<_> = rows.iter().filter(|r| r.melonic).collect();
    assert_eq!(melonic.len(), 2);
    assert!(melonic.iter().all(|r| r.alpha == 0.5));
    assert!(rows.iter().filter(|r| !r.melonic).all(|r| r.alpha == 0.0));
    assert!(rows.iter().all(|r| r.deviation.abs() < 1e-5));
    let limit: f64 = rows.iter().map(|r| r.alpha).sum();
    assert_eq!(limit, 1.0);

    let rad = lemma_tree_table(3, 2, &[1_000_000], EntryDistribution::Rademacher).unwrap();
    for (g, r) in rows.iter().zip(&rad) {
        assert_eq!(g.alpha, r.alpha);
        assert!((g.expected - r.expected).abs() < 1e-5);
    }

    let p4 = lemma_tree_table(4, 2, &[10], EntryDistribution::GaussianGote).unwrap();
    assert!(p4
        .iter()
        .filter(|r| r.melonic)
        .all(|r| (r.alpha - 1.0 / 6.0).abs() < 1e-15));
}

#[test]
fn melonic_weights_sum_to_the_moments() {
    for (p, m) in [(3u64, 1u64), (3, 2), (4, 1)] {
        let lhs = count_melonic_maps(p, m);
        let rhs = fuss_catalan(p, m) * factorial(p - 1).unwrap().pow(m as u32);
        assert_eq!(lhs, rhs, "p={p} m={m}");
        let rows = lemma_tree_table(
            p as usize,
            2 * m as usize,
            &[8],
            EntryDistribution::GaussianGote,
        )
        .unwrap();
        let alpha: f64 = rows.iter().map(|r| r.alpha).sum();
        let target = moment(p as usize, 2 * m as usize) as f64;
        assert!((alpha - target).abs() < 1e-12, "p={p} m={m}: {alpha}");
    }
}

#[test]
fn contraction_targets_and_k_zero() {
    let mut cfg = ExperimentConfig::new(4, 2, vec![12], 20, 31);
    cfg.k = 2;
    let est = contraction_experiment(&cfg).unwrap();
    assert!((estimate(&est, 12, 2).target - 1.0 / 3.0).abs() < 1e-15);

    cfg.k = 3;
    assert!(matches!(
        contraction_experiment(&cfg),
        Err(Error::ContractViolation(_))
    ));

    let mut plain = ExperimentConfig::new(3, 2, vec![10], 20, 32);
    let direct = mc_moments(&plain).unwrap();
    plain.k = 0;
    assert_eq!(contraction_experiment(&plain).unwrap(), direct);
}

#[test]
fn random_unit_vector_agrees_with_basis_vector() {
    let mut cfg = ExperimentConfig::new(3, 2, vec![30], 200, 33);
    cfg.k = 1;
    let fixed = contraction_experiment(&cfg).unwrap();
    cfg.random_unit = true;
    let random = contraction_experiment(&cfg).unwrap();
    let (a, b) = (estimate(&fixed, 30, 2), estimate(&random, 30, 2));
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!(
        (a.mean - b.mean).abs() < 4.0 * se,
        "{} vs {}",
        a.mean,
        b.mean
    );
}

#[test]
fn contraction_requires_gaussian_entries() {
    let mut cfg = ExperimentConfig::new(3, 2, vec![8], 4, 0);
    cfg.k = 1;
    cfg.dist = EntryDistribution::Rademacher;
    assert!(matches!(
        contraction_experiment(&cfg),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn heavy_tail_medians_move_towards_the_limit() {
    let mut cfg = ExperimentConfig::new(3, 2, vec![16, 32, 64], 200, 41);
    cfg.dist = EntryDistribution::SymmetrizedPareto { alpha: 3.5 };
    let est = heavy_tail_experiment(&cfg).unwrap();
    let dev: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| (estimate(&est, n, 2).median - 1.0).abs())
        .collect();
    assert!(dev[0] > dev[1] && dev[1] > dev[2], "{dev:?}");

    cfg.dist = EntryDistribution::GaussianGote;
    assert_eq!(
        heavy_tail_experiment(&cfg).unwrap(),
        mc_moments(&cfg).unwrap()
    );

    cfg.dist = EntryDistribution::SymmetrizedPareto { alpha: 6.0 };
    let control = heavy_tail_experiment(&cfg).unwrap();
    for n in [16, 32, 64] {
        let e = estimate(&control, n, 2);
        let oracle = exact_moment(3, 2, n, EntryDistribution::GaussianGote).unwrap();
        assert!(
            (e.median - oracle).abs() < 0.05,
            "N={n}: {} vs {oracle}",
            e.median
        );
    }
}

#[test]
fn resolvent_checks() {
    let r = matrix_resolvent_check(50, Complex64::new(10.0, 0.0), 6, 51).unwrap();
    assert!(r.gap < 1e-3 && r.gap < r.bound);
    let c = matrix_resolvent_check(40, Complex64::new(2.5, 1.0), 30, 52).unwrap();
    assert!(c.gap < c.bound);
    let near = matrix_resolvent_check(50, Complex64::new(1.0, 0.0), 6, 53);
    assert!(matches!(near, Err(Error::Domain(_))));
}

#[test]
fn csv_has_fixed_columns_and_full_precision() {
    let est = mc_moments(&ExperimentConfig::new(3, 2, vec![5], 4, 0)).unwrap();
    let csv = to_csv_string(&est).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "N,n,mean,stderr,variance,target,deviation,median,iqr"
    );
    let row: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "5");
    assert_eq!(row[1], "2");
    let mean: f64 = row[2].parse().unwrap();
    assert_eq!(mean, est[1].mean);
    assert_eq!(
        row[2]
            .split('e')
            .next()
            .unwrap()
            .replace(['-', '.'], "")
            .len(),
        17
    );
}
