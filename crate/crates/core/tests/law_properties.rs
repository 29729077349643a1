use perturbwalk_core::lattice::LatticePoint;
use perturbwalk_core::law::JumpLaw;
use perturbwalk_core::rng::{stream, WALK_STREAM};
use perturbwalk_core::scaling::numeric_scaling;
use perturbwalk_core::stats::chi_square_gof;
use proptest::prelude::*;

/// Random symmetric table: each chosen jump gets its mirror image.
fn symmetric_table() -> impl Strategy<Value = Vec<(LatticePoint, f64)>> {
    (proptest::collection::vec(((-3i64..=3, -3i64..=3), 0.05f64..1.0), 1..6), 0.0f64..1.0).prop_map(|(half, hold)| {
        let mut entries: Vec<(LatticePoint, f64)> = Vec::new();
        for ((a, b), w) in half {
            if (a, b) == (0, 0) {
                continue;
            }
            for x in [LatticePoint::new([a, b]), LatticePoint::new([-a, -b])] {
                match entries.iter_mut().find(|(y, _)| *y == x) {
                    Some(e) => e.1 += w,
                    None => entries.push((x, w)),
                }
            }
        }
        entries.push((LatticePoint::origin(2), hold));
        let total: f64 = entries.iter().map(|e| e.1).sum();
        entries.into_iter().map(|(x, w)| (x, w / total)).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tables_are_normalized_and_centered(entries in symmetric_table()) {
        let law = JumpLaw::table(entries).unwrap();
        let total: f64 = law.atoms().iter().map(|a| a.1).sum();
        prop_assert!(total <= 1.0 + 1e-12 && total >= 1.0 - 1e-9);
        prop_assert!(law.mean().iter().all(|m| m.abs() < 1e-12));
        prop_assert!(law.is_symmetric());
    }

    #[test]
    fn power_tail_mass_within_representable_support(beta in 2.05f64..8.0, hold in 0.0f64..0.9) {
        let law = JumpLaw::axis_power_tail(2, beta, hold).unwrap();
        let (atoms, rest) = law.atoms_within(5000);
        let head: f64 = atoms.iter().map(|a| a.1).sum();
        prop_assert!((head + rest - 1.0).abs() < 1e-9);
        prop_assert!(rest >= 0.0);
    }

    #[test]
    fn numeric_scaling_is_monotone(beta in 2.2f64..6.0) {
        let s = numeric_scaling(&JumpLaw::axis_power_tail(2, beta, 0.1).unwrap());
        let mut prev = 0.0;
        for k in 1..=6 {
            let sol = s.solve(10u64.pow(k));
            prop_assert!(sol.b >= prev);
            prop_assert!((sol.residual_ratio - 1.0).abs() <= 1e-5);
            prev = sol.b;
        }
    }
}

/// Chi-square over the 50 most likely atoms plus one remainder cell.
fn sampling_p_value(law: &JumpLaw, seed: u64) -> f64 {
    let (mut atoms, _) = law.atoms_within(200);
    atoms.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    atoms.truncate(50);
    let samples = 1_000_000u64;
    let mut rng = stream(seed, 0, WALK_STREAM);
    let mut counts = vec![0u64; atoms.len()];
    for _ in 0..samples {
        let x = law.sample(&mut rng);
        if let Some(i) = atoms.iter().position(|a| a.0 == x) {
            counts[i] += 1;
        }
    }
    let probs: Vec<f64> = atoms.iter().map(|a| a.1).collect();
    chi_square_gof(&counts, &probs, samples).p_value
}

#[test]
fn sampler_matches_pmf_on_top_atoms() {
    for (law, seed) in [
        (JumpLaw::lazy_srw(2).unwrap(), 1),
        (JumpLaw::product_lazy(3).unwrap(), 2),
        (JumpLaw::axis_power_tail(2, 3.0, 0.0).unwrap(), 3),
        (JumpLaw::axis_power_tail(2, 2.5, 0.2).unwrap(), 4),
    ] {
        let p = sampling_p_value(&law, seed);
        assert!(p > 0.001, "{:?}: p = {p}", law.family());
    }
}

#[test]
fn empirical_mean_is_centered() {
    for law in [JumpLaw::lazy_srw(2).unwrap(), JumpLaw::axis_power_tail(2, 5.0, 0.0).unwrap()] {
        let cov = law.covariance().unwrap().to_vec();
        let m = 1_000_000;
        let mut rng = stream(99, 0, WALK_STREAM);
        let mut sum = [0i64; 2];
        for _ in 0..m {
            let x = law.sample(&mut rng);
            sum[0] += x.coords()[0];
            sum[1] += x.coords()[1];
        }
        for i in 0..2 {
            let mean = sum[i] as f64 / m as f64;
            let sigma = cov[i * 2 + i].sqrt();
            assert!(mean.abs() < 5.0 * sigma / 1e3, "axis {i}: mean {mean}");
        }
    }
}
