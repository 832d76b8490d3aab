//! Property tests for the library's structural invariants: density
//! identities, moment decompositions, sum-law preservation, lattice
//! sandwiching, and threshold soundness.

use fblmac::{
    cdf, density_table, exact_sum_distribution, lattice_sum_distribution, moments, q_function,
    q_inverse, solve_delta, time_shared_density_table, AtomicDistribution, DensityKind, DmMac,
    InputPair, Rounding, SolveMode, TailTarget, TimeSharedInput,
};
use proptest::prelude::*;

const LN2: f64 = std::f64::consts::LN_2;

/// Strictly positive 2x2x3 kernel from 12 raw weights.
fn kernel_from_raw(raw: &[f64]) -> DmMac {
    let mut w = vec![vec![vec![0.0; 3]; 2]; 2];
    for x1 in 0..2 {
        for x2 in 0..2 {
            let base = (x1 * 2 + x2) * 3;
            let row: Vec<f64> = raw[base..base + 3].iter().map(|v| v + 0.05).collect();
            let total: f64 = row.iter().sum();
            for y in 0..3 {
                w[x1][x2][y] = row[y] / total;
            }
        }
    }
    DmMac::new(2, 2, 3, w).unwrap()
}

fn pmf_from_raw(raw: &[f64]) -> Vec<f64> {
    let row: Vec<f64> = raw.iter().map(|v| v + 1e-3).collect();
    let total: f64 = row.iter().sum();
    row.iter().map(|v| v / total).collect()
}

prop_compose! {
    fn arb_channel()(raw in prop::collection::vec(0.0..1.0f64, 12)) -> DmMac {
        kernel_from_raw(&raw)
    }
}

prop_compose! {
    fn arb_inputs()(a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64, d in 0.0..1.0f64)
        -> InputPair {
        InputPair::new(pmf_from_raw(&[a, b]), pmf_from_raw(&[c, d])).unwrap()
    }
}

prop_compose! {
    fn arb_law()(k in 2usize..=4)
        (values in prop::collection::vec(-2.0..2.0f64, k),
         raw in prop::collection::vec(0.05..1.0f64, k)) -> AtomicDistribution {
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
        AtomicDistribution::new(values, probs).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Normalization identity: sum of prob * e^{-d} over atoms is 1 for
    /// strictly positive kernels, for each of the three densities.
    #[test]
    fn density_normalization_identity(ch in arb_channel(), inputs in arb_inputs()) {
        let table = density_table(&ch, &inputs).unwrap();
        for kind in DensityKind::ALL {
            let total: f64 = table
                .atoms()
                .iter()
                .map(|a| a.prob * (-a.density(kind)).exp())
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-10, "{kind:?}: {total}");
        }
    }

    /// Independent-input inequality and mutual-information nonnegativity.
    #[test]
    fn mean_inequalities(ch in arb_channel(), inputs in arb_inputs()) {
        let table = density_table(&ch, &inputs).unwrap();
        let m1 = moments(&table, DensityKind::Rate1).mean;
        let m2 = moments(&table, DensityKind::Rate2).mean;
        let m12 = moments(&table, DensityKind::SumRate).mean;
        prop_assert!(m12 <= m1 + m2 + 1e-10);
        prop_assert!(m1 >= -1e-12 && m2 >= -1e-12 && m12 >= -1e-12);
    }

    /// Time-sharing mean decomposition: the mean under a time-shared
    /// input is the weight-weighted sum of per-component means.
    #[test]
    fn time_sharing_mean_decomposition(
        ch in arb_channel(),
        c0 in arb_inputs(),
        c1 in arb_inputs(),
        w in 0.05..0.95f64,
    ) {
        let ts = TimeSharedInput::new(vec![w, 1.0 - w], vec![c0.clone(), c1.clone()]).unwrap();
        let shared = time_shared_density_table(&ch, &ts).unwrap();
        for kind in DensityKind::ALL {
            let whole = moments(&shared, kind).mean;
            let a = moments(&density_table(&ch, &c0).unwrap(), kind).mean;
            let b = moments(&density_table(&ch, &c1).unwrap(), kind).mean;
            prop_assert!((whole - (w * a + (1.0 - w) * b)).abs() < 1e-12);
        }
    }

    /// Law of total variance for time-shared densities: the variance over
    /// the full joint (including U) decomposes into the weighted
    /// per-component variances plus the spread of per-component means.
    #[test]
    fn time_sharing_total_variance(
        ch in arb_channel(),
        c0 in arb_inputs(),
        c1 in arb_inputs(),
        w in 0.05..0.95f64,
    ) {
        let ts = TimeSharedInput::new(vec![w, 1.0 - w], vec![c0.clone(), c1.clone()]).unwrap();
        let shared = time_shared_density_table(&ch, &ts).unwrap();
        for kind in DensityKind::ALL {
            let whole = moments(&shared, kind);
            let a = moments(&density_table(&ch, &c0).unwrap(), kind);
            let b = moments(&density_table(&ch, &c1).unwrap(), kind);
            let mean = w * a.mean + (1.0 - w) * b.mean;
            let within = w * a.variance + (1.0 - w) * b.variance;
            let between = w * (a.mean - mean).powi(2) + (1.0 - w) * (b.mean - mean).powi(2);
            prop_assert!((whole.variance - (within + between)).abs() < 1e-12);
        }
    }

    /// Mean and variance of the exact n-fold sum scale by n.
    #[test]
    fn sum_moments_scale(law in arb_law(), n in 1u32..=6) {
        let sum = exact_sum_distribution(&law, n).unwrap();
        let nf = n as f64;
        prop_assert!((sum.mean() - nf * law.mean()).abs() < 1e-9 * nf);
        prop_assert!((sum.variance() - nf * law.variance()).abs() < 1e-9 * nf);
    }

    /// Directed-rounding sandwich: round-up CDF <= exact CDF <= round-down
    /// CDF at every threshold.
    #[test]
    fn lattice_sandwich(law in arb_law(), n in 1u32..=5, t in -12.0..12.0f64) {
        let exact = exact_sum_distribution(&law, n).unwrap();
        let step = (law.spread() / 37.0).max(1e-4);
        let up = lattice_sum_distribution(&law, n, step, Rounding::Up).unwrap();
        let down = lattice_sum_distribution(&law, n, step, Rounding::Down).unwrap();
        prop_assert!(cdf(&up, t) <= cdf(&exact, t) + 1e-12);
        prop_assert!(cdf(&exact, t) <= cdf(&down, t) + 1e-12);
    }

    /// solve_delta soundness against a brute-force CDF oracle, both modes.
    #[test]
    fn solve_delta_sound(law in arb_law(), n in 1u32..=5, target in 0.02..0.98f64) {
        let mean = law.mean();
        let tt = TailTarget::new(target, n).unwrap();
        // Independent oracle: enumerate all k^n sequences.
        let k = law.values().len();
        let mut seq = vec![0usize; n as usize];
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        loop {
            let v: f64 = seq.iter().map(|&i| law.values()[i]).sum();
            let p: f64 = seq.iter().map(|&i| law.probs()[i]).product();
            atoms.push((v, p));
            let mut pos = n as usize;
            loop {
                if pos == 0 { break; }
                pos -= 1;
                seq[pos] += 1;
                if seq[pos] < k { break; }
                seq[pos] = 0;
            }
            if seq.iter().all(|&i| i == 0) { break; }
        }
        let oracle_cdf = |t: f64| -> f64 {
            atoms.iter().filter(|(v, _)| *v <= t + 1e-12).map(|(_, p)| p).sum()
        };
        for mode in [SolveMode::Exact, SolveMode::Lattice { step: (law.spread() / 53.0).max(1e-4) }] {
            let sol = solve_delta(&law, mean, tt, mode).unwrap();
            let t = n as f64 * (mean - sol.delta);
            prop_assert!(oracle_cdf(t) >= target - 1e-12, "mode {mode:?}: cdf {} target {target}", oracle_cdf(t));
        }
    }

    /// Q and its inverse round-trip on (0,1).
    #[test]
    fn q_roundtrip(p in 1e-8..1.0f64) {
        prop_assume!(p < 1.0 - 1e-8);
        let x = q_inverse(p).unwrap();
        prop_assert!((q_function(x) - p).abs() < 1e-10);
    }

    /// CDF is a proper distribution function on the sum law.
    #[test]
    fn cdf_monotone_normalized(law in arb_law(), n in 1u32..=5) {
        let sum = exact_sum_distribution(&law, n).unwrap();
        let mut prev = 0.0;
        let lo = sum.min_value() - 0.1;
        let hi = sum.max_value() + 0.1;
        for i in 0..=50 {
            let t = lo + (hi - lo) * i as f64 / 50.0;
            let c = cdf(&sum, t);
            prop_assert!(c >= prev - 1e-15);
            prop_assert!((0.0..=1.0).contains(&c));
            prev = c;
        }
        prop_assert!((cdf(&sum, hi) - 1.0).abs() < 1e-10);
    }
}

/// Spot check outside proptest: the uniform-adder identity values feed
/// several later oracles, so pin them here too.
#[test]
fn adder_uniform_reference_moments() {
    let ch = DmMac::new(
        2,
        2,
        3,
        vec![
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        ],
    )
    .unwrap();
    let table = density_table(&ch, &InputPair::uniform(&ch)).unwrap();
    let m = moments(&table, DensityKind::SumRate);
    assert!((m.mean - 1.5 * LN2).abs() < 1e-12);
    assert!((m.variance - LN2 * LN2 / 4.0).abs() < 1e-12);
}
