//! Tiny-instance code simulation: random codebooks, exact error
//! probabilities by exhaustive enumeration, and converse sanity checks.

use crate::bounds::{bound_component, BoundMode};
use crate::channel::{DmMac, InputPair};
use crate::density::{density_table, DensityKind};
use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::region::product_input_grid;
use crate::rng::SplitMix64;
use crate::tail::MonteCarloEstimate;

/// Default cap on kernel evaluations in [`exact_error`]: |Y|^n M1 M2.
pub const DEFAULT_ENUMERATION_GUARD: f64 = 1e8;

/// Epsilon closer than this to 0 or 1 makes the bound modes undefined.
const EPS_GUARD_BAND: f64 = 1e-12;

/// A pair of codebooks for the two senders.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub n: u32,
    pub m1: usize,
    pub m2: usize,
    /// `cw1[m1][i]`: symbol of message `m1` at position `i`.
    pub cw1: Vec<Vec<usize>>,
    pub cw2: Vec<Vec<usize>>,
    pub seed: u64,
}

/// Draws each codeword symbol i.i.d. from the corresponding input
/// distribution. Deterministic for a fixed seed: all of sender 1's
/// codewords are drawn first, then sender 2's.
pub fn random_codebook(
    channel: &DmMac,
    inputs: &InputPair,
    m1: usize,
    m2: usize,
    n: u32,
    seed: u64,
) -> Result<Codebook> {
    if m1 == 0 || m2 == 0 || n == 0 {
        return Err(Error::InvalidParameter(
            "message counts and blocklength must be positive".into(),
        ));
    }
    if inputs.p1().len() != channel.x1_size() || inputs.p2().len() != channel.x2_size() {
        return Err(Error::DimensionMismatch(
            "inputs do not match channel alphabets".into(),
        ));
    }
    let cumulative = |p: &[f64]| -> Vec<f64> {
        let mut acc = KahanSum::new();
        p.iter()
            .map(|&v| {
                acc.add(v);
                acc.value()
            })
            .collect()
    };
    let cum1 = cumulative(inputs.p1());
    let cum2 = cumulative(inputs.p2());
    let mut rng = SplitMix64::new(seed);
    let draw = |rng: &mut SplitMix64, cum: &[f64]| -> Vec<usize> {
        (0..n).map(|_| rng.sample_cumulative(cum)).collect()
    };
    let cw1 = (0..m1).map(|_| draw(&mut rng, &cum1)).collect();
    let cw2 = (0..m2).map(|_| draw(&mut rng, &cum2)).collect();
    Ok(Codebook {
        n,
        m1,
        m2,
        cw1,
        cw2,
        seed,
    })
}

/// Exact conditional error probabilities of a code under maximum
/// likelihood decoding with deterministic tie-break.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    /// Average error probability over uniform message pairs.
    pub epsilon: f64,
    /// `eps_pair[m1][m2]`: error given `(m1, m2)` sent.
    pub eps_pair: Vec<Vec<f64>>,
    /// Row means `eps_row[m1] = mean over m2`.
    pub eps_row: Vec<f64>,
    /// Column means `eps_col[m2] = mean over m1`.
    pub eps_col: Vec<f64>,
}

/// ML likelihood of `y` under a message pair.
fn likelihood(channel: &DmMac, code: &Codebook, m1: usize, m2: usize, y: &[usize]) -> f64 {
    let mut p = 1.0;
    for (i, &yi) in y.iter().enumerate() {
        p *= channel.w(code.cw1[m1][i], code.cw2[m2][i], yi);
        if p == 0.0 {
            break;
        }
    }
    p
}

/// ML decoder: maximizes the likelihood over message pairs; ties go to
/// the lexicographically smallest `(m1, m2)`.
fn decode(channel: &DmMac, code: &Codebook, y: &[usize]) -> (usize, usize) {
    let mut best = (0usize, 0usize);
    let mut best_p = f64::NEG_INFINITY;
    for m1 in 0..code.m1 {
        for m2 in 0..code.m2 {
            let p = likelihood(channel, code, m1, m2, y);
            if p > best_p {
                best_p = p;
                best = (m1, m2);
            }
        }
    }
    best
}

/// Enumerates every output sequence, applies the ML rule, and accumulates
/// the conditional error masses exactly (compensated sums, probability
/// space). The average error is accumulated independently of the
/// per-pair table so the aggregation identities are a real check.
pub fn exact_error(channel: &DmMac, code: &Codebook) -> Result<ErrorReport> {
    let ny = channel.y_size();
    let evals = (ny as f64).powi(code.n as i32) * (code.m1 * code.m2) as f64;
    if evals > DEFAULT_ENUMERATION_GUARD {
        return Err(Error::GuardExceeded {
            what: "error enumeration",
            actual: evals,
            guard: DEFAULT_ENUMERATION_GUARD,
        });
    }
    for cw in &code.cw1 {
        if cw.len() != code.n as usize || cw.iter().any(|&s| s >= channel.x1_size()) {
            return Err(Error::DimensionMismatch("codebook 1 out of range".into()));
        }
    }
    for cw in &code.cw2 {
        if cw.len() != code.n as usize || cw.iter().any(|&s| s >= channel.x2_size()) {
            return Err(Error::DimensionMismatch("codebook 2 out of range".into()));
        }
    }

    let mut pair_err = vec![vec![KahanSum::new(); code.m2]; code.m1];
    let mut avg_err = KahanSum::new();
    let uniform = 1.0 / (code.m1 * code.m2) as f64;

    let mut y = vec![0usize; code.n as usize];
    let mut lik = vec![0.0f64; code.m1 * code.m2];
    loop {
        // Likelihoods for every pair, then the ML decision.
        let mut best = (0usize, 0usize);
        let mut best_p = f64::NEG_INFINITY;
        for m1 in 0..code.m1 {
            for m2 in 0..code.m2 {
                let p = likelihood(channel, code, m1, m2, &y);
                lik[m1 * code.m2 + m2] = p;
                if p > best_p {
                    best_p = p;
                    best = (m1, m2);
                }
            }
        }
        for m1 in 0..code.m1 {
            for m2 in 0..code.m2 {
                if (m1, m2) != best {
                    let p = lik[m1 * code.m2 + m2];
                    pair_err[m1][m2].add(p);
                    avg_err.add(uniform * p);
                }
            }
        }
        // Odometer over Y^n.
        let mut pos = code.n as usize;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            y[pos] += 1;
            if y[pos] < ny {
                break;
            }
            y[pos] = 0;
        }
        if y.iter().all(|&v| v == 0) {
            break;
        }
    }

    let eps_pair: Vec<Vec<f64>> = pair_err
        .iter()
        .map(|row| row.iter().map(|s| s.value()).collect())
        .collect();
    let eps_row: Vec<f64> = eps_pair
        .iter()
        .map(|row| {
            let mut s = KahanSum::new();
            for &e in row {
                s.add(e);
            }
            s.value() / code.m2 as f64
        })
        .collect();
    let eps_col: Vec<f64> = (0..code.m2)
        .map(|m2| {
            let mut s = KahanSum::new();
            for row in &eps_pair {
                s.add(row[m2]);
            }
            s.value() / code.m1 as f64
        })
        .collect();
    Ok(ErrorReport {
        epsilon: avg_err.value(),
        eps_pair,
        eps_row,
        eps_col,
    })
}

/// Sampled-decoding estimate of the average error with a 99% normal CI;
/// an independent cross-check of [`exact_error`].
pub fn monte_carlo_error(
    channel: &DmMac,
    code: &Codebook,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if trials < 100 {
        return Err(Error::InvalidParameter(
            "monte_carlo_error needs at least 100 trials".into(),
        ));
    }
    let ny = channel.y_size();
    // Cumulative kernel rows for sampling.
    let mut cum = vec![vec![0.0f64; ny]; channel.x1_size() * channel.x2_size()];
    for x1 in 0..channel.x1_size() {
        for x2 in 0..channel.x2_size() {
            let mut acc = KahanSum::new();
            for y in 0..ny {
                acc.add(channel.w(x1, x2, y));
                cum[x1 * channel.x2_size() + x2][y] = acc.value();
            }
        }
    }
    let mut rng = SplitMix64::new(seed);
    let mut errors = 0u64;
    let mut y = vec![0usize; code.n as usize];
    for _ in 0..trials {
        let m1 = (rng.next_u64() % code.m1 as u64) as usize;
        let m2 = (rng.next_u64() % code.m2 as u64) as usize;
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &cum[code.cw1[m1][i] * channel.x2_size() + code.cw2[m2][i]];
            *yi = rng.sample_cumulative(row);
        }
        if decode(channel, code, &y) != (m1, m2) {
            errors += 1;
        }
    }
    let estimate = errors as f64 / trials as f64;
    let z99 = 2.575_829_303_548_900_4;
    Ok(MonteCarloEstimate {
        estimate,
        half_width: z99 * (estimate * (1.0 - estimate) / trials as f64).sqrt(),
    })
}

/// One rate constraint of a converse verdict. `bound` is `None` when the
/// technique is infeasible at every grid distribution for this component
/// (it then constrains nothing and passes vacuously, flagged here).
#[derive(Debug, Clone, Copy)]
pub struct ComponentCheck {
    pub value: f64,
    pub bound: Option<f64>,
    pub slack: Option<f64>,
    pub feasible_candidates: usize,
    pub pass: bool,
}

/// Outcome of checking a realized code against the converse bound.
#[derive(Debug, Clone)]
pub struct ConverseVerdict {
    pub rate1: ComponentCheck,
    pub rate2: ComponentCheck,
    pub sum: ComponentCheck,
    pub epsilon: f64,
    pub mode: BoundMode,
    pub grid_resolution: u32,
    pub pass: bool,
}

/// Checks `ln M1 <= max b1`, `ln M2 <= max b2`, `ln M1 M2 <= max b12`,
/// with each maximum taken over the simplex grid at the code's exact
/// error probability. Grid points where `eps (1 + 2 beta)` exceeds 1
/// contribute no bound for that component.
pub fn converse_check(
    ln_m1: f64,
    ln_m2: f64,
    epsilon: f64,
    channel: &DmMac,
    n: u32,
    mode: BoundMode,
    grid_resolution: u32,
) -> Result<ConverseVerdict> {
    if !(epsilon > EPS_GUARD_BAND && epsilon < 1.0 - EPS_GUARD_BAND) {
        return Err(Error::InvalidParameter(format!(
            "converse_check needs epsilon strictly inside (0,1), got {epsilon}"
        )));
    }
    let grid = product_input_grid(channel, grid_resolution);
    let mut best: [Option<f64>; 3] = [None; 3];
    let mut feasible = [0usize; 3];
    for inputs in &grid {
        let table = density_table(channel, inputs)?;
        for (c, kind) in DensityKind::ALL.iter().enumerate() {
            match bound_component(&table, *kind, n, epsilon, mode) {
                Ok((b, _)) => {
                    feasible[c] += 1;
                    best[c] = Some(best[c].map_or(b, |cur: f64| cur.max(b)));
                }
                Err(Error::InfeasibleTarget { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let check = |value: f64, c: usize| -> ComponentCheck {
        let bound = best[c];
        ComponentCheck {
            value,
            bound,
            slack: bound.map(|b| b - value),
            feasible_candidates: feasible[c],
            pass: bound.map_or(true, |b| value <= b),
        }
    };
    let rate1 = check(ln_m1, 0);
    let rate2 = check(ln_m2, 1);
    let sum = check(ln_m1 + ln_m2, 2);
    let pass = rate1.pass && rate2.pass && sum.pass;
    Ok(ConverseVerdict {
        rate1,
        rate2,
        sum,
        epsilon,
        mode,
        grid_resolution,
        pass,
    })
}
