//! Exact and certified distributions of n-fold sums of per-letter
//! densities, threshold solving, and the joint lower-orthant primitive.
//!
//! Exact mode enumerates compositions (multiset counts) of the n draws
//! over the k distinct per-letter values: cost C(n+k-1, k-1) instead of
//! k^n. Lattice mode rounds per-letter values onto a grid in a stated
//! direction before convolving, which yields a one-sided CDF: rounding
//! up makes the surrogate sum dominate the true sum pointwise, so its
//! CDF is a lower bound at every threshold (and symmetrically for
//! rounding down).

use crate::density::{DensityKind, DensityTable};
use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, stable_sum, KahanSum, ATOM_TOL};
use crate::rng::SplitMix64;

/// Default cap on the number of compositions enumerated in exact mode.
pub const DEFAULT_COMPOSITION_GUARD: f64 = 1e8;

/// Default cap on dense lattice cells (1-D convolution).
pub const DEFAULT_LATTICE_GUARD: usize = 30_000_000;

/// Default cap on dense joint-lattice cells (trivariate convolution).
pub const DEFAULT_JOINT_GUARD: usize = 30_000_000;

/// Snap tolerance, in lattice-step units, for values that already sit on
/// the lattice up to floating-point noise.
const LATTICE_SNAP: f64 = 1e-9;

/// Rounding direction for lattice quantization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Up,
    Down,
}

/// A threshold that may be absent; the unbounded case is an explicit
/// flag rather than an infinity sentinel.
#[derive(Debug, Clone, Copy)]
pub enum Threshold {
    Finite(f64),
    Unbounded,
}

/// Tail mode for [`solve_delta`].
#[derive(Debug, Clone, Copy)]
pub enum SolveMode {
    Exact,
    /// Certified lattice mode; rounding up is forced so the returned
    /// threshold is sound.
    Lattice { step: f64 },
}

/// A finitely supported law with canonical support: values strictly
/// increasing, probabilities positive, atoms within 1e-12 merged.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicDistribution {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl AtomicDistribution {
    /// Canonicalizes and validates: drops zero-probability atoms, sorts,
    /// merges values within 1e-12 (probability-weighted), and checks the
    /// total mass.
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.len() != probs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values vs {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        let mut pairs: Vec<(f64, f64)> = values
            .into_iter()
            .zip(probs)
            .filter(|&(_, p)| p != 0.0)
            .collect();
        if pairs.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        for &(v, p) in &pairs {
            if !v.is_finite() || !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "bad atom (value {v}, prob {p})"
                )));
            }
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let mut values = Vec::with_capacity(pairs.len());
        let mut probs = Vec::with_capacity(pairs.len());
        let mut anchor = pairs[0].0;
        let mut mass = KahanSum::new();
        let mut weighted = KahanSum::new();
        mass.add(pairs[0].1);
        weighted.add(pairs[0].0 * pairs[0].1);
        for &(v, p) in &pairs[1..] {
            if v - anchor <= ATOM_TOL {
                mass.add(p);
                weighted.add(v * p);
            } else {
                values.push(weighted.value() / mass.value());
                probs.push(mass.value());
                anchor = v;
                mass = KahanSum::new();
                weighted = KahanSum::new();
                mass.add(p);
                weighted.add(v * p);
            }
        }
        values.push(weighted.value() / mass.value());
        probs.push(mass.value());

        let total = stable_sum(&probs);
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total:.12}, expected 1"
            )));
        }
        Ok(Self { values, probs })
    }

    /// Marginal law of one density, read off a joint table. Atoms with
    /// equal values (within 1e-12) merge; this is the handoff point from
    /// the density layer to the tail engine.
    pub fn from_table(table: &DensityTable, kind: DensityKind) -> Result<Self> {
        let values: Vec<f64> = table.atoms().iter().map(|a| a.density(kind)).collect();
        let probs: Vec<f64> = table.atoms().iter().map(|a| a.prob).collect();
        Self::new(values, probs)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }

    pub fn max_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Support spread `max - min`; 0 for a constant law.
    pub fn spread(&self) -> f64 {
        self.max_value() - self.min_value()
    }

    pub fn mean(&self) -> f64 {
        let mut s = KahanSum::new();
        for (v, p) in self.values.iter().zip(&self.probs) {
            s.add(v * p);
        }
        s.value()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let mut s = KahanSum::new();
        for (v, p) in self.values.iter().zip(&self.probs) {
            s.add(p * (v - m) * (v - m));
        }
        s.value()
    }
}

/// A law supported on an arithmetic lattice `offset + i * step`, tagged
/// with the rounding direction that produced it.
#[derive(Debug, Clone)]
pub struct LatticeDistribution {
    step: f64,
    offset: f64,
    pmf: Vec<f64>,
    direction: Rounding,
}

impl LatticeDistribution {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn direction(&self) -> Rounding {
        self.direction
    }

    pub fn value_at(&self, index: usize) -> f64 {
        self.offset + index as f64 * self.step
    }
}

/// CDF evaluation shared by the two sum-law representations.
pub trait SumLaw {
    /// `P(S <= t)`, inclusive at atoms within 1e-12 of `t`.
    fn cdf(&self, t: f64) -> f64;
}

impl SumLaw for AtomicDistribution {
    fn cdf(&self, t: f64) -> f64 {
        let mut acc = KahanSum::new();
        for (v, p) in self.values.iter().zip(&self.probs) {
            if *v <= t + ATOM_TOL {
                acc.add(*p);
            } else {
                break;
            }
        }
        acc.value().min(1.0)
    }
}

impl SumLaw for LatticeDistribution {
    fn cdf(&self, t: f64) -> f64 {
        let mut acc = KahanSum::new();
        for (i, p) in self.pmf.iter().enumerate() {
            if self.value_at(i) <= t + ATOM_TOL {
                acc.add(*p);
            } else {
                break;
            }
        }
        acc.value().min(1.0)
    }
}

/// Free-function form of [`SumLaw::cdf`].
pub fn cdf<D: SumLaw>(dist: &D, t: f64) -> f64 {
    dist.cdf(t)
}

/// A tail-probability target for threshold solving.
#[derive(Debug, Clone, Copy)]
pub struct TailTarget {
    pub target_prob: f64,
    pub n: u32,
}

impl TailTarget {
    pub fn new(target_prob: f64, n: u32) -> Result<Self> {
        if !(target_prob > 0.0 && target_prob < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tail target must lie in (0,1), got {target_prob}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        Ok(Self { target_prob, n })
    }
}

fn ln_factorial_table(n: u32) -> Vec<f64> {
    (0..=n)
        .map(|i| crate::numeric::ln_gamma(i as f64 + 1.0))
        .collect()
}

/// Number of compositions C(n+k-1, k-1) as a float (guard arithmetic).
fn composition_count(n: u32, k: usize) -> f64 {
    crate::numeric::ln_binomial(n as u64 + k as u64 - 1, k as u64 - 1).exp()
}

/// Exact law of the sum of `n` i.i.d. copies of `per_letter`, by
/// composition enumeration with multinomial log-weights.
pub fn exact_sum_distribution(per_letter: &AtomicDistribution, n: u32) -> Result<AtomicDistribution> {
    exact_sum_distribution_with_guard(per_letter, n, DEFAULT_COMPOSITION_GUARD)
}

pub fn exact_sum_distribution_with_guard(
    per_letter: &AtomicDistribution,
    n: u32,
    guard: f64,
) -> Result<AtomicDistribution> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if n == 1 {
        return Ok(per_letter.clone());
    }
    let k = per_letter.support_len();
    let count = composition_count(n, k);
    if count > guard {
        return Err(Error::GuardExceeded {
            what: "composition enumeration",
            actual: count,
            guard,
        });
    }

    let ln_fact = ln_factorial_table(n);
    let ln_probs: Vec<f64> = per_letter.probs().iter().map(|p| p.ln()).collect();
    let values = per_letter.values();

    // Enumerate compositions (n_1, ..., n_k) of n, carrying the partial
    // sum value and partial log-weight down the recursion.
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(count as usize);

    fn recurse(
        slot: usize,
        slots: usize,
        remaining: u32,
        value: f64,
        logw: f64,
        values: &[f64],
        ln_probs: &[f64],
        ln_fact: &[f64],
        out: &mut Vec<(f64, f64)>,
    ) {
        if slot == slots - 1 {
            let c = remaining;
            let mut v = value;
            let mut lw = logw;
            if c > 0 {
                v += c as f64 * values[slot];
                lw += c as f64 * ln_probs[slot] - ln_fact[c as usize];
            }
            out.push((v, lw));
            return;
        }
        for c in 0..=remaining {
            let (mut v, mut lw) = (value, logw);
            if c > 0 {
                v += c as f64 * values[slot];
                lw += c as f64 * ln_probs[slot] - ln_fact[c as usize];
            }
            recurse(
                slot + 1,
                slots,
                remaining - c,
                v,
                lw,
                values,
                ln_probs,
                ln_fact,
                out,
            );
        }
    }
    recurse(
        0,
        k,
        n,
        0.0,
        ln_fact[n as usize],
        values,
        &ln_probs,
        &ln_fact,
        &mut out,
    );

    // Sort by value, merge within tolerance, re-exponentiate with
    // max-shift per merged group.
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged_values = Vec::new();
    let mut merged_probs = Vec::new();
    let mut group: Vec<f64> = Vec::new();
    let mut anchor = out[0].0;
    let mut group_value = out[0].0;
    for &(v, lw) in &out {
        if v - anchor <= ATOM_TOL {
            group.push(lw);
        } else {
            merged_values.push(group_value);
            merged_probs.push(log_sum_exp(&group).exp());
            group.clear();
            group.push(lw);
            anchor = v;
            group_value = v;
        }
    }
    merged_values.push(group_value);
    merged_probs.push(log_sum_exp(&group).exp());

    AtomicDistribution::new(merged_values, merged_probs)
}

/// Snaps `x` to the nearest integer when it is already there up to
/// floating-point noise, otherwise rounds in `direction`. Indices past
/// 2^52 would lose integer resolution, so they are rejected.
fn lattice_index(x: f64, direction: Rounding) -> Result<i64> {
    if x.abs() > 4.5e15 {
        return Err(Error::InvalidParameter(format!(
            "lattice step too small relative to the values (index {x:.3e})"
        )));
    }
    let r = x.round();
    Ok(if (x - r).abs() <= LATTICE_SNAP {
        r as i64
    } else {
        match direction {
            Rounding::Up => x.ceil() as i64,
            Rounding::Down => x.floor() as i64,
        }
    })
}

/// Law of the n-fold sum after quantizing each per-letter value onto a
/// lattice of the given step, rounding in the stated direction.
pub fn lattice_sum_distribution(
    per_letter: &AtomicDistribution,
    n: u32,
    step: f64,
    direction: Rounding,
) -> Result<LatticeDistribution> {
    lattice_sum_distribution_with_guard(per_letter, n, step, direction, DEFAULT_LATTICE_GUARD)
}

pub fn lattice_sum_distribution_with_guard(
    per_letter: &AtomicDistribution,
    n: u32,
    step: f64,
    direction: Rounding,
    guard: usize,
) -> Result<LatticeDistribution> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lattice step must be positive, got {step}"
        )));
    }

    // Per-letter values quantized onto the absolute lattice of multiples
    // of `step`, then rebased so the smallest index is 0.
    let raw: Vec<(i64, f64)> = per_letter
        .values()
        .iter()
        .zip(per_letter.probs())
        .map(|(v, p)| Ok((lattice_index(v / step, direction)?, *p)))
        .collect::<Result<_>>()?;
    let base = raw.iter().map(|&(i, _)| i).min().unwrap();
    let mut kernel: Vec<(usize, f64)> = Vec::new();
    for (i, p) in raw {
        let idx = (i - base) as usize;
        match kernel.iter_mut().find(|(j, _)| *j == idx) {
            Some((_, q)) => *q += p,
            None => kernel.push((idx, p)),
        }
    }
    kernel.sort_by_key(|&(i, _)| i);
    let span = kernel.last().unwrap().0;

    let len = span
        .checked_mul(n as usize)
        .and_then(|w| w.checked_add(1))
        .ok_or(Error::GuardExceeded {
            what: "lattice width",
            actual: f64::INFINITY,
            guard: guard as f64,
        })?;
    if len > guard {
        return Err(Error::GuardExceeded {
            what: "lattice width",
            actual: len as f64,
            guard: guard as f64,
        });
    }

    // In-place convolution, descending so previous-step cells are read
    // before being overwritten (all kernel offsets are >= 0).
    let mut pmf = vec![0.0; len];
    pmf[0] = 1.0;
    let mut valid = 1usize;
    for _ in 0..n {
        valid += span;
        for i in (0..valid.min(len)).rev() {
            let mut acc = 0.0;
            for &(off, p) in &kernel {
                if off <= i {
                    acc += p * pmf[i - off];
                }
            }
            pmf[i] = acc;
        }
    }

    Ok(LatticeDistribution {
        step,
        offset: n as f64 * base as f64 * step,
        pmf,
        direction,
    })
}

/// Result of [`solve_delta`]: the back-off `delta`, the threshold atom
/// `t*` it came from, and the certified tail mass at that threshold.
#[derive(Debug, Clone, Copy)]
pub struct DeltaSolution {
    pub delta: f64,
    pub threshold: f64,
    pub tail_prob: f64,
}

/// Largest `delta` with `P(S <= n (mean - delta)) >= target` under the
/// exact or certified-lower lattice CDF: `delta = mean - t*/n` where `t*`
/// is the smallest atom whose CDF reaches the target.
pub fn solve_delta(
    per_letter: &AtomicDistribution,
    mean: f64,
    tt: TailTarget,
    mode: SolveMode,
) -> Result<DeltaSolution> {
    let target = tt.target_prob;
    let n = tt.n;
    let (threshold, tail_prob) = match mode {
        SolveMode::Exact => {
            let law = exact_sum_distribution(per_letter, n)?;
            scan_for_target(law.values().iter().cloned().zip(law.probs().iter().cloned()), target)?
        }
        SolveMode::Lattice { step } => {
            // Rounding up is forced: the surrogate CDF lower-bounds the
            // true CDF, so the returned threshold is sound.
            let law = lattice_sum_distribution(per_letter, n, step, Rounding::Up)?;
            let pairs = (0..law.pmf().len()).map(|i| (law.value_at(i), law.pmf()[i]));
            scan_for_target(pairs, target)?
        }
    };
    Ok(DeltaSolution {
        delta: mean - threshold / n as f64,
        threshold,
        tail_prob,
    })
}

fn scan_for_target(
    pairs: impl Iterator<Item = (f64, f64)>,
    target: f64,
) -> Result<(f64, f64)> {
    let mut acc = KahanSum::new();
    let mut last = None;
    for (v, p) in pairs {
        acc.add(p);
        let c = acc.value();
        if c >= target {
            return Ok((v, c));
        }
        last = Some((v, c));
    }
    // Total mass is 1 by invariant; reaching here means the target was
    // missed only by summation noise. The largest atom always has CDF 1.
    match last {
        Some((v, c)) if c >= target - 1e-9 => Ok((v, c)),
        _ => Err(Error::InvalidDistribution(
            "empty support in tail solve".into(),
        )),
    }
}

/// Certified lower bound on `P(S1 <= t1, S2 <= t2, S12 <= t12)` for the
/// n-fold i.i.d. sum of the density triple, by joint lattice convolution
/// with every coordinate rounded up. Unbounded thresholds drop their
/// coordinate from the computation.
pub fn joint_tail(
    table: &DensityTable,
    n: u32,
    t1: Threshold,
    t2: Threshold,
    t12: Threshold,
    step: f64,
) -> Result<f64> {
    joint_tail_with_guard(table, n, t1, t2, t12, step, DEFAULT_JOINT_GUARD)
}

pub fn joint_tail_with_guard(
    table: &DensityTable,
    n: u32,
    t1: Threshold,
    t2: Threshold,
    t12: Threshold,
    step: f64,
    guard: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lattice step must be positive, got {step}"
        )));
    }
    let mut axes: Vec<(DensityKind, f64)> = Vec::new();
    for (kind, t) in [
        (DensityKind::Rate1, t1),
        (DensityKind::Rate2, t2),
        (DensityKind::SumRate, t12),
    ] {
        if let Threshold::Finite(t) = t {
            axes.push((kind, t));
        }
    }
    if axes.is_empty() {
        return Ok(1.0);
    }
    let atoms = table.atoms();
    if atoms.is_empty() {
        return Err(Error::InvalidDistribution("empty density table".into()));
    }
    // Absolute lattice indices per axis, rounded up, rebased per axis.
    let raw: Vec<(Vec<i64>, f64)> = atoms
        .iter()
        .map(|a| {
            let idx: Vec<i64> = axes
                .iter()
                .map(|&(kind, _)| lattice_index(a.density(kind) / step, Rounding::Up))
                .collect::<Result<_>>()?;
            Ok((idx, a.prob))
        })
        .collect::<Result<_>>()?;
    let bases: Vec<i64> = (0..axes.len())
        .map(|a| raw.iter().map(|(i, _)| i[a]).min().unwrap())
        .collect();
    let mut kernel: Vec<(Vec<usize>, f64)> = Vec::new();
    for (idx, p) in raw {
        let idx: Vec<usize> = idx
            .iter()
            .zip(&bases)
            .map(|(i, b)| (i - b) as usize)
            .collect();
        match kernel.iter_mut().find(|(i, _)| *i == idx) {
            Some((_, q)) => *q += p,
            None => kernel.push((idx, p)),
        }
    }

    let spans: Vec<usize> = (0..axes.len())
        .map(|a| kernel.iter().map(|(i, _)| i[a]).max().unwrap())
        .collect();
    let dims: Vec<usize> = spans.iter().map(|&s| s * n as usize + 1).collect();
    let cells: usize = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).ok_or(
        Error::GuardExceeded {
            what: "joint lattice",
            actual: f64::INFINITY,
            guard: guard as f64,
        },
    )?;
    if cells > guard {
        return Err(Error::GuardExceeded {
            what: "joint lattice",
            actual: cells as f64,
            guard: guard as f64,
        });
    }
    let mut strides = vec![1usize; dims.len()];
    for a in (0..dims.len().saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * dims[a + 1];
    }
    let kernel_flat: Vec<(Vec<usize>, usize, f64)> = kernel
        .into_iter()
        .map(|(idx, p)| {
            let flat: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
            (idx, flat, p)
        })
        .collect();

    // Double-buffered dense convolution with per-axis underflow checks.
    let mut old = vec![0.0; cells];
    let mut new = vec![0.0; cells];
    old[0] = 1.0;
    let mut coords = vec![0usize; dims.len()];
    for _ in 0..n {
        for c in new.iter_mut() {
            *c = 0.0;
        }
        for (flat, cell) in new.iter_mut().enumerate() {
            // Decode coords of `flat`.
            let mut rem = flat;
            for (a, s) in strides.iter().enumerate() {
                coords[a] = rem / s;
                rem %= s;
            }
            let mut acc = 0.0;
            'kern: for (idx, off, p) in &kernel_flat {
                for (a, i) in idx.iter().enumerate() {
                    if coords[a] < *i {
                        continue 'kern;
                    }
                }
                acc += p * old[flat - off];
            }
            *cell = acc;
        }
        std::mem::swap(&mut old, &mut new);
    }

    // Per-axis inclusive index caps from the thresholds; axis values are
    // (n * base + i) * step after rebasing.
    let mut caps = vec![0usize; dims.len()];
    for (a, (&(_, t), (&b, &d))) in axes.iter().zip(bases.iter().zip(&dims)).enumerate() {
        let x = (t + ATOM_TOL - n as f64 * b as f64 * step) / step;
        if x < 0.0 {
            return Ok(0.0);
        }
        caps[a] = (x.floor() as usize).min(d - 1);
    }
    let mut acc = KahanSum::new();
    for (flat, &p) in old.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut rem = flat;
        let mut inside = true;
        for (a, s) in strides.iter().enumerate() {
            let c = rem / s;
            rem %= s;
            if c > caps[a] {
                inside = false;
                break;
            }
        }
        if inside {
            acc.add(p);
        }
    }
    Ok(acc.value().clamp(0.0, 1.0))
}

/// Monte Carlo estimate of one marginal tail with a 99% normal CI.
#[derive(Debug, Clone, Copy)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub half_width: f64,
}

const Z_99: f64 = 2.575_829_303_548_900_4;

/// Samples `samples` i.i.d. n-fold sums of the chosen density and returns
/// the empirical `P(S <= t)` with its 99% CI half-width. Deterministic
/// for a fixed seed.
pub fn monte_carlo_tail(
    table: &DensityTable,
    kind: DensityKind,
    n: u32,
    t: Threshold,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples < 100 {
        return Err(Error::InvalidParameter(
            "monte_carlo_tail needs at least 100 samples".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let t = match t {
        Threshold::Unbounded => {
            return Ok(MonteCarloEstimate {
                estimate: 1.0,
                half_width: 0.0,
            })
        }
        Threshold::Finite(t) => t,
    };
    let marginal = AtomicDistribution::from_table(table, kind)?;
    let mut cum = Vec::with_capacity(marginal.support_len());
    let mut acc = KahanSum::new();
    for p in marginal.probs() {
        acc.add(*p);
        cum.push(acc.value());
    }
    let mut rng = SplitMix64::new(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let mut sum = 0.0;
        for _ in 0..n {
            sum += marginal.values()[rng.sample_cumulative(&cum)];
        }
        if sum <= t + ATOM_TOL {
            hits += 1;
        }
    }
    let estimate = hits as f64 / samples as f64;
    let half_width = Z_99 * (estimate * (1.0 - estimate) / samples as f64).sqrt();
    Ok(MonteCarloEstimate {
        estimate,
        half_width,
    })
}
