//! Support-function sweeps: outer regions at finite blocklength and the
//! first-order capacity region.
//!
//! Every candidate input distribution induces a pentagon
//! `{0 <= R1 <= a, 0 <= R2 <= b, R1 + R2 <= c}`; sweeping the direction
//! `lambda R1 + (1 - lambda) R2` over a grid of candidates traces the
//! boundary of (the convex hull of) their union.

use crate::bounds::{triple_from_table, BoundMode, BoundTriple};
use crate::channel::{DmMac, InputPair, TimeSharedInput};
use crate::density::{density_table, moments, time_shared_density_table, DensityKind};
use crate::error::{Error, Result};

/// Rate caps induced by one input distribution, in nats per channel use.
/// Negative bound components are clamped to zero before assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pentagon {
    pub r1_cap: f64,
    pub r2_cap: f64,
    pub sum_cap: f64,
}

impl Pentagon {
    pub fn new(r1_cap: f64, r2_cap: f64, sum_cap: f64) -> Self {
        Self {
            r1_cap: r1_cap.max(0.0),
            r2_cap: r2_cap.max(0.0),
            sum_cap: sum_cap.max(0.0),
        }
    }

    /// Whether `(r1, r2)` satisfies all three constraints within `tol`.
    pub fn contains(&self, r1: f64, r2: f64, tol: f64) -> bool {
        r1 >= -tol
            && r2 >= -tol
            && r1 <= self.r1_cap + tol
            && r2 <= self.r2_cap + tol
            && r1 + r2 <= self.sum_cap + tol
    }
}

/// A maximizer of `lambda R1 + (1 - lambda) R2` over a pentagon.
#[derive(Debug, Clone, Copy)]
pub struct SupportPoint {
    pub value: f64,
    pub r1: f64,
    pub r2: f64,
}

/// Maximizes the weighted rate over the pentagon. The optimum sits at one
/// of the two dominant corners; ties break toward larger `R1`.
pub fn pentagon_support(p: &Pentagon, lambda: f64) -> SupportPoint {
    let (a, b, c) = (p.r1_cap, p.r2_cap, p.sum_cap);
    // R1-heavy corner, then R2-heavy corner.
    let r1a = a.min(c);
    let corner_a = (r1a, b.min(c - r1a));
    let r2b = b.min(c);
    let corner_b = (a.min(c - r2b), r2b);
    let value = |(r1, r2): (f64, f64)| lambda * r1 + (1.0 - lambda) * r2;
    if value(corner_a) >= value(corner_b) {
        SupportPoint {
            value: value(corner_a),
            r1: corner_a.0,
            r2: corner_a.1,
        }
    } else {
        SupportPoint {
            value: value(corner_b),
            r1: corner_b.0,
            r2: corner_b.1,
        }
    }
}

/// One swept boundary point with its achieving candidate.
#[derive(Debug, Clone)]
pub struct RegionPoint {
    pub lambda: f64,
    pub r1: f64,
    pub r2: f64,
    /// Deterministic identifier of the achieving input distribution.
    pub dist_id: String,
    /// The achieving candidate's raw bound values (nats): `(b1, b2, b12)`
    /// for finite-blocklength sweeps, `(I1, I2, I12)` for capacity.
    pub bound: (f64, f64, f64),
}

#[derive(Debug, Clone)]
pub struct RegionMeta {
    pub n: Option<u32>,
    pub eps: Option<f64>,
    pub mode: String,
    pub grid_resolution: u32,
    pub lambda_count: usize,
    pub u_cardinality: u8,
    pub padded: bool,
    /// Grid candidates the bound technique could not cover (infeasible
    /// `eps (1 + 2 beta)`); they contribute no pentagon.
    pub infeasible_candidates: usize,
}

/// Swept boundary: points sorted by lambda.
#[derive(Debug, Clone)]
pub struct RegionBoundary {
    pub points: Vec<RegionPoint>,
    pub meta: RegionMeta,
}

/// Sweep parameters.
#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    pub grid_resolution: u32,
    pub lambda_count: usize,
    pub u_cardinality: u8,
    /// Adds `L * (grid step)` of slack per constraint, with `L` a
    /// finite-difference Lipschitz estimate, so the grid under-estimate
    /// of the supremum cannot understate the outer bound.
    pub padding: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            grid_resolution: 32,
            lambda_count: 101,
            u_cardinality: 1,
            padding: false,
        }
    }
}

/// All probability vectors over `dim` symbols with denominators
/// `resolution`, in deterministic lexicographic order.
pub fn simplex_grid(dim: usize, resolution: u32) -> Vec<Vec<f64>> {
    fn rec(dim: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if dim == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in (0..=remaining).rev() {
            prefix.push(c);
            rec(dim - 1, remaining - c, prefix, out);
            prefix.pop();
        }
    }
    let mut counts = Vec::new();
    rec(dim, resolution, &mut Vec::new(), &mut counts);
    counts
        .into_iter()
        .map(|cs| cs.iter().map(|&c| c as f64 / resolution as f64).collect())
        .collect()
}

/// The product input grid, `idx1`-major.
pub(crate) fn product_input_grid(channel: &DmMac, resolution: u32) -> Vec<InputPair> {
    let g1 = simplex_grid(channel.x1_size(), resolution);
    let g2 = simplex_grid(channel.x2_size(), resolution);
    let mut out = Vec::with_capacity(g1.len() * g2.len());
    for p1 in &g1 {
        for p2 in &g2 {
            out.push(InputPair::new(p1.clone(), p2.clone()).expect("grid point is a pmf"));
        }
    }
    out
}

struct Candidate {
    id: String,
    pentagon: Pentagon,
    bound: (f64, f64, f64),
}

fn describe_pair(inputs: &InputPair) -> String {
    let fmt = |p: &[f64]| {
        p.iter()
            .map(|v| format!("{v:.6}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    format!("p1=[{}] p2=[{}]", fmt(inputs.p1()), fmt(inputs.p2()))
}

/// Weight grids (quarters) for mixing 2 or 3 time-shared components.
fn mixing_weights(components: usize) -> Vec<Vec<f64>> {
    match components {
        2 => vec![
            vec![0.25, 0.75],
            vec![0.5, 0.5],
            vec![0.75, 0.25],
        ],
        3 => vec![
            vec![0.25, 0.25, 0.5],
            vec![0.25, 0.5, 0.25],
            vec![0.5, 0.25, 0.25],
        ],
        _ => vec![],
    }
}

const TS_CANDIDATE_GUARD: usize = 2_000_000;

fn sweep(
    candidates: &[Candidate],
    lambda_count: usize,
    meta: RegionMeta,
) -> Result<RegionBoundary> {
    if lambda_count < 3 {
        return Err(Error::InvalidParameter(
            "lambda_count must be at least 3".into(),
        ));
    }
    if candidates.is_empty() {
        return Err(Error::InvalidParameter(
            "no feasible candidate distribution on the grid".into(),
        ));
    }
    let mut points = Vec::with_capacity(lambda_count);
    for j in 0..lambda_count {
        let lambda = j as f64 / (lambda_count - 1) as f64;
        let mut best: Option<(SupportPoint, usize)> = None;
        for (idx, cand) in candidates.iter().enumerate() {
            let sp = pentagon_support(&cand.pentagon, lambda);
            // Strict improvement only: ties keep the lexicographically
            // first candidate index.
            let better = match &best {
                None => true,
                Some((cur, _)) => sp.value > cur.value,
            };
            if better {
                best = Some((sp, idx));
            }
        }
        let (sp, idx) = best.unwrap();
        points.push(RegionPoint {
            lambda,
            r1: sp.r1,
            r2: sp.r2,
            dist_id: candidates[idx].id.clone(),
            bound: candidates[idx].bound,
        });
    }
    Ok(RegionBoundary { points, meta })
}

/// Finite-blocklength outer region: per-lambda best pentagon over the
/// product-input grid (plus time-shared mixtures for `u_cardinality > 1`).
///
/// Grid candidates where the chosen mode is infeasible contribute no
/// pentagon; their count is reported in the metadata.
pub fn outer_region(
    channel: &DmMac,
    n: u32,
    eps: f64,
    cfg: &SweepConfig,
    mode: BoundMode,
) -> Result<RegionBoundary> {
    if cfg.grid_resolution < 2 {
        return Err(Error::InvalidParameter(
            "grid_resolution must be at least 2".into(),
        ));
    }
    if !(1..=3).contains(&cfg.u_cardinality) {
        return Err(Error::InvalidParameter(
            "u_cardinality must be 1, 2, or 3".into(),
        ));
    }
    let nf = n as f64;
    let grid = product_input_grid(channel, cfg.grid_resolution);
    let mut candidates = Vec::with_capacity(grid.len());
    let mut infeasible = 0usize;
    let mut raw_bounds: Vec<Option<BoundTriple>> = Vec::with_capacity(grid.len());
    for inputs in &grid {
        let table = density_table(channel, inputs)?;
        match triple_from_table(&table, n, eps, mode) {
            Ok(t) => {
                candidates.push(Candidate {
                    id: describe_pair(inputs),
                    pentagon: Pentagon::new(t.b1 / nf, t.b2 / nf, t.b12 / nf),
                    bound: (t.b1, t.b2, t.b12),
                });
                raw_bounds.push(Some(t));
            }
            Err(Error::InfeasibleTarget { .. }) => {
                infeasible += 1;
                raw_bounds.push(None);
            }
            Err(e) => return Err(e),
        }
    }

    if cfg.u_cardinality >= 2 {
        let combos = time_shared_candidates(channel, &grid, cfg, n, eps, mode, &mut infeasible)?;
        candidates.extend(combos);
    }

    if cfg.padding {
        apply_padding(channel, &grid, &raw_bounds, cfg.grid_resolution, nf, &mut candidates);
    }

    sweep(
        &candidates,
        cfg.lambda_count,
        RegionMeta {
            n: Some(n),
            eps: Some(eps),
            mode: mode.label().to_string(),
            grid_resolution: cfg.grid_resolution,
            lambda_count: cfg.lambda_count,
            u_cardinality: cfg.u_cardinality,
            padded: cfg.padding,
            infeasible_candidates: infeasible,
        },
    )
}

fn time_shared_candidates(
    channel: &DmMac,
    grid: &[InputPair],
    cfg: &SweepConfig,
    n: u32,
    eps: f64,
    mode: BoundMode,
    infeasible: &mut usize,
) -> Result<Vec<Candidate>> {
    let nf = n as f64;
    let p = grid.len();
    let pair_count = p * (p - 1) / 2 * mixing_weights(2).len();
    let triple_count = if cfg.u_cardinality >= 3 {
        p * (p - 1) * (p - 2) / 6 * mixing_weights(3).len()
    } else {
        0
    };
    if pair_count + triple_count > TS_CANDIDATE_GUARD {
        return Err(Error::GuardExceeded {
            what: "time-sharing candidate enumeration",
            actual: (pair_count + triple_count) as f64,
            guard: TS_CANDIDATE_GUARD as f64,
        });
    }
    let mut out = Vec::new();
    let mut push_combo = |members: &[usize], weights: &[f64]| -> Result<()> {
        let components: Vec<InputPair> = members.iter().map(|&i| grid[i].clone()).collect();
        let ts = TimeSharedInput::new(weights.to_vec(), components)?;
        let table = time_shared_density_table(channel, &ts)?;
        match triple_from_table(&table, n, eps, mode) {
            Ok(t) => {
                let id = format!(
                    "u={} members=[{}] weights=[{}]",
                    members.len(),
                    members
                        .iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                    weights
                        .iter()
                        .map(|w| format!("{w:.2}"))
                        .collect::<Vec<_>>()
                        .join(",")
                );
                out.push(Candidate {
                    id,
                    pentagon: Pentagon::new(t.b1 / nf, t.b2 / nf, t.b12 / nf),
                    bound: (t.b1, t.b2, t.b12),
                });
            }
            Err(Error::InfeasibleTarget { .. }) => *infeasible += 1,
            Err(e) => return Err(e),
        }
        Ok(())
    };
    let pair_weights = mixing_weights(2);
    for i in 0..p {
        for j in (i + 1)..p {
            for w in &pair_weights {
                push_combo(&[i, j], w)?;
            }
        }
    }
    if cfg.u_cardinality >= 3 {
        let triple_weights = mixing_weights(3);
        for i in 0..p {
            for j in (i + 1)..p {
                for k in (j + 1)..p {
                    for w in &triple_weights {
                        push_combo(&[i, j, k], w)?;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Conservative slack per constraint: a finite-difference estimate of the
/// bound's Lipschitz constant over the simplex grid, times the grid step.
fn apply_padding(
    channel: &DmMac,
    grid: &[InputPair],
    raw: &[Option<BoundTriple>],
    resolution: u32,
    nf: f64,
    candidates: &mut [Candidate],
) {
    let step = 1.0 / resolution as f64;
    let g2_len = simplex_grid(channel.x2_size(), resolution).len();
    let mut lips = [0.0f64; 3];
    let neighbor = |a: &InputPair, b: &InputPair| {
        let l1 = |x: &[f64], y: &[f64]| -> f64 {
            x.iter().zip(y).map(|(u, v)| (u - v).abs()).sum()
        };
        let d1 = l1(a.p1(), b.p1());
        let d2 = l1(a.p2(), b.p2());
        (d1 <= 2.0 * step + 1e-12 && d2 == 0.0) || (d2 <= 2.0 * step + 1e-12 && d1 == 0.0)
    };
    for i in 0..grid.len() {
        for j in (i + 1)..grid.len() {
            // Only scan nearby enumeration indices; the grid is
            // idx1-major so same-p1 neighbors are adjacent and same-p2
            // neighbors are one block apart.
            if j != i + 1 && j != i + g2_len {
                continue;
            }
            if !neighbor(&grid[i], &grid[j]) {
                continue;
            }
            if let (Some(a), Some(b)) = (&raw[i], &raw[j]) {
                for (c, l) in lips.iter_mut().enumerate() {
                    let kinds = [DensityKind::Rate1, DensityKind::Rate2, DensityKind::SumRate];
                    let diff = (a.get(kinds[c]) - b.get(kinds[c])).abs() / step;
                    *l = l.max(diff);
                }
            }
        }
    }
    for cand in candidates.iter_mut() {
        cand.pentagon = Pentagon::new(
            cand.pentagon.r1_cap + lips[0] * step / nf,
            cand.pentagon.r2_cap + lips[1] * step / nf,
            cand.pentagon.sum_cap + lips[2] * step / nf,
        );
    }
}

/// First-order capacity region: the same sweep with pentagon
/// `(I1, I2, I12)` per grid distribution (no `n`, no `eps`); the sweep's
/// convexification plays the role of time sharing.
pub fn capacity_region(
    channel: &DmMac,
    grid_resolution: u32,
    lambda_count: usize,
) -> Result<RegionBoundary> {
    if grid_resolution < 2 {
        return Err(Error::InvalidParameter(
            "grid_resolution must be at least 2".into(),
        ));
    }
    let grid = product_input_grid(channel, grid_resolution);
    let mut candidates = Vec::with_capacity(grid.len());
    for inputs in &grid {
        let table = density_table(channel, inputs)?;
        let i1 = moments(&table, DensityKind::Rate1).mean;
        let i2 = moments(&table, DensityKind::Rate2).mean;
        let i12 = moments(&table, DensityKind::SumRate).mean;
        candidates.push(Candidate {
            id: describe_pair(inputs),
            pentagon: Pentagon::new(i1, i2, i12),
            bound: (i1, i2, i12),
        });
    }
    sweep(
        &candidates,
        lambda_count,
        RegionMeta {
            n: None,
            eps: None,
            mode: "capacity".to_string(),
            grid_resolution,
            lambda_count,
            u_cardinality: 1,
            padded: false,
            infeasible_candidates: 0,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn adder() -> DmMac {
        DmMac::new(
            2,
            2,
            3,
            vec![
                vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
                vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            ],
        )
        .unwrap()
    }

    #[test]
    fn support_symmetric_sum_constraint() {
        let p = Pentagon::new(1.0, 1.0, 1.5);
        let sp = pentagon_support(&p, 0.5);
        assert!((sp.value - 0.75).abs() < 1e-15);
    }

    #[test]
    fn support_single_rate_cap() {
        let p = Pentagon::new(1.0, 1.0, 1.5);
        let sp = pentagon_support(&p, 1.0);
        assert!((sp.value - 1.0).abs() < 1e-15);
        assert!((sp.r1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn support_skewed_direction() {
        let p = Pentagon::new(1.0, 1.0, 1.5);
        let sp = pentagon_support(&p, 0.7);
        assert!((sp.value - 0.85).abs() < 1e-15);
        assert!((sp.r1 - 1.0).abs() < 1e-15);
        assert!((sp.r2 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn support_tie_prefers_larger_r1() {
        let p = Pentagon::new(1.0, 1.0, 1.5);
        let sp = pentagon_support(&p, 0.5);
        assert!(sp.r1 > sp.r2);
    }

    #[test]
    fn support_matches_dense_enumeration() {
        // Independent check: scan a fine grid of feasible points.
        let p = Pentagon::new(0.8, 1.3, 1.6);
        for lambda in [0.0, 0.2, 0.5, 0.77, 1.0] {
            let sp = pentagon_support(&p, lambda);
            let mut best = f64::NEG_INFINITY;
            let m = 400;
            for i in 0..=m {
                let r1 = p.r1_cap * i as f64 / m as f64;
                for j in 0..=m {
                    let r2 = p.r2_cap * j as f64 / m as f64;
                    if r1 + r2 <= p.sum_cap {
                        best = best.max(lambda * r1 + (1.0 - lambda) * r2);
                    }
                }
            }
            assert!(sp.value >= best - 1e-9, "lambda {lambda}");
            assert!(p.contains(sp.r1, sp.r2, 1e-12));
        }
    }

    #[test]
    fn simplex_grid_shape_and_nesting() {
        let g = simplex_grid(2, 4);
        assert_eq!(g.len(), 5);
        for p in &g {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        // Power-of-two refinement contains the coarse grid bit-exactly.
        let fine = simplex_grid(2, 8);
        for p in &g {
            assert!(fine.iter().any(|q| q == p));
        }
        assert_eq!(simplex_grid(3, 4).len(), 15);
    }

    #[test]
    fn capacity_adder_matches_known_pentagon() {
        let ch = adder();
        let boundary = capacity_region(&ch, 16, 21).unwrap();
        // Uniform inputs achieve {ln2, ln2, 1.5 ln2}; the sweep must
        // reproduce its support function at every lambda.
        let oracle = Pentagon::new(LN2, LN2, 1.5 * LN2);
        for pt in &boundary.points {
            let expect = pentagon_support(&oracle, pt.lambda);
            let got = pt.lambda * pt.r1 + (1.0 - pt.lambda) * pt.r2;
            assert!(
                (got - expect.value).abs() < 2.0 / 16.0,
                "lambda {}: {} vs {}",
                pt.lambda,
                got,
                expect.value
            );
        }
    }

    #[test]
    fn capacity_handles_ternary_alphabet() {
        // Y = X1 over a 3-ary alphabet, X2 mute: the region is the
        // segment R1 <= ln 3, R2 = 0, and uniform inputs sit on the grid.
        let mut w = vec![vec![vec![0.0; 3]; 2]; 3];
        for x1 in 0..3 {
            for x2 in 0..2 {
                w[x1][x2][x1] = 1.0;
            }
        }
        let ch = DmMac::new(3, 2, 3, w).unwrap();
        let boundary = capacity_region(&ch, 9, 11).unwrap();
        let ln3 = 3.0f64.ln();
        let last = boundary.points.last().unwrap();
        assert!((last.r1 - ln3).abs() < 2.0 / 9.0);
        for pt in &boundary.points {
            assert!(pt.r2.abs() < 1e-9);
            assert!(pt.r1 <= ln3 + 1e-9);
        }
    }

    #[test]
    fn capacity_input_independent_is_origin() {
        let row = vec![0.25, 0.75];
        let ch = DmMac::new(
            2,
            2,
            2,
            vec![
                vec![row.clone(), row.clone()],
                vec![row.clone(), row.clone()],
            ],
        )
        .unwrap();
        let boundary = capacity_region(&ch, 4, 5).unwrap();
        for pt in &boundary.points {
            assert!(pt.r1.abs() < 1e-12 && pt.r2.abs() < 1e-12);
        }
    }

    #[test]
    fn outer_region_lambda_one_maximizes_b1() {
        let ch = adder();
        let cfg = SweepConfig {
            grid_resolution: 8,
            lambda_count: 5,
            ..Default::default()
        };
        let boundary = outer_region(&ch, 100, 0.1, &cfg, BoundMode::NormalApprox).unwrap();
        let last = boundary.points.last().unwrap();
        assert!((last.lambda - 1.0).abs() < 1e-15);
        // R1 at lambda = 1 equals the max over the grid of b1/n.
        let grid = product_input_grid(&ch, 8);
        let mut best = f64::NEG_INFINITY;
        for inputs in &grid {
            let t = crate::bounds::normal_approx_triple(&ch, inputs, 100, 0.1).unwrap();
            best = best.max((t.b1 / 100.0).max(0.0).min((t.b12 / 100.0).max(0.0)));
        }
        assert!((last.r1 - best).abs() < 1e-9);
    }

    #[test]
    fn outer_region_points_satisfy_their_pentagon() {
        let ch = adder();
        let cfg = SweepConfig {
            grid_resolution: 8,
            lambda_count: 11,
            ..Default::default()
        };
        for mode in [BoundMode::NormalApprox, BoundMode::ExplicitExact] {
            let boundary = outer_region(&ch, 60, 0.1, &cfg, mode).unwrap();
            for pt in &boundary.points {
                let pent = Pentagon::new(
                    pt.bound.0 / 60.0,
                    pt.bound.1 / 60.0,
                    pt.bound.2 / 60.0,
                );
                assert!(pent.contains(pt.r1, pt.r2, 1e-9));
            }
        }
    }

    #[test]
    fn time_sharing_candidates_only_add_area() {
        let ch = adder();
        let base = SweepConfig {
            grid_resolution: 4,
            lambda_count: 9,
            u_cardinality: 1,
            padding: false,
        };
        let with_ts = SweepConfig {
            u_cardinality: 2,
            ..base
        };
        let plain = outer_region(&ch, 50, 0.1, &base, BoundMode::NormalApprox).unwrap();
        let shared = outer_region(&ch, 50, 0.1, &with_ts, BoundMode::NormalApprox).unwrap();
        for (a, b) in plain.points.iter().zip(&shared.points) {
            let va = a.lambda * a.r1 + (1.0 - a.lambda) * a.r2;
            let vb = b.lambda * b.r1 + (1.0 - b.lambda) * b.r2;
            assert!(vb >= va - 1e-12);
        }
    }

    #[test]
    fn capacity_dominates_outer_region_at_large_n() {
        // First-order support >= finite-n support minus (ln n)/(2n), per
        // lambda, on the adder at n = 400, eps = 0.1.
        let ch = adder();
        let n = 400u32;
        let cfg = SweepConfig {
            grid_resolution: 16,
            lambda_count: 101,
            u_cardinality: 1,
            padding: false,
        };
        let outer = outer_region(&ch, n, 0.1, &cfg, BoundMode::NormalApprox).unwrap();
        let cap = capacity_region(&ch, 16, 101).unwrap();
        let slack = 0.5 * (n as f64).ln() / n as f64 + 1e-9;
        for (o, c) in outer.points.iter().zip(&cap.points) {
            let ho = o.lambda * o.r1 + (1.0 - o.lambda) * o.r2;
            let hc = c.lambda * c.r1 + (1.0 - c.lambda) * c.r2;
            assert!(
                hc >= ho - slack,
                "lambda {}: capacity {hc} vs outer {ho}",
                o.lambda
            );
        }
    }

    #[test]
    fn time_sharing_works_in_explicit_mode() {
        // The mixed per-letter law is convolved directly, so explicit
        // tails stay certified with u = 2 candidates in play.
        let ch = adder();
        let cfg = SweepConfig {
            grid_resolution: 4,
            lambda_count: 7,
            u_cardinality: 2,
            padding: false,
        };
        let boundary = outer_region(&ch, 30, 0.1, &cfg, BoundMode::ExplicitExact).unwrap();
        for pt in &boundary.points {
            let pent = Pentagon::new(pt.bound.0 / 30.0, pt.bound.1 / 30.0, pt.bound.2 / 30.0);
            assert!(pent.contains(pt.r1, pt.r2, 1e-9));
        }
    }

    #[test]
    fn padding_only_expands() {
        let ch = adder();
        let base = SweepConfig {
            grid_resolution: 8,
            lambda_count: 9,
            u_cardinality: 1,
            padding: false,
        };
        let padded_cfg = SweepConfig {
            padding: true,
            ..base
        };
        let plain = outer_region(&ch, 100, 0.1, &base, BoundMode::NormalApprox).unwrap();
        let padded = outer_region(&ch, 100, 0.1, &padded_cfg, BoundMode::NormalApprox).unwrap();
        for (a, b) in plain.points.iter().zip(&padded.points) {
            let va = a.lambda * a.r1 + (1.0 - a.lambda) * a.r2;
            let vb = b.lambda * b.r1 + (1.0 - b.lambda) * b.r2;
            assert!(vb >= va - 1e-12);
        }
    }
}
