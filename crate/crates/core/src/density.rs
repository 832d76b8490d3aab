//! Per-letter information densities and their moments.
//!
//! For a joint atom `(u, x1, x2, y)` the three densities are
//!
//! ```text
//! d1  = ln W(y|x1,x2) / P(y|x2,u)     (rate-1 constraint)
//! d2  = ln W(y|x1,x2) / P(y|x1,u)     (rate-2 constraint)
//! d12 = ln W(y|x1,x2) / P(y|u)        (sum-rate constraint)
//! ```
//!
//! Means are conditional mutual informations, variances the dispersions,
//! and third absolute central moments feed the Berry-Esseen certificate.

use crate::channel::{induced_laws, DmMac, InputPair, TimeSharedInput};
use crate::error::Result;
use crate::numeric::KahanSum;

/// Which of the three densities to marginalize or take moments of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    Rate1,
    Rate2,
    SumRate,
}

impl DensityKind {
    pub const ALL: [DensityKind; 3] = [
        DensityKind::Rate1,
        DensityKind::Rate2,
        DensityKind::SumRate,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DensityKind::Rate1 => "d1",
            DensityKind::Rate2 => "d2",
            DensityKind::SumRate => "d12",
        }
    }
}

/// One support point of the joint per-letter law, with its density values.
#[derive(Debug, Clone, Copy)]
pub struct Atom {
    pub x1: usize,
    pub x2: usize,
    pub y: usize,
    pub u: usize,
    pub prob: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
}

impl Atom {
    #[inline]
    pub fn density(&self, kind: DensityKind) -> f64 {
        match kind {
            DensityKind::Rate1 => self.d1,
            DensityKind::Rate2 => self.d2,
            DensityKind::SumRate => self.d12,
        }
    }
}

/// Joint law of the three densities; only atoms with positive probability
/// are stored, so every stored density value is finite.
#[derive(Debug, Clone)]
pub struct DensityTable {
    atoms: Vec<Atom>,
}

impl DensityTable {
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_prob(&self) -> f64 {
        let mut s = KahanSum::new();
        for a in &self.atoms {
            s.add(a.prob);
        }
        s.value()
    }
}

/// First three moments of a density: mean (mutual information, nats),
/// variance (dispersion, nats²), and third absolute central moment (nats³).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub third_abs_central: f64,
}

/// Density table for a product input (no time sharing; `u = 0` throughout).
pub fn density_table(channel: &DmMac, inputs: &InputPair) -> Result<DensityTable> {
    let ts = TimeSharedInput::single(inputs.clone());
    time_shared_density_table(channel, &ts)
}

/// Density table under time sharing. Atom probabilities are
/// `w(u) p1ᵘ(x1) p2ᵘ(x2) W(y|x1,x2)` and the density denominators are the
/// u-conditional laws, so moments taken over this table include the
/// between-component spread.
pub fn time_shared_density_table(channel: &DmMac, ts: &TimeSharedInput) -> Result<DensityTable> {
    let mut atoms = Vec::new();
    for (u, (weight, inputs)) in ts.weights().iter().zip(ts.components()).enumerate() {
        let laws = induced_laws(channel, inputs)?;
        if *weight == 0.0 {
            continue;
        }
        for x1 in 0..channel.x1_size() {
            for x2 in 0..channel.x2_size() {
                for y in 0..channel.y_size() {
                    let w = channel.w(x1, x2, y);
                    let prob = weight * inputs.p1()[x1] * inputs.p2()[x2] * w;
                    if prob <= 0.0 {
                        continue;
                    }
                    // prob > 0 forces every denominator > 0.
                    atoms.push(Atom {
                        x1,
                        x2,
                        y,
                        u,
                        prob,
                        d1: (w / laws.p_y_given_x2[x2][y]).ln(),
                        d2: (w / laws.p_y_given_x1[x1][y]).ln(),
                        d12: (w / laws.p_y[y]).ln(),
                    });
                }
            }
        }
    }
    Ok(DensityTable { atoms })
}

/// Exact weighted moments of one density over the table.
pub fn moments(table: &DensityTable, kind: DensityKind) -> Moments {
    let mut mean = KahanSum::new();
    for a in table.atoms() {
        mean.add(a.prob * a.density(kind));
    }
    let mean = mean.value();
    let mut var = KahanSum::new();
    let mut third = KahanSum::new();
    for a in table.atoms() {
        let c = a.density(kind) - mean;
        var.add(a.prob * c * c);
        third.add(a.prob * c.abs().powi(3));
    }
    Moments {
        mean,
        variance: var.value(),
        third_abs_central: third.value(),
    }
}
