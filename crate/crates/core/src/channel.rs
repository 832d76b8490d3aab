//! DM-MAC channel model: transition kernels, input distributions, and the
//! output laws they induce.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::numeric::{stable_sum, INPUT_SUM_TOL, SUM_TOL};

/// A two-user discrete memoryless multiple access channel: finite input
/// alphabets of sizes `x1_size` and `x2_size`, output alphabet of size
/// `y_size`, and per-letter kernel `W(y | x1, x2)`.
///
/// Immutable after construction; every row of the kernel is validated to
/// be a probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DmMac {
    x1_size: usize,
    x2_size: usize,
    y_size: usize,
    /// Flat kernel, indexed `[x1][x2][y]` row-major.
    w: Vec<f64>,
}

#[derive(Deserialize)]
struct ChannelFile {
    x1_size: usize,
    x2_size: usize,
    y_size: usize,
    w: Vec<Vec<Vec<f64>>>,
}

impl DmMac {
    /// Builds a channel from a nested kernel `w[x1][x2][y]`, validating
    /// dimensions, entry ranges, and row sums (1e-9 input tolerance).
    pub fn new(
        x1_size: usize,
        x2_size: usize,
        y_size: usize,
        w: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if x1_size == 0 || x2_size == 0 || y_size == 0 {
            return Err(Error::InvalidParameter(
                "alphabet sizes must be positive".into(),
            ));
        }
        if w.len() != x1_size {
            return Err(Error::DimensionMismatch(format!(
                "w has {} x1 rows, expected {}",
                w.len(),
                x1_size
            )));
        }
        let mut flat = Vec::with_capacity(x1_size * x2_size * y_size);
        for (x1, block) in w.iter().enumerate() {
            if block.len() != x2_size {
                return Err(Error::DimensionMismatch(format!(
                    "w[{}] has {} x2 rows, expected {}",
                    x1,
                    block.len(),
                    x2_size
                )));
            }
            for (x2, row) in block.iter().enumerate() {
                if row.len() != y_size {
                    return Err(Error::DimensionMismatch(format!(
                        "w[{}][{}] has {} outputs, expected {}",
                        x1,
                        x2,
                        row.len(),
                        y_size
                    )));
                }
                for (y, &v) in row.iter().enumerate() {
                    if !v.is_finite() || v < 0.0 || v > 1.0 {
                        return Err(Error::BadEntry { x1, x2, y, value: v });
                    }
                }
                let sum = stable_sum(row);
                if (sum - 1.0).abs() > INPUT_SUM_TOL {
                    return Err(Error::RowSum { x1, x2, sum });
                }
                flat.extend_from_slice(row);
            }
        }
        Ok(Self {
            x1_size,
            x2_size,
            y_size,
            w: flat,
        })
    }

    /// Parses the JSON channel document
    /// `{"x1_size":..,"x2_size":..,"y_size":..,"w":[[[..]]]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(file.x1_size, file.x2_size, file.y_size, file.w)
    }

    pub fn x1_size(&self) -> usize {
        self.x1_size
    }

    pub fn x2_size(&self) -> usize {
        self.x2_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    /// Kernel entry `W(y | x1, x2)`.
    #[inline]
    pub fn w(&self, x1: usize, x2: usize, y: usize) -> f64 {
        self.w[(x1 * self.x2_size + x2) * self.y_size + y]
    }
}

/// A pair of independent per-letter input distributions `(p1, p2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputPair {
    p1: Vec<f64>,
    p2: Vec<f64>,
}

fn validate_pmf(p: &[f64], name: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution(format!("{name} is empty")));
    }
    if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "{name} has a negative or non-finite entry"
        )));
    }
    let sum = stable_sum(p);
    if (sum - 1.0).abs() > INPUT_SUM_TOL {
        return Err(Error::InvalidDistribution(format!(
            "{name} sums to {sum:.12}, expected 1"
        )));
    }
    Ok(())
}

impl InputPair {
    pub fn new(p1: Vec<f64>, p2: Vec<f64>) -> Result<Self> {
        validate_pmf(&p1, "p1")?;
        validate_pmf(&p2, "p2")?;
        Ok(Self { p1, p2 })
    }

    /// Uniform inputs matching the channel's alphabets.
    pub fn uniform(channel: &DmMac) -> Self {
        Self {
            p1: vec![1.0 / channel.x1_size() as f64; channel.x1_size()],
            p2: vec![1.0 / channel.x2_size() as f64; channel.x2_size()],
        }
    }

    pub fn p1(&self) -> &[f64] {
        &self.p1
    }

    pub fn p2(&self) -> &[f64] {
        &self.p2
    }

    fn check_dims(&self, channel: &DmMac) -> Result<()> {
        if self.p1.len() != channel.x1_size() || self.p2.len() != channel.x2_size() {
            return Err(Error::DimensionMismatch(format!(
                "inputs ({}, {}) do not match channel alphabets ({}, {})",
                self.p1.len(),
                self.p2.len(),
                channel.x1_size(),
                channel.x2_size()
            )));
        }
        Ok(())
    }
}

/// A time-shared input: a distribution over at most three `InputPair`
/// components, one per value of the auxiliary variable `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSharedInput {
    weights: Vec<f64>,
    components: Vec<InputPair>,
}

impl TimeSharedInput {
    pub fn new(weights: Vec<f64>, components: Vec<InputPair>) -> Result<Self> {
        if weights.len() != components.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        if weights.is_empty() || weights.len() > 3 {
            return Err(Error::InvalidParameter(
                "time-sharing alphabet must have 1 to 3 values".into(),
            ));
        }
        validate_pmf(&weights, "time-sharing weights")?;
        Ok(Self {
            weights,
            components,
        })
    }

    /// Wraps a single input pair as the degenerate |U| = 1 case.
    pub fn single(inputs: InputPair) -> Self {
        Self {
            weights: vec![1.0],
            components: vec![inputs],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[InputPair] {
        &self.components
    }
}

/// Output laws induced by a channel and a product input: `P(y|x2)`,
/// `P(y|x1)`, `P(y)`, and the joint `p1(x1) p2(x2) W(y|x1,x2)`.
///
/// These are the denominators of the three information densities.
#[derive(Debug, Clone)]
pub struct InducedLaws {
    /// `p_y_given_x2[x2][y]`
    pub p_y_given_x2: Vec<Vec<f64>>,
    /// `p_y_given_x1[x1][y]`
    pub p_y_given_x1: Vec<Vec<f64>>,
    pub p_y: Vec<f64>,
    /// Flat joint indexed `[x1][x2][y]`, same layout as the kernel.
    pub joint: Vec<f64>,
}

/// Computes all four induced laws by exact summation.
pub fn induced_laws(channel: &DmMac, inputs: &InputPair) -> Result<InducedLaws> {
    inputs.check_dims(channel)?;
    let (nx1, nx2, ny) = (channel.x1_size(), channel.x2_size(), channel.y_size());
    let p1 = inputs.p1();
    let p2 = inputs.p2();

    let mut p_y_given_x2 = vec![vec![0.0; ny]; nx2];
    for x2 in 0..nx2 {
        for y in 0..ny {
            let terms: Vec<f64> = (0..nx1).map(|x1| p1[x1] * channel.w(x1, x2, y)).collect();
            p_y_given_x2[x2][y] = stable_sum(&terms);
        }
    }
    let mut p_y_given_x1 = vec![vec![0.0; ny]; nx1];
    for x1 in 0..nx1 {
        for y in 0..ny {
            let terms: Vec<f64> = (0..nx2).map(|x2| p2[x2] * channel.w(x1, x2, y)).collect();
            p_y_given_x1[x1][y] = stable_sum(&terms);
        }
    }
    let mut p_y = vec![0.0; ny];
    for y in 0..ny {
        let terms: Vec<f64> = (0..nx2).map(|x2| p2[x2] * p_y_given_x2[x2][y]).collect();
        p_y[y] = stable_sum(&terms);
    }
    let mut joint = vec![0.0; nx1 * nx2 * ny];
    for x1 in 0..nx1 {
        for x2 in 0..nx2 {
            for y in 0..ny {
                joint[(x1 * nx2 + x2) * ny + y] = p1[x1] * p2[x2] * channel.w(x1, x2, y);
            }
        }
    }

    let laws = InducedLaws {
        p_y_given_x2,
        p_y_given_x1,
        p_y,
        joint,
    };
    debug_assert!((stable_sum(&laws.p_y) - 1.0).abs() < SUM_TOL);
    debug_assert!((stable_sum(&laws.joint) - 1.0).abs() < SUM_TOL);
    Ok(laws)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 2x2x3 noiseless adder: y = x1 + x2.
    pub(crate) fn adder() -> DmMac {
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
    fn parse_adder_kernel() {
        let text = r#"{"x1_size":2,"x2_size":2,"y_size":3,
            "w":[[[1,0,0],[0,1,0]],[[0,1,0],[0,0,1]]]}"#;
        let ch = DmMac::from_json(text).unwrap();
        assert_eq!(ch, adder());
        assert_eq!(ch.w(1, 0, 1), 1.0);
    }

    #[test]
    fn parse_rejects_bad_row_sum() {
        let text = r#"{"x1_size":1,"x2_size":1,"y_size":2,"w":[[[0.5,0.4]]]}"#;
        let err = DmMac::from_json(text).unwrap_err();
        match err {
            Error::RowSum { x1: 0, x2: 0, sum } => assert!((sum - 0.9).abs() < 1e-12),
            other => panic!("expected RowSum, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_negative_entry() {
        let text = r#"{"x1_size":1,"x2_size":1,"y_size":2,"w":[[[0.5,-0.1]]]}"#;
        assert!(matches!(
            DmMac::from_json(text).unwrap_err(),
            Error::BadEntry { y: 1, .. }
        ));
    }

    #[test]
    fn parse_rejects_malformed_syntax() {
        assert!(matches!(
            DmMac::from_json("{not json").unwrap_err(),
            Error::Parse(_)
        ));
    }

    #[test]
    fn adder_uniform_output_law() {
        let ch = adder();
        let laws = induced_laws(&ch, &InputPair::uniform(&ch)).unwrap();
        let expect = [0.25, 0.5, 0.25];
        for (a, b) in laws.p_y.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn single_output_channel_is_trivial() {
        let ch = DmMac::new(2, 1, 1, vec![vec![vec![1.0]], vec![vec![1.0]]]).unwrap();
        let laws = induced_laws(&ch, &InputPair::uniform(&ch)).unwrap();
        assert_eq!(laws.p_y, vec![1.0]);
    }

    #[test]
    fn point_mass_input_reduces_to_kernel_row() {
        let ch = adder();
        let inputs = InputPair::new(vec![1.0, 0.0], vec![0.5, 0.5]).unwrap();
        let laws = induced_laws(&ch, &inputs).unwrap();
        for x2 in 0..2 {
            for y in 0..3 {
                assert!((laws.p_y_given_x2[x2][y] - ch.w(0, x2, y)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn output_law_consistent_with_conditionals() {
        let ch = adder();
        let inputs = InputPair::new(vec![0.3, 0.7], vec![0.6, 0.4]).unwrap();
        let laws = induced_laws(&ch, &inputs).unwrap();
        for y in 0..3 {
            let mix: f64 = (0..2)
                .map(|x2| inputs.p2()[x2] * laws.p_y_given_x2[x2][y])
                .sum();
            assert!((laws.p_y[y] - mix).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ch = adder();
        let inputs = InputPair::new(vec![0.5, 0.5], vec![1.0]).unwrap();
        assert!(matches!(
            induced_laws(&ch, &inputs),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn time_shared_input_validation() {
        let ch = adder();
        let u = InputPair::uniform(&ch);
        assert!(TimeSharedInput::new(vec![0.5, 0.5], vec![u.clone(), u.clone()]).is_ok());
        assert!(TimeSharedInput::new(vec![0.5, 0.6], vec![u.clone(), u.clone()]).is_err());
        assert!(TimeSharedInput::new(
            vec![0.25; 4],
            vec![u.clone(), u.clone(), u.clone(), u]
        )
        .is_err());
    }
}
