//! Shared numeric helpers: compensated summation, log-domain folding,
//! and the tolerances used when canonicalizing discrete laws.

/// Absolute tolerance for merging atoms and for atom-inclusive threshold
/// comparisons. Atom values are sums of logs and carry rounding noise.
pub const ATOM_TOL: f64 = 1e-12;

/// Tolerance on probability sums of internally computed tables.
pub const SUM_TOL: f64 = 1e-12;

/// Tolerance on probability sums of user-supplied inputs, which may carry
/// rounded decimals.
pub const INPUT_SUM_TOL: f64 = 1e-9;

/// Variances at or below this are treated as exactly zero (constant density).
pub const VAR_FLOOR: f64 = 1e-15;

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice.
pub fn stable_sum(xs: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// log(Σ e^{x_i}) with max-shift; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add((x - m).exp());
    }
    m + acc.value().ln()
}

/// ln Γ(x) (delegates to the C-library port).
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// ln C(n, k) via log-gamma.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}
