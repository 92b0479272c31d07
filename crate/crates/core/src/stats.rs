//! Small statistical helpers: order-stable summation, moment estimators
//! with block-aware standard errors, and a chi-square tail probability.
//!
//! All reductions here are deterministic given their input contents, so
//! results do not depend on how many workers produced the inputs.

/// Pairwise (cascade) summation.
///
/// Bounded rounding error growth O(log n) and a fixed association order,
/// so the result is reproducible for a given input vector regardless of
/// how the vector itself was assembled.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Arithmetic mean via pairwise summation. Empty input yields 0.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        pairwise_sum(values) / values.len() as f64
    }
}

/// Mean and standard error of the mean for i.i.d. samples.
///
/// Returns `(mean, stderr)`; stderr is 0 for fewer than two samples.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let m = mean(values);
    if n < 2 {
        return (m, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (m, (var / n as f64).sqrt())
}

/// Empirical moments of one sample set: value and standard error per order.
#[derive(Debug, Clone)]
pub struct EmpiricalMoments {
    /// Moment orders, ascending.
    pub orders: Vec<u32>,
    /// Estimated ⟨I^q⟩ per order.
    pub values: Vec<f64>,
    /// Standard error per order.
    pub stderrs: Vec<f64>,
}

impl EmpiricalMoments {
    /// Moments of i.i.d. samples with the usual √n standard error.
    pub fn from_iid(samples: &[f64], orders: &[u32]) -> Self {
        Self::from_blocked(samples, orders, 1)
    }

    /// Moments of serially correlated samples.
    ///
    /// The stderr comes from non-overlapping block means with the given
    /// block length (in samples); choose the block longer than the
    /// correlation time. A trailing partial block is discarded.
    pub fn from_blocked(samples: &[f64], orders: &[u32], block_len: usize) -> Self {
        let block_len = block_len.max(1);
        let mut values = Vec::with_capacity(orders.len());
        let mut stderrs = Vec::with_capacity(orders.len());
        for &q in orders {
            let powers: Vec<f64> = samples.iter().map(|&s| s.powi(q as i32)).collect();
            let value = mean(&powers);
            let n_blocks = powers.len() / block_len;
            let stderr = if n_blocks >= 2 {
                let block_means: Vec<f64> = (0..n_blocks)
                    .map(|b| mean(&powers[b * block_len..(b + 1) * block_len]))
                    .collect();
                let (_, se_of_block_mean) = mean_stderr(&block_means);
                se_of_block_mean
            } else {
                mean_stderr(&powers).1
            };
            values.push(value);
            stderrs.push(stderr);
        }
        EmpiricalMoments {
            orders: orders.to_vec(),
            values,
            stderrs,
        }
    }

    /// Largest |z| score between two moment tables over shared orders.
    ///
    /// z pools both standard errors in quadrature.
    pub fn max_z_against(&self, other: &EmpiricalMoments) -> f64 {
        assert_eq!(self.orders, other.orders, "moment tables must share orders");
        let mut worst: f64 = 0.0;
        for i in 0..self.orders.len() {
            let pooled = (self.stderrs[i].powi(2) + other.stderrs[i].powi(2)).sqrt();
            let z = if pooled > 0.0 {
                (self.values[i] - other.values[i]).abs() / pooled
            } else if self.values[i] == other.values[i] {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        }
        worst
    }
}

/// Regularized lower incomplete gamma P(a, x) by series (x < a+1).
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = a;
    for _ in 0..500 {
        n += 1.0;
        term *= x / n;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction (x ≥ a+1).
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Natural log of the gamma function (Lanczos, g=7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Survival function of the chi-square distribution with `dof` degrees of
/// freedom: P(X ≥ x).
pub fn chi2_sf(x: f64, dof: usize) -> f64 {
    assert!(x >= 0.0 && dof > 0, "chi2_sf needs x >= 0 and dof > 0");
    let a = dof as f64 / 2.0;
    let x2 = x / 2.0;
    if x2 == 0.0 {
        return 1.0;
    }
    if x2 < a + 1.0 {
        (1.0 - gamma_p_series(a, x2)).clamp(0.0, 1.0)
    } else {
        gamma_q_cf(a, x2).clamp(0.0, 1.0)
    }
}
