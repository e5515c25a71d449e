//! Small statistics helpers shared by tests, acquisition and estimation.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Outcome of a chi-square test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    fn from_statistic(statistic: f64, dof: usize) -> Self {
        let p_value = if statistic.is_infinite() {
            0.0
        } else if dof == 0 {
            1.0
        } else {
            ChiSquared::new(dof as f64)
                .map(|d| d.sf(statistic))
                .unwrap_or(0.0)
        };
        Self {
            statistic,
            dof,
            p_value,
        }
    }

    /// True unless the null hypothesis is rejected at `significance`.
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value >= significance
    }
}

/// Goodness of fit of `counts` against `probabilities`; cells with zero
/// expectation are skipped.
pub fn chi_square_gof(counts: &[u64], probabilities: &[f64]) -> ChiSquareTest {
    let total: u64 = counts.iter().sum();
    let n = total as f64;
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (&c, &p) in counts.iter().zip(probabilities) {
        let expected = n * p;
        if expected > 0.0 {
            statistic += (c as f64 - expected).powi(2) / expected;
            cells += 1;
        } else if c > 0 {
            statistic = f64::INFINITY;
        }
    }
    ChiSquareTest::from_statistic(statistic, cells.saturating_sub(1))
}

/// Two-sample homogeneity test on a 2×K contingency table.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> ChiSquareTest {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let total = (na + nb) as f64;
    if na == 0 || nb == 0 {
        return ChiSquareTest::from_statistic(0.0, 0);
    }
    let mut statistic = 0.0;
    let mut columns = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        columns += 1;
        let ea = col * na as f64 / total;
        let eb = col * nb as f64 / total;
        statistic += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    ChiSquareTest::from_statistic(statistic, columns.saturating_sub(1))
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (`n − 1` denominator).
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}
