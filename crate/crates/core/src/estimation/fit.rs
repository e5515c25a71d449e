//! Weighted least-squares fit of parity fringes
//! `P± = (1 ± V± cos(cθ̂ + δ)) / 2` with a shared phase offset `δ`.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::fisher::group_fi;

/// Two-sided 90% standard-normal quantile.
pub const Z_90: f64 = 1.644_853_626_951_472_2;

const MIN_POINTS: usize = 5;
const MAX_ITERATIONS: usize = 200;

/// One grid point of a fringe measurement.
///
/// `weight` multiplies both residuals; inverse variances give a
/// conventional weighted fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeSample {
    pub theta_hat: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub multiplier: f64,
    pub v_plus: f64,
    pub v_minus: f64,
    pub offset: f64,
    /// 90% half-widths from the covariance scaled by the reduced chi-square.
    pub v_plus_ci90: f64,
    pub v_minus_ci90: f64,
    pub offset_ci90: f64,
    pub chi_square: f64,
    pub dof: usize,
}

fn rms(a: f64, b: f64) -> f64 {
    ((a * a + b * b) / 2.0).sqrt()
}

impl FringeFit {
    /// `√((V₊² + V₋²)/2)`, the visibility used for FI curves.
    pub fn visibility(&self) -> f64 {
        rms(self.v_plus, self.v_minus)
    }

    pub fn predict(&self, theta_hat: f64) -> (f64, f64) {
        let c = (self.multiplier * theta_hat + self.offset).cos();
        ((1.0 + self.v_plus * c) / 2.0, (1.0 - self.v_minus * c) / 2.0)
    }

    fn fi_at(&self, visibility: f64, theta_hat: f64) -> f64 {
        let phase = self.multiplier * theta_hat + self.offset;
        self.multiplier * self.multiplier * group_fi(visibility.clamp(0.0, 1.0), phase)
    }

    /// Fitted FI curve at `theta_hat`.
    pub fn fi(&self, theta_hat: f64) -> f64 {
        self.fi_at(self.visibility(), theta_hat)
    }

    /// FI at the lower and upper ends of the 90% visibility band.
    pub fn fi_band(&self, theta_hat: f64) -> (f64, f64) {
        let lo = rms(
            (self.v_plus - self.v_plus_ci90).max(0.0),
            (self.v_minus - self.v_minus_ci90).max(0.0),
        );
        let hi = rms(
            (self.v_plus + self.v_plus_ci90).min(1.0),
            (self.v_minus + self.v_minus_ci90).min(1.0),
        );
        (self.fi_at(lo, theta_hat), self.fi_at(hi, theta_hat))
    }
}

struct Problem<'a> {
    samples: &'a [FringeSample],
    multiplier: f64,
}

impl Problem<'_> {
    /// Weighted chi-square, normal matrix `JᵀWJ` and gradient `JᵀWr` at `beta`.
    fn linearize(&self, beta: &Vector3<f64>) -> (f64, Matrix3<f64>, Vector3<f64>) {
        let (vp, vm, delta) = (beta[0], beta[1], beta[2]);
        let mut chi2 = 0.0;
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for s in self.samples {
            let phase = self.multiplier * s.theta_hat + delta;
            let (sn, c) = libm::sincos(phase);
            let rows = [
                (s.p_plus - (1.0 + vp * c) / 2.0, Vector3::new(c / 2.0, 0.0, -vp * sn / 2.0)),
                (s.p_minus - (1.0 - vm * c) / 2.0, Vector3::new(0.0, -c / 2.0, vm * sn / 2.0)),
            ];
            for (r, j) in rows {
                chi2 += s.weight * r * r;
                jtj += s.weight * j * j.transpose();
                jtr += s.weight * r * j;
            }
        }
        (chi2, jtj, jtr)
    }

    fn chi_square(&self, beta: &Vector3<f64>) -> f64 {
        self.linearize(beta).0
    }

    /// Linear least squares on `a cos(cθ) + b sin(cθ)` for both branches pooled.
    fn initial_guess(&self) -> Result<Vector3<f64>> {
        let mut ata = Matrix2::zeros();
        let mut aty = Vector2::zeros();
        for s in self.samples {
            let x = self.multiplier * s.theta_hat;
            let (sn, c) = libm::sincos(x);
            let row = Vector2::new(c, -sn);
            for y in [2.0 * s.p_plus - 1.0, 1.0 - 2.0 * s.p_minus] {
                ata += s.weight * row * row.transpose();
                aty += s.weight * y * row;
            }
        }
        let sol = ata
            .try_inverse()
            .ok_or_else(|| Error::DegenerateFit("grid does not constrain the fringe".into()))?
            * aty;
        // a = V cos δ, b = V sin δ  for  V cos(x + δ) = a cos x − b sin x
        let v = sol[0].hypot(sol[1]);
        let delta = sol[1].atan2(sol[0]);
        Ok(Vector3::new(v, v, delta))
    }
}

fn wrap_phase(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut y = x.rem_euclid(tau);
    if y > std::f64::consts::PI {
        y -= tau;
    }
    y
}

/// Fits `V₊`, `V₋` and a phase offset to sampled fringe probabilities.
pub fn fit_fringe(samples: &[FringeSample], multiplier: f64) -> Result<FringeFit> {
    if samples.len() < MIN_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_POINTS,
            got: samples.len(),
        });
    }
    if let Some(s) = samples
        .iter()
        .find(|s| !(s.weight.is_finite() && s.weight > 0.0))
    {
        return Err(Error::InvalidArgument(format!("non-positive weight {}", s.weight)));
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.theta_hat), hi.max(s.theta_hat))
        });
    if (hi - lo) * multiplier.abs() < std::f64::consts::PI {
        return Err(Error::DegenerateFit(format!(
            "grid spans {:.3} rad of fringe phase, need at least half a period",
            (hi - lo) * multiplier.abs()
        )));
    }

    let problem = Problem {
        samples,
        multiplier,
    };
    let mut beta = problem.initial_guess()?;
    let mut lambda = 1e-3;
    let (mut chi2, mut jtj, mut jtr) = problem.linearize(&beta);
    for _ in 0..MAX_ITERATIONS {
        let mut damped = jtj;
        for i in 0..3 {
            damped[(i, i)] *= 1.0 + lambda;
        }
        let Some(step) = damped.try_inverse().map(|inv| inv * jtr) else {
            return Err(Error::DegenerateFit("singular normal matrix".into()));
        };
        let candidate = beta + step;
        let next = problem.chi_square(&candidate);
        if next <= chi2 {
            let converged = step.norm() < 1e-13 || chi2 - next <= 1e-15 * chi2.max(1e-300);
            beta = candidate;
            (chi2, jtj, jtr) = problem.linearize(&beta);
            lambda = (lambda / 10.0).max(1e-12);
            if converged {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }

    if beta[0] < 0.0 && beta[1] < 0.0 {
        beta = Vector3::new(-beta[0], -beta[1], beta[2] + std::f64::consts::PI);
    }
    let inverse = jtj
        .try_inverse()
        .ok_or_else(|| Error::DegenerateFit("singular covariance".into()))?;
    let dof = 2 * samples.len() - 3;
    let scale = chi2 / dof as f64;
    let half = |i: usize| Z_90 * (scale * inverse[(i, i)]).max(0.0).sqrt();
    Ok(FringeFit {
        multiplier,
        v_plus: beta[0],
        v_minus: beta[1],
        offset: wrap_phase(beta[2]),
        v_plus_ci90: half(0),
        v_minus_ci90: half(1),
        offset_ci90: half(2),
        chi_square: chi2,
        dof,
    })
}
