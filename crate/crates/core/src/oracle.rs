//! Dense joint-Gaussian oracle for short series.
//!
//! Builds the full quadratic form over the hidden path `X0[0..T-1]`, with a
//! flat prior on `X0[0]`, and integrates it out with dense linear algebra.
//! Cost is O(T³), so this is only meant for checking the fast paths.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};
use crate::model::{LogSeries, ModelParams};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone)]
pub struct DenseOracle {
    /// Marginal log-likelihood of the observed path.
    pub log_marginal: f64,
    /// Posterior mode (and mean) of the hidden path.
    pub mode: Vec<f64>,
}

pub fn dense_posterior(series: &LogSeries, params: &ModelParams) -> Result<DenseOracle> {
    params.validate()?;
    let x = series.values();
    let t_len = x.len();
    if t_len > 2000 {
        return Err(Error::Usage(format!(
            "dense oracle limited to 2000 points, got {t_len}"
        )));
    }
    let dt = series.dt();
    let kap = params.k * dt;
    if kap == 0.0 {
        return Err(Error::Degenerate("dense oracle needs k > 0".into()));
    }
    let (s, sp, rho) = (params.sigma, params.sigma_prime, params.rho);
    let sig = Matrix2::new(s * s, rho * s * sp, rho * s * sp, sp * sp) * dt;
    let w = sig
        .try_inverse()
        .ok_or_else(|| Error::Numeric("singular step covariance".into()))?;
    let m0 = params.hidden_drift() * dt;
    let ito = 0.5 * sp * sp * dt;
    let n = t_len - 1;

    // Residual of step t: [X0[t+1] - X0[t] - m0, X[t+1] - X[t] + κ(X[t] - X0[t]) + ito].
    let mut h = DMatrix::<f64>::zeros(t_len, t_len);
    let mut b = DVector::<f64>::zeros(t_len);
    let mut cwc = 0.0;
    for t in 0..n {
        let c = nalgebra::Vector2::new(-m0, x[t + 1] - x[t] + kap * x[t] + ito);
        // Coefficients of X0[t] and X0[t+1] in the residual.
        let a_t = nalgebra::Vector2::new(-1.0, -kap);
        let a_n = nalgebra::Vector2::new(1.0, 0.0);
        let wa_t = w * a_t;
        let wa_n = w * a_n;
        h[(t, t)] += a_t.dot(&wa_t);
        h[(t, t + 1)] += a_t.dot(&wa_n);
        h[(t + 1, t)] += a_n.dot(&wa_t);
        h[(t + 1, t + 1)] += a_n.dot(&wa_n);
        b[t] += c.dot(&wa_t);
        b[t + 1] += c.dot(&wa_n);
        cwc += c.dot(&(w * c));
    }
    let chol = h
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Degenerate("posterior precision not positive definite".into()))?;
    let sol = chol.solve(&b);
    let logdet_h: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let logdet_sig = sig.determinant().ln();

    let ll = -(n as f64) * LN_2PI - 0.5 * n as f64 * logdet_sig - 0.5 * (cwc - b.dot(&sol))
        + 0.5 * t_len as f64 * LN_2PI
        - 0.5 * logdet_h;
    Ok(DenseOracle {
        log_marginal: ll,
        mode: sol.iter().map(|v| -v).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::kalman::kalman_log_likelihood;
    use crate::model::simulate;
    use approx::assert_abs_diff_eq;

    #[test]
    fn matches_kalman() {
        for (seed, rho) in [(1u64, 0.0), (2, 0.5), (3, -0.7)] {
            let p = ModelParams::new(0.05, 0.1, 0.2, 0.002, rho).unwrap();
            let sim = simulate(&p, 16, seed, 0.0, 0.0).unwrap();
            let d = dense_posterior(&sim.observed, &p).unwrap();
            let k = kalman_log_likelihood(&sim.observed, &p).unwrap();
            assert_abs_diff_eq!(d.log_marginal, k, epsilon = 1e-9);
        }
    }
}
