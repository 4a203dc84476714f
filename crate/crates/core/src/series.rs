//! Heuristic convergence classification of positive series from a finite tail.
//!
//! Terms are indexed by a scale variable `x` that grows linearly with the term
//! index (for a dyadic series `x = j |ln q|`). Three tail models are fitted by
//! least squares and the best one decides:
//!
//! * exponential `t ~ C e^{-λx}`: convergent when the tail decays by more than a factor `e`;
//! * power `t ~ C x^{-p}`: convergent for `p > 1.1`, divergent for `p <= 1.02`;
//! * Bertrand `t ~ C / (x (ln x)^s)`: divergent for `s <= 1.02`, convergent for `s >= 1.2`.
//!
//! Anything else is reported as inconclusive.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum TailModel {
    Exponential { rate: f64 },
    Power { exponent: f64 },
    Bertrand { exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailFit {
    pub verdict: Verdict,
    pub model: TailModel,
    /// RMS residual of the chosen fit in log space.
    pub rms: f64,
    /// RMS residuals of (exponential, power, Bertrand) fits.
    pub candidates: [f64; 3],
    pub tail_len: usize,
}

/// Minimum number of terms accepted by [`classify_tail`].
pub const MIN_TERMS: usize = 20;

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    (slope, intercept, rms)
}

/// Classifies the series `Σ terms[k]` whose k-th term sits at scale `x[k]`.
///
/// Returns `None` when fewer than [`MIN_TERMS`] usable (positive, finite) terms are given.
pub fn classify_tail(x: &[f64], terms: &[f64]) -> Option<TailFit> {
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(terms)
        .filter(|(x, t)| x.is_finite() && t.is_finite() && **t > 0.0 && **x > 0.0)
        .map(|(x, t)| (*x, *t))
        .collect();
    if pairs.len() < MIN_TERMS {
        return None;
    }
    let start = pairs.len() / 2;
    let tail: Vec<(f64, f64)> = pairs[start..].iter().copied().filter(|(x, _)| *x > std::f64::consts::E).collect();
    if tail.len() < MIN_TERMS / 2 {
        return None;
    }
    let xs: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let ln_t: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
    let ln_x: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ln_ln_x: Vec<f64> = ln_x.iter().map(|l| l.ln()).collect();
    let ln_tx: Vec<f64> = ln_t.iter().zip(&ln_x).map(|(a, b)| a + b).collect();

    let (e_slope, _, e_rms) = linear_fit(&xs, &ln_t);
    let (p_slope, _, p_rms) = linear_fit(&ln_x, &ln_t);
    let (b_slope, _, b_rms) = linear_fit(&ln_ln_x, &ln_tx);
    let span = xs.last().unwrap() - xs.first().unwrap();

    // Ties within rounding noise go to the model listed first (power before Bertrand),
    // which agrees with Bertrand for s = 0 anyway.
    let noise = 1e-9;
    let best = if e_rms + noise < p_rms.min(b_rms) {
        0
    } else if p_rms <= b_rms + noise {
        1
    } else {
        2
    };
    let (model, verdict, rms) = match best {
        0 => {
            let rate = -e_slope;
            let verdict = if rate * span > 1.0 {
                Verdict::Convergent
            } else if rate <= 0.0 {
                Verdict::Divergent
            } else {
                Verdict::Inconclusive
            };
            (TailModel::Exponential { rate }, verdict, e_rms)
        }
        1 => {
            let exponent = -p_slope;
            let verdict = if exponent > 1.1 {
                Verdict::Convergent
            } else if exponent <= 1.02 {
                Verdict::Divergent
            } else {
                Verdict::Inconclusive
            };
            (TailModel::Power { exponent }, verdict, p_rms)
        }
        _ => {
            let exponent = -b_slope;
            let verdict = if exponent <= 1.02 {
                Verdict::Divergent
            } else if exponent >= 1.2 {
                Verdict::Convergent
            } else {
                Verdict::Inconclusive
            };
            (TailModel::Bertrand { exponent }, verdict, b_rms)
        }
    };
    Some(TailFit { verdict, model, rms, candidates: [e_rms, p_rms, b_rms], tail_len: tail.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(f: impl Fn(f64) -> f64) -> TailFit {
        let x: Vec<f64> = (1..=60).map(|j| j as f64 * 0.5f64.ln().abs()).collect();
        let t: Vec<f64> = x.iter().map(|&x| f(x)).collect();
        classify_tail(&x, &t).unwrap()
    }

    #[test]
    fn p_series_converges() {
        let fit = run(|x| 1.0 / (x * x));
        assert_eq!(fit.verdict, Verdict::Convergent);
        assert!(matches!(fit.model, TailModel::Power { exponent } if (exponent - 2.0).abs() < 1e-9));
    }

    #[test]
    fn harmonic_and_bertrand_diverge() {
        assert_eq!(run(|x| 1.0 / (3.0 * x)).verdict, Verdict::Divergent);
        let fit = run(|x| 1.0 / (x * x.ln()));
        assert_eq!(fit.verdict, Verdict::Divergent);
        assert!(matches!(fit.model, TailModel::Bertrand { .. }));
    }

    #[test]
    fn geometric_converges() {
        let fit = run(|x| 0.7 * (-x).exp());
        assert_eq!(fit.verdict, Verdict::Convergent);
        assert!(matches!(fit.model, TailModel::Exponential { rate } if (rate - 1.0).abs() < 1e-9));
    }

    #[test]
    fn too_few_terms() {
        assert!(classify_tail(&[1.0, 2.0], &[1.0, 0.5]).is_none());
    }
}
