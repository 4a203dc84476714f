//! Regularity of a rotational cusp `{r < ρ(z)}` at its tip through the series
//! `Σ_j 1 / |ln ρ(q^j)|`: the tip is singular exactly when the series converges.

use serde::{Deserialize, Serialize};

use crate::contour::log_radius_at;
use crate::error::{Error, Result};
use crate::potential::PotentialField;
use crate::series::{classify_tail, TailFit, Verdict};

/// Cusp profiles `ρ(z)`, evaluated through `ln ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    /// `ρ = z^{−ln z} = e^{−(ln z)²}`.
    SquaredLog,
    /// `ρ = (−ln z)^{ln z}`.
    LogLog,
    /// `ρ = z^exponent`.
    Power { exponent: f64 },
    /// Radius of the level curve `V = level` of the uniform rod, near its lower tip.
    LebesgueContour { level: f64 },
    /// `(z, ln ρ)` samples, interpolated linearly in `(ln z, ln |ln ρ|)`.
    Tabulated { samples: Vec<(f64, f64)> },
}

impl Profile {
    pub fn name(&self) -> String {
        match self {
            Profile::SquaredLog => "squared-log".into(),
            Profile::LogLog => "log-log".into(),
            Profile::Power { exponent } => format!("power-{exponent}"),
            Profile::LebesgueContour { level } => format!("lebesgue-contour-{level}"),
            Profile::Tabulated { .. } => "tabulated".into(),
        }
    }

    /// `ln ρ(z)` for `z > 0`.
    pub fn log_radius(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::Domain(format!("profile evaluated at z = {z}")));
        }
        let lz = z.ln();
        match self {
            Profile::SquaredLog => Ok(-lz * lz),
            Profile::LogLog => {
                if lz >= 0.0 {
                    return Err(Error::Domain(format!("(−ln z)^(ln z) needs z < 1, got {z}")));
                }
                Ok(lz * (-lz).ln())
            }
            Profile::Power { exponent } => Ok(exponent * lz),
            Profile::LebesgueContour { level } => log_radius_at(&PotentialField::<f64>::lebesgue(), *level, z),
            Profile::Tabulated { samples } => interpolate_log_log(samples, z),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Profile::Power { exponent } if !(*exponent > 0.0 && exponent.is_finite()) => {
                Err(Error::Input(format!("power profile needs a positive exponent, got {exponent}")))
            }
            Profile::LebesgueContour { level } if !(*level > 1.0) => {
                Err(Error::Input(format!("only levels above V(0,0) = 1 have a cusp, got {level}")))
            }
            Profile::Tabulated { samples } => {
                if samples.len() < 2 {
                    return Err(Error::Input("tabulated profile needs at least two samples".into()));
                }
                if samples.iter().any(|&(z, lr)| !(z > 0.0) || !(lr < 0.0) || !z.is_finite() || !lr.is_finite()) {
                    return Err(Error::Input("tabulated profile needs z > 0 and ln r < 0 at every sample".into()));
                }
                if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::Input("tabulated profile samples must increase in z".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn interpolate_log_log(samples: &[(f64, f64)], z: f64) -> Result<f64> {
    let (first, last) = (samples[0].0, samples[samples.len() - 1].0);
    if z < first || z > last {
        return Err(Error::Domain(format!("z = {z} is outside the tabulated range [{first}, {last}]")));
    }
    let k = samples.partition_point(|s| s.0 <= z).clamp(1, samples.len() - 1);
    let ((z0, l0), (z1, l1)) = (samples[k - 1], samples[k]);
    let (x0, x1) = (z0.ln(), z1.ln());
    let (y0, y1) = ((-l0).ln(), (-l1).ln());
    let w = if x1 > x0 { (z.ln() - x0) / (x1 - x0) } else { 0.0 };
    Ok(-(y0 + w * (y1 - y0)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regularity {
    /// The series converges.
    Singular,
    /// The series diverges.
    Regular,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct WienerReport {
    pub profile: String,
    pub q: f64,
    pub j0: usize,
    pub j_max: usize,
    /// `1 / |ln ρ(q^j)|` for `j0 <= j <= j_max`.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub fit: Option<TailFit>,
    pub classification: Regularity,
    pub notes: Vec<String>,
}

/// Default number of terms past `j0`.
pub const DEFAULT_TERMS: usize = 200;

/// First index with `q^j <= e^{-2}`, past which all built-in profiles are below 1.
pub fn default_j0(q: f64) -> usize {
    (2.0 / q.ln().abs()).ceil().max(1.0) as usize
}

/// Terms and partial sums of `Σ 1/|ln ρ(q^j)|`, classified.
pub fn log_series(profile: &Profile, q: f64, j0: usize, j_max: usize) -> Result<WienerReport> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Input(format!("q must lie in (0, 1), got {q}")));
    }
    if j_max < j0 {
        return Err(Error::Input(format!("empty index range {j0}..={j_max}")));
    }
    profile.validate()?;
    let mut terms = Vec::with_capacity(j_max - j0 + 1);
    for j in j0..=j_max {
        let z = q.powi(j as i32);
        let lr = profile.log_radius(z)?;
        if !(lr < 0.0) {
            return Err(Error::Domain(format!("profile radius {} at z = q^{j} = {z} is not below 1", lr.exp())));
        }
        terms.push(1.0 / lr.abs());
    }
    let partial_sums: Vec<f64> = terms
        .iter()
        .scan(0.0, |s, t| {
            *s += t;
            Some(*s)
        })
        .collect();
    let mut report = WienerReport {
        profile: profile.name(),
        q,
        j0,
        j_max,
        terms,
        partial_sums,
        fit: None,
        classification: Regularity::Inconclusive,
        notes: Vec::new(),
    };
    report.classification = classify(&mut report);
    Ok(report)
}

/// Classifies from the tail of the terms, indexed by `x = j |ln q|`.
pub fn classify(report: &mut WienerReport) -> Regularity {
    let step = report.q.ln().abs();
    let x: Vec<f64> = (report.j0..=report.j_max).map(|j| j as f64 * step).collect();
    report.fit = classify_tail(&x, &report.terms);
    report.notes.clear();
    if let Some(fit) = &report.fit {
        let tail = &report.terms[report.terms.len() - fit.tail_len..];
        let ratio = tail[tail.len() - 1] / tail[tail.len() - 2];
        report.notes.push(format!("last term ratio {ratio:.6}"));
        report.notes.push(format!("tail model {:?} with rms {:.3e} over {} terms", fit.model, fit.rms, fit.tail_len));
    } else {
        report.notes.push(format!("fewer than {} usable terms", crate::series::MIN_TERMS));
    }
    match report.fit.as_ref().map(|f| f.verdict) {
        Some(Verdict::Convergent) => Regularity::Singular,
        Some(Verdict::Divergent) => Regularity::Regular,
        _ => Regularity::Inconclusive,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(p: &Profile, q: f64) -> WienerReport {
        let j0 = default_j0(q);
        log_series(p, q, j0, j0 + DEFAULT_TERMS).unwrap()
    }

    #[test]
    fn squared_log_terms_are_p_series() {
        let r = log_series(&Profile::SquaredLog, 0.5, 1, 40).unwrap();
        let l2 = 2f64.ln();
        for (k, t) in r.terms.iter().enumerate() {
            let j = (k + 1) as f64;
            assert!((t * j * j * l2 * l2 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn textbook_profiles_for_several_q() {
        for q in [0.3, 0.5, 0.7] {
            assert_eq!(report(&Profile::SquaredLog, q).classification, Regularity::Singular, "q {q}");
            assert_eq!(report(&Profile::LogLog, q).classification, Regularity::Regular, "q {q}");
            assert_eq!(report(&Profile::Power { exponent: 3.0 }, q).classification, Regularity::Regular, "q {q}");
        }
    }

    #[test]
    fn lebesgue_tip_is_singular() {
        for q in [0.3, 0.5, 0.7] {
            let r = report(&Profile::LebesgueContour { level: 2.0 }, q);
            assert_eq!(r.classification, Regularity::Singular, "q {q}: {:?}", r.fit);
        }
    }

    #[test]
    fn partial_sums_increase() {
        let r = report(&Profile::LogLog, 0.5);
        assert!(r.partial_sums.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn radius_above_one_is_refused() {
        assert!(matches!(log_series(&Profile::LogLog, 0.7, 1, 30), Err(Error::Domain(_))));
        assert!(matches!(log_series(&Profile::SquaredLog, 1.5, 1, 30), Err(Error::Input(_))));
    }

    #[test]
    fn tabulated_power_law_matches_closed_form() {
        let samples: Vec<(f64, f64)> = (0..200)
            .rev()
            .map(|k| {
                let z = 0.9f64.powi(k);
                (z, -0.5 / z)
            })
            .collect();
        let p = Profile::Tabulated { samples };
        for z in [0.5, 0.01, 1e-5] {
            assert!((p.log_radius(z).unwrap() * z + 0.5).abs() < 1e-10);
        }
        assert!(matches!(p.log_radius(1e-20), Err(Error::Domain(_))));
    }
}
