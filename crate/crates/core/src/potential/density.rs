use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{upper_bound, Real};

/// Shape of the mass density carried by the rod `{r = 0, 0 <= z <= L}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DensityKind<T> {
    /// `ρ(z) = z` on `[0, 1]`.
    Lebesgue,
    /// `ρ(z) = z^p`.
    Power { p: T },
    /// Piecewise-linear interpolation of `(z, ρ)` samples.
    Tabulated { samples: Vec<(T, T)> },
}

/// A validated density `ρ` on `[0, L]` with `ρ(0) = 0` and `ρ > 0` on `(0, L]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityProfile<T> {
    kind: DensityKind<T>,
    length: T,
    #[serde(skip)]
    knots: Vec<T>,
}

impl<T: Real> DensityProfile<T> {
    pub fn lebesgue() -> Self {
        Self { kind: DensityKind::Lebesgue, length: T::one(), knots: Vec::new() }
    }

    pub fn power(p: T, length: T) -> Result<Self> {
        if !(p > T::zero() && p.is_finite()) {
            return Err(Error::Input(format!("power density needs p > 0, got {p}")));
        }
        if !(length > T::zero() && length.is_finite()) {
            return Err(Error::Input(format!("rod length must be positive, got {length}")));
        }
        Ok(Self { kind: DensityKind::Power { p }, length, knots: Vec::new() })
    }

    /// Builds a tabulated profile. Samples must start at `(0, 0)`, have strictly
    /// increasing `z`, and positive density after the first sample; the last `z` is `L`.
    pub fn tabulated(samples: Vec<(T, T)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Input("tabulated density needs at least two samples".into()));
        }
        if samples[0] != (T::zero(), T::zero()) {
            return Err(Error::Input("tabulated density must start at (0, 0)".into()));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                return Err(Error::Input(format!("tabulated z values must be strictly increasing (sample {})", i + 1)));
            }
            if !(w[1].1 > T::zero()) || !w[1].1.is_finite() {
                return Err(Error::Input(format!(
                    "density must be positive on (0, L] (sample {} has {})",
                    i + 1,
                    w[1].1
                )));
            }
        }
        let length = samples.last().unwrap().0;
        let knots = samples.iter().map(|s| s.0).collect();
        Ok(Self { kind: DensityKind::Tabulated { samples }, length, knots })
    }

    pub fn kind(&self) -> &DensityKind<T> {
        &self.kind
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn is_lebesgue(&self) -> bool {
        matches!(self.kind, DensityKind::Lebesgue)
    }

    /// Interior sample abscissae of a tabulated profile (empty otherwise).
    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    /// `ρ(z)` for `z` in `[0, L]`.
    pub fn eval(&self, z: T) -> Result<T> {
        if !(z >= T::zero() && z <= self.length) {
            return Err(Error::Domain(format!("density evaluated at z = {z} outside [0, {}]", self.length)));
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: T) -> T {
        match &self.kind {
            DensityKind::Lebesgue => z,
            DensityKind::Power { p } => {
                if z <= T::zero() {
                    T::zero()
                } else {
                    z.powf(*p)
                }
            }
            DensityKind::Tabulated { samples } => {
                let i = upper_bound(&self.knots, &z);
                if i == 0 {
                    return samples[0].1;
                }
                if i >= samples.len() {
                    return samples[samples.len() - 1].1;
                }
                let (z0, r0) = samples[i - 1];
                let (z1, r1) = samples[i];
                r0 + (r1 - r0) * (z - z0) / (z1 - z0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lebesgue_values() {
        let d = DensityProfile::<f64>::lebesgue();
        assert_eq!(d.eval(0.5).unwrap(), 0.5);
        assert_eq!(d.eval(0.0).unwrap(), 0.0);
        assert!(matches!(d.eval(1.5), Err(Error::Domain(_))));
        assert!(matches!(d.eval(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn power_profile() {
        let d = DensityProfile::power(2.0, 1.0).unwrap();
        assert_eq!(d.eval(0.5).unwrap(), 0.25);
        assert!(DensityProfile::power(0.0, 1.0).is_err());
        assert!(DensityProfile::power(1.0, -1.0).is_err());
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let d = DensityProfile::tabulated(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(d.eval(0.25).unwrap(), 0.5);
        assert_eq!(d.eval(0.75).unwrap(), 1.5);
        assert_eq!(d.eval(1.0).unwrap(), 2.0);
        assert_eq!(d.length(), 1.0);
    }

    #[test]
    fn tabulated_validation() {
        assert!(DensityProfile::tabulated(vec![(0.0, 0.1), (1.0, 1.0)]).is_err());
        assert!(DensityProfile::tabulated(vec![(0.0, 0.0), (0.5, 0.0), (1.0, 1.0)]).is_err());
        assert!(DensityProfile::tabulated(vec![(0.0, 0.0), (0.5, 1.0), (0.5, 1.0)]).is_err());
    }
}
