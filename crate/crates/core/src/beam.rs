//! Physical description of the flexible link.

use crate::error::{Error, Result};
use crate::scalar::{as_f64, lit, Real};

/// Physical constants of the link, hub and payload.
///
/// The total inertia seen by the hub is a derived quantity, see
/// [`BeamParams::total_inertia`]; it is recomputed on demand and never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParams<T> {
    /// Linear mass density (kg/m).
    pub rho: T,
    /// Link length (m).
    pub length: T,
    /// Flexural rigidity E*I (N m^2).
    pub ei: T,
    /// Hub (motor) inertia (kg m^2).
    pub hub_inertia: T,
    /// Payload mass (kg).
    pub payload_mass: T,
    /// Payload rotary inertia (kg m^2).
    pub payload_inertia: T,
    /// Modal damping ratio applied uniformly to every flexible mode.
    pub damping_ratio: T,
}

impl<T: Real> BeamParams<T> {
    /// Validates the physical domain and builds the parameter set.
    pub fn new(
        rho: T,
        length: T,
        ei: T,
        hub_inertia: T,
        payload_mass: T,
        payload_inertia: T,
        damping_ratio: T,
    ) -> Result<Self> {
        let params = Self {
            rho,
            length,
            ei,
            hub_inertia,
            payload_mass,
            payload_inertia,
            damping_ratio,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks every invariant, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let strictly_positive: [(&'static str, T); 3] =
            [("rho", self.rho), ("length", self.length), ("ei", self.ei)];
        for (field, value) in strictly_positive {
            let ok = crate::scalar::is_finite(value) && value > T::zero();
            if !ok {
                return Err(Error::InvalidParameter {
                    field,
                    message: format!("must be > 0 and finite, got {}", as_f64(value)),
                });
            }
        }
        let non_negative: [(&'static str, T); 4] = [
            ("hub_inertia", self.hub_inertia),
            ("payload_mass", self.payload_mass),
            ("payload_inertia", self.payload_inertia),
            ("damping_ratio", self.damping_ratio),
        ];
        for (field, value) in non_negative {
            let ok = crate::scalar::is_finite(value) && value >= T::zero();
            if !ok {
                return Err(Error::InvalidParameter {
                    field,
                    message: format!("must be >= 0 and finite, got {}", as_f64(value)),
                });
            }
        }
        Ok(())
    }

    /// Total inertia about the hub:
    /// `J = J0 + rho * l^3 / 3 + Jp + mp * l^2`.
    pub fn total_inertia(&self) -> T {
        let l = self.length;
        self.hub_inertia
            + self.rho * l * l * l / lit(3.0)
            + self.payload_inertia
            + self.payload_mass * l * l
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> BeamParams<f64> {
        BeamParams::new(0.5, 1.0, 1.0, 0.002, 0.0, 0.0, 0.05).unwrap()
    }

    #[test]
    fn total_inertia_matches_closed_form() {
        let p = base();
        assert_eq!(p.total_inertia(), 0.002 + 0.5 / 3.0);

        let loaded = BeamParams::new(2.0, 3.0, 1.0, 0.1, 0.4, 0.2, 0.0).unwrap();
        assert_eq!(
            loaded.total_inertia(),
            0.1 + 2.0 * 27.0 / 3.0 + 0.2 + 0.4 * 9.0
        );
    }

    #[test]
    fn rejects_nonpositive_density() {
        let err = BeamParams::new(0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0).unwrap_err();
        match err {
            Error::InvalidParameter { field, .. } => assert_eq!(field, "rho"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_damping() {
        let err = BeamParams::new(0.5, 1.0, 1.0, 0.002, 0.0, 0.0, -0.1).unwrap_err();
        match err {
            Error::InvalidParameter { field, .. } => assert_eq!(field, "damping_ratio"),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
