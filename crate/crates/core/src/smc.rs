//! Sliding function, full-state sliding-mode control law and the derived
//! reaching-time bound.

use nalgebra::{DVector, RowDVector};

use crate::error::{Error, Result};
use crate::plant::PlantModel;
use crate::scalar::{as_f64, lit, Real};

/// Threshold under which `Gamma * B` counts as numerically singular.
const GAMMA_B_MIN: f64 = 1e-12;

/// Sliding surface description: the row vector `Gamma` and the reaching
/// gains.
///
/// `k2 = 0` is admitted (pure exponential reaching, no switching term);
/// finite-time reaching requires `k2 > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingSpec<T> {
    /// Sliding row vector, `1 x (2n + 2)` in design-model coordinates.
    pub gamma: RowDVector<T>,
    /// Proportional reaching gain (`> 0`).
    pub k1: T,
    /// Switching gain (`>= 0`).
    pub k2: T,
    /// Cached scalar `Gamma * B` of the design model.
    pub gamma_b: T,
}

impl<T: Real> SlidingSpec<T> {
    /// Validates gains and the invertibility of `Gamma * B` against the
    /// design plant.
    pub fn new(gamma: RowDVector<T>, k1: T, k2: T, design: &PlantModel<T>) -> Result<Self> {
        if gamma.len() != design.dim() {
            return Err(Error::DimensionMismatch {
                context: "sliding row vector",
                expected: design.dim(),
                got: gamma.len(),
            });
        }
        let k1_ok = crate::scalar::is_finite(k1) && k1 > T::zero();
        if !k1_ok {
            return Err(Error::InvalidParameter {
                field: "k1",
                message: format!("must be > 0, got {}", as_f64(k1)),
            });
        }
        let k2_ok = crate::scalar::is_finite(k2) && k2 >= T::zero();
        if !k2_ok {
            return Err(Error::InvalidParameter {
                field: "k2",
                message: format!("must be >= 0, got {}", as_f64(k2)),
            });
        }
        let gamma_b = (&gamma * &design.b)[(0, 0)];
        if gamma_b.abs() < lit(GAMMA_B_MIN) {
            return Err(Error::SingularGammaB {
                value: as_f64(gamma_b.abs()),
            });
        }
        Ok(Self {
            gamma,
            k1,
            k2,
            gamma_b,
        })
    }
}

/// Reference the controller regulates or tracks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceSignal<T> {
    /// Constant setpoint for the hub angle.
    Regulation { theta_d: T },
    /// Smooth rest-to-rest trajectory
    /// `theta_d(t) = exp(-t/2) sin t + 1 - exp(-t/2)`.
    Tracking,
}

impl<T: Real> ReferenceSignal<T> {
    pub fn theta_d(&self, t: T) -> T {
        match *self {
            ReferenceSignal::Regulation { theta_d } => theta_d,
            ReferenceSignal::Tracking => {
                let decay = (-t * lit::<T>(0.5)).exp();
                decay * t.sin() + T::one() - decay
            }
        }
    }

    pub fn theta_d_rate(&self, t: T) -> T {
        match *self {
            ReferenceSignal::Regulation { .. } => T::zero(),
            ReferenceSignal::Tracking => {
                let decay = (-t * lit::<T>(0.5)).exp();
                decay * (t.cos() - lit::<T>(0.5) * t.sin() + lit(0.5))
            }
        }
    }

    pub fn theta_d_accel(&self, t: T) -> T {
        match *self {
            ReferenceSignal::Regulation { .. } => T::zero(),
            ReferenceSignal::Tracking => {
                let decay = (-t * lit::<T>(0.5)).exp();
                decay * (-t.cos() - lit::<T>(0.75) * t.sin() - lit(0.25))
            }
        }
    }

    /// Desired state and its derivative for an `n`-mode model. The desired
    /// modal amplitudes and rates are zero (vibration suppression), so
    /// `x_d = [theta_d, 0.., dtheta_d, 0..]` and
    /// `dx_d = [dtheta_d, 0.., ddtheta_d, 0..]`.
    pub fn desired_state(&self, t: T, n: usize) -> (DVector<T>, DVector<T>) {
        let dim = 2 * n + 2;
        let mut x_d = DVector::zeros(dim);
        let mut dx_d = DVector::zeros(dim);
        x_d[0] = self.theta_d(t);
        x_d[n + 1] = self.theta_d_rate(t);
        dx_d[0] = self.theta_d_rate(t);
        dx_d[n + 1] = self.theta_d_accel(t);
        (x_d, dx_d)
    }
}

/// Sliding function `sigma = Gamma (x - x_d)`.
pub fn sliding_value<T: Real>(
    x: &DVector<T>,
    x_d: &DVector<T>,
    gamma: &RowDVector<T>,
) -> Result<T> {
    if x.len() != gamma.len() || x_d.len() != gamma.len() {
        return Err(Error::DimensionMismatch {
            context: "sliding value",
            expected: gamma.len(),
            got: if x.len() != gamma.len() {
                x.len()
            } else {
                x_d.len()
            },
        });
    }
    Ok((gamma * (x - x_d))[(0, 0)])
}

/// Switching term: `sgn` with `sgn(0) = 0`, or the saturation of width
/// `epsilon` when a boundary layer is configured.
pub fn switching<T: Real>(sigma: T, boundary_layer: Option<T>) -> T {
    match boundary_layer {
        Some(eps) if eps > T::zero() => (sigma / eps).clamp(-T::one(), T::one()),
        _ => {
            if sigma > T::zero() {
                T::one()
            } else if sigma < T::zero() {
                -T::one()
            } else {
                T::zero()
            }
        }
    }
}

/// Full-state control law in its nominal + discontinuous grouping:
///
/// `u = (Gamma B)^-1 [-Gamma A x + Gamma dx_d]
///      - (Gamma B)^-1 [k1 sigma + k2 sw(sigma)]`.
pub fn control_full_state<T: Real>(
    spec: &SlidingSpec<T>,
    plant: &PlantModel<T>,
    x: &DVector<T>,
    x_d: &DVector<T>,
    dx_d: &DVector<T>,
    boundary_layer: Option<T>,
) -> Result<T> {
    let sigma = sliding_value(x, x_d, &spec.gamma)?;
    let inv = T::one() / spec.gamma_b;
    let gamma_ax = (&spec.gamma * (&plant.a * x))[(0, 0)];
    let gamma_dxd = (&spec.gamma * dx_d)[(0, 0)];
    let u_nom = inv * (-gamma_ax + gamma_dxd);
    let u_disc = inv * (spec.k1 * sigma + spec.k2 * switching(sigma, boundary_layer));
    Ok(u_nom - u_disc)
}

/// The same control law regrouped into state-feedback, switching and
/// reference-feedforward terms:
///
/// `u = -(Gamma B)^-1 [Gamma A + k1 Gamma] x
///      - (Gamma B)^-1 k2 sw(Gamma x - Gamma x_d)
///      + (Gamma B)^-1 [Gamma dx_d + k1 Gamma x_d]`.
///
/// Agrees with [`control_full_state`] to rounding on any input; both forms
/// are kept as independent evaluation paths.
pub fn control_full_state_expanded<T: Real>(
    spec: &SlidingSpec<T>,
    plant: &PlantModel<T>,
    x: &DVector<T>,
    x_d: &DVector<T>,
    dx_d: &DVector<T>,
    boundary_layer: Option<T>,
) -> Result<T> {
    if x.len() != spec.gamma.len() || x_d.len() != spec.gamma.len() {
        return Err(Error::DimensionMismatch {
            context: "expanded control law",
            expected: spec.gamma.len(),
            got: x.len(),
        });
    }
    let inv = T::one() / spec.gamma_b;
    let gamma_a = &spec.gamma * &plant.a;
    let feedback = -inv * ((&gamma_a * x)[(0, 0)] + spec.k1 * (&spec.gamma * x)[(0, 0)]);
    let sigma = (&spec.gamma * x)[(0, 0)] - (&spec.gamma * x_d)[(0, 0)];
    let switch = -inv * spec.k2 * switching(sigma, boundary_layer);
    let feedforward = inv * ((&spec.gamma * dx_d)[(0, 0)] + spec.k1 * (&spec.gamma * x_d)[(0, 0)]);
    Ok(feedback + switch + feedforward)
}

/// Control law fed by the functional-observer output `g_hat`:
///
/// `u = [1 0] g_hat
///      - (Gamma B)^-1 k2 sw([0 1] g_hat - Gamma x_d)
///      + (Gamma B)^-1 [Gamma dx_d + k1 Gamma x_d]`.
///
/// The first component of `g_hat` estimates the state-feedback row, the
/// second estimates `Gamma x`, so the switching argument is the
/// observer-implied sliding value.
pub fn control_observer_fed<T: Real>(
    spec: &SlidingSpec<T>,
    g_hat: &nalgebra::Vector2<T>,
    x_d: &DVector<T>,
    dx_d: &DVector<T>,
    boundary_layer: Option<T>,
) -> Result<T> {
    if x_d.len() != spec.gamma.len() || dx_d.len() != spec.gamma.len() {
        return Err(Error::DimensionMismatch {
            context: "observer-fed control law",
            expected: spec.gamma.len(),
            got: x_d.len(),
        });
    }
    let inv = T::one() / spec.gamma_b;
    let gamma_xd = (&spec.gamma * x_d)[(0, 0)];
    let sigma_obs = g_hat[1] - gamma_xd;
    let switch = -inv * spec.k2 * switching(sigma_obs, boundary_layer);
    let feedforward = inv * ((&spec.gamma * dx_d)[(0, 0)] + spec.k1 * gamma_xd);
    Ok(g_hat[0] + switch + feedforward)
}

/// Upper bound on the reaching time of the sliding phase.
///
/// Integrating `dV/dt <= -a1 V - a2 V^(1/2)` with `V = sigma^2 / 2` through
/// the substitution `W = V^(1/2)` gives
/// `t_r = (2 / a1) ln(1 + a1 W0 / a2)` with `W0 = |sigma0| / sqrt(2)`,
/// `a1 = 2 k1` and `a2 = sqrt(2) k2` (the switching term contributes
/// `-k2 |sigma| = -sqrt(2) k2 V^(1/2)`).
///
/// Returns zero when already on the surface and infinity when `k2 = 0`
/// (exponential decay alone never reaches it exactly).
pub fn reaching_time_bound<T: Real>(sigma0: T, k1: T, k2: T) -> T {
    if sigma0 == T::zero() {
        return T::zero();
    }
    if k2 <= T::zero() {
        return lit(f64::INFINITY);
    }
    let a1 = lit::<T>(2.0) * k1;
    let a2 = lit::<T>(2.0).sqrt() * k2;
    let w0 = sigma0.abs() / lit::<T>(2.0).sqrt();
    lit::<T>(2.0) / a1 * (T::one() + a1 * w0 / a2).ln()
}
