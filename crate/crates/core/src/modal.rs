//! Spatial eigenstructure of the flexible link.
//!
//! The free vibration of the link separates into spatial shapes
//! `phi(x) = a sin(bx) + b cos(bx) + c sinh(bx) + d cosh(bx)` whose spatial
//! frequencies `beta` are roots of a transcendental characteristic equation.
//! This module finds those roots by a conditioned scan + bisection, solves the
//! 4x4 boundary-condition system for the shape coefficients, and normalizes
//! the result.

use nalgebra::DMatrix;

use crate::beam::BeamParams;
use crate::error::{Error, Result};
use crate::scalar::{as_f64, is_finite, lit, Real};

/// Scaling convention applied to a mode shape.
///
/// Closed-loop behavior does not depend on the convention (input and output
/// maps transform consistently), but the individual shape values do, so every
/// [`ModeShape`] records the convention it was built with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Mean-square amplitude one: `integral of rho * phi^2 over the link = rho * l`.
    /// The sign is fixed by `phi'(0) > 0`.
    MeanSquare,
    /// Unit slope at the hub: `phi'(0) = 1`.
    UnitHubSlope,
    /// Unit tip deflection: `phi(l) = 1`.
    UnitTip,
    /// Values rescaled to the bundled reference data sheet (see `fixture`).
    Catalog,
}

impl Normalization {
    /// Stable identifier used in CSV output and config files.
    pub fn tag(self) -> &'static str {
        match self {
            Normalization::MeanSquare => "mean-square",
            Normalization::UnitHubSlope => "unit-hub-slope",
            Normalization::UnitTip => "unit-tip",
            Normalization::Catalog => "catalog",
        }
    }
}

/// One spatial vibration mode of the link.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeShape<T> {
    /// Spatial frequency (1/m), a root of the characteristic equation.
    pub beta: T,
    /// Natural frequency (rad/s), `omega = beta^2 sqrt(EI / rho)`.
    pub omega: T,
    /// Coefficients `[a, b, c, d]` of
    /// `phi(x) = a sin(beta x) + b cos(beta x) + c sinh(beta x) + d cosh(beta x)`.
    pub coeffs: [T; 4],
    /// Shape slope at the hub, `phi'(0)`; enters the input map.
    pub hub_slope: T,
    /// Shape value at the tip, `phi(l)`; enters the tip-angle output.
    pub tip_value: T,
    /// Scaling convention the coefficients satisfy.
    pub normalization: Normalization,
}

impl<T: Real> ModeShape<T> {
    /// Evaluates the `order`-th spatial derivative of the shape (order 0..=3).
    pub fn eval_deriv(&self, x: T, order: usize) -> T {
        let [a, b, c, d] = self.coeffs;
        let bx = self.beta * x;
        let (s, co) = (bx.sin(), bx.cos());
        let (sh, ch) = (bx.sinh(), bx.cosh());
        let scale = self.beta.powi(order as i32);
        let combo = match order {
            0 => a * s + b * co + c * sh + d * ch,
            1 => a * co - b * s + c * ch + d * sh,
            2 => -a * s - b * co + c * sh + d * ch,
            3 => -a * co + b * s + c * ch + d * sh,
            _ => panic!("mode shape derivatives supported up to order 3"),
        };
        scale * combo
    }

    /// Shape value `phi(x)`.
    pub fn eval(&self, x: T) -> T {
        self.eval_deriv(x, 0)
    }

    /// Multiplies all shape data by `factor` and retags the convention.
    pub(crate) fn rescale(&mut self, factor: T, tag: Normalization) {
        for c in &mut self.coeffs {
            *c *= factor;
        }
        self.hub_slope *= factor;
        self.tip_value *= factor;
        self.normalization = tag;
    }
}

/// The retained spatial modes of a link, ordered by ascending `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalData<T> {
    pub params: BeamParams<T>,
    pub modes: Vec<ModeShape<T>>,
}

impl<T: Real> ModalData<T> {
    /// Runs the full modal analysis: root search and shape extraction for the
    /// first `n` modes.
    pub fn compute(params: &BeamParams<T>, n: usize, normalization: Normalization) -> Result<Self> {
        let betas = find_beta_roots(params, n)?;
        let modes = betas
            .into_iter()
            .map(|beta| find_mode_shape(beta, params, normalization))
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(*params, modes)
    }

    /// Builds modal data from preexisting modes, enforcing the ordering
    /// invariant.
    pub fn from_parts(params: BeamParams<T>, modes: Vec<ModeShape<T>>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidParameter {
                field: "modes",
                message: "at least one mode is required".into(),
            });
        }
        let mut prev = T::zero();
        for mode in &modes {
            let ascending = crate::scalar::is_finite(mode.beta) && mode.beta > prev;
            if !ascending {
                return Err(Error::InvalidParameter {
                    field: "modes",
                    message: format!(
                        "spatial frequencies must be strictly increasing and positive, got {}",
                        as_f64(mode.beta)
                    ),
                });
            }
            prev = mode.beta;
        }
        Ok(Self { params, modes })
    }

    /// Number of retained modes.
    pub fn n(&self) -> usize {
        self.modes.len()
    }
}

/// Natural frequency of the mode with spatial frequency `beta`:
/// `omega = beta^2 sqrt(EI / rho)`.
pub fn natural_frequency<T: Real>(beta: T, params: &BeamParams<T>) -> T {
    beta * beta * (params.ei / params.rho).sqrt()
}

/// Left-hand side of the characteristic equation, exactly as printed in the
/// classical hub-beam-payload derivation.
///
/// Total on `beta > 0`. Where `cosh`/`sinh` overflow the result is +/-
/// infinity with the sign taken from the conditioned residual; it is never a
/// silent NaN.
pub fn char_eq_residual<T: Real>(beta: T, params: &BeamParams<T>) -> T {
    let x = beta * params.length;
    let (s, co) = (x.sin(), x.cos());
    let (sh, ch) = (x.sinh(), x.cosh());
    let rho = params.rho;
    let j0 = params.hub_inertia;
    let jp = params.payload_inertia;
    let mp = params.payload_mass;

    let b3 = beta.powi(3);
    let b4 = beta.powi(4);
    let b6 = beta.powi(6);
    let b7 = beta.powi(7);

    let raw = (co * sh - s * ch)
        - lit::<T>(2.0) * mp / rho * beta * s * sh
        - lit::<T>(2.0) * jp / rho * b3 * co * ch
        - j0 / rho * b3 * (T::one() + co * ch)
        - mp / (rho * rho) * (j0 + jp) * b4 * (co * sh - s * ch)
        + j0 * jp / (rho * rho) * b6 * (co * sh + s * ch)
        - j0 * jp * mp / (rho * rho * rho) * b7 * (T::one() - co * ch);

    if is_finite(raw) || raw.abs() == lit(f64::INFINITY) {
        raw
    } else {
        // inf - inf inside the raw form; recover the sign from the
        // overflow-free conditioned residual.
        char_eq_residual_scaled(beta, params).signum() * lit(f64::INFINITY)
    }
}

/// Characteristic residual rescaled by `cosh(beta l) * max(1, beta^7)`.
///
/// Shares the sign changes of [`char_eq_residual`] but stays finite for any
/// `beta`, which makes it safe to bracket and bisect.
pub fn char_eq_residual_scaled<T: Real>(beta: T, params: &BeamParams<T>) -> T {
    let x = beta * params.length;
    let (s, co) = (x.sin(), x.cos());
    let th = x.tanh();
    // 1 / cosh underflows to zero for large arguments, which is exact enough.
    let sech = {
        let ch = x.cosh();
        if is_finite(ch) {
            T::one() / ch
        } else {
            T::zero()
        }
    };
    let rho = params.rho;
    let j0 = params.hub_inertia;
    let jp = params.payload_inertia;
    let mp = params.payload_mass;

    let b3 = beta.powi(3);
    let b4 = beta.powi(4);
    let b6 = beta.powi(6);
    let b7 = beta.powi(7);

    let sum = (co * th - s)
        - lit::<T>(2.0) * mp / rho * beta * s * th
        - lit::<T>(2.0) * jp / rho * b3 * co
        - j0 / rho * b3 * (sech + co)
        - mp / (rho * rho) * (j0 + jp) * b4 * (co * th - s)
        + j0 * jp / (rho * rho) * b6 * (co * th + s)
        - j0 * jp * mp / (rho * rho * rho) * b7 * (sech - co);

    sum / T::one().max(b7)
}

/// Lower end of the scan in `beta * l`; excludes the trivial root at zero
/// (the rigid-body rotation enters the model through the hub angle, not
/// through a shape).
const SCAN_LOWER_BL: f64 = 0.05;
/// Number of grid points per scan window.
const SCAN_POINTS: usize = 2000;
/// Hard cap on `beta * l`; past this the raw residual overflows even in f64.
const SCAN_CAP_BL: f64 = 350.0;

/// Finds the `n` smallest strictly positive roots of the characteristic
/// equation, ascending, each refined by bisection on the conditioned
/// residual to at least 1e-10 relative accuracy.
pub fn find_beta_roots<T: Real>(params: &BeamParams<T>, n: usize) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            field: "n",
            message: "at least one mode must be requested".into(),
        });
    }
    let l = params.length;
    let f = |beta: T| char_eq_residual_scaled(beta, params);

    let mut cap_bl = (std::f64::consts::PI * (n as f64 + 2.0)).max(20.0);
    loop {
        cap_bl = cap_bl.min(SCAN_CAP_BL);
        let mut roots = Vec::with_capacity(n);
        let lo = lit::<T>(SCAN_LOWER_BL) / l;
        let hi = lit::<T>(cap_bl) / l;
        let step = (hi - lo) / lit(SCAN_POINTS as f64);

        let mut a = lo;
        let mut fa = f(a);
        for k in 1..=SCAN_POINTS {
            let b = lo + step * lit(k as f64);
            let fb = f(b);
            if fa == T::zero() {
                roots.push(a);
            } else if fa * fb < T::zero() {
                roots.push(bisect(&f, a, b, fa));
            }
            a = b;
            fa = fb;
            if roots.len() == n {
                return Ok(roots);
            }
        }
        if cap_bl >= SCAN_CAP_BL {
            return Err(Error::RootSearchExhausted {
                found: roots.len(),
                requested: n,
                cap: cap_bl,
            });
        }
        cap_bl *= 2.0;
    }
}

/// Bisection on a bracketing interval; converges to a few ulps of the root.
fn bisect<T: Real>(f: &impl Fn(T) -> T, mut a: T, mut b: T, mut fa: T) -> T {
    let rel_tol = lit::<T>(1e-12).max(T::default_epsilon() * lit(4.0));
    for _ in 0..200 {
        let mid = (a + b) * lit(0.5);
        if (b - a).abs() <= rel_tol * mid.abs() {
            return mid;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if fa * fm < T::zero() {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    (a + b) * lit(0.5)
}

/// The 4x4 homogeneous boundary-condition system in the shape coefficients
/// `[a, b, c, d]`, rows scaled to unit max magnitude.
///
/// Rows encode, for a shape at spatial frequency `beta`:
/// hub pin `phi(0) = 0`; hub inertia `EI phi''(0) = -J0 omega^2 phi'(0)`;
/// payload inertia `EI phi''(l) = Jp omega^2 phi'(l)`; payload mass
/// `EI phi'''(l) = -mp omega^2 phi(l)`.
pub fn boundary_matrix<T: Real>(beta: T, params: &BeamParams<T>) -> DMatrix<T> {
    let x = beta * params.length;
    let (s, co) = (x.sin(), x.cos());
    let (sh, ch) = (x.sinh(), x.cosh());
    let rho = params.rho;
    let k_hub = params.hub_inertia / rho * beta.powi(3);
    let k_rot = params.payload_inertia / rho * beta.powi(3);
    let k_mass = params.payload_mass / rho * beta;

    let mut m = DMatrix::<T>::zeros(4, 4);
    let rows: [[T; 4]; 4] = [
        [T::zero(), T::one(), T::zero(), T::one()],
        [k_hub, -T::one(), k_hub, T::one()],
        [
            -s - k_rot * co,
            -co + k_rot * s,
            sh - k_rot * ch,
            ch - k_rot * sh,
        ],
        [
            -co + k_mass * s,
            s + k_mass * co,
            ch + k_mass * sh,
            sh + k_mass * ch,
        ],
    ];
    for (i, row) in rows.iter().enumerate() {
        let scale = row
            .iter()
            .map(|v| v.abs())
            .fold(T::zero(), |acc, v| acc.max(v));
        let inv = if scale > T::zero() {
            T::one() / scale
        } else {
            T::one()
        };
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = *v * inv;
        }
    }
    m
}

/// Relative singular-value threshold below which a direction counts as part
/// of the nullspace.
const NULLITY_TOL: f64 = 1e-5;

/// Solves the boundary system at a characteristic root and returns the
/// normalized mode shape.
///
/// `beta` must be a root of the characteristic equation to tolerance;
/// otherwise (or at a repeated root) the system's nullity differs from one
/// and the call fails with [`Error::DegenerateNullspace`].
pub fn find_mode_shape<T: Real>(
    beta: T,
    params: &BeamParams<T>,
    normalization: Normalization,
) -> Result<ModeShape<T>> {
    if normalization == Normalization::Catalog {
        return Err(Error::InvalidParameter {
            field: "normalization",
            message: "catalog scaling applies only to bundled data".into(),
        });
    }
    let m = boundary_matrix(beta, params);
    let svd = m.svd(false, true);
    let sv = &svd.singular_values;
    let v_t = svd.v_t.as_ref().expect("V^T requested");

    let s_max = sv.max();
    let nullity = sv
        .iter()
        .filter(|&&s| s <= s_max * lit(NULLITY_TOL))
        .count();
    if nullity != 1 {
        return Err(Error::DegenerateNullspace {
            beta: as_f64(beta),
            nullity,
        });
    }
    // Sorted descending, so the nullspace direction is the last row of V^T.
    let dir = v_t.row(3);
    let coeffs = [dir[0], dir[1], dir[2], dir[3]];

    let mut shape = ModeShape {
        beta,
        omega: natural_frequency(beta, params),
        coeffs,
        hub_slope: T::zero(),
        tip_value: T::zero(),
        normalization,
    };
    shape.hub_slope = shape.eval_deriv(T::zero(), 1);
    shape.tip_value = shape.eval(params.length);

    let factor = match normalization {
        Normalization::MeanSquare => {
            let norm_sq = shape_norm_sq(&shape.coeffs, beta, params.length);
            let magnitude = (params.length / norm_sq).sqrt();
            // Sign convention: positive slope at the hub.
            if shape.hub_slope < T::zero() {
                -magnitude
            } else {
                magnitude
            }
        }
        Normalization::UnitHubSlope => invert_anchor("hub_slope", shape.hub_slope)?,
        Normalization::UnitTip => invert_anchor("tip_value", shape.tip_value)?,
        Normalization::Catalog => unreachable!(),
    };
    shape.rescale(factor, normalization);
    Ok(shape)
}

fn invert_anchor<T: Real>(field: &'static str, value: T) -> Result<T> {
    if value.abs() <= lit(1e-300) {
        return Err(Error::InvalidParameter {
            field,
            message: "anchor value is zero; choose a different normalization".into(),
        });
    }
    Ok(T::one() / value)
}

/// Closed-form `integral of phi(x)^2 dx` over `[0, l]` from the sin/cos/
/// sinh/cosh primitives (no quadrature).
pub(crate) fn shape_norm_sq<T: Real>(coeffs: &[T; 4], beta: T, l: T) -> T {
    let x = beta * l;
    let (s, co) = (x.sin(), x.cos());
    let (sh, ch) = (x.sinh(), x.cosh());
    let half = lit::<T>(0.5);
    let two_beta = beta * lit(2.0);

    let i_ss = l * half - s * co / two_beta;
    let i_cc = l * half + s * co / two_beta;
    let i_shsh = sh * ch / two_beta - l * half;
    let i_chch = sh * ch / two_beta + l * half;
    let i_sc = s * s / two_beta;
    let i_shch = sh * sh / two_beta;
    let i_s_sh = (s * ch - co * sh) / two_beta;
    let i_s_ch = (s * sh - co * ch + T::one()) / two_beta;
    let i_c_sh = (co * ch + s * sh - T::one()) / two_beta;
    let i_c_ch = (s * ch + co * sh) / two_beta;

    let [a, b, c, d] = *coeffs;
    let two = lit::<T>(2.0);
    a * a * i_ss
        + b * b * i_cc
        + c * c * i_shsh
        + d * d * i_chch
        + two * (a * b * i_sc + c * d * i_shch)
        + two * (a * c * i_s_sh + a * d * i_s_ch + b * c * i_c_sh + b * d * i_c_ch)
}
