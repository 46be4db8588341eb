//! Finite-dimensional modal dynamics and the state-space model.
//!
//! State packing is fixed project-wide: `x = [theta, p_1..p_n, dtheta,
//! dp_1..dp_n]`, positions first, velocities second. Every matrix in this
//! module is documented against that order.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::modal::ModalData;
use crate::scalar::{as_f64, lit, Real};

/// Convenience view over the packed state `[theta, p, dtheta, dp]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    data: DVector<T>,
    n: usize,
}

impl<T: Real> StateVector<T> {
    /// Wraps a packed vector, checking the `2n + 2` length.
    pub fn from_packed(data: DVector<T>, n: usize) -> Result<Self> {
        if data.len() != 2 * n + 2 {
            return Err(Error::DimensionMismatch {
                context: "state vector",
                expected: 2 * n + 2,
                got: data.len(),
            });
        }
        Ok(Self { data, n })
    }

    /// Builds the packed vector from its physical pieces.
    pub fn from_parts(theta: T, p: &[T], dtheta: T, dp: &[T]) -> Result<Self> {
        if p.len() != dp.len() {
            return Err(Error::DimensionMismatch {
                context: "modal velocity block",
                expected: p.len(),
                got: dp.len(),
            });
        }
        let n = p.len();
        let mut data = DVector::zeros(2 * n + 2);
        data[0] = theta;
        data.rows_mut(1, n).copy_from_slice(p);
        data[n + 1] = dtheta;
        data.rows_mut(n + 2, n).copy_from_slice(dp);
        Ok(Self { data, n })
    }

    pub fn theta(&self) -> T {
        self.data[0]
    }

    pub fn dtheta(&self) -> T {
        self.data[self.n + 1]
    }

    /// Amplitude of flexible mode `i` (zero-based).
    pub fn modal(&self, i: usize) -> T {
        self.data[1 + i]
    }

    /// Velocity of flexible mode `i` (zero-based).
    pub fn modal_rate(&self, i: usize) -> T {
        self.data[self.n + 2 + i]
    }

    pub fn as_vector(&self) -> &DVector<T> {
        &self.data
    }

    pub fn into_vector(self) -> DVector<T> {
        self.data
    }
}

/// Modal matrices and state-space realization for `n` retained modes.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel<T> {
    /// Retained mode count.
    pub n: usize,
    /// Generalized mass, `diag(J, 1, ..., 1)`, (n+1) x (n+1).
    pub mass: DMatrix<T>,
    /// Generalized damping, `diag(0, 2 zeta omega_i)`.
    pub damping: DMatrix<T>,
    /// Generalized stiffness, `diag(0, omega_i^2)`.
    pub stiffness: DMatrix<T>,
    /// Input distribution in modal coordinates, `[1; phi'(0)]`.
    pub input_gain: DVector<T>,
    /// State matrix, `[[0, I], [-M^-1 K, -M^-1 D]]`, (2n+2) x (2n+2).
    pub a: DMatrix<T>,
    /// Input matrix, `[0; M^-1 input_gain]`, (2n+2) x 1.
    pub b: DVector<T>,
    /// Output matrix; row 0 is the clamped joint angle, row 1 the tip angle.
    pub c: DMatrix<T>,
    /// Modal data the realization was assembled from.
    pub modal: ModalData<T>,
}

/// Assembles the generalized mass, damping, stiffness and input-gain blocks
/// from modal data.
pub fn assemble_modal_matrices<T: Real>(
    modal: &ModalData<T>,
) -> (DMatrix<T>, DMatrix<T>, DMatrix<T>, DVector<T>) {
    let n = modal.n();
    let zeta = modal.params.damping_ratio;
    let two = lit::<T>(2.0);

    let mut mass = DMatrix::identity(n + 1, n + 1);
    mass[(0, 0)] = modal.params.total_inertia();

    let mut damping = DMatrix::zeros(n + 1, n + 1);
    let mut stiffness = DMatrix::zeros(n + 1, n + 1);
    let mut input_gain = DVector::zeros(n + 1);
    input_gain[0] = T::one();
    for (i, mode) in modal.modes.iter().enumerate() {
        damping[(i + 1, i + 1)] = two * zeta * mode.omega;
        stiffness[(i + 1, i + 1)] = mode.omega * mode.omega;
        input_gain[i + 1] = mode.hub_slope;
    }
    (mass, damping, stiffness, input_gain)
}

/// Transforms the second-order modal form into the state-space realization
/// `(A, B, C)`.
///
/// Fails with [`Error::SingularMass`] if the (diagonal) mass matrix is not
/// invertible; valid beam parameters cannot trigger this, the guard catches
/// corrupted input.
pub fn to_state_space<T: Real>(
    mass: &DMatrix<T>,
    damping: &DMatrix<T>,
    stiffness: &DMatrix<T>,
    input_gain: &DVector<T>,
    modal: &ModalData<T>,
) -> Result<(DMatrix<T>, DVector<T>, DMatrix<T>)> {
    let n = modal.n();
    let dim = n + 1;
    let mut mass_inv = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let m_ii = mass[(i, i)];
        if m_ii.abs() <= lit(1e-300) {
            return Err(Error::SingularMass {
                index: i,
                value: as_f64(m_ii),
            });
        }
        mass_inv[(i, i)] = T::one() / m_ii;
    }

    let mut a = DMatrix::zeros(2 * dim, 2 * dim);
    a.view_mut((0, dim), (dim, dim))
        .copy_from(&DMatrix::identity(dim, dim));
    a.view_mut((dim, 0), (dim, dim))
        .copy_from(&(-(&mass_inv * stiffness)));
    a.view_mut((dim, dim), (dim, dim))
        .copy_from(&(-(&mass_inv * damping)));

    let mut b = DVector::zeros(2 * dim);
    b.rows_mut(dim, dim).copy_from(&(&mass_inv * input_gain));

    let mut c = DMatrix::zeros(2, 2 * dim);
    c[(0, 0)] = T::one();
    c[(1, 0)] = T::one();
    for (i, mode) in modal.modes.iter().enumerate() {
        c[(0, 1 + i)] = mode.hub_slope;
        c[(1, 1 + i)] = mode.tip_value / modal.params.length;
    }
    Ok((a, b, c))
}

impl<T: Real> PlantModel<T> {
    /// Builds the full realization from modal data.
    pub fn from_modal(modal: ModalData<T>) -> Result<Self> {
        let (mass, damping, stiffness, input_gain) = assemble_modal_matrices(&modal);
        let (a, b, c) = to_state_space(&mass, &damping, &stiffness, &input_gain, &modal)?;
        Ok(Self {
            n: modal.n(),
            mass,
            damping,
            stiffness,
            input_gain,
            a,
            b,
            c,
            modal,
        })
    }

    /// State dimension `2n + 2`.
    pub fn dim(&self) -> usize {
        2 * self.n + 2
    }

    /// Measured outputs `(theta_c, theta_t)` evaluated directly from the
    /// modal sums (an independent path from `C * x`).
    pub fn measure(&self, x: &DVector<T>) -> Result<(T, T)> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "measure",
                expected: self.dim(),
                got: x.len(),
            });
        }
        let theta = x[0];
        let mut theta_c = theta;
        let mut theta_t = theta;
        for (i, mode) in self.modal.modes.iter().enumerate() {
            let p_i = x[1 + i];
            theta_c += mode.hub_slope * p_i;
            theta_t += mode.tip_value / self.modal.params.length * p_i;
        }
        Ok((theta_c, theta_t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::BeamParams;
    use crate::modal::{ModalData, Normalization};
    use nalgebra::Complex;

    fn reference_beam() -> BeamParams<f64> {
        BeamParams::new(0.5, 1.0, 1.0, 0.002, 0.0, 0.0, 0.05).unwrap()
    }

    fn modal(n: usize, zeta: f64) -> ModalData<f64> {
        let mut params = reference_beam();
        params.damping_ratio = zeta;
        ModalData::compute(&params, n, Normalization::MeanSquare).unwrap()
    }

    #[test]
    fn mass_matrix_carries_total_inertia() {
        let modal = modal(1, 0.05);
        let (mass, ..) = assemble_modal_matrices(&modal);
        assert_eq!(mass.nrows(), 2);
        assert!((mass[(0, 0)] - (0.002 + 0.5 / 3.0)).abs() < 1e-15);
        assert_eq!(mass[(1, 1)], 1.0);
    }

    #[test]
    fn zero_damping_zeroes_the_damping_block() {
        let modal = modal(2, 0.0);
        let (_, damping, ..) = assemble_modal_matrices(&modal);
        assert_eq!(damping.amax(), 0.0);
    }

    #[test]
    fn stiffness_block_carries_squared_frequencies() {
        let modal = modal(2, 0.05);
        let (_, _, stiffness, _) = assemble_modal_matrices(&modal);
        assert_eq!(stiffness[(0, 0)], 0.0);
        // Computed frequencies agree with the reference values well inside 1%.
        assert!((stiffness[(1, 1)] - 20.53f64.powi(2)).abs() < 0.01 * 20.53f64.powi(2));
        assert!((stiffness[(2, 2)] - 55.88f64.powi(2)).abs() < 0.01 * 55.88f64.powi(2));
    }

    #[test]
    fn undamped_eigenvalues_are_imaginary_or_zero() {
        let plant = PlantModel::from_modal(modal(2, 0.0)).unwrap();
        for ev in plant.a.complex_eigenvalues().iter() {
            assert!(ev.re.abs() < 1e-8 * (1.0 + ev.im.abs()), "eigenvalue {ev}");
        }
    }

    #[test]
    fn damped_eigenvalues_match_closed_form() {
        let zeta = 0.05;
        let plant = PlantModel::from_modal(modal(2, zeta)).unwrap();
        let mut expected: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); 2];
        for mode in &plant.modal.modes {
            let om = mode.omega;
            let re = -zeta * om;
            let im = om * (1.0 - zeta * zeta).sqrt();
            expected.push(Complex::new(re, im));
            expected.push(Complex::new(re, -im));
        }
        let mut got: Vec<Complex<f64>> = plant.a.complex_eigenvalues().iter().copied().collect();
        let key = |c: &Complex<f64>| (c.re, c.im);
        expected.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        got.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (e, g) in expected.iter().zip(&got) {
            let scale = 1.0 + e.norm();
            assert!(
                (e - g).norm() < 1e-8 * scale,
                "eigenvalue mismatch: expected {e}, got {g}"
            );
        }
    }

    #[test]
    fn pure_rigid_state_measures_theta_on_both_outputs() {
        let plant = PlantModel::from_modal(modal(2, 0.05)).unwrap();
        let x = StateVector::from_parts(0.3, &[0.0, 0.0], 0.0, &[0.0, 0.0]).unwrap();
        let (theta_c, theta_t) = plant.measure(x.as_vector()).unwrap();
        assert_eq!(theta_c, 0.3);
        assert_eq!(theta_t, 0.3);
        let y = &plant.c * x.as_vector();
        assert_eq!(y[0], 0.3);
        assert_eq!(y[1], 0.3);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let plant = PlantModel::from_modal(modal(2, 0.05)).unwrap();
        let bad = DVector::from_element(5, 0.0);
        match plant.measure(&bad).unwrap_err() {
            Error::DimensionMismatch { expected, got, .. } => {
                assert_eq!(expected, 6);
                assert_eq!(got, 5);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn singular_mass_is_caught() {
        let modal = modal(1, 0.05);
        let (mut mass, damping, stiffness, input_gain) = assemble_modal_matrices(&modal);
        mass[(0, 0)] = 0.0;
        let err = to_state_space(&mass, &damping, &stiffness, &input_gain, &modal).unwrap_err();
        assert!(matches!(err, Error::SingularMass { index: 0, .. }));
    }

    #[test]
    fn smaller_model_is_exact_subblock_of_larger() {
        let params = reference_beam();
        let modal5 = ModalData::compute(&params, 5, Normalization::MeanSquare).unwrap();
        let modal2 = ModalData::from_parts(params, modal5.modes[..2].to_vec()).unwrap();
        let plant5 = PlantModel::from_modal(modal5).unwrap();
        let plant2 = PlantModel::from_modal(modal2).unwrap();

        // Map index in the n=2 packing to the same physical entry in n=5.
        let map = |i: usize| if i <= 2 { i } else { i - 3 + 6 };
        for i in 0..plant2.dim() {
            for j in 0..plant2.dim() {
                assert_eq!(plant2.a[(i, j)], plant5.a[(map(i), map(j))]);
            }
            assert_eq!(plant2.b[i], plant5.b[map(i)]);
        }
    }

    #[test]
    fn rigid_double_integrator_factor() {
        // Column of A hit by theta is zero: s^2 divides the characteristic
        // polynomial, i.e. two eigenvalues at the origin.
        let plant = PlantModel::from_modal(modal(3, 0.05)).unwrap();
        let zeros = plant
            .a
            .complex_eigenvalues()
            .iter()
            .filter(|ev| ev.norm() < 1e-9)
            .count();
        assert_eq!(zeros, 2);
    }

    #[test]
    fn state_vector_accessors_follow_packing() {
        let x = StateVector::from_parts(1.0, &[2.0, 3.0], 4.0, &[5.0, 6.0]).unwrap();
        assert_eq!(x.theta(), 1.0);
        assert_eq!(x.modal(1), 3.0);
        assert_eq!(x.dtheta(), 4.0);
        assert_eq!(x.modal_rate(0), 5.0);
        assert_eq!(
            x.as_vector().as_slice(),
            &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0][..]
        );
    }
}
