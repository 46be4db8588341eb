//! Reduced-order functional observer synthesis and verification.
//!
//! The observer
//! `d(eta)/dt = N eta + L y + H u`, `g_hat = G y + D eta`
//! estimates the two control functionals `g = F x` directly. Synthesis runs
//! the chain: build `F` from the sliding design, solve the Sylvester-type
//! equation `T A - N T - L C = 0`, set `H = T B`, then factor
//! `F = G C + D T`. Each product is verified against the five existence
//! conditions and the composite closed-loop matrix.

use std::fmt;

use nalgebra::{Complex, DMatrix, DVector, Vector2};

use crate::error::{Error, Result};
use crate::plant::PlantModel;
use crate::scalar::{as_f64, lit, Real};
use crate::smc::SlidingSpec;

/// Relative residual threshold for the synthesis conditions.
pub const TOL_SYL: f64 = 1e-8;

/// Minimum distance between plant and observer eigenvalues for the Sylvester
/// solve to be accepted.
const SPECTRAL_GAP_MIN: f64 = 1e-8;

/// The functional gain `F` (2 x (2n+2)): row 0 is the state-feedback row of
/// the expanded control law, row 1 is the sliding row vector itself.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalGain<T> {
    pub matrix: DMatrix<T>,
}

/// Builds `F` from the design plant and sliding specification:
/// `F_1 = -(Gamma B)^-1 [Gamma A + k1 Gamma]`, `F_2 = Gamma`.
pub fn functional_gain<T: Real>(
    design: &PlantModel<T>,
    sliding: &SlidingSpec<T>,
) -> Result<FunctionalGain<T>> {
    if sliding.gamma.len() != design.dim() {
        return Err(Error::DimensionMismatch {
            context: "functional gain",
            expected: design.dim(),
            got: sliding.gamma.len(),
        });
    }
    let inv = T::one() / sliding.gamma_b;
    let gamma_a = &sliding.gamma * &design.a;
    let row1 = (&gamma_a + &sliding.gamma * sliding.k1) * (-inv);
    let mut matrix = DMatrix::zeros(2, design.dim());
    matrix.row_mut(0).copy_from(&row1);
    matrix.row_mut(1).copy_from(&sliding.gamma);
    Ok(FunctionalGain { matrix })
}

/// Solves `T A - N T - L C = 0` for `T` by LU on the vectorized unknowns.
///
/// Returns the solution together with the minimum spectral gap between `A`
/// and `N`. Fails with [`Error::SpectraOverlap`] when any observer eigenvalue
/// comes within `1e-8` of a plant eigenvalue (the equation is then singular
/// or ill-conditioned), or when the solved residual exceeds
/// `1e-10 * ||L C||`.
pub fn solve_sylvester<T: Real>(
    a: &DMatrix<T>,
    n: &DMatrix<T>,
    l: &DMatrix<T>,
    c: &DMatrix<T>,
) -> Result<(DMatrix<T>, T)> {
    let m = a.nrows();
    let v = n.nrows();
    if a.ncols() != m || n.ncols() != v || l.nrows() != v || c.ncols() != m {
        return Err(Error::DimensionMismatch {
            context: "sylvester solve",
            expected: m,
            got: c.ncols(),
        });
    }

    let gap = spectral_gap(a, n);
    if gap < lit(SPECTRAL_GAP_MIN) {
        return Err(Error::SpectraOverlap { gap: as_f64(gap) });
    }

    // vec(T A) = (A^T kron I_v) vec(T), vec(N T) = (I_m kron N) vec(T).
    let system =
        a.transpose().kronecker(&DMatrix::identity(v, v)) - DMatrix::identity(m, m).kronecker(n);
    let rhs_mat = l * c;
    let rhs = DVector::from_column_slice(rhs_mat.as_slice());
    let solution = system
        .lu()
        .solve(&rhs)
        .ok_or(Error::SpectraOverlap { gap: as_f64(gap) })?;
    let t = DMatrix::from_column_slice(v, m, solution.as_slice());

    let residual = (&t * a - n * &t - &rhs_mat).norm();
    if residual > lit::<T>(1e-10) * rhs_mat.norm().max(lit(1e-300)) {
        return Err(Error::SpectraOverlap { gap: as_f64(gap) });
    }
    Ok((t, gap))
}

/// Minimum distance between the eigenvalue sets of two square matrices.
pub fn spectral_gap<T: Real>(a: &DMatrix<T>, n: &DMatrix<T>) -> T {
    let eig_a = a.clone().complex_eigenvalues();
    let eig_n = n.clone().complex_eigenvalues();
    let mut gap = lit::<T>(f64::INFINITY);
    for la in eig_a.iter() {
        for ln in eig_n.iter() {
            let d = la - ln;
            gap = gap.min((d.re * d.re + d.im * d.im).sqrt());
        }
    }
    gap
}

/// Solves `F = G C + D T` exactly for the minimal-norm `[G D]`.
///
/// Requires `F` to lie in the row space of `[C; T]`; otherwise the pair
/// `(N, L)` cannot realize this functional and the call fails with
/// [`Error::Unrealizable`] (the caller may retry with a different design or
/// fall back to [`solve_output_maps_lsq`]).
pub fn solve_output_maps<T: Real>(
    f: &DMatrix<T>,
    c: &DMatrix<T>,
    t: &DMatrix<T>,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let (g, d, residual) = solve_output_maps_lsq(f, c, t)?;
    let scale = f.norm().max(lit(1e-300));
    if residual > lit::<T>(TOL_SYL) * scale {
        let stacked = stack_rows(&[c, t]);
        let with_f = stack_rows(&[c, t, f]);
        return Err(Error::Unrealizable {
            rank_ct: numeric_rank(&stacked),
            rank_ctf: numeric_rank(&with_f),
        });
    }
    Ok((g, d))
}

/// Least-squares variant of [`solve_output_maps`]: returns the minimal-norm
/// `[G D]` minimizing `||G C + D T - F||` together with the achieved
/// residual (Frobenius, relative to `||F||`).
///
/// This is the approximate realization used when the requested functional is
/// not exactly representable; the residual is reported, never hidden.
pub fn solve_output_maps_lsq<T: Real>(
    f: &DMatrix<T>,
    c: &DMatrix<T>,
    t: &DMatrix<T>,
) -> Result<(DMatrix<T>, DMatrix<T>, T)> {
    let m = c.ncols();
    if t.ncols() != m || f.ncols() != m {
        return Err(Error::DimensionMismatch {
            context: "output map solve",
            expected: m,
            got: t.ncols().max(f.ncols()),
        });
    }
    let p = c.nrows();
    let v = t.nrows();
    let stacked = stack_rows(&[c, t]); // (p + v) x m
    let svd = stacked.transpose().svd(true, true);
    let eps = svd.singular_values.max() * lit(1e-12);
    let xt = svd
        .solve(&f.transpose(), eps)
        .map_err(|_| Error::Unrealizable {
            rank_ct: 0,
            rank_ctf: 0,
        })?;
    let x = xt.transpose(); // f.nrows() x (p + v)
    let g = x.columns(0, p).into_owned();
    let d = x.columns(p, v).into_owned();
    let residual = (&g * c + &d * t - f).norm() / f.norm().max(lit(1e-300));
    Ok((g, d, residual))
}

/// Stacks matrices with equal column counts on top of each other.
fn stack_rows<T: Real>(blocks: &[&DMatrix<T>]) -> DMatrix<T> {
    let cols = blocks[0].ncols();
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for block in blocks {
        out.view_mut((at, 0), (block.nrows(), cols))
            .copy_from(*block);
        at += block.nrows();
    }
    out
}

/// Numerical rank from singular values with a relative threshold.
pub fn numeric_rank<T: Real>(m: &DMatrix<T>) -> usize {
    let svd = m.clone().svd(false, false);
    let max = svd.singular_values.max();
    if max == T::zero() {
        return 0;
    }
    let tol = max * lit::<T>(TOL_SYL);
    svd.singular_values.iter().filter(|&&s| s > tol).count()
}

/// How the output maps `(G, D)` are obtained from the existence conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Realization {
    /// Require `F = G C + D T` to hold to `TOL_SYL`; fail otherwise.
    Exact,
    /// Accept the minimal-norm least-squares factorization and report the
    /// residual. The realized functional `G C + D T` then replaces `F` in
    /// the loop analysis.
    LeastSquares,
}

/// Synthesized functional observer.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverSpec<T> {
    /// Observer order `v`.
    pub order: usize,
    /// Design-model mode count.
    pub n_design: usize,
    /// Observer dynamics (v x v, Hurwitz).
    pub n: DMatrix<T>,
    /// Output injection (v x 2).
    pub l: DMatrix<T>,
    /// Input gain `H = T B` (v x 1).
    pub h: DVector<T>,
    /// Output gain on measurements (2 x 2).
    pub g: DMatrix<T>,
    /// Output map on the observer state (2 x v).
    pub d: DMatrix<T>,
    /// Sylvester solution; the observer state estimates `T x`.
    pub t: DMatrix<T>,
    /// Requested functional gain.
    pub f: DMatrix<T>,
    /// Realized functional `G C + D T`; equals `f` when the exact
    /// factorization exists.
    pub f_realized: DMatrix<T>,
}

impl<T: Real> ObserverSpec<T> {
    /// Observer state derivative `N eta + L y + H u`.
    pub fn derivative(&self, eta: &DVector<T>, y: &Vector2<T>, u: T) -> Result<DVector<T>> {
        if eta.len() != self.order {
            return Err(Error::DimensionMismatch {
                context: "observer state",
                expected: self.order,
                got: eta.len(),
            });
        }
        Ok(&self.n * eta + &self.l * y + &self.h * u)
    }

    /// Functional estimate `g_hat = G y + D eta`.
    pub fn estimate(&self, eta: &DVector<T>, y: &Vector2<T>) -> Result<Vector2<T>> {
        if eta.len() != self.order {
            return Err(Error::DimensionMismatch {
                context: "observer state",
                expected: self.order,
                got: eta.len(),
            });
        }
        let out = &self.g * y + &self.d * eta;
        Ok(Vector2::new(out[0], out[1]))
    }
}

/// Composite closed-loop matrix stacking plant-with-feedback and the
/// estimation-error dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeSystem<T> {
    /// `[[A + B e1 F, -B e1 D], [0, N]]`, size (2n+2+v) squared.
    pub a_c: DMatrix<T>,
    /// `[B; 0]`.
    pub b_c: DVector<T>,
}

impl<T: Real> CompositeSystem<T> {
    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        self.a_c
            .clone()
            .complex_eigenvalues()
            .iter()
            .copied()
            .collect()
    }

    /// Largest eigenvalue real part; stable iff negative.
    pub fn max_real_part(&self) -> T {
        self.eigenvalues()
            .iter()
            .map(|ev| ev.re)
            .fold(lit(f64::NEG_INFINITY), |acc, re| acc.max(re))
    }
}

/// Forms the composite matrix from the loop functional `f` (the gain the
/// control actually applies), the observer output map `d` and dynamics `n`.
pub fn composite_matrix<T: Real>(
    plant: &PlantModel<T>,
    f: &DMatrix<T>,
    d: &DMatrix<T>,
    n: &DMatrix<T>,
) -> CompositeSystem<T> {
    let m = plant.dim();
    let v = n.nrows();
    let mut a_c = DMatrix::zeros(m + v, m + v);
    // u = [1 0] g_hat: only row 0 of F and D enters the plant block.
    let bf = &plant.b * f.row(0);
    a_c.view_mut((0, 0), (m, m)).copy_from(&(&plant.a + bf));
    let bd = &plant.b * d.row(0);
    a_c.view_mut((0, m), (m, v)).copy_from(&(-bd));
    a_c.view_mut((m, m), (v, v)).copy_from(n);

    let mut b_c = DVector::zeros(m + v);
    b_c.rows_mut(0, m).copy_from(&plant.b);
    CompositeSystem { a_c, b_c }
}

/// Residuals of the five existence conditions plus the composite spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport<T> {
    pub order: usize,
    /// Condition 1: max real part of the observer spectrum (< 0 required).
    pub hurwitz_margin: T,
    /// Condition 2: `||T A - N T - L C|| / ||L C||`.
    pub sylvester_residual: T,
    /// Condition 3: `||H - T B|| / ||T B||`.
    pub input_residual: T,
    /// Condition 4: `||F - G C - D T|| / ||F||`.
    pub output_residual: T,
    /// Condition 5: requires `order >= rank(F - G C)`.
    pub rank_f_minus_gc: usize,
    /// Largest real part over the composite spectrum.
    pub composite_max_re: T,
    pub composite_eigenvalues: Vec<Complex<T>>,
}

impl<T: Real> ConditionReport<T> {
    /// All five conditions at the synthesis tolerance, plus composite
    /// stability.
    pub fn all_pass(&self, tol: T) -> bool {
        self.conditions_pass(tol) && self.composite_max_re < T::zero()
    }

    /// The five existence conditions alone.
    pub fn conditions_pass(&self, tol: T) -> bool {
        self.hurwitz_margin < T::zero()
            && self.sylvester_residual <= tol
            && self.input_residual <= tol
            && self.output_residual <= tol
            && self.order >= self.rank_f_minus_gc
    }
}

impl<T: Real> fmt::Display for ConditionReport<T> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            out,
            "condition_1_hurwitz_margin = {:.8e}",
            as_f64(self.hurwitz_margin)
        )?;
        writeln!(
            out,
            "condition_2_sylvester_residual = {:.8e}",
            as_f64(self.sylvester_residual)
        )?;
        writeln!(
            out,
            "condition_3_input_residual = {:.8e}",
            as_f64(self.input_residual)
        )?;
        writeln!(
            out,
            "condition_4_output_residual = {:.8e}",
            as_f64(self.output_residual)
        )?;
        writeln!(
            out,
            "condition_5_rank_f_minus_gc = {} (order {})",
            self.rank_f_minus_gc, self.order
        )?;
        writeln!(
            out,
            "composite_max_real_part = {:.8e}",
            as_f64(self.composite_max_re)
        )?;
        for (i, ev) in self.composite_eigenvalues.iter().enumerate() {
            writeln!(
                out,
                "composite_eigenvalue_{i} = {:.8e} {:+.8e}i",
                as_f64(ev.re),
                as_f64(ev.im)
            )?;
        }
        Ok(())
    }
}

/// Synthesis output: the verified observer and its report.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisReport<T> {
    pub conditions: ConditionReport<T>,
    /// Minimum plant/observer eigenvalue distance seen by the Sylvester solve.
    pub min_spectral_gap: T,
    pub realization: Realization,
}

impl<T: Real> fmt::Display for SynthesisReport<T> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            out,
            "realization = {}",
            match self.realization {
                Realization::Exact => "exact",
                Realization::LeastSquares => "least-squares",
            }
        )?;
        writeln!(
            out,
            "min_spectral_gap = {:.8e}",
            as_f64(self.min_spectral_gap)
        )?;
        write!(out, "{}", self.conditions)
    }
}

/// Runs the full synthesis chain for a `v = 2` functional observer:
/// functional gain, Sylvester solve, `H = T B`, output-map factorization,
/// composite stability.
///
/// With [`Realization::Exact`] the output maps must reproduce `F` to
/// [`TOL_SYL`]; with [`Realization::LeastSquares`] the best approximate
/// realization is accepted and its residual reported, in which case the
/// composite analysis uses the realized functional.
pub fn synthesize<T: Real>(
    design: &PlantModel<T>,
    sliding: &SlidingSpec<T>,
    n: &DMatrix<T>,
    l: &DMatrix<T>,
    realization: Realization,
) -> Result<(ObserverSpec<T>, SynthesisReport<T>)> {
    let order = n.nrows();
    if n.ncols() != order || l.nrows() != order || l.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            context: "observer design matrices",
            expected: order,
            got: n.ncols().max(l.nrows()),
        });
    }

    let hurwitz_margin = max_real_part(n);
    if hurwitz_margin >= T::zero() {
        return Err(Error::CompositeUnstable {
            max_re: as_f64(hurwitz_margin),
        });
    }

    let f = functional_gain(design, sliding)?;
    let (t, gap) = solve_sylvester(&design.a, n, l, &design.c)?;
    let h = &t * &design.b;
    let (g, d) = match realization {
        Realization::Exact => solve_output_maps(&f.matrix, &design.c, &t)?,
        Realization::LeastSquares => {
            let (g, d, _residual) = solve_output_maps_lsq(&f.matrix, &design.c, &t)?;
            (g, d)
        }
    };
    let f_realized = &g * &design.c + &d * &t;

    let spec = ObserverSpec {
        order,
        n_design: design.n,
        n: n.clone(),
        l: l.clone(),
        h,
        g,
        d,
        t,
        f: f.matrix,
        f_realized,
    };

    let conditions = verify_conditions(design, &spec);
    if conditions.composite_max_re >= T::zero() {
        return Err(Error::CompositeUnstable {
            max_re: as_f64(conditions.composite_max_re),
        });
    }
    let report = SynthesisReport {
        conditions,
        min_spectral_gap: gap,
        realization,
    };
    Ok((spec, report))
}

/// Evaluates the five existence conditions and the composite spectrum for an
/// arbitrary (possibly externally supplied) matrix set.
pub fn verify_conditions<T: Real>(
    design: &PlantModel<T>,
    spec: &ObserverSpec<T>,
) -> ConditionReport<T> {
    let floor = lit::<T>(1e-300);
    let lc = &spec.l * &design.c;
    let sylvester_residual =
        (&spec.t * &design.a - &spec.n * &spec.t - &lc).norm() / lc.norm().max(floor);
    let tb = &spec.t * &design.b;
    let input_residual = (&spec.h - &tb).norm() / tb.norm().max(floor);
    let reconstruction = &spec.g * &design.c + &spec.d * &spec.t;
    let output_residual = (&spec.f - &reconstruction).norm() / spec.f.norm().max(floor);
    let f_minus_gc = &spec.f - &spec.g * &design.c;

    // The loop applies the realized functional; the composite spectrum is
    // computed with it so the verdict matches the simulated system.
    let composite = composite_matrix(design, &spec.f_realized, &spec.d, &spec.n);
    let composite_eigenvalues = composite.eigenvalues();
    let composite_max_re = composite
        .eigenvalues()
        .iter()
        .map(|ev| ev.re)
        .fold(lit(f64::NEG_INFINITY), |acc: T, re| acc.max(re));

    ConditionReport {
        order: spec.order,
        hurwitz_margin: max_real_part(&spec.n),
        sylvester_residual,
        input_residual,
        output_residual,
        rank_f_minus_gc: numeric_rank(&f_minus_gc),
        composite_max_re,
        composite_eigenvalues,
    }
}

/// Largest real part of a matrix spectrum.
pub fn max_real_part<T: Real>(m: &DMatrix<T>) -> T {
    m.clone()
        .complex_eigenvalues()
        .iter()
        .map(|ev| ev.re)
        .fold(lit(f64::NEG_INFINITY), |acc: T, re| acc.max(re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    fn setup() -> (PlantModel<f64>, SlidingSpec<f64>) {
        let plant = fixture::design_plant::<f64>().unwrap();
        let sliding = fixture::sliding_spec(&plant).unwrap();
        (plant, sliding)
    }

    #[test]
    fn functional_gain_row_two_is_gamma() {
        let (plant, sliding) = setup();
        let f = functional_gain(&plant, &sliding).unwrap();
        for j in 0..6 {
            assert_eq!(f.matrix[(1, j)], sliding.gamma[j]);
        }
    }

    #[test]
    fn proportional_term_enters_row_one_linearly() {
        // Explicit formula at k1 = 1, and the k1 -> 0 limit where the gain
        // term vanishes and F_1 collapses to -(Gamma B)^-1 Gamma A.
        let (plant, sliding) = setup();
        let spec_k1 = SlidingSpec::new(sliding.gamma.clone(), 1.0, 0.0, &plant).unwrap();
        let f_k1 = functional_gain(&plant, &spec_k1).unwrap();
        let inv = 1.0 / spec_k1.gamma_b;
        let gamma_a = &spec_k1.gamma * &plant.a;
        for j in 0..6 {
            let expected = -inv * (gamma_a[j] + spec_k1.gamma[j]);
            assert!((f_k1.matrix[(0, j)] - expected).abs() < 1e-12 * expected.abs().max(1.0));
        }

        let spec_tiny = SlidingSpec::new(sliding.gamma.clone(), 1e-12, 0.0, &plant).unwrap();
        let f_tiny = functional_gain(&plant, &spec_tiny).unwrap();
        for j in 0..6 {
            let limit = -inv * gamma_a[j];
            assert!(
                (f_tiny.matrix[(0, j)] - limit).abs() < 1e-9 * limit.abs().max(1.0),
                "k1 -> 0 limit broken at column {j}"
            );
        }
    }

    #[test]
    fn sylvester_rejects_shared_spectrum() {
        let (plant, _) = setup();
        let n = plant.a.clone();
        let l = DMatrix::zeros(plant.dim(), 2);
        let err = solve_sylvester(&plant.a, &n, &l, &plant.c).unwrap_err();
        assert!(matches!(err, Error::SpectraOverlap { .. }));
    }

    #[test]
    fn output_maps_recover_identity_functional() {
        let (plant, _) = setup();
        // T spanning two velocity directions; [C; T] has full row rank.
        let mut t = DMatrix::zeros(2, 6);
        t[(0, 3)] = 1.0;
        t[(1, 4)] = 1.0;
        let f = plant.c.clone();
        let (g, d) = solve_output_maps(&f, &plant.c, &t).unwrap();
        assert!((&g - DMatrix::<f64>::identity(2, 2)).norm() < 1e-10);
        assert!(d.norm() < 1e-10);
    }

    #[test]
    fn unrealizable_functional_is_rejected() {
        let (plant, _) = setup();
        let mut t = DMatrix::zeros(2, 6);
        t[(0, 3)] = 1.0;
        t[(1, 4)] = 1.0;
        // Row 0 points along the last velocity direction, outside
        // span([C; T]); row 1 stays inside it.
        let mut f = DMatrix::zeros(2, 6);
        f[(0, 5)] = 1.0;
        f.row_mut(1).copy_from(&plant.c.row(0));
        let err = solve_output_maps(&f, &plant.c, &t).unwrap_err();
        match err {
            Error::Unrealizable { rank_ct, rank_ctf } => {
                assert_eq!(rank_ct, 4);
                assert_eq!(rank_ctf, 5);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn estimate_reproduces_realized_functional_on_consistent_state() {
        let (plant, sliding) = setup();
        let (n, l) = fixture::observer_dynamics::<f64>();
        let (spec, _) = synthesize(&plant, &sliding, &n, &l, Realization::LeastSquares).unwrap();
        let x = fixture::initial_state::<f64>(2);
        let eta = &spec.t * &x;
        let y_vec = &plant.c * &x;
        let y = Vector2::new(y_vec[0], y_vec[1]);
        let g_hat = spec.estimate(&eta, &y).unwrap();
        let expected = &spec.f_realized * &x;
        assert!((g_hat[0] - expected[0]).abs() < 1e-10 * expected[0].abs().max(1.0));
        assert!((g_hat[1] - expected[1]).abs() < 1e-10 * expected[1].abs().max(1.0));
    }

    #[test]
    fn zero_inputs_give_zero_estimate_and_derivative() {
        let (plant, sliding) = setup();
        let (n, l) = fixture::observer_dynamics::<f64>();
        let (spec, _) = synthesize(&plant, &sliding, &n, &l, Realization::LeastSquares).unwrap();
        let eta = DVector::zeros(2);
        let y = Vector2::new(0.0, 0.0);
        assert_eq!(spec.derivative(&eta, &y, 0.0).unwrap().amax(), 0.0);
        assert_eq!(spec.estimate(&eta, &y).unwrap().amax(), 0.0);
    }

    #[test]
    fn composite_spectrum_is_union_of_blocks() {
        let (plant, sliding) = setup();
        let (n, l) = fixture::observer_dynamics::<f64>();
        let (spec, report) =
            synthesize(&plant, &sliding, &n, &l, Realization::LeastSquares).unwrap();
        let composite = composite_matrix(&plant, &spec.f_realized, &spec.d, &spec.n);

        let mut block: Vec<Complex<f64>> = {
            let closed = &plant.a + &plant.b * spec.f_realized.row(0);
            closed.complex_eigenvalues().iter().copied().collect()
        };
        block.extend(spec.n.complex_eigenvalues().iter().copied());
        let mut full = composite.eigenvalues();
        let key = |c: &Complex<f64>| (c.re, c.im);
        block.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        full.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        assert_eq!(block.len(), full.len());
        for (e, g) in block.iter().zip(&full) {
            assert!((e - g).norm() < 1e-6 * (1.0 + e.norm()), "{e} vs {g}");
        }
        assert!(report.conditions.composite_max_re < 0.0);
    }

    #[test]
    fn non_hurwitz_observer_dynamics_are_rejected() {
        let (plant, sliding) = setup();
        let (_, l) = fixture::observer_dynamics::<f64>();
        let n = DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.0, -0.5]);
        let err = synthesize(&plant, &sliding, &n, &l, Realization::LeastSquares).unwrap_err();
        assert!(matches!(err, Error::CompositeUnstable { .. }));
    }
}
