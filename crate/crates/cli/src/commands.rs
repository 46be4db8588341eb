//! Subcommand implementations.

use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::Deserialize;

use flexlink::fixture;
use flexlink::modal::ModalData;
use flexlink::observer::{
    functional_gain, synthesize, verify_conditions, ConditionReport, ObserverSpec, Realization,
};
use flexlink::plant::PlantModel;
use flexlink::sim::{simulate, Controller, SimConfig, SimResult};
use flexlink::smc::{ReferenceSignal, SlidingSpec};
use flexlink::{BeamParams, Error as CoreError};

use crate::config::{
    ConfigError, ControlMode, ModalSource, ProjectConfig, RealizationChoice, Scenario,
};
use crate::output;

/// Command failures carrying their process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1: configuration or I/O.
    Config(String),
    /// Exit 2: synthesis failure.
    Synthesis(CoreError),
    /// Exit 2: one or more verification conditions failed.
    VerificationFailed(usize),
    /// Exit 3: simulation failure.
    Simulation(CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Synthesis(_) | CliError::VerificationFailed(_) => 2,
            CliError::Simulation(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(out, "{msg}"),
            CliError::Synthesis(e) => write!(out, "synthesis failed: {e}"),
            CliError::VerificationFailed(count) => {
                write!(
                    out,
                    "verification failed: {count} condition(s) out of tolerance"
                )
            }
            CliError::Simulation(e) => write!(out, "simulation failed: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("io error: {e}"))
    }
}

/// Classifies a core error into the documented exit-code families.
fn classify(e: CoreError) -> CliError {
    match e {
        CoreError::SpectraOverlap { .. }
        | CoreError::Unrealizable { .. }
        | CoreError::CompositeUnstable { .. }
        | CoreError::SingularGammaB { .. } => CliError::Synthesis(e),
        CoreError::Divergence { .. }
        | CoreError::StepTooLarge { .. }
        | CoreError::NeverReached { .. } => CliError::Simulation(e),
        other => CliError::Config(other.to_string()),
    }
}

fn beam_params(config: &ProjectConfig) -> Result<BeamParams<f64>, CliError> {
    let b = &config.beam;
    BeamParams::new(
        b.rho,
        b.length,
        b.ei,
        b.hub_inertia,
        b.payload_mass,
        b.payload_inertia,
        b.damping_ratio,
    )
    .map_err(classify)
}

fn modal_data(config: &ProjectConfig, n: usize) -> Result<ModalData<f64>, CliError> {
    let params = beam_params(config)?;
    match config.modes.source {
        ModalSource::Catalog => fixture::modal_with(params, n).map_err(classify),
        ModalSource::Computed => {
            let normalization = config.normalization()?;
            ModalData::compute(&params, n, normalization).map_err(classify)
        }
    }
}

fn plant(config: &ProjectConfig, n: usize) -> Result<PlantModel<f64>, CliError> {
    PlantModel::from_modal(modal_data(config, n)?).map_err(classify)
}

fn sliding_spec(
    config: &ProjectConfig,
    design: &PlantModel<f64>,
) -> Result<SlidingSpec<f64>, CliError> {
    let gamma = RowDVector::from_row_slice(&config.controller.gamma);
    SlidingSpec::new(gamma, config.controller.k1, config.controller.k2, design).map_err(classify)
}

fn observer_matrices(config: &ProjectConfig) -> (DMatrix<f64>, DMatrix<f64>) {
    let v = config.observer.order;
    let n = DMatrix::from_fn(v, v, |i, j| config.observer.n[i][j]);
    let l = DMatrix::from_fn(v, 2, |i, j| config.observer.l[i][j]);
    (n, l)
}

fn synthesize_from_config(
    config: &ProjectConfig,
    design: &PlantModel<f64>,
) -> Result<(ObserverSpec<f64>, flexlink::observer::SynthesisReport<f64>), CliError> {
    let sliding = sliding_spec(config, design)?;
    let (n, l) = observer_matrices(config);
    let realization = match config.observer.realization {
        RealizationChoice::Exact => Realization::Exact,
        RealizationChoice::LeastSquares => Realization::LeastSquares,
    };
    synthesize(design, &sliding, &n, &l, realization).map_err(classify)
}

fn reference(config: &ProjectConfig, scenario: Scenario) -> ReferenceSignal<f64> {
    match scenario {
        Scenario::Regulation => ReferenceSignal::Regulation {
            theta_d: config.simulation.theta_d,
        },
        Scenario::Tracking => ReferenceSignal::Tracking,
    }
}

fn initial_state(config: &ProjectConfig) -> DVector<f64> {
    match &config.simulation.x0 {
        Some(x0) => DVector::from_row_slice(x0),
        None => fixture::initial_state(config.modes.n_plant),
    }
}

fn out_path(config: &ProjectConfig, name: &str) -> PathBuf {
    Path::new(&config.output.directory).join(name)
}

/// `modes`: mode table from the full computed analysis; with `state_space`,
/// also the A/B/C blocks of the configured simulation plant.
pub fn run_modes(config: &ProjectConfig, state_space: bool) -> Result<(), CliError> {
    let params = beam_params(config)?;
    let normalization = config.normalization()?;
    let modal =
        ModalData::compute(&params, config.modes.n_plant, normalization).map_err(classify)?;

    let mut csv = String::from("mode,beta,omega,hub_slope,tip_value\n");
    for (i, mode) in modal.modes.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            i + 1,
            output::fmt_float(mode.beta),
            output::fmt_float(mode.omega),
            output::fmt_float(mode.hub_slope),
            output::fmt_float(mode.tip_value),
        ));
    }
    let path = out_path(config, "modes.csv");
    output::write_atomic(&path, &csv)?;
    println!("wrote {}", path.display());

    if state_space {
        let plant = plant(config, config.modes.n_plant)?;
        let b = DMatrix::from_column_slice(plant.b.len(), 1, plant.b.as_slice());
        let text = output::matrix_blocks_csv(&[("A", &plant.a), ("B", &b), ("C", &plant.c)]);
        let path = out_path(config, "state_space.csv");
        output::write_atomic(&path, &text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// `synth`: observer synthesis, verification report and matrix dump.
pub fn run_synth(config: &ProjectConfig, report_path: Option<&Path>) -> Result<(), CliError> {
    let design = plant(config, config.modes.n_design)?;
    let (spec, report) = synthesize_from_config(config, &design)?;

    let report_text = report.to_string();
    print!("{report_text}");
    if let Some(path) = report_path {
        output::write_atomic(path, &report_text)?;
        println!("wrote {}", path.display());
    }

    let h = DMatrix::from_column_slice(spec.h.len(), 1, spec.h.as_slice());
    let blocks = output::matrix_blocks_csv(&[
        ("N", &spec.n),
        ("L", &spec.l),
        ("H", &h),
        ("G", &spec.g),
        ("D", &spec.d),
        ("T", &spec.t),
        ("F", &spec.f),
        ("F_REALIZED", &spec.f_realized),
    ]);
    let path = out_path(config, "observer_matrices.csv");
    output::write_atomic(&path, &blocks)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Builds and runs the configured closed loop; returns the result and the
/// labels used for output files.
pub fn run_simulation(
    config: &ProjectConfig,
    scenario: Scenario,
    mode: ControlMode,
) -> Result<SimResult<f64>, CliError> {
    let plant_model = plant(config, config.modes.n_plant)?;
    let design = plant(config, config.modes.n_design)?;
    let sliding = sliding_spec(config, &design)?;
    let reference = reference(config, scenario);

    let mut sim_config = SimConfig::new(
        config.simulation.dt,
        config.simulation.t_final,
        initial_state(config),
    );
    sim_config.band_sigma = config.simulation.band_sigma;
    sim_config.settle_tol = config.simulation.settle_tol;
    sim_config.boundary_layer = config.controller.boundary_layer;
    if let Some(eta0) = &config.simulation.eta0 {
        sim_config.eta0 = DVector::from_row_slice(eta0);
    }

    match mode {
        ControlMode::FullState => {
            let controller = Controller::FullState {
                sliding,
                design,
                reference,
            };
            simulate(&plant_model, &controller, None, &sim_config).map_err(classify)
        }
        ControlMode::ObserverFed => {
            let (observer, _) = synthesize_from_config(config, &design)?;
            let controller = Controller::ObserverFed {
                sliding,
                design,
                reference,
            };
            simulate(&plant_model, &controller, Some(&observer), &sim_config).map_err(classify)
        }
    }
}

/// `simulate`: run and emit trace + summary.
pub fn run_simulate(
    config: &ProjectConfig,
    scenario: Option<Scenario>,
    mode: Option<ControlMode>,
) -> Result<(), CliError> {
    let scenario = scenario.unwrap_or(config.simulation.scenario);
    let mode = mode.unwrap_or(config.simulation.mode);
    let result = run_simulation(config, scenario, mode)?;

    let summary = output::summary_text(
        scenario.name(),
        mode.name(),
        config.simulation.dt,
        config.simulation.t_final,
        &result.summary,
    );
    print!("{summary}");

    let stem = format!("{}_{}", scenario.name(), mode.name());
    if config.output.emit_plot_data {
        let path = out_path(config, &format!("trace_{stem}.csv"));
        output::write_atomic(&path, &output::trace_csv(&result, config.modes.n_plant))?;
        println!("wrote {}", path.display());
    }
    let path = out_path(config, &format!("summary_{stem}.txt"));
    output::write_atomic(&path, &summary)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// External matrix set checked by `verify`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    matrices: MatrixSet,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixSet {
    n: Vec<Vec<f64>>,
    l: Vec<Vec<f64>>,
    h: Vec<f64>,
    g: Vec<Vec<f64>>,
    d: Vec<Vec<f64>>,
    t: Vec<Vec<f64>>,
}

fn to_matrix(rows: &[Vec<f64>], label: &str) -> Result<DMatrix<f64>, CliError> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(CliError::Config(format!("matrices.{label}: empty")));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(CliError::Config(format!("matrices.{label}: ragged rows")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// `verify`: re-check a user-supplied matrix set against the five existence
/// conditions at a print-rounding tolerance.
pub fn run_verify(config: &ProjectConfig, matrices: &Path, tol: f64) -> Result<(), CliError> {
    let text = std::fs::read_to_string(matrices)
        .map_err(|e| CliError::Config(format!("{}: {e}", matrices.display())))?;
    let file: MatrixFile =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("matrix file: {e}")))?;
    let set = file.matrices;

    let design = plant(config, config.modes.n_design)?;
    let sliding = sliding_spec(config, &design)?;
    let f = functional_gain(&design, &sliding).map_err(classify)?;

    let n = to_matrix(&set.n, "n")?;
    let order = n.nrows();
    let l = to_matrix(&set.l, "l")?;
    let g = to_matrix(&set.g, "g")?;
    let d = to_matrix(&set.d, "d")?;
    let t = to_matrix(&set.t, "t")?;
    let m = design.dim();
    if n.ncols() != order || l.nrows() != order || l.ncols() != 2 {
        return Err(CliError::Config("matrices.n/l: inconsistent order".into()));
    }
    if t.nrows() != order || t.ncols() != m {
        return Err(CliError::Config(format!(
            "matrices.t: expected {order} x {m}"
        )));
    }
    if set.h.len() != order
        || g.nrows() != 2
        || g.ncols() != 2
        || d.nrows() != 2
        || d.ncols() != order
    {
        return Err(CliError::Config("matrices.h/g/d: wrong dimensions".into()));
    }

    let f_realized = &g * &design.c + &d * &t;
    let spec = ObserverSpec {
        order,
        n_design: design.n,
        n,
        l,
        h: DVector::from_row_slice(&set.h),
        g,
        d,
        t,
        f: f.matrix,
        f_realized,
    };
    let report = verify_conditions(&design, &spec);
    print!("{report}");
    let failures = print_verdicts(&report, tol);
    if failures == 0 {
        println!("verdict = pass");
        Ok(())
    } else {
        println!("verdict = fail");
        Err(CliError::VerificationFailed(failures))
    }
}

/// Prints one pass/fail line per condition; returns the failure count.
fn print_verdicts(report: &ConditionReport<f64>, tol: f64) -> usize {
    let checks: [(&str, bool); 6] = [
        ("condition_1_hurwitz", report.hurwitz_margin < 0.0),
        ("condition_2_sylvester", report.sylvester_residual <= tol),
        ("condition_3_input_map", report.input_residual <= tol),
        ("condition_4_output_map", report.output_residual <= tol),
        ("condition_5_order", report.order >= report.rank_f_minus_gc),
        ("composite_stability", report.composite_max_re < 0.0),
    ];
    let mut failures = 0;
    for (name, ok) in checks {
        println!("{name} = {}", if ok { "pass" } else { "fail" });
        if !ok {
            failures += 1;
        }
    }
    failures
}

/// One axis of a sweep: a parameter name and its values.
pub struct SweepAxis {
    pub param: String,
    pub values: Vec<f64>,
}

fn apply_param(config: &mut ProjectConfig, param: &str, value: f64) -> Result<(), CliError> {
    match param {
        "k1" => config.controller.k1 = value,
        "k2" => config.controller.k2 = value,
        "dt" => config.simulation.dt = value,
        "t_final" => config.simulation.t_final = value,
        "zeta" => config.beam.damping_ratio = value,
        "theta_d" => config.simulation.theta_d = value,
        "band_sigma" => config.simulation.band_sigma = value,
        "boundary_layer" => config.controller.boundary_layer = Some(value),
        other => {
            return Err(CliError::Config(format!(
                "sweep: unknown parameter `{other}` \
                 (supported: k1, k2, dt, t_final, zeta, theta_d, band_sigma, boundary_layer)"
            )));
        }
    }
    Ok(())
}

/// `sweep`: the cross product of the axes, one simulation per combination,
/// run concurrently, one trace file each.
pub fn run_sweep(config: &ProjectConfig, axes: &[SweepAxis]) -> Result<(), CliError> {
    if axes.is_empty() {
        return Err(CliError::Config(
            "sweep: at least one --param/--values pair is required".into(),
        ));
    }

    // Build every combination up front so bad parameters fail before any
    // simulation starts.
    let mut combos: Vec<Vec<(String, f64)>> = vec![vec![]];
    for axis in axes {
        if axis.values.is_empty() {
            return Err(CliError::Config(format!(
                "sweep: no values given for `{}`",
                axis.param
            )));
        }
        let mut next = Vec::with_capacity(combos.len() * axis.values.len());
        for combo in &combos {
            for &value in &axis.values {
                let mut extended = combo.clone();
                extended.push((axis.param.clone(), value));
                next.push(extended);
            }
        }
        combos = next;
    }

    let mut runs = Vec::with_capacity(combos.len());
    for combo in &combos {
        let mut run_config = config.clone();
        let mut name_parts = Vec::with_capacity(combo.len());
        for (param, value) in combo {
            apply_param(&mut run_config, param, *value)?;
            name_parts.push(format!("{param}_{value}"));
        }
        run_config
            .validate()
            .map_err(|e| CliError::Config(format!("sweep combination {name_parts:?}: {e}")))?;
        runs.push((name_parts.join("_"), run_config));
    }

    let scenario = config.simulation.scenario;
    let mode = config.simulation.mode;
    let results: Vec<(String, Result<(), CliError>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = runs
            .iter()
            .map(|(name, run_config)| {
                scope.spawn(move || {
                    let result = run_simulation(run_config, scenario, mode)?;
                    let stem = format!("sweep_{name}");
                    let path = out_path(run_config, &format!("{stem}.csv"));
                    output::write_atomic(
                        &path,
                        &output::trace_csv(&result, run_config.modes.n_plant),
                    )?;
                    let summary = output::summary_text(
                        scenario.name(),
                        mode.name(),
                        run_config.simulation.dt,
                        run_config.simulation.t_final,
                        &result.summary,
                    );
                    let summary_path = out_path(run_config, &format!("{stem}_summary.txt"));
                    output::write_atomic(&summary_path, &summary)?;
                    Ok(())
                })
            })
            .collect();
        runs.iter()
            .zip(handles)
            .map(|((name, _), handle)| {
                (name.clone(), handle.join().expect("sweep worker panicked"))
            })
            .collect()
    });

    let mut first_failure: Option<CliError> = None;
    for (name, outcome) in results {
        match outcome {
            Ok(()) => println!("sweep {name}: ok"),
            Err(e) => {
                println!("sweep {name}: FAILED ({e})");
                if first_failure.is_none() {
                    first_failure = Some(e);
                }
            }
        }
    }
    match first_failure {
        None => Ok(()),
        Some(e) => Err(e),
    }
}
