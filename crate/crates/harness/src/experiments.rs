//! The experiments: quadratic and cubic comparisons, the three figures, and
//! convergence-order studies.

use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;
use so3_cubics::approx::SecondOrder;
use so3_cubics::reconstruct::FirstOrderCubic;
use so3_cubics::{
    fit_params, integrate_cubic, integrate_quadratic, phi_hat, phi_numeric, reconstruct_cubic,
    so3_distance, taylor2_baseline, ApproxParams, Error, QuadraticIvp, QuadraticTrajectory,
    ReconstructionInput, Rotation, RotationTrajectory, So3Vector,
};

use crate::config::{ExperimentConfig, Format, Initial, Kind};
use crate::error::HarnessError;
use crate::output::{num, write_file, Marker, Plot, Series, Table};

pub const QUADRATIC_REPORT_SCHEMA: &str = "so3-cubics/quadratic-report/1";
pub const CUBIC_REPORT_SCHEMA: &str = "so3-cubics/cubic-report/1";
pub const CONVERGE_REPORT_SCHEMA: &str = "so3-cubics/converge-report/1";

/// Files written by a run and the JSON report (also written when requested).
#[derive(Clone, Debug)]
pub struct RunResult {
    pub files: Vec<PathBuf>,
    pub report: serde_json::Value,
}

fn x0_of(cfg: &ExperimentConfig) -> Result<Rotation, HarnessError> {
    Rotation::try_from(cfg.x0).map_err(|e| HarnessError::Config(format!("x0: {e}")))
}

fn ivp_of(cfg: &ExperimentConfig, delta: f64) -> Result<QuadraticIvp, HarnessError> {
    let [v0, v1, v2] = cfg.initial.resolve(cfg.base, delta);
    Ok(QuadraticIvp::new(
        cfg.interval[0],
        cfg.interval[1],
        v0,
        v1,
        v2,
    )?)
}

/// Approximant parameters fitted to the initial conditions at scale δ.
pub fn fitted_params(cfg: &ExperimentConfig, delta: f64) -> Result<ApproxParams, HarnessError> {
    let [v0, v1, v2] = cfg.initial.resolve(cfg.base, delta);
    Ok(fit_params(cfg.base, delta, v0, v1, v2, cfg.interval[0])?)
}

// ---------------------------------------------------------------------------
// Quadratic comparison (figures 1 and 2)

#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadraticRow {
    pub t: f64,
    pub v: So3Vector,
    pub v1hat: So3Vector,
    pub v2hat: So3Vector,
    pub taylor2: So3Vector,
}

impl QuadraticRow {
    pub fn errors(&self) -> [f64; 3] {
        [
            (self.v - self.v1hat).norm(),
            (self.v - self.v2hat).norm(),
            (self.v - self.taylor2).norm(),
        ]
    }
}

/// Per-approximant values, in the order V̂₁, V̂₂, Taylor2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadraticErrors<T> {
    pub v1hat: T,
    pub v2hat: T,
    pub taylor2: T,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadraticSummary {
    pub c_const: So3Vector,
    pub accel: f64,
    /// max ‖C(t) − C(t₀)‖ and max |c(t) − c(t₀)| over the grid.
    pub conservation_drift: [f64; 2],
    /// sup ‖V'‖ and sup ‖V''‖.
    pub geodesic_gauge: [f64; 2],
    pub max_error: QuadraticErrors<f64>,
    /// First sample time at which each error exceeds the budget.
    pub breach_time: QuadraticErrors<Option<f64>>,
    pub error_budget: f64,
}

#[derive(Clone, Debug)]
pub struct QuadraticRun {
    pub params: ApproxParams,
    pub trajectory: QuadraticTrajectory,
    pub rows: Vec<QuadraticRow>,
    pub summary: QuadraticSummary,
}

/// Integrates V_δ and evaluates V̂₁, V̂₂ and the Taylor baseline on the sample grid.
pub fn compare_quadratic(cfg: &ExperimentConfig) -> Result<QuadraticRun, HarnessError> {
    let ivp = ivp_of(cfg, cfg.delta)?;
    let trajectory = integrate_quadratic(&ivp, cfg.step)?;
    let params = fitted_params(cfg, cfg.delta)?;
    let second = SecondOrder::new(params);
    let rows: Vec<QuadraticRow> = cfg
        .sample_times()
        .into_iter()
        .map(|t| QuadraticRow {
            t,
            v: trajectory.sample_at(t).v,
            v1hat: params.v1(t, 0),
            v2hat: second.v2(t, 0),
            taylor2: taylor2_baseline(&ivp, t),
        })
        .collect();
    let mut max = [0.0f64; 3];
    let mut breach = [None; 3];
    for r in &rows {
        for (k, e) in r.errors().into_iter().enumerate() {
            max[k] = max[k].max(e);
            if breach[k].is_none() && e > cfg.error_budget {
                breach[k] = Some(r.t);
            }
        }
    }
    let (dc, dnorm) = trajectory.conservation_drift();
    let (g1, g2) = trajectory.geodesic_gauge();
    let summary = QuadraticSummary {
        c_const: trajectory.c_const,
        accel: trajectory.accel,
        conservation_drift: [dc, dnorm],
        geodesic_gauge: [g1, g2],
        max_error: QuadraticErrors {
            v1hat: max[0],
            v2hat: max[1],
            taylor2: max[2],
        },
        breach_time: QuadraticErrors {
            v1hat: breach[0],
            v2hat: breach[1],
            taylor2: breach[2],
        },
        error_budget: cfg.error_budget,
    };
    Ok(QuadraticRun {
        params,
        trajectory,
        rows,
        summary,
    })
}

fn quadratic_table(rows: &[QuadraticRow]) -> Table {
    let mut header = vec!["t".to_string()];
    for name in ["v", "v1hat", "v2hat", "taylor2"] {
        for axis in ["x", "y", "z"] {
            header.push(format!("{name}_{axis}"));
        }
    }
    header.extend(["err_v1hat", "err_v2hat", "err_taylor2"].map(String::from));
    let mut table = Table::new(&header);
    for r in rows {
        let mut row = vec![r.t];
        for v in [r.v, r.v1hat, r.v2hat, r.taylor2] {
            row.extend(v.components());
        }
        row.extend(r.errors());
        table.push_numbers(&row);
    }
    table
}

/// (name, colour, dashed, component picker) of one plotted curve.
type Curve = (
    &'static str,
    &'static str,
    bool,
    fn(&QuadraticRow) -> So3Vector,
);

fn quadratic_plot(cfg: &ExperimentConfig, run: &QuadraticRun, marks: &[f64]) -> Plot {
    let p = cfg.projection;
    let curves: [Curve; 4] = [
        ("V (numerical)", "#1f4e9c", false, |r| r.v),
        ("V1hat", "#2a9d3a", false, |r| r.v1hat),
        ("V2hat", "#d1495b", false, |r| r.v2hat),
        ("Taylor2", "#555555", true, |r| r.taylor2),
    ];
    let series = curves
        .iter()
        .map(|(name, color, dashed, pick)| Series {
            name: name.to_string(),
            color,
            dashed: *dashed,
            points: run.rows.iter().map(|r| p.project(pick(r))).collect(),
        })
        .collect();
    let mut markers = Vec::new();
    for &t in marks {
        if let Some(r) = run
            .rows
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
        {
            for (name, color, _, pick) in &curves {
                markers.push(Marker {
                    label: format!("{name} t={t}"),
                    color,
                    at: p.project(pick(r)),
                });
            }
        }
    }
    Plot {
        title: format!(
            "{}: V and its approximants, t in [{}, {}]",
            cfg.kind.name(),
            cfg.interval[0],
            cfg.interval[1]
        ),
        series,
        markers,
    }
}

fn emit_plot(
    cfg: &ExperimentConfig,
    stem: &str,
    plot: &Plot,
    files: &mut Vec<PathBuf>,
) -> Result<(), HarnessError> {
    if cfg.wants(Format::Svg) {
        files.push(write_file(
            &cfg.output_dir,
            &format!("{stem}.svg"),
            &plot.to_svg(),
        )?);
        // The exact plotted numbers accompany every figure.
        files.push(write_file(
            &cfg.output_dir,
            &format!("{stem}_plot.csv"),
            &plot.to_table().to_csv(),
        )?);
    }
    Ok(())
}

fn emit_report(
    cfg: &ExperimentConfig,
    report: &serde_json::Value,
    files: &mut Vec<PathBuf>,
) -> Result<(), HarnessError> {
    if cfg.wants(Format::Json) {
        let text = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
        files.push(write_file(&cfg.output_dir, "report.json", &text)?);
    }
    Ok(())
}

/// Quadratic comparison with figure markers at `marks`.
pub fn run_quadratic(cfg: &ExperimentConfig, marks: &[f64]) -> Result<RunResult, HarnessError> {
    let run = compare_quadratic(cfg)?;
    let mut files = Vec::new();
    if cfg.wants(Format::Csv) {
        files.push(write_file(
            &cfg.output_dir,
            "quadratic.csv",
            &quadratic_table(&run.rows).to_csv(),
        )?);
    }
    emit_plot(
        cfg,
        cfg.kind.name(),
        &quadratic_plot(cfg, &run, marks),
        &mut files,
    )?;
    let report = json!({
        "schema": QUADRATIC_REPORT_SCHEMA,
        "kind": cfg.kind,
        "config": cfg,
        "params": run.params,
        "summary": run.summary,
        "markers": marks,
    });
    emit_report(cfg, &report, &mut files)?;
    Ok(RunResult { files, report })
}

/// V_δ, V̂₁, V̂₂ and Taylor2 on the short interval; dots at t = 0 and t = 2.
pub fn run_figure1(cfg: &ExperimentConfig) -> Result<RunResult, HarnessError> {
    run_quadratic(cfg, &[0.0, 2.0])
}

/// The same comparison on the long interval, annotated at t = 22.5.
pub fn run_figure2(cfg: &ExperimentConfig) -> Result<RunResult, HarnessError> {
    run_quadratic(cfg, &[22.5])
}

// ---------------------------------------------------------------------------
// Cubic comparison (figure 3)

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CubicRow {
    pub t: f64,
    pub x: Rotation,
    pub reconstructed: Option<Rotation>,
    pub x_hat: Option<Rotation>,
}

impl CubicRow {
    /// (Frobenius, angle) from x̂ to x_δ.
    pub fn hat_distance(&self) -> Option<(f64, f64)> {
        self.x_hat.map(|h| so3_distance(&self.x, &h))
    }

    pub fn reconstruction_distance(&self) -> Option<f64> {
        self.reconstructed.map(|r| so3_distance(&self.x, &r).0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CubicSummary {
    pub max_hat_frobenius: Option<f64>,
    pub max_hat_angle: Option<f64>,
    pub max_reconstruction_frobenius: Option<f64>,
    /// (t, frobenius, angle) at integer sample times.
    pub hat_distance_at_integers: Vec<[f64; 3]>,
    pub max_invariant_error: f64,
    /// Why a column is missing, when it is.
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct CubicRun {
    pub params: Option<ApproxParams>,
    pub integrated: RotationTrajectory,
    pub rows: Vec<CubicRow>,
    pub summary: CubicSummary,
}

/// Integrates x_δ, reconstructs it by quadrature and evaluates x̂. With
/// `require_hat` a degenerate B is an error; otherwise the x̂ column is left
/// empty.
pub fn compare_cubic(cfg: &ExperimentConfig, require_hat: bool) -> Result<CubicRun, HarnessError> {
    if require_hat && cfg.delta == 0.0 {
        return Err(Error::DegenerateB.into());
    }
    let ivp = ivp_of(cfg, cfg.delta)?;
    let [t0, t1] = cfg.interval;
    let x0 = x0_of(cfg)?;
    let traj = integrate_quadratic(&ivp, cfg.step)?;
    let integrated = integrate_cubic(x0, &traj, t0, t1, cfg.step)?;
    let mut notes = Vec::new();

    let (params, hat) = match fitted_params(cfg, cfg.delta).and_then(|p| {
        FirstOrderCubic::new(&p, x0)
            .map(|h| (Some(p), Some(h)))
            .map_err(Into::into)
    }) {
        Ok(v) => v,
        Err(e) if require_hat => return Err(e),
        Err(e) => {
            notes.push(format!("x_hat unavailable: {e}"));
            (fitted_params(cfg, cfg.delta).ok(), None)
        }
    };
    let reconstructed = match ReconstructionInput::new(traj, x0).and_then(|i| reconstruct_cubic(&i))
    {
        Ok(r) => Some(r),
        Err(e) if require_hat => return Err(e.into()),
        Err(e) => {
            notes.push(format!("quadrature reconstruction unavailable: {e}"));
            None
        }
    };

    let mut rows = Vec::new();
    for t in cfg.sample_times() {
        rows.push(CubicRow {
            t,
            x: integrated.at(t),
            reconstructed: reconstructed.as_ref().map(|r| r.at(t)),
            x_hat: hat.as_ref().map(|h| h.at(t)).transpose()?,
        });
    }

    let mut invariant = integrated.max_invariant_error();
    for r in &rows {
        for x in [Some(r.x), r.reconstructed, r.x_hat].into_iter().flatten() {
            invariant = invariant
                .max(x.orthogonality_error())
                .max((x.determinant() - 1.0).abs());
        }
    }
    let summary = CubicSummary {
        max_hat_frobenius: max_opt(rows.iter().map(|r| r.hat_distance().map(|d| d.0))),
        max_hat_angle: max_opt(rows.iter().map(|r| r.hat_distance().map(|d| d.1))),
        max_reconstruction_frobenius: max_opt(rows.iter().map(|r| r.reconstruction_distance())),
        hat_distance_at_integers: rows
            .iter()
            .filter(|r| (r.t - r.t.round()).abs() < 1e-9)
            .filter_map(|r| r.hat_distance().map(|(f, a)| [r.t.round(), f, a]))
            .collect(),
        max_invariant_error: invariant,
        notes,
    };
    Ok(CubicRun {
        params,
        integrated,
        rows,
        summary,
    })
}

/// Maximum of the values, or `None` if any is missing.
fn max_opt(mut it: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    it.try_fold(0.0f64, |m, x| Some(m.max(x?)))
}

fn cubic_table(rows: &[CubicRow]) -> Table {
    let header = [
        "t",
        "x_r1_x",
        "x_r1_y",
        "x_r1_z",
        "xhat_r1_x",
        "xhat_r1_y",
        "xhat_r1_z",
        "xrec_r1_x",
        "xrec_r1_y",
        "xrec_r1_z",
        "hat_frobenius",
        "hat_angle",
        "rec_frobenius",
    ];
    let mut table = Table::new(&header);
    let second = |r: Option<Rotation>| r.map_or([f64::NAN; 3], |r| r.row(1).components());
    for r in rows {
        let (f, a) = r.hat_distance().unwrap_or((f64::NAN, f64::NAN));
        let mut row = vec![r.t];
        row.extend(r.x.row(1).components());
        row.extend(second(r.x_hat));
        row.extend(second(r.reconstructed));
        row.extend([f, a, r.reconstruction_distance().unwrap_or(f64::NAN)]);
        table.push_numbers(&row);
    }
    table
}

fn cubic_plot(cfg: &ExperimentConfig, run: &CubicRun) -> Plot {
    let p = cfg.projection;
    let mut series = vec![Series {
        name: "x (numerical), second row".into(),
        color: "#1f4e9c",
        dashed: false,
        points: run.rows.iter().map(|r| p.project(r.x.row(1))).collect(),
    }];
    if run.rows.iter().all(|r| r.x_hat.is_some()) {
        series.push(Series {
            name: "xhat, second row".into(),
            color: "#2a9d3a",
            dashed: false,
            points: run
                .rows
                .iter()
                .map(|r| p.project(r.x_hat.expect("checked").row(1)))
                .collect(),
        });
    }
    let mut markers = Vec::new();
    for r in run.rows.iter().filter(|r| (r.t - r.t.round()).abs() < 1e-9) {
        let label = format!("t={}", r.t.round());
        markers.push(Marker {
            label: label.clone(),
            color: "#d1495b",
            at: p.project(r.x.row(1)),
        });
        if let Some(h) = r.x_hat {
            markers.push(Marker {
                label,
                color: "#d1495b",
                at: p.project(h.row(1)),
            });
        }
    }
    Plot {
        title: format!(
            "{}: second rows of x and xhat, t in [{}, {}]",
            cfg.kind.name(),
            cfg.interval[0],
            cfg.interval[1]
        ),
        series,
        markers,
    }
}

fn run_cubic_with(cfg: &ExperimentConfig, require_hat: bool) -> Result<RunResult, HarnessError> {
    let run = compare_cubic(cfg, require_hat)?;
    let mut files = Vec::new();
    if cfg.wants(Format::Csv) {
        files.push(write_file(
            &cfg.output_dir,
            "cubic.csv",
            &cubic_table(&run.rows).to_csv(),
        )?);
        files.push(write_file(
            &cfg.output_dir,
            "integrated.csv",
            &run.integrated.to_csv(),
        )?);
    }
    emit_plot(cfg, cfg.kind.name(), &cubic_plot(cfg, &run), &mut files)?;
    let report = json!({
        "schema": CUBIC_REPORT_SCHEMA,
        "kind": cfg.kind,
        "config": cfg,
        "params": run.params,
        "rho": run.params.and_then(|p| p.rho()),
        "summary": run.summary,
    });
    emit_report(cfg, &report, &mut files)?;
    Ok(RunResult { files, report })
}

/// Second rows of x_δ and x̂ with markers at integer times.
pub fn run_figure3(cfg: &ExperimentConfig) -> Result<RunResult, HarnessError> {
    run_cubic_with(cfg, true)
}

/// Integrated, reconstructed and (when defined) first-order cubics.
pub fn run_cubic(cfg: &ExperimentConfig) -> Result<RunResult, HarnessError> {
    run_cubic_with(cfg, false)
}

// ---------------------------------------------------------------------------
// Convergence studies

pub const APPROXIMANTS: [&str; 5] = ["v1hat", "v2hat", "taylor2", "xhat", "phihat"];

/// Expected order in δ of each approximant's error; Taylor2 has none.
pub fn expected_order(name: &str) -> Option<i32> {
    match name {
        "v1hat" | "xhat" | "phihat" => Some(2),
        "v2hat" => Some(3),
        _ => None,
    }
}

/// Error series of every approximant for one δ.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaErrors {
    pub delta: f64,
    pub times: Vec<f64>,
    /// One series per entry of [`APPROXIMANTS`].
    pub series: Vec<Vec<f64>>,
    pub max: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub approximant: String,
    pub delta_coarse: f64,
    pub delta_fine: f64,
    pub ratio: f64,
    pub band: Option<[f64; 2]>,
    pub pass: Option<bool>,
}

/// Per-time error series, maxima and convergence ratios.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    pub deltas: Vec<DeltaErrors>,
    pub ratios: Vec<RatioRow>,
}

impl ErrorReport {
    pub fn all_pass(&self) -> bool {
        self.ratios.iter().all(|r| r.pass != Some(false))
    }

    pub fn ratio(&self, approximant: &str) -> Vec<f64> {
        self.ratios
            .iter()
            .filter(|r| r.approximant == approximant)
            .map(|r| r.ratio)
            .collect()
    }
}

/// Errors of V̂₁, V̂₂, Taylor2, x̂ and φ̂ against the integrated solution at scale δ.
pub fn errors_for_delta(cfg: &ExperimentConfig, delta: f64) -> Result<DeltaErrors, HarnessError> {
    let ivp = ivp_of(cfg, delta)?;
    let [t0, t1] = cfg.interval;
    let x0 = x0_of(cfg)?;
    let traj = integrate_quadratic(&ivp, cfg.step)?;
    let x = integrate_cubic(x0, &traj, t0, t1, cfg.step)?;
    let params = fitted_params(cfg, delta)?;
    let second = SecondOrder::new(params);
    let hat = FirstOrderCubic::new(&params, x0)?;
    let input = ReconstructionInput::new(traj, x0)?;
    let times = cfg.sample_times();
    let mut series = vec![Vec::with_capacity(times.len()); APPROXIMANTS.len()];
    for &t in &times {
        let v = input.trajectory.sample_at(t).v;
        series[0].push((v - params.v1(t, 0)).norm());
        series[1].push((v - second.v2(t, 0)).norm());
        series[2].push((v - taylor2_baseline(&ivp, t)).norm());
        series[3].push(so3_distance(&x.at(t), &hat.at(t)?).0);
        series[4].push((phi_numeric(&input, t)? - phi_hat(&params, t)?).abs());
    }
    let max = series
        .iter()
        .map(|s| s.iter().cloned().fold(0.0, f64::max))
        .collect();
    Ok(DeltaErrors {
        delta,
        times,
        series,
        max,
    })
}

/// Runs every δ concurrently and forms ratios between consecutive δ.
///
/// For an error of order p and δ-ratio r the pass band is [0.75, 1.25]·rᵖ,
/// i.e. [3, 5] for p = 2 and [6, 10] for p = 3 when δ halves.
pub fn converge(cfg: &ExperimentConfig) -> Result<ErrorReport, HarnessError> {
    if cfg.deltas.len() < 2 {
        return Err(HarnessError::Config(
            "converge needs at least two deltas".into(),
        ));
    }
    if matches!(cfg.initial, Initial::Absolute { .. }) {
        return Err(HarnessError::Config(
            "converge needs perturbation initial conditions".into(),
        ));
    }
    let results: Vec<Result<DeltaErrors, HarnessError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .deltas
            .iter()
            .map(|&d| scope.spawn(move || errors_for_delta(cfg, d)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let deltas = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut ratios = Vec::new();
    for (k, name) in APPROXIMANTS.iter().enumerate() {
        for w in deltas.windows(2) {
            let ratio = w[0].max[k] / w[1].max[k];
            let r = w[0].delta / w[1].delta;
            let band = expected_order(name).map(|p| [0.75 * r.powi(p), 1.25 * r.powi(p)]);
            ratios.push(RatioRow {
                approximant: name.to_string(),
                delta_coarse: w[0].delta,
                delta_fine: w[1].delta,
                ratio,
                band,
                pass: band.map(|[lo, hi]| (lo..=hi).contains(&ratio)),
            });
        }
    }
    Ok(ErrorReport { deltas, ratios })
}

pub fn run_converge(cfg: &ExperimentConfig) -> Result<(ErrorReport, RunResult), HarnessError> {
    let report = converge(cfg)?;
    let mut files = Vec::new();
    if cfg.wants(Format::Csv) {
        let mut header = vec!["delta".to_string(), "t".to_string()];
        header.extend(APPROXIMANTS.iter().map(|a| format!("err_{a}")));
        let mut series = Table::new(&header);
        let mut maxima = Table::new(&["delta", "approximant", "max_error"]);
        for d in &report.deltas {
            for (i, &t) in d.times.iter().enumerate() {
                let mut row = vec![d.delta, t];
                row.extend(d.series.iter().map(|s| s[i]));
                series.push_numbers(&row);
            }
            for (k, name) in APPROXIMANTS.iter().enumerate() {
                maxima.push(vec![num(d.delta), name.to_string(), num(d.max[k])]);
            }
        }
        let mut ratios = Table::new(&[
            "approximant",
            "delta_coarse",
            "delta_fine",
            "ratio",
            "band_lo",
            "band_hi",
            "pass",
        ]);
        for r in &report.ratios {
            let [lo, hi] = r.band.unwrap_or([f64::NAN; 2]);
            ratios.push(vec![
                r.approximant.clone(),
                num(r.delta_coarse),
                num(r.delta_fine),
                num(r.ratio),
                num(lo),
                num(hi),
                r.pass.map_or(String::new(), |p| p.to_string()),
            ]);
        }
        files.push(write_file(
            &cfg.output_dir,
            "converge_series.csv",
            &series.to_csv(),
        )?);
        files.push(write_file(
            &cfg.output_dir,
            "converge_max.csv",
            &maxima.to_csv(),
        )?);
        files.push(write_file(
            &cfg.output_dir,
            "converge_ratios.csv",
            &ratios.to_csv(),
        )?);
    }
    if cfg.wants(Format::Svg) {
        // log10 of the error series against t, one curve per (approximant, δ).
        let colors = ["#2a9d3a", "#d1495b", "#555555", "#1f4e9c", "#e69f00"];
        let mut plot = Plot {
            title: "converge: log10 error against t".into(),
            ..Plot::default()
        };
        for d in &report.deltas {
            for (k, name) in APPROXIMANTS.iter().enumerate() {
                plot.series.push(Series {
                    name: format!("{name} delta={}", d.delta),
                    color: colors[k],
                    dashed: d.delta != report.deltas[0].delta,
                    points: d
                        .times
                        .iter()
                        .zip(&d.series[k])
                        .map(|(&t, &e)| (t, e.max(1e-300).log10()))
                        .collect(),
                });
            }
        }
        emit_plot(cfg, "converge", &plot, &mut files)?;
    }
    let maxima: Vec<_> = report
        .deltas
        .iter()
        .map(|d| {
            let per: serde_json::Map<_, _> = APPROXIMANTS
                .iter()
                .zip(&d.max)
                .map(|(a, m)| (a.to_string(), json!(m)))
                .collect();
            json!({ "delta": d.delta, "max_error": per })
        })
        .collect();
    let json_report = json!({
        "schema": CONVERGE_REPORT_SCHEMA,
        "kind": Kind::Converge,
        "config": cfg,
        "maxima": maxima,
        "ratios": report.ratios,
        "all_pass": report.all_pass(),
    });
    emit_report(cfg, &json_report, &mut files)?;
    Ok((
        report,
        RunResult {
            files,
            report: json_report,
        },
    ))
}

/// Dispatches on `cfg.kind`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunResult, HarnessError> {
    match cfg.kind {
        Kind::Figure1 => run_figure1(cfg),
        Kind::Figure2 => run_figure2(cfg),
        Kind::QuadraticCompare => run_quadratic(cfg, &[]),
        Kind::Figure3 => run_figure3(cfg),
        Kind::CubicCompare => run_cubic(cfg),
        Kind::Converge => run_converge(cfg).map(|(_, r)| r),
    }
}
