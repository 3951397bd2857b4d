//! Runs a [`Scenario`] and writes its trajectory CSV and text report.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use bundleobs::actions::Point;
use bundleobs::bundle::sphere_split;
use bundleobs::lie::{exp, log, AlgebraElement, GroupElement};
use bundleobs::observer::{simulate, ObserverRun, ObserverState, Signals};
use bundleobs::random::{random_point, random_se3, random_so3, random_unit_vector, random_vector3, rng, SampleRng};
use bundleobs::systems::{
    attitude_problem, attitude_test_rate, chain_poses, sample_landmarks, slam_discrete_recover,
    slam_localization_problem, slam_test_velocity, sphere_demo, sphere_test_input, sphere_vector_field, SlamSequence,
    SphereInput,
};
use bundleobs::Error;
use nalgebra::{DMatrix, Vector3, Vector4};

use crate::scenario::{ConfigError, Scenario, SystemKind};

/// Per-step increase of `V^e` tolerated by the monotonicity verdict.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Size of the pose increments of the discrete SLAM sequence.
pub const SLAM_DISCRETE_STEP: f64 = 0.2;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Blowup { t: f64 },
    Failed(Error),
    Io(io::Error),
}

impl RunError {
    /// 2 for configuration problems, 3 for numerical blowup, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Blowup { .. } => 3,
            RunError::Failed(_) | RunError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration error: {e}"),
            RunError::Blowup { t } => write!(f, "numerical blowup at t = {t}"),
            RunError::Failed(e) => write!(f, "simulation failed: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::NumericalBlowup { t } => RunError::Blowup { t },
            other => RunError::Failed(other),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

/// Numeric trajectory: `t, state_*, estimate_*, Ve, zeta_e_norm`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub state_dim: usize,
    pub estimate_dim: usize,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(state_dim: usize, estimate_dim: usize) -> Self {
        Self {
            state_dim,
            estimate_dim,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, t: f64, state: &[f64], estimate: &[f64], cost: f64, zeta_norm: f64) -> Result<(), RunError> {
        let mut row = Vec::with_capacity(3 + state.len() + estimate.len());
        row.push(t);
        row.extend_from_slice(state);
        row.extend_from_slice(estimate);
        row.push(cost);
        row.push(zeta_norm);
        if row.iter().any(|x| !x.is_finite()) {
            return Err(RunError::Blowup { t });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend((0..self.state_dim).map(|i| format!("state_{i}")));
        h.extend((0..self.estimate_dim).map(|i| format!("estimate_{i}")));
        h.extend(["Ve".to_string(), "zeta_e_norm".to_string()]);
        h
    }

    /// Writes the CSV with 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.header())?;
        for row in &self.rows {
            out.write_record(row.iter().map(|x| format!("{x:.16e}")))?;
        }
        out.flush()
    }
}

/// Summary written to `<name>_report.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub name: String,
    pub system: SystemKind,
    pub final_cost: f64,
    /// Final error: angle (rad) for attitude, twist norm for SLAM.
    pub final_error: Option<(&'static str, f64)>,
    /// `Some(verdict)` where monotonicity of `V^e` is meaningful.
    pub monotone: Option<bool>,
    pub max_cost_increase: Option<f64>,
    pub max_recovery_error: Option<f64>,
    pub max_relative_recovery_error: Option<f64>,
    pub max_chain_error: Option<f64>,
    pub max_reconstruction_error: Option<f64>,
    pub samples: usize,
}

impl Report {
    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "scenario: {}", self.name).unwrap();
        writeln!(s, "system: {}", self.system).unwrap();
        writeln!(s, "samples: {}", self.samples).unwrap();
        writeln!(s, "final_Ve: {:.16e}", self.final_cost).unwrap();
        if let Some((label, v)) = self.final_error {
            writeln!(s, "{label}: {v:.16e}").unwrap();
        }
        match self.monotone {
            Some(m) => writeln!(s, "monotone_Ve: {}", if m { "yes" } else { "no" }).unwrap(),
            None => writeln!(s, "monotone_Ve: n/a").unwrap(),
        }
        let opt = |s: &mut String, label: &str, v: Option<f64>| {
            if let Some(v) = v {
                writeln!(s, "{label}: {v:.16e}").unwrap();
            }
        };
        opt(&mut s, "max_Ve_increase", self.max_cost_increase);
        opt(&mut s, "max_recovery_error", self.max_recovery_error);
        opt(&mut s, "max_relative_recovery_error", self.max_relative_recovery_error);
        opt(&mut s, "max_chain_error", self.max_chain_error);
        opt(&mut s, "max_reconstruction_error", self.max_reconstruction_error);
        s
    }
}

/// Seeded noise, one draw per integration step so that the signal is
/// piecewise constant in time and independent of the integrator's stages.
struct NoiseTable {
    step: f64,
    draws: Vec<Vec<Vector3<f64>>>,
}

impl NoiseTable {
    fn new(r: &mut SampleRng, amplitude: f64, steps: usize, per_step: usize, step: f64) -> Self {
        let draws = (0..=steps)
            .map(|_| {
                (0..per_step)
                    .map(|_| {
                        if amplitude > 0.0 {
                            random_vector3(r, amplitude)
                        } else {
                            Vector3::zeros()
                        }
                    })
                    .collect()
            })
            .collect();
        Self { step, draws }
    }

    fn at(&self, t: f64) -> &[Vector3<f64>] {
        let k = ((t / self.step) + 1e-9).floor().max(0.0) as usize;
        &self.draws[k.min(self.draws.len() - 1)]
    }
}

fn flat(g: &GroupElement<f64>) -> Vec<f64> {
    g.matrix().iter().copied().collect()
}

fn observer_table(run: &ObserverRun<f64>, dim: usize) -> Result<Table, RunError> {
    let mut table = Table::new(dim, dim);
    for s in &run.samples {
        table.push(s.t, &flat(&s.state), &flat(&s.estimate), s.cost, s.zeta_e.norm())?;
    }
    Ok(table)
}

fn observer_report(s: &Scenario, run: &ObserverRun<f64>, error: (&'static str, f64)) -> Report {
    let inc = run.max_cost_increase();
    Report {
        name: s.name.clone(),
        system: s.system,
        final_cost: run.last().cost,
        final_error: Some(error),
        monotone: Some(run.is_monotone(MONOTONE_SLACK)),
        max_cost_increase: Some(if run.samples.len() > 1 { inc } else { 0.0 }),
        max_recovery_error: None,
        max_relative_recovery_error: None,
        max_chain_error: None,
        max_reconstruction_error: None,
        samples: run.samples.len(),
    }
}

fn attitude(s: &Scenario) -> Result<(Table, Report), RunError> {
    let prob = attitude_problem::<f64>()?;
    let mut r = rng(s.seed);
    let truth = random_so3(&mut r);
    let axis = match s.error_axis {
        Some(a) => a,
        None => random_unit_vector(&mut r),
    };
    let e0 = exp(&AlgebraElement::so3(axis * s.error_angle_deg.to_radians()));
    let estimate = &e0.inverse() * &truth;
    let cfg = &s.integrator;
    let rate_noise = NoiseTable::new(&mut r, s.noise, cfg.steps(), 1, cfg.step);
    let dir_noise = NoiseTable::new(&mut r, s.noise, cfg.steps(), 2, cfg.step);
    let measured = |t: f64| attitude_test_rate(t) + AlgebraElement::so3(rate_noise.at(t)[0]);
    let sensor = |t: f64, g: &GroupElement<f64>| -> bundleobs::Result<Point<f64>> {
        match prob.output_of(g)? {
            Point::Directions(d) => Ok(Point::Directions(
                d.iter()
                    .zip(dir_noise.at(t))
                    .map(|(y, n)| (y + n).normalize())
                    .collect(),
            )),
            other => Ok(other),
        }
    };
    let run = simulate(
        &prob,
        cfg,
        truth,
        ObserverState::new(estimate, s.gain)?,
        &Signals {
            truth: &attitude_test_rate,
            measured: &measured,
            sensor: &sensor,
        },
    )?;
    let angle = run.last().error.angle();
    Ok((
        observer_table(&run, 9)?,
        observer_report(s, &run, ("final_error_angle_rad", angle)),
    ))
}

fn twist(v: &[f64; 6]) -> AlgebraElement<f64> {
    AlgebraElement::se3(Vector3::new(v[0], v[1], v[2]), Vector3::new(v[3], v[4], v[5]))
}

fn slam_continuous(s: &Scenario) -> Result<(Table, Report), RunError> {
    let mut r = rng(s.seed);
    let map = sample_landmarks::<f64>(&mut r, s.landmarks)?;
    let prob = slam_localization_problem(map)?;
    let truth = random_se3(&mut r, 1.0);
    let estimate = &exp(&twist(&s.error_twist)).inverse() * &truth;
    let cfg = &s.integrator;
    let rate_noise = NoiseTable::new(&mut r, s.noise, cfg.steps(), 2, cfg.step);
    let lm_noise = NoiseTable::new(&mut r, s.noise, cfg.steps(), s.landmarks, cfg.step);
    let measured = |t: f64| {
        let n = rate_noise.at(t);
        slam_test_velocity(t) + AlgebraElement::se3(n[0], n[1])
    };
    let sensor = |t: f64, g: &GroupElement<f64>| -> bundleobs::Result<Point<f64>> {
        match prob.output_of(g)? {
            Point::Landmarks(l) => Ok(Point::Landmarks(
                l.iter().zip(lm_noise.at(t)).map(|(y, n)| y + n.push(0.0)).collect(),
            )),
            other => Ok(other),
        }
    };
    let run = simulate(
        &prob,
        cfg,
        truth,
        ObserverState::new(estimate, s.gain)?,
        &Signals {
            truth: &slam_test_velocity,
            measured: &measured,
            sensor: &sensor,
        },
    )?;
    let twist_norm = log(&run.last().error)?.norm();
    Ok((
        observer_table(&run, 16)?,
        observer_report(s, &run, ("final_error_twist_norm", twist_norm)),
    ))
}

fn columns(m: &DMatrix<f64>) -> Vec<Vector4<f64>> {
    m.column_iter().map(|c| Vector4::new(c[0], c[1], c[2], c[3])).collect()
}

fn slam_discrete(s: &Scenario) -> Result<(Table, Report), RunError> {
    let seq = SlamSequence::<f64>::synthetic(s.seed, s.steps, s.landmarks, SLAM_DISCRETE_STEP)?;
    let mut r = rng(s.seed ^ 0x9e37_79b9_7f4a_7c15);
    let observations: Vec<DMatrix<f64>> = seq
        .observations
        .iter()
        .map(|m| {
            let mut m = m.clone();
            if s.noise > 0.0 {
                for mut c in m.column_iter_mut() {
                    let n = random_vector3::<f64>(&mut r, s.noise);
                    c[0] += n.x;
                    c[1] += n.y;
                    c[2] += n.z;
                }
            }
            m
        })
        .collect();
    let truth = seq.relative_poses();
    let mut table = Table::new(16, 16);
    let mut recovered = Vec::with_capacity(truth.len());
    let (mut max_err, mut max_rel) = (0.0f64, 0.0f64);
    for (k, (w, true_pose)) in observations.windows(2).zip(&truth).enumerate() {
        let est = slam_discrete_recover(&w[0], &w[1])?;
        let fit = &w[0] - DMatrix::from_column_slice(4, 4, est.to_homogeneous().as_slice()) * &w[1];
        let cost = fit.norm_squared();
        // gradient of the fit at the recovered pose, seen as a localization problem on M_{k+1}
        let prob = slam_localization_problem(columns(&w[1]))?;
        let zeta = prob.zeta_e_numeric(&est.inverse(), &Point::Landmarks(columns(&w[0])))?;
        let err = est.distance(true_pose);
        max_err = max_err.max(err);
        max_rel = max_rel.max(err / true_pose.to_homogeneous().norm());
        table.push(k as f64, &flat(true_pose), &flat(&est), cost, zeta.norm())?;
        recovered.push(est);
    }
    let chained = chain_poses(&seq.poses[0], &recovered);
    let chain_err = chained
        .iter()
        .zip(&seq.poses)
        .map(|(a, b)| a.distance(b))
        .fold(0.0, f64::max);
    let last_cost = table.rows.last().map(|row| row[row.len() - 2]).unwrap_or(0.0);
    let report = Report {
        name: s.name.clone(),
        system: s.system,
        final_cost: last_cost,
        final_error: None,
        monotone: None,
        max_cost_increase: None,
        max_recovery_error: Some(max_err),
        max_relative_recovery_error: Some(max_rel),
        max_chain_error: Some(chain_err),
        max_reconstruction_error: None,
        samples: table.rows.len(),
    };
    Ok((table, report))
}

fn sphere(s: &Scenario) -> Result<(Table, Report), RunError> {
    let mut r = rng(s.seed);
    let Point::R3(q0) = random_point::<f64>(&mut r, bundleobs::actions::PointKind::R3) else {
        unreachable!("R3 sample")
    };
    let run = sphere_demo(&s.integrator, q0, &sphere_test_input)?;
    let mut table = Table::new(3, 3);
    let mut worst = 0.0f64;
    for smp in &run {
        let rebuilt = smp.frame.rotation() * Vector3::x() * smp.radius;
        let u: SphereInput<f64> = sphere_test_input(smp.t);
        let v = sphere_vector_field(&Point::R3(smp.q), &u)?;
        let (_, ver) = sphere_split(&smp.q, &Vector3::new(v[0], v[1], v[2]))?;
        worst = worst.max(smp.reconstruction_error);
        table.push(
            smp.t,
            smp.q.as_slice(),
            rebuilt.as_slice(),
            smp.reconstruction_error.powi(2),
            ver.norm(),
        )?;
    }
    let last = run.last().expect("initial sample");
    let report = Report {
        name: s.name.clone(),
        system: s.system,
        final_cost: last.reconstruction_error.powi(2),
        final_error: Some(("final_radius_error", (last.q.norm() - last.radius).abs())),
        monotone: None,
        max_cost_increase: None,
        max_recovery_error: None,
        max_relative_recovery_error: None,
        max_chain_error: None,
        max_reconstruction_error: Some(worst),
        samples: run.len(),
    };
    Ok((table, report))
}

/// Runs a scenario in memory.
pub fn simulate_scenario(s: &Scenario) -> Result<(Table, Report), RunError> {
    match s.system {
        SystemKind::Attitude => attitude(s),
        SystemKind::SlamContinuous => slam_continuous(s),
        SystemKind::SlamDiscrete => slam_discrete(s),
        SystemKind::SphereSplitDemo => sphere(s),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub trajectory: PathBuf,
    pub report_path: PathBuf,
    pub report: Report,
}

/// Output directory: `--out-dir` if given, else the scenario's `output` key, else `.`.
pub fn output_dir(s: &Scenario, out_dir: Option<&Path>) -> PathBuf {
    out_dir
        .map(Path::to_path_buf)
        .or_else(|| s.output.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Runs a scenario and writes `<name>_trajectory.csv` and `<name>_report.txt`.
pub fn run_scenario(s: &Scenario, out_dir: Option<&Path>) -> Result<Outputs, RunError> {
    let (table, report) = simulate_scenario(s)?;
    let dir = output_dir(s, out_dir);
    fs::create_dir_all(&dir)?;
    let trajectory = dir.join(format!("{}_trajectory.csv", s.name));
    table.write_csv(BufWriter::new(fs::File::create(&trajectory)?))?;
    let report_path = dir.join(format!("{}_report.txt", s.name));
    fs::write(&report_path, report.render())?;
    Ok(Outputs {
        trajectory,
        report_path,
        report,
    })
}
