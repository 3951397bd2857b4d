//! Seeded property audits of the library's systems and observers.

use std::fmt;
use std::str::FromStr;

use bundleobs::actions::{
    check_action_laws, check_generator_equivariance, GroupAction, GroupTranslation, Handedness, PointKind, RigidAction,
    RotationAction, SlamAction, SlamPoseAction,
};
use bundleobs::bundle::{check_cross_section, registered_sections};
use bundleobs::integrate::{IntegratorConfig, Method};
use bundleobs::lie::{exp, GroupElement, GroupKind};
use bundleobs::observer::{simulate_exact, ObserverProblem, ObserverRun, ObserverState};
use bundleobs::random::{random_algebra, random_group, random_rotation_with_angle, random_vector3, rng, SampleRng};
use bundleobs::systems::{
    attitude_equivariance, attitude_problem, attitude_problem_numeric, attitude_test_rate, sample_landmarks,
    slam_equivariance, slam_localization_problem,
};
use bundleobs::Result;

pub const EQUIVARIANCE_TOL: f64 = 1e-10;
pub const GENERATOR_TOL: f64 = 1e-8;
pub const GRADIENT_TOL: f64 = 1e-5;
pub const ERROR_DEPENDENCE_TOL: f64 = 1e-8;
pub const AUTONOMY_TOL: f64 = 1e-6;
pub const LYAPUNOV_TOL: f64 = 1e-3;

/// Landmark count used by the SLAM audits.
pub const AUDIT_LANDMARKS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Equivariance,
    Gradient,
    Autonomy,
}

impl Mode {
    /// Default sample count; autonomy samples are pairs of 10 s simulations.
    pub fn default_samples(self) -> usize {
        match self {
            Mode::Equivariance | Mode::Gradient => 100,
            Mode::Autonomy => 3,
        }
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "equivariance" => Ok(Mode::Equivariance),
            "gradient" => Ok(Mode::Gradient),
            "autonomy" => Ok(Mode::Autonomy),
            other => Err(format!(
                "unknown audit mode `{other}` (expected equivariance, gradient or autonomy)"
            )),
        }
    }
}

/// One audited quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tol,
            pass: value <= tol,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<48} {:.3e} (tol {:.0e})",
            if self.pass { "ok" } else { "FAIL" },
            self.name,
            self.value,
            self.tol
        )
    }
}

pub fn run(mode: Mode, samples: usize, seed: u64) -> Result<Vec<Check>> {
    match mode {
        Mode::Equivariance => equivariance(samples, seed),
        Mode::Gradient => gradient(samples, seed),
        Mode::Autonomy => autonomy(samples, seed),
    }
}

/// Every action exposed by the library, with six landmarks where applicable.
pub fn audited_actions() -> Vec<Box<dyn GroupAction<f64>>> {
    let n = AUDIT_LANDMARKS;
    vec![
        Box::new(RotationAction::on_r3()),
        Box::new(RotationAction::on_s2()),
        Box::new(RotationAction::new(Handedness::Left, PointKind::Directions(2)).expect("valid kind")),
        Box::new(RotationAction::new(Handedness::Right, PointKind::Directions(2)).expect("valid kind")),
        Box::new(GroupTranslation::new(GroupKind::So3, Handedness::Left)),
        Box::new(GroupTranslation::new(GroupKind::So3, Handedness::Right)),
        Box::new(GroupTranslation::new(GroupKind::Se3, Handedness::Left)),
        Box::new(GroupTranslation::new(GroupKind::Se3, Handedness::Right)),
        Box::new(RigidAction::new(Handedness::Left, n)),
        Box::new(RigidAction::new(Handedness::Right, n)),
        Box::new(SlamAction::new(n)),
        Box::new(SlamPoseAction::new(n)),
    ]
}

pub fn equivariance(samples: usize, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let (vf, y) = attitude_equivariance::<f64>(samples, seed)?;
    out.push(Check::new("attitude vector field", vf, EQUIVARIANCE_TOL));
    out.push(Check::new("attitude output", y, EQUIVARIANCE_TOL));
    let (vf, y) = slam_equivariance::<f64>(AUDIT_LANDMARKS, samples, seed)?;
    out.push(Check::new("slam vector field", vf, EQUIVARIANCE_TOL));
    out.push(Check::new("slam output", y, EQUIVARIANCE_TOL));
    for a in audited_actions() {
        let (ident, comp) = check_action_laws(a.as_ref(), samples, seed)?;
        out.push(Check::new(
            format!("action laws {}", a.name()),
            ident.max(comp),
            EQUIVARIANCE_TOL,
        ));
        let gen = check_generator_equivariance(a.as_ref(), samples, seed)?;
        out.push(Check::new(format!("generator {}", a.name()), gen, GENERATOR_TOL));
    }
    for (kind, sec) in registered_sections::<f64>(AUDIT_LANDMARKS) {
        let res = check_cross_section(sec.as_ref(), samples, seed)?;
        out.push(Check::new(
            format!("section {} on {kind}", sec.name()),
            res.max(),
            EQUIVARIANCE_TOL,
        ));
    }
    Ok(out)
}

/// `(g, g̃)` pairs sharing the group error `e`, for left observed problems.
fn same_error_pair(e: &GroupElement<f64>, g: &GroupElement<f64>) -> GroupElement<f64> {
    &e.inverse() * g
}

/// Largest `‖ζ_e(g̃₁, y₁) − ζ_e(g̃₂, y₂)‖ / max(‖ζ_e‖, 1)` over pairs with a common error.
fn error_dependence(prob: &ObserverProblem<f64>, samples: usize, seed: u64) -> Result<f64> {
    let mut r = rng(seed);
    let kind = prob.kind();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let e = exp(&random_algebra(&mut r, kind, 1.0));
        let (g1, g2) = (random_group(&mut r, kind), random_group(&mut r, kind));
        let z1 = prob.zeta_e(&same_error_pair(&e, &g1), &prob.output_of(&g1)?)?;
        let z2 = prob.zeta_e(&same_error_pair(&e, &g2), &prob.output_of(&g2)?)?;
        worst = worst.max((z1.clone() - z2).norm() / z1.norm().max(1.0));
    }
    Ok(worst)
}

pub fn gradient(samples: usize, seed: u64) -> Result<Vec<Check>> {
    let analytic = attitude_problem::<f64>()?;
    let numeric = attitude_problem_numeric::<f64>()?;
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let g = random_group(&mut r, GroupKind::So3);
        let est = random_group(&mut r, GroupKind::So3);
        let y = analytic.output_of(&g)?;
        let a = analytic.zeta_e(&est, &y)?;
        let n = numeric.zeta_e(&est, &y)?;
        worst = worst.max((a.clone() - n).norm() / a.norm().max(1e-6));
    }
    let mut out = vec![Check::new(
        "attitude analytic vs numeric (relative)",
        worst,
        GRADIENT_TOL,
    )];
    out.push(Check::new(
        "attitude gradient depends on error only (rel)",
        error_dependence(&analytic, samples, seed)?,
        ERROR_DEPENDENCE_TOL,
    ));
    let map = sample_landmarks::<f64>(&mut rng(seed), AUDIT_LANDMARKS)?;
    let slam = slam_localization_problem(map)?;
    out.push(Check::new(
        "slam gradient depends on error only (rel)",
        error_dependence(&slam, samples, seed)?,
        ERROR_DEPENDENCE_TOL,
    ));
    Ok(out)
}

/// Gap between two attitude runs from different states with a common initial error.
#[derive(Debug, Clone, PartialEq)]
pub struct AutonomyPair {
    pub error_gap: f64,
    /// See [`lyapunov_residual`].
    pub lyapunov_residual: f64,
    pub monotone: bool,
}

pub const AUTONOMY_GAIN: f64 = 1.0;

pub fn autonomy_config() -> IntegratorConfig<f64> {
    IntegratorConfig::new(Method::Rk4Cg, 1e-3, 10.0).expect("valid config")
}

/// Runs one autonomy pair drawn from `seed`: a random error of angle in
/// `[30°, 150°]` and two random true initial attitudes.
pub fn autonomy_pair(seed: u64, config: &IntegratorConfig<f64>) -> Result<AutonomyPair> {
    let prob = attitude_problem::<f64>()?;
    let mut r = rng(seed);
    let angle = (30.0 + 120.0 * rand_angle(&mut r)).to_radians();
    let e0 = random_rotation_with_angle(&mut r, angle);
    let (g1, g2) = (
        random_group(&mut r, GroupKind::So3),
        random_group(&mut r, GroupKind::So3),
    );
    let go = |g: GroupElement<f64>| -> Result<ObserverRun<f64>> {
        let est = same_error_pair(&e0, &g);
        simulate_exact(
            &prob,
            config,
            g,
            ObserverState::new(est, AUTONOMY_GAIN)?,
            &attitude_test_rate,
        )
    };
    let (a, b) = (go(g1)?, go(g2)?);
    let error_gap = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| x.error.distance(&y.error))
        .fold(0.0, f64::max);
    Ok(AutonomyPair {
        error_gap,
        lyapunov_residual: lyapunov_residual(&prob, &a, AUTONOMY_GAIN, config.step)?,
        monotone: a.is_monotone(1e-12) && b.is_monotone(1e-12),
    })
}

/// Uniform in `[0, 1]`.
fn rand_angle(r: &mut SampleRng) -> f64 {
    random_vector3::<f64>(r, 0.5).x + 0.5
}

/// Smallest `⟨ζ_e, ζ_e⟩` at which the Lyapunov rate is compared.
pub const LYAPUNOV_FLOOR: f64 = 1e-8;

/// Largest relative gap between central differences of the recorded `V^e`
/// and `−k ⟨ζ_e, ζ_e⟩`, over interior samples with `⟨ζ_e, ζ_e⟩ > LYAPUNOV_FLOOR`.
pub fn lyapunov_residual(prob: &ObserverProblem<f64>, run: &ObserverRun<f64>, gain: f64, h: f64) -> Result<f64> {
    let s = &run.samples;
    let mut worst = 0.0f64;
    for i in 1..s.len().saturating_sub(1) {
        let sq = prob.metric().inner(&s[i].zeta_e, &s[i].zeta_e)?;
        if sq > LYAPUNOV_FLOOR {
            let fd = (s[i + 1].cost - s[i - 1].cost) / (2.0 * h);
            worst = worst.max((fd + gain * sq).abs() / (gain * sq));
        }
    }
    Ok(worst)
}

pub fn autonomy(samples: usize, seed: u64) -> Result<Vec<Check>> {
    let cfg = autonomy_config();
    let (mut gap, mut lyap, mut mono) = (0.0f64, 0.0f64, true);
    for k in 0..samples as u64 {
        let pair = autonomy_pair(seed.wrapping_add(k), &cfg)?;
        gap = gap.max(pair.error_gap);
        lyap = lyap.max(pair.lyapunov_residual);
        mono &= pair.monotone;
    }
    Ok(vec![
        Check::new("error trajectory independent of state", gap, AUTONOMY_TOL),
        Check::new("dV/dt = -k <zeta_e, zeta_e> (relative)", lyap, LYAPUNOV_TOL),
        Check::new("V^e non-increasing (violations)", if mono { 0.0 } else { 1.0 }, 0.0),
    ])
}
