//! Gradient observers on the symmetry group with autonomous error dynamics.
//!
//! A *left observed* problem has state kinematics `ġ = g ζ`, output
//! `y = ϕ_{g⁻¹}(y₀)` for a left action `ϕ` and group error `e = g g̃⁻¹`. The
//! pre-observer `dg̃/dt = g̃ (ζ − Δ)` with `Δ = −k Ad_{g̃⁻¹} ζ_e` then gives
//! `ė = e (−k ζ_e)`, where `ζ_e` is the left-trivialised gradient of the
//! error cost `V^e` and depends on `e` only. The right observed case is the
//! mirror image: `ġ = ζ g`, right action `ϕ`, `e = g̃⁻¹ g`,
//! `Δ = −k Ad_{g̃} ζ_e` and `ė = (−k ζ_e) e`.
//!
//! In both cases `V̇^e = −k ⟨⟨ζ_e, ζ_e⟩⟩`.

use std::sync::Arc;

use log::warn;

use crate::actions::{GroupAction, Handedness, Point};
use crate::integrate::{integrate_with, IntegratorConfig, Rates, Side, State};
use crate::lie::{adjoint, exp, AlgebraElement, GroupElement, GroupKind, Metric};
use crate::random::{random_group, random_point, rng};
use crate::{Error, Real, Result};

/// Central-difference step of [`ObserverProblem::zeta_e_numeric`].
pub const GRADIENT_STEP: f64 = 1e-6;

/// Step of the Hessian probe run when a problem is built.
pub const HESSIAN_STEP: f64 = 1e-4;

/// Samples used to validate a cost when a problem is built.
pub const VALIDATION_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observed {
    Left,
    Right,
}

impl Observed {
    pub fn side(self) -> Side {
        match self {
            Observed::Left => Side::Left,
            Observed::Right => Side::Right,
        }
    }

    fn handedness(self) -> Handedness {
        match self {
            Observed::Left => Handedness::Left,
            Observed::Right => Handedness::Right,
        }
    }
}

/// Output distance `V^y(a, b)`.
pub type CostFn<T> = Arc<dyn Fn(&Point<T>, &Point<T>) -> Result<T> + Send + Sync>;

/// Closed-form `ζ_e(g̃, y)`.
pub type GradientFn<T> = Arc<dyn Fn(&GroupElement<T>, &Point<T>) -> Result<AlgebraElement<T>> + Send + Sync>;

/// An observer design: output action, reference output, invariant cost and metric.
#[derive(Clone)]
pub struct ObserverProblem<T: Real> {
    observed: Observed,
    output_action: Arc<dyn GroupAction<T>>,
    reference: Point<T>,
    cost: CostFn<T>,
    gradient: Option<GradientFn<T>>,
    metric: Metric<T>,
}

impl<T: Real> std::fmt::Debug for ObserverProblem<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ObserverProblem")
            .field("observed", &self.observed)
            .field("output_action", &self.output_action.name())
            .field("reference", &self.reference)
            .field("analytic_gradient", &self.gradient.is_some())
            .field("metric", &self.metric)
            .finish()
    }
}

impl<T: Real> ObserverProblem<T> {
    /// Validates the design on seeded samples.
    ///
    /// The output action must have the handedness of `observed`, and `y₀`
    /// its point kind. The cost must be symmetric (to 1e-12), ϕ-invariant
    /// (to 1e-10) and vanish at zero error, the tolerances widening to
    /// `1000 ε` for scalars coarser than `f64`. A degenerate critical point at
    /// `I` only logs a warning.
    pub fn new(
        observed: Observed,
        output_action: Arc<dyn GroupAction<T>>,
        reference: Point<T>,
        cost: CostFn<T>,
        metric: Metric<T>,
    ) -> Result<Self> {
        let prob = Self {
            observed,
            output_action,
            reference,
            cost,
            gradient: None,
            metric,
        };
        prob.validate()?;
        let diag = prob.hessian_probe()?;
        let (lo, hi) = diag.iter().fold((T::max_value().unwrap(), T::zero()), |(lo, hi), d| {
            (lo.min(*d), hi.max(*d))
        });
        if !(lo > T::lit(1e-6) * hi) || !(hi > T::zero()) {
            warn!(
                "error cost has a degenerate critical point at the identity (Hessian diagonal {:?})",
                diag.iter().map(|d| d.as_f64()).collect::<Vec<_>>()
            );
        }
        Ok(prob)
    }

    /// Registers a closed-form `ζ_e`, used in place of the numeric gradient.
    pub fn with_gradient(mut self, gradient: GradientFn<T>) -> Self {
        self.gradient = Some(gradient);
        self
    }

    fn validate(&self) -> Result<()> {
        let tol = |base: f64| T::lit(base).max(T::default_epsilon() * T::lit(1e3));
        let a = self.output_action.as_ref();
        let fail = |msg: String| Err(Error::InvalidProblem(msg));
        if a.handedness() != self.observed.handedness() {
            return fail(format!(
                "{:?} observed problem needs a {:?} output action",
                self.observed,
                self.observed.handedness()
            ));
        }
        if self.reference.kind() != a.point_kind() {
            return fail(format!(
                "reference output is {} but the action acts on {}",
                self.reference.kind(),
                a.point_kind()
            ));
        }
        let id = GroupElement::identity(self.kind());
        let at_identity = self.error_cost(&id)?;
        if !(at_identity.abs() <= tol(1e-12)) {
            return fail(format!("error cost at the identity is {at_identity}, not 0"));
        }
        let mut r = rng(crate::random::DEFAULT_SEED);
        for _ in 0..VALIDATION_SAMPLES {
            let x = random_point::<T>(&mut r, a.point_kind());
            let y = random_point::<T>(&mut r, a.point_kind());
            let g = random_group::<T>(&mut r, self.kind());
            let vxy = (self.cost)(&x, &y)?;
            if !(vxy >= T::zero()) {
                return fail(format!("cost is negative: {vxy}"));
            }
            let asym = (vxy - (self.cost)(&y, &x)?).abs();
            if !(asym <= tol(1e-12) * (T::one() + vxy)) {
                return fail(format!("cost is not symmetric (residual {asym})"));
            }
            let moved = (self.cost)(&a.apply(&g, &x)?, &a.apply(&g, &y)?)?;
            if !((moved - vxy).abs() <= tol(1e-10) * (T::one() + vxy)) {
                return fail(format!(
                    "cost is not invariant under {} (residual {})",
                    a.name(),
                    (moved - vxy).abs()
                ));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> GroupKind {
        self.output_action.group_kind()
    }

    pub fn observed(&self) -> Observed {
        self.observed
    }

    pub fn metric(&self) -> &Metric<T> {
        &self.metric
    }

    pub fn reference(&self) -> &Point<T> {
        &self.reference
    }

    pub fn output_action(&self) -> &dyn GroupAction<T> {
        self.output_action.as_ref()
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// `V^y(a, b)`.
    pub fn cost(&self, a: &Point<T>, b: &Point<T>) -> Result<T> {
        (self.cost)(a, b)
    }

    /// The noiseless measurement of state `g`: `ϕ_{g⁻¹}(y₀)`.
    pub fn output_of(&self, g: &GroupElement<T>) -> Result<Point<T>> {
        self.output_action.apply(&g.inverse(), &self.reference)
    }

    /// `e = g g̃⁻¹` (left observed) or `e = g̃⁻¹ g` (right observed).
    pub fn group_error(&self, g: &GroupElement<T>, estimate: &GroupElement<T>) -> Result<GroupElement<T>> {
        match self.observed {
            Observed::Left => g.compose(&estimate.inverse()),
            Observed::Right => estimate.inverse().compose(g),
        }
    }

    /// `V^e(e)`, equal to `V^y(y, ỹ)` whenever `e` is the group error of `(g, g̃)`.
    pub fn error_cost(&self, e: &GroupElement<T>) -> Result<T> {
        let a = self.output_action.as_ref();
        match self.observed {
            Observed::Left => (self.cost)(&self.reference, &a.apply(e, &self.reference)?),
            Observed::Right => (self.cost)(&a.apply(&e.inverse(), &self.reference)?, &self.reference),
        }
    }

    /// `ζ_e` from central differences of the cost along the algebra basis.
    ///
    /// The estimate is perturbed as `g̃⁻¹ exp(sξᵢ)` (left observed) or
    /// `exp(sξᵢ) g̃⁻¹` (right observed); the slopes are dualised by the metric.
    pub fn zeta_e_numeric(&self, estimate: &GroupElement<T>, y: &Point<T>) -> Result<AlgebraElement<T>> {
        let kind = self.kind();
        let h = T::lit(GRADIENT_STEP);
        let inv = estimate.inverse();
        let eval = |xi: &AlgebraElement<T>, s: T| -> Result<T> {
            let step = exp(&xi.scale(s));
            let g = match self.observed {
                Observed::Left => &inv * &step,
                Observed::Right => &step * &inv,
            };
            (self.cost)(&self.output_action.apply(&g, &self.reference)?, y)
        };
        let mut slopes = Vec::with_capacity(kind.dim());
        for i in 0..kind.dim() {
            let xi = AlgebraElement::basis(kind, i);
            slopes.push((eval(&xi, h)? - eval(&xi, -h)?) / (h + h));
        }
        self.metric.dual(kind, &slopes)
    }

    /// Analytic `ζ_e` when registered, numeric otherwise.
    pub fn zeta_e(&self, estimate: &GroupElement<T>, y: &Point<T>) -> Result<AlgebraElement<T>> {
        match &self.gradient {
            Some(f) => f(estimate, y),
            None => self.zeta_e_numeric(estimate, y),
        }
    }

    /// `Δ = −k Ad_{g̃⁻¹} ζ_e` (left observed) or `−k Ad_{g̃} ζ_e` (right observed).
    pub fn innovation(&self, estimate: &GroupElement<T>, y: &Point<T>, gain: T) -> Result<AlgebraElement<T>> {
        let z = self.zeta_e(estimate, y)?;
        let moved = match self.observed {
            Observed::Left => adjoint(&estimate.inverse(), &z)?,
            Observed::Right => adjoint(estimate, &z)?,
        };
        Ok(moved.scale(-gain))
    }

    /// `ζ − Δ`, the algebra velocity of the estimate.
    pub fn preobserver_rate(
        &self,
        estimate: &GroupElement<T>,
        y: &Point<T>,
        zeta: &AlgebraElement<T>,
        gain: T,
    ) -> Result<AlgebraElement<T>> {
        zeta.checked_add(&self.innovation(estimate, y, gain)?.scale(-T::one()))
    }

    /// Diagonal second differences of `V^e` at the identity along the basis.
    pub fn hessian_probe(&self) -> Result<Vec<T>> {
        let kind = self.kind();
        let h = T::lit(HESSIAN_STEP);
        let centre = self.error_cost(&GroupElement::identity(kind))?;
        (0..kind.dim())
            .map(|i| {
                let xi = AlgebraElement::basis(kind, i);
                let plus = self.error_cost(&exp(&xi.scale(h)))?;
                let minus = self.error_cost(&exp(&xi.scale(-h)))?;
                Ok((plus + minus - centre - centre) / (h * h))
            })
            .collect()
    }
}

/// Estimate, gain and most recent innovation of a running observer.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState<T: Real> {
    pub estimate: GroupElement<T>,
    pub gain: T,
    pub innovation: AlgebraElement<T>,
}

impl<T: Real> ObserverState<T> {
    pub fn new(estimate: GroupElement<T>, gain: T) -> Result<Self> {
        if !(gain > T::zero()) || !gain.is_finite() {
            return Err(Error::InvalidArgument(format!("gain must be positive, got {gain}")));
        }
        let innovation = AlgebraElement::zero(estimate.kind());
        Ok(Self {
            estimate,
            gain,
            innovation,
        })
    }
}

/// One recorded instant of an observer simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverSample<T: Real> {
    pub t: T,
    pub state: GroupElement<T>,
    pub estimate: GroupElement<T>,
    pub error: GroupElement<T>,
    pub output: Point<T>,
    /// `V^e(e)`.
    pub cost: T,
    pub zeta_e: AlgebraElement<T>,
    pub innovation: AlgebraElement<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverRun<T: Real> {
    pub samples: Vec<ObserverSample<T>>,
}

impl<T: Real> ObserverRun<T> {
    pub fn last(&self) -> &ObserverSample<T> {
        self.samples.last().expect("a run records its initial state")
    }

    /// Largest one-step increase of `V^e`; non-positive for a monotone run.
    pub fn max_cost_increase(&self) -> T {
        self.samples
            .windows(2)
            .map(|w| w[1].cost - w[0].cost)
            .fold(T::min_value().unwrap(), |a, b| a.max(b))
    }

    /// `V^e` non-increasing up to `slack` per step.
    pub fn is_monotone(&self, slack: T) -> bool {
        self.samples.len() < 2 || self.max_cost_increase() <= slack
    }
}

/// Measurement model `y(t) = h(t, g(t))`.
pub type Sensor<'a, T> = &'a dyn Fn(T, &GroupElement<T>) -> Result<Point<T>>;

/// Signals driving a simulation: the true and measured velocities and the sensor.
pub struct Signals<'a, T: Real> {
    /// Velocity `ζ(t)` of the true state.
    pub truth: &'a dyn Fn(T) -> AlgebraElement<T>,
    /// Feed-forward velocity used by the estimate; often equal to `truth`.
    pub measured: &'a dyn Fn(T) -> AlgebraElement<T>,
    /// Measurement `y(t)` of the true state.
    pub sensor: Sensor<'a, T>,
}

/// Integrates the true state and the pre-observer side by side.
pub fn simulate<T: Real>(
    prob: &ObserverProblem<T>,
    config: &IntegratorConfig<T>,
    initial_state: GroupElement<T>,
    observer: ObserverState<T>,
    signals: &Signals<'_, T>,
) -> Result<ObserverRun<T>> {
    if initial_state.kind() != prob.kind() || observer.estimate.kind() != prob.kind() {
        return Err(Error::KindMismatch {
            expected: prob.kind(),
            got: if initial_state.kind() != prob.kind() {
                initial_state.kind()
            } else {
                observer.estimate.kind()
            },
        });
    }
    let side = prob.observed().side();
    let gain = observer.gain;
    let init = State::groups_only(vec![(initial_state, side), (observer.estimate, side)]);
    let mut samples = Vec::with_capacity(config.steps() + 1);
    integrate_with(
        |t, s| {
            let y = (signals.sensor)(t, &s.groups[0])?;
            Ok(Rates {
                groups: vec![
                    (signals.truth)(t),
                    prob.preobserver_rate(&s.groups[1], &y, &(signals.measured)(t), gain)?,
                ],
                vectors: nalgebra::DVector::zeros(0),
            })
        },
        config,
        init,
        |t, s| {
            let (g, est) = (&s.groups[0], &s.groups[1]);
            let output = (signals.sensor)(t, g)?;
            let error = prob.group_error(g, est)?;
            let zeta_e = prob.zeta_e(est, &output)?;
            let innovation = prob.innovation(est, &output, gain)?;
            samples.push(ObserverSample {
                t,
                state: g.clone(),
                estimate: est.clone(),
                cost: prob.error_cost(&error)?,
                error,
                output,
                zeta_e,
                innovation,
            });
            Ok(())
        },
    )?;
    Ok(ObserverRun { samples })
}

/// [`simulate`] with exact feed-forward and noiseless measurements.
pub fn simulate_exact<T: Real>(
    prob: &ObserverProblem<T>,
    config: &IntegratorConfig<T>,
    initial_state: GroupElement<T>,
    observer: ObserverState<T>,
    velocity: &dyn Fn(T) -> AlgebraElement<T>,
) -> Result<ObserverRun<T>> {
    let sensor = |_: T, g: &GroupElement<T>| prob.output_of(g);
    simulate(
        prob,
        config,
        initial_state,
        observer,
        &Signals {
            truth: velocity,
            measured: velocity,
            sensor: &sensor,
        },
    )
}
