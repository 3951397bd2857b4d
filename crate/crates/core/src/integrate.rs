//! Fixed-step integration on products of matrix Lie groups and vector spaces.
//!
//! Group components advance by composing exponentials so iterates never
//! leave the group; vector components use the matching explicit scheme.
//! [`Method::Rk4Cg`] is the fourth-order commutator-free scheme of
//! Celledoni, Marthinsen and Owren, a Crouch–Grossman type method that
//! freezes the algebra element within each stage.

use nalgebra::DVector;

use crate::lie::{exp, project_to_group, AlgebraElement, GroupElement};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    LieEuler,
    Rk4Cg,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lie_euler" => Ok(Method::LieEuler),
            "rk4_cg" => Ok(Method::Rk4Cg),
            other => Err(Error::InvalidArgument(format!("unknown integrator `{other}`"))),
        }
    }
}

/// Which side the increment multiplies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `ġ = g ξ`, stepped as `g exp(hξ)`.
    Left,
    /// `ġ = ξ g`, stepped as `exp(hξ) g`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T: Real> {
    pub method: Method,
    pub step: T,
    pub t_final: T,
    /// Group components are re-projected every this many steps.
    pub projection_interval: usize,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn new(method: Method, step: T, t_final: T) -> Result<Self> {
        let cfg = Self {
            method,
            step,
            t_final,
            projection_interval: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > T::zero()) || !self.step.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if !(self.t_final >= T::zero()) || !self.t_final.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "t_final must be non-negative, got {}",
                self.t_final
            )));
        }
        if self.projection_interval == 0 {
            return Err(Error::InvalidArgument("projection_interval must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps; `t_final` is rounded to a whole number of steps.
    pub fn steps(&self) -> usize {
        (self.t_final / self.step).round().as_f64() as usize
    }
}

/// `g exp(hξ)` (left) or `exp(hξ) g` (right).
pub fn lie_step<T: Real>(g: &GroupElement<T>, xi: &AlgebraElement<T>, h: T, side: Side) -> GroupElement<T> {
    let inc = exp(&xi.scale(h));
    match side {
        Side::Left => g * &inc,
        Side::Right => &inc * g,
    }
}

/// A point of `G₁ × … × Gₘ × Rⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T: Real> {
    pub groups: Vec<GroupElement<T>>,
    pub sides: Vec<Side>,
    pub vectors: DVector<T>,
}

impl<T: Real> State<T> {
    pub fn new(groups: Vec<(GroupElement<T>, Side)>, vectors: DVector<T>) -> Self {
        let (groups, sides) = groups.into_iter().unzip();
        Self { groups, sides, vectors }
    }

    pub fn groups_only(groups: Vec<(GroupElement<T>, Side)>) -> Self {
        Self::new(groups, DVector::zeros(0))
    }

    pub fn vectors_only(vectors: DVector<T>) -> Self {
        Self::new(Vec::new(), vectors)
    }
}

/// Velocity of a [`State`]: one algebra element per group component.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates<T: Real> {
    pub groups: Vec<AlgebraElement<T>>,
    pub vectors: DVector<T>,
}

impl<T: Real> Rates<T> {
    fn is_finite(&self) -> bool {
        self.groups.iter().all(|g| g.is_finite()) && self.vectors.iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    pub samples: Vec<(T, State<T>)>,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &(T, State<T>) {
        self.samples.last().expect("trajectory always holds the initial state")
    }
}

fn advance<T: Real>(base: &State<T>, incs: &[AlgebraElement<T>], vec_inc: &DVector<T>) -> State<T> {
    let groups = base
        .groups
        .iter()
        .zip(&base.sides)
        .zip(incs)
        .map(|((g, side), xi)| lie_step(g, xi, T::one(), *side))
        .collect();
    State {
        groups,
        sides: base.sides.clone(),
        vectors: &base.vectors + vec_inc,
    }
}

fn combine<T: Real>(terms: &[(T, &Rates<T>)]) -> (Vec<AlgebraElement<T>>, DVector<T>) {
    let first = terms[0].1;
    let mut groups: Vec<AlgebraElement<T>> = first.groups.iter().map(|g| g.scale(T::zero())).collect();
    let mut vectors = DVector::zeros(first.vectors.len());
    for (c, r) in terms {
        for (acc, xi) in groups.iter_mut().zip(&r.groups) {
            *acc = acc.clone() + xi.scale(*c);
        }
        vectors += &r.vectors * *c;
    }
    (groups, vectors)
}

fn state_is_finite<T: Real>(s: &State<T>) -> bool {
    s.vectors.iter().all(|x| x.is_finite()) && s.groups.iter().all(|g| g.matrix().iter().all(|x| x.is_finite()))
}

fn check_rates<T: Real>(r: Rates<T>, t: T, state: &State<T>) -> Result<Rates<T>> {
    if r.groups.len() != state.groups.len() || r.vectors.len() != state.vectors.len() {
        return Err(Error::SizeMismatch {
            left: state.groups.len() + state.vectors.len(),
            right: r.groups.len() + r.vectors.len(),
        });
    }
    if !r.is_finite() {
        return Err(Error::NumericalBlowup { t: t.as_f64() });
    }
    Ok(r)
}

/// One step of size `h` from `(t, y)`.
pub fn step<T, F>(rate: &mut F, method: Method, t: T, y: &State<T>, h: T) -> Result<State<T>>
where
    T: Real,
    F: FnMut(T, &State<T>) -> Result<Rates<T>>,
{
    let mut eval = |t: T, y: &State<T>| -> Result<Rates<T>> { check_rates(rate(t, y)?, t, y) };
    match method {
        Method::LieEuler => {
            let k1 = eval(t, y)?;
            let (g, v) = combine(&[(h, &k1)]);
            Ok(advance(y, &g, &v))
        }
        Method::Rk4Cg => {
            let half = h / T::lit(2.0);
            let twelfth = h / T::lit(12.0);
            let (two, three) = (T::lit(2.0), T::lit(3.0));

            let k1 = eval(t, y)?;
            let (g, v) = combine(&[(half, &k1)]);
            let y2 = advance(y, &g, &v);

            let k2 = eval(t + half, &y2)?;
            let (g, v) = combine(&[(half, &k2)]);
            let y3 = advance(y, &g, &v);

            let k3 = eval(t + half, &y3)?;
            // group stage: Y₄ = Y₂ · exp(h(k₃ − k₁/2)); vector stage: y + h k₃
            let (g, _) = combine(&[(h, &k3), (-half, &k1)]);
            let (_, v) = combine(&[(h, &k3)]);
            let mut y4 = advance(&y2, &g, &DVector::zeros(y.vectors.len()));
            y4.vectors = &y.vectors + v;

            let k4 = eval(t + h, &y4)?;
            let (g_a, _) = combine(&[
                (three * twelfth, &k1),
                (two * twelfth, &k2),
                (two * twelfth, &k3),
                (-twelfth, &k4),
            ]);
            let (g_b, _) = combine(&[
                (-twelfth, &k1),
                (two * twelfth, &k2),
                (two * twelfth, &k3),
                (three * twelfth, &k4),
            ]);
            let sixth = h / T::lit(6.0);
            let (_, v) = combine(&[(sixth, &k1), (two * sixth, &k2), (two * sixth, &k3), (sixth, &k4)]);
            let mid = advance(y, &g_a, &DVector::zeros(y.vectors.len()));
            let mut out = advance(&mid, &g_b, &DVector::zeros(y.vectors.len()));
            out.vectors = &y.vectors + v;
            Ok(out)
        }
    }
}

fn project<T: Real>(state: &mut State<T>) -> Result<()> {
    for g in &mut state.groups {
        *g = project_to_group(&g.matrix(), g.kind())?;
    }
    Ok(())
}

/// Integrates from `t = 0` and records every step.
pub fn integrate_system<T, F>(rate: F, config: &IntegratorConfig<T>, initial: State<T>) -> Result<Trajectory<T>>
where
    T: Real,
    F: FnMut(T, &State<T>) -> Result<Rates<T>>,
{
    let mut samples = Vec::with_capacity(config.steps() + 1);
    integrate_with(rate, config, initial, |t, s| {
        samples.push((t, s.clone()));
        Ok(())
    })?;
    Ok(Trajectory { samples })
}

/// Like [`integrate_system`] but hands each recorded state to `record`.
pub fn integrate_with<T, F, R>(
    mut rate: F,
    config: &IntegratorConfig<T>,
    initial: State<T>,
    mut record: R,
) -> Result<State<T>>
where
    T: Real,
    F: FnMut(T, &State<T>) -> Result<Rates<T>>,
    R: FnMut(T, &State<T>) -> Result<()>,
{
    config.validate()?;
    let h = config.step;
    let mut state = initial;
    record(T::zero(), &state)?;
    for k in 0..config.steps() {
        let t = h * T::lit(k as f64);
        state = step(&mut rate, config.method, t, &state, h)?;
        if !state_is_finite(&state) {
            return Err(Error::NumericalBlowup { t: (t + h).as_f64() });
        }
        if (k + 1) % config.projection_interval == 0 {
            project(&mut state)?;
        }
        record(h * T::lit((k + 1) as f64), &state)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::GroupKind;
    use crate::random::{random_algebra, random_so3, rng};
    use nalgebra::Vector3;

    fn varying(t: f64) -> AlgebraElement<f64> {
        AlgebraElement::so3(Vector3::new(t.sin(), (2.0 * t).cos(), 0.5 + 0.3 * t))
    }

    fn run(method: Method, h: f64, t_final: f64) -> GroupElement<f64> {
        let cfg = IntegratorConfig::new(method, h, t_final).unwrap();
        let init = State::groups_only(vec![(GroupElement::identity(GroupKind::So3), Side::Left)]);
        let traj = integrate_system(
            |t, _| {
                Ok(Rates {
                    groups: vec![varying(t)],
                    vectors: DVector::zeros(0),
                })
            },
            &cfg,
            init,
        )
        .unwrap();
        traj.last().1.groups[0].clone()
    }

    #[test]
    fn zero_increment_is_identity_map() {
        let mut r = rng(1);
        let g: GroupElement<f64> = random_so3(&mut r);
        assert_eq!(lie_step(&g, &AlgebraElement::zero(GroupKind::So3), 0.1, Side::Left), g);
    }

    #[test]
    fn one_parameter_subgroup() {
        let mut r = rng(2);
        let xi = random_algebra::<f64>(&mut r, GroupKind::Se3, 1.0);
        let id = GroupElement::identity(GroupKind::Se3);
        let mut g = id.clone();
        for _ in 0..10 {
            g = lie_step(&g, &xi, 0.01, Side::Right);
        }
        assert!(g.distance(&lie_step(&id, &xi, 0.1, Side::Left)) < 1e-12);
    }

    #[test]
    fn lie_euler_is_first_order() {
        let reference = run(Method::Rk4Cg, 1e-4, 1.0);
        let e1 = run(Method::LieEuler, 1e-2, 1.0).distance(&reference);
        let e2 = run(Method::LieEuler, 5e-3, 1.0).distance(&reference);
        let ratio = e1 / e2;
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn rk4_cg_is_fourth_order_and_beats_euler() {
        let reference = run(Method::Rk4Cg, 1e-4, 1.0);
        let e1 = run(Method::Rk4Cg, 4e-2, 1.0).distance(&reference);
        let e2 = run(Method::Rk4Cg, 2e-2, 1.0).distance(&reference);
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
        let euler = run(Method::LieEuler, 1e-2, 1.0).distance(&reference);
        let rk = run(Method::Rk4Cg, 1e-2, 1.0).distance(&reference);
        assert!(euler >= 10.0 * rk);
    }

    #[test]
    fn right_side_matches_transposed_left() {
        // ġ = ξ g is ḣ = h(−ξ) for h = g⁻¹
        let cfg = IntegratorConfig::new(Method::Rk4Cg, 1e-2, 1.0).unwrap();
        let id = GroupElement::identity(GroupKind::So3);
        let left = integrate_system(
            |t, _| {
                Ok(Rates {
                    groups: vec![-varying(t)],
                    vectors: DVector::zeros(0),
                })
            },
            &cfg,
            State::groups_only(vec![(id.clone(), Side::Left)]),
        )
        .unwrap();
        let right = integrate_system(
            |t, _| {
                Ok(Rates {
                    groups: vec![varying(t)],
                    vectors: DVector::zeros(0),
                })
            },
            &cfg,
            State::groups_only(vec![(id, Side::Right)]),
        )
        .unwrap();
        assert!(left.last().1.groups[0].inverse().distance(&right.last().1.groups[0]) < 1e-12);
    }

    #[test]
    fn vector_components_use_rk4() {
        let cfg = IntegratorConfig::new(Method::Rk4Cg, 0.1, 1.0).unwrap();
        let traj = integrate_system(
            |_, s| {
                Ok(Rates {
                    groups: vec![],
                    vectors: -&s.vectors,
                })
            },
            &cfg,
            State::vectors_only(DVector::from_element(1, 1.0)),
        )
        .unwrap();
        assert!((traj.last().1.vectors[0] - (-1.0f64).exp()).abs() < 1e-6);
        assert_eq!(traj.samples.len(), 11);
    }

    #[test]
    fn zero_rate_gives_constant_trajectory() {
        let cfg = IntegratorConfig::new(Method::LieEuler, 0.1, 0.5).unwrap();
        let mut r = rng(3);
        let g: GroupElement<f64> = random_so3(&mut r);
        let init = State::new(vec![(g.clone(), Side::Left)], DVector::from_element(2, 3.0));
        let traj = integrate_system(
            |_, _| {
                Ok(Rates {
                    groups: vec![AlgebraElement::zero(GroupKind::So3)],
                    vectors: DVector::zeros(2),
                })
            },
            &cfg,
            init.clone(),
        )
        .unwrap();
        for (_, s) in &traj.samples {
            assert!(s.groups[0].distance(&g) < 1e-15);
            assert_eq!(s.vectors, init.vectors);
        }
    }

    #[test]
    fn blowup_reports_time() {
        let cfg = IntegratorConfig::new(Method::LieEuler, 0.1, 1.0).unwrap();
        let err = integrate_system(
            |t, _| {
                Ok(Rates {
                    groups: vec![],
                    vectors: DVector::from_element(1, if t > 0.25 { f64::NAN } else { 0.0 }),
                })
            },
            &cfg,
            State::vectors_only(DVector::zeros(1)),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NumericalBlowup { t } if (t - 0.3).abs() < 1e-12));
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::new(Method::LieEuler, 0.0, 1.0).is_err());
        assert!(IntegratorConfig::new(Method::LieEuler, 0.1, -1.0).is_err());
        assert_eq!("rk4_cg".parse::<Method>().unwrap(), Method::Rk4Cg);
        assert!("rk45".parse::<Method>().is_err());
    }
}
