//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed; exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use bundleobs::actions::{check_generator_equivariance, Point, PointKind, SlamAction};
use bundleobs::bundle::{
    associated_section_from_output, givens_section, reduce_system, split_tangent, PoseSection, SlamSection,
};
use bundleobs::lie::{exp, log, AlgebraElement, GroupElement};
use bundleobs::random::{random_point, random_so3, random_unit_vector, random_vector3, rng};
use bundleobs::systems::{
    attitude_equivariance, landmark_matrix, slam_discrete_recover, slam_equivariance, slam_inverse_pose_rate,
    slam_pose_output, slam_vector_field, SlamInput, SlamSequence,
};
use bundleobs::Error;
use bundleobs_sim::audit::{audited_actions, autonomy_config, autonomy_pair, gradient};
use bundleobs_sim::{simulate_scenario, Scenario};
use nalgebra::{DMatrix, DVector, Vector3, Vector4};

const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        o.detail.push_str(&format!(", runtime {took:.2?} (limit {limit:?})"));
        o.pass &= took < limit;
    }
    o
}

fn exp_log_roundtrip() -> Outcome {
    const TOL: f64 = 1e-9;
    let mut r = rng(SEED);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let axis = random_unit_vector::<f64>(&mut r);
        let angle = (random_vector3::<f64>(&mut r, 0.5).x + 0.5) * (PI - 0.1);
        let zeta = if i % 2 == 0 {
            AlgebraElement::so3(axis * angle)
        } else {
            AlgebraElement::se3(random_vector3(&mut r, 2.0), axis * angle)
        };
        worst = worst.max((log(&exp(&zeta)).unwrap() - zeta).norm());
    }
    outcome(
        worst <= TOL,
        format!("max |log(exp z) - z| = {worst:.2e} (tol {TOL:.0e})"),
    )
}

fn system_equivariance() -> Outcome {
    const TOL: f64 = 1e-10;
    let (avf, aout) = attitude_equivariance::<f64>(100, SEED).unwrap();
    let (svf, sout) = slam_equivariance::<f64>(6, 100, SEED).unwrap();
    let worst = avf.max(aout).max(svf).max(sout);
    outcome(
        worst <= TOL,
        format!("attitude {avf:.1e}/{aout:.1e}, slam {svf:.1e}/{sout:.1e} (tol {TOL:.0e})"),
    )
}

fn generator_equivariance() -> Outcome {
    const TOL: f64 = 1e-8;
    let worst = audited_actions()
        .iter()
        .map(|a| check_generator_equivariance(a.as_ref(), 100, SEED).unwrap())
        .fold(0.0, f64::max);
    outcome(worst <= TOL, format!("max residual {worst:.2e} (tol {TOL:.0e})"))
}

fn error_autonomy() -> (Outcome, Outcome) {
    const GAP_TOL: f64 = 1e-6;
    const RATE_TOL: f64 = 1e-3;
    let start = Instant::now();
    let pair = autonomy_pair(SEED, &autonomy_config()).unwrap();
    let took = start.elapsed();
    let limit = Duration::from_secs(10);
    (
        outcome(
            pair.error_gap <= GAP_TOL && took < limit,
            format!(
                "max |e1 - e2|_F = {:.2e} (tol {GAP_TOL:.0e}), runtime {took:.2?} (limit {limit:?})",
                pair.error_gap
            ),
        ),
        outcome(
            pair.lyapunov_residual <= RATE_TOL,
            format!(
                "max relative rate error {:.2e} (tol {RATE_TOL:.0e})",
                pair.lyapunov_residual
            ),
        ),
    )
}

fn gradient_cross_check() -> Outcome {
    const TOL: f64 = 1e-5;
    let rel = gradient(100, SEED).unwrap()[0].value;
    outcome(rel <= TOL, format!("max relative error {rel:.2e} (tol {TOL:.0e})"))
}

fn attitude_convergence() -> Outcome {
    let s =
        Scenario::parse("name = conv\nsystem = attitude\ngain = 1\nstep = 1e-3\nt_final = 20\nerror_angle_deg = 60\n")
            .unwrap();
    let (_, report) = simulate_scenario(&s).unwrap();
    let (_, angle) = report.final_error.unwrap();
    let monotone = report.monotone.unwrap();
    outcome(
        angle < 1e-3 && monotone,
        format!("final angle {angle:.2e} rad (limit 1e-3), monotone {monotone}"),
    )
}

fn givens() -> Outcome {
    const TOL: f64 = 1e-12;
    const BASE_TOL: f64 = 1e-10;
    let mut r = rng(SEED);
    let (mut rec, mut orth, mut base) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let Point::R3(q) = random_point::<f64>(&mut r, PointKind::R3) else {
            unreachable!()
        };
        let (radius, rot) = givens_section(&q).unwrap();
        rec = rec.max((q - rot.rotation() * Vector3::x() * radius).norm());
        orth = orth
            .max(rot.orthogonality_defect())
            .max((rot.rotation().determinant() - 1.0).abs());
        let g: GroupElement<f64> = random_so3(&mut r);
        let (moved, _) = givens_section(&(g.rotation() * q)).unwrap();
        base = base.max((moved - radius).abs());
    }
    outcome(
        rec <= TOL && orth <= TOL && base <= BASE_TOL,
        format!("reconstruction {rec:.1e}, SO(3) defect {orth:.1e} (tol {TOL:.0e}); base drift {base:.1e} (tol {BASE_TOL:.0e})"),
    )
}

fn slam_recovery() -> Outcome {
    const TOL: f64 = 1e-9;
    let seq = SlamSequence::<f64>::synthetic(SEED, 50, 6, 0.2).unwrap();
    let truth = seq.relative_poses();
    let worst = seq
        .recover()
        .unwrap()
        .iter()
        .zip(&truth)
        .map(|(a, b)| a.distance(b))
        .fold(0.0, f64::max);
    let flat: Vec<Vector4<f64>> = (0..6)
        .map(|i| Vector4::new(i as f64, (i * i) as f64 * 0.3, 0.5, 1.0))
        .collect();
    let m = landmark_matrix(&flat);
    let moved = DMatrix::from_column_slice(4, 4, truth[0].to_homogeneous().as_slice()) * &m;
    let rank = matches!(slam_discrete_recover(&moved, &m), Err(Error::RankDeficiency { .. }));
    outcome(
        worst <= TOL && rank && truth.len() == 50,
        format!("max |S - S_rec|_F = {worst:.2e} (tol {TOL:.0e}), coplanar rejected {rank}"),
    )
}

fn slam_split() -> Outcome {
    const TOL: f64 = 1e-8;
    const FD_TOL: f64 = 1e-6;
    let n = 6;
    let mut r = rng(SEED);
    let sec = SlamSection::new(n);
    let fd_sec = associated_section_from_output::<f64>(
        Box::new(SlamAction::new(n)),
        Box::new(slam_pose_output),
        Box::new(PoseSection::new(n)),
        SEED,
    )
    .unwrap();
    let (mut closed, mut fd, mut inv_rate) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let p = random_point::<f64>(&mut r, PointKind::Slam(n));
        let u = SlamInput::<f64>::random(&mut r, n);
        let Point::Slam(s) = &p else { unreachable!() };
        let red = reduce_system(&slam_vector_field, &sec, &p, &u).unwrap();
        let mut expected = DVector::zeros(16 + 4 * n);
        for (i, (l, v)) in s.body_landmarks().iter().zip(&u.landmark_rates).enumerate() {
            let rate = -(u.velocity.hat4() * l) + v.push(0.0);
            expected.fixed_rows_mut::<4>(16 + 4 * i).copy_from(&rate);
        }
        closed = closed
            .max((red.base_rate.clone() - expected).norm())
            .max((red.fiber_rate.clone() - u.velocity.clone()).norm());
        let numeric = split_tangent(&fd_sec, &p, &slam_vector_field(&p, &u).unwrap()).unwrap();
        fd = fd
            .max((numeric.base_rate - red.base_rate).norm())
            .max((numeric.fiber_rate - red.fiber_rate).norm());
        let h = 1e-6;
        let along = |t: f64| (s.pose() * &exp(&u.velocity.scale(t))).inverse().to_homogeneous();
        let diff = (along(h) - along(-h)) / (2.0 * h);
        let formula = slam_inverse_pose_rate(s.pose(), &u.velocity);
        inv_rate = inv_rate.max((formula + u.velocity.hat4() * s.pose().inverse().to_homogeneous()).norm());
        fd = fd.max((diff - formula).norm());
    }
    outcome(
        closed <= TOL && fd <= FD_TOL && inv_rate <= TOL,
        format!("closed form {closed:.1e}, d/dt S^-1 {inv_rate:.1e} (tol {TOL:.0e}); finite-difference split {fd:.1e} (tol {FD_TOL:.0e})"),
    )
}

fn determinism() -> Outcome {
    let text = "name = det\nsystem = attitude\nstep = 1e-2\nt_final = 5\nerror_angle_deg = 45\nnoise = 0.01\n";
    let s = Scenario::parse(text).unwrap();
    let read = || {
        let dir = tempfile::tempdir().unwrap();
        let out = bundleobs_sim::run_scenario(&s, Some(dir.path())).unwrap();
        std::fs::read(out.trajectory).unwrap()
    };
    let (a, b) = (read(), read());
    outcome(
        a == b && !a.is_empty(),
        format!("{} bytes, identical {}", a.len(), a == b),
    )
}

fn main() {
    let one_second = Some(Duration::from_secs(1));
    let ten_seconds = Some(Duration::from_secs(10));
    let (autonomy, lyapunov) = error_autonomy();
    let results = [
        ("exp/log roundtrip", timed(one_second, exp_log_roundtrip)),
        ("system equivariance", timed(one_second, system_equivariance)),
        ("generator Ad-equivariance", timed(None, generator_equivariance)),
        ("error-dynamics autonomy", autonomy),
        ("Lyapunov rate", lyapunov),
        ("gradient cross-check", timed(None, gradient_cross_check)),
        ("attitude convergence", timed(ten_seconds, attitude_convergence)),
        ("Givens section", timed(None, givens)),
        ("discrete SLAM recovery", timed(None, slam_recovery)),
        ("SLAM split", timed(None, slam_split)),
        ("determinism", timed(None, determinism)),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
