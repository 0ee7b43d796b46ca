mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surfvortex_core::dynamics::*;
use surfvortex_core::greens::*;
use surfvortex_core::spectral::divergence;
use surfvortex_core::surface::*;
use surfvortex_core::Vec3;

use common::random_point;

fn random_state(rng: &mut impl Rng, strengths: &[f64]) -> VortexState {
    loop {
        let p: Vec<SpherePoint> = strengths.iter().map(|_| random_point(rng)).collect();
        if closest_pair(&p).unwrap().2 > 0.3 {
            return VortexState::new(p, strengths.to_vec()).unwrap();
        }
    }
}

fn round() -> GreensEvaluator {
    GreensEvaluator::new(Arc::new(ConformalMetric::round(16)))
}

fn spheroid() -> GreensEvaluator {
    GreensEvaluator::new(Arc::new(ConformalMetric::spheroid(1.0, 0.8, DEFAULT_DEGREE).unwrap()))
}

fn triaxial() -> GreensEvaluator {
    GreensEvaluator::new(Arc::new(ellipsoid_conformal_factor(1.2, 1.0, 0.8, DEFAULT_DEGREE).unwrap().0))
}

fn moved(st: &VortexState, j: usize, v: &Vec3, t: f64) -> VortexState {
    let mut p = st.positions().to_vec();
    p[j] = p[j].exp_round(&(v * t));
    VortexState::new(p, st.strengths().to_vec()).unwrap()
}

#[test]
fn antipodal_pair_energy() {
    let st = VortexState::new(vec![SpherePoint::NORTH, SpherePoint::SOUTH], vec![1.0, -1.0]).unwrap();
    let h = hamiltonian(&round(), &st).unwrap();
    assert!((h - (robin_standard() - GREEN_CONSTANT)).abs() < 1e-14, "{h}");
}

#[test]
fn round_energy_is_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ev = round();
    let st = random_state(&mut rng, &[1.0, 0.5, -2.0, 0.7]);
    let r = nalgebra::Rotation3::from_euler_angles(0.3, -1.1, 2.0).into_inner();
    let (a, b) = (hamiltonian(&ev, &st).unwrap(), hamiltonian(&ev, &st.transformed(&r)).unwrap());
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn conformal_rule_differs_by_a_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for ev in [spheroid(), triaxial()] {
        let k = [1.0, 0.6, -0.3];
        let (a, b) = (random_state(&mut rng, &k), random_state(&mut rng, &k));
        let direct = hamiltonian(&ev, &a).unwrap() - hamiltonian(&ev, &b).unwrap();
        let rule = hamiltonian_conformal_rule(&ev, &a).unwrap() - hamiltonian_conformal_rule(&ev, &b).unwrap();
        assert!((direct - rule).abs() < 1e-10, "{direct} vs {rule}");
    }
}

#[test]
fn single_round_vortex_is_stationary() {
    let st = VortexState::new(vec![SpherePoint::from_xyz(0.2, 0.4, 0.8)], vec![1.3]).unwrap();
    assert!(vortex_velocities(&round(), &st).unwrap()[0].norm() < 1e-14);
}

#[test]
fn massless_vortex_rejected() {
    let st = VortexState::new(vec![SpherePoint::NORTH, SpherePoint::SOUTH], vec![1.0, 0.0]).unwrap();
    assert!(vortex_velocities(&round(), &st).is_err());
}

#[test]
fn equal_round_pair_rotates_rigidly() {
    let ev = round();
    let st = VortexState::new(
        vec![SpherePoint::from_lat_lon_deg(20.0, 10.0), SpherePoint::from_lat_lon_deg(-35.0, 70.0)],
        vec![1.0, 1.0],
    )
    .unwrap();
    let v = vortex_velocities(&ev, &st).unwrap();
    let (a, b) = (st.positions()[0].vec(), st.positions()[1].vec());
    let normal = a.cross(b).normalize();
    // velocities orthogonal to the great circle through the pair, d|a−b|/dt = 0
    assert!(v[0].vec.cross(&normal).norm() < 1e-12 * v[0].norm().max(1.0));
    assert!(((a - b).dot(&(v[0].vec - v[1].vec))).abs() < 1e-12);

    let traj = integrate_trajectory(&ev, &st, 100.0, 1e-11).unwrap();
    let d0 = chordal_distance(&st.positions()[0], &st.positions()[1]);
    for s in &traj.samples {
        assert!((chordal_distance(&s.positions[0], &s.positions[1]) - d0).abs() < 1e-8);
    }
}

#[test]
fn velocities_solve_the_symplectic_equation() {
    // κ_j h² ω₀(v, ṡ_j) = d_{s_j}H · v against central differences of H
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ev = spheroid();
    let st = random_state(&mut rng, &[1.0, -0.4, 0.7]);
    let vel = vortex_velocities(&ev, &st).unwrap();
    let step = 1e-5;
    for j in 0..3 {
        let s = st.positions()[j];
        let h2 = ev.metric().h(&s).powi(2);
        for _ in 0..3 {
            let v = s.tangent_part(&Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let fd = (hamiltonian(&ev, &moved(&st, j, &v, step)).unwrap() - hamiltonian(&ev, &moved(&st, j, &v, -step)).unwrap())
                / (2.0 * step);
            let omega = st.strengths()[j] * h2 * s.vec().dot(&v.cross(&vel[j].vec));
            assert!((omega - fd).abs() < 1e-6, "vortex {j}: {omega} vs {fd}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn energy_is_constant_along_the_flow(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ev = spheroid();
        let k: Vec<f64> = (0..3).map(|_| {
            let x: f64 = rng.gen_range(0.2..2.0);
            if rng.gen_bool(0.5) { x } else { -x }
        }).collect();
        let st = random_state(&mut rng, &k);
        let g = hamiltonian_gradients(&ev, &st).unwrap();
        let v = vortex_velocities(&ev, &st).unwrap();
        let rate: f64 = g.iter().zip(&v).map(|(g, v)| g.dot(&v.vec)).sum();
        let scale: f64 = g.iter().zip(&v).map(|(g, v)| g.norm() * v.norm()).sum();
        prop_assert!(rate.abs() < 1e-10 * scale.max(1.0));
    }
}

#[test]
fn zero_total_vorticity_paths_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for ev in [spheroid(), triaxial()] {
        let st = random_state(&mut rng, &[1.0, -0.3, -0.7]);
        let full = vortex_velocities(&ev, &st).unwrap();
        let reduced = reduced_velocities(&ev, &st).unwrap();
        for (a, b) in full.iter().zip(&reduced) {
            assert!((a.vec - b.vec).norm() < 1e-8);
        }
        let other = random_state(&mut rng, &[1.0, -0.3, -0.7]);
        let dh = hamiltonian(&ev, &st).unwrap() - hamiltonian(&ev, &other).unwrap();
        let dr = reduced_hamiltonian(&ev, &st).unwrap() - reduced_hamiltonian(&ev, &other).unwrap();
        assert!((dh - dr).abs() < 1e-10);
    }
    let bad = VortexState::new(vec![SpherePoint::NORTH, SpherePoint::SOUTH], vec![1.0, 1.0]).unwrap();
    assert!(reduced_velocities(&spheroid(), &bad).is_err());
}

#[test]
fn plane_chart_matches_intrinsic_velocities() {
    let ev = triaxial();
    let st = VortexState::new(
        vec![
            SpherePoint::from_lat_lon_deg(-20.0, 15.0),
            SpherePoint::from_lat_lon_deg(-50.0, 120.0),
            SpherePoint::from_lat_lon_deg(10.0, -80.0),
        ],
        vec![1.0, 0.5, -1.5],
    )
    .unwrap();
    let intrinsic = vortex_velocities(&ev, &st).unwrap();
    let planar = planar_velocities(&ev, &st).unwrap();
    for (v, w) in intrinsic.iter().zip(&planar) {
        let pushed = stereo_push_forward(&v.base, &v.vec).unwrap();
        let err = ((pushed.x - w.x).powi(2) + (pushed.y - w.y).powi(2)).sqrt();
        assert!(err < 1e-6, "{pushed:?} vs {w:?}");
    }
}

#[test]
fn marker_around_a_unit_vortex() {
    let ev = round();
    let st = VortexState::new(vec![SpherePoint::NORTH], vec![1.0]).unwrap();
    let m = SpherePoint::from_xyz(1.0, 0.0, 0.0);
    let v = marker_velocity(&ev, &m, &st).unwrap();
    assert!((v.norm() - 1.0 / (4.0 * PI)).abs() < 1e-12);
    // counterclockwise seen from above the north pole
    assert!(v.vec.y > 0.0);
    assert!(marker_velocity(&ev, &SpherePoint::NORTH, &st).is_err());
}

#[test]
fn marker_moves_along_streamlines() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ev = triaxial();
    let st = random_state(&mut rng, &[1.0, -0.5, 0.8]);
    let s = SpherePoint::from_xyz(0.3, 0.3, 0.9);
    let v = marker_velocity(&ev, &s, &st).unwrap();
    let step = 1e-5;
    let dpsi = (stream_function(&ev, &s.exp_round(&(v.vec * step)), &st).unwrap()
        - stream_function(&ev, &s.exp_round(&(-v.vec * step)), &st).unwrap())
        / (2.0 * step);
    assert!(dpsi.abs() < 1e-8, "{dpsi}");
}

#[test]
fn marker_circulation_around_a_vortex() {
    // ∮ g̃(v, dℓ) over a small circle around κ = +1 equals 1 − enclosed/Ã
    let ev = spheroid();
    let c = SpherePoint::from_lat_lon_deg(30.0, 40.0);
    let st = VortexState::new(vec![c], vec![1.0]).unwrap();
    let (e1, e2) = c.tangent_frame();
    let r: f64 = 0.01;
    let n = 400;
    let mut circ = 0.0;
    for k in 0..n {
        let a = 2.0 * PI * k as f64 / n as f64;
        let dir = e1 * a.cos() + e2 * a.sin();
        let p = SpherePoint::new(c.vec() * r.cos() + dir * r.sin());
        let tangent = (e2 * a.cos() - e1 * a.sin()) * r.sin();
        let v = marker_velocity(&ev, &p, &st).unwrap();
        circ += ev.metric().h(&p).powi(2) * v.vec.dot(&tangent) * 2.0 * PI / n as f64;
    }
    assert!((circ - 1.0).abs() < 1e-3, "{circ}");
}

#[test]
fn single_vortex_field_symmetries() {
    let s = SpherePoint::from_xyz(0.4, -0.2, 0.7);
    assert!(single_vortex_field(&round(), &s).norm() < 1e-14);
    let ev = spheroid();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let p = random_point(&mut rng);
        let v = single_vortex_field(&ev, &p);
        // tangent to the latitude circle: no z-component
        assert!(v.vec.z.abs() < 1e-8, "{}", v.vec.z);
    }
}

#[test]
fn single_vortex_field_is_area_preserving() {
    // g̃-divergence of X is h⁻² div₀(h² X); test div₀(h² X) on the grid
    let ev = triaxial();
    let metric = ev.metric();
    let grid = metric.grid().clone();
    let flux: Vec<Vec3> = grid
        .points()
        .zip(metric.h2_grid())
        .map(|(p, h2)| single_vortex_field(&ev, &p).vec * *h2)
        .collect();
    let div = divergence(&grid, &flux);
    let scale = flux.iter().map(|f| f.norm()).fold(0.0, f64::max);
    let worst = div.iter().map(|d| d.abs()).fold(0.0, f64::max);
    assert!(worst < 1e-6 * scale.max(1.0), "{worst} (field scale {scale})");
}

#[test]
fn round_three_vortices_conserve_energy_and_momentum() {
    let ev = round();
    let st = VortexState::new(
        vec![
            SpherePoint::from_lat_lon_deg(40.0, 0.0),
            SpherePoint::from_lat_lon_deg(-10.0, 100.0),
            SpherePoint::from_lat_lon_deg(5.0, -130.0),
        ],
        vec![1.0, -0.6, 0.8],
    )
    .unwrap();
    let traj = integrate_trajectory(&ev, &st, 100.0, 1e-10).unwrap();
    let d = &traj.diagnostics;
    assert!(d.max_rel_dh < 1e-8, "{}", d.max_rel_dh);
    assert!(d.max_momentum_drift < 1e-8, "{}", d.max_momentum_drift);
    assert!(d.max_norm_error < 1e-12);
    assert!(d.energy_contract_ok);
    assert_eq!(d.momentum_initial.len(), 3);
    assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
}

#[test]
fn spheroid_pair_conserves_axial_momentum() {
    let ev = spheroid();
    let st = VortexState::new(
        vec![SpherePoint::from_lat_lon_deg(30.0, 0.0), SpherePoint::from_lat_lon_deg(-20.0, 50.0)],
        vec![1.0, -1.0],
    )
    .unwrap();
    let traj = integrate_trajectory(&ev, &st, 20.0, 1e-10).unwrap();
    assert_eq!(traj.diagnostics.momentum_initial.len(), 1);
    assert!(traj.diagnostics.max_momentum_drift < 1e-8, "{}", traj.diagnostics.max_momentum_drift);
    // the raw first moment is not conserved
    let raw = |p: &[SpherePoint]| p[0].vec() - p[1].vec();
    let spread = traj
        .samples
        .iter()
        .map(|s| (raw(&s.positions) - raw(st.positions())).xy().norm())
        .fold(0.0, f64::max);
    assert!(spread > 1e-3);
}

#[test]
fn reversing_strengths_reverses_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ev = triaxial();
    let st = random_state(&mut rng, &[1.0, -0.7, 0.5]);
    let fwd = integrate_trajectory(&ev, &st, 5.0, 1e-12).unwrap();
    let end = VortexState::new(fwd.samples.last().unwrap().positions.clone(), st.strengths().to_vec()).unwrap();
    let back = integrate_trajectory(&ev, &end.reversed(), 5.0, 1e-12).unwrap();
    for (a, b) in back.samples.last().unwrap().positions.iter().zip(st.positions()) {
        assert!(chordal_distance(a, b) < 1e-8);
    }
}

#[test]
fn collision_aborts_with_the_pair() {
    let p = SpherePoint::from_xyz(1.0, 0.0, 0.0);
    let err = VortexState::new(vec![p, SpherePoint::new(p.vec() + Vec3::new(0.0, 1e-9, 0.0))], vec![1.0, 1.0]).unwrap_err();
    assert!(format!("{err}").contains('0'));
}

#[test]
fn momentum_map_by_symmetry() {
    let st = VortexState::new(vec![SpherePoint::NORTH], vec![2.0]).unwrap();
    assert_eq!(momentum_invariants(round().metric(), &st), vec![0.0, 0.0, 2.0]);
    assert_eq!(momentum_invariants(spheroid().metric(), &st).len(), 1);
    assert!(momentum_invariants(triaxial().metric(), &st).is_empty());
}

fn unit_mass(ev: &GreensEvaluator, s: SpherePoint, v: Vec3, kappa: f64) -> MassVortexState {
    let h2 = ev.metric().h(&s).powi(2);
    MassVortexState::new(vec![s], vec![v * h2], vec![1.0], vec![kappa]).unwrap()
}

#[test]
fn massive_vortex_without_circulation_follows_a_geodesic() {
    let ev = spheroid();
    let s0 = SpherePoint::from_lat_lon_deg(20.0, 10.0);
    let v0 = s0.tangent_part(&Vec3::new(0.2, 0.9, 0.4));
    let st = unit_mass(&ev, s0, v0, 0.0);
    let run = integrate_mass_vortices(&ev, &st, 5.0, 1e-12, 0.25, MassOptions::default()).unwrap();
    let geo = geodesic_integrate(ev.metric(), &s0, &TangentVector::new(s0, v0), 5.0, 1e-12).unwrap();
    for s in &run.samples {
        let (g, _) = geo.at(s.t);
        assert!(chordal_distance(&s.positions[0], &g) < 1e-8, "t = {}", s.t);
    }
}

#[test]
fn charged_vortex_circles_on_the_round_sphere() {
    // κ h²(v × s) bends the path into a small circle with cot ρ = κ/(m v)
    let ev = round();
    let (kappa, speed) = (2.0f64, 0.5f64);
    let rho = (speed / kappa).atan();
    let period = 2.0 * PI * rho.sin() / speed;
    let s0 = SpherePoint::from_xyz(1.0, 0.0, 0.0);
    let st = unit_mass(&ev, s0, Vec3::new(0.0, speed, 0.0), kappa);
    let run = integrate_mass_vortices(&ev, &st, period, 1e-12, period / 2.0, MassOptions::default()).unwrap();
    let half = &run.samples[1].positions[0];
    let full = &run.samples.last().unwrap().positions[0];
    assert!((chordal_distance(&s0, half) - 2.0 * rho.sin()).abs() < 1e-8);
    assert!(chordal_distance(&s0, full) < 1e-8);

    // a coarse-tolerance run lands on the same orbit
    let coarse = integrate_mass_vortices(&ev, &st, period, 1e-8, period / 2.0, MassOptions::default()).unwrap();
    assert!(chordal_distance(&coarse.samples[1].positions[0], half) < 1e-6);
}

#[test]
fn mass_vortex_energy_is_conserved() {
    let ev = spheroid();
    let a = SpherePoint::from_lat_lon_deg(25.0, 0.0);
    let b = SpherePoint::from_lat_lon_deg(-15.0, 70.0);
    let st = MassVortexState::new(
        vec![a, b],
        vec![a.tangent_part(&Vec3::new(0.0, 0.3, 0.1)), b.tangent_part(&Vec3::new(0.2, 0.0, -0.2))],
        vec![1.0, 2.0],
        vec![0.8, -1.1],
    )
    .unwrap();
    for robin in [false, true] {
        let opts = MassOptions { robin_self_term: robin };
        let run = integrate_mass_vortices(&ev, &st, 50.0, 1e-11, 1.0, opts).unwrap();
        assert!(run.max_energy_drift < 1e-7, "robin {robin}: {}", run.max_energy_drift);
    }
    assert!(MassVortexState::new(vec![a], vec![Vec3::zeros()], vec![0.0], vec![1.0]).is_err());
}

#[test]
fn dipole_speed_and_round_great_circle() {
    let ev = round();
    let s0 = SpherePoint::from_lat_lon_deg(10.0, 20.0);
    let dir = Vec3::new(0.0, 0.3, 1.0);
    let settings = DipoleSettings {
        t_end: 1.0,
        ..DipoleSettings::default()
    };
    for eps in [0.1, 0.05] {
        let run = dipole_experiment(&ev, &s0, &dir, eps, &settings).unwrap();
        assert!((run.initial_speed - 1.0).abs() < 5.0 * eps);
        // round sphere: exactly ε / sin ε
        assert!((run.initial_speed - eps / eps.sin()).abs() < 1e-9, "{}", run.initial_speed);
        assert!(run.max_plane_distance < 10.0 * settings.tol, "{}", run.max_plane_distance);
    }
    assert!(dipole_experiment(&ev, &s0, &dir, 0.7, &settings).is_err());
}

#[test]
fn dipole_centre_tracks_the_spheroid_geodesic() {
    let ev = spheroid();
    let s0 = SpherePoint::from_lat_lon_deg(15.0, 0.0);
    let dir = Vec3::new(0.0, 1.0, 0.6);
    let settings = DipoleSettings {
        samples: 100,
        ..DipoleSettings::default()
    };
    let report = dipole_sweep(&ev, &s0, &dir, &[0.1, 0.05, 0.025], &settings).unwrap();
    let order = report.fitted_order.unwrap();
    assert!(order >= 1.8, "order {order}: {:?}", report.runs.iter().map(|r| r.max_deviation).collect::<Vec<_>>());
}

#[test]
fn convergence_order_of_exact_powers() {
    let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025].iter().map(|e| (*e, 3.0 * e * e)).collect();
    assert!((convergence_order(&pts).unwrap() - 2.0).abs() < 1e-12);
    assert!(convergence_order(&pts[..1]).is_none());
}

fn pair_family(n: usize) -> Vec<VortexState> {
    (0..n)
        .map(|k| {
            let lat = -30.0 + 8.0 * k as f64;
            let s0 = SpherePoint::from_lat_lon_deg(lat, 0.0);
            dipole_initial_state(&ConformalMetric::round(4), &s0, &Vec3::new(0.0, 1.0, 0.4), 0.15, 1e-12).unwrap()
        })
        .collect()
}

#[test]
fn spheroid_section_lies_on_closed_curves() {
    let ev = spheroid();
    let spec = SectionSpec {
        level: 0.0,
        direction: CrossingDirection::Up,
    };
    let record = poincare_section(&ev, &pair_family(3), &spec, 60.0, 1e-11).unwrap();
    assert!(record.crossings.len() >= 20, "{}", record.crossings.len());
    for c in &record.crossings {
        assert!(c.residual < 1e-9);
        assert!((section_value(&spec, &c.positions)).abs() < 1e-9);
    }
    assert!(record.max_h_deviation < 1e-7, "{}", record.max_h_deviation);
    let dev = closed_curve_deviation(&record, 4);
    assert!(dev < 1e-3, "{dev}");
}

#[test]
fn section_rejects_unbalanced_pairs() {
    let st = VortexState::new(vec![SpherePoint::NORTH, SpherePoint::from_xyz(1.0, 0.0, 0.0)], vec![1.0, 0.5]).unwrap();
    let spec = SectionSpec {
        level: 0.0,
        direction: CrossingDirection::Both,
    };
    assert!(poincare_section(&round(), &[st], &spec, 1.0, 1e-8).is_err());
}
