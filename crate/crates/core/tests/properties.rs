mod common;

use common::{brute_force_team, canonical, q, random_matrix, Q};
use dieout::certificates::certificate;
use dieout::integrator::simulate;
use dieout::linalg;
use dieout::model::{to_f64, ResourceSignal, SimConfig, State, SystemSpec, Trajectory};
use dieout::nullspace::{is_minimal_support, kernel_basis, orient, team, NullspaceError, TeamOptions};
use dieout::trophic::{quadratic_cap, trapping_region, v_dot};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec_from(s: Vec<Vec<Q>>, dprime: usize, rng: &mut ChaCha8Rng) -> SystemSpec {
    let c = (0..s.len()).map(|_| q(rng.gen_range(-5..=5), rng.gen_range(1..=4))).collect();
    SystemSpec::new(c, s, dprime).unwrap()
}

fn random_spec(seed: u64, max_d: usize) -> SystemSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=max_d);
    let dprime = rng.gen_range(1..=d + 1);
    let s = random_matrix(&mut rng, d, dprime);
    spec_from(s, dprime, &mut rng)
}

fn member_set(spec: &SystemSpec) -> std::collections::BTreeSet<Vec<String>> {
    team(spec, TeamOptions::default())
        .unwrap()
        .members
        .iter()
        .map(|m| canonical(m.entries()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn team_members_are_minimal_null_vectors(seed in any::<u64>()) {
        let spec = random_spec(seed, 6);
        let t = team(&spec, TeamOptions::default()).unwrap();
        prop_assert_eq!(t.k, spec.d() - common::rank(&spec.s, spec.dprime()));
        for m in t.members.iter().chain(&t.basis) {
            let prod = linalg::row_times(m.entries(), &spec.s, spec.dprime());
            prop_assert!(prod.iter().all(Zero::is_zero));
        }
        for m in &t.members {
            prop_assert!(m.is_canonical());
            prop_assert!(is_minimal_support(m, &spec).unwrap());
        }
        // members span the kernel
        let rows: Vec<Vec<Q>> = t.members.iter().map(|m| m.entries().to_vec()).collect();
        prop_assert_eq!(common::rank(&rows, spec.d()), t.k);
    }

    #[test]
    fn team_matches_exhaustive_oracle(seed in any::<u64>()) {
        let spec = random_spec(seed, 6);
        prop_assert_eq!(member_set(&spec), brute_force_team(&spec.s, spec.dprime()));
    }

    #[test]
    fn rank_agrees_with_transpose(seed in any::<u64>()) {
        let spec = random_spec(seed, 7);
        let t = linalg::transpose(&spec.s, spec.dprime());
        let r = linalg::rank(&spec.s, spec.dprime());
        prop_assert_eq!(r, linalg::rank(&t, spec.d()));
        prop_assert_eq!(r, common::rank(&spec.s, spec.dprime()));
        prop_assert_eq!(kernel_basis(&spec).len(), spec.d() - r);
    }

    #[test]
    fn team_is_invariant_under_scaling(seed in any::<u64>(), n in 1i64..7, den in 1i64..5, neg in any::<bool>()) {
        let spec = random_spec(seed, 6);
        let alpha = q(if neg { -n } else { n }, den);
        let scaled_s = spec.s.iter().map(|r| r.iter().map(|x| x * &alpha).collect()).collect();
        let scaled = SystemSpec::new(spec.c.clone(), scaled_s, spec.dprime()).unwrap();
        prop_assert_eq!(member_set(&spec), member_set(&scaled));
    }

    #[test]
    fn orientation_is_negative_or_balanced(seed in any::<u64>()) {
        let spec = random_spec(seed, 6);
        for m in team(&spec, TeamOptions::default()).unwrap().members {
            match orient(&m, &spec.c) {
                Ok(nu) => {
                    prop_assert!(nu.dot(&spec.c).is_negative());
                    prop_assert!(nu == m || nu == m.negated());
                }
                Err(NullspaceError::Balanced) => prop_assert!(m.dot(&spec.c).is_zero()),
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }

    #[test]
    fn certificate_constants_ignore_positive_scaling(
        n in 1i64..9, den in 1i64..9, beta in 1.0f64..50.0, x in prop::collection::vec(0.01f64..1.0, 3)
    ) {
        let spec = SystemSpec::from_ints(&[-1, 1, -1], &[&[1, 2], &[1, 1], &[3, 1]]).unwrap();
        let nu = team(&spec, TeamOptions::default()).unwrap().members[0].clone();
        let x0: Vec<f64> = x.iter().map(|v| v * beta).collect();
        let a = certificate(&nu, &spec.c, beta, &x0).unwrap();
        let b = certificate(&nu.scaled(&q(n, den)), &spec.c, beta, &x0).unwrap();
        prop_assert_eq!(a.a, b.a);
        prop_assert_eq!(a.b, b.b);
    }

    #[test]
    fn quadratic_cap_bounds_the_parabola(cn in 0i64..500, cd in 1i64..100, sn in 1i64..500, sd in 1i64..100) {
        let (c, s) = (q(cn, cd), q(-sn, sd));
        let a = quadratic_cap(&c, &s).unwrap();
        // tight at the vertex, exactly
        let vertex = -(&c + q(1, 1)) / (q(2, 1) * &s);
        prop_assert_eq!(&c * &vertex + &s * &vertex * &vertex, &a - &vertex);
        let (cf, sf, af, vf) = (to_f64(&c), to_f64(&s), to_f64(&a), to_f64(&vertex));
        for i in 0..=400 {
            let x = vf * 4.0 * i as f64 / 400.0;
            let gap = cf * x + sf * x * x - (af - x);
            let scale = af.abs().max(x).max((sf * x * x).abs()).max(1.0);
            prop_assert!(gap <= 1e-12 * scale, "gap {gap} at x = {x}");
        }
    }

    #[test]
    fn trapping_function_dissipates(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.gen_range(1..=5);
        // lower triangle eats upper: s_nm > 0 for n > m, with s_mn < 0
        let mut s = vec![vec![Q::zero(); d]; d];
        let mut c = Vec::with_capacity(d);
        for n in 0..d {
            let grows = n == 0 || rng.gen_bool(0.3);
            c.push(if grows { q(rng.gen_range(0..=20), 10) } else { q(-rng.gen_range(1..=20), 10) });
            s[n][n] = if grows || rng.gen_bool(0.5) { q(-rng.gen_range(1..=20), 100) } else { Q::zero() };
            for m in 0..n {
                if rng.gen_bool(0.6) {
                    s[n][m] = q(rng.gen_range(1..=30), 100);
                    s[m][n] = q(-rng.gen_range(1..=30), 100);
                }
            }
        }
        let spec = SystemSpec::new(c, s, d).unwrap();
        let region = trapping_region(&spec).unwrap();
        let (a, b) = (to_f64(&region.a), to_f64(&region.b));
        for _ in 0..200 {
            let x: Vec<f64> = (0..d).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..200.0) }).collect();
            let vd = v_dot(&spec, &region, &x);
            let bound = a - b * region.v_value(&x);
            prop_assert!(vd <= bound + 1e-12 * bound.abs().max(vd.abs()).max(1.0), "{vd} > {bound}");
        }
    }

    #[test]
    fn log_space_runs_are_positive_and_log_linear(seed in any::<u64>()) {
        let spec = random_spec(seed, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let dz = spec.dprime();
        let z = |rng: &mut ChaCha8Rng| (0..dz).map(|_| q(rng.gen_range(-4..=4), 4)).collect::<Vec<_>>();
        let signal = ResourceSignal::Piecewise { schedule: vec![(0.0, z(&mut rng)), (0.37, z(&mut rng)), (1.1, z(&mut rng))] };
        let x0: Vec<f64> = (0..spec.d()).map(|_| rng.gen_range(0.1..10.0)).collect();
        let run = simulate(&spec, &signal, &SimConfig::new(x0.clone(), 2.0, 0.05)).unwrap();
        let times: Vec<f64> = run.trajectory.samples.iter().map(|s| s.t).collect();
        // switch times are step boundaries
        prop_assert!(times.contains(&0.37) && times.contains(&1.1));
        for s in &run.trajectory.samples {
            prop_assert!(s.x.iter().all(|&v| v > 0.0));
        }
        for nu in kernel_basis(&spec) {
            let rate = to_f64(&nu.dot(&spec.c));
            let w = nu.to_f64();
            let lam = |x: &[f64]| w.iter().zip(x).map(|(wi, xi)| wi * xi.ln()).sum::<f64>();
            let l0 = lam(&x0);
            let scale: f64 = w.iter().zip(&x0).map(|(wi, xi)| (wi * xi.ln()).abs()).sum::<f64>() + w.iter().map(|v| v.abs()).sum::<f64>();
            for s in &run.trajectory.samples {
                let drift = lam(&s.x) - l0 - rate * s.t;
                prop_assert!(drift.abs() <= 1e-8 * (1.0 + rate.abs() * s.t) * scale.max(1.0), "drift {drift}");
            }
        }
    }

    #[test]
    fn trajectory_csv_round_trips(xs in prop::collection::vec(prop::collection::vec(1e-300f64..1e12, 3), 1..20)) {
        let samples = xs.into_iter().enumerate().map(|(i, x)| State { t: i as f64 * 0.1, x }).collect();
        let traj = Trajectory::from_samples(samples);
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let back = Trajectory::read_csv(buf.as_slice(), 3).unwrap();
        prop_assert_eq!(back, traj);
    }
}
