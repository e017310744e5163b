//! Reference solvers: finite differences, spectral Galerkin, and the Poincare check.

mod common;

use std::f64::consts::PI;

use barron::expansion::Boundary;
use barron::fixtures::{random_problem, sine_mode, single_mode_problem};
use barron::oracle::{fd_solve, galerkin_solve, poincare_check, solve_at_cutoff, GalerkinConfig};
use barron::problem::{Bounds, EllipticProblem};
use barron::TrigExpansion;

fn max_error(s: &barron::oracle::FdSolution, g: &TrigExpansion) -> f64 {
    s.values
        .iter()
        .enumerate()
        .map(|(r, v)| (v - g.eval(&s.grid.point(r))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn fd_is_second_order_on_single_modes() {
    for k in [vec![1u32], vec![1, 2]] {
        let (p, u) = single_mode_problem(&k);
        let e64 = max_error(&fd_solve(&p, 64, 1e-13).unwrap(), &u);
        let e128 = max_error(&fd_solve(&p, 128, 1e-13).unwrap(), &u);
        let ratio = e64 / e128;
        assert!((ratio - 4.0).abs() <= 0.8, "k={k:?}: ratio {ratio}");
    }
}

#[test]
fn fd_zero_forcing_gives_zero() {
    let mut p = random_problem(2, Boundary::Neumann, 1);
    p.f = TrigExpansion::zero(2);
    let s = fd_solve(&p, 16, 1e-12).unwrap();
    assert!(s.values.iter().all(|&v| v == 0.0));
}

#[test]
fn fd_rejects_small_grids_and_high_dimension() {
    let (p, _) = single_mode_problem(&[1]);
    assert!(fd_solve(&p, 8, 1e-10).is_err());
    let (p4, _) = single_mode_problem(&[1, 1, 1, 1]);
    assert!(fd_solve(&p4, 16, 1e-10).is_err());
}

/// `A = 1 + cos(2 pi x) / 2`, `c = 1`, `f = sin(pi x)`.
fn variable_diffusion_d1() -> EllipticProblem {
    let mut p = EllipticProblem::isotropic(Boundary::Dirichlet, 1.0, sine_mode(&[1]));
    p.a[0] = common::expansion(1, &[("c", &[0], 1.0), ("c", &[2], 0.5)]);
    p.bounds = Bounds {
        a_min: 0.5,
        a_max: 1.5,
        c_min: 1.0,
        c_max: 1.0,
    };
    p
}

#[test]
fn galerkin_matches_fd_on_a_fine_grid() {
    let p = variable_diffusion_d1();
    p.validate(2000, 0).unwrap();
    let g = galerkin_solve(&p, &GalerkinConfig::default()).unwrap();
    assert!(g.converged);
    let fd = fd_solve(&p, 2048, 1e-14).unwrap();
    let rel = fd.relative_l2_to(&g.solution);
    assert!(rel <= 1e-6, "relative L2 discrepancy {rel}");
}

#[test]
fn galerkin_residual_is_negligible() {
    for (d, bc, seed) in [(1, Boundary::Dirichlet, 2), (1, Boundary::Neumann, 3), (2, Boundary::Dirichlet, 4)] {
        let p = random_problem(d, bc, seed);
        let g = galerkin_solve(&p, &GalerkinConfig::default()).unwrap();
        let r = p.residual(&g.solution).unwrap().h1_norm();
        assert!(r <= 1e-10, "d={d} {bc}: residual {r}");
    }
}

#[test]
fn galerkin_is_exact_for_eigenfunctions() {
    let (p, u) = single_mode_problem(&[2, 1]);
    let g = galerkin_solve(&p, &GalerkinConfig::default()).unwrap();
    assert!(g.solution.sub(&u).max_abs_coef() < 1e-13);
}

#[test]
fn galerkin_minimizes_energy_in_its_space() {
    let p = random_problem(2, Boundary::Neumann, 8);
    let (u, e, _) = solve_at_cutoff(&p, 4).unwrap();
    for (key, c) in u.iter().take(12) {
        for delta in [1e-4, -1e-4] {
            let bumped = TrigExpansion::from_terms(
                2,
                u.iter().map(|(k, v)| (k.clone(), if k == key { v + delta } else { v })),
            );
            let eb = p.energy(&bumped).unwrap();
            assert!(eb > e, "coefficient {key} ({c}) bumped by {delta}: {eb} <= {e}");
        }
    }
}

#[test]
fn oracles_agree_on_fixture_problems() {
    let n = 64;
    let bound = 1e-5f64.max(10.0 / (n * n) as f64);
    for bc in [Boundary::Dirichlet, Boundary::Neumann] {
        for d in [1, 2] {
            for seed in 0..3 {
                let p = random_problem(d, bc, seed);
                let g = galerkin_solve(&p, &GalerkinConfig::default()).unwrap();
                let disc = fd_solve(&p, n, 1e-12).unwrap().relative_l2_to(&g.solution);
                assert!(disc <= bound, "{bc} d={d} seed={seed}: {disc}");
            }
        }
    }
}

#[test]
fn poincare_constant_matches_the_unit_cube() {
    let r1 = poincare_check(1, 256).unwrap();
    assert!((r1.constant - 1.0 / PI).abs() <= 1e-4 / PI, "{r1:?}");
    let r2 = poincare_check(2, 64).unwrap();
    let predicted = 1.0 / (PI * 2f64.sqrt());
    assert!((r2.constant - predicted).abs() <= 1e-3 * predicted, "{r2:?}");
    assert!(r1.correlation >= 0.999 && r2.correlation >= 0.999);
}
