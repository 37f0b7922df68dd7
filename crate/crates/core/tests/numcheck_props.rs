use num_complex::Complex64;
use proptest::prelude::*;
use symclass::equiv::sample_transforms;
use symclass::expr::{eval_f64, Point};
use symclass::numcheck::*;
use symclass::symmetry::Potential;
use symclass::{ex, Exec, Expr};

fn zero() -> Potential {
    Potential(Expr::zero())
}

// The coarse level keeps x coarse relative to t, so the fourth-order x
// stencil dominates and the expected ratio lies between 4 and 16.
#[test]
fn transported_residual_refines_for_every_catalog_transform() {
    let psi = Seed::soliton().expr();
    for (name, g, dom) in sample_transforms() {
        let (c, w) = (0.5 * (dom.0 + dom.1), dom.1 - dom.0);
        let window = (c - 0.1 * w, c + 0.1 * w);
        let r: Vec<f64> = [(513, 33), (1025, 65)]
            .iter()
            .map(|&(nt, nx)| {
                let grid = image_grid(&g, window, (-4.0, 4.0), nt, nx).unwrap();
                transported_residual(&psi, &zero(), &g, &grid, Exec::Parallel).unwrap().max_residual
            })
            .collect();
        assert!(r[0] / r[1] >= 4.0, "{name}: {r:?}");
    }
}

#[test]
fn x_refinement_reaches_fourth_order() {
    let base = Grid::new((0.0, 0.01), (-10.0, 10.0), 64, 65, Boundary::DirichletZero).unwrap();
    let r = x_refinement(&Seed::soliton().expr(), &zero(), &base, 3, Exec::Parallel).unwrap();
    assert!(r[0] / r[1] >= 8.0 && r[1] / r[2] >= 8.0, "{r:?}");
}

fn solve(v: &Potential, grid: &Grid, exec: Exec) -> FieldSample {
    let sol = Seed::soliton().expr();
    let psi0: Vec<Complex64> = grid.xs().iter().map(|&x| eval_f64(&sol, &Point::new(grid.t0, x)).unwrap()).collect();
    solve_split_step(v, &psi0, grid, SolverOptions::default(), exec).unwrap()
}

#[test]
fn solver_tracks_the_soliton_and_conserves_mass() {
    let grid = Grid::new((0.0, 1.0), (-20.0, 20.0), 16, 512, Boundary::Periodic).unwrap();
    let out = solve(&zero(), &grid, Exec::Parallel);
    let sol = Seed::soliton().expr();
    let err = (0..grid.nx)
        .map(|k| (out.at(grid.nt - 1, k) - eval_f64(&sol, &Point::new(1.0, grid.x(k))).unwrap()).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-4, "{err:e}");
    assert!(mass_drift(&out) < 1e-8);
    for v in ["x^2/100", "cos(t)*exp(-x^2)", "-1/(1+x^2)"] {
        let out = solve(&Potential(ex(v)), &grid, Exec::Parallel);
        assert!(mass_drift(&out) < 1e-8, "{v}: {:e}", mass_drift(&out));
    }
}

// d/dt ∫|ψ|² = −2 Im V ∫|ψ|² for constant V.
#[test]
fn imaginary_constant_potential_damps_mass() {
    let grid = Grid::new((0.0, 1.0), (-20.0, 20.0), 16, 512, Boundary::Periodic).unwrap();
    let out = solve(&Potential(ex("i/2")), &grid, Exec::Sequential);
    for j in 0..grid.nt {
        let expected = (-grid.t(j)).exp();
        assert!((out.mass(j) / out.mass(0) - expected).abs() < 1e-10);
    }
}

#[test]
fn results_do_not_depend_on_the_executor() {
    let grid = Grid::new((0.0, 1.0), (-10.0, 10.0), 64, 256, Boundary::DirichletZero).unwrap();
    let f = Field::Expr(Seed::soliton().expr());
    let v = Potential(ex("x^2/50"));
    let a = pde_residual(&f, &v, &grid, Exec::Parallel).unwrap();
    let b = pde_residual(&f, &v, &grid, Exec::Sequential).unwrap();
    assert_eq!(a.max_residual.to_bits(), b.max_residual.to_bits());
    let grid = Grid::new((0.0, 0.5), (-20.0, 20.0), 16, 256, Boundary::Periodic).unwrap();
    assert_eq!(solve(&v, &grid, Exec::Parallel).values, solve(&v, &grid, Exec::Sequential).values);
}

#[test]
fn singular_potentials_need_grids_away_from_the_pole() {
    let f = Field::Expr(Seed::soliton().expr());
    let v = Potential(ex("x^-2"));
    let through = Grid::new((0.0, 1.0), (-1.0, 1.0), 16, 17, Boundary::DirichletZero).unwrap();
    assert!(matches!(pde_residual(&f, &v, &through, Exec::Parallel), Err(NumError::Pole { .. })));
    let away = Grid::new((0.0, 1.0), (0.5, 4.0), 16, 17, Boundary::DirichletZero).unwrap();
    assert!(pde_residual(&f, &v, &away, Exec::Parallel).is_ok());
}

#[test]
fn samples_residual_matches_expression_residual() {
    let grid = Grid::new((0.0, 1.0), (-10.0, 10.0), 32, 128, Boundary::DirichletZero).unwrap();
    let e = Seed::soliton().expr();
    let s = FieldSample::sample(&e, &grid, Exec::Parallel).unwrap();
    let a = pde_residual(&Field::Expr(e), &zero(), &grid, Exec::Parallel).unwrap();
    let b = pde_residual(&Field::Samples(s), &zero(), &grid, Exec::Parallel).unwrap();
    assert_eq!(a.max_residual, b.max_residual);
    assert_eq!((a.path, b.path), (Path::Exact, Path::Numeric));
}

proptest! {
    #[test]
    fn grid_text_round_trips(t0 in -5i32..5, lt in 1i32..5, x0 in -20i32..0, lx in 1i32..40, nt in 16usize..300, nx in 16usize..300) {
        let text = format!("{t0},{},{x0},{},{nt},{nx}", t0 + lt, x0 + lx);
        let g = Grid::parse(&text, Boundary::Periodic).unwrap();
        prop_assert_eq!((g.nt, g.nx), (nt, nx));
        prop_assert!((g.t(nt - 1) - (t0 + lt) as f64).abs() < 1e-12);
        prop_assert!(g.dx() > 0.0 && g.dt() > 0.0);
    }

    #[test]
    fn small_grids_are_rejected(n in 1usize..16) {
        prop_assert!(Grid::new((0.0, 1.0), (0.0, 1.0), n, 32, Boundary::Periodic).is_err());
        prop_assert!(Grid::new((0.0, 1.0), (0.0, 1.0), 32, n, Boundary::Periodic).is_err());
    }
}
