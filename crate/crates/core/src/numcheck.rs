//! Numerical checks of solutions: finite-difference residuals of
//! `iψ_t + ψ_xx + |ψ|²ψ + Vψ = 0`, a split-step solver, and transport of
//! exact solutions along equivalence transforms.
//!
//! Residuals use the 4th-order centered stencil for `ψ_xx` and the
//! 2nd-order centered stencil for `ψ_t`, on interior nodes only. Maxima are
//! reduced row by row in a fixed order, so results do not depend on the
//! thread count.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use thiserror::Error;

use crate::equiv::EquivTransform;
use crate::exec::Exec;
use crate::expr::{eval_f64, is_zero, EvalError, Expr, Point, Var, ZeroTest};
use crate::symmetry::Potential;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("pole or non-finite value at t = {t}, x = {x}")]
    Pole { t: f64, x: f64 },
    #[error("evaluation failed at t = {t}, x = {x}: {err}")]
    Eval { t: f64, x: f64, err: EvalError },
    #[error("time step {dt} exceeds the stability bound {bound}")]
    Stability { dt: f64, bound: f64 },
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    DirichletZero,
}

impl FromStr for Boundary {
    type Err = NumError;
    fn from_str(s: &str) -> Result<Self, NumError> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "dirichlet_zero" | "dirichlet" => Ok(Boundary::DirichletZero),
            other => Err(NumError::Grid(format!("unknown boundary {other:?}"))),
        }
    }
}

/// Space-time grid. Time nodes include both ends; space nodes include
/// both ends for `DirichletZero` and exclude `x1` for `Periodic`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
    pub nt: usize,
    pub nx: usize,
    pub boundary: Boundary,
}

impl Grid {
    pub fn new(t: (f64, f64), x: (f64, f64), nt: usize, nx: usize, boundary: Boundary) -> Result<Grid, NumError> {
        let g = Grid { t0: t.0, t1: t.1, x0: x.0, x1: x.1, nt, nx, boundary };
        if nt < 16 || nx < 16 {
            return Err(NumError::Grid(format!("need at least 16 nodes per axis, got {nt}x{nx}")));
        }
        if !(t.1 > t.0 && x.1 > x.0) || !(t.0.is_finite() && t.1.is_finite() && x.0.is_finite() && x.1.is_finite()) {
            return Err(NumError::Grid("spacing must be positive and finite".into()));
        }
        Ok(g)
    }

    /// Parses `t0,t1,x0,x1,nt,nx`.
    pub fn parse(spec: &str, boundary: Boundary) -> Result<Grid, NumError> {
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(NumError::Grid(format!("expected t0,t1,x0,x1,nt,nx, got {spec:?}")));
        }
        let f = |s: &str| s.parse::<f64>().map_err(|e| NumError::Grid(format!("{s:?}: {e}")));
        let n = |s: &str| s.parse::<usize>().map_err(|e| NumError::Grid(format!("{s:?}: {e}")));
        Grid::new((f(parts[0])?, f(parts[1])?), (f(parts[2])?, f(parts[3])?), n(parts[4])?, n(parts[5])?, boundary)
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / (self.nt - 1) as f64
    }

    pub fn dx(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => (self.x1 - self.x0) / self.nx as f64,
            Boundary::DirichletZero => (self.x1 - self.x0) / (self.nx - 1) as f64,
        }
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt()
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|k| self.x(k)).collect()
    }
}

/// Field values on a grid, row-major in time.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl FieldSample {
    pub fn row(&self, j: usize) -> &[Complex64] {
        &self.values[j * self.grid.nx..(j + 1) * self.grid.nx]
    }

    pub fn at(&self, j: usize, k: usize) -> Complex64 {
        self.values[j * self.grid.nx + k]
    }

    /// Samples an expression `ψ(t, x)` on every node.
    pub fn sample(psi: &Expr, grid: &Grid, exec: Exec) -> Result<FieldSample, NumError> {
        let rows = exec.map_range(grid.nt, |j| sample_row(psi, grid, grid.t(j)));
        let mut values = Vec::with_capacity(grid.nt * grid.nx);
        for r in rows {
            values.extend(r?);
        }
        Ok(FieldSample { grid: *grid, values })
    }

    /// `∫|ψ|² dx` at time row `j` (rectangle rule).
    pub fn mass(&self, j: usize) -> f64 {
        self.row(j).iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }
}

fn sample_row(e: &Expr, grid: &Grid, t: f64) -> Result<Vec<Complex64>, NumError> {
    (0..grid.nx)
        .map(|k| {
            let x = grid.x(k);
            match eval_f64(e, &Point::new(t, x)) {
                Ok(v) if v.re.is_finite() && v.im.is_finite() => Ok(v),
                Ok(_) | Err(EvalError::Pole) => Err(NumError::Pole { t, x }),
                Err(err) => Err(NumError::Eval { t, x, err }),
            }
        })
        .collect()
}

/// A field given either as an evaluable expression or as samples.
#[derive(Clone, Debug)]
pub enum Field {
    Expr(Expr),
    Samples(FieldSample),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Path {
    /// Field and potential are both in the exact class.
    Exact,
    Numeric,
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Path::Exact => "exact",
            Path::Numeric => "numeric",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub max_residual: f64,
    pub grid: Grid,
    pub path: Path,
}

/// Maximum over interior nodes of `|iψ_t + ψ_xx + |ψ|²ψ + Vψ|`.
pub fn pde_residual(field: &Field, v: &Potential, grid: &Grid, exec: Exec) -> Result<Residual, NumError> {
    let (samples, path) = match field {
        Field::Expr(e) => {
            let exact = e.canonical().is_ok() && v.expr().canonical().is_ok();
            (FieldSample::sample(e, grid, exec)?, if exact { Path::Exact } else { Path::Numeric })
        }
        Field::Samples(s) => {
            if s.grid != *grid {
                return Err(NumError::Grid("samples live on a different grid".into()));
            }
            (s.clone(), Path::Numeric)
        }
    };
    let (nt, nx) = (grid.nt, grid.nx);
    let (dt, dx) = (grid.dt(), grid.dx());
    let ks: Vec<usize> = match grid.boundary {
        Boundary::Periodic => (0..nx).collect(),
        Boundary::DirichletZero => (2..nx - 2).collect(),
    };
    let wrap = |k: usize, o: isize| (k as isize + o).rem_euclid(nx as isize) as usize;
    let row_max = exec.map_range(nt - 2, |r| -> Result<f64, NumError> {
        let j = r + 1;
        let t = grid.t(j);
        let mut m: f64 = 0.0;
        for &k in &ks {
            let p = |o: isize| samples.at(j, wrap(k, o));
            let psi = p(0);
            let psi_t = (samples.at(j + 1, k) - samples.at(j - 1, k)) / (2.0 * dt);
            let psi_xx = (-p(-2) + p(-1) * 16.0 - psi * 30.0 + p(1) * 16.0 - p(2)) / (12.0 * dx * dx);
            let x = grid.x(k);
            let vv = match eval_f64(v.expr(), &Point::new(t, x)) {
                Ok(z) if z.re.is_finite() && z.im.is_finite() => z,
                Ok(_) | Err(EvalError::Pole) => return Err(NumError::Pole { t, x }),
                Err(err) => return Err(NumError::Eval { t, x, err }),
            };
            let r = Complex64::i() * psi_t + psi_xx + psi * psi.norm_sqr() + vv * psi;
            m = m.max(r.norm());
        }
        Ok(m)
    });
    let mut max_residual: f64 = 0.0;
    for m in row_max {
        max_residual = max_residual.max(m?);
    }
    Ok(Residual { max_residual, grid: *grid, path })
}

/// The equation's left-hand side applied to `ψ`, symbolically.
pub fn equation_residual(psi: &Expr, v: &Potential) -> Expr {
    Expr::i() * psi.diff(Var::T) + psi.diff_n(Var::X, 2) + psi.pow(2) * psi.conj() + v.expr() * psi
}

/// Exact check that `ψ` solves the equation with potential `v`.
pub fn is_exact_solution(psi: &Expr, v: &Potential) -> ZeroTest {
    is_zero(&equation_residual(psi, v))
}

/// Named exact solutions of the free equation (`V = 0`).
#[derive(Clone, Debug, PartialEq)]
pub enum Seed {
    /// `√2 a sech(a x) e^{i a² t}`.
    Soliton { a: Expr },
    /// `a e^{i(kx + (a² − k²)t)}`.
    PlaneWave { a: Expr, k: Expr },
    Zero,
}

impl Seed {
    pub fn soliton() -> Seed {
        Seed::Soliton { a: Expr::one() }
    }

    pub fn expr(&self) -> Expr {
        let (t, x) = (Expr::t(), Expr::x());
        match self {
            Seed::Soliton { a } => {
                Expr::sqrt(Expr::int(2)) * a * Expr::sech(a * &x) * Expr::exp(Expr::i() * a.pow(2) * t)
            }
            Seed::PlaneWave { a, k } => {
                a * Expr::exp(Expr::i() * (k * &x + (a.pow(2) - k.pow(2)) * t))
            }
            Seed::Zero => Expr::zero(),
        }
    }

    pub fn potential(&self) -> Potential {
        Potential(Expr::zero())
    }

    /// `soliton`, `soliton:a`, `plane_wave:a,k` or `zero`.
    pub fn parse(spec: &str) -> Option<Seed> {
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let args: Vec<Expr> = if args.is_empty() {
            vec![]
        } else {
            args.split(',').map(|a| crate::expr::parse(a.trim()).ok()).collect::<Option<_>>()?
        };
        match (name, args.as_slice()) {
            ("soliton", []) => Some(Seed::soliton()),
            ("soliton", [a]) => Some(Seed::Soliton { a: a.clone() }),
            ("plane_wave", []) => Some(Seed::PlaneWave { a: Expr::one(), k: Expr::one() }),
            ("plane_wave", [a, k]) => Some(Seed::PlaneWave { a: a.clone(), k: k.clone() }),
            ("zero", []) => Some(Seed::Zero),
            _ => None,
        }
    }
}

/// Residual of the transported solution against the transported potential.
pub fn transported_residual(
    seed: &Expr,
    v_src: &Potential,
    g: &EquivTransform,
    grid: &Grid,
    exec: Exec,
) -> Result<Residual, NumError> {
    let psi = g.apply_to_solution(seed);
    let v = g.apply_to_potential(v_src);
    pde_residual(&Field::Expr(psi), &v, grid, exec)
}

/// Grid in the new variables covering the image of `t_old × x_old`.
pub fn image_grid(
    g: &EquivTransform,
    t_old: (f64, f64),
    x_old: (f64, f64),
    nt: usize,
    nx: usize,
) -> Result<Grid, NumError> {
    let at = |e: &Expr, t: f64| {
        eval_f64(e, &Point::new(t, 0.0))
            .map(|v| v.re)
            .map_err(|err| NumError::Eval { t, x: 0.0, err })
    };
    let (mut tl, mut th) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut xl, mut xh) = (f64::INFINITY, f64::NEG_INFINITY);
    let root = g.root();
    for k in 0..=32 {
        let t = t_old.0 + (t_old.1 - t_old.0) * k as f64 / 32.0;
        let tn = at(&g.t_map, t)?;
        let (s, x0) = (at(&root, t)? * g.eps as f64, at(&g.x_shift, t)?);
        tl = tl.min(tn);
        th = th.max(tn);
        for x in [x_old.0, x_old.1] {
            let xn = s * x + x0;
            let xn = if g.reflect_x { -xn } else { xn };
            xl = xl.min(xn);
            xh = xh.max(xn);
        }
    }
    if g.reflect_t {
        (tl, th) = (-th, -tl);
    }
    Grid::new((tl, th), (xl, xh), nt, nx, Boundary::DirichletZero)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Fraction of the bound `dx²/π` used as the largest substep.
    pub safety: f64,
    /// Requested substep; rejected if above the bound.
    pub dt: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { safety: 1.0, dt: None }
    }
}

/// Strang split-step evolution of `psi0` on a periodic grid, returning the
/// field at every time node. The linear half-steps are spectral; the
/// potential and nonlinear step is solved exactly pointwise with `V`
/// frozen at the step midpoint.
pub fn solve_split_step(
    v: &Potential,
    psi0: &[Complex64],
    grid: &Grid,
    opts: SolverOptions,
    exec: Exec,
) -> Result<FieldSample, NumError> {
    if grid.boundary != Boundary::Periodic {
        return Err(NumError::Unsupported("split-step needs a periodic grid".into()));
    }
    let nx = grid.nx;
    if psi0.len() != nx {
        return Err(NumError::Grid(format!("initial data has {} values, grid has {nx}", psi0.len())));
    }
    let dx = grid.dx();
    let bound = opts.safety * dx * dx / std::f64::consts::PI;
    let interval = grid.dt();
    let h = match opts.dt {
        Some(h) if h > bound => return Err(NumError::Stability { dt: h, bound }),
        Some(h) => h,
        None => bound,
    };
    let substeps = (interval / h).ceil().max(1.0) as usize;
    let h = interval / substeps as f64;

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(nx);
    let inv = planner.plan_fft_inverse(nx);
    let length = grid.x1 - grid.x0;
    let half_linear: Vec<Complex64> = (0..nx)
        .map(|m| {
            let mm = if m <= nx / 2 { m as f64 } else { m as f64 - nx as f64 };
            let k = 2.0 * std::f64::consts::PI * mm / length;
            Complex64::from_polar(1.0 / nx as f64, -k * k * h / 2.0)
        })
        .collect();
    let xs = grid.xs();
    let linear = |psi: &mut Vec<Complex64>| {
        fwd.process(psi);
        for (p, m) in psi.iter_mut().zip(&half_linear) {
            *p *= m;
        }
        inv.process(psi);
    };

    let mut psi = psi0.to_vec();
    let mut values = Vec::with_capacity(grid.nt * nx);
    values.extend_from_slice(&psi);
    let mut fail: Option<NumError> = None;
    for j in 0..grid.nt - 1 {
        for s in 0..substeps {
            let t_mid = grid.t(j) + (s as f64 + 0.5) * h;
            linear(&mut psi);
            let errs = std::sync::Mutex::new(None);
            exec.for_each_mut(&mut psi, |k, p| {
                let x = xs[k];
                match eval_f64(v.expr(), &Point::new(t_mid, x)) {
                    Ok(vv) if vv.re.is_finite() && vv.im.is_finite() => *p = nonlinear_step(*p, vv, h),
                    Ok(_) | Err(EvalError::Pole) => {
                        *errs.lock().unwrap() = Some(NumError::Pole { t: t_mid, x });
                    }
                    Err(err) => {
                        *errs.lock().unwrap() = Some(NumError::Eval { t: t_mid, x, err });
                    }
                }
            });
            if let Some(e) = errs.into_inner().unwrap() {
                fail = Some(e);
                break;
            }
            linear(&mut psi);
        }
        if let Some(e) = fail.take() {
            return Err(e);
        }
        values.extend_from_slice(&psi);
    }
    Ok(FieldSample { grid: *grid, values })
}

/// Exact solution of `ψ_t = i(|ψ|² + V)ψ` over `h` for constant `V`.
fn nonlinear_step(p: Complex64, v: Complex64, h: f64) -> Complex64 {
    let rho = p.norm_sqr();
    let g = v.im;
    // ρ(s) = ρ e^{−2gs}; phase = ∫ρ ds + Re V h
    let (decay, integral) = if g.abs() < 1e-14 {
        (1.0, rho * h)
    } else {
        let d = (-2.0 * g * h).exp();
        (d, rho * (1.0 - d) / (2.0 * g))
    };
    p * decay.sqrt() * Complex64::from_polar(1.0, integral + v.re * h)
}

/// Largest relative mass deviation from the first row, per unit time.
pub fn mass_drift(field: &FieldSample) -> f64 {
    let m0 = field.mass(0);
    let span = field.grid.t1 - field.grid.t0;
    (0..field.grid.nt)
        .map(|j| ((field.mass(j) - m0) / m0).abs())
        .fold(0.0, f64::max)
        / span
}

/// Soliton residuals on grids that halve `dx`, with the time grid fixed.
pub fn x_refinement(psi: &Expr, v: &Potential, base: &Grid, levels: usize, exec: Exec) -> Result<Vec<f64>, NumError> {
    (0..levels)
        .map(|l| {
            let nx = match base.boundary {
                Boundary::Periodic => base.nx << l,
                Boundary::DirichletZero => ((base.nx - 1) << l) + 1,
            };
            let g = Grid { nx, ..*base };
            pde_residual(&Field::Expr(psi.clone()), v, &g, exec).map(|r| r.max_residual)
        })
        .collect()
}
