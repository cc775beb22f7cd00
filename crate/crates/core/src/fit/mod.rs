//! Deterministic derivative-free least squares.
//!
//! [`minimize`] runs an adaptive Nelder–Mead simplex on the squared residual
//! norm. Parameters are searched in scaled coordinates u = x / scale, and the
//! initial simplex steps each coordinate by a fixed fraction of its scale, so
//! a run is a pure function of its inputs. Bounds are enforced by projecting
//! every trial vertex onto the box.

mod pipelines;

pub use pipelines::{
    fit_anticrossing, fit_linewidth_temperature, fit_s21, AnticrossingFit, AnticrossingGuess,
    LinewidthFit, PeakList, S21Fit, S21FitOptions, S21Guess,
};

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};

/// Simplex step of each coordinate, as a fraction of its scale.
const INITIAL_STEP: f64 = 0.1;

pub struct FitProblem<'a> {
    pub names: Vec<String>,
    residual: Box<dyn Fn(&[f64]) -> Vec<f64> + 'a>,
    pub initial: Vec<f64>,
    /// Per-parameter (lower, upper); infinite ends are allowed.
    pub bounds: Option<Vec<(f64, f64)>>,
    /// Characteristic magnitude of each parameter's variation.
    pub scale: Vec<f64>,
}

impl<'a> FitProblem<'a> {
    pub fn new(
        names: &[&str],
        residual: impl Fn(&[f64]) -> Vec<f64> + 'a,
        initial: Vec<f64>,
        scale: Vec<f64>,
    ) -> Self {
        FitProblem {
            names: names.iter().map(|s| s.to_string()).collect(),
            residual: Box::new(residual),
            initial,
            bounds: None,
            scale,
        }
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        (self.residual)(x)
    }

    fn validate(&self) -> Result<()> {
        let n = self.initial.len();
        if n == 0 {
            return Err(invalid("fit problem has no parameters"));
        }
        if self.scale.len() != n || self.names.len() != n {
            return Err(invalid("names, scales and initial guess differ in length"));
        }
        if self.scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(invalid("parameter scales must be positive and finite"));
        }
        if self.initial.iter().any(|x| !x.is_finite()) {
            return Err(invalid("initial guess must be finite"));
        }
        if let Some(b) = &self.bounds {
            if b.len() != n {
                return Err(invalid("bounds differ in length from the initial guess"));
            }
            for (i, (&x, &(lo, hi))) in self.initial.iter().zip(b).enumerate() {
                if lo.is_nan() || hi.is_nan() || lo > hi {
                    return Err(invalid(format!("bounds of {} are not an interval", self.names[i])));
                }
                if x < lo || x > hi {
                    return Err(invalid(format!(
                        "initial {} = {x} outside bounds [{lo}, {hi}]",
                        self.names[i]
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Simplex diameter, relative to max(1, |u|) per scaled coordinate.
    pub x_tolerance: f64,
    /// Spread of the simplex cost values, relative to the best cost.
    pub f_tolerance: f64,
    /// Fresh simplices built around the best point after convergence.
    pub restarts: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 5000,
            x_tolerance: 1e-10,
            f_tolerance: 1e-10,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub names: Vec<String>,
    pub parameters: Vec<f64>,
    /// Euclidean norm of the residual vector at `parameters`.
    pub residual_norm: f64,
    pub residual_count: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Ratio of extreme singular values of the scaled finite-difference
    /// Jacobian. Infinite when some direction has no effect on the residual.
    pub jacobian_condition_proxy: f64,
    /// 1σ-like scale from the local curvature of the residual norm. A proxy,
    /// not a covariance estimate.
    pub uncertainty_proxy: Vec<f64>,
    pub warnings: Vec<String>,
    pub metadata: Vec<(String, String)>,
}

impl FitResult {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.parameters[i])
    }

    pub fn uncertainty(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.uncertainty_proxy[i])
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

struct Search<'p, 'a> {
    problem: &'p FitProblem<'a>,
    evaluations: usize,
}

impl Search<'_, '_> {
    fn to_x(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.problem.scale).map(|(u, s)| u * s).collect()
    }

    fn project(&self, u: &mut [f64]) {
        if let Some(b) = &self.problem.bounds {
            for ((u, s), &(lo, hi)) in u.iter_mut().zip(&self.problem.scale).zip(b) {
                *u = u.clamp(lo / s, hi / s);
            }
        }
    }

    fn cost(&mut self, u: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let x = self.to_x(u);
        let r = self.problem.residual(&x);
        let c: f64 = r.iter().map(|v| v * v).sum();
        if !c.is_finite() {
            return Err(Error::NonFiniteResidual { point: x });
        }
        Ok(c)
    }
}

/// Relative simplex diameter at which vertices differ only by rounding.
const COLLAPSED: f64 = 16.0 * f64::EPSILON;

fn sorted(simplex: &mut Vec<(Vec<f64>, f64)>) {
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .flat_map(|(u, _)| {
            u.iter()
                .zip(best)
                .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
        })
        .fold(0.0, f64::max)
}

/// One Nelder–Mead run from `start`. Returns the best vertex, its cost, the
/// iterations used and whether the tolerances were met.
fn nelder_mead(
    search: &mut Search,
    start: &[f64],
    f_scale: f64,
    max_iterations: usize,
    opts: &FitOptions,
) -> Result<(Vec<f64>, f64, usize, bool)> {
    let n = start.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);

    let mut simplex = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), search.cost(start)?));
    for i in 0..n {
        let mut u = start.to_vec();
        u[i] += INITIAL_STEP;
        search.project(&mut u);
        if u[i] == start[i] {
            // pinned against a bound: step inward instead
            u[i] -= INITIAL_STEP;
            search.project(&mut u);
        }
        let c = search.cost(&u)?;
        simplex.push((u, c));
    }
    sorted(&mut simplex);

    let along = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
        from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
    };

    for iter in 0..max_iterations {
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread = worst - best;
        let size = diameter(&simplex);
        // Once the vertices sit a few ulps apart the remaining cost spread is
        // rounding noise and no further progress is possible.
        if size < opts.x_tolerance
            && (spread <= opts.f_tolerance * best.abs() + 1e-20 * f_scale || size <= COLLAPSED)
        {
            return Ok((simplex[0].0.clone(), best, iter, true));
        }

        let mut centroid = vec![0.0; n];
        for (u, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(u) {
                *c += v / nf;
            }
        }
        let worst_u = simplex[n].0.clone();
        let mut reflected = along(&centroid, &worst_u, -alpha);
        search.project(&mut reflected);
        let fr = search.cost(&reflected)?;

        if fr < best {
            let mut expanded = along(&centroid, &worst_u, -alpha * beta);
            search.project(&mut expanded);
            let fe = search.cost(&expanded)?;
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (mut contracted, outside) = if fr < worst {
                (along(&centroid, &worst_u, -alpha * gamma), true)
            } else {
                (along(&centroid, &worst_u, gamma), false)
            };
            search.project(&mut contracted);
            let fc = search.cost(&contracted)?;
            if (outside && fc <= fr) || (!outside && fc < worst) {
                simplex[n] = (contracted, fc);
            } else {
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let mut u = along(&anchor, &vertex.0, delta);
                    search.project(&mut u);
                    let c = search.cost(&u)?;
                    *vertex = (u, c);
                }
            }
        }
        sorted(&mut simplex);
    }
    Ok((simplex[0].0.clone(), simplex[0].1, max_iterations, false))
}

/// Minimizes the squared norm of the problem's residual vector.
pub fn minimize(problem: &FitProblem, options: &FitOptions) -> Result<FitResult> {
    problem.validate()?;
    let r0 = problem.residual(&problem.initial);
    if r0.is_empty() {
        return Err(invalid("residual function returned no values"));
    }
    if r0.iter().any(|v| !v.is_finite()) {
        return Err(invalid("residual is not finite at the initial guess"));
    }
    let f_scale: f64 = r0.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);

    let mut search = Search {
        problem,
        evaluations: 0,
    };
    let mut u: Vec<f64> = problem
        .initial
        .iter()
        .zip(&problem.scale)
        .map(|(x, s)| x / s)
        .collect();
    let mut cost = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..=options.restarts {
        let budget = options.max_iterations - iterations;
        if budget == 0 {
            break;
        }
        let (next, c, used, ok) = nelder_mead(&mut search, &u, f_scale, budget, options)?;
        iterations += used;
        let improved = c < cost * (1.0 - options.f_tolerance) - 1e-20 * f_scale;
        converged = ok;
        if c <= cost {
            u = next;
        }
        cost = cost.min(c);
        if !ok || !improved {
            break;
        }
    }

    let parameters = search.to_x(&u);
    let residual = problem.residual(&parameters);
    let (jacobian_condition_proxy, uncertainty_proxy) = curvature(problem, &parameters, &residual)?;
    let mut warnings = Vec::new();
    if !converged {
        warnings.push(format!("iteration cap of {} reached", options.max_iterations));
    }
    if jacobian_condition_proxy > 1e10 {
        warnings.push(format!(
            "ill-conditioned: Jacobian condition proxy {jacobian_condition_proxy:.3e}"
        ));
    }
    Ok(FitResult {
        names: problem.names.clone(),
        parameters,
        residual_norm: cost.sqrt(),
        residual_count: residual.len(),
        iterations,
        converged,
        jacobian_condition_proxy,
        uncertainty_proxy,
        warnings,
        metadata: vec![("evaluations".into(), search.evaluations.to_string())],
    })
}

/// Condition proxy and per-parameter uncertainty from a central-difference
/// Jacobian J: σ² = s² [(JᵀJ)⁻¹]_ii with s² the residual variance.
fn curvature(problem: &FitProblem, x: &[f64], r: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (m, n) = (r.len(), x.len());
    let mut jac = DMatrix::<f64>::zeros(m, n);
    for j in 0..n {
        let h = 1e-6 * x[j].abs().max(problem.scale[j]);
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let (rp, rm) = (problem.residual(&plus), problem.residual(&minus));
        if rp.len() != m || rm.len() != m {
            return Err(invalid("residual length changed between evaluations"));
        }
        for i in 0..m {
            let d = (rp[i] - rm[i]) / (2.0 * h);
            if !d.is_finite() {
                return Err(Error::NonFiniteResidual { point: plus });
            }
            // scaled columns so the condition number ignores units
            jac[(i, j)] = d * problem.scale[j];
        }
    }
    let svd = jac.clone().svd(false, false);
    let sv = &svd.singular_values;
    let (max, min) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };

    let cost: f64 = r.iter().map(|v| v * v).sum();
    let dof = if m > n { (m - n) as f64 } else { 1.0 };
    let variance = cost / dof;
    let normal = jac.transpose() * &jac;
    let sigma = match normal.try_inverse() {
        Some(inv) if condition.is_finite() => (0..n)
            .map(|i| {
                let v = inv[(i, i)];
                if v >= 0.0 {
                    (variance * v).sqrt() * problem.scale[i]
                } else {
                    f64::INFINITY
                }
            })
            .collect(),
        _ => vec![f64::INFINITY; n],
    };
    Ok((condition, sigma))
}
