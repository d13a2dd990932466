//! Risk-averse best response: maximise `uᵀσ - γ σᵀΣσ` over the floored
//! simplex `{σ : σ ≥ ε, Σσ = 1}`.
//!
//! The solver is a primal active-set method. Lower bounds at the floor form
//! the working set; the equality constraint is handled inside each
//! equality-constrained subproblem. Covariances built from low-support
//! opponent strategies are rank deficient, so the subproblem solves add a
//! small ridge to the quadratic term. Reported objectives never include it.
//! If a subproblem factorisation fails or the active-set loop stalls, the
//! solve continues with accelerated projected gradient.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::{MixedStrategy, PayoffMatrix};
use crate::risk::{self, RiskProfile};

/// Default tolerance on the scaled KKT residual.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Relative ridge added to the quadratic term inside linear solves.
const RIDGE: f64 = 1e-10;

const PG_MAX_ITERS: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseResult {
    pub strategy: MixedStrategy,
    pub objective_value: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
}

/// A mean-variance problem on the floored simplex, already reduced to the
/// linear term `u = M ς` and the covariance `Σ`.
#[derive(Debug, Clone)]
pub struct MeanVarianceQp<'a> {
    pub linear: &'a DVector<f64>,
    pub covariance: &'a DMatrix<f64>,
    pub gamma: f64,
    pub floor: f64,
}

impl MeanVarianceQp<'_> {
    fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        self.linear.dot(&v) - self.gamma * v.dot(&(self.covariance * &v))
    }

    /// Gradient of the minimisation form `γ xᵀΣx - uᵀx`.
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = self.covariance * x;
        g *= 2.0 * self.gamma;
        g -= self.linear;
        g
    }

    fn scale(&self) -> f64 {
        let u = self.linear.amax();
        let q = 2.0 * self.gamma * self.covariance.amax();
        1.0 + u + q
    }

    /// Scaled KKT residual at `x` for the working set `active`: stationarity
    /// on the free coordinates plus sign violations of the bound multipliers.
    fn kkt_residual(&self, x: &DVector<f64>, active: &[bool]) -> f64 {
        let g = self.gradient(x);
        let free: Vec<usize> = (0..self.dim()).filter(|&i| !active[i]).collect();
        if free.is_empty() {
            return f64::INFINITY;
        }
        let mu = free.iter().map(|&i| g[i]).sum::<f64>() / free.len() as f64;
        let stationarity = free.iter().map(|&i| (g[i] - mu).abs()).fold(0.0, f64::max);
        let dual = (0..self.dim())
            .filter(|&i| active[i])
            .map(|i| (mu - g[i]).max(0.0))
            .fold(0.0, f64::max);
        stationarity.max(dual) / self.scale()
    }

    fn best_floored_vertex(&self) -> usize {
        let n = self.dim();
        let eps = self.floor;
        let a = 1.0 - n as f64 * eps;
        let ones = DVector::from_element(n, 1.0);
        let c1 = self.covariance * &ones;
        let sum_u = self.linear.sum();
        let total = c1.sum();
        let value = |k: usize| {
            let lin = eps * sum_u + a * self.linear[k];
            let quad = eps * eps * total + 2.0 * eps * a * c1[k] + a * a * self.covariance[(k, k)];
            lin - self.gamma * quad
        };
        let mut best = 0;
        let mut best_value = value(0);
        for k in 1..n {
            let v = value(k);
            if v > best_value {
                best = k;
                best_value = v;
            }
        }
        best
    }

    /// Solve from the best floored vertex.
    pub fn solve(&self, tol: f64) -> Result<BestResponseResult> {
        self.solve_from(tol, None)
    }

    /// Solve starting from a working set (`true` = held at the floor), for
    /// example the one returned with a nearby problem's solution.
    pub fn solve_from(&self, tol: f64, warm_active: Option<&[bool]>) -> Result<BestResponseResult> {
        let n = self.dim();
        if self.covariance.nrows() != n || self.covariance.ncols() != n {
            return Err(Error::Validation(format!(
                "covariance is {}x{}, linear term has {n} entries",
                self.covariance.nrows(),
                self.covariance.ncols()
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
        }
        crate::game::check_floor(n, self.floor)?;
        if n == 1 {
            return Ok(BestResponseResult {
                strategy: MixedStrategy::pure(1, 0),
                objective_value: self.objective(&[1.0]),
                kkt_residual: 0.0,
                iterations: 0,
            });
        }

        let mut active = match warm_active {
            Some(w) if w.len() == n && w.iter().any(|a| !a) => w.to_vec(),
            _ => {
                let k = self.best_floored_vertex();
                (0..n).map(|i| i != k).collect()
            }
        };
        let mut x = self.start_point(&active);
        let (iterations, converged) = self.active_set(&mut x, &mut active, tol);
        let mut total_iters = iterations;
        let mut residual = self.kkt_residual(&x, &active);
        if !converged || residual > tol {
            let (pg_iters, pg_active) = self.projected_gradient(&mut x, tol);
            total_iters += pg_iters;
            active = pg_active;
            residual = self.kkt_residual(&x, &active);
        }
        self.clean(&mut x, &active);
        residual = residual.max(0.0);
        if residual > tol {
            return Err(Error::Solver {
                iterations: total_iters,
                residual,
                last_iterate: x.as_slice().to_vec(),
            });
        }
        let probs = x.as_slice().to_vec();
        Ok(BestResponseResult {
            objective_value: self.objective(&probs),
            strategy: MixedStrategy::from_vec_unchecked(probs),
            kkt_residual: residual,
            iterations: total_iters,
        })
    }

    fn start_point(&self, active: &[bool]) -> DVector<f64> {
        let n = self.dim();
        let free = active.iter().filter(|a| !**a).count();
        let residual = 1.0 - (n - free) as f64 * self.floor;
        DVector::from_fn(n, |i, _| if active[i] { self.floor } else { residual / free as f64 })
    }

    /// Primal active-set iterations. Returns (iterations, converged).
    fn active_set(&self, x: &mut DVector<f64>, active: &mut [bool], tol: f64) -> (usize, bool) {
        let n = self.dim();
        let cap = (10 * n * n).max(50);
        let scale = self.scale();
        let ridge = RIDGE * (1.0 + 2.0 * self.gamma * self.covariance.amax());
        let mut last_released: Option<usize> = None;

        for iter in 0..cap {
            let g = self.gradient(x);
            let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
            let mu = free.iter().map(|&i| g[i]).sum::<f64>() / free.len() as f64;
            let reduced = free.iter().map(|&i| (g[i] - mu).abs()).fold(0.0, f64::max);

            let step = if free.len() <= 1 || reduced <= 0.1 * tol * scale {
                None
            } else {
                match self.subproblem_step(&g, &free, ridge) {
                    Some(p) if p.amax() > 1e-15 => Some(p),
                    Some(_) => None,
                    None => return (iter, false),
                }
            };

            match step {
                None => {
                    // Stationary on the free set: check bound multipliers.
                    let mut release: Option<(usize, f64)> = None;
                    for i in (0..n).filter(|&i| active[i]) {
                        let lambda = g[i] - mu;
                        if lambda < -0.1 * tol * scale && release.is_none_or(|(_, l)| lambda < l) {
                            release = Some((i, lambda));
                        }
                    }
                    match release {
                        Some((i, _)) => {
                            active[i] = false;
                            last_released = Some(i);
                        }
                        None => return (iter + 1, true),
                    }
                }
                Some(p) => {
                    let mut alpha = 1.0;
                    let mut blocking = None;
                    for (k, &i) in free.iter().enumerate() {
                        if p[k] < 0.0 {
                            let ratio = (x[i] - self.floor).max(0.0) / -p[k];
                            if ratio < alpha {
                                alpha = ratio;
                                blocking = Some(i);
                            }
                        }
                    }
                    if alpha == 0.0 && blocking.is_some() && blocking == last_released {
                        // Zero step straight back onto a bound we just left.
                        return (iter + 1, false);
                    }
                    for (k, &i) in free.iter().enumerate() {
                        x[i] += alpha * p[k];
                    }
                    if let Some(b) = blocking {
                        x[b] = self.floor;
                        active[b] = true;
                    }
                    last_released = None;
                }
            }
        }
        (cap, false)
    }

    /// Equality-constrained Newton step on the free coordinates:
    /// minimise `½pᵀHp + gᵀp` subject to `Σp = 0`.
    ///
    /// The constraint is eliminated with the basis `p = Zw`, `Z = [I; −1ᵀ]`
    /// (the last free coordinate absorbs the others), so the factored matrix
    /// is the reduced Hessian `ZᵀHZ`. `H` itself is often singular: the
    /// weighted covariance has rank below the opponent's action count.
    fn subproblem_step(&self, g: &DVector<f64>, free: &[usize], ridge: f64) -> Option<DVector<f64>> {
        let k = free.len();
        let last = free[k - 1];
        let two_gamma = 2.0 * self.gamma;
        let c = self.covariance;
        let reduced = DMatrix::from_fn(k - 1, k - 1, |a, b| {
            let (i, j) = (free[a], free[b]);
            let v = two_gamma * (c[(i, j)] - c[(i, last)] - c[(last, j)] + c[(last, last)]);
            if a == b {
                v + ridge
            } else {
                v
            }
        });
        let rhs = DVector::from_fn(k - 1, |a, _| g[last] - g[free[a]]);
        let w = reduced.cholesky()?.solve(&rhs);
        if !w.iter().all(|v| v.is_finite()) {
            return None;
        }
        let tail = -w.sum();
        Some(DVector::from_fn(k, |a, _| if a + 1 < k { w[a] } else { tail }))
    }

    /// Accelerated projected gradient from `x`; returns (iterations, working set).
    fn projected_gradient(&self, x: &mut DVector<f64>, tol: f64) -> (usize, Vec<bool>) {
        let n = self.dim();
        // Gershgorin bound on the largest eigenvalue of 2γΣ.
        let lipschitz = 2.0
            * self.gamma
            * (0..n)
                .map(|r| self.covariance.row(r).iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max);
        let step = if lipschitz > 0.0 { 1.0 / lipschitz } else { 1.0 };
        let active_of = |x: &DVector<f64>| -> Vec<bool> { (0..n).map(|i| x[i] <= self.floor + 1e-13).collect() };
        let mut y = x.clone();
        let mut t = 1.0_f64;
        for iter in 0..PG_MAX_ITERS {
            let g = self.gradient(&y);
            let next = project_floored_simplex(&(&y - g * step), self.floor);
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            y = &next + (&next - &*x) * ((t - 1.0) / t_next);
            *x = next;
            t = t_next;
            if iter % 50 == 0 {
                let active = active_of(x);
                if active.iter().any(|a| !a) && self.kkt_residual(x, &active) <= tol {
                    return (iter + 1, active);
                }
            }
        }
        let active = active_of(x);
        (PG_MAX_ITERS, active)
    }

    /// Snap floored coordinates to the floor and make the sum exact.
    fn clean(&self, x: &mut DVector<f64>, active: &[bool]) {
        let n = self.dim();
        for i in 0..n {
            if active[i] || x[i] < self.floor {
                x[i] = self.floor;
            }
        }
        let mut k = 0;
        for i in 1..n {
            if x[i] > x[k] {
                k = i;
            }
        }
        let rest: f64 = (0..n).filter(|&i| i != k).map(|i| x[i]).sum();
        x[k] = 1.0 - rest;
    }
}

/// Euclidean projection onto `{x : x ≥ floor, Σx = 1}`.
pub fn project_floored_simplex(v: &DVector<f64>, floor: f64) -> DVector<f64> {
    let n = v.len();
    let mass = 1.0 - n as f64 * floor;
    let shifted: Vec<f64> = v.iter().map(|x| x - floor).collect();
    let mut sorted = shifted.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - mass) / (i + 1) as f64;
        if s - candidate > 0.0 {
            theta = candidate;
        }
    }
    DVector::from_fn(n, |i, _| (shifted[i] - theta).max(0.0) + floor)
}

/// Best response of the risk-averse player to `varsigma` under payoffs `m`.
pub fn risk_averse_best_response(
    varsigma: &MixedStrategy,
    m: &PayoffMatrix,
    profile: &RiskProfile,
    tol: f64,
) -> Result<BestResponseResult> {
    best_response_from(varsigma, m, profile, tol, None)
}

/// As [`risk_averse_best_response`], warm-started from a working set.
pub fn best_response_from(
    varsigma: &MixedStrategy,
    m: &PayoffMatrix,
    profile: &RiskProfile,
    tol: f64,
    warm_active: Option<&[bool]>,
) -> Result<BestResponseResult> {
    profile.check_actions(m.nrows())?;
    let linear = risk::action_means(varsigma, m)?;
    let cov = risk::weighted_covariance(varsigma, m)?;
    MeanVarianceQp {
        linear: &linear,
        covariance: cov.matrix(),
        gamma: profile.gamma,
        floor: profile.epsilon,
    }
    .solve_from(tol, warm_active)
}

/// Working set implied by a solution: coordinates sitting on the floor.
pub fn working_set(strategy: &MixedStrategy, floor: f64) -> Vec<bool> {
    strategy.probs().iter().map(|&p| p <= floor).collect()
}

// ---------------------------------------------------------------------------
// Grid oracle

/// Largest action count the grid oracle accepts.
pub const GRID_MAX_ACTIONS: usize = 4;

struct Grid {
    n: usize,
    divisions: usize,
    floor: f64,
}

impl Grid {
    fn new(n: usize, grid_step: f64, floor: f64) -> Result<Self> {
        if n > GRID_MAX_ACTIONS {
            return Err(Error::Capability(format!(
                "grid enumeration supports at most {GRID_MAX_ACTIONS} actions, got {n}"
            )));
        }
        if !(grid_step > 0.0 && grid_step <= 0.1) {
            return Err(Error::Config(format!(
                "grid_step must lie in (0, 0.1], got {grid_step}"
            )));
        }
        crate::game::check_floor(n, floor)?;
        Ok(Grid {
            n,
            divisions: (1.0 / grid_step - 1e-9).ceil() as usize,
            floor,
        })
    }

    /// Visit every grid point `σ = ε + (1 - nε) k / K` with `Σk = K`, in
    /// lexicographic order of `k` from the largest first coordinate down.
    fn for_each(&self, mut visit: impl FnMut(&[f64])) {
        let mass = 1.0 - self.n as f64 * self.floor;
        let k_total = self.divisions;
        let mut counts = vec![0usize; self.n];
        let mut point = vec![0.0; self.n];
        fn recurse(
            idx: usize,
            remaining: usize,
            counts: &mut [usize],
            point: &mut [f64],
            grid: (usize, f64, f64),
            visit: &mut dyn FnMut(&[f64]),
        ) {
            let (k_total, mass, floor) = grid;
            let n = counts.len();
            if idx == n - 1 {
                counts[idx] = remaining;
                point[idx] = floor + mass * remaining as f64 / k_total as f64;
                visit(point);
                return;
            }
            for c in (0..=remaining).rev() {
                counts[idx] = c;
                point[idx] = floor + mass * c as f64 / k_total as f64;
                recurse(idx + 1, remaining - c, counts, point, grid, visit);
            }
        }
        recurse(
            0,
            k_total,
            &mut counts,
            &mut point,
            (k_total, mass, self.floor),
            &mut visit,
        );
    }
}

/// Grid-search maximiser of the total utility; a verification oracle for
/// [`risk_averse_best_response`] on games with at most four actions.
pub fn brute_force_best_response(
    varsigma: &MixedStrategy,
    m: &PayoffMatrix,
    profile: &RiskProfile,
    grid_step: f64,
) -> Result<MixedStrategy> {
    let grid = Grid::new(m.nrows(), grid_step, profile.epsilon)?;
    let u = risk::action_means(varsigma, m)?;
    let cov = risk::weighted_covariance(varsigma, m)?;
    let c = cov.matrix();
    let n = m.nrows();
    let mut best = vec![0.0; n];
    let mut best_value = f64::NEG_INFINITY;
    grid.for_each(|p| {
        let value = grid_value(p, &u, c, profile.gamma);
        if value > best_value {
            best_value = value;
            best.copy_from_slice(p);
        }
    });
    // Grid points sum to one up to rounding; renormalise for the invariant.
    let sum: f64 = best.iter().sum();
    Ok(MixedStrategy::from_vec_unchecked(
        best.iter().map(|p| p / sum).collect(),
    ))
}

fn grid_value(p: &[f64], u: &DVector<f64>, c: &DMatrix<f64>, gamma: f64) -> f64 {
    let n = p.len();
    let mut lin = 0.0;
    let mut quad = 0.0;
    for j in 0..n {
        lin += u[j] * p[j];
        let mut row = 0.0;
        for k in 0..n {
            row += c[(j, k)] * p[k];
        }
        quad += p[j] * row;
    }
    lin - gamma * quad
}

/// Minimum-variance check: `true` iff no grid point reaches at least the
/// result's expected utility with strictly smaller variance.
pub fn check_min_variance(
    varsigma: &MixedStrategy,
    m: &PayoffMatrix,
    profile: &RiskProfile,
    result: &BestResponseResult,
    grid_step: f64,
) -> Result<bool> {
    let grid = Grid::new(m.nrows(), grid_step, profile.epsilon)?;
    let u = risk::action_means(varsigma, m)?;
    let cov = risk::weighted_covariance(varsigma, m)?;
    let c = cov.matrix();
    let target_eu = u.dot(&result.strategy.to_dvector());
    let target_var = risk::strategy_variance(&result.strategy, &cov)?;
    let eu_slack = 1e-12 * (1.0 + u.amax());
    let var_slack = 1e-9 * (1.0 + target_var);
    let mut dominated = false;
    grid.for_each(|p| {
        if dominated {
            return;
        }
        let eu: f64 = (0..p.len()).map(|j| u[j] * p[j]).sum();
        if eu >= target_eu - eu_slack {
            let var = grid_value(p, &DVector::zeros(p.len()), c, -1.0);
            if var < target_var - var_slack {
                dominated = true;
            }
        }
    });
    Ok(!dominated)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(p: &[f64]) -> MixedStrategy {
        MixedStrategy::new(p.to_vec()).unwrap()
    }

    fn profile(gamma: f64, epsilon: f64) -> RiskProfile {
        RiskProfile::new(gamma, epsilon).unwrap()
    }

    #[test]
    fn linear_objective_hits_floored_vertex() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 4.0, 2.0, 1.0, 0.0, 0.5, 0.5]);
        let r = risk_averse_best_response(&MixedStrategy::uniform(3), &m, &profile(0.0, 0.01), DEFAULT_TOL).unwrap();
        assert_eq!(r.strategy.probs(), &[0.01, 0.98, 0.01]);
        assert!(r.kkt_residual <= DEFAULT_TOL);
    }

    #[test]
    fn safe_action_wins_at_high_gamma() {
        let m = DMatrix::from_row_slice(2, 2, &[5.0, 5.0, 20.0, -30.0]);
        let half = s(&[0.5, 0.5]);
        let eps = 0.001;
        for gamma in [0.0, 10.0] {
            let r = risk_averse_best_response(&half, &m, &profile(gamma, eps), DEFAULT_TOL).unwrap();
            let grid = brute_force_best_response(&half, &m, &profile(gamma, eps), 1e-4).unwrap();
            assert!((r.strategy.probs()[0] - grid.probs()[0]).abs() < 2e-4);
            // u = [5, -5]: the safe row is better even in expectation.
            assert!((r.strategy.probs()[0] - (1.0 - eps)).abs() < 1e-12);
        }
        // Overtaking pays in expectation here; risk aversion reverses it.
        let m = DMatrix::from_row_slice(2, 2, &[5.0, 5.0, 20.0, -5.0]);
        let r0 = risk_averse_best_response(&half, &m, &profile(0.0, eps), DEFAULT_TOL).unwrap();
        assert_eq!(r0.strategy.probs(), &[eps, 1.0 - eps]);
        let r10 = risk_averse_best_response(&half, &m, &profile(10.0, eps), DEFAULT_TOL).unwrap();
        let grid = brute_force_best_response(&half, &m, &profile(10.0, eps), 1e-4).unwrap();
        assert!(r10.strategy.probs()[0] > 0.99);
        assert!((r10.strategy.probs()[0] - grid.probs()[0]).abs() < 2e-4);
    }

    #[test]
    fn single_action() {
        let m = DMatrix::from_element(1, 3, 2.0);
        let r = risk_averse_best_response(&MixedStrategy::uniform(3), &m, &profile(3.0, 0.5), DEFAULT_TOL).unwrap();
        assert_eq!(r.strategy.probs(), &[1.0]);
    }

    #[test]
    fn infeasible_floor_is_config_error() {
        let m = DMatrix::identity(3, 3);
        let r = risk_averse_best_response(&MixedStrategy::uniform(3), &m, &profile(1.0, 0.34), DEFAULT_TOL);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn identity_game_hedges_to_uniform() {
        let m = DMatrix::identity(2, 2);
        let half = s(&[0.5, 0.5]);
        let grid = brute_force_best_response(&half, &m, &profile(10.0, 0.0), 1e-3).unwrap();
        assert!((grid.probs()[0] - 0.5).abs() < 1e-12);
        let r = risk_averse_best_response(&half, &m, &profile(10.0, 0.0), DEFAULT_TOL).unwrap();
        assert!((r.strategy.probs()[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn grid_oracle_gamma_zero_is_floored_argmax() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 3.0, -1.0, 0.0, 1.0, 1.0, 1.0]);
        let opp = s(&[0.2, 0.5, 0.3]);
        // M ς = [1.1, 0.1, 1.0]
        let grid = brute_force_best_response(&opp, &m, &profile(0.0, 0.05), 0.01).unwrap();
        assert!((grid.probs()[0] - 0.9).abs() < 1e-12);
        assert!((grid.probs()[1] - 0.05).abs() < 1e-12);
    }

    #[test]
    fn grid_oracle_limits() {
        let m = DMatrix::identity(5, 5);
        let r = brute_force_best_response(&MixedStrategy::uniform(5), &m, &profile(1.0, 0.0), 0.1);
        assert!(matches!(r, Err(Error::Capability(_))));
        let m = DMatrix::identity(2, 2);
        assert!(brute_force_best_response(&MixedStrategy::uniform(2), &m, &profile(1.0, 0.0), 0.2).is_err());
    }

    #[test]
    fn min_variance_detects_violation() {
        // Every strategy earns 0.5 against uniform; only uniform has zero variance.
        let m = DMatrix::identity(2, 2);
        let half = s(&[0.5, 0.5]);
        let p = profile(1.0, 0.0);
        let good = risk_averse_best_response(&half, &m, &p, DEFAULT_TOL).unwrap();
        assert!(check_min_variance(&half, &m, &p, &good, 0.01).unwrap());
        let bad = BestResponseResult {
            strategy: s(&[0.8, 0.2]),
            ..good
        };
        assert!(!check_min_variance(&half, &m, &p, &bad, 0.01).unwrap());
    }

    #[test]
    fn projection_lands_on_floored_simplex() {
        let v = DVector::from_column_slice(&[3.0, -1.0, 0.2, 0.1]);
        let p = project_floored_simplex(&v, 0.05);
        assert!((p.sum() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.05));
        assert!((p[0] - 0.85).abs() < 1e-12);
    }

    #[test]
    fn warm_start_matches_cold_start() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, -2.0, 1.0, 0.0, 3.0, 1.0, 1.0, 1.0, 2.0]);
        let opp = s(&[0.3, 0.3, 0.4]);
        let p = profile(0.4, 0.01);
        let cold = risk_averse_best_response(&opp, &m, &p, DEFAULT_TOL).unwrap();
        let warm = best_response_from(&opp, &m, &p, DEFAULT_TOL, Some(&[false, false, false])).unwrap();
        assert!(cold.strategy.distance(&warm.strategy) < 1e-9);
    }
}
