//! Dense revised simplex for `min cᵀy  s.t.  M y = b, y ≥ 0`.
//!
//! The basis inverse is kept explicitly (column-major) and updated with
//! product-form eta steps that skip zero entries, which keeps the per-iteration
//! cost proportional to the fill of the inverse rather than `m²`. Pricing is
//! Dantzig's rule with lowest-index tie breaking; after a run of degenerate
//! pivots the solver falls back to Bland's rule until the objective moves.

use super::{LpConfig, LpError};

/// Sparse column storage of the constraint matrix plus costs and right-hand side.
#[derive(Debug, Clone, Default)]
pub(crate) struct StandardForm {
    pub m: usize,
    pub col_start: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub vals: Vec<f64>,
    pub cost: Vec<f64>,
    pub rhs: Vec<f64>,
    /// A structural column equal to `+e_i`, usable as an initial basic slack for row `i`.
    pub unit_col: Vec<Option<usize>>,
}

impl StandardForm {
    pub fn new(m: usize, rhs: Vec<f64>) -> Self {
        StandardForm {
            m,
            col_start: vec![0],
            rhs,
            unit_col: vec![None; m],
            ..Default::default()
        }
    }

    pub fn n(&self) -> usize {
        self.cost.len()
    }

    pub fn push_column(&mut self, entries: &[(usize, f64)], cost: f64) -> usize {
        let j = self.cost.len();
        for &(r, v) in entries {
            if v != 0.0 {
                self.row_idx.push(r);
                self.vals.push(v);
            }
        }
        self.col_start.push(self.row_idx.len());
        self.cost.push(cost);
        if entries.len() == 1 && entries[0].1 == 1.0 && self.unit_col[entries[0].0].is_none() {
            self.unit_col[entries[0].0] = Some(j);
        }
        j
    }

    fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_start[j]..self.col_start[j + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    /// The objective decreases without bound along a feasible ray.
    Unbounded,
    /// No `y ≥ 0` satisfies `M y = b`.
    Infeasible,
}

#[derive(Debug, Clone)]
pub(crate) struct SimplexResult {
    pub outcome: Outcome,
    /// Value of every structural column.
    pub y: Vec<f64>,
    /// Simplex multipliers `π = B⁻ᵀ c_B`.
    pub pi: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

const NONE: usize = usize::MAX;
const DROP: f64 = 1e-14;
/// Reduced cost below which a direction without a blocking row counts as a ray.
const RAY_TOLERANCE: f64 = 1e-7;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

struct Simplex<'a> {
    sf: &'a StandardForm,
    cfg: &'a LpConfig,
    m: usize,
    n: usize,
    /// Basis position -> column; artificial for row `i` is column `n + i`.
    basis: Vec<usize>,
    /// Column -> basis position.
    pos: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    art_sign: Vec<f64>,
    /// Right-hand side in use; equals `sf.rhs` outside the perturbed solve.
    rhs: Vec<f64>,
    iterations: usize,
}

impl<'a> Simplex<'a> {
    fn new(sf: &'a StandardForm, cfg: &'a LpConfig) -> Self {
        let m = sf.m;
        let n = sf.n();
        let mut s = Simplex {
            sf,
            cfg,
            m,
            n,
            basis: vec![NONE; m],
            pos: vec![NONE; n + m],
            binv: vec![0.0; m * m],
            xb: vec![0.0; m],
            art_sign: vec![1.0; m],
            rhs: perturbed_rhs(&sf.rhs, cfg.perturbation),
            iterations: 0,
        };
        for i in 0..m {
            let b = s.rhs[i];
            let col = match sf.unit_col[i] {
                Some(j) if b >= 0.0 => j,
                _ => {
                    s.art_sign[i] = if b < 0.0 { -1.0 } else { 1.0 };
                    n + i
                }
            };
            s.basis[i] = col;
            s.pos[col] = i;
            let sign = if col >= n { s.art_sign[i] } else { 1.0 };
            s.binv[i * m + i] = sign;
            s.xb[i] = b * sign;
        }
        s
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.n
    }

    fn cost(&self, col: usize, phase: Phase) -> f64 {
        match (phase, self.is_artificial(col)) {
            (Phase::One, true) => 1.0,
            (Phase::One, false) => 0.0,
            (Phase::Two, true) => 0.0,
            (Phase::Two, false) => self.sf.cost[col],
        }
    }

    fn multipliers(&self, phase: Phase) -> Vec<f64> {
        let m = self.m;
        let mut pi = vec![0.0; m];
        for k in 0..m {
            let c = self.cost(self.basis[k], phase);
            if c != 0.0 {
                for (i, p) in pi.iter_mut().enumerate() {
                    *p += c * self.binv[i * m + k];
                }
            }
        }
        pi
    }

    fn reduced_cost(&self, j: usize, pi: &[f64], phase: Phase) -> f64 {
        let mut d = self.cost(j, phase);
        for (r, v) in self.sf.column(j) {
            d -= pi[r] * v;
        }
        d
    }

    fn objective(&self, phase: Phase) -> f64 {
        (0..self.m)
            .map(|k| self.cost(self.basis[k], phase) * self.xb[k])
            .sum()
    }

    /// `B⁻¹ a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut u = vec![0.0; m];
        for (r, v) in self.sf.column(j) {
            let col = &self.binv[r * m..(r + 1) * m];
            for (ui, bi) in u.iter_mut().zip(col) {
                *ui += v * bi;
            }
        }
        u
    }

    fn pivot(&mut self, entering: usize, r: usize, u: &[f64]) {
        let m = self.m;
        let ur = u[r];
        let nz: Vec<usize> = (0..m).filter(|&i| i != r && u[i].abs() > DROP).collect();
        for c in 0..m {
            let col = &mut self.binv[c * m..(c + 1) * m];
            let t = col[r];
            if t == 0.0 {
                continue;
            }
            let t = t / ur;
            for &i in &nz {
                let v = col[i] - u[i] * t;
                col[i] = if v.abs() < DROP { 0.0 } else { v };
            }
            col[r] = t;
        }
        let theta = self.xb[r] / ur;
        for &i in &nz {
            self.xb[i] -= theta * u[i];
        }
        self.xb[r] = theta;
        let leaving = self.basis[r];
        self.pos[leaving] = NONE;
        self.basis[r] = entering;
        self.pos[entering] = r;
        self.iterations += 1;
    }

    /// Rebuilds the inverse from the basis columns and recomputes `x_B`.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        // Row-major augmented [B | I].
        let w = 2 * m;
        let mut a = vec![0.0; m * w];
        for (k, &col) in self.basis.iter().enumerate() {
            if self.is_artificial(col) {
                let i = col - self.n;
                a[i * w + k] = self.art_sign[i];
            } else {
                for (r, v) in self.sf.column(col) {
                    a[r * w + k] = v;
                }
            }
        }
        for i in 0..m {
            a[i * w + m + i] = 1.0;
        }
        let mut done = vec![false; m];
        let mut pivot_row_of = vec![0usize; m];
        for k in 0..m {
            let mut best = NONE;
            let mut best_val = 0.0;
            for i in 0..m {
                if !done[i] && a[i * w + k].abs() > best_val {
                    best_val = a[i * w + k].abs();
                    best = i;
                }
            }
            if best == NONE || best_val < self.cfg.pivot_tolerance {
                return Err(LpError::SingularBasis {
                    iteration: self.iterations,
                    column: self.basis[k],
                    pivot: best_val,
                });
            }
            done[best] = true;
            pivot_row_of[k] = best;
            let p = a[best * w + k];
            let support: Vec<usize> = (0..w).filter(|&c| a[best * w + c] != 0.0).collect();
            for &c in &support {
                a[best * w + c] /= p;
            }
            let prow: Vec<(usize, f64)> = support.iter().map(|&c| (c, a[best * w + c])).collect();
            for i in 0..m {
                if i == best {
                    continue;
                }
                let f = a[i * w + k];
                if f == 0.0 {
                    continue;
                }
                for &(c, v) in &prow {
                    let x = a[i * w + c] - f * v;
                    a[i * w + c] = if x.abs() < DROP { 0.0 } else { x };
                }
            }
        }
        // Row `pivot_row_of[k]` of the right half now holds row k of B⁻¹.
        for k in 0..m {
            let src = pivot_row_of[k];
            for c in 0..m {
                self.binv[c * m + k] = a[src * w + m + c];
            }
        }
        for k in 0..m {
            self.xb[k] = (0..m)
                .map(|c| self.binv[c * m + k] * self.rhs[c])
                .sum();
        }
        Ok(())
    }

    /// Runs one phase to optimality. Returns `false` on an unbounded ray.
    fn run(&mut self, phase: Phase) -> Result<bool, LpError> {
        let tol = self.cfg.optimality_tolerance_internal;
        let mut degenerate_run = 0usize;
        let mut since_refactor = 0usize;
        let mut weight = vec![1.0; self.n];
        // Columns whose entering direction is numerically empty; the final
        // check in `solve` prices them again on a fresh inverse.
        let mut rejected = vec![false; self.n];
        loop {
            if self.iterations >= self.cfg.max_iterations {
                return Err(LpError::IterationLimit(self.iterations));
            }
            if self.cfg.refactor_interval > 0 && since_refactor >= self.cfg.refactor_interval {
                self.refactor()?;
                since_refactor = 0;
            }
            let pi = self.multipliers(phase);
            let bland = degenerate_run >= self.cfg.degenerate_switch;
            if self.iterations % 1000 == 0 && log::log_enabled!(log::Level::Debug) {
                let fill = self.binv.iter().filter(|v| **v != 0.0).count();
                log::debug!(
                    "iter {} phase {} obj {:.9} degenerate {} bland {} fill {:.4}",
                    self.iterations,
                    if phase == Phase::One { 1 } else { 2 },
                    self.objective(phase),
                    degenerate_run,
                    bland,
                    fill as f64 / (self.m * self.m) as f64
                );
            }
            let mut entering = NONE;
            let mut best = -tol;
            let mut score = 0.0;
            for j in 0..self.n {
                if self.pos[j] != NONE || rejected[j] {
                    continue;
                }
                let d = self.reduced_cost(j, &pi, phase);
                if d < -tol {
                    if bland {
                        entering = j;
                        best = d;
                        break;
                    }
                    let sc = d * d / weight[j];
                    if sc > score {
                        score = sc;
                        entering = j;
                        best = d;
                    }
                }
            }
            if entering == NONE {
                return Ok(true);
            }
            let u = self.ftran(entering);
            let Some(r) = self.ratio_test(&u, phase, bland) else {
                if best < -RAY_TOLERANCE {
                    return Ok(false);
                }
                log::debug!(
                    "iteration {}: column {entering} has d = {best:e} and no blocking row, skipped",
                    self.iterations
                );
                rejected[entering] = true;
                continue;
            };
            let step = self.xb[r].max(0.0) / u[r];
            if step * best.abs() > 1e-12 {
                degenerate_run = 0;
            } else {
                degenerate_run += 1;
            }
            self.update_devex(&mut weight, entering, r, u[r]);
            self.pivot(entering, r, &u);
            since_refactor += 1;
        }
    }

    /// Devex reference weights from the pivot row `e_rᵀ B⁻¹ A`.
    fn update_devex(&self, weight: &mut [f64], entering: usize, r: usize, ur: f64) {
        let m = self.m;
        let rho: Vec<f64> = (0..m).map(|c| self.binv[c * m + r]).collect();
        let wq = weight[entering];
        for j in 0..self.n {
            if self.pos[j] != NONE || j == entering {
                continue;
            }
            let a: f64 = self.sf.column(j).map(|(i, v)| rho[i] * v).sum();
            if a != 0.0 {
                let ratio = a / ur;
                weight[j] = weight[j].max(ratio * ratio * wq);
            }
        }
        let leaving = self.basis[r];
        if leaving < self.n {
            weight[leaving] = (wq / (ur * ur)).max(1.0);
        }
    }

    fn ratio_test(&self, u: &[f64], phase: Phase, bland: bool) -> Option<usize> {
        let ptol = self.cfg.pivot_tolerance;
        let ftol = self.cfg.feasibility_tolerance;
        if phase == Phase::Two {
            // Basic artificials are fixed at zero and leave at the first chance.
            let mut pick = NONE;
            let mut best = 0.0;
            for k in 0..self.m {
                if self.is_artificial(self.basis[k]) && u[k].abs() > ptol.max(1e-7) && u[k].abs() > best {
                    best = u[k].abs();
                    pick = k;
                }
            }
            if pick != NONE {
                return Some(pick);
            }
        }
        if bland {
            let mut best = f64::INFINITY;
            for k in 0..self.m {
                if u[k] > ptol {
                    best = best.min(self.xb[k].max(0.0) / u[k]);
                }
            }
            return (0..self.m)
                .filter(|&k| u[k] > ptol && self.xb[k].max(0.0) / u[k] <= best)
                .min_by_key(|&k| self.basis[k]);
        }
        // Harris two-pass test.
        let mut bound = f64::INFINITY;
        for k in 0..self.m {
            if u[k] > ptol {
                bound = bound.min((self.xb[k].max(0.0) + ftol) / u[k]);
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let mut pick = NONE;
        for k in 0..self.m {
            if u[k] > ptol && self.xb[k].max(0.0) / u[k] <= bound {
                let better = pick == NONE
                    || u[k] > u[pick] + 1e-12
                    || (u[k] >= u[pick] - 1e-12 && self.basis[k] < self.basis[pick]);
                if better {
                    pick = k;
                }
            }
        }
        (pick != NONE).then_some(pick)
    }

    /// Dual simplex from a dual-feasible basis until `x_B ≥ 0`.
    fn run_dual(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let ftol = self.cfg.feasibility_tolerance;
        let ptol = self.cfg.pivot_tolerance;
        loop {
            if self.iterations >= self.cfg.max_iterations {
                return Err(LpError::IterationLimit(self.iterations));
            }
            let mut r = NONE;
            let mut worst = -ftol;
            for k in 0..m {
                if !self.is_artificial(self.basis[k]) && self.xb[k] < worst {
                    worst = self.xb[k];
                    r = k;
                }
            }
            if r == NONE {
                return Ok(());
            }
            let rho: Vec<f64> = (0..m).map(|c| self.binv[c * m + r]).collect();
            let pi = self.multipliers(Phase::Two);
            let mut entering = NONE;
            let mut best = f64::INFINITY;
            for j in 0..self.n {
                if self.pos[j] != NONE {
                    continue;
                }
                let a: f64 = self.sf.column(j).map(|(i, v)| rho[i] * v).sum();
                if a < -ptol {
                    let ratio = self.reduced_cost(j, &pi, Phase::Two).max(0.0) / -a;
                    if ratio < best {
                        best = ratio;
                        entering = j;
                    }
                }
            }
            if entering == NONE {
                return Err(LpError::NumericalFailure(format!(
                    "row {r} cannot be made feasible after removing the perturbation"
                )));
            }
            let u = self.ftran(entering);
            self.pivot(entering, r, &u);
        }
    }

    fn artificial_load(&self) -> f64 {
        (0..self.m)
            .filter(|&k| self.is_artificial(self.basis[k]))
            .map(|k| self.xb[k].abs())
            .sum()
    }

    fn result(&self, outcome: Outcome, phase: Phase) -> SimplexResult {
        let mut y = vec![0.0; self.n];
        for (k, &col) in self.basis.iter().enumerate() {
            if col < self.n {
                y[col] = self.xb[k].max(0.0);
            }
        }
        SimplexResult {
            outcome,
            y,
            pi: self.multipliers(phase),
            objective: self.objective(phase),
            iterations: self.iterations,
        }
    }
}

/// Deterministic positive shifts of size `scale · (1 + frac)` against degeneracy.
fn perturbed_rhs(rhs: &[f64], scale: f64) -> Vec<f64> {
    if scale <= 0.0 {
        return rhs.to_vec();
    }
    rhs.iter()
        .enumerate()
        .map(|(i, &b)| {
            let h = (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 40;
            let frac = h as f64 / (1u64 << 24) as f64;
            b + scale * (1.0 + frac) * (1.0 + b.abs())
        })
        .collect()
}

pub(crate) fn solve(sf: &StandardForm, cfg: &LpConfig) -> Result<SimplexResult, LpError> {
    let mut s = Simplex::new(sf, cfg);
    if s.basis.iter().any(|&c| c >= s.n) {
        let bounded = s.run(Phase::One)?;
        debug_assert!(bounded, "phase one is bounded below by zero");
        if s.artificial_load() > cfg.feasibility_tolerance * (1.0 + sf.rhs.iter().map(|b| b.abs()).sum::<f64>()) {
            return Ok(s.result(Outcome::Infeasible, Phase::One));
        }
    }
    for round in 0..4 {
        if !s.run(Phase::Two)? {
            return Ok(s.result(Outcome::Unbounded, Phase::Two));
        }
        if round == 0 && cfg.perturbation > 0.0 {
            // Drop the perturbation; the basis stays dual feasible.
            s.rhs.clone_from(&sf.rhs);
            s.refactor()?;
            s.run_dual()?;
            continue;
        }
        if !cfg.final_refactor {
            break;
        }
        // Clear accumulated drift and confirm optimality on a fresh inverse.
        s.refactor()?;
        let infeasible = (0..s.m)
            .any(|k| s.xb[k] < -cfg.feasibility_tolerance && !s.is_artificial(s.basis[k]));
        if infeasible {
            return Err(LpError::NumericalFailure(format!(
                "basic solution infeasible after refactorization at iteration {}",
                s.iterations
            )));
        }
        let pi = s.multipliers(Phase::Two);
        let tol = cfg.optimality_tolerance_internal;
        if !(0..s.n).any(|j| s.pos[j] == NONE && s.reduced_cost(j, &pi, Phase::Two) < -tol) {
            break;
        }
    }
    Ok(s.result(Outcome::Optimal, Phase::Two))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> LpConfig {
        LpConfig::default()
    }

    #[test]
    fn tiny_standard_form() {
        // min y0 + 2 y1  s.t.  y0 + y1 = 1,  y ≥ 0  → y0 = 1.
        let mut sf = StandardForm::new(1, vec![1.0]);
        sf.push_column(&[(0, 1.0)], 1.0);
        sf.push_column(&[(0, 1.0)], 2.0);
        let r = solve(&sf, &cfg()).unwrap();
        assert_eq!(r.outcome, Outcome::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-12);
        assert!((r.y[0] - 1.0).abs() < 1e-12);
        assert!((r.pi[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn needs_phase_one() {
        // min -y0  s.t.  y0 - y1 = -1, y0 + y2 = 3.
        let mut sf = StandardForm::new(2, vec![-1.0, 3.0]);
        sf.push_column(&[(0, 1.0), (1, 1.0)], -1.0);
        sf.push_column(&[(0, -1.0)], 0.0);
        sf.push_column(&[(1, 1.0)], 0.0);
        let r = solve(&sf, &cfg()).unwrap();
        assert_eq!(r.outcome, Outcome::Optimal);
        assert!((r.objective + 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut sf = StandardForm::new(1, vec![-1.0]);
        sf.push_column(&[(0, 1.0)], 0.0);
        assert_eq!(solve(&sf, &cfg()).unwrap().outcome, Outcome::Infeasible);

        let mut sf2 = StandardForm::new(1, vec![1.0]);
        sf2.push_column(&[(0, 1.0)], 0.0);
        sf2.push_column(&[], -1.0);
        assert_eq!(solve(&sf2, &cfg()).unwrap().outcome, Outcome::Unbounded);
    }

    #[test]
    fn refactor_matches_updates() {
        let mut sf = StandardForm::new(3, vec![1.0, 2.0, 3.0]);
        sf.push_column(&[(0, 1.0), (1, 1.0)], -1.0);
        sf.push_column(&[(1, 1.0), (2, 2.0)], -1.0);
        sf.push_column(&[(0, 1.0)], 0.0);
        sf.push_column(&[(1, 1.0)], 0.0);
        sf.push_column(&[(2, 1.0)], 0.0);
        let config = cfg();
        let mut s = Simplex::new(&sf, &config);
        assert!(s.run(Phase::Two).unwrap());
        let binv = s.binv.clone();
        let xb = s.xb.clone();
        s.refactor().unwrap();
        for (a, b) in binv.iter().zip(&s.binv) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in xb.iter().zip(&s.xb) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
