//! Minimization over entropy coordinates and named scalars, with exact
//! dual certificates.
//!
//! A [`LinearProgram`] minimizes an affine objective subject to tagged
//! constraints `form ≥ 0` / `form = 0`, with every entropy coordinate
//! implicitly `≥ 0` and scalars free. [`solve_min`] works on the dual in
//! standard form (one row per primal variable, one column per constraint),
//! which keeps the basis at the number of coordinates instead of the number
//! of inequalities. The optimal dual point is a nonnegative combination of
//! constraints, so [`extract_certificate`] only has to rationalize it and
//! [`verify_certificate`] re-checks it in exact arithmetic.

mod aggregate;
mod certificate;
mod simplex;

pub use certificate::{
    extract_certificate, extract_certificate_with, verify_certificate, CertificateReport,
    DualCertificate,
};

use crate::entropy::{Constraint, GroundSet, LinearForm, Sense, SubsetId};
use crate::rational;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

/// Prefix of the implicit `H(S) ≥ 0` bound tags.
pub const BOUND_TAG_PREFIX: &str = "nonneg:";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("duplicate constraint tag {0:?}")]
    DuplicateTag(String),
    #[error("constraint tag {0:?} is reserved for coordinate bounds")]
    ReservedTag(String),
    #[error("{context} references coordinate {mask:#x} outside the ground set")]
    UnknownCoordinate { context: String, mask: u32 },
    #[error("{context} references undeclared scalar {name:?}")]
    UnknownScalar { context: String, name: String },
    #[error("duplicate scalar {0:?}")]
    DuplicateScalar(String),
    #[error("unknown constraint tag {0:?}")]
    UnknownTag(String),
    #[error("singular basis at iteration {iteration}: column {column} pivot {pivot:e}")]
    SingularBasis {
        iteration: usize,
        column: usize,
        pivot: f64,
    },
    #[error("iteration limit reached after {0} iterations")]
    IterationLimit(usize),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("solution status is {0:?}, a certificate needs an optimal solution")]
    NotOptimal(Status),
    #[error("rationalized duals do not verify exactly: {reason}")]
    Rationalization {
        reason: String,
        float_duals: Vec<(String, f64)>,
    },
}

/// Solver tolerances and limits.
#[derive(Debug, Clone, PartialEq)]
pub struct LpConfig {
    /// Allowed constraint violation of the reported primal point.
    pub feasibility_tolerance: f64,
    /// Agreement required between primal and dual objective values.
    pub optimality_tolerance: f64,
    /// Reduced-cost threshold used for pricing.
    pub optimality_tolerance_internal: f64,
    pub pivot_tolerance: f64,
    pub max_iterations: usize,
    /// Refactorize the basis every this many pivots (0 = never during a phase).
    pub refactor_interval: usize,
    pub final_refactor: bool,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_switch: usize,
    /// Largest denominator tried when rounding dual weights.
    pub max_denominator: u64,
    /// Scale of the right-hand-side shift used during the first Phase II pass
    /// (0 disables it).
    pub perturbation: f64,
}

impl Default for LpConfig {
    fn default() -> Self {
        LpConfig {
            feasibility_tolerance: 1e-9,
            optimality_tolerance: 1e-6,
            optimality_tolerance_internal: 1e-9,
            pivot_tolerance: 1e-9,
            max_iterations: 1_000_000,
            refactor_interval: 0,
            final_refactor: true,
            degenerate_switch: 5_000,
            max_denominator: 1_000_000,
            perturbation: 1e-7,
        }
    }
}

/// Resolved reference to a certificate tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagRef {
    Constraint(usize),
    Bound(SubsetId),
}

/// A minimization problem. Entropy coordinates are `≥ 0`; scalars are free.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    ground: GroundSet,
    scalars: Vec<String>,
    constraints: Vec<Constraint>,
    objective: LinearForm,
    tags: HashMap<String, usize>,
}

impl LinearProgram {
    pub fn new(
        ground: GroundSet,
        scalars: Vec<String>,
        objective: LinearForm,
    ) -> Result<Self, LpError> {
        for (i, s) in scalars.iter().enumerate() {
            if scalars[..i].contains(s) {
                return Err(LpError::DuplicateScalar(s.clone()));
            }
        }
        let mut p = LinearProgram {
            ground,
            scalars,
            constraints: Vec::new(),
            objective: LinearForm::zero(),
            tags: HashMap::new(),
        };
        p.set_objective(objective)?;
        Ok(p)
    }

    fn check_refs(&self, form: &LinearForm, context: &str) -> Result<(), LpError> {
        for s in form.entropy_terms().keys() {
            if !self.ground.contains_mask(s.mask()) {
                return Err(LpError::UnknownCoordinate {
                    context: context.to_string(),
                    mask: s.mask(),
                });
            }
        }
        for name in form.scalar_terms().keys() {
            if !self.scalars.contains(name) {
                return Err(LpError::UnknownScalar {
                    context: context.to_string(),
                    name: name.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn set_objective(&mut self, objective: LinearForm) -> Result<(), LpError> {
        self.check_refs(&objective, "objective")?;
        self.objective = objective;
        Ok(())
    }

    pub fn add_constraint(&mut self, c: Constraint) -> Result<(), LpError> {
        if c.tag.starts_with(BOUND_TAG_PREFIX) {
            return Err(LpError::ReservedTag(c.tag));
        }
        if self.tags.contains_key(&c.tag) {
            return Err(LpError::DuplicateTag(c.tag));
        }
        self.check_refs(&c.form, &c.tag)?;
        self.tags.insert(c.tag.clone(), self.constraints.len());
        self.constraints.push(c);
        Ok(())
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Constraint>) -> Result<(), LpError> {
        cs.into_iter().try_for_each(|c| self.add_constraint(c))
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn scalars(&self) -> &[String] {
        &self.scalars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &LinearForm {
        &self.objective
    }

    pub fn constraint(&self, tag: &str) -> Option<&Constraint> {
        self.tags.get(tag).map(|&i| &self.constraints[i])
    }

    /// Tag of the implicit `H(S) ≥ 0` bound.
    pub fn bound_tag(&self, s: SubsetId) -> String {
        format!("{BOUND_TAG_PREFIX}H({})", self.ground.label(s.mask()))
    }

    pub fn resolve_tag(&self, tag: &str) -> Option<TagRef> {
        if let Some(&i) = self.tags.get(tag) {
            return Some(TagRef::Constraint(i));
        }
        let inner = tag.strip_prefix(BOUND_TAG_PREFIX)?;
        let labels = inner.strip_prefix("H(")?.strip_suffix(')')?;
        let labels: Vec<&str> = labels.split(',').collect();
        let s = self.ground.subset(&labels).ok()?;
        (self.bound_tag(s) == tag).then_some(TagRef::Bound(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Unbounded,
    Infeasible,
}

/// Primal assignment: dense entropy table (index = mask − 1) and scalars.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimalPoint {
    pub entropy: Vec<f64>,
    pub scalars: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub status: Status,
    pub objective_value: f64,
    pub primal: PrimalPoint,
    pub iterations: usize,
    /// Float dual weight per constraint, in program order.
    pub duals: Vec<f64>,
    /// Float dual weight per implicit coordinate bound (index = mask − 1).
    pub bound_duals: Vec<f64>,
    /// Largest constraint violation of `primal`.
    pub max_violation: f64,
}

/// Layout of the dual standard form.
struct DualLayout {
    /// Mask of each entropy row.
    row_mask: Vec<u32>,
    /// Row of each scalar, in declaration order.
    scalar_row: Vec<usize>,
    /// `(constraint index, sign)` of each structural column, or the bound row.
    columns: Vec<ColumnOrigin>,
}

#[derive(Debug, Clone, Copy)]
enum ColumnOrigin {
    Constraint(usize, f64),
    Bound(usize),
}

fn build_dual(p: &LinearProgram) -> (simplex::StandardForm, DualLayout) {
    // Presolve: keep only coordinates some constraint or the objective touches.
    let ncoord = p.ground.coordinate_count();
    let mut used = vec![false; ncoord];
    for c in &p.constraints {
        for s in c.form.entropy_terms().keys() {
            used[s.index()] = true;
        }
    }
    for s in p.objective.entropy_terms().keys() {
        used[s.index()] = true;
    }
    let mut coord_row = vec![None; ncoord];
    let mut row_mask = Vec::new();
    for (i, u) in used.iter().enumerate() {
        if *u {
            coord_row[i] = Some(row_mask.len());
            row_mask.push(i as u32 + 1);
        }
    }
    let scalar_row: Vec<usize> = (0..p.scalars.len()).map(|k| row_mask.len() + k).collect();
    let m = row_mask.len() + p.scalars.len();

    let mut rhs = vec![0.0; m];
    for (s, c) in p.objective.entropy_terms() {
        rhs[coord_row[s.index()].unwrap()] = rational::to_f64(c);
    }
    for (k, name) in p.scalars.iter().enumerate() {
        rhs[scalar_row[k]] = rational::to_f64(&p.objective.scalar_coef(name));
    }
    let mut sf = simplex::StandardForm::new(m, rhs);
    let mut columns = Vec::new();
    let mut entries = Vec::new();
    let scalar_index: HashMap<&str, usize> = p
        .scalars
        .iter()
        .enumerate()
        .map(|(k, s)| (s.as_str(), scalar_row[k]))
        .collect();
    for (ci, c) in p.constraints.iter().enumerate() {
        entries.clear();
        for (s, v) in c.form.entropy_terms() {
            entries.push((coord_row[s.index()].unwrap(), rational::to_f64(v)));
        }
        for (name, v) in c.form.scalar_terms() {
            entries.push((scalar_index[name.as_str()], rational::to_f64(v)));
        }
        let k = rational::to_f64(c.form.constant());
        sf.push_column(&entries, k);
        columns.push(ColumnOrigin::Constraint(ci, 1.0));
        if c.sense == Sense::Zero {
            let neg: Vec<(usize, f64)> = entries.iter().map(|&(r, v)| (r, -v)).collect();
            sf.push_column(&neg, -k);
            columns.push(ColumnOrigin::Constraint(ci, -1.0));
        }
    }
    for (r, _) in row_mask.iter().enumerate() {
        sf.push_column(&[(r, 1.0)], 0.0);
        columns.push(ColumnOrigin::Bound(r));
    }
    (
        sf,
        DualLayout {
            row_mask,
            scalar_row,
            columns,
        },
    )
}

/// Solves with [`LpConfig::default`].
pub fn solve_min(p: &LinearProgram) -> Result<Solution, LpError> {
    solve_min_with(p, &LpConfig::default())
}

/// Solves `p`. Coordinates tied by equalities are merged first; the returned
/// primal point covers every coordinate and is checked against all of `p`,
/// while `duals` refer to the merged program (see [`extract_certificate`]).
pub fn solve_min_with(p: &LinearProgram, cfg: &LpConfig) -> Result<Solution, LpError> {
    let Some(agg) = aggregate::Aggregation::build(p) else {
        return solve_direct(p, cfg);
    };
    log::debug!(
        "aggregation: {} classes, {} of {} constraints kept",
        agg.class_count(),
        agg.kept.len(),
        p.constraints().len()
    );
    let reduced = solve_direct(&agg.reduced, cfg)?;
    let mut solution = agg.lift_solution(p, reduced);
    if solution.status == Status::Optimal {
        check_primal(p, &mut solution, cfg)?;
    }
    Ok(solution)
}

fn solve_direct(p: &LinearProgram, cfg: &LpConfig) -> Result<Solution, LpError> {
    let (sf, layout) = build_dual(p);
    let res = simplex::solve(&sf, cfg)?;
    let ncoord = p.ground.coordinate_count();
    let obj_const = rational::to_f64(p.objective.constant());

    let status = match res.outcome {
        simplex::Outcome::Optimal => Status::Optimal,
        // Dual unbounded: the primal constraints cannot all hold.
        simplex::Outcome::Unbounded => Status::Infeasible,
        // Dual infeasible: no finite lower bound exists.
        simplex::Outcome::Infeasible => Status::Unbounded,
    };

    // Primal point is the negated simplex multiplier vector.
    let mut entropy = vec![0.0; ncoord];
    for (r, &mask) in layout.row_mask.iter().enumerate() {
        entropy[mask as usize - 1] = -res.pi[r];
    }
    let scalars: BTreeMap<String, f64> = p
        .scalars
        .iter()
        .enumerate()
        .map(|(k, name)| (name.clone(), -res.pi[layout.scalar_row[k]]))
        .collect();

    let mut duals = vec![0.0; p.constraints.len()];
    let mut bound_duals = vec![0.0; ncoord];
    for (j, origin) in layout.columns.iter().enumerate() {
        match *origin {
            ColumnOrigin::Constraint(ci, sign) => duals[ci] += sign * res.y[j],
            ColumnOrigin::Bound(r) => bound_duals[layout.row_mask[r] as usize - 1] = res.y[j],
        }
    }

    let primal = PrimalPoint { entropy, scalars };
    let mut solution = Solution {
        status,
        objective_value: f64::NAN,
        primal,
        iterations: res.iterations,
        duals,
        bound_duals,
        max_violation: 0.0,
    };
    if status != Status::Optimal {
        return Ok(solution);
    }

    check_primal(p, &mut solution, cfg)?;
    let dual_value = obj_const - res.objective;
    let value = solution.objective_value;
    if (value - dual_value).abs() > cfg.optimality_tolerance * (1.0 + value.abs()) {
        return Err(LpError::NumericalFailure(format!(
            "primal value {value} and dual value {dual_value} disagree"
        )));
    }
    Ok(solution)
}

/// Fills `max_violation` and `objective_value`, failing on an infeasible point.
fn check_primal(p: &LinearProgram, solution: &mut Solution, cfg: &LpConfig) -> Result<(), LpError> {
    let mut worst: f64 = solution
        .primal
        .entropy
        .iter()
        .map(|&h| (-h).max(0.0))
        .fold(0.0, f64::max);
    for c in &p.constraints {
        let v = crate::entropy::evaluate_f64(&c.form, &solution.primal.entropy, &solution.primal.scalars)
            .expect("constraint references declared variables");
        let viol = match c.sense {
            Sense::NonNegative => (-v).max(0.0),
            Sense::Zero => v.abs(),
        };
        worst = worst.max(viol);
    }
    solution.max_violation = worst;
    if worst > cfg.feasibility_tolerance {
        return Err(LpError::NumericalFailure(format!(
            "primal point violates a constraint by {worst:e}"
        )));
    }
    solution.objective_value = crate::entropy::evaluate_f64(
        &p.objective,
        &solution.primal.entropy,
        &solution.primal.scalars,
    )
    .expect("objective references declared variables");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, Rational};
    use num_traits::One;

    fn toy() -> LinearProgram {
        let g = GroundSet::new(["x"]).unwrap();
        let mut p = LinearProgram::new(g, vec![], LinearForm::entropy(1, int(1))).unwrap();
        let mut f = LinearForm::entropy(1, int(1));
        f.add_constant(int(-3));
        p.add_constraint(Constraint::geq(f, "x>=3")).unwrap();
        p
    }

    #[test]
    fn minimize_x_at_least_three() {
        let s = solve_min(&toy()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective_value - 3.0).abs() < 1e-9);
        assert!((s.primal.entropy[0] - 3.0).abs() < 1e-9);
        assert!((s.duals[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tag_handling() {
        let mut p = toy();
        let c = p.constraints()[0].clone();
        assert_eq!(p.add_constraint(c), Err(LpError::DuplicateTag("x>=3".into())));
        let bad = Constraint::geq(LinearForm::entropy(1, int(1)), "nonneg:H(x)");
        assert!(matches!(p.add_constraint(bad), Err(LpError::ReservedTag(_))));
        let bad = Constraint::geq(LinearForm::scalar("alpha", int(1)), "a");
        assert!(matches!(p.add_constraint(bad), Err(LpError::UnknownScalar { .. })));
        let bad = Constraint::geq(LinearForm::entropy(2, int(1)), "b");
        assert!(matches!(p.add_constraint(bad), Err(LpError::UnknownCoordinate { .. })));
        assert_eq!(p.resolve_tag("x>=3"), Some(TagRef::Constraint(0)));
        assert_eq!(
            p.resolve_tag("nonneg:H(x)"),
            Some(TagRef::Bound(SubsetId::new(1).unwrap()))
        );
        assert_eq!(p.resolve_tag("nonneg:H(y)"), None);
        assert_eq!(p.resolve_tag("missing"), None);
    }

    #[test]
    fn statuses() {
        // min -x with no upper limit.
        let g = GroundSet::new(["x"]).unwrap();
        let p = LinearProgram::new(g.clone(), vec![], LinearForm::entropy(1, -Rational::one()))
            .unwrap();
        assert_eq!(solve_min(&p).unwrap().status, Status::Unbounded);

        // x ≤ -1 contradicts x ≥ 0.
        let mut p = LinearProgram::new(g, vec![], LinearForm::entropy(1, int(1))).unwrap();
        let mut f = LinearForm::entropy(1, int(-1));
        f.add_constant(int(-1));
        p.add_constraint(Constraint::geq(f, "x<=-1")).unwrap();
        assert_eq!(solve_min(&p).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn free_scalar_with_equality() {
        // min a  s.t.  a - H(x) = 0, H(x) - 2 >= 0 → 2.
        let g = GroundSet::new(["x"]).unwrap();
        let mut p = LinearProgram::new(g, vec!["a".into()], LinearForm::scalar("a", int(1)))
            .unwrap();
        let mut f = LinearForm::scalar("a", int(1));
        f.add_entropy(1, int(-1));
        p.add_constraint(Constraint::eq(f, "link")).unwrap();
        let mut f = LinearForm::entropy(1, int(1));
        f.add_constant(int(-2));
        p.add_constraint(Constraint::geq(f, "floor")).unwrap();
        let s = solve_min(&p).unwrap();
        assert!((s.objective_value - 2.0).abs() < 1e-9);
        assert!((s.primal.scalars["a"] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic() {
        let a = solve_min(&toy()).unwrap();
        let b = solve_min(&toy()).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
