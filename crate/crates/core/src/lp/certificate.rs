use super::aggregate::Aggregation;
use super::{LinearProgram, LpConfig, LpError, Solution, Status, TagRef};
use crate::entropy::{LinearForm, Sense, SubsetId};
use crate::rational::{self, Rational};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

const ZERO_WEIGHT: f64 = 1e-9;

/// Nonnegative combination of constraints proving `objective ≥ certified_bound`.
///
/// Weights on equality constraints may have either sign. Tags are either
/// constraint tags of the program or implicit bound tags (`nonneg:H(..)`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualCertificate {
    pub weights: Vec<(String, Rational)>,
    pub certified_bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateReport {
    pub valid: bool,
    /// Tags whose weight has the wrong sign.
    pub sign_violations: Vec<String>,
    /// Nonzero coefficients of `objective − bound − Σ weight·form`.
    pub residual: Vec<(String, Rational)>,
}

/// Exact check that `Σ weight·form = objective − certified_bound` and that
/// every inequality weight is nonnegative. No floating point is involved.
pub fn verify_certificate(
    p: &LinearProgram,
    c: &DualCertificate,
) -> Result<CertificateReport, LpError> {
    let mut sum = LinearForm::zero();
    let mut sign_violations = Vec::new();
    for (tag, w) in &c.weights {
        match p.resolve_tag(tag) {
            None => return Err(LpError::UnknownTag(tag.clone())),
            Some(TagRef::Constraint(i)) => {
                let con = &p.constraints()[i];
                if con.sense == Sense::NonNegative && w.is_negative() {
                    sign_violations.push(tag.clone());
                }
                sum.add_scaled(&con.form, w);
            }
            Some(TagRef::Bound(s)) => {
                if w.is_negative() {
                    sign_violations.push(tag.clone());
                }
                sum.add_entropy(s.mask(), w.clone());
            }
        }
    }
    let mut target = p.objective().clone();
    target.add_constant(-c.certified_bound.clone());
    let residual_form = target - sum;
    let ground = p.ground();
    let mut residual: Vec<(String, Rational)> = residual_form
        .entropy_terms()
        .iter()
        .map(|(s, v)| (format!("H({})", ground.label(s.mask())), v.clone()))
        .collect();
    residual.extend(
        residual_form
            .scalar_terms()
            .iter()
            .map(|(n, v)| (n.clone(), v.clone())),
    );
    if !residual_form.constant().is_zero() {
        residual.push(("constant".into(), residual_form.constant().clone()));
    }
    Ok(CertificateReport {
        valid: sign_violations.is_empty() && residual.is_empty(),
        sign_violations,
        residual,
    })
}

pub fn extract_certificate(p: &LinearProgram, s: &Solution) -> Result<DualCertificate, LpError> {
    extract_certificate_with(p, s, &LpConfig::default())
}

/// Rounds the optimal duals to small-denominator rationals and re-verifies
/// them exactly. If rounding does not close, the support of the float duals is
/// re-solved in exact arithmetic. Certificates found on the merged program are
/// lifted to `p` and verified against it.
pub fn extract_certificate_with(
    p: &LinearProgram,
    s: &Solution,
    cfg: &LpConfig,
) -> Result<DualCertificate, LpError> {
    if s.status != Status::Optimal {
        return Err(LpError::NotOptimal(s.status));
    }
    let Some(agg) = Aggregation::build(p) else {
        return extract_direct(p, s, cfg);
    };
    let reduced = extract_direct(&agg.reduced, &agg.project_solution(s), cfg)?;
    let cert = agg.lift_certificate(p, &reduced)?;
    let report = verify_certificate(p, &cert)?;
    if !report.valid {
        return Err(LpError::Rationalization {
            reason: format!("lifted certificate: residual {:?}, sign violations {:?}", report.residual, report.sign_violations),
            float_duals: Vec::new(),
        });
    }
    Ok(cert)
}

fn extract_direct(p: &LinearProgram, s: &Solution, cfg: &LpConfig) -> Result<DualCertificate, LpError> {
    let rounded: Option<Vec<Rational>> = p
        .constraints()
        .iter()
        .zip(&s.duals)
        .map(|(c, &y)| round_weight(y, c.sense, cfg.max_denominator))
        .collect();
    let mut attempt = rounded.and_then(|w| close_certificate(p, &w));
    if attempt.is_none() {
        attempt = exact_support_solve(p, s).and_then(|w| close_certificate(p, &w));
    }
    let cert = attempt.ok_or_else(|| LpError::Rationalization {
        reason: "no exact nonnegative combination reproduces the objective".into(),
        float_duals: float_duals(p, s),
    })?;
    let report = verify_certificate(p, &cert)?;
    if !report.valid {
        return Err(LpError::Rationalization {
            reason: format!("residual {:?}", report.residual),
            float_duals: float_duals(p, s),
        });
    }
    let bound = rational::to_f64(&cert.certified_bound);
    if bound > s.objective_value + cfg.optimality_tolerance * (1.0 + s.objective_value.abs()) {
        return Err(LpError::Rationalization {
            reason: format!(
                "certified bound {bound} exceeds the solved optimum {}",
                s.objective_value
            ),
            float_duals: float_duals(p, s),
        });
    }
    Ok(cert)
}

fn float_duals(p: &LinearProgram, s: &Solution) -> Vec<(String, f64)> {
    p.constraints()
        .iter()
        .zip(&s.duals)
        .filter(|(_, y)| y.abs() > ZERO_WEIGHT)
        .map(|(c, &y)| (c.tag.clone(), y))
        .collect()
}

fn round_weight(y: f64, sense: Sense, max_den: u64) -> Option<Rational> {
    if y.abs() < ZERO_WEIGHT || (sense == Sense::NonNegative && y < 0.0) {
        return Some(Rational::zero());
    }
    let r = rational::approximate(y, max_den)?;
    let err = (rational::to_f64(&r) - y).abs();
    (err <= 1e-7 * y.abs().max(1.0)).then_some(r)
}

/// Given constraint weights, derives the bound weights from the residual and
/// returns a certificate when the residual is a nonnegative combination of
/// coordinate bounds with no scalar part.
fn close_certificate(p: &LinearProgram, weights: &[Rational]) -> Option<DualCertificate> {
    let mut residual = p.objective().clone();
    for (c, w) in p.constraints().iter().zip(weights) {
        if c.sense == Sense::NonNegative && w.is_negative() {
            return None;
        }
        residual.add_scaled(&c.form, &-w.clone());
    }
    if !residual.scalar_terms().is_empty() {
        return None;
    }
    if residual.entropy_terms().values().any(|v| v.is_negative()) {
        return None;
    }
    let mut out: Vec<(String, Rational)> = p
        .constraints()
        .iter()
        .zip(weights)
        .filter(|(_, w)| !w.is_zero())
        .map(|(c, w)| (c.tag.clone(), w.clone()))
        .collect();
    out.extend(
        residual
            .entropy_terms()
            .iter()
            .map(|(s, v)| (p.bound_tag(*s), v.clone())),
    );
    Some(DualCertificate {
        weights: out,
        certified_bound: residual.constant().clone(),
    })
}

/// Solves `Σ_j y_j a_j + Σ_S s_S e_S = objective` exactly over the support of
/// the float solution with sparse Gaussian elimination.
fn exact_support_solve(p: &LinearProgram, s: &Solution) -> Option<Vec<Rational>> {
    let support: Vec<usize> = (0..p.constraints().len())
        .filter(|&i| s.duals[i].abs() > ZERO_WEIGHT)
        .collect();
    let bounds: Vec<SubsetId> = s
        .bound_duals
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > ZERO_WEIGHT)
        .map(|(i, _)| SubsetId::new(i as u32 + 1).unwrap())
        .collect();
    let unknowns = support.len() + bounds.len();

    // One equation per coordinate or scalar: key -> (coefficients, rhs).
    #[derive(PartialEq, Eq, PartialOrd, Ord, Clone)]
    enum Key {
        Coord(u32),
        Scalar(String),
    }
    let mut eqs: BTreeMap<Key, BTreeMap<usize, Rational>> = BTreeMap::new();
    for (u, &ci) in support.iter().enumerate() {
        let form = &p.constraints()[ci].form;
        for (sub, v) in form.entropy_terms() {
            eqs.entry(Key::Coord(sub.mask())).or_default().insert(u, v.clone());
        }
        for (name, v) in form.scalar_terms() {
            eqs.entry(Key::Scalar(name.clone())).or_default().insert(u, v.clone());
        }
    }
    for (k, sub) in bounds.iter().enumerate() {
        eqs.entry(Key::Coord(sub.mask()))
            .or_default()
            .insert(support.len() + k, Rational::one());
    }
    let obj = p.objective();
    let rhs_of = |key: &Key| match key {
        Key::Coord(m) => obj.entropy_coef(*m),
        Key::Scalar(n) => obj.scalar_coef(n),
    };
    for sub in obj.entropy_terms().keys() {
        eqs.entry(Key::Coord(sub.mask())).or_default();
    }
    for name in obj.scalar_terms().keys() {
        eqs.entry(Key::Scalar(name.clone())).or_default();
    }
    let mut rows: Vec<(BTreeMap<usize, Rational>, Rational)> = eqs
        .into_iter()
        .map(|(k, coefs)| {
            let rhs = rhs_of(&k);
            (coefs, rhs)
        })
        .collect();

    let mut pivot_of = vec![usize::MAX; unknowns];
    let mut used = vec![false; rows.len()];
    for col in 0..unknowns {
        let pick = (0..rows.len())
            .filter(|&r| !used[r] && rows[r].0.contains_key(&col))
            .min_by_key(|&r| rows[r].0.len());
        let Some(pr) = pick else { continue };
        used[pr] = true;
        pivot_of[col] = pr;
        let pv = rows[pr].0[&col].clone();
        let (prow, prhs) = {
            let (c, r) = &rows[pr];
            let c: BTreeMap<usize, Rational> = c.iter().map(|(k, v)| (*k, v / &pv)).collect();
            (c, r / &pv)
        };
        rows[pr] = (prow.clone(), prhs.clone());
        for r in 0..rows.len() {
            if r == pr {
                continue;
            }
            let Some(f) = rows[r].0.get(&col).cloned() else {
                continue;
            };
            for (k, v) in &prow {
                let e = rows[r].0.entry(*k).or_insert_with(Rational::zero);
                *e -= &f * v;
                if e.is_zero() {
                    rows[r].0.remove(k);
                }
            }
            let delta = &f * &prhs;
            rows[r].1 -= delta;
        }
    }
    // Inconsistent leftover rows mean the support cannot reproduce the objective.
    if rows
        .iter()
        .enumerate()
        .any(|(r, (c, rhs))| !used[r] && c.is_empty() && !rhs.is_zero())
    {
        return None;
    }
    // Reduced form: each pivot row reads y_col + Σ free terms = rhs; free unknowns = 0.
    let mut weights = vec![Rational::zero(); p.constraints().len()];
    for (u, &ci) in support.iter().enumerate() {
        if pivot_of[u] != usize::MAX {
            weights[ci] = rows[pivot_of[u]].1.clone();
        }
    }
    Some(weights)
}
