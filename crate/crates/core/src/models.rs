//! Entropy-LP encodings of the two-message, two-database retrieval problem.
//!
//! Fixed-query answers are modelled directly: `X1, X2, X3` are answers of
//! database 1 and `Y1, Y2` answers of database 2, chosen so that each pair
//! listed in the decodability constraints recovers one message. The pseudo
//! model adjoins `U1, U2` (coupled through `X1X2X3`) and `V1, V2` (coupled
//! through `Y1Y2`), each pair mirroring the joint law of `(W1, W2)` with its
//! side of the answers.

use crate::entropy::{
    conditional_entropy_mask, elemental_inequalities, mutual_information_mask, Constraint,
    GroundSet, LinearForm,
};
use crate::lp::{
    extract_certificate_with, solve_min_with, verify_certificate, DualCertificate, LinearProgram,
    LpConfig, LpError, Solution, Status,
};
use crate::rational::{self, int, Rational};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

pub const ALPHA: &str = "alpha";
pub const BETA: &str = "beta";

const BASE_VARS: [&str; 7] = ["W1", "W2", "X1", "X2", "X3", "Y1", "Y2"];
const PSEUDO_VARS: [&str; 4] = ["U1", "U2", "V1", "V2"];
const DB1_ANSWERS: [&str; 3] = ["X1", "X2", "X3"];
const DB2_ANSWERS: [&str; 2] = ["Y1", "Y2"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid model options: {0}")]
    Options(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("LP finished with status {0:?}")]
    Status(Status),
    #[error("certificate failed exact verification: {0}")]
    Certificate(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelOptions {
    pub include_symmetry: bool,
    pub include_pseudo: bool,
    /// Objective coefficients `(c_α, c_β)`.
    pub objective: (Rational, Rational),
}

impl ModelOptions {
    pub fn base() -> Self {
        ModelOptions {
            include_symmetry: true,
            include_pseudo: false,
            objective: (int(1), int(1)),
        }
    }

    pub fn pseudo() -> Self {
        ModelOptions {
            include_pseudo: true,
            objective: (int(3), int(8)),
            ..Self::base()
        }
    }

    pub fn with_objective(mut self, c_alpha: Rational, c_beta: Rational) -> Self {
        self.objective = (c_alpha, c_beta);
        self
    }

    pub fn with_symmetry(mut self, on: bool) -> Self {
        self.include_symmetry = on;
        self
    }

    fn validate(&self) -> Result<(), ModelError> {
        let (a, b) = &self.objective;
        if a.is_negative() || b.is_negative() {
            return Err(ModelError::Options("objective coefficients must be nonnegative".into()));
        }
        if a.is_zero() && b.is_zero() {
            return Err(ModelError::Options("objective coefficients are both zero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Role {
    Message(u8),
    Db1Answer(u8),
    Db2Answer(u8),
    Pseudo(u8),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PirLpModel {
    pub program: LinearProgram,
    pub roles: Vec<(String, Role)>,
    pub options: ModelOptions,
}

impl PirLpModel {
    pub fn ground(&self) -> &GroundSet {
        self.program.ground()
    }

    /// Tags of constraints in a family, e.g. `dec:` or `mirror:`.
    pub fn tags_with_prefix(&self, prefix: &str) -> Vec<&str> {
        self.program
            .constraints()
            .iter()
            .filter(|c| c.tag.starts_with(prefix))
            .map(|c| c.tag.as_str())
            .collect()
    }
}

fn roles(ground: &GroundSet) -> Vec<(String, Role)> {
    ground
        .names()
        .iter()
        .map(|n| {
            let idx: u8 = n[1..].parse().expect("labels end in an index");
            let role = match &n[..1] {
                "W" => Role::Message(idx),
                "X" => Role::Db1Answer(idx),
                "Y" => Role::Db2Answer(idx),
                _ => Role::Pseudo(idx),
            };
            (n.clone(), role)
        })
        .collect()
}

fn objective(opts: &ModelOptions) -> LinearForm {
    let mut f = LinearForm::scalar(ALPHA, opts.objective.0.clone());
    f.add_scalar(BETA, opts.objective.1.clone());
    f
}

fn entropy_eq(mask: u32, value: i64) -> LinearForm {
    let mut f = LinearForm::entropy(mask, int(1));
    f.add_constant(int(-value));
    f
}

/// `H(a) − H(b)`.
fn equal_entropies(a: u32, b: u32) -> LinearForm {
    let mut f = LinearForm::entropy(a, int(1));
    f.add_entropy(b, -int(1));
    f
}

fn base_constraints(g: &GroundSet, symmetry: bool) -> Vec<Constraint> {
    let m = |labels: &[&str]| g.mask_of(labels).expect("model labels");
    let w1 = m(&["W1"]);
    let w2 = m(&["W2"]);
    let mut out = vec![
        Constraint::eq(entropy_eq(w1, 1), "msg:H(W1)=1"),
        Constraint::eq(entropy_eq(w2, 1), "msg:H(W2)=1"),
        Constraint::eq(entropy_eq(w1 | w2, 2), "msg:H(W1,W2)=2"),
        Constraint::eq(
            conditional_entropy_mask(m(&["X1", "X2", "X3", "Y1", "Y2"]), w1 | w2),
            "det:H(X1,X2,X3,Y1,Y2|W1,W2)=0",
        ),
    ];
    for (msg, x, y) in [("W1", "X1", "Y1"), ("W2", "X1", "Y2"), ("W2", "X2", "Y1"), ("W1", "X3", "Y2")] {
        out.push(Constraint::eq(
            conditional_entropy_mask(m(&[msg]), m(&[x, y])),
            format!("dec:H({msg}|{x},{y})=0"),
        ));
    }
    for side in [&DB1_ANSWERS[..], &DB2_ANSWERS[..]] {
        let mut f = LinearForm::scalar(ALPHA, int(1));
        f.add_entropy(m(side), -int(1));
        out.push(Constraint::geq(f, format!("store:alpha>=H({})", side.join(","))));
    }
    let answers: Vec<&str> = DB1_ANSWERS.iter().chain(&DB2_ANSWERS).copied().collect();
    for a in &answers {
        let mut f = LinearForm::scalar(BETA, int(1));
        f.add_entropy(m(&[a]), -int(1));
        out.push(Constraint::geq(f, format!("dl:beta>=H({a})")));
    }
    if symmetry {
        let first = answers[0];
        for a in &answers[1..] {
            out.push(Constraint::eq(
                equal_entropies(m(&[first]), m(&[a])),
                format!("sym:H({first})=H({a})"),
            ));
        }
        for a in &answers {
            for w in ["W1", "W2"] {
                if *a == first && w == "W1" {
                    continue;
                }
                out.push(Constraint::eq(
                    equal_entropies(m(&[first, "W1"]), m(&[a, w])),
                    format!("sym:H({first},W1)=H({a},{w})"),
                ));
            }
        }
    }
    out
}

fn pseudo_constraints(g: &GroundSet) -> Vec<Constraint> {
    let m = |labels: &[&str]| g.mask_of(labels).expect("model labels");
    let msgs = m(&["W1", "W2"]);
    let xs = m(&DB1_ANSWERS);
    let ys = m(&DB2_ANSWERS);
    let us = m(&["U1", "U2"]);
    let vs = m(&["V1", "V2"]);
    let mut out = vec![
        Constraint::eq(
            mutual_information_mask(vs, msgs | xs, ys),
            "markov:I(V1,V2;W1,W2,X1,X2,X3|Y1,Y2)=0",
        ),
        Constraint::eq(
            mutual_information_mask(us, msgs | ys | vs, xs),
            "markov:I(U1,U2;W1,W2,Y1,Y2,V1,V2|X1,X2,X3)=0",
        ),
    ];
    // For every S on the coupled side and nonempty T of pseudo messages,
    // H(S ∪ T) = H(S ∪ σ(T)) where σ maps the pseudo copy to W_i.
    for (side, pseudo) in [(&DB2_ANSWERS[..], ["V1", "V2"]), (&DB1_ANSWERS[..], ["U1", "U2"])] {
        let side_mask = m(side);
        let pseudo_masks = [m(&[pseudo[0]]), m(&[pseudo[1]])];
        let msg_masks = [m(&["W1"]), m(&["W2"])];
        let mut s = 0u32;
        loop {
            for t in 1u32..4 {
                let mut tm = 0;
                let mut sigma = 0;
                for i in 0..2 {
                    if t >> i & 1 == 1 {
                        tm |= pseudo_masks[i];
                        sigma |= msg_masks[i];
                    }
                }
                let tag = format!(
                    "mirror:H({})=H({})",
                    g.label(s | tm),
                    g.label(s | sigma)
                );
                out.push(Constraint::eq(equal_entropies(s | tm, s | sigma), tag));
            }
            if s == side_mask {
                break;
            }
            s = s.wrapping_sub(side_mask) & side_mask;
        }
    }
    out
}

fn assemble(
    ground: GroundSet,
    opts: &ModelOptions,
    extra: Vec<Constraint>,
) -> Result<PirLpModel, ModelError> {
    opts.validate()?;
    let mut program = LinearProgram::new(
        ground.clone(),
        vec![ALPHA.to_string(), BETA.to_string()],
        objective(opts),
    )?;
    program.extend(elemental_inequalities(&ground).expect("nonempty ground set"))?;
    program.extend(base_constraints(&ground, opts.include_symmetry))?;
    program.extend(extra)?;
    Ok(PirLpModel {
        roles: roles(&ground),
        program,
        options: opts.clone(),
    })
}

/// Base answer-variety model on `{W1, W2, X1, X2, X3, Y1, Y2}`.
pub fn build_base_model(opts: &ModelOptions) -> Result<PirLpModel, ModelError> {
    if opts.include_pseudo {
        return Err(ModelError::Options("the base model has no pseudo messages".into()));
    }
    assemble(GroundSet::new(BASE_VARS).unwrap(), opts, Vec::new())
}

/// Base model lifted to eleven variables plus the Markov couplings and mirror equalities.
pub fn build_pseudo_model(opts: &ModelOptions) -> Result<PirLpModel, ModelError> {
    if !opts.include_pseudo {
        return Err(ModelError::Options("the pseudo model needs include_pseudo".into()));
    }
    let ground = GroundSet::new(BASE_VARS.iter().chain(&PSEUDO_VARS).copied()).unwrap();
    let extra = pseudo_constraints(&ground);
    assemble(ground, opts, extra)
}

/// `β ≤ bound`, tagged for certificates.
pub fn beta_at_most(bound: &Rational) -> Constraint {
    let mut f = LinearForm::scalar(BETA, -Rational::one());
    f.add_constant(bound.clone());
    Constraint::geq(f, format!("extra:beta<={}", rational::to_string(bound)))
}

/// `α ≤ bound`, tagged for certificates.
pub fn alpha_at_most(bound: &Rational) -> Constraint {
    let mut f = LinearForm::scalar(ALPHA, -Rational::one());
    f.add_constant(bound.clone());
    Constraint::geq(f, format!("extra:alpha<={}", rational::to_string(bound)))
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub value: f64,
    pub certificate: DualCertificate,
    pub solution: Solution,
    /// The exact program that was solved (objective and extra rows applied).
    pub program: LinearProgram,
}

/// Minimizes `c_α·α + c_β·β` over the model with optional extra rows and
/// returns the optimum with an exactly verified certificate.
pub fn minimize_objective(
    model: &PirLpModel,
    c_alpha: &Rational,
    c_beta: &Rational,
    extra: &[Constraint],
) -> Result<Minimum, ModelError> {
    minimize_objective_with(model, c_alpha, c_beta, extra, &LpConfig::default())
}

pub fn minimize_objective_with(
    model: &PirLpModel,
    c_alpha: &Rational,
    c_beta: &Rational,
    extra: &[Constraint],
    cfg: &LpConfig,
) -> Result<Minimum, ModelError> {
    let opts = model.options.clone().with_objective(c_alpha.clone(), c_beta.clone());
    opts.validate()?;
    let mut program = model.program.clone();
    program.set_objective(objective(&opts))?;
    program.extend(extra.iter().cloned())?;
    let solution = solve_min_with(&program, cfg)?;
    if solution.status != Status::Optimal {
        return Err(ModelError::Status(solution.status));
    }
    let certificate = extract_certificate_with(&program, &solution, cfg)?;
    let report = verify_certificate(&program, &certificate)?;
    if !report.valid {
        return Err(ModelError::Certificate(format!("{report:?}")));
    }
    Ok(Minimum {
        value: solution.objective_value,
        certificate,
        solution,
        program,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::elemental_count;

    #[test]
    fn base_model_shape() {
        let m = build_base_model(&ModelOptions::base()).unwrap();
        assert_eq!(m.ground().len(), 7);
        assert_eq!(m.ground().coordinate_count(), 127);
        assert_eq!(m.tags_with_prefix("dec:").len(), 4);
        assert_eq!(m.tags_with_prefix("dl:").len(), 5);
        assert_eq!(m.tags_with_prefix("store:").len(), 2);
        assert_eq!(m.tags_with_prefix("msg:").len(), 3);
        assert_eq!(m.tags_with_prefix("sym:").len(), 4 + 9);
        assert_eq!(m.tags_with_prefix("H(").len() + m.tags_with_prefix("I(").len(), elemental_count(7));
        let nosym = build_base_model(&ModelOptions::base().with_symmetry(false)).unwrap();
        assert!(nosym.tags_with_prefix("sym:").is_empty());
        assert_eq!(m.roles[2], ("X1".to_string(), Role::Db1Answer(1)));
    }

    #[test]
    fn pseudo_model_shape() {
        let m = build_pseudo_model(&ModelOptions::pseudo()).unwrap();
        assert_eq!(m.ground().coordinate_count(), 2047);
        let elemental = m.tags_with_prefix("H(").len() + m.tags_with_prefix("I(").len();
        assert_eq!(elemental, 28_171);
        assert_eq!(m.tags_with_prefix("mirror:").len(), 36);
        assert_eq!(m.tags_with_prefix("markov:").len(), 2);
        assert!(m.tags_with_prefix("mirror:").contains(&"mirror:H(Y1,V2)=H(W2,Y1)"));
        assert!(m.tags_with_prefix("mirror:").contains(&"mirror:H(U1,U2)=H(W1,W2)"));
        assert_eq!(m.roles[10], ("V2".to_string(), Role::Pseudo(2)));
    }

    #[test]
    fn option_validation() {
        assert!(build_base_model(&ModelOptions::pseudo()).is_err());
        assert!(build_pseudo_model(&ModelOptions::base()).is_err());
        let bad = ModelOptions::base().with_objective(int(0), int(0));
        assert!(matches!(build_base_model(&bad), Err(ModelError::Options(_))));
        let bad = ModelOptions::base().with_objective(int(-1), int(1));
        assert!(build_base_model(&bad).is_err());
    }

    #[test]
    fn base_model_alpha_plus_beta() {
        let m = build_base_model(&ModelOptions::base()).unwrap();
        let r = minimize_objective(&m, &int(1), &int(1), &[]).unwrap();
        assert!((r.value - 2.0).abs() < 1e-6, "{}", r.value);
        assert_eq!(r.certificate.certified_bound, int(2));
    }

    #[test]
    fn base_model_three_alpha_eight_beta() {
        let m = build_base_model(&ModelOptions::base()).unwrap();
        let r = minimize_objective(&m, &int(3), &int(8), &[]).unwrap();
        assert_eq!(r.certificate.certified_bound, rational::ratio(39, 4));
    }

    #[test]
    fn pseudo_model_bounds() {
        let m = build_pseudo_model(&ModelOptions::pseudo()).unwrap();
        let r = minimize_objective(&m, &int(3), &int(8), &[]).unwrap();
        assert!((r.value - 10.0).abs() < 1e-6, "{}", r.value);
        assert_eq!(r.certificate.certified_bound, int(10));

        let cap = beta_at_most(&rational::ratio(3, 4));
        let r = minimize_objective(&m, &int(1), &int(0), &[cap]).unwrap();
        assert!((r.value - 4.0 / 3.0).abs() < 1e-6, "{}", r.value);
        assert_eq!(r.certificate.certified_bound, rational::ratio(4, 3));
    }
}
