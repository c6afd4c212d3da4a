//! Stable JSON documents for programs and certificates. Constraint tags are
//! the join key between the two; a certificate also records the SHA-256 of
//! the model document it was produced for.

use crate::entropy::{Constraint, GroundSet, LinearForm, Sense};
use crate::lp::{DualCertificate, LinearProgram, LpError};
use crate::rational::{self, Rational};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DOCUMENT_VERSION: u32 = 1;
const CONSTANT_VAR: &str = "1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DocumentError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported document version {0}")]
    Version(u32),
    #[error("unknown variable {0:?}")]
    Variable(String),
    #[error("bad rational {0:?}")]
    Rational(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("certificate tags not in the model ({} in all): {}", .0.len(), preview(.0))]
    TagMismatch(Vec<String>),
    #[error("certificate was made for model {expected}, this model hashes to {actual}")]
    HashMismatch { expected: String, actual: String },
}

fn preview(tags: &[String]) -> String {
    const SHOWN: usize = 5;
    let mut s = tags[..tags.len().min(SHOWN)].join(", ");
    if tags.len() > SHOWN {
        s.push_str(", ...");
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    /// `H(A,B)`, a scalar name, or `1` for the constant.
    pub var: String,
    pub coef: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    pub tag: String,
    pub sense: Sense,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormDoc {
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub version: u32,
    pub ground_set: GroundSet,
    pub scalars: Vec<String>,
    pub constraints: Vec<ConstraintDoc>,
    pub objective: FormDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightDoc {
    pub tag: String,
    pub p: String,
    pub q: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub version: u32,
    pub model_hash: String,
    pub weights: Vec<WeightDoc>,
    pub certified_bound: String,
}

fn terms_of(form: &LinearForm, ground: &GroundSet) -> Vec<Term> {
    let mut out: Vec<Term> = form
        .entropy_terms()
        .iter()
        .map(|(s, c)| Term {
            var: format!("H({})", ground.label(s.mask())),
            coef: rational::to_string(c),
        })
        .collect();
    out.extend(form.scalar_terms().iter().map(|(n, c)| Term {
        var: n.clone(),
        coef: rational::to_string(c),
    }));
    if !num_traits::Zero::is_zero(form.constant()) {
        out.push(Term {
            var: CONSTANT_VAR.into(),
            coef: rational::to_string(form.constant()),
        });
    }
    out
}

fn parse_rational(s: &str) -> Result<Rational, DocumentError> {
    rational::parse(s).map_err(|_| DocumentError::Rational(s.to_string()))
}

fn form_of(terms: &[Term], ground: &GroundSet, scalars: &[String]) -> Result<LinearForm, DocumentError> {
    let mut f = LinearForm::zero();
    for t in terms {
        let c = parse_rational(&t.coef)?;
        if t.var == CONSTANT_VAR {
            f.add_constant(c);
        } else if let Some(inner) = t.var.strip_prefix("H(").and_then(|v| v.strip_suffix(')')) {
            let labels: Vec<&str> = inner.split(',').collect();
            let s = ground
                .subset(&labels)
                .map_err(|_| DocumentError::Variable(t.var.clone()))?;
            f.add_entropy(s.mask(), c);
        } else if scalars.contains(&t.var) {
            f.add_scalar(&t.var, c);
        } else {
            return Err(DocumentError::Variable(t.var.clone()));
        }
    }
    Ok(f)
}

impl ModelDocument {
    pub fn from_program(p: &LinearProgram) -> Self {
        let g = p.ground();
        ModelDocument {
            version: DOCUMENT_VERSION,
            ground_set: g.clone(),
            scalars: p.scalars().to_vec(),
            constraints: p
                .constraints()
                .iter()
                .map(|c| ConstraintDoc {
                    tag: c.tag.clone(),
                    sense: c.sense,
                    terms: terms_of(&c.form, g),
                })
                .collect(),
            objective: FormDoc {
                terms: terms_of(p.objective(), g),
            },
        }
    }

    pub fn to_program(&self) -> Result<LinearProgram, DocumentError> {
        if self.version != DOCUMENT_VERSION {
            return Err(DocumentError::Version(self.version));
        }
        let g = &self.ground_set;
        let objective = form_of(&self.objective.terms, g, &self.scalars)?;
        let mut p = LinearProgram::new(g.clone(), self.scalars.clone(), objective)?;
        for c in &self.constraints {
            let form = form_of(&c.terms, g, &self.scalars)?;
            p.add_constraint(Constraint::new(form, c.sense, c.tag.clone()))?;
        }
        Ok(p)
    }

    /// Compact serialization; this is what the hash covers.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        serde_json::from_str(text).map_err(|e| DocumentError::Parse(e.to_string()))
    }

    pub fn hash(&self) -> String {
        format!("{:x}", Sha256::digest(self.to_json().as_bytes()))
    }
}

impl CertificateDocument {
    pub fn new(c: &DualCertificate, model: &ModelDocument) -> Self {
        CertificateDocument {
            version: DOCUMENT_VERSION,
            model_hash: model.hash(),
            weights: c
                .weights
                .iter()
                .map(|(tag, w)| WeightDoc {
                    tag: tag.clone(),
                    p: w.numer().to_string(),
                    q: w.denom().to_string(),
                })
                .collect(),
            certified_bound: rational::to_string(&c.certified_bound),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        serde_json::from_str(text).map_err(|e| DocumentError::Parse(e.to_string()))
    }

    pub fn to_certificate(&self) -> Result<DualCertificate, DocumentError> {
        if self.version != DOCUMENT_VERSION {
            return Err(DocumentError::Version(self.version));
        }
        let int = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|_| DocumentError::Rational(s.to_string()))
        };
        let mut weights = Vec::with_capacity(self.weights.len());
        for w in &self.weights {
            let q = int(&w.q)?;
            if num_traits::Zero::is_zero(&q) {
                return Err(DocumentError::Rational(format!("{}/{}", w.p, w.q)));
            }
            weights.push((w.tag.clone(), Rational::new(int(&w.p)?, q)));
        }
        Ok(DualCertificate {
            weights,
            certified_bound: parse_rational(&self.certified_bound)?,
        })
    }

    /// Resolves every tag against `model` and checks the recorded hash.
    pub fn bind(
        &self,
        model: &ModelDocument,
    ) -> Result<(LinearProgram, DualCertificate), DocumentError> {
        let program = model.to_program()?;
        let cert = self.to_certificate()?;
        let missing: Vec<String> = cert
            .weights
            .iter()
            .filter(|(t, _)| program.resolve_tag(t).is_none())
            .map(|(t, _)| t.clone())
            .collect();
        if !missing.is_empty() {
            return Err(DocumentError::TagMismatch(missing));
        }
        let actual = model.hash();
        if actual != self.model_hash {
            return Err(DocumentError::HashMismatch {
                expected: self.model_hash.clone(),
                actual,
            });
        }
        Ok((program, cert))
    }
}
