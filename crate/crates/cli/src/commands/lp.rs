use crate::report::{num, num_f64, parse_rational, write_atomic, CliError, Context, Report};
use crate::ModelKind;
use pirsd_core::documents::{CertificateDocument, ModelDocument};
use pirsd_core::lp::LpError;
use pirsd_core::models::{self, build_base_model, build_pseudo_model, ModelError, ModelOptions};
use pirsd_core::rational::{self, int, Rational};
use pirsd_core::Constraint;
use std::path::PathBuf;

pub struct LpArgs {
    pub model: ModelKind,
    pub objective: String,
    pub symmetry: bool,
    pub extra: Vec<String>,
    pub dump_model: Option<PathBuf>,
    pub certificate: Option<PathBuf>,
}

fn parse_objective(s: &str) -> Result<(Rational, Rational), CliError> {
    match s.split(',').collect::<Vec<_>>()[..] {
        [a, b] => Ok((parse_rational(a)?, parse_rational(b)?)),
        _ => Err(CliError::Input(format!("objective {s:?} must look like \"3,8\""))),
    }
}

fn parse_extra(s: &str) -> Result<Constraint, CliError> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(v) = compact.strip_prefix("beta<=") {
        return Ok(models::beta_at_most(&parse_rational(v)?));
    }
    if let Some(v) = compact.strip_prefix("alpha<=") {
        return Ok(models::alpha_at_most(&parse_rational(v)?));
    }
    Err(CliError::Input(format!("extra row {s:?} must be beta<=r or alpha<=r")))
}

fn model_error(e: ModelError) -> CliError {
    match e {
        ModelError::Options(m) => CliError::Input(m),
        ModelError::Certificate(m) => CliError::Verification(format!("certificate rejected: {m}")),
        ModelError::Lp(e @ LpError::Rationalization { .. }) => {
            CliError::Verification(format!("no exact certificate: {e}"))
        }
        other => CliError::Solver(other.to_string()),
    }
}

pub fn run(ctx: &Context, a: &LpArgs) -> Result<u8, CliError> {
    let (ca, cb) = parse_objective(&a.objective)?;
    let extra = a.extra.iter().map(|s| parse_extra(s)).collect::<Result<Vec<_>, _>>()?;
    let model = match a.model {
        ModelKind::Base => build_base_model(&ModelOptions::base().with_symmetry(a.symmetry)),
        ModelKind::Pseudo => build_pseudo_model(&ModelOptions::pseudo().with_symmetry(a.symmetry)),
    }
    .map_err(model_error)?;
    let min = models::minimize_objective(&model, &ca, &cb, &extra).map_err(model_error)?;

    let mut r = Report::new("lp");
    let kind = match a.model {
        ModelKind::Base => "base",
        ModelKind::Pseudo => "pseudo",
    };
    r.input("model", kind);
    r.input("symmetry", a.symmetry);
    r.input("objective", serde_json::json!([num(&ca), num(&cb)]));
    r.input("extra", extra.iter().map(|c| c.tag.clone()).collect::<Vec<_>>());
    let p = &min.program;
    r.result(
        "size",
        serde_json::json!({
            "entropy_coordinates": p.ground().coordinate_count(),
            "scalars": p.scalars().len(),
            "constraints": p.constraints().len(),
        }),
    );
    r.result("optimum", num_f64(min.value));
    r.result("iterations", min.solution.iterations);
    r.result("certified_bound", num(&min.certificate.certified_bound));
    r.result("certificate_verified", true);
    r.result("certificate_weights", min.certificate.weights.len());
    r.say(format!(
        "{kind} model: minimum {} ≈ {:.9}, certified bound {} (verified exactly, {} weights)",
        objective_text(&ca, &cb),
        min.value,
        rational::Display(&min.certificate.certified_bound),
        min.certificate.weights.len()
    ));
    if a.model == ModelKind::Base {
        r.result("shannon_only", true);
        // Compare with 3α + 8β ≥ 10 when the objective is a multiple of it.
        if &ca * int(8) == &cb * int(3) && ca > int(0) {
            let target = &ca * rational::ratio(10, 3);
            let below = min.certificate.certified_bound < target;
            r.result("theorem3_value", num(&target));
            r.result("below_theorem3", below);
            if below {
                r.say(format!(
                    "Shannon-only: bound is below the value {} from pseudo messages",
                    rational::to_string(&target)
                ));
            }
        }
    }
    let doc = ModelDocument::from_program(p);
    r.result("model_hash", doc.hash());
    if let Some(path) = &a.dump_model {
        write_atomic(path, doc.to_json().as_bytes())?;
        r.say(format!("model written to {}", path.display()));
    }
    if let Some(path) = &a.certificate {
        let cert = CertificateDocument::new(&min.certificate, &doc);
        write_atomic(path, cert.to_json().as_bytes())?;
        r.say(format!("certificate written to {}", path.display()));
    }
    r.finish(ctx, true, None)
}

fn objective_text(ca: &Rational, cb: &Rational) -> String {
    format!("{}·alpha + {}·beta", rational::to_string(ca), rational::to_string(cb))
}
