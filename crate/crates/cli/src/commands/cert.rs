use crate::report::{input, num, read, CliError, Context, Report};
use pirsd_core::documents::{CertificateDocument, ModelDocument};
use pirsd_core::lp::verify_certificate;
use pirsd_core::rational;
use serde_json::json;
use std::path::Path;

const SHOWN_RESIDUALS: usize = 20;

pub fn run(ctx: &Context, model: &Path, certificate: &Path) -> Result<u8, CliError> {
    let doc = ModelDocument::from_json(&read(model)?).map_err(input)?;
    let cert = CertificateDocument::from_json(&read(certificate)?).map_err(input)?;
    let (program, c) = cert.bind(&doc).map_err(input)?;
    let rep = verify_certificate(&program, &c).map_err(input)?;

    let mut r = Report::new("cert-verify");
    r.input("model_hash", doc.hash());
    r.input("weights", c.weights.len());
    r.result("verified", rep.valid);
    r.result("certified_bound", num(&c.certified_bound));
    r.result("sign_violations", rep.sign_violations.clone());
    r.result(
        "residual",
        rep.residual
            .iter()
            .map(|(k, v)| json!({ "term": k, "value": num(v) }))
            .collect::<Vec<_>>(),
    );
    if rep.valid {
        r.say(format!("verified: objective >= {}", rational::Display(&c.certified_bound)));
    } else {
        r.say("certificate does NOT verify");
        for t in &rep.sign_violations {
            r.say(format!("  wrong sign: {t}"));
        }
        for (k, v) in rep.residual.iter().take(SHOWN_RESIDUALS) {
            r.say(format!("  residual {k}: {}", rational::to_string(v)));
        }
        if rep.residual.len() > SHOWN_RESIDUALS {
            r.say(format!("  ... {} more residual terms", rep.residual.len() - SHOWN_RESIDUALS));
        }
    }
    r.finish(ctx, rep.valid, None)
}
