use crate::report::{measure, num, read, write_atomic, CliError, Context, Report};
use crate::SchemeKind;
use pirsd_core::rational;
use pirsd_core::scheme::{self, SchemeError, SchemeSpec};
use serde_json::{json, Value};
use std::path::PathBuf;

pub struct SchemeArgs {
    pub kind: SchemeKind,
    pub n: u32,
    pub k: u32,
    pub l: u32,
    pub alphabet: u32,
    pub file: Option<PathBuf>,
    pub dump_scheme: Option<PathBuf>,
}

fn scheme_error(e: SchemeError) -> CliError {
    CliError::Input(e.to_string())
}

fn build(a: &SchemeArgs) -> Result<SchemeSpec, CliError> {
    match a.kind {
        SchemeKind::DownloadAll => {
            scheme::builtin_download_all(a.n, a.k, a.l, a.alphabet).map_err(scheme_error)
        }
        SchemeKind::Xor2 => {
            if a.n != 2 || a.alphabet != 2 {
                return Err(CliError::Input("xor2 is defined for N=2 and a binary alphabet".into()));
            }
            scheme::builtin_xor2(a.k, a.l).map_err(scheme_error)
        }
        SchemeKind::File => {
            let path = a.file.as_ref().expect("clap requires --file");
            SchemeSpec::from_json(&read(path)?).map_err(scheme_error)
        }
    }
}

pub fn run(ctx: &Context, a: &SchemeArgs) -> Result<u8, CliError> {
    let spec = build(a)?;
    if let Some(path) = &a.dump_scheme {
        write_atomic(path, spec.to_json().as_bytes())?;
    }
    let v = scheme::verify(&spec).map_err(scheme_error)?;
    let checks = scheme::check_bounds(&spec, &v.costs).map_err(scheme_error)?;
    let p = spec.params;

    let mut r = Report::new("scheme");
    r.input("scheme", spec.name.clone());
    r.input(
        "params",
        json!({
            "n": p.n, "k": p.k, "l": p.l,
            "message_alphabet": p.message_alphabet,
            "answer_alphabet": p.answer_alphabet,
            "key_space": spec.key_space,
        }),
    );

    let c = &v.correctness;
    r.result(
        "correctness",
        json!({
            "passed": c.passed,
            "cases": c.cases,
            "naive_cases": c.naive_cases.to_string(),
            "counterexample": c.counterexample.as_ref().map(|x| json!({
                "messages": x.messages,
                "key": x.key,
                "k": x.k + 1,
                "symbol": x.symbol + 1,
                "decoded": x.decoded,
            })),
        }),
    );
    let law = |db: &Vec<Vec<pirsd_core::Rational>>| -> Vec<Value> {
        db.iter()
            .enumerate()
            .map(|(k, row)| json!({ "k": k + 1, "law": row.iter().map(rational::to_string).collect::<Vec<_>>() }))
            .collect()
    };
    r.result(
        "privacy",
        json!({
            "passed": v.privacy.passed,
            "leaking_databases": v.privacy.leaking.iter().map(|n| n + 1).collect::<Vec<_>>(),
            "distributions": v.privacy.distributions.iter().enumerate()
                .map(|(n, db)| json!({ "database": n + 1, "per_k": law(db) }))
                .collect::<Vec<_>>(),
        }),
    );
    let costs = &v.costs;
    r.result(
        "costs",
        json!({
            "alpha": measure(&costs.alpha),
            "beta": measure(&costs.beta),
            "alpha_prime": measure(&costs.alpha_prime),
            "beta_prime": measure(&costs.beta_prime),
            "per_database": costs.per_database.iter().enumerate().map(|(n, d)| json!({
                "database": n + 1,
                "alpha": measure(&d.alpha),
                "beta": measure(&d.beta),
                "alpha_prime": measure(&d.alpha_prime),
                "beta_prime": measure(&d.beta_prime),
                "beta_by_k": d.beta_by_k.iter().map(measure).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        }),
    );
    let invariants = costs.invariants_hold();
    r.result(
        "invariants",
        json!({ "hold": invariants, "beta_k_invariant": costs.beta_k_invariant() }),
    );
    r.result(
        "bounds",
        checks
            .iter()
            .map(|b| json!({
                "source": b.line.source.to_string(),
                "c_alpha": num(&b.line.c_alpha),
                "c_beta": num(&b.line.c_beta),
                "rhs": num(&b.line.rhs),
                "slack": measure(&b.slack),
                "satisfied": b.satisfied,
            }))
            .collect::<Vec<_>>(),
    );

    r.say(format!("{}: N={} K={} L={} |F|={}", spec.name, p.n, p.k, p.l, spec.key_space));
    match &c.counterexample {
        None => r.say(format!("correctness: pass ({} cases)", c.cases)),
        Some(x) => r.say(format!(
            "correctness: FAIL at k={} key={} symbol={}: decoded {} from messages {:?}",
            x.k + 1,
            x.key,
            x.symbol + 1,
            x.decoded,
            x.messages
        )),
    }
    if v.privacy.passed {
        r.say("privacy: pass");
    } else {
        r.say("privacy: FAIL");
        for &n in &v.privacy.leaking {
            for (k, row) in v.privacy.distributions[n].iter().enumerate() {
                let row: Vec<String> = row.iter().map(rational::to_string).collect();
                r.say(format!("  database {} k={}: [{}]", n + 1, k + 1, row.join(", ")));
            }
        }
    }
    r.say(format!("alpha = {}, beta = {}", costs.alpha, costs.beta));
    r.say(format!("alpha' = {}, beta' = {}", costs.alpha_prime, costs.beta_prime));
    let violated: Vec<String> = checks
        .iter()
        .filter(|b| !b.satisfied)
        .map(|b| b.line.source.to_string())
        .collect();
    if !violated.is_empty() {
        r.say(format!("bound violated (toolkit bug): {}", violated.join(", ")));
    }
    let passed = v.passed() && invariants && violated.is_empty();
    r.finish(ctx, passed, None)
}
