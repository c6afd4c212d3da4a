use crate::report::{input, num, parse_rational, CliError, Context, Report};
use crate::Theorem;
use num_traits::{Signed, Zero};
use pirsd_core::bounds::{self, BoundLine, PirParameters};
use pirsd_core::rational::{self, Rational};
use serde_json::{json, Value};

fn line_json(l: &BoundLine) -> Value {
    json!({
        "source": l.source.to_string(),
        "c_alpha": num(&l.c_alpha),
        "c_beta": num(&l.c_beta),
        "rhs": num(&l.rhs),
    })
}

fn render(l: &BoundLine) -> String {
    let s = rational::to_string;
    match (l.c_alpha.is_zero(), l.c_beta.is_zero()) {
        (true, _) => format!("{}·beta >= {}", s(&l.c_beta), s(&l.rhs)),
        (_, true) => format!("{}·alpha >= {}", s(&l.c_alpha), s(&l.rhs)),
        _ => format!("{}·alpha + {}·beta >= {}", s(&l.c_alpha), s(&l.c_beta), s(&l.rhs)),
    }
}

fn nonnegative(name: &str, v: &Rational) -> Result<(), CliError> {
    if v.is_negative() {
        return Err(CliError::Input(format!("{name} must be nonnegative")));
    }
    Ok(())
}

pub fn run(
    ctx: &Context,
    theorem: Theorem,
    n: u32,
    k: u32,
    alpha: Option<&str>,
    beta: Option<&str>,
) -> Result<u8, CliError> {
    let p = PirParameters::new(n, k).map_err(input)?;
    let line = match theorem {
        Theorem::One => bounds::theorem1_line(&p),
        Theorem::Two => bounds::theorem2_line(&p).map_err(input)?,
        Theorem::Three => bounds::theorem3_line(&p).map_err(input)?,
        Theorem::Capacity => bounds::capacity_line(&p).map_err(input)?,
    };
    let mut r = Report::new("bound");
    r.input("theorem", line.source.to_string());
    r.input("n", n);
    r.input("k", k);
    r.result("line", line_json(&line));
    r.say(format!("{}: {}", line.source, render(&line)));
    if theorem == Theorem::Two {
        let stated = bounds::theorem2_rhs(&p).map_err(input)?;
        r.result("stated_rhs", num(&stated));
        if k >= 2 {
            let ledger = bounds::replay_theorem2_induction(&p).map_err(input)?;
            r.result(
                "induction_replay",
                json!({
                    "passed": ledger.passed,
                    "steps": ledger.steps.len(),
                    "failed_at": ledger.failed_at,
                    "assembled_rhs": num(&ledger.assembled_rhs),
                }),
            );
            r.say(format!(
                "induction replay: {} ({} steps)",
                if ledger.passed { "pass" } else { "FAIL" },
                ledger.steps.len()
            ));
            if !ledger.passed {
                return Err(CliError::Verification(format!(
                    "induction replay failed at k={:?}",
                    ledger.failed_at
                )));
            }
        }
    }
    if theorem == Theorem::Capacity {
        r.say(format!("capacity beta = {}", rational::Display(&line.rhs)));
    }
    let mut passed = true;
    if let Some(a) = alpha {
        let a = parse_rational(a)?;
        nonnegative("alpha", &a)?;
        r.input("alpha", num(&a));
        if theorem == Theorem::One {
            let m = bounds::theorem1_min_beta(&p, &a).map_err(input)?;
            r.result("beta_min", num(&m.value));
            r.result("binding", m.binding.to_string());
            r.say(format!("beta >= {} [{}]", rational::Display(&m.value), m.binding));
        } else if let Some(b) = line.beta_at(&a) {
            r.result("beta_min", num(&b));
            r.say(format!("beta >= {}", rational::Display(&b)));
        } else {
            r.say("this line does not constrain beta");
        }
    }
    if let Some(b) = beta {
        let b = parse_rational(b)?;
        nonnegative("beta", &b)?;
        r.input("beta", num(&b));
        match line.alpha_at(&b) {
            Some(a) => {
                r.result("alpha_min", num(&a));
                r.say(format!("alpha >= {}", rational::Display(&a)));
            }
            None => {
                let ok = b >= line.rhs;
                r.result("satisfied", ok);
                r.say(if ok { "beta meets the bound" } else { "beta is below the bound" });
                passed = ok;
            }
        }
    }
    r.finish(ctx, passed, None)
}
