use crate::report::{input, num, CliError, Context, Report};
use pirsd_core::bounds::{outer_envelope, PirParameters};
use pirsd_core::rational;
use serde_json::{json, Value};

pub fn run(ctx: &Context, n: u32, k: u32, samples: usize) -> Result<u8, CliError> {
    let p = PirParameters::new(n, k).map_err(input)?;
    let env = outer_envelope(&p, samples).map_err(input)?;
    let mut r = Report::new("curve");
    r.input("n", n);
    r.input("k", k);
    r.input("samples", samples);
    let rows: Vec<Value> = env
        .points
        .iter()
        .map(|pt| {
            json!({
                "beta": num(&pt.point.beta),
                "alpha_lower": num(&pt.point.alpha),
                "binding": pt.binding.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    r.result("rows", rows);
    let (lo, hi) = &env.vertical;
    r.result(
        "minimum_storage_segment",
        json!({ "alpha": num(&lo.alpha), "beta_from": num(&lo.beta), "beta_to": num(&hi.beta) }),
    );
    let mut csv = String::from("beta,alpha_lower\n");
    for pt in &env.points {
        csv.push_str(&format!(
            "{},{}\n",
            rational::to_string(&pt.point.beta),
            rational::to_string(&pt.point.alpha)
        ));
    }
    let first = &env.points[0].point;
    r.say(format!(
        "{} points; at capacity beta {} alpha >= {}",
        env.points.len(),
        rational::Display(&first.beta),
        rational::Display(&first.alpha)
    ));
    r.finish(ctx, true, Some(csv))
}
