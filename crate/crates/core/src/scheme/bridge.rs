use super::{for_each_assignment, guard, SchemeError, SchemeSpec};
use crate::entropy::{entropy_vector_from_distribution, EntropyVector, GroundSet, JointDistribution};
use crate::rational;

/// A random variable of a scheme realization that is a function of the
/// messages alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    /// All `L` symbols of message `k` (0-based).
    Message(usize),
    /// Full contents of a database.
    Storage(usize),
    /// Answer of database `db` to a fixed query.
    FixedAnswer { db: usize, query: usize },
    /// Answer of database `db` when message `k` is wanted; the key must be
    /// fixed to make it a function of the messages.
    Answer { db: usize, k: usize, key: Option<usize> },
}

/// Symbol-level evaluators for one variable: each entry is `(alphabet,
/// message cone, evaluator)`.
type Part<'a> = Box<dyn Fn(&[u32]) -> u32 + 'a>;

fn no_db(db: usize) -> SchemeError {
    SchemeError::Parameters(format!("no database {db}"))
}

fn parts<'a>(
    s: &'a SchemeSpec,
    v: Variable,
) -> Result<Vec<(u32, Vec<usize>, Part<'a>)>, SchemeError> {
    let p = s.params;
    let bad = |m: String| Err(SchemeError::Parameters(m));
    let answer_parts = |db: usize, q: usize| -> Vec<(u32, Vec<usize>, Part<'a>)> {
        (0..s.tables.databases[db].lengths[q])
            .map(|pos| {
                let comps = s.tables.databases[db].answers[q][pos].inputs.clone();
                let f: Part<'a> = Box::new(move |m: &[u32]| s.answer_value(db, q, pos, m));
                (p.answer_alphabet, s.storage_cone(db, comps), f)
            })
            .collect()
    };
    match v {
        Variable::Message(k) => {
            if k >= p.k as usize {
                return bad(format!("no message {k}"));
            }
            let l = p.l as usize;
            Ok((0..l)
                .map(|i| {
                    let j = k * l + i;
                    let f: Part<'a> = Box::new(move |m: &[u32]| m[j]);
                    (p.message_alphabet, vec![j], f)
                })
                .collect())
        }
        Variable::Storage(db) => {
            let d = s.tables.databases.get(db).ok_or_else(|| no_db(db))?;
            Ok((0..d.storage.len())
                .map(|c| {
                    let f: Part<'a> = Box::new(move |m: &[u32]| s.storage_value(db, c, m));
                    (d.storage[c].size, s.storage_cone(db, [c]), f)
                })
                .collect())
        }
        Variable::FixedAnswer { db, query } => {
            let d = s.tables.databases.get(db).ok_or_else(|| no_db(db))?;
            if query >= d.query_count {
                return bad(format!("database {db} has no query {query}"));
            }
            Ok(answer_parts(db, query))
        }
        Variable::Answer { db, k, key } => {
            let key = key.ok_or_else(|| {
                SchemeError::KeyDependent(format!("the answer of database {db} for message {k}"))
            })?;
            let d = s.tables.databases.get(db).ok_or_else(|| no_db(db))?;
            if k >= p.k as usize || key >= s.key_space {
                return bad(format!("no query for message {k} under key {key}"));
            }
            Ok(answer_parts(db, d.choice[k][key]))
        }
    }
}

/// Exact joint law of the selected variables under uniform messages, as an
/// entropy vector in message units (`L·log2|X|` bits).
pub fn scheme_entropy_bridge(
    s: &SchemeSpec,
    selection: &[(&str, Variable)],
) -> Result<EntropyVector, SchemeError> {
    s.validate()?;
    let ground = GroundSet::new(selection.iter().map(|(n, _)| *n))
        .map_err(|e| SchemeError::Parameters(e.to_string()))?;
    let mut vars = Vec::new();
    let mut alphabet = Vec::new();
    let mut cone = Vec::new();
    for (name, v) in selection {
        let ps = parts(s, *v)?;
        let size = ps.iter().fold(1u128, |a, (y, _, _)| a.saturating_mul(*y as u128));
        if size > u32::MAX as u128 {
            return Err(SchemeError::Parameters(format!("{name} has {size} values")));
        }
        alphabet.push(size as u32);
        for (_, c, _) in &ps {
            cone.extend(c.iter().copied());
        }
        vars.push(ps);
    }
    cone.sort_unstable();
    cone.dedup();
    guard("entropy bridge", s.enumeration_count(cone.len()))?;
    let mut outcomes = Vec::new();
    let mut msg = vec![0u32; s.message_symbols()];
    for_each_assignment(&cone, s.params.message_alphabet, &mut msg, |m| {
        outcomes.push(
            vars.iter()
                .map(|ps| ps.iter().fold(0u32, |acc, (y, _, f)| acc * y + f(m)))
                .collect(),
        );
        true
    });
    let d = JointDistribution::uniform_over(ground, alphabet, outcomes)
        .map_err(|e| SchemeError::Parameters(e.to_string()))?;
    let unit = rational::from_f64_exact(s.params.l as f64 * (s.params.message_alphabet as f64).log2());
    Ok(entropy_vector_from_distribution(&d).scaled_down(&unit))
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use crate::entropy::{elemental_inequalities, evaluate_f64};
    use crate::models::{build_base_model, ModelOptions, ALPHA, BETA};
    use crate::rational::int;
    use std::collections::BTreeMap;

    #[test]
    fn xor2_fixed_answer() {
        let s = builtin_xor2(2, 1).unwrap();
        let v = scheme_entropy_bridge(
            &s,
            &[
                ("W1", Variable::Message(0)),
                ("W2", Variable::Message(1)),
                ("A", Variable::FixedAnswer { db: 0, query: 0b01 }),
            ],
        )
        .unwrap();
        let g = v.ground().clone();
        let m = |l: &[&str]| g.mask_of(l).unwrap();
        assert_eq!(v.get_mask(m(&["A"])), int(1));
        assert_eq!(v.get_mask(m(&["A", "W2"])), int(2));
        for c in elemental_inequalities(&g).unwrap() {
            assert!(c.holds_f64(evaluate_f64(&c.form, &v.to_f64(), &BTreeMap::new()).unwrap(), 1e-12));
        }
    }

    #[test]
    fn download_all_storage() {
        let s = builtin_download_all(2, 2, 1, 2).unwrap();
        let v = scheme_entropy_bridge(
            &s,
            &[("S1", Variable::Storage(0)), ("S2", Variable::Storage(1))],
        )
        .unwrap();
        assert_eq!(v.get_mask(0b11), int(2));
    }

    #[test]
    fn key_dependent_selection_is_refused() {
        let s = builtin_xor2(2, 1).unwrap();
        let sel = [("A", Variable::Answer { db: 0, k: 0, key: None })];
        assert!(matches!(scheme_entropy_bridge(&s, &sel), Err(SchemeError::KeyDependent(_))));
        let sel = [("A", Variable::Answer { db: 0, k: 0, key: Some(3) })];
        let v = scheme_entropy_bridge(&s, &sel).unwrap();
        assert_eq!(v.get_mask(1), int(1));
    }

    /// Maps xor2 answers to the answer-variety roles and checks every base
    /// constraint outside the symmetry family.
    #[test]
    fn xor2_realizes_a_base_model_point() {
        let s = builtin_xor2(2, 1).unwrap();
        let fixed = |db, query| Variable::FixedAnswer { db, query };
        let sel = [
            ("W1", Variable::Message(0)),
            ("W2", Variable::Message(1)),
            ("X1", fixed(0, 0b01)),
            ("X2", fixed(0, 0b11)),
            ("X3", fixed(0, 0b10)),
            ("Y1", fixed(1, 0b01)),
            ("Y2", fixed(1, 0b11)),
        ];
        let v = scheme_entropy_bridge(&s, &sel).unwrap();
        let model = build_base_model(&ModelOptions::base().with_symmetry(false)).unwrap();
        assert_eq!(model.ground(), v.ground());
        let costs = measure_costs(&s).unwrap();
        let scalars = BTreeMap::from([
            (ALPHA.to_string(), costs.alpha.approx),
            (BETA.to_string(), costs.beta.approx),
        ]);
        let values = v.to_f64();
        for c in model.program.constraints() {
            let lhs = evaluate_f64(&c.form, &values, &scalars).unwrap();
            assert!(c.holds_f64(lhs, 1e-9), "{} at {lhs}", c.tag);
        }
    }
}
