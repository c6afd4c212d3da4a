use super::{for_each_assignment, guard, measure, SchemeError, SchemeSpec};
use crate::rational::{ratio, Rational};
use num_bigint::BigUint;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// `messages[k][l]`; symbols outside the decoder's inputs are zero.
    pub messages: Vec<Vec<u32>>,
    pub key: usize,
    pub k: usize,
    pub symbol: usize,
    pub decoded: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectnessReport {
    pub passed: bool,
    /// Cases actually enumerated, summed over `(k, f, l)`.
    pub cases: u64,
    /// `|X|^{KL}·|F|·K`, the size of the unreduced check.
    pub naive_cases: BigUint,
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivacyReport {
    pub passed: bool,
    /// `distributions[n][k][q]` = Pr(Q_n^{[k]} = q).
    pub distributions: Vec<Vec<Vec<Rational>>>,
    /// Databases whose query law depends on `k`.
    pub leaking: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub correctness: CorrectnessReport,
    pub privacy: PrivacyReport,
    pub costs: measure::CostReport,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.correctness.passed && self.privacy.passed && self.costs.invariants_hold()
    }
}

/// Checks `Ŵ_k = W_k` for every message tuple, key and desired index. Each
/// decoded symbol is checked over all values of the message symbols its
/// tables read, which covers every message tuple.
pub fn verify_correctness(s: &SchemeSpec) -> Result<CorrectnessReport, SchemeError> {
    s.validate()?;
    let p = s.params;
    let l_len = p.l as usize;
    let mut cones = Vec::new();
    let mut total: u128 = 0;
    for k in 0..p.k as usize {
        for f in 0..s.key_space {
            for l in 0..l_len {
                let mut cone: Vec<usize> = Vec::new();
                for r in &s.tables.decoders[k][f][l].inputs {
                    let q = s.tables.databases[r.db].choice[k][f];
                    let comps = s.tables.databases[r.db].answers[q][r.pos].inputs.clone();
                    cone.extend(s.storage_cone(r.db, comps));
                }
                cone.push(k * l_len + l);
                cone.sort_unstable();
                cone.dedup();
                total = total.saturating_add(s.enumeration_count(cone.len()));
                cones.push((k, f, l, cone));
            }
        }
    }
    guard("correctness check", total)?;
    let naive = BigUint::from(p.message_alphabet).pow(p.k * p.l)
        * BigUint::from(s.key_space)
        * BigUint::from(p.k);
    let mut msg = vec![0u32; s.message_symbols()];
    let mut counterexample = None;
    for (k, f, l, cone) in &cones {
        let target = k * l_len + l;
        for_each_assignment(cone, p.message_alphabet, &mut msg, |m| {
            let got = s.decode(*k, *f, *l, m);
            if got != m[target] {
                counterexample = Some(Counterexample {
                    messages: m.chunks(l_len).map(|c| c.to_vec()).collect(),
                    key: *f,
                    k: *k,
                    symbol: *l,
                    decoded: got,
                });
                return false;
            }
            true
        });
        for &i in cone {
            msg[i] = 0;
        }
        if counterexample.is_some() {
            break;
        }
    }
    Ok(CorrectnessReport {
        passed: counterexample.is_none(),
        cases: total as u64,
        naive_cases: naive,
        counterexample,
    })
}

/// Exact law of each database's query under a uniform key, per desired index.
pub fn verify_privacy(s: &SchemeSpec) -> Result<PrivacyReport, SchemeError> {
    s.validate()?;
    guard(
        "privacy check",
        (s.key_space as u128).saturating_mul(s.params.k as u128 * s.params.n as u128),
    )?;
    let f_size = s.key_space as i64;
    let mut distributions = Vec::new();
    let mut leaking = Vec::new();
    for (n, db) in s.tables.databases.iter().enumerate() {
        let per_k: Vec<Vec<Rational>> = db
            .choice
            .iter()
            .map(|row| {
                let mut counts = vec![0i64; db.query_count];
                for &q in row {
                    counts[q] += 1;
                }
                counts.into_iter().map(|c| ratio(c, f_size)).collect()
            })
            .collect();
        if per_k.windows(2).any(|w| w[0] != w[1]) {
            leaking.push(n);
        }
        distributions.push(per_k);
    }
    Ok(PrivacyReport {
        passed: leaking.is_empty(),
        distributions,
        leaking,
    })
}

/// Runs both verifiers and the cost meters.
pub fn verify(s: &SchemeSpec) -> Result<VerificationReport, SchemeError> {
    Ok(VerificationReport {
        correctness: verify_correctness(s)?,
        privacy: verify_privacy(s)?,
        costs: measure::measure_costs(s)?,
    })
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use crate::rational::ratio;

    #[test]
    fn download_all_passes() {
        for (n, k, l) in [(2, 2, 1), (3, 2, 3), (6, 10, 3)] {
            let s = builtin_download_all(n, k, l, 2).unwrap();
            let c = verify_correctness(&s).unwrap();
            assert!(c.passed, "({n},{k},{l})");
            assert!(verify_privacy(&s).unwrap().passed);
        }
    }

    #[test]
    fn xor2_passes_with_uniform_queries() {
        let s = builtin_xor2(3, 1).unwrap();
        let c = verify_correctness(&s).unwrap();
        assert!(c.passed);
        assert_eq!(c.naive_cases, 192u32.into());
        assert!(c.cases < 192);
        let s = builtin_xor2(2, 1).unwrap();
        let p = verify_privacy(&s).unwrap();
        assert!(p.passed);
        for db in &p.distributions {
            for row in db {
                assert_eq!(row, &vec![ratio(1, 4); 4]);
            }
        }
    }

    #[test]
    fn mutations_fail() {
        let s = xor2_plain_second_query(&builtin_xor2(2, 1).unwrap());
        let c = verify_correctness(&s).unwrap();
        assert!(!c.passed);
        let cx = c.counterexample.unwrap();
        assert_eq!(cx.messages[cx.k][cx.symbol], 1);
        assert_eq!(cx.decoded, 0);
        assert!(verify_privacy(&s).unwrap().passed);

        let s = leaky_xor2(&builtin_xor2(2, 1).unwrap());
        let p = verify_privacy(&s).unwrap();
        assert!(!p.passed);
        assert_eq!(p.leaking, vec![1]);
    }

    #[test]
    fn oversized_checks_are_refused() {
        let s = builtin_xor2(13, 1).unwrap();
        match verify_correctness(&s) {
            Err(SchemeError::TooLarge { count, .. }) => assert!(count > ENUMERATION_LIMIT as u128),
            other => panic!("{other:?}"),
        }
    }
}
