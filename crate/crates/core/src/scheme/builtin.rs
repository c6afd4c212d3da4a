use super::{
    AnswerRef, DatabaseTables, SchemeError, SchemeParams, SchemeSpec, SchemeTables,
    StorageComponent, Table, SCHEME_VERSION,
};
use num_integer::Integer;

fn identity(input: usize, alphabet: u32) -> Table<usize> {
    Table {
        inputs: vec![input],
        values: (0..alphabet).collect(),
    }
}

/// Messages split into `N` contiguous blocks of `K·L/N` symbols; each
/// database stores one block and always returns all of it.
pub fn builtin_download_all(n: u32, k: u32, l: u32, x: u32) -> Result<SchemeSpec, SchemeError> {
    if n == 0 || k == 0 || l == 0 {
        return Err(SchemeError::Parameters("N, K and L must be positive".into()));
    }
    if x < 2 {
        return Err(SchemeError::Parameters("the message alphabet needs two symbols".into()));
    }
    let kl = k * l;
    if kl % n != 0 {
        return Err(SchemeError::Divisibility {
            n,
            kl,
            suggest: n / n.gcd(&k),
        });
    }
    let block = (kl / n) as usize;
    let databases = (0..n as usize)
        .map(|db| DatabaseTables {
            storage: (0..block)
                .map(|i| StorageComponent {
                    size: x,
                    table: identity(db * block + i, x),
                })
                .collect(),
            query_count: 1,
            choice: vec![vec![0]; k as usize],
            lengths: vec![block],
            answers: vec![(0..block).map(|i| identity(i, x)).collect()],
        })
        .collect();
    let decoders = (0..k as usize)
        .map(|w| {
            let syms = (0..l as usize)
                .map(|s| {
                    let j = w * l as usize + s;
                    Table {
                        inputs: vec![AnswerRef { db: j / block, pos: j % block }],
                        values: (0..x).collect(),
                    }
                })
                .collect();
            vec![syms]
        })
        .collect();
    Ok(SchemeSpec {
        version: SCHEME_VERSION,
        name: format!("download-all({n},{k},{l})"),
        params: SchemeParams {
            n,
            k,
            l,
            message_alphabet: x,
            answer_alphabet: x,
        },
        key_space: 1,
        tables: SchemeTables { databases, decoders },
    })
}

/// Two replicated binary databases. The key is a subset `T` of messages;
/// database 1 gets `T`, database 2 gets `T Δ {k}`, each answers the XOR of
/// the requested messages, and the user XORs the two answers.
pub fn builtin_xor2(k: u32, l: u32) -> Result<SchemeSpec, SchemeError> {
    if k == 0 || l == 0 {
        return Err(SchemeError::Parameters("K and L must be positive".into()));
    }
    if k > 20 {
        return Err(SchemeError::Parameters(format!("K={k} gives 2^{k} keys; at most 20 supported")));
    }
    let subsets = 1usize << k;
    let l_len = l as usize;
    let storage: Vec<StorageComponent> = (0..(k * l) as usize)
        .map(|j| StorageComponent {
            size: 2,
            table: identity(j, 2),
        })
        .collect();
    let answers: Vec<Vec<Table<usize>>> = (0..subsets)
        .map(|q| {
            (0..l_len)
                .map(|s| {
                    let inputs: Vec<usize> = (0..k as usize)
                        .filter(|w| q >> w & 1 == 1)
                        .map(|w| w * l_len + s)
                        .collect();
                    let values = (0..1u32 << inputs.len()).map(|v| v.count_ones() & 1).collect();
                    Table { inputs, values }
                })
                .collect()
        })
        .collect();
    let database = |flip: bool| DatabaseTables {
        storage: storage.clone(),
        query_count: subsets,
        choice: (0..k as usize)
            .map(|w| (0..subsets).map(|t| if flip { t ^ (1 << w) } else { t }).collect())
            .collect(),
        lengths: vec![l_len; subsets],
        answers: answers.clone(),
    };
    let decoders = (0..k as usize)
        .map(|_| {
            (0..subsets)
                .map(|_| {
                    (0..l_len)
                        .map(|s| Table {
                            inputs: vec![AnswerRef { db: 0, pos: s }, AnswerRef { db: 1, pos: s }],
                            values: vec![0, 1, 1, 0],
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(SchemeSpec {
        version: SCHEME_VERSION,
        name: format!("xor2({k},{l})"),
        params: SchemeParams {
            n: 2,
            k,
            l,
            message_alphabet: 2,
            answer_alphabet: 2,
        },
        key_space: subsets,
        tables: SchemeTables {
            databases: vec![database(false), database(true)],
            decoders,
        },
    })
}

/// xor2 with database 2 sent `T` instead of `T Δ {k}`: still private, no
/// longer correct.
pub fn xor2_plain_second_query(s: &SchemeSpec) -> SchemeSpec {
    let mut out = s.clone();
    out.name = format!("{}+plain-second-query", s.name);
    let first = out.tables.databases[0].choice.clone();
    out.tables.databases[1].choice = first;
    out
}

/// xor2 with database 2 sent `T ∪ {k}`, whose law depends on `k`.
pub fn leaky_xor2(s: &SchemeSpec) -> SchemeSpec {
    let mut out = s.clone();
    out.name = format!("{}+leaky", s.name);
    for (w, row) in out.tables.databases[1].choice.iter_mut().enumerate() {
        for (t, q) in row.iter_mut().enumerate() {
            *q = t | 1 << w;
        }
    }
    out
}

/// Renames message `k` to `perm[k]` throughout the scheme.
pub fn relabel_messages(s: &SchemeSpec, perm: &[usize]) -> Result<SchemeSpec, SchemeError> {
    let k = s.params.k as usize;
    let mut seen = vec![false; k];
    if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
        return Err(SchemeError::Parameters(format!("{perm:?} is not a permutation of 0..{k}")));
    }
    let l = s.params.l as usize;
    let map = |j: usize| perm[j / l] * l + j % l;
    let mut out = s.clone();
    out.name = format!("{}+relabel{perm:?}", s.name);
    for db in &mut out.tables.databases {
        for c in &mut db.storage {
            c.table.inputs = c.table.inputs.iter().map(|&j| map(j)).collect();
        }
        let old = db.choice.clone();
        for (w, row) in old.into_iter().enumerate() {
            db.choice[perm[w]] = row;
        }
    }
    let old = s.tables.decoders.clone();
    for (w, row) in old.into_iter().enumerate() {
        out.tables.decoders[perm[w]] = row;
    }
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn divisibility_is_reported() {
        match builtin_download_all(4, 2, 1, 2) {
            Err(SchemeError::Divisibility { suggest, .. }) => assert_eq!(suggest, 2),
            other => panic!("{other:?}"),
        }
        assert!(builtin_download_all(4, 2, 2, 2).is_ok());
    }

    #[test]
    fn single_message_xor2_is_private_and_correct() {
        let r = verify(&builtin_xor2(1, 1).unwrap()).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn relabeling_keeps_costs() {
        for s in [builtin_xor2(3, 1).unwrap(), builtin_download_all(3, 3, 2, 2).unwrap()] {
            let base = verify(&s).unwrap();
            for perm in [[1, 2, 0], [2, 1, 0], [0, 2, 1]] {
                let r = verify(&relabel_messages(&s, &perm).unwrap()).unwrap();
                assert!(r.passed());
                assert_eq!(r.costs, base.costs);
            }
        }
        assert!(relabel_messages(&builtin_xor2(2, 1).unwrap(), &[0, 0]).is_err());
    }
}
