//! Executable PIR storage codes with explicit function tables.
//!
//! A scheme document lists, for every database, its storage components, its
//! query table and its answer tables, plus one decoder table per recovered
//! message symbol. Every table is a dense map over its inputs in
//! lexicographic order (first input most significant). Tables name their
//! inputs explicitly, so verification only enumerates the symbols that can
//! reach a given output.

mod bridge;
mod builtin;
mod measure;
mod verify;

pub use bridge::{scheme_entropy_bridge, Variable};
pub use builtin::{
    builtin_download_all, builtin_xor2, leaky_xor2, relabel_messages, xor2_plain_second_query,
};
pub use measure::{check_bounds, measure_costs, BoundCheck, CostReport, DatabaseCosts, Measure};
pub use verify::{
    verify, verify_correctness, verify_privacy, Counterexample, CorrectnessReport,
    PrivacyReport, VerificationReport,
};

use serde::{Deserialize, Serialize};

pub const SCHEME_VERSION: u32 = 1;

/// Largest number of enumerated cases any verifier accepts.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemeError {
    #[error("malformed scheme: {0}")]
    Malformed(String),
    #[error("unsupported scheme version {0}")]
    Version(u32),
    #[error("{what} needs {count} enumerated cases, above the limit of {limit}")]
    TooLarge { what: String, count: u128, limit: u64 },
    #[error("N={n} does not divide K*L={kl}; L={suggest} would work")]
    Divisibility { n: u32, kl: u32, suggest: u32 },
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("{0} depends on the key; fix a key value first")]
    KeyDependent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub n: u32,
    pub k: u32,
    pub l: u32,
    pub message_alphabet: u32,
    pub answer_alphabet: u32,
}

/// A dense function table. `values` has one entry per input tuple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table<I> {
    pub inputs: Vec<I>,
    pub values: Vec<u32>,
}

/// One stored symbol: `size` is its declared alphabet, inputs are message
/// symbols `k·L + l` (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageComponent {
    pub size: u32,
    #[serde(flatten)]
    pub table: Table<usize>,
}

/// Answer symbol `pos` of database `db`, under whatever query it received.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AnswerRef {
    pub db: usize,
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatabaseTables {
    pub storage: Vec<StorageComponent>,
    /// `|Q_n|`.
    pub query_count: usize,
    /// `choice[k][f]`: query sent for desired message `k` under key `f`.
    pub choice: Vec<Vec<usize>>,
    /// Declared answer length per query.
    pub lengths: Vec<usize>,
    /// `answers[q][pos]`, with inputs indexing `storage`.
    pub answers: Vec<Vec<Table<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeTables {
    pub databases: Vec<DatabaseTables>,
    /// `decoders[k][f][l]` recovers symbol `l` of message `k`.
    pub decoders: Vec<Vec<Vec<Table<AnswerRef>>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub version: u32,
    pub name: String,
    pub params: SchemeParams,
    /// `|F|`; the key is uniform over `0..key_space`.
    pub key_space: usize,
    pub tables: SchemeTables,
}

fn radix_product(sizes: impl IntoIterator<Item = u32>) -> u128 {
    sizes
        .into_iter()
        .fold(1u128, |acc, s| acc.saturating_mul(s as u128))
}

/// Mixed-radix index, first digit most significant.
fn index_of(digits: impl IntoIterator<Item = (u32, u32)>) -> usize {
    digits
        .into_iter()
        .fold(0usize, |acc, (d, radix)| acc * radix as usize + d as usize)
}

fn check_table<I>(
    t: &Table<I>,
    radices: &[u32],
    codomain: u32,
    what: &str,
) -> Result<(), SchemeError> {
    let want = radix_product(radices.iter().copied());
    if t.values.len() as u128 != want {
        return Err(SchemeError::Malformed(format!(
            "{what}: {} values for {want} input tuples",
            t.values.len()
        )));
    }
    if let Some(v) = t.values.iter().find(|&&v| v >= codomain) {
        return Err(SchemeError::Malformed(format!(
            "{what}: value {v} outside alphabet of size {codomain}"
        )));
    }
    Ok(())
}

impl SchemeSpec {
    pub fn message_symbols(&self) -> usize {
        (self.params.k * self.params.l) as usize
    }

    pub fn from_json(text: &str) -> Result<Self, SchemeError> {
        let s: SchemeSpec =
            serde_json::from_str(text).map_err(|e| SchemeError::Malformed(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scheme serializes")
    }

    pub fn storage_size(&self, db: usize) -> u128 {
        radix_product(self.tables.databases[db].storage.iter().map(|c| c.size))
    }

    /// Checks that every table is total and every reference resolves.
    pub fn validate(&self) -> Result<(), SchemeError> {
        if self.version != SCHEME_VERSION {
            return Err(SchemeError::Version(self.version));
        }
        let p = &self.params;
        if p.n == 0 || p.k == 0 || p.l == 0 {
            return Err(SchemeError::Parameters("N, K and L must be positive".into()));
        }
        if p.message_alphabet < 2 || p.answer_alphabet < 2 {
            return Err(SchemeError::Parameters("alphabets need at least two symbols".into()));
        }
        if self.key_space == 0 {
            return Err(SchemeError::Parameters("the key space is empty".into()));
        }
        let dbs = &self.tables.databases;
        if dbs.len() != p.n as usize {
            return Err(SchemeError::Malformed(format!(
                "{} database tables for N={}",
                dbs.len(),
                p.n
            )));
        }
        let symbols = self.message_symbols();
        for (n, db) in dbs.iter().enumerate() {
            for (c, comp) in db.storage.iter().enumerate() {
                let what = format!("database {n} storage {c}");
                if comp.size == 0 {
                    return Err(SchemeError::Malformed(format!("{what}: empty alphabet")));
                }
                if let Some(i) = comp.table.inputs.iter().find(|&&i| i >= symbols) {
                    return Err(SchemeError::Malformed(format!("{what}: no message symbol {i}")));
                }
                let radices = vec![p.message_alphabet; comp.table.inputs.len()];
                check_table(&comp.table, &radices, comp.size, &what)?;
            }
            if db.choice.len() != p.k as usize
                || db.choice.iter().any(|row| row.len() != self.key_space)
            {
                return Err(SchemeError::Malformed(format!(
                    "database {n}: query table must be K x |F|"
                )));
            }
            if db.choice.iter().flatten().any(|&q| q >= db.query_count) {
                return Err(SchemeError::Malformed(format!("database {n}: query out of range")));
            }
            if db.lengths.len() != db.query_count || db.answers.len() != db.query_count {
                return Err(SchemeError::Malformed(format!(
                    "database {n}: lengths and answers must cover every query"
                )));
            }
            for (q, ans) in db.answers.iter().enumerate() {
                if ans.len() != db.lengths[q] {
                    return Err(SchemeError::Malformed(format!(
                        "database {n} query {q}: {} answer symbols, declared length {}",
                        ans.len(),
                        db.lengths[q]
                    )));
                }
                for (pos, t) in ans.iter().enumerate() {
                    let what = format!("database {n} query {q} answer {pos}");
                    let mut radices = Vec::with_capacity(t.inputs.len());
                    for &c in &t.inputs {
                        let comp = db.storage.get(c).ok_or_else(|| {
                            SchemeError::Malformed(format!("{what}: no storage component {c}"))
                        })?;
                        radices.push(comp.size);
                    }
                    check_table(t, &radices, p.answer_alphabet, &what)?;
                }
            }
        }
        let dec = &self.tables.decoders;
        if dec.len() != p.k as usize
            || dec
                .iter()
                .any(|row| row.len() != self.key_space || row.iter().any(|d| d.len() != p.l as usize))
        {
            return Err(SchemeError::Malformed("decoders must be K x |F| x L".into()));
        }
        for (k, row) in dec.iter().enumerate() {
            for (f, syms) in row.iter().enumerate() {
                for (l, t) in syms.iter().enumerate() {
                    let what = format!("decoder k={k} f={f} l={l}");
                    for r in &t.inputs {
                        let db = dbs.get(r.db).ok_or_else(|| {
                            SchemeError::Malformed(format!("{what}: no database {}", r.db))
                        })?;
                        let q = db.choice[k][f];
                        if r.pos >= db.lengths[q] {
                            return Err(SchemeError::Malformed(format!(
                                "{what}: answer {} of database {} has length {}",
                                r.pos, r.db, db.lengths[q]
                            )));
                        }
                    }
                    let radices = vec![p.answer_alphabet; t.inputs.len()];
                    check_table(t, &radices, p.message_alphabet, &what)?;
                }
            }
        }
        Ok(())
    }

    fn storage_value(&self, db: usize, comp: usize, msg: &[u32]) -> u32 {
        let c = &self.tables.databases[db].storage[comp];
        let x = self.params.message_alphabet;
        c.table.values[index_of(c.table.inputs.iter().map(|&i| (msg[i], x)))]
    }

    fn answer_value(&self, db: usize, q: usize, pos: usize, msg: &[u32]) -> u32 {
        let d = &self.tables.databases[db];
        let t = &d.answers[q][pos];
        t.values[index_of(
            t.inputs
                .iter()
                .map(|&c| (self.storage_value(db, c, msg), d.storage[c].size)),
        )]
    }

    /// Decoded symbol `l` of message `k` under key `f`.
    fn decode(&self, k: usize, f: usize, l: usize, msg: &[u32]) -> u32 {
        let t = &self.tables.decoders[k][f][l];
        let y = self.params.answer_alphabet;
        t.values[index_of(t.inputs.iter().map(|r| {
            let q = self.tables.databases[r.db].choice[k][f];
            (self.answer_value(r.db, q, r.pos, msg), y)
        }))]
    }

    fn storage_cone(&self, db: usize, comps: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut cone: Vec<usize> = comps
            .into_iter()
            .flat_map(|c| self.tables.databases[db].storage[c].table.inputs.iter().copied())
            .collect();
        cone.sort_unstable();
        cone.dedup();
        cone
    }

    fn answer_cone(&self, db: usize, q: usize) -> Vec<usize> {
        let comps: Vec<usize> = self.tables.databases[db].answers[q]
            .iter()
            .flat_map(|t| t.inputs.iter().copied())
            .collect();
        self.storage_cone(db, comps)
    }

    fn enumeration_count(&self, cone_len: usize) -> u128 {
        (self.params.message_alphabet as u128).saturating_pow(cone_len as u32)
    }
}

/// Iterates all assignments to `cone` in lexicographic order, writing them
/// into `msg` (other positions keep their values).
fn for_each_assignment(
    cone: &[usize],
    alphabet: u32,
    msg: &mut [u32],
    mut visit: impl FnMut(&[u32]) -> bool,
) {
    for &i in cone {
        msg[i] = 0;
    }
    loop {
        if !visit(msg) {
            return;
        }
        let mut pos = cone.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            let i = cone[pos];
            msg[i] += 1;
            if msg[i] < alphabet {
                break;
            }
            msg[i] = 0;
        }
    }
}

fn guard(what: impl Into<String>, count: u128) -> Result<(), SchemeError> {
    if count > ENUMERATION_LIMIT as u128 {
        return Err(SchemeError::TooLarge {
            what: what.into(),
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}
