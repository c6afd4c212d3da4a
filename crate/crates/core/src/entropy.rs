//! Entropy vectors over a finite ground set of random variables.
//!
//! Coordinates are nonempty subsets encoded as bitmasks over the ground set
//! (bit `i` set means variable `i` is included). Information expressions are
//! compiled to [`LinearForm`]s with exact rational coefficients, and
//! [`entropy_vector_from_distribution`] computes the vector of an explicit
//! joint distribution, which serves as a brute-force oracle everywhere else.

use crate::rational::{self, Rational};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Largest supported ground set.
pub const MAX_VARIABLES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EntropyError {
    #[error("ground set must contain between 1 and {MAX_VARIABLES} variables, got {0}")]
    GroundSize(usize),
    #[error("duplicate variable label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown variable label {0:?}")]
    UnknownLabel(String),
    #[error("variable {0:?} appears in more than one argument")]
    Overlap(String),
    #[error("the first argument must be a nonempty set of variables")]
    EmptyArgument,
    #[error("coordinate {0:#x} lies outside the ground set")]
    UnboundCoordinate(u32),
    #[error("scalar {0:?} is not bound")]
    UnboundScalar(String),
    #[error("entropy vector must have {expected} values, got {got}")]
    VectorSize { expected: usize, got: usize },
    #[error("negative entropy value at {0}")]
    NegativeEntropy(String),
    #[error("distribution: {0}")]
    Distribution(String),
}

/// Ordered, immutable set of variable labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct GroundSet {
    names: Vec<String>,
}

impl TryFrom<Vec<String>> for GroundSet {
    type Error = EntropyError;
    fn try_from(names: Vec<String>) -> Result<Self, Self::Error> {
        GroundSet::new(names)
    }
}

impl From<GroundSet> for Vec<String> {
    fn from(g: GroundSet) -> Self {
        g.names
    }
}

impl GroundSet {
    pub fn new<I, S>(names: I) -> Result<Self, EntropyError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() || names.len() > MAX_VARIABLES {
            return Err(EntropyError::GroundSize(names.len()));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(EntropyError::DuplicateLabel(name.clone()));
            }
        }
        Ok(GroundSet { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Mask with every variable set.
    pub fn full_mask(&self) -> u32 {
        ((1u64 << self.len()) - 1) as u32
    }

    /// Number of nonempty subsets, i.e. entropy coordinates.
    pub fn coordinate_count(&self) -> usize {
        self.full_mask() as usize
    }

    pub fn index_of(&self, label: &str) -> Result<usize, EntropyError> {
        self.names
            .iter()
            .position(|n| n == label)
            .ok_or_else(|| EntropyError::UnknownLabel(label.to_string()))
    }

    /// Mask of a (possibly empty) set of labels.
    pub fn mask_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<u32, EntropyError> {
        labels
            .iter()
            .try_fold(0u32, |m, l| Ok(m | (1 << self.index_of(l.as_ref())?)))
    }

    pub fn subset<S: AsRef<str>>(&self, labels: &[S]) -> Result<SubsetId, EntropyError> {
        SubsetId::new(self.mask_of(labels)?).ok_or(EntropyError::EmptyArgument)
    }

    /// Every nonempty subset in ascending mask order.
    pub fn subsets(&self) -> impl Iterator<Item = SubsetId> {
        (1..=self.full_mask()).map(SubsetId)
    }

    /// Labels of the variables in `mask`, in ground-set order.
    pub fn labels(&self, mask: u32) -> Vec<&str> {
        (0..self.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.names[i].as_str())
            .collect()
    }

    /// Comma separated labels, e.g. `W1,X2`.
    pub fn label(&self, mask: u32) -> String {
        self.labels(mask).join(",")
    }

    pub fn contains_mask(&self, mask: u32) -> bool {
        mask & !self.full_mask() == 0
    }
}

/// A nonempty subset of the ground set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SubsetId(u32);

impl SubsetId {
    pub fn new(mask: u32) -> Option<Self> {
        (mask != 0).then_some(SubsetId(mask))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    /// Position in a dense coordinate table.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

/// Entropy value for every nonempty subset, in normalized units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropyVector {
    ground: GroundSet,
    values: Vec<Rational>,
}

impl EntropyVector {
    pub fn new(ground: GroundSet, values: Vec<Rational>) -> Result<Self, EntropyError> {
        let expected = ground.coordinate_count();
        if values.len() != expected {
            return Err(EntropyError::VectorSize {
                expected,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| v.is_negative()) {
            return Err(EntropyError::NegativeEntropy(ground.label(i as u32 + 1)));
        }
        Ok(EntropyVector { ground, values })
    }

    /// Builds a vector from floating-point entropies; each value is taken exactly.
    pub fn from_f64(ground: GroundSet, values: &[f64]) -> Result<Self, EntropyError> {
        let values = values
            .iter()
            .map(|&v| rational::from_f64_exact(if v == 0.0 { 0.0 } else { v }))
            .collect();
        Self::new(ground, values)
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn get(&self, s: SubsetId) -> &Rational {
        &self.values[s.index()]
    }

    /// Entropy of `mask`, with `H(∅) = 0`.
    pub fn get_mask(&self, mask: u32) -> Rational {
        match SubsetId::new(mask) {
            None => Rational::zero(),
            Some(s) => self.values[s.index()].clone(),
        }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(rational::to_f64).collect()
    }

    /// Divides every coordinate by `unit`.
    pub fn scaled_down(&self, unit: &Rational) -> Self {
        EntropyVector {
            ground: self.ground.clone(),
            values: self.values.iter().map(|v| v / unit).collect(),
        }
    }
}

/// Sparse affine functional over entropy coordinates and named scalars.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LinearForm {
    entropy: BTreeMap<SubsetId, Rational>,
    scalars: BTreeMap<String, Rational>,
    constant: Rational,
}

impl LinearForm {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `coef · H(mask)`; the empty mask contributes nothing.
    pub fn entropy(mask: u32, coef: Rational) -> Self {
        let mut f = Self::zero();
        f.add_entropy(mask, coef);
        f
    }

    pub fn scalar(name: &str, coef: Rational) -> Self {
        let mut f = Self::zero();
        f.add_scalar(name, coef);
        f
    }

    pub fn constant_form(c: Rational) -> Self {
        LinearForm {
            constant: c,
            ..Self::default()
        }
    }

    pub fn add_entropy(&mut self, mask: u32, coef: Rational) -> &mut Self {
        if let Some(s) = SubsetId::new(mask) {
            bump(&mut self.entropy, s, coef);
        }
        self
    }

    pub fn add_scalar(&mut self, name: &str, coef: Rational) -> &mut Self {
        bump(&mut self.scalars, name.to_string(), coef);
        self
    }

    pub fn add_constant(&mut self, c: Rational) -> &mut Self {
        self.constant += c;
        self
    }

    /// `self += coef · other`.
    pub fn add_scaled(&mut self, other: &LinearForm, coef: &Rational) -> &mut Self {
        if coef.is_zero() {
            return self;
        }
        for (s, c) in &other.entropy {
            bump(&mut self.entropy, *s, c * coef);
        }
        for (n, c) in &other.scalars {
            bump(&mut self.scalars, n.clone(), c * coef);
        }
        self.constant += &other.constant * coef;
        self
    }

    pub fn entropy_terms(&self) -> &BTreeMap<SubsetId, Rational> {
        &self.entropy
    }

    pub fn scalar_terms(&self) -> &BTreeMap<String, Rational> {
        &self.scalars
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    pub fn entropy_coef(&self, mask: u32) -> Rational {
        SubsetId::new(mask)
            .and_then(|s| self.entropy.get(&s).cloned())
            .unwrap_or_else(Rational::zero)
    }

    pub fn scalar_coef(&self, name: &str) -> Rational {
        self.scalars.get(name).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.entropy.is_empty() && self.scalars.is_empty() && self.constant.is_zero()
    }

    /// Number of nonzero variable coefficients.
    pub fn term_count(&self) -> usize {
        self.entropy.len() + self.scalars.len()
    }

    /// Renders the form with labels from `ground`, e.g. `H(W1,W2) - H(W2)`.
    pub fn render(&self, ground: &GroundSet) -> String {
        let mut parts: Vec<(Rational, String)> = self
            .entropy
            .iter()
            .map(|(s, c)| (c.clone(), format!("H({})", ground.label(s.mask()))))
            .collect();
        parts.extend(self.scalars.iter().map(|(n, c)| (c.clone(), n.clone())));
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push((self.constant.clone(), String::new()));
        }
        let mut out = String::new();
        for (i, (c, name)) in parts.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if name.is_empty() {
                out.push_str(&rational::to_string(&mag));
            } else {
                if !mag.is_one() {
                    out.push_str(&rational::to_string(&mag));
                }
                out.push_str(name);
            }
        }
        out
    }
}

fn bump<K: Ord>(map: &mut BTreeMap<K, Rational>, key: K, coef: Rational) {
    if coef.is_zero() {
        return;
    }
    let entry = map.entry(key);
    match entry {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(coef);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += coef;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

impl Add for LinearForm {
    type Output = LinearForm;
    fn add(mut self, rhs: LinearForm) -> LinearForm {
        self.add_scaled(&rhs, &Rational::one());
        self
    }
}

impl Sub for LinearForm {
    type Output = LinearForm;
    fn sub(mut self, rhs: LinearForm) -> LinearForm {
        self.add_scaled(&rhs, &-Rational::one());
        self
    }
}

impl Neg for LinearForm {
    type Output = LinearForm;
    fn neg(self) -> LinearForm {
        LinearForm::zero() - self
    }
}

impl Mul<&Rational> for LinearForm {
    type Output = LinearForm;
    fn mul(self, rhs: &Rational) -> LinearForm {
        let mut out = LinearForm::zero();
        out.add_scaled(&self, rhs);
        out
    }
}

/// Direction of a constraint on its form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    /// `form ≥ 0`
    #[serde(rename = ">=0")]
    NonNegative,
    /// `form = 0`
    #[serde(rename = "=0")]
    Zero,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub form: LinearForm,
    pub sense: Sense,
    pub tag: String,
}

impl Constraint {
    pub fn new(form: LinearForm, sense: Sense, tag: impl Into<String>) -> Self {
        let tag = tag.into();
        assert!(!tag.is_empty(), "constraint tags must be nonempty");
        Constraint { form, sense, tag }
    }

    pub fn geq(form: LinearForm, tag: impl Into<String>) -> Self {
        Self::new(form, Sense::NonNegative, tag)
    }

    pub fn eq(form: LinearForm, tag: impl Into<String>) -> Self {
        Self::new(form, Sense::Zero, tag)
    }

    /// Whether `value` (the form evaluated somewhere) satisfies the constraint
    /// within `tol`.
    pub fn holds_f64(&self, value: f64, tol: f64) -> bool {
        match self.sense {
            Sense::NonNegative => value >= -tol,
            Sense::Zero => value.abs() <= tol,
        }
    }
}

fn disjoint_masks<S: AsRef<str>>(
    ground: &GroundSet,
    args: &[&[S]],
) -> Result<Vec<u32>, EntropyError> {
    let mut seen = 0u32;
    let mut masks = Vec::with_capacity(args.len());
    for arg in args {
        let mut m = 0u32;
        for label in arg.iter() {
            let bit = 1u32 << ground.index_of(label.as_ref())?;
            if seen & bit != 0 || m & bit != 0 {
                return Err(EntropyError::Overlap(label.as_ref().to_string()));
            }
            m |= bit;
        }
        seen |= m;
        masks.push(m);
    }
    Ok(masks)
}

/// `H(A | B) = H(A ∪ B) − H(B)` over label sets.
pub fn compile_conditional_entropy<S: AsRef<str>>(
    ground: &GroundSet,
    a: &[S],
    b: &[S],
) -> Result<LinearForm, EntropyError> {
    if a.is_empty() {
        return Err(EntropyError::EmptyArgument);
    }
    let m = disjoint_masks(ground, &[a, b])?;
    Ok(conditional_entropy_mask(m[0], m[1]))
}

/// `I(A; B | C) = H(AC) + H(BC) − H(ABC) − H(C)` over label sets.
pub fn compile_conditional_mutual_information<S: AsRef<str>>(
    ground: &GroundSet,
    a: &[S],
    b: &[S],
    c: &[S],
) -> Result<LinearForm, EntropyError> {
    if a.is_empty() || b.is_empty() {
        return Err(EntropyError::EmptyArgument);
    }
    let m = disjoint_masks(ground, &[a, b, c])?;
    Ok(mutual_information_mask(m[0], m[1], m[2]))
}

/// Mask version of [`compile_conditional_entropy`]; no validation.
pub fn conditional_entropy_mask(a: u32, b: u32) -> LinearForm {
    let mut f = LinearForm::entropy(a | b, Rational::one());
    f.add_entropy(b, -Rational::one());
    f
}

/// Mask version of [`compile_conditional_mutual_information`]; no validation.
pub fn mutual_information_mask(a: u32, b: u32, c: u32) -> LinearForm {
    let one = Rational::one();
    let mut f = LinearForm::entropy(a | c, one.clone());
    f.add_entropy(b | c, one.clone());
    f.add_entropy(a | b | c, -one.clone());
    f.add_entropy(c, -one);
    f
}

/// Number of elemental inequalities on `n` variables.
pub fn elemental_count(n: usize) -> usize {
    if n < 2 {
        return n;
    }
    n + n * (n - 1) / 2 * (1usize << (n - 2))
}

/// The elemental Shannon-type inequalities: `H(X_i | rest) ≥ 0` for each
/// variable, then `I(X_i; X_j | C) ≥ 0` for each pair `i < j` and each
/// `C ⊆ ground ∖ {i, j}` in ascending mask order.
pub fn elemental_inequalities(ground: &GroundSet) -> Result<Vec<Constraint>, EntropyError> {
    let n = ground.len();
    if n == 0 {
        return Err(EntropyError::GroundSize(0));
    }
    let full = ground.full_mask();
    let mut out = Vec::with_capacity(elemental_count(n));
    for i in 0..n {
        let bit = 1u32 << i;
        let rest = full & !bit;
        let tag = if rest == 0 {
            format!("H({})", ground.names()[i])
        } else {
            format!("H({}|{})", ground.names()[i], ground.label(rest))
        };
        out.push(Constraint::geq(conditional_entropy_mask(bit, rest), tag));
    }
    for i in 0..n {
        for j in i + 1..n {
            let pair = (1u32 << i) | (1u32 << j);
            let others = full & !pair;
            // Enumerate every submask of `others` in ascending order.
            let mut c = 0u32;
            loop {
                let tag = if c == 0 {
                    format!("I({};{})", ground.names()[i], ground.names()[j])
                } else {
                    format!(
                        "I({};{}|{})",
                        ground.names()[i],
                        ground.names()[j],
                        ground.label(c)
                    )
                };
                out.push(Constraint::geq(
                    mutual_information_mask(1 << i, 1 << j, c),
                    tag,
                ));
                if c == others {
                    break;
                }
                c = (c.wrapping_sub(others)) & others;
            }
        }
    }
    Ok(out)
}

/// Exact evaluation `form(v, scalars)`.
pub fn evaluate(
    form: &LinearForm,
    v: &EntropyVector,
    scalars: &BTreeMap<String, Rational>,
) -> Result<Rational, EntropyError> {
    let mut acc = form.constant.clone();
    for (s, c) in &form.entropy {
        if !v.ground.contains_mask(s.mask()) {
            return Err(EntropyError::UnboundCoordinate(s.mask()));
        }
        acc += c * v.get(*s);
    }
    for (name, c) in &form.scalars {
        let value = scalars
            .get(name)
            .ok_or_else(|| EntropyError::UnboundScalar(name.clone()))?;
        acc += c * value;
    }
    Ok(acc)
}

/// Floating-point evaluation on a dense coordinate table (index = mask − 1).
pub fn evaluate_f64(
    form: &LinearForm,
    entropies: &[f64],
    scalars: &BTreeMap<String, f64>,
) -> Result<f64, EntropyError> {
    let mut acc = rational::to_f64(&form.constant);
    for (s, c) in &form.entropy {
        let value = entropies
            .get(s.index())
            .ok_or(EntropyError::UnboundCoordinate(s.mask()))?;
        acc += rational::to_f64(c) * value;
    }
    for (name, c) in &form.scalars {
        let value = scalars
            .get(name)
            .ok_or_else(|| EntropyError::UnboundScalar(name.clone()))?;
        acc += rational::to_f64(c) * value;
    }
    Ok(acc)
}

/// Finite joint distribution with exact probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointDistribution {
    ground: GroundSet,
    alphabet: Vec<u32>,
    table: BTreeMap<Vec<u32>, Rational>,
}

impl JointDistribution {
    /// Zero-probability outcomes may be omitted from `table`.
    pub fn new(
        ground: GroundSet,
        alphabet: Vec<u32>,
        table: BTreeMap<Vec<u32>, Rational>,
    ) -> Result<Self, EntropyError> {
        let bad = |m: String| Err(EntropyError::Distribution(m));
        if alphabet.len() != ground.len() {
            return bad(format!(
                "{} alphabet sizes for {} variables",
                alphabet.len(),
                ground.len()
            ));
        }
        if alphabet.contains(&0) {
            return bad("alphabet sizes must be positive".into());
        }
        let mut total = Rational::zero();
        for (outcome, p) in &table {
            if outcome.len() != ground.len() || outcome.iter().zip(&alphabet).any(|(x, a)| x >= a)
            {
                return bad(format!("outcome {outcome:?} outside the declared alphabets"));
            }
            if p.is_negative() {
                return bad(format!("negative probability at {outcome:?}"));
            }
            total += p;
        }
        if !total.is_one() {
            return bad(format!(
                "probabilities sum to {}",
                rational::to_string(&total)
            ));
        }
        Ok(JointDistribution {
            ground,
            alphabet,
            table,
        })
    }

    /// Uniform distribution over the listed outcomes (duplicates add weight).
    pub fn uniform_over(
        ground: GroundSet,
        alphabet: Vec<u32>,
        outcomes: impl IntoIterator<Item = Vec<u32>>,
    ) -> Result<Self, EntropyError> {
        let mut counts: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        let mut total = 0u64;
        for o in outcomes {
            *counts.entry(o).or_default() += 1;
            total += 1;
        }
        if total == 0 {
            return Err(EntropyError::Distribution("no outcomes".into()));
        }
        let table = counts
            .into_iter()
            .map(|(o, c)| (o, rational::ratio(c as i64, total as i64)))
            .collect();
        Self::new(ground, alphabet, table)
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn alphabet(&self) -> &[u32] {
        &self.alphabet
    }

    pub fn table(&self) -> &BTreeMap<Vec<u32>, Rational> {
        &self.table
    }
}

/// Shannon entropy in bits of a probability list.
pub fn shannon_bits<'a>(probs: impl IntoIterator<Item = &'a Rational>) -> f64 {
    probs
        .into_iter()
        .map(rational::to_f64)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Joint entropy in bits of every nonempty marginal. Probabilities stay exact
/// while marginalizing; only the logarithm is taken in floating point.
pub fn entropy_vector_from_distribution(d: &JointDistribution) -> EntropyVector {
    let n = d.ground.len();
    let support: Vec<(&Vec<u32>, &Rational)> = d.table.iter().filter(|(_, p)| !p.is_zero()).collect();
    let mut values = Vec::with_capacity(d.ground.coordinate_count());
    for s in d.ground.subsets() {
        let mut marginal: HashMap<Vec<u32>, Rational> = HashMap::new();
        for (outcome, p) in &support {
            let key: Vec<u32> = (0..n)
                .filter(|i| s.mask() >> i & 1 == 1)
                .map(|i| outcome[i])
                .collect();
            *marginal.entry(key).or_insert_with(Rational::zero) += *p;
        }
        let mut probs: Vec<(Vec<u32>, Rational)> = marginal.into_iter().collect();
        probs.sort();
        values.push(shannon_bits(probs.iter().map(|(_, p)| p)).max(0.0));
    }
    EntropyVector::from_f64(d.ground.clone(), &values).expect("entropies are nonnegative")
}

impl fmt::Display for GroundSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names.join(","))
    }
}
