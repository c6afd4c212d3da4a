//! Closed-form outer bounds on the storage–download tradeoff, in exact
//! rational arithmetic, and an exact replay of the induction behind the
//! `N ≥ 3` bound.

use crate::rational::{int, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundError {
    #[error("N and K must be at least 1 (got N={n}, K={k})")]
    Parameters { n: u32, k: u32 },
    #[error("the capacity formula divides by N-1 and is undefined for N=1")]
    SingleDatabase,
    #[error("storage {alpha} is below the minimum K/N = {minimum}")]
    BelowMinimumStorage { alpha: String, minimum: String },
    #[error("this bound requires N >= 3 (got N={0})")]
    NeedsThreeDatabases(u32),
    #[error("this bound only holds for N=K=2 (got N={n}, K={k})")]
    OnlyTwoByTwo { n: u32, k: u32 },
    #[error("this replay needs K >= 2 (got K={0})")]
    NeedsTwoMessages(u32),
    #[error("at least two samples are required (got {0})")]
    Samples(usize),
    #[error("negative {0} is not a tradeoff point")]
    Negative(&'static str),
}

/// Database count `N` and message count `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PirParameters {
    pub n: u32,
    pub k: u32,
}

impl PirParameters {
    pub fn new(n: u32, k: u32) -> Result<Self, BoundError> {
        if n == 0 || k == 0 {
            return Err(BoundError::Parameters { n, k });
        }
        Ok(PirParameters { n, k })
    }

    fn nr(&self) -> Rational {
        int(self.n as i64)
    }

    fn kr(&self) -> Rational {
        int(self.k as i64)
    }

    /// `N^e` as an exact rational.
    fn n_pow(&self, e: u32) -> Rational {
        Rational::from_integer(BigInt::from(self.n).pow(e))
    }

    /// Smallest feasible per-database storage, `K/N`.
    pub fn min_storage(&self) -> Rational {
        self.kr() / self.nr()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeoffPoint {
    pub alpha: Rational,
    pub beta: Rational,
}

impl TradeoffPoint {
    pub fn new(alpha: Rational, beta: Rational) -> Result<Self, BoundError> {
        if alpha.is_negative() {
            return Err(BoundError::Negative("alpha"));
        }
        if beta.is_negative() {
            return Err(BoundError::Negative("beta"));
        }
        Ok(TradeoffPoint { alpha, beta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    Theorem1,
    Theorem2,
    Theorem3,
    Capacity,
    MinimumStorage,
}

impl fmt::Display for BoundSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundSource::Theorem1 => "theorem1",
            BoundSource::Theorem2 => "theorem2",
            BoundSource::Theorem3 => "theorem3",
            BoundSource::Capacity => "capacity",
            BoundSource::MinimumStorage => "minimum_storage",
        })
    }
}

/// `c_alpha·α + c_beta·β ≥ rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundLine {
    pub c_alpha: Rational,
    pub c_beta: Rational,
    pub rhs: Rational,
    pub source: BoundSource,
}

impl BoundLine {
    fn new(c_alpha: Rational, c_beta: Rational, rhs: Rational, source: BoundSource) -> Self {
        assert!(
            !(c_alpha.is_zero() && c_beta.is_zero()),
            "a bound line needs a nonzero coefficient"
        );
        BoundLine { c_alpha, c_beta, rhs, source }
    }

    pub fn holds(&self, p: &TradeoffPoint) -> bool {
        &self.c_alpha * &p.alpha + &self.c_beta * &p.beta >= self.rhs
    }

    /// Value of the left side minus the right side at `p`.
    pub fn slack(&self, p: &TradeoffPoint) -> Rational {
        &self.c_alpha * &p.alpha + &self.c_beta * &p.beta - &self.rhs
    }

    /// Least α allowed by this line at `beta`, if the line constrains α.
    pub fn alpha_at(&self, beta: &Rational) -> Option<Rational> {
        (!self.c_alpha.is_zero()).then(|| (&self.rhs - &self.c_beta * beta) / &self.c_alpha)
    }

    /// Least β allowed by this line at `alpha`, if the line constrains β.
    pub fn beta_at(&self, alpha: &Rational) -> Option<Rational> {
        (!self.c_beta.is_zero()).then(|| (&self.rhs - &self.c_alpha * alpha) / &self.c_beta)
    }
}

/// Minimum download cost `(N^K − 1) / (N^K (N − 1))`.
pub fn capacity_beta(p: &PirParameters) -> Result<Rational, BoundError> {
    if p.n == 1 {
        return Err(BoundError::SingleDatabase);
    }
    let nk = p.n_pow(p.k);
    Ok((&nk - Rational::one()) / (nk * (p.nr() - Rational::one())))
}

/// `β ≥ capacity`.
pub fn capacity_line(p: &PirParameters) -> Result<BoundLine, BoundError> {
    Ok(BoundLine::new(
        Rational::zero(),
        Rational::one(),
        capacity_beta(p)?,
        BoundSource::Capacity,
    ))
}

/// `N·α ≥ K`, written as `α ≥ K/N`.
pub fn min_storage_line(p: &PirParameters) -> BoundLine {
    BoundLine::new(Rational::one(), Rational::zero(), p.min_storage(), BoundSource::MinimumStorage)
}

/// `(N − 1)α + β ≥ K`.
pub fn theorem1_line(p: &PirParameters) -> BoundLine {
    BoundLine::new(
        p.nr() - Rational::one(),
        Rational::one(),
        p.kr(),
        BoundSource::Theorem1,
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinBeta {
    pub value: Rational,
    pub binding: BoundSource,
    pub theorem1: Rational,
    /// `None` for a single database, where the capacity formula is undefined.
    pub capacity: Option<Rational>,
}

/// Least β at storage `alpha` from Theorem 1 and the capacity floor. When both
/// give the same value the capacity is reported as binding.
pub fn theorem1_min_beta(p: &PirParameters, alpha: &Rational) -> Result<MinBeta, BoundError> {
    let minimum = p.min_storage();
    if *alpha < minimum {
        return Err(BoundError::BelowMinimumStorage {
            alpha: crate::rational::to_string(alpha),
            minimum: crate::rational::to_string(&minimum),
        });
    }
    let t1 = theorem1_line(p).beta_at(alpha).expect("c_beta = 1");
    let cap = if p.n == 1 { None } else { Some(capacity_beta(p)?) };
    let (value, binding) = match &cap {
        Some(c) if *c >= t1 => (c.clone(), BoundSource::Capacity),
        _ => (t1.clone(), BoundSource::Theorem1),
    };
    Ok(MinBeta {
        value,
        binding,
        theorem1: t1,
        capacity: cap,
    })
}

/// Right side of the `N ≥ 3` bound in its stated form,
/// `K/(N − 2) + (N^K − 1)/(N(N − 1))`.
pub fn theorem2_rhs(p: &PirParameters) -> Result<Rational, BoundError> {
    if p.n < 3 {
        return Err(BoundError::NeedsThreeDatabases(p.n));
    }
    let n = p.nr();
    Ok(p.kr() / (&n - int(2)) + (p.n_pow(p.k) - Rational::one()) / (&n * (&n - Rational::one())))
}

/// The `N ≥ 3` bound multiplied through by `N − 2`:
/// `α + ((N − 1) + (N − 2)N^{K−1})β ≥ K + (N − 2)(N^K − 1)/(N(N − 1))`.
pub fn theorem2_line(p: &PirParameters) -> Result<BoundLine, BoundError> {
    let rhs = theorem2_rhs(p)?;
    let n = p.nr();
    let scale = &n - int(2);
    let c_beta = (&n - Rational::one()) + &scale * p.n_pow(p.k - 1);
    Ok(BoundLine::new(Rational::one(), c_beta, rhs * scale, BoundSource::Theorem2))
}

pub fn theorem2_min_alpha(p: &PirParameters, beta: &Rational) -> Result<Rational, BoundError> {
    Ok(theorem2_line(p)?.alpha_at(beta).expect("c_alpha = 1"))
}

/// `3α + 8β ≥ 10`, valid for two databases and two messages.
pub fn theorem3_line(p: &PirParameters) -> Result<BoundLine, BoundError> {
    if (p.n, p.k) != (2, 2) {
        return Err(BoundError::OnlyTwoByTwo { n: p.n, k: p.k });
    }
    Ok(BoundLine::new(int(3), int(8), int(10), BoundSource::Theorem3))
}

/// Every outer bound that applies at `p`.
pub fn applicable_lines(p: &PirParameters) -> Vec<BoundLine> {
    let mut lines = vec![theorem1_line(p), min_storage_line(p)];
    lines.extend(capacity_line(p).ok());
    lines.extend(theorem2_line(p).ok());
    lines.extend(theorem3_line(p).ok());
    lines
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvelopePoint {
    pub point: TradeoffPoint,
    /// Lines attaining the maximum, in [`BoundSource`] order.
    pub binding: Vec<BoundSource>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub params: PirParameters,
    /// Uniform in β from the capacity to `K/N`, both ends included.
    pub points: Vec<EnvelopePoint>,
    /// Minimum-storage segment `α = K/N` for β from `K/N` up to `K`.
    pub vertical: (TradeoffPoint, TradeoffPoint),
}

/// Lower envelope of α over β from all applicable lines.
pub fn outer_envelope(p: &PirParameters, samples: usize) -> Result<Envelope, BoundError> {
    if samples < 2 {
        return Err(BoundError::Samples(samples));
    }
    let lo = capacity_beta(p)?;
    let hi = p.min_storage();
    let lines: Vec<BoundLine> = applicable_lines(p)
        .into_iter()
        .filter(|l| !l.c_alpha.is_zero())
        .collect();
    let steps = int(samples as i64 - 1);
    let mut points = Vec::with_capacity(samples);
    for i in 0..samples {
        let beta = if i + 1 == samples {
            hi.clone()
        } else {
            &lo + (&hi - &lo) * int(i as i64) / &steps
        };
        let mut best: Option<Rational> = None;
        let mut binding = Vec::new();
        for l in &lines {
            let a = l.alpha_at(&beta).expect("filtered on c_alpha");
            match &best {
                Some(b) if a < *b => {}
                Some(b) if a == *b => binding.push(l.source),
                _ => {
                    best = Some(a);
                    binding = vec![l.source];
                }
            }
        }
        binding.sort();
        let alpha = best.expect("minimum storage always applies");
        points.push(EnvelopePoint {
            point: TradeoffPoint { alpha, beta },
            binding,
        });
    }
    let corner = TradeoffPoint {
        alpha: hi.clone(),
        beta: hi.clone(),
    };
    let top = TradeoffPoint {
        alpha: hi,
        beta: p.kr(),
    };
    Ok(Envelope {
        params: *p,
        points,
        vertical: (corner, top),
    })
}

/// Formal indeterminates of the induction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    T(u32),
    V(u32),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::T(k) => write!(f, "T^{k}"),
            Symbol::V(k) => write!(f, "V^{k}"),
        }
    }
}

/// `Σ coef·symbol + constant`, read as `… ≥ 0`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormalForm {
    pub terms: BTreeMap<Symbol, Rational>,
    pub constant: Rational,
}

impl FormalForm {
    fn add(&mut self, s: Symbol, c: Rational) {
        let e = self.terms.entry(s).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&s);
        }
    }

    fn add_scaled(&mut self, other: &FormalForm, c: &Rational) {
        for (s, v) in &other.terms {
            self.add(*s, v * c);
        }
        self.constant += &other.constant * c;
    }

    /// Drops symbols with index `k_max`, which stand for zero.
    fn vanish(mut self, k_max: u32) -> Self {
        self.terms.retain(|s, _| !matches!(s, Symbol::T(k) | Symbol::V(k) if *k == k_max));
        self
    }

    pub fn coef(&self, s: Symbol) -> Rational {
        self.terms.get(&s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn render(&self) -> String {
        let mut out: Vec<String> = self
            .terms
            .iter()
            .map(|(s, c)| format!("{}·{s}", crate::rational::to_string(c)))
            .collect();
        out.push(crate::rational::to_string(&self.constant));
        out.join(" + ")
    }
}

/// The two recursive relations taken as axioms, indexed by `k = 1..K−1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axioms {
    /// `T^k − T^{k+1}/N − 1/N ≥ 0`.
    pub download_step: BTreeMap<u32, FormalForm>,
    /// `V^k/(N−2) + T^k − V^{k+1}/(N−2) − T^{k+1}/N − 1/(N−2) − 1/N ≥ 0`.
    pub joint_step: BTreeMap<u32, FormalForm>,
}

impl Axioms {
    pub fn standard(p: &PirParameters) -> Result<Self, BoundError> {
        check_replay(p)?;
        let n = p.nr();
        let inv_n = Rational::one() / &n;
        let inv_n2 = Rational::one() / (&n - int(2));
        let mut download_step = BTreeMap::new();
        let mut joint_step = BTreeMap::new();
        for k in 1..p.k {
            let mut l1 = FormalForm::default();
            l1.add(Symbol::T(k), Rational::one());
            l1.add(Symbol::T(k + 1), -inv_n.clone());
            l1.constant = -inv_n.clone();
            download_step.insert(k, l1.vanish(p.k));

            let mut l2 = FormalForm::default();
            l2.add(Symbol::V(k), inv_n2.clone());
            l2.add(Symbol::T(k), Rational::one());
            l2.add(Symbol::V(k + 1), -inv_n2.clone());
            l2.add(Symbol::T(k + 1), -inv_n.clone());
            l2.constant = -(&inv_n2 + &inv_n);
            joint_step.insert(k, l2.vanish(p.k));
        }
        Ok(Axioms { download_step, joint_step })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InductionStep {
    pub k: u32,
    /// Multiplier of the download step at `k` (the joint step is used once).
    pub download_multiplier: Rational,
    pub joint_multiplier: Rational,
    /// Claimed `V^k/(N−2) + N^{K−k−1}T^k − rhs(k) ≥ 0`.
    pub claimed: FormalForm,
    pub rhs: Rational,
    /// Claimed form minus the derived combination; empty when the step holds.
    pub residual: FormalForm,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InductionLedger {
    pub params: PirParameters,
    /// From `k = K−1` down to `k = 1`.
    pub steps: Vec<InductionStep>,
    /// `1/(N−2) + N^{K−2} + rhs(1)`.
    pub assembled_rhs: Rational,
    pub theorem2_rhs: Rational,
    pub passed: bool,
    /// First failing `k`, or `None` when the steps hold and only assembly failed.
    pub failed_at: Option<u32>,
}

fn check_replay(p: &PirParameters) -> Result<(), BoundError> {
    if p.n < 3 {
        return Err(BoundError::NeedsThreeDatabases(p.n));
    }
    if p.k < 2 {
        return Err(BoundError::NeedsTwoMessages(p.k));
    }
    Ok(())
}

/// Closed form `rhs(k) = (N^{K−k} − 1)/(N(N − 1)) + (K − k)/(N − 2)`.
pub fn induction_rhs(p: &PirParameters, k: u32) -> Rational {
    let n = p.nr();
    (p.n_pow(p.k - k) - Rational::one()) / (&n * (&n - Rational::one()))
        + int((p.k - k) as i64) / (&n - int(2))
}

fn claimed(p: &PirParameters, k: u32) -> FormalForm {
    let mut f = FormalForm::default();
    f.add(Symbol::V(k), Rational::one() / (p.nr() - int(2)));
    f.add(Symbol::T(k), p.n_pow(p.k - k - 1));
    f.constant = -induction_rhs(p, k);
    f
}

pub fn replay_theorem2_induction(p: &PirParameters) -> Result<InductionLedger, BoundError> {
    replay_theorem2_induction_with(p, &Axioms::standard(p)?)
}

/// Replays the induction from the given axioms; every check is an exact
/// coefficient comparison.
pub fn replay_theorem2_induction_with(
    p: &PirParameters,
    axioms: &Axioms,
) -> Result<InductionLedger, BoundError> {
    check_replay(p)?;
    let mut steps = Vec::new();
    let mut failed_at = None;
    for k in (1..p.k).rev() {
        let mut derived = FormalForm::default();
        let l2 = Rational::one();
        derived.add_scaled(&axioms.joint_step[&k], &l2);
        let l1 = if k == p.k - 1 {
            // Base case: the joint step alone, with T^K = V^K = 0.
            Rational::zero()
        } else {
            p.n_pow(p.k - k - 1) - Rational::one()
        };
        derived.add_scaled(&axioms.download_step[&k], &l1);
        if k < p.k - 1 {
            derived.add_scaled(&claimed(p, k + 1), &Rational::one());
        }
        let claim = claimed(p, k);
        let mut residual = claim.clone();
        residual.add_scaled(&derived, &-Rational::one());
        let holds = residual.terms.is_empty() && residual.constant.is_zero();
        if !holds && failed_at.is_none() {
            failed_at = Some(k);
        }
        steps.push(InductionStep {
            k,
            download_multiplier: l1,
            joint_multiplier: l2,
            rhs: induction_rhs(p, k),
            claimed: claim,
            residual,
            holds,
        });
    }
    let n = p.nr();
    let assembled_rhs =
        Rational::one() / (&n - int(2)) + p.n_pow(p.k - 2) + induction_rhs(p, 1);
    let theorem2_rhs = theorem2_rhs(p)?;
    let passed = failed_at.is_none() && assembled_rhs == theorem2_rhs;
    Ok(InductionLedger {
        params: *p,
        steps,
        assembled_rhs,
        theorem2_rhs,
        passed,
        failed_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn pp(n: u32, k: u32) -> PirParameters {
        PirParameters::new(n, k).unwrap()
    }

    fn six_ten() -> Rational {
        Rational::from_integer(BigInt::from(6u32).pow(10))
    }

    #[test]
    fn capacity_values() {
        assert_eq!(capacity_beta(&pp(2, 2)).unwrap(), ratio(3, 4));
        assert_eq!(capacity_beta(&pp(2, 1)).unwrap(), ratio(1, 2));
        let want = ratio(1, 5) - Rational::one() / (int(5) * six_ten());
        assert_eq!(capacity_beta(&pp(6, 10)).unwrap(), want);
        assert_eq!(capacity_beta(&pp(1, 3)), Err(BoundError::SingleDatabase));
        assert_eq!(capacity_beta(&pp(5, 1)).unwrap(), ratio(1, 5));
    }

    #[test]
    fn theorem1_examples() {
        let r = theorem1_min_beta(&pp(2, 2), &int(1)).unwrap();
        assert_eq!((r.value, r.binding), (int(1), BoundSource::Theorem1));
        let r = theorem1_min_beta(&pp(6, 10), &ratio(10, 6)).unwrap();
        assert_eq!(r.value, ratio(10, 6));
        let r = theorem1_min_beta(&pp(2, 2), &ratio(5, 4)).unwrap();
        assert_eq!(r.theorem1, ratio(3, 4));
        assert_eq!((r.value, r.binding), (ratio(3, 4), BoundSource::Capacity));
        assert!(matches!(
            theorem1_min_beta(&pp(2, 2), &ratio(1, 2)),
            Err(BoundError::BelowMinimumStorage { .. })
        ));
        let single = theorem1_min_beta(&pp(1, 3), &int(3)).unwrap();
        assert_eq!((single.value, single.capacity), (int(3), None));
    }

    #[test]
    fn theorem2_examples() {
        assert_eq!(theorem2_rhs(&pp(3, 2)).unwrap(), ratio(10, 3));
        let p = pp(6, 10);
        let a = theorem2_min_alpha(&p, &capacity_beta(&p).unwrap()).unwrap();
        assert_eq!(a, int(9) + Rational::one() / six_ten());
        assert_eq!(
            theorem2_line(&pp(2, 2)),
            Err(BoundError::NeedsThreeDatabases(2))
        );
    }

    #[test]
    fn corollary2_for_small_parameters() {
        for n in 3..=8 {
            for k in 1..=8 {
                let p = pp(n, k);
                let a = theorem2_min_alpha(&p, &capacity_beta(&p).unwrap()).unwrap();
                let nk = p.n_pow(k);
                assert_eq!(a, p.kr() - (&nk - Rational::one()) / &nk, "N={n} K={k}");
                assert!(a > int(k as i64 - 1));
            }
        }
    }

    #[test]
    fn theorem3_examples() {
        let l = theorem3_line(&pp(2, 2)).unwrap();
        assert_eq!(l.alpha_at(&ratio(3, 4)), Some(ratio(4, 3)));
        assert_eq!(l.beta_at(&int(2)), Some(ratio(1, 2)));
        let r = theorem1_min_beta(&pp(2, 2), &int(2)).unwrap();
        assert_eq!(r.binding, BoundSource::Capacity);
        assert!(l.slack(&TradeoffPoint::new(ratio(4, 3), ratio(3, 4)).unwrap()).is_zero());
        assert!(theorem3_line(&pp(3, 2)).is_err());
    }

    #[test]
    fn envelope_examples() {
        let e = outer_envelope(&pp(2, 2), 5).unwrap();
        assert_eq!(e.points.len(), 5);
        let first = &e.points[0];
        assert_eq!(first.point.beta, ratio(3, 4));
        assert_eq!(first.point.alpha, ratio(4, 3));
        assert_eq!(first.binding, vec![BoundSource::Theorem3]);
        let last = e.points.last().unwrap();
        assert_eq!((last.point.beta.clone(), last.point.alpha.clone()), (int(1), int(1)));
        assert_eq!(last.binding, vec![BoundSource::Theorem1, BoundSource::MinimumStorage]);

        let e = outer_envelope(&pp(6, 10), 11).unwrap();
        let last = e.points.last().unwrap();
        assert_eq!(last.point.alpha, ratio(10, 6));
        for w in e.points.windows(2) {
            assert!(w[0].point.alpha >= w[1].point.alpha);
        }
        assert!(outer_envelope(&pp(2, 2), 1).is_err());
        assert!(outer_envelope(&pp(1, 2), 3).is_err());
    }

    #[test]
    fn induction_examples() {
        let l = replay_theorem2_induction(&pp(3, 2)).unwrap();
        assert!(l.passed);
        assert_eq!(l.steps[0].rhs, ratio(2, 6) + int(1));
        assert_eq!(l.assembled_rhs, ratio(10, 3));
        let l = replay_theorem2_induction(&pp(6, 10)).unwrap();
        assert!(l.passed);
        assert_eq!(l.theorem2_rhs, ratio(10, 4) + (six_ten() - Rational::one()) / int(30));
        assert!(replay_theorem2_induction(&pp(2, 3)).is_err());
    }

    #[test]
    fn perturbed_axiom_is_caught() {
        let p = pp(3, 2);
        let mut ax = Axioms::standard(&p).unwrap();
        ax.joint_step.get_mut(&1).unwrap().add(Symbol::T(1), ratio(1, 7));
        let l = replay_theorem2_induction_with(&p, &ax).unwrap();
        assert!(!l.passed);
        assert_eq!(l.failed_at, Some(1));
        assert_eq!(l.steps[0].residual.coef(Symbol::T(1)), ratio(-1, 7));

        let p = pp(4, 5);
        let mut ax = Axioms::standard(&p).unwrap();
        ax.download_step.get_mut(&2).unwrap().constant += Rational::one();
        let l = replay_theorem2_induction_with(&p, &ax).unwrap();
        assert_eq!(l.failed_at, Some(2));
    }
}
