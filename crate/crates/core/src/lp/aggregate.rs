//! Coordinate aggregation presolve.
//!
//! Coordinates tied by a tagged equality `c·(H(A) − H(B)) = 0` share one LP
//! variable. When the program carries every elemental inequality, a tie
//! between nested sets `Q ⊂ P` is a functional dependence, so every `T ⊇ Q`
//! is also tied to `T ∪ P`. Certificates of the aggregated program are lifted
//! back by routing the per-class residual along the merge forest and
//! expanding each derived tie into its reason tie plus elemental inequalities.

use super::{DualCertificate, LinearProgram, LpError, Solution, TagRef};
use crate::entropy::{
    conditional_entropy_mask, elemental_count, mutual_information_mask, Constraint, LinearForm,
    Sense,
};
use crate::rational::Rational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

/// Aggregation is skipped above this many variables (dense coordinate tables).
const MAX_VARIABLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Elemental {
    /// `H(X_i | rest)`.
    Single(u32),
    /// `I(X_i; X_j | K)` with `i < j`.
    Pair(u32, u32, u32),
}

#[derive(Debug, Clone)]
enum Reason {
    /// The constraint form is `scale · (H(a) − H(b))`.
    Tagged { constraint: usize, scale: Rational },
    /// `a = b ∪ (p ∖ q)`, `q ⊆ b`, with `p` and `q` already tied.
    Derived { p: u32, q: u32 },
}

#[derive(Debug, Clone)]
struct Edge {
    a: u32,
    b: u32,
    reason: Reason,
}

pub(crate) struct Aggregation {
    full: u32,
    parent: Vec<u32>,
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    elementals: HashMap<Elemental, usize>,
    pub reduced: LinearProgram,
    /// Original index of each reduced constraint.
    pub kept: Vec<usize>,
}

fn bits(mask: u32) -> impl Iterator<Item = u32> {
    (0..32).filter(move |i| mask >> i & 1 == 1)
}

impl Aggregation {
    /// Returns `None` when nothing can be merged.
    pub fn build(p: &LinearProgram) -> Option<Aggregation> {
        let n = p.ground().len();
        if n > MAX_VARIABLES || n < 2 {
            return None;
        }
        let full = p.ground().full_mask();
        let mut agg = Aggregation {
            full,
            parent: (0..=full).collect(),
            edges: Vec::new(),
            adj: vec![Vec::new(); full as usize + 1],
            elementals: HashMap::new(),
            reduced: LinearProgram::new(p.ground().clone(), p.scalars().to_vec(), LinearForm::zero())
                .expect("scalars already validated"),
            kept: Vec::new(),
        };
        for (ci, c) in p.constraints().iter().enumerate() {
            if let Some((a, b, scale)) = tie(c) {
                agg.union(a, b, Reason::Tagged { constraint: ci, scale });
            }
            if let Some(key) = elemental_key(c, full) {
                agg.elementals.entry(key).or_insert(ci);
            }
        }
        if agg.elementals.len() == elemental_count(n) {
            agg.close_dependences();
        }
        if agg.edges.is_empty() {
            return None;
        }
        agg.build_reduced(p);
        Some(agg)
    }

    fn find(&mut self, x: u32) -> u32 {
        let mut r = x;
        while self.parent[r as usize] != r {
            r = self.parent[r as usize];
        }
        let mut x = x;
        while self.parent[x as usize] != r {
            let next = self.parent[x as usize];
            self.parent[x as usize] = r;
            x = next;
        }
        r
    }

    pub fn rep(&self, x: u32) -> u32 {
        let mut r = x;
        while self.parent[r as usize] != r {
            r = self.parent[r as usize];
        }
        r
    }

    fn union(&mut self, a: u32, b: u32, reason: Reason) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // The smallest mask represents its class.
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        let id = self.edges.len();
        self.edges.push(Edge { a, b, reason });
        self.adj[a as usize].push(id);
        self.adj[b as usize].push(id);
        true
    }

    /// Applies every functional dependence `q → p ∖ q` found inside a class
    /// until no new ties appear.
    fn close_dependences(&mut self) {
        let mut applied: HashMap<u32, u32> = HashMap::new();
        loop {
            let mut classes: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
            for x in 1..=self.full {
                let r = self.find(x);
                classes.entry(r).or_default().push(x);
            }
            let mut changed = false;
            for members in classes.values().filter(|m| m.len() > 1) {
                for &q in members {
                    for &p in members {
                        if p & q != q || p == q {
                            continue;
                        }
                        let d0 = p & !q;
                        let done = applied.entry(q).or_insert(0);
                        if d0 & !*done == 0 {
                            continue;
                        }
                        *done |= d0;
                        let rest = self.full & !q;
                        let mut s = 0u32;
                        loop {
                            let t = q | s;
                            if t & d0 != d0 && self.union(t | d0, t, Reason::Derived { p, q }) {
                                changed = true;
                            }
                            if s == rest {
                                break;
                            }
                            s = s.wrapping_sub(rest) & rest;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn map_form(&self, f: &LinearForm) -> LinearForm {
        let mut out = LinearForm::constant_form(f.constant().clone());
        for (s, v) in f.entropy_terms() {
            out.add_entropy(self.rep(s.mask()), v.clone());
        }
        for (name, v) in f.scalar_terms() {
            out.add_scalar(name, v.clone());
        }
        out
    }

    fn build_reduced(&mut self, p: &LinearProgram) {
        let mut reduced =
            LinearProgram::new(p.ground().clone(), p.scalars().to_vec(), self.map_form(p.objective()))
                .expect("objective already validated");
        let mut seen: HashSet<(Sense, LinearForm)> = HashSet::new();
        let mut kept = Vec::new();
        for (ci, c) in p.constraints().iter().enumerate() {
            let form = self.map_form(&c.form);
            if form.entropy_terms().is_empty() && form.scalar_terms().is_empty() {
                let k = form.constant();
                let holds = match c.sense {
                    Sense::NonNegative => !k.is_negative(),
                    Sense::Zero => k.is_zero(),
                };
                if holds {
                    continue;
                }
            }
            if !seen.insert((c.sense, form.clone())) {
                continue;
            }
            reduced
                .add_constraint(Constraint::new(form, c.sense, c.tag.clone()))
                .expect("tags and references carry over");
            kept.push(ci);
        }
        self.reduced = reduced;
        self.kept = kept;
    }

    pub fn class_count(&self) -> usize {
        (1..=self.full).filter(|&x| self.rep(x) == x).count()
    }

    /// Reduced-program view of a solution of the original program.
    pub fn project_solution(&self, s: &Solution) -> Solution {
        Solution {
            duals: self.kept.iter().map(|&ci| s.duals[ci]).collect(),
            ..s.clone()
        }
    }

    /// Original-program view of a solution of the reduced program.
    pub fn lift_solution(&self, p: &LinearProgram, mut s: Solution) -> Solution {
        let entropy: Vec<f64> = (1..=self.full)
            .map(|x| s.primal.entropy[self.rep(x) as usize - 1])
            .collect();
        s.primal.entropy = entropy;
        let mut duals = vec![0.0; p.constraints().len()];
        for (k, &ci) in self.kept.iter().enumerate() {
            duals[ci] = s.duals[k];
        }
        s.duals = duals;
        s
    }

    /// Turns a certificate of the reduced program into one of `p`.
    pub fn lift_certificate(
        &self,
        p: &LinearProgram,
        rc: &DualCertificate,
    ) -> Result<DualCertificate, LpError> {
        let fail = |reason: String| LpError::Rationalization {
            reason,
            float_duals: Vec::new(),
        };
        let mut cons: BTreeMap<usize, Rational> = BTreeMap::new();
        let mut bounds: BTreeMap<u32, Rational> = BTreeMap::new();
        let mut residual = p.objective().clone();
        residual.add_constant(-rc.certified_bound.clone());
        for (tag, w) in &rc.weights {
            match p.resolve_tag(tag) {
                Some(TagRef::Constraint(i)) => {
                    residual.add_scaled(&p.constraints()[i].form, &-w.clone());
                    *cons.entry(i).or_insert_with(Rational::zero) += w;
                }
                Some(TagRef::Bound(s)) => {
                    residual.add_entropy(s.mask(), -w.clone());
                    *bounds.entry(s.mask()).or_insert_with(Rational::zero) += w;
                }
                None => return Err(LpError::UnknownTag(tag.clone())),
            }
        }
        if !residual.scalar_terms().is_empty() || !residual.constant().is_zero() {
            return Err(fail("reduced certificate leaves a scalar or constant residual".into()));
        }
        let mut r = vec![Rational::zero(); self.full as usize + 1];
        for (s, v) in residual.entropy_terms() {
            r[s.mask() as usize] = v.clone();
        }
        let mut w = self.route_residual(&r).ok_or_else(|| {
            fail("residual does not balance within a merged class".into())
        })?;

        let mut elem: HashMap<Elemental, Rational> = HashMap::new();
        for id in (0..self.edges.len()).rev() {
            let weight = std::mem::take(&mut w[id]);
            if weight.is_zero() {
                continue;
            }
            let e = &self.edges[id];
            match &e.reason {
                Reason::Tagged { constraint, scale } => {
                    *cons.entry(*constraint).or_insert_with(Rational::zero) += &weight / scale;
                }
                Reason::Derived { p: pm, q } => {
                    let d = e.a & !e.b;
                    if weight.is_positive() {
                        self.cond_entropy(d, e.b, &weight, &mut elem);
                    } else {
                        // weight·e = |weight|·(f − e) − |weight|·f with f = H(p) − H(q).
                        let big = -weight;
                        let d0 = pm & !q;
                        let t = e.b;
                        self.cond_entropy(d0 & t, *q, &big, &mut elem);
                        self.mutual_information(d, t & !pm, *q | (d0 & t), &big, &mut elem);
                        self.route_path(*pm, *q, &-big, id, &mut w)
                            .ok_or_else(|| fail(format!("no earlier path for derived tie {id}")))?;
                    }
                }
            }
        }
        for (key, v) in elem {
            let ci = self.elementals[&key];
            *cons.entry(ci).or_insert_with(Rational::zero) += v;
        }
        let mut weights: Vec<(String, Rational)> = cons
            .into_iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(ci, v)| (p.constraints()[ci].tag.clone(), v))
            .collect();
        weights.extend(
            bounds
                .into_iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|(m, v)| (p.bound_tag(crate::entropy::SubsetId::new(m).unwrap()), v)),
        );
        Ok(DualCertificate {
            weights,
            certified_bound: rc.certified_bound.clone(),
        })
    }

    /// Edge weights `w` with `Σ w_e (H(a_e) − H(b_e)) = r` over the forest.
    fn route_residual(&self, r: &[Rational]) -> Option<Vec<Rational>> {
        let mut w = vec![Rational::zero(); self.edges.len()];
        let mut visited = vec![false; self.full as usize + 1];
        for root in 1..=self.full {
            if visited[root as usize] || self.rep(root) != root {
                continue;
            }
            // Iterative DFS recording (node, edge to parent) in preorder.
            let mut order: Vec<(u32, Option<usize>)> = Vec::new();
            let mut stack = vec![(root, None)];
            visited[root as usize] = true;
            while let Some((x, via)) = stack.pop() {
                order.push((x, via));
                for &id in &self.adj[x as usize] {
                    let e = &self.edges[id];
                    let y = if e.a == x { e.b } else { e.a };
                    if !visited[y as usize] {
                        visited[y as usize] = true;
                        stack.push((y, Some(id)));
                    }
                }
            }
            let mut sub: HashMap<u32, Rational> = HashMap::new();
            for &(x, _) in &order {
                sub.insert(x, r[x as usize].clone());
            }
            for &(x, via) in order.iter().rev() {
                let total = sub[&x].clone();
                match via {
                    Some(id) => {
                        let e = &self.edges[id];
                        let parent = if e.a == x { e.b } else { e.a };
                        w[id] = if e.a == x { total.clone() } else { -total.clone() };
                        *sub.get_mut(&parent).unwrap() += total;
                    }
                    None => {
                        if !total.is_zero() {
                            return None;
                        }
                    }
                }
            }
        }
        Some(w)
    }

    /// Adds `amount · (H(from) − H(to))` along the forest path that uses only
    /// edges created before `limit`.
    fn route_path(
        &self,
        from: u32,
        to: u32,
        amount: &Rational,
        limit: usize,
        w: &mut [Rational],
    ) -> Option<()> {
        let mut prev: HashMap<u32, usize> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = HashSet::from([from]);
        while let Some(x) = queue.pop_front() {
            if x == to {
                break;
            }
            for &id in &self.adj[x as usize] {
                if id >= limit {
                    continue;
                }
                let e = &self.edges[id];
                let y = if e.a == x { e.b } else { e.a };
                if seen.insert(y) {
                    prev.insert(y, id);
                    queue.push_back(y);
                }
            }
        }
        if !seen.contains(&to) {
            return None;
        }
        // Walking back from `to`: each step x ← y contributes H(y) − H(x).
        let mut x = to;
        while x != from {
            let id = prev[&x];
            let e = &self.edges[id];
            let y = if e.a == x { e.b } else { e.a };
            if e.a == y {
                w[id] += amount;
            } else {
                w[id] -= amount;
            }
            x = y;
        }
        Some(())
    }

    /// `coef · H(A | B)` as elemental weights, `A ∩ B = ∅`.
    fn cond_entropy(&self, a: u32, b: u32, coef: &Rational, out: &mut HashMap<Elemental, Rational>) {
        let mut cond = b;
        for i in bits(a) {
            let rest = self.full & !(1 << i);
            *out.entry(Elemental::Single(i)).or_insert_with(Rational::zero) += coef;
            self.mutual_information(1 << i, rest & !cond, cond, coef, out);
            cond |= 1 << i;
        }
    }

    /// `coef · I(A; C | B)` as elemental weights, pairwise disjoint sets.
    fn mutual_information(
        &self,
        a: u32,
        c: u32,
        b: u32,
        coef: &Rational,
        out: &mut HashMap<Elemental, Rational>,
    ) {
        let mut before_a = 0u32;
        for i in bits(a) {
            let mut before_c = 0u32;
            for j in bits(c) {
                let k = b | before_a | before_c;
                let key = Elemental::Pair(i.min(j), i.max(j), k);
                *out.entry(key).or_insert_with(Rational::zero) += coef;
                before_c |= 1 << j;
            }
            before_a |= 1 << i;
        }
    }
}

/// `(a, b, scale)` when the constraint reads `scale · (H(a) − H(b)) = 0`.
fn tie(c: &Constraint) -> Option<(u32, u32, Rational)> {
    if c.sense != Sense::Zero || !c.form.scalar_terms().is_empty() || !c.form.constant().is_zero() {
        return None;
    }
    let terms: Vec<_> = c.form.entropy_terms().iter().collect();
    let [(s1, v1), (s2, v2)] = terms[..] else {
        return None;
    };
    if *v1 != -v2.clone() {
        return None;
    }
    if v1.is_positive() {
        Some((s1.mask(), s2.mask(), v1.clone()))
    } else {
        Some((s2.mask(), s1.mask(), v2.clone()))
    }
}

fn elemental_key(c: &Constraint, full: u32) -> Option<Elemental> {
    if c.sense != Sense::NonNegative || !c.form.scalar_terms().is_empty() || !c.form.constant().is_zero() {
        return None;
    }
    let one = Rational::one();
    let plus: Vec<u32> = c
        .form
        .entropy_terms()
        .iter()
        .filter(|(_, v)| **v == one)
        .map(|(s, _)| s.mask())
        .collect();
    match (c.form.term_count(), plus.as_slice()) {
        (2, &[top]) if top == full => {
            let minus = c.form.entropy_terms().keys().find(|s| s.mask() != full)?.mask();
            let bit = full & !minus;
            (bit.count_ones() == 1 && c.form == conditional_entropy_mask(bit, minus))
                .then(|| Elemental::Single(bit.trailing_zeros()))
        }
        (3 | 4, &[x, y]) => {
            let k = x & y;
            let (i, j) = (x & !k, y & !k);
            if i.count_ones() != 1 || j.count_ones() != 1 {
                return None;
            }
            (c.form == mutual_information_mask(i, j, k)).then(|| {
                let (i, j) = (i.trailing_zeros(), j.trailing_zeros());
                Elemental::Pair(i.min(j), i.max(j), k)
            })
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{elemental_inequalities, GroundSet};
    use crate::lp::{extract_certificate, solve_min, verify_certificate};
    use crate::rational::int;

    /// `min H(B)` with `H(A) = 1` and `B` a function of `A` that determines `A`.
    fn dependent_pair() -> LinearProgram {
        let g = GroundSet::new(["A", "B", "C"]).unwrap();
        let mut p = LinearProgram::new(g.clone(), vec![], LinearForm::entropy(0b110, int(1))).unwrap();
        p.extend(elemental_inequalities(&g).unwrap()).unwrap();
        let mut f = LinearForm::entropy(0b001, int(1));
        f.add_constant(int(-1));
        p.add_constraint(Constraint::eq(f, "H(A)=1")).unwrap();
        p.add_constraint(Constraint::eq(conditional_entropy_mask(0b010, 0b001), "H(B|A)=0"))
            .unwrap();
        p.add_constraint(Constraint::eq(conditional_entropy_mask(0b001, 0b010), "H(A|B)=0"))
            .unwrap();
        p
    }

    #[test]
    fn merges_and_lifts() {
        let p = dependent_pair();
        let agg = Aggregation::build(&p).unwrap();
        // A ~ AB ~ B, AC ~ ABC ~ BC, C alone.
        assert_eq!(agg.class_count(), 3);
        assert!(agg.reduced.constraints().len() < p.constraints().len());
        let s = solve_min(&p).unwrap();
        assert!((s.objective_value - 1.0).abs() < 1e-9);
        let c = extract_certificate(&p, &s).unwrap();
        assert_eq!(c.certified_bound, int(1));
        assert!(verify_certificate(&p, &c).unwrap().valid);
    }

    #[test]
    fn elemental_keys_cover_the_generated_set() {
        let g = GroundSet::new(["A", "B", "C", "D"]).unwrap();
        let keys: HashSet<Elemental> = elemental_inequalities(&g)
            .unwrap()
            .iter()
            .filter_map(|c| elemental_key(c, g.full_mask()))
            .collect();
        assert_eq!(keys.len(), elemental_count(4));
    }

    #[test]
    fn expansions_reproduce_their_forms() {
        let g = GroundSet::new(["A", "B", "C", "D"]).unwrap();
        let mut p = LinearProgram::new(g.clone(), vec![], LinearForm::zero()).unwrap();
        p.extend(elemental_inequalities(&g).unwrap()).unwrap();
        p.add_constraint(Constraint::eq(conditional_entropy_mask(0b0010, 0b0001), "t")).unwrap();
        let agg = Aggregation::build(&p).unwrap();
        let expand = |out: &HashMap<Elemental, Rational>| {
            let mut f = LinearForm::zero();
            for (k, v) in out {
                f.add_scaled(&p.constraints()[agg.elementals[k]].form, v);
            }
            f
        };
        let mut out = HashMap::new();
        agg.cond_entropy(0b1010, 0b0001, &int(2), &mut out);
        let mut want = conditional_entropy_mask(0b1010, 0b0001);
        want = want.clone() + want;
        assert_eq!(expand(&out), want);
        let mut out = HashMap::new();
        agg.mutual_information(0b0011, 0b1000, 0b0100, &int(1), &mut out);
        assert_eq!(expand(&out), mutual_information_mask(0b0011, 0b1000, 0b0100));
    }
}
