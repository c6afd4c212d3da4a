use pirsd_core::entropy::{
    elemental_count, elemental_inequalities, entropy_vector_from_distribution, evaluate_f64,
};
use pirsd_core::rational::ratio;
use pirsd_core::scheme::{builtin_download_all, builtin_xor2, check_bounds, measure_costs, relabel_messages, verify};
use pirsd_core::{GroundSet, JointDistribution};
use proptest::prelude::*;
use std::collections::BTreeMap;

const NAMES: [&str; 4] = ["A", "B", "C", "D"];

/// Alphabet sizes plus one integer weight per outcome.
fn distribution() -> impl Strategy<Value = JointDistribution> {
    prop::collection::vec(1u32..=3, 1..=4)
        .prop_flat_map(|alphabet| {
            let outcomes: usize = alphabet.iter().map(|&a| a as usize).product();
            (Just(alphabet), prop::collection::vec(0u32..6, outcomes))
        })
        .prop_filter("some mass", |(_, w)| w.iter().any(|&x| x > 0))
        .prop_map(|(alphabet, weights)| {
            let total: u32 = weights.iter().sum();
            let mut table = BTreeMap::new();
            for (i, &w) in weights.iter().enumerate() {
                let mut rest = i;
                let outcome: Vec<u32> = alphabet
                    .iter()
                    .map(|&a| {
                        let x = (rest % a as usize) as u32;
                        rest /= a as usize;
                        x
                    })
                    .collect();
                table.insert(outcome, ratio(w as i64, total as i64));
            }
            let ground = GroundSet::new(NAMES[..alphabet.len()].iter().copied()).unwrap();
            JointDistribution::new(ground, alphabet, table).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distributions_are_polymatroids(d in distribution()) {
        let v = entropy_vector_from_distribution(&d);
        let values = v.to_f64();
        for c in elemental_inequalities(d.ground()).unwrap() {
            let lhs = evaluate_f64(&c.form, &values, &BTreeMap::new()).unwrap();
            prop_assert!(c.holds_f64(lhs, 1e-9), "{} = {lhs}", c.tag);
        }
        let top = values[values.len() - 1];
        let max_bits: f64 = d.alphabet().iter().map(|&a| (a as f64).log2()).sum();
        prop_assert!(top <= max_bits + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn relabeling_keeps_xor2_correct_and_costs_fixed(
        perm in Just((0..4usize).collect::<Vec<_>>()).prop_shuffle(),
        k in 2u32..=4,
    ) {
        let s = builtin_xor2(k, 1).unwrap();
        let perm: Vec<usize> = perm.into_iter().filter(|&p| p < k as usize).collect();
        let t = relabel_messages(&s, &perm).unwrap();
        let (a, b) = (verify(&s).unwrap(), verify(&t).unwrap());
        prop_assert!(b.passed());
        prop_assert_eq!(&a.costs.alpha, &b.costs.alpha);
        prop_assert_eq!(&a.costs.beta, &b.costs.beta);
        prop_assert_eq!(&a.costs.beta_prime, &b.costs.beta_prime);
    }
}

#[test]
fn elemental_counts_match_a_direct_count() {
    for n in 1..=12usize {
        let g = GroundSet::new((0..n).map(|i| format!("V{i}"))).unwrap();
        let all = elemental_inequalities(&g).unwrap();
        // n conditional entropies, and for each pair one inequality per
        // subset of the other n−2 variables.
        let direct = n + if n >= 2 { n * (n - 1) / 2 * (1 << (n - 2)) } else { 0 };
        assert_eq!(all.len(), direct, "n = {n}");
        assert_eq!(elemental_count(n), direct);
        let mut tags: Vec<&str> = all.iter().map(|c| c.tag.as_str()).collect();
        tags.sort_unstable();
        tags.dedup();
        assert_eq!(tags.len(), direct);
    }
}

#[test]
fn builtin_costs_obey_the_invariants_and_bounds() {
    let mut schemes = Vec::new();
    for (n, k, l) in [(2, 1, 2), (2, 2, 1), (3, 2, 3), (4, 2, 2), (3, 3, 1), (6, 10, 3)] {
        schemes.push(builtin_download_all(n, k, l, 2).unwrap());
    }
    for (n, k, l) in [(2, 2, 1), (3, 3, 1)] {
        schemes.push(builtin_download_all(n, k, l, 3).unwrap());
    }
    for k in 1..=4 {
        schemes.push(builtin_xor2(k, 1).unwrap());
    }
    schemes.push(builtin_xor2(2, 2).unwrap());
    for s in &schemes {
        let r = verify(s).unwrap();
        assert!(r.passed(), "{}", s.name);
        for d in &r.costs.per_database {
            assert!(d.alpha.ge(&d.alpha_prime), "{}", s.name);
            assert!(d.beta.ge(&d.beta_prime), "{}", s.name);
            assert!(d.beta_by_k.iter().all(|b| b.same(&d.beta)), "{}", s.name);
        }
        let checks = check_bounds(s, &measure_costs(s).unwrap()).unwrap();
        assert!(checks.iter().all(|c| c.satisfied), "{}", s.name);
    }
}
