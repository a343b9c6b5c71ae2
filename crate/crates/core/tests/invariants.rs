use miplab::measures::{
    bregman_mi, f_divergence, f_mutual_information, proper_score, shannon_mi, ConvexGenerator, ExtendedReal,
    ScoringRule,
};
use miplab::schema::JointFile;
use miplab::{Distribution, JointDistribution, TransitionMatrix};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn weights(len: usize, allow_zero: bool) -> impl Strategy<Value = Vec<f64>> {
    let cell = if allow_zero { prop_oneof![1 => Just(0.0), 4 => 0.01f64..1.0].boxed() } else { (0.01f64..1.0).boxed() };
    prop::collection::vec(cell, len).prop_filter("some mass", |w| w.iter().sum::<f64>() > 0.0)
}

fn dist(m: usize) -> impl Strategy<Value = Distribution> {
    weights(m, false).prop_map(|w| Distribution::new(w).unwrap())
}

fn sparse_dist(m: usize) -> impl Strategy<Value = Distribution> {
    weights(m, true).prop_map(|w| Distribution::new(w).unwrap())
}

fn joint(rows: usize, cols: usize) -> impl Strategy<Value = JointDistribution> {
    weights(rows * cols, true).prop_map(move |w| JointDistribution::from_counts(rows, cols, &w).unwrap())
}

fn channel(rows: usize, cols: usize) -> impl Strategy<Value = TransitionMatrix> {
    prop::collection::vec(sparse_dist(cols), rows)
        .prop_map(|rs| TransitionMatrix::new(rs.into_iter().map(|d| d.weights().to_vec()).collect()).unwrap())
}

fn generator() -> impl Strategy<Value = ConvexGenerator> {
    prop::sample::select(ConvexGenerator::ALL.to_vec())
}

fn rule() -> impl Strategy<Value = ScoringRule> {
    prop::sample::select(ScoringRule::ALL.to_vec())
}

fn le(a: ExtendedReal, b: ExtendedReal) -> bool {
    match (a, b) {
        (_, ExtendedReal::Infinite) => true,
        (ExtendedReal::Infinite, _) => false,
        (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => x <= y + TOL,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn divergence_is_nonnegative_and_zero_on_diagonal(
        (p, q) in (2usize..=5).prop_flat_map(|m| (sparse_dist(m), sparse_dist(m))),
        f in generator(),
    ) {
        prop_assert!(le(ExtendedReal::Finite(0.0), f_divergence(&p, &q, f).unwrap()));
        prop_assert!(f_divergence(&p, &p, f).unwrap().value().abs() <= TOL);
    }

    #[test]
    fn divergence_is_jointly_convex(
        (p1, q1, p2, q2) in (2usize..=4).prop_flat_map(|m| (dist(m), dist(m), dist(m), dist(m))),
        lambda in 0.0f64..=1.0,
        f in generator(),
    ) {
        let d = |p: &Distribution, q: &Distribution| f_divergence(p, q, f).unwrap().value();
        let mixed = d(&p1.mix(lambda, &p2).unwrap(), &q1.mix(lambda, &q2).unwrap());
        prop_assert!(mixed <= lambda * d(&p1, &q1) + (1.0 - lambda) * d(&p2, &q2) + TOL);
    }

    #[test]
    fn divergence_is_monotone_under_channels(
        (p, q, w) in (2usize..=4, 2usize..=4).prop_flat_map(|(m, k)| (sparse_dist(m), sparse_dist(m), channel(m, k))),
        f in generator(),
    ) {
        let before = f_divergence(&p, &q, f).unwrap();
        let after = f_divergence(&p.apply_channel(&w).unwrap(), &q.apply_channel(&w).unwrap(), f).unwrap();
        prop_assert!(le(after, before));
    }

    #[test]
    fn f_information_is_symmetric(
        u in (2usize..=4, 2usize..=4).prop_flat_map(|(r, c)| joint(r, c)),
        f in generator(),
    ) {
        let a = f_mutual_information(&u, f).unwrap();
        let b = f_mutual_information(&u.transpose().unwrap(), f).unwrap();
        match (a, b) {
            (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => prop_assert!((x - y).abs() <= TOL),
            (x, y) => prop_assert_eq!(x, y),
        }
    }

    #[test]
    fn log_score_information_is_shannon_information(u in (2usize..=4, 2usize..=4).prop_flat_map(|(r, c)| joint(r, c))) {
        let shannon = shannon_mi(&u).unwrap();
        prop_assert!((bregman_mi(&u, ScoringRule::Log).unwrap().value() - shannon).abs() <= TOL);
        prop_assert!((f_mutual_information(&u, ConvexGenerator::Kl).unwrap().value() - shannon).abs() <= TOL);
    }

    #[test]
    fn information_drops_when_the_first_signal_is_garbled(
        (u, w) in (2usize..=4, 2usize..=4, 2usize..=4).prop_flat_map(|(r, c, k)| (joint(r, c), channel(r, k))),
        rule in rule(),
        f in generator(),
    ) {
        let garbled = u.push_first(&w).unwrap();
        prop_assert!(le(bregman_mi(&garbled, rule).unwrap(), bregman_mi(&u, rule).unwrap()));
        prop_assert!(le(f_mutual_information(&garbled, f).unwrap(), f_mutual_information(&u, f).unwrap()));
    }

    #[test]
    fn truthful_forecasts_maximize_expected_score(
        (p, q) in (2usize..=5).prop_flat_map(|m| (sparse_dist(m), dist(m))),
        rule in rule(),
    ) {
        let truth: f64 = (0..p.len()).filter(|&s| p.get(s) > 0.0).map(|s| p.get(s) * proper_score(s, &p, rule).unwrap()).sum();
        let other = rule.expected(p.weights(), q.weights()).unwrap();
        prop_assert!(other <= truth + TOL);
    }

    #[test]
    fn pushing_forward_keeps_mass_and_second_marginal(
        (u, w) in (2usize..=4, 2usize..=4, 2usize..=4).prop_flat_map(|(r, c, k)| (joint(r, c), channel(r, k))),
    ) {
        let pushed = u.push_first(&w).unwrap();
        prop_assert!((pushed.total_mass() - 1.0).abs() <= 1e-12);
        let (p, q) = u.marginals().unwrap();
        let (p2, q2) = pushed.marginals().unwrap();
        for s in 0..q.len() {
            prop_assert!((q.get(s) - q2.get(s)).abs() <= 1e-12);
        }
        let expected = p.apply_channel(&w).unwrap();
        for s in 0..expected.len() {
            prop_assert!((expected.get(s) - p2.get(s)).abs() <= 1e-12);
        }
    }

    #[test]
    fn channels_preserve_mass((p, w) in (2usize..=5, 2usize..=5).prop_flat_map(|(m, k)| (sparse_dist(m), channel(m, k)))) {
        let out = p.apply_channel(&w).unwrap();
        prop_assert!((out.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(out.weights().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn permutation_composed_with_inverse_is_identity(perm in (1usize..=6).prop_flat_map(|m| Just((0..m).collect::<Vec<_>>()).prop_shuffle())) {
        let pi = TransitionMatrix::permutation(&perm).unwrap();
        let inv = pi.inverse_permutation().unwrap();
        prop_assert!(pi.then(&inv).unwrap().is_identity());
        prop_assert!(inv.then(&pi).unwrap().is_identity());
    }

    #[test]
    fn joint_files_round_trip_bit_exactly(u in (2usize..=4, 2usize..=4).prop_flat_map(|(r, c)| joint(r, c))) {
        let text = serde_json::to_string(&JointFile::new(u.clone())).unwrap();
        let back = JointFile::from_json(&text).unwrap();
        prop_assert_eq!(back.joint.data(), u.data());
    }
}
