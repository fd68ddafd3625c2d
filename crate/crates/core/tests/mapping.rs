use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use citemap::keywords::{
    cluster_term_frequencies, cluster_tfidf, colocation_order, colocation_similarity, keyword_frequency,
    keyword_overlay, rank_keywords,
};
use citemap::mapping::{
    auto_bandwidth, conditional_probabilities, joint_probabilities, mean_shift, shift_trajectory, tsne_embed,
    BandwidthReading, ClusterLabeling, Embedding, MeanShiftConfig, Point, TsneConfig,
};
use citemap::matrix::{MatrixKind, PairwiseMatrix};
use citemap::{Exec, PaperId};

fn ids(n: usize) -> Vec<PaperId> {
    (0..n).map(|i| PaperId(i.to_string())).collect()
}

fn euclidean(points: &[Point]) -> PairwiseMatrix {
    let n = points.len();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            v[i * n + j] = ((points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2)).sqrt();
        }
    }
    PairwiseMatrix::new(ids(n), v, MatrixKind::Distance).unwrap()
}

fn cloud(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)]).collect()
}

fn strings(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn labeling(labels: Vec<usize>) -> ClusterLabeling {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    ClusterLabeling { labels, modes: vec![[0.0, 0.0]; k], bandwidth: 1.0 }
}

fn random_docs(rng: &mut ChaCha8Rng, n: usize, vocab: usize) -> Vec<Vec<String>> {
    (0..n)
        .map(|_| {
            let mut d: Vec<String> = (0..rng.random_range(0..6)).map(|_| format!("k{}", rng.random_range(0..vocab))).collect();
            d.sort();
            d.dedup();
            d
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn joint_probabilities_form_a_symmetric_distribution(n in 5usize..40, seed in any::<u64>(), frac in 0.1f64..0.9) {
        let d = euclidean(&cloud(n, seed));
        let perp = 1.0 + frac * (n as f64 - 2.0);
        let cond = conditional_probabilities(&d, perp, Exec::Sequential).unwrap();
        for i in 0..n {
            let row: f64 = cond[i * n..(i + 1) * n].iter().sum();
            prop_assert!((row - 1.0).abs() < 1e-12);
            prop_assert_eq!(cond[i * n + i], 0.0);
        }
        let p = joint_probabilities(&cond, n);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(p[i * n + j], p[j * n + i]);
                prop_assert!(p[i * n + j] >= 0.0);
            }
        }
    }

    #[test]
    fn term_frequencies_sum_to_one(seed in any::<u64>(), n in 1usize..60, k in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = random_docs(&mut rng, n, 12);
        let labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
        let k = labels.iter().max().unwrap() + 1;
        let refs: Vec<&[String]> = docs.iter().map(|d| d.as_slice()).collect();
        let tf = cluster_term_frequencies(&labeling(labels), &refs);
        prop_assert_eq!(tf.len(), k);
        for t in tf {
            if !t.is_empty() {
                prop_assert!((t.values().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn raising_min_occ_only_removes_keywords(seed in any::<u64>(), n in 1usize..80, lo in 1usize..4, extra in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = random_docs(&mut rng, n, 15);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let lab = labeling(labels);
        let refs: Vec<&[String]> = docs.iter().map(|d| d.as_slice()).collect();
        let a = cluster_tfidf(&lab, &refs, lo, None).unwrap();
        let b = cluster_tfidf(&lab, &refs, lo + extra, None).unwrap();
        for (kw, row) in &b.scores {
            prop_assert_eq!(Some(row), a.scores.get(kw));
        }
        let ra = rank_keywords(&refs, &refs, lo, None);
        let rb = rank_keywords(&refs, &refs, lo + extra, None);
        prop_assert!(rb.iter().all(|s| ra.iter().any(|t| t.keyword == s.keyword)));
    }

    #[test]
    fn ratio_is_scale_free(seed in any::<u64>(), n in 2usize..50, copies in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let global = random_docs(&mut rng, n, 8);
        let local: Vec<Vec<String>> = global.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
        let dup = |v: &[Vec<String>]| -> Vec<Vec<String>> { (0..copies).flat_map(|_| v.iter().cloned()).collect() };
        let (g2, l2) = (dup(&global), dup(&local));
        let r = |g: &[Vec<String>], l: &[Vec<String>]| {
            let g: Vec<&[String]> = g.iter().map(|d| d.as_slice()).collect();
            let l: Vec<&[String]> = l.iter().map(|d| d.as_slice()).collect();
            rank_keywords(&g, &l, 1, None)
        };
        let (a, b) = (r(&global, &local), r(&g2, &l2));
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(&x.keyword, &y.keyword);
            prop_assert!((x.ratio - y.ratio).abs() <= 1e-12 * x.ratio);
        }
    }
}

#[test]
fn embedding_is_identical_across_policies_and_runs() {
    let d = euclidean(&cloud(60, 3));
    let cfg = TsneConfig { perplexity: 10.0, iterations: 300, seed: 5, ..TsneConfig::default() };
    let a = tsne_embed(&d, &cfg, Exec::Sequential).unwrap();
    let b = tsne_embed(&d, &cfg, Exec::Parallel).unwrap();
    let c = tsne_embed(&d, &cfg, Exec::Parallel).unwrap();
    assert_eq!(a.points, b.points);
    assert_eq!(b.points, c.points);
    assert!(a.kl_divergence.is_finite() && a.kl_divergence >= 0.0);
    let other = tsne_embed(&d, &TsneConfig { seed: 6, ..cfg }, Exec::Parallel).unwrap();
    assert_ne!(a.points, other.points);
}

#[test]
fn embedding_preserves_neighborhoods() {
    // three well separated groups keep their nearest neighbors in the map
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let centers = [[0.0, 0.0], [50.0, 0.0], [0.0, 50.0]];
    let pts: Vec<Point> = (0..90)
        .map(|i| {
            let c = centers[i / 30];
            [c[0] + rng.random_range(-1.0..1.0), c[1] + rng.random_range(-1.0..1.0)]
        })
        .collect();
    let emb = tsne_embed(&euclidean(&pts), &TsneConfig { perplexity: 15.0, ..TsneConfig::default() }, Exec::Parallel).unwrap();
    let l = mean_shift(&emb.points, auto_bandwidth(&emb.points, 10, BandwidthReading::MeanOfNeighbors, Exec::Parallel).unwrap() * 2.0, &MeanShiftConfig::default(), Exec::Parallel).unwrap();
    for g in 0..3 {
        let labels: Vec<usize> = l.labels[g * 30..(g + 1) * 30].to_vec();
        assert!(labels.iter().all(|&x| x == labels[0]), "group {g} split: {labels:?}");
    }
}

#[test]
fn mean_shift_is_policy_independent_and_well_formed() {
    for seed in 0..10 {
        let pts = cloud(150, 100 + seed);
        let sigma = auto_bandwidth(&pts, 5, BandwidthReading::MeanOfNeighbors, Exec::Parallel).unwrap();
        let cfg = MeanShiftConfig::default();
        let a = mean_shift(&pts, sigma, &cfg, Exec::Sequential).unwrap();
        let b = mean_shift(&pts, sigma, &cfg, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        let sizes = a.sizes();
        assert_eq!(sizes.iter().sum::<usize>(), pts.len());
        assert!(sizes.windows(2).all(|w| w[0] >= w[1]), "sizes not descending: {sizes:?}");
        for i in 0..a.k() {
            for j in i + 1..a.k() {
                let (p, q) = (a.modes[i], a.modes[j]);
                let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                assert!(d >= cfg.merge_radius * sigma, "modes {i},{j} only {d} apart");
            }
        }
    }
}

#[test]
fn shift_trajectory_converges() {
    let pts = cloud(80, 9);
    let cfg = MeanShiftConfig::default();
    let steps = shift_trajectory(&pts, pts[0], 2.0, &cfg);
    assert!(!steps.is_empty() && steps.len() <= cfg.max_iterations);
    assert!(*steps.last().unwrap() < cfg.tolerance * 2.0);
}

#[test]
fn bandwidth_readings() {
    let pts = cloud(100, 4);
    let mean = auto_bandwidth(&pts, 7, BandwidthReading::MeanOfNeighbors, Exec::Sequential).unwrap();
    let kth = auto_bandwidth(&pts, 7, BandwidthReading::KthNeighbor, Exec::Parallel).unwrap();
    assert!(kth >= mean);
    assert!(auto_bandwidth(&pts, 0, BandwidthReading::MeanOfNeighbors, Exec::Sequential).is_err());
    assert!(auto_bandwidth(&pts, 100, BandwidthReading::MeanOfNeighbors, Exec::Sequential).is_err());
    assert!(auto_bandwidth(&[[1.0, 1.0]; 5], 2, BandwidthReading::MeanOfNeighbors, Exec::Sequential).is_err());
}

#[test]
fn keyword_frequency_cases() {
    let docs: Vec<Vec<String>> = (0..100).map(|i| if i < 10 { strings(&["x", "y"]) } else { strings(&["y"]) }).collect();
    let refs: Vec<&[String]> = docs.iter().map(|d| d.as_slice()).collect();
    assert_eq!(keyword_frequency(&refs, "y"), 1.0);
    assert_eq!(keyword_frequency(&refs, "x"), 0.1);
    assert_eq!(keyword_frequency(&refs, "z"), 0.0);
    assert_eq!(keyword_frequency(&[], "x"), 0.0);
}

#[test]
fn colocation_cases() {
    let docs = [strings(&["a", "b"]), strings(&["a", "b"]), strings(&["c"]), strings(&["c", "d"])];
    let refs: Vec<&[String]> = docs.iter().map(|d| d.as_slice()).collect();
    let lab = labeling(vec![0, 0, 1, 1]);
    assert_eq!(colocation_similarity(&lab, &refs, "a", "b"), 1.0);
    assert_eq!(colocation_similarity(&lab, &refs, "a", "c"), 0.0);
    let order = colocation_order(&lab, &refs, &strings(&["c", "a", "d", "b"])).unwrap();
    assert_eq!(order.len(), 4);
    // identical occupancy keeps a and b side by side
    let pa = order.iter().position(|k| k == "a").unwrap();
    let pb = order.iter().position(|k| k == "b").unwrap();
    assert_eq!(pa.abs_diff(pb), 1);
    assert!(colocation_order(&lab, &refs, &strings(&["a", "zzz"])).is_err());

    let emb = Embedding::from_points(ids(4), vec![[0.0, 0.0]; 4]);
    assert_eq!(keyword_overlay(&emb, &refs, "d").unwrap(), vec![3]);
    assert!(keyword_overlay(&emb, &refs, "zzz").is_err());
}

#[test]
fn confined_keyword_scores_tf_times_ln_k() {
    let docs = [strings(&["solo", "w"]), strings(&["w"]), strings(&["w"]), strings(&["w"])];
    let refs: Vec<&[String]> = docs.iter().map(|d| d.as_slice()).collect();
    let t = cluster_tfidf(&labeling(vec![0, 1, 2, 3]), &refs, 1, None).unwrap();
    assert!((t.scores["solo"][0] - 0.5 * 4f64.ln()).abs() < 1e-15);
    assert_eq!(t.assignment["solo"], 0);
    assert!(!t.assignment.contains_key("w"));
    let excluded = cluster_tfidf(&labeling(vec![0, 1, 2, 3]), &refs, 1, Some("solo")).unwrap();
    assert!(!excluded.scores.contains_key("solo"));
}
