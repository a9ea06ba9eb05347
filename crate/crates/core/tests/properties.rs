mod common;

use edo_core::diversity::diversity_bound;
use edo_core::emo::{crowding_distance, nsga2_replacement, spea2_environmental_selection};
use edo_core::encoding::{standard_bit_mutation, uniform_crossover, BitString, FitnessVector, Individual};
use edo_core::indicators::{hypervolume_2d, nondominated_filter};
use edo_core::problems::{is_vertex_cover, maxcut_objective, mvc_repair, Aggregation, ProblemInstance, ProblemKind};
use edo_core::stats::wilcoxon_signed_rank;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn bits(max: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 1..max)
}

fn points(max: usize) -> impl Strategy<Value = Vec<FitnessVector>> {
    prop::collection::vec((0u8..10, 0u8..10), 1..max)
        .prop_map(|v| v.into_iter().map(|(a, b)| FitnessVector::new(a as f64, b as f64)).collect())
}

proptest! {
    #[test]
    fn hex_round_trip(b in bits(300)) {
        let s = BitString::from_bools(&b);
        let back = BitString::from_hex(&s.to_hex(), b.len()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn genome_round_trip(r in 1usize..6, n in 1usize..130, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ind = Individual::random(r, n, &mut rng);
        let again = Individual::from_genome(&ind.genome(), n).unwrap();
        prop_assert_eq!(again.decode(), ind.decode());
        let encoded = Individual::encode(&ind.decode()).unwrap();
        prop_assert_eq!(encoded.genome(), ind.genome());
    }

    #[test]
    fn column_counts_track_mutation(r in 1usize..6, n in 1usize..100, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ind = Individual::random(r, n, &mut rng);
        ind.ensure_column_counts();
        standard_bit_mutation(&mut ind, 0.1, &mut rng).unwrap();
        prop_assert!(ind.audit_caches().is_ok());
        prop_assert_eq!(ind.recount_columns().distance_sum(), naive_distance_sum(&ind));
    }

    #[test]
    fn crossover_keeps_shape(r in 1usize..5, n in 1usize..70, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Individual::random(r, n, &mut rng);
        let b = Individual::random(r, n, &mut rng);
        let (c, d) = uniform_crossover(&a, &b, 1.0, &mut rng).unwrap();
        prop_assert!(c.same_shape(&a) && d.same_shape(&b));
        let ones = |i: &Individual| i.decode().iter().map(|s| s.count_ones()).sum::<usize>();
        prop_assert_eq!(ones(&a) + ones(&b), ones(&c) + ones(&d));
    }

    #[test]
    fn bound_is_monotone(n in 1u64..200, b in 0u64..200, r in 1u64..12) {
        let b = b.min(n);
        let g = diversity_bound(n, b, r).unwrap();
        prop_assert!(g <= n * (r / 2) * r.div_ceil(2));
        if b < n {
            prop_assert!(diversity_bound(n, b + 1, r).unwrap() >= g);
        }
    }

    #[test]
    fn filter_is_a_front(pts in points(40)) {
        let front = nondominated_filter(&pts);
        for p in &front {
            prop_assert!(!front.iter().any(|q| naive_strictly_dominates(q, p)));
        }
        for p in &pts {
            prop_assert!(front.iter().any(|q| q == p || naive_strictly_dominates(q, p)));
        }
    }

    #[test]
    fn hypervolume_grows_with_points(pts in points(20), extra in (0u8..10, 0u8..10)) {
        let origin = FitnessVector::new(0.0, 0.0);
        let scaled: Vec<_> = pts.iter().map(|p| FitnessVector::new(p.f1 / 10.0, p.f2 / 10.0)).collect();
        let before = hypervolume_2d(&scaled, origin);
        let mut more = scaled.clone();
        more.push(FitnessVector::new(extra.0 as f64 / 10.0, extra.1 as f64 / 10.0));
        prop_assert!(hypervolume_2d(&more, origin) >= before - 1e-12);
        prop_assert!((0.0..=1.0).contains(&before));
    }

    #[test]
    fn crowding_boundaries_infinite(pts in points(30)) {
        let d = crowding_distance(&pts);
        prop_assert_eq!(d.len(), pts.len());
        prop_assert!(d.iter().all(|v| *v >= 0.0));
        let infinite = d.iter().filter(|v| v.is_infinite()).count();
        prop_assert!(infinite >= pts.len().min(2));
    }

    #[test]
    fn selections_return_requested_size(pts in points(40), size in 1usize..40) {
        let size = size.min(pts.len());
        let (keep, _, _) = nsga2_replacement(&pts, size).unwrap();
        prop_assert_eq!(keep.len(), size);
        let sel = spea2_environmental_selection(&pts, size).unwrap();
        prop_assert_eq!(sel.len(), size);
        let mut uniq = sel.clone();
        uniq.sort_unstable();
        uniq.dedup();
        prop_assert_eq!(uniq.len(), size);
    }

    #[test]
    fn wilcoxon_symmetric(a in prop::collection::vec(0.0f64..1.0, 5..40), shift in -0.5f64..0.5) {
        let b: Vec<f64> = a.iter().enumerate().map(|(i, x)| x + shift + (i % 3) as f64 * 0.01).collect();
        let ab = wilcoxon_signed_rank(&a, &b, 0.01);
        let ba = wilcoxon_signed_rank(&b, &a, 0.01);
        match (ab, ba) {
            (Ok(x), Ok(y)) => {
                prop_assert!((x.p_value - y.p_value).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&x.p_value));
            }
            (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
        }
    }

    #[test]
    fn repaired_cover_is_minimal(n in 2usize..25, p in 0.05f64..0.9, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gnp(n, p, &mut rng);
        let x = BitString::zeros(n);
        let y = mvc_repair(&g, &x, &mut rng);
        prop_assert!(is_vertex_cover(&g, &y));
        for v in y.ones_iter() {
            let mut z = y.clone();
            z.set(v, false);
            prop_assert!(!is_vertex_cover(&g, &z));
        }
    }

    #[test]
    fn maxcut_distance_matches_cut_sets(n in 2usize..30, p in 0.1f64..0.9, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gnp(n, p, &mut rng);
        let inst = ProblemInstance::new("g", g.clone(), ProblemKind::MaxCut);
        let ind = Individual::random(4, n, &mut rng);
        let ev = inst.evaluate(Aggregation::Min, &ind, false).unwrap();
        let sols = ind.decode();
        let mut want = 0u64;
        for i in 0..sols.len() {
            for j in i + 1..sols.len() {
                want += g
                    .edges()
                    .iter()
                    .filter(|&&(u, v)| {
                        let ci = sols[i].get(u as usize) != sols[i].get(v as usize);
                        let cj = sols[j].get(u as usize) != sols[j].get(v as usize);
                        ci != cj
                    })
                    .count() as u64;
            }
        }
        prop_assert_eq!(ev.distance_sum, want);
        let min_cut = sols.iter().map(|s| maxcut_objective(&g, s)).min().unwrap();
        prop_assert_eq!(ev.fitness.f1, min_cut as f64);
    }
}
