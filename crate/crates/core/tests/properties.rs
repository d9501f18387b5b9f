use ncl_core::capacity::{blahut_arimoto, capacity_iid, CapacityOptions, RateObjective};
use ncl_core::coding::{build_code, exact_max_error, CodeParams};
use ncl_core::info::{joint_xz, mutual_information, typical_input_rate};
use ncl_core::typicality::{aep_bounds, typical_set, typical_summary, TypicalSpec};
use ncl_core::{Alphabet, DMChannel, DetFunction, Execution, NoisyComputationInstance, Pmf};
use proptest::prelude::*;

fn normalize(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

fn weights(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, len).prop_map(|w| normalize(&w))
}

/// Random instance with `|A|, |B|, |C|` in `1..=4` and `f` onto `B`.
fn instance() -> impl Strategy<Value = NoisyComputationInstance> {
    (1usize..=4, 1usize..=4, 1usize..=4)
        .prop_filter("f must be onto", |(a, b, _)| b <= a)
        .prop_flat_map(|(a, b, c)| {
            (weights(a), prop::collection::vec(0..b, a - b), prop::collection::vec(weights(c), a), Just((a, b, c)))
        })
        .prop_map(|(src, extra, rows, (a, b, c))| {
            let mut table: Vec<usize> = (0..b).collect();
            table.extend(extra);
            let (aa, bb, cc) =
                (Alphabet::numeric(a).unwrap(), Alphabet::numeric(b).unwrap(), Alphabet::numeric(c).unwrap());
            NoisyComputationInstance::new(
                Pmf::new(aa.clone(), src).unwrap(),
                DetFunction::new(aa.clone(), bb, table).unwrap(),
                DMChannel::new(aa, cc, rows).unwrap(),
            )
            .unwrap()
        })
}

fn quick_opts() -> CapacityOptions {
    CapacityOptions { restarts: 4, max_iters: 2000, ..CapacityOptions::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rate_identity_and_bounds(inst in instance()) {
        let r = typical_input_rate(&inst).unwrap();
        prop_assert!((r.b - r.b_via_decomposition()).abs() <= 1e-10);
        prop_assert!(r.b >= r.h_x_given_y - 1e-12);
        prop_assert!(r.b <= r.h_x + 1e-12);
        prop_assert!(r.i_yz <= r.h_y + 1e-12);
    }

    #[test]
    fn data_processing_on_cascade(inst in instance()) {
        let r = typical_input_rate(&inst).unwrap();
        let i_xz = mutual_information(&joint_xz(&inst.source, &inst.channel).unwrap());
        prop_assert!(r.i_yz <= i_xz + 1e-10);
    }

    #[test]
    fn rate_ignores_relabelling(inst in instance(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = inst.source.len();
        let c = inst.channel.output().len();
        let mut pa: Vec<usize> = (0..a).collect();
        let mut pc: Vec<usize> = (0..c).collect();
        pa.shuffle(&mut rng);
        pc.shuffle(&mut rng);
        let source = inst.source.permuted(&pa).unwrap();
        let channel = inst.channel.permuted(&pa, &pc).unwrap();
        let mut table = vec![0; a];
        for x in 0..a {
            table[pa[x]] = inst.f.apply(x);
        }
        let f = DetFunction::new(source.alphabet().clone(), inst.f.codomain().clone(), table).unwrap();
        let moved = NoisyComputationInstance::new(source, f, channel).unwrap();
        let (b1, b2) = (typical_input_rate(&inst).unwrap().b, typical_input_rate(&moved).unwrap().b);
        prop_assert!((b1 - b2).abs() <= 1e-12);
    }

    #[test]
    fn capacity_dominates_every_source(inst in instance()) {
        let cap = capacity_iid(&inst.f, &inst.channel, &quick_opts()).unwrap();
        let b = typical_input_rate(&inst).unwrap().b;
        prop_assert!(cap.value >= b - 1e-7, "capacity {} below B {}", cap.value, b);
        let obj = RateObjective::new(&inst.f, &inst.channel).unwrap();
        prop_assert!((obj.value(cap.argmax.probs()) - cap.value).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bijective_capacity_matches_blahut_arimoto(rows in prop::collection::vec(weights(3), 3)) {
        let a = Alphabet::numeric(3).unwrap();
        let ch = DMChannel::new(a.clone(), a.clone(), rows).unwrap();
        let f = DetFunction::identity(a);
        let cap = capacity_iid(&f, &ch, &CapacityOptions::default()).unwrap().value;
        let ba = blahut_arimoto(&ch, 1e-12, 100_000).unwrap();
        prop_assert!((cap - ba).abs() <= 1e-5, "{} vs {}", cap, ba);
    }

    #[test]
    fn typical_count_respects_aep_upper(w in weights(3), n in 1usize..=10, delta in 0.01f64..0.5) {
        let spec = TypicalSpec::new(Pmf::new(Alphabet::numeric(3).unwrap(), w).unwrap(), n, delta).unwrap();
        let set = typical_set(&spec).unwrap();
        prop_assert!(set.len() as f64 <= aep_bounds(&spec, 0.1).card_upper);
        prop_assert_eq!(set.len() as f64, typical_summary(&spec).count);
    }

    #[test]
    fn built_codes_verify(p in 0.01f64..0.3, eps in 0.05f64..0.5, n in 1usize..=6) {
        let a = Alphabet::binary();
        let inst = NoisyComputationInstance::new(
            Pmf::uniform(a.clone()),
            DetFunction::identity(a),
            DMChannel::bsc(p).unwrap(),
        )
        .unwrap();
        let build = build_code(&inst, &CodeParams::new(n, eps), u64::MAX).unwrap();
        let code = build.code;
        prop_assert!(code.size() >= 1);
        prop_assert!(code.regions_disjoint());
        prop_assert!(exact_max_error(&code, &inst, None, Execution::Sequential).unwrap() <= eps + 1e-12);
    }
}
