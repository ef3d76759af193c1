//! Property tests: shape closure, metric laws, scaling invariances, and
//! file round-trips over randomized instances.

use ndarray::Array1;
use proptest::prelude::*;
use vtpr::baseline::*;
use vtpr::evaluate::*;
use vtpr::pcnet::*;
use vtpr::persist;
use vtpr::synthworld::{Observation, Pose};

fn small_sizes() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..5, 1..3)
}

fn config_strategy() -> impl Strategy<Value = NetworkConfig> {
    (small_sizes(), small_sizes(), 1usize..5, 1usize..5, 1usize..5, any::<u64>()).prop_map(
        |(visual, tactile, multi, n_vis, n_tac, seed)| NetworkConfig {
            visual_input_dim: n_vis,
            tactile_input_dim: n_tac,
            visual_layer_sizes: visual,
            tactile_layer_sizes: tactile,
            multi_size: multi,
            train_iterations: 2,
            train_inner_iterations: 3,
            test_max_iterations: 5,
            rng_seed: seed,
            ..NetworkConfig::desk()
        },
    )
}

fn sample_for(cfg: &NetworkConfig) -> BoxedStrategy<SensorySample> {
    let nv = cfg.visual_input_dim;
    let nt = cfg.tactile_input_dim;
    (
        prop::collection::vec(0.0f64..1.0, nv..=nv),
        prop::collection::vec(0.0f64..1.0, nt..=nt),
    )
        .prop_map(|(v, t)| SensorySample::new(Array1::from_vec(v), Array1::from_vec(t)))
        .boxed()
}

proptest! {
    // Every operation preserves the config-declared dimensions.
    #[test]
    fn shape_closure(
        (cfg, sample) in config_strategy().prop_flat_map(|cfg| {
            let s = sample_for(&cfg);
            (Just(cfg), s)
        })
    ) {
        let weights = WeightSet::seeded(&cfg);
        prop_assert!(weights.validate_shapes(&cfg).is_ok());

        let state = NetworkState::constant(&cfg, cfg.activity_init);
        let next = activity_step(&state, &sample, &weights, &cfg).unwrap();
        for (v, &s) in next.visual.iter().zip(&cfg.visual_layer_sizes) {
            prop_assert_eq!(v.len(), s);
        }
        for (t, &s) in next.tactile.iter().zip(&cfg.tactile_layer_sizes) {
            prop_assert_eq!(t.len(), s);
        }
        prop_assert_eq!(next.multi.len(), cfg.multi_size);

        let stepped = weight_step(&next, &sample, &weights, &cfg).unwrap();
        prop_assert!(stepped.validate_shapes(&cfg).is_ok());

        let out = infer(&sample, &weights, &cfg, InferMode::Test).unwrap();
        prop_assert_eq!(out.state.multi.len(), cfg.multi_size);
        prop_assert_eq!(out.final_decode_errors.len(), cfg.boundary_count());

        let feature = extract_feature(&sample, &weights, &cfg).unwrap();
        prop_assert_eq!(feature.values.len(), cfg.multi_size);
    }

    // L2 feature distance is a metric.
    #[test]
    fn feature_distance_is_a_metric(
        a in prop::collection::vec(-10.0f64..10.0, 1..12),
        b in prop::collection::vec(-10.0f64..10.0, 1..12),
        c in prop::collection::vec(-10.0f64..10.0, 1..12),
    ) {
        let n = a.len().min(b.len()).min(c.len());
        let va = Array1::from_vec(a[..n].to_vec());
        let vb = Array1::from_vec(b[..n].to_vec());
        let vc = Array1::from_vec(c[..n].to_vec());
        let d = |x: &Array1<f64>, y: &Array1<f64>| vector_distance(x.view(), y.view()).unwrap();
        prop_assert!(d(&va, &vb) >= 0.0);
        prop_assert_eq!(d(&va, &va), 0.0);
        prop_assert_eq!(d(&va, &vb), d(&vb, &va));
        prop_assert!(d(&va, &vc) <= d(&va, &vb) + d(&vb, &vc) + 1e-12);
    }

    // Model files round-trip bit for bit.
    #[test]
    fn model_round_trip(cfg in config_strategy()) {
        let weights = WeightSet::seeded(&cfg);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mspc");
        persist::save_model(&weights, &cfg, &path).unwrap();
        let (w2, cfg2) = persist::load_model(&path).unwrap();
        prop_assert_eq!(weights, w2);
        prop_assert_eq!(cfg, cfg2);
    }

    // Dataset files round-trip exactly at 17 significant digits.
    #[test]
    fn dataset_round_trip(
        rows in prop::collection::vec(
            (
                prop::collection::vec(0.0f64..1.0, 3..=3),
                prop::collection::vec(0.0f64..1.0, 2..=2),
                prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3), 0..=2),
                -5.0f64..5.0,
                -5.0f64..5.0,
                -3.1f64..3.1,
            ),
            0..6
        )
    ) {
        let observations: Vec<Observation> = rows
            .into_iter()
            .map(|(v, t, c, x, y, th)| Observation {
                visual: v,
                tactile: t,
                contacts: c.into_iter().map(|(a, b)| [a, b]).collect(),
                pose: Pose { x, y, theta: th },
                trajectory_tag: "t".into(),
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        persist::save_dataset(&observations, &path).unwrap();
        prop_assert_eq!(persist::load_dataset(&path).unwrap(), observations);
    }

    // Histograms normalize to 1 or stay all-zero, and never produce NaN.
    #[test]
    fn histograms_normalize(
        contacts in prop::collection::vec((-0.25f64..0.25, -0.25f64..0.25), 0..10),
        deflections in prop::collection::vec(0.0f64..=1.0, 0..24),
    ) {
        let pts: Vec<[f64; 2]> = contacts.into_iter().map(|(x, y)| [x, y]).collect();
        let pfh = compute_pfh(&pts, 16, 0.5);
        let sda = compute_sda(&deflections, 16).unwrap();
        for h in [&pfh, &sda] {
            let sum: f64 = h.iter().sum();
            prop_assert!(h.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
            prop_assert!(sum.abs() < 1e-12 || (sum - 1.0).abs() < 1e-9);
        }
    }

}

// fit_scaling does not depend on template order.
#[test]
fn scaling_order_invariance_seeded() {
    use rand::seq::SliceRandom;
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let n = rng.gen_range(2..8);
        let mut templates: Vec<HandcraftedTemplate> = (0..n)
            .map(|_| HandcraftedTemplate {
                intensity: (0..4).map(|_| rng.gen_range(0.0..1.0)).collect(),
                pfh: (0..3).map(|_| rng.gen_range(0.0..1.0)).collect(),
                sda: (0..3).map(|_| rng.gen_range(0.0..1.0)).collect(),
            })
            .collect();
        let before = fit_scaling(&templates).unwrap();
        templates.shuffle(&mut rng);
        let after = fit_scaling(&templates).unwrap();
        assert_eq!(before, after);
    }
}

// Uniformly rescaling one channel and refitting the scaling factors must
// not change any row's best-match column.
#[test]
fn tme_argmin_invariant_under_channel_rescale() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    for case in 0..50 {
        let n = rng.gen_range(3..10);
        let make = |rng: &mut rand_chacha::ChaCha8Rng, scale: f64| -> Vec<HandcraftedTemplate> {
            (0..n)
                .map(|_| HandcraftedTemplate {
                    intensity: (0..5).map(|_| scale * rng.gen_range(0.0..1.0)).collect(),
                    pfh: (0..4).map(|_| rng.gen_range(0.0..1.0)).collect(),
                    sda: (0..4).map(|_| rng.gen_range(0.0..1.0)).collect(),
                })
                .collect()
        };
        let mut base_rng = rng.clone();
        let base = make(&mut base_rng, 1.0);
        let k = rng.gen_range(0.1..10.0);
        let rescaled: Vec<HandcraftedTemplate> = base
            .iter()
            .map(|t| HandcraftedTemplate {
                intensity: t.intensity.iter().map(|v| v * k).collect(),
                pfh: t.pfh.clone(),
                sda: t.sda.clone(),
            })
            .collect();

        let to_set = |ts: &[HandcraftedTemplate]| TemplateSet {
            method: MethodTag::Handcrafted,
            trajectory_tag: "t".into(),
            entries: ts
                .iter()
                .enumerate()
                .map(|(index, t)| TemplateEntry {
                    index,
                    pose: Pose { x: index as f64, y: 0.0, theta: 0.0 },
                    data: TemplateData::Handcrafted(t.clone()),
                })
                .collect(),
        };

        let s1 = fit_scaling(&base).unwrap();
        let s2 = fit_scaling(&rescaled).unwrap();
        let tme1 = compute_tme(&to_set(&base), &to_set(&base), Some(&s1)).unwrap();
        let tme2 = compute_tme(&to_set(&rescaled), &to_set(&rescaled), Some(&s2)).unwrap();

        let argmin = |tme: &Tme, i: usize| -> usize {
            let mut best = 0;
            for j in 0..n {
                if tme.values[[i, j]] < tme.values[[i, best]] {
                    best = j;
                }
            }
            best
        };
        for i in 0..n {
            assert_eq!(argmin(&tme1, i), argmin(&tme2, i), "case {case}, row {i}");
        }
    }
}
