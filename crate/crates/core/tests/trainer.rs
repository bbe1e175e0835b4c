mod common;

use common::{quick_config, tiny_graph};
use gnncl::graph::{generate_synthetic_graph, DatasetSpec};
use gnncl::metrics::{argmax_rows, cma};
use gnncl::nn::{finite_difference_check, GradCheckOptions};
use gnncl::trainer::*;
use gnncl::Error;

fn record(
    config: &TrainConfig,
    graph_seed: u64,
    epoch: usize,
) -> (TrainingData, Model, gnncl::nn::ParamSet, EpochForward) {
    let (g, m) = tiny_graph(graph_seed);
    let data = TrainingData::new(config, &g, &m).unwrap();
    let (model, params) = init_model(config, &data).unwrap();
    let mut rng = epoch_rng(config.seed, epoch);
    let fwd = forward_epoch(
        config,
        &data,
        &model,
        &params,
        epoch,
        Decisions::Record(&mut rng),
    )
    .unwrap();
    (data, model, params, fwd)
}

#[test]
fn replay_reproduces_recorded_losses() {
    let config = TrainConfig {
        epsilon: 0.0,
        ..quick_config(Variant::GnnCl, 10)
    };
    let (data, model, params, fwd) = record(&config, 3, 10);
    assert!(!fwd.plan.synthetic.is_empty());
    let again = forward_epoch(
        &config,
        &data,
        &model,
        &params,
        10,
        Decisions::Replay(&fwd.plan),
    )
    .unwrap();
    assert_eq!(fwd.losses, again.losses);
    assert_eq!(fwd.plan, again.plan);
}

#[test]
fn epoch_zero_has_no_synthetic_nodes() {
    let (data, _, _, fwd) = record(&quick_config(Variant::GnnCl, 10), 3, 0);
    assert!(fwd.plan.synthetic.is_empty());
    assert_eq!(fwd.probabilities.nrows(), data.graph.num_nodes());
}

#[test]
fn without_oversampling_the_graph_is_unchanged() {
    let config = TrainConfig {
        epsilon: 0.0,
        ..quick_config(Variant::GnnClO, 10)
    };
    for epoch in [0, 5, 10] {
        let (data, _, _, fwd) = record(&config, 3, epoch);
        assert_eq!(fwd.augmented.num_nodes(), data.graph.num_nodes());
        assert_eq!(fwd.augmented.col_indices(), data.graph.col_indices());
    }
}

#[test]
fn constant_variant_uses_fixed_thresholds() {
    let config = quick_config(Variant::GnnClC, 100);
    for epoch in [0, 50, 99] {
        assert_eq!(thresholds(&config, epoch).unwrap(), (1.0, 0.4, 0.1));
    }
    let full = quick_config(Variant::GnnCl, 100);
    assert_eq!(thresholds(&full, 0).unwrap().0, 0.0);
}

#[test]
fn loss_combination() {
    let mut c = TrainConfig {
        lambda: 0.0,
        ..TrainConfig::default()
    };
    let b = total_loss(2.0, 5.0, 0.3, &c);
    assert_eq!(b.l_gcl, b.l_node);
    c.lambda = 0.002;
    c.gamma = 0.0;
    let b = total_loss(2.0, 5.0, 0.3, &c);
    assert_eq!(b.total, b.l_gcl);
    let d = total_loss(2.0, 5.0, 0.3, &TrainConfig::default());
    assert!((d.total - (2.0 + 0.002 * 5.0 + 0.3)).abs() < 1e-12);
    let m = total_loss(
        2.0,
        5.0,
        0.3,
        &TrainConfig {
            variant: Variant::GnnClM,
            ..TrainConfig::default()
        },
    );
    assert_eq!(m.l_ntl, 0.0);
    assert_eq!(m.total, m.l_gcl);
}

fn objective_check(lambda: f64, name_prefix: Option<&'static str>) {
    // loose constant thresholds so that untrained probabilities still yield triplets
    let config = TrainConfig {
        epsilon: 0.0,
        beta_plus: 0.7,
        beta_minus: 0.3,
        lambda,
        ..quick_config(Variant::GnnClC, 10)
    };
    let (data, model, mut params, fwd) = record(&config, 5, 10);
    assert!(!fwd.plan.synthetic.is_empty());
    assert!(!fwd.plan.triplets.is_empty() && !fwd.plan.added_edges.is_empty());
    assert!(fwd.losses.l_ntl > 0.0);
    let plan = fwd.plan;
    let report = finite_difference_check(
        |p| {
            let f = forward_epoch(&config, &data, &model, p, 10, Decisions::Replay(&plan))?;
            f.tape.backward(f.total).accumulate_into(&f.tape, p);
            Ok(f.losses.total)
        },
        &mut params,
        GradCheckOptions {
            max_coords_per_param: None,
            name_prefix,
            ..GradCheckOptions::default()
        },
    )
    .unwrap();
    assert!(report.coords_checked > 0);
    assert!(report.passed(), "{report:?}");
}

#[test]
fn node_and_triplet_gradient_check() {
    objective_check(0.0, None);
}

#[test]
fn edge_generator_gradient_check() {
    // the generator reads detached embeddings, so only its own weights see L_edge
    objective_check(1.0, Some("edge_gen."));
}

#[test]
fn same_seed_same_history() {
    let (g, m) = tiny_graph(1);
    let config = quick_config(Variant::GnnCl, 30);
    let a = train(&config, &g, &m).unwrap();
    let b = train(&config, &g, &m).unwrap();
    assert_eq!(a.state.history, b.state.history);
    assert_eq!(a.state.params.snapshot(), b.state.params.snapshot());
}

#[test]
fn patience_zero_with_frozen_parameters_stops_after_one_miss() {
    let (g, m) = tiny_graph(1);
    let mut config = quick_config(Variant::Origin, 50);
    config.patience = 0;
    config.adam.learning_rate = 0.0;
    config.adam.weight_decay = 0.0;
    let out = train(&config, &g, &m).unwrap();
    assert_eq!(out.state.history.len(), 2);
    assert!(out.state.stopped_early);
}

#[test]
fn restored_parameters_reproduce_best_score() {
    let (g, m) = tiny_graph(2);
    let mut config = quick_config(Variant::GnnCl, 60);
    config.patience = 10;
    let out = train(&config, &g, &m).unwrap();
    let probs = out.probabilities();
    let nodes = &out.data.masks.validation;
    let pred = argmax_rows(&probs.select(ndarray::Axis(0), nodes));
    let truth: Vec<usize> = nodes.iter().map(|&v| g.label(v)).collect();
    assert_eq!(cma(&pred, &truth, 3).unwrap(), out.state.best_val_cma);
    assert_eq!(out.validation.cma, out.state.best_val_cma);
    let mut best = f64::NEG_INFINITY;
    for r in &out.state.history {
        assert!(r.best_val_cma >= best);
        best = r.best_val_cma;
    }
}

#[test]
fn divergence_is_reported() {
    let (g, m) = tiny_graph(1);
    let mut config = quick_config(Variant::Origin, 50);
    config.adam.learning_rate = 1e200;
    match train(&config, &g, &m) {
        Err(Error::Divergence { .. }) => {}
        other => panic!(
            "expected divergence, got {:?}",
            other.map(|o| o.state.history.len())
        ),
    }
}

#[test]
fn checkpoint_round_trip() {
    let (g, m) = tiny_graph(1);
    let out = train(&quick_config(Variant::GnnCl, 15), &g, &m).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("checkpoint.json");
    let ckpt = Checkpoint::from_outcome(&out);
    ckpt.save(&path).unwrap();
    let loaded = Checkpoint::load(&path).unwrap();
    assert_eq!(loaded, ckpt);
    let (model, params) = loaded
        .build_model(g.feature_dim(), g.num_classes())
        .unwrap();
    assert_eq!(predict(&model, &params, &out.data), out.probabilities());

    let mut text = std::fs::read_to_string(&path).unwrap();
    text = text.replacen("\"format_version\": 1", "\"format_version\": 99", 1);
    std::fs::write(&path, text).unwrap();
    assert!(Checkpoint::load(&path).is_err());
}

#[test]
fn baselines_run() {
    let (g, m) = tiny_graph(4);
    for v in [Variant::Origin, Variant::Oversampling, Variant::Reweighting] {
        let out = run_baseline(&quick_config(v, 10), &g, &m).unwrap();
        assert!(out
            .state
            .history
            .iter()
            .all(|r| r.losses.l_edge == 0.0 && r.losses.l_ntl == 0.0));
        assert!(out.state.history.iter().all(|r| r.num_synthetic == 0));
    }
    let over = run_baseline(&quick_config(Variant::Oversampling, 5), &g, &m).unwrap();
    let counts = gnncl::graph::training_class_counts(&over.data.graph, &over.data.masks);
    assert_eq!(counts, vec![4, 4, 4]);
}

#[test]
fn origin_on_balanced_graph_is_class_symmetric() {
    let mut spec = DatasetSpec::new(700, 4, 16, 0.04, 0.002, 3.0, 11);
    spec.train_per_class = Some(20);
    let (g, m) = generate_synthetic_graph(&spec).unwrap();
    let mut mean = vec![0.0; 4];
    for seed in 0..5 {
        let config = TrainConfig {
            seed,
            variant: Variant::Origin,
            hidden_dim: 32,
            ..TrainConfig::default()
        }
        .with_max_epochs(200);
        let out = train(&config, &g, &m).unwrap();
        for (c, r) in out.test.per_class_recall.iter().enumerate() {
            mean[c] += r.unwrap() / 5.0;
        }
    }
    let hi = mean.iter().copied().fold(f64::MIN, f64::max);
    let lo = mean.iter().copied().fold(f64::MAX, f64::min);
    assert!(hi - lo <= 0.1, "{mean:?}");
}

#[test]
fn without_oversampling_or_triplets_matches_origin() {
    let (g, m) = tiny_graph(6);
    let base = quick_config(Variant::Origin, 25);
    let reduced = TrainConfig {
        variant: Variant::GnnCl,
        mu: 0.0,
        gamma: 0.0,
        ..base.clone()
    };
    let a = train(&base, &g, &m).unwrap();
    let b = train(&reduced, &g, &m).unwrap();
    assert!(b.state.history.iter().all(|r| r.num_synthetic == 0));
    for (x, y) in a.state.history.iter().zip(&b.state.history) {
        assert_eq!(x.losses.l_node, y.losses.l_node);
        assert_eq!(x.val_cma, y.val_cma);
    }
    assert_eq!(a.test, b.test);
}
