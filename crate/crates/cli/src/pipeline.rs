//! Shared pipeline steps behind the subcommands. `compare` is built from
//! the same functions as the single-step commands, so a composed run and
//! its single-command replication produce identical artifacts.

use crate::config::RunConfig;
use crate::CliError;
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use vtpr::baseline::{fit_scaling, make_template, ScalingFactors};
use vtpr::evaluate::{
    classify_matches, compute_gtm, compute_tme, default_theta_grid, precision_recall,
    sweep_thresholds, MatchThresholds, MethodTag, Scores, TemplateData, TemplateEntry,
    TemplateSet,
};
use vtpr::pcnet::{extract_feature, NetworkConfig, SensorySample, WeightSet};
use vtpr::persist;
use vtpr::seeds::derive_seed;
use vtpr::synthworld::{
    build_dataset, generate_trajectory, preset_environment, EnvKind, Observation,
};

/// Generate the two noisy trajectory datasets for one environment.
/// Trajectory and sensor noise streams are derived from the master seed
/// and the (env, trajectory) labels.
pub fn gen_datasets(
    cfg: &RunConfig,
    env: EnvKind,
) -> Result<(Vec<Observation>, Vec<Observation>), CliError> {
    use rand_chacha::rand_core::SeedableRng;
    let arena = preset_environment(env);
    let rig = cfg.rig();
    let waypoints = cfg.waypoint_poses();
    let mut sets = Vec::with_capacity(2);
    for tag in ["a", "b"] {
        let traj_seed = derive_seed(cfg.seed, &format!("traj:{}:{}", env.name(), tag));
        let sensor_seed = derive_seed(cfg.seed, &format!("sensors:{}:{}", env.name(), tag));
        let mut rng = ChaCha8Rng::seed_from_u64(traj_seed);
        let poses = generate_trajectory(
            &waypoints,
            cfg.step_length,
            (cfg.traj_noise_pos, cfg.traj_noise_theta),
            &mut rng,
        )?;
        let dataset =
            build_dataset(&arena, &poses, &rig, sensor_seed, &format!("{}_{}", env.name(), tag))?;
        sets.push(dataset);
    }
    let b = sets.pop().unwrap();
    let a = sets.pop().unwrap();
    Ok((a, b))
}

pub fn dataset_dims(observations: &[Observation]) -> (usize, usize) {
    observations
        .first()
        .map(|o| (o.visual.len(), o.tactile.len()))
        .unwrap_or((0, 0))
}

fn trajectory_tag(observations: &[Observation]) -> String {
    observations.first().map(|o| o.trajectory_tag.clone()).unwrap_or_else(|| "empty".into())
}

/// Extract learned features for every observation with frozen weights.
pub fn extract_learned(
    observations: &[Observation],
    weights: &WeightSet,
    net: &NetworkConfig,
) -> Result<TemplateSet, CliError> {
    let (n_vis, n_tac) = dataset_dims(observations);
    if !observations.is_empty()
        && (n_vis != net.visual_input_dim || n_tac != net.tactile_input_dim)
    {
        return Err(CliError::Incompat(format!(
            "dataset dims ({n_vis}, {n_tac}) do not match the model inputs ({}, {})",
            net.visual_input_dim, net.tactile_input_dim
        )));
    }
    let mut entries = Vec::with_capacity(observations.len());
    for (index, obs) in observations.iter().enumerate() {
        let sample = SensorySample::from(obs);
        let feature = extract_feature(&sample, weights, net)?;
        entries.push(TemplateEntry {
            index,
            pose: obs.pose,
            data: TemplateData::Learned(feature.values),
        });
    }
    Ok(TemplateSet {
        method: MethodTag::Learned,
        trajectory_tag: trajectory_tag(observations),
        entries,
    })
}

/// Build handcrafted templates for every observation.
pub fn extract_handcrafted(
    observations: &[Observation],
    cfg: &RunConfig,
) -> Result<TemplateSet, CliError> {
    let params = cfg.baseline_params();
    let mut entries = Vec::with_capacity(observations.len());
    for (index, obs) in observations.iter().enumerate() {
        entries.push(TemplateEntry {
            index,
            pose: obs.pose,
            data: TemplateData::Handcrafted(make_template(obs, &params)?),
        });
    }
    Ok(TemplateSet {
        method: MethodTag::Handcrafted,
        trajectory_tag: trajectory_tag(observations),
        entries,
    })
}

/// Fit the channel scaling factors on a calibration dataset.
pub fn calibrate_scaling(
    calib: &[Observation],
    cfg: &RunConfig,
) -> Result<ScalingFactors, CliError> {
    let params = cfg.baseline_params();
    let templates: Result<Vec<_>, _> = calib.iter().map(|o| make_template(o, &params)).collect();
    Ok(fit_scaling(&templates?)?)
}

pub struct EvalArtifacts {
    pub scores: Scores,
    /// The threshold actually applied (the best-F1 row's under --sweep).
    pub theta: f64,
}

/// Compute TME/GTM, classify (optionally across a sweep), and write all
/// artifacts (CSV + PGM matrices, scores, sweep table) into `out_dir`.
pub fn evaluate_sets(
    a: &TemplateSet,
    b: &TemplateSet,
    scaling: Option<&ScalingFactors>,
    cfg: &RunConfig,
    tau: f64,
    theta: Option<f64>,
    sweep: bool,
    out_dir: &Path,
) -> Result<EvalArtifacts, CliError> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io(e.to_string()))?;
    let tme = compute_tme(a, b, scaling)?;
    let gtm = compute_gtm(a, b, cfg.angle_weight);

    persist::save_matrix_csv(&tme.values, &out_dir.join("tme.csv"))?;
    persist::save_matrix_pgm(&tme.values, &out_dir.join("tme.pgm"))?;
    persist::save_matrix_csv(&gtm.values, &out_dir.join("gtm.csv"))?;
    persist::save_matrix_pgm(&gtm.values, &out_dir.join("gtm.pgm"))?;

    let (scores, used_theta) = if sweep {
        let grid = default_theta_grid(&tme, cfg.sweep_points);
        let result = sweep_thresholds(&tme, &gtm, tau, &grid, cfg.recall_mode)?;
        let mut table = String::from("theta,tp,fp,fn,tn,precision,recall,f1\n");
        for (theta, s) in &result.rows {
            table.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                persist::format_f64(*theta),
                s.true_pos,
                s.false_pos,
                s.false_neg,
                s.true_neg,
                persist::format_f64(s.precision),
                persist::format_f64(s.recall),
                persist::format_f64(s.f1)
            ));
        }
        persist::write_atomic(&out_dir.join("sweep.csv"), table.as_bytes())?;
        let (best_theta, best_scores) = result.best_row();
        (best_scores, best_theta)
    } else {
        let theta = theta.unwrap_or(cfg.theta_match);
        let counts = classify_matches(&tme, &gtm, &MatchThresholds { tau, theta_match: theta })?;
        (precision_recall(&counts, cfg.recall_mode), theta)
    };

    let report = persist::ScoreReport {
        method: a.method.name().to_string(),
        trajectory_a: a.trajectory_tag.clone(),
        trajectory_b: b.trajectory_tag.clone(),
        tau,
        theta_match: used_theta,
        recall_mode: cfg.recall_mode.name().to_string(),
        seed: cfg.seed,
        scores,
    };
    persist::save_scores(&report, &out_dir.join("scores.txt"))?;

    Ok(EvalArtifacts { scores, theta: used_theta })
}
