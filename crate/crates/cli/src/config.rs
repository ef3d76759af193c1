//! Flat key=value run configuration.
//!
//! A config file holds one `key=value` pair per line (`#` comments and
//! blank lines allowed); command-line `--set key=value` flags override
//! file values. Unknown keys are rejected. Every command writes its fully
//! resolved configuration next to its outputs.

use crate::CliError;
use std::f64::consts::PI;
use std::fmt::Write as _;
use vtpr::evaluate::RecallMode;
use vtpr::pcnet::{Activation, NetworkConfig, SecondTermSign};
use vtpr::synthworld::{EnvKind, Pose, SensorRig};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub env: EnvKind,
    // trajectory
    pub waypoints: Vec<(f64, f64)>,
    pub step_length: f64,
    pub traj_noise_pos: f64,
    pub traj_noise_theta: f64,
    // sensor rig
    pub n_rays: usize,
    pub fov: f64,
    pub max_view_range: f64,
    pub distance_attenuation: bool,
    pub n_whiskers: usize,
    pub whisker_length: f64,
    pub visual_noise_sigma: f64,
    pub whisker_noise_sigma: f64,
    // network
    pub visual_layers: Vec<usize>,
    pub tactile_layers: Vec<usize>,
    pub multi_size: usize,
    pub activation: Activation,
    pub eta_y: f64,
    pub eta_w: f64,
    pub activity_init: f64,
    pub train_iterations: usize,
    pub train_inner_iterations: usize,
    pub test_max_iterations: usize,
    pub test_decode_threshold: f64,
    pub batch_size: usize,
    pub second_term_sign: SecondTermSign,
    // baseline
    pub pfh_bins: usize,
    pub sda_bins: usize,
    pub profile_downsample: usize,
    // evaluation
    pub tau: f64,
    pub theta_match: f64,
    pub recall_mode: RecallMode,
    pub angle_weight: f64,
    pub sweep_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            env: EnvKind::E1,
            waypoints: vec![(1.2, 1.2), (4.8, 1.2), (4.8, 4.8), (1.2, 4.8), (1.2, 1.2)],
            step_length: 0.1,
            traj_noise_pos: 0.05,
            traj_noise_theta: 0.02,
            n_rays: 60,
            fov: 2.0 * PI / 3.0,
            max_view_range: 8.0,
            distance_attenuation: true,
            n_whiskers: 24,
            whisker_length: 0.25,
            visual_noise_sigma: 0.02,
            whisker_noise_sigma: 0.01,
            visual_layers: vec![64, 32],
            tactile_layers: vec![16],
            multi_size: 24,
            activation: Activation::Identity,
            eta_y: 5e-2,
            eta_w: 1e-3,
            activity_init: 0.1,
            train_iterations: 300,
            train_inner_iterations: 20,
            test_max_iterations: 300,
            test_decode_threshold: 1e-3,
            batch_size: 50,
            second_term_sign: SecondTermSign::TowardPrediction,
            pfh_bins: 16,
            sda_bins: 16,
            profile_downsample: 1,
            tau: 0.3,
            theta_match: 1.0,
            recall_mode: RecallMode::Standard,
            angle_weight: 0.0,
            sweep_points: 50,
        }
    }
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

impl RunConfig {
    /// Load a config file (when given) and apply `--set` overrides on top
    /// of the defaults.
    pub fn resolve(path: Option<&std::path::Path>, sets: &[String]) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", p.display())))?;
            for (ln, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| usage(format!("{}:{}: expected key=value", p.display(), ln + 1)))?;
                cfg.apply(k.trim(), v.trim())?;
            }
        }
        for s in sets {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| usage(format!("--set {s}: expected key=value")))?;
            cfg.apply(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    /// Set one key; rejects unknown keys and unparsable values.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |k: &str, v: &str| usage(format!("bad value `{v}` for key `{k}`"));
        macro_rules! parse {
            ($field:expr, $ty:ty) => {{
                $field = value.parse::<$ty>().map_err(|_| bad(key, value))?;
            }};
        }
        match key {
            "seed" => parse!(self.seed, u64),
            "env" => self.env = EnvKind::parse(value).ok_or_else(|| bad(key, value))?,
            "waypoints" => self.waypoints = parse_waypoints(value).ok_or_else(|| bad(key, value))?,
            "step_length" => parse!(self.step_length, f64),
            "traj_noise_pos" => parse!(self.traj_noise_pos, f64),
            "traj_noise_theta" => parse!(self.traj_noise_theta, f64),
            "n_rays" => parse!(self.n_rays, usize),
            "fov" => parse!(self.fov, f64),
            "max_view_range" => parse!(self.max_view_range, f64),
            "distance_attenuation" => {
                self.distance_attenuation = parse_bool(value).ok_or_else(|| bad(key, value))?
            }
            "n_whiskers" => parse!(self.n_whiskers, usize),
            "whisker_length" => parse!(self.whisker_length, f64),
            "visual_noise_sigma" => parse!(self.visual_noise_sigma, f64),
            "whisker_noise_sigma" => parse!(self.whisker_noise_sigma, f64),
            "visual_layers" => {
                self.visual_layers = parse_usize_list(value).ok_or_else(|| bad(key, value))?
            }
            "tactile_layers" => {
                self.tactile_layers = parse_usize_list(value).ok_or_else(|| bad(key, value))?
            }
            "multi_size" => parse!(self.multi_size, usize),
            "activation" => {
                self.activation = match value {
                    "identity" => Activation::Identity,
                    "tanh" => Activation::Tanh,
                    _ => return Err(bad(key, value)),
                }
            }
            "eta_y" => parse!(self.eta_y, f64),
            "eta_w" => parse!(self.eta_w, f64),
            "activity_init" => parse!(self.activity_init, f64),
            "train_iterations" => parse!(self.train_iterations, usize),
            "train_inner_iterations" => parse!(self.train_inner_iterations, usize),
            "test_max_iterations" => parse!(self.test_max_iterations, usize),
            "test_decode_threshold" => parse!(self.test_decode_threshold, f64),
            "batch_size" => parse!(self.batch_size, usize),
            "second_term_sign" => {
                self.second_term_sign = match value {
                    "toward_prediction" => SecondTermSign::TowardPrediction,
                    "paper_literal" => SecondTermSign::PaperLiteral,
                    _ => return Err(bad(key, value)),
                }
            }
            "pfh_bins" => parse!(self.pfh_bins, usize),
            "sda_bins" => parse!(self.sda_bins, usize),
            "profile_downsample" => parse!(self.profile_downsample, usize),
            "tau" => parse!(self.tau, f64),
            "theta_match" => parse!(self.theta_match, f64),
            "recall_mode" => {
                self.recall_mode = RecallMode::parse(value).ok_or_else(|| bad(key, value))?
            }
            "angle_weight" => parse!(self.angle_weight, f64),
            "sweep_points" => parse!(self.sweep_points, usize),
            _ => return Err(usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// The fully resolved configuration, one line per key.
    pub fn to_text(&self) -> String {
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let wps = self
            .waypoints
            .iter()
            .map(|(x, y)| format!("{x},{y}"))
            .collect::<Vec<_>>()
            .join(";");
        let mut s = String::new();
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "env={}", self.env.name());
        let _ = writeln!(s, "waypoints={wps}");
        let _ = writeln!(s, "step_length={}", self.step_length);
        let _ = writeln!(s, "traj_noise_pos={}", self.traj_noise_pos);
        let _ = writeln!(s, "traj_noise_theta={}", self.traj_noise_theta);
        let _ = writeln!(s, "n_rays={}", self.n_rays);
        let _ = writeln!(s, "fov={}", self.fov);
        let _ = writeln!(s, "max_view_range={}", self.max_view_range);
        let _ = writeln!(s, "distance_attenuation={}", self.distance_attenuation);
        let _ = writeln!(s, "n_whiskers={}", self.n_whiskers);
        let _ = writeln!(s, "whisker_length={}", self.whisker_length);
        let _ = writeln!(s, "visual_noise_sigma={}", self.visual_noise_sigma);
        let _ = writeln!(s, "whisker_noise_sigma={}", self.whisker_noise_sigma);
        let _ = writeln!(s, "visual_layers={}", list(&self.visual_layers));
        let _ = writeln!(s, "tactile_layers={}", list(&self.tactile_layers));
        let _ = writeln!(s, "multi_size={}", self.multi_size);
        let _ = writeln!(s, "activation={}", self.activation.name());
        let _ = writeln!(s, "eta_y={}", self.eta_y);
        let _ = writeln!(s, "eta_w={}", self.eta_w);
        let _ = writeln!(s, "activity_init={}", self.activity_init);
        let _ = writeln!(s, "train_iterations={}", self.train_iterations);
        let _ = writeln!(s, "train_inner_iterations={}", self.train_inner_iterations);
        let _ = writeln!(s, "test_max_iterations={}", self.test_max_iterations);
        let _ = writeln!(s, "test_decode_threshold={}", self.test_decode_threshold);
        let _ = writeln!(s, "batch_size={}", self.batch_size);
        let _ = writeln!(s, "second_term_sign={}", self.second_term_sign.name());
        let _ = writeln!(s, "pfh_bins={}", self.pfh_bins);
        let _ = writeln!(s, "sda_bins={}", self.sda_bins);
        let _ = writeln!(s, "profile_downsample={}", self.profile_downsample);
        let _ = writeln!(s, "tau={}", self.tau);
        let _ = writeln!(s, "theta_match={}", self.theta_match);
        let _ = writeln!(s, "recall_mode={}", self.recall_mode.name());
        let _ = writeln!(s, "angle_weight={}", self.angle_weight);
        let _ = writeln!(s, "sweep_points={}", self.sweep_points);
        s
    }

    pub fn rig(&self) -> SensorRig {
        SensorRig {
            n_rays: self.n_rays,
            fov: self.fov,
            max_view_range: self.max_view_range,
            distance_attenuation: self.distance_attenuation,
            n_whiskers: self.n_whiskers,
            whisker_length: self.whisker_length,
            visual_noise_sigma: self.visual_noise_sigma,
            whisker_noise_sigma: self.whisker_noise_sigma,
        }
    }

    /// Network config with input dimensions taken from the dataset.
    pub fn network(&self, visual_input_dim: usize, tactile_input_dim: usize) -> NetworkConfig {
        NetworkConfig {
            visual_input_dim,
            tactile_input_dim,
            visual_layer_sizes: self.visual_layers.clone(),
            tactile_layer_sizes: self.tactile_layers.clone(),
            multi_size: self.multi_size,
            activation: self.activation,
            eta_y: self.eta_y,
            eta_w: self.eta_w,
            activity_init: self.activity_init,
            train_iterations: self.train_iterations,
            train_inner_iterations: self.train_inner_iterations,
            test_max_iterations: self.test_max_iterations,
            test_decode_threshold: self.test_decode_threshold,
            batch_size: self.batch_size,
            second_term_sign: self.second_term_sign,
            rng_seed: vtpr::seeds::derive_seed(self.seed, "weights"),
        }
    }

    pub fn waypoint_poses(&self) -> Vec<Pose> {
        self.waypoints.iter().map(|&(x, y)| Pose::new(x, y, 0.0)).collect()
    }

    pub fn baseline_params(&self) -> vtpr::baseline::BaselineParams {
        vtpr::baseline::BaselineParams {
            pfh_bins: self.pfh_bins,
            sda_bins: self.sda_bins,
            profile_downsample: self.profile_downsample,
            max_pair_reach: 2.0 * self.whisker_length,
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "1" => Some(true),
        "false" | "0" => Some(false),
        _ => None,
    }
}

fn parse_usize_list(v: &str) -> Option<Vec<usize>> {
    let out: Result<Vec<usize>, _> = v.split(',').map(|t| t.trim().parse::<usize>()).collect();
    out.ok().filter(|l| !l.is_empty())
}

fn parse_waypoints(v: &str) -> Option<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for part in v.split(';') {
        let (x, y) = part.split_once(',')?;
        out.push((x.trim().parse().ok()?, y.trim().parse().ok()?));
    }
    if out.len() >= 2 {
        Some(out)
    } else {
        None
    }
}
