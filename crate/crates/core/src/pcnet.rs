//! Predictive coding network for joint visuo-tactile features.
//!
//! The network has three modules: a visual chain, a tactile chain, and a
//! single multi-sensory layer sitting on top of both chains. Every layer
//! holds an activity vector and predicts the activity of the layer below
//! it through a weight matrix; the bottom of each chain predicts the
//! clamped sensory input. Inference repeatedly nudges activities to
//! reduce local prediction errors, and learning nudges weights with a
//! local Hebbian-style rule on the same errors. Nothing is backpropagated
//! across layers: each update reads only the two errors adjacent to it.
//!
//! After inference settles, the multi-sensory activity vector is the
//! place feature; [`feature_distance`] compares two of them with an L2
//! norm.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Errors from network construction, inference, and training.
#[derive(Debug, Error)]
pub enum PcError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid network config: {0}")]
    InvalidConfig(String),
    #[error("non-finite activity in {layer} — inference diverged")]
    Divergence { layer: String },
    #[error("training dataset is empty")]
    EmptyDataset,
}

/// Elementwise activation applied to layer predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    /// φ(x) = x. Makes the activity update an exact gradient step on the
    /// summed squared prediction errors.
    Identity,
    /// φ(x) = tanh(x), with the update formulas applied literally
    /// (no φ′ factor), mirroring the plain local rules.
    Tanh,
}

impl Activation {
    fn apply(self, v: &mut Array1<f64>) {
        if self == Activation::Tanh {
            v.mapv_inplace(f64::tanh);
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Tanh => "tanh",
        }
    }
}

/// Sign of the self-prediction term in the activity update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecondTermSign {
    /// −(y − ŷ): moves the layer toward the prediction it receives from
    /// above; the exact gradient-descent direction. Default.
    TowardPrediction,
    /// +(y − ŷ): the literal published rule, kept for faithfulness
    /// experiments.
    PaperLiteral,
}

impl SecondTermSign {
    fn factor(self) -> f64 {
        match self {
            SecondTermSign::TowardPrediction => -1.0,
            SecondTermSign::PaperLiteral => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SecondTermSign::TowardPrediction => "toward_prediction",
            SecondTermSign::PaperLiteral => "paper_literal",
        }
    }
}

/// Network hyperparameters. Input dimensions are fixed by the dataset and
/// recorded here alongside the architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub visual_input_dim: usize,
    pub tactile_input_dim: usize,
    /// Hidden layer sizes of the visual chain, bottom → top.
    pub visual_layer_sizes: Vec<usize>,
    /// Hidden layer sizes of the tactile chain, bottom → top.
    pub tactile_layer_sizes: Vec<usize>,
    pub multi_size: usize,
    pub activation: Activation,
    /// Activity learning rate η_y.
    pub eta_y: f64,
    /// Weight learning rate η_w.
    pub eta_w: f64,
    /// Every activity starts at this value before inference.
    pub activity_init: f64,
    /// Outer training iterations (full passes over the mini-batches).
    pub train_iterations: usize,
    /// Activity steps run per sample inside each training iteration.
    pub train_inner_iterations: usize,
    /// Activity step cap for test-time inference.
    pub test_max_iterations: usize,
    /// Test-time inference stops early once every boundary's mean squared
    /// prediction error drops below this.
    pub test_decode_threshold: f64,
    pub batch_size: usize,
    pub second_term_sign: SecondTermSign,
    pub rng_seed: u64,
}

impl NetworkConfig {
    /// Small configuration sized for quick CPU runs.
    pub fn desk() -> Self {
        NetworkConfig {
            visual_input_dim: 60,
            tactile_input_dim: 24,
            visual_layer_sizes: vec![64, 32],
            tactile_layer_sizes: vec![16],
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
            rng_seed: 0,
        }
    }

    /// Full-scale configuration matching the original experiments
    /// (1000/300 visual, 100 tactile, 200 multi-sensory neurons,
    /// mini-batch 150, 10000 iterations, rates 4e-4).
    pub fn full_scale() -> Self {
        NetworkConfig {
            visual_input_dim: 60,
            tactile_input_dim: 24,
            visual_layer_sizes: vec![1000, 300],
            tactile_layer_sizes: vec![100],
            multi_size: 200,
            activation: Activation::Identity,
            eta_y: 4e-4,
            eta_w: 4e-4,
            activity_init: 0.1,
            train_iterations: 10_000,
            train_inner_iterations: 20,
            test_max_iterations: 3000,
            test_decode_threshold: 1e-3,
            batch_size: 150,
            second_term_sign: SecondTermSign::TowardPrediction,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), PcError> {
        if self.visual_input_dim == 0 || self.tactile_input_dim == 0 {
            return Err(PcError::InvalidConfig("input dimensions must be >= 1".into()));
        }
        if self.visual_layer_sizes.is_empty() || self.tactile_layer_sizes.is_empty() {
            return Err(PcError::InvalidConfig("each chain needs at least one layer".into()));
        }
        if self.visual_layer_sizes.iter().chain(&self.tactile_layer_sizes).any(|&s| s == 0)
            || self.multi_size == 0
        {
            return Err(PcError::InvalidConfig("layer sizes must be >= 1".into()));
        }
        if !(self.eta_y > 0.0) || !(self.eta_w > 0.0) {
            return Err(PcError::InvalidConfig("eta_y and eta_w must be > 0".into()));
        }
        if self.batch_size == 0 {
            return Err(PcError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.train_iterations == 0 || self.test_max_iterations == 0 {
            return Err(PcError::InvalidConfig("iteration counts must be >= 1".into()));
        }
        if !(self.test_decode_threshold > 0.0) {
            return Err(PcError::InvalidConfig("test_decode_threshold must be > 0".into()));
        }
        Ok(())
    }

    /// Number of layer boundaries carrying a prediction: one per visual
    /// layer plus the visual-top/multi boundary, then the same for the
    /// tactile chain.
    pub fn boundary_count(&self) -> usize {
        self.visual_layer_sizes.len() + 1 + self.tactile_layer_sizes.len() + 1
    }
}

/// One paired stimulus presented to the network.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorySample {
    pub visual: Array1<f64>,
    pub tactile: Array1<f64>,
}

impl SensorySample {
    pub fn new(visual: Array1<f64>, tactile: Array1<f64>) -> Self {
        SensorySample { visual, tactile }
    }
}

/// All prediction weight matrices. Matrix `l` of a chain maps layer-l
/// activity (rows) to a prediction of layer-(l−1) activity (columns),
/// with layer 0 being the sensory input.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    pub visual: Vec<Array2<f64>>,
    pub tactile: Vec<Array2<f64>>,
    pub multi_to_visual: Array2<f64>,
    pub multi_to_tactile: Array2<f64>,
}

fn chain_shapes(input_dim: usize, sizes: &[usize]) -> Vec<(usize, usize)> {
    let mut shapes = Vec::with_capacity(sizes.len());
    let mut below = input_dim;
    for &s in sizes {
        shapes.push((s, below));
        below = s;
    }
    shapes
}

impl WeightSet {
    pub fn zeros(cfg: &NetworkConfig) -> Self {
        Self::from_fn(cfg, &mut |_, _| 0.0)
    }

    /// Weights drawn uniformly from [−0.1, 0.1) with the config seed;
    /// matrices are filled in declared order, row-major.
    pub fn seeded(cfg: &NetworkConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        Self::from_fn(cfg, &mut |_, _| rng.gen_range(-0.1..0.1))
    }

    fn from_fn(cfg: &NetworkConfig, f: &mut impl FnMut(usize, usize) -> f64) -> Self {
        let build = |shapes: Vec<(usize, usize)>, f: &mut dyn FnMut(usize, usize) -> f64| {
            shapes
                .into_iter()
                .map(|(r, c)| Array2::from_shape_fn((r, c), |(i, j)| f(i, j)))
                .collect::<Vec<_>>()
        };
        let visual = build(chain_shapes(cfg.visual_input_dim, &cfg.visual_layer_sizes), f);
        let tactile = build(chain_shapes(cfg.tactile_input_dim, &cfg.tactile_layer_sizes), f);
        let top_v = *cfg.visual_layer_sizes.last().unwrap();
        let top_t = *cfg.tactile_layer_sizes.last().unwrap();
        let multi_to_visual = Array2::from_shape_fn((cfg.multi_size, top_v), |(i, j)| f(i, j));
        let multi_to_tactile = Array2::from_shape_fn((cfg.multi_size, top_t), |(i, j)| f(i, j));
        WeightSet { visual, tactile, multi_to_visual, multi_to_tactile }
    }

    pub fn validate_shapes(&self, cfg: &NetworkConfig) -> Result<(), PcError> {
        let check_chain = |mats: &[Array2<f64>], input: usize, sizes: &[usize], name: &str| {
            let expect = chain_shapes(input, sizes);
            if mats.len() != expect.len() {
                return Err(PcError::ShapeMismatch(format!(
                    "{name} chain has {} matrices, config declares {}",
                    mats.len(),
                    expect.len()
                )));
            }
            for (i, (m, &(r, c))) in mats.iter().zip(&expect).enumerate() {
                if m.dim() != (r, c) {
                    return Err(PcError::ShapeMismatch(format!(
                        "{name} weight {i} is {:?}, expected ({r}, {c})",
                        m.dim()
                    )));
                }
            }
            Ok(())
        };
        check_chain(&self.visual, cfg.visual_input_dim, &cfg.visual_layer_sizes, "visual")?;
        check_chain(&self.tactile, cfg.tactile_input_dim, &cfg.tactile_layer_sizes, "tactile")?;
        let top_v = *cfg.visual_layer_sizes.last().unwrap();
        let top_t = *cfg.tactile_layer_sizes.last().unwrap();
        if self.multi_to_visual.dim() != (cfg.multi_size, top_v) {
            return Err(PcError::ShapeMismatch(format!(
                "multi→visual weight is {:?}, expected ({}, {top_v})",
                self.multi_to_visual.dim(),
                cfg.multi_size
            )));
        }
        if self.multi_to_tactile.dim() != (cfg.multi_size, top_t) {
            return Err(PcError::ShapeMismatch(format!(
                "multi→tactile weight is {:?}, expected ({}, {top_t})",
                self.multi_to_tactile.dim(),
                cfg.multi_size
            )));
        }
        Ok(())
    }

    /// Matrices in declared order: visual chain bottom→top, tactile chain
    /// bottom→top, multi→visual, multi→tactile.
    pub fn matrices(&self) -> Vec<&Array2<f64>> {
        let mut v: Vec<&Array2<f64>> = self.visual.iter().collect();
        v.extend(self.tactile.iter());
        v.push(&self.multi_to_visual);
        v.push(&self.multi_to_tactile);
        v
    }

    pub fn check_finite(&self) -> Result<(), PcError> {
        for (idx, m) in self.matrices().iter().enumerate() {
            if m.iter().any(|x| !x.is_finite()) {
                return Err(PcError::Divergence { layer: format!("weight matrix {idx}") });
            }
        }
        Ok(())
    }
}

/// Per-layer activity vectors for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub visual: Vec<Array1<f64>>,
    pub tactile: Vec<Array1<f64>>,
    pub multi: Array1<f64>,
}

impl NetworkState {
    pub fn constant(cfg: &NetworkConfig, value: f64) -> Self {
        NetworkState {
            visual: cfg.visual_layer_sizes.iter().map(|&s| Array1::from_elem(s, value)).collect(),
            tactile: cfg.tactile_layer_sizes.iter().map(|&s| Array1::from_elem(s, value)).collect(),
            multi: Array1::from_elem(cfg.multi_size, value),
        }
    }
}

/// A place feature: the settled multi-sensory activity.
#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub values: Array1<f64>,
    pub iterations_used: usize,
    /// Boundary mean squared prediction errors at the end of inference,
    /// visual chain bottom→top then tactile chain bottom→top.
    pub final_decode_errors: Vec<f64>,
}

/// Per-iteration mean input-reconstruction error of each sensory module.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub visual_input_mse: Vec<f64>,
    pub tactile_input_mse: Vec<f64>,
}

/// Inference mode: training runs a fixed number of activity steps, testing
/// iterates until every boundary decodes below the threshold or the cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InferMode {
    Train,
    Test,
}

/// Result of running inference on one sample.
#[derive(Debug, Clone)]
pub struct InferOutcome {
    pub state: NetworkState,
    /// Input-reconstruction MSE after each activity step, (visual, tactile).
    pub trace: Vec<(f64, f64)>,
    pub iterations_used: usize,
    pub final_decode_errors: Vec<f64>,
}

/// Predict the layer below: φ(upper ᵀ · weights)ᵀ.
pub fn predict_layer(
    upper: &Array1<f64>,
    weights: &Array2<f64>,
    activation: Activation,
) -> Result<Array1<f64>, PcError> {
    if upper.len() != weights.nrows() {
        return Err(PcError::ShapeMismatch(format!(
            "upper activity has length {}, weight matrix has {} rows",
            upper.len(),
            weights.nrows()
        )));
    }
    let mut pred = weights.t().dot(upper);
    activation.apply(&mut pred);
    Ok(pred)
}

/// Prediction errors of one chain, bottom to top. `errors[l]` is
/// y(l) − ŷ(l) where level 0 is the clamped input and ŷ comes from the
/// level above. When `top_down` is `None` the chain top receives no
/// prediction and the list stops at level L−1.
fn chain_errors(
    input: &Array1<f64>,
    activities: &[Array1<f64>],
    weights: &[Array2<f64>],
    top_down: Option<&Array1<f64>>,
    activation: Activation,
) -> Result<Vec<Array1<f64>>, PcError> {
    debug_assert_eq!(activities.len(), weights.len());
    let levels = activities.len();
    let mut errors = Vec::with_capacity(levels + 1);
    for l in 0..levels {
        let below: &Array1<f64> = if l == 0 { input } else { &activities[l - 1] };
        let pred = predict_layer(&activities[l], &weights[l], activation)?;
        errors.push(below - &pred);
    }
    if let Some(pred_top) = top_down {
        errors.push(&activities[levels - 1] - pred_top);
    }
    Ok(errors)
}

/// Activity deltas for the hidden levels of one chain. Level l receives
/// η_y·(W_l·e(l−1) + s·e(l)); the self term is dropped when the chain has
/// no prediction coming from above.
fn chain_updates(
    errors: &[Array1<f64>],
    weights: &[Array2<f64>],
    eta_y: f64,
    sign: f64,
) -> Vec<Array1<f64>> {
    let levels = weights.len();
    let mut deltas = Vec::with_capacity(levels);
    for l in 0..levels {
        let mut delta = weights[l].dot(&errors[l]);
        if l + 1 < errors.len() {
            delta.scaled_add(sign, &errors[l + 1]);
        }
        deltas.push(delta * eta_y);
    }
    deltas
}

fn check_layer_finite(v: &Array1<f64>, layer: &str) -> Result<(), PcError> {
    if v.iter().any(|x| !x.is_finite()) {
        Err(PcError::Divergence { layer: layer.to_string() })
    } else {
        Ok(())
    }
}

struct AllErrors {
    visual: Vec<Array1<f64>>,
    tactile: Vec<Array1<f64>>,
}

fn all_errors(
    state: &NetworkState,
    sample: &SensorySample,
    weights: &WeightSet,
    cfg: &NetworkConfig,
) -> Result<AllErrors, PcError> {
    let pred_vtop = predict_layer(&state.multi, &weights.multi_to_visual, cfg.activation)?;
    let pred_ttop = predict_layer(&state.multi, &weights.multi_to_tactile, cfg.activation)?;
    let visual = chain_errors(
        &sample.visual,
        &state.visual,
        &weights.visual,
        Some(&pred_vtop),
        cfg.activation,
    )?;
    let tactile = chain_errors(
        &sample.tactile,
        &state.tactile,
        &weights.tactile,
        Some(&pred_ttop),
        cfg.activation,
    )?;
    Ok(AllErrors { visual, tactile })
}

/// One synchronous activity update. Every layer's new activity is computed
/// from the pre-step state; the sensory inputs are clamped and never move.
/// The multi-sensory layer has nothing above it and integrates only the
/// two bottom-up error terms.
pub fn activity_step(
    state: &NetworkState,
    sample: &SensorySample,
    weights: &WeightSet,
    cfg: &NetworkConfig,
) -> Result<NetworkState, PcError> {
    let errs = all_errors(state, sample, weights, cfg)?;
    apply_updates(state, &errs, weights, cfg)
}

fn apply_updates(
    state: &NetworkState,
    errs: &AllErrors,
    weights: &WeightSet,
    cfg: &NetworkConfig,
) -> Result<NetworkState, PcError> {
    let sign = cfg.second_term_sign.factor();

    let dv = chain_updates(&errs.visual, &weights.visual, cfg.eta_y, sign);
    let dt = chain_updates(&errs.tactile, &weights.tactile, cfg.eta_y, sign);

    let mut next = state.clone();
    for (l, d) in dv.into_iter().enumerate() {
        next.visual[l] += &d;
        check_layer_finite(&next.visual[l], &format!("visual layer {}", l + 1))?;
    }
    for (l, d) in dt.into_iter().enumerate() {
        next.tactile[l] += &d;
        check_layer_finite(&next.tactile[l], &format!("tactile layer {}", l + 1))?;
    }

    let top_v_err = &errs.visual[errs.visual.len() - 1];
    let top_t_err = &errs.tactile[errs.tactile.len() - 1];
    let mut d_multi = weights.multi_to_visual.dot(top_v_err);
    d_multi += &weights.multi_to_tactile.dot(top_t_err);
    next.multi.scaled_add(cfg.eta_y, &d_multi);
    check_layer_finite(&next.multi, "multi")?;

    Ok(next)
}

fn mse(v: &Array1<f64>) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64
    }
}

impl AllErrors {
    fn decode(&self) -> Vec<f64> {
        self.visual.iter().chain(self.tactile.iter()).map(mse).collect()
    }
}

/// Mean squared prediction error at every layer boundary, visual chain
/// bottom→top (input boundary first) then tactile chain bottom→top. The
/// last entry of each chain is its boundary with the multi-sensory layer.
pub fn decode_errors(
    state: &NetworkState,
    sample: &SensorySample,
    weights: &WeightSet,
    cfg: &NetworkConfig,
) -> Result<Vec<f64>, PcError> {
    Ok(all_errors(state, sample, weights, cfg)?.decode())
}

/// Run inference on one sample from the constant activity init.
///
/// Train mode performs exactly `train_inner_iterations` activity steps.
/// Test mode checks the decode errors before every step and stops as soon
/// as all of them fall below `test_decode_threshold`, or after
/// `test_max_iterations` steps.
pub fn infer(
    sample: &SensorySample,
    weights: &WeightSet,
    cfg: &NetworkConfig,
    mode: InferMode,
) -> Result<InferOutcome, PcError> {
    cfg.validate()?;
    weights.validate_shapes(cfg)?;
    if sample.visual.len() != cfg.visual_input_dim || sample.tactile.len() != cfg.tactile_input_dim
    {
        return Err(PcError::ShapeMismatch(format!(
            "sample dims ({}, {}) do not match config inputs ({}, {})",
            sample.visual.len(),
            sample.tactile.len(),
            cfg.visual_input_dim,
            cfg.tactile_input_dim
        )));
    }

    let raw = infer_raw(sample, weights, cfg, mode)?;
    let final_decode_errors = raw.errors.decode();
    Ok(InferOutcome {
        state: raw.state,
        trace: raw.trace,
        iterations_used: raw.iterations,
        final_decode_errors,
    })
}

struct InferRaw {
    state: NetworkState,
    /// Boundary errors of the final state, reusable for weight updates.
    errors: AllErrors,
    trace: Vec<(f64, f64)>,
    iterations: usize,
}

fn infer_raw(
    sample: &SensorySample,
    weights: &WeightSet,
    cfg: &NetworkConfig,
    mode: InferMode,
) -> Result<InferRaw, PcError> {
    let tactile_idx = cfg.visual_layer_sizes.len() + 1;
    let mut state = NetworkState::constant(cfg, cfg.activity_init);
    let mut errs = all_errors(&state, sample, weights, cfg)?;
    let mut trace = Vec::new();
    let mut iterations = 0usize;

    loop {
        match mode {
            InferMode::Train => {
                if iterations >= cfg.train_inner_iterations {
                    break;
                }
            }
            InferMode::Test => {
                let decode = errs.decode();
                if decode.iter().all(|&e| e < cfg.test_decode_threshold)
                    || iterations >= cfg.test_max_iterations
                {
                    break;
                }
            }
        }
        state = apply_updates(&state, &errs, weights, cfg)?;
        iterations += 1;
        errs = all_errors(&state, sample, weights, cfg)?;
        let decode = errs.decode();
        trace.push((decode[0], decode[tactile_idx]));
    }

    Ok(InferRaw { state, errors: errs, trace, iterations })
}

/// Weight increments y(l) ⊗ e(l−1) for every boundary (unscaled).
fn weight_deltas(state: &NetworkState, errs: &AllErrors) -> WeightSet {
    let outer = |upper: &Array1<f64>, err_below: &Array1<f64>| -> Array2<f64> {
        let n = upper.len();
        let m = err_below.len();
        Array2::from_shape_fn((n, m), |(i, j)| upper[i] * err_below[j])
    };

    let chain = |acts: &[Array1<f64>], errors: &[Array1<f64>]| -> Vec<Array2<f64>> {
        (0..acts.len()).map(|l| outer(&acts[l], &errors[l])).collect()
    };

    WeightSet {
        visual: chain(&state.visual, &errs.visual),
        tactile: chain(&state.tactile, &errs.tactile),
        multi_to_visual: outer(&state.multi, &errs.visual[errs.visual.len() - 1]),
        multi_to_tactile: outer(&state.multi, &errs.tactile[errs.tactile.len() - 1]),
    }
}

fn add_scaled(target: &mut WeightSet, delta: &WeightSet, scale: f64) {
    for (t, d) in target.visual.iter_mut().zip(&delta.visual) {
        t.scaled_add(scale, d);
    }
    for (t, d) in target.tactile.iter_mut().zip(&delta.tactile) {
        t.scaled_add(scale, d);
    }
    target.multi_to_visual.scaled_add(scale, &delta.multi_to_visual);
    target.multi_to_tactile.scaled_add(scale, &delta.multi_to_tactile);
}

/// One local weight update from a single sample's settled state:
/// W(l,l−1) += η_w · y(l) · (y(l−1) − ŷ(l−1))ᵀ for every boundary.
pub fn weight_step(
    state: &NetworkState,
    sample: &SensorySample,
    weights: &WeightSet,
    cfg: &NetworkConfig,
) -> Result<WeightSet, PcError> {
    let errs = all_errors(state, sample, weights, cfg)?;
    let delta = weight_deltas(state, &errs);
    let mut next = weights.clone();
    add_scaled(&mut next, &delta, cfg.eta_w);
    next.check_finite()?;
    Ok(next)
}

/// Train the network on a dataset of paired stimuli.
///
/// Weights start from the seeded uniform init. Each outer iteration walks
/// the dataset in mini-batches; every sample in a batch is inferred in
/// train mode, the per-sample weight increments are averaged, and the
/// batch average is applied once. Deterministic for a fixed seed.
pub fn train(samples: &[SensorySample], cfg: &NetworkConfig) -> Result<(WeightSet, TrainLog), PcError> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(PcError::EmptyDataset);
    }
    for (i, s) in samples.iter().enumerate() {
        if s.visual.len() != cfg.visual_input_dim || s.tactile.len() != cfg.tactile_input_dim {
            return Err(PcError::ShapeMismatch(format!(
                "sample {i} dims ({}, {}) do not match config inputs ({}, {})",
                s.visual.len(),
                s.tactile.len(),
                cfg.visual_input_dim,
                cfg.tactile_input_dim
            )));
        }
    }

    let mut weights = WeightSet::seeded(cfg);
    let mut log = TrainLog::default();

    for _ in 0..cfg.train_iterations {
        let mut sum_v = 0.0;
        let mut sum_t = 0.0;
        for batch in samples.chunks(cfg.batch_size) {
            let mut acc = WeightSet::zeros(cfg);
            for sample in batch {
                let raw = infer_raw(sample, &weights, cfg, InferMode::Train)?;
                let delta = weight_deltas(&raw.state, &raw.errors);
                add_scaled(&mut acc, &delta, 1.0);
                sum_v += mse(&raw.errors.visual[0]);
                sum_t += mse(&raw.errors.tactile[0]);
            }
            add_scaled(&mut weights, &acc, cfg.eta_w / batch.len() as f64);
            weights.check_finite()?;
        }
        let n = samples.len() as f64;
        log.visual_input_mse.push(sum_v / n);
        log.tactile_input_mse.push(sum_t / n);
    }

    Ok((weights, log))
}

/// Extract the place feature for one stimulus with frozen weights.
pub fn extract_feature(
    sample: &SensorySample,
    weights: &WeightSet,
    cfg: &NetworkConfig,
) -> Result<Feature, PcError> {
    let out = infer(sample, weights, cfg, InferMode::Test)?;
    Ok(Feature {
        values: out.state.multi,
        iterations_used: out.iterations_used,
        final_decode_errors: out.final_decode_errors,
    })
}

/// L2 distance between two equal-length vectors.
pub fn vector_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> Result<f64, PcError> {
    if a.len() != b.len() {
        return Err(PcError::ShapeMismatch(format!(
            "feature lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

/// Pairwise feature distance: the L2 norm of the difference.
pub fn feature_distance(a: &Feature, b: &Feature) -> Result<f64, PcError> {
    vector_distance(a.values.view(), b.values.view())
}
