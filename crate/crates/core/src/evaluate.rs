//! Place-recognition scoring.
//!
//! Two template sets A and B (typically two noisy passes over the same
//! route) are compared through a template match error matrix (pairwise
//! feature distances) and a ground truth matrix (pairwise pose
//! distances). Each row of A declares a match at its best column when the
//! match error is at most θ; the declaration is a true positive when the
//! matched poses lie within τ of each other.

use crate::baseline::{handcrafted_distance, HandcraftedTemplate, ScalingFactors};
use crate::pcnet::vector_distance;
use crate::synthworld::{wrap_angle, Pose};
use ndarray::{Array1, Array2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("template sets use different methods ({0} vs {1})")]
    MethodMismatch(&'static str, &'static str),
    #[error("handcrafted distances need scaling factors")]
    MissingScaling,
    #[error("matrix shapes differ: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("template set B is empty")]
    EmptyB,
    #[error("threshold grid is empty")]
    EmptyGrid,
    #[error("template {0} has inconsistent feature shape")]
    InconsistentTemplates(usize),
    #[error(transparent)]
    Feature(#[from] crate::pcnet::PcError),
    #[error(transparent)]
    Baseline(#[from] crate::baseline::BaselineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodTag {
    Learned,
    Handcrafted,
}

impl MethodTag {
    pub fn name(self) -> &'static str {
        match self {
            MethodTag::Learned => "learned",
            MethodTag::Handcrafted => "handcrafted",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "learned" => Some(MethodTag::Learned),
            "handcrafted" => Some(MethodTag::Handcrafted),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TemplateData {
    Learned(Array1<f64>),
    Handcrafted(HandcraftedTemplate),
}

/// A stored feature bound to the pose where it was recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateEntry {
    pub index: usize,
    pub pose: Pose,
    pub data: TemplateData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    pub method: MethodTag,
    pub trajectory_tag: String,
    pub entries: Vec<TemplateEntry>,
}

impl TemplateSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_uniform(&self) -> Result<(), EvalError> {
        let Some(first) = self.entries.first() else { return Ok(()) };
        for (i, e) in self.entries.iter().enumerate().skip(1) {
            let ok = match (&first.data, &e.data) {
                (TemplateData::Learned(a), TemplateData::Learned(b)) => a.len() == b.len(),
                (TemplateData::Handcrafted(a), TemplateData::Handcrafted(b)) => {
                    a.intensity.len() == b.intensity.len()
                        && a.pfh.len() == b.pfh.len()
                        && a.sda.len() == b.sda.len()
                }
                _ => false,
            };
            if !ok {
                return Err(EvalError::InconsistentTemplates(i));
            }
        }
        Ok(())
    }
}

/// Template match error matrix: rows index A, columns index B.
#[derive(Debug, Clone, PartialEq)]
pub struct Tme {
    pub values: Array2<f64>,
}

/// Ground truth pose distance matrix, same indexing as the TME.
#[derive(Debug, Clone, PartialEq)]
pub struct Gtm {
    pub values: Array2<f64>,
}

/// Spatial threshold τ and match-declaration threshold θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchThresholds {
    pub tau: f64,
    pub theta_match: f64,
}

/// Recall denominator convention. The printed form of the source formula
/// divides by FP+FN; that reads like a typo, so standard TP/(TP+FN) is the
/// default and the literal form is kept behind this flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecallMode {
    Standard,
    PaperLiteral,
}

impl RecallMode {
    pub fn name(self) -> &'static str {
        match self {
            RecallMode::Standard => "standard",
            RecallMode::PaperLiteral => "paper_literal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "standard" => Some(RecallMode::Standard),
            "paper_literal" => Some(RecallMode::PaperLiteral),
            _ => None,
        }
    }
}

/// Classification counts and rates for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Scores {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when a rate's denominator was zero and the rate was forced to 0.
    pub degenerate: bool,
}

impl Scores {
    pub fn rows(&self) -> usize {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }
}

fn template_distance(
    a: &TemplateData,
    b: &TemplateData,
    scaling: Option<&ScalingFactors>,
) -> Result<f64, EvalError> {
    match (a, b) {
        (TemplateData::Learned(x), TemplateData::Learned(y)) => {
            Ok(vector_distance(x.view(), y.view())?)
        }
        (TemplateData::Handcrafted(x), TemplateData::Handcrafted(y)) => {
            let s = scaling.ok_or(EvalError::MissingScaling)?;
            Ok(handcrafted_distance(x, y, s)?)
        }
        _ => Err(EvalError::MethodMismatch("learned", "handcrafted")),
    }
}

/// Pairwise feature distances between two template sets of the same
/// method. Handcrafted sets require scaling factors.
pub fn compute_tme(
    a: &TemplateSet,
    b: &TemplateSet,
    scaling: Option<&ScalingFactors>,
) -> Result<Tme, EvalError> {
    if a.method != b.method {
        return Err(EvalError::MethodMismatch(a.method.name(), b.method.name()));
    }
    if a.method == MethodTag::Handcrafted && scaling.is_none() {
        return Err(EvalError::MissingScaling);
    }
    a.check_uniform()?;
    b.check_uniform()?;
    let mut values = Array2::zeros((a.len(), b.len()));
    for (i, ea) in a.entries.iter().enumerate() {
        for (j, eb) in b.entries.iter().enumerate() {
            values[[i, j]] = template_distance(&ea.data, &eb.data, scaling)?;
        }
    }
    Ok(Tme { values })
}

/// Pairwise ground-truth pose distances: Euclidean position gap plus an
/// optional weighted heading gap (0 by default, position only).
pub fn compute_gtm(a: &TemplateSet, b: &TemplateSet, angle_weight: f64) -> Gtm {
    let mut values = Array2::zeros((a.len(), b.len()));
    for (i, ea) in a.entries.iter().enumerate() {
        for (j, eb) in b.entries.iter().enumerate() {
            let pos = ea.pose.position_distance(&eb.pose);
            let ang = wrap_angle(ea.pose.theta - eb.pose.theta).abs();
            values[[i, j]] = pos + angle_weight * ang;
        }
    }
    Gtm { values }
}

/// Classify every row of A against its best match in B.
///
/// Row i declares a match at j* = argmin_j tme(i, j) (ties break to the
/// smallest j) iff tme(i, j*) ≤ θ. Declared matches are TP when
/// gtm(i, j*) ≤ τ, else FP. Undeclared rows are FN when any column lies
/// within τ, else TN.
pub fn classify_matches(tme: &Tme, gtm: &Gtm, th: &MatchThresholds) -> Result<Scores, EvalError> {
    if tme.values.dim() != gtm.values.dim() {
        return Err(EvalError::ShapeMismatch(tme.values.dim(), gtm.values.dim()));
    }
    let (rows, cols) = tme.values.dim();
    if rows > 0 && cols == 0 {
        return Err(EvalError::EmptyB);
    }
    let mut s = Scores::default();
    for i in 0..rows {
        let mut best_j = 0usize;
        let mut best = tme.values[[i, 0]];
        for j in 1..cols {
            if tme.values[[i, j]] < best {
                best = tme.values[[i, j]];
                best_j = j;
            }
        }
        if best <= th.theta_match {
            if gtm.values[[i, best_j]] <= th.tau {
                s.true_pos += 1;
            } else {
                s.false_pos += 1;
            }
        } else if (0..cols).any(|j| gtm.values[[i, j]] <= th.tau) {
            s.false_neg += 1;
        } else {
            s.true_neg += 1;
        }
    }
    Ok(s)
}

/// Fill in precision, recall, and F1 from the counts. Zero denominators
/// produce 0 and set the degenerate flag; the paper-literal recall is
/// reported raw (it can exceed 1) with a warning.
pub fn precision_recall(scores: &Scores, mode: RecallMode) -> Scores {
    let mut out = *scores;
    let tp = scores.true_pos as f64;
    let fp = scores.false_pos as f64;
    let fn_ = scores.false_neg as f64;

    let (precision, p_degenerate) = if tp + fp > 0.0 { (tp / (tp + fp), false) } else { (0.0, true) };
    let recall_denom = match mode {
        RecallMode::Standard => tp + fn_,
        RecallMode::PaperLiteral => fp + fn_,
    };
    let (recall, r_degenerate) =
        if recall_denom > 0.0 { (tp / recall_denom, false) } else { (0.0, true) };
    if mode == RecallMode::PaperLiteral && recall > 1.0 {
        log::warn!("paper-literal recall {recall:.4} exceeds 1; reported raw");
    }

    out.precision = precision;
    out.recall = recall;
    out.degenerate = p_degenerate || r_degenerate;
    out.f1 = f1(precision, recall);
    out
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Classification and scoring across a grid of match thresholds.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<(f64, Scores)>,
    /// Index of the first row attaining the maximum F1.
    pub best: usize,
}

impl SweepResult {
    pub fn best_row(&self) -> (f64, Scores) {
        self.rows[self.best]
    }
}

/// Score every θ in the grid at fixed τ and report the best-F1 row.
pub fn sweep_thresholds(
    tme: &Tme,
    gtm: &Gtm,
    tau: f64,
    theta_grid: &[f64],
    mode: RecallMode,
) -> Result<SweepResult, EvalError> {
    if theta_grid.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    let mut rows = Vec::with_capacity(theta_grid.len());
    for &theta in theta_grid {
        let counts = classify_matches(tme, gtm, &MatchThresholds { tau, theta_match: theta })?;
        rows.push((theta, precision_recall(&counts, mode)));
    }
    let best = rows
        .iter()
        .enumerate()
        .max_by(|(ia, (_, a)), (ib, (_, b))| {
            a.f1.partial_cmp(&b.f1).unwrap().then(ib.cmp(ia))
        })
        .map(|(i, _)| i)
        .unwrap();
    Ok(SweepResult { rows, best })
}

/// Evenly spaced θ grid spanning the TME's value range. The top end is
/// padded a hair so the max entry itself declares.
pub fn default_theta_grid(tme: &Tme, points: usize) -> Vec<f64> {
    let points = points.max(1);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in tme.values.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return vec![0.0];
    }
    if points == 1 || hi == lo {
        return vec![hi];
    }
    let hi = hi + (hi - lo) * 1e-9;
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn learned_set(features: &[Vec<f64>], poses: &[(f64, f64)]) -> TemplateSet {
        TemplateSet {
            method: MethodTag::Learned,
            trajectory_tag: "t".into(),
            entries: features
                .iter()
                .zip(poses)
                .enumerate()
                .map(|(index, (f, &(x, y)))| TemplateEntry {
                    index,
                    pose: Pose::new(x, y, 0.0),
                    data: TemplateData::Learned(Array1::from_vec(f.clone())),
                })
                .collect(),
        }
    }

    #[test]
    fn tme_self_has_zero_diagonal() {
        let s = learned_set(&[vec![0.2, 0.4], vec![0.9, 0.1]], &[(0.0, 0.0), (1.0, 0.0)]);
        let tme = compute_tme(&s, &s, None).unwrap();
        assert_eq!(tme.values[[0, 0]], 0.0);
        assert_eq!(tme.values[[1, 1]], 0.0);
    }

    #[test]
    fn tme_hand_example() {
        let a = learned_set(&[vec![0.0], vec![3.0]], &[(0.0, 0.0), (0.0, 0.0)]);
        let b = learned_set(&[vec![0.0], vec![4.0]], &[(0.0, 0.0), (0.0, 0.0)]);
        let tme = compute_tme(&a, &b, None).unwrap();
        assert_eq!(tme.values, array![[0.0, 4.0], [3.0, 1.0]]);
        let t_ba = compute_tme(&b, &a, None).unwrap();
        assert_eq!(tme.values, t_ba.values.t().to_owned());
    }

    #[test]
    fn tme_rejects_method_mismatch() {
        let a = learned_set(&[vec![0.0]], &[(0.0, 0.0)]);
        let b = TemplateSet {
            method: MethodTag::Handcrafted,
            trajectory_tag: "t".into(),
            entries: vec![],
        };
        assert!(matches!(compute_tme(&a, &b, None), Err(EvalError::MethodMismatch(_, _))));
    }

    #[test]
    fn gtm_examples() {
        let a = learned_set(&[vec![0.0]], &[(0.0, 0.0)]);
        let b = learned_set(&[vec![0.0]], &[(3.0, 4.0)]);
        let g = compute_gtm(&a, &b, 0.0);
        assert_abs_diff_eq!(g.values[[0, 0]], 5.0, epsilon = 1e-15);
        assert_eq!(compute_gtm(&a, &a, 0.0).values[[0, 0]], 0.0);

        // heading-blind at angle_weight 0
        let mut a2 = a.clone();
        a2.entries[0].pose.theta = 2.0;
        assert_eq!(compute_gtm(&a2, &b, 0.0).values, g.values);
        assert!(compute_gtm(&a2, &b, 1.0).values[[0, 0]] > 5.0);
    }

    fn mat(values: Vec<Vec<f64>>) -> Array2<f64> {
        let rows = values.len();
        let cols = values[0].len();
        Array2::from_shape_fn((rows, cols), |(i, j)| values[i][j])
    }

    #[test]
    fn classify_all_tp_with_infinite_theta() {
        let tme = Tme { values: mat(vec![vec![0.5, 2.0], vec![2.0, 0.5]]) };
        let gtm = Gtm { values: mat(vec![vec![0.1, 5.0], vec![5.0, 0.1]]) };
        let s = classify_matches(&tme, &gtm, &MatchThresholds { tau: 0.3, theta_match: f64::INFINITY })
            .unwrap();
        assert_eq!((s.true_pos, s.false_pos, s.false_neg, s.true_neg), (2, 0, 0, 0));
    }

    #[test]
    fn classify_one_aliased_pair_gives_one_fp() {
        // row 1's smallest error points at a spatially distant column
        let tme = Tme {
            values: mat(vec![
                vec![0.1, 1.0, 1.0],
                vec![1.0, 5.0, 0.2], // aliased: best match is column 2, far away
                vec![1.0, 0.1, 1.0],
            ]),
        };
        let gtm = Gtm {
            values: mat(vec![
                vec![0.1, 2.0, 2.0],
                vec![2.0, 0.1, 9.0],
                vec![2.0, 0.2, 2.0],
            ]),
        };
        let th = MatchThresholds { tau: 0.3, theta_match: 0.5 };
        let s = classify_matches(&tme, &gtm, &th).unwrap();
        assert_eq!((s.true_pos, s.false_pos, s.false_neg, s.true_neg), (2, 1, 0, 0));

        // brute-force oracle over rows, written out longhand
        let (mut tp, mut fp, mut fnn, mut tn) = (0, 0, 0, 0);
        for i in 0..3 {
            let mut jstar = 0;
            for j in 0..3 {
                if tme.values[[i, j]] < tme.values[[i, jstar]] {
                    jstar = j;
                }
            }
            if tme.values[[i, jstar]] <= th.theta_match {
                if gtm.values[[i, jstar]] <= th.tau {
                    tp += 1;
                } else {
                    fp += 1;
                }
            } else {
                let mut near = false;
                for j in 0..3 {
                    if gtm.values[[i, j]] <= th.tau {
                        near = true;
                    }
                }
                if near {
                    fnn += 1;
                } else {
                    tn += 1;
                }
            }
        }
        assert_eq!((s.true_pos, s.false_pos, s.false_neg, s.true_neg), (tp, fp, fnn, tn));
    }

    #[test]
    fn classify_zero_theta_gives_all_fn() {
        let tme = Tme { values: mat(vec![vec![0.5, 2.0], vec![2.0, 0.5]]) };
        let gtm = Gtm { values: mat(vec![vec![0.1, 5.0], vec![5.0, 0.1]]) };
        let s =
            classify_matches(&tme, &gtm, &MatchThresholds { tau: 0.3, theta_match: 0.0 }).unwrap();
        assert_eq!((s.true_pos, s.false_pos, s.false_neg, s.true_neg), (0, 0, 2, 0));
    }

    #[test]
    fn counts_partition_rows() {
        let tme = Tme { values: mat(vec![vec![0.5, 2.0], vec![2.0, 0.5], vec![9.0, 9.0]]) };
        let gtm = Gtm { values: mat(vec![vec![0.1, 5.0], vec![5.0, 9.0], vec![9.0, 9.0]]) };
        let s =
            classify_matches(&tme, &gtm, &MatchThresholds { tau: 0.3, theta_match: 1.0 }).unwrap();
        assert_eq!(s.rows(), 3);
    }

    #[test]
    fn precision_recall_examples() {
        let counts = Scores { true_pos: 8, false_pos: 2, false_neg: 2, ..Default::default() };
        let s = precision_recall(&counts, RecallMode::Standard);
        assert_abs_diff_eq!(s.precision, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(s.recall, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(s.f1, 0.8, epsilon = 1e-15);
        assert!(!s.degenerate);

        let lit = precision_recall(&counts, RecallMode::PaperLiteral);
        assert_abs_diff_eq!(lit.recall, 2.0, epsilon = 1e-15); // raw, not clipped

        let empty = precision_recall(&Scores::default(), RecallMode::Standard);
        assert_eq!(empty.precision, 0.0);
        assert_eq!(empty.recall, 0.0);
        assert!(empty.degenerate);
    }

    #[test]
    fn f1_examples() {
        assert_eq!(f1(1.0, 1.0), 1.0);
        assert_abs_diff_eq!(f1(0.8, 0.8), 0.8, epsilon = 1e-15);
        assert_eq!(f1(0.0, 0.7), 0.0);
        assert_eq!(f1(0.0, 0.0), 0.0);
    }

    #[test]
    fn sweep_single_point_matches_classify() {
        let tme = Tme { values: mat(vec![vec![0.5, 2.0], vec![2.0, 0.5]]) };
        let gtm = Gtm { values: mat(vec![vec![0.1, 5.0], vec![5.0, 0.1]]) };
        let sweep = sweep_thresholds(&tme, &gtm, 0.3, &[1.0], RecallMode::Standard).unwrap();
        let counts =
            classify_matches(&tme, &gtm, &MatchThresholds { tau: 0.3, theta_match: 1.0 }).unwrap();
        let direct = precision_recall(&counts, RecallMode::Standard);
        assert_eq!(sweep.rows.len(), 1);
        assert_eq!(sweep.best_row().1, direct);
    }

    #[test]
    fn sweep_best_dominates_and_declared_grows() {
        let tme = Tme {
            values: mat(vec![
                vec![0.1, 1.0, 3.0],
                vec![1.0, 0.4, 3.0],
                vec![3.0, 1.0, 0.7],
            ]),
        };
        let gtm = Gtm {
            values: mat(vec![
                vec![0.1, 2.0, 2.0],
                vec![2.0, 0.1, 2.0],
                vec![2.0, 2.0, 5.0],
            ]),
        };
        let grid: Vec<f64> = (0..20).map(|i| i as f64 * 0.2).collect();
        let sweep = sweep_thresholds(&tme, &gtm, 0.3, &grid, RecallMode::Standard).unwrap();
        let best_f1 = sweep.best_row().1.f1;
        let mut declared_prev = 0;
        for (_, s) in &sweep.rows {
            assert!(s.f1 <= best_f1 + 1e-15);
            let declared = s.true_pos + s.false_pos;
            assert!(declared >= declared_prev, "declared count not monotone");
            declared_prev = declared;
        }
        assert!(matches!(
            sweep_thresholds(&tme, &gtm, 0.3, &[], RecallMode::Standard),
            Err(EvalError::EmptyGrid)
        ));
    }
}
