//! File formats: model binary, dataset CSV, template sets, matrices
//! (CSV + PGM heatmaps), and score reports.
//!
//! Everything is written atomically (temp file + rename), little-endian,
//! UTF-8 with LF line endings. Reals in text formats use 17 significant
//! digits, which round-trips every f64 exactly.
//!
//! Model file layout (`.mspc`):
//!
//! ```text
//! "MSPC"              4 bytes magic
//! version             1 byte, currently 1
//! config length       u32 LE
//! config block        key=value lines, fixed order
//! matrices            u32 LE rows, u32 LE cols, rows·cols f64 LE each,
//!                     in declared order (visual chain, tactile chain,
//!                     multi→visual, multi→tactile)
//! checksum            CRC-32 of all preceding bytes, u32 LE
//! ```

use crate::baseline::{HandcraftedTemplate, ScalingFactors};
use crate::evaluate::{MethodTag, Scores, TemplateData, TemplateEntry, TemplateSet};
use crate::pcnet::{Activation, NetworkConfig, SecondTermSign, WeightSet};
use crate::synthworld::{Observation, Pose};
use ndarray::{Array1, Array2};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic: not a model file")]
    BadMagic,
    #[error("unsupported model format version {found}")]
    VersionMismatch { found: u8 },
    #[error("checksum mismatch: file is corrupt")]
    ChecksumMismatch,
    #[error("file is truncated")]
    Truncated,
    #[error("stored shapes do not match the stored config: {0}")]
    ShapeMismatch(String),
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("refusing to write non-finite value in {0}")]
    NonFinite(String),
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("invalid data: {0}")]
    Invalid(String),
}

const MODEL_MAGIC: &[u8; 4] = b"MSPC";
const MODEL_VERSION: u8 = 1;

/// Serialize a float with 17 significant digits (exact f64 round-trip).
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Atomically replace `path` with `bytes` (write to a temp file in the
/// same directory, then rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PersistError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| PersistError::Io(e.error))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Model file
// ---------------------------------------------------------------------------

fn config_to_block(cfg: &NetworkConfig) -> String {
    let join = |v: &[usize]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
    let mut s = String::new();
    let _ = writeln!(s, "visual_input_dim={}", cfg.visual_input_dim);
    let _ = writeln!(s, "tactile_input_dim={}", cfg.tactile_input_dim);
    let _ = writeln!(s, "visual_layer_sizes={}", join(&cfg.visual_layer_sizes));
    let _ = writeln!(s, "tactile_layer_sizes={}", join(&cfg.tactile_layer_sizes));
    let _ = writeln!(s, "multi_size={}", cfg.multi_size);
    let _ = writeln!(s, "activation={}", cfg.activation.name());
    let _ = writeln!(s, "eta_y={}", cfg.eta_y);
    let _ = writeln!(s, "eta_w={}", cfg.eta_w);
    let _ = writeln!(s, "activity_init={}", cfg.activity_init);
    let _ = writeln!(s, "train_iterations={}", cfg.train_iterations);
    let _ = writeln!(s, "train_inner_iterations={}", cfg.train_inner_iterations);
    let _ = writeln!(s, "test_max_iterations={}", cfg.test_max_iterations);
    let _ = writeln!(s, "test_decode_threshold={}", cfg.test_decode_threshold);
    let _ = writeln!(s, "batch_size={}", cfg.batch_size);
    let _ = writeln!(s, "second_term_sign={}", cfg.second_term_sign.name());
    let _ = writeln!(s, "rng_seed={}", cfg.rng_seed);
    s
}

fn config_from_block(block: &str) -> Result<NetworkConfig, PersistError> {
    let bad = |k: &str| PersistError::BadHeader(format!("bad or missing config key `{k}`"));
    let mut map = std::collections::BTreeMap::new();
    for line in block.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            PersistError::BadHeader(format!("config line without `=`: {line}"))
        })?;
        map.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| map.get(k).ok_or_else(|| bad(k));
    let usize_of = |k: &str| -> Result<usize, PersistError> {
        get(k)?.parse::<usize>().map_err(|_| bad(k))
    };
    let f64_of =
        |k: &str| -> Result<f64, PersistError> { get(k)?.parse::<f64>().map_err(|_| bad(k)) };
    let list_of = |k: &str| -> Result<Vec<usize>, PersistError> {
        get(k)?
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad(k)))
            .collect()
    };
    let activation = match get("activation")?.as_str() {
        "identity" => Activation::Identity,
        "tanh" => Activation::Tanh,
        _ => return Err(bad("activation")),
    };
    let second_term_sign = match get("second_term_sign")?.as_str() {
        "toward_prediction" => SecondTermSign::TowardPrediction,
        "paper_literal" => SecondTermSign::PaperLiteral,
        _ => return Err(bad("second_term_sign")),
    };
    Ok(NetworkConfig {
        visual_input_dim: usize_of("visual_input_dim")?,
        tactile_input_dim: usize_of("tactile_input_dim")?,
        visual_layer_sizes: list_of("visual_layer_sizes")?,
        tactile_layer_sizes: list_of("tactile_layer_sizes")?,
        multi_size: usize_of("multi_size")?,
        activation,
        eta_y: f64_of("eta_y")?,
        eta_w: f64_of("eta_w")?,
        activity_init: f64_of("activity_init")?,
        train_iterations: usize_of("train_iterations")?,
        train_inner_iterations: usize_of("train_inner_iterations")?,
        test_max_iterations: usize_of("test_max_iterations")?,
        test_decode_threshold: f64_of("test_decode_threshold")?,
        batch_size: usize_of("batch_size")?,
        second_term_sign,
        rng_seed: get("rng_seed")?.parse::<u64>().map_err(|_| bad("rng_seed"))?,
    })
}

fn push_matrix(buf: &mut Vec<u8>, m: &Array2<f64>) {
    buf.extend_from_slice(&(m.nrows() as u32).to_le_bytes());
    buf.extend_from_slice(&(m.ncols() as u32).to_le_bytes());
    for &v in m.iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn save_model(
    weights: &WeightSet,
    cfg: &NetworkConfig,
    path: &Path,
) -> Result<(), PersistError> {
    weights
        .validate_shapes(cfg)
        .map_err(|e| PersistError::ShapeMismatch(e.to_string()))?;
    let mut buf = Vec::new();
    buf.extend_from_slice(MODEL_MAGIC);
    buf.push(MODEL_VERSION);
    let block = config_to_block(cfg);
    buf.extend_from_slice(&(block.len() as u32).to_le_bytes());
    buf.extend_from_slice(block.as_bytes());
    for m in weights.matrices() {
        push_matrix(&mut buf, m);
    }
    let mut hasher = crc32fast::Hasher::new();
    hasher.update(&buf);
    buf.extend_from_slice(&hasher.finalize().to_le_bytes());
    write_atomic(path, &buf)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], PersistError> {
        if self.pos + n > self.bytes.len() {
            return Err(PersistError::Truncated);
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, PersistError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn matrix(&mut self) -> Result<Array2<f64>, PersistError> {
        let rows = self.u32()? as usize;
        let cols = self.u32()? as usize;
        let raw = self.take(rows * cols * 8)?;
        let values: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Array2::from_shape_vec((rows, cols), values)
            .map_err(|e| PersistError::ShapeMismatch(e.to_string()))
    }
}

pub fn load_model(path: &Path) -> Result<(WeightSet, NetworkConfig), PersistError> {
    let bytes = std::fs::read(path)?;
    let mut r = Reader { bytes: &bytes, pos: 0 };
    if r.take(4)? != MODEL_MAGIC {
        return Err(PersistError::BadMagic);
    }
    let version = r.take(1)?[0];
    if version != MODEL_VERSION {
        return Err(PersistError::VersionMismatch { found: version });
    }
    let block_len = r.u32()? as usize;
    let block = std::str::from_utf8(r.take(block_len)?)
        .map_err(|_| PersistError::BadHeader("config block is not UTF-8".into()))?
        .to_string();
    let cfg = config_from_block(&block)?;

    let mut visual = Vec::with_capacity(cfg.visual_layer_sizes.len());
    for _ in 0..cfg.visual_layer_sizes.len() {
        visual.push(r.matrix()?);
    }
    let mut tactile = Vec::with_capacity(cfg.tactile_layer_sizes.len());
    for _ in 0..cfg.tactile_layer_sizes.len() {
        tactile.push(r.matrix()?);
    }
    let multi_to_visual = r.matrix()?;
    let multi_to_tactile = r.matrix()?;

    let payload_len = r.pos;
    let stored = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
    if r.pos != bytes.len() {
        return Err(PersistError::Truncated); // trailing garbage
    }
    let mut hasher = crc32fast::Hasher::new();
    hasher.update(&bytes[..payload_len]);
    if hasher.finalize() != stored {
        return Err(PersistError::ChecksumMismatch);
    }

    let weights = WeightSet { visual, tactile, multi_to_visual, multi_to_tactile };
    weights
        .validate_shapes(&cfg)
        .map_err(|e| PersistError::ShapeMismatch(e.to_string()))?;
    Ok((weights, cfg))
}

// ---------------------------------------------------------------------------
// Dataset CSV
// ---------------------------------------------------------------------------

fn check_tag(tag: &str) -> Result<(), PersistError> {
    if tag.is_empty() || tag.contains(',') || tag.contains('\n') {
        return Err(PersistError::Invalid(format!("bad trajectory tag {tag:?}")));
    }
    Ok(())
}

/// One observation per row; the contact columns are fixed at the whisker
/// count and zero-padded past `n_contacts`, so every row has the same
/// column count.
pub fn save_dataset(observations: &[Observation], path: &Path) -> Result<(), PersistError> {
    let (n_vis, n_tac) = observations
        .first()
        .map(|o| (o.visual.len(), o.tactile.len()))
        .unwrap_or((0, 0));

    let mut out = String::new();
    out.push_str("tag,pose_x,pose_y,pose_theta");
    for i in 0..n_vis {
        let _ = write!(out, ",v_{i}");
    }
    for i in 0..n_tac {
        let _ = write!(out, ",t_{i}");
    }
    out.push_str(",n_contacts");
    for i in 0..n_tac {
        let _ = write!(out, ",c{i}_x,c{i}_y");
    }
    out.push('\n');

    for (row, obs) in observations.iter().enumerate() {
        check_tag(&obs.trajectory_tag)?;
        if obs.visual.len() != n_vis || obs.tactile.len() != n_tac {
            return Err(PersistError::Invalid(format!("row {row} has inconsistent dimensions")));
        }
        if obs.contacts.len() > n_tac {
            return Err(PersistError::Invalid(format!("row {row} has more contacts than whiskers")));
        }
        let finite = obs
            .visual
            .iter()
            .chain(obs.tactile.iter())
            .chain(obs.contacts.iter().flatten())
            .chain([obs.pose.x, obs.pose.y, obs.pose.theta].iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(PersistError::NonFinite(format!("dataset row {row}")));
        }

        let _ = write!(
            out,
            "{},{},{},{}",
            obs.trajectory_tag,
            format_f64(obs.pose.x),
            format_f64(obs.pose.y),
            format_f64(obs.pose.theta)
        );
        for v in obs.visual.iter().chain(obs.tactile.iter()) {
            let _ = write!(out, ",{}", format_f64(*v));
        }
        let _ = write!(out, ",{}", obs.contacts.len());
        for i in 0..n_tac {
            let c = obs.contacts.get(i).copied().unwrap_or([0.0, 0.0]);
            let _ = write!(out, ",{},{}", format_f64(c[0]), format_f64(c[1]));
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn load_dataset(path: &Path) -> Result<Vec<Observation>, PersistError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| PersistError::BadHeader("empty dataset file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 5 || cols[0] != "tag" {
        return Err(PersistError::BadHeader("unrecognized dataset header".into()));
    }
    let n_vis = cols.iter().filter(|c| c.starts_with("v_")).count();
    let n_tac = cols.iter().filter(|c| c.starts_with("t_")).count();
    let expected = 4 + n_vis + n_tac + 1 + 2 * n_tac;
    if cols.len() != expected {
        return Err(PersistError::BadHeader(format!(
            "dataset header has {} columns, layout implies {expected}",
            cols.len()
        )));
    }

    let mut out = Vec::new();
    for (ln, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected {
            return Err(PersistError::MalformedRow {
                line: ln + 1,
                reason: format!("{} columns, expected {expected}", fields.len()),
            });
        }
        let f = |i: usize| -> Result<f64, PersistError> {
            fields[i].parse::<f64>().map_err(|_| PersistError::MalformedRow {
                line: ln + 1,
                reason: format!("bad real in column {i}"),
            })
        };
        let tag = fields[0].to_string();
        let pose = Pose { x: f(1)?, y: f(2)?, theta: f(3)? };
        let mut visual = Vec::with_capacity(n_vis);
        for i in 0..n_vis {
            visual.push(f(4 + i)?);
        }
        let mut tactile = Vec::with_capacity(n_tac);
        for i in 0..n_tac {
            tactile.push(f(4 + n_vis + i)?);
        }
        let n_contacts: usize =
            fields[4 + n_vis + n_tac].parse().map_err(|_| PersistError::MalformedRow {
                line: ln + 1,
                reason: "bad n_contacts".into(),
            })?;
        if n_contacts > n_tac {
            return Err(PersistError::MalformedRow {
                line: ln + 1,
                reason: "n_contacts exceeds contact slots".into(),
            });
        }
        let base = 4 + n_vis + n_tac + 1;
        let mut contacts = Vec::with_capacity(n_contacts);
        for i in 0..n_contacts {
            contacts.push([f(base + 2 * i)?, f(base + 2 * i + 1)?]);
        }
        out.push(Observation { visual, tactile, contacts, pose, trajectory_tag: tag });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Template sets
// ---------------------------------------------------------------------------

/// Template set text format: `#`-prefixed key=value header lines, then one
/// CSV row per template. Handcrafted sets carry their scaling factors in
/// the header.
pub fn save_templates(
    set: &TemplateSet,
    scaling: Option<&ScalingFactors>,
    path: &Path,
) -> Result<(), PersistError> {
    check_tag(&set.trajectory_tag)?;
    let mut out = String::from("# vtpr-templates v1\n");
    let _ = writeln!(out, "# method={}", set.method.name());
    let _ = writeln!(out, "# trajectory_tag={}", set.trajectory_tag);

    let lens = match set.entries.first().map(|e| &e.data) {
        Some(TemplateData::Learned(f)) => (f.len(), 0, 0),
        Some(TemplateData::Handcrafted(t)) => (t.intensity.len(), t.pfh.len(), t.sda.len()),
        None => (0, 0, 0),
    };
    match set.method {
        MethodTag::Learned => {
            let _ = writeln!(out, "# feature_len={}", lens.0);
        }
        MethodTag::Handcrafted => {
            let s = scaling.ok_or(PersistError::Invalid(
                "handcrafted template sets need scaling factors".into(),
            ))?;
            let _ = writeln!(out, "# v_len={}", lens.0);
            let _ = writeln!(out, "# pfh_len={}", lens.1);
            let _ = writeln!(out, "# sda_len={}", lens.2);
            let _ = writeln!(out, "# alpha={}", format_f64(s.alpha));
            let _ = writeln!(out, "# beta={}", format_f64(s.beta));
            let _ = writeln!(out, "# gamma={}", format_f64(s.gamma));
        }
    }

    for e in &set.entries {
        let _ = write!(
            out,
            "{},{},{},{}",
            e.index,
            format_f64(e.pose.x),
            format_f64(e.pose.y),
            format_f64(e.pose.theta)
        );
        let values: Vec<f64> = match &e.data {
            TemplateData::Learned(f) => f.to_vec(),
            TemplateData::Handcrafted(t) => t
                .intensity
                .iter()
                .chain(t.pfh.iter())
                .chain(t.sda.iter())
                .copied()
                .collect(),
        };
        for v in values {
            if !v.is_finite() {
                return Err(PersistError::NonFinite(format!("template {}", e.index)));
            }
            let _ = write!(out, ",{}", format_f64(v));
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn load_templates(path: &Path) -> Result<(TemplateSet, Option<ScalingFactors>), PersistError> {
    let text = std::fs::read_to_string(path)?;
    let mut header = std::collections::BTreeMap::new();
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                header.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if !line.is_empty() {
            rows.push((ln, line));
        }
    }
    let get = |k: &str| {
        header.get(k).ok_or_else(|| PersistError::BadHeader(format!("missing key `{k}`")))
    };
    let method = MethodTag::parse(get("method")?)
        .ok_or_else(|| PersistError::BadHeader("unknown method".into()))?;
    let trajectory_tag = get("trajectory_tag")?.clone();

    let usize_of = |k: &str| -> Result<usize, PersistError> {
        get(k)?.parse::<usize>().map_err(|_| PersistError::BadHeader(format!("bad `{k}`")))
    };
    let f64_of = |k: &str| -> Result<f64, PersistError> {
        get(k)?.parse::<f64>().map_err(|_| PersistError::BadHeader(format!("bad `{k}`")))
    };

    let (value_cols, scaling, channel_lens) = match method {
        MethodTag::Learned => (usize_of("feature_len")?, None, (0, 0, 0)),
        MethodTag::Handcrafted => {
            let lens = (usize_of("v_len")?, usize_of("pfh_len")?, usize_of("sda_len")?);
            let s = ScalingFactors {
                alpha: f64_of("alpha")?,
                beta: f64_of("beta")?,
                gamma: f64_of("gamma")?,
            };
            (lens.0 + lens.1 + lens.2, Some(s), lens)
        }
    };

    let mut entries = Vec::with_capacity(rows.len());
    for (ln, line) in rows {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 + value_cols {
            return Err(PersistError::MalformedRow {
                line: ln + 1,
                reason: format!("{} columns, expected {}", fields.len(), 4 + value_cols),
            });
        }
        let f = |i: usize| -> Result<f64, PersistError> {
            fields[i].parse::<f64>().map_err(|_| PersistError::MalformedRow {
                line: ln + 1,
                reason: format!("bad real in column {i}"),
            })
        };
        let index: usize = fields[0].parse().map_err(|_| PersistError::MalformedRow {
            line: ln + 1,
            reason: "bad index".into(),
        })?;
        let pose = Pose { x: f(1)?, y: f(2)?, theta: f(3)? };
        let mut values = Vec::with_capacity(value_cols);
        for i in 0..value_cols {
            values.push(f(4 + i)?);
        }
        let data = match method {
            MethodTag::Learned => TemplateData::Learned(Array1::from_vec(values)),
            MethodTag::Handcrafted => {
                let (nv, np, _) = channel_lens;
                TemplateData::Handcrafted(HandcraftedTemplate {
                    intensity: values[0..nv].to_vec(),
                    pfh: values[nv..nv + np].to_vec(),
                    sda: values[nv + np..].to_vec(),
                })
            }
        };
        entries.push(TemplateEntry { index, pose, data });
    }
    Ok((TemplateSet { method, trajectory_tag, entries }, scaling))
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

pub fn save_matrix_csv(m: &Array2<f64>, path: &Path) -> Result<(), PersistError> {
    let mut out = String::new();
    for row in m.rows() {
        let mut first = true;
        for &v in row {
            if !v.is_finite() {
                return Err(PersistError::NonFinite("matrix".into()));
            }
            if !first {
                out.push(',');
            }
            out.push_str(&format_f64(v));
            first = false;
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn load_matrix_csv(path: &Path) -> Result<Array2<f64>, PersistError> {
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0usize;
    for (ln, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        match cols {
            None => cols = Some(fields.len()),
            Some(c) if c != fields.len() => {
                return Err(PersistError::MalformedRow {
                    line: ln + 1,
                    reason: format!("{} columns, expected {c}", fields.len()),
                })
            }
            _ => {}
        }
        for (i, field) in fields.iter().enumerate() {
            values.push(field.parse::<f64>().map_err(|_| PersistError::MalformedRow {
                line: ln + 1,
                reason: format!("bad real in column {i}"),
            })?);
        }
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    Array2::from_shape_vec((rows, cols), values)
        .map_err(|e| PersistError::ShapeMismatch(e.to_string()))
}

/// Write the matrix as an 8-bit binary PGM heatmap, min-max scaled to
/// 0..255, plus a `<path>.meta` sidecar recording min/max for inversion.
/// A constant matrix renders as a single gray level with the sidecar
/// flagged degenerate.
pub fn save_matrix_pgm(m: &Array2<f64>, path: &Path) -> Result<(), PersistError> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in m.iter() {
        if !v.is_finite() {
            return Err(PersistError::NonFinite("matrix".into()));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if m.is_empty() {
        lo = 0.0;
        hi = 0.0;
    }
    let degenerate = hi <= lo;
    let mut bytes =
        format!("P5\n{} {}\n255\n", m.ncols(), m.nrows()).into_bytes();
    for &v in m.iter() {
        let b = if degenerate { 0u8 } else { ((v - lo) / (hi - lo) * 255.0).round() as u8 };
        bytes.push(b);
    }
    write_atomic(path, &bytes)?;

    let meta = format!(
        "min={}\nmax={}\ndegenerate={}\n",
        format_f64(lo),
        format_f64(hi),
        degenerate as u8
    );
    let meta_path = path.with_extension(
        path.extension()
            .map(|e| format!("{}.meta", e.to_string_lossy()))
            .unwrap_or_else(|| "meta".into()),
    );
    write_atomic(&meta_path, meta.as_bytes())
}

// ---------------------------------------------------------------------------
// Scores
// ---------------------------------------------------------------------------

/// Everything that identifies one evaluation run's result.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub method: String,
    pub trajectory_a: String,
    pub trajectory_b: String,
    pub tau: f64,
    pub theta_match: f64,
    pub recall_mode: String,
    pub seed: u64,
    pub scores: Scores,
}

pub fn save_scores(report: &ScoreReport, path: &Path) -> Result<(), PersistError> {
    let s = &report.scores;
    let mut out = String::new();
    let _ = writeln!(out, "method={}", report.method);
    let _ = writeln!(out, "trajectory_a={}", report.trajectory_a);
    let _ = writeln!(out, "trajectory_b={}", report.trajectory_b);
    let _ = writeln!(out, "tau={}", format_f64(report.tau));
    let _ = writeln!(out, "theta_match={}", format_f64(report.theta_match));
    let _ = writeln!(out, "recall_mode={}", report.recall_mode);
    let _ = writeln!(out, "seed={}", report.seed);
    let _ = writeln!(out, "tp={}", s.true_pos);
    let _ = writeln!(out, "fp={}", s.false_pos);
    let _ = writeln!(out, "fn={}", s.false_neg);
    let _ = writeln!(out, "tn={}", s.true_neg);
    let _ = writeln!(out, "precision={}", format_f64(s.precision));
    let _ = writeln!(out, "recall={}", format_f64(s.recall));
    let _ = writeln!(out, "f1={}", format_f64(s.f1));
    let _ = writeln!(out, "degenerate={}", s.degenerate as u8);
    write_atomic(path, out.as_bytes())
}

pub fn load_scores(path: &Path) -> Result<ScoreReport, PersistError> {
    let text = std::fs::read_to_string(path)?;
    let mut map = std::collections::BTreeMap::new();
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            map.insert(k.to_string(), v.to_string());
        }
    }
    let get = |k: &str| {
        map.get(k).ok_or_else(|| PersistError::BadHeader(format!("missing key `{k}`")))
    };
    let f64_of = |k: &str| -> Result<f64, PersistError> {
        get(k)?.parse::<f64>().map_err(|_| PersistError::BadHeader(format!("bad `{k}`")))
    };
    let usize_of = |k: &str| -> Result<usize, PersistError> {
        get(k)?.parse::<usize>().map_err(|_| PersistError::BadHeader(format!("bad `{k}`")))
    };
    let precision = f64_of("precision")?;
    let recall = f64_of("recall")?;
    Ok(ScoreReport {
        method: get("method")?.clone(),
        trajectory_a: get("trajectory_a")?.clone(),
        trajectory_b: get("trajectory_b")?.clone(),
        tau: f64_of("tau")?,
        theta_match: f64_of("theta_match")?,
        recall_mode: get("recall_mode")?.clone(),
        seed: get("seed")?.parse::<u64>().map_err(|_| PersistError::BadHeader("bad seed".into()))?,
        scores: Scores {
            true_pos: usize_of("tp")?,
            false_pos: usize_of("fp")?,
            false_neg: usize_of("fn")?,
            true_neg: usize_of("tn")?,
            precision,
            recall,
            f1: f64_of("f1")?,
            degenerate: get("degenerate")?.trim() == "1",
        },
    })
}
