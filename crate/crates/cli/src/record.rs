//! The persisted result of a run, and its JSON encoding.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use mpsvqa::tensor::MpsExport;
use mpsvqa::vqa::{Method, StopReason, TracePoint};
use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub per_k: Vec<KRecord>,
    /// Highest certificate, ties to the smallest `k`.
    pub best_k: usize,
    pub terminated_early: Option<String>,
    /// The best state as a left-canonical MPS.
    pub mps: MpsExport,
    /// `|<planted|best>|^2`, for planted oracles only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted_overlap: Option<f64>,
    pub resources: Resources,
    pub version: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct KRecord {
    pub k: usize,
    pub method: Method,
    pub loss: f64,
    pub certificate: f64,
    pub p: Vec<f64>,
    pub wall_time_s: f64,
    /// Summed over restarts.
    pub iterations: usize,
    pub evaluations: usize,
    /// Restart that produced theta; null when the warm start itself won.
    pub restart: Option<usize>,
    pub stop: Option<StopReason>,
    /// Reduced to [0, 2pi), for reporting.
    pub theta: Vec<f64>,
    /// As optimized. Pauli-exponential coefficients are not 2pi-periodic, so
    /// only these reproduce the state.
    pub theta_raw: Vec<f64>,
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct Resources {
    pub n: usize,
    pub k: usize,
    /// Bond dimension bound `2^k` of the best ansatz.
    pub rank: usize,
    /// Null for `rank = 1`, where no entangling gate is needed.
    pub cnot_lower_bound: Option<f64>,
    /// Optimizer steps spent on the best `k`, summed over restarts.
    pub optimizer_steps: usize,
    pub cost_estimate: u64,
    pub ebit_audit: Vec<CutAudit>,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct CutAudit {
    pub cut: usize,
    pub schmidt_rank: usize,
    pub ebits: f64,
    /// `k`, the ansatz budget.
    pub budget: usize,
    pub within_budget: bool,
}

/// Pretty JSON with every float written to 17 significant digits, which
/// round-trips `f64` exactly.
pub struct ExactFloats(PrettyFormatter<'static>);

impl Default for ExactFloats {
    fn default() -> Self {
        Self(PrettyFormatter::with_indent(b"  "))
    }
}

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats::default());
    value.serialize(&mut ser).expect("in-memory serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

/// Writes `text` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Validation(format!("output path {} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(text.as_bytes())?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err)
}

impl RunRecord {
    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }
}
