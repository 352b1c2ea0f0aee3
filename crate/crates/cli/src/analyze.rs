//! Entanglement audit of an exported MPS or of the best state in a record.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use mpsvqa::ansatz::ebit_bound;
use mpsvqa::tensor::{schmidt_spectrum, MpsExport};
use mpsvqa::{MpsState, Real};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::record::RunRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub n: usize,
    pub bond_dims: Vec<usize>,
    pub cuts: Vec<CutReport>,
    pub max_rank: usize,
    pub max_ebits: f64,
    /// Fewest two-qubit-gate layers compatible with the bond dimensions,
    /// `ceil(log2 max_rank)`.
    pub layers_for_rank: usize,
    /// `min(ceil(n/2), layers_for_rank)`.
    pub ebit_bound: usize,
    pub within_ebit_bound: bool,
    pub truncation: Vec<TruncationRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutReport {
    pub cut: usize,
    pub schmidt_values: Vec<f64>,
    pub rank: usize,
    pub ebits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub rank: usize,
    pub eps: f64,
    pub err1: f64,
    pub err2: f64,
}

/// Accepts either an exported MPS or a full run record.
pub fn load_mps(path: &Path) -> Result<MpsState> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    let export: MpsExport = if value.get("per_k").is_some() {
        RunRecord::from_json(&text, path)?.mps
    } else {
        serde_json::from_value(value).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            msg: format!("neither an MPS export nor a run record: {e}"),
        })?
    };
    MpsState::import(&export).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

pub fn analyze(mps: &MpsState) -> Result<Analysis> {
    let state = mps.to_statevector().map_err(CliError::from_compute)?;
    let n = state.num_qubits();
    let tol = f64::svd_cutoff();
    let cuts = (1..n)
        .map(|cut| {
            let s = schmidt_spectrum(&state, cut, tol).map_err(CliError::from_compute)?;
            Ok(CutReport {
                cut,
                ebits: s.entropy_ebits(),
                rank: s.rank,
                schmidt_values: s.singular_values.into_iter().take_while(|&v| v > tol).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_rank = cuts.iter().map(|c| c.rank).max().unwrap_or(1);
    let max_ebits = cuts.iter().map(|c| c.ebits).fold(0.0, f64::max);
    let layers = max_rank.next_power_of_two().trailing_zeros() as usize;
    let bound = ebit_bound(n, layers);

    let canonical = MpsState::from_statevector(&state, tol);
    let truncation = (1..=max_rank)
        .map(|r| {
            let t = canonical.truncate(r).map_err(CliError::from_compute)?;
            Ok(TruncationRow {
                rank: r,
                eps: t.eps,
                err1: t.err1,
                err2: t.err2,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Analysis {
        n,
        bond_dims: mps.bond_dims(),
        cuts,
        max_rank,
        max_ebits,
        layers_for_rank: layers,
        ebit_bound: bound,
        within_ebit_bound: max_ebits <= bound as f64 + 1e-10,
        truncation,
    })
}

pub fn main_analyze(path: &Path) -> Result<Analysis> {
    analyze(&load_mps(path)?)
}

impl Analysis {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}, bond dims {:?}", self.n, self.bond_dims);
        let _ = writeln!(out, "{:>4} {:>5} {:>10}  schmidt values", "cut", "rank", "ebits");
        for c in &self.cuts {
            let values: Vec<String> = c.schmidt_values.iter().map(|v| format!("{v:.6}")).collect();
            let _ = writeln!(out, "{:>4} {:>5} {:>10.6}  {}", c.cut, c.rank, c.ebits, values.join(" "));
        }
        let _ = writeln!(
            out,
            "max rank {}, max ebits {:.6}, ebit bound {} ({} layers): {}",
            self.max_rank,
            self.max_ebits,
            self.ebit_bound,
            self.layers_for_rank,
            if self.within_ebit_bound { "ok" } else { "EXCEEDED" }
        );
        let _ = writeln!(out, "{:>4} {:>12} {:>12} {:>12}", "r", "eps", "err1", "err2");
        for t in &self.truncation {
            let _ = writeln!(out, "{:>4} {:>12.4e} {:>12.4e} {:>12.4e}", t.rank, t.eps, t.err1, t.err2);
        }
        out
    }
}
