//! Tab-separated and comma-separated table formats.
//!
//! - proteins: `id<TAB>sequence<TAB>family`, no header
//! - split assignment: `id<TAB>split`, no header
//! - raw interactions: TSV with header `protein_id sequence n_chains
//!   family smiles measure_kind measure_value_nm`, one measurement per row
//! - pair files: `protein_id<TAB>sequence<TAB>smiles`, no header
//! - generated molecules: `protein_id<TAB>rank<TAB>smiles<TAB>score`
//! - docking scores: CSV with header
//!   `target_id,ligand_id,group,pose_id,cnn_score,cnn_affinity`

use std::collections::BTreeMap;
use std::path::Path;

use mtf_core::datapipe::{AffinityMeasurement, MeasureKind, RawRow};
use mtf_core::dockstats::{Group, PoseScore};
use mtf_core::seqalign::{ProteinEntry, Split};

use crate::{io_runtime, CliError};

fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_runtime("reading table", e))?;
    Ok(text.lines().map(str::to_string).collect())
}

pub fn read_proteins(path: &Path) -> Result<Vec<ProteinEntry>, CliError> {
    let mut out = Vec::new();
    for (idx, line) in read_lines(path)?.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(CliError::validation(format!(
                "{}:{}: expected 3 tab-separated columns",
                path.display(),
                idx + 1
            )));
        }
        out.push(ProteinEntry {
            id: cols[0].into(),
            sequence: cols[1].into(),
            family: cols[2].into(),
        });
    }
    if out.is_empty() {
        return Err(CliError::validation(format!(
            "{}: no proteins",
            path.display()
        )));
    }
    Ok(out)
}

pub fn write_split(path: &Path, split: &BTreeMap<String, Split>) -> Result<(), CliError> {
    let mut out = String::new();
    for (id, s) in split {
        out.push_str(id);
        out.push('\t');
        out.push_str(s.as_str());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_runtime("writing split", e))
}

pub fn read_split(path: &Path) -> Result<BTreeMap<String, Split>, CliError> {
    let mut out = BTreeMap::new();
    for (idx, line) in read_lines(path)?.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let Some((id, split)) = line.split_once('\t') else {
            return Err(CliError::validation(format!(
                "{}:{}: expected `id<TAB>split`",
                path.display(),
                idx + 1
            )));
        };
        let Some(split) = Split::from_str(split) else {
            return Err(CliError::validation(format!(
                "{}:{}: unknown split `{split}`",
                path.display(),
                idx + 1
            )));
        };
        out.insert(id.to_string(), split);
    }
    Ok(out)
}

pub const RAW_HEADER: &str =
    "protein_id\tsequence\tn_chains\tfamily\tsmiles\tmeasure_kind\tmeasure_value_nm";

pub fn read_raw_interactions(path: &Path) -> Result<Vec<RawRow>, CliError> {
    let lines = read_lines(path)?;
    let Some(header) = lines.first() else {
        return Err(CliError::validation(format!("{}: empty file", path.display())));
    };
    if header != RAW_HEADER {
        return Err(CliError::validation(format!(
            "{}: schema error: header must be `{RAW_HEADER}`",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 7 {
            return Err(CliError::validation(format!(
                "{}:{}: schema error: expected 7 columns",
                path.display(),
                idx + 1
            )));
        }
        let n_chains: u32 = cols[2].parse().unwrap_or(1);
        let measure = match (MeasureKind::from_str(cols[5]), cols[6].parse::<f64>()) {
            (Some(kind), Ok(value_nm)) => Some(AffinityMeasurement { kind, value_nm }),
            _ => None,
        };
        rows.push(RawRow {
            protein_id: cols[0].into(),
            sequence: cols[1].into(),
            n_chains,
            family: cols[3].into(),
            smiles: cols[4].into(),
            measure,
        });
    }
    Ok(rows)
}

/// One row of a pair file.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRow {
    pub protein_id: String,
    pub sequence: String,
    pub smiles: String,
}

pub fn write_pairs(path: &Path, rows: &[PairRow]) -> Result<(), CliError> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&format!("{}\t{}\t{}\n", r.protein_id, r.sequence, r.smiles));
    }
    std::fs::write(path, out).map_err(|e| io_runtime("writing pairs", e))
}

pub fn read_pairs(path: &Path) -> Result<Vec<PairRow>, CliError> {
    let mut out = Vec::new();
    for (idx, line) in read_lines(path)?.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(CliError::validation(format!(
                "{}:{}: expected 3 tab-separated columns",
                path.display(),
                idx + 1
            )));
        }
        out.push(PairRow {
            protein_id: cols[0].into(),
            sequence: cols[1].into(),
            smiles: cols[2].into(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedRow {
    pub protein_id: String,
    pub rank: usize,
    pub smiles: String,
    pub score: f64,
}

pub fn write_generated(path: &Path, rows: &[GeneratedRow]) -> Result<(), CliError> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{:.6}\n",
            r.protein_id, r.rank, r.smiles, r.score
        ));
    }
    std::fs::write(path, out).map_err(|e| io_runtime("writing generated molecules", e))
}

pub fn read_generated(path: &Path) -> Result<Vec<GeneratedRow>, CliError> {
    let mut out = Vec::new();
    for (idx, line) in read_lines(path)?.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(CliError::validation(format!(
                "{}:{}: expected 4 tab-separated columns",
                path.display(),
                idx + 1
            )));
        }
        out.push(GeneratedRow {
            protein_id: cols[0].into(),
            rank: cols[1].parse().map_err(|_| {
                CliError::validation(format!("{}:{}: bad rank", path.display(), idx + 1))
            })?,
            smiles: cols[2].into(),
            score: cols[3].parse().map_err(|_| {
                CliError::validation(format!("{}:{}: bad score", path.display(), idx + 1))
            })?,
        });
    }
    Ok(out)
}

pub const POSES_HEADER: &str = "target_id,ligand_id,group,pose_id,cnn_score,cnn_affinity";

/// Docking scores per target.
pub fn read_poses(path: &Path) -> Result<BTreeMap<String, Vec<PoseScore>>, CliError> {
    let lines = read_lines(path)?;
    let Some(header) = lines.first() else {
        return Err(CliError::validation(format!("{}: empty file", path.display())));
    };
    if header != POSES_HEADER {
        return Err(CliError::validation(format!(
            "{}: header must be `{POSES_HEADER}`",
            path.display()
        )));
    }
    let mut out: BTreeMap<String, Vec<PoseScore>> = BTreeMap::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(CliError::validation(format!(
                "{}:{}: expected 6 comma-separated columns",
                path.display(),
                idx + 1
            )));
        }
        let group = Group::from_str(cols[2]).ok_or_else(|| {
            CliError::validation(format!(
                "{}:{}: unknown group `{}`",
                path.display(),
                idx + 1,
                cols[2]
            ))
        })?;
        let parse_f = |s: &str, what: &str| -> Result<f64, CliError> {
            s.parse().map_err(|_| {
                CliError::validation(format!("{}:{}: bad {what}", path.display(), idx + 1))
            })
        };
        out.entry(cols[0].to_string()).or_default().push(PoseScore {
            ligand_id: cols[1].into(),
            group,
            pose_id: cols[3].parse().unwrap_or(0),
            cnn_score: parse_f(cols[4], "cnn_score")?,
            cnn_affinity: parse_f(cols[5], "cnn_affinity")?,
        });
    }
    Ok(out)
}

pub fn write_lines(path: &Path, lines: &[String]) -> Result<(), CliError> {
    let mut out = String::new();
    for l in lines {
        out.push_str(l);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_runtime("writing file", e))
}

pub fn read_corpus(path: &Path) -> Result<Vec<String>, CliError> {
    Ok(read_lines(path)?
        .into_iter()
        .filter(|l| !l.is_empty())
        .collect())
}
