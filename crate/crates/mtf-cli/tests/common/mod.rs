//! Deterministic synthetic fixtures shared by the integration and
//! acceptance suites.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mtf_core::rng::Rng;

/// Drug-like-ish molecules parseable under the supported SMILES subset.
pub const SMILES_LIBRARY: &[&str] = &[
    "CC(=O)Oc1ccccc1C(=O)O",
    "CCc1ccccc1",
    "c1ccc2ccccc2c1",
    "CCOC(=O)c1ccccc1",
    "CC(C)Cc1ccc(C(C)C(=O)O)cc1",
    "CCN(CC)CCNC(=O)c1ccccc1",
    "COc1ccccc1OC",
    "CC(=O)Nc1ccc(O)cc1",
    "Clc1ccccc1CN",
    "CCOc1ccc(CC(=O)N)cc1",
    "CC(C)NCC(O)c1ccccc1",
    "c1ccncc1CCN",
    "CC1CCCCC1NC(=O)C",
    "O=C1CCCCC1CCO",
    "CCCCCCCCC(=O)O",
    "CC(C)(C)c1ccc(O)cc1",
    "FC(F)(F)c1ccccc1N",
    "CSc1ccccc1C(=O)O",
    "CC(=O)NCCc1ccc2ccccc2c1",
    "CCOC(=O)CCCCC(=O)OCC",
    "Brc1ccc(CNC(=O)C)cc1",
    "CN(C)CCOc1ccccc1",
    "CC(O)c1cccc(C)c1C",
    "O=C(NCCO)c1ccco1",
    "c1cc[nH]c1CCNC(=O)C",
    "CC(C)OC(=O)c1ccccc1N",
    "CCCN(CCC)C(=O)c1ccccc1O",
    "Ic1ccc(C(=O)NC)cc1",
    "O=S(=O)(N)c1ccccc1C",
    "CC1CCC(CC1)C(=O)NCc1ccccc1",
    "COC(=O)c1ccc(OC)cc1",
    "CCSCCNC(=O)c1ccccc1",
    "CC(N)C(=O)NC(C)C(=O)O",
    "c1ccc(-c2ccccc2)cc1",
    "CC(=O)OCC(O)CO",
    "NCCc1ccc(O)c(O)c1",
    "CCCCN(C)C(=O)Cc1ccccc1Cl",
    "CC(C)=CCCC(C)=CCO",
    "O=C(O)c1ccc(Cl)cc1",
    "CNC(=O)Oc1ccccc1",
];

const AA: &[u8] = b"ACDEFGHIKLMNPQRSTVWY";

/// Random protein sequence with a family-dependent stem so within-family
/// similarity exceeds between-family similarity.
pub fn protein_sequence(family: usize, rng: &mut Rng, len: usize) -> String {
    let stems = [
        "MKVLAWYH", "ACDEFGHI", "PPGGSSTT", "WYHQEMKV", "TTNNQQRR", "LLIIVVMM",
    ];
    let mut s = String::from(stems[family % stems.len()]);
    while s.len() < len {
        s.push(AA[rng.below(20) as usize] as char);
    }
    s
}

pub struct RawFixture {
    pub raw_tsv: String,
    pub proteins_tsv: String,
    pub n_rows: usize,
}

/// A BindingDB-shaped table: 24 proteins over 6 families, 4 of them rich
/// (25 distinct actives, enough to anchor the reference distribution),
/// plus duplicated measurements, gray-zone and inactive rows, and a
/// handful of broken rows for the drop histogram.
pub fn raw_fixture(seed: u64) -> RawFixture {
    let mut rng = Rng::new(seed);
    let mut raw = String::from(
        "protein_id\tsequence\tn_chains\tfamily\tsmiles\tmeasure_kind\tmeasure_value_nm\n",
    );
    let mut proteins = String::new();
    let mut n_rows = 0usize;

    let lib = SMILES_LIBRARY;
    let push_row = |raw: &mut String,
                        n_rows: &mut usize,
                        id: &str,
                        seq: &str,
                        chains: u32,
                        family: &str,
                        smiles: &str,
                        kind: &str,
                        value: f64| {
        writeln!(raw, "{id}\t{seq}\t{chains}\t{family}\t{smiles}\t{kind}\t{value}").unwrap();
        *n_rows += 1;
    };

    for p in 0..24usize {
        let family = p % 6;
        let id = format!("P{p:03}");
        let len = 14 + rng.below(8) as usize;
        let seq = protein_sequence(family, &mut rng, len);
        writeln!(proteins, "{id}\t{seq}\tFAM{family}").unwrap();

        let rich = p < 4;
        let n_ligands = if rich { 30 } else { 5 + rng.below(5) as usize };
        for j in 0..n_ligands {
            let smiles = lib[(p * 7 + j * 3) % lib.len()];
            let kinds = ["Ki", "Kd", "IC50", "EC50"];
            let kind = kinds[rng.below(4) as usize];
            // Mostly active; non-rich proteins also get gray-zone and
            // inactive rows. Rich proteins stay fully active so the
            // reference distribution has enough anchors.
            let value = match rng.below(10) {
                0 if !rich => 5000.0,             // gray zone
                1 if !rich => 20000.0 + j as f64, // inactive
                _ => 1.0 + rng.below(40) as f64,
            };
            push_row(&mut raw, &mut n_rows, &id, &seq, 1, &format!("FAM{family}"), smiles, kind, value);
            if j % 9 == 0 {
                // Duplicate measurement of the same pair for aggregation.
                push_row(
                    &mut raw, &mut n_rows, &id, &seq, 1, &format!("FAM{family}"), smiles, "IC50",
                    2.0 + rng.below(60) as f64,
                );
            }
        }
    }

    // Broken rows exercising each drop reason.
    let seq = protein_sequence(0, &mut rng, 16);
    push_row(&mut raw, &mut n_rows, "", &seq, 1, "FAM0", "CCO", "Ki", 1.0);
    push_row(&mut raw, &mut n_rows, "P000", &seq, 1, "FAM0", "", "Ki", 1.0);
    push_row(&mut raw, &mut n_rows, "P000", &seq, 2, "FAM0", "CCO", "Ki", 1.0);
    push_row(&mut raw, &mut n_rows, "P000", &seq, 1, "FAM0", "C1CC(", "Ki", 1.0);
    push_row(&mut raw, &mut n_rows, "P000", &seq, 1, "FAM0", "CCO", "bogus", 1.0);
    push_row(&mut raw, &mut n_rows, "P000", &seq, 1, "FAM0", "CCO", "Ki", -3.0);
    push_row(&mut raw, &mut n_rows, "UNLISTED", &seq, 1, "FAM9", "CCO", "Ki", 1.0);

    RawFixture {
        raw_tsv: raw,
        proteins_tsv: proteins,
        n_rows,
    }
}

/// Linear-chainable fragments: concatenating any of them after a leading
/// carbon yields a valid SMILES string.
const FRAGMENTS: &[&str] = &["CC", "CO", "CN", "C(Cl)C", "C(C)C", "C(=O)N", "COC", "CS"];

const STEMS: [&str; 6] = [
    "MKVLAWYH", "ACDEFGHI", "PPGGSSTT", "WYHQEMKV", "TTNNQQRR", "LLIIVVMM",
];

const PROTOTYPES: [&[usize]; 6] = [
    &[0, 1, 0],
    &[2, 3],
    &[4, 5, 4],
    &[6, 7],
    &[1, 6, 3],
    &[5, 2, 0, 7],
];

/// Deterministic protein -> molecule task with conditional structure a
/// sequence encoder can learn: the family stem selects a molecule
/// prototype and the residues right after the stem pick variable tail
/// fragments.
pub fn synthetic_pair(protein: &str, extra: usize) -> String {
    let family = STEMS
        .iter()
        .position(|s| protein.starts_with(s))
        .unwrap_or(0);
    let bytes = protein.as_bytes();
    let mut molecule = String::from("C");
    for &fi in PROTOTYPES[family] {
        molecule.push_str(FRAGMENTS[fi]);
    }
    molecule.push_str(FRAGMENTS[bytes[8] as usize % 8]);
    for k in 0..extra.min(2) {
        molecule.push_str(FRAGMENTS[bytes[9 + k] as usize % 8]);
    }
    molecule
}

/// The synthetic translation dataset for the overfit and warm-start
/// checks.
pub fn synthetic_pairs(n: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = Rng::new(seed);
    (0..n)
        .map(|i| {
            let len = 12 + rng.below(6) as usize;
            let protein = protein_sequence(i % 6, &mut rng, len);
            let molecule = synthetic_pair(&protein, i % 3);
            (protein, molecule)
        })
        .collect()
}

/// Docking score table: three targets where actives and generated beat the
/// random pool, plus one target whose groups are indistinguishable (the
/// exclusion case).
pub fn dock_scores_csv(seed: u64) -> String {
    let mut rng = Rng::new(seed);
    let mut out = String::from("target_id,ligand_id,group,pose_id,cnn_score,cnn_affinity\n");
    let groups = ["active", "random", "generated", "others"];
    for t in 0..4usize {
        let target = format!("T{t}");
        for group in groups {
            let n = 15 + rng.below(6) as usize;
            for l in 0..n {
                let base = if t == 3 {
                    4.0 // indistinguishable target
                } else {
                    match group {
                        "active" => 6.0,
                        "generated" => 5.6,
                        "others" => 4.4,
                        _ => 4.0,
                    }
                };
                for pose in 0..3 {
                    let affinity = base + rng.normal() * 0.45 + pose as f64 * 0.01;
                    let score = rng.f64();
                    out.push_str(&format!(
                        "{target},{group}_{l},{group},{pose},{score:.4},{affinity:.4}\n"
                    ));
                }
            }
        }
    }
    out
}

pub struct FixtureTree {
    pub root: PathBuf,
    pub raw: PathBuf,
    pub proteins: PathBuf,
    pub config: PathBuf,
}

/// Writes the raw fixture files plus a pipeline config into `root`.
pub fn write_fixture_tree(root: &Path) -> FixtureTree {
    std::fs::create_dir_all(root).unwrap();
    let fixture = raw_fixture(2024);
    let raw = root.join("raw.tsv");
    let proteins = root.join("proteins.tsv");
    std::fs::write(&raw, &fixture.raw_tsv).unwrap();
    std::fs::write(&proteins, &fixture.proteins_tsv).unwrap();

    let config = root.join("run.toml");
    let data_dir = root.join("data");
    let config_text = format!(
        r#"[paths]
raw = "{raw}"
proteins = "{proteins}"
split = "{split}"
data_dir = "{data}"
src_vocab = "{src_vocab}"
tgt_vocab = "{tgt_vocab}"
enc_ckpt = "{enc}"
dec_ckpt = "{dec}"
clm_ckpt = "{clm}"
model_out = "{model}"

[model]
n_layers = 2
d_model = 32
d_ff = 64
n_heads = 4
max_len = 96

[train]
peak_lr = 2e-3
warmup_steps = 20
batch_size = 8
grad_accum = 1
epochs = 2
dropout = 0.1

[generate]
n_outputs = 20
max_len = 48
temperature = 0.7

[bpe]
protein_vocab_size = 64
chemical_vocab_size = 64

[split]
n_heldout = 3

[seeds]
split = 11
train = 22
generate = 33
eval = 44
"#,
        raw = raw.display(),
        proteins = proteins.display(),
        split = root.join("split.tsv").display(),
        data = data_dir.display(),
        src_vocab = root.join("protein.vocab").display(),
        tgt_vocab = root.join("chem.vocab").display(),
        enc = root.join("enc_mlm.ckpt").display(),
        dec = root.join("mol_mlm.ckpt").display(),
        clm = root.join("mol_clm.ckpt").display(),
        model = root.join("model.ckpt").display(),
    );
    std::fs::write(&config, config_text).unwrap();

    FixtureTree {
        root: root.to_path_buf(),
        raw,
        proteins,
        config,
    }
}

/// Fresh scratch directory under the target tmpdir.
pub fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mtf-test-{name}-{}", std::process::id()));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
