//! Global protein alignment (Needleman-Wunsch with Gotoh affine gaps) and
//! the similarity-binned validation/test split.

mod blosum;
mod split;

pub use blosum::{residue_index, SubstMatrix, AA_ALPHABET};
pub use split::{make_split, ProteinEntry, Split, SplitError};

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlignError {
    EmptySequence,
    UnknownResidue(char),
}

impl core::fmt::Display for AlignError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AlignError::EmptySequence => write!(f, "empty sequence"),
            AlignError::UnknownResidue(c) => write!(f, "unknown residue `{c}`"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AlignError {}

/// Scoring parameters. A gap run of length L costs
/// `gap_open + (L - 1) * gap_extend`; linear gaps are expressed by setting
/// both to the same value.
#[derive(Debug, Clone)]
pub struct AlignParams {
    pub matrix: SubstMatrix,
    pub gap_open: f64,
    pub gap_extend: f64,
}

impl AlignParams {
    /// EMBOSS needle defaults: BLOSUM62, gap open 10, gap extend 0.5.
    pub fn emboss_default() -> AlignParams {
        AlignParams {
            matrix: SubstMatrix::blosum62(),
            gap_open: 10.0,
            gap_extend: 0.5,
        }
    }

    /// Simple mode: match/mismatch scores with a linear per-symbol gap cost.
    pub fn simple(match_score: f64, mismatch: f64, gap: f64) -> AlignParams {
        AlignParams {
            matrix: SubstMatrix::simple(match_score, mismatch),
            gap_open: gap,
            gap_extend: gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    pub score: f64,
    /// Matches divided by alignment length (gaps included).
    pub identity: f64,
    pub aligned_len: usize,
    pub matches: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum State {
    M,
    Ix,
    Iy,
}

fn encode_seq(s: &str) -> Result<Vec<usize>, AlignError> {
    if s.is_empty() {
        return Err(AlignError::EmptySequence);
    }
    s.chars()
        .map(|c| {
            residue_index(c.to_ascii_uppercase() as u8).ok_or(AlignError::UnknownResidue(c))
        })
        .collect()
}

/// Optimal global alignment under affine gaps (three-matrix Gotoh
/// recurrence, including gap-to-gap transitions). Identity is computed on
/// a deterministic traceback that prefers match, then a gap in `b`, then a
/// gap in `a`.
pub fn needleman_wunsch(
    a: &str,
    b: &str,
    params: &AlignParams,
) -> Result<AlignmentResult, AlignError> {
    let sa = encode_seq(a)?;
    let sb = encode_seq(b)?;
    let (n, m) = (sa.len(), sb.len());
    let open = params.gap_open;
    let ext = params.gap_extend;
    let neg = f64::NEG_INFINITY;

    let idx = |i: usize, j: usize| i * (m + 1) + j;
    let mut mat = alloc::vec![neg; (n + 1) * (m + 1)];
    let mut ix = alloc::vec![neg; (n + 1) * (m + 1)]; // gap in b, consumes a
    let mut iy = alloc::vec![neg; (n + 1) * (m + 1)]; // gap in a, consumes b
    mat[idx(0, 0)] = 0.0;
    for i in 1..=n {
        ix[idx(i, 0)] = -(open + (i as f64 - 1.0) * ext);
    }
    for j in 1..=m {
        iy[idx(0, j)] = -(open + (j as f64 - 1.0) * ext);
    }

    for i in 1..=n {
        for j in 1..=m {
            let s = params.matrix.score(sa[i - 1], sb[j - 1]);
            let diag = idx(i - 1, j - 1);
            mat[idx(i, j)] = s + mat[diag].max(ix[diag]).max(iy[diag]);
            let up = idx(i - 1, j);
            ix[idx(i, j)] = (mat[up] - open).max(ix[up] - ext).max(iy[up] - open);
            let left = idx(i, j - 1);
            iy[idx(i, j)] = (mat[left] - open).max(ix[left] - open).max(iy[left] - ext);
        }
    }

    let end = idx(n, m);
    let score = mat[end].max(ix[end]).max(iy[end]);

    // Traceback by argmax over predecessor candidates; preference order
    // M > Ix > Iy keeps it deterministic under ties.
    let pick = |mv: f64, xv: f64, yv: f64| -> State {
        let best = mv.max(xv).max(yv);
        if mv == best {
            State::M
        } else if xv == best {
            State::Ix
        } else {
            State::Iy
        }
    };
    let mut state = pick(mat[end], ix[end], iy[end]);
    let (mut i, mut j) = (n, m);
    let mut matches = 0usize;
    let mut aligned_len = 0usize;
    while i > 0 || j > 0 {
        aligned_len += 1;
        match state {
            State::M => {
                if sa[i - 1] == sb[j - 1] {
                    matches += 1;
                }
                let diag = idx(i - 1, j - 1);
                state = pick(mat[diag], ix[diag], iy[diag]);
                i -= 1;
                j -= 1;
            }
            State::Ix => {
                let up = idx(i - 1, j);
                state = pick(mat[up] - open, ix[up] - ext, iy[up] - open);
                i -= 1;
            }
            State::Iy => {
                let left = idx(i, j - 1);
                state = pick(mat[left] - open, ix[left] - open, iy[left] - ext);
                j -= 1;
            }
        }
    }

    Ok(AlignmentResult {
        score,
        identity: matches as f64 / aligned_len as f64,
        aligned_len,
        matches,
    })
}

/// Exhaustive-enumeration reference scorer: walks every global alignment
/// as an op string (match/consume-a/consume-b) and scores gap runs as
/// `open + (L-1) * extend`. Exponential; a test oracle, independent of the
/// Gotoh recurrence.
pub fn brute_force_align(a: &str, b: &str, params: &AlignParams) -> Result<f64, AlignError> {
    let sa = encode_seq(a)?;
    let sb = encode_seq(b)?;

    #[derive(Clone, Copy, PartialEq)]
    enum Last {
        None,
        GapA,
        GapB,
        Sub,
    }

    fn walk(
        sa: &[usize],
        sb: &[usize],
        i: usize,
        j: usize,
        score: f64,
        last: Last,
        params: &AlignParams,
        best: &mut f64,
    ) {
        if i == sa.len() && j == sb.len() {
            if score > *best {
                *best = score;
            }
            return;
        }
        if i < sa.len() && j < sb.len() {
            let s = params.matrix.score(sa[i], sb[j]);
            walk(sa, sb, i + 1, j + 1, score + s, Last::Sub, params, best);
        }
        if i < sa.len() {
            let cost = if last == Last::GapB {
                params.gap_extend
            } else {
                params.gap_open
            };
            walk(sa, sb, i + 1, j, score - cost, Last::GapB, params, best);
        }
        if j < sb.len() {
            let cost = if last == Last::GapA {
                params.gap_extend
            } else {
                params.gap_open
            };
            walk(sa, sb, i, j + 1, score - cost, Last::GapA, params, best);
        }
    }

    let mut best = f64::NEG_INFINITY;
    walk(&sa, &sb, 0, 0, 0.0, Last::None, params, &mut best);
    Ok(best)
}

/// Identity between `p` and its closest pool member.
pub fn max_similarity(p: &str, pool: &[String], params: &AlignParams) -> Result<f64, AlignError> {
    let mut best: f64 = 0.0;
    for q in pool {
        let r = needleman_wunsch(p, q, params)?;
        if r.identity > best {
            best = r.identity;
        }
    }
    Ok(best)
}
