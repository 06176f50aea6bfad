//! BLOSUM62 substitution scores over the 20 amino acids plus X.

/// Residue order used by the score tables.
pub const AA_ALPHABET: &[u8] = b"ARNDCQEGHILKMFPSTWYVX";

#[rustfmt::skip]
const BLOSUM62_20: [[i8; 20]; 20] = [
    // A   R   N   D   C   Q   E   G   H   I   L   K   M   F   P   S   T   W   Y   V
    [  4, -1, -2, -2,  0, -1, -1,  0, -2, -1, -1, -1, -1, -2, -1,  1,  0, -3, -2,  0], // A
    [ -1,  5,  0, -2, -3,  1,  0, -2,  0, -3, -2,  2, -1, -3, -2, -1, -1, -3, -2, -3], // R
    [ -2,  0,  6,  1, -3,  0,  0,  0,  1, -3, -3,  0, -2, -3, -2,  1,  0, -4, -2, -3], // N
    [ -2, -2,  1,  6, -3,  0,  2, -1, -1, -3, -4, -1, -3, -3, -1,  0, -1, -4, -3, -3], // D
    [  0, -3, -3, -3,  9, -3, -4, -3, -3, -1, -1, -3, -1, -2, -3, -1, -1, -2, -2, -1], // C
    [ -1,  1,  0,  0, -3,  5,  2, -2,  0, -3, -2,  1,  0, -3, -1,  0, -1, -2, -1, -2], // Q
    [ -1,  0,  0,  2, -4,  2,  5, -2,  0, -3, -3,  1, -2, -3, -1,  0, -1, -3, -2, -2], // E
    [  0, -2,  0, -1, -3, -2, -2,  6, -2, -4, -4, -2, -3, -3, -2,  0, -2, -2, -3, -3], // G
    [ -2,  0,  1, -1, -3,  0,  0, -2,  8, -3, -3, -1, -2, -1, -2, -1, -2, -2,  2, -3], // H
    [ -1, -3, -3, -3, -1, -3, -3, -4, -3,  4,  2, -3,  1,  0, -3, -2, -1, -3, -1,  3], // I
    [ -1, -2, -3, -4, -1, -2, -3, -4, -3,  2,  4, -2,  2,  0, -3, -2, -1, -2, -1,  1], // L
    [ -1,  2,  0, -1, -3,  1,  1, -2, -1, -3, -2,  5, -1, -3, -1,  0, -1, -3, -2, -2], // K
    [ -1, -1, -2, -3, -1,  0, -2, -3, -2,  1,  2, -1,  5,  0, -2, -1, -1, -1, -1,  1], // M
    [ -2, -3, -3, -3, -2, -3, -3, -3, -1,  0,  0, -3,  0,  6, -4, -2, -2,  1,  3, -1], // F
    [ -1, -2, -2, -1, -3, -1, -1, -2, -2, -3, -3, -1, -2, -4,  7, -1, -1, -4, -3, -2], // P
    [  1, -1,  1,  0, -1,  0,  0,  0, -1, -2, -2,  0, -1, -2, -1,  4,  1, -3, -2, -2], // S
    [  0, -1,  0, -1, -1, -1, -1, -2, -2, -1, -1, -1, -1, -2, -1,  1,  5, -2, -2,  0], // T
    [ -3, -3, -4, -4, -2, -2, -3, -2, -2, -3, -2, -3, -1,  1, -4, -3, -2, 11,  2, -3], // W
    [ -2, -2, -2, -3, -2, -1, -2, -3,  2, -1, -1, -2, -1,  3, -3, -2, -2,  2,  7, -1], // Y
    [  0, -3, -3, -3, -1, -2, -2, -3, -3,  3,  1, -2,  1, -1, -2, -2,  0, -3, -1,  4], // V
];

#[rustfmt::skip]
const BLOSUM62_X: [i8; 20] = [
    0, -1, -1, -1, -2, -1, -1, -1, -1, -1, -1, -1, -1, -1, -2, 0, 0, -2, -1, -1,
];

const X_VS_X: i8 = -1;

/// Substitution matrix over the 21-letter alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstMatrix {
    scores: [[f64; 21]; 21],
}

impl SubstMatrix {
    pub fn blosum62() -> SubstMatrix {
        let mut scores = [[0.0f64; 21]; 21];
        for (i, row) in BLOSUM62_20.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                scores[i][j] = v as f64;
            }
        }
        for (i, &v) in BLOSUM62_X.iter().enumerate() {
            scores[i][20] = v as f64;
            scores[20][i] = v as f64;
        }
        scores[20][20] = X_VS_X as f64;
        SubstMatrix { scores }
    }

    /// Uniform match/mismatch matrix for the simple scoring mode.
    pub fn simple(match_score: f64, mismatch: f64) -> SubstMatrix {
        let mut scores = [[mismatch; 21]; 21];
        for (i, row) in scores.iter_mut().enumerate() {
            row[i] = match_score;
        }
        SubstMatrix { scores }
    }

    #[inline]
    pub fn score(&self, a: usize, b: usize) -> f64 {
        self.scores[a][b]
    }
}

pub fn residue_index(c: u8) -> Option<usize> {
    AA_ALPHABET.iter().position(|&a| a == c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_is_symmetric() {
        let m = SubstMatrix::blosum62();
        for i in 0..21 {
            for j in 0..21 {
                assert_eq!(m.score(i, j), m.score(j, i), "asymmetry at {i},{j}");
            }
        }
    }

    #[test]
    fn reference_scores() {
        let m = SubstMatrix::blosum62();
        let idx = |c: u8| residue_index(c).unwrap();
        assert_eq!(m.score(idx(b'W'), idx(b'W')), 11.0);
        assert_eq!(m.score(idx(b'A'), idx(b'A')), 4.0);
        assert_eq!(m.score(idx(b'A'), idx(b'W')), -3.0);
        assert_eq!(m.score(idx(b'X'), idx(b'X')), -1.0);
        assert_eq!(m.score(idx(b'A'), idx(b'X')), 0.0);
    }
}
