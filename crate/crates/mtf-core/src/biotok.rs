//! Byte-pair-encoding vocabularies for protein and chemical languages.
//!
//! Each full sequence (whole protein, whole SMILES) is one BPE word; there
//! is no whitespace pre-splitting. Merge selection is by pair frequency
//! with lexicographic tie-breaking, so training is deterministic and
//! independent of corpus order.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

pub const PAD_ID: u32 = 0;
pub const BOS_ID: u32 = 1;
pub const EOS_ID: u32 = 2;
pub const UNK_ID: u32 = 3;

pub const SPECIALS: [&str; 4] = ["<pad>", "<bos>", "<eos>", "<unk>"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokError {
    EmptyCorpus,
    VocabTooSmall { needed: usize },
    UnknownId(u32),
    BadFormat(String),
}

impl core::fmt::Display for TokError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TokError::EmptyCorpus => write!(f, "training corpus is empty"),
            TokError::VocabTooSmall { needed } => {
                write!(f, "vocab size must exceed distinct characters + specials ({needed})")
            }
            TokError::UnknownId(id) => write!(f, "token id {id} not in vocabulary"),
            TokError::BadFormat(msg) => write!(f, "bad vocab file: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TokError {}

/// Ordered merge rules plus token tables. Ids are contiguous from 0 with
/// the four specials pinned to 0..=3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenVocab {
    merges: Vec<(String, String)>,
    token_to_id: BTreeMap<String, u32>,
    id_to_token: Vec<String>,
}

impl TokenVocab {
    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn id_of(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token_of(&self, id: u32) -> Option<&str> {
        self.id_to_token.get(id as usize).map(|s| s.as_str())
    }

    fn from_parts(
        merges: Vec<(String, String)>,
        tokens_in_order: Vec<String>,
    ) -> TokenVocab {
        let mut token_to_id = BTreeMap::new();
        for (i, t) in tokens_in_order.iter().enumerate() {
            token_to_id.insert(t.clone(), i as u32);
        }
        TokenVocab {
            merges,
            token_to_id,
            id_to_token: tokens_in_order,
        }
    }
}

/// Train a vocabulary: character symbols first, then the most frequent
/// adjacent pair is merged until `vocab_size` tokens exist or no pair
/// occurs at least twice. Ties break lexicographically on the pair.
pub fn train_bpe(corpus: &[String], vocab_size: usize) -> Result<TokenVocab, TokError> {
    if corpus.is_empty() || corpus.iter().all(|s| s.is_empty()) {
        return Err(TokError::EmptyCorpus);
    }

    // Words with multiplicity, as symbol sequences.
    let mut words: BTreeMap<Vec<String>, u64> = BTreeMap::new();
    let mut chars: alloc::collections::BTreeSet<String> = alloc::collections::BTreeSet::new();
    for line in corpus {
        if line.is_empty() {
            continue;
        }
        let symbols: Vec<String> = line.chars().map(|c| c.to_string()).collect();
        for s in &symbols {
            chars.insert(s.clone());
        }
        *words.entry(symbols).or_insert(0) += 1;
    }

    let base = SPECIALS.len() + chars.len();
    if vocab_size <= base {
        return Err(TokError::VocabTooSmall { needed: base });
    }

    let mut tokens: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
    tokens.extend(chars.iter().cloned());

    let mut merges: Vec<(String, String)> = Vec::new();
    while tokens.len() < vocab_size {
        let mut pair_counts: BTreeMap<(String, String), u64> = BTreeMap::new();
        for (word, count) in &words {
            for pair in word.windows(2) {
                *pair_counts
                    .entry((pair[0].clone(), pair[1].clone()))
                    .or_insert(0) += count;
            }
        }
        // Highest count, then lexicographically smallest pair.
        let best = pair_counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(pair, &count)| (pair.clone(), count));
        let Some((pair, count)) = best else { break };
        if count < 2 {
            break;
        }
        let merged = alloc::format!("{}{}", pair.0, pair.1);
        let mut next_words: BTreeMap<Vec<String>, u64> = BTreeMap::new();
        for (word, count) in &words {
            let mut out: Vec<String> = Vec::with_capacity(word.len());
            let mut i = 0;
            while i < word.len() {
                if i + 1 < word.len() && word[i] == pair.0 && word[i + 1] == pair.1 {
                    out.push(merged.clone());
                    i += 2;
                } else {
                    out.push(word[i].clone());
                    i += 1;
                }
            }
            *next_words.entry(out).or_insert(0) += count;
        }
        words = next_words;
        tokens.push(merged);
        merges.push(pair);
    }

    Ok(TokenVocab::from_parts(merges, tokens))
}

/// Split a string into tokens by replaying the merge list in training
/// order over its characters.
pub fn tokenize(vocab: &TokenVocab, s: &str) -> Vec<String> {
    let mut symbols: Vec<String> = s.chars().map(|c| c.to_string()).collect();
    for (left, right) in &vocab.merges {
        let mut out: Vec<String> = Vec::with_capacity(symbols.len());
        let mut i = 0;
        while i < symbols.len() {
            if i + 1 < symbols.len() && symbols[i] == *left && symbols[i + 1] == *right {
                out.push(alloc::format!("{left}{right}"));
                i += 2;
            } else {
                out.push(symbols[i].clone());
                i += 1;
            }
        }
        symbols = out;
    }
    symbols
}

/// Encode to token ids; characters missing from the vocabulary map to unk.
pub fn encode(vocab: &TokenVocab, s: &str) -> Vec<u32> {
    tokenize(vocab, s)
        .iter()
        .map(|t| vocab.id_of(t).unwrap_or(UNK_ID))
        .collect()
}

/// Encode framed as `[bos, ..., eos]`.
pub fn encode_framed(vocab: &TokenVocab, s: &str) -> Vec<u32> {
    let mut ids = alloc::vec![BOS_ID];
    ids.extend(encode(vocab, s));
    ids.push(EOS_ID);
    ids
}

/// Decode ids back to text, dropping specials.
pub fn decode(vocab: &TokenVocab, ids: &[u32]) -> Result<String, TokError> {
    let mut out = String::new();
    for &id in ids {
        if id < SPECIALS.len() as u32 {
            continue;
        }
        match vocab.token_of(id) {
            Some(tok) => out.push_str(tok),
            None => return Err(TokError::UnknownId(id)),
        }
    }
    Ok(out)
}

/// Serialize: `#bpe-v1`, one merge per line `left<TAB>right`, `#tokens`,
/// then `token<TAB>id`.
pub fn to_text(vocab: &TokenVocab) -> String {
    let mut out = String::from("#bpe-v1\n");
    for (l, r) in &vocab.merges {
        out.push_str(l);
        out.push('\t');
        out.push_str(r);
        out.push('\n');
    }
    out.push_str("#tokens\n");
    for (i, t) in vocab.id_to_token.iter().enumerate() {
        out.push_str(t);
        out.push('\t');
        out.push_str(&alloc::format!("{i}"));
        out.push('\n');
    }
    out
}

pub fn from_text(text: &str) -> Result<TokenVocab, TokError> {
    let mut lines = text.lines();
    if lines.next() != Some("#bpe-v1") {
        return Err(TokError::BadFormat("missing #bpe-v1 header".into()));
    }
    let mut merges = Vec::new();
    let mut tokens: Vec<(String, u32)> = Vec::new();
    let mut in_tokens = false;
    for line in lines {
        if line == "#tokens" {
            in_tokens = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let Some((left, right)) = line.split_once('\t') else {
            return Err(TokError::BadFormat(alloc::format!("expected TAB in {line:?}")));
        };
        if in_tokens {
            let id: u32 = right
                .parse()
                .map_err(|_| TokError::BadFormat(alloc::format!("bad id in {line:?}")))?;
            tokens.push((left.to_string(), id));
        } else {
            merges.push((left.to_string(), right.to_string()));
        }
    }
    tokens.sort_by_key(|&(_, id)| id);
    for (i, &(_, id)) in tokens.iter().enumerate() {
        if id as usize != i {
            return Err(TokError::BadFormat("token ids not contiguous from 0".into()));
        }
    }
    for (i, special) in SPECIALS.iter().enumerate() {
        if tokens.get(i).map(|(t, _)| t.as_str()) != Some(*special) {
            return Err(TokError::BadFormat("specials must occupy ids 0..=3".into()));
        }
    }
    Ok(TokenVocab::from_parts(
        merges,
        tokens.into_iter().map(|(t, _)| t).collect(),
    ))
}
