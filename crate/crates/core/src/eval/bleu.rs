use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tokenizer {
    /// 13a-style: split off punctuation, keep decimal points and commas
    /// between digits.
    #[default]
    Default,
    /// Every non-space character is a token.
    Char,
}

static PUNCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"([\{-~\[-` -&\(-\+:-@/])").unwrap());
static PERIOD_COMMA_AFTER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"([^0-9])([\.,])").unwrap());
static PERIOD_COMMA_BEFORE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"([\.,])([^0-9])").unwrap());
static DASH_AFTER_DIGIT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"([0-9])(-)").unwrap());

pub fn tokenize(text: &str, tokenizer: Tokenizer) -> Vec<String> {
    match tokenizer {
        Tokenizer::Char => text.chars().filter(|c| !c.is_whitespace()).map(String::from).collect(),
        Tokenizer::Default => {
            let mut s = text
                .replace("<skipped>", "")
                .replace("-\n", "")
                .replace('\n', " ")
                .replace("&quot;", "\"")
                .replace("&amp;", "&")
                .replace("&lt;", "<")
                .replace("&gt;", ">");
            s = format!(" {s} ");
            s = PUNCT.replace_all(&s, " $1 ").into_owned();
            s = PERIOD_COMMA_AFTER.replace_all(&s, "$1 $2 ").into_owned();
            s = PERIOD_COMMA_BEFORE.replace_all(&s, " $1 $2").into_owned();
            s = DASH_AFTER_DIGIT.replace_all(&s, "$1 $2 ").into_owned();
            s.split_whitespace().map(String::from).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    pub score: f64,
    /// Clipped matches and totals per n-gram order (1..=4).
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub brevity_penalty: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuScore {
    pub fn precision(&self, order: usize) -> f64 {
        let i = order - 1;
        if self.totals[i] == 0 {
            0.0
        } else {
            self.matches[i] as f64 / self.totals[i] as f64
        }
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for g in tokens.windows(n) {
        *counts.entry(g).or_insert(0) += 1;
    }
    counts
}

/// Corpus BLEU-4 without smoothing. Orders with no hypothesis n-grams in
/// the whole corpus are left out of the geometric mean.
pub fn corpus_bleu<H: AsRef<str>, R: AsRef<str>>(
    hyps: &[H],
    refs: &[R],
    tokenizer: Tokenizer,
) -> Result<BleuScore> {
    if hyps.len() != refs.len() {
        return Err(Error::Validation(format!(
            "{} hypothesis segments for {} references",
            hyps.len(),
            refs.len()
        )));
    }
    if hyps.is_empty() {
        return Err(Error::UndefinedScore("BLEU of an empty corpus".into()));
    }
    let mut matches = [0usize; MAX_ORDER];
    let mut totals = [0usize; MAX_ORDER];
    let (mut hyp_len, mut ref_len) = (0, 0);
    for (h, r) in hyps.iter().zip(refs) {
        let h = tokenize(h.as_ref(), tokenizer);
        let r = tokenize(r.as_ref(), tokenizer);
        hyp_len += h.len();
        ref_len += r.len();
        for n in 1..=MAX_ORDER {
            let rc = ngram_counts(&r, n);
            for (g, c) in ngram_counts(&h, n) {
                matches[n - 1] += c.min(rc.get(g).copied().unwrap_or(0));
            }
            totals[n - 1] += h.len().saturating_sub(n - 1);
        }
    }
    let brevity_penalty = if hyp_len == 0 {
        0.0
    } else if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    let orders: Vec<usize> = (0..MAX_ORDER).filter(|&i| totals[i] > 0).collect();
    let score = if orders.is_empty() || orders.iter().any(|&i| matches[i] == 0) {
        0.0
    } else if orders.iter().all(|&i| matches[i] == totals[i]) && brevity_penalty == 1.0 {
        100.0
    } else {
        let mean_log = orders
            .iter()
            .map(|&i| (matches[i] as f64 / totals[i] as f64).ln())
            .sum::<f64>()
            / orders.len() as f64;
        100.0 * brevity_penalty * mean_log.exp()
    };
    Ok(BleuScore { score, matches, totals, brevity_penalty, hyp_len, ref_len })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_splits_punctuation() {
        assert_eq!(tokenize("Hello, world.", Tokenizer::Default), vec!["Hello", ",", "world", "."]);
        assert_eq!(tokenize("pi is 3.14, ok?", Tokenizer::Default), vec!["pi", "is", "3.14", ",", "ok", "?"]);
        assert_eq!(tokenize("a \"b\" (c)", Tokenizer::Default), vec!["a", "\"", "b", "\"", "(", "c", ")"]);
        assert_eq!(tokenize("w01 w02.", Tokenizer::Default), vec!["w01", "w02", "."]);
        assert_eq!(tokenize("你好 吗", Tokenizer::Char), vec!["你", "好", "吗"]);
    }

    #[test]
    fn identity_is_exactly_100() {
        let s = ["the cat sat on the mat .", "a b", "x"];
        assert_eq!(corpus_bleu(&s, &s, Tokenizer::Default).unwrap().score, 100.0);
        assert_eq!(corpus_bleu(&s, &s, Tokenizer::Char).unwrap().score, 100.0);
        // short corpus without any 4-gram
        assert_eq!(corpus_bleu(&["a b"], &["a b"], Tokenizer::Default).unwrap().score, 100.0);
    }

    #[test]
    fn clipped_precision_example() {
        let b = corpus_bleu(&["the the the"], &["the cat"], Tokenizer::Default).unwrap();
        assert_eq!(b.matches[0], 1);
        assert_eq!(b.totals[0], 3);
        assert!((b.precision(1) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(b.precision(2), 0.0);
        assert_eq!(b.brevity_penalty, 1.0);
        assert_eq!(b.score, 0.0);
    }

    #[test]
    fn no_four_gram_overlap_is_zero() {
        let b = corpus_bleu(&["a b c d e"], &["a b c x d e"], Tokenizer::Default).unwrap();
        assert_eq!(b.matches[3], 0);
        assert_eq!(b.score, 0.0);
    }

    #[test]
    fn hand_computed_partial_match() {
        // hyp 5 words, ref 7: p = 5/5, 3/4, 1/3, 0/2, so 0 without smoothing
        let b = corpus_bleu(&["a b c d e"], &["a b c x d e f"], Tokenizer::Default).unwrap();
        assert_eq!(b.matches, [5, 3, 1, 0]);
        // drop the 4-gram order by using a 3-word hypothesis
        let b = corpus_bleu(&["a b c"], &["a b c d"], Tokenizer::Default).unwrap();
        assert_eq!(b.totals, [3, 2, 1, 0]);
        let expect = 100.0 * (1.0_f64 - 4.0 / 3.0).exp();
        assert!((b.score - expect).abs() < 1e-9);
    }

    #[test]
    fn permutation_invariant() {
        let h = ["a b c d", "e f g", "h i"];
        let r = ["a b c x", "e f g", "h j"];
        let base = corpus_bleu(&h, &r, Tokenizer::Default).unwrap().score;
        let hp = [h[2], h[0], h[1]];
        let rp = [r[2], r[0], r[1]];
        assert_eq!(corpus_bleu(&hp, &rp, Tokenizer::Default).unwrap().score, base);
    }

    #[test]
    fn case_sensitive() {
        assert!(corpus_bleu(&["The cat"], &["the cat"], Tokenizer::Default).unwrap().score < 100.0);
    }

    #[test]
    fn errors() {
        let empty: [&str; 0] = [];
        assert!(matches!(corpus_bleu(&empty, &empty, Tokenizer::Default), Err(Error::UndefinedScore(_))));
        assert!(corpus_bleu(&["a"], &["a", "b"], Tokenizer::Default).is_err());
        assert_eq!(corpus_bleu(&[""], &["a"], Tokenizer::Default).unwrap().score, 0.0);
    }
}
