use serde::{Deserialize, Serialize};

use crate::decoder::CommittedToken;
use crate::lattice::Vocabulary;
use crate::{Error, Result};

use super::{corpus_bleu, laal, mwer_resegment, tokenize, BleuScore, Tokenizer};

/// A detokenized output word and the time its last token was released.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedWord {
    pub text: String,
    pub delay_ms: f64,
}

/// A reference sentence and the source interval it covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefSegment {
    pub text: String,
    pub start_ms: f64,
    pub end_ms: f64,
}

pub fn split_words(text: &str) -> Vec<String> {
    text.split_whitespace().map(String::from).collect()
}

/// Detokenize committed tokens the same way as [`Vocabulary::detokenize`],
/// keeping per-word delays.
pub fn timed_words(tokens: &[CommittedToken], vocab: &Vocabulary) -> Vec<TimedWord> {
    let marker = vocab.rule().word_marker.as_str();
    let mut chars: Vec<(char, f64)> = Vec::new();
    for c in tokens {
        if c.token == vocab.blank_id() {
            continue;
        }
        let Some(surface) = vocab.surface(c.token) else { continue };
        let text = if marker.is_empty() { surface.to_string() } else { surface.replace(marker, " ") };
        chars.extend(text.chars().map(|ch| (ch, c.delay_ms)));
    }
    let mut words = Vec::new();
    let mut cur = TimedWord { text: String::new(), delay_ms: 0.0 };
    for (ch, d) in chars {
        if ch.is_whitespace() {
            if !cur.text.is_empty() {
                words.push(std::mem::replace(&mut cur, TimedWord { text: String::new(), delay_ms: 0.0 }));
            }
        } else {
            cur.text.push(ch);
            cur.delay_ms = d;
        }
    }
    if !cur.text.is_empty() {
        words.push(cur);
    }
    words
}

/// Latency units of a word: one per word, or one per character for the
/// character tokenizer.
fn units(word: &str, tokenizer: Tokenizer) -> usize {
    match tokenizer {
        Tokenizer::Default => 1,
        Tokenizer::Char => tokenize(word, Tokenizer::Char).len(),
    }
}

/// One stream after resegmentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamEval {
    pub hyp_segments: Vec<String>,
    pub ref_segments: Vec<String>,
    /// Word edit distance of the best resegmentation.
    pub distance: usize,
    /// LAAL of each reference sentence, relative to its start; `None` when
    /// the sentence received no hypothesis words.
    pub laal_ms: Vec<Option<f64>>,
}

/// Resegment a stream's output against its references and score latency
/// per sentence.
pub fn evaluate_stream(hyp: &[TimedWord], refs: &[RefSegment], tokenizer: Tokenizer) -> Result<StreamEval> {
    if refs.is_empty() {
        return Err(Error::UndefinedScore("stream has no reference segments".into()));
    }
    let hyp_text: Vec<&str> = hyp.iter().map(|w| w.text.as_str()).collect();
    let ref_words: Vec<Vec<String>> = refs.iter().map(|r| split_words(&r.text)).collect();
    let ref_refs: Vec<Vec<&str>> = ref_words.iter().map(|r| r.iter().map(String::as_str).collect()).collect();
    let reseg = mwer_resegment(&hyp_text, &ref_refs);
    let mut hyp_segments = Vec::with_capacity(refs.len());
    let mut laal_ms = Vec::with_capacity(refs.len());
    for (k, r) in refs.iter().enumerate() {
        let piece = &hyp[reseg.cuts[k]..reseg.cuts[k + 1]];
        hyp_segments.push(piece.iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" "));
        let delays: Vec<f64> = piece
            .iter()
            .flat_map(|w| std::iter::repeat_n(w.delay_ms - r.start_ms, units(&w.text, tokenizer)))
            .collect();
        let ref_len: usize = ref_words[k].iter().map(|w| units(w, tokenizer)).sum();
        laal_ms.push(if delays.is_empty() || ref_len == 0 {
            None
        } else {
            Some(laal(&delays, r.end_ms - r.start_ms, ref_len)?)
        });
    }
    Ok(StreamEval {
        hyp_segments,
        ref_segments: refs.iter().map(|r| r.text.clone()).collect(),
        distance: reseg.distance,
        laal_ms,
    })
}

/// Corpus-level scores over resegmented streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEval {
    pub bleu: BleuScore,
    /// Mean sentence LAAL over sentences with output.
    pub laal_ms: Option<f64>,
    pub sentences: usize,
    pub sentences_without_output: usize,
    pub mwer_distance: usize,
}

impl CorpusEval {
    pub fn from_streams(streams: &[StreamEval], tokenizer: Tokenizer) -> Result<CorpusEval> {
        let hyps: Vec<&str> = streams.iter().flat_map(|s| s.hyp_segments.iter().map(String::as_str)).collect();
        let refs: Vec<&str> = streams.iter().flat_map(|s| s.ref_segments.iter().map(String::as_str)).collect();
        let bleu = corpus_bleu(&hyps, &refs, tokenizer)?;
        let lags: Vec<f64> = streams.iter().flat_map(|s| s.laal_ms.iter().flatten().copied()).collect();
        Ok(CorpusEval {
            bleu,
            laal_ms: (!lags.is_empty()).then(|| lags.iter().sum::<f64>() / lags.len() as f64),
            sentences: refs.len(),
            sentences_without_output: streams.iter().map(|s| s.laal_ms.iter().filter(|l| l.is_none()).count()).sum(),
            mwer_distance: streams.iter().map(|s| s.distance).sum(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_vocabulary;

    fn vocab() -> Vocabulary {
        make_vocabulary(&["\u{2581}a", "\u{2581}b", "c", "."], "<blank>").unwrap()
    }

    fn tok(token: usize, delay_ms: f64) -> CommittedToken {
        CommittedToken { token, delay_ms }
    }

    #[test]
    fn words_take_their_last_token_delay() {
        let toks = [tok(0, 100.0), tok(2, 300.0), tok(4, 350.0), tok(1, 400.0), tok(3, 900.0)];
        let words = timed_words(&toks, &vocab());
        let text: Vec<&str> = words.iter().map(|w| w.text.as_str()).collect();
        assert_eq!(text.join(" "), vocab().detokenize(&toks.iter().map(|t| t.token).collect::<Vec<_>>()));
        assert_eq!(text, vec!["ac", "b."]);
        assert_eq!(words[0].delay_ms, 300.0);
        assert_eq!(words[1].delay_ms, 900.0);
    }

    #[test]
    fn perfect_stream() {
        let refs = vec![
            RefSegment { text: "a b.".into(), start_ms: 0.0, end_ms: 1000.0 },
            RefSegment { text: "b a.".into(), start_ms: 1000.0, end_ms: 3000.0 },
        ];
        let hyp: Vec<TimedWord> = [("a", 400.0), ("b.", 1000.0), ("b", 1800.0), ("a.", 3000.0)]
            .iter()
            .map(|&(t, d)| TimedWord { text: t.into(), delay_ms: d })
            .collect();
        let s = evaluate_stream(&hyp, &refs, Tokenizer::Default).unwrap();
        assert_eq!(s.distance, 0);
        assert_eq!(s.hyp_segments, vec!["a b.", "b a."]);
        // sentence 1: tau = 2, (400 + (1000 - 500)) / 2
        assert_eq!(s.laal_ms[0], Some(450.0));
        // sentence 2 relative to 1000 ms: (800 + (2000 - 1000)) / 2
        assert_eq!(s.laal_ms[1], Some(900.0));
        let c = CorpusEval::from_streams(&[s], Tokenizer::Default).unwrap();
        assert_eq!(c.bleu.score, 100.0);
        assert_eq!(c.laal_ms, Some(675.0));
        assert_eq!(c.sentences_without_output, 0);
    }

    #[test]
    fn missing_output_is_counted() {
        let refs = vec![
            RefSegment { text: "a b.".into(), start_ms: 0.0, end_ms: 1000.0 },
            RefSegment { text: "c d e.".into(), start_ms: 1000.0, end_ms: 3000.0 },
        ];
        let hyp = vec![TimedWord { text: "a".into(), delay_ms: 500.0 }, TimedWord { text: "b.".into(), delay_ms: 900.0 }];
        let s = evaluate_stream(&hyp, &refs, Tokenizer::Default).unwrap();
        assert_eq!(s.laal_ms[1], None);
        let c = CorpusEval::from_streams(&[s], Tokenizer::Default).unwrap();
        assert_eq!(c.sentences_without_output, 1);
        assert_eq!(c.mwer_distance, 3);
    }

    #[test]
    fn char_units() {
        let refs = vec![RefSegment { text: "ab".into(), start_ms: 0.0, end_ms: 200.0 }];
        let hyp = vec![TimedWord { text: "ab".into(), delay_ms: 200.0 }];
        let s = evaluate_stream(&hyp, &refs, Tokenizer::Char).unwrap();
        // two chars, both at 200: (200 + ...) tau = 1
        assert_eq!(s.laal_ms[0], Some(200.0));
    }
}
