use std::collections::{BTreeSet, HashSet};

use crate::{Error, Result};

pub type TokenId = usize;

/// Word-start marker used by unigram/sentencepiece vocabularies.
pub const WORD_MARKER: &str = "\u{2581}";

/// Decides which surfaces count as sentence punctuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PunctRule {
    /// Stripped from a surface before the terminal-character test.
    pub word_marker: String,
    pub marks: Vec<char>,
}

impl Default for PunctRule {
    fn default() -> Self {
        PunctRule {
            word_marker: WORD_MARKER.to_string(),
            marks: vec!['.', '!', '?'],
        }
    }
}

impl PunctRule {
    pub fn is_punct(&self, surface: &str) -> bool {
        let stripped = if self.word_marker.is_empty() {
            surface.to_string()
        } else {
            surface.replace(&self.word_marker, "")
        };
        stripped
            .chars()
            .last()
            .is_some_and(|c| self.marks.contains(&c))
    }
}

/// Token surfaces with the CTC blank stored as the final entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    surfaces: Vec<String>,
    blank_id: TokenId,
    punct_ids: BTreeSet<TokenId>,
    rule: PunctRule,
}

/// Build a vocabulary from token surfaces, appending `blank_surface` as the
/// last id. Punctuation ids are derived with the default [`PunctRule`].
pub fn make_vocabulary<S: AsRef<str>>(surfaces: &[S], blank_surface: &str) -> Result<Vocabulary> {
    Vocabulary::with_rule(surfaces, blank_surface, PunctRule::default())
}

impl Vocabulary {
    pub fn with_rule<S: AsRef<str>>(
        surfaces: &[S],
        blank_surface: &str,
        rule: PunctRule,
    ) -> Result<Vocabulary> {
        let mut seen = HashSet::new();
        for s in surfaces {
            let s = s.as_ref();
            if s.is_empty() {
                return Err(Error::validation("empty token surface"));
            }
            if !seen.insert(s) {
                return Err(Error::validation(format!("duplicate surface {s:?}")));
            }
        }
        if blank_surface.is_empty() {
            return Err(Error::validation("empty blank surface"));
        }
        if seen.contains(blank_surface) {
            return Err(Error::validation(format!(
                "blank surface {blank_surface:?} is also a token"
            )));
        }
        let punct_ids = surfaces
            .iter()
            .enumerate()
            .filter(|(_, s)| rule.is_punct(s.as_ref()))
            .map(|(i, _)| i)
            .collect();
        let mut all: Vec<String> = surfaces.iter().map(|s| s.as_ref().to_string()).collect();
        let blank_id = all.len();
        all.push(blank_surface.to_string());
        Ok(Vocabulary {
            surfaces: all,
            blank_id,
            punct_ids,
            rule,
        })
    }

    /// Parse the sidecar vocabulary format: one surface per line, blank last.
    pub fn from_lines(text: &str) -> Result<Vocabulary> {
        let mut lines: Vec<&str> = text.lines().collect();
        // a trailing empty line is tolerated, nothing else
        while lines.last() == Some(&"") {
            lines.pop();
        }
        let blank = lines
            .pop()
            .ok_or_else(|| Error::validation("vocabulary file is empty"))?;
        Vocabulary::with_rule(&lines, blank, PunctRule::default())
    }

    pub fn to_lines(&self) -> String {
        let mut out = self.surfaces.join("\n");
        out.push('\n');
        out
    }

    /// Number of lattice columns (tokens plus blank).
    pub fn width(&self) -> usize {
        self.surfaces.len()
    }

    /// Number of real tokens, excluding blank.
    pub fn num_tokens(&self) -> usize {
        self.blank_id
    }

    pub fn blank_id(&self) -> TokenId {
        self.blank_id
    }

    pub fn punct_ids(&self) -> &BTreeSet<TokenId> {
        &self.punct_ids
    }

    pub fn is_punct(&self, id: TokenId) -> bool {
        self.punct_ids.contains(&id)
    }

    pub fn surface(&self, id: TokenId) -> Option<&str> {
        self.surfaces.get(id).map(String::as_str)
    }

    pub fn surfaces(&self) -> &[String] {
        &self.surfaces
    }

    pub fn id_of(&self, surface: &str) -> Option<TokenId> {
        self.surfaces.iter().position(|s| s == surface)
    }

    pub fn rule(&self) -> &PunctRule {
        &self.rule
    }

    /// Join token surfaces into text. The word marker becomes a space;
    /// surfaces without it attach to the previous word.
    pub fn detokenize(&self, tokens: &[TokenId]) -> String {
        let marker = &self.rule.word_marker;
        let mut out = String::new();
        for &t in tokens {
            if t == self.blank_id {
                continue;
            }
            let Some(s) = self.surfaces.get(t) else { continue };
            if marker.is_empty() {
                out.push_str(s);
            } else {
                out.push_str(&s.replace(marker.as_str(), " "));
            }
        }
        out.split_whitespace().collect::<Vec<_>>().join(" ")
    }
}
