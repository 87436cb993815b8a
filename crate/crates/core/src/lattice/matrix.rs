use crate::logspace::log_sum_exp;
use crate::{Error, Result};

use super::Vocabulary;

/// Encoder frame duration: a 1.6 s block of 40 encoder frames.
pub const DEFAULT_FRAME_MS: f64 = 40.0;

/// Allowed |logsumexp(row)| for a row to count as normalized. Admits rows
/// that went through 32-bit storage.
pub const ROW_NORM_TOLERANCE: f64 = 1e-6;

/// Per-frame natural-log probabilities over the vocabulary plus blank,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CtcLattice {
    width: usize,
    frame_duration_ms: f64,
    data: Vec<f64>,
}

impl CtcLattice {
    pub fn empty(width: usize, frame_duration_ms: f64) -> Result<CtcLattice> {
        Self::from_flat(width, frame_duration_ms, Vec::new())
    }

    pub fn from_rows(rows: &[Vec<f64>], frame_duration_ms: f64) -> Result<CtcLattice> {
        let width = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::validation("cannot infer width from zero rows"))?;
        let mut data = Vec::with_capacity(rows.len() * width);
        for (t, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::validation(format!(
                    "row {t} has {} columns, expected {width}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(width, frame_duration_ms, data)
    }

    /// Validate and wrap a row-major buffer. Denormalized rows are rejected.
    pub fn from_flat(width: usize, frame_duration_ms: f64, data: Vec<f64>) -> Result<CtcLattice> {
        if width == 0 {
            return Err(Error::validation("lattice width must include the blank column"));
        }
        if !(frame_duration_ms.is_finite() && frame_duration_ms > 0.0) {
            return Err(Error::validation(format!(
                "frame duration must be positive, got {frame_duration_ms}"
            )));
        }
        if !data.len().is_multiple_of(width) {
            return Err(Error::validation(format!(
                "buffer of {} values is not a multiple of width {width}",
                data.len()
            )));
        }
        for (t, row) in data.chunks_exact(width).enumerate() {
            validate_row(t, row)?;
        }
        Ok(CtcLattice {
            width,
            frame_duration_ms,
            data,
        })
    }

    pub fn frames(&self) -> usize {
        self.data.len() / self.width
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn frame_duration_ms(&self) -> f64 {
        self.frame_duration_ms
    }

    pub fn duration_ms(&self) -> f64 {
        self.frames() as f64 * self.frame_duration_ms
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.width..(t + 1) * self.width]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.width)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn check_vocabulary(&self, vocab: &Vocabulary) -> Result<()> {
        if vocab.width() != self.width {
            return Err(Error::validation(format!(
                "lattice has {} columns but vocabulary has {} entries (blank included)",
                self.width,
                vocab.width()
            )));
        }
        Ok(())
    }

    /// Rows `from..to` as a new lattice.
    pub fn slice(&self, from: usize, to: usize) -> Result<CtcLattice> {
        let frames = self.frames();
        if to > frames {
            return Err(Error::Bounds {
                what: "slice end frame",
                index: to,
                limit: frames,
            });
        }
        if from > to {
            return Err(Error::Bounds {
                what: "slice start frame",
                index: from,
                limit: to,
            });
        }
        Ok(CtcLattice {
            width: self.width,
            frame_duration_ms: self.frame_duration_ms,
            data: self.data[from * self.width..to * self.width].to_vec(),
        })
    }

    /// Concatenate `tail` after `self`.
    pub fn append(&self, tail: &CtcLattice) -> Result<CtcLattice> {
        let mut out = self.clone();
        out.extend(tail)?;
        Ok(out)
    }

    /// In-place [`append`](Self::append).
    pub fn extend(&mut self, tail: &CtcLattice) -> Result<()> {
        if tail.width != self.width {
            return Err(Error::validation(format!(
                "cannot append lattice of width {} to width {}",
                tail.width, self.width
            )));
        }
        if tail.frame_duration_ms != self.frame_duration_ms {
            return Err(Error::validation(format!(
                "frame duration mismatch: {} vs {}",
                tail.frame_duration_ms, self.frame_duration_ms
            )));
        }
        self.data.extend_from_slice(&tail.data);
        Ok(())
    }
}

fn validate_row(t: usize, row: &[f64]) -> Result<()> {
    if row.iter().any(|v| v.is_nan() || *v > ROW_NORM_TOLERANCE) {
        return Err(Error::Denormalized {
            row: t,
            logsumexp: log_sum_exp(row),
        });
    }
    let lse = log_sum_exp(row);
    if !(lse.abs() <= ROW_NORM_TOLERANCE) {
        return Err(Error::Denormalized { row: t, logsumexp: lse });
    }
    Ok(())
}
