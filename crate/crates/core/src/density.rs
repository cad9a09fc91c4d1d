//! Representation and exact arithmetic for 1-D piecewise-constant
//! probability densities.
//!
//! A density is a sorted list of non-overlapping [`Piece`]s; gaps between
//! pieces encode density zero. Width and value are stored as natural
//! logarithms, so constructions with widths like `e^-n / n` remain
//! meaningful even when their linear extent underflows `f64`. Piece
//! coordinates (`start`) are ordinary reals: a piece whose width falls
//! below the coordinate resolution is handled as an atomic "sliver" by
//! the refinement machinery, which keeps overlap and total-variation
//! integrals exact in log space.

use alloc::vec::Vec;
use thiserror::Error;

use crate::math;
use crate::sum::CompensatedSum;

/// Default relative tolerance for the unit-mass check. All built-in
/// families normalize exactly in closed form, so larger drift indicates
/// a construction bug.
pub const DEFAULT_MASS_TOLERANCE: f64 = 1e-9;

/// Absolute slack allowed between one piece's end and the next piece's
/// start before the pair is reported as overlapping.
const GAP_TOLERANCE: f64 = 1e-9;

/// One constant piece of a density: the interval `[start, start + width)`
/// with `width = exp(log_length)` and value `exp(log_value)`.
/// `log_value = -inf` encodes the value zero exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub log_length: f64,
    pub log_value: f64,
}

impl Piece {
    pub fn new(start: f64, log_length: f64, log_value: f64) -> Self {
        Self {
            start,
            log_length,
            log_value,
        }
    }

    /// Builds a piece from linear width and value; value 0 maps to
    /// `log_value = -inf`.
    pub fn from_linear(start: f64, width: f64, value: f64) -> Self {
        let log_value = if value == 0.0 {
            f64::NEG_INFINITY
        } else {
            math::ln(value)
        };
        Self::new(start, math::ln(width), log_value)
    }

    pub fn width(&self) -> f64 {
        math::exp(self.log_length)
    }

    pub fn value(&self) -> f64 {
        math::exp(self.log_value)
    }

    /// Right endpoint in linear coordinates. Equals `start` when the
    /// width underflows the coordinate resolution.
    pub fn end(&self) -> f64 {
        self.start + self.width()
    }

    /// `value * width`, computed in log space.
    pub fn mass(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            math::exp(self.log_value + self.log_length)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_value == f64::NEG_INFINITY
    }

    /// True when the linear extent of the piece is below `f64`
    /// resolution at its coordinate.
    pub(crate) fn is_sliver(&self) -> bool {
        self.end() == self.start
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DensityError {
    #[error("piece list is empty")]
    Empty,
    #[error("mass tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("piece {index}: start must be finite, got {start}")]
    BadStart { index: usize, start: f64 },
    #[error("piece {index}: log_length must be finite, got {log_length}")]
    BadWidth { index: usize, log_length: f64 },
    #[error("piece {index}: log_value must not be NaN or +inf, got {log_value}")]
    BadValue { index: usize, log_value: f64 },
    #[error("pieces {left} and {right} overlap by {amount}")]
    Overlap {
        left: usize,
        right: usize,
        amount: f64,
    },
    #[error("total mass {total} is off unity beyond tolerance {tolerance}")]
    Mass { total: f64, tolerance: f64 },
    #[error("scale factor must be positive and finite, got {0}")]
    BadScale(f64),
}

/// A validated piecewise-constant probability density.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePdf {
    pieces: Vec<Piece>,
    mass_tolerance: f64,
}

impl PiecewisePdf {
    /// Validates and normal-orders the pieces: sorted by start,
    /// pairwise non-overlapping, total mass within `mass_tolerance`
    /// of one.
    pub fn new(pieces: Vec<Piece>, mass_tolerance: f64) -> Result<Self, DensityError> {
        if !(mass_tolerance > 0.0) || !mass_tolerance.is_finite() {
            return Err(DensityError::BadTolerance(mass_tolerance));
        }
        if pieces.is_empty() {
            return Err(DensityError::Empty);
        }
        for (index, p) in pieces.iter().enumerate() {
            if !p.start.is_finite() {
                return Err(DensityError::BadStart {
                    index,
                    start: p.start,
                });
            }
            if !p.log_length.is_finite() {
                return Err(DensityError::BadWidth {
                    index,
                    log_length: p.log_length,
                });
            }
            if p.log_value.is_nan() || p.log_value == f64::INFINITY {
                return Err(DensityError::BadValue {
                    index,
                    log_value: p.log_value,
                });
            }
        }
        let mut pieces = pieces;
        pieces.sort_unstable_by(|a, b| {
            a.start
                .total_cmp(&b.start)
                .then(a.log_length.total_cmp(&b.log_length))
        });
        for i in 0..pieces.len() - 1 {
            let end = pieces[i].end();
            let next = pieces[i + 1].start;
            if end > next + GAP_TOLERANCE {
                return Err(DensityError::Overlap {
                    left: i,
                    right: i + 1,
                    amount: end - next,
                });
            }
        }
        let pdf = Self {
            pieces,
            mass_tolerance,
        };
        let total = pdf.mass();
        if (total - 1.0).abs() > mass_tolerance {
            return Err(DensityError::Mass {
                total,
                tolerance: mass_tolerance,
            });
        }
        Ok(pdf)
    }

    /// `new` with [`DEFAULT_MASS_TOLERANCE`].
    pub fn from_pieces(pieces: Vec<Piece>) -> Result<Self, DensityError> {
        Self::new(pieces, DEFAULT_MASS_TOLERANCE)
    }

    /// The uniform density on `[0, 1]`.
    pub fn uniform01() -> Self {
        Self::from_pieces(alloc::vec![Piece::new(0.0, 0.0, 0.0)])
            .expect("uniform density is valid")
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn mass_tolerance(&self) -> f64 {
        self.mass_tolerance
    }

    /// Total mass, summed in log space per piece with compensation.
    pub fn mass(&self) -> f64 {
        self.pieces
            .iter()
            .map(Piece::mass)
            .collect::<CompensatedSum>()
            .total()
    }

    /// Density value at `x` under the right-open convention
    /// `[start, start + width)`; zero on gaps and outside the support.
    pub fn evaluate(&self, x: f64) -> f64 {
        if x.is_nan() {
            return 0.0;
        }
        match self.log_value_at(x) {
            f64::NEG_INFINITY => 0.0,
            lv => math::exp(lv),
        }
    }

    fn log_value_at(&self, x: f64) -> f64 {
        let idx = self.pieces.partition_point(|p| p.start <= x);
        if idx == 0 {
            return f64::NEG_INFINITY;
        }
        let p = &self.pieces[idx - 1];
        if x < p.end() {
            p.log_value
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Density of `a * X` for `X ~ self`: coordinates scale by `a`,
    /// widths gain `ln a`, values lose `ln a`.
    pub fn dilate(&self, a: f64) -> Result<Self, DensityError> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(DensityError::BadScale(a));
        }
        let ln_a = math::ln(a);
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece::new(p.start * a, p.log_length + ln_a, p.log_value - ln_a))
            .collect();
        Self::new(pieces, self.mass_tolerance)
    }

    /// Re-expresses both densities over their common breakpoint
    /// refinement. Values are unchanged as functions; the symmetric
    /// difference of the supports is materialized as explicit zero
    /// pieces.
    pub fn refine(&self, other: &Self) -> (Vec<Piece>, Vec<Piece>) {
        let cells = refined_cells(self, other);
        let left = cells
            .iter()
            .map(|c| Piece::new(c.start, c.log_length, c.lv_left))
            .collect();
        let right = cells
            .iter()
            .map(|c| Piece::new(c.start, c.log_length, c.lv_right))
            .collect();
        (left, right)
    }

    /// `integral of min(self, other)`, exact over the common refinement.
    /// Lies in `[0, 1]` for unit-mass inputs.
    pub fn overlap_mass(&self, other: &Self) -> f64 {
        let mut acc = CompensatedSum::new();
        for cell in refined_cells(self, other) {
            let lv = cell.lv_left.min(cell.lv_right);
            if lv > f64::NEG_INFINITY {
                acc.add(math::exp(lv + cell.log_length));
            }
        }
        acc.total().clamp(0.0, 1.0)
    }

    /// `integral of |self - other|`, exact over the common refinement.
    /// Equals `2 - 2 * overlap_mass` for unit-mass inputs; that identity
    /// is checked in tests rather than assumed here.
    pub fn tv_distance(&self, other: &Self) -> f64 {
        let mut acc = CompensatedSum::new();
        for cell in refined_cells(self, other) {
            if cell.lv_left == cell.lv_right {
                continue;
            }
            let hi = cell.lv_left.max(cell.lv_right);
            let lo = cell.lv_left.min(cell.lv_right);
            // |e^hi - e^lo| = e^hi * (1 - e^(lo - hi)), kept in log space
            // so spike heights like e^n never overflow.
            let term_log = if lo == f64::NEG_INFINITY {
                hi + cell.log_length
            } else {
                hi + math::ln_1p(-math::exp(lo - hi)) + cell.log_length
            };
            acc.add(math::exp(term_log));
        }
        acc.total().clamp(0.0, 2.0)
    }
}

/// One interval of the common refinement, carrying both densities'
/// log values.
#[derive(Clone, Copy, Debug)]
pub(crate) struct RefinedCell {
    pub start: f64,
    pub log_length: f64,
    pub lv_left: f64,
    pub lv_right: f64,
}

/// Computes the common refinement of two densities, including zero
/// cells where exactly one has support.
///
/// Pieces whose width underflows the coordinate grid ("slivers") cannot
/// be split by any representable breakpoint; they pass through whole,
/// paired against the other density's value at their position. Two
/// slivers from opposite sides at the same coordinate are paired over
/// the shorter width, with the length difference taken in log space, so
/// spike-vs-spike overlap stays exact. Several same-side slivers
/// stacked at one coordinate are each paired against the other side's
/// regular value.
pub(crate) fn refined_cells(left: &PiecewisePdf, right: &PiecewisePdf) -> Vec<RefinedCell> {
    let mut coords: Vec<f64> = Vec::with_capacity(2 * (left.pieces.len() + right.pieces.len()));
    for p in left.pieces.iter().chain(right.pieces.iter()) {
        coords.push(p.start);
        coords.push(p.end());
    }
    coords.sort_unstable_by(f64::total_cmp);
    coords.dedup();

    let mut cells = Vec::new();

    // Slivers, grouped by coordinate; opposite-side pairs are matched up.
    let left_slivers: Vec<&Piece> = left.pieces.iter().filter(|p| p.is_sliver()).collect();
    let right_slivers: Vec<&Piece> = right.pieces.iter().filter(|p| p.is_sliver()).collect();
    let mut li = 0;
    let mut ri = 0;
    while li < left_slivers.len() || ri < right_slivers.len() {
        let lc = left_slivers.get(li).map(|p| p.start);
        let rc = right_slivers.get(ri).map(|p| p.start);
        match (lc, rc) {
            (Some(a), Some(b)) if a == b => {
                pair_slivers(
                    left_slivers[li],
                    right_slivers[ri],
                    left,
                    right,
                    &mut cells,
                );
                li += 1;
                ri += 1;
            }
            (Some(a), rc) if rc.is_none() || a < rc.unwrap() => {
                let p = left_slivers[li];
                cells.push(RefinedCell {
                    start: p.start,
                    log_length: p.log_length,
                    lv_left: p.log_value,
                    lv_right: regular_log_value_at(right, p.start),
                });
                li += 1;
            }
            _ => {
                let p = right_slivers[ri];
                cells.push(RefinedCell {
                    start: p.start,
                    log_length: p.log_length,
                    lv_left: regular_log_value_at(left, p.start),
                    lv_right: p.log_value,
                });
                ri += 1;
            }
        }
    }

    // Regular cells between consecutive distinct coordinates.
    let mut lw = PieceWalker::new(&left.pieces);
    let mut rw = PieceWalker::new(&right.pieces);
    for pair in coords.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let lp = lw.covering(a);
        let rp = rw.covering(a);
        let (lv_left, lv_right) = (
            lp.map_or(f64::NEG_INFINITY, |p| p.log_value),
            rp.map_or(f64::NEG_INFINITY, |p| p.log_value),
        );
        if lv_left == f64::NEG_INFINITY && lv_right == f64::NEG_INFINITY {
            continue;
        }
        // Prefer an original log_length when the cell spans a whole
        // piece; subtraction of breakpoints only for genuine splits.
        let log_length = if let Some(p) = lp.filter(|p| p.start == a && p.end() == b) {
            p.log_length
        } else if let Some(p) = rp.filter(|p| p.start == a && p.end() == b) {
            p.log_length
        } else {
            math::ln(b - a)
        };
        cells.push(RefinedCell {
            start: a,
            log_length,
            lv_left,
            lv_right,
        });
    }

    cells.sort_unstable_by(|x, y| {
        x.start
            .total_cmp(&y.start)
            .then(x.log_length.total_cmp(&y.log_length))
    });
    cells
}

fn pair_slivers(
    lp: &Piece,
    rp: &Piece,
    left: &PiecewisePdf,
    right: &PiecewisePdf,
    cells: &mut Vec<RefinedCell>,
) {
    let short = lp.log_length.min(rp.log_length);
    let long = lp.log_length.max(rp.log_length);
    cells.push(RefinedCell {
        start: lp.start,
        log_length: short,
        lv_left: lp.log_value,
        lv_right: rp.log_value,
    });
    if long > short {
        // Remainder of the longer sliver against the other side's
        // regular value at this coordinate.
        let log_length = long + math::ln_1p(-math::exp(short - long));
        let (lv_left, lv_right) = if lp.log_length > rp.log_length {
            (lp.log_value, regular_log_value_at(right, lp.start))
        } else {
            (regular_log_value_at(left, lp.start), rp.log_value)
        };
        cells.push(RefinedCell {
            start: lp.start,
            log_length,
            lv_left,
            lv_right,
        });
    }
}

/// Log value of the piece covering `x`, ignoring slivers.
fn regular_log_value_at(pdf: &PiecewisePdf, x: f64) -> f64 {
    let idx = pdf.pieces.partition_point(|p| p.start <= x);
    for p in pdf.pieces[..idx].iter().rev() {
        if p.is_sliver() {
            continue;
        }
        return if x < p.end() {
            p.log_value
        } else {
            f64::NEG_INFINITY
        };
    }
    f64::NEG_INFINITY
}

/// Forward-only lookup of the non-sliver piece covering a coordinate;
/// the refinement walks coordinates in increasing order.
struct PieceWalker<'a> {
    pieces: &'a [Piece],
    idx: usize,
}

impl<'a> PieceWalker<'a> {
    fn new(pieces: &'a [Piece]) -> Self {
        Self { pieces, idx: 0 }
    }

    fn covering(&mut self, x: f64) -> Option<&'a Piece> {
        while self.idx < self.pieces.len() {
            let p = &self.pieces[self.idx];
            if p.is_sliver() || p.end() <= x {
                self.idx += 1;
                continue;
            }
            return if p.start <= x { Some(p) } else { None };
        }
        None
    }
}
