use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::exterior::ExteriorElement;
use super::{Parity, SuperDim};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ZERO};

/// A matrix in `Mat(m|n, k|l, ΛR^g)`: row and column index sets are split
/// into even and odd parts, entries live in the exterior algebra on `g`
/// generators (`g = 0` gives ordinary scalar supermatrices).
#[derive(Debug, Clone, PartialEq)]
pub struct SuperMatrix {
    rows: SuperDim,
    cols: SuperDim,
    generators: usize,
    entries: Vec<ExteriorElement>,
}

impl SuperMatrix {
    pub fn zeros(rows: SuperDim, cols: SuperDim, generators: usize) -> Self {
        SuperMatrix {
            rows,
            cols,
            generators,
            entries: vec![ExteriorElement::zero(generators); rows.total() * cols.total()],
        }
    }

    pub fn identity(dim: SuperDim, generators: usize) -> Self {
        let mut out = Self::zeros(dim, dim, generators);
        for i in 0..dim.total() {
            out.entries[i * dim.total() + i] = ExteriorElement::one(generators);
        }
        out
    }

    /// Scalar matrix with entries placed in the body.
    pub fn from_complex(rows: SuperDim, cols: SuperDim, m: &CMatrix, generators: usize) -> Result<Self> {
        if m.nrows() != rows.total() || m.ncols() != cols.total() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for a {}|{} x {}|{} supermatrix",
                m.nrows(),
                m.ncols(),
                rows.even,
                rows.odd,
                cols.even,
                cols.odd
            )));
        }
        let mut out = Self::zeros(rows, cols, generators);
        for r in 0..rows.total() {
            for c in 0..cols.total() {
                out.entries[r * cols.total() + c] = ExteriorElement::scalar(generators, m[(r, c)]);
            }
        }
        Ok(out)
    }

    /// Assembles `Σ_mask M_mask θ^mask` from per-monomial scalar matrices.
    pub fn from_components(
        rows: SuperDim,
        cols: SuperDim,
        generators: usize,
        components: &BTreeMap<u32, CMatrix>,
    ) -> Result<Self> {
        let mut out = Self::zeros(rows, cols, generators);
        for (mask, m) in components {
            if m.nrows() != rows.total() || m.ncols() != cols.total() {
                return Err(Error::DimensionMismatch("component shape".into()));
            }
            for r in 0..rows.total() {
                for c in 0..cols.total() {
                    out.entries[r * cols.total() + c].add_term(*mask, m[(r, c)]);
                }
            }
        }
        Ok(out)
    }

    /// Splits into scalar matrices, one per exterior monomial that occurs.
    pub fn components(&self) -> BTreeMap<u32, CMatrix> {
        let mut out: BTreeMap<u32, CMatrix> = BTreeMap::new();
        let (nr, nc) = (self.rows.total(), self.cols.total());
        for r in 0..nr {
            for c in 0..nc {
                for (mask, v) in self.entries[r * nc + c].terms() {
                    out.entry(mask).or_insert_with(|| CMatrix::zeros(nr, nc))[(r, c)] += v;
                }
            }
        }
        out
    }

    pub fn body(&self) -> CMatrix {
        CMatrix::from_fn(self.rows.total(), self.cols.total(), |r, c| self.get(r, c).body())
    }

    pub fn rows(&self) -> SuperDim {
        self.rows
    }

    pub fn cols(&self) -> SuperDim {
        self.cols
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &ExteriorElement {
        &self.entries[r * self.cols.total() + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: ExteriorElement) -> Result<()> {
        if value.generators() != self.generators {
            return Err(Error::DimensionMismatch("entry generator count".into()));
        }
        let nc = self.cols.total();
        self.entries[r * nc + c] = value;
        Ok(())
    }

    /// Parity carried by the position itself: off-diagonal blocks are odd.
    pub fn block_parity(&self, r: usize, c: usize) -> Parity {
        self.rows.parity_of(r) + self.cols.parity_of(c)
    }

    /// Pure parity if every nonzero monomial of every entry agrees once the
    /// block parity is added; the zero matrix counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut seen: Option<Parity> = None;
        let nc = self.cols.total();
        for (idx, e) in self.entries.iter().enumerate() {
            let bp = self.block_parity(idx / nc, idx % nc);
            for (mask, c) in e.terms() {
                if c == ZERO {
                    continue;
                }
                let p = bp + Parity::from_bit(mask.count_ones());
                match seen {
                    None => seen = Some(p),
                    Some(q) if q != p => return None,
                    _ => {}
                }
            }
        }
        Some(seen.unwrap_or(Parity::Even))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows || self.generators != other.generators {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}|{} columns by {}|{} rows",
                self.cols.even, self.cols.odd, other.rows.even, other.rows.odd
            )));
        }
        let (nr, nk, nc) = (self.rows.total(), self.cols.total(), other.cols.total());
        let mut out = Self::zeros(self.rows, other.cols, self.generators);
        for r in 0..nr {
            for k in 0..nk {
                let a = &self.entries[r * nk + k];
                if a.is_zero() {
                    continue;
                }
                for c in 0..nc {
                    let b = &other.entries[k * nc + c];
                    if b.is_zero() {
                        continue;
                    }
                    let p = a.mul_unchecked(b);
                    let slot = &mut out.entries[r * nc + c];
                    *slot = &*slot + &p;
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&ExteriorElement, &ExteriorElement) -> ExteriorElement) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols || self.generators != other.generators {
            return Err(Error::DimensionMismatch("supermatrix shapes differ".into()));
        }
        Ok(SuperMatrix {
            rows: self.rows,
            cols: self.cols,
            generators: self.generators,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: C64) -> Self {
        SuperMatrix {
            rows: self.rows,
            cols: self.cols,
            generators: self.generators,
            entries: self.entries.iter().map(|e| e.scale(c)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, e| acc.max(e.max_abs()))
    }

    /// Frobenius norm over all monomial coefficients.
    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|e| e.terms().map(|(_, c)| c.norm_sqr()).collect::<Vec<_>>())
            .sum::<f64>()
            .sqrt()
    }

    /// Bound on the operator norm used to pick the scaling exponent.
    fn row_sum_norm(&self) -> f64 {
        let nc = self.cols.total();
        (0..self.rows.total())
            .map(|r| {
                (0..nc)
                    .map(|c| self.entries[r * nc + c].terms().map(|(_, v)| v.norm()).sum::<f64>())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    fn block(&self, row_odd: bool, col_odd: bool) -> Vec<Vec<ExteriorElement>> {
        let rr = if row_odd { self.rows.even..self.rows.total() } else { 0..self.rows.even };
        let cr = if col_odd { self.cols.even..self.cols.total() } else { 0..self.cols.even };
        rr.map(|r| cr.clone().map(|c| self.get(r, c).clone()).collect()).collect()
    }
}

/// `[X, Y] = XY - (-1)^{|X||Y|} YX` for square supermatrices of pure parity.
pub fn super_commutator(x: &SuperMatrix, y: &SuperMatrix) -> Result<SuperMatrix> {
    if !x.is_square() || x.rows != y.rows || x.generators != y.generators {
        return Err(Error::DimensionMismatch(
            "supercommutator needs square supermatrices of equal shape".into(),
        ));
    }
    let px = x.parity().ok_or(Error::MixedParity)?;
    let py = y.parity().ok_or(Error::MixedParity)?;
    let xy = x.mul(y)?;
    let yx = y.mul(x)?;
    xy.sub(&yx.scale(C64::new(px.koszul_sign(py), 0.0)))
}

/// Exponential of an even supermatrix.
///
/// A purely nilpotent input (zero body) is summed exactly: the series stops
/// after at most `g + 1` terms. Otherwise the whole matrix goes through
/// scaling and squaring with a Taylor kernel.
pub fn exp_supermatrix(x: &SuperMatrix) -> Result<SuperMatrix> {
    if !x.is_square() {
        return Err(Error::DimensionMismatch("exp of a non-square supermatrix".into()));
    }
    if x.parity() != Some(Parity::Even) {
        return Err(Error::NotEven);
    }
    let id = SuperMatrix::identity(x.rows, x.generators);
    if x.body().iter().all(|z| *z == ZERO) {
        let mut sum = id.clone();
        let mut term = id;
        for k in 1..=x.generators + 1 {
            term = term.mul(x)?.scale(C64::new(1.0 / k as f64, 0.0));
            if term.max_abs() == 0.0 {
                break;
            }
            sum = sum.add(&term)?;
        }
        return Ok(sum);
    }

    let norm = x.row_sum_norm();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let y = x.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));
    let mut sum = id.clone();
    let mut term = id;
    for k in 1..40 {
        term = term.mul(&y)?.scale(C64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term)?;
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum)?;
    }
    Ok(sum)
}

#[derive(Serialize, Deserialize)]
struct Blocks {
    #[serde(rename = "A")]
    a: Vec<Vec<ExteriorElement>>,
    #[serde(rename = "B")]
    b: Vec<Vec<ExteriorElement>>,
    #[serde(rename = "C")]
    c: Vec<Vec<ExteriorElement>>,
    #[serde(rename = "D")]
    d: Vec<Vec<ExteriorElement>>,
}

#[derive(Serialize, Deserialize)]
struct SuperMatrixRepr {
    rows: SuperDim,
    cols: SuperDim,
    generators: usize,
    blocks: Blocks,
}

impl Serialize for SuperMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SuperMatrixRepr {
            rows: self.rows,
            cols: self.cols,
            generators: self.generators,
            blocks: Blocks {
                a: self.block(false, false),
                b: self.block(false, true),
                c: self.block(true, false),
                d: self.block(true, true),
            },
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SuperMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SuperMatrixRepr::deserialize(deserializer)?;
        let mut out = SuperMatrix::zeros(repr.rows, repr.cols, repr.generators);
        let place = |out: &mut SuperMatrix,
                     block: Vec<Vec<ExteriorElement>>,
                     r0: usize,
                     c0: usize,
                     nr: usize,
                     nc: usize|
         -> std::result::Result<(), D::Error> {
            if block.len() != nr || block.iter().any(|row| row.len() != nc) {
                return Err(D::Error::custom("block shape does not match dimensions"));
            }
            for (i, row) in block.into_iter().enumerate() {
                for (j, e) in row.into_iter().enumerate() {
                    out.set(r0 + i, c0 + j, e).map_err(D::Error::custom)?;
                }
            }
            Ok(())
        };
        let (m, n, k, l) = (repr.rows.even, repr.rows.odd, repr.cols.even, repr.cols.odd);
        place(&mut out, repr.blocks.a, 0, 0, m, k)?;
        place(&mut out, repr.blocks.b, 0, k, m, l)?;
        place(&mut out, repr.blocks.c, m, 0, n, k)?;
        place(&mut out, repr.blocks.d, m, k, n, l)?;
        Ok(out)
    }
}
