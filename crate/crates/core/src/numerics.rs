//! Small dense complex linear algebra kernel.
//!
//! Everything the checker needs: conjugate-linear inner products, outer
//! products, the Hilbert–Schmidt pairing, and the numerical dimension of a
//! span of square matrices together with an orthonormal basis of its
//! complement. Inner products conjugate the *first* argument.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative and absolute thresholds used by every numerical decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// A pivot is dead once it falls below `rank_rel` times the largest
    /// initial row norm.
    pub rank_rel: f64,
    /// Inner products with magnitude below this count as zero.
    pub orth_abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_rel: 1e-8,
            orth_abs: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, orth_abs: f64) -> Result<Self> {
        let tol = Tolerance { rank_rel, orth_abs };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("rank_rel", self.rank_rel), ("orth_abs", self.orth_abs)] {
            if !(value > 0.0 && value < 1e-2) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} = {value} must lie in (0, 1e-2)"
                )));
            }
        }
        Ok(())
    }
}

/// A complex column vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CVector {
    entries: Vec<C64>,
}

impl CVector {
    pub fn new(entries: Vec<C64>) -> Self {
        CVector { entries }
    }

    pub fn from_real(entries: &[f64]) -> Self {
        CVector::new(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        CVector::new(vec![C64::new(0.0, 0.0); dim])
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v.entries[index] = C64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    /// Unit vector along `self`; a zero vector has no direction. Vectors
    /// already of unit norm (to 1e-14) are returned unchanged.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidTolerance(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        if (n - 1.0).abs() <= 1e-14 {
            return Ok(self.clone());
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, factor: C64) -> Self {
        CVector::new(self.entries.iter().map(|z| z * factor).collect())
    }

    pub fn conj(&self) -> Self {
        CVector::new(self.entries.iter().map(|z| z.conj()).collect())
    }

    /// Kronecker product, `self` being the more significant factor.
    pub fn kron(&self, other: &CVector) -> Self {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.entries {
            for b in &other.entries {
                out.push(a * b);
            }
        }
        CVector::new(out)
    }
}

impl From<Vec<C64>> for CVector {
    fn from(entries: Vec<C64>) -> Self {
        CVector::new(entries)
    }
}

/// `⟨a|b⟩ = Σ conj(a_i)·b_i`.
pub fn vec_inner(a: &CVector, b: &CVector) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(raw_inner(a.entries(), b.entries()))
}

#[inline]
pub(crate) fn raw_inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Ok(CMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            entries: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            m.entries[i * d + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &CVector, b: &CVector) -> Self {
        let mut entries = Vec::with_capacity(a.dim() * b.dim());
        for x in a.entries() {
            for y in b.entries() {
                entries.push(x * y.conj());
            }
        }
        CMatrix {
            rows: a.dim(),
            cols: b.dim(),
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.entries[r * self.cols + c]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, factor: C64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.entries[c * self.rows + r] = self.get(r, c).conj();
            }
        }
        out
    }

    /// Entry-wise sum; shapes must agree.
    pub fn add(&self, other: &CMatrix) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub(crate) fn add_assign_outer(&mut self, a: &[C64], b: &[C64]) {
        for (r, x) in a.iter().enumerate() {
            for (c, y) in b.iter().enumerate() {
                self.entries[r * self.cols + c] += x * y.conj();
            }
        }
    }

    pub fn mul_vec(&self, v: &CVector) -> Result<CVector> {
        if v.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.dim(),
            });
        }
        let out = (0..self.rows)
            .map(|r| {
                self.entries[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v.entries())
                    .map(|(m, x)| m * x)
                    .sum()
            })
            .collect();
        Ok(CVector::new(out))
    }

    fn check_same_shape(&self, other: &CMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch {
                expected_rows: self.rows,
                expected_cols: self.cols,
                rows: other.rows,
                cols: other.cols,
            });
        }
        Ok(())
    }
}

/// Hilbert–Schmidt pairing `Tr(M† N)`.
pub fn hs_inner(m: &CMatrix, n: &CMatrix) -> Result<C64> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch {
            expected_rows: m.rows,
            expected_cols: m.rows,
            rows: m.rows,
            cols: m.cols,
        });
    }
    m.check_same_shape(n)?;
    Ok(raw_inner(&m.entries, &n.entries))
}

/// Common side length of a list of square matrices, `None` for an empty list.
fn common_side(mats: &[CMatrix]) -> Result<Option<usize>> {
    let Some(first) = mats.first() else {
        return Ok(None);
    };
    let d = first.rows;
    for m in mats {
        if m.rows != d || m.cols != d {
            return Err(Error::ShapeMismatch {
                expected_rows: d,
                expected_cols: d,
                rows: m.rows,
                cols: m.cols,
            });
        }
    }
    Ok(Some(d))
}

/// Complex dimension of `span(mats)`.
///
/// Matrices are flattened to rows of length `d²` and reduced by fully
/// pivoted Gaussian elimination. Elimination stops when the largest
/// remaining entry drops below `tol.rank_rel` times the largest initial row
/// norm.
pub fn span_rank(mats: &[CMatrix], tol: &Tolerance) -> Result<usize> {
    if common_side(mats)?.is_none() {
        return Ok(0);
    }
    let mut rows: Vec<Vec<C64>> = mats.iter().map(|m| m.entries.clone()).collect();
    Ok(eliminate(&mut rows, tol.rank_rel))
}

fn eliminate(rows: &mut [Vec<C64>], rank_rel: f64) -> usize {
    let width = rows.first().map_or(0, Vec::len);
    let scale = rows
        .iter()
        .map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let threshold = rank_rel * scale;
    let mut col_used = vec![false; width];
    let mut rank = 0;
    while rank < rows.len() {
        let mut best = (0.0, 0, 0);
        for (r, row) in rows.iter().enumerate().skip(rank) {
            for (c, z) in row.iter().enumerate() {
                if !col_used[c] && z.norm() > best.0 {
                    best = (z.norm(), r, c);
                }
            }
        }
        let (mag, pr, pc) = best;
        if mag < threshold {
            break;
        }
        rows.swap(rank, pr);
        col_used[pc] = true;
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        let pivot = pivot_row[pc];
        for row in tail.iter_mut() {
            let factor = row[pc] / pivot;
            if factor.norm() == 0.0 {
                continue;
            }
            for (x, p) in row.iter_mut().zip(pivot_row) {
                *x -= factor * p;
            }
            row[pc] = C64::new(0.0, 0.0);
        }
        rank += 1;
    }
    rank
}

/// Removes from `v` its components along the orthonormal family `basis`
/// (two passes of modified Gram–Schmidt).
fn project_out(v: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for q in basis {
            let coeff = raw_inner(q, v);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= coeff * y;
            }
        }
    }
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Greedy pivoted Gram–Schmidt: picks `count` candidates, each time the one
/// with the largest residual against the family built so far.
fn pivoted_gram_schmidt(candidates: &[Vec<C64>], basis: &mut Vec<Vec<C64>>, count: usize) {
    let mut residuals: Vec<Vec<C64>> = candidates.to_vec();
    let mut taken = vec![false; candidates.len()];
    for _ in 0..count {
        for (res, &t) in residuals.iter_mut().zip(&taken) {
            if !t {
                project_out(res, basis);
            }
        }
        let pick = residuals
            .iter()
            .enumerate()
            .filter(|(i, _)| !taken[*i])
            .map(|(i, r)| (i, vec_norm(r)))
            .fold(None, |acc: Option<(usize, f64)>, (i, n)| match acc {
                Some((_, best)) if best >= n => acc,
                _ => Some((i, n)),
            });
        let Some((i, n)) = pick else { break };
        if n == 0.0 {
            break;
        }
        taken[i] = true;
        let q: Vec<C64> = residuals[i].iter().map(|z| z / n).collect();
        basis.push(q);
    }
}

/// Hilbert–Schmidt orthonormal basis of the orthogonal complement of
/// `span(mats)` inside the `d×d` matrices. Its size is always
/// `d² − span_rank(mats)`.
///
/// An empty generator list carries no side length; use
/// [`orthocomplement_basis_in`] to supply it.
pub fn orthocomplement_basis(mats: &[CMatrix], tol: &Tolerance) -> Result<Vec<CMatrix>> {
    match common_side(mats)? {
        Some(d) => orthocomplement_basis_in(d, mats, tol),
        None => Err(Error::OutOfRange {
            what: "generator list",
            message: "empty list has no matrix size; call orthocomplement_basis_in".into(),
        }),
    }
}

/// As [`orthocomplement_basis`], with the side length `d` given explicitly.
pub fn orthocomplement_basis_in(
    d: usize,
    mats: &[CMatrix],
    tol: &Tolerance,
) -> Result<Vec<CMatrix>> {
    if let Some(side) = common_side(mats)? {
        if side != d {
            return Err(Error::ShapeMismatch {
                expected_rows: d,
                expected_cols: d,
                rows: side,
                cols: side,
            });
        }
    }
    let rank = span_rank(mats, tol)?;
    let generators: Vec<Vec<C64>> = mats.iter().map(|m| m.entries.clone()).collect();
    let mut basis = Vec::with_capacity(d * d);
    pivoted_gram_schmidt(&generators, &mut basis, rank);
    let span_len = basis.len();

    let standard: Vec<Vec<C64>> = (0..d * d)
        .map(|k| {
            let mut e = vec![C64::new(0.0, 0.0); d * d];
            e[k] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    pivoted_gram_schmidt(&standard, &mut basis, d * d - rank);

    basis
        .into_iter()
        .skip(span_len)
        .map(|entries| CMatrix::new(d, d, entries))
        .collect()
}

/// Dominant eigenvector of a positive semidefinite matrix by power
/// iteration from `start`. The Rayleigh quotient never decreases along the
/// iteration, so starting from the current point is an ascent step.
pub fn psd_power_iteration(m: &CMatrix, start: &CVector, iters: usize) -> Result<CVector> {
    let mut v = start.normalized()?;
    for _ in 0..iters {
        let w = m.mul_vec(&v)?;
        let n = w.norm();
        if n <= f64::EPSILON {
            break;
        }
        let next = w.scale(C64::new(1.0 / n, 0.0));
        let delta = next
            .entries()
            .iter()
            .zip(v.entries())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>();
        v = next;
        if delta < 1e-28 {
            break;
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ket(bits: &[f64]) -> CVector {
        CVector::from_real(bits).normalized().unwrap()
    }

    fn ketbra(a: &CVector, b: &CVector) -> CMatrix {
        CMatrix::outer(a, b)
    }

    #[test]
    fn vec_inner_examples() {
        let e0 = CVector::basis(2, 0);
        let e1 = CVector::basis(2, 1);
        assert_eq!(vec_inner(&e0, &e1).unwrap(), c(0.0, 0.0));
        assert_eq!(vec_inner(&e0, &e0).unwrap(), c(1.0, 0.0));
        let plus = ket(&[1.0, 1.0]);
        let minus = ket(&[1.0, -1.0]);
        assert!(vec_inner(&plus, &minus).unwrap().norm() < 1e-15);
    }

    #[test]
    fn vec_inner_conjugates_first_slot() {
        let a = CVector::new(vec![c(0.0, 1.0), c(0.0, 0.0)]);
        let b = CVector::basis(2, 0);
        assert_eq!(vec_inner(&a, &b).unwrap(), c(0.0, -1.0));
        assert_eq!(vec_inner(&b, &a).unwrap(), c(0.0, 1.0));
    }

    #[test]
    fn vec_inner_dimension_mismatch() {
        assert!(matches!(
            vec_inner(&CVector::basis(2, 0), &CVector::basis(3, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hs_inner_examples() {
        let e0 = CVector::basis(2, 0);
        let e1 = CVector::basis(2, 1);
        let id = CMatrix::identity(2);
        let off = ketbra(&e0, &e1);
        assert_eq!(hs_inner(&id, &id).unwrap(), c(2.0, 0.0));
        assert_eq!(hs_inner(&off, &off).unwrap(), c(1.0, 0.0));
        assert_eq!(hs_inner(&id, &off).unwrap(), c(0.0, 0.0));
        assert!(hs_inner(&id, &CMatrix::identity(3)).is_err());
        assert!(hs_inner(&CMatrix::zeros(2, 3), &CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn span_rank_examples() {
        let tol = Tolerance::default();
        let e0 = CVector::basis(2, 0);
        let e1 = CVector::basis(2, 1);
        let plus = ket(&[1.0, 1.0]);
        let minus = ket(&[1.0, -1.0]);
        assert_eq!(span_rank(&[], &tol).unwrap(), 0);

        let a = ketbra(&e0, &e1);
        let b = ketbra(&e1, &e0);
        let sum = a.add(&b).unwrap();
        assert_eq!(span_rank(&[a.clone(), b.clone(), sum], &tol).unwrap(), 2);

        let mats = [a, b, ketbra(&plus, &minus), ketbra(&minus, &plus)];
        assert_eq!(span_rank(&mats, &tol).unwrap(), 3);
    }

    #[test]
    fn span_rank_shape_mismatch() {
        let tol = Tolerance::default();
        assert!(span_rank(&[CMatrix::identity(2), CMatrix::identity(3)], &tol).is_err());
    }

    #[test]
    fn complement_examples() {
        let tol = Tolerance::default();
        assert_eq!(orthocomplement_basis_in(2, &[], &tol).unwrap().len(), 4);
        assert!(orthocomplement_basis(&[], &tol).is_err());

        let e0 = CVector::basis(2, 0);
        let e1 = CVector::basis(2, 1);
        let z = ketbra(&e0, &e0)
            .add(&ketbra(&e1, &e1).scale(c(-1.0, 0.0)))
            .unwrap();
        let traceless = [ketbra(&e0, &e1), ketbra(&e1, &e0), z];
        let comp = orthocomplement_basis(&traceless, &tol).unwrap();
        assert_eq!(comp.len(), 1);
        let expected = CMatrix::identity(2).scale(c(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        // up to a global phase
        let overlap = hs_inner(&expected, &comp[0]).unwrap();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complement_of_qubit3_party_span_is_identity() {
        let tol = Tolerance::default();
        let e0 = CVector::basis(2, 0);
        let e1 = CVector::basis(2, 1);
        let plus = ket(&[1.0, 1.0]);
        let minus = ket(&[1.0, -1.0]);
        let mats = [
            ketbra(&e0, &e1),
            ketbra(&e1, &e0),
            ketbra(&plus, &minus),
            ketbra(&minus, &plus),
        ];
        let comp = orthocomplement_basis(&mats, &tol).unwrap();
        assert_eq!(comp.len(), 1);
        let m = &comp[0];
        assert!(m.get(0, 1).norm() < 1e-12 && m.get(1, 0).norm() < 1e-12);
        assert!((m.get(0, 0) - m.get(1, 1)).norm() < 1e-12);
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(1e-8, 1e-10).is_ok());
        assert!(Tolerance::new(0.0, 1e-10).is_err());
        assert!(Tolerance::new(1e-8, 0.5).is_err());
        assert!(Tolerance::new(f64::NAN, 1e-10).is_err());
    }

    #[test]
    fn power_iteration_finds_top_eigenvector() {
        let m = CMatrix::new(
            2,
            2,
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)],
        )
        .unwrap();
        let v = psd_power_iteration(&m, &ket(&[1.0, 1.0]), 200).unwrap();
        assert!((v.entries()[1].norm() - 1.0).abs() < 1e-9);
    }
}
