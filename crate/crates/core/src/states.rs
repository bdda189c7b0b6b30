//! Multipartite pure states and ordered state sets.
//!
//! Amplitudes use row-major (big-endian) indexing throughout: the leftmost
//! party is the most significant digit of the flat index.

use std::fs;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{raw_inner, vec_inner, CVector, Tolerance};

/// Largest total dimension for which a dense amplitude vector is allowed.
pub const MAX_DENSE_DIM: usize = 1 << 26;

/// Local dimensions of the parties, leftmost first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartySignature {
    dims: Vec<usize>,
}

impl PartySignature {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidSignature("no parties".into()));
        }
        if let Some((i, d)) = dims.iter().enumerate().find(|(_, &d)| d < 2) {
            return Err(Error::InvalidSignature(format!(
                "party {i} has dimension {d}; every party needs dimension >= 2"
            )));
        }
        Ok(PartySignature { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, party: usize) -> usize {
        self.dims[party]
    }

    /// `Π d_i`, or `None` if it overflows `usize`.
    pub fn total_dim(&self) -> Option<usize> {
        self.dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
    }

    /// Total dimension, provided it is small enough to hold densely.
    pub fn dense_dim(&self) -> Result<usize> {
        match self.total_dim() {
            Some(n) if n <= MAX_DENSE_DIM => Ok(n),
            _ => Err(Error::InvalidSignature(format!(
                "total dimension of {:?} exceeds the dense limit 2^26",
                self.dims
            ))),
        }
    }

    pub fn check_party(&self, party: usize) -> Result<()> {
        if party >= self.parties() {
            return Err(Error::PartyOutOfRange {
                party,
                parties: self.parties(),
            });
        }
        Ok(())
    }

    pub fn concat(&self, other: &PartySignature) -> PartySignature {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PartySignature { dims }
    }
}

/// `⊗_r |φ_r⟩` with every factor a unit vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    factors: Vec<CVector>,
}

impl ProductState {
    /// Normalizes each factor. Zero factors are rejected.
    pub fn new(factors: Vec<CVector>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidState {
                state: 0,
                message: "product state without factors".into(),
            });
        }
        let factors = factors
            .iter()
            .enumerate()
            .map(|(r, f)| {
                f.normalized().map_err(|_| Error::InvalidState {
                    state: 0,
                    message: format!("factor {r} is the zero vector"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProductState { factors })
    }

    /// Convenience constructor from real, possibly unnormalized, factors.
    pub fn from_real(factors: &[&[f64]]) -> Result<Self> {
        ProductState::new(factors.iter().map(|f| CVector::from_real(f)).collect())
    }

    /// Computational basis product state `|digits⟩` over `dims`.
    pub fn basis(dims: &[usize], digits: &[usize]) -> Self {
        ProductState {
            factors: dims
                .iter()
                .zip(digits)
                .map(|(&d, &x)| CVector::basis(d, x))
                .collect(),
        }
    }

    pub fn factors(&self) -> &[CVector] {
        &self.factors
    }

    pub fn factor(&self, party: usize) -> &CVector {
        &self.factors[party]
    }

    pub fn parties(&self) -> usize {
        self.factors.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(CVector::dim).collect()
    }

    /// `self ⊗ other` as a product over the concatenated parties.
    pub fn concat(&self, other: &ProductState) -> ProductState {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        ProductState { factors }
    }
}

/// A pure state stored as its full amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    amplitudes: CVector,
    signature: PartySignature,
}

impl DenseState {
    /// Normalizes `amplitudes`, which must have length `Π d_i`.
    pub fn new(amplitudes: CVector, signature: PartySignature) -> Result<Self> {
        let n = signature.dense_dim()?;
        if amplitudes.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: amplitudes.dim(),
            });
        }
        let amplitudes = amplitudes.normalized().map_err(|_| Error::InvalidState {
            state: 0,
            message: "dense state has zero norm".into(),
        })?;
        Ok(DenseState {
            amplitudes,
            signature,
        })
    }

    /// Builds a normalized superposition of computational basis states given
    /// as `(coefficient, digits)` terms.
    pub fn from_terms(dims: &[usize], terms: &[(C64, &[usize])]) -> Result<Self> {
        let signature = PartySignature::new(dims.to_vec())?;
        let mut amps = vec![C64::new(0.0, 0.0); signature.dense_dim()?];
        for (coeff, digits) in terms {
            if digits.len() != dims.len() || digits.iter().zip(dims).any(|(&x, &d)| x >= d) {
                return Err(Error::InvalidState {
                    state: 0,
                    message: format!("basis label {digits:?} does not fit dims {dims:?}"),
                });
            }
            let idx = digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x);
            amps[idx] += coeff;
        }
        DenseState::new(CVector::new(amps), signature)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn signature(&self) -> &PartySignature {
        &self.signature
    }
}

/// Either representation of a member of a [`StateSet`].
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Product(ProductState),
    Dense(DenseState),
}

impl State {
    pub fn as_product(&self) -> Option<&ProductState> {
        match self {
            State::Product(p) => Some(p),
            State::Dense(_) => None,
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self, State::Product(_))
    }

    /// Dense amplitude vector, expanding a product if needed.
    pub fn to_dense(&self) -> Result<DenseState> {
        match self {
            State::Product(p) => tensor_expand(p),
            State::Dense(d) => Ok(d.clone()),
        }
    }

    /// Same state multiplied by the unit-modulus `phase`.
    pub fn with_phase(&self, phase: C64) -> State {
        match self {
            State::Product(p) => {
                let mut factors = p.factors.clone();
                factors[0] = factors[0].scale(phase);
                State::Product(ProductState { factors })
            }
            State::Dense(d) => State::Dense(DenseState {
                amplitudes: d.amplitudes.scale(phase),
                signature: d.signature.clone(),
            }),
        }
    }
}

impl From<ProductState> for State {
    fn from(p: ProductState) -> Self {
        State::Product(p)
    }
}

impl From<DenseState> for State {
    fn from(d: DenseState) -> Self {
        State::Dense(d)
    }
}

/// Kronecker expansion of a product state, leftmost party most significant.
pub fn tensor_expand(s: &ProductState) -> Result<DenseState> {
    let signature = PartySignature::new(s.dims())?;
    signature.dense_dim()?;
    let amplitudes = s
        .factors
        .iter()
        .skip(1)
        .fold(s.factors[0].clone(), |acc, f| acc.kron(f));
    Ok(DenseState {
        amplitudes,
        signature,
    })
}

/// `⟨a|b⟩`. Two products are contracted factor by factor without expansion.
pub fn state_inner(a: &State, b: &State) -> Result<C64> {
    match (a, b) {
        (State::Product(x), State::Product(y)) => {
            if x.dims() != y.dims() {
                return Err(Error::SignatureMismatch {
                    left: x.dims(),
                    right: y.dims(),
                });
            }
            Ok(x.factors
                .iter()
                .zip(&y.factors)
                .map(|(u, v)| raw_inner(u.entries(), v.entries()))
                .product())
        }
        _ => {
            let (x, y) = (a.to_dense()?, b.to_dense()?);
            if x.signature != y.signature {
                return Err(Error::SignatureMismatch {
                    left: x.signature.dims.clone(),
                    right: y.signature.dims.clone(),
                });
            }
            vec_inner(&x.amplitudes, &y.amplitudes)
        }
    }
}

/// An ordered set of states over one signature.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSet {
    label: String,
    signature: PartySignature,
    states: Vec<State>,
}

impl StateSet {
    /// Checks every state against `signature`; orthogonality is not enforced
    /// here (see [`check_mutual_orthogonality`]).
    pub fn new(
        label: impl Into<String>,
        signature: PartySignature,
        states: Vec<State>,
    ) -> Result<Self> {
        for (k, s) in states.iter().enumerate() {
            match s {
                State::Product(p) => {
                    if p.dims() != signature.dims {
                        return Err(Error::InvalidState {
                            state: k,
                            message: format!(
                                "factor dimensions {:?} do not match signature {:?}",
                                p.dims(),
                                signature.dims
                            ),
                        });
                    }
                }
                State::Dense(d) => {
                    if d.signature != signature {
                        return Err(Error::InvalidState {
                            state: k,
                            message: format!(
                                "dense signature {:?} does not match {:?}",
                                d.signature.dims, signature.dims
                            ),
                        });
                    }
                }
            }
        }
        Ok(StateSet {
            label: label.into(),
            signature,
            states,
        })
    }

    pub fn from_products(
        label: impl Into<String>,
        dims: &[usize],
        states: Vec<ProductState>,
    ) -> Result<Self> {
        StateSet::new(
            label,
            PartySignature::new(dims.to_vec())?,
            states.into_iter().map(State::Product).collect(),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn signature(&self) -> &PartySignature {
        &self.signature
    }

    pub fn dims(&self) -> &[usize] {
        &self.signature.dims
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_all_product(&self) -> bool {
        self.states.iter().all(State::is_product)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// Product factors of every member; errors on the first dense one.
    pub fn product_states(&self) -> Result<Vec<&ProductState>> {
        self.states
            .iter()
            .enumerate()
            .map(|(k, s)| s.as_product().ok_or(Error::DenseMember(k)))
            .collect()
    }

    /// The members at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<StateSet> {
        let mut states = Vec::with_capacity(indices.len());
        for &i in indices {
            self.check_index(i)?;
            states.push(self.states[i].clone());
        }
        Ok(StateSet {
            label: self.label.clone(),
            signature: self.signature.clone(),
            states,
        })
    }

    /// Every member replaced by its dense amplitude vector.
    pub fn to_dense(&self) -> Result<StateSet> {
        let states = self
            .states
            .iter()
            .map(|s| s.to_dense().map(State::Dense))
            .collect::<Result<Vec<_>>>()?;
        Ok(StateSet {
            label: self.label.clone(),
            signature: self.signature.clone(),
            states,
        })
    }

    /// Relabels parties: new party `r` is old party `perm[r]`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<StateSet> {
        let n = self.signature.parties();
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::OutOfRange {
                what: "party permutation",
                message: format!("{perm:?} is not a permutation of 0..{n}"),
            });
        }
        let dims: Vec<usize> = perm.iter().map(|&p| self.signature.dims[p]).collect();
        let signature = PartySignature::new(dims)?;
        let states = self
            .states
            .iter()
            .map(|s| match s {
                State::Product(p) => Ok(State::Product(ProductState {
                    factors: perm.iter().map(|&r| p.factors[r].clone()).collect(),
                })),
                State::Dense(d) => Ok(State::Dense(permute_dense(d, perm, &signature)?)),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StateSet {
            label: self.label.clone(),
            signature,
            states,
        })
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for r in (0..dims.len().saturating_sub(1)).rev() {
        s[r] = s[r + 1] * dims[r + 1];
    }
    s
}

fn permute_dense(d: &DenseState, perm: &[usize], new_sig: &PartySignature) -> Result<DenseState> {
    let old_dims = d.signature.dims();
    let old_strides = strides(old_dims);
    let new_dims = new_sig.dims();
    let n = d.amplitudes.dim();
    let mut out = vec![C64::new(0.0, 0.0); n];
    let mut digits = vec![0usize; new_dims.len()];
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut rem = idx;
        for r in (0..new_dims.len()).rev() {
            digits[r] = rem % new_dims[r];
            rem /= new_dims[r];
        }
        let old_idx: usize = digits
            .iter()
            .zip(perm)
            .map(|(&x, &p)| x * old_strides[p])
            .sum();
        *slot = d.amplitudes.entries()[old_idx];
    }
    DenseState::new(CVector::new(out), new_sig.clone())
}

/// Non-orthogonal pairs found in a set.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OrthogonalityReport {
    /// Pairs `(j, k)`, `j < k`, with `|⟨ψ_j|ψ_k⟩| >= orth_abs`, and that magnitude.
    pub violations: Vec<(usize, usize, f64)>,
}

impl OrthogonalityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.violations.iter().map(|&(j, k, _)| (j, k)).collect()
    }
}

pub fn check_mutual_orthogonality(set: &StateSet, tol: &Tolerance) -> Result<OrthogonalityReport> {
    let dense;
    let states: &[State] = if set.is_all_product() {
        set.states()
    } else {
        dense = set.to_dense()?;
        dense.states()
    };
    let mut violations = Vec::new();
    for j in 0..states.len() {
        for k in j + 1..states.len() {
            let mag = state_inner(&states[j], &states[k])?.norm();
            if mag >= tol.orth_abs {
                violations.push((j, k, mag));
            }
        }
    }
    Ok(OrthogonalityReport { violations })
}

/// `Π_{r≠party} ⟨φ_r^{(k)} | φ_r^{(j)}⟩` for an all-product set.
pub fn rest_inner(set: &StateSet, j: usize, k: usize, party: usize) -> Result<C64> {
    set.check_index(j)?;
    set.check_index(k)?;
    if j == k {
        return Err(Error::SamePair(j));
    }
    set.signature.check_party(party)?;
    let a = set.states[j].as_product().ok_or(Error::DenseMember(j))?;
    let b = set.states[k].as_product().ok_or(Error::DenseMember(k))?;
    Ok(rest_inner_products(a, b, party))
}

pub(crate) fn rest_inner_products(j: &ProductState, k: &ProductState, party: usize) -> C64 {
    j.factors
        .iter()
        .zip(&k.factors)
        .enumerate()
        .filter(|(r, _)| *r != party)
        .map(|(_, (fj, fk))| raw_inner(fk.entries(), fj.entries()))
        .product()
}

/// Splits a dense state as `Σ_ρ |ρ⟩_rest ⊗ v_ρ`, with `v_ρ` living on `party`
/// and `ρ` running over the remaining parties in row-major order.
pub fn bpart_decompose(s: &DenseState, party: usize) -> Result<Vec<CVector>> {
    let dims = s.signature.dims();
    s.signature.check_party(party)?;
    let d = dims[party];
    let outer: usize = dims[..party].iter().product();
    let inner: usize = dims[party + 1..].iter().product();
    let amps = s.amplitudes.entries();
    let mut parts = Vec::with_capacity(outer * inner);
    for hi in 0..outer {
        for lo in 0..inner {
            let v = (0..d)
                .map(|x| amps[(hi * d + x) * inner + lo])
                .collect::<Vec<_>>();
            parts.push(CVector::new(v));
        }
    }
    Ok(parts)
}

/// Inverse of [`bpart_decompose`].
pub fn bpart_reassemble(dims: &[usize], party: usize, parts: &[CVector]) -> Result<CVector> {
    let d = dims[party];
    let outer: usize = dims[..party].iter().product();
    let inner: usize = dims[party + 1..].iter().product();
    if parts.len() != outer * inner {
        return Err(Error::DimensionMismatch {
            expected: outer * inner,
            found: parts.len(),
        });
    }
    let mut amps = vec![C64::new(0.0, 0.0); outer * d * inner];
    for hi in 0..outer {
        for lo in 0..inner {
            let v = &parts[hi * inner + lo];
            if v.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.dim(),
                });
            }
            for x in 0..d {
                amps[(hi * d + x) * inner + lo] = v.entries()[x];
            }
        }
    }
    Ok(CVector::new(amps))
}

// ---- JSON file format ------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSet {
    label: String,
    dims: Vec<usize>,
    states: Vec<RawState>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawState {
    Product(Vec<Vec<[f64; 2]>>),
    Dense(Vec<[f64; 2]>),
}

fn to_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.entries().iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(field: &str, raw: &[[f64; 2]]) -> Result<CVector> {
    if let Some(i) = raw
        .iter()
        .position(|p| !p[0].is_finite() || !p[1].is_finite())
    {
        return Err(Error::parse(
            format!("{field}[{i}]"),
            "non-finite amplitude",
        ));
    }
    Ok(CVector::new(
        raw.iter().map(|p| C64::new(p[0], p[1])).collect(),
    ))
}

impl StateSet {
    pub fn to_json(&self) -> String {
        let raw = RawSet {
            label: self.label.clone(),
            dims: self.signature.dims.clone(),
            states: self
                .states
                .iter()
                .map(|s| match s {
                    State::Product(p) => {
                        RawState::Product(p.factors.iter().map(to_pairs).collect())
                    }
                    State::Dense(d) => RawState::Dense(to_pairs(&d.amplitudes)),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("state sets always serialize")
    }

    pub fn from_json(text: &str) -> Result<StateSet> {
        let raw: RawSet = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let field = ["label", "dims", "states"]
                .into_iter()
                .find(|f| msg.contains(&format!("`{f}`")))
                .unwrap_or("<document>");
            Error::parse(field, msg)
        })?;
        let signature = PartySignature::new(raw.dims.clone())
            .map_err(|e| Error::parse("dims", e.to_string()))?;
        let mut states = Vec::with_capacity(raw.states.len());
        for (k, rs) in raw.states.iter().enumerate() {
            let state = match rs {
                RawState::Product(factors) => {
                    let field = format!("states[{k}].product");
                    if factors.len() != raw.dims.len() {
                        return Err(Error::parse(
                            field,
                            format!("{} factors for {} parties", factors.len(), raw.dims.len()),
                        ));
                    }
                    let mut vs = Vec::with_capacity(factors.len());
                    for (r, f) in factors.iter().enumerate() {
                        let ffield = format!("{field}[{r}]");
                        if f.len() != raw.dims[r] {
                            return Err(Error::parse(
                                ffield,
                                format!(
                                    "{} entries for a party of dimension {}",
                                    f.len(),
                                    raw.dims[r]
                                ),
                            ));
                        }
                        vs.push(from_pairs(&ffield, f)?);
                    }
                    State::Product(
                        ProductState::new(vs).map_err(|e| Error::parse(field, e.to_string()))?,
                    )
                }
                RawState::Dense(amps) => {
                    let field = format!("states[{k}].dense");
                    let v = from_pairs(&field, amps)?;
                    State::Dense(
                        DenseState::new(v, signature.clone())
                            .map_err(|e| Error::parse(field, e.to_string()))?,
                    )
                }
            };
            states.push(state);
        }
        StateSet::new(raw.label, signature, states)
    }
}

pub fn save_set(set: &StateSet, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, set.to_json() + "\n")?;
    Ok(())
}

pub fn load_set(path: impl AsRef<Path>) -> Result<StateSet> {
    StateSet::from_json(&fs::read_to_string(path)?)
}
