//! Local-stability certification.
//!
//! For party `i` of an orthogonal set `S`, the operator span `D_i(S)` is
//! generated by the cross terms `Σ_ρ |ψ_{k,ρ}⟩⟨ψ_{l,ρ}|` (`k ≠ l`), where
//! `ψ_{k,ρ}` are the party-`i` slices of `ψ_k` against the computational
//! basis `ρ` of the other parties. The party admits only trivial
//! orthogonality-preserving measurements iff `dim D_i(S) = d_i² − 1`.
//!
//! For all-product sets the cross term collapses to a multiple of
//! `|ξ_k⟩⟨ξ_l|` which is nonzero exactly when every other party's factors
//! overlap; those ordered pairs form the conflict set `C_i`.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_complex::Complex64 as C64;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{psd_power_iteration, raw_inner, span_rank, CMatrix, CVector, Tolerance};
use crate::states::{
    bpart_decompose, check_mutual_orthogonality, DenseState, ProductState, State, StateSet,
};

/// Ordered pairs `(j, k)` whose factors overlap on every party except `party`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConflictSet {
    pub party: usize,
    pub pairs: Vec<(usize, usize)>,
    /// Smallest `|rest_inner|` among admitted pairs.
    pub min_rest_inner: Option<f64>,
    /// Smallest single-factor overlap among admitted pairs; this is the
    /// quantity compared against `orth_abs`.
    pub min_factor_overlap: Option<f64>,
}

impl ConflictSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Per-party Gram matrices of a product set, `gram[r][j][k] = ⟨φ_r^k | φ_r^j⟩`.
///
/// Built once per set and shared by every subset check.
struct ProductGram<'a> {
    states: Vec<&'a ProductState>,
    gram: Vec<Vec<Vec<C64>>>,
}

impl<'a> ProductGram<'a> {
    fn new(set: &'a StateSet) -> Result<Self> {
        let states = set.product_states()?;
        let l = states.len();
        let gram = (0..set.signature().parties())
            .map(|r| {
                (0..l)
                    .map(|j| {
                        (0..l)
                            .map(|k| {
                                raw_inner(
                                    states[k].factor(r).entries(),
                                    states[j].factor(r).entries(),
                                )
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(ProductGram { states, gram })
    }

    fn parties(&self) -> usize {
        self.gram.len()
    }

    /// Conflict sets of every party restricted to `members`, reported in the
    /// positions of `members`.
    fn conflict_sets(&self, members: &[usize], tol: &Tolerance) -> Vec<ConflictSet> {
        let n = self.parties();
        let mut sets: Vec<ConflictSet> = (0..n)
            .map(|party| ConflictSet {
                party,
                pairs: Vec::new(),
                min_rest_inner: None,
                min_factor_overlap: None,
            })
            .collect();
        for (a, &j) in members.iter().enumerate() {
            for (b, &k) in members.iter().enumerate() {
                if a == b {
                    continue;
                }
                let mut zero_party = None;
                let mut zeros = 0;
                for r in 0..n {
                    if self.gram[r][j][k].norm() < tol.orth_abs {
                        zeros += 1;
                        zero_party = Some(r);
                        if zeros > 1 {
                            break;
                        }
                    }
                }
                // zeros == 0 means a non-orthogonal pair; callers reject those.
                if zeros != 1 {
                    continue;
                }
                let i = zero_party.expect("one zero party");
                let (mut prod, mut min_factor) = (C64::new(1.0, 0.0), f64::INFINITY);
                for r in (0..n).filter(|&r| r != i) {
                    prod *= self.gram[r][j][k];
                    min_factor = min_factor.min(self.gram[r][j][k].norm());
                }
                let cs = &mut sets[i];
                cs.pairs.push((a, b));
                cs.min_rest_inner = Some(
                    cs.min_rest_inner
                        .map_or(prod.norm(), |m| m.min(prod.norm())),
                );
                cs.min_factor_overlap = Some(
                    cs.min_factor_overlap
                        .map_or(min_factor, |m| m.min(min_factor)),
                );
            }
        }
        sets
    }

    fn generators(&self, members: &[usize], conflict: &ConflictSet) -> Vec<CMatrix> {
        conflict
            .pairs
            .iter()
            .map(|&(a, b)| {
                CMatrix::outer(
                    self.states[members[a]].factor(conflict.party),
                    self.states[members[b]].factor(conflict.party),
                )
            })
            .collect()
    }

    fn certify(
        &self,
        members: &[usize],
        dims: &[usize],
        tol: &Tolerance,
    ) -> Result<Vec<PartyRecord>> {
        let conflicts = self.conflict_sets(members, tol);
        conflicts
            .into_par_iter()
            .map(|cs| {
                let gens = self.generators(members, &cs);
                let span_dim = span_rank(&gens, tol)?;
                let required = dims[cs.party] * dims[cs.party] - 1;
                Ok(PartyRecord {
                    party: cs.party,
                    span_dim,
                    required,
                    stable: span_dim == required,
                    conflict_pairs: Some(cs.pairs),
                    min_rest_inner: cs.min_rest_inner,
                })
            })
            .collect()
    }
}

/// The conflict set of `party` for an all-product set.
///
/// A pair is admitted when every factor overlap outside `party` has
/// magnitude at least `tol.orth_abs`. For long product chains the product
/// itself can be far smaller than any single factor while still being
/// exactly nonzero, so the product is reported but not thresholded.
pub fn conflict_set(set: &StateSet, party: usize, tol: &Tolerance) -> Result<ConflictSet> {
    set.signature().check_party(party)?;
    let gram = ProductGram::new(set)?;
    let members: Vec<usize> = (0..set.len()).collect();
    Ok(gram.conflict_sets(&members, tol).swap_remove(party))
}

/// Generators of the party-`party` operator span.
///
/// All-product sets use the rank-one conflict-pair generators; any dense
/// member switches to the general slice construction, dropping matrices
/// with Frobenius norm below `orth_abs`.
pub fn span_generators(set: &StateSet, party: usize, tol: &Tolerance) -> Result<Vec<CMatrix>> {
    set.signature().check_party(party)?;
    if set.is_all_product() {
        let gram = ProductGram::new(set)?;
        let members: Vec<usize> = (0..set.len()).collect();
        let cs = gram.conflict_sets(&members, tol).swap_remove(party);
        Ok(gram.generators(&members, &cs))
    } else {
        general_generators(set, party, tol)
    }
}

fn general_generators(set: &StateSet, party: usize, tol: &Tolerance) -> Result<Vec<CMatrix>> {
    let d = set.signature().dim(party);
    let slices = set
        .states()
        .iter()
        .map(|s| bpart_decompose(&s.to_dense()?, party))
        .collect::<Result<Vec<_>>>()?;
    let mut gens = Vec::new();
    for (k, sk) in slices.iter().enumerate() {
        for (l, sl) in slices.iter().enumerate() {
            if k == l {
                continue;
            }
            let mut m = CMatrix::zeros(d, d);
            for (vk, vl) in sk.iter().zip(sl) {
                m.add_assign_outer(vk.entries(), vl.entries());
            }
            if m.frobenius_norm() >= tol.orth_abs {
                gens.push(m);
            }
        }
    }
    Ok(gens)
}

/// Stability verdict for one party.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartyRecord {
    pub party: usize,
    pub span_dim: usize,
    pub required: usize,
    pub stable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conflict_pairs: Option<Vec<(usize, usize)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_rest_inner: Option<f64>,
}

pub fn party_stable(set: &StateSet, party: usize, tol: &Tolerance) -> Result<PartyRecord> {
    set.signature().check_party(party)?;
    if set.is_all_product() {
        let gram = ProductGram::new(set)?;
        let members: Vec<usize> = (0..set.len()).collect();
        let mut recs = gram.certify(&members, set.dims(), tol)?;
        return Ok(recs.swap_remove(party));
    }
    dense_party_record(set, party, tol)
}

fn dense_party_record(set: &StateSet, party: usize, tol: &Tolerance) -> Result<PartyRecord> {
    let d = set.signature().dim(party);
    let span_dim = span_rank(&general_generators(set, party, tol)?, tol)?;
    Ok(PartyRecord {
        party,
        span_dim,
        required: d * d - 1,
        stable: span_dim == d * d - 1,
        conflict_pairs: None,
        min_rest_inner: None,
    })
}

/// Per-party verdicts plus their conjunction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityCertificate {
    pub label: String,
    pub tolerance: Tolerance,
    pub parties: Vec<PartyRecord>,
    pub stable: bool,
}

impl StabilityCertificate {
    pub fn span_dims(&self) -> Vec<usize> {
        self.parties.iter().map(|p| p.span_dim).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates always serialize")
    }
}

fn require_orthogonal(set: &StateSet, tol: &Tolerance) -> Result<()> {
    let report = check_mutual_orthogonality(set, tol)?;
    if !report.passed() {
        return Err(Error::NotOrthogonal {
            pairs: report.pairs(),
        });
    }
    Ok(())
}

/// Certifies every party. Non-orthogonal input is an error.
pub fn is_locally_stable(set: &StateSet, tol: &Tolerance) -> Result<StabilityCertificate> {
    tol.validate()?;
    require_orthogonal(set, tol)?;
    let parties = if set.is_all_product() {
        let gram = ProductGram::new(set)?;
        let members: Vec<usize> = (0..set.len()).collect();
        gram.certify(&members, set.dims(), tol)?
    } else {
        (0..set.signature().parties())
            .into_par_iter()
            .map(|i| dense_party_record(set, i, tol))
            .collect::<Result<Vec<_>>>()?
    };
    let stable = parties.iter().all(|p| p.stable);
    Ok(StabilityCertificate {
        label: set.label().to_string(),
        tolerance: *tol,
        parties,
        stable,
    })
}

// ---- counting audit --------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartyCount {
    pub party: usize,
    /// `|C_i|`, ordered pairs.
    pub conflict_size: usize,
    pub span_dim: usize,
    /// `|C_i| >= span_dim`.
    pub covers_span: bool,
}

/// The counting argument behind the lower bound, evaluated on a concrete set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem1Audit {
    pub size: usize,
    /// `Σ (d_i² − 1)`.
    pub d_sum: usize,
    pub parties: Vec<PartyCount>,
    /// Unordered pairs that appear in more than one party's conflict set.
    pub overlapping_pairs: Vec<(usize, usize)>,
    pub disjoint: bool,
    /// `Σ |C_i|`, never more than `l(l−1)` when the sets are disjoint.
    pub total_conflict: usize,
    pub ordered_pairs: usize,
    pub stable: bool,
    /// `l(l−1) >= D`; `None` when the set is not stable (nothing to check).
    pub size_bound_holds: Option<bool>,
    /// Number of unordered state pairs keyed by how many parties carry
    /// orthogonal factors for that pair.
    pub orthogonal_party_histogram: BTreeMap<usize, usize>,
}

impl Theorem1Audit {
    pub fn passed(&self) -> bool {
        self.disjoint
            && self.parties.iter().all(|p| p.covers_span)
            && self.total_conflict <= self.ordered_pairs
            && self.size_bound_holds != Some(false)
    }
}

pub fn theorem1_audit(set: &StateSet, tol: &Tolerance) -> Result<Theorem1Audit> {
    require_orthogonal(set, tol)?;
    let gram = ProductGram::new(set)?;
    let l = set.len();
    let members: Vec<usize> = (0..l).collect();
    let records = gram.certify(&members, set.dims(), tol)?;

    let mut owner: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut overlapping = Vec::new();
    let mut parties = Vec::with_capacity(records.len());
    for rec in &records {
        let pairs = rec.conflict_pairs.as_deref().unwrap_or_default();
        for &(j, k) in pairs {
            let key = (j.min(k), j.max(k));
            match owner.get(&key) {
                Some(&p) if p != rec.party => overlapping.push(key),
                _ => {
                    owner.insert(key, rec.party);
                }
            }
        }
        parties.push(PartyCount {
            party: rec.party,
            conflict_size: pairs.len(),
            span_dim: rec.span_dim,
            covers_span: pairs.len() >= rec.span_dim,
        });
    }
    overlapping.sort_unstable();
    overlapping.dedup();

    let mut histogram = BTreeMap::new();
    for (j, k) in (0..l).tuple_combinations() {
        let zeros = (0..gram.parties())
            .filter(|&r| gram.gram[r][j][k].norm() < tol.orth_abs)
            .count();
        *histogram.entry(zeros).or_insert(0) += 1;
    }

    let d_sum = set.dims().iter().map(|d| d * d - 1).sum();
    let stable = records.iter().all(|r| r.stable);
    let ordered_pairs = l * l.saturating_sub(1);
    Ok(Theorem1Audit {
        size: l,
        d_sum,
        total_conflict: parties.iter().map(|p| p.conflict_size).sum(),
        parties,
        disjoint: overlapping.is_empty(),
        overlapping_pairs: overlapping,
        ordered_pairs,
        stable,
        size_bound_holds: stable.then_some(ordered_pairs >= d_sum),
        orthogonal_party_histogram: histogram,
    })
}

// ---- bounds ----------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub dims: Vec<usize>,
    /// `D = Σ (d_i² − 1)`.
    pub d_sum: usize,
    /// Least integer `l` with `l(l−1) >= D`.
    pub lower_bound_p: usize,
    /// `(−1 + √(1+4D)) / 2` as printed with the theorem.
    pub closed_form_printed: f64,
    /// `(1 + √(1+4D)) / 2`, the positive root of `l² − l = D`.
    pub closed_form_root: f64,
    /// `f = 1 + Σ (d_i − 1)`.
    pub trivial_upb_bound: usize,
}

pub fn lower_bound_p(dims: &[usize]) -> Result<BoundReport> {
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidSignature(format!(
            "party dimension {d} < 2 in {dims:?}"
        )));
    }
    let d_sum: usize = dims.iter().map(|d| d * d - 1).sum();
    let mut l = 1usize;
    while l * (l - 1) < d_sum {
        l += 1;
    }
    let root = (1.0 + 4.0 * d_sum as f64).sqrt();
    Ok(BoundReport {
        dims: dims.to_vec(),
        d_sum,
        lower_bound_p: l,
        closed_form_printed: (root - 1.0) / 2.0,
        closed_form_root: (root + 1.0) / 2.0,
        trivial_upb_bound: 1 + dims.iter().map(|d| d - 1).sum::<usize>(),
    })
}

/// The upper-bound formulas for minimal stable product sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpperBoundKind {
    /// `n + 1` qubits-parties, `n >= 5`.
    QubitCompose,
    /// `(n+1)/2 + 2` (odd `n >= 5`) or `n/2 + 4` (even `n >= 10`).
    QubitSubset,
    /// `⌊5n/3 + 2⌋` qutrit parties, `n >= 2`.
    Qutrit,
    /// `3⌈√N⌉` for `N` qubit parties, `N` odd and `> 36`.
    QubitSqrt,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperBound {
    pub kind: UpperBoundKind,
    pub n: usize,
    pub value: usize,
    /// For the qutrit bound: size `4x + 5y + 1` of the smallest composition
    /// of two-qutrit (5 states) and three-qutrit (6 states) blocks with
    /// `2x + 3y = n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<usize>,
}

fn ceil_sqrt(n: usize) -> usize {
    let mut l = (n as f64).sqrt() as usize;
    while l * l < n {
        l += 1;
    }
    while l > 0 && (l - 1) * (l - 1) >= n {
        l -= 1;
    }
    l
}

/// `(x, y)` with `2x + 3y = n` minimizing `4x + 5y + 1`.
pub fn qutrit_blocks(n: usize) -> Option<(usize, usize)> {
    (0..=n / 3)
        .rev()
        .find(|y| (n - 3 * y).is_multiple_of(2))
        .map(|y| ((n - 3 * y) / 2, y))
}

pub fn cardinality_upper_bound(kind: UpperBoundKind, n: usize) -> Result<UpperBound> {
    let out_of_range = |message: &str| Error::OutOfRange {
        what: "party count",
        message: format!("n = {n}: {message}"),
    };
    let (value, construction) = match kind {
        UpperBoundKind::QubitCompose => {
            if n < 5 {
                return Err(out_of_range("requires n >= 5"));
            }
            (n + 1, None)
        }
        UpperBoundKind::QubitSubset => {
            if n % 2 == 1 && n >= 5 {
                (n.div_ceil(2) + 2, None)
            } else if n.is_multiple_of(2) && n >= 10 {
                (n / 2 + 4, None)
            } else {
                return Err(out_of_range("requires odd n >= 5 or even n >= 10"));
            }
        }
        UpperBoundKind::Qutrit => {
            if n < 2 {
                return Err(out_of_range("requires n >= 2"));
            }
            let (x, y) = qutrit_blocks(n).expect("every n >= 2 is 2x + 3y");
            ((5 * n + 6) / 3, Some(4 * x + 5 * y + 1))
        }
        UpperBoundKind::QubitSqrt => {
            if n <= 36 || n.is_multiple_of(2) {
                return Err(out_of_range("requires odd N = 2n - 1 > 36"));
            }
            (3 * ceil_sqrt(n), None)
        }
    };
    Ok(UpperBound {
        kind,
        n,
        value,
        construction,
    })
}

// ---- see-saw search in the complement --------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 50,
            iters: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplementSearch {
    /// Largest `⟨φ|P|φ⟩` found, `P` the projector onto `span(S)^⊥`.
    pub best_overlap: f64,
    pub best_product: ProductState,
    pub best_restart: usize,
    pub restart_overlaps: Vec<f64>,
}

/// One member of `S` as seen by the search: either factors or amplitudes.
enum Target<'a> {
    Product(&'a ProductState),
    Dense(&'a DenseState),
}

fn complement_overlap(targets: &[Target<'_>], phi: &[CVector]) -> f64 {
    let captured: f64 = targets
        .iter()
        .map(|t| match t {
            Target::Product(p) => p
                .factors()
                .iter()
                .zip(phi)
                .map(|(s, f)| raw_inner(s.entries(), f.entries()))
                .product::<C64>()
                .norm_sqr(),
            Target::Dense(d) => {
                let expanded = phi
                    .iter()
                    .skip(1)
                    .fold(phi[0].clone(), |acc, f| acc.kron(f));
                raw_inner(d.amplitudes().entries(), expanded.entries()).norm_sqr()
            }
        })
        .sum();
    1.0 - captured
}

/// `a_s` such that `⟨s|φ⟩ = ⟨a_s|φ_party⟩` with the other factors fixed.
fn local_vector(target: &Target<'_>, phi: &[CVector], party: usize, dims: &[usize]) -> Vec<C64> {
    match target {
        Target::Product(p) => {
            let coeff: C64 = p
                .factors()
                .iter()
                .zip(phi)
                .enumerate()
                .filter(|(r, _)| *r != party)
                .map(|(_, (s, f))| raw_inner(f.entries(), s.entries()))
                .product();
            p.factor(party)
                .entries()
                .iter()
                .map(|z| z * coeff)
                .collect()
        }
        Target::Dense(d) => {
            let amps = d.amplitudes().entries();
            let dp = dims[party];
            let mut out = vec![C64::new(0.0, 0.0); dp];
            for (idx, a) in amps.iter().enumerate() {
                let mut rem = idx;
                let mut weight = C64::new(1.0, 0.0);
                let mut local = 0;
                for r in (0..dims.len()).rev() {
                    let x = rem % dims[r];
                    rem /= dims[r];
                    if r == party {
                        local = x;
                    } else {
                        weight *= phi[r].entries()[x].conj();
                    }
                }
                out[local] += a * weight;
            }
            out
        }
    }
}

fn random_factor(rng: &mut ChaCha8Rng, d: usize) -> CVector {
    loop {
        let v = CVector::new(
            (0..d)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    C64::new(re, im)
                })
                .collect(),
        );
        if let Ok(u) = v.normalized() {
            return u;
        }
    }
}

fn run_restart(
    targets: &[Target<'_>],
    dims: &[usize],
    iters: usize,
    seed: u64,
    restart: usize,
) -> Result<(f64, Vec<CVector>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let mut phi: Vec<CVector> = dims.iter().map(|&d| random_factor(&mut rng, d)).collect();
    let mut best = complement_overlap(targets, &phi);
    for _ in 0..iters {
        for party in 0..dims.len() {
            let d = dims[party];
            let mut m = CMatrix::identity(d);
            for t in targets {
                let a = local_vector(t, &phi, party, dims);
                let neg: Vec<C64> = a.iter().map(|z| -z).collect();
                m.add_assign_outer(&neg, &a);
            }
            phi[party] = psd_power_iteration(&m, &phi[party], 60)?;
        }
        let now = complement_overlap(targets, &phi);
        let improved = now - best;
        best = best.max(now);
        if best >= 1.0 - 1e-13 || improved.abs() < 1e-15 {
            break;
        }
    }
    Ok((best.min(1.0 + 1e-12), phi))
}

/// Alternating (one party at a time) maximization of `⟨φ|P|φ⟩` over product
/// states. An overlap of 1 exhibits a product state orthogonal to the whole
/// set; overlaps bounded away from 1 over many restarts are evidence that
/// none exists.
pub fn complement_product_search(
    set: &StateSet,
    config: &SearchConfig,
) -> Result<ComplementSearch> {
    let tol = Tolerance::default();
    require_orthogonal(set, &tol)?;
    let dims = set.dims().to_vec();
    if let Some(total) = set.signature().total_dim() {
        if set.len() >= total {
            return Err(Error::CompleteSet {
                states: set.len(),
                dim: total,
            });
        }
    }
    if config.restarts == 0 {
        return Err(Error::OutOfRange {
            what: "restarts",
            message: "at least one restart is required".into(),
        });
    }
    let targets: Vec<Target<'_>> = set
        .states()
        .iter()
        .map(|s| match s {
            State::Product(p) => Target::Product(p),
            State::Dense(d) => Target::Dense(d),
        })
        .collect();
    let runs = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(&targets, &dims, config.iters, config.seed, r))
        .collect::<Result<Vec<_>>>()?;

    let mut best_restart = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.0 > runs[best_restart].0 {
            best_restart = r;
        }
    }
    let restart_overlaps = runs.iter().map(|r| r.0).collect();
    let (best_overlap, phi) = runs.into_iter().nth(best_restart).expect("restarts > 0");
    Ok(ComplementSearch {
        best_overlap,
        best_product: ProductState::new(phi)?,
        best_restart,
        restart_overlaps,
    })
}

// ---- subset campaigns ------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CampaignConfig {
    /// Enumerate exhaustively up to this many subsets, sample beyond.
    pub sample_threshold: u128,
    pub sample_count: usize,
    pub seed: u64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            sample_threshold: 1_000_000,
            sample_count: 10_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnstableWitness {
    pub members: Vec<usize>,
    pub unstable_parties: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignReport {
    pub label: String,
    pub set_size: usize,
    pub k: usize,
    /// `C(set_size, k)`, saturating.
    pub total_subsets: u128,
    pub sampled: bool,
    pub checked: usize,
    pub stable: usize,
    pub unstable: usize,
    pub witnesses: Vec<UnstableWitness>,
}

impl CampaignReport {
    pub fn all_stable(&self) -> bool {
        self.unstable == 0
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Checks every `k`-subset of `set` (or a seeded sample of them when there
/// are more than `config.sample_threshold`).
pub fn subset_campaign(
    set: &StateSet,
    k: usize,
    config: &CampaignConfig,
    tol: &Tolerance,
) -> Result<CampaignReport> {
    if k == 0 || k > set.len() {
        return Err(Error::OutOfRange {
            what: "subset size",
            message: format!("k = {k} must lie in 1..={}", set.len()),
        });
    }
    require_orthogonal(set, tol)?;
    let total = binomial(set.len(), k);
    let sampled = total > config.sample_threshold;
    let subsets: Vec<Vec<usize>> = if sampled {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        (0..config.sample_count)
            .map(|_| {
                let mut v = index::sample(&mut rng, set.len(), k).into_vec();
                v.sort_unstable();
                v
            })
            .collect()
    } else {
        (0..set.len()).combinations(k).collect()
    };

    let gram = if set.is_all_product() {
        Some(ProductGram::new(set)?)
    } else {
        None
    };
    let verdicts = subsets
        .par_iter()
        .map(|members| {
            let records = match &gram {
                Some(g) => g.certify(members, set.dims(), tol)?,
                None => is_locally_stable(&set.subset(members)?, tol)?.parties,
            };
            Ok(records
                .iter()
                .filter(|r| !r.stable)
                .map(|r| r.party)
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;

    let witnesses: Vec<UnstableWitness> = subsets
        .iter()
        .zip(&verdicts)
        .filter(|(_, bad)| !bad.is_empty())
        .map(|(m, bad)| UnstableWitness {
            members: m.clone(),
            unstable_parties: bad.clone(),
        })
        .collect();
    Ok(CampaignReport {
        label: set.label().to_string(),
        set_size: set.len(),
        k,
        total_subsets: total,
        sampled,
        checked: subsets.len(),
        stable: subsets.len() - witnesses.len(),
        unstable: witnesses.len(),
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{hs_inner, orthocomplement_basis};
    use crate::states::PartySignature;

    const Z: &[f64] = &[1.0, 0.0];
    const O: &[f64] = &[0.0, 1.0];
    const P: &[f64] = &[1.0, 1.0];
    const M: &[f64] = &[1.0, -1.0];

    fn qubit3() -> StateSet {
        let states = [[Z, Z, Z], [P, M, O], [O, P, M], [M, O, P]]
            .iter()
            .map(|f| ProductState::from_real(f).unwrap())
            .collect();
        StateSet::from_products("qubit3", &[2, 2, 2], states).unwrap()
    }

    fn basis22() -> StateSet {
        let states = [[Z, Z], [Z, O], [O, Z], [O, O]]
            .iter()
            .map(|f| ProductState::from_real(f).unwrap())
            .collect();
        StateSet::from_products("basis", &[2, 2], states).unwrap()
    }

    #[test]
    fn conflict_set_examples() {
        let tol = Tolerance::default();
        let cs = conflict_set(&qubit3(), 0, &tol).unwrap();
        assert_eq!(cs.pairs, vec![(0, 2), (1, 3), (2, 0), (3, 1)]);
        assert!((cs.min_rest_inner.unwrap() - 0.5).abs() < 1e-15);

        let cs = conflict_set(&basis22(), 1, &tol).unwrap();
        assert_eq!(cs.pairs, vec![(0, 1), (1, 0), (2, 3), (3, 2)]);

        let single = qubit3().subset(&[0]).unwrap();
        assert!(conflict_set(&single, 0, &tol).unwrap().is_empty());
    }

    #[test]
    fn generators_for_qubit3_party_one() {
        let tol = Tolerance::default();
        let gens = span_generators(&qubit3(), 0, &tol).unwrap();
        assert_eq!(gens.len(), 4);
        let ket = |v: &[f64]| CVector::from_real(v).normalized().unwrap();
        let expected = [
            CMatrix::outer(&ket(Z), &ket(O)),
            CMatrix::outer(&ket(P), &ket(M)),
            CMatrix::outer(&ket(O), &ket(Z)),
            CMatrix::outer(&ket(M), &ket(P)),
        ];
        for (g, e) in gens.iter().zip(&expected) {
            assert!(g
                .entries()
                .iter()
                .zip(e.entries())
                .all(|(a, b)| (a - b).norm() < 1e-15));
        }
        assert!(span_generators(&qubit3().subset(&[1]).unwrap(), 0, &tol)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn general_generators_for_ghz_pair() {
        let tol = Tolerance::default();
        let c = |x: f64| C64::new(x, 0.0);
        let ghz = |s: f64| {
            State::Dense(
                DenseState::from_terms(&[2, 2, 2], &[(c(1.0), &[0, 0, 0]), (c(s), &[1, 1, 1])])
                    .unwrap(),
            )
        };
        let set = StateSet::new(
            "ghz",
            PartySignature::new(vec![2, 2, 2]).unwrap(),
            vec![ghz(1.0), ghz(-1.0)],
        )
        .unwrap();
        let gens = span_generators(&set, 0, &tol).unwrap();
        assert_eq!(gens.len(), 2);
        for g in gens {
            assert!(g.get(0, 1).norm() < 1e-15 && g.get(1, 0).norm() < 1e-15);
            assert!((g.get(0, 0) + g.get(1, 1)).norm() < 1e-15);
            assert!(g.get(0, 0).norm() > 0.1);
        }
    }

    #[test]
    fn party_stable_examples() {
        let tol = Tolerance::default();
        for party in 0..3 {
            let rec = party_stable(&qubit3(), party, &tol).unwrap();
            assert_eq!((rec.stable, rec.span_dim), (true, 3));
        }
        let rec = party_stable(&basis22(), 0, &tol).unwrap();
        assert_eq!((rec.stable, rec.span_dim), (false, 2));
    }

    #[test]
    fn non_orthogonal_is_an_error() {
        let tol = Tolerance::default();
        let set = StateSet::from_products(
            "dup",
            &[2, 2],
            vec![
                ProductState::from_real(&[Z, Z]).unwrap(),
                ProductState::from_real(&[Z, Z]).unwrap(),
            ],
        )
        .unwrap();
        match is_locally_stable(&set, &tol) {
            Err(Error::NotOrthogonal { pairs }) => assert_eq!(pairs, vec![(0, 1)]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stable_party_complement_is_identity() {
        let tol = Tolerance::default();
        let gens = span_generators(&qubit3(), 1, &tol).unwrap();
        let comp = orthocomplement_basis(&gens, &tol).unwrap();
        assert_eq!(comp.len(), 1);
        let scale = comp[0].get(0, 0);
        let id = CMatrix::identity(2).scale(scale);
        let dev = comp[0]
            .entries()
            .iter()
            .zip(id.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-8);
        for g in &gens {
            assert!(hs_inner(&CMatrix::identity(2), g).unwrap().norm() < 1e-9);
        }
    }

    #[test]
    fn audit_on_qubit3_and_basis() {
        let tol = Tolerance::default();
        let audit = theorem1_audit(&qubit3(), &tol).unwrap();
        assert!(audit.disjoint);
        assert!(audit
            .parties
            .iter()
            .all(|p| p.conflict_size == 4 && p.span_dim == 3));
        assert_eq!((audit.ordered_pairs, audit.d_sum), (12, 9));
        assert_eq!(audit.size_bound_holds, Some(true));
        assert!(audit.passed());

        let audit = theorem1_audit(&basis22(), &tol).unwrap();
        assert!(audit.disjoint);
        assert!(!audit.stable);
        assert_eq!(audit.size_bound_holds, None);
    }

    #[test]
    fn lower_bounds() {
        assert_eq!(lower_bound_p(&[2, 2, 2]).unwrap().lower_bound_p, 4);
        assert_eq!(lower_bound_p(&[3, 3]).unwrap().lower_bound_p, 5);
        assert_eq!(lower_bound_p(&[3, 3, 3]).unwrap().lower_bound_p, 6);
        let r = lower_bound_p(&[2, 2, 2]).unwrap();
        assert_eq!((r.d_sum, r.trivial_upb_bound), (9, 4));
        assert!(r.closed_form_printed < 3.0 && r.closed_form_root > 3.0);
        assert_eq!(lower_bound_p(&[3, 3, 3]).unwrap().trivial_upb_bound, 7);
        assert!(lower_bound_p(&[2, 1]).is_err());
    }

    #[test]
    fn upper_bounds() {
        use UpperBoundKind::*;
        assert_eq!(cardinality_upper_bound(QubitSubset, 5).unwrap().value, 5);
        assert_eq!(cardinality_upper_bound(QubitSubset, 9).unwrap().value, 7);
        assert_eq!(cardinality_upper_bound(QubitSubset, 10).unwrap().value, 9);
        assert!(cardinality_upper_bound(QubitSubset, 8).is_err());
        assert!(cardinality_upper_bound(QubitSubset, 3).is_err());
        assert_eq!(cardinality_upper_bound(QubitCompose, 5).unwrap().value, 6);
        assert!(cardinality_upper_bound(QubitCompose, 4).is_err());
        assert_eq!(cardinality_upper_bound(QubitSqrt, 49).unwrap().value, 21);
        assert!(cardinality_upper_bound(QubitSqrt, 35).is_err());
        assert!(cardinality_upper_bound(QubitSqrt, 50).is_err());
        let q = cardinality_upper_bound(Qutrit, 6).unwrap();
        assert_eq!((q.value, q.construction), (12, Some(11)));
        assert!(cardinality_upper_bound(Qutrit, 1).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(7, 6), 7);
        assert_eq!(binomial(9, 7), 36);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(200, 100), u128::MAX);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }
}
