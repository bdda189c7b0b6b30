//! Named orthogonal product sets and the operations that build new ones.
//!
//! Qubit shift family: with `N = 2n − 1` and the bijection
//! `F: Z_N → C²`, `F(0) = |1⟩`, `F(i) = |ψ_i^⊥⟩`, `F(N − i) = |ψ_i⟩`
//! (`1 ≤ i ≤ n − 1`), state `u ∈ Z_N` carries `F(u − p mod N)` on party
//! `p`. Factors `F(a)` and `F(b)` are orthogonal iff `a, b ≠ 0` and
//! `a + b ≡ 0 (mod N)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{vec_inner, CVector};
use crate::states::{DenseState, PartySignature, ProductState, State, StateSet};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn product(factors: &[&[f64]]) -> ProductState {
    ProductState::from_real(factors).expect("named factors are nonzero")
}

/// `|000⟩, |+−1⟩, |1+−⟩, |−1+⟩` on three qubits.
pub fn upb_qubit3() -> StateSet {
    let (z, o, p, m): (&[f64], &[f64], &[f64], &[f64]) =
        (&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0], &[1.0, -1.0]);
    let states = vec![
        product(&[z, z, z]),
        product(&[p, m, o]),
        product(&[o, p, m]),
        product(&[m, o, p]),
    ];
    StateSet::from_products("qubit3", &[2, 2, 2], states).expect("fixed signature")
}

/// Orthogonal complement of a qubit state: `(α, β) ↦ (β̄, −ᾱ)`.
pub fn qubit_perp(psi: &CVector) -> CVector {
    let e = psi.entries();
    CVector::new(vec![e[1].conj(), -e[0].conj()])
}

/// Seed states `|ψ_1⟩ … |ψ_{n−1}⟩` for the shift family.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedList {
    seeds: Vec<CVector>,
}

const SEED_TOL: f64 = 1e-10;

impl SeedList {
    /// Normalizes and validates: no seed may be orthogonal or parallel to
    /// `|0⟩` or to another seed.
    pub fn new(seeds: Vec<CVector>) -> Result<Self> {
        let mut normalized = Vec::with_capacity(seeds.len());
        for (i, s) in seeds.iter().enumerate() {
            if s.dim() != 2 {
                return Err(Error::InvalidSeed(format!(
                    "seed {} has dimension {}, not 2",
                    i + 1,
                    s.dim()
                )));
            }
            let u = s
                .normalized()
                .map_err(|_| Error::InvalidSeed(format!("seed {} is the zero vector", i + 1)))?;
            normalized.push(u);
        }
        let zero = CVector::basis(2, 0);
        let check = |mag: f64, what: String| -> Result<()> {
            if mag <= SEED_TOL {
                Err(Error::InvalidSeed(format!("{what} are orthogonal")))
            } else if mag >= 1.0 - SEED_TOL {
                Err(Error::InvalidSeed(format!("{what} are parallel")))
            } else {
                Ok(())
            }
        };
        for (i, u) in normalized.iter().enumerate() {
            check(
                vec_inner(&zero, u)?.norm(),
                format!("seed {} and |0>", i + 1),
            )?;
            for (j, v) in normalized.iter().enumerate().skip(i + 1) {
                check(
                    vec_inner(u, v)?.norm(),
                    format!("seeds {} and {}", i + 1, j + 1),
                )?;
            }
        }
        Ok(SeedList { seeds: normalized })
    }

    /// `|ψ_i⟩ ∝ |0⟩ + tan(iπ/2n)|1⟩`, `i = 1 … n − 1`.
    pub fn default_for(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::OutOfRange {
                what: "n",
                message: format!("shift family needs n >= 2, got {n}"),
            });
        }
        let seeds = (1..n)
            .map(|i| {
                let theta = i as f64 * PI / (2 * n) as f64;
                CVector::from_real(&[theta.cos(), theta.sin()])
            })
            .collect();
        SeedList::new(seeds)
    }

    pub fn seeds(&self) -> &[CVector] {
        &self.seeds
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }
}

/// The local-state map `F` over `Z_N`, `N = 2n − 1`.
#[derive(Clone, Debug)]
pub struct ShiftMap {
    n: usize,
    values: Vec<CVector>,
}

impl ShiftMap {
    pub fn new(n: usize, seeds: &SeedList) -> Result<Self> {
        if n < 2 {
            return Err(Error::OutOfRange {
                what: "n",
                message: format!("shift family needs n >= 2, got {n}"),
            });
        }
        if seeds.len() != n - 1 {
            return Err(Error::InvalidSeed(format!(
                "n = {n} needs {} seeds, got {}",
                n - 1,
                seeds.len()
            )));
        }
        let big_n = 2 * n - 1;
        let mut values = vec![CVector::basis(2, 1); big_n];
        for (k, psi) in seeds.seeds().iter().enumerate() {
            let i = k + 1;
            values[i] = qubit_perp(psi);
            values[big_n - i] = psi.clone();
        }
        Ok(ShiftMap { n, values })
    }

    pub fn modulus(&self) -> usize {
        2 * self.n - 1
    }

    pub fn get(&self, x: usize) -> &CVector {
        &self.values[x % self.modulus()]
    }

    /// Shift state `u ∈ Z_N`: party `p` carries `F(u − p)`.
    pub fn state(&self, u: usize) -> ProductState {
        let big_n = self.modulus();
        let factors = (0..big_n)
            .map(|p| self.get((u + big_n - p) % big_n).clone())
            .collect();
        ProductState::new(factors).expect("map values are unit vectors")
    }
}

/// The `N = 2n − 1` cyclic shifts `|Ψ_1⟩ … |Ψ_N⟩` on `N` qubits.
pub fn shift_family(n: usize, seeds: &SeedList) -> Result<StateSet> {
    let map = ShiftMap::new(n, seeds)?;
    let big_n = map.modulus();
    let states = (0..big_n).map(|u| map.state(u)).collect();
    StateSet::from_products(format!("shift-family-{n}"), &vec![2; big_n], states)
}

/// `|0…0⟩` followed by the shift family: a `2n`-element set on `2n − 1` qubits.
pub fn upb_shifts(n: usize, seeds: &SeedList) -> Result<StateSet> {
    let family = shift_family(n, seeds)?;
    let big_n = 2 * n - 1;
    let mut states = vec![State::Product(ProductState::basis(
        &vec![2; big_n],
        &vec![0; big_n],
    ))];
    states.extend(family.states().iter().cloned());
    StateSet::new(format!("shifts-{n}"), family.signature().clone(), states)
}

/// `|000⟩ ± |111⟩` and `|001⟩ + |010⟩ + |100⟩`, normalized.
pub fn entangled_triple() -> StateSet {
    entangled_triple_n(3).expect("three qubits")
}

/// GHZ± and W on `n` qubits. Only `n = 3` is a named set; larger `n` is an
/// experimental extension whose stability is checked, not assumed.
pub fn entangled_triple_n(n: usize) -> Result<StateSet> {
    if !(3..=20).contains(&n) {
        return Err(Error::OutOfRange {
            what: "n",
            message: format!("entangled triple supports 3..=20 qubits, got {n}"),
        });
    }
    let dims = vec![2; n];
    let zeros = vec![0; n];
    let ones = vec![1; n];
    let ghz = |sign: f64| DenseState::from_terms(&dims, &[(c(1.0), &zeros), (c(sign), &ones)]);
    let singles: Vec<Vec<usize>> = (0..n)
        .map(|k| (0..n).map(|r| usize::from(r == k)).collect())
        .collect();
    let w_terms: Vec<(C64, &[usize])> = singles.iter().map(|d| (c(1.0), d.as_slice())).collect();
    let w = DenseState::from_terms(&dims, &w_terms)?;
    StateSet::new(
        if n == 3 {
            "triple".to_string()
        } else {
            format!("triple-{n}")
        },
        PartySignature::new(dims.clone())?,
        vec![ghz(1.0)?.into(), ghz(-1.0)?.into(), w.into()],
    )
}

/// The five-state Tiles UPB in 3⊗3.
pub fn upb_tiles33() -> StateSet {
    let states = tiles_factors()
        .into_iter()
        .map(|[a, b]| product(&[&a, &b]))
        .collect();
    StateSet::from_products("tiles33", &[3, 3], states).expect("fixed signature")
}

fn tiles_factors() -> Vec<[Vec<f64>; 2]> {
    vec![
        [vec![1.0, 0.0, 0.0], vec![1.0, -1.0, 0.0]],
        [vec![0.0, 0.0, 1.0], vec![0.0, 1.0, -1.0]],
        [vec![1.0, -1.0, 0.0], vec![0.0, 0.0, 1.0]],
        [vec![0.0, 1.0, -1.0], vec![1.0, 0.0, 0.0]],
        [vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]],
    ]
}

/// Which third-party indexing the 3⊗3⊗3 heptagon set uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SepVariant {
    /// `w_i = u_{3i mod 7}`: mutually orthogonal.
    Corrected,
    /// `w_i = v_{3i mod 7} = u_{6i mod 7}` as literally composed; pairs at
    /// index distance ±3 are orthogonal in no party.
    LiteralIndexing,
}

/// `h = √(−cos(4π/7))`.
pub fn sep_h() -> f64 {
    (-(4.0 * PI / 7.0).cos()).sqrt()
}

/// `1/√(1 − cos(4π/7))`, the norm of `(cos, sin, h)` inverted.
pub fn sep_norm() -> f64 {
    1.0 / (1.0 - (4.0 * PI / 7.0).cos()).sqrt()
}

/// `−cos(4πi/7)`, the square of the index-dependent `h` as literally
/// written; it is negative (so `h` imaginary) for `i ∈ {0, 3, 4}`.
pub fn sep_literal_h_squared(i: usize) -> f64 {
    -(4.0 * PI * i as f64 / 7.0).cos()
}

/// `|u_i⟩ = N (cos(2πi/7), sin(2πi/7), h)`.
pub fn sep_u(i: usize) -> CVector {
    let angle = 2.0 * PI * (i % 7) as f64 / 7.0;
    CVector::from_real(&[angle.cos(), angle.sin(), sep_h()]).scale(c(sep_norm()))
}

/// Seven states `|u_i⟩|u_{2i}⟩|u_{3i}⟩` in 3⊗3⊗3.
pub fn upb_sep333() -> StateSet {
    upb_sep333_variant(SepVariant::Corrected)
}

pub fn upb_sep333_variant(variant: SepVariant) -> StateSet {
    let third = match variant {
        SepVariant::Corrected => 3,
        SepVariant::LiteralIndexing => 6,
    };
    let states = (0..7)
        .map(|i| {
            ProductState::new(vec![sep_u(i), sep_u(2 * i), sep_u(third * i)]).expect("unit vectors")
        })
        .collect();
    let label = match variant {
        SepVariant::Corrected => "sep333",
        SepVariant::LiteralIndexing => "sep333-literal",
    };
    StateSet::from_products(label, &[3, 3, 3], states).expect("fixed signature")
}

/// Tiles padded into 4⊗4 plus the seven basis states touching `|3⟩`.
pub fn upb_44_reducible() -> StateSet {
    let pad = |v: &[f64]| {
        let mut w = v.to_vec();
        w.push(0.0);
        w
    };
    let mut states: Vec<ProductState> = tiles_factors()
        .into_iter()
        .map(|[a, b]| product(&[&pad(&a), &pad(&b)]))
        .collect();
    for i in 0..4 {
        states.push(ProductState::basis(&[4, 4], &[3, i]));
    }
    for j in 0..3 {
        states.push(ProductState::basis(&[4, 4], &[j, 3]));
    }
    StateSet::from_products("reducible44", &[4, 4], states).expect("fixed signature")
}

fn tensor_states(a: &State, b: &State, signature: &PartySignature) -> Result<State> {
    match (a, b) {
        (State::Product(x), State::Product(y)) => Ok(State::Product(x.concat(y))),
        _ => {
            let (x, y) = (a.to_dense()?, b.to_dense()?);
            Ok(State::Dense(DenseState::new(
                x.amplitudes().kron(y.amplitudes()),
                signature.clone(),
            )?))
        }
    }
}

/// `({ψ} ⊗ S₂) ∪ (S₁ ⊗ {φ})` with `ψ = S₁[idx1]`, `φ = S₂[idx2]`, over the
/// concatenated parties. The shared state `ψ ⊗ φ` appears once, so the
/// result has `|S₁| + |S₂| − 1` members: first `ψ ⊗ S₂` in `S₂` order,
/// then `S₁ ⊗ φ` in `S₁` order skipping `idx1`.
pub fn compose(s1: &StateSet, idx1: usize, s2: &StateSet, idx2: usize) -> Result<StateSet> {
    s1.check_index(idx1)?;
    s2.check_index(idx2)?;
    let signature = s1.signature().concat(s2.signature());
    let psi = &s1.states()[idx1];
    let phi = &s2.states()[idx2];
    let mut states = Vec::with_capacity(s1.len() + s2.len() - 1);
    for b in s2.states() {
        states.push(tensor_states(psi, b, &signature)?);
    }
    for (i, a) in s1.states().iter().enumerate() {
        if i != idx1 {
            states.push(tensor_states(a, phi, &signature)?);
        }
    }
    StateSet::new(format!("{}+{}", s1.label(), s2.label()), signature, states)
}

/// Index data of the `3⌈√N⌉` shift subset.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AppendixSubset {
    pub n: usize,
    /// `N = 2n − 1`.
    pub modulus: usize,
    /// `ℓ = ⌈√N⌉`.
    pub ell: usize,
    /// `I = {0, …, 2ℓ+1}`.
    pub interval: Vec<usize>,
    /// `{kℓ : 3 ≤ k ≤ ℓ−1}` restricted to `Z_N`.
    pub multiples: Vec<usize>,
    /// Multiples `kℓ ≥ N` that have no place in `Z_N`; nonempty exactly
    /// when `ℓ(ℓ−1) ≥ N`.
    pub out_of_range: Vec<usize>,
    /// `T = I ∪ multiples ∪ {N−1}`, sorted. Holds `3ℓ` elements unless
    /// `ℓ(ℓ−1) ≥ N−1`, where one multiple is missing or equals `N−1`.
    pub t: Vec<usize>,
}

impl AppendixSubset {
    pub fn new(n: usize) -> Result<Self> {
        let modulus = 2 * n.max(1) - 1;
        if modulus <= 36 {
            return Err(Error::OutOfRange {
                what: "n",
                message: format!(
                    "the 3*ceil(sqrt(N)) subset assumes N = 2n - 1 > 36; got N = {modulus}"
                ),
            });
        }
        let mut ell = (modulus as f64).sqrt().ceil() as usize;
        while ell * ell < modulus {
            ell += 1;
        }
        while (ell - 1) * (ell - 1) >= modulus {
            ell -= 1;
        }
        let interval: Vec<usize> = (0..=2 * ell + 1).collect();
        let (multiples, out_of_range): (Vec<usize>, Vec<usize>) =
            (3..ell).map(|k| k * ell).partition(|&x| x < modulus);
        let mut t: Vec<usize> = interval.iter().chain(&multiples).copied().collect();
        t.push(modulus - 1);
        t.sort_unstable();
        t.dedup();
        Ok(AppendixSubset {
            n,
            modulus,
            ell,
            interval,
            multiples,
            out_of_range,
            t,
        })
    }

    /// A subset with a caller-chosen `T` (used to probe the two-pairs check).
    pub fn with_t(n: usize, mut t: Vec<usize>) -> Result<Self> {
        let mut base = AppendixSubset::new(n)?;
        if let Some(&x) = t.iter().find(|&&x| x >= base.modulus) {
            return Err(Error::OutOfRange {
                what: "T",
                message: format!("{x} is not in Z_{}", base.modulus),
            });
        }
        t.sort_unstable();
        t.dedup();
        base.t = t;
        Ok(base)
    }

    pub fn size(&self) -> usize {
        self.t.len()
    }

    /// `T_i = T − (i − 1) mod N` for `i = 1 … N`.
    pub fn shifted(&self, i: usize) -> Vec<usize> {
        let m = self.modulus;
        let s = (i + m - 1) % m;
        let mut v: Vec<usize> = self.t.iter().map(|&x| (x + m - s) % m).collect();
        v.sort_unstable();
        v
    }
}

/// The `3⌈√N⌉` states of the shift family selected by `T`: state `u ∈ T`
/// has first factor `F(u)`.
pub fn appendix_subset(n: usize, seeds: &SeedList) -> Result<(AppendixSubset, StateSet)> {
    let sub = AppendixSubset::new(n)?;
    let map = ShiftMap::new(n, seeds)?;
    let states = sub.t.iter().map(|&u| map.state(u)).collect();
    let set = StateSet::from_products(format!("appendix-{n}"), &vec![2; sub.modulus], states)?;
    Ok((sub, set))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoPairsReport {
    /// Entry `i − 1`: number of unordered pairs `{x, N − x}`, `x ≠ 0`,
    /// inside `T_i`.
    pub counts: Vec<usize>,
    pub min_count: usize,
    /// 1-based shift where the minimum first occurs.
    pub min_shift: usize,
    pub passed: bool,
}

pub fn complementary_pairs(set: &[usize], modulus: usize) -> Vec<(usize, usize)> {
    let mut present = vec![false; modulus];
    for &x in set {
        present[x % modulus] = true;
    }
    (1..modulus)
        .filter(|&x| x < modulus - x && present[x] && present[modulus - x])
        .map(|x| (x, modulus - x))
        .collect()
}

/// Every shifted copy of `T` must hold two complementary pairs, i.e. every
/// party of the selected states sees two pairs of orthogonal factors.
pub fn verify_two_pairs(sub: &AppendixSubset) -> TwoPairsReport {
    let counts: Vec<usize> = (1..=sub.modulus)
        .map(|i| complementary_pairs(&sub.shifted(i), sub.modulus).len())
        .collect();
    let (pos, &min_count) = counts
        .iter()
        .enumerate()
        .min_by_key(|(_, &c)| c)
        .expect("N > 36 shifts");
    TwoPairsReport {
        passed: min_count >= 2,
        min_count,
        min_shift: pos + 1,
        counts,
    }
}
