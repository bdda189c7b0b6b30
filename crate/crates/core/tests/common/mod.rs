#![allow(dead_code)]

use locstab::constructions::{
    entangled_triple, upb_44_reducible, upb_qubit3, upb_sep333, upb_shifts, upb_tiles33, SeedList,
};
use locstab::numerics::{CMatrix, CVector, Tolerance};
use locstab::states::{ProductState, State, StateSet};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn tol() -> Tolerance {
    Tolerance::default()
}

pub fn shifts(n: usize) -> StateSet {
    upb_shifts(n, &SeedList::default_for(n).unwrap()).unwrap()
}

/// Named sets with their expected verdicts.
pub fn named_sets() -> Vec<(StateSet, bool)> {
    let mut v = vec![
        (upb_qubit3(), true),
        (entangled_triple(), true),
        (upb_tiles33(), true),
        (upb_sep333(), true),
        (upb_44_reducible(), false),
    ];
    for n in 2..=6 {
        v.push((shifts(n), true));
    }
    v
}

pub fn random_c64<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    CMatrix::new(d, d, (0..d * d).map(|_| random_c64(rng)).collect()).unwrap()
}

pub fn random_vector<R: Rng>(rng: &mut R, d: usize) -> CVector {
    CVector::new((0..d).map(|_| random_c64(rng)).collect())
        .normalized()
        .unwrap()
}

pub fn random_phase<R: Rng>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Haar-ish unitary, columns from Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> Vec<CVector> {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d).map(|_| random_c64(rng)).collect();
        for c in &cols {
            let p: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(c) {
                *x -= p * y;
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    cols.into_iter().map(CVector::new).collect()
}

pub fn apply(u: &[CVector], v: &CVector) -> CVector {
    // u holds the columns.
    let mut out = vec![C64::new(0.0, 0.0); u.len()];
    for (col, x) in u.iter().zip(v.entries()) {
        for (o, c) in out.iter_mut().zip(col.entries()) {
            *o += c * x;
        }
    }
    CVector::new(out)
}

/// Same local unitary on every state of a product set.
pub fn rotate_locally<R: Rng>(rng: &mut R, set: &StateSet) -> StateSet {
    let us: Vec<Vec<CVector>> = set.dims().iter().map(|&d| random_unitary(rng, d)).collect();
    let states = set
        .product_states()
        .unwrap()
        .into_iter()
        .map(|p| {
            ProductState::new(
                p.factors()
                    .iter()
                    .zip(&us)
                    .map(|(f, u)| apply(u, f))
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    StateSet::from_products(set.label(), set.dims(), states).unwrap()
}

/// Random orthogonal product set: a random subset of a computational
/// basis, or a named product set, under independent local rotations.
pub fn random_orthogonal_product_set<R: Rng>(rng: &mut R) -> StateSet {
    let base = match rng.random_range(0..4) {
        0 => {
            let parties = rng.random_range(2..=4);
            let dims: Vec<usize> = (0..parties).map(|_| rng.random_range(2..=3)).collect();
            let total: usize = dims.iter().product();
            let size = rng.random_range(2..=total.min(12));
            let picks = rand::seq::index::sample(rng, total, size).into_vec();
            let states = picks
                .into_iter()
                .map(|mut x| {
                    let mut digits = vec![0; dims.len()];
                    for p in (0..dims.len()).rev() {
                        digits[p] = x % dims[p];
                        x /= dims[p];
                    }
                    ProductState::basis(&dims, &digits)
                })
                .collect();
            StateSet::from_products("basis-subset", &dims, states).unwrap()
        }
        1 => upb_qubit3(),
        2 => upb_tiles33(),
        _ => shifts(rng.random_range(2..=4)),
    };
    rotate_locally(rng, &base)
}

pub fn with_states(set: &StateSet, states: Vec<State>) -> StateSet {
    StateSet::new(set.label(), set.signature().clone(), states).unwrap()
}
