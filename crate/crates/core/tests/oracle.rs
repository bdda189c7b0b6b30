//! Exact rational rank oracle, independent of the floating-point kernel.

use locstab::constructions::{upb_44_reducible, upb_qubit3, upb_tiles33};
use locstab::numerics::{span_rank, CMatrix, CVector, Tolerance};
use locstab::stability::is_locally_stable;
use num_rational::Ratio;

type Q = Ratio<i64>;

fn q(x: i64) -> Q {
    Q::from_integer(x)
}

fn rank(mut rows: Vec<Vec<Q>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] != q(0)) else {
            continue;
        };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && rows[i][c] != q(0) {
                let f = rows[i][c] / rows[r][c];
                let pivot = rows[r].clone();
                for (x, v) in rows[i].iter_mut().zip(pivot).skip(c) {
                    *x -= f * v;
                }
            }
        }
        r += 1;
    }
    r
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn outer(a: &[i64], b: &[i64]) -> Vec<Q> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| q(x * y)))
        .collect()
}

/// Span ranks per party for a real, unnormalized product set: a pair
/// generates at party i iff its factors are orthogonal there and nowhere else.
fn oracle_spans(set: &[Vec<Vec<i64>>]) -> Vec<usize> {
    let parties = set[0].len();
    (0..parties)
        .map(|i| {
            let mut rows = Vec::new();
            for (j, a) in set.iter().enumerate() {
                for (k, b) in set.iter().enumerate() {
                    if j == k || dot(&a[i], &b[i]) != 0 {
                        continue;
                    }
                    if (0..parties).all(|r| r == i || dot(&a[r], &b[r]) != 0) {
                        rows.push(outer(&a[i], &b[i]));
                    }
                }
            }
            if rows.is_empty() {
                0
            } else {
                rank(rows)
            }
        })
        .collect()
}

fn v(x: &[i64]) -> Vec<i64> {
    x.to_vec()
}

#[test]
fn rational_rank_of_spec_example() {
    let m = vec![
        outer(&[1, 0], &[0, 1]),
        outer(&[0, 1], &[1, 0]),
        outer(&[1, 1], &[1, -1]),
        outer(&[1, -1], &[1, 1]),
    ];
    assert_eq!(rank(m), 3);

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let k0 = CVector::from_real(&[1.0, 0.0]);
    let k1 = CVector::from_real(&[0.0, 1.0]);
    let plus = CVector::from_real(&[s, s]);
    let minus = CVector::from_real(&[s, -s]);
    let mats = vec![
        CMatrix::outer(&k0, &k1),
        CMatrix::outer(&k1, &k0),
        CMatrix::outer(&plus, &minus),
        CMatrix::outer(&minus, &plus),
    ];
    assert_eq!(span_rank(&mats, &Tolerance::default()).unwrap(), 3);
}

#[test]
fn qubit3_matches_rational_oracle() {
    let (z, o, p, m) = (v(&[1, 0]), v(&[0, 1]), v(&[1, 1]), v(&[1, -1]));
    let set = vec![
        vec![z.clone(), z.clone(), z.clone()],
        vec![p.clone(), m.clone(), o.clone()],
        vec![o.clone(), p.clone(), m.clone()],
        vec![m, o, p],
    ];
    let spans = oracle_spans(&set);
    assert_eq!(spans, vec![3, 3, 3]);
    let cert = is_locally_stable(&upb_qubit3(), &Tolerance::default()).unwrap();
    assert_eq!(cert.span_dims(), spans);
}

fn tiles(d: usize) -> Vec<Vec<Vec<i64>>> {
    let e = |xs: &[i64]| {
        let mut x = xs.to_vec();
        x.resize(d, 0);
        x
    };
    vec![
        vec![e(&[1]), e(&[1, -1])],
        vec![e(&[1, -1]), e(&[0, 0, 1])],
        vec![e(&[0, 0, 1]), e(&[0, 1, -1])],
        vec![e(&[0, 1, -1]), e(&[1])],
        vec![e(&[1, 1, 1]), e(&[1, 1, 1])],
    ]
}

#[test]
fn tiles33_matches_rational_oracle() {
    let spans = oracle_spans(&tiles(3));
    assert_eq!(spans, vec![8, 8]);
    let cert = is_locally_stable(&upb_tiles33(), &Tolerance::default()).unwrap();
    assert_eq!(cert.span_dims(), spans);
}

#[test]
fn reducible44_matches_rational_oracle() {
    let mut set = tiles(4);
    let basis = |i: usize| {
        let mut x = vec![0; 4];
        x[i] = 1;
        x
    };
    for i in 0..4 {
        for j in 0..4 {
            if i == 3 || j == 3 {
                set.push(vec![basis(i), basis(j)]);
            }
        }
    }
    assert_eq!(set.len(), 12);
    let spans = oracle_spans(&set);
    assert_eq!(spans, vec![14, 14]);
    let cert = is_locally_stable(&upb_44_reducible(), &Tolerance::default()).unwrap();
    assert_eq!(cert.span_dims(), spans);
    assert!(!cert.stable);
}
