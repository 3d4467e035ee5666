//! The seven-dimensional cross product from imaginary octonions.
//!
//! Cayley basis `e_1 ... e_7` with `e_i e_{i+1} = e_{i+3}` (indices mod 7),
//! which gives the oriented triples below. The cross product is the
//! imaginary part of the octonion product of two imaginary octonions.

/// Oriented triples `(i, j, k)` with `e_i × e_j = e_k`, zero-based.
pub const TRIPLES: [[usize; 3]; 7] = [
    [0, 1, 3],
    [1, 2, 4],
    [2, 3, 5],
    [3, 4, 6],
    [4, 5, 0],
    [5, 6, 1],
    [6, 0, 2],
];

/// Structure constants `ε_{ijk}` with `(a × b)_k = Σ ε_{ijk} a_i b_j`.
pub fn structure_constants() -> [[[f64; 7]; 7]; 7] {
    let mut eps = [[[0.0; 7]; 7]; 7];
    for [i, j, k] in TRIPLES {
        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
            eps[a][b][c] = 1.0;
            eps[b][a][c] = -1.0;
        }
    }
    eps
}

pub fn cross(a: &[f64; 7], b: &[f64; 7]) -> [f64; 7] {
    let mut out = [0.0; 7];
    for [i, j, k] in TRIPLES {
        for (p, q, r) in [(i, j, k), (j, k, i), (k, i, j)] {
            out[r] += a[p] * b[q] - a[q] * b[p];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dot(a: &[f64; 7], b: &[f64; 7]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn vec7() -> impl Strategy<Value = [f64; 7]> {
        proptest::array::uniform7(-2.0f64..2.0)
    }

    #[test]
    fn basis_products() {
        let e = |i: usize| {
            let mut v = [0.0; 7];
            v[i] = 1.0;
            v
        };
        assert_eq!(cross(&e(0), &e(1)), e(3));
        assert_eq!(cross(&e(1), &e(0)).map(|x| -x), e(3));
        assert_eq!(cross(&e(6), &e(0)), e(2));
        let eps = structure_constants();
        for (i, row) in eps.iter().enumerate() {
            for (j, expect) in row.iter().enumerate() {
                let c = cross(&e(i), &e(j));
                for (k, v) in expect.iter().enumerate() {
                    assert_eq!(c[k], *v);
                }
            }
        }
    }

    #[test]
    fn each_pair_lies_in_exactly_one_triple() {
        for i in 0..7 {
            for j in (i + 1)..7 {
                let hits = TRIPLES.iter().filter(|t| t.contains(&i) && t.contains(&j)).count();
                assert_eq!(hits, 1, "({i}, {j})");
            }
        }
    }

    proptest! {
        #[test]
        fn orthogonal_to_factors(a in vec7(), b in vec7()) {
            let c = cross(&a, &b);
            prop_assert!(dot(&c, &a).abs() < 1e-12);
            prop_assert!(dot(&c, &b).abs() < 1e-12);
        }

        #[test]
        fn norm_identity(a in vec7(), b in vec7()) {
            let c = cross(&a, &b);
            let lhs = dot(&c, &c);
            let rhs = dot(&a, &a) * dot(&b, &b) - dot(&a, &b).powi(2);
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }

        #[test]
        fn double_cross(a in vec7(), b in vec7()) {
            // a × (a × b) = −|a|² b + (a·b) a
            let lhs = cross(&a, &cross(&a, &b));
            let (aa, ab) = (dot(&a, &a), dot(&a, &b));
            for k in 0..7 {
                prop_assert!((lhs[k] - (-aa * b[k] + ab * a[k])).abs() < 1e-10);
            }
        }
    }
}
