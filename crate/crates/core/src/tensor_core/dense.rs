//! Dense covariant arrays of fixed rank over a `dim`-dimensional space.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

/// Row-major dense array `T_{i_1 ... i_R}` with every index running over `0..dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Covariant<const R: usize> {
    dim: usize,
    data: Vec<f64>,
}

impl<const R: usize> Covariant<R> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(R as u32)],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut([usize; R]) -> f64) -> Self {
        let mut out = Self::zeros(dim);
        for flat in 0..out.data.len() {
            out.data[flat] = f(out.unflatten(flat));
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, idx: [usize; R]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    fn unflatten(&self, mut flat: usize) -> [usize; R] {
        let mut idx = [0; R];
        for slot in (0..R).rev() {
            idx[slot] = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }

    pub fn get(&self, idx: [usize; R]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: [usize; R], value: f64) {
        let o = self.offset(idx);
        self.data[o] = value;
    }

    /// Every multi-index in row-major order.
    pub fn indices(&self) -> impl Iterator<Item = [usize; R]> + '_ {
        (0..self.data.len()).map(move |flat| self.unflatten(flat))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Componentwise inner product.
    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Substitutes `map · v` into one slot: `T'(.., v, ..) = T(.., map v, ..)`.
    pub fn pull_back(&self, slot: usize, map: &DMatrix<f64>) -> Self {
        assert!(slot < R);
        let n = self.dim;
        assert_eq!(map.shape(), (n, n), "dimension mismatch");
        let stride = n.pow((R - 1 - slot) as u32);
        let mut data = vec![0.0; self.data.len()];
        for (flat, out) in data.iter_mut().enumerate() {
            let a = (flat / stride) % n;
            let base = flat - a * stride;
            *out = (0..n).map(|b| self.data[base + b * stride] * map[(b, a)]).sum();
        }
        Self { dim: n, data }
    }

    /// Substitutes `map` into every slot, i.e. expresses the tensor in the
    /// basis formed by the columns of `map`.
    pub fn pull_back_all(&self, map: &DMatrix<f64>) -> Self {
        (0..R).fold(self.clone(), |t, slot| t.pull_back(slot, map))
    }

    /// Applies `f` to every index tuple, returning a tensor of permuted or
    /// recombined components.
    pub fn map_indices(&self, mut f: impl FnMut(&Self, [usize; R]) -> f64) -> Self {
        let mut out = Self::zeros(self.dim);
        for flat in 0..self.data.len() {
            out.data[flat] = f(self, self.unflatten(flat));
        }
        out
    }

    /// Evaluates the multilinear form on the given vectors.
    pub fn eval(&self, vectors: [&[f64]; R]) -> f64 {
        let mut acc = 0.0;
        for flat in 0..self.data.len() {
            let v = self.data[flat];
            if v == 0.0 {
                continue;
            }
            let idx = self.unflatten(flat);
            let mut w = v;
            for slot in 0..R {
                w *= vectors[slot][idx[slot]];
            }
            acc += w;
        }
        acc
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }
}

impl<const R: usize> Add for &Covariant<R> {
    type Output = Covariant<R>;
    fn add(self, rhs: Self) -> Covariant<R> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<const R: usize> Sub for &Covariant<R> {
    type Output = Covariant<R>;
    fn sub(self, rhs: Self) -> Covariant<R> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<const R: usize> Add for Covariant<R> {
    type Output = Covariant<R>;
    fn add(self, rhs: Self) -> Covariant<R> {
        &self + &rhs
    }
}

impl<const R: usize> Sub for Covariant<R> {
    type Output = Covariant<R>;
    fn sub(self, rhs: Self) -> Covariant<R> {
        &self - &rhs
    }
}

impl<const R: usize> Mul<f64> for &Covariant<R> {
    type Output = Covariant<R>;
    fn mul(self, rhs: f64) -> Covariant<R> {
        self.scaled(rhs)
    }
}

impl<const R: usize> Mul<f64> for Covariant<R> {
    type Output = Covariant<R>;
    fn mul(self, rhs: f64) -> Covariant<R> {
        self.scaled(rhs)
    }
}

impl<const R: usize> Neg for Covariant<R> {
    type Output = Covariant<R>;
    fn neg(self) -> Covariant<R> {
        self.scaled(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_round_trip() {
        let t = Covariant::<3>::from_fn(3, |[i, j, k]| (100 * i + 10 * j + k) as f64);
        assert_eq!(t.get([2, 0, 1]), 201.0);
        for idx in t.indices() {
            assert_eq!(t.get(idx), (100 * idx[0] + 10 * idx[1] + idx[2]) as f64);
        }
    }

    #[test]
    fn pull_back_matches_direct_evaluation() {
        let t = Covariant::<2>::from_fn(2, |[i, j]| (1 + i + 3 * j) as f64);
        let map = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -1.0, 0.5]);
        let p = t.pull_back(1, &map);
        for a in 0..2 {
            for b in 0..2 {
                let col: Vec<f64> = map.column(b).iter().copied().collect();
                let mut ea = [0.0; 2];
                ea[a] = 1.0;
                assert!((p.get([a, b]) - t.eval([&ea, &col])).abs() < 1e-14);
            }
        }
    }
}
