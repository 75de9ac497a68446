//! Matrix exponentials of general (not necessarily normal) complex matrices.
//!
//! Hermitian propagators go through [`super::HermitianSpectrum`]; the routines
//! here cover the non-hermitian effective generators of the quantum-jump
//! method and serve as an independent check of the spectral route.

use nalgebra::{DMatrix, DVector};

use super::C64;

fn norm1(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(A)` by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = norm1(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let b = a.scale(0.5f64.powi(squarings as i32));

    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..=40 {
        term = (&term * &b).unscale(k as f64);
        result += &term;
        if norm1(&term) <= 1e-18 * norm1(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// A generator `G` split into the connected components of its sparsity
/// graph, so that `exp(G t)` is the direct sum of small block exponentials.
///
/// The Hamiltonians of this crate conserve excitation number and never mix
/// more than a couple of basis states, so the blocks are tiny and `exp(G t)`
/// costs far less than a dense exponential.
#[derive(Clone, Debug)]
pub struct BlockGenerator {
    dim: usize,
    blocks: Vec<Block>,
}

#[derive(Clone, Debug)]
struct Block {
    indices: Vec<usize>,
    generator: DMatrix<C64>,
}

/// `exp(G t)` for one fixed `t`, stored blockwise.
#[derive(Clone, Debug)]
pub struct BlockPropagator {
    dim: usize,
    blocks: Vec<(Vec<usize>, DMatrix<C64>)>,
}

impl BlockGenerator {
    pub fn new(g: &DMatrix<C64>) -> Self {
        let n = g.nrows();
        assert_eq!(n, g.ncols(), "generator must be square");
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for r in 0..n {
            for c in 0..n {
                if r != c && g[(r, c)] != C64::new(0.0, 0.0) {
                    let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let root = find(&mut parent, i);
            if slot[root] == usize::MAX {
                slot[root] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[root]].push(i);
        }
        let blocks = groups
            .into_iter()
            .map(|indices| {
                let k = indices.len();
                let generator = DMatrix::from_fn(k, k, |r, c| g[(indices[r], indices[c])]);
                Block { indices, generator }
            })
            .collect();
        Self { dim: n, blocks }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn largest_block(&self) -> usize {
        self.blocks.iter().map(|b| b.indices.len()).max().unwrap_or(0)
    }

    pub fn propagator(&self, t: f64) -> BlockPropagator {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let e = if b.indices.len() == 1 {
                    DMatrix::from_element(1, 1, (b.generator[(0, 0)] * t).exp())
                } else {
                    expm(&b.generator.scale(t))
                };
                (b.indices.clone(), e)
            })
            .collect();
        BlockPropagator {
            dim: self.dim,
            blocks,
        }
    }

    pub fn apply(&self, t: f64, v: &DVector<C64>) -> DVector<C64> {
        self.propagator(t).apply(v)
    }
}

impl BlockPropagator {
    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        assert_eq!(v.len(), self.dim);
        let mut out = DVector::zeros(self.dim);
        for (indices, m) in &self.blocks {
            for (r, &ir) in indices.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (c, &ic) in indices.iter().enumerate() {
                    acc += m[(r, c)] * v[ic];
                }
                out[ir] = acc;
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (indices, m) in &self.blocks {
            for (r, &ir) in indices.iter().enumerate() {
                for (c, &ic) in indices.iter().enumerate() {
                    out[(ir, ic)] = m[(r, c)];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::operator::max_abs_diff;

    #[test]
    fn exponential_of_zero_and_diagonal() {
        let z = DMatrix::<C64>::zeros(3, 3);
        assert!(max_abs_diff(&expm(&z), &DMatrix::identity(3, 3)) < 1e-16);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(-2.0, 3.0),
            C64::new(0.0, 40.0),
        ]));
        let e = expm(&d);
        for i in 0..3 {
            let expect = d[(i, i)].exp();
            assert!((e[(i, i)] - expect).norm() < 1e-12 * expect.norm().max(1.0));
        }
    }

    #[test]
    fn nilpotent_closed_form() {
        // exp([[0, x], [0, 0]]) = [[1, x], [0, 1]]
        let x = C64::new(2.5, -1.0);
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), x, C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        let e = expm(&m);
        assert!((e[(0, 1)] - x).norm() < 1e-14);
        assert!((e[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn blocks_match_dense_exponential() {
        // two disconnected blocks plus an isolated site, permuted indices
        let mut g = DMatrix::<C64>::zeros(5, 5);
        g[(0, 3)] = C64::new(0.0, 1.3);
        g[(3, 0)] = C64::new(0.0, 1.3);
        g[(0, 0)] = C64::new(-0.2, 0.0);
        g[(1, 4)] = C64::new(0.7, 0.1);
        g[(4, 1)] = C64::new(-0.7, 0.1);
        g[(2, 2)] = C64::new(-0.5, 2.0);
        let blocks = BlockGenerator::new(&g);
        assert_eq!(blocks.largest_block(), 2);
        let t = 1.9;
        let dense = expm(&g.scale(t));
        assert!(max_abs_diff(&dense, &blocks.propagator(t).to_dense()) < 1e-13);
    }
}
