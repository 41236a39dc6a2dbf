//! Positivity of block operators on `P_q ⊗ H` that only couple a word to its one-letter
//! right extensions: diagonal blocks `C`, blocks `E_i` at `(α, αg_i)` and `E_i^*` at
//! `(αg_i, α)`. All subtrees of equal height are identical, so eliminating the leaves
//! repeatedly gives one Schur complement per height:
//! `S_0 = C`, `S_{j+1} = C − Σ_i E_i S_j^{-1} E_i^*`, and the operator is positive
//! definite iff every `S_j`, `j ≤ q`, is.

use crate::matrix::{cholesky, eigvalsh, solve_lower, CMatrix, C64, ZERO};

/// Edge block stored densely plus a column-sparse copy for cheap products.
#[derive(Clone, Debug)]
pub struct EdgeBlock {
    pub dense: CMatrix,
    /// Per column: `(row, value)` for each nonzero.
    cols: Vec<Vec<(usize, C64)>>,
    nnz: usize,
}

impl EdgeBlock {
    pub fn new(dense: CMatrix) -> Self {
        let d = dense.cols();
        let mut cols = vec![Vec::new(); d];
        let mut nnz = 0;
        for i in 0..dense.rows() {
            for (j, col) in cols.iter_mut().enumerate() {
                let z = dense[(i, j)];
                if z != ZERO {
                    col.push((i, z));
                    nnz += 1;
                }
            }
        }
        EdgeBlock { dense, cols, nnz }
    }
}

#[derive(Clone, Debug)]
pub struct TreeOperator {
    pub c: CMatrix,
    pub edges: Vec<EdgeBlock>,
    sparse: bool,
}

/// One elimination state: either a diagonal or a dense Hermitian block.
#[derive(Clone, Debug)]
enum Block {
    Diag(Vec<f64>),
    Dense(CMatrix),
}

impl TreeOperator {
    pub fn new(c: CMatrix, edges: Vec<CMatrix>) -> Self {
        let d = c.rows();
        let edges: Vec<EdgeBlock> = edges.into_iter().map(EdgeBlock::new).collect();
        let total: usize = edges.iter().map(|e| e.nnz).sum();
        let sparse = d > 24 && total <= d * d / 8;
        TreeOperator { c, edges, sparse }
    }

    pub fn dim(&self) -> usize {
        self.c.rows()
    }

    fn is_diag(c: &CMatrix) -> bool {
        let d = c.rows();
        (0..d).all(|i| (0..d).all(|j| i == j || c[(i, j)] == ZERO))
    }

    /// Walks heights `0..=q`. Returns `Ok(min over heights of λ_min(S_j))` when all are
    /// positive definite, otherwise `Err((j, λ_min(S_j)))` for the first failing height.
    /// With `want_margin == false` the eigenvalue work is skipped and `Ok(f64::NAN)` is returned.
    pub fn walk(&self, q: usize, want_margin: bool) -> Result<f64, (usize, f64)> {
        self.walk_with(&self.c, q, want_margin)
    }

    /// [`TreeOperator::walk`] with the diagonal block replaced by `c`.
    pub fn walk_with(&self, c: &CMatrix, q: usize, want_margin: bool) -> Result<f64, (usize, f64)> {
        let mut margin = f64::INFINITY;
        let mut s = self.initial(c);
        for j in 0..=q {
            match &s {
                Block::Diag(v) => {
                    let m = v.iter().copied().fold(f64::INFINITY, f64::min);
                    if !(m > 0.0) {
                        return Err((j, m));
                    }
                    margin = margin.min(m);
                }
                Block::Dense(m) => {
                    if cholesky(m).is_none() {
                        return Err((j, eigvalsh(m)[0]));
                    }
                    if want_margin {
                        margin = margin.min(eigvalsh(m)[0]);
                    }
                }
            }
            if j < q {
                s = self.step(c, &s);
            }
        }
        Ok(if want_margin { margin } else { f64::NAN })
    }

    /// The sequence of Schur complements itself, as dense matrices.
    pub fn complements(&self, q: usize) -> Vec<CMatrix> {
        let mut out = Vec::with_capacity(q + 1);
        let mut s = self.initial(&self.c);
        for j in 0..=q {
            out.push(to_dense(&s));
            if j < q {
                s = self.step(&self.c, &s);
            }
        }
        out
    }

    fn initial(&self, c: &CMatrix) -> Block {
        if self.sparse && Self::is_diag(c) {
            Block::Diag((0..self.dim()).map(|i| c[(i, i)].re).collect())
        } else {
            Block::Dense(c.clone())
        }
    }

    /// `C − Σ_i E_i S^{-1} E_i^*`, assuming `S` is positive definite.
    pub fn step_dense(&self, s: &CMatrix) -> CMatrix {
        to_dense(&self.step(&self.c, &Block::Dense(s.clone())))
    }

    fn step(&self, c: &CMatrix, s: &Block) -> Block {
        let d = self.dim();
        match s {
            Block::Diag(v) => {
                let inv: Vec<f64> = v.iter().map(|x| 1.0 / x).collect();
                let mut acc = c.clone();
                for e in &self.edges {
                    for (col, entries) in e.cols.iter().enumerate() {
                        let w = inv[col];
                        for &(a, za) in entries {
                            for &(b, zb) in entries {
                                acc[(a, b)] -= za * zb.conj() * w;
                            }
                        }
                    }
                }
                let diag = (0..d).all(|i| (0..d).all(|j| i == j || acc[(i, j)] == ZERO));
                if diag && self.sparse {
                    Block::Diag((0..d).map(|i| acc[(i, i)].re).collect())
                } else {
                    Block::Dense(acc)
                }
            }
            Block::Dense(m) => {
                let l = cholesky(m).expect("step called on a positive definite block");
                let mut acc = c.clone();
                for e in &self.edges {
                    if e.nnz == 0 {
                        continue;
                    }
                    // E S^{-1} E^* = X^* X with X = L^{-1} E^*.
                    let x = solve_lower(&l, &e.dense.adjoint());
                    acc = acc.sub(&x.adj_mul(&x));
                }
                Block::Dense(acc.hermitian_part())
            }
        }
    }
}

fn to_dense(s: &Block) -> CMatrix {
    match s {
        Block::Diag(v) => CMatrix::diag_real(v),
        Block::Dense(m) => m.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::build_shifts;
    use crate::matrix::{gaussian_matrix, kron, rng_from_seed};

    /// Dense assembly of the same operator on `P_q ⊗ H`.
    fn assemble(op: &TreeOperator, n: usize, q: usize) -> CMatrix {
        let f = build_shifts(n, q).unwrap();
        let dim = f.basis.len();
        let mut m = kron(&CMatrix::identity(dim), &op.c);
        for (i, e) in op.edges.iter().enumerate() {
            let ri_adj = f.r[i].adjoint();
            let blk = kron(&ri_adj, &e.dense);
            m = m.add(&blk).add(&blk.adjoint());
        }
        m
    }

    #[test]
    fn recursion_matches_dense_positivity() {
        let mut rng = rng_from_seed(31);
        for trial in 0..40 {
            let n = 1 + trial % 3;
            let d = 1 + trial % 4;
            let q = 1 + trial % 3;
            let edges: Vec<CMatrix> = (0..n).map(|_| gaussian_matrix(&mut rng, d, d)).collect();
            let shift = 0.5 + 3.0 * (trial as f64 / 40.0);
            let c = CMatrix::scalar(d, C64::new(shift, 0.0));
            let op = TreeOperator::new(c, edges);
            let dense = assemble(&op, n, q);
            let lmin = eigvalsh(&dense)[0];
            let tree = op.walk(q, true);
            if lmin > 1e-9 {
                assert!(tree.is_ok(), "trial {trial}: dense min {lmin}");
            } else if lmin < -1e-9 {
                assert!(tree.is_err(), "trial {trial}: dense min {lmin}");
            }
        }
    }

    #[test]
    fn sparse_route_matches_dense_route() {
        let f = build_shifts(2, 4).unwrap();
        let edges: Vec<CMatrix> = f.s.iter().map(|s| s.scale_real(-0.5)).collect();
        let d = f.basis.len();
        for lam in [0.3, 0.6, 0.8, 0.9] {
            let c = CMatrix::scalar(d, C64::new(lam, 0.0));
            let sparse = TreeOperator::new(c.clone(), edges.clone());
            assert!(sparse.sparse);
            let mut dense = sparse.clone();
            dense.sparse = false;
            let a = sparse.walk(4, true);
            let b = dense.walk(4, true);
            assert_eq!(a.is_ok(), b.is_ok());
            if let (Ok(x), Ok(y)) = (a, b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
