use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, C64, ZERO};
use crate::words::{FockBasis, Word};

/// An ordered `n`-tuple of `d × d` complex matrices on a common space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorTuple {
    mats: Vec<CMatrix>,
    d: usize,
}

impl OperatorTuple {
    pub fn new(mats: Vec<CMatrix>) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::InvalidInput("tuple needs at least one operator".into()));
        }
        let d = mats[0].rows();
        for (i, m) in mats.iter().enumerate() {
            if m.rows() != d || m.cols() != d {
                return Err(Error::Shape(format!(
                    "operator {} is {}x{}, expected {d}x{d}",
                    i + 1,
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(OperatorTuple { mats, d })
    }

    pub fn zero(n: usize, d: usize) -> Self {
        OperatorTuple { mats: vec![CMatrix::zeros(d, d); n], d }
    }

    /// `T_i = λ_i I`.
    pub fn scalars(lambda: &[C64], d: usize) -> Self {
        OperatorTuple { mats: lambda.iter().map(|&z| CMatrix::scalar(d, z)).collect(), d }
    }

    pub fn n(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn mats(&self) -> &[CMatrix] {
        &self.mats
    }

    pub fn get(&self, i: usize) -> &CMatrix {
        &self.mats[i]
    }

    pub fn scaled(&self, s: C64) -> Self {
        OperatorTuple { mats: self.mats.iter().map(|m| m.scale(s)).collect(), d: self.d }
    }

    pub fn scaled_real(&self, s: f64) -> Self {
        self.scaled(C64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        OperatorTuple { mats: self.mats.iter().map(|m| m.adjoint()).collect(), d: self.d }
    }

    /// `(U^* T_i U)`.
    pub fn conjugated(&self, u: &CMatrix) -> Self {
        OperatorTuple { mats: self.mats.iter().map(|m| u.adj_mul(&m.matmul(u))).collect(), d: self.d }
    }

    pub fn is_finite(&self) -> bool {
        self.mats.iter().all(|m| m.is_finite())
    }

    /// `Σ λ_i T_i`.
    pub fn combination(&self, lambda: &[C64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.d, self.d);
        for (m, &l) in self.mats.iter().zip(lambda) {
            out.axpy(l, m);
        }
        out
    }

    /// `T_α = T_{i1} ⋯ T_{ik}`; the empty word gives the identity.
    pub fn product(&self, w: &Word) -> CMatrix {
        let mut out = CMatrix::identity(self.d);
        for &l in w.letters() {
            out = out.matmul(&self.mats[l as usize - 1]);
        }
        out
    }

    /// The `n^k`-tuple `(T_α : |α| = k)` in graded lexicographic order.
    pub fn products(&self, k: usize) -> Self {
        let mut level = vec![CMatrix::identity(self.d)];
        for _ in 0..k {
            let mut next = Vec::with_capacity(level.len() * self.n());
            for p in &level {
                for t in &self.mats {
                    next.push(p.matmul(t));
                }
            }
            level = next;
        }
        OperatorTuple { mats: level, d: self.d }
    }

    /// `Σ_i T_i T_i^*`.
    pub fn row_gram(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.d, self.d);
        for m in &self.mats {
            out = out.add(&m.mul_adj(m));
        }
        out
    }

    /// `Σ_i T_i X T_i^*`.
    pub fn apply_completely_positive(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.d, self.d);
        for m in &self.mats {
            out = out.add(&m.matmul(x).mul_adj(m));
        }
        out
    }

    /// `Q_k = Σ_{|α|=k} T_α T_α^*`.
    pub fn q_k(&self, k: usize) -> CMatrix {
        let mut q = CMatrix::identity(self.d);
        for _ in 0..k {
            q = self.apply_completely_positive(&q);
        }
        q
    }

    /// `p(T) = Σ_α a_α T_α`.
    pub fn eval_poly(&self, poly: &[(Word, C64)]) -> CMatrix {
        let mut out = CMatrix::zeros(self.d, self.d);
        for (w, a) in poly {
            if *a != ZERO {
                out.axpy(*a, &self.product(w));
            }
        }
        out
    }

    /// Content hash of the canonical JSON form.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(&crate::io::TupleFile::from_tuple(self, None, None))
            .expect("tuple serializes");
        let h = Sha256::digest(&bytes);
        h.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// All words of length at most `deg`, in graded order.
pub fn poly_words_up_to(n: usize, deg: usize) -> Vec<Word> {
    FockBasis::enumerate(n, deg).map(|b| b.words().to_vec()).unwrap_or_default()
}
