//! Small dense symmetric linear algebra for the Newton solves.

/// Dense symmetric matrix stored row-major in full.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

/// Columns that are linear combinations of earlier-pivoted columns.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDeficient {
    pub rank: usize,
    pub dependent: Vec<usize>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![0.0; n * n] }
    }

    /// Builds from the packed upper triangle (row-major, `i <= j`).
    pub fn from_upper(n: usize, packed: &[f64]) -> Self {
        assert_eq!(packed.len(), n * (n + 1) / 2);
        let mut m = SymMatrix::zeros(n);
        let mut idx = 0;
        for i in 0..n {
            for j in i..n {
                m.data[i * n + j] = packed[idx];
                m.data[j * n + i] = packed[idx];
                idx += 1;
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "matrix must be square");
            data.extend_from_slice(r);
        }
        SymMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Symmetric-pivoted Cholesky factorization of the unit-diagonal
    /// rescaling `D^-1/2 A D^-1/2`.
    ///
    /// A pivot is rejected once the largest remaining Schur-complement
    /// diagonal falls to `rel_tol` or below; since the rescaled matrix has a
    /// unit diagonal this threshold is relative and scale-free.
    pub fn pivoted_cholesky(&self, rel_tol: f64) -> Result<Cholesky, RankDeficient> {
        let n = self.n;
        let mut scale = vec![0.0; n];
        let mut zero_cols = Vec::new();
        for (i, s) in scale.iter_mut().enumerate() {
            let d = self.get(i, i);
            if d > 0.0 && d.is_finite() {
                *s = 1.0 / d.sqrt();
            } else {
                zero_cols.push(i);
            }
        }
        if !zero_cols.is_empty() {
            return Err(RankDeficient { rank: n - zero_cols.len(), dependent: zero_cols });
        }

        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                w[i * n + j] = self.get(i, j) * scale[i] * scale[j];
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut l = vec![0.0; n * n];

        for k in 0..n {
            let (p, dmax) = (k..n)
                .map(|j| (j, w[j * n + j]))
                .fold((k, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(dmax > rel_tol) {
                let mut dependent: Vec<usize> = perm[k..].to_vec();
                dependent.sort_unstable();
                return Err(RankDeficient { rank: k, dependent });
            }
            if p != k {
                perm.swap(k, p);
                for c in 0..n {
                    w.swap(k * n + c, p * n + c);
                }
                for r in 0..n {
                    w.swap(r * n + k, r * n + p);
                }
                for c in 0..k {
                    l.swap(k * n + c, p * n + c);
                }
            }
            let lkk = dmax.sqrt();
            l[k * n + k] = lkk;
            for i in k + 1..n {
                l[i * n + k] = w[i * n + k] / lkk;
            }
            for i in k + 1..n {
                let lik = l[i * n + k];
                for j in k + 1..=i {
                    let v = w[i * n + j] - lik * l[j * n + k];
                    w[i * n + j] = v;
                    w[j * n + i] = v;
                }
            }
        }
        Ok(Cholesky { n, l, perm, scale })
    }
}

/// Full-rank factorization `P^T D^-1/2 A D^-1/2 P = L L^T`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
    perm: Vec<usize>,
    scale: Vec<f64>,
}

impl Cholesky {
    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p] * self.scale[p]).collect();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i] * self.scale[p];
        }
        x
    }

    /// `A^-1`, symmetric by construction.
    pub fn inverse(&self) -> SymMatrix {
        let n = self.n;
        // M = L^-1 (lower triangular), then B^-1 = M^T M in pivoted order.
        let mut m = vec![0.0; n * n];
        for c in 0..n {
            for i in c..n {
                let mut s = if i == c { 1.0 } else { 0.0 };
                for k in c..i {
                    s -= self.l[i * n + k] * m[k * n + c];
                }
                m[i * n + c] = s / self.l[i * n + i];
            }
        }
        let mut out = SymMatrix::zeros(n);
        for a in 0..n {
            for b in a..n {
                let s: f64 = (b..n).map(|k| m[k * n + a] * m[k * n + b]).sum();
                let (pa, pb) = (self.perm[a], self.perm[b]);
                let v = s * self.scale[pa] * self.scale[pb];
                out.data[pa * n + pb] = v;
                out.data[pb * n + pa] = v;
            }
        }
        out
    }
}
