use nalgebra::{DMatrix, DVector};

/// Dense symmetric rank-3 array of shape n x n x n.
///
/// Writes go through `set_sym`, which fills every index permutation, so the
/// stored data is symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor3 {
    n: usize,
    data: Vec<f64>,
}

impl SymTensor3 {
    pub fn zeros(n: usize) -> Self {
        SymTensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(i, j, k)]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, k: usize, v: f64) {
        for (a, b, c) in [
            (i, j, k),
            (i, k, j),
            (j, i, k),
            (j, k, i),
            (k, i, j),
            (k, j, i),
        ] {
            let at = self.idx(a, b, c);
            self.data[at] = v;
        }
    }

    /// Contraction T[u, v, .] as a vector.
    pub fn apply2(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let mut out = DVector::zeros(n);
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += self.get(i, j, k) * u[i] * v[j];
                }
            }
            out[k] = s;
        }
        out
    }

    /// Full contraction T[u, v, w].
    pub fn apply3(&self, u: &DVector<f64>, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        self.apply2(u, v).dot(w)
    }

    /// Contraction T[., ., w] as a matrix.
    pub fn contract_last(&self, w: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += self.get(i, j, k) * w[k];
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    /// Pullback under a constant linear map: T'(e_a, e_b, e_c) = T(M e_a, M e_b, M e_c).
    pub fn pullback(&self, m: &DMatrix<f64>) -> SymTensor3 {
        let n = m.ncols();
        let mut out = SymTensor3::zeros(n);
        let cols: Vec<DVector<f64>> = (0..n).map(|c| m.column(c).into_owned()).collect();
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    let v = self.apply3(&cols[a], &cols[b], &cols[c]);
                    out.set_sym(a, b, c, v);
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn symmetric_writes_fill_all_permutations() {
        let mut t = SymTensor3::zeros(3);
        t.set_sym(0, 1, 2, 5.0);
        assert_eq!(t.get(2, 0, 1), 5.0);
        assert_eq!(t.get(1, 2, 0), 5.0);
    }

    #[test]
    fn contraction_matches_direct_sum() {
        let mut t = SymTensor3::zeros(2);
        t.set_sym(0, 0, 0, 1.0);
        t.set_sym(0, 0, 1, 2.0);
        t.set_sym(0, 1, 1, 3.0);
        t.set_sym(1, 1, 1, 4.0);
        let u = dvector![1.0, 2.0];
        // T[u,u,u] = u0^3 T000 + 3 u0^2 u1 T001 + 3 u0 u1^2 T011 + u1^3 T111
        let want = 1.0 + 3.0 * 2.0 * 2.0 + 3.0 * 4.0 * 3.0 + 8.0 * 4.0;
        assert!((t.apply3(&u, &u, &u) - want).abs() < 1e-12);
    }
}
