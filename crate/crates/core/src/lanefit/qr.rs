//! Householder QR with column pivoting for small dense least-squares systems.

/// Diagonal entries of `R` below this fraction of `|R_00|` count as zero.
pub const RANK_RCOND: f64 = 1e-10;

/// Pivoted factorisation `A P = Q R` of a tall `rows x cols` matrix, with
/// `Q^T b` accumulated alongside so `Q` itself is never formed.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    rows: usize,
    cols: usize,
    /// Row-major; upper triangle holds `R`.
    r: Vec<f64>,
    qtb: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    /// Factorises the row-major matrix `a` and applies the same reflections to `b`.
    pub fn new(mut a: Vec<f64>, rows: usize, cols: usize, mut b: Vec<f64>) -> Self {
        assert_eq!(a.len(), rows * cols);
        assert_eq!(b.len(), rows);
        let mut perm: Vec<usize> = (0..cols).collect();
        let steps = rows.min(cols);
        let at = |i: usize, j: usize| i * cols + j;

        for k in 0..steps {
            // Pivot on the largest remaining column norm.
            let norm_sq = |a: &[f64], j: usize| (k..rows).map(|i| a[at(i, j)] * a[at(i, j)]).sum::<f64>();
            let mut best = k;
            let mut best_norm = norm_sq(&a, k);
            for j in k + 1..cols {
                let n = norm_sq(&a, j);
                if n > best_norm {
                    best = j;
                    best_norm = n;
                }
            }
            if best != k {
                for i in 0..rows {
                    a.swap(at(i, k), at(i, best));
                }
                perm.swap(k, best);
            }

            let norm = best_norm.sqrt();
            if norm == 0.0 {
                continue;
            }
            let x0 = a[at(k, k)];
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            // v = x - alpha e_1, stored in place below the diagonal.
            let mut v: Vec<f64> = (k..rows).map(|i| a[at(i, k)]).collect();
            v[0] -= alpha;
            let v_norm_sq: f64 = v.iter().map(|x| x * x).sum();
            if v_norm_sq == 0.0 {
                continue;
            }
            for j in k..cols {
                let dot: f64 = (k..rows).map(|i| v[i - k] * a[at(i, j)]).sum();
                let f = 2.0 * dot / v_norm_sq;
                for i in k..rows {
                    a[at(i, j)] -= f * v[i - k];
                }
            }
            let dot: f64 = (k..rows).map(|i| v[i - k] * b[i]).sum();
            let f = 2.0 * dot / v_norm_sq;
            for i in k..rows {
                b[i] -= f * v[i - k];
            }
            for i in k + 1..rows {
                a[at(i, k)] = 0.0;
            }
        }

        let r00 = if steps > 0 { a[0].abs() } else { 0.0 };
        let rank = (0..steps).take_while(|&k| a[at(k, k)].abs() > RANK_RCOND * r00 && r00 > 0.0).count();
        Self { rows, cols, r: a, qtb: b, perm, rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.cols
    }

    pub fn r_diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|k| self.r[k * self.cols + k]).collect()
    }

    /// Least-squares solution `R^{-1} Q^T b` mapped back through the column
    /// permutation. Only meaningful when the factorisation is full rank.
    pub fn solve(&self) -> Vec<f64> {
        let n = self.cols;
        let mut z = vec![0.0; n];
        for k in (0..self.rank).rev() {
            let mut acc = self.qtb[k];
            for (j, zj) in z.iter().enumerate().take(self.rank).skip(k + 1) {
                acc -= self.r[k * n + j] * zj;
            }
            z[k] = acc / self.r[k * n + k];
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        x
    }

    /// Norm of the part of `b` orthogonal to the column space.
    pub fn residual_norm(&self) -> f64 {
        self.qtb[self.rank..].iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}
