use crate::collocation::CollocationMatrix;

/// How products with `A = D^-1 X^T X` are formed inside the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorMode {
    /// Precomputed dense `A`; `p^2` multiplications per product.
    Gram,
    /// Two passes over `X`; `2mp + p` multiplications per product.
    MatrixFree,
}

impl OperatorMode {
    /// Dense when `2 p^2 <= 4 m p`.
    pub fn auto(m: usize, p: usize) -> Self {
        if p <= 2 * m {
            OperatorMode::Gram
        } else {
            OperatorMode::MatrixFree
        }
    }
}

/// `A` restricted to the active columns, with multiplication counting.
pub struct NormalOperator {
    m: usize,
    p: usize,
    x: Vec<f64>,
    dinv: Vec<f64>,
    a: Vec<f64>,
    mode: OperatorMode,
}

impl NormalOperator {
    pub fn new(matrix: &CollocationMatrix, mode: OperatorMode) -> Self {
        let act = matrix.active();
        let (m, p) = (matrix.m(), act.len());
        let mut x = Vec::with_capacity(m * p);
        for j in 0..m {
            for &k in act {
                x.push(matrix.x_at(j, k));
            }
        }
        let dinv: Vec<f64> = act.iter().map(|&k| 1.0 / matrix.d()[k]).collect();
        // A[i][l] = sum_j X[j][i] X[j][l] / D[i]
        let mut a = vec![0.0; p * p];
        for row in x.chunks(p.max(1)) {
            for i in 0..p {
                let xi = row[i];
                if xi == 0.0 {
                    continue;
                }
                let dst = &mut a[i * p..(i + 1) * p];
                for (d, &xl) in dst.iter_mut().zip(row) {
                    *d += xi * xl;
                }
            }
        }
        for i in 0..p {
            for v in &mut a[i * p..(i + 1) * p] {
                *v *= dinv[i];
            }
        }
        NormalOperator {
            m,
            p,
            x,
            dinv,
            a,
            mode,
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn mode(&self) -> OperatorMode {
        self.mode
    }

    /// Dense row-major `A`.
    pub fn dense(&self) -> &[f64] {
        &self.a
    }

    pub fn entry(&self, i: usize, l: usize) -> f64 {
        self.a[i * self.p + l]
    }

    /// `out = A c`
    pub fn apply(&self, c: &[f64], out: &mut [f64], mults: &mut u64) {
        let (m, p) = (self.m, self.p);
        match self.mode {
            OperatorMode::Gram => {
                for (o, row) in out.iter_mut().zip(self.a.chunks(p)) {
                    *o = row.iter().zip(c).map(|(a, b)| a * b).sum();
                }
                *mults += (p * p) as u64;
            }
            OperatorMode::MatrixFree => {
                out.iter_mut().for_each(|v| *v = 0.0);
                for row in self.x.chunks(p) {
                    let t: f64 = row.iter().zip(c).map(|(a, b)| a * b).sum();
                    for (o, xv) in out.iter_mut().zip(row) {
                        *o += xv * t;
                    }
                }
                for (o, di) in out.iter_mut().zip(&self.dinv) {
                    *o *= di;
                }
                *mults += (2 * m * p + p) as u64;
            }
        }
    }

    /// `out = A^T y`
    pub fn apply_t(&self, y: &[f64], out: &mut [f64], mults: &mut u64) {
        let (m, p) = (self.m, self.p);
        out.iter_mut().for_each(|v| *v = 0.0);
        match self.mode {
            OperatorMode::Gram => {
                for (row, &yi) in self.a.chunks(p).zip(y) {
                    if yi != 0.0 {
                        for (o, a) in out.iter_mut().zip(row) {
                            *o += a * yi;
                        }
                    }
                }
                *mults += (p * p) as u64;
            }
            OperatorMode::MatrixFree => {
                let z: Vec<f64> = y.iter().zip(&self.dinv).map(|(a, b)| a * b).collect();
                for row in self.x.chunks(p) {
                    let t: f64 = row.iter().zip(&z).map(|(a, b)| a * b).sum();
                    for (o, xv) in out.iter_mut().zip(row) {
                        *o += xv * t;
                    }
                }
                *mults += (2 * m * p + p) as u64;
            }
        }
    }

    /// Power iteration on `A^T A` from a fixed start.
    pub fn norm_estimate(&self, iters: usize) -> f64 {
        let p = self.p;
        if p == 0 {
            return 0.0;
        }
        let mut v: Vec<f64> = (0..p)
            .map(|j| 1.0 + ((j * 7919 + 13) % 101) as f64 / 101.0)
            .collect();
        let mut av = vec![0.0; p];
        let mut w = vec![0.0; p];
        let mut est = 0.0;
        let mut scratch = 0;
        for _ in 0..iters {
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nv == 0.0 {
                return 0.0;
            }
            v.iter_mut().for_each(|x| *x /= nv);
            self.apply(&v, &mut av, &mut scratch);
            self.apply_t(&av, &mut w, &mut scratch);
            est = av.iter().map(|x| x * x).sum::<f64>().sqrt();
            std::mem::swap(&mut v, &mut w);
        }
        est
    }
}
