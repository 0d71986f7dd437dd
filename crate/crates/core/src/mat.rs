//! Minimal column-major dense matrix support: the solver only needs
//! matrix-vector products, and the simulation harness needs a symmetric
//! eigendecomposition for correlation square roots.

#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    n_rows: usize,
    n_cols: usize,
    // column-major
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Mat {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_column_major(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n_rows * n_cols);
        Mat {
            n_rows,
            n_cols,
            data,
        }
    }

    /// Rows given as slices, e.g. parsed CSV lines.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = if n_rows == 0 { 0 } else { rows[0].len() };
        let mut m = Mat::zeros(n_rows, n_cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n_cols, "ragged rows");
            for (j, &x) in r.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n_rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.n_rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        y.fill(0.0);
        // two columns per pass halves the passes over y
        let mut j = 0;
        while j + 1 < self.n_cols {
            let (x0, x1) = (x[j], x[j + 1]);
            if x0 != 0.0 || x1 != 0.0 {
                let c0 = &self.data[j * self.n_rows..(j + 1) * self.n_rows];
                let c1 = &self.data[(j + 1) * self.n_rows..(j + 2) * self.n_rows];
                for ((yi, &a0), &a1) in y.iter_mut().zip(c0).zip(c1) {
                    *yi += a0 * x0 + a1 * x1;
                }
            }
            j += 2;
        }
        if j < self.n_cols {
            let xj = x[j];
            if xj != 0.0 {
                for (yi, &aij) in y.iter_mut().zip(self.col(j)) {
                    *yi += aij * xj;
                }
            }
        }
    }

    /// y = A^T x
    pub fn tr_mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_rows);
        assert_eq!(y.len(), self.n_cols);
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = dot(self.col(j), x);
        }
    }

    /// C = A B
    pub fn mul_mat(&self, other: &Mat) -> Mat {
        assert_eq!(self.n_cols, other.n_rows);
        let mut out = Mat::zeros(self.n_rows, other.n_cols);
        for j in 0..other.n_cols {
            let (bcol, ocol): (&[f64], &mut [f64]) = (other.col(j), out.col_mut(j));
            for (k, &bkj) in bcol.iter().enumerate() {
                if bkj != 0.0 {
                    let acol = self.col(k);
                    for (o, &aik) in ocol.iter_mut().zip(acol) {
                        *o += aik * bkj;
                    }
                }
            }
        }
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators break the summation dependency chain
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}

pub fn norm2_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvectors as columns), unsorted.
pub fn sym_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.n_rows();
    assert_eq!(n, a.n_cols(), "sym_eigen needs a square matrix");
    let mut m = a.clone();
    let mut v = Mat::identity(n);
    let tol = 1e-12
        * (0..n)
            .map(|i| m.get(i, i).abs())
            .fold(f64::MIN_POSITIVE, f64::max);
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m.get(p, q).abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= tol * 1e-3 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let eig = (0..n).map(|i| m.get(i, i)).collect();
    (eig, v)
}
