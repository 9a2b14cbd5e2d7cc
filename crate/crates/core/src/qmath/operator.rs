use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{input_err, Result};

/// Dense complex matrix stored row-major.
///
/// Both dimensions are powers of two: square operators act on a qubit
/// register, rectangular ones map between registers of different size
/// (e.g. the 2×8 majority-rule contractions).
#[derive(Clone, PartialEq)]
pub struct Operator {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Number of qubits `n` with `dim == 2^n`, if `dim` is a power of two.
pub fn qubit_count(dim: usize) -> Option<usize> {
    if dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}

impl Operator {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if !rows.is_power_of_two() || !cols.is_power_of_two() {
            return input_err(format!("operator shape {rows}x{cols} is not a power of two"));
        }
        if data.len() != rows * cols {
            return input_err(format!(
                "operator shape {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            ));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return input_err("operator entries must be finite");
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub(crate) fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        debug_assert!(rows.is_power_of_two() && cols.is_power_of_two());
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        debug_assert!(rows.is_power_of_two() && cols.is_power_of_two());
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Diagonal matrix with real entries.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        if !n.is_power_of_two() {
            return input_err(format!("diagonal length {n} is not a power of two"));
        }
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Ok(m)
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        if !a.len().is_power_of_two() || !b.len().is_power_of_two() {
            return input_err("outer product factors must have power-of-two length");
        }
        Ok(Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square operator.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    /// Qubit count of a square operator.
    pub fn num_qubits(&self) -> usize {
        self.rows.trailing_zeros() as usize
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Matrix product; panics on a shape mismatch, which is always a bug
    /// in the caller rather than bad user input.
    pub fn matmul(&self, other: &Operator) -> Operator {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Operator::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `A · X · A†`.
    pub fn conjugate(&self, x: &Operator) -> Operator {
        self.matmul(x).matmul(&self.adjoint())
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "apply shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Operator, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.max_abs_diff(other) <= tol
    }

    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square()
            && self
                .adjoint()
                .matmul(self)
                .approx_eq(&Operator::identity(self.rows), tol)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Operator {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        self.matmul(rhs)
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Operator {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Operator {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product: `kron(a,b)[(i·rb+k),(j·cb+l)] = a[i,j]·b[k,l]`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = Operator::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, leftmost factor most significant.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a Operator>) -> Operator {
    factors.into_iter().fold(Operator::identity(1), |acc, f| kron(&acc, f))
}

/// Value of qubit `q` (0 = most significant) in the basis label `index`.
#[inline]
pub(crate) fn bit(index: usize, q: usize, n: usize) -> usize {
    (index >> (n - 1 - q)) & 1
}

pub(crate) fn validate_targets(targets: &[usize], n: usize) -> Result<()> {
    for (pos, &t) in targets.iter().enumerate() {
        if t >= n {
            return input_err(format!("qubit index {t} out of range for {n} qubits"));
        }
        if targets[..pos].contains(&t) {
            return input_err(format!("duplicate qubit index {t}"));
        }
    }
    Ok(())
}

/// Lifts a k-qubit operator onto `n_total` qubits, acting on `targets` (in
/// the listed order) and as the identity elsewhere.
pub fn embed(op: &Operator, n_total: usize, targets: &[usize]) -> Result<Operator> {
    if !op.is_square() {
        return input_err("embed requires a square operator");
    }
    let k = op.num_qubits();
    if targets.len() != k {
        return input_err(format!(
            "operator acts on {k} qubits but {} targets were given",
            targets.len()
        ));
    }
    validate_targets(targets, n_total)?;
    let dim = 1usize << n_total;
    let masks: Vec<usize> = targets.iter().map(|&t| 1 << (n_total - 1 - t)).collect();
    let target_mask: usize = masks.iter().sum();
    let mut out = Operator::zeros(dim, dim);
    for col in 0..dim {
        let sub_col = masks.iter().fold(0, |acc, &m| (acc << 1) | usize::from(col & m != 0));
        let rest = col & !target_mask;
        for sub_row in 0..op.rows {
            let amp = op[(sub_row, sub_col)];
            if amp.re == 0.0 && amp.im == 0.0 {
                continue;
            }
            let row = masks.iter().enumerate().fold(rest, |acc, (pos, &m)| {
                if (sub_row >> (k - 1 - pos)) & 1 == 1 {
                    acc | m
                } else {
                    acc
                }
            });
            out[(row, col)] += amp;
        }
    }
    Ok(out)
}

/// Traces out every qubit not listed in `keep`; the result's qubits follow
/// the order of `keep`.
pub fn partial_trace_op(op: &Operator, keep: &[usize]) -> Result<Operator> {
    if !op.is_square() {
        return input_err("partial trace requires a square operator");
    }
    if keep.is_empty() {
        return input_err("partial trace needs at least one kept qubit");
    }
    let n = op.num_qubits();
    validate_targets(keep, n)?;
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let compose = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &q) in keep.iter().enumerate() {
            idx |= ((kept_bits >> (keep.len() - 1 - pos)) & 1) << (n - 1 - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            idx |= ((traced_bits >> (traced.len() - 1 - pos)) & 1) << (n - 1 - q);
        }
        idx
    };
    let d_keep = 1usize << keep.len();
    let d_traced = 1usize << traced.len();
    Ok(Operator::from_fn(d_keep, d_keep, |r, c| {
        (0..d_traced).map(|t| op[(compose(r, t), compose(c, t))]).sum()
    }))
}

/// Transposes the row/column indices of the listed qubits only.
pub fn partial_transpose(op: &Operator, subsystem: &[usize]) -> Result<Operator> {
    if !op.is_square() {
        return input_err("partial transpose requires a square operator");
    }
    let n = op.num_qubits();
    validate_targets(subsystem, n)?;
    let mask: usize = subsystem.iter().map(|&q| 1 << (n - 1 - q)).sum();
    Ok(Operator::from_fn(op.rows, op.cols, |i, j| {
        let src_i = (i & !mask) | (j & mask);
        let src_j = (j & !mask) | (i & mask);
        op[(src_i, src_j)]
    }))
}

/// Permutation operator regrouping qubits: output qubit `k` carries input
/// qubit `order[k]`.
pub fn permute_qubits(n: usize, order: &[usize]) -> Result<Operator> {
    if order.len() != n {
        return input_err(format!("qubit order has {} entries for {n} qubits", order.len()));
    }
    validate_targets(order, n)?;
    let dim = 1usize << n;
    let mut out = Operator::zeros(dim, dim);
    for src in 0..dim {
        let dst = order.iter().fold(0usize, |acc, &q| (acc << 1) | bit(src, q, n));
        out[(dst, src)] = Complex64::new(1.0, 0.0);
    }
    Ok(out)
}
