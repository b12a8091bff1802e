//! Symmetric tridiagonal matrices and their LDLᵀ factorisation.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix given by its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::invalid(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    /// Constant-coefficient matrix of order n.
    pub fn constant(n: usize, diag: f64, off: f64) -> Self {
        Self {
            diag: vec![diag; n],
            off: vec![off; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// a·self + b·other.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        Self {
            diag: self.diag.iter().zip(&other.diag).map(|(x, y)| a * x + b * y).collect(),
            off: self.off.iter().zip(&other.off).map(|(x, y)| a * x + b * y).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    /// xᵀ A x.
    #[allow(clippy::needless_range_loop)]
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.len() {
            s += self.diag[i] * x[i] * x[i];
        }
        for i in 0..self.off.len() {
            s += 2.0 * self.off[i] * x[i] * x[i + 1];
        }
        s
    }

    pub fn factor(&self) -> Result<LdlFactor> {
        LdlFactor::new(self)
    }
}

/// A = L D Lᵀ with unit lower bidiagonal L.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl LdlFactor {
    pub fn new(a: &SymTridiag) -> Result<Self> {
        let n = a.len();
        let scale = a.diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        d[0] = a.diag[0];
        for i in 1..n {
            if !(d[i - 1].abs() > 1e-14 * scale) {
                return Err(Error::Singular(format!("zero pivot at row {}", i - 1)));
            }
            l[i - 1] = a.off[i - 1] / d[i - 1];
            d[i] = a.diag[i] - l[i - 1] * a.off[i - 1];
        }
        if !(d[n - 1].abs() > 1e-14 * scale) {
            return Err(Error::Singular(format!("zero pivot at row {}", n - 1)));
        }
        Ok(Self { d, l })
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Overwrites `b` with A⁻¹ b.
    #[allow(clippy::needless_range_loop)]
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 1..n {
            b[i] -= self.l[i - 1] * b[i - 1];
        }
        for i in 0..n {
            b[i] /= self.d[i];
        }
        for i in (0..n - 1).rev() {
            b[i] -= self.l[i] * b[i + 1];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Subdiagonal of L.
    pub fn lower(&self) -> &[f64] {
        &self.l
    }

    /// Pivots of D; all positive iff A is positive definite.
    pub fn pivots(&self) -> &[f64] {
        &self.d
    }
}
