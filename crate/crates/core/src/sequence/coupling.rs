use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric pair couplings `V_ml` with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    v: Vec<f64>,
}

impl CouplingMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, v: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidCouplings("empty matrix".into()));
        }
        let mut v = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidCouplings(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            v.extend_from_slice(row);
        }
        let m = Self { n, v };
        m.validate()?;
        Ok(m)
    }

    /// Builds the symmetric matrix from `f(m, l)` evaluated for `m < l`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn uniform(n: usize, value: f64) -> Self {
        Self::from_fn(n, |_, _| value)
    }

    fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            if self.get(i, i) != 0.0 {
                return Err(Error::InvalidCouplings(format!(
                    "diagonal entry {i} is nonzero; on-site terms belong in eps"
                )));
            }
            for j in 0..self.n {
                let (a, b) = (self.get(i, j), self.get(j, i));
                if !a.is_finite() {
                    return Err(Error::InvalidCouplings(format!("entry ({i},{j}) is not finite")));
                }
                if (a - b).abs() > SYMMETRY_TOL * (1.0 + a.abs()) {
                    return Err(Error::InvalidCouplings(format!("not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, m: usize, l: usize) -> f64 {
        self.v[m * self.n + l]
    }

    pub fn set(&mut self, m: usize, l: usize, value: f64) {
        self.v[m * self.n + l] = value;
        self.v[l * self.n + m] = value;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.v.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, v: self.v.iter().map(|x| x * s).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.v.iter().all(|x| *x == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Nonzero couplings `(m, l, V_ml)` with `m < l`, row by row.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |m| {
            (m + 1..self.n).filter_map(move |l| {
                let x = self.get(m, l);
                (x != 0.0).then_some((m, l, x))
            })
        })
    }

    /// Largest chain distance `|m − l|` carrying a nonzero coupling.
    pub fn range(&self) -> usize {
        self.pairs().map(|(m, l, _)| l - m).max().unwrap_or(0)
    }
}
