// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Dense linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Inverse by LU with partial pivoting.
pub fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone().lu().try_inverse().ok_or(Error::Singular)
}

/// Solve `m x = b`.
pub fn solve(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    m.clone().lu().solve(b).ok_or(Error::Singular)
}

/// Solve the row system `x m = b`.
pub fn solve_row(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    m.transpose().lu().solve(b).ok_or(Error::Singular)
}

/// `1 - c m` for a square matrix.
pub fn identity_minus(m: &DMatrix<f64>, c: f64) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::identity(n, n) - m * c
}

/// Integer power by repeated squaring. Tiny negative round-off is clipped.
pub fn matrix_power(m: &DMatrix<f64>, t: u64) -> DMatrix<f64> {
    power_with(m, t, clip_negatives)
}

/// Integer power of a row-stochastic matrix with a drift guard: negatives
/// above -1e-14 are clipped to zero and rows are renormalized whenever a row
/// sum drifts from 1 by more than 1e-13.
pub fn stochastic_power(m: &DMatrix<f64>, t: u64) -> DMatrix<f64> {
    power_with(m, t, stochastic_guard)
}

fn power_with(m: &DMatrix<f64>, mut t: u64, guard: fn(&mut DMatrix<f64>)) -> DMatrix<f64> {
    let n = m.nrows();
    let mut acc = DMatrix::identity(n, n);
    let mut base = m.clone();
    while t > 0 {
        if t & 1 == 1 {
            acc = &acc * &base;
            guard(&mut acc);
        }
        t >>= 1;
        if t > 0 {
            base = &base * &base;
            guard(&mut base);
        }
    }
    acc
}

fn clip_negatives(m: &mut DMatrix<f64>) {
    for x in m.iter_mut() {
        if *x < 0.0 && *x >= -1e-14 {
            *x = 0.0;
        }
    }
}

pub fn stochastic_guard(m: &mut DMatrix<f64>) {
    clip_negatives(m);
    for mut row in m.row_iter_mut() {
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-13 && s > 0.0 {
            row /= s;
        }
    }
}

/// Spectral radius of an entrywise non-negative matrix by power iteration.
///
/// Iterates on `1 + m` from a positive vector and stops once the
/// Collatz-Wielandt bounds `min_i y_i / x_i <= rho <= max_i y_i / x_i` are
/// within `tol`; the shift removes peripheral eigenvalues so periodic
/// structures do not oscillate.
pub fn spectral_radius_nonneg(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut x = DVector::from_element(n, 1.0);
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    for _ in 0..max_iter {
        let y = m * &x + &x;
        let (mut a, mut b) = (f64::INFINITY, 0.0f64);
        for (yi, xi) in y.iter().zip(x.iter()) {
            let r = yi / xi;
            a = a.min(r);
            b = b.max(r);
        }
        lo = a;
        hi = b;
        x = &y / y.amax();
        if hi - lo < tol {
            break;
        }
    }
    0.5 * (lo + hi) - 1.0
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}
