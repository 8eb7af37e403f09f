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

//! First passage under geometric resetting: the `S` matrix, mean first
//! passage times, the Kemeny constant, relaxation times and search
//! efficiency.
//!
//! With `A = 1 - qW` and `Pi = |phi_1><phibar_1|`,
//! `S = A^-1 - Pi/p = (A + Pi)^-1 - Pi/(1+p)`. The second form is what gets
//! factorized: `A + Pi` stays well conditioned as `p -> 0`, while `A` itself
//! becomes singular.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::TransitionMatrix;
use crate::linalg;
use crate::propagator::{rows_equal, spectral_decompose, PropagatorSeries, RelocationVector, SpectralData};

/// Stand-in for `p = 0`, where `1 - W` is singular.
pub const P_ZERO_PROXY: f64 = 1e-9;

/// Steady-state entries below this are treated as zero; the matching first
/// passage times are infinite.
const NESS_FLOOR: f64 = 1e-14;

fn check_p(p: f64) -> Result<()> {
    if p == 0.0 {
        return Err(Error::SingularLimit { proxy: P_ZERO_PROXY });
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("resetting probability {p} outside (0, 1]")));
    }
    Ok(())
}

/// `S(p) = (1 - qW)^-1 - Pi/p`; rows sum to zero.
pub fn s_matrix(w: &TransitionMatrix, p: f64) -> Result<DMatrix<f64>> {
    check_p(p)?;
    let pi = rows_equal(w.stationary(), w.n());
    let deflated = linalg::identity_minus(w.w(), 1.0 - p) + &pi;
    Ok(linalg::inverse(&deflated)? - pi / (1.0 + p))
}

/// Steady state `P_j(inf) = pi_j + p [R S]_j` from a precomputed `S`.
pub fn ness_from_s(w: &TransitionMatrix, rel: &RelocationVector, s: &DMatrix<f64>, p: f64) -> DVector<f64> {
    w.stationary() + s.transpose() * rel.vector() * p
}

/// Mean first passage times `<T_ij> = (delta_ij + S_jj - S_ij) / P_j(inf)`,
/// evaluated in matrix form `(1 + E S_dg - S) P_dg^-1`. Entries whose target
/// has no steady-state weight are `f64::INFINITY`.
pub fn mfpt_matrix(w: &TransitionMatrix, rel: &RelocationVector, p: f64) -> Result<DMatrix<f64>> {
    let s = s_matrix(w, p)?;
    Ok(mfpt_from_s(&s, &ness_from_s(w, rel, &s, p)))
}

fn mfpt_from_s(s: &DMatrix<f64>, ness: &DVector<f64>) -> DMatrix<f64> {
    let n = s.nrows();
    let ones = DMatrix::from_element(n, n, 1.0);
    let s_dg = DMatrix::from_diagonal(&s.diagonal());
    let inv_p = DMatrix::from_diagonal(&ness.map(|x| if x < NESS_FLOOR { 0.0 } else { 1.0 / x }));
    let mut t = (DMatrix::identity(n, n) + ones * s_dg - s) * inv_p;
    for j in 0..n {
        if ness[j] < NESS_FLOOR {
            t.column_mut(j).fill(f64::INFINITY);
        }
    }
    t
}

/// Kemeny constant and search efficiency `E = N / K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kemeny {
    pub kemeny: f64,
    pub efficiency: f64,
}

impl Kemeny {
    fn new(kemeny: f64, n: usize) -> Self {
        Kemeny { kemeny, efficiency: n as f64 / kemeny }
    }
}

/// `K(p) = tr S(p)`. At `p = 0` the spectral sum `sum_{m>=2} 1/(1 - lambda_m)`
/// is used instead.
pub fn kemeny(w: &TransitionMatrix, p: f64) -> Result<Kemeny> {
    if p == 0.0 {
        return Ok(kemeny_spectral(&spectral_decompose(w)?, 0.0));
    }
    Ok(Kemeny::new(s_matrix(w, p)?.trace(), w.n()))
}

/// `K(p) = sum_{m>=2} 1/(1 - q lambda_m)`.
pub fn kemeny_spectral(spec: &SpectralData, p: f64) -> Kemeny {
    let q = 1.0 - p;
    let k = spec.eigenvalues.iter().skip(1).map(|l| 1.0 / (1.0 - q * l)).sum();
    Kemeny::new(k, spec.n())
}

/// `dK/dp = -sum_{m>=2} lambda_m / (1 + (p-1) lambda_m)^2`.
pub fn kemeny_derivative(spec: &SpectralData, p: f64) -> f64 {
    -spec.eigenvalues.iter().skip(1).map(|l| l / (1.0 + (p - 1.0) * l).powi(2)).sum::<f64>()
}

/// `d^2K/dp^2 = 2 sum_{m>=2} lambda_m^2 / (1 + (p-1) lambda_m)^3 > 0`.
pub fn kemeny_second_derivative(spec: &SpectralData, p: f64) -> f64 {
    2.0 * spec.eigenvalues.iter().skip(1).map(|l| l * l / (1.0 + (p - 1.0) * l).powi(3)).sum::<f64>()
}

/// Minimizer of the convex `K(p)` on `(0, 1)`, if `K` initially decreases.
pub fn optimal_reset_rate(spec: &SpectralData) -> Option<f64> {
    if kemeny_derivative(spec, 0.0) >= 0.0 {
        return None;
    }
    // K'(1) = 1 > 0 brackets the root
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if kemeny_derivative(spec, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Per-node relaxation times and their mean.
#[derive(Clone, Debug, PartialEq)]
pub struct Relaxation {
    pub per_node: Vec<f64>,
    pub global: f64,
}

/// `T_i = [(1 - qW - pR)(1 - qW)^-2]_ii`, evaluated as `S_ii - p [R S^2]_i`.
pub fn mean_relaxation(w: &TransitionMatrix, rel: &RelocationVector, p: f64) -> Result<Relaxation> {
    let s = s_matrix(w, p)?;
    Ok(relaxation_from_s(&s, rel, p))
}

fn relaxation_from_s(s: &DMatrix<f64>, rel: &RelocationVector, p: f64) -> Relaxation {
    let rs2 = (s * s).transpose() * rel.vector();
    let per_node: Vec<f64> = (0..s.nrows()).map(|i| s[(i, i)] - p * rs2[i]).collect();
    let global = per_node.iter().sum::<f64>() / per_node.len() as f64;
    Relaxation { per_node, global }
}

/// Everything derived from one `S(p)`.
#[derive(Clone, Debug)]
pub struct FirstPassageReport {
    pub mfpt: DMatrix<f64>,
    pub ness: DVector<f64>,
    pub kemeny: f64,
    pub efficiency: f64,
    pub relaxation: Vec<f64>,
    pub global_relaxation: f64,
}

pub fn first_passage_report(w: &TransitionMatrix, rel: &RelocationVector, p: f64) -> Result<FirstPassageReport> {
    let s = s_matrix(w, p)?;
    let ness = ness_from_s(w, rel, &s, p);
    let k = Kemeny::new(s.trace(), w.n());
    let relax = relaxation_from_s(&s, rel, p);
    Ok(FirstPassageReport {
        mfpt: mfpt_from_s(&s, &ness),
        ness,
        kemeny: k.kemeny,
        efficiency: k.efficiency,
        relaxation: relax.per_node,
        global_relaxation: relax.global,
    })
}

/// First passage PDF `F_ib(1..=T)` of a Markovian walk by deconvolving
/// `P_ib(t) = sum_r F_ib(r) P_bb(t-r)`. Index 0 holds `F_ib(0) = 0`.
pub fn first_passage_pdf(series: &PropagatorSeries, i: usize, b: usize) -> Vec<f64> {
    let horizon = series.horizon();
    let mut f = vec![0.0; horizon + 1];
    for t in 1..=horizon {
        let mut acc = series.at(t)[(i, b)];
        for r in 1..t {
            acc -= f[r] * series.at(t - r)[(b, b)];
        }
        f[t] = acc;
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, transition_matrix, GraphModel};
    use crate::propagator::propagate;
    use crate::renewal::ResetLaw;

    fn complete(n: usize) -> TransitionMatrix {
        transition_matrix(&generate_graph(GraphModel::Complete { n }, 0).unwrap())
    }

    fn ws(n: usize, seed: u64) -> TransitionMatrix {
        transition_matrix(&generate_graph(GraphModel::WattsStrogatz { n, m: 2, rewire: 0.7 }, seed).unwrap())
    }

    fn naive_s(w: &TransitionMatrix, p: f64) -> DMatrix<f64> {
        let g = linalg::inverse(&linalg::identity_minus(w.w(), 1.0 - p)).unwrap();
        g - rows_equal(w.stationary(), w.n()) / p
    }

    #[test]
    fn s_rows_sum_to_zero() {
        let w = ws(40, 1);
        for p in [1e-9, 0.01, 0.5, 1.0] {
            let s = s_matrix(&w, p).unwrap();
            for row in s.row_iter() {
                assert!(row.sum().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn deflated_and_direct_forms_agree() {
        let w = ws(30, 2);
        for p in [0.05, 0.3, 1.0] {
            assert!(linalg::max_abs_diff(&s_matrix(&w, p).unwrap(), &naive_s(&w, p)) < 1e-10);
        }
    }

    #[test]
    fn s_at_full_reset() {
        let s = s_matrix(&complete(3), 1.0).unwrap();
        let expect = DMatrix::identity(3, 3) - DMatrix::from_element(3, 3, 1.0 / 3.0);
        assert!(linalg::max_abs_diff(&s, &expect) < 1e-14);
    }

    #[test]
    fn p_zero_is_singular_limit() {
        let w = complete(3);
        assert!(matches!(s_matrix(&w, 0.0), Err(Error::SingularLimit { proxy }) if proxy == 1e-9));
        assert!(s_matrix(&w, 1.5).is_err());
    }

    #[test]
    fn trace_matches_spectrum() {
        let w = ws(50, 3);
        let spec = spectral_decompose(&w).unwrap();
        for p in [1e-9, 0.1, 0.9] {
            let a = kemeny(&w, p).unwrap().kemeny;
            let b = kemeny_spectral(&spec, p).kemeny;
            assert!((a - b).abs() < 1e-10 * b.max(1.0));
        }
    }

    #[test]
    fn mfpt_matches_spectral_representation() {
        let w = ws(25, 4);
        let spec = spectral_decompose(&w).unwrap();
        let rel = RelocationVector::from_weights((0..25).map(|i| (i % 3) as f64).collect()).unwrap();
        let p = 0.07;
        let q = 1.0 - p;
        let coeff = DVector::from_fn(25, |m, _| if m == 0 { 0.0 } else { 1.0 / (1.0 - q * spec.eigenvalues[m]) });
        let s = spec.compose(&coeff);
        let ness = w.stationary() + s.transpose() * rel.vector() * p;
        let t = mfpt_matrix(&w, &rel, p).unwrap();
        for i in 0..25 {
            for j in 0..25 {
                let d = if i == j { 1.0 } else { 0.0 };
                let expect = (d + s[(j, j)] - s[(i, j)]) / ness[j];
                assert!((t[(i, j)] - expect).abs() < 1e-9 * expect);
            }
        }
    }

    #[test]
    fn mfpt_single_node_full_reset() {
        let w = ws(20, 5);
        let r = 6;
        let t = mfpt_matrix(&w, &RelocationVector::node(20, r).unwrap(), 1.0).unwrap();
        for i in 0..20 {
            assert!((t[(i, r)] - 1.0).abs() < 1e-12);
            for j in (0..20).filter(|&j| j != r) {
                assert!(t[(i, j)].is_infinite());
            }
        }
    }

    #[test]
    fn mfpt_on_triangle_without_resets() {
        let t = mfpt_matrix(&complete(3), &RelocationVector::uniform(3), P_ZERO_PROXY).unwrap();
        // absorbing chain: T = 1 + T/2 from the other non-target node
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 3.0 } else { 2.0 };
                assert!((t[(i, j)] - expect).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn kac_lemma() {
        let w = ws(30, 6);
        let rel = RelocationVector::from_weights((0..30).map(|i| 1.0 + (i % 4) as f64).collect()).unwrap();
        for p in [1e-9, 0.2, 0.8] {
            let rep = first_passage_report(&w, &rel, p).unwrap();
            for i in 0..30 {
                assert!((rep.mfpt[(i, i)] * rep.ness[i] - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn complete_graph_closed_forms() {
        for n in [3usize, 10, 40] {
            let w = complete(n);
            let nf = n as f64;
            for p in [0.0, 0.1, 0.5, 1.0] {
                let k = kemeny(&w, p).unwrap();
                assert!((k.kemeny - (nf - 1.0).powi(2) / (nf - p)).abs() < 1e-10);
                assert!((k.efficiency - nf * (nf - p) / (nf - 1.0).powi(2)).abs() < 1e-10);
            }
            let spec = spectral_decompose(&w).unwrap();
            assert!(optimal_reset_rate(&spec).is_none());
        }
        assert!((kemeny(&complete(3), 0.0).unwrap().kemeny - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn kemeny_ignores_relocation() {
        let w = ws(30, 7);
        let p = 0.3;
        let base = kemeny(&w, p).unwrap().kemeny;
        for seed in 0..5u64 {
            let rel = RelocationVector::from_weights((0..30).map(|i| ((i as u64 * 13 + seed * 7) % 11) as f64).collect()).unwrap();
            let relax = mean_relaxation(&w, &rel, p).unwrap();
            assert!((relax.global * 30.0 - base).abs() < 1e-10);
        }
    }

    #[test]
    fn relaxation_matches_direct_formula() {
        let w = ws(20, 8);
        let rel = RelocationVector::from_weights((0..20).map(|i| (i % 5) as f64).collect()).unwrap();
        let p = 0.25;
        let a = linalg::identity_minus(w.w(), 0.75);
        let g = linalg::inverse(&a).unwrap();
        let direct = (&a - rel.matrix() * p) * &g * &g;
        let relax = mean_relaxation(&w, &rel, p).unwrap();
        for i in 0..20 {
            assert!((relax.per_node[i] - direct[(i, i)]).abs() < 1e-10);
        }
        let t3 = mean_relaxation(&complete(3), &RelocationVector::uniform(3), 1.0).unwrap();
        assert!((t3.global - 2.0 / 3.0).abs() < 1e-14);
        let a = mean_relaxation(&w, &RelocationVector::node(20, 1).unwrap(), 1.0).unwrap();
        let b = mean_relaxation(&w, &RelocationVector::node(20, 9).unwrap(), 1.0).unwrap();
        assert!((a.global - b.global).abs() < 1e-12);
    }

    #[test]
    fn kemeny_shape() {
        let w = ws(60, 9);
        let spec = spectral_decompose(&w).unwrap();
        assert!((kemeny_derivative(&spec, 1.0) - 1.0).abs() < 1e-10);
        let h = 1e-4;
        for k in 1..20 {
            let p = k as f64 / 20.0;
            assert!(kemeny_second_derivative(&spec, p) > 0.0);
            let fd = (kemeny_spectral(&spec, p + h).kemeny - kemeny_spectral(&spec, p - h).kemeny) / (2.0 * h);
            assert!((fd - kemeny_derivative(&spec, p)).abs() < 1e-5 * fd.abs().max(1.0));
        }
        let k1 = kemeny(&w, 1.0 - 1e-12).unwrap();
        assert!((k1.efficiency - 60.0 / 59.0).abs() < 1e-10);
    }

    #[test]
    fn optimal_rate_minimizes() {
        // a long ring lattice decreases at small p
        let g = generate_graph(GraphModel::WattsStrogatz { n: 200, m: 2, rewire: 0.0 }, 0).unwrap();
        let w = transition_matrix(&g);
        let spec = spectral_decompose(&w).unwrap();
        let p = optimal_reset_rate(&spec).expect("ring lattice has an interior optimum");
        assert!(p > 0.0 && p < 1.0);
        assert!(kemeny_derivative(&spec, p).abs() < 1e-6);
        let kp = kemeny_spectral(&spec, p).kemeny;
        assert!(kp < kemeny_spectral(&spec, p * 0.9).kemeny);
        assert!(kp < kemeny_spectral(&spec, (p * 1.1).min(1.0)).kemeny);
    }

    #[test]
    fn first_passage_pdf_is_normalized() {
        let g = generate_graph(GraphModel::WattsStrogatz { n: 8, m: 2, rewire: 0.3 }, 3).unwrap();
        let w = transition_matrix(&g);
        let rel = RelocationVector::uniform(8);
        let p = 0.1;
        let series = propagate(&w, &rel, &ResetLaw::geometric(p).unwrap(), 600);
        let t = mfpt_matrix(&w, &rel, p).unwrap();
        for (i, b) in [(0, 5), (3, 3), (7, 2)] {
            let f = first_passage_pdf(&series, i, b);
            let total: f64 = f.iter().sum();
            assert!((total - 1.0).abs() < 1e-6);
            let mean: f64 = f.iter().enumerate().map(|(k, x)| k as f64 * x).sum();
            assert!((mean - t[(i, b)]).abs() < 1e-4 * t[(i, b)]);
        }
    }
}
