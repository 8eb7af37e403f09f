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

//! Occupation propagators of the walk with renewal resetting.
//!
//! Two independent channels are provided: a time-domain renewal recursion
//! ([`propagate`]) and the spectral canonical form ([`propagate_spectral`]).
//! Geometric resetting is Markovian and also has the matrix power
//! [`bernoulli_propagator`] and its closed form.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::TransitionMatrix;
use crate::linalg;
use crate::renewal::ResetLaw;
use crate::Mean;

/// Eigenvalues (descending) with biorthonormal right and left eigenvectors of
/// `W`: `W = sum_m lambda_m |phi_m><phibar_m|`.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub eigenvalues: DVector<f64>,
    /// Column `m` is `|phi_m>`.
    pub right: DMatrix<f64>,
    /// Row `m` is `<phibar_m|`.
    pub left: DMatrix<f64>,
}

impl SpectralData {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `sum_m c_m |phi_m><phibar_m|`.
    pub fn compose(&self, coeffs: &DVector<f64>) -> DMatrix<f64> {
        let mut scaled = self.right.clone();
        for (m, mut col) in scaled.column_iter_mut().enumerate() {
            col *= coeffs[m];
        }
        scaled * &self.left
    }

    /// Row `x` mapped to the coefficients `<x|phi_m>`.
    pub fn project_row(&self, x: &DVector<f64>) -> DVector<f64> {
        self.right.transpose() * x
    }

    /// `W^t` from the spectrum.
    pub fn power(&self, t: u32) -> DMatrix<f64> {
        self.compose(&self.eigenvalues.map(|l| l.powi(t as i32)))
    }

    /// `|phi_1><phibar_1|` row, the equilibrium `K_j / sum K`.
    pub fn stationary(&self) -> DVector<f64> {
        self.left.row(0).transpose() * self.right[(0, 0)]
    }
}

/// Spectral decomposition through the symmetric matrix
/// `D^(1/2) W D^(-1/2) = D^(-1/2) A D^(-1/2)`.
pub fn spectral_decompose(w: &TransitionMatrix) -> Result<SpectralData> {
    let n = w.n();
    let sq: Vec<f64> = w.degrees().iter().map(|k| k.sqrt()).collect();
    let sym = DMatrix::from_fn(n, n, |i, j| w.w()[(i, j)] * sq[i] / sq[j]);
    // exact symmetry keeps the solver on the symmetric path
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&m| eig.eigenvalues[m]));
    if n > 1 {
        let gap_top = eigenvalues[0] - eigenvalues[1];
        let gap_bottom = eigenvalues[n - 1] + 1.0;
        if gap_top < 1e-10 {
            return Err(Error::InvalidGraph("unit eigenvalue is degenerate (graph disconnected)".into()));
        }
        if gap_bottom < 1e-10 {
            return Err(Error::InvalidGraph("eigenvalue -1 present (graph bipartite)".into()));
        }
    }
    let mut right = DMatrix::zeros(n, n);
    let mut left = DMatrix::zeros(n, n);
    for (m, &src) in order.iter().enumerate() {
        let u = eig.eigenvectors.column(src);
        // the Perron vector is chosen positive
        let sign = if m == 0 && u.sum() < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            right[(i, m)] = sign * u[i] / sq[i];
            left[(m, i)] = sign * u[i] * sq[i];
        }
    }
    Ok(SpectralData { eigenvalues, right, left })
}

/// Relocation probabilities `R_j`, the common row of the rank-one relocation
/// matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RelocationVector {
    r: DVector<f64>,
}

impl RelocationVector {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if r.is_empty() || r.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidParameter("relocation entries must be non-negative".into()));
        }
        let total: f64 = r.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("relocation vector sums to {total}, not 1")));
        }
        Ok(RelocationVector { r: DVector::from_vec(r) })
    }

    /// Normalize non-negative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("relocation weights have no mass".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn node(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::InvalidParameter(format!("relocation node {i} out of range")));
        }
        let mut r = vec![0.0; n];
        r[i] = 1.0;
        Self::new(r)
    }

    pub fn uniform(n: usize) -> Self {
        RelocationVector { r: DVector::from_element(n, 1.0 / n as f64) }
    }

    /// Uniform over the given r-nodes.
    pub fn uniform_over(n: usize, nodes: &[usize]) -> Result<Self> {
        let mut w = vec![0.0; n];
        for &i in nodes {
            *w.get_mut(i).ok_or_else(|| Error::InvalidParameter(format!("node {i} out of range")))? = 1.0;
        }
        Self::from_weights(w)
    }

    /// Proportional to degree over the given r-nodes.
    pub fn degree_proportional(w: &TransitionMatrix, nodes: &[usize]) -> Result<Self> {
        let mut weights = vec![0.0; w.n()];
        for &i in nodes {
            if i >= w.n() {
                return Err(Error::InvalidParameter(format!("node {i} out of range")));
            }
            weights[i] = w.degrees()[i];
        }
        Self::from_weights(weights)
    }

    /// The equilibrium `K_j / sum K`.
    pub fn stationary(w: &TransitionMatrix) -> Self {
        RelocationVector { r: w.stationary().clone() }
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.r
    }

    /// r-nodes, `R_j > 0`.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n()).filter(|&j| self.r[j] > 0.0).collect()
    }

    /// Rank-one matrix with every row equal to `R`.
    pub fn matrix(&self) -> DMatrix<f64> {
        rows_equal(&self.r, self.n())
    }
}

/// `n x len` matrix whose rows all equal `row`.
pub fn rows_equal(row: &DVector<f64>, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, row.len(), |_, j| row[j])
}

/// Occupation matrices `P(0..=t_max)`.
#[derive(Clone, Debug)]
pub struct PropagatorSeries {
    pub matrices: Vec<DMatrix<f64>>,
    pub law: ResetLaw,
    pub relocation: RelocationVector,
}

impl PropagatorSeries {
    pub fn horizon(&self) -> usize {
        self.matrices.len() - 1
    }

    pub fn at(&self, t: usize) -> &DMatrix<f64> {
        &self.matrices[t]
    }
}

/// Time-stepped renewal recursion
/// `P(t) = Phi(t) W^t + sum_k psi(k) R P(t-k)`.
///
/// Only the common row `rho(t) = R P(t)` is kept in history, which satisfies
/// the scalar-weighted recursion `rho(t) = Phi(t) R W^t + sum_k psi(k) rho(t-k)`.
pub fn propagate(w: &TransitionMatrix, rel: &RelocationVector, law: &ResetLaw, t_max: usize) -> PropagatorSeries {
    let n = w.n();
    let tab = law.tables(t_max);
    let support: Vec<usize> = (1..=t_max).filter(|&k| tab.psi[k] != 0.0).collect();
    let mut wt = DMatrix::identity(n, n);
    let mut rwt = rel.vector().clone();
    let mut rho: Vec<DVector<f64>> = Vec::with_capacity(t_max + 1);
    let mut matrices = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        if t > 0 {
            wt = w.mat_mul_right(&wt);
            rwt = w.left_mul(&rwt);
        }
        let mut sigma = DVector::zeros(n);
        for &k in support.iter().take_while(|&&k| k <= t) {
            sigma.axpy(tab.psi[k], &rho[t - k], 1.0);
        }
        let mut p = &wt * tab.phi[t];
        for (j, mut col) in p.column_iter_mut().enumerate() {
            col.add_scalar_mut(sigma[j]);
        }
        rho.push(&rwt * tab.phi[t] + sigma);
        matrices.push(p);
    }
    PropagatorSeries { matrices, law: law.clone(), relocation: rel.clone() }
}

/// Spectral canonical form of `P(t)`:
/// `P_ij(t) = sum_m [Phi(t) lambda_m^t <i|phi_m> + (fbar(t, lambda_m) - Phi(t) lambda_m^t) <R|phi_m>] <phibar_m|j>`.
pub fn propagate_spectral(spec: &SpectralData, rel: &RelocationVector, law: &ResetLaw, t: usize) -> DMatrix<f64> {
    let tab = law.tables(t);
    let n = spec.n();
    let free = spec.eigenvalues.map(|l| tab.phi[t] * l.powi(t as i32));
    let fbar = spec.eigenvalues.map(|l| tab.backward_gf(t, l));
    let proj = spec.project_row(rel.vector());
    let reloc_coeff = DVector::from_fn(n, |m, _| (fbar[m] - free[m]) * proj[m]);
    let reloc_row = spec.left.transpose() * reloc_coeff;
    let mut p = spec.compose(&free);
    for (j, mut col) in p.column_iter_mut().enumerate() {
        col.add_scalar_mut(reloc_row[j]);
    }
    p
}

/// Infinite-time occupation row and whether it is a genuine steady state.
#[derive(Clone, Debug)]
pub struct Ness {
    pub row: DVector<f64>,
    /// False when the mean inter-reset time diverges; `row` then holds the
    /// equilibrium, which is approached without a resetting steady state.
    pub exists: bool,
}

impl Ness {
    /// Full steady-state matrix; all rows equal.
    pub fn matrix(&self) -> DMatrix<f64> {
        rows_equal(&self.row, self.row.len())
    }
}

/// Steady-state occupation row.
///
/// Geometric laws solve `x (1 - qW) = p R`; finite-support laws sum
/// `(1/<dt>) sum_s Phi(s) R W^s`; infinite-mean laws report the equilibrium
/// with `exists = false`.
pub fn ness(w: &TransitionMatrix, rel: &RelocationVector, law: &ResetLaw) -> Result<Ness> {
    match (law, law.mean_interval()) {
        (_, Mean::Infinite) => Ok(Ness { row: w.stationary().clone(), exists: false }),
        (ResetLaw::Geometric { p }, _) => {
            if *p == 1.0 {
                return Ok(Ness { row: rel.vector().clone(), exists: true });
            }
            let m = linalg::identity_minus(w.w(), 1.0 - p);
            let row = linalg::solve_row(&m, &(rel.vector() * *p))?;
            Ok(Ness { row, exists: true })
        }
        (_, Mean::Finite(mean)) => {
            let horizon = law.max_support().expect("finite mean laws here have finite support");
            let tab = law.tables(horizon);
            let mut acc = DVector::zeros(w.n());
            let mut rws = rel.vector().clone();
            for s in 0..horizon {
                if s > 0 {
                    rws = w.left_mul(&rws);
                }
                acc.axpy(tab.phi[s], &rws, 1.0);
            }
            Ok(Ness { row: acc / mean, exists: true })
        }
    }
}

/// Spectral channel for the steady state,
/// `P_j(inf) = pi_j + sum_{m>=2} fbar(inf, lambda_m) <R|phi_m> <phibar_m|j>` with
/// `fbar(inf, v) = (1 - psibar(v)) / ((1 - v) <dt>)`.
pub fn ness_spectral(spec: &SpectralData, rel: &RelocationVector, law: &ResetLaw) -> Ness {
    let Mean::Finite(mean) = law.mean_interval() else {
        return Ness { row: spec.stationary(), exists: false };
    };
    let proj = spec.project_row(rel.vector());
    let coeff = DVector::from_fn(spec.n(), |m, _| {
        if m == 0 {
            proj[0]
        } else {
            let l = spec.eigenvalues[m];
            (1.0 - law.gf(l)) / ((1.0 - l) * mean) * proj[m]
        }
    });
    Ness { row: spec.left.transpose() * coeff, exists: true }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else if p == 0.0 {
        Err(Error::SingularLimit { proxy: crate::firstpassage::P_ZERO_PROXY })
    } else {
        Err(Error::InvalidParameter(format!("resetting probability {p} outside (0, 1]")))
    }
}

/// One-step matrix `qW + pR` of the walk with geometric resets.
pub fn bernoulli_step(w: &TransitionMatrix, rel: &RelocationVector, p: f64) -> Result<DMatrix<f64>> {
    check_p(p)?;
    Ok(w.w() * (1.0 - p) + rel.matrix() * p)
}

/// `(qW + pR)^t` by repeated squaring.
pub fn bernoulli_propagator(w: &TransitionMatrix, rel: &RelocationVector, p: f64, t: u64) -> Result<DMatrix<f64>> {
    Ok(linalg::stochastic_power(&bernoulli_step(w, rel, p)?, t))
}

/// Closed form `q^t W^t + p R (1 - q^t W^t)(1 - qW)^-1`.
pub fn bernoulli_closed_form(w: &TransitionMatrix, rel: &RelocationVector, p: f64, t: u64) -> Result<DMatrix<f64>> {
    check_p(p)?;
    let q = 1.0 - p;
    let n = w.n();
    let qtwt = linalg::stochastic_power(w.w(), t) * q.powi(t as i32);
    let g = linalg::inverse(&linalg::identity_minus(w.w(), q))?;
    let tail = (DMatrix::identity(n, n) - &qtwt) * g;
    let reloc_row = tail.transpose() * rel.vector() * p;
    Ok(qtwt + rows_equal(&reloc_row, n))
}

/// Propagator of deterministic resets every `period` steps: `W^t` before the
/// first reset, then `R W^(t mod period)`.
pub fn periodic_propagator(w: &TransitionMatrix, rel: &RelocationVector, period: usize, t: usize) -> Result<DMatrix<f64>> {
    if period == 0 {
        return Err(Error::InvalidParameter("period must be >= 1".into()));
    }
    if t < period {
        return Ok(linalg::stochastic_power(w.w(), t as u64));
    }
    let mut row = rel.vector().clone();
    for _ in 0..t % period {
        row = w.left_mul(&row);
    }
    Ok(rows_equal(&row, w.n()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, transition_matrix, Graph, GraphModel};
    use statrs::function::gamma::gamma;

    fn ws(n: usize, seed: u64) -> TransitionMatrix {
        transition_matrix(&generate_graph(GraphModel::WattsStrogatz { n, m: 2, rewire: 0.7 }, seed).unwrap())
    }

    fn complete(n: usize) -> TransitionMatrix {
        transition_matrix(&generate_graph(GraphModel::Complete { n }, 0).unwrap())
    }

    fn skewed(n: usize) -> RelocationVector {
        RelocationVector::from_weights((0..n).map(|i| ((i * 7 + 3) % 5) as f64).collect()).unwrap()
    }

    fn laws() -> Vec<ResetLaw> {
        vec![
            ResetLaw::geometric(0.2).unwrap(),
            ResetLaw::sibuya(0.4).unwrap(),
            ResetLaw::finite_support(vec![0.1, 0.3, 0.0, 0.6]).unwrap(),
            ResetLaw::deterministic(3).unwrap(),
        ]
    }

    #[test]
    fn complete_graph_spectrum() {
        for n in [3, 6] {
            let spec = spectral_decompose(&complete(n)).unwrap();
            assert!((spec.eigenvalues[0] - 1.0).abs() < 1e-12);
            for m in 1..n {
                assert!((spec.eigenvalues[m] + 1.0 / (n as f64 - 1.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectral_identities() {
        let w = ws(40, 2);
        let spec = spectral_decompose(&w).unwrap();
        let n = w.n();
        let bi = &spec.left * &spec.right;
        assert!(linalg::max_abs_diff(&bi, &DMatrix::identity(n, n)) < 1e-10);
        let comp = &spec.right * &spec.left;
        assert!(linalg::max_abs_diff(&comp, &DMatrix::identity(n, n)) < 1e-10);
        assert!(linalg::max_abs_diff(&spec.power(1), w.w()) < 1e-12);
        assert!((spec.stationary() - w.stationary()).amax() < 1e-12);
        assert!(spec.eigenvalues.iter().skip(1).all(|l| l.abs() < 1.0));
    }

    #[test]
    fn bipartite_spectrum_is_rejected() {
        let sq = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(spectral_decompose(&transition_matrix(&sq)).is_err());
    }

    #[test]
    fn propagate_initial_and_trapped() {
        let w = ws(20, 1);
        let rel = skewed(20);
        let series = propagate(&w, &rel, &ResetLaw::deterministic(1).unwrap(), 10);
        assert_eq!(series.at(0), &DMatrix::identity(20, 20));
        for t in 1..=10 {
            assert!(linalg::max_abs_diff(series.at(t), &rel.matrix()) < 1e-15);
        }
    }

    #[test]
    fn propagate_matches_bernoulli() {
        let w = ws(30, 4);
        let rel = skewed(30);
        let p = 0.15;
        let series = propagate(&w, &rel, &ResetLaw::geometric(p).unwrap(), 100);
        for t in [1, 2, 17, 100] {
            let b = bernoulli_propagator(&w, &rel, p, t as u64).unwrap();
            assert!(linalg::max_abs_diff(series.at(t), &b) < 1e-12);
        }
    }

    #[test]
    fn rows_stay_stochastic() {
        let w = ws(30, 5);
        let rel = skewed(30);
        for law in laws() {
            let series = propagate(&w, &rel, &law, 200);
            for p in &series.matrices {
                for row in p.row_iter() {
                    assert!((row.sum() - 1.0).abs() < 1e-12);
                }
                assert!(p.iter().all(|x| (-1e-15..=1.0 + 1e-12).contains(x)));
            }
        }
    }

    #[test]
    fn spectral_channel_agrees() {
        let w = ws(50, 6);
        let spec = spectral_decompose(&w).unwrap();
        let rel = skewed(50);
        for law in laws() {
            let series = propagate(&w, &rel, &law, 60);
            for t in [0, 1, 5, 33, 60] {
                let s = propagate_spectral(&spec, &rel, &law, t);
                assert!(linalg::max_abs_diff(series.at(t), &s) < 1e-10, "{law:?} t={t}");
            }
        }
    }

    #[test]
    fn equilibrium_relocation_has_no_relocation_term() {
        let w = ws(25, 7);
        let spec = spectral_decompose(&w).unwrap();
        let rel = RelocationVector::stationary(&w);
        let law = ResetLaw::sibuya(0.6).unwrap();
        let t = 12;
        let p = propagate_spectral(&spec, &rel, &law, t);
        let phi = law.persistence(t);
        let expect = linalg::stochastic_power(w.w(), t as u64) * phi + rows_equal(w.stationary(), 25) * (1.0 - phi);
        assert!(linalg::max_abs_diff(&p, &expect) < 1e-12);
    }

    #[test]
    fn ness_examples() {
        let w = complete(3);
        let n = ness(&w, &RelocationVector::uniform(3), &ResetLaw::geometric(0.5).unwrap()).unwrap();
        assert!(n.row.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-14));
        let w = ws(20, 3);
        let rel = RelocationVector::node(20, 4).unwrap();
        let n = ness(&w, &rel, &ResetLaw::geometric(1.0).unwrap()).unwrap();
        assert_eq!(&n.row, rel.vector());
        let n = ness(&w, &rel, &ResetLaw::sibuya(0.5).unwrap()).unwrap();
        assert!(!n.exists);
        assert_eq!(&n.row, w.stationary());
    }

    #[test]
    fn ness_channels_agree() {
        let w = ws(30, 8);
        let spec = spectral_decompose(&w).unwrap();
        let rel = skewed(30);
        for law in laws() {
            let a = ness(&w, &rel, &law).unwrap();
            let b = ness_spectral(&spec, &rel, &law);
            assert_eq!(a.exists, b.exists);
            assert!((a.row - b.row).amax() < 1e-10, "{law:?}");
        }
    }

    #[test]
    fn ness_is_a_fixed_point_and_limit() {
        let w = ws(30, 9);
        let rel = skewed(30);
        let p = 0.05;
        let n = ness(&w, &rel, &ResetLaw::geometric(p).unwrap()).unwrap();
        let m = n.matrix();
        assert!(linalg::max_abs_diff(&(rel.matrix() * &m), &m) < 1e-10);
        let late = bernoulli_propagator(&w, &rel, p, 10_000).unwrap();
        assert!(linalg::max_abs_diff(&late, &m) < 1e-8);
        let eq = ness(&w, &RelocationVector::stationary(&w), &ResetLaw::uniform(4).unwrap()).unwrap();
        assert!((eq.row - w.stationary()).amax() < 1e-10);
    }

    #[test]
    fn finite_support_ness_is_long_time_average() {
        let w = ws(20, 10);
        let rel = skewed(20);
        let law = ResetLaw::finite_support(vec![0.1, 0.3, 0.0, 0.6]).unwrap();
        let n = ness(&w, &rel, &law).unwrap();
        let series = propagate(&w, &rel, &law, 3000);
        assert!((series.at(3000).row(0).transpose() - &n.row).amax() < 1e-10);
    }

    #[test]
    fn bernoulli_forms() {
        let w = ws(30, 11);
        let rel = skewed(30);
        let p = 0.3;
        let one = bernoulli_propagator(&w, &rel, p, 1).unwrap();
        assert!(linalg::max_abs_diff(&one, &(w.w() * 0.7 + rel.matrix() * 0.3)) < 1e-15);
        for t in [1u64, 2, 9, 64, 65] {
            let a = bernoulli_propagator(&w, &rel, p, t).unwrap();
            let b = bernoulli_closed_form(&w, &rel, p, t).unwrap();
            assert!(linalg::max_abs_diff(&a, &b) < 1e-12);
            let next = bernoulli_propagator(&w, &rel, p, t + 1).unwrap();
            assert!(linalg::max_abs_diff(&(&a * &one), &next) < 1e-12);
        }
        let trap = bernoulli_propagator(&w, &RelocationVector::node(30, 2).unwrap(), 1.0, 5).unwrap();
        assert!(trap.column(2).iter().all(|x| *x == 1.0));
        assert!(matches!(bernoulli_propagator(&w, &rel, 0.0, 3), Err(Error::SingularLimit { .. })));
    }

    #[test]
    fn periodic_forms() {
        let w = ws(20, 12);
        let rel = skewed(20);
        let period = 4;
        let at_t = periodic_propagator(&w, &rel, period, 4).unwrap();
        assert!(linalg::max_abs_diff(&at_t, &rel.matrix()) < 1e-15);
        let next = periodic_propagator(&w, &rel, period, 5).unwrap();
        let rw = w.left_mul(rel.vector());
        assert!(linalg::max_abs_diff(&next, &rows_equal(&rw, 20)) < 1e-15);
        let law = ResetLaw::deterministic(period).unwrap();
        let series = propagate(&w, &rel, &law, 20);
        for t in 0..=20 {
            let p = periodic_propagator(&w, &rel, period, t).unwrap();
            assert!(linalg::max_abs_diff(&p, series.at(t)) < 1e-12);
        }
        let mut avg = DMatrix::zeros(20, 20);
        for t in 8..12 {
            avg += periodic_propagator(&w, &rel, period, t).unwrap() / period as f64;
        }
        let n = ness(&w, &rel, &law).unwrap();
        assert!(linalg::max_abs_diff(&avg, &n.matrix()) < 1e-12);
    }

    #[test]
    fn sibuya_power_law_relaxation() {
        let g = generate_graph(GraphModel::WattsStrogatz { n: 10, m: 2, rewire: 0.5 }, 13).unwrap();
        let w = transition_matrix(&g);
        let spec = spectral_decompose(&w).unwrap();
        let rel = RelocationVector::node(10, 0).unwrap();
        let alpha = 0.5;
        let law = ResetLaw::sibuya(alpha).unwrap();
        let t = 1000;
        let series = propagate(&w, &rel, &law, t);
        let dev = (series.at(t).row(3).transpose() - w.stationary()).amax();
        let proj = spec.project_row(rel.vector());
        let coeff = DVector::from_fn(10, |m, _| {
            if m == 0 { 0.0 } else { (1.0 - spec.eigenvalues[m]).powf(alpha - 1.0) * proj[m] }
        });
        let amplitude = (spec.left.transpose() * coeff).amax();
        let scaled = dev * gamma(alpha) * (t as f64).powf(1.0 - alpha);
        assert!((scaled / amplitude - 1.0).abs() < 0.1, "scaled={scaled} amplitude={amplitude}");
    }
}
