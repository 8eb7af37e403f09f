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


//! First hitting of a target set under renewal resetting.
//!
//! The walker is killed on arrival at a t-node, by a step or by a reset. The
//! killed transition matrix `W~` and relocation row `R~` drive the survival
//! propagator; its row sums are the survival probabilities `Lambda_i(t)`.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::TransitionMatrix;
use crate::linalg;
use crate::propagator::RelocationVector;
use crate::renewal::{series_divide, RenewalStream, ResetLaw};
use crate::Mean;

/// Distance of `rho(g(W~) R~)` from one below which the walk is treated as
/// non-ergodic.
pub const RHO_MARGIN: f64 = 1e-8;
/// Regularization of the pseudo-inverse cross-check channel.
pub const PSEUDO_INVERSE_EPS: f64 = 1e-8;
const SERIES_TOL: f64 = 1e-14;
const SERIES_CAP: usize = 1_000_000;
const PLATEAU_TOL: f64 = 1e-12;
const SMALL_ARG: f64 = 1e-3;
const SMALL_TERMS: usize = 40;

/// The walk with killing at the targets.
#[derive(Clone, Debug)]
pub struct KilledSystem {
    w_killed: DMatrix<f64>,
    r_killed: DVector<f64>,
    relocation: RelocationVector,
    targets: Vec<usize>,
    is_target: Vec<bool>,
    row_defects: DVector<f64>,
    spectral_radius: f64,
    neighbors: Vec<Vec<usize>>,
    degrees: Vec<f64>,
}

/// Zero the target columns of `W` and of the relocation row.
pub fn kill(w: &TransitionMatrix, rel: &RelocationVector, targets: &[usize]) -> Result<KilledSystem> {
    let n = w.n();
    if rel.n() != n {
        return Err(Error::InvalidParameter("relocation vector does not match the graph".into()));
    }
    let mut is_target = vec![false; n];
    for &b in targets {
        if b >= n {
            return Err(Error::InvalidParameter(format!("target {b} out of range")));
        }
        is_target[b] = true;
    }
    let targets: Vec<usize> = (0..n).filter(|&b| is_target[b]).collect();
    if targets.is_empty() {
        return Err(Error::InvalidParameter("target set is empty".into()));
    }
    if targets.len() == n {
        return Err(Error::InvalidParameter("target set covers every node".into()));
    }
    let w_killed = DMatrix::from_fn(n, n, |i, j| if is_target[j] { 0.0 } else { w.w()[(i, j)] });
    let r_killed = DVector::from_fn(n, |j, _| if is_target[j] { 0.0 } else { rel.vector()[j] });
    let row_defects = DVector::from_fn(n, |i, _| w_killed.row(i).sum());
    let spectral_radius = linalg::spectral_radius_nonneg(&w_killed, 1e-12, 100_000);
    Ok(KilledSystem {
        w_killed,
        r_killed,
        relocation: rel.clone(),
        targets,
        is_target,
        row_defects,
        spectral_radius,
        neighbors: (0..n).map(|i| w.neighbors(i).to_vec()).collect(),
        degrees: w.degrees().to_vec(),
    })
}

impl KilledSystem {
    pub fn n(&self) -> usize {
        self.is_target.len()
    }

    pub fn w_killed(&self) -> &DMatrix<f64> {
        &self.w_killed
    }

    pub fn r_killed(&self) -> &DVector<f64> {
        &self.r_killed
    }

    pub fn relocation(&self) -> &RelocationVector {
        &self.relocation
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn is_target(&self, i: usize) -> bool {
        self.is_target[i]
    }

    /// Row sums `q_i` of `W~`.
    pub fn row_defects(&self) -> &DVector<f64> {
        &self.row_defects
    }

    /// `rho(W~)`.
    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    /// `W~ v` using the adjacency lists.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.n(), |i, _| {
            let s: f64 = self.neighbors[i].iter().filter(|&&j| !self.is_target[j]).map(|&j| v[j]).sum();
            s / self.degrees[i]
        })
    }

    /// Shortest-path distance from the r-nodes to the nearest target.
    pub fn relocation_target_distance(&self) -> usize {
        let n = self.n();
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for i in self.relocation.support() {
            dist[i] = 0;
            queue.push_back(i);
        }
        while let Some(i) = queue.pop_front() {
            if self.is_target[i] {
                return dist[i];
            }
            for &j in &self.neighbors[i] {
                if dist[j] == usize::MAX {
                    dist[j] = dist[i] + 1;
                    queue.push_back(j);
                }
            }
        }
        usize::MAX
    }

    /// Full survival propagator `P_AWR(0..=t_max)`.
    pub fn propagator(&self, law: &ResetLaw, t_max: usize) -> Vec<DMatrix<f64>> {
        survival_propagator(&self.w_killed, &self.r_killed, law, t_max)
    }
}

/// Survival curves `Lambda_i(t)` and first-hitting densities
/// `chi_i(t) = Lambda_i(t-1) - Lambda_i(t)`, indexed `(i, t)`.
#[derive(Clone, Debug)]
pub struct HittingStats {
    pub survival: DMatrix<f64>,
    pub fht_pdf: DMatrix<f64>,
}

impl HittingStats {
    pub fn horizon(&self) -> usize {
        self.survival.ncols() - 1
    }
}

pub fn survival_series(ks: &KilledSystem, law: &ResetLaw, t_max: usize) -> HittingStats {
    let n = ks.n();
    let tab = law.tables(t_max);
    let support = law.max_support().unwrap_or(usize::MAX);
    let mut lam0 = Vec::with_capacity(t_max + 1);
    lam0.push(DVector::from_element(n, 1.0));
    for t in 1..=t_max {
        let next = ks.apply(&lam0[t - 1]);
        lam0.push(next);
    }
    let a: Vec<f64> = lam0.iter().map(|v| ks.r_killed.dot(v)).collect();
    // s(t) = R~ . Lambda(t)
    let mut s = vec![0.0; t_max + 1];
    let mut survival = DMatrix::zeros(n, t_max + 1);
    for t in 0..=t_max {
        let mut st = tab.phi[t] * a[t];
        let mut col = &lam0[t] * tab.phi[t];
        for k in 1..=t.min(support) {
            let psi = tab.psi[k];
            if psi == 0.0 {
                continue;
            }
            st += psi * a[k - 1] * s[t - k];
            col.axpy(psi * s[t - k], &lam0[k - 1], 1.0);
        }
        s[t] = st;
        survival.set_column(t, &col);
    }
    let mut fht_pdf = DMatrix::zeros(n, t_max + 1);
    for t in 1..=t_max {
        let d = survival.column(t - 1) - survival.column(t);
        fht_pdf.set_column(t, &d);
    }
    HittingStats { survival, fht_pdf }
}

/// Renewal recursion `P(t) = Phi(t) W^t + sum_k psi(k) W^(k-1) 1 (r P(t-k))`
/// for arbitrary `w` and relocation row `r`. With the killed pair this is the
/// survival propagator; with the undefective pair it is the occupation
/// propagator.
pub fn survival_propagator(w: &DMatrix<f64>, r: &DVector<f64>, law: &ResetLaw, t_max: usize) -> Vec<DMatrix<f64>> {
    let n = w.nrows();
    let tab = law.tables(t_max);
    let support = law.max_support().unwrap_or(usize::MAX);
    let mut powers = Vec::with_capacity(t_max + 1);
    powers.push(DMatrix::<f64>::identity(n, n));
    for t in 1..=t_max {
        let next = w * &powers[t - 1];
        powers.push(next);
    }
    let ones = DVector::from_element(n, 1.0);
    let cols: Vec<DVector<f64>> = powers.iter().map(|p| p * &ones).collect();
    let mut out: Vec<DMatrix<f64>> = Vec::with_capacity(t_max + 1);
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        let mut p = &powers[t] * tab.phi[t];
        for k in 1..=t.min(support) {
            let psi = tab.psi[k];
            if psi != 0.0 {
                p += &cols[k - 1] * rows[t - k].transpose() * psi;
            }
        }
        rows.push(p.tr_mul(r));
        out.push(p);
    }
    out
}

fn binomial(t: usize, k: usize) -> f64 {
    if k > t {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (t - j) as f64 / (j + 1) as f64)
}

/// Taylor coefficients at `u = 1` of `M(u) 1` and `u g(uW~) 1`.
struct Channels {
    m: Vec<DVector<f64>>,
    g: Vec<DVector<f64>>,
}

#[derive(Default)]
struct Tail {
    prev: f64,
}

impl Tail {
    fn done(&mut self, term: f64, sum: f64) -> bool {
        let ratio = term / self.prev;
        self.prev = term;
        if term == 0.0 {
            return true;
        }
        ratio < 1.0 && term / (1.0 - ratio) <= SERIES_TOL * sum
    }
}

fn series_channels(ks: &KilledSystem, law: &ResetLaw, order: usize) -> Result<Channels> {
    let n = ks.n();
    let mut m = vec![DVector::zeros(n); order + 1];
    let mut g = vec![DVector::zeros(n); order + 1];
    let mut lam = DVector::from_element(n, 1.0);
    m[0] += &lam;
    let support = law.max_support();
    let mut tails: Vec<Tail> = (0..2 * (order + 1)).map(|_| Tail { prev: f64::INFINITY }).collect();
    for (t, (psi, phi)) in RenewalStream::new(law).enumerate().skip(1) {
        if t > SERIES_CAP {
            return Err(Error::SeriesCap { terms: SERIES_CAP });
        }
        let next = ks.apply(&lam);
        let (prev_norm, norm) = (lam.amax(), next.amax());
        let mut done = true;
        for k in 0..=order {
            let c = binomial(t, k);
            g[k].axpy(psi * c, &lam, 1.0);
            m[k].axpy(phi * c, &next, 1.0);
            done &= tails[2 * k].done(psi * c * prev_norm, g[k].amax());
            done &= tails[2 * k + 1].done(phi * c * norm, m[k].amax());
        }
        lam = next;
        match support {
            Some(big_t) if t >= big_t => break,
            Some(_) => {}
            None if done => break,
            None => {}
        }
    }
    Ok(Channels { m, g })
}

/// `rho(g(W~) R~)`, the single non-zero eigenvalue `R~ . g(W~) 1`.
pub fn reset_kernel_radius(ks: &KilledSystem, law: &ResetLaw) -> Result<f64> {
    let ch = series_channels(ks, law, 0)?;
    Ok(ks.r_killed.dot(&ch.g[0]))
}

/// Per-start mean first hitting times and their average over all starts.
#[derive(Clone, Debug, PartialEq)]
pub struct MfhtResult {
    pub per_start: Vec<Mean>,
    pub global: Mean,
    pub rho: f64,
}

impl MfhtResult {
    fn from_channels(ks: &KilledSystem, m0: &DVector<f64>, g0: &DVector<f64>) -> MfhtResult {
        let n = ks.n();
        let rho = ks.r_killed.dot(g0);
        if rho >= 1.0 - RHO_MARGIN {
            return MfhtResult { per_start: vec![Mean::Infinite; n], global: Mean::Infinite, rho };
        }
        let x = m0 + g0 * (ks.r_killed.dot(m0) / (1.0 - rho));
        MfhtResult {
            per_start: x.iter().map(|&v| Mean::Finite(v)).collect(),
            global: Mean::Finite(x.mean()),
            rho,
        }
    }
}

pub fn mfht(ks: &KilledSystem, law: &ResetLaw) -> Result<MfhtResult> {
    let ch = series_channels(ks, law, 0)?;
    Ok(MfhtResult::from_channels(ks, &ch.m[0], &ch.g[0]))
}

/// Mean first hitting times without resetting, `(1 - W~)^-1 1`.
pub fn mfht_no_reset(ks: &KilledSystem) -> Result<Vec<f64>> {
    let a = linalg::identity_minus(&ks.w_killed, 1.0);
    let x = linalg::solve(&a, &DVector::from_element(ks.n(), 1.0))?;
    Ok(x.iter().copied().collect())
}

/// Raw moments `E[T_i^m]` for `m = 1..=order`, `order <= 4`; entry
/// `[m-1][i]`.
pub fn moments(ks: &KilledSystem, law: &ResetLaw, order: usize) -> Result<Vec<Vec<Mean>>> {
    if !(1..=4).contains(&order) {
        return Err(Error::InvalidParameter(format!("moment order {order} outside 1..=4")));
    }
    let n = ks.n();
    let ch = series_channels(ks, law, order - 1)?;
    let rho = ks.r_killed.dot(&ch.g[0]);
    if rho >= 1.0 - RHO_MARGIN {
        return Ok(vec![vec![Mean::Infinite; n]; order]);
    }
    let num: Vec<f64> = ch.m.iter().map(|v| ks.r_killed.dot(v)).collect();
    let den: Vec<f64> = ch.g.iter().enumerate().map(|(k, v)| f64::from(u8::from(k == 0)) - ks.r_killed.dot(v)).collect();
    let s = series_divide(&num, &den);
    // Taylor coefficients of the survival generating function at u = 1
    let coeffs: Vec<DVector<f64>> = (0..order)
        .map(|k| {
            let mut c = ch.m[k].clone();
            for a in 0..=k {
                c.axpy(s[k - a], &ch.g[a], 1.0);
            }
            c
        })
        .collect();
    let factorial: Vec<DVector<f64>> = coeffs.iter().enumerate().map(|(k, c)| c * (1..=k + 1).product::<usize>() as f64).collect();
    const STIRLING: [[f64; 4]; 4] = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 3.0, 1.0, 0.0], [1.0, 7.0, 6.0, 1.0]];
    Ok((0..order)
        .map(|m| {
            (0..n)
                .map(|i| Mean::Finite((0..=m).map(|j| STIRLING[m][j] * factorial[j][i]).sum()))
                .collect()
        })
        .collect())
}

/// How `Lambda(infinity)` was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HittingRegime {
    Ergodic,
    Trapped,
    Plateau,
}

impl HittingRegime {
    pub fn as_str(&self) -> &'static str {
        match self {
            HittingRegime::Ergodic => "ergodic",
            HittingRegime::Trapped => "trapped",
            HittingRegime::Plateau => "plateau",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HittingProbability {
    pub per_start: Vec<f64>,
    pub regime: HittingRegime,
}

/// Eventual hitting probabilities `1 - Lambda_i(infinity)`.
pub fn hitting_probability(ks: &KilledSystem, law: &ResetLaw, t_plateau: usize) -> Result<HittingProbability> {
    if t_plateau == 0 {
        return Err(Error::InvalidParameter("plateau horizon must be >= 1".into()));
    }
    let n = ks.n();
    if let Ok(rho) = reset_kernel_radius(ks, law) {
        if rho < 1.0 - RHO_MARGIN {
            return Ok(HittingProbability { per_start: vec![1.0; n], regime: HittingRegime::Ergodic });
        }
    }
    let disjoint = ks.relocation.support().iter().all(|&j| !ks.is_target[j]);
    if let Some(big_t) = law.max_support() {
        if disjoint && ks.relocation_target_distance() > big_t {
            // survival until the first reset, after which no target is reachable
            let mut lam = DVector::from_element(n, 1.0);
            let mut surv = DVector::zeros(n);
            for t in 1..=big_t {
                surv.axpy(law.pdf(t), &lam, 1.0);
                lam = ks.apply(&lam);
            }
            return Ok(HittingProbability {
                per_start: surv.iter().map(|s| 1.0 - s).collect(),
                regime: HittingRegime::Trapped,
            });
        }
    }
    let window = law.max_support().unwrap_or((t_plateau / 10).max(1)).min(t_plateau);
    let stats = survival_series(ks, law, t_plateau);
    let drift = (stats.survival.column(t_plateau) - stats.survival.column(t_plateau - window)).amax();
    if drift > PLATEAU_TOL {
        return Err(Error::Inconclusive(format!("survival still drifting by {drift:e} at t = {t_plateau}")));
    }
    Ok(HittingProbability {
        per_start: stats.survival.column(t_plateau).iter().map(|s| 1.0 - s).collect(),
        regime: HittingRegime::Plateau,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErgodicityClass {
    ErgodicSufficient,
    NonErgodicHallmark,
    Inconclusive,
}

impl ErgodicityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErgodicityClass::ErgodicSufficient => "ergodic-sufficient",
            ErgodicityClass::NonErgodicHallmark => "non-ergodic-hallmark",
            ErgodicityClass::Inconclusive => "inconclusive",
        }
    }
}

/// Ergodicity diagnostics. `cond_a`: `g(W)` positive; `cond_b`: `R`
/// positive; `cond_c`: `R g(W)` positive.
#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicityReport {
    pub class: ErgodicityClass,
    pub rho: f64,
    pub cond_a: bool,
    pub cond_b: bool,
    pub cond_c: bool,
}

pub fn ergodicity_check(ks: &KilledSystem, law: &ResetLaw) -> ErgodicityReport {
    let rho = reset_kernel_radius(ks, law).unwrap_or(f64::NAN);
    let class = if rho < 1.0 - RHO_MARGIN {
        ErgodicityClass::ErgodicSufficient
    } else if (rho - 1.0).abs() <= RHO_MARGIN {
        ErgodicityClass::NonErgodicHallmark
    } else {
        ErgodicityClass::Inconclusive
    };
    let (cond_a, cond_c) = positivity_scan(ks, law);
    let cond_b = ks.relocation.vector().iter().all(|&r| r > 0.0);
    ErgodicityReport { class, rho, cond_a, cond_b, cond_c }
}

/// Sparsity patterns of `g(W) = sum_k psi(k+1) W^k` and `R g(W)`, as bitsets.
fn positivity_scan(ks: &KilledSystem, law: &ResetLaw) -> (bool, bool) {
    let n = ks.n();
    let words = n.div_ceil(64);
    let full = |row: &[u64]| (0..n).all(|j| row[j / 64] >> (j % 64) & 1 == 1);
    let mut reach = vec![0u64; n * words];
    for i in 0..n {
        reach[i * words + i / 64] |= 1 << (i % 64);
    }
    let mut acc = vec![0u64; n * words];
    // W^k is positive from k = 2n - 2 on for a primitive symmetric pattern
    let k_max = law.max_support().map_or(2 * n, |t| t - 1);
    for k in 0..=k_max {
        if law.pdf(k + 1) > 0.0 {
            for (a, r) in acc.iter_mut().zip(&reach) {
                *a |= r;
            }
        }
        if k == k_max {
            break;
        }
        let mut next = vec![0u64; n * words];
        for i in 0..n {
            for &j in &ks.neighbors[i] {
                for w in 0..words {
                    next[i * words + w] |= reach[j * words + w];
                }
            }
        }
        reach = next;
    }
    let cond_a = (0..n).all(|i| full(&acc[i * words..(i + 1) * words]));
    let mut row = vec![0u64; words];
    for k in ks.relocation.support() {
        for w in 0..words {
            row[w] |= acc[k * words + w];
        }
    }
    (cond_a, full(&row))
}

/// `f(W~)` for a power series `f(x) = sum_k c_k x^k` through the block form
/// `[[f(A), 0], [C h(A), c_0]]` with `A = W_UU`, `C = W_BU` and
/// `h(x) = (f(x) - c_0) / x`; `A` is diagonalized through its symmetric
/// similarity transform.
struct BlockCalculus {
    free: Vec<usize>,
    eigen: SymmetricEigen<f64, nalgebra::Dyn>,
    sqrt_deg: Vec<f64>,
    coupling: DMatrix<f64>,
}

impl BlockCalculus {
    fn new(ks: &KilledSystem) -> BlockCalculus {
        let free: Vec<usize> = (0..ks.n()).filter(|&i| !ks.is_target[i]).collect();
        let sqrt_deg: Vec<f64> = free.iter().map(|&i| ks.degrees[i].sqrt()).collect();
        let u = free.len();
        let sym = DMatrix::from_fn(u, u, |a, b| ks.w_killed[(free[a], free[b])] * sqrt_deg[a] / sqrt_deg[b]);
        let sym = (&sym + sym.transpose()) * 0.5;
        let coupling = DMatrix::from_fn(ks.targets.len(), u, |a, b| ks.w_killed[(ks.targets[a], free[b])]);
        BlockCalculus { free, eigen: SymmetricEigen::new(sym), sqrt_deg, coupling }
    }

    fn apply(&self, ks: &KilledSystem, coeffs: &[f64], f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let u = self.free.len();
        let series = |x: f64, skip: usize| coeffs[skip..].iter().rev().fold(0.0, |acc, c| acc * x + c);
        let (fx, hx): (Vec<f64>, Vec<f64>) = self
            .eigen
            .eigenvalues
            .iter()
            .map(|&x| if x.abs() < SMALL_ARG { (series(x, 0), series(x, 1)) } else { (f(x), (f(x) - coeffs[0]) / x) })
            .unzip();
        let v = &self.eigen.eigenvectors;
        let lift = |vals: &[f64]| {
            let scaled = DMatrix::from_fn(u, u, |a, m| v[(a, m)] * vals[m]);
            let core = scaled * v.transpose();
            DMatrix::from_fn(u, u, |a, b| core[(a, b)] * self.sqrt_deg[b] / self.sqrt_deg[a])
        };
        let f_a = lift(&fx);
        let ch = &self.coupling * lift(&hx);
        let mut out = DMatrix::zeros(ks.n(), ks.n());
        for (a, &i) in self.free.iter().enumerate() {
            for (b, &j) in self.free.iter().enumerate() {
                out[(i, j)] = f_a[(a, b)];
            }
        }
        for (a, &i) in ks.targets.iter().enumerate() {
            for (b, &j) in self.free.iter().enumerate() {
                out[(i, j)] = ch[(a, b)];
            }
            out[(i, i)] = coeffs[0];
        }
        out
    }
}

fn sibuya_alpha(law: &ResetLaw) -> Result<f64> {
    match law {
        ResetLaw::Sibuya { alpha } => Ok(*alpha),
        _ => Err(Error::InvalidParameter("closed-form channel requires a Sibuya law".into())),
    }
}

/// MFHT from the closed-form Sibuya generating function, with
/// `M = (1 - W~)^(alpha-1)` and `g(W~) = (1 - (1 - W~)^alpha) W~^-1`
/// evaluated by functional calculus.
pub fn mfht_sibuya_closed(ks: &KilledSystem, law: &ResetLaw) -> Result<MfhtResult> {
    let alpha = sibuya_alpha(law)?;
    let tab = law.tables(SMALL_TERMS + 1);
    let calc = BlockCalculus::new(ks);
    let m = calc.apply(ks, &tab.phi[..SMALL_TERMS], |x| (1.0 - x).powf(alpha - 1.0));
    let g = calc.apply(ks, &tab.psi[1..=SMALL_TERMS], |x| (1.0 - (1.0 - x).powf(alpha)) / x);
    let ones = DVector::from_element(ks.n(), 1.0);
    Ok(MfhtResult::from_channels(ks, &(&m * &ones), &(&g * &ones)))
}

/// MFHT through the regularized inverse `W~ (W~^2 + eps^2)^-1` in place of
/// `W~^-1`. Only rows of non-target starts are meaningful: `W~` is singular on
/// the target coordinates, where the regularized product does not converge to
/// `g(W~)`.
pub fn mfht_sibuya_pseudo_inverse(ks: &KilledSystem, law: &ResetLaw, eps: f64) -> Result<MfhtResult> {
    let alpha = sibuya_alpha(law)?;
    let n = ks.n();
    let tab = law.tables(SMALL_TERMS);
    let calc = BlockCalculus::new(ks);
    let w = &ks.w_killed;
    let psi_bar = calc.apply(ks, &tab.psi[..SMALL_TERMS], |x| 1.0 - (1.0 - x).powf(alpha));
    let reg = w * w + DMatrix::<f64>::identity(n, n) * (eps * eps);
    let g = w * linalg::inverse(&reg)? * &psi_bar;
    let resolvent = linalg::inverse(&linalg::identity_minus(w, 1.0))?;
    let m = (DMatrix::<f64>::identity(n, n) - &psi_bar) * resolvent;
    let ones = DVector::from_element(n, 1.0);
    Ok(MfhtResult::from_channels(ks, &(&m * &ones), &(&g * &ones)))
}
