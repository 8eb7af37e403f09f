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

//! Discrete renewal laws for the times between resets.
//!
//! A law is described by its inter-reset PDF `psi(t)` on `t >= 1`. From it
//! follow the persistence `Phi(t)` (no reset in `1..=t`), the resetting rate
//! `R(t)` (a reset happens exactly at `t`) and the backward recurrence PDF
//! `f(t, b)` of the delay since the last reset.
//!
//! Sibuya quantities are evaluated with multiplicative recursions; the Gamma
//! function ratios overflow long before the horizons used here.

use rand::distr::{Distribution, Open01};
use rand::Rng;

use crate::error::{Error, Result};
use crate::Mean;

/// Horizon up to which Sibuya persistence is tabulated before the sampler
/// switches to the asymptotic expansion.
const SIBUYA_SCAN: usize = 10_000;

/// Inter-reset time distribution.
#[derive(Clone, Debug, PartialEq)]
pub enum ResetLaw {
    /// `psi(t) = p q^(t-1)`, memoryless.
    Geometric { p: f64 },
    /// Fat-tailed law with generating function `1 - (1-u)^alpha`.
    Sibuya { alpha: f64 },
    /// `weights[k]` is `psi(k + 1)`; the horizon is `weights.len()`.
    FiniteSupport { weights: Vec<f64> },
    /// Point mass at `period`.
    DeterministicPeriod { period: usize },
}

impl ResetLaw {
    pub fn geometric(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!("geometric p = {p} outside (0, 1]")));
        }
        Ok(ResetLaw::Geometric { p })
    }

    pub fn sibuya(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("sibuya alpha = {alpha} outside (0, 1)")));
        }
        Ok(ResetLaw::Sibuya { alpha })
    }

    pub fn finite_support(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("finite-support law needs at least one weight".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter("finite-support weights must be non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("finite-support weights sum to {total}, not 1")));
        }
        Ok(ResetLaw::FiniteSupport { weights })
    }

    /// Uniform law on `1..=horizon`.
    pub fn uniform(horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidParameter("uniform law needs horizon >= 1".into()));
        }
        Ok(ResetLaw::FiniteSupport { weights: vec![1.0 / horizon as f64; horizon] })
    }

    pub fn deterministic(period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidParameter("period must be >= 1".into()));
        }
        Ok(ResetLaw::DeterministicPeriod { period })
    }

    /// Parse a finite-support law from CSV with columns `t, psi`. Times must
    /// be `1..=T` without gaps; a header row and `#` comments are allowed.
    pub fn finite_support_from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut weights = Vec::new();
        for (idx, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = rec.position().map_or(idx + 1, |p| p.line() as usize);
            if rec.len() != 2 {
                return Err(Error::Parse { line, message: "expected columns t, psi".into() });
            }
            let Ok(t) = rec[0].parse::<usize>() else {
                if idx == 0 {
                    continue;
                }
                return Err(Error::Parse { line, message: format!("bad time '{}'", &rec[0]) });
            };
            let psi: f64 = rec[1]
                .parse()
                .map_err(|_| Error::Parse { line, message: format!("bad probability '{}'", &rec[1]) })?;
            if t != weights.len() + 1 {
                return Err(Error::Parse { line, message: format!("expected t = {}, found {t}", weights.len() + 1) });
            }
            weights.push(psi);
        }
        Self::finite_support(weights)
    }

    /// `psi(t)`.
    pub fn pdf(&self, t: usize) -> f64 {
        if t == 0 {
            return 0.0;
        }
        match self {
            ResetLaw::Geometric { p } => p * (1.0 - p).powi(t as i32 - 1),
            ResetLaw::Sibuya { alpha } => {
                let mut psi = *alpha;
                for k in 1..t {
                    psi *= (k as f64 - alpha) / (k as f64 + 1.0);
                }
                psi
            }
            ResetLaw::FiniteSupport { weights } => weights.get(t - 1).copied().unwrap_or(0.0),
            ResetLaw::DeterministicPeriod { period } => f64::from(u8::from(t == *period)),
        }
    }

    /// Generating function `sum_t psi(t) u^t`.
    pub fn gf(&self, u: f64) -> f64 {
        match self {
            ResetLaw::Geometric { p } => p * u / (1.0 - (1.0 - p) * u),
            ResetLaw::Sibuya { alpha } => 1.0 - (1.0 - u).powf(*alpha),
            ResetLaw::FiniteSupport { weights } => {
                weights.iter().rev().fold(0.0, |acc, w| (acc + w) * u)
            }
            ResetLaw::DeterministicPeriod { period } => u.powi(*period as i32),
        }
    }

    /// `Phi(t)`: probability of no reset in `1..=t`.
    pub fn persistence(&self, t: usize) -> f64 {
        match self {
            ResetLaw::Geometric { p } => (1.0 - p).powi(t as i32),
            ResetLaw::Sibuya { alpha } => {
                (1..=t).fold(1.0, |phi, k| phi * (k as f64 - alpha) / k as f64)
            }
            ResetLaw::FiniteSupport { weights } => weights.iter().skip(t).sum(),
            ResetLaw::DeterministicPeriod { period } => f64::from(u8::from(t < *period)),
        }
    }

    /// `R(t)`: probability that a reset occurs exactly at `t`.
    pub fn resetting_rate(&self, t: usize) -> f64 {
        if t == 0 {
            return 0.0;
        }
        match self {
            ResetLaw::Geometric { p } => *p,
            ResetLaw::DeterministicPeriod { period } => f64::from(u8::from(t % period == 0)),
            _ => self.tables(t).rate[t],
        }
    }

    /// Mean inter-reset time.
    pub fn mean_interval(&self) -> Mean {
        match self {
            ResetLaw::Geometric { p } => Mean::Finite(1.0 / p),
            ResetLaw::Sibuya { .. } => Mean::Infinite,
            ResetLaw::FiniteSupport { weights } => {
                Mean::Finite(weights.iter().enumerate().map(|(k, w)| (k + 1) as f64 * w).sum())
            }
            ResetLaw::DeterministicPeriod { period } => Mean::Finite(*period as f64),
        }
    }

    /// Largest `t` with `psi(t) > 0`, if the support is finite.
    pub fn max_support(&self) -> Option<usize> {
        match self {
            ResetLaw::Geometric { p } if *p == 1.0 => Some(1),
            ResetLaw::Geometric { .. } | ResetLaw::Sibuya { .. } => None,
            ResetLaw::FiniteSupport { weights } => weights.iter().rposition(|w| *w > 0.0).map(|k| k + 1),
            ResetLaw::DeterministicPeriod { period } => Some(*period),
        }
    }

    /// `psi`, `Phi` and `R` on `0..=t_max`.
    pub fn tables(&self, t_max: usize) -> RenewalTables {
        let len = t_max + 1;
        let mut psi = vec![0.0; len];
        let mut phi = vec![1.0; len];
        let mut rate = vec![0.0; len];
        match self {
            ResetLaw::Geometric { p } => {
                let q = 1.0 - p;
                for t in 1..len {
                    psi[t] = p * phi[t - 1];
                    phi[t] = q * phi[t - 1];
                    rate[t] = *p;
                }
            }
            ResetLaw::Sibuya { alpha } => {
                let mut h = 1.0;
                for t in 1..len {
                    let tf = t as f64;
                    psi[t] = if t == 1 { *alpha } else { psi[t - 1] * (tf - 1.0 - alpha) / tf };
                    phi[t] = phi[t - 1] * (tf - alpha) / tf;
                    h *= (tf - 1.0 + alpha) / tf;
                    rate[t] = h;
                }
            }
            ResetLaw::FiniteSupport { weights } => {
                for t in 1..len {
                    psi[t] = weights.get(t - 1).copied().unwrap_or(0.0);
                    phi[t] = weights.iter().skip(t).sum();
                }
                rate = renewal_density(&psi);
            }
            ResetLaw::DeterministicPeriod { period } => {
                for t in 1..len {
                    psi[t] = f64::from(u8::from(t == *period));
                    phi[t] = f64::from(u8::from(t < *period));
                    rate[t] = f64::from(u8::from(t % period == 0));
                }
            }
        }
        RenewalTables { psi, phi, rate }
    }

    /// `f(t, b)`: probability that the last reset before or at `t` happened
    /// at `t - b` (with `b = t` meaning no reset yet).
    pub fn backward_recurrence(&self, t: usize, b: usize) -> f64 {
        if b > t {
            return 0.0;
        }
        let tab = self.tables(t);
        tab.phi[b] * (f64::from(u8::from(b == t)) + tab.rate[t - b])
    }

    /// Stationary `f(inf, b) = Phi(b) / <dt>`.
    pub fn backward_recurrence_stationary(&self, b: usize) -> Result<f64> {
        match self.mean_interval() {
            Mean::Finite(m) => Ok(self.persistence(b) / m),
            Mean::Infinite => Err(Error::DefectiveLimit),
        }
    }

    /// `sum_b f(t, b) v^b`.
    pub fn backward_recurrence_gf(&self, t: usize, v: f64) -> f64 {
        self.tables(t).backward_gf(t, v)
    }

    /// Probabilities `Phi_n(t)` of exactly `n` resets in `1..=t`, indexed
    /// `[n][t]` for `n <= n_max`, `t <= t_max`.
    pub fn state_probabilities(&self, n_max: usize, t_max: usize) -> Vec<Vec<f64>> {
        let tab = self.tables(t_max);
        let mut out = vec![tab.phi.clone()];
        for n in 1..=n_max {
            let prev = &out[n - 1];
            let next: Vec<f64> = (0..=t_max)
                .map(|t| (1..=t).map(|r| tab.psi[r] * prev[t - r]).sum())
                .collect();
            out.push(next);
        }
        out
    }

    pub fn state_probability(&self, n: usize, t: usize) -> f64 {
        self.state_probabilities(n, t)[n][t]
    }

    /// Time-domain memory kernel `K(0..=t_max)` whose generating function is
    /// `(1-u) psi(u) / (1 - psi(u))`. The law is memoryless iff `K(t) = 0`
    /// for every `t > 1`.
    pub fn memory_kernel(&self, t_max: usize) -> Vec<f64> {
        let psi: Vec<f64> = (0..=t_max).map(|t| self.pdf(t)).collect();
        let ratio = series_divide(&psi, &one_minus(&psi));
        (0..=t_max)
            .map(|t| ratio[t] - if t > 0 { ratio[t - 1] } else { 0.0 })
            .collect()
    }

    /// True when the memory kernel vanishes beyond `t = 1` up to `t_max`.
    pub fn is_memoryless(&self, t_max: usize) -> bool {
        self.memory_kernel(t_max).iter().skip(2).all(|k| k.abs() < 1e-12)
    }

    /// One inter-reset interval, by inverse CDF: the smallest `t >= 1` with
    /// `Phi(t) < U`, `U` uniform on `(0, 1)`.
    ///
    /// For Sibuya laws intervals beyond `2^53` are returned as `u64::MAX`.
    pub fn sample_interval<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = Open01.sample(rng);
        match self {
            ResetLaw::Geometric { p } => geometric_inverse(*p, u),
            ResetLaw::Sibuya { alpha } => {
                let mut phi = 1.0;
                for t in 1..=SIBUYA_SCAN {
                    phi = phi * (t as f64 - alpha) / t as f64;
                    if phi < u {
                        return t as u64;
                    }
                }
                sibuya_tail_inverse(*alpha, SIBUYA_SCAN as u64, phi.ln(), u.ln())
            }
            ResetLaw::FiniteSupport { weights } => {
                // persistence as a tail sum vanishes exactly at the horizon
                (1..=weights.len())
                    .find(|&t| weights[t..].iter().sum::<f64>() < u)
                    .unwrap_or(weights.len()) as u64
            }
            ResetLaw::DeterministicPeriod { period } => *period as u64,
        }
    }
}

/// Open-ended stream of `(psi(t), Phi(t))` for `t = 0, 1, 2, ...`, using the
/// same recursions as [`ResetLaw::tables`].
#[derive(Clone, Debug)]
pub struct RenewalStream<'a> {
    law: &'a ResetLaw,
    t: usize,
    psi: f64,
    phi: f64,
}

impl<'a> RenewalStream<'a> {
    pub fn new(law: &'a ResetLaw) -> Self {
        RenewalStream { law, t: 0, psi: 0.0, phi: 1.0 }
    }
}

impl Iterator for RenewalStream<'_> {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<(f64, f64)> {
        let t = self.t;
        if t > 0 {
            let tf = t as f64;
            match self.law {
                ResetLaw::Geometric { p } => {
                    self.psi = p * self.phi;
                    self.phi *= 1.0 - p;
                }
                ResetLaw::Sibuya { alpha } => {
                    self.psi = if t == 1 { *alpha } else { self.psi * (tf - 1.0 - alpha) / tf };
                    self.phi = self.phi * (tf - alpha) / tf;
                }
                ResetLaw::FiniteSupport { weights } => {
                    self.psi = weights.get(t - 1).copied().unwrap_or(0.0);
                    self.phi = weights.iter().skip(t).sum();
                }
                ResetLaw::DeterministicPeriod { period } => {
                    self.psi = f64::from(u8::from(t == *period));
                    self.phi = f64::from(u8::from(t < *period));
                }
            }
        }
        self.t += 1;
        Some((self.psi, self.phi))
    }
}

/// Tabulated `psi`, `Phi` and `R` on `0..=t_max`.
#[derive(Clone, Debug)]
pub struct RenewalTables {
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    pub rate: Vec<f64>,
}

impl RenewalTables {
    pub fn horizon(&self) -> usize {
        self.psi.len() - 1
    }

    /// `f(t, b)` from the tables, `t <= horizon`.
    pub fn backward(&self, t: usize, b: usize) -> f64 {
        if b > t {
            return 0.0;
        }
        self.phi[b] * (f64::from(u8::from(b == t)) + self.rate[t - b])
    }

    /// `sum_b f(t, b) v^b`, `t <= horizon`.
    pub fn backward_gf(&self, t: usize, v: f64) -> f64 {
        let mut acc = self.phi[t] * v.powi(t as i32);
        let mut vb = 1.0;
        for b in 0..t {
            acc += self.rate[t - b] * self.phi[b] * vb;
            vb *= v;
        }
        acc
    }
}

/// Inverse-CDF sampler with the Sibuya persistence precomputed.
#[derive(Clone, Debug)]
pub struct IntervalSampler {
    law: ResetLaw,
    // strictly decreasing persistence on 1..=SIBUYA_SCAN (Sibuya only)
    phi: Vec<f64>,
}

impl IntervalSampler {
    pub fn new(law: &ResetLaw) -> Self {
        let phi = match law {
            ResetLaw::Sibuya { .. } => law.tables(SIBUYA_SCAN).phi,
            _ => Vec::new(),
        };
        IntervalSampler { law: law.clone(), phi }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self.law {
            ResetLaw::Sibuya { alpha } => {
                let u: f64 = Open01.sample(rng);
                // phi[0] = 1 >= u always
                let t = self.phi.partition_point(|&x| x >= u);
                if t <= SIBUYA_SCAN {
                    t as u64
                } else {
                    sibuya_tail_inverse(alpha, SIBUYA_SCAN as u64, self.phi[SIBUYA_SCAN].ln(), u.ln())
                }
            }
            _ => self.law.sample_interval(rng),
        }
    }
}

fn geometric_inverse(p: f64, u: f64) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    let lq = (1.0 - p).ln();
    let guess = (u.ln() / lq).floor();
    if !(guess < 9.0e15) {
        return u64::MAX;
    }
    let mut t = guess as u64 + 1;
    // correct rounding in the logarithms
    while t > 1 && (lq * (t - 1) as f64).exp() < u {
        t -= 1;
    }
    while (lq * t as f64).exp() >= u {
        t += 1;
    }
    t
}

/// `sum_{k=s+1}^{t} k^-j` by Euler-Maclaurin.
fn power_sum(j: u32, s: f64, t: f64) -> f64 {
    if j == 1 {
        let h = |n: f64| n.ln() + 0.5 / n - 1.0 / (12.0 * n * n) + 1.0 / (120.0 * n.powi(4));
        h(t) - h(s)
    } else {
        let jf = f64::from(j);
        let tail = |n: f64| {
            n.powf(1.0 - jf) / (jf - 1.0) - 0.5 * n.powf(-jf) + jf * n.powf(-jf - 1.0) / 12.0
                - jf * (jf + 1.0) * (jf + 2.0) * n.powf(-jf - 3.0) / 720.0
        };
        tail(s) - tail(t)
    }
}

/// `ln Phi(t)` for `t > s` given `ln Phi(s)`, from
/// `ln(1 - a/k) = -sum_j a^j / (j k^j)` truncated at `j = 4`.
fn sibuya_log_persistence(alpha: f64, s: u64, log_phi_s: f64, t: u64) -> f64 {
    let (s, t) = (s as f64, t as f64);
    let mut acc = log_phi_s;
    let mut a = 1.0;
    for j in 1..=4u32 {
        a *= alpha;
        acc -= a / f64::from(j) * power_sum(j, s, t);
    }
    acc
}

fn sibuya_tail_inverse(alpha: f64, s: u64, log_phi_s: f64, log_u: f64) -> u64 {
    const LIMIT: u64 = 1 << 53;
    let mut lo = s;
    let mut hi = s.saturating_mul(2);
    while sibuya_log_persistence(alpha, s, log_phi_s, hi) >= log_u {
        lo = hi;
        if hi >= LIMIT {
            return u64::MAX;
        }
        hi = (hi * 2).min(LIMIT);
    }
    // invariant: Phi(lo) >= u > Phi(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if sibuya_log_persistence(alpha, s, log_phi_s, mid) >= log_u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Renewal density `R = psi + psi * R` for a PDF table with `psi[0] = 0`.
fn renewal_density(psi: &[f64]) -> Vec<f64> {
    let support: Vec<usize> = (1..psi.len()).filter(|&k| psi[k] != 0.0).collect();
    let mut rate = vec![0.0; psi.len()];
    for t in 1..psi.len() {
        let mut acc = psi[t];
        for &k in support.iter().take_while(|&&k| k < t) {
            acc += psi[k] * rate[t - k];
        }
        rate[t] = acc;
    }
    rate
}

fn one_minus(a: &[f64]) -> Vec<f64> {
    a.iter().enumerate().map(|(k, x)| if k == 0 { 1.0 - x } else { -x }).collect()
}

/// Truncated power-series quotient `num / den`, `den[0] != 0`.
pub(crate) fn series_divide(num: &[f64], den: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; num.len()];
    for t in 0..num.len() {
        let mut acc = num[t];
        for k in 1..=t.min(den.len() - 1) {
            acc -= den[k] * out[t - k];
        }
        out[t] = acc / den[0];
    }
    out
}
