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

//! Discrete-time random walks on finite undirected networks under stochastic
//! renewal resetting.
//!
//! The crate covers the exact side (renewal laws, propagators, steady states,
//! first-passage and first-hitting statistics through the killed walk) and an
//! independent trajectory simulator used as an empirical cross-check.
//!
//! ```
//! use resetwalk::graph::{generate_graph, transition_matrix, GraphModel};
//! use resetwalk::firstpassage::kemeny;
//!
//! let g = generate_graph(GraphModel::Complete { n: 10 }, 0).unwrap();
//! let w = transition_matrix(&g);
//! let k = kemeny(&w, 0.5).unwrap();
//! assert!((k.kemeny - 81.0 / 9.5).abs() < 1e-10);
//! ```

pub mod cli;
pub mod error;
pub mod firstpassage;
pub mod graph;
pub mod linalg;
pub mod montecarlo;
pub mod propagator;
pub mod renewal;
pub mod rng;
pub mod survival;

pub use error::{Error, Result};

/// A mean value that may diverge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mean {
    Finite(f64),
    Infinite,
}

impl Mean {
    pub fn is_finite(&self) -> bool {
        matches!(self, Mean::Finite(_))
    }

    /// The finite value, or `None` when the mean diverges.
    pub fn value(&self) -> Option<f64> {
        match *self {
            Mean::Finite(v) => Some(v),
            Mean::Infinite => None,
        }
    }

    /// Floating-point view; divergence maps to `f64::INFINITY`.
    pub fn as_f64(&self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }
}

impl std::fmt::Display for Mean {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mean::Finite(v) => write!(f, "{v}"),
            Mean::Infinite => write!(f, "inf"),
        }
    }
}
