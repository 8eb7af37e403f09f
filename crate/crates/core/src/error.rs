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

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no valid realization after {attempts} attempts")]
    RetryLimit { attempts: u32 },

    /// Stationary backward-recurrence statistics requested for a law whose
    /// mean inter-reset time diverges.
    #[error("defective limit: mean inter-reset time is infinite, f(inf,b)->0 for every finite b")]
    DefectiveLimit,

    /// The no-reset limit p -> 0 makes 1 - W singular.
    #[error("p = 0 is a singular limit; use p = {proxy:e} instead")]
    SingularLimit { proxy: f64 },

    #[error("series did not converge within {terms} terms")]
    SeriesCap { terms: usize },

    #[error("linear system is singular")]
    Singular,

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
