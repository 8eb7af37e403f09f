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


//! Python bindings for `resetwalk`. Matrices cross the boundary as nested lists.

use nalgebra::DMatrix;
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use resetwalk::firstpassage;
use resetwalk::graph::{self, GraphModel, TransitionMatrix};
use resetwalk::montecarlo::{self, SimConfig, Statistic};
use resetwalk::propagator::{self, RelocationVector};
use resetwalk::renewal;
use resetwalk::survival as killed;
use resetwalk::{Error, Mean};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Parse { .. } | Error::InvalidGraph(_) | Error::InvalidParameter(_) => PyValueError::new_err(e.to_string()),
        Error::SingularLimit { .. } | Error::SeriesCap { .. } | Error::Singular | Error::Inconclusive(_) | Error::DefectiveLimit => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn mean(m: Mean) -> f64 {
    m.value().unwrap_or(f64::INFINITY)
}

/// Undirected network together with its base random-walk matrix.
#[pyclass(module = "resetwalk", frozen)]
struct Graph {
    graph: graph::Graph,
    walk: TransitionMatrix,
}

impl Graph {
    fn wrap(graph: graph::Graph) -> Self {
        let walk = graph::transition_matrix(&graph);
        Graph { graph, walk }
    }

    fn relocation(&self, r: Option<Vec<f64>>) -> PyResult<RelocationVector> {
        match r {
            Some(w) => RelocationVector::from_weights(w).map_err(py_err),
            None => Ok(RelocationVector::uniform(self.graph.n())),
        }
    }
}

#[pymethods]
impl Graph {
    #[staticmethod]
    #[pyo3(signature = (n, m, rewire, seed = 0))]
    fn watts_strogatz(n: usize, m: usize, rewire: f64, seed: u64) -> PyResult<Self> {
        graph::generate_graph(GraphModel::WattsStrogatz { n, m, rewire }, seed).map(Self::wrap).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (n, m, seed = 0))]
    fn barabasi_albert(n: usize, m: usize, seed: u64) -> PyResult<Self> {
        graph::generate_graph(GraphModel::BarabasiAlbert { n, m }, seed).map(Self::wrap).map_err(py_err)
    }

    #[staticmethod]
    fn complete(n: usize) -> PyResult<Self> {
        graph::generate_graph(GraphModel::Complete { n }, 0).map(Self::wrap).map_err(py_err)
    }

    #[staticmethod]
    fn from_edges(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        let g = graph::Graph::from_edges(n, &edges).map_err(py_err)?;
        if !graph::validate(&g).is_valid() {
            return Err(PyValueError::new_err("graph must be connected and non-bipartite"));
        }
        Ok(Self::wrap(g))
    }

    #[getter]
    fn n(&self) -> usize {
        self.graph.n()
    }

    fn degrees(&self) -> Vec<usize> {
        self.graph.degrees()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.graph.edges()
    }

    fn transition_matrix(&self) -> Vec<Vec<f64>> {
        rows(self.walk.w())
    }

    fn stationary(&self) -> Vec<f64> {
        self.walk.stationary().iter().copied().collect()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, edges={})", self.graph.n(), self.graph.degree_sum() / 2)
    }
}

/// Discrete inter-reset time distribution.
#[pyclass(module = "resetwalk", frozen)]
struct ResetLaw {
    law: renewal::ResetLaw,
}

#[pymethods]
impl ResetLaw {
    #[staticmethod]
    fn geometric(p: f64) -> PyResult<Self> {
        renewal::ResetLaw::geometric(p).map(|law| ResetLaw { law }).map_err(py_err)
    }

    #[staticmethod]
    fn sibuya(alpha: f64) -> PyResult<Self> {
        renewal::ResetLaw::sibuya(alpha).map(|law| ResetLaw { law }).map_err(py_err)
    }

    #[staticmethod]
    fn finite_support(weights: Vec<f64>) -> PyResult<Self> {
        renewal::ResetLaw::finite_support(weights).map(|law| ResetLaw { law }).map_err(py_err)
    }

    #[staticmethod]
    fn uniform(horizon: usize) -> PyResult<Self> {
        renewal::ResetLaw::uniform(horizon).map(|law| ResetLaw { law }).map_err(py_err)
    }

    #[staticmethod]
    fn deterministic(period: usize) -> PyResult<Self> {
        renewal::ResetLaw::deterministic(period).map(|law| ResetLaw { law }).map_err(py_err)
    }

    fn pdf(&self, t: usize) -> f64 {
        self.law.pdf(t)
    }

    fn persistence(&self, t: usize) -> f64 {
        self.law.persistence(t)
    }

    fn resetting_rate(&self, t: usize) -> f64 {
        self.law.resetting_rate(t)
    }

    fn mean_interval(&self) -> f64 {
        mean(self.law.mean_interval())
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.law)
    }
}

/// P(t) for t = 0..=t_max under renewal resetting.
#[pyfunction]
#[pyo3(signature = (graph, law, t_max, relocation = None))]
fn propagate(graph: &Graph, law: &ResetLaw, t_max: usize, relocation: Option<Vec<f64>>) -> PyResult<Vec<Vec<Vec<f64>>>> {
    let rel = graph.relocation(relocation)?;
    let series = propagator::propagate(&graph.walk, &rel, &law.law, t_max);
    Ok(series.matrices.iter().map(rows).collect())
}

/// Long-time occupation row and whether a true steady state exists.
#[pyfunction]
#[pyo3(signature = (graph, law, relocation = None))]
fn ness(graph: &Graph, law: &ResetLaw, relocation: Option<Vec<f64>>) -> PyResult<(Vec<f64>, bool)> {
    let rel = graph.relocation(relocation)?;
    let res = propagator::ness(&graph.walk, &rel, &law.law).map_err(py_err)?;
    Ok((res.row.iter().copied().collect(), res.exists))
}

#[pyfunction]
#[pyo3(signature = (graph, p, relocation = None))]
fn mfpt(graph: &Graph, p: f64, relocation: Option<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let rel = graph.relocation(relocation)?;
    firstpassage::mfpt_matrix(&graph.walk, &rel, p).map(|t| rows(&t)).map_err(py_err)
}

/// (Kemeny constant, efficiency) for geometric resetting with rate p.
#[pyfunction]
fn kemeny(graph: &Graph, p: f64) -> PyResult<(f64, f64)> {
    firstpassage::kemeny(&graph.walk, p).map(|k| (k.kemeny, k.efficiency)).map_err(py_err)
}

/// Per-start and global mean first hitting time of the target set.
#[pyfunction]
#[pyo3(signature = (graph, law, targets, relocation = None))]
fn mfht(graph: &Graph, law: &ResetLaw, targets: Vec<usize>, relocation: Option<Vec<f64>>) -> PyResult<(Vec<f64>, f64)> {
    let rel = graph.relocation(relocation)?;
    let ks = killed::kill(&graph.walk, &rel, &targets).map_err(py_err)?;
    let res = killed::mfht(&ks, &law.law).map_err(py_err)?;
    Ok((res.per_start.into_iter().map(mean).collect(), mean(res.global)))
}

/// Survival curves, one row per start, for t = 0..=t_max.
#[pyfunction]
#[pyo3(signature = (graph, law, targets, t_max, relocation = None))]
fn survival(
    graph: &Graph,
    law: &ResetLaw,
    targets: Vec<usize>,
    t_max: usize,
    relocation: Option<Vec<f64>>,
) -> PyResult<Vec<Vec<f64>>> {
    let rel = graph.relocation(relocation)?;
    let ks = killed::kill(&graph.walk, &rel, &targets).map_err(py_err)?;
    Ok(rows(&killed::survival_series(&ks, &law.law, t_max).survival))
}

/// Monte Carlo estimate: returns (estimate, std_error, censored).
#[pyfunction]
#[pyo3(signature = (graph, law, start, horizon, trials, seed, statistic = "mfht", targets = None, relocation = None))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    graph: &Graph,
    law: &ResetLaw,
    start: usize,
    horizon: u64,
    trials: usize,
    seed: u64,
    statistic: &str,
    targets: Option<Vec<usize>>,
    relocation: Option<Vec<f64>>,
) -> PyResult<(Vec<f64>, Vec<f64>, usize)> {
    let stat = match statistic {
        "mfht" => Statistic::Mfht,
        "survival" => Statistic::Survival,
        "occupation" => Statistic::Occupation { t: horizon },
        "reset-rate" => Statistic::ResetRate,
        other => return Err(PyValueError::new_err(format!("unknown statistic '{other}'"))),
    };
    let cfg = SimConfig {
        start,
        horizon,
        trials,
        seed,
        law: law.law.clone(),
        relocation: graph.relocation(relocation)?,
        targets,
    };
    let est = montecarlo::estimate(&graph.walk, &cfg, &stat).map_err(py_err)?;
    Ok((est.estimate, est.std_error, est.censored))
}

#[pymodule]
fn resetwalk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<ResetLaw>()?;
    m.add_function(wrap_pyfunction!(propagate, m)?)?;
    m.add_function(wrap_pyfunction!(ness, m)?)?;
    m.add_function(wrap_pyfunction!(mfpt, m)?)?;
    m.add_function(wrap_pyfunction!(kemeny, m)?)?;
    m.add_function(wrap_pyfunction!(mfht, m)?)?;
    m.add_function(wrap_pyfunction!(survival, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
