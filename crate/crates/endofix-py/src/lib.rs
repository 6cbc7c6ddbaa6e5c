//! Python bindings. Thin wrappers over the core crate; all math stays in
//! `endofix` so the two interfaces cannot diverge.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use endofix::report::{endo_report, to_canonical_json, ReportOptions};
use endofix::stallings::{is_injective, is_surjective, CoreGraph};
use endofix::words::{fixed_words_up_to, Endomorphism, Word};

fn err(e: endofix::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A reduced word in a free group. "1" is the identity; lower case letters
/// are generators, upper case their inverses.
#[pyclass(name = "Word", frozen)]
#[derive(Clone)]
struct PyWord {
    inner: Word,
}

#[pymethods]
impl PyWord {
    #[new]
    fn new(text: &str) -> PyResult<PyWord> {
        Word::parse(text).map(|inner| PyWord { inner }).map_err(err)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Word({:?})", self.inner.to_string())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: &PyWord) -> bool {
        self.inner == other.inner
    }

    fn __hash__(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.inner.hash(&mut h);
        h.finish()
    }

    /// Reduced concatenation.
    fn __mul__(&self, other: &PyWord) -> PyWord {
        PyWord { inner: self.inner.concat(&other.inner) }
    }

    fn inverse(&self) -> PyWord {
        PyWord { inner: self.inner.inverse() }
    }

    /// m^-1 w m, reduced.
    fn conjugate_by(&self, m: &PyWord) -> PyWord {
        PyWord { inner: self.inner.conjugate_by(&m.inner) }
    }

    /// Signed 1-based generator numbers, e.g. "aB" -> [1, -2].
    fn letters(&self) -> Vec<i32> {
        self.inner.letters().to_vec()
    }
}

/// An endomorphism of a free group, given by generator images.
#[pyclass(name = "Endomorphism", frozen)]
#[derive(Clone)]
struct PyEndomorphism {
    inner: Endomorphism,
}

#[pymethods]
impl PyEndomorphism {
    #[new]
    fn new(images: Vec<PyWord>) -> PyResult<PyEndomorphism> {
        let rank = images.len();
        Endomorphism::new(rank, images.into_iter().map(|w| w.inner).collect())
            .map(|inner| PyEndomorphism { inner })
            .map_err(err)
    }

    /// Parse the same text format the CLI reads (`rank: n` then one
    /// `gen -> word` line per generator; `#` starts a comment).
    #[staticmethod]
    fn parse(text: &str) -> PyResult<PyEndomorphism> {
        Endomorphism::parse_text(text)
            .map(|inner| PyEndomorphism { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn identity(rank: usize) -> PyEndomorphism {
        PyEndomorphism { inner: Endomorphism::identity(rank) }
    }

    fn __str__(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!("Endomorphism.parse({:?})", self.inner.to_text())
    }

    fn __eq__(&self, other: &PyEndomorphism) -> bool {
        self.inner == other.inner
    }

    fn rank(&self) -> usize {
        self.inner.rank()
    }

    /// Image of generator g (1-based).
    fn image(&self, g: usize) -> PyResult<PyWord> {
        if g == 0 || g > self.inner.rank() {
            return Err(PyValueError::new_err(format!(
                "generator {g} out of range 1..={}",
                self.inner.rank()
            )));
        }
        Ok(PyWord { inner: self.inner.image(g).clone() })
    }

    fn images(&self) -> Vec<PyWord> {
        self.inner.images().iter().cloned().map(|inner| PyWord { inner }).collect()
    }

    fn apply(&self, w: &PyWord) -> PyResult<PyWord> {
        self.inner.apply(&w.inner).map(|inner| PyWord { inner }).map_err(err)
    }

    /// self after other (self . other).
    fn compose(&self, other: &PyEndomorphism) -> PyResult<PyEndomorphism> {
        self.inner
            .compose(&other.inner)
            .map(|inner| PyEndomorphism { inner })
            .map_err(err)
    }

    fn power(&self, k: usize) -> PyEndomorphism {
        PyEndomorphism { inner: self.inner.power(k) }
    }

    fn is_injective(&self) -> bool {
        is_injective(&self.inner)
    }

    fn is_surjective(&self) -> bool {
        is_surjective(&self.inner)
    }

    fn abelianization(&self) -> Vec<Vec<i64>> {
        self.inner.abelianization()
    }

    /// Fixed words up to the given length (exhaustive).
    fn fixed_words(&self, max_len: usize) -> Vec<PyWord> {
        fixed_words_up_to(&self.inner, max_len)
            .into_iter()
            .map(|inner| PyWord { inner })
            .collect()
    }
}

/// Stallings core graph of the subgroup generated by the given words.
#[pyclass(name = "Subgroup", frozen)]
struct PySubgroup {
    core: CoreGraph,
}

#[pymethods]
impl PySubgroup {
    #[new]
    fn new(generators: Vec<PyWord>, rank: usize) -> PySubgroup {
        let words: Vec<Word> = generators.into_iter().map(|w| w.inner).collect();
        PySubgroup { core: CoreGraph::fold(&words, rank) }
    }

    fn rank(&self) -> usize {
        self.core.subgroup_rank()
    }

    fn contains(&self, w: &PyWord) -> bool {
        self.core.membership(&w.inner)
    }

    fn n_vertices(&self) -> usize {
        self.core.n_vertices()
    }

    fn n_edges(&self) -> usize {
        self.core.n_edges()
    }
}

/// Full fixed-point-class report as a canonical JSON string, identical to
/// `endofix analyze <file> --format json`.
#[pyfunction]
#[pyo3(signature = (phi, k_max = 1, rank_cutoff = 6))]
fn analyze_json(phi: &PyEndomorphism, k_max: usize, rank_cutoff: usize) -> PyResult<String> {
    let opts = ReportOptions { k_max, rank_cutoff, ..ReportOptions::default() };
    endo_report(&phi.inner, "<python>", &opts)
        .map(|v| to_canonical_json(&v))
        .map_err(err)
}

#[pymodule]
fn endofix_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWord>()?;
    m.add_class::<PyEndomorphism>()?;
    m.add_class::<PySubgroup>()?;
    m.add_function(wrap_pyfunction!(analyze_json, m)?)?;
    Ok(())
}
