//! Finite-outcome POVMs, classical postprocessings, mixtures, marginals, and
//! joint observables on product outcome grids.
//!
//! Outcome labels are integers carried as metadata; all positional structure
//! (kernel columns, marginal axes) matches by position, not by label value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

/// Tolerance used when constructing observables from untrusted data (JSON
/// parsing and the default constructor).
pub const POVM_TOL: f64 = 1e-8;

/// Row-major indexing over a product outcome grid, axis 0 slowest.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct GridIndexer {
    shape: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl GridIndexer {
    pub fn new(shape: &[usize]) -> Self {
        let n = shape.len();
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * shape[k + 1];
        }
        let len = shape.iter().product();
        GridIndexer {
            shape: shape.to_vec(),
            strides,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Digit of `flat` along `axis`.
    pub fn digit(&self, flat: usize, axis: usize) -> usize {
        flat / self.strides[axis] % self.shape[axis]
    }

    pub fn decode(&self, flat: usize, out: &mut [usize]) {
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.digit(flat, k);
        }
    }
}

/// Report produced by [`validate`].
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub min_eigenvalue: f64,
    pub normalization_defect: f64,
    pub herm_defect: f64,
    pub pass: bool,
}

/// A finite-outcome POVM: Hermitian PSD effects summing to the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObservableRepr", into = "ObservableRepr")]
pub struct Observable {
    dim: usize,
    labels: Vec<i64>,
    effects: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct EffectRepr {
    label: i64,
    matrix: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct ObservableRepr {
    dim: usize,
    effects: Vec<EffectRepr>,
}

impl TryFrom<ObservableRepr> for Observable {
    type Error = Error;

    fn try_from(r: ObservableRepr) -> Result<Self> {
        let labels: Vec<i64> = r.effects.iter().map(|e| e.label).collect();
        let effects: Vec<CMatrix> = r.effects.into_iter().map(|e| e.matrix).collect();
        Observable::new(r.dim, labels, effects)
    }
}

impl From<Observable> for ObservableRepr {
    fn from(o: Observable) -> Self {
        ObservableRepr {
            dim: o.dim,
            effects: o
                .labels
                .into_iter()
                .zip(o.effects)
                .map(|(label, matrix)| EffectRepr { label, matrix })
                .collect(),
        }
    }
}

impl Observable {
    /// Builds and validates a POVM at the default tolerance [`POVM_TOL`].
    pub fn new(dim: usize, labels: Vec<i64>, effects: Vec<CMatrix>) -> Result<Self> {
        Self::with_tol(dim, labels, effects, POVM_TOL)
    }

    /// Builds and validates a POVM at an explicit tolerance.
    pub fn with_tol(dim: usize, labels: Vec<i64>, effects: Vec<CMatrix>, tol: f64) -> Result<Self> {
        if labels.len() != effects.len() {
            return Err(Error::LabelMismatch(format!(
                "{} labels for {} effects",
                labels.len(),
                effects.len()
            )));
        }
        if effects.is_empty() {
            return Err(Error::Invalid("observable needs at least one outcome".into()));
        }
        for w in 0..labels.len() {
            if labels[w + 1..].contains(&labels[w]) {
                return Err(Error::LabelMismatch(format!("duplicate label {}", labels[w])));
            }
        }
        for e in &effects {
            if e.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: e.dim(),
                });
            }
        }
        let obs = Observable {
            dim,
            labels,
            effects,
        };
        let report = validate(&obs, tol);
        if !report.pass {
            if report.herm_defect > tol {
                return Err(Error::NotHermitian {
                    defect: report.herm_defect,
                    tol,
                });
            }
            if report.min_eigenvalue < -tol {
                return Err(Error::NotPositive {
                    min_eig: report.min_eigenvalue,
                });
            }
            return Err(Error::NotNormalized {
                defect: report.normalization_defect,
            });
        }
        Ok(obs)
    }

    /// Rank-1 projective observable from the columns of a unitary, with
    /// labels 0..d.
    pub fn projective_from_basis(u: &CMatrix) -> Result<Self> {
        let d = u.dim();
        let utu = &u.adjoint() * u;
        let defect = linalg::max_abs_diff(&utu, &CMatrix::identity(d));
        if defect > 1e-10 {
            return Err(Error::NotUnitary { defect });
        }
        let effects: Vec<CMatrix> = (0..d)
            .map(|k| {
                let col = u.as_dmatrix().column(k).into_owned();
                CMatrix::outer(&col, &col).unwrap()
            })
            .collect();
        Observable::new(d, (0..d as i64).collect(), effects)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of outcomes.
    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn effect(&self, i: usize) -> &CMatrix {
        &self.effects[i]
    }
}

/// Checks the POVM conditions and reports the worst violations.
pub fn validate(obs: &Observable, tol: f64) -> ValidationReport {
    let mut min_eig = f64::INFINITY;
    let mut herm = 0.0f64;
    let mut sum = CMatrix::zeros(obs.dim);
    for e in &obs.effects {
        herm = herm.max(e.herm_defect());
        min_eig = min_eig.min(linalg::min_eigenvalue(&e.symmetrize()));
        sum = &sum + e;
    }
    let norm_defect = linalg::max_abs_diff(&sum, &CMatrix::identity(obs.dim));
    ValidationReport {
        min_eigenvalue: min_eig,
        normalization_defect: norm_defect,
        herm_defect: herm,
        pass: min_eig >= -tol && norm_defect <= tol && herm <= tol,
    }
}

/// A classical stochastic kernel f(a, g): probability of target outcome `a`
/// given source outcome `g`. Stored as kernel[a][g].
#[derive(Clone, Debug, PartialEq)]
pub struct PostProcessing {
    sources: Vec<i64>,
    targets: Vec<i64>,
    kernel: Vec<Vec<f64>>,
}

impl PostProcessing {
    pub fn new(sources: Vec<i64>, targets: Vec<i64>, kernel: Vec<Vec<f64>>) -> Result<Self> {
        if kernel.len() != targets.len() {
            return Err(Error::NotStochastic(format!(
                "{} kernel rows for {} targets",
                kernel.len(),
                targets.len()
            )));
        }
        for row in &kernel {
            if row.len() != sources.len() {
                return Err(Error::NotStochastic(format!(
                    "{} kernel columns for {} sources",
                    row.len(),
                    sources.len()
                )));
            }
            for &x in row {
                if !(-1e-12..=1.0 + 1e-12).contains(&x) {
                    return Err(Error::NotStochastic(format!("entry {x} outside [0, 1]")));
                }
            }
        }
        for g in 0..sources.len() {
            let col: f64 = kernel.iter().map(|row| row[g]).sum();
            if (col - 1.0).abs() > 1e-12 {
                return Err(Error::NotStochastic(format!(
                    "column {g} sums to {col}, expected 1"
                )));
            }
        }
        Ok(PostProcessing {
            sources,
            targets,
            kernel,
        })
    }

    /// Identity kernel on the given labels.
    pub fn identity(labels: &[i64]) -> Self {
        let n = labels.len();
        PostProcessing {
            sources: labels.to_vec(),
            targets: labels.to_vec(),
            kernel: (0..n)
                .map(|a| (0..n).map(|g| if a == g { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    /// Deterministic relabeling: target position j reads source position
    /// perm[j].
    pub fn permutation(labels: &[i64], perm: &[usize]) -> Result<Self> {
        if perm.len() != labels.len() {
            return Err(Error::LabelMismatch(format!(
                "permutation of length {} on {} labels",
                perm.len(),
                labels.len()
            )));
        }
        let mut seen = vec![false; labels.len()];
        for &p in perm {
            if p >= labels.len() || seen[p] {
                return Err(Error::LabelMismatch("not a permutation".into()));
            }
            seen[p] = true;
        }
        let targets: Vec<i64> = perm.iter().map(|&p| labels[p]).collect();
        let kernel = (0..perm.len())
            .map(|a| {
                (0..labels.len())
                    .map(|g| if perm[a] == g { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        Ok(PostProcessing {
            sources: labels.to_vec(),
            targets,
            kernel,
        })
    }

    /// Kernel merging every source outcome into a single target outcome.
    pub fn merge_all(sources: &[i64], target: i64) -> Self {
        PostProcessing {
            sources: sources.to_vec(),
            targets: vec![target],
            kernel: vec![vec![1.0; sources.len()]],
        }
    }

    pub fn sources(&self) -> &[i64] {
        &self.sources
    }

    pub fn targets(&self) -> &[i64] {
        &self.targets
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    /// Composition (self ∘ inner)(b, g) = Σ_a self(b, a) inner(a, g); `inner`
    /// runs first.
    pub fn compose(&self, inner: &PostProcessing) -> Result<PostProcessing> {
        if self.sources != inner.targets {
            return Err(Error::LabelMismatch(
                "outer kernel sources differ from inner kernel targets".into(),
            ));
        }
        let kernel: Vec<Vec<f64>> = (0..self.targets.len())
            .map(|b| {
                (0..inner.sources.len())
                    .map(|g| {
                        (0..self.sources.len())
                            .map(|a| self.kernel[b][a] * inner.kernel[a][g])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        PostProcessing::new(inner.sources.clone(), self.targets.clone(), kernel)
    }
}

/// Applies a stochastic kernel to an observable: B(a) = Σ_g f(a, g) G(g).
pub fn postprocess(obs: &Observable, f: &PostProcessing) -> Result<Observable> {
    if f.sources != obs.labels {
        return Err(Error::LabelMismatch(
            "kernel source labels differ from observable outcomes".into(),
        ));
    }
    let effects: Vec<CMatrix> = (0..f.targets.len())
        .map(|a| {
            let mut acc = CMatrix::zeros(obs.dim);
            for (g, e) in obs.effects.iter().enumerate() {
                if f.kernel[a][g] != 0.0 {
                    acc = &acc + &e.scale(f.kernel[a][g]);
                }
            }
            acc
        })
        .collect();
    Observable::with_tol(obs.dim, f.targets.clone(), effects, POVM_TOL)
}

/// Effect-wise convex combination λa + (1−λ)b.
pub fn mix(a: &Observable, b: &Observable, lambda: f64) -> Result<Observable> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange(format!("mixing weight {lambda}")));
    }
    if a.dim != b.dim {
        return Err(Error::DimMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    if a.labels != b.labels {
        return Err(Error::LabelMismatch(
            "mixed observables must share outcome labels".into(),
        ));
    }
    let effects: Vec<CMatrix> = a
        .effects
        .iter()
        .zip(&b.effects)
        .map(|(ea, eb)| &ea.scale(lambda) + &eb.scale(1.0 - lambda))
        .collect();
    Observable::with_tol(a.dim, a.labels.clone(), effects, POVM_TOL)
}

/// Two-outcome qubit spin observable ½(I ± t n̂·σ) with labels +1, −1.
pub fn noisy_spin(n_hat: [f64; 3], t: f64) -> Result<Observable> {
    let norm = (n_hat[0] * n_hat[0] + n_hat[1] * n_hat[1] + n_hat[2] * n_hat[2]).sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::OutOfRange(format!("direction norm {norm}, expected 1")));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange(format!("noise parameter t = {t}")));
    }
    let b = linalg::bloch_operator(n_hat).scale(t);
    let id = CMatrix::identity(2);
    let plus = (&id + &b).scale(0.5);
    let minus = (&id - &b).scale(0.5);
    Observable::with_tol(2, vec![1, -1], vec![plus, minus], 1e-12)
}

/// White-noise image of an observable: effect-wise tA + (1−t) tr[A] I/d.
pub fn depolarize(obs: &Observable, t: f64) -> Result<Observable> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange(format!("noise parameter t = {t}")));
    }
    let d = obs.dim;
    let effects: Vec<CMatrix> = obs
        .effects
        .iter()
        .map(|e| {
            let iso = CMatrix::identity(d).scale((1.0 - t) * e.trace_re() / d as f64);
            &e.scale(t) + &iso
        })
        .collect();
    Observable::with_tol(d, obs.labels.clone(), effects, POVM_TOL)
}

/// A POVM on a product outcome grid, stored row-major with axis 0 slowest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JointRepr", into = "JointRepr")]
pub struct JointObservable {
    dim: usize,
    axis_labels: Vec<Vec<i64>>,
    cells: Vec<CMatrix>,
    indexer: GridIndexer,
}

#[derive(Serialize, Deserialize)]
struct JointRepr {
    dim: usize,
    axes: Vec<Vec<i64>>,
    cells: Vec<CMatrix>,
}

impl TryFrom<JointRepr> for JointObservable {
    type Error = Error;

    fn try_from(r: JointRepr) -> Result<Self> {
        JointObservable::new(r.dim, r.axes, r.cells, 1e-7)
    }
}

impl From<JointObservable> for JointRepr {
    fn from(j: JointObservable) -> Self {
        JointRepr {
            dim: j.dim,
            axes: j.axis_labels,
            cells: j.cells,
        }
    }
}

impl JointObservable {
    /// Builds a joint observable from row-major cells, checking the POVM
    /// conditions at `tol`.
    pub fn new(
        dim: usize,
        axis_labels: Vec<Vec<i64>>,
        cells: Vec<CMatrix>,
        tol: f64,
    ) -> Result<Self> {
        if axis_labels.is_empty() {
            return Err(Error::Invalid("joint observable needs at least one axis".into()));
        }
        let shape: Vec<usize> = axis_labels.iter().map(|l| l.len()).collect();
        if shape.contains(&0) {
            return Err(Error::Invalid("empty outcome axis".into()));
        }
        let indexer = GridIndexer::new(&shape);
        if cells.len() != indexer.len() {
            return Err(Error::DimMismatch {
                expected: indexer.len(),
                got: cells.len(),
            });
        }
        for c in &cells {
            if c.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: c.dim(),
                });
            }
        }
        let j = JointObservable {
            dim,
            axis_labels,
            cells,
            indexer,
        };
        let report = j.validate(tol);
        if !report.pass {
            if report.herm_defect > tol {
                return Err(Error::NotHermitian {
                    defect: report.herm_defect,
                    tol,
                });
            }
            if report.min_eigenvalue < -tol {
                return Err(Error::NotPositive {
                    min_eig: report.min_eigenvalue,
                });
            }
            return Err(Error::NotNormalized {
                defect: report.normalization_defect,
            });
        }
        Ok(j)
    }

    /// Builds by evaluating `f` on every multi-index of the grid.
    pub fn build(
        dim: usize,
        axis_labels: Vec<Vec<i64>>,
        tol: f64,
        f: impl Fn(&[usize]) -> CMatrix,
    ) -> Result<Self> {
        let shape: Vec<usize> = axis_labels.iter().map(|l| l.len()).collect();
        let indexer = GridIndexer::new(&shape);
        let mut idx = vec![0usize; shape.len()];
        let mut cells = Vec::with_capacity(indexer.len());
        for flat in 0..indexer.len() {
            indexer.decode(flat, &mut idx);
            cells.push(f(&idx));
        }
        JointObservable::new(dim, axis_labels, cells, tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_axes(&self) -> usize {
        self.axis_labels.len()
    }

    pub fn shape(&self) -> &[usize] {
        self.indexer.shape()
    }

    pub fn axis_labels(&self) -> &[Vec<i64>] {
        &self.axis_labels
    }

    pub fn cells(&self) -> &[CMatrix] {
        &self.cells
    }

    pub fn cell(&self, idx: &[usize]) -> &CMatrix {
        &self.cells[self.indexer.flat(idx)]
    }

    /// POVM validation over the flattened grid.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut min_eig = f64::INFINITY;
        let mut herm = 0.0f64;
        let mut sum = CMatrix::zeros(self.dim);
        for c in &self.cells {
            herm = herm.max(c.herm_defect());
            min_eig = min_eig.min(linalg::min_eigenvalue(&c.symmetrize()));
            sum = &sum + c;
        }
        let norm_defect = linalg::max_abs_diff(&sum, &CMatrix::identity(self.dim));
        ValidationReport {
            min_eigenvalue: min_eig,
            normalization_defect: norm_defect,
            herm_defect: herm,
            pass: min_eig >= -tol && norm_defect <= tol && herm <= tol,
        }
    }

    /// Sums out all axes except `axis`.
    pub fn marginal(&self, axis: usize) -> Result<Observable> {
        if axis >= self.n_axes() {
            return Err(Error::OutOfRange(format!(
                "axis {} of {}",
                axis,
                self.n_axes()
            )));
        }
        let n_out = self.axis_labels[axis].len();
        let mut effects = vec![CMatrix::zeros(self.dim); n_out];
        for flat in 0..self.cells.len() {
            let a = self.indexer.digit(flat, axis);
            effects[a] = &effects[a] + &self.cells[flat];
        }
        Observable::with_tol(self.dim, self.axis_labels[axis].clone(), effects, 1e-7)
    }

    /// Largest entrywise deviation of any marginal from the corresponding
    /// target observable.
    pub fn marginal_defect(&self, targets: &[Observable]) -> Result<f64> {
        if targets.len() != self.n_axes() {
            return Err(Error::DimMismatch {
                expected: self.n_axes(),
                got: targets.len(),
            });
        }
        let mut worst = 0.0f64;
        for (k, target) in targets.iter().enumerate() {
            if target.outcomes() != self.axis_labels[k].len() {
                return Err(Error::LabelMismatch(format!(
                    "axis {k} has {} outcomes, target has {}",
                    self.axis_labels[k].len(),
                    target.outcomes()
                )));
            }
            let mut sums = vec![CMatrix::zeros(self.dim); target.outcomes()];
            for flat in 0..self.cells.len() {
                let a = self.indexer.digit(flat, k);
                sums[a] = &sums[a] + &self.cells[flat];
            }
            for (a, s) in sums.iter().enumerate() {
                worst = worst.max(linalg::max_abs_diff(s, target.effect(a)));
            }
        }
        Ok(worst)
    }
}

/// Builds the standard trine: three rank-1 qubit effects (2/3)|φ_k⟩⟨φ_k| with
/// Bloch vectors at 120° in the x-z plane.
pub fn trine() -> Observable {
    let effects: Vec<CMatrix> = (0..3)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let u = [theta.sin(), 0.0, theta.cos()];
            let id = CMatrix::identity(2);
            (&id + &linalg::bloch_operator(u)).scale(1.0 / 3.0)
        })
        .collect();
    Observable::with_tol(2, vec![0, 1, 2], effects, 1e-12).unwrap()
}

/// Real scalar product helper: tr[ρ A] for Hermitian inputs.
pub fn pairing(rho: &CMatrix, a: &CMatrix) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            acc += rho[(i, j)] * a[(j, i)];
        }
    }
    acc.re
}
