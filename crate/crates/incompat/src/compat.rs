//! Joint-measurability decisions and white-noise robustness.
//!
//! The engine alternates projections between the affine set of operator
//! families with prescribed marginals and the cone of families whose cells
//! are all PSD. A feasible problem yields an explicit joint observable with
//! exact marginals; an infeasible one yields a witness family w_k(a) whose
//! pairing with the targets exceeds its spectral bound over the cone, which
//! no joint observable can satisfy. The witness also certifies a lower bound
//! on the Frobenius distance from any per-cell-PSD family to the marginal
//! constraints, and verdicts are re-validated from the stored witness alone.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::observables::{self, GridIndexer, JointObservable, Observable};

/// Maximum solver probes a robustness search may spend.
const MAX_PROBES: usize = 64;

/// Knobs for the joint-measurability engine.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Validation tolerance for returned joints (PSD slack and marginal
    /// deviation). The feasibility rounding threshold is tol/10.
    pub tol: f64,
    /// A problem is declared infeasible once the certified distance lower
    /// bound stays above this for `stability_window` iterations.
    pub infeas_tol: f64,
    pub max_iters: usize,
    pub stability_window: usize,
    /// Maximum number of grid cells (product of outcome counts).
    pub grid_cap: usize,
    pub herm_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-7,
            infeas_tol: 1e-5,
            max_iters: 40_000,
            stability_window: 200,
            grid_cap: 1024,
            herm_tol: 1e-10,
        }
    }
}

impl SolverOptions {
    /// Validates the option invariants without running anything.
    pub fn check(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.infeas_tol > 0.0 && self.herm_tol > 0.0) {
            return Err(Error::OutOfRange("solver tolerances must be positive".into()));
        }
        if self.infeas_tol < self.tol {
            return Err(Error::OutOfRange(
                "infeasibility threshold below joint validation tolerance".into(),
            ));
        }
        if self.max_iters < self.stability_window || self.stability_window == 0 {
            return Err(Error::OutOfRange(
                "iteration budget smaller than the stability window".into(),
            ));
        }
        Ok(())
    }

    fn feas_tol(&self) -> f64 {
        self.tol * 0.1
    }
}

/// Outcome of a joint-measurability check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Compatible,
    Incompatible,
    Undecided,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Compatible => "COMPATIBLE",
            Verdict::Incompatible => "INCOMPATIBLE",
            Verdict::Undecided => "UNDECIDED",
        };
        f.write_str(s)
    }
}

/// Infeasibility witness: a family w_k(a) of Hermitian matrices, one per
/// outcome of each observable.
///
/// Every joint observable G with the prescribed marginals B_k satisfies both
/// Σ_{k,a} tr[w_k(a) B_k(a)] = ⟨v, G⟩ and ⟨v, G⟩ ≤ d·max_cell λ_max(v), where
/// v(a⃗) = Σ_k w_k(a⃗_k). A positive `margin` therefore proves no joint
/// exists, and `distance_lb` bounds from below the Frobenius distance of any
/// per-cell-PSD family from the marginal constraints.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub witness: Vec<Vec<CMatrix>>,
    /// s = Σ_{k,a} tr[w_k(a) B_k(a)].
    pub pairing: f64,
    /// d · max_cell λ_max(Σ_k w_k(a⃗_k)).
    pub spectral_bound: f64,
    /// pairing − spectral_bound; positive proves infeasibility.
    pub margin: f64,
    pub distance_lb: f64,
}

/// Result of [`joint_measurability`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompatResult {
    pub verdict: Verdict,
    pub joint: Option<JointObservable>,
    pub certificate: Option<Certificate>,
    pub iterations: usize,
    /// Final gap diagnostic: for INCOMPATIBLE/UNDECIDED the last affine step
    /// size, for COMPATIBLE the worst cell negativity before rounding.
    pub residual: f64,
}

/// Result of [`white_noise_robustness`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RobustnessResult {
    /// Midpoint of the final bracket.
    pub t_star: f64,
    /// (largest certified-compatible t, smallest certified-incompatible t,
    /// or 1 if none).
    pub bracket: (f64, f64),
    /// Joint observable witnessing compatibility at noise level bracket.0.
    pub joint: Option<JointObservable>,
    /// Infeasibility certificate at noise level bracket.1.
    pub certificate: Option<Certificate>,
    /// Whether the bracket was narrowed to the requested resolution.
    pub converged: bool,
    pub probes: usize,
}

/// Recomputes a certificate from a stored witness family against the given
/// observables, using full eigendecompositions. Shapes must match the
/// observables outcome for outcome.
pub fn evaluate_witness(witness: &[Vec<CMatrix>], targets: &[Observable]) -> Result<Certificate> {
    if witness.len() != targets.len() || targets.is_empty() {
        return Err(Error::LabelMismatch(format!(
            "witness for {} observables, got {}",
            targets.len(),
            witness.len()
        )));
    }
    let d = targets[0].dim();
    let mut clean: Vec<Vec<CMatrix>> = Vec::with_capacity(witness.len());
    for (k, (wk, target)) in witness.iter().zip(targets).enumerate() {
        if wk.len() != target.outcomes() {
            return Err(Error::LabelMismatch(format!(
                "axis {k}: {} witness blocks for {} outcomes",
                wk.len(),
                target.outcomes()
            )));
        }
        if target.dim() != d {
            return Err(Error::DimMismatch {
                expected: d,
                got: target.dim(),
            });
        }
        let mut row = Vec::with_capacity(wk.len());
        for w in wk {
            if w.dim() != d {
                return Err(Error::DimMismatch {
                    expected: d,
                    got: w.dim(),
                });
            }
            row.push(w.symmetrize());
        }
        clean.push(row);
    }

    let mut pairing = 0.0;
    for (wk, target) in clean.iter().zip(targets) {
        for (w, b) in wk.iter().zip(target.effects()) {
            pairing += re_tr(w.as_dmatrix(), b.as_dmatrix());
        }
    }

    let shape: Vec<usize> = targets.iter().map(|o| o.outcomes()).collect();
    let indexer = GridIndexer::new(&shape);
    let mut m_max = f64::NEG_INFINITY;
    let mut vnorm2 = 0.0;
    let mut idx = vec![0usize; shape.len()];
    for flat in 0..indexer.len() {
        indexer.decode(flat, &mut idx);
        let mut v = clean[0][idx[0]].as_dmatrix().clone();
        for k in 1..clean.len() {
            v += clean[k][idx[k]].as_dmatrix();
        }
        vnorm2 += v.norm_squared();
        let cell = CMatrix::from_dmatrix(v)?;
        let (vals, _) = linalg::eig_hermitian(&cell, 1e-6)?;
        m_max = m_max.max(*vals.last().unwrap());
    }

    let spectral_bound = d as f64 * m_max;
    let margin = pairing - spectral_bound;
    let gamma_plus = pairing - d as f64 * m_max.max(0.0);
    let denom = vnorm2.sqrt() + m_max.max(0.0) * (d as f64 * indexer.len() as f64).sqrt();
    let distance_lb = if denom > 0.0 {
        (gamma_plus / denom).max(0.0)
    } else {
        0.0
    };
    Ok(Certificate {
        witness: clean,
        pairing,
        spectral_bound,
        margin,
        distance_lb,
    })
}

fn re_tr(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

struct Mixing<'a> {
    t: f64,
    /// Largest admissible t-shift when rounding toward the trivial joint.
    budget: f64,
    /// Noise-free observables, used to validate the rounded joint.
    base: &'a [Observable],
}

enum Outcome {
    Feasible {
        joint: JointObservable,
        /// Noise level actually certified (mixing probes only).
        at: Option<f64>,
        iterations: usize,
        residual: f64,
    },
    Infeasible {
        certificate: Certificate,
        iterations: usize,
        residual: f64,
    },
    Exhausted {
        iterations: usize,
        residual: f64,
    },
}

struct Engine<'a> {
    dim: usize,
    n: usize,
    nn: usize,
    shape: Vec<usize>,
    digits: Vec<u32>,
    labels: Vec<Vec<i64>>,
    targets: Vec<Vec<DMatrix<C64>>>,
    target_obs: Vec<Observable>,
    inv_nk: Vec<f64>,
    g0_weights: Vec<f64>,
    opts: &'a SolverOptions,
}

impl<'a> Engine<'a> {
    fn new(targets: &[Observable], opts: &'a SolverOptions) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Invalid("need at least one observable".into()));
        }
        let dim = targets[0].dim();
        for o in targets {
            if o.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: o.dim(),
                });
            }
        }
        let shape: Vec<usize> = targets.iter().map(|o| o.outcomes()).collect();
        let nn: usize = shape.iter().product();
        if nn > opts.grid_cap {
            return Err(Error::ResourceCap {
                what: "outcome grid cells",
                needed: nn,
                cap: opts.grid_cap,
            });
        }
        let n = targets.len();
        let indexer = GridIndexer::new(&shape);
        let mut digits = vec![0u32; nn * n];
        let mut idx = vec![0usize; n];
        for flat in 0..nn {
            indexer.decode(flat, &mut idx);
            for k in 0..n {
                digits[flat * n + k] = idx[k] as u32;
            }
        }
        let target_mats: Vec<Vec<DMatrix<C64>>> = targets
            .iter()
            .map(|o| {
                o.effects()
                    .iter()
                    .map(|e| e.symmetrize().into_dmatrix())
                    .collect()
            })
            .collect();
        let inv_nk: Vec<f64> = shape.iter().map(|&s| s as f64 / nn as f64).collect();
        let mut g0_weights = vec![0.0f64; nn];
        for (flat, w) in g0_weights.iter_mut().enumerate() {
            let mut p = 1.0;
            for k in 0..n {
                let a = digits[flat * n + k] as usize;
                p *= target_mats[k][a].diagonal().iter().map(|x| x.re).sum::<f64>() / dim as f64;
            }
            *w = p;
        }
        Ok(Engine {
            dim,
            n,
            nn,
            shape,
            digits,
            labels: targets.iter().map(|o| o.labels().to_vec()).collect(),
            targets: target_mats,
            target_obs: targets.to_vec(),
            inv_nk,
            g0_weights,
            opts,
        })
    }

    fn digit(&self, flat: usize, k: usize) -> usize {
        self.digits[flat * self.n + k] as usize
    }

    fn g0_cells(&self) -> Vec<DMatrix<C64>> {
        self.g0_weights
            .iter()
            .map(|&w| DMatrix::<C64>::identity(self.dim, self.dim).map(|x| x * w))
            .collect()
    }

    /// Trivial product joint; its marginals are the trace-rescaled targets,
    /// so it is an exact joint exactly when every target is trivial.
    fn g0_joint(&self) -> Result<JointObservable> {
        let cells: Result<Vec<CMatrix>> = self
            .g0_cells()
            .into_iter()
            .map(CMatrix::from_dmatrix)
            .collect();
        let joint = JointObservable::new(self.dim, self.labels.clone(), cells?, self.opts.tol)?;
        let defect = joint.marginal_defect(&self.target_obs)?;
        if defect > self.opts.tol {
            return Err(Error::Invalid(format!(
                "trivial joint misses the marginals by {defect}"
            )));
        }
        Ok(joint)
    }

    /// Projects onto the marginal constraints: y = z + Σ_k w_k(a⃗_k) with
    /// w_k(a) = (B_k(a) − M_k(z)(a))/N_k − ((n−1)/n)(I − Σz)/N. Returns the
    /// affine step norm ‖y − z‖_F, the largest cell eigenvalue of the step,
    /// and the witness pairing with the targets.
    fn affine_step(
        &self,
        z: &[DMatrix<C64>],
        w: &mut [Vec<DMatrix<C64>>],
        y: &mut [DMatrix<C64>],
    ) -> (f64, f64, f64) {
        let d = self.dim;
        let zero = C64::new(0.0, 0.0);
        for wk in w.iter_mut() {
            for wa in wk.iter_mut() {
                wa.fill(zero);
            }
        }
        for (flat, zf) in z.iter().enumerate() {
            for (k, wk) in w.iter_mut().enumerate() {
                let a = self.digit(flat, k);
                wk[a] += zf;
            }
        }
        let mut s_mat = w[0][0].clone();
        for wa in w[0].iter().skip(1) {
            s_mat += wa;
        }
        let mut t_mat = DMatrix::<C64>::identity(d, d);
        t_mat -= &s_mat;
        t_mat *= C64::new(1.0 / self.nn as f64, 0.0);
        let beta = (self.n as f64 - 1.0) / self.n as f64;
        let t_beta = t_mat.map(|x| x * beta);

        let mut pairing = 0.0;
        for (k, wk) in w.iter_mut().enumerate() {
            let scale = C64::new(self.inv_nk[k], 0.0);
            for (a, wa) in wk.iter_mut().enumerate() {
                let mut x = self.targets[k][a].clone();
                x -= &*wa;
                x *= scale;
                x -= &t_beta;
                pairing += re_tr(&x, &self.targets[k][a]);
                *wa = x;
            }
        }

        let mut vnorm2 = 0.0;
        let mut m_max = f64::NEG_INFINITY;
        let mut v = DMatrix::<C64>::zeros(d, d);
        for flat in 0..self.nn {
            v.copy_from(&w[0][self.digit(flat, 0)]);
            for k in 1..self.n {
                v += &w[k][self.digit(flat, k)];
            }
            vnorm2 += v.norm_squared();
            m_max = m_max.max(linalg::max_eigenvalue_raw(&v));
            y[flat].copy_from(&z[flat]);
            y[flat] += &v;
        }
        (vnorm2.sqrt(), m_max, pairing)
    }

    /// Projects every cell onto the PSD cone; reports the worst input
    /// eigenvalue and the trivial-joint mixing weight that would repair all
    /// negativity.
    fn psd_step(&self, y: &[DMatrix<C64>], z: &mut [DMatrix<C64>]) -> (f64, f64) {
        let mut min_eig = f64::INFINITY;
        let mut mu = 0.0f64;
        for flat in 0..self.nn {
            let (proj, lo) = linalg::psd_project_with_min(&y[flat]);
            min_eig = min_eig.min(lo);
            if lo < 0.0 {
                let eta = -lo;
                mu = mu.max(eta / (eta + self.g0_weights[flat]));
            }
            z[flat] = proj;
        }
        (min_eig, mu)
    }

    fn joint_from_cells(&self, cells: &[DMatrix<C64>], expect: &[Observable]) -> Result<JointObservable> {
        let wrapped: Result<Vec<CMatrix>> = cells
            .iter()
            .map(|c| CMatrix::from_dmatrix(c.clone()).map(|m| m.symmetrize()))
            .collect();
        let joint = JointObservable::new(self.dim, self.labels.clone(), wrapped?, self.opts.tol)?;
        let defect = joint.marginal_defect(expect)?;
        if defect > self.opts.tol {
            return Err(Error::Invalid(format!(
                "rounded joint misses the marginals by {defect}"
            )));
        }
        Ok(joint)
    }

    fn witness_matrices(&self, w: &[Vec<DMatrix<C64>>]) -> Vec<Vec<CMatrix>> {
        w.iter()
            .map(|wk| {
                wk.iter()
                    .map(|m| CMatrix::from_dmatrix(m.clone()).unwrap().symmetrize())
                    .collect()
            })
            .collect()
    }

    fn solve(&self, mixing: Option<&Mixing<'_>>) -> Result<Outcome> {
        let d = self.dim;
        let feas_tol = self.opts.feas_tol();
        let mut z = self.g0_cells();
        let mut y = vec![DMatrix::<C64>::zeros(d, d); self.nn];
        let mut w: Vec<Vec<DMatrix<C64>>> = self
            .shape
            .iter()
            .map(|&s| vec![DMatrix::<C64>::zeros(d, d); s])
            .collect();
        let mut streak = 0usize;
        let mut last_gap = f64::NAN;

        for iter in 1..=self.opts.max_iters {
            let (vnorm, m_max, pairing) = self.affine_step(&z, &mut w, &mut y);
            last_gap = vnorm;

            let gamma_plus = pairing - d as f64 * m_max.max(0.0);
            let denom = vnorm + m_max.max(0.0) * (d as f64 * self.nn as f64).sqrt();
            let lb = if denom > 0.0 {
                (gamma_plus / denom).max(0.0)
            } else {
                0.0
            };
            if lb >= self.opts.infeas_tol {
                streak += 1;
            } else {
                streak = 0;
            }
            if streak >= self.opts.stability_window {
                let certificate = evaluate_witness(&self.witness_matrices(&w), &self.target_obs)?;
                if certificate.margin > 0.0 && certificate.distance_lb >= self.opts.infeas_tol {
                    return Ok(Outcome::Infeasible {
                        certificate,
                        iterations: iter,
                        residual: vnorm,
                    });
                }
                streak = 0;
            }

            let (min_eig, mu) = self.psd_step(&y, &mut z);
            if min_eig >= -feas_tol {
                let joint = self.joint_from_cells(&y, &self.target_obs)?;
                return Ok(Outcome::Feasible {
                    joint,
                    at: mixing.map(|m| m.t),
                    iterations: iter,
                    residual: (-min_eig).max(0.0),
                });
            }
            if let Some(mx) = mixing {
                if mu < 1.0 && mx.t * mu <= mx.budget {
                    let t_cert = (1.0 - mu) * mx.t;
                    let cells: Vec<DMatrix<C64>> = (0..self.nn)
                        .map(|flat| {
                            let mut c = y[flat].map(|x| x * (1.0 - mu));
                            let w0 = mu * self.g0_weights[flat];
                            for i in 0..d {
                                c[(i, i)] += C64::new(w0, 0.0);
                            }
                            c
                        })
                        .collect();
                    let expect: Result<Vec<Observable>> = mx
                        .base
                        .iter()
                        .map(|o| observables::depolarize(o, t_cert))
                        .collect();
                    let joint = self.joint_from_cells(&cells, &expect?)?;
                    return Ok(Outcome::Feasible {
                        joint,
                        at: Some(t_cert),
                        iterations: iter,
                        residual: (-min_eig).max(0.0),
                    });
                }
            }
        }
        Ok(Outcome::Exhausted {
            iterations: self.opts.max_iters,
            residual: last_gap,
        })
    }
}

/// Decides whether the observables admit a joint observable on the product
/// outcome grid. Deterministic and single-threaded.
pub fn joint_measurability(observables: &[Observable], opts: &SolverOptions) -> Result<CompatResult> {
    opts.check()?;
    let engine = Engine::new(observables, opts)?;
    Ok(match engine.solve(None)? {
        Outcome::Feasible {
            joint,
            iterations,
            residual,
            ..
        } => CompatResult {
            verdict: Verdict::Compatible,
            joint: Some(joint),
            certificate: None,
            iterations,
            residual,
        },
        Outcome::Infeasible {
            certificate,
            iterations,
            residual,
        } => CompatResult {
            verdict: Verdict::Incompatible,
            joint: None,
            certificate: Some(certificate),
            iterations,
            residual,
        },
        Outcome::Exhausted {
            iterations,
            residual,
        } => CompatResult {
            verdict: Verdict::Undecided,
            joint: None,
            certificate: None,
            iterations,
            residual,
        },
    })
}

fn depolarize_all(observables: &[Observable], t: f64) -> Result<Vec<Observable>> {
    observables
        .iter()
        .map(|o| observables::depolarize(o, t))
        .collect()
}

/// Finds the white-noise threshold t* below which the observables become
/// jointly measurable, by bisection on certified probes.
///
/// The lower bracket edge always carries an explicit joint observable for
/// the noise level it names, and the upper edge an infeasibility
/// certificate (unless no incompatibility was ever certified, in which case
/// it stays at 1). Deterministic and single-threaded.
pub fn white_noise_robustness(
    observables: &[Observable],
    opts: &SolverOptions,
    resolution: f64,
) -> Result<RobustnessResult> {
    opts.check()?;
    if !(resolution > 0.0 && resolution <= 1.0) || resolution < opts.tol {
        return Err(Error::OutOfRange(format!(
            "resolution {resolution} outside [{}, 1]",
            opts.tol
        )));
    }

    let probe = |t: f64, with_mixing: bool| -> Result<Outcome> {
        let targets = depolarize_all(observables, t)?;
        let engine = Engine::new(&targets, opts)?;
        let mixing = Mixing {
            t,
            budget: resolution / 4.0,
            base: observables,
        };
        engine.solve(if with_mixing { Some(&mixing) } else { None })
    };

    let mut lo = 0.0f64;
    let mut lo_joint = {
        let trivial = depolarize_all(observables, 0.0)?;
        Engine::new(&trivial, opts)?.g0_joint()?
    };
    let mut hi = 1.0f64;
    let mut hi_cert: Option<Certificate> = None;
    let mut probes = 1usize;

    match probe(1.0, false)? {
        Outcome::Feasible { joint, at, .. } => {
            let at = at.unwrap_or(1.0);
            if at >= 1.0 {
                return Ok(RobustnessResult {
                    t_star: 1.0,
                    bracket: (1.0, 1.0),
                    joint: Some(joint),
                    certificate: None,
                    converged: true,
                    probes,
                });
            }
            lo = at;
            lo_joint = joint;
        }
        Outcome::Infeasible { certificate, .. } => hi_cert = Some(certificate),
        Outcome::Exhausted { .. } => {}
    }

    while hi - lo > resolution && probes < MAX_PROBES {
        let width = hi - lo;
        let mid = lo + width / 2.0;
        let mut decided = false;
        for attempt in 0..4 {
            let t_try = match attempt {
                0 => mid,
                1 => mid + width / 8.0,
                2 => mid - width / 8.0,
                _ => mid + width / 4.0,
            };
            probes += 1;
            match probe(t_try, true)? {
                Outcome::Feasible { joint, at, .. } => {
                    let at = at.unwrap_or(t_try);
                    if at > lo {
                        lo = at;
                        lo_joint = joint;
                    }
                    decided = true;
                }
                Outcome::Infeasible { certificate, .. } => {
                    hi = t_try;
                    hi_cert = Some(certificate);
                    decided = true;
                }
                Outcome::Exhausted { .. } => continue,
            }
            break;
        }
        if !decided {
            break;
        }
    }

    Ok(RobustnessResult {
        t_star: lo + (hi - lo) / 2.0,
        bracket: (lo, hi),
        joint: Some(lo_joint),
        certificate: hi_cert,
        converged: hi - lo <= resolution,
        probes,
    })
}

fn bloch_vector(obs: &Observable) -> Result<[f64; 3]> {
    if obs.dim() != 2 || obs.outcomes() != 2 {
        return Err(Error::Invalid(
            "expected a two-outcome qubit observable".into(),
        ));
    }
    let e0 = obs.effect(0);
    let bias = (e0.trace_re() - 1.0).abs();
    if bias > 1e-8 {
        return Err(Error::Invalid(format!(
            "observable is biased: tr E(0) deviates from 1 by {bias}"
        )));
    }
    let mut v = [0.0f64; 3];
    for (i, sigma) in [linalg::pauli_x(), linalg::pauli_y(), linalg::pauli_z()]
        .iter()
        .enumerate()
    {
        v[i] = re_tr(e0.as_dmatrix(), sigma.as_dmatrix());
    }
    Ok(v)
}

/// Compatibility margin 2 − (‖a⃗+b⃗‖ + ‖a⃗−b⃗‖) for a pair of unbiased
/// two-outcome qubit observables ½(I ± a⃗·σ); nonnegative exactly when the
/// pair is jointly measurable.
pub fn qubit_pair_margin(a: &Observable, b: &Observable) -> Result<f64> {
    let va = bloch_vector(a)?;
    let vb = bloch_vector(b)?;
    let mut plus = 0.0;
    let mut minus = 0.0;
    for i in 0..3 {
        plus += (va[i] + vb[i]) * (va[i] + vb[i]);
        minus += (va[i] - vb[i]) * (va[i] - vb[i]);
    }
    Ok(2.0 - (plus.sqrt() + minus.sqrt()))
}

/// Exact white-noise threshold for a pair of unbiased two-outcome qubit
/// observables: the t solving ‖t(a⃗+b⃗)‖ + ‖t(a⃗−b⃗)‖ = 2, capped at 1.
pub fn qubit_pair_robustness(a: &Observable, b: &Observable) -> Result<f64> {
    let margin = qubit_pair_margin(a, b)?;
    let total = 2.0 - margin;
    if total <= 2.0 {
        Ok(1.0)
    } else {
        Ok(2.0 / total)
    }
}
