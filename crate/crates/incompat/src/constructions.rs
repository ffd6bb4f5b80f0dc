//! Explicit joint observables and randomized verification instruments.
//!
//! Two joint-observable constructions come with exact marginal guarantees:
//! [`mixture_joint`] for observables smeared by a noisy mixture channel and
//! [`cloning_joint`] via the symmetric subspace projector. [`clifford_set`]
//! builds anticommuting involutions on qubit registers, the raw material for
//! Specker-style observable families with sharp compatibility thresholds.
//! The `hsm_*` estimators are seeded, sharded Monte-Carlo reproductions of
//! depolarized observables from classical response models over Haar states;
//! they return entrywise standard errors so callers can test at a chosen
//! sigma level.

use crate::channels::Channel;
use crate::classify::clone_bound;
use crate::error::{Error, Result};
use crate::linalg::{self, C64, CMatrix, DIM_CAP};
use crate::observables::{depolarize, pairing, JointObservable, Observable};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

/// Largest generator count accepted by [`clifford_set`].
pub const GENERATOR_CAP: usize = 7;

const ALGEBRA_TOL: f64 = 1e-12;
const SHARD: u64 = 65536;

fn check_dims(observables: &[Observable]) -> Result<usize> {
    let first = observables
        .first()
        .ok_or_else(|| Error::Invalid("need at least one observable".into()))?;
    let dim = first.dim();
    for o in observables {
        if o.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: o.dim(),
            });
        }
    }
    Ok(dim)
}

fn check_state(dim: usize, eta: &CMatrix) -> Result<()> {
    if eta.dim() != dim {
        return Err(Error::DimMismatch {
            expected: dim,
            got: eta.dim(),
        });
    }
    if eta.herm_defect() > 1e-8 {
        return Err(Error::InvalidState(format!(
            "not Hermitian, defect {:.3e}",
            eta.herm_defect()
        )));
    }
    let min = linalg::min_eigenvalue(eta);
    if min < -1e-10 {
        return Err(Error::InvalidState(format!(
            "negative eigenvalue {min:.3e}"
        )));
    }
    if (eta.trace_re() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState(format!(
            "trace {} is not 1",
            eta.trace_re()
        )));
    }
    Ok(())
}

/// Joint observable for a family smeared by the noisy mixture channel
/// T ↦ tΘ(T) + (1−t)tr[ηT]I, valid for t up to 1/n.
///
/// The cell at outcome tuple a⃗ is
/// t·Σ_k Θ(A_k(a_k))·Π_{j≠k} tr[ηA_j(a_j)] + (1−tn)·Π_j tr[ηA_j(a_j)]·I,
/// whose k-th marginal reproduces the smeared A_k exactly.
pub fn mixture_joint(
    observables: &[Observable],
    theta: &Channel,
    eta: &CMatrix,
    t: f64,
) -> Result<JointObservable> {
    let n = observables.len();
    let dim = check_dims(observables)?;
    if theta.dim() != dim {
        return Err(Error::DimMismatch {
            expected: dim,
            got: theta.dim(),
        });
    }
    check_state(dim, eta)?;
    let t_max = 1.0 / n as f64;
    if !t.is_finite() || t < 0.0 || t > t_max + 1e-12 {
        return Err(Error::OutOfRange(format!(
            "mixture weight {t} outside [0, 1/{n}]"
        )));
    }

    let mut probs: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mapped: Vec<Vec<CMatrix>> = Vec::with_capacity(n);
    for o in observables {
        probs.push(o.effects().iter().map(|e| pairing(eta, e)).collect());
        mapped.push(
            o.effects()
                .iter()
                .map(|e| theta.apply(e))
                .collect::<Result<_>>()?,
        );
    }

    let axis_labels: Vec<Vec<i64>> = observables.iter().map(|o| o.labels().to_vec()).collect();
    let residual = 1.0 - t * n as f64;
    let joint = JointObservable::build(dim, axis_labels, 1e-8, |idx| {
        let p_all: f64 = (0..n).map(|j| probs[j][idx[j]]).product();
        let mut cell = CMatrix::identity(dim).scale(residual * p_all);
        for k in 0..n {
            let mut w = t;
            for j in 0..n {
                if j != k {
                    w *= probs[j][idx[j]];
                }
            }
            cell = &cell + &mapped[k][idx[k]].scale(w);
        }
        cell
    })?;

    let targets: Vec<Observable> = observables
        .iter()
        .enumerate()
        .map(|(k, o)| {
            let effects = o
                .effects()
                .iter()
                .enumerate()
                .map(|(a, _)| {
                    let noise = CMatrix::identity(dim).scale((1.0 - t) * probs[k][a]);
                    &mapped[k][a].scale(t) + &noise
                })
                .collect();
            Observable::with_tol(dim, o.labels().to_vec(), effects, 1e-7)
        })
        .collect::<Result<_>>()?;
    let defect = joint.marginal_defect(&targets)?;
    if defect > 1e-12 {
        return Err(Error::Invalid(format!(
            "mixture joint marginal defect {defect:.3e}"
        )));
    }
    Ok(joint)
}

/// Joint observable on the symmetric subspace whose marginals are the
/// white-noise smearings of the inputs at t = (n+d)/(n(d+1)).
///
/// The cell at x⃗ is (d / C(d+n−1, n)) · tr_{2..n}[S_n (A_1(x_1)⊗…⊗A_n(x_n)) S_n]
/// with S_n the symmetric projector on (C^d)^⊗n. Returns the joint together
/// with the realized noise level t.
pub fn cloning_joint(observables: &[Observable]) -> Result<(JointObservable, f64)> {
    let n = observables.len();
    let dim = check_dims(observables)?;
    let t = clone_bound(dim, n);
    let sym = linalg::symmetric_projector(dim, n, DIM_CAP)?;
    let scale = dim as f64 / linalg::binomial(dim + n - 1, n) as f64;
    let factor_dims = vec![dim; n];

    let axis_labels: Vec<Vec<i64>> = observables.iter().map(|o| o.labels().to_vec()).collect();
    let shape: Vec<usize> = observables.iter().map(|o| o.outcomes()).collect();
    let total: usize = shape.iter().product();
    let mut cells = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for flat in 0..total {
        let mut rem = flat;
        for k in (0..n).rev() {
            idx[k] = rem % shape[k];
            rem /= shape[k];
        }
        let factors: Vec<&CMatrix> = (0..n).map(|k| observables[k].effect(idx[k])).collect();
        let product = linalg::tensor_all(&factors);
        let squeezed = &(&sym * &product) * &sym;
        let cell = linalg::partial_trace(&squeezed, &factor_dims, 0)?.scale(scale);
        cells.push(cell);
    }
    let joint = JointObservable::new(dim, axis_labels, cells, 1e-8)?;

    let targets: Vec<Observable> = observables
        .iter()
        .map(|o| depolarize(o, t))
        .collect::<Result<_>>()?;
    let defect = joint.marginal_defect(&targets)?;
    if defect > 1e-10 {
        return Err(Error::Invalid(format!(
            "cloning joint marginal defect {defect:.3e}"
        )));
    }
    Ok((joint, t))
}

/// A maximal family of pairwise anticommuting Hermitian involutions on
/// p = (m−1)/2 qubits, with the sharp two-outcome observables ½(I ± δ_j).
#[derive(Clone, Debug)]
pub struct CliffordSet {
    pub m: usize,
    pub p: usize,
    pub generators: Vec<CMatrix>,
    pub observables: Vec<Observable>,
}

fn pauli_chain(p: usize, k: usize, middle: &CMatrix) -> CMatrix {
    let z = linalg::pauli_z();
    let id = CMatrix::identity(2);
    let mut factors: Vec<&CMatrix> = Vec::with_capacity(p);
    for _ in 0..k {
        factors.push(&z);
    }
    factors.push(middle);
    for _ in k + 1..p {
        factors.push(&id);
    }
    linalg::tensor_all(&factors)
}

/// Builds m pairwise anticommuting involutions for odd m ≥ 3 on (C²)^⊗p,
/// verifying the algebra relations at construction.
pub fn clifford_set(m: usize) -> Result<CliffordSet> {
    if m < 3 || m.is_multiple_of(2) {
        return Err(Error::OutOfRange(format!(
            "generator count must be odd and at least 3, got {m}"
        )));
    }
    if m > GENERATOR_CAP {
        return Err(Error::ResourceCap {
            what: "generator count",
            needed: m,
            cap: GENERATOR_CAP,
        });
    }
    let p = (m - 1) / 2;
    let dim = 1usize << p;
    let x = linalg::pauli_x();
    let y = linalg::pauli_y();
    let z = linalg::pauli_z();

    let mut generators = Vec::with_capacity(m);
    for k in 0..p {
        generators.push(pauli_chain(p, k, &x));
        generators.push(pauli_chain(p, k, &y));
    }
    let mut all_z: Vec<&CMatrix> = Vec::with_capacity(p);
    for _ in 0..p {
        all_z.push(&z);
    }
    generators.push(linalg::tensor_all(&all_z));

    let identity = CMatrix::identity(dim);
    for (i, gi) in generators.iter().enumerate() {
        if gi.herm_defect() > ALGEBRA_TOL {
            return Err(Error::NotHermitian {
                defect: gi.herm_defect(),
                tol: ALGEBRA_TOL,
            });
        }
        if gi.trace().norm() > ALGEBRA_TOL {
            return Err(Error::Invalid(format!(
                "generator {i} has nonzero trace"
            )));
        }
        for (j, gj) in generators.iter().enumerate().skip(i) {
            let anti = &(gi * gj) + &(gj * gi);
            let expected = if i == j {
                identity.scale(2.0)
            } else {
                CMatrix::zeros(dim)
            };
            let defect = linalg::max_abs_diff(&anti, &expected);
            if defect > ALGEBRA_TOL {
                return Err(Error::Invalid(format!(
                    "generators {i},{j} violate the anticommutation relations by {defect:.3e}"
                )));
            }
        }
    }

    let observables = generators
        .iter()
        .map(|g| {
            let plus = (&identity + g).scale(0.5);
            let minus = (&identity - g).scale(0.5);
            Observable::with_tol(dim, vec![1, -1], vec![plus, minus], 1e-10)
        })
        .collect::<Result<_>>()?;

    Ok(CliffordSet {
        m,
        p,
        generators,
        observables,
    })
}

/// The noisy two-outcome observables ½(I ± tδ_j) over an order-m
/// anticommuting set; compatible as a full family exactly when t ≤ 1/√m.
pub fn specker_observables(m: usize, t: f64) -> Result<Vec<Observable>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange(format!("noise level {t} outside [0, 1]")));
    }
    let set = clifford_set(m)?;
    set.observables.iter().map(|o| depolarize(o, t)).collect()
}

fn ginibre(d: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

/// Random density matrix from a normalized Wishart sample.
pub fn random_state(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = ginibre(d, rng);
    let w = &g * &g.adjoint();
    let tr = w.trace_re();
    w.scale(1.0 / tr)
}

/// Haar-random orthonormal-basis observable.
pub fn random_projective(d: usize, rng: &mut impl Rng) -> Result<Observable> {
    Observable::projective_from_basis(&linalg::haar_unitary(d, rng))
}

fn inv_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let (vals, vecs) = linalg::eig_hermitian(m, 1e-8)?;
    let d = m.dim();
    if vals[0] <= 1e-12 {
        return Err(Error::Invalid(format!(
            "normalization operator nearly singular, eigenvalue {:.3e}",
            vals[0]
        )));
    }
    let w: Vec<f64> = vals.iter().map(|&v| 1.0 / v.sqrt()).collect();
    Ok(CMatrix::from_fn(d, |i, j| {
        (0..d)
            .map(|k| vecs[(i, k)] * vecs[(j, k)].conj() * C64::new(w[k], 0.0))
            .sum()
    }))
}

/// Random rank-1 POVM: Haar directions symmetrically normalized to sum to
/// identity. Needs at least d outcomes.
pub fn random_rank1_povm(d: usize, outcomes: usize, rng: &mut impl Rng) -> Result<Observable> {
    if outcomes < d {
        return Err(Error::OutOfRange(format!(
            "rank-1 effects cannot sum to identity with {outcomes} < {d} outcomes"
        )));
    }
    let raw: Vec<CMatrix> = (0..outcomes)
        .map(|_| {
            let v = linalg::haar_state(d, rng);
            CMatrix::outer(&v, &v)
        })
        .collect::<Result<_>>()?;
    let mut sum = CMatrix::zeros(d);
    for r in &raw {
        sum = &sum + r;
    }
    let w = inv_sqrt(&sum)?;
    let effects: Vec<CMatrix> = raw.iter().map(|r| (&(&w * r) * &w).symmetrize()).collect();
    let labels: Vec<i64> = (0..outcomes as i64).collect();
    Observable::with_tol(d, labels, effects, 1e-8)
}

/// Random full-rank POVM from Wishart blocks, symmetrically normalized.
pub fn random_povm(d: usize, outcomes: usize, rng: &mut impl Rng) -> Result<Observable> {
    if outcomes == 0 {
        return Err(Error::OutOfRange("need at least one outcome".into()));
    }
    let raw: Vec<CMatrix> = (0..outcomes)
        .map(|_| {
            let g = ginibre(d, rng);
            &g * &g.adjoint()
        })
        .collect();
    let mut sum = CMatrix::zeros(d);
    for r in &raw {
        sum = &sum + r;
    }
    let w = inv_sqrt(&sum)?;
    let effects: Vec<CMatrix> = raw.iter().map(|r| (&(&w * r) * &w).symmetrize()).collect();
    let labels: Vec<i64> = (0..outcomes as i64).collect();
    Observable::with_tol(d, labels, effects, 1e-8)
}

/// Seeded Monte-Carlo estimate of a family of effects with entrywise
/// standard errors.
#[derive(Clone, Debug, Serialize)]
pub struct HsmEstimate {
    /// Outcome labels, in order.
    pub labels: Vec<i64>,
    /// Estimated effects, one per outcome.
    pub effects: Vec<CMatrix>,
    /// Entrywise standard error of each estimated effect, row-major.
    pub std_err: Vec<Vec<Vec<f64>>>,
    /// Number of Monte-Carlo samples.
    pub samples: u64,
    /// RNG seed the run was keyed on.
    pub seed: u64,
}

impl HsmEstimate {
    fn dim(&self) -> usize {
        self.effects.first().map_or(0, |e| e.dim())
    }

    fn check_target(&self, target: &Observable) -> Result<()> {
        if target.dim() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: target.dim(),
            });
        }
        if target.outcomes() != self.effects.len() {
            return Err(Error::LabelMismatch(format!(
                "estimate has {} outcomes, target has {}",
                self.effects.len(),
                target.outcomes()
            )));
        }
        Ok(())
    }

    /// Largest entrywise |estimate − target| over all effects.
    pub fn max_deviation(&self, target: &Observable) -> Result<f64> {
        self.check_target(target)?;
        let worst = self
            .effects
            .iter()
            .zip(target.effects())
            .map(|(e, t)| linalg::max_abs_diff(e, t))
            .fold(0.0f64, f64::max);
        Ok(worst)
    }

    /// Largest entrywise deviation from the target measured in standard
    /// errors.
    pub fn max_sigma_deviation(&self, target: &Observable) -> Result<f64> {
        self.check_target(target)?;
        let d = self.dim();
        let mut worst = 0.0f64;
        for (o, (e, t)) in self.effects.iter().zip(target.effects()).enumerate() {
            for i in 0..d {
                for j in 0..d {
                    let dev = (e[(i, j)] - t[(i, j)]).norm();
                    let se = self.std_err[o][i][j].max(1e-12);
                    worst = worst.max(dev / se);
                }
            }
        }
        Ok(worst)
    }

    /// Largest entrywise deviation of the effect sum from identity.
    pub fn sum_defect(&self) -> f64 {
        let d = self.dim();
        let mut sum = CMatrix::zeros(d);
        for e in &self.effects {
            sum = &sum + e;
        }
        linalg::max_abs_diff(&sum, &CMatrix::identity(d))
    }

    /// Whether the effects sum to identity within k aggregate standard
    /// errors entrywise.
    pub fn sum_within(&self, k: f64) -> bool {
        let d = self.dim();
        let mut sum = CMatrix::zeros(d);
        for e in &self.effects {
            sum = &sum + e;
        }
        let identity = CMatrix::identity(d);
        for i in 0..d {
            for j in 0..d {
                let dev = (sum[(i, j)] - identity[(i, j)]).norm();
                let var: f64 = (0..self.effects.len())
                    .map(|o| self.std_err[o][i][j].powi(2))
                    .sum();
                if dev > k * var.sqrt() + 1e-12 {
                    return false;
                }
            }
        }
        true
    }
}

struct Accum {
    sums: Vec<DMatrix<C64>>,
    sq: Vec<DMatrix<f64>>,
}

impl Accum {
    fn new(outcomes: usize, dim: usize) -> Self {
        Accum {
            sums: vec![DMatrix::zeros(dim, dim); outcomes],
            sq: vec![DMatrix::zeros(dim, dim); outcomes],
        }
    }

    /// Adds w·vv† to outcome o.
    fn add_outer(&mut self, o: usize, w: f64, v: &DVector<C64>) {
        let d = v.len();
        for i in 0..d {
            for j in 0..d {
                let x = v[i] * v[j].conj() * C64::new(w, 0.0);
                self.sums[o][(i, j)] += x;
                self.sq[o][(i, j)] += x.norm_sqr();
            }
        }
    }

    fn add_dense(&mut self, o: usize, m: &DMatrix<C64>) {
        let d = m.nrows();
        for i in 0..d {
            for j in 0..d {
                let x = m[(i, j)];
                self.sums[o][(i, j)] += x;
                self.sq[o][(i, j)] += x.norm_sqr();
            }
        }
    }

    fn merge(&mut self, other: &Accum) {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        for (a, b) in self.sq.iter_mut().zip(&other.sq) {
            *a += b;
        }
    }
}

/// Runs the per-sample kernel over counter-keyed shards and reduces in
/// shard order, so results depend only on (seed, sample count).
fn mc_estimate(
    dim: usize,
    labels: Vec<i64>,
    samples: u64,
    seed: u64,
    kernel: impl Fn(&mut ChaCha12Rng, &mut Accum) + Sync,
) -> Result<HsmEstimate> {
    if samples == 0 {
        return Err(Error::OutOfRange("sample count must be positive".into()));
    }
    let outcomes = labels.len();
    let shards = samples.div_ceil(SHARD);
    let parts: Vec<Accum> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(s + 1);
            let count = SHARD.min(samples - s * SHARD);
            let mut acc = Accum::new(outcomes, dim);
            for _ in 0..count {
                kernel(&mut rng, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = Accum::new(outcomes, dim);
    for p in &parts {
        total.merge(p);
    }

    let nf = samples as f64;
    let mut effects = Vec::with_capacity(outcomes);
    let mut std_err = Vec::with_capacity(outcomes);
    for o in 0..outcomes {
        let mean = total.sums[o].map(|x| x / nf);
        let mut se = vec![vec![0.0f64; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                let var = (total.sq[o][(i, j)] / nf - mean[(i, j)].norm_sqr()).max(0.0);
                se[i][j] = (var / nf).sqrt();
            }
        }
        effects.push(CMatrix::from_dmatrix(mean)?);
        std_err.push(se);
    }
    Ok(HsmEstimate {
        labels,
        effects,
        std_err,
        samples,
        seed,
    })
}

fn winner_index(q: &[f64], rng: &mut impl Rng) -> usize {
    let mut best = f64::NEG_INFINITY;
    for &v in q {
        if v > best {
            best = v;
        }
    }
    let ties: Vec<usize> = (0..q.len()).filter(|&i| q[i] == best).collect();
    if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.random_range(0..ties.len())]
    }
}

/// Hidden-state estimate for a nondegenerate rank-1 basis measurement: Haar
/// states with winner-takes-all response, accumulating d·φφ† on the winning
/// outcome. The expectation is the white-noise smearing of the input at
/// t_P(d) = (−1 + Σ_{k≤d} 1/k)/(d−1).
pub fn hsm_projective(obs: &Observable, samples: u64, seed: u64) -> Result<HsmEstimate> {
    let d = obs.dim();
    if obs.outcomes() != d {
        return Err(Error::Invalid(format!(
            "need a nondegenerate basis measurement: {} outcomes in dimension {}",
            obs.outcomes(),
            d
        )));
    }
    for (i, e) in obs.effects().iter().enumerate() {
        let idem = linalg::max_abs_diff(&(e * e), e);
        if idem > 1e-8 || (e.trace_re() - 1.0).abs() > 1e-8 {
            return Err(Error::Invalid(format!(
                "effect {i} is not a rank-1 projector"
            )));
        }
    }
    let effects = obs.effects().to_vec();
    mc_estimate(d, obs.labels().to_vec(), samples, seed, move |rng, acc| {
        let phi = linalg::haar_state(d, rng);
        let q: Vec<f64> = effects.iter().map(|e| e.expectation(&phi)).collect();
        let winner = winner_index(&q, rng);
        acc.add_outer(winner, d as f64, &phi);
    })
}

/// Hidden-state estimate for rank-1 POVMs with the two-regime response
/// kernel: outcomes whose probability beats the reference weight tr[A_i]/d
/// respond with the raw probability, the rest share the leftover mass in
/// proportion to their reference weights. The expectation is the
/// white-noise smearing at t_0(d) = (3d−1)(d−1)^{d−1}/((d+1)d^d).
pub fn hsm_rank1(obs: &Observable, samples: u64, seed: u64) -> Result<HsmEstimate> {
    let d = obs.dim();
    for (i, e) in obs.effects().iter().enumerate() {
        let (vals, _) = linalg::eig_hermitian(e, 1e-7)?;
        if d >= 2 && vals[d - 2] > 1e-8 {
            return Err(Error::Invalid(format!(
                "effect {i} has rank above 1, second eigenvalue {:.3e}",
                vals[d - 2]
            )));
        }
    }
    let effects = obs.effects().to_vec();
    let tau: Vec<f64> = effects.iter().map(|e| e.trace_re() / d as f64).collect();
    mc_estimate(d, obs.labels().to_vec(), samples, seed, move |rng, acc| {
        let phi = linalg::haar_state(d, rng);
        let q: Vec<f64> = effects.iter().map(|e| e.expectation(&phi)).collect();
        let leftover: f64 = q
            .iter()
            .zip(&tau)
            .filter(|(qi, ti)| *qi <= *ti)
            .map(|(qi, _)| qi)
            .sum();
        let mut total = 0.0;
        for i in 0..q.len() {
            let f = if q[i] > tau[i] {
                q[i] + tau[i] * leftover
            } else {
                tau[i] * leftover
            };
            total += f;
            if f > 0.0 {
                acc.add_outer(i, f * d as f64, &phi);
            }
        }
        assert!(
            (total - 1.0).abs() <= 1e-10,
            "response kernel mass {total} differs from 1"
        );
    })
}

/// Hidden-direction estimate of the two-outcome spin observable along n̂:
/// uniform directions k̂ on the sphere, outcome ± firing when ±k̂·n̂ > 0 with
/// contribution I + k̂·σ. The expectation is ½(I ± ½n̂·σ).
pub fn spin_direction_check(n_hat: [f64; 3], samples: u64, seed: u64) -> Result<HsmEstimate> {
    let norm = (n_hat[0].powi(2) + n_hat[1].powi(2) + n_hat[2].powi(2)).sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::OutOfRange(format!(
            "direction must be a unit vector, norm {norm}"
        )));
    }
    mc_estimate(2, vec![1, -1], samples, seed, move |rng, acc| {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        let z = 2.0 * u - 1.0;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = 2.0 * std::f64::consts::PI * v;
        let k = [r * phi.cos(), r * phi.sin(), z];
        let dot = k[0] * n_hat[0] + k[1] * n_hat[1] + k[2] * n_hat[2];
        if dot == 0.0 {
            return;
        }
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0 + k[2], 0.0),
                C64::new(k[0], -k[1]),
                C64::new(k[0], k[1]),
                C64::new(1.0 - k[2], 0.0),
            ],
        );
        let o = if dot > 0.0 { 0 } else { 1 };
        acc.add_dense(o, &m);
    })
}

/// A noise window witnessing the gap between breaking the incompatibility
/// of n observables and breaking all incompatibility.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SeparationWindow {
    /// Number of observables the cloning bound is evaluated for.
    pub n: usize,
    /// Order of the anticommuting family, odd.
    pub m: usize,
    /// Qubit count carrying the family; the dimension is 2^p.
    pub p: usize,
    /// Exclusive lower edge 1/√m of the window.
    pub t_lower: f64,
    /// Inclusive upper edge (n+d)/(n(d+1)) at d = 2^p.
    pub t_upper: f64,
}

fn window_holds(n: usize, m: usize, p: usize) -> bool {
    let rm = (m as f64).sqrt();
    let nf = n as f64;
    if p >= 1024 {
        return rm >= nf;
    }
    let d = (2.0f64).powi(p as i32);
    d * (nf - rm) < nf * (rm - 1.0)
}

/// Smallest odd m = 2p+1 at least n² whose order-m family on d = 2^p has
/// its compatibility threshold 1/√m strictly below the n-cloning bound,
/// leaving a nonempty noise window.
pub fn separation_inequality(n: usize) -> Result<SeparationWindow> {
    if n < 3 {
        return Err(Error::OutOfRange(format!("need n at least 3, got {n}")));
    }
    let mut m = n * n;
    if m.is_multiple_of(2) {
        m += 1;
    }
    while m < 100 * n * n {
        let p = (m - 1) / 2;
        if window_holds(n, m, p) {
            let t_upper = if p >= 1024 {
                1.0 / n as f64
            } else {
                let d = (2.0f64).powi(p as i32);
                (n as f64 + d) / (n as f64 * (d + 1.0))
            };
            return Ok(SeparationWindow {
                n,
                m,
                p,
                t_lower: 1.0 / (m as f64).sqrt(),
                t_upper,
            });
        }
        m += 2;
    }
    Err(Error::Invalid(format!(
        "no separating order found for n = {n}"
    )))
}
