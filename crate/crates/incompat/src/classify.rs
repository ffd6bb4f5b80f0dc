//! Three-valued classification of channels by how much incompatibility they
//! break, with machine-checkable evidence.
//!
//! A channel is entanglement breaking when it admits a measure-and-prepare
//! form, n-breaking when the images of every n observables are compatible,
//! and fully breaking when this holds for every finite set. Deciding these
//! classes for arbitrary Kraus data is not finitely decidable, so every
//! verdict is CERTIFIED, REFUTED, or UNKNOWN: certifications come from
//! structural forms or closed-form noise thresholds, refutations carry a
//! re-validated incompatible image set, and UNKNOWN names what is missing.
//! [`classify_channel`] assembles a report and closes it under the class
//! inclusions (entanglement breaking implies fully breaking implies
//! n-breaking, and n-breaking implies m-breaking for m below n).

use std::collections::BTreeMap;

use crate::channels::{Channel, Form};
use crate::compat::{evaluate_witness, joint_measurability, CompatResult, SolverOptions, Verdict};
use crate::constructions::{clifford_set, random_projective, random_rank1_povm, GENERATOR_CAP};
use crate::error::{Error, Result};
use crate::linalg;
use crate::observables::Observable;
use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Version tag of the fixed witness ensemble library.
pub const WITNESS_LIBRARY_VERSION: &str = "1";

const BOUND_SLACK: f64 = 1e-12;
const NPT_TOL: f64 = 1e-10;

/// White-noise level below which a channel in dimension d breaks every
/// family of n observables: (n+d)/(n(d+1)).
pub fn clone_bound(d: usize, n: usize) -> f64 {
    (n + d) as f64 / (n as f64 * (d + 1) as f64)
}

/// Noise level realized by the winner-takes-all basis response model:
/// (−1 + Σ_{k=1..d} 1/k)/(d−1).
pub fn projective_threshold(d: usize) -> f64 {
    let harmonic: f64 = (1..=d).map(|k| 1.0 / k as f64).sum();
    (harmonic - 1.0) / (d - 1) as f64
}

/// Noise level realized by the two-regime rank-1 response model, below
/// which white noise breaks all incompatibility: (3d−1)(d−1)^{d−1}/((d+1)d^d).
pub fn rank1_threshold(d: usize) -> f64 {
    let df = d as f64;
    (3.0 * df - 1.0) * (df - 1.0).powi(d as i32 - 1) / ((df + 1.0) * df.powi(d as i32))
}

/// White-noise level below which the channel is entanglement breaking:
/// 1/(1+d).
pub fn eb_threshold(d: usize) -> f64 {
    1.0 / (1.0 + d as f64)
}

/// Compatibility threshold of the order-m anticommuting family: 1/√m.
pub fn specker_threshold(m: usize) -> f64 {
    1.0 / (m as f64).sqrt()
}

/// The four closed-form noise thresholds at a given dimension and family
/// size.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Thresholds {
    /// n-breaking bound (n+d)/(n(d+1)).
    pub clone: f64,
    /// Basis-model level t_P(d).
    pub projective: f64,
    /// Rank-1-model level t_0(d).
    pub rank1: f64,
    /// Entanglement-breaking bound 1/(1+d).
    pub eb: f64,
}

/// Evaluates all closed-form thresholds at (d, n).
pub fn thresholds(d: usize, n: usize) -> Thresholds {
    Thresholds {
        clone: clone_bound(d, n),
        projective: projective_threshold(d),
        rank1: rank1_threshold(d),
        eb: eb_threshold(d),
    }
}

/// Verdict status for one (channel, class) question.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Certified,
    Refuted,
    Unknown,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::Certified => "CERTIFIED",
            Status::Refuted => "REFUTED",
            Status::Unknown => "UNKNOWN",
        };
        f.write_str(s)
    }
}

/// Machine-checkable grounds for a verdict.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// The declared channel form decides the class by itself.
    Structural { form: String },
    /// A closed-form threshold covers the channel parameter.
    Bound {
        bound: String,
        parameter: f64,
        threshold: f64,
    },
    /// Spectral data of the partially transposed Choi operator.
    ChoiSpectrum { min_pt_eigenvalue: f64 },
    /// A witness ensemble whose image stays incompatible.
    Witness {
        ensemble: String,
        sha256: String,
        result: Box<CompatResult>,
    },
    /// The verdict propagates from one factor of a composition.
    Factor {
        position: &'static str,
        inner: Box<Evidence>,
    },
    /// The verdict follows from another class in the same report.
    Inherited { from: String },
    /// Undecided; names the bound or witness that could settle it.
    Open { needed: String },
}

/// One three-valued answer with its grounds.
#[derive(Clone, Debug, Serialize)]
pub struct ClassVerdict {
    pub status: Status,
    pub evidence: Evidence,
}

impl ClassVerdict {
    fn certified(evidence: Evidence) -> Self {
        ClassVerdict {
            status: Status::Certified,
            evidence,
        }
    }

    fn refuted(evidence: Evidence) -> Self {
        ClassVerdict {
            status: Status::Refuted,
            evidence,
        }
    }

    fn unknown(needed: impl Into<String>) -> Self {
        ClassVerdict {
            status: Status::Unknown,
            evidence: Evidence::Open {
                needed: needed.into(),
            },
        }
    }
}

/// Per-channel classification report across all three class families.
#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    /// Human-readable channel descriptor.
    pub channel: String,
    pub dim: usize,
    /// Entanglement breaking.
    pub ebc: ClassVerdict,
    /// n-incompatibility breaking, per requested n.
    pub n_ibc: BTreeMap<usize, ClassVerdict>,
    /// Fully incompatibility breaking.
    pub ibc: ClassVerdict,
}

/// Short structural description of a channel.
pub fn describe(ch: &Channel) -> String {
    match ch.form() {
        Form::WhiteNoise { t } => format!("white_noise(d={}, t={})", ch.dim(), t),
        Form::NoisyMixture { t, .. } => format!("noisy_mixture(d={}, t={})", ch.dim(), t),
        Form::MeasurePrepare { povm, .. } => format!(
            "measure_prepare(d={}, outcomes={})",
            ch.dim(),
            povm.outcomes()
        ),
        Form::Compose { first, second } => {
            format!("compose({}, {})", describe(first), describe(second))
        }
        Form::Generic => format!("generic(d={}, kraus={})", ch.dim(), ch.kraus().len()),
    }
}

fn min_pt_eigenvalue(ch: &Channel) -> Result<f64> {
    let d = ch.dim();
    let pt = linalg::partial_transpose(&ch.choi(), (d, d), 1)?;
    Ok(linalg::min_eigenvalue(&pt.symmetrize()))
}

/// Decides whether the channel is entanglement breaking.
///
/// Measure-and-prepare forms certify structurally; white noise is decided by
/// the closed-form threshold 1/(1+d); otherwise the partially transposed
/// Choi operator refutes when it has a negative eigenvalue and certifies for
/// qubit channels when it does not.
pub fn classify_ebc(ch: &Channel) -> Result<ClassVerdict> {
    let d = ch.dim();
    match ch.form() {
        Form::MeasurePrepare { .. } => {
            return Ok(ClassVerdict::certified(Evidence::Structural {
                form: "measure_prepare".into(),
            }));
        }
        Form::WhiteNoise { t } => {
            let threshold = eb_threshold(d);
            if *t <= threshold + BOUND_SLACK {
                return Ok(ClassVerdict::certified(Evidence::Bound {
                    bound: "white_noise_eb".into(),
                    parameter: *t,
                    threshold,
                }));
            }
            return Ok(ClassVerdict::refuted(Evidence::ChoiSpectrum {
                min_pt_eigenvalue: min_pt_eigenvalue(ch)?,
            }));
        }
        Form::NoisyMixture { t, .. } if *t == 0.0 => {
            return Ok(ClassVerdict::certified(Evidence::Structural {
                form: "state replacement".into(),
            }));
        }
        Form::Compose { first, second } => {
            for (position, factor) in [("first", first), ("second", second)] {
                let inner = classify_ebc(factor)?;
                if inner.status == Status::Certified {
                    return Ok(ClassVerdict::certified(Evidence::Factor {
                        position,
                        inner: Box::new(inner.evidence),
                    }));
                }
            }
        }
        _ => {}
    }
    let min_eig = min_pt_eigenvalue(ch)?;
    if min_eig < -NPT_TOL {
        return Ok(ClassVerdict::refuted(Evidence::ChoiSpectrum {
            min_pt_eigenvalue: min_eig,
        }));
    }
    if d == 2 {
        return Ok(ClassVerdict::certified(Evidence::ChoiSpectrum {
            min_pt_eigenvalue: min_eig,
        }));
    }
    Ok(ClassVerdict::unknown(
        "separability test beyond the partial-transpose criterion",
    ))
}

/// Certification-only test for n-breaking: entanglement-breaking channels,
/// noisy mixtures with t ≤ 1/n, white noise below the cloning bound, and
/// compositions with a certified factor. Never refutes.
pub fn certify_n_ibc(ch: &Channel, n: usize) -> Result<ClassVerdict> {
    if n < 2 {
        return Err(Error::OutOfRange(format!(
            "breaking classes start at n = 2, got {n}"
        )));
    }
    let ebc = classify_ebc(ch)?;
    if ebc.status == Status::Certified {
        return Ok(ClassVerdict::certified(Evidence::Inherited {
            from: "entanglement breaking".into(),
        }));
    }
    match ch.form() {
        Form::NoisyMixture { t, .. } => {
            let threshold = 1.0 / n as f64;
            if *t <= threshold + BOUND_SLACK {
                return Ok(ClassVerdict::certified(Evidence::Bound {
                    bound: "mixture".into(),
                    parameter: *t,
                    threshold,
                }));
            }
        }
        Form::WhiteNoise { t } => {
            let threshold = clone_bound(ch.dim(), n);
            if *t <= threshold + BOUND_SLACK {
                return Ok(ClassVerdict::certified(Evidence::Bound {
                    bound: "cloning".into(),
                    parameter: *t,
                    threshold,
                }));
            }
        }
        Form::Compose { first, second } => {
            for (position, factor) in [("first", first), ("second", second)] {
                let inner = certify_n_ibc(factor, n)?;
                if inner.status == Status::Certified {
                    return Ok(ClassVerdict::certified(Evidence::Factor {
                        position,
                        inner: Box::new(inner.evidence),
                    }));
                }
            }
        }
        _ => {}
    }
    Ok(ClassVerdict::unknown(format!(
        "no bound covers this channel for n = {n}; an incompatible image set would refute"
    )))
}

fn ensemble_hash(ensemble: &[Observable]) -> Result<String> {
    let bytes = serde_json::to_vec(ensemble)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn probe_ensemble(
    ch: &Channel,
    ensemble: &[Observable],
    opts: &SolverOptions,
) -> Result<Option<CompatResult>> {
    let images: Vec<Observable> = ensemble
        .iter()
        .map(|o| ch.apply_observable(o))
        .collect::<Result<_>>()?;
    let result = joint_measurability(&images, opts)?;
    if result.verdict != Verdict::Incompatible {
        return Ok(None);
    }
    let cert = result
        .certificate
        .as_ref()
        .ok_or_else(|| Error::Invalid("incompatible verdict without certificate".into()))?;
    let check = evaluate_witness(&cert.witness, &images)?;
    if check.margin <= 0.0 {
        return Err(Error::Invalid(format!(
            "witness failed re-validation, margin {:.3e}",
            check.margin
        )));
    }
    Ok(Some(result))
}

/// Searches the given ensembles for one whose image under the channel stays
/// incompatible. Refutes n-breaking on success, otherwise stays UNKNOWN.
pub fn refute_n_ibc(
    ch: &Channel,
    n: usize,
    ensembles: &[Vec<Observable>],
    opts: &SolverOptions,
) -> Result<ClassVerdict> {
    if n < 2 {
        return Err(Error::OutOfRange(format!(
            "breaking classes start at n = 2, got {n}"
        )));
    }
    for (i, ensemble) in ensembles.iter().enumerate() {
        if ensemble.len() != n {
            return Err(Error::Invalid(format!(
                "ensemble {i} has {} observables, expected {n}",
                ensemble.len()
            )));
        }
        for o in ensemble {
            if o.dim() != ch.dim() {
                return Err(Error::DimMismatch {
                    expected: ch.dim(),
                    got: o.dim(),
                });
            }
        }
    }
    let probes: Vec<Option<CompatResult>> = ensembles
        .par_iter()
        .map(|ensemble| probe_ensemble(ch, ensemble, opts))
        .collect::<Result<_>>()?;
    for (i, probe) in probes.into_iter().enumerate() {
        if let Some(result) = probe {
            return Ok(ClassVerdict::refuted(Evidence::Witness {
                ensemble: format!("library v{WITNESS_LIBRARY_VERSION} ensemble {i}"),
                sha256: ensemble_hash(&ensembles[i])?,
                result: Box::new(result),
            }));
        }
    }
    Ok(ClassVerdict::unknown(format!(
        "none of the {} probed ensembles kept an incompatible image",
        ensembles.len()
    )))
}

fn ibc_certification(ch: &Channel) -> Result<Option<Evidence>> {
    let ebc = classify_ebc(ch)?;
    if ebc.status == Status::Certified {
        return Ok(Some(Evidence::Inherited {
            from: "entanglement breaking".into(),
        }));
    }
    match ch.form() {
        Form::WhiteNoise { t } => {
            let threshold = rank1_threshold(ch.dim());
            if *t <= threshold + BOUND_SLACK {
                return Ok(Some(Evidence::Bound {
                    bound: "rank1_model".into(),
                    parameter: *t,
                    threshold,
                }));
            }
        }
        Form::Compose { first, second } => {
            for (position, factor) in [("first", first), ("second", second)] {
                if let Some(inner) = ibc_certification(factor)? {
                    return Ok(Some(Evidence::Factor {
                        position,
                        inner: Box::new(inner),
                    }));
                }
            }
        }
        _ => {}
    }
    Ok(None)
}

/// Decides full incompatibility breaking against the given ensembles:
/// certified via entanglement breaking, the rank-1 model threshold, or a
/// certified composition factor; refuted by any incompatible image set.
pub fn classify_ibc(
    ch: &Channel,
    ensembles: &[Vec<Observable>],
    opts: &SolverOptions,
) -> Result<ClassVerdict> {
    if let Some(evidence) = ibc_certification(ch)? {
        return Ok(ClassVerdict::certified(evidence));
    }
    for (i, ensemble) in ensembles.iter().enumerate() {
        if ensemble.len() < 2 {
            return Err(Error::Invalid(format!(
                "ensemble {i} has fewer than two observables"
            )));
        }
        for o in ensemble {
            if o.dim() != ch.dim() {
                return Err(Error::DimMismatch {
                    expected: ch.dim(),
                    got: o.dim(),
                });
            }
        }
    }
    let probes: Vec<Option<CompatResult>> = ensembles
        .par_iter()
        .map(|ensemble| probe_ensemble(ch, ensemble, opts))
        .collect::<Result<_>>()?;
    for (i, probe) in probes.into_iter().enumerate() {
        if let Some(result) = probe {
            return Ok(ClassVerdict::refuted(Evidence::Witness {
                ensemble: format!("library v{WITNESS_LIBRARY_VERSION} ensemble {i}"),
                sha256: ensemble_hash(&ensembles[i])?,
                result: Box::new(result),
            }));
        }
    }
    Ok(ClassVerdict::unknown(
        "no certifying bound applies and no probed ensemble kept an incompatible image",
    ))
}

fn largest_grid_outcomes(max_outcomes: usize, n: usize, grid_cap: usize) -> Option<usize> {
    let mut best = None;
    for o in 2..=max_outcomes {
        let mut cells = 1usize;
        let mut fits = true;
        for _ in 0..n {
            cells = match cells.checked_mul(o) {
                Some(c) if c <= grid_cap => c,
                _ => {
                    fits = false;
                    break;
                }
            };
        }
        if fits {
            best = Some(o);
        }
    }
    best
}

/// Fixed, versioned witness ensembles for refutation probes in dimension d
/// with n observables per ensemble: anticommuting-family subsets when d is
/// the matching power of two, seeded random rank-1 families, and a seeded
/// random basis family. Deterministic in (d, n).
pub fn witness_ensembles(d: usize, n: usize, grid_cap: usize) -> Result<Vec<Vec<Observable>>> {
    if n < 2 || d < 2 {
        return Err(Error::OutOfRange(format!("d = {d}, n = {n}")));
    }
    let mut out: Vec<Vec<Observable>> = Vec::new();

    if d.is_power_of_two() {
        let p = d.trailing_zeros() as usize;
        let m = 2 * p + 1;
        if m >= n && m <= GENERATOR_CAP && (1usize << p) == d && (1u128 << n) <= grid_cap as u128 {
            let set = clifford_set(m)?;
            for combo in (0..m).combinations(n).take(3) {
                out.push(combo.iter().map(|&j| set.observables[j].clone()).collect());
            }
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(0x57EC + 64 * d as u64 + n as u64);
    if let Some(o) = largest_grid_outcomes(d * d, n, grid_cap) {
        if o >= d {
            for _ in 0..2 {
                let ensemble: Vec<Observable> = (0..n)
                    .map(|_| random_rank1_povm(d, o, &mut rng))
                    .collect::<Result<_>>()?;
                out.push(ensemble);
            }
        }
    }
    if d.checked_pow(n as u32).is_some_and(|cells| cells <= grid_cap) {
        let ensemble: Vec<Observable> = (0..n)
            .map(|_| random_projective(d, &mut rng))
            .collect::<Result<_>>()?;
        out.push(ensemble);
    }
    Ok(out)
}

/// Classifies a channel across entanglement breaking, n-breaking for each
/// requested n, and full breaking, then closes the report under the class
/// inclusions.
pub fn classify_channel(ch: &Channel, ns: &[usize], opts: &SolverOptions) -> Result<ClassReport> {
    let mut ns: Vec<usize> = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.iter().any(|&n| n < 2) {
        return Err(Error::OutOfRange("breaking classes start at n = 2".into()));
    }

    let ebc = classify_ebc(ch)?;
    let mut n_ibc: BTreeMap<usize, ClassVerdict> = BTreeMap::new();
    for &n in &ns {
        let certified = certify_n_ibc(ch, n)?;
        let verdict = if certified.status == Status::Certified {
            certified
        } else {
            let ensembles = witness_ensembles(ch.dim(), n, opts.grid_cap)?;
            refute_n_ibc(ch, n, &ensembles, opts)?
        };
        n_ibc.insert(n, verdict);
    }

    for (i, &n) in ns.iter().enumerate().rev() {
        if n_ibc[&n].status == Status::Certified {
            for &m in &ns[..i] {
                if n_ibc[&m].status == Status::Unknown {
                    n_ibc.insert(
                        m,
                        ClassVerdict::certified(Evidence::Inherited {
                            from: format!("breaking {n} observables"),
                        }),
                    );
                }
            }
            break;
        }
    }
    for (i, &n) in ns.iter().enumerate() {
        if n_ibc[&n].status == Status::Refuted {
            for &m in &ns[i + 1..] {
                if n_ibc[&m].status == Status::Unknown {
                    n_ibc.insert(
                        m,
                        ClassVerdict::refuted(Evidence::Inherited {
                            from: format!("not breaking {n} observables"),
                        }),
                    );
                }
            }
            break;
        }
    }

    let ibc = if let Some(evidence) = ibc_certification(ch)? {
        ClassVerdict::certified(evidence)
    } else if let Some(verdict) = n_ibc.values().find(|v| v.status == Status::Refuted) {
        ClassVerdict::refuted(verdict.evidence.clone())
    } else {
        ClassVerdict::unknown("no full-breaking bound applies and no refutation was found")
    };

    if ibc.status == Status::Certified {
        let keys: Vec<usize> = n_ibc.keys().copied().collect();
        for n in keys {
            if n_ibc[&n].status == Status::Unknown {
                n_ibc.insert(
                    n,
                    ClassVerdict::certified(Evidence::Inherited {
                        from: "breaking all incompatibility".into(),
                    }),
                );
            }
        }
    }

    let report = ClassReport {
        channel: describe(ch),
        dim: ch.dim(),
        ebc,
        n_ibc,
        ibc,
    };
    check_report_consistency(&report)?;
    Ok(report)
}

/// Verifies the inclusion structure of a report: refutations propagate to
/// larger n, certifications to smaller n, entanglement breaking implies
/// everything, and full breaking implies every n.
pub fn check_report_consistency(report: &ClassReport) -> Result<()> {
    let entries: Vec<(usize, Status)> = report
        .n_ibc
        .iter()
        .map(|(&n, v)| (n, v.status))
        .collect();
    for (i, &(n, status)) in entries.iter().enumerate() {
        for &(m, later) in &entries[i + 1..] {
            if status == Status::Refuted && later != Status::Refuted {
                return Err(Error::Invalid(format!(
                    "refuted at n = {n} but {later} at n = {m}"
                )));
            }
            if later == Status::Certified && status != Status::Certified {
                return Err(Error::Invalid(format!(
                    "certified at n = {m} but {status} at n = {n}"
                )));
            }
        }
    }
    if report.ebc.status == Status::Certified {
        if report.ibc.status != Status::Certified {
            return Err(Error::Invalid(
                "entanglement breaking certified but full breaking is not".into(),
            ));
        }
        for (n, v) in &report.n_ibc {
            if v.status != Status::Certified {
                return Err(Error::Invalid(format!(
                    "entanglement breaking certified but n = {n} is {}",
                    v.status
                )));
            }
        }
    }
    if report.ibc.status == Status::Certified {
        for (n, v) in &report.n_ibc {
            if v.status != Status::Certified {
                return Err(Error::Invalid(format!(
                    "full breaking certified but n = {n} is {}",
                    v.status
                )));
            }
        }
    }
    if report.ibc.status == Status::Refuted
        && report
            .n_ibc
            .values()
            .all(|v| v.status == Status::Certified)
    {
        return Err(Error::Invalid(
            "full breaking refuted but every probed n is certified".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::observables::noisy_spin;
    use approx::assert_abs_diff_eq;

    fn wn(d: usize, t: f64) -> Channel {
        Channel::white_noise(d, t).unwrap()
    }

    #[test]
    fn threshold_closed_forms() {
        assert_abs_diff_eq!(clone_bound(2, 2), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(clone_bound(3, 2), 0.625, epsilon = 1e-15);
        assert_abs_diff_eq!(projective_threshold(2), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(projective_threshold(3), 5.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rank1_threshold(2), 5.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rank1_threshold(3), 8.0 / 27.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eb_threshold(2), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(specker_threshold(3), 1.0 / 3.0f64.sqrt(), epsilon = 1e-15);
        for d in 2..=10 {
            assert!(rank1_threshold(d) > eb_threshold(d), "d = {d}");
        }
        assert!((clone_bound(2, 8) - rank1_threshold(2)).abs() < 1e-12);
        let t = thresholds(2, 2);
        assert_abs_diff_eq!(t.clone, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.eb, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn entanglement_breaking_of_white_noise() {
        let low = classify_ebc(&wn(2, 0.3)).unwrap();
        assert_eq!(low.status, Status::Certified);
        let high = classify_ebc(&wn(2, 0.4)).unwrap();
        assert_eq!(high.status, Status::Refuted);
        match high.evidence {
            Evidence::ChoiSpectrum { min_pt_eigenvalue } => {
                assert!(min_pt_eigenvalue < -1e-6);
                assert_abs_diff_eq!(min_pt_eigenvalue, -0.05, epsilon = 1e-10);
            }
            other => panic!("unexpected evidence {other:?}"),
        }
    }

    #[test]
    fn entanglement_breaking_structural_paths() {
        let basis = Observable::projective_from_basis(&CMatrix::identity(2)).unwrap();
        let states = vec![
            basis.effect(0).clone(),
            basis.effect(1).clone(),
        ];
        let mp = Channel::measure_prepare(&basis, &states).unwrap();
        assert_eq!(classify_ebc(&mp).unwrap().status, Status::Certified);

        let id = Channel::identity(2).unwrap();
        let verdict = classify_ebc(&id).unwrap();
        assert_eq!(verdict.status, Status::Refuted);

        let composed = Channel::compose(&mp, &id).unwrap();
        let v = classify_ebc(&composed).unwrap();
        assert_eq!(v.status, Status::Certified);
        assert!(matches!(v.evidence, Evidence::Factor { .. }));
    }

    #[test]
    fn qubit_ppt_certifies() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let basis = crate::constructions::random_projective(2, &mut rng).unwrap();
        let states = vec![
            crate::constructions::random_state(2, &mut rng),
            crate::constructions::random_state(2, &mut rng),
        ];
        let mp = Channel::measure_prepare(&basis, &states).unwrap();
        let generic = Channel::from_kraus(2, mp.kraus().to_vec()).unwrap();
        let verdict = classify_ebc(&generic).unwrap();
        assert_eq!(verdict.status, Status::Certified);
        assert!(matches!(verdict.evidence, Evidence::ChoiSpectrum { .. }));
    }

    #[test]
    fn n_breaking_certification_paths() {
        assert_eq!(
            certify_n_ibc(&wn(2, 2.0 / 3.0), 2).unwrap().status,
            Status::Certified
        );
        assert_eq!(
            certify_n_ibc(&wn(2, 0.68), 2).unwrap().status,
            Status::Unknown
        );

        let theta = Channel::identity(2).unwrap();
        let eta = CMatrix::from_diagonal(&[1.0, 0.0]);
        let mixture = Channel::noisy_mixture(0.25, &theta, &eta).unwrap();
        assert_eq!(classify_ebc(&mixture).unwrap().status, Status::Refuted);
        let four = certify_n_ibc(&mixture, 4).unwrap();
        assert_eq!(four.status, Status::Certified);
        assert!(matches!(four.evidence, Evidence::Bound { .. }));
        assert_eq!(certify_n_ibc(&mixture, 5).unwrap().status, Status::Unknown);

        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let u = Channel::unitary(&linalg::haar_unitary(2, &mut rng)).unwrap();
        let composed = Channel::compose(&u, &wn(2, 0.6)).unwrap();
        let v = certify_n_ibc(&composed, 2).unwrap();
        assert_eq!(v.status, Status::Certified);
        assert!(matches!(v.evidence, Evidence::Factor { .. }));

        assert!(certify_n_ibc(&wn(2, 0.5), 1).is_err());
    }

    #[test]
    fn refutation_by_witness_ensembles() {
        let opts = SolverOptions::default();
        let xyz: Vec<Observable> = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
            .into_iter()
            .map(|v| noisy_spin(v, 1.0).unwrap())
            .collect();
        let v = refute_n_ibc(&wn(2, 0.6), 3, std::slice::from_ref(&xyz), &opts).unwrap();
        assert_eq!(v.status, Status::Refuted);
        match &v.evidence {
            Evidence::Witness { sha256, result, .. } => {
                assert_eq!(sha256.len(), 64);
                assert_eq!(result.verdict, Verdict::Incompatible);
            }
            other => panic!("unexpected evidence {other:?}"),
        }

        let id = Channel::identity(2).unwrap();
        let pair = vec![xyz[0].clone(), xyz[1].clone()];
        assert_eq!(
            refute_n_ibc(&id, 2, &[pair], &opts).unwrap().status,
            Status::Refuted
        );

        let quiet = refute_n_ibc(&wn(2, 0.2), 3, &[xyz], &opts).unwrap();
        assert_eq!(quiet.status, Status::Unknown);
    }

    #[test]
    fn witness_library_is_deterministic_and_respects_caps() {
        let opts = SolverOptions::default();
        let a = witness_ensembles(2, 2, opts.grid_cap).unwrap();
        let b = witness_ensembles(2, 2, opts.grid_cap).unwrap();
        assert_eq!(a.len(), b.len());
        assert!(!a.is_empty());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(ensemble_hash(x).unwrap(), ensemble_hash(y).unwrap());
        }
        for ensemble in &a {
            assert_eq!(ensemble.len(), 2);
            let cells: usize = ensemble.iter().map(|o| o.outcomes()).product();
            assert!(cells <= opts.grid_cap);
        }
        let big = witness_ensembles(3, 4, opts.grid_cap).unwrap();
        for ensemble in &big {
            let cells: usize = ensemble.iter().map(|o| o.outcomes()).product();
            assert!(cells <= opts.grid_cap);
        }
    }

    #[test]
    fn report_separates_two_from_three() {
        let opts = SolverOptions::default();
        let report = classify_channel(&wn(2, 0.6), &[2, 3, 4], &opts).unwrap();
        assert_eq!(report.ebc.status, Status::Refuted);
        assert_eq!(report.n_ibc[&2].status, Status::Certified);
        assert_eq!(report.n_ibc[&3].status, Status::Refuted);
        assert_eq!(report.n_ibc[&4].status, Status::Refuted);
        assert_eq!(report.ibc.status, Status::Refuted);
        check_report_consistency(&report).unwrap();
    }

    #[test]
    fn report_separates_entanglement_from_full_breaking() {
        let opts = SolverOptions::default();
        let report = classify_channel(&wn(2, 0.4), &[2, 3], &opts).unwrap();
        assert_eq!(report.ebc.status, Status::Refuted);
        assert_eq!(report.ibc.status, Status::Certified);
        assert_eq!(report.n_ibc[&2].status, Status::Certified);
        assert_eq!(report.n_ibc[&3].status, Status::Certified);
        check_report_consistency(&report).unwrap();
    }

    #[test]
    fn report_for_measure_prepare_is_all_certified() {
        let opts = SolverOptions::default();
        let basis = Observable::projective_from_basis(&CMatrix::identity(2)).unwrap();
        let states = vec![basis.effect(0).clone(), basis.effect(1).clone()];
        let mp = Channel::measure_prepare(&basis, &states).unwrap();
        let report = classify_channel(&mp, &[2, 3], &opts).unwrap();
        assert_eq!(report.ebc.status, Status::Certified);
        assert_eq!(report.ibc.status, Status::Certified);
        assert!(report
            .n_ibc
            .values()
            .all(|v| v.status == Status::Certified));
        assert!(report.channel.contains("measure_prepare"));
    }

    #[test]
    fn consistency_checker_flags_violations() {
        let opts = SolverOptions::default();
        let mut report = classify_channel(&wn(2, 0.6), &[2, 3], &opts).unwrap();
        report.n_ibc.insert(
            4,
            ClassVerdict::certified(Evidence::Inherited {
                from: "forged".into(),
            }),
        );
        assert!(check_report_consistency(&report).is_err());
    }

    #[test]
    fn describe_names_the_form() {
        assert!(describe(&wn(3, 0.25)).contains("white_noise(d=3"));
        let id = Channel::identity(2).unwrap();
        let composed = Channel::compose(&id, &wn(2, 0.5)).unwrap();
        assert!(describe(&composed).contains("white_noise"));
    }
}
