//! Unital quantum channels in the Heisenberg picture.
//!
//! A channel acts on observables as Λ(A) = Σ_i K_i† A K_i with Σ_i K_i† K_i = I;
//! the Schrödinger dual Λ_*(ρ) = Σ_i K_i ρ K_i† is then trace preserving.
//! Structured constructors remember their form so later classification can
//! use closed-form thresholds instead of generic spectral tests.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64, HERM_TOL};
use crate::observables::Observable;

/// Tolerance on ‖Σ K†K − I‖_max for user-supplied Kraus sets.
pub const UNITAL_TOL: f64 = 1e-10;

/// Tolerance applied to matrices arriving from JSON (Choi blocks, states).
const PARSE_TOL: f64 = 1e-8;

/// Kraus operators below this Frobenius norm are dropped.
const KRAUS_PRUNE: f64 = 1e-15;

/// Structural information retained by the constructors.
#[derive(Clone, Debug)]
pub enum Form {
    /// No structure beyond the Kraus set.
    Generic,
    /// A ↦ tA + (1−t) tr[A] I/d.
    WhiteNoise { t: f64 },
    /// A ↦ t Θ(A) + (1−t) tr[ηA] I.
    NoisyMixture {
        t: f64,
        theta: Box<Channel>,
        eta: CMatrix,
    },
    /// A ↦ Σ_x tr[ϱ_x A] F(x): measure with `povm`, reprepare `states`.
    MeasurePrepare {
        povm: Observable,
        states: Vec<CMatrix>,
    },
    /// first applied, then second: Λ(A) = first(second(A)).
    Compose {
        first: Box<Channel>,
        second: Box<Channel>,
    },
}

/// A unital channel with an explicit Kraus representation.
#[derive(Clone, Debug)]
pub struct Channel {
    dim: usize,
    kraus: Vec<CMatrix>,
    form: Form,
}

fn prune(kraus: Vec<CMatrix>) -> Vec<CMatrix> {
    kraus
        .into_iter()
        .filter(|k| k.frobenius_norm() > KRAUS_PRUNE)
        .collect()
}

fn unitality_defect(dim: usize, kraus: &[CMatrix]) -> f64 {
    let mut sum = CMatrix::zeros(dim);
    for k in kraus {
        sum = &sum + &(&k.adjoint() * k);
    }
    linalg::max_abs_diff(&sum, &CMatrix::identity(dim))
}

fn check_state(rho: &CMatrix, tol: f64) -> Result<()> {
    if rho.herm_defect() > tol.max(HERM_TOL) {
        return Err(Error::NotHermitian {
            defect: rho.herm_defect(),
            tol,
        });
    }
    let min = linalg::min_eigenvalue(&rho.symmetrize());
    if min < -tol {
        return Err(Error::NotPositive { min_eig: min });
    }
    let defect = (rho.trace_re() - 1.0).abs();
    if defect > tol {
        return Err(Error::NotNormalized { defect });
    }
    Ok(())
}

/// Row-vectorization: w[(i·d + j)] = K[(i, j)].
fn vec_row(k: &CMatrix) -> DVector<C64> {
    let d = k.dim();
    DVector::from_fn(d * d, |x, _| k[(x / d, x % d)])
}

fn unvec_row(v: &DVector<C64>, d: usize) -> CMatrix {
    CMatrix::from_fn(d, |i, j| v[i * d + j])
}

/// Kraus operators of the channel whose Choi matrix is `choi`, keeping
/// eigenvalues above 1e-14.
fn kraus_from_choi_raw(choi: &CMatrix, d: usize) -> Result<Vec<CMatrix>> {
    let (vals, vecs) = linalg::eig_hermitian(&choi.symmetrize(), HERM_TOL)?;
    let mut kraus = Vec::new();
    for (a, &lambda) in vals.iter().enumerate() {
        if lambda > 1e-14 {
            let v = vecs.as_dmatrix().column(a).into_owned();
            kraus.push(unvec_row(&v, d).scale((d as f64 * lambda).sqrt()));
        }
    }
    Ok(kraus)
}

impl Channel {
    /// The identity channel, as the t = 1 white-noise channel.
    pub fn identity(dim: usize) -> Result<Self> {
        Channel::white_noise(dim, 1.0)
    }

    /// Builds a channel from explicit Kraus operators, checking unitality.
    pub fn from_kraus(dim: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        if dim == 0 || dim * dim > linalg::DIM_CAP {
            return Err(Error::ResourceCap {
                what: "channel dimension",
                needed: dim * dim,
                cap: linalg::DIM_CAP,
            });
        }
        for k in &kraus {
            if k.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: k.dim(),
                });
            }
        }
        let kraus = prune(kraus);
        if kraus.is_empty() {
            return Err(Error::Invalid("channel needs at least one Kraus operator".into()));
        }
        let defect = unitality_defect(dim, &kraus);
        if defect > UNITAL_TOL {
            return Err(Error::NotUnital { defect });
        }
        Ok(Channel {
            dim,
            kraus,
            form: Form::Generic,
        })
    }

    /// White-noise channel Γ_t: A ↦ tA + (1−t) tr[A] I/d.
    pub fn white_noise(dim: usize, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfRange(format!("noise parameter t = {t}")));
        }
        if dim == 0 || dim * dim > linalg::DIM_CAP {
            return Err(Error::ResourceCap {
                what: "channel dimension",
                needed: dim * dim,
                cap: linalg::DIM_CAP,
            });
        }
        let mut kraus = vec![CMatrix::identity(dim).scale(t.sqrt())];
        let w = ((1.0 - t) / dim as f64).sqrt();
        for i in 0..dim {
            for j in 0..dim {
                kraus.push(CMatrix::from_fn(dim, |r, c| {
                    if r == i && c == j {
                        C64::new(w, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }));
            }
        }
        Ok(Channel {
            dim,
            kraus: prune(kraus),
            form: Form::WhiteNoise { t },
        })
    }

    /// A ↦ t Θ(A) + (1−t) tr[ηA] I for a channel Θ and a state η.
    pub fn noisy_mixture(t: f64, theta: &Channel, eta: &CMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfRange(format!("mixture parameter t = {t}")));
        }
        let d = theta.dim;
        if eta.dim() != d {
            return Err(Error::DimMismatch {
                expected: d,
                got: eta.dim(),
            });
        }
        check_state(eta, PARSE_TOL)?;
        let mut kraus: Vec<CMatrix> = theta.kraus.iter().map(|k| k.scale(t.sqrt())).collect();
        let (probs, basis) = linalg::eig_hermitian(&eta.symmetrize(), HERM_TOL)?;
        for (x, &p) in probs.iter().enumerate() {
            if p <= 1e-15 {
                continue;
            }
            let e = basis.as_dmatrix().column(x).into_owned();
            let w = ((1.0 - t) * p).sqrt();
            for j in 0..d {
                kraus.push(CMatrix::from_fn(d, |r, c| {
                    if c == j {
                        e[r] * w
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }));
            }
        }
        let kraus = prune(kraus);
        let defect = unitality_defect(d, &kraus);
        if defect > 1e-8 {
            return Err(Error::NotUnital { defect });
        }
        Ok(Channel {
            dim: d,
            kraus,
            form: Form::NoisyMixture {
                t,
                theta: Box::new(theta.clone()),
                eta: eta.clone(),
            },
        })
    }

    /// Measure-and-prepare channel: A ↦ Σ_x tr[ϱ_x A] F(x).
    ///
    /// `states` lists the repreparation states ϱ_x, one per POVM outcome.
    pub fn measure_prepare(povm: &Observable, states: &[CMatrix]) -> Result<Self> {
        let d = povm.dim();
        if states.len() != povm.outcomes() {
            return Err(Error::LabelMismatch(format!(
                "{} states for {} outcomes",
                states.len(),
                povm.outcomes()
            )));
        }
        let mut kraus = Vec::new();
        for (x, rho) in states.iter().enumerate() {
            if rho.dim() != d {
                return Err(Error::DimMismatch {
                    expected: d,
                    got: rho.dim(),
                });
            }
            check_state(rho, PARSE_TOL)?;
            let (probs, psi) = linalg::eig_hermitian(&rho.symmetrize(), HERM_TOL)?;
            let (weights, chi) = linalg::eig_hermitian(&povm.effect(x).symmetrize(), HERM_TOL)?;
            for (a, &p) in probs.iter().enumerate() {
                if p <= 1e-15 {
                    continue;
                }
                let pv = psi.as_dmatrix().column(a).into_owned();
                for (b, &m) in weights.iter().enumerate() {
                    if m <= 1e-15 {
                        continue;
                    }
                    let cv = chi.as_dmatrix().column(b).into_owned();
                    let w = (p * m).sqrt();
                    kraus.push(CMatrix::from_fn(d, |r, c| pv[r] * cv[c].conj() * w));
                }
            }
        }
        let kraus = prune(kraus);
        let defect = unitality_defect(d, &kraus);
        if defect > 1e-8 {
            return Err(Error::NotUnital { defect });
        }
        Ok(Channel {
            dim: d,
            kraus,
            form: Form::MeasurePrepare {
                povm: povm.clone(),
                states: states.to_vec(),
            },
        })
    }

    /// Conjugation channel A ↦ u†Au.
    pub fn unitary(u: &CMatrix) -> Result<Self> {
        let utu = &u.adjoint() * u;
        let defect = linalg::max_abs_diff(&utu, &CMatrix::identity(u.dim()));
        if defect > UNITAL_TOL {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Channel {
            dim: u.dim(),
            kraus: vec![u.clone()],
            form: Form::Generic,
        })
    }

    /// Reconstructs a channel from its Choi matrix (1/d) Σ_k w_k w_k† with
    /// w_k the row-vectorization of K_k. Validated at 1e-8: Hermitian, PSD,
    /// and tr_1 C = I/d.
    pub fn from_choi(choi: &CMatrix, dim: usize) -> Result<Self> {
        if choi.dim() != dim * dim {
            return Err(Error::DimMismatch {
                expected: dim * dim,
                got: choi.dim(),
            });
        }
        if choi.herm_defect() > PARSE_TOL {
            return Err(Error::NotHermitian {
                defect: choi.herm_defect(),
                tol: PARSE_TOL,
            });
        }
        let min = linalg::min_eigenvalue(&choi.symmetrize());
        if min < -PARSE_TOL {
            return Err(Error::NotPositive { min_eig: min });
        }
        let marg = linalg::partial_trace(choi, &[dim, dim], 1)?;
        let defect = linalg::max_abs_diff(&marg, &CMatrix::identity(dim).scale(1.0 / dim as f64));
        if defect > PARSE_TOL {
            return Err(Error::NotUnital {
                defect: defect * dim as f64,
            });
        }
        let kraus = kraus_from_choi_raw(choi, dim)?;
        if kraus.is_empty() {
            return Err(Error::Invalid("Choi matrix is numerically zero".into()));
        }
        Ok(Channel {
            dim,
            kraus,
            form: Form::Generic,
        })
    }

    /// Composition in time order: `first` acts on states before `second`, so
    /// on observables Λ(A) = first(second(A)).
    pub fn compose(first: &Channel, second: &Channel) -> Result<Self> {
        if first.dim != second.dim {
            return Err(Error::DimMismatch {
                expected: first.dim,
                got: second.dim,
            });
        }
        let d = first.dim;
        if let (Form::WhiteNoise { t: s }, Form::WhiteNoise { t }) = (&first.form, &second.form) {
            return Channel::white_noise(d, s * t);
        }
        let mut kraus = Vec::with_capacity(first.kraus.len() * second.kraus.len());
        for kb in &second.kraus {
            for ka in &first.kraus {
                kraus.push(kb * ka);
            }
        }
        let mut kraus = prune(kraus);
        if kraus.len() > d * d {
            let mut acc = DMatrix::<C64>::zeros(d * d, d * d);
            for k in &kraus {
                let w = vec_row(k);
                acc += &w * w.adjoint();
            }
            let choi = CMatrix::from_dmatrix(acc)?.scale(1.0 / d as f64);
            kraus = kraus_from_choi_raw(&choi, d)?;
        }
        Ok(Channel {
            dim: d,
            kraus,
            form: Form::Compose {
                first: Box::new(first.clone()),
                second: Box::new(second.clone()),
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    /// Heisenberg action Λ(A) = Σ K†AK.
    pub fn apply(&self, a: &CMatrix) -> Result<CMatrix> {
        if a.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: a.dim(),
            });
        }
        let mut out = CMatrix::zeros(self.dim);
        for k in &self.kraus {
            out = &out + &(&(&k.adjoint() * a) * k);
        }
        Ok(out)
    }

    /// Schrödinger action Λ_*(ρ) = Σ KρK†.
    pub fn apply_dual(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: rho.dim(),
            });
        }
        let mut out = CMatrix::zeros(self.dim);
        for k in &self.kraus {
            out = &out + &(&(k * rho) * &k.adjoint());
        }
        Ok(out)
    }

    /// Applies the channel to every effect of an observable.
    pub fn apply_observable(&self, obs: &Observable) -> Result<Observable> {
        let effects: Result<Vec<CMatrix>> = obs.effects().iter().map(|e| self.apply(e)).collect();
        Observable::with_tol(self.dim, obs.labels().to_vec(), effects?, 1e-7)
    }

    /// Choi matrix (1/d) Σ_k w_k w_k†, a state on the d²-dimensional doubled
    /// space whose first tensor factor carries the channel output.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim;
        let mut acc = DMatrix::<C64>::zeros(d * d, d * d);
        for k in &self.kraus {
            let w = vec_row(k);
            acc += &w * w.adjoint();
        }
        CMatrix::from_dmatrix(acc).unwrap().scale(1.0 / d as f64)
    }

    fn to_json_value(&self) -> Value {
        match &self.form {
            Form::WhiteNoise { t } => json!({ "white_noise": { "d": self.dim, "t": t } }),
            Form::NoisyMixture { t, theta, eta } => json!({
                "noisy_mixture": {
                    "t": t,
                    "theta": theta.to_json_value(),
                    "eta": serde_json::to_value(eta).unwrap(),
                }
            }),
            Form::MeasurePrepare { povm, states } => json!({
                "measure_prepare": {
                    "povm": serde_json::to_value(povm).unwrap(),
                    "states": serde_json::to_value(states).unwrap(),
                }
            }),
            Form::Compose { first, second } => json!({
                "compose": [first.to_json_value(), second.to_json_value()]
            }),
            Form::Generic => json!({
                "dim": self.dim,
                "kraus": serde_json::to_value(&self.kraus).unwrap(),
            }),
        }
    }

    /// Parses a channel from one of the accepted JSON shapes:
    /// `{"dim", "kraus"}`, `{"dim", "choi"}`, `{"white_noise": {"d", "t"}}`,
    /// `{"noisy_mixture": {"t", "theta", "eta"}}`,
    /// `{"measure_prepare": {"povm", "states"}}`, or `{"compose": [a, b]}`.
    pub fn from_json_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Invalid("channel JSON must be an object".into()))?;
        if let Some(wn) = obj.get("white_noise") {
            let d = wn
                .get("d")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Invalid("white_noise needs integer d".into()))?;
            let t = wn
                .get("t")
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Invalid("white_noise needs numeric t".into()))?;
            return Channel::white_noise(d as usize, t);
        }
        if let Some(nm) = obj.get("noisy_mixture") {
            let t = nm
                .get("t")
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Invalid("noisy_mixture needs numeric t".into()))?;
            let theta = Channel::from_json_value(
                nm.get("theta")
                    .ok_or_else(|| Error::Invalid("noisy_mixture needs theta".into()))?,
            )?;
            let eta: CMatrix = serde_json::from_value(
                nm.get("eta")
                    .cloned()
                    .ok_or_else(|| Error::Invalid("noisy_mixture needs eta".into()))?,
            )?;
            return Channel::noisy_mixture(t, &theta, &eta);
        }
        if let Some(mp) = obj.get("measure_prepare") {
            let povm: Observable = serde_json::from_value(
                mp.get("povm")
                    .cloned()
                    .ok_or_else(|| Error::Invalid("measure_prepare needs povm".into()))?,
            )?;
            let states: Vec<CMatrix> = serde_json::from_value(
                mp.get("states")
                    .cloned()
                    .ok_or_else(|| Error::Invalid("measure_prepare needs states".into()))?,
            )?;
            return Channel::measure_prepare(&povm, &states);
        }
        if let Some(pair) = obj.get("compose") {
            let arr = pair
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::Invalid("compose needs exactly two channels".into()))?;
            let first = Channel::from_json_value(&arr[0])?;
            let second = Channel::from_json_value(&arr[1])?;
            return Channel::compose(&first, &second);
        }
        let dim = obj
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Invalid("channel JSON needs integer dim".into()))?
            as usize;
        if let Some(kraus) = obj.get("kraus") {
            let kraus: Vec<CMatrix> = serde_json::from_value(kraus.clone())?;
            return Channel::from_kraus(dim, kraus);
        }
        if let Some(choi) = obj.get("choi") {
            let choi: CMatrix = serde_json::from_value(choi.clone())?;
            return Channel::from_choi(&choi, dim);
        }
        Err(Error::Invalid(
            "channel JSON needs one of kraus, choi, white_noise, noisy_mixture, measure_prepare, compose".into(),
        ))
    }
}

impl Serialize for Channel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Channel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Channel::from_json_value(&v).map_err(D::Error::custom)
    }
}

/// Largest entrywise difference between the Choi matrices of two channels.
pub fn choi_distance(a: &Channel, b: &Channel) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    Ok(linalg::max_abs_diff(&a.choi(), &b.choi()))
}

/// Samples a Haar-flavored random channel: Ginibre Kraus operators
/// renormalized by the inverse square root of their unitality sum.
pub fn random_channel(d: usize, kraus_count: usize, rng: &mut impl rand::Rng) -> Result<Channel> {
    if kraus_count == 0 {
        return Err(Error::Invalid("kraus_count must be positive".into()));
    }
    let raw: Vec<CMatrix> = (0..kraus_count)
        .map(|_| {
            CMatrix::from_fn(d, |_, _| {
                C64::new(
                    rng.sample::<f64, _>(rand_distr::StandardNormal),
                    rng.sample::<f64, _>(rand_distr::StandardNormal),
                )
            })
        })
        .collect();
    let mut s = CMatrix::zeros(d);
    for k in &raw {
        s = &s + &(&k.adjoint() * k);
    }
    let (vals, v) = linalg::eig_hermitian(&s, HERM_TOL)?;
    let inv_sqrt: Vec<f64> = vals.iter().map(|x| 1.0 / x.sqrt()).collect();
    let w = &(&v * &CMatrix::from_diagonal(&inv_sqrt)) * &v.adjoint();
    let kraus: Vec<CMatrix> = raw.iter().map(|k| k * &w).collect();
    Channel::from_kraus(d, kraus)
}
