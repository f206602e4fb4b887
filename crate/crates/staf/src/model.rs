//! Measurement model: signals, Gaussian sensing ensembles, amplitude
//! measurements, phase-invariant distances and the amplitude loss.
//!
//! The model is `ψᵢ = |⟨aᵢ, x⟩| + ηᵢ` with `⟨a, x⟩ = aᴴx` and optional
//! additive Gaussian noise `ηᵢ ~ N(0, σ²‖x‖²)`. Noisy amplitudes may go
//! negative; they are kept as-is rather than clamped, matching the additive
//! model literally.

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};
use rand::Rng;
use rand_distr::StandardNormal;

/// The unknown vector being recovered (ground truth in experiments).
#[derive(Debug, Clone, PartialEq)]
pub struct Signal<S: Scalar> {
    entries: Vec<S>,
}

impl<S: Scalar> Signal<S> {
    pub fn new(entries: Vec<S>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("signal length must be >= 1".into()));
        }
        if entries.iter().any(|c| !c.is_finite()) {
            return Err(Error::Data("signal entries must be finite".into()));
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        scalar::norm(&self.entries)
    }

    pub fn into_vec(self) -> Vec<S> {
        self.entries
    }
}

/// The stack of sensing vectors `a₁..a_m`, stored row-major with cached
/// squared row norms.
#[derive(Debug, Clone)]
pub struct SensingEnsemble<S: Scalar> {
    data: Vec<S>,
    row_sq_norms: Vec<f64>,
    m: usize,
    n: usize,
}

impl<S: Scalar> SensingEnsemble<S> {
    /// Build from `m` rows of length `n`, flattened row-major.
    pub fn from_rows(data: Vec<S>, m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "ensemble dims must be positive, got m={m}, n={n}"
            )));
        }
        if data.len() != m * n {
            return Err(Error::DimensionMismatch {
                context: "ensemble rows",
                expected: m * n,
                actual: data.len(),
            });
        }
        let row_sq_norms = (0..m)
            .map(|i| scalar::norm_sqr(&data[i * n..(i + 1) * n]))
            .collect();
        Ok(Self { data, row_sq_norms, m, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Cached `‖aᵢ‖²`.
    pub fn row_sq_norm(&self, i: usize) -> f64 {
        self.row_sq_norms[i]
    }

    pub fn row_sq_norms(&self) -> &[f64] {
        &self.row_sq_norms
    }

    /// `aᵢᴴ z`.
    pub fn row_dot(&self, i: usize, z: &[S]) -> S {
        scalar::dot(self.row(i), z)
    }
}

/// RNG provenance recorded alongside generated measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SeedMeta {
    pub seed: u64,
    pub stream: u64,
}

/// Amplitudes `ψᵢ` (the squared data `yᵢ = ψᵢ²` is derived, never stored).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    psi: Vec<f64>,
    noise_sigma: f64,
    seed_meta: SeedMeta,
}

impl MeasurementSet {
    pub fn new(psi: Vec<f64>, noise_sigma: f64, seed_meta: SeedMeta) -> Result<Self> {
        if psi.is_empty() {
            return Err(Error::InvalidArgument("empty measurement set".into()));
        }
        if noise_sigma < 0.0 {
            return Err(Error::InvalidArgument("noise sigma must be >= 0".into()));
        }
        if psi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite amplitude".into()));
        }
        if noise_sigma == 0.0 && psi.iter().any(|&v| v < 0.0) {
            return Err(Error::Data("negative amplitude in noiseless data".into()));
        }
        Ok(Self { psi, noise_sigma, seed_meta })
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    /// Squared datum `yᵢ = ψᵢ²`, exactly.
    pub fn y(&self, i: usize) -> f64 {
        self.psi[i] * self.psi[i]
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn seed_meta(&self) -> SeedMeta {
        self.seed_meta
    }
}

/// A solver iterate together with how many data passes produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate<S: Scalar> {
    pub values: Vec<S>,
    pub pass_count: f64,
}

impl<S: Scalar> Iterate<S> {
    pub fn new(values: Vec<S>) -> Self {
        Self { values, pass_count: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// An i.i.d. standard Gaussian signal; complex entries have `N(0,1/2)` real
/// and imaginary parts so `E‖x‖² = n` in both fields.
pub fn gen_gaussian_signal<S: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Signal<S>> {
    if n == 0 {
        return Err(Error::InvalidArgument("signal length must be >= 1".into()));
    }
    Signal::new((0..n).map(|_| S::sample_standard(rng)).collect())
}

/// An `m × n` ensemble of i.i.d. standard Gaussian sensing vectors.
///
/// Zero rows (a probability-zero event) are rejected and resampled so that
/// row-normalized quantities are always well defined.
pub fn gen_gaussian_sensing<S: Scalar, R: Rng + ?Sized>(
    m: usize,
    n: usize,
    rng: &mut R,
) -> Result<SensingEnsemble<S>> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "ensemble dims must be positive, got m={m}, n={n}"
        )));
    }
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..m {
        loop {
            let start = data.len();
            data.extend((0..n).map(|_| S::sample_standard(rng)));
            if scalar::norm_sqr(&data[start..]) > 0.0 {
                break;
            }
            data.truncate(start);
        }
    }
    SensingEnsemble::from_rows(data, m, n)
}

/// Amplitude measurements `ψᵢ = |⟨aᵢ, x⟩| + ηᵢ`, `ηᵢ ~ N(0, σ²‖x‖²)`.
///
/// `sigma = 0` gives exact amplitudes. Noisy values are not clamped at zero.
pub fn measure<S: Scalar, R: Rng + ?Sized>(
    ens: &SensingEnsemble<S>,
    x: &Signal<S>,
    sigma: f64,
    rng: &mut R,
    seed_meta: SeedMeta,
) -> Result<MeasurementSet> {
    if ens.n() != x.len() {
        return Err(Error::DimensionMismatch {
            context: "measure",
            expected: ens.n(),
            actual: x.len(),
        });
    }
    if sigma < 0.0 {
        return Err(Error::InvalidArgument("sigma must be >= 0".into()));
    }
    let noise_scale = sigma * x.norm();
    let psi = (0..ens.m())
        .map(|i| {
            let amp = ens.row_dot(i, x.as_slice()).abs();
            if noise_scale > 0.0 {
                let eta: f64 = rng.sample(StandardNormal);
                amp + noise_scale * eta
            } else {
                amp
            }
        })
        .collect();
    MeasurementSet::new(psi, sigma, seed_meta)
}

/// Euclidean distance modulo the global sign (real) or phase (complex)
/// ambiguity: `min ‖z ∓ x‖` resp. `min_φ ‖z − x·e^{iφ}‖`.
///
/// The minimizing phase is `e^{iφ*} = sign⟨x, z⟩`, so the distance is
/// evaluated by direct subtraction after phase alignment; this matches the
/// closed form `√(‖z‖² + ‖x‖² − 2|⟨x,z⟩|)` without its cancellation error
/// near zero.
pub fn dist<S: Scalar>(z: &[S], x: &[S]) -> Result<f64> {
    if z.len() != x.len() {
        return Err(Error::DimensionMismatch {
            context: "dist",
            expected: x.len(),
            actual: z.len(),
        });
    }
    let phase = scalar::dot(x, z).unit_sign();
    let mut acc = 0.0;
    for (&zi, &xi) in z.iter().zip(x.iter()) {
        acc += (zi - xi * phase).norm_sqr();
    }
    Ok(acc.sqrt())
}

/// `dist(z, x) / ‖x‖`; errors when `‖x‖ = 0`.
pub fn relative_error<S: Scalar>(z: &[S], x: &[S]) -> Result<f64> {
    let nx = scalar::norm(x);
    if nx == 0.0 {
        return Err(Error::ZeroNormSignal);
    }
    Ok(dist(z, x)? / nx)
}

/// Amplitude least-squares loss `½ Σᵢ (ψᵢ − |aᵢᴴz|)²`.
pub fn amplitude_loss<S: Scalar>(
    z: &[S],
    ens: &SensingEnsemble<S>,
    meas: &MeasurementSet,
) -> Result<f64> {
    if z.len() != ens.n() {
        return Err(Error::DimensionMismatch {
            context: "amplitude_loss iterate",
            expected: ens.n(),
            actual: z.len(),
        });
    }
    if meas.len() != ens.m() {
        return Err(Error::DimensionMismatch {
            context: "amplitude_loss measurements",
            expected: ens.m(),
            actual: meas.len(),
        });
    }
    let mut acc = 0.0;
    for i in 0..ens.m() {
        let r = meas.psi()[i] - ens.row_dot(i, z).abs();
        acc += r * r;
    }
    Ok(0.5 * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use num_complex::Complex64;

    #[test]
    fn gen_signal_is_deterministic_per_seed() {
        let a: Signal<f64> = gen_gaussian_signal(3, &mut stream_rng(42, 0)).unwrap();
        let b: Signal<f64> = gen_gaussian_signal(3, &mut stream_rng(42, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gen_signal_rejects_zero_length() {
        assert!(gen_gaussian_signal::<f64, _>(0, &mut stream_rng(1, 0)).is_err());
    }

    #[test]
    fn signal_energy_concentrates_real() {
        let x: Signal<f64> = gen_gaussian_signal(10_000, &mut stream_rng(3, 0)).unwrap();
        let mean = x.norm().powi(2) / 10_000.0;
        assert!((0.97..=1.03).contains(&mean), "got {mean}");
    }

    #[test]
    fn signal_energy_concentrates_complex() {
        let x: Signal<Complex64> = gen_gaussian_signal(10_000, &mut stream_rng(4, 0)).unwrap();
        let mean = x.norm().powi(2) / 10_000.0;
        assert!((0.97..=1.03).contains(&mean), "got {mean}");
    }

    #[test]
    fn sensing_single_scalar_row() {
        let ens: SensingEnsemble<f64> = gen_gaussian_sensing(1, 1, &mut stream_rng(5, 0)).unwrap();
        let a = ens.row(0)[0];
        assert!((ens.row_sq_norm(0) - a * a).abs() < 1e-15);
    }

    #[test]
    fn sensing_row_norm_bound_holds() {
        // max ‖aᵢ‖² ≤ 2.3·n with slack 1.2 for small n
        let ens: SensingEnsemble<f64> =
            gen_gaussian_sensing(2000, 100, &mut stream_rng(6, 0)).unwrap();
        let max = ens.row_sq_norms().iter().cloned().fold(0.0, f64::max);
        assert!(max <= 2.3 * 100.0 * 1.2, "max row norm^2 = {max}");
    }

    #[test]
    fn sensing_mean_row_norm() {
        let ens: SensingEnsemble<f64> =
            gen_gaussian_sensing(500, 50, &mut stream_rng(7, 0)).unwrap();
        let mean = ens.row_sq_norms().iter().sum::<f64>() / (500.0 * 50.0);
        assert!((0.9..=1.1).contains(&mean), "got {mean}");
    }

    #[test]
    fn cached_norms_match_recomputation() {
        let ens: SensingEnsemble<Complex64> =
            gen_gaussian_sensing(40, 17, &mut stream_rng(8, 0)).unwrap();
        for i in 0..ens.m() {
            let fresh = scalar::norm_sqr(ens.row(i));
            let rel = (ens.row_sq_norm(i) - fresh).abs() / fresh;
            assert!(rel < 1e-12);
        }
    }

    #[test]
    fn measure_standard_basis_rows() {
        // rows = e1, e2, e3; x = (1, -2, 0) → ψ = (1, 2, 0)
        let data = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let ens = SensingEnsemble::from_rows(data, 3, 3).unwrap();
        let x = Signal::new(vec![1.0, -2.0, 0.0]).unwrap();
        let meas = measure(&ens, &x, 0.0, &mut stream_rng(0, 0), SeedMeta::default()).unwrap();
        assert_eq!(meas.psi(), &[1.0, 2.0, 0.0]);
    }

    #[test]
    fn measure_zero_signal() {
        let ens: SensingEnsemble<f64> = gen_gaussian_sensing(5, 3, &mut stream_rng(9, 0)).unwrap();
        let x = Signal::new(vec![0.0, 0.0, 0.0]).unwrap();
        let meas = measure(&ens, &x, 0.0, &mut stream_rng(0, 0), SeedMeta::default()).unwrap();
        assert!(meas.psi().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn measure_hand_inner_product() {
        let ens = SensingEnsemble::from_rows(vec![3.0, 4.0], 1, 2).unwrap();
        let x = Signal::new(vec![1.0, 1.0]).unwrap();
        let meas = measure(&ens, &x, 0.0, &mut stream_rng(0, 0), SeedMeta::default()).unwrap();
        assert!((meas.psi()[0] - 7.0).abs() < 1e-15);
    }

    #[test]
    fn measure_dimension_mismatch() {
        let ens: SensingEnsemble<f64> = gen_gaussian_sensing(4, 3, &mut stream_rng(10, 0)).unwrap();
        let x = Signal::new(vec![1.0, 2.0]).unwrap();
        assert!(measure(&ens, &x, 0.0, &mut stream_rng(0, 0), SeedMeta::default()).is_err());
    }

    #[test]
    fn measure_is_bit_deterministic() {
        let ens: SensingEnsemble<f64> = gen_gaussian_sensing(20, 6, &mut stream_rng(11, 0)).unwrap();
        let x: Signal<f64> = gen_gaussian_signal(6, &mut stream_rng(12, 0)).unwrap();
        let a = measure(&ens, &x, 0.3, &mut stream_rng(13, 2), SeedMeta { seed: 13, stream: 2 }).unwrap();
        let b = measure(&ens, &x, 0.3, &mut stream_rng(13, 2), SeedMeta { seed: 13, stream: 2 }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noisy_amplitudes_may_go_negative() {
        let ens: SensingEnsemble<f64> =
            gen_gaussian_sensing(2000, 4, &mut stream_rng(14, 0)).unwrap();
        let x: Signal<f64> = gen_gaussian_signal(4, &mut stream_rng(15, 0)).unwrap();
        let meas = measure(&ens, &x, 0.5, &mut stream_rng(16, 0), SeedMeta::default()).unwrap();
        assert!(meas.psi().iter().any(|&p| p < 0.0), "expected some negative noisy amplitudes");
    }

    #[test]
    fn dist_basic_cases() {
        let x = vec![1.0, -2.0, 0.5];
        assert_eq!(dist(&x, &x).unwrap(), 0.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(dist(&neg, &x).unwrap(), 0.0);
        let d = dist(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((d - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dist_matches_sign_enumeration_real() {
        let mut rng = stream_rng(17, 0);
        for _ in 0..50 {
            let z: Signal<f64> = gen_gaussian_signal(8, &mut rng).unwrap();
            let x: Signal<f64> = gen_gaussian_signal(8, &mut rng).unwrap();
            let brute = {
                let minus: f64 = z
                    .as_slice()
                    .iter()
                    .zip(x.as_slice())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let plus: f64 = z
                    .as_slice()
                    .iter()
                    .zip(x.as_slice())
                    .map(|(a, b)| (a + b) * (a + b))
                    .sum::<f64>()
                    .sqrt();
                minus.min(plus)
            };
            let d = dist(z.as_slice(), x.as_slice()).unwrap();
            assert!((d - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn relative_error_cases() {
        let x = vec![1.0, 2.0, -1.0];
        assert_eq!(relative_error(&x, &x).unwrap(), 0.0);
        let double: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        assert!((relative_error(&double, &x).unwrap() - 1.0).abs() < 1e-15);
        let zero = vec![0.0, 0.0, 0.0];
        assert!((relative_error(&zero, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(relative_error(&x, &zero), Err(Error::ZeroNormSignal)));
    }

    #[test]
    fn amplitude_loss_cases() {
        let ens = SensingEnsemble::from_rows(vec![1.0], 1, 1).unwrap();
        let meas = MeasurementSet::new(vec![2.0], 0.0, SeedMeta::default()).unwrap();
        let loss = amplitude_loss(&[1.0], &ens, &meas).unwrap();
        assert!((loss - 0.5).abs() < 1e-15);

        // solving iterate has zero loss
        let mut rng = stream_rng(18, 0);
        let ens: SensingEnsemble<f64> = gen_gaussian_sensing(12, 5, &mut rng).unwrap();
        let x: Signal<f64> = gen_gaussian_signal(5, &mut rng).unwrap();
        let meas = measure(&ens, &x, 0.0, &mut rng, SeedMeta::default()).unwrap();
        assert!(amplitude_loss(x.as_slice(), &ens, &meas).unwrap() < 1e-22);
    }
}
