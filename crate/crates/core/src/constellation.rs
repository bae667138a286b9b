//! Constellations, probabilistic/geometric shaping and fourth-moment statistics.
//!
//! Every [`Constellation`] is normalized to unit average power on
//! construction, so its kurtosis reduces to `Σ pᵢ |xᵢ|⁴`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::seed;

const NORM_TOL: f64 = 1e-12;
const DISTINCT_TOL: f64 = 1e-9;

/// Kurtosis of the standard circularly-symmetric complex Gaussian.
pub const GAUSSIAN_KURTOSIS: f64 = 2.0;

/// A discrete symbol alphabet with its probability mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConstellation", into = "RawConstellation")]
pub struct Constellation {
    name: String,
    points: Vec<Complex64>,
    probs: Vec<f64>,
    gray_labels: Option<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstellation {
    name: String,
    points: Vec<[f64; 2]>,
    probs: Vec<f64>,
}

impl TryFrom<RawConstellation> for Constellation {
    type Error = IsacError;

    fn try_from(raw: RawConstellation) -> Result<Self> {
        let points = raw
            .points
            .iter()
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        Constellation::new(raw.name, points, raw.probs)
    }
}

impl From<Constellation> for RawConstellation {
    fn from(c: Constellation) -> Self {
        RawConstellation {
            name: c.name,
            points: c.points.iter().map(|p| [p.re, p.im]).collect(),
            probs: c.probs,
        }
    }
}

/// Sub-/super-Gaussian classification relative to the complex Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KurtosisClass {
    SubGaussian,
    Gaussian,
    SuperGaussian,
}

impl KurtosisClass {
    pub fn of(kurtosis: f64) -> Self {
        if (kurtosis - GAUSSIAN_KURTOSIS).abs() < 1e-12 {
            KurtosisClass::Gaussian
        } else if kurtosis < GAUSSIAN_KURTOSIS {
            KurtosisClass::SubGaussian
        } else {
            KurtosisClass::SuperGaussian
        }
    }
}

impl Constellation {
    /// Builds a constellation from an arbitrary point set (geometric shaping).
    ///
    /// Probabilities must be non-negative and sum to one; the points are
    /// rescaled so that the average power under `probs` is one.
    pub fn new(name: impl Into<String>, points: Vec<Complex64>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(IsacError::Empty("constellation points"));
        }
        if probs.len() != points.len() {
            return Err(IsacError::LengthMismatch {
                expected: points.len(),
                actual: probs.len(),
            });
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(IsacError::invalid("probs", "probabilities must be finite and non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(IsacError::invalid("probs", format!("probabilities sum to {total}, not 1")));
        }
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(IsacError::invalid("points", "non-finite point"));
        }
        let power: f64 = points.iter().zip(&probs).map(|(x, p)| p * x.norm_sqr()).sum();
        if power <= 0.0 {
            return Err(IsacError::invalid("points", "zero average power"));
        }
        let scale = power.sqrt().recip();
        let points: Vec<Complex64> = points.into_iter().map(|x| x * scale).collect();
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if (points[i] - points[j]).norm() < DISTINCT_TOL {
                    return Err(IsacError::invalid(
                        "points",
                        format!("points {i} and {j} coincide"),
                    ));
                }
            }
        }
        Ok(Constellation {
            name: name.into(),
            points,
            probs,
            gray_labels: None,
        })
    }

    fn uniform(name: String, points: Vec<Complex64>) -> Result<Self> {
        let n = points.len();
        Self::new(name, points, vec![1.0 / n as f64; n])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Average power `Σ pᵢ |xᵢ|²`; one up to rounding.
    pub fn average_power(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.probs)
            .map(|(x, p)| p * x.norm_sqr())
            .sum()
    }

    /// Gray labels, present for PSK and square QAM.
    pub fn gray_labels(&self) -> Option<&[u32]> {
        self.gray_labels.as_deref()
    }

    pub fn bits_per_symbol(&self) -> Option<u32> {
        self.gray_labels
            .as_ref()
            .map(|_| self.points.len().trailing_zeros())
    }

    /// Maps a bit stream (one bit per byte, MSB first per symbol) through the Gray labeling.
    pub fn map_bits(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let labels = self
            .gray_labels
            .as_ref()
            .ok_or_else(|| IsacError::invalid("constellation", "no Gray labeling for this alphabet"))?;
        let k = self.points.len().trailing_zeros() as usize;
        if bits.len() % k != 0 {
            return Err(IsacError::invalid(
                "bits",
                format!("{} bits is not a multiple of {k}", bits.len()),
            ));
        }
        let mut by_label = vec![0usize; labels.len()];
        for (idx, &label) in labels.iter().enumerate() {
            by_label[label as usize] = idx;
        }
        bits.chunks(k)
            .map(|chunk| {
                let mut label = 0usize;
                for &b in chunk {
                    if b > 1 {
                        return Err(IsacError::invalid("bits", "bit values must be 0 or 1"));
                    }
                    label = (label << 1) | b as usize;
                }
                Ok(self.points[by_label[label]])
            })
            .collect()
    }
}

fn snap(v: f64) -> f64 {
    if v.abs() < 1e-15 {
        0.0
    } else {
        v
    }
}

fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

/// M-PSK with the first point at angle zero.
pub fn make_psk(order: usize) -> Result<Constellation> {
    if order < 2 {
        return Err(IsacError::invalid("order", format!("PSK order must be >= 2, got {order}")));
    }
    let points = (0..order)
        .map(|k| {
            let z = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / order as f64);
            // Exact axes for the quarter-turn points.
            Complex64::new(snap(z.re), snap(z.im))
        })
        .collect();
    let mut c = Constellation::uniform(format!("{order}-PSK"), points)?;
    if order.is_power_of_two() {
        c.gray_labels = Some((0..order as u32).map(gray).collect());
    }
    Ok(c)
}

/// Square M-QAM with odd-integer levels, M ∈ {4, 16, 64, 256}.
pub fn make_qam(order: usize) -> Result<Constellation> {
    if !matches!(order, 4 | 16 | 64 | 256) {
        return Err(IsacError::invalid(
            "order",
            format!("square QAM order must be one of 4, 16, 64, 256, got {order}"),
        ));
    }
    let side = (order as f64).sqrt().round() as usize;
    let half_bits = side.trailing_zeros();
    let level = |i: usize| (2 * i) as f64 - (side - 1) as f64;
    let mut points = Vec::with_capacity(order);
    let mut labels = Vec::with_capacity(order);
    for i in 0..side {
        for q in 0..side {
            points.push(Complex64::new(level(i), level(q)));
            labels.push((gray(i as u32) << half_bits) | gray(q as u32));
        }
    }
    let mut c = Constellation::uniform(format!("{order}-QAM"), points)?;
    c.gray_labels = Some(labels);
    Ok(c)
}

/// One APSK ring: `count` points at `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApskRing {
    pub count: usize,
    pub radius: f64,
}

/// Multi-ring APSK. Ring `r` is rotated by `π / count_r`.
pub fn make_apsk(rings: &[ApskRing]) -> Result<Constellation> {
    if rings.is_empty() {
        return Err(IsacError::Empty("APSK rings"));
    }
    for (i, ring) in rings.iter().enumerate() {
        if ring.count == 0 {
            return Err(IsacError::invalid("rings", format!("ring {i} has zero points")));
        }
        if !(ring.radius > 0.0) || !ring.radius.is_finite() {
            return Err(IsacError::invalid("rings", format!("ring {i} radius must be positive")));
        }
        if i > 0 && ring.radius <= rings[i - 1].radius {
            let reason = if ring.radius == rings[i - 1].radius {
                format!("duplicate radius {} at ring {i}", ring.radius)
            } else {
                format!("radii must be strictly increasing (ring {i})")
            };
            return Err(IsacError::invalid("rings", reason));
        }
    }
    let mut points = Vec::new();
    for ring in rings {
        let offset = PI / ring.count as f64;
        for k in 0..ring.count {
            let angle = offset + 2.0 * PI * k as f64 / ring.count as f64;
            points.push(Complex64::from_polar(ring.radius, angle));
        }
    }
    let label = rings
        .iter()
        .map(|r| r.count.to_string())
        .collect::<Vec<_>>()
        .join("+");
    Constellation::uniform(format!("{label}-APSK"), points)
}

/// Probabilistic shaping applied over a fixed point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapingSpec {
    Uniform,
    MaxwellBoltzmann { lambda: f64 },
    Custom { probs: Vec<f64> },
}

/// Re-weights `base` without moving its points, then re-normalizes to unit power.
///
/// Maxwell–Boltzmann weights are `exp(-λ |xᵢ|²)` evaluated on the base points
/// as stored, before the final renormalization.
pub fn apply_shaping(base: &Constellation, spec: &ShapingSpec) -> Result<Constellation> {
    let n = base.len();
    let (probs, suffix) = match spec {
        ShapingSpec::Uniform => (vec![1.0 / n as f64; n], "uniform".to_string()),
        ShapingSpec::MaxwellBoltzmann { lambda } => {
            if !lambda.is_finite() || *lambda < 0.0 {
                return Err(IsacError::invalid("lambda", format!("must be finite and >= 0, got {lambda}")));
            }
            (maxwell_boltzmann(base.points(), *lambda), format!("MB(λ={lambda})"))
        }
        ShapingSpec::Custom { probs } => {
            if probs.len() != n {
                return Err(IsacError::LengthMismatch {
                    expected: n,
                    actual: probs.len(),
                });
            }
            (probs.clone(), "custom".to_string())
        }
    };
    let mut shaped = Constellation::new(
        format!("{} {suffix}", base.name()),
        base.points().to_vec(),
        probs,
    )?;
    shaped.gray_labels = base.gray_labels.clone();
    Ok(shaped)
}

fn maxwell_boltzmann(points: &[Complex64], lambda: f64) -> Vec<f64> {
    // Shift by the minimum energy so large λ does not underflow every weight.
    let min_e = points.iter().map(|x| x.norm_sqr()).fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = points
        .iter()
        .map(|x| (-lambda * (x.norm_sqr() - min_e)).exp())
        .collect();
    let total: f64 = w.iter().sum();
    let mut probs: Vec<f64> = w.iter().map(|v| v / total).collect();
    // Absorb the last ulp of rounding so the sum check is exact to 1e-12.
    let s: f64 = probs.iter().sum();
    let (imax, _) = probs
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc });
    probs[imax] += 1.0 - s;
    probs
}

/// `E|x|⁴ / (E|x|²)²` under the constellation's probability mass.
pub fn kurtosis(c: &Constellation) -> f64 {
    let (m2, m4) = c
        .points
        .iter()
        .zip(&c.probs)
        .fold((0.0, 0.0), |(m2, m4), (x, p)| {
            let e = x.norm_sqr();
            (m2 + p * e, m4 + p * e * e)
        });
    m4 / (m2 * m2)
}

/// Sample kurtosis of a symbol vector, same formula with empirical moments.
pub fn sample_kurtosis(samples: &[Complex64]) -> f64 {
    let n = samples.len() as f64;
    let (m2, m4) = samples.iter().fold((0.0, 0.0), |(m2, m4), x| {
        let e = x.norm_sqr();
        (m2 + e, m4 + e * e)
    });
    (m4 / n) / ((m2 / n) * (m2 / n))
}

/// λ grid used to probe the reachable kurtosis interval of the MB family.
fn lambda_probe_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    let steps = 120;
    let (lo, hi) = (-3.0f64, 3.0f64);
    for i in 0..=steps {
        grid.push(10f64.powf(lo + (hi - lo) * i as f64 / steps as f64));
    }
    grid
}

/// Finds a Maxwell–Boltzmann parameter whose shaped kurtosis is within `tol` of `target`.
pub fn shape_for_kurtosis(base: &Constellation, target: f64, tol: f64) -> Result<ShapingSpec> {
    if !(tol > 0.0) {
        return Err(IsacError::invalid("tol", "tolerance must be positive"));
    }
    let kappa = |lambda: f64| -> Result<f64> {
        Ok(kurtosis(&apply_shaping(
            base,
            &ShapingSpec::MaxwellBoltzmann { lambda },
        )?))
    };
    let grid = lambda_probe_grid();
    let values: Vec<f64> = grid.iter().map(|&l| kappa(l)).collect::<Result<_>>()?;

    if (values[0] - target).abs() <= tol {
        return Ok(ShapingSpec::MaxwellBoltzmann { lambda: 0.0 });
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if target < min - tol || target > max + tol {
        return Err(IsacError::OutOfRange { target, min, max });
    }
    for i in 0..grid.len() {
        if (values[i] - target).abs() <= tol {
            if i + 1 < grid.len() && (values[i + 1] - target).signum() != (values[i] - target).signum() {
                break;
            }
            return Ok(ShapingSpec::MaxwellBoltzmann { lambda: grid[i] });
        }
    }
    let bracket = (0..grid.len() - 1)
        .find(|&i| (values[i] - target) * (values[i + 1] - target) <= 0.0)
        .ok_or(IsacError::OutOfRange { target, min, max })?;
    let (mut lo, mut hi) = (grid[bracket], grid[bracket + 1]);
    let mut f_lo = values[bracket] - target;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = kappa(mid)? - target;
        if f_mid.abs() <= tol {
            return Ok(ShapingSpec::MaxwellBoltzmann { lambda: mid });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(ShapingSpec::MaxwellBoltzmann { lambda: 0.5 * (lo + hi) })
}

/// Reusable i.i.d. symbol source for one constellation.
#[derive(Debug, Clone)]
pub struct SymbolSampler {
    points: Vec<Complex64>,
    index: WeightedIndex<f64>,
}

impl SymbolSampler {
    pub fn new(c: &Constellation) -> Self {
        let index = WeightedIndex::new(c.probs()).expect("constellation probabilities are validated");
        SymbolSampler {
            points: c.points().to_vec(),
            index,
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Complex64]) {
        for slot in out.iter_mut() {
            *slot = self.points[self.index.sample(rng)];
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        self.points[self.index.sample(rng)]
    }
}

/// `n` i.i.d. symbols from `c`, deterministic in `seed`.
pub fn sample_symbols(c: &Constellation, n: usize, seed: u64) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(IsacError::invalid("n", "at least one symbol is required"));
    }
    let sampler = SymbolSampler::new(c);
    let mut rng = seed::rng(seed);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    sampler.fill(&mut rng, &mut out);
    Ok(out)
}

/// `n` standard circularly-symmetric complex Gaussian samples (`E|x|² = 1`).
pub fn complex_gaussian(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = seed::rng(seed);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * s, im * s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Enumeration oracle over the raw (unnormalized) integer grid.
    fn qam_kurtosis_oracle(order: usize) -> f64 {
        let side = (order as f64).sqrt() as i64;
        let levels: Vec<i64> = (0..side).map(|i| 2 * i - (side - 1)).collect();
        let (mut m2, mut m4) = (0i64, 0i64);
        for &a in &levels {
            for &b in &levels {
                let e = a * a + b * b;
                m2 += e;
                m4 += e * e;
            }
        }
        let n = order as f64;
        (m4 as f64 / n) / ((m2 as f64 / n).powi(2))
    }

    #[test]
    fn psk_points_and_kurtosis() {
        let bpsk = make_psk(2).unwrap();
        assert!((bpsk.points()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((bpsk.points()[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(bpsk.probs(), &[0.5, 0.5]);
        let qpsk = make_psk(4).unwrap();
        let expect = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        for (p, e) in qpsk.points().iter().zip(expect) {
            assert!((p - e).norm() < 1e-15);
        }
        for m in [2, 3, 4, 8, 16, 32] {
            assert!((kurtosis(&make_psk(m).unwrap()) - 1.0).abs() < 1e-12);
        }
        assert!(make_psk(1).is_err());
    }

    #[test]
    fn qam_kurtosis_matches_enumeration() {
        assert!((qam_kurtosis_oracle(16) - 1.32).abs() < 1e-15);
        assert!((qam_kurtosis_oracle(64) - 2436.0 / 1764.0).abs() < 1e-15);
        for m in [4, 16, 64, 256] {
            let c = make_qam(m).unwrap();
            assert!((kurtosis(&c) - qam_kurtosis_oracle(m)).abs() < 1e-12, "order {m}");
            assert!((c.average_power() - 1.0).abs() < 1e-12);
        }
        assert!(make_qam(32).is_err());
        assert!(make_qam(8).is_err());
    }

    #[test]
    fn qam4_is_rotated_qpsk() {
        let qam = make_qam(4).unwrap();
        let rot = Complex64::from_polar(1.0, -PI / 4.0);
        let qpsk = make_psk(4).unwrap();
        for p in qam.points() {
            let r = p * rot;
            assert!(qpsk.points().iter().any(|q| (q - r).norm() < 1e-12));
        }
    }

    #[test]
    fn apsk_rings() {
        let single = make_apsk(&[ApskRing { count: 4, radius: 1.0 }]).unwrap();
        let qpsk = make_psk(4).unwrap();
        let rot = Complex64::from_polar(1.0, -PI / 4.0);
        for p in single.points() {
            assert!(qpsk.points().iter().any(|q| (q - p * rot).norm() < 1e-12));
        }
        let two = make_apsk(&[
            ApskRing { count: 4, radius: 1.0 },
            ApskRing { count: 12, radius: 2.75 },
        ])
        .unwrap();
        let k = kurtosis(&two);
        assert!(k > 1.0 && k < 2.0, "kurtosis {k}");
        assert!(make_apsk(&[
            ApskRing { count: 4, radius: 1.0 },
            ApskRing { count: 4, radius: 1.0 }
        ])
        .is_err());
        assert!(make_apsk(&[]).is_err());
    }

    /// 16-QAM under MB weights by ring: energies {2, 10, 18}/10 with multiplicities {4, 8, 4}.
    fn mb_qam16_oracle(lambda: f64) -> f64 {
        let rings = [(4.0, 0.2), (8.0, 1.0), (4.0, 1.8)];
        let z: f64 = rings.iter().map(|(c, e)| c * (-lambda * e).exp()).sum();
        let m2: f64 = rings.iter().map(|(c, e)| c * (-lambda * e).exp() * e).sum::<f64>() / z;
        let m4: f64 = rings.iter().map(|(c, e)| c * (-lambda * e).exp() * e * e).sum::<f64>() / z;
        m4 / (m2 * m2)
    }

    #[test]
    fn kurtosis_sweep_is_not_monotone() {
        let qam = make_qam(16).unwrap();
        let mut peak = (0.0, 0.0);
        for i in 0..=200 {
            let lambda = i as f64 * 0.1;
            let k = kurtosis(&apply_shaping(&qam, &ShapingSpec::MaxwellBoltzmann { lambda }).unwrap());
            assert!((k - mb_qam16_oracle(lambda)).abs() < 1e-12);
            if k > peak.1 {
                peak = (lambda, k);
            }
        }
        // Rises from 1.32 to a maximum before collapsing onto the inner ring.
        assert!(peak.0 > 1.0 && peak.0 < 3.0 && peak.1 > 1.8 && peak.1 < 2.0, "{peak:?}");
    }

    #[test]
    fn maxwell_boltzmann_limits() {
        let qam = make_qam(16).unwrap();
        let flat = apply_shaping(&qam, &ShapingSpec::MaxwellBoltzmann { lambda: 0.0 }).unwrap();
        assert!(flat.probs().iter().all(|p| (p - 1.0 / 16.0).abs() < 1e-15));
        assert!((kurtosis(&flat) - 1.32).abs() < 1e-12);

        let peaked = apply_shaping(&qam, &ShapingSpec::MaxwellBoltzmann { lambda: 10.0 }).unwrap();
        let inner: f64 = qam
            .points()
            .iter()
            .zip(peaked.probs())
            .filter(|(x, _)| x.norm_sqr() < 0.3)
            .map(|(_, p)| p)
            .sum();
        assert!(inner > 0.999, "inner mass {inner}");
        assert!((kurtosis(&peaked) - mb_qam16_oracle(10.0)).abs() < 1e-12);
        assert!((kurtosis(&peaked) - 1.0).abs() < 0.011);
        let far = apply_shaping(&qam, &ShapingSpec::MaxwellBoltzmann { lambda: 50.0 }).unwrap();
        assert!((kurtosis(&far) - 1.0).abs() < 1e-9);
        assert!((peaked.average_power() - 1.0).abs() < 1e-12);

        assert!(apply_shaping(&qam, &ShapingSpec::MaxwellBoltzmann { lambda: -0.1 }).is_err());
    }

    #[test]
    fn shaping_bisection() {
        let qam = make_qam(16).unwrap();
        assert_eq!(
            shape_for_kurtosis(&qam, 1.32, 1e-6).unwrap(),
            ShapingSpec::MaxwellBoltzmann { lambda: 0.0 }
        );
        let spec = shape_for_kurtosis(&qam, 1.0, 1e-3).unwrap();
        let ShapingSpec::MaxwellBoltzmann { lambda } = spec else { panic!() };
        assert!(lambda > 5.0, "λ = {lambda}");
        let k = kurtosis(&apply_shaping(&qam, &spec).unwrap());
        assert!((k - 1.0).abs() <= 1e-3);
        match shape_for_kurtosis(&qam, 3.0, 1e-3) {
            Err(IsacError::OutOfRange { min, max, .. }) => {
                assert!(min >= 1.0 - 1e-9 && max < 3.0);
            }
            other => panic!("expected out-of-range, got {other:?}"),
        }
    }

    #[test]
    fn json_schema() {
        let c = make_psk(2).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"name":"2-PSK","points":[[1.0,0.0],[-1.0,0.0]],"probs":[0.5,0.5]}"#);
        let back: Constellation = serde_json::from_str(&s).unwrap();
        assert_eq!(back.points(), c.points());
        assert!(serde_json::from_str::<Constellation>(
            r#"{"name":"bad","points":[[1,0],[1,0]],"probs":[0.5,0.5]}"#
        )
        .is_err());
    }

    #[test]
    fn gray_mapping_neighbours_differ_by_one_bit() {
        let c = make_qam(16).unwrap();
        let labels = c.gray_labels().unwrap();
        let d = 2.0 / 10f64.sqrt();
        for i in 0..16 {
            for j in 0..16 {
                if ((c.points()[i] - c.points()[j]).norm() - d).abs() < 1e-9 {
                    assert_eq!((labels[i] ^ labels[j]).count_ones(), 1);
                }
            }
        }
        let syms = c.map_bits(&[0, 0, 0, 0, 1, 1, 1, 1]).unwrap();
        assert_eq!(syms.len(), 2);
        assert!(c.map_bits(&[0, 1, 0]).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = make_qam(16).unwrap();
        assert_eq!(sample_symbols(&c, 100, 5).unwrap(), sample_symbols(&c, 100, 5).unwrap());
        assert!(sample_symbols(&c, 0, 5).is_err());
        let b = sample_symbols(&make_psk(2).unwrap(), 1000, 1).unwrap();
        assert!(b.iter().all(|x| (x.re.abs() - 1.0).abs() < 1e-15 && x.im.abs() < 1e-15));
    }
}
