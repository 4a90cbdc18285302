//! Test families used to probe sharpness: Gabor lattices of translated
//! bumps, `L^p`-normalized scaled bumps, critical coefficient sequences,
//! the annulus function `g`, and the dilation `U_λ f(x) = f(λx)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fft;
use crate::grid::{self, GridError, GridSpec, SampledFunction, Spectrum, ALIASING_LIMIT};
use crate::indices::ExtendedExponent;
use crate::norms::smoothstep;

#[derive(Debug, Error)]
pub enum ExtremalError {
    #[error("box too small: need L/2 ≥ {needed}, have {available}")]
    BoxTooSmall { needed: f64, available: f64 },
    #[error("grid too coarse for the narrowest bump: need N ≥ {required_samples}")]
    Resolution { required_samples: usize },
    #[error("coefficient at the origin is not allowed")]
    OriginInSupport,
    #[error("dilation λ = {lambda} breaks the aliasing guard; largest admissible λ is {max_lambda:.4}")]
    Dilation { lambda: f64, max_lambda: f64 },
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Finitely supported coefficients on `Z^n`. Zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LatticeCoefficients {
    dim: usize,
    entries: BTreeMap<Vec<i64>, Complex64>,
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    im: f64,
    k: Vec<i64>,
    re: f64,
}

impl LatticeCoefficients {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self, ExtremalError>
    where
        I: IntoIterator<Item = (Vec<i64>, Complex64)>,
    {
        let mut c = Self::new(dim);
        for (k, v) in entries {
            c.insert(k, v)?;
        }
        Ok(c)
    }

    pub fn insert(&mut self, k: Vec<i64>, value: Complex64) -> Result<(), ExtremalError> {
        if k.len() != self.dim {
            return Err(ExtremalError::Domain(format!(
                "index {k:?} has {} components, expected {}",
                k.len(),
                self.dim
            )));
        }
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(ExtremalError::Domain(format!("coefficient at {k:?} is not finite")));
        }
        if value.norm_sqr() == 0.0 {
            self.entries.remove(&k);
        } else {
            self.entries.insert(k, value);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: &[i64]) -> Complex64 {
        self.entries.get(k).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains_origin(&self) -> bool {
        self.entries.keys().any(|k| k.iter().all(|&a| a == 0))
    }

    /// Largest Euclidean `|k|` over the support (0 when empty).
    pub fn radius(&self) -> f64 {
        self.entries.keys().map(|k| norm_i(k)).fold(0.0, f64::max)
    }

    /// Largest `|k_i|` over the support.
    pub fn sup_radius(&self) -> i64 {
        self.entries
            .keys()
            .flat_map(|k| k.iter().map(|a| a.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn lp_norm(&self, p: ExtendedExponent) -> f64 {
        crate::norms::lq_aggregate(self.entries.values().map(|c| c.norm()), p)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let list: Vec<EntryJson> = self
            .entries
            .iter()
            .map(|(k, c)| EntryJson {
                im: c.im,
                k: k.clone(),
                re: c.re,
            })
            .collect();
        serde_json::to_value(list).expect("coefficients serialize")
    }

    pub fn from_json(dim: usize, value: &serde_json::Value) -> Result<Self, ExtremalError> {
        let list: Vec<EntryJson> =
            serde_json::from_value(value.clone()).map_err(|e| ExtremalError::Domain(e.to_string()))?;
        Self::from_entries(dim, list.into_iter().map(|e| (e.k, Complex64::new(e.re, e.im))))
    }
}

fn norm_i(k: &[i64]) -> f64 {
    k.iter().map(|&a| (a * a) as f64).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BumpRole {
    Eta,
    A,
    Psi,
    G,
}

/// Profiles used by the constructions. `eta`, `a` and `Psi` are radial
/// bumps `(1 - |x|²/r²)³` in space; `g` is described on the frequency side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpProfile {
    pub role: BumpRole,
    /// Support radius, in space for the bumps and in frequency for `g`.
    pub support_radius: f64,
    /// Lower bound for `|â|` on `|ξ| ≤ 2` (role `a` only).
    pub hat_lower_bound: Option<f64>,
}

/// Half-width parameter of the scaled bump `a`.
pub const DELTA: f64 = 0.5;

impl BumpProfile {
    /// `η`, supported in the ball of radius 1/2.
    pub fn eta() -> Self {
        Self {
            role: BumpRole::Eta,
            support_radius: 0.5,
            hat_lower_bound: None,
        }
    }

    /// `a`, supported in the ball of radius `δ/8` with `‖a‖_∞ = 1`.
    pub fn a(dim: usize) -> Self {
        let r = DELTA / 8.0;
        // cos t ≥ 1 - t²/2 and |ξ·x| ≤ 2r on the support
        let mass = radial_bump_integral(r, 1.0, dim);
        Self {
            role: BumpRole::A,
            support_radius: r,
            hat_lower_bound: Some(mass * (1.0 - 2.0 * r * r)),
        }
    }

    /// `Ψ`, the window whose modulations test the scaled bumps.
    pub fn psi() -> Self {
        Self {
            role: BumpRole::Psi,
            support_radius: 0.25,
            hat_lower_bound: None,
        }
    }

    /// `g`, with `ĝ` supported in `1/2 < |ξ| < 2`.
    pub fn g() -> Self {
        Self {
            role: BumpRole::G,
            support_radius: 2.0,
            hat_lower_bound: None,
        }
    }

    /// Profile value: in space for the bumps, `ĝ(ξ)` for `g`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.role {
            BumpRole::G => annulus_symbol(x),
            _ => {
                let t2 = x.iter().map(|a| a * a).sum::<f64>() / (self.support_radius * self.support_radius);
                if t2 < 1.0 {
                    (1.0 - t2).powi(3)
                } else {
                    0.0
                }
            }
        }
    }

    /// `‖profile‖_{L^p(R^n)}` from a one-dimensional integral (bumps only).
    pub fn lp_norm(&self, p: ExtendedExponent, dim: usize) -> f64 {
        assert!(self.role != BumpRole::G, "lp_norm is defined for spatial bumps");
        if p.is_infinite() {
            return 1.0;
        }
        let pv = p.value_f64();
        radial_bump_integral(self.support_radius, pv, dim).powf(1.0 / pv)
    }
}

/// `∫_{R^n} (1 - |x|²/r²)^{3p}_+ dx`.
fn radial_bump_integral(r: f64, p: f64, dim: usize) -> f64 {
    let e = 3.0 * p;
    match dim {
        // integrand vanishes to high order at both ends, so the trapezoid
        // rule is accurate far beyond f64 here
        1 => {
            let m = 1 << 14;
            let h = 2.0 / m as f64;
            let s: f64 = (1..m)
                .map(|i| {
                    let t = -1.0 + i as f64 * h;
                    (1.0 - t * t).powf(e)
                })
                .sum();
            r * s * h
        }
        _ => PI * r * r / (e + 1.0),
    }
}

/// `ĝ`: radial, 1 on `2^{-1/2} ≤ |ξ| ≤ 2^{1/2}`, zero outside `(1/2, 2)`,
/// with `C²` smoothstep transitions.
pub fn annulus_symbol(xi: &[f64]) -> f64 {
    let r = xi.iter().map(|a| a * a).sum::<f64>().sqrt();
    let lo = std::f64::consts::FRAC_1_SQRT_2;
    let hi = std::f64::consts::SQRT_2;
    if r <= 0.5 || r >= 2.0 {
        0.0
    } else if r < lo {
        smoothstep((r - 0.5) / (lo - 0.5))
    } else if r <= hi {
        1.0
    } else {
        smoothstep((2.0 - r) / (2.0 - hi))
    }
}

/// Spectrum of `U_λ g`, i.e. `λ^{-n} ĝ(ξ/λ)`.
pub fn annulus_spectrum(spec: GridSpec, lambda: f64) -> Spectrum {
    let scale = lambda.powi(spec.dim() as i32).recip();
    Spectrum::from_fn(spec, |xi| {
        let y: Vec<f64> = xi.iter().map(|a| a / lambda).collect();
        Complex64::new(scale * annulus_symbol(&y), 0.0)
    })
}

pub fn annulus_function(spec: GridSpec) -> SampledFunction {
    grid::idft(&annulus_spectrum(spec, 1.0))
}

fn check_box(c: &LatticeCoefficients, spec: &GridSpec, reach: f64) -> Result<(), ExtremalError> {
    if c.dim() != spec.dim() {
        return Err(ExtremalError::Domain(format!(
            "coefficients live on Z^{} but the grid is {}-dimensional",
            c.dim(),
            spec.dim()
        )));
    }
    let needed = c.sup_radius() as f64 + reach + 1.0;
    let available = 0.5 * spec.box_len();
    if needed > available {
        return Err(ExtremalError::BoxTooSmall { needed, available });
    }
    Ok(())
}

fn nearest_lattice(x: &[f64]) -> [i64; 2] {
    let mut l = [0; 2];
    for (d, v) in x.iter().enumerate() {
        l[d] = v.round() as i64;
    }
    l
}

/// `f(x) = Σ_ℓ c_ℓ e^{iℓ·x} η(x - ℓ)`. Each node sees at most one term since
/// `supp η` has radius at most 1/2.
pub fn gabor_lattice(
    c: &LatticeCoefficients,
    eta: &BumpProfile,
    spec: GridSpec,
) -> Result<SampledFunction, ExtremalError> {
    if eta.role == BumpRole::G || eta.support_radius > 0.5 {
        return Err(ExtremalError::Domain("η must be a bump supported in radius 1/2".into()));
    }
    check_box(c, &spec, eta.support_radius)?;
    let dim = spec.dim();
    Ok(SampledFunction::from_fn(spec, |x| {
        let l = nearest_lattice(x);
        let coeff = c.get(&l[..dim]);
        if coeff.norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mut y = [0.0; 2];
        let mut phase = 0.0;
        for d in 0..dim {
            y[d] = x[d] - l[d] as f64;
            phase += l[d] as f64 * x[d];
        }
        coeff * Complex64::from_polar(eta.eval(&y[..dim]), phase)
    })?)
}

/// `f(x) = Σ_ℓ c_ℓ |ℓ|^{n/p} a(|ℓ|(x - ℓ))`.
pub fn scaled_bumps(
    c: &LatticeCoefficients,
    a: &BumpProfile,
    p: ExtendedExponent,
    spec: GridSpec,
) -> Result<SampledFunction, ExtremalError> {
    if c.contains_origin() {
        return Err(ExtremalError::OriginInSupport);
    }
    if a.role == BumpRole::G || a.support_radius > 0.5 {
        return Err(ExtremalError::Domain("a must be a bump supported in radius 1/2".into()));
    }
    check_box(c, &spec, a.support_radius)?;
    let r = c.radius().max(1.0);
    let max_h = DELTA / (64.0 * r);
    if spec.spacing() > max_h {
        let required = (spec.box_len() / max_h).ceil() as usize;
        return Err(ExtremalError::Resolution {
            required_samples: required.next_power_of_two(),
        });
    }
    let dim = spec.dim();
    let n_over_p = dim as f64 * p.recip_f64();
    Ok(SampledFunction::from_fn(spec, |x| {
        let l = nearest_lattice(x);
        let coeff = c.get(&l[..dim]);
        if coeff.norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let size = norm_i(&l[..dim]);
        let mut y = [0.0; 2];
        for d in 0..dim {
            y[d] = size * (x[d] - l[d] as f64);
        }
        coeff * (size.powf(n_over_p) * a.eval(&y[..dim]))
    })?)
}

/// `c_k = |k|^{-n/p} (log |k|)^{-(1+ε)/p}` for `N ≤ |k| ≤ R`.
pub fn critical_sequence(
    dim: usize,
    p: ExtendedExponent,
    eps: f64,
    inner: u64,
    outer: u64,
) -> Result<LatticeCoefficients, ExtremalError> {
    if !(outer > inner && inner >= 3) {
        return Err(ExtremalError::Domain(format!("need R > N ≥ 3, got N = {inner}, R = {outer}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(ExtremalError::Domain(format!("need ε > 0, got {eps}")));
    }
    if dim != 1 && dim != 2 {
        return Err(ExtremalError::Domain(format!("dimension {dim} not in {{1, 2}}")));
    }
    let inv_p = p.recip_f64();
    let n = dim as f64;
    let value = |k: &[i64]| -> Option<(Vec<i64>, Complex64)> {
        let r = norm_i(k);
        if r < inner as f64 || r > outer as f64 {
            return None;
        }
        let c = r.powf(-n * inv_p) * r.ln().powf(-(1.0 + eps) * inv_p);
        Some((k.to_vec(), Complex64::new(c, 0.0)))
    };
    let r = outer as i64;
    let entries: Vec<(Vec<i64>, Complex64)> = if dim == 1 {
        (-r..=r).filter_map(|a| value(&[a])).collect()
    } else {
        (-r..=r)
            .flat_map(|a| (-r..=r).map(move |b| [a, b]))
            .filter_map(|k| value(&k))
            .collect()
    };
    LatticeCoefficients::from_entries(dim, entries)
}

/// Largest `λ` for which `U_λ f` keeps the aliasing guard, given the
/// spectrum of `f`.
pub fn max_dilation(spectrum: &Spectrum) -> f64 {
    let r = spectrum.energy_radius(ALIASING_LIMIT);
    if r == 0.0 {
        f64::INFINITY
    } else {
        0.5 * spectrum.spec().nyquist() / r
    }
}

/// Spectrum of `U_λ f` on the same lattice: `λ^{-n} F(ξ/λ)`, with `F`
/// evaluated off-lattice by a chirp-z transform of the samples.
pub fn dilate_spectrum(f: &SampledFunction, lambda: f64) -> Result<Spectrum, ExtremalError> {
    if !(lambda.is_finite() && lambda >= 1.0) {
        return Err(ExtremalError::Domain(format!("need λ ≥ 1, got {lambda}")));
    }
    let spec = *f.spec();
    let max_lambda = max_dilation(&grid::dft(f));
    if lambda > max_lambda {
        return Err(ExtremalError::Dilation { lambda, max_lambda });
    }
    let n = spec.samples();
    let chirp = Chirp::new(n, lambda);
    let mut data = f.values().to_vec();
    match spec.dim() {
        1 => chirp.apply(&mut data),
        _ => {
            crate::par::for_each_chunk(&mut data, n, |row| chirp.apply(row));
            transpose(&mut data, n);
            crate::par::for_each_chunk(&mut data, n, |row| chirp.apply(row));
            transpose(&mut data, n);
        }
    }
    let scale = (spec.spacing() / lambda).powi(spec.dim() as i32);
    for c in data.iter_mut() {
        *c *= scale;
    }
    Ok(Spectrum::new(spec, data)?)
}

/// `U_λ f` resampled on the grid of `f`.
pub fn dilate(f: &SampledFunction, lambda: f64) -> Result<SampledFunction, ExtremalError> {
    if lambda == 1.0 {
        return Ok(f.clone());
    }
    Ok(grid::idft(&dilate_spectrum(f, lambda)?))
}

fn transpose(data: &mut [Complex64], side: usize) {
    for i in 0..side {
        for j in (i + 1)..side {
            data.swap(i * side + j, j * side + i);
        }
    }
}

/// Bluestein evaluation of `X_m = Σ_j f_j e^{-i x_j ξ_m/λ}` for the signed
/// lattice indices `m`, written in FFT order.
struct Chirp {
    n: usize,
    lambda: f64,
    /// FFT of the wrapped kernel `e^{iθd²}`, length `2N`.
    kernel: Vec<Complex64>,
}

impl Chirp {
    fn new(n: usize, lambda: f64) -> Self {
        let m = 2 * n;
        let theta = PI / (n as f64 * lambda);
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        for d in 0..n {
            let w = Complex64::from_polar(1.0, theta * (d * d) as f64);
            kernel[d] = w;
            if d > 0 {
                kernel[m - d] = w;
            }
        }
        fft::plan(m).forward(&mut kernel);
        Self { n, lambda, kernel }
    }

    fn apply(&self, line: &mut [Complex64]) {
        let n = self.n;
        let m = 2 * n;
        let theta = PI / (n as f64 * self.lambda);
        let m0 = -(n as i64 / 2);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (j, v) in line.iter().enumerate() {
            let jf = j as f64;
            let phase = -theta * (2.0 * jf * m0 as f64 + jf * jf);
            buf[j] = v * Complex64::from_polar(1.0, phase);
        }
        let plan = fft::plan(m);
        plan.forward(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel) {
            *b *= k;
        }
        plan.inverse(&mut buf);
        for t in 0..n {
            let mi = m0 + t as i64;
            let tf = t as f64;
            let phase = PI * mi as f64 / self.lambda - theta * tf * tf;
            let pos = mi.rem_euclid(n as i64) as usize;
            line[pos] = buf[t] * Complex64::from_polar(1.0 / m as f64, phase);
        }
    }
}
