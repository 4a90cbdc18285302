//! Periodic uniform grids in one or two dimensions and the discrete Fourier
//! transform that approximates `f̂(ξ) = ∫ f(x) e^{-ix·ξ} dx`.
//!
//! Nodes are `x_j = -L/2 + j L/N` on each axis and the dual lattice is
//! `ξ_m = m·2π/L` with `m ∈ {-N/2, …, N/2-1}`. Spectra carry the quadrature
//! weight `(L/N)^n`, so the inverse transform is the Riemann sum of
//! `(2π)^{-n} ∫ F(ξ) e^{ix·ξ} dξ`.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use thiserror::Error;

use crate::fft;
use crate::norms::{DyadicWindow, Window};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    InvalidSpec(String),
    #[error("function value is not finite at x = {0:?}")]
    NonFinite(Vec<f64>),
    #[error("symbol is not finite at ξ = {0:?}")]
    NonFiniteSymbol(Vec<f64>),
    #[error("aliasing guard: energy fraction {fraction:.3e} beyond |ξ| = {radius} exceeds {limit:.0e}; use a larger N or a smaller L")]
    Aliasing {
        fraction: f64,
        radius: f64,
        limit: f64,
    },
    #[error("dyadic band j = {j} starts at |ξ| = {inner} beyond the Nyquist frequency {nyquist}; use a larger N or a smaller L")]
    DyadicBeyondNyquist { j: u32, inner: f64, nyquist: f64 },
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("grid mismatch: {0}")]
    Mismatch(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Energy fraction allowed outside half the Nyquist radius.
pub const ALIASING_LIMIT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    dim: usize,
    samples: usize,
    box_len: f64,
}

impl GridSpec {
    pub fn new(dim: usize, samples: usize, box_len: f64) -> Result<Self, GridError> {
        if dim != 1 && dim != 2 {
            return Err(GridError::InvalidSpec(format!("dimension {dim} not in {{1, 2}}")));
        }
        if samples < 8 || !samples.is_power_of_two() {
            return Err(GridError::InvalidSpec(format!(
                "N = {samples} must be a power of two ≥ 8"
            )));
        }
        if !(box_len.is_finite() && box_len > 0.0) {
            return Err(GridError::InvalidSpec(format!("L = {box_len} must be positive")));
        }
        Ok(Self {
            dim,
            samples,
            box_len,
        })
    }

    /// Box of side `2π·m`, so the frequency spacing is `1/m` and every
    /// integer frequency is a lattice point.
    pub fn on_lattice(dim: usize, samples: usize, per_unit: usize) -> Result<Self, GridError> {
        Self::new(dim, samples, 2.0 * PI * per_unit as f64)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    pub fn len(&self) -> usize {
        self.samples.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.box_len / self.samples as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn freq_spacing(&self) -> f64 {
        2.0 * PI / self.box_len
    }

    pub fn nyquist(&self) -> f64 {
        PI * self.samples as f64 / self.box_len
    }

    pub fn node(&self, i: usize) -> f64 {
        -0.5 * self.box_len + i as f64 * self.spacing()
    }

    /// Signed lattice index of FFT position `i`.
    pub fn signed_index(&self, i: usize) -> i64 {
        if i < self.samples / 2 {
            i as i64
        } else {
            i as i64 - self.samples as i64
        }
    }

    /// FFT position of the signed lattice index `m` (must be in range).
    pub fn fft_position(&self, m: i64) -> usize {
        m.rem_euclid(self.samples as i64) as usize
    }

    /// Per-axis indices of the flat position `idx`.
    pub fn axes(&self, idx: usize) -> [usize; 2] {
        match self.dim {
            1 => [idx, 0],
            _ => [idx / self.samples, idx % self.samples],
        }
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        let a = self.axes(idx);
        let mut x = [0.0; 2];
        for d in 0..self.dim {
            x[d] = self.node(a[d]);
        }
        x
    }

    pub fn frequency(&self, idx: usize) -> [f64; 2] {
        let a = self.axes(idx);
        let mut xi = [0.0; 2];
        for d in 0..self.dim {
            xi[d] = self.signed_index(a[d]) as f64 * self.freq_spacing();
        }
        xi
    }

    pub fn lattice_index(&self, idx: usize) -> [i64; 2] {
        let a = self.axes(idx);
        let mut m = [0; 2];
        for d in 0..self.dim {
            m[d] = self.signed_index(a[d]);
        }
        m
    }

    fn parity_sign(&self, idx: usize) -> f64 {
        let a = self.axes(idx);
        let s: usize = a[..self.dim].iter().sum();
        if s % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Closed set of analytic functions that can be sampled on a grid.
#[derive(Clone, Debug)]
pub enum FunctionDescriptor {
    Zero,
    /// `e^{-|x|²/(2σ²)}`
    Gaussian { sigma: f64 },
    /// `Π max(0, 1 - |x_i|)`
    Hat,
    /// Radial `(1 - |x|²/r²)³` on `|x| < r`.
    Bump { radius: f64 },
    /// `Σ c · e^{iω·x} · profile(x - shift)`.
    ModulatedTranslates {
        profile: Box<FunctionDescriptor>,
        terms: Vec<ModulatedTerm>,
    },
    /// Values given directly in grid order.
    Tabulated(Vec<Complex64>),
}

#[derive(Clone, Debug)]
pub struct ModulatedTerm {
    pub coeff: Complex64,
    pub shift: [f64; 2],
    pub freq: [f64; 2],
}

impl FunctionDescriptor {
    /// Value at a point (not defined for `Tabulated`).
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            FunctionDescriptor::Zero => Complex64::new(0.0, 0.0),
            FunctionDescriptor::Gaussian { sigma } => {
                let r2: f64 = x.iter().map(|a| a * a).sum();
                Complex64::new((-r2 / (2.0 * sigma * sigma)).exp(), 0.0)
            }
            FunctionDescriptor::Hat => {
                Complex64::new(x.iter().map(|a| (1.0 - a.abs()).max(0.0)).product(), 0.0)
            }
            FunctionDescriptor::Bump { radius } => {
                let t = euclid(x) / radius;
                let v = if t < 1.0 { (1.0 - t * t).powi(3) } else { 0.0 };
                Complex64::new(v, 0.0)
            }
            FunctionDescriptor::ModulatedTranslates { profile, terms } => {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut y = [0.0; 2];
                for t in terms {
                    let mut phase = 0.0;
                    for d in 0..x.len() {
                        y[d] = x[d] - t.shift[d];
                        phase += t.freq[d] * x[d];
                    }
                    let v = profile.eval(&y[..x.len()]);
                    if v.norm_sqr() > 0.0 {
                        acc += t.coeff * Complex64::from_polar(1.0, phase) * v;
                    }
                }
                acc
            }
            FunctionDescriptor::Tabulated(_) => {
                panic!("tabulated descriptors have no pointwise formula")
            }
        }
    }
}

/// Samples on a [`GridSpec`], row-major with axis 0 slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    spec: GridSpec,
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(spec: GridSpec, values: Vec<Complex64>) -> Result<Self, GridError> {
        if values.len() != spec.len() {
            return Err(GridError::LengthMismatch {
                expected: spec.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(GridError::NonFinite(spec.point(i)[..spec.dim()].to_vec()));
        }
        Ok(Self { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            values: vec![Complex64::new(0.0, 0.0); spec.len()],
        }
    }

    /// Evaluates `g` at every node.
    pub fn from_fn<F>(spec: GridSpec, g: F) -> Result<Self, GridError>
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let dim = spec.dim();
        let values = (0..spec.len())
            .map(|i| {
                let x = spec.point(i);
                g(&x[..dim])
            })
            .collect();
        Self::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.norm_sqr() == 0.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            spec: self.spec,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), GridError> {
        let mut out = std::io::BufWriter::new(out);
        writeln!(
            out,
            "#grid n={} N={} L={}",
            self.spec.dim, self.spec.samples, self.spec.box_len
        )?;
        let mut w = csv::Writer::from_writer(out);
        let header: &[&str] = if self.spec.dim == 1 {
            &["i", "re", "im"]
        } else {
            &["i", "j", "re", "im"]
        };
        w.write_record(header).map_err(|e| GridError::Csv(e.to_string()))?;
        for (idx, v) in self.values.iter().enumerate() {
            let a = self.spec.axes(idx);
            let mut rec: Vec<String> = a[..self.spec.dim].iter().map(|i| i.to_string()).collect();
            rec.push(v.re.to_string());
            rec.push(v.im.to_string());
            w.write_record(&rec).map_err(|e| GridError::Csv(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format written by [`SampledFunction::write_csv`]. Every
    /// node must appear exactly once.
    pub fn read_csv<R: BufRead>(mut input: R) -> Result<Self, GridError> {
        let mut first = String::new();
        input.read_line(&mut first)?;
        let spec = parse_grid_header(first.trim())?;
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let headers = rdr.headers().map_err(|e| GridError::Csv(e.to_string()))?.clone();
        let want = spec.dim + 2;
        if headers.len() != want {
            return Err(GridError::Mismatch(format!(
                "{} columns for a {}-dimensional grid, expected {want}",
                headers.len(),
                spec.dim
            )));
        }
        let mut values = vec![Complex64::new(0.0, 0.0); spec.len()];
        let mut seen = vec![false; spec.len()];
        for rec in rdr.records() {
            let rec = rec.map_err(|e| GridError::Csv(e.to_string()))?;
            if rec.len() != want {
                return Err(GridError::Mismatch(format!("row with {} fields", rec.len())));
            }
            let mut flat = 0usize;
            for d in 0..spec.dim {
                let i: usize = rec[d]
                    .trim()
                    .parse()
                    .map_err(|_| GridError::Csv(format!("bad index `{}`", &rec[d])))?;
                if i >= spec.samples {
                    return Err(GridError::Mismatch(format!("index {i} ≥ N = {}", spec.samples)));
                }
                flat = flat * spec.samples + i;
            }
            let num = |s: &str| -> Result<f64, GridError> {
                s.trim().parse().map_err(|_| GridError::Csv(format!("bad number `{s}`")))
            };
            let re = num(&rec[spec.dim])?;
            let im = num(&rec[spec.dim + 1])?;
            if seen[flat] {
                return Err(GridError::Mismatch(format!("node {flat} appears twice")));
            }
            seen[flat] = true;
            values[flat] = Complex64::new(re, im);
        }
        let missing = seen.iter().filter(|s| !**s).count();
        if missing > 0 {
            return Err(GridError::Mismatch(format!("{missing} nodes missing")));
        }
        Self::new(spec, values)
    }
}

fn parse_grid_header(line: &str) -> Result<GridSpec, GridError> {
    let rest = line
        .strip_prefix("#grid")
        .ok_or_else(|| GridError::Mismatch(format!("missing `#grid` header, found `{line}`")))?;
    let (mut n, mut samples, mut len) = (None, None, None);
    for field in rest.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| GridError::Mismatch(format!("bad header field `{field}`")))?;
        let bad = || GridError::Mismatch(format!("bad header value `{field}`"));
        match k {
            "n" => n = Some(v.parse::<usize>().map_err(|_| bad())?),
            "N" => samples = Some(v.parse::<usize>().map_err(|_| bad())?),
            "L" => len = Some(v.parse::<f64>().map_err(|_| bad())?),
            _ => return Err(GridError::Mismatch(format!("unknown header field `{k}`"))),
        }
    }
    match (n, samples, len) {
        (Some(n), Some(s), Some(l)) => GridSpec::new(n, s, l).map_err(|e| GridError::Mismatch(e.to_string())),
        _ => Err(GridError::Mismatch("header needs n, N and L".into())),
    }
}

/// Sampled Fourier transform on the dual lattice, stored in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    spec: GridSpec,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(spec: GridSpec, coeffs: Vec<Complex64>) -> Result<Self, GridError> {
        if coeffs.len() != spec.len() {
            return Err(GridError::LengthMismatch {
                expected: spec.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { spec, coeffs })
    }

    /// Samples `F(ξ_m)` directly from a formula.
    pub fn from_fn<F>(spec: GridSpec, g: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let dim = spec.dim();
        let coeffs = (0..spec.len())
            .map(|i| {
                let xi = spec.frequency(i);
                g(&xi[..dim])
            })
            .collect();
        Self { spec, coeffs }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at the signed lattice index `m`.
    pub fn at(&self, m: &[i64]) -> Complex64 {
        let mut flat = 0;
        for &mi in m.iter().take(self.spec.dim) {
            flat = flat * self.spec.samples + self.spec.fft_position(mi);
        }
        self.coeffs[flat]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }

    /// `Σ |F(ξ_m)|² Δξ^n`.
    pub fn energy(&self) -> f64 {
        let w = self.spec.freq_spacing().powi(self.spec.dim as i32);
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * w
    }

    /// Fraction of the energy at `|ξ| > radius`.
    pub fn energy_fraction_beyond(&self, radius: f64) -> f64 {
        let total: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let dim = self.spec.dim;
        let outside: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| euclid(&self.spec.frequency(*i)[..dim]) > radius)
            .map(|(_, c)| c.norm_sqr())
            .sum();
        outside / total
    }

    /// Smallest radius outside which less than `fraction` of the energy lies.
    pub fn energy_radius(&self, fraction: f64) -> f64 {
        let dim = self.spec.dim;
        let mut pts: Vec<(f64, f64)> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (euclid(&self.spec.frequency(i)[..dim]), c.norm_sqr()))
            .collect();
        let total: f64 = pts.iter().map(|p| p.1).sum();
        if total == 0.0 {
            return 0.0;
        }
        pts.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut tail = 0.0;
        for (r, e) in pts {
            tail += e;
            if tail >= fraction * total {
                return r;
            }
        }
        0.0
    }

    /// Fails when more than [`ALIASING_LIMIT`] of the energy sits beyond
    /// half the Nyquist radius.
    pub fn check_aliasing(&self) -> Result<(), GridError> {
        let radius = 0.5 * self.spec.nyquist();
        let fraction = self.energy_fraction_beyond(radius);
        if fraction > ALIASING_LIMIT {
            Err(GridError::Aliasing {
                fraction,
                radius,
                limit: ALIASING_LIMIT,
            })
        } else {
            Ok(())
        }
    }

    fn map_coeffs<F>(&self, g: F) -> Self
    where
        F: Fn(&[f64], Complex64) -> Complex64,
    {
        let dim = self.spec.dim;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let xi = self.spec.frequency(i);
                g(&xi[..dim], *c)
            })
            .collect();
        Self {
            spec: self.spec,
            coeffs,
        }
    }
}

pub fn sample(descriptor: &FunctionDescriptor, spec: GridSpec) -> Result<SampledFunction, GridError> {
    match descriptor {
        FunctionDescriptor::Tabulated(v) => SampledFunction::new(spec, v.clone()),
        d => SampledFunction::from_fn(spec, |x| d.eval(x)),
    }
}

/// `F(ξ_m) = (L/N)^n Σ_x f(x) e^{-ix·ξ_m}`.
pub fn dft(f: &SampledFunction) -> Spectrum {
    let spec = f.spec;
    let mut data = f.values.clone();
    fft::transform(&mut data, spec.samples, spec.dim, false);
    let h = spec.cell_volume();
    for (i, c) in data.iter_mut().enumerate() {
        *c *= h * spec.parity_sign(i);
    }
    Spectrum { spec, coeffs: data }
}

/// `f(x_j) = (2π)^{-n} Σ_m F(ξ_m) e^{ix_j·ξ_m} Δξ^n`.
pub fn idft(spectrum: &Spectrum) -> SampledFunction {
    let spec = spectrum.spec;
    let mut data: Vec<Complex64> = spectrum
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c * spec.parity_sign(i))
        .collect();
    fft::transform(&mut data, spec.samples, spec.dim, true);
    let scale = spec.box_len.powi(spec.dim as i32).recip();
    for c in data.iter_mut() {
        *c *= scale;
    }
    SampledFunction { spec, values: data }
}

/// Multiplies every coefficient by `symbol(ξ_m)`.
pub fn apply_symbol<F>(spectrum: &Spectrum, symbol: F) -> Result<Spectrum, GridError>
where
    F: Fn(&[f64]) -> Complex64,
{
    let dim = spectrum.spec.dim;
    let mut coeffs = Vec::with_capacity(spectrum.coeffs.len());
    for (i, c) in spectrum.coeffs.iter().enumerate() {
        let xi = spectrum.spec.frequency(i);
        let m = symbol(&xi[..dim]);
        if !(m.re.is_finite() && m.im.is_finite()) {
            return Err(GridError::NonFiniteSymbol(xi[..dim].to_vec()));
        }
        coeffs.push(c * m);
    }
    Ok(Spectrum {
        spec: spectrum.spec,
        coeffs,
    })
}

/// `φ(ξ - k) F(ξ)`.
pub fn band_project(spectrum: &Spectrum, k: &[i64], window: &Window) -> Spectrum {
    spectrum.map_coeffs(|xi, c| {
        let mut shifted = [0.0; 2];
        for d in 0..xi.len() {
            shifted[d] = xi[d] - k[d] as f64;
        }
        let w = window.profile(&shifted[..xi.len()]);
        if w == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            c * w
        }
    })
}

/// `ψ_j(ξ) F(ξ)`.
pub fn dyadic_project(spectrum: &Spectrum, j: u32, window: &DyadicWindow) -> Result<Spectrum, GridError> {
    let nyquist = spectrum.spec.nyquist();
    if j >= 1 {
        let inner = 2f64.powi(j as i32 - 1);
        if inner >= nyquist {
            return Err(GridError::DyadicBeyondNyquist { j, inner, nyquist });
        }
    }
    Ok(spectrum.map_coeffs(|xi, c| {
        let w = window.band(j, euclid(xi));
        if w == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            c * w
        }
    }))
}

/// `⟨ξ⟩^s = (1 + |ξ|²)^{s/2}`.
pub fn japanese_bracket(xi: &[f64], s: f64) -> f64 {
    let r2: f64 = xi.iter().map(|a| a * a).sum();
    (1.0 + r2).powf(0.5 * s)
}
