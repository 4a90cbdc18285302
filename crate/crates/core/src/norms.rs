//! Numerical `L^p`, `L^p_s`, `M^{p,q}_s` and `B^{p,q}_s` norms of sampled
//! functions.
//!
//! Band norms come from one inverse transform per band; a single transform
//! serves every requested exponent `p`. Bands with identically zero
//! projection are skipped and never reported.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::grid::{self, GridError, GridSpec, SampledFunction, Spectrum};
use crate::indices::ExtendedExponent;
use crate::par;

#[derive(Debug, Error)]
pub enum NormError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("truncation tail {tail:.3e} at radius {radius} exceeds 1e-6 of the value {value:.3e}; try radius {suggested_radius}")]
    Truncation {
        tail: f64,
        value: f64,
        radius: usize,
        suggested_radius: usize,
    },
}

/// Tail tolerance (relative to the norm) for accepted reports.
pub const TAIL_TOLERANCE: f64 = 1e-6;
const TAIL_TARGET: f64 = 1e-7;

/// Quintic smoothstep: `C²`, `S(0)=0`, `S(1)=1`, `S(t)+S(1-t)=1`.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// `C²` cutoff: `1` on `[0, 1]`, `0` on `[2, ∞)`.
pub fn cutoff(r: f64) -> f64 {
    smoothstep(2.0 - r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    /// `max(0, 1 - |t|)` per axis.
    Hat,
    /// `S(1 - |t|)` per axis, with `S` the quintic smoothstep.
    SmoothedHat,
}

/// Tensor-product window for the uniform frequency decomposition.
/// Both kinds satisfy `supp φ ⊂ [-1, 1]^n` and `Σ_k φ(ξ - k) = 1` exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    kind: WindowKind,
    dim: usize,
}

impl Window {
    pub fn new(kind: WindowKind, dim: usize) -> Self {
        Self { kind, dim }
    }

    pub fn hat(dim: usize) -> Self {
        Self::new(WindowKind::Hat, dim)
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn axis(&self, t: f64) -> f64 {
        let a = 1.0 - t.abs();
        if a <= 0.0 {
            return 0.0;
        }
        match self.kind {
            WindowKind::Hat => a,
            WindowKind::SmoothedHat => smoothstep(a),
        }
    }

    pub fn profile(&self, xi: &[f64]) -> f64 {
        xi.iter().map(|&t| self.axis(t)).product()
    }

    /// Largest deviation of `Σ_k φ(ξ - k)` from 1 over `samples` points of
    /// one period per axis.
    pub fn partition_defect(&self, samples: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let t = i as f64 / samples as f64;
            let s: f64 = (-2..=2).map(|k| self.axis(t - k as f64)).sum();
            worst = worst.max((s - 1.0).abs());
        }
        // the tensor product of exact 1D partitions is exact
        worst
    }
}

/// Radial dyadic windows `ψ₀ = θ(|ξ|)`, `ψ(ξ) = θ(|ξ|) - θ(2|ξ|)` and
/// `ψ_j = ψ(·/2^j)`, with `θ` = [`cutoff`]. The sum telescopes to
/// `θ(|ξ|/2^J)`, which is 1 on `|ξ| ≤ 2^J`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DyadicWindow;

impl DyadicWindow {
    pub fn new() -> Self {
        Self
    }

    pub fn psi0(&self, r: f64) -> f64 {
        cutoff(r)
    }

    pub fn psi(&self, r: f64) -> f64 {
        cutoff(r) - cutoff(2.0 * r)
    }

    /// `ψ_j` at radius `r`.
    pub fn band(&self, j: u32, r: f64) -> f64 {
        if j == 0 {
            self.psi0(r)
        } else {
            self.psi(r / 2f64.powi(j as i32))
        }
    }

    /// Band indices whose support meets radius `r`.
    fn bands_at(&self, r: f64) -> impl Iterator<Item = u32> {
        // ψ_j lives on [2^{j-1}, 2^{j+1}]
        let top = if r <= 1.0 { 0 } else { (r.log2().floor() as i64 + 1).max(0) as u32 };
        let lo = top.saturating_sub(1);
        lo..=top + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Lebesgue,
    Sobolev,
    Modulation,
    Besov,
}

impl Space {
    pub fn name(&self) -> &'static str {
        match self {
            Space::Lebesgue => "L",
            Space::Sobolev => "Sobolev",
            Space::Modulation => "M",
            Space::Besov => "B",
        }
    }
}

/// A norm value together with its per-band data.
#[derive(Clone, Debug, PartialEq)]
pub struct NormReport {
    pub space: Space,
    pub p: ExtendedExponent,
    pub q: Option<ExtendedExponent>,
    pub s: f64,
    pub value: f64,
    /// Unweighted band norms `‖φ(D-k)f‖_{L^p}` (or `‖ψ_j(D)f‖_{L^p}`),
    /// keyed by `k` (resp. `[j]`) in sorted order.
    pub band_contributions: BTreeMap<Vec<i64>, f64>,
    pub truncation_radius: usize,
    pub tail_estimate: f64,
}

impl NormReport {
    fn scalar(space: Space, p: ExtendedExponent, s: f64, value: f64) -> Self {
        Self {
            space,
            p,
            q: None,
            s,
            value,
            band_contributions: BTreeMap::new(),
            truncation_radius: 0,
            tail_estimate: 0.0,
        }
    }

    /// Weighted `ℓ^q` aggregation of the stored band contributions.
    pub fn recompute_value(&self) -> f64 {
        let q = self.q.unwrap_or_else(ExtendedExponent::infinity);
        let weight = |k: &[i64]| band_weight(self.space, k, self.s);
        lq_aggregate(
            self.band_contributions.iter().map(|(k, c)| weight(k) * c),
            q,
        )
    }
}

struct BandJson<'a>(&'a BTreeMap<Vec<i64>, f64>);

impl Serialize for BandJson<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for (k, c) in self.0 {
            seq.serialize_element(&BandEntry { k, contribution: *c })?;
        }
        seq.end()
    }
}

struct BandEntry<'a> {
    k: &'a [i64],
    contribution: f64,
}

impl Serialize for BandEntry<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(Some(2))?;
        m.serialize_entry("contribution", &self.contribution)?;
        m.serialize_entry("k", self.k)?;
        m.end()
    }
}

impl Serialize for NormReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("NormReport", 8)?;
        st.serialize_field("bands", &BandJson(&self.band_contributions))?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("q", &self.q)?;
        st.serialize_field("s", &self.s)?;
        st.serialize_field("space", self.space.name())?;
        st.serialize_field("tail_estimate", &self.tail_estimate)?;
        st.serialize_field("truncation_radius", &self.truncation_radius)?;
        st.serialize_field("value", &self.value)?;
        st.end()
    }
}

fn band_weight(space: Space, k: &[i64], s: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    match space {
        Space::Besov => 2f64.powf(k[0] as f64 * s),
        _ => {
            let r2: f64 = k.iter().map(|&a| (a * a) as f64).sum();
            (1.0 + r2).powf(0.5 * s)
        }
    }
}

/// `(Σ a_k^q)^{1/q}`, or the maximum for `q = ∞`.
pub fn lq_aggregate<I: Iterator<Item = f64>>(terms: I, q: ExtendedExponent) -> f64 {
    if q.is_infinite() {
        return terms.fold(0.0, f64::max);
    }
    let qv = q.value_f64();
    if qv == 1.0 {
        return terms.sum();
    }
    if qv == 2.0 {
        return terms.map(|a| a * a).sum::<f64>().sqrt();
    }
    terms.map(|a| a.powf(qv)).sum::<f64>().powf(1.0 / qv)
}

#[derive(Clone, Copy)]
enum Power {
    One,
    Two,
    ThreeHalves,
    Three,
    Four,
    Inf,
    General(f64),
}

impl Power {
    fn of(p: &ExtendedExponent) -> Self {
        if p.is_infinite() {
            return Power::Inf;
        }
        let v = p.value_f64();
        match v {
            x if x == 1.0 => Power::One,
            x if x == 2.0 => Power::Two,
            x if x == 1.5 => Power::ThreeHalves,
            x if x == 3.0 => Power::Three,
            x if x == 4.0 => Power::Four,
            x => Power::General(x),
        }
    }

    #[inline]
    fn apply(&self, a: f64, a2: f64) -> f64 {
        match *self {
            Power::One => a,
            Power::Two => a2,
            Power::ThreeHalves => a * a.sqrt(),
            Power::Three => a2 * a,
            Power::Four => a2 * a2,
            Power::Inf => a,
            Power::General(p) => a.powf(p),
        }
    }
}

/// `L^p` norms of one array for several exponents at once.
pub fn lp_norms_of(values: &[Complex64], exponents: &[ExtendedExponent], cell: f64) -> Vec<f64> {
    let powers: Vec<Power> = exponents.iter().map(Power::of).collect();
    let mut acc = vec![0.0f64; powers.len()];
    for v in values {
        let a2 = v.norm_sqr();
        if a2 == 0.0 {
            continue;
        }
        let a = a2.sqrt();
        for (slot, pw) in acc.iter_mut().zip(&powers) {
            match pw {
                Power::Inf => *slot = slot.max(a),
                _ => *slot += pw.apply(a, a2),
            }
        }
    }
    acc.iter()
        .zip(&powers)
        .map(|(s, pw)| match pw {
            Power::Inf => *s,
            Power::One => s * cell,
            Power::Two => (s * cell).sqrt(),
            _ => {
                let p = match pw {
                    Power::ThreeHalves => 1.5,
                    Power::Three => 3.0,
                    Power::Four => 4.0,
                    Power::General(p) => *p,
                    _ => unreachable!(),
                };
                (s * cell).powf(1.0 / p)
            }
        })
        .collect()
}

/// Riemann-sum `L^p` norm; `p = ∞` is the grid maximum of `|f|`.
pub fn lp_norm(f: &SampledFunction, p: ExtendedExponent) -> f64 {
    lp_norms_of(f.values(), &[p], f.spec().cell_volume())[0]
}

/// `‖(⟨ξ⟩^s f̂)^∨‖_{L^p}`.
pub fn sobolev_norm(f: &SampledFunction, p: ExtendedExponent, s: f64) -> Result<f64, NormError> {
    let spectrum = grid::dft(f);
    sobolev_norm_of_spectrum(&spectrum, p, s)
}

pub fn sobolev_norm_of_spectrum(spectrum: &Spectrum, p: ExtendedExponent, s: f64) -> Result<f64, NormError> {
    spectrum.check_aliasing()?;
    let lifted = grid::apply_symbol(spectrum, |xi| Complex64::new(grid::japanese_bracket(xi, s), 0.0))?;
    Ok(lp_norm(&grid::idft(&lifted), p))
}

pub fn lebesgue_report(f: &SampledFunction, p: ExtendedExponent) -> NormReport {
    NormReport::scalar(Space::Lebesgue, p, 0.0, lp_norm(f, p))
}

pub fn sobolev_report(f: &SampledFunction, p: ExtendedExponent, s: f64) -> Result<NormReport, NormError> {
    Ok(NormReport::scalar(Space::Sobolev, p, s, sobolev_norm(f, p, s)?))
}

/// How many bands to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Truncation {
    /// Smallest radius whose tail bound is below tolerance.
    #[default]
    Auto,
    /// Keep bands with `|k|_∞ ≤ R` (or `j ≤ R`); fail if the tail is too big.
    Radius(usize),
}

/// Which decomposition a [`BandTable`] uses.
#[derive(Clone, Copy, Debug)]
pub enum Decomposition {
    Uniform(Window),
    Dyadic(DyadicWindow),
}

impl Decomposition {
    fn space(&self) -> Space {
        match self {
            Decomposition::Uniform(_) => Space::Modulation,
            Decomposition::Dyadic(_) => Space::Besov,
        }
    }
}

/// Per-band `L^p` norms of one function for a fixed list of exponents,
/// plus cheap upper bounds for every band so truncation tails can be
/// estimated without transforming the tail bands.
#[derive(Clone, Debug)]
pub struct BandTable {
    decomposition: Decomposition,
    spec: GridSpec,
    exponents: Vec<ExtendedExponent>,
    /// `Σ_m w(ξ_m) |F(ξ_m)|` for every band with nonzero projection.
    masses: BTreeMap<Vec<i64>, f64>,
    /// Computed band norms, one entry per exponent.
    norms: BTreeMap<Vec<i64>, Vec<f64>>,
    computed_radius: Option<usize>,
}

fn band_radius(key: &[i64]) -> usize {
    key.iter().map(|a| a.unsigned_abs() as usize).max().unwrap_or(0)
}

impl BandTable {
    pub fn new(spectrum: &Spectrum, decomposition: Decomposition, exponents: &[ExtendedExponent]) -> Result<Self, NormError> {
        spectrum.check_aliasing()?;
        let spec = *spectrum.spec();
        let mut masses: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        let dim = spec.dim();
        for (i, c) in spectrum.coeffs().iter().enumerate() {
            let a = c.norm();
            if a == 0.0 {
                continue;
            }
            let xi = spec.frequency(i);
            match decomposition {
                Decomposition::Uniform(w) => {
                    let lo: Vec<i64> = xi[..dim].iter().map(|t| t.floor() as i64).collect();
                    for corner in 0..(1usize << dim) {
                        let k: Vec<i64> = (0..dim).map(|d| lo[d] + ((corner >> d) & 1) as i64).collect();
                        let shifted: Vec<f64> = (0..dim).map(|d| xi[d] - k[d] as f64).collect();
                        let wv = w.profile(&shifted);
                        if wv > 0.0 {
                            *masses.entry(k).or_insert(0.0) += wv * a;
                        }
                    }
                }
                Decomposition::Dyadic(dw) => {
                    let r = xi[..dim].iter().map(|t| t * t).sum::<f64>().sqrt();
                    for j in dw.bands_at(r) {
                        let wv = dw.band(j, r);
                        if wv > 0.0 {
                            *masses.entry(vec![j as i64]).or_insert(0.0) += wv * a;
                        }
                    }
                }
            }
        }
        if let Decomposition::Dyadic(_) = decomposition {
            let nyquist = spec.nyquist();
            masses.retain(|k, _| k[0] == 0 || 2f64.powi(k[0] as i32 - 1) < nyquist);
        }
        Ok(Self {
            decomposition,
            spec,
            exponents: exponents.to_vec(),
            masses,
            norms: BTreeMap::new(),
            computed_radius: None,
        })
    }

    pub fn exponents(&self) -> &[ExtendedExponent] {
        &self.exponents
    }

    pub fn max_radius(&self) -> usize {
        self.masses.keys().map(|k| band_radius(k)).max().unwrap_or(0)
    }

    /// Transforms every band with radius ≤ `radius` not yet computed.
    pub fn ensure_radius(&mut self, spectrum: &Spectrum, radius: usize) -> Result<(), NormError> {
        if self.computed_radius.is_some_and(|r| r >= radius) {
            return Ok(());
        }
        let todo: Vec<Vec<i64>> = self
            .masses
            .keys()
            .filter(|k| band_radius(k) <= radius && !self.norms.contains_key(*k))
            .cloned()
            .collect();
        let cell = self.spec.cell_volume();
        let exps = &self.exponents;
        let decomposition = self.decomposition;
        let results: Vec<Result<Vec<f64>, GridError>> = par::map(&todo, |k| {
            let piece = match decomposition {
                Decomposition::Uniform(w) => grid::band_project(spectrum, k, &w),
                Decomposition::Dyadic(dw) => grid::dyadic_project(spectrum, k[0] as u32, &dw)?,
            };
            let f = grid::idft(&piece);
            Ok(lp_norms_of(f.values(), exps, cell))
        });
        for (k, r) in todo.into_iter().zip(results) {
            self.norms.insert(k, r?);
        }
        self.computed_radius = Some(radius.max(self.computed_radius.unwrap_or(0)));
        Ok(())
    }

    fn exponent_slot(&self, p: ExtendedExponent) -> usize {
        self.exponents
            .iter()
            .position(|e| *e == p)
            .expect("exponent not registered in band table")
    }

    /// Upper bound for `‖band_k‖_{L^p}`: `L^{n/p} · L^{-n} Σ w|F|`.
    fn bound(&self, mass: f64, p: ExtendedExponent) -> f64 {
        let n = self.spec.dim() as f64;
        mass * self.spec.box_len().powf(n * p.recip_f64() - n)
    }

    fn tail(&self, p: ExtendedExponent, q: ExtendedExponent, s: f64, radius: usize) -> f64 {
        let space = self.decomposition.space();
        lq_aggregate(
            self.masses
                .iter()
                .filter(|(k, _)| band_radius(k) > radius)
                .map(|(k, m)| band_weight(space, k, s) * self.bound(*m, p)),
            q,
        )
    }

    /// Smallest radius whose tail bound is at most `target`.
    fn radius_for(&self, p: ExtendedExponent, q: ExtendedExponent, s: f64, target: f64) -> usize {
        let space = self.decomposition.space();
        let mut by_radius: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for (k, m) in &self.masses {
            by_radius
                .entry(band_radius(k))
                .or_default()
                .push(band_weight(space, k, s) * self.bound(*m, p));
        }
        // walk outward-in accumulating the tail
        let radii: Vec<usize> = by_radius.keys().copied().collect();
        let mut tail_terms: Vec<f64> = Vec::new();
        let mut answer = 0;
        for &r in radii.iter().rev() {
            let tail_here = lq_aggregate(tail_terms.iter().copied(), q);
            if tail_here > target {
                answer = r + 1;
                break;
            }
            tail_terms.extend(by_radius[&r].iter().copied());
        }
        if answer == 0 {
            let tail_all = lq_aggregate(tail_terms.iter().copied(), q);
            if tail_all > target {
                answer = radii.first().copied().unwrap_or(0);
            }
        }
        answer.min(self.max_radius())
    }

    fn assemble(&self, p: ExtendedExponent, q: ExtendedExponent, s: f64, radius: usize) -> NormReport {
        let slot = self.exponent_slot(p);
        let space = self.decomposition.space();
        let band_contributions: BTreeMap<Vec<i64>, f64> = self
            .norms
            .iter()
            .filter(|(k, _)| band_radius(k) <= radius)
            .map(|(k, v)| (k.clone(), v[slot]))
            .collect();
        let value = lq_aggregate(
            band_contributions.iter().map(|(k, c)| band_weight(space, k, s) * c),
            q,
        );
        NormReport {
            space,
            p,
            q: Some(q),
            s,
            value,
            band_contributions,
            truncation_radius: radius,
            tail_estimate: self.tail(p, q, s, radius),
        }
    }

    /// Builds the report for `(p, q, s)`, transforming more bands if the
    /// truncation policy requires it.
    pub fn report(
        &mut self,
        spectrum: &Spectrum,
        p: ExtendedExponent,
        q: ExtendedExponent,
        s: f64,
        truncation: Truncation,
    ) -> Result<NormReport, NormError> {
        match truncation {
            Truncation::Radius(r) => {
                self.ensure_radius(spectrum, r)?;
                let rep = self.assemble(p, q, s, r);
                if rep.tail_estimate > TAIL_TOLERANCE * rep.value {
                    return Err(NormError::Truncation {
                        tail: rep.tail_estimate,
                        value: rep.value,
                        radius: r,
                        suggested_radius: self.radius_for(p, q, s, TAIL_TARGET * rep.value),
                    });
                }
                Ok(rep)
            }
            Truncation::Auto => {
                let total = self.tail(p, q, s, 0).max(
                    self.masses
                        .iter()
                        .filter(|(k, _)| band_radius(k) == 0)
                        .map(|(_, m)| self.bound(*m, p))
                        .fold(0.0, f64::max),
                );
                let mut r = self.radius_for(p, q, s, 1e-10 * total);
                if let Some(done) = self.computed_radius {
                    r = r.max(done);
                }
                loop {
                    self.ensure_radius(spectrum, r)?;
                    let rep = self.assemble(p, q, s, r);
                    if rep.tail_estimate <= TAIL_TARGET * rep.value || r >= self.max_radius() {
                        return Ok(rep);
                    }
                    r = self.radius_for(p, q, s, TAIL_TARGET * rep.value).max(r + 1);
                }
            }
        }
    }
}

/// `‖f‖_{M^{p,q}_s}` with the per-band data.
pub fn modulation_norm(
    f: &SampledFunction,
    p: ExtendedExponent,
    q: ExtendedExponent,
    s: f64,
    window: &Window,
) -> Result<NormReport, NormError> {
    modulation_norm_truncated(f, p, q, s, window, Truncation::Auto)
}

pub fn modulation_norm_truncated(
    f: &SampledFunction,
    p: ExtendedExponent,
    q: ExtendedExponent,
    s: f64,
    window: &Window,
    truncation: Truncation,
) -> Result<NormReport, NormError> {
    let spectrum = grid::dft(f);
    let mut table = BandTable::new(&spectrum, Decomposition::Uniform(*window), &[p])?;
    table.report(&spectrum, p, q, s, truncation)
}

/// `‖f‖_{B^{p,q}_s}` with the per-band data.
pub fn besov_norm(
    f: &SampledFunction,
    p: ExtendedExponent,
    q: ExtendedExponent,
    s: f64,
    window: &DyadicWindow,
) -> Result<NormReport, NormError> {
    besov_norm_truncated(f, p, q, s, window, Truncation::Auto)
}

pub fn besov_norm_truncated(
    f: &SampledFunction,
    p: ExtendedExponent,
    q: ExtendedExponent,
    s: f64,
    window: &DyadicWindow,
    truncation: Truncation,
) -> Result<NormReport, NormError> {
    let spectrum = grid::dft(f);
    let mut table = BandTable::new(&spectrum, Decomposition::Dyadic(*window), &[p])?;
    table.report(&spectrum, p, q, s, truncation)
}

/// Several modulation norms of one function sharing a single set of band
/// transforms.
pub fn modulation_norms(
    spectrum: &Spectrum,
    params: &[(ExtendedExponent, ExtendedExponent, f64)],
    window: &Window,
) -> Result<Vec<NormReport>, NormError> {
    let mut exps: Vec<ExtendedExponent> = params.iter().map(|t| t.0).collect();
    exps.sort();
    exps.dedup();
    let mut table = BandTable::new(spectrum, Decomposition::Uniform(*window), &exps)?;
    params
        .iter()
        .map(|&(p, q, s)| table.report(spectrum, p, q, s, Truncation::Auto))
        .collect()
}
