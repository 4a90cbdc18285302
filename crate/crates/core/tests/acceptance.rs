//! Acceptance checks. Each criterion prints one `PASS`/`FAIL` line with
//! its measured numbers and runtime; the process exits non-zero if any
//! criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use modlab::experiments::{
    annular_inequality_check, dilation_sweep, multiplier_loss_experiment, sandwich_sweep, sequence_oracle_dual_norm,
    DilationSetup, Family, Measurement,
};
use modlab::extremals::{critical_sequence, gabor_lattice, scaled_bumps, BumpProfile, LatticeCoefficients};
use modlab::grid::{dft, idft, sample, FunctionDescriptor, GridSpec, SampledFunction};
use modlab::indices::{self, embeds_l_in_m, embeds_m_in_l, ExtendedExponent, Smoothness, Q};
use modlab::norms::lp_norm;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn e(s: &str) -> ExtendedExponent {
    s.parse().unwrap()
}

fn q(a: i128, b: i128) -> Q {
    Q::new(a, b)
}

fn five_exponents() -> Vec<ExtendedExponent> {
    ["1", "3/2", "2", "3", "infty"].iter().map(|s| e(s)).collect()
}

/// Region membership and branch values straight from the defining
/// inequalities; independent of the library's classifier.
mod oracle {
    use super::{q, Q};

    fn half() -> Q {
        q(1, 2)
    }

    /// Starred regions: `[I₁*, I₂*, I₃*]`.
    pub fn starred(u: Q, v: Q) -> [bool; 3] {
        let up = Q::from_integer(1) - u;
        [u.min(up) >= v, v.min(half()) >= up, v.min(half()) >= u]
    }

    /// Unstarred regions: `[I₁, I₂, I₃]`.
    pub fn unstarred(u: Q, v: Q) -> [bool; 3] {
        let up = Q::from_integer(1) - u;
        [u.max(up) <= v, v.max(half()) <= up, v.max(half()) <= u]
    }

    pub fn nu_branches(u: Q, v: Q) -> [Q; 3] {
        [Q::from_integer(0), u + v - Q::from_integer(1), v - u]
    }

    pub fn mu_branches(u: Q, v: Q) -> [Q; 3] {
        [-u, v - Q::from_integer(1), v - u - u]
    }

    /// The common value of the branches over matched regions, or `None`
    /// if they disagree or nothing matches.
    pub fn agree(flags: [bool; 3], values: [Q; 3]) -> Option<Q> {
        let mut it = (0..3).filter(|&i| flags[i]).map(|i| values[i]);
        let first = it.next()?;
        it.all(|v| v == first).then_some(first)
    }
}

fn grid12() -> Vec<(Q, Q)> {
    (0..=12).flat_map(|i| (0..=12).map(move |j| (q(i, 12), q(j, 12)))).collect()
}

fn pq(u: Q, v: Q) -> (ExtendedExponent, ExtendedExponent) {
    (ExtendedExponent::from_recip(u).unwrap(), ExtendedExponent::from_recip(v).unwrap())
}

fn c1_index_engine() -> Outcome {
    let mut checked = 0;
    for (u, v) in grid12() {
        let (p, qq) = pq(u, v);
        let star = oracle::starred(u, v);
        let plain = oracle::unstarred(u, v);
        let nu1 = oracle::agree(star, oracle::nu_branches(u, v)).ok_or(format!("ν₁ branches disagree at ({u}, {v})"))?;
        let nu2 = oracle::agree(plain, oracle::nu_branches(u, v)).ok_or(format!("ν₂ branches disagree at ({u}, {v})"))?;
        let mu1 = oracle::agree(star, oracle::mu_branches(u, v)).ok_or(format!("μ₁ branches disagree at ({u}, {v})"))?;
        let mu2 = oracle::agree(plain, oracle::mu_branches(u, v)).ok_or(format!("μ₂ branches disagree at ({u}, {v})"))?;
        let got = [
            indices::nu1(p, qq).map_err(|x| x.to_string())?,
            indices::nu2(p, qq).map_err(|x| x.to_string())?,
            indices::mu1(p, qq).map_err(|x| x.to_string())?,
            indices::mu2(p, qq).map_err(|x| x.to_string())?,
        ];
        if got != [nu1, nu2, mu1, mu2] {
            return Err(format!("({u}, {v}): library {got:?} vs oracle {:?}", [nu1, nu2, mu1, mu2]));
        }
        let dual = indices::nu1(p.dual(), qq.dual()).unwrap();
        if got[1] != -dual {
            return Err(format!("duality fails at ({u}, {v})"));
        }
        let zero = Q::from_integer(0);
        if !(got[0] >= zero && got[1] <= zero && got[2] >= got[3]) {
            return Err(format!("sign conditions fail at ({u}, {v})"));
        }
        let regions = indices::classify_regions(indices::IndexPair::new(u, v).unwrap());
        if regions.starred() != star || regions.unstarred() != plain {
            return Err(format!("region flags differ at ({u}, {v})"));
        }
        checked += 1;
    }
    Ok(format!("{checked} grid points, duality/branches/signs exact"))
}

fn random_recip(rng: &mut ChaCha8Rng) -> Q {
    let d = rng.gen_range(1..=24i128);
    q(rng.gen_range(0..=d), d)
}

fn c2_predicate_coherence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut interior, mut total) = (0, 0);
    for _ in 0..10_000 {
        let (u, v) = (random_recip(&mut rng), random_recip(&mut rng));
        let (p, qq) = pq(u, v);
        let s = q(rng.gen_range(-60..=60i128), rng.gen_range(1..=12i128));
        let n = rng.gen_range(1..=3u32);
        let nn = Q::from_integer(n as i128);
        let lm = embeds_l_in_m(p, qq, Smoothness(s), n).unwrap();
        let ml = embeds_m_in_l(p, qq, Smoothness(s), n).unwrap();
        let nu1 = nn * oracle::agree(oracle::starred(u, v), oracle::nu_branches(u, v)).unwrap();
        let nu2 = nn * oracle::agree(oracle::unstarred(u, v), oracle::nu_branches(u, v)).unwrap();
        // strict sufficiency and weak necessity
        if (s > nu1 && !lm.holds) || (lm.holds && s < nu1) {
            return Err(format!("L→M at p={p} q={qq} s={s} n={n} contradicts s vs nν₁ = {nu1}"));
        }
        if (s < nu2 && !ml.holds) || (ml.holds && s > nu2) {
            return Err(format!("M→L at p={p} q={qq} s={s} n={n} contradicts s vs nν₂ = {nu2}"));
        }
        let bump = q(rng.gen_range(1..=24i128), 8);
        if lm.holds && !embeds_l_in_m(p, qq, Smoothness(s + bump), n).unwrap().holds {
            return Err(format!("L→M not monotone in s at p={p} q={qq} s={s}"));
        }
        if ml.holds && !embeds_m_in_l(p, qq, Smoothness(s - bump), n).unwrap().holds {
            return Err(format!("M→L not monotone in s at p={p} q={qq} s={s}"));
        }
        let one = Q::from_integer(1);
        let zero = Q::from_integer(0);
        if u > zero && u < one && v > zero && v < one {
            let dual = embeds_l_in_m(p.dual(), qq.dual(), Smoothness(-s), n).unwrap();
            if dual.holds != ml.holds {
                return Err(format!("M→L at (p,q,s)=({p},{qq},{s}) differs from dual L→M"));
            }
            interior += 1;
        }
        total += 1;
    }
    Ok(format!("{total} random triples ({interior} interior) coherent"))
}

fn c3_fft() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_roundtrip: f64 = 0.0;
    let mut worst_parseval: f64 = 0.0;
    for spec in [GridSpec::new(1, 1 << 11, 40.0).unwrap(), GridSpec::new(2, 128, 20.0).unwrap()] {
        let values: Vec<Complex64> =
            (0..spec.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let f = SampledFunction::new(spec, values).unwrap();
        let s = dft(&f);
        let back = idft(&s);
        let num: f64 = f.values().iter().zip(back.values()).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = f.values().iter().map(|a| a.norm_sqr()).sum();
        worst_roundtrip = worst_roundtrip.max((num / den).sqrt());
        let lhs = den * spec.cell_volume();
        let rhs = s.energy() / (2.0 * PI).powi(spec.dim() as i32);
        worst_parseval = worst_parseval.max((lhs - rhs).abs() / lhs);
    }
    let spec = GridSpec::new(1, 1 << 11, 40.0).unwrap();
    let g = dft(&sample(&FunctionDescriptor::Gaussian { sigma: 1.0 }, spec).unwrap());
    let peak = (2.0 * PI).sqrt();
    let mut gauss_err: f64 = 0.0;
    for (i, c) in g.coeffs().iter().enumerate() {
        let xi = spec.frequency(i)[0];
        let exact = peak * (-0.5 * xi * xi).exp();
        gauss_err = gauss_err.max((c - exact).norm() / peak);
    }
    let detail = format!("roundtrip {worst_roundtrip:.1e}, parseval {worst_parseval:.1e}, gaussian {gauss_err:.1e}");
    if worst_roundtrip < 1e-10 && worst_parseval < 1e-10 && gauss_err < 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_coeffs(rng: &mut ChaCha8Rng, radius: i64, skip_origin: bool) -> LatticeCoefficients {
    let mut c = LatticeCoefficients::new(1);
    for k in -radius..=radius {
        if (skip_origin && k == 0) || !rng.gen_bool(0.6) {
            continue;
        }
        c.insert(vec![k], Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap();
    }
    if c.is_empty() {
        c.insert(vec![1], Complex64::new(1.0, 0.0)).unwrap();
    }
    c
}

fn c4_extremal_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // h = 1/64 puts every translate on the grid
    let spec = GridSpec::new(1, 1 << 12, 64.0).unwrap();
    let eta = sample(&FunctionDescriptor::Bump { radius: 0.5 }, spec).unwrap();
    let mut worst_gabor: f64 = 0.0;
    for _ in 0..20 {
        let c = random_coeffs(&mut rng, 24, false);
        let f = gabor_lattice(&c, &BumpProfile::eta(), spec).map_err(|x| x.to_string())?;
        for p in five_exponents() {
            let want = lp_norm(&eta, p) * c.lp_norm(p);
            worst_gabor = worst_gabor.max((lp_norm(&f, p) - want).abs() / want);
        }
    }
    let spec = GridSpec::new(1, 1 << 16, 24.0).unwrap();
    let a = BumpProfile::a(1);
    let mut worst_bumps: f64 = 0.0;
    for _ in 0..5 {
        let c = random_coeffs(&mut rng, 10, true);
        for p in ["1", "3/2", "2", "3"].iter().map(|s| e(s)) {
            let f = scaled_bumps(&c, &a, p, spec).map_err(|x| x.to_string())?;
            let pv = p.value_f64();
            let want = a.lp_norm(p, 1).powf(pv) * c.lp_norm(p).powf(pv);
            worst_bumps = worst_bumps.max((lp_norm(&f, p).powf(pv) - want).abs() / want);
        }
    }
    let detail = format!("disjoint-support max rel {worst_gabor:.1e}, scaled bumps max rel {worst_bumps:.1e}");
    if worst_gabor < 1e-6 && worst_bumps < 1e-4 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c5_sandwich() -> Outcome {
    let setup = DilationSetup::standard();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for family in [Family::Gaussian, Family::Annulus] {
        let reports = sandwich_sweep(&five_exponents(), &[0.0], family, &setup).map_err(|x| x.to_string())?;
        for r in reports {
            for series in [&r.lower_ratios, &r.upper_ratios] {
                let max = series.iter().cloned().fold(0.0, f64::max);
                worst = worst.max(max / series[0]);
            }
            if !r.stable {
                return Err(format!("{} p = {}: ratios {:?} / {:?}", r.family, r.p, r.lower_ratios, r.upper_ratios));
            }
            count += 1;
        }
    }
    Ok(format!("{count} (family, p) cells stable, worst max/initial ratio {worst:.3}"))
}

fn c6_dilation_exponents() -> Outcome {
    let setup = DilationSetup::standard();
    let exps = five_exponents();
    let points: Vec<_> = exps.iter().flat_map(|&p| exps.iter().map(move |&qq| (p, qq))).collect();
    let mut margin = f64::INFINITY;
    let mut count = 0;
    for family in [Family::Gaussian, Family::Annulus] {
        let reports = dilation_sweep(family, &points, &setup).map_err(|x| x.to_string())?;
        for (&(p, qq), r) in points.iter().zip(&reports) {
            let (u, v) = (p.recip(), qq.recip());
            let hi = indices::ratio_to_f64(&oracle::agree(oracle::starred(u, v), oracle::mu_branches(u, v)).unwrap());
            let lo = indices::ratio_to_f64(&oracle::agree(oracle::unstarred(u, v), oracle::mu_branches(u, v)).unwrap());
            let slope = match &r.measured {
                Measurement::Fit(f) => f.slope,
                _ => return Err("dilation probe without a fit".into()),
            };
            let m = (slope - (lo - 0.05)).min(hi + 0.05 - slope);
            margin = margin.min(m);
            if m < 0.0 {
                return Err(format!("{} (p,q)=({p},{qq}): slope {slope:.4} outside [{lo}, {hi}] ± 0.05", family.name()));
            }
            count += 1;
        }
    }
    Ok(format!("{count} slopes inside their brackets, smallest margin {margin:.4}"))
}

fn c7_sharpness() -> Outcome {
    // (a) critical s = 1/4: v(R)² gains at least 2 ln((2R+2)/(R+2)) per doubling
    let (p, qq) = (e("2"), e("4"));
    let radii: Vec<u64> = (0..=14).map(|j| 1u64 << j).collect();
    let crit: Vec<f64> = radii.iter().map(|&r| sequence_oracle_dual_norm(p, qq, 0.25, 1, r).unwrap()).collect();
    for (w, r) in crit.windows(2).zip(&radii) {
        let gain = w[1] * w[1] - w[0] * w[0];
        let rf = *r as f64;
        let floor = 2.0 * ((2.0 * rf + 2.0) / (rf + 2.0)).ln();
        if !(w[1] > w[0] && gain >= floor - 1e-12) {
            return Err(format!("critical dual norm at R = {r}: {} -> {} (gain {gain}, floor {floor})", w[0], w[1]));
        }
    }
    // 10% above critical: the Cauchy differences sit under the integral tail
    let s = 0.275;
    let a = 4.0 * s;
    let above: Vec<f64> = radii.iter().map(|&r| sequence_oracle_dual_norm(p, qq, s, 1, r).unwrap()).collect();
    for (w, r) in above.windows(2).zip(&radii) {
        let diff = w[1] - w[0];
        let bound = (2.0 * (1.0 + *r as f64).powf(1.0 - a) / (a - 1.0)).sqrt();
        if !(diff >= 0.0 && diff <= bound) {
            return Err(format!("supercritical difference {diff} at R = {r} exceeds tail bound {bound}"));
        }
    }
    // (b) critical sequence for (p, q) = (2, 1) at s = -1/2
    let (p, qq) = (e("2"), e("1"));
    let eps = 0.1;
    let mass_bound = 2.0 * (1.0 / 3.0 * 3f64.ln().powf(-1.0 - eps) + 3f64.ln().powf(-eps) / eps);
    let mut ratios = Vec::new();
    let mut masses = Vec::new();
    for j in 3..=14 {
        let c = critical_sequence(1, p, eps, 3, 1u64 << j).map_err(|x| x.to_string())?;
        masses.push(c.lp_norm(p).powi(2));
        ratios.push(annular_inequality_check(p, qq, -0.5, 1, &c).map_err(|x| x.to_string())?);
    }
    if !ratios.windows(2).all(|w| w[1] > w[0]) {
        return Err(format!("critical-sequence ratios not increasing: {ratios:?}"));
    }
    if masses.iter().any(|&m| m > mass_bound) {
        return Err(format!("ℓ^p mass {masses:?} exceeds {mass_bound}"));
    }
    Ok(format!(
        "dual norm {:.3} -> {:.3} at R = 2^14; annular ratio {:.3} -> {:.3} with ℓ^p mass ≤ {:.3} (bound {mass_bound:.2})",
        crit[0],
        crit[crit.len() - 1],
        ratios[0],
        ratios[ratios.len() - 1],
        masses[masses.len() - 1],
    ))
}

fn c8_multipliers() -> Outcome {
    let lambdas = DilationSetup::standard().lambdas;
    let slope = |p: &str, alpha: Q, s: Q| -> Result<f64, String> {
        let r = multiplier_loss_experiment(e(p), alpha, s, &lambdas).map_err(|x| x.to_string())?;
        match r.measured {
            Measurement::Fit(f) => Ok(f.slope),
            _ => Err("multiplier probe without a fit".into()),
        }
    };
    let zero = Q::from_integer(0);
    let mut unitary: f64 = 0.0;
    for alpha in [q(0, 1), q(1, 2), q(1, 1), q(2, 1), q(3, 1)] {
        unitary = unitary.max(slope("2", alpha, zero)?.abs());
    }
    let loss = slope("1", q(2, 1), zero)?;
    let smoothing = slope("2", q(2, 1), q(1, 1))?;
    let detail = format!("p=2 max |slope| {unitary:.1e}; (1,2,0) slope {loss:.4}; (2,2,1) slope {smoothing:.4}");
    if unitary < 1e-3 && (loss - 1.0).abs() <= 0.1 && (smoothing + 1.0).abs() <= 0.05 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn schema(name: &str) -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&v).unwrap()
}

fn validate(schema: &jsonschema::JSONSchema, what: &str, v: &serde_json::Value) -> Result<(), String> {
    schema
        .validate(v)
        .map_err(|errs| format!("{what}: {}", errs.map(|x| x.to_string()).collect::<Vec<_>>().join("; ")))
}

fn c9_cli() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_modlab");
    let dir = tempfile::tempdir().map_err(|x| x.to_string())?;
    let probe_schema = schema("probe_report.schema.json");
    let mut files = 0;
    let configs = [
        serde_json::json!({
            "command": "multiplier", "p": ["1", "2"], "alpha": ["2"], "s": ["0"], "seed": 17,
        }),
        serde_json::json!({
            "command": "embedding", "family": "gabor-critical", "p": ["2"], "q": ["4"], "s": ["-1/4"], "seed": 17,
        }),
    ];
    for (i, base) in configs.iter().enumerate() {
        validate(&schema("run_config.schema.json"), "run config", base)?;
        let mut summaries = Vec::new();
        for run in ["a", "b"] {
            let out = dir.path().join(format!("{i}-{run}"));
            let mut cfg = base.clone();
            cfg["out"] = serde_json::json!(out);
            let path = dir.path().join(format!("{i}-{run}.json"));
            std::fs::write(&path, cfg.to_string()).unwrap();
            let status = Command::new(bin)
                .args(["experiment", "--no-timestamp", "--config", path.to_str().unwrap()])
                .status()
                .map_err(|x| x.to_string())?;
            if status.code() != Some(0) {
                return Err(format!("config {i} run {run} exited with {status}"));
            }
            summaries.push(std::fs::read(out.join("summary.csv")).map_err(|x| x.to_string())?);
            for entry in std::fs::read_dir(&out).unwrap() {
                let path = entry.unwrap().path();
                if path.extension().and_then(|x| x.to_str()) == Some("json") {
                    let v = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).map_err(|x| x.to_string())?;
                    validate(&probe_schema, &path.display().to_string(), &v)?;
                    files += 1;
                }
            }
        }
        if summaries[0] != summaries[1] {
            return Err(format!("config {i}: summary.csv differs between runs"));
        }
    }
    let verdict = Command::new(bin)
        .args(["verdict", "--p", "2", "--q", "1", "--s", "0", "--dir", "M-to-L"])
        .output()
        .map_err(|x| x.to_string())?;
    let v = serde_json::from_slice(&verdict.stdout).map_err(|x| x.to_string())?;
    validate(&schema("verdict.schema.json"), "verdict", &v)?;
    let csv = dir.path().join("g.csv");
    let spec = GridSpec::new(1, 1 << 10, 40.0).unwrap();
    sample(&FunctionDescriptor::Gaussian { sigma: 1.0 }, spec)
        .unwrap()
        .write_csv(std::fs::File::create(&csv).unwrap())
        .unwrap();
    let norm = Command::new(bin)
        .args(["norm", "--input", csv.to_str().unwrap(), "--space", "M", "--p", "2", "--q", "1"])
        .output()
        .map_err(|x| x.to_string())?;
    let v = serde_json::from_slice(&norm.stdout).map_err(|x| x.to_string())?;
    validate(&schema("norm_report.schema.json"), "norm report", &v)?;
    Ok(format!("summaries byte-identical across runs; {} JSON outputs valid", files + 2))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("index engine exactness", 1, c1_index_engine),
        ("predicate coherence", 5, c2_predicate_coherence),
        ("FFT layer", 5, c3_fft),
        ("extremal identities", 30, c4_extremal_identities),
        ("Lebesgue/modulation sandwich", 60, c5_sandwich),
        ("dilation exponents", 180, c6_dilation_exponents),
        ("sharpness signatures", 60, c7_sharpness),
        ("multiplier experiments", 180, c8_multipliers),
        ("CLI determinism and schema", 30, c9_cli),
    ];
    let mut failed = Vec::new();
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let over = took > Duration::from_secs(*budget);
        let (tag, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {budget} s budget")),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        println!("{tag} [{}] {name}: {detail} ({:.2} s)", i + 1, took.as_secs_f64());
        if tag == "FAIL" {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
