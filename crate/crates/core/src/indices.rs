//! Exact index functions and embedding predicates.
//!
//! Every exponent is carried as the reciprocal `1/p` in exact rational form,
//! so `p = ∞` is simply `0` and region boundaries are decided without
//! rounding. All thresholds returned here are rational in `1/p`, `1/q`, `s`
//! and `α`.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Exact rational used throughout the index engine.
pub type Q = Ratio<i128>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("exponent reciprocal {0} is outside [0, 1]")]
    ExponentOutOfRange(String),
    #[error("cannot parse `{0}` as an exponent or rational")]
    Parse(String),
    #[error("branch mismatch for {function} at (1/p, 1/q) = ({u}, {v}): {detail}")]
    BranchMismatch {
        function: &'static str,
        u: String,
        v: String,
        detail: String,
    },
    #[error("dimension must be at least 1")]
    Dimension,
    #[error("domain error: {0}")]
    Domain(String),
}

pub fn q(num: i128, den: i128) -> Q {
    Q::new(num, den)
}

fn q_int(n: i128) -> Q {
    Q::from_integer(n)
}

/// Formats an exact rational as `num/den` (or an integer when `den = 1`).
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `num/den`, an integer, or (when `allow_decimal`) a decimal literal.
///
/// Decimals are rounded to the closest rational with denominator at most
/// [`MAX_APPROX_DENOMINATOR`]; the second tuple entry is `true` when the
/// conversion was inexact.
pub fn parse_q(text: &str, allow_decimal: bool) -> Result<(Q, bool), IndexError> {
    let t = text.trim();
    if let Ok(v) = Q::from_str(t) {
        return Ok((v, false));
    }
    if allow_decimal {
        if let Ok(x) = t.parse::<f64>() {
            if x.is_finite() {
                let r = approximate(x, MAX_APPROX_DENOMINATOR);
                let exact = (*r.numer() as f64) / (*r.denom() as f64) == x;
                return Ok((r, !exact));
            }
        }
    }
    Err(IndexError::Parse(text.to_string()))
}

pub const MAX_APPROX_DENOMINATOR: i128 = 1_000_000;

/// Closest rational to `x` with denominator at most `max_den`
/// (continued-fraction convergents plus the best semiconvergent).
pub fn approximate(x: f64, max_den: i128) -> Q {
    assert!(x.is_finite() && max_den >= 1);
    let sign = if x < 0.0 { -1 } else { 1 };
    let mut y = x.abs();
    let (mut p0, mut q0, mut p1, mut q1): (i128, i128, i128, i128) = (0, 1, 1, 0);
    loop {
        let a = y.floor();
        if a > 1e18 {
            break;
        }
        let a_i = a as i128;
        let q2 = q0 + a_i * q1;
        if q2 > max_den {
            // best semiconvergent
            let k = (max_den - q0) / q1;
            let (bp, bq) = (p0 + k * p1, q0 + k * q1);
            let c1 = Q::new(p1, q1);
            let c2 = Q::new(bp, bq);
            let target = x.abs();
            let d1 = (ratio_to_f64(&c1) - target).abs();
            let d2 = (ratio_to_f64(&c2) - target).abs();
            let best = if d2 < d1 { c2 } else { c1 };
            return best * q_int(sign);
        }
        let p2 = p0 + a_i * p1;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = y - a;
        if frac < 1e-15 {
            break;
        }
        y = 1.0 / frac;
    }
    Q::new(p1, q1) * q_int(sign)
}

pub fn ratio_to_f64(x: &Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Lebesgue exponent `p ∈ [1, ∞]`, stored as `1/p ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtendedExponent {
    recip: Q,
}

impl ExtendedExponent {
    pub fn from_recip(recip: Q) -> Result<Self, IndexError> {
        if recip < Q::zero() || recip > Q::one() {
            return Err(IndexError::ExponentOutOfRange(fmt_q(&recip)));
        }
        Ok(Self { recip })
    }

    /// Finite exponent `p ≥ 1`.
    pub fn finite(p: Q) -> Result<Self, IndexError> {
        if p < Q::one() {
            return Err(IndexError::ExponentOutOfRange(format!("p = {}", fmt_q(&p))));
        }
        Ok(Self { recip: p.recip() })
    }

    pub fn int(p: i128) -> Self {
        Self::finite(q_int(p)).expect("integer exponent must be >= 1")
    }

    pub fn ratio(num: i128, den: i128) -> Self {
        Self::finite(q(num, den)).expect("exponent must be >= 1")
    }

    pub fn infinity() -> Self {
        Self { recip: Q::zero() }
    }

    pub fn one() -> Self {
        Self { recip: Q::one() }
    }

    pub fn recip(&self) -> Q {
        self.recip
    }

    pub fn recip_f64(&self) -> f64 {
        ratio_to_f64(&self.recip)
    }

    pub fn is_infinite(&self) -> bool {
        self.recip.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.recip.is_one()
    }

    /// `p` as a float (`f64::INFINITY` for `p = ∞`).
    pub fn value_f64(&self) -> f64 {
        if self.is_infinite() {
            f64::INFINITY
        } else {
            1.0 / self.recip_f64()
        }
    }

    /// Hölder conjugate: `1/p + 1/p' = 1`.
    pub fn dual(&self) -> Self {
        Self {
            recip: Q::one() - self.recip,
        }
    }
}

/// `dual_exponent` as a free function.
pub fn dual_exponent(p: ExtendedExponent) -> ExtendedExponent {
    p.dual()
}

impl fmt::Display for ExtendedExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("infty")
        } else {
            f.write_str(&fmt_q(&self.recip.recip()))
        }
    }
}

impl FromStr for ExtendedExponent {
    type Err = IndexError;

    /// Accepts `infty`, `inf`, `∞`, an integer or `num/den`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t {
            "infty" | "inf" | "∞" | "infinity" => return Ok(Self::infinity()),
            _ => {}
        }
        let (v, _) = parse_q(t, false)?;
        Self::finite(v)
    }
}

impl Serialize for ExtendedExponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// A point `(1/p, 1/q)` of the closed unit square.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexPair {
    pub u: Q,
    pub v: Q,
}

impl IndexPair {
    pub fn new(u: Q, v: Q) -> Result<Self, IndexError> {
        ExtendedExponent::from_recip(u)?;
        ExtendedExponent::from_recip(v)?;
        Ok(Self { u, v })
    }

    pub fn from_exponents(p: ExtendedExponent, q: ExtendedExponent) -> Self {
        Self {
            u: p.recip(),
            v: q.recip(),
        }
    }
}

/// Membership in the closed regions `I₁, I₂, I₃` and `I₁*, I₂*, I₃*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
pub struct RegionSet {
    pub i1: bool,
    pub i2: bool,
    pub i3: bool,
    pub i1_star: bool,
    pub i2_star: bool,
    pub i3_star: bool,
}

impl RegionSet {
    pub fn unstarred(&self) -> [bool; 3] {
        [self.i1, self.i2, self.i3]
    }

    pub fn starred(&self) -> [bool; 3] {
        [self.i1_star, self.i2_star, self.i3_star]
    }
}

pub fn classify_regions(pq: IndexPair) -> RegionSet {
    let half = q(1, 2);
    let (u, v) = (pq.u, pq.v);
    let u_dual = Q::one() - u;
    RegionSet {
        i1: u.max(u_dual) <= v,
        i2: v.max(half) <= u_dual,
        i3: v.max(half) <= u,
        i1_star: u.min(u_dual) >= v,
        i2_star: v.min(half) >= u_dual,
        i3_star: v.min(half) >= u,
    }
}

/// Evaluates a three-branch piecewise function and insists that all
/// matching branches agree.
fn piecewise(
    function: &'static str,
    pq: IndexPair,
    members: [bool; 3],
    branches: [Q; 3],
) -> Result<Q, IndexError> {
    let mut value: Option<(usize, Q)> = None;
    for (idx, (&inside, &b)) in members.iter().zip(branches.iter()).enumerate() {
        if !inside {
            continue;
        }
        match value {
            None => value = Some((idx, b)),
            Some((first, v)) if v != b => {
                return Err(IndexError::BranchMismatch {
                    function,
                    u: fmt_q(&pq.u),
                    v: fmt_q(&pq.v),
                    detail: format!(
                        "region {} gives {}, region {} gives {}",
                        first + 1,
                        fmt_q(&v),
                        idx + 1,
                        fmt_q(&b)
                    ),
                })
            }
            Some(_) => {}
        }
    }
    value.map(|(_, v)| v).ok_or_else(|| IndexError::BranchMismatch {
        function,
        u: fmt_q(&pq.u),
        v: fmt_q(&pq.v),
        detail: "point lies in no region".into(),
    })
}

fn nu_branches(pq: IndexPair) -> [Q; 3] {
    [Q::zero(), pq.u + pq.v - Q::one(), pq.v - pq.u]
}

fn mu_branches(pq: IndexPair) -> [Q; 3] {
    [-pq.u, pq.v - Q::one(), pq.v - q_int(2) * pq.u]
}

pub fn nu1_at(pq: IndexPair) -> Result<Q, IndexError> {
    piecewise("nu1", pq, classify_regions(pq).starred(), nu_branches(pq))
}

pub fn nu2_at(pq: IndexPair) -> Result<Q, IndexError> {
    piecewise("nu2", pq, classify_regions(pq).unstarred(), nu_branches(pq))
}

pub fn mu1_at(pq: IndexPair) -> Result<Q, IndexError> {
    piecewise("mu1", pq, classify_regions(pq).starred(), mu_branches(pq))
}

pub fn mu2_at(pq: IndexPair) -> Result<Q, IndexError> {
    piecewise("mu2", pq, classify_regions(pq).unstarred(), mu_branches(pq))
}

pub fn nu1(p: ExtendedExponent, q: ExtendedExponent) -> Result<Q, IndexError> {
    nu1_at(IndexPair::from_exponents(p, q))
}

pub fn nu2(p: ExtendedExponent, q: ExtendedExponent) -> Result<Q, IndexError> {
    nu2_at(IndexPair::from_exponents(p, q))
}

pub fn mu1(p: ExtendedExponent, q: ExtendedExponent) -> Result<Q, IndexError> {
    mu1_at(IndexPair::from_exponents(p, q))
}

pub fn mu2(p: ExtendedExponent, q: ExtendedExponent) -> Result<Q, IndexError> {
    mu2_at(IndexPair::from_exponents(p, q))
}

/// Smoothness index `s`, kept exact so that `s = threshold` is decidable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Smoothness(pub Q);

impl Smoothness {
    pub fn new(s: Q) -> Self {
        Self(s)
    }

    pub fn zero() -> Self {
        Self(Q::zero())
    }

    /// Rounds a real to the nearest rational with denominator ≤ 10⁶.
    /// Returns the smoothness and whether rounding changed the value.
    pub fn from_f64_approx(x: f64) -> (Self, bool) {
        let r = approximate(x, MAX_APPROX_DENOMINATOR);
        let inexact = ratio_to_f64(&r) != x;
        (Self(r), inexact)
    }

    pub fn value(&self) -> Q {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.0)
    }
}

impl fmt::Display for Smoothness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_q(&self.0))
    }
}

/// Outcome of an embedding predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    /// Clause whose regime contains `(p, q)`; it decided the outcome.
    pub matched_condition: String,
    /// Critical smoothness of the clause.
    pub threshold: Q,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        if self.holds {
            "Embeds"
        } else {
            "DoesNotEmbed"
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundedness {
    Bounded,
    Unbounded,
    UnknownGap,
}

impl fmt::Display for Boundedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Boundedness::Bounded => "Bounded",
            Boundedness::Unbounded => "Unbounded",
            Boundedness::UnknownGap => "UnknownGap",
        };
        f.write_str(s)
    }
}

/// Three-valued verdict for `e^{i|D|^α}`; `UnknownGap` marks the open
/// window between the sufficient and the necessary condition for `α > 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriVerdict {
    pub outcome: Boundedness,
    pub threshold: Q,
    pub matched_condition: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BesovDirection {
    BesovToModulation,
    ModulationToBesov,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftedDirection {
    /// `M^{p,q}_s ↪ L^p`
    ModulationToLebesgue,
    /// `L^p ↪ M^{p,q}_s`
    LebesgueToModulation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultiplierDirection {
    /// `e^{i|D|^α} : M^{p,q}_s → L^p`
    ModulationToLebesgue,
    /// `e^{i|D|^α} : L^p_s → M^{p,q}`
    LebesgueToModulation,
}

fn check_dim(n: u32) -> Result<Q, IndexError> {
    if n == 0 {
        Err(IndexError::Dimension)
    } else {
        Ok(q_int(n as i128))
    }
}

pub fn embeds_besov_modulation(
    p: ExtendedExponent,
    q: ExtendedExponent,
    s: Smoothness,
    n: u32,
    direction: BesovDirection,
) -> Result<Verdict, IndexError> {
    let nq = check_dim(n)?;
    Ok(match direction {
        BesovDirection::BesovToModulation => {
            let t = nq * nu1(p, q)?;
            Verdict {
                holds: s.0 >= t,
                matched_condition: "Thm1.1(1)".into(),
                threshold: t,
            }
        }
        BesovDirection::ModulationToBesov => {
            let t = nq * nu2(p, q)?;
            Verdict {
                holds: s.0 <= t,
                matched_condition: "Thm1.1(2)".into(),
                threshold: t,
            }
        }
    })
}

/// Which of the four clauses governs `L^p_s ↪ M^{p,q}` at `(p, q)`, and
/// whether its inequality is strict. The clauses partition the square.
fn lm_clause(p: ExtendedExponent, q: ExtendedExponent) -> (u8, bool) {
    if p.is_one() {
        if q.is_infinite() {
            (3, false)
        } else {
            (4, true)
        }
    } else if q.recip() <= p.recip() {
        // q ≥ p > 1
        (1, false)
    } else {
        // p > q
        (2, true)
    }
}

/// Clause governing `M^{p,q} ↪ L^p_s` at `(p, q)` and its strictness.
fn ml_clause(p: ExtendedExponent, q: ExtendedExponent) -> (u8, bool) {
    if p.is_infinite() {
        if q.is_one() {
            (3, false)
        } else {
            (4, true)
        }
    } else if q.recip() >= p.recip() {
        // q ≤ p < ∞
        (1, false)
    } else {
        // p < q
        (2, true)
    }
}

/// `L^p_s ↪ M^{p,q}`.
pub fn embeds_l_in_m(
    p: ExtendedExponent,
    q: ExtendedExponent,
    s: Smoothness,
    n: u32,
) -> Result<Verdict, IndexError> {
    let t = check_dim(n)? * nu1(p, q)?;
    let (clause, strict) = lm_clause(p, q);
    let holds = if strict { s.0 > t } else { s.0 >= t };
    Ok(Verdict {
        holds,
        matched_condition: format!("Thm1.3({clause})"),
        threshold: t,
    })
}

/// `M^{p,q} ↪ L^p_s`.
pub fn embeds_m_in_l(
    p: ExtendedExponent,
    q: ExtendedExponent,
    s: Smoothness,
    n: u32,
) -> Result<Verdict, IndexError> {
    let t = check_dim(n)? * nu2(p, q)?;
    let (clause, strict) = ml_clause(p, q);
    let holds = if strict { s.0 < t } else { s.0 <= t };
    Ok(Verdict {
        holds,
        matched_condition: format!("Thm1.4({clause})"),
        threshold: t,
    })
}

/// `M^{p,q}_s ↪ L^p` or `L^p ↪ M^{p,q}_s`, via the lifting `⟨D⟩^s`.
///
/// The returned threshold is expressed in terms of the `s` passed in.
pub fn embeds_m_shifted(
    p: ExtendedExponent,
    q: ExtendedExponent,
    s: Smoothness,
    n: u32,
    direction: ShiftedDirection,
) -> Result<Verdict, IndexError> {
    let flipped = Smoothness(-s.0);
    let mut v = match direction {
        ShiftedDirection::ModulationToLebesgue => embeds_m_in_l(p, q, flipped, n)?,
        ShiftedDirection::LebesgueToModulation => embeds_l_in_m(p, q, flipped, n)?,
    };
    v.threshold = -v.threshold;
    Ok(v)
}

/// Boundedness of `e^{i|D|^α} : L^p_s → L^p` (`1 < p < ∞`, `α > 1`).
pub fn miyachi_lp_bound(
    p: ExtendedExponent,
    s: Smoothness,
    n: u32,
    alpha: Q,
) -> Result<Verdict, IndexError> {
    let nq = check_dim(n)?;
    if p.is_infinite() || p.is_one() {
        return Err(IndexError::Domain(format!("need 1 < p < ∞, got p = {p}")));
    }
    if alpha <= Q::one() {
        return Err(IndexError::Domain(format!("need α > 1, got α = {}", fmt_q(&alpha))));
    }
    let t = alpha * nq * (p.recip() - self::q(1, 2)).abs();
    Ok(Verdict {
        holds: s.0 >= t,
        matched_condition: "ThmA".into(),
        threshold: t,
    })
}

/// Boundedness of the unimodular multiplier `e^{i|D|^α}` between
/// modulation and `L^p`-Sobolev spaces.
pub fn multiplier_verdict(
    p: ExtendedExponent,
    q: ExtendedExponent,
    s: Smoothness,
    n: u32,
    alpha: Q,
    direction: MultiplierDirection,
) -> Result<TriVerdict, IndexError> {
    let nq = check_dim(n)?;
    if alpha < Q::zero() {
        return Err(IndexError::Domain(format!("need α ≥ 0, got α = {}", fmt_q(&alpha))));
    }
    let two = q_int(2);
    let loss = if alpha > two {
        (alpha - two) * nq * (p.recip() - self::q(1, 2)).abs()
    } else {
        Q::zero()
    };
    let (base, (clause, strict), offset) = match direction {
        MultiplierDirection::ModulationToLebesgue => (-nq * nu2(p, q)?, ml_clause(p, q), 0),
        MultiplierDirection::LebesgueToModulation => (nq * nu1(p, q)?, lm_clause(p, q), 4),
    };
    let t = base + loss;
    let sufficient = if strict { s.0 > t } else { s.0 >= t };
    let clause = clause + offset;
    let (outcome, label) = if alpha <= two {
        let outcome = if sufficient {
            Boundedness::Bounded
        } else {
            Boundedness::Unbounded
        };
        (outcome, format!("Cor5.2({clause})"))
    } else if sufficient {
        (Boundedness::Bounded, format!("Cor5.4({clause})"))
    } else if s.0 < t {
        (Boundedness::Unbounded, "Thm5.5".to_string())
    } else {
        (Boundedness::UnknownGap, format!("Cor5.4({clause})/Thm5.5"))
    };
    Ok(TriVerdict {
        outcome,
        threshold: t,
        matched_condition: label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> ExtendedExponent {
        s.parse().unwrap()
    }

    fn sm(num: i128, den: i128) -> Smoothness {
        Smoothness(q(num, den))
    }

    /// Brute-force oracle: the six defining inequalities evaluated in floats
    /// on dyadic-exact inputs.
    fn oracle_regions(u: f64, v: f64) -> [bool; 6] {
        let ud = 1.0 - u;
        [
            u.max(ud) <= v,
            v.max(0.5) <= ud,
            v.max(0.5) <= u,
            u.min(ud) >= v,
            v.min(0.5) >= ud,
            v.min(0.5) >= u,
        ]
    }

    fn flags(r: RegionSet) -> [bool; 6] {
        [r.i1, r.i2, r.i3, r.i1_star, r.i2_star, r.i3_star]
    }

    #[test]
    fn dual_exponent_examples() {
        assert_eq!(dual_exponent(e("2")), e("2"));
        assert_eq!(dual_exponent(e("1")), ExtendedExponent::infinity());
        assert_eq!(dual_exponent(e("4/3")), e("4"));
        assert_eq!(e("3").dual().dual(), e("3"));
    }

    #[test]
    fn exponent_parsing() {
        assert!(e("infty").is_infinite());
        assert_eq!(e("3/2").recip(), q(2, 3));
        assert!("1/2".parse::<ExtendedExponent>().is_err());
        assert!("abc".parse::<ExtendedExponent>().is_err());
        assert_eq!(e("3/2").to_string(), "3/2");
        assert_eq!(ExtendedExponent::infinity().to_string(), "infty");
    }

    #[test]
    fn region_examples() {
        let all = classify_regions(IndexPair::new(q(1, 2), q(1, 2)).unwrap());
        assert_eq!(flags(all), [true; 6]);

        let corner = classify_regions(IndexPair::new(q(1, 1), q(0, 1)).unwrap());
        assert_eq!(flags(corner), oracle_regions(1.0, 0.0));
        assert!(corner.i1_star && corner.i2_star && !corner.i3_star);
        assert!(!corner.i1 && !corner.i2 && corner.i3);

        let quarter = classify_regions(IndexPair::new(q(1, 4), q(1, 4)).unwrap());
        assert_eq!(flags(quarter), oracle_regions(0.25, 0.25));
        assert!(quarter.i1_star && !quarter.i2_star && quarter.i3_star);
    }

    #[test]
    fn regions_match_float_oracle_on_dyadic_grid() {
        // multiples of 1/16 are exact in binary floating point
        for i in 0..=16 {
            for j in 0..=16 {
                let pq = IndexPair::new(q(i, 16), q(j, 16)).unwrap();
                assert_eq!(
                    flags(classify_regions(pq)),
                    oracle_regions(i as f64 / 16.0, j as f64 / 16.0),
                    "at ({i}/16, {j}/16)"
                );
            }
        }
    }

    #[test]
    fn nu_examples() {
        assert_eq!(nu1(e("2"), e("2")).unwrap(), q(0, 1));
        assert_eq!(nu1(e("1"), e("2")).unwrap(), q(1, 2));
        assert_eq!(nu1(e("infty"), e("1")).unwrap(), q(1, 1));
        assert_eq!(nu2(e("2"), e("2")).unwrap(), q(0, 1));
        assert_eq!(nu2(e("1"), e("2")).unwrap(), q(-1, 2));
        assert_eq!(nu2(e("infty"), e("2")).unwrap(), q(-1, 2));
        assert_eq!(nu2(e("1"), e("infty")).unwrap(), q(-1, 1));
        assert_eq!(nu2(e("1"), e("1")).unwrap(), q(0, 1));
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu1(e("2"), e("2")).unwrap(), q(-1, 2));
        assert_eq!(mu1(e("1"), e("1")).unwrap(), q(0, 1));
        assert_eq!(mu2(e("infty"), e("infty")).unwrap(), q(-1, 1));
        assert_eq!(mu1(e("infty"), e("infty")).unwrap(), q(0, 1));
        assert_eq!(mu2(e("2"), e("2")).unwrap(), q(-1, 2));
    }

    #[test]
    fn besov_examples() {
        let bm = BesovDirection::BesovToModulation;
        let mb = BesovDirection::ModulationToBesov;
        assert!(embeds_besov_modulation(e("2"), e("2"), sm(0, 1), 1, bm).unwrap().holds);
        assert!(embeds_besov_modulation(e("1"), e("2"), sm(1, 2), 1, bm).unwrap().holds);
        assert!(!embeds_besov_modulation(e("1"), e("2"), sm(-2, 5), 1, mb).unwrap().holds);
        assert!(embeds_besov_modulation(e("1"), e("2"), sm(-1, 2), 1, mb).unwrap().holds);
        assert!(embeds_besov_modulation(e("2"), e("2"), sm(0, 1), 0, bm).is_err());
    }

    #[test]
    fn l_in_m_examples() {
        let v = embeds_l_in_m(e("2"), e("2"), sm(0, 1), 1).unwrap();
        assert!(v.holds);
        assert_eq!(v.matched_condition, "Thm1.3(1)");
        let v = embeds_l_in_m(e("2"), e("1"), sm(1, 2), 1).unwrap();
        assert!(!v.holds);
        assert_eq!(v.matched_condition, "Thm1.3(2)");
        assert_eq!(v.threshold, q(1, 2));
        let v = embeds_l_in_m(e("1"), e("infty"), sm(0, 1), 1).unwrap();
        assert!(v.holds);
        assert_eq!(v.matched_condition, "Thm1.3(3)");
        let v = embeds_l_in_m(e("1"), e("2"), sm(1, 2), 1).unwrap();
        assert!(!v.holds);
        assert_eq!(v.matched_condition, "Thm1.3(4)");
    }

    #[test]
    fn m_in_l_examples() {
        let v = embeds_m_in_l(e("2"), e("1"), sm(0, 1), 1).unwrap();
        assert!(v.holds);
        assert_eq!(v.matched_condition, "Thm1.4(1)");
        let v = embeds_m_in_l(e("2"), e("4"), sm(-1, 4), 1).unwrap();
        assert!(!v.holds);
        assert_eq!(v.matched_condition, "Thm1.4(2)");
        assert_eq!(v.threshold, q(-1, 4));
        let v = embeds_m_in_l(e("infty"), e("1"), sm(0, 1), 1).unwrap();
        assert!(v.holds);
        assert_eq!(v.matched_condition, "Thm1.4(3)");
        let v = embeds_m_in_l(e("infty"), e("2"), sm(-1, 2), 1).unwrap();
        assert!(!v.holds);
        assert_eq!(v.matched_condition, "Thm1.4(4)");
    }

    #[test]
    fn shifted_examples() {
        let ml = ShiftedDirection::ModulationToLebesgue;
        let lm = ShiftedDirection::LebesgueToModulation;
        assert!(embeds_m_shifted(e("2"), e("1"), sm(0, 1), 1, ml).unwrap().holds);
        // L¹ ↪ M^{1,2}_{-1/2} needs s < -n/q strictly
        let v = embeds_m_shifted(e("1"), e("2"), sm(-1, 2), 1, lm).unwrap();
        assert!(!v.holds);
        assert_eq!(v.threshold, q(-1, 2));
        assert!(embeds_m_shifted(e("1"), e("2"), sm(-3, 5), 1, lm).unwrap().holds);
        // M^{2,4}_{1/4} ↪ L² fails at the critical index, holds above it
        assert!(!embeds_m_shifted(e("2"), e("4"), sm(1, 4), 1, ml).unwrap().holds);
        assert!(embeds_m_shifted(e("2"), e("4"), sm(1, 3), 1, ml).unwrap().holds);
    }

    #[test]
    fn miyachi_examples() {
        let two = q(2, 1);
        assert!(miyachi_lp_bound(e("2"), sm(0, 1), 1, two).unwrap().holds);
        assert!(!miyachi_lp_bound(e("2"), sm(-1, 100), 1, two).unwrap().holds);
        let v = miyachi_lp_bound(e("4"), sm(1, 2), 1, two).unwrap();
        assert!(v.holds);
        assert_eq!(v.threshold, q(1, 2));
        assert!(miyachi_lp_bound(e("1"), sm(0, 1), 1, two).is_err());
        assert!(miyachi_lp_bound(e("infty"), sm(0, 1), 1, two).is_err());
        assert!(miyachi_lp_bound(e("2"), sm(0, 1), 1, q(1, 1)).is_err());
    }

    #[test]
    fn multiplier_examples() {
        let ml = MultiplierDirection::ModulationToLebesgue;
        let v = multiplier_verdict(e("2"), e("2"), sm(0, 1), 1, q(2, 1), ml).unwrap();
        assert_eq!(v.outcome, Boundedness::Bounded);
        assert_eq!(v.threshold, q(0, 1));
        let v = multiplier_verdict(e("2"), e("4"), sm(1, 4), 1, q(3, 1), ml).unwrap();
        assert_eq!(v.outcome, Boundedness::UnknownGap);
        assert_eq!(v.threshold, q(1, 4));
        let v = multiplier_verdict(e("1"), e("1"), sm(0, 1), 1, q(3, 1), ml).unwrap();
        assert_eq!(v.outcome, Boundedness::Unbounded);
        assert_eq!(v.threshold, q(1, 2));
        assert!(multiplier_verdict(e("2"), e("2"), sm(0, 1), 1, q(-1, 1), ml).is_err());
    }

    #[test]
    fn approximation_bounds_denominator() {
        let r = approximate(std::f64::consts::PI, 1000);
        assert_eq!(r, q(355, 113));
        let r = approximate(-0.4, MAX_APPROX_DENOMINATOR);
        assert_eq!(r, q(-2, 5));
        let (s, inexact) = Smoothness::from_f64_approx(0.1 + 0.2);
        assert_eq!(s.0, q(3, 10));
        assert!(inexact);
        let (v, warn) = parse_q("0.25", true).unwrap();
        assert_eq!(v, q(1, 4));
        assert!(!warn);
        assert!(parse_q("0.25", false).is_err());
    }
}
