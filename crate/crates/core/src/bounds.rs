//! Closed-form GV-type bounds, concentration tails and the explicit lower
//! bounds on the sizes of the high-autodistance sets `A` and `B`.
//!
//! Rational bounds are exact [`BigRational`]s. Bounds that multiply `q^n` by an
//! exponential correction are formed exactly up to the correction factor and
//! carried as [`SciValue`], so they stay finite for `n` in the thousands.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sci::SciValue;
use crate::volume::{ball_volume, binomial, cw_ball_volume};
use crate::words::check_alphabet;

/// Exact real parameter (ε, τ, p) parsed from decimal text.
pub type Param = Ratio<i64>;

/// Parses `"0.25"`, `"1/4"` or `"3"` exactly.
pub fn parse_param(text: &str) -> Result<Param> {
    let text = text.trim();
    let bad = || Error::domain(format!("cannot parse {text:?} as an exact number"));
    if let Some((num, den)) = text.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        let den: i64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(num, den));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if (int_part.is_empty() && frac_part.is_empty()) || frac_part.len() > 15 {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let num: i64 = digits.parse().map_err(|_| bad())?;
    let value = Ratio::new(num, 10i64.pow(frac_part.len() as u32));
    Ok(if negative { -value } else { value })
}

pub fn param_f64(p: Param) -> f64 {
    *p.numer() as f64 / *p.denom() as f64
}

pub fn param_text(p: Param) -> String {
    if *p.denom() == 1 {
        p.numer().to_string()
    } else {
        format!("{}/{}", p.numer(), p.denom())
    }
}

fn big(v: &BigUint) -> BigInt {
    BigInt::from(v.clone())
}

fn power(q: u16, n: usize) -> BigUint {
    BigUint::from(q).pow(n as u32)
}

/// `q^n / Vol_q(n, d-1)`.
pub fn gv_bound(n: usize, q: u16, d: usize) -> Result<BigRational> {
    check_alphabet(q)?;
    if d == 0 || d > n {
        return Err(Error::domain(format!("need 1 <= d <= n, got d = {d}, n = {n}")));
    }
    let vol = ball_volume(n, q, d - 1)?;
    Ok(BigRational::new(big(&power(q, n)), big(&vol)))
}

/// `C(n, w) / Vol(n, d-1; w)`.
pub fn levenshtein_bound(n: usize, w: usize, d: usize) -> Result<BigRational> {
    if d == 0 || d > 2 * w || w > n {
        return Err(Error::domain(format!("need 1 <= d <= 2w <= 2n, got n = {n}, w = {w}, d = {d}")));
    }
    let vol = cw_ball_volume(n, w, d - 1)?;
    Ok(BigRational::new(big(&binomial(n as u64, w as u64)), big(&vol)))
}

/// A real-valued bound that may fall below zero at small `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealBound {
    pub value: SciValue,
    /// True when the value is `<= 0` and so guarantees nothing.
    pub vacuous: bool,
}

impl RealBound {
    fn new(value: SciValue) -> Self {
        RealBound {
            value,
            vacuous: !value.is_positive(),
        }
    }
}

/// `n^2 e^{-ε²(√n - 2)/2}`, the failure term of the cyclic-code bound.
pub fn nxy_failure_term(n: usize, eps: f64) -> f64 {
    let n = n as f64;
    n * n * (-eps * eps * (n.sqrt() - 2.0) / 2.0).exp()
}

fn check_eps_q(q: u16, eps: Param) -> Result<()> {
    let ceiling = Ratio::new(i64::from(q) - 1, i64::from(q));
    if eps <= Ratio::zero() || eps >= ceiling {
        return Err(Error::domain(format!(
            "need 0 < eps < 1 - 1/q = {}, got {}",
            param_text(ceiling),
            param_text(eps)
        )));
    }
    Ok(())
}

/// Niu–Xing–Yuan cyclic-code bound
/// `q^n (1 - n² e^{-ε²(√n-2)/2}) / (Vol_q(n, d-1) - 1)`.
pub fn nxy_hcc_bound(n: usize, q: u16, d: usize, eps: Param) -> Result<RealBound> {
    check_alphabet(q)?;
    check_eps_q(q, eps)?;
    if d == 0 || d > n {
        return Err(Error::domain(format!("need 1 <= d <= n, got d = {d}, n = {n}")));
    }
    let vol = ball_volume(n, q, d - 1)?;
    if vol <= BigUint::one() {
        return Err(Error::DivisionDomain("Vol_q(n, d-1) - 1 = 0 (d = 1)".into()));
    }
    let base = BigRational::new(big(&power(q, n)), big(&vol) - 1);
    let factor = 1.0 - nxy_failure_term(n, param_f64(eps));
    Ok(RealBound::new(SciValue::from_ratio(&base).scale(factor)))
}

/// The FHS form `q^n (1 - n² e^{-ε²(√n-2)/2}) / (n (Vol_q(n, n-λ-1) - 1))`.
pub fn fhs_nxy_bound(n: usize, q: u16, lambda: usize, eps: Param) -> Result<RealBound> {
    check_alphabet(q)?;
    check_eps_q(q, eps)?;
    if lambda >= n {
        return Err(Error::domain(format!("need lambda <= n - 1, got lambda = {lambda}, n = {n}")));
    }
    let vol = ball_volume(n, q, n - lambda - 1)?;
    if vol <= BigUint::one() {
        return Err(Error::DivisionDomain("Vol_q(n, n-lambda-1) - 1 = 0 (lambda = n - 1)".into()));
    }
    let base = BigRational::new(big(&power(q, n)), BigInt::from(n) * (big(&vol) - 1));
    let factor = 1.0 - nxy_failure_term(n, param_f64(eps));
    Ok(RealBound::new(SciValue::from_ratio(&base).scale(factor)))
}

/// Independence-number reference value `(|V|/D) ln(min{D, K})` for a graph
/// of maximum degree `D` whose neighborhoods induce at most `D²/K` edges.
///
/// The `(1 - o(1))` factor of the underlying asymptotic statement is
/// dropped, so this is a reporting heuristic and not a guarantee at finite
/// size.
pub fn independence_lower_bound(num_vertices: f64, max_degree: f64, k: f64) -> Result<f64> {
    if max_degree < 1.0 {
        return Err(Error::domain(format!("need D >= 1, got {max_degree}")));
    }
    if !(1.0..=max_degree * max_degree + 1.0).contains(&k) {
        return Err(Error::domain(format!("need 1 <= K <= D^2 + 1, got K = {k}, D = {max_degree}")));
    }
    Ok(num_vertices / max_degree * max_degree.min(k).ln())
}

/// McDiarmid lower tail `exp(-2t² / Σ c_i²)`.
pub fn mcdiarmid_tail(t: f64, c: &[f64]) -> Result<f64> {
    if t <= 0.0 || t.is_nan() {
        return Err(Error::domain(format!("need t > 0, got {t}")));
    }
    if c.is_empty() || c.iter().any(|&ci| ci <= 0.0 || ci.is_nan()) {
        return Err(Error::domain("need a non-empty list of positive influences c_i"));
    }
    let sum: f64 = c.iter().map(|ci| ci * ci).sum();
    Ok((-2.0 * t * t / sum).exp())
}

/// Stirling correction `ℓ(n) = exp(-1/(12n+1) + 1/(12pn) + 1/(12(1-p)n))`.
pub fn stirling_ell(n: usize, p: f64) -> f64 {
    let n = n as f64;
    (-1.0 / (12.0 * n + 1.0) + 1.0 / (12.0 * p * n) + 1.0 / (12.0 * (1.0 - p) * n)).exp()
}

/// `√(2π n p(1-p)) ℓ(n)`, an upper bound on `1 / Pr[wt(X) = pn]` for
/// `X` with i.i.d. Bernoulli(p) coordinates.
pub fn stirling_factor(n: usize, p: f64) -> f64 {
    (2.0 * PI * n as f64 * p * (1.0 - p)).sqrt() * stirling_ell(n, p)
}

/// A guaranteed lower bound on the size of a high-autodistance set, with
/// its factors exposed: `bound = universe · (1 - union · tail · stirling)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetBound {
    /// Strict threshold: members satisfy `d(x) > threshold`.
    pub threshold: String,
    pub threshold_value: f64,
    /// `q^n` for set A, `C(n, pn)` for set B.
    pub universe: String,
    pub per_shift_tail: f64,
    pub union_factor: f64,
    /// 1 for set A.
    pub stirling_factor: f64,
    pub failure_mass: f64,
    pub bound: SciValue,
    pub vacuous: bool,
}

impl SetBound {
    /// Whether an exact set size satisfies the bound.
    pub fn holds_for(&self, count: u64) -> bool {
        self.vacuous || SciValue::from_f64(count as f64).cmp_value(&self.bound).is_ge()
    }
}

/// Bound on `|A|`, `A = {x ∈ [q]^n : d(x) > n(1 - 1/q - ε)}`:
/// `|A| >= q^n (1 - (n-1) exp(-ε² n / 2))`.
pub fn set_a_bound(n: usize, q: u16, eps: Param) -> Result<SetBound> {
    check_alphabet(q)?;
    check_eps_q(q, eps)?;
    if n < 2 {
        return Err(Error::domain("need n >= 2"));
    }
    let threshold = set_a_threshold(n, q, eps);
    let e = param_f64(eps);
    let tail = mcdiarmid_tail(e * n as f64, &vec![2.0; n])?;
    let union = (n - 1) as f64;
    let failure = union * tail;
    let universe = power(q, n);
    let bound = SciValue::from_biguint(&universe).scale(1.0 - failure);
    Ok(SetBound {
        threshold: param_text(threshold),
        threshold_value: param_f64(threshold),
        universe: universe.to_string(),
        per_shift_tail: tail,
        union_factor: union,
        stirling_factor: 1.0,
        failure_mass: failure,
        bound,
        vacuous: !bound.is_positive(),
    })
}

/// `n(1 - 1/q - ε)` exactly.
pub fn set_a_threshold(n: usize, q: u16, eps: Param) -> Param {
    let q = i64::from(q);
    Ratio::from_integer(n as i64) * (Ratio::new(q - 1, q) - eps)
}

/// `(1 - ε) n p (1 - p)` exactly.
pub fn set_b_threshold(n: usize, p: Param, eps: Param) -> Param {
    (Ratio::one() - eps) * Ratio::from_integer(n as i64) * p * (Ratio::one() - p)
}

/// `pn` as an integer, or a domain error.
pub fn slice_weight(n: usize, p: Param) -> Result<usize> {
    if p <= Ratio::zero() || p >= Ratio::one() {
        return Err(Error::domain(format!("need 0 < p < 1, got {}", param_text(p))));
    }
    let w = p * Ratio::from_integer(n as i64);
    if !w.is_integer() {
        return Err(Error::domain(format!("pn = {} is not an integer", param_text(w))));
    }
    Ok(w.to_integer() as usize)
}

/// Bound on `|B|`, `B = {x of weight pn : d(x) > (1-ε) n p(1-p)}`:
/// `|B| >= C(n,pn) (1 - (n-1) e^{-(1+ε)² p²(1-p)² n/2} √(2πnp(1-p)) ℓ(n))`.
pub fn set_b_bound(n: usize, p: Param, eps: Param) -> Result<SetBound> {
    if n < 2 {
        return Err(Error::domain("need n >= 2"));
    }
    if eps <= Ratio::zero() {
        return Err(Error::domain(format!("need eps > 0, got {}", param_text(eps))));
    }
    let w = slice_weight(n, p)?;
    let threshold = set_b_threshold(n, p, eps);
    let (pf, ef) = (param_f64(p), param_f64(eps));
    let mu = n as f64 * pf * (1.0 - pf);
    let tail = mcdiarmid_tail((1.0 + ef) * mu, &vec![2.0; n])?;
    let union = (n - 1) as f64;
    let stirling = stirling_factor(n, pf);
    let failure = union * tail * stirling;
    let universe = binomial(n as u64, w as u64);
    let bound = SciValue::from_biguint(&universe).scale(1.0 - failure);
    Ok(SetBound {
        threshold: param_text(threshold),
        threshold_value: param_f64(threshold),
        universe: universe.to_string(),
        per_shift_tail: tail,
        union_factor: union,
        stirling_factor: stirling,
        failure_mass: failure,
        bound,
        vacuous: !bound.is_positive(),
    })
}

/// Parameters for [`bound_report`]. Rows whose inputs are missing are
/// reported as unavailable.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: usize,
    pub q: u16,
    pub d: Option<usize>,
    pub weight: Option<usize>,
    pub lambda: Option<usize>,
    pub kappa: Option<usize>,
    #[serde(with = "opt_param")]
    pub eps: Option<Param>,
    #[serde(with = "opt_param")]
    pub tau: Option<Param>,
    #[serde(with = "opt_param")]
    pub p: Option<Param>,
}

pub(crate) mod param_serde {
    use super::{param_text, parse_param, Param};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Param, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&param_text(*value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Param, D::Error> {
        let text = String::deserialize(d)?;
        parse_param(&text).map_err(serde::de::Error::custom)
    }
}

pub(crate) mod opt_param {
    use super::{param_text, parse_param, Param};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Option<Param>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(p) => s.serialize_str(&param_text(*p)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Param>, D::Error> {
        let text: Option<String> = Option::deserialize(d)?;
        text.map(|t| parse_param(&t).map_err(serde::de::Error::custom)).transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundValue {
    Exact { exact: String, approx: SciValue },
    Real { value: SciValue, vacuous: bool },
    /// A bound with an unspecified constant; `reference` is the expression
    /// evaluated with the constant set to 1.
    Symbolic { expression: String, reference: Option<SciValue> },
    Unavailable { reason: String },
}

impl BoundValue {
    fn exact(r: &BigRational) -> Self {
        BoundValue::Exact {
            exact: if r.is_integer() {
                r.numer().to_string()
            } else {
                format!("{}/{}", r.numer(), r.denom())
            },
            approx: SciValue::from_ratio(r),
        }
    }

    fn real(b: RealBound) -> Self {
        BoundValue::Real {
            value: b.value,
            vacuous: b.vacuous,
        }
    }

    fn render(&self) -> String {
        match self {
            BoundValue::Exact { exact, approx } => {
                if exact.contains('/') {
                    format!("{exact} (≈ {approx})")
                } else {
                    exact.clone()
                }
            }
            BoundValue::Real { value, vacuous } => {
                if *vacuous {
                    format!("{value} (vacuous)")
                } else {
                    value.to_string()
                }
            }
            BoundValue::Symbolic { expression, reference } => match reference {
                Some(r) => format!("{expression}; constant unspecified, value at c = 1: {r}"),
                None => format!("{expression}; constant unspecified"),
            },
            BoundValue::Unavailable { reason } => format!("n/a ({reason})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub key: String,
    pub family: String,
    pub value: BoundValue,
}

/// Evaluated bounds for one parameter set, mirroring the usual summary
/// table: prior GV-type bounds with explicit constants next to the improved
/// forms whose constants are not specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub params: BoundParams,
    pub rows: Vec<BoundRow>,
    /// `(i, tail)` per nontrivial shift for the set-A concentration step.
    pub mcdiarmid_terms: Vec<(usize, f64)>,
    pub independence_lb: Option<f64>,
}

impl BoundReport {
    pub fn row(&self, key: &str) -> Option<&BoundRow> {
        self.rows.iter().find(|r| r.key == key)
    }

    /// One `key = value` line per metric.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let _ = writeln!(out, "{} = {}", row.key, row.value.render());
        }
        if let Some(v) = self.independence_lb {
            let _ = writeln!(out, "independence_lb = {v}");
        }
        for (i, tail) in &self.mcdiarmid_terms {
            let _ = writeln!(out, "mcdiarmid_tail[{i}] = {tail:e}");
        }
        out
    }

    /// Aligned human-readable table.
    pub fn to_table(&self) -> String {
        let width = self.rows.iter().map(|r| r.family.len()).max().unwrap_or(0);
        let mut out = String::new();
        for row in &self.rows {
            let _ = writeln!(out, "{:<width$}  {}", row.family, row.value.render());
        }
        out
    }
}

fn unavailable(reason: impl Into<String>) -> BoundValue {
    BoundValue::Unavailable { reason: reason.into() }
}

fn from_result(result: Result<BoundValue>) -> Result<BoundValue> {
    match result {
        Ok(v) => Ok(v),
        Err(Error::DivisionDomain(msg)) => Ok(unavailable(format!("division-domain: {msg}"))),
        Err(e) => Err(e),
    }
}

/// Evaluates every bound the parameters allow.
pub fn bound_report(params: &BoundParams) -> Result<BoundReport> {
    let BoundParams { n, q, .. } = *params;
    check_alphabet(q)?;
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    let mut rows = Vec::new();
    let mut push = |key: &str, family: &str, value: BoundValue| {
        rows.push(BoundRow {
            key: key.into(),
            family: family.into(),
            value,
        })
    };

    if let Some(d) = params.d {
        let gv = gv_bound(n, q, d)?;
        let scaled = &gv * BigRational::from_integer(BigInt::from(n));
        push("gv", "generic codes, q^n/Vol_q(n,d-1)", BoundValue::exact(&gv));
        push(
            "gv_improved",
            "generic codes, improved",
            BoundValue::Symbolic {
                expression: "Omega(n q^n / Vol_q(n,d-1))".into(),
                reference: Some(SciValue::from_ratio(&scaled)),
            },
        );
        let nxy = match params.eps {
            Some(eps) => from_result(nxy_hcc_bound(n, q, d, eps).map(BoundValue::real))?,
            None => unavailable("requires eps"),
        };
        push("nxy_hcc", "cyclic codes, q^n(1-n^2 e^{-eps^2(sqrt n-2)/2})/(Vol-1)", nxy);
        push(
            "hcc_improved",
            "hopping cyclic codes, c n q^n/Vol_q(n,d-1)",
            BoundValue::Symbolic {
                expression: "c n q^n / Vol_q(n,d-1)".into(),
                reference: Some(SciValue::from_ratio(&scaled)),
            },
        );
        if let Some(w) = params.weight {
            if q != 2 {
                return Err(Error::Unsupported("constant-weight bounds require q = 2".into()));
            }
            let lev = levenshtein_bound(n, w, d)?;
            let scaled = &lev * BigRational::from_integer(BigInt::from(n));
            push("levenshtein", "constant weight codes, C(n,w)/Vol(n,d-1;w)", BoundValue::exact(&lev));
            push(
                "levenshtein_improved",
                "constant weight codes, improved",
                BoundValue::Symbolic {
                    expression: "Omega(n C(n,w) / Vol(n,d-1;w))".into(),
                    reference: Some(SciValue::from_ratio(&scaled)),
                },
            );
            push(
                "ooc_prior",
                "constant weight cyclic codes, prior",
                BoundValue::Symbolic {
                    expression: "(C(n,w) - f(n,w,d)) / (n Vol(n,d-1;w)), f not specified".into(),
                    reference: None,
                },
            );
            push(
                "ooc_improved",
                "optical orthogonal codes, c n C(n,w)/Vol(n,d-1;w)",
                BoundValue::Symbolic {
                    expression: "c n C(n,w) / Vol(n,d-1;w)".into(),
                    reference: Some(SciValue::from_ratio(&scaled)),
                },
            );
        }
    }
    if let Some(lambda) = params.lambda {
        let fhs = match params.eps {
            Some(eps) => from_result(fhs_nxy_bound(n, q, lambda, eps).map(BoundValue::real))?,
            None => unavailable("requires eps"),
        };
        push("fhs_nxy", "FHS sets, prior", fhs);
        if lambda < n {
            let vol = ball_volume(n, q, n - lambda - 1)?;
            let r = BigRational::new(big(&power(q, n)), big(&vol));
            push(
                "fhs_improved",
                "FHS sets, c q^n/Vol_q(n,n-lambda-1)",
                BoundValue::Symbolic {
                    expression: "c q^n / Vol_q(n,n-lambda-1)".into(),
                    reference: Some(SciValue::from_ratio(&r)),
                },
            );
        }
    }
    if let Some(kappa) = params.kappa {
        if kappa == 0 || kappa > n {
            return Err(Error::domain(format!("need 1 <= kappa <= n, got {kappa}")));
        }
        let vol = ball_volume(n, q, n - kappa)?;
        let r = BigRational::new(big(&power(q, n)), big(&vol));
        push(
            "wmuc_improved",
            "kappa-WMU codes, c q^n/Vol_q(n,n-kappa)",
            BoundValue::Symbolic {
                expression: "c q^n / Vol_q(n,n-kappa)".into(),
                reference: Some(SciValue::from_ratio(&r)),
            },
        );
    }
    let mut mcdiarmid_terms = Vec::new();
    if let Some(eps) = params.eps {
        if n >= 2 {
            let a = set_a_bound(n, q, eps)?;
            push(
                "set_a_lower",
                "|{x : d(x) > n(1-1/q-eps)}| lower bound",
                BoundValue::Real {
                    value: a.bound,
                    vacuous: a.vacuous,
                },
            );
            if n <= 64 {
                mcdiarmid_terms = (1..n).map(|i| (i, a.per_shift_tail)).collect();
            }
            if let Some(p) = params.p {
                let b = set_b_bound(n, p, eps)?;
                push(
                    "set_b_lower",
                    "|{x : wt = pn, d(x) > (1-eps)np(1-p)}| lower bound",
                    BoundValue::Real {
                        value: b.bound,
                        vacuous: b.vacuous,
                    },
                );
            }
        }
    }
    Ok(BoundReport {
        params: params.clone(),
        rows,
        mcdiarmid_terms,
        independence_lb: None,
    })
}
