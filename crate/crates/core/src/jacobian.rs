//! The μ-marginal jacobians of the diagonal sector.
//!
//! Both closed forms have a removable singularity at μ = 1, where their
//! numerators and denominators vanish to order 9 (real) and 15 (complex).
//! Evaluated naively in double precision they lose every significant digit
//! well before μ reaches 1, so the evaluator uses extended precision for the
//! closed form and an exact Taylor series about μ = 1 above the switch point.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Case;
use crate::quadrature::{self, Tolerance};
use crate::series::PowerSeries;

pub const DEFAULT_SWITCH_POINT: f64 = 0.95;
pub const DEFAULT_SERIES_DEGREE: usize = 100;
pub const MIN_SERIES_DEGREE: usize = 20;

// Real: μ⁴ (12 P(μ) log μ − 5 Q(μ)) / (1890 (μ² − 1)⁹)
const REAL_P: [i64; 9] = [1, 0, 16, 0, 36, 0, 16, 0, 1];
const REAL_Q: [i64; 9] = [-5, 0, -32, 0, 0, 0, 32, 0, 5];
const REAL_DENOM: i64 = 1890;
const REAL_ORDER: usize = 9;

// Complex: −μ⁷ (R(μ) − 140 S(μ) log μ) / (1801800 (μ² − 1)¹⁵)
const COMPLEX_R: [i64; 15] = [
    -363, 0, -9947, 0, -48363, 0, -42875, 0, 42875, 0, 48363, 0, 9947, 0, 363,
];
const COMPLEX_S: [i64; 15] = [1, 0, 49, 0, 441, 0, 1225, 0, 1225, 0, 441, 0, 49, 0, 1];
const COMPLEX_DENOM: i64 = 1_801_800;
const COMPLEX_ORDER: usize = 15;

/// Order of the zero of numerator and denominator at μ = 1.
pub fn singularity_order(case: Case) -> usize {
    match case {
        Case::Real => REAL_ORDER,
        Case::Complex => COMPLEX_ORDER,
    }
}

/// `∫₀¹ jac(μ) dμ`, known in closed form.
pub fn exact_integral(case: Case) -> f64 {
    match case {
        Case::Real => std::f64::consts::PI.powi(2) / 2_293_760.0,
        Case::Complex => 1.0 / 2_018_016_000.0,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JacobianMode {
    /// Extended-precision closed form below the switch point, series above it.
    #[default]
    Stable,
    /// Double-precision closed form everywhere; exhibits cancellation noise near μ = 1.
    NaiveDiagnostic,
}

impl JacobianMode {
    pub fn as_str(self) -> &'static str {
        match self {
            JacobianMode::Stable => "stable",
            JacobianMode::NaiveDiagnostic => "naive-diagnostic",
        }
    }
}

impl fmt::Display for JacobianMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for JacobianMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stable" => Ok(JacobianMode::Stable),
            "naive-diagnostic" | "naive" => Ok(JacobianMode::NaiveDiagnostic),
            other => Err(Error::Usage(format!("unknown jacobian mode `{other}`"))),
        }
    }
}

fn poly_f64(coeffs: &[i64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64)
}

/// The closed form evaluated directly in double precision.
pub fn naive_closed_form(case: Case, mu: f64) -> f64 {
    let l = mu.ln();
    let m2 = mu * mu;
    match case {
        Case::Real => {
            let num = 12.0 * poly_f64(&REAL_P, mu) * l - 5.0 * poly_f64(&REAL_Q, mu);
            mu.powi(4) * num / (REAL_DENOM as f64 * (m2 - 1.0).powi(9))
        }
        Case::Complex => {
            let v = poly_f64(&COMPLEX_R, mu) - 140.0 * poly_f64(&COMPLEX_S, mu) * l;
            -mu.powi(7) * v / (COMPLEX_DENOM as f64 * (m2 - 1.0).powi(15))
        }
    }
}

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: std::cell::RefCell<Consts> =
        std::cell::RefCell::new(Consts::new().expect("astro-float constant cache"));
}

fn big_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    match x.as_raw_parts() {
        Some((words, _, sign, exp, _)) => {
            let top = words[words.len() - 1];
            let next = if words.len() > 1 { words[words.len() - 2] } else { 0 };
            let mantissa = top as f64 + next as f64 / 18_446_744_073_709_551_616.0;
            let magnitude = mantissa * 2f64.powi(exp - 64);
            match sign {
                Sign::Pos => magnitude,
                Sign::Neg => -magnitude,
            }
        }
        None => f64::NAN,
    }
}

fn poly_big(coeffs: &[i64], x: &BigFloat, p: usize) -> BigFloat {
    coeffs.iter().rev().fold(BigFloat::from_i64(0, p), |acc, &c| {
        acc.mul(x, p, RM).add(&BigFloat::from_i64(c, p), p, RM)
    })
}

/// Working precision for the closed form: the numerator cancels roughly
/// `order · log2(1/|1 − μ|)` bits, plus a margin.
fn working_precision(mu: f64) -> usize {
    let gap = (1.0 - mu).abs().max(1e-300);
    let lost = 20.0 * (-gap.log2()).max(0.0);
    let bits = 128 + lost.ceil() as usize;
    bits.min(8192).div_ceil(64) * 64
}

/// The closed form evaluated in extended precision and rounded to f64.
///
/// Requires `0 < mu < 1`; at μ = 1 the expression is 0/0.
pub fn closed_form(case: Case, mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Domain(format!(
            "closed-form jacobian needs 0 < mu < 1, got {mu}"
        )));
    }
    let p = working_precision(mu);
    let x = BigFloat::from_f64(mu, p);
    let l = CONSTS.with(|cc| x.ln(p, RM, &mut cc.borrow_mut()));
    let one = BigFloat::from_i64(1, p);
    let gap = x.mul(&x, p, RM).sub(&one, p, RM);
    let value = match case {
        Case::Real => {
            let a = poly_big(&REAL_P, &x, p)
                .mul(&l, p, RM)
                .mul(&BigFloat::from_i64(12, p), p, RM);
            let b = poly_big(&REAL_Q, &x, p).mul(&BigFloat::from_i64(5, p), p, RM);
            let num = x.powi(4, p, RM).mul(&a.sub(&b, p, RM), p, RM);
            let den = gap
                .powi(REAL_ORDER, p, RM)
                .mul(&BigFloat::from_i64(REAL_DENOM, p), p, RM);
            num.div(&den, p, RM)
        }
        Case::Complex => {
            let s = poly_big(&COMPLEX_S, &x, p)
                .mul(&l, p, RM)
                .mul(&BigFloat::from_i64(140, p), p, RM);
            let v = poly_big(&COMPLEX_R, &x, p).sub(&s, p, RM);
            let num = x.powi(7, p, RM).mul(&v, p, RM).neg();
            let den = gap
                .powi(COMPLEX_ORDER, p, RM)
                .mul(&BigFloat::from_i64(COMPLEX_DENOM, p), p, RM);
            num.div(&den, p, RM)
        }
    };
    let out = big_to_f64(&value);
    if out.is_finite() {
        Ok(out)
    } else {
        Err(Error::Numerical(format!(
            "closed-form jacobian is not finite at mu = {mu}"
        )))
    }
}

fn int_series(coeffs: &[i64], order: usize) -> PowerSeries {
    PowerSeries::from_integers(coeffs, order)
}

/// Numerator of the closed form as a series in `t = μ − 1`, with the
/// constant denominator factor left out. Its first `singularity_order`
/// coefficients vanish exactly.
pub fn numerator_series(case: Case, order: usize) -> PowerSeries {
    let log = PowerSeries::log1p(order);
    match case {
        Case::Real => {
            let p = PowerSeries::shifted_polynomial(&REAL_P, order);
            let q = PowerSeries::shifted_polynomial(&REAL_Q, order);
            let inner = &(&(&p * &log) * &int_series(&[12], order)) - &(&q * &int_series(&[5], order));
            &PowerSeries::shifted_polynomial(&[0, 0, 0, 0, 1], order) * &inner
        }
        Case::Complex => {
            let r = PowerSeries::shifted_polynomial(&COMPLEX_R, order);
            let s = PowerSeries::shifted_polynomial(&COMPLEX_S, order);
            let v = &r - &(&(&s * &log) * &int_series(&[140], order));
            let mu7 = PowerSeries::shifted_polynomial(&[0, 0, 0, 0, 0, 0, 0, 1], order);
            -&(&mu7 * &v)
        }
    }
}

fn compute_series(case: Case, degree: usize) -> Result<PowerSeries> {
    let m = singularity_order(case);
    let terms = degree + 1;
    // μ² − 1 = t (t + 2), so the denominator is c · t^m · (t + 2)^m.
    let num = numerator_series(case, terms + m).divide_by_t_power(m)?;
    let c = match case {
        Case::Real => REAL_DENOM,
        Case::Complex => COMPLEX_DENOM,
    };
    let base = int_series(&[2, 1], terms);
    let mut den = int_series(&[c], terms);
    for _ in 0..m {
        den = &den * &base;
    }
    num.div(&den)
}

type SeriesCache = Mutex<HashMap<(Case, usize), Arc<PowerSeries>>>;

fn series_cache() -> &'static SeriesCache {
    static CACHE: OnceLock<SeriesCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Exact Taylor coefficients `c_0 .. c_degree` of the jacobian in `t = μ − 1`.
pub fn series_about_one(case: Case, degree: usize) -> Result<Arc<PowerSeries>> {
    if degree < MIN_SERIES_DEGREE {
        return Err(Error::Usage(format!(
            "series degree must be at least {MIN_SERIES_DEGREE}, got {degree}"
        )));
    }
    if let Some(s) = series_cache().lock().expect("series cache").get(&(case, degree)) {
        return Ok(Arc::clone(s));
    }
    let s = Arc::new(compute_series(case, degree)?);
    series_cache()
        .lock()
        .expect("series cache")
        .insert((case, degree), Arc::clone(&s));
    Ok(s)
}

/// Immutable piecewise evaluator; cheap to clone and safe to share across threads.
#[derive(Clone, Debug)]
pub struct JacobianEvaluator {
    case: Case,
    switch_point: f64,
    series_degree: usize,
    mode: JacobianMode,
    series: Arc<PowerSeries>,
    coeffs: Arc<Vec<f64>>,
}

impl JacobianEvaluator {
    pub fn new(case: Case) -> Result<Self> {
        Self::with_params(case, DEFAULT_SWITCH_POINT, DEFAULT_SERIES_DEGREE)
    }

    pub fn with_params(case: Case, switch_point: f64, series_degree: usize) -> Result<Self> {
        if !(switch_point > 0.0 && switch_point < 1.0) {
            return Err(Error::Usage(format!(
                "switch point must lie in (0, 1), got {switch_point}"
            )));
        }
        let series = series_about_one(case, series_degree)?;
        let coeffs = Arc::new(series.to_f64());
        Ok(Self {
            case,
            switch_point,
            series_degree,
            mode: JacobianMode::Stable,
            series,
            coeffs,
        })
    }

    pub fn with_mode(mut self, mode: JacobianMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn case(&self) -> Case {
        self.case
    }

    pub fn switch_point(&self) -> f64 {
        self.switch_point
    }

    pub fn series_degree(&self) -> usize {
        self.series_degree
    }

    pub fn mode(&self) -> JacobianMode {
        self.mode
    }

    pub fn series(&self) -> &PowerSeries {
        &self.series
    }

    /// The truncated series evaluated in double precision.
    pub fn series_value(&self, mu: f64) -> f64 {
        let t = mu - 1.0;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// The truncated series evaluated exactly at a rational `μ = num/den`.
    pub fn series_value_exact(&self, num: i64, den: i64) -> BigRational {
        let t = BigRational::new(BigInt::from(num - den), BigInt::from(den));
        self.series.eval(&t)
    }

    pub fn eval(&self, mu: f64) -> Result<f64> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::Domain(format!(
                "jacobian is defined on (0, 1], got mu = {mu}; fold with f(mu) = f(1/mu)"
            )));
        }
        match self.mode {
            JacobianMode::NaiveDiagnostic => Ok(naive_closed_form(self.case, mu)),
            JacobianMode::Stable if mu > self.switch_point => Ok(self.series_value(mu)),
            JacobianMode::Stable => closed_form(self.case, mu),
        }
    }

    /// `∫_a^b jac(μ) dμ` for `0 ≤ a ≤ b ≤ 1`, split at the switch point.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
            return Err(Error::Domain(format!(
                "integration limits must satisfy 0 <= a <= b <= 1, got [{a}, {b}]"
            )));
        }
        let f = |mu: f64| self.eval(mu);
        let s = self.switch_point.clamp(a, b);
        let tol = Tolerance::default();
        let low = quadrature::integrate(f, a, s, tol)?.value;
        let high = quadrature::integrate(f, s, b, tol)?.value;
        Ok(low + high)
    }

    /// `(μ, jac(μ))` rows for a plotting grid.
    pub fn table(&self, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        grid.iter().map(|&mu| Ok((mu, self.eval(mu)?))).collect()
    }
}

/// `∫₀¹ jac(μ) dμ` by adaptive quadrature of the stable evaluator.
pub fn integral_check(case: Case) -> Result<f64> {
    JacobianEvaluator::new(case)?.integral(0.0, 1.0)
}
