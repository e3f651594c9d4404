//! Truncated power series with exact rational coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `Σ_{k < order} c_k t^k`, with all terms of degree `>= order` discarded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl PowerSeries {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![BigRational::zero(); order],
        }
    }

    pub fn from_coeffs(mut coeffs: Vec<BigRational>, order: usize) -> Self {
        coeffs.resize(order, BigRational::zero());
        Self { coeffs }
    }

    pub fn from_integers(coeffs: &[i64], order: usize) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| rat(c)).collect(), order)
    }

    /// The polynomial `p(1 + t)`, with `p` given by integer coefficients in increasing degree.
    pub fn shifted_polynomial(p: &[i64], order: usize) -> Self {
        let mut out = vec![BigInt::zero(); p.len().max(1)];
        // binomial expansion of (1 + t)^k
        let mut row = vec![BigInt::one()];
        for (k, &c) in p.iter().enumerate() {
            if k > 0 {
                let mut next = vec![BigInt::one(); k + 1];
                for j in 1..k {
                    next[j] = &row[j - 1] + &row[j];
                }
                row = next;
            }
            for (j, b) in row.iter().enumerate() {
                out[j] += b * c;
            }
        }
        Self::from_coeffs(out.into_iter().map(BigRational::from_integer).collect(), order)
    }

    /// `log(1 + t) = Σ_{k>=1} (-1)^(k+1) t^k / k`.
    pub fn log1p(order: usize) -> Self {
        let coeffs = (0..order)
            .map(|k| {
                if k == 0 {
                    BigRational::zero()
                } else {
                    let sign = if k % 2 == 1 { 1 } else { -1 };
                    BigRational::new(BigInt::from(sign), BigInt::from(k))
                }
            })
            .collect();
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, k: usize) -> &BigRational {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Index of the first nonzero coefficient, or `None` for the zero series.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Divides by `t^m`, requiring the first `m` coefficients to vanish exactly.
    ///
    /// The result has `order - m` terms.
    pub fn divide_by_t_power(&self, m: usize) -> Result<Self> {
        if m > self.order() {
            return Err(Error::Usage(format!(
                "cannot remove t^{m} from a series of order {}",
                self.order()
            )));
        }
        if let Some(k) = self.coeffs[..m].iter().position(|c| !c.is_zero()) {
            return Err(Error::Internal(format!(
                "series division leaves a nonzero remainder at order {k}: {}",
                self.coeffs[k]
            )));
        }
        Ok(Self {
            coeffs: self.coeffs[m..].to_vec(),
        })
    }

    /// Series quotient `self / divisor`; the divisor needs a nonzero constant term.
    pub fn div(&self, divisor: &Self) -> Result<Self> {
        let d0 = divisor
            .coeffs
            .first()
            .filter(|c| !c.is_zero())
            .ok_or_else(|| Error::Usage("series divisor has zero constant term".into()))?;
        let n = self.order().min(divisor.order());
        let inv_d0 = d0.recip();
        let mut q: Vec<BigRational> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.coeffs[k].clone();
            for j in 1..=k {
                let dj = &divisor.coeffs[j];
                if !dj.is_zero() {
                    acc -= dj * &q[k - j];
                }
            }
            q.push(acc * &inv_d0);
        }
        Ok(Self { coeffs: q })
    }

    /// Exact value of the truncated sum at a rational point.
    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * t + c)
    }

    /// Coefficients rounded to the nearest f64.
    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// Largest |c_k| as f64, useful for bounding truncation error.
    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

impl Add for &PowerSeries {
    type Output = PowerSeries;

    fn add(self, rhs: Self) -> PowerSeries {
        let n = self.order().min(rhs.order());
        PowerSeries {
            coeffs: (0..n).map(|k| &self.coeffs[k] + &rhs.coeffs[k]).collect(),
        }
    }
}

impl Sub for &PowerSeries {
    type Output = PowerSeries;

    fn sub(self, rhs: Self) -> PowerSeries {
        let n = self.order().min(rhs.order());
        PowerSeries {
            coeffs: (0..n).map(|k| &self.coeffs[k] - &rhs.coeffs[k]).collect(),
        }
    }
}

impl Neg for &PowerSeries {
    type Output = PowerSeries;

    fn neg(self) -> PowerSeries {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &PowerSeries {
    type Output = PowerSeries;

    fn mul(self, rhs: Self) -> PowerSeries {
        let n = self.order().min(rhs.order());
        let mut out = vec![BigRational::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(n - i) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        PowerSeries { coeffs: out }
    }
}
