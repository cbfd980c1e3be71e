//! Arbitrary-precision helpers for determinants whose magnitude falls far below
//! double-precision resolution (kernel minors near the flat limit).

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

use crate::linalg::LogDet;

const RM: RoundingMode = RoundingMode::ToEven;

pub(crate) struct Hp {
    pub prec: usize,
    consts: Consts,
}

impl Hp {
    pub fn new(prec: usize) -> Self {
        Hp {
            prec,
            consts: Consts::new().expect("astro-float constant cache"),
        }
    }

    pub fn num(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.prec)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.prec, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.prec, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.prec, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.prec, RM)
    }

    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.prec, RM)
    }

    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.prec, RM, &mut self.consts)
    }

    pub fn sin(&mut self, a: &BigFloat) -> BigFloat {
        a.sin(self.prec, RM, &mut self.consts)
    }

    pub fn pi(&mut self) -> BigFloat {
        self.consts.pi(self.prec, RM)
    }

    /// Sign and natural log of |x|, rounded to double precision.
    pub fn to_log(&self, x: &BigFloat) -> LogDet {
        if x.is_zero() {
            return LogDet::ZERO;
        }
        let (words, _, sign, exponent, _) = x
            .as_raw_parts()
            .expect("finite high-precision value");
        let top = *words.last().expect("nonzero mantissa") as f64 / 2f64.powi(64);
        let log_abs = top.ln() + f64::from(exponent) * std::f64::consts::LN_2;
        let s = if sign == Sign::Neg { -1 } else { 1 };
        LogDet::new(s, log_abs)
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self, mut a: Vec<Vec<BigFloat>>) -> BigFloat {
        let n = a.len();
        let mut det = self.num(1.0);
        for col in 0..n {
            let mut piv = col;
            for row in (col + 1)..n {
                if a[row][col].abs_cmp(&a[piv][col]).unwrap_or(0) > 0 {
                    piv = row;
                }
            }
            if a[piv][col].is_zero() {
                return self.num(0.0);
            }
            if piv != col {
                a.swap(piv, col);
                det = det.neg();
            }
            det = self.mul(&det, &a[col][col]);
            for row in (col + 1)..n {
                let factor = self.div(&a[row][col], &a[col][col]);
                if factor.is_zero() {
                    continue;
                }
                for k in (col + 1)..n {
                    let t = self.mul(&factor, &a[col][k]);
                    a[row][k] = self.sub(&a[row][k], &t);
                }
            }
        }
        det
    }
}
