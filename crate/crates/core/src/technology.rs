//! Success-probability curves.
//!
//! Every family is strictly increasing, strictly concave, starts at
//! `p(0) = 0`, stays below one and has an infinite slope at zero. Values and
//! slopes are closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn unit_scale() -> f64 {
    1.0
}

/// A technology `p` mapping an investment `x >= 0` to the probability of
/// honoring the agreement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum Technology {
    /// `p(x) = s / (1 + s)` with `s = sqrt(x / scale)`.
    #[serde(rename = "sqrt")]
    SqrtSaturating {
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    /// `p(x) = ceiling * (1 - exp(-(x / rate)^exponent))`.
    #[serde(rename = "powerexp")]
    PowerExponential { ceiling: f64, rate: f64, exponent: f64 },
    /// A curve that is almost linear up to `kink` and saturates sharply
    /// afterwards.
    ///
    /// On `[0, kink]` it is `a*sqrt(x) + c*x`, where `a` and `c` are fixed by
    /// `p(kink) = level` and `p'(kink) = slope`. Past the kink it continues as
    /// `level + tail * (1 - exp(-slope * (x - kink) / tail))`, so the slope
    /// is continuous and the supremum is `level + tail`.
    #[serde(rename = "kinked")]
    Kinked {
        kink: f64,
        level: f64,
        slope: f64,
        tail: f64,
    },
}

impl Technology {
    pub fn sqrt(scale: f64) -> Result<Self> {
        let t = Technology::SqrtSaturating { scale };
        t.validate()?;
        Ok(t)
    }

    pub fn power_exponential(ceiling: f64, rate: f64, exponent: f64) -> Result<Self> {
        let t = Technology::PowerExponential {
            ceiling,
            rate,
            exponent,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn kinked(kink: f64, level: f64, slope: f64, tail: f64) -> Result<Self> {
        let t = Technology::Kinked {
            kink,
            level,
            slope,
            tail,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Technology::SqrtSaturating { .. } => "sqrt",
            Technology::PowerExponential { .. } => "powerexp",
            Technology::Kinked { .. } => "kinked",
        }
    }

    /// Checks the family's parameter constraints.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            Technology::SqrtSaturating { scale } => {
                if !(scale.is_finite() && scale > 0.0) {
                    return bad(format!("scale c must be positive, got {scale}"));
                }
            }
            Technology::PowerExponential {
                ceiling,
                rate,
                exponent,
            } => {
                if !(ceiling > 0.0 && ceiling < 1.0) {
                    return bad(format!("ceiling A outside (0,1), got {ceiling}"));
                }
                if !(rate.is_finite() && rate > 0.0) {
                    return bad(format!("rate must be positive, got {rate}"));
                }
                if !(exponent > 0.0 && exponent < 1.0) {
                    return bad(format!("exponent b outside (0,1), got {exponent}"));
                }
            }
            Technology::Kinked {
                kink,
                level,
                slope,
                tail,
            } => {
                if !(kink.is_finite() && kink > 0.0) {
                    return bad(format!("kink must be positive, got {kink}"));
                }
                if !(level > 0.0 && level < 1.0) {
                    return bad(format!("level outside (0,1), got {level}"));
                }
                // p(kink) > kink * p'(kink) is what strict concavity through
                // the origin demands.
                if !(slope > 0.0 && slope * kink < level) {
                    return bad(format!(
                        "slope must lie in (0, level/kink) = (0, {}), got {slope}",
                        level / kink
                    ));
                }
                if !(tail > 0.0 && level + tail < 1.0) {
                    return bad(format!(
                        "tail must lie in (0, 1 - level) = (0, {}), got {tail}",
                        1.0 - level
                    ));
                }
            }
        }
        Ok(())
    }

    /// `p(x)`; checked version of [`Technology::value`].
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("investment must be nonnegative, got {x}")));
        }
        Ok(self.value(x))
    }

    /// `p'(x)`; checked version of [`Technology::slope`]. The slope diverges
    /// at zero, so `x = 0` is a domain error.
    pub fn deriv(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if !(x > 0.0) {
            return Err(Error::Domain(format!(
                "derivative requires a positive investment, got {x}"
            )));
        }
        Ok(self.slope(x))
    }

    /// Success probability. Callers guarantee valid parameters and `x >= 0`.
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Technology::SqrtSaturating { scale } => {
                let s = (x / scale).sqrt();
                s / (1.0 + s)
            }
            Technology::PowerExponential {
                ceiling,
                rate,
                exponent,
            } => {
                let u = (x / rate).powf(exponent);
                -ceiling * (-u).exp_m1()
            }
            Technology::Kinked {
                kink,
                level,
                slope,
                tail,
            } => {
                if x <= kink {
                    let (a, c) = kinked_head(kink, level, slope);
                    a * x.sqrt() + c * x
                } else {
                    level - tail * (-slope * (x - kink) / tail).exp_m1()
                }
            }
        }
    }

    /// Slope `p'(x)`; `+inf` at zero.
    pub fn slope(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::INFINITY;
        }
        match *self {
            Technology::SqrtSaturating { scale } => {
                let s = (x / scale).sqrt();
                let t = 1.0 + s;
                1.0 / (2.0 * scale * s * t * t)
            }
            Technology::PowerExponential {
                ceiling,
                rate,
                exponent,
            } => {
                let u = (x / rate).powf(exponent);
                ceiling * exponent * u * (-u).exp() / x
            }
            Technology::Kinked {
                kink,
                level,
                slope,
                tail,
            } => {
                if x <= kink {
                    let (a, c) = kinked_head(kink, level, slope);
                    a / (2.0 * x.sqrt()) + c
                } else {
                    slope * (-slope * (x - kink) / tail).exp()
                }
            }
        }
    }

    /// `p'(x) / p(x)` evaluated jointly so that no `0/0` appears for small
    /// positive `x`.
    pub fn slope_ratio(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::INFINITY;
        }
        match *self {
            Technology::SqrtSaturating { scale } => {
                let s = (x / scale).sqrt();
                1.0 / (2.0 * x * (1.0 + s))
            }
            Technology::PowerExponential { rate, exponent, .. } => {
                let u = (x / rate).powf(exponent);
                exponent * u / (x * u.exp_m1())
            }
            Technology::Kinked { kink, level, slope, .. } if x <= kink => {
                let (a, c) = kinked_head(kink, level, slope);
                let r = x.sqrt();
                (a / (2.0 * r) + c) / (r * (a + c * r))
            }
            Technology::Kinked { .. } => self.slope(x) / self.value(x),
        }
    }

    /// Least upper bound of `p` over the nonnegative reals.
    pub fn supremum(&self) -> f64 {
        match *self {
            Technology::SqrtSaturating { .. } => 1.0,
            Technology::PowerExponential { ceiling, .. } => ceiling,
            Technology::Kinked { level, tail, .. } => level + tail,
        }
    }
}

/// Coefficients `(a, c)` of the `a*sqrt(x) + c*x` head of a kinked curve.
fn kinked_head(kink: f64, level: f64, slope: f64) -> (f64, f64) {
    let a = 2.0 * (level - slope * kink) / kink.sqrt();
    let c = (2.0 * slope * kink - level) / kink;
    (a, c)
}
