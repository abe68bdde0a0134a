use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::{FioError, Result};

/// Lebesgue-type exponent stored by its reciprocal, so `∞` is simply `0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent {
    recip: f64,
}

impl Exponent {
    pub const INFINITY: Exponent = Exponent { recip: 0.0 };

    /// Any positive exponent, including `f64::INFINITY`.
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p <= 0.0 {
            return Err(FioError::invalid(format!("exponent must be positive, got {p}")));
        }
        Ok(Exponent { recip: 1.0 / p })
    }

    pub fn from_recip(recip: f64) -> Result<Self> {
        if !(recip.is_finite() && recip >= 0.0) {
            return Err(FioError::invalid(format!("reciprocal exponent must be finite and >= 0, got {recip}")));
        }
        Ok(Exponent { recip })
    }

    /// Exponent in `[1, ∞]`, the range of every theorem's hypotheses.
    pub fn lebesgue(p: f64) -> Result<Self> {
        let e = Exponent::new(p)?;
        e.require_at_least_one()?;
        Ok(e)
    }

    pub fn require_at_least_one(self) -> Result<Self> {
        if self.recip > 1.0 + 1e-15 {
            return Err(FioError::invalid(format!(
                "exponent {} is below 1",
                self.value()
            )));
        }
        Ok(self)
    }

    pub fn recip(self) -> f64 {
        self.recip
    }

    pub fn value(self) -> f64 {
        if self.recip == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.recip
        }
    }

    pub fn is_infinite(self) -> bool {
        self.recip == 0.0
    }

    /// Hölder conjugate `p'` with `1/p + 1/p' = 1` (requires `p ≥ 1`).
    pub fn conjugate(self) -> Exponent {
        Exponent {
            recip: (1.0 - self.recip).max(0.0),
        }
    }

    /// `1/r = Σ 1/p_j`.
    pub fn holder(parts: &[Exponent]) -> Exponent {
        Exponent {
            recip: parts.iter().map(|e| e.recip).sum(),
        }
    }

    pub fn min(self, other: Exponent) -> Exponent {
        if self.recip >= other.recip {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Exponent) -> Exponent {
        if self.recip <= other.recip {
            self
        } else {
            other
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.value())
        }
    }
}

impl FromStr for Exponent {
    type Err = FioError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::INFINITY),
            _ => {
                if let Some((a, b)) = t.split_once('/') {
                    let num: f64 = a.trim().parse().map_err(|_| FioError::invalid(format!("bad exponent `{s}`")))?;
                    let den: f64 = b.trim().parse().map_err(|_| FioError::invalid(format!("bad exponent `{s}`")))?;
                    return Exponent::new(num / den);
                }
                let v: f64 = t
                    .parse()
                    .map_err(|_| FioError::invalid(format!("bad exponent `{s}`")))?;
                Exponent::new(v)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.value())
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Exponent::new(v).map_err(de::Error::custom),
            Raw::Text(t) => t.parse().map_err(de::Error::custom),
        }
    }
}
