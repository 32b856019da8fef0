//! Deterministic sequences indexed by sample size: tree depth `s_n`,
//! minimal node size `k_n` and bootstrap subsample size `m_n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{snapped_ceil, snapped_floor};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    /// `k_n = ceil(n^beta)`.
    PolyNodeSize { beta: f64 },
    /// `k_n = ceil(sqrt(n log(n)^beta))`.
    SqrtLogNodeSize { beta: f64 },
    /// `s_n = floor(log(n) / (1 + eps))`.
    LogDepth { eps: f64 },
    /// `s_n = ceil(log2(n^(1 - beta)))`.
    Log2PowerDepth { beta: f64 },
    /// `m_n = ceil(n^gamma)`.
    PolySubsample { gamma: f64 },
    /// The same value for every `n`.
    Fixed { value: usize },
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        let bad =
            |name: &'static str, v: f64, range: &str| Err(Error::param(name, format!("{v} outside {range}")));
        match *self {
            Schedule::PolyNodeSize { beta } if !(beta > 0.0 && beta <= 1.0) => bad("beta", beta, "(0, 1]"),
            Schedule::SqrtLogNodeSize { beta } if !(beta >= 0.0 && beta.is_finite()) => {
                bad("beta", beta, "[0, inf)")
            }
            Schedule::LogDepth { eps } if !(eps > 0.0 && eps.is_finite()) => bad("eps", eps, "(0, inf)"),
            Schedule::Log2PowerDepth { beta } if !(0.0..=1.0).contains(&beta) => bad("beta", beta, "[0, 1]"),
            Schedule::PolySubsample { gamma } if !(gamma > 0.0 && gamma <= 1.0) => {
                bad("gamma", gamma, "(0, 1]")
            }
            _ => Ok(()),
        }
    }

    /// Whether the schedule describes a tree depth.
    pub fn is_depth(&self) -> bool {
        matches!(
            self,
            Schedule::LogDepth { .. } | Schedule::Log2PowerDepth { .. } | Schedule::Fixed { .. }
        )
    }

    /// Whether the schedule describes a minimal node size.
    pub fn is_node_size(&self) -> bool {
        matches!(
            self,
            Schedule::PolyNodeSize { .. } | Schedule::SqrtLogNodeSize { .. } | Schedule::Fixed { .. }
        )
    }

    /// Whether the schedule describes a bootstrap trial count.
    pub fn is_subsample(&self) -> bool {
        matches!(self, Schedule::PolySubsample { .. } | Schedule::Fixed { .. })
    }

    /// The real-valued formula before rounding, used by the summability probes.
    pub fn raw(&self, n: f64) -> f64 {
        match *self {
            Schedule::PolyNodeSize { beta } => n.powf(beta),
            Schedule::SqrtLogNodeSize { beta } => (n * n.ln().powf(beta)).sqrt(),
            Schedule::LogDepth { eps } => n.ln() / (1.0 + eps),
            Schedule::Log2PowerDepth { beta } => (1.0 - beta) * n.log2(),
            Schedule::PolySubsample { gamma } => n.powf(gamma),
            Schedule::Fixed { value } => value as f64,
        }
    }

    /// Integer value at sample size `n`, rounded as the defining formula says.
    pub fn evaluate(&self, n: usize) -> Result<usize> {
        self.validate()?;
        if n < 2 {
            return Err(Error::param("n", format!("schedules need n >= 2, got {n}")));
        }
        let v = self.raw(n as f64);
        let rounded = match self {
            Schedule::LogDepth { .. } => snapped_floor(v),
            Schedule::Fixed { value } => return Ok(*value),
            _ => snapped_ceil(v),
        };
        Ok(rounded.max(0.0) as usize)
    }
}

/// Parses the compact command-line form, e.g. `poly:0.6`, `sqrtlog:2`,
/// `logdepth:0.1`, `log2power:0.667`, `subsample:0.6`, `fixed:5`.
impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| Error::param("schedule", format!("expected kind:value, got `{s}`")))?;
        let num: f64 = value
            .parse()
            .map_err(|_| Error::param("schedule", format!("bad number `{value}`")))?;
        let schedule = match kind {
            "poly" => Schedule::PolyNodeSize { beta: num },
            "sqrtlog" => Schedule::SqrtLogNodeSize { beta: num },
            "logdepth" => Schedule::LogDepth { eps: num },
            "log2power" => Schedule::Log2PowerDepth { beta: num },
            "subsample" => Schedule::PolySubsample { gamma: num },
            "fixed" if num >= 0.0 && num.fract() == 0.0 => Schedule::Fixed { value: num as usize },
            _ => return Err(Error::param("schedule", format!("unknown schedule `{s}`"))),
        };
        schedule.validate()?;
        Ok(schedule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_values() {
        assert_eq!(Schedule::PolyNodeSize { beta: 0.6 }.evaluate(1000).unwrap(), 64);
        assert_eq!(Schedule::LogDepth { eps: 0.1 }.evaluate(1000).unwrap(), 6);
        assert_eq!(
            Schedule::Log2PowerDepth { beta: 2.0 / 3.0 }
                .evaluate(4096)
                .unwrap(),
            4
        );
        assert_eq!(
            Schedule::Log2PowerDepth { beta: 2.0 / 3.0 }
                .evaluate(32768)
                .unwrap(),
            5
        );
        assert_eq!(
            Schedule::PolySubsample { gamma: 0.6 }.evaluate(5000).unwrap(),
            166
        );
        assert_eq!(Schedule::Fixed { value: 3 }.evaluate(10).unwrap(), 3);
        // sqrt(1000 * ln(1000)^2) = 1000^0.5 * 6.9077...
        assert_eq!(
            Schedule::SqrtLogNodeSize { beta: 2.0 }.evaluate(1000).unwrap(),
            219
        );
    }

    #[test]
    fn range_errors() {
        assert!(Schedule::PolyNodeSize { beta: 1.5 }.evaluate(10).is_err());
        assert!(Schedule::LogDepth { eps: -0.5 }.evaluate(10).is_err());
        assert!(Schedule::PolyNodeSize { beta: 0.5 }.evaluate(1).is_err());
    }

    #[test]
    fn parse_cli_form() {
        assert_eq!(
            "poly:0.6".parse::<Schedule>().unwrap(),
            Schedule::PolyNodeSize { beta: 0.6 }
        );
        assert_eq!(
            "sqrtlog:2.0".parse::<Schedule>().unwrap(),
            Schedule::SqrtLogNodeSize { beta: 2.0 }
        );
        assert!("poly".parse::<Schedule>().is_err());
        assert!("poly:-1".parse::<Schedule>().is_err());
        assert!("nope:1".parse::<Schedule>().is_err());
    }
}
