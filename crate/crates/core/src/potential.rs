use serde::{Deserialize, Serialize};

use crate::error::{ItwError, Result};
use crate::units::Units;

/// Maximum polynomial degree accepted by `PotentialSpec::Polynomial`.
pub const MAX_POLY_DEGREE: usize = 6;

/// One-dimensional potential with closed-form value and first two derivatives.
///
/// `Linear { force }` is V(x) = -F x (uniform field F pushing toward +x);
/// `Harmonic { omega }` is V(x) = m ω² x² / 2 for the mass in `Units`;
/// `Polynomial { coefficients }` is V(x) = Σ c_k x^k, degree <= 6.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Free,
    Linear { force: f64 },
    Harmonic { omega: f64 },
    Polynomial { coefficients: Vec<f64> },
}

/// Value and derivatives of a potential at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValue {
    pub v: f64,
    pub dv: f64,
    pub d2v: f64,
}

impl PotentialSpec {
    /// Double-well helper V(x) = a x^4 - b x^2 (a, b > 0), used for multi-root scenarios.
    pub fn double_well(a: f64, b: f64) -> Self {
        PotentialSpec::Polynomial { coefficients: vec![0.0, 0.0, -b, 0.0, a] }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Free => Ok(()),
            PotentialSpec::Linear { force } => {
                if force.is_finite() {
                    Ok(())
                } else {
                    Err(ItwError::InvalidInput("linear force must be finite".into()))
                }
            }
            PotentialSpec::Harmonic { omega } => {
                if omega.is_finite() && *omega > 0.0 {
                    Ok(())
                } else {
                    Err(ItwError::InvalidInput(format!(
                        "harmonic omega must be finite and positive, got {omega}"
                    )))
                }
            }
            PotentialSpec::Polynomial { coefficients } => {
                if coefficients.len() > MAX_POLY_DEGREE + 1 {
                    return Err(ItwError::InvalidInput(format!(
                        "polynomial degree limited to {MAX_POLY_DEGREE}, got degree {}",
                        coefficients.len().saturating_sub(1)
                    )));
                }
                if coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(ItwError::InvalidInput("polynomial coefficients must be finite".into()));
                }
                Ok(())
            }
        }
    }

    /// V, V', V'' at x. Total over finite x for every variant.
    pub fn eval(&self, x: f64, units: &Units) -> PotentialValue {
        match self {
            PotentialSpec::Free => PotentialValue { v: 0.0, dv: 0.0, d2v: 0.0 },
            PotentialSpec::Linear { force } => PotentialValue {
                v: -force * x,
                dv: -force,
                d2v: 0.0,
            },
            PotentialSpec::Harmonic { omega } => {
                let k = units.mass * omega * omega;
                PotentialValue { v: 0.5 * k * x * x, dv: k * x, d2v: k }
            }
            PotentialSpec::Polynomial { coefficients } => {
                // Horner pass for V, V', V'' simultaneously.
                let (mut v, mut dv, mut d2v) = (0.0, 0.0, 0.0);
                for &c in coefficients.iter().rev() {
                    d2v = d2v * x + 2.0 * dv;
                    dv = dv * x + v;
                    v = v * x + c;
                }
                PotentialValue { v, dv, d2v }
            }
        }
    }

    /// Short human-readable tag used in messages and output metadata.
    pub fn label(&self) -> String {
        match self {
            PotentialSpec::Free => "free".into(),
            PotentialSpec::Linear { force } => format!("linear(force={force})"),
            PotentialSpec::Harmonic { omega } => format!("harmonic(omega={omega})"),
            PotentialSpec::Polynomial { coefficients } => format!("polynomial(degree={})", coefficients.len().saturating_sub(1)),
        }
    }
}

/// Compact text form used by command-line flags and the browser bindings:
/// `free | linear:f=V | harmonic:omega=V | poly:c0,c1,...`.
impl std::str::FromStr for PotentialSpec {
    type Err = ItwError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Err(ItwError::InvalidInput(msg));
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let parse_num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| ItwError::InvalidInput(format!("'{v}' is not a number in '{s}'")))
        };
        let spec = match (head, rest) {
            ("free", None) => PotentialSpec::Free,
            ("linear", Some(kv)) => match kv.split_once('=') {
                Some(("f", v)) => PotentialSpec::Linear { force: parse_num(v)? },
                _ => return bad(format!("expected linear:f=VALUE, got '{s}'")),
            },
            ("harmonic", Some(kv)) => match kv.split_once('=') {
                Some(("omega", v)) => PotentialSpec::Harmonic { omega: parse_num(v)? },
                _ => return bad(format!("expected harmonic:omega=VALUE, got '{s}'")),
            },
            ("poly", Some(list)) => PotentialSpec::Polynomial {
                coefficients: list.split(',').map(parse_num).collect::<Result<Vec<_>>>()?,
            },
            _ => {
                return bad(format!(
                    "unknown potential '{s}' (free | linear:f=V | harmonic:omega=V | poly:c0,c1,...)"
                ))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}
