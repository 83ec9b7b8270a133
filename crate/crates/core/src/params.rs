use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Matérn parameters `(ν, φ, α)`: regularity, amplitude and inverse range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaternParams {
    pub nu: f64,
    pub phi: f64,
    pub alpha: f64,
}

impl MaternParams {
    pub fn new(nu: f64, phi: f64, alpha: f64) -> Result<Self> {
        for (name, v) in [("nu", nu), ("phi", phi), ("alpha", alpha)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain("MaternParams", format!("{name} = {v} must be positive and finite")));
            }
        }
        Ok(Self { nu, phi, alpha })
    }
}

/// A closed interval `[lo, hi]`, possibly degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidBox(format!("[{lo}, {hi}] must satisfy 0 < lo <= hi < inf")));
        }
        Ok(Self { lo, hi })
    }

    pub fn singleton(v: f64) -> Result<Self> {
        Self::new(v, v)
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }

    /// `count` equally spaced points, or the single value of a singleton.
    pub fn grid(&self, count: usize) -> Vec<f64> {
        if self.is_singleton() || count <= 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (count - 1) as f64;
        (0..count).map(|i| if i + 1 == count { self.hi } else { self.lo + step * i as f64 }).collect()
    }
}

/// Admissible amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PhiRange {
    Unbounded,
    Fixed { value: f64 },
    Bounded { lo: f64, hi: f64 },
}

impl PhiRange {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PhiRange::Unbounded => Ok(()),
            PhiRange::Fixed { value } => Interval::singleton(value).map(|_| ()),
            PhiRange::Bounded { lo, hi } => Interval::new(lo, hi).map(|_| ()),
        }
    }

    /// Project the unconstrained minimizer onto the range.
    pub fn project(&self, phi: f64) -> f64 {
        match *self {
            PhiRange::Unbounded => phi,
            PhiRange::Fixed { value } => value,
            PhiRange::Bounded { lo, hi } => phi.clamp(lo, hi),
        }
    }
}

impl std::fmt::Display for PhiRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhiRange::Unbounded => write!(f, "free"),
            PhiRange::Fixed { value } => write!(f, "fixed:{value}"),
            PhiRange::Bounded { lo, hi } => write!(f, "box:{lo},{hi}"),
        }
    }
}

impl std::str::FromStr for PhiRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid phi mode '{s}': expected free, fixed:<v> or box:<lo>,<hi>"));
        let range = if s == "free" {
            PhiRange::Unbounded
        } else if let Some(v) = s.strip_prefix("fixed:") {
            PhiRange::Fixed { value: v.parse().map_err(|_| bad())? }
        } else if let Some(rest) = s.strip_prefix("box:") {
            let (lo, hi) = rest.split_once(',').ok_or_else(bad)?;
            PhiRange::Bounded { lo: lo.trim().parse().map_err(|_| bad())?, hi: hi.trim().parse().map_err(|_| bad())? }
        } else {
            return Err(bad());
        };
        range.validate()?;
        Ok(range)
    }
}

/// `N × F × A`: the search box of the maximum-likelihood fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub nu_range: Interval,
    pub alpha_range: Interval,
    pub phi_range: PhiRange,
}

impl ParamBox {
    pub fn new(nu_range: Interval, alpha_range: Interval, phi_range: PhiRange) -> Result<Self> {
        phi_range.validate()?;
        Ok(Self { nu_range, alpha_range, phi_range })
    }

    /// Free amplitude and a fixed inverse range.
    pub fn with_fixed_alpha(nu_lo: f64, nu_hi: f64, alpha: f64) -> Result<Self> {
        Self::new(Interval::new(nu_lo, nu_hi)?, Interval::singleton(alpha)?, PhiRange::Unbounded)
    }
}
