//! Run configuration shared by every subcommand.

use clap::{Args, ValueEnum};
use fredk2::invariants::{DEFAULT_WINDOW, QUADRATURE_POINTS};
use fredk2::{Error, Result};
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 20_241;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Closed,
    Operator,
    Integral,
    All,
}

impl Method {
    pub fn closed(self) -> bool {
        matches!(self, Method::Closed | Method::All)
    }

    pub fn operator(self) -> bool {
        matches!(self, Method::Operator | Method::All)
    }

    pub fn integral(self) -> bool {
        matches!(self, Method::Integral | Method::All)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Flags accepted by all subcommands; echoed into every report.
#[derive(Debug, Clone, Args, Serialize)]
pub struct RunConfig {
    /// Which evaluation paths to run.
    #[arg(long, value_enum, default_value_t = Method::All, global = true)]
    pub method: Method,

    /// Truncation window of the operator path.
    #[arg(long, default_value_t = DEFAULT_WINDOW, global = true)]
    pub window: usize,

    /// Recompute operator values at twice the window and require agreement (default).
    #[arg(long, global = true, overrides_with = "fast")]
    #[serde(skip)]
    pub strict: bool,

    /// Single window, no doubling check.
    #[arg(long, global = true, overrides_with = "strict")]
    #[serde(skip)]
    pub fast: bool,

    /// Trapezoidal nodes of the contour-integral path (raised if the bands need more).
    #[arg(long, default_value_t = QUADRATURE_POINTS, global = true)]
    pub quadrature_order: usize,

    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    pub seed: u64,

    /// Relative tolerance between the closed, integral and character values.
    #[arg(long, default_value_t = 1e-10, global = true)]
    pub exact_tolerance: f64,

    /// Relative tolerance for comparisons involving the operator path.
    #[arg(long, default_value_t = 1e-8, global = true)]
    pub operator_tolerance: f64,
}

impl RunConfig {
    pub fn is_strict(&self) -> bool {
        !self.fast
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidInput("window must be positive".into()));
        }
        if self.quadrature_order == 0 {
            return Err(Error::InvalidInput("quadrature order must be positive".into()));
        }
        for (name, t) in [("exact", self.exact_tolerance), ("operator", self.operator_tolerance)] {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidInput(format!("{name} tolerance must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// In strict mode the window has to be at least `4·band + 16`.
    pub fn check_window(&self, window: usize, band: usize) -> Result<()> {
        let required = 4 * band + 16;
        if self.is_strict() && window < required {
            return Err(Error::WindowTooSmallForBand { window, required });
        }
        Ok(())
    }
}

/// Config as written into reports, with the mode spelled out.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    #[serde(flatten)]
    pub config: RunConfig,
    pub strict: bool,
}

impl From<&RunConfig> for ConfigEcho {
    fn from(c: &RunConfig) -> Self {
        Self { config: c.clone(), strict: c.is_strict() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> RunConfig {
        RunConfig {
            method: Method::All,
            window: 64,
            strict: false,
            fast: false,
            quadrature_order: 16,
            format: Format::Json,
            seed: 1,
            exact_tolerance: 1e-10,
            operator_tolerance: 1e-8,
        }
    }

    #[test]
    fn strict_window_rule() {
        let mut c = config();
        assert!(c.check_window(36, 5).is_ok());
        assert_eq!(c.check_window(35, 5), Err(Error::WindowTooSmallForBand { window: 35, required: 36 }));
        c.fast = true;
        assert!(c.check_window(8, 5).is_ok());
    }

    #[test]
    fn rejects_bad_tolerances() {
        let mut c = config();
        assert!(c.validate().is_ok());
        c.operator_tolerance = f64::NAN;
        assert!(c.validate().is_err());
        c = config();
        c.quadrature_order = 0;
        assert!(c.validate().is_err());
    }
}
