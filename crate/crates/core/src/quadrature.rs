//! Composite Simpson quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const DEFAULT_PANELS: usize = 2000;

/// Panel count used by each Simpson integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "QuadratureRaw", into = "QuadratureRaw")]
pub struct QuadratureSpec {
    panels: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadratureRaw {
    panels: usize,
}

impl TryFrom<QuadratureRaw> for QuadratureSpec {
    type Error = crate::Error;
    fn try_from(raw: QuadratureRaw) -> Result<Self> {
        Self::new(raw.panels)
    }
}

impl From<QuadratureSpec> for QuadratureRaw {
    fn from(q: QuadratureSpec) -> Self {
        Self { panels: q.panels }
    }
}

impl QuadratureSpec {
    /// `panels` must be even and at least 10.
    pub fn new(panels: usize) -> Result<Self> {
        if panels < 10 || !panels.is_multiple_of(2) {
            return Err(invalid(
                "quadrature.panels",
                format!("must be even and >= 10, got {panels}"),
            ));
        }
        Ok(Self { panels })
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        simpson(f, a, b, self.panels)
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            panels: DEFAULT_PANELS,
        }
    }
}

/// Composite Simpson rule on `[a, b]`; `panels` is rounded up to even.
/// Returns 0 for an empty or reversed interval.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let n = (panels.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let x = a + i as f64 * h;
        if i % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b))
}
