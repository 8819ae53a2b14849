//! Scalar link functions and their analytic metadata.
//!
//! A link `phi` is an increasing, 1-Lipschitz scalar map applied
//! coordinate-wise to `A x`. Solvers additionally consume:
//!
//! - the *expansivity* `zeta`, a uniform lower bound on difference quotients
//!   `(phi(x) - phi(y)) / (x - y)`. Recovery guarantees need `zeta > 0`; the
//!   plain ReLU has `zeta = 0` and is rejected by those solvers.
//! - the *antiderivative* `phi_bar` with `phi_bar(0) = 0`, which turns the
//!   moment condition into the convex proxy loss (see [`crate::loss`]).
//!
//! The logistic link is admitted only for the binary GLM estimator path. It
//! is not zero at the origin, and its expansivity is the *restricted* value
//! `sigma'(r)` on a declared domain `[-r, r]`.

use crate::error::{Error, Result};
use nalgebra::DVector;
use std::fmt;

/// Numerically stable logistic function `1 / (1 + exp(-x))`.
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `log(1 + exp(x))`.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// The supported link function families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkKind {
    /// `phi(x) = x`.
    Identity,
    /// `phi(x) = a*x` for `x < 0`, `x` otherwise, with slope `a` in `(0, 1]`.
    LeakyRelu { slope: f64 },
    /// `phi(x) = max(x, 0)`. Non-expansive: `zeta = 0`.
    Relu,
    /// `phi(x) = 1 / (1 + exp(-x))` with a declared domain `[-r, r]` on
    /// which its expansivity is evaluated.
    Logistic { domain_radius: f64 },
}

/// A link function plus the metadata solvers need.
///
/// Value type: cheap to copy, freely shareable across threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkFunction {
    kind: LinkKind,
}

impl LinkFunction {
    /// The identity link.
    pub fn identity() -> Self {
        Self { kind: LinkKind::Identity }
    }

    /// Leaky ReLU with negative-branch slope `a` in `(0, 1]`.
    pub fn leaky_relu(slope: f64) -> Result<Self> {
        if !(slope > 0.0 && slope <= 1.0) {
            return Err(Error::InvalidLink(format!(
                "leaky_relu slope must lie in (0, 1], got {slope}"
            )));
        }
        Ok(Self { kind: LinkKind::LeakyRelu { slope } })
    }

    /// The plain ReLU. Carries `zeta = 0`; solvers that need expansivity
    /// refuse it via [`LinkFunction::require_expansive`].
    pub fn relu() -> Self {
        Self { kind: LinkKind::Relu }
    }

    /// Logistic link restricted to the domain `[-domain_radius, domain_radius]`.
    ///
    /// Admitted only on the binary GLM path. Its expansivity is
    /// `sigma'(domain_radius)`, the smallest derivative over the domain.
    pub fn logistic(domain_radius: f64) -> Result<Self> {
        if !(domain_radius.is_finite() && domain_radius >= 0.0) {
            return Err(Error::InvalidLink(format!(
                "logistic domain radius must be finite and >= 0, got {domain_radius}"
            )));
        }
        Ok(Self { kind: LinkKind::Logistic { domain_radius } })
    }

    /// Which family this link belongs to.
    pub fn kind(&self) -> LinkKind {
        self.kind
    }

    /// Evaluate `phi(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            LinkKind::Identity => x,
            LinkKind::LeakyRelu { slope } => {
                if x < 0.0 {
                    slope * x
                } else {
                    x
                }
            }
            LinkKind::Relu => x.max(0.0),
            LinkKind::Logistic { .. } => sigmoid(x),
        }
    }

    /// Evaluate the weak derivative `phi'(x)`.
    ///
    /// At the ReLU/leaky-ReLU kink the right derivative is used, so
    /// `deriv(0) = 1`. Solver updates are written with differences of `phi`
    /// values rather than `phi'`, so the convention only shows up in
    /// diagnostics.
    pub fn deriv(&self, x: f64) -> f64 {
        match self.kind {
            LinkKind::Identity => 1.0,
            LinkKind::LeakyRelu { slope } => {
                if x < 0.0 {
                    slope
                } else {
                    1.0
                }
            }
            LinkKind::Relu => {
                if x < 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            LinkKind::Logistic { .. } => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
        }
    }

    /// Evaluate the antiderivative `phi_bar(x)` normalized to `phi_bar(0) = 0`.
    pub fn antideriv(&self, x: f64) -> f64 {
        match self.kind {
            LinkKind::Identity => 0.5 * x * x,
            LinkKind::LeakyRelu { slope } => {
                if x < 0.0 {
                    0.5 * slope * x * x
                } else {
                    0.5 * x * x
                }
            }
            LinkKind::Relu => {
                if x < 0.0 {
                    0.0
                } else {
                    0.5 * x * x
                }
            }
            // integral of sigmoid from 0 to x = softplus(x) - ln 2
            LinkKind::Logistic { .. } => softplus(x) - std::f64::consts::LN_2,
        }
    }

    /// Expansivity lower bound `zeta` in `[0, 1]`.
    pub fn zeta(&self) -> f64 {
        match self.kind {
            LinkKind::Identity => 1.0,
            LinkKind::LeakyRelu { slope } => slope,
            LinkKind::Relu => 0.0,
            LinkKind::Logistic { domain_radius } => {
                let s = sigmoid(domain_radius);
                s * (1.0 - s)
            }
        }
    }

    /// Upper bound on `phi'` (1 for the piecewise-linear links, 1/4 for
    /// logistic).
    pub fn lipschitz(&self) -> f64 {
        match self.kind {
            LinkKind::Logistic { .. } => 0.25,
            _ => 1.0,
        }
    }

    /// Whether `phi(0) = 0`. False only for logistic.
    pub fn zero_at_origin(&self) -> bool {
        !matches!(self.kind, LinkKind::Logistic { .. })
    }

    /// Whether `zeta > 0`.
    pub fn is_expansive(&self) -> bool {
        self.zeta() > 0.0
    }

    /// Typed rejection for solvers whose guarantees require `zeta > 0`.
    pub fn require_expansive(&self, solver: &'static str) -> Result<()> {
        if self.is_expansive() {
            Ok(())
        } else {
            Err(Error::NonExpansiveLink { link: self.to_string(), solver })
        }
    }

    /// Apply the link coordinate-wise.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        v.map(|x| self.eval(x))
    }

    /// Apply the link coordinate-wise in place.
    pub fn apply_mut(&self, v: &mut DVector<f64>) {
        for x in v.iter_mut() {
            *x = self.eval(*x);
        }
    }

    /// Parse a config-style link name: `identity`, `relu`,
    /// `leaky_relu:<slope>`, `logistic:<domain_radius>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (s, None),
        };
        let parse_param = |p: Option<&str>, what: &str| -> Result<f64> {
            let p = p.ok_or_else(|| {
                Error::InvalidLink(format!("`{name}` requires a parameter ({what}), e.g. `{name}:0.5`"))
            })?;
            p.parse::<f64>()
                .map_err(|_| Error::InvalidLink(format!("cannot parse `{p}` as {what}")))
        };
        match name {
            "identity" => Ok(Self::identity()),
            "relu" => Ok(Self::relu()),
            "leaky_relu" => Self::leaky_relu(parse_param(param, "slope")?),
            "logistic" => Self::logistic(parse_param(param, "domain radius")?),
            other => Err(Error::InvalidLink(format!("unknown link `{other}`"))),
        }
    }
}

impl fmt::Display for LinkFunction {
    /// Round-trips through [`LinkFunction::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LinkKind::Identity => write!(f, "identity"),
            LinkKind::LeakyRelu { slope } => write!(f, "leaky_relu:{slope}"),
            LinkKind::Relu => write!(f, "relu"),
            LinkKind::Logistic { domain_radius } => write!(f, "logistic:{domain_radius}"),
        }
    }
}
