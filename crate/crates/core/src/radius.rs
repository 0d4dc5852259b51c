//! Radius functions `r(u)` with exact derivatives up to third order.

use std::sync::Arc;

use crate::error::{Error, Result};

/// `r` and its first three derivatives at one parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusJet {
    pub r: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

/// Tabulated solution of `r'' = −2(s + r'²) / (3r)`, with `(r, r')` knots
/// interpolated by cubic Hermite polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalOdeTable {
    pub(crate) s: f64,
    /// `(u, r, r')`, ascending in `u`.
    pub(crate) knots: Vec<(f64, f64, f64)>,
}

impl MinimalOdeTable {
    pub(crate) fn second(s: f64, r: f64, r1: f64) -> f64 {
        -2.0 * (s + r1 * r1) / (3.0 * r)
    }

    pub(crate) fn third(s: f64, r: f64, r1: f64) -> f64 {
        let r2 = Self::second(s, r, r1);
        -4.0 * r1 * r2 / (3.0 * r) + 2.0 * (s + r1 * r1) * r1 / (3.0 * r * r)
    }

    fn interpolate(&self, u: f64) -> (f64, f64) {
        let k = &self.knots;
        let j = k.partition_point(|p| p.0 <= u).clamp(1, k.len() - 1);
        let (a, b) = (k[j - 1], k[j]);
        let h = b.0 - a.0;
        let t = (u - a.0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let r = h00 * a.1 + h10 * h * a.2 + h01 * b.1 + h11 * h * b.2;
        let (ra2, rb2) = (Self::second(self.s, a.1, a.2), Self::second(self.s, b.1, b.2));
        let r1 = h00 * a.2 + h10 * h * ra2 + h01 * b.2 + h11 * h * rb2;
        (r, r1)
    }

    pub fn knots(&self) -> &[(f64, f64, f64)] {
        &self.knots
    }
}

/// Which closed form (or table) backs a profile.
#[derive(Clone, Debug, PartialEq)]
pub enum RadiusKind {
    /// Polynomial in `u`, lowest degree first.
    Polynomial(Vec<f64>),
    /// `sign · √(s (e^{2 c1} − (u + c2)²))`.
    Root { s: f64, c1: f64, c2: f64, sign: f64 },
    /// Numerical solution of the minimality ODE.
    MinimalOde(Arc<MinimalOdeTable>),
}

/// A radius function together with the interval on which it is defined.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusProfile {
    kind: RadiusKind,
    domain: (f64, f64),
    tag: String,
}

fn poly(c: &[f64], u: f64, order: usize) -> f64 {
    let mut acc = 0.0;
    for (n, a) in c.iter().enumerate().skip(order).rev() {
        let falling: f64 = (0..order).map(|j| (n - j) as f64).product();
        acc = acc * u + falling * a;
    }
    acc
}

impl RadiusProfile {
    pub fn new(kind: RadiusKind, domain: (f64, f64), tag: impl Into<String>) -> Result<Self> {
        let (lo, hi) = domain;
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::Invalid(format!("radius domain ({lo}, {hi}) is empty")));
        }
        if let RadiusKind::MinimalOde(t) = &kind {
            if t.knots.len() < 2 {
                return Err(Error::Invalid("ODE table needs at least two knots".into()));
            }
        }
        Ok(RadiusProfile { kind, domain, tag: tag.into() })
    }

    /// Polynomial radius valid on the whole line.
    pub fn polynomial(coefficients: Vec<f64>) -> Self {
        RadiusProfile {
            kind: RadiusKind::Polynomial(coefficients),
            domain: (f64::NEG_INFINITY, f64::INFINITY),
            tag: "polynomial".into(),
        }
    }

    pub fn constant(r: f64) -> Self {
        Self::polynomial(vec![r])
    }

    /// `c0 + c1 u`.
    pub fn linear(c0: f64, c1: f64) -> Self {
        Self::polynomial(vec![c0, c1])
    }

    pub fn kind(&self) -> &RadiusKind {
        &self.kind
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn with_domain(mut self, domain: (f64, f64)) -> Self {
        self.domain = domain;
        self
    }

    pub fn is_constant(&self) -> bool {
        match &self.kind {
            RadiusKind::Polynomial(c) => c.iter().skip(1).all(|a| *a == 0.0),
            _ => false,
        }
    }

    /// Evaluates `r, r', r'', r'''` at `u`.
    pub fn jet(&self, u: f64) -> Result<RadiusJet> {
        let (lo, hi) = self.domain;
        if !(u >= lo && u <= hi) {
            return Err(Error::OutOfInterval { u, lo, hi });
        }
        let jet = match &self.kind {
            RadiusKind::Polynomial(c) => RadiusJet {
                r: poly(c, u, 0),
                r1: poly(c, u, 1),
                r2: poly(c, u, 2),
                r3: poly(c, u, 3),
            },
            RadiusKind::Root { s, c1, c2, sign } => {
                // r² = s (E − x²): r r' = −s x, r'² + r r'' = −s, 3 r' r'' + r r''' = 0
                let x = u + c2;
                let e = (2.0 * c1).exp();
                let r = sign * (s * (e - x * x)).sqrt();
                let r1 = -s * x / r;
                let r2 = (-s - r1 * r1) / r;
                let r3 = -3.0 * r1 * r2 / r;
                RadiusJet { r, r1, r2, r3 }
            }
            RadiusKind::MinimalOde(t) => {
                let (r, r1) = t.interpolate(u);
                RadiusJet {
                    r,
                    r1,
                    r2: MinimalOdeTable::second(t.s, r, r1),
                    r3: MinimalOdeTable::third(t.s, r, r1),
                }
            }
        };
        if !(jet.r.is_finite() && jet.r1.is_finite() && jet.r2.is_finite() && jet.r3.is_finite()) {
            return Err(Error::NonFinite(format!("radius jet at u = {u}")));
        }
        Ok(jet)
    }
}
