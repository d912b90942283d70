//! Speed-control and spatial-scaling factors α(u) and their advance
//! functions Λ(u) = ∫₀ᵘ α(u') du'.
//!
//! A profile is defined on `[0, L]`. Closed-form kinds return exact
//! integrals; tabulated profiles interpolate linearly between nodes and
//! integrate with composite Simpson on the tabulation grid (exact for the
//! piecewise-linear interpolant up to rounding).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate axis a profile acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Time,
    X,
    Y,
    Z,
}

/// Functional form of α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    Constant {
        value: f64,
    },
    /// α(u) = start + (end − start)·u/L.
    LinearRamp { start: f64, end: f64 },
    /// tanh step normalized so that α(0) = start and α(L) = end exactly.
    SmoothTanhRamp {
        start: f64,
        end: f64,
        center: f64,
        width: f64,
    },
    /// α(u) = base + (peak − base)·sin²(πu/L); smooth and periodic, with
    /// α = base and α' = 0 at both ends.
    Bump { base: f64, peak: f64 },
    /// Piecewise-linear through (node, value) pairs. Nodes run from 0 to L,
    /// non-decreasing; a repeated node encodes a jump (left value wins at the
    /// node itself).
    Tabulated { nodes: Vec<f64>, values: Vec<f64> },
}

/// A speed-control factor α over `[0, length]` on one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpec", into = "ProfileSpec")]
pub struct SpeedProfile {
    kind: ProfileKind,
    axis: Axis,
    length: f64,
    /// Λ at each tabulation node (tabulated kind only).
    cumulative: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProfileSpec {
    #[serde(flatten)]
    kind: ProfileKind,
    axis: Axis,
    length: f64,
}

impl TryFrom<ProfileSpec> for SpeedProfile {
    type Error = Error;
    fn try_from(spec: ProfileSpec) -> Result<Self> {
        SpeedProfile::new(spec.kind, spec.axis, spec.length)
    }
}

impl From<SpeedProfile> for ProfileSpec {
    fn from(p: SpeedProfile) -> Self {
        ProfileSpec {
            kind: p.kind,
            axis: p.axis,
            length: p.length,
        }
    }
}

/// Relative slack when testing domain membership, so that t = n·dt computed
/// in floating point still counts as inside `[0, n·dt]`.
const DOMAIN_SLACK: f64 = 1e-9;

/// Numerically stable ln(cosh z).
fn ln_cosh(z: f64) -> f64 {
    let a = z.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub(crate) fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(2) + panels % 2;
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

impl SpeedProfile {
    pub fn new(kind: ProfileKind, axis: Axis, length: f64) -> Result<Self> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Parameter(format!("profile {what} must be finite, got {v}")))
            }
        };
        let mut cumulative = Vec::new();
        match &kind {
            ProfileKind::Constant { value } => finite(*value, "value")?,
            ProfileKind::LinearRamp { start, end } | ProfileKind::Bump { base: start, peak: end } => {
                finite(*start, "start")?;
                finite(*end, "end")?;
            }
            ProfileKind::SmoothTanhRamp {
                start,
                end,
                center,
                width,
            } => {
                finite(*start, "start")?;
                finite(*end, "end")?;
                finite(*center, "center")?;
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::Parameter(format!("tanh ramp width must be > 0, got {width}")));
                }
            }
            ProfileKind::Tabulated { nodes, values } => {
                if nodes.len() != values.len() || nodes.len() < 2 {
                    return Err(Error::Parameter(
                        "tabulated profile needs at least two nodes and one value per node".into(),
                    ));
                }
                if nodes[0] != 0.0 {
                    return Err(Error::Parameter("tabulated profile must start at node 0".into()));
                }
                if nodes.windows(2).any(|w| w[1] < w[0]) || nodes.iter().any(|n| !n.is_finite()) {
                    return Err(Error::Parameter("tabulation nodes must be finite and non-decreasing".into()));
                }
                for v in values {
                    finite(*v, "tabulated value")?;
                }
                let last = *nodes.last().unwrap();
                if (last - length).abs() > DOMAIN_SLACK * length.abs().max(1.0) {
                    return Err(Error::Parameter(format!(
                        "tabulated profile ends at {last} but length is {length}"
                    )));
                }
                cumulative.push(0.0);
                for i in 0..nodes.len() - 1 {
                    let (a, b) = (nodes[i], nodes[i + 1]);
                    let (va, vb) = (values[i], values[i + 1]);
                    let seg = if b > a {
                        simpson(|u| va + (vb - va) * (u - a) / (b - a), a, b, 2)
                    } else {
                        0.0
                    };
                    let prev = *cumulative.last().unwrap();
                    cumulative.push(prev + seg);
                }
            }
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Parameter(format!("profile length must be > 0, got {length}")));
        }
        Ok(Self {
            kind,
            axis,
            length,
            cumulative,
        })
    }

    pub fn constant(value: f64, axis: Axis, length: f64) -> Result<Self> {
        Self::new(ProfileKind::Constant { value }, axis, length)
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn domain(&self) -> (f64, f64) {
        (0.0, self.length)
    }

    /// True when α(u) does not depend on u.
    pub fn is_constant(&self) -> bool {
        matches!(self.kind, ProfileKind::Constant { .. })
    }

    /// Whether α is C¹ on its domain. Closed-form kinds are; a tabulated
    /// profile only when it has no jumps and a single slope.
    pub fn is_continuously_differentiable(&self) -> bool {
        let ProfileKind::Tabulated { nodes, values } = &self.kind else {
            return true;
        };
        let mut slope: Option<f64> = None;
        for i in 0..nodes.len() - 1 {
            let (h, dv) = (nodes[i + 1] - nodes[i], values[i + 1] - values[i]);
            if h <= 0.0 {
                if dv != 0.0 {
                    return false;
                }
                continue;
            }
            let s = dv / h;
            match slope {
                Some(prev) if (s - prev).abs() > 1e-12 * prev.abs().max(s.abs()).max(1.0) => return false,
                _ => slope = Some(s),
            }
        }
        true
    }

    fn check(&self, u: f64) -> Result<f64> {
        let slack = DOMAIN_SLACK * self.length.max(1.0);
        if u.is_nan() || u < -slack || u > self.length + slack {
            return Err(Error::Domain {
                value: u,
                lo: 0.0,
                hi: self.length,
            });
        }
        Ok(u.clamp(0.0, self.length))
    }

    /// tanh((0 − c)/w) and the normalizing span tanh((L − c)/w) − tanh(−c/w).
    fn tanh_parts(&self, center: f64, width: f64) -> (f64, f64) {
        let t0 = (-center / width).tanh();
        let t1 = ((self.length - center) / width).tanh();
        (t0, t1 - t0)
    }

    /// Segment index `i` such that u ∈ [nodes[i], nodes[i+1]] with a
    /// non-degenerate segment; left-continuous at jumps.
    fn segment(nodes: &[f64], u: f64) -> usize {
        let mut i = nodes.partition_point(|&n| n < u).max(1) - 1;
        while i + 1 < nodes.len() - 1 && nodes[i + 1] <= nodes[i] {
            i += 1;
        }
        i.min(nodes.len() - 2)
    }

    /// α(u).
    pub fn alpha_at(&self, u: f64) -> Result<f64> {
        let u = self.check(u)?;
        Ok(match &self.kind {
            ProfileKind::Constant { value } => *value,
            ProfileKind::LinearRamp { start, end } => start + (end - start) * u / self.length,
            ProfileKind::SmoothTanhRamp {
                start,
                end,
                center,
                width,
            } => {
                let (t0, d) = self.tanh_parts(*center, *width);
                let s = (((u - center) / width).tanh() - t0) / d;
                start + (end - start) * s
            }
            ProfileKind::Bump { base, peak } => {
                let s = (PI * u / self.length).sin();
                base + (peak - base) * s * s
            }
            ProfileKind::Tabulated { nodes, values } => {
                let i = Self::segment(nodes, u);
                let (a, b) = (nodes[i], nodes[i + 1]);
                if b <= a {
                    values[i]
                } else {
                    values[i] + (values[i + 1] - values[i]) * (u - a) / (b - a)
                }
            }
        })
    }

    /// dα/du. Analytic for closed-form kinds; for tabulated profiles the
    /// segment slope, averaged (centered difference) at interior nodes.
    pub fn alpha_derivative_at(&self, u: f64) -> Result<f64> {
        let u = self.check(u)?;
        Ok(match &self.kind {
            ProfileKind::Constant { .. } => 0.0,
            ProfileKind::LinearRamp { start, end } => (end - start) / self.length,
            ProfileKind::SmoothTanhRamp {
                start,
                end,
                center,
                width,
            } => {
                let (_, d) = self.tanh_parts(*center, *width);
                let th = ((u - center) / width).tanh();
                (end - start) * (1.0 - th * th) / (width * d)
            }
            ProfileKind::Bump { base, peak } => {
                (peak - base) * PI / self.length * (2.0 * PI * u / self.length).sin()
            }
            ProfileKind::Tabulated { nodes, values } => {
                let slope = |i: usize| {
                    let (a, b) = (nodes[i], nodes[i + 1]);
                    if b > a {
                        (values[i + 1] - values[i]) / (b - a)
                    } else {
                        0.0
                    }
                };
                let i = Self::segment(nodes, u);
                let at_interior_node = u == nodes[i + 1] && i + 2 < nodes.len() && nodes[i + 2] > nodes[i + 1];
                if at_interior_node {
                    0.5 * (slope(i) + slope(i + 1))
                } else {
                    slope(i)
                }
            }
        })
    }

    /// Λ(u) = ∫₀ᵘ α.
    pub fn lambda_at(&self, u: f64) -> Result<f64> {
        let u = self.check(u)?;
        Ok(match &self.kind {
            ProfileKind::Constant { value } => value * u,
            ProfileKind::LinearRamp { start, end } => start * u + (end - start) * u * u / (2.0 * self.length),
            ProfileKind::SmoothTanhRamp {
                start,
                end,
                center,
                width,
            } => {
                let (t0, d) = self.tanh_parts(*center, *width);
                let integral_tanh = width * (ln_cosh((u - center) / width) - ln_cosh(-center / width));
                start * u + (end - start) * (integral_tanh - u * t0) / d
            }
            ProfileKind::Bump { base, peak } => {
                base * u + (peak - base) * (0.5 * u - self.length * (2.0 * PI * u / self.length).sin() / (4.0 * PI))
            }
            ProfileKind::Tabulated { nodes, values } => {
                let i = Self::segment(nodes, u);
                let a = nodes[i];
                let partial = if u > a {
                    let va = values[i];
                    let alpha_u = self.alpha_at(u)?;
                    simpson(|w| va + (alpha_u - va) * (w - a) / (u - a), a, u, 2)
                } else {
                    0.0
                };
                self.cumulative[i] + partial
            }
        })
    }

    /// [min, max] of Λ over the whole domain.
    ///
    /// Extremes of Λ sit at the domain ends or where α changes sign; sign
    /// changes are located on a fine scan and refined by bisection.
    pub fn lambda_range(&self) -> (f64, f64) {
        const SCAN: usize = 4096;
        let mut candidates = vec![0.0, self.length];
        if let ProfileKind::Tabulated { nodes, .. } = &self.kind {
            candidates.extend_from_slice(nodes);
        }
        let alpha = |u: f64| self.alpha_at(u).unwrap_or(0.0);
        let h = self.length / SCAN as f64;
        let mut prev = alpha(0.0);
        for k in 1..=SCAN {
            let u = (k as f64 * h).min(self.length);
            let cur = alpha(u);
            if cur == 0.0 {
                candidates.push(u);
            } else if prev != 0.0 && (prev < 0.0) != (cur < 0.0) {
                let (mut lo, mut hi) = (u - h, u);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if (alpha(mid) < 0.0) == (prev < 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                candidates.push(lo);
                candidates.push(hi);
            }
            prev = cur;
        }
        candidates
            .into_iter()
            .filter_map(|u| self.lambda_at(u).ok())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Smallest and largest α over the domain (sampled, plus tabulation nodes).
    pub fn alpha_bounds(&self) -> (f64, f64) {
        const SCAN: usize = 4096;
        let mut samples: Vec<f64> = (0..=SCAN).map(|k| self.length * k as f64 / SCAN as f64).collect();
        if let ProfileKind::Tabulated { nodes, .. } = &self.kind {
            samples.extend_from_slice(nodes);
        }
        samples
            .into_iter()
            .filter_map(|u| self.alpha_at(u).ok())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// True when α vanishes or changes sign somewhere on the domain.
    pub fn crosses_zero(&self) -> bool {
        let (lo, hi) = self.alpha_bounds();
        lo <= 0.0 && hi >= 0.0
    }
}
