//! Radial connection kernels and their self-convolutions.
//!
//! A kernel `g` gives the probability that a vertex joins a group at a given
//! distance. It is radial, non-increasing, takes values in `[0, 1]` and has a
//! finite positive L1 norm `||g||`. The self-convolution `f = g * g` drives
//! every analytic quantity: two vertices at distance `t` share
//! `Poisson(mu f(t))` groups.

mod convolution;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use statrs::function::gamma::gamma_ur;

use crate::geometry::{ball_volume, sphere_area};
use crate::{Error, Result};

pub use convolution::{
    eval_f, radius_level, self_convolve, self_convolve_numeric, ClosedForm, ConvolutionGrid,
    ConvolutionProfile, ProfileKind, Tail, DEFAULT_N_RADII, DEFAULT_TOL,
};

/// The shape of a kernel.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `amplitude * 1{t < r}`.
    Boolean { r: f64, amplitude: f64 },
    /// `amplitude * exp(-t^2 / (2 sigma^2))`.
    Gaussian { sigma: f64, amplitude: f64 },
    /// `amplitude * min(1, t^(-d alpha))`.
    PowerLaw { alpha: f64, amplitude: f64 },
    /// Linear interpolation of `(radii, values)`; constant below the first
    /// radius and zero beyond the last.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

/// A validated radial kernel in dimension `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    family: Family,
    d: usize,
}

fn check_amplitude(amplitude: f64) -> Result<()> {
    if amplitude > 0.0 && amplitude <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "kernel amplitude must lie in (0, 1], got {amplitude}"
        )))
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::domain("kernel dimension must be at least 1"))
    } else {
        Ok(())
    }
}

impl KernelSpec {
    pub fn boolean(r: f64, d: usize) -> Result<Self> {
        Self::boolean_scaled(r, 1.0, d)
    }

    pub fn boolean_scaled(r: f64, amplitude: f64, d: usize) -> Result<Self> {
        check_dim(d)?;
        check_amplitude(amplitude)?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!("boolean radius must be positive, got {r}")));
        }
        Ok(KernelSpec {
            family: Family::Boolean { r, amplitude },
            d,
        })
    }

    pub fn gaussian(sigma: f64, amplitude: f64, d: usize) -> Result<Self> {
        check_dim(d)?;
        check_amplitude(amplitude)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("gaussian sigma must be positive, got {sigma}")));
        }
        Ok(KernelSpec {
            family: Family::Gaussian { sigma, amplitude },
            d,
        })
    }

    /// The normal density `(2 pi sigma^2)^(-d/2) exp(-t^2 / 2 sigma^2)`, with `||g|| = 1`.
    pub fn gaussian_pdf(sigma: f64, d: usize) -> Result<Self> {
        Self::gaussian(sigma, (2.0 * PI * sigma * sigma).powf(-(d as f64) / 2.0), d)
    }

    pub fn power_law(alpha: f64, amplitude: f64, d: usize) -> Result<Self> {
        check_dim(d)?;
        check_amplitude(amplitude)?;
        if !alpha.is_finite() || alpha <= 1.0 {
            return Err(Error::DivergentNorm(format!(
                "power-law exponent alpha must exceed 1, got {alpha}"
            )));
        }
        Ok(KernelSpec {
            family: Family::PowerLaw { alpha, amplitude },
            d,
        })
    }

    /// A tabulated kernel. Radii must be non-negative and strictly ascending,
    /// values in `[0, 1]` and non-increasing. An all-zero table is accepted
    /// (it builds empty graphs) but has no valid norm.
    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>, d: usize) -> Result<Self> {
        check_dim(d)?;
        if radii.is_empty() || radii.len() != values.len() {
            return Err(Error::domain(
                "tabulated kernel needs equally many (at least one) radii and values",
            ));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::domain("tabulated radii must be finite and non-negative"));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("tabulated radii must be strictly ascending"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::domain("tabulated values must lie in [0, 1]"));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::domain("tabulated values must be non-increasing"));
        }
        Ok(KernelSpec {
            family: Family::Tabulated { radii, values },
            d,
        })
    }

    /// The same shape rescaled so that `||g|| == target`.
    ///
    /// Fails when the rescaled kernel would exceed 1 somewhere.
    pub fn normalized(&self, target: f64) -> Result<Self> {
        if !(target > 0.0 && target.is_finite()) {
            return Err(Error::domain(format!("target norm must be positive, got {target}")));
        }
        let factor = target / self.norm()?;
        let family = match &self.family {
            Family::Boolean { r, amplitude } => Family::Boolean {
                r: *r,
                amplitude: amplitude * factor,
            },
            Family::Gaussian { sigma, amplitude } => Family::Gaussian {
                sigma: *sigma,
                amplitude: amplitude * factor,
            },
            Family::PowerLaw { alpha, amplitude } => Family::PowerLaw {
                alpha: *alpha,
                amplitude: amplitude * factor,
            },
            Family::Tabulated { radii, values } => {
                return Self::tabulated(
                    radii.clone(),
                    values.iter().map(|v| v * factor).collect(),
                    self.d,
                )
                .map_err(|_| {
                    Error::domain(format!(
                        "norm {target} needs a tabulated kernel exceeding 1"
                    ))
                })
            }
        };
        let spec = KernelSpec { family, d: self.d };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        match &self.family {
            Family::Boolean { r, amplitude } => Self::boolean_scaled(*r, *amplitude, self.d),
            Family::Gaussian { sigma, amplitude } => Self::gaussian(*sigma, *amplitude, self.d),
            Family::PowerLaw { alpha, amplitude } => Self::power_law(*alpha, *amplitude, self.d),
            Family::Tabulated { radii, values } => {
                Self::tabulated(radii.clone(), values.clone(), self.d)
            }
        }
        .map(|_| ())
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Boolean { .. } => "boolean",
            Family::Gaussian { .. } => "gaussian",
            Family::PowerLaw { .. } => "power_law",
            Family::Tabulated { .. } => "tabulated",
        }
    }

    /// `g(t)` for a radial distance `t >= 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("radial distance must be >= 0, got {t}")));
        }
        Ok(self.value(t))
    }

    /// `g(t)` without the domain check.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match &self.family {
            Family::Boolean { r, amplitude } => {
                if t < *r {
                    *amplitude
                } else {
                    0.0
                }
            }
            Family::Gaussian { sigma, amplitude } => amplitude * (-t * t / (2.0 * sigma * sigma)).exp(),
            Family::PowerLaw { alpha, amplitude } => {
                if t <= 1.0 {
                    *amplitude
                } else {
                    amplitude * t.powf(-(self.d as f64) * alpha)
                }
            }
            Family::Tabulated { radii, values } => interpolate(radii, values, t),
        }
    }

    /// `g` evaluated from a squared distance; avoids the square root where possible.
    #[inline]
    pub fn value_sq(&self, t2: f64) -> f64 {
        match &self.family {
            Family::Boolean { r, amplitude } => {
                if t2 < r * r {
                    *amplitude
                } else {
                    0.0
                }
            }
            Family::Gaussian { sigma, amplitude } => amplitude * (-t2 / (2.0 * sigma * sigma)).exp(),
            Family::PowerLaw { alpha, amplitude } => {
                if t2 <= 1.0 {
                    *amplitude
                } else {
                    amplitude * t2.powf(-0.5 * self.d as f64 * alpha)
                }
            }
            Family::Tabulated { .. } => self.value(t2.sqrt()),
        }
    }

    /// `||g||`, the integral of `g` over `R^d`.
    pub fn norm(&self) -> Result<f64> {
        let d = self.d;
        let norm = match &self.family {
            Family::Boolean { r, amplitude } => amplitude * ball_volume(d, *r),
            Family::Gaussian { sigma, amplitude } => {
                amplitude * (2.0 * PI * sigma * sigma).powf(d as f64 / 2.0)
            }
            Family::PowerLaw { alpha, amplitude } => {
                amplitude * ball_volume(d, 1.0) * alpha / (alpha - 1.0)
            }
            Family::Tabulated { radii, values } => {
                sphere_area(d) * tabulated_moment(radii, values, d, 0.0)
            }
        };
        if norm > 0.0 && norm.is_finite() {
            Ok(norm)
        } else {
            Err(Error::DegenerateNorm(format!(
                "{} kernel has norm {norm}",
                self.family_name()
            )))
        }
    }

    /// `s_max = sup{t : g(t) > 0}`; infinite for unbounded support.
    pub fn support(&self) -> f64 {
        match &self.family {
            Family::Boolean { r, .. } => *r,
            Family::Gaussian { .. } | Family::PowerLaw { .. } => f64::INFINITY,
            Family::Tabulated { radii, values } => match values.iter().position(|&v| v == 0.0) {
                Some(0) => 0.0,
                Some(k) => radii[k],
                None => *radii.last().unwrap(),
            },
        }
    }

    pub fn has_bounded_support(&self) -> bool {
        self.support().is_finite()
    }

    /// Fraction of `||g||` carried by `{|x| > radius}`.
    pub fn tail_fraction(&self, radius: f64) -> Result<f64> {
        let d = self.d as f64;
        let radius = radius.max(0.0);
        let frac = match &self.family {
            Family::Boolean { r, .. } => {
                if radius >= *r {
                    0.0
                } else {
                    1.0 - (radius / r).powf(d)
                }
            }
            Family::Gaussian { sigma, .. } => {
                if radius == 0.0 {
                    1.0
                } else {
                    gamma_ur(d / 2.0, radius * radius / (2.0 * sigma * sigma))
                }
            }
            Family::PowerLaw { alpha, .. } => {
                if radius <= 1.0 {
                    1.0 - radius.powf(d) * (alpha - 1.0) / alpha
                } else {
                    radius.powf(-d * (alpha - 1.0)) / alpha
                }
            }
            Family::Tabulated { radii, values } => {
                let total = tabulated_moment(radii, values, self.d, 0.0);
                if total <= 0.0 {
                    return Err(Error::DegenerateNorm("tabulated kernel is identically 0".into()));
                }
                (tabulated_moment(radii, values, self.d, radius) / total).clamp(0.0, 1.0)
            }
        };
        Ok(frac)
    }

    /// Truncation radius: the exact support when `eps_tail == 0`, otherwise
    /// the smallest `R` whose outside mass is at most `eps_tail * ||g||`.
    pub fn support_radius(&self, eps_tail: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&eps_tail) {
            return Err(Error::domain(format!("eps_tail must lie in [0, 1), got {eps_tail}")));
        }
        if eps_tail == 0.0 {
            return Ok(self.support());
        }
        let d = self.d as f64;
        let radius = match &self.family {
            Family::Boolean { r, .. } => r * (1.0 - eps_tail).powf(1.0 / d),
            Family::PowerLaw { alpha, .. } => {
                if eps_tail < 1.0 / alpha {
                    (eps_tail * alpha).powf(-1.0 / (d * (alpha - 1.0)))
                } else {
                    ((1.0 - eps_tail) * alpha / (alpha - 1.0)).powf(1.0 / d)
                }
            }
            Family::Gaussian { .. } | Family::Tabulated { .. } => {
                // Bisection on the monotone tail fraction.
                let mut lo = 0.0;
                let mut hi = self.scale();
                while self.tail_fraction(hi)? > eps_tail {
                    lo = hi;
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.tail_fraction(mid)? > eps_tail {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-14 * hi {
                        break;
                    }
                }
                hi
            }
        };
        Ok(radius)
    }

    /// Characteristic length of the kernel: `r`, `sigma`, 1, or the table support.
    pub fn scale(&self) -> f64 {
        match &self.family {
            Family::Boolean { r, .. } => *r,
            Family::Gaussian { sigma, .. } => *sigma,
            Family::PowerLaw { .. } => 1.0,
            Family::Tabulated { radii, .. } => {
                let s = self.support();
                if s > 0.0 {
                    s
                } else {
                    radii.last().copied().unwrap_or(1.0).max(1.0)
                }
            }
        }
    }

    /// Radii at which `g` fails to be smooth.
    pub(crate) fn kinks(&self) -> Vec<f64> {
        match &self.family {
            Family::Boolean { r, .. } => vec![*r],
            Family::Gaussian { .. } => Vec::new(),
            Family::PowerLaw { .. } => vec![1.0],
            Family::Tabulated { radii, .. } => radii.iter().copied().filter(|&r| r > 0.0).collect(),
        }
    }

    /// JSON form `{"family": ..., "params": {...}, "d": ...}`.
    pub fn to_json(&self) -> Value {
        let params = match &self.family {
            Family::Boolean { r, amplitude } => json!({"r": r, "amplitude": amplitude}),
            Family::Gaussian { sigma, amplitude } => json!({"sigma": sigma, "amplitude": amplitude}),
            Family::PowerLaw { alpha, amplitude } => json!({"alpha": alpha, "amplitude": amplitude}),
            Family::Tabulated { radii, values } => json!({"radii": radii, "values": values}),
        };
        json!({"family": self.family_name(), "params": params, "d": self.d})
    }

    /// Parse the JSON form. Parameters may give `amplitude` or a target
    /// `norm` (never both); without either, Gaussians default to the unit-mass
    /// density and the other families to amplitude 1.
    pub fn from_json(value: &Value) -> Result<Self> {
        let repr: KernelRepr = serde_json::from_value(value.clone())
            .map_err(|e| Error::config(format!("kernel: {e}")))?;
        repr.try_into()
    }
}

fn interpolate(radii: &[f64], values: &[f64], t: f64) -> f64 {
    let last = radii.len() - 1;
    if t > radii[last] {
        return 0.0;
    }
    if t <= radii[0] {
        return values[0];
    }
    let i = radii.partition_point(|&r| r <= t).min(last);
    let (r0, r1) = (radii[i - 1], radii[i]);
    let (v0, v1) = (values[i - 1], values[i]);
    let w = (t - r0) / (r1 - r0);
    (v0 + w * (v1 - v0)).clamp(v1.min(v0), v0.max(v1))
}

/// `int_{radius}^inf g(t) t^(d-1) dt` for the piecewise-linear table, exact.
fn tabulated_moment(radii: &[f64], values: &[f64], d: usize, radius: f64) -> f64 {
    let k = d as f64;
    // Antiderivative of (c0 + c1 t) t^(d-1).
    let segment = |a: f64, b: f64, c0: f64, c1: f64| {
        c0 * (b.powf(k) - a.powf(k)) / k + c1 * (b.powf(k + 1.0) - a.powf(k + 1.0)) / (k + 1.0)
    };
    let mut total = 0.0;
    // Constant part below the first radius.
    if radius < radii[0] {
        total += segment(radius, radii[0], values[0], 0.0);
    }
    for i in 1..radii.len() {
        let (a, b) = (radii[i - 1], radii[i]);
        if b <= radius {
            continue;
        }
        let c1 = (values[i] - values[i - 1]) / (b - a);
        let c0 = values[i - 1] - c1 * a;
        total += segment(a.max(radius), b, c0, c1);
    }
    total
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelRepr {
    family: String,
    params: Value,
    d: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BooleanParams {
    r: f64,
    amplitude: Option<f64>,
    norm: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianParams {
    sigma: f64,
    amplitude: Option<f64>,
    norm: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerLawParams {
    alpha: f64,
    amplitude: Option<f64>,
    norm: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TabulatedParams {
    radii: Vec<f64>,
    values: Vec<f64>,
    norm: Option<f64>,
}

fn parse_params<T: serde::de::DeserializeOwned>(family: &str, params: Value) -> Result<T> {
    serde_json::from_value(params).map_err(|e| Error::config(format!("{family} params: {e}")))
}

fn scale_to(spec: KernelSpec, amplitude: Option<f64>, norm: Option<f64>) -> Result<KernelSpec> {
    match (amplitude, norm) {
        (Some(_), Some(_)) => Err(Error::config("give either amplitude or norm, not both")),
        (_, Some(target)) => spec.normalized(target),
        _ => Ok(spec),
    }
}

impl TryFrom<KernelRepr> for KernelSpec {
    type Error = Error;

    fn try_from(repr: KernelRepr) -> Result<Self> {
        let d = repr.d;
        match repr.family.as_str() {
            "boolean" => {
                let p: BooleanParams = parse_params("boolean", repr.params)?;
                let spec = KernelSpec::boolean_scaled(p.r, p.amplitude.unwrap_or(1.0), d)?;
                scale_to(spec, p.amplitude, p.norm)
            }
            "gaussian" => {
                let p: GaussianParams = parse_params("gaussian", repr.params)?;
                let spec = match p.amplitude {
                    Some(a) => KernelSpec::gaussian(p.sigma, a, d)?,
                    None => KernelSpec::gaussian_pdf(p.sigma, d)?,
                };
                scale_to(spec, p.amplitude, p.norm)
            }
            "power_law" => {
                let p: PowerLawParams = parse_params("power_law", repr.params)?;
                let spec = KernelSpec::power_law(p.alpha, p.amplitude.unwrap_or(1.0), d)?;
                scale_to(spec, p.amplitude, p.norm)
            }
            "tabulated" => {
                let p: TabulatedParams = parse_params("tabulated", repr.params)?;
                let spec = KernelSpec::tabulated(p.radii, p.values, d)?;
                scale_to(spec, None, p.norm)
            }
            other => Err(Error::config(format!(
                "unknown kernel family {other:?} (expected boolean, gaussian, power_law or tabulated)"
            ))),
        }
    }
}

impl Serialize for KernelSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for KernelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = KernelRepr::deserialize(de)?;
        KernelSpec::try_from(repr).map_err(serde::de::Error::custom)
    }
}
