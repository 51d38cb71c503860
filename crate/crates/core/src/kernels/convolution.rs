//! The self-convolution `f(t) = int g(x) g(v - x) dx` with `|v| = t`.
//!
//! Boolean kernels in the plane and Gaussian kernels in any dimension have
//! closed forms. Everything else is tabulated on an equispaced radius grid
//! by nested Romberg quadrature in polar coordinates around the origin:
//!
//! ```text
//! f(t) = S(d-2) int_0^inf s^(d-1) g(s) int_0^pi sin^(d-2)(a) g(|s w(a) - v|) da ds
//! ```
//!
//! where `S(k)` is the area of the unit k-sphere. Both integrals are split at
//! every radius where `g` is not smooth, and the outer one additionally at
//! `|t - b|` and `t + b` where the circle of radius `s` becomes tangent to
//! the sphere of radius `b` around `v`. Each piece is then smooth.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Family, KernelSpec};
use crate::geometry::sphere_area;
use crate::quadrature::{breakpoints, Estimate, Romberg};
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_N_RADII: usize = 1024;

/// Radius grid for a tabulated profile: `n_radii` equispaced points in `[0, t_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionGrid {
    pub n_radii: usize,
    pub t_max: f64,
}

impl ConvolutionGrid {
    /// Defaults: 1024 radii up to `2 s_max` for bounded kernels, `12 sigma`
    /// for Gaussians and 32 for power laws (whose tail is then extrapolated).
    pub fn default_for(spec: &KernelSpec) -> Self {
        let t_max = match spec.family() {
            Family::Gaussian { sigma, .. } => 12.0 * sigma,
            Family::PowerLaw { .. } => 32.0,
            Family::Boolean { .. } | Family::Tabulated { .. } => 2.0 * spec.scale(),
        };
        ConvolutionGrid {
            n_radii: DEFAULT_N_RADII,
            t_max,
        }
    }

    pub fn with_n_radii(mut self, n_radii: usize) -> Self {
        self.n_radii = n_radii;
        self
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.t_max * i as f64 / (self.n_radii - 1) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClosedForm {
    /// `amplitude^2 |B_r(0) ∩ B_r(v)|` in the plane.
    BooleanLens { r: f64, amplitude: f64 },
    /// `amplitude^2 (pi sigma^2)^(d/2) exp(-t^2 / 4 sigma^2)`.
    Gaussian { sigma: f64, amplitude: f64 },
}

/// Behaviour of a tabulated profile beyond its last radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    /// `f = 0` beyond the grid.
    Zero,
    /// `f(t) = f(t_max) (t_max / t)^exponent` beyond the grid.
    Power { exponent: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    ClosedForm(ClosedForm),
    Tabulated {
        radii: Vec<f64>,
        values: Vec<f64>,
        max_abs_error: f64,
        tail: Tail,
    },
}

/// The radial function `f = g * g` together with the `||g||` it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionProfile {
    kind: ProfileKind,
    norm_g: f64,
    d: usize,
}

fn lens_area(r: f64, t: f64) -> f64 {
    if t >= 2.0 * r {
        return 0.0;
    }
    let half = 0.5 * t;
    2.0 * r * r * (half / r).acos() - half * (4.0 * r * r - t * t).max(0.0).sqrt()
}

impl ConvolutionProfile {
    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn norm_g(&self) -> f64 {
        self.norm_g
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.kind, ProfileKind::ClosedForm(_))
    }

    /// Recorded quadrature error (zero for closed forms).
    pub fn max_abs_error(&self) -> f64 {
        match &self.kind {
            ProfileKind::ClosedForm(_) => 0.0,
            ProfileKind::Tabulated { max_abs_error, .. } => *max_abs_error,
        }
    }

    /// `f(t)` without the domain check.
    pub fn value(&self, t: f64) -> f64 {
        let raw = match &self.kind {
            ProfileKind::ClosedForm(ClosedForm::BooleanLens { r, amplitude }) => {
                amplitude * amplitude * lens_area(*r, t)
            }
            ProfileKind::ClosedForm(ClosedForm::Gaussian { sigma, amplitude }) => {
                amplitude
                    * amplitude
                    * (PI * sigma * sigma).powf(self.d as f64 / 2.0)
                    * (-t * t / (4.0 * sigma * sigma)).exp()
            }
            ProfileKind::Tabulated {
                radii,
                values,
                tail,
                ..
            } => {
                let last = radii.len() - 1;
                let t_max = radii[last];
                if t > t_max {
                    match tail {
                        Tail::Zero => 0.0,
                        Tail::Power { exponent } => values[last] * (t_max / t).powf(*exponent),
                    }
                } else {
                    let h = t_max / last as f64;
                    let i = ((t / h) as usize).min(last - 1);
                    let w = ((t - radii[i]) / h).clamp(0.0, 1.0);
                    values[i] + w * (values[i + 1] - values[i])
                }
            }
        };
        raw.clamp(0.0, self.norm_g)
    }

    /// `f(t)` for `t >= 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("radial distance must be >= 0, got {t}")));
        }
        Ok(self.value(t))
    }

    /// `r_0 = sup{t : f(t) > 0}`, infinite when `f` has unbounded support.
    pub fn support(&self) -> f64 {
        match &self.kind {
            ProfileKind::ClosedForm(ClosedForm::BooleanLens { r, .. }) => 2.0 * r,
            ProfileKind::ClosedForm(ClosedForm::Gaussian { .. }) => f64::INFINITY,
            ProfileKind::Tabulated {
                radii,
                values,
                tail,
                ..
            } => match tail {
                Tail::Power { .. } if *values.last().unwrap() > 0.0 => f64::INFINITY,
                _ => match values.iter().position(|&v| v <= 0.0) {
                    Some(0) => 0.0,
                    Some(k) => radii[k],
                    None => *radii.last().unwrap(),
                },
            },
        }
    }

    /// `r_s = sup{t : f(t) > s}`; zero when `s >= f(0)`, the support when `s = 0`.
    pub fn radius_level(&self, s: f64) -> f64 {
        if s < 0.0 {
            return f64::INFINITY;
        }
        if s == 0.0 {
            return self.support();
        }
        if s >= self.value(0.0) {
            return 0.0;
        }
        match &self.kind {
            ProfileKind::ClosedForm(ClosedForm::Gaussian { sigma, .. }) => {
                2.0 * sigma * (self.value(0.0) / s).ln().sqrt()
            }
            ProfileKind::ClosedForm(ClosedForm::BooleanLens { r, .. }) => {
                let (mut lo, mut hi) = (0.0, 2.0 * r);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.value(mid) > s {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-15 * r {
                        break;
                    }
                }
                lo
            }
            ProfileKind::Tabulated {
                radii,
                values,
                tail,
                ..
            } => {
                let last = radii.len() - 1;
                // values[0] > s here; find the last node above the level.
                let i = values.partition_point(|&v| v > s) - 1;
                if i == last {
                    match tail {
                        Tail::Zero => radii[last],
                        Tail::Power { exponent } => radii[last] * (values[last] / s).powf(1.0 / exponent),
                    }
                } else {
                    let (v0, v1) = (values[i], values[i + 1]);
                    radii[i] + (v0 - s) / (v0 - v1) * (radii[i + 1] - radii[i])
                }
            }
        }
    }

    /// Two-column CSV `radius,f`. Tabulated profiles write their nodes;
    /// closed forms are sampled at 1024 radii up to `2 r` or `12 sigma`.
    pub fn to_csv(&self) -> String {
        let nodes: Vec<f64> = match &self.kind {
            ProfileKind::Tabulated { radii, .. } => radii.clone(),
            ProfileKind::ClosedForm(c) => {
                let t_max = match c {
                    ClosedForm::BooleanLens { r, .. } => 2.0 * r,
                    ClosedForm::Gaussian { sigma, .. } => 12.0 * sigma,
                };
                let grid = ConvolutionGrid {
                    n_radii: DEFAULT_N_RADII,
                    t_max,
                };
                (0..grid.n_radii).map(|i| grid.radius(i)).collect()
            }
        };
        let mut out = String::from("radius,f\n");
        for t in nodes {
            let _ = writeln!(out, "{t},{}", self.value(t));
        }
        out
    }
}

/// `f(t)` for a profile; negative distances are a domain error.
pub fn eval_f(profile: &ConvolutionProfile, t: f64) -> Result<f64> {
    profile.eval(t)
}

/// `r_s = sup{t : f(t) > s}`.
pub fn radius_level(profile: &ConvolutionProfile, s: f64) -> f64 {
    profile.radius_level(s)
}

/// Self-convolve a kernel, using a closed form when one exists.
pub fn self_convolve(spec: &KernelSpec, grid: ConvolutionGrid, tol: f64) -> Result<ConvolutionProfile> {
    let norm_g = spec.norm()?;
    let d = spec.dim();
    let closed = match spec.family() {
        Family::Boolean { r, amplitude } if d == 2 => Some(ClosedForm::BooleanLens {
            r: *r,
            amplitude: *amplitude,
        }),
        Family::Gaussian { sigma, amplitude } => Some(ClosedForm::Gaussian {
            sigma: *sigma,
            amplitude: *amplitude,
        }),
        _ => None,
    };
    match closed {
        Some(c) => Ok(ConvolutionProfile {
            kind: ProfileKind::ClosedForm(c),
            norm_g,
            d,
        }),
        None => self_convolve_numeric(spec, grid, tol),
    }
}

/// Tabulate `f` by quadrature regardless of whether a closed form exists.
pub fn self_convolve_numeric(
    spec: &KernelSpec,
    grid: ConvolutionGrid,
    tol: f64,
) -> Result<ConvolutionProfile> {
    let norm_g = spec.norm()?;
    if grid.n_radii < 2 {
        return Err(Error::domain("convolution grid needs at least 2 radii"));
    }
    if !(grid.t_max > 0.0 && grid.t_max.is_finite()) {
        return Err(Error::domain(format!("t_max must be positive, got {}", grid.t_max)));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let support_f = 2.0 * spec.support();
    if support_f.is_finite() && grid.t_max < support_f {
        return Err(Error::config(format!(
            "t_max = {} does not cover the support {support_f} of f",
            grid.t_max
        )));
    }

    let convolver = Convolver::new(spec, norm_g, tol);
    let mut values = Vec::with_capacity(grid.n_radii);
    let mut radii = Vec::with_capacity(grid.n_radii);
    let mut max_abs_error: f64 = 0.0;
    let mut converged = true;
    for i in 0..grid.n_radii {
        let t = grid.radius(i);
        let est = if t >= support_f {
            Estimate::ZERO
        } else {
            convolver.at(t)
        };
        converged &= est.converged;
        max_abs_error = max_abs_error.max(est.error);
        radii.push(t);
        values.push(est.value);
    }

    // Monotone clamp into [0, ||g||].
    let mut ceiling = norm_g;
    for v in values.iter_mut() {
        *v = v.clamp(0.0, ceiling);
        ceiling = *v;
    }

    let tail = match spec.family() {
        Family::PowerLaw { alpha, .. } => Tail::Power {
            exponent: spec.dim() as f64 * alpha,
        },
        _ => Tail::Zero,
    };
    let profile = ConvolutionProfile {
        kind: ProfileKind::Tabulated {
            radii,
            values,
            max_abs_error,
            tail,
        },
        norm_g,
        d: spec.dim(),
    };
    if converged && max_abs_error <= tol {
        Ok(profile)
    } else {
        Err(Error::ProfileConvergence {
            best: Box::new(profile),
            error_bound: max_abs_error,
            tol,
        })
    }
}

struct Convolver<'a> {
    spec: &'a KernelSpec,
    d: usize,
    kinks: Vec<f64>,
    /// Outer integration ends here; `None` means a power tail to infinity.
    end: Option<f64>,
    outer: Romberg,
    inner: Romberg,
    /// Sphere factor `S(d-2)` and the polar weight `int_0^pi sin^(d-2)`.
    sphere: f64,
    polar_mass: f64,
    /// Multiplier turning an inner absolute error into an error on `f`.
    inner_gain: f64,
}

impl<'a> Convolver<'a> {
    fn new(spec: &'a KernelSpec, norm_g: f64, tol: f64) -> Self {
        let d = spec.dim();
        let end = match spec.family() {
            Family::Gaussian { sigma, .. } => Some(12.0 * sigma),
            Family::PowerLaw { .. } => None,
            _ => Some(spec.support()),
        };
        let (sphere, polar_mass) = if d >= 2 {
            (sphere_area(d - 1), sphere_area(d) / sphere_area(d - 1))
        } else {
            (1.0, 1.0)
        };
        let inner_gain = if d >= 2 {
            norm_g * sphere / sphere_area(d)
        } else {
            0.0
        };
        let inner_tol = if d >= 2 { 0.25 * tol / inner_gain } else { tol };
        Convolver {
            spec,
            d,
            kinks: spec.kinks(),
            end,
            outer: Romberg::new(0.5 * tol).with_max_level(11),
            inner: Romberg::new(inner_tol).with_max_level(10),
            sphere,
            polar_mass,
            inner_gain,
        }
    }

    fn at(&self, t: f64) -> Estimate {
        let mut cuts = vec![t];
        for &b in &self.kinks {
            cuts.extend([b, (t - b).abs(), t + b]);
        }
        let top = match self.end {
            Some(end) => end,
            None => cuts.iter().copied().fold(1.0, f64::max) + 1.0,
        };
        let points = breakpoints(cuts, 0.0, top);

        if self.d == 1 {
            let g = |x: f64| self.spec.value(x.abs());
            let integrand = |s: f64| g(s) * (g(s - t) + g(s + t));
            let mut est = self.outer.integrate_pieces(integrand, &points);
            if self.end.is_none() {
                est = est.combine(self.outer.integrate_to_infinity(integrand, top));
            }
            return est;
        }

        let mut worst_inner = Estimate::ZERO;
        let mut integrand = |s: f64| {
            let gs = self.spec.value(s);
            if gs == 0.0 {
                return 0.0;
            }
            let inner = self.polar(s, t);
            worst_inner.converged &= inner.converged;
            worst_inner.error = worst_inner.error.max(inner.error);
            self.sphere * s.powi(self.d as i32 - 1) * gs * inner.value
        };
        let mut est = self.outer.integrate_pieces(&mut integrand, &points);
        if self.end.is_none() {
            est = est.combine(self.outer.integrate_to_infinity(&mut integrand, top));
        }
        Estimate {
            value: est.value,
            error: est.error + self.inner_gain * worst_inner.error,
            converged: est.converged && worst_inner.converged,
        }
    }

    /// `int_0^pi sin^(d-2)(a) g(|s w(a) - v|) da`.
    fn polar(&self, s: f64, t: f64) -> Estimate {
        if s == 0.0 || t == 0.0 {
            return Estimate {
                value: self.polar_mass * self.spec.value((s * s + t * t).sqrt()),
                error: 0.0,
                converged: true,
            };
        }
        let two_st = 2.0 * s * t;
        let base = s * s + t * t;
        let angles = self
            .kinks
            .iter()
            .filter_map(|&b| {
                let c = (base - b * b) / two_st;
                (c > -1.0 && c < 1.0).then(|| c.acos())
            })
            .collect();
        let pieces = breakpoints(angles, 0.0, PI);
        let power = self.d as i32 - 2;
        self.inner.integrate_pieces(
            |a: f64| {
                let rho = (base - two_st * a.cos()).max(0.0).sqrt();
                let weight = if power == 0 { 1.0 } else { a.sin().powi(power) };
                weight * self.spec.value(rho)
            },
            &pieces,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lens_reference(t: f64) -> f64 {
        // Unit disks: 2 acos(t/2) - (t/2) sqrt(4 - t^2).
        2.0 * (t / 2.0).acos() - t / 2.0 * (4.0 - t * t).sqrt()
    }

    #[test]
    fn boolean_lens_closed_form() {
        let g = KernelSpec::boolean(1.0, 2).unwrap();
        let f = self_convolve(&g, ConvolutionGrid::default_for(&g), DEFAULT_TOL).unwrap();
        assert!(f.is_closed_form());
        assert!((f.eval(0.0).unwrap() - PI).abs() < 1e-14);
        let expected = 2.0 * (0.5f64).acos() - 0.5 * 3f64.sqrt();
        assert!((f.eval(1.0).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 1.228_369_698_608_757).abs() < 1e-12);
        assert_eq!(f.eval(2.5).unwrap(), 0.0);
        assert!(f.eval(-1.0).is_err());
    }

    #[test]
    fn gaussian_closed_form_at_origin() {
        for (sigma, d) in [(1.0, 2), (0.7, 3), (2.0, 1)] {
            let g = KernelSpec::gaussian_pdf(sigma, d).unwrap();
            let f = self_convolve(&g, ConvolutionGrid::default_for(&g), DEFAULT_TOL).unwrap();
            let expected = (4.0 * PI * sigma * sigma).powf(-(d as f64) / 2.0);
            assert!((f.value(0.0) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_decays_monotonically() {
        let g = KernelSpec::gaussian_pdf(1.0, 2).unwrap();
        let f = self_convolve(&g, ConvolutionGrid::default_for(&g), DEFAULT_TOL).unwrap();
        let mut prev = f.value(0.0);
        for i in 1..200 {
            let v = f.value(i as f64 * 0.25);
            assert!(v <= prev);
            prev = v;
        }
        assert!(prev < 1e-100);
    }

    #[test]
    fn numeric_boolean_matches_lens() {
        let g = KernelSpec::boolean(1.0, 2).unwrap();
        let grid = ConvolutionGrid {
            n_radii: 21,
            t_max: 2.0,
        };
        let f = self_convolve_numeric(&g, grid, 1e-9).unwrap();
        for i in 0..grid.n_radii {
            let t = grid.radius(i);
            assert!((f.value(t) - lens_reference(t)).abs() < 1e-8, "t={t}");
        }
        assert_eq!(f.value(2.0), 0.0);
        assert_eq!(f.value(2.5), 0.0);
    }

    #[test]
    fn numeric_boolean_one_dimension() {
        // d = 1: overlap of two intervals of half-width r is max(0, 2r - t).
        let g = KernelSpec::boolean_scaled(1.5, 0.5, 1).unwrap();
        let grid = ConvolutionGrid {
            n_radii: 13,
            t_max: 3.0,
        };
        let f = self_convolve(&g, grid, 1e-10).unwrap();
        for i in 0..grid.n_radii {
            let t = grid.radius(i);
            let expected = 0.25 * (3.0 - t).max(0.0);
            assert!((f.value(t) - expected).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn numeric_boolean_three_dimensions() {
        // Overlap of two unit balls: pi/12 (4 + t)(2 - t)^2.
        let g = KernelSpec::boolean(1.0, 3).unwrap();
        let grid = ConvolutionGrid {
            n_radii: 9,
            t_max: 2.0,
        };
        let f = self_convolve(&g, grid, 1e-8).unwrap();
        for i in 0..grid.n_radii {
            let t = grid.radius(i);
            let expected = PI / 12.0 * (4.0 + t) * (2.0 - t).powi(2);
            assert!((f.value(t) - expected).abs() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn numeric_gaussian_matches_closed_form() {
        for d in [1, 2, 3] {
            let g = KernelSpec::gaussian_pdf(1.0, d).unwrap();
            let closed = self_convolve(&g, ConvolutionGrid::default_for(&g), DEFAULT_TOL).unwrap();
            let grid = ConvolutionGrid::default_for(&g).with_n_radii(25);
            let numeric = self_convolve_numeric(&g, grid, DEFAULT_TOL).unwrap();
            for i in 0..grid.n_radii {
                let t = grid.radius(i);
                assert!((numeric.value(t) - closed.value(t)).abs() < 1e-6, "d={d} t={t}");
            }
        }
    }

    #[test]
    fn power_law_profile_is_bounded_and_monotone() {
        let g = KernelSpec::power_law(1.5, 1.0, 2).unwrap();
        let grid = ConvolutionGrid::default_for(&g).with_n_radii(33);
        let f = self_convolve(&g, grid, 1e-6).unwrap();
        let norm = g.norm().unwrap();
        let mut prev = f.value(0.0);
        assert!(prev <= norm);
        for i in 1..400 {
            let v = f.value(i as f64 * 0.2);
            assert!(v <= prev && v >= 0.0);
            prev = v;
        }
        assert!(f.support().is_infinite());
        // Far from the origin f(t) is close to 2 ||g|| g(t).
        let t = 32.0;
        let ratio = f.value(t) / (2.0 * norm * g.value(t));
        assert!((ratio - 1.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn grid_must_cover_bounded_support() {
        let g = KernelSpec::boolean(1.0, 3).unwrap();
        let grid = ConvolutionGrid {
            n_radii: 8,
            t_max: 1.5,
        };
        assert!(matches!(self_convolve(&g, grid, 1e-6), Err(Error::Config(_))));
        let bad = ConvolutionGrid {
            n_radii: 1,
            t_max: 2.0,
        };
        assert!(self_convolve(&g, bad, 1e-6).is_err());
    }

    #[test]
    fn unreachable_tolerance_carries_best_estimate() {
        let g = KernelSpec::power_law(1.5, 1.0, 2).unwrap();
        let grid = ConvolutionGrid {
            n_radii: 2,
            t_max: 2.0,
        };
        match self_convolve(&g, grid, 1e-300) {
            Err(Error::ProfileConvergence { best, .. }) => {
                assert!(best.value(0.0) > 0.0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn level_radii() {
        let g = KernelSpec::boolean(1.0, 2).unwrap();
        let f = self_convolve(&g, ConvolutionGrid::default_for(&g), DEFAULT_TOL).unwrap();
        assert_eq!(f.radius_level(PI), 0.0);
        assert_eq!(f.radius_level(4.0), 0.0);
        assert!((f.radius_level(1e-12) - 2.0).abs() < 1e-6);
        assert_eq!(f.radius_level(0.0), 2.0);

        let g = KernelSpec::gaussian_pdf(1.0, 2).unwrap();
        let f = self_convolve(&g, ConvolutionGrid::default_for(&g), DEFAULT_TOL).unwrap();
        assert!((f.radius_level(f.value(1.0)) - 1.0).abs() < 1e-12);
        assert!(f.radius_level(0.0).is_infinite());
    }

    #[test]
    fn tabulated_level_radii_invert_interpolant() {
        let g = KernelSpec::tabulated(vec![0.0, 1.0, 2.0], vec![1.0, 0.6, 0.2], 2).unwrap();
        let grid = ConvolutionGrid {
            n_radii: 41,
            t_max: 4.0,
        };
        let f = self_convolve(&g, grid, 1e-7).unwrap();
        for s in [0.01, 0.1, 0.5, 1.0] {
            let r = f.radius_level(s);
            assert!(f.value(r) >= s - 1e-12);
            assert!(f.value(r + 1e-9) <= s + 1e-9);
        }
        assert!((f.support() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn csv_export() {
        let g = KernelSpec::boolean(1.0, 3).unwrap();
        let grid = ConvolutionGrid {
            n_radii: 5,
            t_max: 2.0,
        };
        let f = self_convolve(&g, grid, 1e-6).unwrap();
        let csv = f.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "radius,f");
        assert_eq!(lines.len(), 6);
        assert!(lines[5].starts_with("2,0"));
    }
}
