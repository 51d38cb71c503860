//! Connection probabilities, the expected degree and its bounds, the
//! compound-Poisson dominating sampler and the subcriticality diagnostic.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use statrs::function::gamma::{gamma, gamma_lr};

use crate::geometry::{ball_volume, sphere_area};
use crate::kernels::{self, ClosedForm, ConvolutionGrid, ConvolutionProfile, KernelSpec, ProfileKind, Tail};
use crate::quadrature::{breakpoints, Estimate, Romberg};
use crate::{Error, Result};

fn check_intensity(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be a finite non-negative number, got {x}")))
    }
}

/// The self-convolution of `spec` on its default grid and tolerance.
pub fn profile_for(spec: &KernelSpec) -> Result<ConvolutionProfile> {
    kernels::self_convolve(spec, ConvolutionGrid::default_for(spec), kernels::DEFAULT_TOL)
}

/// `p = 1 - exp(-mu f(t))`, the probability that two vertices at distance `t` are adjacent.
pub fn connection_probability(profile: &ConvolutionProfile, mu: f64, t: f64) -> Result<f64> {
    check_intensity("mu", mu)?;
    let f = profile.eval(t)?;
    Ok(-(-mu * f).exp_m1())
}

/// `E[D] = lambda * integral over R^d of (1 - exp(-mu f(y))) dy`.
///
/// The radial integral is split at the profile's kinks and at `r_{1/mu}`.
/// Gaussian tails are integrated through `x = a / u`; power tails of
/// tabulated profiles are integrated in closed form. `tol` is relative to
/// `min(mu ||g||^2, l(r_0))`, which does not depend on `lambda`, so the
/// result is exactly linear in `lambda`.
pub fn expected_degree(profile: &ConvolutionProfile, lambda: f64, mu: f64, tol: f64) -> Result<f64> {
    check_intensity("lambda", lambda)?;
    check_intensity("mu", mu)?;
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    if lambda == 0.0 || mu == 0.0 {
        return Ok(0.0);
    }
    let d = profile.dim();
    let sd = sphere_area(d);
    let norm = profile.norm_g();
    let reference = (mu * norm * norm).min(ball_volume(d, profile.support()));
    let radial_tol = tol * reference / sd;
    let h = |t: f64| -(-mu * profile.value(t)).exp_m1() * t.powi(d as i32 - 1);

    let transition = profile.radius_level(1.0 / mu);
    let (body, tail) = match profile.kind() {
        ProfileKind::ClosedForm(ClosedForm::BooleanLens { r, .. }) => {
            let pts = breakpoints(vec![transition], 0.0, 2.0 * r);
            (Romberg::new(radial_tol).integrate_pieces(h, &pts), Estimate::ZERO)
        }
        ProfileKind::ClosedForm(ClosedForm::Gaussian { sigma, .. }) => {
            // f(T) / f(0) = e^-16.
            let t_cut = (8.0 * sigma).max(2.0 * transition);
            let pts = breakpoints(vec![transition], 0.0, t_cut);
            let body = Romberg::new(0.5 * radial_tol).integrate_pieces(h, &pts);
            let tail = Romberg::new(0.5 * radial_tol).integrate_to_infinity(h, t_cut);
            (body, tail)
        }
        ProfileKind::Tabulated { radii, values, tail, .. } => {
            let t_max = *radii.last().unwrap();
            let end = profile.support().min(t_max);
            let mut pts = radii.clone();
            pts.push(transition);
            let pts = breakpoints(pts, 0.0, end);
            let body = Romberg::new(radial_tol).integrate_pieces(h, &pts);
            let tail = match tail {
                Tail::Power { exponent } if *values.last().unwrap() > 0.0 => {
                    let w0 = mu * profile.value(t_max);
                    Estimate {
                        value: power_tail(d, t_max, w0, *exponent)?,
                        error: 0.0,
                        converged: true,
                    }
                }
                _ => Estimate::ZERO,
            };
            (body, tail)
        }
    };
    let total = body.combine(tail);
    if !total.converged {
        return Err(Error::Convergence {
            what: "expected degree".into(),
            estimate: lambda * (sd * total.value),
            error_bound: lambda * sd * total.error,
            tol: lambda * sd * radial_tol,
        });
    }
    Ok(lambda * (sd * total.value))
}

/// `integral_T^inf (1 - exp(-w0 (T/t)^p)) t^(d-1) dt` for `p > d`.
fn power_tail(d: usize, t: f64, w0: f64, p: f64) -> Result<f64> {
    let beta = d as f64 / p;
    if !(beta < 1.0) {
        return Err(Error::Convergence {
            what: "expected degree tail".into(),
            estimate: f64::INFINITY,
            error_bound: f64::INFINITY,
            tol: 0.0,
        });
    }
    if w0 == 0.0 {
        return Ok(0.0);
    }
    // I = integral_0^w0 (1 - e^-w) w^(-beta-1) dw
    let integral = if w0 <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0; // w0^k / k!
        for k in 1..60 {
            term *= w0 / k as f64;
            let kf = k as f64;
            let piece = term / (kf - beta);
            sum += if k % 2 == 1 { piece } else { -piece };
            if piece < 1e-18 * sum.abs() {
                break;
            }
        }
        sum * w0.powf(-beta)
    } else {
        let a = 1.0 - beta;
        (gamma(a) * gamma_lr(a, w0) - (-(-w0).exp_m1()) * w0.powf(-beta)) / beta
    };
    Ok(t.powi(d as i32) / p * w0.powf(beta) * integral)
}

/// Three bounds on `E[D]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeBounds {
    /// `lambda mu ||g||^2`.
    pub upper_simple: f64,
    /// `l(r_{1/mu}) (1 - 1/e) lambda`.
    pub bracket_low: f64,
    /// `l(r_0) lambda`, infinite for unbounded support.
    pub bracket_high: f64,
}

impl DegreeBounds {
    /// `bracket_low <= value <= min(upper_simple, bracket_high)`, up to `slack`.
    pub fn contains(&self, value: f64, slack: f64) -> bool {
        value >= self.bracket_low - slack && value <= self.upper_simple.min(self.bracket_high) + slack
    }
}

pub fn degree_bounds(profile: &ConvolutionProfile, lambda: f64, mu: f64) -> Result<DegreeBounds> {
    check_intensity("lambda", lambda)?;
    check_intensity("mu", mu)?;
    let d = profile.dim();
    let norm = profile.norm_g();
    let r_low = if mu == 0.0 { 0.0 } else { profile.radius_level(1.0 / mu) };
    let r0 = profile.support();
    Ok(DegreeBounds {
        upper_simple: lambda * mu * norm * norm,
        bracket_low: ball_volume(d, r_low) * (-(-1.0f64).exp_m1()) * lambda,
        bracket_high: if r0.is_finite() {
            ball_volume(d, r0) * lambda
        } else {
            f64::INFINITY
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffspringMean {
    pub value: f64,
    /// `value < 1`: the origin's component is almost surely finite.
    pub subcritical: bool,
}

/// `lambda mu ||g||^2`, the mean offspring of the dominating branching process.
pub fn offspring_mean(lambda: f64, mu: f64, norm_g: f64) -> Result<OffspringMean> {
    check_intensity("lambda", lambda)?;
    check_intensity("mu", mu)?;
    check_intensity("norm", norm_g)?;
    let value = lambda * mu * norm_g * norm_g;
    Ok(OffspringMean {
        value,
        subcritical: value < 1.0,
    })
}

/// One draw of `X_1 + ... + X_N` with `N ~ Poisson(mu ||g||)` and
/// `X_i ~ Poisson(lambda ||g||)` independent.
pub fn sample_dominating_degree<R: Rng + ?Sized>(lambda: f64, mu: f64, norm_g: f64, rng: &mut R) -> Result<u64> {
    check_intensity("lambda", lambda)?;
    check_intensity("mu", mu)?;
    check_intensity("norm", norm_g)?;
    let n = poisson(mu * norm_g, rng);
    let group = lambda * norm_g;
    Ok((0..n).map(|_| poisson(group, rng)).sum())
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean > 0.0 {
        Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
    } else {
        0
    }
}

/// `exp(-mu ||g||)`: the probability the origin joins no group, a lower bound on `P(D = 0)`.
pub fn isolated_probability_bound(mu: f64, norm_g: f64) -> Result<f64> {
    check_intensity("mu", mu)?;
    check_intensity("norm", norm_g)?;
    Ok((-mu * norm_g).exp())
}

/// Quantities available as JSON records.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    ExpectedDegree,
    DegreeBounds,
    OffspringMean,
    IsolatedBound,
    ConnectionProbability,
    KernelNorm,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::ExpectedDegree,
        Quantity::DegreeBounds,
        Quantity::OffspringMean,
        Quantity::IsolatedBound,
        Quantity::ConnectionProbability,
        Quantity::KernelNorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::ExpectedDegree => "expected-degree",
            Quantity::DegreeBounds => "degree-bounds",
            Quantity::OffspringMean => "offspring-mean",
            Quantity::IsolatedBound => "isolated-bound",
            Quantity::ConnectionProbability => "connection-probability",
            Quantity::KernelNorm => "kernel-norm",
        }
    }

    pub fn parse(name: &str) -> Result<Quantity> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == name)
            .ok_or_else(|| {
                let known: Vec<_> = Quantity::ALL.iter().map(|q| q.name()).collect();
                Error::config(format!("unknown quantity {name:?}; expected one of {}", known.join(", ")))
            })
    }
}

/// `{quantity, params, value, tol}` as emitted by the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsRecord {
    pub quantity: String,
    pub params: Value,
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

/// Inputs for [`evaluate`]; unused fields are ignored by a quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsParams {
    pub lambda: f64,
    pub mu: f64,
    /// Probe distance for the connection probability.
    #[serde(default)]
    pub t: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-9
}

pub fn evaluate(quantity: Quantity, spec: &KernelSpec, params: &AnalyticsParams) -> Result<AnalyticsRecord> {
    let norm = spec.norm()?;
    let mut record_params = json!({"kernel": spec.to_json(), "lambda": params.lambda, "mu": params.mu});
    let mut tol = None;
    let value = match quantity {
        Quantity::KernelNorm => json!(norm),
        Quantity::OffspringMean => serde_json::to_value(offspring_mean(params.lambda, params.mu, norm)?)?,
        Quantity::IsolatedBound => json!(isolated_probability_bound(params.mu, norm)?),
        Quantity::ExpectedDegree => {
            tol = Some(params.tol);
            json!(expected_degree(&profile_for(spec)?, params.lambda, params.mu, params.tol)?)
        }
        Quantity::DegreeBounds => serde_json::to_value(degree_bounds(&profile_for(spec)?, params.lambda, params.mu)?)?,
        Quantity::ConnectionProbability => {
            record_params["t"] = json!(params.t);
            json!(connection_probability(&profile_for(spec)?, params.mu, params.t)?)
        }
    };
    Ok(AnalyticsRecord {
        quantity: quantity.name().into(),
        params: record_params,
        value,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::self_convolve_numeric;
    use crate::seeds;
    use std::f64::consts::{E, PI};

    /// `Ein(x) = integral_0^x (1 - e^-w) / w dw`; series below 1, `gamma + ln x + E1(x)` above.
    fn ein(x: f64) -> f64 {
        if x <= 1.0 {
            let mut sum = 0.0;
            let mut term = 1.0;
            for k in 1..60 {
                term *= x / k as f64;
                let piece = term / k as f64;
                sum += if k % 2 == 1 { piece } else { -piece };
            }
            return sum;
        }
        // E1 by its continued fraction (modified Lentz).
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        let e1 = h * (-x).exp();
        0.577_215_664_901_532_9 + x.ln() + e1
    }

    /// Planar Gaussian with amplitude `a`: `E[D] = lambda 4 pi sigma^2 Ein(mu a^2 pi sigma^2)`.
    fn gaussian_oracle(sigma: f64, a: f64, lambda: f64, mu: f64) -> f64 {
        lambda * 4.0 * PI * sigma * sigma * ein(mu * a * a * PI * sigma * sigma)
    }

    fn gauss(norm: f64) -> ConvolutionProfile {
        profile_for(&KernelSpec::gaussian_pdf(0.5, 2).unwrap().normalized(norm).unwrap()).unwrap()
    }

    #[test]
    fn connection_probability_examples() {
        let lens = profile_for(&KernelSpec::boolean(1.0, 2).unwrap()).unwrap();
        assert_eq!(connection_probability(&lens, 3.0, 2.5).unwrap(), 0.0);

        let g = gauss(1.0);
        let t = 0.7;
        let f = g.value(t);
        assert!((connection_probability(&g, 2.0f64.ln() / f, t).unwrap() - 0.5).abs() < 1e-15);
        assert!(connection_probability(&g, 1000.0 / f, t).unwrap() >= 1.0 - 1e-15);
        assert!(connection_probability(&g, -1.0, t).is_err());
        assert!(connection_probability(&g, 1.0, -0.1).is_err());
    }

    #[test]
    fn connection_probability_monotone() {
        let g = gauss(1.0);
        let ts: Vec<f64> = (0..200).map(|i| i as f64 * 0.03).collect();
        for mu in [0.5, 1.0, 4.0] {
            let ps: Vec<f64> = ts.iter().map(|&t| connection_probability(&g, mu, t).unwrap()).collect();
            assert!(ps.windows(2).all(|w| w[1] <= w[0]));
        }
        for t in [0.0, 0.5, 2.0] {
            let mut prev = 0.0;
            for mu in [0.0, 0.1, 1.0, 10.0, 100.0] {
                let p = connection_probability(&g, mu, t).unwrap();
                assert!(p >= prev);
                prev = p;
            }
        }
    }

    #[test]
    fn expected_degree_gaussian_matches_closed_form_oracle() {
        for (sigma, a, lambda, mu) in [
            (1.0 / (2.0 * PI).sqrt(), 1.0, 2.0, 2.0),
            (0.8, 1.0, 2.0, 2.0),
            (0.4, 0.3, 1.0, 0.2),
            (0.4, 1.0, 3.0, 50.0),
        ] {
            let p = profile_for(&KernelSpec::gaussian(sigma, a, 2).unwrap()).unwrap();
            let got = expected_degree(&p, lambda, mu, 1e-10).unwrap();
            let want = gaussian_oracle(sigma, a, lambda, mu);
            assert!(((got - want) / want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn expected_degree_boolean_limits() {
        // Small mu: E[D] ~ lambda mu ||g||^2. Large mu: E[D] -> lambda l(2r).
        let p = profile_for(&KernelSpec::boolean(1.0, 2).unwrap()).unwrap();
        let small = expected_degree(&p, 1.0, 1e-6, 1e-10).unwrap();
        assert!((small / (1e-6 * PI * PI) - 1.0).abs() < 1e-5);
        let large = expected_degree(&p, 1.0, 1e6, 1e-10).unwrap();
        assert!((large / (4.0 * PI) - 1.0).abs() < 1e-3);
        assert!(large < 4.0 * PI);
    }

    #[test]
    fn expected_degree_tabulated_agrees_with_closed_form() {
        let spec = KernelSpec::gaussian(0.5, 1.0, 2).unwrap();
        let closed = profile_for(&spec).unwrap();
        let numeric = self_convolve_numeric(&spec, ConvolutionGrid::default_for(&spec), 1e-8).unwrap();
        for mu in [0.3, 2.0, 20.0] {
            let a = expected_degree(&closed, 1.5, mu, 1e-10).unwrap();
            let b = expected_degree(&numeric, 1.5, mu, 1e-10).unwrap();
            assert!(((a - b) / a).abs() < 1e-5, "mu {mu}: {a} vs {b}");
        }
    }

    #[test]
    fn power_tail_matches_numeric_integral() {
        for (d, p, w0) in [(2usize, 5.0, 0.01), (2, 3.0, 0.5), (2, 3.0, 4.0), (3, 7.5, 2.0), (1, 2.0, 1e-6)] {
            let t0 = 2.0;
            let closed = power_tail(d, t0, w0, p).unwrap();
            let f = |t: f64| -(-w0 * (t0 / t).powf(p)).exp_m1() * t.powi(d as i32 - 1);
            let numeric = Romberg::new(1e-14).integrate_to_infinity(f, t0);
            assert!(((closed - numeric.value) / closed).abs() < 1e-9, "{d} {p} {w0}: {closed} vs {numeric:?}");
        }
        assert!(power_tail(2, 1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn expected_degree_power_law_within_bounds() {
        let spec = KernelSpec::power_law(1.5, 1.0, 2).unwrap();
        let p = profile_for(&spec).unwrap();
        for (lambda, mu) in [(1.0, 0.5), (2.0, 2.0), (0.5, 8.0)] {
            let e = expected_degree(&p, lambda, mu, 1e-9).unwrap();
            let b = degree_bounds(&p, lambda, mu).unwrap();
            assert!(b.contains(e, 0.0), "{e} {b:?}");
            assert!(b.bracket_high.is_infinite());
        }
    }

    #[test]
    fn expected_degree_zero_and_linear() {
        let g = gauss(1.0);
        assert_eq!(expected_degree(&g, 0.0, 2.0, 1e-9).unwrap(), 0.0);
        assert_eq!(expected_degree(&g, 2.0, 0.0, 1e-9).unwrap(), 0.0);
        for lambda in [0.1, 0.37, 2.0, 3.3] {
            let one = expected_degree(&g, lambda, 1.7, 1e-9).unwrap();
            let two = expected_degree(&g, 2.0 * lambda, 1.7, 1e-9).unwrap();
            assert_eq!(two, 2.0 * one);
        }
        assert!(expected_degree(&g, -1.0, 1.0, 1e-9).is_err());
        assert!(expected_degree(&g, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn expected_degree_monotone_in_mu() {
        let g = gauss(1.0);
        let mut prev = 0.0;
        for mu in [0.1, 0.5, 1.0, 2.0, 4.0, 16.0] {
            let e = expected_degree(&g, 1.0, mu, 1e-10).unwrap();
            assert!(e > prev);
            prev = e;
        }
    }

    #[test]
    fn bounds_examples() {
        let p = profile_for(&KernelSpec::boolean(1.0, 2).unwrap()).unwrap();
        let b = degree_bounds(&p, 1.5, 2.0).unwrap();
        assert!((b.bracket_high - 1.5 * 4.0 * PI).abs() < 1e-12);
        assert!((b.upper_simple - 1.5 * 2.0 * PI * PI).abs() < 1e-12);
        // 1/mu >= f(0) = pi gives r_{1/mu} = 0.
        assert_eq!(degree_bounds(&p, 1.0, 0.3).unwrap().bracket_low, 0.0);

        let g = gauss(1.0);
        let lows: Vec<f64> = [1.0, 10.0, 100.0, 1e4, 1e8]
            .iter()
            .map(|&mu| degree_bounds(&g, 1.0, mu).unwrap().bracket_low)
            .collect();
        assert!(lows.windows(2).all(|w| w[1] > w[0]));
        assert!(lows[4] > 10.0);
        assert!(degree_bounds(&g, 1.0, 1.0).unwrap().bracket_high.is_infinite());
    }

    #[test]
    fn bracket_holds_across_settings() {
        for spec in [
            KernelSpec::boolean(1.0, 2).unwrap(),
            KernelSpec::boolean_scaled(1.0, 1.0 / PI, 2).unwrap(),
            KernelSpec::gaussian(0.4, 1.0, 2).unwrap(),
            KernelSpec::gaussian(0.6, 0.5, 3).unwrap(),
            KernelSpec::power_law(2.5, 1.0, 2).unwrap(),
        ] {
            let p = profile_for(&spec).unwrap();
            for mu in [0.05, 0.5, 2.0, 8.0, 64.0] {
                let e = expected_degree(&p, 1.0, mu, 1e-9).unwrap();
                let b = degree_bounds(&p, 1.0, mu).unwrap();
                assert!(b.contains(e, 1e-9 * e), "{spec:?} mu {mu}: {e} {b:?}");
            }
        }
    }

    #[test]
    fn offspring_examples() {
        assert_eq!(
            offspring_mean(0.5, 0.5, 1.0).unwrap(),
            OffspringMean {
                value: 0.25,
                subcritical: true
            }
        );
        let m = offspring_mean(2.0, 2.0, 1.0).unwrap();
        assert_eq!(m.value, 4.0);
        assert!(!m.subcritical);
    }

    #[test]
    fn dominating_sampler() {
        let mut rng = seeds::stream(1);
        assert!((0..100).all(|_| sample_dominating_degree(3.0, 0.0, 1.0, &mut rng).unwrap() == 0));
        let n = 100_000;
        let (lambda, mu, norm) = (2.0, 1.5, 1.0);
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_dominating_degree(lambda, mu, norm, &mut rng).unwrap() as f64)
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        // Compound Poisson variance: mu ||g|| (lambda ||g|| + (lambda ||g||)^2).
        let var = mu * norm * (lambda * norm + (lambda * norm).powi(2));
        assert!((mean - lambda * mu).abs() < 3.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn isolation_bound() {
        assert_eq!(isolated_probability_bound(0.0, 1.0).unwrap(), 1.0);
        assert!((isolated_probability_bound(1.0, 1.0).unwrap() - 1.0 / E).abs() < 1e-15);
    }

    #[test]
    fn records() {
        let spec = KernelSpec::gaussian_pdf(0.5, 2).unwrap().normalized(1.0).unwrap();
        let params = AnalyticsParams {
            lambda: 2.0,
            mu: 2.0,
            t: 0.0,
            tol: 1e-9,
        };
        let rec = evaluate(Quantity::ExpectedDegree, &spec, &params).unwrap();
        let direct = expected_degree(&profile_for(&spec).unwrap(), 2.0, 2.0, 1e-9).unwrap();
        assert_eq!(rec.value, json!(direct));
        assert_eq!(rec.quantity, "expected-degree");
        for q in Quantity::ALL {
            assert_eq!(Quantity::parse(q.name()).unwrap(), q);
            assert!(evaluate(q, &spec, &params).is_ok());
        }
        assert!(matches!(Quantity::parse("degree"), Err(Error::Config(_))));
    }
}
