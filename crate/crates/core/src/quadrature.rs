//! One-dimensional Romberg integration.
//!
//! Each interval is mapped onto `[0, 1]` through the cubic smoothstep
//! `x = a + (b - a) u^2 (3 - 2u)`. The Jacobian vanishes at both ends, so the
//! transformed integrand is zero at the endpoints and square-root endpoint
//! behaviour (lens areas, tangent circles) becomes analytic in `u`. The
//! endpoints themselves are never evaluated, which lets integrands be
//! undefined exactly on a breakpoint or at infinity.
//!
//! The trapezoid rule is refined dyadically and extrapolated with the usual
//! Richardson table; iteration stops once two consecutive levels each see
//! their diagonal entry move by less than the tolerance. A single small step
//! is not trusted: an under-resolved peak can make two coarse estimates agree
//! by accident.

/// Result of a single Romberg run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Larger of the last two steps between diagonal Romberg entries.
    pub error: f64,
    pub converged: bool,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: 0.0,
        error: 0.0,
        converged: true,
    };

    /// Sum of two estimates; errors add, convergence requires both.
    pub fn combine(self, other: Estimate) -> Estimate {
        Estimate {
            value: self.value + other.value,
            error: self.error + other.error,
            converged: self.converged && other.converged,
        }
    }
}

/// Romberg refinement parameters.
#[derive(Clone, Copy, Debug)]
pub struct Romberg {
    /// Absolute tolerance on successive diagonal entries.
    pub tol: f64,
    /// First level at which convergence may be declared.
    pub min_level: usize,
    /// Last level tried; level `k` uses `2^k` trapezoid panels.
    pub max_level: usize,
}

impl Romberg {
    pub fn new(tol: f64) -> Self {
        Romberg {
            tol,
            min_level: 4,
            max_level: 14,
        }
    }

    pub fn with_max_level(mut self, max_level: usize) -> Self {
        self.max_level = max_level.max(self.min_level);
        self
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Estimate {
        if !(b > a) {
            return Estimate::ZERO;
        }
        let width = b - a;
        let mut h = |u: f64| {
            let x = a + width * u * u * (3.0 - 2.0 * u);
            let jac = 6.0 * width * u * (1.0 - u);
            if jac == 0.0 {
                0.0
            } else {
                f(x) * jac
            }
        };

        // Trapezoid sum over [0, 1]; the endpoint terms are zero.
        let mut sum = 0.0;
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(self.max_level + 1);
        rows.push(vec![0.0]);
        let mut panels = 1usize;
        let mut best = Estimate {
            value: 0.0,
            error: f64::INFINITY,
            converged: false,
        };
        let mut prev_step = f64::INFINITY;
        for level in 1..=self.max_level {
            // New midpoints of the previous panels.
            let step = 1.0 / (2 * panels) as f64;
            for i in 0..panels {
                sum += h((2 * i + 1) as f64 * step);
            }
            panels *= 2;
            let trapezoid = sum / panels as f64;

            let prev = &rows[level - 1];
            let mut row = Vec::with_capacity(level + 1);
            row.push(trapezoid);
            let mut factor = 1.0;
            for j in 1..=level {
                factor *= 4.0;
                let next = row[j - 1] + (row[j - 1] - prev[j - 1]) / (factor - 1.0);
                row.push(next);
            }
            let value = row[level];
            let step_size = (value - prev[level - 1]).abs();
            let error = step_size.max(prev_step);
            prev_step = step_size;
            rows.push(row);

            if value.is_finite() && error <= best.error {
                best = Estimate {
                    value,
                    error,
                    converged: false,
                };
            }
            if level >= self.min_level && error <= self.tol {
                return Estimate {
                    value,
                    error,
                    converged: true,
                };
            }
        }
        best
    }

    /// Integrate over consecutive pieces `[p0, p1], [p1, p2], ...`, splitting
    /// the tolerance evenly.
    pub fn integrate_pieces<F: FnMut(f64) -> f64>(&self, mut f: F, points: &[f64]) -> Estimate {
        if points.len() < 2 {
            return Estimate::ZERO;
        }
        let per_piece = Romberg {
            tol: self.tol / (points.len() - 1) as f64,
            ..*self
        };
        points.windows(2).fold(Estimate::ZERO, |acc, w| {
            acc.combine(per_piece.integrate(&mut f, w[0], w[1]))
        })
    }

    /// Integrate over `[a, inf)` through the substitution `x = a / u`.
    ///
    /// The integrand must decay faster than `1/x` so that the transformed
    /// integrand vanishes at `u = 0`.
    pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64) -> Estimate {
        assert!(a > 0.0, "tail integration needs a positive lower limit");
        self.integrate(
            |u| {
                let x = a / u;
                let v = f(x) * a / (u * u);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
        )
    }
}

/// Sort, drop non-finite or out-of-range points and merge near-duplicates.
pub(crate) fn breakpoints(mut points: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    points.retain(|p| p.is_finite() && *p > lo && *p < hi);
    points.push(lo);
    points.push(hi);
    points.sort_by(f64::total_cmp);
    let scale = (hi - lo).abs().max(1.0);
    points.dedup_by(|b, a| (*b - *a).abs() <= 1e-12 * scale);
    points
}
