//! Periodic geometry and homogeneous Poisson clouds.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::seeds;
use crate::{Error, Result};

/// Volume of the `d`-dimensional ball of radius `r`.
pub fn ball_volume(d: usize, r: f64) -> f64 {
    let half = d as f64 / 2.0;
    PI.powf(half) * r.powi(d as i32) / gamma(half + 1.0)
}

/// Surface area of the unit sphere in `R^d` (the `(d-1)`-sphere). `sphere_area(1) == 2`.
pub fn sphere_area(d: usize) -> f64 {
    d as f64 * ball_volume(d, 1.0)
}

/// The box `[0, side)^d` with opposite faces identified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Torus {
    d: usize,
    side: f64,
}

/// How a torus size is given in a configuration file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// `value` is the d-dimensional volume (area when `d = 2`).
    Area,
    /// `value` is the side length.
    Side,
}

/// Configuration form of a torus: `{"d": 2, "measure": "area", "value": 1000}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    pub d: usize,
    pub measure: Measure,
    pub value: f64,
}

impl TorusSpec {
    pub fn area(d: usize, value: f64) -> Self {
        TorusSpec {
            d,
            measure: Measure::Area,
            value,
        }
    }

    pub fn resolve(&self) -> Result<Torus> {
        let side = match self.measure {
            Measure::Side => self.value,
            Measure::Area => self.value.powf(1.0 / self.d.max(1) as f64),
        };
        Torus::new(self.d, side)
    }
}

impl Torus {
    pub fn new(d: usize, side: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("torus dimension must be at least 1"));
        }
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::domain(format!("torus side must be positive, got {side}")));
        }
        Ok(Torus { d, side })
    }

    /// Torus whose volume `side^d` equals `volume`.
    pub fn with_volume(d: usize, volume: f64) -> Result<Self> {
        TorusSpec::area(d, volume).resolve()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.d as i32)
    }

    /// Minimum-image displacement `b - a` per coordinate, each in `[-L/2, L/2]`.
    #[inline]
    pub fn displacement(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        let half = 0.5 * self.side;
        for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
            let mut delta = y - x;
            if delta > half {
                delta -= self.side;
            } else if delta < -half {
                delta += self.side;
            }
            *o = delta;
        }
    }

    /// Squared periodic distance without argument checks.
    #[inline]
    pub fn distance_sq(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let delta = (x - y).abs();
                let delta = delta.min(self.side - delta);
                delta * delta
            })
            .sum()
    }

    /// Periodic Euclidean distance between two points of the torus.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != self.d || b.len() != self.d {
            return Err(Error::domain(format!(
                "points of dimension {} and {} on a {}-dimensional torus",
                a.len(),
                b.len(),
                self.d
            )));
        }
        Ok(self.distance_sq(a, b).sqrt())
    }

    /// Map an arbitrary coordinate into `[0, L)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let w = x.rem_euclid(self.side);
        if w >= self.side {
            0.0
        } else {
            w
        }
    }
}

/// Which Poisson process a cloud belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Vertex,
    Group,
}

/// A finite configuration of points on a torus.
///
/// Positions are stored row-major, `d` coordinates per point. The first
/// `planted` points were inserted deterministically (Palm points); the
/// rest were sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    role: Role,
    torus: Torus,
    intensity: f64,
    seed: Option<u64>,
    planted: usize,
    positions: Vec<f64>,
}

impl PointCloud {
    /// Build a cloud from explicit positions. Coordinates are wrapped into the torus.
    pub fn from_points(role: Role, torus: Torus, points: &[Vec<f64>]) -> Result<Self> {
        let mut positions = Vec::with_capacity(points.len() * torus.d);
        for p in points {
            if p.len() != torus.d {
                return Err(Error::domain(format!(
                    "point of dimension {} on a {}-dimensional torus",
                    p.len(),
                    torus.d
                )));
            }
            positions.extend(p.iter().map(|&x| torus.wrap(x)));
        }
        Ok(PointCloud {
            role,
            torus,
            intensity: 0.0,
            seed: None,
            planted: 0,
            positions,
        })
    }

    pub fn empty(role: Role, torus: Torus) -> Self {
        PointCloud {
            role,
            torus,
            intensity: 0.0,
            seed: None,
            planted: 0,
            positions: Vec::new(),
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Number of deterministically inserted points at the front.
    pub fn planted(&self) -> usize {
        self.planted
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.torus.d
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.torus.d;
        &self.positions[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.positions.chunks_exact(self.torus.d)
    }

    /// Prepend distinguished points, which get indices `0..points.len()`.
    pub fn with_planted(&self, points: &[Vec<f64>]) -> Result<Self> {
        let extra = PointCloud::from_points(self.role, self.torus, points)?;
        let mut positions = extra.positions;
        positions.extend_from_slice(&self.positions);
        Ok(PointCloud {
            planted: self.planted + points.len(),
            positions,
            ..self.clone()
        })
    }

    /// One row per point: `index,x1,...,xd`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index");
        for k in 1..=self.torus.d {
            let _ = write!(out, ",x{k}");
        }
        out.push('\n');
        for (i, p) in self.points().enumerate() {
            let _ = write!(out, "{i}");
            for x in p {
                let _ = write!(out, ",{x}");
            }
            out.push('\n');
        }
        out
    }
}

/// Sample a homogeneous Poisson cloud of the given intensity.
///
/// The point count is drawn first from `Poisson(intensity * volume)`, then
/// the positions as i.i.d. uniforms, all from the stream seeded by `seed`.
pub fn sample_poisson(torus: &Torus, role: Role, intensity: f64, seed: u64) -> Result<PointCloud> {
    if !(intensity >= 0.0 && intensity.is_finite()) {
        return Err(Error::domain(format!(
            "intensity must be non-negative, got {intensity}"
        )));
    }
    let mut rng = seeds::stream(seed);
    let mean = intensity * torus.volume();
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::domain(format!("poisson mean {mean}: {e}")))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let side = torus.side;
    let positions = (0..count * torus.d)
        .map(|_| rng.gen_range(0.0..side))
        .collect();
    Ok(PointCloud {
        role,
        torus: *torus,
        intensity,
        seed: Some(seed),
        planted: 0,
        positions,
    })
}

/// The Palm version of a vertex cloud: the same cloud with an added point at
/// the origin, which becomes index 0.
pub fn palm_insert(cloud: &PointCloud) -> Result<PointCloud> {
    if cloud.role != Role::Vertex {
        return Err(Error::domain("Palm insertion applies to vertex clouds only"));
    }
    cloud.with_planted(&[vec![0.0; cloud.torus.d]])
}
