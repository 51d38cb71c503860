use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{PointCloud, Role, Torus};
use crate::kernels::KernelSpec;
use crate::seeds;
use crate::{Error, Result};

/// `Auto` builds exactly when `|V| * |U|` is at most this.
pub const AUTO_EXACT_PAIRS: usize = 10_000_000;

/// How candidate vertex-group pairs are enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BuildMode {
    /// Every pair, vertex-major then group-minor.
    Exact,
    /// Grid-indexed; pairs farther apart than the truncation radius are skipped.
    Truncated { eps_tail: f64 },
    /// `Exact` for small instances, `Truncated { eps_tail }` above [`AUTO_EXACT_PAIRS`].
    Auto { eps_tail: f64 },
}

impl Default for BuildMode {
    fn default() -> Self {
        BuildMode::Auto { eps_tail: 1e-6 }
    }
}

impl BuildMode {
    /// The concrete mode used for `pairs` candidate pairs.
    pub fn resolve(self, pairs: usize) -> BuildMode {
        match self {
            BuildMode::Auto { eps_tail } if pairs > AUTO_EXACT_PAIRS => BuildMode::Truncated { eps_tail },
            BuildMode::Auto { .. } => BuildMode::Exact,
            other => other,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub mode: BuildMode,
    /// Seed of the membership stream.
    pub seed: u64,
}

impl BuildOptions {
    pub fn new(mode: BuildMode, seed: u64) -> Self {
        BuildOptions { mode, seed }
    }

    pub fn exact(seed: u64) -> Self {
        BuildOptions::new(BuildMode::Exact, seed)
    }
}

/// Memberships of vertices in groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    vertex_count: usize,
    group_count: usize,
    memberships: Vec<Vec<usize>>,
    /// Options with the mode resolved (never `Auto`).
    build_options: BuildOptions,
}

impl BipartiteGraph {
    /// Assemble from explicit membership lists; each list is sorted and deduplicated.
    pub fn from_memberships(group_count: usize, mut memberships: Vec<Vec<usize>>, build_options: BuildOptions) -> Result<Self> {
        for list in &mut memberships {
            list.sort_unstable();
            list.dedup();
            if let Some(&u) = list.last() {
                if u >= group_count {
                    return Err(Error::domain(format!(
                        "group index {u} out of range for {group_count} groups"
                    )));
                }
            }
        }
        Ok(BipartiteGraph {
            vertex_count: memberships.len(),
            group_count,
            memberships,
            build_options,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn group_count(&self) -> usize {
        self.group_count
    }

    pub fn build_options(&self) -> BuildOptions {
        self.build_options
    }

    /// Sorted groups of vertex `v`.
    pub fn memberships(&self, v: usize) -> &[usize] {
        &self.memberships[v]
    }

    pub fn all_memberships(&self) -> &[Vec<usize>] {
        &self.memberships
    }

    pub fn membership_count(&self) -> usize {
        self.memberships.iter().map(Vec::len).sum()
    }

    /// Number of groups shared by vertices `a` and `b`.
    pub fn shared_groups(&self, a: usize, b: usize) -> usize {
        let (x, y) = (&self.memberships[a], &self.memberships[b]);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    /// Sorted member lists per group.
    pub fn group_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.group_count];
        for (v, list) in self.memberships.iter().enumerate() {
            for &u in list {
                members[u].push(v);
            }
        }
        members
    }
}

/// Connect each vertex-group pair independently with probability `g(|v - u|)`.
///
/// Membership uniforms come from one stream seeded by `options.seed`; a pair
/// with `g = 0` consumes no uniform. Exact mode visits pairs vertex-major.
/// Truncated mode buckets groups on a grid whose cells are at least the
/// truncation radius wide and visits, per vertex, the nearby groups in
/// increasing index order. Both are seed-deterministic but they consume the
/// stream differently, so they do not agree bitwise.
pub fn build_bipartite(
    vertices: &PointCloud,
    groups: &PointCloud,
    spec: &KernelSpec,
    torus: &Torus,
    options: BuildOptions,
) -> Result<BipartiteGraph> {
    if vertices.role() != Role::Vertex || groups.role() != Role::Group {
        return Err(Error::domain("expected a vertex cloud and a group cloud"));
    }
    if vertices.torus() != torus || groups.torus() != torus {
        return Err(Error::domain("point clouds live on a different torus"));
    }
    if spec.dim() != torus.dim() {
        return Err(Error::domain(format!(
            "{}-dimensional kernel on a {}-dimensional torus",
            spec.dim(),
            torus.dim()
        )));
    }
    let mode = options.mode.resolve(vertices.len().saturating_mul(groups.len()));
    let resolved = BuildOptions { mode, ..options };
    let mut rng = seeds::stream(options.seed);
    let mut memberships = Vec::with_capacity(vertices.len());

    match mode {
        BuildMode::Exact | BuildMode::Auto { .. } => {
            for v in vertices.points() {
                let mut list = Vec::new();
                for (j, u) in groups.points().enumerate() {
                    let g = spec.value_sq(torus.distance_sq(v, u));
                    if g > 0.0 && rng.gen::<f64>() < g {
                        list.push(j);
                    }
                }
                memberships.push(list);
            }
        }
        BuildMode::Truncated { eps_tail } => {
            let radius = truncation_radius(spec, eps_tail)?;
            if radius > 0.0 && !groups.is_empty() {
                let grid = Grid::new(torus, groups, radius);
                let r2 = radius * radius;
                let mut candidates = Vec::new();
                for v in vertices.points() {
                    grid.candidates(v, &mut candidates);
                    let mut list = Vec::new();
                    for &j in &candidates {
                        let t2 = torus.distance_sq(v, groups.point(j));
                        if t2 > r2 {
                            continue;
                        }
                        let g = spec.value_sq(t2);
                        if g > 0.0 && rng.gen::<f64>() < g {
                            list.push(j);
                        }
                    }
                    memberships.push(list);
                }
            } else {
                memberships.resize(vertices.len(), Vec::new());
            }
        }
    }

    Ok(BipartiteGraph {
        vertex_count: vertices.len(),
        group_count: groups.len(),
        memberships,
        build_options: resolved,
    })
}

/// The exact support when it is finite, otherwise the `eps_tail` truncation radius.
fn truncation_radius(spec: &KernelSpec, eps_tail: f64) -> Result<f64> {
    if spec.has_bounded_support() {
        return Ok(spec.support());
    }
    if eps_tail == 0.0 {
        return Err(Error::config(format!(
            "truncated build of a {} kernel with unbounded support needs eps_tail > 0",
            spec.family_name()
        )));
    }
    spec.support_radius(eps_tail)
}

/// Uniform cell index over group positions.
struct Grid {
    d: usize,
    per_dim: usize,
    cell_width: f64,
    /// CSR layout: groups in cell `c` are `items[starts[c]..starts[c + 1]]`.
    starts: Vec<usize>,
    items: Vec<usize>,
    offsets: Vec<Vec<isize>>,
}

impl Grid {
    fn new(torus: &Torus, groups: &PointCloud, radius: f64) -> Self {
        let d = torus.dim();
        // Cells at least `radius` wide, and no more cells than a few per group.
        let cap = ((4 * groups.len()).max(1) as f64).powf(1.0 / d as f64).floor().max(1.0);
        let per_dim = (torus.side() / radius).floor().clamp(1.0, cap) as usize;
        let cell_width = torus.side() / per_dim as f64;
        let n_cells = per_dim.pow(d as u32);

        let mut grid = Grid {
            d,
            per_dim,
            cell_width,
            starts: vec![0; n_cells + 1],
            items: vec![0; groups.len()],
            offsets: Vec::new(),
        };
        let cells: Vec<usize> = groups.points().map(|p| grid.cell_of(p)).collect();
        for &c in &cells {
            grid.starts[c + 1] += 1;
        }
        for c in 0..n_cells {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        for (j, &c) in cells.iter().enumerate() {
            grid.items[fill[c]] = j;
            fill[c] += 1;
        }
        grid.offsets = neighbour_offsets(d);
        grid
    }

    fn coord(&self, x: f64) -> usize {
        ((x / self.cell_width) as usize).min(self.per_dim - 1)
    }

    fn cell_of(&self, p: &[f64]) -> usize {
        p.iter().rev().fold(0, |acc, &x| acc * self.per_dim + self.coord(x))
    }

    /// Sorted, deduplicated group indices in the cells around `p`.
    fn candidates(&self, p: &[f64], out: &mut Vec<usize>) {
        out.clear();
        let n = self.per_dim as isize;
        let home: Vec<isize> = p.iter().map(|&x| self.coord(x) as isize).collect();
        let mut cells: Vec<usize> = self
            .offsets
            .iter()
            .map(|off| {
                (0..self.d)
                    .rev()
                    .fold(0, |acc, k| acc * self.per_dim + (home[k] + off[k]).rem_euclid(n) as usize)
            })
            .collect();
        cells.sort_unstable();
        cells.dedup();
        for c in cells {
            out.extend_from_slice(&self.items[self.starts[c]..self.starts[c + 1]]);
        }
        out.sort_unstable();
    }
}

/// All of `{-1, 0, 1}^d`.
fn neighbour_offsets(d: usize) -> Vec<Vec<isize>> {
    let mut all = vec![Vec::new()];
    for _ in 0..d {
        all = all
            .into_iter()
            .flat_map(|prefix| {
                [-1, 0, 1].into_iter().map(move |o| {
                    let mut next = prefix.clone();
                    next.push(o);
                    next
                })
            })
            .collect();
    }
    all
}
