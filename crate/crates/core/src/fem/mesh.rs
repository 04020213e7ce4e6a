use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Triangles with signed area below this are rejected.
pub const MIN_TRIANGLE_AREA: f64 = 1e-14;
/// Nodes closer than this (in both coordinates) count as duplicates.
pub const DUPLICATE_NODE_TOLERANCE: f64 = 1e-12;
/// Finest level accepted by [`make_disc_mesh`].
pub const MAX_DISC_LEVEL: u32 = 8;

/// Planar triangulation with a single closed boundary curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_loop: Vec<usize>,
}

fn signed_area(nodes: &[[f64; 2]], t: [usize; 3]) -> f64 {
    let [a, b, c] = t.map(|i| nodes[i]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn undirected(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Validates and normalizes a triangulation.
    ///
    /// Clockwise triangles are flipped. `boundary_edges` has to list exactly
    /// the edges owned by a single triangle, chained into one closed loop; the
    /// loop is stored counterclockwise.
    pub fn new(
        nodes: Vec<[f64; 2]>,
        mut triangles: Vec<[usize; 3]>,
        boundary_edges: &[[usize; 2]],
    ) -> Result<Self> {
        let n = nodes.len();
        if nodes.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("mesh node coordinates"));
        }
        check_duplicates(&nodes)?;
        for (index, t) in triangles.iter_mut().enumerate() {
            if let Some(&bad) = t.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {index} references node {bad}, but there are {n} nodes"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::DegenerateTriangle { index, area: 0.0 });
            }
            let mut area = signed_area(&nodes, *t);
            if area < 0.0 {
                t.swap(1, 2);
                area = -area;
            }
            if area < MIN_TRIANGLE_AREA {
                return Err(Error::DegenerateTriangle { index, area });
            }
        }
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no triangles".into()));
        }

        let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for t in &triangles {
            for k in 0..3 {
                *edge_count.entry(undirected(t[k], t[(k + 1) % 3])).or_default() += 1;
            }
        }
        if let Some((e, c)) = edge_count.iter().find(|(_, &c)| c > 2) {
            return Err(Error::InvalidMesh(format!(
                "edge {e:?} is shared by {c} triangles"
            )));
        }
        let mut declared = BTreeMap::new();
        for (k, &[a, b]) in boundary_edges.iter().enumerate() {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidMesh(format!("boundary edge {k} = ({a}, {b}) is invalid")));
            }
            match edge_count.get(&undirected(a, b)) {
                Some(1) => {}
                Some(_) => {
                    return Err(Error::InvalidMesh(format!(
                        "boundary edge ({a}, {b}) is interior"
                    )))
                }
                None => {
                    return Err(Error::InvalidMesh(format!(
                        "boundary edge ({a}, {b}) belongs to no triangle"
                    )))
                }
            }
            if declared.insert(undirected(a, b), ()).is_some() {
                return Err(Error::InvalidMesh(format!("boundary edge ({a}, {b}) listed twice")));
            }
        }
        let owned_once = edge_count.values().filter(|&&c| c == 1).count();
        if owned_once != declared.len() {
            return Err(Error::InvalidMesh(format!(
                "{owned_once} edges belong to a single triangle but {} boundary edges were given",
                declared.len()
            )));
        }
        let boundary_loop = chain_loop(&nodes, declared.keys().copied().collect())?;
        Ok(Self {
            nodes,
            triangles,
            boundary_loop,
        })
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Boundary node indices in counterclockwise order, first node not repeated.
    pub fn boundary_loop(&self) -> &[usize] {
        &self.boundary_loop
    }

    /// Oriented edges `(loop[i], loop[i+1])` of the closed boundary.
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        let l = &self.boundary_loop;
        (0..l.len()).map(|i| [l[i], l[(i + 1) % l.len()]]).collect()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn boundary_node_count(&self) -> usize {
        self.boundary_loop.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.nodes, self.triangles[t])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Length of the longest edge.
    pub fn max_edge_length(&self) -> f64 {
        let len = |a: usize, b: usize| {
            let (p, q) = (self.nodes[a], self.nodes[b]);
            libm::hypot(p[0] - q[0], p[1] - q[1])
        };
        self.triangles
            .iter()
            .flat_map(|t| [len(t[0], t[1]), len(t[1], t[2]), len(t[2], t[0])])
            .fold(0.0, f64::max)
    }
}

fn check_duplicates(nodes: &[[f64; 2]]) -> Result<()> {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| nodes[a][0].total_cmp(&nodes[b][0]));
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if nodes[j][0] - nodes[i][0] > DUPLICATE_NODE_TOLERANCE {
                break;
            }
            if (nodes[j][1] - nodes[i][1]).abs() <= DUPLICATE_NODE_TOLERANCE {
                return Err(Error::InvalidMesh(format!(
                    "nodes {} and {} coincide",
                    i.min(j),
                    i.max(j)
                )));
            }
        }
    }
    Ok(())
}

/// Orders the boundary edges into one counterclockwise cycle.
fn chain_loop(nodes: &[[f64; 2]], edges: Vec<(usize, usize)>) -> Result<Vec<usize>> {
    if edges.len() < 3 {
        return Err(Error::InvalidMesh("boundary has fewer than 3 edges".into()));
    }
    let mut adjacent: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in &edges {
        adjacent.entry(a).or_default().push(b);
        adjacent.entry(b).or_default().push(a);
    }
    if let Some((v, nb)) = adjacent.iter().find(|(_, nb)| nb.len() != 2) {
        return Err(Error::InvalidMesh(format!(
            "boundary node {v} has {} boundary neighbours",
            nb.len()
        )));
    }
    let start = edges[0].0;
    let mut cycle = vec![start];
    let mut prev = start;
    let mut cur = adjacent[&start][0];
    while cur != start {
        cycle.push(cur);
        let nb = &adjacent[&cur];
        let next = if nb[0] == prev { nb[1] } else { nb[0] };
        prev = cur;
        cur = next;
        if cycle.len() > edges.len() {
            break;
        }
    }
    if cycle.len() != edges.len() {
        return Err(Error::InvalidMesh(format!(
            "boundary splits into several loops ({} of {} edges reachable)",
            cycle.len(),
            edges.len()
        )));
    }
    let shoelace: f64 = (0..cycle.len())
        .map(|i| {
            let (p, q) = (nodes[cycle[i]], nodes[cycle[(i + 1) % cycle.len()]]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum();
    if shoelace < 0.0 {
        cycle[1..].reverse();
    }
    Ok(cycle)
}

/// Number of rings of the disc mesh at `level`.
pub fn disc_rings(level: u32) -> usize {
    4 << (level - 1)
}

/// Concentric-ring triangulation of the unit disc.
///
/// Ring `k = 0..=K` sits at radius `k/K` and carries `6k` equally spaced
/// nodes (one node at the center), `K = 4·2^(level−1)`. Neighbouring rings are
/// stitched by merging their nodes in angular order.
pub fn make_disc_mesh(level: u32) -> Result<Mesh> {
    if level == 0 || level > MAX_DISC_LEVEL {
        return Err(Error::InvalidMesh(format!(
            "disc level {level} outside 1..={MAX_DISC_LEVEL}"
        )));
    }
    let rings = disc_rings(level);
    let first = |k: usize| if k == 0 { 0 } else { 1 + 3 * k * (k - 1) };
    let mut nodes = Vec::with_capacity(first(rings + 1));
    nodes.push([0.0, 0.0]);
    for k in 1..=rings {
        let r = k as f64 / rings as f64;
        let count = 6 * k;
        for i in 0..count {
            let phi = 2.0 * PI * i as f64 / count as f64;
            nodes.push([r * libm::cos(phi), r * libm::sin(phi)]);
        }
    }

    let mut triangles = Vec::with_capacity(6 * rings * rings);
    for i in 0..6 {
        triangles.push([0, 1 + i, 1 + (i + 1) % 6]);
    }
    for k in 2..=rings {
        let (outer, inner) = (first(k), first(k - 1));
        let (no, ni) = (6 * k, 6 * (k - 1));
        let (mut i, mut j) = (0, 0);
        while i < no || j < ni {
            // compare the angles (i+1)/no and (j+1)/ni of the next nodes
            let advance_outer = j == ni || (i < no && (i + 1) * (k - 1) <= (j + 1) * k);
            if advance_outer {
                triangles.push([outer + i, outer + (i + 1) % no, inner + j % ni]);
                i += 1;
            } else {
                triangles.push([outer + i % no, inner + (j + 1) % ni, inner + j]);
                j += 1;
            }
        }
    }

    let boundary = first(rings);
    let count = 6 * rings;
    let edges: Vec<[usize; 2]> = (0..count)
        .map(|i| [boundary + i, boundary + (i + 1) % count])
        .collect();
    Mesh::new(nodes, triangles, &edges)
}
