//! Procedural test shapes.
//!
//! Figures are smooth unions of tapered capsules, meshed once by marching
//! tetrahedra on a lattice mirrored about `x = 0` and then posed by rotating
//! limbs about their joints. Poses of one figure at one resolution share
//! vertex indexing, so the identity map is an exact ground truth.

use std::collections::HashMap;

use crate::geom::io::RawGeometry;
use crate::geom::{cross, distance, dot, norm, sub, NearestVertexIndex, Point3, Shape};

/// Geodesic sphere with `10 f² + 2` vertices.
pub fn icosphere_geometry(freq: usize) -> RawGeometry {
    assert!(freq >= 1, "frequency must be positive");
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let base: [Point3; 12] = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let faces: [[usize; 3]; 20] = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    // lattice points keyed by their sorted (corner, weight) pairs so shared
    // edges and corners are created once
    let mut index: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
    let mut positions: Vec<Point3> = Vec::new();
    let mut triangles = Vec::with_capacity(20 * freq * freq);
    let f = freq;
    for face in &faces {
        let mut lattice = vec![vec![0usize; f + 1]; f + 1];
        for i in 0..=f {
            for j in 0..=(f - i) {
                let w = [f - i - j, i, j];
                let mut key: Vec<(usize, usize)> = face
                    .iter()
                    .zip(w)
                    .filter(|&(_, w)| w > 0)
                    .map(|(&v, w)| (v, w))
                    .collect();
                key.sort_unstable();
                let id = *index.entry(key.clone()).or_insert_with(|| {
                    let mut p = [0.0; 3];
                    for &(v, w) in &key {
                        for c in 0..3 {
                            p[c] += w as f64 * base[v][c];
                        }
                    }
                    let len = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                    positions.push([p[0] / len, p[1] / len, p[2] / len]);
                    positions.len() - 1
                });
                lattice[i][j] = id;
            }
        }
        for i in 0..f {
            for j in 0..(f - i) {
                triangles.push([lattice[i][j], lattice[i + 1][j], lattice[i][j + 1]]);
                if i + j + 1 < f {
                    triangles.push([lattice[i + 1][j], lattice[i + 1][j + 1], lattice[i][j + 1]]);
                }
            }
        }
    }
    RawGeometry {
        positions,
        triangles,
    }
}

pub fn icosphere(freq: usize) -> Shape {
    let g = icosphere_geometry(freq);
    Shape::mesh(g.positions, g.triangles).expect("icosphere is a valid mesh")
}

/// Flat `nx × ny` vertex grid with unit spacing, two triangles per cell.
pub fn grid_geometry(nx: usize, ny: usize) -> RawGeometry {
    assert!(nx >= 2 && ny >= 2);
    let positions = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| [i as f64, j as f64, 0.0]))
        .collect();
    let mut triangles = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let v = j * nx + i;
            triangles.push([v, v + 1, v + nx + 1]);
            triangles.push([v, v + nx + 1, v + nx]);
        }
    }
    RawGeometry {
        positions,
        triangles,
    }
}

pub fn grid(nx: usize, ny: usize) -> Shape {
    let g = grid_geometry(nx, ny);
    Shape::mesh(g.positions, g.triangles).expect("grid is a valid mesh")
}

/// Capsule whose radius varies linearly from `a` to `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub a: Point3,
    pub b: Point3,
    pub radius_a: f64,
    pub radius_b: f64,
}

impl Capsule {
    pub fn new(a: Point3, b: Point3, radius_a: f64, radius_b: f64) -> Self {
        Capsule {
            a,
            b,
            radius_a,
            radius_b,
        }
    }

    pub fn sphere(center: Point3, radius: f64) -> Self {
        Capsule::new(center, center, radius, radius)
    }

    /// Approximate signed distance, negative inside.
    pub fn field(&self, p: &Point3) -> f64 {
        let ab = sub(&self.b, &self.a);
        let ap = sub(p, &self.a);
        let len2 = dot(&ab, &ab);
        let t = if len2 > 0.0 {
            (dot(&ap, &ab) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let q = [ap[0] - t * ab[0], ap[1] - t * ab[1], ap[2] - t * ab[2]];
        norm(&q) - (self.radius_a + t * (self.radius_b - self.radius_a))
    }

    fn bounds(&self) -> (Point3, Point3) {
        let r = self.radius_a.max(self.radius_b);
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for k in 0..3 {
            lo[k] = self.a[k].min(self.b[k]) - r;
            hi[k] = self.a[k].max(self.b[k]) + r;
        }
        (lo, hi)
    }
}

/// Polynomial smooth minimum with blend radius `k`.
fn smooth_min(a: f64, b: f64, k: f64) -> f64 {
    let h = (k - (a - b).abs()).max(0.0) / k;
    a.min(b) - h * h * k * 0.25
}

/// Smooth union of capsules.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub parts: Vec<Capsule>,
    pub blend: f64,
}

impl Figure {
    pub fn field(&self, p: &Point3) -> f64 {
        // folding in sorted order makes the union independent of part order,
        // so mirrored parts give an exactly mirrored field
        let mut d: Vec<f64> = self.parts.iter().map(|c| c.field(p)).collect();
        d.sort_by(f64::total_cmp);
        d.into_iter()
            .reduce(|acc, x| smooth_min(acc, x, self.blend))
            .unwrap_or(f64::INFINITY)
    }

    fn gradient(&self, p: &Point3) -> Point3 {
        let e = 1e-5;
        let mut g = [0.0; 3];
        for k in 0..3 {
            let mut hi = *p;
            let mut lo = *p;
            hi[k] += e;
            lo[k] -= e;
            g[k] = (self.field(&hi) - self.field(&lo)) / (2.0 * e);
        }
        g
    }

    /// Newton steps along the gradient onto the zero level set.
    fn project(&self, p: &mut Point3) {
        for _ in 0..4 {
            let f = self.field(p);
            let g = self.gradient(p);
            let g2 = dot(&g, &g);
            if g2 < 1e-20 {
                return;
            }
            for k in 0..3 {
                p[k] -= f * g[k] / g2;
            }
            if f.abs() < 1e-12 {
                return;
            }
        }
    }

    /// Bounding box padded by `pad`, symmetric in `x`.
    fn bounds(&self, pad: f64) -> (Point3, Point3) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for c in &self.parts {
            let (l, h) = c.bounds();
            for k in 0..3 {
                lo[k] = lo[k].min(l[k]);
                hi[k] = hi[k].max(h[k]);
            }
        }
        let x = lo[0].abs().max(hi[0].abs());
        lo[0] = -x;
        hi[0] = x;
        for k in 0..3 {
            lo[k] -= pad;
            hi[k] += pad;
        }
        (lo, hi)
    }
}

/// The six tetrahedra of a Kuhn split of the unit cube, as corner bit masks
/// (`1` = x, `2` = y, `4` = z).
fn kuhn_tets() -> [[usize; 4]; 6] {
    let mut tets = [[0; 4]; 6];
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for (t, p) in tets.iter_mut().zip(perms) {
        let mut v = 0;
        t[0] = 0;
        for (s, axis) in p.iter().enumerate() {
            v |= 1 << axis;
            t[s + 1] = v;
        }
    }
    tets
}

/// Surface vertex on lattice edge `a`-`b`, shared by every tetrahedron using it.
fn crossing(
    edge_vertex: &mut HashMap<(usize, usize), usize>,
    positions: &mut Vec<Point3>,
    values: &[f64],
    a: (usize, Point3),
    b: (usize, Point3),
) -> usize {
    let key = (a.0.min(b.0), a.0.max(b.0));
    *edge_vertex.entry(key).or_insert_with(|| {
        let (fa, fb) = (values[a.0], values[b.0]);
        let t = (fa / (fa - fb)).clamp(0.02, 0.98);
        positions.push([
            a.1[0] + t * (b.1[0] - a.1[0]),
            a.1[1] + t * (b.1[1] - a.1[1]),
            a.1[2] + t * (b.1[2] - a.1[2]),
        ]);
        positions.len() - 1
    })
}

/// Triangulates the zero level set of `field` (negative inside) over a lattice
/// with the given spacing. Lattice and tetrahedral split are mirror symmetric
/// about `x = 0`. Crossing points stay at least 2% of an edge from lattice
/// nodes, which keeps triangles away from degeneracy.
pub fn marching_tetrahedra(
    field: impl Fn(&Point3) -> f64,
    lo: Point3,
    hi: Point3,
    spacing: f64,
) -> RawGeometry {
    assert!(spacing > 0.0);
    // odd node count in x puts a lattice plane on x = 0
    let mut half_x = ((hi[0].max(-lo[0])) / spacing).ceil() as usize;
    half_x = half_x.max(1);
    let nx = 2 * half_x + 1;
    let ny = ((hi[1] - lo[1]) / spacing).ceil() as usize + 1;
    let nz = ((hi[2] - lo[2]) / spacing).ceil() as usize + 1;
    let node_pos = |i: usize, j: usize, k: usize| -> Point3 {
        [
            (i as f64 - half_x as f64) * spacing,
            lo[1] + j as f64 * spacing,
            lo[2] + k as f64 * spacing,
        ]
    };
    let id = |i: usize, j: usize, k: usize| i + nx * (j + ny * k);
    let mut values = vec![0.0; nx * ny * nz];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let f = field(&node_pos(i, j, k));
                // zero counts as outside
                values[id(i, j, k)] = if f.abs() < 1e-9 * spacing { 1e-9 * spacing } else { f };
            }
        }
    }

    let tets = kuhn_tets();
    let mut edge_vertex: HashMap<(usize, usize), usize> = HashMap::new();
    let mut positions: Vec<Point3> = Vec::new();
    let mut triangles = Vec::new();

    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let corner = |bits: usize| {
                    let (di, dj, dk) = (bits & 1, (bits >> 1) & 1, (bits >> 2) & 1);
                    (i + di, j + dj, k + dk)
                };
                let ids: Vec<usize> = (0..8)
                    .map(|b| {
                        let (a, b2, c) = corner(b);
                        id(a, b2, c)
                    })
                    .collect();
                let inside = ids.iter().filter(|&&v| values[v] < 0.0).count();
                if inside == 0 || inside == 8 {
                    continue;
                }
                // cells left of the mirror plane use the mirrored split
                let mirrored = 2 * i + 1 < nx - 1;
                for tet in &tets {
                    let verts: Vec<(usize, Point3)> = tet
                        .iter()
                        .map(|&bits| {
                            let bits = if mirrored { bits ^ 1 } else { bits };
                            let (a, b, c) = corner(bits);
                            (id(a, b, c), node_pos(a, b, c))
                        })
                        .collect();
                    let (ins, outs): (Vec<_>, Vec<_>) =
                        verts.iter().partition(|v| values[v.0] < 0.0);
                    if ins.is_empty() || outs.is_empty() {
                        continue;
                    }
                    let centroid = |s: &[&(usize, Point3)]| {
                        let mut c = [0.0; 3];
                        for v in s {
                            for x in 0..3 {
                                c[x] += v.1[x] / s.len() as f64;
                            }
                        }
                        c
                    };
                    let outward = sub(&centroid(&outs), &centroid(&ins));
                    let mut emit = |tri: [usize; 3], positions: &Vec<Point3>| {
                        let n = cross(
                            &sub(&positions[tri[1]], &positions[tri[0]]),
                            &sub(&positions[tri[2]], &positions[tri[0]]),
                        );
                        if dot(&n, &outward) >= 0.0 {
                            triangles.push(tri);
                        } else {
                            triangles.push([tri[0], tri[2], tri[1]]);
                        }
                    };
                    match (ins.len(), outs.len()) {
                        (1, 3) | (3, 1) => {
                            let (single, others) = if ins.len() == 1 { (ins[0], &outs) } else { (outs[0], &ins) };
                            let tri = [
                                crossing(&mut edge_vertex, &mut positions, &values, *single, *others[0]),
                                crossing(&mut edge_vertex, &mut positions, &values, *single, *others[1]),
                                crossing(&mut edge_vertex, &mut positions, &values, *single, *others[2]),
                            ];
                            emit(tri, &positions);
                        }
                        _ => {
                            let (a, b, c, d) = (*ins[0], *ins[1], *outs[0], *outs[1]);
                            let ac = crossing(&mut edge_vertex, &mut positions, &values, a, c);
                            let ad = crossing(&mut edge_vertex, &mut positions, &values, a, d);
                            let bd = crossing(&mut edge_vertex, &mut positions, &values, b, d);
                            let bc = crossing(&mut edge_vertex, &mut positions, &values, b, c);
                            // quad ac-ad-bd-bc, split along the shorter diagonal
                            let d1 = distance(&positions[ac], &positions[bd]);
                            let d2 = distance(&positions[ad], &positions[bc]);
                            if d1 <= d2 {
                                emit([ac, ad, bd], &positions);
                                emit([ac, bd, bc], &positions);
                            } else {
                                emit([ad, bd, bc], &positions);
                                emit([ad, bc, ac], &positions);
                            }
                        }
                    }
                }
            }
        }
    }
    RawGeometry {
        positions,
        triangles,
    }
}

/// Umbrella smoothing interleaved with projection back onto the surface.
fn relax_onto(figure: &Figure, g: &mut RawGeometry, iterations: usize) {
    let n = g.positions.len();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in &g.triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
    }
    for nb in &mut neighbors {
        nb.sort_unstable();
        nb.dedup();
    }
    // rounding in the projection breaks the mirror symmetry slowly; restore it
    let mirror = mirror_map(&g.positions);
    let symmetrize = |pos: &mut Vec<Point3>| {
        for v in 0..pos.len() {
            let m = mirror[v];
            if m == v {
                pos[v][0] = 0.0;
            } else if v < m {
                let q = pos[v];
                pos[m] = [-q[0], q[1], q[2]];
            }
        }
    };
    for p in &mut g.positions {
        figure.project(p);
    }
    symmetrize(&mut g.positions);
    for _ in 0..iterations {
        let old = g.positions.clone();
        for (v, p) in g.positions.iter_mut().enumerate() {
            let nb = &neighbors[v];
            if nb.is_empty() {
                continue;
            }
            let mut avg = [0.0; 3];
            for &u in nb {
                for k in 0..3 {
                    avg[k] += old[u][k];
                }
            }
            for k in 0..3 {
                p[k] = 0.5 * old[v][k] + 0.5 * avg[k] / nb.len() as f64;
            }
            figure.project(p);
        }
        symmetrize(&mut g.positions);
    }
}

/// Meshes a figure with approximately `target_vertices` vertices.
pub fn figure_geometry(figure: &Figure, target_vertices: usize) -> RawGeometry {
    assert!(target_vertices >= 100, "too few vertices requested");
    let (lo, hi) = figure.bounds(0.0);
    let mut spacing = ((hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]) / 20_000.0).cbrt();
    // one calibration pass: vertex count scales with 1/spacing²
    for _ in 0..2 {
        let (lo, hi) = figure.bounds(2.0 * spacing);
        let g = marching_tetrahedra(|p| figure.field(p), lo, hi, spacing);
        spacing *= (g.positions.len() as f64 / target_vertices as f64).sqrt();
    }
    let (lo, hi) = figure.bounds(2.0 * spacing);
    let mut g = marching_tetrahedra(|p| figure.field(p), lo, hi, spacing);
    relax_onto(figure, &mut g, 6);
    g
}

/// Rotation of a limb about a joint, faded in across the joint. Moves applied
/// together should have disjoint regions of influence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Articulation {
    pub joint: Point3,
    /// Unit direction from the joint into the limb.
    pub direction: Point3,
    /// Unit rotation axis.
    pub axis: Point3,
    pub angle: f64,
    /// Half-width of the fade along `direction`.
    pub blend: f64,
    /// Distance from the limb axis beyond which vertices stay put.
    pub reach: f64,
}

fn smoothstep(e0: f64, e1: f64, x: f64) -> f64 {
    let t = ((x - e0) / (e1 - e0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

fn rotate(v: &Point3, axis: &Point3, angle: f64) -> Point3 {
    let (s, c) = angle.sin_cos();
    let kxv = cross(axis, v);
    let kdv = dot(axis, v);
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = v[i] * c + kxv[i] * s + axis[i] * kdv * (1.0 - c);
    }
    out
}

impl Articulation {
    pub fn apply(&self, p: &Point3) -> Point3 {
        let r = sub(p, &self.joint);
        let t = dot(&r, &self.direction);
        let perp = [
            r[0] - t * self.direction[0],
            r[1] - t * self.direction[1],
            r[2] - t * self.direction[2],
        ];
        let w = smoothstep(-self.blend, self.blend, t)
            * (1.0 - smoothstep(self.reach, 1.5 * self.reach, norm(&perp)));
        if w == 0.0 {
            return *p;
        }
        let q = rotate(&r, &self.axis, w * self.angle);
        [q[0] + self.joint[0], q[1] + self.joint[1], q[2] + self.joint[2]]
    }
}

pub fn articulate(g: &RawGeometry, moves: &[Articulation]) -> RawGeometry {
    let positions = g
        .positions
        .iter()
        .map(|p| moves.iter().fold(*p, |q, m| m.apply(&q)))
        .collect();
    RawGeometry {
        positions,
        triangles: g.triangles.clone(),
    }
}

/// Head, torso, two arms and two legs, standing along `z`, mirror symmetric
/// about `x = 0`.
pub fn humanoid_figure() -> Figure {
    let arm = |s: f64| Capsule::new([s * 0.3, 0.0, 0.42], [s * 1.9, 0.0, 0.42], 0.13, 0.09);
    let leg = |s: f64| Capsule::new([s * 0.2, 0.0, -0.35], [s * 0.34, 0.0, -1.95], 0.2, 0.14);
    Figure {
        parts: vec![
            Capsule::new([0.0, 0.0, -0.4], [0.0, 0.0, 0.45], 0.42, 0.42),
            Capsule::sphere([0.0, 0.0, 1.12], 0.3),
            arm(1.0),
            arm(-1.0),
            leg(1.0),
            leg(-1.0),
        ],
        blend: 0.12,
    }
}

/// Arms raised (positive) or lowered (negative) by `arm_raise` radians.
pub fn humanoid_pose(arm_raise: f64) -> Vec<Articulation> {
    [1.0f64, -1.0]
        .iter()
        .map(|&s| Articulation {
            joint: [s * 0.5, 0.0, 0.42],
            direction: [s, 0.0, 0.0],
            axis: [0.0, 1.0, 0.0],
            angle: -s * arm_raise,
            blend: 0.15,
            reach: 0.3,
        })
        .collect()
}

pub fn humanoid_geometry(target_vertices: usize, arm_raise: f64) -> RawGeometry {
    let rest = figure_geometry(&humanoid_figure(), target_vertices);
    articulate(&rest, &humanoid_pose(arm_raise))
}

pub fn humanoid(target_vertices: usize, arm_raise: f64) -> Shape {
    let g = humanoid_geometry(target_vertices, arm_raise);
    Shape::mesh(g.positions, g.triangles).expect("humanoid is a valid mesh")
}

/// Body along `y` with four legs, a head and a tail, mirror symmetric about
/// `x = 0`.
pub fn quadruped_figure() -> Figure {
    let leg = |sx: f64, y: f64| Capsule::new([sx * 0.26, y, -0.15], [sx * 0.3, y, -1.25], 0.15, 0.12);
    Figure {
        parts: vec![
            Capsule::new([0.0, -0.75, 0.0], [0.0, 0.75, 0.0], 0.4, 0.4),
            Capsule::sphere([0.0, 1.35, 0.4], 0.3),
            Capsule::new([0.0, -1.0, 0.1], [0.0, -1.6, 0.45], 0.16, 0.13),
            leg(1.0, 0.55),
            leg(-1.0, 0.55),
            leg(1.0, -0.55),
            leg(-1.0, -0.55),
        ],
        blend: 0.12,
    }
}

/// Front legs swing forward and hind legs back by `swing` radians.
pub fn quadruped_pose(swing: f64) -> Vec<Articulation> {
    let mut moves = Vec::new();
    for &sx in &[1.0f64, -1.0] {
        for &(y, dir) in &[(0.55f64, 1.0f64), (-0.55, -1.0)] {
            moves.push(Articulation {
                joint: [sx * 0.26, y, -0.3],
                direction: [0.0, 0.0, -1.0],
                axis: [1.0, 0.0, 0.0],
                angle: -dir * swing,
                blend: 0.12,
                reach: 0.17,
            });
        }
    }
    moves
}

pub fn quadruped_geometry(target_vertices: usize, swing: f64) -> RawGeometry {
    let rest = figure_geometry(&quadruped_figure(), target_vertices);
    articulate(&rest, &quadruped_pose(swing))
}

pub fn quadruped(target_vertices: usize, swing: f64) -> Shape {
    let g = quadruped_geometry(target_vertices, swing);
    Shape::mesh(g.positions, g.triangles).expect("quadruped is a valid mesh")
}

/// Index of each vertex's mirror image across `x = 0`.
pub fn mirror_map(positions: &[Point3]) -> Vec<usize> {
    let index = NearestVertexIndex::new(positions);
    positions.iter().map(|p| index.nearest(&[-p[0], p[1], p[2]])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::distance;

    #[test]
    fn icosphere_counts() {
        for f in [1, 2, 5, 26] {
            let g = icosphere_geometry(f);
            assert_eq!(g.positions.len(), 10 * f * f + 2);
            assert_eq!(g.triangles.len(), 20 * f * f);
        }
    }

    fn assert_closed_and_oriented(g: &RawGeometry) {
        let mut directed = HashMap::new();
        for t in &g.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *directed.entry((a, b)).or_insert(0) += 1;
            }
        }
        for (&(a, b), &c) in &directed {
            assert_eq!(c, 1, "directed edge {a}-{b} used {c} times");
            assert_eq!(directed.get(&(b, a)), Some(&1), "edge {a}-{b} unmatched");
        }
    }

    fn component_count(g: &RawGeometry) -> usize {
        let edges = crate::geom::triangle_edges(&g.triangles);
        let adj = crate::geom::Adjacency::from_edges(g.positions.len(), &edges);
        let d = crate::geom::multi_source_dijkstra(&adj, &[0]);
        1 + usize::from(d.iter().any(|x| x.is_infinite()))
    }

    fn signed_volume(g: &RawGeometry) -> f64 {
        g.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|v| g.positions[v]);
                dot(&a, &cross(&b, &c)) / 6.0
            })
            .sum()
    }

    #[test]
    fn icosphere_is_closed_and_consistently_oriented() {
        let g = icosphere_geometry(4);
        assert_closed_and_oriented(&g);
        assert!(signed_volume(&g) > 0.0);
    }

    #[test]
    fn marching_sphere_is_closed_outward_and_on_surface() {
        let fig = Figure {
            parts: vec![Capsule::sphere([0.0, 0.0, 0.0], 1.0)],
            blend: 0.1,
        };
        let g = figure_geometry(&fig, 1500);
        assert_closed_and_oriented(&g);
        assert_eq!(component_count(&g), 1);
        assert!(signed_volume(&g) > 0.0);
        for p in &g.positions {
            assert!((norm(p) - 1.0).abs() < 1e-9);
        }
        let v = g.positions.len() as f64;
        assert!((v / 1500.0 - 1.0).abs() < 0.2, "{v} vertices");
    }

    #[test]
    fn figures_are_single_closed_surfaces() {
        for g in [humanoid_geometry(1200, 0.4), quadruped_geometry(1200, 0.3)] {
            assert_closed_and_oriented(&g);
            assert_eq!(component_count(&g), 1);
            assert!(signed_volume(&g) > 0.0);
        }
    }

    #[test]
    fn humanoid_is_mirror_symmetric() {
        for s in [humanoid(2000, 0.3), quadruped(2000, 0.2)] {
            let pos = s.positions();
            let mirror = mirror_map(pos);
            for (p, &m) in pos.iter().zip(&mirror) {
                let d = distance(&[-p[0], p[1], p[2]], &pos[m]);
                assert!(d == 0.0, "mirror of {p:?} missing ({d})");
            }
            // mirror is an involution on vertices
            assert!(mirror.iter().enumerate().all(|(v, &m)| mirror[m] == v));
        }
    }

    #[test]
    fn poses_share_indexing_and_move_only_limbs() {
        let a = humanoid_geometry(1500, 0.0);
        let b = humanoid_geometry(1500, 0.4);
        assert_eq!(a.triangles, b.triangles);
        let head = a.positions.iter().zip(&b.positions).filter(|(p, _)| p[2] > 0.9);
        assert!(head.clone().count() > 10);
        assert!(head.into_iter().all(|(p, q)| p == q));
        let moved = a.positions.iter().zip(&b.positions).filter(|(p, q)| distance(p, q) > 0.3).count();
        assert!(moved > 50);
    }

    #[test]
    fn articulation_preserves_distance_to_joint() {
        let m = humanoid_pose(0.5)[0];
        let p = [1.4, 0.05, 0.4];
        let q = m.apply(&p);
        assert!((distance(&p, &m.joint) - distance(&q, &m.joint)).abs() < 1e-12);
        assert!(q[2] > p[2]);
    }
}
