//! Structured polar triangulations of disks and annuli.
//!
//! Vertices are laid out on concentric rings spaced by at most `h`; adjacent
//! rings are stitched by an angular merge and the result is made Delaunay by
//! Lawson edge flips, which keeps the P1 stiffness matrix an M-matrix.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Point;

/// Which boundary component a loop represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LoopTag {
    Outer,
    Inner,
}

/// Analytic description of the meshed region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainGeometry {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl DomainGeometry {
    pub fn kind(&self) -> DomainKind {
        match self {
            DomainGeometry::Disk { .. } => DomainKind::Disk,
            DomainGeometry::Annulus { .. } => DomainKind::Annulus,
        }
    }

    pub fn outer_radius(&self) -> f64 {
        match *self {
            DomainGeometry::Disk { radius } => radius,
            DomainGeometry::Annulus { outer, .. } => outer,
        }
    }

    pub fn inner_radius(&self) -> Option<f64> {
        match *self {
            DomainGeometry::Disk { .. } => None,
            DomainGeometry::Annulus { inner, .. } => Some(inner),
        }
    }

    /// Signed distance to the analytic boundary, positive inside.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        let r = p[0].hypot(p[1]);
        match *self {
            DomainGeometry::Disk { radius } => radius - r,
            DomainGeometry::Annulus { inner, outer } => (r - inner).min(outer - r),
        }
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.outer_radius()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Disk,
    Annulus,
}

/// One boundary component: vertex indices in counterclockwise angular order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLoop {
    pub tag: LoopTag,
    pub vertex_indices: Vec<usize>,
}

/// Conforming triangulation with its derived adjacency.
#[derive(Debug, Clone)]
pub struct MeshedDomain {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_loops: Vec<BoundaryLoop>,
    boundary_param: Vec<Option<f64>>,
    boundary_tag: Vec<Option<LoopTag>>,
    h: f64,
    geometry: DomainGeometry,
    edges: Vec<[usize; 2]>,
    edge_triangles: Vec<[usize; 2]>,
    triangle_edges: Vec<[usize; 3]>,
    neighbor_offsets: Vec<usize>,
    neighbors: Vec<usize>,
    vertex_tri_offsets: Vec<usize>,
    vertex_tris: Vec<usize>,
    locator: Locator,
}

/// Marker for "no triangle" in edge adjacency.
pub const NONE: usize = usize::MAX;

/// Builds a disk of the given radius centred at the origin.
pub fn build_disk_mesh(radius: f64, h: f64) -> Result<MeshedDomain> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Sizing(format!("radius must be positive, got {radius}")));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Sizing(format!("mesh size must be positive, got {h}")));
    }
    if h >= radius {
        return Err(Error::Sizing(format!("mesh size {h} must be smaller than the radius {radius}")));
    }
    let rings = (radius / h - 1e-9).ceil().max(1.0) as usize;
    let mut vertices = vec![[0.0, 0.0]];
    let mut param = vec![None];
    let mut triangles = Vec::new();
    let mut prev: Vec<usize> = vec![0];
    let mut prev_ring = Ring { count: 1, offset: 0.0 };
    for i in 1..=rings {
        let r = if i == rings { radius } else { radius * i as f64 / rings as f64 };
        let ring = Ring { count: 6 * i, offset: 0.0 };
        let ids = push_ring(&mut vertices, &mut param, r, ring, i == rings);
        if i == 1 {
            for k in 0..ids.len() {
                triangles.push([0, ids[k], ids[(k + 1) % ids.len()]]);
            }
        } else {
            stitch(&vertices, &prev, prev_ring, &ids, ring, &mut triangles);
        }
        prev = ids;
        prev_ring = ring;
    }
    let loops = vec![BoundaryLoop { tag: LoopTag::Outer, vertex_indices: prev }];
    MeshedDomain::assemble(vertices, triangles, loops, param, h, DomainGeometry::Disk { radius })
}

/// Builds the annulus `inner < |x| < outer` centred at the origin.
pub fn build_annulus_mesh(inner: f64, outer: f64, h: f64) -> Result<MeshedDomain> {
    if !(inner.is_finite() && inner > 0.0 && outer.is_finite()) {
        return Err(Error::Sizing(format!("inner radius must be positive, got {inner}")));
    }
    if inner >= outer {
        return Err(Error::Sizing(format!("inner radius {inner} must be below outer radius {outer}")));
    }
    if !(h.is_finite() && h > 0.0 && h < outer - inner) {
        return Err(Error::Sizing(format!("mesh size {h} must lie in (0, {})", outer - inner)));
    }
    let rings = ((outer - inner) / h - 1e-9).ceil().max(1.0) as usize;
    let dr = (outer - inner) / rings as f64;
    let mut vertices = Vec::new();
    let mut param = Vec::new();
    let mut triangles = Vec::new();
    let mut loops = Vec::new();
    let mut prev: Vec<usize> = Vec::new();
    let mut prev_ring = Ring { count: 0, offset: 0.0 };
    for i in 0..=rings {
        let r = match i {
            0 => inner,
            _ if i == rings => outer,
            _ => inner + dr * i as f64,
        };
        let count = ((2.0 * PI * r / dr).round() as usize).max(8);
        let offset = if i % 2 == 1 { PI / count as f64 } else { 0.0 };
        let ring = Ring { count, offset };
        let ids = push_ring(&mut vertices, &mut param, r, ring, i == 0 || i == rings);
        if i == 0 {
            loops.push(BoundaryLoop { tag: LoopTag::Inner, vertex_indices: ids.clone() });
        } else {
            stitch(&vertices, &prev, prev_ring, &ids, ring, &mut triangles);
        }
        if i == rings {
            loops.insert(0, BoundaryLoop { tag: LoopTag::Outer, vertex_indices: ids.clone() });
        }
        prev = ids;
        prev_ring = ring;
    }
    MeshedDomain::assemble(vertices, triangles, loops, param, h, DomainGeometry::Annulus { inner, outer })
}

#[derive(Debug, Clone, Copy)]
struct Ring {
    count: usize,
    offset: f64,
}

impl Ring {
    fn angle(&self, k: usize) -> f64 {
        self.offset + 2.0 * PI * k as f64 / self.count as f64
    }
}

fn push_ring(
    vertices: &mut Vec<Point>,
    param: &mut Vec<Option<f64>>,
    r: f64,
    ring: Ring,
    on_boundary: bool,
) -> Vec<usize> {
    (0..ring.count)
        .map(|k| {
            let theta = ring.angle(k);
            vertices.push([r * theta.cos(), r * theta.sin()]);
            param.push(on_boundary.then_some(theta));
            vertices.len() - 1
        })
        .collect()
}

/// Fills the strip between two concentric rings by merging their angles.
fn stitch(
    vertices: &[Point],
    inner: &[usize],
    inner_ring: Ring,
    outer: &[usize],
    outer_ring: Ring,
    triangles: &mut Vec<[usize; 3]>,
) {
    let (n, m) = (inner.len(), outer.len());
    let alpha = |i: usize| inner_ring.angle(i);
    // start the outer ring at the vertex angularly closest to inner[0]
    let a0 = alpha(0);
    let mut j0 = 0;
    let mut best = f64::INFINITY;
    for j in 0..m {
        let d = wrap_angle(outer_ring.angle(j) - a0).abs();
        if d < best {
            best = d;
            j0 = j;
        }
    }
    let b0 = a0 + wrap_angle(outer_ring.angle(j0) - a0);
    let beta = |j: usize| b0 + 2.0 * PI * j as f64 / m as f64;
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        let advance_inner = j == m || (i < n && alpha(i + 1) <= beta(j + 1));
        let tri = if advance_inner {
            let t = [inner[i % n], outer[(j0 + j) % m], inner[(i + 1) % n]];
            i += 1;
            t
        } else {
            let t = [inner[i % n], outer[(j0 + j) % m], outer[(j0 + j + 1) % m]];
            j += 1;
            t
        };
        triangles.push(orient(vertices, tri));
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

fn orient(v: &[Point], t: [usize; 3]) -> [usize; 3] {
    if signed_area(v[t[0]], v[t[1]], v[t[2]]) < 0.0 {
        [t[0], t[2], t[1]]
    } else {
        t
    }
}

pub(crate) fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

/// Positive when `d` lies strictly inside the circumcircle of the CCW triangle `abc`.
fn incircle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Lawson flips until every interior edge is locally Delaunay.
fn make_delaunay(vertices: &[Point], triangles: &mut [[usize; 3]]) {
    for _pass in 0..200 {
        let mut map: BTreeMap<(usize, usize), [usize; 2]> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for e in 0..3 {
                let key = edge_key(tri[e], tri[(e + 1) % 3]);
                map.entry(key).and_modify(|s| s[1] = t).or_insert([t, NONE]);
            }
        }
        let mut touched = vec![false; triangles.len()];
        let mut flips = 0;
        for t in 0..triangles.len() {
            for e in 0..3 {
                if touched[t] {
                    break;
                }
                let tri = triangles[t];
                let (a, b, c) = (tri[e], tri[(e + 1) % 3], tri[(e + 2) % 3]);
                let pair = map[&edge_key(a, b)];
                let other = if pair[0] == t { pair[1] } else { pair[0] };
                if other == NONE || touched[other] {
                    continue;
                }
                let ot = triangles[other];
                let d = ot.iter().copied().find(|&x| x != a && x != b).unwrap();
                let (pa, pb, pc, pd) = (vertices[a], vertices[b], vertices[c], vertices[d]);
                let scale = {
                    let l = (pa[0] - pb[0]).hypot(pa[1] - pb[1]);
                    l * l * l * l
                };
                if incircle(pa, pb, pc, pd) <= 1e-10 * scale {
                    continue;
                }
                let t1 = [c, a, d];
                let t2 = [c, d, b];
                if signed_area(vertices[c], vertices[a], vertices[d]) <= 0.0
                    || signed_area(vertices[c], vertices[d], vertices[b]) <= 0.0
                {
                    continue;
                }
                triangles[t] = t1;
                triangles[other] = t2;
                touched[t] = true;
                touched[other] = true;
                flips += 1;
            }
        }
        if flips == 0 {
            return;
        }
    }
}

impl MeshedDomain {
    fn assemble(
        vertices: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
        boundary_loops: Vec<BoundaryLoop>,
        boundary_param: Vec<Option<f64>>,
        h: f64,
        geometry: DomainGeometry,
    ) -> Result<Self> {
        make_delaunay(&vertices, &mut triangles);
        Self::from_parts(vertices, triangles, boundary_loops, boundary_param, h, geometry)
    }

    /// Builds a mesh from explicit parts, validating orientation and manifoldness.
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_loops: Vec<BoundaryLoop>,
        boundary_param: Vec<Option<f64>>,
        h: f64,
        geometry: DomainGeometry,
    ) -> Result<Self> {
        let nv = vertices.len();
        if boundary_param.len() != nv {
            return Err(Error::InvalidMesh("boundary_param length differs from vertex count".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            if signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) <= 0.0 {
                return Err(Error::InvalidMesh(format!("triangle {t} is not counterclockwise")));
            }
        }

        let mut half: Vec<(usize, usize, usize, usize)> = Vec::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = edge_key(tri[e], tri[(e + 1) % 3]);
                half.push((a, b, t, e));
            }
        }
        half.sort_unstable();
        let mut edges = Vec::new();
        let mut edge_triangles = Vec::new();
        let mut triangle_edges = vec![[NONE; 3]; triangles.len()];
        let mut k = 0;
        while k < half.len() {
            let (a, b, t, e) = half[k];
            let id = edges.len();
            edges.push([a, b]);
            triangle_edges[t][e] = id;
            let mut pair = [t, NONE];
            let mut l = k + 1;
            while l < half.len() && half[l].0 == a && half[l].1 == b {
                if pair[1] != NONE {
                    return Err(Error::InvalidMesh(format!("edge ({a}, {b}) shared by more than two triangles")));
                }
                pair[1] = half[l].2;
                triangle_edges[half[l].2][half[l].3] = id;
                l += 1;
            }
            edge_triangles.push(pair);
            k = l;
        }

        let single: std::collections::BTreeSet<(usize, usize)> =
            edges.iter().zip(&edge_triangles).filter(|(_, p)| p[1] == NONE).map(|(e, _)| (e[0], e[1])).collect();
        let mut boundary_tag = vec![None; nv];
        let mut loop_edges = 0;
        for lp in &boundary_loops {
            let n = lp.vertex_indices.len();
            for (i, &v) in lp.vertex_indices.iter().enumerate() {
                boundary_tag[v] = Some(lp.tag);
                let w = lp.vertex_indices[(i + 1) % n];
                if !single.contains(&edge_key(v, w)) {
                    return Err(Error::InvalidMesh(format!("boundary loop edge ({v}, {w}) is not a boundary edge")));
                }
                loop_edges += 1;
            }
        }
        let boundary_edges = edge_triangles.iter().filter(|p| p[1] == NONE).count();
        if boundary_edges != loop_edges {
            return Err(Error::InvalidMesh(format!(
                "{boundary_edges} single-triangle edges but boundary loops list {loop_edges}"
            )));
        }

        let (neighbor_offsets, neighbors) = {
            let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
            for &[a, b] in &edges {
                adj[a].push(b);
                adj[b].push(a);
            }
            for (v, list) in adj.iter_mut().enumerate() {
                let p = vertices[v];
                list.sort_by(|&x, &y| {
                    let ax = (vertices[x][1] - p[1]).atan2(vertices[x][0] - p[0]);
                    let ay = (vertices[y][1] - p[1]).atan2(vertices[y][0] - p[0]);
                    ax.total_cmp(&ay)
                });
            }
            csr(adj)
        };
        let (vertex_tri_offsets, vertex_tris) = {
            let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
            for (t, tri) in triangles.iter().enumerate() {
                for &v in tri {
                    adj[v].push(t);
                }
            }
            csr(adj)
        };
        let locator = Locator::new(&vertices, &triangles, h);
        Ok(MeshedDomain {
            vertices,
            triangles,
            boundary_loops,
            boundary_param,
            boundary_tag,
            h,
            geometry,
            edges,
            edge_triangles,
            triangle_edges,
            neighbor_offsets,
            neighbors,
            vertex_tri_offsets,
            vertex_tris,
            locator,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_loops(&self) -> &[BoundaryLoop] {
        &self.boundary_loops
    }

    pub fn boundary_loop(&self, tag: LoopTag) -> Option<&BoundaryLoop> {
        self.boundary_loops.iter().find(|l| l.tag == tag)
    }

    /// Polar angle of a boundary vertex on its loop.
    pub fn boundary_param(&self, v: usize) -> Option<f64> {
        self.boundary_param[v]
    }

    pub fn boundary_tag(&self, v: usize) -> Option<LoopTag> {
        self.boundary_tag[v]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary_tag[v].is_some()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn geometry(&self) -> DomainGeometry {
        self.geometry
    }

    pub fn kind(&self) -> DomainKind {
        self.geometry.kind()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// The one or two triangles incident to an edge; the second is [`NONE`] on the boundary.
    pub fn edge_triangles(&self, e: usize) -> [usize; 2] {
        self.edge_triangles[e]
    }

    /// Edge ids of a triangle, edge `k` joining local vertices `k` and `k + 1`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    /// Neighbouring vertices sorted by angle around `v`.
    pub fn vertex_neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.neighbor_offsets[v]..self.neighbor_offsets[v + 1]]
    }

    pub fn vertex_triangles(&self, v: usize) -> &[usize] {
        &self.vertex_tris[self.vertex_tri_offsets[v]..self.vertex_tri_offsets[v + 1]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0]
    }

    /// Triangle containing `p` with barycentric coordinates, if any.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        self.locator.locate(&self.vertices, &self.triangles, p)
    }

    /// V - E + F of the whole complex.
    pub fn euler_characteristic_total(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Euler characteristic of the subcomplex induced by a set of triangles.
    ///
    /// The set must be non-empty and connected through shared edges.
    pub fn euler_characteristic(&self, sub: &[usize]) -> Result<i64> {
        if sub.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut in_sub = vec![false; self.triangles.len()];
        for &t in sub {
            if t >= self.triangles.len() {
                return Err(Error::InvalidMesh(format!("triangle {t} out of range")));
            }
            in_sub[t] = true;
        }
        let mut uf = crate::unionfind::UnionFind::new(self.triangles.len());
        let mut edge_seen = vec![false; self.edges.len()];
        let mut vert_seen = vec![false; self.vertices.len()];
        let (mut nv, mut ne, mut nf) = (0i64, 0i64, 0i64);
        for t in 0..self.triangles.len() {
            if !in_sub[t] {
                continue;
            }
            nf += 1;
            for &v in &self.triangles[t] {
                if !vert_seen[v] {
                    vert_seen[v] = true;
                    nv += 1;
                }
            }
            for &e in &self.triangle_edges[t] {
                if !edge_seen[e] {
                    edge_seen[e] = true;
                    ne += 1;
                }
                let [t0, t1] = self.edge_triangles[e];
                if t1 != NONE && in_sub[t0] && in_sub[t1] {
                    uf.union(t0, t1);
                }
            }
        }
        let root = uf.find(sub[0]);
        if sub.iter().any(|&t| uf.find(t) != root) {
            return Err(Error::DisconnectedSubset);
        }
        Ok(nv - ne + nf)
    }

    pub fn to_export(&self) -> MeshExport {
        MeshExport {
            vertices: self.vertices.clone(),
            triangles: self.triangles.clone(),
            boundary_loops: self.boundary_loops.clone(),
        }
    }
}

/// JSON interchange form of a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshExport {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_loops: Vec<BoundaryLoop>,
}

fn csr(adj: Vec<Vec<usize>>) -> (Vec<usize>, Vec<usize>) {
    let mut offsets = Vec::with_capacity(adj.len() + 1);
    let mut flat = Vec::new();
    offsets.push(0);
    for list in adj {
        flat.extend(list);
        offsets.push(flat.len());
    }
    (offsets, flat)
}

/// Uniform bucket grid for point location.
#[derive(Debug, Clone)]
struct Locator {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    offsets: Vec<usize>,
    items: Vec<usize>,
}

impl Locator {
    fn new(vertices: &[Point], triangles: &[[usize; 3]], h: f64) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let cell = 2.0 * h;
        let nx = (((hi[0] - lo[0]) / cell).floor() as usize + 1).max(1);
        let ny = (((hi[1] - lo[1]) / cell).floor() as usize + 1).max(1);
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nx * ny];
        let to_cell = |x: f64, o: f64, n: usize| (((x - o) / cell).floor().max(0.0) as usize).min(n - 1);
        for (t, tri) in triangles.iter().enumerate() {
            let xs = tri.map(|v| vertices[v][0]);
            let ys = tri.map(|v| vertices[v][1]);
            let (x0, x1) = (
                xs.iter().cloned().fold(f64::INFINITY, f64::min),
                xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            );
            let (y0, y1) = (
                ys.iter().cloned().fold(f64::INFINITY, f64::min),
                ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            );
            for i in to_cell(x0, lo[0], nx)..=to_cell(x1, lo[0], nx) {
                for j in to_cell(y0, lo[1], ny)..=to_cell(y1, lo[1], ny) {
                    buckets[j * nx + i].push(t);
                }
            }
        }
        let (offsets, items) = csr(buckets);
        Locator { origin: lo, cell, nx, ny, offsets, items }
    }

    fn locate(&self, vertices: &[Point], triangles: &[[usize; 3]], p: Point) -> Option<(usize, [f64; 3])> {
        let fx = (p[0] - self.origin[0]) / self.cell;
        let fy = (p[1] - self.origin[1]) / self.cell;
        if !(fx > -1e-9 && fy > -1e-9) {
            return None;
        }
        let (i, j) = (fx.floor() as usize, fy.floor() as usize);
        if i > self.nx || j > self.ny {
            return None;
        }
        let (i, j) = (i.min(self.nx - 1), j.min(self.ny - 1));
        let cell = j * self.nx + i;
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.items[self.offsets[cell]..self.offsets[cell + 1]] {
            let bc = barycentric(vertices, triangles[t], p);
            let worst = bc[0].min(bc[1]).min(bc[2]);
            if worst >= 0.0 {
                return Some((t, bc));
            }
            if best.as_ref().is_none_or(|b| worst > b.2) {
                best = Some((t, bc, worst));
            }
        }
        match best {
            Some((t, bc, worst)) if worst > -1e-10 => Some((t, bc)),
            _ => None,
        }
    }
}

pub(crate) fn barycentric(vertices: &[Point], tri: [usize; 3], p: Point) -> [f64; 3] {
    let (a, b, c) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
    let area = signed_area(a, b, c);
    let l0 = signed_area(p, b, c) / area;
    let l1 = signed_area(a, p, c) / area;
    [l0, l1, 1.0 - l0 - l1]
}
