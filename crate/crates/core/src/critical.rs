//! Interior critical points of a discrete solution and their multiplicities.
//!
//! Candidates are zeros of the recovered (continuous, piecewise-linear)
//! gradient field together with local minima of the triangle gradient norm.
//! Nearby candidates are grouped, each group is enclosed by a probe circle,
//! and the multiplicity is minus the winding number of the gradient along it.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{LoopTag, MeshedDomain};
use crate::solver::DiscreteSolution;
use crate::unionfind::UnionFind;
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PointFlag {
    NearBoundary,
    NearOtherCp,
    WindingUncertain,
}

impl PointFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointFlag::NearBoundary => "NEAR_BOUNDARY",
            PointFlag::NearOtherCp => "NEAR_OTHER_CP",
            PointFlag::WindingUncertain => "WINDING_UNCERTAIN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointRecord {
    pub x: f64,
    pub y: f64,
    pub multiplicity: usize,
    pub critical_value: f64,
    pub gradient_residual: f64,
    pub flags: BTreeSet<PointFlag>,
    /// Radius of the loop the multiplicity was read from.
    pub probe_radius: f64,
    /// Saddle vertices of the piecewise-linear field inside the probe loop.
    pub anchors: Vec<usize>,
}

impl CriticalPointRecord {
    pub fn location(&self) -> Point {
        [self.x, self.y]
    }

    pub fn near_boundary(&self) -> bool {
        self.flags.contains(&PointFlag::NearBoundary)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CriticalOptions {
    /// Threshold on the triangle gradient norm; defaults to `1e-3·(max u − min u)/diam`.
    pub grad_tol: Option<f64>,
    /// Defaults to `3h`.
    pub merge_radius: Option<f64>,
    /// Defaults to `max(3h, merge_radius)`.
    pub probe_radius: Option<f64>,
}

impl CriticalOptions {
    pub fn merge_radius(&self, h: f64) -> f64 {
        self.merge_radius.unwrap_or(3.0 * h)
    }

    pub fn probe_radius(&self, h: f64) -> f64 {
        self.probe_radius.unwrap_or((3.0 * h).max(self.merge_radius(h)))
    }

    pub fn grad_tol(&self, sol: &DiscreteSolution) -> f64 {
        self.grad_tol.unwrap_or_else(|| {
            let (lo, hi) = sol.min_max();
            1e-3 * (hi - lo) / sol.mesh().geometry().diameter()
        })
    }
}

/// Result of a loop winding computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    pub degree: i64,
    /// Distance of the accumulated turn count from the nearest integer.
    pub residue: f64,
    pub uncertain: bool,
    pub samples: usize,
}

const MIN_SAMPLES: usize = 64;
const RESIDUE_LIMIT: f64 = 0.15;
const ESCALATIONS: usize = 4;

fn wrap(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

fn loop_samples(h: f64, radius: f64) -> usize {
    MIN_SAMPLES.max((8.0 * PI * radius / h).ceil() as usize)
}

fn loop_points(center: Point, radius: f64, n: usize) -> impl Iterator<Item = Point> {
    (0..n).map(move |i| {
        let t = 2.0 * PI * i as f64 / n as f64;
        [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
    })
}

fn check_loop(mesh: &MeshedDomain, center: Point, radius: f64) -> Result<()> {
    if !(radius > 0.0) || mesh.geometry().distance_to_boundary(center) <= radius {
        return Err(Error::LoopExitsDomain { center, radius });
    }
    Ok(())
}

/// Degree of the gradient field along the counterclockwise circle.
pub fn winding_multiplicity(sol: &DiscreteSolution, center: Point, radius: f64) -> Result<Winding> {
    let mesh = sol.mesh();
    check_loop(mesh, center, radius)?;
    let n = loop_samples(mesh.h(), radius);
    let mut angles = Vec::with_capacity(n);
    for p in loop_points(center, radius, n) {
        let g = sol.recovered_gradient_at(p).ok_or(Error::LoopExitsDomain { center, radius })?;
        if g[0].hypot(g[1]) < 1e-14 {
            return Err(Error::LoopThroughZero(p));
        }
        angles.push(g[1].atan2(g[0]));
    }
    let mut total = 0.0;
    let mut biggest = 0.0f64;
    for i in 0..n {
        let d = wrap(angles[(i + 1) % n] - angles[i]);
        biggest = biggest.max(d.abs());
        total += d;
    }
    let turns = total / (2.0 * PI);
    let degree = turns.round() as i64;
    let residue = (turns - degree as f64).abs();
    Ok(Winding { degree, residue, uncertain: residue > RESIDUE_LIMIT || biggest > PI / 2.0, samples: n })
}

/// Sign changes of `u − t` around the circle.
pub fn sign_change_count(sol: &DiscreteSolution, center: Point, radius: f64, t: f64) -> Result<usize> {
    let mesh = sol.mesh();
    check_loop(mesh, center, radius)?;
    let n = loop_samples(mesh.h(), radius);
    let mut signs = Vec::with_capacity(n);
    for p in loop_points(center, radius, n) {
        let u = sol.value_at(p).ok_or(Error::LoopExitsDomain { center, radius })?;
        if u != t {
            signs.push(u > t);
        }
    }
    if signs.is_empty() {
        return Ok(0);
    }
    Ok((0..signs.len()).filter(|&i| signs[i] != signs[(i + 1) % signs.len()]).count())
}

/// Degree of the recovered gradient over the oriented boundary: outer loop
/// counterclockwise, inner loop clockwise.
pub fn boundary_degree(sol: &DiscreteSolution) -> Result<i64> {
    let mesh = sol.mesh();
    let mut total = 0.0;
    for lp in mesh.boundary_loops() {
        let mut ids = lp.vertex_indices.clone();
        if lp.tag == LoopTag::Inner {
            ids.reverse();
        }
        let n = ids.len();
        let mut angles = Vec::with_capacity(n);
        for &v in &ids {
            let g = sol.nodal_gradient(v);
            if g[0].hypot(g[1]) < 1e-14 {
                return Err(Error::LoopThroughZero(mesh.vertices()[v]));
            }
            angles.push(g[1].atan2(g[0]));
        }
        for i in 0..n {
            total += wrap(angles[(i + 1) % n] - angles[i]);
        }
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Cyclic sign changes of `u(w) − u(v)` over the link of `v`, ties broken by index.
fn link_sign_changes(sol: &DiscreteSolution, v: usize) -> usize {
    let u = sol.nodal_values();
    let above = |w: usize| u[w] > u[v] || (u[w] == u[v] && w > v);
    let nb = sol.mesh().vertex_neighbors(v);
    (0..nb.len()).filter(|&i| above(nb[i]) != above(nb[(i + 1) % nb.len()])).count()
}

/// Interior vertices that are saddles of the piecewise-linear field, with
/// their piecewise-linear multiplicity.
pub fn pl_saddles(sol: &DiscreteSolution) -> Vec<(usize, usize)> {
    let mesh = sol.mesh();
    (0..mesh.vertices().len())
        .filter(|&v| !mesh.is_boundary(v))
        .filter_map(|v| {
            let c = link_sign_changes(sol, v);
            (c >= 4).then(|| (v, c / 2 - 1))
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    p: Point,
    /// Sign of the affine gradient's Jacobian at a zero inside a triangle.
    degree: Option<i64>,
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn gradient_zero_candidates(sol: &DiscreteSolution) -> Vec<Candidate> {
    let mesh = sol.mesh();
    let verts = mesh.vertices();
    let mut out: Vec<Candidate> = Vec::new();
    for tri in mesh.triangles() {
        let g = tri.map(|v| sol.nodal_gradient(v));
        let scale = g.iter().map(|x| x[0].abs().max(x[1].abs())).fold(0.0, f64::max);
        if scale == 0.0 {
            continue;
        }
        let (a, b) = ([g[1][0] - g[0][0], g[1][1] - g[0][1]], [g[2][0] - g[0][0], g[2][1] - g[0][1]]);
        let det = a[0] * b[1] - b[0] * a[1];
        if det.abs() <= 1e-14 * scale * scale {
            continue;
        }
        let w1 = (-g[0][0] * b[1] + b[0] * g[0][1]) / det;
        let w2 = (-a[0] * g[0][1] + g[0][0] * a[1]) / det;
        let w = [1.0 - w1 - w2, w1, w2];
        let eps = 1e-9;
        if w.iter().any(|&x| x < -eps) {
            continue;
        }
        let p = [
            w[0] * verts[tri[0]][0] + w[1] * verts[tri[1]][0] + w[2] * verts[tri[2]][0],
            w[0] * verts[tri[0]][1] + w[1] * verts[tri[1]][1] + w[2] * verts[tri[2]][1],
        ];
        let on_face = w.iter().any(|&x| x < eps);
        // the affine map (w1, w2) ↦ G has Jacobian [a b]; orientation of the physical
        // triangle is positive, so the local degree is the sign of det
        let degree = if on_face { None } else { Some(det.signum() as i64) };
        if let Some(prev) = out.iter_mut().find(|c| dist(c.p, p) <= 1e-12 * mesh.h()) {
            prev.degree = None;
        } else {
            out.push(Candidate { p, degree });
        }
    }
    out
}

fn small_gradient_candidates(sol: &DiscreteSolution, grad_tol: f64) -> Vec<Candidate> {
    let mesh = sol.mesh();
    let norm = |t: usize| {
        let g = sol.triangle_gradient(t);
        g[0].hypot(g[1])
    };
    (0..mesh.triangles().len())
        .filter(|&t| {
            let n = norm(t);
            n < grad_tol
                && mesh
                    .triangle_edges(t)
                    .iter()
                    .all(|&e| mesh.edge_triangles(e).iter().all(|&s| s == crate::mesh::NONE || s == t || norm(s) >= n))
        })
        .map(|t| Candidate { p: mesh.centroid(t), degree: None })
        .collect()
}

/// Critical point of the quadratic least-squares fit of `u` over the
/// two-ring patch of the vertex nearest to `center`.
fn quadratic_refine(sol: &DiscreteSolution, center: Point) -> Option<Point> {
    let mesh = sol.mesh();
    let h = mesh.h();
    let (t, w) = mesh.locate(center)?;
    let tri = mesh.triangles()[t];
    let v0 = tri[(0..3).max_by(|&a, &b| w[a].total_cmp(&w[b]))?];
    let mut patch: BTreeSet<usize> = BTreeSet::from([v0]);
    for &a in mesh.vertex_neighbors(v0) {
        patch.insert(a);
        patch.extend(mesh.vertex_neighbors(a).iter().copied());
    }
    if patch.len() < 10 {
        return None;
    }
    let verts = mesh.vertices();
    let u = sol.nodal_values();
    let rows: Vec<usize> = patch.into_iter().collect();
    let a = DMatrix::from_fn(rows.len(), 6, |i, j| {
        let x = (verts[rows[i]][0] - center[0]) / h;
        let y = (verts[rows[i]][1] - center[1]) / h;
        [1.0, x, y, x * x, x * y, y * y][j]
    });
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|&v| u[v]));
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    if sv.min() <= 1e-8 * sv.max() {
        return None;
    }
    let c = svd.solve(&b, 1e-12).ok()?;
    let (hxx, hxy, hyy) = (2.0 * c[3], c[4], 2.0 * c[5]);
    let det = hxx * hyy - hxy * hxy;
    let hess = hxx.abs().max(hyy.abs()).max(hxy.abs());
    if hess == 0.0 || det.abs() <= 1e-3 * hess * hess {
        return None;
    }
    let x = (-c[1] * hyy + c[2] * hxy) / det;
    let y = (-hxx * c[2] + hxy * c[1]) / det;
    if x.hypot(y) > 2.0 {
        return None;
    }
    Some([center[0] + h * x, center[1] + h * y])
}

/// Groups of candidate indices linked at `radius` (single linkage).
fn link_groups(points: &[Point], radius: f64) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(points.len());
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if dist(points[i], points[j]) <= radius {
                uf.union(i, j);
            }
        }
    }
    let (labels, n) = uf.labels(0..points.len());
    let mut groups = vec![Vec::new(); n];
    for (i, l) in labels {
        groups[l].push(i);
    }
    groups
}

fn mean(points: impl Iterator<Item = Point>) -> Point {
    let mut s = [0.0; 2];
    let mut n = 0.0;
    for p in points {
        s[0] += p[0];
        s[1] += p[1];
        n += 1.0;
    }
    [s[0] / n, s[1] / n]
}

/// Locates interior critical points and their multiplicities.
pub fn detect_critical_points(sol: &DiscreteSolution, opts: &CriticalOptions) -> Result<Vec<CriticalPointRecord>> {
    let mesh = sol.mesh();
    let h = mesh.h();
    let (lo, hi) = sol.min_max();
    if hi - lo <= 1e-14 * lo.abs().max(hi.abs()).max(1.0) {
        return Err(Error::ConstantField);
    }
    let geometry = mesh.geometry();
    let merge = opts.merge_radius(h);
    let probe = opts.probe_radius(h);

    let mut cands = gradient_zero_candidates(sol);
    for c in small_gradient_candidates(sol, opts.grad_tol(sol)) {
        if !cands.iter().any(|d| dist(d.p, c.p) <= 1e-12 * h) {
            cands.push(c);
        }
    }
    if cands.is_empty() {
        return Ok(Vec::new());
    }
    let points: Vec<Point> = cands.iter().map(|c| c.p).collect();
    let mut groups = link_groups(&points, 2.0 * merge);
    groups.sort_by(|a, b| a[0].cmp(&b[0]));

    let saddles = pl_saddles(sol);
    let mut records = Vec::new();
    for group in &groups {
        let center = mean(group.iter().map(|&i| points[i]));
        let spread = group.iter().map(|&i| dist(points[i], center)).fold(0.0, f64::max);
        let mut flags = BTreeSet::new();
        if link_groups(&group.iter().map(|&i| points[i]).collect::<Vec<_>>(), merge).len() > 1 {
            flags.insert(PointFlag::NearOtherCp);
        }
        let room = geometry.distance_to_boundary(center) - 0.5 * h;
        let mut radius = probe.max(spread + h);
        if radius >= room {
            flags.insert(PointFlag::NearBoundary);
            radius = room;
        }
        let others_inside = |r: f64| {
            groups
                .iter()
                .filter(|g| !std::ptr::eq(*g, group))
                .flat_map(|g| g.iter())
                .any(|&i| dist(points[i], center) < r)
        };
        let expected = |r: f64| -> Option<i64> {
            let inside: Vec<&Candidate> = cands.iter().filter(|c| dist(c.p, center) < r).collect();
            inside.iter().map(|c| c.degree).sum()
        };

        let mut winding = None;
        if radius >= 0.5 * h {
            let mut r = radius;
            for attempt in 0..ESCALATIONS {
                let w = match winding_multiplicity(sol, center, r) {
                    Ok(w) => w,
                    Err(Error::LoopThroughZero(_)) => Winding { degree: 0, residue: 0.5, uncertain: true, samples: 0 },
                    Err(e) => return Err(e),
                };
                let consistent = expected(r).is_none_or(|d| d == w.degree);
                let accept = !w.uncertain && consistent;
                winding = Some((w, r, accept));
                let next = 2.0 * r;
                if accept || attempt + 1 == ESCALATIONS || next >= room || others_inside(next) {
                    break;
                }
                r = next;
            }
        }

        let (degree, used_radius) = match winding {
            Some((w, r, accept)) => {
                if !accept {
                    flags.insert(PointFlag::WindingUncertain);
                }
                (w.degree, r)
            }
            None => {
                flags.insert(PointFlag::WindingUncertain);
                (-1, radius.max(0.0))
            }
        };
        if degree >= 0 {
            continue;
        }
        let multiplicity = (-degree) as usize;

        let mut loc = center;
        if group.len() <= 2 && multiplicity == 1 {
            if let Some(p) = quadratic_refine(sol, center) {
                if dist(p, center) <= 2.0 * h && geometry.distance_to_boundary(p) > 0.0 {
                    loc = p;
                }
            }
        }
        let anchors: Vec<usize> = saddles
            .iter()
            .filter(|(v, _)| dist(mesh.vertices()[*v], center) < used_radius.max(h))
            .map(|&(v, _)| v)
            .collect();
        let critical_value = sol.value_at(loc).unwrap_or_else(|| sol.value_at(center).unwrap_or(f64::NAN));
        let g = sol.recovered_gradient_at(loc).unwrap_or([f64::NAN, f64::NAN]);
        records.push(CriticalPointRecord {
            x: loc[0],
            y: loc[1],
            multiplicity,
            critical_value,
            gradient_residual: g[0].hypot(g[1]),
            flags,
            probe_radius: used_radius,
            anchors,
        });
    }
    records.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    Ok(records)
}

/// Records as CSV with columns `x,y,multiplicity,critical_value,gradient_residual,flags`.
pub fn records_to_csv(records: &[CriticalPointRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "multiplicity", "critical_value", "gradient_residual", "flags"])
        .map_err(|e| Error::Config(e.to_string()))?;
    for r in records {
        let flags: Vec<&str> = r.flags.iter().map(|f| f.as_str()).collect();
        w.write_record([
            r.x.to_string(),
            r.y.to_string(),
            r.multiplicity.to_string(),
            r.critical_value.to_string(),
            r.gradient_residual.to_string(),
            flags.join("|"),
        ])
        .map_err(|e| Error::Config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}
