//! Connected components of super- and sub-level sets of a piecewise-linear
//! field, critical-level clusters, and the counting identities that tie them
//! to critical point multiplicities.
//!
//! For a piecewise-linear field the open set `{u > t}` deformation retracts
//! onto the full subcomplex spanned by the vertices with `u > t`, so
//! components and Euler characteristics are read off that subcomplex exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::critical::CriticalPointRecord;
use crate::error::{Error, Result};
use crate::mesh::{LoopTag, MeshedDomain};
use crate::solver::DiscreteSolution;
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Super,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: usize,
    pub vertex_count: usize,
    pub touches_outer: bool,
    pub touches_inner: bool,
    pub euler_characteristic: i64,
    pub simply_connected: bool,
    /// Maximal runs of boundary vertices belonging to the component.
    pub boundary_arcs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSet {
    pub t: f64,
    pub side: Side,
    pub components: Vec<Component>,
    /// Component id per vertex, `None` outside the set.
    #[serde(skip)]
    pub labels: Vec<Option<usize>>,
}

impl ComponentSet {
    pub fn count(&self) -> usize {
        self.components.len()
    }

    /// Component containing the point, when the point lies strictly inside the set.
    pub fn component_at(&self, sol: &DiscreteSolution, p: crate::Point) -> Option<usize> {
        let (tri, _) = sol.mesh().locate(p)?;
        let u = sol.value_at(p)?;
        let inside = match self.side {
            Side::Super => u > self.t,
            Side::Sub => u < self.t,
        };
        if !inside {
            return None;
        }
        sol.mesh().triangles()[tri].iter().find_map(|&v| self.labels[v])
    }
}

fn check_level(sol: &DiscreteSolution, t: f64) -> Result<()> {
    let (min, max) = sol.min_max();
    if !(t > min && t < max) {
        return Err(Error::LevelOutOfRange { t, min, max });
    }
    Ok(())
}

fn components(sol: &DiscreteSolution, t: f64, side: Side) -> Result<ComponentSet> {
    check_level(sol, t)?;
    let mesh = sol.mesh();
    let u = sol.nodal_values();
    let member: Vec<bool> = u
        .iter()
        .map(|&x| match side {
            Side::Super => x > t,
            Side::Sub => x < t,
        })
        .collect();
    let nv = u.len();
    let mut uf = UnionFind::new(nv);
    for &[a, b] in mesh.edges() {
        if member[a] && member[b] {
            uf.union(a, b);
        }
    }
    let (pairs, n) = uf.labels((0..nv).filter(|&v| member[v]));
    let mut labels = vec![None; nv];
    for (v, l) in pairs {
        labels[v] = Some(l);
    }
    let mut verts = vec![0i64; n];
    let mut edges = vec![0i64; n];
    let mut faces = vec![0i64; n];
    let mut outer = vec![false; n];
    let mut inner = vec![false; n];
    for v in 0..nv {
        if let Some(l) = labels[v] {
            verts[l] += 1;
            match mesh.boundary_tag(v) {
                Some(LoopTag::Outer) => outer[l] = true,
                Some(LoopTag::Inner) => inner[l] = true,
                None => {}
            }
        }
    }
    for &[a, b] in mesh.edges() {
        if let (Some(l), true) = (labels[a], member[b]) {
            edges[l] += 1;
        }
    }
    for tri in mesh.triangles() {
        if let (Some(l), true, true) = (labels[tri[0]], member[tri[1]], member[tri[2]]) {
            faces[l] += 1;
        }
    }
    let mut arcs = vec![0usize; n];
    for lp in mesh.boundary_loops() {
        let ids = &lp.vertex_indices;
        let k = ids.len();
        let mut starts = 0;
        for i in 0..k {
            let cur = labels[ids[i]];
            if let Some(c) = cur {
                if labels[ids[(i + k - 1) % k]] != cur {
                    starts += 1;
                    arcs[c] += 1;
                }
            }
        }
        if starts == 0 {
            if let Some(l) = labels[ids[0]] {
                arcs[l] += 1;
            }
        }
    }
    let comps = (0..n)
        .map(|l| {
            let chi = verts[l] - edges[l] + faces[l];
            Component {
                id: l,
                vertex_count: verts[l] as usize,
                touches_outer: outer[l],
                touches_inner: inner[l],
                euler_characteristic: chi,
                simply_connected: chi == 1,
                boundary_arcs: arcs[l],
            }
        })
        .collect();
    Ok(ComponentSet { t, side, components: comps, labels })
}

/// Components of `{u > t}`.
pub fn superlevel_components(sol: &DiscreteSolution, t: f64) -> Result<ComponentSet> {
    components(sol, t, Side::Super)
}

/// Components of `{u < t}`.
pub fn sublevel_components(sol: &DiscreteSolution, t: f64) -> Result<ComponentSet> {
    components(sol, t, Side::Sub)
}

/// Default band half-width: `1e-6·(max u − min u)`.
pub fn default_delta(sol: &DiscreteSolution) -> f64 {
    let (lo, hi) = sol.min_max();
    1e-6 * (hi - lo)
}

/// Value interval spanned by a record: its saddle vertices, or its critical value.
pub fn record_level(sol: &DiscreteSolution, r: &CriticalPointRecord) -> (f64, f64) {
    if r.anchors.is_empty() {
        return (r.critical_value, r.critical_value);
    }
    let u = sol.nodal_values();
    r.anchors.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(u[v]), b.max(u[v])))
}

/// Partition of record indices by critical value, with grouping tolerance `10δ`.
pub fn level_groups(sol: &DiscreteSolution, records: &[CriticalPointRecord], delta: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..records.len()).collect();
    let levels: Vec<(f64, f64)> = records.iter().map(|r| record_level(sol, r)).collect();
    order.sort_by(|&a, &b| levels[a].0.total_cmp(&levels[b].0).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut top = f64::NEG_INFINITY;
    for i in order {
        match groups.last_mut() {
            Some(g) if levels[i].0 - top <= 10.0 * delta => g.push(i),
            _ => groups.push(vec![i]),
        }
        top = top.max(levels[i].1);
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups
}

fn band_of(sol: &DiscreteSolution, records: &[&CriticalPointRecord], delta: f64) -> (f64, f64) {
    records
        .iter()
        .map(|r| record_level(sol, r))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (lo, hi)| (a.min(lo - delta), b.max(hi + delta)))
}

/// Number of connected clusters of the critical level band that contain records.
pub fn critical_clusters(sol: &DiscreteSolution, records: &[CriticalPointRecord], delta: f64) -> Result<usize> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let groups = level_groups(sol, records, delta);
    if groups.len() > 1 {
        return Err(Error::SplitLevels { groups });
    }
    let refs: Vec<&CriticalPointRecord> = records.iter().collect();
    Ok(cluster_labels(sol, &refs, delta).1)
}

/// Band clusters for records sharing a level; returns the cluster of each
/// record and the number of distinct clusters hit.
fn cluster_labels(sol: &DiscreteSolution, records: &[&CriticalPointRecord], delta: f64) -> (Vec<Option<usize>>, usize) {
    let mesh = sol.mesh();
    let u = sol.nodal_values();
    let (lo, hi) = band_of(sol, records, delta);
    let range =
        |vs: &[usize]| vs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(u[v]), b.max(u[v])));
    let meets = |(a, b): (f64, f64)| a <= hi && b >= lo;
    let nt = mesh.triangles().len();
    let in_band: Vec<bool> = mesh.triangles().iter().map(|t| meets(range(t))).collect();
    let mut uf = UnionFind::new(nt);
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        let [s, t] = mesh.edge_triangles(e);
        if t != crate::mesh::NONE && in_band[s] && in_band[t] && meets(range(&[a, b])) {
            uf.union(s, t);
        }
    }
    let mut hit = BTreeSet::new();
    let labels = records
        .iter()
        .map(|r| {
            let mut tris: Vec<usize> =
                r.anchors.iter().flat_map(|&v| mesh.vertex_triangles(v).iter().copied()).collect();
            if tris.is_empty() {
                tris.extend(mesh.locate(r.location()).map(|(t, _)| t));
            }
            let root = tris.into_iter().filter(|&t| in_band[t]).map(|t| uf.find(t)).min();
            if let Some(c) = root {
                hit.insert(c);
            }
            root
        })
        .collect();
    (labels, hit.len())
}

/// `M1 ≥ Σm + 1`, `M2 ≥ Σm + 1` and `M1 + M2 = 2Σm + q + 1`.
pub fn check_counting_identity(m1: usize, m2: usize, sum_m: usize, q: usize) -> bool {
    m1 > sum_m && m2 > sum_m && m1 + m2 == 2 * sum_m + q + 1
}

/// Annular first case: simply connected components on the far side meeting the
/// outer boundary number `Σm + q − 1`.
pub fn check_annulus_case1(count: usize, sum_m: usize, q: usize) -> bool {
    q >= 1 && count == sum_m + q - 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IdentityKind {
    /// Plane-domain identity (also the annular second case).
    SplitSum,
    /// Annular first case: count of simply connected components meeting the outer circle.
    OuterContact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub kind: IdentityKind,
    /// The count entering the outer-contact form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_contact_count: Option<usize>,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagnosticKind {
    /// A critical record strictly inside a ring-shaped component.
    CriticalInsideRing,
    /// A ring-shaped component whose outer curve does or does not carry a record.
    RingOuterCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentDiagnostic {
    pub kind: DiagnosticKind,
    pub side: Side,
    pub component: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<usize>,
    /// For ring components: whether a record lies on the outer curve.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_on_outer_curve: Option<bool>,
}

/// Ring-shaped components strictly between the two circles: records inside
/// them are reported as violations, and records on their outer curve are noted.
pub fn annulus_component_diagnostics(
    sol: &DiscreteSolution,
    t: f64,
    records: &[CriticalPointRecord],
    merge_radius: f64,
) -> Result<Vec<ComponentDiagnostic>> {
    let mesh = sol.mesh();
    if mesh.boundary_loops().len() != 2 {
        return Err(Error::DataMismatch("component diagnostics need an annular domain".into()));
    }
    let reach = merge_radius + mesh.h();
    let mut out = Vec::new();
    for set in [sublevel_components(sol, t)?, superlevel_components(sol, t)?] {
        for c in set.components.iter().filter(|c| !c.simply_connected && !c.touches_outer) {
            // level-crossing triangles on the edge of the component
            let rim: Vec<crate::Point> = mesh
                .triangles()
                .iter()
                .enumerate()
                .filter(|(_, tri)| {
                    tri.iter().any(|&v| set.labels[v] == Some(c.id)) && tri.iter().any(|&v| set.labels[v].is_none())
                })
                .map(|(i, _)| mesh.centroid(i))
                .collect();
            let near_rim = |p: crate::Point| rim.iter().any(|q| (p[0] - q[0]).hypot(p[1] - q[1]) <= reach);
            let mut on_curve = false;
            for (i, r) in records.iter().enumerate() {
                let p = r.location();
                if near_rim(p) {
                    on_curve = true;
                } else if set.component_at(sol, p) == Some(c.id) {
                    out.push(ComponentDiagnostic {
                        kind: DiagnosticKind::CriticalInsideRing,
                        side: set.side,
                        component: c.id,
                        record: Some(i),
                        record_on_outer_curve: None,
                    });
                }
            }
            out.push(ComponentDiagnostic {
                kind: DiagnosticKind::RingOuterCurve,
                side: set.side,
                component: c.id,
                record: None,
                record_on_outer_curve: Some(on_curve),
            });
        }
    }
    Ok(out)
}

/// Level analysis at one critical (or user-chosen) level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetReport {
    pub t: f64,
    #[serde(rename = "M1")]
    pub m1: usize,
    #[serde(rename = "M2")]
    pub m2: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    pub sum_m: usize,
    pub records: Vec<usize>,
    pub delta: f64,
    pub superlevel: Vec<Component>,
    pub sublevel: Vec<Component>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity: Option<IdentityCheck>,
    pub diagnostics: Vec<ComponentDiagnostic>,
}

/// Analyses the level shared by `records` (indices into `all`), using the
/// extreme saddle values of the group so that the saddles themselves are
/// excluded from both open sets.
pub fn analyze_critical_level(
    sol: &DiscreteSolution,
    all: &[CriticalPointRecord],
    group: &[usize],
    delta: f64,
    inner_constant: Option<f64>,
    merge_radius: f64,
) -> Result<LevelSetReport> {
    let recs: Vec<&CriticalPointRecord> = group.iter().map(|&i| &all[i]).collect();
    if recs.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let (lo, hi) = recs
        .iter()
        .map(|r| record_level(sol, r))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (l, h)| (a.min(l), b.max(h)));
    let t = 0.5 * (lo + hi);
    let sup = superlevel_components(sol, hi)?;
    let sub = sublevel_components(sol, lo)?;
    let q = cluster_labels(sol, &recs, delta).1;
    let sum_m: usize = recs.iter().map(|r| r.multiplicity).sum();
    let identity = Some(identity_for(&sup, &sub, sum_m, q, t, delta, inner_constant));
    let diagnostics = match inner_constant {
        Some(_) => annulus_component_diagnostics(sol, t, all, merge_radius)?,
        None => Vec::new(),
    };
    Ok(LevelSetReport {
        t,
        m1: sup.count(),
        m2: sub.count(),
        q: Some(q),
        sum_m,
        records: group.to_vec(),
        delta,
        superlevel: sup.components,
        sublevel: sub.components,
        identity,
        diagnostics,
    })
}

fn identity_for(
    sup: &ComponentSet,
    sub: &ComponentSet,
    sum_m: usize,
    q: usize,
    t: f64,
    delta: f64,
    inner_constant: Option<f64>,
) -> IdentityCheck {
    let split = |holds| IdentityCheck { kind: IdentityKind::SplitSum, outer_contact_count: None, holds };
    let Some(h) = inner_constant else {
        return split(check_counting_identity(sup.count(), sub.count(), sum_m, q));
    };
    // the side that contains the inner circle: below the level when H < t
    let near = if t > h + 10.0 * delta {
        sub
    } else if t < h - 10.0 * delta {
        sup
    } else {
        return split(check_counting_identity(sup.count(), sub.count(), sum_m, q));
    };
    let ring = near.components.iter().find(|c| c.touches_inner);
    match ring {
        Some(c) if !c.simply_connected && !c.touches_outer => {
            let count = near.components.iter().filter(|c| c.simply_connected && c.touches_outer).count();
            IdentityCheck {
                kind: IdentityKind::OuterContact,
                outer_contact_count: Some(count),
                holds: check_annulus_case1(count, sum_m, q),
            }
        }
        _ => split(check_counting_identity(sup.count(), sub.count(), sum_m, q)),
    }
}

/// Level analysis at a user-chosen level; records whose level lies within
/// `10δ` of `t` enter the cluster count.
pub fn analyze_level(
    sol: &DiscreteSolution,
    records: &[CriticalPointRecord],
    t: f64,
    delta: f64,
    inner_constant: Option<f64>,
    merge_radius: f64,
) -> Result<LevelSetReport> {
    check_level(sol, t)?;
    let group: Vec<usize> = (0..records.len())
        .filter(|&i| {
            let (lo, hi) = record_level(sol, &records[i]);
            lo - 10.0 * delta <= t && t <= hi + 10.0 * delta
        })
        .collect();
    if !group.is_empty() {
        return analyze_critical_level(sol, records, &group, delta, inner_constant, merge_radius);
    }
    let sup = superlevel_components(sol, t)?;
    let sub = sublevel_components(sol, t)?;
    let diagnostics = match inner_constant {
        Some(_) => annulus_component_diagnostics(sol, t, records, merge_radius)?,
        None => Vec::new(),
    };
    Ok(LevelSetReport {
        t,
        m1: sup.count(),
        m2: sub.count(),
        q: None,
        sum_m: 0,
        records: Vec::new(),
        delta,
        superlevel: sup.components,
        sublevel: sub.components,
        identity: None,
        diagnostics,
    })
}

/// Segments of `{u = t}` per triangle, tagged with the adjacent superlevel component.
pub fn level_segments(sol: &DiscreteSolution, t: f64) -> Result<Vec<(usize, [crate::Point; 2])>> {
    let sup = superlevel_components(sol, t)?;
    let mesh = sol.mesh();
    let u = sol.nodal_values();
    let verts = mesh.vertices();
    let mut out = Vec::new();
    for tri in mesh.triangles() {
        let mut pts = Vec::with_capacity(2);
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let (ua, ub) = (u[a], u[b]);
            if (ua > t) != (ub > t) {
                let s = (t - ua) / (ub - ua);
                pts.push([
                    verts[a][0] + s * (verts[b][0] - verts[a][0]),
                    verts[a][1] + s * (verts[b][1] - verts[a][1]),
                ]);
            }
        }
        if pts.len() == 2 {
            let comp = tri.iter().find_map(|&v| sup.labels[v]).unwrap_or(0);
            out.push((comp, [pts[0], pts[1]]));
        }
    }
    Ok(out)
}

const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

/// SVG drawing of the level lines `{u = t}`, one group per superlevel component.
pub fn level_svg(sol: &DiscreteSolution, t: f64) -> Result<String> {
    let segs = level_segments(sol, t)?;
    let mesh: &MeshedDomain = sol.mesh();
    let r = mesh.geometry().outer_radius();
    let size = 600.0;
    let scale = size / (2.2 * r);
    let map = |p: crate::Point| (size / 2.0 + scale * p[0], size / 2.0 - scale * p[1]);
    let mut by_comp: BTreeMap<usize, Vec<[crate::Point; 2]>> = BTreeMap::new();
    for (c, s) in segs {
        by_comp.entry(c).or_default().push(s);
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(
        svg,
        r#"<circle cx="{c}" cy="{c}" r="{rr:.3}" fill="none" stroke="black"/>"#,
        c = size / 2.0,
        rr = scale * r
    );
    if let Some(a) = mesh.geometry().inner_radius() {
        let _ = writeln!(
            svg,
            r#"<circle cx="{c}" cy="{c}" r="{rr:.3}" fill="none" stroke="black"/>"#,
            c = size / 2.0,
            rr = scale * a
        );
    }
    for (c, segs) in by_comp {
        let _ = writeln!(svg, r#"<g id="component-{c}" stroke="{}" stroke-width="1.5">"#, PALETTE[c % PALETTE.len()]);
        for [p, q] in segs {
            let (x1, y1) = map(p);
            let (x2, y2) = map(q);
            let _ = writeln!(svg, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#);
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critical::{detect_critical_points, CriticalOptions, PointFlag};
    use crate::mesh::{build_annulus_mesh, build_disk_mesh};
    use crate::profile::BoundaryProfile;
    use crate::solver::{solve, CoefficientField, DirichletData, NewtonOptions};
    use std::sync::Arc;

    fn field(h: f64, f: impl Fn(crate::Point) -> f64) -> DiscreteSolution {
        let mesh = Arc::new(build_disk_mesh(1.0, h).unwrap());
        DiscreteSolution::interpolate(mesh, f, CoefficientField::Laplace).unwrap()
    }

    fn re_z2(p: crate::Point) -> f64 {
        p[0] * p[0] - p[1] * p[1]
    }

    fn re_z3(p: crate::Point) -> f64 {
        p[0].powi(3) - 3.0 * p[0] * p[1] * p[1]
    }

    #[test]
    fn component_examples() {
        let s2 = field(0.02, re_z2);
        let sup = superlevel_components(&s2, 0.0).unwrap();
        assert_eq!(sup.count(), 2);
        assert!(sup.components.iter().all(|c| c.touches_outer && c.simply_connected));
        assert_eq!(sublevel_components(&s2, 0.0).unwrap().count(), 2);
        assert_eq!(superlevel_components(&field(0.02, re_z3), 0.0).unwrap().count(), 3);
        let s1 = field(0.02, |p| p[0]);
        assert_eq!(superlevel_components(&s1, 0.0).unwrap().count(), 1);
        assert_eq!(sublevel_components(&s1, 0.0).unwrap().count(), 1);
    }

    #[test]
    fn level_out_of_range() {
        let s = field(0.1, |p| p[0]);
        assert!(matches!(superlevel_components(&s, 2.0), Err(Error::LevelOutOfRange { .. })));
        assert!(matches!(sublevel_components(&s, -1.0), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn identity_examples() {
        assert!(check_counting_identity(2, 2, 1, 1));
        assert!(check_counting_identity(3, 3, 2, 1));
        assert!(!check_counting_identity(2, 2, 2, 1));
        assert!(check_annulus_case1(2, 2, 1));
        assert!(!check_annulus_case1(2, 2, 2));
    }

    #[test]
    fn interpolated_saddles_satisfy_identity() {
        for (f, m, expect) in [(re_z2 as fn(crate::Point) -> f64, 1, (2, 2, 1)), (re_z3, 2, (3, 3, 1))] {
            let s = field(0.02, f);
            let recs = detect_critical_points(&s, &CriticalOptions::default()).unwrap();
            let delta = default_delta(&s);
            let rep = analyze_critical_level(&s, &recs, &[0], delta, None, 0.06).unwrap();
            assert_eq!((rep.m1, rep.m2, rep.q.unwrap()), expect);
            assert_eq!(rep.sum_m, m);
            assert!(rep.identity.unwrap().holds);
            assert_eq!(critical_clusters(&s, &recs, delta).unwrap(), 1);
        }
    }

    #[test]
    fn two_separate_saddles_at_one_level() {
        // Re(z³/3 − z/4): simple saddles at z = ±1/2 with values ∓1/12
        let s = field(0.02, |p| (p[0].powi(3) - 3.0 * p[0] * p[1] * p[1]) / 3.0 - p[0] / 4.0);
        let recs = detect_critical_points(&s, &CriticalOptions::default()).unwrap();
        assert_eq!(recs.len(), 2);
        let delta = default_delta(&s);
        assert!(matches!(critical_clusters(&s, &recs, delta), Err(Error::SplitLevels { .. })));
        assert_eq!(level_groups(&s, &recs, delta).len(), 2);
        assert!(matches!(critical_clusters(&s, &[], delta), Err(Error::EmptyRecords)));
    }

    #[test]
    fn regular_levels_are_locally_constant() {
        let s = field(0.02, re_z3);
        for t in [-0.3, 0.1, 0.45] {
            let d = 1e-6;
            for side in [Side::Super, Side::Sub] {
                let a = components(&s, t - 2.0 * d, side).unwrap().count();
                let b = components(&s, t + 2.0 * d, side).unwrap().count();
                assert_eq!(a, b);
            }
        }
    }

    fn annulus_solution(outer: f64) -> DiscreteSolution {
        let mesh = Arc::new(build_annulus_mesh(1.0, outer, 0.04).unwrap());
        let data = DirichletData::annulus(BoundaryProfile::new(vec![2.0, 0.0, 1.0], vec![]), 0.0);
        solve(mesh, &CoefficientField::Laplace, &data, &NewtonOptions::default()).unwrap()
    }

    #[test]
    fn annulus_critical_level() {
        let s = annulus_solution(3.0);
        let recs = detect_critical_points(&s, &CriticalOptions::default()).unwrap();
        assert_eq!(recs.len(), 2);
        let delta = default_delta(&s);
        let groups = level_groups(&s, &recs, delta);
        assert_eq!(groups.len(), 1);
        let rep = analyze_critical_level(&s, &recs, &groups[0], delta, Some(0.0), 0.12).unwrap();
        let id = rep.identity.unwrap();
        assert_eq!(id.kind, IdentityKind::OuterContact);
        assert_eq!(rep.q, Some(1));
        assert_eq!(id.outer_contact_count, Some(2));
        assert!(id.holds);
        assert!(rep.sublevel.iter().any(|c| c.touches_inner && !c.simply_connected));
    }

    #[test]
    fn annulus_ring_diagnostics() {
        let s = annulus_solution(3.0);
        let recs = detect_critical_points(&s, &CriticalOptions::default()).unwrap();
        let d = annulus_component_diagnostics(&s, 0.05, &recs, 0.12).unwrap();
        assert!(d.iter().all(|x| x.kind != DiagnosticKind::CriticalInsideRing));
        assert!(d.iter().any(|x| x.kind == DiagnosticKind::RingOuterCurve && x.side == Side::Sub));

        let mut fake = recs[0].clone();
        fake.x = 0.0;
        fake.y = 1.02;
        fake.flags = BTreeSet::from([PointFlag::NearBoundary]);
        let d = annulus_component_diagnostics(&s, 0.3, &[fake], 0.12).unwrap();
        assert_eq!(d.iter().filter(|x| x.kind == DiagnosticKind::CriticalInsideRing).count(), 1);

        let plain = annulus_solution(2.0);
        let d = annulus_component_diagnostics(&plain, 1.7, &[], 0.12).unwrap();
        assert!(d.iter().all(|x| x.kind != DiagnosticKind::CriticalInsideRing));
    }

    #[test]
    fn svg_has_one_group_per_component() {
        let s = field(0.05, re_z3);
        let svg = level_svg(&s, 0.1).unwrap();
        let groups = svg.matches("<g id=\"component-").count();
        assert_eq!(groups, superlevel_components(&s, 0.1).unwrap().count());
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}
