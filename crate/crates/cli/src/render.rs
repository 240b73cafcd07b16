//! Hasse diagram (DOT) and planar picture (SVG) exports.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt::Write;

use immsnap::topology;
use immsnap::{Complex, ProcSet, SimplexId};

/// Face poset, edges from each codimension-one face to its coface.
pub fn hasse_dot(k: &Complex) -> String {
    let mut out = String::new();
    writeln!(out, "digraph hasse {{").unwrap();
    writeln!(out, "  rankdir=BT;").unwrap();
    writeln!(out, "  node [shape=box, fontname=\"monospace\", fontsize=9];").unwrap();
    for (id, sigma) in k.simplices().iter().enumerate() {
        writeln!(out, "  s{id} [label=\"{sigma}\\ndim {}\"];", k.dim(id)).unwrap();
    }
    for id in 0..k.len() {
        for &f in k.faces(id) {
            writeln!(out, "  s{f} -> s{id};").unwrap();
        }
    }
    out.push('}');
    out
}

const SIZE: f64 = 640.0;
const RADIUS: f64 = 280.0;
const PALETTE: [&str; 8] = ["#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5"];
const COLORS: [&str; 3] = ["#d62728", "#1f77b4", "#2ca02c"];

/// The two vertex ids of an edge, smaller first.
fn edge_ends(k: &Complex, edge: SimplexId) -> (SimplexId, SimplexId) {
    let f = k.faces(edge);
    (f[0].min(f[1]), f[0].max(f[1]))
}

/// Boundary vertices in cyclic order (or path order in dimension one).
fn boundary_cycle(k: &Complex, boundary: &fixedbitset::FixedBitSet) -> Vec<SimplexId> {
    let verts: Vec<SimplexId> = boundary.ones().filter(|&i| k.dim(i) == 0).collect();
    if k.top_dim() < 2 {
        return verts;
    }
    let mut adj: BTreeMap<SimplexId, Vec<SimplexId>> = BTreeMap::new();
    for e in boundary.ones().filter(|&i| k.dim(i) == 1) {
        let (a, b) = edge_ends(k, e);
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let Some(&start) = verts.first() else { return verts };
    let mut cycle = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    loop {
        let next = adj[&cur].iter().copied().find(|&n| n != prev);
        match next {
            Some(n) if n != start => {
                cycle.push(n);
                prev = cur;
                cur = n;
            }
            _ => break,
        }
    }
    cycle
}

/// Tutte embedding: boundary on a circle (or the two ends of a segment), every
/// interior vertex at the average of its neighbors.
fn layout(k: &Complex) -> BTreeMap<SimplexId, (f64, f64)> {
    let center = SIZE / 2.0;
    let mut pos: BTreeMap<SimplexId, (f64, f64)> = k.ids_of_dim(0).map(|v| (v, (center, center))).collect();
    if pos.len() <= 1 {
        return pos;
    }
    let b = topology::boundary(k);
    let fixed = boundary_cycle(k, &b.boundary);
    if k.top_dim() == 1 {
        pos.insert(fixed[0], (center - RADIUS, center));
        pos.insert(fixed[1], (center + RADIUS, center));
    } else {
        for (i, &v) in fixed.iter().enumerate() {
            let angle = 2.0 * PI * i as f64 / fixed.len() as f64 - PI / 2.0;
            pos.insert(v, (center + RADIUS * angle.cos(), center + RADIUS * angle.sin()));
        }
    }
    let fixed: BTreeSet<SimplexId> = fixed.into_iter().collect();
    let mut nbrs: BTreeMap<SimplexId, Vec<SimplexId>> = BTreeMap::new();
    for e in k.ids_of_dim(1) {
        let (a, c) = edge_ends(k, e);
        nbrs.entry(a).or_default().push(c);
        nbrs.entry(c).or_default().push(a);
    }
    for _ in 0..10_000 {
        let mut moved: f64 = 0.0;
        for (&v, ns) in &nbrs {
            if fixed.contains(&v) {
                continue;
            }
            let (sx, sy) = ns.iter().fold((0.0, 0.0), |(x, y), n| (x + pos[n].0, y + pos[n].1));
            let new = (sx / ns.len() as f64, sy / ns.len() as f64);
            let old = pos.insert(v, new).expect("vertex placed");
            moved = moved.max((old.0 - new.0).abs() + (old.1 - new.1).abs());
        }
        if moved < 1e-9 {
            break;
        }
    }
    pos
}

/// Planar picture for supports of size at most 3, facets shaded by their first layer.
pub fn svg(k: &Complex) -> Result<String, String> {
    let n = k.counter().support().len();
    if n > 3 {
        return Err(format!("svg export needs at most 3 processes, this counter has {n}"));
    }
    let pos = layout(k);
    let supp: Vec<_> = k.counter().support().iter().collect();
    let color_of = |v: SimplexId| k.simplex(v).active_set().min().and_then(|p| supp.iter().position(|&q| q == p)).unwrap_or(0);
    let layers: BTreeSet<ProcSet> = k.facet_ids().iter().map(|&f| k.simplex(f).row(1).witnessed).collect();
    let shade: BTreeMap<ProcSet, &str> = layers.into_iter().zip(PALETTE.iter().cycle().copied()).collect();
    let mut out = String::new();
    writeln!(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">").unwrap();
    writeln!(out, "<title>P({})</title>", k.counter()).unwrap();
    if k.top_dim() == 2 {
        for &f in k.facet_ids() {
            let verts = k.vertices(f);
            let pts: Vec<String> = verts.values().map(|v| format!("{:.3},{:.3}", pos[v].0, pos[v].1)).collect();
            let fill = shade[&k.simplex(f).row(1).witnessed];
            writeln!(out, "<polygon points=\"{}\" fill=\"{fill}\" stroke=\"none\"><title>{}</title></polygon>", pts.join(" "), k.simplex(f)).unwrap();
        }
    }
    for e in k.ids_of_dim(1) {
        let (a, b) = edge_ends(k, e);
        let ((x1, y1), (x2, y2)) = (pos[&a], pos[&b]);
        writeln!(out, "<line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" stroke=\"#333\" stroke-width=\"1\"/>").unwrap();
    }
    for (&v, &(x, y)) in &pos {
        let fill = COLORS[color_of(v)];
        writeln!(out, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"4\" fill=\"{fill}\"><title>{}</title></circle>", k.simplex(v)).unwrap();
    }
    out.push_str("</svg>");
    Ok(out)
}
