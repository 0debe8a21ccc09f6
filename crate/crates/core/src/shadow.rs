//! Special polyhedra with gleams, and the two conversions between shadows
//! and Kirby diagrams.
//!
//! A shadow is stored by incidence: each edge of the singular set has two
//! end vertices, and each region lists the edges its boundary runs along,
//! with a direction. End 0 of an edge is its tail.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::kirby::{Crossing, DiscEnd, DiscPair, KirbyDiagram, KirbyError, Strand};

/// Convention tag carried by shadows whose gleams were derived from
/// framings rather than computed.
pub const GLEAM_CONVENTION: &str = "artifact-v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShadowError {
    #[error("edge {edge} refers to vertex {vertex}, but there are {count} vertices")]
    DanglingVertex { edge: usize, vertex: usize, count: usize },
    #[error("edge {0} must list zero or two ends")]
    EdgeEnds(usize),
    #[error("region {region} refers to edge {edge}, which does not exist")]
    DanglingEdge { region: usize, edge: usize },
    #[error("polyhedron is not special: {}", .0.join("; "))]
    NotSpecial(Vec<String>),
    #[error("cut system is invalid: {0}")]
    BadCuts(String),
    #[error("diagram must be connected with at least one crossing (run connect first)")]
    NeedsConnected,
    #[error("gleam {0} is not a half-integer")]
    BadGleam(String),
    #[error(transparent)]
    Kirby(#[from] KirbyError),
}

/// A half-integer, stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Gleam(pub i64);

impl Gleam {
    pub fn integer(n: i64) -> Self {
        Gleam(2 * n)
    }

    /// Largest integer not above the gleam.
    pub fn floor(&self) -> i64 {
        self.0.div_euclid(2)
    }
}

impl fmt::Display for Gleam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for Gleam {
    type Err = ShadowError;

    fn from_str(s: &str) -> Result<Self, ShadowError> {
        let bad = || ShadowError::BadGleam(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            Some((n, "2")) => n.trim().parse().map(Gleam).map_err(|_| bad()),
            Some(_) => Err(bad()),
            None => s.parse::<i64>().map(Gleam::integer).map_err(|_| bad()),
        }
    }
}

impl Serialize for Gleam {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Gleam {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(Gleam::integer(n)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShadowEdge {
    /// `[tail, head]`, or empty for a closed triple circle.
    pub ends: Vec<usize>,
}

/// One pass of a region boundary along an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, i8)", into = "(usize, i8)")]
pub struct Step {
    pub edge: usize,
    pub forward: bool,
}

impl From<(usize, i8)> for Step {
    fn from((edge, dir): (usize, i8)) -> Self {
        Step { edge, forward: dir >= 0 }
    }
}

impl From<Step> for (usize, i8) {
    fn from(s: Step) -> Self {
        (s.edge, if s.forward { 1 } else { -1 })
    }
}

impl Step {
    fn new(edge: usize, forward: bool) -> Self {
        Step { edge, forward }
    }

    /// `(edge, end)` the step leaves from and arrives at.
    fn departs(&self) -> (usize, usize) {
        (self.edge, if self.forward { 0 } else { 1 })
    }

    fn arrives(&self) -> (usize, usize) {
        (self.edge, if self.forward { 1 } else { 0 })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub walk: Vec<Step>,
    #[serde(default)]
    pub gleam: Gleam,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialShadow {
    pub vertices: usize,
    pub edges: Vec<ShadowEdge>,
    pub regions: Vec<Region>,
    /// Accepted for compatibility; arrangements are derived, not read.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gleam_convention: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialReport {
    pub special: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSystem {
    pub cut_edges: Vec<usize>,
}

impl SpecialShadow {
    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    fn check_refs(&self) -> Result<(), ShadowError> {
        for (i, e) in self.edges.iter().enumerate() {
            if !(e.ends.is_empty() || e.ends.len() == 2) {
                return Err(ShadowError::EdgeEnds(i));
            }
            if let Some(&v) = e.ends.iter().find(|&&v| v >= self.vertices) {
                return Err(ShadowError::DanglingVertex { edge: i, vertex: v, count: self.vertices });
            }
        }
        for (r, reg) in self.regions.iter().enumerate() {
            if let Some(s) = reg.walk.iter().find(|s| s.edge >= self.edges.len()) {
                return Err(ShadowError::DanglingEdge { region: r, edge: s.edge });
            }
        }
        Ok(())
    }

    fn vertex_at(&self, (edge, end): (usize, usize)) -> Option<usize> {
        self.edges[edge].ends.get(end).copied()
    }

    /// Checks that every point has a special neighborhood and the
    /// stratification is cellular.
    pub fn is_special(&self) -> Result<SpecialReport, ShadowError> {
        self.check_refs()?;
        let mut v = Vec::new();
        if self.vertices == 0 {
            v.push("no vertices: the singular set does not cellularize".to_string());
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.ends.is_empty() {
                v.push(format!("edge {i} is a closed triple circle"));
            }
        }
        let mut uses = vec![0usize; self.edges.len()];
        for reg in &self.regions {
            for s in &reg.walk {
                uses[s.edge] += 1;
            }
        }
        for (i, &u) in uses.iter().enumerate() {
            if u != 3 {
                v.push(format!("edge {i} borders {u} region sheets, not 3"));
            }
        }
        let mut degree = vec![0usize; self.vertices];
        for e in &self.edges {
            for &x in &e.ends {
                degree[x] += 1;
            }
        }
        for (x, &d) in degree.iter().enumerate() {
            if d != 4 {
                v.push(format!("vertex {x} has degree {d}, not 4"));
            }
        }
        let mut corners: Vec<Vec<[(usize, usize); 2]>> = vec![Vec::new(); self.vertices];
        for (r, reg) in self.regions.iter().enumerate() {
            if reg.walk.is_empty() {
                v.push(format!("region {r} has an empty boundary"));
                continue;
            }
            let n = reg.walk.len();
            for k in 0..n {
                let (a, b) = (reg.walk[k], reg.walk[(k + 1) % n]);
                match (self.vertex_at(a.arrives()), self.vertex_at(b.departs())) {
                    (Some(x), Some(y)) if x == y => {
                        let mut c = [a.arrives(), b.departs()];
                        c.sort();
                        corners[x].push(c);
                    }
                    (Some(_), Some(_)) => v.push(format!("region {r}: boundary breaks between steps {k} and {}", (k + 1) % n)),
                    _ => {}
                }
            }
        }
        for (x, cs) in corners.iter_mut().enumerate() {
            if degree[x] != 4 {
                continue;
            }
            cs.sort();
            let distinct = cs.windows(2).all(|w| w[0] != w[1]);
            let proper = cs.iter().all(|c| c[0] != c[1]);
            if cs.len() != 6 || !distinct || !proper {
                v.push(format!("vertex {x}: link is not the tetrahedron graph"));
            }
        }
        if self.vertices > 0 {
            let mut parent: Vec<usize> = (0..self.vertices).collect();
            for e in &self.edges {
                if let [a, b] = e.ends[..] {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
            let root = find(&mut parent, 0);
            if (0..self.vertices).any(|x| find(&mut parent, x) != root) {
                v.push("polyhedron is not connected".into());
            }
        }
        Ok(SpecialReport { special: v.is_empty(), violations: v })
    }

    fn require_special(&self) -> Result<(), ShadowError> {
        let r = self.is_special()?;
        if r.special {
            Ok(())
        } else {
            Err(ShadowError::NotSpecial(r.violations))
        }
    }

    /// The four `(edge, end)` pairs at each vertex, in edge order.
    fn vertex_ends(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.vertices];
        for (e, edge) in self.edges.iter().enumerate() {
            for (end, &x) in edge.ends.iter().enumerate() {
                out[x].push((e, end));
            }
        }
        out
    }
}

fn find(p: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while p[r] != r {
        r = p[r];
    }
    p[x] = r;
    r
}

/// Whether removing `cuts` leaves a spanning tree of the singular graph.
pub fn is_cut_system(p: &SpecialShadow, cuts: &CutSystem) -> bool {
    let mut cut = vec![false; p.edges.len()];
    for &c in &cuts.cut_edges {
        match cut.get_mut(c) {
            Some(x) if !*x => *x = true,
            _ => return false,
        }
    }
    let kept: Vec<&ShadowEdge> = p.edges.iter().enumerate().filter(|(i, _)| !cut[*i]).map(|(_, e)| e).collect();
    if p.vertices == 0 || kept.len() + 1 != p.vertices {
        return false;
    }
    let mut parent: Vec<usize> = (0..p.vertices).collect();
    for e in kept {
        let [a, b] = e.ends[..] else { return false };
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return false;
        }
        parent[ra] = rb;
    }
    true
}

/// `n + 1` edges whose complement is a spanning tree, from a BFS tree.
pub fn find_cut_system(p: &SpecialShadow) -> Result<CutSystem, ShadowError> {
    p.require_special()?;
    let n = p.vertices;
    if p.edges.len() != 2 * n {
        return Err(ShadowError::BadCuts(format!("{} edges on {n} vertices, expected {}", p.edges.len(), 2 * n)));
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, e) in p.edges.iter().enumerate() {
        adj[e.ends[0]].push((i, e.ends[1]));
        adj[e.ends[1]].push((i, e.ends[0]));
    }
    let mut seen = vec![false; n];
    let mut tree = vec![false; p.edges.len()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(x) = queue.pop_front() {
        for &(e, y) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                tree[e] = true;
                queue.push_back(y);
            }
        }
    }
    let cuts = CutSystem { cut_edges: (0..p.edges.len()).filter(|&e| !tree[e]).collect() };
    if cuts.cut_edges.len() != n + 1 || !is_cut_system(p, &cuts) {
        return Err(ShadowError::BadCuts("complement of the BFS tree is not a spanning tree".into()));
    }
    Ok(cuts)
}

/// Shadow of a connected diagram with at least one crossing: the surface
/// carrying the diagram with one tube per 1-handle, the cocore discs of the
/// tubes, and one core disc per link component.
///
/// Vertices are the crossings and the points where strands pass through the
/// tubes. Core discs take the component's framing as gleam and all other
/// regions gleam 0; this is a convention, flagged in the output.
pub fn from_kirby(d: &KirbyDiagram) -> Result<SpecialShadow, ShadowError> {
    if d.crossings().is_empty() || !d.is_connected() {
        return Err(ShadowError::NeedsConnected);
    }
    let c = d.crossings().len();
    let mut pair_offset = Vec::new();
    let mut total = c;
    for p in d.disc_pairs() {
        pair_offset.push(total);
        total += p.slots;
    }
    let passage = |e: DiscEnd| pair_offset[e.pair] + e.slot;

    // Link arcs become edges, then the cocore arcs.
    let mut edge_of: HashMap<usize, usize> = HashMap::new();
    let mut edges: Vec<ShadowEdge> = Vec::new();
    let mut tail: HashMap<usize, usize> = HashMap::new();
    let mut head: HashMap<usize, usize> = HashMap::new();
    let mut rotation: Vec<[(usize, usize); 4]> = vec![[(0, 0); 4]; total];
    for (i, x) in d.crossings().iter().enumerate() {
        for (pin, pout) in x.passes() {
            head.insert(x.arcs[pin], i);
            tail.insert(x.arcs[pout], i);
        }
    }
    for s in d.strands() {
        if let (Some(a), Some(b)) = (s.start, s.end) {
            tail.insert(s.arcs[0], passage(a));
            head.insert(*s.arcs.last().unwrap(), passage(b));
        }
        for &a in &s.arcs {
            edge_of.insert(a, edges.len());
            edges.push(ShadowEdge { ends: vec![tail[&a], head[&a]] });
        }
    }
    let mut cocore: Vec<Vec<usize>> = Vec::new();
    for (p, pair) in d.disc_pairs().iter().enumerate() {
        let ids: Vec<usize> = (0..pair.slots).map(|k| edges.len() + k).collect();
        for k in 0..pair.slots {
            let from = pair_offset[p] + k;
            let to = pair_offset[p] + (k + 1) % pair.slots;
            edges.push(ShadowEdge { ends: vec![from, to] });
        }
        cocore.push(ids);
    }

    for (i, x) in d.crossings().iter().enumerate() {
        let ins: Vec<usize> = x.passes().iter().map(|p| p.0).collect();
        for pos in 0..4 {
            rotation[i][pos] = (edge_of[&x.arcs[pos]], if ins.contains(&pos) { 1 } else { 0 });
        }
    }
    let mut side_end: HashMap<DiscEnd, (usize, usize)> = HashMap::new();
    for s in d.strands() {
        if let (Some(a), Some(b)) = (s.start, s.end) {
            side_end.insert(a, (edge_of[&s.arcs[0]], 0));
            side_end.insert(b, (edge_of[s.arcs.last().unwrap()], 1));
        }
    }
    for (p, pair) in d.disc_pairs().iter().enumerate() {
        let m = pair.slots;
        for k in 0..m {
            let at = |side| side_end[&DiscEnd { pair: p, side, slot: k }];
            rotation[pair_offset[p] + k] = [at(0), (cocore[p][k], 0), at(1), (cocore[p][(k + m - 1) % m], 1)];
        }
    }

    // Surface faces: leave each vertex by the edge end preceding the arrival
    // end in the rotation.
    let mut loc: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for (v, rot) in rotation.iter().enumerate() {
        for (i, &ee) in rot.iter().enumerate() {
            loc.insert(ee, (v, i));
        }
    }
    let mut used: HashMap<Step, bool> = HashMap::new();
    let mut regions = Vec::new();
    for e in 0..edges.len() {
        for fwd in [true, false] {
            let start = Step::new(e, fwd);
            if used.contains_key(&start) {
                continue;
            }
            let mut walk = Vec::new();
            let mut cur = start;
            loop {
                used.insert(cur, true);
                walk.push(cur);
                let (v, i) = loc[&cur.arrives()];
                let (ne, nend) = rotation[v][(i + 3) % 4];
                cur = Step::new(ne, nend == 0);
                if cur == start {
                    break;
                }
            }
            regions.push(Region { walk, gleam: Gleam::default() });
        }
    }
    for ids in &cocore {
        regions.push(Region { walk: ids.iter().map(|&e| Step::new(e, true)).collect(), gleam: Gleam::default() });
    }
    for (ci, comp) in d.components().iter().enumerate() {
        let walk = comp
            .iter()
            .flat_map(|&s| d.strands()[s].arcs.iter().map(|a| Step::new(edge_of[a], true)))
            .collect();
        regions.push(Region { walk, gleam: Gleam::integer(d.framing(ci)) });
    }
    let shadow = SpecialShadow {
        vertices: total,
        edges,
        regions,
        layout: None,
        gleam_convention: Some(GLEAM_CONVENTION.to_string()),
    };
    shadow.require_special()?;
    Ok(shadow)
}

/// A crossing under construction: arcs by geometric position (counter-
/// clockwise), with the under strand through positions 0 and 2.
#[derive(Default, Clone)]
struct Draft {
    arcs: [Option<usize>; 4],
    /// Position where the under strand enters.
    under_in: Option<usize>,
    over_in: Option<usize>,
}

#[derive(Clone, Copy)]
enum Event {
    /// Pass through draft crossing `id` from position `from` to `to`.
    Pass { id: usize, from: usize, to: usize },
    /// Leave through a disc slot and come back through its partner.
    Handle { out: DiscEnd },
}

/// Diagram whose 1-handles are the cut edges: the singular tree is drawn in
/// the plane with one crossing per vertex, every region becomes a 2-handle,
/// and each cut edge's three sheets pass through a 1-handle, reordered by a
/// braid of at most three crossings.
///
/// Framings are the floors of the gleams (a convention, like the gleams of
/// [`from_kirby`]); the counts of strands, discs and crossings do not
/// depend on it.
pub fn to_kirby(p: &SpecialShadow, cuts: &CutSystem) -> Result<KirbyDiagram, ShadowError> {
    p.require_special()?;
    if cuts.cut_edges.len() != p.vertices + 1 || !is_cut_system(p, cuts) {
        return Err(ShadowError::BadCuts("cut edges must be n+1 edges whose complement is a spanning tree".into()));
    }
    let ends = p.vertex_ends();
    let slot_of = |v: usize, ee: (usize, usize)| ends[v].iter().position(|&x| x == ee).expect("edge end at vertex");
    let is_cut: Vec<bool> = (0..p.edges.len()).map(|e| cuts.cut_edges.contains(&e)).collect();

    // Lanes: each step of a region walk is one lane of its edge. At a vertex
    // a corner joins the lane arriving at one slot to the lane leaving by
    // another.
    // For every (vertex, slot) the lane there going to each other slot.
    let mut corner_lane: HashMap<(usize, usize, usize), (usize, usize)> = HashMap::new();
    for (r, reg) in p.regions.iter().enumerate() {
        let n = reg.walk.len();
        for k in 0..n {
            let (a, b) = (reg.walk[k], reg.walk[(k + 1) % n]);
            let v = p.vertex_at(a.arrives()).unwrap();
            let (sa, sb) = (slot_of(v, a.arrives()), slot_of(v, b.departs()));
            corner_lane.insert((v, sa, sb), (r, k));
            corner_lane.insert((v, sb, sa), (r, (k + 1) % n));
        }
    }

    // Arrangements: counterclockwise slot order at each vertex. Looking
    // into a vertex from slot arr[i], its lanes run left to right towards
    // arr[i+3], arr[i+2], arr[i+1].
    let lane_order = |arr: &[usize; 4], v: usize, s: usize| -> [(usize, usize); 3] {
        let i = arr.iter().position(|&x| x == s).unwrap();
        [3, 2, 1].map(|o| corner_lane[&(v, s, arr[(i + o) % 4])])
    };
    let mut arrangement: Vec<Option<[usize; 4]>> = vec![None; p.vertices];
    arrangement[0] = Some([0, 1, 2, 3]);
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        let arr = arrangement[v].unwrap();
        for (s, &(e, end)) in ends[v].iter().enumerate() {
            if is_cut[e] {
                continue;
            }
            let w = p.edges[e].ends[1 - end];
            if arrangement[w].is_some() {
                continue;
            }
            let t = slot_of(w, (e, 1 - end));
            // The same lanes, seen from the other side, in reverse.
            let mut want = lane_order(&arr, v, s);
            want.reverse();
            let other = |lane: (usize, usize)| {
                (0..4).find(|&y| y != t && corner_lane[&(w, t, y)] == lane).unwrap()
            };
            let [y0, y1, y2] = want.map(other);
            arrangement[w] = Some([t, y2, y1, y0]);
            queue.push_back(w);
        }
    }
    let arrangement: Vec<[usize; 4]> = arrangement.into_iter().map(|a| a.expect("tree spans")).collect();
    let pos = |v: usize, s: usize| arrangement[v].iter().position(|&x| x == s).unwrap();

    let mut drafts: Vec<Draft> = vec![Draft::default(); p.vertices];

    // Cut edges: side 0 at the tail, side 1 at the head.
    let mut pairs = Vec::new();
    let mut slot_at: HashMap<(usize, usize), usize> = HashMap::new();
    // Braid passes per lane, ordered from the side-1 disc towards the head.
    let mut braid: HashMap<(usize, usize), Vec<(usize, usize, usize)>> = HashMap::new();
    for (pi, &e) in cuts.cut_edges.iter().enumerate() {
        let [v, w] = [p.edges[e].ends[0], p.edges[e].ends[1]];
        let (sv, sw) = (slot_of(v, (e, 0)), slot_of(w, (e, 1)));
        let at_v = lane_order(&arrangement[v], v, sv);
        let at_w = lane_order(&arrangement[w], w, sw);
        // A lane is one step of a walk, so it is the same object at both
        // ends of the edge and keeps its slot through the handle.
        for (j, l) in at_v.iter().enumerate() {
            slot_at.insert(*l, j);
        }
        // Leaving the side-1 disc the lanes appear mirrored; sort them into
        // the order the head vertex expects.
        let mut cur: Vec<(usize, usize)> = at_v.iter().rev().copied().collect();
        let target: Vec<(usize, usize)> = at_w.to_vec();
        let rank = |l: &(usize, usize)| target.iter().position(|x| x == l).unwrap();
        loop {
            let Some(q) = (0..2).find(|&q| rank(&cur[q]) > rank(&cur[q + 1])) else { break };
            let id = drafts.len();
            drafts.push(Draft::default());
            braid.entry(cur[q]).or_default().push((id, 0, 2));
            braid.entry(cur[q + 1]).or_default().push((id, 1, 3));
            cur.swap(q, q + 1);
        }
        pairs.push((pi, e));
    }
    let pair_of_edge: HashMap<usize, usize> = pairs.iter().map(|&(pi, e)| (e, pi)).collect();

    // Walk every region, recording crossing passes and handle passages.
    let mut region_events: Vec<Vec<Event>> = Vec::new();

    for (r, reg) in p.regions.iter().enumerate() {
        let n = reg.walk.len();
        let first_cut = (0..n).find(|&k| is_cut[reg.walk[k].edge]).expect("every region meets a cut edge");
        let mut events = Vec::new();
        for o in 0..n {
            let k = (first_cut + o) % n;
            let step = reg.walk[k];
            let lane = (r, k);
            if is_cut[step.edge] {
                let pair = pair_of_edge[&step.edge];
                let slot = slot_at[&lane];
                let passes = braid.get(&lane).cloned().unwrap_or_default();
                if step.forward {
                    events.push(Event::Handle { out: DiscEnd { pair, side: 0, slot } });
                    events.extend(passes.iter().map(|&(id, a, b)| Event::Pass { id, from: a, to: b }));
                } else {
                    events.extend(passes.iter().rev().map(|&(id, a, b)| Event::Pass { id, from: b, to: a }));
                    events.push(Event::Handle { out: DiscEnd { pair, side: 1, slot } });
                }
            }
            let next = reg.walk[(k + 1) % n];
            let v = p.vertex_at(step.arrives()).unwrap();
            let (a, b) = (pos(v, slot_of(v, step.arrives())), pos(v, slot_of(v, next.departs())));
            if (a + 2) % 4 == b {
                events.push(Event::Pass { id: v, from: a, to: b });
            }
        }
        region_events.push(events);
    }

    // Cut the event lists into strands at the handle passages and number arcs.
    let mut strands = Vec::new();
    let mut next_arc = 0usize;
    let mut region_first_strand = Vec::new();
    for events in &mut region_events {
        let h = events.iter().position(|e| matches!(e, Event::Handle { .. })).expect("every region meets a cut edge");
        events.rotate_left(h);
        region_first_strand.push(strands.len());
        let Event::Handle { out: first } = events[0] else { unreachable!("walks start at a cut") };
        let mut start = first.partner();
        let mut arcs = vec![next_arc];
        next_arc += 1;
        for ev in events[1..].iter().chain(std::iter::once(&events[0])) {
            match *ev {
                Event::Pass { id, from, to } => {
                    let incoming = *arcs.last().unwrap();
                    let outgoing = next_arc;
                    next_arc += 1;
                    let dr = &mut drafts[id];
                    dr.arcs[from] = Some(incoming);
                    dr.arcs[to] = Some(outgoing);
                    if from % 2 == 0 {
                        dr.under_in = Some(from);
                    } else {
                        dr.over_in = Some(from);
                    }
                    arcs.push(outgoing);
                }
                Event::Handle { out } => {
                    strands.push(Strand::open(std::mem::take(&mut arcs), start, out));
                    start = out.partner();
                    arcs.push(next_arc);
                    next_arc += 1;
                }
            }
        }
        // The dangling arc opened after the final passage is unused.
        next_arc -= 1;
    }
    let crossings: Vec<Crossing> = drafts
        .iter()
        .map(|dr| {
            let u = dr.under_in.expect("every crossing has an under pass");
            let o = dr.over_in.expect("every crossing has an over pass");
            let arcs = [0, 1, 2, 3].map(|k| dr.arcs[(u + k) % 4].expect("all four arcs placed"));
            Crossing { arcs, sign: if (o + 4 - u) % 4 == 3 { 1 } else { -1 } }
        })
        .collect();
    let disc_pairs = vec![DiscPair { slots: 3 }; cuts.cut_edges.len()];
    let draft = KirbyDiagram::new(crossings.clone(), strands.clone(), disc_pairs.clone(), BTreeMap::new())?;
    let comp = draft.component_of_strand();
    let framings: BTreeMap<usize, i64> = p
        .regions
        .iter()
        .enumerate()
        .map(|(r, reg)| (comp[region_first_strand[r]], reg.gleam.floor()))
        .filter(|&(_, f)| f != 0)
        .collect();
    Ok(KirbyDiagram::new(crossings, strands, disc_pairs, framings)?)
}

/// A random connected special polyhedron with `n ≥ 1` vertices: a random
/// 4-regular multigraph with a random matching of the three sheets along
/// each edge.
pub fn random_special<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SpecialShadow {
    assert!(n >= 1, "a special polyhedron has at least one vertex");
    loop {
        let mut half: Vec<(usize, usize)> = (0..n).flat_map(|v| (0..4).map(move |s| (v, s))).collect();
        half.shuffle(rng);
        let links: Vec<((usize, usize), (usize, usize))> = half.chunks(2).map(|c| (c[0], c[1])).collect();
        let perms: Vec<[usize; 3]> = links
            .iter()
            .map(|_| {
                let mut p = [0, 1, 2];
                p.shuffle(rng);
                p
            })
            .collect();
        if let Some(s) = build_special(n, &links, &perms) {
            return s;
        }
    }
}

/// Traces regions from an explicit vertex/edge/sheet-matching description.
/// `perms[e][i]` sends the `i`-th sheet at the first end of `links[e]` to the
/// `perms[e][i]`-th sheet at the second end, sheets at an end being the
/// corners towards the other three slots in increasing order.
fn build_special(n: usize, links: &[((usize, usize), (usize, usize))], perms: &[[usize; 3]]) -> Option<SpecialShadow> {
    let mut at: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for (e, &(a, b)) in links.iter().enumerate() {
        at.insert(a, (e, 0));
        at.insert(b, (e, 1));
    }
    let others = |s: usize| -> Vec<usize> { (0..4).filter(|&x| x != s).collect() };
    // Follow the sheet `(v, {from, to})` out through slot `to`.
    let cross = |v: usize, from: usize, to: usize| -> (usize, usize, usize, Step) {
        let (e, end) = at[&(v, to)];
        let (a, b) = links[e];
        let (there, idx) = if end == 0 {
            (b, perms[e][others(to).iter().position(|&x| x == from).unwrap()])
        } else {
            (a, perms[e].iter().position(|&x| x == others(to).iter().position(|&y| y == from).unwrap()).unwrap())
        };
        let (w, t) = there;
        (w, t, others(t)[idx], Step::new(e, end == 0))
    };
    let mut used: HashMap<(usize, usize, usize), bool> = HashMap::new();
    let mut regions = Vec::new();
    for v in 0..n {
        for a in 0..4 {
            for b in a + 1..4 {
                if used.contains_key(&(v, a, b)) {
                    continue;
                }
                let mut walk = Vec::new();
                let (mut x, mut from, mut to) = (v, a, b);
                loop {
                    used.insert((x, from.min(to), from.max(to)), true);
                    let (w, t, next, step) = cross(x, from, to);
                    walk.push(step);
                    (x, from, to) = (w, t, next);
                    if (x, from, to) == (v, a, b) {
                        break;
                    }
                    if used.contains_key(&(x, from.min(to), from.max(to))) {
                        return None;
                    }
                }
                regions.push(Region { walk, gleam: Gleam::default() });
            }
        }
    }
    let edges = links.iter().map(|&((v, _), (w, _))| ShadowEdge { ends: vec![v, w] }).collect();
    let s = SpecialShadow { vertices: n, edges, regions, layout: None, gleam_convention: None };
    s.is_special().ok()?.special.then_some(s)
}

/// The one-vertex special polyhedron with two regions.
pub fn abalone() -> SpecialShadow {
    let pairings = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];
    let mut perms = Vec::new();
    for a in [0, 1, 2] {
        for b in [0, 1, 2] {
            for c in [0, 1, 2] {
                if a != b && b != c && a != c {
                    perms.push([a, b, c]);
                }
            }
        }
    }
    for pairing in pairings {
        let links: Vec<_> = pairing.iter().map(|&(s, t)| ((0, s), (0, t))).collect();
        for p in &perms {
            for q in &perms {
                if let Some(s) = build_special(1, &links, &[*p, *q]) {
                    if s.regions.len() == 2 {
                        return s;
                    }
                }
            }
        }
    }
    unreachable!("the abalone exists")
}
