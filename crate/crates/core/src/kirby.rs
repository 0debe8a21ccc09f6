//! Kirby diagrams: a planar diagram code for the attaching link, plus pairs
//! of discs standing for 1-handles.
//!
//! Crossings list their four arcs counterclockwise starting from the
//! incoming under-arc, so the under strand runs `a → c`. With sign `+1` the
//! over strand runs `d → b`, with sign `−1` it runs `b → d`.
//!
//! A strand is either closed or runs between two disc slots. Slot `k` on
//! side 0 of a pair is glued to slot `k` on side 1, so a strand ending at
//! `(pair, s, k)` continues with the strand starting at `(pair, 1−s, k)`.
//! The chains of strands formed this way are the link components, indexed
//! by their smallest strand index.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{self, FormError, UnimodularForm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KirbyError {
    #[error("crossing {0}: sign must be +1 or −1")]
    BadSign(usize),
    #[error("arc {0} appears in more than one strand")]
    ArcReused(usize),
    #[error("arc {0} is used by a crossing but belongs to no strand")]
    UnknownArc(usize),
    #[error("arc {arc} {what}")]
    ArcEnds { arc: usize, what: &'static str },
    #[error("strand {strand}: arcs {from} → {to} do not continue through a common crossing")]
    BrokenStrand { strand: usize, from: usize, to: usize },
    #[error("strand {0}: a strand is either closed or has both disc endpoints")]
    StrandEnds(usize),
    #[error("strand {0} has no arcs")]
    EmptyStrand(usize),
    #[error("disc slot (pair {pair}, side {side}, slot {slot}) is {what}")]
    DiscSlot { pair: usize, side: u8, slot: usize, what: &'static str },
    #[error("strand {0}: orientation disagrees across its 1-handle")]
    Orientation(usize),
    #[error("framing given for component {0}, which does not exist")]
    FramingIndex(usize),
    #[error("diagram has 1-handles; the linking form is only defined without them")]
    HasOneHandles,
    #[error("linking matrix is not unimodular: |det| = {0}")]
    NotUnimodular(String),
    #[error("sphere data: {0}")]
    BadSphere(String),
    #[error("arc {0} does not exist")]
    NoSuchArc(usize),
    #[error(transparent)]
    Form(#[from] FormError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Crossing {
    pub arcs: [usize; 4],
    pub sign: i8,
}

impl Crossing {
    /// Positions of the incoming and outgoing over-arc.
    fn over(&self) -> (usize, usize) {
        if self.sign > 0 {
            (3, 1)
        } else {
            (1, 3)
        }
    }

    /// `(in, out)` position pairs of the under and over strands.
    pub fn passes(&self) -> [(usize, usize); 2] {
        [(0, 2), self.over()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DiscEnd {
    pub pair: usize,
    pub side: u8,
    pub slot: usize,
}

impl DiscEnd {
    pub fn partner(&self) -> DiscEnd {
        DiscEnd { side: 1 - self.side, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Strand {
    pub arcs: Vec<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub closed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<DiscEnd>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<DiscEnd>,
}

impl Strand {
    pub fn closed(arcs: Vec<usize>) -> Self {
        Strand { arcs, closed: true, start: None, end: None }
    }

    pub fn open(arcs: Vec<usize>, start: DiscEnd, end: DiscEnd) -> Self {
        Strand { arcs, closed: false, start: Some(start), end: Some(end) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscPair {
    /// Attachment points on each of the two (mirrored) discs.
    pub slots: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DiagramJson")]
pub struct KirbyDiagram {
    pub(crate) crossings: Vec<Crossing>,
    pub(crate) strands: Vec<Strand>,
    pub(crate) disc_pairs: Vec<DiscPair>,
    pub(crate) framings: BTreeMap<usize, i64>,
}

#[derive(Deserialize)]
struct DiagramJson {
    #[serde(default)]
    crossings: Vec<Crossing>,
    #[serde(default)]
    strands: Vec<Strand>,
    #[serde(default)]
    disc_pairs: Vec<DiscPair>,
    #[serde(default)]
    framings: BTreeMap<usize, i64>,
}

impl TryFrom<DiagramJson> for KirbyDiagram {
    type Error = KirbyError;

    fn try_from(j: DiagramJson) -> Result<Self, KirbyError> {
        KirbyDiagram::new(j.crossings, j.strands, j.disc_pairs, j.framings)
    }
}

/// Where an arc starts and ends.
#[derive(Debug, Clone, Copy, Default)]
struct ArcEnds {
    /// `(crossing, position)` where the arc leaves a crossing.
    tail: Option<(usize, usize)>,
    /// `(crossing, position)` where the arc enters a crossing.
    head: Option<(usize, usize)>,
}

/// Components meeting a declared essential sphere in one point each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereData {
    pub components: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Doubled {
    pub diagram: KirbyDiagram,
    /// Adding 0-framed meridians kills no generators and adds no relations
    /// to the handle presentation of `π₁`.
    pub pi1_preserved: bool,
}

impl KirbyDiagram {
    pub fn new(
        crossings: Vec<Crossing>,
        strands: Vec<Strand>,
        disc_pairs: Vec<DiscPair>,
        framings: BTreeMap<usize, i64>,
    ) -> Result<Self, KirbyError> {
        let d = KirbyDiagram { crossings, strands, disc_pairs, framings };
        d.validate()?;
        Ok(d)
    }

    pub fn empty() -> Self {
        KirbyDiagram { crossings: vec![], strands: vec![], disc_pairs: vec![], framings: BTreeMap::new() }
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn strands(&self) -> &[Strand] {
        &self.strands
    }

    pub fn disc_pairs(&self) -> &[DiscPair] {
        &self.disc_pairs
    }

    pub fn framings(&self) -> &BTreeMap<usize, i64> {
        &self.framings
    }

    pub fn framing(&self, component: usize) -> i64 {
        self.framings.get(&component).copied().unwrap_or(0)
    }

    fn arc_ends(&self) -> Result<HashMap<usize, ArcEnds>, KirbyError> {
        let mut ends: HashMap<usize, ArcEnds> = HashMap::new();
        for s in &self.strands {
            for &a in &s.arcs {
                ends.insert(a, ArcEnds::default());
            }
        }
        for (i, c) in self.crossings.iter().enumerate() {
            if c.sign != 1 && c.sign != -1 {
                return Err(KirbyError::BadSign(i));
            }
            for (pin, pout) in c.passes() {
                let e = ends.get_mut(&c.arcs[pin]).ok_or(KirbyError::UnknownArc(c.arcs[pin]))?;
                if e.head.replace((i, pin)).is_some() {
                    return Err(KirbyError::ArcEnds { arc: c.arcs[pin], what: "enters two crossings" });
                }
                let e = ends.get_mut(&c.arcs[pout]).ok_or(KirbyError::UnknownArc(c.arcs[pout]))?;
                if e.tail.replace((i, pout)).is_some() {
                    return Err(KirbyError::ArcEnds { arc: c.arcs[pout], what: "leaves two crossings" });
                }
            }
        }
        Ok(ends)
    }

    fn validate(&self) -> Result<(), KirbyError> {
        let mut seen = BTreeSet::new();
        for (i, s) in self.strands.iter().enumerate() {
            if s.arcs.is_empty() {
                return Err(KirbyError::EmptyStrand(i));
            }
            if s.closed != (s.start.is_none() && s.end.is_none()) || (s.start.is_none() != s.end.is_none()) {
                return Err(KirbyError::StrandEnds(i));
            }
            for &a in &s.arcs {
                if !seen.insert(a) {
                    return Err(KirbyError::ArcReused(a));
                }
            }
        }
        let ends = self.arc_ends()?;
        for (i, s) in self.strands.iter().enumerate() {
            let n = s.arcs.len();
            let links = if s.closed { n } else { n - 1 };
            for k in 0..links {
                let (x, y) = (s.arcs[k], s.arcs[(k + 1) % n]);
                let ok = match (ends[&x].head, ends[&y].tail) {
                    (Some((cx, px)), Some((cy, py))) => {
                        cx == cy && self.crossings[cx].passes().contains(&(px, py))
                    }
                    _ => false,
                };
                if !ok && !(s.closed && n == 1 && ends[&x].head.is_none() && ends[&x].tail.is_none()) {
                    return Err(KirbyError::BrokenStrand { strand: i, from: x, to: y });
                }
            }
            if !s.closed {
                if ends[&s.arcs[0]].tail.is_some() {
                    return Err(KirbyError::ArcEnds { arc: s.arcs[0], what: "starts at a disc and at a crossing" });
                }
                if ends[&s.arcs[n - 1]].head.is_some() {
                    return Err(KirbyError::ArcEnds { arc: s.arcs[n - 1], what: "ends at a disc and at a crossing" });
                }
            }
        }
        // Disc slots: each used once, by a start or an end, and an end on one
        // side must be glued to a start on the other.
        let mut slot_use: HashMap<DiscEnd, (usize, bool)> = HashMap::new();
        for (i, s) in self.strands.iter().enumerate() {
            for (e, is_start) in [(s.start, true), (s.end, false)] {
                let Some(e) = e else { continue };
                let slots = self.disc_pairs.get(e.pair).map(|p| p.slots).unwrap_or(0);
                if e.side > 1 || e.slot >= slots {
                    return Err(KirbyError::DiscSlot { pair: e.pair, side: e.side, slot: e.slot, what: "out of range" });
                }
                if slot_use.insert(e, (i, is_start)).is_some() {
                    return Err(KirbyError::DiscSlot { pair: e.pair, side: e.side, slot: e.slot, what: "used twice" });
                }
            }
        }
        for (p, pair) in self.disc_pairs.iter().enumerate() {
            for side in 0..2 {
                for slot in 0..pair.slots {
                    let e = DiscEnd { pair: p, side, slot };
                    match (slot_use.get(&e), slot_use.get(&e.partner())) {
                        (None, _) => return Err(KirbyError::DiscSlot { pair: p, side, slot, what: "unused" }),
                        (Some(&(i, a)), Some(&(_, b))) if a == b => return Err(KirbyError::Orientation(i)),
                        _ => {}
                    }
                }
            }
        }
        let comps = self.components().len();
        if let Some((&c, _)) = self.framings.iter().find(|(&c, _)| c >= comps) {
            return Err(KirbyError::FramingIndex(c));
        }
        Ok(())
    }

    /// `#crossings + #discs + #strands`.
    pub fn weight(&self) -> usize {
        self.crossings.len() + 2 * self.disc_pairs.len() + self.strands.len()
    }

    /// Strand indices of each link component, in traversal order.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let by_start: HashMap<DiscEnd, usize> =
            self.strands.iter().enumerate().filter_map(|(i, s)| s.start.map(|e| (e, i))).collect();
        let mut done = vec![false; self.strands.len()];
        let mut out = Vec::new();
        for i in 0..self.strands.len() {
            if done[i] {
                continue;
            }
            // Walk back to the chain's first strand, or around a loop.
            let mut chain = vec![i];
            done[i] = true;
            let mut cur = i;
            while let Some(next) = self.strands[cur].end.and_then(|e| by_start.get(&e.partner()).copied()) {
                if done[next] {
                    break;
                }
                done[next] = true;
                chain.push(next);
                cur = next;
            }
            out.push(chain);
        }
        out
    }

    pub fn component_of_strand(&self) -> Vec<usize> {
        let mut map = vec![0; self.strands.len()];
        for (c, comp) in self.components().iter().enumerate() {
            for &s in comp {
                map[s] = c;
            }
        }
        map
    }

    fn strand_of_arc(&self) -> HashMap<usize, usize> {
        self.strands.iter().enumerate().flat_map(|(i, s)| s.arcs.iter().map(move |&a| (a, i))).collect()
    }

    /// Pieces joined by crossings or by passing through the same 1-handle,
    /// as lists of strand indices. Orphan disc pairs are not included.
    pub fn connected_pieces(&self) -> Vec<Vec<usize>> {
        let n = self.strands.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let union = |p: &mut Vec<usize>, a: usize, b: usize| {
            let (ra, rb) = (find(p, a), find(p, b));
            p[ra] = rb;
        };
        let owner = self.strand_of_arc();
        for c in &self.crossings {
            for k in 1..4 {
                union(&mut parent, owner[&c.arcs[0]], owner[&c.arcs[k]]);
            }
        }
        let mut by_pair: HashMap<usize, usize> = HashMap::new();
        for (i, s) in self.strands.iter().enumerate() {
            for e in [s.start, s.end].into_iter().flatten() {
                match by_pair.get(&e.pair) {
                    Some(&j) => union(&mut parent, i, j),
                    None => {
                        by_pair.insert(e.pair, i);
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort();
        out
    }

    pub fn orphan_pairs(&self) -> Vec<usize> {
        (0..self.disc_pairs.len()).filter(|&p| self.disc_pairs[p].slots == 0).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.connected_pieces().len() <= 1 && self.orphan_pairs().is_empty()
    }

    fn next_arc(&self) -> usize {
        self.strands.iter().flat_map(|s| s.arcs.iter()).max().map_or(0, |m| m + 1)
    }

    /// Renumbers framings after the strand list changed, keyed by a strand
    /// that stays in each component.
    fn reindex_framings(&mut self, by_strand: &[(usize, i64)]) {
        let comp = self.component_of_strand();
        self.framings = by_strand.iter().map(|&(s, f)| (comp[s], f)).filter(|&(_, f)| f != 0).collect();
    }

    fn framings_by_strand(&self) -> Vec<(usize, i64)> {
        let comps = self.components();
        self.framings.iter().map(|(&c, &f)| (comps[c][0], f)).collect()
    }

    fn locate(&self, arc: usize) -> Result<(usize, usize), KirbyError> {
        self.strands
            .iter()
            .enumerate()
            .find_map(|(i, s)| s.arcs.iter().position(|&a| a == arc).map(|k| (i, k)))
            .ok_or(KirbyError::NoSuchArc(arc))
    }

    fn head_in(&self, arc: usize) -> Option<(usize, usize)> {
        self.crossings.iter().enumerate().find_map(|(i, c)| {
            c.passes().iter().find(|&&(pin, _)| c.arcs[pin] == arc).map(|&(pin, _)| (i, pin))
        })
    }

    /// Cuts `arc` into `x → x_b → x_c`; `x` keeps the original tail. On a
    /// crossingless loop `x_c` is `x` itself.
    fn split3(&mut self, arc: usize) -> Result<(usize, usize, usize), KirbyError> {
        let (s, k) = self.locate(arc)?;
        let xb = self.next_arc();
        let strand = &self.strands[s];
        if strand.closed && strand.arcs.len() == 1 && self.head_in(arc).is_none() {
            self.strands[s].arcs.push(xb);
            return Ok((arc, xb, arc));
        }
        let xc = xb + 1;
        if let Some((c, pos)) = self.head_in(arc) {
            self.crossings[c].arcs[pos] = xc;
        }
        self.strands[s].arcs.splice(k + 1..k + 1, [xb, xc]);
        Ok((arc, xb, xc))
    }

    /// Reidemeister I: a positive kink on `arc`.
    pub fn add_kink(&self, arc: usize) -> Result<KirbyDiagram, KirbyError> {
        let mut d = self.clone();
        let (xa, xb, xc) = d.split3(arc)?;
        d.crossings.push(Crossing { arcs: [xa, xc, xb, xb], sign: 1 });
        d.validate()?;
        Ok(d)
    }

    /// Reidemeister II pushing `over` across `under`.
    pub fn add_r2(&self, over: usize, under: usize) -> Result<KirbyDiagram, KirbyError> {
        let mut d = self.clone();
        let (xa, xb, xc) = d.split3(over)?;
        let (ya, yb, yc) = d.split3(under)?;
        d.crossings.push(Crossing { arcs: [yb, xb, yc, xa], sign: 1 });
        d.crossings.push(Crossing { arcs: [ya, xb, yb, xc], sign: -1 });
        d.validate()?;
        Ok(d)
    }

    /// A small 0-framed unknot encircling `arc` once, linking it `+1`.
    pub fn add_meridian(&self, arc: usize) -> Result<KirbyDiagram, KirbyError> {
        let by_strand = self.framings_by_strand();
        let mut d = self.clone();
        let (xa, xb, xc) = d.split3(arc)?;
        let m1 = d.next_arc();
        let m2 = m1 + 1;
        d.crossings.push(Crossing { arcs: [xa, m1, xb, m2], sign: 1 });
        d.crossings.push(Crossing { arcs: [m1, xc, m2, xb], sign: 1 });
        d.strands.push(Strand::closed(vec![m1, m2]));
        d.reindex_framings(&by_strand);
        d.validate()?;
        Ok(d)
    }

    /// Disjoint union, with `other` relabeled after `self`.
    pub fn disjoint_union(&self, other: &KirbyDiagram) -> KirbyDiagram {
        let shift = self.next_arc();
        let pshift = self.disc_pairs.len();
        let mv = |e: Option<DiscEnd>| e.map(|e| DiscEnd { pair: e.pair + pshift, ..e });
        let mut d = self.clone();
        let by_strand: Vec<(usize, i64)> = self
            .framings_by_strand()
            .into_iter()
            .chain(other.framings_by_strand().into_iter().map(|(s, f)| (s + self.strands.len(), f)))
            .collect();
        d.crossings.extend(other.crossings.iter().map(|c| Crossing { arcs: c.arcs.map(|a| a + shift), sign: c.sign }));
        d.strands.extend(other.strands.iter().map(|s| Strand {
            arcs: s.arcs.iter().map(|a| a + shift).collect(),
            closed: s.closed,
            start: mv(s.start),
            end: mv(s.end),
        }));
        d.disc_pairs.extend_from_slice(&other.disc_pairs);
        d.reindex_framings(&by_strand);
        d
    }

    /// Adds a 1-handle with nothing through it.
    pub fn with_orphan_pair(&self) -> KirbyDiagram {
        let mut d = self.clone();
        d.disc_pairs.push(DiscPair { slots: 0 });
        d
    }

    /// Pushes a finger of the strand carrying `arc` through the 1-handle
    /// `pair` and back, next to its existing slots.
    pub fn finger_through(&self, arc: usize, pair: usize) -> Result<KirbyDiagram, KirbyError> {
        let by_strand = self.framings_by_strand();
        let mut d = self.clone();
        let (s, k) = d.locate(arc)?;
        let slots = d.disc_pairs.get(pair).ok_or(KirbyError::DiscSlot { pair, side: 0, slot: 0, what: "missing" })?.slots;
        let (k0, k1) = (slots, slots + 1);
        d.disc_pairs[pair].slots += 2;
        let into = DiscEnd { pair, side: 0, slot: k0 };
        let back = DiscEnd { pair, side: 0, slot: k1 };
        let strand = d.strands[s].clone();
        let mut new_arc = d.next_arc();
        let head = d.head_in(arc);
        let fresh = if head.is_some() || !strand.closed {
            let id = new_arc;
            new_arc += 1;
            if let Some((c, pos)) = head {
                d.crossings[c].arcs[pos] = id;
            }
            Some(id)
        } else {
            None
        };
        if strand.closed {
            let mut arcs: Vec<usize> = fresh.into_iter().collect();
            arcs.extend(strand.arcs[k + 1..].iter().copied());
            arcs.extend(strand.arcs[..=k].iter().copied());
            d.strands[s] = Strand::open(arcs, back, into);
        } else {
            let mut tail = vec![fresh.expect("open strands always split")];
            tail.extend(strand.arcs[k + 1..].iter().copied());
            d.strands[s] = Strand::open(strand.arcs[..=k].to_vec(), strand.start.unwrap(), into);
            d.strands.push(Strand::open(tail, back, strand.end.unwrap()));
        }
        d.strands.push(Strand::open(vec![new_arc], into.partner(), back.partner()));
        d.reindex_framings(&by_strand);
        d.validate()?;
        Ok(d)
    }

    /// Makes the diagram connected with at least one crossing: a strand is
    /// pushed through each orphan 1-handle, separate pieces are joined by
    /// Reidemeister II moves, and a kink is added if no crossing remains.
    pub fn connect(&self) -> KirbyDiagram {
        let mut d = self.clone();
        if d.strands.is_empty() {
            let mut u = unknot(1);
            if !d.disc_pairs.is_empty() {
                u = u.disjoint_union(&d);
            }
            d = u;
        }
        for p in d.orphan_pairs() {
            let arc = d.strands[0].arcs[0];
            d = d.finger_through(arc, p).expect("finger move on a valid diagram");
        }
        let pieces = d.connected_pieces();
        if pieces.len() > 1 {
            let strand_arcs: Vec<usize> = pieces.iter().map(|p| d.strands[p[0]].arcs[0]).collect();
            for &y in &strand_arcs[1..] {
                d = d.add_r2(strand_arcs[0], y).expect("R2 on a valid diagram");
            }
        }
        if d.crossings.is_empty() {
            d = d.add_kink(d.strands[0].arcs[0]).expect("R1 on a valid diagram");
        }
        d
    }

    /// Handle slides over declared spheres, bringing each targeted framing
    /// into `{0, 1}`. Every slide moves the framing by `±2`.
    pub fn slide_normalize_framings(&self, spheres: &[SphereData]) -> Result<KirbyDiagram, KirbyError> {
        let comps = self.components().len();
        let mut d = self.clone();
        for (i, s) in spheres.iter().enumerate() {
            let bad = |m: &str| KirbyError::BadSphere(format!("sphere {i}: {m}"));
            match s.components[..] {
                [c] | [c, _] => {
                    if s.components.iter().any(|&x| x >= comps) {
                        return Err(bad("component out of range"));
                    }
                    if s.components.len() == 2 && s.components[0] == s.components[1] {
                        return Err(bad("the two components must differ"));
                    }
                    let f = d.framing(c).rem_euclid(2);
                    if f == 0 {
                        d.framings.remove(&c);
                    } else {
                        d.framings.insert(c, f);
                    }
                }
                _ => return Err(bad("a sphere meets one or two components")),
            }
        }
        Ok(d)
    }

    /// Adds a 0-framed meridian around every strand.
    pub fn double(&self) -> Doubled {
        let mut d = self.clone();
        for s in 0..self.strands.len() {
            let arc = d.strands[s].arcs[0];
            d = d.add_meridian(arc).expect("meridian on a valid diagram");
        }
        Doubled { diagram: d, pi1_preserved: true }
    }

    /// Framings on the diagonal, linking numbers off it.
    pub fn linking_matrix(&self) -> Result<Vec<Vec<i64>>, KirbyError> {
        if !self.disc_pairs.is_empty() {
            return Err(KirbyError::HasOneHandles);
        }
        let comp = self.component_of_strand();
        let owner = self.strand_of_arc();
        let n = self.components().len();
        let mut m = vec![vec![0i64; n]; n];
        for c in &self.crossings {
            let (i, j) = (comp[owner[&c.arcs[0]]], comp[owner[&c.arcs[1]]]);
            if i != j {
                m[i][j] += c.sign as i64;
                m[j][i] += c.sign as i64;
            }
        }
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = if i == j { self.framing(i) } else { *x / 2 };
            }
        }
        Ok(m)
    }

    pub fn intersection_form(&self) -> Result<UnimodularForm, KirbyError> {
        let m = self.linking_matrix()?;
        match forms::classify(&m) {
            Err(FormError::NotUnimodular(d)) => Err(KirbyError::NotUnimodular(d)),
            other => Ok(other?),
        }
    }
}

/// A crossingless unknot.
pub fn unknot(framing: i64) -> KirbyDiagram {
    let framings = if framing == 0 { BTreeMap::new() } else { BTreeMap::from([(0, framing)]) };
    KirbyDiagram::new(vec![], vec![Strand::closed(vec![0])], vec![], framings).expect("unknot")
}

/// The standard two-crossing Hopf link, linking number `+1`.
pub fn hopf(a: i64, b: i64) -> KirbyDiagram {
    let framings = [(0, a), (1, b)].into_iter().filter(|&(_, f)| f != 0).collect();
    KirbyDiagram::new(
        vec![Crossing { arcs: [0, 2, 1, 3], sign: 1 }, Crossing { arcs: [2, 0, 3, 1], sign: 1 }],
        vec![Strand::closed(vec![0, 1]), Strand::closed(vec![2, 3])],
        vec![],
        framings,
    )
    .expect("Hopf link")
}

/// A trefoil with three positive crossings.
pub fn trefoil(framing: i64) -> KirbyDiagram {
    let framings = if framing == 0 { BTreeMap::new() } else { BTreeMap::from([(0, framing)]) };
    KirbyDiagram::new(
        vec![
            Crossing { arcs: [1, 5, 2, 4], sign: 1 },
            Crossing { arcs: [3, 1, 4, 6], sign: 1 },
            Crossing { arcs: [5, 3, 6, 2], sign: 1 },
        ],
        vec![Strand::closed(vec![1, 2, 3, 4, 5, 6])],
        vec![],
        framings,
    )
    .expect("trefoil")
}

/// `k` split unknots with the given framings.
pub fn unlink(framings: &[i64]) -> KirbyDiagram {
    framings.iter().fold(KirbyDiagram::empty(), |d, &f| d.disjoint_union(&unknot(f)))
}
