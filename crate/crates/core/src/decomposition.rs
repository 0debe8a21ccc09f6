//! Graphs of geometric blocks glued along tori and Klein bottles, with the
//! generalized volume and Euler number.
//!
//! Conventions:
//! - a torus edge `from → to` carries a matrix taking `from`'s `(p, q)`
//!   coordinates to `to`'s;
//! - a Klein edge has one endpoint, and its matrix takes the block torus to
//!   the boundary of the twisted I-bundle `W`, whose two fibers are stored on
//!   the edge.
//!
//! Torus indices count the *open* tori of a block (a Seifert block's
//! unfilled boundary circles, or a hyperbolic block's cusps).

use std::collections::{BTreeMap, VecDeque};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seifert::{self, chi_orbifold, BaseSurface, Pi1Order, SeifertBlock, SeifertError};
use crate::slope::{Mat2, Slope, SlopeError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecompError {
    #[error("edge {edge}: gluing matrix has determinant {det}, expected ±1")]
    MalformedMatrix { edge: usize, det: i64 },
    #[error("edge {edge}: block {block} does not exist")]
    BlockIndex { edge: usize, block: usize },
    #[error("edge {edge}: block {block} has {count} open tori, no torus {torus}")]
    TorusIndex { edge: usize, block: usize, torus: usize, count: usize },
    #[error("torus {torus} of block {block} is glued twice")]
    TorusReused { block: usize, torus: usize },
    #[error("edge {edge}: a torus edge joins two distinct tori, not a torus to itself")]
    SelfGluing { edge: usize },
    #[error("edge {edge}: Klein bottle fibers must be two distinct slopes")]
    KleinFibers { edge: usize },
    #[error("the block graph is not connected")]
    Disconnected,
    #[error("graph has no blocks")]
    Empty,
    #[error("graph has no gluing edges")]
    NoEdges,
    #[error("non-geometric decomposition: {}", .0.join("; "))]
    NonGeometric(Vec<String>),
    #[error("invalid hyperbolic block: {0}")]
    InvalidHyperbolic(String),
    #[error("monodromy has determinant {0}, expected 1")]
    NotSpecialLinear(i64),
    #[error("bound must be positive")]
    NonpositiveBound,
    #[error("edge {0} is out of range")]
    EdgeIndex(usize),
    #[error("block {0} is out of range")]
    BlockOutOfRange(usize),
    #[error(transparent)]
    Slope(#[from] SlopeError),
    #[error(transparent)]
    Seifert(#[from] SeifertError),
}

/// Cusped hyperbolic piece; its geometry is supplied by the caller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HyperbolicJson")]
pub struct HyperbolicBlock {
    volume: f64,
    preferred_slopes: Vec<Vec<Slope>>,
}

#[derive(Deserialize)]
struct HyperbolicJson {
    volume: f64,
    preferred_slopes: Vec<Vec<Slope>>,
}

impl TryFrom<HyperbolicJson> for HyperbolicBlock {
    type Error = DecompError;

    fn try_from(j: HyperbolicJson) -> Result<Self, DecompError> {
        HyperbolicBlock::new(j.volume, j.preferred_slopes)
    }
}

impl HyperbolicBlock {
    pub fn new(volume: f64, preferred_slopes: Vec<Vec<Slope>>) -> Result<Self, DecompError> {
        if !(volume.is_finite() && volume > 0.0) {
            return Err(DecompError::InvalidHyperbolic(format!("volume {volume} is not positive")));
        }
        for (t, set) in preferred_slopes.iter().enumerate() {
            let mut s = set.clone();
            s.sort();
            s.dedup();
            if s.len() != set.len() || s.len() < 2 {
                return Err(DecompError::InvalidHyperbolic(format!("cusp {t} needs at least two distinct preferred slopes")));
            }
        }
        Ok(HyperbolicBlock { volume, preferred_slopes })
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn preferred_slopes(&self) -> &[Vec<Slope>] {
        &self.preferred_slopes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Block {
    Seifert(SeifertBlock),
    Hyperbolic(HyperbolicBlock),
}

impl Block {
    pub fn torus_count(&self) -> usize {
        match self {
            Block::Seifert(b) => b.open_boundary(),
            Block::Hyperbolic(h) => h.preferred_slopes.len(),
        }
    }

    pub fn as_seifert(&self) -> Option<&SeifertBlock> {
        match self {
            Block::Seifert(b) => Some(b),
            Block::Hyperbolic(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct TorusRef {
    pub block: usize,
    pub torus: usize,
}

impl From<(usize, usize)> for TorusRef {
    fn from((block, torus): (usize, usize)) -> Self {
        TorusRef { block, torus }
    }
}

impl From<TorusRef> for (usize, usize) {
    fn from(t: TorusRef) -> Self {
        (t.block, t.torus)
    }
}

fn default_klein_fibers() -> [Slope; 2] {
    [Slope::ZERO, Slope::INFINITY]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GluingEdge {
    Torus { from: TorusRef, to: TorusRef, matrix: Mat2 },
    Klein {
        from: TorusRef,
        matrix: Mat2,
        #[serde(default = "default_klein_fibers")]
        fibers: [Slope; 2],
    },
}

impl GluingEdge {
    pub fn torus(from: (usize, usize), to: (usize, usize), matrix: Mat2) -> Self {
        GluingEdge::Torus { from: from.into(), to: to.into(), matrix }
    }

    pub fn klein(from: (usize, usize), matrix: Mat2) -> Self {
        GluingEdge::Klein { from: from.into(), matrix, fibers: default_klein_fibers() }
    }

    pub fn matrix(&self) -> Mat2 {
        match self {
            GluingEdge::Torus { matrix, .. } | GluingEdge::Klein { matrix, .. } => *matrix,
        }
    }

    pub fn endpoints(&self) -> Vec<TorusRef> {
        match self {
            GluingEdge::Torus { from, to, .. } => vec![*from, *to],
            GluingEdge::Klein { from, .. } => vec![*from],
        }
    }

    /// The same gluing read from the other side.
    pub fn reversed(&self) -> Self {
        match self {
            GluingEdge::Torus { from, to, matrix } => {
                GluingEdge::Torus { from: *to, to: *from, matrix: matrix.inverse().expect("validated matrix") }
            }
            k => k.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson")]
pub struct DecompGraph {
    blocks: Vec<Block>,
    edges: Vec<GluingEdge>,
}

#[derive(Deserialize)]
struct GraphJson {
    blocks: Vec<Block>,
    #[serde(default)]
    edges: Vec<GluingEdge>,
}

impl TryFrom<GraphJson> for DecompGraph {
    type Error = DecompError;

    fn try_from(j: GraphJson) -> Result<Self, DecompError> {
        DecompGraph::new(j.blocks, j.edges)
    }
}

impl DecompGraph {
    pub fn new(blocks: Vec<Block>, edges: Vec<GluingEdge>) -> Result<Self, DecompError> {
        if blocks.is_empty() {
            return Err(DecompError::Empty);
        }
        let mut used = BTreeMap::new();
        let mut adj = vec![Vec::new(); blocks.len()];
        for (e, edge) in edges.iter().enumerate() {
            let det = edge.matrix().det();
            if det.abs() != 1 {
                return Err(DecompError::MalformedMatrix { edge: e, det });
            }
            if let GluingEdge::Klein { fibers, .. } = edge {
                if fibers[0] == fibers[1] {
                    return Err(DecompError::KleinFibers { edge: e });
                }
            }
            let ends = edge.endpoints();
            if ends.len() == 2 && ends[0] == ends[1] {
                return Err(DecompError::SelfGluing { edge: e });
            }
            for t in &ends {
                let block = blocks.get(t.block).ok_or(DecompError::BlockIndex { edge: e, block: t.block })?;
                let count = block.torus_count();
                if t.torus >= count {
                    return Err(DecompError::TorusIndex { edge: e, block: t.block, torus: t.torus, count });
                }
                if used.insert(*t, e).is_some() {
                    return Err(DecompError::TorusReused { block: t.block, torus: t.torus });
                }
            }
            if let [a, b] = ends[..] {
                adj[a.block].push(b.block);
                adj[b.block].push(a.block);
            }
        }
        let mut seen = vec![false; blocks.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !std::mem::replace(&mut seen[w], true) {
                    queue.push_back(w);
                }
            }
        }
        if seen.contains(&false) {
            return Err(DecompError::Disconnected);
        }
        Ok(DecompGraph { blocks, edges })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn edges(&self) -> &[GluingEdge] {
        &self.edges
    }

    /// Block tori not on any edge.
    pub fn free_boundary(&self) -> Vec<TorusRef> {
        let glued: Vec<TorusRef> = self.edges.iter().flat_map(|e| e.endpoints()).collect();
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(block, b)| (0..b.torus_count()).map(move |torus| TorusRef { block, torus }))
            .filter(|t| !glued.contains(t))
            .collect()
    }

    /// Same manifold with blocks renumbered: block `i` moves to `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self, DecompError> {
        let mut blocks: Vec<Option<Block>> = vec![None; self.blocks.len()];
        for (i, b) in self.blocks.iter().enumerate() {
            let slot = blocks.get_mut(perm[i]).ok_or(DecompError::BlockOutOfRange(perm[i]))?;
            *slot = Some(b.clone());
        }
        let blocks = blocks.into_iter().collect::<Option<Vec<_>>>().ok_or(DecompError::BlockOutOfRange(0))?;
        let mv = |t: &TorusRef| TorusRef { block: perm[t.block], torus: t.torus };
        let edges = self
            .edges
            .iter()
            .map(|e| match e {
                GluingEdge::Torus { from, to, matrix } => GluingEdge::Torus { from: mv(from), to: mv(to), matrix: *matrix },
                GluingEdge::Klein { from, matrix, fibers } => GluingEdge::Klein { from: mv(from), matrix: *matrix, fibers: *fibers },
            })
            .collect();
        DecompGraph::new(blocks, edges)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometricReport {
    pub geometric: bool,
    pub violations: Vec<String>,
}

/// Checks the two combinatorial conditions for a geometric decomposition:
/// hyperbolic base orbifolds, and no fibration matched across a gluing.
pub fn validate_geometric(g: &DecompGraph) -> Result<GeometricReport, DecompError> {
    if g.edges.is_empty() {
        return Err(DecompError::NoEdges);
    }
    let mut violations = Vec::new();
    for (i, b) in g.blocks.iter().enumerate() {
        if let Block::Seifert(s) = b {
            let chi = chi_orbifold(s);
            if chi >= Ratio::zero() {
                violations.push(format!("block {i}: χ(Σ) = {chi} ≥ 0"));
            }
        }
    }
    for (e, edge) in g.edges.iter().enumerate() {
        let m = edge.matrix();
        match edge {
            GluingEdge::Torus { from, to, .. } => {
                let both = g.blocks[from.block].as_seifert().is_some() && g.blocks[to.block].as_seifert().is_some();
                if both && Slope::INFINITY.transform(&m) == Slope::INFINITY {
                    violations.push(format!("edge {e}: fibers of blocks {} and {} match", from.block, to.block));
                }
            }
            GluingEdge::Klein { from, fibers, .. } => {
                if g.blocks[from.block].as_seifert().is_some() && fibers.contains(&Slope::INFINITY.transform(&m)) {
                    violations.push(format!("edge {e}: fiber of block {} matches a fibration of the Klein bottle", from.block));
                }
            }
        }
    }
    Ok(GeometricReport { geometric: violations.is_empty(), violations })
}

fn require_geometric(g: &DecompGraph) -> Result<(), DecompError> {
    let report = validate_geometric(g)?;
    if report.geometric {
        Ok(())
    } else {
        Err(DecompError::NonGeometric(report.violations))
    }
}

/// Hyperbolic volumes plus `−χ` of the Seifert blocks.
pub fn volume(g: &DecompGraph) -> Result<f64, DecompError> {
    require_geometric(g)?;
    Ok(g.blocks
        .iter()
        .map(|b| match b {
            Block::Hyperbolic(h) => h.volume,
            Block::Seifert(s) => {
                let chi = chi_orbifold(s);
                -(*chi.numer() as f64) / (*chi.denom() as f64)
            }
        })
        .sum())
}

fn seifert_preferred(b: &SeifertBlock, torus: usize, extra_twist: i64) -> [Slope; 2] {
    [Slope::INFINITY, Slope::integer(b.section_twists()[torus] + extra_twist)]
}

/// Fiber and section slope for a Seifert torus, the stored set for a cusp.
pub fn preferred_slopes(g: &DecompGraph, block: usize, torus: usize) -> Result<Vec<Slope>, DecompError> {
    let b = g.blocks.get(block).ok_or(DecompError::BlockOutOfRange(block))?;
    if torus >= b.torus_count() {
        return Err(SlopeError::IndexOutOfRange { index: torus, len: b.torus_count() }.into());
    }
    Ok(match b {
        Block::Seifert(s) => seifert_preferred(s, torus, 0).to_vec(),
        Block::Hyperbolic(h) => h.preferred_slopes[torus].clone(),
    })
}

fn max_distance(xs: &[Slope], ys: &[Slope]) -> u64 {
    xs.iter().flat_map(|x| ys.iter().map(move |y| x.distance(y))).max().unwrap_or(0)
}

/// `Δ_S` at the current sections.
pub fn delta_s(g: &DecompGraph, edge: usize) -> Result<u64, DecompError> {
    let e = g.edges.get(edge).ok_or(DecompError::EdgeIndex(edge))?;
    let m = e.matrix();
    let from = e.endpoints()[0];
    let xs: Vec<Slope> = preferred_slopes(g, from.block, from.torus)?.iter().map(|s| s.transform(&m)).collect();
    let ys = match e {
        GluingEdge::Torus { to, .. } => preferred_slopes(g, to.block, to.torus)?,
        GluingEdge::Klein { fibers, .. } => fibers.to_vec(),
    };
    Ok(max_distance(&xs, &ys))
}

/// `Δ`: the largest `Δ_S` over all edges, at the current sections.
pub fn delta_max(g: &DecompGraph) -> Result<u64, DecompError> {
    (0..g.edges.len()).map(|e| delta_s(g, e)).try_fold(0, |acc, d| Ok(acc.max(d?)))
}

/// One section twist variable: a Seifert torus sitting on an edge.
#[derive(Debug, Clone)]
struct TwistVar {
    edge: usize,
    /// 0 for the `from` end, 1 for `to`.
    side: usize,
    lo: i64,
    hi: i64,
}

/// Slopes of one edge end, in the coordinates where the edge is measured.
/// Section slopes of twist variables come from `twists`; unknown ones are
/// left out.
fn end_slopes(g: &DecompGraph, edge: usize, side: usize, var: Option<usize>, twists: &[Option<i64>]) -> Vec<Slope> {
    let e = &g.edges[edge];
    if side == 1 {
        if let GluingEdge::Klein { fibers, .. } = e {
            return fibers.to_vec();
        }
    }
    let t = e.endpoints()[side];
    let raw = match &g.blocks[t.block] {
        Block::Hyperbolic(h) => h.preferred_slopes[t.torus].clone(),
        Block::Seifert(s) => match var.map(|v| twists[v]) {
            None => seifert_preferred(s, t.torus, 0).to_vec(),
            Some(None) => vec![Slope::INFINITY],
            Some(Some(x)) => seifert_preferred(s, t.torus, x).to_vec(),
        },
    };
    if side == 0 {
        raw.iter().map(|s| s.transform(&e.matrix())).collect()
    } else {
        raw
    }
}

struct TwistProblem<'a> {
    g: &'a DecompGraph,
    vars: Vec<TwistVar>,
    /// `var_at[edge][side]`
    var_at: Vec<[Option<usize>; 2]>,
    /// Variables of blocks whose twists must sum to zero.
    groups: Vec<Vec<usize>>,
}

impl<'a> TwistProblem<'a> {
    fn new(g: &'a DecompGraph) -> Self {
        let mut vars = Vec::new();
        let mut var_at = vec![[None, None]; g.edges.len()];
        let mut per_block: Vec<Vec<usize>> = vec![Vec::new(); g.blocks.len()];
        for (e, edge) in g.edges.iter().enumerate() {
            for (side, t) in edge.endpoints().into_iter().enumerate() {
                if g.blocks[t.block].as_seifert().is_some() {
                    var_at[e][side] = Some(vars.len());
                    per_block[t.block].push(vars.len());
                    vars.push(TwistVar { edge: e, side, lo: 0, hi: 0 });
                }
            }
        }
        let free: Vec<usize> = g.free_boundary().iter().map(|t| t.block).collect();
        let groups = per_block
            .into_iter()
            .enumerate()
            .filter(|(b, vs)| !vs.is_empty() && !free.contains(b))
            .map(|(_, vs)| vs)
            .collect();
        TwistProblem { g, vars, var_at, groups }
    }

    fn edge_value(&self, e: usize, twists: &[Option<i64>]) -> u64 {
        let xs = end_slopes(self.g, e, 0, self.var_at[e][0], twists);
        let ys = end_slopes(self.g, e, 1, self.var_at[e][1], twists);
        max_distance(&xs, &ys)
    }

    fn value(&self, twists: &[Option<i64>]) -> u64 {
        (0..self.g.edges.len()).map(|e| self.edge_value(e, twists)).max().unwrap_or(0)
    }

    /// Any twist `t` with `Δ(section, u) ≤ bound` for a twist-free slope `u`
    /// on the other end satisfies `|α + β·t| ≤ bound`; `β ≠ 0` exists
    /// whenever the graph is geometric.
    fn set_brackets(&mut self, bound: u64) {
        let none = vec![None; self.vars.len()];
        for v in 0..self.vars.len() {
            let TwistVar { edge, side, .. } = self.vars[v];
            let e = &self.g.edges[edge];
            let t = e.endpoints()[side];
            let base = self.g.blocks[t.block].as_seifert().expect("Seifert variable").section_twists()[t.torus];
            let m = if side == 0 { e.matrix() } else { Mat2::IDENTITY };
            let (ap, aq) = m.apply(1, base);
            let (bp, bq) = m.apply(0, 1);
            let others = end_slopes(self.g, edge, 1 - side, self.var_at[edge][1 - side], &none);
            let det = |xp: i64, xq: i64, u: &Slope| xp as i128 * u.q() as i128 - xq as i128 * u.p() as i128;
            let (alpha, beta) = others
                .iter()
                .map(|u| (det(ap, aq, u), det(bp, bq, u)))
                .filter(|&(_, b)| b != 0)
                .min_by_key(|&(_, b)| std::cmp::Reverse(b.abs()))
                .expect("geometric graph gives a twist-dependent distance");
            let d = bound as i128;
            let (mut lo, mut hi) = (Integer::div_ceil(&(-d - alpha), &beta), Integer::div_floor(&(d - alpha), &beta));
            if beta < 0 {
                (lo, hi) = (Integer::div_ceil(&(d - alpha), &beta), Integer::div_floor(&(-d - alpha), &beta));
            }
            self.vars[v].lo = lo as i64;
            self.vars[v].hi = hi as i64;
        }
    }
}

/// Minimum of `Δ` over section twists; each Seifert block keeps its total
/// twist unless it has a free torus to absorb the change.
pub fn euler_invariant(g: &DecompGraph) -> Result<u64, DecompError> {
    require_geometric(g)?;
    let mut prob = TwistProblem::new(g);
    let zero = vec![Some(0); prob.vars.len()];
    let start = prob.value(&zero);
    if prob.vars.is_empty() || start == 0 {
        return Ok(start);
    }
    prob.set_brackets(start);

    // Free variables in block order; the last variable of a constrained
    // block is fixed by the others.
    let mut determined = vec![None; prob.vars.len()];
    for grp in &prob.groups {
        let last = *grp.last().unwrap();
        determined[last] = Some(grp[..grp.len() - 1].to_vec());
    }
    let order: Vec<usize> = (0..prob.vars.len()).filter(|&v| determined[v].is_none()).collect();

    struct Search<'p, 'g> {
        prob: &'p TwistProblem<'g>,
        order: Vec<usize>,
        determined: Vec<Option<Vec<usize>>>,
        best: u64,
    }

    impl Search<'_, '_> {
        fn fill_determined(&self, twists: &mut [Option<i64>]) {
            for (v, deps) in self.determined.iter().enumerate() {
                if let Some(deps) = deps {
                    twists[v] = deps.iter().map(|&d| twists[d]).sum::<Option<i64>>().map(|s| -s);
                }
            }
        }

        fn run(&mut self, depth: usize, twists: &mut Vec<Option<i64>>) {
            let mut cur = twists.clone();
            self.fill_determined(&mut cur);
            let partial = self.prob.value(&cur);
            if partial >= self.best {
                return;
            }
            if depth == self.order.len() {
                self.best = partial;
                return;
            }
            let v = self.order[depth];
            let (lo, hi) = (self.prob.vars[v].lo, self.prob.vars[v].hi);
            // Try small twists first so good incumbents appear early.
            let mut candidates: Vec<i64> = (lo..=hi).collect();
            candidates.sort_by_key(|t| t.abs());
            for t in candidates {
                twists[v] = Some(t);
                self.run(depth + 1, twists);
                if self.best == 0 {
                    break;
                }
            }
            twists[v] = None;
        }
    }

    let mut search = Search { prob: &prob, order, determined, best: start };
    let mut twists = vec![None; prob.vars.len()];
    search.run(0, &mut twists);
    Ok(search.best)
}

/// `min |b'| + |c'|` over `GL(2,ℤ)`-conjugates of the monodromy.
///
/// With `Q(v) = det(v, ψv)`, a conjugate by the basis `(v₁, v₂)` has
/// `|c'| + |b'| = |Q(v₁)| + |Q(v₂)|`. `Q` is `ψ`-invariant, so the vector with
/// the smaller value can be moved into a bounded fundamental domain, and for
/// a fixed `v₁` the partner `v₂ + k·v₁` is a quadratic in `k`.
pub fn sol_torus_bundle_e(psi: &Mat2) -> Result<u64, DecompError> {
    if psi.det() != 1 {
        return Err(DecompError::NotSpecialLinear(psi.det()));
    }
    let (qa, qb, qc) = (psi.c as i128, (psi.d - psi.a) as i128, -(psi.b as i128));
    let q = |p: i128, r: i128| qa * p * p + qb * p * r + qc * r * r;
    let tr = psi.trace();
    if tr.abs() == 2 {
        // Parabolic (or ±I): Q is ± a square times its content, which one
        // basis vector can kill and the other must pay.
        return Ok(qa.gcd(&qb).gcd(&qc) as u64);
    }
    let mut best = (qa.abs() + qc.abs()) as u64;
    let m = (best / 2) as f64;
    let radius = if tr.abs() < 2 {
        // Definite: |Q(v)| ≥ μ|v|² with μ the smaller |eigenvalue|.
        let (x, y, z) = (qa as f64, qb as f64 / 2.0, qc as f64);
        let mid = (x + z) / 2.0;
        let rad = (((x - z) / 2.0).powi(2) + y * y).sqrt();
        let mu = (mid.abs() - rad).abs();
        (m / mu).sqrt() + 2.0
    } else {
        let (a, b) = (psi.a as f64, psi.b as f64);
        let t = tr as f64;
        let disc = (t * t - 4.0).sqrt();
        let big = (t + t.signum() * disc) / 2.0;
        let small = 1.0 / big;
        let eig = |mu: f64| {
            let (x, y) = (b, mu - a);
            let n = (x * x + y * y).sqrt();
            (x / n, y / n)
        };
        let (u, w) = (eig(big), eig(small));
        let s = (u.0 * w.1 - u.1 * w.0).abs();
        let kappa = (big - small).abs() * s;
        2.0 * big.abs() * (m / kappa).sqrt() + 2.0
    };
    let r = radius.ceil() as i128;
    for p in 0..=r {
        for rr in -r..=r {
            if (p == 0 && rr <= 0) || p.gcd(&rr) != 1 {
                continue;
            }
            let q1 = q(p, rr);
            if q1 == 0 || (2 * q1.unsigned_abs()) as u64 > best {
                continue;
            }
            // Partner with det(v₁, v₂) = 1.
            let eg = p.extended_gcd(&rr);
            let (x0, y0) = (-eg.y, eg.x);
            let c0 = q(x0, y0);
            let bl = q(p + x0, rr + y0) - q1 - c0;
            let f = |k: i128| (q1 * k * k + bl * k + c0).unsigned_abs();
            let (af, bf, cf) = (q1 as f64, bl as f64, c0 as f64);
            let mut crit = vec![-bf / (2.0 * af)];
            let disc = bf * bf - 4.0 * af * cf;
            if disc >= 0.0 {
                crit.push((-bf + disc.sqrt()) / (2.0 * af));
                crit.push((-bf - disc.sqrt()) / (2.0 * af));
            }
            for x in crit {
                let k0 = x.floor() as i128;
                for k in k0 - 1..=k0 + 2 {
                    let total = q1.unsigned_abs() as u64 + f(k) as u64;
                    best = best.min(total);
                }
            }
        }
    }
    Ok(best)
}

/// Two twisted I-bundles over the Klein bottle glued along their boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KleinUnion {
    /// First boundary torus coordinates → second.
    pub matrix: Mat2,
    #[serde(default = "default_klein_fibers")]
    pub fibers: [Slope; 2],
    #[serde(default = "default_klein_fibers")]
    pub other_fibers: [Slope; 2],
}

impl KleinUnion {
    pub fn new(matrix: Mat2) -> Self {
        KleinUnion { matrix, fibers: default_klein_fibers(), other_fibers: default_klein_fibers() }
    }
}

/// Largest distance between a fiber of one side and a fiber of the other.
pub fn klein_union_e(k: &KleinUnion) -> Result<u64, DecompError> {
    if k.matrix.det().abs() != 1 {
        return Err(DecompError::MalformedMatrix { edge: 0, det: k.matrix.det() });
    }
    if k.fibers[0] == k.fibers[1] || k.other_fibers[0] == k.other_fibers[1] {
        return Err(DecompError::KleinFibers { edge: 0 });
    }
    let moved: Vec<Slope> = k.fibers.iter().map(|s| s.transform(&k.matrix)).collect();
    Ok(max_distance(&moved, &k.other_fibers))
}

/// An element `n − Σ 1/p_i` together with one way of writing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VolSElement {
    pub value: Ratio<i64>,
    pub n: i64,
    pub orders: Vec<i64>,
}

/// Elements of `{n − Σ_{i≤k} 1/p_i : n ≥ 1, 0 ≤ k ≤ n+2, 2 ≤ p_i}` in
/// `(0, bound)`, with every `p_i ≤ max_order`.
///
/// The full set accumulates from below at every value (`1/6 − 1/p` for
/// instance), so an order cutoff is what makes the list finite.
pub fn vol_s_enumerate(bound: Ratio<i64>, max_order: i64) -> Result<Vec<VolSElement>, DecompError> {
    if bound <= Ratio::zero() {
        return Err(DecompError::NonpositiveBound);
    }
    let mut found: BTreeMap<Ratio<i64>, VolSElement> = BTreeMap::new();
    // n − (n+2)/2 ≤ value < bound gives n < 2·bound + 2.
    let n_max = (bound * 2 + 2).ceil().to_integer() - 1;

    fn walk(
        n: i64,
        slots: i64,
        min_p: i64,
        max_order: i64,
        value: Ratio<i64>,
        bound: Ratio<i64>,
        orders: &mut Vec<i64>,
        found: &mut BTreeMap<Ratio<i64>, VolSElement>,
    ) {
        if value <= Ratio::zero() {
            return;
        }
        if value < bound {
            found.entry(value).or_insert_with(|| VolSElement { value, n, orders: orders.clone() });
        }
        if slots == 0 {
            return;
        }
        for p in min_p..=max_order {
            // Smallest value reachable from here uses all slots at order p.
            if value - Ratio::new(slots, p) >= bound {
                continue;
            }
            let next = value - Ratio::new(1, p);
            if next <= Ratio::zero() {
                continue;
            }
            orders.push(p);
            walk(n, slots - 1, p, max_order, next, bound, orders, found);
            orders.pop();
        }
    }

    for n in 1..=n_max.max(1) {
        walk(n, n + 2, 2, max_order, Ratio::from_integer(n), bound, &mut Vec::new(), &mut found);
    }
    Ok(found.into_values().collect())
}

/// Anything the generalized invariants are defined on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GeometricManifold {
    Graph(DecompGraph),
    Seifert(SeifertBlock),
    Hyperbolic { volume: f64 },
    SolTorusBundle { monodromy: Mat2 },
    KleinUnion(KleinUnion),
}

impl GeometricManifold {
    pub fn volume(&self) -> Result<f64, DecompError> {
        match self {
            GeometricManifold::Graph(g) => volume(g),
            GeometricManifold::Seifert(b) => {
                let chi = chi_orbifold(b);
                Ok(if chi.is_negative() { -(*chi.numer() as f64) / *chi.denom() as f64 } else { 0.0 })
            }
            GeometricManifold::Hyperbolic { volume } => Ok(*volume),
            GeometricManifold::SolTorusBundle { .. } | GeometricManifold::KleinUnion(_) => Ok(0.0),
        }
    }

    /// Nonnegative; rational only for Seifert manifolds with `χ ≤ 0`.
    pub fn euler(&self) -> Result<Ratio<i64>, DecompError> {
        let int = |n: u64| Ratio::from_integer(n as i64);
        match self {
            GeometricManifold::Graph(g) => euler_invariant(g).map(int),
            GeometricManifold::Seifert(b) => {
                if !b.is_closed() {
                    return Err(SeifertError::InvalidBlock("a closed block is needed".into()).into());
                }
                if chi_orbifold(b).is_positive() {
                    return Ok(match seifert::pi1_order(&seifert::recognize(b))? {
                        Pi1Order::Finite(n) => int(n),
                        Pi1Order::Infinite => Ratio::zero(),
                    });
                }
                Ok(seifert::euler_number(b)?.abs())
            }
            GeometricManifold::Hyperbolic { .. } => Ok(Ratio::zero()),
            GeometricManifold::SolTorusBundle { monodromy } => sol_torus_bundle_e(monodromy).map(int),
            GeometricManifold::KleinUnion(k) => klein_union_e(k).map(int),
        }
    }
}

/// A random geometric graph of Seifert and hyperbolic blocks arranged along
/// a path, for property tests and fuzzing.
pub fn random_geometric_graph<R: Rng + ?Sized>(rng: &mut R, max_blocks: usize, max_entry: i64) -> DecompGraph {
    loop {
        let n = rng.gen_range(2..=max_blocks.max(2));
        let mut blocks = Vec::with_capacity(n);
        for i in 0..n {
            let needed = if i == 0 || i == n - 1 { 1 } else { 2 };
            let open = needed + rng.gen_range(0..=1);
            if rng.gen_bool(0.6) {
                let fills = rng.gen_range(0..=2usize);
                let fillings = (0..fills)
                    .map(|_| {
                        let p = rng.gen_range(2..=5);
                        let q = loop {
                            let q = rng.gen_range(-4..=4);
                            if q.gcd(&p) == 1 {
                                break q;
                            }
                        };
                        Slope::from_fraction(q, p).unwrap()
                    })
                    .collect();
                let base = BaseSurface::orientable(0, (open + fills).max(3) as u32);
                let extra = base.boundary_count as usize - open - fills;
                let mut fl: Vec<Slope> = fillings;
                fl.extend((0..extra).map(|_| Slope::integer(rng.gen_range(-2..=2))));
                let twists = (0..open).map(|_| rng.gen_range(-2..=2)).collect();
                match SeifertBlock::with_twists(base, fl, twists) {
                    Ok(b) if chi_orbifold(&b).is_negative() => blocks.push(Block::Seifert(b)),
                    _ => blocks.push(Block::Seifert(SeifertBlock::product(BaseSurface::orientable(0, open.max(3) as u32)))),
                }
            } else {
                let slopes = (0..open)
                    .map(|_| {
                        let mut set = vec![Slope::ZERO, Slope::INFINITY];
                        set.push(Slope::from_fraction(rng.gen_range(-5..=5), rng.gen_range(1..=3)).unwrap());
                        set.sort();
                        set.dedup();
                        set
                    })
                    .collect();
                blocks.push(Block::Hyperbolic(HyperbolicBlock::new(rng.gen_range(0.5..10.0), slopes).unwrap()));
            }
        }
        let edges = (0..n - 1)
            .map(|i| {
                let from_torus = if i == 0 { 0 } else { 1 };
                GluingEdge::torus((i, from_torus), (i + 1, 0), Mat2::random_unimodular(rng, max_entry))
            })
            .collect();
        if let Ok(g) = DecompGraph::new(blocks, edges) {
            if validate_geometric(&g).map(|r| r.geometric).unwrap_or(false) {
                return g;
            }
        }
    }
}
