//! Seifert blocks seen as Dehn fillings of circle bundles over surfaces.
//!
//! On every boundary torus the basis is `(m, l)` with `m` the boundary of a
//! fixed section and `l` the fiber, so the fiber is the slope `∞` and a
//! filling `q/p` creates a cone point of order `p` (none when `p = 1`).
//!
//! An open torus also carries an integer `section_twist` `t`: the section
//! actually used on that torus is `m + t·l`. Slopes handed to [`fill`] are
//! read in that twisted basis, which is how an integer part of the Euler
//! number is moved off the fillings and onto the boundary.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::slope::{Slope, SlopeError, SlopeSequence, SlopeVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeifertError {
    #[error("invalid Seifert block: {0}")]
    InvalidBlock(String),
    #[error("Euler number needs an orientable base surface")]
    OrientationConvention,
    #[error("expected {expected} filling slopes, got {got}")]
    WrongSlopeCount { expected: usize, got: usize },
    #[error("filling torus {torus} along the fiber destroys the fibration")]
    FiberFilling { torus: usize },
    #[error("fiber filling produces a manifold outside the recognized families")]
    UnrecognizedFiberFilling,
    #[error("fundamental group order is only known for lens spaces, solid tori and interval bundles")]
    Unrecognized,
    #[error("coordinate {coord} of term {term} is the fiber ∞")]
    InfiniteTerm { coord: usize, term: usize },
    #[error("coordinates {0} and {1} both tend to the fiber; they cobound a fibred annulus")]
    TwoFiberLimits(usize, usize),
    #[error("integer overflow")]
    Overflow,
    #[error(transparent)]
    Slope(#[from] SlopeError),
}

/// A compact surface with boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BaseSurface {
    pub genus: u32,
    pub orientable: bool,
    pub boundary_count: u32,
}

impl BaseSurface {
    pub fn orientable(genus: u32, boundary_count: u32) -> Self {
        BaseSurface { genus, orientable: true, boundary_count }
    }

    pub fn non_orientable(genus: u32, boundary_count: u32) -> Self {
        BaseSurface { genus, orientable: false, boundary_count }
    }

    pub fn disc() -> Self {
        Self::orientable(0, 1)
    }

    pub fn annulus() -> Self {
        Self::orientable(0, 2)
    }

    pub fn pair_of_pants() -> Self {
        Self::orientable(0, 3)
    }

    pub fn mobius_band() -> Self {
        Self::non_orientable(1, 1)
    }

    pub fn euler_characteristic(&self) -> i64 {
        let g = self.genus as i64;
        let b = self.boundary_count as i64;
        if self.orientable {
            2 - 2 * g - b
        } else {
            2 - g - b
        }
    }
}

/// A circle bundle over `base`, with some boundary circles filled.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BlockJson", into = "BlockJson")]
pub struct SeifertBlock {
    base: BaseSurface,
    fillings: Vec<Slope>,
    section_twists: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct BlockJson {
    genus: u32,
    orientable: bool,
    boundary: u32,
    #[serde(default)]
    fillings: Vec<Slope>,
    #[serde(default)]
    twists: Option<Vec<i64>>,
}

impl TryFrom<BlockJson> for SeifertBlock {
    type Error = SeifertError;

    fn try_from(j: BlockJson) -> Result<Self, Self::Error> {
        let base = BaseSurface { genus: j.genus, orientable: j.orientable, boundary_count: j.boundary };
        match j.twists {
            Some(t) => SeifertBlock::with_twists(base, j.fillings, t),
            None => SeifertBlock::new(base, j.fillings),
        }
    }
}

impl From<SeifertBlock> for BlockJson {
    fn from(b: SeifertBlock) -> Self {
        BlockJson {
            genus: b.base.genus,
            orientable: b.base.orientable,
            boundary: b.base.boundary_count,
            fillings: b.fillings,
            twists: Some(b.section_twists),
        }
    }
}

impl SeifertBlock {
    /// A block with zero section twists on its open tori.
    pub fn new(base: BaseSurface, fillings: Vec<Slope>) -> Result<Self, SeifertError> {
        let open = (base.boundary_count as usize).checked_sub(fillings.len()).ok_or_else(|| {
            SeifertError::InvalidBlock(format!(
                "{} fillings on a surface with {} boundary circles",
                fillings.len(),
                base.boundary_count
            ))
        })?;
        Self::with_twists(base, fillings, vec![0; open])
    }

    pub fn with_twists(base: BaseSurface, fillings: Vec<Slope>, section_twists: Vec<i64>) -> Result<Self, SeifertError> {
        if !base.orientable && base.genus == 0 {
            return Err(SeifertError::InvalidBlock("non-orientable surface needs genus ≥ 1".into()));
        }
        if let Some(s) = fillings.iter().find(|s| s.is_infinite()) {
            return Err(SeifertError::InvalidBlock(format!("filling {s} is the fiber")));
        }
        if fillings.len() + section_twists.len() != base.boundary_count as usize {
            return Err(SeifertError::InvalidBlock(format!(
                "{} fillings + {} open tori ≠ {} boundary circles",
                fillings.len(),
                section_twists.len(),
                base.boundary_count
            )));
        }
        Ok(SeifertBlock { base, fillings, section_twists })
    }

    /// `F × S¹` with nothing filled.
    pub fn product(base: BaseSurface) -> Self {
        Self::new(base, vec![]).expect("product block is valid")
    }

    pub fn base(&self) -> &BaseSurface {
        &self.base
    }

    pub fn fillings(&self) -> &[Slope] {
        &self.fillings
    }

    pub fn section_twists(&self) -> &[i64] {
        &self.section_twists
    }

    pub fn open_boundary(&self) -> usize {
        self.section_twists.len()
    }

    pub fn is_closed(&self) -> bool {
        self.section_twists.is_empty()
    }

    /// Orders of the genuine cone points (fillings with `p ≥ 2`).
    pub fn cone_orders(&self) -> Vec<i64> {
        self.fillings.iter().map(|s| s.p()).filter(|&p| p >= 2).collect()
    }

    /// `Σ q_i/p_i` over the fillings, no normalization.
    pub fn filling_sum(&self) -> Ratio<i64> {
        self.fillings.iter().filter_map(|s| s.to_ratio()).fold(Ratio::zero(), |acc, r| acc + r)
    }

    /// Moves the integer part of the Euler number onto the first open torus,
    /// so that the fillings sum to a value in `[0, 1)`. Closed blocks are
    /// returned unchanged.
    pub fn normalized(&self) -> Result<SeifertBlock, SeifertError> {
        if self.is_closed() || self.fillings.is_empty() {
            return Ok(self.clone());
        }
        let n = self.filling_sum().floor().to_integer();
        if n == 0 {
            return Ok(self.clone());
        }
        let mut out = self.clone();
        out.fillings[0] = out.fillings[0].shifted(-n)?;
        out.section_twists[0] = out.section_twists[0].checked_add(n).ok_or(SeifertError::Overflow)?;
        Ok(out)
    }
}

/// `χ(Σ) = χ(F) + Σ 1/p_i`.
pub fn chi_orbifold(b: &SeifertBlock) -> Ratio<i64> {
    b.fillings
        .iter()
        .fold(Ratio::from_integer(b.base.euler_characteristic()), |acc, s| acc + Ratio::new(1, s.p()))
}

/// Closed blocks: `Σ q_i/p_i`. Blocks with boundary: the representative in
/// `[0, 1)` (see [`SeifertBlock::normalized`] for the matching twists).
pub fn euler_number(b: &SeifertBlock) -> Result<Ratio<i64>, SeifertError> {
    if !b.base.orientable {
        return Err(SeifertError::OrientationConvention);
    }
    let e = b.filling_sum();
    Ok(if b.is_closed() { e } else { e - e.floor() })
}

/// What a filling turned out to be.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilledResult {
    SolidTorus,
    /// `T × [0, 1]`.
    IntervalBundleProduct,
    /// The twisted interval bundle over the Klein bottle.
    IntervalBundleTwisted,
    /// `|H₁| = order`; order 0 is `S² × S¹`, order 1 is `S³`.
    LensSpace { order: u64 },
    /// Any other Seifert manifold. `flat` marks closed blocks with `χ(Σ) = 0`.
    GenericSeifert { block: SeifertBlock, flat: bool },
}

/// Order of the fundamental group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pi1Order {
    Finite(u64),
    Infinite,
}

/// Fill every open torus. Slopes are read in the twisted section basis.
pub fn fill(b: &SeifertBlock, v: &SlopeVector, allow_fiber: bool) -> Result<FilledResult, SeifertError> {
    let slopes: Vec<Option<Slope>> = v.0.iter().copied().map(Some).collect();
    fill_partial(b, &slopes, allow_fiber)
}

/// Fill the open tori marked `Some`, leave the others open.
pub fn fill_partial(b: &SeifertBlock, v: &[Option<Slope>], allow_fiber: bool) -> Result<FilledResult, SeifertError> {
    if v.len() != b.open_boundary() {
        return Err(SeifertError::WrongSlopeCount { expected: b.open_boundary(), got: v.len() });
    }
    let mut fillings = b.fillings.clone();
    let mut twists = Vec::new();
    let mut fiber_fillings = 0usize;
    for (j, (slope, &t)) in v.iter().zip(&b.section_twists).enumerate() {
        match slope {
            None => twists.push(t),
            Some(s) if s.is_infinite() => {
                if !allow_fiber {
                    return Err(SeifertError::FiberFilling { torus: j });
                }
                fiber_fillings += 1;
            }
            Some(s) => fillings.push(s.shifted(t)?),
        }
    }
    if fiber_fillings > 0 {
        return fiber_filled(b, &fillings, fiber_fillings, twists.len());
    }
    let filled = SeifertBlock::with_twists(b.base, fillings, twists)?;
    Ok(recognize(&filled))
}

// The fiber bounds a disc after filling, so over a sphere-with-holes base the
// result is a connected sum of the lens spaces of the remaining cone points.
fn fiber_filled(b: &SeifertBlock, fillings: &[Slope], fiber_fillings: usize, still_open: usize) -> Result<FilledResult, SeifertError> {
    if !b.base.orientable || b.base.genus != 0 || still_open != 0 {
        return Err(SeifertError::UnrecognizedFiberFilling);
    }
    let cones: Vec<i64> = fillings.iter().map(|s| s.p()).filter(|&p| p >= 2).collect();
    match (fiber_fillings, cones.len()) {
        (1, 0) => Ok(FilledResult::LensSpace { order: 1 }),
        (1, 1) => Ok(FilledResult::LensSpace { order: cones[0] as u64 }),
        (2, 0) => Ok(FilledResult::LensSpace { order: 0 }),
        _ => Err(SeifertError::UnrecognizedFiberFilling),
    }
}

/// Names the small blocks; everything else stays a generic Seifert block.
pub fn recognize(b: &SeifertBlock) -> FilledResult {
    let cones = b.cone_orders();
    let open = b.open_boundary();
    let planar = b.base.orientable && b.base.genus == 0;
    if planar {
        match (open, cones.as_slice()) {
            (0, c) if c.len() <= 2 => {
                return FilledResult::LensSpace { order: lens_order(&b.fillings) };
            }
            (1, c) if c.len() <= 1 => return FilledResult::SolidTorus,
            (2, []) => return FilledResult::IntervalBundleProduct,
            (1, [2, 2]) => return FilledResult::IntervalBundleTwisted,
            _ => {}
        }
    } else if !b.base.orientable && b.base.genus == 1 && open == 1 && cones.is_empty() {
        return FilledResult::IntervalBundleTwisted;
    }
    let flat = open == 0 && chi_orbifold(b).is_zero();
    FilledResult::GenericSeifert { block: b.clone(), flat }
}

/// `|Σ_i q_i Π_{j≠i} p_j|`, the order of `H₁` of a closed block over the sphere.
fn lens_order(fillings: &[Slope]) -> u64 {
    let mut total: i128 = 0;
    for (i, s) in fillings.iter().enumerate() {
        let others: i128 = fillings
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, t)| t.p() as i128)
            .product();
        total += s.q() as i128 * others;
    }
    u64::try_from(total.unsigned_abs()).expect("lens space order exceeds u64")
}

/// `|π₁|` of a recognized filling. Lens spaces have cyclic `π₁ = H₁`.
pub fn pi1_order(r: &FilledResult) -> Result<Pi1Order, SeifertError> {
    match r {
        FilledResult::LensSpace { order: 0 } => Ok(Pi1Order::Infinite),
        FilledResult::LensSpace { order } => Ok(Pi1Order::Finite(*order)),
        FilledResult::SolidTorus | FilledResult::IntervalBundleProduct | FilledResult::IntervalBundleTwisted => {
            Ok(Pi1Order::Infinite)
        }
        FilledResult::GenericSeifert { .. } => Err(SeifertError::Unrecognized),
    }
}

/// Relation matrix of `H₁` for a closed block, one row per relation and one
/// column per generator (handle generators, boundary curves, then the fiber).
pub fn h1_presentation(b: &SeifertBlock) -> Vec<Vec<i64>> {
    let g = b.base.genus as usize;
    let r = b.fillings.len();
    let handles = if b.base.orientable { 2 * g } else { g };
    let cols = handles + r + 1;
    let fiber = cols - 1;
    let mut rows = Vec::with_capacity(r + 2);
    let mut boundary = vec![0; cols];
    if !b.base.orientable {
        // product of squares of crosscaps times boundary curves is trivial,
        // and each crosscap reverses the fiber.
        boundary[..g].fill(2);
        let mut rev = vec![0; cols];
        rev[fiber] = 2;
        rows.push(rev);
    }
    for c in 0..r {
        boundary[handles + c] = 1;
    }
    rows.push(boundary);
    for (i, s) in b.fillings.iter().enumerate() {
        let mut row = vec![0; cols];
        row[handles + i] = s.p();
        row[fiber] = s.q();
        rows.push(row);
    }
    rows
}

/// Order of `H₁` of a closed block, `None` when infinite.
pub fn h1_order(b: &SeifertBlock) -> Result<Option<u64>, SeifertError> {
    if !b.is_closed() {
        return Ok(None);
    }
    Ok(cokernel_order(&h1_presentation(b)))
}

/// Index of the row lattice in `ℤ^cols`, by integer row echelon reduction.
pub(crate) fn cokernel_order(rows: &[Vec<i64>]) -> Option<u64> {
    let Some(cols) = rows.first().map(|r| r.len()) else {
        return Some(1);
    };
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut pivot_row = 0;
    let mut order: i128 = 1;
    for col in 0..cols {
        // Euclid down the column until one nonzero entry remains.
        loop {
            let nonzero: Vec<usize> = (pivot_row..m.len()).filter(|&i| m[i][col] != 0).collect();
            if nonzero.len() <= 1 {
                break;
            }
            let best = *nonzero.iter().min_by_key(|&&i| m[i][col].abs()).unwrap();
            for &i in &nonzero {
                if i != best {
                    let f = Integer::div_floor(&m[i][col], &m[best][col]);
                    for k in col..cols {
                        m[i][k] -= f * m[best][k];
                    }
                }
            }
        }
        let Some(i) = (pivot_row..m.len()).find(|&i| m[i][col] != 0) else {
            return None;
        };
        m.swap(pivot_row, i);
        order *= m[pivot_row][col].abs();
        pivot_row += 1;
    }
    u64::try_from(order).ok()
}

/// The meridian of `P × S¹` filled by `q1` and `s2`, read on its third
/// boundary torus: `−(q1 + q2/p2)`.
pub fn meridian_of_filled_pants(q1: i64, s2: Slope) -> Result<Slope, SeifertError> {
    if s2.is_infinite() {
        return Err(SeifertError::Slope(SlopeError::InfiniteCoordinate(1)));
    }
    let num = (q1 as i128) * (s2.p() as i128) + s2.q() as i128;
    let num = i64::try_from(-num).map_err(|_| SeifertError::Overflow)?;
    Ok(Slope::from_fraction(num, s2.p())?)
}

/// `|e(N) + Σ_j s_j^i|` for each term, with slopes read in the twisted
/// section basis of the open tori. At most one coordinate may tend to the
/// fiber.
pub fn euler_growth(b: &SeifertBlock, seq: &SlopeSequence) -> Result<Vec<Ratio<i64>>, SeifertError> {
    if !b.base.orientable {
        return Err(SeifertError::OrientationConvention);
    }
    if seq.limit.len() != b.open_boundary() {
        return Err(SeifertError::WrongSlopeCount { expected: b.open_boundary(), got: seq.limit.len() });
    }
    let fiber_limits: Vec<usize> = (0..seq.limit.len()).filter(|&j| seq.limit[j].is_slope(&Slope::INFINITY)).collect();
    if let [a, c, ..] = fiber_limits[..] {
        return Err(SeifertError::TwoFiberLimits(a, c));
    }
    let base = b.filling_sum() + Ratio::from_integer(b.section_twists.iter().sum::<i64>());
    seq.terms
        .iter()
        .enumerate()
        .map(|(i, term)| {
            let mut total = base;
            for (j, s) in term.0.iter().enumerate() {
                total += s.to_ratio().ok_or(SeifertError::InfiniteTerm { coord: j, term: i })?;
            }
            Ok(total.abs())
        })
        .collect()
}
