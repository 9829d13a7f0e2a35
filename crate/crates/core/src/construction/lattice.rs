use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{Letter, Word};

/// A point of `ℕ₀ × ℤ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: u64,
    pub y: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { x: 0, y: 0 };

    pub fn new(x: u64, y: i64) -> Self {
        LatticePoint { x, y }
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// `U: (x, y) ↦ (x, y + 1)`.
pub fn shift_u(p: LatticePoint) -> LatticePoint {
    LatticePoint { x: p.x, y: p.y + 1 }
}

pub fn shift_u_inv(p: LatticePoint) -> LatticePoint {
    LatticePoint { x: p.x, y: p.y - 1 }
}

/// An orbit `{(x, residue + m·period) : m ∈ ℤ}` of `U³` (period 3) or of
/// `U²` (period 2). Which one is meant is fixed by context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbitId {
    pub x: u64,
    pub residue: u8,
}

impl OrbitId {
    pub fn new(x: u64, residue: u8) -> Self {
        OrbitId { x, residue }
    }

    fn index(self, period: u64) -> u64 {
        period * self.x + self.residue as u64
    }

    fn from_index(i: u64, period: u64) -> Self {
        OrbitId {
            x: i / period,
            residue: (i % period) as u8,
        }
    }
}

/// `V(source.x, source.residue + 3k) = (target.x, target.residue + 2(k + offset))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub source: OrbitId,
    pub target: OrbitId,
    pub offset: i64,
}

impl Anchor {
    pub fn new(source: (u64, u8), target: (u64, u8)) -> Self {
        Anchor {
            source: OrbitId::new(source.0, source.1),
            target: OrbitId::new(target.0, target.1),
            offset: 0,
        }
    }
}

/// A bijection of `ℕ₀ × ℤ` commuting with the shifts in the sense
/// `V ∘ U³ = U² ∘ V`.
pub trait LatticeBijection {
    fn apply(&self, p: LatticePoint) -> LatticePoint;
    fn apply_inverse(&self, p: LatticePoint) -> LatticePoint;
}

/// Lift of an orbit bijection from `U³`-orbits to `U²`-orbits.
///
/// A finite anchor table fixes some orbit pairs; every other source orbit,
/// in lexicographic order of `(x, residue)`, is paired with the next free
/// target orbit in the same order.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitBijection {
    anchors: Vec<Anchor>,
    // lexicographic indices (3x + r and 2x + s), sorted
    anchored_sources: Vec<u64>,
    anchored_targets: Vec<u64>,
}

impl OrbitBijection {
    pub fn new(anchors: Vec<Anchor>) -> Result<Self> {
        for a in &anchors {
            if a.source.residue > 2 || a.target.residue > 1 {
                return Err(Error::InvalidArgument(format!(
                    "anchor {a:?} has an out-of-range residue"
                )));
            }
        }
        let b = Self::unchecked(anchors);
        let distinct = |v: &[u64]| v.windows(2).all(|w| w[0] != w[1]);
        if !distinct(&b.anchored_sources) || !distinct(&b.anchored_targets) {
            return Err(Error::InvalidArgument("anchor table repeats an orbit".into()));
        }
        Ok(b)
    }

    /// No validation; a repeated orbit makes the lift non-injective. Exists
    /// for negative controls.
    pub fn unchecked(anchors: Vec<Anchor>) -> Self {
        let mut anchored_sources: Vec<u64> = anchors.iter().map(|a| a.source.index(3)).collect();
        let mut anchored_targets: Vec<u64> = anchors.iter().map(|a| a.target.index(2)).collect();
        anchored_sources.sort_unstable();
        anchored_targets.sort_unstable();
        OrbitBijection {
            anchors,
            anchored_sources,
            anchored_targets,
        }
    }

    /// The adopted table:
    /// `V(0, 3k) = (0, 2k)`, `V(1, 3k) = (0, 1 + 2k)`,
    /// `V(0, 1 + 3k) = (1, 2k)`, `V(0, 2 + 3k) = (1, 1 + 2k)`.
    /// With it `UV⁻¹UV(0,0) = (1,1)` while `V⁻¹UVU(0,0) = (0,2)`.
    pub fn standard() -> Self {
        Self::new(vec![
            Anchor::new((0, 0), (0, 0)),
            Anchor::new((1, 0), (0, 1)),
            Anchor::new((0, 1), (1, 0)),
            Anchor::new((0, 2), (1, 1)),
        ])
        .expect("standard anchor table is valid")
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    /// Index among the free entries of `all \ anchored` → absolute index.
    fn nth_free(anchored: &[u64], n: u64) -> u64 {
        let mut j = n;
        for &t in anchored {
            if t <= j {
                j += 1;
            } else {
                break;
            }
        }
        j
    }

    fn rank_among_free(anchored: &[u64], i: u64) -> u64 {
        i - anchored.iter().filter(|&&t| t < i).count() as u64
    }

    pub fn orbit_image(&self, source: OrbitId) -> (OrbitId, i64) {
        if let Some(a) = self.anchors.iter().find(|a| a.source == source) {
            return (a.target, a.offset);
        }
        let p = Self::rank_among_free(&self.anchored_sources, source.index(3));
        (OrbitId::from_index(Self::nth_free(&self.anchored_targets, p), 2), 0)
    }

    pub fn orbit_preimage(&self, target: OrbitId) -> (OrbitId, i64) {
        if let Some(a) = self.anchors.iter().find(|a| a.target == target) {
            return (a.source, a.offset);
        }
        let p = Self::rank_among_free(&self.anchored_targets, target.index(2));
        (OrbitId::from_index(Self::nth_free(&self.anchored_sources, p), 3), 0)
    }
}

impl LatticeBijection for OrbitBijection {
    fn apply(&self, p: LatticePoint) -> LatticePoint {
        let (r, k) = (p.y.rem_euclid(3), p.y.div_euclid(3));
        let (target, offset) = self.orbit_image(OrbitId::new(p.x, r as u8));
        LatticePoint {
            x: target.x,
            y: target.residue as i64 + 2 * (k + offset),
        }
    }

    fn apply_inverse(&self, p: LatticePoint) -> LatticePoint {
        let (s, k) = (p.y.rem_euclid(2), p.y.div_euclid(2));
        let (source, offset) = self.orbit_preimage(OrbitId::new(p.x, s as u8));
        LatticePoint {
            x: source.x,
            y: source.residue as i64 + 3 * (k - offset),
        }
    }
}

/// `V = id`. Does not intertwine; negative control only.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityMap;

impl LatticeBijection for IdentityMap {
    fn apply(&self, p: LatticePoint) -> LatticePoint {
        p
    }

    fn apply_inverse(&self, p: LatticePoint) -> LatticePoint {
        p
    }
}

pub(crate) fn apply_letter<B: LatticeBijection + ?Sized>(v: &B, l: Letter, p: LatticePoint) -> LatticePoint {
    match l {
        Letter::U => shift_u(p),
        Letter::UInv => shift_u_inv(p),
        Letter::V => v.apply(p),
        Letter::VInv => v.apply_inverse(p),
    }
}

/// Every point visited while applying `word` to `p`, starting with `p`.
pub fn word_path<B: LatticeBijection + ?Sized>(v: &B, word: &Word, p: LatticePoint) -> Vec<LatticePoint> {
    let mut path = vec![p];
    let mut q = p;
    for l in word.action_order() {
        q = apply_letter(v, l, q);
        path.push(q);
    }
    path
}

pub fn apply_word<B: LatticeBijection + ?Sized>(v: &B, word: &Word, p: LatticePoint) -> LatticePoint {
    word.action_order().fold(p, |q, l| apply_letter(v, l, q))
}

/// Checks `V(U³p) = U²V(p)`, `V⁻¹(V(p)) = p` and `V(V⁻¹(p)) = p` on every
/// sampled point.
pub fn verify_intertwining<B: LatticeBijection + ?Sized>(v: &B, sample: &[LatticePoint]) -> bool {
    sample.iter().all(|&p| {
        let lhs = v.apply(LatticePoint { y: p.y + 3, ..p });
        let image = v.apply(p);
        let rhs = LatticePoint {
            y: image.y + 2,
            ..image
        };
        lhs == rhs && v.apply_inverse(image) == p && v.apply(v.apply_inverse(p)) == p
    })
}

/// Images of the origin under `UV⁻¹UV` and `V⁻¹UVU`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessPoints {
    pub w1: LatticePoint,
    pub w2: LatticePoint,
}

impl WitnessPoints {
    /// Distinct images make the two basis vectors, hence the two output
    /// states of the witness `e_(0,0)`, orthogonal.
    pub fn distinct(&self) -> bool {
        self.w1 != self.w2
    }
}

pub fn lattice_witness_points<B: LatticeBijection + ?Sized>(v: &B) -> WitnessPoints {
    WitnessPoints {
        w1: apply_word(v, &Word::commutator_left(), LatticePoint::ORIGIN),
        w2: apply_word(v, &Word::commutator_right(), LatticePoint::ORIGIN),
    }
}
