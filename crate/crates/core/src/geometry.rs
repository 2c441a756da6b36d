//! Polar boxes `D(r, θ)`, the dyadic decomposition of the disc and the
//! neighbourhood structure used by the boundedness estimates.
//!
//! A box of the continuous family has radial extent `[r, (1+r)/2]` and
//! angular width `π(1-r)`. The dyadic box of generation `m` and slot `μ`
//! (`1 ≤ μ ≤ 2^m`) is `D(1 - 2^{1-m}, π(μ-1)2^{1-m})`; for fixed `m` the
//! slots tile the annulus `1 - 2^{1-m} < |z| ≤ 1 - 2^{-m}`.
//!
//! Membership follows the half-open convention `r_in < ρ ≤ r_out`,
//! `θ_in < φ ≤ θ_out`, so the decomposition is an exact partition.
//! Angles live in `[0, 2π)`; boxes whose arc crosses the seam are handled
//! by unwrapping by `±2π`.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::PolarPoint;

/// Default cap on the number of generations a decomposition may hold.
pub const DEFAULT_GENERATION_CAP: u32 = 24;

/// Largest neighbour set `|𝒟_n|` over the dyadic decomposition (measured by
/// exhaustive enumeration; attained for every generation `m ≥ 2`).
pub const MAX_NEIGHBORS: usize = 9;

/// Largest number of neighbour sets a single box belongs to. The touching
/// relation is symmetric, so this equals [`MAX_NEIGHBORS`].
pub const MAX_MULTIPLICITY: usize = 9;

/// Lower bound on `|D(w,R)| / |D_n|` for the disc returned by
/// [`Decomposition::inscribed_disc`], uniform over generations and over
/// points of the closed box. Attained in the limit at outer corners.
pub const INSCRIBED_DISC_RATIO: f64 = 0.125;

/// Dyadic index `(m, μ)` of a decomposition box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BoxIndex {
    pub m: u32,
    pub mu: u64,
}

impl BoxIndex {
    /// Generations are limited to 62 so that slot arithmetic stays in `u64`.
    pub const MAX_GENERATION: u32 = 62;

    pub fn new(m: u32, mu: u64) -> Result<Self> {
        if m == 0 || m > Self::MAX_GENERATION {
            return Err(Error::domain(format!(
                "generation m = {m} outside 1..={}",
                Self::MAX_GENERATION
            )));
        }
        let slots = 1u64 << m;
        if mu == 0 || mu > slots {
            return Err(Error::domain(format!(
                "slot mu = {mu} outside the valid range 1..={slots} for generation m = {m}"
            )));
        }
        Ok(BoxIndex { m, mu })
    }

    /// Number of angular slots in generation `m`.
    pub fn slots(m: u32) -> u64 {
        1u64 << m
    }

    /// One-based position `n` in the enumeration order (m ascending, then μ).
    pub fn ordinal(self) -> u64 {
        (1u64 << self.m) - 2 + self.mu
    }

    pub fn from_ordinal(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("box ordinals start at 1"));
        }
        // generation m holds ordinals 2^m - 1 ..= 2^{m+1} - 2
        let m = 63 - (n + 1).leading_zeros();
        BoxIndex::new(m, n + 2 - (1u64 << m))
    }

    /// Arc of the box in units of `2π / 2^g`, for `g ≥ m`.
    fn arc_units(self, g: u32) -> (u64, u64) {
        let scale = 1u64 << (g - self.m);
        ((self.mu - 1) * scale, self.mu * scale)
    }
}

/// A polar rectangle of the family `𝒟`, optionally carrying its dyadic index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DyadicBox {
    pub r_in: f64,
    pub r_out: f64,
    pub theta_in: f64,
    pub theta_out: f64,
    pub index: Option<BoxIndex>,
}

impl DyadicBox {
    /// The box `D(r, θ)` of the continuous family.
    pub fn family(r: f64, theta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::domain(format!("box radius r = {r} outside [0, 1)")));
        }
        if !(0.0..=TAU).contains(&theta) {
            return Err(Error::domain(format!("box angle θ = {theta} outside [0, 2π]")));
        }
        Ok(DyadicBox {
            r_in: r,
            r_out: 1.0 - 0.5 * (1.0 - r),
            theta_in: theta,
            theta_out: theta + PI * (1.0 - r),
            index: None,
        })
    }

    pub fn from_index(index: BoxIndex) -> Self {
        let scale = 2f64.powi(1 - index.m as i32);
        DyadicBox {
            r_in: 1.0 - scale,
            r_out: 1.0 - 0.5 * scale,
            theta_in: PI * (index.mu - 1) as f64 * scale,
            theta_out: PI * index.mu as f64 * scale,
            index: Some(index),
        }
    }

    pub fn angular_width(&self) -> f64 {
        self.theta_out - self.theta_in
    }

    /// Normalized area `∫_D dA` (the whole disc has measure 1).
    pub fn area(&self) -> f64 {
        self.angular_width() * (self.r_out * self.r_out - self.r_in * self.r_in) / TAU
    }

    pub fn center(&self) -> PolarPoint {
        PolarPoint::new(
            0.5 * (self.r_in + self.r_out),
            (0.5 * (self.theta_in + self.theta_out)).rem_euclid(TAU),
        )
    }

    /// Representative of `phi` (mod 2π) inside `[theta_in, theta_out]`, if any.
    pub fn unwrap_angle(&self, phi: f64) -> Option<f64> {
        let base = phi.rem_euclid(TAU);
        [base, base + TAU, base - TAU]
            .into_iter()
            .find(|&a| a >= self.theta_in && a <= self.theta_out)
    }

    /// Half-open membership `r_in < ρ ≤ r_out`, `θ_in < φ ≤ θ_out`.
    pub fn contains(&self, p: PolarPoint) -> bool {
        if !(p.rho > self.r_in && p.rho <= self.r_out) {
            return false;
        }
        let base = p.phi.rem_euclid(TAU);
        [base, base + TAU, base - TAU]
            .into_iter()
            .any(|a| a > self.theta_in && a <= self.theta_out)
    }

    /// Membership in the closed box.
    pub fn contains_closed(&self, p: PolarPoint) -> bool {
        p.rho >= self.r_in && p.rho <= self.r_out && self.unwrap_angle(p.phi).is_some()
    }

    /// Corners in the order inner/start, inner/end, outer/start, outer/end.
    pub fn corners(&self) -> [PolarPoint; 4] {
        let t0 = self.theta_in.rem_euclid(TAU);
        let t1 = self.theta_out.rem_euclid(TAU);
        [
            PolarPoint::new(self.r_in, t0),
            PolarPoint::new(self.r_in, t1),
            PolarPoint::new(self.r_out, t0),
            PolarPoint::new(self.r_out, t1),
        ]
    }
}

/// The box with dyadic index `(m, μ)`.
pub fn box_from_index(m: u32, mu: u64) -> Result<DyadicBox> {
    Ok(DyadicBox::from_index(BoxIndex::new(m, mu)?))
}

/// Normalized area of a box.
pub fn box_area(b: &DyadicBox) -> f64 {
    b.area()
}

/// Whether the closures of two dyadic boxes intersect.
///
/// Exact: radial bands of generations `g` and `g'` meet iff `|g - g'| ≤ 1`
/// and arcs are compared in integer units of the finer generation.
pub fn closures_touch(a: BoxIndex, b: BoxIndex) -> bool {
    if a.m.abs_diff(b.m) > 1 {
        return false;
    }
    if a.m == 1 && b.m == 1 {
        // both contain the origin
        return true;
    }
    let g = a.m.max(b.m);
    let period = 1i128 << g;
    let (a0, a1) = a.arc_units(g);
    let (b0, b1) = b.arc_units(g);
    let (a0, a1, b0, b1) = (a0 as i128, a1 as i128, b0 as i128, b1 as i128);
    (-1..=1).any(|k| {
        let lo = a0.max(b0 + k * period);
        let hi = a1.min(b1 + k * period);
        lo <= hi
    })
}

/// The boxes touching a given box (`𝒟_n`), whose union is `U_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborSet {
    pub center: BoxIndex,
    /// Sorted by enumeration order; always contains `center`.
    pub members: Vec<BoxIndex>,
    /// False when some member lies beyond the decomposition's last generation.
    pub complete: bool,
}

impl NeighborSet {
    pub fn union_region(&self) -> Vec<DyadicBox> {
        self.members.iter().map(|&i| DyadicBox::from_index(i)).collect()
    }

    /// `|U_n|`.
    pub fn union_area(&self) -> f64 {
        self.union_region().iter().map(DyadicBox::area).sum()
    }
}

/// Touching boxes of `index`, computed as if the decomposition were infinite.
pub fn touching_boxes(index: BoxIndex) -> Vec<BoxIndex> {
    let mut out = Vec::with_capacity(MAX_NEIGHBORS);
    let lo = index.m.saturating_sub(1).max(1);
    let hi = (index.m + 1).min(BoxIndex::MAX_GENERATION);
    for g in lo..=hi {
        let slots = BoxIndex::slots(g);
        if slots <= 16 {
            for mu in 1..=slots {
                let cand = BoxIndex { m: g, mu };
                if closures_touch(index, cand) {
                    out.push(cand);
                }
            }
            continue;
        }
        // slot of generation g containing the start of the arc, then a window
        let start = if g >= index.m {
            (index.mu - 1) << (g - index.m)
        } else {
            (index.mu - 1) >> (index.m - g)
        };
        for offset in -2i64..=5 {
            let mu = (start as i64 + offset).rem_euclid(slots as i64) as u64 + 1;
            let cand = BoxIndex { m: g, mu };
            if closures_touch(index, cand) && !out.contains(&cand) {
                out.push(cand);
            }
        }
    }
    out.sort();
    out
}

/// `V_m`: the union of all boxes of generation greater than `m`, i.e. the
/// annulus `1 - 2^{-m} < |z| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRegion {
    pub generation_cutoff: u32,
    pub inner_radius: f64,
    /// Last generation available in the decomposition the region was built from.
    pub m_max: u32,
}

impl TailRegion {
    pub fn indicator(&self, z: PolarPoint) -> bool {
        z.rho > self.inner_radius && z.rho < 1.0
    }

    /// Normalized area `1 - (1 - 2^{-m})^2`.
    pub fn area(&self) -> f64 {
        1.0 - self.inner_radius * self.inner_radius
    }

    /// Boxes of the decomposition that lie in the region (generations
    /// `m+1 ..= m_max`).
    pub fn boxes(&self) -> impl Iterator<Item = BoxIndex> {
        let cutoff = self.generation_cutoff;
        (cutoff + 1..=self.m_max)
            .flat_map(|m| (1..=BoxIndex::slots(m)).map(move |mu| BoxIndex { m, mu }))
    }
}

/// A Euclidean disc `D(w, R)` inside `U_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InscribedDisc {
    pub center: PolarPoint,
    pub radius: f64,
    /// `|D(w,R)| / |D_n|`, at least [`INSCRIBED_DISC_RATIO`].
    pub area_ratio: f64,
}

/// The countable decomposition `{D_n}` truncated after generation `m_max`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    m_max: u32,
    boxes: Vec<DyadicBox>,
}

impl Decomposition {
    pub fn new(m_max: u32) -> Result<Self> {
        Self::with_cap(m_max, DEFAULT_GENERATION_CAP)
    }

    pub fn with_cap(m_max: u32, cap: u32) -> Result<Self> {
        if m_max == 0 {
            return Err(Error::domain("m_max must be at least 1"));
        }
        if m_max > cap || m_max > BoxIndex::MAX_GENERATION {
            return Err(Error::Resource(format!(
                "m_max = {m_max} exceeds the generation cap {}",
                cap.min(BoxIndex::MAX_GENERATION)
            )));
        }
        let count = (1usize << (m_max + 1)) - 2;
        let mut boxes = Vec::with_capacity(count);
        for m in 1..=m_max {
            for mu in 1..=BoxIndex::slots(m) {
                boxes.push(DyadicBox::from_index(BoxIndex { m, mu }));
            }
        }
        Ok(Decomposition { m_max, boxes })
    }

    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    pub fn boxes(&self) -> &[DyadicBox] {
        &self.boxes
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn get(&self, index: BoxIndex) -> Option<&DyadicBox> {
        if index.m > self.m_max {
            return None;
        }
        self.boxes.get(index.ordinal() as usize - 1)
    }

    fn require(&self, index: BoxIndex) -> Result<&DyadicBox> {
        self.get(index).ok_or_else(|| {
            Error::domain(format!(
                "box (m={}, mu={}) is not in a decomposition with m_max = {}",
                index.m, index.mu, self.m_max
            ))
        })
    }

    /// Total area of the boxes, accumulated in enumeration order.
    pub fn total_area(&self) -> f64 {
        let mut acc = crate::quadrature::NeumaierSum::default();
        for b in &self.boxes {
            acc.add(b.area());
        }
        acc.total()
    }

    pub fn neighbors(&self, index: BoxIndex) -> Result<NeighborSet> {
        self.require(index)?;
        let members = touching_boxes(index);
        let complete = members.iter().all(|b| b.m <= self.m_max);
        Ok(NeighborSet {
            center: index,
            members,
            complete,
        })
    }

    pub fn tail_region(&self, m: u32) -> Result<TailRegion> {
        if m > self.m_max {
            return Err(Error::domain(format!(
                "tail cutoff m = {m} exceeds m_max = {}",
                self.m_max
            )));
        }
        Ok(TailRegion {
            generation_cutoff: m,
            inner_radius: 1.0 - 2f64.powi(-(m as i32)),
            m_max: self.m_max,
        })
    }

    /// A disc centred at `w ∈ closure(D_n)` contained in `U_n`.
    ///
    /// `U_n` contains the polar rectangle with radial extent from the inner
    /// edge of generation `m-1` to the outer edge of generation `m+1` and the
    /// arc of `D_n` widened by half its width on each side; `R` is the
    /// distance from `w` to the boundary of that rectangle. For `m = 1`,
    /// `U_n` contains the disc `|z| ≤ 3/4`.
    pub fn inscribed_disc(&self, index: BoxIndex, w: PolarPoint) -> Result<InscribedDisc> {
        let b = *self.require(index)?;
        if !b.contains_closed(w) {
            return Err(Error::domain(format!(
                "point (ρ={}, φ={}) is not in box (m={}, mu={})",
                w.rho, w.phi, index.m, index.mu
            )));
        }
        let radius = if index.m == 1 {
            0.75 - w.rho
        } else {
            let scale = 2f64.powi(1 - index.m as i32);
            let r_lo = 1.0 - 2.0 * scale;
            let r_hi = 1.0 - 0.25 * scale;
            let half = 0.5 * b.angular_width();
            let phi = b.unwrap_angle(w.phi).expect("checked membership");
            let gap_lo = phi - (b.theta_in - half);
            let gap_hi = (b.theta_out + half) - phi;
            (w.rho - r_lo)
                .min(r_hi - w.rho)
                .min(w.rho * gap_lo.sin())
                .min(w.rho * gap_hi.sin())
        };
        Ok(InscribedDisc {
            center: w,
            radius,
            area_ratio: radius * radius / b.area(),
        })
    }

    pub fn iter_indices(&self) -> impl Iterator<Item = BoxIndex> + '_ {
        self.boxes.iter().map(|b| b.index.expect("decomposition boxes are indexed"))
    }
}
