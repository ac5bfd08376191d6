//! Spinor wavefunctions on chains and square tori.
//!
//! Amplitudes are stored densely, two per site in (up, down) order. On a
//! torus the site index is row-major in (x, y). Coordinates are centered:
//! a `Line` of length `L` covers `x = -L/2 .. L - L/2 - 1`, a `Torus2D`
//! does the same along each axis, and a `HalfLine` of length `L` covers
//! `x = 0, -1, ..., -(L-1)` with the reflecting edge at `x = 0` (index 0).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::linalg::{Mat2, C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    /// Periodic ring of `len` sites.
    Line { len: usize },
    /// Chain terminated by a reflecting edge at `x = 0`, extending to negative `x`.
    HalfLine { len: usize },
    /// Periodic `lx` x `ly` square lattice.
    Torus2D { lx: usize, ly: usize },
}

impl Geometry {
    /// Ring long enough that `steps` steps from the origin never wrap.
    pub fn line_for_steps(steps: usize) -> Self {
        Geometry::Line { len: 2 * steps + 1 }
    }

    pub fn sites(&self) -> usize {
        match *self {
            Geometry::Line { len } | Geometry::HalfLine { len } => len,
            Geometry::Torus2D { lx, ly } => lx * ly,
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.sites()
    }

    pub fn is_2d(&self) -> bool {
        matches!(self, Geometry::Torus2D { .. })
    }

    /// Coordinates `(x, y)` of a site index; `y = 0` in one dimension.
    pub fn coords(&self, site: usize) -> (i64, i64) {
        match *self {
            Geometry::Line { len } => (site as i64 - (len / 2) as i64, 0),
            Geometry::HalfLine { .. } => (-(site as i64), 0),
            Geometry::Torus2D { lx, ly } => {
                let ix = site / ly;
                let iy = site % ly;
                (ix as i64 - (lx / 2) as i64, iy as i64 - (ly / 2) as i64)
            }
        }
    }

    /// Site index of coordinates, if they lie inside the geometry.
    pub fn index_of(&self, x: i64, y: i64) -> Option<usize> {
        let axis = |c: i64, len: usize| -> Option<usize> {
            let i = c + (len / 2) as i64;
            (0..len as i64).contains(&i).then_some(i as usize)
        };
        match *self {
            Geometry::Line { len } => (y == 0).then(|| axis(x, len)).flatten(),
            Geometry::HalfLine { len } => {
                (y == 0 && x <= 0 && (-x) < len as i64).then_some((-x) as usize)
            }
            Geometry::Torus2D { lx, ly } => {
                let ix = axis(x, lx)?;
                let iy = axis(y, ly)?;
                Some(ix * ly + iy)
            }
        }
    }

    /// Coordinate that angle profiles are evaluated against: `x` in 1D, `y` in 2D.
    pub fn profile_coord(&self, site: usize) -> i64 {
        let (x, y) = self.coords(site);
        if self.is_2d() {
            y
        } else {
            x
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Line { len } => write!(f, "Line({len})"),
            Geometry::HalfLine { len } => write!(f, "HalfLine({len})"),
            Geometry::Torus2D { lx, ly } => write!(f, "Torus2D({lx},{ly})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spin {
    Up = 0,
    Down = 1,
}

/// Rotation angle as a function of position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngleProfile {
    Uniform { theta: f64 },
    /// `(minus + plus)/2 + (plus - minus)/2 * tanh(c / width)`.
    TanhStep { minus: f64, plus: f64, width: f64 },
    /// `minus` for `c < boundary`, `plus` for `c >= boundary`.
    Piecewise { boundary: i64, minus: f64, plus: f64 },
    /// One angle per site index.
    Table { angles: Vec<f64> },
}

impl AngleProfile {
    pub const DEFAULT_TANH_WIDTH: f64 = 3.0;

    pub fn uniform(theta: f64) -> Self {
        AngleProfile::Uniform { theta }
    }

    pub fn tanh_step(minus: f64, plus: f64) -> Self {
        AngleProfile::TanhStep { minus, plus, width: Self::DEFAULT_TANH_WIDTH }
    }

    pub fn piecewise(boundary: i64, minus: f64, plus: f64) -> Self {
        AngleProfile::Piecewise { boundary, minus, plus }
    }

    /// Angle at a profile coordinate. Tables are indexed by site instead, see [`Self::angle_at`].
    pub fn at_coord(&self, c: i64) -> f64 {
        match *self {
            AngleProfile::Uniform { theta } => theta,
            AngleProfile::TanhStep { minus, plus, width } => {
                0.5 * (minus + plus) + 0.5 * (plus - minus) * (c as f64 / width).tanh()
            }
            AngleProfile::Piecewise { boundary, minus, plus } => {
                if c < boundary {
                    minus
                } else {
                    plus
                }
            }
            AngleProfile::Table { .. } => panic!("table profiles are indexed by site"),
        }
    }

    pub fn angle_at(&self, geometry: &Geometry, site: usize) -> f64 {
        match self {
            AngleProfile::Table { angles } => angles[site],
            _ => self.at_coord(geometry.profile_coord(site)),
        }
    }

    pub fn uniform_value(&self) -> Option<f64> {
        match self {
            AngleProfile::Uniform { theta } => Some(*theta),
            _ => None,
        }
    }

    pub fn validate(&self, geometry: &Geometry) -> Result<()> {
        let finite = match self {
            AngleProfile::Uniform { theta } => theta.is_finite(),
            AngleProfile::TanhStep { minus, plus, width } => {
                minus.is_finite() && plus.is_finite() && width.is_finite() && *width != 0.0
            }
            AngleProfile::Piecewise { minus, plus, .. } => minus.is_finite() && plus.is_finite(),
            AngleProfile::Table { angles } => {
                if angles.len() != geometry.sites() {
                    return Err(WalkError::ProfileLength {
                        got: angles.len(),
                        expected: geometry.sites(),
                    });
                }
                angles.iter().all(|a| a.is_finite())
            }
        };
        if finite {
            Ok(())
        } else {
            Err(WalkError::NonFiniteAngle)
        }
    }

    /// Adds a per-site offset, producing a table.
    pub fn perturbed(&self, geometry: &Geometry, offsets: &[f64]) -> AngleProfile {
        let angles = (0..geometry.sites())
            .map(|s| self.angle_at(geometry, s) + offsets[s])
            .collect();
        AngleProfile::Table { angles }
    }
}

/// How spin components move in one translation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TranslationRule {
    /// Up moves to `x + 1`, down to `x - 1`.
    BothOpposite,
    /// Up moves to `x + 1`, down stays.
    UpOnly,
    /// Down moves to `x - 1`, up stays.
    DownOnly,
    /// Per-spin displacement on a torus.
    Axis2D { up: (i64, i64), down: (i64, i64) },
}

impl TranslationRule {
    /// Displacements `(up, down)` as `(dx, dy)` pairs.
    pub fn displacements(&self) -> ((i64, i64), (i64, i64)) {
        match *self {
            TranslationRule::BothOpposite => ((1, 0), (-1, 0)),
            TranslationRule::UpOnly => ((1, 0), (0, 0)),
            TranslationRule::DownOnly => ((0, 0), (-1, 0)),
            TranslationRule::Axis2D { up, down } => (up, down),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    /// Up at the edge flips to down with phase `e^{i phi}`. The far end of the
    /// chain flips down to up with the same phase.
    ReflectingEdge { phi: f64 },
}

pub(crate) fn check_rule(geometry: &Geometry, rule: &TranslationRule, boundary: &Boundary) -> Result<()> {
    let ok = match (geometry, rule, boundary) {
        (Geometry::Line { .. }, TranslationRule::Axis2D { .. }, _) => false,
        (Geometry::Line { .. }, _, Boundary::Periodic) => true,
        (Geometry::HalfLine { .. }, TranslationRule::BothOpposite, Boundary::ReflectingEdge { .. }) => true,
        (Geometry::Torus2D { .. }, TranslationRule::Axis2D { .. }, Boundary::Periodic) => true,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(WalkError::RuleBoundaryMismatch {
            rule: format!("{rule:?}"),
            boundary: format!("{boundary:?} on {geometry}"),
        })
    }
}

/// Complex amplitudes over (site, spin).
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorState {
    geometry: Geometry,
    amps: Vec<C64>,
}

impl SpinorState {
    /// All amplitude on one site, with the given (unnormalized) spinor.
    pub fn localized(geometry: Geometry, site: (i64, i64), spinor: [C64; 2]) -> Result<Self> {
        let index = geometry
            .index_of(site.0, site.1)
            .ok_or(WalkError::SiteOutOfRange { site })?;
        let norm = (spinor[0].norm_sqr() + spinor[1].norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(WalkError::ZeroNormSpinor);
        }
        let mut amps = vec![ZERO; geometry.dim()];
        amps[2 * index] = spinor[0] / norm;
        amps[2 * index + 1] = spinor[1] / norm;
        Ok(SpinorState { geometry, amps })
    }

    /// Basis state `j` of the `2 * sites` dimensional Hilbert space.
    pub fn basis(geometry: Geometry, j: usize) -> Self {
        let mut amps = vec![ZERO; geometry.dim()];
        amps[j] = C64::from(1.0);
        SpinorState { geometry, amps }
    }

    /// Wraps raw amplitudes without normalizing.
    pub fn from_amplitudes(geometry: Geometry, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != geometry.dim() {
            return Err(WalkError::ProfileLength { got: amps.len() / 2, expected: geometry.sites() });
        }
        Ok(SpinorState { geometry, amps })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn amplitude(&self, site: usize, spin: Spin) -> C64 {
        self.amps[2 * site + spin as usize]
    }

    pub fn spinor(&self, site: usize) -> [C64; 2] {
        [self.amps[2 * site], self.amps[2 * site + 1]]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SpinorState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Applies `R_y(theta(site))` at every site.
    pub fn apply_rotation(&mut self, profile: &AngleProfile) {
        let geometry = self.geometry;
        let mut cached: Option<(f64, Mat2)> = None;
        for site in 0..geometry.sites() {
            let theta = profile.angle_at(&geometry, site);
            let r = match cached {
                Some((t, r)) if t == theta => r,
                _ => {
                    let r = Mat2::rotation_y(theta);
                    cached = Some((theta, r));
                    r
                }
            };
            let v = r.apply(self.spinor(site));
            self.amps[2 * site] = v[0];
            self.amps[2 * site + 1] = v[1];
        }
    }

    /// Applies the same 2x2 matrix at every site.
    pub fn apply_local(&mut self, m: &Mat2) {
        for site in 0..self.geometry.sites() {
            let v = m.apply(self.spinor(site));
            self.amps[2 * site] = v[0];
            self.amps[2 * site + 1] = v[1];
        }
    }

    pub fn rotated(&self, profile: &AngleProfile) -> SpinorState {
        let mut out = self.clone();
        out.apply_rotation(profile);
        out
    }

    pub fn apply_translation(&mut self, rule: &TranslationRule, boundary: &Boundary) -> Result<()> {
        check_rule(&self.geometry, rule, boundary)?;
        let mut out = vec![ZERO; self.amps.len()];
        match (self.geometry, boundary) {
            (Geometry::HalfLine { len }, Boundary::ReflectingEdge { phi }) => {
                let phase = C64::from_polar(1.0, *phi);
                // index i sits at x = -i: up moves to i - 1, down to i + 1
                for i in 0..len {
                    let up = self.amps[2 * i];
                    let down = self.amps[2 * i + 1];
                    if i == 0 {
                        out[1] += phase * up;
                    } else {
                        out[2 * (i - 1)] += up;
                    }
                    if i + 1 == len {
                        out[2 * i] += phase * down;
                    } else {
                        out[2 * (i + 1) + 1] += down;
                    }
                }
            }
            (geometry, _) => {
                let (d_up, d_down) = rule.displacements();
                for site in 0..geometry.sites() {
                    for (spin, d) in [(0usize, d_up), (1usize, d_down)] {
                        let target = shifted_site(&geometry, site, d);
                        out[2 * target + spin] = self.amps[2 * site + spin];
                    }
                }
            }
        }
        self.amps = out;
        Ok(())
    }

    pub fn translated(&self, rule: &TranslationRule, boundary: &Boundary) -> Result<SpinorState> {
        let mut out = self.clone();
        out.apply_translation(rule, boundary)?;
        Ok(out)
    }

    /// Probability per site index.
    pub fn position_distribution(&self) -> Vec<f64> {
        self.amps.chunks_exact(2).map(|c| c[0].norm_sqr() + c[1].norm_sqr()).collect()
    }

    /// Probability within Chebyshev distance `radius` of `center`.
    pub fn probability_in_window(&self, center: (i64, i64), radius: u64) -> f64 {
        let r = radius as i64;
        self.position_distribution()
            .iter()
            .enumerate()
            .filter(|(s, _)| {
                let (x, y) = self.geometry.coords(*s);
                (x - center.0).abs() <= r && (y - center.1).abs() <= r
            })
            .map(|(_, p)| p)
            .sum()
    }

    /// `<x>` and `<y>` over the distribution.
    pub fn mean_position(&self) -> (f64, f64) {
        let mut m = (0.0, 0.0);
        for (s, p) in self.position_distribution().into_iter().enumerate() {
            let (x, y) = self.geometry.coords(s);
            m.0 += p * x as f64;
            m.1 += p * y as f64;
        }
        m
    }

    /// Inverse participation ratio reciprocal: number of sites effectively occupied.
    pub fn participation_ratio(&self) -> f64 {
        let dist = self.position_distribution();
        let total: f64 = dist.iter().sum();
        let sq: f64 = dist.iter().map(|p| p * p).sum();
        total * total / sq
    }

    /// Snapshot rows `(x, [y,] re_up, im_up, re_down, im_down)`.
    pub fn snapshot_rows(&self) -> Vec<SnapshotRow> {
        (0..self.geometry.sites())
            .map(|s| {
                let (x, y) = self.geometry.coords(s);
                let [u, d] = self.spinor(s);
                SnapshotRow {
                    site: x,
                    site_y: self.geometry.is_2d().then_some(y),
                    re_up: u.re,
                    im_up: u.im,
                    re_down: d.re,
                    im_down: d.im,
                }
            })
            .collect()
    }
}

/// One exported amplitude row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub site: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub site_y: Option<i64>,
    pub re_up: f64,
    pub im_up: f64,
    pub re_down: f64,
    pub im_down: f64,
}

fn shifted_site(geometry: &Geometry, site: usize, d: (i64, i64)) -> usize {
    match *geometry {
        Geometry::Line { len } | Geometry::HalfLine { len } => {
            (site as i64 + d.0).rem_euclid(len as i64) as usize
        }
        Geometry::Torus2D { lx, ly } => {
            let ix = (site / ly) as i64;
            let iy = (site % ly) as i64;
            let nx = (ix + d.0).rem_euclid(lx as i64) as usize;
            let ny = (iy + d.1).rem_euclid(ly as i64) as usize;
            nx * ly + ny
        }
    }
}
