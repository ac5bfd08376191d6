//! Chiral symmetry, winding and Chern numbers, gap maps and bound-state charges.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::lattice::AngleProfile;
use crate::linalg::{phase_distance, wrap_phase, Mat2, C64, ZERO};
use crate::protocol::ProtocolFamily;
use crate::spectral::{band_point, zone_half_width, BlochBand, QuasiEnergySpectrum};

/// Chiral axis `A` with `Gamma = exp(-i pi A.sigma / 2) = -i A.sigma`.
///
/// `Gamma` squares to `-I`; bound-state charges use `i Gamma = A.sigma`, whose
/// eigenvalues are `+-1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiralFrame {
    pub axis: [f64; 3],
}

/// `A(theta1) = (cos(theta1/2), 0, sin(theta1/2))`.
pub fn chiral_frame(theta1: f64) -> ChiralFrame {
    let (s, c) = (theta1 / 2.0).sin_cos();
    ChiralFrame { axis: [c, 0.0, s] }
}

impl ChiralFrame {
    pub fn gamma(&self) -> Mat2 {
        Mat2::pauli_dot(self.axis).scale(C64::new(0.0, -1.0))
    }

    pub fn charge_operator(&self) -> Mat2 {
        Mat2::pauli_dot(self.axis)
    }

    /// The frame of a one-dimensional family; needs a uniform first rotation.
    pub fn for_family(family: &ProtocolFamily) -> Result<Self> {
        let uniform = |p: &AngleProfile| p.uniform_value().ok_or(WalkError::NonUniformProfile);
        match family {
            ProtocolFamily::Conventional1D { theta } => Ok(chiral_frame(uniform(theta)?)),
            ProtocolFamily::SplitStep1D { theta1, .. } => Ok(chiral_frame(uniform(theta1)?)),
            ProtocolFamily::TimeShiftedSplitStep1D { theta1, .. } => {
                // conjugate of the split-step frame by R(theta1)
                let (s, c) = (uniform(theta1)? / 2.0).sin_cos();
                Ok(ChiralFrame { axis: [c, 0.0, -s] })
            }
            ProtocolFamily::Reflecting1D { theta, .. } => Ok(chiral_frame(*theta)),
            f => Err(WalkError::InvalidConfig(format!("{} has no chiral frame", f.name()))),
        }
    }

    /// The same symmetry with the axis sign fixed so that `A_z >= 0` (and `A_x > 0` when `A_z = 0`).
    pub fn canonical(&self) -> Self {
        let a = self.axis;
        let flip = a[2] < 0.0 || (a[2] == 0.0 && a[0] < 0.0);
        if flip {
            ChiralFrame { axis: [-a[0], -a[1], -a[2]] }
        } else {
            *self
        }
    }
}

/// Applies a 2x2 matrix on every site of a site-major `(site, spin)` vector or matrix.
fn lift_left(m: &Mat2, u: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(u.nrows(), u.ncols(), ZERO);
    for s in 0..u.nrows() / 2 {
        for c in 0..u.ncols() {
            let (a, b) = (u[(2 * s, c)], u[(2 * s + 1, c)]);
            out[(2 * s, c)] = m.0[0][0] * a + m.0[0][1] * b;
            out[(2 * s + 1, c)] = m.0[1][0] * a + m.0[1][1] * b;
        }
    }
    out
}

fn lift_right(u: &DMatrix<C64>, m: &Mat2) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(u.nrows(), u.ncols(), ZERO);
    for r in 0..u.nrows() {
        for s in 0..u.ncols() / 2 {
            let (a, b) = (u[(r, 2 * s)], u[(r, 2 * s + 1)]);
            out[(r, 2 * s)] = a * m.0[0][0] + b * m.0[1][0];
            out[(r, 2 * s + 1)] = a * m.0[0][1] + b * m.0[1][1];
        }
    }
    out
}

/// `max |Gamma^-1 U Gamma - U^dag|` with `Gamma` acting identically on every site.
pub fn verify_chiral_symmetry(u: &DMatrix<C64>, frame: &ChiralFrame) -> f64 {
    let g = frame.gamma();
    let conj = lift_right(&lift_left(&g.adjoint(), u), &g);
    let adj = u.adjoint();
    conj.iter().zip(adj.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

const MAX_STEP: f64 = PI / 2.0;

fn planar_angle(n: &[f64; 3], a: &[f64; 3]) -> f64 {
    // e1 = A x y_hat, e2 = y_hat
    let e1 = [-a[2], 0.0, a[0]];
    let x = n[0] * e1[0] + n[2] * e1[2];
    n[1].atan2(x)
}

/// Signed winding of `n(k)` around the plane orthogonal to the (canonical) chiral axis.
///
/// Consecutive samples further apart than a quarter turn are refined by
/// bisection before the angle increment is taken.
pub fn winding_number(band: &BlochBand, frame: &ChiralFrame) -> Result<i64> {
    if band.is_2d() {
        return Err(WalkError::InvalidConfig("winding number needs a one-dimensional band".into()));
    }
    let gapless = band.gapless_count();
    if gapless > 0 {
        return Err(WalkError::GaplessBand { count: gapless });
    }
    let a = frame.canonical().axis;
    let ns: Vec<[f64; 3]> = band.n.iter().map(|n| n.unwrap()).collect();
    let max_dot = ns.iter().map(|n| (n[0] * a[0] + n[1] * a[1] + n[2] * a[2]).abs()).fold(0.0, f64::max);
    if max_dot > 1e-6 {
        return Err(WalkError::NonPlanar { max_dot });
    }
    let nk = ns.len();
    let h = 2.0 * zone_half_width(&band.family) / nk as f64;
    let mut total = 0.0;
    for i in 0..nk {
        let j = (i + 1) % nk;
        let (pa, pb) = (planar_angle(&ns[i], &a), planar_angle(&ns[j], &a));
        let d = wrap_phase(pb - pa);
        total += if d.abs() <= MAX_STEP { d } else { refine(&band.family, &a, band.kx[i], h, pa, pb, 0)? };
    }
    let w = total / (2.0 * PI);
    if (w - w.round()).abs() > 1e-6 {
        return Err(WalkError::ToleranceBreach(format!("winding {w} is not an integer")));
    }
    Ok(w.round() as i64)
}

fn refine(family: &ProtocolFamily, a: &[f64; 3], k0: f64, h: f64, pa: f64, pb: f64, depth: u32) -> Result<f64> {
    let mid = k0 + h / 2.0;
    let n = match band_point(family, (mid, 0.0))?.1 {
        Some(n) => n,
        None => return Err(WalkError::GaplessBand { count: 1 }),
    };
    let pm = planar_angle(&n, a);
    let mut sum = 0.0;
    for (lo, hi, k) in [(pa, pm, k0), (pm, pb, mid)] {
        let d = wrap_phase(hi - lo);
        sum += if d.abs() <= MAX_STEP {
            d
        } else if depth < 30 {
            refine(family, a, k, h / 2.0, lo, hi, depth + 1)?
        } else {
            return Err(WalkError::UnresolvedWinding { angle: d.abs() });
        };
    }
    Ok(sum)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindingClass {
    Value(i64),
    OnCriticalLine,
}

/// Split-step winding from `|tan(theta2/2) / tan(theta1/2)| < 1`.
pub fn winding_closed_form(theta1: f64, theta2: f64) -> WindingClass {
    let (s1, c1) = (theta1 / 2.0).sin_cos();
    let (s2, c2) = (theta2 / 2.0).sin_cos();
    // compare |s2 c1| with |c2 s1| to stay finite at tan = 0 or infinity
    let (lhs, rhs) = ((s2 * c1).abs(), (c2 * s1).abs());
    if (lhs - rhs).abs() < 1e-12 {
        WindingClass::OnCriticalLine
    } else if lhs < rhs {
        WindingClass::Value(1)
    } else {
        WindingClass::Value(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChernValue {
    /// Value before rounding.
    pub raw: f64,
    pub value: i64,
}

impl ChernValue {
    fn from_raw(raw: f64) -> Self {
        ChernValue { raw, value: raw.round() as i64 }
    }

    pub fn deviation(&self) -> f64 {
        (self.raw - self.value as f64).abs()
    }
}

fn require_gapped_2d(band: &BlochBand) -> Result<Vec<[f64; 3]>> {
    if !band.is_2d() {
        return Err(WalkError::InvalidConfig("Chern number needs a two-dimensional band".into()));
    }
    let gapless = band.gapless_count();
    if gapless > 0 {
        return Err(WalkError::GaplessBand { count: gapless });
    }
    Ok(band.n.iter().map(|n| n.unwrap()).collect())
}

fn triangle_solid_angle(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let cross = [b[1] * c[2] - b[2] * c[1], b[2] * c[0] - b[0] * c[2], b[0] * c[1] - b[1] * c[0]];
    let triple = a[0] * cross[0] + a[1] * cross[1] + a[2] * cross[2];
    let dot = |u: &[f64; 3], v: &[f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    2.0 * triple.atan2(1.0 + dot(a, b) + dot(b, c) + dot(c, a))
}

/// Lower-band Chern number `(1/4pi) * (signed area swept by n(k))`, from
/// spherical triangles over the periodic grid.
pub fn chern_number_solid_angle(band: &BlochBand) -> Result<ChernValue> {
    let ns = require_gapped_2d(band)?;
    let (nx, ny) = (band.kx.len(), band.ky.len());
    let at = |i: usize, j: usize| &ns[(i % nx) * ny + (j % ny)];
    let mut total = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            let (p00, p10, p11, p01) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
            total += triangle_solid_angle(p00, p10, p11) + triangle_solid_angle(p00, p11, p01);
        }
    }
    Ok(ChernValue::from_raw(total / (4.0 * PI)))
}

/// Lattice field-strength Chern number of an eigenvector field on an
/// `nx * ny` periodic grid stored row-major.
///
/// The sign follows `F = -arg(U_x U_y U_x'^* U_y'^*)`, which makes the lower band of
/// `n.sigma` agree with the solid-angle form.
pub fn chern_number_berry_plaquette(nx: usize, ny: usize, field: &[Vec<C64>]) -> ChernValue {
    let at = |i: usize, j: usize| &field[(i % nx) * ny + (j % ny)];
    let link = |a: &Vec<C64>, b: &Vec<C64>| {
        let z: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
        z / z.norm()
    };
    let mut total = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            let ux = link(at(i, j), at(i + 1, j));
            let uy = link(at(i + 1, j), at(i + 1, j + 1));
            let ux2 = link(at(i, j + 1), at(i + 1, j + 1));
            let uy2 = link(at(i, j), at(i, j + 1));
            total -= (ux * uy * ux2.conj() * uy2.conj()).arg();
        }
    }
    ChernValue::from_raw(total / (2.0 * PI))
}

/// Eigenvectors of `n.sigma` with eigenvalue `sign` over the band grid; `-1` is the lower band.
pub fn band_field(band: &BlochBand, sign: f64) -> Result<Vec<Vec<C64>>> {
    let ns = require_gapped_2d(band)?;
    Ok(ns.iter().map(|n| Mat2::spinor_along(*n, sign).to_vec()).collect())
}

pub fn chern_plaquette_of_band(band: &BlochBand, sign: f64) -> Result<ChernValue> {
    let field = band_field(band, sign)?;
    Ok(chern_number_berry_plaquette(band.kx.len(), band.ky.len(), &field))
}

/// Gapless-line families of the six-operation walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaplessLine {
    /// `theta1 + theta2/2 = 2 pi n`
    SumEven,
    /// `theta1 + theta2/2 = 2 pi n + pi`
    SumOdd,
    /// `theta1 - theta2/2 = 2 pi n`
    DiffEven,
    /// `theta1 - theta2/2 = 2 pi n + pi`
    DiffOdd,
    /// `theta2 = 2 pi n`, gapless at both energies
    Theta2Even,
}

impl GaplessLine {
    pub fn closes_at_zero(&self) -> bool {
        matches!(self, GaplessLine::SumEven | GaplessLine::DiffOdd | GaplessLine::Theta2Even)
    }

    pub fn closes_at_pi(&self) -> bool {
        matches!(self, GaplessLine::SumOdd | GaplessLine::DiffEven | GaplessLine::Theta2Even)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaplessClass {
    pub lines: Vec<GaplessLine>,
}

impl GaplessClass {
    pub fn gapless_at_zero(&self) -> bool {
        self.lines.iter().any(|l| l.closes_at_zero())
    }

    pub fn gapless_at_pi(&self) -> bool {
        self.lines.iter().any(|l| l.closes_at_pi())
    }

    pub fn is_gapped(&self) -> bool {
        self.lines.is_empty()
    }
}

fn on_lattice(x: f64, offset: f64, period: f64, tol: f64) -> bool {
    let r = (x - offset).rem_euclid(period);
    r < tol || period - r < tol
}

/// Analytic classification of `(theta1, theta2)` against the six-operation gapless lines.
pub fn gapless_lines_sixop(theta1: f64, theta2: f64, tol: f64) -> GaplessClass {
    let (sum, diff) = (theta1 + theta2 / 2.0, theta1 - theta2 / 2.0);
    let two_pi = 2.0 * PI;
    let checks = [
        (GaplessLine::SumEven, sum, 0.0),
        (GaplessLine::SumOdd, sum, PI),
        (GaplessLine::DiffEven, diff, 0.0),
        (GaplessLine::DiffOdd, diff, PI),
        (GaplessLine::Theta2Even, theta2, 0.0),
    ];
    GaplessClass {
        lines: checks.iter().filter(|(_, x, off)| on_lattice(*x, *off, two_pi, tol)).map(|(l, _, _)| *l).collect(),
    }
}

/// Whether the straight segment between two parameter points crosses a six-operation gapless line.
pub fn crosses_gapless_line(a: (f64, f64), b: (f64, f64)) -> bool {
    let cell = |x: f64, period: f64| (x / period).floor() as i64;
    let f = |p: (f64, f64)| (cell(p.0 + p.1 / 2.0, PI), cell(p.0 - p.1 / 2.0, PI), cell(p.1, 2.0 * PI));
    f(a) != f(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub gap: f64,
    pub k: (f64, f64),
}

fn gap_to(e: f64, target: f64) -> f64 {
    phase_distance(e, target).min(phase_distance(-e, target))
}

/// Minimum over the Brillouin zone of the distance of `+-E(k)` to `target`,
/// with one refinement pass around the grid minimizer.
pub fn min_gap(family: &ProtocolFamily, target: f64, nk: usize) -> Result<GapEstimate> {
    let band = BlochBand::sample(family, nk)?;
    let (mut best, mut at) = (f64::INFINITY, 0);
    for (i, &e) in band.energy.iter().enumerate() {
        let g = gap_to(e, target);
        if g < best {
            best = g;
            at = i;
        }
    }
    let ny = band.ky.len();
    let k0 = (band.kx[at / ny], band.ky[at % ny]);
    let h = 2.0 * zone_half_width(family) / nk as f64;
    let mut out = GapEstimate { gap: best, k: k0 };
    let steps = 20;
    let range_y = if family.is_2d() { steps } else { 0 };
    for a in -steps..=steps {
        for b in -range_y..=range_y {
            let k = (k0.0 + h * a as f64 / steps as f64, k0.1 + h * b as f64 / steps as f64);
            let g = gap_to(band_point(family, k)?.0, target);
            if g < out.gap {
                out = GapEstimate { gap: g, k };
            }
        }
    }
    Ok(out)
}

/// A point of a phase diagram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagramCell {
    pub theta1: f64,
    pub theta2: f64,
    /// `None` when the band is gapless on the grid.
    pub invariant: Option<i64>,
    pub min_gap_0: f64,
    pub min_gap_pi: f64,
}

/// Below this gap a cell is reported as critical.
pub const CRITICAL_GAP: f64 = 1e-6;

pub fn phase_cell_1d(theta1: f64, theta2: f64, nk: usize) -> Result<PhaseDiagramCell> {
    let family = ProtocolFamily::split_step(theta1, theta2);
    let band = BlochBand::sample(&family, nk)?;
    let (g0, gpi) = (min_gap(&family, 0.0, nk)?.gap, min_gap(&family, PI, nk)?.gap);
    let invariant = if g0 < CRITICAL_GAP || gpi < CRITICAL_GAP {
        None
    } else {
        match winding_number(&band, &ChiralFrame::for_family(&family)?) {
            Ok(w) => Some(w),
            Err(WalkError::GaplessBand { .. }) => None,
            Err(e) => return Err(e),
        }
    };
    Ok(PhaseDiagramCell { theta1, theta2, invariant, min_gap_0: g0, min_gap_pi: gpi })
}

/// Chern number (plaquette form, lower band) and gaps of a two-dimensional family.
pub fn phase_cell_2d(family: &ProtocolFamily, theta1: f64, theta2: f64, nk: usize) -> Result<PhaseDiagramCell> {
    let band = BlochBand::sample(family, nk)?;
    let g0 = min_gap(family, 0.0, nk)?.gap;
    let gpi = min_gap(family, PI, nk)?.gap;
    let invariant = if g0 < CRITICAL_GAP || gpi < CRITICAL_GAP {
        None
    } else {
        match chern_plaquette_of_band(&band, -1.0) {
            Ok(c) => Some(c.value),
            Err(WalkError::GaplessBand { .. }) => None,
            Err(e) => return Err(e),
        }
    };
    Ok(PhaseDiagramCell { theta1, theta2, invariant, min_gap_0: g0, min_gap_pi: gpi })
}

/// Chiral charges of the states pinned at quasi-energies 0 and pi.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundStateCharges {
    pub q0: i64,
    pub qpi: i64,
    /// Per-state eigenvalues of `i Gamma` in the `E = 0` subspace.
    pub zero: Vec<i64>,
    pub pi: Vec<i64>,
}

/// Leak tolerance for the charge operator restricted to an eigenspace.
pub const CHARGE_LEAK_TOL: f64 = 1e-6;

/// Diagonalizes `i Gamma` in the `E = 0` and `E = pi` eigenspaces (phases within `window`).
///
/// With `region = Some((lo, hi))` only states supported on sites with
/// `lo <= x <= hi` are counted; on a ring each domain wall has a partner
/// wall, and this isolates the charges of one of them.
pub fn bound_state_charges(
    spectrum: &QuasiEnergySpectrum,
    frame: &ChiralFrame,
    window: f64,
    region: Option<(i64, i64)>,
) -> Result<BoundStateCharges> {
    let geometry = spectrum.geometry.ok_or_else(|| WalkError::InvalidConfig("spectrum has no geometry".into()))?;
    let q = frame.charge_operator();
    let mut out = BoundStateCharges::default();
    for target in [0.0, PI] {
        let idx = spectrum.indices_near(target, window);
        if idx.is_empty() {
            continue;
        }
        let v = DMatrix::from_fn(spectrum.vectors.nrows(), idx.len(), |r, c| spectrum.vectors[(r, idx[c])]);
        let qv = lift_left(&q, &v);
        let m = v.adjoint() * &qv;
        let leak = (&qv - &v * &m).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if leak > CHARGE_LEAK_TOL {
            return Err(WalkError::SubspaceNotInvariant { energy: target, leak });
        }
        let m = (&m + m.adjoint()) * C64::from(0.5);
        let eig = SymmetricEigen::new(m);
        let mut charges = Vec::new();
        for sign in [1.0, -1.0] {
            let cols: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| (eig.eigenvalues[i] - sign).abs() < 1e-6).collect();
            if cols.is_empty() {
                continue;
            }
            let b = &v * DMatrix::from_fn(idx.len(), cols.len(), |r, c| eig.eigenvectors[(r, cols[c])]);
            let count = match region {
                None => cols.len(),
                Some((lo, hi)) => {
                    let mut pb = b.clone();
                    for site in 0..geometry.sites() {
                        let x = geometry.coords(site).0;
                        if x < lo || x > hi {
                            for c in 0..pb.ncols() {
                                pb[(2 * site, c)] = ZERO;
                                pb[(2 * site + 1, c)] = ZERO;
                            }
                        }
                    }
                    let overlap = b.adjoint() * pb;
                    let overlap = (&overlap + overlap.adjoint()) * C64::from(0.5);
                    SymmetricEigen::new(overlap).eigenvalues.iter().filter(|&&w| w > 0.5).count()
                }
            };
            charges.extend(std::iter::repeat(sign as i64).take(count));
        }
        let unmatched = eig.eigenvalues.iter().filter(|w| (w.abs() - 1.0).abs() >= 1e-6).count();
        if unmatched > 0 {
            return Err(WalkError::SubspaceNotInvariant { energy: target, leak: unmatched as f64 });
        }
        let total: i64 = charges.iter().sum();
        if target == 0.0 {
            out.q0 = total;
            out.zero = charges;
        } else {
            out.qpi = total;
            out.pi = charges;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Geometry;
    use crate::protocol::build_protocol;
    use crate::spectral::diagonalize;

    #[test]
    fn frame_examples() {
        assert_eq!(chiral_frame(0.0).axis, [1.0, 0.0, 0.0]);
        let a = chiral_frame(PI).axis;
        assert!(a[0].abs() < 1e-16 && (a[2] - 1.0).abs() < 1e-16);
        let g = chiral_frame(0.7).gamma();
        assert!((g * g).max_abs_diff(&Mat2::IDENTITY.scale(C64::from(-1.0))) < 1e-15);
        let q = chiral_frame(0.7).charge_operator();
        assert!((q * q).max_abs_diff(&Mat2::IDENTITY) < 1e-15);
    }

    #[test]
    fn conventional_winds_once() {
        let f = ProtocolFamily::conventional(PI / 2.0);
        let band = BlochBand::sample(&f, 1024).unwrap();
        assert_eq!(winding_number(&band, &ChiralFrame::for_family(&f).unwrap()).unwrap(), 1);
    }

    #[test]
    fn split_step_windings() {
        for (t2, w) in [(3.0 * PI / 4.0, 0), (PI / 4.0, 1)] {
            let f = ProtocolFamily::split_step(-PI / 2.0, t2);
            let band = BlochBand::sample(&f, 1024).unwrap();
            assert_eq!(winding_number(&band, &ChiralFrame::for_family(&f).unwrap()).unwrap(), w);
            assert_eq!(winding_closed_form(-PI / 2.0, t2), WindingClass::Value(w));
        }
        assert_eq!(winding_closed_form(0.6, 0.6), WindingClass::OnCriticalLine);
        assert_eq!(winding_closed_form(0.6, -0.6), WindingClass::OnCriticalLine);
    }

    #[test]
    fn winding_rejects_bad_frame_and_gapless() {
        let f = ProtocolFamily::split_step(0.5, 1.0);
        let band = BlochBand::sample(&f, 256).unwrap();
        assert!(matches!(winding_number(&band, &chiral_frame(1.3)), Err(WalkError::NonPlanar { .. })));
        let g = ProtocolFamily::split_step(0.5, -0.5);
        let band = BlochBand::sample(&g, 256).unwrap();
        assert!(matches!(
            winding_number(&band, &ChiralFrame::for_family(&g).unwrap()),
            Err(WalkError::GaplessBand { .. })
        ));
    }

    #[test]
    fn chiral_residual_split_step_inhomogeneous() {
        let f = ProtocolFamily::SplitStep1D {
            theta1: AngleProfile::uniform(-PI / 2.0),
            theta2: AngleProfile::tanh_step(3.0 * PI / 4.0, PI / 4.0),
        };
        let p = build_protocol(&f, Geometry::Line { len: 30 }).unwrap();
        let u = p.one_step_unitary().unwrap();
        assert!(verify_chiral_symmetry(&u, &chiral_frame(-PI / 2.0)) < 1e-12);
        // the minus-sign axis is not a symmetry of this ordering
        let wrong = ChiralFrame { axis: [(PI / 4.0).cos(), 0.0, (PI / 4.0).sin()] };
        assert!(verify_chiral_symmetry(&u, &wrong) > 0.1);
    }

    #[test]
    fn chiral_residual_time_shifted() {
        let f = ProtocolFamily::TimeShiftedSplitStep1D {
            theta1: AngleProfile::uniform(0.9),
            theta2: AngleProfile::tanh_step(-2.0, 1.0),
        };
        let p = build_protocol(&f, Geometry::Line { len: 24 }).unwrap();
        let u = p.one_step_unitary().unwrap();
        assert!(verify_chiral_symmetry(&u, &ChiralFrame::for_family(&f).unwrap()) < 1e-12);
    }

    #[test]
    fn reflecting_symmetry_depends_on_phase() {
        for (phi, ok) in [(0.0, true), (PI, true), (PI / 3.0, false)] {
            let f = ProtocolFamily::Reflecting1D { theta: 1.2, phi };
            let p = build_protocol(&f, Geometry::HalfLine { len: 20 }).unwrap();
            let r = verify_chiral_symmetry(&p.one_step_unitary().unwrap(), &chiral_frame(1.2));
            assert_eq!(r < 1e-12, ok, "phi = {phi}, residual {r}");
        }
    }

    #[test]
    fn solid_angle_and_plaquette_agree() {
        for (t1, t2) in [(7.0 * PI / 6.0, 7.0 * PI / 6.0), (3.0 * PI / 2.0, 3.0 * PI / 2.0), (0.3, 0.5)] {
            let band = BlochBand::sample(&ProtocolFamily::six_op(t1, t2), 64).unwrap();
            let sa = chern_number_solid_angle(&band).unwrap();
            let lower = chern_plaquette_of_band(&band, -1.0).unwrap();
            let upper = chern_plaquette_of_band(&band, 1.0).unwrap();
            assert_eq!(sa.value, lower.value, "({t1}, {t2})");
            assert_eq!(upper.value, -lower.value);
            assert!(lower.deviation() < 1e-9);
        }
    }

    #[test]
    fn constant_field_has_zero_chern() {
        let field = vec![vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]; 16];
        assert_eq!(chern_number_berry_plaquette(4, 4, &field).value, 0);
    }

    #[test]
    fn gapless_line_examples() {
        let c = gapless_lines_sixop(2.0 * PI - 0.5, 1.0, 1e-9);
        assert!(c.gapless_at_zero() && !c.gapless_at_pi());
        let c = gapless_lines_sixop(0.3, 2.0 * PI, 1e-9);
        assert!(c.gapless_at_zero() && c.gapless_at_pi());
        assert!(gapless_lines_sixop(0.7, PI, 1e-9).is_gapped());
        assert!(gapless_lines_sixop(7.0 * PI / 6.0, 7.0 * PI / 6.0, 1e-9).is_gapped());
        assert!(crosses_gapless_line((0.1, 0.1), (3.5, 0.1)));
        assert!(!crosses_gapless_line((0.1, 0.1), (0.2, 0.2)));
    }

    #[test]
    fn gapless_lines_match_min_gap() {
        // theta1 + theta2/2 = 2 pi and theta1 - theta2/2 = 0 lines
        let on0 = ProtocolFamily::six_op(2.0 * PI - 0.6, 1.2);
        assert!(min_gap(&on0, 0.0, 128).unwrap().gap < 1e-6);
        let onpi = ProtocolFamily::six_op(0.6, 1.2);
        assert!(min_gap(&onpi, PI, 128).unwrap().gap < 1e-6);
        let gapped = ProtocolFamily::six_op(0.7, PI);
        assert!(min_gap(&gapped, 0.0, 128).unwrap().gap > 0.1);
        assert!(min_gap(&gapped, PI, 128).unwrap().gap > 0.1);
    }

    #[test]
    fn min_gap_conventional() {
        let g = min_gap(&ProtocolFamily::conventional(PI / 2.0), 0.0, 1024).unwrap();
        assert!((g.gap - PI / 4.0).abs() < 1e-12);
        assert!(g.k.0.abs() < 1e-12);
    }

    #[test]
    fn charges_of_coexisting_pair() {
        let f = ProtocolFamily::TimeShiftedSplitStep1D {
            theta1: AngleProfile::uniform(0.0),
            theta2: AngleProfile::piecewise(1, -PI, PI),
        };
        let g = Geometry::Line { len: 40 };
        let p = build_protocol(&f, g).unwrap();
        let spec = diagonalize(&p.one_step_unitary().unwrap(), Some(g)).unwrap();
        let frame = ChiralFrame::for_family(&f).unwrap();
        let local = bound_state_charges(&spec, &frame, 1e-6, Some((-10, 10))).unwrap();
        assert_eq!((local.q0, local.qpi), (1, -1));
        assert_eq!((local.zero.len(), local.pi.len()), (1, 1));
        // the partner wall at the wrap point carries the opposite charges
        let all = bound_state_charges(&spec, &frame, 1e-6, None).unwrap();
        assert_eq!((all.q0, all.qpi), (0, 0));
        assert_eq!((all.zero.len(), all.pi.len()), (2, 2));
    }

    #[test]
    fn empty_subspaces_give_zero_charges() {
        let f = ProtocolFamily::conventional(PI / 2.0);
        let g = Geometry::Line { len: 8 };
        let p = build_protocol(&f, g).unwrap();
        let spec = diagonalize(&p.one_step_unitary().unwrap(), Some(g)).unwrap();
        let c = bound_state_charges(&spec, &chiral_frame(PI / 2.0), 1e-6, None).unwrap();
        assert_eq!(c, BoundStateCharges::default());
    }
}
