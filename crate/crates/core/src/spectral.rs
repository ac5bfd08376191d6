//! Band structures of translation-invariant walks, dense diagonalization of
//! finite one-step unitaries, and strip spectra for edge modes.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::lattice::{Geometry, SpinorState};
use crate::linalg::{phase_distance, unitarity_residual, wrap_phase, Mat2, C64};
use crate::protocol::{momentum_step_matrix, restrict_to_sector, strip_step_matrix, ProtocolFamily, RowSector, Step};

/// `|sin E|` below which the Bloch vector is declared undefined.
pub const TOL_GAPLESS: f64 = 1e-9;
/// Unitarity and eigen-residual tolerance for dense diagonalization.
pub const DIAG_TOL: f64 = 1e-8;
pub const DEFAULT_K_1D: usize = 1024;
pub const DEFAULT_K_2D: usize = 256;

fn half_angles(theta: f64) -> (f64, f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    (c, s)
}

// `num` is `sin E * n`; its norm gives `sin E` without the precision loss of acos near 1.
fn finish(cos_e: f64, k: (f64, f64), num: [f64; 3]) -> Result<(f64, [f64; 3])> {
    let sin_e = (num[0] * num[0] + num[1] * num[1] + num[2] * num[2]).sqrt();
    let e = sin_e.atan2(cos_e);
    if sin_e < TOL_GAPLESS {
        return Err(WalkError::GaplessPoint { k, sin_e });
    }
    Ok((e, [num[0] / sin_e, num[1] / sin_e, num[2] / sin_e]))
}

/// `cos E = cos(theta/2) cos k` with its Bloch vector.
pub fn band_conventional(theta: f64, k: f64) -> Result<(f64, [f64; 3])> {
    band_splitstep(theta, 0.0, k)
}

pub fn band_splitstep(theta1: f64, theta2: f64, k: f64) -> Result<(f64, [f64; 3])> {
    let (c1, s1) = half_angles(theta1);
    let (c2, s2) = half_angles(theta2);
    let (sk, ck) = k.sin_cos();
    let cos_e = c2 * c1 * ck - s1 * s2;
    finish(cos_e, (k, 0.0), [c2 * s1 * sk, s2 * c1 + c2 * s1 * ck, -c2 * c1 * sk])
}

/// Quasi-energy of the six-operation walk from its three-term cosine formula.
pub fn energy_2d_sixop(theta1: f64, theta2: f64, kx: f64, ky: f64) -> f64 {
    let (c2h, s2h) = half_angles(theta2);
    let q = kx + 2.0 * ky;
    let cos_e = kx.cos() * q.cos() * theta1.cos() * c2h - kx.sin() * q.sin() * c2h
        - kx.cos().powi(2) * theta1.sin() * s2h;
    cos_e.clamp(-1.0, 1.0).acos()
}

pub fn energy_2d_simple(theta1: f64, theta2: f64, kx: f64, ky: f64) -> f64 {
    let (c1, s1) = half_angles(theta1);
    let (c2, s2) = half_angles(theta2);
    let cos_e = (kx + ky).cos() * c1 * c2 - (kx - ky).cos() * s1 * s2;
    cos_e.clamp(-1.0, 1.0).acos()
}

fn bloch_vector_of(u: &Mat2, k: (f64, f64)) -> Result<(f64, [f64; 3])> {
    let (_, e, n) = u.bloch_decompose();
    let sin_e = if n == [0.0; 3] { 0.0 } else { e.sin() };
    if sin_e < TOL_GAPLESS {
        return Err(WalkError::GaplessPoint { k, sin_e });
    }
    Ok((e, n))
}

/// `E` from the closed form, `n` from the 2x2 Bloch unitary.
pub fn band_2d_sixop(theta1: f64, theta2: f64, kx: f64, ky: f64) -> Result<(f64, [f64; 3])> {
    let u = momentum_step_matrix(&ProtocolFamily::six_op(theta1, theta2), (kx, ky))?;
    let (e, n) = bloch_vector_of(&u, (kx, ky))?;
    Ok((e.sin().atan2(energy_2d_sixop(theta1, theta2, kx, ky).cos()), n))
}

pub fn band_2d_simple(theta1: f64, theta2: f64, kx: f64, ky: f64) -> Result<(f64, [f64; 3])> {
    let u = momentum_step_matrix(&ProtocolFamily::simple_2d(theta1, theta2), (kx, ky))?;
    let (e, n) = bloch_vector_of(&u, (kx, ky))?;
    Ok((e.sin().atan2(energy_2d_simple(theta1, theta2, kx, ky).cos()), n))
}

fn uniform(p: &crate::lattice::AngleProfile) -> Result<f64> {
    p.uniform_value().ok_or(WalkError::NonUniformProfile)
}

/// Upper-band point `(E, n)`; `n` is `None` at gapless points.
pub fn band_point(family: &ProtocolFamily, k: (f64, f64)) -> Result<(f64, Option<[f64; 3]>)> {
    let res = match family {
        ProtocolFamily::Conventional1D { theta } => band_conventional(uniform(theta)?, k.0),
        ProtocolFamily::SplitStep1D { theta1, theta2 } => band_splitstep(uniform(theta1)?, uniform(theta2)?, k.0),
        ProtocolFamily::TwoDSixOp { theta1, theta2 } => {
            band_2d_sixop(uniform(theta1)?, uniform(theta2)?, k.0, k.1)
        }
        ProtocolFamily::TwoDSimple { theta1, theta2 } => {
            band_2d_simple(uniform(theta1)?, uniform(theta2)?, k.0, k.1)
        }
        _ => bloch_vector_of(&momentum_step_matrix(family, k)?, k),
    };
    match res {
        Ok((e, n)) => Ok((e, Some(n))),
        Err(WalkError::GaplessPoint { .. }) => {
            let (_, e, _) = momentum_step_matrix(family, k)?.bloch_decompose();
            Ok((e, None))
        }
        Err(err) => Err(err),
    }
}

/// Half-width of the Brillouin zone along each axis.
pub fn zone_half_width(family: &ProtocolFamily) -> f64 {
    match family {
        ProtocolFamily::TwoDSixOp { .. } => PI / 2.0,
        _ => PI,
    }
}

/// `n` points on `[-half, half)`.
pub fn k_grid(half: f64, n: usize) -> Vec<f64> {
    (0..n).map(|m| -half + 2.0 * half * m as f64 / n as f64).collect()
}

/// Sampled upper band of a translation-invariant family.
///
/// Points are stored row-major: index `ix * ky.len() + iy`. One-dimensional
/// bands have a single `ky = 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlochBand {
    pub family: ProtocolFamily,
    pub kx: Vec<f64>,
    pub ky: Vec<f64>,
    pub energy: Vec<f64>,
    pub n: Vec<Option<[f64; 3]>>,
}

impl BlochBand {
    pub fn sample(family: &ProtocolFamily, nk: usize) -> Result<Self> {
        let half = zone_half_width(family);
        let kx = k_grid(half, nk);
        let ky = if family.is_2d() { k_grid(half, nk) } else { vec![0.0] };
        Self::on_grid(family, kx, ky)
    }

    pub fn on_grid(family: &ProtocolFamily, kx: Vec<f64>, ky: Vec<f64>) -> Result<Self> {
        let pts: Vec<(f64, Option<[f64; 3]>)> = kx
            .par_iter()
            .flat_map_iter(|&x| ky.iter().map(move |&y| (x, y)))
            .map(|k| band_point(family, k))
            .collect::<Result<_>>()?;
        let (energy, n) = pts.into_iter().unzip();
        Ok(BlochBand { family: family.clone(), kx, ky, energy, n })
    }

    pub fn is_2d(&self) -> bool {
        self.ky.len() > 1
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix * self.ky.len() + iy
    }

    pub fn gapless_count(&self) -> usize {
        self.n.iter().filter(|n| n.is_none()).count()
    }

    /// Smallest distance of `+-E(k)` to zero over the grid.
    pub fn min_gap_zero(&self) -> f64 {
        self.energy.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn min_gap_pi(&self) -> f64 {
        self.energy.iter().map(|e| PI - e).fold(f64::INFINITY, f64::min)
    }

    /// Central difference `dE/dk` per axis at grid point `(ix, iy)`, periodic grid.
    pub fn group_velocity(&self, ix: usize, iy: usize) -> (f64, f64) {
        let nx = self.kx.len();
        let hx = 2.0 * zone_half_width(&self.family) / nx as f64;
        let vx = (self.energy[self.index((ix + 1) % nx, iy)] - self.energy[self.index((ix + nx - 1) % nx, iy)])
            / (2.0 * hx);
        let vy = if self.is_2d() {
            let ny = self.ky.len();
            let hy = 2.0 * zone_half_width(&self.family) / ny as f64;
            (self.energy[self.index(ix, (iy + 1) % ny)] - self.energy[self.index(ix, (iy + ny - 1) % ny)])
                / (2.0 * hy)
        } else {
            0.0
        };
        (vx, vy)
    }

    pub fn rows(&self) -> Vec<BandRow> {
        let two_d = self.is_2d();
        self.kx
            .iter()
            .enumerate()
            .flat_map(|(ix, &kx)| {
                self.ky.iter().enumerate().map(move |(iy, &ky)| (ix, iy, kx, ky))
            })
            .map(|(ix, iy, kx, ky)| {
                let idx = self.index(ix, iy);
                let n = self.n[idx].unwrap_or([f64::NAN; 3]);
                BandRow { k: kx, ky: two_d.then_some(ky), energy: self.energy[idx], nx: n[0], ny: n[1], nz: n[2] }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub k: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ky: Option<f64>,
    pub energy: f64,
    pub nx: f64,
    pub ny: f64,
    pub nz: f64,
}

/// Closed-form `dE/dk` of the conventional walk.
pub fn group_velocity_conventional(theta: f64, k: f64) -> Result<f64> {
    let c = (theta / 2.0).cos();
    let (e, _) = band_conventional(theta, k)?;
    Ok(c * k.sin() / e.sin())
}

/// Eigenvalues and eigenvectors of a unitary via complex Schur.
///
/// A unitary is normal, so its Schur form is diagonal and the Schur vectors are eigenvectors.
pub fn unitary_eigen(u: &DMatrix<C64>) -> Result<(Vec<C64>, DMatrix<C64>)> {
    let residual = unitarity_residual(u);
    if residual > DIAG_TOL {
        return Err(WalkError::NonUnitary { residual });
    }
    let schur = Schur::try_new(u.clone(), 1e-15, 10_000).ok_or(WalkError::EigenFailure)?;
    let (q, t) = schur.unpack();
    let vals: Vec<C64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    Ok((vals, q))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateInfo {
    pub eigenphase: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub mean_abs_y: f64,
    pub participation: f64,
}

/// Sorted eigenphases of a finite one-step unitary with eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct QuasiEnergySpectrum {
    pub geometry: Option<Geometry>,
    pub eigenphases: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

/// Eigenphases `E` with `U v = e^{-iE} v`, sorted ascending in `(-pi, pi]`.
pub fn diagonalize(u: &DMatrix<C64>, geometry: Option<Geometry>) -> Result<QuasiEnergySpectrum> {
    if let Some(g) = geometry {
        if g.dim() != u.nrows() {
            return Err(WalkError::InvalidConfig(format!(
                "matrix has dimension {}, geometry {} needs {}",
                u.nrows(),
                g,
                g.dim()
            )));
        }
    }
    let (vals, q) = unitary_eigen(u)?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    let phases: Vec<f64> = vals.iter().map(|v| wrap_phase(-v.arg())).collect();
    order.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]));
    let vectors = DMatrix::from_fn(q.nrows(), q.ncols(), |r, c| q[(r, order[c])]);
    let eigenphases: Vec<f64> = order.iter().map(|&i| phases[i]).collect();
    for (c, &e) in eigenphases.iter().enumerate() {
        let v = vectors.column(c);
        let r = (u * v - v * C64::from_polar(1.0, -e)).norm();
        if r > DIAG_TOL {
            return Err(WalkError::ToleranceBreach(format!("eigen-residual {r:e} at E = {e}")));
        }
    }
    Ok(QuasiEnergySpectrum { geometry, eigenphases, vectors })
}

impl QuasiEnergySpectrum {
    pub fn len(&self) -> usize {
        self.eigenphases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenphases.is_empty()
    }

    pub fn state(&self, i: usize) -> Option<SpinorState> {
        let g = self.geometry?;
        SpinorState::from_amplitudes(g, self.vectors.column(i).iter().cloned().collect()).ok()
    }

    /// Indices of eigenphases within `window` of `target` on the circle.
    pub fn indices_near(&self, target: f64, window: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| phase_distance(self.eigenphases[i], target) <= window).collect()
    }

    /// Largest mismatch between the spectrum and its image under `E -> -E`.
    pub fn pairing_defect(&self) -> f64 {
        let mut neg: Vec<f64> = self.eigenphases.iter().map(|&e| wrap_phase(-e)).collect();
        neg.sort_by(f64::total_cmp);
        let mut worst: f64 = 0.0;
        for &e in &self.eigenphases {
            let d = neg.iter().map(|&m| phase_distance(e, m)).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
        worst
    }

    pub fn info(&self) -> Vec<StateInfo> {
        (0..self.len())
            .map(|i| match self.state(i) {
                Some(s) => {
                    let (mx, my) = s.mean_position();
                    let g = *s.geometry();
                    let dist = s.position_distribution();
                    let mean_abs_y = (0..g.sites()).map(|site| dist[site] * g.coords(site).1.abs() as f64).sum();
                    StateInfo {
                        eigenphase: self.eigenphases[i],
                        mean_x: mx,
                        mean_y: my,
                        mean_abs_y,
                        participation: s.participation_ratio(),
                    }
                }
                None => StateInfo {
                    eigenphase: self.eigenphases[i],
                    mean_x: f64::NAN,
                    mean_y: f64::NAN,
                    mean_abs_y: f64::NAN,
                    participation: f64::NAN,
                },
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripOptions {
    pub ly: usize,
    pub kx: Vec<f64>,
    pub sector: RowSector,
    /// Edge tag if participation ratio is below this fraction of the row count.
    pub pr_fraction: f64,
    /// Edge tag if the mean distance to the nearest interface is below this many rows.
    pub edge_distance: f64,
    /// Interface positions in `y`; detected from the angle profiles when absent.
    pub interfaces: Option<Vec<f64>>,
}

impl StripOptions {
    pub fn new(ly: usize, kx: Vec<f64>) -> Self {
        StripOptions { ly, kx, sector: RowSector::All, pr_fraction: 0.2, edge_distance: 5.0, interfaces: None }
    }

    pub fn with_sector(mut self, sector: RowSector) -> Self {
        self.sector = sector;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripState {
    pub energy: f64,
    pub mean_y: f64,
    pub participation: f64,
    /// Mean cyclic distance to the nearest interface.
    pub distance: f64,
    /// Interface with the largest weight within `edge_distance`, if any.
    pub interface: Option<usize>,
    pub edge: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StripSpectrum {
    pub ly: usize,
    pub sector: RowSector,
    pub interfaces: Vec<f64>,
    pub kx: Vec<f64>,
    pub states: Vec<Vec<StripState>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripRow {
    pub kx: f64,
    pub eigenphase: f64,
    pub edge_tag: u8,
    pub mean_y: f64,
}

fn row_y(iy: usize, ly: usize) -> f64 {
    iy as f64 - (ly / 2) as f64
}

fn cyclic_distance(a: f64, b: f64, ly: usize) -> f64 {
    let d = (a - b).rem_euclid(ly as f64);
    d.min(ly as f64 - d)
}

/// Gaps between neighbouring rows where some rotation angle jumps by at least
/// a quarter of the largest jump. Smooth profiles should pass explicit interfaces.
pub fn detect_interfaces(family: &ProtocolFamily, ly: usize) -> Vec<f64> {
    let row_geom = Geometry::Line { len: ly };
    let profiles: Vec<_> = family
        .steps()
        .into_iter()
        .filter_map(|s| match s {
            Step::Rotate { profile } => Some(profile),
            _ => None,
        })
        .collect();
    let jumps: Vec<f64> = (0..ly)
        .map(|iy| {
            profiles
                .iter()
                .map(|p| (p.angle_at(&row_geom, (iy + 1) % ly) - p.angle_at(&row_geom, iy)).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let max = jumps.iter().cloned().fold(0.0, f64::max);
    if max < 1e-12 {
        return Vec::new();
    }
    (0..ly).filter(|&iy| jumps[iy] >= 0.25 * max).map(|iy| row_y(iy, ly) + 0.5).collect()
}

/// Eigenphases of the mixed-representation unitary for every `kx`, with edge tags.
pub fn strip_spectrum(family: &ProtocolFamily, opts: &StripOptions) -> Result<StripSpectrum> {
    let ly = opts.ly;
    if 2 * ly > crate::protocol::DEFAULT_DENSE_CAP {
        return Err(WalkError::TooLarge { dim: 2 * ly, cap: crate::protocol::DEFAULT_DENSE_CAP });
    }
    if opts.sector != RowSector::All && ly % 2 == 1 {
        return Err(WalkError::InvalidConfig("row sectors need an even strip height".into()));
    }
    let interfaces = opts.interfaces.clone().unwrap_or_else(|| detect_interfaces(family, ly));
    let states = opts
        .kx
        .par_iter()
        .map(|&kx| {
            let full = strip_step_matrix(family, ly, kx)?;
            let (u, keep) = restrict_to_sector(&full, opts.sector);
            if opts.sector != RowSector::All {
                // the sector must be invariant for the restriction to be a unitary
                let leak = unitarity_residual(&u);
                if leak > DIAG_TOL {
                    return Err(WalkError::InvalidConfig(format!(
                        "row sector {:?} is not invariant under this family (leak {leak:e})",
                        opts.sector
                    )));
                }
            }
            let spec = diagonalize(&u, None)?;
            let rows = keep.len() / 2;
            Ok((0..spec.len())
                .map(|c| {
                    let mut p = vec![0.0; ly];
                    for (r, &j) in keep.iter().enumerate() {
                        p[j / 2] += spec.vectors[(r, c)].norm_sqr();
                    }
                    strip_state(spec.eigenphases[c], &p, &interfaces, rows, opts)
                })
                .collect())
        })
        .collect::<Result<Vec<Vec<StripState>>>>()?;
    Ok(StripSpectrum { ly, sector: opts.sector, interfaces, kx: opts.kx.clone(), states })
}

fn strip_state(energy: f64, p: &[f64], interfaces: &[f64], rows: usize, opts: &StripOptions) -> StripState {
    let ly = p.len();
    let total: f64 = p.iter().sum();
    let participation = total * total / p.iter().map(|x| x * x).sum::<f64>();
    let mean_y = (0..ly).map(|iy| p[iy] * row_y(iy, ly)).sum::<f64>() / total;
    let mut distance = f64::INFINITY;
    let mut interface = None;
    if !interfaces.is_empty() {
        let mut weight = vec![0.0; interfaces.len()];
        let mut d_sum = 0.0;
        for (iy, &w) in p.iter().enumerate() {
            let y = row_y(iy, ly);
            let (best, d) = interfaces
                .iter()
                .enumerate()
                .map(|(i, &b)| (i, cyclic_distance(y, b, ly)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            d_sum += w * d;
            if d < opts.edge_distance {
                weight[best] += w;
            }
        }
        distance = d_sum / total;
        let (best, w) = weight.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        if *w > 0.0 {
            interface = Some(best);
        }
    }
    let edge = participation < opts.pr_fraction * rows as f64 || distance < opts.edge_distance;
    StripState { energy, mean_y, participation, distance, interface: if edge { interface } else { None }, edge }
}

impl StripSpectrum {
    pub fn rows(&self) -> Vec<StripRow> {
        self.kx
            .iter()
            .zip(&self.states)
            .flat_map(|(&kx, st)| {
                st.iter().map(move |s| StripRow { kx, eigenphase: s.energy, edge_tag: s.edge as u8, mean_y: s.mean_y })
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.states.iter().flatten().filter(|s| s.edge).count()
    }

    /// Edge states of `interface` within `window` of `center`, as `(kx index, E)`.
    pub fn in_gap(&self, interface: usize, center: f64, window: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (i, st) in self.states.iter().enumerate() {
            for s in st {
                if s.interface == Some(interface) && phase_distance(s.energy, center) < window {
                    out.push((i, s.energy));
                }
            }
        }
        out
    }

    /// Signed number of times edge states of `interface` pass through quasi-energy
    /// `center` as `kx` increases; `+1` for upward passage. Consecutive samples
    /// are matched when their phases differ by less than `max_jump`. With
    /// `periodic`, the last `kx` is also matched to the first.
    pub fn signed_crossings(&self, interface: usize, center: f64, max_jump: f64, periodic: bool) -> i64 {
        let n = self.kx.len();
        let pairs = if periodic { n } else { n.saturating_sub(1) };
        let mut total = 0;
        for i in 0..pairs {
            let j = (i + 1) % n;
            let next: Vec<f64> = self.states[j]
                .iter()
                .filter(|s| s.interface == Some(interface))
                .map(|s| s.energy)
                .collect();
            for a in self.states[i].iter().filter(|s| s.interface == Some(interface)) {
                let da = wrap_phase(a.energy - center);
                if da.abs() > max_jump {
                    continue;
                }
                let Some(b) = next
                    .iter()
                    .cloned()
                    .filter(|&b| phase_distance(a.energy, b) < max_jump)
                    .min_by(|x, y| phase_distance(a.energy, *x).total_cmp(&phase_distance(a.energy, *y)))
                else {
                    continue;
                };
                let db = wrap_phase(b - center);
                if da < 0.0 && db >= 0.0 {
                    total += 1;
                } else if da >= 0.0 && db < 0.0 {
                    total -= 1;
                }
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::AngleProfile;
    use crate::protocol::build_protocol;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn conventional_quarter_turn() {
        let (e, n) = band_conventional(PI / 2.0, 0.0).unwrap();
        assert!((e - PI / 4.0).abs() < 1e-15);
        assert!(n[0].abs() < 1e-15 && (n[1] - 1.0).abs() < 1e-15);
        let (e, n) = band_conventional(PI / 2.0, PI / 2.0).unwrap();
        assert!((e - PI / 2.0).abs() < 1e-15);
        assert!((n[0] - FRAC_1_SQRT_2).abs() < 1e-15 && n[1].abs() < 1e-15 && (n[2] + FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn conventional_zero_angle() {
        assert!(matches!(band_conventional(0.0, 0.0), Err(WalkError::GaplessPoint { .. })));
        assert!(matches!(band_conventional(0.0, PI), Err(WalkError::GaplessPoint { .. })));
        let (e, n) = band_conventional(0.0, 0.7).unwrap();
        assert!((e - 0.7).abs() < 1e-15);
        assert!((n[2] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn splitstep_gapless_lines() {
        // theta2 = -theta1 closes the gap at E = 0 (k = 0), theta2 = theta1 at E = pi (k = pi)
        assert!(matches!(band_splitstep(0.8, -0.8, 0.0), Err(WalkError::GaplessPoint { .. })));
        assert!(matches!(band_splitstep(0.8, 0.8, PI), Err(WalkError::GaplessPoint { .. })));
        let band = BlochBand::sample(&ProtocolFamily::split_step(0.8, 0.8), 1024).unwrap();
        assert!(band.min_gap_pi() < 1e-6);
        assert!(band.min_gap_zero() > 0.5);
    }

    #[test]
    fn closed_forms_match_bloch_matrix() {
        let cases = [
            ProtocolFamily::split_step(-PI / 2.0, 3.0 * PI / 4.0),
            ProtocolFamily::split_step(0.3, 2.1),
            ProtocolFamily::six_op(1.0, 2.5),
            ProtocolFamily::simple_2d(0.7, 1.9),
        ];
        for f in &cases {
            for &(kx, ky) in &[(0.1, 0.2), (-0.9, 0.4), (1.3, -1.4)] {
                let u = momentum_step_matrix(f, (kx, ky)).unwrap();
                let (e0, e, n) = u.bloch_decompose();
                assert!(wrap_phase(e0).abs() < 1e-12, "{f:?}");
                let (e_cf, n_cf) = band_point(f, (kx, ky)).unwrap();
                assert!((e - e_cf).abs() < 1e-12, "{f:?}");
                let n_cf = n_cf.unwrap();
                for j in 0..3 {
                    assert!((n[j] - n_cf[j]).abs() < 1e-10, "{f:?}");
                }
            }
        }
    }

    #[test]
    fn six_op_trace_identity() {
        let u = momentum_step_matrix(&ProtocolFamily::six_op(0.4, 1.7), (0.3, -0.2)).unwrap();
        assert!(u.trace().im.abs() < 1e-14);
        assert!((u.trace().re - 2.0 * energy_2d_sixop(0.4, 1.7, 0.3, -0.2).cos()).abs() < 1e-12);
    }

    #[test]
    fn simple_band_examples() {
        let (e, _) = band_2d_simple(PI / 2.0, PI / 2.0, 0.0, 0.0).unwrap();
        assert!((e - PI / 2.0).abs() < 1e-15);
        assert!((energy_2d_simple(0.3, 1.1, 0.2, 0.9) - energy_2d_simple(0.3, 1.1, 0.9, 0.2)).abs() < 1e-15);
    }

    #[test]
    fn velocity_closed_form_vs_grid() {
        let band = BlochBand::sample(&ProtocolFamily::conventional(PI / 2.0), 4096).unwrap();
        let ix = 3072; // k = pi/2
        assert!((band.kx[ix] - PI / 2.0).abs() < 1e-15);
        let (v, _) = band.group_velocity(ix, 0);
        assert!((v - group_velocity_conventional(PI / 2.0, PI / 2.0).unwrap()).abs() < 1e-6);
        let (v0, _) = band.group_velocity(2048, 0);
        assert!(v0.abs() < 1e-12);
        assert!((group_velocity_conventional(0.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((group_velocity_conventional(0.0, -0.5).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonalize_trivial_two_sites() {
        // conventional theta = 0 on a 2-site ring: up and down hop to the other site
        let p = build_protocol(&ProtocolFamily::conventional(0.0), Geometry::Line { len: 2 }).unwrap();
        let spec = diagonalize(&p.one_step_unitary().unwrap(), Some(p.geometry)).unwrap();
        let expected = [0.0, 0.0, PI, PI];
        let mut got: Vec<f64> = spec.eigenphases.iter().map(|e| e.abs()).collect();
        got.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonalize_rejects_non_unitary() {
        let m = DMatrix::from_element(2, 2, C64::from(1.0));
        assert!(matches!(diagonalize(&m, None), Err(WalkError::NonUnitary { .. })));
    }

    #[test]
    fn ring_matches_band() {
        let f = ProtocolFamily::split_step(-PI / 2.0, 3.0 * PI / 4.0);
        let l = 16;
        let p = build_protocol(&f, Geometry::Line { len: l }).unwrap();
        let spec = diagonalize(&p.one_step_unitary().unwrap(), None).unwrap();
        let mut expected: Vec<f64> = (0..l)
            .flat_map(|m| {
                let (e, _) = band_point(&f, (2.0 * PI * m as f64 / l as f64, 0.0)).unwrap();
                [e, -e]
            })
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in spec.eigenphases.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(spec.pairing_defect() < 1e-8);
    }

    #[test]
    fn uniform_strip_has_no_edges() {
        let f = ProtocolFamily::six_op(7.0 * PI / 6.0, 7.0 * PI / 6.0);
        let s = strip_spectrum(&f, &StripOptions::new(20, k_grid(PI / 2.0, 5))).unwrap();
        assert!(s.interfaces.is_empty());
        assert_eq!(s.edge_count(), 0);
    }

    #[test]
    fn piecewise_interfaces_detected() {
        let f = ProtocolFamily::TwoDSimple {
            theta1: AngleProfile::piecewise(0, PI, 0.0),
            theta2: AngleProfile::piecewise(0, 0.0, PI),
        };
        assert_eq!(detect_interfaces(&f, 10), vec![-0.5, 4.5]);
    }

    #[test]
    fn simple_walk_sector_rejected() {
        let f = ProtocolFamily::simple_2d(0.3, 0.4);
        let opts = StripOptions::new(10, vec![0.1]).with_sector(RowSector::EvenY);
        assert!(matches!(strip_spectrum(&f, &opts), Err(WalkError::InvalidConfig(_))));
    }
}
