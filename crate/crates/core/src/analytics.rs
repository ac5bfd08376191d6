//! Closed-form results: long-time position distributions, the reflecting-edge
//! bound state and the exactly solvable coexisting 0/pi pair.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::lattice::{AngleProfile, Geometry, SpinorState};
use crate::linalg::{wrap_phase, Mat2, C64, I, ONE, ZERO};
use crate::protocol::{momentum_step_matrix, ProtocolFamily};

/// Default number of momentum samples for the asymptotic distribution.
pub const DEFAULT_ASYMPTOTIC_K: usize = 1 << 16;

/// Long-time distribution of the rescaled position `X = x / N`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticDistribution {
    pub family: ProtocolFamily,
    pub spin: [C64; 2],
    /// Bin edges, `nbins + 1` values spanning `[-1, 1]`.
    pub edges: Vec<f64>,
    /// Bin centers.
    pub x: Vec<f64>,
    /// Bin-averaged density.
    pub density: Vec<f64>,
    /// `max_k |v_k|`.
    pub max_speed: f64,
    /// True when the band closes somewhere on the momentum grid.
    pub gapless: bool,
}

impl AsymptoticDistribution {
    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    /// Total probability (bin sum).
    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width()
    }

    /// Trapezoid integral over the bin centers.
    pub fn trapezoid_mass(&self) -> f64 {
        let h = self.bin_width();
        let n = self.density.len();
        let inner: f64 = self.density.iter().sum();
        h * (inner - 0.5 * (self.density[0] + self.density[n - 1]))
    }

    pub fn mean(&self) -> f64 {
        let h = self.bin_width();
        self.x.iter().zip(&self.density).map(|(x, p)| x * p * h).sum()
    }

    /// Cumulative distribution, linear within each bin.
    pub fn cdf(&self, x: f64) -> f64 {
        let h = self.bin_width();
        let lo = self.edges[0];
        if x <= lo {
            return 0.0;
        }
        let mut acc = 0.0;
        for (i, p) in self.density.iter().enumerate() {
            let a = lo + i as f64 * h;
            if x < a + h {
                return acc + p * (x - a);
            }
            acc += p * h;
        }
        acc
    }

    pub fn rows(&self) -> Vec<(f64, f64)> {
        self.x.iter().copied().zip(self.density.iter().copied()).collect()
    }
}

fn bloch_weight(n: [f64; 3], spin: [C64; 2]) -> f64 {
    let v = Mat2::pauli_dot(n).apply(spin);
    (spin[0].conj() * v[0] + spin[1].conj() * v[1]).re
}

/// Adds `mass` spread uniformly over `[a, b]` into the bins.
fn deposit(density: &mut [f64], lo: f64, h: f64, a: f64, b: f64, mass: f64) {
    let n = density.len();
    let bin = |x: f64| (((x - lo) / h).floor().max(0.0) as usize).min(n - 1);
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    if b - a < 1e-14 * h {
        density[bin(0.5 * (a + b))] += mass;
        return;
    }
    let (ia, ib) = (bin(a), bin(b));
    for (i, d) in density.iter_mut().enumerate().take(ib + 1).skip(ia) {
        let left = lo + i as f64 * h;
        let overlap = (b.min(left + h) - a.max(left)).max(0.0);
        *d += mass * overlap / (b - a);
    }
}

/// Eigenphases `e0 +- E` and the `+n` weight for the initial spin on a uniform grid.
fn sampled_band(family: &ProtocolFamily, spin: [C64; 2], nk: usize) -> Result<(Vec<[f64; 2]>, Vec<f64>, bool)> {
    let h = 2.0 * PI / nk as f64;
    let mut phases = Vec::with_capacity(nk);
    let mut weights = Vec::with_capacity(nk);
    let mut gapless = false;
    for m in 0..nk {
        let k = -PI + h * m as f64;
        let (e0, e, n) = momentum_step_matrix(family, (k, 0.0))?.bloch_decompose();
        if e.sin().abs() < 1e-9 {
            gapless = true;
            weights.push(0.5);
        } else {
            weights.push(0.5 * (1.0 + bloch_weight(n, spin)));
        }
        phases.push([e0 + e, e0 - e]);
    }
    Ok((phases, weights, gapless))
}

/// Displacement per step `X` of the two band components at each momentum.
///
/// A component with quasi-energy `E(k)` travels at `-dE/dk`: a spin-up amplitude
/// translated by `+1` picks up `e^{ik}`, so plane waves run as `e^{-ikx}`.
fn band_speeds(phases: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let nk = phases.len();
    let h = 2.0 * PI / nk as f64;
    (0..nk)
        .map(|m| {
            let next = phases[(m + 1) % nk];
            let prev = phases[(m + nk - 1) % nk];
            let v = |b: usize| -wrap_phase(next[b] - prev[b]) / (2.0 * h);
            [v(0), v(1)]
        })
        .collect()
}

/// Long-time distribution of `X = x / N` for a translation-invariant 1D family.
///
/// Each momentum segment carries weight `1/nk` split between the two bands by
/// `(1 +- <n.sigma>)/2` and spread over the `X` interval its speeds span.
pub fn asymptotic_distribution(
    family: &ProtocolFamily,
    spin: [C64; 2],
    nbins: usize,
    nk: usize,
) -> Result<AsymptoticDistribution> {
    if family.is_2d() || nbins == 0 || nk < 4 {
        return Err(WalkError::InvalidConfig("asymptotic distribution needs a 1D family, bins and k points".into()));
    }
    let norm = (spin[0].norm_sqr() + spin[1].norm_sqr()).sqrt();
    if norm == 0.0 {
        return Err(WalkError::ZeroNormSpinor);
    }
    let spin = [spin[0] / norm, spin[1] / norm];
    let (phases, weights, gapless) = sampled_band(family, spin, nk)?;
    let speeds = band_speeds(&phases);

    let h = 2.0 / nbins as f64;
    let mut density = vec![0.0; nbins];
    for m in 0..nk {
        let m1 = (m + 1) % nk;
        let w = 0.5 * (weights[m] + weights[m1]);
        for (b, wb) in [(0, w), (1, 1.0 - w)] {
            let (a, c) = (speeds[m][b], speeds[m1][b]);
            let mass = wb / nk as f64;
            if (a - c).abs() > 0.5 {
                // band kink at a gap closing: keep the segment's endpoints separate
                deposit(&mut density, -1.0, h, a, a, 0.5 * mass);
                deposit(&mut density, -1.0, h, c, c, 0.5 * mass);
            } else {
                deposit(&mut density, -1.0, h, a, c, mass);
            }
        }
    }
    density.iter_mut().for_each(|d| *d /= h);
    let max_speed = speeds.iter().flat_map(|v| v.iter()).fold(0.0_f64, |acc, v| acc.max(v.abs()));
    Ok(AsymptoticDistribution {
        family: family.clone(),
        spin,
        edges: (0..=nbins).map(|i| -1.0 + h * i as f64).collect(),
        x: (0..nbins).map(|i| -1.0 + h * (i as f64 + 0.5)).collect(),
        density,
        max_speed,
        gapless,
    })
}

/// `(1/pi) / ((1 + X) sqrt(1 - X^2))` on `|X| < 1/sqrt 2`, zero outside.
///
/// Finite at the support edge and not normalized (total mass `2/pi`);
/// see [`hadamard_density`] for the distribution the `theta = pi/2` walk actually reaches.
pub fn closed_form_theta_half(x: f64) -> f64 {
    if x.abs() > FRAC_1_SQRT_2 {
        return 0.0;
    }
    1.0 / (PI * (1.0 + x) * (1.0 - x * x).sqrt())
}

/// Limit density of the `theta = pi/2` walk from spin up, with up moving to `+x`:
/// `(1/pi) / ((1 - X) sqrt(1 - 2 X^2))`. Returns `+inf` at `|X| = 1/sqrt 2`.
pub fn hadamard_density(x: f64) -> f64 {
    let r = 1.0 - 2.0 * x * x;
    if r < -1e-15 {
        0.0
    } else if r <= 1e-15 {
        f64::INFINITY
    } else {
        1.0 / (PI * (1.0 - x) * r.sqrt())
    }
}

/// Histogram of `x / n_steps` on `nbins` bins over `[-1, 1]`, as a density.
pub fn empirical_density(state: &SpinorState, n_steps: usize, nbins: usize) -> Vec<f64> {
    let h = 2.0 / nbins as f64;
    let mut out = vec![0.0; nbins];
    let geometry = *state.geometry();
    for (site, p) in state.position_distribution().into_iter().enumerate() {
        let x = geometry.coords(site).0 as f64 / n_steps.max(1) as f64;
        let i = (((x + 1.0) / h).floor().max(0.0) as usize).min(nbins - 1);
        out[i] += p / h;
    }
    out
}

/// Kolmogorov-Smirnov distance between the distribution of `x / n_steps` in
/// `state` and the analytic distribution.
pub fn ks_distance(dist: &AsymptoticDistribution, state: &SpinorState, n_steps: usize) -> f64 {
    let geometry = *state.geometry();
    let mut pts: Vec<(f64, f64)> = state
        .position_distribution()
        .into_iter()
        .enumerate()
        .map(|(site, p)| (geometry.coords(site).0 as f64 / n_steps.max(1) as f64, p))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    let mut worst = 0.0_f64;
    for (x, p) in pts {
        let f = dist.cdf(x);
        worst = worst.max((acc - f).abs());
        acc += p;
        worst = worst.max((acc - f).abs());
    }
    worst
}

/// `<exp(-i s x / N)>` in the evolved state.
pub fn characteristic_empirical(state: &SpinorState, n_steps: usize, s: f64) -> C64 {
    let geometry = *state.geometry();
    state
        .position_distribution()
        .into_iter()
        .enumerate()
        .map(|(site, p)| {
            let x = geometry.coords(site).0 as f64 / n_steps.max(1) as f64;
            C64::from_polar(p, -s * x)
        })
        .sum()
}

/// Long-time limit of `<exp(-i s x / N)>` as a momentum integral.
pub fn characteristic_prediction(family: &ProtocolFamily, spin: [C64; 2], s: f64, nk: usize) -> Result<C64> {
    let norm = (spin[0].norm_sqr() + spin[1].norm_sqr()).sqrt();
    if norm == 0.0 {
        return Err(WalkError::ZeroNormSpinor);
    }
    let spin = [spin[0] / norm, spin[1] / norm];
    let (phases, weights, _) = sampled_band(family, spin, nk)?;
    let speeds = band_speeds(&phases);
    let total: C64 = speeds
        .iter()
        .zip(&weights)
        .map(|(v, w)| C64::from_polar(*w, -s * v[0]) + C64::from_polar(1.0 - w, -s * v[1]))
        .sum();
    Ok(total / nk as f64)
}

/// Bound state at a reflecting edge of the conventional walk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReflectingBoundState {
    pub theta: f64,
    pub phi: f64,
    /// Quasi-energy, `0` or `pi`.
    pub energy: f64,
    /// Spinor `(c_up, c_down)` on the edge site.
    pub edge_spinor: [C64; 2],
    /// Ratio between the amplitudes on sites `-(j+1)` and `-j`.
    pub decay_ratio: f64,
    /// Decay length in sites.
    pub decay_length: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub v_plus: [C64; 2],
    pub v_minus: [C64; 2],
}

impl ReflectingBoundState {
    /// Matrix relating neighbouring coefficients, `c_j = K c_{j+1}`.
    pub fn transfer_matrix(&self) -> Mat2 {
        transfer_matrix(self.theta, self.energy)
    }

    /// Normalized wavefunction on a `len`-site half line.
    pub fn embed(&self, len: usize) -> Result<SpinorState> {
        let geometry = Geometry::HalfLine { len };
        let mut amps = vec![ZERO; geometry.dim()];
        let mut r = 1.0;
        for j in 0..len {
            amps[2 * j] = self.edge_spinor[0] * r;
            amps[2 * j + 1] = self.edge_spinor[1] * r;
            r *= self.decay_ratio;
        }
        let mut state = SpinorState::from_amplitudes(geometry, amps)?;
        state.normalize();
        Ok(state)
    }

    /// Probability beyond the first `len` sites of the infinite half line.
    pub fn tail_mass(&self, len: usize) -> f64 {
        self.decay_ratio.abs().powi(2 * len as i32)
    }
}

/// `K = e^{iE} [[s^2/c + e^{-2iE}/c, s], [s, c]]` with `c, s = cos, sin theta/2`.
pub fn transfer_matrix(theta: f64, energy: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    let e2 = C64::from_polar(1.0, -2.0 * energy);
    Mat2::new((e2 + s * s) / c, C64::from(s), C64::from(s), C64::from(c)).scale(C64::from_polar(1.0, energy))
}

fn transfer_eigen(theta: f64, energy: f64) -> ([f64; 2], [[C64; 2]; 2]) {
    let c = (theta / 2.0).cos();
    let ce = energy.cos();
    let root = (ce * ce - c * c).max(0.0).sqrt();
    let lambdas = [(ce + root) / c, (ce - root) / c];
    let em = C64::from_polar(1.0, -energy);
    let em2 = em * em;
    let disc = (em2 + em2.conj() - 2.0 * theta.cos()).sqrt();
    let v = |sign: f64| [(em2 - theta.cos() + em * disc * sign) / theta.sin(), ONE];
    (lambdas, [v(1.0), v(-1.0)])
}

/// Solves for the bound state of the conventional walk at a reflecting edge with phase `phi`.
pub fn reflecting_bound_state(theta: f64, phi: f64) -> Result<ReflectingBoundState> {
    let phi_w = wrap_phase(phi);
    let phi_zero = phi_w.abs() < 1e-12;
    if !phi_zero && (phi_w.abs() - PI).abs() > 1e-12 {
        return Err(WalkError::InvalidConfig(format!("phi = {phi} breaks the chiral symmetry; use 0 or pi")));
    }
    if !theta.is_finite() {
        return Err(WalkError::NonFiniteAngle);
    }
    let t = theta.rem_euclid(4.0 * PI);
    let off = t.rem_euclid(2.0 * PI);
    if off.min(2.0 * PI - off) < 1e-12 {
        return Err(WalkError::NoBoundState { reason: format!("theta = {theta} is a multiple of 2 pi") });
    }
    let lower = t < 2.0 * PI;
    let energy = if lower == phi_zero { PI } else { 0.0 };
    let (s, c) = (theta / 2.0).sin_cos();
    let ce = energy.cos();
    if ce * ce - c * c < 0.0 {
        return Err(WalkError::NoBoundState { reason: "cos^2 E < cos^2 theta/2".into() });
    }

    if c.abs() < 1e-12 {
        // theta = pi mod 2 pi: the state sits on the edge site alone
        return Ok(ReflectingBoundState {
            theta,
            phi,
            energy,
            edge_spinor: [ZERO, ONE],
            decay_ratio: 0.0,
            decay_length: 0.0,
            lambda_plus: 0.0,
            lambda_minus: f64::INFINITY,
            v_plus: [ZERO, ONE],
            v_minus: [ONE, ZERO],
        });
    }
    let (lambdas, vs) = transfer_eigen(theta, energy);
    let pick = if ce <= 0.0 { 0 } else { 1 };
    let ratio = lambdas[pick];
    if ratio.abs() >= 1.0 {
        return Err(WalkError::NoBoundState { reason: format!("decay ratio {ratio} is not below one") });
    }
    let nv = (vs[pick][0].norm_sqr() + vs[pick][1].norm_sqr()).sqrt();
    let edge_spinor = [vs[pick][0] / nv, vs[pick][1] / nv];

    // the edge site itself must close the recursion
    let rotated = Mat2::rotation_y(theta).apply(edge_spinor);
    let lhs = C64::from_polar(1.0, -energy) * edge_spinor[1];
    let rhs = C64::from_polar(1.0, phi) * rotated[0];
    if (lhs - rhs).norm() > 1e-9 {
        return Err(WalkError::NoBoundState { reason: format!("edge condition violated by {:e}", (lhs - rhs).norm()) });
    }
    let decay_length = 1.0 / ((1.0 - s.abs()).ln() - c.abs().ln()).abs();
    Ok(ReflectingBoundState {
        theta,
        phi,
        energy,
        edge_spinor,
        decay_ratio: ratio,
        decay_length,
        lambda_plus: lambdas[0],
        lambda_minus: lambdas[1],
        v_plus: vs[0],
        v_minus: vs[1],
    })
}

/// Time-shifted split-step walk with `theta1 = 0` and `theta2` jumping from
/// `-pi` (x <= 0) to `pi` (x > 0).
pub fn zero_pi_family() -> ProtocolFamily {
    ProtocolFamily::TimeShiftedSplitStep1D {
        theta1: AngleProfile::uniform(0.0),
        theta2: AngleProfile::piecewise(1, -PI, PI),
    }
}

/// The two states bound at `x = 0` by [`zero_pi_family`], as `(E, state)` pairs:
/// `(up + down)/sqrt 2` at `E = 0` and `(up - down)/sqrt 2` at `E = pi`.
pub fn zero_pi_pair_analytic(geometry: Geometry) -> Result<[(f64, SpinorState); 2]> {
    if !matches!(geometry, Geometry::Line { .. }) {
        return Err(WalkError::FamilyGeometryMismatch { family: "zero-pi pair".into(), expected: "line".into() });
    }
    let plus = SpinorState::localized(geometry, (0, 0), [ONE, ONE])?;
    let minus = SpinorState::localized(geometry, (0, 0), [ONE, -ONE])?;
    Ok([(0.0, plus), (PI, minus)])
}

/// `(1, i) / sqrt 2`: spin along `+y`.
pub fn spin_plus_y() -> [C64; 2] {
    [ONE * FRAC_1_SQRT_2, I * FRAC_1_SQRT_2]
}
