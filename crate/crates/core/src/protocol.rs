//! Walk protocols built from rotations and spin-dependent translations.
//!
//! Steps are stored in application order: the first entry acts first. A
//! product written `U = T_down R(theta2) T_up R(theta1)` is therefore stored
//! as `[R(theta1), T_up, R(theta2), T_down]`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::lattice::{check_rule, AngleProfile, Boundary, Geometry, SpinorState, TranslationRule};
use crate::linalg::{Mat2, C64, ZERO};

/// Default cap on the dimension of dense one-step unitaries.
pub const DEFAULT_DENSE_CAP: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Step {
    Rotate { profile: AngleProfile },
    Translate { rule: TranslationRule, boundary: Boundary },
    /// Site-uniform `exp(-i angle sigma_z / 2)`; breaks the chiral symmetry of the y-rotation walks.
    RotateZ { angle: f64 },
}

impl Step {
    fn rotate(profile: AngleProfile) -> Self {
        Step::Rotate { profile }
    }

    fn translate(rule: TranslationRule) -> Self {
        Step::Translate { rule, boundary: Boundary::Periodic }
    }

    fn axis(up: (i64, i64), down: (i64, i64)) -> Self {
        Step::translate(TranslationRule::Axis2D { up, down })
    }
}

/// The walk families studied here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProtocolFamily {
    /// `U = T R(theta)`.
    #[serde(rename = "conventional_1d")]
    Conventional1D { theta: AngleProfile },
    /// `U = T_down R(theta2) T_up R(theta1)`.
    #[serde(rename = "split_step_1d")]
    SplitStep1D { theta1: AngleProfile, theta2: AngleProfile },
    /// `U = R(theta1) T_down R(theta2) T_up`: the split-step walk started after
    /// its first rotation. With `theta1 = 0` this is the conventional walk shifted in time.
    #[serde(rename = "time_shifted_split_step_1d")]
    TimeShiftedSplitStep1D { theta1: AngleProfile, theta2: AngleProfile },
    /// Conventional walk on a half line with a reflecting edge at `x = 0`.
    #[serde(rename = "reflecting_1d")]
    Reflecting1D { theta: f64, phi: f64 },
    /// Three rotations and three translations on the square lattice.
    #[serde(rename = "two_d_six_op")]
    TwoDSixOp { theta1: AngleProfile, theta2: AngleProfile },
    /// Two rotations and two translations on the square lattice.
    #[serde(rename = "two_d_simple")]
    TwoDSimple { theta1: AngleProfile, theta2: AngleProfile },
}

impl ProtocolFamily {
    pub fn conventional(theta: f64) -> Self {
        ProtocolFamily::Conventional1D { theta: AngleProfile::uniform(theta) }
    }

    pub fn split_step(theta1: f64, theta2: f64) -> Self {
        ProtocolFamily::SplitStep1D {
            theta1: AngleProfile::uniform(theta1),
            theta2: AngleProfile::uniform(theta2),
        }
    }

    pub fn six_op(theta1: f64, theta2: f64) -> Self {
        ProtocolFamily::TwoDSixOp {
            theta1: AngleProfile::uniform(theta1),
            theta2: AngleProfile::uniform(theta2),
        }
    }

    pub fn simple_2d(theta1: f64, theta2: f64) -> Self {
        ProtocolFamily::TwoDSimple {
            theta1: AngleProfile::uniform(theta1),
            theta2: AngleProfile::uniform(theta2),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolFamily::Conventional1D { .. } => "conventional_1d",
            ProtocolFamily::SplitStep1D { .. } => "split_step_1d",
            ProtocolFamily::TimeShiftedSplitStep1D { .. } => "time_shifted_split_step_1d",
            ProtocolFamily::Reflecting1D { .. } => "reflecting_1d",
            ProtocolFamily::TwoDSixOp { .. } => "two_d_six_op",
            ProtocolFamily::TwoDSimple { .. } => "two_d_simple",
        }
    }

    pub fn is_2d(&self) -> bool {
        matches!(self, ProtocolFamily::TwoDSixOp { .. } | ProtocolFamily::TwoDSimple { .. })
    }

    /// Geometry-independent step list in application order.
    pub fn steps(&self) -> Vec<Step> {
        use TranslationRule::*;
        match self {
            ProtocolFamily::Conventional1D { theta } => {
                vec![Step::rotate(theta.clone()), Step::translate(BothOpposite)]
            }
            ProtocolFamily::SplitStep1D { theta1, theta2 } => vec![
                Step::rotate(theta1.clone()),
                Step::translate(UpOnly),
                Step::rotate(theta2.clone()),
                Step::translate(DownOnly),
            ],
            ProtocolFamily::TimeShiftedSplitStep1D { theta1, theta2 } => vec![
                Step::translate(UpOnly),
                Step::rotate(theta2.clone()),
                Step::translate(DownOnly),
                Step::rotate(theta1.clone()),
            ],
            ProtocolFamily::Reflecting1D { theta, phi } => vec![
                Step::rotate(AngleProfile::uniform(*theta)),
                Step::Translate { rule: BothOpposite, boundary: Boundary::ReflectingEdge { phi: *phi } },
            ],
            ProtocolFamily::TwoDSixOp { theta1, theta2 } => vec![
                Step::rotate(theta1.clone()),
                Step::axis((1, 1), (-1, -1)),
                Step::rotate(theta2.clone()),
                Step::axis((0, 1), (0, -1)),
                Step::rotate(theta1.clone()),
                Step::axis((1, 0), (-1, 0)),
            ],
            ProtocolFamily::TwoDSimple { theta1, theta2 } => vec![
                Step::rotate(theta1.clone()),
                Step::axis((1, 0), (-1, 0)),
                Step::rotate(theta2.clone()),
                Step::axis((0, 1), (0, -1)),
            ],
        }
    }

    fn expected_geometry(&self, geometry: &Geometry) -> Result<()> {
        let (ok, expected) = match self {
            ProtocolFamily::Reflecting1D { .. } => {
                (matches!(geometry, Geometry::HalfLine { .. }), "HalfLine")
            }
            f if f.is_2d() => (matches!(geometry, Geometry::Torus2D { .. }), "Torus2D"),
            _ => (matches!(geometry, Geometry::Line { .. }), "Line"),
        };
        if ok {
            Ok(())
        } else {
            Err(WalkError::FamilyGeometryMismatch {
                family: self.name().to_string(),
                expected: expected.to_string(),
            })
        }
    }
}

/// An ordered list of steps on a fixed geometry; one application is one period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkProtocol {
    pub label: String,
    pub geometry: Geometry,
    pub steps: Vec<Step>,
}

pub fn build_protocol(family: &ProtocolFamily, geometry: Geometry) -> Result<WalkProtocol> {
    family.expected_geometry(&geometry)?;
    WalkProtocol::new(family.name(), geometry, family.steps())
}

impl WalkProtocol {
    pub fn new(label: impl Into<String>, geometry: Geometry, steps: Vec<Step>) -> Result<Self> {
        for step in &steps {
            match step {
                Step::Rotate { profile } => profile.validate(&geometry)?,
                Step::Translate { rule, boundary } => check_rule(&geometry, rule, boundary)?,
                Step::RotateZ { angle } => {
                    if !angle.is_finite() {
                        return Err(WalkError::NonFiniteAngle);
                    }
                }
            }
        }
        Ok(WalkProtocol { label: label.into(), geometry, steps })
    }

    /// Appends a step, returning the extended protocol.
    pub fn with_step(mut self, step: Step) -> Result<Self> {
        self.steps.push(step);
        WalkProtocol::new(self.label, self.geometry, self.steps)
    }

    /// One period in place. The state's geometry must match.
    pub fn apply_once(&self, state: &mut SpinorState) -> Result<()> {
        self.check_geometry(state)?;
        for step in &self.steps {
            match step {
                Step::Rotate { profile } => state.apply_rotation(profile),
                Step::Translate { rule, boundary } => state.apply_translation(rule, boundary)?,
                Step::RotateZ { angle } => state.apply_local(&Mat2::rotation_z(*angle)),
            }
        }
        Ok(())
    }

    fn check_geometry(&self, state: &SpinorState) -> Result<()> {
        if *state.geometry() != self.geometry {
            return Err(WalkError::GeometryMismatch {
                state: state.geometry().to_string(),
                protocol: self.geometry.to_string(),
            });
        }
        Ok(())
    }

    pub fn evolve(&self, state: &SpinorState, n_steps: usize) -> Result<SpinorState> {
        self.check_geometry(state)?;
        let mut out = state.clone();
        for _ in 0..n_steps {
            self.apply_once(&mut out)?;
        }
        Ok(out)
    }

    /// Evolves and calls `observe(step, state)` after every step, including step 0.
    pub fn evolve_with<F: FnMut(usize, &SpinorState)>(
        &self,
        state: &SpinorState,
        n_steps: usize,
        mut observe: F,
    ) -> Result<SpinorState> {
        self.check_geometry(state)?;
        let mut out = state.clone();
        observe(0, &out);
        for t in 1..=n_steps {
            self.apply_once(&mut out)?;
            observe(t, &out);
        }
        Ok(out)
    }

    pub fn one_step_unitary(&self) -> Result<DMatrix<C64>> {
        self.one_step_unitary_capped(DEFAULT_DENSE_CAP)
    }

    /// Column `j` is the protocol applied to basis state `j`.
    pub fn one_step_unitary_capped(&self, cap: usize) -> Result<DMatrix<C64>> {
        let dim = self.geometry.dim();
        if dim > cap {
            return Err(WalkError::TooLarge { dim, cap });
        }
        let mut u = DMatrix::from_element(dim, dim, ZERO);
        for j in 0..dim {
            let mut e = SpinorState::basis(self.geometry, j);
            self.apply_once(&mut e)?;
            u.set_column(j, &nalgebra::DVector::from_column_slice(e.amplitudes()));
        }
        Ok(u)
    }
}

/// Translation in momentum space: up and down pick up `e^{i k.d}` for their displacements.
fn translation_phase(rule: &TranslationRule, k: (f64, f64)) -> Mat2 {
    let (du, dd) = rule.displacements();
    let phase = |d: (i64, i64)| C64::from_polar(1.0, k.0 * d.0 as f64 + k.1 * d.1 as f64);
    Mat2::diag(phase(du), phase(dd))
}

/// The 2x2 Bloch unitary `U(k)` of a translation-invariant family.
///
/// One-dimensional families read `k.0` and ignore `k.1`. Eigenphases are `-+E(k)`.
pub fn momentum_step_matrix(family: &ProtocolFamily, k: (f64, f64)) -> Result<Mat2> {
    if matches!(family, ProtocolFamily::Reflecting1D { .. }) {
        return Err(WalkError::NonUniformProfile);
    }
    let mut u = Mat2::IDENTITY;
    for step in family.steps() {
        let m = match &step {
            Step::Rotate { profile } => {
                Mat2::rotation_y(profile.uniform_value().ok_or(WalkError::NonUniformProfile)?)
            }
            Step::Translate { rule, .. } => translation_phase(rule, k),
            Step::RotateZ { angle } => Mat2::rotation_z(*angle),
        };
        u = m * u;
    }
    Ok(u)
}

/// Which rows of a strip to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSector {
    All,
    /// Rows with even (resp. odd) `y` index; valid when every step moves `y` by an even amount in total.
    EvenY,
    OddY,
}

/// Mixed-representation one-step matrix of a 2D family on a strip: plane wave
/// `e^{i kx x}` along x, `ly` periodic rows along y.
///
/// Basis ordering is `2 * iy + spin` with `y = iy - ly/2`. Angle profiles are
/// evaluated at `y`; a `Table` profile must have `ly` entries.
pub fn strip_step_matrix(family: &ProtocolFamily, ly: usize, kx: f64) -> Result<DMatrix<C64>> {
    if !family.is_2d() {
        return Err(WalkError::FamilyGeometryMismatch {
            family: family.name().to_string(),
            expected: "Torus2D".to_string(),
        });
    }
    let dim = 2 * ly;
    let row_geom = Geometry::Line { len: ly };
    let mut u = DMatrix::<C64>::identity(dim, dim);
    for step in family.steps() {
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        match &step {
            Step::Rotate { profile } => {
                if let AngleProfile::Table { angles } = profile {
                    if angles.len() != ly {
                        return Err(WalkError::ProfileLength { got: angles.len(), expected: ly });
                    }
                }
                profile.validate(&row_geom)?;
                for iy in 0..ly {
                    let r = Mat2::rotation_y(profile.angle_at(&row_geom, iy));
                    for a in 0..2 {
                        for b in 0..2 {
                            m[(2 * iy + a, 2 * iy + b)] = r.0[a][b];
                        }
                    }
                }
            }
            Step::Translate { rule, .. } => {
                let (du, dd) = rule.displacements();
                for iy in 0..ly {
                    for (spin, d) in [(0usize, du), (1usize, dd)] {
                        let target = (iy as i64 + d.1).rem_euclid(ly as i64) as usize;
                        m[(2 * target + spin, 2 * iy + spin)] = C64::from_polar(1.0, kx * d.0 as f64);
                    }
                }
            }
            Step::RotateZ { angle } => {
                let r = Mat2::rotation_z(*angle);
                for iy in 0..ly {
                    m[(2 * iy, 2 * iy)] = r.0[0][0];
                    m[(2 * iy + 1, 2 * iy + 1)] = r.0[1][1];
                }
            }
        }
        u = m * u;
    }
    Ok(u)
}

/// Restricts a strip matrix to a row sector. Returns the kept basis indices too.
pub fn restrict_to_sector(u: &DMatrix<C64>, sector: RowSector) -> (DMatrix<C64>, Vec<usize>) {
    let keep: Vec<usize> = (0..u.nrows())
        .filter(|&j| match sector {
            RowSector::All => true,
            RowSector::EvenY => (j / 2) % 2 == 0,
            RowSector::OddY => (j / 2) % 2 == 1,
        })
        .collect();
    let n = keep.len();
    let m = DMatrix::from_fn(n, n, |r, c| u[(keep[r], keep[c])]);
    (m, keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Spin;
    use crate::linalg::{unitarity_residual, ONE};
    use std::f64::consts::PI;

    #[test]
    fn conventional_steps() {
        let p = build_protocol(&ProtocolFamily::conventional(PI / 2.0), Geometry::Line { len: 5 }).unwrap();
        assert_eq!(
            p.steps,
            vec![
                Step::Rotate { profile: AngleProfile::uniform(PI / 2.0) },
                Step::Translate { rule: TranslationRule::BothOpposite, boundary: Boundary::Periodic },
            ]
        );
    }

    #[test]
    fn split_step_steps() {
        let p = build_protocol(&ProtocolFamily::split_step(0.3, 0.7), Geometry::Line { len: 5 }).unwrap();
        let kinds: Vec<_> = p
            .steps
            .iter()
            .map(|s| match s {
                Step::Rotate { profile } => format!("R{}", profile.uniform_value().unwrap()),
                Step::Translate { rule, .. } => format!("{rule:?}"),
                Step::RotateZ { .. } => "Z".into(),
            })
            .collect();
        assert_eq!(kinds, vec!["R0.3", "UpOnly", "R0.7", "DownOnly"]);
    }

    #[test]
    fn six_op_steps() {
        let p = build_protocol(&ProtocolFamily::six_op(1.0, 2.0), Geometry::Torus2D { lx: 4, ly: 4 }).unwrap();
        let expected_moves = [((1, 1), (-1, -1)), ((0, 1), (0, -1)), ((1, 0), (-1, 0))];
        let expected_angles = [1.0, 2.0, 1.0];
        for i in 0..3 {
            match (&p.steps[2 * i], &p.steps[2 * i + 1]) {
                (Step::Rotate { profile }, Step::Translate { rule: TranslationRule::Axis2D { up, down }, .. }) => {
                    assert_eq!(profile.uniform_value(), Some(expected_angles[i]));
                    assert_eq!((*up, *down), expected_moves[i]);
                }
                other => panic!("unexpected steps {other:?}"),
            }
        }
    }

    #[test]
    fn family_geometry_mismatch() {
        assert!(matches!(
            build_protocol(&ProtocolFamily::six_op(1.0, 1.0), Geometry::Line { len: 4 }),
            Err(WalkError::FamilyGeometryMismatch { .. })
        ));
        assert!(build_protocol(
            &ProtocolFamily::Reflecting1D { theta: 1.0, phi: 0.0 },
            Geometry::Line { len: 4 }
        )
        .is_err());
        assert!(build_protocol(&ProtocolFamily::conventional(1.0), Geometry::Torus2D { lx: 2, ly: 2 }).is_err());
    }

    #[test]
    fn zero_steps_is_identity() {
        let g = Geometry::Line { len: 9 };
        let p = build_protocol(&ProtocolFamily::split_step(0.4, 1.3), g).unwrap();
        let s = SpinorState::localized(g, (1, 0), [ONE, C64::new(0.2, 0.5)]).unwrap();
        assert_eq!(p.evolve(&s, 0).unwrap(), s);
    }

    #[test]
    fn evolve_rejects_other_geometry() {
        let p = build_protocol(&ProtocolFamily::conventional(1.0), Geometry::Line { len: 9 }).unwrap();
        let s = SpinorState::localized(Geometry::Line { len: 7 }, (0, 0), [ONE, ZERO]).unwrap();
        assert!(matches!(p.evolve(&s, 1), Err(WalkError::GeometryMismatch { .. })));
    }

    #[test]
    fn reflecting_theta_pi_edge_state() {
        let g = Geometry::HalfLine { len: 10 };
        let p = build_protocol(&ProtocolFamily::Reflecting1D { theta: PI, phi: 0.0 }, g).unwrap();
        let s = SpinorState::localized(g, (0, 0), [ZERO, ONE]).unwrap();
        let out = p.evolve(&s, 1).unwrap();
        assert!((out.amplitude(0, Spin::Down) + ONE).norm() < 1e-15);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn simple_2d_region_rule_moves_to_lower_right() {
        let g = Geometry::Torus2D { lx: 6, ly: 6 };
        let family = ProtocolFamily::TwoDSimple {
            theta1: AngleProfile::piecewise(0, PI, 0.0),
            theta2: AngleProfile::piecewise(0, 0.0, PI),
        };
        let p = build_protocol(&family, g).unwrap();
        let s = SpinorState::localized(g, (0, 0), [ONE, ZERO]).unwrap();
        let out = p.evolve(&s, 1).unwrap();
        let target = g.index_of(1, -1).unwrap();
        assert!((out.amplitude(target, Spin::Down) - ONE).norm() < 1e-15);
    }

    #[test]
    fn one_step_unitary_of_trivial_ring_is_permutation() {
        let p = build_protocol(&ProtocolFamily::conventional(0.0), Geometry::Line { len: 4 }).unwrap();
        let u = p.one_step_unitary().unwrap();
        for c in 0..8 {
            let col: Vec<_> = (0..8).filter(|&r| u[(r, c)].norm() > 0.0).collect();
            assert_eq!(col.len(), 1);
            assert_eq!(u[(col[0], c)], ONE);
        }
        assert!(unitarity_residual(&u) < 1e-15);
    }

    #[test]
    fn one_step_unitary_cap() {
        let p = build_protocol(&ProtocolFamily::conventional(1.0), Geometry::Line { len: 50 }).unwrap();
        assert!(matches!(p.one_step_unitary_capped(64), Err(WalkError::TooLarge { dim: 100, cap: 64 })));
    }

    #[test]
    fn momentum_matrix_conventional_trace() {
        let u = momentum_step_matrix(&ProtocolFamily::conventional(PI / 2.0), (0.0, 0.0)).unwrap();
        assert!((u.trace() - C64::from(2.0 * (PI / 4.0).cos())).norm() < 1e-15);
        assert!((u.det().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn momentum_matrix_rejects_profiles() {
        let f = ProtocolFamily::SplitStep1D {
            theta1: AngleProfile::uniform(0.1),
            theta2: AngleProfile::tanh_step(0.1, 0.2),
        };
        assert!(matches!(momentum_step_matrix(&f, (0.0, 0.0)), Err(WalkError::NonUniformProfile)));
    }

    #[test]
    fn momentum_matrix_simple_2d_by_hand() {
        // direct 2x2 multiplication oracle: e^{i ky sz} R(t2) e^{i kx sz} R(t1)
        let (t1, t2, kx, ky) = (0.0, PI, 0.4, -1.1);
        let ez = |a: f64| Mat2::diag(C64::from_polar(1.0, a), C64::from_polar(1.0, -a));
        let direct = ez(ky) * Mat2::rotation_y(t2) * ez(kx) * Mat2::rotation_y(t1);
        let u = momentum_step_matrix(&ProtocolFamily::simple_2d(t1, t2), (kx, ky)).unwrap();
        assert!(u.max_abs_diff(&direct) < 1e-15);
        // with theta1 = 0, theta2 = pi the trace vanishes: cos E = 0
        assert!(u.trace().norm() < 1e-15);
    }

    #[test]
    fn strip_matrix_matches_torus_unitary_fourier_block() {
        // the torus unitary restricted to a plane wave along x equals the strip matrix
        let (lx, ly) = (4usize, 6usize);
        let family = ProtocolFamily::TwoDSixOp {
            theta1: AngleProfile::piecewise(0, 1.1, 0.4),
            theta2: AngleProfile::uniform(2.3),
        };
        let torus = build_protocol(&family, Geometry::Torus2D { lx, ly }).unwrap();
        let g = torus.geometry;
        let m = 1;
        let kx = 2.0 * PI * m as f64 / lx as f64;
        let strip = strip_step_matrix(&family, ly, kx).unwrap();
        for iy in 0..ly {
            for spin in 0..2 {
                // up moving +x picks up e^{+i kx} under translation,
                // so the eigenfunction carries e^{-i kx x}
                let mut amps = vec![ZERO; g.dim()];
                for ix in 0..lx {
                    let x = ix as i64 - (lx / 2) as i64;
                    amps[2 * (ix * ly + iy) + spin] = C64::from_polar(1.0, -kx * x as f64);
                }
                let s = SpinorState::from_amplitudes(g, amps).unwrap();
                let out = torus.evolve(&s, 1).unwrap();
                // read back the strip column from the x = 0 slice
                let ix0 = (lx / 2) * ly;
                for jy in 0..ly {
                    for sp in 0..2 {
                        let got = out.amplitudes()[2 * (ix0 + jy) + sp];
                        let want = strip[(2 * jy + sp, 2 * iy + spin)];
                        assert!((got - want).norm() < 1e-13, "({jy},{sp}) <- ({iy},{spin})");
                    }
                }
            }
        }
    }
}
