//! Physical constants, static trap models, RF tone descriptions and the
//! local-frame geometry they share.
//!
//! Everything here is a pure function of its inputs. Energies are returned as
//! angular frequencies (rad/s), fields are in tesla and positions in metres.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;
use thiserror::Error;

/// Tolerance for the orthogonality and alignment checks on rotation matrices.
pub const ROTATION_TOL: f64 = 1e-12;

/// Ratio `|μ_B g_F B'_z| / (ħω)` above which neglecting the axial RF
/// component is reported as questionable.
pub const PI_NEGLECT_WARN_RATIO: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("local frame is degenerate on the trap axis (x, y) = (0, 0)")]
    DegeneratePoint,
    #[error("operation requires the Ioffe-Pritchard field model")]
    RequiresIoffePritchard,
}

/// Bohr magneton and reduced Planck constant, fixed at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    mu_b: f64,
    hbar: f64,
}

impl PhysicalConstants {
    /// CODATA values: μ_B = 9.274009994e-24 J/T, ħ = 1.054571817e-34 J·s.
    pub const fn codata() -> Self {
        Self { mu_b: 9.274_009_994e-24, hbar: 1.054_571_817e-34 }
    }

    pub fn new(mu_b: f64, hbar: f64) -> Result<Self, FieldError> {
        if !(mu_b > 0.0) || !(hbar > 0.0) {
            return Err(FieldError::InvalidParameter(
                "mu_b and hbar must be positive and finite".into(),
            ));
        }
        Ok(Self { mu_b, hbar })
    }

    /// Bohr magneton in J/T.
    pub fn mu_b(&self) -> f64 {
        self.mu_b
    }

    /// Reduced Planck constant in J·s.
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}

/// Magnetic quantum number of a spin-1/2 manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinHalf {
    /// m_F = +1/2
    Up,
    /// m_F = -1/2
    Down,
}

impl SpinHalf {
    pub fn m_f(&self) -> f64 {
        match self {
            SpinHalf::Up => 0.5,
            SpinHalf::Down => -0.5,
        }
    }
}

/// g-factor and magnetic quantum number of the dressed manifold (F = 1/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinSystem {
    pub g_f: f64,
    pub m_f: SpinHalf,
}

impl SpinSystem {
    pub fn new(g_f: f64, m_f: SpinHalf) -> Result<Self, FieldError> {
        if g_f == 0.0 || !g_f.is_finite() {
            return Err(FieldError::InvalidParameter(
                "g_f must be finite and nonzero".into(),
            ));
        }
        Ok(Self { g_f, m_f })
    }

    /// Larmor angular frequency μ_B g_F B_s / ħ for a field modulus `b_s`.
    pub fn larmor(&self, consts: &PhysicalConstants, b_s: f64) -> f64 {
        consts.mu_b * self.g_f * b_s / consts.hbar
    }

    /// Bare Zeeman energy m_F μ_B g_F B_s / ħ.
    pub fn bare_energy(&self, consts: &PhysicalConstants, b_s: f64) -> f64 {
        self.m_f.m_f() * self.larmor(consts, b_s)
    }
}

/// Static trapping field model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StaticFieldModel {
    /// Radial profile `B_s(r) = sqrt(G² r² + B_I²)` of a 2D quadrupole with
    /// the zero lifted by an orthogonal offset field.
    IoffePritchard { gradient: f64, offset: f64 },
    /// `B_s(z) = G z` (signed) along a single axis.
    Linear { gradient: f64 },
}

impl StaticFieldModel {
    pub fn ioffe_pritchard(gradient: f64, offset: f64) -> Result<Self, FieldError> {
        if !(gradient > 0.0) || !(offset > 0.0) {
            return Err(FieldError::InvalidParameter(
                "Ioffe-Pritchard model needs gradient > 0 and offset > 0".into(),
            ));
        }
        Ok(Self::IoffePritchard { gradient, offset })
    }

    pub fn linear(gradient: f64) -> Result<Self, FieldError> {
        if !(gradient > 0.0) {
            return Err(FieldError::InvalidParameter("gradient must be > 0".into()));
        }
        Ok(Self::Linear { gradient })
    }

    /// Field modulus at radius `r` (Ioffe-Pritchard) or signed coordinate `z`
    /// (linear).
    pub fn modulus(&self, coordinate: f64) -> f64 {
        match *self {
            StaticFieldModel::IoffePritchard { gradient, offset } => {
                (gradient * gradient * coordinate * coordinate + offset * offset).sqrt()
            }
            StaticFieldModel::Linear { gradient } => gradient * coordinate,
        }
    }

    /// Static field vector (G x, G y, B_I) of the Ioffe-Pritchard model.
    pub fn vector(&self, x: f64, y: f64) -> Result<Vector3<f64>, FieldError> {
        match *self {
            StaticFieldModel::IoffePritchard { gradient, offset } => {
                Ok(Vector3::new(gradient * x, gradient * y, offset))
            }
            StaticFieldModel::Linear { .. } => Err(FieldError::RequiresIoffePritchard),
        }
    }

    /// Radius at which the modulus reaches `b_s`, if it does.
    pub fn radius_at_modulus(&self, b_s: f64) -> Option<f64> {
        match *self {
            StaticFieldModel::IoffePritchard { gradient, offset } => {
                if b_s >= offset {
                    Some((b_s * b_s - offset * offset).sqrt() / gradient)
                } else {
                    None
                }
            }
            StaticFieldModel::Linear { gradient } => Some(b_s / gradient),
        }
    }
}

/// One RF tone: angular frequency, in-plane amplitude, orientation of the
/// in-plane component and axial amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RFComponent {
    pub omega: f64,
    pub alpha: f64,
    pub theta: f64,
    pub b_pi: f64,
}

impl RFComponent {
    pub fn new(omega: f64, alpha: f64, theta: f64, b_pi: f64) -> Result<Self, FieldError> {
        if !(omega > 0.0) {
            return Err(FieldError::InvalidParameter("omega must be > 0".into()));
        }
        if !(alpha >= 0.0) || !b_pi.is_finite() || !theta.is_finite() {
            return Err(FieldError::InvalidParameter(
                "alpha must be >= 0 and theta, b_pi finite".into(),
            ));
        }
        if alpha == 0.0 && b_pi == 0.0 {
            return Err(FieldError::InvalidParameter(
                "at least one of alpha, b_pi must be nonzero".into(),
            ));
        }
        Ok(Self { omega, alpha, theta, b_pi })
    }

    /// Spherical components (B_+, B_-, B_π) of the linearly polarised tone,
    /// B_± = α (cos θ ∓ i sin θ)/√2.
    pub fn spherical_components(&self) -> (C64, C64, f64) {
        let plus = C64::new(self.theta.cos(), -self.theta.sin()) * self.alpha * FRAC_1_SQRT_2;
        let minus = C64::new(self.theta.cos(), self.theta.sin()) * self.alpha * FRAC_1_SQRT_2;
        (plus, minus, self.b_pi)
    }

    /// Cartesian field vector (α cos θ, α sin θ, B_π).
    pub fn cartesian(&self) -> Vector3<f64> {
        Vector3::new(
            self.alpha * self.theta.cos(),
            self.alpha * self.theta.sin(),
            self.b_pi,
        )
    }
}

/// An ordered multi-tone drive; tones sorted ascending by frequency, all
/// frequencies distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct RFDrive {
    tones: Vec<RFComponent>,
}

impl RFDrive {
    pub fn new(tones: Vec<RFComponent>) -> Result<Self, FieldError> {
        if tones.is_empty() {
            return Err(FieldError::InvalidParameter("drive needs at least one tone".into()));
        }
        for pair in tones.windows(2) {
            if !(pair[0].omega < pair[1].omega) {
                return Err(FieldError::InvalidParameter(
                    "tones must be sorted ascending by omega with distinct frequencies".into(),
                ));
            }
        }
        Ok(Self { tones })
    }

    pub fn tones(&self) -> &[RFComponent] {
        &self.tones
    }

    pub fn len(&self) -> usize {
        self.tones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tones.is_empty()
    }
}

/// Proper rotation taking the local static field onto the z-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix {
    entries: Matrix3<f64>,
}

impl RotationMatrix {
    /// Validates orthogonality (R Rᵀ = I) and det R = +1 to [`ROTATION_TOL`].
    pub fn from_matrix(entries: Matrix3<f64>) -> Result<Self, FieldError> {
        let gram = entries * entries.transpose();
        let mut dev: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((gram[(i, j)] - target).abs());
            }
        }
        if dev > ROTATION_TOL || (entries.determinant() - 1.0).abs() > ROTATION_TOL {
            return Err(FieldError::InvalidParameter(
                "matrix is not a proper rotation".into(),
            ));
        }
        Ok(Self { entries })
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.entries
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.entries * v
    }
}

/// Local-frame rotation of the Ioffe-Pritchard field at (x, y),
///
/// ```text
///     (  y/r          -x/r          0      )
/// R = (  B_I x/(B_s r) B_I y/(B_s r) -G r/B_s )
///     (  G x/B_s      G y/B_s       B_I/B_s )
/// ```
///
/// Fails with [`FieldError::DegeneratePoint`] exactly on the axis; callers
/// that need a value there apply the fixed limit of
/// [`rotation_matrix_or_axis_limit`].
pub fn rotation_matrix(
    model: &StaticFieldModel,
    x: f64,
    y: f64,
) -> Result<RotationMatrix, FieldError> {
    let (gradient, offset) = match *model {
        StaticFieldModel::IoffePritchard { gradient, offset } => (gradient, offset),
        StaticFieldModel::Linear { .. } => return Err(FieldError::RequiresIoffePritchard),
    };
    let r = x.hypot(y);
    if r == 0.0 {
        return Err(FieldError::DegeneratePoint);
    }
    let b_s = model.modulus(r);
    let entries = Matrix3::new(
        y / r,
        -x / r,
        0.0,
        offset * x / (b_s * r),
        offset * y / (b_s * r),
        -gradient * r / b_s,
        gradient * x / b_s,
        gradient * y / b_s,
        offset / b_s,
    );
    RotationMatrix::from_matrix(entries)
}

/// As [`rotation_matrix`], but on the axis returns the limit taken along +x:
/// rows ((0, -1, 0), (1, 0, 0), (0, 0, 1)). The frame at a point depends only
/// on its direction, so any fixed choice gives consistent overlap tracking.
pub fn rotation_matrix_or_axis_limit(
    model: &StaticFieldModel,
    x: f64,
    y: f64,
) -> Result<RotationMatrix, FieldError> {
    match rotation_matrix(model, x, y) {
        Err(FieldError::DegeneratePoint) => Ok(RotationMatrix {
            entries: Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0),
        }),
        other => other,
    }
}

/// Tone vector in the local frame, B'_n = R · B_n.
pub fn rotated_rf(tone: &RFComponent, rotation: &RotationMatrix) -> Vector3<f64> {
    rotation.rotate(&tone.cartesian())
}

/// Rabi frequency Ω = (μ_B g_F / 4ħ)(B'_x + i B'_y) of a rotated tone
/// vector; the axial component B'_z does not couple.
pub fn rabi_frequency(
    b_prime: &Vector3<f64>,
    consts: &PhysicalConstants,
    spin: &SpinSystem,
) -> C64 {
    let scale = consts.mu_b * spin.g_f / (4.0 * consts.hbar);
    C64::new(b_prime.x, b_prime.y) * scale
}

/// Ratio |μ_B g_F B'_z| / (ħ ω) deciding whether dropping the axial RF
/// component is justified; compare against [`PI_NEGLECT_WARN_RATIO`].
pub fn pi_neglect_ratio(
    b_prime_z: f64,
    omega: f64,
    consts: &PhysicalConstants,
    spin: &SpinSystem,
) -> f64 {
    (consts.mu_b * spin.g_f * b_prime_z).abs() / (consts.hbar * omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const UT: f64 = 1e-6;

    fn ip_model() -> StaticFieldModel {
        StaticFieldModel::ioffe_pritchard(1.0, UT).unwrap()
    }

    #[test]
    fn ip_modulus_at_centre_is_offset() {
        assert_eq!(ip_model().modulus(0.0), UT);
    }

    #[test]
    fn ip_modulus_one_micron() {
        let b = ip_model().modulus(1e-6);
        assert!((b - 2f64.sqrt() * UT).abs() < 1e-20);
    }

    #[test]
    fn linear_modulus_zero_and_signed() {
        let m = StaticFieldModel::linear(1.0).unwrap();
        assert_eq!(m.modulus(0.0), 0.0);
        assert_eq!(m.modulus(-2e-6), -2e-6);
    }

    #[test]
    fn static_vector_origin_and_substitution() {
        let m = ip_model();
        assert_eq!(m.vector(0.0, 0.0).unwrap(), Vector3::new(0.0, 0.0, UT));
        assert_eq!(m.vector(1e-6, 0.0).unwrap(), Vector3::new(UT, 0.0, UT));
        assert!(StaticFieldModel::linear(1.0).unwrap().vector(0.0, 0.0).is_err());
    }

    #[test]
    fn static_vector_norm_matches_modulus() {
        let m = ip_model();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x = rng.random_range(-5e-5..5e-5);
            let y = rng.random_range(-5e-5..5e-5);
            let v = m.vector(x, y).unwrap();
            let r = x.hypot(y);
            assert!((v.norm() - m.modulus(r)).abs() <= 1e-12 * m.modulus(r));
        }
    }

    #[test]
    fn spherical_components_theta_zero() {
        let tone = RFComponent::new(1e5, UT, 0.0, 0.0).unwrap();
        let (p, m, z) = tone.spherical_components();
        assert!((p - C64::new(UT * FRAC_1_SQRT_2, 0.0)).norm() < 1e-20);
        assert!((m - C64::new(UT * FRAC_1_SQRT_2, 0.0)).norm() < 1e-20);
        assert_eq!(z, 0.0);
    }

    #[test]
    fn spherical_components_axial_only() {
        let tone = RFComponent::new(1e5, 0.0, 0.0, 8.0 * UT).unwrap();
        let (p, m, z) = tone.spherical_components();
        assert_eq!(p, C64::new(0.0, 0.0));
        assert_eq!(m, C64::new(0.0, 0.0));
        assert_eq!(z, 8.0 * UT);
    }

    #[test]
    fn spherical_components_quarter_turn() {
        let tone = RFComponent::new(1e5, UT, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        let (p, m, _) = tone.spherical_components();
        assert!((p - C64::new(0.0, -UT * FRAC_1_SQRT_2)).norm() < 1e-20);
        assert!((m - C64::new(0.0, UT * FRAC_1_SQRT_2)).norm() < 1e-20);
    }

    /// Reassembling the Cartesian vector from the spherical components at
    /// t = 0 must return (α cos θ, α sin θ, B_π).
    #[test]
    fn spherical_identity_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let alpha = rng.random_range(0.0..10.0 * UT);
            let theta = rng.random_range(-7.0..7.0);
            let tone = RFComponent::new(1e5, alpha, theta, UT).unwrap();
            let (p, m, z) = tone.spherical_components();
            let x = ((p + m) * FRAC_1_SQRT_2).re;
            let y = (C64::i() * (p - m) * FRAC_1_SQRT_2).re;
            let v = tone.cartesian();
            assert!((x - v.x).abs() < 1e-14);
            assert!((y - v.y).abs() < 1e-14);
            assert!((z - v.z).abs() < 1e-14);
        }
    }

    #[test]
    fn drive_ordering_enforced() {
        let a = RFComponent::new(1e5, UT, 0.0, 0.0).unwrap();
        let b = RFComponent::new(2e5, UT, 0.0, 0.0).unwrap();
        assert!(RFDrive::new(vec![a, b]).is_ok());
        assert!(RFDrive::new(vec![b, a]).is_err());
        assert!(RFDrive::new(vec![a, a]).is_err());
        assert!(RFDrive::new(vec![]).is_err());
    }

    #[test]
    fn rotation_row_one_on_y_axis() {
        let r = rotation_matrix(&ip_model(), 0.0, 2e-6).unwrap();
        let row = r.matrix().row(0);
        assert!((row[0] - 1.0).abs() < 1e-15);
        assert!(row[1].abs() < 1e-15);
        assert!(row[2].abs() < 1e-15);
    }

    #[test]
    fn rotation_aligns_static_vector_and_is_orthogonal() {
        let m = ip_model();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x = rng.random_range(-4e-5..4e-5);
            let y = rng.random_range(-4e-5..4e-5);
            if x == 0.0 && y == 0.0 {
                continue;
            }
            let rot = rotation_matrix(&m, x, y).unwrap();
            let b = m.vector(x, y).unwrap();
            let b_s = m.modulus(x.hypot(y));
            let aligned = rot.rotate(&b);
            assert!(aligned.x.abs() < 1e-12 * b_s);
            assert!(aligned.y.abs() < 1e-12 * b_s);
            assert!((aligned.z - b_s).abs() < 1e-12 * b_s);
        }
    }

    #[test]
    fn rotation_degenerate_at_origin_with_fixed_limit() {
        let m = ip_model();
        assert_eq!(rotation_matrix(&m, 0.0, 0.0), Err(FieldError::DegeneratePoint));
        let lim = rotation_matrix_or_axis_limit(&m, 0.0, 0.0).unwrap();
        // limit along +x
        let eps = rotation_matrix(&m, 1e-12, 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((lim.matrix()[(i, j)] - eps.matrix()[(i, j)]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rotated_rf_identity_and_isometry() {
        let tone = RFComponent::new(1e5, 3.0 * UT, 0.7, UT).unwrap();
        let ident = RotationMatrix::from_matrix(Matrix3::identity()).unwrap();
        assert_eq!(rotated_rf(&tone, &ident), tone.cartesian());
        let rot = rotation_matrix(&ip_model(), 2e-6, -3e-6).unwrap();
        let v = rotated_rf(&tone, &rot);
        assert!((v.norm() - tone.cartesian().norm()).abs() < 1e-12 * v.norm());
    }

    /// An axial tone at (r, 0) rotates onto (0, -(G r / B_s) B_π, (B_I/B_s) B_π).
    #[test]
    fn rotated_axial_tone_structure() {
        let m = ip_model();
        let tone = RFComponent::new(1e5, 0.0, 0.0, 8.0 * UT).unwrap();
        let r = 2e-6;
        let b_s = m.modulus(r);
        let v = rotated_rf(&tone, &rotation_matrix(&m, r, 0.0).unwrap());
        assert!(v.x.abs() < 1e-18);
        assert!((v.y - (-(1.0 * r / b_s) * 8.0 * UT)).abs() < 1e-18);
        assert!((v.z - (UT / b_s) * 8.0 * UT).abs() < 1e-18);
    }

    #[test]
    fn rabi_axial_field_does_not_couple() {
        let consts = PhysicalConstants::codata();
        let spin = SpinSystem::new(1.0, SpinHalf::Up).unwrap();
        let w = rabi_frequency(&Vector3::new(0.0, 0.0, 5.0 * UT), &consts, &spin);
        assert_eq!(w, C64::new(0.0, 0.0));
    }

    #[test]
    fn rabi_magnitude_along_x() {
        let consts = PhysicalConstants::codata();
        let spin = SpinSystem::new(1.0, SpinHalf::Up).unwrap();
        let w = rabi_frequency(&Vector3::new(UT, 0.0, 0.0), &consts, &spin);
        // mu_B/(4 hbar) * 1 uT
        let expected = consts.mu_b() / (4.0 * consts.hbar()) * UT;
        assert!((w.re - expected).abs() < 1e-9 * expected);
        assert_eq!(w.im, 0.0);
        assert!((expected - 2.198_526_4e4).abs() < 1.0);
    }

    #[test]
    fn rabi_phase_convention_along_y() {
        let consts = PhysicalConstants::codata();
        let spin = SpinSystem::new(1.0, SpinHalf::Up).unwrap();
        let b = 2.5 * UT;
        let w = rabi_frequency(&Vector3::new(0.0, b, 0.0), &consts, &spin);
        assert_eq!(w.re, 0.0);
        assert!((w.im - consts.mu_b() * b / (4.0 * consts.hbar())).abs() < 1e-6);
    }

    /// |Ω| is invariant under rotating B' about the local z-axis.
    #[test]
    fn rabi_invariant_under_z_rotation() {
        let consts = PhysicalConstants::codata();
        let spin = SpinSystem::new(1.0, SpinHalf::Up).unwrap();
        let v = Vector3::new(1.3 * UT, -0.4 * UT, 2.0 * UT);
        let w0 = rabi_frequency(&v, &consts, &spin).norm();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let rotated = Vector3::new(
                v.x * phi.cos() - v.y * phi.sin(),
                v.x * phi.sin() + v.y * phi.cos(),
                v.z,
            );
            let w = rabi_frequency(&rotated, &consts, &spin).norm();
            assert!((w - w0).abs() < 1e-12 * w0);
        }
    }

    #[test]
    fn neglect_ratio_scale() {
        let consts = PhysicalConstants::codata();
        let spin = SpinSystem::new(1.0, SpinHalf::Up).unwrap();
        // mu_B * 1uT / hbar ~ 8.794e4 rad/s, so against 8.794e5 the ratio is 0.1
        let ratio = pi_neglect_ratio(UT, 8.794_105_7e5, &consts, &spin);
        assert!((ratio - 0.1).abs() < 1e-4);
    }
}
