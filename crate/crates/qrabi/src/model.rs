//! The coupled atom-phonon Hamiltonian in its laboratory-frame and rotated
//! forms, the mapping from laboratory quantities to model couplings, and the
//! unitaries relating the model's limits.
//!
//! Internal unit system: energies in units of `g_x`, time in units of
//! `1/g_x` (ħ = 1). The rotated form is canonical; its matrix elements on the
//! basis `|n,σ⟩` are
//!
//! ```text
//! ⟨n,g|H'|n,g⟩ = nω − Ω/2         ⟨n,g|H'|n,e⟩   = +iδ
//! ⟨n,e|H'|n,e⟩ = nω + Ω/2         ⟨n,e|H'|n+1,g⟩ = √(n+1) λ₊
//!                                 ⟨n,g|H'|n+1,e⟩ = √(n+1) λ₋
//! ```
//!
//! with λ± = (g_x ± g_k)/2. The sign of the detuning coupling is fixed by
//! this block matrix; the laboratory form carries the matching sign so the
//! two are related exactly by the spin rotation `R_x = exp(iπσ_x/4)`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{Axis, Operator, Truncation};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054571817e-34;
/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.66053906660e-27;
/// ⁸⁷Sr atomic mass, kg.
pub const MASS_SR87: f64 = 86.9088774 * ATOMIC_MASS_UNIT;
/// Clock-transition wavelength ¹S₀–³P₀, m.
pub const LAMBDA_CLOCK: f64 = 698e-9;
/// Magic-wavelength trap laser, m.
pub const LAMBDA_TRAP: f64 = 813e-9;
/// Single-photon recoil energy of the clock transition, quoted as E_C/h in kHz.
pub const RECOIL_KHZ: f64 = 4.68;

/// Dimensionless model couplings (all in the same energy unit, usually g_x).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Trap (phonon) frequency ω; always positive.
    pub omega: f64,
    /// Rabi coupling strength Ω.
    #[serde(rename = "Omega")]
    pub rabi: f64,
    /// Clock detuning δ.
    pub delta: f64,
    /// Real-space coupling strength g_x (the reference energy scale).
    pub g_x: f64,
    /// Momentum-space coupling strength g_k (signed).
    pub g_k: f64,
}

impl ModelParams {
    /// Parameters in model units, `g_x = 1`.
    pub fn model_units(omega: f64, rabi: f64, delta: f64, g_k: f64) -> Self {
        ModelParams {
            omega,
            rabi,
            delta,
            g_x: 1.0,
            g_k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if !(self.g_x > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "g_x must be positive, got {}",
                self.g_x
            )));
        }
        Ok(())
    }

    /// Co-rotating coupling λ₊ = (g_x + g_k)/2.
    pub fn lambda_plus(&self) -> f64 {
        0.5 * (self.g_x + self.g_k)
    }

    /// Counter-rotating coupling λ₋ = (g_x − g_k)/2.
    pub fn lambda_minus(&self) -> f64 {
        0.5 * (self.g_x - self.g_k)
    }

    /// Rescale all couplings so that g_x = 1.
    pub fn normalized(&self) -> Self {
        ModelParams {
            omega: self.omega / self.g_x,
            rabi: self.rabi / self.g_x,
            delta: self.delta / self.g_x,
            g_x: 1.0,
            g_k: self.g_k / self.g_x,
        }
    }
}

/// Laboratory quantities for a trapped ⁸⁷Sr atom driven on the clock line.
/// Angular frequencies throughout (rad/s); lengths in meters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    /// Clock laser wavelength, m.
    pub lambda_clock: f64,
    /// Trap laser wavelength, m.
    pub lambda_trap: f64,
    /// Clock-laser tilt angle φ relative to the trap axis, rad.
    pub phi: f64,
    /// Trap angular frequency ω, rad/s.
    pub omega_trap: f64,
    /// Gradient Rabi strength Ω₀, rad/(s·m).
    pub omega_gradient: f64,
    /// Uniform Rabi strength Ω, rad/s.
    pub rabi: f64,
    /// Single-photon detuning δ = ω_a − ω_c, rad/s.
    pub delta: f64,
    /// Atomic mass, kg.
    pub mass: f64,
}

impl PhysicalParams {
    pub fn sr87(phi: f64, omega_trap: f64, omega_gradient: f64, rabi: f64, delta: f64) -> Self {
        PhysicalParams {
            lambda_clock: LAMBDA_CLOCK,
            lambda_trap: LAMBDA_TRAP,
            phi,
            omega_trap,
            omega_gradient,
            rabi,
            delta,
            mass: MASS_SR87,
        }
    }

    /// Zero-point length x₀ = sqrt(ħ / (2 M ω)).
    pub fn x_zero_point(&self) -> f64 {
        (HBAR / (2.0 * self.mass * self.omega_trap)).sqrt()
    }

    /// Effective laser wave vector κ = k_C cos φ.
    pub fn kappa(&self) -> f64 {
        (2.0 * std::f64::consts::PI / self.lambda_clock) * self.phi.cos()
    }

    /// Lamb-Dicke parameter κ x₀ (computed, not assumed).
    pub fn lamb_dicke(&self) -> f64 {
        self.kappa() * self.x_zero_point()
    }
}

/// Map laboratory parameters onto model couplings:
/// `g_x = 2 Ω₀ x₀`, `g_k = κ ω x₀`, with ω, Ω, δ passed through. The result
/// is in angular-frequency units; call [`ModelParams::normalized`] for model
/// units.
pub fn physical_to_model(p: &PhysicalParams) -> Result<ModelParams> {
    if !(p.omega_trap > 0.0) {
        return Err(Error::NonPositiveTrapFrequency(p.omega_trap));
    }
    if !(0.0..=std::f64::consts::PI).contains(&p.phi) {
        return Err(Error::InvalidParameter(format!(
            "phi must lie in [0, pi], got {}",
            p.phi
        )));
    }
    let x0 = p.x_zero_point();
    Ok(ModelParams {
        omega: p.omega_trap,
        rabi: p.rabi,
        delta: p.delta,
        g_x: 2.0 * p.omega_gradient * x0,
        g_k: p.kappa() * p.omega_trap * x0,
    })
}

/// The rotated-frame Hamiltonian (the canonical form used by the dynamics):
///
/// H' = ω a†a + (Ω/2)σ_z + λ₊(a†σ₋ + aσ₊) + λ₋(a†σ₊ + aσ₋) + detuning
///
/// with the detuning coupling `⟨n,g|H'|n,e⟩ = +iδ`.
pub fn hamiltonian_rotated(m: &ModelParams, t: Truncation) -> Result<Operator> {
    m.validate()?;
    let a = Operator::annihilation(t);
    let adag = a.dagger();
    let sp = Operator::sigma_plus(t);
    let sm = Operator::sigma_minus(t);
    let n = Operator::number(t);
    let sz = Operator::pauli(Axis::Z, t);
    let sy = Operator::pauli(Axis::Y, t);

    let co_rotating = &(&adag * &sm) + &(&a * &sp);
    let counter_rotating = &(&adag * &sp) + &(&a * &sm);

    let mut h = n.scale_re(m.omega);
    h = &h + &sz.scale_re(0.5 * m.rabi);
    h = &h + &sy.scale_re(m.delta);
    h = &h + &co_rotating.scale_re(m.lambda_plus());
    h = &h + &counter_rotating.scale_re(m.lambda_minus());
    debug_assert!(h.is_hermitian(1e-12 * m.g_x.max(1.0)));
    Ok(h)
}

/// The laboratory-frame Hamiltonian:
///
/// H = ω a†a + (Ω/2)σ_y − δσ_z + (g_x/2)(a† + a)σ_x + (i g_k/2)(a† − a)σ_z
///
/// Related to [`hamiltonian_rotated`] by the spin rotation R_x; kept for
/// cross-validation.
pub fn hamiltonian_lab_frame(m: &ModelParams, t: Truncation) -> Result<Operator> {
    m.validate()?;
    let a = Operator::annihilation(t);
    let adag = a.dagger();
    let n = Operator::number(t);
    let sx = Operator::pauli(Axis::X, t);
    let sy = Operator::pauli(Axis::Y, t);
    let sz = Operator::pauli(Axis::Z, t);

    let x_quad = &adag + &a;
    let p_quad = &adag - &a;

    let mut h = n.scale_re(m.omega);
    h = &h + &sy.scale_re(0.5 * m.rabi);
    h = &h + &sz.scale_re(-m.delta);
    h = &h + &(&x_quad * &sx).scale_re(0.5 * m.g_x);
    h = &h + &(&p_quad * &sz).scale(C64::new(0.0, 0.5 * m.g_k));
    debug_assert!(h.is_hermitian(1e-12 * m.g_x.max(1.0)));
    Ok(h)
}

/// Named unitary transformations of the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryKind {
    /// R_x = exp(iπσ_x/4): maps the laboratory form onto the rotated form.
    SpinRotationRx,
    /// exp(−iπσ_x/2): maps the anti-JCM onto the JCM
    /// (g_k → −g_k, Ω → −Ω, δ → −δ).
    AntiJcmToJcm,
}

/// Unitary matrix of a [`SymmetryKind`] on the full space.
pub fn symmetry_unitary(kind: SymmetryKind, t: Truncation) -> Operator {
    let id = Operator::identity(t);
    let sx = Operator::pauli(Axis::X, t);
    match kind {
        SymmetryKind::SpinRotationRx => {
            // exp(i pi sigma_x / 4) = (I + i sigma_x)/sqrt(2)
            let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
            &id.scale_re(inv_sqrt2) + &sx.scale(C64::new(0.0, inv_sqrt2))
        }
        SymmetryKind::AntiJcmToJcm => {
            // exp(-i pi sigma_x / 2) = -i sigma_x
            sx.scale(C64::new(0.0, -1.0))
        }
    }
}

/// Apply the named unitary: returns U† H U; the spectrum is preserved.
pub fn symmetry_transform(kind: SymmetryKind, h: &Operator) -> Operator {
    let u = symmetry_unitary(kind, h.truncation());
    &(&u.dagger() * h) * &u
}

/// Total excitation number N = a†a + (1 + σ_z)/2, conserved in the JCM limit.
pub fn excitation_number(t: Truncation) -> Operator {
    let n = Operator::number(t);
    let sz = Operator::pauli(Axis::Z, t);
    let id = Operator::identity(t);
    &n + &(&id + &sz).scale_re(0.5)
}
