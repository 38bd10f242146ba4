use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{on_qubit, sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z, ComplexMatrix, DIM};
use crate::scalar::Real;

/// Which free/interaction Hamiltonian pair drives the two qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SystemVariant {
    /// Detuned qubits, `V = σx⊗𝕀 + 𝕀⊗σx`.
    Sys1,
    /// Detuned qubits, `V = σx⊗σx`.
    Sys2,
    /// Coupled qubits with `α(σy⊗σy + σz⊗σz)`, `V = σx⊗𝕀`.
    Sys3,
}

impl SystemVariant {
    pub const ALL: [SystemVariant; 3] = [SystemVariant::Sys1, SystemVariant::Sys2, SystemVariant::Sys3];

    pub fn number(self) -> u8 {
        match self {
            SystemVariant::Sys1 => 1,
            SystemVariant::Sys2 => 2,
            SystemVariant::Sys3 => 3,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(SystemVariant::Sys1),
            2 => Ok(SystemVariant::Sys2),
            3 => Ok(SystemVariant::Sys3),
            _ => Err(Error::param("system", format!("unknown system {n} (expected 1, 2 or 3)"))),
        }
    }
}

impl fmt::Display for SystemVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for SystemVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches("sys").trim_start_matches("Sys");
        t.parse::<u8>()
            .map_err(|_| Error::param("system", format!("unknown system `{s}` (expected 1, 2 or 3)")))
            .and_then(Self::from_number)
    }
}

/// Physical constants of one open two-qubit system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec<T> {
    pub variant: SystemVariant,
    pub omega: [T; 2],
    /// Decay-rate constants `Ω₁, Ω₂`.
    pub decay: [T; 2],
    /// Lamb-shift constants `Λ₁, Λ₂`.
    pub lamb: [T; 2],
    /// Coupling constant of System 3.
    pub alpha: Option<T>,
    /// Environment coupling strength `ε`.
    pub eps: T,
}

impl<T: Real> SystemSpec<T> {
    /// `ω₁ = 1`, `ω₂ = 1.1`, `Ω = Λ = 0.5`, `α = 0.2` for System 3.
    pub fn reference(variant: SystemVariant, eps: T) -> Self {
        let half = T::lit(0.5);
        Self {
            variant,
            omega: [T::one(), T::lit(1.1)],
            decay: [half, half],
            lamb: [half, half],
            alpha: (variant == SystemVariant::Sys3).then(|| T::lit(0.2)),
            eps,
        }
    }

    pub fn with_eps(&self, eps: T) -> Self {
        Self { eps, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        for j in 0..2 {
            if !(self.decay[j] > T::zero()) || !self.decay[j].is_finite() {
                return Err(Error::param(format!("decay[{j}]"), "must be positive and finite"));
            }
            if !(self.lamb[j] > T::zero()) || !self.lamb[j].is_finite() {
                return Err(Error::param(format!("lamb[{j}]"), "must be positive and finite"));
            }
            if !self.omega[j].is_finite() {
                return Err(Error::param(format!("omega[{j}]"), "must be finite"));
            }
        }
        if !(self.eps >= T::zero()) || !self.eps.is_finite() {
            return Err(Error::param("eps", "must be finite and non-negative"));
        }
        match (self.variant, self.alpha) {
            (SystemVariant::Sys3, None) => Err(Error::param("alpha", "required for system 3")),
            (SystemVariant::Sys3, Some(a)) if !a.is_finite() => Err(Error::param("alpha", "must be finite")),
            (SystemVariant::Sys1 | SystemVariant::Sys2, Some(_)) => {
                Err(Error::param("alpha", "only applies to system 3"))
            }
            _ => Ok(()),
        }
    }
}

/// Constant operator blocks of one system.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemOperators<T> {
    pub h_free: ComplexMatrix<T>,
    pub v: ComplexMatrix<T>,
    /// `Λⱼ σz` on qubit j; multiplied by `ε nⱼ(t)` in the Hamiltonian.
    pub h_eff: [ComplexMatrix<T>; 2],
    /// `σ⁻ⱼ`
    pub lowering: [ComplexMatrix<T>; 2],
    /// `σ⁺ⱼ`
    pub raising: [ComplexMatrix<T>; 2],
    pub decay: [T; 2],
}

pub fn build_system<T: Real>(spec: &SystemSpec<T>) -> Result<SystemOperators<T>> {
    spec.validate()?;
    let z1 = on_qubit(&sigma_z(), 1);
    let z2 = on_qubit(&sigma_z(), 2);
    let x1 = on_qubit(&sigma_x(), 1);
    let x2 = on_qubit(&sigma_x(), 2);
    let half = T::lit(0.5);
    let detuned = || &z1.scale_real(spec.omega[0] * half) + &z2.scale_real(spec.omega[1] * half);
    let (h_free, v) = match spec.variant {
        SystemVariant::Sys1 => (detuned(), &x1 + &x2),
        SystemVariant::Sys2 => (detuned(), sigma_x::<T>().kron(&sigma_x())),
        SystemVariant::Sys3 => {
            let alpha = spec.alpha.expect("validated");
            let yy = sigma_y::<T>().kron(&sigma_y());
            let zz = sigma_z::<T>().kron(&sigma_z());
            let h = &(&z1 + &z2) + &(&yy + &zz).scale_real(alpha);
            (h, x1.clone())
        }
    };
    Ok(SystemOperators {
        h_free,
        v,
        h_eff: [z1.scale_real(spec.lamb[0]), z2.scale_real(spec.lamb[1])],
        lowering: [on_qubit(&sigma_minus(), 1), on_qubit(&sigma_minus(), 2)],
        raising: [on_qubit(&sigma_plus(), 1), on_qubit(&sigma_plus(), 2)],
        decay: spec.decay,
    })
}

impl<T: Real> SystemOperators<T> {
    /// Full Hamiltonian `H_S + ε(n₁ h_eff₁ + n₂ h_eff₂) + u V`.
    pub fn hamiltonian(&self, eps: T, u: T, n1: T, n2: T) -> ComplexMatrix<T> {
        let lamb = &self.h_eff[0].scale_real(eps * n1) + &self.h_eff[1].scale_real(eps * n2);
        &(&self.h_free + &lamb) + &self.v.scale_real(u)
    }

    /// Direct evaluation of `−i[H, ρ] + ε 𝒟ⁿ(ρ)` on the 4×4 matrix.
    pub fn rhs(&self, eps: T, u: T, n1: T, n2: T, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let h = self.hamiltonian(eps, u, n1, n2);
        let coherent = h.commutator(rho).scale(Complex::new(T::zero(), -T::one()));
        &coherent + &dissipator_apply(self, n1, n2, rho).scale_real(eps)
    }
}

fn lindblad_term<T: Real>(jump: &ComplexMatrix<T>, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let jd = jump.adjoint();
    let jdj = jd.matmul(jump);
    let sandwich = jump.matmul(rho).matmul(&jd).scale_real(T::lit(2.0));
    &(&sandwich - &jdj.matmul(rho)) - &rho.matmul(&jdj)
}

/// `𝒟ⁿ(ρ) = Σⱼ Ωⱼ(nⱼ+1)(2σ⁻ⱼρσ⁺ⱼ − σ⁺ⱼσ⁻ⱼρ − ρσ⁺ⱼσ⁻ⱼ) + Ωⱼnⱼ(2σ⁺ⱼρσ⁻ⱼ − σ⁻ⱼσ⁺ⱼρ − ρσ⁻ⱼσ⁺ⱼ)`.
pub fn dissipator_apply<T: Real>(ops: &SystemOperators<T>, n1: T, n2: T, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let mut out = ComplexMatrix::zeros(DIM, DIM);
    for (j, n) in [n1, n2].into_iter().enumerate() {
        let down = lindblad_term(&ops.lowering[j], rho).scale_real(ops.decay[j] * (n + T::one()));
        let up = lindblad_term(&ops.raising[j], rho).scale_real(ops.decay[j] * n);
        out = &(&out + &down) + &up;
    }
    out
}
