//! Isotropic compliance tensors in two dimensions.
//!
//! Every supported law has the form `A tau = alpha tau - beta tr(tau) I`,
//! which is also the 2D deviatoric split
//! `A tau = P_D tau_D + P_T tr(tau) / 2 I` with `tau_D = tau - tr(tau) / 2 I`,
//! `P_D = alpha` and `P_T = alpha - 2 beta`.

use crate::error::{HdgError, Result};

pub type Sym2 = [[f64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MaterialMode {
    PlaneStress { e: f64, nu: f64 },
    PlaneStrain { e: f64, nu: f64 },
    Deviatoric { p_d: f64, p_t: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplianceTensor {
    mode: MaterialMode,
    alpha: f64,
    beta: f64,
}

fn check_modulus(e: f64) -> Result<()> {
    if !(e.is_finite() && e > 0.0) {
        return Err(HdgError::InvalidArgument(format!(
            "Young's modulus must be positive, got {e}"
        )));
    }
    Ok(())
}

impl ComplianceTensor {
    /// `A sigma = (1 + nu) / E sigma - nu / E tr(sigma) I`.
    pub fn plane_stress(e: f64, nu: f64) -> Result<Self> {
        check_modulus(e)?;
        Self::from_coefficients(MaterialMode::PlaneStress { e, nu }, (1.0 + nu) / e, nu / e)
    }

    /// `A sigma = (1 + nu) / E sigma - (1 + nu) nu / E tr(sigma) I`.
    pub fn plane_strain(e: f64, nu: f64) -> Result<Self> {
        check_modulus(e)?;
        if nu >= 0.5 {
            return Err(HdgError::SingularMaterial(format!(
                "plane strain requires nu < 0.5, got {nu}"
            )));
        }
        Self::from_coefficients(
            MaterialMode::PlaneStrain { e, nu },
            (1.0 + nu) / e,
            (1.0 + nu) * nu / e,
        )
    }

    pub fn deviatoric(p_d: f64, p_t: f64) -> Result<Self> {
        if !(p_d.is_finite() && p_t.is_finite()) {
            return Err(HdgError::InvalidArgument(
                "P_D and P_T must be finite".into(),
            ));
        }
        Self::from_coefficients(
            MaterialMode::Deviatoric { p_d, p_t },
            p_d,
            0.5 * (p_d - p_t),
        )
    }

    fn from_coefficients(mode: MaterialMode, alpha: f64, beta: f64) -> Result<Self> {
        // (A tau) : tau = alpha |tau_D|^2 + (alpha - 2 beta) tr(tau)^2 / 2
        if !(alpha > 0.0 && alpha - 2.0 * beta > 0.0) {
            return Err(HdgError::SingularMaterial(format!(
                "{mode:?} is not positive definite (P_D = {alpha}, P_T = {})",
                alpha - 2.0 * beta
            )));
        }
        Ok(ComplianceTensor { mode, alpha, beta })
    }

    pub fn mode(&self) -> MaterialMode {
        self.mode
    }

    /// `(P_D, P_T)` of the deviatoric form.
    pub fn deviatoric_parameters(&self) -> (f64, f64) {
        (self.alpha, self.alpha - 2.0 * self.beta)
    }

    pub fn apply_compliance(&self, tau: &Sym2) -> Sym2 {
        let tr = tau[0][0] + tau[1][1];
        [
            [
                self.alpha * tau[0][0] - self.beta * tr,
                self.alpha * tau[0][1],
            ],
            [
                self.alpha * tau[1][0],
                self.alpha * tau[1][1] - self.beta * tr,
            ],
        ]
    }

    pub fn apply_stiffness(&self, eps: &Sym2) -> Sym2 {
        let tr = eps[0][0] + eps[1][1];
        let inv = 1.0 / self.alpha;
        let vol = self.beta / (self.alpha * (self.alpha - 2.0 * self.beta)) * tr;
        [
            [inv * eps[0][0] + vol, inv * eps[0][1]],
            [inv * eps[1][0], inv * eps[1][1] + vol],
        ]
    }

    /// The compliance restricted to the orthonormal symmetric units
    /// `E11, E22, (E12 + E21) / sqrt(2)`: entry `(a, b)` is `(A S_b) : S_a`.
    pub fn unit_matrix(&self) -> [[f64; 3]; 3] {
        let (a, b) = (self.alpha, self.beta);
        [[a - b, -b, 0.0], [-b, a - b, 0.0], [0.0, 0.0, a]]
    }
}

pub fn trace(t: &Sym2) -> f64 {
    t[0][0] + t[1][1]
}

pub fn frobenius(a: &Sym2, b: &Sym2) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}
