use serde::{Deserialize, Serialize};

use super::ModelError;

/// Pressure law branch, selected by the adiabatic exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `gamma > 1`
    Isentropic,
    /// `gamma == 1`
    Isothermal,
}

/// Physical constants of the model: `p(n) = A n^gamma`, relaxation time
/// `tau`, background density `nbar`.
///
/// Derived constants are computed on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub a: f64,
    pub gamma: f64,
    pub tau: f64,
    pub nbar: f64,
}

impl Params {
    pub fn new(a: f64, gamma: f64, tau: f64, nbar: f64) -> Result<Self, ModelError> {
        let p = Self { a, gamma, tau, nbar };
        p.validate()?;
        Ok(p)
    }

    /// `A = 1, gamma = 2, tau = 1/2, nbar = 1`.
    pub fn reference() -> Self {
        Self {
            a: 1.0,
            gamma: 2.0,
            tau: 0.5,
            nbar: 1.0,
        }
    }

    pub fn with_tau(self, tau: f64) -> Self {
        Self { tau, ..self }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let check = |name: &str, v: f64, ok: bool| {
            if v.is_finite() && ok {
                Ok(())
            } else {
                Err(ModelError::InvalidParams(format!("{name} = {v}")))
            }
        };
        check("A", self.a, self.a > 0.0)?;
        check("gamma", self.gamma, self.gamma >= 1.0)?;
        check("tau", self.tau, self.tau > 0.0)?;
        check("nbar", self.nbar, self.nbar > 0.0)
    }

    pub fn branch(&self) -> Branch {
        if self.gamma == 1.0 {
            Branch::Isothermal
        } else {
            Branch::Isentropic
        }
    }

    /// Sound speed at the background density, `sqrt(A gamma nbar^(gamma-1))`.
    pub fn psi_bar(&self) -> f64 {
        (self.a * self.gamma * self.nbar.powf(self.gamma - 1.0)).sqrt()
    }

    /// Linear density response `h'(0) = (A gamma)^{-1/2} nbar^{(3-gamma)/2}`.
    pub fn c(&self) -> f64 {
        (self.a * self.gamma).powf(-0.5) * self.nbar.powf(0.5 * (3.0 - self.gamma))
    }

    /// Critical Besov index `1 + N/2`.
    pub fn sigma(dim: usize) -> f64 {
        1.0 + dim as f64 / 2.0
    }

    /// Coefficient `(gamma - 1)/2` of the quadratic terms; zero when isothermal.
    pub fn k(&self) -> f64 {
        0.5 * (self.gamma - 1.0)
    }

    pub fn sound_speed(&self, n: f64) -> f64 {
        (self.a * self.gamma * n.powf(self.gamma - 1.0)).sqrt()
    }

    /// `(gamma-1)/2 m + psi_bar`; must stay positive on the isentropic branch.
    pub fn domain_margin(&self, m: f64) -> f64 {
        self.k() * m + self.psi_bar()
    }

    /// Density represented by the symmetric variable.
    pub fn density(&self, m: f64) -> f64 {
        self.nbar + self.h(m)
    }

    /// `h(m) = n(m) - nbar`.
    pub fn h(&self, m: f64) -> f64 {
        match self.branch() {
            Branch::Isothermal => self.nbar * (m / self.a.sqrt()).exp_m1(),
            Branch::Isentropic => {
                let x = self.k() * m / self.psi_bar();
                let p = 2.0 / (self.gamma - 1.0);
                self.nbar * (p * x.ln_1p()).exp_m1()
            }
        }
    }

    pub fn h_prime(&self, m: f64) -> f64 {
        match self.branch() {
            Branch::Isothermal => self.nbar / self.a.sqrt() * (m / self.a.sqrt()).exp(),
            Branch::Isentropic => {
                let x = self.k() * m / self.psi_bar();
                let p = 2.0 / (self.gamma - 1.0);
                self.nbar / self.psi_bar() * (1.0 + x).powf(p - 1.0)
            }
        }
    }

    /// Symmetric variable of a density: `2/(gamma-1) (psi(n) - psi_bar)` or
    /// `sqrt(A) ln(n/nbar)`.
    pub fn symmetric(&self, n: f64) -> f64 {
        let r = (n / self.nbar).ln();
        match self.branch() {
            Branch::Isothermal => self.a.sqrt() * r,
            Branch::Isentropic => self.psi_bar() / self.k() * (self.k() * r).exp_m1(),
        }
    }

    /// Enthalpy `H` with `grad H = grad p(n) / n`.
    pub fn enthalpy(&self, n: f64) -> f64 {
        match self.branch() {
            Branch::Isothermal => self.a * n.ln(),
            Branch::Isentropic => {
                self.a * self.gamma / (self.gamma - 1.0) * n.powf(self.gamma - 1.0)
            }
        }
    }
}
