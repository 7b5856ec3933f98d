//! Stationary cubic nonlinear Schrödinger equations in radial form.
//!
//! ```text
//! repulsive:   ψ'' + (N-1)/x ψ' + (1 - 2ψ²) ψ = 0
//! attractive:  ψ'' + (N-1)/x ψ' + (2ψ² - 1) ψ = 0
//! ```
//!
//! Both admit the constant solutions `ψ = 0` and `ψ = ±1/√2`. The amplitude
//! `ψ` is real throughout.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Term};
use crate::oscillation::ScalarFn;

/// The nonzero constant solution `+1/√2`.
pub const PSI_PLUS: f64 = FRAC_1_SQRT_2;

/// Number of spatial dimensions; sets the inertial term `(N-1)ψ'/x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Dimension {
    One,
    Two,
    Three,
}

impl Dimension {
    pub fn new(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Dimension::One),
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            _ => Err(Error::Domain {
                what: "dimension",
                value: n as f64,
            }),
        }
    }

    pub fn get(self) -> u8 {
        match self {
            Dimension::One => 1,
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }

    /// Coefficient `N - 1` of `ψ'/x`.
    pub fn inertia(self) -> f64 {
        f64::from(self.get() - 1)
    }
}

impl TryFrom<u8> for Dimension {
    type Error = Error;
    fn try_from(n: u8) -> Result<Self> {
        Dimension::new(n)
    }
}

impl From<Dimension> for u8 {
    fn from(d: Dimension) -> u8 {
        d.get()
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interaction {
    Repulsive,
    Attractive,
}

impl fmt::Display for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interaction::Repulsive => "repulsive",
            Interaction::Attractive => "attractive",
        })
    }
}

/// External potential added to the restoring coefficient.
#[derive(Clone)]
pub struct Potential {
    name: String,
    f: ScalarFn,
}

impl Potential {
    pub fn new<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                term: Term::Potential,
                x,
            })
        }
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Potential").field(&self.name).finish()
    }
}

/// Which stationary equation to solve.
#[derive(Debug, Clone)]
pub struct EquationSpec {
    pub dimension: Dimension,
    pub interaction: Interaction,
    pub potential: Option<Potential>,
    /// Scale of the nonlinearity `g`. The equations are already scaled so
    /// that `ψ(0) ∝ 1/√|g|`; this is bookkeeping only.
    pub nonlinearity_note: Option<f64>,
}

impl EquationSpec {
    pub fn new(dimension: Dimension, interaction: Interaction) -> Self {
        Self {
            dimension,
            interaction,
            potential: None,
            nonlinearity_note: None,
        }
    }

    pub fn repulsive(dimension: Dimension) -> Self {
        Self::new(dimension, Interaction::Repulsive)
    }

    pub fn attractive(dimension: Dimension) -> Self {
        Self::new(dimension, Interaction::Attractive)
    }

    pub fn with_potential(mut self, potential: Potential) -> Self {
        self.potential = Some(potential);
        self
    }

    pub fn is_free(&self) -> bool {
        self.potential.is_none()
    }
}

/// Cauchy data `(ψ(0), ψ'(0))` at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub psi0: f64,
    pub dpsi0: f64,
}

impl BoundaryCondition {
    /// `ψ'(0) = 0`, valid in every dimension.
    pub fn at_rest(psi0: f64) -> Result<Self> {
        Self::new(Dimension::Two, psi0, 0.0)
    }

    /// Rejects a nonzero slope for `N ≥ 2`, where `(N-1)ψ'/x` is singular.
    pub fn new(dimension: Dimension, psi0: f64, dpsi0: f64) -> Result<Self> {
        if !psi0.is_finite() || !dpsi0.is_finite() {
            return Err(Error::Boundary(format!(
                "non-finite data psi0 = {psi0}, dpsi0 = {dpsi0}"
            )));
        }
        if dimension != Dimension::One && dpsi0 != 0.0 {
            return Err(Error::Boundary(format!(
                "dpsi0 must be 0 for dimension {dimension}, got {dpsi0}"
            )));
        }
        Ok(Self { psi0, dpsi0 })
    }

    pub fn check(&self, dimension: Dimension) -> Result<()> {
        Self::new(dimension, self.psi0, self.dpsi0).map(|_| ())
    }
}

/// Free-particle restoring coefficient.
///
/// `1 - 2ψ²` is evaluated as `2(ψ₊ - ψ)(ψ₊ + ψ)` so that the floating-point
/// value of `ψ₊` is an exact root and constant solutions stay constant.
fn free_coefficient(interaction: Interaction, psi: f64) -> f64 {
    let repulsive = 2.0 * (PSI_PLUS - psi) * (PSI_PLUS + psi);
    match interaction {
        Interaction::Repulsive => repulsive,
        Interaction::Attractive => -repulsive,
    }
}

/// Coefficient of `ψ` in the equation read as `ψ'' + b ψ' + c ψ = 0`.
pub fn effective_coefficient(spec: &EquationSpec, psi: f64, x: f64) -> Result<f64> {
    let mut c = free_coefficient(spec.interaction, psi);
    if let Some(v) = &spec.potential {
        c += v.eval(x)?;
    }
    Ok(c)
}

/// Constant solutions `[-1/√2, 0, 1/√2]` of the free equation.
pub fn trivial_solutions(spec: &EquationSpec) -> Result<[f64; 3]> {
    if !spec.is_free() {
        return Err(Error::Unsupported(
            "constant solutions are only known for the free equation",
        ));
    }
    Ok([-PSI_PLUS, 0.0, PSI_PLUS])
}

/// Pointwise criterion `c(ψ) > 0` of the free equation:
/// `ψ² < 1/2` when repulsive, `ψ² > 1/2` when attractive.
pub fn predicts_oscillation(spec: &EquationSpec, psi: f64) -> bool {
    free_coefficient(spec.interaction, psi) > 0.0
}

/// First-order system `(ψ', ψ'')` for `x > 0`.
pub fn rhs(spec: &EquationSpec, x: f64, state: [f64; 2]) -> Result<[f64; 2]> {
    if !(x > 0.0) {
        return Err(Error::Singular { x });
    }
    let [psi, dpsi] = state;
    let c = effective_coefficient(spec, psi, x)?;
    Ok([dpsi, -(spec.dimension.inertia() / x) * dpsi - c * psi])
}

/// First integral of the free `N = 1` equation,
/// `E = ψ'²/2 ± (ψ²/2 - ψ⁴/2)` with `+` when repulsive.
pub fn first_integral(interaction: Interaction, psi: f64, dpsi: f64) -> f64 {
    let p2 = psi * psi;
    let v = 0.5 * p2 - 0.5 * p2 * p2;
    match interaction {
        Interaction::Repulsive => 0.5 * dpsi * dpsi + v,
        Interaction::Attractive => 0.5 * dpsi * dpsi - v,
    }
}

/// State just off the origin where integration begins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartState {
    pub x: f64,
    pub psi: f64,
    pub dpsi: f64,
}

/// Moves the Cauchy data from `x = 0` to `x = ε`.
///
/// For `N ≥ 2` the term `ψ'/x` tends to `ψ''(0)`, so `ψ''(0) = -c ψ(0) / N`
/// and a second-order Taylor step is taken. For `N = 1` the equation is
/// regular at the origin and is stepped directly with classical RK4.
pub fn taylor_start(spec: &EquationSpec, bc: &BoundaryCondition, epsilon: f64) -> Result<StartState> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Domain {
            what: "epsilon",
            value: epsilon,
        });
    }
    bc.check(spec.dimension)?;
    match spec.dimension {
        Dimension::One => {
            let f = |x: f64, y: [f64; 2]| -> Result<[f64; 2]> {
                let c = effective_coefficient(spec, y[0], x)?;
                Ok([y[1], -c * y[0]])
            };
            const SUBSTEPS: usize = 4;
            let h = epsilon / SUBSTEPS as f64;
            let mut y = [bc.psi0, bc.dpsi0];
            for i in 0..SUBSTEPS {
                let x = i as f64 * h;
                let k1 = f(x, y)?;
                let k2 = f(x + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]])?;
                let k3 = f(x + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]])?;
                let k4 = f(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]])?;
                for j in 0..2 {
                    y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                }
            }
            Ok(StartState {
                x: epsilon,
                psi: y[0],
                dpsi: y[1],
            })
        }
        Dimension::Two | Dimension::Three => {
            let n = f64::from(spec.dimension.get());
            let c0 = effective_coefficient(spec, bc.psi0, 0.0)?;
            let curvature = -c0 * bc.psi0 / n;
            Ok(StartState {
                x: epsilon,
                psi: bc.psi0 + 0.5 * curvature * epsilon * epsilon,
                dpsi: curvature * epsilon,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn rep(n: u8) -> EquationSpec {
        EquationSpec::repulsive(Dimension::new(n).unwrap())
    }

    fn att(n: u8) -> EquationSpec {
        EquationSpec::attractive(Dimension::new(n).unwrap())
    }

    #[test]
    fn coefficient_examples() {
        assert_relative_eq!(effective_coefficient(&rep(2), 0.0, 1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_eq!(effective_coefficient(&rep(2), PSI_PLUS, 1.0).unwrap(), 0.0);
        assert_relative_eq!(effective_coefficient(&att(2), 1.0, 1.0).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn potential_is_additive() {
        let spec = rep(1).with_potential(Potential::new("ramp", |x| 0.5 * x));
        assert_relative_eq!(effective_coefficient(&spec, 0.0, 2.0).unwrap(), 2.0, max_relative = 1e-15);
        let bad = rep(1).with_potential(Potential::new("pole", |x| 1.0 / x));
        assert!(matches!(
            effective_coefficient(&bad, 0.0, 0.0),
            Err(Error::Evaluation { term: Term::Potential, .. })
        ));
        assert!(trivial_solutions(&spec).is_err());
    }

    #[test]
    fn trivial_solutions_are_exact_roots() {
        for spec in [rep(1), rep(2), att(3)] {
            let roots = trivial_solutions(&spec).unwrap();
            assert_eq!(roots, [-0.7071067811865476, 0.0, 0.7071067811865476]);
            for r in roots {
                for x in [0.01, 1.0, 59.0] {
                    assert_eq!(effective_coefficient(&spec, r, x).unwrap() * r, 0.0);
                    assert_eq!(rhs(&spec, x, [r, 0.0]).unwrap(), [0.0, 0.0]);
                }
            }
        }
    }

    #[test]
    fn oscillation_prediction_examples() {
        assert!(predicts_oscillation(&rep(2), 0.7));
        assert!(!predicts_oscillation(&rep(2), PSI_PLUS));
        assert!(!predicts_oscillation(&att(2), PSI_PLUS));
        assert!(!predicts_oscillation(&att(2), 0.65));
        assert!(predicts_oscillation(&att(2), 0.75));
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(rhs(&rep(2), 1.0, [PSI_PLUS, 0.0]).unwrap(), [0.0, 0.0]);
        let [_, dd] = rhs(&rep(1), 1.0, [0.5, 0.0]).unwrap();
        assert_relative_eq!(dd, -0.25, max_relative = 1e-15);
        let [d, dd] = rhs(&att(3), 2.0, [1.0, 0.1]).unwrap();
        assert_eq!(d, 0.1);
        assert_relative_eq!(dd, -1.1, max_relative = 1e-15);
        assert!(matches!(rhs(&rep(2), 0.0, [1.0, 0.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn taylor_start_examples() {
        let bc = BoundaryCondition::at_rest(0.7).unwrap();
        let s = taylor_start(&rep(2), &bc, 1e-3).unwrap();
        // ψ''(0) = -(1 - 0.98)(0.7)/2 = -0.007
        assert_relative_eq!(s.dpsi / 1e-3, -0.007, max_relative = 1e-12);
        assert_relative_eq!(s.psi, 0.7 - 3.5e-9, max_relative = 1e-15);

        let bc = BoundaryCondition::at_rest(PSI_PLUS).unwrap();
        for spec in [rep(1), rep(2), att(2), att(3)] {
            let s = taylor_start(&spec, &bc, 1e-3).unwrap();
            assert_eq!((s.psi, s.dpsi), (PSI_PLUS, 0.0));
        }

        let bc = BoundaryCondition::at_rest(1.0).unwrap();
        let s = taylor_start(&att(2), &bc, 1e-3).unwrap();
        assert_relative_eq!(s.dpsi / 1e-3, -0.5, max_relative = 1e-12);

        assert!(taylor_start(&att(2), &bc, 0.0).is_err());
        assert!(taylor_start(&att(2), &bc, -1e-3).is_err());
    }

    #[test]
    fn taylor_start_one_dimension_follows_sech() {
        let bc = BoundaryCondition::new(Dimension::One, 1.0, 0.0).unwrap();
        let eps = 1e-3;
        let s = taylor_start(&att(1), &bc, eps).unwrap();
        let sech = 1.0 / eps.cosh();
        assert_relative_eq!(s.psi, sech, max_relative = 1e-15);
        assert_relative_eq!(s.dpsi, -sech * eps.tanh(), max_relative = 1e-12);
    }

    #[test]
    fn boundary_rejects_slope_off_axis() {
        assert!(BoundaryCondition::new(Dimension::Two, 0.5, 0.1).is_err());
        assert!(BoundaryCondition::new(Dimension::Three, 0.5, -0.1).is_err());
        assert!(BoundaryCondition::new(Dimension::One, 0.0, 0.5).is_ok());
        assert!(BoundaryCondition::new(Dimension::One, f64::NAN, 0.0).is_err());
        assert!(Dimension::new(4).is_err());
    }

    proptest! {
        #[test]
        fn sign_duality(psi in -10.0f64..10.0, x in 0.01f64..100.0) {
            let r = effective_coefficient(&rep(2), psi, x).unwrap();
            let a = effective_coefficient(&att(2), psi, x).unwrap();
            prop_assert_eq!(r, -a);
        }

        #[test]
        fn exactly_one_regime_oscillates(psi in -10.0f64..10.0) {
            prop_assume!((psi * psi - 0.5).abs() > 1e-12);
            prop_assert!(predicts_oscillation(&rep(1), psi) ^ predicts_oscillation(&att(1), psi));
        }

        #[test]
        fn criterion_matches_density_threshold(psi in -3.0f64..3.0) {
            prop_assume!((psi * psi - 0.5).abs() > 1e-12);
            prop_assert_eq!(predicts_oscillation(&rep(3), psi), psi * psi < 0.5);
            prop_assert_eq!(predicts_oscillation(&att(3), psi), psi * psi > 0.5);
        }
    }
}
