use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default relative exclusion radius around the cone `P = 0`.
pub const ON_CONE_EPSILON: f64 = 1e-12;

/// Sign of the boundary-value regularisation `(P ± i0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    /// The opposite branch; spatial `(P + i0)` pairs with spectral `(Q - i0)`.
    pub fn conjugate(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        })
    }
}

/// Logarithm of `(P ± i0)`: `ln|P|` plus `±i pi` on the negative axis.
pub fn ln_regularized(p: f64, branch: Branch, epsilon: f64) -> Result<Complex64> {
    if !p.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite P = {p}")));
    }
    if p.abs() <= epsilon {
        return Err(Error::OnCone {
            value: p.abs(),
            epsilon,
        });
    }
    let phase = if p > 0.0 { 0.0 } else { branch.sign() * PI };
    Ok(Complex64::new(p.abs().ln(), phase))
}

/// `(P ± i0)^lambda` with an absolute on-cone exclusion radius `epsilon`.
pub fn power_regularized_eps(
    p: f64,
    lambda: Complex64,
    branch: Branch,
    epsilon: f64,
) -> Result<Complex64> {
    let l = ln_regularized(p, branch, epsilon)?;
    Ok((lambda * l).exp())
}

/// `(P ± i0)^lambda`: `P^lambda` for `P > 0`, `|P|^lambda e^{±i pi lambda}`
/// for `P < 0`.
pub fn power_regularized(p: f64, lambda: Complex64, branch: Branch) -> Result<Complex64> {
    power_regularized_eps(p, lambda, branch, ON_CONE_EPSILON)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn positive_side_is_the_real_power() {
        let v = power_regularized(4.0, c(0.5), Branch::Plus).unwrap();
        assert!((v - c(2.0)).norm() < 1e-15);
    }

    #[test]
    fn negative_side_picks_up_the_branch_phase() {
        let plus = power_regularized(-1.0, c(0.5), Branch::Plus).unwrap();
        let minus = power_regularized(-1.0, c(0.5), Branch::Minus).unwrap();
        assert!((plus - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((minus - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn cone_is_excluded() {
        assert!(matches!(
            power_regularized(1e-13, c(0.5), Branch::Plus),
            Err(Error::OnCone { .. })
        ));
        assert!(matches!(
            power_regularized(0.0, c(-0.5), Branch::Minus),
            Err(Error::OnCone { .. })
        ));
    }

    proptest! {
        #[test]
        fn same_branch_powers_are_inverse(p in -1e3f64..-1e-3, lam_re in -3.0f64..3.0, lam_im in -2.0f64..2.0) {
            let lam = Complex64::new(lam_re, lam_im);
            for branch in [Branch::Plus, Branch::Minus] {
                let a = power_regularized(p, lam, branch).unwrap();
                let b = power_regularized(p, -lam, branch).unwrap();
                prop_assert!((a * b - c(1.0)).norm() < 1e-12);
            }
        }

        #[test]
        fn branches_are_complex_conjugates(p in -1e3f64..-1e-3, lam in -3.0f64..3.0) {
            let a = power_regularized(p, c(lam), Branch::Plus).unwrap();
            let b = power_regularized(p, c(lam), Branch::Minus).unwrap();
            prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm());
        }

        #[test]
        fn mixed_branch_product_is_a_full_turn(p in -1e3f64..-1e-3, lam in -3.0f64..3.0) {
            // (P + i0)^l (P - i0)^(-l) = e^{2 pi i l}, not 1.
            let a = power_regularized(p, c(lam), Branch::Plus).unwrap();
            let b = power_regularized(p, c(-lam), Branch::Minus).unwrap();
            let turn = Complex64::new(0.0, 2.0 * PI * lam).exp();
            prop_assert!((a * b - turn).norm() < 1e-12);
        }
}
}
