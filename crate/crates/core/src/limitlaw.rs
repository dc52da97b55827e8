//! The Wigner-Gurau law: moments, Stieltjes transform, density and the
//! dilated laws obtained by contraction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::counting::{binomial, fuss_catalan};
use crate::error::{Error, Result};

/// Default imaginary offset for Stieltjes inversion.
pub const DEFAULT_ETA: f64 = 1e-4;

/// Residual bound every returned Stieltjes value satisfies.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// `z_c = (p−1)^{p−1}/p^p`.
pub fn z_c(p: usize) -> f64 {
    let p = p as f64;
    (p - 1.0).powf(p - 1.0) / p.powf(p)
}

/// Support endpoint `ω_c = √(p^p/(p−1)^{p−1})`.
pub fn omega_c(p: usize) -> f64 {
    (1.0 / z_c(p)).sqrt()
}

/// `n`-th moment: zero for odd `n`, `F_p(n/2)` for even `n`.
pub fn moment(p: usize, n: usize) -> u128 {
    if n % 2 == 1 {
        0
    } else {
        fuss_catalan(p as u64, n as u64 / 2)
    }
}

fn residual(p: usize, z: Complex64, r: Complex64) -> Complex64 {
    z.powi(p as i32 - 2) * r.powi(p as i32) - z * r + 1.0
}

/// Newton iterations on `z^{p−2} R^p − z R + 1` from `r`.
fn newton(p: usize, z: Complex64, mut r: Complex64, max_iter: usize) -> Option<Complex64> {
    let zp = z.powi(p as i32 - 2);
    for _ in 0..max_iter {
        let rp1 = r.powi(p as i32 - 1);
        let f = zp * rp1 * r - z * r + 1.0;
        let df = zp * (p as f64) * rp1 - z;
        if df.norm() == 0.0 || !df.is_finite() {
            return None;
        }
        let step = f / df;
        r -= step;
        if !r.is_finite() {
            return None;
        }
        if step.norm() <= 1e-15 * r.norm().max(1e-300) {
            return Some(r);
        }
    }
    (residual(p, z, r).norm() < RESIDUAL_TOL).then_some(r)
}

/// `𝓡(z)`, the root of `z^{p−2} 𝓡^p − z 𝓡 + 1 = 0` on the branch behaving
/// like `1/z` at infinity.
///
/// The root is followed by Newton continuation along the ray from
/// `4 ω_c z/|z|` down to `z`, halving the step whenever an update fails to
/// converge, moves too far, or leaves the half-plane opposite to `z`.
pub fn stieltjes(p: usize, z: Complex64) -> Result<Complex64> {
    if p < 2 {
        return Err(Error::ContractViolation("order must be at least 2".into()));
    }
    let omega = omega_c(p);
    if !z.is_finite() {
        return Err(Error::Domain(format!("z = {z} is not finite")));
    }
    if z.im == 0.0 && z.re.abs() <= omega + 1e-9 {
        return Err(Error::Domain(format!(
            "z = {} lies on the support [-{omega}, {omega}]",
            z.re
        )));
    }
    let modulus = z.norm();
    let dir = z / modulus;
    let start = modulus.max(4.0 * omega);
    let at = |s: f64| dir * (start + s * (modulus - start));
    let sign_ok = |w: Complex64, r: Complex64| w.im <= 0.0 || r.im <= 1e-14;

    let mut r = newton(p, at(0.0), 1.0 / at(0.0), 100)
        .ok_or_else(|| Error::Numerical(format!("no root near 1/z at |z| = {start}")))?;
    let mut s = 0.0f64;
    let mut ds: f64 = if start > modulus { 1.0 / 32.0 } else { 1.0 };
    while s < 1.0 {
        let s_next = (s + ds).min(1.0);
        let w = at(s_next);
        let accepted = newton(p, w, r, 12)
            .filter(|&cand| (cand - r).norm() <= 0.25 * r.norm().max(1e-3) && sign_ok(w, cand));
        match accepted {
            Some(cand) => {
                r = cand;
                s = s_next;
                ds = (ds * 2.0).min(0.25);
            }
            None => {
                ds /= 2.0;
                if ds < 1e-12 {
                    return Err(Error::Numerical(format!(
                        "continuation stalled at s = {s} for z = {z}"
                    )));
                }
            }
        }
    }
    let r = newton(p, z, r, 50).unwrap_or(r);
    let res = residual(p, z, r).norm();
    if res >= RESIDUAL_TOL {
        return Err(Error::Numerical(format!("residual {res:e} at z = {z}")));
    }
    if z.im > 0.0 && r.im >= 0.0 {
        return Err(Error::Numerical(format!("wrong branch at z = {z}")));
    }
    Ok(r)
}

/// `−Im 𝓡(y + iη)/π` combined at `η` and `η/2` to cancel the `O(η)` bias.
pub fn density_by_inversion(p: usize, y: f64, eta: f64) -> Result<f64> {
    let f = |h: f64| -> Result<f64> {
        Ok(-stieltjes(p, Complex64::new(y, h))?.im / std::f64::consts::PI)
    };
    Ok((2.0 * f(eta / 2.0)? - f(eta)?).max(0.0))
}

/// Density of the law; closed forms for `p = 2, 3`, inversion otherwise.
pub fn density(p: usize, y: f64) -> Result<f64> {
    let omega = omega_c(p);
    if y.abs() >= omega {
        return Ok(0.0);
    }
    match p {
        2 => Ok((4.0 - y * y).sqrt() / (2.0 * std::f64::consts::PI)),
        3 => {
            if y == 0.0 {
                return Ok(f64::INFINITY);
            }
            let x = 4.0 * y * y / 27.0;
            let s = (1.0 - x).sqrt();
            // (1 − s)^{1/3} written as (x/(1+s))^{1/3} to avoid cancellation
            let bracket = (1.0 + s).cbrt() - (x / (1.0 + s)).cbrt();
            Ok(
                3f64.sqrt() / (2f64.powf(4.0 / 3.0) * std::f64::consts::PI * y.abs().cbrt())
                    * bracket,
            )
        }
        _ => density_by_inversion(p, y, DEFAULT_ETA),
    }
}

/// `∫ yⁿ μ(dy)` by double-exponential quadrature on `[−ω_c, 0]` and `[0, ω_c]`.
pub fn law_moment_quadrature(p: usize, n: usize) -> Result<f64> {
    if n > 8 {
        return Err(Error::ContractViolation(
            "quadrature moments are limited to n <= 8".into(),
        ));
    }
    let omega = omega_c(p);
    let failure = std::cell::RefCell::new(None);
    let integrand = |y: f64| match density(p, y) {
        Ok(d) if d.is_finite() => y.powi(n as i32) * d,
        Ok(_) => 0.0,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let tol = 1e-11;
    let left = quadrature::integrate(integrand, -omega, 0.0, tol);
    let right = quadrature::integrate(integrand, 0.0, omega, tol);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let err = left.error_estimate + right.error_estimate;
    if err.is_nan() || err >= 1e-7 {
        return Err(Error::Numerical(format!(
            "quadrature error estimate {err:e}"
        )));
    }
    Ok(left.integral + right.integral)
}

/// The law of order `p` dilated so that `μ(y) = d · μ_p(d y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub p: usize,
    pub dilation: f64,
}

impl LimitLaw {
    pub fn new(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::ContractViolation("order must be at least 2".into()));
        }
        Ok(LimitLaw { p, dilation: 1.0 })
    }

    pub fn z_c(&self) -> f64 {
        z_c(self.p)
    }

    /// Support endpoint of the (dilated) law.
    pub fn support(&self) -> f64 {
        omega_c(self.p) / self.dilation
    }

    /// `n`-th moment `E[Yⁿ] = moment(p, n)/dⁿ`.
    pub fn moment(&self, n: usize) -> f64 {
        moment(self.p, n) as f64 / self.dilation.powi(n as i32)
    }

    pub fn density(&self, y: f64) -> Result<f64> {
        Ok(self.dilation * density(self.p, y * self.dilation)?)
    }

    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.dilation * stieltjes(self.p, z * self.dilation)?)
    }
}

/// Limit of the spectral moments of a GOTE tensor contracted `k` times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractedLaw {
    pub p: usize,
    pub k: usize,
    pub law: LimitLaw,
}

impl ContractedLaw {
    /// `C(p−1, k)`, the square of the dilation.
    pub fn binomial(&self) -> u128 {
        binomial(self.p as u64 - 1, self.k as u64).expect("small order")
    }

    pub fn scale(&self) -> f64 {
        self.law.dilation
    }

    pub fn support(&self) -> f64 {
        self.law.support()
    }

    /// Squared support endpoint as an exact fraction
    /// `(p−k)^{p−k} / (C(p−1,k) (p−k−1)^{p−k−1})`, reduced.
    pub fn support_squared_exact(&self) -> (u128, u128) {
        let q = (self.p - self.k) as u128;
        let num = q.pow(q as u32);
        let den = self.binomial() * (q - 1).pow(q as u32 - 1);
        let g = gcd(num, den);
        (num / g, den / g)
    }

    /// `C(p−1,k)^{−n/2} · moment(p−k, n)`.
    pub fn moment(&self, n: usize) -> f64 {
        self.law.moment(n)
    }

    pub fn density(&self, y: f64) -> Result<f64> {
        self.law.density(y)
    }
}

pub fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The dilated law of order `p − k` with scale `√C(p−1, k)`.
pub fn contracted_law(p: usize, k: usize) -> Result<ContractedLaw> {
    if p < 3 || k > p - 2 {
        return Err(Error::ContractViolation(format!(
            "contraction depth k = {k} needs p >= 3 and k <= p - 2"
        )));
    }
    let c = binomial(p as u64 - 1, k as u64).expect("small order");
    Ok(ContractedLaw {
        p,
        k,
        law: LimitLaw {
            p: p - k,
            dilation: (c as f64).sqrt(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_and_constants() {
        assert_eq!(moment(3, 1), 0);
        assert_eq!(moment(3, 2), 1);
        assert_eq!(moment(3, 4), 3);
        assert!((omega_c(3) - 2.598).abs() < 1e-3);
        assert!((omega_c(2) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn semicircle_transform() {
        let r = stieltjes(2, Complex64::new(3.0, 0.0)).unwrap();
        assert!((r.re - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!(r.im.abs() < 1e-15);
        let far = Complex64::new(0.0, 1e3);
        assert!((stieltjes(3, far).unwrap() * far - 1.0).norm() < 1e-5);
    }

    #[test]
    fn support_is_refused() {
        assert!(matches!(
            stieltjes(3, Complex64::new(1.0, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(stieltjes(3, Complex64::new(1.0, 1e-3)).is_ok());
    }

    #[test]
    fn closed_densities() {
        assert!((density(2, 0.0).unwrap() - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(density(3, omega_c(3) + 0.1).unwrap(), 0.0);
        for y in [0.3, 1.0, 2.0, 2.5] {
            let inv = density_by_inversion(3, y, DEFAULT_ETA).unwrap();
            assert!((inv - density(3, y).unwrap()).abs() < 1e-4, "y = {y}");
        }
    }

    #[test]
    fn contracted() {
        let c = contracted_law(3, 1).unwrap();
        assert_eq!(c.support_squared_exact(), (2, 1));
        assert!((c.support() - 2f64.sqrt()).abs() < 1e-15);
        let base = contracted_law(4, 0).unwrap();
        assert_eq!(base.scale(), 1.0);
        assert!(contracted_law(4, 3).is_err());
        assert!((c.moment(2) - 0.5).abs() < 1e-15);
    }
}
