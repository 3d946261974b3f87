use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITER: usize = 500;

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Magnitude scale used for residual checks: `Σ |a_i| |z|^i`.
fn scale_at(c: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    c.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

fn check_input(c: &[Complex64]) -> Result<usize> {
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Err(Error::Invalid("complex_roots needs degree >= 1".into()));
    }
    if c[n].norm() <= 1e-12 {
        return Err(Error::Invalid(format!(
            "leading coefficient {} too small for root finding",
            c[n]
        )));
    }
    Ok(n)
}

/// All complex roots of `Σ c[i] x^i` by Aberth–Ehrlich iteration.
///
/// Each returned root satisfies `|p(z)| <= tol · Σ|a_i||z|^i`.
pub fn complex_roots(c: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    let n = check_input(c)?;
    // initial guesses on a circle of the Fujiwara-type radius, off-axis
    let lead = c[n];
    let radius = (0..n)
        .map(|i| (c[i] / lead).norm().powf(1.0 / (n - i) as f64))
        .fold(0.0f64, f64::max)
        .max(1e-3);
    let init: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    complex_roots_from(c, &init, tol)
}

/// Aberth–Ehrlich iteration from caller-supplied starting points (used for
/// warm starts along a continuation path).
pub fn complex_roots_from(c: &[Complex64], init: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    let n = check_input(c)?;
    if init.len() != n {
        return Err(Error::Invalid(format!("{} starting points for degree {n}", init.len())));
    }
    let mut z = init.to_vec();
    // nudge coincident starting points apart
    for i in 0..n {
        for j in 0..i {
            if (z[i] - z[j]).norm() < 1e-14 {
                z[i] += Complex64::new(1e-9 * (i as f64 + 1.0), 1e-9);
            }
        }
    }
    let eps = f64::EPSILON;
    for _ in 0..MAX_ITER {
        let mut max_step = 0.0f64;
        let mut converged = true;
        for i in 0..n {
            let (p, dp) = horner(c, z[i]);
            if p.norm() <= 4.0 * eps * scale_at(c, z[i]) {
                continue;
            }
            converged = false;
            let ratio = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += (z[i] - z[j]).inv();
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if converged || max_step < 1e-15 {
            break;
        }
    }
    let worst = z
        .iter()
        .map(|&r| horner(c, r).0.norm() / scale_at(c, r))
        .fold(0.0f64, f64::max);
    if !(worst <= tol) {
        return Err(Error::NonConvergence { iterations: MAX_ITER, residual: worst });
    }
    Ok(z)
}

/// Real-coefficient convenience wrapper.
pub fn complex_roots_real(c: &[f64], tol: f64) -> Result<Vec<Complex64>> {
    let cc: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    complex_roots(&cc, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn i_and_minus_i() {
        let mut r = complex_roots_real(&[1.0, 0.0, 1.0], 1e-12).unwrap();
        r.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((r[0] - Complex64::new(0.0, -1.0)).norm() < 1e-10);
        assert!((r[1] - Complex64::new(0.0, 1.0)).norm() < 1e-10);
    }

    #[test]
    fn cubic_integers() {
        // (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
        let r = sorted(complex_roots_real(&[-6.0, 11.0, -6.0, 1.0], 1e-12).unwrap());
        for (z, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((z - Complex64::new(want, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn degenerate_inputs() {
        assert!(complex_roots_real(&[1.0], 1e-12).is_err());
        assert!(complex_roots_real(&[1.0, 1e-15], 1e-12).is_err());
    }
}
