//! Independent closed-form and root-finding references.

use crate::error::{Error, Result};

/// Ground energy of two bosons in a hard-wall box `[0, L]` with
/// `H = -d1^2 - d2^2 + 2c delta(x1 - x2)`.
///
/// Uses the Bethe equations for open boundaries,
/// `k1 L = pi - atan((k1 - k2)/c) - atan((k1 + k2)/c)` and
/// `k2 L = 2 pi - atan((k2 - k1)/c) - atan((k1 + k2)/c)`, with
/// `E = k1^2 + k2^2`. Solved by Newton's method with continuation in `c`
/// from the impenetrable end.
pub fn two_body_box_energy(c: f64, length: f64) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "coupling must be > 0, got {c}"
        )));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "box length must be > 0, got {length}"
        )));
    }
    let pi = std::f64::consts::PI;
    let mut k = [pi / length, 2.0 * pi / length];
    let start = (1e8 / length).max(10.0 * c);
    let steps = 60;
    for s in 0..=steps {
        let cs = start * (c / start).powf(s as f64 / steps as f64);
        k = newton(cs, length, k)?;
    }
    Ok(k[0] * k[0] + k[1] * k[1])
}

fn newton(c: f64, l: f64, mut k: [f64; 2]) -> Result<[f64; 2]> {
    let pi = std::f64::consts::PI;
    let q = |u: f64| c / (c * c + u * u);
    for _ in 0..100 {
        let (k1, k2) = (k[0], k[1]);
        let f1 = k1 * l - pi + ((k1 - k2) / c).atan() + ((k1 + k2) / c).atan();
        let f2 = k2 * l - 2.0 * pi + ((k2 - k1) / c).atan() + ((k1 + k2) / c).atan();
        let (qm, qp) = (q(k1 - k2), q(k1 + k2));
        let j11 = l + qm + qp;
        let j12 = -qm + qp;
        let j21 = -qm + qp;
        let j22 = l + qm + qp;
        let det = j11 * j22 - j12 * j21;
        let d1 = (f1 * j22 - f2 * j12) / det;
        let d2 = (j11 * f2 - j21 * f1) / det;
        k = [k1 - d1, k2 - d2];
        if d1.abs().max(d2.abs()) <= 1e-15 * k[1].abs() {
            return Ok(k);
        }
    }
    Err(Error::Internal(format!(
        "two-body Bethe equations did not converge at c = {c}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn impenetrable_limit() {
        let e = two_body_box_energy(1e9, 1.0).unwrap();
        assert!((e / (5.0 * PI * PI) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn weak_coupling_slope() {
        let l = 2.0;
        let c = 1e-4;
        let e = two_body_box_energy(c, l).unwrap();
        let first_order = 2.0 * PI * PI / (l * l) + 3.0 * c / l;
        assert!((e - first_order).abs() < 1e-7, "{e} vs {first_order}");
    }

    #[test]
    fn monotone_in_coupling() {
        let vals: Vec<f64> = [0.1, 1.0, 10.0, 100.0]
            .iter()
            .map(|&c| two_body_box_energy(c, 3.0).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }
}
