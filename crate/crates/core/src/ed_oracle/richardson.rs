//! Richardson extrapolation for sequences computed with spacing halved at
//! every step.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub value: f64,
    /// `|finest - value|`.
    pub error_estimate: f64,
    /// Observed convergence order from the three finest values, if defined.
    pub observed_order: Option<f64>,
    /// Leading order used in the elimination table.
    pub order: u32,
}

/// Observed order `log2((e0 - e1) / (e1 - e2))` for spacings `h, h/2, h/4`.
pub fn observed_order(e0: f64, e1: f64, e2: f64) -> Option<f64> {
    let d1 = e0 - e1;
    let d2 = e1 - e2;
    if d2 == 0.0 || d1 == 0.0 {
        return None;
    }
    let ratio = d1 / d2;
    (ratio > 0.0).then(|| ratio.log2())
}

/// Extrapolates `values` (coarsest first) to zero spacing.
///
/// The leading error order is taken from the three finest grids and snapped
/// to 1 (expansion in `h, h^2, h^3, ...`) or 2 (`h^2, h^4, ...`). When the
/// observed order is unusable, `fallback_order` is used.
pub fn extrapolate(values: &[f64], fallback_order: u32) -> Extrapolation {
    assert!(!values.is_empty());
    let k = values.len();
    let finest = values[k - 1];
    if k == 1 {
        return Extrapolation {
            value: finest,
            error_estimate: 0.0,
            observed_order: None,
            order: fallback_order,
        };
    }
    let observed = if k >= 3 {
        observed_order(values[k - 3], values[k - 2], values[k - 1])
    } else {
        None
    };
    let order = match observed {
        Some(p) if p.is_finite() && p > 0.3 && p < 1.5 => 1,
        Some(p) if (1.5..5.0).contains(&p) => 2,
        _ => fallback_order,
    };

    // Pass j removes the error term proportional to h^(order * j).
    let mut table: Vec<f64> = values.to_vec();
    for j in 1..k {
        let p = order * j as u32;
        let factor = 2f64.powi(p as i32);
        let mut next = Vec::with_capacity(table.len() - 1);
        for i in 1..table.len() {
            next.push((factor * table[i] - table[i - 1]) / (factor - 1.0));
        }
        table = next;
    }
    let value = table[0];
    Extrapolation {
        value,
        error_estimate: (finest - value).abs(),
        observed_order: observed,
        order,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomial_error_in_h_squared() {
        let f = |h: f64| 3.0 + 0.7 * h * h - 0.2 * h.powi(4) + 0.05 * h.powi(6);
        let vals: Vec<f64> = (0..4).map(|i| f(0.5f64.powi(i))).collect();
        let ex = extrapolate(&vals, 2);
        assert_eq!(ex.order, 2);
        assert!((ex.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn detects_first_order_error() {
        let f = |h: f64| -1.0 + 0.3 * h + 0.1 * h * h - 0.02 * h.powi(3);
        let vals: Vec<f64> = (0..4).map(|i| f(0.1 * 0.5f64.powi(i))).collect();
        let ex = extrapolate(&vals, 2);
        assert_eq!(ex.order, 1);
        assert!((ex.value + 1.0).abs() < 1e-12);
    }
}
