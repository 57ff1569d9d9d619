//! Gauss–Legendre quadrature and Hermite interpolation on grid intervals.

/// 5-point Gauss–Legendre nodes on [0, 1].
const GL_NODES: [f64; 5] = [
    0.046_910_077_030_668_004,
    0.230_765_344_947_158_45,
    0.5,
    0.769_234_655_052_841_6,
    0.953_089_922_969_332,
];
/// Matching weights (sum to 1).
const GL_WEIGHTS: [f64; 5] = [
    0.118_463_442_528_094_54,
    0.239_314_335_249_683_23,
    0.284_444_444_444_444_45,
    0.239_314_335_249_683_23,
    0.118_463_442_528_094_54,
];

/// Local nodes (fractions of the interval) and weights.
pub(crate) fn gl5() -> impl Iterator<Item = (f64, f64)> {
    GL_NODES.into_iter().zip(GL_WEIGHTS)
}

/// Quintic Hermite data at one end of an interval: value and two derivatives.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Quintic Hermite interpolant on [0, h] evaluated at fraction `s` of the
/// interval; returns the value and the derivative with respect to t.
pub(crate) fn hermite5(a: Jet, b: Jet, h: f64, s: f64) -> (f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
    let g0 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    let g1 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let g2 = 0.5 * s3 - s4 + 0.5 * s5;
    let value = a.v * h0 + h * a.d1 * h1 + h * h * a.d2 * h2 + b.v * g0 + h * b.d1 * g1 + h * h * b.d2 * g2;

    let dh0 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
    let dh1 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    let dh2 = s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4;
    let dg0 = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;
    let dg1 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    let dg2 = 1.5 * s2 - 4.0 * s3 + 2.5 * s4;
    let deriv = (a.v * dh0 + b.v * dg0) / h + a.d1 * dh1 + b.d1 * dg1 + h * (a.d2 * dh2 + b.d2 * dg2);
    (value, deriv)
}

/// Second derivative at `x` of the quintic through three nodes with
/// prescribed values and first derivatives (confluent divided differences).
/// Fourth-order accurate at the nodes for smooth data.
pub(crate) fn second_derivative_3pt(t: [f64; 3], f: [f64; 3], df: [f64; 3], x: f64) -> f64 {
    let z = [t[0], t[0], t[1], t[1], t[2], t[2]];
    let mut table = [f[0], f[0], f[1], f[1], f[2], f[2]];
    let mut coef = [0.0; 6];
    coef[0] = table[0];
    for order in 1..6 {
        for i in (order..6).rev() {
            let span = z[i] - z[i - order];
            table[i] = if span == 0.0 {
                df[i / 2]
            } else {
                (table[i] - table[i - 1]) / span
            };
        }
        coef[order] = table[order];
    }
    let mut p = coef[5];
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for k in (0..5).rev() {
        let dx = x - z[k];
        d2 = d2 * dx + 2.0 * d1;
        d1 = d1 * dx + p;
        p = p * dx + coef[k];
    }
    d2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl5_exact_for_degree_nine() {
        let integral: f64 = gl5().map(|(x, w)| w * x.powi(9)).sum();
        assert!((integral - 0.1).abs() < 1e-15);
    }

    #[test]
    fn hermite_reproduces_quintic() {
        let p = |x: f64| 1.0 + 2.0 * x - x * x + 0.5 * x.powi(3) - 0.25 * x.powi(4) + 0.1 * x.powi(5);
        let dp = |x: f64| 2.0 - 2.0 * x + 1.5 * x * x - x.powi(3) + 0.5 * x.powi(4);
        let d2p = |x: f64| -2.0 + 3.0 * x - 3.0 * x * x + 2.0 * x.powi(3);
        let (ta, h) = (0.3, 0.7);
        let a = Jet { v: p(ta), d1: dp(ta), d2: d2p(ta) };
        let b = Jet { v: p(ta + h), d1: dp(ta + h), d2: d2p(ta + h) };
        for s in [0.0, 0.21, 0.5, 0.93, 1.0] {
            let (v, d) = hermite5(a, b, h, s);
            assert!((v - p(ta + s * h)).abs() < 1e-13);
            assert!((d - dp(ta + s * h)).abs() < 1e-12);
        }
    }

    #[test]
    fn three_point_second_derivative() {
        let t = [0.0, 0.13, 0.3];
        let f = t.map(|x: f64| x.sin());
        let df = t.map(|x: f64| x.cos());
        let d2 = second_derivative_3pt(t, f, df, t[1]);
        assert!((d2 + 0.13f64.sin()).abs() < 1e-5);
        // exact on quintics
        let q = |x: f64| x.powi(5) - x.powi(2);
        let dq = |x: f64| 5.0 * x.powi(4) - 2.0 * x;
        let d2 = second_derivative_3pt(t, t.map(q), t.map(dq), t[1]);
        assert!((d2 - (20.0 * 0.13f64.powi(3) - 2.0)).abs() < 1e-10);
        let d2 = second_derivative_3pt(t, t.map(q), t.map(dq), t[2]);
        assert!((d2 - (20.0 * 0.3f64.powi(3) - 2.0)).abs() < 1e-10);
    }
}
