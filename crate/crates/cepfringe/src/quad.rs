//! Gauss-Legendre panel quadrature used for the action integrals.

use std::sync::OnceLock;

/// Nodes and weights of the 16-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre polynomial.
pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x)
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integrate a complex function along the straight segment from `z0` to
/// `z1` with composite 16-point Gauss-Legendre.
pub(crate) fn integrate_line<F: Fn(num_complex::Complex64) -> num_complex::Complex64>(
    f: F,
    z0: num_complex::Complex64,
    z1: num_complex::Complex64,
    panels: usize,
) -> num_complex::Complex64 {
    let (nodes, weights) = gl16();
    let dz = (z1 - z0) / panels as f64;
    let mut sum = num_complex::Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let left = z0 + dz * k as f64;
        let mid = left + 0.5 * dz;
        for (x, w) in nodes.iter().zip(weights) {
            sum += *w * f(mid + 0.5 * dz * *x);
        }
    }
    sum * 0.5 * dz
}

/// Integrate `f` over `[a, b]` with composite 16-point Gauss-Legendre on
/// `panels` equal panels.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = gl16();
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let left = a + k as f64 * h;
        let mid = left + 0.5 * h;
        let half = 0.5 * h;
        for (x, w) in nodes.iter().zip(weights) {
            sum += w * f(mid + half * x);
        }
    }
    sum * 0.5 * h
}
