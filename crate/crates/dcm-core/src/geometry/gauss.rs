//! Gauss-Legendre nodes and weights on [-1, 1].

/// Nodes and weights of the `n`-point Gauss-Legendre rule, exact for
/// polynomials of degree 2n - 1. Newton iteration on the Legendre
/// recurrence; accurate to ~1e-15 for n up to several hundred.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative via the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Map an n-point rule to the interval [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|xi| mid + half * xi).collect(),
        w.iter().map(|wi| wi * half).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 3, 5, 8, 16, 64, 87] {
            let (_, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn integrates_polynomials_exactly_up_to_design_order() {
        for n in [2usize, 4, 7] {
            let (x, w) = gauss_legendre(n);
            for d in 0..=(2 * n - 1) {
                let quad: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(d as i32)).sum();
                let exact = if d % 2 == 0 { 2.0 / (d as f64 + 1.0) } else { 0.0 };
                assert_relative_eq!(quad, exact, max_relative = 1e-12, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn five_point_nodes_match_reference() {
        let (x, w) = gauss_legendre(5);
        // Abramowitz & Stegun 25.4.30
        assert_relative_eq!(x[4], 0.906179845938664, max_relative = 1e-13);
        assert_relative_eq!(x[3], 0.538469310105683, max_relative = 1e-13);
        assert_relative_eq!(x[2], 0.0, epsilon = 1e-15);
        assert_relative_eq!(w[4], 0.236926885056189, max_relative = 1e-12);
        assert_relative_eq!(w[3], 0.478628670499366, max_relative = 1e-12);
        assert_relative_eq!(w[2], 0.568888888888889, max_relative = 1e-12);
    }

    #[test]
    fn mapped_rule_integrates_on_interval() {
        let (x, w) = gauss_legendre_on(12, 0.0, 1.0);
        let sum: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi).sum();
        assert_relative_eq!(sum, 0.5, max_relative = 1e-14);
    }
}
