//! Gauss–Legendre quadrature: node/weight generation and composite rules.
//!
//! Degree-`n` Gauss–Legendre integrates polynomials up to degree `2n−1`
//! exactly; the composite form splits an interval into equal panels so
//! oscillatory factors (the `cos(xξ)` and `sin x` kernels in the
//! positivity checker) are resolved panel by panel. Nodes come from Newton
//! iteration on the Legendre three-term recurrence — standard, and exact
//! enough that the unit tests check polynomial exactness at 1e-15.

/// Nodes and weights of the `n`-point rule on `[−1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Only the first half needs solving; the rule is symmetric.
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess for the i-th root (descending order).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' by the recurrence
            // (k+1) P_{k+1} = (2k+1) x P_k − k P_{k−1}.
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 1..n {
                let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0; // exact midpoint for odd rules
    }
    (nodes, weights)
}

/// `∫_a^b f` by a single `n`-point rule.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        acc += w * f(mid + half * x);
    }
    half * acc
}

/// `∫_a^b f` by `panels` equal subintervals, each with an `n`-point rule.
pub fn integrate_composite(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, n: usize) -> f64 {
    assert!(panels >= 1);
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * width;
            integrate(&f, lo, lo + width, n)
        })
        .sum()
}
