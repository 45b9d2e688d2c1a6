//! Fixed quadrature rules: Gauss-Legendre panels and composite Simpson.

use super::sum::KahanSum;

/// 20-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; rule is
/// symmetric). Values from the standard Golub-Welsch computation.
const GL20_X: [f64; 10] = [
    0.076526521133497333755,
    0.227785851141645078080,
    0.373706088715419560673,
    0.510867001950827098004,
    0.636053680726515025453,
    0.746331906460150792614,
    0.839116971822218823395,
    0.912234428251325905868,
    0.963971927277913791268,
    0.993128599185094924786,
];
const GL20_W: [f64; 10] = [
    0.152753387130725850698,
    0.149172986472603746788,
    0.142096109318382051329,
    0.131688638449176626898,
    0.118194531961518417312,
    0.101930119817240435037,
    0.083276741576704748725,
    0.062672048334109063570,
    0.040601429800386941331,
    0.017614007139152118312,
];

/// Integrate `f` over `[a, b]` with a single 20-point Gauss-Legendre panel.
pub fn gauss20<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = KahanSum::new();
    for i in 0..10 {
        let dx = half * GL20_X[i];
        acc.add(GL20_W[i] * (f(mid - dx) + f(mid + dx)));
    }
    half * acc.value()
}

/// Composite Simpson rule with `n` subintervals (`n` even) over `[a, b]`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 2 && n % 2 == 0, "simpson: n must be even and >= 2");
    let h = (b - a) / n as f64;
    let mut acc = KahanSum::new();
    acc.add(f(a));
    acc.add(f(b));
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc.add(w * f(a + i as f64 * h));
    }
    acc.value() * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss20_is_exact_for_low_degree() {
        let v = gauss20(&|x| x.powi(7) - 3.0 * x.powi(2) + 1.0, -1.0, 2.0);
        // Antiderivative x^8/8 - x^3 + x evaluated at bounds.
        let exact = (256.0 / 8.0 - 8.0 + 2.0) - (1.0 / 8.0 + 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn simpson_converges_on_smooth() {
        let v = simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1000);
        assert!((v - 2.0).abs() < 1e-11);
    }
}
