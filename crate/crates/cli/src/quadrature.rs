//! Adaptive Gauss–Kronrod quadrature, used as an independent check of the
//! interpolation functional.

/// `∫_a^b f` to relative accuracy `rel` (adaptive 7–15 Gauss–Kronrod).
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel: f64) -> f64 {
    let rough = gauss_kronrod(f, a, b, f64::INFINITY, 0);
    gauss_kronrod(f, a, b, rel * rough.abs() / (b - a), 30)
}

/// `tol` is an error density per unit length.
fn gauss_kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    const XK: [f64; 8] = [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.0,
    ];
    const WK: [f64; 8] = [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ];
    const WG: [f64; 4] = [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ];
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut k = WK[7] * f(c);
    let mut g = WG[3] * f(c);
    for i in 0..7 {
        let s = f(c - h * XK[i]) + f(c + h * XK[i]);
        k += WK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    let (k, g) = (k * h, g * h);
    if (k - g).abs() <= tol * (b - a) || depth == 0 {
        return k;
    }
    gauss_kronrod(f, a, c, tol, depth - 1) + gauss_kronrod(f, c, b, tol, depth - 1)
}

/// `(∫_0^1 (K_η(r) F(r))^q dμ(r))^{1/q}` straight from the definitions of
/// `K_η` and `μ`, for profiles with `F(r) ~ r` at 0. The substitutions
/// `r = t^m` on `[0, 1/2]` (`m = 2/(q(1−η))`) and `r = 1 − u²` on `[1/2, 1]`
/// remove the endpoint singularities.
pub fn interpolation_oracle(f: &dyn Fn(f64) -> f64, eta: f64, q: f64) -> f64 {
    let g = |r: f64| {
        let s = (1.0 - r * r).sqrt();
        let one_minus_s = r * r / (1.0 + s);
        let k = one_minus_s.powf(-eta / 2.0);
        let dmu = r / (s * one_minus_s);
        (k * f(r)).powf(q) * dmu
    };
    let m = 2.0 / (q * (1.0 - eta));
    let lower = integrate(&|t| if t > 0.0 { m * t.powf(m - 1.0) * g(t.powf(m)) } else { 0.0 }, 0.0, 0.5f64.powf(1.0 / m), 1e-10);
    let upper = integrate(&|u| if u > 0.0 { 2.0 * u * g(1.0 - u * u) } else { 0.0 }, 0.0, 0.5f64.sqrt(), 1e-10);
    (lower + upper).powf(1.0 / q)
}
