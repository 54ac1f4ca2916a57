//! Scalar bracketing helpers shared by the dynamics and chaos modules.

/// Bisection on `[a, b]` where `f(a)` and `f(b)` differ in sign.
/// Stops once the bracket is narrower than `tol` or stops shrinking.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    if f(b) == 0.0 {
        return b;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Dense-grid maximization refined by golden section around the best sample.
pub fn grid_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, samples: usize) -> (f64, f64) {
    let h = (hi - lo) / samples as f64;
    let mut best = (lo, f(lo));
    for i in 1..=samples {
        let x = lo + h * i as f64;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let a = (best.0 - h).max(lo);
    let b = (best.0 + h).min(hi);
    let x = golden_max(&f, a, b, 1e-13);
    let v = f(x);
    if v >= best.1 {
        (x, v)
    } else {
        best
    }
}
