//! Adaptive Gauss–Kronrod (7, 15) quadrature for complex integrands.

use crate::liouville::C64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
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

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// `∫_a^b f` to absolute tolerance `tol`, bisecting the interval with the
/// largest error estimate; at most `max_intervals` subintervals.
pub fn integrate<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, tol: f64, max_intervals: usize) -> (C64, f64) {
    let mut parts = vec![{
        let (v, e) = gk15(&f, a, b);
        (a, b, v, e)
    }];
    loop {
        let total_err: f64 = parts.iter().map(|p| p.3).sum();
        if total_err <= tol || parts.len() >= max_intervals {
            let v = parts.iter().map(|p| p.2).sum();
            return (v, total_err);
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, be), (i, p)| if p.3 > be { (i, p.3) } else { (bi, be) });
        let (lo, hi, _, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::c;

    #[test]
    fn polynomial_exact() {
        let (v, _) = integrate(|x| c(x.powi(5), 0.0), 0.0, 2.0, 1e-14, 10);
        assert!((v.re - 64.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn damped_oscillation() {
        let (v, e) = integrate(|t| (c(-1.0, 7.0) * t).exp(), 0.0, 40.0, 1e-12, 10_000);
        let exact = c(1.0, 0.0) / c(1.0, -7.0);
        assert!((v - exact).norm() < 1e-11, "{e}");
    }
}
