//! Sine integral Si(x) = ∫_0^x sin(t)/t dt.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

pub fn sine_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x == 0.0 {
        return 0.0;
    }
    if x < 2.0 {
        // Power series Σ (−1)^n x^{2n+1} / ((2n+1)(2n+1)!).
        let mut sum = 0.0;
        let mut fact_term = x; // x^{2n+1}/(2n+1)!
        let mut n = 0;
        loop {
            let term = fact_term / (2 * n + 1) as f64;
            sum += if n % 2 == 0 { term } else { -term };
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
            n += 1;
            fact_term *= x * x / ((2 * n) * (2 * n + 1)) as f64;
        }
        return sum;
    }
    // Lentz continued fraction for E1(ix); Si(x) = π/2 + Im(e^{−ix}·cf).
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..200 {
        let a = -((i - 1) * (i - 1)) as f64;
        b += 2.0;
        d = (d * a + b).inv();
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    h *= Complex64::new(x.cos(), -x.sin());
    FRAC_PI_2 + h.im
}
