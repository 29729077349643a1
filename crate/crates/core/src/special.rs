//! Power sums and the Hurwitz zeta function.
//!
//! Both are evaluated with Euler-Maclaurin summation: a short direct head
//! followed by the integral, the endpoint half-terms and eight Bernoulli
//! corrections. With the head pushed past x = 16 the remainder is below
//! 1e-17 relative for the exponents used here.

/// B_2, B_4, ..., B_16 divided by (2j)!.
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
    7.0 / 6.0 / 87_178_291_200.0,
    -3617.0 / 510.0 / 20_922_789_888_000.0,
];

const HEAD: f64 = 16.0;

/// Bernoulli correction sum for f(x) = x^{-s} evaluated at x:
/// sum_j B_2j/(2j)! * f^{(2j-1)}(x).
fn bernoulli_tail(s: f64, x: f64) -> f64 {
    // f^{(m)}(x) = (-1)^m s(s+1)...(s+m-1) x^{-s-m}
    let mut total = 0.0;
    let mut rising = s; // s(s+1)...(s+2j-2)
    let mut xpow = x.powf(-s - 1.0);
    let inv_x2 = 1.0 / (x * x);
    for (j, coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        // odd derivative order 2j+1 carries sign -1
        total -= coef * rising * xpow;
        let m = (2 * j + 1) as f64;
        rising *= (s + m) * (s + m + 1.0);
        xpow *= inv_x2;
    }
    total
}

fn power_integral(s: f64, a: f64, b: f64) -> f64 {
    if (s - 1.0).abs() < 1e-15 {
        (b / a).ln()
    } else {
        (b.powf(1.0 - s) - a.powf(1.0 - s)) / (1.0 - s)
    }
}

/// Hurwitz zeta zeta(s, a) = sum_{k>=0} (a + k)^{-s}, for s > 1 and a > 0.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0, "hurwitz_zeta needs s > 1, got {s}");
    assert!(a > 0.0, "hurwitz_zeta needs a > 0, got {a}");
    let mut head = 0.0;
    let mut x = a;
    while x < HEAD {
        head += x.powf(-s);
        x += 1.0;
    }
    // tail from x to infinity
    let tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s) - bernoulli_tail(s, x);
    head + tail
}

/// Riemann zeta for s > 1.
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// sum_{k=1}^{m} k^p for any real p.
pub fn power_sum(p: f64, m: u64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let s = -p;
    let direct_limit = (HEAD as u64).max(1);
    if m <= 4096 {
        return (1..=m).map(|k| (k as f64).powf(p)).sum();
    }
    let head: f64 = (1..direct_limit).map(|k| (k as f64).powf(p)).sum();
    let a = direct_limit as f64;
    let b = m as f64;
    // Euler-Maclaurin on [a, b] inclusive of both endpoints
    let body =
        power_integral(s, a, b) + 0.5 * (a.powf(-s) + b.powf(-s)) + (bernoulli_tail(s, b) - bernoulli_tail(s, a));
    head + body
}

/// Tail sum sum_{k>m} k^{-s} for s > 1.
pub fn power_tail(s: f64, m: u64) -> f64 {
    hurwitz_zeta(s, m as f64 + 1.0)
}
