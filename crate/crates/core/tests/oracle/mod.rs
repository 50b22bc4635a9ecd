//! Independent reference values computed in exact integer arithmetic.
//!
//! `E_{1/2,1}(-x) = sum_k (-x)^k / Gamma(k/2 + 1)` splits into an even part
//! `A = sum_m x^{2m} / m!` and an odd part `B / sqrt(pi)` with
//! `B = sum_m 2^{m+1} x^{2m+1} / (2m+1)!!`. For rational `x = p/q` both sums
//! are accumulated in fixed point with `DIGITS` decimal digits, `pi` comes
//! from Machin's formula and its square root from an integer square root.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

const DIGITS: u32 = 160;

fn scale() -> BigInt {
    BigInt::from(10u32).pow(DIGITS)
}

/// `atan(1/n)` scaled by `10^DIGITS`.
fn atan_inv(n: u64, one: &BigInt) -> BigInt {
    let n2 = BigInt::from(n * n);
    let mut power = one / BigInt::from(n);
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &n2;
        k += 1;
    }
    sum
}

/// `pi` scaled by `10^DIGITS`.
pub fn pi_fixed() -> BigInt {
    let one = scale();
    BigInt::from(16) * atan_inv(5, &one) - BigInt::from(4) * atan_inv(239, &one)
}

fn to_f64(v: &BigInt) -> f64 {
    // Keep 30 significant decimal places before leaving integer arithmetic.
    let shift = BigInt::from(10u32).pow(DIGITS - 30);
    (v / shift).to_f64().unwrap() / 1e30
}

/// `E_{1/2,1}(-p/q)` for nonnegative rationals.
pub fn ml_half(p: u64, q: u64) -> f64 {
    let one = scale();
    let (p, q) = (BigInt::from(p), BigInt::from(q));
    let x2_num = &p * &p;
    let x2_den = &q * &q;

    let mut a = BigInt::zero();
    let mut term = one.clone();
    let mut m = 0u64;
    while !term.is_zero() {
        a += &term;
        m += 1;
        term = term * &x2_num / (&x2_den * BigInt::from(m));
    }

    let mut b = BigInt::zero();
    let mut term = BigInt::from(2) * &one * &p / &q;
    let mut m = 0u64;
    while !term.is_zero() {
        b += &term;
        m += 1;
        term = term * BigInt::from(2) * &x2_num / (&x2_den * BigInt::from(2 * m + 1));
    }

    let sqrt_pi = (pi_fixed() * &one).sqrt();
    let value = a - b * &one / sqrt_pi;
    to_f64(&value)
}

/// `pi` to double precision, as a self-check of [`pi_fixed`].
pub fn pi_f64() -> f64 {
    to_f64(&pi_fixed())
}

/// `|a - b| / max(|b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

