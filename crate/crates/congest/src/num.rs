//! Integer helpers used by message budgets and send-round schedules.
//!
//! Schedules of the form ceil(d * sqrt(h)) + l are computed exactly in
//! integers as l + ceil_sqrt(d^2 * h), avoiding float drift for large d.

/// Smallest number of bits that can represent `v` as an unsigned value.
/// Zero takes one bit.
pub fn bitlen(v: u64) -> u64 {
    if v == 0 {
        1
    } else {
        64 - v.leading_zeros() as u64
    }
}

/// Bits needed for a signed value: magnitude bits plus a sign bit when
/// negative.
pub fn bitlen_signed(v: i64) -> u64 {
    if v >= 0 {
        bitlen(v as u64)
    } else {
        bitlen(v.unsigned_abs()) + 1
    }
}

/// ceil(log2(v)) for v >= 1; 0 for v <= 1.
pub fn ceil_log2(v: u64) -> u64 {
    if v <= 1 {
        return 0;
    }
    let floor = 63 - v.leading_zeros() as u64;
    if v.is_power_of_two() {
        floor
    } else {
        floor + 1
    }
}

/// ceil(sqrt(a)) computed exactly.
pub fn ceil_sqrt(a: u128) -> u128 {
    let r = a.isqrt();
    if r * r == a {
        r
    } else {
        r + 1
    }
}

/// Smallest s >= 0 with s^2 * b >= a. Exact form of ceil(sqrt(a / b)).
/// b must be positive.
pub fn ceil_sqrt_div(a: u128, b: u128) -> u128 {
    assert!(b > 0, "ceil_sqrt_div by zero");
    // Candidate from the floor square root of a/b, then fix up. The true
    // answer differs from isqrt(a/b) by at most one. The squares saturate:
    // a saturated product is >= a, which is exactly the comparison needed.
    let sq = |s: u128| s.saturating_mul(s).saturating_mul(b);
    let mut s = (a / b).isqrt();
    while sq(s) < a {
        s += 1;
    }
    while s > 0 && sq(s - 1) >= a {
        s -= 1;
    }
    s
}
