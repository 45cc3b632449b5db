//! Exact rational helpers.

use num_rational::Rational64;
use num_traits::{Signed, Zero};

pub type Rational = Rational64;

/// Parse an exact decimal (`3`, `-2.5`, `0.125`) or fraction (`1/3`).
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return None;
    }
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let denom = 10i64.checked_pow(frac_part.len() as u32)?;
    let r = Rational::new(numer, denom);
    Some(if neg { -r } else { r })
}

/// Display a rational as an integer when whole, `n/d` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering for PDDL output; falls back to a division expression
/// when the value has no finite decimal expansion.
pub fn pddl_number(r: &Rational) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    let (mut d, mut twos, mut fives) = (*r.denom(), 0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    let scale = twos.max(fives);
    if d == 1 && scale <= 18 {
        let factor = 10i64.pow(scale);
        let v = (r * Rational::from_integer(factor)).to_integer();
        let sign = if v < 0 { "-" } else { "" };
        let v = v.abs();
        let frac = format!("{:0width$}", v % factor, width = scale as usize);
        return format!("{sign}{}.{}", v / factor, frac.trim_end_matches('0'));
    }
    format!("(/ {} {})", r.numer(), r.denom())
}

/// SMT-LIB real literal.
pub fn smt_real(r: &Rational) -> String {
    let body = if r.denom() == &1 {
        format!("{}.0", r.numer().abs())
    } else {
        format!("(/ {}.0 {}.0)", r.numer().abs(), r.denom())
    };
    if r.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

/// `ceil(a / b)` for positive `b`.
pub fn ceil_div(a: Rational, b: Rational) -> i64 {
    debug_assert!(!b.is_zero());
    (a / b).ceil().to_integer()
}
