//! Unit conventions and conversions.
//!
//! Internally everything is angular: frequencies in rad/µs, rates in 1/µs,
//! times in µs. A quantity quoted as "f MHz" in the ω/2π convention maps to
//! ω = 2π·f rad/µs; a plain rate quoted as "r MHz" is r 1/µs unchanged.

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Ordinary frequency in MHz (ω/2π convention) to angular rad/µs.
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    TWO_PI * f_mhz
}

/// Angular rad/µs to ordinary frequency in MHz (ω/2π convention).
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / TWO_PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        assert_eq!(angular_to_mhz(mhz_to_angular(-8.8)), -8.8);
        assert_eq!(mhz_to_angular(5.0), 5.0 * TWO_PI);
    }
}
