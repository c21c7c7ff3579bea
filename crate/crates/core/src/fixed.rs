// Copyright 2026 The stvx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Fixed-point decimal used for ballot weights, transfer values and running
//! totals.
//!
//! Every value is stored as an integer count of 10^-9 units. Counting
//! precision (2 to 9 places) is applied by explicit quantization, so values
//! produced by the engine are always exact multiples of 10^-places and sums
//! of them are exact.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of decimal places stored internally.
pub const MAX_PLACES: u8 = 9;
const SCALE: i64 = 1_000_000_000;

/// How a value is brought down to the counting precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundingMode {
    Truncate,
    /// Round half away from zero.
    Round,
}

/// Counting precision for transfer values and ballot weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Precision {
    pub decimal_places: u8,
    pub mode: RoundingMode,
}

impl Precision {
    pub const fn new(decimal_places: u8, mode: RoundingMode) -> Self {
        Precision {
            decimal_places,
            mode,
        }
    }

    /// Five places, truncated.
    pub const fn statutory() -> Self {
        Precision::new(5, RoundingMode::Truncate)
    }

    /// Two places, rounded. Reproduces hand-worked two-place arithmetic.
    pub const fn two_place_rounded() -> Self {
        Precision::new(2, RoundingMode::Round)
    }

    /// Size of one unit in the last counted place, in internal units.
    fn step(self) -> i64 {
        10_i64.pow(u32::from(MAX_PLACES - self.decimal_places))
    }

    /// One unit in the last counted place.
    pub fn ulp(self) -> Fixed {
        Fixed(self.step())
    }

    pub fn is_valid(self) -> bool {
        (2..=MAX_PLACES).contains(&self.decimal_places)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::statutory()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid decimal literal `{0}`")]
pub struct ParseFixedError(pub String);

/// A signed fixed-point number with nine decimal places.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fixed(i64);

impl Fixed {
    pub const ZERO: Fixed = Fixed(0);
    pub const ONE: Fixed = Fixed(SCALE);

    pub const fn from_units(units: i64) -> Self {
        Fixed(units)
    }

    pub const fn units(self) -> i64 {
        self.0
    }

    pub const fn from_int(value: i64) -> Self {
        Fixed(value * SCALE)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// `self` brought to `precision`.
    pub fn quantize(self, precision: Precision) -> Fixed {
        Fixed(quantize_units(
            i128::from(self.0),
            precision.step(),
            precision.mode,
        ))
    }

    /// Product of two values, quantized to `precision`.
    pub fn mul_quantized(self, other: Fixed, precision: Precision) -> Fixed {
        let raw = i128::from(self.0) * i128::from(other.0);
        let step = i128::from(precision.step()) * i128::from(SCALE);
        Fixed(quantize_ratio(raw, step, precision.mode) * precision.step())
    }

    /// `numerator / denominator`, quantized to `precision`.
    ///
    /// Panics if `denominator` is zero.
    pub fn div_quantized(numerator: Fixed, denominator: Fixed, precision: Precision) -> Fixed {
        assert!(!denominator.is_zero(), "division by zero");
        let num = i128::from(numerator.0) * i128::from(SCALE);
        let den = i128::from(denominator.0) * i128::from(precision.step());
        Fixed(quantize_ratio(num, den, precision.mode) * precision.step())
    }

    /// Whole-ballot weight scaled by a multiplicity.
    pub fn times(self, count: u64) -> Fixed {
        let count = i64::try_from(count).expect("multiplicity overflow");
        Fixed(self.0.checked_mul(count).expect("fixed-point overflow"))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    /// Decimal rendering with exactly `places` digits after the point,
    /// rounding half away from zero.
    pub fn format(self, places: u8) -> String {
        let places = places.min(MAX_PLACES);
        let step = 10_i64.pow(u32::from(MAX_PLACES - places));
        let q = quantize_ratio(i128::from(self.0), i128::from(step), RoundingMode::Round);
        let neg = q < 0;
        let q = q.unsigned_abs();
        let div = 10_u64.pow(u32::from(places));
        let (int, frac) = (q / div, q % div);
        let sign = if neg { "-" } else { "" };
        if places == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac:0width$}", width = usize::from(places))
        }
    }

    /// Shortest exact decimal rendering.
    pub fn to_canonical(self) -> String {
        let s = self.format(MAX_PLACES);
        let s = s.trim_end_matches('0');
        s.strip_suffix('.').unwrap_or(s).to_string()
    }
}

fn quantize_units(value: i128, step: i64, mode: RoundingMode) -> i64 {
    quantize_ratio(value, i128::from(step), mode) * step
}

/// `value / step` as an integer under `mode`. `step` must be positive.
fn quantize_ratio(value: i128, step: i128, mode: RoundingMode) -> i64 {
    let q = value / step;
    let r = value % step;
    let q = match mode {
        RoundingMode::Truncate => q,
        RoundingMode::Round => {
            if 2 * r.abs() >= step {
                q + value.signum()
            } else {
                q
            }
        }
    };
    i64::try_from(q).expect("fixed-point overflow")
}

impl Add for Fixed {
    type Output = Fixed;
    fn add(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 + rhs.0)
    }
}

impl AddAssign for Fixed {
    fn add_assign(&mut self, rhs: Fixed) {
        self.0 += rhs.0;
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    fn sub(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 - rhs.0)
    }
}

impl SubAssign for Fixed {
    fn sub_assign(&mut self, rhs: Fixed) {
        self.0 -= rhs.0;
    }
}

impl Neg for Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-self.0)
    }
}

impl Mul<u64> for Fixed {
    type Output = Fixed;
    fn mul(self, rhs: u64) -> Fixed {
        self.times(rhs)
    }
}

impl Sum for Fixed {
    fn sum<I: Iterator<Item = Fixed>>(iter: I) -> Fixed {
        iter.fold(Fixed::ZERO, Add::add)
    }
}

impl From<u64> for Fixed {
    fn from(value: u64) -> Fixed {
        Fixed::from_int(i64::try_from(value).expect("fixed-point overflow"))
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => f.write_str(&self.format(p.min(usize::from(MAX_PLACES)) as u8)),
            None => f.write_str(&self.to_canonical()),
        }
    }
}

impl FromStr for Fixed {
    type Err = ParseFixedError;

    fn from_str(s: &str) -> Result<Fixed, ParseFixedError> {
        let err = || ParseFixedError(s.to_string());
        let t = s.trim();
        let (neg, t) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let (int, frac) = t.split_once('.').unwrap_or((t, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(err());
        }
        if !int.bytes().all(|b| b.is_ascii_digit())
            || !frac.bytes().all(|b| b.is_ascii_digit())
            || frac.len() > usize::from(MAX_PLACES)
        {
            return Err(err());
        }
        let int: i64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| err())?
        };
        let frac_units: i64 = if frac.is_empty() {
            0
        } else {
            let pad = u32::from(MAX_PLACES) - frac.len() as u32;
            frac.parse::<i64>().map_err(|_| err())? * 10_i64.pow(pad)
        };
        let units = int
            .checked_mul(SCALE)
            .and_then(|v| v.checked_add(frac_units))
            .ok_or_else(err)?;
        Ok(Fixed(if neg { -units } else { units }))
    }
}

impl Serialize for Fixed {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_canonical())
    }
}

impl<'de> Deserialize<'de> for Fixed {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Fixed, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Fixed {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(f("61869.19").format(2), "61869.19");
        assert_eq!(f("869.39814").format(2), "869.40");
        assert_eq!(f("0.38050").to_canonical(), "0.3805");
        assert_eq!(f("62858").to_canonical(), "62858");
        assert_eq!(f("-0.005").format(2), "-0.01");
        assert_eq!(f(".5"), f("0.5"));
        assert!("1.0000000001".parse::<Fixed>().is_err());
        assert!("abc".parse::<Fixed>().is_err());
        assert!("".parse::<Fixed>().is_err());
        assert!("-".parse::<Fixed>().is_err());
    }

    #[test]
    fn quantized_products() {
        let two = Precision::two_place_rounded();
        assert_eq!(f("0.17").mul_quantized(f("1"), two), f("0.17"));
        assert_eq!(
            f("0.45194").mul_quantized(f("0.38050"), Precision::statutory()),
            f("0.17196")
        );
        let trunc2 = Precision::new(2, RoundingMode::Truncate);
        assert_eq!(f("0.999").quantize(trunc2), f("0.99"));
        assert_eq!(f("0.995").quantize(two), f("1"));
    }

    #[test]
    fn quantized_ratio() {
        let two = Precision::two_place_rounded();
        assert_eq!(Fixed::div_quantized(f("12929"), f("75787"), two), f("0.17"));
        assert_eq!(Fixed::div_quantized(f("648"), f("1703"), two), f("0.38"));
        assert_eq!(
            Fixed::div_quantized(f("870"), f("1925"), Precision::statutory()),
            f("0.45194")
        );
    }
}
