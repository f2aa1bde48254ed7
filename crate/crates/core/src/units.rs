//! Unit-suffixed quantities.
//!
//! Values are stored in SI (meters, seconds, radians). Suffixes are only
//! accepted at the boundary: CLI flags and the JSON config. Serialization
//! writes the SI value with the base suffix using the shortest
//! round-tripping decimal, so configs survive a save/load cycle bit-exact.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

fn split_number(input: &str) -> Result<(f64, &str), Error> {
    let s = input.trim();
    let end = s
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || c == '+'
                || c == '-'
                || ((c == 'e' || c == 'E')
                    && s[i + 1..]
                        .chars()
                        .next()
                        .is_some_and(|n| n.is_ascii_digit() || n == '-' || n == '+')))
        })
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    let (num, suffix) = s.split_at(end);
    let value: f64 = num.parse().map_err(|_| Error::Unit {
        input: input.to_string(),
        reason: "missing or malformed number".into(),
    })?;
    if !value.is_finite() {
        return Err(Error::Unit {
            input: input.to_string(),
            reason: "value is not finite".into(),
        });
    }
    Ok((value, suffix.trim()))
}

/// v·10^exp with a single rounding, so "813nm" equals 813e-9 exactly.
fn decimal_scale(v: f64, exp: i32) -> f64 {
    if exp < 0 {
        v / 10f64.powi(-exp)
    } else {
        v * 10f64.powi(exp)
    }
}

fn unknown_suffix(input: &str, allowed: &str) -> Error {
    Error::Unit {
        input: input.to_string(),
        reason: format!("unknown or missing unit (expected one of {allowed})"),
    }
}

macro_rules! quantity {
    ($(#[$m:meta])* $name:ident, $base:literal, $expecting:literal) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
        pub struct $name(pub f64);

        impl $name {
            pub fn si(self) -> f64 {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{}", self.0, $base)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.to_string())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                struct V;
                impl<'de> Visitor<'de> for V {
                    type Value = $name;
                    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                        f.write_str($expecting)
                    }
                    fn visit_str<E: de::Error>(self, v: &str) -> Result<$name, E> {
                        v.parse().map_err(E::custom)
                    }
                    fn visit_f64<E: de::Error>(self, v: f64) -> Result<$name, E> {
                        Ok($name(v))
                    }
                    fn visit_i64<E: de::Error>(self, v: i64) -> Result<$name, E> {
                        Ok($name(v as f64))
                    }
                    fn visit_u64<E: de::Error>(self, v: u64) -> Result<$name, E> {
                        Ok($name(v as f64))
                    }
                }
                d.deserialize_any(V)
            }
        }
    };
}

quantity!(
    /// A length in meters. Accepts `nm`, `um` (or `μm`), `mm`, `cm`, `m`, `km`.
    Length,
    "m",
    "a length such as \"215um\" or a number of meters"
);
quantity!(
    /// A duration in seconds. Accepts `ns`, `us`, `ms`, `s`, `min`, `h`, `d`.
    Seconds,
    "s",
    "a duration such as \"0.492s\" or a number of seconds"
);
quantity!(
    /// An angle in radians. Accepts `deg` (or `°`) and `rad`.
    Angle,
    "rad",
    "an angle such as \"83.6deg\" or a number of radians"
);

impl FromStr for Length {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let (v, unit) = split_number(s)?;
        let scale = match unit {
            "nm" => -9,
            "um" | "μm" | "µm" => -6,
            "mm" => -3,
            "cm" => -2,
            "m" => 0,
            "km" => 3,
            _ => return Err(unknown_suffix(s, "nm, um, mm, cm, m, km")),
        };
        Ok(Length(decimal_scale(v, scale)))
    }
}

impl FromStr for Seconds {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let (v, unit) = split_number(s)?;
        let factor = match unit {
            "ns" => -9,
            "us" | "μs" | "µs" => -6,
            "ms" => -3,
            "s" => 0,
            "min" | "h" | "d" => {
                let mul = match unit {
                    "min" => 60.0,
                    "h" => 3600.0,
                    _ => 86_400.0,
                };
                return Ok(Seconds(v * mul));
            }
            _ => return Err(unknown_suffix(s, "ns, us, ms, s, min, h, d")),
        };
        Ok(Seconds(decimal_scale(v, factor)))
    }
}

impl FromStr for Angle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let (v, unit) = split_number(s)?;
        match unit {
            "deg" | "°" => Ok(Angle(v.to_radians())),
            "rad" => Ok(Angle(v)),
            _ => Err(unknown_suffix(s, "deg, rad")),
        }
    }
}

impl Angle {
    pub fn from_degrees(deg: f64) -> Self {
        Angle(deg.to_radians())
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_suffixes() {
        assert_eq!("813nm".parse::<Length>().unwrap().si(), 813e-9);
        assert_eq!("215um".parse::<Length>().unwrap().si(), 215e-6);
        assert_eq!("1.175km".parse::<Length>().unwrap().si(), 1175.0);
        assert_eq!("12h".parse::<Seconds>().unwrap().si(), 43_200.0);
        assert_eq!("0.492s".parse::<Seconds>().unwrap().si(), 0.492);
        assert_eq!("1e-3s".parse::<Seconds>().unwrap().si(), 1e-3);
        let a: Angle = "90deg".parse().unwrap();
        assert!((a.si() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!("40".parse::<Length>().is_err());
        assert!("40xx".parse::<Length>().is_err());
        assert!("nm".parse::<Length>().is_err());
        assert!("3parsecs".parse::<Seconds>().is_err());
        assert!("1e999m".parse::<Length>().is_err());
    }

    #[test]
    fn json_accepts_strings_and_numbers() {
        let l: Length = serde_json::from_str("\"7.3um\"").unwrap();
        assert!((l.si() - 7.3e-6).abs() < 1e-20);
        let l: Length = serde_json::from_str("1175").unwrap();
        assert_eq!(l.si(), 1175.0);
    }

    proptest::proptest! {
        #[test]
        fn serialization_round_trips(v in -1e12f64..1e12) {
            let json = serde_json::to_string(&Length(v)).unwrap();
            let back: Length = serde_json::from_str(&json).unwrap();
            proptest::prop_assert_eq!(back.si().to_bits(), v.to_bits());
            let json = serde_json::to_string(&Angle(v)).unwrap();
            let back: Angle = serde_json::from_str(&json).unwrap();
            proptest::prop_assert_eq!(back.si().to_bits(), v.to_bits());
        }
    }
}
