use std::fmt;

use num::rational::Ratio;
use num::{CheckedDiv, One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// A plane rotation by a rational fraction of a full turn, kept in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Turn(Ratio<i64>);

impl Turn {
    pub fn identity() -> Self {
        Turn(Ratio::zero())
    }

    /// From a fraction of a full turn.
    pub fn from_turns(t: Ratio<i64>) -> Self {
        let r = t - t.floor();
        Turn(r)
    }

    pub fn from_degrees(d: Ratio<i64>) -> Self {
        Turn::from_turns(d / 360)
    }

    pub fn turns(self) -> Ratio<i64> {
        self.0
    }

    /// Signed degrees in `(-180, 180]`.
    pub fn degrees(self) -> Ratio<i64> {
        let d = self.0 * 360;
        if d > Ratio::from_integer(180) {
            d - 360
        } else {
            d
        }
    }

    pub fn is_identity(self) -> bool {
        self.0.is_zero()
    }

    pub fn compose(self, other: Turn) -> Turn {
        Turn::from_turns(self.0 + other.0)
    }

    pub fn inverse(self) -> Turn {
        Turn::from_turns(-self.0)
    }

    /// `(cos, sin)`, exact at multiples of 30° where the value is exactly
    /// representable.
    pub fn cos_sin(self) -> (f64, f64) {
        let twelfths = self.0 * 12;
        if twelfths.is_integer() {
            const H: f64 = 0.866_025_403_784_438_6;
            const TABLE: [(f64, f64); 12] = [
                (1.0, 0.0),
                (H, 0.5),
                (0.5, H),
                (0.0, 1.0),
                (-0.5, H),
                (-H, 0.5),
                (-1.0, 0.0),
                (-H, -0.5),
                (-0.5, -H),
                (0.0, -1.0),
                (0.5, -H),
                (H, -0.5),
            ];
            return TABLE[*twelfths.numer() as usize];
        }
        let angle = std::f64::consts::TAU * (*self.0.numer() as f64 / *self.0.denom() as f64);
        let (s, c) = angle.sin_cos();
        (c, s)
    }

    pub fn rotate(self, v: [f64; 2]) -> [f64; 2] {
        let (c, s) = self.cos_sin();
        [c * v[0] - s * v[1], s * v[0] + c * v[1]]
    }
}

impl Default for Turn {
    fn default() -> Self {
        Turn::identity()
    }
}

/// Formats as signed degrees: `+60`, `-120`, `+360/7`.
impl fmt::Display for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degrees();
        let sign = if d.is_negative() { '-' } else { '+' };
        let d = d.abs();
        if d.denom().is_one() {
            write!(f, "{sign}{}", d.numer())
        } else {
            write!(f, "{sign}{}/{}", d.numer(), d.denom())
        }
    }
}

impl From<Turn> for String {
    fn from(t: Turn) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for Turn {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        parse_degrees(&s).map(Turn::from_degrees).ok_or_else(|| format!("invalid angle `{s}`"))
    }
}

/// Parses a signed angle in degrees: `+60`, `-22.5`, `+360/7`.
pub fn parse_degrees(token: &str) -> Option<Ratio<i64>> {
    let (negative, rest) = match token.as_bytes().first()? {
        b'+' => (false, &token[1..]),
        b'-' => (true, &token[1..]),
        _ => return None,
    };
    let (num, den) = match rest.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (rest, None),
    };
    let mut value = parse_decimal(num)?;
    if let Some(d) = den {
        if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let d: i64 = d.parse().ok()?;
        if d == 0 {
            return None;
        }
        value = value.checked_div(&Ratio::from_integer(d))?;
    }
    Some(if negative { -value } else { value })
}

fn parse_decimal(s: &str) -> Option<Ratio<i64>> {
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if s.ends_with('.') {
        return None;
    }
    let mut numer: i64 = int.parse().ok()?;
    let mut denom: i64 = 1;
    for b in frac.bytes() {
        numer = numer.checked_mul(10)?.checked_add((b - b'0') as i64)?;
        denom = denom.checked_mul(10)?;
    }
    Some(Ratio::new(numer, denom))
}
