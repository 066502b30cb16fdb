use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{DIAMETER, DIGITS, FIT_LETTERS, MINUS_PLUS};
use crate::error::{Error, Result};

/// Mixture weights for the forms a dimension text can take.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionTextGrammar {
    /// `45`
    pub plain: f64,
    /// `12,5`
    pub decimal: f64,
    /// `∅20`
    pub diameter: f64,
    /// `30∓0,1`
    pub tolerance: f64,
    /// `25H7`
    pub fit: f64,
}

impl Default for DimensionTextGrammar {
    fn default() -> Self {
        DimensionTextGrammar {
            plain: 0.55,
            decimal: 0.20,
            diameter: 0.15,
            tolerance: 0.05,
            fit: 0.05,
        }
    }
}

impl DimensionTextGrammar {
    fn weights(&self) -> [f64; 5] {
        [
            self.plain,
            self.decimal,
            self.diameter,
            self.tolerance,
            self.fit,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.weights();
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::domain(format!(
                "grammar weights must be non-negative: {w:?}"
            )));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "grammar weights sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> String {
        let w = self.weights();
        let mut u: f64 = rng.random();
        // rounding fall-through lands on the last form that has weight
        let mut form = w.iter().rposition(|v| *v > 0.0).unwrap_or(0);
        for (i, wi) in w.iter().enumerate() {
            if u < *wi {
                form = i;
                break;
            }
            u -= wi;
        }
        let mut s = String::new();
        match form {
            0 => push_number(rng, &mut s, 1, 3),
            1 => {
                push_number(rng, &mut s, 1, 2);
                s.push(',');
                s.push(*DIGITS.choose(rng).unwrap());
            }
            2 => {
                s.push(DIAMETER);
                push_number(rng, &mut s, 1, 2);
            }
            3 => {
                push_number(rng, &mut s, 1, 2);
                s.push(*[MINUS_PLUS, '+', '-'].choose(rng).unwrap());
                s.push_str("0,");
                s.push(*DIGITS[1..].choose(rng).unwrap());
            }
            _ => {
                push_number(rng, &mut s, 1, 2);
                s.push(*FIT_LETTERS.choose(rng).unwrap());
                s.push(*DIGITS[5..].choose(rng).unwrap());
            }
        }
        s
    }
}

/// Integer with `lo..=hi` digits, no leading zero; lengths skew long.
fn push_number<R: Rng + ?Sized>(rng: &mut R, s: &mut String, lo: usize, hi: usize) {
    let n = if hi > lo && rng.random_bool(0.8) {
        rng.random_range(lo + 1..=hi)
    } else {
        lo
    };
    s.push(*DIGITS[1..].choose(rng).unwrap());
    for _ in 1..n {
        s.push(*DIGITS.choose(rng).unwrap());
    }
}

/// Tolerance value such as `0,05` or `∅0.1`.
pub fn sample_tolerance_value<R: Rng + ?Sized>(rng: &mut R) -> String {
    let mut s = String::new();
    if rng.random_bool(0.2) {
        s.push(DIAMETER);
    }
    s.push('0');
    s.push(if rng.random_bool(0.75) { ',' } else { '.' });
    if rng.random_bool(0.5) {
        s.push('0');
    }
    s.push(*DIGITS[1..].choose(rng).unwrap());
    s
}
