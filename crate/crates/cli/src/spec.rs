//! Denominator specifications: comma-separated items, each a positive
//! integer, an inclusive range `a..b`, or the squares of a range
//! `squares(a..b)`. Items accumulate, so repeated values gain multiplicity.

use std::fmt;

use ufrac::DenomMultiset;

/// Largest number of denominators a specification may expand to.
pub const MAX_SPEC_ELEMENTS: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecError {
    /// Byte offset into the specification.
    pub position: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at position {}", self.message, self.position)
    }
}

impl std::error::Error for SpecError {}

struct Scanner<'a> {
    text: &'a str,
    pos: usize,
    total: u64,
}

impl<'a> Scanner<'a> {
    fn error<T>(&self, position: usize, message: impl Into<String>) -> Result<T, SpecError> {
        Err(SpecError {
            position,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), SpecError> {
        if self.eat(token) {
            Ok(())
        } else {
            self.error(self.pos, format!("expected `{token}`"))
        }
    }

    fn integer(&mut self) -> Result<(u64, usize), SpecError> {
        self.skip_ws();
        let start = self.pos;
        let digits = self.text[start..]
            .bytes()
            .take_while(|b| b.is_ascii_digit())
            .count();
        if digits == 0 {
            return if self.text[start..].starts_with('-') {
                self.error(start, "denominators must be positive")
            } else {
                self.error(start, "expected an integer")
            };
        }
        self.pos += digits;
        let value: u64 = self.text[start..self.pos]
            .parse()
            .or_else(|_| self.error(start, "integer too large"))?;
        if value == 0 {
            return self.error(start, "denominators must be positive");
        }
        Ok((value, start))
    }

    fn count(&mut self, n: u64, at: usize) -> Result<(), SpecError> {
        self.total += n;
        if self.total > MAX_SPEC_ELEMENTS {
            return self.error(
                at,
                format!("specification expands to more than {MAX_SPEC_ELEMENTS} denominators"),
            );
        }
        Ok(())
    }

    fn range(&mut self) -> Result<(u64, u64, usize), SpecError> {
        let (lo, at) = self.integer()?;
        self.expect("..")?;
        let (hi, hi_at) = self.integer()?;
        if hi < lo {
            return self.error(hi_at, format!("range {lo}..{hi} is descending"));
        }
        self.count(hi - lo + 1, at)?;
        Ok((lo, hi, at))
    }

    fn item(&mut self, out: &mut Vec<u64>) -> Result<(), SpecError> {
        self.skip_ws();
        if self.eat("squares(") {
            let (lo, hi, at) = self.range()?;
            for i in lo..=hi {
                match i.checked_mul(i) {
                    Some(sq) => out.push(sq),
                    None => return self.error(at, format!("{i} squared overflows")),
                }
            }
            return self.expect(")");
        }
        let (lo, at) = self.integer()?;
        if self.eat("..") {
            let (hi, hi_at) = self.integer()?;
            if hi < lo {
                return self.error(hi_at, format!("range {lo}..{hi} is descending"));
            }
            self.count(hi - lo + 1, at)?;
            out.extend(lo..=hi);
        } else {
            self.count(1, at)?;
            out.push(lo);
        }
        Ok(())
    }
}

pub fn parse_denom_spec(text: &str) -> Result<DenomMultiset, SpecError> {
    let mut scanner = Scanner {
        text,
        pos: 0,
        total: 0,
    };
    let mut values = Vec::new();
    loop {
        scanner.item(&mut values)?;
        scanner.skip_ws();
        if scanner.pos == text.len() {
            break;
        }
        scanner.expect(",")?;
    }
    Ok(DenomMultiset::from_elements(values).expect("all values are positive"))
}

/// Inverse of [`parse_denom_spec`]: each element once per multiplicity.
pub fn format_denom_spec(d: &DenomMultiset) -> String {
    d.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms(v: &[u64]) -> DenomMultiset {
        DenomMultiset::from_elements(v.iter().copied()).unwrap()
    }

    #[test]
    fn items() {
        assert_eq!(parse_denom_spec("2,3,4,12").unwrap(), ms(&[2, 3, 4, 12]));
        assert_eq!(
            parse_denom_spec("1..10").unwrap(),
            DenomMultiset::range(1, 10)
        );
        let sq = parse_denom_spec("squares(1..35)").unwrap();
        assert_eq!(sq.len(), 35);
        assert_eq!(sq.max_element(), Some(1225));
        assert_eq!(
            parse_denom_spec(" 2 , 2..3, squares(2..2) ").unwrap(),
            ms(&[2, 2, 3, 4])
        );
        assert_eq!(parse_denom_spec("5..5").unwrap(), ms(&[5]));
    }

    #[test]
    fn errors_carry_positions() {
        let err = |s: &str| parse_denom_spec(s).unwrap_err();
        assert_eq!(err("2,0").position, 2);
        assert_eq!(err("1..x").position, 3);
        assert_eq!(err("5..3").position, 3);
        assert_eq!(err("2;3").position, 1);
        assert_eq!(err("").position, 0);
        assert_eq!(err("squares(1..3").position, 12);
        assert!(err("-4").message.contains("positive"));
        assert!(err("99999999999999999999").message.contains("too large"));
        assert!(err("squares(4294967296..4294967296)")
            .message
            .contains("overflows"));
        assert!(err("1..100000000").message.contains("more than"));
    }

    #[test]
    fn format_round_trips() {
        let d = ms(&[2, 2, 3, 7]);
        assert_eq!(format_denom_spec(&d), "2,2,3,7");
        assert_eq!(parse_denom_spec(&format_denom_spec(&d)).unwrap(), d);
    }
}
