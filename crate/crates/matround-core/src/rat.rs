use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use core::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ground::{ElementId, GroundSet};

/// Exact rational number. `BigRational` keeps the canonical form (reduced,
/// positive denominator) after every operation.
pub type Rat = num_rational::BigRational;

/// Rational from an integer pair; panics on zero denominator.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(num: i64) -> Rat {
    Rat::from_integer(BigInt::from(num))
}

/// Parses `"p/q"` or `"p"` with optional sign.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num.trim())
        .map_err(|_| Error::Invalid(String::from("bad rational numerator")))?;
    let den = BigInt::from_str(den.trim())
        .map_err(|_| Error::Invalid(String::from("bad rational denominator")))?;
    if den.is_zero() {
        return Err(Error::Invalid(String::from("zero denominator")));
    }
    Ok(Rat::new(num, den))
}

/// Formats as `"p/q"`, or just `"p"` for integers.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        let mut s = r.numer().to_string();
        s.push('/');
        s.push_str(&r.denom().to_string());
        s
    }
}

/// Exact-rational vector indexed by element labels over a declared ground
/// set. Every element of the ground set has an entry (zero by default).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatVec {
    ground: GroundSet,
    vals: BTreeMap<ElementId, Rat>,
}

impl RatVec {
    /// All-zero vector on `ground`.
    pub fn zero(ground: GroundSet) -> Self {
        let vals = ground.iter().map(|e| (e, Rat::zero())).collect();
        RatVec { ground, vals }
    }

    /// Builds from explicit entries; entries must all lie in `ground`,
    /// missing entries default to zero.
    pub fn from_entries(
        ground: GroundSet,
        entries: impl IntoIterator<Item = (ElementId, Rat)>,
    ) -> Result<Self> {
        let mut v = RatVec::zero(ground);
        for (e, val) in entries {
            if !v.ground.contains(e) {
                return Err(Error::ElementOutOfGround);
            }
            v.vals.insert(e, val);
        }
        Ok(v)
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn get(&self, e: ElementId) -> &Rat {
        self.vals.get(&e).expect("element in declared ground")
    }

    pub fn set(&mut self, e: ElementId, val: Rat) -> Result<()> {
        if !self.ground.contains(e) {
            return Err(Error::ElementOutOfGround);
        }
        self.vals.insert(e, val);
        Ok(())
    }

    /// x(S) = sum of entries over S.
    pub fn sum_over(&self, s: &GroundSet) -> Rat {
        s.iter().map(|e| self.get(e).clone()).fold(Rat::zero(), |a, b| a + b)
    }

    pub fn total(&self) -> Rat {
        self.sum_over(&self.ground)
    }

    /// Restriction x|_S to a subset of the ground set.
    pub fn restrict(&self, s: &GroundSet) -> Result<RatVec> {
        s.check_within(&self.ground)?;
        let vals = s.iter().map(|e| (e, self.get(e).clone())).collect();
        Ok(RatVec { ground: s.clone(), vals })
    }

    /// Inner product over the common (identical) ground set.
    pub fn dot(&self, other: &RatVec) -> Rat {
        debug_assert_eq!(self.ground, other.ground);
        self.ground
            .iter()
            .map(|e| self.get(e) * other.get(e))
            .fold(Rat::zero(), |a, b| a + b)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ElementId, &Rat)> + '_ {
        self.vals.iter().map(|(e, v)| (*e, v))
    }

    /// Elements with a strictly positive entry.
    pub fn support(&self) -> GroundSet {
        self.vals
            .iter()
            .filter(|(_, v)| v.is_positive())
            .map(|(e, _)| *e)
            .collect()
    }

    /// Extends the vector with zero entries on `extra` (disjoint labels).
    pub fn extend_zero(&self, extra: &GroundSet) -> Result<RatVec> {
        if !self.ground.is_disjoint(extra) {
            return Err(Error::OverlappingGrounds);
        }
        let mut v = self.clone();
        for e in extra.iter() {
            v.ground.insert(e);
            v.vals.insert(e, Rat::zero());
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-6/8").unwrap(), rat(-3, 4));
        assert_eq!(parse_rat("5").unwrap(), rat_int(5));
        assert_eq!(format_rat(&rat(3, 4)), "3/4");
        assert_eq!(format_rat(&rat(8, 4)), "2");
        assert_eq!(format_rat(&rat(-1, 2)), "-1/2");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn vector_sums_and_restriction() {
        let g: GroundSet = [1u64, 2, 3].into_iter().collect();
        let x = RatVec::from_entries(
            g.clone(),
            [(ElementId(1), rat(1, 2)), (ElementId(2), rat(1, 2))],
        )
        .unwrap();
        assert_eq!(x.get(ElementId(3)), &Rat::zero());
        assert_eq!(x.total(), rat_int(1));
        let s: GroundSet = [1u64, 3].into_iter().collect();
        assert_eq!(x.sum_over(&s), rat(1, 2));
        let r = x.restrict(&s).unwrap();
        assert_eq!(r.ground(), &s);
        assert_eq!(r.total(), rat(1, 2));
        let bad: GroundSet = [4u64].into_iter().collect();
        assert!(x.restrict(&bad).is_err());
    }
}
