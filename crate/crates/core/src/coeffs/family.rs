use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::precision::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    TwoSidedDyadic,
    OneSidedSeeley,
    FiniteVandermonde,
    FiniteDyadic,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::TwoSidedDyadic => "two-sided-dyadic",
            FamilyKind::OneSidedSeeley => "one-sided-seeley",
            FamilyKind::FiniteVandermonde => "finite-vandermonde",
            FamilyKind::FiniteDyadic => "finite-dyadic",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            FamilyKind::TwoSidedDyadic,
            FamilyKind::OneSidedSeeley,
            FamilyKind::FiniteVandermonde,
            FamilyKind::FiniteDyadic,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, FamilyKind::FiniteVandermonde | FamilyKind::FiniteDyadic)
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Moment indices `k` for which `Σ a_j(−b_j)^k = 1` is claimed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidatedRange {
    Span { m1: u32, m2: u32 },
    Symmetric { kmax: u32 },
}

impl ValidatedRange {
    pub fn range(self) -> RangeInclusive<i32> {
        match self {
            ValidatedRange::Span { m1, m2 } => -(m1 as i32)..=m2 as i32,
            ValidatedRange::Symmetric { kmax } => -(kmax as i32)..=kmax as i32,
        }
    }

    pub fn contains(self, k: i32) -> bool {
        self.range().contains(&k)
    }

    pub fn bounds(self) -> (i32, i32) {
        let r = self.range();
        (*r.start(), *r.end())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub j: i64,
    pub a: Real,
    pub b: Real,
}

/// Coefficient pair in double precision, as consumed by the operators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub j: i64,
    pub a: f64,
    pub b: f64,
}

/// The data `(a_j, b_j)` of a reflection-type extension.
///
/// `tail` holds further entries beyond the truncation index; they are
/// never summed by the operators and only feed tail estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientFamily {
    kind: FamilyKind,
    beta: Option<Real>,
    delta: f64,
    entries: Vec<Entry>,
    tail: Vec<Entry>,
    validated: ValidatedRange,
    residuals: Vec<(i32, f64)>,
}

impl CoefficientFamily {
    pub fn new(
        kind: FamilyKind,
        beta: Option<Real>,
        delta: f64,
        entries: Vec<Entry>,
        tail: Vec<Entry>,
        validated: ValidatedRange,
    ) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        if entries.is_empty() {
            return Err(Error::InvalidParameter("coefficient family has no entries".into()));
        }
        let mut seen = BTreeSet::new();
        for e in entries.iter().chain(&tail) {
            if !(e.b > Real::zero(64)) || !e.b.is_finite() || !e.a.is_finite() {
                return Err(Error::InvalidParameter(format!("entry j={} has b <= 0 or non-finite data", e.j)));
            }
            if !seen.insert(e.j) {
                return Err(Error::InvalidParameter(format!("duplicate index j={}", e.j)));
            }
        }
        let family = CoefficientFamily { kind, beta, delta, entries, tail, validated, residuals: Vec::new() };
        family.check_kind()?;
        Ok(family)
    }

    fn check_kind(&self) -> Result<()> {
        match self.kind {
            FamilyKind::TwoSidedDyadic => {
                for e in &self.entries {
                    let bits = e.b.bits();
                    if e.b != Real::int_pow(4, e.j as i32, bits) {
                        return Err(Error::InvalidParameter(format!("two-sided entry j={} has b != 4^j", e.j)));
                    }
                    if e.j != 0 {
                        if let Some(m) = self.entries.iter().find(|o| o.j == -e.j) {
                            if m.a != e.a {
                                return Err(Error::InvalidParameter(format!("a_{} != a_{}", e.j, -e.j)));
                            }
                        } else {
                            return Err(Error::InvalidParameter(format!("two-sided family lacks j={}", -e.j)));
                        }
                    }
                }
            }
            FamilyKind::FiniteDyadic => {
                let m = (self.entries.len() - 1) / 2;
                if self.entries.len() != 2 * m + 1 {
                    return Err(Error::InvalidParameter("finite-dyadic family needs 2m+1 entries".into()));
                }
                let r = &self.entries[0].b;
                for (i, e) in self.entries.iter().enumerate() {
                    let expect = r * &Real::int_pow(2, -(i as i32), r.bits());
                    if e.j != i as i64 || e.b != expect {
                        return Err(Error::InvalidParameter(format!("finite-dyadic entry {i} has b != r 2^-j")));
                    }
                }
            }
            FamilyKind::OneSidedSeeley | FamilyKind::FiniteVandermonde => {}
        }
        Ok(())
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn beta(&self) -> Option<&Real> {
        self.beta.as_ref()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn tail(&self) -> &[Entry] {
        &self.tail
    }

    pub fn validated(&self) -> ValidatedRange {
        self.validated
    }

    pub fn residuals(&self) -> &[(i32, f64)] {
        &self.residuals
    }

    pub fn set_residuals(&mut self, residuals: Vec<(i32, f64)>) {
        self.residuals = residuals;
    }

    pub fn bits(&self) -> usize {
        self.entries.iter().map(|e| e.a.bits()).max().unwrap_or(64)
    }

    /// Largest `|j|` among the summed entries.
    pub fn jmax(&self) -> usize {
        self.entries.iter().map(|e| e.j.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn terms(&self) -> Vec<Term> {
        self.entries.iter().map(|e| Term { j: e.j, a: e.a.to_f64(), b: e.b.to_f64() }).collect()
    }

    pub fn tail_terms(&self) -> Vec<Term> {
        self.tail.iter().map(|e| Term { j: e.j, a: e.a.to_f64(), b: e.b.to_f64() }).collect()
    }

    pub fn id(&self) -> String {
        let beta = self.beta.as_ref().map(|b| format!(",beta={}", b.to_decimal_digits(6))).unwrap_or_default();
        let (lo, hi) = self.validated.bounds();
        format!("{}(n={}{beta},k={lo}..{hi})", self.kind, self.entries.len())
    }

    /// `max_j |a_j|` over the summed entries.
    pub fn max_abs_a(&self) -> Real {
        self.entries.iter().map(|e| e.a.abs()).fold(Real::zero(self.bits()), Real::max)
    }

    /// `(a_j(−b_j)^γ, b_j)` with the validated range shifted by `−γ`.
    ///
    /// Derived families keep the source kind but are not re-checked against
    /// its structural invariants.
    pub fn commuted(&self, gamma: i32) -> Result<CoefficientFamily> {
        let (lo, hi) = self.validated.bounds();
        let (nlo, nhi) = (lo - gamma, hi - gamma);
        if nlo > 0 || nhi < 0 {
            return Err(Error::RangeExit { shift: gamma });
        }
        let map = |e: &Entry| Entry { j: e.j, a: &e.a * &(-&e.b).powi(gamma), b: e.b.clone() };
        Ok(CoefficientFamily {
            kind: self.kind,
            beta: self.beta.clone(),
            delta: self.delta,
            entries: self.entries.iter().map(map).collect(),
            tail: self.tail.iter().map(map).collect(),
            validated: ValidatedRange::Span { m1: (-nlo) as u32, m2: nhi as u32 },
            residuals: Vec::new(),
        })
    }

    /// `(a_j(−b_j)^γ, 1/b_j)`; since `(−1/b)^k = (−b)^{−k}` the range
    /// becomes `γ − hi ..= γ − lo`.
    pub fn commuted_inverted(&self, gamma: i32) -> Result<CoefficientFamily> {
        let (lo, hi) = self.validated.bounds();
        let (nlo, nhi) = (gamma - hi, gamma - lo);
        if nlo > 0 || nhi < 0 {
            return Err(Error::RangeExit { shift: gamma });
        }
        let map = |e: &Entry| Entry { j: -e.j, a: &e.a * &(-&e.b).powi(gamma), b: e.b.recip() };
        let mut entries: Vec<Entry> = self.entries.iter().map(map).collect();
        entries.sort_by_key(|e| e.j);
        let mut tail: Vec<Entry> = self.tail.iter().map(map).collect();
        tail.sort_by_key(|e| e.j);
        Ok(CoefficientFamily {
            kind: self.kind,
            beta: self.beta.as_ref().map(Real::recip),
            delta: self.delta,
            entries,
            tail,
            validated: ValidatedRange::Span { m1: (-nlo) as u32, m2: nhi as u32 },
            residuals: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(j: i64, a: i64, b: f64) -> Entry {
        Entry { j, a: Real::from_i64(a, 128), b: Real::from_f64(b, 128) }
    }

    #[test]
    fn rejects_bad_entries() {
        let span = ValidatedRange::Span { m1: 0, m2: 0 };
        let kind = FamilyKind::FiniteVandermonde;
        assert!(CoefficientFamily::new(kind, None, 0.5, vec![entry(0, 1, -1.0)], vec![], span).is_err());
        assert!(CoefficientFamily::new(kind, None, 0.5, vec![entry(0, 1, 1.0), entry(0, 2, 2.0)], vec![], span).is_err());
        assert!(CoefficientFamily::new(kind, None, 0.0, vec![entry(0, 1, 1.0)], vec![], span).is_err());
        assert!(CoefficientFamily::new(kind, None, 0.5, vec![entry(0, 1, 1.0)], vec![], span).is_ok());
    }

    #[test]
    fn two_sided_invariants() {
        let sym = ValidatedRange::Symmetric { kmax: 0 };
        let kind = FamilyKind::TwoSidedDyadic;
        let good = vec![entry(-1, 2, 0.25), entry(0, -3, 1.0), entry(1, 2, 4.0)];
        assert!(CoefficientFamily::new(kind, None, 0.5, good, vec![], sym).is_ok());
        let asym = vec![entry(-1, 2, 0.25), entry(0, -3, 1.0), entry(1, 1, 4.0)];
        assert!(CoefficientFamily::new(kind, None, 0.5, asym, vec![], sym).is_err());
        let wrong_b = vec![entry(-1, 2, 0.25), entry(0, -3, 1.0), entry(1, 2, 3.0)];
        assert!(CoefficientFamily::new(kind, None, 0.5, wrong_b, vec![], sym).is_err());
    }

    #[test]
    fn range_shift() {
        let fam = CoefficientFamily::new(
            FamilyKind::FiniteVandermonde,
            None,
            0.5,
            vec![entry(0, 3, 1.0), entry(1, -2, 2.0)],
            vec![],
            ValidatedRange::Span { m1: 0, m2: 1 },
        )
        .unwrap();
        assert_eq!(fam.commuted(0).unwrap(), fam);
        assert_eq!(fam.commuted(1).unwrap().validated().bounds(), (-1, 0));
        assert!(fam.commuted(2).is_err());
        assert!(fam.commuted(-1).is_err());
        assert_eq!(fam.commuted_inverted(0).unwrap().validated().bounds(), (-1, 0));
    }
}
