//! Named measurements compared against analytic bounds.

use alloc::string::String;
use alloc::vec::Vec;

/// How a measured value is compared with its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `measured ≤ bound + tolerance`
    AtMost,
    /// `measured < bound` (tolerance is reported but not added)
    Below,
    /// `measured ≥ bound - tolerance`
    AtLeast,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::Below => "<",
            Relation::AtLeast => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// The inequality or identity being tested, written out.
    pub anchor: String,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    pub fn new(name: &str, anchor: &str, relation: Relation, measured: f64, bound: f64, tolerance: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => measured <= bound + tolerance,
            Relation::Below => measured < bound,
            Relation::AtLeast => measured >= bound - tolerance,
        };
        Self {
            name: name.into(),
            anchor: anchor.into(),
            measured,
            bound,
            tolerance,
            relation,
            passed,
        }
    }

    /// A check that could not be evaluated; always failed, measured is NaN.
    pub fn unevaluated(name: &str, anchor: &str, bound: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            measured: f64::NAN,
            bound,
            tolerance,
            relation: Relation::AtMost,
            passed: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckReport {
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) -> &mut Self {
        self.checks.push(check);
        self
    }

    pub fn at_most(&mut self, name: &str, anchor: &str, measured: f64, bound: f64, tolerance: f64) -> &mut Self {
        self.push(Check::new(name, anchor, Relation::AtMost, measured, bound, tolerance))
    }

    pub fn below(&mut self, name: &str, anchor: &str, measured: f64, bound: f64) -> &mut Self {
        self.push(Check::new(name, anchor, Relation::Below, measured, bound, 0.0))
    }

    pub fn at_least(&mut self, name: &str, anchor: &str, measured: f64, bound: f64, tolerance: f64) -> &mut Self {
        self.push(Check::new(name, anchor, Relation::AtLeast, measured, bound, tolerance))
    }

    pub fn merge(&mut self, other: CheckReport) -> &mut Self {
        self.checks.extend(other.checks);
        self
    }

    /// Fold `other` in, keeping one entry per check name: a failure over a
    /// pass, then the larger `measured - bound`.
    pub fn merge_worst(&mut self, other: &CheckReport) -> &mut Self {
        for c in &other.checks {
            match self.checks.iter_mut().find(|e| e.name == c.name) {
                Some(e) => {
                    let worse = !c.passed && e.passed
                        || (c.passed == e.passed && c.measured - c.bound > e.measured - e.bound);
                    if worse || c.measured.is_nan() {
                        *e = c.clone();
                    }
                }
                None => self.checks.push(c.clone()),
            }
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Check::new("a", "", Relation::AtMost, 1.0 + 1e-12, 1.0, 1e-9).passed);
        assert!(!Check::new("a", "", Relation::Below, 0.5, 0.5, 1.0).passed);
        assert!(Check::new("a", "", Relation::AtLeast, 0.9, 1.0, 0.2).passed);
        assert!(!Check::new("a", "", Relation::AtMost, f64::NAN, 1.0, 1.0).passed);
    }

    #[test]
    fn merge_worst_keeps_one_entry_per_name() {
        let mut a = CheckReport::new();
        a.at_most("x", "", 0.5, 1.0, 0.0);
        let mut b = CheckReport::new();
        b.at_most("x", "", 0.9, 1.0, 0.0).at_most("y", "", 2.0, 1.0, 0.0);
        a.merge_worst(&b);
        assert_eq!(a.len(), 2);
        assert_eq!(a.get("x").unwrap().measured, 0.9);
        assert!(!a.passed());
    }

    #[test]
    fn report_passes_iff_all_pass() {
        let mut r = CheckReport::new();
        assert!(r.passed());
        r.at_most("x", "", 0.0, 1.0, 0.0);
        assert!(r.passed());
        r.below("y", "", 2.0, 1.0);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
        assert_eq!(r.get("y").unwrap().bound, 1.0);
    }
}
