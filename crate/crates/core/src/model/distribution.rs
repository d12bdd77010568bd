use std::collections::BTreeMap;

use super::{Rational, Symbol, Universe};
use crate::error::{Error, Result};

/// A finitely-supported probability distribution with exact weights.
///
/// Zero-weight entries are dropped, so the stored support is exactly the
/// set of symbols with positive probability.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Distribution {
    support: BTreeMap<Symbol, Rational>,
}

impl Distribution {
    pub fn new(entries: impl IntoIterator<Item = (Symbol, Rational)>) -> Result<Self> {
        let mut support: BTreeMap<Symbol, Rational> = BTreeMap::new();
        for (s, p) in entries {
            if p.is_negative() || p > Rational::one() {
                return Err(Error::InvalidDistribution(format!(
                    "probability {p} outside [0,1]"
                )));
            }
            *support.entry(s).or_insert_with(Rational::zero) += p;
        }
        support.retain(|_, p| !p.is_zero());
        let total: Rational = support.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        if support.values().any(|p| *p > Rational::one()) {
            return Err(Error::InvalidDistribution(
                "repeated symbol exceeds 1".into(),
            ));
        }
        Ok(Distribution { support })
    }

    pub fn point(s: Symbol) -> Self {
        Distribution {
            support: BTreeMap::from([(s, Rational::one())]),
        }
    }

    /// Uniform over `symbols`; panics on an empty slice.
    pub fn uniform(symbols: &[Symbol]) -> Self {
        assert!(!symbols.is_empty(), "uniform distribution over nothing");
        let p = Rational::new(1, symbols.len() as i64);
        let mut support = BTreeMap::new();
        for s in symbols {
            support.insert(*s, p.clone());
        }
        Distribution { support }
    }

    /// `w·a + (1−w)·b`.
    pub fn blend(a: &Distribution, b: &Distribution, w: &Rational) -> Self {
        let mut support: BTreeMap<Symbol, Rational> = BTreeMap::new();
        let v = Rational::one() - w;
        for (s, p) in &a.support {
            *support.entry(*s).or_insert_with(Rational::zero) += w * p;
        }
        for (s, p) in &b.support {
            *support.entry(*s).or_insert_with(Rational::zero) += &v * p;
        }
        support.retain(|_, p| !p.is_zero());
        Distribution { support }
    }

    pub fn prob(&self, s: Symbol) -> Rational {
        self.support.get(&s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Symbol, &Rational)> {
        self.support.iter().map(|(s, p)| (*s, p))
    }

    pub fn support(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.support.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// The symbol of a point mass.
    pub fn as_point(&self) -> Option<Symbol> {
        if self.support.len() == 1 {
            self.support.keys().next().copied()
        } else {
            None
        }
    }

    /// Highest-probability symbol; ties go to the smallest symbol.
    pub fn argmax(&self) -> Symbol {
        let mut best: Option<(Symbol, &Rational)> = None;
        for (s, p) in &self.support {
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((*s, p));
            }
        }
        best.expect("distribution has non-empty support").0
    }

    /// Smallest symbol whose cumulative probability reaches `u`.
    pub fn quantile(&self, u: &Rational) -> Symbol {
        let mut acc = Rational::zero();
        let mut last = None;
        for (s, p) in &self.support {
            acc += p;
            last = Some(*s);
            if acc >= *u {
                return *s;
            }
        }
        last.expect("distribution has non-empty support")
    }

    pub fn all_actions(&self) -> bool {
        self.support.keys().all(|s| s.is_action())
    }

    pub fn all_percepts(&self) -> bool {
        self.support.keys().all(|s| s.is_percept())
    }

    /// Expected reward of a percept distribution.
    pub fn expected_reward(&self, universe: &Universe) -> Rational {
        self.iter().map(|(s, p)| p * universe.reward(s)).sum()
    }

    pub fn to_named(&self, universe: &Universe) -> BTreeMap<String, Rational> {
        self.iter()
            .map(|(s, p)| (universe.name(s).to_string(), p.clone()))
            .collect()
    }

    pub fn from_named(map: &BTreeMap<String, Rational>, universe: &Universe) -> Result<Self> {
        let entries = map
            .iter()
            .map(|(n, p)| Ok((universe.symbol(n)?, p.clone())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_totals() {
        let a = Symbol::Action(0);
        let b = Symbol::Action(1);
        assert!(Distribution::new([(a, Rational::new(1, 2))]).is_err());
        assert!(Distribution::new([(a, Rational::new(3, 2)), (b, Rational::new(-1, 2))]).is_err());
        assert!(Distribution::new([]).is_err());
    }

    #[test]
    fn drops_zero_entries() {
        let a = Symbol::Action(0);
        let b = Symbol::Action(1);
        let d = Distribution::new([(a, Rational::one()), (b, Rational::zero())]).unwrap();
        assert_eq!(d.as_point(), Some(a));
    }

    #[test]
    fn argmax_and_quantile() {
        let a = Symbol::Action(0);
        let b = Symbol::Action(1);
        let d = Distribution::new([(a, Rational::new(1, 4)), (b, Rational::new(3, 4))]).unwrap();
        assert_eq!(d.argmax(), b);
        assert_eq!(d.quantile(&Rational::new(1, 3)), b);
        assert_eq!(d.quantile(&Rational::new(1, 4)), a);
        assert_eq!(Distribution::uniform(&[a, b]).argmax(), a);
    }

    proptest! {
        #[test]
        fn normalization_is_exact(ws in proptest::collection::vec(1u32..50, 1..6)) {
            let total: u32 = ws.iter().sum();
            let entries = ws.iter().enumerate()
                .map(|(i, w)| (Symbol::Percept(i as u16), Rational::new(*w as i64, total as i64)));
            let d = Distribution::new(entries).unwrap();
            let sum: Rational = d.iter().map(|(_, p)| p.clone()).sum();
            prop_assert!(sum.is_one());
        }

        #[test]
        fn blend_is_normalized(p in 0i64..=8, w in 0i64..=8) {
            let a = Symbol::Action(0);
            let b = Symbol::Action(1);
            let d1 = Distribution::new([(a, Rational::new(p, 8)), (b, Rational::new(8 - p, 8))]).unwrap();
            let d2 = Distribution::point(b);
            let m = Distribution::blend(&d1, &d2, &Rational::new(w, 8));
            let sum: Rational = m.iter().map(|(_, p)| p.clone()).sum();
            prop_assert!(sum.is_one());
        }
    }
}
