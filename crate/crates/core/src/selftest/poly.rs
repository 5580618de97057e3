//! Noncommutative words and polynomials in Bob's and Charlie's projectors.
//!
//! Symbol `i` of a party is the projector `(I + O_i)/2` onto the `+1`
//! outcome of that party's setting `i`. Projectors are idempotent and the
//! two parties commute, so a canonical word is a pair of letter strings with
//! no two equal neighbours.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Number of Bob settings and Charlie settings.
pub const BOB_SYMBOLS: u8 = 6;
pub const CHARLIE_SYMBOLS: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word {
    pub bob: Vec<u8>,
    pub charlie: Vec<u8>,
}

fn push_reduced(out: &mut Vec<u8>, letters: &[u8]) {
    for &l in letters {
        if out.last() != Some(&l) {
            out.push(l);
        }
    }
}

impl Word {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new(bob: &[u8], charlie: &[u8]) -> Self {
        assert!(bob.iter().all(|&b| (1..=BOB_SYMBOLS).contains(&b)), "Bob symbol out of range");
        assert!(charlie.iter().all(|&c| (1..=CHARLIE_SYMBOLS).contains(&c)), "Charlie symbol out of range");
        let mut w = Self::identity();
        push_reduced(&mut w.bob, bob);
        push_reduced(&mut w.charlie, charlie);
        w
    }

    pub fn bob(i: u8) -> Self {
        Self::new(&[i], &[])
    }

    pub fn charlie(k: u8) -> Self {
        Self::new(&[], &[k])
    }

    pub fn is_identity(&self) -> bool {
        self.bob.is_empty() && self.charlie.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bob.len() + self.charlie.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn mul(&self, rhs: &Word) -> Word {
        let mut bob = self.bob.clone();
        push_reduced(&mut bob, &rhs.bob);
        let mut charlie = self.charlie.clone();
        push_reduced(&mut charlie, &rhs.charlie);
        Word { bob, charlie }
    }

    /// Reverses each party's string.
    pub fn adjoint(&self) -> Word {
        Word {
            bob: self.bob.iter().rev().copied().collect(),
            charlie: self.charlie.iter().rev().copied().collect(),
        }
    }

    /// Representative of `{w, w^dagger}`; real moments agree on both.
    pub fn moment_key(&self) -> Word {
        let adj = self.adjoint();
        if adj < *self {
            adj
        } else {
            self.clone()
        }
    }

    /// Inverse of the `Display` form, e.g. `B3B4C1` or `1`.
    pub fn parse(s: &str) -> Option<Word> {
        if s == "1" {
            return Some(Word::identity());
        }
        let bytes = s.as_bytes();
        if bytes.len() % 2 != 0 {
            return None;
        }
        let mut bob = Vec::new();
        let mut charlie = Vec::new();
        for pair in bytes.chunks(2) {
            let d = pair[1].checked_sub(b'0')?;
            match pair[0] {
                b'B' if (1..=BOB_SYMBOLS).contains(&d) && charlie.is_empty() => bob.push(d),
                b'C' if (1..=CHARLIE_SYMBOLS).contains(&d) => charlie.push(d),
                _ => return None,
            }
        }
        let w = Word::new(&bob, &charlie);
        (w.bob.len() == bob.len() && w.charlie.len() == charlie.len()).then_some(w)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("1");
        }
        for b in &self.bob {
            write!(f, "B{b}")?;
        }
        for c in &self.charlie {
            write!(f, "C{c}")?;
        }
        Ok(())
    }
}

/// Real linear combination of words.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    pub terms: BTreeMap<Word, f64>,
}

const DROP: f64 = 1e-14;

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(Word::identity(), c)
    }

    pub fn monomial(w: Word, c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(w, c);
        p
    }

    /// Dichotomic observable `2 Pi - I` of Bob's setting `i`.
    pub fn bob_observable(i: u8) -> Self {
        Self::monomial(Word::bob(i), 2.0).add(&Self::constant(-1.0))
    }

    /// Dichotomic observable `2 Pi - I` of Charlie's setting `k`.
    pub fn charlie_observable(k: u8) -> Self {
        Self::monomial(Word::charlie(k), 2.0).add(&Self::constant(-1.0))
    }

    pub fn add_term(&mut self, w: Word, c: f64) {
        let entry = self.terms.entry(w).or_insert(0.0);
        *entry += c;
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|_, c| c.abs() > DROP);
        self
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), *c);
        }
        out.pruned()
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly { terms: self.terms.iter().map(|(w, c)| (w.clone(), c * s)).collect() }.pruned()
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.add_term(a.mul(b), x * y);
            }
        }
        out.pruned()
    }

    pub fn adjoint(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(w, c)| (w.adjoint(), *c)).collect() }
    }

    /// Collects terms by [`Word::moment_key`].
    pub fn by_moment(&self) -> Poly {
        let mut out = Poly::zero();
        for (w, c) in &self.terms {
            out.add_term(w.moment_key(), *c);
        }
        out.pruned()
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.terms.keys()
    }

    /// Evaluates with a moment function.
    pub fn evaluate(&self, mut moment: impl FnMut(&Word) -> f64) -> f64 {
        self.terms.iter().map(|(w, c)| c * moment(w)).sum()
    }

    /// Coefficient-wise maximum difference after collecting moments.
    pub fn moment_distance(&self, rhs: &Poly) -> f64 {
        self.by_moment().add(&rhs.by_moment().scale(-1.0)).terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(w, c)| alloc::format!("{c:+}*{w}")).collect();
        f.write_str(&parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_collapses_repeats() {
        let w = Word::new(&[3, 3, 4, 4, 3], &[1, 1]);
        assert_eq!(w, Word::new(&[3, 4, 3], &[1]));
        assert_eq!(w.mul(&Word::new(&[3], &[1, 2])), Word::new(&[3, 4, 3], &[1, 2]));
    }

    #[test]
    fn adjoint_reverses_each_party() {
        let w = Word::new(&[1, 2, 5], &[3, 1]);
        assert_eq!(w.adjoint(), Word::new(&[5, 2, 1], &[1, 3]));
        assert_eq!(w.adjoint().adjoint(), w);
        assert_eq!(w.moment_key(), w.adjoint().moment_key());
    }

    #[test]
    fn display_round_trips() {
        for w in [Word::identity(), Word::new(&[3, 4], &[]), Word::new(&[1], &[2, 3])] {
            assert_eq!(Word::parse(&w.to_string()), Some(w));
        }
        assert_eq!(Word::parse("B3B3"), None);
        assert_eq!(Word::parse("C1B2"), None);
        assert_eq!(Word::parse("B7"), None);
    }

    #[test]
    fn observables_square_to_identity() {
        for i in 1..=BOB_SYMBOLS {
            let o = Poly::bob_observable(i);
            assert_eq!(o.mul(&o), Poly::constant(1.0));
        }
        let c = Poly::charlie_observable(2);
        assert_eq!(c.mul(&c), Poly::constant(1.0));
    }

    #[test]
    fn parties_commute() {
        let b = Poly::bob_observable(1);
        let c = Poly::charlie_observable(3);
        assert_eq!(b.mul(&c), c.mul(&b));
    }
}
