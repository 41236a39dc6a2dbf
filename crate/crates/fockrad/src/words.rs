//! Words in the free semigroup on `n` generators and the graded basis they index.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default ceiling on the number of basis words a [`FockBasis`] may hold.
pub const DEFAULT_BASIS_CAP: usize = 200_000;

/// A word `g_{i1} g_{i2} ... g_{ik}`; letters are 1-based generator indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<u16>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<u16>) -> Self {
        debug_assert!(letters.iter().all(|&l| l >= 1));
        Word(letters)
    }

    pub fn letter(i: u16) -> Self {
        Word(vec![i])
    }

    pub fn letters(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_letter(&self) -> u16 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&self, letter: u16) -> Word {
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }

    pub fn reverse(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// `ω` with `self = prefix · ω`, if `prefix` is a prefix of `self`.
    pub fn right_quotient(&self, prefix: &Word) -> Option<Word> {
        if self.0.starts_with(&prefix.0) {
            Some(Word(self.0[prefix.len()..].to_vec()))
        } else {
            None
        }
    }

    /// Parses `"e"`, `"g1.g2.g1"` or `"1.2.1"`.
    pub fn parse(s: &str) -> Result<Word> {
        let s = s.trim();
        if s == "e" || s.is_empty() {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        for part in s.split('.') {
            let digits = part.strip_prefix('g').unwrap_or(part);
            let l: u16 = digits
                .parse()
                .map_err(|_| Error::Parse(format!("bad word letter `{part}` in `{s}`")))?;
            if l == 0 {
                return Err(Error::Parse(format!("generator index 0 in word `{s}`")));
            }
            letters.push(l);
        }
        Ok(Word(letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ".")?;
            }
            write!(f, "g{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Letters(Vec<u16>),
        }
        match Repr::deserialize(d)? {
            Repr::Text(s) => Word::parse(&s).map_err(serde::de::Error::custom),
            Repr::Letters(v) => {
                if v.contains(&0) {
                    Err(serde::de::Error::custom("generator index 0 in word"))
                } else {
                    Ok(Word(v))
                }
            }
        }
    }
}

/// All words of length at most `q` over `n` generators, length first then lexicographic.
#[derive(Clone, Debug)]
pub struct FockBasis {
    n: usize,
    q: usize,
    words: Vec<Word>,
    level_start: Vec<usize>,
    index: HashMap<Word, usize>,
}

/// `1 + n + ... + n^q`, or `None` on overflow.
pub fn fock_dim(n: usize, q: usize) -> Option<usize> {
    let mut total: usize = 0;
    let mut level: usize = 1;
    for k in 0..=q {
        total = total.checked_add(level)?;
        if k < q {
            level = level.checked_mul(n)?;
        }
    }
    Some(total)
}

impl FockBasis {
    pub fn enumerate(n: usize, q: usize) -> Result<Self> {
        Self::enumerate_capped(n, q, DEFAULT_BASIS_CAP)
    }

    pub fn enumerate_capped(n: usize, q: usize, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("generator count must be at least 1".into()));
        }
        let size = fock_dim(n, q).filter(|&s| s <= cap).ok_or(Error::TooLarge {
            what: "Fock basis",
            size: fock_dim(n, q).unwrap_or(usize::MAX),
            cap,
        })?;
        let mut words = Vec::with_capacity(size);
        let mut level_start = Vec::with_capacity(q + 2);
        words.push(Word::empty());
        level_start.push(0);
        let mut prev = 0..1;
        for _ in 1..=q {
            level_start.push(words.len());
            let start = words.len();
            for idx in prev.clone() {
                for l in 1..=n as u16 {
                    let w = words[idx].push(l);
                    words.push(w);
                }
            }
            prev = start..words.len();
        }
        level_start.push(words.len());
        let index = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        Ok(FockBasis { n, q, words, level_start, index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &Word {
        &self.words[i]
    }

    pub fn position(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Index range of the words of length `k`.
    pub fn level(&self, k: usize) -> std::ops::Range<usize> {
        self.level_start[k]..self.level_start[k + 1]
    }

    /// Position of `g_l α` given the position of `α`, when it fits.
    pub fn left_mul(&self, l: u16, pos: usize) -> Option<usize> {
        let w = &self.words[pos];
        if w.len() >= self.q {
            return None;
        }
        let mut v = Vec::with_capacity(w.len() + 1);
        v.push(l);
        v.extend_from_slice(w.letters());
        self.position(&Word(v))
    }

    /// Position of `α g_l` given the position of `α`, when it fits.
    pub fn right_mul(&self, l: u16, pos: usize) -> Option<usize> {
        let w = &self.words[pos];
        if w.len() >= self.q {
            return None;
        }
        // Children of a word are laid out contiguously in generator order.
        let k = w.len();
        let offset = pos - self.level_start[k];
        Some(self.level_start[k + 1] + offset * self.n + (l as usize - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn concat_examples() {
        assert_eq!(w("g1").concat(&w("g2.g1")), w("g1.g2.g1"));
        assert_eq!(Word::empty().concat(&w("g2")), w("g2"));
        assert_eq!(w("g1.g1").concat(&w("g1")), w("g1.g1.g1"));
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(w("g1.g2.g3").reverse(), w("g3.g2.g1"));
        assert_eq!(Word::empty().reverse(), Word::empty());
        assert_eq!(w("g1.g1").reverse(), w("g1.g1"));
    }

    #[test]
    fn right_quotient_examples() {
        assert_eq!(w("g1.g2.g1").right_quotient(&w("g1.g2")), Some(w("g1")));
        assert_eq!(w("g1.g2").right_quotient(&w("g2")), None);
        assert_eq!(w("g2").right_quotient(&Word::empty()), Some(w("g2")));
    }

    #[test]
    fn enumerate_sizes() {
        assert_eq!(FockBasis::enumerate(2, 2).unwrap().len(), 7);
        assert_eq!(FockBasis::enumerate(1, 4).unwrap().len(), 5);
        let b = FockBasis::enumerate(3, 0).unwrap();
        assert_eq!(b.words(), &[Word::empty()]);
    }

    #[test]
    fn enumerate_cap() {
        assert!(matches!(FockBasis::enumerate(4, 12), Err(Error::TooLarge { .. })));
        assert!(FockBasis::enumerate_capped(2, 3, 14).is_err());
        assert!(FockBasis::enumerate_capped(2, 3, 15).is_ok());
    }

    #[test]
    fn graded_order() {
        let b = FockBasis::enumerate(2, 2).unwrap();
        let s: Vec<String> = b.words().iter().map(|w| w.to_string()).collect();
        assert_eq!(s, ["e", "g1", "g2", "g1.g1", "g1.g2", "g2.g1", "g2.g2"]);
    }

    #[test]
    fn right_mul_matches_lookup() {
        let b = FockBasis::enumerate(3, 3).unwrap();
        for p in 0..b.len() {
            for l in 1..=3u16 {
                let expect = if b.word(p).len() < 3 { b.position(&b.word(p).push(l)) } else { None };
                assert_eq!(b.right_mul(l, p), expect);
            }
        }
    }

    #[test]
    fn serde_forms() {
        let x: Word = serde_json::from_str("\"g1.g2.g1\"").unwrap();
        let y: Word = serde_json::from_str("[1,2,1]").unwrap();
        let e: Word = serde_json::from_str("\"e\"").unwrap();
        assert_eq!(x, y);
        assert!(e.is_empty());
        assert_eq!(serde_json::to_string(&x).unwrap(), "\"g1.g2.g1\"");
        assert!(serde_json::from_str::<Word>("\"g0\"").is_err());
    }
}
