//! Bit-string labels and finite sets of equal-length labels.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Longest label the simulator handles.
pub const MAX_LABEL_LEN: u8 = 60;

/// Longest label length for which [`LabelSet`] can hold every subset of `{0,1}^e`.
pub const MAX_SET_WIDTH: u8 = 6;

/// A finite bit string. The first symbol is the most significant bit of `bits`,
/// so numeric order on `bits` is lexicographic order among strings of one length.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Label {
    len: u8,
    bits: u64,
}

impl Label {
    pub const EMPTY: Label = Label { len: 0, bits: 0 };

    pub fn new(len: u8, bits: u64) -> Label {
        assert!(len <= MAX_LABEL_LEN, "label too long");
        let mask = if len == 0 { 0 } else { u64::MAX >> (64 - len as u32) };
        Label { len, bits: bits & mask }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Lexicographic code among strings of the same length.
    pub fn code(&self) -> u64 {
        self.bits
    }

    pub fn bit(&self, i: usize) -> u8 {
        assert!(i < self.len());
        ((self.bits >> (self.len as usize - 1 - i)) & 1) as u8
    }

    pub fn push(&self, b: u8) -> Label {
        Label::new(self.len + 1, (self.bits << 1) | (b as u64 & 1))
    }

    pub fn prefix(&self, n: usize) -> Label {
        assert!(n <= self.len());
        Label { len: n as u8, bits: if n == 0 { 0 } else { self.bits >> (self.len as usize - n) } }
    }

    /// `self` extends `other` (reflexive).
    pub fn extends(&self, other: &Label) -> bool {
        self.len >= other.len && self.prefix(other.len()) == *other
    }

    /// All strings of length `e`, in lexicographic order.
    pub fn all_of_len(e: usize) -> impl Iterator<Item = Label> {
        let count = 1u64 << e;
        (0..count).map(move |b| Label::new(e as u8, b))
    }

    pub fn parse(s: &str) -> Option<Label> {
        if s == "_" || s.is_empty() {
            return Some(Label::EMPTY);
        }
        if s.len() > MAX_LABEL_LEN as usize {
            return None;
        }
        let mut out = Label::EMPTY;
        for c in s.chars() {
            out = match c {
                '0' => out.push(0),
                '1' => out.push(1),
                _ => return None,
            };
        }
        Some(out)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("_");
        }
        for i in 0..self.len() {
            f.write_str(if self.bit(i) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Label({self})")
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Label::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad label {s:?}")))
    }
}

/// A subset of `{0,1}^e`, stored as a bitmask indexed by label code.
/// The mask value is the canonical set index: the sum of `2^code(ρ)` over members.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelSet {
    width: u8,
    mask: u64,
}

impl LabelSet {
    pub fn empty(width: usize) -> LabelSet {
        assert!(width <= MAX_SET_WIDTH as usize, "label sets limited to width {MAX_SET_WIDTH}");
        LabelSet { width: width as u8, mask: 0 }
    }

    pub fn full(width: usize) -> LabelSet {
        let mut s = LabelSet::empty(width);
        s.mask = if s.universe_size() == 64 { u64::MAX } else { (1u64 << s.universe_size()) - 1 };
        s
    }

    pub fn from_index(width: usize, index: u64) -> LabelSet {
        let mut s = LabelSet::full(width);
        s.mask &= index;
        s
    }

    pub fn from_labels<'a>(width: usize, labels: impl IntoIterator<Item = &'a Label>) -> LabelSet {
        let mut s = LabelSet::empty(width);
        for l in labels {
            s = s.with(*l);
        }
        s
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn universe_size(&self) -> usize {
        1usize << self.width
    }

    /// Canonical index: the sum of `2^code(ρ)` over members.
    pub fn index(&self) -> u64 {
        self.mask
    }

    pub fn contains(&self, l: &Label) -> bool {
        l.len() == self.width() && (self.mask >> l.code()) & 1 == 1
    }

    pub fn with(mut self, l: Label) -> LabelSet {
        assert_eq!(l.len(), self.width(), "label length must match set width");
        self.mask |= 1u64 << l.code();
        self
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Label> + '_ {
        Label::all_of_len(self.width()).filter(move |l| self.contains(l))
    }

    /// Every subset of `{0,1}^width`, in canonical index order.
    pub fn all_subsets(width: usize) -> impl Iterator<Item = LabelSet> {
        let full = LabelSet::full(width).mask;
        let count = full as u128 + 1;
        (0..count).map(move |i| LabelSet { width: width as u8, mask: i as u64 })
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LabelSet{self}")
    }
}
