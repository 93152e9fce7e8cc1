//! The wreath product C₂≀Cₙ: lamp configurations, elements, the group law and
//! the cyclic geometry (distances, shifts, arcs) everything else is built on.
//!
//! Group law: `(x, g)·(y, k) = (x △ (y − g), g + k)`, i.e. coordinate `h` of the
//! product is `x_h + y_{g+h}`. Under this law right-multiplying by the toggle
//! `({0}, 0)` flips the lamp at the *negated* lighter position.

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{usage, Result};

/// Smallest supported cycle length.
pub const MIN_N: usize = 3;

type Words = SmallVec<[u64; 1]>;

fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Reduces a signed offset into `0..n`.
#[inline]
pub fn wrap(value: i64, n: usize) -> usize {
    value.rem_euclid(n as i64) as usize
}

/// Residue in Cₙ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CycleIndex(usize);

impl CycleIndex {
    pub fn new(value: usize, n: usize) -> Result<Self> {
        if value >= n {
            return Err(usage(format!("residue {value} out of range for n={n}")));
        }
        Ok(CycleIndex(value))
    }

    pub fn wrapping(value: i64, n: usize) -> Self {
        CycleIndex(wrap(value, n))
    }

    #[inline]
    pub fn value(self) -> usize {
        self.0
    }
}

impl fmt::Display for CycleIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A subset of Cₙ stored as an n-bit characteristic vector. One inline word
/// covers n ≤ 64; larger n spill to the heap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LampConfig {
    n: usize,
    words: Words,
}

impl LampConfig {
    pub fn empty(n: usize) -> Self {
        LampConfig { n, words: SmallVec::from_elem(0, words_for(n)) }
    }

    pub fn full(n: usize) -> Self {
        let mut c = Self::empty(n);
        for k in 0..n {
            c.insert(k);
        }
        c
    }

    pub fn singleton(n: usize, k: usize) -> Self {
        let mut c = Self::empty(n);
        c.insert(k % n);
        c
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(n: usize, members: I) -> Result<Self> {
        let mut c = Self::empty(n);
        for k in members {
            if k >= n {
                return Err(usage(format!("lamp {k} out of range for n={n}")));
            }
            c.insert(k);
        }
        Ok(c)
    }

    /// Builds a configuration from the low `n` bits of `bits` (n ≤ 64).
    pub fn from_bits(n: usize, bits: u64) -> Self {
        debug_assert!(n <= 64);
        let mut words = SmallVec::new();
        words.push(bits & low_mask(n));
        LampConfig { n, words }
    }

    /// Characteristic vector as one word, when n ≤ 64.
    #[inline]
    pub fn bits(&self) -> Option<u64> {
        (self.n <= 64).then(|| self.words[0])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, k: usize) -> bool {
        k < self.n && (self.words[k / 64] >> (k % 64)) & 1 == 1
    }

    pub fn insert(&mut self, k: usize) {
        debug_assert!(k < self.n);
        self.words[k / 64] |= 1 << (k % 64);
    }

    pub fn toggle(&mut self, k: usize) {
        debug_assert!(k < self.n);
        self.words[k / 64] ^= 1 << (k % 64);
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Members in increasing order.
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect();
        LampConfig { n: self.n, words }
    }

    pub fn intersection_len(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// `α^k(x) = {i − k : i ∈ x}`.
    pub fn shift(&self, k: i64) -> Self {
        let n = self.n;
        let k = wrap(k, n);
        if k == 0 {
            return self.clone();
        }
        if let Some(b) = self.bits() {
            // bit i moves to i − k: a right rotation inside the n-bit ring
            let rotated = (b >> k) | (b << (n - k));
            return Self::from_bits(n, rotated);
        }
        let mut out = Self::empty(n);
        for i in self.members() {
            out.insert((i + n - k) % n);
        }
        out
    }

    /// The reflected set `{−i : i ∈ x}`.
    pub fn negate(&self) -> Self {
        let n = self.n;
        let mut out = Self::empty(n);
        for i in self.members() {
            out.insert((n - i) % n);
        }
        out
    }
}

impl fmt::Debug for LampConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}

impl fmt::Display for LampConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for LampConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.members())
    }
}

/// The element `(x, j)` of C₂≀Cₙ; `n` is carried by the lamp configuration.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GroupElement {
    pub lamps: LampConfig,
    pub pos: CycleIndex,
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        GroupElement { lamps: LampConfig::empty(n), pos: CycleIndex(0) }
    }

    pub fn new(lamps: LampConfig, pos: usize) -> Result<Self> {
        let n = lamps.n();
        Ok(GroupElement { pos: CycleIndex::new(pos, n)?, lamps })
    }

    pub fn from_parts(n: usize, lamps: &[usize], pos: usize) -> Result<Self> {
        Self::new(LampConfig::from_members(n, lamps.iter().copied())?, pos)
    }

    /// The toggle generator `({0}, 0)`.
    pub fn toggle(n: usize) -> Self {
        GroupElement { lamps: LampConfig::singleton(n, 0), pos: CycleIndex(0) }
    }

    /// The movement `(∅, s)`.
    pub fn step(n: usize, s: i64) -> Self {
        GroupElement { lamps: LampConfig::empty(n), pos: CycleIndex::wrapping(s, n) }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.lamps.n()
    }

    pub fn is_identity(&self) -> bool {
        self.pos.0 == 0 && self.lamps.is_empty()
    }

    /// Dense index `pos·2ⁿ + bits(lamps)`; requires n ≤ 40.
    pub fn dense_index(&self) -> usize {
        let n = self.n();
        debug_assert!(n <= 40);
        (self.pos.0 << n) | self.lamps.bits().expect("dense index needs n ≤ 64") as usize
    }

    pub fn from_dense_index(n: usize, index: usize) -> Self {
        let bits = (index & ((1usize << n) - 1)) as u64;
        GroupElement { lamps: LampConfig::from_bits(n, bits), pos: CycleIndex(index >> n) }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lamps, self.pos)
    }
}

impl Serialize for GroupElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("GroupElement", 2)?;
        st.serialize_field("lamps", &self.lamps)?;
        st.serialize_field("pos", &self.pos)?;
        st.end()
    }
}

fn check_same_n(a: &GroupElement, b: &GroupElement) -> Result<()> {
    if a.n() != b.n() {
        return Err(usage(format!("mismatched moduli: {} vs {}", a.n(), b.n())));
    }
    Ok(())
}

/// `(x, j)·(y, k) = (x △ α^j(y), j + k)`.
pub fn multiply(a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
    check_same_n(a, b)?;
    Ok(mul(a, b))
}

pub(crate) fn mul(a: &GroupElement, b: &GroupElement) -> GroupElement {
    let n = a.n();
    let shifted = b.lamps.shift(a.pos.0 as i64);
    GroupElement {
        lamps: a.lamps.symmetric_difference(&shifted),
        pos: CycleIndex((a.pos.0 + b.pos.0) % n),
    }
}

/// `(x, j)⁻¹ = (x + j, −j)`.
pub fn inverse(g: &GroupElement) -> GroupElement {
    let n = g.n();
    GroupElement {
        lamps: g.lamps.shift(-(g.pos.0 as i64)),
        pos: CycleIndex((n - g.pos.0) % n),
    }
}

/// `b⁻¹·a`, the displacement that left-invariant quantities depend on.
pub fn displacement(a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
    check_same_n(a, b)?;
    Ok(mul(&inverse(b), a))
}

#[inline]
pub fn cyclic_distance(j: usize, k: usize, n: usize) -> usize {
    let d = (j + n - k % n) % n;
    d.min(n - d)
}

/// `α^k(x)`.
pub fn shift(x: &LampConfig, k: i64) -> LampConfig {
    x.shift(k)
}

/// A connected run of `length` residues starting at `start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Arc {
    start: usize,
    length: usize,
    n: usize,
}

impl Arc {
    pub fn new(start: usize, length: usize, n: usize) -> Result<Self> {
        if length == 0 {
            return Err(usage("empty arc"));
        }
        if length > n || start >= n {
            return Err(usage(format!("arc start={start} length={length} invalid for n={n}")));
        }
        Ok(Arc { start, length, n })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, k: usize) -> bool {
        (k + self.n - self.start) % self.n < self.length
    }

    pub fn last(&self) -> usize {
        (self.start + self.length - 1) % self.n
    }

    /// `−I`.
    pub fn reflect(&self) -> Arc {
        Arc { start: (self.n - self.last()) % self.n, ..*self }
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.length).map(move |t| (self.start + t) % self.n)
    }

    pub fn as_lamps(&self) -> LampConfig {
        let mut c = LampConfig::empty(self.n);
        for k in self.members() {
            c.insert(k);
        }
        c
    }
}

/// `d_{Cₙ}(k, I)`.
pub fn arc_distance(k: usize, arc: &Arc) -> usize {
    if arc.contains(k) {
        return 0;
    }
    let n = arc.n;
    cyclic_distance(k, arc.start, n).min(cyclic_distance(k, arc.last(), n))
}

/// The n arcs of length ⌊n/3⌋, one starting at each residue.
pub fn arc_family(n: usize) -> Result<Vec<Arc>> {
    if n < MIN_N {
        return Err(usage(format!("arc family needs n ≥ {MIN_N}, got {n}")));
    }
    (0..n).map(|s| Arc::new(s, n / 3, n)).collect()
}

/// C₂≀Cₙ for a fixed n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lamplighter {
    n: usize,
}

impl Lamplighter {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_N {
            return Err(usage(format!("lamplighter needs n ≥ {MIN_N}, got {n}")));
        }
        Ok(Lamplighter { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `n·2ⁿ`, or `None` when it does not fit in a usize.
    pub fn order(&self) -> Option<usize> {
        1usize.checked_shl(self.n as u32).filter(|_| self.n < 58).map(|p| p * self.n)
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.n)
    }

    /// Every element in dense-index order (n ≤ 24).
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        assert!(self.n <= 24, "element enumeration limited to n ≤ 24");
        let n = self.n;
        (0..n << n).map(move |i| GroupElement::from_dense_index(n, i))
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        mul(a, b)
    }

    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        inverse(g)
    }

    /// Uniformly random element.
    pub fn random_element<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        let n = self.n;
        let mut lamps = LampConfig::empty(n);
        for (wi, w) in lamps.words.iter_mut().enumerate() {
            let live = (n - wi * 64).min(64);
            *w = rng.gen::<u64>() & low_mask(live);
        }
        GroupElement { lamps, pos: CycleIndex(rng.gen_range(0..n)) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(n: usize, lamps: &[usize], pos: usize) -> GroupElement {
        GroupElement::from_parts(n, lamps, pos).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let g = el(5, &[1, 4], 3);
        let e = GroupElement::identity(5);
        assert_eq!(multiply(&e, &g).unwrap(), g);
        assert_eq!(multiply(&g, &e).unwrap(), g);
    }

    #[test]
    fn toggle_is_an_involution() {
        let t = GroupElement::toggle(6);
        assert!(multiply(&t, &t).unwrap().is_identity());
    }

    #[test]
    fn move_then_toggle() {
        let p = multiply(&el(4, &[], 1), &el(4, &[0], 0)).unwrap();
        assert_eq!(p, el(4, &[3], 1));
    }

    #[test]
    fn inverse_examples() {
        assert!(inverse(&GroupElement::identity(4)).is_identity());
        assert_eq!(inverse(&el(4, &[0], 1)), el(4, &[1], 3));
        let g = el(4, &[3], 1);
        assert!(multiply(&g, &inverse(&g)).unwrap().is_identity());
        assert!(multiply(&inverse(&g), &g).unwrap().is_identity());
    }

    #[test]
    fn mismatched_moduli_rejected() {
        let err = multiply(&el(4, &[], 1), &el(5, &[], 1)).unwrap_err();
        assert!(matches!(err, crate::Error::Usage(_)));
    }

    #[test]
    fn exhaustive_associativity_small_n() {
        for n in 3..=4 {
            let g = Lamplighter::new(n).unwrap();
            let all: Vec<_> = g.elements().collect();
            for a in &all {
                for b in &all {
                    let ab = mul(a, b);
                    for c in &all {
                        assert_eq!(mul(&ab, c), mul(a, &mul(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_law_exhaustive() {
        for n in 3..=6 {
            let g = Lamplighter::new(n).unwrap();
            for a in g.elements() {
                assert!(mul(&a, &inverse(&a)).is_identity());
                assert!(mul(&inverse(&a), &a).is_identity());
            }
        }
    }

    #[test]
    fn cyclic_distance_examples() {
        assert_eq!(cyclic_distance(0, 7, 12), 5);
        assert_eq!(cyclic_distance(4, 4, 12), 0);
        assert_eq!(cyclic_distance(0, 11, 12), 1);
    }

    #[test]
    fn shift_examples() {
        for n in [3, 5, 9, 70] {
            let x = LampConfig::from_members(n, [1, 2]).unwrap();
            assert_eq!(x.shift(1), LampConfig::from_members(n, [0, 1]).unwrap());
            assert_eq!(x.shift(0), x);
            assert_eq!(x.shift(n as i64), x);
            assert_eq!(x.shift(-3).shift(3), x);
        }
    }

    #[test]
    fn wide_configs_match_word_configs() {
        // the same set at n=64 (one word) and n=65 (two words) shifts consistently
        let a = LampConfig::from_members(64, [0, 5, 63]).unwrap();
        let b = LampConfig::from_members(130, [0, 5, 63, 129]).unwrap();
        assert_eq!(a.shift(1).members().collect::<Vec<_>>(), vec![4, 62, 63]);
        assert_eq!(b.shift(1).members().collect::<Vec<_>>(), vec![4, 62, 128, 129]);
        assert_eq!(b.negate().members().collect::<Vec<_>>(), vec![0, 1, 67, 125]);
    }

    #[test]
    fn arc_distance_examples() {
        let i = Arc::new(0, 4, 12).unwrap();
        assert_eq!(arc_distance(2, &i), 0);
        assert_eq!(arc_distance(5, &i), 2);
        assert_eq!(arc_distance(11, &i), 1);
        assert!(Arc::new(0, 0, 12).is_err());
    }

    #[test]
    fn arc_family_counts() {
        let fam = arc_family(12).unwrap();
        assert_eq!(fam.len(), 12);
        assert!(fam.iter().all(|a| a.length() == 4));
        let fam7 = arc_family(7).unwrap();
        assert_eq!(fam7.len(), 7);
        assert!(fam7.iter().all(|a| a.length() == 2));
        for n in [7, 12, 20] {
            let fam = arc_family(n).unwrap();
            for k in 0..n {
                assert_eq!(fam.iter().filter(|a| a.contains(k)).count(), n / 3);
            }
        }
        assert!(arc_family(2).is_err());
    }

    #[test]
    fn arc_reflection_symmetry() {
        let n = 13;
        for a in arc_family(n).unwrap() {
            let r = a.reflect();
            for k in 0..n {
                assert_eq!(arc_distance(k, &a), arc_distance((n - k) % n, &r));
            }
        }
    }

    #[test]
    fn dense_index_round_trip() {
        let g = el(6, &[0, 2, 5], 4);
        assert_eq!(g.dense_index(), (4 << 6) | 0b100101);
        assert_eq!(GroupElement::from_dense_index(6, g.dense_index()), g);
    }
}
