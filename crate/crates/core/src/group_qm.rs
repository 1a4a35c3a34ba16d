//! Quasi-morphisms on free groups.
//!
//! Words are reduced sequences of signed generators. A [`QuasiMorphism`] is an
//! evaluation oracle on words together with an optional defect bound and a
//! homogeneity claim. The pullback and pushforward constructions check their
//! hypotheses on samples before producing a new handle.
//!
//! Textual form: generators are `a..z`, their inverses `A..Z`, so `"abA"` is
//! a·b·a⁻¹ and the empty string is the identity.

use std::fmt;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest alphabet expressible in the textual word format.
pub const MAX_ALPHABET: usize = 26;

/// Well-definedness tolerance for pushforwards.
pub const SECTION_TOLERANCE: f64 = 1e-9;

/// A generator raised to ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: u8,
    pub sign: i8,
}

impl Letter {
    pub fn new(generator: u8, sign: i8) -> Self {
        debug_assert!(sign == 1 || sign == -1);
        Letter { generator, sign }
    }

    pub fn inverse(self) -> Self {
        Letter {
            generator: self.generator,
            sign: -self.sign,
        }
    }

    fn to_char(self) -> char {
        let base = if self.sign > 0 { b'a' } else { b'A' };
        (base + self.generator) as char
    }
}

/// A reduced word in a free group; the empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct GroupWord {
    letters: Vec<Letter>,
}

/// Freely reduces a letter sequence over an alphabet of `alphabet` generators.
pub fn reduce_word(letters: &[Letter], alphabet: usize) -> Result<GroupWord> {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        if l.generator as usize >= alphabet {
            return Err(Error::GeneratorOutOfRange {
                index: l.generator as usize,
                alphabet,
            });
        }
        push_reduced(&mut out, l);
    }
    Ok(GroupWord { letters: out })
}

fn push_reduced(out: &mut Vec<Letter>, l: Letter) {
    if out.last() == Some(&l.inverse()) {
        out.pop();
    } else {
        out.push(l);
    }
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord::default()
    }

    /// Single generator `g` with the given sign.
    pub fn generator(g: u8, sign: i8) -> Self {
        GroupWord {
            letters: vec![Letter::new(g, sign)],
        }
    }

    /// Parses the `a..z`/`A..Z` form, reducing as it goes.
    pub fn parse(s: &str) -> Result<Self> {
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            let l = match c {
                'a'..='z' => Letter::new(c as u8 - b'a', 1),
                'A'..='Z' => Letter::new(c as u8 - b'A', -1),
                _ => return Err(Error::InvalidWordChar(c)),
            };
            letters.push(l);
        }
        reduce_word(&letters, MAX_ALPHABET)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn mul(&self, other: &GroupWord) -> GroupWord {
        let mut out = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut out, l);
        }
        GroupWord { letters: out }
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// `self^n` for any integer `n`.
    pub fn pow(&self, n: i64) -> GroupWord {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = GroupWord::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn conjugate_by(&self, c: &GroupWord) -> GroupWord {
        c.mul(self).mul(&c.inverse())
    }

    /// Cyclically reduced core: strips matching inverse pairs from both ends.
    pub fn cyclic_core(&self) -> &[Letter] {
        let mut lo = 0;
        let mut hi = self.letters.len();
        while hi - lo >= 2 && self.letters[lo] == self.letters[hi - 1].inverse() {
            lo += 1;
            hi -= 1;
        }
        &self.letters[lo..hi]
    }

    /// Exponent sum of one generator.
    pub fn exponent_sum(&self, generator: u8) -> i64 {
        self.letters
            .iter()
            .filter(|l| l.generator == generator)
            .map(|l| l.sign as i64)
            .sum()
    }

    /// Exponent sum over all generators.
    pub fn total_exponent(&self) -> i64 {
        self.letters.iter().map(|l| l.sign as i64).sum()
    }

    /// Largest generator index used plus one.
    pub fn alphabet_used(&self) -> usize {
        self.letters
            .iter()
            .map(|l| l.generator as usize + 1)
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

type WordFn = dyn Fn(&GroupWord) -> f64 + Send + Sync;
type MapFn = dyn Fn(&GroupWord) -> GroupWord + Send + Sync;

/// Evaluation oracle for a (possibly homogeneous) quasi-morphism.
#[derive(Clone)]
pub struct QuasiMorphism {
    name: String,
    eval: Arc<WordFn>,
    defect_bound: Option<f64>,
    homogeneous: bool,
}

impl fmt::Debug for QuasiMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuasiMorphism")
            .field("name", &self.name)
            .field("defect_bound", &self.defect_bound)
            .field("homogeneous", &self.homogeneous)
            .finish()
    }
}

impl QuasiMorphism {
    pub fn from_fn<F>(name: impl Into<String>, defect_bound: Option<f64>, homogeneous: bool, f: F) -> Self
    where
        F: Fn(&GroupWord) -> f64 + Send + Sync + 'static,
    {
        QuasiMorphism {
            name: name.into(),
            eval: Arc::new(f),
            defect_bound,
            homogeneous,
        }
    }

    /// Exponent sum of one generator, a homomorphism.
    pub fn exponent_sum(generator: u8) -> Self {
        Self::from_fn(format!("exp[{}]", (b'a' + generator) as char), Some(0.0), true, move |w| {
            w.exponent_sum(generator) as f64
        })
    }

    /// Total exponent sum, the abelianization onto ℤ.
    pub fn total_exponent() -> Self {
        Self::from_fn("exp[total]", Some(0.0), true, |w| w.total_exponent() as f64)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn evaluate(&self, g: &GroupWord) -> f64 {
        (self.eval)(g)
    }

    pub fn defect_bound(&self) -> Option<f64> {
        self.defect_bound
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    fn require_defect(&self) -> Result<f64> {
        self.defect_bound
            .ok_or_else(|| Error::MissingDefectBound(self.name.clone()))
    }
}

/// Signed overlapping occurrence count of `pattern` in the linear word.
fn count_linear(word: &[Letter], pattern: &[Letter]) -> i64 {
    if pattern.len() > word.len() {
        return 0;
    }
    let inv: Vec<Letter> = pattern.iter().rev().map(|l| l.inverse()).collect();
    word.windows(pattern.len())
        .map(|win| (win == pattern) as i64 - (win == inv.as_slice()) as i64)
        .sum()
}

/// Signed occurrence count in the cyclic word, one window per start position.
fn count_cyclic(word: &[Letter], pattern: &[Letter]) -> i64 {
    let n = word.len();
    if n == 0 {
        return 0;
    }
    let inv: Vec<Letter> = pattern.iter().rev().map(|l| l.inverse()).collect();
    let m = pattern.len();
    let mut total = 0;
    for start in 0..n {
        let fwd = (0..m).all(|j| word[(start + j) % n] == pattern[j]);
        let bwd = (0..m).all(|j| word[(start + j) % n] == inv[j]);
        total += fwd as i64 - bwd as i64;
    }
    total
}

fn check_pattern(pattern: &GroupWord) -> Result<()> {
    if pattern.is_identity() {
        Err(Error::EmptyPattern)
    } else {
        Ok(())
    }
}

/// Brooks counting quasi-morphism: occurrences of `pattern` minus occurrences
/// of its inverse, counted with overlaps in the reduced word.
///
/// Each product g·h creates at most three junctions, and a junction carries at
/// most `|w| - 1` straddling windows, so the defect is at most `3(|w| - 1)`.
pub fn brooks_qm(pattern: &GroupWord) -> Result<QuasiMorphism> {
    check_pattern(pattern)?;
    let p = pattern.letters.clone();
    let bound = 3.0 * (p.len() as f64 - 1.0);
    Ok(QuasiMorphism::from_fn(
        format!("brooks[{pattern}]"),
        Some(bound),
        p.len() == 1,
        move |w| count_linear(&w.letters, &p) as f64,
    ))
}

/// Homogenization of [`brooks_qm`], evaluated exactly as the cyclic occurrence
/// count of the cyclically reduced core. Defect at most twice the Brooks bound.
pub fn brooks_homogenized(pattern: &GroupWord) -> Result<QuasiMorphism> {
    check_pattern(pattern)?;
    let p = pattern.letters.clone();
    let bound = 6.0 * (p.len() as f64 - 1.0);
    Ok(QuasiMorphism::from_fn(
        format!("brooks~[{pattern}]"),
        Some(bound),
        true,
        move |w| count_cyclic(w.cyclic_core(), &p) as f64,
    ))
}

/// Seeded generator of uniformly-lengthed random reduced words.
#[derive(Debug, Clone)]
pub struct WordSampler {
    alphabet: usize,
    max_len: usize,
    rng: ChaCha8Rng,
}

impl WordSampler {
    pub fn new(alphabet: usize, max_len: usize, seed: u64) -> Self {
        assert!((1..=MAX_ALPHABET).contains(&alphabet));
        WordSampler {
            alphabet,
            max_len,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sample(&mut self) -> GroupWord {
        let len = self.rng.random_range(0..=self.max_len);
        let mut letters: Vec<Letter> = Vec::with_capacity(len);
        while letters.len() < len {
            let g = self.rng.random_range(0..self.alphabet) as u8;
            let s = if self.rng.random::<bool>() { 1 } else { -1 };
            let l = Letter::new(g, s);
            if letters.last() != Some(&l.inverse()) {
                letters.push(l);
            }
        }
        GroupWord { letters }
    }

    pub fn sample_pair(&mut self) -> (GroupWord, GroupWord) {
        (self.sample(), self.sample())
    }
}

/// |μ(g₁g₂) − μ(g₁) − μ(g₂)| for one pair.
pub fn pair_defect(mu: &QuasiMorphism, g1: &GroupWord, g2: &GroupWord) -> f64 {
    (mu.evaluate(&g1.mul(g2)) - mu.evaluate(g1) - mu.evaluate(g2)).abs()
}

/// Largest defect over explicit pairs; a lower bound for the true defect.
pub fn defect_over_pairs<'a, I>(mu: &QuasiMorphism, pairs: I) -> f64
where
    I: IntoIterator<Item = (&'a GroupWord, &'a GroupWord)>,
{
    pairs
        .into_iter()
        .map(|(a, b)| pair_defect(mu, a, b))
        .fold(0.0, f64::max)
}

/// Largest defect over `trials` sampled pairs.
pub fn defect_lower_bound(mu: &QuasiMorphism, sampler: &mut WordSampler, trials: usize) -> f64 {
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let (a, b) = sampler.sample_pair();
        best = best.max(pair_defect(mu, &a, &b));
    }
    best
}

/// Truncated homogenization μ(g^N)/N with its certified error radius D/N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homogenized {
    pub value: f64,
    pub error_radius: f64,
}

pub fn homogenize(mu: &QuasiMorphism, g: &GroupWord, power: u32) -> Result<Homogenized> {
    if power == 0 {
        return Err(Error::InvalidPower);
    }
    let d = mu.require_defect()?;
    let n = power as f64;
    Ok(Homogenized {
        value: mu.evaluate(&g.pow(power as i64)) / n,
        error_radius: d / n,
    })
}

/// A map between free groups.
#[derive(Clone)]
pub struct GroupMap {
    name: String,
    apply: Arc<MapFn>,
    homomorphism: bool,
}

impl fmt::Debug for GroupMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupMap")
            .field("name", &self.name)
            .field("homomorphism", &self.homomorphism)
            .finish()
    }
}

impl GroupMap {
    pub fn from_fn<F>(name: impl Into<String>, homomorphism: bool, f: F) -> Self
    where
        F: Fn(&GroupWord) -> GroupWord + Send + Sync + 'static,
    {
        GroupMap {
            name: name.into(),
            apply: Arc::new(f),
            homomorphism,
        }
    }

    pub fn identity() -> Self {
        Self::from_fn("id", true, |w| w.clone())
    }

    /// g ↦ c g c⁻¹.
    pub fn conjugation(c: GroupWord) -> Self {
        let name = format!("conj[{c}]");
        Self::from_fn(name, true, move |w| w.conjugate_by(&c))
    }

    /// Homomorphism sending generator `i` to `images[i]`.
    pub fn substitution(images: Vec<GroupWord>) -> Self {
        let name = format!(
            "subst[{}]",
            images.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",")
        );
        Self::from_fn(name, true, move |w| {
            let mut out = GroupWord::identity();
            for l in &w.letters {
                let img = &images[l.generator as usize];
                out = if l.sign > 0 { out.mul(img) } else { out.mul(&img.inverse()) };
            }
            out
        })
    }

    /// Total exponent sum onto ℤ, written as powers of the single generator `a`.
    pub fn abelianize_total() -> Self {
        Self::from_fn("total-exp", true, |w| {
            GroupWord::generator(0, 1).pow(w.total_exponent())
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, w: &GroupWord) -> GroupWord {
        (self.apply)(w)
    }

    pub fn is_homomorphism(&self) -> bool {
        self.homomorphism
    }
}

/// Sampled D(φ, μ) = max |μ(φ(h₁h₂)⁻¹ φ(h₁) φ(h₂))| over the given pairs.
pub fn quasi_homomorphism_defect<'a, I>(phi: &GroupMap, mu: &QuasiMorphism, pairs: I) -> f64
where
    I: IntoIterator<Item = (&'a GroupWord, &'a GroupWord)>,
{
    pairs
        .into_iter()
        .map(|(h1, h2)| {
            let w = phi
                .apply(&h1.mul(h2))
                .inverse()
                .mul(&phi.apply(h1))
                .mul(&phi.apply(h2));
            mu.evaluate(&w).abs()
        })
        .fold(0.0, f64::max)
}

/// Pulls `mu` back along `phi`. `d_phi_mu` bounds the quasi-homomorphism
/// defect of `phi` relative to `mu`; the recorded defect bound is
/// `d_phi_mu + 2 D(mu)`.
pub fn pullback(phi: &GroupMap, mu: &QuasiMorphism, d_phi_mu: f64) -> Result<QuasiMorphism> {
    let d = mu.require_defect()?;
    let phi_c = phi.clone();
    let mu_c = mu.clone();
    Ok(QuasiMorphism::from_fn(
        format!("{}∘{}", mu.name, phi.name),
        Some(d_phi_mu + 2.0 * d),
        mu.homogeneous && phi.homomorphism,
        move |h| mu_c.evaluate(&phi_c.apply(h)),
    ))
}

pub type Section = Arc<dyn Fn(&GroupWord) -> GroupWord + Send + Sync>;

/// Inputs for the well-definedness check of a pushforward.
pub struct PushforwardSamples<'a> {
    /// Elements of ker φ on which μ must stay bounded.
    pub kernel: &'a [GroupWord],
    /// Stated bound for |μ| on the kernel.
    pub kernel_bound: f64,
    /// Target elements at which the sections are compared.
    pub test_points: &'a [GroupWord],
}

/// Pushes a homogeneous `mu` forward along a surjective homomorphism `phi`,
/// evaluating through the first section.
///
/// Before building the handle this checks that every section is a right
/// inverse of `phi` on the test points, that μ is bounded on the kernel
/// samples, and that all sections give the same value of μ at every test
/// point. Any failure is reported with its witness.
pub fn pushforward(
    phi: &GroupMap,
    sections: &[Section],
    mu: &QuasiMorphism,
    samples: &PushforwardSamples<'_>,
) -> Result<QuasiMorphism> {
    if !mu.homogeneous {
        return Err(Error::Config(format!("pushforward needs a homogeneous quasi-morphism, got `{}`", mu.name)));
    }
    if sections.is_empty() {
        return Err(Error::Config("pushforward needs at least one section".into()));
    }
    for h in samples.test_points {
        for s in sections {
            if &phi.apply(&s(h)) != h {
                return Err(Error::SectionMismatch(h.to_string()));
            }
        }
    }
    for k in samples.kernel {
        let v = mu.evaluate(k);
        if v.abs() > samples.kernel_bound {
            return Err(Error::UnboundedOnKernel {
                witness: k.to_string(),
                value: v,
                bound: samples.kernel_bound,
            });
        }
    }
    for h in samples.test_points {
        let first = mu.evaluate(&sections[0](h));
        for s in &sections[1..] {
            let second = mu.evaluate(&s(h));
            if (first - second).abs() > SECTION_TOLERANCE {
                return Err(Error::NotWellDefined {
                    witness: h.to_string(),
                    first,
                    second,
                });
            }
        }
    }
    let s0 = sections[0].clone();
    let mu_c = mu.clone();
    Ok(QuasiMorphism::from_fn(
        format!("{}_*{}", phi.name, mu.name),
        mu.defect_bound,
        true,
        move |h| mu_c.evaluate(&s0(h)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> GroupWord {
        GroupWord::parse(s).unwrap()
    }

    /// Substring count on the textual form, independent of the letter code.
    fn text_count(word: &str, pat: &str) -> i64 {
        let inv: String = pat
            .chars()
            .rev()
            .map(|c| if c.is_ascii_lowercase() { c.to_ascii_uppercase() } else { c.to_ascii_lowercase() })
            .collect();
        let count = |p: &str| {
            (0..word.len())
                .filter(|&i| word[i..].starts_with(p))
                .count() as i64
        };
        count(pat) - count(&inv)
    }

    fn all_words(alphabet: u8, max_len: usize) -> Vec<GroupWord> {
        let mut out = vec![GroupWord::identity()];
        let mut frontier = vec![GroupWord::identity()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for word in &frontier {
                for g in 0..alphabet {
                    for s in [1, -1] {
                        let l = Letter::new(g, s);
                        if word.letters.last() != Some(&l.inverse()) {
                            let mut letters = word.letters.clone();
                            letters.push(l);
                            next.push(GroupWord { letters });
                        }
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    #[test]
    fn reduce_examples() {
        let a = Letter::new(0, 1);
        let b = Letter::new(1, 1);
        assert!(reduce_word(&[a, a.inverse()], 2).unwrap().is_identity());
        let r = reduce_word(&[a, b, b.inverse(), a], 2).unwrap();
        assert_eq!(r.letters(), &[a, a]);
        let r = reduce_word(&[a, b, a.inverse()], 2).unwrap();
        assert_eq!(r.to_string(), "abA");
    }

    #[test]
    fn reduce_rejects_out_of_range() {
        let c = Letter::new(2, 1);
        assert_eq!(
            reduce_word(&[c], 2),
            Err(Error::GeneratorOutOfRange { index: 2, alphabet: 2 })
        );
        assert!(matches!(GroupWord::parse("a1"), Err(Error::InvalidWordChar('1'))));
    }

    #[test]
    fn word_algebra() {
        let g = w("abA");
        assert!(g.mul(&g.inverse()).is_identity());
        assert_eq!(w("ab").pow(3).to_string(), "ababab");
        assert_eq!(w("ab").pow(-2).to_string(), "BABA");
        assert_eq!(w("abcA").cyclic_core().len(), 2);
        assert_eq!(w("").to_string(), "e");
    }

    #[test]
    fn brooks_examples_match_text_count() {
        let mu = brooks_qm(&w("ab")).unwrap();
        assert_eq!(mu.evaluate(&w("abab")), text_count("abab", "ab") as f64);
        assert_eq!(mu.evaluate(&w("abab")), 2.0);
        assert_eq!(mu.evaluate(&w("BA")), -1.0);
        assert_eq!(mu.evaluate(&w("aaaaa")), 0.0);
        assert_eq!(brooks_qm(&GroupWord::identity()).unwrap_err(), Error::EmptyPattern);
    }

    #[test]
    fn brooks_counts_overlaps() {
        let mu = brooks_qm(&w("aa")).unwrap();
        assert_eq!(mu.evaluate(&w("aaaa")), 3.0);
        let mut s = WordSampler::new(3, 12, 5);
        for _ in 0..200 {
            let g = s.sample();
            let txt = g.to_string();
            let txt = if g.is_identity() { String::new() } else { txt };
            assert_eq!(mu.evaluate(&g), text_count(&txt, "aa") as f64);
        }
    }

    #[test]
    fn homomorphism_has_zero_defect() {
        let mu = QuasiMorphism::exponent_sum(0);
        let mut s = WordSampler::new(2, 20, 1);
        assert_eq!(defect_lower_bound(&mu, &mut s, 500), 0.0);
        let e = GroupWord::identity();
        let brooks = brooks_qm(&w("ab")).unwrap();
        assert_eq!(defect_over_pairs(&brooks, [(&e, &e)]), 0.0);
    }

    #[test]
    fn brooks_defect_sampled_below_exhaustive_reference() {
        let mu = brooks_qm(&w("ab")).unwrap();
        let words = all_words(2, 4);
        let mut exhaustive: f64 = 0.0;
        for a in &words {
            for b in &words {
                exhaustive = exhaustive.max(pair_defect(&mu, a, b));
            }
        }
        assert!(exhaustive > 0.0);
        assert!(exhaustive <= mu.defect_bound().unwrap());
        let mut s = WordSampler::new(2, 20, 7);
        let sampled = defect_lower_bound(&mu, &mut s, 10_000);
        assert!(sampled > 0.0);
        assert!(sampled <= mu.defect_bound().unwrap());
    }

    #[test]
    fn homogenize_examples() {
        let mu = brooks_qm(&w("ab")).unwrap();
        let h = homogenize(&mu, &w("ab"), 50).unwrap();
        // brute force: μ((ab)^n)/n for every n up to 50
        for n in 1..=50 {
            assert_eq!(mu.evaluate(&w("ab").pow(n)) / n as f64, 1.0);
        }
        assert!((h.value - 1.0).abs() <= h.error_radius);
        assert_eq!(homogenize(&mu, &w("a"), 17).unwrap().value, 0.0);
        let hom = QuasiMorphism::exponent_sum(1);
        let g = w("bbAbaB");
        let r = homogenize(&hom, &g, 9).unwrap();
        assert_eq!(r.value, hom.evaluate(&g));
        assert_eq!(r.error_radius, 0.0);
        assert_eq!(homogenize(&mu, &g, 0), Err(Error::InvalidPower));
        let bare = QuasiMorphism::from_fn("bare", None, false, |_| 0.0);
        assert!(matches!(homogenize(&bare, &g, 3), Err(Error::MissingDefectBound(_))));
    }

    #[test]
    fn cyclic_count_is_the_homogenization() {
        let pat = w("ab");
        let mu = brooks_qm(&pat).unwrap();
        let mh = brooks_homogenized(&pat).unwrap();
        let d = mu.defect_bound().unwrap();
        let mut s = WordSampler::new(2, 10, 11);
        for _ in 0..300 {
            let g = s.sample();
            let n = 40;
            let brute = mu.evaluate(&g.pow(n)) / n as f64;
            assert!((brute - mh.evaluate(&g)).abs() <= d / n as f64 + 1e-12, "{g}");
        }
    }

    #[test]
    fn homogenized_brooks_is_conjugation_invariant() {
        let mh = brooks_homogenized(&w("ab")).unwrap();
        let mut s = WordSampler::new(2, 12, 3);
        for _ in 0..500 {
            let (g, c) = s.sample_pair();
            assert_eq!(mh.evaluate(&g.conjugate_by(&c)), mh.evaluate(&g));
        }
    }

    #[test]
    fn pullback_examples() {
        let mu = brooks_qm(&w("ab")).unwrap();
        let pb = pullback(&GroupMap::identity(), &mu, 0.0).unwrap();
        assert_eq!(pb.defect_bound(), Some(2.0 * mu.defect_bound().unwrap()));
        let g = w("abbaBA");
        assert_eq!(pb.evaluate(&g), mu.evaluate(&g));

        let mh = brooks_homogenized(&w("ab")).unwrap();
        let conj = GroupMap::conjugation(w("bAb"));
        let pbc = pullback(&conj, &mh, 0.0).unwrap();
        let mut s = WordSampler::new(2, 15, 9);
        for _ in 0..1000 {
            let g = s.sample();
            assert_eq!(pbc.evaluate(&g), mh.evaluate(&g));
        }

        let collapse = GroupMap::substitution(vec![w("a"), GroupWord::identity()]);
        let ea = QuasiMorphism::exponent_sum(0);
        let pbe = pullback(&collapse, &ea, 0.0).unwrap();
        assert_eq!(pbe.defect_bound(), Some(0.0));
        for _ in 0..200 {
            let g = s.sample();
            assert_eq!(pbe.evaluate(&g), ea.evaluate(&g));
        }
    }

    #[test]
    fn pullback_sampled_defect_within_bound() {
        let mu = brooks_qm(&w("ab")).unwrap();
        let phi = GroupMap::from_fn("square-first", false, |g| {
            let mut out = GroupWord::identity();
            for l in g.letters() {
                let one = GroupWord { letters: vec![*l] };
                out = out.mul(&one);
                if l.generator == 0 {
                    out = out.mul(&one);
                }
            }
            out
        });
        let mut s = WordSampler::new(2, 10, 21);
        let pairs: Vec<_> = (0..2000).map(|_| s.sample_pair()).collect();
        let d_phi = quasi_homomorphism_defect(&phi, &mu, pairs.iter().map(|(a, b)| (a, b)));
        let pb = pullback(&phi, &mu, d_phi).unwrap();
        let sampled = defect_over_pairs(&pb, pairs.iter().map(|(a, b)| (a, b)));
        assert!(sampled <= pb.defect_bound().unwrap());
    }

    fn sections_power_of_a() -> (Section, Section) {
        let s1: Section = Arc::new(|h: &GroupWord| GroupWord::generator(0, 1).pow(h.total_exponent()));
        let s2: Section = Arc::new(|h: &GroupWord| {
            let n = h.total_exponent();
            let half = n.div_euclid(2);
            let mut out = GroupWord::parse("ab").unwrap().pow(half);
            if n.rem_euclid(2) == 1 {
                out = out.mul(&GroupWord::generator(0, 1));
            }
            out
        });
        (s1, s2)
    }

    #[test]
    fn pushforward_accepts_descending_homomorphism() {
        let phi = GroupMap::abelianize_total();
        let (s1, s2) = sections_power_of_a();
        let mu = QuasiMorphism::total_exponent();
        let kernel = vec![w("aB"), w("abAB"), w("aaBB")];
        let tests: Vec<_> = (-6..=6).map(|n| GroupWord::generator(0, 1).pow(n)).collect();
        let push = pushforward(
            &phi,
            &[s1.clone(), s2.clone()],
            &mu,
            &PushforwardSamples { kernel: &kernel, kernel_bound: 0.0, test_points: &tests },
        )
        .unwrap();
        for (n, h) in (-6..=6).zip(&tests) {
            assert_eq!(push.evaluate(h), n as f64);
            assert_eq!(push.evaluate(h), mu.evaluate(&s2(h)));
        }
        let id = pushforward(
            &GroupMap::identity(),
            &[Arc::new(|h: &GroupWord| h.clone())],
            &mu,
            &PushforwardSamples { kernel: &[], kernel_bound: 0.0, test_points: &[w("abA")] },
        )
        .unwrap();
        assert_eq!(id.evaluate(&w("abb")), 3.0);
    }

    #[test]
    fn pushforward_rejects_brooks() {
        // oracle: ab and a·a have the same image 2 but different cyclic counts
        let mh = brooks_homogenized(&w("ab")).unwrap();
        assert_eq!(mh.evaluate(&w("ab")), 1.0);
        assert_eq!(mh.evaluate(&w("aa")), 0.0);
        let phi = GroupMap::abelianize_total();
        let (s1, s2) = sections_power_of_a();
        let tests: Vec<_> = (0..=4).map(|n| GroupWord::generator(0, 1).pow(n)).collect();
        let err = pushforward(
            &phi,
            &[s1, s2],
            &mh,
            &PushforwardSamples { kernel: &[w("abAB")], kernel_bound: 1.0, test_points: &tests },
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotWellDefined { .. }), "{err:?}");
    }

    #[test]
    fn pushforward_reports_kernel_growth() {
        let mh = brooks_homogenized(&w("ab")).unwrap();
        let phi = GroupMap::abelianize_total();
        let (s1, _) = sections_power_of_a();
        // (ab)^5 a^-10 lies in the kernel and scores 5
        let k = w("ab").pow(5).mul(&w("a").pow(-10));
        let err = pushforward(
            &phi,
            &[s1],
            &mh,
            &PushforwardSamples { kernel: &[k], kernel_bound: 2.0, test_points: &[] },
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnboundedOnKernel { .. }));
    }
}
