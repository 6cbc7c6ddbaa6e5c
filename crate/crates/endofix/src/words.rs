//! Freely reduced words in a free group and endomorphisms given by
//! generator images.
//!
//! Words are the universal currency of the crate: subgroup generators,
//! marking coordinates and twisting elements are all `Word`s. Letters
//! are signed generator indices; `3` is the third generator, `-3` its
//! inverse. In text I/O generators render as `a..z` with inverses
//! `A..Z`; ranks above 26 fall back to `x1`/`X1` tokens.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Signed generator index. Never zero in a valid word.
pub type Letter = i32;

/// Ordering key for letters: `a < A < b < B < ...`.
///
/// This order is part of the report contract: word enumeration is by
/// length first, then lexicographic in this key.
pub fn letter_key(l: Letter) -> (i32, bool) {
    (l.abs(), l < 0)
}

/// A freely reduced word.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Word {
        Word { letters: Vec::new() }
    }

    /// Free reduction of an arbitrary letter sequence. Idempotent.
    pub fn reduce(raw: &[Letter]) -> Word {
        let mut stack: Vec<Letter> = Vec::with_capacity(raw.len());
        for &l in raw {
            assert!(l != 0, "letter 0 is not a generator");
            if stack.last() == Some(&-l) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word { letters: stack }
    }

    pub fn from_letters(raw: &[Letter]) -> Word {
        Word::reduce(raw)
    }

    pub fn generator(g: usize) -> Word {
        Word { letters: vec![g as Letter] }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|&l| -l).collect() }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut raw = self.letters.clone();
        raw.extend_from_slice(&other.letters);
        Word::reduce(&raw)
    }

    /// Largest generator index used, 0 for the empty word.
    pub fn max_generator(&self) -> usize {
        self.letters.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Conjugate `m * self * m^-1`.
    pub fn conjugate_by(&self, m: &Word) -> Word {
        m.concat(self).concat(&m.inverse())
    }

    /// Parses either alphabetic form (`aBa`) or token form (`x1X2`).
    /// `1` denotes the empty word.
    pub fn parse(s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        if s.bytes().any(|b| b.is_ascii_digit()) {
            // token form: x<k> / X<k>
            let mut chars = s.chars().peekable();
            while let Some(c) = chars.next() {
                let sign = match c {
                    'x' => 1,
                    'X' => -1,
                    _ => {
                        return Err(Error::Invalid(format!(
                            "bad token start {c:?} in word {s:?}"
                        )))
                    }
                };
                let mut num = String::new();
                while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    num.push(*d);
                    chars.next();
                }
                let idx: i32 = num
                    .parse()
                    .map_err(|_| Error::Invalid(format!("bad token index in word {s:?}")))?;
                if idx == 0 {
                    return Err(Error::Invalid(format!("token index 0 in word {s:?}")));
                }
                letters.push(sign * idx);
            }
        } else {
            for c in s.chars() {
                let l = match c {
                    'a'..='z' => (c as i32 - 'a' as i32) + 1,
                    'A'..='Z' => -((c as i32 - 'A' as i32) + 1),
                    _ => {
                        return Err(Error::Invalid(format!("bad letter {c:?} in word {s:?}")))
                    }
                };
                letters.push(l);
            }
        }
        Ok(Word::reduce(&letters))
    }

    fn render(&self) -> String {
        if self.is_empty() {
            return "1".to_string();
        }
        if self.max_generator() <= 26 {
            self.letters
                .iter()
                .map(|&l| {
                    let c = (l.unsigned_abs() - 1) as u8;
                    if l > 0 { (b'a' + c) as char } else { (b'A' + c) as char }
                })
                .collect()
        } else {
            self.letters
                .iter()
                .map(|&l| {
                    if l > 0 { format!("x{}", l) } else { format!("X{}", -l) }
                })
                .collect()
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self.render())
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    /// Length first, then lexicographic in `letter_key` order.
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            for (&a, &b) in self.letters.iter().zip(&other.letters) {
                let c = letter_key(a).cmp(&letter_key(b));
                if c != Ordering::Equal {
                    return c;
                }
            }
            Ordering::Equal
        })
    }
}

/// An endomorphism of `F_n`, stored as one reduced word per generator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Endomorphism {
    rank: usize,
    images: Vec<Word>,
}

impl Endomorphism {
    pub fn new(rank: usize, images: Vec<Word>) -> Result<Endomorphism> {
        if images.len() != rank {
            return Err(Error::RankMismatch(rank, images.len()));
        }
        for w in &images {
            if w.max_generator() > rank {
                return Err(Error::GeneratorOutOfRange {
                    index: w.max_generator() as i32,
                    rank,
                });
            }
        }
        Ok(Endomorphism { rank, images })
    }

    pub fn identity(rank: usize) -> Endomorphism {
        Endomorphism {
            rank,
            images: (1..=rank).map(Word::generator).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    /// Image of the `g`-th generator, 1-based.
    pub fn image(&self, g: usize) -> &Word {
        &self.images[g - 1]
    }

    /// Homomorphic image of a word, freely reduced.
    pub fn apply(&self, w: &Word) -> Result<Word> {
        let mut raw = Vec::new();
        for &l in w.letters() {
            let g = l.unsigned_abs() as usize;
            if g > self.rank {
                return Err(Error::GeneratorOutOfRange { index: l, rank: self.rank });
            }
            let img = &self.images[g - 1];
            if l > 0 {
                raw.extend_from_slice(img.letters());
            } else {
                raw.extend(img.letters().iter().rev().map(|&x| -x));
            }
        }
        Ok(Word::reduce(&raw))
    }

    /// `(self ∘ other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Endomorphism) -> Result<Endomorphism> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        let images = other
            .images
            .iter()
            .map(|w| self.apply(w))
            .collect::<Result<Vec<_>>>()?;
        Endomorphism::new(self.rank, images)
    }

    /// Iterated substitution with reduction at each step; `k = 0` gives
    /// the identity.
    pub fn power(&self, k: usize) -> Endomorphism {
        let mut acc = Endomorphism::identity(self.rank);
        for _ in 0..k {
            acc = self.compose(&acc).expect("equal ranks");
        }
        acc
    }

    /// Post-composition with the inner automorphism `i_m`.
    pub fn inner_twist(&self, m: &Word) -> Endomorphism {
        let images = self.images.iter().map(|w| w.conjugate_by(m)).collect();
        Endomorphism { rank: self.rank, images }
    }

    /// Column `j` is the exponent-sum vector of the image of `x_{j+1}`.
    pub fn abelianization(&self) -> Vec<Vec<i64>> {
        let n = self.rank;
        let mut m = vec![vec![0i64; n]; n];
        for (j, w) in self.images.iter().enumerate() {
            for &l in w.letters() {
                let i = l.unsigned_abs() as usize - 1;
                m[i][j] += l.signum() as i64;
            }
        }
        m
    }

    pub fn abelianization_trace(&self) -> i64 {
        self.abelianization()
            .iter()
            .enumerate()
            .map(|(i, row)| row[i])
            .sum()
    }

    /// Text format: `rank: n` then one `x -> word` line per generator.
    /// `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Endomorphism> {
        let mut rank: Option<usize> = None;
        let mut images: Vec<Option<Word>> = Vec::new();
        for (li, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: li + 1, msg };
            if let Some(rest) = line.strip_prefix("rank:") {
                let n: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad rank {:?}", rest.trim())))?;
                if n == 0 {
                    return Err(err("rank must be positive".into()));
                }
                rank = Some(n);
                images = vec![None; n];
            } else if let Some((lhs, rhs)) = line.split_once("->") {
                let n = rank.ok_or_else(|| err("image line before rank".into()))?;
                let gen_word = Word::parse(lhs.trim())
                    .map_err(|e| err(format!("bad generator: {e}")))?;
                if gen_word.len() != 1 || gen_word.letters()[0] < 0 {
                    return Err(err(format!("lhs {:?} is not a generator", lhs.trim())));
                }
                let g = gen_word.letters()[0] as usize;
                if g > n {
                    return Err(err(format!("generator index {g} exceeds rank {n}")));
                }
                let rhs = rhs.trim();
                if rhs.split_whitespace().count() > 1 {
                    return Err(err("whitespace inside a word".into()));
                }
                let w = Word::parse(rhs).map_err(|e| err(format!("bad word: {e}")))?;
                if w.max_generator() > n {
                    return Err(err(format!(
                        "image uses generator beyond rank {n}: {w}"
                    )));
                }
                images[g - 1] = Some(w);
            } else {
                return Err(err(format!("unrecognized line {line:?}")));
            }
        }
        let n = rank.ok_or(Error::Parse { line: 0, msg: "missing rank".into() })?;
        let images = images
            .into_iter()
            .enumerate()
            .map(|(i, w)| {
                w.ok_or(Error::Parse {
                    line: 0,
                    msg: format!("missing image for generator {}", Word::generator(i + 1)),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Endomorphism::new(n, images)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("rank: {}\n", self.rank);
        for g in 1..=self.rank {
            out.push_str(&format!("{} -> {}\n", Word::generator(g), self.images[g - 1]));
        }
        out
    }
}

/// All reduced words of length at most `max_len`, in contract order
/// (length, then lexicographic).
pub fn reduced_words_up_to(rank: usize, max_len: usize) -> Vec<Word> {
    let mut alphabet: Vec<Letter> = Vec::with_capacity(2 * rank);
    for g in 1..=rank as i32 {
        alphabet.push(g);
        alphabet.push(-g);
    }
    // alphabet is already in letter_key order: a, A, b, B, ...
    let mut out = vec![Word::empty()];
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &l in &alphabet {
                if w.last() == Some(&-l) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        for v in &next {
            out.push(Word { letters: v.clone() });
        }
        layer = next;
    }
    out
}

/// All reduced words `w` with `|w| <= max_len` and `phi(w) = w`, in
/// contract order. The image of the prefix is carried along the
/// search, so each word costs one letter-image append.
pub fn fixed_words_up_to(phi: &Endomorphism, max_len: usize) -> Vec<Word> {
    fixed_words_budgeted(phi, max_len, u64::MAX).0
}

/// Same search under an operation budget; the flag reports whether the
/// enumeration ran to completion. The budget counts letter operations,
/// never wall time, so a truncated result is still deterministic.
pub fn fixed_words_budgeted(
    phi: &Endomorphism,
    max_len: usize,
    budget: u64,
) -> (Vec<Word>, bool) {
    let rank = phi.rank();
    let mut alphabet: Vec<Letter> = Vec::with_capacity(2 * rank);
    for g in 1..=rank as i32 {
        alphabet.push(g);
        alphabet.push(-g);
    }
    let letter_image = |l: Letter| -> Vec<Letter> {
        let w = &phi.images[(l.unsigned_abs() - 1) as usize];
        if l > 0 {
            w.letters().to_vec()
        } else {
            w.inverse().letters().to_vec()
        }
    };
    let images: Vec<Vec<Letter>> = alphabet.iter().map(|&l| letter_image(l)).collect();
    let max_img = images.iter().map(|i| i.len()).max().unwrap_or(0).max(1);

    let mut out = vec![Word::empty()];
    let mut prefix: Vec<Letter> = Vec::new();
    // one shared image buffer with an undo log per frame instead of a
    // clone per node: (letters cancelled off the inherited tail, count
    // of letters this frame appended, next alphabet slot to try)
    struct Frame {
        popped: Vec<Letter>,
        pushed: usize,
        slot: usize,
    }
    let mut img: Vec<Letter> = Vec::new();
    let mut stack: Vec<Frame> = vec![Frame { popped: Vec::new(), pushed: 0, slot: 0 }];
    let mut ops: u64 = 0;
    let undo = |img: &mut Vec<Letter>, fr: &Frame| {
        img.truncate(img.len() - fr.pushed);
        img.extend(fr.popped.iter().rev());
    };
    while let Some(fr) = stack.last_mut() {
        if fr.slot == alphabet.len() || prefix.len() == max_len {
            let fr = stack.pop().expect("frame present");
            undo(&mut img, &fr);
            prefix.pop();
            continue;
        }
        if ops > budget {
            out.sort();
            return (out, false);
        }
        let l = alphabet[fr.slot];
        fr.slot += 1;
        if prefix.last() == Some(&-l) {
            continue;
        }
        let image = &images[(l.unsigned_abs() as usize - 1) * 2 + usize::from(l < 0)];
        let mut next = Frame { popped: Vec::new(), pushed: 0, slot: 0 };
        ops += image.len() as u64;
        for &x in image {
            if img.last() == Some(&-x) {
                let p = img.pop().expect("cancelling letter present");
                if next.pushed > 0 {
                    next.pushed -= 1;
                } else {
                    next.popped.push(p);
                }
            } else {
                img.push(x);
                next.pushed += 1;
            }
        }
        prefix.push(l);
        if img == prefix {
            out.push(Word { letters: prefix.clone() });
        }
        // any completion w = prefix * s has phi(w) = img * phi(s) with
        // |phi(s)| <= max_img * |s|, so the first
        // |img| - max_img * (max_len - |prefix|) letters of img
        // survive and must spell a prefix of w
        let slack = max_img * (max_len - prefix.len());
        let keep = img.len().saturating_sub(slack);
        if keep > max_len || img[..keep.min(prefix.len())] != prefix[..keep.min(prefix.len())] {
            undo(&mut img, &next);
            prefix.pop();
            continue;
        }
        stack.push(next);
    }
    out.sort();
    (out, true)
}
