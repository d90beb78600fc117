//! Mixing subshifts of finite type and finitely described points.
//!
//! Symbols are stored 0-based internally and rendered 1-based at every
//! serialization boundary (`Display`, JSON, word keys like `"1-2-1"`).
//!
//! A [`Point`] is a bi-infinite sequence that is eventually periodic in both
//! time directions. It is always kept in canonical form, so two points are
//! equal exactly when their fields are equal.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = u8;

/// Default cap on the number of words a single enumeration may produce.
pub const DEFAULT_WORD_CAP: usize = 1 << 24;

/// Largest alphabet representable by [`Symbol`].
pub const MAX_ALPHABET: usize = Symbol::MAX as usize + 1;

/// Returns the least `N` with `T^N > 0` entrywise.
///
/// The search stops at `q^2`, which exceeds Wielandt's bound `(q-1)^2 + 1`
/// for primitive matrices.
pub fn primitivity(adjacency: &[Vec<u8>]) -> Result<usize> {
    let q = adjacency.len();
    if q == 0 {
        return Err(Error::InvalidInput("empty adjacency matrix".into()));
    }
    let base: Vec<bool> = adjacency
        .iter()
        .flat_map(|row| row.iter().map(|&e| e != 0))
        .collect();
    if base.len() != q * q {
        return Err(Error::InvalidInput("adjacency matrix is not square".into()));
    }
    let bound = q * q;
    let mut power = base.clone();
    for n in 1..=bound {
        if power.iter().all(|&e| e) {
            return Ok(n);
        }
        let mut next = vec![false; q * q];
        for i in 0..q {
            for k in 0..q {
                if !power[i * q + k] {
                    continue;
                }
                for j in 0..q {
                    if base[k * q + j] {
                        next[i * q + j] = true;
                    }
                }
            }
        }
        power = next;
    }
    Err(Error::NotPrimitive { bound })
}

/// A finite word over the alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Symbol> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Symbols as 1-based integers.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&s| s as usize + 1).collect()
    }

    /// Builds a word from 1-based symbols, checking the alphabet bound.
    pub fn from_one_based(symbols: &[usize], q: usize) -> Result<Self> {
        symbols
            .iter()
            .map(|&s| {
                if s == 0 || s > q {
                    Err(Error::InvalidInput(format!(
                        "symbol {s} outside alphabet 1..={q}"
                    )))
                } else {
                    Ok((s - 1) as Symbol)
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    /// Parses a dash-separated key such as `"1-2-1"`.
    pub fn parse_key(key: &str, q: usize) -> Result<Self> {
        let key = key.trim();
        if key.is_empty() {
            return Ok(Word::empty());
        }
        let symbols = key
            .split('-')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("bad symbol {part:?} in word {key:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::from_one_based(&symbols, q)
    }

    /// Dash-separated 1-based rendering, the inverse of [`Word::parse_key`].
    pub fn key(&self) -> String {
        self.0
            .iter()
            .map(|&s| (s as usize + 1).to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

impl std::ops::Deref for Word {
    type Target = [Symbol];
    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<&[Symbol]> for Word {
    fn from(s: &[Symbol]) -> Self {
        Word(s.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        f.write_str(&self.key())
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(serializer)
    }
}

/// Flat storage for all admissible words of one length, in lexicographic order.
#[derive(Debug, Clone)]
pub struct WordList {
    word_len: usize,
    data: Vec<Symbol>,
}

impl WordList {
    pub fn word_len(&self) -> usize {
        self.word_len
    }

    pub fn len(&self) -> usize {
        if self.word_len == 0 {
            0
        } else {
            self.data.len() / self.word_len
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &[Symbol] {
        &self.data[i * self.word_len..(i + 1) * self.word_len]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[Symbol]> + '_ {
        self.data.chunks_exact(self.word_len.max(1))
    }

    pub fn to_words(&self) -> Vec<Word> {
        self.iter().map(Word::from).collect()
    }
}

/// A mixing subshift of finite type with its metric parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSpace {
    q: usize,
    adjacency: Vec<bool>,
    theta: f64,
    mixing_exponent: usize,
    word_cap: usize,
}

impl ShiftSpace {
    pub fn new(adjacency: Vec<Vec<u8>>, theta: f64) -> Result<Self> {
        let q = adjacency.len();
        if q < 2 {
            return Err(Error::InvalidInput(format!("alphabet size {q} < 2")));
        }
        if q > MAX_ALPHABET {
            return Err(Error::InvalidInput(format!(
                "alphabet size {q} exceeds {MAX_ALPHABET}"
            )));
        }
        for row in &adjacency {
            if row.len() != q {
                return Err(Error::InvalidInput("adjacency matrix is not square".into()));
            }
            if row.iter().any(|&e| e > 1) {
                return Err(Error::InvalidInput("adjacency entries must be 0 or 1".into()));
            }
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidInput(format!("theta {theta} not in (0,1)")));
        }
        for s in 0..q {
            if adjacency[s].iter().all(|&e| e == 0) {
                return Err(Error::StrandedSymbol {
                    symbol: s + 1,
                    direction: "outgoing",
                });
            }
            if adjacency.iter().all(|row| row[s] == 0) {
                return Err(Error::StrandedSymbol {
                    symbol: s + 1,
                    direction: "incoming",
                });
            }
        }
        let mixing_exponent = primitivity(&adjacency)?;
        Ok(ShiftSpace {
            q,
            adjacency: adjacency
                .iter()
                .flat_map(|row| row.iter().map(|&e| e == 1))
                .collect(),
            theta,
            mixing_exponent,
            word_cap: DEFAULT_WORD_CAP,
        })
    }

    pub fn full(q: usize) -> Self {
        Self::new(vec![vec![1; q]; q], 0.5).expect("full shift is primitive")
    }

    /// The golden-mean shift: the word `22` is forbidden.
    pub fn golden_mean() -> Self {
        Self::new(vec![vec![1, 1], vec![1, 0]], 0.5).expect("golden-mean shift is primitive")
    }

    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidInput(format!("theta {theta} not in (0,1)")));
        }
        self.theta = theta;
        Ok(self)
    }

    pub fn with_word_cap(mut self, cap: usize) -> Self {
        self.word_cap = cap;
        self
    }

    pub fn alphabet_size(&self) -> usize {
        self.q
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn mixing_exponent(&self) -> usize {
        self.mixing_exponent
    }

    pub fn word_cap(&self) -> usize {
        self.word_cap
    }

    #[inline]
    pub fn allows(&self, from: Symbol, to: Symbol) -> bool {
        self.adjacency[from as usize * self.q + to as usize]
    }

    pub fn adjacency_rows(&self) -> Vec<Vec<u8>> {
        (0..self.q)
            .map(|i| (0..self.q).map(|j| self.adjacency[i * self.q + j] as u8).collect())
            .collect()
    }

    /// The shift with reversed edges; it carries time-reversed points.
    pub fn transposed(&self) -> Self {
        let mut adjacency = vec![false; self.q * self.q];
        for i in 0..self.q {
            for j in 0..self.q {
                adjacency[j * self.q + i] = self.adjacency[i * self.q + j];
            }
        }
        ShiftSpace {
            adjacency,
            ..self.clone()
        }
    }

    pub fn successors(&self, s: Symbol) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.q as u16)
            .map(|t| t as Symbol)
            .filter(move |&t| self.allows(s, t))
    }

    pub fn predecessors(&self, s: Symbol) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.q as u16)
            .map(|t| t as Symbol)
            .filter(move |&t| self.allows(t, s))
    }

    pub fn is_admissible(&self, symbols: &[Symbol]) -> bool {
        symbols.iter().all(|&s| (s as usize) < self.q)
            && symbols.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    /// `symbols` read cyclically is admissible (including the wrap-around edge).
    pub fn is_cyclically_admissible(&self, symbols: &[Symbol]) -> bool {
        match (symbols.first(), symbols.last()) {
            (Some(&first), Some(&last)) => self.is_admissible(symbols) && self.allows(last, first),
            _ => false,
        }
    }

    pub fn word(&self, symbols: Vec<Symbol>) -> Result<Word> {
        if self.is_admissible(&symbols) {
            Ok(Word(symbols))
        } else {
            Err(Error::Inadmissible(format!("word {}", Word(symbols))))
        }
    }

    /// Number of admissible words of length `n`: the entry sum of `T^(n-1)`.
    pub fn word_count(&self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        let mut counts = vec![1u128; self.q];
        for _ in 1..n {
            let mut next = vec![0u128; self.q];
            for (i, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for j in 0..self.q {
                    if self.adjacency[i * self.q + j] {
                        next[j] = next[j].saturating_add(c);
                    }
                }
            }
            counts = next;
        }
        counts.iter().fold(0u128, |acc, &c| acc.saturating_add(c))
    }

    fn check_capacity(&self, what: &'static str, requested: u128) -> Result<()> {
        if requested > self.word_cap as u128 {
            Err(Error::CapacityExceeded {
                what,
                requested,
                cap: self.word_cap,
            })
        } else {
            Ok(())
        }
    }

    /// All admissible words of length `n` in lexicographic order.
    pub fn enumerate_words(&self, n: usize) -> Result<WordList> {
        if n == 0 {
            return Err(Error::InvalidInput("word length must be >= 1".into()));
        }
        self.check_capacity("word enumeration", self.word_count(n))?;
        let mut data = Vec::new();
        let mut stack: Vec<Symbol> = Vec::with_capacity(n);
        self.extend_words(n, &mut stack, &mut data);
        Ok(WordList { word_len: n, data })
    }

    fn extend_words(&self, n: usize, stack: &mut Vec<Symbol>, out: &mut Vec<Symbol>) {
        if stack.len() == n {
            out.extend_from_slice(stack);
            return;
        }
        let candidates: Vec<Symbol> = match stack.last() {
            None => (0..self.q as u16).map(|s| s as Symbol).collect(),
            Some(&last) => self.successors(last).collect(),
        };
        for s in candidates {
            stack.push(s);
            self.extend_words(n, stack, out);
            stack.pop();
        }
    }

    /// Every admissible word of length `0..=max_len`, shortest first, then lexicographic.
    pub fn words_up_to(&self, max_len: usize) -> Result<Vec<Word>> {
        let mut out = vec![Word::empty()];
        for n in 1..=max_len {
            out.extend(self.enumerate_words(n)?.to_words());
        }
        Ok(out)
    }

    pub fn least_successor(&self, s: Symbol) -> Symbol {
        self.successors(s).next().expect("no stranded symbols")
    }

    pub fn least_predecessor(&self, s: Symbol) -> Symbol {
        self.predecessors(s).next().expect("no stranded symbols")
    }

    /// Validates and canonicalizes a point given by its tails and core.
    ///
    /// `offset` is the index of coordinate 0 within `core`, so the core
    /// starts at coordinate `-offset`.
    pub fn point(
        &self,
        left_period: Vec<Symbol>,
        core: Vec<Symbol>,
        right_period: Vec<Symbol>,
        offset: i64,
    ) -> Result<Point> {
        if left_period.is_empty() || right_period.is_empty() {
            return Err(Error::InvalidInput("periodic tails must be non-empty".into()));
        }
        let all = left_period.iter().chain(&core).chain(&right_period);
        if let Some(&bad) = all.clone().find(|&&s| s as usize >= self.q) {
            return Err(Error::InvalidInput(format!(
                "symbol {} outside alphabet 1..={}",
                bad as usize + 1,
                self.q
            )));
        }
        let raw = Point {
            left: left_period,
            core,
            right: right_period,
            start: -offset,
        };
        self.check_point(&raw)?;
        Ok(Point::canonical(raw.left, raw.start, raw.core, raw.right))
    }

    /// The periodic point `...www.www...` with `x_0 = word[0]`.
    pub fn periodic_point(&self, word: &[Symbol]) -> Result<Point> {
        if !self.is_cyclically_admissible(word) {
            return Err(Error::Inadmissible(format!(
                "periodic word {} does not close up",
                Word::from(word)
            )));
        }
        Ok(Point::canonical(word.to_vec(), 0, Vec::new(), word.to_vec()))
    }

    pub fn fixed_point(&self, symbol: Symbol) -> Result<Point> {
        self.periodic_point(&[symbol])
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        let mut chain: Vec<Symbol> = Vec::new();
        chain.extend_from_slice(&x.left);
        chain.extend_from_slice(&x.core);
        chain.extend_from_slice(&x.right);
        let ok = self.is_cyclically_admissible(&x.left)
            && self.is_cyclically_admissible(&x.right)
            && self.is_admissible(&chain[x.left.len() - 1..x.left.len() + x.core.len() + 1]);
        if ok {
            Ok(())
        } else {
            Err(Error::Inadmissible(format!("point {x}")))
        }
    }

    /// `θ^k` where `k` is the largest integer with `x_i = y_i` for all `|i| < k`.
    pub fn metric(&self, x: &Point, y: &Point) -> f64 {
        if x == y {
            return 0.0;
        }
        let mut k: i64 = 0;
        loop {
            if x.at(k) != y.at(k) || x.at(-k) != y.at(-k) {
                return self.theta.powi(k as i32);
            }
            k += 1;
        }
    }

    /// `[x, y]`: agrees with `x` on nonpositive and with `y` on nonnegative coordinates.
    pub fn bracket(&self, x: &Point, y: &Point) -> Result<Point> {
        let (x0, y0) = (x.at(0), y.at(0));
        if x0 != y0 {
            return Err(Error::SymbolMismatch {
                left: x0 as usize + 1,
                right: y0 as usize + 1,
            });
        }
        let lo = x.start.min(0);
        let hi = y.end().max(1);
        let middle: Vec<Symbol> = (lo..=0).map(|i| x.at(i)).chain((1..hi).map(|i| y.at(i))).collect();
        Ok(Point::canonical(
            x.left_tail_ending_at(lo),
            lo,
            middle,
            y.right_tail_starting_at(hi),
        ))
    }

    /// Periodic orbits of least period `<= max_period`, ordered by period and
    /// then by the lexicographically least rotation.
    pub fn periodic_orbits(&self, max_period: usize) -> Result<Vec<PeriodicOrbit>> {
        if max_period == 0 {
            return Err(Error::InvalidInput("max_period must be >= 1".into()));
        }
        let mut out = Vec::new();
        for n in 1..=max_period {
            let words = self.enumerate_words(n)?;
            for w in words.iter() {
                if !self.is_cyclically_admissible(w) || !is_lyndon(w) {
                    continue;
                }
                let representative = self.periodic_point(w)?;
                let orbit = (0..n as i64).map(|j| representative.shift(j)).collect();
                out.push(PeriodicOrbit {
                    period: n,
                    word: Word::from(w),
                    representative,
                    orbit,
                });
            }
        }
        Ok(out)
    }

    /// Representatives of the homoclinic classes of `p` with canonical core
    /// length `<= core_bound`.
    ///
    /// Each returned `z` satisfies `z_i = p_i` outside its core, so it lies in
    /// `W^s(p) ∩ W^u(p) \ {p}`. Points differing by a shift of a multiple of
    /// `per(p)` have conjugate holonomy loops; only the one whose core starts
    /// in `[0, per(p))` is kept. Order: core length, core word, start.
    pub fn homoclinic_points(&self, p: &Point, core_bound: usize) -> Result<Vec<Point>> {
        let period = p.period().ok_or(Error::NotPeriodic)?;
        if core_bound == 0 {
            return Err(Error::InvalidInput("core_bound must be >= 1".into()));
        }
        let mut out = Vec::new();
        for c in 1..=core_bound {
            self.check_capacity(
                "homoclinic enumeration",
                self.word_count(c).saturating_mul(period as u128),
            )?;
            let words = self.enumerate_words(c)?;
            for u in words.iter() {
                for s in 0..period as i64 {
                    let before = p.at(s - 1);
                    let after = p.at(s + c as i64);
                    if !self.allows(before, u[0]) || !self.allows(u[c - 1], after) {
                        continue;
                    }
                    let z = Point::canonical(
                        p.left_tail_ending_at(s),
                        s,
                        u.to_vec(),
                        p.right_tail_starting_at(s + c as i64),
                    );
                    if z.core.len() == c && z.start == s && &z != p {
                        out.push(z);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Deterministic point of the cylinder `[word]`: the word is extended on
    /// both sides by the least admissible symbol, repeatedly.
    pub fn cylinder_point(&self, word: &[Symbol]) -> Result<Point> {
        if word.is_empty() || !self.is_admissible(word) {
            return Err(Error::Inadmissible(format!("cylinder word {}", Word::from(word))));
        }
        // Right: follow least successors until a symbol repeats.
        let mut right_chain = vec![*word.last().unwrap()];
        let cycle_start = loop {
            let next = self.least_successor(*right_chain.last().unwrap());
            if let Some(pos) = right_chain.iter().position(|&s| s == next) {
                break pos;
            }
            right_chain.push(next);
        };
        // right_chain[0] is the last word symbol; the periodic part starts at cycle_start.
        // The tail starts one step after the word; when the cycle already
        // contains the last word symbol, rotate it to begin there.
        let (right_pre, right_period) = if cycle_start == 0 {
            let mut period = right_chain[1..].to_vec();
            period.push(right_chain[0]);
            (Vec::new(), period)
        } else {
            (right_chain[1..cycle_start].to_vec(), right_chain[cycle_start..].to_vec())
        };

        let mut left_chain = vec![word[0]];
        let left_cycle = loop {
            let prev = self.least_predecessor(*left_chain.last().unwrap());
            if let Some(pos) = left_chain.iter().position(|&s| s == prev) {
                break pos;
            }
            left_chain.push(prev);
        };
        // left_chain runs backwards in time.
        let (mut left_pre, mut left_period) = if left_cycle == 0 {
            let mut period = left_chain[1..].to_vec();
            period.push(left_chain[0]);
            (Vec::new(), period)
        } else {
            (left_chain[1..left_cycle].to_vec(), left_chain[left_cycle..].to_vec())
        };
        left_period.reverse();
        left_pre.reverse();

        let start = -(left_pre.len() as i64);
        let mut middle = left_pre;
        middle.extend_from_slice(word);
        middle.extend_from_slice(&right_pre);
        let raw = Point {
            left: left_period,
            core: middle,
            right: right_period,
            start,
        };
        debug_assert!(self.check_point(&raw).is_ok());
        Ok(Point::canonical(raw.left, raw.start, raw.core, raw.right))
    }

    /// Random admissible cyclic word with length near `len`.
    pub fn random_cycle<R: Rng + ?Sized>(&self, rng: &mut R, len: usize) -> Vec<Symbol> {
        let mut len = len.max(1);
        loop {
            for _ in 0..256 {
                let mut w = vec![rng.random_range(0..self.q) as Symbol];
                while w.len() < len {
                    let succ: Vec<Symbol> = self.successors(*w.last().unwrap()).collect();
                    w.push(succ[rng.random_range(0..succ.len())]);
                }
                if self.allows(*w.last().unwrap(), w[0]) {
                    return w;
                }
            }
            len += 1;
        }
    }

    /// Random admissible word `u` with `from -> u[0]` and `u[last] -> to`, of
    /// length at least `len` (zero-length allowed when `from -> to`).
    pub fn random_bridge<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        from: Symbol,
        to: Symbol,
        len: usize,
    ) -> Vec<Symbol> {
        let mut len = len;
        loop {
            if len == 0 {
                if self.allows(from, to) {
                    return Vec::new();
                }
                len = 1;
                continue;
            }
            for _ in 0..256 {
                let mut w: Vec<Symbol> = Vec::with_capacity(len);
                let mut cur = from;
                for _ in 0..len {
                    let succ: Vec<Symbol> = self.successors(cur).collect();
                    cur = succ[rng.random_range(0..succ.len())];
                    w.push(cur);
                }
                if self.allows(cur, to) {
                    return w;
                }
            }
            len += 1;
        }
    }

    /// Random point with tail periods `<= max_period` and core length `<= max_core`.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R, max_period: usize, max_core: usize) -> Point {
        let left_len = rng.random_range(1..=max_period.max(1));
        let left = self.random_cycle(rng, left_len);
        let right_len = rng.random_range(1..=max_period.max(1));
        let right = self.random_cycle(rng, right_len);
        let core_len = rng.random_range(0..=max_core);
        let core = self.random_bridge(rng, *left.last().unwrap(), right[0], core_len);
        let start = -(rng.random_range(0..=core.len() as i64 + 2));
        Point::canonical(left, start, core, right)
    }

    /// Random `y` with `y_i = x_i` for all `i >= sync`.
    pub fn random_stable_partner<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        x: &Point,
        sync: i64,
        max_period: usize,
        max_core: usize,
    ) -> Point {
        let end = x.end().max(sync);
        let kept: Vec<Symbol> = (sync..end).map(|i| x.at(i)).collect();
        let left_len = rng.random_range(1..=max_period.max(1));
        let left = self.random_cycle(rng, left_len);
        let target = x.at(sync);
        let bridge_len = rng.random_range(0..=max_core);
        let bridge = self.random_bridge(rng, *left.last().unwrap(), target, bridge_len);
        let start = sync - bridge.len() as i64;
        let mut middle = bridge;
        middle.extend(kept);
        Point::canonical(left, start, middle, x.right_tail_starting_at(end))
    }

    /// Random `y` with `y_i = x_i` for all `i <= sync`.
    pub fn random_unstable_partner<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        x: &Point,
        sync: i64,
        max_period: usize,
        max_core: usize,
    ) -> Point {
        let reversed = self.transposed();
        reversed
            .random_stable_partner(rng, &x.reverse(), -sync, max_period, max_core)
            .reverse()
    }
}

/// A periodic orbit: its least-rotation representative and every phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub period: usize,
    pub word: Word,
    pub representative: Point,
    pub orbit: Vec<Point>,
}

fn is_lyndon(w: &[Symbol]) -> bool {
    let n = w.len();
    (1..n).all(|r| {
        let rotated = w[r..].iter().chain(&w[..r]);
        w.iter().lt(rotated)
    })
}

fn primitive_root(v: &[Symbol]) -> Vec<Symbol> {
    let n = v.len();
    for d in 1..=n {
        if n % d == 0 && (d..n).all(|i| v[i] == v[i % d]) {
            return v[..d].to_vec();
        }
    }
    v.to_vec()
}

/// Bi-infinite sequence `... L L L core R R R ...`, eventually periodic in
/// both directions.
///
/// `left[len-1]` sits at coordinate `start - 1`, `core` occupies
/// `[start, start + core.len())`, and `right[0]` sits at `start + core.len()`.
/// Canonical form: both periods primitive, the core as short as possible and,
/// when the core is empty, the boundary pushed as far right as possible.
/// Purely periodic points have an empty core, `left == right` and `start == 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point {
    left: Vec<Symbol>,
    core: Vec<Symbol>,
    right: Vec<Symbol>,
    start: i64,
}

impl Point {
    fn canonical(left: Vec<Symbol>, start: i64, middle: Vec<Symbol>, right: Vec<Symbol>) -> Point {
        let raw = Point {
            left: primitive_root(&left),
            core: middle,
            right: primitive_root(&right),
            start,
        };
        let a = raw.left.len() as i64;
        let b = raw.right.len() as i64;
        let c = raw.core.len() as i64;
        let s = raw.start;
        let left_pred = |i: i64| raw.left[(i - s).rem_euclid(a) as usize];

        let limit = s + c + a + b;
        let mut m_l = s;
        while m_l < limit && raw.at(m_l) == left_pred(m_l) {
            m_l += 1;
        }
        if m_l == limit {
            // A stretch of length a+b inside the right tail carries both
            // periods, so the whole sequence is periodic.
            let word: Vec<Symbol> = (0..a).map(left_pred).collect();
            return Point {
                left: word.clone(),
                core: Vec::new(),
                right: word,
                start: 0,
            };
        }

        let e = s + c;
        let right_pred = |i: i64| raw.right[(i - e).rem_euclid(b) as usize];
        let mut m_r = e;
        while m_r > m_l && raw.at(m_r - 1) == right_pred(m_r - 1) {
            m_r -= 1;
        }
        let core: Vec<Symbol> = (m_l..m_r).map(|i| raw.at(i)).collect();
        let new_end = m_r.max(m_l);
        Point {
            left: (0..a).map(|j| left_pred(m_l - a + j)).collect(),
            core,
            right: (0..b).map(|j| right_pred(new_end + j)).collect(),
            start: m_l,
        }
    }

    /// Coordinate `i` of the sequence.
    #[inline]
    pub fn at(&self, i: i64) -> Symbol {
        if i < self.start {
            let a = self.left.len() as i64;
            self.left[(i - self.start).rem_euclid(a) as usize]
        } else if i < self.end() {
            self.core[(i - self.start) as usize]
        } else {
            let b = self.right.len() as i64;
            self.right[(i - self.end()).rem_euclid(b) as usize]
        }
    }

    /// Symbols at coordinates `lo..=hi`.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<Symbol> {
        (lo..=hi).map(|i| self.at(i)).collect()
    }

    pub fn left_period(&self) -> &[Symbol] {
        &self.left
    }

    pub fn core(&self) -> &[Symbol] {
        &self.core
    }

    pub fn right_period(&self) -> &[Symbol] {
        &self.right
    }

    /// Coordinate of the first core symbol.
    pub fn start(&self) -> i64 {
        self.start
    }

    /// Coordinate just past the core (where the right tail begins).
    pub fn end(&self) -> i64 {
        self.start + self.core.len() as i64
    }

    /// Index of coordinate 0 within the core (may lie outside it).
    pub fn offset(&self) -> i64 {
        -self.start
    }

    pub fn is_periodic(&self) -> bool {
        self.core.is_empty() && self.left == self.right
    }

    /// Least period of a periodic point.
    pub fn period(&self) -> Option<usize> {
        self.is_periodic().then_some(self.right.len())
    }

    /// Left period word whose last symbol sits at coordinate `end - 1`.
    /// Only meaningful when `end <= start`.
    fn left_tail_ending_at(&self, end: i64) -> Vec<Symbol> {
        let a = self.left.len() as i64;
        (0..a).map(|j| self.at(end - a + j)).collect()
    }

    /// Right period word whose first symbol sits at coordinate `begin`.
    /// Only meaningful when `begin >= end()`.
    fn right_tail_starting_at(&self, begin: i64) -> Vec<Symbol> {
        let b = self.right.len() as i64;
        (0..b).map(|j| self.at(begin + j)).collect()
    }

    /// `σ^r x`, i.e. `(σ^r x)_i = x_{i+r}`.
    pub fn shift(&self, r: i64) -> Point {
        if self.is_periodic() {
            let n = self.right.len() as i64;
            let word: Vec<Symbol> = (0..n).map(|j| self.at(j + r)).collect();
            Point {
                left: word.clone(),
                core: Vec::new(),
                right: word,
                start: 0,
            }
        } else {
            Point {
                start: self.start - r,
                ..self.clone()
            }
        }
    }

    /// Time reversal `(Rx)_i = x_{-i}`; the result lives on the transposed shift.
    pub fn reverse(&self) -> Point {
        let mut left = self.right.clone();
        left.reverse();
        let mut right = self.left.clone();
        right.reverse();
        let mut core = self.core.clone();
        core.reverse();
        Point::canonical(left, 1 - self.end(), core, right)
    }

    /// Smallest `N` with `x_i = y_i` for all `i >= N`, or `None` when `y` is
    /// not on the stable set of `x`. Equal points give `i64::MIN`.
    pub fn stable_sync(&self, other: &Point) -> Option<i64> {
        if self == other {
            return Some(i64::MIN);
        }
        let b = self.right.len();
        if other.right.len() != b {
            return None;
        }
        let e = self.end().max(other.end());
        if (e..e + b as i64).any(|i| self.at(i) != other.at(i)) {
            return None;
        }
        let mut i = e - 1;
        while self.at(i) == other.at(i) {
            i -= 1;
        }
        Some(i + 1)
    }

    /// Largest `N` with `x_i = y_i` for all `i <= N`, or `None` when `y` is
    /// not on the unstable set of `x`. Equal points give `i64::MAX`.
    pub fn unstable_sync(&self, other: &Point) -> Option<i64> {
        if self == other {
            return Some(i64::MAX);
        }
        let a = self.left.len();
        if other.left.len() != a {
            return None;
        }
        let s = self.start.min(other.start);
        if (s - a as i64..s).any(|i| self.at(i) != other.at(i)) {
            return None;
        }
        let mut i = s;
        while self.at(i) == other.at(i) {
            i += 1;
        }
        Some(i - 1)
    }

    pub fn on_stable_set(&self, other: &Point) -> bool {
        self.stable_sync(other).is_some()
    }

    pub fn on_unstable_set(&self, other: &Point) -> bool {
        self.unstable_sync(other).is_some()
    }

    /// `other ∈ W^s_loc(self)`: agreement on all nonnegative coordinates.
    pub fn in_local_stable(&self, other: &Point) -> bool {
        matches!(self.stable_sync(other), Some(n) if n <= 0)
    }

    /// `other ∈ W^u_loc(self)`: agreement on all nonpositive coordinates.
    pub fn in_local_unstable(&self, other: &Point) -> bool {
        matches!(self.unstable_sync(other), Some(n) if n >= 0)
    }

    pub fn to_spec(&self) -> PointSpec {
        PointSpec {
            left_period: Word(self.left.clone()).to_one_based(),
            core: Word(self.core.clone()).to_one_based(),
            right_period: Word(self.right.clone()).to_one_based(),
            offset: self.offset(),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let render = |w: &[Symbol]| Word::from(w).key();
        write!(
            f,
            "({})^∞ [{}] ({})^∞ @{}",
            render(&self.left),
            render(&self.core),
            render(&self.right),
            self.start
        )
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_spec().serialize(serializer)
    }
}

/// Wire form of a [`Point`] with 1-based symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub left_period: Vec<usize>,
    #[serde(default)]
    pub core: Vec<usize>,
    pub right_period: Vec<usize>,
    #[serde(default)]
    pub offset: i64,
}

impl PointSpec {
    pub fn resolve(&self, shift: &ShiftSpace) -> Result<Point> {
        let q = shift.alphabet_size();
        shift.point(
            Word::from_one_based(&self.left_period, q)?.into_vec(),
            Word::from_one_based(&self.core, q)?.into_vec(),
            Word::from_one_based(&self.right_period, q)?.into_vec(),
            self.offset,
        )
    }
}
