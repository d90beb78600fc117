//! Locally constant GL(2,R) cocycles and scalar functions on windows.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg2::Mat2;
use crate::shift_space::{Point, ShiftSpace, Symbol, Word};

/// Largest dense table a [`LocalTable`] will allocate.
pub const TABLE_CAP: usize = 1 << 22;

/// A function of the coordinates `x_lo ..= x_hi`, stored densely.
///
/// A depth-`k` object uses the window `(-k, k)`. Other windows arise from the
/// adjoint cocycle and from user-supplied per-symbol line fields.
#[derive(Debug, Clone)]
pub struct LocalTable<T> {
    shift: ShiftSpace,
    lo: i64,
    hi: i64,
    values: Vec<Option<T>>,
}

impl<T: Clone> LocalTable<T> {
    fn empty(shift: &ShiftSpace, lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidInput(format!("empty window ({lo}, {hi})")));
        }
        let len = (hi - lo + 1) as u32;
        let size = (shift.alphabet_size() as u128).checked_pow(len).unwrap_or(u128::MAX);
        if size > TABLE_CAP as u128 {
            return Err(Error::CapacityExceeded {
                what: "local table",
                requested: size,
                cap: TABLE_CAP,
            });
        }
        Ok(LocalTable {
            shift: shift.clone(),
            lo,
            hi,
            values: vec![None; size as usize],
        })
    }

    /// Table with `f(window)` on every admissible window.
    pub fn from_fn(shift: &ShiftSpace, lo: i64, hi: i64, f: impl Fn(&[Symbol]) -> T) -> Result<Self> {
        let mut table = Self::empty(shift, lo, hi)?;
        let words = shift.enumerate_words((hi - lo + 1) as usize)?;
        for w in words.iter() {
            let i = table.index(w);
            table.values[i] = Some(f(w));
        }
        Ok(table)
    }

    /// Depth-`k` table (window `(-k, k)`).
    pub fn with_depth(shift: &ShiftSpace, depth: usize, f: impl Fn(&[Symbol]) -> T) -> Result<Self> {
        Self::from_fn(shift, -(depth as i64), depth as i64, f)
    }

    /// Builds a table from explicit entries; every admissible window must be
    /// present and every key must be admissible.
    pub fn from_entries(shift: &ShiftSpace, lo: i64, hi: i64, entries: &HashMap<Word, T>) -> Result<Self> {
        let mut table = Self::empty(shift, lo, hi)?;
        let len = (hi - lo + 1) as usize;
        for (w, v) in entries {
            if w.len() != len {
                return Err(Error::InvalidInput(format!(
                    "entry {} has length {}, expected {len}",
                    w.key(),
                    w.len()
                )));
            }
            if !shift.is_admissible(w) {
                return Err(Error::Inadmissible(format!("entry key {}", w.key())));
            }
            let i = table.index(w);
            table.values[i] = Some(v.clone());
        }
        for w in shift.enumerate_words(len)?.iter() {
            if table.values[table.index(w)].is_none() {
                return Err(Error::InvalidInput(format!("missing entry for window {}", Word::from(w).key())));
            }
        }
        Ok(table)
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&[Symbol], &T) -> U) -> LocalTable<U> {
        let len = self.window_len();
        let q = self.shift.alphabet_size();
        let mut buf = vec![0 as Symbol; len];
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.as_ref().map(|v| {
                    decode(i, q, &mut buf);
                    f(&buf, v)
                })
            })
            .collect();
        LocalTable {
            shift: self.shift.clone(),
            lo: self.lo,
            hi: self.hi,
            values,
        }
    }
}

fn decode(mut i: usize, q: usize, buf: &mut [Symbol]) {
    for slot in buf.iter_mut().rev() {
        *slot = (i % q) as Symbol;
        i /= q;
    }
}

impl<T> LocalTable<T> {
    pub fn shift(&self) -> &ShiftSpace {
        &self.shift
    }

    /// `(lo, hi)`: the table reads `x_lo ..= x_hi`.
    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn window_len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    /// Symmetric depth `k` when the window is `(-k, k)`.
    pub fn depth(&self) -> Option<usize> {
        (self.lo == -self.hi && self.hi >= 0).then_some(self.hi as usize)
    }

    #[inline]
    fn index(&self, w: &[Symbol]) -> usize {
        let q = self.shift.alphabet_size();
        w.iter().fold(0usize, |acc, &s| acc * q + s as usize)
    }

    /// Value on an admissible window.
    pub fn get(&self, w: &[Symbol]) -> &T {
        self.values[self.index(w)]
            .as_ref()
            .expect("window is admissible")
    }

    pub fn try_get(&self, w: &[Symbol]) -> Option<&T> {
        if w.len() != self.window_len() || w.iter().any(|&s| s as usize >= self.shift.alphabet_size()) {
            return None;
        }
        self.values[self.index(w)].as_ref()
    }

    /// Value at `σ^j x`.
    #[inline]
    pub fn at_shifted(&self, x: &Point, j: i64) -> &T {
        let q = self.shift.alphabet_size();
        let i = (self.lo..=self.hi).fold(0usize, |acc, i| acc * q + x.at(i + j) as usize);
        self.values[i].as_ref().expect("points are admissible")
    }

    pub fn at(&self, x: &Point) -> &T {
        self.at_shifted(x, 0)
    }

    /// Value at position `j` of a finite sequence indexed from `origin`.
    #[inline]
    fn at_in(&self, seq: &[Symbol], origin: i64, j: i64) -> &T {
        let start = (j + self.lo - origin) as usize;
        self.get(&seq[start..start + self.window_len()])
    }

    /// Admissible windows with their values, in lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = (Word, &T)> + '_ {
        let len = self.window_len();
        let q = self.shift.alphabet_size();
        self.values.iter().enumerate().filter_map(move |(i, v)| {
            v.as_ref().map(|v| {
                let mut buf = vec![0; len];
                decode(i, q, &mut buf);
                (Word::new(buf), v)
            })
        })
    }

    /// Extends `word` (placed at coordinates `0..n`) by least admissible
    /// symbols until the windows at positions `0..n` are covered. Returns the
    /// extended sequence and the coordinate of its first symbol.
    pub fn canonical_extension(&self, word: &[Symbol]) -> (Vec<Symbol>, i64) {
        let left = (-self.lo).max(0) as usize;
        let right = self.hi.max(0) as usize;
        let mut seq = Vec::with_capacity(word.len() + left + right);
        let mut s = word[0];
        let mut prefix = Vec::with_capacity(left);
        for _ in 0..left {
            s = self.shift.least_predecessor(s);
            prefix.push(s);
        }
        prefix.reverse();
        seq.extend(prefix);
        seq.extend_from_slice(word);
        let mut s = *word.last().expect("non-empty word");
        for _ in 0..right {
            s = self.shift.least_successor(s);
            seq.push(s);
        }
        (seq, -(left as i64))
    }
}

impl LocalTable<f64> {
    /// Birkhoff sum `Σ_{j<n} φ(σ^j x)`.
    pub fn birkhoff_sum(&self, x: &Point, n: usize) -> f64 {
        (0..n as i64).map(|j| *self.at_shifted(x, j)).sum()
    }

    pub fn constant(shift: &ShiftSpace, value: f64) -> Self {
        Self::with_depth(shift, 0, |_| value).expect("depth-0 table fits")
    }
}

/// `(value, lower, upper)` for the supremum of `‖Aⁿ‖` over a cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WordNorm {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

/// A locally constant cocycle `x ↦ A(x) ∈ GL(2,R)`.
#[derive(Debug, Clone)]
pub struct Cocycle {
    table: LocalTable<Mat2>,
    inverses: LocalTable<Mat2>,
    distortion: OnceLock<f64>,
}

impl Cocycle {
    pub fn new(table: LocalTable<Mat2>) -> Result<Self> {
        Self::with_det_tol(table, 1e-12)
    }

    pub fn with_det_tol(table: LocalTable<Mat2>, det_tol: f64) -> Result<Self> {
        for (w, m) in table.entries() {
            if !m.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite entry for window {}", w.key())));
            }
            if !m.is_invertible(det_tol) {
                return Err(Error::Singular { det: m.det().abs() });
            }
        }
        let inverses = table.map(|_, m| m.inv());
        Ok(Cocycle {
            table,
            inverses,
            distortion: OnceLock::new(),
        })
    }

    /// Depth-`k` cocycle from a window function.
    pub fn from_fn(shift: &ShiftSpace, depth: usize, f: impl Fn(&[Symbol]) -> Mat2) -> Result<Self> {
        Self::new(LocalTable::with_depth(shift, depth, f)?)
    }

    /// One-step cocycle `A(x) = generators[x_0]`.
    pub fn one_step(shift: &ShiftSpace, generators: &[Mat2]) -> Result<Self> {
        if generators.len() != shift.alphabet_size() {
            return Err(Error::InvalidInput(format!(
                "{} generators for alphabet of size {}",
                generators.len(),
                shift.alphabet_size()
            )));
        }
        Self::from_fn(shift, 0, |w| generators[w[0] as usize])
    }

    pub fn constant(shift: &ShiftSpace, m: Mat2) -> Result<Self> {
        Self::from_fn(shift, 0, |_| m)
    }

    pub fn identity(shift: &ShiftSpace) -> Self {
        Self::constant(shift, Mat2::IDENTITY).expect("identity is invertible")
    }

    pub fn table(&self) -> &LocalTable<Mat2> {
        &self.table
    }

    pub fn shift(&self) -> &ShiftSpace {
        self.table.shift()
    }

    pub fn window(&self) -> (i64, i64) {
        self.table.window()
    }

    /// `max(-lo, hi, 0)`: how far from 0 the cocycle looks.
    pub fn reach(&self) -> usize {
        let (lo, hi) = self.window();
        (-lo).max(hi).max(0) as usize
    }

    /// Depends on `x_0` only.
    pub fn is_one_step(&self) -> bool {
        self.window() == (0, 0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Word, &Mat2)> + '_ {
        self.table.entries()
    }

    pub fn evaluate(&self, x: &Point) -> Mat2 {
        *self.table.at(x)
    }

    /// `Aⁿ(x) = A(σ^{n-1}x)⋯A(x)`; `A⁰ = I`; `A^{-n}(x) = Aⁿ(σ^{-n}x)^{-1}`.
    pub fn product(&self, x: &Point, n: i64) -> Mat2 {
        let mut acc = Mat2::IDENTITY;
        if n >= 0 {
            for j in 0..n {
                acc = *self.table.at_shifted(x, j) * acc;
            }
        } else {
            for j in 1..=-n {
                acc = *self.inverses.at_shifted(x, -j) * acc;
            }
        }
        acc
    }

    /// Product along the canonical representative of the cylinder `[word]`.
    pub fn word_product(&self, word: &[Symbol]) -> Mat2 {
        if self.is_one_step() || word.is_empty() {
            return word
                .iter()
                .fold(Mat2::IDENTITY, |acc, &s| *self.table.get(&[s]) * acc);
        }
        let (seq, origin) = self.table.canonical_extension(word);
        self.sequence_product(&seq, origin, word.len())
    }

    /// Product of the windows at positions `0..n` of a finite sequence whose
    /// first symbol sits at coordinate `origin`.
    fn sequence_product(&self, seq: &[Symbol], origin: i64, n: usize) -> Mat2 {
        (0..n as i64).fold(Mat2::IDENTITY, |acc, j| *self.table.at_in(seq, origin, j) * acc)
    }

    /// Empirical distortion constant used by [`Cocycle::word_norm`]; exactly 1
    /// for one-step cocycles.
    pub fn distortion_constant(&self) -> f64 {
        *self.distortion.get_or_init(|| {
            if self.reach() == 0 {
                return 1.0;
            }
            let ext = self.extension_len();
            let mut n_max = 1;
            while n_max < 8 && self.shift().word_count(n_max + 1 + ext) <= 1 << 16 {
                n_max += 1;
            }
            self.bounded_distortion(n_max).unwrap_or(f64::INFINITY)
        })
    }

    fn extension_len(&self) -> usize {
        let (lo, hi) = self.window();
        ((-lo).max(0) + hi.max(0)) as usize
    }

    /// `‖A(I)‖`: exact for one-step cocycles, otherwise the value at the
    /// canonical representative bracketed by the distortion constant.
    pub fn word_norm(&self, word: &[Symbol]) -> WordNorm {
        let value = self.word_product(word).norm();
        if self.reach() == 0 {
            return WordNorm {
                value,
                lower: value,
                upper: value,
            };
        }
        WordNorm {
            value,
            lower: value,
            upper: value * self.distortion_constant(),
        }
    }

    /// Worst margin `1 - max ‖A‖‖A⁻¹‖θ^α` over the table.
    pub fn fiber_bunching_margin(&self, alpha: f64) -> f64 {
        let theta_alpha = self.shift().theta().powf(alpha);
        let worst = self
            .entries()
            .map(|(_, m)| m.condition_number())
            .fold(0.0f64, f64::max);
        1.0 - worst * theta_alpha
    }

    pub fn is_fiber_bunched(&self, alpha: f64) -> (bool, f64) {
        let margin = self.fiber_bunching_margin(alpha);
        (margin > 0.0, margin)
    }

    /// Largest ratio `‖Aⁿ(x)‖ / ‖Aⁿ(y)‖` over `n ≤ n_max`, words `I ∈ L(n)`
    /// and `x, y ∈ [I]`, by exhaustive enumeration of the relevant tails.
    pub fn bounded_distortion(&self, n_max: usize) -> Result<f64> {
        if n_max == 0 {
            return Err(Error::InvalidInput("n_max must be >= 1".into()));
        }
        if self.reach() == 0 {
            return Ok(1.0);
        }
        let (lo, _) = self.window();
        let left = (-lo).max(0) as usize;
        let ext = self.extension_len();
        let mut worst = 1.0f64;
        for n in 1..=n_max {
            let words = self.shift().enumerate_words(n + ext)?;
            let mut ranges: HashMap<&[Symbol], (f64, f64)> = HashMap::new();
            for w in words.iter() {
                let norm = self.sequence_product(w, -(left as i64), n).norm();
                let e = ranges.entry(&w[left..left + n]).or_insert((f64::INFINITY, 0.0));
                e.0 = e.0.min(norm);
                e.1 = e.1.max(norm);
            }
            for (lo_norm, hi_norm) in ranges.values() {
                worst = worst.max(hi_norm / lo_norm);
            }
        }
        Ok(worst)
    }

    /// The adjoint cocycle, realized over the transposed shift on
    /// time-reversed points: `A_*ⁿ(Rx) = (Aⁿ(σ^{-n}x))ᵀ`.
    pub fn adjoint(&self) -> Cocycle {
        let (lo, hi) = self.window();
        let reversed = self.shift().transposed();
        let table = LocalTable::from_fn(&reversed, 1 - hi, 1 - lo, |w| {
            let mut forward = w.to_vec();
            forward.reverse();
            self.table.get(&forward).transpose()
        })
        .expect("same table size as the original");
        Cocycle::new(table).expect("transposes stay invertible")
    }

    /// `x ↦ C A(x) C⁻¹` for a constant invertible `C`.
    pub fn conjugate(&self, c: &Mat2) -> Result<Cocycle> {
        let c_inv = c.inverse()?;
        Cocycle::new(self.table.map(|_, m| *c * *m * c_inv))
    }

    /// Common eigendirection of every table entry, if one exists.
    pub fn common_invariant_line(&self, tol: f64) -> Option<crate::linalg2::Direction> {
        crate::typicality::common_invariant_line(self, tol)
    }
}

/// `B(x) = [[a(x), b(x)], [0, c(x)]]` with `a`, `c` nowhere zero.
#[derive(Debug, Clone)]
pub struct TriangularCocycle {
    pub a: LocalTable<f64>,
    pub b: LocalTable<f64>,
    pub c: LocalTable<f64>,
}

impl TriangularCocycle {
    pub fn new(a: LocalTable<f64>, b: LocalTable<f64>, c: LocalTable<f64>) -> Result<Self> {
        if a.window() != b.window() || a.window() != c.window() {
            return Err(Error::InvalidInput("a, b, c must share a window".into()));
        }
        for (name, t) in [("a", &a), ("c", &c)] {
            if let Some((w, _)) = t.entries().find(|(_, v)| **v == 0.0 || !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} vanishes or is not finite on window {}",
                    w.key()
                )));
            }
        }
        if let Some((w, _)) = b.entries().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("b is not finite on window {}", w.key())));
        }
        Ok(TriangularCocycle { a, b, c })
    }

    /// One-step triangular cocycle from per-symbol values.
    pub fn one_step(shift: &ShiftSpace, a: &[f64], b: &[f64], c: &[f64]) -> Result<Self> {
        let q = shift.alphabet_size();
        if a.len() != q || b.len() != q || c.len() != q {
            return Err(Error::InvalidInput(format!("need {q} values for each of a, b, c")));
        }
        let table = |v: &[f64]| LocalTable::with_depth(shift, 0, |w| v[w[0] as usize]);
        Self::new(table(a)?, table(b)?, table(c)?)
    }

    pub fn shift(&self) -> &ShiftSpace {
        self.a.shift()
    }

    pub fn window(&self) -> (i64, i64) {
        self.a.window()
    }

    pub fn generator(&self, x: &Point) -> Mat2 {
        Mat2::new(*self.a.at(x), *self.b.at(x), 0.0, *self.c.at(x))
    }

    pub fn to_cocycle(&self) -> Cocycle {
        let table = self.a.map(|w, &a| Mat2::new(a, *self.b.get(w), 0.0, *self.c.get(w)));
        Cocycle::with_det_tol(table, 0.0).expect("diagonal entries are nonzero")
    }

    /// `Bⁿ(x)`: diagonal `(aⁿ(x), cⁿ(x))`, off-diagonal
    /// `Σ_{i<n} a^{n-i-1}(σ^{i+1}x) b(σ^i x) c^i(x)`, lower-left exactly zero.
    pub fn product(&self, x: &Point, n: usize) -> Mat2 {
        let (mut an, mut bn, mut cn) = (1.0, 0.0, 1.0);
        for j in 0..n as i64 {
            let a = *self.a.at_shifted(x, j);
            let b = *self.b.at_shifted(x, j);
            let c = *self.c.at_shifted(x, j);
            bn = a * bn + b * cn;
            an *= a;
            cn *= c;
        }
        Mat2::new(an, bn, 0.0, cn)
    }

    pub fn log_abs_a(&self) -> LocalTable<f64> {
        self.a.map(|_, v| v.abs().ln())
    }

    pub fn log_abs_c(&self) -> LocalTable<f64> {
        self.c.map(|_, v| v.abs().ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg2::Mat2;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn two_diag() -> Cocycle {
        Cocycle::one_step(&ShiftSpace::full(2), &[Mat2::diag(2.0, 1.0), Mat2::diag(1.0, 2.0)]).unwrap()
    }

    fn depth_one() -> Cocycle {
        let s = ShiftSpace::golden_mean();
        Cocycle::from_fn(&s, 1, |w| {
            let t = 0.3 * w[0] as f64 + 0.7 * w[1] as f64 - 0.2 * w[2] as f64;
            Mat2::rotation(t) * Mat2::diag(1.5 + w[1] as f64, 0.8)
        })
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let s = ShiftSpace::full(2);
        let a = two_diag();
        assert_eq!(a.evaluate(&s.fixed_point(0).unwrap()), Mat2::diag(2.0, 1.0));
        let d = depth_one();
        let g = ShiftSpace::golden_mean();
        let x = g.point(vec![0], vec![1, 0, 0, 1], vec![0], 1).unwrap();
        let y = g.point(vec![1, 0], vec![1, 0, 0], vec![0], 1).unwrap();
        assert_eq!(x.window(-1, 1), y.window(-1, 1));
        assert_eq!(d.evaluate(&x), d.evaluate(&y));
        assert_eq!(d.evaluate(&x.shift(0)), d.evaluate(&x));
    }

    #[test]
    fn product_examples() {
        let s = ShiftSpace::full(2);
        let p = Mat2::new(2.0, 1.0, 0.5, 1.0);
        let a = Cocycle::one_step(&s, &[p, Mat2::IDENTITY]).unwrap();
        let x = s.fixed_point(0).unwrap();
        assert_eq!(a.product(&x, 0), Mat2::IDENTITY);
        assert_eq!(a.product(&x, 3), p * p * p);
    }

    #[test]
    fn word_norm_examples() {
        let a = two_diag();
        let wn = a.word_norm(&[0, 0, 1]);
        assert_eq!(wn.value, 4.0);
        assert_eq!(wn.lower, wn.upper);
        assert_eq!(a.word_norm(&[1]).value, 2.0);
    }

    #[test]
    fn fiber_bunching_examples() {
        let s = ShiftSpace::full(2);
        let (ok, margin) = Cocycle::identity(&s).is_fiber_bunched(1.0);
        assert!(ok && (margin - 0.5).abs() < 1e-15);
        let a = Cocycle::constant(&s, Mat2::diag(4.0, 0.25)).unwrap();
        let (ok, margin) = a.is_fiber_bunched(1.0);
        assert!(!ok && (margin - (1.0 - 8.0)).abs() < 1e-12);
        let conformal = Cocycle::one_step(&s, &[Mat2::rotation(0.4).scale(3.0), Mat2::rotation(1.3).scale(0.5)]).unwrap();
        assert!(conformal.is_fiber_bunched(1.0).0);
    }

    #[test]
    fn distortion_examples() {
        assert_eq!(two_diag().bounded_distortion(5).unwrap(), 1.0);
        let g = ShiftSpace::golden_mean();
        let id = Cocycle::from_fn(&g, 2, |_| Mat2::IDENTITY).unwrap();
        assert_eq!(id.bounded_distortion(4).unwrap(), 1.0);
        let d = depth_one();
        let mut prev = 1.0;
        for n in 1..=6 {
            let c = d.bounded_distortion(n).unwrap();
            assert!(c >= prev);
            prev = c;
        }
        assert!(prev > 1.0);
        // the canonical value is a point of the cylinder, so it lies inside the bracket
        let wn = d.word_norm(&[0, 1, 0, 0]);
        assert!(wn.upper >= wn.value);
    }

    #[test]
    fn adjoint_examples() {
        let s = ShiftSpace::full(2);
        let a = Cocycle::one_step(&s, &[Mat2::new(1.0, 2.0, 0.0, 1.0), Mat2::rotation(0.3)]).unwrap();
        let adj = a.adjoint();
        assert_eq!(adj.window(), (1, 1));
        for (w, m) in a.entries() {
            assert_eq!(*adj.table().get(&w), m.transpose());
        }
        let back = depth_one().adjoint().adjoint();
        for (w, m) in depth_one().entries() {
            assert_eq!(back.table().get(&w), m);
        }
    }

    #[test]
    fn adjoint_product_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = depth_one();
        let adj = d.adjoint();
        let g = d.shift().clone();
        for _ in 0..100 {
            let x = g.random_point(&mut rng, 3, 4);
            for n in 0..6 {
                let lhs = adj.product(&x.reverse(), n);
                let rhs = d.product(&x.shift(-n), n).transpose();
                assert!(lhs.rel_diff(&rhs) < 1e-12);
            }
        }
    }

    #[test]
    fn triangular_examples() {
        let s = ShiftSpace::full(2);
        let b0 = TriangularCocycle::one_step(&s, &[2.0, 1.0], &[0.0, 0.0], &[1.0, 2.0]).unwrap();
        let x = s.point(vec![0], vec![1, 1, 0], vec![1], 0).unwrap();
        let p = b0.product(&x, 5);
        assert_eq!(p.b, 0.0);
        assert_eq!(p.c, 0.0);
        let b = TriangularCocycle::one_step(&s, &[2.0, -1.5], &[0.3, 1.7], &[0.5, 3.0]).unwrap();
        assert_eq!(b.product(&x, 1), b.generator(&x));
        let generic = b.to_cocycle();
        let t = b.product(&x, 6);
        assert!(t.rel_diff(&generic.product(&x, 6)) < 1e-12);
        assert_eq!(t.c, 0.0);
    }

    #[test]
    fn one_step_word_product_matches_point_product() {
        let s = ShiftSpace::full(3);
        let a = Cocycle::one_step(&s, &[Mat2::rotation(FRAC_PI_4), Mat2::diag(2.0, 0.5), Mat2::new(1.0, 1.0, 0.0, 1.0)]).unwrap();
        let d = depth_one();
        for w in s.enumerate_words(3).unwrap().iter() {
            let x = s.cylinder_point(w).unwrap();
            assert_eq!(a.word_product(w), a.product(&x, 3));
        }
        let g = d.shift().clone();
        for w in g.enumerate_words(4).unwrap().iter() {
            let x = g.cylinder_point(w).unwrap();
            assert!(d.word_product(w).rel_diff(&d.product(&x, 4)) < 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn cocycle_equation(seed in any::<u64>(), m in -6i64..=6, n in -6i64..=6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = depth_one();
            let x = d.shift().random_point(&mut rng, 3, 5);
            let lhs = d.product(&x, m + n);
            let rhs = d.product(&x.shift(n), m) * d.product(&x, n);
            prop_assert!(lhs.rel_diff(&rhs) < 1e-9);
        }

        #[test]
        fn word_norm_submultiplicative(seed in any::<u64>(), n1 in 1usize..6, n2 in 1usize..6) {
            use rand::Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = two_diag();
            let i: Vec<Symbol> = (0..n1).map(|_| rng.random_range(0..2)).collect();
            let j: Vec<Symbol> = (0..n2).map(|_| rng.random_range(0..2)).collect();
            let ij: Vec<Symbol> = i.iter().chain(&j).copied().collect();
            prop_assert!(a.word_norm(&ij).value <= a.word_norm(&i).upper * a.word_norm(&j).upper * (1.0 + 1e-12));
        }
    }
}
