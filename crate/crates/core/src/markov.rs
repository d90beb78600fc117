//! Stationary Markov measures on a subshift of finite type.
//!
//! A measure of memory `m` is a Markov chain on admissible words of length
//! `m` whose transitions move the window one step to the right. Memory 1 is
//! an ordinary symbol chain.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::cocycle::LocalTable;
use crate::error::{Error, Result};
use crate::shift_space::{ShiftSpace, Symbol, Word};

#[derive(Debug, Clone)]
pub struct MarkovMeasure {
    shift: ShiftSpace,
    memory: usize,
    states: Vec<Word>,
    index: HashMap<Word, usize>,
    stationary: Vec<f64>,
    /// `transitions[s]` lists `(t, P(s → t))` with positive probability.
    transitions: Vec<Vec<(usize, f64)>>,
}

const ROW_TOL: f64 = 1e-9;

impl MarkovMeasure {
    /// Builds a measure from a state chain; `stationary` is derived when absent.
    pub fn new(
        shift: &ShiftSpace,
        memory: usize,
        transition: impl Fn(&[Symbol], &[Symbol]) -> f64,
        stationary: Option<Vec<f64>>,
    ) -> Result<Self> {
        if memory == 0 {
            return Err(Error::InvalidMeasure("memory must be >= 1".into()));
        }
        let states = shift.enumerate_words(memory)?.to_words();
        let index: HashMap<Word, usize> = states.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        let mut transitions = Vec::with_capacity(states.len());
        for s in &states {
            let mut row = Vec::new();
            let mut total = 0.0;
            for t in shift.successors(*s.last().unwrap()) {
                let mut next: Vec<Symbol> = s[1..].to_vec();
                next.push(t);
                let p = transition(s, &next);
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(Error::InvalidMeasure(format!("bad probability {p} from state {}", s.key())));
                }
                total += p;
                if p > 0.0 {
                    row.push((index[&Word::new(next)], p));
                }
            }
            if (total - 1.0).abs() > ROW_TOL {
                return Err(Error::InvalidMeasure(format!(
                    "row for state {} sums to {total}",
                    s.key()
                )));
            }
            transitions.push(row);
        }
        let mut measure = MarkovMeasure {
            shift: shift.clone(),
            memory,
            states,
            index,
            stationary: Vec::new(),
            transitions,
        };
        measure.stationary = match stationary {
            Some(pi) => {
                measure.check_stationary(&pi)?;
                pi
            }
            None => measure.derive_stationary()?,
        };
        Ok(measure)
    }

    /// Memory-1 chain from a `q × q` stochastic matrix supported on the
    /// adjacency matrix.
    pub fn from_transition(shift: &ShiftSpace, matrix: &[Vec<f64>], stationary: Option<Vec<f64>>) -> Result<Self> {
        let q = shift.alphabet_size();
        if matrix.len() != q || matrix.iter().any(|r| r.len() != q) {
            return Err(Error::InvalidMeasure(format!("transition matrix must be {q}x{q}")));
        }
        for (i, row) in matrix.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if p != 0.0 && !shift.allows(i as Symbol, j as Symbol) {
                    return Err(Error::InvalidMeasure(format!(
                        "transition {} -> {} has mass {p} but is forbidden",
                        i + 1,
                        j + 1
                    )));
                }
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_TOL || row.iter().any(|&p| !(p >= 0.0)) {
                return Err(Error::InvalidMeasure(format!("row {} is not stochastic", i + 1)));
            }
        }
        Self::new(shift, 1, |s, t| matrix[s[0] as usize][t[0] as usize], stationary)
    }

    /// Bernoulli measure on the full shift.
    pub fn bernoulli(shift: &ShiftSpace, probabilities: &[f64]) -> Result<Self> {
        let q = shift.alphabet_size();
        let rows = vec![probabilities.to_vec(); q];
        Self::from_transition(shift, &rows, Some(probabilities.to_vec()))
    }

    fn check_stationary(&self, pi: &[f64]) -> Result<()> {
        if pi.len() != self.states.len() {
            return Err(Error::InvalidMeasure(format!(
                "stationary vector has {} entries, expected {}",
                pi.len(),
                self.states.len()
            )));
        }
        if pi.iter().any(|&p| !(p >= 0.0)) || (pi.iter().sum::<f64>() - 1.0).abs() > ROW_TOL {
            return Err(Error::InvalidMeasure("stationary vector is not a probability vector".into()));
        }
        let pushed = self.push_forward(pi);
        let err = pushed.iter().zip(pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err > 1e-8 {
            return Err(Error::InvalidMeasure(format!("stationary vector is not invariant (error {err:e})")));
        }
        Ok(())
    }

    fn push_forward(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (s, row) in self.transitions.iter().enumerate() {
            for &(t, p) in row {
                out[t] += v[s] * p;
            }
        }
        out
    }

    fn derive_stationary(&self) -> Result<Vec<f64>> {
        let n = self.states.len();
        let mut v = vec![1.0 / n as f64; n];
        // Lazy chain (P + I)/2 converges for any irreducible chain.
        for _ in 0..200_000 {
            let pushed = self.push_forward(&v);
            let next: Vec<f64> = v.iter().zip(&pushed).map(|(a, b)| 0.5 * (a + b)).collect();
            let diff = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = next;
            if diff < 1e-15 {
                let total: f64 = v.iter().sum();
                return Ok(v.into_iter().map(|x| x / total).collect());
            }
        }
        Err(Error::InvalidMeasure("stationary vector did not converge".into()))
    }

    pub(crate) fn from_parts(
        shift: &ShiftSpace,
        memory: usize,
        states: Vec<Word>,
        stationary: Vec<f64>,
        transitions: Vec<Vec<(usize, f64)>>,
    ) -> Self {
        let index = states.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        MarkovMeasure {
            shift: shift.clone(),
            memory,
            states,
            index,
            stationary,
            transitions,
        }
    }

    pub fn shift(&self) -> &ShiftSpace {
        &self.shift
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn states(&self) -> &[Word] {
        &self.states
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn transition(&self, from: &[Symbol], to: &[Symbol]) -> f64 {
        let (Some(&s), Some(&t)) = (self.index.get(&Word::from(from)), self.index.get(&Word::from(to))) else {
            return 0.0;
        };
        self.transitions[s].iter().find(|(u, _)| *u == t).map_or(0.0, |&(_, p)| p)
    }

    /// `μ([w])` for the cylinder fixing `w` at coordinates `0..|w|`.
    pub fn cylinder_mass(&self, w: &[Symbol]) -> f64 {
        let m = self.memory;
        if w.is_empty() {
            return 1.0;
        }
        if !self.shift.is_admissible(w) {
            return 0.0;
        }
        if w.len() < m {
            return self
                .states
                .iter()
                .zip(&self.stationary)
                .filter(|(s, _)| s.starts_with(w))
                .map(|(_, p)| p)
                .sum();
        }
        let mut state = self.index[&Word::from(&w[..m])];
        let mut mass = self.stationary[state];
        for j in m..w.len() {
            let next = self.index[&Word::from(&w[j + 1 - m..=j])];
            let p = self.transitions[state].iter().find(|(u, _)| *u == next).map_or(0.0, |&(_, p)| p);
            mass *= p;
            if mass == 0.0 {
                return 0.0;
            }
            state = next;
        }
        mass
    }

    /// Cylinder masses of every admissible word of length `n`, lexicographic.
    pub fn cylinder_masses(&self, n: usize) -> Result<Vec<(Word, f64)>> {
        Ok(self
            .shift
            .enumerate_words(n)?
            .iter()
            .map(|w| (Word::from(w), self.cylinder_mass(w)))
            .collect())
    }

    /// Kolmogorov–Sinai entropy `-Σ π_s P_st log P_st`.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for (s, row) in self.transitions.iter().enumerate() {
            for &(_, p) in row {
                if p > 0.0 {
                    h -= self.stationary[s] * p * p.ln();
                }
            }
        }
        h
    }

    /// `∫ φ dμ` for a locally constant function.
    pub fn integrate(&self, phi: &LocalTable<f64>) -> f64 {
        phi.entries().map(|(w, v)| v * self.cylinder_mass(&w)).sum()
    }

    /// A trajectory `x_0 … x_{n-1}` drawn from the measure.
    pub fn sample_path<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(n + self.memory);
        let mut state = sample_index(rng, self.stationary.iter().copied().enumerate());
        out.extend_from_slice(&self.states[state]);
        while out.len() < n {
            state = sample_index(rng, self.transitions[state].iter().copied());
            out.push(*self.states[state].last().unwrap());
        }
        out.truncate(n);
        out
    }

    pub fn summary(&self) -> MarkovSummary {
        MarkovSummary {
            memory: self.memory,
            states: self.states.clone(),
            stationary: self.stationary.clone(),
            entropy: self.entropy(),
        }
    }
}

fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: impl Iterator<Item = (usize, f64)> + Clone) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

#[derive(Debug, Clone, Serialize)]
pub struct MarkovSummary {
    pub memory: usize,
    pub states: Vec<Word>,
    pub stationary: Vec<f64>,
    pub entropy: f64,
}
