//! Subadditive pressure of the singular value potential, exact pressure of
//! locally constant potentials, and Lyapunov exponents.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::{Cocycle, LocalTable, TriangularCocycle};
use crate::error::{Error, Result};
use crate::linalg2::{eigen2, Mat2};
use crate::markov::MarkovMeasure;
use crate::shift_space::{Point, ShiftSpace, Symbol, Word};

/// A locally constant real function.
pub type Potential = LocalTable<f64>;

const POWER_TOL: f64 = 1e-12;
const POWER_CAP: usize = 100_000;

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// `log Σ exp(l)` in a fixed order.
pub fn log_sum_exp(logs: &[f64]) -> f64 {
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + compensated_sum(logs.iter().map(|l| (l - m).exp())).ln()
}

/// `log Σ_{I ∈ L(n)} ‖A(I)‖` over the canonical cylinder representatives.
pub fn log_word_sum(a: &Cocycle, n: usize) -> Result<f64> {
    let words = a.shift().enumerate_words(n)?;
    let logs: Vec<f64> = (0..words.len())
        .into_par_iter()
        .with_min_len(1024)
        .map(|i| a.word_product(words.get(i)).norm().ln())
        .collect();
    Ok(log_sum_exp(&logs))
}

#[derive(Debug, Clone, Serialize)]
pub struct PressureEstimate {
    pub method: &'static str,
    pub n_used: usize,
    /// `log Σ_n` for `n = 1..=n_used`.
    pub log_sums: Vec<f64>,
    /// `P_n = (1/n) log Σ_n`.
    pub p_n: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    /// Which bound produced `lower`.
    pub lower_source: &'static str,
    /// Distortion constant `C` in the upper bound.
    pub distortion: f64,
    /// `log(Σ_n / Σ_{n-1})` at the last level, a point estimate.
    pub extrapolated: Option<f64>,
}

impl PressureEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.upper + self.lower)
    }

    pub fn contains(&self, value: f64, slack: f64) -> bool {
        self.lower - slack <= value && value <= self.upper + slack
    }

    /// `min_{m ≤ n} (log Σ_m + log C)/m`.
    pub fn upper_at(&self, n: usize) -> f64 {
        (1..=n.min(self.n_used))
            .map(|m| (self.log_sums[m - 1] + self.distortion.ln()) / m as f64)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Quasi-multiplicativity constants `(c, k)` supplied to the lower bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QmConstants {
    pub c: f64,
    pub k: usize,
}

/// Brackets `P(Φ_A)` using cylinder sums up to `n_max`.
///
/// Upper: `C·Σ_n` is submultiplicative, so `(log Σ_n + log C)/n ≥ P` for every
/// `n`. Lower, the largest of:
/// - `P(½ log|det A|)`, since `λ₊ ≥ ½∫log|det A|` for every invariant measure;
/// - `(1/n) log ρ(A^n(p))` over short periodic orbits;
/// - `max(P(log|a|), P(log|c|))` when every generator fixes a common line,
///   with `a` the action on the line and `c = det/a` the quotient action;
/// - with QM constants, `X/(n+k)` (or `X/n` when `X < 0`) where
///   `X = log Σ_n + log c - log(k+1)`.
pub fn subadditive_pressure(a: &Cocycle, n_max: usize, qm: Option<QmConstants>) -> Result<PressureEstimate> {
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be >= 1".into()));
    }
    let distortion = a.distortion_constant();
    let mut log_sums = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        log_sums.push(log_word_sum(a, n)?);
    }
    let p_n: Vec<f64> = log_sums.iter().enumerate().map(|(i, l)| l / (i + 1) as f64).collect();
    let upper = (1..=n_max)
        .map(|n| (log_sums[n - 1] + distortion.ln()) / n as f64)
        .fold(f64::INFINITY, f64::min);

    let mut lower = f64::NEG_INFINITY;
    let mut lower_source = "none";
    let mut consider = |value: f64, source: &'static str| {
        if value > lower {
            lower = value;
            lower_source = source;
        }
    };

    let half_log_det = a.table().map(|_, m| 0.5 * m.det().abs().ln());
    consider(additive_pressure(&half_log_det)?.lower, "half_log_det");

    for orbit in a.shift().periodic_orbits(n_max.min(4))? {
        let m = a.product(&orbit.representative, orbit.period as i64);
        consider(m.spectral_radius().ln() / orbit.period as f64, "periodic_spectral_radius");
    }

    if let Some(line) = a.common_invariant_line(1e-12) {
        let (on_line, quotient) = line_actions(a, &line);
        let pa = additive_pressure(&on_line)?.lower;
        let pc = additive_pressure(&quotient)?.lower;
        consider(pa.max(pc), "invariant_line");
    }

    if let Some(QmConstants { c, k }) = qm {
        if c > 0.0 {
            for (i, l) in log_sums.iter().enumerate() {
                let n = i + 1;
                let x = l + c.ln() - ((k + 1) as f64).ln();
                let bound = if x >= 0.0 { x / (n + k) as f64 } else { x / n as f64 };
                consider(bound, "quasi_multiplicativity");
            }
        }
    }

    let extrapolated = (n_max >= 2).then(|| log_sums[n_max - 1] - log_sums[n_max - 2]);
    Ok(PressureEstimate {
        method: "subadditive",
        n_used: n_max,
        log_sums,
        p_n,
        lower: lower.min(upper),
        upper,
        lower_source,
        distortion,
        extrapolated,
    })
}

/// `(log|a|, log|c|)` where `A(x)L = a(x)L` and `c = det A / a` acts on `R²/L`.
pub fn line_actions(a: &Cocycle, line: &crate::linalg2::Direction) -> (Potential, Potential) {
    let [lx, ly] = line.vector();
    let on_line = a.table().map(|_, m| {
        let [ix, iy] = m.apply([lx, ly]);
        (ix * lx + iy * ly).abs().ln()
    });
    let quotient = a.table().map(|_, m| {
        let [ix, iy] = m.apply([lx, ly]);
        let factor = ix * lx + iy * ly;
        (m.det() / factor).abs().ln()
    });
    (on_line, quotient)
}

/// Weighted transition matrix of a locally constant potential.
///
/// States are admissible words of length `max(w - 1, 1)` for a window of
/// length `w`; the step `s → t` carries weight `exp φ` of the window spelled
/// by `s` followed by the last symbol of `t`.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    pub shift: ShiftSpace,
    pub memory: usize,
    pub states: Vec<Word>,
    /// Sparse rows `(t, weight)`; weights are scaled by `exp(-shift_by)`.
    pub rows: Vec<Vec<(usize, f64)>>,
    /// `max φ`, factored out of every weight.
    pub shift_by: f64,
}

#[derive(Debug, Clone)]
pub struct Perron {
    /// `log λ` including the factored-out maximum.
    pub log_lambda: f64,
    pub log_lower: f64,
    pub log_upper: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    pub iterations: usize,
}

impl TransferMatrix {
    pub fn new(phi: &Potential) -> Result<Self> {
        let shift = phi.shift().clone();
        let w = phi.window_len();
        let memory = (w.max(2)) - 1;
        let states = shift.enumerate_words(memory)?.to_words();
        let index: std::collections::HashMap<&[Symbol], usize> =
            states.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
        let shift_by = phi.entries().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
        if !shift_by.is_finite() {
            return Err(Error::InvalidInput("potential must be finite".into()));
        }
        let mut rows = Vec::with_capacity(states.len());
        for s in &states {
            let mut row = Vec::new();
            for t_last in shift.successors(*s.last().unwrap()) {
                let mut window: Vec<Symbol> = s.to_vec();
                window.push(t_last);
                let target = &window[1..];
                let value = if w == 1 { *phi.get(&[t_last]) } else { *phi.get(&window) };
                if !value.is_finite() {
                    return Err(Error::InvalidInput("potential must be finite".into()));
                }
                row.push((index[target], (value - shift_by).exp()));
            }
            rows.push(row);
        }
        Ok(TransferMatrix {
            shift,
            memory,
            states,
            rows,
            shift_by,
        })
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| compensated_sum(row.iter().map(|&(t, w)| w * v[t])))
            .collect()
    }

    fn apply_left(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (s, row) in self.rows.iter().enumerate() {
            for &(t, w) in row {
                out[t] += v[s] * w;
            }
        }
        out
    }

    /// Power iteration with a Collatz–Wielandt enclosure of the Perron root.
    pub fn perron(&self) -> Result<Perron> {
        let n = self.states.len();
        let mut r = vec![1.0; n];
        let mut iterations = 0;
        let (mut lo, mut hi);
        loop {
            let mr = self.apply(&r);
            lo = f64::INFINITY;
            hi = 0.0f64;
            for (x, y) in mr.iter().zip(&r) {
                let q = x / y;
                lo = lo.min(q);
                hi = hi.max(q);
            }
            let norm = mr.iter().copied().fold(0.0, f64::max);
            r = mr.into_iter().map(|x| x / norm).collect();
            iterations += 1;
            if hi - lo <= POWER_TOL * hi || iterations >= POWER_CAP {
                break;
            }
        }
        if !(lo > 0.0) {
            return Err(Error::InvalidInput("transfer matrix is not primitive".into()));
        }
        let lambda = 0.5 * (lo + hi);
        let mut l = vec![1.0; n];
        for _ in 0..POWER_CAP {
            let lm = self.apply_left(&l);
            let norm = lm.iter().copied().fold(0.0, f64::max);
            let next: Vec<f64> = lm.into_iter().map(|x| x / norm).collect();
            let diff = next.iter().zip(&l).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            l = next;
            if diff <= POWER_TOL {
                break;
            }
        }
        Ok(Perron {
            log_lambda: lambda.ln() + self.shift_by,
            log_lower: lo.ln() + self.shift_by,
            log_upper: hi.ln() + self.shift_by,
            right: r,
            left: l,
            iterations,
        })
    }

    /// The equilibrium state: `P_st = M_st r_t / (λ r_s)`, `π ∝ l ∘ r`.
    pub fn equilibrium(&self) -> Result<MarkovMeasure> {
        let perron = self.perron()?;
        let lambda = (perron.log_lambda - self.shift_by).exp();
        let mut pi: Vec<f64> = perron.left.iter().zip(&perron.right).map(|(l, r)| l * r).collect();
        let total: f64 = compensated_sum(pi.iter().copied());
        pi.iter_mut().for_each(|p| *p /= total);
        let transitions: Vec<Vec<(usize, f64)>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(s, row)| {
                let raw: Vec<(usize, f64)> = row
                    .iter()
                    .map(|&(t, w)| (t, w * perron.right[t] / (lambda * perron.right[s])))
                    .collect();
                // Renormalize away the last few ulps so rows are exactly stochastic.
                let sum = compensated_sum(raw.iter().map(|x| x.1));
                raw.into_iter().map(|(t, p)| (t, p / sum)).collect()
            })
            .collect();
        Ok(MarkovMeasure::from_parts(
            &self.shift,
            self.memory,
            self.states.clone(),
            pi,
            transitions,
        ))
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdditivePressure {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

/// `P(φ) = log λ` for the Perron root `λ` of the transfer matrix.
pub fn additive_pressure(phi: &Potential) -> Result<AdditivePressure> {
    let perron = TransferMatrix::new(phi)?.perron()?;
    Ok(AdditivePressure {
        value: perron.log_lambda,
        lower: perron.log_lower,
        upper: perron.log_upper,
        iterations: perron.iterations,
    })
}

/// `(λ₊, λ₋)(A, p) = (1/per) log |eigenvalues of A^{per}(p)|`, descending.
pub fn lyapunov_periodic(a: &Cocycle, p: &Point) -> Result<(f64, f64)> {
    let period = p.period().ok_or(Error::NotPeriodic)?;
    let e = eigen2(&a.product(p, period as i64));
    let per = period as f64;
    Ok((e.moduli[0].ln() / per, e.moduli[1].ln() / per))
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub per_trial: Vec<f64>,
}

/// `log ‖Aⁿ‖` along one sampled trajectory, renormalizing each step.
fn log_norm_along(a: &Cocycle, path: &[Symbol], origin: i64, n: usize) -> f64 {
    let (lo, hi) = a.window();
    let table = a.table();
    let mut m = Mat2::IDENTITY;
    let mut log_scale = 0.0;
    for j in 0..n as i64 {
        let start = (j + lo - origin) as usize;
        let window = &path[start..start + (hi - lo + 1) as usize];
        m = *table.get(window) * m;
        let s = m.max_abs();
        m = m.scale(1.0 / s);
        log_scale += s.ln();
    }
    log_scale + m.norm().ln()
}

/// Mean of `(1/n) log ‖Aⁿ(x)‖` over `trials` trajectories of `μ`. Trial `t`
/// uses ChaCha stream `t` of `seed`, so results do not depend on scheduling.
pub fn lyapunov_monte_carlo(
    a: &Cocycle,
    mu: &MarkovMeasure,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if mu.shift().adjacency_rows() != a.shift().adjacency_rows() {
        return Err(Error::InvalidMeasure("measure lives on a different shift".into()));
    }
    if n == 0 || trials == 0 {
        return Err(Error::InvalidInput("n and trials must be >= 1".into()));
    }
    let (lo, hi) = a.window();
    let origin = lo.min(0);
    let len = (n as i64 - 1 + hi.max(0) - origin + 1) as usize;
    let per_trial: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let path = mu.sample_path(&mut rng, len);
            log_norm_along(a, &path, origin, n) / n as f64
        })
        .collect();
    let k = trials as f64;
    let mean = compensated_sum(per_trial.iter().copied()) / k;
    let var = if trials > 1 {
        compensated_sum(per_trial.iter().map(|x| (x - mean) * (x - mean))) / (k - 1.0)
    } else {
        0.0
    };
    Ok(MonteCarloEstimate {
        mean,
        stderr: (var / k).sqrt(),
        n,
        trials,
        seed,
        per_trial,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TriangularPressures {
    pub log_a: AdditivePressure,
    pub log_c: AdditivePressure,
    /// `max(P(log|a|), P(log|c|))`.
    pub singular_value: f64,
}

pub fn triangular_pressures(b: &TriangularCocycle) -> Result<TriangularPressures> {
    let log_a = additive_pressure(&b.log_abs_a())?;
    let log_c = additive_pressure(&b.log_abs_c())?;
    Ok(TriangularPressures {
        log_a,
        log_c,
        singular_value: log_a.value.max(log_c.value),
    })
}
