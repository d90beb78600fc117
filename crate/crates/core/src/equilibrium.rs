//! Equilibrium states, the periodic-orbit cohomology test and the
//! classification pipeline.

use std::collections::HashMap;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::cocycle::{Cocycle, LocalTable, TriangularCocycle};
use crate::error::{Error, Result};
use crate::linalg2::{Direction, Mat2};
use crate::markov::MarkovMeasure;
use crate::pressure::{
    additive_pressure, log_sum_exp, subadditive_pressure, triangular_pressures, AdditivePressure, Potential,
    PressureEstimate, TransferMatrix, TriangularPressures,
};
use crate::shift_space::{Point, Symbol, Word};
use crate::typicality::{
    equal_modulus_scan, is_typical, EqualModulus, TypicalityOutcome, DEFAULT_CORE_BOUND, DEFAULT_PERIOD_BOUND,
};
use crate::Tolerances;

/// Default longest period examined by the cohomology test.
pub const DEFAULT_LIVSIC_PERIOD_BOUND: usize = 12;
/// Default cylinder depth for approximate Gibbs weights.
pub const DEFAULT_GIBBS_DEPTH: usize = 8;

/// Weights on the admissible words of one length, summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderMeasure {
    pub depth: usize,
    pub words: Vec<Word>,
    pub weights: Vec<f64>,
}

impl CylinderMeasure {
    pub fn from_markov(mu: &MarkovMeasure, depth: usize) -> Result<Self> {
        let (words, weights) = mu.cylinder_masses(depth)?.into_iter().unzip();
        Ok(CylinderMeasure { depth, words, weights })
    }

    pub fn get(&self, word: &[Symbol]) -> f64 {
        self.words
            .binary_search_by(|w| w.as_slice().cmp(word))
            .map_or(0.0, |i| self.weights[i])
    }

    pub fn total(&self) -> f64 {
        crate::pressure::compensated_sum(self.weights.iter().copied())
    }

    /// Masses of the length-`m` prefixes, `μ([I]) = Σ_J μ([IJ])`.
    pub fn marginal(&self, m: usize) -> CylinderMeasure {
        let mut sums: Vec<(Word, f64)> = Vec::new();
        for (w, p) in self.words.iter().zip(&self.weights) {
            let prefix = &w[..m.min(w.len())];
            match sums.last_mut() {
                Some((last, acc)) if last.as_slice() == prefix => *acc += p,
                _ => sums.push((Word::from(prefix), *p)),
            }
        }
        let (words, weights) = sums.into_iter().unzip();
        CylinderMeasure { depth: m, words, weights }
    }

    /// Masses of the length-`m` suffixes; equals [`Self::marginal`] for shift-invariant measures.
    pub fn suffix_marginal(&self, m: usize) -> CylinderMeasure {
        let mut sums: HashMap<Word, f64> = HashMap::new();
        for (w, p) in self.words.iter().zip(&self.weights) {
            *sums.entry(Word::from(&w[w.len() - m.min(w.len())..])).or_default() += p;
        }
        let mut pairs: Vec<(Word, f64)> = sums.into_iter().collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let (words, weights) = pairs.into_iter().unzip();
        CylinderMeasure { depth: m, words, weights }
    }

    /// `max_I |μ([I]) - ν([I])|` over words carried by either measure.
    pub fn max_difference(&self, other: &CylinderMeasure) -> f64 {
        let one = self.words.iter().map(|w| (self.get(w) - other.get(w)).abs());
        let two = other.words.iter().map(|w| (self.get(w) - other.get(w)).abs());
        one.chain(two).fold(0.0, f64::max)
    }
}

impl Serialize for CylinderMeasure {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Weights<'a>(&'a CylinderMeasure);
        impl Serialize for Weights<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.words.len()))?;
                for (w, p) in self.0.words.iter().zip(&self.0.weights) {
                    map.serialize_entry(&w.key(), p)?;
                }
                map.end()
            }
        }
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("depth", &self.depth)?;
        map.serialize_entry("weights", &Weights(self))?;
        map.end()
    }
}

/// Normalized `e^{-nP}‖A(I)‖` and how well it behaves as a Gibbs measure.
#[derive(Debug, Clone, Serialize)]
pub struct GibbsReport {
    pub measure: CylinderMeasure,
    pub pressure: f64,
    /// `max_{n' ≤ n} max_I r(I) / min_I r(I)` with
    /// `r(I) = μ([I]) / (e^{-n'P}‖A(I)‖)` and `μ` the depth-`n` weights marginalized.
    pub gibbs_constant: f64,
    pub constants_by_depth: Vec<f64>,
    /// `max |μ_n([I]) - μ_{n-1}([I])|` on length `n-1` prefixes.
    pub depth_defect: f64,
    /// `max |prefix marginal - suffix marginal|` at length `n-1`.
    pub shift_defect: f64,
}

fn normalized_word_weights(a: &Cocycle, n: usize, pressure: f64) -> Result<CylinderMeasure> {
    let words = a.shift().enumerate_words(n)?.to_words();
    let logs: Vec<f64> = words
        .iter()
        .map(|w| a.word_product(w).norm().ln() - n as f64 * pressure)
        .collect();
    let total = log_sum_exp(&logs);
    let weights = logs.iter().map(|l| (l - total).exp()).collect();
    Ok(CylinderMeasure { depth: n, words, weights })
}

/// Cylinder weights `∝ e^{-nP}‖A(I)‖` at depth `n` with an empirical Gibbs constant.
pub fn gibbs_weights(a: &Cocycle, n: usize, pressure: f64) -> Result<GibbsReport> {
    if n == 0 {
        return Err(Error::InvalidInput("depth must be >= 1".into()));
    }
    let measure = normalized_word_weights(a, n, pressure)?;
    let mut constants_by_depth = Vec::with_capacity(n);
    for m in 1..=n {
        let marg = measure.marginal(m);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (w, p) in marg.words.iter().zip(&marg.weights) {
            let r = p / (a.word_product(w).norm().ln() - m as f64 * pressure).exp();
            lo = lo.min(r);
            hi = hi.max(r);
        }
        constants_by_depth.push(hi / lo);
    }
    let (depth_defect, shift_defect) = if n >= 2 {
        let coarse = normalized_word_weights(a, n - 1, pressure)?;
        let prefix = measure.marginal(n - 1);
        (prefix.max_difference(&coarse), prefix.max_difference(&measure.suffix_marginal(n - 1)))
    } else {
        (0.0, 0.0)
    };
    Ok(GibbsReport {
        gibbs_constant: constants_by_depth.iter().copied().fold(1.0, f64::max),
        measure,
        pressure,
        constants_by_depth,
        depth_defect,
        shift_defect,
    })
}

/// The unique equilibrium state of a locally constant potential, as a
/// stationary Markov chain built from the Perron data of its transfer matrix.
pub fn markov_equilibrium(phi: &Potential) -> Result<MarkovMeasure> {
    TransferMatrix::new(phi)?.equilibrium()
}

/// `min` and `max` over `I ∈ L(n)` of `μ([I]) / e^{-nP + S_nφ(x_I)}` with `x_I`
/// the canonical point of `[I]`.
pub fn gibbs_ratio_bounds(mu: &MarkovMeasure, phi: &Potential, pressure: f64, n: usize) -> Result<(f64, f64)> {
    let shift = phi.shift();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for w in shift.enumerate_words(n)?.iter() {
        let x = shift.cylinder_point(w)?;
        let r = mu.cylinder_mass(w) / (phi.birkhoff_sum(&x, n) - n as f64 * pressure).exp();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status")]
pub enum CohomologyVerdict {
    NotCohomologous {
        witness: Point,
        period: usize,
        sum_phi: f64,
        sum_psi: f64,
        /// `S_per φ(p) - S_per ψ(p)`.
        discrepancy: f64,
    },
    /// Never a proof: only periods up to `period_bound` were compared.
    PossiblyCohomologous {
        max_discrepancy: f64,
        period_bound: usize,
        orbits_checked: usize,
    },
}

impl CohomologyVerdict {
    pub fn is_witness(&self) -> bool {
        matches!(self, CohomologyVerdict::NotCohomologous { .. })
    }
}

/// Compares Birkhoff sums of `φ` and `ψ` over every periodic orbit up to
/// `period_bound`, by period and then lexicographically.
pub fn livsic_test(phi: &Potential, psi: &Potential, period_bound: usize, coh_tol: f64) -> Result<CohomologyVerdict> {
    if phi.shift().adjacency_rows() != psi.shift().adjacency_rows() {
        return Err(Error::InvalidInput("potentials live on different shifts".into()));
    }
    let orbits = phi.shift().periodic_orbits(period_bound)?;
    let mut max_discrepancy = 0.0f64;
    for orbit in &orbits {
        let p = &orbit.representative;
        let sum_phi = phi.birkhoff_sum(p, orbit.period);
        let sum_psi = psi.birkhoff_sum(p, orbit.period);
        let discrepancy = sum_phi - sum_psi;
        if discrepancy.abs() > coh_tol {
            return Ok(CohomologyVerdict::NotCohomologous {
                witness: p.clone(),
                period: orbit.period,
                sum_phi,
                sum_psi,
                discrepancy,
            });
        }
        max_discrepancy = max_discrepancy.max(discrepancy.abs());
    }
    Ok(CohomologyVerdict::PossiblyCohomologous {
        max_discrepancy,
        period_bound,
        orbits_checked: orbits.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Typical,
    ConformalDetected,
    ReducibleUnique,
    ReducibleTwoErgodic,
    Undetermined,
}

impl Branch {
    pub fn is_determined(self) -> bool {
        self != Branch::Undetermined
    }
}

/// How an equilibrium state is represented.
#[derive(Debug, Clone)]
pub enum StateMeasure {
    /// Exact, all depths on demand.
    Markov(MarkovMeasure),
    /// Normalized singular-value weights at one depth.
    Cylinder(CylinderMeasure),
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumState {
    pub label: String,
    #[serde(skip)]
    pub measure: StateMeasure,
    /// `h_μ`, exact for Markov states.
    pub entropy: Option<f64>,
    /// `λ₊(A, μ)`, exact for Markov states.
    pub exponent: Option<f64>,
}

impl EquilibriumState {
    fn markov(label: &str, measure: MarkovMeasure, exponent: f64) -> Self {
        EquilibriumState {
            label: label.to_string(),
            entropy: Some(measure.entropy()),
            exponent: Some(exponent),
            measure: StateMeasure::Markov(measure),
        }
    }

    /// Cylinder weights at `depth`; Gibbs-weight states are marginalized and
    /// cannot be refined past their own depth.
    pub fn cylinders(&self, depth: usize) -> Result<CylinderMeasure> {
        match &self.measure {
            StateMeasure::Markov(mu) => CylinderMeasure::from_markov(mu, depth),
            StateMeasure::Cylinder(c) if depth <= c.depth => Ok(c.marginal(depth)),
            StateMeasure::Cylinder(c) => Err(Error::InvalidInput(format!(
                "state is only known to depth {}",
                c.depth
            ))),
        }
    }

    pub fn markov_measure(&self) -> Option<&MarkovMeasure> {
        match &self.measure {
            StateMeasure::Markov(mu) => Some(mu),
            StateMeasure::Cylinder(_) => None,
        }
    }
}

/// A line field the cocycle preserves.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineField {
    Constant(Direction),
    /// `L(x)` depends on `x₀` only.
    PerSymbol(Vec<Direction>),
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Certificates {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub typicality: Option<TypicalityOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equal_modulus: Option<EqualModulus>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant_line: Option<LineField>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triangular_pressures: Option<TriangularPressures>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pressure_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cohomology: Option<CohomologyVerdict>,
    /// `max |μ_{log|a|} - μ_{log|c|}|` on cylinders when the potentials look cohomologous.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identical_states_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pressure_bracket: Option<PressureEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub additive_pressure: Option<AdditivePressure>,
    /// `max |log‖Aⁿ(p)‖ - S_n log‖A‖(p)|` over sampled periodic points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicativity_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gibbs: Option<GibbsSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GibbsSummary {
    pub depth: usize,
    pub pressure: f64,
    pub gibbs_constant: f64,
    pub depth_defect: f64,
    pub shift_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationResult {
    pub branch: Branch,
    pub certificates: Certificates,
    pub equilibrium_states: Vec<EquilibriumState>,
    pub diagnostics: Vec<String>,
}

impl ClassificationResult {
    fn new(branch: Branch) -> Self {
        ClassificationResult {
            branch,
            certificates: Certificates::default(),
            equilibrium_states: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    /// Re-derives the branch from the stored certificates.
    pub fn verify(&self, a: Option<&Cocycle>, tol: &Tolerances) -> bool {
        let c = &self.certificates;
        match self.branch {
            Branch::Typical => match (a, c.typicality.as_ref().and_then(|t| t.certificate())) {
                (Some(a), Some(cert)) => cert.recheck(a, tol),
                (None, Some(_)) => true,
                _ => false,
            },
            Branch::ConformalDetected => {
                matches!(c.equal_modulus, Some(EqualModulus::AllEqual { .. })) && self.equilibrium_states.len() == 1
            }
            Branch::ReducibleUnique => {
                let gap = c.pressure_gap.is_some_and(|g| g > tol.pressure_gap_tol);
                let cohomologous = c.pressure_gap.is_some_and(|g| g <= tol.pressure_eq_tol)
                    && matches!(c.cohomology, Some(CohomologyVerdict::PossiblyCohomologous { .. }));
                (gap || cohomologous) && self.equilibrium_states.len() == 1
            }
            Branch::ReducibleTwoErgodic => {
                let equal = c.pressure_gap.is_some_and(|g| g <= tol.pressure_eq_tol);
                let witness = matches!(
                    c.cohomology,
                    Some(CohomologyVerdict::NotCohomologous { discrepancy, .. }) if discrepancy.abs() > tol.coh_tol
                );
                equal && witness && self.equilibrium_states.len() == 2
            }
            Branch::Undetermined => true,
        }
    }
}

/// `λ₊(B, μ) = max(∫log|a| dμ, ∫log|c| dμ)` for triangular `B`.
fn triangular_exponent(b: &TriangularCocycle, mu: &MarkovMeasure) -> f64 {
    mu.integrate(&b.log_abs_a()).max(mu.integrate(&b.log_abs_c()))
}

/// Two Markov measures compared on every cylinder of length `depth`.
fn markov_difference(mu: &MarkovMeasure, nu: &MarkovMeasure, depth: usize) -> Result<f64> {
    Ok(CylinderMeasure::from_markov(mu, depth)?.max_difference(&CylinderMeasure::from_markov(nu, depth)?))
}

/// The trichotomy for `B = [[a, b], [0, c]]`: distinct pressures give one
/// state; equal pressures with a cohomology witness give the two states
/// `μ_{log|a|}`, `μ_{log|c|}` in that order; equal pressures without a witness
/// give one state; gaps between the equality and separation tolerances are
/// undetermined.
pub fn classify_triangular(b: &TriangularCocycle, period_bound: usize, tol: &Tolerances) -> Result<ClassificationResult> {
    let pressures = triangular_pressures(b)?;
    let gap = (pressures.log_a.value - pressures.log_c.value).abs();
    let (log_a, log_c) = (b.log_abs_a(), b.log_abs_c());
    let mut result = ClassificationResult::new(Branch::Undetermined);
    result.certificates.triangular_pressures = Some(pressures);
    result.certificates.pressure_gap = Some(gap);

    if gap > tol.pressure_gap_tol {
        let (label, phi) = if pressures.log_a.value > pressures.log_c.value {
            ("log|a|", &log_a)
        } else {
            ("log|c|", &log_c)
        };
        let mu = markov_equilibrium(phi)?;
        let exponent = triangular_exponent(b, &mu);
        result.branch = Branch::ReducibleUnique;
        result.equilibrium_states.push(EquilibriumState::markov(label, mu, exponent));
        return Ok(result);
    }
    if gap > tol.pressure_eq_tol {
        result.diagnostics.push(format!(
            "pressure gap {gap:.3e} lies between the equality tolerance {:.1e} and the separation tolerance {:.1e}",
            tol.pressure_eq_tol, tol.pressure_gap_tol
        ));
        return Ok(result);
    }

    let verdict = livsic_test(&log_a, &log_c, period_bound, tol.coh_tol)?;
    let mu_a = markov_equilibrium(&log_a)?;
    let mu_c = markov_equilibrium(&log_c)?;
    result.certificates.cohomology = Some(verdict.clone());
    if verdict.is_witness() {
        let (ea, ec) = (triangular_exponent(b, &mu_a), triangular_exponent(b, &mu_c));
        result.branch = Branch::ReducibleTwoErgodic;
        result.equilibrium_states.push(EquilibriumState::markov("log|a|", mu_a, ea));
        result.equilibrium_states.push(EquilibriumState::markov("log|c|", mu_c, ec));
        return Ok(result);
    }
    let depth = (mu_a.memory() + 4).min(10);
    let defect = markov_difference(&mu_a, &mu_c, depth)?;
    result.certificates.identical_states_defect = Some(defect);
    if defect > 1e-8 {
        result.diagnostics.push(format!(
            "no cohomology witness up to period {period_bound}, yet the two candidate states differ by {defect:.3e}"
        ));
        return Ok(result);
    }
    let exponent = triangular_exponent(b, &mu_a);
    result.branch = Branch::ReducibleUnique;
    result.equilibrium_states.push(EquilibriumState::markov("log|a|", mu_a, exponent));
    Ok(result)
}

/// `Q = [L, L⊥]` as columns; orthogonal, so `Q⁻¹ = Qᵀ`.
fn frame(line: &Direction) -> Mat2 {
    let [lx, ly] = line.vector();
    let [px, py] = line.perpendicular().vector();
    Mat2::new(lx, px, ly, py)
}

/// Conjugates `A` to upper triangular form along an invariant line field:
/// `B(x) = Q(σx)ᵀ A(x) Q(x)`.
pub fn straighten(a: &Cocycle, lines: &LineField) -> Result<TriangularCocycle> {
    let shift = a.shift();
    let (lo, hi) = a.window();
    let (new_lo, new_hi, per_symbol) = match lines {
        LineField::Constant(_) => (lo, hi, None),
        LineField::PerSymbol(field) => {
            if field.len() != shift.alphabet_size() {
                return Err(Error::InvalidInput(format!(
                    "{} lines for alphabet of size {}",
                    field.len(),
                    shift.alphabet_size()
                )));
            }
            (lo.min(0), hi.max(1), Some(field))
        }
    };
    let conjugated = LocalTable::from_fn(shift, new_lo, new_hi, |w| {
        let m = *a.table().get(&w[(lo - new_lo) as usize..=(hi - new_lo) as usize]);
        match (per_symbol, lines) {
            (Some(field), _) => {
                let here = frame(&field[w[(-new_lo) as usize] as usize]);
                let next = frame(&field[w[(1 - new_lo) as usize] as usize]);
                next.transpose() * m * here
            }
            (None, LineField::Constant(line)) => {
                let q = frame(line);
                q.transpose() * m * q
            }
            (None, LineField::PerSymbol(_)) => unreachable!("per-symbol fields carry their lines"),
        }
    })?;
    for (w, m) in conjugated.entries() {
        let [[_, _], [lower, _]] = m.rows();
        if lower.abs() > 1e-9 * m.norm() {
            return Err(Error::PreconditionViolated(format!(
                "line field is not invariant on window {}",
                w.key()
            )));
        }
    }
    let a_part = conjugated.map(|_, m| m.rows()[0][0]);
    let b_part = conjugated.map(|_, m| m.rows()[0][1]);
    let c_part = conjugated.map(|_, m| m.rows()[1][1]);
    TriangularCocycle::new(a_part, b_part, c_part)
}

/// With two invariant line fields `L₁`, `L₂`, the action on each line must be
/// cohomologous to the quotient action of the other. Returns the verdicts for
/// `(log|a₁|, log|c₂|)` and `(log|a₂|, log|c₁|)`.
pub fn bundle_consistency(
    a: &Cocycle,
    first: &LineField,
    second: &LineField,
    period_bound: usize,
    tol: &Tolerances,
) -> Result<(CohomologyVerdict, CohomologyVerdict)> {
    let b1 = straighten(a, first)?;
    let b2 = straighten(a, second)?;
    Ok((
        livsic_test(&b1.log_abs_a(), &b2.log_abs_c(), period_bound, tol.coh_tol)?,
        livsic_test(&b2.log_abs_a(), &b1.log_abs_c(), period_bound, tol.coh_tol)?,
    ))
}

/// Search bounds for [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyBounds {
    pub period_bound: usize,
    pub core_bound: usize,
    pub livsic_period_bound: usize,
    pub gibbs_depth: usize,
}

impl Default for ClassifyBounds {
    fn default() -> Self {
        ClassifyBounds {
            period_bound: DEFAULT_PERIOD_BOUND,
            core_bound: DEFAULT_CORE_BOUND,
            livsic_period_bound: DEFAULT_LIVSIC_PERIOD_BOUND,
            gibbs_depth: DEFAULT_GIBBS_DEPTH,
        }
    }
}

/// `max |log‖Aⁿ(p)‖ - S_n log‖A‖(p)|` over periodic `p` and `n ≤ 2·per(p)`.
fn multiplicativity_defect(a: &Cocycle, log_norm: &Potential, period_bound: usize) -> Result<f64> {
    let mut defect = 0.0f64;
    for orbit in a.shift().periodic_orbits(period_bound)? {
        let p = &orbit.representative;
        for n in 1..=2 * orbit.period {
            let direct = a.product(p, n as i64).norm().ln();
            defect = defect.max((direct - log_norm.birkhoff_sum(p, n)).abs());
        }
    }
    Ok(defect)
}

/// Typical, then conformal, then reducible along a supplied or constant
/// invariant line; otherwise undetermined.
pub fn classify(
    a: &Cocycle,
    bounds: &ClassifyBounds,
    lines: Option<&LineField>,
    tol: &Tolerances,
) -> Result<ClassificationResult> {
    let typicality = is_typical(a, bounds.period_bound, bounds.core_bound, tol)?;
    if typicality.certificate().is_some() {
        let bracket = subadditive_pressure(a, bounds.gibbs_depth, None)?;
        let report = gibbs_weights(a, bounds.gibbs_depth, bracket.upper)?;
        let mut result = ClassificationResult::new(Branch::Typical);
        result.certificates.typicality = Some(typicality);
        result.certificates.gibbs = Some(GibbsSummary {
            depth: bounds.gibbs_depth,
            pressure: report.pressure,
            gibbs_constant: report.gibbs_constant,
            depth_defect: report.depth_defect,
            shift_defect: report.shift_defect,
        });
        result.certificates.pressure_bracket = Some(bracket);
        result.equilibrium_states.push(EquilibriumState {
            label: "singular_value".into(),
            measure: StateMeasure::Cylinder(report.measure),
            entropy: None,
            exponent: None,
        });
        return Ok(result);
    }

    let equal_modulus = equal_modulus_scan(a, bounds.period_bound, tol)?;
    if let EqualModulus::AllEqual { .. } = equal_modulus {
        let log_norm = a.table().map(|_, m| m.norm().ln());
        let defect = multiplicativity_defect(a, &log_norm, bounds.period_bound.min(6))?;
        let mut result = ClassificationResult::new(Branch::ConformalDetected);
        result.certificates.typicality = Some(typicality);
        result.certificates.equal_modulus = Some(equal_modulus);
        result.certificates.multiplicativity_defect = Some(defect);
        let phi = if defect <= 1e-9 {
            log_norm
        } else {
            result.diagnostics.push(format!(
                "norms are not multiplicative (defect {defect:.3e}); using half log|det|, which carries the same pressure under a conformal structure"
            ));
            a.table().map(|_, m| 0.5 * m.det().abs().ln())
        };
        result.certificates.additive_pressure = Some(additive_pressure(&phi)?);
        let mu = markov_equilibrium(&phi)?;
        let exponent = mu.integrate(&phi);
        result.equilibrium_states.push(EquilibriumState::markov("conformal", mu, exponent));
        return Ok(result);
    }

    let line = match lines {
        Some(field) => Some(field.clone()),
        None => a.common_invariant_line(tol.twist_tol).map(LineField::Constant),
    };
    if let Some(field) = line {
        let b = straighten(a, &field)?;
        let mut result = classify_triangular(&b, bounds.livsic_period_bound, tol)?;
        result.certificates.typicality = Some(typicality);
        result.certificates.equal_modulus = Some(equal_modulus);
        result.certificates.invariant_line = Some(field);
        return Ok(result);
    }

    let mut result = ClassificationResult::new(Branch::Undetermined);
    if let TypicalityOutcome::Undetermined { pinching_points, .. } = &typicality {
        result.diagnostics.push(format!(
            "no twisting found at {pinching_points} pinching points up to period {} and core length {}",
            bounds.period_bound, bounds.core_bound
        ));
    }
    result.diagnostics.push("no common invariant line; supply a line field to test reducibility".into());
    result.certificates.typicality = Some(typicality);
    result.certificates.equal_modulus = Some(equal_modulus);
    Ok(result)
}

/// Shorthand used by tests and the CLI: the triangular generator in matrix form.
pub fn triangular_matrix(a: f64, b: f64, c: f64) -> Mat2 {
    Mat2::new(a, b, 0.0, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift_space::ShiftSpace;
    use std::f64::consts::FRAC_PI_4;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn two_state() -> TriangularCocycle {
        TriangularCocycle::one_step(&ShiftSpace::full(2), &[2.0, 1.0], &[0.0, 0.0], &[1.0, 2.0]).unwrap()
    }

    #[test]
    fn markov_equilibrium_examples() {
        let s = ShiftSpace::full(2);
        let mu = markov_equilibrium(&Potential::constant(&s, 0.0)).unwrap();
        for w in s.enumerate_words(4).unwrap().iter() {
            assert!((mu.cylinder_mass(w) - 1.0 / 16.0).abs() < 1e-15);
        }
        let phi = Potential::with_depth(&s, 0, |w| [2f64, 1.0][w[0] as usize].ln()).unwrap();
        let mu = markov_equilibrium(&phi).unwrap();
        assert!((mu.cylinder_mass(&[0]) - 2.0 / 3.0).abs() < 1e-14);
        assert!((mu.cylinder_mass(&[0, 1, 0]) - 4.0 / 27.0).abs() < 1e-14);
        // Parry measure: P(1→1) = 1/g, π(1) = g²/(1+g²).
        let g = ShiftSpace::golden_mean();
        let parry = markov_equilibrium(&Potential::constant(&g, 0.0)).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((parry.transition(&[0], &[0]) - 1.0 / golden).abs() < 1e-12);
        assert!((parry.cylinder_mass(&[0]) - golden * golden / (1.0 + golden * golden)).abs() < 1e-12);
    }

    #[test]
    fn markov_equilibrium_is_shift_invariant() {
        let g = ShiftSpace::golden_mean();
        let phi = Potential::with_depth(&g, 1, |w| 0.4 * w[0] as f64 - 0.3 * w[2] as f64 + 0.1 * w[1] as f64).unwrap();
        let mu = markov_equilibrium(&phi).unwrap();
        for n in 1..7 {
            let c = CylinderMeasure::from_markov(&mu, n + 1).unwrap();
            assert!(c.marginal(n).max_difference(&c.suffix_marginal(n)) < 1e-12);
            assert!((c.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn equilibrium_attains_pressure() {
        let g = ShiftSpace::golden_mean();
        let phi = Potential::with_depth(&g, 1, |w| (w[0] as f64 + 2.0 * w[1] as f64 - w[2] as f64).sin()).unwrap();
        let mu = markov_equilibrium(&phi).unwrap();
        let p = additive_pressure(&phi).unwrap().value;
        assert!((mu.entropy() + mu.integrate(&phi) - p).abs() < 1e-10);
    }

    #[test]
    fn livsic_examples() {
        let s = ShiftSpace::full(2);
        let b = two_state();
        match livsic_test(&b.log_abs_a(), &b.log_abs_c(), 12, 1e-9).unwrap() {
            CohomologyVerdict::NotCohomologous { witness, period, discrepancy, .. } => {
                assert_eq!(witness, s.fixed_point(0).unwrap());
                assert_eq!(period, 1);
                assert!((discrepancy - 2f64.ln()).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        let phi = Potential::with_depth(&s, 1, |w| w[0] as f64 * 0.7 - w[2] as f64).unwrap();
        let h = |w: &[Symbol]| [0.3, -1.1][w[0] as usize] + 0.5 * w[1] as f64;
        // ψ(x) = φ(x) + h(σx) - h(x) with h depending on x₀x₁.
        let psi = LocalTable::from_fn(&s, -1, 2, |w| *phi.get(&w[..3]) + h(&w[2..4]) - h(&w[1..3])).unwrap();
        match livsic_test(&phi, &psi, 12, 1e-9).unwrap() {
            CohomologyVerdict::PossiblyCohomologous { max_discrepancy, period_bound, .. } => {
                assert!(max_discrepancy < 1e-10);
                assert_eq!(period_bound, 12);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            livsic_test(&phi, &phi, 5, 1e-9).unwrap(),
            CohomologyVerdict::PossiblyCohomologous { max_discrepancy: 0.0, period_bound: 5, orbits_checked: 14 }
        );
    }

    #[test]
    fn triangular_trichotomy() {
        let s = ShiftSpace::full(2);
        let r = classify_triangular(&two_state(), 12, &tol()).unwrap();
        assert_eq!(r.branch, Branch::ReducibleTwoErgodic);
        assert!(r.verify(None, &tol()));
        let first = r.equilibrium_states[0].markov_measure().unwrap();
        assert!((first.cylinder_mass(&[0]) - 2.0 / 3.0).abs() < 1e-12);
        let r = classify_triangular(&TriangularCocycle::one_step(&s, &[4.0, 4.0], &[0.0, 0.0], &[1.0, 1.0]).unwrap(), 12, &tol()).unwrap();
        assert_eq!(r.branch, Branch::ReducibleUnique);
        assert_eq!(r.equilibrium_states[0].label, "log|a|");
        assert!((r.certificates.pressure_gap.unwrap() - 4f64.ln()).abs() < 1e-12);
        let r = classify_triangular(&TriangularCocycle::one_step(&s, &[3.0, 0.5], &[1.0, -2.0], &[3.0, 0.5]).unwrap(), 12, &tol()).unwrap();
        assert_eq!(r.branch, Branch::ReducibleUnique);
        assert!(r.certificates.identical_states_defect.unwrap() < 1e-12);
        assert!(r.verify(None, &tol()));
        // A gap inside the undetermined band.
        let r = classify_triangular(&TriangularCocycle::one_step(&s, &[2.0, 1.0], &[0.0, 0.0], &[1.0 + 1e-7, 2.0]).unwrap(), 12, &tol()).unwrap();
        assert_eq!(r.branch, Branch::Undetermined);
    }

    #[test]
    fn entropy_plus_exponent_equals_pressure_for_emitted_states() {
        let r = classify_triangular(&two_state(), 12, &tol()).unwrap();
        for state in &r.equilibrium_states {
            let total = state.entropy.unwrap() + state.exponent.unwrap();
            assert!((total - 3f64.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn classify_examples() {
        let s = ShiftSpace::full(2);
        let typical = Cocycle::one_step(&s, &[Mat2::diag(2.0, 0.5), Mat2::rotation(FRAC_PI_4) * Mat2::diag(2.0, 0.5)]).unwrap();
        let r = classify(&typical, &ClassifyBounds { gibbs_depth: 6, ..Default::default() }, None, &tol()).unwrap();
        assert_eq!(r.branch, Branch::Typical);
        assert!(r.verify(Some(&typical), &tol()));

        let conformal = Cocycle::one_step(&s, &[Mat2::rotation(0.4).scale(1.5), Mat2::rotation(2.2).scale(1.5)]).unwrap();
        let r = classify(&conformal, &ClassifyBounds::default(), None, &tol()).unwrap();
        assert_eq!(r.branch, Branch::ConformalDetected);
        assert!((r.certificates.additive_pressure.unwrap().value - (2f64.ln() + 1.5f64.ln())).abs() < 1e-12);

        let two = Cocycle::one_step(&s, &[Mat2::diag(2.0, 1.0), Mat2::diag(1.0, 2.0)]).unwrap();
        let r = classify(&two, &ClassifyBounds::default(), None, &tol()).unwrap();
        assert_eq!(r.branch, Branch::ReducibleTwoErgodic);
        assert_eq!(r.certificates.invariant_line, Some(LineField::Constant(Direction::E1)));
    }

    #[test]
    fn per_symbol_lines() {
        // A(x) maps L(x₀) onto L(x₁): A(i) = R(θ_j - θ_i)-style rotations composed
        // with diagonal stretches in the moving frame.
        let s = ShiftSpace::full(2);
        let angles = [0.3, 1.2];
        let field: Vec<Direction> = angles.iter().map(|&t| Direction::from_angle(t)).collect();
        let a = Cocycle::from_fn(&s, 0, |_| Mat2::IDENTITY).unwrap();
        let table = LocalTable::from_fn(&s, 0, 1, |w| {
            let q = |i: Symbol| frame(&field[i as usize]);
            q(w[1]) * triangular_matrix([2.0, 1.0][w[0] as usize], 0.5, [1.0, 2.0][w[0] as usize]) * q(w[0]).transpose()
        })
        .unwrap();
        let moving = Cocycle::new(table).unwrap();
        // A(0011) is parabolic; rounding must not manufacture a pinching gap there.
        let parabolic = s.periodic_point(&[0, 0, 1, 1]).unwrap();
        assert_eq!(
            crate::typicality::pinching_check(&moving, &parabolic, &tol()).unwrap().unwrap_err(),
            crate::typicality::NotPinching::GapBelowTolerance
        );
        let r = classify(&moving, &ClassifyBounds::default(), Some(&LineField::PerSymbol(field.clone())), &tol()).unwrap();
        assert_eq!(r.branch, Branch::ReducibleTwoErgodic);
        assert!(matches!(straighten(&a, &LineField::PerSymbol(field)), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn two_bundles_are_consistent() {
        let s = ShiftSpace::full(2);
        let two = Cocycle::one_step(&s, &[Mat2::diag(2.0, 1.0), Mat2::diag(1.0, 2.0)]).unwrap();
        let (one, other) = bundle_consistency(
            &two,
            &LineField::Constant(Direction::E1),
            &LineField::Constant(Direction::E2),
            10,
            &tol(),
        )
        .unwrap();
        assert!(!one.is_witness() && !other.is_witness());
    }

    #[test]
    fn gibbs_weight_examples() {
        let s = ShiftSpace::full(2);
        let r = gibbs_weights(&Cocycle::identity(&s), 5, 2f64.ln()).unwrap();
        assert!(r.measure.weights.iter().all(|w| (w - 1.0 / 32.0).abs() < 1e-15));
        assert!((r.gibbs_constant - 1.0).abs() < 1e-12);
        // Raw weight max(2^{#1}, 2^{#2}) / 3ⁿ at n = 4, normalized by Σ = 16 + 4·8 + 6·4 + 4·8 + 16 = 120.
        let two = Cocycle::one_step(&s, &[Mat2::diag(2.0, 1.0), Mat2::diag(1.0, 2.0)]).unwrap();
        let r = gibbs_weights(&two, 4, 3f64.ln()).unwrap();
        assert!((r.measure.get(&[0, 0, 0, 0]) - 16.0 / 120.0).abs() < 1e-15);
        assert!((r.measure.get(&[0, 1, 0, 1]) - 4.0 / 120.0).abs() < 1e-15);
        // Prefix 0011 at depth 5 carries (8 + 8)/384 but 4/120 at depth 4.
        let r = gibbs_weights(&two, 5, 3f64.ln()).unwrap();
        assert!((r.depth_defect - (16.0 / 384.0 - 4.0 / 120.0)).abs() < 1e-15);
    }
}
