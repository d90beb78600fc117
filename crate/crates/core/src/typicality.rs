//! Pinching and twisting certificates, irreducibility witnesses and
//! invariant-line diagnostics.

use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::holonomy::{holonomy_loop, stable_holonomy, unstable_holonomy};
use crate::linalg2::{angular_distance, eigen2, Direction, EigenClass, Mat2};
use crate::shift_space::Point;
use crate::Tolerances;

pub const DEFAULT_PERIOD_BOUND: usize = 6;
pub const DEFAULT_CORE_BOUND: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NotPinching {
    RealEqualModulus,
    ComplexPair,
    GapBelowTolerance,
}

/// Eigendata of `A^{per}(p)` at a pinching periodic point.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicEigen {
    pub period: usize,
    pub matrix: Mat2,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub v_plus: Direction,
    pub v_minus: Direction,
    /// `(1/per) log|λ±|`.
    pub exponents: (f64, f64),
}

pub fn periodic_matrix(a: &Cocycle, p: &Point) -> Result<(usize, Mat2)> {
    let period = p.period().ok_or(Error::NotPeriodic)?;
    Ok((period, a.product(p, period as i64)))
}

/// Whether `A^{per}(p)` has eigenvalue moduli separated beyond both the gap
/// tolerance and the rounding noise of the discriminant. A parabolic product
/// otherwise splits into a spurious pair `λ(1 ± O(√ε))`.
fn gap_resolved(m: &Mat2, period: usize, gap_tol: f64) -> bool {
    let e = eigen2(m);
    if e.class != EigenClass::RealDistinctModulus || e.relative_gap() <= gap_tol {
        return false;
    }
    let half = 0.5 * m.trace();
    let disc = half * half - m.det();
    let noise = 4.0 * (period as f64 + 2.0) * f64::EPSILON * m.frobenius().powi(2);
    disc > noise
}

pub fn pinching_check(a: &Cocycle, p: &Point, tol: &Tolerances) -> Result<std::result::Result<PeriodicEigen, NotPinching>> {
    let (period, matrix) = periodic_matrix(a, p)?;
    let e = eigen2(&matrix);
    let outcome = match e.class {
        EigenClass::ComplexPair => Err(NotPinching::ComplexPair),
        EigenClass::RealEqualModulus => Err(NotPinching::RealEqualModulus),
        EigenClass::RealDistinctModulus if !gap_resolved(&matrix, period, tol.gap_tol) => {
            Err(NotPinching::GapBelowTolerance)
        }
        EigenClass::RealDistinctModulus => {
            let [v_plus, v_minus] = e.directions.expect("real distinct eigenvalues have directions");
            let per = period as f64;
            Ok(PeriodicEigen {
                period,
                matrix,
                lambda_plus: e.re[0],
                lambda_minus: e.re[1],
                v_plus,
                v_minus,
                exponents: (e.moduli[0].ln() / per, e.moduli[1].ln() / per),
            })
        }
    };
    Ok(outcome)
}

/// `ρ(ψ(L), L)`.
fn twist(psi: &Mat2, line: &Direction) -> f64 {
    angular_distance(&line.image(psi), line)
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status")]
pub enum Twisting {
    Found {
        z_plus: Point,
        z_minus: Point,
        margin_plus: f64,
        margin_minus: f64,
    },
    NotFound {
        core_bound: usize,
    },
}

/// First homoclinic points (core length, then word, then start) whose loops
/// move `v₊` and `v₋` by more than the twist tolerance.
pub fn twisting_search(
    a: &Cocycle,
    p: &Point,
    eig: &PeriodicEigen,
    core_bound: usize,
    tol: &Tolerances,
) -> Result<Twisting> {
    let candidates = a.shift().homoclinic_points(p, core_bound)?;
    let margins: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|z| {
            let psi = holonomy_loop(a, p, z)?;
            Ok((twist(&psi, &eig.v_plus), twist(&psi, &eig.v_minus)))
        })
        .collect::<Result<_>>()?;
    let plus = margins.iter().position(|m| m.0 > tol.twist_tol);
    let minus = margins.iter().position(|m| m.1 > tol.twist_tol);
    Ok(match (plus, minus) {
        (Some(i), Some(j)) => Twisting::Found {
            z_plus: candidates[i].clone(),
            z_minus: candidates[j].clone(),
            margin_plus: margins[i].0,
            margin_minus: margins[j].1,
        },
        _ => Twisting::NotFound { core_bound },
    })
}

/// Re-checkable evidence that a cocycle is typical.
#[derive(Debug, Clone, Serialize)]
pub struct TypicalityCertificate {
    pub p: Point,
    pub period: usize,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub v_plus: Direction,
    pub v_minus: Direction,
    pub z_plus: Point,
    pub z_minus: Point,
    pub twist_margins: [f64; 2],
    /// Holonomies of locally constant cocycles are finite products.
    pub exact: bool,
}

impl TypicalityCertificate {
    /// Recomputes eigendata and loops from the stored points.
    pub fn recheck(&self, a: &Cocycle, tol: &Tolerances) -> bool {
        let Ok(Ok(eig)) = pinching_check(a, &self.p, tol) else {
            return false;
        };
        let loops = holonomy_loop(a, &self.p, &self.z_plus).and_then(|plus| {
            holonomy_loop(a, &self.p, &self.z_minus).map(|minus| (plus, minus))
        });
        let Ok((psi_plus, psi_minus)) = loops else {
            return false;
        };
        twist(&psi_plus, &eig.v_plus) > tol.twist_tol && twist(&psi_minus, &eig.v_minus) > tol.twist_tol
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status")]
pub enum TypicalityOutcome {
    Certified(TypicalityCertificate),
    Undetermined {
        period_bound: usize,
        core_bound: usize,
        pinching_points: usize,
    },
}

impl TypicalityOutcome {
    pub fn certificate(&self) -> Option<&TypicalityCertificate> {
        match self {
            TypicalityOutcome::Certified(c) => Some(c),
            TypicalityOutcome::Undetermined { .. } => None,
        }
    }
}

/// Searches periodic points by least period, then lexicographically, for a
/// pinching point with twisting homoclinic loops.
pub fn is_typical(a: &Cocycle, period_bound: usize, core_bound: usize, tol: &Tolerances) -> Result<TypicalityOutcome> {
    let mut pinching_points = 0;
    for orbit in a.shift().periodic_orbits(period_bound)? {
        let p = &orbit.representative;
        let Ok(eig) = pinching_check(a, p, tol)? else {
            continue;
        };
        pinching_points += 1;
        if let Twisting::Found {
            z_plus,
            z_minus,
            margin_plus,
            margin_minus,
        } = twisting_search(a, p, &eig, core_bound, tol)?
        {
            return Ok(TypicalityOutcome::Certified(TypicalityCertificate {
                p: p.clone(),
                period: eig.period,
                lambda_plus: eig.lambda_plus,
                lambda_minus: eig.lambda_minus,
                v_plus: eig.v_plus,
                v_minus: eig.v_minus,
                z_plus,
                z_minus,
                twist_margins: [margin_plus, margin_minus],
                exact: true,
            }));
        }
    }
    Ok(TypicalityOutcome::Undetermined {
        period_bound,
        core_bound,
        pinching_points,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status")]
pub enum Witness {
    /// `A^{per}(p)` itself moves `L`.
    PeriodicMatrix { margin: f64 },
    /// A homoclinic loop moves `L`.
    Homoclinic { z: Point, margin: f64 },
    NoWitness { core_bound: usize },
}

/// Evidence that no invariant line bundle passes through `L` at `p`.
pub fn irreducibility_witness(
    a: &Cocycle,
    p: &Point,
    line: &Direction,
    core_bound: usize,
    tol: &Tolerances,
) -> Result<Witness> {
    let (_, matrix) = periodic_matrix(a, p)?;
    let margin = twist(&matrix, line);
    if margin > tol.twist_tol {
        return Ok(Witness::PeriodicMatrix { margin });
    }
    for z in a.shift().homoclinic_points(p, core_bound)? {
        let margin = twist(&holonomy_loop(a, p, &z)?, line);
        if margin > tol.twist_tol {
            return Ok(Witness::Homoclinic { z, margin });
        }
    }
    Ok(Witness::NoWitness { core_bound })
}

#[derive(Debug, Clone, Serialize)]
pub struct BundleSample {
    pub lines: Vec<(Point, Direction)>,
    /// Max `ρ(H^s_{p,z}L, H^u_{p,z}L)` over sampled `z`.
    pub holonomy_mismatch: f64,
    /// Max mismatch between `L_w` and its propagation from `z1`, `z2` for
    /// `w = [z1, z2]`.
    pub bracket_mismatch: f64,
    pub bracket_pairs: usize,
}

impl BundleSample {
    pub fn inconsistency(&self) -> f64 {
        self.holonomy_mismatch.max(self.bracket_mismatch)
    }
}

/// Propagates `L` from `p` to its homoclinic points along both holonomies and
/// measures how far the two propagations and bracket transports disagree.
pub fn bundle_propagation(
    a: &Cocycle,
    p: &Point,
    line: &Direction,
    core_bound: usize,
    tol: &Tolerances,
) -> Result<BundleSample> {
    if let w @ (Witness::PeriodicMatrix { .. } | Witness::Homoclinic { .. }) =
        irreducibility_witness(a, p, line, core_bound, tol)?
    {
        return Err(Error::PreconditionViolated(format!(
            "a twisting witness exists: {}",
            serde_json::to_string(&w).unwrap_or_default()
        )));
    }
    let shift = a.shift();
    let points = shift.homoclinic_points(p, core_bound)?;
    let mut lines = vec![(p.clone(), *line)];
    let mut holonomy_mismatch = 0.0f64;
    for z in &points {
        let via_s = line.image(&stable_holonomy(a, p, z)?.matrix);
        let via_u = line.image(&unstable_holonomy(a, p, z)?.matrix);
        holonomy_mismatch = holonomy_mismatch.max(angular_distance(&via_s, &via_u));
        lines.push((z.clone(), via_s));
    }
    let sample = &lines[..lines.len().min(40)];
    let mut bracket_mismatch = 0.0f64;
    let mut bracket_pairs = 0;
    for (z1, l1) in sample {
        for (z2, l2) in sample {
            if z1.at(0) != z2.at(0) {
                continue;
            }
            let w = shift.bracket(z1, z2)?;
            let direct = if &w == p {
                *line
            } else {
                line.image(&stable_holonomy(a, p, &w)?.matrix)
            };
            let from_left = l1.image(&unstable_holonomy(a, z1, &w)?.matrix);
            let from_right = l2.image(&stable_holonomy(a, z2, &w)?.matrix);
            bracket_mismatch = bracket_mismatch
                .max(angular_distance(&direct, &from_left))
                .max(angular_distance(&direct, &from_right));
            bracket_pairs += 1;
        }
    }
    Ok(BundleSample {
        lines,
        holonomy_mismatch,
        bracket_mismatch,
        bracket_pairs,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status")]
pub enum EqualModulus {
    AllEqual { orbits_checked: usize, period_bound: usize },
    Counterexample { p: Point, moduli: [f64; 2] },
}

/// Checks `|λ₊(A,p)| = |λ₋(A,p)|` on every periodic orbit up to `period_bound`.
pub fn equal_modulus_scan(a: &Cocycle, period_bound: usize, tol: &Tolerances) -> Result<EqualModulus> {
    let orbits = a.shift().periodic_orbits(period_bound)?;
    for orbit in &orbits {
        let (period, m) = periodic_matrix(a, &orbit.representative)?;
        if gap_resolved(&m, period, tol.gap_tol) {
            return Ok(EqualModulus::Counterexample {
                p: orbit.representative.clone(),
                moduli: eigen2(&m).moduli,
            });
        }
    }
    Ok(EqualModulus::AllEqual {
        orbits_checked: orbits.len(),
        period_bound,
    })
}

fn is_scalar(m: &Mat2) -> bool {
    let scale = m.max_abs();
    m.b.abs() <= 1e-14 * scale && m.c.abs() <= 1e-14 * scale && (m.a - m.d).abs() <= 1e-14 * scale
}

/// A line mapped to itself by every table entry, within `tol` radians.
///
/// Candidates are the real eigendirections of the first non-scalar entry,
/// tried in order of their angle to `e₁`; if every entry is scalar, `e₁` is
/// returned.
pub fn common_invariant_line(a: &Cocycle, tol: f64) -> Option<Direction> {
    let mats: Vec<Mat2> = a.entries().map(|(_, m)| *m).collect();
    let Some(pivot) = mats.iter().find(|m| !is_scalar(m)) else {
        return Some(Direction::E1);
    };
    let mut candidates: Vec<Direction> = eigen2(pivot).directions?.to_vec();
    candidates.sort_by(|u, v| {
        let (du, dv) = (angular_distance(u, &Direction::E1), angular_distance(v, &Direction::E1));
        du.total_cmp(&dv).then(u.angle().total_cmp(&v.angle()))
    });
    candidates
        .into_iter()
        .find(|line| mats.iter().all(|m| twist(m, line) <= tol))
}
