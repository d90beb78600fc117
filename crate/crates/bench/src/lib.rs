//! Fixture cocycles and potentials shared by the benchmarks.

use std::f64::consts::FRAC_PI_4;

use gl2_thermo::{Cocycle, Mat2, Potential, ShiftSpace};

/// `diag(2, 1/2)` and its rotation by π/4 on the full 2-shift.
pub fn typical() -> Cocycle {
    let s = ShiftSpace::full(2);
    Cocycle::one_step(&s, &[Mat2::diag(2.0, 0.5), Mat2::rotation(FRAC_PI_4) * Mat2::diag(2.0, 0.5)])
        .expect("invertible generators")
}

/// `diag(2, 1)` and `diag(1, 2)` on the full 2-shift.
pub fn two_diagonal() -> Cocycle {
    let s = ShiftSpace::full(2);
    Cocycle::one_step(&s, &[Mat2::diag(2.0, 1.0), Mat2::diag(1.0, 2.0)]).expect("invertible generators")
}

/// A cocycle reading three symbols on the golden-mean shift.
pub fn golden_windowed() -> Cocycle {
    Cocycle::from_fn(&ShiftSpace::golden_mean(), 1, |w| {
        Mat2::rotation(0.4 * w[0] as f64 - 0.9 * w[2] as f64) * Mat2::new(1.5 + w[1] as f64, 0.3, -0.2, 0.8)
    })
    .expect("invertible generators")
}

/// A potential reading three symbols on the full 3-shift.
pub fn windowed_potential() -> Potential {
    Potential::from_fn(&ShiftSpace::full(3), 0, 2, |w| {
        (w[0] as f64 + 2.0 * w[1] as f64 - 0.5 * w[2] as f64).sin()
    })
    .expect("admissible windows")
}
