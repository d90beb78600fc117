//! Closed-form 2×2 real linear algebra and the projective line.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2×2 real matrix `[[a, b], [c, d]]`, serialized row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Self {
        Mat2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }

    pub const fn diag(x: f64, y: f64) -> Self {
        Mat2::new(x, 0.0, 0.0, y)
    }

    pub fn scalar(s: f64) -> Self {
        Mat2::diag(s, s)
    }

    /// Counterclockwise rotation by `angle` radians.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    pub fn is_invertible(&self, det_tol: f64) -> bool {
        self.det().abs() > det_tol
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular { det: det.abs() });
        }
        Ok(Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    /// Inverse for matrices already known to be invertible.
    pub fn inv(&self) -> Self {
        let det = self.det();
        Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn scale(&self, s: f64) -> Self {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn frobenius(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Largest entrywise difference relative to the larger operand.
    pub fn rel_diff(&self, other: &Mat2) -> f64 {
        let scale = self.max_abs().max(other.max_abs()).max(f64::MIN_POSITIVE);
        (*self - *other).max_abs() / scale
    }

    /// Operator norm (largest singular value).
    pub fn norm(&self) -> f64 {
        singular_values(self).0
    }

    /// `‖M‖·‖M⁻¹‖ = s1/s2`.
    pub fn condition_number(&self) -> f64 {
        let (s1, s2) = singular_values(self);
        s1 / s2
    }

    pub fn svd(&self) -> Result<SvdData> {
        svd2(self, 1e-12)
    }

    pub fn eigen(&self) -> EigenData {
        eigen2(self)
    }

    /// Spectral radius `max |λ|`.
    pub fn spectral_radius(&self) -> f64 {
        let e = eigen2(self);
        e.moduli[0]
    }
}

impl Default for Mat2 {
    fn default() -> Self {
        Mat2::IDENTITY
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl Serialize for Mat2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        <[[f64; 2]; 2]>::deserialize(d).map(Mat2::from_rows)
    }
}

/// `(s1, s2)` from the eigenvalues of `MᵀM`.
fn singular_values(m: &Mat2) -> (f64, f64) {
    let p = m.a * m.a + m.c * m.c;
    let s = m.b * m.b + m.d * m.d;
    let r = m.a * m.b + m.c * m.d;
    let mean = 0.5 * (p + s);
    let rad = (0.5 * (p - s)).hypot(r);
    let s1 = (mean + rad).sqrt();
    let det = m.det().abs();
    let s2 = if s1 > 0.0 { det / s1 } else { 0.0 };
    (s1, s2)
}

/// Operator norm of `m`.
pub fn operator_norm(m: &Mat2) -> f64 {
    m.norm()
}

/// A line through the origin, stored as a unit vector with a canonical sign
/// (first nonzero coordinate positive).
#[derive(Debug, Clone, Copy)]
pub struct Direction {
    x: f64,
    y: f64,
}

impl Direction {
    pub const E1: Direction = Direction { x: 1.0, y: 0.0 };
    pub const E2: Direction = Direction { x: 0.0, y: 1.0 };

    /// Normalizes `(x, y)`; `None` for the zero vector.
    pub fn new(x: f64, y: f64) -> Option<Self> {
        let n = x.hypot(y);
        if !(n > 0.0) || !n.is_finite() {
            return None;
        }
        let (mut x, mut y) = (x / n, y / n);
        if x < 0.0 || (x == 0.0 && y < 0.0) {
            x = -x;
            y = -y;
        }
        Some(Direction { x: x + 0.0, y: y + 0.0 })
    }

    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Direction::new(c, s).expect("unit vector")
    }

    pub fn vector(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// Angle in `(-π/2, π/2]`.
    pub fn angle(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn perpendicular(&self) -> Direction {
        Direction::new(-self.y, self.x).expect("unit vector")
    }

    /// Image line `M·L`.
    pub fn image(&self, m: &Mat2) -> Direction {
        let [x, y] = m.apply([self.x, self.y]);
        Direction::new(x, y).expect("invertible matrix maps lines to lines")
    }

    pub fn distance(&self, other: &Direction) -> f64 {
        angular_distance(self, other)
    }
}

impl PartialEq for Direction {
    fn eq(&self, other: &Self) -> bool {
        angular_distance(self, other) <= 1e-12
    }
}

impl Serialize for Direction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [x, y] = <[f64; 2]>::deserialize(d)?;
        Direction::new(x, y).ok_or_else(|| serde::de::Error::custom("direction must be a nonzero vector"))
    }
}

/// Acute angle between two lines, in `[0, π/2]`.
pub fn angular_distance(u: &Direction, w: &Direction) -> f64 {
    let cross = u.x * w.y - u.y * w.x;
    let dot = u.x * w.x + u.y * w.y;
    cross.abs().atan2(dot.abs())
}

/// Singular value data: `M v = s1 u`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SvdData {
    pub s1: f64,
    pub s2: f64,
    /// Top left singular direction `u(M)`.
    pub u: Direction,
    /// Top right singular direction `v(M)`.
    pub v: Direction,
    /// `s1 = s2` to working precision, so `u` and `v` are not unique.
    pub conformal: bool,
}

pub fn svd2(m: &Mat2, det_tol: f64) -> Result<SvdData> {
    let det = m.det();
    if !(det.abs() > det_tol) {
        return Err(Error::Singular { det: det.abs() });
    }
    let p = m.a * m.a + m.c * m.c;
    let s = m.b * m.b + m.d * m.d;
    let r = m.a * m.b + m.c * m.d;
    let (s1, s2) = singular_values(m);
    let conformal = (s1 - s2) <= 1e-12 * s1;
    let v = if conformal {
        Direction::E1
    } else {
        // Top eigenvector of MᵀM.
        Direction::from_angle(0.5 * (2.0 * r).atan2(p - s))
    };
    let u = v.image(m);
    Ok(SvdData {
        s1,
        s2,
        u,
        v,
        conformal,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenClass {
    RealDistinctModulus,
    RealEqualModulus,
    ComplexPair,
}

/// Eigenvalues sorted by decreasing modulus.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigenData {
    pub class: EigenClass,
    /// Real parts; for a complex pair both entries hold the common real part.
    pub re: [f64; 2],
    /// Imaginary parts; zero in the real cases.
    pub im: [f64; 2],
    pub moduli: [f64; 2],
    /// Eigendirections in the real case, matched to `re`.
    pub directions: Option<[Direction; 2]>,
}

impl EigenData {
    /// `|λ₊| / |λ₋| - 1`.
    pub fn relative_gap(&self) -> f64 {
        self.moduli[0] / self.moduli[1] - 1.0
    }
}

fn eigendirection(m: &Mat2, lambda: f64) -> Option<Direction> {
    // Rows of M - λI are orthogonal to the eigenvector; use the larger one.
    let r1 = (m.b, lambda - m.a);
    let r2 = (lambda - m.d, m.c);
    let pick = if r1.0.hypot(r1.1) >= r2.0.hypot(r2.1) { r1 } else { r2 };
    Direction::new(pick.0, pick.1)
}

pub fn eigen2(m: &Mat2) -> EigenData {
    let tr = m.trace();
    let det = m.det();
    let half = 0.5 * tr;
    let disc = half * half - det;
    if disc < 0.0 {
        let im = (-disc).sqrt();
        let modulus = half.hypot(im);
        return EigenData {
            class: EigenClass::ComplexPair,
            re: [half, half],
            im: [im, -im],
            moduli: [modulus, modulus],
            directions: None,
        };
    }
    let root = disc.sqrt();
    // Stable quadratic formula: avoid cancellation in the smaller root.
    let big = if half >= 0.0 { half + root } else { half - root };
    let small = if big != 0.0 { det / big } else { 0.0 };
    let (l1, l2) = if big.abs() >= small.abs() { (big, small) } else { (small, big) };
    let class = if l1.abs() == l2.abs() {
        EigenClass::RealEqualModulus
    } else {
        EigenClass::RealDistinctModulus
    };
    let directions = if m.b == 0.0 && m.c == 0.0 {
        // Diagonal: coordinate axes, even for a repeated eigenvalue.
        if m.a.abs() >= m.d.abs() {
            Some([Direction::E1, Direction::E2])
        } else {
            Some([Direction::E2, Direction::E1])
        }
    } else {
        match (eigendirection(m, l1), eigendirection(m, l2)) {
            (Some(d1), Some(d2)) => Some([d1, d2]),
            _ => None,
        }
    };
    EigenData {
        class,
        re: [l1, l2],
        im: [0.0, 0.0],
        moduli: [l1.abs(), l2.abs()],
        directions,
    }
}

/// `(gap, ratio)` with `gap = π/2 - ρ(v(A), u(B))` and
/// `ratio = ‖AB‖ / (‖A‖‖B‖)`; in dimension two `ratio ≥ sin(gap)`.
pub fn transversality_product_bound(a: &Mat2, b: &Mat2) -> Result<(f64, f64)> {
    let sa = svd2(a, 1e-12)?;
    let sb = svd2(b, 1e-12)?;
    let gap = FRAC_PI_2 - angular_distance(&sa.v, &sb.u);
    let ratio = (*a * *b).norm() / (sa.s1 * sb.s1);
    Ok((gap, ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()))
    }

    #[test]
    fn norm_examples() {
        assert!(close(Mat2::IDENTITY.norm(), 1.0, 1e-15));
        assert!(close(Mat2::diag(2.0, 1.0).norm(), 2.0, 1e-15));
        assert!(close(Mat2::new(0.0, 2.0, 1.0, 0.0).norm(), 2.0, 1e-15));
    }

    #[test]
    fn svd_examples() {
        let s = svd2(&Mat2::diag(3.0, 1.0), 1e-12).unwrap();
        assert!(close(s.s1, 3.0, 1e-15) && close(s.s2, 1.0, 1e-15));
        assert!(angular_distance(&s.v, &Direction::E1) < 1e-15);
        assert!(angular_distance(&s.u, &Direction::E1) < 1e-15);
        let r = svd2(&Mat2::rotation(FRAC_PI_4), 1e-12).unwrap();
        assert!(r.conformal);
        let m = svd2(&Mat2::new(2.0, 1.0, 0.0, 1.0), 1e-12).unwrap();
        assert!(close(m.s1 * m.s2, 2.0, 1e-12));
        assert!(close(m.s1 * m.s1 + m.s2 * m.s2, 6.0, 1e-12));
        assert!(matches!(svd2(&Mat2::new(1.0, 2.0, 2.0, 4.0), 1e-12), Err(Error::Singular { .. })));
    }

    #[test]
    fn eigen_examples() {
        let e = eigen2(&Mat2::diag(2.0, 0.5));
        assert_eq!(e.class, EigenClass::RealDistinctModulus);
        assert_eq!(e.re, [2.0, 0.5]);
        let [v1, v2] = e.directions.unwrap();
        assert_eq!(v1, Direction::E1);
        assert_eq!(v2, Direction::E2);
        let r = eigen2(&Mat2::rotation(FRAC_PI_3));
        assert_eq!(r.class, EigenClass::ComplexPair);
        assert!(close(r.moduli[0], 1.0, 1e-15));
        let j = eigen2(&Mat2::new(1.0, 1.0, 0.0, 1.0));
        assert_eq!(j.class, EigenClass::RealEqualModulus);
        assert_eq!(j.directions.unwrap()[0], Direction::E1);
    }

    #[test]
    fn angular_examples() {
        assert!(close(angular_distance(&Direction::E1, &Direction::E2), FRAC_PI_2, 1e-15));
        let u = Direction::new(0.3, -0.7).unwrap();
        let minus_u = Direction::new(-0.3, 0.7).unwrap();
        assert_eq!(angular_distance(&u, &minus_u), 0.0);
        let diag = Direction::new(1.0, 1.0).unwrap();
        assert!(close(angular_distance(&Direction::E1, &diag), FRAC_PI_4, 1e-15));
    }

    #[test]
    fn transversality_examples() {
        let a = Mat2::diag(2.0, 1.0);
        let (gap, ratio) = transversality_product_bound(&a, &a).unwrap();
        assert!(close(gap, FRAC_PI_2, 1e-15) && close(ratio, 1.0, 1e-15));
        let b = Mat2::rotation(FRAC_PI_2) * a;
        let (gap, ratio) = transversality_product_bound(&a, &b).unwrap();
        assert!(gap.abs() < 1e-12);
        assert!(close(ratio, 0.5, 1e-12));
    }

    fn mat() -> impl Strategy<Value = Mat2> {
        (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)
            .prop_map(|(a, b, c, d)| Mat2::new(a, b, c, d))
            .prop_filter("invertible", |m| m.det().abs() > 1e-3)
    }

    proptest! {
        #[test]
        fn svd_reconstructs(m in mat()) {
            let s = svd2(&m, 1e-12).unwrap();
            let [ux, uy] = s.u.vector();
            let [vx, vy] = s.v.vector();
            // M = s1 u vᵀ + s2 u⊥ v⊥ᵀ up to the sign of the second term.
            let mv = m.apply(s.v.vector());
            let sign = if mv[0] * ux + mv[1] * uy >= 0.0 { 1.0 } else { -1.0 };
            let top = Mat2::new(ux * vx, ux * vy, uy * vx, uy * vy).scale(sign * s.s1);
            let rest = m - top;
            prop_assert!((rest.norm() - s.s2).abs() <= 1e-9 * m.norm());
            let image = m.apply(s.v.vector());
            prop_assert!((image[0].hypot(image[1]) - s.s1).abs() <= 1e-9 * s.s1);
        }

        #[test]
        fn submultiplicative(m in mat(), n in mat()) {
            prop_assert!((m * n).norm() <= m.norm() * n.norm() * (1.0 + 1e-12));
        }

        #[test]
        fn eigen_conjugation_invariant(m in mat(), c in mat()) {
            prop_assume!(c.condition_number() < 20.0);
            let conj = c * m * c.inv();
            let e1 = eigen2(&m);
            let e2 = eigen2(&conj);
            for k in 0..2 {
                prop_assert!((e1.moduli[k] - e2.moduli[k]).abs() <= 1e-8 * (1.0 + e1.moduli[0]));
            }
        }

        #[test]
        fn angular_triangle(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64) {
            let (u, v, w) = (Direction::from_angle(a), Direction::from_angle(b), Direction::from_angle(c));
            prop_assert!(angular_distance(&u, &w) <= angular_distance(&u, &v) + angular_distance(&v, &w) + 1e-12);
            prop_assert!((angular_distance(&u, &v) - angular_distance(&v, &u)).abs() < 1e-15);
        }

        #[test]
        fn transversality_bound_holds(a in mat(), b in mat()) {
            let (gap, ratio) = transversality_product_bound(&a, &b).unwrap();
            prop_assert!(ratio >= gap.sin() - 1e-9);
        }
    }
}
