//! Canonical stable and unstable holonomies of locally constant cocycles.
//!
//! For a cocycle reading `x_lo ..= x_hi`, the sequence `Aⁿ(y)⁻¹Aⁿ(x)` is
//! eventually constant once the windows of `σⁿx` and `σⁿy` coincide, so the
//! limits are finite products. The synchronization time is read off the
//! point descriptions, never from a metric threshold.

use rand::Rng;
use serde::Serialize;

use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::linalg2::{Direction, Mat2};
use crate::shift_space::{Point, ShiftSpace};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HolonomyResult {
    #[serde(rename = "H")]
    pub matrix: Mat2,
    /// Number of cocycle steps in the finite product that realizes the limit.
    pub truncation_n: usize,
    pub error_bound: f64,
    pub exact: bool,
}

impl HolonomyResult {
    fn exact(matrix: Mat2, truncation_n: usize) -> Self {
        HolonomyResult {
            matrix,
            truncation_n,
            error_bound: 0.0,
            exact: true,
        }
    }
}

/// Steps after which `Aⁿ(y)⁻¹Aⁿ(x)` stops changing, for `y ∈ W^s(x)`.
pub fn stable_steps(a: &Cocycle, x: &Point, y: &Point) -> Result<usize> {
    let sync = x.stable_sync(y).ok_or(Error::NotOnStableSet)?;
    if sync == i64::MIN {
        return Ok(0);
    }
    let (lo, _) = a.window();
    Ok((sync - lo).max(0) as usize)
}

/// Steps after which `A^{-n}(y)⁻¹A^{-n}(x)` stops changing, for `y ∈ W^u(x)`.
pub fn unstable_steps(a: &Cocycle, x: &Point, y: &Point) -> Result<usize> {
    let sync = x.unstable_sync(y).ok_or(Error::NotOnUnstableSet)?;
    if sync == i64::MAX {
        return Ok(0);
    }
    let (_, hi) = a.window();
    Ok((hi - sync - 1).max(0) as usize)
}

/// `H^s_{x,y} = lim_{n→∞} Aⁿ(y)⁻¹Aⁿ(x)`.
pub fn stable_holonomy(a: &Cocycle, x: &Point, y: &Point) -> Result<HolonomyResult> {
    let m = stable_steps(a, x, y)?;
    let n = m as i64;
    let h = a.product(y, n).inv() * a.product(x, n);
    Ok(HolonomyResult::exact(h, m))
}

/// `H^u_{x,y} = lim_{n→-∞} Aⁿ(y)⁻¹Aⁿ(x) = Aᵐ(σ^{-m}y)·Aᵐ(σ^{-m}x)⁻¹`.
pub fn unstable_holonomy(a: &Cocycle, x: &Point, y: &Point) -> Result<HolonomyResult> {
    let m = unstable_steps(a, x, y)?;
    let n = m as i64;
    let h = a.product(&y.shift(-n), n) * a.product(x, -n);
    Ok(HolonomyResult::exact(h, m))
}

/// `ψ_p^z = H^s_{z,p} · H^u_{p,z}` for `z` homoclinic to the periodic `p`.
pub fn holonomy_loop(a: &Cocycle, p: &Point, z: &Point) -> Result<Mat2> {
    if !p.is_periodic() {
        return Err(Error::NotPeriodic);
    }
    if z == p || !z.on_stable_set(p) || !z.on_unstable_set(p) {
        return Err(Error::NotHomoclinic);
    }
    let hs = stable_holonomy(a, z, p)?;
    let hu = unstable_holonomy(a, p, z)?;
    Ok(hs.matrix * hu.matrix)
}

/// `H[a,b,c,d] = H^u_{d,a} H^s_{c,d} H^u_{b,c} H^s_{a,b}`.
pub fn holonomy_rectangle(cocycle: &Cocycle, a: &Point, b: &Point, c: &Point, d: &Point) -> Result<Mat2> {
    if !a.in_local_stable(b) {
        return Err(Error::NotARectangle("b is not on the local stable set of a"));
    }
    if !b.in_local_unstable(c) {
        return Err(Error::NotARectangle("c is not on the local unstable set of b"));
    }
    if !c.in_local_stable(d) {
        return Err(Error::NotARectangle("d is not on the local stable set of c"));
    }
    if !d.in_local_unstable(a) {
        return Err(Error::NotARectangle("a is not on the local unstable set of d"));
    }
    let h_ab = stable_holonomy(cocycle, a, b)?.matrix;
    let h_bc = unstable_holonomy(cocycle, b, c)?.matrix;
    let h_cd = stable_holonomy(cocycle, c, d)?.matrix;
    let h_da = unstable_holonomy(cocycle, d, a)?.matrix;
    Ok(h_da * h_cd * h_bc * h_ab)
}

/// The rectangle `[a, [c,a], c, [a,c]]` spanned by two corners with `a_0 = c_0`.
pub fn rectangle_from_corners(shift: &ShiftSpace, a: &Point, c: &Point) -> Result<[Point; 4]> {
    let b = shift.bracket(c, a)?;
    let d = shift.bracket(a, c)?;
    Ok([a.clone(), b, c.clone(), d])
}

/// Log-log fit of `‖H^s_{x,y} - I‖` against `d(x,y)` over sampled local
/// stable pairs. `None` when every sampled holonomy is the identity.
pub fn holder_exponent<R: Rng + ?Sized>(a: &Cocycle, rng: &mut R, samples: usize) -> Option<f64> {
    let shift = a.shift();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..samples {
        let x = shift.random_point(rng, 3, 4);
        let sync = -((i % 10) as i64);
        let y = shift.random_stable_partner(rng, &x, sync, 3, 4);
        let d = shift.metric(&x, &y);
        if d == 0.0 {
            continue;
        }
        let h = stable_holonomy(a, &x, &y).ok()?.matrix;
        let dev = (h - Mat2::IDENTITY).norm();
        if dev > 1e-14 {
            xs.push(d.ln());
            ys.push(dev.ln());
        }
    }
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `ρ(H·v, v)` for a rectangle holonomy and a reference direction.
pub fn rectangle_twist(h: &Mat2, v: &Direction) -> f64 {
    v.image(h).distance(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn full2() -> ShiftSpace {
        ShiftSpace::full(2)
    }

    fn rot_example() -> Cocycle {
        Cocycle::one_step(
            &full2(),
            &[Mat2::diag(2.0, 0.5), Mat2::rotation(FRAC_PI_4)],
        )
        .unwrap()
    }

    #[test]
    fn identity_on_equal_points() {
        let a = rot_example();
        let x = full2().point(vec![0, 1], vec![1, 1], vec![0], 0).unwrap();
        assert_eq!(stable_holonomy(&a, &x, &x).unwrap().matrix, Mat2::IDENTITY);
        assert_eq!(unstable_holonomy(&a, &x, &x).unwrap().matrix, Mat2::IDENTITY);
    }

    #[test]
    fn one_step_local_holonomies_are_identity() {
        let s = full2();
        let a = rot_example();
        let x = s.point(vec![0], vec![1, 0, 1], vec![1], 0).unwrap();
        let y = s.point(vec![1], vec![1, 1, 0, 1], vec![1], 1).unwrap();
        assert!(x.in_local_stable(&y));
        let h = stable_holonomy(&a, &x, &y).unwrap();
        assert_eq!(h.matrix, Mat2::IDENTITY);
        assert!(h.exact && h.error_bound == 0.0);
        let z = s.point(vec![0], vec![1, 0, 0, 0], vec![0], 0).unwrap();
        assert!(x.in_local_unstable(&z));
        assert_eq!(unstable_holonomy(&a, &x, &z).unwrap().matrix, Mat2::IDENTITY);
    }

    #[test]
    fn global_stable_extension_by_hand() {
        let s = full2();
        let p_mat = Mat2::new(2.0, 1.0, 0.0, 0.5);
        let a2 = Mat2::new(1.0, 0.0, 3.0, 1.0);
        let a = Cocycle::one_step(&s, &[p_mat, a2]).unwrap();
        let p = s.fixed_point(0).unwrap();
        let z = s.homoclinic_points(&p, 1).unwrap().remove(0);
        let h = stable_holonomy(&a, &z, &p).unwrap();
        let expected = p_mat.inv() * a2;
        assert!(h.matrix.rel_diff(&expected) < 1e-15);
        assert_eq!(h.truncation_n, 1);
    }

    #[test]
    fn rejects_non_members() {
        let s = full2();
        let a = rot_example();
        let x = s.fixed_point(0).unwrap();
        let y = s.fixed_point(1).unwrap();
        assert!(matches!(stable_holonomy(&a, &x, &y), Err(Error::NotOnStableSet)));
        assert!(matches!(unstable_holonomy(&a, &x, &y), Err(Error::NotOnUnstableSet)));
        assert!(matches!(holonomy_loop(&a, &x, &x), Err(Error::NotHomoclinic)));
        let w = s.point(vec![0], vec![1], vec![1], 0).unwrap();
        assert!(matches!(holonomy_loop(&a, &w, &x), Err(Error::NotPeriodic)));
    }

    #[test]
    fn loop_by_finite_product() {
        let s = full2();
        let a = rot_example();
        let p = s.fixed_point(0).unwrap();
        let z = s.homoclinic_points(&p, 1).unwrap().remove(0);
        let pm = Mat2::diag(2.0, 0.5);
        let r = Mat2::rotation(FRAC_PI_4);
        // z = ...111 2 111... with the 2 at coordinate 0
        let psi = holonomy_loop(&a, &p, &z).unwrap();
        // H^s_{z,p} = P^{-1} R, H^u_{p,z} = I
        assert!(psi.rel_diff(&(pm.inv() * r)).abs() < 1e-15);
        let id = Cocycle::identity(&s);
        for z in s.homoclinic_points(&p, 3).unwrap() {
            assert_eq!(holonomy_loop(&id, &p, &z).unwrap(), Mat2::IDENTITY);
        }
    }

    #[test]
    fn rectangles() {
        let s = full2();
        let a = rot_example();
        let x = s.point(vec![0, 1], vec![1, 0, 0], vec![1, 1, 0], 1).unwrap();
        assert_eq!(holonomy_rectangle(&a, &x, &x, &x, &x).unwrap(), Mat2::IDENTITY);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = s.random_point(&mut rng, 3, 4);
            let c = s.random_point(&mut rng, 3, 4);
            if c.at(0) != p.at(0) {
                continue;
            }
            let [ra, rb, rc, rd] = rectangle_from_corners(&s, &p, &c).unwrap();
            assert_eq!(holonomy_rectangle(&a, &ra, &rb, &rc, &rd).unwrap(), Mat2::IDENTITY);
        }
        let y = s.fixed_point(1).unwrap();
        assert!(matches!(holonomy_rectangle(&a, &x, &y, &x, &y), Err(Error::NotARectangle(_))));
    }

    #[test]
    fn depth_one_rectangles_shrink() {
        let g = ShiftSpace::full(2);
        let a = Cocycle::from_fn(&g, 1, |w| {
            Mat2::rotation(0.2 * w[0] as f64 - 0.15 * w[2] as f64) * Mat2::diag(1.3 + 0.2 * w[1] as f64, 0.9)
        })
        .unwrap();
        let v = Direction::E1;
        let base = g.point(vec![0, 1], vec![0, 0, 1, 0], vec![1, 0, 0], 2).unwrap();
        let mut prev = f64::INFINITY;
        for m in [0i64, 1, 2, 3] {
            // c agrees with base on |i| < m and differs just outside
            let mut core: Vec<u8> = (-m - 1..=m + 1).map(|i| base.at(i)).collect();
            core[0] ^= 1;
            let last = core.len() - 1;
            core[last] ^= 1;
            let c = g.point(vec![1], core, vec![0], m + 1).unwrap();
            let [ra, rb, rc, rd] = rectangle_from_corners(&g, &base, &c).unwrap();
            let h = holonomy_rectangle(&a, &ra, &rb, &rc, &rd).unwrap();
            let twist = rectangle_twist(&h, &v);
            assert!(twist <= prev + 1e-15);
            prev = twist;
        }
    }

    #[test]
    fn holder_fit_none_for_one_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!(holder_exponent(&rot_example(), &mut rng, 50).is_none());
        let g = ShiftSpace::full(2);
        let a = Cocycle::from_fn(&g, 1, |w| Mat2::rotation(0.3 * w[0] as f64 + 0.1 * w[2] as f64) * Mat2::diag(1.2, 1.0)).unwrap();
        let beta = holder_exponent(&a, &mut rng, 200);
        assert!(beta.is_none_or(|b| b.is_finite()));
    }
}
