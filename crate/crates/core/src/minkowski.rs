//! Indefinite linear algebra of `E⁴₁` with signature `(−, +, +, +)`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Relative tolerance used by [`causal_character`] when none is supplied.
pub const DEFAULT_CAUSAL_TOL: f64 = 1e-10;

/// Metric signs of the coordinate axes.
pub const METRIC: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

/// A vector of `E⁴₁` in the standard coordinates `(x1, x2, x3, x4)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec4(pub [f64; 4]);

/// Points and vectors share one representation.
pub type Point4 = Vec4;

impl Vec4 {
    pub const ZERO: Vec4 = Vec4([0.0; 4]);

    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Vec4([x1, x2, x3, x4])
    }

    /// Standard basis vector `e_i` with `i` in `1..=4`.
    pub fn e(i: usize) -> Self {
        assert!((1..=4).contains(&i), "basis index must be in 1..=4");
        let mut c = [0.0; 4];
        c[i - 1] = 1.0;
        Vec4(c)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Sum of squared components (the Euclidean norm squared).
    pub fn euclidean_sq(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.euclidean_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn dot(&self, other: &Vec4) -> f64 {
        inner(self, other)
    }
}

impl fmt::Display for Vec4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "({a}, {b}, {c}, {d})")
    }
}

impl Index<usize> for Vec4 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec4 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vec4 {
    type Output = Vec4;
    fn add(self, o: Vec4) -> Vec4 {
        Vec4(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl AddAssign for Vec4 {
    fn add_assign(&mut self, o: Vec4) {
        for i in 0..4 {
            self.0[i] += o.0[i];
        }
    }
}

impl Sub for Vec4 {
    type Output = Vec4;
    fn sub(self, o: Vec4) -> Vec4 {
        Vec4(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl SubAssign for Vec4 {
    fn sub_assign(&mut self, o: Vec4) {
        for i in 0..4 {
            self.0[i] -= o.0[i];
        }
    }
}

impl Neg for Vec4 {
    type Output = Vec4;
    fn neg(self) -> Vec4 {
        Vec4(self.0.map(|c| -c))
    }
}

impl Mul<f64> for Vec4 {
    type Output = Vec4;
    fn mul(self, s: f64) -> Vec4 {
        Vec4(self.0.map(|c| c * s))
    }
}

impl Mul<Vec4> for f64 {
    type Output = Vec4;
    fn mul(self, v: Vec4) -> Vec4 {
        v * self
    }
}

/// Causal character of a vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CausalCharacter {
    Spacelike,
    Timelike,
    Lightlike,
}

/// `⟨x, y⟩ = −x1 y1 + x2 y2 + x3 y3 + x4 y4`.
#[inline]
pub fn inner(x: &Vec4, y: &Vec4) -> f64 {
    -x.0[0] * y.0[0] + x.0[1] * y.0[1] + x.0[2] * y.0[2] + x.0[3] * y.0[3]
}

#[inline]
fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Ternary vector product: the formal determinant with first row
/// `(−e1, e2, e3, e4)` followed by the rows `x`, `y`, `z`.
///
/// The result is Minkowski-orthogonal to each argument.
pub fn triple_product(x: &Vec4, y: &Vec4, z: &Vec4) -> Vec4 {
    let minor = |skip: usize| -> f64 {
        let pick = |v: &Vec4| -> [f64; 3] {
            let mut out = [0.0; 3];
            let mut k = 0;
            for (j, c) in v.0.iter().enumerate() {
                if j != skip {
                    out[k] = *c;
                    k += 1;
                }
            }
            out
        };
        det3(pick(x), pick(y), pick(z))
    };
    // cofactor C_j = (−1)^j M_j; the first row carries −e1
    Vec4([-minor(0), -minor(1), minor(2), -minor(3)])
}

/// `√|⟨x, x⟩|`.
pub fn norm(x: &Vec4) -> f64 {
    inner(x, x).abs().sqrt()
}

/// Classify `x`. A vector is lightlike when
/// `|⟨x,x⟩| ≤ tol · (1 + Σ x_i²)`; the zero vector counts as spacelike.
pub fn causal_character(x: &Vec4, tol: f64) -> CausalCharacter {
    if x.0.iter().all(|c| *c == 0.0) {
        return CausalCharacter::Spacelike;
    }
    let q = inner(x, x);
    if q.abs() <= tol * (1.0 + x.euclidean_sq()) {
        CausalCharacter::Lightlike
    } else if q > 0.0 {
        CausalCharacter::Spacelike
    } else {
        CausalCharacter::Timelike
    }
}

/// Declared causal signs `σ_i = ⟨B_i, B_i⟩` of a tetrad.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Signature(pub [f64; 4]);

impl Signature {
    /// Signature with exactly one timelike slot at `timelike` (0-based).
    pub fn with_timelike(timelike: usize) -> Self {
        let mut s = [1.0; 4];
        s[timelike] = -1.0;
        Signature(s)
    }

    pub fn timelike_slot(&self) -> Option<usize> {
        self.0.iter().position(|s| *s < 0.0)
    }
}

/// An ordered tetrad `(B1, B2, B3, B4)` with its declared signature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParallelFrame {
    pub b: [Vec4; 4],
    pub signature: Signature,
}

impl ParallelFrame {
    pub fn new(b: [Vec4; 4], signature: Signature) -> Self {
        ParallelFrame { b, signature }
    }

    /// The tetrad built from standard basis vectors whose timelike member is
    /// `e1`, placed in the signature's timelike slot; spacelike slots take
    /// `e2, e3, e4` in order.
    pub fn standard(signature: Signature) -> Self {
        let slot = signature.timelike_slot().unwrap_or(0);
        let mut next = 2;
        let b = std::array::from_fn(|i| {
            if i == slot {
                Vec4::e(1)
            } else {
                let v = Vec4::e(next);
                next += 1;
                v
            }
        });
        ParallelFrame { b, signature }
    }

    /// `max_{i,j} |⟨B_i, B_j⟩ − σ_i δ_ij|`.
    pub fn gram_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in i..4 {
                let target = if i == j { self.signature.0[i] } else { 0.0 };
                worst = worst.max((inner(&self.b[i], &self.b[j]) - target).abs());
            }
        }
        worst
    }

    /// Largest Euclidean component deviation between two tetrads.
    pub fn max_deviation(&self, other: &ParallelFrame) -> f64 {
        (0..4)
            .map(|i| (self.b[i] - other.b[i]).max_abs())
            .fold(0.0, f64::max)
    }
}

/// Signature-aware Gram-Schmidt in the fixed order `B1, B2, B3, B4`.
///
/// `B1` is only rescaled. Every output vector keeps the orientation of its
/// input (`σ_i ⟨B̂_i, B_i⟩ > 0`). Fails when a vector loses its declared
/// causal character or collapses after projection.
pub fn lorentz_orthonormalize(frame: &ParallelFrame) -> Result<ParallelFrame> {
    const COLLAPSE: f64 = 1e-12;
    let sig = frame.signature.0;
    let mut out = [Vec4::ZERO; 4];
    for i in 0..4 {
        let input = frame.b[i];
        if !input.is_finite() {
            return Err(Error::NonFinite(format!("frame vector B{}", i + 1)));
        }
        let mut v = input;
        for j in 0..i {
            // σ_j² = 1, so dividing by σ_j is multiplying by it
            let c = inner(&v, &out[j]) * sig[j];
            v -= out[j] * c;
        }
        let q = inner(&v, &v);
        let scale = input.euclidean_sq().max(1.0);
        if q.abs() <= COLLAPSE * scale || q.signum() != sig[i].signum() {
            return Err(Error::DegenerateFrame(format!(
                "B{} has ⟨v,v⟩ = {q:e} after projection, expected sign {}",
                i + 1,
                sig[i]
            )));
        }
        out[i] = v * (1.0 / q.abs().sqrt());
    }
    Ok(ParallelFrame {
        b: out,
        signature: frame.signature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(i: usize) -> Vec4 {
        Vec4::e(i)
    }

    #[test]
    fn inner_matches_metric() {
        assert_eq!(inner(&e(1), &e(1)), -1.0);
        assert_eq!(inner(&e(2), &e(2)), 1.0);
        let x = Vec4::new(1.0, 2.0, 0.0, 3.0);
        let y = Vec4::new(4.0, 1.0, 1.0, 1.0);
        assert_eq!(inner(&x, &y), 1.0);
    }

    /// Independent route: Laplace expansion of the formal 4x4 determinant
    /// along its first row with a generic recursive determinant.
    fn det_generic(m: &[Vec<f64>]) -> f64 {
        let n = m.len();
        if n == 1 {
            return m[0][0];
        }
        (0..n)
            .map(|j| {
                let sub: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, v)| *v)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[0][j] * det_generic(&sub)
            })
            .sum()
    }

    fn triple_oracle(x: &Vec4, y: &Vec4, z: &Vec4) -> Vec4 {
        let first_row = [-1.0, 1.0, 1.0, 1.0];
        Vec4(std::array::from_fn(|k| {
            // replace the symbolic first row by first_row[k] * e_k
            let mut row0 = vec![0.0; 4];
            row0[k] = first_row[k];
            let m = vec![row0, x.0.to_vec(), y.0.to_vec(), z.0.to_vec()];
            det_generic(&m)
        }))
    }

    #[test]
    fn triple_product_of_spacelike_basis() {
        assert_eq!(triple_product(&e(2), &e(3), &e(4)), -e(1));
        assert_eq!(triple_oracle(&e(2), &e(3), &e(4)), -e(1));
    }

    #[test]
    fn triple_product_with_repeated_argument_vanishes() {
        let x = Vec4::new(0.3, -1.2, 2.0, 0.7);
        let z = Vec4::new(1.0, 0.5, -0.5, 2.0);
        assert!(triple_product(&x, &x, &z).max_abs() < 1e-15);
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm(&e(1)), 1.0);
        assert_eq!(norm(&Vec4::new(1.0, 1.0, 0.0, 0.0)), 0.0);
        assert_eq!(norm(&Vec4::new(0.0, 3.0, 4.0, 0.0)), 5.0);
    }

    #[test]
    fn causal_examples() {
        let tol = DEFAULT_CAUSAL_TOL;
        assert_eq!(causal_character(&e(1), tol), CausalCharacter::Timelike);
        assert_eq!(
            causal_character(&Vec4::new(1.0, 1.0, 0.0, 0.0), tol),
            CausalCharacter::Lightlike
        );
        assert_eq!(
            causal_character(&Vec4::new(1.0, 2.0, 0.0, 0.0), tol),
            CausalCharacter::Spacelike
        );
        assert_eq!(causal_character(&Vec4::ZERO, tol), CausalCharacter::Spacelike);
    }

    #[test]
    fn standard_frames_are_orthonormal() {
        for slot in 0..4 {
            let f = ParallelFrame::standard(Signature::with_timelike(slot));
            assert_eq!(f.gram_residual(), 0.0);
            assert_eq!(f.b[slot], e(1));
        }
    }

    #[test]
    fn orthonormalize_is_idempotent_on_exact_tetrad() {
        let f = ParallelFrame::standard(Signature::with_timelike(1));
        let g = lorentz_orthonormalize(&f).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn orthonormalize_rejects_repeated_vectors() {
        let mut f = ParallelFrame::standard(Signature::with_timelike(0));
        f.b[3] = f.b[2];
        assert!(matches!(
            lorentz_orthonormalize(&f),
            Err(Error::DegenerateFrame(_))
        ));
    }

    fn vec4() -> impl Strategy<Value = Vec4> {
        prop::array::uniform4(-2.0f64..2.0).prop_map(Vec4)
    }

    proptest! {
        #[test]
        fn inner_is_symmetric_and_bilinear(x in vec4(), y in vec4(), z in vec4(), a in -3.0f64..3.0) {
            prop_assert!((inner(&x, &y) - inner(&y, &x)).abs() < 1e-12);
            let lhs = inner(&(x * a + z), &y);
            let rhs = a * inner(&x, &y) + inner(&z, &y);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn triple_product_matches_oracle_and_is_orthogonal(x in vec4(), y in vec4(), z in vec4()) {
            let t = triple_product(&x, &y, &z);
            let o = triple_oracle(&x, &y, &z);
            prop_assert!((t - o).max_abs() < 1e-12);
            for a in [x, y, z] {
                prop_assert!(inner(&t, &a).abs() < 1e-10);
            }
        }

        #[test]
        fn triple_product_is_alternating(x in vec4(), y in vec4(), z in vec4()) {
            let t = triple_product(&x, &y, &z);
            prop_assert!((triple_product(&y, &x, &z) + t).max_abs() < 1e-12);
            prop_assert!((triple_product(&x, &z, &y) + t).max_abs() < 1e-12);
            prop_assert!((triple_product(&z, &y, &x) + t).max_abs() < 1e-12);
        }

        #[test]
        fn norm_is_absolutely_homogeneous(x in vec4(), a in -5.0f64..5.0) {
            prop_assert!((norm(&(x * a)) - a.abs() * norm(&x)).abs() < 1e-10);
        }

        #[test]
        fn orthonormalize_repairs_small_noise(
            slot in 0usize..4,
            noise in prop::array::uniform16(-1e-6f64..1e-6),
        ) {
            let exact = ParallelFrame::standard(Signature::with_timelike(slot));
            let mut noisy = exact;
            for i in 0..4 {
                for k in 0..4 {
                    noisy.b[i].0[k] += noise[4 * i + k];
                }
            }
            let fixed = lorentz_orthonormalize(&noisy).unwrap();
            prop_assert!(fixed.gram_residual() < 1e-12);
            for i in 0..4 {
                prop_assert!(fixed.signature.0[i] * inner(&fixed.b[i], &noisy.b[i]) > 0.0);
            }
        }
    }
}
