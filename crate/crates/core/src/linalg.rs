//! Fixed-size 3×3 helpers: adjugate inverse and real eigenvalues of a
//! non-symmetric matrix through its characteristic cubic.

use crate::error::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

/// Imaginary-part tolerance (relative to the spectral scale) below which a
/// complex-conjugate pair is treated as a rounding-split double root.
pub const IMAG_TOL: f64 = 1e-8;

pub fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn trace(m: &Mat3) -> f64 {
    m[0][0] + m[1][1] + m[2][2]
}

pub fn adjugate(m: &Mat3) -> Mat3 {
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    [
        [c(1, 2, 1, 2), -c(0, 2, 1, 2), c(0, 1, 1, 2)],
        [-c(1, 2, 0, 2), c(0, 2, 0, 2), -c(0, 1, 0, 2)],
        [c(1, 2, 0, 1), -c(0, 2, 0, 1), c(0, 1, 0, 1)],
    ]
}

pub fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

pub fn transpose(a: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

pub fn max_abs(a: &Mat3) -> f64 {
    a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Inverse by adjugate over determinant; `None` when `det` is exactly zero.
pub fn inverse(m: &Mat3) -> Option<Mat3> {
    let d = det(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let adj = adjugate(m);
    Some(adj.map(|row| row.map(|v| v / d)))
}

/// Sum of the principal 2×2 minors.
fn minor_sum(m: &Mat3) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] + m[1][1] * m[2][2]
        - m[1][2] * m[2][1]
}

/// Roots of `λ³ + a λ² + b λ + c` by Cardano's method. Returns real roots
/// and, when the discriminant is negative, the imaginary part of the
/// complex pair (whose real part is the second entry).
fn cardano(a: f64, b: f64, c: f64) -> ([f64; 3], f64) {
    let shift = a / 3.0;
    // depressed cubic t³ + p t + q with λ = t − a/3
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-half_q + sq).cbrt();
        let v = (-half_q - sq).cbrt();
        let t1 = u + v;
        let re = -(u + v) / 2.0;
        let im = (u - v).abs() * 3f64.sqrt() / 2.0;
        ([t1 - shift, re - shift, re - shift], im)
    } else if third_p == 0.0 {
        let t = (-q).cbrt();
        ([t - shift; 3], 0.0)
    } else {
        // three real roots, trigonometric form
        let r = (-third_p).sqrt();
        let cos_arg = (-half_q / (r * r * r)).clamp(-1.0, 1.0);
        let phi = cos_arg.acos() / 3.0;
        let tau = std::f64::consts::TAU / 3.0;
        (
            [
                2.0 * r * phi.cos() - shift,
                2.0 * r * (phi - tau).cos() - shift,
                2.0 * r * (phi + tau).cos() - shift,
            ],
            0.0,
        )
    }
}

fn polish(a: f64, b: f64, c: f64, mut x: f64) -> f64 {
    let f = |x: f64| ((x + a) * x + b) * x + c;
    let df = |x: f64| (3.0 * x + 2.0 * a) * x + b;
    for _ in 0..4 {
        let d = df(x);
        if d == 0.0 {
            break;
        }
        let next = x - f(x) / d;
        if !next.is_finite() || f(next).abs() >= f(x).abs() {
            break;
        }
        x = next;
    }
    x
}

/// Eigenvalues of the 2×2 block of `m` on the invariant plane complementary
/// to the eigenvalue `lambda`, i.e. the Euclidean orthogonal complement of the
/// left eigenvector. Returns `(mean, discriminant)` so the pair is
/// `mean ± √disc`.
fn deflated_pair(m: &Mat3, lambda: f64) -> Option<(f64, f64)> {
    let shifted: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| m[i][j] - if i == j { lambda } else { 0.0 }));
    // rows of adj(A − λI) are multiples of the right eigenvector; its columns
    // are multiples of the left eigenvector
    let adj = adjugate(&shifted);
    let col = (0..3)
        .max_by(|&a, &b| {
            let na: f64 = (0..3).map(|i| adj[i][a] * adj[i][a]).sum();
            let nb: f64 = (0..3).map(|i| adj[i][b] * adj[i][b]).sum();
            na.total_cmp(&nb)
        })
        .unwrap();
    let y = [adj[0][col], adj[1][col], adj[2][col]];
    let ny = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
    if ny == 0.0 || !ny.is_finite() {
        return None;
    }
    let y = y.map(|v| v / ny);
    let cross = |a: [f64; 3], b: [f64; 3]| {
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    };
    let k = (0..3).min_by(|&a, &b| y[a].abs().total_cmp(&y[b].abs())).unwrap();
    let mut ek = [0.0; 3];
    ek[k] = 1.0;
    let w1 = cross(y, ek);
    let n1 = (w1[0] * w1[0] + w1[1] * w1[1] + w1[2] * w1[2]).sqrt();
    let w1 = w1.map(|v| v / n1);
    let w2 = cross(y, w1);
    let apply = |x: [f64; 3]| -> [f64; 3] { std::array::from_fn(|i| (0..3).map(|j| m[i][j] * x[j]).sum()) };
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let (s1, s2) = (apply(w1), apply(w2));
    let (b11, b12, b21, b22) = (dot(w1, s1), dot(w1, s2), dot(w2, s1), dot(w2, s2));
    let mean = 0.5 * (b11 + b22);
    let half = 0.5 * (b11 - b22);
    Some((mean, half * half + b12 * b21))
}

/// Real eigenvalues of a general 3×3 matrix, sorted descending.
///
/// Cardano on the characteristic cubic followed by Newton polishing of the
/// isolated root. A close or complex pair is re-resolved on the invariant
/// plane left after deflating the isolated root, which avoids the `√ε`
/// ill-conditioning of double roots in the cubic's coefficients. Complex
/// pairs whose imaginary part exceeds [`IMAG_TOL`] (relative) are errors.
pub fn real_eigenvalues(m: &Mat3) -> Result<[f64; 3]> {
    let tr = trace(m);
    let ms = minor_sum(m);
    let d = det(m);
    let (a, b, c) = (-tr, ms, -d);
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let (roots, im) = cardano(a, b, c);

    // isolate the root farthest from the others
    let iso = if im > 0.0 {
        0
    } else {
        (0..3)
            .max_by(|&i, &j| {
                let gap = |k: usize| (0..3).filter(|&l| l != k).map(|l| (roots[k] - roots[l]).abs()).fold(f64::INFINITY, f64::min);
                gap(i).total_cmp(&gap(j))
            })
            .unwrap()
    };
    let lambda = polish(a, b, c, roots[iso]);
    let others: Vec<f64> = (0..3).filter(|&k| k != iso).map(|k| roots[k]).collect();
    let pair_gap = if im > 0.0 { 2.0 * im } else { (others[0] - others[1]).abs() };

    if im > 0.0 && pair_gap > 1e-4 * scale {
        return Err(Error::Spectral { re: roots[1], im });
    }
    let mut out = if pair_gap > 1e-4 * scale {
        [lambda, polish(a, b, c, others[0]), polish(a, b, c, others[1])]
    } else {
        match deflated_pair(m, lambda) {
            Some((mean, disc)) => {
                if disc < 0.0 {
                    let imag = (-disc).sqrt();
                    if imag > IMAG_TOL * scale.max(1.0) {
                        return Err(Error::Spectral { re: mean, im: imag });
                    }
                    [lambda, mean, mean]
                } else {
                    let s = disc.sqrt();
                    [lambda, mean + s, mean - s]
                }
            }
            // all three eigenvalues (numerically) coincide
            None => [lambda, others[0], others[1]],
        }
    };
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("eigenvalue".into()));
    }
    out.sort_by(|x, y| y.total_cmp(x));
    Ok(out)
}
