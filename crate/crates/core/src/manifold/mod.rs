//! Exact spectra of the reduced systems and the quadratic map of the
//! central manifold.
//!
//! Everything here is computed in exact rational arithmetic: the Jacobian
//! blocks are assembled as printed matrices, characteristic polynomials come
//! from a Faddeev-LeVerrier coefficient recursion, and the manifold
//! coefficients solve small linear systems built from the rotation operator
//! `L f = -(D_w f) y + (D_y f) w` acting on quadratic monomials.

pub mod rational;

pub use rational::{rat, rat_int, Rat, RatMatrix, RatPoly};

use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifoldError {
    #[error("matrix must be square, got {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("need at least two agents, got {0}")]
    TooFewAgents(usize),
}

/// Monic characteristic polynomial with exact coefficients, low to high.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPoly {
    pub poly: RatPoly,
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.poly.to_f64()
    }
}

/// Characteristic polynomial of a rational matrix via the Faddeev-LeVerrier
/// recursion. Exact: integer matrices yield integer coefficients.
pub fn char_poly(a: &RatMatrix) -> Result<CharPoly, ManifoldError> {
    if !a.is_square() {
        return Err(ManifoldError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let d = a.rows();
    let mut coeffs = vec![Rat::zero(); d + 1];
    coeffs[d] = Rat::one();
    let mut am = a.clone(); // A * M_1 with M_1 = I
    coeffs[d - 1] = -am.trace();
    for k in 2..=d {
        let mut m = am.clone();
        for i in 0..d {
            let c = coeffs[d - k + 1].clone();
            m[(i, i)] += c;
        }
        am = a.mul(&m);
        coeffs[d - k] = -am.trace() / rat_int(k as i64);
    }
    Ok(CharPoly { poly: RatPoly::new(coeffs) })
}

// --- Jacobians of the reduced systems at the rectilinear fixed point -----

/// `I_{n-1} - (1/n) * ones`, the projector-like block shared by all three
/// Jacobians.
fn b_block(n: usize) -> RatMatrix {
    let m = n - 1;
    RatMatrix::from_fn(m, m, |i, j| {
        let mut v = rat(-1, n as i64);
        if i == j {
            v += Rat::one();
        }
        v
    })
}

/// Jacobian of the moving-frame dynamics at the rectilinear fixed point,
/// `(4n-1) x (4n-1)`, block order `[w | y | x | u]`.
pub fn frame_jacobian(n: usize) -> Result<RatMatrix, ManifoldError> {
    if n < 2 {
        return Err(ManifoldError::TooFewAgents(n));
    }
    let d = 4 * n - 1;
    let mut j = RatMatrix::zeros(d, d);
    for k in 0..n {
        j[(k, n + k)] = rat_int(-1); // w' = -y
        j[(n + k, k)] = Rat::one(); // y' = w
    }
    let b = b_block(n);
    for i in 0..n - 1 {
        for c in 0..n - 1 {
            j[(2 * n + i, 3 * n - 1 + c)] = b[(i, c)].clone(); // x' depends on u
        }
        j[(2 * n + i, 4 * n - 2)] = rat(-1, n as i64); // ... and on u_n
        j[(3 * n - 1 + i, 2 * n + i)] = rat_int(-1); // u' = -x ...
        j[(3 * n - 1 + i, 3 * n - 1 + i)] = rat_int(-2); // ... - 2u
        j[(4 * n - 2, 2 * n + i)] = Rat::one(); // u_n' = +sum x ...
    }
    j[(4 * n - 2, 4 * n - 2)] = rat_int(-2);
    Ok(j)
}

/// Jacobian of the relative-coordinate dynamics at the rectilinear fixed
/// point, `(4n-2) x (4n-2)`, block order `[sx | sy | vx | vy | vx_n | vy_n]`.
pub fn relative_jacobian(n: usize) -> Result<RatMatrix, ManifoldError> {
    if n < 2 {
        return Err(ManifoldError::TooFewAgents(n));
    }
    let m = n - 1;
    let d = 4 * m + 2;
    let mut j = RatMatrix::zeros(d, d);
    let b = b_block(n);
    for i in 0..m {
        for c in 0..m {
            j[(i, 2 * m + c)] = b[(i, c)].clone();
            j[(m + i, 3 * m + c)] = b[(i, c)].clone();
        }
        j[(i, 4 * m)] = rat(-1, n as i64);
        j[(m + i, 4 * m + 1)] = rat(-1, n as i64);
        j[(2 * m + i, i)] = rat_int(-1);
        j[(2 * m + i, 2 * m + i)] = rat_int(-2);
        j[(3 * m + i, m + i)] = rat_int(-1);
        j[(4 * m, i)] = Rat::one();
        j[(4 * m + 1, m + i)] = Rat::one();
    }
    j[(4 * m, 4 * m)] = rat_int(-2);
    Ok(j)
}

/// Jacobian of the normal-free relative dynamics, `(2n-1) x (2n-1)`,
/// block order `[sx | vx | vx_n]`.
pub fn relative_x_jacobian(n: usize) -> Result<RatMatrix, ManifoldError> {
    if n < 2 {
        return Err(ManifoldError::TooFewAgents(n));
    }
    let m = n - 1;
    let d = 2 * m + 1;
    let mut j = RatMatrix::zeros(d, d);
    let b = b_block(n);
    for i in 0..m {
        for c in 0..m {
            j[(i, m + c)] = b[(i, c)].clone();
        }
        j[(i, 2 * m)] = rat(-1, n as i64);
        j[(m + i, i)] = rat_int(-1);
        j[(m + i, m + i)] = rat_int(-2);
        j[(2 * m, i)] = Rat::one();
    }
    j[(2 * m, 2 * m)] = rat_int(-2);
    Ok(j)
}

// --- closed-form spectra --------------------------------------------------

fn lin(c0: i64, c1: i64) -> RatPoly {
    RatPoly::from_ints(&[c0, c1])
}

/// Expansion of `(x^2+1)^n (x+1)^{2(n-1)} (x+2)`, the frame spectrum.
pub fn frame_spectrum_product(n: usize) -> RatPoly {
    RatPoly::from_ints(&[1, 0, 1])
        .pow(n)
        .mul(&lin(1, 1).pow(2 * (n - 1)))
        .mul(&lin(2, 1))
}

/// Expansion of `x (x^2+1)^{n-1} (x+2) (x+1)^{2n-2}`, the relative spectrum.
pub fn relative_spectrum_product(n: usize) -> RatPoly {
    RatPoly::from_ints(&[0, 1])
        .mul(&RatPoly::from_ints(&[1, 0, 1]).pow(n - 1))
        .mul(&lin(2, 1))
        .mul(&lin(1, 1).pow(2 * n - 2))
}

/// Expansion of `(x+2)(x+1)^{2n-2}`, the normal-free relative spectrum.
pub fn relative_x_spectrum_product(n: usize) -> RatPoly {
    lin(2, 1).mul(&lin(1, 1).pow(2 * n - 2))
}

// --- the quadratic manifold map -------------------------------------------

/// Matrix of the rotation operator `L` on the quadratic basis
/// `(p^2, pq, q^2)` (per-agent centered monomials and their means alike).
pub fn l_matrix() -> RatMatrix {
    RatMatrix::from_fn(3, 3, |i, j| {
        rat_int([[0, -2, 0], [1, 0, -1], [0, 2, 0]][i][j] as i64)
    })
}

/// Coefficient triples of the quadratic central-manifold map against the
/// centered monomial basis `(w_k^2 - s_ww, w_k y_k - s_wy, y_k^2 - s_yy)`
/// and the mean basis `(s_ww, s_wy, s_yy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldCoeffs {
    pub c_x: [Rat; 3],
    pub c_z: [Rat; 3],
    pub c_bar: [Rat; 3],
}

impl ManifoldCoeffs {
    pub fn c_x_f64(&self) -> [f64; 3] {
        self.c_x.clone().map(|c| c.to_f64().unwrap())
    }
    pub fn c_z_f64(&self) -> [f64; 3] {
        self.c_z.clone().map(|c| c.to_f64().unwrap())
    }
    pub fn c_bar_f64(&self) -> [f64; 3] {
        self.c_bar.clone().map(|c| c.to_f64().unwrap())
    }
}

/// Solve the two linear systems that define the quadratic manifold map.
///
/// The mean part solves `c_bar (M_L + 2 I) = (-1, 0, 0)`; the centered part
/// solves the 6x6 block system `[c_x c_z] [[M_L, I], [-I, M_L + 2I]] =
/// (0, 0, 0, -1, 0, 0)`. Both systems are assembled from `M_L`, not copied.
pub fn solve_coeffs() -> ManifoldCoeffs {
    let ml = l_matrix();
    let ml2 = ml.add(&RatMatrix::identity(3).scale(&rat_int(2)));
    // Row-vector systems become column systems of the transpose.
    let c_bar = ml2
        .transpose()
        .solve(&[rat_int(-1), Rat::zero(), Rat::zero()])
        .expect("mean system is nonsingular");
    let mut k = RatMatrix::zeros(6, 6);
    k.set_block(0, 0, &ml);
    k.set_block(0, 3, &RatMatrix::identity(3));
    k.set_block(3, 0, &RatMatrix::identity(3).scale(&rat_int(-1)));
    k.set_block(3, 3, &ml2);
    let rhs: Vec<Rat> = [0, 0, 0, -1, 0, 0].iter().map(|&v| rat_int(v)).collect();
    let cxz = k.transpose().solve(&rhs).expect("block system is nonsingular");
    ManifoldCoeffs {
        c_x: [cxz[0].clone(), cxz[1].clone(), cxz[2].clone()],
        c_z: [cxz[3].clone(), cxz[4].clone(), cxz[5].clone()],
        c_bar: [c_bar[0].clone(), c_bar[1].clone(), c_bar[2].clone()],
    }
}

/// Residuals of the two defining linear systems at the given coefficients
/// (in f64), for reporting.
pub fn coeff_system_residual(coeffs: &ManifoldCoeffs) -> f64 {
    let ml = l_matrix();
    let ml2 = ml.add(&RatMatrix::identity(3).scale(&rat_int(2)));
    let mut worst: f64 = 0.0;
    let row_times = |row: &[Rat; 3], m: &RatMatrix, j: usize| -> Rat {
        (0..3).map(|i| &row[i] * &m[(i, j)]).sum()
    };
    for j in 0..3 {
        let r = row_times(&coeffs.c_bar, &ml2, j) - rat_int(if j == 0 { -1 } else { 0 });
        worst = worst.max(r.to_f64().unwrap().abs());
        // c_x M_L - c_z = 0
        let r = row_times(&coeffs.c_x, &ml, j) - coeffs.c_z[j].clone();
        worst = worst.max(r.to_f64().unwrap().abs());
        // c_x + c_z (M_L + 2I) = (-1, 0, 0)
        let r = coeffs.c_x[j].clone() + row_times(&coeffs.c_z, &ml2, j)
            - rat_int(if j == 0 { -1 } else { 0 });
        worst = worst.max(r.to_f64().unwrap().abs());
    }
    worst
}

/// Means of the quadratic monomials of a `(w, y)` configuration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadraticMeans {
    pub ww: f64,
    pub wy: f64,
    pub yy: f64,
}

pub fn quadratic_means(w: &[f64], y: &[f64]) -> QuadraticMeans {
    assert_eq!(w.len(), y.len());
    let n = w.len() as f64;
    let mut q = QuadraticMeans::default();
    for (&wk, &yk) in w.iter().zip(y) {
        q.ww += wk * wk;
        q.wy += wk * yk;
        q.yy += yk * yk;
    }
    q.ww /= n;
    q.wy /= n;
    q.yy /= n;
    q
}

/// Evaluation of the quadratic manifold map at a `(w, y)` configuration.
#[derive(Debug, Clone)]
pub struct ManifoldPoint {
    /// Tangential offsets of agents `1..n-1`.
    pub x: Vec<f64>,
    /// Shifted tangential velocities `u_k - 1` of all agents.
    pub z: Vec<f64>,
    /// Mean of `z`; the mean-speed defect `|V| - 1` to quadratic order.
    pub z_bar: f64,
}

/// Evaluate the manifold map: `x` and `z` as quadratic forms in each agent's
/// `(w_k, y_k)` and the configuration means.
pub fn manifold_map(coeffs: &ManifoldCoeffs, w: &[f64], y: &[f64]) -> ManifoldPoint {
    assert_eq!(w.len(), y.len());
    let n = w.len();
    let q = quadratic_means(w, y);
    let cx = coeffs.c_x_f64();
    let cz = coeffs.c_z_f64();
    let cb = coeffs.c_bar_f64();
    let z_bar = cb[0] * q.ww + cb[1] * q.wy + cb[2] * q.yy;
    let centered = |k: usize| {
        [
            w[k] * w[k] - q.ww,
            w[k] * y[k] - q.wy,
            y[k] * y[k] - q.yy,
        ]
    };
    let x = (0..n - 1)
        .map(|k| {
            let b = centered(k);
            cx[0] * b[0] + cx[1] * b[1] + cx[2] * b[2]
        })
        .collect();
    let z = (0..n)
        .map(|k| {
            let b = centered(k);
            cz[0] * b[0] + cz[1] * b[1] + cz[2] * b[2] + z_bar
        })
        .collect();
    ManifoldPoint { x, z, z_bar }
}

/// Apply the rotation operator `L` to a scalar function of `(w, y)` by
/// differentiating along the flow direction `(-y, w)`.
///
/// Central differencing in the path parameter is exact (to rounding) for
/// quadratic forms, which is what the manifold map consists of.
pub fn l_apply(f: impl Fn(&[f64], &[f64]) -> f64, w: &[f64], y: &[f64]) -> f64 {
    let h = 1e-3;
    let shift = |s: f64| {
        let ws: Vec<f64> = w.iter().zip(y).map(|(&wk, &yk)| wk - s * yk).collect();
        let ys: Vec<f64> = w.iter().zip(y).map(|(&wk, &yk)| yk + s * wk).collect();
        f(&ws, &ys)
    };
    (shift(h) - shift(-h)) / (2.0 * h)
}

/// Maximum absolute residual of the three manifold equations at `(w, y)`:
///
/// ```text
/// L X_k - (Z_k - Zbar)                                   = 0   (k < n)
/// L (Z_k - Zbar) + 2 (Z_k - Zbar) + X_k + (w_k^2 - s_ww) = 0   (k < n)
/// L Zbar + 2 Zbar + s_ww                                 = 0
/// ```
///
/// `L` is evaluated by directional differentiation, independent of the
/// algebraic route that produced the coefficients.
pub fn pde_residual(coeffs: &ManifoldCoeffs, w: &[f64], y: &[f64]) -> f64 {
    let n = w.len();
    let q = quadratic_means(w, y);
    let point = manifold_map(coeffs, w, y);
    let mut worst: f64 = 0.0;
    for k in 0..n - 1 {
        let lx = l_apply(|wv, yv| manifold_map(coeffs, wv, yv).x[k], w, y);
        let zc = point.z[k] - point.z_bar;
        worst = worst.max((lx - zc).abs());
        let lzc = l_apply(
            |wv, yv| {
                let p = manifold_map(coeffs, wv, yv);
                p.z[k] - p.z_bar
            },
            w,
            y,
        );
        let r = lzc + 2.0 * zc + point.x[k] + (w[k] * w[k] - q.ww);
        worst = worst.max(r.abs());
    }
    let lzbar = l_apply(|wv, yv| manifold_map(coeffs, wv, yv).z_bar, w, y);
    worst.max((lzbar + 2.0 * point.z_bar + q.ww).abs())
}
