//! Dense complex linear algebra used by the spectral analysis: matrix
//! exponential, extreme singular values and a few products.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{CMatrix, RMatrix};

/// Degree-13 diagonal Padé coefficients `b_0..b_13`.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm bound below which Padé(13) needs no scaling.
const THETA13: f64 = 5.371920351148152;

fn split(a: &CMatrix) -> (RMatrix, RMatrix) {
    (a.map(|z| z.re), a.map(|z| z.im))
}

fn join(re: &RMatrix, im: &RMatrix) -> CMatrix {
    DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
}

/// Complex product through four real GEMMs, which nalgebra dispatches to a
/// blocked kernel; the generic complex path is several times slower.
pub fn cmatmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    join(&re, &im)
}

fn one_norm(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` by scaling and squaring with the diagonal Padé(13) approximant.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return a.clone();
    }
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a * Complex64::new(2f64.powi(-s), 0.0);

    let ident = CMatrix::identity(n, n);
    let a2 = cmatmul(&scaled, &scaled);
    let a4 = cmatmul(&a2, &a2);
    let a6 = cmatmul(&a4, &a2);
    let b = |i: usize| Complex64::new(PADE13[i], 0.0);

    let u_inner = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u_tail = &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &ident * b(1);
    let u = cmatmul(&scaled, &(cmatmul(&a6, &u_inner) + u_tail));

    let v_inner = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v_tail = &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &ident * b(0);
    let v = cmatmul(&a6, &v_inner) + v_tail;

    let numer = &v + &u;
    let denom = &v - &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .expect("Pade denominator is nonsingular for scaled arguments");
    for _ in 0..s {
        r = cmatmul(&r, &r);
    }
    r
}

/// Largest singular value (operator 2-norm).
pub fn norm2(a: &CMatrix) -> f64 {
    a.clone().singular_values().max()
}

/// Smallest singular value.
pub fn sigma_min(a: &CMatrix) -> f64 {
    a.clone().singular_values().min()
}

/// Hermitian part `(a + a^*) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Symmetric eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    // Embed as the real symmetric matrix [[Re, -Im], [Im, Re]]; every
    // eigenvalue then appears twice.
    let n = a.nrows();
    let mut big = RMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            big[(i, j)] = z.re;
            big[(i + n, j + n)] = z.re;
            big[(i, j + n)] = -z.im;
            big[(i + n, j)] = z.im;
        }
    }
    let sym = (&big + big.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev.into_iter().step_by(2).collect()
}

/// Least-squares line `y = intercept + slope x`, with the coefficient of
/// determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - (intercept + slope * a);
            e * e
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

/// `n` points geometrically spaced from `a` to `b` inclusive.
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => {
            let (la, lb) = (a.ln(), b.ln());
            (0..n)
                .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

/// `n` points uniformly spaced from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Truncated Taylor series, only trusted for small arguments.
    fn taylor_expm(a: &CMatrix, terms: usize) -> CMatrix {
        let n = a.nrows();
        let mut sum = CMatrix::identity(n, n);
        let mut term = CMatrix::identity(n, n);
        for k in 1..terms {
            term = &term * a * c(1.0 / k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = CMatrix::zeros(5, 5);
        assert!(max_diff(&expm(&z), &CMatrix::identity(5, 5)) < 1e-15);
    }

    #[test]
    fn expm_matches_taylor_for_small_argument() {
        let a = CMatrix::from_fn(6, 6, |i, j| c(((i * 3 + j) % 5) as f64 * 0.05 - 0.1, ((i + 2 * j) % 3) as f64 * 0.03));
        let reference = taylor_expm(&a, 40);
        assert!(max_diff(&expm(&a), &reference) < 1e-13);
    }

    #[test]
    fn expm_rotation_and_scaling_path() {
        // exp([[0, -w], [w, 0]]) is a rotation; a large w forces squaring.
        let w = 37.0;
        let a = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-w, 0.0), c(w, 0.0), c(0.0, 0.0)]);
        let e = expm(&a);
        assert!((e[(0, 0)] - c(w.cos(), 0.0)).norm() < 1e-11);
        assert!((e[(1, 0)] - c(w.sin(), 0.0)).norm() < 1e-11);
    }

    #[test]
    fn expm_of_non_normal_jordan_block() {
        // exp(t [[-1, 1], [0, -1]]) = e^{-t} [[1, t], [0, 1]]
        let t = 12.0;
        let a = CMatrix::from_row_slice(2, 2, &[c(-t, 0.0), c(t, 0.0), c(0.0, 0.0), c(-t, 0.0)]);
        let e = expm(&a);
        let et = (-t).exp();
        assert!((e[(0, 1)] - c(t * et, 0.0)).norm() < 1e-14 * t);
        assert!((e[(0, 0)] - c(et, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cmatmul_matches_generic_product() {
        let a = CMatrix::from_fn(7, 5, |i, j| c(i as f64 - j as f64, (i * j) as f64 * 0.1));
        let b = CMatrix::from_fn(5, 4, |i, j| c((i + j) as f64, 1.0 - i as f64));
        assert!(max_diff(&cmatmul(&a, &b), &(&a * &b)) < 1e-12);
    }

    #[test]
    fn hermitian_eigenvalues_of_diagonal() {
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0)]));
        let ev = hermitian_eigenvalues(&a);
        assert_eq!(ev.len(), 3);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn line_fit_recovers_planted_slope() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 - 0.75 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 0.75).abs() < 1e-14);
        assert!((f.intercept - 2.5).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn spacing_helpers() {
        let g = geomspace(1e-3, 1.0, 4);
        assert!((g[1] - 1e-2).abs() < 1e-15 && (g[3] - 1.0).abs() < 1e-15);
        let l = linspace(0.0, 1.0, 5);
        assert_eq!(l, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
