//! Small dense complex linear algebra.
//!
//! Everything here is sized for desk-scale problems (`n <= 8`); the routines
//! favour clarity and robustness over blocking or cache tricks.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::ComplexFloat;

use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Pivots below this modulus are treated as zero by [`Lu`].
pub const PIVOT_THRESHOLD: f64 = 1e-12;

/// Hermitian inner product `<a, b> = sum a_j conj(b_j)`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    libm::sqrt(a.iter().map(|x| x.norm_sqr()).sum::<f64>())
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

pub fn scale_real(a: &[C64], s: f64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[C64], s: f64, b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y * s).collect()
}

pub fn distance(a: &[C64], b: &[C64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>())
}

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("matrix must have at least one row"));
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            Error::check_dim(n, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(Matrix { n, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    /// `(A + A*) / 2`
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        let mut m = self.clone();
        for (x, y) in m.data.iter_mut().zip(&adj.data) {
            *x = (*x + *y) * 0.5;
        }
        m
    }

    pub fn scaled(&self, s: C64) -> Self {
        Matrix { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Matrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Matrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    m.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        m
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        self.data.chunks(self.n).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x.norm_sqr()).sum::<f64>())
    }

    /// Spectral norm, the largest singular value.
    pub fn norm_spectral(&self) -> f64 {
        self.singular_values().last().copied().unwrap_or(0.0)
    }

    /// Singular values in ascending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let gram = self.adjoint().mul(self);
        hermitian_eigenvalues(&gram).into_iter().map(|l| libm::sqrt(l.max(0.0))).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == ZERO))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self[(i, j)] == ZERO))
    }

    pub fn determinant(&self) -> C64 {
        match Lu::factor(self) {
            Ok(lu) => lu.determinant(),
            Err(_) => ZERO,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let lu = Lu::factor(self)?;
        let n = self.n;
        let mut inv = Self::zeros(n);
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = ZERO);
            e[j] = ONE;
            let col = lu.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
    min_pivot: f64,
}

impl Lu {
    /// Fails with [`Error::SingularJacobian`] when a pivot modulus drops below
    /// [`PIVOT_THRESHOLD`].
    pub fn factor(a: &Matrix) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            min_pivot = min_pivot.min(pmax);
            if !(pmax >= PIVOT_THRESHOLD) {
                return Err(Error::SingularJacobian { min_pivot: pmax.max(0.0) });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor != ZERO {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= factor * u;
                    }
                }
            }
        }
        Ok(Lu { lu, perm, sign, min_pivot })
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.lu.dim();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                x[i] = x[i] - l * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                x[i] = x[i] - u * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn determinant(&self) -> C64 {
        (0..self.lu.dim()).map(|i| self.lu[(i, i)]).product::<C64>() * self.sign
    }
}

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Only the Hermitian part of the input is used. `n <= 2` is solved in closed
/// form; larger matrices go through cyclic complex Jacobi.
pub fn hermitian_eigenvalues(h: &Matrix) -> Vec<f64> {
    let n = h.dim();
    match n {
        0 => Vec::new(),
        1 => vec![h[(0, 0)].re],
        2 => {
            let a = h[(0, 0)].re;
            let d = h[(1, 1)].re;
            let b = (h[(0, 1)] + h[(1, 0)].conj()) * 0.5;
            let mean = 0.5 * (a + d);
            let rad = libm::hypot(0.5 * (a - d), b.norm());
            vec![mean - rad, mean + rad]
        }
        _ => {
            let mut s: Vec<C64> = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    s.push((h[(i, j)] + h[(j, i)].conj()) * 0.5);
                }
            }
            let mut eig = hermitian_jacobi(&mut s, n);
            eig.sort_by(f64::total_cmp);
            eig
        }
    }
}

/// Cyclic complex Jacobi sweeps on a dense Hermitian matrix; returns the
/// diagonal. Each rotation first removes the phase of `a_pq`, then applies the
/// real rotation that zeroes it.
fn hermitian_jacobi(a: &mut [C64], n: usize) -> Vec<f64> {
    let scale: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum();
        if off <= 1e-32 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[p * n + q];
                let apq = b.norm();
                if apq == 0.0 {
                    continue;
                }
                let phase = b / apq;
                for k in 0..n {
                    a[k * n + q] *= phase.conj();
                }
                for k in 0..n {
                    a[q * n + k] *= phase;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * s;
                    a[k * n + q] = akp * s + akq * c;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * s;
                    a[q * n + k] = apk * s + aqk * c;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i].re).collect()
}

/// Eigenvalues of a general complex matrix.
///
/// Triangular inputs return their diagonal exactly, `n = 2` uses the
/// quadratic formula, anything larger is reduced to Hessenberg form and
/// iterated with Wilkinson-shifted complex QR.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<C64>> {
    let n = a.dim();
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    if a.is_upper_triangular() || a.is_lower_triangular() {
        return Ok((0..n).map(|i| a[(i, i)]).collect());
    }
    if n == 2 {
        let half_tr = (a[(0, 0)] + a[(1, 1)]) * 0.5;
        let half_diff = (a[(0, 0)] - a[(1, 1)]) * 0.5;
        let disc = (half_diff * half_diff + a[(0, 1)] * a[(1, 0)]).sqrt();
        return Ok(vec![half_tr + disc, half_tr - disc]);
    }
    hessenberg_qr(a)
}

fn hessenberg(a: &Matrix) -> Matrix {
    let n = a.dim();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = norm(&x);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = norm(&v);
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vnorm);
        // H <- (I - 2 v v*) H
        for j in 0..n {
            let dot: C64 = (0..v.len()).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            for i in 0..v.len() {
                h[(k + 1 + i, j)] -= v[i] * dot * 2.0;
            }
        }
        // H <- H (I - 2 v v*)
        for i in 0..n {
            let dot: C64 = (0..v.len()).map(|j| h[(i, k + 1 + j)] * v[j]).sum();
            for j in 0..v.len() {
                h[(i, k + 1 + j)] -= dot * v[j].conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

fn hessenberg_qr(a: &Matrix) -> Result<Vec<C64>> {
    let n = a.dim();
    let mut h = hessenberg(a);
    let mut eig = vec![ZERO; n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let sub = h[(lo, lo - 1)].norm();
            if sub <= f64::EPSILON * s || sub < f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n {
            return Err(Error::NoConvergence("shifted QR eigenvalue iteration".into()));
        }
        let shift = if iter.is_multiple_of(11) {
            h[(hi, hi)] + h[(hi, hi - 1)].norm()
        } else {
            let a11 = h[(hi - 1, hi - 1)];
            let a12 = h[(hi - 1, hi)];
            let a21 = h[(hi, hi - 1)];
            let a22 = h[(hi, hi)];
            let half_tr = (a11 + a22) * 0.5;
            let half_diff = (a11 - a22) * 0.5;
            let disc = (half_diff * half_diff + a12 * a21).sqrt();
            let l1 = half_tr + disc;
            let l2 = half_tr - disc;
            if (l1 - a22).norm() <= (l2 - a22).norm() { l1 } else { l2 }
        };
        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = libm::hypot(x.norm(), y.norm());
            let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (x / r, y / r) };
            for j in k..=hi {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = c.conj() * a + s.conj() * b;
                h[(k + 1, j)] = -s * a + c * b;
            }
            rotations.push((c, s));
        }
        for (idx, k) in (lo..hi).enumerate() {
            let (c, s) = rotations[idx];
            for i in lo..=(k + 2).min(hi) {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s;
                h[(i, k + 1)] = -a * s.conj() + b * c.conj();
            }
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hermitian_two_by_two_closed_form() {
        let h = Matrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let e = hermitian_eigenvalues(&h);
        assert!((e[0] - 1.0).abs() < 1e-15 && (e[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn hermitian_jacobi_matches_known_spectrum() {
        // Unitary similarity of diag(-1, 0.5, 4) by a complex unitary.
        let u = Matrix::from_rows(&[
            vec![c(0.5, 0.5), c(0.5, -0.5), c(0.0, 0.0)],
            vec![c(0.5, -0.5), c(0.5, 0.5), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)],
        ])
        .unwrap();
        let d = Matrix::diagonal(&[c(-1.0, 0.0), c(0.5, 0.0), c(4.0, 0.0)]);
        let h = u.mul(&d).mul(&u.adjoint());
        let e = hermitian_eigenvalues(&h);
        for (got, want) in e.iter().zip([-1.0, 0.5, 4.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn qr_eigenvalues_of_companion_matrix() {
        // Roots 1, 2, 3, 4 of (x-1)(x-2)(x-3)(x-4) = x^4 - 10x^3 + 35x^2 - 50x + 24.
        let comp = Matrix::from_real_rows(&[
            &[10.0, -35.0, 50.0, -24.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let mut e: Vec<f64> = eigenvalues(&comp).unwrap().iter().map(|z| z.re).collect();
        e.sort_by(f64::total_cmp);
        for (got, want) in e.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn qr_eigenvalues_complex_pair() {
        // Rotation block plus a real eigenvalue, conjugated by a dense matrix.
        let a = Matrix::from_real_rows(&[&[0.0, -2.0, 0.0], &[2.0, 0.0, 0.0], &[0.0, 0.0, 3.0]]).unwrap();
        let s = Matrix::from_real_rows(&[&[1.0, 2.0, 0.5], &[0.0, 1.0, 3.0], &[1.0, 0.0, 1.0]]).unwrap();
        let m = s.mul(&a).mul(&s.inverse().unwrap());
        let e = eigenvalues(&m).unwrap();
        let tr: C64 = e.iter().sum();
        let prod: C64 = e.iter().product();
        assert!((tr - m.trace()).norm() < 1e-10);
        assert!((prod - C64::new(12.0, 0.0)).norm() < 1e-9);
        assert!(e.iter().any(|z| (z - c(0.0, 2.0)).norm() < 1e-9));
        assert!(e.iter().any(|z| (z - c(0.0, -2.0)).norm() < 1e-9));
    }

    #[test]
    fn lu_solve_and_singularity() {
        let a = Matrix::from_real_rows(&[&[0.0, 2.0], &[1.0, 1.0]]).unwrap();
        let lu = Lu::factor(&a).unwrap();
        let x = lu.solve(&[c(2.0, 0.0), c(3.0, 0.0)]);
        assert!((x[0] - c(2.0, 0.0)).norm() < 1e-15 && (x[1] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((lu.determinant() - c(-2.0, 0.0)).norm() < 1e-15);
        let sing = Matrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(Lu::factor(&sing), Err(Error::SingularJacobian { .. })));
    }

    #[test]
    fn spectral_norm_of_nilpotent() {
        let a = Matrix::from_real_rows(&[&[0.0, 3.0], &[0.0, 0.0]]).unwrap();
        assert!((a.norm_spectral() - 3.0).abs() < 1e-14);
    }
}
