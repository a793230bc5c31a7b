#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let g = rand_distr::StandardNormal;
    let re: f64 = rng.sample(g);
    let im: f64 = rng.sample(g);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

/// Gauss-Jordan inverse with partial pivoting on a row-major complex matrix.
pub fn gauss_jordan_inverse(a: &[Complex64], n: usize) -> Vec<Complex64> {
    let w = 2 * n;
    let mut m = vec![Complex64::new(0.0, 0.0); n * w];
    for i in 0..n {
        m[i * w..i * w + n].copy_from_slice(&a[i * n..(i + 1) * n]);
        m[i * w + n + i] = Complex64::new(1.0, 0.0);
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[x * w + col].norm().total_cmp(&m[y * w + col].norm()))
            .unwrap();
        for j in 0..w {
            m.swap(col * w + j, piv * w + j);
        }
        let p = m[col * w + col];
        for j in 0..w {
            m[col * w + j] /= p;
        }
        for i in (0..n).filter(|&i| i != col) {
            let f = m[i * w + col];
            for j in 0..w {
                let v = m[col * w + j];
                m[i * w + j] -= f * v;
            }
        }
    }
    (0..n * n).map(|k| m[(k / n) * w + n + k % n]).collect()
}

/// MVDR weights `R^-1 a / (a^H R^-1 a)` through the explicit inverse.
pub fn explicit_mvdr(r: &[Complex64], a: &[Complex64]) -> Vec<Complex64> {
    let d = a.len();
    let inv = gauss_jordan_inverse(r, d);
    let ria: Vec<Complex64> = (0..d).map(|i| (0..d).map(|j| inv[i * d + j] * a[j]).sum()).collect();
    let s: Complex64 = a.iter().zip(&ria).map(|(x, y)| x.conj() * y).sum();
    ria.iter().map(|v| v / s).collect()
}
