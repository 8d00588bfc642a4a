use nalgebra::{Complex, DMatrix};

use crate::exactalg::{rational::to_f64, Polynomial};

/// Floating-point Kemeny constant from the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralKemeny {
    pub value: f64,
    pub imag_residual: f64,
}

/// The `d - 1` non-unit eigenvalues of `M`, as roots of
/// `x^{d-1} K0(1/x) = prod_i (x - lambda_i)` via its companion matrix.
/// `K0(0) = 1`, so the reversed polynomial is monic; a degree drop in `K0`
/// shows up as zero eigenvalues.
pub fn eigenvalues_from_k0(k0: &Polynomial, d: usize) -> Vec<Complex<f64>> {
    let n = d - 1;
    if n == 0 {
        return Vec::new();
    }
    // Coefficient of x^j in the reversed polynomial is k_{n-j}.
    let a: Vec<f64> = (0..n).map(|j| to_f64(&k0.coeff(n - j))).collect();
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for (j, aj) in a.iter().enumerate() {
        companion[(j, n - 1)] = -aj;
    }
    companion.complex_eigenvalues().iter().copied().collect()
}

/// `1 + sum_i 1 / (1 - lambda_i)`. Conjugate pairs contribute conjugate
/// terms, so the imaginary part of the sum should vanish up to rounding; the
/// leftover is reported.
pub fn kemeny_from_eigenvalues(eigenvalues: &[Complex<f64>]) -> SpectralKemeny {
    let one = Complex::new(1.0, 0.0);
    let total: Complex<f64> = eigenvalues.iter().map(|l| one / (one - l)).sum();
    SpectralKemeny {
        value: 1.0 + total.re,
        imag_residual: total.im.abs(),
    }
}
