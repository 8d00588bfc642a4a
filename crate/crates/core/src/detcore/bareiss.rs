use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::exactalg::{Polynomial, Rational};
use crate::matrix::Matrix;

/// Determinant of a square polynomial matrix.
///
/// Entries are first lifted to integer coefficients by the common
/// denominator `L`, then reduced by fraction-free (Bareiss) elimination, in
/// which every division is exact. The result is rescaled by `L^-n`.
pub fn det_poly_matrix(m: &Matrix<Polynomial>) -> Polynomial {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows();
    if n == 0 {
        return Polynomial::one();
    }
    let lcm = m
        .iter()
        .fold(BigInt::one(), |acc, p| acc.lcm(&p.denominator_lcm()));
    let lift = Rational::from_integer(lcm.clone());
    let mut a = m.map(|p| p.scale(&lift));

    let mut sign = false;
    let mut prev = Polynomial::one();
    for k in 0..n - 1 {
        if a[(k, k)].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !a[(r, k)].is_zero()) else {
                return Polynomial::zero();
            };
            for j in 0..n {
                let tmp = a[(k, j)].clone();
                a[(k, j)] = a[(r, j)].clone();
                a[(r, j)] = tmp;
            }
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[(k, k)] * &a[(i, j)]) - &(&a[(i, k)] * &a[(k, j)]);
                a[(i, j)] = num
                    .exact_div(&prev)
                    .expect("Bareiss step divides exactly");
            }
            a[(i, k)] = Polynomial::zero();
        }
        prev = a[(k, k)].clone();
    }
    let det = a[(n - 1, n - 1)].clone();
    let unlift = Rational::from_integer(num_traits::pow(lcm, n)).recip();
    let det = det.scale(&unlift);
    if sign {
        -det
    } else {
        det
    }
}

/// Coefficients `c_0 = 1, c_1, ..., c_n` of `det(lambda Id - M) =
/// sum_k c_k lambda^(n-k)`, which are also the coefficients of
/// `det(Id - xM) = sum_k c_k x^k`.
///
/// Trace recursion: `N_1 = Id`, `c_k = -tr(M N_k) / k`,
/// `N_{k+1} = M N_k + c_k Id`.
pub fn faddeev_leverrier(m: &Matrix<Rational>) -> Vec<Rational> {
    let n = m.rows();
    let mut coeffs = vec![Rational::one()];
    let mut nk = Matrix::from_fn(n, n, |i, j| if i == j { Rational::one() } else { Rational::zero() });
    for k in 1..=n {
        let mn = Matrix::from_fn(n, n, |i, j| (0..n).map(|l| &m[(i, l)] * &nk[(l, j)]).sum::<Rational>());
        let trace: Rational = (0..n).map(|i| mn[(i, i)].clone()).sum();
        let ck = -trace / Rational::from_integer(BigInt::from(k));
        nk = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                &mn[(i, j)] + &ck
            } else {
                mn[(i, j)].clone()
            }
        });
        coeffs.push(ck);
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    fn c(n: i64) -> Polynomial {
        Polynomial::from_i64s(&[n])
    }

    #[test]
    fn constant_matrices() {
        let m = Matrix::from_rows(vec![vec![c(2), c(3)], vec![c(5), c(7)]]);
        assert_eq!(det_poly_matrix(&m), c(-1));
        // Zero leading pivot forces a row swap.
        let m = Matrix::from_rows(vec![
            vec![c(0), c(1), c(2)],
            vec![c(1), c(0), c(3)],
            vec![c(4), c(-3), c(8)],
        ]);
        assert_eq!(det_poly_matrix(&m), c(-2));
        let singular = Matrix::from_rows(vec![vec![c(0), c(1)], vec![c(0), c(2)]]);
        assert!(det_poly_matrix(&singular).is_zero());
    }

    #[test]
    fn rational_entries_lift_and_unlift() {
        let half = Polynomial::constant(rat(1, 2));
        let x3 = Polynomial::monomial(rat(1, 3), 1);
        let m = Matrix::from_rows(vec![vec![half.clone(), x3.clone()], vec![x3.clone(), half.clone()]]);
        // 1/4 - x^2/9
        assert_eq!(
            det_poly_matrix(&m),
            Polynomial::from_coeffs(vec![rat(1, 4), rat(0, 1), rat(-1, 9)])
        );
    }

    #[test]
    fn leverrier_on_companion() {
        // Companion of lambda^2 - 3 lambda + 2.
        let m = Matrix::from_rows(vec![vec![rat(0, 1), rat(-2, 1)], vec![rat(1, 1), rat(3, 1)]]);
        assert_eq!(faddeev_leverrier(&m), vec![rat(1, 1), rat(-3, 1), rat(2, 1)]);
    }
}
