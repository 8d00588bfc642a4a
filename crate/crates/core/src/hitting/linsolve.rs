use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

#[cfg(test)]
use crate::detcore::det_poly_matrix;
use crate::exactalg::{Polynomial, Rational, RationalFunction};
use crate::matrix::Matrix;

/// Solves `a * x = b` over the rationals by Gaussian elimination with
/// partial pivoting on the first nonzero entry. `None` if `a` is singular.
pub fn solve_rational(a: &Matrix<Rational>, b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.rows();
    assert!(a.is_square() && b.len() == n);
    let mut m = Matrix::from_fn(n, n + 1, |i, j| if j < n { a[(i, j)].clone() } else { b[i].clone() });
    for k in 0..n {
        let p = (k..n).find(|&r| !m[(r, k)].is_zero())?;
        if p != k {
            for j in 0..=n {
                let tmp = m[(k, j)].clone();
                m[(k, j)] = m[(p, j)].clone();
                m[(p, j)] = tmp;
            }
        }
        let inv = m[(k, k)].recip();
        for j in k..=n {
            m[(k, j)] *= &inv;
        }
        for i in 0..n {
            if i == k || m[(i, k)].is_zero() {
                continue;
            }
            let f = m[(i, k)].clone();
            for j in k..=n {
                let delta = &f * &m[(k, j)];
                m[(i, j)] -= delta;
            }
        }
    }
    Some((0..n).map(|i| m[(i, n)].clone()).collect())
}

/// Solves `a * x = b` over `Q(x)`. Bareiss elimination of the augmented
/// matrix leaves `det a` in the last pivot; fraction-free back substitution
/// then yields the Cramer numerators `det a * x_i` as polynomials, every
/// division exact. `None` if `det a` is the zero polynomial.
pub fn solve_poly_cramer(a: &Matrix<Polynomial>, b: &[Polynomial]) -> Option<Vec<RationalFunction>> {
    let n = a.rows();
    assert!(a.is_square() && b.len() == n);
    if n == 0 {
        return Some(Vec::new());
    }
    let lcm = a
        .iter()
        .chain(b)
        .fold(BigInt::one(), |acc, p| acc.lcm(&p.denominator_lcm()));
    let lift = Rational::from_integer(lcm);
    let mut m = Matrix::from_fn(n, n + 1, |i, j| {
        if j < n { a[(i, j)].scale(&lift) } else { b[i].scale(&lift) }
    });
    let mut prev = Polynomial::one();
    for k in 0..n {
        if m[(k, k)].is_zero() {
            let r = (k + 1..n).find(|&r| !m[(r, k)].is_zero())?;
            for j in 0..=n {
                let tmp = m[(k, j)].clone();
                m[(k, j)] = m[(r, j)].clone();
                m[(r, j)] = tmp;
            }
        }
        for i in k + 1..n {
            for j in k + 1..=n {
                let num = &(&m[(k, k)] * &m[(i, j)]) - &(&m[(i, k)] * &m[(k, j)]);
                m[(i, j)] = num.exact_div(&prev).expect("Bareiss step divides exactly");
            }
            m[(i, k)] = Polynomial::zero();
        }
        prev = m[(k, k)].clone();
    }
    // The last pivot is the lifted determinant up to the sign of the row
    // swaps, which cancels in every ratio.
    let det = m[(n - 1, n - 1)].clone();
    let mut y = vec![Polynomial::zero(); n];
    for i in (0..n).rev() {
        let mut acc = &det * &m[(i, n)];
        for j in i + 1..n {
            acc = &acc - &(&m[(i, j)] * &y[j]);
        }
        y[i] = acc.exact_div(&m[(i, i)]).expect("back substitution divides exactly");
    }
    Some(
        y.into_iter()
            .map(|num| RationalFunction::new(num, det.clone()).expect("det is nonzero"))
            .collect(),
    )
}

/// Reference Cramer solve, one determinant per unknown.
#[cfg(test)]
fn solve_by_determinants(a: &Matrix<Polynomial>, b: &[Polynomial]) -> Option<Vec<RationalFunction>> {
    let n = a.rows();
    let det = det_poly_matrix(a);
    if det.is_zero() {
        return None;
    }
    Some(
        (0..n)
            .map(|col| {
                let replaced = Matrix::from_fn(n, n, |i, j| if j == col { b[i].clone() } else { a[(i, j)].clone() });
                RationalFunction::new(det_poly_matrix(&replaced), det.clone()).expect("det is nonzero")
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    #[test]
    fn small_rational_system() {
        let a = Matrix::from_rows(vec![vec![rat(0, 1), rat(2, 1)], vec![rat(3, 1), rat(1, 1)]]);
        let x = solve_rational(&a, &[rat(4, 1), rat(5, 1)]).unwrap();
        assert_eq!(x, vec![rat(1, 1), rat(2, 1)]);
        let singular = Matrix::from_rows(vec![vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(4, 1)]]);
        assert!(solve_rational(&singular, &[rat(1, 1), rat(1, 1)]).is_none());
    }

    #[test]
    fn cramer_over_polynomials() {
        // [[1, -x], [0, 1]] y = [0, x]  =>  y = [x^2, x]
        let a = Matrix::from_rows(vec![
            vec![Polynomial::one(), -Polynomial::x()],
            vec![Polynomial::zero(), Polynomial::one()],
        ]);
        let y = solve_poly_cramer(&a, &[Polynomial::zero(), Polynomial::x()]).unwrap();
        assert_eq!(y[0], RationalFunction::from_poly(Polynomial::x().pow(2)));
        assert_eq!(y[1], RationalFunction::from_poly(Polynomial::x()));
    }

    #[test]
    fn elimination_agrees_with_determinants() {
        use crate::samples::random_irreducible;
        for seed in 0..12 {
            let chain = random_irreducible(seed, 2 + (seed as usize % 4), 3);
            let d = chain.dim();
            let a = crate::detcore::id_minus_x(chain.matrix());
            let b: Vec<Polynomial> = (0..d).map(|i| Polynomial::from_i64s(&[i as i64, 1, -2])).collect();
            assert_eq!(solve_poly_cramer(&a, &b), solve_by_determinants(&a, &b));
        }
        // Zero leading pivot forces a row swap.
        let a = Matrix::from_rows(vec![
            vec![Polynomial::zero(), Polynomial::one(), Polynomial::x()],
            vec![Polynomial::x(), Polynomial::from_i64s(&[1, 1]), Polynomial::zero()],
            vec![Polynomial::one(), Polynomial::zero(), Polynomial::from_i64s(&[2, 0, 1])],
        ]);
        let b = [Polynomial::one(), Polynomial::x(), Polynomial::from_i64s(&[0, 3])];
        assert_eq!(solve_poly_cramer(&a, &b), solve_by_determinants(&a, &b));
    }
}
