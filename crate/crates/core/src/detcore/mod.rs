//! Polynomial linear algebra on `Id - xM`: its determinant, the deleted-state
//! determinants `pi_v(x)`, the adjugate, and `K0(x) = det(Id - xM) / (1 - x)`.

mod bareiss;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::chain::Chain;
use crate::exactalg::{AlgebraError, Polynomial, Rational};
use crate::matrix::Matrix;

pub use bareiss::{det_poly_matrix, faddeev_leverrier};

/// Above this size the adjugate comes from the coefficient recursion instead
/// of `d^2` cofactor determinants.
pub const COFACTOR_ADJUGATE_MAX_DIM: usize = 6;

/// `Id - xM` as a matrix of polynomials.
pub fn id_minus_x(m: &Matrix<Rational>) -> Matrix<Polynomial> {
    Matrix::from_fn(m.rows(), m.cols(), |i, j| {
        let c0 = if i == j { Rational::one() } else { Rational::zero() };
        Polynomial::from_coeffs(vec![c0, -m[(i, j)].clone()])
    })
}

/// `det(Id - xM)` by fraction-free elimination.
pub fn det_id_minus_xm(chain: &Chain) -> Polynomial {
    det_poly_matrix(&id_minus_x(chain.matrix()))
}

/// `det(Id - xM)` from the characteristic-polynomial coefficients of `M`,
/// an independent route used for cross-checking.
pub fn det_id_minus_xm_faddeev(chain: &Chain) -> Polynomial {
    Polynomial::from_coeffs(faddeev_leverrier(chain.matrix()))
}

/// `pi_v(x) = det(Id_{d-1} - x M^(v))` for every state, in state order.
pub fn pi_polys(chain: &Chain) -> Vec<Polynomial> {
    (0..chain.dim())
        .into_par_iter()
        .map(|v| {
            let sub = chain.delete_state(v).expect("state index in range");
            det_poly_matrix(&id_minus_x(&sub))
        })
        .collect()
}

/// `p(x) / (1 - x)` by synthetic division; fails unless `p(1) = 0`.
pub fn divide_by_one_minus_x(p: &Polynomial) -> Result<Polynomial, AlgebraError> {
    let c = p.coeffs();
    let Some(n) = p.degree() else {
        return Ok(Polynomial::zero());
    };
    // (1 - x) q = p  =>  q_k = p_0 + ... + p_k, and the remainder is p(1).
    let mut q = Vec::with_capacity(n);
    let mut acc = Rational::zero();
    for ck in &c[..n] {
        acc += ck;
        q.push(acc.clone());
    }
    let remainder = acc + &c[n];
    if !remainder.is_zero() {
        return Err(AlgebraError::DivisionNotExact {
            remainder: remainder.to_string(),
        });
    }
    Ok(Polynomial::from_coeffs(q))
}

/// `K0(x) = det(Id - xM) / (1 - x)`, a polynomial of degree at most `d - 1`.
pub fn k0_poly(chain: &Chain) -> Result<Polynomial, AlgebraError> {
    divide_by_one_minus_x(&det_id_minus_xm(chain))
}

/// `Adj(Id - xM)` over the polynomial ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjugateMatrix {
    entries: Matrix<Polynomial>,
}

impl AdjugateMatrix {
    pub fn get(&self, u: usize, v: usize) -> &Polynomial {
        &self.entries[(u, v)]
    }

    pub fn entries(&self) -> &Matrix<Polynomial> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    /// Checks `Adj * (Id - xM) = det * Id` as an exact polynomial-matrix
    /// identity.
    pub fn satisfies_defining_identity(&self, chain: &Chain, det: &Polynomial) -> bool {
        let a = id_minus_x(chain.matrix());
        let d = self.dim();
        (0..d).all(|i| {
            (0..d).all(|j| {
                let s = (0..d).fold(Polynomial::zero(), |acc, k| &acc + &(&self.entries[(i, k)] * &a[(k, j)]));
                if i == j {
                    &s == det
                } else {
                    s.is_zero()
                }
            })
        })
    }
}

/// Adjugate by cofactors for small chains, by the coefficient recursion
/// above [`COFACTOR_ADJUGATE_MAX_DIM`]. Both give identical results.
pub fn adjugate(chain: &Chain) -> AdjugateMatrix {
    if chain.dim() <= COFACTOR_ADJUGATE_MAX_DIM {
        adjugate_by_cofactors(chain)
    } else {
        adjugate_by_recursion(chain, &det_id_minus_xm(chain))
    }
}

/// `Adj_{u,v} = (-1)^(u+v) det(minor with row v and column u removed)`.
pub fn adjugate_by_cofactors(chain: &Chain) -> AdjugateMatrix {
    let a = id_minus_x(chain.matrix());
    let d = chain.dim();
    let cells: Vec<Polynomial> = (0..d * d)
        .into_par_iter()
        .map(|idx| {
            let (u, v) = (idx / d, idx % d);
            let minor = det_poly_matrix(&a.minor(v, u));
            if (u + v) % 2 == 0 {
                minor
            } else {
                -minor
            }
        })
        .collect();
    AdjugateMatrix {
        entries: Matrix::from_fn(d, d, |u, v| cells[u * d + v].clone()),
    }
}

/// Writing `Adj(Id - xM) = sum_k B_k x^k` and `det(Id - xM) = sum_k c_k x^k`,
/// the identity `(Id - xM) Adj = det * Id` gives `B_0 = Id` and
/// `B_k = M B_{k-1} + c_k Id`. Each column of the result solves
/// `(Id - xM) col = det * e_v`.
pub fn adjugate_by_recursion(chain: &Chain, det: &Polynomial) -> AdjugateMatrix {
    let m = chain.matrix();
    let d = chain.dim();
    let identity = |c: &Rational| Matrix::from_fn(d, d, |i, j| if i == j { c.clone() } else { Rational::zero() });
    let mut blocks = vec![identity(&Rational::one())];
    for k in 1..d {
        let prev = &blocks[k - 1];
        let ck = det.coeff(k);
        let next = Matrix::from_fn(d, d, |i, j| {
            let s: Rational = (0..d).map(|l| &m[(i, l)] * &prev[(l, j)]).sum();
            if i == j {
                s + &ck
            } else {
                s
            }
        });
        blocks.push(next);
    }
    AdjugateMatrix {
        entries: Matrix::from_fn(d, d, |i, j| {
            Polynomial::from_coeffs(blocks.iter().map(|b| b[(i, j)].clone()).collect())
        }),
    }
}

/// Everything derived from the determinants of `Id - xM` and its principal
/// minors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharBundle {
    pub chain: Chain,
    /// `det(Id_d - xM)`.
    pub det_poly: Polynomial,
    /// `pi_v(x)` in state order.
    pub pi: Vec<Polynomial>,
    /// `K0(x) = det(Id - xM) / (1 - x)`.
    pub k0: Polynomial,
    /// `Z = K0(1) = sum_v pi_v(1)`.
    pub z: Rational,
}

impl CharBundle {
    pub fn new(chain: &Chain) -> Result<Self, AlgebraError> {
        let det_poly = det_id_minus_xm(chain);
        let k0 = divide_by_one_minus_x(&det_poly)?;
        let pi = pi_polys(chain);
        let z = k0.eval(&Rational::one());
        Ok(Self {
            chain: chain.clone(),
            det_poly,
            pi,
            k0,
            z,
        })
    }

    /// `pi_v(1)`, proportional to the stationary law.
    pub fn pi_at_one(&self) -> Vec<Rational> {
        let one = Rational::one();
        self.pi.iter().map(|p| p.eval(&one)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;
    use crate::testutil::{example4, lazy2, swap2};

    fn p(c: &[(i64, i64)]) -> Polynomial {
        Polynomial::from_coeffs(c.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    #[test]
    fn example_determinant() {
        // (x - 1)(5x^3 - 15x^2 + 54x - 216) / 216
        let expected = (&Polynomial::from_i64s(&[-1, 1]) * &Polynomial::from_i64s(&[-216, 54, -15, 5]))
            .scale(&rat(1, 216));
        let c = example4();
        assert_eq!(det_id_minus_xm(&c), expected);
        assert_eq!(det_id_minus_xm_faddeev(&c), expected);
        let cubic = det_id_minus_xm(&c).exact_div(&Polynomial::from_i64s(&[-1, 1])).unwrap();
        assert_eq!(cubic, Polynomial::from_i64s(&[-216, 54, -15, 5]).scale(&rat(1, 216)));
    }

    #[test]
    fn swap_determinant_and_k0() {
        let c = swap2();
        assert_eq!(det_id_minus_xm(&c), Polynomial::from_i64s(&[1, 0, -1]));
        assert_eq!(k0_poly(&c).unwrap(), Polynomial::from_i64s(&[1, 1]));
        assert_eq!(pi_polys(&c), vec![Polynomial::one(), Polynomial::one()]);
    }

    #[test]
    fn example_pi_polynomials() {
        let pis = pi_polys(&example4());
        assert_eq!(pis[0], p(&[(1, 1), (-5, 6), (1, 36), (-127, 1728)]));
        assert_eq!(pis[1], p(&[(1, 1), (-1, 1), (35, 144), (-1, 72)]));
        assert_eq!(pis[2], p(&[(1, 1), (-11, 12), (5, 24), (-29, 1728)]));
        assert_eq!(pis[3], p(&[(1, 1), (-1, 1), (23, 144), (5, 432)]));
        assert_eq!(pis[0].eval(&rat(1, 1)), rat(209, 1728));
        assert_eq!(pis[0].derivative(1).eval(&rat(0, 1)), rat(-5, 6));
    }

    #[test]
    fn example_k0() {
        let k0 = k0_poly(&example4()).unwrap();
        // Long division of the determinant by (1 - x), done by hand:
        // -(5x^3 - 15x^2 + 54x - 216)/216 = 1 - x/4 + 5x^2/72 - 5x^3/216.
        assert_eq!(k0, p(&[(1, 1), (-1, 4), (5, 72), (-5, 216)]));
        assert_eq!(k0.eval(&rat(1, 1)), rat(43, 54));
        // -(15 - 30 + 54)/216 = -39/216
        assert_eq!(k0.derivative(1).eval(&rat(1, 1)), rat(-13, 72));
        assert_eq!(k0.degree(), Some(3));
    }

    #[test]
    fn synthetic_division_rejects_nonroot() {
        assert!(divide_by_one_minus_x(&Polynomial::from_i64s(&[1, 1])).is_err());
        assert!(divide_by_one_minus_x(&Polynomial::zero()).unwrap().is_zero());
    }

    #[test]
    fn two_state_adjugate_closed_form() {
        let c = lazy2();
        let adj = adjugate(&c);
        let m = c.matrix();
        let one_minus = |r: &Rational| Polynomial::from_coeffs(vec![rat(1, 1), -r.clone()]);
        let lin = |r: &Rational| Polynomial::from_coeffs(vec![rat(0, 1), r.clone()]);
        assert_eq!(adj.get(0, 0), &one_minus(&m[(1, 1)]));
        assert_eq!(adj.get(1, 1), &one_minus(&m[(0, 0)]));
        assert_eq!(adj.get(0, 1), &lin(&m[(0, 1)]));
        assert_eq!(adj.get(1, 0), &lin(&m[(1, 0)]));
    }

    #[test]
    fn adjugate_routes_agree_and_satisfy_identity() {
        for c in [example4(), swap2(), lazy2()] {
            let det = det_id_minus_xm(&c);
            let a = adjugate_by_cofactors(&c);
            let b = adjugate_by_recursion(&c, &det);
            assert_eq!(a, b);
            assert!(a.satisfies_defining_identity(&c, &det));
            let pis = pi_polys(&c);
            for v in 0..c.dim() {
                assert_eq!(a.get(v, v), &pis[v]);
            }
            assert!(a.entries().iter().all(|e| e.degree().unwrap_or(0) < c.dim()));
        }
    }

    #[test]
    fn example_adjugate_entry() {
        // Adj_{1,2} = G_{1,2}(x) pi_2(x) with G_{1,2} = x(2x^2-11x-24)/((x-12)(x-4)(2x-3)).
        let c = example4();
        let adj = adjugate(&c);
        let pis = pi_polys(&c);
        let num = &Polynomial::x() * &Polynomial::from_i64s(&[-24, -11, 2]);
        let den = &(&Polynomial::from_i64s(&[-12, 1]) * &Polynomial::from_i64s(&[-4, 1]))
            * &Polynomial::from_i64s(&[-3, 2]);
        // Adj * den = num * pi_2
        assert_eq!(adj.get(0, 1) * &den, &num * &pis[1]);
    }

    #[test]
    fn bundle_invariants() {
        for c in [example4(), swap2(), lazy2()] {
            let b = CharBundle::new(&c).unwrap();
            assert!(b.det_poly.eval(&rat(1, 1)).is_zero());
            assert_eq!(&Polynomial::from_i64s(&[1, -1]) * &b.k0, b.det_poly);
            assert!(b.k0.degree().unwrap() < c.dim());
            assert!(b.pi.iter().all(|q| q.coeff(0) == rat(1, 1)));
            let s: Rational = b.pi_at_one().iter().sum();
            assert_eq!(s, b.z);
            assert!(b.z > rat(0, 1));
        }
    }
}
