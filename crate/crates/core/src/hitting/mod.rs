//! Hitting-time generating functions and everything read off them: laws,
//! factorial moments, the stationary distribution and Kemeny's constant.
//!
//! `G_{u,v}^{>=t}(x) = E_u[x^{tau_v^{>=t}}]` where `tau_v^{>=t}` is the first
//! time `k >= t` with `C_k = v`. Two independent routes compute it:
//!
//! - adjugate: `G_{u,v}^{>=0} = Adj(Id - xM)_{u,v} / pi_v(x)`, and for `t = 1`
//!   the diagonal is corrected by `G_{v,v}^{>=1} = 1 - det(Id - xM) / pi_v(x)`;
//! - taboo solve: with `M*v` equal to `M` with column `v` zeroed,
//!   `G_{.,v}^{>=1} = (Id - x M*v)^{-1} (x M e_v)`, and
//!   `G_{u,v}^{>=0} = 1` if `u = v`, else `G_{u,v}^{>=1}`.
//!
//! For `t >= 2` both columns are pushed forward by `(xM)^{t-1}`. Every
//! public entry point checks the routes agree.

mod identities;
mod linsolve;
mod moments;
mod spectral;

use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::chain::{Chain, ChainError};
use crate::detcore::{adjugate, id_minus_x, AdjugateMatrix, CharBundle};
use crate::exactalg::{AlgebraError, Polynomial, Rational, RationalFunction};
use crate::matrix::Matrix;

pub use identities::{verify_identities, IdentityCheck, IdentityReport};
pub use linsolve::{solve_poly_cramer, solve_rational};
pub use moments::{FactorialTail, KemenyResult, MomentTable};
pub use spectral::{eigenvalues_from_k0, kemeny_from_eigenvalues, SpectralKemeny};

/// Largest shift accepted by [`HittingAnalysis::gf`]. Larger shifts are pure
/// monomial multiples of smaller ones.
pub const DEFAULT_T_MAX: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HittingError {
    #[error("shift t = {t} exceeds t_max = {t_max}")]
    ShiftTooLarge { t: usize, t_max: usize },
    #[error("adjugate and taboo-solve routes disagree for G[{u},{v}] at t = {t}")]
    RouteMismatch { u: usize, v: usize, t: usize },
    #[error("value not constant over start states: {u} gives {left}, {u_prime} gives {right}")]
    ConstancyViolation {
        u: usize,
        u_prime: usize,
        left: String,
        right: String,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// One generating function `G_{u,v}^{>=t}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HittingGF {
    pub u: usize,
    pub v: usize,
    pub t: usize,
    pub gf: RationalFunction,
}

/// Precomputed determinant data and `t = 0, 1` generating functions for one
/// chain. All queries are exact and deterministic.
#[derive(Debug, Clone)]
pub struct HittingAnalysis {
    bundle: CharBundle,
    adj: AdjugateMatrix,
    /// `G^{>=0}` by the taboo solve.
    g0: Matrix<RationalFunction>,
    /// `G^{>=1}` by the taboo solve.
    g1: Matrix<RationalFunction>,
    t_max: usize,
}

impl HittingAnalysis {
    pub fn new(chain: &Chain) -> Result<Self, HittingError> {
        let bundle = CharBundle::new(chain)?;
        let adj = adjugate(chain);
        let d = chain.dim();
        let cols = (0..d)
            .into_par_iter()
            .map(|v| taboo_column(chain, v))
            .collect::<Result<Vec<_>, _>>()?;
        let g1 = Matrix::from_fn(d, d, |u, v| cols[v][u].clone());
        let g0 = Matrix::from_fn(d, d, |u, v| {
            if u == v { RationalFunction::one() } else { cols[v][u].clone() }
        });
        let analysis = Self {
            bundle,
            adj,
            g0,
            g1,
            t_max: DEFAULT_T_MAX,
        };
        analysis.check_routes()?;
        Ok(analysis)
    }

    pub fn with_t_max(mut self, t_max: usize) -> Self {
        self.t_max = t_max;
        self
    }

    fn check_routes(&self) -> Result<(), HittingError> {
        let d = self.dim();
        (0..d * d).into_par_iter().try_for_each(|k| {
            let (u, v) = (k / d, k % d);
            let (a0, a1) = self.adjugate_route(u, v)?;
            if a0 != self.g0[(u, v)] {
                return Err(HittingError::RouteMismatch { u, v, t: 0 });
            }
            if a1 != self.g1[(u, v)] {
                return Err(HittingError::RouteMismatch { u, v, t: 1 });
            }
            Ok(())
        })
    }

    /// `(G^{>=0}_{u,v}, G^{>=1}_{u,v})` from the adjugate.
    fn adjugate_route(&self, u: usize, v: usize) -> Result<(RationalFunction, RationalFunction), AlgebraError> {
        let pi_v = &self.bundle.pi[v];
        let g0 = RationalFunction::new(self.adj.get(u, v).clone(), pi_v.clone())?;
        let g1 = if u == v {
            let ratio = RationalFunction::new(self.bundle.det_poly.clone(), pi_v.clone())?;
            &RationalFunction::one() - &ratio
        } else {
            g0.clone()
        };
        Ok((g0, g1))
    }

    pub fn chain(&self) -> &Chain {
        &self.bundle.chain
    }

    pub fn bundle(&self) -> &CharBundle {
        &self.bundle
    }

    pub fn adjugate(&self) -> &AdjugateMatrix {
        &self.adj
    }

    pub fn dim(&self) -> usize {
        self.bundle.chain.dim()
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    fn check_state(&self, s: usize) -> Result<(), HittingError> {
        if s < self.dim() {
            Ok(())
        } else {
            Err(ChainError::UnknownState(format!("#{s}")).into())
        }
    }

    /// `G^{>=0}_{u,v}` without bounds checks.
    pub(crate) fn g0(&self, u: usize, v: usize) -> &RationalFunction {
        &self.g0[(u, v)]
    }

    pub(crate) fn g1(&self, u: usize, v: usize) -> &RationalFunction {
        &self.g1[(u, v)]
    }

    /// `G_{u,v}^{>=t}` for `t <= t_max`, checked across both routes.
    pub fn gf(&self, u: usize, v: usize, t: usize) -> Result<HittingGF, HittingError> {
        self.check_state(u)?;
        self.check_state(v)?;
        let col = self.gf_column(v, t)?;
        Ok(HittingGF {
            u,
            v,
            t,
            gf: col[u].clone(),
        })
    }

    /// The column `(G_{u,v}^{>=t})_u`.
    pub fn gf_column(&self, v: usize, t: usize) -> Result<Vec<RationalFunction>, HittingError> {
        self.check_state(v)?;
        if t > self.t_max {
            return Err(HittingError::ShiftTooLarge { t, t_max: self.t_max });
        }
        let d = self.dim();
        if t == 0 {
            return Ok((0..d).map(|u| self.g0[(u, v)].clone()).collect());
        }
        let taboo: Vec<RationalFunction> = (0..d).map(|u| self.g1[(u, v)].clone()).collect();
        if t == 1 {
            return Ok(taboo);
        }
        // Adjugate route: strong Markov at time one, G^{>=t} = x M G^{>=t-1},
        // stepped on numerators over the shared denominator pi_v.
        let m = self.chain().matrix();
        let pi_v = &self.bundle.pi[v];
        let mut stepped: Vec<Polynomial> = (0..d)
            .map(|u| {
                if u == v {
                    pi_v - &self.bundle.det_poly
                } else {
                    self.adj.get(u, v).clone()
                }
            })
            .collect();
        for _ in 1..t {
            stepped = (0..d)
                .map(|u| {
                    (0..d)
                        .filter(|&w| !m[(u, w)].is_zero())
                        .fold(Polynomial::zero(), |acc, w| &acc + &stepped[w].scale(&m[(u, w)]))
                        .shift_up(1)
                })
                .collect();
        }
        let stepped: Vec<RationalFunction> = stepped
            .into_iter()
            .map(|n| RationalFunction::new(n, pi_v.clone()))
            .collect::<Result<_, _>>()?;
        // Taboo route: (xM)^{t-1} applied to the taboo column.
        let (nums, den) = common_denominator(&taboo);
        let power = poly_matrix_power(&x_times(m), t - 1);
        let pushed: Vec<RationalFunction> = (0..d)
            .map(|u| {
                let n = (0..d)
                    .filter(|&w| !power[(u, w)].is_zero())
                    .fold(Polynomial::zero(), |acc, w| &acc + &(&power[(u, w)] * &nums[w]));
                RationalFunction::new(n, den.clone())
            })
            .collect::<Result<_, _>>()?;
        for u in 0..d {
            if stepped[u] != pushed[u] {
                return Err(HittingError::RouteMismatch { u, v, t });
            }
        }
        Ok(pushed)
    }

    /// `E_u[x^{tau_u^{>=1}}] = 1 - det(Id - xM) / pi_u(x)`.
    pub fn return_gf(&self, u: usize) -> Result<RationalFunction, HittingError> {
        self.check_state(u)?;
        let ratio = RationalFunction::new(self.bundle.det_poly.clone(), self.bundle.pi[u].clone())?;
        Ok(&RationalFunction::one() - &ratio)
    }

    /// Exact stationary law `rho_v = pi_v(1) / Z`.
    pub fn stationary(&self) -> Vec<Rational> {
        self.bundle
            .pi_at_one()
            .into_iter()
            .map(|p| p / &self.bundle.z)
            .collect()
    }

    /// `P_u(C_Geo(x0) = v)` for each `v`, where `Geo(x0)` is an independent
    /// geometric time with `P(Geo = k) = x0^k (1 - x0)`: row `u` of
    /// `(1 - x0) (Id - x0 M)^{-1} = (1 - x0) Adj(x0) / det(x0)`.
    pub fn geometric_stop_law(&self, u: usize, x0: &Rational) -> Result<Vec<Rational>, HittingError> {
        self.check_state(u)?;
        if !(x0 > &Rational::zero() && x0 < &Rational::one()) {
            return Err(HittingError::InvalidArgument(format!("x0 = {x0} is not in (0, 1)")));
        }
        let det = self.bundle.det_poly.eval(x0);
        let scale = (Rational::one() - x0) / det;
        Ok((0..self.dim())
            .map(|v| self.adj.get(u, v).eval(x0) * &scale)
            .collect())
    }
}

/// `(Id - x M*v)^{-1} (x M e_v)`: the column `G_{.,v}^{>=1}`.
fn taboo_column(chain: &Chain, v: usize) -> Result<Vec<RationalFunction>, HittingError> {
    let taboo = chain.zero_column(v)?;
    let a = id_minus_x(&taboo);
    let b: Vec<Polynomial> = (0..chain.dim())
        .map(|u| Polynomial::monomial(chain.entry(u, v).clone(), 1))
        .collect();
    solve_poly_cramer(&a, &b).ok_or(HittingError::Algebra(AlgebraError::DivisionByZeroFunction))
}

/// Numerators over the least common denominator of `fs`.
fn common_denominator(fs: &[RationalFunction]) -> (Vec<Polynomial>, Polynomial) {
    let den = fs.iter().fold(Polynomial::one(), |l, f| {
        let g = Polynomial::gcd(&l, f.den());
        (&l * f.den()).exact_div(&g).expect("gcd divides the product")
    });
    let nums = fs
        .iter()
        .map(|f| f.num() * &den.exact_div(f.den()).expect("lcm is a multiple"))
        .collect();
    (nums, den)
}

fn x_times(m: &Matrix<Rational>) -> Matrix<Polynomial> {
    m.map(|r| Polynomial::monomial(r.clone(), 1))
}

fn poly_matrix_power(m: &Matrix<Polynomial>, e: usize) -> Matrix<Polynomial> {
    let n = m.rows();
    let mut out = Matrix::from_fn(n, n, |i, j| if i == j { Polynomial::one() } else { Polynomial::zero() });
    for _ in 0..e {
        out = Matrix::from_fn(n, n, |i, j| {
            (0..n).fold(Polynomial::zero(), |acc, k| &acc + &(&out[(i, k)] * &m[(k, j)]))
        });
    }
    out
}

// Free-function entry points; each builds a fresh analysis.

pub fn stationary(chain: &Chain) -> Result<Vec<Rational>, HittingError> {
    Ok(HittingAnalysis::new(chain)?.stationary())
}

pub fn hitting_gf(chain: &Chain, u: usize, v: usize, t: usize) -> Result<HittingGF, HittingError> {
    HittingAnalysis::new(chain)?.gf(u, v, t)
}

pub fn return_gf(chain: &Chain, u: usize) -> Result<RationalFunction, HittingError> {
    HittingAnalysis::new(chain)?.return_gf(u)
}

pub fn hitting_distribution(chain: &Chain, u: usize, v: usize, m_max: usize) -> Result<Vec<Rational>, HittingError> {
    HittingAnalysis::new(chain)?.hitting_distribution(u, v, m_max)
}

pub fn factorial_moments(chain: &Chain, k_max: usize) -> Result<MomentTable, HittingError> {
    HittingAnalysis::new(chain)?.factorial_moments(k_max)
}

pub fn kemeny(chain: &Chain) -> Result<KemenyResult, HittingError> {
    HittingAnalysis::new(chain)?.kemeny()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;
    use crate::samples::random_irreducible;
    use crate::testutil::{example4, lazy2, swap2};

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_i64s(c)
    }

    #[test]
    fn example_stationary() {
        let rho = stationary(&example4()).unwrap();
        let expected: Vec<Rational> = [209, 396, 475, 296].iter().map(|&n| rat(n, 1376)).collect();
        assert_eq!(rho, expected);
        assert_eq!(stationary(&swap2()).unwrap(), vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn stationary_is_fixed_point() {
        for c in [example4(), lazy2(), random_irreducible(3, 6, 4)] {
            let rho = stationary(&c).unwrap();
            let d = c.dim();
            for j in 0..d {
                let s: Rational = (0..d).map(|i| &rho[i] * c.entry(i, j)).sum();
                assert_eq!(s, rho[j]);
            }
            assert_eq!(rho.iter().sum::<Rational>(), rat(1, 1));
            assert!(rho.iter().all(|r| r > &rat(0, 1)));
        }
    }

    #[test]
    fn example_gf_entries() {
        let a = HittingAnalysis::new(&example4()).unwrap();
        // G_{1,2} = x(2x^2 - 11x - 24) / ((x-12)(x-4)(2x-3))
        let num = &p(&[0, 1]) * &p(&[-24, -11, 2]);
        let den = &(&p(&[-12, 1]) * &p(&[-4, 1])) * &p(&[-3, 2]);
        assert_eq!(a.gf(0, 1, 0).unwrap().gf, RationalFunction::new(num, den).unwrap());
        // G_{2,1} = x(7x+12)(x-12) / (127x^3 - 48x^2 + 1440x - 1728)
        let num = &(&p(&[0, 1]) * &p(&[12, 7])) * &p(&[-12, 1]);
        let den = p(&[-1728, 1440, -48, 127]);
        assert_eq!(a.gf(1, 0, 0).unwrap().gf, RationalFunction::new(num, den).unwrap());
        // G_{4,3} = -x(11x - 36)(5x - 24) / (29x^3 - 360x^2 + 1584x - 1728)
        let num = -(&(&p(&[0, 1]) * &p(&[-36, 11])) * &p(&[-24, 5]));
        let den = p(&[-1728, 1584, -360, 29]);
        assert_eq!(a.gf(3, 2, 0).unwrap().gf, RationalFunction::new(num, den).unwrap());
        // G_{1,4} = x(17x^2 + 21x + 36) / (5x^3 + 69x^2 - 432x + 432)
        let num = &p(&[0, 1]) * &p(&[36, 21, 17]);
        let den = p(&[432, -432, 69, 5]);
        assert_eq!(a.gf(0, 3, 0).unwrap().gf, RationalFunction::new(num, den).unwrap());
        for u in 0..4 {
            assert_eq!(a.gf(u, u, 0).unwrap().gf, RationalFunction::one());
        }
    }

    #[test]
    fn swap_return_is_deterministic() {
        let a = HittingAnalysis::new(&swap2()).unwrap();
        let x2 = RationalFunction::from_poly(p(&[0, 0, 1]));
        assert_eq!(a.gf(0, 0, 1).unwrap().gf, x2);
        assert_eq!(a.return_gf(0).unwrap(), x2);
        assert_eq!(a.gf(0, 1, 0).unwrap().gf, RationalFunction::from_poly(p(&[0, 1])));
        // tau_2^{>=3} from 1: at time 3 the walk is at 2.
        assert_eq!(a.gf(0, 1, 3).unwrap().gf, RationalFunction::from_poly(p(&[0, 0, 0, 1])));
    }

    #[test]
    fn return_gf_is_one_at_one() {
        let a = HittingAnalysis::new(&example4()).unwrap();
        for u in 0..4 {
            let r = a.return_gf(u).unwrap();
            assert_eq!(r.eval(&rat(1, 1)).unwrap(), rat(1, 1));
            assert_eq!(r, a.gf(u, u, 1).unwrap().gf);
        }
        // Worked example, u = 1: 1 - det/pi_1 evaluated at 1/2 from the closed-form polynomials.
        let det_half = (rat(-1, 2) * (rat(5, 8) - rat(15, 4) + rat(27, 1) - rat(216, 1))) / rat(216, 1);
        let pi1_half = rat(1, 1) - rat(5, 12) + rat(1, 144) - rat(127, 13824);
        assert_eq!(
            a.return_gf(0).unwrap().eval(&rat(1, 2)).unwrap(),
            rat(1, 1) - det_half / pi1_half
        );
    }

    #[test]
    fn gf_invariants() {
        for c in [example4(), lazy2(), random_irreducible(11, 5, 3)] {
            let a = HittingAnalysis::new(&c).unwrap();
            let d = c.dim();
            for t in 0..=3 {
                for v in 0..d {
                    let col = a.gf_column(v, t).unwrap();
                    for (u, g) in col.iter().enumerate() {
                        let at0 = g.eval(&rat(0, 1)).unwrap();
                        let expect0 = if t == 0 && u == v { rat(1, 1) } else { rat(0, 1) };
                        assert_eq!(at0, expect0);
                        assert_eq!(g.eval(&rat(1, 1)).unwrap(), rat(1, 1));
                        for coeff in g.series(12).unwrap() {
                            assert!(coeff >= rat(0, 1) && coeff <= rat(1, 1));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn shift_cap_is_enforced() {
        let a = HittingAnalysis::new(&swap2()).unwrap().with_t_max(3);
        assert_eq!(
            a.gf(0, 1, 4).unwrap_err(),
            HittingError::ShiftTooLarge { t: 4, t_max: 3 }
        );
        assert!(matches!(a.gf(0, 2, 0), Err(HittingError::Chain(_))));
    }

    #[test]
    fn geometric_stop_law_swap() {
        let a = HittingAnalysis::new(&swap2()).unwrap();
        // Even number of steps with probability sum_k (1/2)(1/2)^{2k} = 2/3.
        assert_eq!(a.geometric_stop_law(0, &rat(1, 2)).unwrap(), vec![rat(2, 3), rat(1, 3)]);
        assert!(a.geometric_stop_law(0, &rat(1, 1)).is_err());
    }

    #[test]
    fn geometric_stop_law_matches_generating_functions() {
        let c = example4();
        let a = HittingAnalysis::new(&c).unwrap();
        let x0 = rat(1, 2);
        let det = a.bundle().det_poly.eval(&x0);
        for u in 0..4 {
            let law = a.geometric_stop_law(u, &x0).unwrap();
            assert_eq!(law.iter().sum::<Rational>(), rat(1, 1));
            for v in 0..4 {
                let via_g = (rat(1, 1) - &x0) * a.g0(u, v).eval(&x0).unwrap() * a.bundle().pi[v].eval(&x0) / &det;
                assert_eq!(law[v], via_g);
            }
        }
        // Small x0: almost all mass stays at the start.
        let small = a.geometric_stop_law(2, &rat(1, 100)).unwrap();
        assert!(small[2] > rat(99, 100));
    }
}
