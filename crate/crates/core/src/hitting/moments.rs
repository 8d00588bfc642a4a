use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::spectral::{eigenvalues_from_k0, kemeny_from_eigenvalues};
use super::{solve_rational, HittingAnalysis, HittingError};
use crate::exactalg::Rational;
use crate::matrix::Matrix;

/// `E_u[Fac_k(tau_v^{>=1})]` for `k = 0..=k_max`, where
/// `Fac_k(n) = n (n-1) ... (n-k+1)`; the `k`-th derivative of
/// `G_{u,v}^{>=1}` at one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentTable {
    /// `by_order[k][(u, v)]`.
    pub by_order: Vec<Matrix<Rational>>,
}

impl MomentTable {
    pub fn k_max(&self) -> usize {
        self.by_order.len() - 1
    }

    pub fn get(&self, k: usize, u: usize, v: usize) -> &Rational {
        &self.by_order[k][(u, v)]
    }
}

/// Kemeny's constant computed three ways.
#[derive(Debug, Clone, PartialEq)]
pub struct KemenyResult {
    /// `sum_v E_u(tau_v^{>=1}) rho_v`, identical for every start `u`.
    pub by_mean_hitting: Rational,
    /// `d - K0'(1) / Z`.
    pub by_polynomial: Rational,
    /// `1 + sum_i 1 / (1 - lambda_i)` over the non-unit eigenvalues.
    pub by_eigenvalues: f64,
    /// Largest imaginary part left after summing the spectral terms.
    pub eigen_imag_residual: f64,
    /// `Q^{>=1} = Z * constant`.
    pub q1: Rational,
    pub z: Rational,
}

/// Both sides of the top-order factorial-moment relation for one start
/// state, `n >= d + 1`:
/// `Z E_u[Fac_n(tau_X)] / n! = -sum_{s=1}^{d-1} sum_v
/// E_u[Fac_{n-s}(tau_v)] / (n-s)! * pi_v^{(s)}(1) / s!`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorialTail {
    pub u: usize,
    pub lhs: Rational,
    pub rhs: Rational,
}

fn factorial(n: usize) -> Rational {
    Rational::from_integer((1..=n).map(BigInt::from).product())
}

impl HittingAnalysis {
    /// `P_u(tau_v^{>=0} = m)` for `m = 0..=m_max`.
    ///
    /// The first `d` terms are power-series coefficients of
    /// `Adj_{u,v} / pi_v`; beyond that, since `G_{u,v}^{>=0} pi_v` is a
    /// polynomial of degree below `d`, the law obeys the linear recursion
    /// `P(m) = -sum_{s=1}^{d-1} P(m-s) [x^s] pi_v`.
    pub fn hitting_distribution(&self, u: usize, v: usize, m_max: usize) -> Result<Vec<Rational>, HittingError> {
        self.check_state(u)?;
        self.check_state(v)?;
        let d = self.dim();
        let base_len = d.min(m_max + 1);
        let pi_v = &self.bundle.pi[v];
        let mut law = crate::exactalg::RationalFunction::new(self.adj.get(u, v).clone(), pi_v.clone())?
            .series(base_len)?;
        let taps: Vec<Rational> = (1..d).map(|s| pi_v.coeff(s)).collect();
        for m in base_len..=m_max {
            let next = taps
                .iter()
                .enumerate()
                .fold(Rational::zero(), |acc, (i, c)| acc - c * &law[m - 1 - i]);
            law.push(next);
        }
        Ok(law)
    }

    /// Factorial moments of the positive hitting times, from the Taylor
    /// expansion of each `G_{u,v}^{>=1}` at `x = 1`. Orders up to about 8 are
    /// cheap; cost grows with the square of the order.
    pub fn factorial_moments(&self, k_max: usize) -> Result<MomentTable, HittingError> {
        let d = self.dim();
        let mut by_order = vec![Matrix::from_fn(d, d, |_, _| Rational::zero()); k_max + 1];
        for u in 0..d {
            for v in 0..d {
                let derivs = self.g1(u, v).derivatives_at(&Rational::one(), k_max)?;
                for (k, val) in derivs.into_iter().enumerate() {
                    by_order[k][(u, v)] = val;
                }
            }
        }
        Ok(MomentTable { by_order })
    }

    /// `E_u(tau_v^{>=1})` for all pairs by exact linear solves: for each `v`,
    /// `h = 1 + M*v h` where `M*v` is `M` with column `v` zeroed.
    pub fn mean_hitting_times(&self) -> Matrix<Rational> {
        let d = self.dim();
        let mut out = Matrix::from_fn(d, d, |_, _| Rational::zero());
        let ones = vec![Rational::one(); d];
        for v in 0..d {
            let taboo = self.chain().zero_column(v).expect("state in range");
            let a = Matrix::from_fn(d, d, |i, j| {
                let id = if i == j { Rational::one() } else { Rational::zero() };
                id - &taboo[(i, j)]
            });
            let h = solve_rational(&a, &ones).expect("Id - M*v is invertible for irreducible chains");
            for u in 0..d {
                out[(u, v)] = h[u].clone();
            }
        }
        out
    }

    /// Kemeny's constant by mean hitting times (checked constant over every
    /// start), by the polynomial `K0`, and numerically by eigenvalues.
    ///
    /// The polynomial route: `K0(x) = prod_i (1 - x lambda_i)` over the
    /// non-unit eigenvalues, so `K0'(1) / K0(1) = -sum_i lambda_i / (1 -
    /// lambda_i) = (d - 1) - sum_i 1 / (1 - lambda_i)`. With `K0(1) = Z` the
    /// constant `1 + sum_i 1/(1 - lambda_i)` equals `d - K0'(1) / Z`.
    pub fn kemeny(&self) -> Result<KemenyResult, HittingError> {
        let d = self.dim();
        let rho = self.stationary();
        let mean = self.mean_hitting_times();
        let per_start: Vec<Rational> = (0..d)
            .map(|u| (0..d).map(|v| &mean[(u, v)] * &rho[v]).sum())
            .collect();
        ensure_constant(&per_start)?;
        let by_mean_hitting = per_start[0].clone();
        let z = self.bundle.z.clone();
        let k0_prime = self.bundle.k0.derivative(1).eval(&Rational::one());
        let by_polynomial = Rational::from_integer(BigInt::from(d)) - k0_prime / &z;
        let eig = eigenvalues_from_k0(&self.bundle.k0, d);
        let spectral = kemeny_from_eigenvalues(&eig);
        Ok(KemenyResult {
            q1: &z * &by_mean_hitting,
            by_mean_hitting,
            by_polynomial,
            by_eigenvalues: spectral.value,
            eigen_imag_residual: spectral.imag_residual,
            z,
        })
    }

    /// `Q^{>=t} = sum_v E_u(tau_v^{>=t}) pi_v(1)` for `t = 0..=t_max`, each
    /// checked identical over `u`. Expectations come from differentiating
    /// `G^{>=t}` at one.
    pub fn shifted_q(&self, t_max: usize) -> Result<Vec<Rational>, HittingError> {
        let d = self.dim();
        let pi1 = self.bundle.pi_at_one();
        let one = Rational::one();
        (0..=t_max)
            .map(|t| {
                let mut per_start = vec![Rational::zero(); d];
                for (v, pv) in pi1.iter().enumerate() {
                    let col = self.gf_column(v, t)?;
                    for (u, g) in col.iter().enumerate() {
                        let mean = g.derivatives_at(&one, 1)?.pop().expect("two terms");
                        per_start[u] += mean * pv;
                    }
                }
                ensure_constant(&per_start)?;
                Ok(per_start.swap_remove(0))
            })
            .collect()
    }

    /// Both sides of the order-`n` factorial-moment tail relation, one entry
    /// per start state. Requires `n >= d + 1`.
    pub fn factorial_tail(&self, n: usize) -> Result<Vec<FactorialTail>, HittingError> {
        let d = self.dim();
        if n < d + 1 {
            return Err(HittingError::InvalidArgument(format!(
                "tail relation needs n >= d + 1 = {}, got {n}",
                d + 1
            )));
        }
        let moments = self.factorial_moments(n)?;
        let pi_taylor = self.pi_taylor_at_one();
        Ok((0..d)
            .map(|u| {
                let lhs: Rational = (0..d)
                    .map(|v| moments.get(n, u, v) / factorial(n) * &pi_taylor[v][0])
                    .sum();
                let rhs: Rational = (1..d)
                    .flat_map(|s| (0..d).map(move |v| (s, v)))
                    .map(|(s, v)| moments.get(n - s, u, v) / factorial(n - s) * &pi_taylor[v][s])
                    .sum();
                FactorialTail { u, lhs, rhs: -rhs }
            })
            .collect())
    }

    /// `pi_v^{(s)}(1) / s!` for `s = 0..d`.
    pub(crate) fn pi_taylor_at_one(&self) -> Vec<Vec<Rational>> {
        let d = self.dim();
        self.bundle
            .pi
            .iter()
            .map(|p| {
                let shifted = p.taylor_shift(&Rational::one());
                (0..d).map(|s| shifted.coeff(s)).collect()
            })
            .collect()
    }
}

pub(crate) fn ensure_constant(values: &[Rational]) -> Result<(), HittingError> {
    for (u, val) in values.iter().enumerate().skip(1) {
        if val != &values[0] {
            return Err(HittingError::ConstancyViolation {
                u: 0,
                u_prime: u,
                left: values[0].to_string(),
                right: val.to_string(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{rat, Polynomial};
    use crate::samples::random_irreducible;
    use crate::testutil::{example4, lazy2, swap2};

    #[test]
    fn distribution_edge_cases() {
        let a = HittingAnalysis::new(&swap2()).unwrap();
        assert_eq!(a.hitting_distribution(0, 0, 3).unwrap(), vec![rat(1, 1), rat(0, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(a.hitting_distribution(0, 1, 3).unwrap(), vec![rat(0, 1), rat(1, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(a.hitting_distribution(1, 0, 0).unwrap(), vec![rat(0, 1)]);
    }

    #[test]
    fn distribution_matches_series_expansion() {
        let c = random_irreducible(5, 5, 4);
        let a = HittingAnalysis::new(&c).unwrap();
        for u in 0..5 {
            for v in 0..5 {
                let law = a.hitting_distribution(u, v, 30).unwrap();
                assert_eq!(law, a.gf(u, v, 0).unwrap().gf.series(31).unwrap());
            }
        }
    }

    #[test]
    fn adjugate_coefficients_vanish_past_degree() {
        // [x^m] (G^{>=0}_{u,v} pi_v) = 0 for m > d - 1.
        let c = example4();
        let a = HittingAnalysis::new(&c).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                let law = a.hitting_distribution(u, v, 12).unwrap();
                let pi = &a.bundle().pi[v];
                for m in 4..=12 {
                    let conv: Rational = (0..=m).map(|s| &law[m - s] * pi.coeff(s)).sum();
                    assert!(conv.is_zero());
                }
            }
        }
    }

    #[test]
    fn moment_table_basics() {
        let a = HittingAnalysis::new(&example4()).unwrap();
        let t = a.factorial_moments(3).unwrap();
        assert!(t.by_order[0].iter().all(|x| x.is_one()));
        // E_1(tau_1^{>=1}) = 1/rho_1
        assert_eq!(t.get(1, 0, 0), &rat(1376, 209));
        let rho = a.stationary();
        for v in 0..4 {
            assert_eq!(t.get(1, v, v) * &rho[v], rat(1, 1));
        }
        let swap = factorial_moments_of(&swap2(), 2);
        assert_eq!(swap.get(1, 0, 1), &rat(1, 1));
        assert_eq!(swap.get(1, 0, 0), &rat(2, 1));
        assert_eq!(swap.get(2, 0, 0), &rat(2, 1));
    }

    fn factorial_moments_of(c: &crate::Chain, k: usize) -> MomentTable {
        HittingAnalysis::new(c).unwrap().factorial_moments(k).unwrap()
    }

    #[test]
    fn linear_solve_means_match_gf_derivatives() {
        for c in [example4(), lazy2(), random_irreducible(21, 6, 4)] {
            let a = HittingAnalysis::new(&c).unwrap();
            let by_solve = a.mean_hitting_times();
            let by_gf = a.factorial_moments(1).unwrap();
            assert_eq!(by_solve, by_gf.by_order[1]);
        }
    }

    #[test]
    fn kemeny_swap() {
        let k = HittingAnalysis::new(&swap2()).unwrap().kemeny().unwrap();
        assert_eq!(k.by_mean_hitting, rat(3, 2));
        assert_eq!(k.by_polynomial, rat(3, 2));
        assert!((k.by_eigenvalues - 1.5).abs() < 1e-12);
    }

    #[test]
    fn kemeny_worked_example() {
        // Independent arithmetic: 4 - (-13/72) / (43/54).
        let expected = rat(4, 1) - rat(-13, 72) / rat(43, 54);
        assert_eq!(expected, rat(727, 172));
        let k = HittingAnalysis::new(&example4()).unwrap().kemeny().unwrap();
        assert_eq!(k.by_mean_hitting, expected);
        assert_eq!(k.by_polynomial, expected);
        assert_eq!(k.q1, &k.z * &expected);
        assert!((k.by_eigenvalues - 727.0 / 172.0).abs() <= 4e-9);
        assert!(k.eigen_imag_residual < 1e-10);
    }

    #[test]
    fn shift_law() {
        for c in [example4(), swap2(), random_irreducible(2, 4, 3)] {
            let a = HittingAnalysis::new(&c).unwrap();
            let q = a.shifted_q(5).unwrap();
            let z = &a.bundle().z;
            for (t, qt) in q.iter().enumerate() {
                assert_eq!(qt, &(z * rat(t as i64, 1) + &q[0]));
            }
            assert_eq!(q[1], a.kemeny().unwrap().q1);
        }
    }

    #[test]
    fn full_factorial_expansion_of_k1() {
        // K^{>=1}(x) = x K0(x); its Taylor coefficients at one equal
        // sum_{s} sum_v E_u[Fac_{n-s}]/(n-s)! * pi_v^{(s)}(1)/s!.
        let c = example4();
        let a = HittingAnalysis::new(&c).unwrap();
        let d = c.dim();
        let n_max = d + 2;
        let k1 = &Polynomial::x() * &a.bundle().k0;
        let k1_taylor = k1.taylor_shift(&rat(1, 1));
        let moments = a.factorial_moments(n_max).unwrap();
        let pit = a.pi_taylor_at_one();
        for u in 0..d {
            for n in 0..=n_max {
                let rhs: Rational = (0..=n.min(d - 1))
                    .flat_map(|s| (0..d).map(move |v| (s, v)))
                    .map(|(s, v)| moments.get(n - s, u, v) / factorial(n - s) * &pit[v][s])
                    .sum();
                assert_eq!(rhs, k1_taylor.coeff(n), "u={u} n={n}");
            }
        }
    }

    #[test]
    fn tail_value_depends_on_start() {
        let a = HittingAnalysis::new(&example4()).unwrap();
        let tails = a.factorial_tail(5).unwrap();
        assert_ne!(tails[0].lhs, tails[1].lhs);
    }

    #[test]
    fn factorial_tail_relation() {
        for c in [example4(), swap2(), lazy2(), random_irreducible(9, 3, 4)] {
            let a = HittingAnalysis::new(&c).unwrap();
            let tails = a.factorial_tail(c.dim() + 1).unwrap();
            for t in &tails {
                assert_eq!(t.lhs, t.rhs);
            }
            assert!(a.factorial_tail(c.dim()).is_err());
        }
    }
}
