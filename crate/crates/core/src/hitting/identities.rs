use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::{HittingAnalysis, HittingError};
use crate::chain::Chain;
use crate::exactalg::{rat, Polynomial, Rational, RationalFunction};

/// Outcome of one exact identity check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    /// First counterexample, when the check fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

type CheckFn = fn(&HittingAnalysis) -> Result<Option<String>, HittingError>;

const CHECKS: [(&str, &str, CheckFn); 10] = [
    ("a", "K-constancy: sum_v G0[u,v] pi_v = K0 for every u", check_k_constancy),
    ("b", "shift: sum_v G>=t[u,v] pi_v = x^t K0 for t = 1, 2", check_shift),
    ("c", "adjugate factorization: G0[u,v] pi_v = Adj[u,v]", check_adjugate_factorization),
    ("d", "renewal split: Adj[u,v]/det = G0[u,v] Adj[v,v]/det", check_renewal_split),
    ("e", "Jacobi: x det' + sum_v G1[v,v] pi_v = 0", check_jacobi),
    ("f", "constancy sum: sum_v G0[u,v] / (1 - G1[v,v]) = 1/(1 - x)", check_constancy_sum),
    ("g", "return identity: 1 - G1[u,u] = det / pi_u", check_return_identity),
    ("h", "second derivative: det''(1) = (1 - d) Z - sum_v pi_v'(1)", check_second_derivative),
    ("i", "variance combination constant over u", check_variance_combination),
    ("j", "tilted-measure constancy at x0 in {1/4, 1/2, 3/4}", check_tilted_constancy),
];

impl HittingAnalysis {
    /// Runs every identity check; failures become report entries.
    pub fn verify_identities(&self) -> IdentityReport {
        let checks = CHECKS
            .par_iter()
            .map(|&(id, name, f)| {
                let witness = match f(self) {
                    Ok(w) => w,
                    Err(e) => Some(format!("error: {e}")),
                };
                IdentityCheck {
                    id,
                    name,
                    passed: witness.is_none(),
                    witness,
                }
            })
            .collect();
        IdentityReport { checks }
    }
}

pub fn verify_identities(chain: &Chain) -> Result<IdentityReport, HittingError> {
    Ok(HittingAnalysis::new(chain)?.verify_identities())
}

fn rf(p: &Polynomial) -> RationalFunction {
    RationalFunction::from_poly(p.clone())
}

fn mismatch(what: String, left: &impl std::fmt::Display, right: &impl std::fmt::Display) -> Option<String> {
    Some(format!("{what}: {left} != {right}"))
}

fn weighted_row_sum(a: &HittingAnalysis, col: impl Fn(usize) -> RationalFunction) -> RationalFunction {
    (0..a.dim()).fold(RationalFunction::zero(), |acc, v| {
        &acc + &col(v).scale_poly(&a.bundle().pi[v])
    })
}

fn check_k_constancy(a: &HittingAnalysis) -> Result<Option<String>, HittingError> {
    let k0 = rf(&a.bundle().k0);
    for u in 0..a.dim() {
        let k = weighted_row_sum(a, |v| a.g0(u, v).clone());
        if k != k0 {
            return Ok(mismatch(format!("u={u}"), &k, &k0));
        }
    }
    Ok(None)
}

fn check_shift(a: &HittingAnalysis) -> Result<Option<String>, HittingError> {
    let d = a.dim();
    #[allow(clippy::needless_range_loop)] // cols is column-major
    for t in 1..=2 {
        let cols = (0..d).map(|v| a.gf_column(v, t)).collect::<Result<Vec<_>, _>>()?;
        let target = rf(&a.bundle().k0.shift_up(t));
        for u in 0..d {
            let k = weighted_row_sum(a, |v| cols[v][u].clone());
            if k != target {
                return Ok(mismatch(format!("t={t} u={u}"), &k, &target));
            }
        }
    }
    Ok(None)
}

fn check_adjugate_factorization(a: &HittingAnalysis) -> Result<Option<String>, HittingError> {
    for u in 0..a.dim() {
        for v in 0..a.dim() {
            let lhs = a.g0(u, v).scale_poly(&a.bundle().pi[v]);
            let rhs = rf(a.adjugate().get(u, v));
            if lhs != rhs {
                return Ok(mismatch(format!("u={u} v={v}"), &lhs, &rhs));
            }
        }
    }
    Ok(None)
}

fn check_renewal_split(a: &HittingAnalysis) -> Result<Option<String>, HittingError> {
    let det = &a.bundle().det_poly;
    for u in 0..a.dim() {
        for v in 0..a.dim() {
            let lhs = RationalFunction::new(a.adjugate().get(u, v).clone(), det.clone())?;
            let diag = RationalFunction::new(a.adjugate().get(v, v).clone(), det.clone())?;
            let rhs = a.g0(u, v) * &diag;
            if lhs != rhs {
                return Ok(mismatch(format!("u={u} v={v}"), &lhs, &rhs));
            }
        }
    }
    Ok(None)
}

fn check_jacobi(a: &HittingAnalysis) -> Result<Option<String>, HittingError> {
    let x_det_prime = rf(&(&Polynomial::x() * &a.bundle().det_poly.derivative(1)));
    let total = &x_det_prime + &weighted_row_sum(a, |v| a.g1(v, v).clone());
    if total.is_zero() {
        Ok(None)
    } else {
        Ok(mismatch("sum".into(), &total, &0))
    }
}

fn check_constancy_sum(a: &HittingAnalysis) -> Result<Option<String>, HittingError> {
    let target = RationalFunction::new(Polynomial::one(), Polynomial::from_i64s(&[1, -1]))?;
    let d = a.dim();
    let returns: Vec<RationalFunction> = (0..d)
        .map(|v| &RationalFunction::one() - a.g1(v, v))
        .collect();
    for u in 0..d {
        let mut sum = RationalFunction::zero();
        for (v, ret) in returns.iter().enumerate() {
            sum = &sum + &a.g0(u, v).checked_div(ret)?;
        }
        if sum != target {
            return Ok(mismatch(format!("u={u}"), &sum, &target));
        }
    }
    Ok(None)
}

fn check_return_identity(a: &HittingAnalysis) -> Result<Option<String>, HittingError> {
    for u in 0..a.dim() {
        let lhs = &RationalFunction::one() - a.g1(u, u);
        let rhs = RationalFunction::new(a.bundle().det_poly.clone(), a.bundle().pi[u].clone())?;
        if lhs != rhs {
            return Ok(mismatch(format!("u={u}"), &lhs, &rhs));
        }
    }
    Ok(None)
}

fn check_second_derivative(a: &HittingAnalysis) -> Result<Option<String>, HittingError> {
    let one = Rational::one();
    let b = a.bundle();
    let lhs = b.det_poly.derivative(2).eval(&one);
    let d = Rational::from_integer(BigInt::from(a.dim()));
    let pi_prime: Rational = b.pi.iter().map(|p| p.derivative(1).eval(&one)).sum();
    let rhs = (Rational::one() - d) * &b.z - pi_prime;
    Ok((lhs != rhs).then(|| format!("{lhs} != {rhs}")))
}

/// `Z/2 Var_u(tau_X^{>=1}) + sum_v E_u(tau_v^{>=1}) pi_v'(1)` per start.
pub(crate) fn variance_combination(a: &HittingAnalysis) -> Result<Vec<Rational>, HittingError> {
    let d = a.dim();
    let rho = a.stationary();
    let moments = a.factorial_moments(2)?;
    let one = Rational::one();
    let pi_prime: Vec<Rational> = a.bundle().pi.iter().map(|p| p.derivative(1).eval(&one)).collect();
    let half_z = &a.bundle().z / rat(2, 1);
    Ok((0..d)
        .map(|u| {
            let mean: Rational = (0..d).map(|v| moments.get(1, u, v) * &rho[v]).sum();
            // E[tau^2] = E[Fac_2(tau)] + E[tau]
            let second: Rational = (0..d)
                .map(|v| (moments.get(2, u, v) + moments.get(1, u, v)) * &rho[v])
                .sum();
            let var = second - &mean * &mean;
            let cross: Rational = (0..d).map(|v| moments.get(1, u, v) * &pi_prime[v]).sum();
            &half_z * var + cross
        })
        .collect())
}

fn check_variance_combination(a: &HittingAnalysis) -> Result<Option<String>, HittingError> {
    let vals = variance_combination(a)?;
    Ok(vals
        .iter()
        .enumerate()
        .find(|(_, v)| *v != &vals[0])
        .map(|(u, v)| format!("u=0 gives {}, u={u} gives {v}", vals[0])))
}

fn check_tilted_constancy(a: &HittingAnalysis) -> Result<Option<String>, HittingError> {
    for x0 in [rat(1, 4), rat(1, 2), rat(3, 4)] {
        let pis: Vec<Rational> = a.bundle().pi.iter().map(|p| p.eval(&x0)).collect();
        let mut first: Option<Rational> = None;
        for u in 0..a.dim() {
            let mut s = Rational::zero();
            for (v, pv) in pis.iter().enumerate() {
                s += a.g0(u, v).eval(&x0)? * pv;
            }
            match &first {
                None => first = Some(s),
                Some(f) if f != &s => return Ok(Some(format!("x0={x0}: u=0 gives {f}, u={u} gives {s}"))),
                _ => {}
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::random_irreducible;
    use crate::testutil::{example4, lazy2, swap2};

    #[test]
    fn all_checks_pass_on_reference_chains() {
        for c in [example4(), swap2(), lazy2(), random_irreducible(77, 5, 4)] {
            let report = verify_identities(&c).unwrap();
            assert_eq!(report.checks.len(), 10);
            let ids: Vec<_> = report.checks.iter().map(|c| c.id).collect();
            assert_eq!(ids, ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]);
            assert!(report.all_passed(), "{:?}", report.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn variance_combination_is_constant_over_starts() {
        let a = HittingAnalysis::new(&example4()).unwrap();
        let combo = variance_combination(&a).unwrap();
        assert!(combo.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn corrupted_generating_function_is_caught() {
        let mut a = HittingAnalysis::new(&example4()).unwrap();
        a.g0[(0, 1)] = a.g0[(0, 1)].scale_poly(&Polynomial::constant(rat(2, 1)));
        let report = a.verify_identities();
        let failed: Vec<_> = report.failures().map(|c| c.id).collect();
        assert!(failed.contains(&"a"));
        assert!(failed.contains(&"c"));
        assert!(report.checks[0].witness.as_deref().unwrap().starts_with("u=0"));
    }
}
