//! The JSON analysis report written by `kemeny analyze`.
//!
//! Every exact quantity is a rational string; `decimal` fields are display
//! annotations with 12 significant digits, rounded half to even.

use num_traits::One;
use serde::Serialize;
use serde_json::Value;

use crate::chain::Chain;
use crate::exactalg::{format_decimal, format_rational, Polynomial, Rational, RationalFunction};
use crate::hitting::{HittingAnalysis, HittingError, IdentityCheck};
use crate::matrix::Matrix;
use crate::mcsim::{simulate_hitting, SimConfig, SimError, Target};

pub const REPORT_VERSION: u32 = 1;
pub const DECIMAL_DIGITS: usize = 12;
/// Tolerance on the spectral Kemeny value, per state.
pub const EIGEN_TOLERANCE_PER_STATE: f64 = 1e-9;
pub const EIGEN_IMAG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactValue {
    pub exact: String,
    pub decimal: String,
}

impl From<&Rational> for ExactValue {
    fn from(r: &Rational) -> Self {
        Self {
            exact: format_rational(r),
            decimal: format_decimal(r, DECIMAL_DIGITS),
        }
    }
}

pub fn poly_json(p: &Polynomial) -> Vec<String> {
    p.coeffs().iter().map(format_rational).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GfJson {
    pub num: Vec<String>,
    pub den: Vec<String>,
}

impl From<&RationalFunction> for GfJson {
    fn from(f: &RationalFunction) -> Self {
        Self {
            num: poly_json(f.num()),
            den: poly_json(f.den()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatePoly {
    pub state: String,
    pub coeffs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KemenyJson {
    pub by_mean_hitting: ExactValue,
    pub by_polynomial: ExactValue,
    /// Floating-point spectral value, rendered to 12 significant digits.
    pub by_eigenvalues: String,
    pub eigen_within_tolerance: bool,
    pub eigen_imag_residual_ok: bool,
    pub q1: ExactValue,
    pub routes_agree: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MomentOrder {
    pub k: usize,
    pub exact: Vec<Vec<String>>,
    pub decimal: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HittingJson {
    /// `G^{>=0}[u][v]`.
    pub t0: Vec<Vec<GfJson>>,
    /// `G^{>=1}[u][v]`.
    pub t1: Vec<Vec<GfJson>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationJson {
    pub seed: u64,
    pub n_paths: usize,
    pub start: String,
    pub empirical_mean: f64,
    pub std_error: f64,
    pub exact_mean: ExactValue,
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub report_version: u32,
    pub chain: Value,
    pub dimension: usize,
    pub stationary: Vec<ExactValue>,
    pub z: ExactValue,
    pub det_poly: Vec<String>,
    pub k0: Vec<String>,
    pub pi: Vec<StatePoly>,
    pub kemeny: KemenyJson,
    pub moments: Vec<MomentOrder>,
    pub hitting: HittingJson,
    pub identities: Vec<IdentityCheck>,
    pub all_identities_passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    pub k_max: usize,
    /// Simulate `tau_X^{>=1}` from the first state with this config.
    pub simulation: Option<SimConfig>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            k_max: 4,
            simulation: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Hitting(#[from] HittingError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

fn matrix_strings(m: &Matrix<Rational>, f: impl Fn(&Rational) -> String) -> Vec<Vec<String>> {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(&f).collect())
        .collect()
}

pub fn build_report(chain: &Chain, opts: &ReportOptions) -> Result<AnalysisReport, ReportError> {
    let analysis = HittingAnalysis::new(chain)?;
    let bundle = analysis.bundle();
    let d = chain.dim();
    let kem = analysis.kemeny()?;
    let exact_kemeny = crate::exactalg::rational::to_f64(&kem.by_mean_hitting);
    let eigen_within_tolerance =
        (kem.by_eigenvalues - exact_kemeny).abs() <= EIGEN_TOLERANCE_PER_STATE * d as f64;
    let moments = analysis.factorial_moments(opts.k_max)?;
    let gf_matrix = |t: usize| -> Result<Vec<Vec<GfJson>>, HittingError> {
        let cols = (0..d)
            .map(|v| analysis.gf_column(v, t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((0..d)
            .map(|u| (0..d).map(|v| GfJson::from(&cols[v][u])).collect())
            .collect())
    };
    let identities = analysis.verify_identities();
    let simulation = match opts.simulation {
        None => None,
        Some(cfg) => {
            let summary = simulate_hitting(chain, 0, Target::Stationary, 1, &cfg)?;
            let exact = crate::exactalg::rational::to_f64(&kem.by_mean_hitting);
            Some(SimulationJson {
                seed: cfg.seed,
                n_paths: cfg.n_paths,
                start: chain.states()[0].clone(),
                empirical_mean: summary.mean,
                std_error: summary.std_error,
                exact_mean: (&kem.by_mean_hitting).into(),
                z_score: summary.z_score(exact),
            })
        }
    };
    Ok(AnalysisReport {
        report_version: REPORT_VERSION,
        chain: chain.to_json(),
        dimension: d,
        stationary: analysis.stationary().iter().map(ExactValue::from).collect(),
        z: (&bundle.z).into(),
        det_poly: poly_json(&bundle.det_poly),
        k0: poly_json(&bundle.k0),
        pi: chain
            .states()
            .iter()
            .zip(&bundle.pi)
            .map(|(s, p)| StatePoly {
                state: s.clone(),
                coeffs: poly_json(p),
            })
            .collect(),
        kemeny: KemenyJson {
            by_mean_hitting: (&kem.by_mean_hitting).into(),
            by_polynomial: (&kem.by_polynomial).into(),
            by_eigenvalues: format_decimal(
                &Rational::from_float(kem.by_eigenvalues).unwrap_or_else(Rational::one),
                DECIMAL_DIGITS,
            ),
            eigen_within_tolerance,
            eigen_imag_residual_ok: kem.eigen_imag_residual < EIGEN_IMAG_TOLERANCE,
            q1: (&kem.q1).into(),
            routes_agree: kem.by_mean_hitting == kem.by_polynomial,
        },
        moments: moments
            .by_order
            .iter()
            .enumerate()
            .map(|(k, m)| MomentOrder {
                k,
                exact: matrix_strings(m, format_rational),
                decimal: matrix_strings(m, |r| format_decimal(r, DECIMAL_DIGITS)),
            })
            .collect(),
        hitting: HittingJson {
            t0: gf_matrix(0)?,
            t1: gf_matrix(1)?,
        },
        all_identities_passed: identities.all_passed(),
        identities: identities.checks,
        simulation,
    })
}

impl AnalysisReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
