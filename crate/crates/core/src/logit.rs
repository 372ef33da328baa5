//! Binary logit: link, likelihood, Newton/IRLS estimation and the
//! likelihood-ratio summaries reported with a fit.

use thiserror::Error;

use crate::linalg::SymMatrix;
use crate::par::{self, Execution};
use crate::special;
use crate::tabulate::AnalysisTable;

/// Label of the leading column of ones.
pub const INTERCEPT: &str = "Constant";

/// Relative pivot tolerance for rank detection in `X'WX`.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// A linear predictor beyond this magnitude, still growing when the
/// iterations stop, is taken as divergence of the MLE.
pub const SEPARATION_ETA: f64 = 30.0;

const MAX_HALVINGS: usize = 60;

#[derive(Debug, Error, PartialEq)]
pub enum LogitError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value in row {row}, column {column}")]
    NonFinite { row: usize, column: String },
    #[error("response must be 0 or 1; row {row} has {value}")]
    NonBinary { row: usize, value: f64 },
    #[error("need more observations ({n}) than parameters ({params})")]
    TooFewObservations { n: usize, params: usize },
    #[error("column {0:?} is constant")]
    ConstantColumn(String),
    #[error("first column must be an intercept of ones")]
    MissingIntercept,
    #[error("response has a single class; the model is not identifiable")]
    NonIdentifiable,
    #[error("collinear predictors: {}", .0.join(", "))]
    Collinear(Vec<String>),
    #[error("perfect separation: linear predictor reached |eta| = {max_eta:.1} after {iterations} iterations and is still growing")]
    PerfectSeparation { max_eta: f64, iterations: usize },
    #[error("probability must lie strictly between 0 and 1, got {0}")]
    InvalidProbability(f64),
    #[error("cutoff must lie strictly between 0 and 1, got {0}")]
    InvalidCutoff(f64),
}

/// `N x (k+1)` regressors with a leading intercept, and a 0/1 response.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n: usize,
    p: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    names: Vec<String>,
}

impl DesignMatrix {
    /// Validates a row-major matrix whose first column is the intercept.
    pub fn new(x: Vec<f64>, names: Vec<String>, y: Vec<f64>) -> Result<Self, LogitError> {
        let p = names.len();
        let n = y.len();
        if p == 0 || x.len() != n * p {
            return Err(LogitError::DimensionMismatch(format!(
                "{} values for {n} rows x {p} columns",
                x.len()
            )));
        }
        if n <= p {
            return Err(LogitError::TooFewObservations { n, params: p });
        }
        for (idx, v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(LogitError::NonFinite { row: idx / p, column: names[idx % p].clone() });
            }
        }
        if (0..n).any(|i| x[i * p] != 1.0) {
            return Err(LogitError::MissingIntercept);
        }
        for (row, &value) in y.iter().enumerate() {
            if value != 0.0 && value != 1.0 {
                return Err(LogitError::NonBinary { row, value });
            }
        }
        for j in 1..p {
            let first = x[j];
            if (1..n).all(|i| x[i * p + j] == first) {
                return Err(LogitError::ConstantColumn(names[j].clone()));
            }
        }
        Ok(DesignMatrix { n, p, x, y, names })
    }

    /// Prepends the intercept to row-major `predictors`.
    pub fn with_intercept(
        predictors: &[Vec<f64>],
        predictor_names: &[impl AsRef<str>],
        y: Vec<f64>,
    ) -> Result<Self, LogitError> {
        if predictors.len() != y.len() {
            return Err(LogitError::DimensionMismatch(format!(
                "{} predictor rows for {} responses",
                predictors.len(),
                y.len()
            )));
        }
        let k = predictor_names.len();
        let mut x = Vec::with_capacity(predictors.len() * (k + 1));
        for (i, row) in predictors.iter().enumerate() {
            if row.len() != k {
                return Err(LogitError::DimensionMismatch(format!(
                    "row {i} has {} values, expected {k}",
                    row.len()
                )));
            }
            x.push(1.0);
            x.extend_from_slice(row);
        }
        let mut names = vec![INTERCEPT.to_string()];
        names.extend(predictor_names.iter().map(|s| s.as_ref().to_string()));
        DesignMatrix::new(x, names, y)
    }

    pub fn from_table(table: &AnalysisTable) -> Result<Self, LogitError> {
        Self::with_intercept(&table.rows, &table.names, table.response.clone())
    }

    pub fn n_obs(&self) -> usize {
        self.n
    }

    /// Number of columns including the intercept.
    pub fn n_params(&self) -> usize {
        self.p
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.x[i * self.p + j]).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Copy with column `j` replaced by `f(old value)`.
    pub fn map_column(&self, j: usize, f: impl Fn(f64) -> f64) -> Result<Self, LogitError> {
        let mut x = self.x.clone();
        for i in 0..self.n {
            x[i * self.p + j] = f(x[i * self.p + j]);
        }
        DesignMatrix::new(x, self.names.clone(), self.y.clone())
    }

    fn check_beta(&self, beta: &[f64]) -> Result<(), LogitError> {
        if beta.len() != self.p {
            return Err(LogitError::DimensionMismatch(format!(
                "{} coefficients for {} columns",
                beta.len(),
                self.p
            )));
        }
        Ok(())
    }

    /// Linear predictor `X beta`.
    pub fn eta(&self, beta: &[f64], exec: Execution) -> Result<Vec<f64>, LogitError> {
        self.check_beta(beta)?;
        Ok(par::map_range(exec, self.n, |i| dot(self.row(i), beta)))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Logistic function `e^eta / (1 + e^eta)`, evaluated without overflow.
pub fn logistic(eta: f64) -> f64 {
    if eta < 0.0 {
        let e = eta.exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + (-eta).exp())
    }
}

/// `ln(1 + e^eta)` without overflow.
pub fn softplus(eta: f64) -> f64 {
    eta.max(0.0) + (-eta.abs()).exp().ln_1p()
}

/// `p(1 - p)` at `logistic(eta)`, accurate in both tails.
fn logistic_variance(eta: f64) -> f64 {
    let e = (-eta.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

/// Fitted probabilities `logistic(X beta)`.
pub fn predict_prob(data: &DesignMatrix, beta: &[f64]) -> Result<Vec<f64>, LogitError> {
    Ok(data.eta(beta, Execution::default())?.into_iter().map(logistic).collect())
}

/// Probability for a single covariate row (intercept included).
pub fn predict_row(row: &[f64], beta: &[f64]) -> f64 {
    logistic(dot(row, beta))
}

/// `p / (1 - p)`.
pub fn odds(p: f64) -> Result<f64, LogitError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(LogitError::InvalidProbability(p));
    }
    Ok(p / (1.0 - p))
}

/// `ln(p / (1 - p))`, the inverse of `logistic`.
pub fn log_odds(p: f64) -> Result<f64, LogitError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(LogitError::InvalidProbability(p));
    }
    Ok(p.ln() - (-p).ln_1p())
}

/// `sum_i y_i eta_i - ln(1 + e^eta_i)`.
pub fn log_likelihood(beta: &[f64], data: &DesignMatrix) -> Result<f64, LogitError> {
    data.check_beta(beta)?;
    Ok(ll_at(beta, data, Execution::default()))
}

fn ll_at(beta: &[f64], data: &DesignMatrix, exec: Execution) -> f64 {
    par::sum_range(exec, data.n, |i| {
        let eta = dot(data.row(i), beta);
        data.y[i] * eta - softplus(eta)
    })
}

/// Score vector `X'(y - p)`.
pub fn gradient(beta: &[f64], data: &DesignMatrix, exec: Execution) -> Result<Vec<f64>, LogitError> {
    data.check_beta(beta)?;
    Ok(par::sum_vectors(exec, data.n, data.p, |i, acc| {
        let row = data.row(i);
        let r = data.y[i] - predict_row(row, beta);
        for (a, x) in acc.iter_mut().zip(row) {
            *a += x * r;
        }
    }))
}

/// Fisher information `X'WX` with `W = diag(p(1 - p))`.
pub fn information(beta: &[f64], data: &DesignMatrix, exec: Execution) -> Result<SymMatrix, LogitError> {
    data.check_beta(beta)?;
    let p = data.p;
    let packed = par::sum_vectors(exec, data.n, p * (p + 1) / 2, |i, acc| {
        let row = data.row(i);
        let w = logistic_variance(dot(row, beta));
        let mut idx = 0;
        for a in 0..p {
            let wa = w * row[a];
            for b in a..p {
                acc[idx] += wa * row[b];
                idx += 1;
            }
        }
    });
    Ok(SymMatrix::from_upper(p, &packed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Convergence threshold on the absolute change in log-likelihood.
    pub tol: f64,
    pub max_iter: usize,
    pub exec: Execution,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { tol: 1e-10, max_iter: 100, exec: Execution::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogitFit {
    pub names: Vec<String>,
    pub beta: Vec<f64>,
    pub cov: SymMatrix,
    pub std_err: Vec<f64>,
    pub z: Vec<f64>,
    pub p: Vec<f64>,
    /// Log-likelihood at the estimate.
    pub ll: f64,
    /// Log-likelihood of the intercept-only model.
    pub ll0: f64,
    pub n_obs: usize,
    pub n_iter: usize,
    pub converged: bool,
    /// Log-likelihood after each accepted iteration, starting at beta = 0.
    pub ll_trace: Vec<f64>,
}

impl LogitFit {
    /// Assembles a fit from coefficients and covariance, deriving standard
    /// errors, z statistics and two-sided p-values.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        names: Vec<String>,
        beta: Vec<f64>,
        cov: SymMatrix,
        ll: f64,
        ll0: f64,
        n_obs: usize,
        n_iter: usize,
        converged: bool,
    ) -> Self {
        let std_err: Vec<f64> = cov.diag().into_iter().map(|v| v.max(0.0).sqrt()).collect();
        let z: Vec<f64> = beta.iter().zip(&std_err).map(|(b, s)| b / s).collect();
        let p = z.iter().map(|&z| special::two_sided_p(z)).collect();
        LogitFit { names, beta, cov, std_err, z, p, ll, ll0, n_obs, n_iter, converged, ll_trace: Vec::new() }
    }

    /// Number of slope coefficients (excluding the intercept).
    pub fn n_predictors(&self) -> usize {
        self.beta.len() - 1
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Intercept-only log-likelihood `N [ybar ln ybar + (1 - ybar) ln(1 - ybar)]`.
pub fn null_log_likelihood(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let n1: f64 = y.iter().sum();
    let n0 = n - n1;
    let ybar = n1 / n;
    let term = |count: f64, q: f64| if count > 0.0 { count * q.ln() } else { 0.0 };
    term(n1, ybar) + term(n0, 1.0 - ybar)
}

/// Maximum-likelihood fit by Newton-Raphson (IRLS) from beta = 0, halving
/// any step that lowers the log-likelihood.
pub fn fit(data: &DesignMatrix, opts: &FitOptions) -> Result<LogitFit, LogitError> {
    let n1: f64 = data.y.iter().sum();
    if n1 == 0.0 || n1 == data.n as f64 {
        return Err(LogitError::NonIdentifiable);
    }
    let exec = opts.exec;
    let collinear = |dependent: Vec<usize>| {
        LogitError::Collinear(dependent.into_iter().map(|j| data.names[j].clone()).collect())
    };
    let max_abs_eta = |beta: &[f64]| {
        par::map_range(exec, data.n, |i| dot(data.row(i), beta).abs()).into_iter().fold(0.0, f64::max)
    };

    let mut beta = vec![0.0; data.p];
    let mut ll = ll_at(&beta, data, exec);
    let mut trace = vec![ll];
    let mut eta_max = 0.0;
    let mut eta_growth = 0.0;
    let mut converged = false;
    let mut n_iter = 0;

    while n_iter < opts.max_iter {
        let grad = gradient(&beta, data, exec)?;
        let info = information(&beta, data, exec)?;
        let chol = match info.pivoted_cholesky(PIVOT_TOLERANCE) {
            Ok(c) => c,
            Err(_) if eta_max > SEPARATION_ETA => {
                return Err(LogitError::PerfectSeparation { max_eta: eta_max, iterations: n_iter })
            }
            Err(rd) => return Err(collinear(rd.dependent)),
        };
        let step = chol.solve(&grad);

        let mut t = 1.0;
        let mut candidate: Vec<f64>;
        let mut ll_new;
        let mut halvings = 0;
        loop {
            candidate = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            ll_new = ll_at(&candidate, data, exec);
            if ll_new >= ll || halvings == MAX_HALVINGS {
                break;
            }
            t *= 0.5;
            halvings += 1;
        }
        n_iter += 1;
        if ll_new < ll {
            // No ascent direction left at working precision.
            converged = true;
            break;
        }
        let delta = ll_new - ll;
        beta = candidate;
        ll = ll_new;
        trace.push(ll);
        let new_eta_max = max_abs_eta(&beta);
        eta_growth = new_eta_max - eta_max;
        eta_max = new_eta_max;
        if delta.abs() < opts.tol {
            converged = true;
            break;
        }
    }

    if eta_max > SEPARATION_ETA && eta_growth > 0.1 {
        return Err(LogitError::PerfectSeparation { max_eta: eta_max, iterations: n_iter });
    }

    let info = information(&beta, data, exec)?;
    let cov = info.pivoted_cholesky(PIVOT_TOLERANCE).map_err(|rd| collinear(rd.dependent))?.inverse();
    let ll0 = null_log_likelihood(&data.y);
    let mut fit = LogitFit::from_parts(data.names.clone(), beta, cov, ll, ll0, data.n, n_iter, converged);
    fit.ll_trace = trace;
    Ok(fit)
}

/// 1 when `p >= cutoff`.
pub fn classify_threshold(p: f64, cutoff: f64) -> Result<u8, LogitError> {
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(LogitError::InvalidCutoff(cutoff));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(LogitError::InvalidProbability(p));
    }
    Ok(u8::from(p >= cutoff))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrTest {
    pub chi2: f64,
    pub df: usize,
    pub p: f64,
}

/// Likelihood-ratio test of all slopes against the intercept-only model.
pub fn lr_test(fit: &LogitFit) -> LrTest {
    let df = fit.n_predictors();
    if df == 0 {
        return LrTest { chi2: 0.0, df, p: 1.0 };
    }
    let chi2 = (2.0 * (fit.ll - fit.ll0)).max(0.0);
    LrTest { chi2, df, p: special::chi2_sf(chi2, df as f64) }
}

/// McFadden's `1 - ll / ll0`.
pub fn pseudo_r2(fit: &LogitFit) -> f64 {
    if fit.n_predictors() == 0 {
        return 0.0;
    }
    (1.0 - fit.ll / fit.ll0).max(0.0)
}
