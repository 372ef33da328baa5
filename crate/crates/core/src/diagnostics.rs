//! Post-estimation diagnostics: Pearson goodness of fit over covariate
//! patterns, the classification table, QQ data for Pearson residuals and
//! average marginal effects with delta-method standard errors.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logit::{self, dot, logistic, DesignMatrix, LogitError, LogitFit};
use crate::par::{self, Execution};
use crate::special;
use crate::tabulate::REGION_DUMMIES;

/// Relative step of the central differences in the delta-method Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("covariate pattern {index} has fitted probability {p_hat}, Pearson statistic undefined")]
    DegeneratePattern { index: usize, p_hat: f64 },
    #[error("unknown variable kind {0:?} (continuous | discrete)")]
    UnknownKind(String),
    #[error("no variable kind declared for {0:?}")]
    MissingKind(String),
    #[error("fit has {fit} coefficients but the design has {design} columns")]
    Mismatch { fit: usize, design: usize },
    #[error(transparent)]
    Logit(#[from] LogitError),
}

/// Rows sharing one exact covariate vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CovariatePattern {
    pub pattern_index: usize,
    pub row_indices: Vec<usize>,
    pub m: usize,
    pub y_sum: usize,
}

impl CovariatePattern {
    /// Fitted probability shared by every row of the pattern.
    pub fn p_hat(&self, data: &DesignMatrix, beta: &[f64]) -> f64 {
        logit::predict_row(data.row(self.row_indices[0]), beta)
    }
}

/// Groups rows by bitwise equality of their covariate vectors, numbering
/// patterns by first occurrence.
pub fn covariate_patterns(data: &DesignMatrix) -> Vec<CovariatePattern> {
    group_rows(data.n_obs(), |i| data.row(i), data.y())
}

/// Pattern grouping over bare rows and a 0/1 response.
pub fn patterns_from_rows(rows: &[Vec<f64>], y: &[f64]) -> Vec<CovariatePattern> {
    group_rows(rows.len(), |i| &rows[i], y)
}

fn group_rows<'a>(n: usize, row: impl Fn(usize) -> &'a [f64], y: &[f64]) -> Vec<CovariatePattern> {
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut patterns: Vec<CovariatePattern> = Vec::new();
    for i in 0..n {
        let key: Vec<u64> = row(i).iter().map(|v| v.to_bits()).collect();
        let next = patterns.len();
        let j = *index.entry(key).or_insert(next);
        if j == next {
            patterns.push(CovariatePattern { pattern_index: j, row_indices: Vec::new(), m: 0, y_sum: 0 });
        }
        let p = &mut patterns[j];
        p.row_indices.push(i);
        p.m += 1;
        p.y_sum += usize::from(y[i] == 1.0);
    }
    patterns
}

fn check_fit(fit: &LogitFit, data: &DesignMatrix) -> Result<(), DiagnosticsError> {
    if fit.beta.len() != data.n_params() {
        return Err(DiagnosticsError::Mismatch { fit: fit.beta.len(), design: data.n_params() });
    }
    Ok(())
}

fn fitted_patterns(
    beta: &[f64],
    data: &DesignMatrix,
    patterns: &[CovariatePattern],
) -> Result<Vec<f64>, DiagnosticsError> {
    let p_hat = par::map(Execution::default(), patterns, |pat| pat.p_hat(data, beta));
    for (pat, &p) in patterns.iter().zip(&p_hat) {
        if p <= 0.0 || p >= 1.0 {
            return Err(DiagnosticsError::DegeneratePattern { index: pat.pattern_index, p_hat: p });
        }
    }
    Ok(p_hat)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PearsonTest {
    pub chi2: f64,
    /// Patterns minus estimated parameters; may be zero or negative.
    pub df: i64,
    /// Upper-tail probability; `None` when `df <= 0`.
    pub p: Option<f64>,
    pub n_patterns: usize,
    pub n_obs: usize,
}

/// `sum_j (y_j - m_j p_j)^2 / (m_j p_j (1 - p_j))` over covariate patterns.
pub fn pearson_chi2(
    fit: &LogitFit,
    data: &DesignMatrix,
    patterns: &[CovariatePattern],
) -> Result<PearsonTest, DiagnosticsError> {
    check_fit(fit, data)?;
    let p_hat = fitted_patterns(&fit.beta, data, patterns)?;
    let chi2 = par::sum_range(Execution::default(), patterns.len(), |j| {
        let (m, y) = (patterns[j].m as f64, patterns[j].y_sum as f64);
        let expected = m * p_hat[j];
        (y - expected).powi(2) / (expected * (1.0 - p_hat[j]))
    });
    let df = patterns.len() as i64 - fit.beta.len() as i64;
    let p = (df > 0).then(|| special::chi2_sf(chi2, df as f64));
    Ok(PearsonTest { chi2, df, p, n_patterns: patterns.len(), n_obs: data.n_obs() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub cutoff: f64,
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: f64,
    /// True-positive rate; `None` without positive observations.
    pub sensitivity: Option<f64>,
    /// True-negative rate; `None` without negative observations.
    pub specificity: Option<f64>,
}

/// Confusion counts of `1{p >= cutoff}` against `y`.
pub fn classify_probabilities(
    y: &[f64],
    probs: &[f64],
    cutoff: f64,
) -> Result<ClassificationSummary, LogitError> {
    if y.len() != probs.len() {
        return Err(LogitError::DimensionMismatch(format!(
            "{} responses for {} probabilities",
            y.len(),
            probs.len()
        )));
    }
    let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
    for (&obs, &p) in y.iter().zip(probs) {
        match (obs == 1.0, logit::classify_threshold(p, cutoff)? == 1) {
            (true, true) => tp += 1,
            (true, false) => fn_ += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
        }
    }
    let rate = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    Ok(ClassificationSummary {
        cutoff,
        tp,
        tn,
        fp,
        fn_,
        accuracy: (tp + tn) as f64 / y.len().max(1) as f64,
        sensitivity: rate(tp, tp + fn_),
        specificity: rate(tn, tn + fp),
    })
}

pub fn classification_summary(
    fit: &LogitFit,
    data: &DesignMatrix,
    cutoff: f64,
) -> Result<ClassificationSummary, DiagnosticsError> {
    check_fit(fit, data)?;
    let probs = logit::predict_prob(data, &fit.beta)?;
    Ok(classify_probabilities(data.y(), &probs, cutoff)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QqPoint {
    pub theoretical: f64,
    pub residual: f64,
}

/// Pearson residual per pattern, in pattern order.
pub fn pearson_residuals(
    beta: &[f64],
    data: &DesignMatrix,
    patterns: &[CovariatePattern],
) -> Result<Vec<f64>, DiagnosticsError> {
    let p_hat = fitted_patterns(beta, data, patterns)?;
    Ok(patterns
        .iter()
        .zip(p_hat)
        .map(|(pat, p)| {
            let m = pat.m as f64;
            (pat.y_sum as f64 - m * p) / (m * p * (1.0 - p)).sqrt()
        })
        .collect())
}

/// Sorts `residuals` and pairs the i-th with the normal quantile at
/// plotting position `(i - 0.5) / J`.
pub fn qq_pairs(residuals: &[f64]) -> Vec<QqPoint> {
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let j = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, residual)| QqPoint {
            theoretical: special::normal_quantile((i as f64 + 0.5) / j),
            residual,
        })
        .collect()
}

pub fn qq_export(
    fit: &LogitFit,
    data: &DesignMatrix,
    patterns: &[CovariatePattern],
) -> Result<Vec<QqPoint>, DiagnosticsError> {
    check_fit(fit, data)?;
    Ok(qq_pairs(&pearson_residuals(&fit.beta, data, patterns)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Continuous,
    /// 0/1 indicator; effect is the average change from 0 to 1.
    Discrete,
}

impl fmt::Display for VariableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VariableKind::Continuous => "continuous",
            VariableKind::Discrete => "discrete",
        })
    }
}

impl FromStr for VariableKind {
    type Err = DiagnosticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "continuous" => Ok(VariableKind::Continuous),
            "discrete" => Ok(VariableKind::Discrete),
            _ => Err(DiagnosticsError::UnknownKind(s.to_string())),
        }
    }
}

/// Regional dummies are discrete; every other name is continuous.
pub fn default_kinds<S: AsRef<str>>(names: &[S]) -> BTreeMap<String, VariableKind> {
    names
        .iter()
        .map(|n| {
            let n = n.as_ref();
            let kind = if REGION_DUMMIES.contains(&n) {
                VariableKind::Discrete
            } else {
                VariableKind::Continuous
            };
            (n.to_string(), kind)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalEffect {
    pub variable: String,
    pub kind: VariableKind,
    pub dydx: f64,
    pub std_err: f64,
    pub z: f64,
    pub p: f64,
}

fn resolve_kinds(
    data: &DesignMatrix,
    kinds: &BTreeMap<String, VariableKind>,
) -> Result<Vec<(usize, VariableKind)>, DiagnosticsError> {
    data.names()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, name)| {
            kinds
                .get(name)
                .map(|&k| (j, k))
                .ok_or_else(|| DiagnosticsError::MissingKind(name.clone()))
        })
        .collect()
}

/// Average marginal effects at `beta`, one per non-intercept column.
///
/// Continuous: `beta_j * mean(p_i (1 - p_i))`. Discrete:
/// `mean(p_i(x_j = 1) - p_i(x_j = 0))`.
pub fn average_marginal_effects(
    beta: &[f64],
    data: &DesignMatrix,
    kinds: &[(usize, VariableKind)],
    exec: Execution,
) -> Vec<f64> {
    let discrete: Vec<usize> =
        kinds.iter().filter(|(_, k)| *k == VariableKind::Discrete).map(|(j, _)| *j).collect();
    let sums = par::sum_vectors(exec, data.n_obs(), 1 + discrete.len(), |i, acc| {
        let row = data.row(i);
        let eta = dot(row, beta);
        let p = logistic(eta);
        acc[0] += p * (1.0 - p);
        for (slot, &j) in discrete.iter().enumerate() {
            let base = eta - beta[j] * row[j];
            acc[1 + slot] += logistic(base + beta[j]) - logistic(base);
        }
    });
    let n = data.n_obs() as f64;
    let mean_weight = sums[0] / n;
    let mut d = 0;
    kinds
        .iter()
        .map(|&(j, kind)| match kind {
            VariableKind::Continuous => beta[j] * mean_weight,
            VariableKind::Discrete => {
                d += 1;
                sums[d] / n
            }
        })
        .collect()
}

/// AMEs with delta-method standard errors. The Jacobian of the effects
/// with respect to the coefficients is taken by central differences with
/// step `JACOBIAN_STEP * max(1, |beta_c|)`.
pub fn marginal_effects(
    fit: &LogitFit,
    data: &DesignMatrix,
    kinds: &BTreeMap<String, VariableKind>,
    exec: Execution,
) -> Result<Vec<MarginalEffect>, DiagnosticsError> {
    check_fit(fit, data)?;
    let resolved = resolve_kinds(data, kinds)?;
    let dydx = average_marginal_effects(&fit.beta, data, &resolved, exec);

    let n_coef = fit.beta.len();
    let columns: Vec<Vec<f64>> = (0..n_coef)
        .map(|c| {
            let h = JACOBIAN_STEP * fit.beta[c].abs().max(1.0);
            let mut up = fit.beta.clone();
            let mut down = fit.beta.clone();
            up[c] += h;
            down[c] -= h;
            let hi = average_marginal_effects(&up, data, &resolved, exec);
            let lo = average_marginal_effects(&down, data, &resolved, exec);
            // Divide by the step actually taken after rounding.
            let span = up[c] - down[c];
            hi.iter().zip(&lo).map(|(a, b)| (a - b) / span).collect()
        })
        .collect();

    Ok(resolved
        .iter()
        .enumerate()
        .map(|(r, &(j, kind))| {
            let grad: Vec<f64> = columns.iter().map(|col| col[r]).collect();
            let var = fit.cov.mul_vec(&grad).iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>();
            let std_err = var.max(0.0).sqrt();
            let z = dydx[r] / std_err;
            MarginalEffect {
                variable: data.names()[j].clone(),
                kind,
                dydx: dydx[r],
                std_err,
                z,
                p: special::two_sided_p(z),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logit::{fit as fit_logit, FitOptions};

    fn design(rows: &[Vec<f64>], y: &[f64]) -> DesignMatrix {
        let names: Vec<String> = (0..rows[0].len()).map(|j| format!("x{j}")).collect();
        DesignMatrix::with_intercept(rows, &names, y.to_vec()).unwrap()
    }

    #[test]
    fn pattern_grouping() {
        let p = patterns_from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![3.0, 4.0]], &[1.0, 0.0, 1.0]);
        assert_eq!(p.iter().map(|p| p.m).collect::<Vec<_>>(), [2, 1]);
        assert_eq!(p[0].y_sum, 1);
        assert_eq!(p[0].row_indices, [0, 1]);

        let distinct = design(&[vec![1.0], vec![2.0], vec![3.0]], &[1.0, 0.0, 1.0]);
        assert_eq!(covariate_patterns(&distinct).len(), 3);
        assert_eq!(covariate_patterns(&grouped()).iter().map(|p| p.y_sum).collect::<Vec<_>>(), [3, 5, 8]);
    }

    fn grouped() -> DesignMatrix {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (x, ones, zeros) in [(0.0, 3, 7), (1.0, 5, 5), (2.0, 8, 2)] {
            rows.extend(std::iter::repeat(vec![x]).take(ones + zeros));
            y.extend(std::iter::repeat(1.0).take(ones));
            y.extend(std::iter::repeat(0.0).take(zeros));
        }
        design(&rows, &y)
    }

    #[test]
    fn saturated_pearson_is_zero() {
        // Two groups, two parameters: fitted proportions equal observed ones.
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (x, ones, zeros) in [(0.0, 10, 10), (1.0, 15, 5)] {
            rows.extend(std::iter::repeat(vec![x]).take(ones + zeros));
            y.extend(std::iter::repeat(1.0).take(ones));
            y.extend(std::iter::repeat(0.0).take(zeros));
        }
        let d = design(&rows, &y);
        let f = fit_logit(&d, &FitOptions::default()).unwrap();
        let t = pearson_chi2(&f, &d, &covariate_patterns(&d)).unwrap();
        assert!(t.chi2 < 1e-12);
        assert_eq!(t.df, 0);
        assert_eq!(t.p, None);
    }

    #[test]
    fn pearson_direct_sum() {
        let d = grouped();
        let f = fit_logit(&d, &FitOptions::default()).unwrap();
        let pats = covariate_patterns(&d);
        let t = pearson_chi2(&f, &d, &pats).unwrap();
        let mut want = 0.0;
        for (x, ones) in [(0.0, 3.0), (1.0, 5.0), (2.0, 8.0)] {
            let p = 1.0 / (1.0 + (-(f.beta[0] + f.beta[1] * x)).exp());
            want += (ones - 10.0 * p) * (ones - 10.0 * p) / (10.0 * p * (1.0 - p));
        }
        assert!((t.chi2 - want).abs() < 1e-10);
        assert_eq!((t.df, t.n_patterns), (1, 3));
        assert!(t.p.unwrap() > 0.0 && t.p.unwrap() <= 1.0);

        let mut degenerate = f.clone();
        degenerate.beta = vec![800.0, 0.0];
        assert!(matches!(
            pearson_chi2(&degenerate, &d, &pats),
            Err(DiagnosticsError::DegeneratePattern { .. })
        ));
    }

    #[test]
    fn classification_examples() {
        let s = classify_probabilities(&[1.0, 1.0, 0.0, 0.0], &[0.9, 0.8, 0.1, 0.2], 0.5).unwrap();
        assert_eq!((s.accuracy, s.sensitivity, s.specificity), (1.0, Some(1.0), Some(1.0)));
        let s = classify_probabilities(&[1.0, 0.0], &[0.4, 0.6], 0.5).unwrap();
        assert_eq!((s.accuracy, s.sensitivity, s.specificity), (0.0, Some(0.0), Some(0.0)));
        let s = classify_probabilities(&[1.0, 1.0, 0.0, 0.0], &[0.9, 0.4, 0.6, 0.1], 0.5).unwrap();
        assert_eq!((s.tp, s.fn_, s.fp, s.tn), (1, 1, 1, 1));
        assert_eq!((s.accuracy, s.sensitivity, s.specificity), (0.5, Some(0.5), Some(0.5)));
        let s = classify_probabilities(&[0.0, 0.0], &[0.7, 0.2], 0.5).unwrap();
        assert_eq!(s.sensitivity, None);
    }

    #[test]
    fn qq_basics() {
        let q = qq_pairs(&[0.3]);
        assert_eq!(q[0].theoretical, 0.0);
        let q = qq_pairs(&[2.0, -1.0, 0.5, 0.0]);
        assert!(q.windows(2).all(|w| w[0].residual <= w[1].residual && w[0].theoretical < w[1].theoretical));
        let d = grouped();
        let f = fit_logit(&d, &FitOptions::default()).unwrap();
        assert_eq!(qq_export(&f, &d, &covariate_patterns(&d)).unwrap().len(), 3);
    }

    #[test]
    fn kinds() {
        assert_eq!("Discrete".parse::<VariableKind>(), Ok(VariableKind::Discrete));
        assert!(matches!("ordinal".parse::<VariableKind>(), Err(DiagnosticsError::UnknownKind(_))));
        let k = default_kinds(&["TW", "NE", "WEST"]);
        assert_eq!(k["NE"], VariableKind::Discrete);
        assert_eq!(k["TW"], VariableKind::Continuous);
        let d = grouped();
        let f = fit_logit(&d, &FitOptions::default()).unwrap();
        assert_eq!(
            marginal_effects(&f, &d, &BTreeMap::new(), Execution::Sequential),
            Err(DiagnosticsError::MissingKind("x0".into()))
        );
    }

    #[test]
    fn zero_slope_has_zero_effect() {
        let d = grouped();
        let mut f = fit_logit(&d, &FitOptions::default()).unwrap();
        f.beta[1] = 0.0;
        let me = marginal_effects(&f, &d, &default_kinds(&["x0"]), Execution::Sequential).unwrap();
        assert_eq!(me[0].dydx, 0.0);
    }
}
