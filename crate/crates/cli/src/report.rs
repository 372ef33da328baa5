//! The fit report: a JSON document for machines and a fixed-width table
//! for people. Coefficients are listed predictors first, constant last.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use sentilogit::diagnostics::{ClassificationSummary, PearsonTest};
use sentilogit::linalg::SymMatrix;
use sentilogit::logit::{lr_test, pseudo_r2, LogitFit, INTERCEPT};
use sentilogit::tabulate::RESPONSE;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub coef: f64,
    pub std_err: f64,
    pub z: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub pearson: PearsonTest,
    pub classification: ClassificationSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub response: String,
    pub n_obs: usize,
    pub coefficients: Vec<Coefficient>,
    pub ll: f64,
    pub ll0: f64,
    pub lr_chi2: f64,
    pub df: usize,
    pub lr_p: f64,
    pub pseudo_r2: f64,
    pub n_iter: usize,
    pub converged: bool,
    /// Covariance of the estimates, rows and columns in `coefficients` order.
    pub cov: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

/// Report position of each fit coefficient: predictors keep their order,
/// the intercept moves to the end.
fn report_order(names: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..names.len()).filter(|&j| names[j] != INTERCEPT).collect();
    order.extend((0..names.len()).filter(|&j| names[j] == INTERCEPT));
    order
}

impl FitReport {
    pub fn from_fit(fit: &LogitFit) -> Self {
        let order = report_order(&fit.names);
        let coefficients = order
            .iter()
            .map(|&j| Coefficient {
                name: fit.names[j].clone(),
                coef: fit.beta[j],
                std_err: fit.std_err[j],
                z: fit.z[j],
                p: fit.p[j],
            })
            .collect();
        let cov = order.iter().map(|&a| order.iter().map(|&b| fit.cov.get(a, b)).collect()).collect();
        let lr = lr_test(fit);
        FitReport {
            response: RESPONSE.to_string(),
            n_obs: fit.n_obs,
            coefficients,
            ll: fit.ll,
            ll0: fit.ll0,
            lr_chi2: lr.chi2,
            df: lr.df,
            lr_p: lr.p,
            pseudo_r2: pseudo_r2(fit),
            n_iter: fit.n_iter,
            converged: fit.converged,
            cov,
            diagnostics: None,
        }
    }

    /// Rebuilds the fit for a design whose columns are `names`, matching
    /// coefficients by name.
    pub fn to_fit(&self, names: &[String]) -> Result<LogitFit, String> {
        let index: Vec<usize> = names
            .iter()
            .map(|n| {
                self.coefficients
                    .iter()
                    .position(|c| &c.name == n)
                    .ok_or_else(|| format!("fit report has no coefficient for column {n:?}"))
            })
            .collect::<Result<_, _>>()?;
        if let Some(extra) = self.coefficients.iter().find(|c| !names.contains(&c.name)) {
            return Err(format!("fit report coefficient {:?} is not a column of the analysis table", extra.name));
        }
        let k = self.coefficients.len();
        if self.cov.len() != k || self.cov.iter().any(|r| r.len() != k) {
            return Err(format!("fit report covariance is not {k} x {k}"));
        }
        let rows: Vec<Vec<f64>> =
            index.iter().map(|&a| index.iter().map(|&b| self.cov[a][b]).collect()).collect();
        let cov = SymMatrix::from_rows(&rows);
        Ok(LogitFit::from_parts(
            names.to_vec(),
            index.iter().map(|&j| self.coefficients[j].coef).collect(),
            cov,
            self.ll,
            self.ll0,
            self.n_obs,
            self.n_iter,
            self.converged,
        ))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let rule = "-".repeat(62);
        let _ = writeln!(s, "Binary logit model");
        let _ = writeln!(s, "Number of obs = {}", self.n_obs);
        let _ = writeln!(s, "{rule}");
        let _ = writeln!(s, "{:<14} {:>12} {:>12} {:>10} {:>10}", "Sentiment", "Coef.", "Std. Err.", "z", "P>z");
        let _ = writeln!(s, "{rule}");
        for c in &self.coefficients {
            let _ = writeln!(
                s,
                "{:<14} {:>12} {:>12} {:>10.3} {:>10.3}",
                c.name,
                number(c.coef),
                number(c.std_err),
                c.z,
                c.p
            );
        }
        let _ = writeln!(s, "{rule}");
        let _ = writeln!(s, "{:<24} {:>12.3}", format!("LR chi2({})", self.df), self.lr_chi2);
        let _ = writeln!(s, "{:<24} {:>12.3}", "Prob > chi2", self.lr_p);
        let _ = writeln!(s, "{:<24} {:>12.3}", "Pseudo R2", self.pseudo_r2);
        let _ = writeln!(s, "{:<24} {:>12.3}", "Log-likelihood", self.ll);
        let _ = writeln!(
            s,
            "{:<24} {:>12}",
            "Iterations",
            format!("{}{}", self.n_iter, if self.converged { "" } else { " (not converged)" })
        );
        if let Some(d) = &self.diagnostics {
            s.push('\n');
            s.push_str(&diagnostics_text(d));
        }
        s
    }
}

/// Three decimals, or three significant digits for tiny magnitudes.
fn number(x: f64) -> String {
    if x != 0.0 && x.abs() < 5e-4 {
        format!("{x:.2e}")
    } else {
        format!("{x:.3}")
    }
}

fn percent(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{:.2}%", 100.0 * v))
}

fn diagnostics_text(d: &Diagnostics) -> String {
    let mut s = String::new();
    let p = &d.pearson;
    let c = &d.classification;
    let _ = writeln!(s, "Goodness-of-fit test");
    let _ = writeln!(s, "{:<32} {:>12}", "Number of observations", p.n_obs);
    let _ = writeln!(s, "{:<32} {:>12}", "Number of covariate patterns", p.n_patterns);
    let _ = writeln!(s, "{:<32} {:>12.2}", format!("Pearson chi2({})", p.df), p.chi2);
    let _ = writeln!(
        s,
        "{:<32} {:>12}",
        "Prob > chi2",
        p.p.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
    );
    s.push('\n');
    let _ = writeln!(s, "Classification (cutoff {})", c.cutoff);
    let _ = writeln!(s, "{:<14} {:>10} {:>10} {:>10}", "Classified", "D", "~D", "Total");
    let _ = writeln!(s, "{:<14} {:>10} {:>10} {:>10}", "+", c.tp, c.fp, c.tp + c.fp);
    let _ = writeln!(s, "{:<14} {:>10} {:>10} {:>10}", "-", c.fn_, c.tn, c.fn_ + c.tn);
    let _ = writeln!(s, "{:<14} {:>10} {:>10} {:>10}", "Total", c.tp + c.fn_, c.fp + c.tn, c.tp + c.tn + c.fp + c.fn_);
    let _ = writeln!(s, "{:<32} {:>12}", "Sensitivity  Pr( +| D)", percent(c.sensitivity));
    let _ = writeln!(s, "{:<32} {:>12}", "Specificity  Pr( -|~D)", percent(c.specificity));
    let _ = writeln!(s, "{:<32} {:>12}", "Correctly classified", percent(Some(c.accuracy)));
    s
}
