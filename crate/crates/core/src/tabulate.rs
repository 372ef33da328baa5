//! State covariates, the document/covariate join and descriptive
//! statistics of the resulting analysis table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::states::canonical_state;

/// Name of the response column in analysis tables.
pub const RESPONSE: &str = "sentiment";

/// Regressors in model order.
pub const PREDICTORS: [&str; 18] = [
    "TW", "NE", "MW", "WEST", "L_FHH", "AFS", "EDU2", "EDU3", "AGE2", "WP", "OCH", "PWHI", "LF",
    "L_POPDEN", "CASES", "PR", "MHHI", "GR",
];

/// Regional indicator columns; South is the omitted baseline.
pub const REGION_DUMMIES: [&str; 3] = ["NE", "MW", "WEST"];

const COVARIATE_COLUMNS: [&str; 16] = [
    "state", "FHH_pct", "AFS", "EDU2", "EDU3", "AGE2", "WP", "OCH", "PWHI", "LF", "POPDEN", "CASES",
    "PR", "MHHI", "GR", "region",
];

#[derive(Debug, Error)]
pub enum TabulateError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{file} is missing required column {column:?}")]
    MissingColumn { file: &'static str, column: String },
    #[error("covariates line {line}: duplicate state {state}")]
    DuplicateState { line: u64, state: String },
    #[error("covariates line {line}: unknown state code {state:?}")]
    UnknownState { line: u64, state: String },
    #[error("covariates line {line} ({state}): {column} = {value} is out of range ({rule})")]
    OutOfRange { line: u64, state: String, column: &'static str, value: f64, rule: &'static str },
    #[error("{file} line {line}: column {column} has unparsable value {value:?}")]
    Parse { file: &'static str, line: u64, column: String, value: String },
    #[error("documents reference states without covariates: {}", .0.join(", "))]
    MissingStates(Vec<String>),
    #[error("descriptive statistics need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("analysis table has no rows")]
    EmptyTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Northeast,
    Midwest,
    South,
    West,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::Northeast => "Northeast",
            Region::Midwest => "Midwest",
            Region::South => "South",
            Region::West => "West",
        })
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "northeast" | "ne" => Ok(Region::Northeast),
            "midwest" | "mw" => Ok(Region::Midwest),
            "south" => Ok(Region::South),
            "west" => Ok(Region::West),
            _ => Err(format!("unknown region {s:?}")),
        }
    }
}

/// One-hot `(NE, MW, WEST)` with South as the all-zero baseline.
pub fn region_dummies(region: Region) -> (u8, u8, u8) {
    match region {
        Region::Northeast => (1, 0, 0),
        Region::Midwest => (0, 1, 0),
        Region::South => (0, 0, 0),
        Region::West => (0, 0, 1),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateCovariates {
    pub state: String,
    pub fhh_pct: f64,
    pub afs: f64,
    pub edu2: f64,
    pub edu3: f64,
    pub age2: f64,
    pub wp: f64,
    pub och: f64,
    pub pwhi: f64,
    pub lf: f64,
    pub popden: f64,
    pub cases: f64,
    pub pr: f64,
    pub mhhi: f64,
    pub gr: f64,
    pub region: Region,
}

pub type CovariateMap = BTreeMap<String, StateCovariates>;

pub fn load_covariates(path: &Path) -> Result<CovariateMap, TabulateError> {
    let file = File::open(path).map_err(|source| TabulateError::Io { path: path.to_path_buf(), source })?;
    read_covariates(file)
}

pub fn read_covariates<R: Read>(reader: R) -> Result<CovariateMap, TabulateError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; 16];
    for (slot, name) in idx.iter_mut().zip(COVARIATE_COLUMNS) {
        *slot = headers.iter().position(|h| h.trim() == name).ok_or_else(|| {
            TabulateError::MissingColumn { file: "covariates", column: name.to_string() }
        })?;
    }
    let mut out = CovariateMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let raw_state = record.get(idx[0]).unwrap_or_default();
        let state = canonical_state(raw_state)
            .ok_or_else(|| TabulateError::UnknownState { line, state: raw_state.to_string() })?
            .to_string();
        let num = |col: usize| -> Result<f64, TabulateError> {
            let raw = record.get(idx[col]).unwrap_or_default().trim();
            raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| TabulateError::Parse {
                file: "covariates",
                line,
                column: COVARIATE_COLUMNS[col].to_string(),
                value: raw.to_string(),
            })
        };
        let region_raw = record.get(idx[15]).unwrap_or_default();
        let region = region_raw.parse().map_err(|_| TabulateError::Parse {
            file: "covariates",
            line,
            column: "region".into(),
            value: region_raw.to_string(),
        })?;
        let row = StateCovariates {
            state: state.clone(),
            fhh_pct: num(1)?,
            afs: num(2)?,
            edu2: num(3)?,
            edu3: num(4)?,
            age2: num(5)?,
            wp: num(6)?,
            och: num(7)?,
            pwhi: num(8)?,
            lf: num(9)?,
            popden: num(10)?,
            cases: num(11)?,
            pr: num(12)?,
            mhhi: num(13)?,
            gr: num(14)?,
            region,
        };
        validate(&row, line)?;
        if out.insert(state.clone(), row).is_some() {
            return Err(TabulateError::DuplicateState { line, state });
        }
    }
    Ok(out)
}

fn validate(c: &StateCovariates, line: u64) -> Result<(), TabulateError> {
    let out_of_range = |column: &'static str, value: f64, rule: &'static str| TabulateError::OutOfRange {
        line,
        state: c.state.clone(),
        column,
        value,
        rule,
    };
    let percentages = [
        ("FHH_pct", c.fhh_pct),
        ("EDU2", c.edu2),
        ("EDU3", c.edu3),
        ("AGE2", c.age2),
        ("WP", c.wp),
        ("OCH", c.och),
        ("PWHI", c.pwhi),
        ("LF", c.lf),
        ("PR", c.pr),
    ];
    for (column, v) in percentages {
        if !(0.0..=100.0).contains(&v) {
            return Err(out_of_range(column, v, "percentage in [0, 100]"));
        }
    }
    // Logged columns must be strictly positive.
    if c.fhh_pct <= 0.0 {
        return Err(out_of_range("FHH_pct", c.fhh_pct, "> 0"));
    }
    if c.afs <= 0.0 {
        return Err(out_of_range("AFS", c.afs, "> 0"));
    }
    if c.popden <= 0.0 {
        return Err(out_of_range("POPDEN", c.popden, "> 0"));
    }
    for (column, v) in [("CASES", c.cases), ("MHHI", c.mhhi), ("GR", c.gr)] {
        if v < 0.0 {
            return Err(out_of_range(column, v, ">= 0"));
        }
    }
    Ok(())
}

/// A scored document ready to be joined.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDocument {
    pub id: String,
    pub state: String,
    pub text_width: usize,
    pub sentiment: u8,
}

/// One estimation row: binary response plus every model regressor.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRow {
    pub id: String,
    pub state: String,
    pub sentiment: u8,
    pub tw: f64,
    pub ne: u8,
    pub mw: u8,
    pub west: u8,
    pub l_fhh: f64,
    pub afs: f64,
    pub edu2: f64,
    pub edu3: f64,
    pub age2: f64,
    pub wp: f64,
    pub och: f64,
    pub pwhi: f64,
    pub lf: f64,
    pub l_popden: f64,
    pub cases: f64,
    pub pr: f64,
    pub mhhi: f64,
    pub gr: f64,
}

impl AnalysisRow {
    /// Regressor values in `PREDICTORS` order.
    pub fn predictors(&self) -> [f64; 18] {
        [
            self.tw,
            f64::from(self.ne),
            f64::from(self.mw),
            f64::from(self.west),
            self.l_fhh,
            self.afs,
            self.edu2,
            self.edu3,
            self.age2,
            self.wp,
            self.och,
            self.pwhi,
            self.lf,
            self.l_popden,
            self.cases,
            self.pr,
            self.mhhi,
            self.gr,
        ]
    }
}

/// Attaches each document's state covariates. Row order follows `scored`.
pub fn join(scored: &[ScoredDocument], covars: &CovariateMap) -> Result<Vec<AnalysisRow>, TabulateError> {
    let missing: BTreeSet<&str> = scored
        .iter()
        .filter(|d| !covars.contains_key(&d.state))
        .map(|d| d.state.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(TabulateError::MissingStates(missing.into_iter().map(String::from).collect()));
    }
    Ok(scored
        .iter()
        .map(|d| {
            let c = &covars[&d.state];
            let (ne, mw, west) = region_dummies(c.region);
            AnalysisRow {
                id: d.id.clone(),
                state: d.state.clone(),
                sentiment: d.sentiment,
                tw: d.text_width as f64,
                ne,
                mw,
                west,
                l_fhh: c.fhh_pct.ln(),
                afs: c.afs,
                edu2: c.edu2,
                edu3: c.edu3,
                age2: c.age2,
                wp: c.wp,
                och: c.och,
                pwhi: c.pwhi,
                lf: c.lf,
                l_popden: c.popden.ln(),
                cases: c.cases,
                pr: c.pr,
                mhhi: c.mhhi,
                gr: c.gr,
            }
        })
        .collect())
}

/// Column-oriented view of an analysis table: a binary response and named
/// numeric predictors. `id`/`state` columns are carried along when present.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisTable {
    pub ids: Option<Vec<String>>,
    pub states: Option<Vec<String>>,
    pub response: Vec<f64>,
    pub names: Vec<String>,
    /// Row-major predictor values, `names.len()` per row.
    pub rows: Vec<Vec<f64>>,
}

impl AnalysisTable {
    pub fn from_rows(rows: &[AnalysisRow]) -> Self {
        AnalysisTable {
            ids: Some(rows.iter().map(|r| r.id.clone()).collect()),
            states: Some(rows.iter().map(|r| r.state.clone()).collect()),
            response: rows.iter().map(|r| f64::from(r.sentiment)).collect(),
            names: PREDICTORS.iter().map(|s| s.to_string()).collect(),
            rows: rows.iter().map(|r| r.predictors().to_vec()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Writes `[id,state,]sentiment,<predictors>`; numbers use the
    /// shortest representation that round-trips.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), TabulateError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = Vec::new();
        if self.ids.is_some() {
            header.push("id");
        }
        if self.states.is_some() {
            header.push("state");
        }
        header.push(RESPONSE);
        header.extend(self.names.iter().map(String::as_str));
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = Vec::with_capacity(header.len());
            if let Some(ids) = &self.ids {
                rec.push(ids[i].clone());
            }
            if let Some(states) = &self.states {
                rec.push(states[i].clone());
            }
            rec.push(self.response[i].to_string());
            rec.extend(self.rows[i].iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| TabulateError::Csv(e.into()))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, TabulateError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let find = |n: &str| headers.iter().position(|h| h == n);
        let response_col = find(RESPONSE).ok_or_else(|| TabulateError::MissingColumn {
            file: "analysis table",
            column: RESPONSE.to_string(),
        })?;
        let id_col = find("id");
        let state_col = find("state");
        let predictor_cols: Vec<usize> = (0..headers.len())
            .filter(|&c| c != response_col && Some(c) != id_col && Some(c) != state_col)
            .collect();
        let mut table = AnalysisTable {
            ids: id_col.map(|_| Vec::new()),
            states: state_col.map(|_| Vec::new()),
            response: Vec::new(),
            names: predictor_cols.iter().map(|&c| headers[c].clone()).collect(),
            rows: Vec::new(),
        };
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let num = |c: usize| -> Result<f64, TabulateError> {
                let raw = record.get(c).unwrap_or_default().trim();
                raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| TabulateError::Parse {
                    file: "analysis table",
                    line,
                    column: headers[c].clone(),
                    value: raw.to_string(),
                })
            };
            if let (Some(ids), Some(c)) = (table.ids.as_mut(), id_col) {
                ids.push(record.get(c).unwrap_or_default().to_string());
            }
            if let (Some(states), Some(c)) = (table.states.as_mut(), state_col) {
                states.push(record.get(c).unwrap_or_default().to_string());
            }
            table.response.push(num(response_col)?);
            table.rows.push(predictor_cols.iter().map(|&c| num(c)).collect::<Result<_, _>>()?);
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableSummary {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescriptiveStats {
    pub variables: Vec<VariableSummary>,
}

impl DescriptiveStats {
    pub fn get(&self, name: &str) -> Option<&VariableSummary> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), TabulateError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["variable", "n", "mean", "sd", "min", "max"])?;
        for v in &self.variables {
            w.write_record([
                v.name.clone(),
                v.n.to_string(),
                v.mean.to_string(),
                v.sd.to_string(),
                v.min.to_string(),
                v.max.to_string(),
            ])?;
        }
        w.flush().map_err(|e| TabulateError::Csv(e.into()))?;
        Ok(())
    }

    /// Fixed-width text table with two decimals, one row per variable.
    pub fn to_text(&self) -> String {
        let mut s = format!("{:<10} {:>12} {:>12} {:>12} {:>12}\n", "Variable", "Mean", "SD", "Min", "Max");
        for v in &self.variables {
            s.push_str(&format!(
                "{:<10} {:>12.2} {:>12.2} {:>12.2} {:>12.2}\n",
                v.name, v.mean, v.sd, v.min, v.max
            ));
        }
        s
    }
}

/// Single-pass (Welford) summary of one column. Needs at least two values.
pub fn summarize(name: &str, values: &[f64]) -> Result<VariableSummary, TabulateError> {
    if values.len() < 2 {
        return Err(TabulateError::TooFewRows(values.len()));
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for (i, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
        min = min.min(x);
        max = max.max(x);
    }
    let n = values.len();
    Ok(VariableSummary {
        name: name.to_string(),
        n,
        // Rounding can push the running mean a hair outside [min, max].
        mean: mean.clamp(min, max),
        sd: (m2.max(0.0) / (n - 1) as f64).sqrt(),
        min,
        max,
    })
}

/// Summaries of the response and every predictor column.
pub fn descriptive_stats(table: &AnalysisTable) -> Result<DescriptiveStats, TabulateError> {
    let mut variables = vec![summarize(RESPONSE, &table.response)?];
    for (j, name) in table.names.iter().enumerate() {
        variables.push(summarize(name, &table.column(j))?);
    }
    Ok(DescriptiveStats { variables })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "state,FHH_pct,AFS,EDU2,EDU3,AGE2,WP,OCH,PWHI,LF,POPDEN,CASES,PR,MHHI,GR,region\n";

    fn nc_row() -> &'static str {
        "NC,65.4,3.1,45.2,9.6,22.1,70.6,65.0,12.5,62.3,214.7,2100,14.0,53855,880,South\n"
    }

    #[test]
    fn region_dummy_examples() {
        assert_eq!(region_dummies(Region::Northeast), (1, 0, 0));
        assert_eq!(region_dummies(Region::South), (0, 0, 0));
        assert_eq!(region_dummies(Region::West), (0, 0, 1));
        assert_eq!(region_dummies(Region::Midwest), (0, 1, 0));
    }

    #[test]
    fn covariate_errors() {
        let ok = read_covariates(format!("{HEADER}{}", nc_row()).as_bytes()).unwrap();
        assert_eq!(ok["NC"].region, Region::South);

        let no_gr = HEADER.replace(",GR", "").replace("880,", "");
        let err = read_covariates(format!("{no_gr}").as_bytes()).unwrap_err();
        assert!(matches!(err, TabulateError::MissingColumn { ref column, .. } if column == "GR"), "{err}");

        let bad_afs = nc_row().replace(",3.1,", ",-1,");
        let err = read_covariates(format!("{HEADER}{bad_afs}").as_bytes()).unwrap_err();
        assert!(matches!(err, TabulateError::OutOfRange { column: "AFS", .. }), "{err}");

        let err = read_covariates(format!("{HEADER}{}{}", nc_row(), nc_row()).as_bytes()).unwrap_err();
        assert!(matches!(err, TabulateError::DuplicateState { line: 3, .. }), "{err}");

        let pct = nc_row().replace(",45.2,", ",145.2,");
        assert!(read_covariates(format!("{HEADER}{pct}").as_bytes()).is_err());
    }

    #[test]
    fn join_attaches_state_values() {
        let covars = read_covariates(format!("{HEADER}{}", nc_row()).as_bytes()).unwrap();
        let doc = ScoredDocument { id: "1".into(), state: "NC".into(), text_width: 36, sentiment: 1 };
        let rows = join(&[doc.clone(), doc.clone()], &covars).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].tw, 36.0);
        assert!((rows[0].l_fhh - 4.180_522_258_463_153).abs() < 1e-12);
        assert!((rows[0].l_fhh.exp() - 65.4).abs() < 1e-12);
        assert_eq!((rows[0].ne, rows[0].mw, rows[0].west), (0, 0, 0));

        let far = ScoredDocument { state: "WY".into(), ..doc };
        let err = join(&[far], &covars).unwrap_err();
        assert!(err.to_string().contains("WY"));
    }

    #[test]
    fn summaries() {
        let s = summarize("x", &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.sd, s.min, s.max), (2.0, 1.0, 1.0, 3.0));
        assert_eq!(summarize("c", &[4.0; 5]).unwrap().sd, 0.0);
        assert!(matches!(summarize("x", &[1.0]), Err(TabulateError::TooFewRows(1))));
    }

    #[test]
    fn table_csv_round_trip() {
        let t = AnalysisTable {
            ids: None,
            states: None,
            response: vec![1.0, 0.0],
            names: vec!["x".into()],
            rows: vec![vec![0.1], vec![-2.5e-9]],
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "sentiment,x\n1,0.1\n0,-0.0000000025\n");
        assert_eq!(AnalysisTable::read_csv(buf.as_slice()).unwrap(), t);
        let err = AnalysisTable::read_csv("y,x\n1,2\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("sentiment"));
    }
}
