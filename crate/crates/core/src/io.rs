//! CSV and JSON formats for sites, realizations, categories, variograms,
//! estimator output, study summaries and coding rules.
//!
//! Categories are 1-based in files and 0-based in memory. Missing estimates
//! are written as empty cells. Parse errors report the 1-based file row,
//! counting the header.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coding::{thresholds_from_proportions, CodingFunction, ProportionSpec};
use crate::error::{Error, Result};
use crate::gaussian::Interval;
use crate::pairwise::UnderlyingVariogram;
use crate::random_fields::GrfRealization;
use crate::sites::SiteSet;
use crate::study::StudySummary;
use crate::variography::{EmpiricalVariogram, LagEstimate, Track};

fn parse_err(row: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        row,
        message: message.into(),
    }
}

fn csv_err(e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            parse_err(row, format!("expected {expected_len} columns, found {len}"))
        }
        other => parse_err(row, format!("{other:?}")),
    }
}

/// Header and rows of a CSV table, each row paired with its file line.
struct Table {
    header: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec));
    }
    Ok(Table { header, rows })
}

fn cell(rec: &csv::StringRecord, row: u64, i: usize) -> Result<&str> {
    rec.get(i).ok_or_else(|| parse_err(row, format!("missing column {}", i + 1)))
}

fn num(rec: &csv::StringRecord, row: u64, i: usize, name: &str) -> Result<f64> {
    let s = cell(rec, row, i)?;
    s.parse::<f64>()
        .map_err(|_| parse_err(row, format!("column `{name}`: `{s}` is not a number")))
}

fn opt_num(rec: &csv::StringRecord, row: u64, i: usize, name: &str) -> Result<Option<f64>> {
    let s = cell(rec, row, i)?;
    if s.is_empty() || s.eq_ignore_ascii_case("nan") {
        Ok(None)
    } else {
        num(rec, row, i, name).map(Some)
    }
}

fn int(rec: &csv::StringRecord, row: u64, i: usize, name: &str) -> Result<usize> {
    let s = cell(rec, row, i)?;
    s.parse::<usize>()
        .map_err(|_| parse_err(row, format!("column `{name}`: `{s}` is not a non-negative integer")))
}

/// Indices of the columns named `{prefix}1`, `{prefix}2`, … in order.
fn numbered_columns(header: &[String], prefix: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    while let Some(i) = header.iter().position(|h| *h == format!("{prefix}{}", out.len() + 1)) {
        out.push(i);
    }
    if out.is_empty() {
        return Err(parse_err(1, format!("no `{prefix}1` column in header")));
    }
    Ok(out)
}

fn column(header: &[String], name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| parse_err(1, format!("missing column `{name}`")))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

fn fmt_nan(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

fn coordinates(t: &Table, cols: &[usize]) -> Result<SiteSet> {
    let mut coords = Vec::with_capacity(t.rows.len() * cols.len());
    for (row, rec) in &t.rows {
        for (d, &c) in cols.iter().enumerate() {
            coords.push(num(rec, *row, c, &format!("x{}", d + 1))?);
        }
    }
    if t.rows.is_empty() {
        return Err(parse_err(1, "no data rows"));
    }
    SiteSet::new(cols.len(), coords)
}

fn site_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|d| format!("x{d}")).collect()
}

fn site_cells(sites: &SiteSet, i: usize) -> Vec<String> {
    sites.point(i).iter().map(f64::to_string).collect()
}

/// Columns `x1..xd`.
pub fn read_sites<R: Read>(reader: R) -> Result<SiteSet> {
    let t = read_table(reader)?;
    let cols = numbered_columns(&t.header, "x")?;
    coordinates(&t, &cols)
}

pub fn write_sites<W: Write>(writer: W, sites: &SiteSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(site_header(sites.dim())).map_err(csv_err)?;
    for i in 0..sites.len() {
        w.write_record(site_cells(sites, i)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `x1..xd, y1..yq`.
pub fn read_grf<R: Read>(reader: R) -> Result<(SiteSet, GrfRealization)> {
    let t = read_table(reader)?;
    let sites = coordinates(&t, &numbered_columns(&t.header, "x")?)?;
    let ycols = numbered_columns(&t.header, "y")?;
    let mut values = Vec::with_capacity(t.rows.len() * ycols.len());
    for (row, rec) in &t.rows {
        for (r, &c) in ycols.iter().enumerate() {
            values.push(num(rec, *row, c, &format!("y{}", r + 1))?);
        }
    }
    let y = GrfRealization::new(sites.len(), ycols.len(), values)?;
    Ok((sites, y))
}

pub fn write_grf<W: Write>(writer: W, sites: &SiteSet, y: &GrfRealization) -> Result<()> {
    if sites.len() != y.n_sites() {
        return Err(Error::config("sites", "realization and sites differ in length"));
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = site_header(sites.dim());
    header.extend((1..=y.n_fields()).map(|r| format!("y{r}")));
    w.write_record(header).map_err(csv_err)?;
    for i in 0..sites.len() {
        let mut rec = site_cells(sites, i);
        rec.extend(y.row(i).iter().map(f64::to_string));
        w.write_record(rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `x1..xd, category` with 1-based categories; returns 0-based labels.
pub fn read_categories<R: Read>(reader: R) -> Result<(SiteSet, Vec<usize>)> {
    let t = read_table(reader)?;
    let sites = coordinates(&t, &numbered_columns(&t.header, "x")?)?;
    let c = column(&t.header, "category")?;
    let labels = t
        .rows
        .iter()
        .map(|(row, rec)| match int(rec, *row, c, "category")? {
            0 => Err(parse_err(*row, "categories are numbered from 1")),
            k => Ok(k - 1),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((sites, labels))
}

pub fn write_categories<W: Write>(writer: W, sites: &SiteSet, labels: &[usize]) -> Result<()> {
    if sites.len() != labels.len() {
        return Err(Error::config("sites", "categories and sites differ in length"));
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = site_header(sites.dim());
    header.push("category".into());
    w.write_record(header).map_err(csv_err)?;
    for (i, k) in labels.iter().enumerate() {
        let mut rec = site_cells(sites, i);
        rec.push((k + 1).to_string());
        w.write_record(rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `track, lag, estimate, npairs`, one row per track and lag.
pub fn write_variograms<'a, W, I>(writer: W, tracks: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a EmpiricalVariogram>,
{
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["track", "lag", "estimate", "npairs"]).map_err(csv_err)?;
    for v in tracks {
        let label = v.track.to_string();
        for l in &v.lags {
            w.write_record([label.clone(), l.lag.to_string(), fmt_opt(l.estimate), l.n_pairs.to_string()])
                .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Tracks in order of first appearance.
pub fn read_variograms<R: Read>(reader: R) -> Result<Vec<EmpiricalVariogram>> {
    let t = read_table(reader)?;
    let ct = column(&t.header, "track")?;
    let cl = column(&t.header, "lag")?;
    let ce = column(&t.header, "estimate")?;
    let cn = column(&t.header, "npairs")?;
    let mut out: Vec<EmpiricalVariogram> = Vec::new();
    for (row, rec) in &t.rows {
        let track: Track = cell(rec, *row, ct)?
            .parse()
            .map_err(|e: Error| parse_err(*row, e.to_string()))?;
        let lag = LagEstimate {
            lag: num(rec, *row, cl, "lag")?,
            estimate: opt_num(rec, *row, ce, "estimate")?,
            n_pairs: int(rec, *row, cn, "npairs")?,
        };
        match out.iter_mut().find(|v| v.track == track) {
            Some(v) => v.lags.push(lag),
            None => out.push(EmpiricalVariogram { track, lags: vec![lag] }),
        }
    }
    Ok(out)
}

/// Columns `lag, grf, gamma_hat, rho_hat, logpl, n_effective_pairs,
/// converged, boundary_flag`; `grf` is 1-based.
pub fn write_pl_results<W: Write>(writer: W, v: &UnderlyingVariogram) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "lag",
        "grf",
        "gamma_hat",
        "rho_hat",
        "logpl",
        "n_effective_pairs",
        "converged",
        "boundary_flag",
    ])
    .map_err(csv_err)?;
    for r in 0..v.n_fields() {
        for l in v.lags() {
            let e = l.grfs[r];
            w.write_record([
                l.lag.to_string(),
                (r + 1).to_string(),
                fmt_opt(e.map(|e| e.gamma_hat)),
                fmt_opt(e.map(|e| e.rho_hat)),
                fmt_opt(e.map(|e| e.logpl)),
                e.map_or(0, |e| e.n_effective).to_string(),
                e.is_some_and(|e| e.converged).to_string(),
                e.is_some_and(|e| e.boundary).to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `lag, grf, estimator, mean, p5, p25, p75, p95, truth, n_missing`.
pub fn write_summary<W: Write>(writer: W, s: &StudySummary) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["lag", "grf", "estimator", "mean", "p5", "p25", "p75", "p95", "truth", "n_missing"])
        .map_err(csv_err)?;
    for r in &s.rows {
        w.write_record([
            r.lag.to_string(),
            (r.grf + 1).to_string(),
            r.estimator.to_string(),
            fmt_nan(r.mean),
            fmt_nan(r.p5),
            fmt_nan(r.p25),
            fmt_nan(r.p75),
            fmt_nan(r.p95),
            r.truth.to_string(),
            r.n_missing.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleName {
    /// One field cut at increasing thresholds.
    Sequential,
    /// Two fields: category 1 below `s1` on the first field, categories 2
    /// and 3 split at `t1` on the second field above `s1`.
    Flag2,
    /// Interval boxes given cell by cell.
    Explicit,
}

/// JSON description of a coding rule. Infinite interval ends are `null`.
///
/// * `sequential`: `thresholds`, `proportions`, or `thresholds_csv` (one row
///   of columns `s1..s{K-1}` per site, path relative to the JSON file).
/// * `flag2`: `thresholds` as `[s1, t1]` or `proportions` as `[p1, p2, p3]`.
/// * `explicit`: `intervals[k][r] = [lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodingConfig {
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    pub rule: RuleName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proportions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<Vec<[Option<f64>; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds_csv: Option<PathBuf>,
}

impl CodingConfig {
    /// Explicit description of a constant rule.
    pub fn explicit(coding: &CodingFunction) -> Result<Self> {
        if !coding.is_constant() {
            return Err(Error::config("coding", "only constant rules have an explicit JSON form"));
        }
        let end = |v: f64| v.is_finite().then_some(v);
        let intervals = (0..coding.n_categories())
            .map(|k| coding.cell(0, k).iter().map(|t| [end(t.lower()), end(t.upper())]).collect())
            .collect();
        Ok(CodingConfig {
            k: Some(coding.n_categories()),
            q: Some(coding.n_fields()),
            rule: RuleName::Explicit,
            thresholds: None,
            proportions: None,
            intervals: Some(intervals),
            thresholds_csv: None,
        })
    }

    /// Builds the rule; `base_dir` resolves a relative `thresholds_csv`.
    pub fn build(&self, base_dir: &Path) -> Result<CodingFunction> {
        let given = [
            ("thresholds", self.thresholds.is_some()),
            ("proportions", self.proportions.is_some()),
            ("intervals", self.intervals.is_some()),
            ("thresholds_csv", self.thresholds_csv.is_some()),
        ];
        let named: Vec<&str> = given.iter().filter(|g| g.1).map(|g| g.0).collect();
        if named.len() != 1 {
            return Err(Error::config(
                "rule",
                format!("exactly one of thresholds, proportions, intervals, thresholds_csv is required, got {}", named.len()),
            ));
        }
        let wrong = |what: &str| Error::config(what, format!("not accepted by rule `{:?}`", self.rule).to_lowercase());
        let coding = match self.rule {
            RuleName::Sequential => {
                if let Some(t) = &self.thresholds {
                    CodingFunction::sequential(t)?
                } else if let Some(p) = &self.proportions {
                    thresholds_from_proportions(&ProportionSpec::Constant(p.clone()))?
                } else if let Some(path) = &self.thresholds_csv {
                    let path = base_dir.join(path);
                    let rows = read_threshold_rows(File::open(&path).map_err(|e| {
                        Error::config("thresholds_csv", format!("{}: {e}", path.display()))
                    })?)?;
                    CodingFunction::sequential_per_site(&rows)?
                } else {
                    return Err(wrong("intervals"));
                }
            }
            RuleName::Flag2 => {
                if let Some(t) = &self.thresholds {
                    match t.as_slice() {
                        &[s1, t1] => CodingFunction::flag2(s1, t1)?,
                        _ => return Err(Error::config("thresholds", "flag2 takes [s1, t1]")),
                    }
                } else if let Some(p) = &self.proportions {
                    let p: [f64; 3] = p
                        .as_slice()
                        .try_into()
                        .map_err(|_| Error::config("proportions", "flag2 takes three proportions"))?;
                    ProportionSpec::Constant(p.to_vec()).validate()?;
                    CodingFunction::flag2_from_proportions(p)?
                } else if self.intervals.is_some() {
                    return Err(wrong("intervals"));
                } else {
                    return Err(wrong("thresholds_csv"));
                }
            }
            RuleName::Explicit => {
                let cells = self.intervals.as_ref().ok_or_else(|| wrong("thresholds"))?;
                let q = cells.first().map_or(0, Vec::len);
                if cells.iter().any(|c| c.len() != q) {
                    return Err(Error::config("intervals", "every category needs one interval per field"));
                }
                let flat = cells
                    .iter()
                    .flatten()
                    .map(|[lo, hi]| Interval::new(lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY)))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::config("intervals", e.to_string()))?;
                CodingFunction::constant(cells.len(), q, flat)?
            }
        };
        if let Some(k) = self.k.filter(|&k| k != coding.n_categories()) {
            return Err(Error::config("K", format!("is {k} but the rule defines {} categories", coding.n_categories())));
        }
        if let Some(q) = self.q.filter(|&q| q != coding.n_fields()) {
            return Err(Error::config("q", format!("is {q} but the rule uses {} fields", coding.n_fields())));
        }
        Ok(coding)
    }
}

/// Columns `s1..s{K-1}`, one row per site.
pub fn read_threshold_rows<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let t = read_table(reader)?;
    let cols = numbered_columns(&t.header, "s")?;
    t.rows
        .iter()
        .map(|(row, rec)| {
            cols.iter()
                .enumerate()
                .map(|(i, &c)| num(rec, *row, c, &format!("s{}", i + 1)))
                .collect()
        })
        .collect()
}

pub fn write_threshold_rows<W: Write>(writer: W, coding: &CodingFunction) -> Result<()> {
    let n = coding.n_sites().unwrap_or(1);
    if coding.n_fields() != 1 {
        return Err(Error::config("q", "thresholds exist for one-field rules only"));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record((1..coding.n_categories()).map(|i| format!("s{i}"))).map_err(csv_err)?;
    for i in 0..n {
        w.write_record((0..coding.n_categories() - 1).map(|k| coding.interval(i, k, 0).upper().to_string()))
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a JSON coding file, resolving relative paths against its directory.
pub fn load_coding(path: &Path) -> Result<CodingFunction> {
    let cfg: CodingConfig = serde_json::from_reader(File::open(path)?)?;
    cfg.build(path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::simulate_varying_thresholds;
    use crate::lags::{build_pair_groups, LagSpec};
    use crate::pairwise::empirical_underlying_variogram;
    use crate::sites::CategoricalField;

    #[test]
    fn sites_round_trip() {
        let s = SiteSet::uniform_square(5, 10.0, 1).unwrap();
        let mut buf = Vec::new();
        write_sites(&mut buf, &s).unwrap();
        assert_eq!(read_sites(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn grf_and_categories_round_trip() {
        let s = SiteSet::regular_grid_1d(3, 1.0).unwrap();
        let y = GrfRealization::new(3, 2, vec![0.1, -0.2, 1e-300, 3.5, -7.25, 0.0]).unwrap();
        let mut buf = Vec::new();
        write_grf(&mut buf, &s, &y).unwrap();
        let (s2, y2) = read_grf(buf.as_slice()).unwrap();
        assert_eq!((s2, y2), (s.clone(), y));

        let mut buf = Vec::new();
        write_categories(&mut buf, &s, &[0, 2, 1]).unwrap();
        assert!(String::from_utf8_lossy(&buf).contains("1,3"));
        assert_eq!(read_categories(buf.as_slice()).unwrap().1, vec![0, 2, 1]);
    }

    #[test]
    fn parse_errors_carry_rows() {
        let bad = "x1,category\n0,1\n1,two\n";
        assert!(matches!(read_categories(bad.as_bytes()), Err(Error::Parse { row: 3, .. })));
        let ragged = "x1,y1\n0,1\n1\n";
        assert!(matches!(read_grf(ragged.as_bytes()), Err(Error::Parse { row: 3, .. })));
        let zero = "x1,category\n0,0\n";
        assert!(matches!(read_categories(zero.as_bytes()), Err(Error::Parse { row: 2, .. })));
        assert!(matches!(read_sites("a,b\n1,2\n".as_bytes()), Err(Error::Parse { row: 1, .. })));
    }

    #[test]
    fn variograms_round_trip() {
        let v = EmpiricalVariogram {
            track: Track::Indicator(0, 1),
            lags: vec![
                LagEstimate { lag: 1.0, estimate: Some(-0.125), n_pairs: 10 },
                LagEstimate { lag: 2.0, estimate: None, n_pairs: 0 },
            ],
        };
        let g = EmpiricalVariogram { track: Track::Grf(1), ..v.clone() };
        let mut buf = Vec::new();
        write_variograms(&mut buf, [&v, &g]).unwrap();
        assert_eq!(read_variograms(buf.as_slice()).unwrap(), vec![v, g]);
    }

    #[test]
    fn pl_output_columns() {
        let sites = SiteSet::regular_grid_1d(4, 1.0).unwrap();
        let coding = CodingFunction::sequential(&[0.0]).unwrap();
        let f = CategoricalField::new(2, vec![0, 1, 1, 0]).unwrap();
        let groups = build_pair_groups(&sites, &LagSpec::regular(2, 1.0, None).unwrap()).unwrap();
        let v = empirical_underlying_variogram(&f, &coding, &groups).unwrap();
        let mut buf = Vec::new();
        write_pl_results(&mut buf, &v).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("lag,grf,gamma_hat,rho_hat,logpl,n_effective_pairs,converged,boundary_flag\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn coding_configs() {
        let here = Path::new(".");
        let parse = |s: &str| serde_json::from_str::<CodingConfig>(s).unwrap().build(here);
        let seq = parse(r#"{"K": 3, "q": 1, "rule": "sequential", "thresholds": [-0.5, 0.5]}"#).unwrap();
        assert_eq!(seq, CodingFunction::sequential(&[-0.5, 0.5]).unwrap());
        let props = parse(r#"{"rule": "sequential", "proportions": [0.5, 0.5]}"#).unwrap();
        assert_eq!(props.interval(0, 0, 0).upper(), 0.0);
        let flag = parse(r#"{"rule": "flag2", "proportions": [0.5, 0.25, 0.25]}"#).unwrap();
        assert_eq!(flag, CodingFunction::flag2(0.0, 0.0).unwrap());
        let explicit = CodingConfig::explicit(&flag).unwrap();
        let json = serde_json::to_string(&explicit).unwrap();
        assert!(json.contains("null"));
        assert_eq!(serde_json::from_str::<CodingConfig>(&json).unwrap().build(here).unwrap(), flag);

        for (bad, field) in [
            (r#"{"K": 4, "rule": "sequential", "thresholds": [0.0]}"#, "K"),
            (r#"{"rule": "flag2", "thresholds": [0.0]}"#, "thresholds"),
            (r#"{"rule": "sequential"}"#, "rule"),
            (r#"{"rule": "explicit", "intervals": [[[null, 0]], [[-1, null]]]}"#, "intervals"),
        ] {
            match parse(bad) {
                Err(Error::Config { field: f, .. }) => assert_eq!(f, field, "{bad}"),
                other => panic!("{bad}: {other:?}"),
            }
        }
        assert!(serde_json::from_str::<CodingConfig>(r#"{"rule": "zigzag", "thresholds": [0]}"#).is_err());
    }

    #[test]
    fn per_site_thresholds_file() {
        let dir = tempfile::tempdir().unwrap();
        let sites = SiteSet::regular_grid_1d(20, 1.0).unwrap();
        let coding = simulate_varying_thresholds(&sites, 4, 10.0).unwrap();
        write_threshold_rows(File::create(dir.path().join("t.csv")).unwrap(), &coding).unwrap();
        let json = dir.path().join("coding.json");
        std::fs::write(&json, r#"{"K": 3, "rule": "sequential", "thresholds_csv": "t.csv"}"#).unwrap();
        let back = load_coding(&json).unwrap();
        for i in 0..20 {
            for k in 0..3 {
                let (a, b) = (back.interval(i, k, 0), coding.interval(i, k, 0));
                assert_eq!((a.lower(), a.upper()), (b.lower(), b.upper()));
            }
        }
    }
}
