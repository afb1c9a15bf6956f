//! CSV ingestion and output for datasets and synthetic ground truth.
//!
//! Dataset files carry a header `x1,...,xd,t,y` with an optional trailing
//! `e` column holding per-row treatment probabilities. Ground-truth files
//! carry `x1,...,xd,y_plus,y_minus,r,a`.

use std::io::{Read, Write};

use crate::data::{Dataset, GroundTruthUnit, Propensity, Sign};
use crate::error::{Error, Result};

/// How labels and propensities are read.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvOptions {
    /// Map `{0, 1}` labels to `{-1, +1}`. Off by default so that a 0 is never
    /// silently reinterpreted.
    pub zero_one_labels: bool,
    /// Propensity used when the file has no `e` column.
    pub default_propensity: f64,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self { zero_one_labels: false, default_propensity: 0.5 }
    }
}

fn feature_columns(headers: &csv::StringRecord, trailing: &[&str], optional: Option<&str>) -> Result<(usize, bool)> {
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    let has_optional = optional.is_some_and(|o| names.last() == Some(&o));
    let body = if has_optional { &names[..names.len() - 1] } else { &names[..] };
    if body.len() < trailing.len() + 1 || &body[body.len() - trailing.len()..] != trailing {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header x1,...,xd,{}", trailing.join(",")),
        });
    }
    let d = body.len() - trailing.len();
    for (j, name) in body[..d].iter().enumerate() {
        if *name != format!("x{}", j + 1) {
            return Err(Error::Parse { line: 1, message: format!("column {} should be x{}, found {name:?}", j + 1, j + 1) });
        }
    }
    Ok((d, has_optional))
}

fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse { line, message: format!("{what}: cannot parse {field:?} as a number") })
}

fn parse_sign(field: &str, line: usize, what: &str, zero_one: bool) -> Result<Sign> {
    let value = parse_f64(field, line, what)?;
    let sign = match (value, zero_one) {
        (v, _) if v == 1.0 => Some(Sign::Pos),
        (v, false) if v == -1.0 => Some(Sign::Neg),
        (v, true) if v == 0.0 => Some(Sign::Neg),
        _ => None,
    };
    sign.ok_or_else(|| Error::Parse {
        line,
        message: format!("{what} must be {}, found {field:?}", if zero_one { "0 or 1" } else { "±1" }),
    })
}

/// Reads a dataset CSV. Errors name the offending file line.
pub fn read_dataset<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let (d, has_e) = feature_columns(&headers, &["t", "y"], Some("e"))?;
    let mut features = Vec::new();
    let (mut treatment, mut outcome, mut es) = (Vec::new(), Vec::new(), Vec::new());
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record?;
        let expected = d + 2 + has_e as usize;
        if record.len() != expected {
            return Err(Error::Parse { line, message: format!("expected {expected} fields, found {}", record.len()) });
        }
        for j in 0..d {
            let v = parse_f64(&record[j], line, &format!("x{}", j + 1))?;
            if !v.is_finite() {
                return Err(Error::Parse { line, message: format!("x{} is not finite", j + 1) });
            }
            features.push(v);
        }
        treatment.push(parse_sign(&record[d], line, "treatment", opts.zero_one_labels)?);
        outcome.push(parse_sign(&record[d + 1], line, "outcome", opts.zero_one_labels)?);
        if has_e {
            let e = parse_f64(&record[d + 2], line, "e")?;
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::Parse { line, message: format!("propensity {e} outside (0, 1)") });
            }
            es.push(e);
        }
    }
    let propensity =
        if has_e { Propensity::PerObservation(es) } else { Propensity::Constant(opts.default_propensity) };
    Dataset::from_signs(d, features, treatment, outcome, propensity)
}

/// Writes a dataset CSV. Per-row propensities are written only when the
/// dataset carries them.
pub fn write_dataset<W: Write>(writer: W, ds: &Dataset) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let per_row = matches!(ds.propensity(), Propensity::PerObservation(_));
    let mut header: Vec<String> = (1..=ds.dim()).map(|j| format!("x{j}")).collect();
    header.extend(["t".to_string(), "y".to_string()]);
    if per_row {
        header.push("e".into());
    }
    wtr.write_record(&header)?;
    for i in 0..ds.len() {
        let mut record: Vec<String> = ds.row(i).iter().map(|v| v.to_string()).collect();
        record.push(ds.treatment(i).to_string());
        record.push(ds.outcome(i).to_string());
        if per_row {
            record.push(ds.propensity().at(i)?.to_string());
        }
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_ground_truth<W: Write>(writer: W, units: &[GroundTruthUnit]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let d = units.first().map_or(0, |u| u.x.len());
    let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    header.extend(["y_plus", "y_minus", "r", "a"].map(String::from));
    wtr.write_record(&header)?;
    for unit in units {
        let mut record: Vec<String> = unit.x.iter().map(|v| v.to_string()).collect();
        record.extend([unit.y_plus, unit.y_minus, unit.r, unit.a].map(|s| s.to_string()));
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_ground_truth<R: Read>(reader: R) -> Result<Vec<GroundTruthUnit>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let (d, _) = feature_columns(&headers, &["y_plus", "y_minus", "r", "a"], None)?;
    let mut units = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record?;
        if record.len() != d + 4 {
            return Err(Error::Parse { line, message: format!("expected {} fields, found {}", d + 4, record.len()) });
        }
        let x = (0..d).map(|j| parse_f64(&record[j], line, &format!("x{}", j + 1))).collect::<Result<Vec<_>>>()?;
        let field = |k: usize, what: &str| parse_sign(&record[d + k], line, what, false);
        let unit = GroundTruthUnit {
            x,
            y_plus: field(0, "y_plus")?,
            y_minus: field(1, "y_minus")?,
            r: field(2, "r")?,
            a: field(3, "a")?,
        };
        if !unit.is_monotone() {
            return Err(Error::Parse { line, message: "y_plus < y_minus violates monotonicity".into() });
        }
        units.push(unit);
    }
    if units.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(units)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_minimal_file() {
        let text = "x1,x2,t,y\n0.5,1,1,-1\n-2,3e-1,-1,1\n";
        let ds = read_dataset(text.as_bytes(), &CsvOptions::default()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.row(1), &[-2.0, 0.3]);
        assert_eq!(ds.outcome(0), Sign::Neg);
        assert_eq!(ds.propensity(), &Propensity::Constant(0.5));
    }

    #[test]
    fn zero_one_labels_need_flag() {
        let text = "x1,t,y\n0.5,1,0\n";
        let err = read_dataset(text.as_bytes(), &CsvOptions::default()).unwrap_err();
        assert!(err.to_string().starts_with("line 2:"), "{err}");
        let opts = CsvOptions { zero_one_labels: true, ..CsvOptions::default() };
        let ds = read_dataset(text.as_bytes(), &opts).unwrap();
        assert_eq!(ds.outcome(0), Sign::Neg);
    }

    #[test]
    fn per_row_propensity_column() {
        let text = "x1,t,y,e\n0,1,1,0.8\n1,-1,1,0.2\n";
        let ds = read_dataset(text.as_bytes(), &CsvOptions::default()).unwrap();
        assert_eq!(ds.propensity(), &Propensity::PerObservation(vec![0.8, 0.2]));
        assert!((ds.q(1) - 0.8).abs() < 1e-15);
        let bad = "x1,t,y,e\n0,1,1,1.5\n";
        assert!(read_dataset(bad.as_bytes(), &CsvOptions::default()).is_err());
    }

    #[test]
    fn malformed_rows_report_line() {
        let text = "x1,t,y\n0,1,1\n0,1,2\n";
        let err = read_dataset(text.as_bytes(), &CsvOptions::default()).unwrap_err();
        assert!(err.to_string().starts_with("line 3:"), "{err}");
        let header = "a,t,y\n0,1,1\n";
        assert!(read_dataset(header.as_bytes(), &CsvOptions::default()).is_err());
    }

    #[test]
    fn dataset_round_trip_is_exact() {
        let ds = Dataset::new(
            2,
            vec![0.1, -1.0 / 3.0, 1e-300, 2.5e10],
            &[1, -1],
            &[-1, -1],
            Propensity::PerObservation(vec![0.3, 0.7]),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &ds).unwrap();
        let back = read_dataset(buf.as_slice(), &CsvOptions::default()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn ground_truth_round_trip() {
        let units = vec![
            GroundTruthUnit::from_draws(vec![0.25, -0.5], Sign::Pos, Sign::Neg),
            GroundTruthUnit::from_draws(vec![1.0, 2.0], Sign::Neg, Sign::Pos),
        ];
        let mut buf = Vec::new();
        write_ground_truth(&mut buf, &units).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,y_plus,y_minus,r,a\n"));
        assert_eq!(read_ground_truth(buf.as_slice()).unwrap(), units);
    }
}
