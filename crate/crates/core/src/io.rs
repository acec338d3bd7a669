//! Artifact formats: headered CSV for series, JSON for reports.
//!
//! Every CSV starts with a comment line `# {json}` carrying the resolved
//! configuration and the version string, followed by a column header row.

use std::io::{BufRead, BufReader, Read, Write};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::curve::ClosedCurve;
use crate::error::{Error, Result};
use crate::flow::{Trajectory, TRACKED_MODES};
use crate::variation::EnsembleSample;
use crate::VERSION;

pub const CURVE_COLUMNS: [&str; 6] = ["sigma", "x1", "x2", "kappa", "kappa_dot", "rho"];

fn with_version(header: &Value) -> Value {
    let mut map = match header {
        Value::Object(m) => m.clone(),
        Value::Null => Map::new(),
        other => {
            let mut m = Map::new();
            m.insert("meta".into(), other.clone());
            m
        }
    };
    map.insert("version".into(), Value::String(VERSION.into()));
    Value::Object(map)
}

fn write_header<W: Write>(w: &mut W, header: &Value) -> Result<()> {
    writeln!(w, "# {}", serde_json::to_string(&with_version(header))?)?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

/// Writes a curve with its JSON header.
pub fn write_curve_csv<W: Write>(mut w: W, curve: &ClosedCurve, header: &Value) -> Result<()> {
    let mut h = with_version(header);
    if let Value::Object(m) = &mut h {
        m.insert("param_length".into(), json!(curve.param_length));
        m.insert("samples".into(), json!(curve.len()));
        m.insert("weight_constant".into(), json!(curve.weight_constant));
    }
    write_header(&mut w, &h)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CURVE_COLUMNS).map_err(csv_err)?;
    let sigma = curve.sigma();
    for i in 0..curve.len() {
        let p = curve.positions[i];
        out.write_record([
            fmt(sigma[i]),
            fmt(p[0]),
            fmt(p[1]),
            fmt(curve.kappa[i]),
            fmt(curve.kappa_dot[i]),
            fmt(curve.weight[i]),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Header and numeric columns of a headered CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Parse(format!("missing column {name}")))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn read_table<R: Read>(r: R) -> Result<Table> {
    let mut reader = BufReader::new(r);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let json_text = first
        .trim_end()
        .strip_prefix("# ")
        .ok_or_else(|| Error::Parse("first line must be a '# {json}' header".into()))?;
    let header: Value = serde_json::from_str(json_text)?;
    let mut rdr = csv::Reader::from_reader(reader);
    let columns = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("{f}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table {
        header,
        columns,
        rows,
    })
}

/// Restores a curve from its CSV: the frame from the positions, curvature from its columns.
pub fn read_curve_csv<R: Read>(r: R) -> Result<(Value, ClosedCurve)> {
    let table = read_table(r)?;
    for c in CURVE_COLUMNS {
        table.column(c)?;
    }
    let length = table
        .header
        .get("param_length")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Parse("header lacks param_length".into()))?;
    let x1 = table.column("x1")?;
    let x2 = table.column("x2")?;
    let positions = x1.into_iter().zip(x2).map(|(a, b)| [a, b]).collect();
    let mut curve = ClosedCurve::from_positions(positions, length)?;
    curve.kappa = table.column("kappa")?;
    curve.kappa_dot = table.column("kappa_dot")?;
    curve.weight_constant = table.header.get("weight_constant").and_then(Value::as_f64);
    Ok((table.header, curve))
}

/// Writes `s, F, phi_l2, shrinker_scale, amp_0..` for each sampled state.
pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory, header: &Value) -> Result<()> {
    write_header(&mut w, header)?;
    let mut out = csv::Writer::from_writer(w);
    let mut cols = vec![
        "s".to_string(),
        "F".into(),
        "phi_l2".into(),
        "shrinker_scale".into(),
    ];
    cols.extend((0..TRACKED_MODES).map(|j| format!("amp_{j}")));
    out.write_record(&cols).map_err(csv_err)?;
    for st in &traj.states {
        let mut rec = vec![fmt(st.s), fmt(st.f), fmt(st.phi_l2), fmt(st.shrinker_scale)];
        rec.extend(st.mode_amplitudes.iter().map(|a| fmt(*a)));
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `phi_l2, f_gap, direction_id, epsilon` for each ensemble sample.
pub fn write_scatter_csv<W: Write>(mut w: W, samples: &[EnsembleSample], header: &Value) -> Result<()> {
    write_header(&mut w, header)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["phi_l2", "f_gap", "direction_id", "epsilon"])
        .map_err(csv_err)?;
    for s in samples {
        out.write_record([
            fmt(s.phi_l2),
            fmt(s.f_gap),
            s.direction_id.to_string(),
            fmt(s.epsilon),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `sigma, psi_0, ..` for a set of eigenfunctions on `curve`.
pub fn write_eigenfunctions_csv<W: Write>(
    mut w: W,
    curve: &ClosedCurve,
    functions: &[Vec<f64>],
    header: &Value,
) -> Result<()> {
    write_header(&mut w, header)?;
    let mut out = csv::Writer::from_writer(w);
    let mut cols = vec!["sigma".to_string()];
    cols.extend((0..functions.len()).map(|k| format!("psi_{k}")));
    out.write_record(&cols).map_err(csv_err)?;
    let sigma = curve.sigma();
    for (i, s) in sigma.iter().enumerate() {
        let mut rec = vec![fmt(*s)];
        rec.extend(functions.iter().map(|f| fmt(f[i])));
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alcurve::shrinking_circle;

    #[test]
    fn curve_round_trip() {
        let c = shrinking_circle(64);
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &c, &json!({"p": 1, "q": 1})).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# {"));
        assert!(text.lines().nth(1).unwrap() == "sigma,x1,x2,kappa,kappa_dot,rho");
        let (h, back) = read_curve_csv(buf.as_slice()).unwrap();
        assert_eq!(h["p"], 1);
        assert_eq!(h["version"], VERSION);
        assert!((back.weight_constant.unwrap() - c.weight_constant.unwrap()).abs() < 1e-14);
        for i in 0..64 {
            assert_eq!(back.positions[i], c.positions[i]);
            assert!((back.kappa[i] - c.kappa[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_header_rejected() {
        let text = "sigma,x1\n0,1\n";
        assert!(matches!(read_table(text.as_bytes()), Err(Error::Parse(_))));
    }
}
