//! CSV formats for fronts, benchmark results and lab outcomes.

use std::io::{Read, Write};

use mogp_core::domain::ObjectiveVector;
use mogp_core::metrics::{FrontPoint, InputDistribution};
use mogp_core::record::parse_failure_mode;
use mogp_core::{Configuration, DesignSpace, FrontReport, Outcome};

use crate::benchmark::{BenchmarkResults, SummaryRow};
use crate::{Error, Result};

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn point_fields(p: &FrontPoint) -> Vec<String> {
    let mut row: Vec<String> = p.config.values().iter().map(|v| num(*v)).collect();
    row.push(num(p.objectives.strength()));
    row.push(num(p.objectives.pc));
    row.push(num(p.pf));
    row
}

fn variable_ids(space: &DesignSpace) -> Vec<String> {
    space.variables().iter().map(|v| v.id.clone()).collect()
}

/// One `point` row per front member followed by one `summary` row.
pub fn write_front<W: Write>(out: W, space: &DesignSpace, report: &FrontReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["kind".to_string()];
    header.extend(variable_ids(space));
    header.extend(["strength_mean", "cost_mean", "pf", "hv", "igd_plus"].map(String::from));
    w.write_record(&header)?;
    for p in &report.points {
        let mut row = vec!["point".to_string()];
        row.extend(point_fields(p));
        row.extend([String::new(), String::new()]);
        w.write_record(&row)?;
    }
    let mut row = vec!["summary".to_string()];
    row.extend(std::iter::repeat_n(String::new(), space.dim() + 3));
    row.push(num(report.hv));
    row.push(opt(report.igd_plus));
    w.write_record(&row)?;
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

/// Front points from any CSV carrying the variable columns plus
/// `strength_mean`, `cost_mean` and `pf`; summary rows are skipped.
pub fn read_front_points<R: Read>(input: R, space: &DesignSpace) -> Result<Vec<FrontPoint>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("missing column {name:?}")))
    };
    let var_cols = variable_ids(space).iter().map(|id| col(id)).collect::<Result<Vec<_>>>()?;
    let (s_col, c_col, pf_col) = (col("strength_mean")?, col("cost_mean")?, col("pf")?);
    let kind_col = headers.iter().position(|h| h == "kind");
    let parse = |s: &str, what: &str| -> Result<f64> {
        s.trim().parse::<f64>().map_err(|_| Error::Format(format!("bad {what} value {s:?}")))
    };
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if kind_col.is_some_and(|k| rec.get(k) == Some("summary")) {
            continue;
        }
        let values = var_cols
            .iter()
            .map(|&c| parse(rec.get(c).unwrap_or(""), "variable"))
            .collect::<Result<Vec<_>>>()?;
        let config = space.configuration(values)?;
        let strength = parse(rec.get(s_col).unwrap_or(""), "strength_mean")?;
        points.push(FrontPoint {
            config,
            objectives: ObjectiveVector::new(parse(rec.get(c_col).unwrap_or(""), "cost_mean")?, -strength),
            pf: parse(rec.get(pf_col).unwrap_or(""), "pf")?,
        });
    }
    Ok(points)
}

/// Lab outcome rows: `strength,cost,failure_mode,visual_damage`.
pub fn read_outcomes<R: Read>(input: R) -> Result<Vec<Outcome>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    let expected = ["strength", "cost", "failure_mode", "visual_damage"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Format(format!(
            "outcome CSV header must be {}",
            expected.join(",")
        )));
    }
    let mut outcomes = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let real = |k: usize, name: &str| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Format(format!("line {line}: bad {name} {:?}", &rec[k])))
        };
        let visual_damage = match rec[3].to_ascii_lowercase().as_str() {
            "true" | "1" | "yes" => true,
            "false" | "0" | "no" => false,
            other => return Err(Error::Format(format!("line {line}: bad visual_damage {other:?}"))),
        };
        outcomes.push(Outcome {
            strength: real(0, "strength")?,
            cost: real(1, "cost")?,
            failure_mode: parse_failure_mode(&rec[2])?,
            visual_damage,
        });
    }
    Ok(outcomes)
}

pub fn write_outcomes<W: Write>(out: W, outcomes: &[Outcome]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["strength", "cost", "failure_mode", "visual_damage"])?;
    for o in outcomes {
        w.write_record([num(o.strength), num(o.cost), o.failure_mode.to_string(), o.visual_damage.to_string()])?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

/// `algorithm,gamma,macro_rep,budget,hv`, budget counted in configurations.
pub fn write_curves<W: Write>(out: W, results: &BenchmarkResults) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algorithm", "gamma", "macro_rep", "budget", "hv"])?;
    for cell in &results.cells {
        for (b, hv) in cell.history.iter().enumerate() {
            w.write_record([
                cell.algorithm.to_string(),
                num(cell.gamma),
                cell.macro_rep.to_string(),
                (b + 1).to_string(),
                num(*hv),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

/// `algorithm,gamma,hv_mean,igd_plus_mean`.
pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algorithm", "gamma", "hv_mean", "igd_plus_mean"])?;
    for r in rows {
        w.write_record([r.algorithm.to_string(), num(r.gamma), num(r.hv_mean), opt(r.igd_plus_mean)])?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

/// Final front points of every cell, tagged with their cell.
pub fn write_final_fronts<W: Write>(out: W, space: &DesignSpace, results: &BenchmarkResults) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["algorithm", "gamma", "macro_rep"].map(String::from).to_vec();
    header.extend(variable_ids(space));
    header.extend(["strength_mean", "cost_mean", "pf"].map(String::from));
    w.write_record(&header)?;
    for cell in &results.cells {
        for p in cell.front.iter().flat_map(|f| &f.points) {
            let mut row = vec![cell.algorithm.to_string(), num(cell.gamma), cell.macro_rep.to_string()];
            row.extend(point_fields(p));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

/// `cost,strength` per reference-front point.
pub fn write_reference_front<W: Write>(out: W, front: &[ObjectiveVector]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cost", "strength"])?;
    for p in front {
        w.write_record([num(p.pc), num(p.strength())])?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

pub fn read_reference_front<R: Read>(input: R) -> Result<Vec<ObjectiveVector>> {
    let mut r = csv::Reader::from_reader(input);
    let mut front = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let get = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Format("reference front rows need cost,strength".into()))
        };
        front.push(ObjectiveVector::new(get(0)?, -get(1)?));
    }
    Ok(front)
}

/// `variable,p25,p50,p75,binary_fraction,bin_1..bin_20`.
pub fn write_input_distribution<W: Write>(out: W, dist: &InputDistribution) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["variable", "p25", "p50", "p75", "binary_fraction"].map(String::from).to_vec();
    header.extend((1..=mogp_core::metrics::HISTOGRAM_BINS).map(|b| format!("bin_{b}")));
    w.write_record(&header)?;
    for v in &dist.variables {
        let mut row = vec![v.id.clone(), num(v.percentiles[0]), num(v.percentiles[1]), num(v.percentiles[2]), opt(v.binary_fraction)];
        row.extend(v.histogram.iter().map(|c| c.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

/// Configuration as a JSON object keyed by variable id.
pub fn config_to_json(space: &DesignSpace, config: &Configuration) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = space
        .variables()
        .iter()
        .zip(config.values())
        .map(|(s, v)| (s.id.clone(), serde_json::json!(v)))
        .collect();
    serde_json::Value::Object(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mogp_core::metrics::DEFAULT_REFERENCE_POINT;
    use mogp_core::FailureMode;

    #[test]
    fn front_round_trip() {
        let space = DesignSpace::bonding();
        let p = FrontPoint {
            config: space.configuration(vec![1.0, 400.0, 127.5, 1.1, 13.0, 1.0]).unwrap(),
            objectives: ObjectiveVector::new(1.2, -30.5),
            pf: 0.8,
        };
        let report = FrontReport::from_points(vec![p.clone()], &DEFAULT_REFERENCE_POINT, Some(&[ObjectiveVector::new(1.0, -31.0)]));
        let mut buf = Vec::new();
        write_front(&mut buf, &space, &report).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "kind,v1,v2,v3,v4,v5,v6,strength_mean,cost_mean,pf,hv,igd_plus");
        assert_eq!(lines[1], "point,1,400,127.5,1.1,13,1,30.5,1.2,0.8,,");
        assert!(lines[2].starts_with("summary,,,,,,,,,,"));
        assert_eq!(read_front_points(buf.as_slice(), &space).unwrap(), vec![p]);
    }

    #[test]
    fn outcomes_round_trip_and_errors() {
        let o = vec![
            Outcome { strength: 20.5, cost: 1.1, failure_mode: FailureMode::Cohesive, visual_damage: false },
            Outcome { strength: 3.0, cost: 1.1, failure_mode: FailureMode::Adhesion, visual_damage: true },
        ];
        let mut buf = Vec::new();
        write_outcomes(&mut buf, &o).unwrap();
        assert_eq!(read_outcomes(buf.as_slice()).unwrap(), o);
        let bad = "strength,cost,failure_mode,visual_damage\n1,1,glue,false\n";
        let err = read_outcomes(bad.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("adhesion, cohesive, substrate"), "{err}");
        assert!(read_outcomes("a,b\n1,2\n".as_bytes()).is_err());
    }
}
