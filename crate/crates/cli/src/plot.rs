//! gnuplot-dialect script for a series.csv, one panel per regime.

use crate::Failure;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const HEADER: [&str; 9] = ["param", "C_eps", "per_nu", "normalized", "target", "residual", "err_est", "runtime_ms", "regime"];

struct Panel {
    target: f64,
    points: Vec<(f64, f64)>,
}

fn malformed(path: &Path, msg: impl std::fmt::Display) -> Failure {
    Failure { code: 2, kind: "malformed_csv".into(), section: None, message: format!("{}: {msg}", path.display()) }
}

fn read_panels(csv_path: &Path) -> Result<Vec<(String, Panel)>, Failure> {
    let mut rdr = csv::Reader::from_path(csv_path).map_err(|e| malformed(csv_path, e))?;
    let header = rdr.headers().map_err(|e| malformed(csv_path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(malformed(csv_path, format!("header must be {}", HEADER.join(","))));
    }
    let mut order = Vec::new();
    let mut panels: BTreeMap<String, Panel> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| malformed(csv_path, e))?;
        let num = |k: usize| -> Result<f64, Failure> {
            rec[k].trim().parse::<f64>().map_err(|_| malformed(csv_path, format!("row {}: {} is not a number", i + 1, HEADER[k])))
        };
        let (param, normalized, target) = (num(0)?, num(3)?, num(4)?);
        let regime = rec[8].trim().to_string();
        if regime.is_empty() {
            return Err(malformed(csv_path, format!("row {}: empty regime", i + 1)));
        }
        let p = panels.entry(regime.clone()).or_insert_with(|| {
            order.push(regime.clone());
            Panel { target, points: Vec::new() }
        });
        p.points.push((param, normalized));
    }
    if order.is_empty() {
        return Err(malformed(csv_path, "no data rows"));
    }
    Ok(order.into_iter().map(|r| {
        let p = panels.remove(&r).expect("panel");
        (r, p)
    }).collect())
}

fn render(panels: &[(String, Panel)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set terminal pngcairo size 800,{}", 400 * panels.len());
    let _ = writeln!(s, "set output 'series.png'");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set multiplot layout {},1", panels.len());
    for (i, (regime, p)) in panels.iter().enumerate() {
        let _ = writeln!(s, "$d{i} << EOD");
        for (x, y) in &p.points {
            let _ = writeln!(s, "{x:e},{y:e}");
        }
        let _ = writeln!(s, "EOD");
        let logx = p.points.iter().all(|q| q.0 > 0.0);
        let _ = writeln!(s, "{}", if logx { "set logscale x" } else { "unset logscale x" });
        let _ = writeln!(s, "set title '{regime}'");
        let _ = writeln!(s, "set xlabel 'param'");
        let _ = writeln!(s, "set ylabel 'normalized'");
        let _ = writeln!(s, "target{i} = {:e}", p.target);
        let _ = writeln!(s, "plot $d{i} using 1:2 with linespoints title 'normalized', target{i} with lines dashtype 2 title 'target'");
    }
    let _ = writeln!(s, "unset multiplot");
    s
}

/// Writes `series.gp` into `out` and returns its path.
pub fn emit_plot_script(csv_path: &Path, out: &Path) -> Result<PathBuf, Failure> {
    let panels = read_panels(csv_path)?;
    std::fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
    let path = out.join("series.gp");
    std::fs::write(&path, render(&panels)).map_err(|e| Failure::io(&path, e))?;
    Ok(path)
}
