//! Gnuplot script emission for result CSVs.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hermite_fourier::order::{fit_order, ErrorSample, ROUND_OFF_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    ErrorVsCost,
    ErrorVsT,
    OrderFit,
}

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("{path}: missing column '{column}'")]
    MissingColumn { path: String, column: String },
    #[error("{path}: {message}")]
    Data { path: String, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

struct Columns {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Columns {
    fn read(path: &Path) -> Result<Self, PlotError> {
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Self { headers, rows })
    }

    /// 1-based column index for gnuplot.
    fn index(&self, path: &Path, name: &str) -> Result<usize, PlotError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| i + 1)
            .ok_or_else(|| PlotError::MissingColumn {
                path: path.display().to_string(),
                column: name.to_string(),
            })
    }
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn preamble(out: &mut String, csv: &Path, image: &Path) {
    writeln!(out, "set terminal pngcairo size 1000,650").unwrap();
    writeln!(out, "set output {}", quoted(&image.display().to_string())).unwrap();
    writeln!(out, "set datafile separator ','").unwrap();
    writeln!(out, "set grid").unwrap();
    writeln!(out, "set format y '10^{{%L}}'").unwrap();
    writeln!(out, "data = {}", quoted(&csv.display().to_string())).unwrap();
}

/// Writes `<csv>.gp` next to the CSV and returns its path. The script renders `<csv>.png`.
pub fn emit_plot(csv: &Path, kind: PlotKind) -> Result<PathBuf, PlotError> {
    let script_path = csv.with_extension("gp");
    let script = plot_script(csv, kind)?;
    std::fs::write(&script_path, script)?;
    Ok(script_path)
}

pub fn plot_script(csv: &Path, kind: PlotKind) -> Result<String, PlotError> {
    let cols = Columns::read(csv)?;
    let image = csv.with_extension("png");
    let mut s = String::new();
    preamble(&mut s, csv, &image);
    match kind {
        PlotKind::ErrorVsCost => {
            let case = cols.index(csv, "case")?;
            let method = cols.index(csv, "method")?;
            let x = cols.index(csv, "n_exponentials")?;
            let y = cols.index(csv, "l2_error")?;
            writeln!(s, "set logscale xy").unwrap();
            writeln!(s, "set xlabel 'number of exponentials'").unwrap();
            writeln!(s, "set ylabel 'L2 error'").unwrap();
            writeln!(s, "set key outside right").unwrap();
            let series: BTreeSet<(String, String)> = cols
                .rows
                .iter()
                .map(|r| (r[case - 1].clone(), r[method - 1].clone()))
                .collect();
            let parts: Vec<String> = series
                .iter()
                .map(|(c, m)| {
                    format!(
                        "data using (strcol({case}) eq {} && strcol({method}) eq {} ? ${x} : 1/0):{y} with linespoints title {}",
                        quoted(c),
                        quoted(m),
                        quoted(&format!("{c} {m}"))
                    )
                })
                .collect();
            writeln!(s, "plot {}", parts.join(", \\\n     ")).unwrap();
        }
        PlotKind::ErrorVsT => {
            let t = cols.index(csv, "t")?;
            let y = cols.index(csv, "l2_error")?;
            writeln!(s, "set logscale y").unwrap();
            writeln!(s, "set xlabel 'T'").unwrap();
            writeln!(s, "set ylabel 'L2 error'").unwrap();
            writeln!(s, "plot data using {t}:{y} with linespoints title 'single step'").unwrap();
        }
        PlotKind::OrderFit => {
            let hcol = cols.index(csv, "h")?;
            let ecol = cols.index(csv, "l2_error")?;
            let parse = |v: &str| {
                v.parse::<f64>().map_err(|_| PlotError::Data {
                    path: csv.display().to_string(),
                    message: format!("not a number: '{v}'"),
                })
            };
            let samples = cols
                .rows
                .iter()
                .map(|r| {
                    Ok(ErrorSample {
                        h: parse(&r[hcol - 1])?,
                        error: parse(&r[ecol - 1])?,
                    })
                })
                .collect::<Result<Vec<_>, PlotError>>()?;
            let fit = fit_order(&samples, ROUND_OFF_FLOOR).map_err(|e| PlotError::Data {
                path: csv.display().to_string(),
                message: e.to_string(),
            })?;
            writeln!(s, "set logscale xy").unwrap();
            writeln!(s, "set xlabel 'h'").unwrap();
            writeln!(s, "set ylabel 'L2 error'").unwrap();
            writeln!(s, "slope = {:.17e}", fit.slope).unwrap();
            writeln!(s, "intercept = {:.17e}", fit.intercept).unwrap();
            writeln!(s, "fit_line(h) = exp(intercept) * h**slope").unwrap();
            writeln!(s, "set label 1 sprintf('slope = %.3f', slope) at graph 0.05, graph 0.92").unwrap();
            writeln!(
                s,
                "plot data using {hcol}:{ecol} with points pointtype 7 title 'measured', fit_line(x) with lines title 'least-squares fit'"
            )
            .unwrap();
        }
    }
    Ok(s)
}
