//! CSV emitters and readers for trajectories, the accuracy table, and the
//! two-panel figure data. Values are written in scientific notation with
//! 13 significant digits so a written file reads back to full precision.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use dqssa_core::{Table1, Trajectory};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvReadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,{}", traj.components().join(","))?;
    for i in 0..traj.len() {
        write!(w, "{:.12e}", traj.time(i))?;
        for v in traj.row(i) {
            write!(w, ",{v:.12e}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

/// Parsed trajectory file: component names (without the time column),
/// sample times, and one row of values per sample.
pub struct CsvTrajectory {
    pub components: Vec<String>,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_trajectory_csv(path: &Path) -> Result<CsvTrajectory, CsvReadError> {
    let text = std::fs::read_to_string(path).map_err(|source| CsvReadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parse_err = |line: usize, reason: String| CsvReadError::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".to_string()))?;
    let mut fields = header.split(',');
    if fields.next() != Some("t") {
        return Err(parse_err(1, "first column must be 't'".to_string()));
    }
    let components: Vec<String> = fields.map(str::to_string).collect();

    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut values = raw.split(',').map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("'{v}' is not a number")))
        });
        let t = values
            .next()
            .ok_or_else(|| parse_err(line, "missing time".to_string()))??;
        let row: Vec<f64> = values.collect::<Result<_, _>>()?;
        if row.len() != components.len() {
            return Err(parse_err(
                line,
                format!("expected {} values, got {}", components.len(), row.len()),
            ));
        }
        times.push(t);
        rows.push(row);
    }
    Ok(CsvTrajectory {
        components,
        times,
        rows,
    })
}

/// Machine-readable accuracy table. The original system's error columns
/// are empty: it is the reference.
pub fn write_table1_csv(path: &Path, table: &Table1) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "system,period_h,rel_err_period_pct,rel_err_l2_pct")?;
    writeln!(w, "original,{:.6},,", table.p_orig)?;
    for rep in &table.reports {
        writeln!(
            w,
            "{},{:.6},{:.4},{:.4}",
            rep.system,
            rep.p_approx,
            100.0 * rep.rel_err_period,
            100.0 * rep.rel_err_l2
        )?;
    }
    w.flush()
}

/// Human-readable rendering of the accuracy table.
pub fn render_table1_text(table: &Table1) -> String {
    let mut headers = vec!["original".to_string()];
    let mut periods = vec![format!("{:.1} h", table.p_orig)];
    let mut rel_p = vec!["---".to_string()];
    let mut rel_l2 = vec!["---".to_string()];
    for rep in &table.reports {
        headers.push(rep.system.to_string());
        periods.push(format!("{:.1} h", rep.p_approx));
        rel_p.push(format!("{:.2} %", 100.0 * rep.rel_err_period));
        rel_l2.push(format!("{:.1} %", 100.0 * rep.rel_err_l2));
    }
    let mut out = String::new();
    let rows: [(&str, &[String]); 4] = [
        ("", &headers),
        ("period", &periods),
        ("RelErr(period)", &rel_p),
        ("RelErr(L2)", &rel_l2),
    ];
    for (label, cells) in rows {
        out.push_str(&format!("{label:>15}"));
        for cell in cells {
            out.push_str(&format!("{cell:>17}"));
        }
        out.push('\n');
    }
    out
}

/// One figure panel: the plotted components of the original run side by
/// side with an approximation's, on the shared time grid.
pub fn write_panel_csv(
    path: &Path,
    f: &Trajectory,
    g: &Trajectory,
    tag: &str,
) -> io::Result<()> {
    assert_eq!(f.len(), g.len(), "panel trajectories share one grid");
    let pick = |t: &Trajectory| {
        [
            t.component_index("D_R").expect("D_R present"),
            t.component_index("M_R").expect("M_R present"),
            t.component_index("R").expect("R present"),
        ]
    };
    let fi = pick(f);
    let gi = pick(g);
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "t,D_R_orig,M_R_orig,R_orig,D_R_{tag},M_R_{tag},R_{tag}"
    )?;
    for i in 0..f.len() {
        write!(w, "{:.12e}", f.time(i))?;
        for k in fi {
            write!(w, ",{:.12e}", f.row(i)[k])?;
        }
        for k in gi {
            write!(w, ",{:.12e}", g.row(i)[k])?;
        }
        writeln!(w)?;
    }
    w.flush()
}
