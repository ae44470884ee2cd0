//! Resumable metric sweep over `(process, K, gamma, J, seed)` cells.
//!
//! Rows are appended to `sweep.csv` as cells finish, so an interrupted run
//! keeps its work. On restart, cells already present are skipped; once every
//! cell is done the table is rewritten in canonical cell order, which makes
//! the final file independent of scheduling and interruptions.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rayon::prelude::*;

use spinoc_core::io::fmt_float;
use spinoc_core::{ControlOperatorKind, ProcessKind};

use crate::cell::{solve_cell, CellKey, CellOutcome};
use crate::config::ExperimentConfig;
use crate::{io_err, thread_pool, write_file, CliError};

pub const SWEEP_FILE: &str = "sweep.csv";
pub const HEADER: &str =
    "process,control,K,gamma,J,seed,omega_bw,sipr,siprn,fidelity,iterations,delta_e,converged";
const KEY_COLUMNS: usize = 6;
const COLUMNS: usize = 13;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub process: ProcessKind,
    pub control: String,
    pub k: usize,
    pub gamma: f64,
    pub j: f64,
    pub seed: u64,
    pub omega_bw: f64,
    pub sipr: f64,
    pub siprn: f64,
    pub fidelity: f64,
    pub iterations: usize,
    pub delta_e: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub path: PathBuf,
    pub computed: usize,
    pub skipped: usize,
    /// Every configured cell, in canonical order.
    pub rows: Vec<SweepRow>,
}

impl SweepSummary {
    pub fn unconverged(&self) -> usize {
        self.rows.iter().filter(|r| !r.converged).count()
    }
}

pub fn control_name(kind: ControlOperatorKind) -> &'static str {
    match kind {
        ControlOperatorKind::LocalEdge => "local_edge",
        ControlOperatorKind::LongRange => "long_range",
    }
}

/// Cells in canonical order. Process A gets a single cell with seed 0.
pub fn cells(cfg: &ExperimentConfig) -> Vec<CellKey> {
    let mut out = Vec::new();
    for &process in &cfg.processes {
        let seeds: Vec<u64> = match process {
            ProcessKind::A => vec![0],
            ProcessKind::B => cfg.seeds.clone(),
        };
        for &k in &cfg.k_values {
            for &gamma in &cfg.gamma_grid {
                for &j in &cfg.j_grid {
                    for &seed in &seeds {
                        out.push(CellKey {
                            process,
                            k,
                            gamma,
                            j,
                            seed,
                        });
                    }
                }
            }
        }
    }
    out
}

fn key_text(control: ControlOperatorKind, key: &CellKey) -> String {
    format!(
        "{},{},{},{},{},{}",
        key.process,
        control_name(control),
        key.k,
        fmt_float(key.gamma),
        fmt_float(key.j),
        key.seed
    )
}

pub fn write_header<W: Write>(w: &mut W) -> io::Result<()> {
    writeln!(w, "{HEADER}")
}

pub fn format_row(cfg: &ExperimentConfig, o: &CellOutcome) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        key_text(cfg.control, &o.key),
        fmt_float(o.metrics.omega_bw),
        fmt_float(o.metrics.sipr),
        fmt_float(o.metrics.siprn),
        fmt_float(o.fidelity),
        o.iterations,
        fmt_float(o.delta_e),
        o.converged
    )
}

pub fn write_row<W: Write>(w: &mut W, cfg: &ExperimentConfig, o: &CellOutcome) -> io::Result<()> {
    writeln!(w, "{}", format_row(cfg, o))
}

pub fn parse_row(line: &str) -> Option<SweepRow> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != COLUMNS {
        return None;
    }
    let num = |i: usize| f[i].parse::<f64>().ok();
    Some(SweepRow {
        process: match f[0] {
            "A" => ProcessKind::A,
            "B" => ProcessKind::B,
            _ => return None,
        },
        control: f[1].to_string(),
        k: f[2].parse().ok()?,
        gamma: num(3)?,
        j: num(4)?,
        seed: f[5].parse().ok()?,
        omega_bw: num(6)?,
        sipr: num(7)?,
        siprn: num(8)?,
        fidelity: num(9)?,
        iterations: f[10].parse().ok()?,
        delta_e: num(11)?,
        converged: f[12].parse().ok()?,
    })
}

fn row_key(line: &str) -> String {
    line.splitn(KEY_COLUMNS + 1, ',')
        .take(KEY_COLUMNS)
        .collect::<Vec<_>>()
        .join(",")
}

/// Complete, well-formed rows of an earlier run, keyed by cell. A trailing
/// partial line from an interrupted write is dropped.
fn read_existing(path: &Path) -> Result<Vec<String>, CliError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut lines = text.split_inclusive('\n');
    match lines.next() {
        None => return Ok(Vec::new()),
        Some(h) if h.trim_end() == HEADER => {}
        Some(_) => return Err(CliError::IncompatibleOutput(path.display().to_string())),
    }
    Ok(lines
        .filter(|l| l.ends_with('\n'))
        .map(|l| l.trim_end().to_string())
        .filter(|l| parse_row(l).is_some())
        .collect())
}

fn rewrite(path: &Path, rows: &[String]) -> Result<(), CliError> {
    let tmp = path.with_extension("csv.tmp");
    write_file(&tmp, |w| {
        write_header(w)?;
        for r in rows {
            writeln!(w, "{r}")?;
        }
        Ok(())
    })?;
    std::fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn run_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<SweepSummary, CliError> {
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let path = out.join(SWEEP_FILE);
    let all = cells(cfg);

    let mut done: HashMap<String, String> = HashMap::new();
    let mut foreign = Vec::new();
    let wanted: HashMap<String, usize> = all
        .iter()
        .enumerate()
        .map(|(i, k)| (key_text(cfg.control, k), i))
        .collect();
    for line in read_existing(&path)? {
        let key = row_key(&line);
        if wanted.contains_key(&key) {
            done.insert(key, line);
        } else {
            foreign.push(line);
        }
    }
    // Start the append log from the clean rows so a torn line cannot linger.
    let mut resumed: Vec<String> = done.values().cloned().collect();
    resumed.sort();
    resumed.extend(foreign.iter().cloned());
    rewrite(&path, &resumed)?;

    let todo: Vec<CellKey> = all
        .iter()
        .filter(|k| !done.contains_key(&key_text(cfg.control, k)))
        .copied()
        .collect();
    let skipped = all.len() - todo.len();

    let pool = thread_pool(cfg.jobs)?;
    let (tx, rx) = mpsc::channel::<Result<CellOutcome, CliError>>();
    let mut first_error = None;
    std::thread::scope(|scope| -> Result<(), CliError> {
        let writer = scope.spawn(|| -> Result<(Vec<String>, Option<CliError>), CliError> {
            let file = OpenOptions::new().append(true).open(&path).map_err(io_err(&path))?;
            let mut file = io::BufWriter::new(file);
            let mut lines = Vec::new();
            let mut err = None;
            for msg in rx {
                match msg {
                    Ok(outcome) => {
                        let line = format_row(cfg, &outcome);
                        writeln!(file, "{line}")
                            .and_then(|_| file.flush())
                            .map_err(io_err(&path))?;
                        lines.push(line);
                    }
                    Err(e) => {
                        err.get_or_insert(e);
                    }
                }
            }
            Ok((lines, err))
        });
        pool.install(|| {
            todo.par_iter().for_each_with(tx, |tx, key| {
                let _ = tx.send(solve_cell(cfg, *key).map(|run| run.outcome));
            });
        });
        let (lines, err) = writer.join().expect("writer thread panicked")?;
        first_error = err;
        for line in lines {
            done.insert(row_key(&line), line);
        }
        Ok(())
    })?;

    let mut ordered: Vec<(usize, String)> = done
        .into_iter()
        .map(|(key, line)| (wanted[&key], line))
        .collect();
    ordered.sort_by_key(|(i, _)| *i);
    let mut final_rows: Vec<String> = ordered.into_iter().map(|(_, l)| l).collect();
    let rows: Vec<SweepRow> = final_rows.iter().filter_map(|l| parse_row(l)).collect();
    final_rows.extend(foreign);
    rewrite(&path, &final_rows)?;

    if let Some(e) = first_error {
        return Err(e);
    }
    Ok(SweepSummary {
        path,
        computed: todo.len(),
        skipped,
        rows,
    })
}
