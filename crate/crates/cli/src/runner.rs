//! Cell scheduling, per-cell seeding, and bundle emission.

use std::path::PathBuf;

use anyhow::Context;
use cposterior::mathcore::{derive_stream, RandomSource, RNG_ALGORITHM};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::Alpha;
use crate::output::{write_atomic, Field, Format, Table};

/// One independent unit of work.
#[derive(Clone, Debug)]
pub struct Cell {
    pub alpha: Alpha,
    pub n: usize,
    pub replicate: usize,
    /// Extra grid coordinate for experiments with one (0 otherwise).
    pub variant: usize,
    pub seed: u64,
    pub data_stream: u64,
    pub chain_stream: u64,
}

impl Cell {
    /// Streams depend only on the cell's coordinates, never on list positions
    /// or scheduling. Cells that share `(variant, n, replicate)` see the same
    /// data; `alpha` only selects the sampler stream.
    pub fn new(tag: u64, seed: u64, alpha: Alpha, n: usize, replicate: usize, variant: usize) -> Self {
        let data_stream = derive_stream(derive_stream(derive_stream(tag, variant as u64), n as u64), replicate as u64);
        let chain_stream = derive_stream(data_stream, alpha.stream_label());
        Self { alpha, n, replicate, variant, seed, data_stream, chain_stream }
    }

    pub fn data_rng(&self) -> RandomSource {
        RandomSource::new(self.seed, self.data_stream)
    }

    pub fn chain_rng(&self) -> RandomSource {
        RandomSource::new(self.seed, self.chain_stream)
    }

    /// File-name stem, e.g. `a1250_n100_r3`.
    pub fn id(&self) -> String {
        format!("a{}_n{}_r{}", self.alpha, self.n, self.replicate)
    }
}

/// Output of one cell: a summary row, rows for the optional raw table, and
/// any per-cell files (relative path without extension, table).
#[derive(Default)]
pub struct CellOutput {
    pub summary: Vec<Field>,
    pub raw: Vec<Vec<Field>>,
    pub files: Vec<(String, Table)>,
}

pub trait Driver: Sync {
    fn kind(&self) -> &'static str;
    fn seed(&self) -> u64;
    fn cells(&self) -> Vec<Cell>;
    /// Columns after the provenance columns.
    fn summary_columns(&self) -> Vec<String>;
    /// Name and columns of an optional long-format table.
    fn raw_table(&self) -> Option<(&'static str, Vec<String>)> {
        None
    }
    fn run_cell(&self, cell: &Cell, save_traces: bool) -> anyhow::Result<CellOutput>;
    /// Optional table computed from all successful cells.
    fn aggregate(&self, _done: &[(&Cell, &CellOutput)]) -> Option<(&'static str, Table)> {
        None
    }
    /// The resolved spec, recorded in the manifest.
    fn spec(&self) -> Value;
}

pub struct RunOptions {
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub save_traces: bool,
    pub format: Format,
}

const PROVENANCE: [&str; 7] = ["experiment", "alpha", "n", "replicate", "seed", "data_stream", "chain_stream"];

fn provenance(kind: &str, c: &Cell) -> Vec<Field> {
    vec![
        kind.into(),
        c.alpha.to_string().into(),
        c.n.into(),
        c.replicate.into(),
        c.seed.into(),
        c.data_stream.into(),
        c.chain_stream.into(),
    ]
}

fn with_provenance(columns: Vec<String>) -> Vec<String> {
    PROVENANCE.iter().map(|s| s.to_string()).chain(columns).collect()
}

/// Runs every cell and writes the bundle. Returns the number of failed cells.
pub fn execute(driver: &dyn Driver, opts: &RunOptions) -> anyhow::Result<usize> {
    let cells = driver.cells();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = opts.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().context("starting worker pool")?;
    std::fs::create_dir_all(&opts.out).with_context(|| format!("creating {}", opts.out.display()))?;

    let results: Vec<anyhow::Result<(CellOutput, Vec<String>)>> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let output = driver.run_cell(cell, opts.save_traces)?;
                let mut written = Vec::new();
                for (stem, table) in &output.files {
                    let rel = format!("{stem}.{}", opts.format.extension());
                    write_atomic(&opts.out.join(&rel), &table.to_bytes(opts.format)?)?;
                    written.push(rel);
                }
                Ok((output, written))
            })
            .collect()
    });

    let kind = driver.kind();
    let mut summary = Table::new(with_provenance(driver.summary_columns()));
    let mut raw = driver.raw_table().map(|(name, cols)| (name, Table::new(with_provenance(cols))));
    let mut manifest_cells = Vec::new();
    let mut done = Vec::new();
    let mut failed = 0;
    for (cell, result) in cells.iter().zip(&results) {
        let mut entry = json!({
            "id": cell.id(),
            "alpha": cell.alpha,
            "n": cell.n,
            "replicate": cell.replicate,
            "variant": cell.variant,
            "seed": cell.seed,
            "data_stream": cell.data_stream,
            "chain_stream": cell.chain_stream,
        });
        match result {
            Ok((output, files)) => {
                let mut row = provenance(kind, cell);
                row.extend(output.summary.iter().cloned());
                summary.push(row);
                if let Some((_, t)) = raw.as_mut() {
                    for r in &output.raw {
                        let mut row = provenance(kind, cell);
                        row.extend(r.iter().cloned());
                        t.push(row);
                    }
                }
                entry["status"] = json!("ok");
                entry["files"] = json!(files);
                done.push((cell, output));
            }
            Err(e) => {
                failed += 1;
                entry["status"] = json!("failed");
                entry["error"] = json!(format!("{e:#}"));
            }
        }
        manifest_cells.push(entry);
    }

    let ext = opts.format.extension();
    let mut outputs = Vec::new();
    let mut emit = |name: &str, table: &Table| -> anyhow::Result<()> {
        let rel = format!("{name}.{ext}");
        write_atomic(&opts.out.join(&rel), &table.to_bytes(opts.format)?)?;
        outputs.push(rel);
        Ok(())
    };
    emit("summary", &summary)?;
    if let Some((name, t)) = &raw {
        emit(name, t)?;
    }
    if let Some((name, t)) = driver.aggregate(&done) {
        emit(name, &t)?;
    }
    let manifest = json!({
        "experiment": kind,
        "library_version": cposterior::VERSION,
        "rng": RNG_ALGORITHM,
        "seed": driver.seed(),
        "spec": driver.spec(),
        "save_traces": opts.save_traces,
        "format": ext,
        "outputs": outputs,
        "failed_cells": failed,
        "cells": manifest_cells,
    });
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    write_atomic(&opts.out.join("manifest.json"), &bytes)?;
    Ok(failed)
}

/// Splits `[lo, hi]` into `points` evenly spaced values.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}
