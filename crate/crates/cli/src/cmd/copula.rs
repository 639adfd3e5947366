use std::fmt::Write as _;

use anyhow::Result;
use projinv_core::copula::pairwise_symmetry_matrix;
use projinv_core::rank_transform;

use super::{load_input, usage};
use crate::args::CopulaArgs;
use crate::manifest::{write_file, ManifestBuilder};

pub fn run(args: &CopulaArgs) -> Result<()> {
    if args.pairs != "all" {
        return Err(usage(format!("--pairs {:?} is not supported; use `all`", args.pairs)));
    }
    let mut manifest = ManifestBuilder::start(None);
    let data = load_input(&args.input)?;
    manifest.input(&args.input.input);
    let u = rank_transform(&data.to_sample::<f64>())?;
    let s = pairwise_symmetry_matrix(&u)?;

    let mut out = String::new();
    let _ = writeln!(out, ",{}", data.columns.join(","));
    for (name, row) in data.columns.iter().zip(s.rows()) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.10e}")).collect();
        let _ = writeln!(out, "{name},{}", cells.join(","));
    }
    write_file(&args.out, &out)?;
    manifest.output(&args.out);

    let (mut best, mut at) = (f64::NEG_INFINITY, (0, 0));
    for ((a, b), &v) in s.indexed_iter() {
        if a < b && v > best {
            best = v;
            at = (a, b);
        }
    }
    print!("{out}");
    println!(
        "largest asymmetry: ({}, {}) = {best:.6e}",
        data.columns[at.0], data.columns[at.1]
    );
    manifest.finish(&args.out)?;
    Ok(())
}
