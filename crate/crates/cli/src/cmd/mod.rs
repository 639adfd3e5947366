pub mod copula;
pub mod fetch;
pub mod group;
pub mod simulate;

use std::fmt;

use anyhow::{Context, Result};
use projinv_core::data_io::{load_delimited, LoadOptions};
use projinv_core::{permutation_generators, signed_permutation_generators, BootstrapScheme, Dataset, GroupSpec};

use crate::args::{InputArgs, SchemeArg};

/// A mistake in the command line itself. Exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// 2 for usage and precondition errors, 3 for everything touching data.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use projinv_core::Error as E;
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Data(_) | E::Io(_) | E::Csv(_) | E::Json(_) => 3,
                _ => 2,
            };
        }
    }
    3
}

fn delimiter(spec: &str) -> Result<u8> {
    match spec {
        "tab" | "\\t" => Ok(b'\t'),
        "space" => Ok(b' '),
        s if s.len() == 1 => Ok(s.as_bytes()[0]),
        s => Err(usage(format!("delimiter must be one ASCII character, `tab` or `space`, got {s:?}"))),
    }
}

pub fn load_input(args: &InputArgs) -> Result<Dataset> {
    let opts = LoadOptions {
        delimiter: delimiter(&args.delimiter)?,
        has_header: !args.no_header,
    };
    let data = load_delimited(&args.input, args.columns.as_deref(), &opts)
        .with_context(|| format!("loading {}", args.input.display()))?;
    if data.dropped_rows > 0 {
        eprintln!("{}: dropped {} incomplete rows", data.name, data.dropped_rows);
    }
    Ok(data)
}

/// Resolves `exchangeable`, `sign-exchangeable` or `file:PATH`.
pub fn resolve_group(spec: &str, dim: usize) -> Result<GroupSpec<f64>> {
    let group = match spec {
        "exchangeable" => permutation_generators(dim)?,
        "sign-exchangeable" => signed_permutation_generators(dim)?,
        s => match s.strip_prefix("file:") {
            Some(path) => GroupSpec::from_json_file(path).with_context(|| format!("reading group file {path}"))?,
            None => {
                return Err(usage(format!(
                    "unknown group {s:?}; expected exchangeable, sign-exchangeable or file:PATH"
                )))
            }
        },
    };
    Ok(group)
}

pub fn scheme(arg: SchemeArg) -> BootstrapScheme {
    match arg {
        SchemeArg::Symmetrized => BootstrapScheme::Symmetrized,
        SchemeArg::Plain => BootstrapScheme::Plain,
    }
}
