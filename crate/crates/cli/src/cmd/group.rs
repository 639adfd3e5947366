use anyhow::Result;
use projinv_core::group::MATRIX_TOL;
use projinv_core::closure;

use super::{resolve_group, usage};
use crate::args::GroupArgs;
use crate::manifest::{write_file, ManifestBuilder};

pub fn run(args: &GroupArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::start(None);
    let dim = match (args.group.starts_with("file:"), args.dim) {
        (true, _) => 0,
        (false, Some(d)) => d,
        (false, None) => return Err(usage("--dim is required for the built-in groups")),
    };
    let group = resolve_group(&args.group, dim)?;
    if let Some(path) = args.group.strip_prefix("file:") {
        manifest.input(std::path::Path::new(path));
    }
    if args.dim.is_some_and(|d| d != group.dim()) {
        return Err(usage(format!("group acts on dimension {}, not {}", group.dim(), dim)));
    }

    println!("group {}  dim {}  generators {}", group.name(), group.dim(), group.len());
    for g in group.generators() {
        let kind = match g.as_signed_permutation() {
            Some(p) if p.is_unsigned() => "permutation",
            Some(_) => "signed permutation",
            None => "general",
        };
        println!(
            "  {:<20} {:<18} orthogonal: {}",
            g.label(),
            kind,
            g.is_orthogonal(MATRIX_TOL)
        );
    }
    println!(
        "procedure a: {}",
        if group.all_orthogonal(MATRIX_TOL) {
            "available"
        } else {
            "unavailable (non-orthogonal generator), use procedure b"
        }
    );
    println!("perm-null: {}", if group.is_permutation_group() { "available" } else { "unavailable" });
    if args.closure {
        let elements = closure(&group, args.cap)?;
        println!("order {}", elements.len());
    }
    if let Some(path) = &args.export {
        write_file(path, group.to_json_string()? + "\n")?;
        manifest.output(path);
        manifest.finish(path)?;
    }
    Ok(())
}
