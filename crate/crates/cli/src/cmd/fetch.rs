use std::fs;
use std::process::Command;

use anyhow::{bail, Context, Result};

use crate::args::FetchArgs;

const STATLOG_BASE: &str = "https://archive.ics.uci.edu/ml/machine-learning-databases/statlog/satimage";
const STATLOG_FILES: [&str; 2] = ["sat.trn", "sat.tst"];

const AIS_HELP: &str = "\
AIS biometrics (202 rows, 13 variables) ships with the R package locfit:
    Rscript -e 'library(locfit); data(ais); write.csv(ais, \"ais.csv\", row.names = FALSE)'
then run
    projinv test --input ais.csv --columns RCC,Hc,Hg,LBM,Ht --procedure perm-null --replicates 10000";

const STATLOG_HELP: &str = "\
Statlog satellite: space-delimited, no header, 36 attributes followed by the class label.
    projinv test --input data/sat.trn --delimiter space --no-header --columns 1-36 \\
        --procedure perm-null --prefix-sizes 50,150,250,350,450,550";

pub fn run(args: &FetchArgs) -> Result<()> {
    println!("{AIS_HELP}\n");
    println!("{STATLOG_HELP}\n");
    if !args.allow_network {
        for f in STATLOG_FILES {
            println!("{STATLOG_BASE}/{f}");
        }
        println!("\nnothing downloaded; pass --allow-network to fetch the Statlog files with curl");
        return Ok(());
    }
    fs::create_dir_all(&args.dir).with_context(|| format!("creating {}", args.dir.display()))?;
    for f in STATLOG_FILES {
        let target = args.dir.join(f);
        let status = Command::new("curl")
            .args(["-fsSL", "-o"])
            .arg(&target)
            .arg(format!("{STATLOG_BASE}/{f}"))
            .status()
            .context("running curl")?;
        if !status.success() {
            bail!("download of {f} failed ({status})");
        }
        println!("wrote {}", target.display());
    }
    Ok(())
}
