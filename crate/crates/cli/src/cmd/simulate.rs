use anyhow::Result;
use projinv_core::simulate::ClaytonVariant;
use projinv_core::{power_curve, RngSeed, Scenario, ScenarioKind, TestPlan};

use super::{scheme, usage};
use crate::args::{ProcedureArg, ScenarioArg, SimulateArgs};
use crate::manifest::{write_file, ManifestBuilder};

pub fn run(args: &SimulateArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::start(Some(args.seed));
    let kind = match args.scenario {
        ScenarioArg::Gauss => ScenarioKind::GaussianMixtureCov {
            dim: args.dim.unwrap_or(6),
            rho: args.rho,
        },
        ScenarioArg::ClaytonC1 | ScenarioArg::ClaytonC2 => {
            if args.dim.is_some_and(|d| d != 3) {
                return Err(usage("the Clayton scenarios are three-dimensional"));
            }
            ScenarioKind::HierarchicalClayton {
                variant: if args.scenario == ScenarioArg::ClaytonC1 {
                    ClaytonVariant::C1
                } else {
                    ClaytonVariant::C2
                },
            }
        }
        ScenarioArg::Sign => ScenarioKind::SignInvariantGaussian {
            dim: args.dim.unwrap_or(3),
        },
        ScenarioArg::Functional => ScenarioKind::FunctionalGaussian { grid: args.grid },
    };
    let params = args.params.clone().unwrap_or_else(|| kind.default_grid());
    let scenario = Scenario::new(kind, args.n, params)?;
    let plan = match args.procedure {
        ProcedureArg::A => TestPlan::A { alpha: args.alpha },
        ProcedureArg::B => TestPlan::B {
            alpha: args.alpha,
            directions: args.directions,
            bootstrap: args.bootstrap,
            scheme: scheme(args.bootstrap_scheme),
        },
        ProcedureArg::PermNull => TestPlan::PermutationNull {
            alpha: args.alpha,
            directions: args.directions,
            replicates: args.null_replicates,
        },
    };

    let curve = power_curve(&scenario, &plan, args.replicates, RngSeed(args.seed))?;
    let mut csv = Vec::new();
    curve.write_csv(&mut csv)?;
    write_file(&args.out, &csv)?;
    manifest.output(&args.out);

    println!("{:>8} {:>8} {:>8}", kind.parameter_name(), "power", "se");
    for p in &curve.points {
        println!("{:>8} {:>8.3} {:>8.4}", p.param, p.power, p.se);
    }
    manifest.finish(&args.out)?;
    Ok(())
}
