mod args;
mod commands;
mod config;
mod error;
mod inputs;
mod output;

use clap::{ArgMatches, CommandFactory, FromArgMatches};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use args::{Cli, Command, InterpCommand, OrliczCommand, WeightsCommand};
use commands::Ctx;
use error::CliError;
use inputs::Inputs;
use output::Report;

fn main() {
    std::process::exit(dispatch(std::env::args_os()));
}

/// Merges one leaf's flags with the config file and records the result.
struct Resolver<'a> {
    root: clap::Command,
    matches: &'a ArgMatches,
    config: Map<String, Value>,
    resolved: Map<String, Value>,
}

impl Resolver<'_> {
    fn leaf<T: Serialize + DeserializeOwned>(&mut self, path: &[&str], parsed: &T) -> Result<T, CliError> {
        let mut cmd = &self.root;
        let mut m = self.matches;
        for name in path {
            cmd = cmd.find_subcommand(name).expect("subcommand exists");
            m = m.subcommand_matches(name).expect("subcommand matched");
        }
        let merged = config::merge(parsed, cmd, m, &mut self.config)?;
        config::finish(&mut self.config, &path.join(" "))?;
        if let Value::Object(o) = output::value(&merged) {
            self.resolved.extend(o);
        }
        Ok(merged)
    }
}

fn dispatch(argv: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let root = Cli::command();
    let matches = match root.clone().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(root, &matches) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(root: clap::Command, matches: &ArgMatches) -> Result<(), CliError> {
    let cli = Cli::from_arg_matches(matches).map_err(|e| CliError::Input(e.to_string()))?;
    let config = config::load(cli.common.config.as_deref())?;
    let mut r = Resolver {
        root,
        matches,
        config,
        resolved: Map::new(),
    };
    let common = config::merge(&cli.common, &r.root.clone(), matches, &mut r.config)?;
    if let Value::Object(o) = output::value(&common) {
        r.resolved.extend(o);
    }

    let budget = maxrect::BasisBudget::new(common.budget)?;
    if let Some(k) = common.threads {
        if k == 0 {
            return Err(CliError::Input("--threads: must be at least 1".into()));
        }
        // the pool can only be set once per process; later calls are harmless no-ops
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let mut ctx = Ctx {
        opts: maxrect::MaximalOptions {
            budget,
            threads: common.threads,
            ..Default::default()
        },
        seed: common.seed,
        inputs: Inputs::default(),
    };

    let (name, mut report): (&str, Report) = match &cli.command {
        Command::Compute(a) => ("compute", commands::compute(&mut ctx, &r.leaf(&["compute"], a)?)?),
        Command::Orlicz(OrliczCommand::Norm(a)) => ("orlicz norm", commands::orlicz_norm(&mut ctx, &r.leaf(&["orlicz", "norm"], a)?)?),
        Command::Weights(WeightsCommand::Apvec(a)) => {
            ("weights apvec", commands::weights_apvec(&mut ctx, &r.leaf(&["weights", "apvec"], a)?)?)
        }
        Command::Cover(a) => ("cover", commands::cover(&mut ctx, &r.leaf(&["cover"], a)?)?),
        Command::Interp(InterpCommand::L1lp(a)) => ("interp l1lp", commands::interp_l1lp(&mut ctx, &r.leaf(&["interp", "l1lp"], a)?)?),
        Command::Interp(InterpCommand::Strong(a)) => {
            ("interp strong", commands::interp_strong(&mut ctx, &r.leaf(&["interp", "strong"], a)?)?)
        }
        Command::Jmz(a) => ("jmz", commands::jmz(&mut ctx, &r.leaf(&["jmz"], a)?)?),
        Command::Bsmf(a) => ("bsmf", commands::bsmf(&mut ctx, &r.leaf(&["bsmf"], a)?)?),
        Command::Sharpness(a) => ("sharpness", commands::sharpness(&mut ctx, &r.leaf(&["sharpness"], a)?)?),
        Command::Probe(a) => ("probe", commands::probe(&mut ctx, &r.leaf(&["probe"], a)?)?),
    };

    if common.zero_timings {
        report.zero_timings();
    }
    let bytes = report.render(common.format)?;
    output::write_bytes(common.out.as_deref(), &bytes)?;
    if let Some(path) = output::manifest_path(common.manifest.as_deref(), common.out.as_deref()) {
        let digest = common.out.as_ref().map(|_| bytes.as_slice());
        let m = output::manifest(name, r.resolved, common.seed, &ctx.inputs.digests, digest);
        output::write_bytes(Some(&path), output::to_json_text(&m).as_bytes())?;
    }
    match report.check_failure {
        Some(msg) => Err(CliError::Check(msg)),
        None => Ok(()),
    }
}
