use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use seconet::baselines::generate_ba;
use seconet::config::parse_config;
use seconet::model::rng_from_seed;
use seconet::output::{self, TOPOLOGY_HEADER};
use seconet::runner::run_simulation;
use seconet::topology::{topology_report, Graph};
use seconet::Error;

#[derive(Parser)]
#[command(name = "seconet", version, about = "Contact network growth and SIR transmission")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grow networks and run the epidemic for every replicate and sweep value.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        sweep_m: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        snapshot_at: Option<Vec<u64>>,
    },
    /// Topology report for a saved edge list.
    Analyze {
        #[arg(long)]
        edges: PathBuf,
        /// Node count; defaults to the number of distinct ids in the file.
        #[arg(long)]
        nodes: Option<usize>,
        /// Also write topology.csv and its companions under this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Barabási–Albert reference network.
    Ba {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        m0: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the edge list here as `source,target`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, out, seed, replicates, sweep_m, snapshot_at } => {
            let mut spec = parse_config(&config)?;
            if let Some(out) = out {
                spec.out = out;
            }
            if let Some(seed) = seed {
                spec.config.rng_seed = seed;
            }
            if let Some(r) = replicates {
                spec.replicates = r;
            }
            if sweep_m.is_some() {
                spec.sweep_m = sweep_m;
            }
            if snapshot_at.is_some() {
                spec.snapshot_at = snapshot_at;
            }
            let batch = run_simulation(&spec)?;
            eprintln!("{} runs written to {}", batch.outcomes.len(), spec.out.display());
        }
        Command::Analyze { edges, nodes, out } => {
            let rels = output::read_edge_list(&edges)?;
            let mut index = BTreeMap::new();
            for r in &rels {
                for id in [r.female, r.male] {
                    let next = index.len();
                    index.entry(id).or_insert(next);
                }
            }
            let node_count = nodes.unwrap_or(index.len());
            if node_count < index.len() {
                return Err(Error::Config(format!(
                    "--nodes {node_count} is smaller than the {} ids present",
                    index.len()
                )));
            }
            let graph = Graph::new(node_count, rels.iter().map(|r| (index[&r.female], index[&r.male])).collect());
            let report = topology_report(&graph)?;
            println!("{TOPOLOGY_HEADER}");
            println!("{}", output::topology_row(&report));
            if let Some(out) = out {
                output::write_topology_report(&report, &out)?;
            }
        }
        Command::Ba { n, m, m0, seed, out } => {
            let ba = generate_ba(n, m, m0.unwrap_or(m + 1), &mut rng_from_seed(seed))?;
            if let Some(out) = &out {
                let mut text = String::from("source,target\n");
                for (a, b) in &ba.edges {
                    text.push_str(&format!("{a},{b}\n"));
                }
                std::fs::write(out, text).map_err(|e| Error::Io { path: out.clone(), source: e })?;
            }
            let report = topology_report(&ba.graph())?;
            println!("{TOPOLOGY_HEADER}");
            println!("{}", output::topology_row(&report));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
