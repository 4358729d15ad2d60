//! `splitsynth`: embeddability checks, net synthesis and label splitting
//! for labelled transition systems.
//!
//! Exit codes: 0 yes, 1 no, 2 bad input, 3 search budget exhausted.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use splitsynth::petri::{EmbeddingVerdict, PetriError, DEFAULT_STATE_BOUND};
use splitsynth::reduction::{self, SubsetSumInstance};
use splitsynth::regions::EmbeddabilityReport;
use splitsynth::splitting::{self, OptimizeOutcome, SearchConfig, SplitOutcome};
use splitsynth::{Lts, PetriNet, RegionSystem};

#[derive(Parser)]
#[command(name = "splitsynth", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether an LTS embeds into some Petri net's reachability graph
    Check { lts: PathBuf },
    /// Synthesize a net whose reachability graph contains the LTS
    Synth {
        lts: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print a net's reachability graph as an LTS
    Rg {
        net: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STATE_BOUND)]
        bound: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check that the LTS embeds into the given net's reachability graph
    Verify { lts: PathBuf, net: PathBuf },
    /// Search for a label splitting that makes the LTS embeddable
    #[command(group(ArgGroup::new("goal").required(true).args(["max_labels", "optimize"])))]
    Split {
        lts: PathBuf,
        #[arg(long)]
        max_labels: Option<usize>,
        #[arg(long)]
        optimize: bool,
        #[arg(long)]
        node_budget: Option<u64>,
        /// Write the relabelled LTS here
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build the splitting gadget for a subset-sum instance
    Reduce {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve a subset-sum instance by exhaustive search
    Oracle {
        #[command(flatten)]
        instance: InstanceArgs,
    },
}

#[derive(clap::Args)]
#[command(group(ArgGroup::new("source").required(true).args(["b", "instance"])))]
struct InstanceArgs {
    #[arg(long, requires = "c")]
    b: Option<u64>,
    #[arg(long, value_delimiter = ',', requires = "b")]
    c: Option<Vec<u64>>,
    /// File in `subsetsum <b> <c1> ...` format
    #[arg(long, conflicts_with_all = ["b", "c"])]
    instance: Option<PathBuf>,
}

/// Bad input; reported on stderr with exit code 2.
struct InputError(String);

type Outcome = Result<ExitCode, InputError>;

const YES: u8 = 0;
const NO: u8 = 1;
const BAD_INPUT: u8 = 2;
const BUDGET_EXHAUSTED: u8 = 3;

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), InputError> {
    fs::write(path, text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), InputError> {
    match output {
        Some(path) => write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_lts(path: &Path) -> Result<Lts, InputError> {
    Lts::parse_valid(&read(path)?).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_net(path: &Path) -> Result<PetriNet, InputError> {
    PetriNet::parse(&read(path)?).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_instance(args: &InstanceArgs) -> Result<SubsetSumInstance, InputError> {
    match (&args.instance, args.b, &args.c) {
        (Some(path), _, _) => SubsetSumInstance::parse(&read(path)?)
            .map_err(|e| InputError(format!("{}: {e}", path.display()))),
        (None, Some(b), Some(c)) => {
            SubsetSumInstance::new(b, c.clone()).map_err(|e| InputError(e.to_string()))
        }
        _ => Err(InputError("give --b and --c, or --instance".into())),
    }
}

fn not_embeddable(lts: &Lts, s: usize, t: usize) -> ExitCode {
    println!("not-embeddable {} {}", lts.state_name(s), lts.state_name(t));
    ExitCode::from(NO)
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Check { lts } => {
            let lts = load_lts(&lts)?;
            match RegionSystem::new(&lts).is_embeddable() {
                EmbeddabilityReport::Embeddable { .. } => {
                    println!("embeddable");
                    Ok(ExitCode::from(YES))
                }
                EmbeddabilityReport::NotEmbeddable { pair: (s, t) } => {
                    Ok(not_embeddable(&lts, s, t))
                }
            }
        }
        Command::Synth { lts, output } => {
            let lts = load_lts(&lts)?;
            if let EmbeddabilityReport::NotEmbeddable { pair: (s, t) } =
                RegionSystem::new(&lts).is_embeddable()
            {
                return Ok(not_embeddable(&lts, s, t));
            }
            let net = splitsynth::synthesize(&lts).expect("embeddable LTSs always synthesize");
            emit(output.as_deref(), &net.to_string())?;
            Ok(ExitCode::from(YES))
        }
        Command::Rg { net, bound, output } => {
            let net = load_net(&net)?;
            match net.reachability_graph(bound) {
                Ok(rg) => {
                    emit(output.as_deref(), &rg.to_string())?;
                    Ok(ExitCode::from(YES))
                }
                Err(PetriError::BoundExceeded(_)) => {
                    println!("bound-exceeded");
                    Ok(ExitCode::from(NO))
                }
                Err(e) => Err(InputError(e.to_string())),
            }
        }
        Command::Verify { lts, net } => {
            let lts = load_lts(&lts)?;
            let net = load_net(&net)?;
            match net.verify_embedding(&lts) {
                Ok(EmbeddingVerdict::Embeds(_)) => {
                    println!("embeds");
                    Ok(ExitCode::from(YES))
                }
                Ok(EmbeddingVerdict::DoesNotEmbed(reason)) => {
                    println!("does-not-embed {reason}");
                    Ok(ExitCode::from(NO))
                }
                Err(PetriError::LabelNotTransition(label)) => {
                    println!("does-not-embed no-transition {label}");
                    Ok(ExitCode::from(NO))
                }
                Err(e) => Err(InputError(e.to_string())),
            }
        }
        Command::Split {
            lts,
            max_labels,
            optimize,
            node_budget,
            output,
        } => {
            let lts = load_lts(&lts)?;
            let config = SearchConfig {
                node_budget,
                ..SearchConfig::default()
            };
            let outcome = if optimize {
                match splitting::optimize_with(&lts, &config) {
                    OptimizeOutcome::Optimal { splitting, .. } => SplitOutcome::Found(splitting),
                    OptimizeOutcome::BudgetExhausted { .. } => SplitOutcome::BudgetExhausted,
                }
            } else {
                let q = max_labels.expect("clap enforces the goal group");
                splitting::decide_with(&lts, q, &config)
            };
            match outcome {
                SplitOutcome::Found(sp) => {
                    print!("{}", sp.to_text(&lts));
                    if let Some(path) = output {
                        let split =
                            splitting::apply(&lts, &sp).expect("search yields valid splittings");
                        write(&path, &split.to_string())?;
                    }
                    Ok(ExitCode::from(YES))
                }
                SplitOutcome::NotFound => {
                    println!("not-found");
                    Ok(ExitCode::from(NO))
                }
                SplitOutcome::BudgetExhausted => {
                    println!("budget-exhausted");
                    Ok(ExitCode::from(BUDGET_EXHAUSTED))
                }
            }
        }
        Command::Reduce { instance, output } => {
            let inst = load_instance(&instance)?;
            let params = reduction::params(&inst);
            if let Some(path) = output {
                write(&path, &reduction::build_lts(&inst).to_string())?;
            }
            println!("k={} q={}", params.k, params.q);
            Ok(ExitCode::from(YES))
        }
        Command::Oracle { instance } => {
            let inst = load_instance(&instance)?;
            match reduction::subset_sum_brute(&inst).map_err(|e| InputError(e.to_string()))? {
                Some(set) => {
                    println!("{set}");
                    Ok(ExitCode::from(YES))
                }
                None => {
                    println!("none");
                    Ok(ExitCode::from(NO))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(InputError(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(BAD_INPUT)
        }
    }
}
