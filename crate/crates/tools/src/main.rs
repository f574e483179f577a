use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use treedet::autfmt::{parse_automaton, parse_word, write_automaton, write_word};
use treedet::compare::{compare, CompareOptions};
use treedet::prooffmt::{bt_from_json, bt_to_json, nw_from_json, read_json, write_json};
use treedet::{dict, dot, read_file, write_file, ToolError};
use treedet_core::automata::{accepts_lasso, run_prefix, Acceptance, CompareReport};
use treedet_core::btproof::{check_bt, prove, translate_nw_to_bt, ProverConfig};
use treedet_core::determinize::{det_buchi, det_parity};
use treedet_core::mucalc::{closure, parse_formula};
use treedet_core::nwproof::check_nw;
use treedet_core::Sequent;

#[derive(Parser)]
#[command(name = "treedet", version, about = "Tree-based determinization of stream automata and cyclic proofs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse formulas and inspect their closure.
    #[command(subcommand)]
    Formula(FormulaCmd),
    /// Determinize, run and compare automata.
    #[command(subcommand)]
    Aut(AutCmd),
    /// Check and translate cyclic proofs.
    #[command(subcommand)]
    Proof(ProofCmd),
    /// Search for an annotated proof of a sequent.
    Prove {
        /// A formula of the sequent; repeat for several.
        #[arg(long, required = true)]
        formula: Vec<String>,
        /// Maximal proof height.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        emit_dot: Option<String>,
    },
}

#[derive(Subcommand)]
enum FormulaCmd {
    /// Print the formula in canonical syntax.
    Parse {
        #[arg(long)]
        formula: String,
    },
    /// List the closure with priorities and successors.
    Closure {
        #[arg(long, required = true)]
        formula: Vec<String>,
    },
}

#[derive(Subcommand)]
enum AutCmd {
    /// Determinize a Büchi or parity automaton into a Rabin automaton.
    Determinize {
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        out: String,
        /// Write the macrostate dictionary here.
        #[arg(long)]
        dict: Option<String>,
        #[arg(long)]
        emit_dot: Option<String>,
    },
    /// Print the first states of the run of a deterministic automaton.
    Run {
        #[arg(long = "in")]
        input: String,
        /// Lasso word such as `a b (a)`.
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 8)]
        steps: usize,
    },
    /// Decide whether an automaton accepts a lasso word.
    Accepts {
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        word: String,
    },
    /// Compare two automata on all short lassos or a seeded sample.
    Compare {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long, default_value_t = 3)]
        max_stem: usize,
        #[arg(long, default_value_t = 4)]
        max_loop: usize,
        /// Test this many sampled lassos instead of all of them.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum System {
    Nw,
    Bt,
}

#[derive(Subcommand)]
enum ProofCmd {
    /// Check a proof file.
    Check {
        #[arg(long, value_enum)]
        system: System,
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        emit_dot: Option<String>,
    },
    /// Turn an unannotated proof into an annotated one.
    Translate {
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        out: String,
        /// Maximal depth of the unfolding.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long)]
        emit_dot: Option<String>,
    },
}

enum Outcome {
    Yes,
    No,
}

fn sequent(items: &[String]) -> Result<Sequent, ToolError> {
    items.iter().map(|s| Ok(parse_formula(s)?)).collect()
}

fn emit(path: &Option<String>, text: impl FnOnce() -> String) -> Result<(), ToolError> {
    match path {
        Some(p) => write_file(p, &text()),
        None => Ok(()),
    }
}

fn formula(cmd: FormulaCmd) -> Result<Outcome, ToolError> {
    match cmd {
        FormulaCmd::Parse { formula } => println!("{}", parse_formula(&formula)?),
        FormulaCmd::Closure { formula } => {
            let t = closure(&sequent(&formula)?);
            for f in &t.members {
                let succ: Vec<String> = t.edges.get(f).into_iter().flatten().map(|g| g.to_string()).collect();
                match t.omega_of(f) {
                    Some(o) => println!("{f}  [{o}]  -> {}", succ.join("; ")),
                    None => println!("{f}  -> {}", succ.join("; ")),
                }
            }
        }
    }
    Ok(Outcome::Yes)
}

fn aut(cmd: AutCmd) -> Result<Outcome, ToolError> {
    match cmd {
        AutCmd::Determinize {
            input,
            out,
            dict: dict_path,
            emit_dot,
        } => {
            let a = parse_automaton(&read_file(&input)?)?;
            let (d, listing) = match a.acceptance() {
                Acceptance::Buchi(_) => {
                    let d = det_buchi(&a)?;
                    let listing = dict::buchi_dictionary(&a, &d);
                    (d.automaton, listing)
                }
                Acceptance::Parity(_) => {
                    let d = det_parity(&a)?;
                    let listing = dict::parity_dictionary(&a, &d);
                    (d.automaton, listing)
                }
                Acceptance::Rabin(_) => {
                    return Err(ToolError::Usage("only Büchi and parity automata can be determinized".into()))
                }
            };
            write_file(&out, &write_automaton(&d))?;
            emit(&dict_path, || listing)?;
            emit(&emit_dot, || dot::automaton_dot(&d))?;
            Ok(Outcome::Yes)
        }
        AutCmd::Run { input, word, steps } => {
            let a = parse_automaton(&read_file(&input)?)?;
            let w = parse_word(&a, &word)?;
            let run: Vec<&str> = run_prefix(&a, &w, steps)?.into_iter().map(|q| a.state_names()[q].as_str()).collect();
            println!("{}", run.join(" "));
            Ok(Outcome::Yes)
        }
        AutCmd::Accepts { input, word } => {
            let a = parse_automaton(&read_file(&input)?)?;
            let w = parse_word(&a, &word)?;
            if accepts_lasso(&a, &w)? {
                println!("accepted");
                Ok(Outcome::Yes)
            } else {
                println!("rejected");
                Ok(Outcome::No)
            }
        }
        AutCmd::Compare {
            left,
            right,
            max_stem,
            max_loop,
            sample,
            seed,
            jobs,
        } => {
            let a = parse_automaton(&read_file(&left)?)?;
            let b = parse_automaton(&read_file(&right)?)?;
            let opts = CompareOptions {
                max_stem,
                max_loop,
                sample,
                seed,
                jobs,
            };
            match compare(&a, &b, &opts)? {
                CompareReport::Agree { tested } => {
                    println!("agree on {tested} lassos");
                    Ok(Outcome::Yes)
                }
                CompareReport::Disagree {
                    lasso,
                    left,
                    right,
                    tested,
                } => {
                    let v = |x: bool| if x { "accepts" } else { "rejects" };
                    println!(
                        "disagree at {} after {tested} lassos: left {}, right {}",
                        write_word(&a, &lasso),
                        v(left),
                        v(right)
                    );
                    Ok(Outcome::No)
                }
            }
        }
    }
}

fn verdict(ok: bool, witness: Option<String>) -> Outcome {
    if ok {
        println!("valid");
        Outcome::Yes
    } else {
        println!("invalid");
        if let Some(w) = witness {
            eprintln!("uncovered cycle through nodes {w}");
        }
        Outcome::No
    }
}

fn nodes(set: &std::collections::BTreeSet<usize>) -> String {
    set.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn proof(cmd: ProofCmd) -> Result<Outcome, ToolError> {
    match cmd {
        ProofCmd::Check {
            system,
            input,
            emit_dot,
        } => {
            let j = read_json(&read_file(&input)?)?;
            match system {
                System::Nw => {
                    let d = nw_from_json(&j)?;
                    emit(&emit_dot, || dot::nw_dot(&d))?;
                    match check_nw(&d) {
                        Ok(r) => Ok(verdict(r.proof, r.witness.as_ref().map(nodes))),
                        Err(e) => {
                            eprintln!("{e}");
                            Ok(verdict(false, None))
                        }
                    }
                }
                System::Bt => {
                    let d = bt_from_json(&j)?;
                    emit(&emit_dot, || dot::bt_dot(&d))?;
                    match check_bt(&d) {
                        Ok(r) => Ok(verdict(r.proof, r.witness.as_ref().map(nodes))),
                        Err(e) => {
                            eprintln!("{e}");
                            Ok(verdict(false, None))
                        }
                    }
                }
            }
        }
        ProofCmd::Translate {
            input,
            out,
            budget,
            emit_dot,
        } => {
            let d = nw_from_json(&read_json(&read_file(&input)?)?)?;
            match translate_nw_to_bt(&d, budget) {
                Ok(bt) => {
                    write_file(&out, &write_json(&bt_to_json(&bt)))?;
                    emit(&emit_dot, || dot::bt_dot(&bt))?;
                    Ok(Outcome::Yes)
                }
                Err(e) => {
                    eprintln!("{e}");
                    Ok(Outcome::No)
                }
            }
        }
    }
}

fn run(cli: Cli) -> Result<Outcome, ToolError> {
    match cli.command {
        Command::Formula(c) => formula(c),
        Command::Aut(c) => aut(c),
        Command::Proof(c) => proof(c),
        Command::Prove {
            formula,
            depth,
            out,
            emit_dot,
        } => {
            let phi = sequent(&formula)?;
            let mut cfg = ProverConfig::for_sequent(&phi);
            if let Some(d) = depth {
                cfg.depth = d;
            }
            match prove(&phi, &cfg) {
                Some(d) => {
                    let text = write_json(&bt_to_json(&d));
                    match &out {
                        Some(p) => write_file(p, &text)?,
                        None => print!("{text}"),
                    }
                    emit(&emit_dot, || dot::bt_dot(&d))?;
                    Ok(Outcome::Yes)
                }
                None => {
                    eprintln!("no proof within depth {}", cfg.depth);
                    Ok(Outcome::No)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(move || run(cli))
        .expect("worker thread starts")
        .join()
        .expect("worker thread finishes");
    match result {
        Ok(Outcome::Yes) => ExitCode::SUCCESS,
        Ok(Outcome::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
