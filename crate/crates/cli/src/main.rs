mod input;
mod verdict;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand, ValueEnum};

use saturn_core::kernel::{fuzz_laws, FuzzConfig, FuzzReport};
use saturn_core::lts::LtsInstance;
use saturn_core::nfa::NfaInstance;
use saturn_core::rel::RelInstance;
use saturn_core::segala::{largest_prob_weak_bisim, CmInstance};
use saturn_core::syntax::{self, ccs::name_table};
use saturn_core::{Alphabet, Label, Partition};

use input::{kind_of, Kind};
use verdict::{FuzzSummary, Outcome, Verdict};

/// Weak bisimulation, weak traces and saturation for transition systems,
/// automata with silent moves and simple probabilistic automata.
#[derive(Parser)]
#[command(name = "saturn", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print the saturated system in the input's format.
    Saturate {
        file: PathBuf,
        /// Iteration bound, required for .pa files.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Weak bisimilarity on an .aut or .ccs system.
    Weakbisim {
        file: PathBuf,
        #[arg(long, num_args = 2, value_names = ["X", "Y"])]
        states: Option<Vec<String>>,
    },
    /// Probabilistic weak bisimilarity on a .pa system.
    Probweakbisim {
        file: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long, num_args = 2, value_names = ["X", "Y"])]
        states: Option<Vec<String>>,
    },
    /// The weak traces of a state, as an automaton or listed up to a length.
    Wtraces {
        file: PathBuf,
        #[arg(long)]
        state: usize,
        #[arg(long)]
        maxlen: Option<usize>,
    },
    /// Weak-trace equivalence of two states of an .nfa file.
    WtraceEquiv {
        file: PathBuf,
        #[arg(long, num_args = 2, value_names = ["X", "Y"], required = true)]
        states: Vec<usize>,
    },
    /// Compile a CCS program to .aut, with the state names as comments.
    ParseCcs {
        file: PathBuf,
        #[arg(long, default_value_t = input::CCS_LIMIT)]
        limit: usize,
    },
    /// The quotient by weak bisimilarity, in .aut.
    Quotient { file: PathBuf },
    /// Fuzz the saturation laws of an instance.
    Laws {
        #[arg(long, value_enum)]
        instance: Instance,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Graphviz output for any supported file.
    Dot { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Instance {
    Rel,
    Lts,
    Nfa,
    Cm,
}

fn word_text(alphabet: &Alphabet, word: &[Label]) -> String {
    if word.is_empty() {
        return "ε".into();
    }
    word.iter().map(|&l| alphabet.name(l)).collect::<Vec<_>>().join(" ")
}

fn classes(p: &Partition, name: impl Fn(usize) -> String) -> Vec<Vec<String>> {
    p.classes().into_iter().map(|c| c.into_iter().map(&name).collect()).collect()
}

fn pair(states: &[String], resolve: impl Fn(&str) -> Result<usize>) -> Result<(usize, usize)> {
    Ok((resolve(&states[0])?, resolve(&states[1])?))
}

fn run(command: Command, echo: Vec<String>) -> Result<Verdict> {
    let system = |format, text| Outcome::System { format, text };
    let verdict = match command {
        Command::Saturate { file, depth } => match kind_of(&file)? {
            Kind::Aut | Kind::Ccs => {
                let loaded = input::load_lts(&file, input::CCS_LIMIT)?;
                let text = syntax::write_aut(loaded.init, &loaded.lts.saturate()?);
                Verdict::new(echo, system("aut", text))
            }
            Kind::Nfa => {
                let (init, nfa) = input::load_nfa(&file)?;
                Verdict::new(echo, system("nfa", syntax::write_nfa(init, &nfa.saturate()?)))
            }
            Kind::Pa => {
                let Some(depth) = depth else { bail!("saturating a .pa file needs --depth") };
                let pa = input::load_pa(&file)?;
                let sat = pa.saturate(depth.max(1));
                let mut text = String::new();
                if !sat.converged() {
                    text.push_str("# depth-limited\n");
                }
                text.push_str(&syntax::write_pa(&pa.from_coalgebra(&sat.star())));
                Verdict::new(echo, system("pa", text)).with_depth_limited(!sat.converged())
            }
        },
        Command::Weakbisim { file, states } => {
            let loaded = input::load_lts(&file, input::CCS_LIMIT)?;
            let p = loaded.lts.largest_weak_bisim()?;
            match states {
                Some(states) => {
                    let (x, y) = pair(&states, |s| loaded.state(s))?;
                    Verdict::new(echo, if p.same_class(x, y) { Outcome::Equivalent } else { Outcome::Inequivalent })
                }
                None => {
                    let name = |x: usize| loaded.names.as_ref().map_or_else(|| x.to_string(), |n| n[x].clone());
                    Verdict::new(echo, Outcome::Partition { classes: classes(&p, name) })
                }
            }
        }
        Command::Probweakbisim { file, depth, states } => {
            let pa = input::load_pa(&file)?;
            let (p, limited) = largest_prob_weak_bisim(&pa, depth.max(1))?;
            let outcome = match states {
                Some(states) => {
                    let (x, y) = pair(&states, |s| input::pa_state(&pa, s))?;
                    if p.same_class(x, y) {
                        Outcome::Equivalent
                    } else {
                        Outcome::Inequivalent
                    }
                }
                None => Outcome::Partition { classes: classes(&p, |x| pa.name(x).to_string()) },
            };
            Verdict::new(echo, outcome).with_depth_limited(limited)
        }
        Command::Wtraces { file, state, maxlen } => {
            let (_, nfa) = input::load_nfa(&file)?;
            let state = input::index(&state.to_string(), nfa.num_states())?;
            match maxlen {
                Some(len) => {
                    let words = nfa.enumerate_weak_traces(state, len)?;
                    let words = words.iter().map(|w| word_text(nfa.alphabet(), w)).collect();
                    Verdict::new(echo, Outcome::Traces { words })
                }
                None => {
                    let lang = nfa.weak_traces(state)?;
                    Verdict::new(echo, system("nfa", syntax::write_nfa(lang.start(), lang.automaton())))
                }
            }
        }
        Command::WtraceEquiv { file, states } => {
            let (_, nfa) = input::load_nfa(&file)?;
            let x = input::index(&states[0].to_string(), nfa.num_states())?;
            let y = input::index(&states[1].to_string(), nfa.num_states())?;
            match nfa.wtrace_counterexample(x, y)? {
                None => Verdict::new(echo, Outcome::Equivalent),
                Some(w) => {
                    Verdict::new(echo, Outcome::Inequivalent).with_witness(Some(word_text(nfa.alphabet(), &w)))
                }
            }
        }
        Command::ParseCcs { file, limit } => {
            if limit == 0 {
                bail!("--limit must be at least 1");
            }
            if kind_of(&file)? != Kind::Ccs {
                bail!("{}: expected a .ccs file", file.display());
            }
            let loaded = input::load_lts(&file, limit)?;
            let names = loaded.names.as_deref().unwrap_or_default();
            let text = syntax::write_aut(loaded.init, &loaded.lts) + &name_table(names);
            Verdict::new(echo, system("aut", text))
        }
        Command::Quotient { file } => {
            let loaded = input::load_lts(&file, input::CCS_LIMIT)?;
            let p = loaded.lts.largest_weak_bisim()?;
            let q = loaded.lts.quotient(&p)?;
            Verdict::new(echo, system("aut", syntax::write_aut(p.class_of(loaded.init), &q)))
        }
        Command::Laws { instance, seed, trials } => {
            let config = FuzzConfig::new(seed, trials);
            let report = match instance {
                Instance::Rel => fuzz_laws(&RelInstance, &config),
                Instance::Lts => fuzz_laws(&LtsInstance::standard(), &config),
                Instance::Nfa => fuzz_laws(&NfaInstance::standard(), &config),
                Instance::Cm => fuzz_laws(&CmInstance, &config),
            };
            let witness = report.failure.as_ref().map(|c| c.witness.clone());
            Verdict::new(echo, Outcome::FuzzReport(summary(&report))).with_witness(witness)
        }
        Command::Dot { file } => {
            let text = match kind_of(&file)? {
                Kind::Aut | Kind::Ccs => {
                    let loaded = input::load_lts(&file, input::CCS_LIMIT)?;
                    syntax::lts_to_dot(&loaded.lts, loaded.names.as_deref())
                }
                Kind::Nfa => syntax::nfa_to_dot(&input::load_nfa(&file)?.1),
                Kind::Pa => syntax::segala_to_dot(&input::load_pa(&file)?),
            };
            Verdict::new(echo, system("dot", text))
        }
    };
    Ok(verdict)
}

fn summary(report: &FuzzReport) -> FuzzSummary {
    FuzzSummary {
        instance: report.instance.to_string(),
        seed: report.seed,
        trials: report.trials,
        passed: report.passed,
        skipped: report.skipped,
        success: report.success(),
        report: report.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let mut stdout = std::io::stdout().lock();
    match run(cli.command, echo.clone()) {
        Ok(verdict) => {
            let text = match cli.format {
                Format::Text => verdict.to_text(),
                Format::Json => verdict.to_json(),
            };
            let _ = stdout.write_all(text.as_bytes());
            ExitCode::from(verdict.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if cli.format == Format::Json {
                let _ = stdout.write_all(verdict::error_json(&echo, &format!("{e:#}")).as_bytes());
            }
            ExitCode::from(2)
        }
    }
}
