use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sawlab::decomposition::{extract_ball, unfold, validate_system, ConeTypeSystem, SystemFile};
use sawlab::grammar::{build_config_cfg, build_saw_mcfg, load_grammar};
use sawlab::mcfg::{generate, recognize};
use sawlab::oracle::{bijection_check, compare_counts, compare_languages, enumerate_saws};
use sawlab::series::{saw_coefficients, series_table};
use sawlab::{Error, Limits};

const EXIT_CODES: &str = "Exit codes:
  0  success
  1  invalid input, validation failure or usage error
  2  comparison mismatch
  3  series solver did not stabilize
  4  resource cap exceeded";

#[derive(Parser)]
#[command(name = "sawlab", version, about = "Self-avoiding walks on tree-decomposed graphs", after_help = EXIT_CODES)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Cap on tabulated items, vertices and rules (overrides SAWLAB_MAX_CELLS)
    #[arg(long, global = true)]
    max_cells: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a cone-type system file and report its violations
    #[command(after_help = EXIT_CODES)]
    Validate {
        /// Cone-type system (JSON)
        file: PathBuf,
    },
    /// Glue the decomposition tree down to a depth and export the graph
    #[command(after_help = EXIT_CODES)]
    Unfold {
        /// Cone-type system (JSON)
        file: PathBuf,
        /// Depth of the decomposition tree to glue
        #[arg(long)]
        depth: usize,
        /// Write the graph here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count self-avoiding walks from the origin by brute force
    #[command(after_help = EXIT_CODES)]
    CountSaws {
        /// Cone-type system (JSON)
        file: PathBuf,
        /// Longest walk length to count
        #[arg(long)]
        max_len: usize,
        /// Also list the label word of every walk
        #[arg(long)]
        words: bool,
    },
    /// Build the configuration grammar or the SAW grammar
    #[command(after_help = EXIT_CODES)]
    BuildGrammar {
        /// Cone-type system (JSON)
        file: PathBuf,
        /// cfg: configuration grammar; mcfg: grammar of walk label words
        #[arg(long, value_enum)]
        kind: Kind,
        /// Write the grammar here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write every rule out in full instead of per-slot choice lists
        #[arg(long)]
        expand: bool,
    },
    /// Walk counts and growth estimates from the grammar, as TSV
    #[command(after_help = EXIT_CODES)]
    Series {
        /// Cone-type system (JSON)
        file: PathBuf,
        /// Number of coefficients
        #[arg(long)]
        order: usize,
    },
    /// Check the grammar pipeline against brute force
    #[command(after_help = EXIT_CODES)]
    Compare {
        /// Cone-type system (JSON)
        file: PathBuf,
        /// Longest walk length (and largest weight) to compare
        #[arg(long)]
        max_len: usize,
        /// Also compare generated words with walk label words
        #[arg(long)]
        language: bool,
        /// Also check the configuration/walk bijection
        #[arg(long)]
        bijection: bool,
        /// Machine-readable report
        #[arg(long)]
        json: bool,
    },
    /// Work with a grammar file
    #[command(subcommand)]
    Mcfg(McfgCommand),
}

#[derive(Subcommand)]
#[command(after_help = EXIT_CODES)]
enum McfgCommand {
    /// Decide membership of a word and count its derivations
    #[command(after_help = EXIT_CODES)]
    Parse {
        /// Grammar file, plain or as written by build-grammar
        grammar: PathBuf,
        /// Word to test; space separated when labels are longer than one character
        #[arg(long, allow_hyphen_values = true)]
        word: String,
    },
    /// List every generated word up to a length
    #[command(after_help = EXIT_CODES)]
    Generate {
        /// Grammar file, plain or as written by build-grammar
        grammar: PathBuf,
        /// Longest word to list
        #[arg(long)]
        max_len: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Cfg,
    Mcfg,
}

struct Mismatch;

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_system(path: &Path) -> anyhow::Result<ConeTypeSystem> {
    Ok(ConeTypeSystem::from_json(&read(path)?)?)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Result<(), Mismatch>> {
    let mut limits = Limits::from_env();
    if let Some(c) = cli.global.max_cells {
        limits.max_cells = c;
    }
    if let Some(t) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()?;
    }
    let mut stdout = String::new();
    match cli.command {
        Command::Validate { file } => {
            let parsed = SystemFile::from_json(&read(&file)?)?;
            let report = validate_system(&parsed);
            if report.is_accepted() {
                println!("{report}");
            } else {
                for v in &report.violations {
                    println!("violation\t{v}");
                }
                return Err(Error::InvalidSystem(report).into());
            }
        }
        Command::Unfold { file, depth, out } => {
            let sys = load_system(&file)?;
            let dec = unfold(&sys, depth, &limits)?;
            emit(&out, &pretty(&dec.graph().to_json(&sys.alphabet)))?;
        }
        Command::CountSaws {
            file,
            max_len,
            words,
        } => {
            let sys = load_system(&file)?;
            let ball = extract_ball(&sys, max_len, &limits)?;
            let census = enumerate_saws(&ball, max_len, words)?;
            stdout.push_str("n\tc_n\n");
            for (i, c) in census.counts.iter().enumerate() {
                stdout.push_str(&format!("{}\t{c}\n", i + 1));
            }
            if let Some(ws) = census.words {
                stdout.push('\n');
                for (i, list) in ws.iter().enumerate() {
                    for w in list {
                        stdout.push_str(&format!("{}\t{}\n", i + 1, sys.alphabet.render(w)));
                    }
                }
            }
        }
        Command::BuildGrammar {
            file,
            kind,
            out,
            expand,
        } => {
            let sys = load_system(&file)?;
            let v = match kind {
                Kind::Cfg => {
                    let g = build_config_cfg(&sys, &limits)?;
                    if expand {
                        g.to_mcfg_expanded(&limits)?.to_json()
                    } else {
                        g.to_json()
                    }
                }
                Kind::Mcfg => {
                    let g = build_saw_mcfg(&sys, &limits)?;
                    if expand {
                        g.to_mcfg(true, &limits)?.to_json()
                    } else {
                        g.to_json()
                    }
                }
            };
            emit(&out, &pretty(&v))?;
        }
        Command::Series { file, order } => {
            let sys = load_system(&file)?;
            stdout.push_str(&series_table(&saw_coefficients(&sys, order, &limits)?)?);
        }
        Command::Compare {
            file,
            max_len,
            language,
            bijection,
            json,
        } => {
            let sys = load_system(&file)?;
            let counts = compare_counts(&sys, max_len, &limits)?;
            let lang = language
                .then(|| compare_languages(&sys, max_len, &limits))
                .transpose()?;
            let bij = bijection
                .then(|| bijection_check(&sys, max_len, &limits))
                .transpose()?;
            let pass = counts.pass
                && lang.as_ref().is_none_or(|r| r.pass)
                && bij.as_ref().is_none_or(|r| r.pass);
            if json {
                let v = json!({
                    "counts": counts,
                    "language": lang,
                    "bijection": bij,
                    "pass": pass,
                });
                stdout.push_str(&pretty(&v));
            } else {
                stdout.push_str(&counts.to_string());
                if let Some(r) = &lang {
                    stdout.push_str(&format!("\n{r}"));
                }
                if let Some(r) = &bij {
                    stdout.push_str(&format!("\n{r}"));
                }
            }
            print!("{stdout}");
            return Ok(if pass { Ok(()) } else { Err(Mismatch) });
        }
        Command::Mcfg(McfgCommand::Parse { grammar, word }) => {
            let g = load_grammar(&read(&grammar)?)?;
            let w = g
                .alphabet
                .parse_word(&word)
                .map_err(|e| anyhow!(Error::Input(e)))?;
            let r = recognize(&g, &w, &limits)?;
            stdout.push_str(if r.member { "member\n" } else { "non-member\n" });
            stdout.push_str(&format!("derivations\t{}\n", r.derivations));
        }
        Command::Mcfg(McfgCommand::Generate { grammar, max_len }) => {
            let g = load_grammar(&read(&grammar)?)?;
            for (w, count) in generate(&g, max_len, &limits)?.words {
                let shown = if w.is_empty() {
                    "ε".to_string()
                } else {
                    g.alphabet.render(&w)
                };
                stdout.push_str(&format!("{shown}\t{count}\n"));
            }
        }
    }
    print!("{stdout}");
    Ok(Ok(()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Mismatch)) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Error>().map_or(1, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
