use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use strata_corr::engine::{check_composition, compute_all_levels_with, CorrespondenceFamily, SolveOptions};
use strata_corr::format::{level_one_family, read_family, read_structure, write_family, write_structure};
use strata_corr::generators::{graph_family, named_perms, structure_by_name, structure_stem};
use strata_corr::wss::{build_e1, check_equivariance};
use strata_corr::{report, IncidenceStructure, LevelOneInput};

const THREADS_VAR: &str = "STRATA_CORR_THREADS";

#[derive(Parser)]
#[command(
    name = "strata-corr",
    version,
    about = "Correspondences on degenerations and their weight spectral sequence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a structure file against every model law.
    Validate {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Extend level-1 data to the full correspondence family.
    Levels {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        family: PathBuf,
        /// Output family file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check that the family of `B ∘ A` is the level-wise composite.
    ComposeCheck {
        #[arg(long)]
        structure: PathBuf,
        /// Pass twice: first A, then B.
        #[arg(long, num_args = 1, required = true)]
        family: Vec<PathBuf>,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build the E1 page, check d1 ∘ d1 = 0 and report E2 ranks.
    E1 {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check that a family's action commutes with d1.
    Equivariance {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write a built-in structure and its generator families.
    Example {
        /// chain_p1, cycle_p1 or triple_plane.
        name: String,
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

/// A terminating condition: exit code plus the message for stderr.
struct Fail(u8, String);

type Outcome = Result<(String, u8), Fail>;

fn fail(code: i32, msg: impl ToString) -> Fail {
    Fail(code as u8, msg.to_string())
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| fail(1, format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Fail> {
    fs::write(path, text).map_err(|e| fail(1, format!("cannot write {}: {e}", path.display())))
}

fn threads() -> Result<Option<usize>, Fail> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| fail(1, format!("{THREADS_VAR} must be a non-negative integer, got {v:?}"))),
    }
}

fn options(level: Option<usize>) -> Result<SolveOptions, Fail> {
    Ok(SolveOptions {
        max_level: level,
        threads: threads()?,
    })
}

fn load_structure(path: &Path) -> Result<IncidenceStructure, Fail> {
    let s = read_structure(&read(path)?).map_err(|e| fail(e.exit_code(), e))?;
    let violations = s.validate();
    if !violations.is_empty() {
        return Err(fail(2, report::validation(&violations).trim_end()));
    }
    Ok(s)
}

fn load_level_one(s: &IncidenceStructure, path: &Path) -> Result<LevelOneInput, Fail> {
    let f = read_family(&read(path)?, s).map_err(|e| fail(e.exit_code(), e))?;
    Ok(f.level_one())
}

fn solve(s: &IncidenceStructure, g: &LevelOneInput, opts: &SolveOptions) -> Result<CorrespondenceFamily, Fail> {
    compute_all_levels_with(s, g, opts).map_err(|e| fail(e.exit_code(), e))
}

fn cmd_validate(structure: &Path) -> Outcome {
    let s = read_structure(&read(structure)?).map_err(|e| fail(e.exit_code(), e))?;
    let violations = s.validate();
    let code = if violations.is_empty() { 0 } else { 2 };
    Ok((report::validation(&violations), code))
}

fn cmd_levels(structure: &Path, family: &Path, out: Option<&Path>, level: Option<usize>) -> Outcome {
    let s = load_structure(structure)?;
    let g = load_level_one(&s, family)?;
    let f = solve(&s, &g, &options(level)?)?;
    let text = write_family(&s, &f);
    let mut rep = String::new();
    for (m, classes) in &f.levels {
        let nonzero = classes.values().filter(|c| !c.is_zero()).count();
        writeln!(rep, "LEVEL m={m} pairs={} nonzero={nonzero}", classes.len()).unwrap();
    }
    match out {
        Some(p) => {
            write(p, &text)?;
            rep.push_str("RESULT levels PASS\n");
        }
        None => rep = text,
    }
    Ok((rep, 0))
}

fn cmd_compose_check(structure: &Path, families: &[PathBuf], level: Option<usize>) -> Outcome {
    let [a, b] = families else {
        return Err(fail(1, "compose-check takes exactly two --family arguments"));
    };
    let s = load_structure(structure)?;
    let (a1, b1) = (load_level_one(&s, a)?, load_level_one(&s, b)?);
    let r = check_composition(&s, &a1, &b1, &options(level)?).map_err(|e| fail(e.exit_code(), e))?;
    let code = if r.passed() { 0 } else { 5 };
    Ok((report::composition(&r), code))
}

fn cmd_e1(structure: &Path) -> Outcome {
    let s = load_structure(structure)?;
    let (text, ok) = report::e1(&s, &build_e1(&s));
    Ok((text, if ok { 0 } else { 2 }))
}

fn cmd_equivariance(structure: &Path, family: &Path, level: Option<usize>) -> Outcome {
    let s = load_structure(structure)?;
    let g = load_level_one(&s, family)?;
    let f = solve(&s, &g, &options(level)?)?;
    let page = build_e1(&s);
    let r = check_equivariance(&s, &page, &f).map_err(|e| fail(e.exit_code(), e))?;
    let code = if r.passed() { 0 } else { 6 };
    Ok((report::equivariance(&s, &page, &r), code))
}

fn cmd_example(name: &str, t: Option<usize>, out: &Path) -> Outcome {
    let s =
        structure_by_name(name, t).ok_or_else(|| fail(1, format!("unknown example {name:?} (or unsupported --t)")))?;
    let stem = structure_stem(name, s.t());
    fs::create_dir_all(out).map_err(|e| fail(1, format!("cannot create {}: {e}", out.display())))?;
    let mut rep = String::new();
    let path = out.join(format!("{stem}.wss"));
    write(&path, &write_structure(&s))?;
    writeln!(rep, "WROTE {}", path.display()).unwrap();
    for (label, perm) in named_perms(name, s.t()) {
        let g = graph_family(&s, &perm).map_err(|e| fail(e.exit_code(), e))?;
        let path = out.join(format!("{stem}.{label}.corr"));
        write(&path, &write_family(&s, &level_one_family(&g)))?;
        writeln!(rep, "WROTE {}", path.display()).unwrap();
    }
    Ok((rep, 0))
}

fn run(cli: Cli) -> Result<(String, u8, Option<PathBuf>), Fail> {
    let (out, report) = match cli.command {
        Command::Validate { structure, report } => (cmd_validate(&structure)?, report),
        Command::Levels {
            structure,
            family,
            out,
            level,
            report,
        } => (cmd_levels(&structure, &family, out.as_deref(), level)?, report),
        Command::ComposeCheck {
            structure,
            family,
            level,
            report,
        } => (cmd_compose_check(&structure, &family, level)?, report),
        Command::E1 { structure, report } => (cmd_e1(&structure)?, report),
        Command::Equivariance {
            structure,
            family,
            level,
            report,
        } => (cmd_equivariance(&structure, &family, level)?, report),
        Command::Example { name, t, out } => (cmd_example(&name, t, &out)?, None),
    };
    Ok((out.0, out.1, report))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok((text, code, report)) => {
            match report {
                Some(p) => {
                    if let Err(Fail(c, msg)) = write(&p, &text) {
                        eprintln!("ERROR {msg}");
                        return ExitCode::from(c);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::from(code)
        }
        Err(Fail(code, msg)) => {
            eprintln!("ERROR {msg}");
            ExitCode::from(code)
        }
    }
}
