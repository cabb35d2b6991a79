use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use gridslp::balance::{balance_to_tslp, BalanceStats};
use gridslp::fast::{bench_access, build_fast, sample_positions};
use gridslp::gadgets;
use gridslp::text::{emit_plain, emit_tslp, parse, ParsedGrammar};
use gridslp::transforms::{linearize_rows, margin_slp, prune_plain, rebalance_plain_2d, rotate_cw, MarginSide};
use gridslp::{
    access_plain, access_tslp, expand, expand_tslp, Error, Grammar2D, Tslp2D, DEFAULT_MAX_CELLS,
};

const HOLE_MARKER: char = '#';

#[derive(Parser)]
#[command(name = "gridslp", version, about = "Two-dimensional straight-line programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Gadget {
    Bin,
    Shiftbin,
    Cnm,
    Cnmseq,
    Spiral,
    Random,
}

#[derive(clap::Args)]
struct MaxCells {
    /// Largest matrix that may be materialized.
    #[arg(long, env = "GRIDSLP_MAX_CELLS", default_value_t = DEFAULT_MAX_CELLS)]
    max_cells: u64,
}

#[derive(clap::Args)]
struct Output {
    /// Write here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a gadget grammar.
    Gen {
        #[arg(long, value_enum)]
        gadget: Gadget,
        /// Bit width (bin, shiftbin), rows (cnm, cnmseq) or side (spiral).
        #[arg(long)]
        n: Option<u64>,
        /// Columns (cnm, cnmseq).
        #[arg(long)]
        m: Option<u64>,
        /// Row step of a gadget sequence.
        #[arg(long)]
        b: Option<u64>,
        /// Last index of a gadget sequence.
        #[arg(long)]
        k: Option<u64>,
        /// Spiral depth constant.
        #[arg(long, default_value_t = 1)]
        c: u64,
        /// Symbol count of a random grammar.
        #[arg(long, default_value_t = 50)]
        g: usize,
        #[arg(long, default_value_t = 64)]
        max_dim: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Drop symbols unreachable from the start and renumber.
        #[arg(long)]
        normalize: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Print size and geometry as JSON.
    Stats { file: PathBuf },
    /// Print the derived matrix.
    Expand {
        file: PathBuf,
        #[command(flatten)]
        cells: MaxCells,
    },
    /// Print one character and the number of visited productions.
    Access {
        file: PathBuf,
        x: u64,
        y: u64,
        /// Query through the unwound grid index.
        #[arg(long)]
        fast: bool,
        #[arg(long, default_value_t = 3.0)]
        epsilon: f64,
    },
    /// Balance into a holed grammar; statistics go to stderr, or stdout with -o.
    Balance {
        file: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Concatenate all rows into one 1D grammar.
    Linearize {
        file: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Rebuild a plain grammar row by row from balanced pieces.
    Rebalance {
        file: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Rotate clockwise.
    Rotate {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        times: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Extract one margin as a 1D grammar.
    Margins {
        file: PathBuf,
        #[arg(long)]
        side: MarginSide,
        #[command(flatten)]
        out: Output,
    },
    /// Check two grammars derive the same matrix; exit 1 if not.
    Verify {
        file: PathBuf,
        #[arg(long)]
        against: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        cells: MaxCells,
    },
    /// Compare plain, holed and fast access as a JSON report.
    Bench {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Index the input as is instead of balancing it first.
        #[arg(long)]
        no_balance: bool,
    },
}

enum Failure {
    Usage(String),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(m) => Failure::Usage(m),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn load(path: &Path) -> Outcome<ParsedGrammar> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    let parsed = parse(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    let report = match &parsed {
        ParsedGrammar::Plain(g) => g.validate(),
        ParsedGrammar::Tslp(t) => t.validate(),
    };
    if !report.is_ok() {
        return Err(Failure::Invalid(format!("{}: invalid grammar\n{report}", path.display())));
    }
    Ok(parsed)
}

fn load_plain(path: &Path) -> Outcome<Grammar2D> {
    match load(path)? {
        ParsedGrammar::Plain(g) => Ok(g),
        ParsedGrammar::Tslp(t) => t
            .to_plain()
            .ok_or_else(|| Failure::Usage(format!("{}: expected a grammar without contexts", path.display()))),
    }
}

fn write_out(out: &Output, text: &str) -> Outcome {
    match &out.output {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn print_json<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string(v).expect("serializable"));
}

fn need(v: Option<u64>, flag: &str) -> Outcome<u64> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for this gadget")))
}

fn bits(n: u64) -> Outcome<u32> {
    u32::try_from(n).map_err(|_| Failure::Usage(format!("bit width {n} is too large")))
}

#[allow(clippy::too_many_arguments)]
fn gen(gadget: Gadget, n: Option<u64>, m: Option<u64>, b: Option<u64>, k: Option<u64>, c: u64, g: usize, max_dim: u64, seed: u64) -> Outcome<Grammar2D> {
    Ok(match gadget {
        Gadget::Bin => gadgets::build_bin(bits(need(n, "n")?)?)?,
        Gadget::Shiftbin => gadgets::build_shiftbin(bits(need(n, "n")?)?)?,
        Gadget::Cnm => gadgets::build_cnm(need(n, "n")?, need(m, "m")?)?,
        Gadget::Cnmseq => {
            let (gr, roots) = gadgets::build_cnm_sequence(need(n, "n")?, need(m, "m")?, need(b, "b")?, need(k, "k")?)?;
            let mut labels = gr.labels().to_vec();
            for (i, r) in roots.iter().enumerate() {
                labels[r.index()] = Some(format!("C{i}"));
            }
            let start = *roots.last().expect("k + 1 roots");
            Grammar2D::new(gr.rules().to_vec(), labels, start)
        }
        Gadget::Spiral => gadgets::build_spiral(need(n, "n")?, c)?,
        Gadget::Random => {
            if g == 0 || max_dim == 0 {
                return Err(Failure::Usage("--g and --max-dim must be positive".into()));
            }
            gadgets::random_grammar(seed, g, max_dim)
        }
    })
}

#[derive(Serialize)]
struct Stats {
    kind: &'static str,
    symbols: usize,
    size: u64,
    depth: u32,
    height: u64,
    width: u64,
    holed: bool,
}

fn stats(p: &ParsedGrammar) -> Outcome<Stats> {
    let (kind, t) = match p {
        ParsedGrammar::Plain(g) => ("plain", Tslp2D::from_plain(g)),
        ParsedGrammar::Tslp(t) => ("tslp", t.clone()),
    };
    let d = t.dims()?;
    Ok(Stats {
        kind,
        symbols: t.len(),
        size: t.size(),
        depth: t.depth()?,
        height: d.height,
        width: d.width,
        holed: t.has_contexts(),
    })
}

fn emit_balanced(out: &Output, t: &Tslp2D, st: &impl Serialize) -> Outcome {
    write_out(out, &emit_tslp(t))?;
    let line = serde_json::to_string(st).expect("serializable");
    if out.output.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(())
}

fn verify(a: &Path, b: &Path, samples: usize, seed: u64, max_cells: u64) -> Outcome<bool> {
    let (ta, tb) = (load(a)?.into_tslp(), load(b)?.into_tslp());
    let (da, db) = (ta.dims()?, tb.dims()?);
    let report = |equal: bool, method: &str, checked: u128| {
        print_json(&json!({ "equal": equal, "method": method, "checked": checked }));
        equal
    };
    if da != db {
        return Ok(report(false, "dims", 0));
    }
    if da.area() <= max_cells as u128 {
        let ma = expand_tslp(&ta, ta.start(), max_cells, HOLE_MARKER)?;
        let mb = expand_tslp(&tb, tb.start(), max_cells, HOLE_MARKER)?;
        return Ok(report(ma == mb, "full", da.area()));
    }
    for (x, y) in sample_positions(da, samples, seed) {
        if access_tslp(&ta, x, y)?.ch != access_tslp(&tb, x, y)?.ch {
            return Ok(report(false, "sampled", samples as u128));
        }
    }
    Ok(report(true, "sampled", samples as u128))
}

/// Returns whether the command's check held.
fn run(cmd: Command) -> Outcome<bool> {
    match cmd {
        Command::Gen { gadget, n, m, b, k, c, g, max_dim, seed, normalize, out } => {
            let mut gr = gen(gadget, n, m, b, k, c, g, max_dim, seed)?;
            if normalize {
                gr = prune_plain(&gr);
            }
            write_out(&out, &emit_plain(&gr))?;
        }
        Command::Stats { file } => print_json(&stats(&load(&file)?)?),
        Command::Expand { file, cells } => {
            let m = match load(&file)? {
                ParsedGrammar::Plain(g) => expand(&g, g.start(), cells.max_cells)?,
                ParsedGrammar::Tslp(t) => expand_tslp(&t, t.start(), cells.max_cells, HOLE_MARKER)?,
            };
            print!("{m}");
        }
        Command::Access { file, x, y, fast, epsilon } => {
            let p = load(&file)?;
            let a = if fast {
                access_fast_cli(&p.into_tslp(), epsilon, x, y)?
            } else {
                match &p {
                    ParsedGrammar::Plain(g) => access_plain(g, x, y)?,
                    ParsedGrammar::Tslp(t) => access_tslp(t, x, y)?,
                }
            };
            print_json(&json!({ "char": a.ch.to_string(), "visits": a.visits }));
        }
        Command::Balance { file, out } => {
            let t = load(&file)?.into_tslp();
            let (b, st): (Tslp2D, BalanceStats) = balance_to_tslp(&t)?;
            emit_balanced(&out, &b, &st)?;
        }
        Command::Linearize { file, out } => {
            let l = linearize_rows(&load_plain(&file)?)?;
            write_out(&out, &emit_plain(l.as_2d()))?;
        }
        Command::Rebalance { file, out } => {
            let g = load_plain(&file)?;
            let d = g.dims()?;
            // the row pipeline wants at most as many rows as columns
            let (r, st) = if d.height > d.width {
                let (r, st) = rebalance_plain_2d(&rotate_cw(&g))?;
                (rotate_cw(&rotate_cw(&rotate_cw(&r))), st)
            } else {
                rebalance_plain_2d(&g)?
            };
            write_out(&out, &emit_plain(&r))?;
            let line = serde_json::to_string(&st).expect("serializable");
            if out.output.is_some() {
                println!("{line}");
            } else {
                eprintln!("{line}");
            }
        }
        Command::Rotate { file, times, out } => {
            let mut g = load_plain(&file)?;
            for _ in 0..times % 4 {
                g = rotate_cw(&g);
            }
            write_out(&out, &emit_plain(&g))?;
        }
        Command::Margins { file, side, out } => {
            let m = margin_slp(&load_plain(&file)?, side)?;
            write_out(&out, &emit_plain(m.as_2d()))?;
        }
        Command::Verify { file, against, samples, seed, cells } => {
            return verify(&file, &against, samples, seed, cells.max_cells);
        }
        Command::Bench { file, queries, seed, epsilon, threads, no_balance } => {
            let p = load(&file)?;
            let plain = match &p {
                ParsedGrammar::Plain(g) => Some(g.clone()),
                ParsedGrammar::Tslp(_) => None,
            };
            let t = p.into_tslp();
            let t = if no_balance { t } else { balance_to_tslp(&t)?.0 };
            let idx = build_fast(&t, epsilon)?;
            print_json(&bench_access(plain.as_ref(), &idx, queries, seed, threads)?);
        }
    }
    Ok(true)
}

fn access_fast_cli(t: &Tslp2D, epsilon: f64, x: u64, y: u64) -> Outcome<gridslp::Access> {
    let idx = build_fast(t, epsilon)?;
    Ok(idx.access(x, y)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
    }
}
