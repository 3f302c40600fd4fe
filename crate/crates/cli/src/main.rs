//! `wmetric`: command-line driver for the generalized-metric-space library.
//!
//! Exit codes: 0 success/witness, 1 certified negative (law violation,
//! certified absence of a fixed point, non-dense), 2 inconclusive
//! (budget exhausted / unknown), 3 input error. Reports are deterministic
//! structured text: byte-identical across runs with the same inputs and
//! budgets.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use wmetric::dynsys::{bounded_search, decide_fixed_point, DenseSet, DynSystem, SearchOutcome};
use wmetric::monoid::{
    canonical_initial_sequence, check_monoid_axioms, check_monoid_axioms_sampled, coinitiality,
    is_continuous_at_zero, parse_monoid, CoinitDescriptor, LawReport,
    MonoidInstance,
};
use wmetric::ordinal::OrdinalNotation;
use wmetric::treespace::{
    binary_tree, build_s_kappa, extract_cofinal, find_path_cf_omega, pruned_check, tree_metric,
    CofinalSequence, KappaTree, PrunedReport, TreeError,
};
use wmetric::wspace::{
    all_pairs, cauchy_completion, check_nonexpanding, check_space_axioms, parse_map,
    parse_space_with, serialize_space, SelfMap, SpaceReport, WSpace,
};

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "wmetric", version, about = "Generalized metric spaces over distance monoids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the distance-monoid laws of a monoid file.
    CheckMonoid {
        file: PathBuf,
        /// Extra sampled checks for infinite instances.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check the metric laws of a space file.
    CheckSpace { file: PathBuf },
    /// Check that a map file is non-expanding on a space.
    CheckMap {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
    /// Cauchy-complete a space file and print the result.
    Complete { file: PathBuf },
    /// Decide existence of a fixed point of a non-expanding self-map.
    Fixpoint {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// Tree-space demonstrations.
    Tree {
        #[command(subcommand)]
        sub: TreeCommand,
    },
}

#[derive(Subcommand)]
enum TreeCommand {
    /// Pruning check, path extraction, and fixed-point search on a kappa-tree.
    Demo {
        #[arg(long, value_enum)]
        kind: TreeKind,
        /// Tree height: a CNF ordinal like `w` or `w^2+w*3`, or `omega-1`.
        #[arg(long, default_value = "w")]
        height: String,
        #[command(flatten)]
        budgets: Budgets,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeKind {
    Binary,
    SKappa,
}

#[derive(Args)]
struct Budgets {
    #[arg(long, default_value_t = 4)]
    alpha_factor: u64,
    #[arg(long, default_value_t = 8)]
    depth: u64,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Accumulates the report; printed in one block after all computation.
struct Report {
    lines: Vec<String>,
}

impl Report {
    fn new(echo: &str) -> Report {
        Report { lines: vec![format!("command: {echo}")] }
    }

    fn input(&mut self, label: &str, text: &str) {
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        self.lines.push(format!("input {label}: sha256 {:x}", h.finalize()));
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn finish(self, code: u8) -> ExitCode {
        for l in self.lines {
            println!("{l}");
        }
        println!("timing: omitted (deterministic-report contract)");
        ExitCode::from(code)
    }
}

fn input_error(echo: &str, msg: &str) -> ExitCode {
    let mut r = Report::new(echo);
    r.line(format!("error: {msg}"));
    r.finish(EXIT_INPUT)
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

/// Loads a space file, resolving its monoid file relative to the space file.
fn load_space(path: &Path) -> Result<(WSpace, String), String> {
    let text = read(path)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let space = parse_space_with(&text, |monoid_file| {
        read(&dir.join(monoid_file))
    })
    .map_err(|e| e.to_string())?;
    Ok((space, text))
}

fn law_outcome(r: &mut Report, rep: &LawReport) -> u8 {
    match rep {
        LawReport::Pass => {
            r.line("outcome: all laws pass");
            EXIT_OK
        }
        LawReport::Fail { law, witness } => {
            r.line(format!("outcome: law violation: {law}"));
            r.line(format!("witness: {}", witness.join(" ")));
            EXIT_NEGATIVE
        }
    }
}

fn space_outcome(r: &mut Report, rep: &SpaceReport) -> u8 {
    match rep {
        SpaceReport::Pass => {
            r.line("outcome: all laws pass");
            EXIT_OK
        }
        SpaceReport::Fail { law, witness } => {
            r.line(format!("outcome: law violation: {law:?}"));
            r.line(format!("witness: {}", witness.join(" ")));
            EXIT_NEGATIVE
        }
    }
}

fn check_monoid(file: &Path, sample: Option<usize>, seed: u64) -> ExitCode {
    let echo = format!("check-monoid {}", file.display());
    let text = match read(file) {
        Ok(t) => t,
        Err(e) => return input_error(&echo, &e),
    };
    let instance = match parse_monoid(&text) {
        Ok(m) => m,
        Err(e) => return input_error(&echo, &e.to_string()),
    };
    let mut r = Report::new(&echo);
    r.input(&file.display().to_string(), &text);
    let rep = match check_monoid_axioms(&instance) {
        Ok(rep) => rep,
        Err(e) => return input_error(&echo, &e.to_string()),
    };
    let mut code = law_outcome(&mut r, &rep);
    if let Some(n) = sample {
        r.line(format!("budgets: sample={n} seed={seed}"));
        let sampled = check_monoid_axioms_sampled(&instance, n, seed);
        match &sampled {
            LawReport::Pass => r.line("sampled: all laws pass"),
            LawReport::Fail { law, witness } => {
                r.line(format!("sampled: law violation: {law}"));
                r.line(format!("witness: {}", witness.join(" ")));
                code = EXIT_NEGATIVE;
            }
        }
    }
    r.line(format!("continuous-at-zero: {}", is_continuous_at_zero(&instance)));
    r.line(format!("coinitiality: {:?}", coinitiality(&instance)));
    r.finish(code)
}

fn check_space(file: &Path) -> ExitCode {
    let echo = format!("check-space {}", file.display());
    let (space, text) = match load_space(file) {
        Ok(v) => v,
        Err(e) => return input_error(&echo, &e),
    };
    let mut r = Report::new(&echo);
    r.input(&file.display().to_string(), &text);
    match check_space_axioms(&space) {
        Ok(rep) => {
            let code = space_outcome(&mut r, &rep);
            r.finish(code)
        }
        Err(e) => input_error(&echo, &e.to_string()),
    }
}

fn check_map(space_file: &Path, map_file: &Path) -> ExitCode {
    let echo = format!("check-map --space {} --map {}", space_file.display(), map_file.display());
    let run = || -> Result<(WSpace, SelfMap, String, String), String> {
        let (space, stext) = load_space(space_file)?;
        let mtext = read(map_file)?;
        let map = parse_map(&mtext, &space).map_err(|e| e.to_string())?;
        Ok((space, map, stext, mtext))
    };
    let (space, map, stext, mtext) = match run() {
        Ok(v) => v,
        Err(e) => return input_error(&echo, &e),
    };
    let mut r = Report::new(&echo);
    r.input(&space_file.display().to_string(), &stext);
    r.input(&map_file.display().to_string(), &mtext);
    let pairs = all_pairs(&space.points(usize::MAX));
    match check_nonexpanding(&space, &map, &pairs) {
        Ok(rep) => {
            let code = space_outcome(&mut r, &rep);
            r.finish(code)
        }
        Err(e) => input_error(&echo, &e.to_string()),
    }
}

fn complete(file: &Path) -> ExitCode {
    let echo = format!("complete {}", file.display());
    let (space, text) = match load_space(file) {
        Ok(v) => v,
        Err(e) => return input_error(&echo, &e),
    };
    let mut r = Report::new(&echo);
    r.input(&file.display().to_string(), &text);
    let completed = cauchy_completion(&space);
    r.line(format!("outcome: completed; status {:?}", completed.completeness));
    if let Some(text) = serialize_space(&completed, "-") {
        for l in text.lines().skip(1) {
            r.line(format!("  {l}"));
        }
    }
    r.finish(EXIT_OK)
}

fn search_outcome(r: &mut Report, system: &DynSystem, outcome: &SearchOutcome) -> u8 {
    match outcome {
        SearchOutcome::FixedPointFound { witness, residual } => {
            r.line("outcome: FixedPointFound");
            r.line(format!(
                "witness: {witness} (residual {})",
                system.space.monoid.display_value(residual)
            ));
            EXIT_OK
        }
        SearchOutcome::CertifiedNoFixedPoint { empty_depth } => {
            r.line(format!("outcome: CertifiedNoFixedPoint at depth {empty_depth}"));
            EXIT_NEGATIVE
        }
        SearchOutcome::BudgetExhausted { depth, .. } => {
            r.line(format!("outcome: BudgetExhausted at depth {depth}"));
            EXIT_INCONCLUSIVE
        }
    }
}

fn fixpoint(space_file: &Path, map_file: &Path, b: &Budgets) -> ExitCode {
    let echo = format!(
        "fixpoint --space {} --map {}",
        space_file.display(),
        map_file.display()
    );
    let run = || -> Result<(DynSystem, String, String), String> {
        let (space, stext) = load_space(space_file)?;
        let mtext = read(map_file)?;
        let map = parse_map(&mtext, &space).map_err(|e| e.to_string())?;
        let alpha = canonical_initial_sequence(&space.monoid, b.alpha_factor)
            .map_err(|e| format!("no initial sequence for this monoid: {e}"))?;
        let system = DynSystem {
            space: Arc::new(cauchy_completion(&space)),
            map,
            alpha,
            dense: DenseSet::AllFinitePoints,
        };
        Ok((system, stext, mtext))
    };
    let (system, stext, mtext) = match run() {
        Ok(v) => v,
        Err(e) => return input_error(&echo, &e),
    };
    let mut r = Report::new(&echo);
    r.input(&space_file.display().to_string(), &stext);
    r.input(&map_file.display().to_string(), &mtext);
    r.line(format!(
        "budgets: depth={} width={} alpha-factor={}",
        b.depth, b.width, b.alpha_factor
    ));
    match decide_fixed_point(&system, b.depth, b.width) {
        Ok(outcome) => {
            let code = search_outcome(&mut r, &system, &outcome);
            r.finish(code)
        }
        Err(e) => input_error(&echo, &e.to_string()),
    }
}

fn demo_monoid(kind: TreeKind, height: &OrdinalNotation) -> MonoidInstance {
    match kind {
        TreeKind::Binary => MonoidInstance::ExtendedRational,
        TreeKind::SKappa => MonoidInstance::ReversedOrdinal { height: height.clone() },
    }
}

fn demo_samples(tree: &KappaTree, depth: u64) -> Vec<(wmetric::treespace::TreeNode, OrdinalNotation)> {
    tree.enumerate_nodes(32)
        .into_iter()
        .filter_map(|n| {
            let lvl = tree.level(&n).ok()?;
            let target = lvl.succ().ok()?.natural_sum(&OrdinalNotation::from_nat(depth)).ok()?;
            Some((n, target))
        })
        .collect()
}

fn tree_demo(kind: TreeKind, height_text: &str, b: &Budgets) -> ExitCode {
    let kind_name = match kind {
        TreeKind::Binary => "binary",
        TreeKind::SKappa => "s-kappa",
    };
    let echo = format!(
        "tree demo --kind {kind_name} --height {height_text} --alpha-factor {} --depth {}",
        b.alpha_factor, b.depth
    );
    let height = match OrdinalNotation::parse(height_text) {
        Ok(h) => h,
        Err(e) => return input_error(&echo, &e.to_string()),
    };
    let tree = match kind {
        TreeKind::Binary => {
            if height != OrdinalNotation::omega() {
                return input_error(&echo, "the binary tree demo requires height w");
            }
            binary_tree()
        }
        TreeKind::SKappa => build_s_kappa(height.clone()),
    };
    let mut r = Report::new(&echo);
    r.line(format!("budgets: depth={} width={} alpha-factor={}", b.depth, b.width, b.alpha_factor));

    // Pruning check on an enumerated sample of (node, target-level) pairs.
    match pruned_check(&tree, &demo_samples(&tree, b.depth)) {
        Ok(PrunedReport::Pass) => r.line("pruning: pass (every sampled node extends to the sampled level)"),
        Ok(PrunedReport::Fail { node, level }) => {
            r.line(format!("pruning: FAIL at node {node}, level {level}"));
        }
        Err(e) => return input_error(&echo, &e.to_string()),
    }

    // Path extraction along a countable cofinal sequence, when one exists.
    let cofinal = if height == OrdinalNotation::omega() {
        CofinalSequence::naturals()
    } else if height == OrdinalNotation::omega_squared() {
        CofinalSequence::omega_times()
    } else {
        CofinalSequence { kind: wmetric::treespace::CofinalKind::Naturals, declared_sup: height.clone() }
    };
    match find_path_cf_omega(&tree, &cofinal, b.depth) {
        Ok(prefix) => {
            let covered = prefix
                .covered_level()
                .map(|l| l.to_string())
                .unwrap_or_else(|| "0".into());
            r.line(format!("path: prefix extracted, coherent to level {covered}"));
            if let Ok(ledger) = extract_cofinal(&prefix) {
                let cells: Vec<String> = ledger.iter().map(|o| o.to_string()).collect();
                r.line(format!("ledger: {}", cells.join(" ")));
            }
        }
        Err(TreeError::NotCofinal(why)) => {
            r.line(format!("path: refused (NotCofinal: {why})"));
            if let Ok(node) = tree.extend_to_first(&tree.root(), &OrdinalNotation::from_nat(b.depth)) {
                r.line(format!("ledger: {node} (deepest explored witness; every countable ledger is bounded below the height)"));
            }
        }
        Err(e) => return input_error(&echo, &e.to_string()),
    }

    // Fixed-point search for the level-advance map on the tree space.
    let monoid = demo_monoid(kind, &height);
    let alpha = match canonical_initial_sequence(&monoid, b.alpha_factor) {
        Ok(a) => a,
        Err(e) => return input_error(&echo, &e.to_string()),
    };
    let include_paths = matches!(kind, TreeKind::Binary);
    let base = match tree_metric(&tree, &alpha, include_paths) {
        Ok(s) => s,
        Err(e) => return input_error(&echo, &e.to_string()),
    };
    let system = DynSystem {
        space: Arc::new(cauchy_completion(&base)),
        map: SelfMap::TreeLevelAdvance,
        alpha,
        dense: DenseSet::TreeNodes,
    };
    // The binary demo needs enough enumerated nodes to resolve a branch at
    // the requested depth; the effective width is printed above as given.
    let width = match kind {
        TreeKind::Binary => b.width.max(1usize << (b.depth.min(16) + 2)),
        TreeKind::SKappa => b.width,
    };
    let outcome = match coinitiality(&monoid) {
        CoinitDescriptor::Omega => decide_fixed_point(&system, b.depth, width),
        _ => {
            r.line("search: coinitiality is not omega; falling back to bounded exploration");
            bounded_search(&system, b.depth, width)
        }
    };
    match outcome {
        Ok(o) => {
            let code = search_outcome(&mut r, &system, &o);
            r.finish(code)
        }
        Err(e) => input_error(&echo, &e.to_string()),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::CheckMonoid { file, sample, seed } => check_monoid(&file, sample, seed),
        Command::CheckSpace { file } => check_space(&file),
        Command::CheckMap { space, map } => check_map(&space, &map),
        Command::Complete { file } => complete(&file),
        Command::Fixpoint { space, map, budgets } => fixpoint(&space, &map, &budgets),
        Command::Tree { sub: TreeCommand::Demo { kind, height, budgets } } => {
            tree_demo(kind, &height, &budgets)
        }
    }
}
