use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::warn;
use refpat::patterndb::PATTERN_DIR_ENV;
use refpat::reftools::{refine_directional, refine_uniform, refine_uniform_toward, RefineReport};
use refpat::{export_vtk, parse_pattern, read_mesh, write_mesh, ElementType, GeoMesh, MeshError, PatternDb};

#[derive(Parser)]
#[command(name = "refpat", version, about = "Refinement patterns for conforming h-adaptive meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and initialize a pattern file and report its structure
    ValidatePattern { file: PathBuf },
    /// Refine a mesh for a number of levels
    Refine(RefineArgs),
    /// List the patterns of a directory, grouped by element type
    DbList {
        #[arg(long, env = PATTERN_DIR_ENV)]
        patterns: Option<PathBuf>,
        /// Also list generated side patterns and permuted variants
        #[arg(long)]
        all: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Uniform,
    Directional,
}

#[derive(clap::Args)]
struct RefineArgs {
    mesh: PathBuf,
    #[arg(long, value_enum, default_value = "uniform")]
    mode: Mode,
    /// Material id of the entity to refine toward
    #[arg(long, required_if_eq("mode", "directional"))]
    target_mat: Option<i32>,
    #[arg(long, default_value_t = 1)]
    levels: usize,
    /// Pattern directory; the bundled patterns are used when absent
    #[arg(long, env = PATTERN_DIR_ENV)]
    patterns: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Legacy VTK export of the leaf elements
    #[arg(long)]
    vtk: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // usage errors are input errors; 2 is reserved for incompatibility
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::ValidatePattern { file } => validate_pattern(&file),
        Command::Refine(args) => refine(&args),
        Command::DbList { patterns, all } => db_list(patterns.as_deref(), all),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 2 for refinement incompatibilities, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let incompatible = err.chain().any(|e| {
        let mesh = e
            .downcast_ref::<MeshError>()
            .or_else(|| match e.downcast_ref::<refpat::IoError>() {
                Some(refpat::IoError::Mesh(m)) => Some(m),
                _ => None,
            });
        matches!(mesh, Some(MeshError::Incompatible { .. } | MeshError::ConflictingNeighbors { .. }))
    });
    if incompatible {
        2
    } else {
        1
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn validate_pattern(file: &Path) -> Result<()> {
    let text = read(file)?;
    let p = parse_pattern(&text).with_context(|| format!("{}", file.display()))?;
    let t = p.father_type();
    let mut out = String::new();
    writeln!(out, "{} (id {})", p.name(), p.id())?;
    writeln!(
        out,
        "father={} sons={} side-patterns: {} edges split",
        t.name(),
        p.son_count(),
        p.split_edges().len()
    )?;
    let sons: Vec<&str> = (0..p.son_count()).map(|j| p.son(j).element_type.name()).collect();
    writeln!(out, "son types: {}", sons.join(", "))?;
    let refined: Vec<usize> = (0..t.side_count()).filter(|&s| p.is_side_refined(s)).collect();
    writeln!(out, "refined sides: {}", join(&refined))?;
    writeln!(out, "partitions of refined sides:")?;
    for &s in &refined {
        let part = p.partition(s);
        writeln!(out, "  side {s}: nodes [{}], {} son sides", join(&part.nodes), part.sub_sides.len())?;
    }
    let mut db = PatternDb::new();
    let r = db.insert(p.clone())?;
    let mut distinct = db.get(r).permutations().to_vec();
    distinct.sort();
    distinct.dedup();
    writeln!(
        out,
        "permutations: {} ({} distinct variants)",
        db.get(r).permutations().len(),
        distinct.len()
    )?;
    let issues = p.validate();
    for issue in &issues {
        writeln!(out, "invalid: {issue}")?;
    }
    print!("{out}");
    if !issues.is_empty() {
        bail!("{} is not a valid refinement pattern", file.display());
    }
    Ok(())
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn load_db(dir: Option<&Path>) -> Result<PatternDb> {
    let Some(dir) = dir else {
        return refpat::samples::corpus_db().context("bundled patterns");
    };
    let mut db = PatternDb::with_uniform();
    let report = db
        .load_directory(dir)
        .with_context(|| format!("pattern directory {}", dir.display()))?;
    for err in &report.errors {
        warn!("skipped {err}");
    }
    Ok(db)
}

fn refine(args: &RefineArgs) -> Result<()> {
    let db = load_db(args.patterns.as_deref())?;
    let text = read(&args.mesh)?;
    let mut mesh = read_mesh(&text).with_context(|| format!("{}", args.mesh.display()))?;
    let mut rows = vec![leaf_counts(&mesh)];
    for level in 1..=args.levels {
        let report = match (args.mode, args.target_mat) {
            (Mode::Directional, Some(m)) => {
                let leaves: Vec<usize> = mesh.leaves().collect();
                refine_directional(&mut mesh, &leaves, m, &db)?
            }
            (Mode::Uniform, Some(m)) => refine_uniform_toward(&mut mesh, m, &db)?,
            (Mode::Uniform, None) => {
                let leaves: Vec<usize> = mesh.leaves().collect();
                refine_uniform(&mut mesh, &leaves, &db)?;
                RefineReport::default()
            }
            (Mode::Directional, None) => bail!("directional refinement needs --target-mat"),
        };
        if !report.unmatched.is_empty() {
            warn!(
                "level {level}: no pattern fits elements {:?}; they were left undivided",
                report.unmatched
            );
        }
        rows.push(leaf_counts(&mesh));
    }
    print!("{}", table(&rows));
    if let Some(path) = &args.out {
        write(path, &write_mesh(&mesh))?;
    }
    if let Some(path) = &args.vtk {
        write(path, &export_vtk(&mesh, true))?;
    }
    Ok(())
}

/// Leaf counts by type, and the node count.
fn leaf_counts(mesh: &GeoMesh) -> (BTreeMap<ElementType, usize>, usize) {
    let mut counts = BTreeMap::new();
    for e in mesh.leaves() {
        *counts.entry(mesh.element(e).element_type).or_insert(0) += 1;
    }
    (counts, mesh.node_count())
}

fn table(rows: &[(BTreeMap<ElementType, usize>, usize)]) -> String {
    let types: Vec<ElementType> = ElementType::ALL
        .into_iter()
        .filter(|t| rows.iter().any(|(c, _)| c.contains_key(t)))
        .collect();
    let mut out = format!("{:>5} {:>9}", "level", "elements");
    for t in &types {
        write!(out, " {:>13}", t.name()).unwrap();
    }
    out.push_str(&format!(" {:>9}\n", "nodes"));
    for (level, (counts, nodes)) in rows.iter().enumerate() {
        write!(out, "{level:>5} {:>9}", counts.values().sum::<usize>()).unwrap();
        for t in &types {
            write!(out, " {:>13}", counts.get(t).copied().unwrap_or(0)).unwrap();
        }
        writeln!(out, " {nodes:>9}").unwrap();
    }
    out
}

fn db_list(dir: Option<&Path>, all: bool) -> Result<()> {
    let db = match dir {
        Some(_) => load_db(dir)?,
        None => PatternDb::with_uniform(),
    };
    let listed: Vec<_> = if all {
        db.iter().map(|(r, _)| r).collect()
    } else {
        db.inserted().to_vec()
    };
    let mut out = String::new();
    for t in ElementType::ALL {
        let mut of_type: Vec<_> = listed.iter().filter(|&&r| db.get(r).father_type() == t).collect();
        if of_type.is_empty() {
            continue;
        }
        of_type.sort_by_key(|&&r| db.get(r).id());
        writeln!(out, "{}", t.name())?;
        for &r in of_type {
            let p = db.get(r);
            writeln!(out, "  {:>6}  {:<24} {} sons", p.id(), p.name(), p.son_count())?;
        }
    }
    writeln!(out, "{} patterns stored", db.len())?;
    print!("{out}");
    Ok(())
}
