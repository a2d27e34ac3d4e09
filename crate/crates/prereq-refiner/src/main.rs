use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use prereq_refiner::decision::Verdict;
use prereq_refiner::fuzzy::Thresholds;
use prereq_refiner::grades::{GradeMatrix, MissingPolicy};
use prereq_refiner::hierarchy::{Edge, Hierarchy};
use prereq_refiner::pipeline::{run_pipeline, PipelineConfig, PipelineOutput};
use prereq_refiner::report;
use prereq_refiner::simulate::{
    evaluate_recovery, expected_verdicts, generate_cohort, perturb_hierarchy, CohortSpec, LinkGap,
};
use prereq_refiner::Result;

/// Refine an expert learning hierarchy against cohort grade data.
#[derive(Parser)]
#[command(name = "prereq-refiner", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full refinement pipeline and write the report outputs.
    Refine(RefineArgs),
    /// Parse and validate the input files without refining.
    Validate(ValidateArgs),
    /// Generate a synthetic cohort from a ground-truth hierarchy, optionally
    /// mis-orient some links, refine, and score the recovery.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Csv,
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Format::Json => "json",
            Format::Dot => "dot",
            Format::Csv => "csv",
        };
        f.write_str(s)
    }
}

#[derive(Args)]
struct PipelineArgs {
    /// Lower bound of the "correct direction" membership support (negative).
    #[arg(long, env = "PREREQ_S1", default_value_t = -5.0, allow_negative_numbers = true)]
    s1: f64,
    /// Peak of the "reversed direction" membership (positive).
    #[arg(
        long,
        env = "PREREQ_S2",
        default_value_t = 5.0,
        allow_negative_numbers = true
    )]
    s2: f64,
    /// Upper bound of the "reversed direction" membership support.
    #[arg(
        long,
        env = "PREREQ_S3",
        default_value_t = 10.0,
        allow_negative_numbers = true
    )]
    s3: f64,
    /// Minimum winning average for a link to survive.
    #[arg(long, env = "PREREQ_ALPHA_MIN", default_value_t = 0.5)]
    alpha_min: f64,
    /// Maximum attainable grade.
    #[arg(long, env = "PREREQ_G_MAX", default_value_t = 20.0)]
    g_max: f64,
    /// strict: reject missing grade cells; skip: exclude the learner from
    /// the averages of any link touching the gap.
    #[arg(long, env = "PREREQ_MISSING_POLICY", default_value = "strict")]
    missing_policy: MissingPolicy,
    /// Output directory.
    #[arg(long, env = "PREREQ_OUT", default_value = "out")]
    out: PathBuf,
    /// Output formats to write.
    #[arg(
        long,
        env = "PREREQ_FORMAT",
        value_delimiter = ',',
        default_values_t = vec![Format::Json, Format::Dot, Format::Csv]
    )]
    format: Vec<Format>,
    /// Decimal places for presentation rounding.
    #[arg(long, env = "PREREQ_DECIMALS", default_value_t = 2)]
    decimals: u32,
}

impl PipelineArgs {
    fn config(&self) -> Result<PipelineConfig> {
        Ok(PipelineConfig {
            thresholds: Thresholds::new(self.s1, self.s2, self.s3)?,
            alpha_min: self.alpha_min,
            g_max: self.g_max,
            missing_policy: self.missing_policy,
            decimals: self.decimals,
        })
    }
}

#[derive(Args)]
struct RefineArgs {
    /// Hierarchy file (.json, or edge-list CSV with header from,to).
    #[arg(long, env = "PREREQ_HIERARCHY")]
    hierarchy: PathBuf,
    /// Grades CSV: first column learner, remaining columns skill ids.
    #[arg(long, env = "PREREQ_GRADES")]
    grades: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, env = "PREREQ_HIERARCHY")]
    hierarchy: PathBuf,
    #[arg(long, env = "PREREQ_GRADES")]
    grades: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Ground-truth hierarchy the cohort is generated from.
    #[arg(long, env = "PREREQ_HIERARCHY")]
    hierarchy: PathBuf,
    /// Cohort spec JSON (n_learners, noise_spread, base_grade_range, seed,
    /// link_gaps).
    #[arg(long, env = "PREREQ_COHORT")]
    cohort: PathBuf,
    /// Mis-orient this true link in the expert hierarchy (FROM:TO,
    /// repeatable). Unless the spec lists an explicit gap, the link gets a
    /// mastery gap of s2 so the reversal leaves a signal in the data.
    #[arg(long, value_name = "FROM:TO")]
    reverse: Vec<String>,
    /// Overrides the seed in the cohort spec.
    #[arg(long, env = "PREREQ_SEED")]
    seed: Option<u64>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Refine(args) => refine(&args),
        Command::Validate(args) => validate(&args),
        Command::Simulate(args) => simulate(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Writes the selected outputs and reports warnings. Exit 0 on a clean run,
/// 2 when the result carries warnings.
fn write_outputs(
    out: &PipelineOutput,
    config: &PipelineConfig,
    args: &PipelineArgs,
) -> Result<ExitCode> {
    fs::create_dir_all(&args.out)?;
    let dp = config.decimals;
    if args.format.contains(&Format::Json) {
        fs::write(
            args.out.join("report.json"),
            report::render_report(out, config)?,
        )?;
    }
    if args.format.contains(&Format::Dot) {
        fs::write(
            args.out.join("final.dot"),
            report::render_dot(&out.final_hierarchy, false),
        )?;
    }
    if args.format.contains(&Format::Csv) {
        fs::write(
            args.out.join("delta.csv"),
            report::render_delta_csv(&out.delta, dp),
        )?;
        fs::write(
            args.out.join("fuzzy_cpr.csv"),
            report::render_fuzzy_csv(&out.scores, &out.averages, report::FuzzyTable::Cpr, dp),
        )?;
        fs::write(
            args.out.join("fuzzy_rpr.csv"),
            report::render_fuzzy_csv(&out.scores, &out.averages, report::FuzzyTable::Rpr, dp),
        )?;
        fs::write(
            args.out.join("averages.csv"),
            report::render_averages_csv(&out.averages, dp),
        )?;
        fs::write(
            args.out.join("decisions.csv"),
            report::render_decisions_csv(&out.decisions, dp),
        )?;
    }

    let mut warned = false;
    for cycle in &out.final_hierarchy.cycle_warnings {
        warned = true;
        eprintln!(
            "warning: final hierarchy contains a cycle: {}",
            cycle.join(" \u{2192} ")
        );
    }
    for edge in &out.final_hierarchy.duplicate_warnings {
        warned = true;
        eprintln!("warning: edge {edge} produced by more than one decision");
    }
    Ok(ExitCode::from(if warned { 2 } else { 0 }))
}

fn refine(args: &RefineArgs) -> Result<ExitCode> {
    let config = args.pipeline.config()?;
    let hierarchy = Hierarchy::from_path(&args.hierarchy)?;
    let grades = GradeMatrix::from_csv_reader(
        fs::File::open(&args.grades)?,
        config.g_max,
        config.missing_policy,
    )?;
    let out = run_pipeline(hierarchy, grades, &config)?;
    write_outputs(&out, &config, &args.pipeline)
}

fn validate(args: &ValidateArgs) -> Result<ExitCode> {
    let config = args.pipeline.config()?;
    let hierarchy = Hierarchy::from_path(&args.hierarchy)?;
    eprintln!(
        "hierarchy ok: {} skills, {} edges",
        hierarchy.skills().len(),
        hierarchy.edges().len()
    );
    if let Some(path) = &args.grades {
        let grades = GradeMatrix::from_csv_reader(
            fs::File::open(path)?,
            config.g_max,
            config.missing_policy,
        )?;
        // surfaces skill-set mismatches without running the pipeline
        prereq_refiner::fuzzy::delta_grades(&grades, &hierarchy)?;
        eprintln!(
            "grades ok: {} learners \u{00d7} {} skills",
            grades.learners().len(),
            grades.skills().len()
        );
    }
    Ok(ExitCode::from(0))
}

fn parse_reverse(raw: &str) -> Result<Edge> {
    let (from, to) = raw.split_once(':').ok_or_else(|| {
        prereq_refiner::Error::InvalidCohortSpec(format!("--reverse takes FROM:TO, got `{raw}`"))
    })?;
    Ok(Edge::new(from, to))
}

fn simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let config = args.pipeline.config()?;
    let truth = Hierarchy::from_path(&args.hierarchy)?;
    let mut spec: CohortSpec = serde_json::from_reader(fs::File::open(&args.cohort)?)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }

    let reverse: Vec<Edge> = args
        .reverse
        .iter()
        .map(|r| parse_reverse(r))
        .collect::<Result<_>>()?;
    for edge in &reverse {
        let has_gap = spec
            .link_gaps
            .iter()
            .any(|g| g.from == edge.from && g.to == edge.to);
        if !has_gap {
            spec.link_gaps.push(LinkGap {
                from: edge.from.clone(),
                to: edge.to.clone(),
                gap: config.thresholds.s2,
            });
        }
    }

    let grades = generate_cohort(&truth, &spec, config.g_max)?;
    let expert = perturb_hierarchy(&truth, &reverse)?;
    let expected = expected_verdicts(&expert, &reverse);
    let out = run_pipeline(expert, grades.clone(), &config)?;
    let stats = evaluate_recovery(&expected, &out.decisions)?;

    fs::create_dir_all(&args.pipeline.out)?;
    fs::write(args.pipeline.out.join("cohort.csv"), grades.to_csv_string())?;
    let mut recovery = serde_json::to_string_pretty(&stats)?;
    recovery.push('\n');
    fs::write(args.pipeline.out.join("recovery.json"), recovery)?;

    for (edge, verdict) in &expected {
        if *verdict == Verdict::Reversed {
            let got = out
                .decisions
                .iter()
                .find(|d| &d.original == edge)
                .map(|d| d.verdict);
            eprintln!("reversed link {edge}: predicted {:?}", got);
        }
    }
    eprintln!("recovery accuracy: {:.3}", stats.accuracy);

    write_outputs(&out, &config, &args.pipeline)
}
