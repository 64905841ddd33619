//! Command-line front end. One invocation processes one presentation and
//! prints one report (human text or a structured JSON document); exit codes
//! encode the verdict so corpus runs can be shell-scripted:
//!
//! 0 — RFD / dense / valid / finite orbit (per subcommand)
//! 1 — the negative verdict
//! 2 — unreadable, unparsable, or otherwise invalid input
//! 3 — the condition verdict and the density check disagree

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::boundary::BoundaryPoint;
use crate::conditions::decide_rfd;
use crate::dot::dot_export;
use crate::groupoid::{
    isotropy, isotropy_generator, orbit, periodic_density_check, DensityParams,
};
use crate::notation::parse_point;
use crate::oracle::{desk_spec, expand, random_presentation};
use crate::presentation::GraphPresentation;
use crate::report;
use crate::report::Style;

#[derive(Parser, Debug)]
#[command(
    name = "rfdgraph",
    version,
    about = "Decide residual finite-dimensionality of graph C*-algebras from finite presentations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide the four structural conditions and report witnesses.
    Check(CheckArgs),
    /// Check density of periodic boundary points at bounded depth,
    /// cross-validated against `check`.
    Density(DensityArgs),
    /// Enumerate a boundary point's orbit or certify it infinite.
    Orbit(PointArgs),
    /// Compute a boundary point's isotropy group.
    Isotropy(PointArgs),
    /// Print the finite truncated expansion of the graph.
    Expand(ExpandArgs),
    /// Self-check a presentation: well-formedness, witness re-validation,
    /// bounded shift probes.
    Validate(ValidateArgs),
    /// Generate a pseudorandom presentation for a seed.
    Random(RandomArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Human-readable text (colored per RFD_COLOR).
    Human,
    /// Structured JSON matching schema/report.schema.json.
    #[value(alias = "structured")]
    Json,
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Path to a presentation file.
    pub input: Option<PathBuf>,
    /// Inline presentation text instead of a file.
    #[arg(long, conflicts_with = "input")]
    pub text: Option<String>,
}

impl InputArgs {
    fn load(&self) -> Result<GraphPresentation, String> {
        let text = match (&self.input, &self.text) {
            (Some(path), None) => std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?,
            (None, Some(text)) => text.clone(),
            (None, None) => return Err("no input: pass a file path or --text".into()),
            (Some(_), Some(_)) => return Err("pass a file path or --text, not both".into()),
        };
        let g = GraphPresentation::parse(&text).map_err(|e| e.to_string())?;
        g.validate().map_err(|e| e.to_string())?;
        Ok(g)
    }
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl OutputArgs {
    fn style(&self) -> Style {
        if self.output.is_some() {
            Style::plain()
        } else {
            Style::from_env()
        }
    }

    fn emit(&self, text: String) -> Result<(), String> {
        match &self.output {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| format!("cannot write {}: {e}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Also write a DOT rendering (witness edges highlighted) here.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Maximum cylinder base length (L).
    #[arg(long, default_value_t = 4)]
    pub stem_bound: usize,
    /// Maximum exclusion-set size and family sampling depth (f).
    #[arg(long, default_value_t = 3)]
    pub exclusion_bound: usize,
    /// Orbit-enumeration cap (K).
    #[arg(long, default_value_t = 64)]
    pub orbit_cap: usize,
}

#[derive(Args, Debug)]
pub struct PointArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Boundary point in report notation, e.g. `v`, `a1.b2`, `e^inf`,
    /// `stem.(c1.c2)^inf@1`, or `fw0^ray@2`.
    #[arg(long)]
    pub point: String,
    /// Orbit-enumeration cap (K).
    #[arg(long, default_value_t = 64)]
    pub orbit_cap: usize,
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Truncation level (B): families and omega multiplicities cut here.
    #[arg(long, default_value_t = 8)]
    pub expand_bound: u64,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Also write a DOT rendering here.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RandomArgs {
    #[command(flatten)]
    pub out: OutputArgs,
    /// Generator seed; equal seeds give byte-identical presentations.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Everything a subcommand can finish with.
enum Finish {
    /// Report text plus verdict-derived exit code.
    Done(i32),
    InputError(String),
}

fn parse_point_arg(g: &GraphPresentation, s: &str) -> Result<BoundaryPoint, String> {
    let p = parse_point(g, s).map_err(|e| e.to_string())?;
    p.validate(g)
        .map_err(|e| format!("point `{s}` does not lie in the boundary: {e}"))?;
    Ok(p)
}

fn write_dot(
    g: &GraphPresentation,
    witnesses: &[&crate::conditions::Witness],
    path: &PathBuf,
) -> Result<(), String> {
    std::fs::write(path, dot_export(g, witnesses))
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn cmd_check(args: &CheckArgs) -> Finish {
    let g = match args.input.load() {
        Ok(g) => g,
        Err(e) => return Finish::InputError(e),
    };
    let r = decide_rfd(&g);
    if let Some(path) = &args.dot {
        if let Err(e) = write_dot(&g, &r.witnesses(), path) {
            return Finish::InputError(e);
        }
    }
    let text = match args.out.format {
        Format::Human => report::render_conditions(&r, args.out.style()),
        Format::Json => report::to_pretty(&report::conditions_json(&r)),
    };
    if let Err(e) = args.out.emit(text) {
        return Finish::InputError(e);
    }
    Finish::Done(if r.rfd { 0 } else { 1 })
}

fn cmd_density(args: &DensityArgs) -> Finish {
    let g = match args.input.load() {
        Ok(g) => g,
        Err(e) => return Finish::InputError(e),
    };
    let params = DensityParams {
        stem_bound: args.stem_bound,
        exclusion_bound: args.exclusion_bound,
        orbit_cap: args.orbit_cap,
    };
    let conditions = decide_rfd(&g);
    let density = match periodic_density_check(&g, params) {
        Ok(d) => d,
        Err(e) => return Finish::InputError(e.to_string()),
    };
    let style = args.out.style();
    let text = match args.out.format {
        Format::Human => report::render_density(&density, style),
        Format::Json => report::to_pretty(&report::density_json(&density)),
    };
    // The executable theorem: the symbolic verdict and the dynamical check
    // must agree. A mismatch is reported loudly with both reports.
    if conditions.rfd != density.is_dense() {
        let mut both = String::new();
        both.push_str(&text);
        match args.out.format {
            Format::Human => both.push_str(&report::render_conditions(&conditions, style)),
            Format::Json => {
                both.push_str(&report::to_pretty(&report::conditions_json(&conditions)))
            }
        }
        both.push_str(
            "error: the condition verdict and the density check disagree.\n\
             This is either a bug or insufficient bounds; try raising \
             --stem-bound / --exclusion-bound.\n",
        );
        if let Err(e) = args.out.emit(both) {
            return Finish::InputError(e);
        }
        return Finish::Done(3);
    }
    if let Err(e) = args.out.emit(text) {
        return Finish::InputError(e);
    }
    Finish::Done(if density.is_dense() { 0 } else { 1 })
}

fn cmd_orbit(args: &PointArgs) -> Finish {
    let g = match args.input.load() {
        Ok(g) => g,
        Err(e) => return Finish::InputError(e),
    };
    let p = match parse_point_arg(&g, &args.point) {
        Ok(p) => p,
        Err(e) => return Finish::InputError(e),
    };
    let r = match orbit(&g, &p, args.orbit_cap) {
        Ok(r) => r,
        Err(e) => {
            return Finish::InputError(format!(
                "{e}; raise --orbit-cap to enumerate further"
            ));
        }
    };
    let text = match args.out.format {
        Format::Human => report::render_orbit(&p, &r, args.out.style()),
        Format::Json => report::to_pretty(&report::orbit_json(&p, &r)),
    };
    if let Err(e) = args.out.emit(text) {
        return Finish::InputError(e);
    }
    Finish::Done(if r.is_finite() { 0 } else { 1 })
}

fn cmd_isotropy(args: &PointArgs) -> Finish {
    let g = match args.input.load() {
        Ok(g) => g,
        Err(e) => return Finish::InputError(e),
    };
    let p = match parse_point_arg(&g, &args.point) {
        Ok(p) => p,
        Err(e) => return Finish::InputError(e),
    };
    let iso = isotropy(&p);
    let gen = isotropy_generator(&p);
    let text = match args.out.format {
        Format::Human => report::render_isotropy(&p, &iso, gen.as_ref(), args.out.style()),
        Format::Json => report::to_pretty(&report::isotropy_report_json(&p, &iso, gen.as_ref())),
    };
    if let Err(e) = args.out.emit(text) {
        return Finish::InputError(e);
    }
    Finish::Done(0)
}

fn cmd_expand(args: &ExpandArgs) -> Finish {
    let g = match args.input.load() {
        Ok(g) => g,
        Err(e) => return Finish::InputError(e),
    };
    if args.expand_bound == 0 {
        return Finish::InputError("--expand-bound must be at least 1".into());
    }
    let t = expand(&g, args.expand_bound);
    let text = match args.out.format {
        Format::Human => report::render_expansion(&t, args.out.style()),
        Format::Json => report::to_pretty(&report::expansion_json(&t)),
    };
    if let Err(e) = args.out.emit(text) {
        return Finish::InputError(e);
    }
    Finish::Done(0)
}

fn cmd_validate(args: &ValidateArgs) -> Finish {
    let g = match args.input.load() {
        Ok(g) => g,
        Err(e) => return Finish::InputError(e),
    };
    let r = report::validate_presentation(&g);
    if let Some(path) = &args.dot {
        let verdict = decide_rfd(&g);
        if let Err(e) = write_dot(&g, &verdict.witnesses(), path) {
            return Finish::InputError(e);
        }
    }
    let text = match args.out.format {
        Format::Human => report::render_validation(&r, args.out.style()),
        Format::Json => report::to_pretty(&report::validation_json(&r)),
    };
    if let Err(e) = args.out.emit(text) {
        return Finish::InputError(e);
    }
    Finish::Done(if r.is_valid() { 0 } else { 1 })
}

fn cmd_random(args: &RandomArgs) -> Finish {
    let g = random_presentation(&desk_spec(args.seed));
    let text = match args.out.format {
        Format::Human => g.serialize(),
        Format::Json => report::to_pretty(&report::random_json(args.seed, &g.serialize())),
    };
    if let Err(e) = args.out.emit(text) {
        return Finish::InputError(e);
    }
    Finish::Done(0)
}

/// Dispatch a parsed command line; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let finish = match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Density(a) => cmd_density(a),
        Command::Orbit(a) => cmd_orbit(a),
        Command::Isotropy(a) => cmd_isotropy(a),
        Command::Expand(a) => cmd_expand(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Random(a) => cmd_random(a),
    };
    match finish {
        Finish::Done(code) => code,
        Finish::InputError(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_line_grammar_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn inline_text_and_missing_input_are_handled() {
        let args = InputArgs {
            input: None,
            text: Some("vertex v\n".into()),
        };
        assert!(args.load().is_ok());
        let none = InputArgs {
            input: None,
            text: None,
        };
        assert!(none.load().is_err());
        let bad = InputArgs {
            input: None,
            text: Some("vertex v\nvertex v\n".into()),
        };
        assert!(bad.load().is_err());
    }

    #[test]
    fn structured_format_accepts_its_alias() {
        let cli = Cli::try_parse_from([
            "rfdgraph", "check", "--text", "vertex v", "--format", "structured",
        ])
        .unwrap();
        match cli.command {
            Command::Check(a) => assert_eq!(a.out.format, Format::Json),
            _ => panic!("parsed the wrong subcommand"),
        }
    }
}
