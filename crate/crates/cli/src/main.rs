use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use posauction::run::{execute, Command, Options, RunError};
use posauction::{ExactScenario, Pricing, Ranking};

/// Position auctions with a for-profit mediator, computed in exact arithmetic.
#[derive(Parser)]
#[command(name = "posauction", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Outcome, deviation table and equilibrium verdicts.
    Verify(Common),
    /// Best flatten (or laddered) plan for a block of members.
    Mediate(Common),
    /// Move the top members one slot down under a uniform score.
    Slide(Common),
    /// Everything above as one JSON document.
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    scenario: PathBuf,
    /// Number of mediator members.
    #[arg(long = "L")]
    members: Option<usize>,
    /// Non-members ranked above the block.
    #[arg(long = "l")]
    above: Option<usize>,
    /// Anchor position for top blocks: 1 (symmetric) or 2.
    #[arg(long)]
    anchor: Option<usize>,
    /// Uniform score for sliding.
    #[arg(long)]
    score: Option<String>,
    /// Fraction of the gain kept by the mediator.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, value_parser = parse_pricing)]
    pricing: Option<Pricing>,
    #[arg(long, value_parser = parse_ranking)]
    ranking: Option<Ranking>,
    /// Cross-check every claim with the brute-force oracle.
    #[arg(long)]
    verify_oracle: bool,
    /// Also write the JSON report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pricing(text: &str) -> Result<Pricing, String> {
    Pricing::parse(text).ok_or_else(|| format!("unknown pricing `{text}` (gfp, gsp, laddered)"))
}

fn parse_ranking(text: &str) -> Result<Ranking, String> {
    Ranking::parse(text).ok_or_else(|| format!("unknown ranking `{text}` (rbb, rbr)"))
}

fn run(command: Command, args: Common) -> Result<i32, RunError> {
    let scenario = ExactScenario::load(&args.scenario)?;
    let options = Options {
        members: args.members,
        above: args.above,
        anchor: args.anchor,
        score: args.score,
        alpha: args.alpha,
        pricing: args.pricing,
        ranking: args.ranking,
        verify_oracle: args.verify_oracle,
    };
    let output = execute(&scenario, command, &options)?;
    print!("{}", output.text);
    if let Some(path) = args.out {
        let mut body = serde_json::to_string_pretty(&output.json).expect("report serializes");
        body.push('\n');
        std::fs::write(&path, body)
            .map_err(|e| RunError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(output.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Mediate(a) => (Command::Mediate, a),
        Cmd::Slide(a) => (Command::Slide, a),
        Cmd::Report(a) => (Command::Report, a),
    };
    match run(command, args) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
