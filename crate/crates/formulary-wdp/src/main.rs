//! formwdp: formulary position auction toolkit.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use formulary_wdp::compliance::{
    bundle_counterfactual, check_linear_basis, compliance_report, finding_order, BundleOffer,
    ComplianceFinding, Severity,
};
use formulary_wdp::decimal::Decimal;
use formulary_wdp::domain::{parse_rate_arg, Money, Rate};
use formulary_wdp::duopoly::{
    equalizing_share, equalizing_share_limited, favorability_at, favorability_curve, Dominance,
    EqualizingShare, SharedBidSpec,
};
use formulary_wdp::engine::{solve, SolveOptions, DEFAULT_MAX_DRUGS};
use formulary_wdp::financials::{
    derive_bid_down_limit, margin_statement_gross, Basis, DiseconomyPreset, MarginStatement,
};
use formulary_wdp::io::{
    bytes_digest, emit_report, findings_text, load_margins, load_scenario, scenario_digest,
    LoadError, OutputFormat, ReportContent,
};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_FINDINGS: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "formwdp",
    version,
    about = "formulary position auction toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the winner's determination problem for a scenario file
    Solve {
        scenario: PathBuf,

        /// Write the full JSON report here
        #[arg(long)]
        report: Option<PathBuf>,

        /// Show only the best N assignments
        #[arg(long)]
        top: Option<usize>,
    },

    /// Two-bidder analysis: equalizing share, favorability, curves
    Duopoly(DuopolyArgs),

    /// Run the compliance screens over every menu in a scenario
    Check {
        scenario: PathBuf,

        /// Override the scenario's bid-down limit
        #[arg(long, value_parser = parse_rate_cli)]
        delta: Option<Rate>,

        /// Override the scenario's tier-3 share
        #[arg(long = "t3-share", value_parser = parse_rate_cli)]
        t3_share: Option<Rate>,

        /// Write the findings report as JSON here
        #[arg(long)]
        report: Option<PathBuf>,
    },

    /// Compare a bundled rebate offer against a standard-auction counterfactual
    Bundle {
        /// Bundled rebate total, dollars per year
        #[arg(long, value_parser = parse_money_cli)]
        offer: Money,

        /// Total gross market, dollars per year
        #[arg(long, value_parser = parse_money_cli)]
        market: Money,

        /// PBM's share of the market
        #[arg(long, value_parser = parse_rate_cli)]
        share: Rate,

        /// Expected winning rebate rate in a standard auction
        #[arg(long, value_parser = parse_rate_cli)]
        rate: Rate,
    },

    /// Print a margin statement on net and gross bases
    Gtn {
        margins: PathBuf,

        /// Also derive the bid-down limit with this diseconomy preset
        #[arg(long, value_parser = parse_preset)]
        preset: Option<DiseconomyPreset>,
    },
}

#[derive(Debug, Args)]
struct DuopolyArgs {
    /// Incumbent's exclusive rate ("57.5%" or "0.575")
    #[arg(long, value_parser = parse_rate_cli)]
    b1: Rate,

    /// Incumbent's shared (bid-down) rate
    #[arg(long, value_parser = parse_rate_cli, conflicts_with = "delta")]
    b2: Option<Rate>,

    /// Entrant's shared rate
    #[arg(long, value_parser = parse_rate_cli)]
    b3: Rate,

    /// Bid-down limit; the incumbent's shared bid is pinned to (1-delta)*b1
    #[arg(long, value_parser = parse_rate_cli)]
    delta: Option<Rate>,

    /// Evaluate the favorability decision at this entrant share
    #[arg(long, value_parser = parse_rate_cli, conflicts_with = "curve")]
    x: Option<Rate>,

    /// Emit a CSV favorability curve with this many grid points
    #[arg(long)]
    curve: Option<usize>,
}

fn parse_rate_cli(s: &str) -> Result<Rate, String> {
    parse_rate_arg(s).map_err(|e| e.to_string())
}

fn parse_money_cli(s: &str) -> Result<Money, String> {
    s.parse::<Money>().map_err(|e| e.to_string())
}

fn parse_preset(s: &str) -> Result<DiseconomyPreset, String> {
    match s {
        "table" => Ok(DiseconomyPreset::Table),
        "text" => Ok(DiseconomyPreset::Text),
        other => Err(format!(
            "unknown preset {other:?}, expected \"table\" or \"text\""
        )),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve {
            scenario,
            report,
            top,
        } => cmd_solve(&scenario, report.as_deref(), top),
        Command::Duopoly(args) => cmd_duopoly(&args),
        Command::Check {
            scenario,
            delta,
            t3_share,
            report,
        } => cmd_check(&scenario, delta, t3_share, report.as_deref()),
        Command::Bundle {
            offer,
            market,
            share,
            rate,
        } => cmd_bundle(offer, market, share, rate),
        Command::Gtn { margins, preset } => cmd_gtn(&margins, preset),
    }
}

fn solve_options() -> Result<SolveOptions> {
    let max_drugs = match std::env::var("FORMWDP_MAX_DRUGS") {
        Ok(text) => text
            .parse::<usize>()
            .with_context(|| format!("FORMWDP_MAX_DRUGS={text:?} is not a count"))?,
        Err(_) => DEFAULT_MAX_DRUGS,
    };
    Ok(SolveOptions { max_drugs })
}

fn read_file(path: &std::path::Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn print_load_error(err: &LoadError) {
    match err {
        LoadError::Parse { .. } => eprintln!("error: {err}"),
        LoadError::Invalid(issues) => {
            eprintln!("error: scenario document is invalid:");
            for issue in issues {
                eprintln!("  [{}] {}", issue.code, issue.message);
            }
        }
    }
}

fn cmd_solve(
    path: &std::path::Path,
    report: Option<&std::path::Path>,
    top: Option<usize>,
) -> Result<u8> {
    let bytes = read_file(path)?;
    let scenario = match load_scenario(&bytes) {
        Ok(s) => s,
        Err(e) => {
            print_load_error(&e);
            return Ok(EXIT_ERROR);
        }
    };
    let solved = match solve(&scenario, &solve_options()?) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: [{}] {}", e.code(), e);
            return Ok(EXIT_ERROR);
        }
    };
    let content = ReportContent::Solve {
        scenario_digest: scenario_digest(&scenario),
        report: Box::new(solved),
        top,
    };
    let text = emit_report(&content, OutputFormat::Text)?;
    print!("{}", String::from_utf8_lossy(&text));
    if let Some(out) = report {
        let json = emit_report(&content, OutputFormat::Json)?;
        std::fs::write(out, json).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(EXIT_OK)
}

fn render_equalizing_share(label: &str, share: &EqualizingShare) {
    println!("{label}: {}", share.value.format_dp(4));
    match share.dominance {
        Some(Dominance::ExclusiveAtAllShares) => {
            println!("note: exclusive assignment dominates at every share in [0, 1]")
        }
        Some(Dominance::SharedAtAllShares) => {
            println!("note: shared assignment dominates at every share in [0, 1]")
        }
        None => {}
    }
}

fn cmd_duopoly(args: &DuopolyArgs) -> Result<u8> {
    let (shared_spec, incumbent_shared): (SharedBidSpec, Decimal) = match (args.b2, args.delta) {
        (Some(b2), None) => (SharedBidSpec::Explicit(b2), b2.as_decimal()),
        (None, Some(delta)) => {
            let floor = Decimal::ONE
                .sub(&delta.as_decimal())
                .mul(&args.b1.as_decimal());
            (SharedBidSpec::LimitFloor(delta), floor)
        }
        (None, None) => bail!("one of --b2 or --delta is required"),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };

    if let Some(points) = args.curve {
        let curve = favorability_curve(args.b1, args.b3, shared_spec, points)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let csv = emit_report(&ReportContent::Curve(curve), OutputFormat::CsvCurve)?;
        print!("{}", String::from_utf8_lossy(&csv));
        return Ok(EXIT_OK);
    }

    let share = match shared_spec {
        SharedBidSpec::Explicit(b2) => equalizing_share(
            &args.b1.as_decimal(),
            &b2.as_decimal(),
            &args.b3.as_decimal(),
        ),
        SharedBidSpec::LimitFloor(delta) => {
            println!("incumbent_shared_floor: {}", incumbent_shared.format_dp(4));
            equalizing_share_limited(
                &args.b1.as_decimal(),
                &args.b3.as_decimal(),
                &delta.as_decimal(),
            )
        }
    };
    match share {
        Ok(share) => render_equalizing_share("equalizing_share", &share),
        Err(e) => {
            eprintln!("error: [DEGENERATE_BIDS] {e}");
            return Ok(EXIT_ERROR);
        }
    }

    if let Some(x) = args.x {
        let favorability = favorability_at(
            &args.b1.as_decimal(),
            &incumbent_shared,
            &args.b3.as_decimal(),
            &x.as_decimal(),
        );
        println!("decision: {}", favorability.preference.label());
        println!("margin: {}", favorability.margin.format_dp(4));
    }
    Ok(EXIT_OK)
}

fn cmd_check(
    path: &std::path::Path,
    delta: Option<Rate>,
    t3_share: Option<Rate>,
    report: Option<&std::path::Path>,
) -> Result<u8> {
    let bytes = read_file(path)?;

    // Non-linear terms are findings, not just validation noise; scan the raw
    // document so they surface even when the typed parse rejects the file.
    let mut nonlinear: Vec<ComplianceFinding> = Vec::new();
    if let Ok(value) = serde_json::from_slice::<serde_json::Value>(&bytes) {
        if let Some(drugs) = value.get("drugs").and_then(serde_json::Value::as_array) {
            for drug in drugs {
                nonlinear.extend(check_linear_basis(drug));
            }
        }
    }

    let (digest, mut findings) = match load_scenario(&bytes) {
        Ok(scenario) => {
            let mut policy = scenario.policy.clone();
            if let Some(d) = delta {
                policy.bid_down_limit = d;
            }
            if let Some(t) = t3_share {
                policy.tier3_share = t;
            }
            let mut findings = compliance_report(&scenario, &policy);
            findings.extend(nonlinear);
            (scenario_digest(&scenario), findings)
        }
        Err(e) if !nonlinear.is_empty() => {
            // The file cannot validate, but the reason is the banned terms
            // themselves: report them as findings.
            if let LoadError::Invalid(issues) = &e {
                for issue in issues.iter().filter(|i| i.code != "NONLINEAR_TERM") {
                    eprintln!("note: [{}] {}", issue.code, issue.message);
                }
            }
            (bytes_digest(&bytes), nonlinear)
        }
        Err(e) => {
            print_load_error(&e);
            return Ok(EXIT_ERROR);
        }
    };
    findings.sort_by(finding_order);

    let content = ReportContent::Check {
        scenario_digest: digest,
        findings: findings.clone(),
    };
    let text = emit_report(&content, OutputFormat::Text)?;
    print!("{}", String::from_utf8_lossy(&text));
    if let Some(out) = report {
        let json = emit_report(&content, OutputFormat::Json)?;
        std::fs::write(out, json).with_context(|| format!("writing {}", out.display()))?;
    }
    if findings.iter().any(|f| f.severity == Severity::Reject) {
        Ok(EXIT_FINDINGS)
    } else {
        Ok(EXIT_OK)
    }
}

fn cmd_bundle(offer: Money, market: Money, share: Rate, rate: Rate) -> Result<u8> {
    if offer.amount() <= Decimal::ZERO {
        bail!("--offer must be positive");
    }
    if market.amount() <= Decimal::ZERO {
        bail!("--market must be positive");
    }
    let comparison = bundle_counterfactual(&BundleOffer {
        bundled_rebate_total: offer,
        tying_drug: "bundle".to_string(),
        tied_drugs: Vec::new(),
        market_gross: market,
        pbm_share: share,
        expected_winning_rate: rate,
    });
    println!("standard_proceeds: {}", comparison.standard_proceeds);
    println!("bundle_total: {}", comparison.bundle_total);
    match &comparison.finding {
        Some(finding) => {
            print!("{}", findings_text(std::slice::from_ref(finding)));
            Ok(EXIT_FINDINGS)
        }
        None => {
            println!("no findings: bundle exceeds the standard-auction counterfactual");
            Ok(EXIT_OK)
        }
    }
}

fn cmd_gtn(path: &std::path::Path, preset: Option<DiseconomyPreset>) -> Result<u8> {
    let bytes = read_file(path)?;
    let statement = match load_margins(&bytes) {
        Ok(s) => s,
        Err(e) => {
            print_load_error(&e);
            return Ok(EXIT_ERROR);
        }
    };
    let gross = margin_statement_gross(&statement);
    let net: Option<MarginStatement> = match statement.basis {
        Basis::Net => Some(statement.clone()),
        Basis::Gross => None,
    };

    let row = |label: &str, net_value: Option<String>, gross_value: String| match net_value {
        Some(n) => println!("{label:<18} {n:>8} {gross_value:>8}"),
        None => println!("{label:<18} {:>8} {gross_value:>8}", "-"),
    };
    println!("{:<18} {:>8} {:>8}", "", "net", "gross");
    row(
        "net_sales",
        net.as_ref().map(|_| "1.0000".to_string()),
        gross.sales_share().format_dp(4),
    );
    row(
        "cost_of_sales",
        net.as_ref().map(|s| s.cost_of_sales.to_string()),
        gross.cost_of_sales.to_string(),
    );
    row(
        "marketing",
        net.as_ref().map(|s| s.marketing.to_string()),
        gross.marketing.to_string(),
    );
    row(
        "contribution",
        net.as_ref().map(|s| s.contribution_margin().format_dp(4)),
        gross.contribution_margin().format_dp(4),
    );
    row(
        "max_unit_rebate",
        net.as_ref().map(|s| s.max_unit_rebate().format_dp(4)),
        gross.max_unit_rebate().format_dp(4),
    );
    println!("{:<18} {:>8}", "gtn_rebate_rate", statement.gtn_rebate_rate);

    if let Some(preset) = preset {
        let estimate = derive_bid_down_limit(&gross, &preset.fractions())
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        println!("preset: {}", preset.label());
        println!("production_loss: {}", estimate.production_loss);
        println!("marketing_loss: {}", estimate.marketing_loss);
        println!("bid_down_limit: {}", estimate.bid_down_limit);
    }
    Ok(EXIT_OK)
}
