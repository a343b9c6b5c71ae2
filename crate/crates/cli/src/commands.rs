use std::path::Path;

use miplab::agents::generate_reports;
use miplab::lab::{run_suite, sweep_bts_n, sweep_fmi_t, SuiteConfig, SuiteId, SuiteVerdict, SweepRow};
use miplab::mechanisms::{self, BtsOptions};
use miplab::schema::{BtsProfileFile, JointFile, ReportFile, ScenarioFile};
use miplab::{
    ConvexGenerator, ExtendedReal, Measure, Pairing, PaymentReport, ReportMatrix, RngSeed, Scenario, ScoringRule,
};
use serde::Serialize;

use crate::output::{error_record, load, write_csv_with_meta, write_json, CliResult, Failure, RunConfig};
use crate::{Cli, Command, Format, MeasureArgs, MechanismArgs, MechanismName, SweepArgs, SweepKind, VerifyArgs};

pub fn run(cli: &Cli) -> u8 {
    let result = match &cli.command {
        Command::Measure(args) => measure(&cli.out, args),
        Command::Mechanism(args) => mechanism(&cli.out, args),
        Command::Verify(args) => verify(&cli.out, args),
        Command::Sweep(args) => sweep(&cli.out, args),
    };
    result.unwrap_or_else(|f| {
        eprintln!("error: {}", f.message);
        f.code
    })
}

fn parse<T: std::str::FromStr<Err = miplab::Error>>(value: &str) -> CliResult<T> {
    value.parse().map_err(|e: miplab::Error| Failure::config(e.to_string()))
}

#[derive(Serialize)]
struct MeasureRecord<'a> {
    measure: String,
    value: ExtendedReal,
    units: &'static str,
    conditional: bool,
    run_config: &'a RunConfig,
}

fn measure(out: &Path, args: &MeasureArgs) -> CliResult<u8> {
    let measure: Measure = parse(&args.mi)?;
    let mut config = RunConfig::new("measure");
    config.measure = Some(measure.name());
    config.conditional = Some(args.conditional);
    let file = load(&args.joint, &mut config, JointFile::from_json)?;
    let expected_rank = if args.conditional { 3 } else { 2 };
    if file.joint.rank() != expected_rank {
        return Err(Failure::config(format!(
            "{}: expected a rank-{expected_rank} joint, found rank {}",
            args.joint.display(),
            file.joint.rank()
        )));
    }
    let value =
        if args.conditional { measure.conditional(&file.joint) } else { measure.mutual_information(&file.joint) };
    match value {
        Ok(value) => {
            let record = MeasureRecord {
                measure: measure.name(),
                value,
                units: measure.units(),
                conditional: args.conditional,
                run_config: &config,
            };
            write_json(out, "measure.json", &record)?;
            eprintln!("{} = {value}", measure.name());
            Ok(0)
        }
        Err(e) => error_record(out, "measure.json", &config, &e),
    }
}

#[derive(Serialize)]
struct PaymentFile<'a> {
    run_config: &'a RunConfig,
    report: &'a PaymentReport,
}

/// Where a mechanism's reports come from.
enum Source {
    Exact(Scenario),
    Reports(ReportMatrix),
    Sample(Scenario, usize),
}

fn source(args: &MechanismArgs, config: &mut RunConfig) -> CliResult<Source> {
    if let Some(path) = &args.reports {
        return Ok(Source::Reports(load(path, config, ReportFile::from_json)?.reports));
    }
    let scenario = scenario(args, config)?;
    if args.exact {
        return Ok(Source::Exact(scenario));
    }
    match args.questions {
        Some(t) => Ok(Source::Sample(scenario, t)),
        None => Err(Failure::config("one of --exact, --questions or --reports is required")),
    }
}

fn scenario(args: &MechanismArgs, config: &mut RunConfig) -> CliResult<Scenario> {
    let path = args.scenario.as_ref().ok_or_else(|| Failure::config("--scenario is required"))?;
    Ok(load(path, config, ScenarioFile::from_json)?.scenario)
}

fn sampled(scenario: &Scenario, t: usize, seed: RngSeed) -> miplab::Result<ReportMatrix> {
    generate_reports(scenario, t, seed)
}

fn mechanism(out: &Path, args: &MechanismArgs) -> CliResult<u8> {
    let pairing: Pairing = parse(&args.pairing)?;
    let seed = RngSeed(args.seed);
    let mut config = RunConfig::new("mechanism");
    config.mechanism = Some(args.mechanism);
    config.exact = Some(args.exact);
    config.questions = args.questions;
    config.seed = Some(args.seed);
    config.pairing = Some(args.pairing.clone());
    config.format = Some(args.format);

    let result: miplab::Result<PaymentReport> = match args.mechanism {
        MechanismName::Fmi => {
            let f: ConvexGenerator = parse(args.measure.as_deref().unwrap_or("tvd"))?;
            config.measure = Some(f.name().to_string());
            match source(args, &mut config)? {
                Source::Exact(s) => mechanisms::mip_expected_payments(&s, Measure::F(f)),
                Source::Reports(r) => mechanisms::fmi_mechanism_payments(&r, f, pairing, seed),
                Source::Sample(s, t) => {
                    sampled(&s, t, seed).and_then(|r| mechanisms::fmi_mechanism_payments(&r, f, pairing, seed))
                }
            }
        }
        MechanismName::Bmi => {
            let rule: ScoringRule = parse(args.measure.as_deref().unwrap_or("log"))?;
            config.measure = Some(rule.name().to_string());
            match source(args, &mut config)? {
                Source::Exact(s) => mechanisms::mip_expected_payments(&s, Measure::Bregman(rule)),
                Source::Reports(r) => mechanisms::bmi_mechanism_payments(&r, rule, pairing, seed),
                Source::Sample(s, t) => {
                    sampled(&s, t, seed).and_then(|r| mechanisms::bmi_mechanism_payments(&r, rule, pairing, seed))
                }
            }
        }
        MechanismName::Md | MechanismName::Ca => {
            let md = args.mechanism == MechanismName::Md;
            config.d = Some(args.d);
            let realized = |r: &ReportMatrix| {
                if md {
                    mechanisms::md_payments(r, args.d, pairing, seed)
                } else {
                    mechanisms::ca_payments(r, args.d, pairing, seed)
                }
            };
            match source(args, &mut config)? {
                Source::Exact(s) if md => mechanisms::md_expected_payments(&s),
                Source::Exact(s) => mechanisms::ca_expected_payments(&s),
                Source::Reports(r) => realized(&r),
                Source::Sample(s, t) => sampled(&s, t, seed).and_then(|r| realized(&r)),
            }
        }
        MechanismName::Sppm => {
            let rule: ScoringRule = parse(args.measure.as_deref().unwrap_or("log"))?;
            config.measure = Some(rule.name().to_string());
            let s = scenario(args, &mut config)?;
            let known = s.prior.pair_joint(0, 1);
            if args.exact {
                known.and_then(|q| mechanisms::sppm_expected_payments(&s, &q, rule))
            } else {
                known.and_then(|q| {
                    let reports = sampled(&s, 1, seed)?;
                    let signals: Vec<usize> = (0..reports.n_agents())
                        .map(|i| reports.get(i, 0).expect("sampled reports are complete"))
                        .collect();
                    mechanisms::sppm_payments(&signals, &q, rule)
                })
            }
        }
        MechanismName::Bts => {
            config.alpha = Some(args.alpha);
            if let Some(path) = &args.bts_profile {
                config.smoothing = args.smoothing;
                let profile = load(path, &mut config, BtsProfileFile::from_json)?.profile;
                let options = BtsOptions { alpha: args.alpha, pairing, seed, smoothing: args.smoothing };
                mechanisms::bts_payments(&profile, &options)
            } else if args.exact {
                let measure: Measure = parse(args.measure.as_deref().unwrap_or("kl"))?;
                config.measure = Some(measure.name());
                let s = scenario(args, &mut config)?;
                mechanisms::bts_expected_payments(&s, args.alpha, measure)
            } else {
                return Err(Failure::config("bts needs --bts-profile or --exact with a world-model scenario"));
            }
        }
    };

    let name = match args.format {
        Format::Json => "payments.json",
        Format::Csv => "payments.csv",
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => return error_record(out, "payments.error.json", &config, &e),
    };
    match args.format {
        Format::Json => {
            write_json(out, name, &PaymentFile { run_config: &config, report: &report })?;
        }
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf).map_err(|e| Failure::config(e.to_string()))?;
            write_csv_with_meta(out, name, &buf, &config)?;
        }
    }
    for a in &report.agents {
        eprintln!("agent {}: {}", a.agent, a.payment);
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(0)
}

#[derive(Serialize)]
struct VerdictFile<'a> {
    #[serde(flatten)]
    verdict: &'a SuiteVerdict,
    run_config: &'a RunConfig,
}

fn verify(out: &Path, args: &VerifyArgs) -> CliResult<u8> {
    let suite: SuiteId = parse(&args.suite)?;
    let mut suite_config = SuiteConfig::new(suite).with_seed(args.seed);
    if let Some(n) = args.instances {
        suite_config.instances = n;
    }
    if let Some(sizes) = &args.alphabet_sizes {
        suite_config.alphabet_sizes = sizes.clone();
    }
    if let Some(counts) = &args.agent_counts {
        suite_config.agent_counts = counts.clone();
    }
    suite_config.validate().map_err(|e| Failure::config(e.to_string()))?;
    let mut config = RunConfig::new("verify");
    config.suite = Some(suite.name().to_string());
    config.seed = Some(args.seed);
    let verdict = run_suite(&suite_config).map_err(|e| Failure::config(e.to_string()))?;
    write_json(out, &format!("verdict-{suite}.json"), &VerdictFile { verdict: &verdict, run_config: &config })?;
    eprintln!(
        "{suite}: {} instances, {} violations, {}",
        verdict.instances,
        verdict.violation_count,
        if verdict.pass { "pass" } else { "FAIL" }
    );
    for v in verdict.violations.iter().take(5) {
        eprintln!("  seed {:?} {}: {}", v.seed, v.kind, v.detail);
    }
    Ok(if verdict.pass { 0 } else { 1 })
}

fn parse_grid(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.fract() == 0.0 && *v >= 0.0 && *v <= usize::MAX as f64)
                .map(|v| v as usize)
                .ok_or_else(|| Failure::config(format!("grid value {s:?} is not a non-negative integer")))
        })
        .collect()
}

fn sweep(out: &Path, args: &SweepArgs) -> CliResult<u8> {
    let grid = parse_grid(&args.grid)?;
    let mut config = RunConfig::new("sweep");
    config.kind = Some(args.kind);
    config.grid = Some(grid.clone());
    config.seeds = Some(args.seeds);
    config.seed = Some(args.seed);
    let (name, rows) = match args.kind {
        SweepKind::FmiT => ("sweep-fmi-t.csv", sweep_fmi_t(&grid, args.seeds, RngSeed(args.seed))),
        SweepKind::BtsN => ("sweep-bts-n.csv", sweep_bts_n(&grid, args.seeds, RngSeed(args.seed))),
    };
    let rows: Vec<SweepRow> = match rows {
        Ok(r) => r,
        Err(e) => return error_record(out, &format!("{name}.error.json"), &config, &e),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::config(format!("csv output failed: {e}"));
    w.write_record(["grid_point", "seed", "metric", "value"]).map_err(io)?;
    for r in &rows {
        w.write_record([r.grid_point.to_string(), r.seed.to_string(), r.metric.clone(), r.value.to_string()])
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::config(format!("csv output failed: {e}")))?;
    write_csv_with_meta(out, name, &bytes, &config)?;
    Ok(0)
}
