use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use wbr_core::agents::{
    lambda_sweep, pgg_selfplay, regularized_best_response, write_sweep_csv, Opponents,
    PenaltyConfig, PriorSchedule, SweepConfig,
};
use wbr_core::analysis::{
    change_stats, metric_table, read_panel, svg, synth_panel, ContributionPanel, Generator,
    MetricKind, MetricOptions, MetricPrior, Scope,
};
use wbr_core::info::{make_prior, serialize_extended, InfoCostKind, OtConfig, PriorKind};
use wbr_core::ot::{ActionDistribution, ActionSpace};

use crate::settings::{
    BestResponseSettings, Format, MetricsSettings, SimulateSettings, SweepSettings, SynthSettings,
};
use crate::CliError;

fn parse<T>(what: &str, s: &str) -> Result<T, CliError>
where
    T: std::str::FromStr<Err = wbr_core::Error>,
{
    s.parse()
        .map_err(|e: wbr_core::Error| CliError::Validation(format!("{what}: {e}")))
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: &Path, body: &str, log: &mut dyn Write) -> Result<(), CliError> {
    fs::write(path, body).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    writeln!(log, "wrote {}", path.display())?;
    Ok(())
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T], format: Format, log: &mut dyn Write) -> Result<(), CliError> {
    let body = match format {
        Format::Csv => {
            let mut w = csv_writer();
            for row in rows {
                w.serialize(row).map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?)
                .expect("csv output is utf-8")
        }
        Format::Json => json(rows)?,
    };
    write_file(path, &body, log)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn parse_scope(s: &str) -> Result<Scope, CliError> {
    match s.split_once(':') {
        None if s == "pooled" => Ok(Scope::Pooled),
        Some(("subject", id)) if !id.is_empty() => Ok(Scope::Subject(id.to_string())),
        _ => Err(CliError::Validation(format!(
            "scope: expected pooled or subject:<id>, got {s:?}"
        ))),
    }
}

fn input_panel(s: &MetricsSettings) -> Result<ContributionPanel, CliError> {
    match &s.panel {
        Some(path) => {
            let file = File::open(path)
                .map_err(|e| CliError::Validation(format!("cannot open panel {}: {e}", path.display())))?;
            read_panel(file, s.endowment).map_err(|e| match e {
                wbr_core::Error::Io(_) => CliError::from(e),
                other => CliError::Validation(format!("{}: {other}", path.display())),
            })
        }
        None => {
            let generator: Generator = parse("synth", &s.synth)?;
            Ok(synth_panel(generator, s.subjects, s.rounds, s.seed)?)
        }
    }
}

pub fn metrics(s: &MetricsSettings, log: &mut dyn Write) -> Result<(), CliError> {
    let panel = input_panel(s)?;
    let opts = MetricOptions {
        scope: parse_scope(&s.scope)?,
        priors: s
            .priors
            .iter()
            .map(|p| parse::<MetricPrior>("priors", p))
            .collect::<Result<_, _>>()?,
        metrics: s
            .metrics
            .iter()
            .map(|m| parse::<MetricKind>("metrics", m))
            .collect::<Result<_, _>>()?,
        include_kl: s.include_kl,
        kl_star_epsilon: s.kl_star_epsilon,
        ot: parse::<OtConfig>("ot", &s.ot)?,
    };
    let report = metric_table(&panel, &opts)?;
    prepare_dir(&s.out)?;
    let path = s.out.join(format!("metrics.{}", s.format.extension()));
    let body = match s.format {
        Format::Csv => report.to_csv_string(),
        Format::Json => report.to_json() + "\n",
    };
    write_file(&path, &body, log)?;
    if s.svg {
        write_file(&s.out.join("metrics.svg"), &svg::metric_grid_svg(&report), log)?;
    }
    if s.changes {
        let stats = change_stats(&panel)?;
        let dir = s.out.join("changes");
        for p in stats.write_csv_bundle(&dir)? {
            writeln!(log, "wrote {}", p.display())?;
        }
        if s.svg {
            write_file(&dir.join("change_histogram.svg"), &svg::change_histogram_svg(&stats), log)?;
            write_file(&dir.join("abs_change_histogram.svg"), &svg::abs_change_histogram_svg(&stats), log)?;
            write_file(&dir.join("pairwise_changes.svg"), &svg::pairwise_heatmap_svg(&stats), log)?;
        }
        stats.write_summary(&mut *log)?;
    }
    Ok(())
}

pub fn sweep(s: &SweepSettings, log: &mut dyn Write) -> Result<(), CliError> {
    let cfg = SweepConfig {
        game: s.game.clone(),
        cost: parse("cost", &s.cost)?,
        lambdas: s.lambdas.clone(),
        prior: parse("prior", &s.prior)?,
        schedule: parse("schedule", &s.schedule)?,
        seeds: s.seeds.clone(),
        episodes: s.episodes,
    };
    let rows = lambda_sweep(&cfg)?;
    prepare_dir(&s.out)?;
    let path = s.out.join(format!("sweep.{}", s.format.extension()));
    match s.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf)?;
            write_file(&path, &String::from_utf8(buf).expect("csv output is utf-8"), log)?;
        }
        Format::Json => write_file(&path, &json(&rows)?, log)?,
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BestResponseOutput<'a> {
    cost: String,
    lambda: f64,
    prior: &'a ActionDistribution,
    policy: &'a ActionDistribution,
    objective: f64,
    #[serde(serialize_with = "serialize_extended")]
    info_cost: f64,
    optimum_outside_support: bool,
}

fn read_utilities(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read utilities {}: {e}", path.display())))?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| CliError::Validation(format!("utilities {}: {t:?}: {e}", path.display())))
        })
        .collect()
}

pub fn bestresponse(s: &BestResponseSettings, log: &mut dyn Write) -> Result<(), CliError> {
    let utilities = match &s.utilities_file {
        Some(path) => read_utilities(path)?,
        None => s.utilities.clone(),
    };
    if utilities.is_empty() {
        return Err(CliError::Validation("no utilities given".into()));
    }
    let cost: InfoCostKind = parse("cost", &s.cost)?;
    let prior_kind: PriorKind = parse("prior", &s.prior)?;
    let prior = make_prior(&prior_kind, &ActionSpace::new(utilities.len())?, None)?;
    let cfg = PenaltyConfig::new(s.lambda, cost).with_prior(prior_kind, PriorSchedule::Fixed);
    let br = regularized_best_response(&utilities, &prior, &cfg)?;
    let body = json(&BestResponseOutput {
        cost: cost.to_string(),
        lambda: s.lambda,
        prior: &prior,
        policy: &br.policy,
        objective: br.objective,
        info_cost: br.info_cost,
        optimum_outside_support: br.optimum_outside_support,
    })?;
    log.write_all(body.as_bytes())?;
    if let Some(dir) = &s.out {
        prepare_dir(dir)?;
        let path = dir.join("bestresponse.json");
        fs::write(&path, &body)?;
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PolicyRow {
    episode: usize,
    round: usize,
    player: usize,
    mean_contribution: f64,
    #[serde(serialize_with = "serialize_extended")]
    info_cost: f64,
    objective: f64,
}

pub fn simulate(s: &SimulateSettings, log: &mut dyn Write) -> Result<(), CliError> {
    let cost: InfoCostKind = parse("cost", &s.cost)?;
    let prior: PriorKind = parse("prior", &s.prior)?;
    let schedule: PriorSchedule = parse("schedule", &s.schedule)?;
    s.game.validate()?;
    let opponents = if s.opponents == "selfplay" {
        Opponents::SelfPlay
    } else {
        let kind: PriorKind = parse("opponents", &s.opponents)?;
        let space = ActionSpace::new(s.game.action_count())?;
        let pi = make_prior(&kind, &space, None)?;
        Opponents::Fixed(vec![pi; s.game.group_size.saturating_sub(1)])
    };
    let penalty = PenaltyConfig::new(s.lambda, cost).with_prior(prior, schedule);
    let run = pgg_selfplay(&s.game, &penalty, &opponents, s.episodes, s.seed)?;
    prepare_dir(&s.out)?;
    let ext = s.format.extension();
    write_rows(&s.out.join(format!("history.{ext}")), &run.history.records, s.format, log)?;
    let rows: Vec<PolicyRow> = run
        .rounds
        .iter()
        .map(|r| PolicyRow {
            episode: r.episode,
            round: r.round,
            player: r.player,
            mean_contribution: r.mean_contribution,
            info_cost: r.info_cost,
            objective: r.objective,
        })
        .collect();
    write_rows(&s.out.join(format!("policies.{ext}")), &rows, s.format, log)?;
    Ok(())
}

pub fn synth(s: &SynthSettings, log: &mut dyn Write) -> Result<(), CliError> {
    let generator: Generator = parse("generator", &s.generator)?;
    let panel = synth_panel(generator, s.subjects, s.rounds, s.seed)?;
    prepare_dir(&s.out)?;
    let path: PathBuf = s.out.join(format!("panel.{}", s.format.extension()));
    let body = match s.format {
        Format::Csv => panel.to_csv_string(),
        Format::Json => json(panel.records())?,
    };
    write_file(&path, &body, log)
}
