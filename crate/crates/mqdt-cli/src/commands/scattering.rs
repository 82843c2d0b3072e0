use std::fmt::Write as _;
use std::io::Write;

use clap::Args;
use mqdt::mqdt::{channel_scattering_length, ChiOrigin, ChiSource, ScatteringReport, ScatteringSetup};
use mqdt::{ChannelLabel, DefectClass, DefectSet, EigenLabel};

use crate::config::{RowConfig, RunConfig};
use crate::context::Context;
use crate::error::CliError;
use crate::output::{exact, opt_exact, split_assignment, Sink};

#[derive(Debug, Args)]
pub struct ScatteringArgs {
    /// entrance channel, e.g. "(1,-1;3,-3)"
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu_s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu_t: Option<f64>,
    /// triplet defect of the energy-sensitive eigenchannels
    #[arg(long, allow_hyphen_values = true)]
    pub mu_t_es: Option<f64>,
    /// closed-channel chi, LABEL=VALUE (repeatable)
    #[arg(long = "chi", allow_hyphen_values = true)]
    pub chi: Vec<String>,
    /// eigenchannel class, LABEL=EI|ES (repeatable)
    #[arg(long = "class")]
    pub class: Vec<String>,
}

struct Row {
    setup: ScatteringSetup,
    chi: Vec<(ChannelLabel, f64)>,
    a_exp: Option<f64>,
    a_cc: Option<f64>,
}

fn merge(mut row: RowConfig, flags: &ScatteringArgs) -> Result<RowConfig, CliError> {
    row.channel = flags.channel.clone().or(row.channel);
    row.mu_s = flags.mu_s.or(row.mu_s);
    row.mu_t = flags.mu_t.or(row.mu_t);
    row.mu_t_es = flags.mu_t_es.or(row.mu_t_es);
    for s in &flags.chi {
        let (k, v) = split_assignment(s).map_err(|m| CliError::config("--chi", m))?;
        let v: f64 = v.parse().map_err(|_| CliError::config("--chi", format!("`{v}` is not a number")))?;
        row.chi.insert(k.to_string(), v);
    }
    for s in &flags.class {
        let (k, v) = split_assignment(s).map_err(|m| CliError::config("--class", m))?;
        row.class_overrides.insert(k.to_string(), v.to_string());
    }
    Ok(row)
}

fn resolve(ctx: &Context, idx: usize, row: RowConfig) -> Result<Row, CliError> {
    let at = |field: &str| format!("rows[{idx}].{field}");
    let need = |v: Option<f64>, field: &str| v.ok_or_else(|| CliError::config(at(field), "missing value"));
    let channel_text = row.channel.ok_or_else(|| CliError::config(at("channel"), "missing value"))?;
    let entrance: ChannelLabel = channel_text.parse().map_err(|e| CliError::config(at("channel"), format!("{e}")))?;
    let defects = DefectSet::new(need(row.mu_s, "mu_s")?, need(row.mu_t, "mu_t")?, row.mu_t_es)
        .map_err(|e| CliError::config(at("mu"), e.to_string()))?;
    let mut chi = Vec::new();
    for (k, v) in row.chi {
        let l: ChannelLabel = k.parse().map_err(|e| CliError::config(at(&format!("chi.\"{k}\"")), format!("{e}")))?;
        chi.push((l, v));
    }
    let mut rule = ctx.rule.clone();
    for (k, v) in row.class_overrides {
        let loc = at(&format!("class_overrides.\"{k}\""));
        let l: EigenLabel = k.parse().map_err(|e| CliError::config(loc.clone(), format!("{e}")))?;
        let c: DefectClass = v.parse().map_err(|e: String| CliError::config(loc, e))?;
        rule.overrides.push((l, c));
    }
    let setup = ScatteringSetup { pair: ctx.pair.clone(), entrance, defects, rule, scales: ctx.scales };
    Ok(Row { setup, chi, a_exp: row.a_exp, a_cc: row.a_cc })
}

fn defect(x: Option<f64>) -> String {
    x.map_or("-".to_string(), |v| format!("{v:.4}"))
}

fn length(x: Option<f64>) -> String {
    x.map_or("-".to_string(), |v| format!("{v:.1}"))
}

fn render(rows: &[(Row, ScatteringReport)]) -> String {
    let mut s = format!(
        "{:<10} {:>7} {:>7} {:>7} {:>9} {:>7} {:>7}\n",
        "channel", "mu_s", "mu_t", "mu_t_ES", "a_MQDT", "a_exp", "a_CC"
    );
    for (row, rep) in rows {
        let d = &row.setup.defects;
        let _ = writeln!(
            s,
            "{:<10} {:>7} {:>7} {:>7} {:>9.1} {:>7} {:>7}",
            row.setup.entrance.short(),
            defect(Some(d.mu_s)),
            defect(Some(d.mu_t)),
            defect(d.mu_t_es),
            rep.a0,
            length(row.a_exp),
            length(row.a_cc)
        );
    }
    for (row, rep) in rows {
        let _ = writeln!(s, "\n# {} (M = {}), K_eff = {:.6}", row.setup.entrance, rep.space.m, rep.k_eff);
        for c in &rep.closed.0 {
            let origin = match c.origin {
                ChiOrigin::Configured => "configured",
                ChiOrigin::Computed => "computed",
            };
            let _ = writeln!(
                s,
                "#   closed {:<14} gap {:>8.4} GHz  chi {:>11.7}  ({origin})",
                c.channel.to_string(),
                c.gap_ghz,
                c.chi
            );
        }
        if let Some(classes) = &rep.classes {
            for ((e, c), mu) in rep.space.eigen.iter().zip(classes).zip(&rep.defects) {
                let _ = writeln!(s, "#   eigen  {:<14} {c}  mu {mu:.4}", e.to_string());
            }
        }
    }
    s
}

fn write_csv(w: &mut dyn Write, rows: &[(Row, ScatteringReport)]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["channel", "mu_s", "mu_t", "mu_t_es", "a_a0", "k_eff", "a_exp_a0", "a_cc_a0"])?;
    for (row, rep) in rows {
        let d = &row.setup.defects;
        out.write_record([
            row.setup.entrance.to_string(),
            exact(d.mu_s),
            exact(d.mu_t),
            opt_exact(d.mu_t_es),
            exact(rep.a0),
            exact(rep.k_eff),
            opt_exact(row.a_exp),
            opt_exact(row.a_cc),
        ])?;
    }
    out.flush().map_err(|e| CliError::Csv(e.into()))
}

pub fn run(ctx: &Context, cfg: &RunConfig, args: &ScatteringArgs, out: &Sink) -> Result<(), CliError> {
    let raw = if cfg.rows.is_empty() { vec![RowConfig::default()] } else { cfg.rows.clone() };
    let mut done = Vec::with_capacity(raw.len());
    for (i, r) in raw.into_iter().enumerate() {
        let row = resolve(ctx, i, merge(r, args)?)?;
        let source = ChiSource { configured: row.chi.clone(), solver: Some(&ctx.solver) };
        let rep = channel_scattering_length(&row.setup, &source)
            .map_err(|source| CliError::Scattering { context: format!("row {i} {}", row.setup.entrance), source })?;
        done.push((row, rep));
    }
    out.table(&render(&done));
    out.csv(|w| write_csv(w, &done))
}
