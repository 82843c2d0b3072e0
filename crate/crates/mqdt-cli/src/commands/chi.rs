use std::fmt::Write as _;

use clap::Args;
use mqdt::longrange::{scaled_energy, ChiResult};
use mqdt::mqdt::partition_channels;
use mqdt::{ChannelLabel, ChannelSpace};

use crate::config::RunConfig;
use crate::context::Context;
use crate::error::CliError;
use crate::output::{exact, Sink};

#[derive(Debug, Args)]
pub struct ChiArgs {
    /// closed-channel gaps in GHz, comma separated
    #[arg(long, value_delimiter = ',')]
    pub gaps: Option<Vec<f64>>,
    /// use the closed channels of this entrance channel instead of --gaps
    #[arg(long)]
    pub entrance: Option<String>,
    /// first tune the phase offset so that chi at this gap hits --target
    #[arg(long)]
    pub calibrate_gap: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<f64>,
}

struct Gap {
    label: Option<ChannelLabel>,
    gap_ghz: f64,
}

fn gaps(ctx: &Context, cfg: &RunConfig, args: &ChiArgs) -> Result<Vec<Gap>, CliError> {
    let c = cfg.chi.clone().unwrap_or_default();
    if let Some(list) = args.gaps.clone().or(if args.entrance.is_some() { None } else { c.gaps_ghz }) {
        return Ok(list.into_iter().map(|gap_ghz| Gap { label: None, gap_ghz }).collect());
    }
    let text = args.entrance.clone().or(c.entrance).ok_or(CliError::Missing { key: "chi.gaps_ghz", flag: "gaps" })?;
    let entrance: ChannelLabel = text.parse().map_err(|e| CliError::config("chi.entrance", format!("{e}")))?;
    let space = ChannelSpace::build(&ctx.pair, entrance.projection())?;
    let part = partition_channels(&space, &entrance)
        .map_err(|source| CliError::Scattering { context: format!("entrance {entrance}"), source })?;
    let e0 = space.frag[part.entrance].threshold_ghz;
    Ok(part
        .closed
        .iter()
        .map(|&i| Gap { label: Some(space.frag[i].label), gap_ghz: space.frag[i].threshold_ghz - e0 })
        .collect())
}

pub fn run(ctx: &Context, cfg: &RunConfig, args: &ChiArgs, out: &Sink) -> Result<(), CliError> {
    let c = cfg.chi.clone().unwrap_or_default();
    let mut solver = ctx.solver;
    let mut text = String::new();
    if let Some(gap) = args.calibrate_gap.or(c.calibrate_gap_ghz) {
        let target = crate::commands::required(args.target, c.calibrate_target, "chi.calibrate_target", "target")?;
        let e = scaled_energy(gap, &ctx.scales)?;
        let offset = solver.calibrate(e, target, 0.5)?;
        solver = solver.with_phase_offset(offset);
        let _ = writeln!(text, "# calibrated phase offset {offset:.12e} rad (chi = {target} at {gap} GHz)");
    }
    let gaps = gaps(ctx, cfg, args)?;
    let mut rows: Vec<(Gap, f64, ChiResult)> = Vec::new();
    for g in gaps {
        let e = scaled_energy(g.gap_ghz, &ctx.scales)?;
        let r = solver.chi_at_gap(g.gap_ghz, &ctx.scales)?;
        rows.push((g, e.value, r));
    }
    let _ = writeln!(text, "{:<16} {:>10} {:>14} {:>11} {:>8}", "channel", "gap_GHz", "eps_scaled", "chi", "r_match");
    for (g, eps, r) in &rows {
        let label = g.label.map(|l| l.to_string()).unwrap_or_else(|| "-".into());
        let _ = writeln!(text, "{label:<16} {:>10.4} {:>14.2} {:>11.4} {:>8.3}", g.gap_ghz, eps, r.chi, r.r_match);
    }
    out.table(&text);
    out.csv(|w| {
        let mut o = csv::Writer::from_writer(w);
        o.write_record(["channel", "gap_ghz", "scaled_energy", "chi", "r_match", "matching_drift", "wronskian_drift"])?;
        for (g, eps, r) in &rows {
            o.write_record([
                g.label.map(|l| l.to_string()).unwrap_or_default(),
                exact(g.gap_ghz),
                exact(*eps),
                exact(r.chi),
                exact(r.r_match),
                exact(r.matching_drift),
                exact(r.wronskian_drift),
            ])?;
        }
        o.flush().map_err(|e| CliError::Csv(e.into()))
    })
}
