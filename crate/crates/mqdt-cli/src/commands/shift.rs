use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use mqdt::measurements::{read_csv, write_csv, Measurement, HEADER};
use mqdt::shift::{Atom, FitResult, Length, ShiftModel, TransitionSpec};
use mqdt::ChannelLabel;

use super::required;
use crate::config::{AtomChoice, LengthValue, RunConfig, TransitionConfig};
use crate::context::Context;
use crate::error::CliError;
use crate::output::{exact, write_file, Sink};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AtomArg {
    First,
    Second,
}

#[derive(Debug, Args)]
pub struct TransitionArgs {
    /// which atom the microwave drives
    #[arg(long, value_enum)]
    pub atom: Option<AtomArg>,
    /// collision channel before the transition, e.g. "(1,-1;3,-3)"
    #[arg(long)]
    pub initial: Option<String>,
    /// collision channel after the transition
    #[arg(long = "final")]
    pub final_: Option<String>,
    /// scattering length (a0) of the initial channel, or `unknown`
    #[arg(long, allow_hyphen_values = true)]
    pub a_initial: Option<String>,
    /// scattering length (a0) of the final channel, or `unknown`
    #[arg(long, allow_hyphen_values = true)]
    pub a_final: Option<String>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub transition: TransitionArgs,
    /// omega_r / omega_ax along the sweep
    #[arg(long)]
    pub eta: Option<f64>,
    /// axial frequencies in kHz, comma separated
    #[arg(long, value_delimiter = ',')]
    pub omega_ax: Option<Vec<f64>>,
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Gaussian noise added to each shift, kHz
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// value used for an `unknown` length when generating data
    #[arg(long, allow_hyphen_values = true)]
    pub a_true: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub transition: TransitionArgs,
    /// measurement CSV (omega_ax_khz,shift_khz[,sigma_khz])
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// sigma for rows without one, kHz
    #[arg(long)]
    pub default_sigma: Option<f64>,
    /// per-point residual CSV
    #[arg(long)]
    pub residuals: Option<PathBuf>,
}

fn parse_length(text: &str, flag: &str) -> Result<LengthValue, CliError> {
    if text.trim().eq_ignore_ascii_case("unknown") {
        return Ok(LengthValue::Word(crate::config::UnknownWord::Unknown));
    }
    text.trim()
        .parse()
        .map(LengthValue::Known)
        .map_err(|_| CliError::config(flag, format!("`{text}` is neither a number nor `unknown`")))
}

fn to_length(v: LengthValue) -> Length {
    match v {
        LengthValue::Known(a) => Length::Known(a),
        LengthValue::Word(_) => Length::Unknown,
    }
}

fn transition(
    ctx: &Context,
    cfg: Option<&TransitionConfig>,
    flags: &TransitionArgs,
) -> Result<TransitionSpec, CliError> {
    let c = cfg.cloned().unwrap_or_default();
    let atom = match flags.atom {
        Some(AtomArg::First) => Some(AtomChoice::First),
        Some(AtomArg::Second) => Some(AtomChoice::Second),
        None => c.atom,
    };
    let atom = match required(atom, None, "transition.atom", "atom")? {
        AtomChoice::First => Atom::First,
        AtomChoice::Second => Atom::Second,
    };
    let label = |flag: &Option<String>,
                 conf: Option<String>,
                 key: &'static str,
                 name: &'static str|
     -> Result<ChannelLabel, CliError> {
        let text = required(flag.clone(), conf, key, name)?;
        text.parse().map_err(|e| CliError::config(key, format!("{e}")))
    };
    let initial = label(&flags.initial, c.initial, "transition.initial", "initial")?;
    let final_ = label(&flags.final_, c.final_, "transition.final", "final")?;
    let a_i = match &flags.a_initial {
        Some(t) => Some(parse_length(t, "--a-initial")?),
        None => c.a_initial,
    };
    let a_f = match &flags.a_final {
        Some(t) => Some(parse_length(t, "--a-final")?),
        None => c.a_final,
    };
    let a_i = to_length(required(a_i, None, "transition.a_initial", "a-initial")?);
    let a_f = to_length(required(a_f, None, "transition.a_final", "a-final")?);
    Ok(TransitionSpec::new(&ctx.pair, atom, initial, final_, a_i, a_f)?)
}

fn sweep_points(cfg: &RunConfig, args: &CurveArgs) -> Result<Vec<f64>, CliError> {
    let s = cfg.sweep.clone().unwrap_or_default();
    if let Some(list) = args.omega_ax.clone().or(s.omega_ax_khz) {
        if list.is_empty() {
            return Err(CliError::config("sweep.omega_ax_khz", "empty list"));
        }
        return Ok(list);
    }
    let start = required(args.start, s.start_khz, "sweep.start_khz", "start")?;
    let stop = required(args.stop, s.stop_khz, "sweep.stop_khz", "stop")?;
    let n = required(args.points, s.points, "sweep.points", "points")?;
    if n < 2 {
        return Err(CliError::config("sweep.points", "need at least 2 points"));
    }
    Ok((0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect())
}

fn write_curve(w: &mut dyn Write, rows: &[(f64, f64)]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(&HEADER[..2])?;
    for (x, y) in rows {
        out.write_record([exact(*x), exact(*y)])?;
    }
    out.flush().map_err(|e| CliError::Csv(e.into()))
}

pub fn run_curve(ctx: &Context, cfg: &RunConfig, args: &CurveArgs, out: &Sink) -> Result<(), CliError> {
    let model = ShiftModel::new(&ctx.scales);
    let mut t = transition(ctx, cfg.transition.as_ref(), &args.transition)?;
    let eta = required(args.eta, cfg.sweep.as_ref().and_then(|s| s.eta), "sweep.eta", "eta")?;
    let w = sweep_points(cfg, args)?;
    let noise = cfg.noise.clone().unwrap_or_default();
    let sigma = args.noise_sigma.or(noise.sigma_khz);
    let a_true = args.a_true.or(noise.a_true);
    let unknown = [t.a_initial, t.a_final].iter().filter(|l| **l == Length::Unknown).count();
    if unknown > 1 {
        return Err(CliError::config("transition", "at most one length may be unknown"));
    }
    if sigma.is_some() || unknown == 1 {
        // synthetic measurements; the unknown side (or the final one) takes a_true
        if unknown == 0 {
            let a = t.a_final.value().expect("known");
            t.a_final = Length::Unknown;
            return synthesize(
                &model,
                &t,
                eta,
                &w,
                a_true.unwrap_or(a),
                sigma.unwrap_or(0.0),
                args.seed.or(noise.seed),
                out,
            );
        }
        let a = required(a_true, None, "noise.a_true", "a-true")?;
        return synthesize(&model, &t, eta, &w, a, sigma.unwrap_or(0.0), args.seed.or(noise.seed), out);
    }
    let curve = model.shift_curve(&t, &w, eta);
    let mut text =
        format!("# omega_r = {eta} omega_ax\n{:>12} {:>12} {:>11}\n", "omega_ax_kHz", "omega_r_kHz", "shift_kHz");
    let mut rows = Vec::new();
    for p in curve {
        match p.shift_khz {
            Ok(s) => {
                let _ = writeln!(text, "{:>12.3} {:>12.3} {:>11.2}", p.omega_ax_khz, p.omega_r_khz, s);
                rows.push((p.omega_ax_khz, s));
            }
            Err(e) => eprintln!("warning omega_ax_khz={} skipped: {e}", p.omega_ax_khz),
        }
    }
    out.table(&text);
    out.csv(|wr| write_curve(wr, &rows))
}

#[allow(clippy::too_many_arguments)]
fn synthesize(
    model: &ShiftModel,
    t: &TransitionSpec,
    eta: f64,
    w: &[f64],
    a_true: f64,
    sigma: f64,
    seed: Option<u64>,
    out: &Sink,
) -> Result<(), CliError> {
    let data = model.synthesize_measurements(t, eta, w, a_true, sigma, seed.unwrap_or(0))?;
    let mut text = format!("# synthetic shifts, a = {a_true} a0, noise {sigma} kHz, seed {}\n", seed.unwrap_or(0));
    let _ = writeln!(text, "{:>12} {:>11} {:>10}", "omega_ax_kHz", "shift_kHz", "sigma_kHz");
    for m in &data {
        let _ = writeln!(text, "{:>12.3} {:>11.2} {:>10.2}", m.omega_ax_khz, m.shift_khz, m.sigma_khz);
    }
    out.table(&text);
    out.csv(|wr| write_csv(wr, &data).map_err(|source| CliError::DataFile { path: "<output>".into(), source }))
}

fn render_fit(r: &FitResult, t: &TransitionSpec) -> String {
    let side = if t.a_initial == Length::Unknown { t.initial_channel } else { t.final_channel };
    format!(
        "unknown length   {side}\na_hat            {:.1} a0\nsigma_a          {:.1} a0\nchi2             {:.2}\ndof              {}\nchi2/dof         {:.2}\n",
        r.a_hat,
        r.sigma_a,
        r.chi2,
        r.dof,
        r.reduced_chi2()
    )
}

pub fn run_fit(ctx: &Context, cfg: &RunConfig, args: &FitArgs, out: &Sink) -> Result<(), CliError> {
    let model = ShiftModel::new(&ctx.scales);
    let t = transition(ctx, cfg.transition.as_ref(), &args.transition)?;
    let f = cfg.fit.clone().unwrap_or_default();
    let path = required(args.data.clone(), f.data, "fit.data", "data")?;
    let eta = required(args.eta, f.eta.or(cfg.sweep.as_ref().and_then(|s| s.eta)), "fit.eta", "eta")?;
    let file = File::open(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let data = read_csv(file, args.default_sigma.or(f.default_sigma_khz))
        .map_err(|source| CliError::DataFile { path: path.clone(), source })?;
    let r = model.fit_scattering_length(&data, &t, eta)?;
    out.table(&render_fit(&r, &t));
    out.csv(|w| {
        let mut o = csv::Writer::from_writer(w);
        o.write_record(["a_hat_a0", "sigma_a_a0", "chi2", "dof", "points"])?;
        o.write_record([exact(r.a_hat), exact(r.sigma_a), exact(r.chi2), r.dof.to_string(), data.len().to_string()])?;
        o.flush().map_err(|e| CliError::Csv(e.into()))
    })?;
    if let Some(p) = args.residuals.clone().or(f.residuals) {
        write_file(&p, |w| write_residuals(w, &data, &r))?;
    }
    Ok(())
}

fn write_residuals(w: &mut dyn Write, data: &[Measurement], r: &FitResult) -> Result<(), CliError> {
    let mut o = csv::Writer::from_writer(w);
    o.write_record(["omega_ax_khz", "shift_khz", "sigma_khz", "model_khz", "residual_khz"])?;
    for (m, res) in data.iter().zip(&r.residuals) {
        o.write_record([
            exact(m.omega_ax_khz),
            exact(m.shift_khz),
            exact(m.sigma_khz),
            exact(m.shift_khz - res),
            exact(*res),
        ])?;
    }
    o.flush().map_err(|e| CliError::Csv(e.into()))
}
