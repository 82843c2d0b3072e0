use std::fmt::Write as _;

use clap::Args;
use mqdt::trap::{a_to_energy, perturbative_slope, pseudopotential_validity, TrapGeometry, Verdict};

use super::required;
use crate::config::RunConfig;
use crate::context::Context;
use crate::error::CliError;
use crate::output::{exact, Sink};

#[derive(Debug, Args)]
pub struct TrapArgs {
    /// radial trap frequency, kHz
    #[arg(long)]
    pub radial: Option<f64>,
    /// axial trap frequency, kHz
    #[arg(long)]
    pub axial: Option<f64>,
    /// scattering lengths in a0, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<f64>>,
    /// 0 is the branch continuous with the non-interacting ground state
    #[arg(long)]
    pub branch: Option<u32>,
    /// largest allowed |eta - round(eta)| for the aspect ratio
    #[arg(long)]
    pub anisotropy_gate: Option<f64>,
}

pub fn run(ctx: &Context, cfg: &RunConfig, args: &TrapArgs, out: &Sink) -> Result<(), CliError> {
    let c = cfg.trap.clone().unwrap_or_default();
    let f_r = required(args.radial, c.radial_khz, "trap.radial_khz", "radial")?;
    let f_ax = required(args.axial, c.axial_khz, "trap.axial_khz", "axial")?;
    let lengths = required(args.a.clone(), c.a_a0, "trap.a_a0", "a")?;
    let branch = args.branch.or(c.branch).unwrap_or(0);
    let two_pi_khz = 2.0 * std::f64::consts::PI * 1e3;
    let mu = ctx.pair.reduced_mass_u();
    let trap = match args.anisotropy_gate.or(c.anisotropy_gate) {
        Some(g) => TrapGeometry::with_gate(two_pi_khz * f_r, two_pi_khz * f_ax, mu, &ctx.dataset.constants, g)?,
        None => TrapGeometry::from_khz(f_r, f_ax, mu, &ctx.dataset.constants)?,
    };
    let v = pseudopotential_validity(&trap, ctx.scales.beta6_a0);
    if v.verdict == Verdict::Warning {
        eprintln!("warning beta6/d_r={:.3}: pseudopotential near its limit", v.ratio);
    }
    let mut text = String::new();
    let _ = writeln!(
        text,
        "# n = {}  eta = {:.6}  d_r = {:.1} a0  d_ax = {:.1} a0",
        trap.n, trap.eta, trap.d_r_a0, trap.d_ax_a0
    );
    let _ = writeln!(
        text,
        "# beta6/d_r = {:.4} ({:?})  slope at a=0: {:.6e} per a0",
        v.ratio,
        v.verdict,
        perturbative_slope(&trap)
    );
    let _ = writeln!(text, "{:>10} {:>6} {:>14} {:>12}", "a_a0", "branch", "eps_hw_ax", "E_kHz");
    let mut rows = Vec::new();
    for a in lengths {
        let e = a_to_energy(a, &trap, branch)?;
        let _ = writeln!(text, "{a:>10.1} {:>6} {:>14.6} {:>12.2}", e.branch, e.value, e.khz(&trap));
        rows.push((a, e.branch, e.value, e.khz(&trap)));
    }
    out.table(&text);
    out.csv(|w| {
        let mut o = csv::Writer::from_writer(w);
        o.write_record(["a_a0", "branch", "eps_hbar_omega_ax", "energy_khz"])?;
        for (a, b, eps, khz) in &rows {
            o.write_record([exact(*a), b.to_string(), exact(*eps), exact(*khz)])?;
        }
        o.flush().map_err(|e| CliError::Csv(e.into()))
    })
}
