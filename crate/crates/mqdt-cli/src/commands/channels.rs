use clap::Args;
use mqdt::{ChannelSpace, HalfInt};

use super::required;
use crate::config::RunConfig;
use crate::context::Context;
use crate::error::CliError;
use crate::output::{exact, Sink};

#[derive(Debug, Args)]
pub struct ChannelsArgs {
    /// total projection, e.g. -4 or -7/2
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<String>,
}

pub fn run(ctx: &Context, cfg: &RunConfig, args: &ChannelsArgs, out: &Sink) -> Result<(), CliError> {
    let text = required(args.m.clone(), cfg.channels.as_ref().and_then(|c| c.m.clone()), "channels.m", "m")?;
    let m: HalfInt = text.parse().map_err(|e| CliError::config("channels.m", format!("{e}")))?;
    let space = ChannelSpace::build(&ctx.pair, m)?;
    if space.is_empty() {
        return Err(CliError::config("channels.m", format!("no channels at M = {m}")));
    }
    out.table(&space.to_table());
    out.csv(|w| {
        let mut o = csv::Writer::from_writer(w);
        let mut header = vec!["channel".to_string(), "threshold_ghz".to_string()];
        header.extend(space.eigen.iter().map(|e| e.to_string()));
        o.write_record(&header)?;
        for (r, f) in space.frag.iter().enumerate() {
            let mut rec = vec![f.label.to_string(), exact(f.threshold_ghz)];
            rec.extend((0..space.len()).map(|c| exact(space.u[(r, c)])));
            o.write_record(&rec)?;
        }
        o.flush().map_err(|e| CliError::Csv(e.into()))
    })
}
