//! Physics inputs resolved from config and flags.

use mqdt::longrange::LongRangeSolver;
use mqdt::mqdt::ClassificationRule;
use mqdt::physics::{vdw_scales, Dataset};
use mqdt::{SpeciesPair, VdwScales};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::CommonArgs;

pub struct Context {
    pub dataset: Dataset,
    pub pair: SpeciesPair,
    pub scales: VdwScales,
    pub solver: LongRangeSolver,
    pub rule: ClassificationRule,
}

impl Context {
    pub fn new(cfg: &RunConfig, flags: &CommonArgs) -> Result<Self, CliError> {
        let dataset = match flags.dataset.as_ref().or(cfg.dataset.as_ref()) {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
                Dataset::from_toml_str(&text)?
            }
            None => Dataset::bundled().clone(),
        };
        let pair = match &cfg.pair {
            Some(p) => dataset.pair(&p.first, &p.second)?,
            None => dataset.pair("Rb87", "Rb85")?,
        };
        let c6 = flags.c6.or(cfg.c6_au).unwrap_or(dataset.c6_au);
        let scales = vdw_scales(c6, pair.reduced_mass_u(), &dataset.constants)?;
        let offset = flags.chi_phase_offset.or(cfg.chi_phase_offset).unwrap_or(dataset.chi_phase_offset);
        let solver = LongRangeSolver::from_dataset(&dataset).with_phase_offset(offset);
        let mut rule = ClassificationRule::default();
        if let Some(z) = cfg.reaction_zone_a0 {
            rule.reaction_zone_a0 = z;
        }
        Ok(Context { dataset, pair, scales, solver, rule })
    }
}
