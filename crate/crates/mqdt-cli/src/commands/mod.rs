pub mod channels;
pub mod chi;
pub mod scattering;
pub mod shift;
pub mod trap;

use crate::error::CliError;

/// Flag value if given, else config value, else a missing-setting error.
pub fn required<T>(
    flag: Option<T>,
    config: Option<T>,
    key: &'static str,
    flag_name: &'static str,
) -> Result<T, CliError> {
    flag.or(config).ok_or(CliError::Missing { key, flag: flag_name })
}
