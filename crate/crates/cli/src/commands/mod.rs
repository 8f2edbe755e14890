pub mod fit_tls;
pub mod level;
pub mod oracle;
pub mod pointer;
pub mod rate;
pub mod spectrum;
pub mod sweep;

use crate::config::{Resolved, ResolvedDrive};
use crate::CliError;
use numsplit_core::device::DriveSpec;
use numsplit_core::pointer::{solve_pointer_states, PointerSolution};

/// Resolve the configured [drive] into a solved pointer state.
pub fn solved_drive(resolved: &Resolved) -> Result<(DriveSpec, PointerSolution), CliError> {
    let drive_cfg: &ResolvedDrive = resolved
        .drive
        .as_ref()
        .ok_or_else(|| CliError::Config(vec!["this command needs a [drive] section".into()]))?;
    let drive = resolved.drive_spec(drive_cfg)?;
    let sol = solve_pointer_states(&resolved.device, &drive)?;
    Ok((drive, sol))
}
