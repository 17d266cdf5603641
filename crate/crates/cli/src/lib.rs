//! Manifest-driven front end for the `phwc` toolkit: residual sweeps, the
//! bundled regression suite and tension flows, reported as JSON or tables.

pub mod checks;
pub mod error;
pub mod flowcmd;
pub mod manifest;
pub mod report;
pub mod verify;

pub use checks::{run_checks, CheckKind, CheckSpec, Expect};
pub use error::{CliError, CliResult};
pub use manifest::{parse_manifest, Manifest};
pub use report::{emit_report, read_report, Format, Report};
pub use verify::verify_paper;

pub const EXAMPLE1: &str = include_str!("../manifests/example1.json");
pub const EXAMPLE2: &str = include_str!("../manifests/example2.json");
pub const HEAT: &str = include_str!("../manifests/heat.json");

pub const BUILTIN_MANIFESTS: [(&str, &str); 3] = [
    ("example1", EXAMPLE1),
    ("example2", EXAMPLE2),
    ("heat", HEAT),
];

/// Manifest text for `arg`: a file path, or the name of a builtin manifest
/// when no such file exists.
pub fn load_manifest_text(arg: &str) -> CliResult<String> {
    match std::fs::read_to_string(arg) {
        Ok(text) => Ok(text),
        Err(e) => match BUILTIN_MANIFESTS.iter().find(|(name, _)| *name == arg) {
            Some((_, text)) => Ok(text.to_string()),
            None => Err(CliError::Io(e)),
        },
    }
}

/// Applies `check=value` overrides to the matching manifest checks.
pub fn apply_tolerances(checks: &mut [CheckSpec], overrides: &[String]) -> CliResult<()> {
    for o in overrides {
        let (name, value) = o.split_once('=').ok_or_else(|| {
            CliError::validation("--tol", format!("expected check=value, got '{o}'"))
        })?;
        let kind = CheckKind::from_name(name)
            .ok_or_else(|| CliError::validation("--tol", format!("unknown check '{name}'")))?;
        let tol: f64 = value
            .parse()
            .ok()
            .filter(|t: &f64| *t >= 0.0)
            .ok_or_else(|| CliError::validation("--tol", format!("bad tolerance '{value}'")))?;
        let mut hit = false;
        for c in checks.iter_mut().filter(|c| c.kind == kind) {
            c.tol = tol;
            hit = true;
        }
        if !hit {
            return Err(CliError::validation(
                "--tol",
                format!("the manifest does not run check '{name}'"),
            ));
        }
    }
    Ok(())
}
