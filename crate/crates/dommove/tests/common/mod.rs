use std::path::PathBuf;
use std::process::Command;

/// Command template for the bundled LP solver, or `None` when the Python
/// toolchain is unavailable in this environment.
pub fn external_command() -> Option<String> {
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../tools/lp_solve.py")
        .canonicalize()
        .ok()?;
    let probe = Command::new("python3")
        .args(["-c", "import scipy.optimize"])
        .output()
        .ok()?;
    if !probe.status.success() {
        return None;
    }
    Some(format!(
        "python3 {} {{lp_file}} {{sol_file}} {{gap}} {{time_limit}}",
        script.display()
    ))
}
