use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Problem files in name order.
pub fn cases() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(golden_dir())
        .expect("golden directory")
        .map(|e| e.expect("directory entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "prob"))
        .collect();
    v.sort();
    v
}

/// `exit: <code>` followed by stdout, for the command in the `# args:` line.
pub fn run_case(path: &Path) -> String {
    let src = fs::read_to_string(path).expect("problem file");
    let args: Vec<&str> = src
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# args:"))
        .unwrap_or_else(|| panic!("{} lacks an `# args:` line", path.display()))
        .split_whitespace()
        .collect();
    let (command, flags) = args.split_first().expect("a command");
    let out = Command::new(env!("CARGO_BIN_EXE_varinv"))
        .arg(command)
        .arg(path)
        .args(flags)
        .output()
        .expect("run varinv");
    let code = out.status.code().map_or("signal".to_string(), |c| c.to_string());
    format!("exit: {code}\n{}", String::from_utf8_lossy(&out.stdout))
}

#[allow(dead_code)]
pub fn expected_path(case: &Path) -> PathBuf {
    case.with_extension("expected")
}
