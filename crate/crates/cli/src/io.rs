use std::fmt;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use sima_core::script::AnnotatedScript;
use sima_core::{parse_script, Diagnostic, Severity};

/// Why a command stopped early.
#[derive(Debug)]
pub enum Failure {
    /// Bad usage, configuration or I/O. Exit 2.
    Setup(anyhow::Error),
    /// Input files that do not parse or compile. Exit 1.
    Input(anyhow::Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Setup(e) | Failure::Input(e) => write!(f, "{e:#}"),
        }
    }
}

pub trait OrFail<T> {
    fn setup(self) -> Result<T, Failure>;
    fn input(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrFail<T> for Result<T, E> {
    fn setup(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Setup(e.into()))
    }

    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).setup()
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let run = || -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(contents.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(path)?;
        Ok(())
    };
    run().with_context(|| format!("writing {}", path.display())).setup()
}

pub fn display_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

/// Parsed script, or the parse error as a diagnostic.
pub fn load_script(path: &Path) -> Result<Result<AnnotatedScript, Diagnostic>, Failure> {
    let text = read(path)?;
    Ok(parse_script(&text).map_err(|e| e.to_diagnostic()))
}

/// Console output in one of the two report styles.
pub struct Console {
    pub json: bool,
    pub file: String,
}

impl Console {
    pub fn diagnostics(&self, diags: &[Diagnostic]) {
        for d in diags {
            println!("{}: {}", d.severity, d.render(&self.file));
        }
    }

    pub fn summary(&self, diags: &[Diagnostic]) {
        let count = |s| diags.iter().filter(|d| d.severity == s).count();
        println!("{} error(s), {} warning(s)", count(Severity::Error), count(Severity::Warning));
    }

    pub fn emit_json<T: serde::Serialize>(&self, value: &T) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value).setup()?;
        println!("{text}");
        Ok(())
    }
}
