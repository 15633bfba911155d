use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(gridcast::Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "cannot write {}: {source}", path.display()),
        }
    }
}

impl From<gridcast::Error> for CliError {
    fn from(e: gridcast::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Writes via a temporary file in the target directory and a rename, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// `dir/stem.<suffix>` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// Refuses outputs that would overwrite an input.
pub fn check_distinct(inputs: &[&Path], outputs: &[&Path]) -> CliResult {
    for o in outputs {
        for i in inputs {
            let same = match (o.canonicalize(), i.canonicalize()) {
                (Ok(a), Ok(b)) => a == b,
                _ => o == i,
            };
            if same {
                return Err(usage(format!("output {} would overwrite an input", o.display())));
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    for o in outputs {
        if !seen.insert(*o) {
            return Err(usage(format!("output {} given twice", o.display())));
        }
    }
    Ok(())
}

/// Record of one invocation: enough to rerun it and to know what it wrote.
#[derive(Debug, Serialize)]
pub struct Manifest<'a, F: Serialize> {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub manifest_format_version: u32,
    pub command: &'static str,
    pub flags: &'a F,
    pub seeds: BTreeMap<&'static str, u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub format_versions: BTreeMap<&'static str, u32>,
    pub wall_clock_secs: f64,
}

pub struct Run {
    command: &'static str,
    started: Instant,
    seeds: BTreeMap<&'static str, u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    formats: BTreeMap<&'static str, u32>,
}

impl Run {
    pub fn start(command: &'static str) -> Self {
        Self {
            command,
            started: Instant::now(),
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            formats: BTreeMap::new(),
        }
    }

    pub fn seed(&mut self, name: &'static str, value: u64) -> &mut Self {
        self.seeds.insert(name, value);
        self
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn format(&mut self, name: &'static str, version: u32) -> &mut Self {
        self.formats.insert(name, version);
        self
    }

    pub fn write(&mut self, path: &Path, contents: &[u8]) -> CliResult {
        write_atomic(path, contents)?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Writes the manifest beside `primary`, or to stderr when the primary
    /// output went to stdout.
    pub fn finish<F: Serialize>(self, flags: &F, primary: Option<&Path>) -> CliResult {
        let manifest = Manifest {
            tool: "gridcast",
            tool_version: env!("CARGO_PKG_VERSION"),
            manifest_format_version: MANIFEST_FORMAT_VERSION,
            command: self.command,
            flags,
            seeds: self.seeds,
            inputs: self.inputs,
            outputs: self.outputs,
            format_versions: self.formats,
            wall_clock_secs: self.started.elapsed().as_secs_f64(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        match primary {
            Some(p) => write_atomic(&sibling(p, "manifest.json"), text.as_bytes()),
            None => {
                eprint!("{text}");
                Ok(())
            }
        }
    }
}
