//! Self-describing output artifacts: headers, config hashing and atomic
//! writes.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance carried by every artifact.
#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// SHA-256 of the canonical JSON of every input that shapes the output.
    pub config_sha256: String,
    pub seed: Option<u64>,
}

impl Header {
    /// Hashes `config`; `serde_json` maps keep keys sorted, so the encoding
    /// is canonical.
    pub fn new(command: &'static str, config: &Value, seed: Option<u64>) -> Self {
        let canonical = serde_json::to_string(config).expect("JSON values always serialize");
        let digest = Sha256::digest(canonical.as_bytes());
        Header {
            tool: "latticeweak",
            version: VERSION,
            command,
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seed,
        }
    }

    /// Header as `#` comment lines for CSV and text artifacts.
    pub fn comment_lines(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# {} {}\n# command: {}\n# config-sha256: {}\n# seed: {}\n",
            self.tool, self.version, self.command, self.config_sha256, seed
        )
    }
}

/// Serializes `body` as pretty JSON with the header under `meta`.
pub fn json_document(header: &Header, body: Value) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert("meta".into(), serde_json::to_value(header).expect("header serializes"));
    if let Value::Object(fields) = body {
        doc.extend(fields);
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Renders rows as CSV (no quoting surprises: `csv` handles it).
pub fn csv_rows(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Usage(format!("csv encoding: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv encoding: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Shortest round-trip rendering, so equal inputs give equal bytes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Writes `text` to `out` through a temporary file in the same directory
/// and a rename, or to stdout when `out` is `None`.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    let Some(path) = out else {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| CliError::io("<stdout>", e));
    };
    let shown = path.display().to_string();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(&shown, e))?;
    tmp.write_all(text.as_bytes()).map_err(|e| CliError::io(&shown, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(&shown, e))?;
    tmp.persist(path).map_err(|e| CliError::io(&shown, e.error))?;
    Ok(())
}
