//! JSON emission. Every report is `{"config_echo": …, …result fields…}`;
//! floats are printed in scientific notation with 17 significant digits so
//! output is lossless and byte-stable, and `config_echo` keys are sorted.

use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

/// Formatter that renders every `f64` as `{:.16e}` (17 significant digits);
/// everything else follows the compact default.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// A result payload wrapped with the echo of the flags that produced it.
#[derive(Serialize)]
pub struct Report<T: Serialize> {
    pub config_echo: Value,
    #[serde(flatten)]
    pub result: T,
}

pub fn to_json_bytes<T: Serialize>(report: &T) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    report
        .serialize(&mut ser)
        .expect("reports contain only serializable finite values");
    buf.push(b'\n');
    buf
}

/// Writes the report to `out`, or to standard output when `out` is `None`.
pub fn emit<T: Serialize>(report: &Report<T>, out: Option<&Path>) -> depcor::Result<()> {
    let bytes = to_json_bytes(report);
    let io_err = |path: &Path, source| depcor::Error::Io {
        path: path.display().to_string(),
        source,
    };
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| io_err(path, e)),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| io_err(Path::new("<stdout>"), e)),
    }
}

/// Builder for the `config_echo` block: the effective values of every flag
/// that influences results or artifacts. `--threads` and `--timing` are
/// deliberately absent — results are independent of both by contract.
pub struct Echo(serde_json::Map<String, Value>);

impl Echo {
    pub fn new(subcommand: &str) -> Self {
        let mut map = serde_json::Map::new();
        map.insert("subcommand".into(), subcommand.into());
        Echo(map)
    }

    pub fn set(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.0.insert(key.into(), value.into());
        self
    }

    pub fn path(self, key: &str, path: &Path) -> Self {
        self.set(key, path.display().to_string())
    }

    pub fn opt_path(self, key: &str, path: &Option<std::path::PathBuf>) -> Self {
        match path {
            Some(p) => self.path(key, p),
            None => self,
        }
    }

    pub fn finish(self) -> Value {
        Value::Object(self.0)
    }
}
