use std::io::Write;
use std::path::{Path, PathBuf};

use asym_core::format::fmt_g17;
use asym_core::numerics::Cx;
use tempfile::NamedTempFile;

use crate::error::{CliError, Result};

/// Writes `contents` to `path` through a temporary file in the same
/// directory and a rename, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(contents.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source });
    };
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Comma-separated rows with a header, `%.17g` numbers and `\n` endings.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut buf = header.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(",");
        buf.push('\n');
        Self { buf }
    }

    pub fn row(&mut self, t: f64, values: impl IntoIterator<Item = f64>) {
        self.buf.push_str(&fmt_g17(t));
        for v in values {
            self.buf.push(',');
            self.buf.push_str(&fmt_g17(v));
        }
        self.buf.push('\n');
    }

    pub fn line(&mut self, text: &str) {
        self.buf.push_str(text);
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

pub fn complex_header(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).flat_map(|i| [format!("re_{prefix}{i}"), format!("im_{prefix}{i}")]).collect()
}

pub fn flatten(values: &[Cx]) -> impl Iterator<Item = f64> + '_ {
    values.iter().flat_map(|c| [c.re, c.im])
}
