//! Deterministic output: `%.12g` numbers, a header line on every file,
//! and all-or-nothing writes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::SCHEMA_VERSION;
use crate::CliError;

/// C-style `%.12g`.
pub fn g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    const P: i32 = 12;
    // exponent after rounding to P significant digits
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= P {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Files produced by one run, written together at the end.
pub struct Output {
    command: String,
    hash: String,
    files: Vec<(String, String)>,
}

impl Output {
    pub fn new(command: &str, hash: String) -> Self {
        Self {
            command: command.into(),
            hash,
            files: Vec::new(),
        }
    }

    pub fn short_hash(&self) -> &str {
        &self.hash[..12]
    }

    fn header(&self) -> String {
        format!(
            "hopfduet schema={SCHEMA_VERSION} command={} config_sha256={}",
            self.command, self.hash
        )
    }

    /// `<command>_<hash><suffix>`
    pub fn name(&self, suffix: &str) -> String {
        format!("{}_{}{suffix}", self.command, self.short_hash())
    }

    pub fn csv(&mut self, suffix: &str, columns: &[&str], rows: &[Vec<String>]) {
        let mut s = format!("# {}\n{}\n", self.header(), columns.join(","));
        for r in rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        self.files.push((self.name(suffix), s));
    }

    /// JSON object with the header fields prepended.
    pub fn json(&mut self, suffix: &str, body: serde_json::Value) {
        let mut obj = serde_json::Map::new();
        obj.insert("schema_version".into(), SCHEMA_VERSION.into());
        obj.insert("command".into(), self.command.clone().into());
        obj.insert("config_sha256".into(), self.hash.clone().into());
        match body {
            serde_json::Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("data".into(), other);
            }
        }
        let text = serde_json::to_string_pretty(&serde_json::Value::Object(obj)).expect("json serializes");
        self.files.push((self.name(suffix), text + "\n"));
    }

    pub fn svg(&mut self, suffix: &str, body: String) {
        let text = format!("<!-- {} -->\n{body}", self.header());
        self.files.push((self.name(suffix), text));
    }

    /// Write every file into `dir`, staging through temporary names so a
    /// failure leaves no partial set behind.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let io = |e: std::io::Error, p: &Path| CliError::Runtime(format!("writing {}: {e}", p.display()));
        std::fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
        let mut staged = Vec::new();
        for (name, text) in &self.files {
            let tmp = dir.join(format!(".{name}.tmp"));
            if let Err(e) = std::fs::write(&tmp, text) {
                for (t, _) in &staged {
                    let _ = std::fs::remove_file(t);
                }
                return Err(io(e, &tmp));
            }
            staged.push((tmp, dir.join(name)));
        }
        let mut out = Vec::new();
        for (tmp, fin) in staged {
            std::fs::rename(&tmp, &fin).map_err(|e| io(e, &fin))?;
            out.push(fin);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::g12;

    #[test]
    fn matches_printf_g() {
        assert_eq!(g12(1.0), "1");
        assert_eq!(g12(0.1), "0.1");
        assert_eq!(g12(3.023616), "3.023616");
        assert_eq!(g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(g12(1e-5), "1e-05");
        assert_eq!(g12(0.0001), "0.0001");
        assert_eq!(g12(1.5e12), "1.5e+12");
        assert_eq!(g12(123456789012.0), "123456789012");
        assert_eq!(g12(-2.5e-7), "-2.5e-07");
        assert_eq!(g12(0.9999999999996), "1");
    }
}
