use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use fnls::config::{parse_config, RunConfig};
use fnls::spectral::load_snapshot;
use fnls::ComplexField;

use crate::ConfigArgs;

pub type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

/// Replace (or add) `key = value` lines for each override.
pub fn apply_overrides(text: &str, overrides: &[String]) -> CliResult<String> {
    let mut out = text.to_string();
    for o in overrides {
        let (key, value) = o.split_once('=').ok_or_else(|| format!("override '{o}' is not KEY=VALUE"))?;
        let key = key.trim();
        let kept: Vec<&str> = out
            .lines()
            .filter(|l| l.split('#').next().unwrap_or("").split_once('=').is_none_or(|(k, _)| k.trim() != key))
            .collect();
        out = kept.join("\n");
        out.push_str(&format!("\n{key} = {}\n", value.trim()));
    }
    Ok(out)
}

pub fn load_config(args: &ConfigArgs) -> CliResult<RunConfig> {
    let text = fs::read_to_string(&args.config).map_err(|e| format!("{}: {e}", args.config.display()))?;
    let text = apply_overrides(&text, &args.overrides)?;
    parse_config(&text).map_err(|e| format!("{}: {e}", args.config.display()).into())
}

pub fn load_state(path: &Path, config: &RunConfig) -> CliResult<ComplexField> {
    let field = load_snapshot(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if field.grid() != &config.grid {
        return Err(format!("{}: snapshot grid {:?} does not match the configured grid {:?}", path.display(), field.grid(), config.grid).into());
    }
    Ok(field)
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| format!("{}: {e}", path.display()))?))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn write_csv<T>(path: &Path, header: &str, rows: &[T], row: impl Fn(&T) -> String) -> CliResult<()> {
    let mut w = create(path)?;
    fnls::report::write_csv(&mut w, header, rows, row)?;
    w.flush()?;
    Ok(())
}

pub fn parse_list<T: std::str::FromStr>(text: &str) -> CliResult<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|v| v.trim().parse::<T>().map_err(|e| format!("cannot parse '{}': {e}", v.trim()).into()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_replaces_existing_key() {
        let text = "s = 0.7\nlambda = 1 # mass\nc2 = 1\n";
        let out = apply_overrides(text, &["lambda=0.5".into()]).unwrap();
        assert!(!out.contains("lambda = 1"));
        assert!(out.contains("lambda = 0.5"));
        assert!(out.contains("s = 0.7") && out.contains("c2 = 1"));
    }

    #[test]
    fn override_adds_missing_key() {
        let out = apply_overrides("s = 0.7\n", &["seed = 3".into()]).unwrap();
        assert!(out.contains("seed = 3"));
        assert!(apply_overrides("", &["seed".into()]).is_err());
    }

    #[test]
    fn lists_parse() {
        assert_eq!(parse_list::<f64>("0, 1e-3,0.01").unwrap(), vec![0.0, 1e-3, 0.01]);
        assert!(parse_list::<f64>("0,x").is_err());
    }
}
