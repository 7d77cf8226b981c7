//! `--config` files and grid syntax.

use std::ffi::OsString;
use std::fs;

use erw_core::{ErwError, Result};

/// Flags that take no value; `key = true` in a config file switches them on.
const SWITCHES: &[&str] = &["moments", "allow-over-cap", "renormalize", "exact"];

/// Appends `--key value` for every config entry whose flag is absent from
/// `args`. Keys may use `_` or `-`.
pub fn merge_config(mut args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| ErwError::domain(format!("cannot read config file {path}: {e}")))?;
    let present: Vec<String> = args
        .iter()
        .filter_map(|a| a.to_str())
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ErwError::domain(format!("{path}:{}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key == "config" {
            return Err(ErwError::domain(format!(
                "{path}:{}: config files cannot include other config files",
                lineno + 1
            )));
        }
        if present.contains(&key) {
            continue;
        }
        if SWITCHES.contains(&key.as_str()) {
            match value {
                "true" => args.push(format!("--{key}").into()),
                "false" => {}
                other => {
                    return Err(ErwError::domain(format!(
                        "{path}:{}: `{key}` expects true or false, got '{other}'",
                        lineno + 1
                    )))
                }
            }
        } else {
            args.push(format!("--{key}={value}").into());
        }
    }
    Ok(args)
}

fn config_path(args: &[OsString]) -> Option<String> {
    let mut it = args.iter().filter_map(|a| a.to_str());
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(str::to_string);
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

/// Parses `start:stop:step`; both ends are included when `step` divides
/// the span up to a relative tolerance of 1e-9.
pub fn parse_real_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || ErwError::domain(format!("grid '{spec}' is not of the form start:stop:step"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || stop < start {
        return Err(ErwError::domain(format!(
            "grid '{spec}' needs finite start <= stop and step > 0"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(ErwError::ResourceCap {
            what: "grid points",
            requested: count as u64,
            cap: 1_000_000,
        });
    }
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Parses `lo:hi` into an inclusive integer range.
pub fn parse_int_range(spec: &str) -> Result<(i64, i64)> {
    let bad = || ErwError::domain(format!("range '{spec}' is not of the form lo:hi"));
    let (lo, hi) = spec.split_once(':').ok_or_else(bad)?;
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(ErwError::domain(format!("range '{spec}' has lo > hi")));
    }
    Ok((lo, hi))
}

/// Parses a comma-separated list such as `100,1000,10000`.
pub fn parse_list<T: std::str::FromStr>(spec: &str, what: &str) -> Result<Vec<T>> {
    let items: Vec<T> = spec
        .split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| {
                ErwError::domain(format!("cannot parse '{s}' in {what} list '{spec}'"))
            })
        })
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(ErwError::domain(format!("{what} list is empty")));
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_both_ends() {
        let g = parse_real_grid("0:3:0.1").unwrap();
        assert_eq!(g.len(), 31);
        assert_eq!(g[0], 0.0);
        assert!((g[30] - 3.0).abs() < 1e-12);
        assert_eq!(parse_real_grid("0:1:0.3").unwrap().len(), 4);
        assert_eq!(parse_real_grid("2:2:1").unwrap(), vec![2.0]);
    }

    #[test]
    fn grid_rejects_garbage() {
        for bad in ["0:1", "a:1:0.1", "0:1:0", "1:0:0.1", "0:1:-1", "0:inf:1"] {
            assert!(parse_real_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn int_range_and_list() {
        assert_eq!(parse_int_range("-5:7").unwrap(), (-5, 7));
        assert!(parse_int_range("3:1").is_err());
        assert_eq!(
            parse_list::<usize>("100, 1000", "n").unwrap(),
            vec![100, 1000]
        );
        assert!(parse_list::<usize>("100,x", "n").is_err());
    }

    #[test]
    fn config_fills_missing_flags_only() {
        let dir = std::env::temp_dir().join(format!("erw-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let file = dir.join("run.conf");
        fs::write(
            &file,
            "# walk\np = 0.25\nn = 10\nmoments = true\nrenormalize = false\n",
        )
        .unwrap();
        let args: Vec<OsString> = ["erw", "exact", "--n", "4", "--config"]
            .iter()
            .map(Into::into)
            .chain([file.clone().into_os_string()])
            .collect();
        let merged = merge_config(args).unwrap();
        let tail: Vec<_> = merged[6..].iter().map(|a| a.to_str().unwrap()).collect();
        assert_eq!(tail, ["--p=0.25", "--moments"]);
        fs::remove_dir_all(dir).unwrap();
    }
}
