//! Bench manifests: one directive per line, `#` starts a comment.
//!
//! ```text
//! seed 7                # master seed (default 0)
//! instance grid.mrf     # repeatable; relative to the manifest's directory
//! algo ga               # repeatable
//! seeds 3               # runs per (instance, algo) cell (default 1)
//! budget-s 10           # per-run time budget
//! max-iters 200         # per-run iteration cap
//! window 20             # convergence window (default 20)
//! ```

use std::path::{Path, PathBuf};
use std::time::Duration;

use mrf_core::Algorithm;

use crate::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub master_seed: u64,
    pub instances: Vec<PathBuf>,
    pub algorithms: Vec<Algorithm>,
    pub seeds: usize,
    pub budget: Option<Duration>,
    pub max_iterations: Option<usize>,
    pub convergence_window: usize,
}

fn value<T: std::str::FromStr>(line: usize, key: &str, args: &[&str]) -> Result<T, ParseError> {
    match args {
        [v] => v
            .parse()
            .map_err(|_| ParseError::new(line, format!("bad value `{v}` for `{key}`"))),
        _ => Err(ParseError::new(
            line,
            format!("`{key}` takes exactly one value"),
        )),
    }
}

/// Parses manifest text; relative instance paths are resolved against `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Manifest, ParseError> {
    let mut m = Manifest {
        master_seed: 0,
        instances: Vec::new(),
        algorithms: Vec::new(),
        seeds: 1,
        budget: None,
        max_iterations: None,
        convergence_window: 20,
    };
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        last = ln;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let key = words.next().expect("non-empty line");
        let args: Vec<&str> = words.collect();
        match key {
            "seed" => m.master_seed = value(ln, key, &args)?,
            "instance" => {
                let p: PathBuf = value(ln, key, &args)?;
                m.instances
                    .push(if p.is_absolute() { p } else { base.join(p) });
            }
            "algo" => m.algorithms.push(value(ln, key, &args)?),
            "seeds" => {
                m.seeds = value(ln, key, &args)?;
                if m.seeds == 0 {
                    return Err(ParseError::new(ln, "`seeds` must be positive"));
                }
            }
            "budget-s" => {
                let s: f64 = value(ln, key, &args)?;
                if !(s > 0.0 && s.is_finite()) {
                    return Err(ParseError::new(ln, "`budget-s` must be positive"));
                }
                m.budget = Some(Duration::from_secs_f64(s));
            }
            "max-iters" => m.max_iterations = Some(value(ln, key, &args)?),
            "window" => m.convergence_window = value(ln, key, &args)?,
            other => return Err(ParseError::new(ln, format!("unknown directive `{other}`"))),
        }
    }
    let end = last + 1;
    if m.instances.is_empty() {
        return Err(ParseError::new(end, "manifest lists no `instance`"));
    }
    if m.algorithms.is_empty() {
        return Err(ParseError::new(end, "manifest lists no `algo`"));
    }
    if m.budget.is_none() && m.max_iterations.is_none() {
        return Err(ParseError::new(
            end,
            "manifest sets neither `budget-s` nor `max-iters`",
        ));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_directives() {
        let text = "# bench\nseed 9\ninstance a.mrf\ninstance /abs/b.mrf\nalgo ga\nalgo expansion-trunc # trailing\nseeds 3\nbudget-s 1.5\nmax-iters 40\nwindow 5\n";
        let m = parse_manifest(text, Path::new("/base")).unwrap();
        assert_eq!(m.master_seed, 9);
        assert_eq!(
            m.instances,
            vec![PathBuf::from("/base/a.mrf"), PathBuf::from("/abs/b.mrf")]
        );
        assert_eq!(
            m.algorithms,
            vec![Algorithm::GaFusion, Algorithm::ExpansionTruncated]
        );
        assert_eq!(
            (m.seeds, m.max_iterations, m.convergence_window),
            (3, Some(40), 5)
        );
        assert_eq!(m.budget, Some(Duration::from_millis(1500)));
    }

    #[test]
    fn reports_line_numbers() {
        let base = Path::new(".");
        assert_eq!(
            parse_manifest("instance a\nalgo nope\n", base)
                .unwrap_err()
                .line,
            2
        );
        assert_eq!(
            parse_manifest("\n\nfrobnicate 1\n", base).unwrap_err().line,
            3
        );
        assert_eq!(parse_manifest("seeds 1 2\n", base).unwrap_err().line, 1);
        assert!(parse_manifest("", base).is_err());
        assert!(parse_manifest("instance a\nalgo ga\n", base).is_err());
    }
}
