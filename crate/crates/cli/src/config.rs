//! Effective run configuration: defaults <- config file <- CLI flags.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy)]
pub struct GraphSpec {
    pub n: usize,
    pub m: usize,
    pub d: usize,
}

/// Unresolved option set, one layer of precedence.
#[derive(Debug, Clone, Default)]
pub struct Partial {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub samples: Option<usize>,
    pub graph: Option<String>,
    pub pi: Option<String>,
    pub edges: Option<PathBuf>,
    pub family: Option<String>,
    pub sweep: Option<String>,
    pub c: Option<f64>,
    pub cd: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub quick: Option<bool>,
    pub summary: Option<bool>,
}

impl Partial {
    /// Lower-precedence values fill the gaps.
    pub fn or(self, fallback: Partial) -> Partial {
        Partial {
            seed: self.seed.or(fallback.seed),
            workers: self.workers.or(fallback.workers),
            samples: self.samples.or(fallback.samples),
            graph: self.graph.or(fallback.graph),
            pi: self.pi.or(fallback.pi),
            edges: self.edges.or(fallback.edges),
            family: self.family.or(fallback.family),
            sweep: self.sweep.or(fallback.sweep),
            c: self.c.or(fallback.c),
            cd: self.cd.or(fallback.cd),
            out: self.out.or(fallback.out),
            format: self.format.or(fallback.format),
            quick: self.quick.or(fallback.quick),
            summary: self.summary.or(fallback.summary),
        }
    }

    /// Flat `key = value` text, unknown keys rejected.
    pub fn from_config_text(text: &str) -> Result<Partial, CliError> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!("config line {}: expected `key = value`", lineno + 1))
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        let mut p = Partial::default();
        for (key, value) in map {
            let usage =
                |what: &str| CliError::usage(format!("config key {key}: bad {what}: {value}"));
            match key.as_str() {
                "seed" => p.seed = Some(value.parse().map_err(|_| usage("integer"))?),
                "workers" => p.workers = Some(value.parse().map_err(|_| usage("integer"))?),
                "samples" => p.samples = Some(value.parse().map_err(|_| usage("integer"))?),
                "graph" => p.graph = Some(value),
                "pi" => p.pi = Some(value),
                "edges" => p.edges = Some(PathBuf::from(value)),
                "family" => p.family = Some(value),
                "sweep" => p.sweep = Some(value),
                "C" => p.c = Some(value.parse().map_err(|_| usage("number"))?),
                "cd" => p.cd = Some(value.parse().map_err(|_| usage("number"))?),
                "out" => p.out = Some(PathBuf::from(value)),
                "format" => p.format = Some(value),
                "quick" => p.quick = Some(value.parse().map_err(|_| usage("bool"))?),
                "summary" => p.summary = Some(value.parse().map_err(|_| usage("bool"))?),
                other => {
                    return Err(CliError::usage(format!("unknown config key `{other}`")));
                }
            }
        }
        Ok(p)
    }
}

/// Fully resolved settings used by every subcommand.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub workers: usize,
    pub samples: usize,
    pub graph: Option<GraphSpec>,
    pub pi: Option<Vec<f64>>,
    pub edges: Option<PathBuf>,
    pub family: Option<String>,
    pub sweep: Vec<usize>,
    pub c: f64,
    pub cd: f64,
    pub out: Option<PathBuf>,
    pub format: OutFormat,
    pub quick: bool,
    pub summary: bool,
}

fn parse_graph(spec: &str) -> Result<GraphSpec, CliError> {
    let (mut n, mut m, mut d) = (None, None, None);
    for part in spec.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--graph: expected k=v, got `{part}`")))?;
        let v: usize = value
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("--graph {key}: bad integer `{value}`")))?;
        match key.trim() {
            "n" => n = Some(v),
            "m" => m = Some(v),
            "d" => d = Some(v),
            other => {
                return Err(CliError::usage(format!("--graph: unknown field `{other}`")));
            }
        }
    }
    match (n, m, d) {
        (Some(n), Some(m), Some(d)) => Ok(GraphSpec { n, m, d }),
        _ => Err(CliError::usage("--graph requires n=..,m=..,d=..")),
    }
}

fn parse_f64_list(text: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::usage(format!("{flag}: bad number `{t}`")))
        })
        .collect()
}

fn parse_usize_list(text: &str, flag: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::usage(format!("{flag}: bad integer `{t}`")))
        })
        .collect()
}

impl Settings {
    pub fn resolve(p: Partial) -> Result<Settings, CliError> {
        let env_workers = std::env::var("STEIN_DECOMP_THREADS")
            .ok()
            .map(|v| {
                v.parse::<usize>().map_err(|_| {
                    CliError::usage(format!("STEIN_DECOMP_THREADS: bad integer `{v}`"))
                })
            })
            .transpose()?;
        let format = match p.format.as_deref() {
            None | Some("csv") => OutFormat::Csv,
            Some("json") => OutFormat::Json,
            Some(other) => {
                return Err(CliError::usage(format!(
                    "--format must be csv or json, got `{other}`"
                )));
            }
        };
        let samples = p.samples.unwrap_or(10_000);
        if samples == 0 {
            return Err(CliError::usage("--samples must be >= 1"));
        }
        let c = p.c.unwrap_or(1.0);
        if !(c > 0.0) {
            return Err(CliError::usage("--C must be > 0"));
        }
        let cd = p.cd.unwrap_or(1.0);
        if !(cd > 0.0) {
            return Err(CliError::usage("--cd must be > 0"));
        }
        let sweep = match &p.sweep {
            Some(text) => {
                let values = parse_usize_list(text, "--sweep")?;
                if !values.windows(2).all(|w| w[0] < w[1]) {
                    return Err(CliError::usage("--sweep values must be strictly increasing"));
                }
                values
            }
            None => Vec::new(),
        };
        Ok(Settings {
            seed: p.seed.unwrap_or(1),
            workers: p.workers.or(env_workers).unwrap_or(0),
            samples,
            graph: p.graph.as_deref().map(parse_graph).transpose()?,
            pi: p
                .pi
                .as_deref()
                .map(|t| parse_f64_list(t, "--pi"))
                .transpose()?,
            edges: p.edges,
            family: p.family,
            sweep,
            c,
            cd,
            out: p.out,
            format,
            quick: p.quick.unwrap_or(false),
            summary: p.summary.unwrap_or(false),
        })
    }

    /// Flat text that [`Partial::from_config_text`] accepts back.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("seed", self.seed.to_string());
        push("workers", self.workers.to_string());
        push("samples", self.samples.to_string());
        if let Some(g) = &self.graph {
            push("graph", format!("n={},m={},d={}", g.n, g.m, g.d));
        }
        if let Some(pi) = &self.pi {
            push(
                "pi",
                pi.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        if let Some(e) = &self.edges {
            push("edges", e.display().to_string());
        }
        if let Some(f) = &self.family {
            push("family", f.clone());
        }
        if !self.sweep.is_empty() {
            push(
                "sweep",
                self.sweep
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        push("C", self.c.to_string());
        push("cd", self.cd.to_string());
        if let Some(o) = &self.out {
            push("out", o.display().to_string());
        }
        push(
            "format",
            match self.format {
                OutFormat::Csv => "csv".into(),
                OutFormat::Json => "json".into(),
            },
        );
        push("quick", self.quick.to_string());
        push("summary", self.summary.to_string());
        out
    }
}
