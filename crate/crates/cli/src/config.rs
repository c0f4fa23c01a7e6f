//! Experiment configuration files.
//!
//! One `key = value` pair per line, `#` starts a comment, lists are
//! comma-separated. Which keys are allowed depends on `kind`; every key that
//! applies to a kind has a default except the graph description.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use stlab_core::Family;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line, absent for problems that belong to no single line.
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), message: message.into() }
    }

    fn global(message: impl Into<String>) -> Self {
        ConfigError { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Count,
    SampleCensus,
    BallsBins,
    Bounds,
    EnumerateTrees,
    OtterFit,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::Count,
        Kind::SampleCensus,
        Kind::BallsBins,
        Kind::Bounds,
        Kind::EnumerateTrees,
        Kind::OtterFit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Count => "count",
            Kind::SampleCensus => "sample-census",
            Kind::BallsBins => "balls-bins",
            Kind::Bounds => "bounds",
            Kind::EnumerateTrees => "enumerate-trees",
            Kind::OtterFit => "otter-fit",
        }
    }

    fn uses_graph(self) -> bool {
        matches!(self, Kind::Count | Kind::SampleCensus | Kind::BallsBins)
    }

    /// Non-graph keys accepted by this kind, in rendering order.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Kind::Count => &["seed", "out"],
            Kind::SampleCensus => &["samples", "seed", "out"],
            Kind::BallsBins => &["samples", "k_max", "gamma", "variance_cap", "seed", "out"],
            Kind::Bounds => &["n", "d", "delta", "leaves", "k_max", "gamma", "out"],
            Kind::EnumerateTrees | Kind::OtterFit => &["n_min", "n_max", "out"],
        }
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Kind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown kind `{s}`"))
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters of the `bounds` experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsSpec {
    pub n: u64,
    pub d: f64,
    pub delta: f64,
    /// Leaf count for the labeled-copy bound; omitted means that report is skipped.
    pub leaves: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub graph: Option<Family>,
    pub samples: u64,
    pub k_max: usize,
    pub gammas: Vec<f64>,
    /// Exact variances are computed only for graphs with at most this many bins.
    pub variance_cap: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub n_min: usize,
    pub n_max: usize,
    pub bounds: BoundsSpec,
}

const GRAPH_KEYS: [&str; 7] = ["family", "input", "n", "nx", "ny", "d", "delta"];

impl ExperimentConfig {
    /// Defaults for everything except the graph.
    pub fn new(kind: Kind) -> Self {
        ExperimentConfig {
            kind,
            graph: None,
            samples: 1000,
            k_max: 5,
            gammas: vec![0.2],
            variance_cap: 500,
            seed: 0,
            out: PathBuf::from("out"),
            n_min: 1,
            n_max: 12,
            bounds: BoundsSpec { n: 10_000, d: 1000.0, delta: 1e-10, leaves: None },
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.kind.uses_graph() && self.graph.is_none() {
            return Err(ConfigError::global(format!(
                "missing required key `family` or `input` for kind {}",
                self.kind
            )));
        }
        if self.samples == 0 {
            return Err(ConfigError::global("`samples` must be at least 1"));
        }
        if self.gammas.is_empty() {
            return Err(ConfigError::global("`gamma` needs at least one value"));
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(ConfigError::global(format!(
                "need 1 <= n_min <= n_max, got {}..{}",
                self.n_min, self.n_max
            )));
        }
        Ok(())
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<T, ConfigError> {
    raw.parse()
        .map_err(|_| ConfigError::at(line, format!("`{key}`: cannot parse `{raw}` as {}", type_name::<T>())))
}

fn type_name<T>() -> &'static str {
    let full = std::any::type_name::<T>();
    match full {
        "u64" | "usize" => "a nonnegative integer",
        "f64" => "a number",
        _ => full,
    }
}

fn parse_list<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<Vec<T>, ConfigError> {
    raw.split(',').map(|item| parse_value(key, item.trim(), line)).collect()
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, found `{content}`")))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::at(line, "empty key or value"));
        }
        if let Some((first, _)) = entries.get(key) {
            return Err(ConfigError::at(line, format!("duplicate key `{key}` (first on line {first})")));
        }
        entries.insert(key.to_string(), (line, value.to_string()));
    }
    build(entries)
}

fn key_of(line: &str) -> Option<String> {
    let content = line.split('#').next().unwrap_or("");
    content.split_once('=').map(|(k, _)| k.trim().to_string())
}

/// Whether some line of the config text sets `key`.
pub fn defines_key(text: &str, key: &str) -> bool {
    text.lines().any(|l| key_of(l).as_deref() == Some(key))
}

/// Replaces (or appends) the given keys in config text, so that command-line
/// values win over file values while other lines keep their numbers.
pub fn apply_overrides(text: &str, overrides: &[(String, String)]) -> String {
    let mut lines: Vec<String> = text
        .lines()
        .map(|line| match key_of(line) {
            Some(k) if overrides.iter().any(|(o, _)| *o == k) => String::new(),
            _ => line.to_string(),
        })
        .collect();
    for (k, v) in overrides {
        lines.push(format!("{k} = {v}"));
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

/// Parses a config given as `key=value` strings, e.g. from the command line.
pub fn config_from_pairs<'a, I>(pairs: I) -> Result<ExperimentConfig, ConfigError>
where
    I: IntoIterator<Item = &'a str>,
{
    let text: Vec<&str> = pairs.into_iter().collect();
    parse_config(&text.join("\n"))
}

fn build(mut entries: BTreeMap<String, (usize, String)>) -> Result<ExperimentConfig, ConfigError> {
    let (kind_line, kind_raw) = entries
        .remove("kind")
        .ok_or_else(|| ConfigError::global("missing required key `kind`"))?;
    let kind: Kind = kind_raw.parse().map_err(|e: String| ConfigError::at(kind_line, e))?;
    let mut cfg = ExperimentConfig::new(kind);

    let known = |k: &str| {
        GRAPH_KEYS.contains(&k)
            || Kind::ALL.iter().any(|kind| kind.keys().contains(&k))
    };
    for (key, (line, _)) in &entries {
        if !known(key) {
            return Err(ConfigError::at(*line, format!("unknown key `{key}`")));
        }
    }

    if kind.uses_graph() {
        cfg.graph = take_graph(&mut entries)?;
    }

    for &key in kind.keys() {
        let Some((line, raw)) = entries.remove(key) else { continue };
        let raw = raw.as_str();
        match key {
            "samples" => cfg.samples = parse_value(key, raw, line)?,
            "k_max" => cfg.k_max = parse_value(key, raw, line)?,
            "gamma" => cfg.gammas = parse_list(key, raw, line)?,
            "variance_cap" => cfg.variance_cap = parse_value(key, raw, line)?,
            "seed" => cfg.seed = parse_value(key, raw, line)?,
            "out" => cfg.out = PathBuf::from(raw),
            "n_min" => cfg.n_min = parse_value(key, raw, line)?,
            "n_max" => cfg.n_max = parse_value(key, raw, line)?,
            "n" => cfg.bounds.n = parse_value(key, raw, line)?,
            "d" => cfg.bounds.d = parse_value(key, raw, line)?,
            "delta" => cfg.bounds.delta = parse_value(key, raw, line)?,
            "leaves" => cfg.bounds.leaves = Some(parse_value(key, raw, line)?),
            _ => unreachable!("every listed key is handled"),
        }
    }

    if let Some((key, (line, _))) = entries.iter().min_by_key(|(_, (l, _))| *l) {
        return Err(ConfigError::at(*line, format!("key `{key}` does not apply to kind {kind}")));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn take_graph(entries: &mut BTreeMap<String, (usize, String)>) -> Result<Option<Family>, ConfigError> {
    let family = entries.remove("family");
    let input = entries.remove("input");
    let (line, name) = match (family, input) {
        (None, None) => return Ok(None),
        (Some(_), Some((line, _))) => {
            return Err(ConfigError::at(line, "`family` and `input` are mutually exclusive"))
        }
        (None, Some((_, path))) => return Ok(Some(Family::FromFile { path: PathBuf::from(path) })),
        (Some(f), None) => f,
    };
    let family = match name.as_str() {
        "complete" => Family::Complete { n: need_int(entries, "n", &name)? },
        "cycle" => Family::Cycle { n: need_int(entries, "n", &name)? },
        "complete-bipartite" => Family::CompleteBipartite {
            nx: need_int(entries, "nx", &name)?,
            ny: need_int(entries, "ny", &name)?,
        },
        "random-regular" => Family::RandomRegular {
            n: need_int(entries, "n", &name)?,
            d: need_int(entries, "d", &name)?,
        },
        "random-bipartite-regular" => {
            let n = need_int(entries, "n", &name)?;
            let d = need_int(entries, "d", &name)?;
            let (l, raw) = entries.remove("delta").unwrap_or((line, "0".into()));
            Family::RandomBipartiteRegular { n, d, delta: parse_value("delta", &raw, l)? }
        }
        other => return Err(ConfigError::at(line, format!("unknown family `{other}`"))),
    };
    Ok(Some(family))
}

fn need_int(entries: &mut BTreeMap<String, (usize, String)>, key: &str, family: &str) -> Result<usize, ConfigError> {
    let (line, raw) = entries
        .remove(key)
        .ok_or_else(|| ConfigError::global(format!("missing required key `{key}` for family {family}")))?;
    parse_value(key, &raw, line)
}

/// Canonical text: `kind` first, then the graph, then the kind's keys in a
/// fixed order, all defaults written out.
pub fn render_config(cfg: &ExperimentConfig) -> String {
    let mut lines = vec![format!("kind = {}", cfg.kind)];
    if let Some(family) = &cfg.graph {
        match family {
            Family::Complete { n } => lines.extend([s("family", "complete"), s("n", n)]),
            Family::Cycle { n } => lines.extend([s("family", "cycle"), s("n", n)]),
            Family::CompleteBipartite { nx, ny } => {
                lines.extend([s("family", "complete-bipartite"), s("nx", nx), s("ny", ny)])
            }
            Family::RandomRegular { n, d } => {
                lines.extend([s("family", "random-regular"), s("n", n), s("d", d)])
            }
            Family::RandomBipartiteRegular { n, d, delta } => lines.extend([
                s("family", "random-bipartite-regular"),
                s("n", n),
                s("d", d),
                s("delta", delta),
            ]),
            Family::FromFile { path } => lines.push(s("input", path.display())),
        }
    }
    for &key in cfg.kind.keys() {
        let line = match key {
            "samples" => s(key, cfg.samples),
            "k_max" => s(key, cfg.k_max),
            "gamma" => {
                let items: Vec<String> = cfg.gammas.iter().map(f64::to_string).collect();
                s(key, items.join(", "))
            }
            "variance_cap" => s(key, cfg.variance_cap),
            "seed" => s(key, cfg.seed),
            "out" => s(key, cfg.out.display()),
            "n_min" => s(key, cfg.n_min),
            "n_max" => s(key, cfg.n_max),
            "n" => s(key, cfg.bounds.n),
            "d" => s(key, cfg.bounds.d),
            "delta" => s(key, cfg.bounds.delta),
            "leaves" => match cfg.bounds.leaves {
                Some(l) => s(key, l),
                None => continue,
            },
            _ => unreachable!("every listed key is handled"),
        };
        lines.push(line);
    }
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

fn s(key: &str, value: impl fmt::Display) -> String {
    format!("{key} = {value}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_count_config_gets_defaults() {
        let cfg = parse_config("kind = count\nfamily = complete\nn = 4\n").unwrap();
        assert_eq!(cfg.kind, Kind::Count);
        assert_eq!(cfg.graph, Some(Family::Complete { n: 4 }));
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.out, PathBuf::from("out"));
        assert_eq!(render_config(&cfg), "kind = count\nfamily = complete\nn = 4\nseed = 0\nout = out\n");
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let err = parse_config("kind = balls-bins\nfamily = complete-bipartite\nnx = 3\nny = 3\ngamm = 0.2\n")
            .unwrap_err();
        assert_eq!(err.line, Some(5));
        assert!(err.message.contains("gamm"));
    }

    #[test]
    fn type_mismatch_and_missing_keys() {
        let err = parse_config("kind = count\nfamily = complete\nn = four\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        let err = parse_config("kind = count\nfamily = cycle\n").unwrap_err();
        assert!(err.message.contains("`n`"));
        let err = parse_config("kind = count\n").unwrap_err();
        assert!(err.message.contains("family"));
        assert!(parse_config("family = complete\nn = 3\n").is_err());
        let err = parse_config("kind = sample-census\nfamily = complete\nn = 4\nsamples = 0\n").unwrap_err();
        assert!(err.message.contains("samples"));
    }

    #[test]
    fn inapplicable_and_duplicate_keys() {
        let err = parse_config("kind = count\nfamily = complete\nn = 4\nsamples = 3\n").unwrap_err();
        assert_eq!(err.line, Some(4));
        let err = parse_config("kind = count\nfamily = complete\nn = 4\nn = 5\n").unwrap_err();
        assert_eq!(err.line, Some(4));
        let err = parse_config("kind = count\nfamily = complete\nn = 4\nnx = 5\n").unwrap_err();
        assert_eq!(err.line, Some(4));
    }

    #[test]
    fn comments_lists_and_round_trip() {
        let text = "# tail experiment\nkind = balls-bins\nfamily = random-bipartite-regular # slack\nn = 50\nd = 4\n\
                    gamma = 0.1,0.2 , 0.3\nseed = 9\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.gammas, vec![0.1, 0.2, 0.3]);
        assert_eq!(cfg.graph, Some(Family::RandomBipartiteRegular { n: 50, d: 4, delta: 0.0 }));
        let canon = render_config(&cfg);
        assert_eq!(render_config(&parse_config(&canon).unwrap()), canon);
        assert_eq!(parse_config(&canon).unwrap(), cfg);
    }

    #[test]
    fn bounds_and_tree_kinds() {
        let cfg = parse_config("kind = bounds\nn = 100\nleaves = 3\ngamma = 0.5\n").unwrap();
        assert_eq!(cfg.bounds.leaves, Some(3));
        assert_eq!(cfg.bounds.n, 100);
        let canon = render_config(&cfg);
        assert_eq!(parse_config(&canon).unwrap(), cfg);

        let cfg = parse_config("kind = otter-fit\nn_min = 1\nn_max = 15\n").unwrap();
        assert_eq!(cfg.n_max, 15);
        assert!(parse_config("kind = otter-fit\nn_min = 5\nn_max = 4\n").is_err());
        assert!(parse_config("kind = enumerate-trees\nfamily = complete\n").is_err());
    }

    #[test]
    fn overrides_win_and_keep_line_numbers() {
        let text = "kind = count\nfamily = complete\nn = 4\nseed = 1\n";
        let merged = apply_overrides(text, &[("seed".into(), "9".into()), ("out".into(), "x".into())]);
        let cfg = parse_config(&merged).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.out, PathBuf::from("x"));
        let bad = apply_overrides("kind = count\nfamily = complete\nn = z\n", &[("seed".into(), "2".into())]);
        assert_eq!(parse_config(&bad).unwrap_err().line, Some(3));
    }

    #[test]
    fn pairs_form() {
        let cfg = config_from_pairs(["kind=count", "input=g.txt"]).unwrap();
        assert_eq!(cfg.graph, Some(Family::FromFile { path: PathBuf::from("g.txt") }));
    }
}
