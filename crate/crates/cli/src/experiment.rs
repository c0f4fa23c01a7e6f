//! Running a configured experiment and writing its outputs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use stlab_core::balls_bins::{
    expectation_band_lemma23, expectation_im_f64, mc_tail_estimate, median_band_lemma25, poisson_one,
    sample_counts, tail_bound_thm21, variance_bound_lemma24, variance_im_f64, Band, BoundParams,
};
use stlab_core::bounds::{thm31_bound, BoundReport};
use stlab_core::graph::{generate, read_edge_list};
use stlab_core::spanning::{count_spanning_trees, kostochka_upper, ln_count};
use stlab_core::tree_iso::{aut_size, enumerate_unlabeled_trees, leaf_count, otter_ratio_fit, sample_census};
use stlab_core::{Error as CoreError, Family, Generated, GraphSpec};

use crate::config::{render_config, ExperimentConfig, Kind};
use crate::output::{OutputDigest, OutputDir, Table};
use crate::RunError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: String,
    pub version: String,
    pub wall_time_secs: f64,
    pub outputs: Vec<OutputDigest>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Builds the configured graph. Parameter errors are configuration errors.
pub fn build_graph(cfg: &ExperimentConfig) -> Result<Generated, RunError> {
    let family = cfg
        .graph
        .clone()
        .ok_or_else(|| RunError::config("the experiment needs a graph (`family` or `input`)"))?;
    if let Family::FromFile { path } = &family {
        let file = File::open(path).map_err(|e| RunError::config(format!("input `{}`: {e}", path.display())))?;
        return Ok(read_edge_list(BufReader::new(file))?);
    }
    let spec = GraphSpec::new(family, cfg.seed);
    spec.validate().map_err(|e| RunError::config(e.to_string()))?;
    Ok(generate(&spec)?)
}

/// Runs the experiment, writes all outputs and then the manifest.
pub fn run(cfg: &ExperimentConfig) -> Result<RunManifest, RunError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut out = OutputDir::create(&cfg.out)?;
    match cfg.kind {
        Kind::Count => run_count(cfg, &mut out)?,
        Kind::SampleCensus => run_census(cfg, &mut out)?,
        Kind::BallsBins => run_balls_bins(cfg, &mut out)?,
        Kind::Bounds => run_bounds(cfg, &mut out)?,
        Kind::EnumerateTrees => run_enumerate(cfg, &mut out)?,
        Kind::OtterFit => run_otter(cfg, &mut out)?,
    }
    let manifest_path = out.path().join(MANIFEST_FILE);
    let manifest = RunManifest {
        config: render_config(cfg),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_secs: start.elapsed().as_secs_f64(),
        outputs: out.into_digests(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    std::fs::write(manifest_path, bytes)?;
    Ok(manifest)
}

fn num(v: f64) -> String {
    v.to_string()
}

#[derive(Serialize)]
struct CountReport {
    vertices: usize,
    edges: usize,
    connected: bool,
    spanning_trees: String,
    ln_spanning_trees: Option<f64>,
    ln_kostochka_upper: Option<f64>,
}

fn run_count(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), RunError> {
    let g = build_graph(cfg)?.into_graph();
    let count = count_spanning_trees(&g);
    let report = CountReport {
        vertices: g.n(),
        edges: g.edge_count(),
        connected: g.is_connected(),
        spanning_trees: count.to_string(),
        ln_spanning_trees: (count > BigUint::ZERO).then(|| ln_count(&count)),
        ln_kostochka_upper: kostochka_upper(&g).ok(),
    };
    out.write_json("count.json", &report)
}

fn run_census(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), RunError> {
    let g = build_graph(cfg)?.into_graph();
    let census = sample_census(&g, cfg.samples, cfg.seed)?;
    let total = census.total() as f64;
    let mut table = Table::new(&["canon_code", "count", "probability"]);
    let mut points = Vec::new();
    for (rank, (code, count)) in census.ranked().into_iter().enumerate() {
        let p = count as f64 / total;
        table.push(vec![code.to_string(), count.to_string(), num(p)]);
        points.push(((rank + 1) as f64, p));
    }
    out.write_csv("census.csv", &table)?;
    out.write_plotdata("census_probability.dat", &points)
}

fn run_balls_bins(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), RunError> {
    let h = build_graph(cfg)?.into_bipartite();
    let ks: Vec<usize> = (0..=cfg.k_max).collect();
    let counts = sample_counts(&h, &ks, cfg.samples, cfg.seed)?;
    let n = h.ny() as f64;

    let mut raw = Table::new(&["sample_index", "k", "I_k"]);
    for (i, row) in counts.iter().enumerate() {
        for (&k, &c) in ks.iter().zip(row) {
            raw.push(vec![i.to_string(), k.to_string(), c.to_string()]);
        }
    }
    out.write_csv("raw.csv", &raw)?;

    let m = counts.len() as f64;
    let mut summary = Table::new(&["k", "mean", "var", "exact_mean", "exact_var", "poisson_ref"]);
    let mut empirical = Vec::new();
    let mut reference = Vec::new();
    for (j, &k) in ks.iter().enumerate() {
        let mean = counts.iter().map(|r| r[j] as f64).sum::<f64>() / m;
        let var = if counts.len() > 1 {
            counts.iter().map(|r| (r[j] as f64 - mean).powi(2)).sum::<f64>() / (m - 1.0)
        } else {
            0.0
        };
        let exact_mean = expectation_im_f64(&h, k);
        let exact_var = if h.ny() <= cfg.variance_cap {
            num(variance_im_f64(&h, k))
        } else {
            "NA".to_string()
        };
        let poisson_ref = poisson_one(k) * n;
        summary.push(vec![k.to_string(), num(mean), num(var), num(exact_mean), exact_var, num(poisson_ref)]);
        empirical.push((k as f64, mean / n));
        reference.push((k as f64, poisson_one(k)));
    }
    out.write_csv("summary.csv", &summary)?;

    let mut tail = Table::new(&["k", "gamma", "samples", "hits", "frequency", "std_err"]);
    for &k in &ks {
        for &gamma in &cfg.gammas {
            let est = mc_tail_estimate(&h, k, gamma, cfg.samples, cfg.seed)?;
            tail.push(vec![
                k.to_string(),
                num(gamma),
                est.samples.to_string(),
                est.hits.to_string(),
                num(est.frequency),
                num(est.std_err),
            ]);
        }
    }
    out.write_csv("tail.csv", &tail)?;
    out.write_plotdata("empirical_fraction.dat", &empirical)?;
    out.write_plotdata("poisson_reference.dat", &reference)
}

#[derive(Serialize)]
struct BallsBinsBounds {
    k: usize,
    m: usize,
    delta: f64,
    gamma: f64,
    n: u64,
    delta_admissible: bool,
    asymptotic_only: bool,
    thm21_bound: Option<f64>,
    lemma23_band: Option<Band>,
    lemma24_sd_bound: Option<f64>,
    lemma25_band: Option<Band>,
}

#[derive(Serialize)]
struct BoundsOutput {
    balls_bins: Vec<BallsBinsBounds>,
    tree_copies: Option<BoundReport>,
}

fn run_bounds(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), RunError> {
    let b = &cfg.bounds;
    let mut balls_bins = Vec::new();
    for k in 0..=cfg.k_max {
        for m in 0..=k {
            for &gamma in &cfg.gammas {
                let p = BoundParams { k, m, delta: b.delta, gamma, n: b.n };
                balls_bins.push(BallsBinsBounds {
                    k,
                    m,
                    delta: b.delta,
                    gamma,
                    n: b.n,
                    delta_admissible: p.delta_admissible(),
                    asymptotic_only: p.asymptotic_only(),
                    thm21_bound: tail_bound_thm21(&p).ok(),
                    lemma23_band: expectation_band_lemma23(&p).ok(),
                    lemma24_sd_bound: variance_bound_lemma24(&p).ok(),
                    lemma25_band: median_band_lemma25(&p).ok(),
                });
            }
        }
    }
    let tree_copies = match b.leaves {
        Some(leaves) => Some(thm31_bound(b.n, leaves, b.d, b.delta).map_err(|e| match e {
            CoreError::BoundDomain(msg) => RunError::config(msg),
            other => other.into(),
        })?),
        None => None,
    };
    out.write_json("bounds.json", &BoundsOutput { balls_bins, tree_copies })
}

fn tree_counts(cfg: &ExperimentConfig) -> Result<BTreeMap<usize, Vec<stlab_core::TreeCanonCode>>, RunError> {
    (cfg.n_min..=cfg.n_max)
        .map(|n| {
            enumerate_unlabeled_trees(n)
                .map(|codes| (n, codes))
                .map_err(|e| RunError::config(e.to_string()))
        })
        .collect()
}

fn run_enumerate(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), RunError> {
    let all = tree_counts(cfg)?;
    let mut trees = Table::new(&["n", "canon_code", "aut_size", "leaves"]);
    let mut counts = Table::new(&["n", "count"]);
    for (n, codes) in &all {
        counts.push(vec![n.to_string(), codes.len().to_string()]);
        for code in codes {
            let t = code.to_tree()?;
            trees.push(vec![n.to_string(), code.to_string(), aut_size(&t).to_string(), leaf_count(&t).to_string()]);
        }
    }
    out.write_csv("trees.csv", &trees)?;
    out.write_csv("counts.csv", &counts)
}

#[derive(Serialize)]
struct OtterReport {
    n_range: [usize; 2],
    counts: Vec<String>,
    ratios: Vec<f64>,
    alpha_hat: f64,
    #[serde(rename = "C_hat")]
    c_hat: f64,
}

fn run_otter(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(), RunError> {
    let counts: BTreeMap<usize, BigUint> = tree_counts(cfg)?
        .into_iter()
        .map(|(n, codes)| (n, BigUint::from(codes.len())))
        .collect();
    let fit = otter_ratio_fit(&counts).map_err(|e| RunError::config(e.to_string()))?;
    let points: Vec<(f64, f64)> = fit
        .n_values
        .iter()
        .zip(&fit.ratios)
        .map(|(&n, &r)| (n as f64, r))
        .collect();
    let report = OtterReport {
        n_range: [cfg.n_min, cfg.n_max],
        counts: fit.counts.iter().map(BigUint::to_string).collect(),
        ratios: fit.ratios,
        alpha_hat: fit.alpha_hat,
        c_hat: fit.c_hat,
    };
    out.write_json("otter.json", &report)?;
    out.write_plotdata("ratios.dat", &points)
}
