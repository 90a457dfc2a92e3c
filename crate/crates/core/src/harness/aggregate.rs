use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guidance::GuidanceMode;
use crate::harness::run::{read_manifest, read_metrics, MANIFEST};

/// One row of a learning-curve table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub task: String,
    pub step: u64,
    pub method: String,
    pub mean: f64,
    pub std: f64,
}

/// Episode returns of one seed, keyed by task and method label.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSeries {
    pub task: String,
    pub method: String,
    /// `(global_step, return)` in episode order.
    pub episodes: Vec<(u64, f64)>,
}

/// Rows of a single `(task, method)` curve, in step order.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub task: String,
    pub method: String,
    pub points: Vec<(u64, f64, f64)>,
}

impl Curve {
    /// Mean of the mean curve over its grid: area under the curve divided
    /// by the covered step range.
    pub fn auc(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.iter().map(|p| p.1).sum::<f64>() / self.points.len() as f64
    }

    pub fn final_mean(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.1)
    }
}

/// Groups table rows into curves, keeping first-seen order.
pub fn curves(rows: &[CurvePoint]) -> Vec<Curve> {
    let mut out: Vec<Curve> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|c| c.task == r.task && c.method == r.method) {
            Some(c) => c.points.push((r.step, r.mean, r.std)),
            None => out.push(Curve {
                task: r.task.clone(),
                method: r.method.clone(),
                points: vec![(r.step, r.mean, r.std)],
            }),
        }
    }
    out
}

fn rolling_mean(episodes: &[(u64, f64)], window: usize) -> Vec<(u64, f64)> {
    let window = window.max(1);
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(episodes.len());
    for (i, &(step, r)) in episodes.iter().enumerate() {
        sum += r;
        if i >= window {
            sum -= episodes[i - window].1;
        }
        let n = (i + 1).min(window);
        // Recompute exactly now and then so the running sum cannot drift.
        let mean = if i % 4096 == 4095 {
            let lo = (i + 1).saturating_sub(window);
            sum = episodes[lo..=i].iter().map(|e| e.1).sum();
            sum / n as f64
        } else {
            sum / n as f64
        };
        out.push((step, mean));
    }
    out
}

fn method_rank(method: &str) -> usize {
    GuidanceMode::ALL
        .iter()
        .position(|m| method.starts_with(m.method_name()) && !method[m.method_name().len()..].starts_with('-'))
        .unwrap_or(GuidanceMode::ALL.len())
}

/// Aligns seeds on a common step grid and averages them per method.
///
/// Each seed is smoothed with a rolling mean over `window` episodes, then
/// sampled by last-value interpolation at multiples of `interval` inside
/// the step range every seed of the task covers. The spread is the
/// population standard deviation across seeds.
pub fn aggregate(series: &[SeedSeries], window: usize, interval: u64) -> Result<Vec<CurvePoint>> {
    if series.is_empty() {
        return Err(Error::Usage("no runs to aggregate".into()));
    }
    if interval == 0 {
        return Err(Error::Config("aggregation interval must be positive".into()));
    }
    if let Some(s) = series.iter().find(|s| s.episodes.is_empty()) {
        return Err(Error::Usage(format!("a {} run of {} has no finished episodes", s.method, s.task)));
    }
    let mut tasks: BTreeMap<&str, Vec<&SeedSeries>> = BTreeMap::new();
    for s in series {
        tasks.entry(&s.task).or_default().push(s);
    }

    let mut rows = Vec::new();
    for (task, runs) in tasks {
        let lo = runs.iter().map(|s| s.episodes[0].0).max().unwrap_or(0);
        let hi = runs.iter().map(|s| s.episodes.last().map_or(0, |e| e.0)).min().unwrap_or(0);
        if lo > hi {
            return Err(Error::Usage(format!("runs of {task} share no step range")));
        }
        let mut grid: Vec<u64> = (lo.div_ceil(interval)..=hi / interval).map(|k| k * interval).collect();
        if grid.is_empty() {
            grid.push(hi);
        }

        let mut methods: Vec<&str> = runs.iter().map(|s| s.method.as_str()).collect();
        methods.sort_by_key(|m| (method_rank(m), m.to_string()));
        methods.dedup();
        for method in methods {
            let smoothed: Vec<Vec<(u64, f64)>> = runs
                .iter()
                .filter(|s| s.method == method)
                .map(|s| rolling_mean(&s.episodes, window))
                .collect();
            let mut cursors = vec![0usize; smoothed.len()];
            for &step in &grid {
                let mut values = Vec::with_capacity(smoothed.len());
                for (seed, cur) in smoothed.iter().zip(cursors.iter_mut()) {
                    while *cur + 1 < seed.len() && seed[*cur + 1].0 <= step {
                        *cur += 1;
                    }
                    values.push(seed[*cur].1);
                }
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                rows.push(CurvePoint {
                    task: task.to_string(),
                    step,
                    method: method.to_string(),
                    mean,
                    std: var.sqrt(),
                });
            }
        }
    }
    Ok(rows)
}

/// Run directories under `path`: itself if it holds a manifest, otherwise
/// every descendant that does.
pub fn find_runs(path: &Path) -> Result<Vec<PathBuf>> {
    if path.join(MANIFEST).is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let entries = fs::read_dir(path).map_err(|e| Error::io(path, e))?;
    let mut children: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    children.sort();
    let mut out = Vec::new();
    for child in children {
        out.extend(find_runs(&child)?);
    }
    Ok(out)
}

/// Loads runs and aggregates them. Ablation tags are appended to the
/// method label. `window` and `interval` default to the first run's config.
pub fn aggregate_dirs(paths: &[PathBuf], window: Option<usize>, interval: Option<u64>) -> Result<Vec<CurvePoint>> {
    let mut dirs = Vec::new();
    for p in paths {
        dirs.extend(find_runs(p)?);
    }
    if dirs.is_empty() {
        return Err(Error::Usage("no run directories found".into()));
    }
    let mut series = Vec::with_capacity(dirs.len());
    let mut defaults = None;
    for dir in &dirs {
        let manifest = read_manifest(dir)?;
        defaults.get_or_insert((manifest.config.smoothing_window, manifest.config.eval_interval));
        let mut method = manifest.method().to_string();
        for (k, v) in &manifest.tags {
            method.push_str(&format!(" {k}={v}"));
        }
        series.push(SeedSeries {
            task: manifest.config.task().id(),
            method,
            episodes: read_metrics(dir)?.iter().map(|r| (r.global_step, r.episode_return)).collect(),
        });
    }
    let (w, i) = defaults.unwrap_or((100, 1));
    aggregate(&series, window.unwrap_or(w), interval.unwrap_or(i))
}

pub fn curves_csv(rows: &[CurvePoint]) -> Result<Vec<u8>> {
    if rows.is_empty() {
        return Err(Error::Usage("refusing to write an empty curve table".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Config(format!("csv buffer: {e}")))
}

pub fn write_curves(path: &Path, rows: &[CurvePoint]) -> Result<()> {
    let bytes = curves_csv(rows)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_curves(path: &Path) -> Result<Vec<CurvePoint>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
