//! Shared plumbing: resolved run context, shape naming, worker pools, and
//! per-shape failure accounting.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use meshbench::cache::{resolve_cache_dir, SpectralCache};
use meshbench::transform::Manifest;

use crate::config::RunConfig;

/// One shape the pipeline stages walk over: the null shape or one
/// transformed entry.
#[derive(Debug, Clone)]
pub struct ShapeRef {
    /// File-name stem for outputs: `null` or `<class>.<strength>`.
    pub name: String,
    pub mesh_path: PathBuf,
    /// Groundtruth file; `None` only for the null shape.
    pub corr_path: Option<PathBuf>,
    pub class: Option<String>,
    pub strength: Option<u8>,
}

/// Null first, then entries in manifest order. Fails when two entries
/// would share an output name.
pub fn manifest_shapes(manifest: &Manifest) -> Result<Vec<ShapeRef>> {
    let mut shapes = vec![ShapeRef {
        name: "null".to_string(),
        mesh_path: manifest.null.clone(),
        corr_path: None,
        class: None,
        strength: None,
    }];
    for e in &manifest.entries {
        shapes.push(ShapeRef {
            name: format!("{}.{}", e.class, e.strength),
            mesh_path: e.mesh.clone(),
            corr_path: Some(e.corr.clone()),
            class: Some(e.class.clone()),
            strength: Some(e.strength),
        });
    }
    let mut names: Vec<&str> = shapes.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        bail!("manifest lists `{}` twice; outputs would collide", w[0]);
    }
    Ok(shapes)
}

/// Everything a pipeline stage needs besides its own arguments.
pub struct Run {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub pool: rayon::ThreadPool,
}

impl Run {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        let out = cfg
            .out
            .clone()
            .ok_or_else(|| anyhow::anyhow!("no output directory (give --out)"))?;
        std::fs::create_dir_all(&out)
            .with_context(|| format!("creating {}", out.display()))?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.effective_jobs())
            .build()
            .context("building the worker pool")?;
        Ok(Run { cfg, out, pool })
    }

    pub fn manifest(&self) -> Result<Manifest> {
        let path = self
            .cfg
            .manifest
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("no manifest (give --manifest)"))?;
        Ok(Manifest::load(path)?)
    }

    /// The cache, or a throwaway one under the output directory when none
    /// was configured (spectral stages always need somewhere to look).
    pub fn cache_or_local(&self) -> Result<SpectralCache> {
        match resolve_cache_dir(self.cfg.cache.as_deref()) {
            Some(dir) => Ok(SpectralCache::new(dir)?),
            None => Ok(SpectralCache::new(self.out.join("spectral-cache"))?),
        }
    }

    pub fn report_cache_traffic(&self, cache: &SpectralCache) {
        let (h, m) = (cache.hits(), cache.misses());
        if h + m > 0 {
            eprintln!(
                "spectral cache: {h} hit{}, {m} miss{}{}",
                if h == 1 { "" } else { "s" },
                if m == 1 { "" } else { "es" },
                if cache.write_failures() > 0 {
                    format!(", {} entries failed to persist", cache.write_failures())
                } else {
                    String::new()
                }
            );
        }
    }
}

/// Failures collected across parallel per-shape work. The run finishes the
/// remaining shapes and reports these at the end.
#[derive(Debug, Default)]
pub struct Failures {
    items: Vec<(String, String)>,
}

impl Failures {
    pub fn record(&mut self, shape: &str, err: &anyhow::Error) {
        self.items.push((shape.to_string(), format!("{err:#}")));
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    /// Prints one line per failure, sorted by shape, and says how many
    /// succeeded.
    pub fn summarize(&mut self, done: usize) {
        self.items.sort();
        for (shape, err) in &self.items {
            eprintln!("FAILED {shape}: {err}");
        }
        if !self.items.is_empty() {
            eprintln!("{done} shape(s) completed, {} failed", self.items.len());
        }
    }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_bytes(path, text.as_bytes())
}
