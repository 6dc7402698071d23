//! Run configuration: a JSON file mirroring the command line, with flags
//! taking precedence over the file and the file over built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use meshbench::desc::{HksConfig, MeshHogConfig, SiftConfig, SpinConfig};
use meshbench::detect::{
    CurvatureField, HarrisConfig, MeshDogConfig, MserConfig, MserWeighting, Neighborhood,
    ScaleDogConfig,
};
use meshbench::eval::{EvalConfig, Rho};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    /// Worker threads; defaults to the machine's parallelism.
    pub jobs: Option<usize>,
    pub seed: u64,
    pub detectors: Vec<DetectorSel>,
    pub descriptors: Vec<DescriptorSel>,
    pub eval: EvalSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            manifest: None,
            out: None,
            cache: None,
            jobs: None,
            seed: 0,
            detectors: vec![
                DetectorSel::Harris3d(HarrisSel::default()),
                DetectorSel::MeshDog(MeshDogSel::default()),
                DetectorSel::MeshScaleDog(ScaleDogSel::default()),
                DetectorSel::ShapeMser(MserSel::default()),
            ],
            descriptors: vec![
                DescriptorSel::SpinImage(SpinSel::default()),
                DescriptorSel::LdSift(SiftSel::default()),
                DescriptorSel::MeshHog(HogSel::default()),
                DescriptorSel::HksDense(HksSel::default()),
            ],
            eval: EvalSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_slice(&bytes)
            .with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(0) = self.jobs {
            bail!("jobs must be at least 1");
        }
        let mut names: Vec<&str> = self.detectors.iter().map(DetectorSel::name).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            bail!("detector `{}` selected twice; outputs would collide", w[0]);
        }
        let mut pairs: Vec<String> = self.descriptors.iter().map(DescriptorSel::id).collect();
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
            bail!("descriptor `{}` selected twice; outputs would collide", w[0]);
        }
        for d in &self.descriptors {
            if let Some(det) = d.detector() {
                if !self.detectors.iter().any(|s| s.name() == det) {
                    bail!(
                        "descriptor `{}` is bound to detector `{det}`, which is not selected",
                        d.name()
                    );
                }
            }
        }
        self.eval.to_eval_config()?;
        Ok(())
    }

    /// Worker count to use, honoring the config and falling back to the
    /// machine.
    pub fn effective_jobs(&self) -> usize {
        self.jobs.unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        })
    }
}

/// Feature point detectors and the region detector, with their knobs.
/// The `name` field in JSON picks the variant.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum DetectorSel {
    Harris3d(HarrisSel),
    MeshDog(MeshDogSel),
    MeshScaleDog(ScaleDogSel),
    ShapeMser(MserSel),
}

impl DetectorSel {
    pub fn name(&self) -> &'static str {
        match self {
            DetectorSel::Harris3d(_) => "harris3d",
            DetectorSel::MeshDog(_) => "mesh-dog",
            DetectorSel::MeshScaleDog(_) => "mesh-scale-dog",
            DetectorSel::ShapeMser(_) => "shape-mser",
        }
    }

    /// Region detectors write `.regions` files; the rest write `.feat`.
    pub fn is_region(&self) -> bool {
        matches!(self, DetectorSel::ShapeMser(_))
    }

    /// Spectral modes this detector needs from the cache, if any.
    pub fn modes(&self) -> Option<usize> {
        match self {
            DetectorSel::ShapeMser(s) => Some(s.modes),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum NeighborhoodSel {
    Ring1,
    Ring2,
    Adaptive { delta: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct HarrisSel {
    pub neighborhood: NeighborhoodSel,
    pub target: usize,
}

impl Default for HarrisSel {
    fn default() -> Self {
        let d = HarrisConfig::default();
        HarrisSel {
            neighborhood: match d.neighborhood {
                Neighborhood::Ring1 => NeighborhoodSel::Ring1,
                Neighborhood::Ring2 => NeighborhoodSel::Ring2,
                Neighborhood::Adaptive { delta } => NeighborhoodSel::Adaptive { delta },
            },
            target: d.target,
        }
    }
}

impl HarrisSel {
    pub fn to_config(&self) -> HarrisConfig {
        HarrisConfig {
            neighborhood: match self.neighborhood {
                NeighborhoodSel::Ring1 => Neighborhood::Ring1,
                NeighborhoodSel::Ring2 => Neighborhood::Ring2,
                NeighborhoodSel::Adaptive { delta } => Neighborhood::Adaptive { delta },
            },
            target: self.target,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum CurvSel {
    Mean,
    Gaussian,
}

impl CurvSel {
    pub fn to_field(self) -> CurvatureField {
        match self {
            CurvSel::Mean => CurvatureField::Mean,
            CurvSel::Gaussian => CurvatureField::Gaussian,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct MeshDogSel {
    pub field: CurvSel,
    pub scales: usize,
    pub target: usize,
}

impl Default for MeshDogSel {
    fn default() -> Self {
        let d = MeshDogConfig::default();
        MeshDogSel {
            field: match d.field {
                CurvatureField::Mean => CurvSel::Mean,
                CurvatureField::Gaussian => CurvSel::Gaussian,
            },
            scales: d.scales,
            target: d.target,
        }
    }
}

impl MeshDogSel {
    pub fn to_config(&self) -> MeshDogConfig {
        MeshDogConfig {
            field: self.field.to_field(),
            scales: self.scales,
            target: self.target,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ScaleDogSel {
    pub levels: usize,
    pub target: usize,
}

impl Default for ScaleDogSel {
    fn default() -> Self {
        let d = ScaleDogConfig::default();
        ScaleDogSel { levels: d.levels, target: d.target }
    }
}

impl ScaleDogSel {
    pub fn to_config(&self) -> ScaleDogConfig {
        ScaleDogConfig { levels: self.levels, target: self.target }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum WeightingSel {
    VertexHks,
    EdgeInvHks,
    EdgeInvCommuteTime,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct MserSel {
    pub weighting: WeightingSel,
    /// Diffusion time; `None` derives it from λ₁.
    pub t: Option<f64>,
    pub delta: f64,
    pub min_area: f64,
    pub max_area: f64,
    /// Spectral modes to request from the cache.
    pub modes: usize,
}

impl Default for MserSel {
    fn default() -> Self {
        let d = MserConfig::default();
        MserSel {
            weighting: WeightingSel::VertexHks,
            t: None,
            delta: d.delta,
            min_area: d.min_area,
            max_area: d.max_area,
            modes: 30,
        }
    }
}

impl MserSel {
    pub fn to_config(&self) -> MserConfig {
        MserConfig {
            weighting: match self.weighting {
                WeightingSel::VertexHks => MserWeighting::VertexHks { t: self.t },
                WeightingSel::EdgeInvHks => MserWeighting::EdgeInvHks { t: self.t },
                WeightingSel::EdgeInvCommuteTime => MserWeighting::EdgeInvCommuteTime,
            },
            delta: self.delta,
            min_area: self.min_area,
            max_area: self.max_area,
        }
    }
}

/// Descriptor selections. Feature-bound descriptors name the detector
/// whose points they describe; `hks-dense` covers every vertex.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum DescriptorSel {
    SpinImage(SpinSel),
    LdSift(SiftSel),
    MeshHog(HogSel),
    HksDense(HksSel),
}

impl DescriptorSel {
    pub fn name(&self) -> &'static str {
        match self {
            DescriptorSel::SpinImage(_) => "spin-image",
            DescriptorSel::LdSift(_) => "ld-sift",
            DescriptorSel::MeshHog(_) => "mesh-hog",
            DescriptorSel::HksDense(_) => "hks-dense",
        }
    }

    /// The detector whose features this descriptor is computed on;
    /// `None` for dense descriptors.
    pub fn detector(&self) -> Option<&str> {
        match self {
            DescriptorSel::SpinImage(s) => Some(&s.detector),
            DescriptorSel::LdSift(s) => Some(&s.detector),
            DescriptorSel::MeshHog(s) => Some(&s.detector),
            DescriptorSel::HksDense(_) => None,
        }
    }

    /// Output-file identity: `<descriptor>` or `<descriptor>@<detector>`.
    pub fn id(&self) -> String {
        match self.detector() {
            Some(det) => format!("{}@{det}", self.name()),
            None => self.name().to_string(),
        }
    }

    pub fn modes(&self) -> Option<usize> {
        match self {
            DescriptorSel::HksDense(s) => Some(s.modes),
            _ => None,
        }
    }
}

fn default_detector() -> String {
    "harris3d".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SpinSel {
    pub detector: String,
    pub alpha_bins: usize,
    pub beta_bins: usize,
    pub support_scales: f64,
    pub default_scale: Option<f64>,
}

impl Default for SpinSel {
    fn default() -> Self {
        let d = SpinConfig::default();
        SpinSel {
            detector: default_detector(),
            alpha_bins: d.alpha_bins,
            beta_bins: d.beta_bins,
            support_scales: d.support_scales,
            default_scale: d.default_scale,
        }
    }
}

impl SpinSel {
    pub fn to_config(&self) -> SpinConfig {
        SpinConfig {
            alpha_bins: self.alpha_bins,
            beta_bins: self.beta_bins,
            support_scales: self.support_scales,
            default_scale: self.default_scale,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SiftSel {
    pub detector: String,
    pub grid: usize,
    pub spatial_bins: usize,
    pub orientation_bins: usize,
    pub support_scales: f64,
    pub default_scale: Option<f64>,
    pub clamp: f64,
}

impl Default for SiftSel {
    fn default() -> Self {
        let d = SiftConfig::default();
        SiftSel {
            detector: default_detector(),
            grid: d.grid,
            spatial_bins: d.spatial_bins,
            orientation_bins: d.orientation_bins,
            support_scales: d.support_scales,
            default_scale: d.default_scale,
            clamp: d.clamp,
        }
    }
}

impl SiftSel {
    pub fn to_config(&self) -> SiftConfig {
        SiftConfig {
            grid: self.grid,
            spatial_bins: self.spatial_bins,
            orientation_bins: self.orientation_bins,
            support_scales: self.support_scales,
            default_scale: self.default_scale,
            clamp: self.clamp,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct HogSel {
    pub detector: String,
    /// Scalar field whose surface gradients are binned.
    pub field: CurvSel,
    pub polar_bins: usize,
    pub orientation_bins: usize,
    pub support_scales: f64,
    pub default_radius_frac: f64,
}

impl Default for HogSel {
    fn default() -> Self {
        let d = MeshHogConfig::default();
        HogSel {
            detector: default_detector(),
            field: CurvSel::Mean,
            polar_bins: d.polar_bins,
            orientation_bins: d.orientation_bins,
            support_scales: d.support_scales,
            default_radius_frac: d.default_radius_frac,
        }
    }
}

impl HogSel {
    pub fn to_config(&self) -> MeshHogConfig {
        MeshHogConfig {
            polar_bins: self.polar_bins,
            orientation_bins: self.orientation_bins,
            support_scales: self.support_scales,
            default_radius_frac: self.default_radius_frac,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct HksSel {
    pub modes: usize,
    pub n_times: usize,
    pub normalize: bool,
}

impl Default for HksSel {
    fn default() -> Self {
        let d = HksConfig::default();
        HksSel { modes: 30, n_times: d.n_times, normalize: d.normalize }
    }
}

impl HksSel {
    pub fn to_config(&self) -> HksConfig {
        HksConfig { n_times: self.n_times, times: None, normalize: self.normalize }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    /// Acceptance radius in shape units; exclusive with `rho_percent_diam`.
    pub rho: Option<f64>,
    /// Acceptance radius as a percentage of the null diameter.
    pub rho_percent_diam: Option<f64>,
    /// Region overlap threshold.
    pub overlap: f64,
    /// ROC threshold grid: `tau_steps + 1` values from 0 to `tau_max`.
    pub tau_max: f64,
    pub tau_steps: usize,
    pub normalize: bool,
    pub dense_sample: usize,
    pub sample_seed: u64,
    /// Radii (percent of diameter) for the repeatability-vs-distance curve.
    pub rho_curve_percents: Vec<f64>,
    /// Thresholds for the region repeatability-vs-overlap curve.
    pub overlap_curve: Vec<f64>,
}

impl Default for EvalSettings {
    fn default() -> Self {
        let d = EvalConfig::default();
        EvalSettings {
            rho: None,
            rho_percent_diam: None,
            overlap: d.overlap,
            tau_max: 2.0,
            tau_steps: 100,
            normalize: d.normalize,
            dense_sample: d.dense_sample,
            sample_seed: d.sample_seed,
            rho_curve_percents: (1..=10).map(|i| i as f64 * 0.25).collect(),
            overlap_curve: (1..=9).map(|i| i as f64 * 0.1).collect(),
        }
    }
}

impl EvalSettings {
    pub fn to_eval_config(&self) -> Result<EvalConfig> {
        let rho = match (self.rho, self.rho_percent_diam) {
            (Some(_), Some(_)) => bail!("set either rho or rho-percent-diam, not both"),
            (Some(r), None) => Rho::Absolute(r),
            (None, Some(p)) => Rho::PercentDiam(p),
            (None, None) => EvalConfig::default().rho,
        };
        if self.tau_steps == 0 || !(self.tau_max > 0.0 && self.tau_max.is_finite()) {
            bail!("ROC grid needs tau_max > 0 and at least one step");
        }
        let cfg = EvalConfig {
            rho,
            overlap: self.overlap,
            taus: (0..=self.tau_steps)
                .map(|i| i as f64 * self.tau_max / self.tau_steps as f64)
                .collect(),
            normalize: self.normalize,
            dense_sample: self.dense_sample,
            sample_seed: self.sample_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_names_are_rejected() {
        let err = serde_json::from_str::<DetectorSel>(r#"{"name": "susan"}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<DescriptorSel>(r#"{"name": "shape-context"}"#);
        assert!(err.is_err());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let sel: DetectorSel =
            serde_json::from_str(r#"{"name": "harris3d", "target": 99}"#).unwrap();
        match sel {
            DetectorSel::Harris3d(h) => {
                assert_eq!(h.target, 99);
                assert_eq!(h.neighborhood, HarrisSel::default().neighborhood);
            }
            _ => panic!("wrong variant"),
        }
    }

    #[test]
    fn dangling_descriptor_detector_fails_validation() {
        let mut cfg = RunConfig::default();
        cfg.detectors.retain(|d| d.name() != "harris3d");
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rho_settings_are_exclusive() {
        let mut s = EvalSettings::default();
        s.rho = Some(0.3);
        s.rho_percent_diam = Some(1.0);
        assert!(s.to_eval_config().is_err());
        s.rho_percent_diam = None;
        assert!(matches!(s.to_eval_config().unwrap().rho, Rho::Absolute(r) if r == 0.3));
    }

    #[test]
    fn tau_grid_spans_zero_to_max() {
        let cfg = EvalSettings::default().to_eval_config().unwrap();
        assert_eq!(cfg.taus.first(), Some(&0.0));
        assert_eq!(cfg.taus.last(), Some(&2.0));
        assert_eq!(cfg.taus.len(), 101);
    }
}
