use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use wrom::experiments::{Figure, Panel, Preset, TrainingSize};
use wrom::greedy::GreedyWeight;
use wrom::pod::DEFAULT_TOL_REL;
use wrom::stochastics::BetaBox;
use wrom::training::{PoolKind, Variant};

use crate::error::CliError;

/// Full configuration of one run. Every field has a default, so a config
/// file only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `K4_b10`, `K9_b10`, `K9_b75` or `custom`.
    pub case: String,
    /// Custom case only.
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Subdivisions per side; 16 at `K = 4` and 18 at `K = 9` when unset.
    pub mesh: Option<usize>,
    pub variant: Option<Variant>,
    pub samples: Option<usize>,
    pub level: Option<usize>,
    pub interior_target: Option<usize>,
    /// Preset training-set size (1 or 2).
    pub set: Option<usize>,
    pub pool: PoolKind,
    pub weight: GreedyWeight,
    pub n_t: Option<usize>,
    pub greedy_tolerance: Option<f64>,
    pub n_max: usize,
    pub tol_rel: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub n_list: Option<Vec<usize>>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub seed: u64,
    /// Output directory; `out` when unset.
    pub out: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub figure: Option<Figure>,
    pub panel: Panel,
    pub y: Option<Vec<f64>>,
    pub family: Option<String>,
    pub q: Option<usize>,
    pub smolyak: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            case: "K4_b10".into(),
            k: None,
            alpha: None,
            beta: None,
            mesh: None,
            variant: None,
            samples: None,
            level: None,
            interior_target: None,
            set: None,
            pool: PoolKind::Distribution,
            weight: GreedyWeight::SqrtDensity,
            n_t: None,
            greedy_tolerance: None,
            n_max: 20,
            tol_rel: DEFAULT_TOL_REL,
            m: wrom::evaluation::DEFAULT_M,
            n_list: None,
            n: None,
            seed: 0,
            out: None,
            model: None,
            figure: None,
            panel: Panel::Left,
            y: None,
            family: None,
            q: None,
            smolyak: false,
        }
    }
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub mesh: Option<usize>,
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub interior_target: Option<usize>,
    #[arg(long)]
    pub set: Option<usize>,
    #[arg(long)]
    pub pool: Option<String>,
    #[arg(long)]
    pub weight: Option<String>,
    #[arg(long)]
    pub n_t: Option<usize>,
    #[arg(long)]
    pub greedy_tolerance: Option<f64>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub tol_rel: Option<f64>,
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Comma-separated list of reduced dimensions.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub panel: Option<String>,
    /// Comma-separated parameter point.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<f64>>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub smolyak: bool,
}

fn parse<T: std::str::FromStr<Err = wrom::Error>>(s: &str) -> Result<T, CliError> {
    s.parse::<T>().map_err(CliError::from)
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn resolve(args: &ConfigArgs) -> Result<Self, CliError> {
        let mut c = match &args.config {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = &args.$field { c.$field = Some(v.clone()); } )* };
        }
        set!(k, alpha, beta, mesh, samples, level, interior_target, set, n_t, greedy_tolerance, n_list, n, out, model, y, family, q);
        if let Some(v) = &args.case {
            c.case = v.clone();
        }
        if let Some(v) = &args.variant {
            c.variant = Some(parse(v)?);
        }
        if let Some(v) = &args.pool {
            c.pool = parse(v)?;
        }
        if let Some(v) = &args.weight {
            c.weight = parse(v)?;
        }
        if let Some(v) = &args.panel {
            c.panel = parse(v)?;
        }
        if let Some(v) = args.n_max {
            c.n_max = v;
        }
        if let Some(v) = args.tol_rel {
            c.tol_rel = v;
        }
        if let Some(v) = args.m {
            c.m = v;
        }
        if let Some(v) = args.seed {
            c.seed = v;
        }
        if args.smolyak {
            c.smolyak = true;
        }
        Ok(c)
    }

    pub fn preset(&self) -> Result<Option<Preset>, CliError> {
        if self.case.eq_ignore_ascii_case("custom") {
            Ok(None)
        } else {
            Ok(Some(parse(&self.case)?))
        }
    }

    /// Parameter dimension and distribution of the configured case.
    pub fn distribution(&self) -> Result<BetaBox, CliError> {
        match self.preset()? {
            Some(p) => Ok(p.distribution()),
            None => {
                let k = self.k.ok_or_else(|| CliError::Config("custom case needs K".into()))?;
                let a = self.alpha.ok_or_else(|| CliError::Config("custom case needs alpha".into()))?;
                let b = self.beta.ok_or_else(|| CliError::Config("custom case needs beta".into()))?;
                Ok(BetaBox::symmetric(k, a, b)?)
            }
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn mesh_for(&self, k: usize) -> usize {
        self.mesh.unwrap_or(if k == 4 { 16 } else { 18 })
    }

    /// Explicit size flags win over the preset set.
    pub fn training_size(&self, variant: Variant, k: usize) -> Result<TrainingSize, CliError> {
        let explicit = [
            self.samples.map(TrainingSize::Samples),
            self.level.map(TrainingSize::Level),
            self.interior_target.map(TrainingSize::InteriorTarget),
        ];
        let given: Vec<TrainingSize> = explicit.into_iter().flatten().collect();
        match given.as_slice() {
            [one] => Ok(*one),
            [] => Ok(wrom::experiments::table_size(k, variant, self.set.unwrap_or(1))?),
            _ => Err(CliError::Config("give at most one of samples, level, interior_target".into())),
        }
    }

    pub fn n_values(&self) -> Vec<usize> {
        self.n_list.clone().unwrap_or_else(|| (1..=self.n_max).collect())
    }
}
