use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fcpi_core::equivalence::{SearchBudget, DEFAULT_HOM_BUDGET};
use fcpi_core::monodromy::ROOT_TOLERANCE;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

/// Values readable from a config file. Every field is optional; flags win.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub label: Option<String>,
    pub root_tol: Option<f64>,
    pub residual_tol: Option<f64>,
    pub match_tol: Option<f64>,
    pub consequence_depth: Option<usize>,
    pub conjugator_length: Option<usize>,
    pub search_nodes: Option<usize>,
    pub hom_budget: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Fully resolved settings of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub n: Option<usize>,
    pub label: Option<String>,
    /// Isolation width of the critical values.
    pub root_tol: f64,
    /// Largest accepted `|P(λ, x)|` on tracked fibers.
    pub residual_tol: f64,
    /// Agreement required against the reference decimals.
    pub match_tol: f64,
    pub consequence_depth: usize,
    pub conjugator_length: usize,
    pub search_nodes: usize,
    pub hom_budget: u64,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn defaults(command: &str) -> Self {
        let b = SearchBudget::default();
        RunConfig {
            command: command.into(),
            n: None,
            label: None,
            root_tol: ROOT_TOLERANCE,
            residual_tol: 1e-8,
            match_tol: 1e-8,
            consequence_depth: b.max_depth,
            conjugator_length: b.max_conjugator,
            search_nodes: b.max_nodes,
            hom_budget: DEFAULT_HOM_BUDGET,
            out_dir: None,
            format: Format::Json,
            jobs: None,
        }
    }

    /// Overlays `f` on the current values.
    pub fn merge(&mut self, f: FileConfig) {
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = f.$field { self.$field = v; } )* };
        }
        take!(root_tol, residual_tol, match_tol, consequence_depth, conjugator_length, search_nodes, hom_budget, format);
        if f.n.is_some() {
            self.n = f.n;
        }
        if f.label.is_some() {
            self.label = f.label;
        }
        if f.out_dir.is_some() {
            self.out_dir = f.out_dir;
        }
        if f.jobs.is_some() {
            self.jobs = f.jobs;
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("root_tol", self.root_tol), ("residual_tol", self.residual_tol), ("match_tol", self.match_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive, got {v}");
            }
        }
        for (name, v) in [
            ("consequence_depth", self.consequence_depth),
            ("conjugator_length", self.conjugator_length),
            ("search_nodes", self.search_nodes),
        ] {
            if v == 0 {
                bail!("{name} must be positive");
            }
        }
        if self.hom_budget == 0 {
            bail!("hom_budget must be positive");
        }
        if self.jobs == Some(0) {
            bail!("jobs must be positive");
        }
        Ok(())
    }

    pub fn budget(&self) -> SearchBudget {
        SearchBudget {
            max_conjugator: self.conjugator_length,
            max_depth: self.consequence_depth,
            max_nodes: self.search_nodes,
        }
    }

    /// SHA-256 of the settings that can change a result; output location,
    /// format and thread count are excluded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
