//! Run configuration: a JSON or TOML file, paths relative to the file itself.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use tlrrt::bench::Mode;
use tlrrt::bias::BiasParams;
use tlrrt::buchi::{ltl_to_nba, parse_hoa_with_map, ApBinding, Nba};
use tlrrt::formula::{parse_ltl, parse_prop, PropFormula};
use tlrrt::geometry::{Point, Workspace};
use tlrrt::rrt::RrtParams;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Environment JSON.
    pub environment: PathBuf,
    /// Inline LTL formula.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    /// File holding the LTL formula.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula_file: Option<PathBuf>,
    /// HOA automaton used instead of a formula.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hoa: Option<PathBuf>,
    /// JSON list of `{"name": .., "atom": "pi(i,j)"}` bindings for `hoa`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ap_map: Option<PathBuf>,
    pub start: Vec<Point>,
    /// Conjunctions that may not be required together (scatter tasks).
    #[serde(default)]
    pub subformulas: Vec<String>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub rrt: RrtParams,
    #[serde(default)]
    pub bias: BiasParams,
}

/// A loaded configuration with its inputs resolved.
pub struct Loaded {
    pub config: RunConfig,
    pub ws: Workspace,
    /// Automaton as given, used for verification.
    pub nba: Nba,
    /// Automaton after workspace and subformula pruning, used for planning.
    pub pruned: Nba,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<RunConfig> {
        let text = read(path)?;
        let mut cfg: RunConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?,
            _ => serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?,
        };
        let base = path.parent().unwrap_or(Path::new("."));
        let rel = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rel(&mut cfg.environment);
        cfg.formula_file.as_mut().map(rel);
        cfg.hoa.as_mut().map(rel);
        cfg.ap_map.as_mut().map(rel);
        Ok(cfg)
    }

    pub fn workspace(&self) -> Result<Workspace> {
        Workspace::from_json(&read(&self.environment)?).with_context(|| format!("invalid environment {}", self.environment.display()))
    }

    pub fn subformulas(&self) -> Result<Vec<PropFormula>> {
        self.subformulas.iter().map(|s| parse_prop(s).with_context(|| format!("invalid subformula `{s}`"))).collect()
    }

    pub fn automaton(&self, ws: &Workspace) -> Result<Nba> {
        let bounds = (ws.n_robots() as u32, ws.n_regions() as u32);
        match (&self.formula, &self.formula_file, &self.hoa) {
            (Some(text), None, None) => translate(text, bounds),
            (None, Some(path), None) => translate(read(path)?.trim(), bounds),
            (None, None, Some(path)) => {
                let bindings: Vec<ApBinding> = match &self.ap_map {
                    Some(m) => serde_json::from_str(&read(m)?).with_context(|| format!("invalid AP map {}", m.display()))?,
                    None => Vec::new(),
                };
                let nba = parse_hoa_with_map(&read(path)?, &bindings).with_context(|| format!("invalid HOA {}", path.display()))?;
                for a in nba.atoms() {
                    a.check_bounds(bounds.0, bounds.1)?;
                }
                Ok(nba)
            }
            _ => bail!("exactly one of `formula`, `formula_file` and `hoa` must be given"),
        }
    }

    pub fn load(self) -> Result<Loaded> {
        self.rrt.validate().map_err(anyhow::Error::msg).context("invalid rrt parameters")?;
        self.bias.validate().map_err(anyhow::Error::msg).context("invalid bias parameters")?;
        let ws = self.workspace()?;
        if self.start.len() != ws.n_robots() {
            bail!("start has {} robots, environment expects {}", self.start.len(), ws.n_robots());
        }
        if !ws.joint_state_valid(&self.start) {
            bail!("start configuration is not free and separated");
        }
        let nba = self.automaton(&ws)?;
        let mut pruned = nba.prune(|a, b| ws.regions_disjoint(a, b));
        let xis = self.subformulas()?;
        if !xis.is_empty() {
            pruned = pruned.prune_multi_subformula(&xis);
        }
        Ok(Loaded {
            config: self,
            ws,
            nba,
            pruned,
        })
    }
}

pub fn translate(text: &str, (n_robots, n_regions): (u32, u32)) -> Result<Nba> {
    let f = parse_ltl(text).with_context(|| format!("invalid formula `{text}`"))?;
    f.check_bounds(n_robots, n_regions)?;
    Ok(ltl_to_nba(&f)?)
}
