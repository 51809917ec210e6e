use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Filter,
    Dispersion,
    Converge,
    Spectralfn,
    Lrcheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Filter => "filter",
            Command::Dispersion => "dispersion",
            Command::Converge => "converge",
            Command::Spectralfn => "spectralfn",
            Command::Lrcheck => "lrcheck",
        }
    }

    fn is_mps(&self) -> bool {
        matches!(self, Command::Dispersion | Command::Converge)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        <Command as clap::ValueEnum>::from_str(s, true).map_err(|_| CliError::Config(format!("unknown command `{s}`")))
    }
}

/// Everything a run depends on. Unset fields take per-command defaults in
/// [`RunConfig::resolve`]; the resolved form is what goes into the metadata.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub model: Option<String>,
    /// `name=value` pairs separated by commas, e.g. `g=2`
    pub params: Option<String>,
    pub sites: Option<usize>,
    pub momentum_index: Option<usize>,
    /// momenta such as `pi`, `0.4pi`, `-pi/3`, `1.25`
    pub p: Option<Vec<String>>,
    pub alpha: Option<usize>,
    /// `sz`, `sz0*sx1`, or `random<k>` for a seeded random Hermitian k-site operator
    pub op: Option<String>,
    pub op_b: Option<String>,
    pub lmax: Option<usize>,
    /// explicit radii for `filter`, overriding 1..=lmax
    pub ells: Option<Vec<usize>>,
    pub pgrid: Option<usize>,
    pub levels: Option<usize>,
    pub mu: Option<f64>,
    pub c: Option<f64>,
    pub delta_e: Option<f64>,
    pub eps: Option<f64>,
    pub omega_points: Option<usize>,
    pub dist: Option<Vec<usize>>,
    pub times: Option<Vec<f64>>,
    /// Lanczos with this many states per sector instead of full diagonalization
    pub lowest: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub meta: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("bad config file: {e}")))
    }

    /// Config file by extension: `.json` is a metadata file written by a previous run.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_metadata(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_metadata(text: &str) -> Result<Self, CliError> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad metadata: {e}")))?;
        let cfg = v.get("config").ok_or_else(|| CliError::Config("metadata has no `config` entry".into()))?;
        serde_json::from_value(cfg.clone()).map_err(|e| CliError::Config(format!("bad metadata config: {e}")))
    }

    /// Fields set in `other` win.
    pub fn merged(&self, other: &RunConfig) -> RunConfig {
        let mut out = self.clone();
        overlay!(
            out, other, command, model, params, sites, momentum_index, p, alpha, op, op_b, lmax, ells, pgrid, levels, mu, c,
            delta_e, eps, omega_points, dist, times, lowest, seed, out, meta
        );
        out
    }

    /// Fills per-command defaults and validates. Output paths are left as given.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let cmd = self.command.ok_or_else(|| CliError::Config("no command given".into()))?;
        let mut r = self.clone();
        let model = r.model.clone().unwrap_or_else(|| if cmd.is_mps() { "aklt" } else { "tfim" }.into());
        let kind: quasix_core::models::ModelKind = model.parse().map_err(|e: quasix_core::Error| CliError::Config(e.to_string()))?;
        if cmd.is_mps() && kind != quasix_core::models::ModelKind::Aklt {
            return Err(CliError::Config(format!("`{cmd}` runs on the exact AKLT tensor; got --model {model}")));
        }
        r.model = Some(kind.to_string());
        let default_params = match kind {
            quasix_core::models::ModelKind::Tfim => "g=2",
            quasix_core::models::ModelKind::Heisenberg => "j=1",
            quasix_core::models::ModelKind::Aklt => "",
        };
        r.params = Some(r.params.clone().unwrap_or_else(|| default_params.into()));
        parse_params(kind, r.params.as_deref().unwrap())?;
        let default_sites = match cmd {
            Command::Lrcheck => 10,
            Command::Spectrum | Command::Spectralfn => 8,
            _ => 12,
        };
        r.sites = Some(r.sites.unwrap_or(default_sites));
        r.alpha = Some(r.alpha.unwrap_or(0));
        r.op = Some(r.op.clone().unwrap_or_else(|| "sz".into()));
        r.op_b = Some(r.op_b.clone().unwrap_or_else(|| "sz".into()));
        r.lmax = Some(r.lmax.unwrap_or(if cmd == Command::Converge { 6 } else { 5 }));
        r.pgrid = Some(r.pgrid.unwrap_or(64));
        r.levels = Some(r.levels.unwrap_or(4));
        r.mu = Some(r.mu.unwrap_or(1.0));
        r.c = Some(r.c.unwrap_or(1.0));
        r.omega_points = Some(r.omega_points.unwrap_or(2001));
        r.seed = Some(r.seed.unwrap_or(1));
        if cmd == Command::Converge && r.p.is_none() {
            r.p = Some(["0.4pi", "0.6pi", "0.8pi", "pi"].iter().map(|s| s.to_string()).collect());
        }
        if cmd == Command::Lrcheck {
            r.dist = Some(r.dist.clone().unwrap_or_else(|| vec![1, 2, 3]));
            r.times = Some(r.times.clone().unwrap_or_else(|| vec![0.05, 0.1, 0.2]));
        }
        if r.momentum_index.is_some() && r.p.is_some() {
            return Err(CliError::Config("give either --momentum-index or --p, not both".into()));
        }
        let (n, lmax) = (r.sites.unwrap(), r.lmax.unwrap());
        if n < 3 {
            return Err(CliError::Config("--sites must be at least 3".into()));
        }
        if r.momentum_index.is_some_and(|k| k >= n) {
            return Err(CliError::Config(format!("--momentum-index must be below {n}")));
        }
        if lmax == 0 || (cmd == Command::Converge && lmax < 2) {
            return Err(CliError::Config("--lmax too small".into()));
        }
        if cmd.is_mps() && lmax > 7 {
            return Err(CliError::Config("--lmax above 7 needs more memory than a dense block solve allows".into()));
        }
        if r.pgrid.unwrap() == 0 || r.levels.unwrap() == 0 || r.omega_points.unwrap() < 2 {
            return Err(CliError::Config("--pgrid, --levels must be positive and --omega-points at least 2".into()));
        }
        for (name, v) in [("mu", r.mu), ("c", r.c), ("delta-e", r.delta_e), ("eps", r.eps)] {
            if v.is_some_and(|x| !(x.is_finite() && (x > 0.0 || (name == "c" && x >= 0.0)))) {
                return Err(CliError::Config(format!("--{name} must be positive and finite")));
            }
        }
        let dim = (kind.local_dim() as f64).powi(n as i32);
        let dense_limit = match cmd {
            Command::Filter => 4096.0,
            Command::Lrcheck => 4096.0,
            _ => 16384.0,
        };
        let dense = match cmd {
            Command::Filter | Command::Lrcheck => true,
            Command::Spectrum | Command::Spectralfn => r.lowest.is_none(),
            _ => false,
        };
        if dense && dim > dense_limit {
            return Err(CliError::Config(format!(
                "{cmd} needs a full eigenbasis of dimension {dim}; the limit is {dense_limit} (use fewer sites{})",
                if matches!(cmd, Command::Spectrum) { " or --lowest" } else { "" }
            )));
        }
        if cmd == Command::Spectralfn && r.lowest.is_some() {
            return Err(CliError::Config("spectralfn needs full sector bases; drop --lowest".into()));
        }
        if r.lowest == Some(0) {
            return Err(CliError::Config("--lowest must be positive".into()));
        }
        if let Some(ts) = &r.times {
            if ts.iter().any(|t| !t.is_finite()) {
                return Err(CliError::Config("--times must be finite".into()));
            }
        }
        if let Some(ps) = &r.p {
            for s in ps {
                crate::momentum::parse_momentum(s)?;
            }
        }
        Ok(r)
    }
}

/// Positional parameter vector from `name=value` pairs.
pub fn parse_params(kind: quasix_core::models::ModelKind, text: &str) -> Result<Vec<f64>, CliError> {
    let names = kind.param_names();
    let mut vals: Vec<Option<f64>> = vec![None; names.len()];
    for pair in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = pair.split_once('=').ok_or_else(|| CliError::Config(format!("parameter `{pair}` is not name=value")))?;
        let i = names
            .iter()
            .position(|n| *n == k.trim())
            .ok_or_else(|| CliError::Config(format!("{kind} has no parameter `{}`", k.trim())))?;
        let x: f64 = v.trim().parse().map_err(|_| CliError::Config(format!("bad value in `{pair}`")))?;
        vals[i] = Some(x);
    }
    vals.iter()
        .zip(names)
        .map(|(v, n)| v.ok_or_else(|| CliError::Config(format!("{kind} needs parameter `{n}`"))))
        .collect()
}
