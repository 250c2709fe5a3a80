use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::ValueEnum;
use dynspan::light_spanner::Fault;
use dynspan::Mode;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Uniform points in a cube whose diagonal is phi.
    UniformCube,
    /// Integer points 1..n on a line.
    Path,
    /// Gaussian clusters inside the same cube as `uniform-cube`.
    Clustered,
    /// Points read from `--points`.
    File,
}

/// Shape of the update sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ops {
    /// `n` insertions.
    InsertOnly,
    /// `n` insertions, then `updates` operations that delete a random point
    /// with the given probability and insert a fresh one otherwise.
    Mixed(f64),
    /// `n` insertions, deleting the oldest point whenever more than `w` are
    /// present.
    Window(usize),
}

impl FromStr for Ops {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        if s == "insert-only" {
            return Ok(Ops::InsertOnly);
        }
        if let Some(p) = s.strip_prefix("mixed:") {
            let p: f64 = p.parse().context("mixed:<p_delete>")?;
            if !(0.0..=1.0).contains(&p) {
                bail!("delete probability {p} is outside [0, 1]");
            }
            return Ok(Ops::Mixed(p));
        }
        if let Some(w) = s.strip_prefix("window:") {
            let w: usize = w.parse().context("window:<w>")?;
            if w == 0 {
                bail!("window size must be positive");
            }
            return Ok(Ops::Window(w));
        }
        bail!("expected insert-only, mixed:<p> or window:<w>, got {s:?}")
    }
}

impl fmt::Display for Ops {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ops::InsertOnly => write!(f, "insert-only"),
            Ops::Mixed(p) => write!(f, "mixed:{p}"),
            Ops::Window(w) => write!(f, "window:{w}"),
        }
    }
}

/// When to run the oracle checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    None,
    Final,
    EveryK(usize),
    EveryUpdate,
}

impl Check {
    /// Whether the full check runs after update `k` (1-based) of `total`.
    pub fn due(self, k: usize, total: usize) -> bool {
        match self {
            Check::None => false,
            Check::Final => k == total,
            Check::EveryK(step) => k.is_multiple_of(step) || k == total,
            Check::EveryUpdate => true,
        }
    }
}

impl FromStr for Check {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "none" => Ok(Check::None),
            "final" => Ok(Check::Final),
            "every-update" => Ok(Check::EveryUpdate),
            _ => {
                let Some(k) = s.strip_prefix("every-k:") else {
                    bail!("expected none, final, every-k:<k> or every-update, got {s:?}");
                };
                let k: usize = k.parse().context("every-k:<k>")?;
                if k == 0 {
                    bail!("every-k needs a positive k");
                }
                Ok(Check::EveryK(k))
            }
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Check::None => write!(f, "none"),
            Check::Final => write!(f, "final"),
            Check::EveryK(k) => write!(f, "every-k:{k}"),
            Check::EveryUpdate => write!(f, "every-update"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Fast,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Fast => Mode::Fast,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    NeverAdd,
    AlwaysAdd,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Fault {
        match f {
            FaultArg::NeverAdd => Fault::NeverAdd,
            FaultArg::AlwaysAdd => Fault::AlwaysAdd,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub dim: usize,
    pub eps: f64,
    /// Aspect-ratio bound; derived from the points when absent.
    pub phi: Option<f64>,
    pub seed: u64,
    pub ops: Ops,
    /// Number of mixed operations after the initial insertions; `2n` when
    /// absent.
    pub updates: Option<usize>,
    pub mode: Mode,
    pub check: Check,
    pub points: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::UniformCube,
            n: 128,
            dim: 2,
            eps: 0.5,
            phi: None,
            seed: 1,
            ops: Ops::InsertOnly,
            updates: None,
            mode: Mode::Exact,
            check: Check::Final,
            points: None,
        }
    }
}

pub const DEFAULT_CUBE_PHI: f64 = 1024.0;

impl ScenarioConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            bail!("eps must be positive, got {}", self.eps);
        }
        if self.dim == 0 {
            bail!("dim must be positive");
        }
        if let Some(phi) = self.phi {
            if !(phi >= 1.0) || phi.log2().fract() != 0.0 || phi > 2f64.powi(62) {
                bail!("phi must be a power of two in [1, 2^62], got {phi}");
            }
        }
        if self.scenario == Scenario::File && self.points.is_none() {
            bail!("the file scenario needs --points");
        }
        Ok(())
    }
}
