use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Arc, EHub, NodeId};
use crate::mode::{Mode, ModeSet};

/// Preference factor applied to softly excluded modes.
pub const DEFAULT_PENALTY: f64 = 1e5;

/// Slack allowed below zero when checking a state of charge.
pub const ENERGY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("non-positive input: {0}")]
    NonPositiveInput(&'static str),
    #[error("transition from {0} to itself")]
    SameModePair(Mode),
    #[error("walk cannot be excluded")]
    WalkExcluded,
    #[error("preference factor for {mode} must be >= 1 (got {value})")]
    BadAlpha { mode: Mode, value: f64 },
    #[error("energy rate for {mode} must be >= 0 and walk must be 0 (got {value})")]
    BadRho { mode: Mode, value: f64 },
    #[error("transition cost {from}->{to} must be finite and >= 0 (got {value})")]
    BadTransitionCost { from: Mode, to: Mode, value: f64 },
    #[error("bad transition key `{0}` (expected e.g. `walk->ecar`)")]
    BadTransitionKey(String),
    #[error(transparent)]
    UnknownMode(#[from] crate::mode::UnknownMode),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExclusionPolicy {
    /// Excluded modes are removed from every candidate set.
    #[default]
    Hard,
    /// Excluded modes stay available at the penalty preference factor.
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserPreferences {
    pub alpha: [f64; 4],
    pub excluded: ModeSet,
    pub t_max: u32,
    pub policy: ExclusionPolicy,
    pub penalty: f64,
}

impl Default for UserPreferences {
    fn default() -> Self {
        Self {
            alpha: [1.0; 4],
            excluded: ModeSet::EMPTY,
            t_max: 2,
            policy: ExclusionPolicy::Hard,
            penalty: DEFAULT_PENALTY,
        }
    }
}

impl UserPreferences {
    pub fn with_t_max(mut self, t_max: u32) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn excluding(mut self, modes: ModeSet, policy: ExclusionPolicy) -> Self {
        self.excluded = modes;
        self.policy = policy;
        self
    }

    pub fn validate(&self) -> Result<(), CostError> {
        if self.excluded.contains(Mode::Walk) {
            return Err(CostError::WalkExcluded);
        }
        for m in Mode::ALL {
            let a = self.alpha[m.index()];
            if !(a.is_finite() && a >= 1.0) {
                return Err(CostError::BadAlpha { mode: m, value: a });
            }
        }
        if !(self.penalty.is_finite() && self.penalty >= 1.0) {
            return Err(CostError::BadAlpha {
                mode: Mode::Walk,
                value: self.penalty,
            });
        }
        Ok(())
    }

    /// False only for hard-excluded modes.
    #[inline]
    pub fn allows(&self, m: Mode) -> bool {
        !(self.policy == ExclusionPolicy::Hard && self.excluded.contains(m))
    }

    /// α_s after applying soft exclusion.
    #[inline]
    pub fn alpha_for(&self, m: Mode) -> f64 {
        if self.policy == ExclusionPolicy::Soft && self.excluded.contains(m) {
            self.penalty
        } else {
            self.alpha[m.index()]
        }
    }

    pub fn allowed_modes(&self) -> ModeSet {
        Mode::ALL.into_iter().filter(|&m| self.allows(m)).collect()
    }
}

/// ρ_s in Wh per metre, indexed by mode; walk is fixed at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    rho: [f64; 4],
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            rho: [0.0, 0.015, 0.01, 0.15],
        }
    }
}

impl EnergyParams {
    pub fn new(escooter: f64, ebike: f64, ecar: f64) -> Result<Self, CostError> {
        let p = Self {
            rho: [0.0, escooter, ebike, ecar],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn set(&mut self, m: Mode, rho: f64) -> Result<(), CostError> {
        if m == Mode::Walk && rho != 0.0 || !(rho.is_finite() && rho >= 0.0) {
            return Err(CostError::BadRho { mode: m, value: rho });
        }
        self.rho[m.index()] = rho;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CostError> {
        for m in Mode::ALL {
            let r = self.rho[m.index()];
            if !(r.is_finite() && r >= 0.0) || (m == Mode::Walk && r != 0.0) {
                return Err(CostError::BadRho { mode: m, value: r });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn rho(&self, m: Mode) -> f64 {
        self.rho[m.index()]
    }

    pub fn max_rho(&self) -> f64 {
        self.rho.iter().copied().fold(0.0, f64::max)
    }
}

/// D^{ss'} in seconds, keyed by ordered mode pair only.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransitionCostTable {
    d: [[f64; 4]; 4],
}

impl TransitionCostTable {
    pub fn uniform(seconds: f64) -> Result<Self, CostError> {
        let mut t = Self::default();
        for s in Mode::ALL {
            for sp in Mode::ALL {
                if s != sp {
                    t.set(s, sp, seconds)?;
                }
            }
        }
        Ok(t)
    }

    pub fn set(&mut self, s: Mode, sp: Mode, seconds: f64) -> Result<(), CostError> {
        if s == sp {
            return Err(CostError::SameModePair(s));
        }
        if !(seconds.is_finite() && seconds >= 0.0) {
            return Err(CostError::BadTransitionCost {
                from: s,
                to: sp,
                value: seconds,
            });
        }
        self.d[s.index()][sp.index()] = seconds;
        Ok(())
    }

    #[inline]
    pub fn get(&self, s: Mode, sp: Mode) -> f64 {
        self.d[s.index()][sp.index()]
    }
}

/// A routing request with everything the solvers need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Query {
    pub origin: NodeId,
    pub destination: NodeId,
    pub prefs: UserPreferences,
    pub energy: EnergyParams,
    pub transition_costs: TransitionCostTable,
}

impl Query {
    pub fn new(origin: NodeId, destination: NodeId) -> Self {
        Self {
            origin,
            destination,
            prefs: UserPreferences::default(),
            energy: EnergyParams::default(),
            transition_costs: TransitionCostTable::default(),
        }
    }

    pub fn with_prefs(mut self, prefs: UserPreferences) -> Self {
        self.prefs = prefs;
        self
    }

    pub fn with_energy(mut self, energy: EnergyParams) -> Self {
        self.energy = energy;
        self
    }

    pub fn with_transition_costs(mut self, t: TransitionCostTable) -> Self {
        self.transition_costs = t;
        self
    }

    /// C^s for traversing `arc` in mode `m`, or `None` when the mode is
    /// forbidden on the arc or hard-excluded.
    #[inline]
    pub fn arc_cost(&self, arc: &Arc, m: Mode) -> Option<f64> {
        if !self.prefs.allows(m) {
            return None;
        }
        let v = arc.speed(m)?;
        Some(self.prefs.alpha_for(m) * arc.distance_m / v)
    }
}

/// C = α·d/V.
pub fn travel_cost(prefs: &UserPreferences, distance_m: f64, speed_mps: f64, mode: Mode) -> Result<f64, CostError> {
    if !(distance_m.is_finite() && distance_m > 0.0) {
        return Err(CostError::NonPositiveInput("distance"));
    }
    if !(speed_mps.is_finite() && speed_mps > 0.0) {
        return Err(CostError::NonPositiveInput("speed"));
    }
    Ok(prefs.alpha_for(mode) * distance_m / speed_mps)
}

/// True iff switching from `s` to `sp` is possible at a node with this hub:
/// docking `s` needs a hub supporting it, picking up `sp` likewise.
#[inline]
pub fn transition_admissible(hub: Option<&EHub>, s: Mode, sp: Mode) -> bool {
    if s == sp {
        return false;
    }
    match hub {
        None => false,
        Some(h) => (s == Mode::Walk || h.supports(s)) && (sp == Mode::Walk || h.supports(sp)),
    }
}

/// D^{ss'} when the switch is admissible at this node, `Ok(None)` when it is
/// not.
pub fn transition_cost(table: &TransitionCostTable, hub: Option<&EHub>, s: Mode, sp: Mode) -> Result<Option<f64>, CostError> {
    if s == sp {
        return Err(CostError::SameModePair(s));
    }
    Ok(transition_admissible(hub, s, sp).then(|| table.get(s, sp)))
}

/// State of charge after riding `distance_m` in `mode`; `None` when it would
/// go negative. Walk leaves the value unchanged.
#[inline]
pub fn energy_after_edge(e: &EnergyParams, soc_wh: f64, mode: Mode, distance_m: f64) -> Option<f64> {
    if mode == Mode::Walk {
        return Some(soc_wh);
    }
    let left = soc_wh - e.rho(mode) * distance_m;
    if left >= -ENERGY_TOL {
        Some(left.max(0.0))
    } else {
        None
    }
}

/// Arriving in `mode` ends the journey only on foot or at a hub that can take
/// the vehicle back.
#[inline]
pub fn can_finish(dest_hub: Option<&EHub>, mode: Mode) -> bool {
    mode == Mode::Walk || dest_hub.is_some_and(|h| h.supports(mode))
}

/// On-disk preference and energy settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreferenceConfig {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub alpha: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion: Option<ExclusionPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<u32>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub rho_wh_per_m: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub transition_cost_s: BTreeMap<String, f64>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Cost(#[from] CostError),
}

impl PreferenceConfig {
    /// Reads JSON, or TOML when the extension is `.toml`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))
        } else {
            serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))
        }
    }

    /// Overlays this config onto defaults.
    pub fn resolve(&self) -> Result<(UserPreferences, EnergyParams, TransitionCostTable), CostError> {
        let mut prefs = UserPreferences::default();
        for (k, &v) in &self.alpha {
            let m: Mode = k.parse()?;
            prefs.alpha[m.index()] = v;
        }
        for k in &self.excluded {
            prefs.excluded.insert(k.parse()?);
        }
        if let Some(p) = self.exclusion {
            prefs.policy = p;
        }
        if let Some(t) = self.t_max {
            prefs.t_max = t;
        }
        prefs.validate()?;
        let mut energy = EnergyParams::default();
        for (k, &v) in &self.rho_wh_per_m {
            energy.set(k.parse()?, v)?;
        }
        let mut table = TransitionCostTable::default();
        for (k, &v) in &self.transition_cost_s {
            let (a, b) = k.split_once("->").ok_or_else(|| CostError::BadTransitionKey(k.clone()))?;
            table.set(a.parse()?, b.parse()?, v)?;
        }
        Ok((prefs, energy, table))
    }
}
