use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Travel mode. The discriminant order is the expansion order used by every
/// search (Walk first), and doubles as an array index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Walk = 0,
    EScooter = 1,
    EBike = 2,
    ECar = 3,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown mode `{0}` (expected walk, escooter, ebike or ecar)")]
pub struct UnknownMode(pub String);

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Walk, Mode::EScooter, Mode::EBike, Mode::ECar];
    pub const VEHICLES: [Mode; 3] = [Mode::EScooter, Mode::EBike, Mode::ECar];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Mode {
        Mode::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Walk => "walk",
            Mode::EScooter => "escooter",
            Mode::EBike => "ebike",
            Mode::ECar => "ecar",
        }
    }

    pub fn is_vehicle(self) -> bool {
        self != Mode::Walk
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "walk" | "w" => Ok(Mode::Walk),
            "escooter" | "scooter" => Ok(Mode::EScooter),
            "ebike" | "bike" => Ok(Mode::EBike),
            "ecar" | "car" => Ok(Mode::ECar),
            _ => Err(UnknownMode(s.to_string())),
        }
    }
}

/// Small bit set of modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct ModeSet(u8);

impl ModeSet {
    pub const EMPTY: ModeSet = ModeSet(0);
    pub const ALL: ModeSet = ModeSet(0b1111);
    pub const VEHICLES: ModeSet = ModeSet(0b1110);

    pub fn only(m: Mode) -> ModeSet {
        ModeSet(1 << m.index())
    }

    pub fn contains(self, m: Mode) -> bool {
        self.0 & (1 << m.index()) != 0
    }

    pub fn insert(&mut self, m: Mode) {
        self.0 |= 1 << m.index();
    }

    pub fn remove(&mut self, m: Mode) {
        self.0 &= !(1 << m.index());
    }

    pub fn with(mut self, m: Mode) -> ModeSet {
        self.insert(m);
        self
    }

    pub fn union(self, other: ModeSet) -> ModeSet {
        ModeSet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Members in expansion order.
    pub fn iter(self) -> impl Iterator<Item = Mode> {
        Mode::ALL.into_iter().filter(move |m| self.contains(*m))
    }

    /// Canonical label: distinct mode names sorted alphabetically and joined
    /// with `+`, e.g. `ecar+walk`. The empty set renders as `none`.
    pub fn label(self) -> String {
        if self.is_empty() {
            return "none".into();
        }
        let mut names: Vec<&str> = self.iter().map(Mode::name).collect();
        names.sort_unstable();
        names.join("+")
    }

    /// Parses a comma- or plus-separated list; `all` and `none` are accepted.
    pub fn parse_list(s: &str) -> Result<ModeSet, UnknownMode> {
        let mut set = ModeSet::EMPTY;
        for part in s.split([',', '+']).map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "all" => set = set.union(ModeSet::ALL),
                "none" => {}
                _ => set.insert(part.parse()?),
            }
        }
        Ok(set)
    }
}

impl FromIterator<Mode> for ModeSet {
    fn from_iter<I: IntoIterator<Item = Mode>>(iter: I) -> Self {
        let mut s = ModeSet::EMPTY;
        for m in iter {
            s.insert(m);
        }
        s
    }
}

impl fmt::Display for ModeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
