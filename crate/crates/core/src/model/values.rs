use std::fmt;

/// Contents of the shared `turn` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TurnValue {
    Pid(u8),
    Thinking,
    Free,
}

impl TurnValue {
    pub const THINKING_CODE: u8 = 254;
    pub const FREE_CODE: u8 = 255;

    pub fn code(self) -> u8 {
        match self {
            TurnValue::Pid(i) => i,
            TurnValue::Thinking => Self::THINKING_CODE,
            TurnValue::Free => Self::FREE_CODE,
        }
    }

    pub fn from_code(code: u8) -> Self {
        match code {
            Self::THINKING_CODE => TurnValue::Thinking,
            Self::FREE_CODE => TurnValue::Free,
            i => TurnValue::Pid(i),
        }
    }

    /// Compact rendering used in traces and graph labels: `T`, `F` or the pid.
    pub fn short(self) -> String {
        match self {
            TurnValue::Pid(i) => i.to_string(),
            TurnValue::Thinking => "T".into(),
            TurnValue::Free => "F".into(),
        }
    }

    pub fn parse_short(s: &str) -> Option<Self> {
        match s {
            "T" => Some(TurnValue::Thinking),
            "F" => Some(TurnValue::Free),
            _ => s.parse().ok().map(TurnValue::Pid),
        }
    }
}

impl fmt::Display for TurnValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TurnValue::Pid(i) => write!(f, "{i}"),
            TurnValue::Thinking => f.write_str("THINKING"),
            TurnValue::Free => f.write_str("FREE"),
        }
    }
}

/// Value of one `flag[i]` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum FlagValue {
    Remainder = 0,
    Waiting = 1,
    Candidate = 2,
}

impl FlagValue {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(FlagValue::Remainder),
            1 => Some(FlagValue::Waiting),
            2 => Some(FlagValue::Candidate),
            _ => None,
        }
    }

    pub fn short(self) -> char {
        match self {
            FlagValue::Remainder => 'R',
            FlagValue::Waiting => 'W',
            FlagValue::Candidate => 'C',
        }
    }

    pub fn parse_short(s: &str) -> Option<Self> {
        match s {
            "R" => Some(FlagValue::Remainder),
            "W" => Some(FlagValue::Waiting),
            "C" => Some(FlagValue::Candidate),
            _ => None,
        }
    }
}

impl fmt::Display for FlagValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlagValue::Remainder => "REMAINDER",
            FlagValue::Waiting => "WAITING",
            FlagValue::Candidate => "CANDIDATE",
        })
    }
}

/// The only inter-process communication medium.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SharedState {
    pub turn: TurnValue,
    pub flags: Vec<FlagValue>,
}

impl SharedState {
    pub fn flags_csv(&self) -> String {
        let mut out = String::with_capacity(self.flags.len() * 2);
        for (i, f) in self.flags.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push(f.short());
        }
        out
    }
}

/// Control states of every automaton. Names follow the numbering used by the
/// algorithms' state diagrams; `Cs` is the critical section.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Location {
    L1 = 0,
    L2,
    L2_1,
    L2_2,
    L2_3,
    L3,
    L3_1,
    L3_2,
    L3_3,
    L3_4,
    L3_4_1,
    L3_4_2,
    L3_5,
    L3_5_1,
    L3_5_2,
    L3_6,
    L3_7,
    L4,
    Cs,
    L5,
    L5_1,
    L6,
    L6_1,
    L6_2,
    L6_3,
    L8,
}

impl Location {
    pub const ALL: [Location; 26] = [
        Location::L1,
        Location::L2,
        Location::L2_1,
        Location::L2_2,
        Location::L2_3,
        Location::L3,
        Location::L3_1,
        Location::L3_2,
        Location::L3_3,
        Location::L3_4,
        Location::L3_4_1,
        Location::L3_4_2,
        Location::L3_5,
        Location::L3_5_1,
        Location::L3_5_2,
        Location::L3_6,
        Location::L3_7,
        Location::L4,
        Location::Cs,
        Location::L5,
        Location::L5_1,
        Location::L6,
        Location::L6_1,
        Location::L6_2,
        Location::L6_3,
        Location::L8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Location::L1 => "1",
            Location::L2 => "2",
            Location::L2_1 => "2.1",
            Location::L2_2 => "2.2",
            Location::L2_3 => "2.3",
            Location::L3 => "3",
            Location::L3_1 => "3.1",
            Location::L3_2 => "3.2",
            Location::L3_3 => "3.3",
            Location::L3_4 => "3.4",
            Location::L3_4_1 => "3.4.1",
            Location::L3_4_2 => "3.4.2",
            Location::L3_5 => "3.5",
            Location::L3_5_1 => "3.5.1",
            Location::L3_5_2 => "3.5.2",
            Location::L3_6 => "3.6",
            Location::L3_7 => "3.7",
            Location::L4 => "4",
            Location::Cs => "CS",
            Location::L5 => "5",
            Location::L5_1 => "5.1",
            Location::L6 => "6",
            Location::L6_1 => "6.1",
            Location::L6_2 => "6.2",
            Location::L6_3 => "6.3",
            Location::L8 => "8",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|l| l.name() == name)
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A set of locations as a bitmask over [`Location::code`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct LocationSet(u32);

impl LocationSet {
    pub const EMPTY: LocationSet = LocationSet(0);

    pub fn of(locs: &[Location]) -> Self {
        LocationSet(locs.iter().fold(0, |m, l| m | (1 << l.code())))
    }

    pub fn contains(self, loc: Location) -> bool {
        self.0 & (1 << loc.code()) != 0
    }

    pub fn insert(&mut self, loc: Location) {
        self.0 |= 1 << loc.code();
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Location> {
        Location::ALL.into_iter().filter(move |l| self.contains(*l))
    }
}

/// States in the half-open interval from the critical section up to (not
/// including) location 8 of the symmetric algorithm.
pub fn extended_cs() -> LocationSet {
    use Location::*;
    LocationSet::of(&[Cs, L5, L5_1, L6, L6_1, L6_2, L6_3])
}

/// Locations 3 through 4 inclusive of the symmetric entry part.
pub fn election_region() -> LocationSet {
    use Location::*;
    LocationSet::of(&[L3, L3_1, L3_2, L3_3, L3_4, L3_4_1, L3_4_2, L3_5, L3_5_1, L3_5_2, L3_6, L3_7, L4])
}

/// Role-private variables. Every role carries all fields; a role only ever
/// touches the ones its automaton mentions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Locals {
    /// Coordinator scan cursor.
    pub p: u8,
    pub n_candidates: u8,
    pub min_candidate: i8,
    /// Entry scan counter, N-1 down to 0; -1 once done.
    pub j: i8,
    /// Exit scan offset; the visited index is `(i + k) mod N`.
    pub k: u8,
    pub next_turn: TurnValue,
}

impl Default for Locals {
    fn default() -> Self {
        Locals { p: 0, n_candidates: 0, min_candidate: -1, j: -1, k: 1, next_turn: TurnValue::Thinking }
    }
}

impl Locals {
    pub const WIDTH: usize = 6;
}
