//! Fixed motif templates. Node 0 of every template is the attachment point.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MotifKind {
    House,
    Cycle5,
    Crane,
    Grid,
    Wheel,
}

impl MotifKind {
    pub const ALL: [MotifKind; 5] = [
        MotifKind::House,
        MotifKind::Cycle5,
        MotifKind::Crane,
        MotifKind::Grid,
        MotifKind::Wheel,
    ];

    pub fn node_count(self) -> usize {
        match self {
            MotifKind::House | MotifKind::Cycle5 => 5,
            MotifKind::Crane => 6,
            MotifKind::Grid => 9,
            MotifKind::Wheel => 7,
        }
    }

    /// Template edges over nodes `0..node_count()`.
    pub fn edges(self) -> Vec<(usize, usize)> {
        match self {
            // square 0-1-2-3 with the roof apex 4 over the 0-1 side
            MotifKind::House => vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (1, 4)],
            MotifKind::Cycle5 => vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)],
            // triangle 0-1-2 sharing node 2 with the square 2-3-4-5
            MotifKind::Crane => vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 2)],
            MotifKind::Grid => {
                let mut e = Vec::new();
                for r in 0..3 {
                    for c in 0..3 {
                        let u = 3 * r + c;
                        if c < 2 {
                            e.push((u, u + 1));
                        }
                        if r < 2 {
                            e.push((u, u + 3));
                        }
                    }
                }
                e
            }
            // hub 0 and rim 1..=6
            MotifKind::Wheel => {
                let mut e: Vec<_> = (1..=6).map(|i| (0, i)).collect();
                e.extend((1..=6).map(|i| (i, i % 6 + 1)));
                e
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MotifKind::House => "house",
            MotifKind::Cycle5 => "cycle5",
            MotifKind::Crane => "crane",
            MotifKind::Grid => "grid",
            MotifKind::Wheel => "wheel-motif",
        }
    }
}

impl fmt::Display for MotifKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MotifKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        MotifKind::ALL
            .into_iter()
            .find(|k| k.name() == s || (s == "wheel" && *k == MotifKind::Wheel))
            .ok_or_else(|| Error::Parse(format!("unknown motif kind `{s}`")))
    }
}
