//! Embedded reference data for the eight representative traps.

use crate::error::Result;
use crate::geometry::{TrapFamily, TrapParams};
use serde::Serialize;

pub const REFERENCE_VERSION: &str = "trenchfield.reference/1";

/// A parameter the reference dimensions leave open, with how it was fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Supplement {
    pub name: &'static str,
    pub value: f64,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceTrap {
    pub family: TrapFamily,
    /// Published dimensions (µm).
    pub dims: &'static [(&'static str, f64)],
    pub supplements: &'static [Supplement],
    pub depth: f64,
    pub c2: f64,
    pub c3_prime: f64,
    pub c4_prime: f64,
    /// Known ambiguities in how the layout was read, quoted when a cell fails.
    pub geometry_note: &'static str,
}

impl ReferenceTrap {
    pub fn params(&self) -> Result<TrapParams> {
        TrapParams::new(
            self.family,
            self.dims
                .iter()
                .copied()
                .chain(self.supplements.iter().map(|s| (s.name, s.value))),
        )
    }
}

const TABLE: [ReferenceTrap; 8] = [
    ReferenceTrap {
        family: TrapFamily::SetSymmetric,
        dims: &[("a", 161.2), ("b", 59.0)],
        supplements: &[],
        depth: 0.06,
        c2: 0.17,
        c3_prime: 1.0,
        c4_prime: 0.75,
        geometry_note: "five-wire layout is fully fixed by a and b; the closed-form gapless \
                        model gives C2 = 0.159 at these dimensions",
    },
    ReferenceTrap {
        family: TrapFamily::SetAntisymmetric,
        dims: &[("phi", 75.0)],
        supplements: &[],
        depth: 0.07,
        c2: 0.17,
        c3_prime: 1.0,
        c4_prime: 0.75,
        geometry_note: "four-wire layout with inner strips of width phi and semi-infinite outer strips",
    },
    ReferenceTrap {
        family: TrapFamily::SimpleTrenchSymmetric,
        dims: &[("d", 77.3), ("c", 210.0), ("beta", 600.0)],
        supplements: &[],
        depth: 0.08,
        c2: 0.18,
        c3_prime: 0.86,
        c4_prime: 0.55,
        geometry_note: "c is read as the RF floor width and d as the central DC width; \
                        the reverse reading gives C2 near 0.06",
    },
    ReferenceTrap {
        family: TrapFamily::SimpleTrenchAntisymmetric,
        dims: &[("e", 135.2), ("f", 525.0)],
        supplements: &[],
        depth: 0.23,
        c2: 0.24,
        c3_prime: 0.62,
        c4_prime: 0.36,
        geometry_note: "floor split at the trench centre into one RF and one DC electrode, \
                        each wall continuing its floor electrode",
    },
    ReferenceTrap {
        family: TrapFamily::StackedTrenchSymmetric,
        dims: &[("g", 140.0), ("h", 80.0), ("epsilon", 300.0)],
        supplements: &[Supplement {
            name: "mu",
            value: 150.0,
            reason: "trench width is not listed; walls regime puts the wall faces 75 µm from a centred ion",
        }],
        depth: 0.33,
        c2: 0.31,
        c3_prime: 0.020,
        c4_prime: 0.024,
        geometry_note: "wall electrode stack (grounded base, RF band of height g above h, DC cap) \
                        is read from a drawing",
    },
    ReferenceTrap {
        family: TrapFamily::StackedTrenchAntisymmetric,
        dims: &[("i", 150.0), ("j", 160.0)],
        supplements: &[Supplement {
            name: "xi",
            value: 300.0,
            reason: "wall height is not listed; C3' and C4' change by under 0.01 for xi in 240..600",
        }],
        depth: 0.22,
        c2: 0.40,
        c3_prime: 0.008,
        c4_prime: 0.407,
        geometry_note: "bottom electrodes read as L-shapes each covering half the floor; \
                        a grounded floor instead gives C3' near 0.1",
    },
    ReferenceTrap {
        family: TrapFamily::WaferSymmetric,
        dims: &[("k", 50.0)],
        supplements: &[],
        depth: 0.16,
        c2: 0.35,
        c3_prime: 0.000,
        c4_prime: 0.344,
        geometry_note: "k read as the distance from the ion plane to each wafer; the RF/DC split \
                        on the slab faces (slot-facing faces RF) is read from a drawing, and \
                        other face splits tried do not trap or fit worse",
    },
    ReferenceTrap {
        family: TrapFamily::WaferAntisymmetric,
        dims: &[("k", 53.0)],
        supplements: &[],
        depth: 0.39,
        c2: 0.39,
        c3_prime: 0.001,
        c4_prime: 0.007,
        geometry_note: "k read as the distance from the ion plane to each wafer; the slot width \
                        is derived from the 75 µm separation; slab depth and thickness are the \
                        fixed 1000 µm and 50 µm",
    },
];

/// The eight representative traps in reference order.
pub fn reference_table() -> &'static [ReferenceTrap; 8] {
    &TABLE
}
