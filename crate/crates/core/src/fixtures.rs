//! Published and classical arrangements bundled with the library.

use crate::arrangement::{read_arrangement_json, Arrangement};

/// A bundled arrangement with its expected invariants.
#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub json: &'static str,
    /// `(m, t_m)` for every multiplicity that occurs.
    pub profile: &'static [(usize, usize)],
    pub exponents: (usize, usize),
}

impl Fixture {
    pub fn arrangement(&self) -> Arrangement {
        read_arrangement_json(self.json).expect("bundled fixture parses")
    }
}

pub const BOOLEAN: Fixture = Fixture {
    name: "boolean",
    json: include_str!("../fixtures/boolean.json"),
    profile: &[(2, 3)],
    exponents: (1, 1),
};

/// Four lines through `[0:0:1]` plus `z = 0`.
pub const NEAR_PENCIL_5: Fixture = Fixture {
    name: "near_pencil_5",
    json: include_str!("../fixtures/near_pencil_5.json"),
    profile: &[(2, 4), (4, 1)],
    exponents: (1, 3),
};

pub const N13: Fixture = Fixture {
    name: "n13_exponents_6_6",
    json: include_str!("../fixtures/n13_exponents_6_6.json"),
    profile: &[(2, 14), (3, 6), (4, 6), (5, 1)],
    exponents: (6, 6),
};

pub const N19: Fixture = Fixture {
    name: "n19_exponents_7_11",
    json: include_str!("../fixtures/n19_exponents_7_11.json"),
    profile: &[(2, 24), (3, 12), (4, 6), (5, 6), (6, 1)],
    exponents: (7, 11),
};

pub const N20: Fixture = Fixture {
    name: "n20_exponents_9_10",
    json: include_str!("../fixtures/n20_exponents_9_10.json"),
    profile: &[(2, 38), (3, 14), (4, 5), (5, 2), (6, 4)],
    exponents: (9, 10),
};

/// Five lines through `[1:0:0]` plus `x = z` and `x = -z`. Obtained from the
/// `(3, 3)` two-pencil by swapping two lines while keeping `b2 = 15`, so the
/// candidate exponents stay `(3, 3)`, but a degree-2 derivation exists and
/// the arrangement is not free.
pub const NOT_FREE_7: Fixture = Fixture {
    name: "not_free_7",
    json: include_str!("../fixtures/not_free_7.json"),
    profile: &[(2, 11), (5, 1)],
    exponents: (3, 3),
};

/// The three large free arrangements found by search.
pub const DISCOVERED: [Fixture; 3] = [N13, N19, N20];

pub const ALL: [Fixture; 5] = [BOOLEAN, NEAR_PENCIL_5, N13, N19, N20];

pub fn by_name(name: &str) -> Option<Fixture> {
    ALL.iter().copied().find(|f| f.name == name)
}
