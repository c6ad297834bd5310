use super::DiscreteMdpSpec;

/// RiverSwim transition/reward table.
pub const RIVERSWIM_TABLE: &str = include_str!("../../data/mdps/riverswim.txt");
/// SixArms transition/reward table.
pub const SIXARMS_TABLE: &str = include_str!("../../data/mdps/sixarms.txt");

/// Six-state river: swimming left is easy and pays 5 at the bank, swimming
/// right against the current pays 10000 at the far end.
pub fn riverswim_spec() -> DiscreteMdpSpec {
    DiscreteMdpSpec::parse_table(RIVERSWIM_TABLE).expect("bundled RiverSwim table is valid")
}

/// Hub state 0 with six arms of escalating payoff and shrinking entry
/// probability.
pub fn sixarms_spec() -> DiscreteMdpSpec {
    DiscreteMdpSpec::parse_table(SIXARMS_TABLE).expect("bundled SixArms table is valid")
}
