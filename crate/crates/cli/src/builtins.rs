//! The builtin scenario library, shipped as TOML files.

use crate::error::CliError;
use crate::scenario::Scenario;

pub struct Builtin {
    pub name: &'static str,
    pub summary: &'static str,
    pub source: &'static str,
}

macro_rules! builtin {
    ($name:literal, $summary:literal) => {
        Builtin {
            name: $name,
            summary: $summary,
            source: include_str!(concat!("../builtins/", $name, ".toml")),
        }
    };
}

pub const BUILTINS: [Builtin; 8] = [
    builtin!("disk-doubling", "two flat disks glued along the boundary; smooths to K = 0"),
    builtin!("annulus-doubling", "two annuli glued along the inner circle; compatibility and needle fail"),
    builtin!("hemisphere-doubling", "two hemispheres glued along the equator; smooths to K = 1"),
    builtin!("weighted-disk", "doubled disk with weight 2 - r, N = 3; zero weighted mean curvature"),
    builtin!("1d-sin-doubling", "sin^2 cut at pi/2 and glued back; passes CD(2, 3)"),
    builtin!("1d-affine-fail", "affine valley on [0, 2]; fails CD(0, 2)"),
    builtin!("warped-sphere", "cap with weight cos r, N = 3; warps to the round 3-sphere"),
    builtin!("sin-weight-interval", "[0, pi] with sin^2 and N = 3; curvature exactly 2"),
];

pub fn find(name: &str) -> Result<&'static Builtin, CliError> {
    BUILTINS.iter().find(|b| b.name == name).ok_or_else(|| CliError::UnknownBuiltin(name.into()))
}

pub fn scenario(name: &str) -> Result<Scenario, CliError> {
    Scenario::from_toml(find(name)?.source)
}
