//! Configurations shipped with the crate.

use crate::config::{parse_config, SimConfig};

#[derive(Debug, Clone, Copy)]
pub struct Scenario {
    pub name: &'static str,
    pub text: &'static str,
}

impl Scenario {
    pub fn config(&self) -> SimConfig {
        parse_config(self.text).unwrap_or_else(|e| panic!("shipped scenario {} is invalid: {e}", self.name))
    }
}

pub const EQUILIBRIUM: Scenario = Scenario {
    name: "equilibrium",
    text: include_str!("../scenarios/equilibrium.toml"),
};

pub const REFERENCE: Scenario = Scenario {
    name: "reference",
    text: include_str!("../scenarios/reference.toml"),
};

pub const SWELLING: Scenario = Scenario {
    name: "swelling",
    text: include_str!("../scenarios/swelling.toml"),
};

pub const FREE_DECAY: Scenario = Scenario {
    name: "free_decay",
    text: include_str!("../scenarios/free_decay.toml"),
};

pub const H0_PULSE: Scenario = Scenario {
    name: "h0_pulse",
    text: include_str!("../scenarios/h0_pulse.toml"),
};

pub const ALL: [Scenario; 5] = [EQUILIBRIUM, REFERENCE, SWELLING, FREE_DECAY, H0_PULSE];

pub fn by_name(name: &str) -> Option<Scenario> {
    ALL.into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_scenarios_parse_and_build() {
        for s in ALL {
            s.config().build().unwrap();
        }
        assert!(by_name("reference").is_some());
        assert!(by_name("nope").is_none());
    }
}
