//! Caps, run configuration and seed derivation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::paulicode::LdpcProfile;

/// Concrete numbers standing in for the O(1) bounds of the constructions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub max_degree: usize,
    pub max_congestion: usize,
    pub max_cycle_length: usize,
    /// `None` means the code's maximum check weight.
    pub max_matching_size: Option<usize>,
    pub max_edge_load: usize,
    /// Largest graph handled by exhaustive Cheeger enumeration.
    pub exact_cheeger: usize,
    /// Largest code handled by exhaustive distance enumeration.
    pub distance: usize,
    /// Largest state vector used by compilation checks.
    pub sim_qubits: usize,
    /// Restarts for randomized constructions.
    pub retries: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_degree: 16,
            max_congestion: 4,
            max_cycle_length: 8,
            max_matching_size: None,
            max_edge_load: 4,
            exact_cheeger: 22,
            distance: 22,
            sim_qubits: 12,
            retries: 64,
        }
    }
}

impl Caps {
    /// Degree and congestion caps that the measurement-graph recipe meets by
    /// construction for a code with the given profile.
    ///
    /// A thickened vertex has at most `Δ + δ` base edges, two vertical edges
    /// and two cellulation chords per incident cycle; vertical edges carry one
    /// square per incident base edge.
    pub fn for_measurement_graph(p: LdpcProfile) -> Self {
        let (big, small) = (p.delta.max(1), expander_degree(p));
        Caps {
            max_degree: 2 * (big + small + 1),
            max_congestion: (big + small).max(3),
            max_cycle_length: 4,
            max_edge_load: 4,
            ..Caps::default()
        }
    }

    /// Same for the extractor recipe, where each check contributes a cycle
    /// through every qubit in its support.
    pub fn for_extractor(p: LdpcProfile) -> Self {
        let (big, small) = (p.delta.max(1), expander_degree(p));
        Caps {
            max_degree: 4 * big + 2 * (small + 1),
            max_congestion: (2 * big + small).max(3),
            max_cycle_length: 4,
            max_edge_load: 4,
            ..Caps::default()
        }
    }

    /// Applies `QSURGERY_CAP_*` environment overrides.
    pub fn with_env_overrides(mut self) -> Self {
        fn read(name: &str) -> Option<usize> {
            std::env::var(name).ok().and_then(|v| v.trim().parse().ok())
        }
        if let Some(v) = read("QSURGERY_CAP_DEGREE") {
            self.max_degree = v;
        }
        if let Some(v) = read("QSURGERY_CAP_CONGESTION") {
            self.max_congestion = v;
        }
        if let Some(v) = read("QSURGERY_CAP_CYCLE_LENGTH") {
            self.max_cycle_length = v;
        }
        if let Some(v) = read("QSURGERY_CAP_MATCHING_SIZE") {
            self.max_matching_size = Some(v);
        }
        if let Some(v) = read("QSURGERY_CAP_EDGE_LOAD") {
            self.max_edge_load = v;
        }
        if let Some(v) = read("QSURGERY_CAP_CHEEGER") {
            self.exact_cheeger = v;
        }
        if let Some(v) = read("QSURGERY_CAP_DISTANCE") {
            self.distance = v;
        }
        if let Some(v) = read("QSURGERY_CAP_SIM_QUBITS") {
            self.sim_qubits = v;
        }
        if let Some(v) = read("QSURGERY_CAP_RETRIES") {
            self.retries = v;
        }
        self
    }
}

/// Degree of the expander overlay used by the builders.
pub fn expander_degree(_p: LdpcProfile) -> usize {
    4
}

/// Everything a command needs besides its inputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub caps: Caps,
    /// Syndrome rounds per protocol stage; `None` means `d`.
    pub rounds_per_stage: Option<usize>,
    pub out_dir: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: 0, caps: Caps::default(), rounds_per_stage: None, out_dir: None }
    }
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Subsystem seed: `splitmix64(seed ^ fnv1a(label))`.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    splitmix64(seed ^ fnv1a(label))
}

/// Generator for a labelled subsystem.
pub fn rng_for(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, label))
}
