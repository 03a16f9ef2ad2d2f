//! Provenance hashes: every output records the SHA-256 of the inputs that produced it.

use std::path::Path;

use aeronet::channel::{LinkBudget, McsTable};
use aeronet::gwp::GwpConfig;
use aeronet::netplan::{NetPlanConfig, DESK_PROFILE};
use aeronet::routing::RoutingConfig;
use aeronet::Vec3;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Hash over labelled, length-prefixed input parts. File names are not hashed, so
/// moving an input does not change the hash.
pub struct InputHasher(Sha256);

impl Default for InputHasher {
    fn default() -> Self {
        Self::new()
    }
}

impl InputHasher {
    pub fn new() -> Self {
        Self(Sha256::new())
    }

    pub fn bytes(&mut self, label: &str, data: &[u8]) -> &mut Self {
        for part in [label.as_bytes(), data] {
            self.0.update((part.len() as u64).to_le_bytes());
            self.0.update(part);
        }
        self
    }

    pub fn file(&mut self, label: &str, path: &Path) -> CliResult<&mut Self> {
        let data = std::fs::read(path).map_err(|e| CliError::file(path, e))?;
        Ok(self.bytes(label, &data))
    }

    pub fn json<S: Serialize>(&mut self, label: &str, value: &S) -> &mut Self {
        let data = serde_json::to_vec(value).expect("in-memory values serialize");
        self.bytes(label, &data)
    }

    pub fn finish(&mut self) -> String {
        hex::encode(std::mem::take(&mut self.0).finalize())
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// `(name, hash)` of every built-in algorithm profile, in a fixed order.
pub fn profile_hashes() -> Vec<(String, String)> {
    let h = |v: serde_json::Value| sha256_hex(&serde_json::to_vec(&v).unwrap());
    let gwp = GwpConfig::<f64>::new(Vec3::new(1.0, 1.0, 1.0));
    vec![
        (format!("netplan/{DESK_PROFILE}"), h(serde_json::to_value(NetPlanConfig::<f64>::desk_profile()).unwrap())),
        ("channel/default-budget".into(), h(serde_json::to_value(LinkBudget::<f64>::default()).unwrap())),
        ("channel/mcs-80211ac-160mhz".into(), h(serde_json::to_value(McsTable::<f64>::default()).unwrap())),
        ("routing/default".into(), h(serde_json::to_value(RoutingConfig::<f64>::default().selection).unwrap())),
        (
            "gwp/default".into(),
            h(serde_json::json!({
                "power_start_dbm": gwp.power_start_dbm,
                "power_step_dbm": gwp.power_step_dbm,
                "power_max_dbm": gwp.power_max_dbm,
                "grid_resolution": gwp.grid_resolution,
                "refine_passes": gwp.refine_passes,
            })),
        ),
    ]
}
