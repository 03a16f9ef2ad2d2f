//! Free-space link budget, SNR gating, Shannon capacity and the SNR to MCS rate table.
//!
//! Received power follows the Friis free-space model with isotropic antennas:
//! `P_R = P_T + 20 log10(c / (4 pi d f))`, with `c = 3e8 m/s`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Propagation speed used by the budget. Fixed at 3e8 m/s, not 299 792 458.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Radio configuration of a link. Antenna gains are 0 dBi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget<T> {
    pub tx_power_dbm: T,
    pub freq_hz: T,
    pub bandwidth_hz: T,
    pub noise_dbm: T,
    pub snr_threshold_db: T,
    /// Rician K-factor, UE to FMAP. Documentation only: fading is not simulated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rician_k_up: Option<T>,
    /// Rician K-factor, FMAP to UE. Documentation only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rician_k_down: Option<T>,
}

impl<T: Real> Default for LinkBudget<T> {
    /// 0 dBm, 5250 MHz, 160 MHz, -85 dBm noise, 5 dB threshold.
    fn default() -> Self {
        Self {
            tx_power_dbm: T::zero(),
            freq_hz: T::lit(5250e6),
            bandwidth_hz: T::lit(160e6),
            noise_dbm: T::lit(-85.0),
            snr_threshold_db: T::lit(5.0),
            rician_k_up: None,
            rician_k_down: None,
        }
    }
}

impl<T: Real> LinkBudget<T> {
    pub fn with_tx_power(mut self, tx_power_dbm: T) -> Self {
        self.tx_power_dbm = tx_power_dbm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.freq_hz > T::zero()) {
            return Err(Error::invalid("carrier frequency must be positive"));
        }
        if !(self.bandwidth_hz > T::zero()) {
            return Err(Error::invalid("bandwidth must be positive"));
        }
        if !self.snr_threshold_db.is_finite() || !self.tx_power_dbm.is_finite() || !self.noise_dbm.is_finite() {
            return Err(Error::invalid("link budget powers and threshold must be finite"));
        }
        Ok(())
    }

    /// Free-space gain at 1 m, `20 log10(c / (4 pi f))`, in dB (negative).
    pub fn gain_at_1m_db(&self) -> T {
        let c = T::lit(SPEED_OF_LIGHT);
        let four_pi = T::lit(4.0) * T::PI();
        T::lit(20.0) * (c / (four_pi * self.freq_hz)).log10()
    }

    /// SNR at 1 m for 0 dBm transmit power: `-20 log10(4 pi / c) - 20 log10(f) - N`.
    pub fn budget_constant_db(&self) -> T {
        self.gain_at_1m_db() - self.noise_dbm
    }

    pub fn rx_power_dbm(&self, d: T) -> Result<T> {
        check_distance(d)?;
        Ok(self.tx_power_dbm + self.gain_at_1m_db() - T::lit(20.0) * d.log10())
    }

    pub fn snr_db(&self, d: T) -> Result<T> {
        Ok(self.rx_power_dbm(d)? - self.noise_dbm)
    }

    /// Link exists iff the SNR is strictly above the threshold.
    pub fn link_available(&self, d: T) -> Result<bool> {
        Ok(self.snr_db(d)? > self.snr_threshold_db)
    }

    pub fn shannon_capacity_bps(&self, d: T) -> Result<T> {
        Ok(capacity_from_snr_db(self.bandwidth_hz, self.snr_db(d)?))
    }

    /// Distance at which the SNR equals `snr_db` (the inverse of [`Self::snr_db`]).
    pub fn distance_for_snr(&self, snr_db: T) -> T {
        T::lit(10.0).powf((self.budget_constant_db() + self.tx_power_dbm - snr_db) / T::lit(20.0))
    }

    /// Distance at which received power equals `rx_dbm`.
    pub fn distance_for_rx_power(&self, rx_dbm: T) -> T {
        self.distance_for_snr(rx_dbm - self.noise_dbm)
    }

    /// Largest distance at which the link is still (just) unavailable: links exist strictly inside it.
    pub fn max_range(&self) -> T {
        self.distance_for_snr(self.snr_threshold_db)
    }
}

fn check_distance<T: Real>(d: T) -> Result<()> {
    if d > T::zero() && d.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("link distance must be positive and finite, got {d}")))
    }
}

pub fn db_to_linear<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

pub fn linear_to_db<T: Real>(lin: T) -> T {
    T::lit(10.0) * lin.log10()
}

/// `B log2(1 + SNR)`.
pub fn capacity_from_snr_db<T: Real>(bandwidth_hz: T, snr_db: T) -> T {
    bandwidth_hz * (T::one() + db_to_linear(snr_db)).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsRow<T> {
    pub min_snr_db: T,
    pub phy_rate_bps: T,
}

/// SNR to physical rate mapping, strictly increasing in both columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsTable<T> {
    rows: Vec<McsRow<T>>,
}

impl<T: Real> McsTable<T> {
    pub fn new(rows: Vec<McsRow<T>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("MCS table is empty"));
        }
        if rows.iter().any(|r| !r.min_snr_db.is_finite() || !(r.phy_rate_bps > T::zero())) {
            return Err(Error::invalid("MCS rows need finite SNR and positive rate"));
        }
        if rows.windows(2).any(|w| !(w[1].min_snr_db > w[0].min_snr_db) || !(w[1].phy_rate_bps > w[0].phy_rate_bps)) {
            return Err(Error::invalid("MCS rows must be strictly increasing in SNR and rate"));
        }
        Ok(Self { rows })
    }

    /// 802.11ac, one spatial stream, 160 MHz, 800 ns GI (extract).
    pub fn ieee80211ac_160mhz() -> Self {
        let rows = [(12.0, 58.5e6), (20.0, 234e6), (35.0, 702e6), (37.0, 780e6)]
            .into_iter()
            .map(|(s, r)| McsRow { min_snr_db: T::lit(s), phy_rate_bps: T::lit(r) })
            .collect();
        Self { rows }
    }

    pub fn rows(&self) -> &[McsRow<T>] {
        &self.rows
    }

    pub fn top_rate(&self) -> T {
        self.rows[self.rows.len() - 1].phy_rate_bps
    }

    /// Highest rate whose SNR requirement is met; 0 below the table.
    pub fn rate_for_snr(&self, snr_db: T) -> T {
        self.rows.iter().rev().find(|r| r.min_snr_db <= snr_db).map(|r| r.phy_rate_bps).unwrap_or_else(T::zero)
    }

    /// Smallest tabulated SNR whose per-sharer rate carries `demand_bps`.
    ///
    /// The comparison allows a relative slack of 1e-9 so that demands computed as an
    /// exact fraction of a table rate (e.g. `0.9 * 780 / 10`) land on that row.
    pub fn min_snr_for_demand(&self, demand_bps: T, sharers: usize) -> Result<T> {
        if sharers == 0 {
            return Err(Error::invalid("at least one sharer is required"));
        }
        if !(demand_bps >= T::zero()) {
            return Err(Error::invalid(format!("demand must be non-negative, got {demand_bps}")));
        }
        let n = T::from_usize(sharers).unwrap();
        let slack = T::one() + T::lit(1e-9);
        self.rows
            .iter()
            .find(|r| r.phy_rate_bps / n * slack >= demand_bps)
            .map(|r| r.min_snr_db)
            .ok_or_else(|| Error::InfeasibleDemand(format!("{demand_bps} bit/s exceeds top rate {} shared by {sharers}", self.top_rate())))
    }

    /// Reads `min_snr_db,phy_rate_bps` CSV.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["min_snr_db", "phy_rate_bps"] {
            return Err(Error::Schema(format!(
                "MCS header must be `min_snr_db,phy_rate_bps`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for rec in rdr.deserialize::<McsRow<f64>>() {
            let r = rec?;
            rows.push(McsRow { min_snr_db: T::lit(r.min_snr_db), phy_rate_bps: T::lit(r.phy_rate_bps) });
        }
        Self::new(rows)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["min_snr_db", "phy_rate_bps"])?;
        for r in &self.rows {
            w.write_record([r.min_snr_db.to_f64_lossy().to_string(), r.phy_rate_bps.to_f64_lossy().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl<T: Real> Default for McsTable<T> {
    fn default() -> Self {
        Self::ieee80211ac_160mhz()
    }
}
