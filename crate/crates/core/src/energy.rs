//! Consumption and solar-harvest models, and battery bookkeeping.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EnergyError {
    #[error("battery depleted: energy would drop to {energy:.6} J, below the floor of {floor:.6} J")]
    BatteryDepleted { energy: f64, floor: f64 },
    #[error("invalid energy parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Propulsion power draw per motion type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsumptionParams {
    /// Power at cruise speed, W.
    pub level_power: f64,
    pub climb_power: f64,
    pub descent_power: f64,
    /// m/s
    pub cruise_speed: f64,
    pub climb_speed: f64,
    pub descent_speed: f64,
}

impl Default for ConsumptionParams {
    fn default() -> Self {
        ConsumptionParams {
            level_power: 30.0,
            climb_power: 34.0,
            descent_power: 26.0,
            cruise_speed: 12.0,
            climb_speed: 3.0,
            descent_speed: 3.0,
        }
    }
}

impl ConsumptionParams {
    pub fn validate(&self) -> Result<(), EnergyError> {
        let all = [
            self.level_power,
            self.climb_power,
            self.descent_power,
            self.cruise_speed,
            self.climb_speed,
            self.descent_speed,
        ];
        if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(EnergyError::InvalidParameter("consumption powers and speeds must be positive"));
        }
        if !(self.descent_power <= self.level_power && self.level_power <= self.climb_power) {
            return Err(EnergyError::InvalidParameter(
                "powers must satisfy descent <= level <= climb",
            ));
        }
        Ok(())
    }
}

/// Photovoltaic and atmosphere constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarvestParams {
    /// Cell efficiency in (0, 1].
    pub efficiency: f64,
    /// Solar spectral density, W/m^2.
    pub spectral_density: f64,
    /// Panel area, m^2.
    pub panel_area: f64,
    /// Cloud layer top and base, m.
    #[serde(default = "default_cloud_top")]
    pub cloud_top: f64,
    #[serde(default = "default_cloud_base")]
    pub cloud_base: f64,
    /// Absorption coefficient, 1/m (cloud model) or dimensionless (altitude model).
    #[serde(default = "default_absorption")]
    pub absorption: f64,
    /// Maximum atmospheric transmittance term of the altitude model (enters the exponent).
    #[serde(default)]
    pub max_transmittance: f64,
    /// Scale height, m.
    #[serde(default = "default_scale_height")]
    pub scale_height: f64,
}

fn default_cloud_top() -> f64 {
    1000.0
}
fn default_cloud_base() -> f64 {
    700.0
}
fn default_absorption() -> f64 {
    0.01
}
fn default_scale_height() -> f64 {
    8000.0
}

impl Default for HarvestParams {
    fn default() -> Self {
        HarvestParams {
            efficiency: 0.2,
            spectral_density: 380.0,
            panel_area: 0.3,
            cloud_top: default_cloud_top(),
            cloud_base: default_cloud_base(),
            absorption: default_absorption(),
            max_transmittance: 0.0,
            scale_height: default_scale_height(),
        }
    }
}

impl HarvestParams {
    pub fn validate(&self) -> Result<(), EnergyError> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(EnergyError::InvalidParameter("efficiency must lie in (0, 1]"));
        }
        if !(self.spectral_density > 0.0 && self.panel_area > 0.0) {
            return Err(EnergyError::InvalidParameter("spectral density and panel area must be positive"));
        }
        if !(self.cloud_base < self.cloud_top) {
            return Err(EnergyError::InvalidParameter("cloud base must lie below cloud top"));
        }
        if !(self.absorption >= 0.0) {
            return Err(EnergyError::InvalidParameter("absorption coefficient must be non-negative"));
        }
        if !(self.scale_height > 0.0) {
            return Err(EnergyError::InvalidParameter("scale height must be positive"));
        }
        Ok(())
    }

    /// Unattenuated panel output `eta * G * S`.
    pub fn peak_power(&self) -> f64 {
        self.efficiency * self.spectral_density * self.panel_area
    }
}

/// Which irradiance model drives the harvest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HarvestModel {
    /// Incidence-angle model with obstacle shadowing.
    #[default]
    ClearSky,
    /// Piecewise attenuation through a cloud layer.
    Cloud,
    /// Smooth altitude-dependent transmittance.
    Altitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    pub consumption: ConsumptionParams,
    pub harvest: HarvestParams,
    #[serde(default)]
    pub model: HarvestModel,
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel {
            consumption: ConsumptionParams::default(),
            harvest: HarvestParams::default(),
            model: HarvestModel::ClearSky,
        }
    }
}

impl EnergyModel {
    pub fn validate(&self) -> Result<(), EnergyError> {
        self.consumption.validate()?;
        self.harvest.validate()
    }

    /// Instantaneous harvest power at altitude `z` with incidence cosine
    /// `cos_incidence`. Shadowed points harvest nothing under every model.
    pub fn harvest_power(&self, z: f64, cos_incidence: f64, shadowed: bool) -> f64 {
        if shadowed {
            return 0.0;
        }
        match self.model {
            HarvestModel::ClearSky => harvest_power_clear(cos_incidence, false, &self.harvest),
            HarvestModel::Cloud => harvest_power_cloud(z, &self.harvest),
            HarvestModel::Altitude => harvest_power_altitude(z, &self.harvest),
        }
    }

    /// Upper bound of [`Self::harvest_power`] over the altitude band.
    pub fn max_harvest_power(&self, altitude: (f64, f64)) -> f64 {
        let hp = &self.harvest;
        match self.model {
            HarvestModel::ClearSky => hp.peak_power(),
            HarvestModel::Cloud => harvest_power_cloud(altitude.1, hp),
            HarvestModel::Altitude => harvest_power_altitude(altitude.1, hp),
        }
    }

    /// Propulsion power while moving horizontally at any speed (`horizontal`)
    /// and vertically at rate `vertical_rate`.
    pub fn consumption_power(&self, horizontal: bool, vertical_rate: f64) -> f64 {
        let c = &self.consumption;
        let level = if horizontal { c.level_power } else { 0.0 };
        let vertical = if vertical_rate > 0.0 {
            c.climb_power
        } else if vertical_rate < 0.0 {
            c.descent_power
        } else {
            0.0
        };
        level + vertical
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    Level,
    Climb,
    Descend,
}

/// One straight move, decomposed into a horizontal and a vertical part
/// flown simultaneously; the slower part sets the duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionSegment {
    kind: SegmentKind,
    horizontal: f64,
    vertical: f64,
    duration: f64,
}

impl MotionSegment {
    /// `horizontal >= 0` metres covered in plan, `vertical` signed altitude change.
    pub fn new(horizontal: f64, vertical: f64, params: &ConsumptionParams) -> Self {
        let kind = if vertical > 0.0 {
            SegmentKind::Climb
        } else if vertical < 0.0 {
            SegmentKind::Descend
        } else {
            SegmentKind::Level
        };
        let level_time = horizontal.abs() / params.cruise_speed;
        let vertical_time = match kind {
            SegmentKind::Level => 0.0,
            SegmentKind::Climb => vertical / params.climb_speed,
            SegmentKind::Descend => -vertical / params.descent_speed,
        };
        MotionSegment {
            kind,
            horizontal: horizontal.abs(),
            vertical,
            duration: level_time.max(vertical_time),
        }
    }

    pub fn between(a: Vec3, b: Vec3, params: &ConsumptionParams) -> Self {
        Self::new(a.distance_xy(b), b.z - a.z, params)
    }

    pub fn kind(&self) -> SegmentKind {
        self.kind
    }

    pub fn horizontal(&self) -> f64 {
        self.horizontal
    }

    pub fn vertical(&self) -> f64 {
        self.vertical
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn length(&self) -> f64 {
        self.horizontal.hypot(self.vertical)
    }
}

/// Propulsion energy of a segment: each active component draws its power for
/// the whole segment duration.
pub fn consumption_energy(seg: &MotionSegment, params: &ConsumptionParams) -> f64 {
    let level = if seg.horizontal > 0.0 {
        params.level_power * seg.duration
    } else {
        0.0
    };
    let vertical = match seg.kind {
        SegmentKind::Level => 0.0,
        SegmentKind::Climb => params.climb_power * seg.duration,
        SegmentKind::Descend => params.descent_power * seg.duration,
    };
    level + vertical
}

/// Cosine of the sun's incidence angle on a body-fixed panel with bank `bank`
/// and heading `heading`.
pub fn incidence_cosine(bank: f64, heading: f64, azimuth: f64, elevation: f64) -> f64 {
    let c = bank.cos() * elevation.sin() - elevation.cos() * (azimuth - heading).sin() * bank.sin();
    c.clamp(-1.0, 1.0)
}

/// Clear-sky panel output, zero when shadowed or lit from behind.
pub fn harvest_power_clear(cos_incidence: f64, shadowed: bool, hp: &HarvestParams) -> f64 {
    if shadowed || cos_incidence < 0.0 {
        0.0
    } else {
        hp.peak_power() * cos_incidence
    }
}

/// Panel output under a cloud layer between `cloud_base` and `cloud_top`.
pub fn harvest_power_cloud(z: f64, hp: &HarvestParams) -> f64 {
    let peak = hp.peak_power();
    if z >= hp.cloud_top {
        peak
    } else if z >= hp.cloud_base {
        peak * (-hp.absorption * (hp.cloud_top - z)).exp()
    } else {
        peak * (-hp.absorption * (hp.cloud_top - hp.cloud_base)).exp()
    }
}

/// Panel output with altitude-dependent atmospheric transmittance.
pub fn harvest_power_altitude(z: f64, hp: &HarvestParams) -> f64 {
    hp.peak_power() * (hp.max_transmittance - hp.absorption * (-z / hp.scale_height).exp()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryState {
    /// Stored energy, J.
    pub energy: f64,
    /// Capacity, J.
    pub capacity: f64,
    /// Hard floor, J.
    pub floor: f64,
}

/// Result of applying one step of energy flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryUpdate {
    pub state: BatteryState,
    /// Harvest discarded because the battery was full.
    pub clamp_loss: f64,
}

impl BatteryState {
    /// Full battery.
    pub fn full(capacity: f64, floor: f64) -> Self {
        BatteryState {
            energy: capacity,
            capacity,
            floor,
        }
    }

    pub fn validate(&self) -> Result<(), EnergyError> {
        if !(self.floor <= self.energy && self.energy <= self.capacity && self.floor >= 0.0) {
            return Err(EnergyError::InvalidParameter("battery needs 0 <= floor <= energy <= capacity"));
        }
        Ok(())
    }

    /// Usable energy above the floor.
    pub fn headroom(&self) -> f64 {
        self.energy - self.floor
    }

    pub fn apply(&self, consumed: f64, harvested: f64) -> Result<BatteryUpdate, EnergyError> {
        let raw = self.energy - consumed + harvested;
        let energy = raw.min(self.capacity);
        if energy < self.floor {
            return Err(EnergyError::BatteryDepleted {
                energy,
                floor: self.floor,
            });
        }
        Ok(BatteryUpdate {
            state: BatteryState { energy, ..*self },
            clamp_loss: raw - energy,
        })
    }
}

/// One bookkeeping step: subtract consumption, add harvest, clamp to capacity.
pub fn battery_step(b: &BatteryState, consumed: f64, harvested: f64) -> Result<BatteryState, EnergyError> {
    b.apply(consumed, harvested).map(|u| u.state)
}
