use serde::{Deserialize, Serialize};

use super::params::ModelParams;

/// Phenological stage. Variant order is progression order; [`Stage::code`]
/// gives the conventional maize stage number (7, 8, 9, 1, ..., 6), with 0
/// for a field that has not been sown yet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Unplanted,
    Sowing,
    Germination,
    Emergence,
    EndJuvenile,
    FloralInitiation,
    Silking,
    GrainFillStart,
    GrainFillEnd,
    Maturity,
}

impl Stage {
    pub const PLANTED_SEQUENCE: [Stage; 9] = [
        Stage::Sowing,
        Stage::Germination,
        Stage::Emergence,
        Stage::EndJuvenile,
        Stage::FloralInitiation,
        Stage::Silking,
        Stage::GrainFillStart,
        Stage::GrainFillEnd,
        Stage::Maturity,
    ];

    pub fn code(self) -> u8 {
        match self {
            Stage::Unplanted => 0,
            Stage::Sowing => 7,
            Stage::Germination => 8,
            Stage::Emergence => 9,
            Stage::EndJuvenile => 1,
            Stage::FloralInitiation => 2,
            Stage::Silking => 3,
            Stage::GrainFillStart => 4,
            Stage::GrainFillEnd => 5,
            Stage::Maturity => 6,
        }
    }

    pub fn from_code(code: u8) -> Option<Stage> {
        std::iter::once(Stage::Unplanted)
            .chain(Self::PLANTED_SEQUENCE)
            .find(|s| s.code() == code)
    }

    pub fn next(self) -> Option<Stage> {
        match self {
            Stage::Unplanted => Some(Stage::Sowing),
            Stage::Maturity => None,
            s => {
                let i = Self::PLANTED_SEQUENCE.iter().position(|x| *x == s)?;
                Self::PLANTED_SEQUENCE.get(i + 1).copied()
            }
        }
    }

    /// Thermal-time threshold (since planting) for entering this stage.
    pub fn threshold(self, params: &ModelParams) -> Option<f64> {
        let t = &params.thresholds;
        Some(match self {
            Stage::Unplanted | Stage::Sowing => return None,
            Stage::Germination => t.germination,
            Stage::Emergence => t.emergence,
            Stage::EndJuvenile => t.end_juvenile,
            Stage::FloralInitiation => t.floral_initiation,
            Stage::Silking => t.silking,
            Stage::GrainFillStart => t.grain_fill_start,
            Stage::GrainFillEnd => t.grain_fill_end,
            Stage::Maturity => t.maturity,
        })
    }

    /// Leaf appearance and canopy expansion happen in these stages.
    pub fn is_vegetative(self) -> bool {
        matches!(self, Stage::Emergence | Stage::EndJuvenile | Stage::FloralInitiation)
    }

    pub fn is_grain_filling(self) -> bool {
        matches!(self, Stage::GrainFillStart | Stage::GrainFillEnd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalCause {
    Maturity,
    /// Combined stress stayed under the failure threshold for too long.
    StressFailure,
    /// The crop had not emerged by the deadline.
    NoEmergence,
    /// The episode hit its maximum length.
    LengthGuard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropState {
    pub stage: Stage,
    /// Leaf number.
    pub vstage: f64,
    /// Cumulative thermal time since planting, °C·day.
    pub gdd: f64,
    /// Thermal time of the last simulated day, °C/day.
    pub dtt: f64,
    pub topwt: f64,
    pub grnwt: f64,
    /// Grain N mass, kg/ha.
    pub grain_n: f64,
    /// Total plant N mass (including grain), kg/ha.
    pub plant_n: f64,
    pub pcngrn: f64,
    pub xlai: f64,
    /// cm
    pub rtdep: f64,
    pub swfac: f64,
    pub nstres: f64,
    pub dap: u32,
    /// Consecutive post-emergence days under the failure stress threshold.
    pub stress_days: u32,
    /// Yesterday's water-limited, N-unlimited biomass increment.
    pub potential_growth: f64,
}

impl CropState {
    pub fn unplanted() -> Self {
        Self {
            stage: Stage::Unplanted,
            vstage: 0.0,
            gdd: 0.0,
            dtt: 0.0,
            topwt: 0.0,
            grnwt: 0.0,
            grain_n: 0.0,
            plant_n: 0.0,
            pcngrn: 0.0,
            xlai: 0.0,
            rtdep: 0.0,
            swfac: 1.0,
            nstres: 1.0,
            dap: 0,
            stress_days: 0,
            potential_growth: 0.0,
        }
    }

    /// Sow the field. No-op on a planted field.
    pub fn plant(&mut self, params: &ModelParams) {
        if self.is_planted() {
            return;
        }
        *self = CropState {
            stage: Stage::Sowing,
            rtdep: params.seed_depth.min(params.profile_depth()),
            ..CropState::unplanted()
        };
    }

    pub fn is_planted(&self) -> bool {
        self.stage != Stage::Unplanted
    }

    pub fn is_emerged(&self) -> bool {
        self.stage >= Stage::Emergence
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoilLayer {
    /// cm
    pub thickness: f64,
    /// Volumetric water content, cm³/cm³.
    pub sw: f64,
    pub ll: f64,
    pub dul: f64,
    pub sat: f64,
    /// Mineral (nitrate) N, kg/ha.
    pub no3: f64,
}

impl SoilLayer {
    /// mm of water held per unit volumetric content.
    pub fn mm_per_unit(&self) -> f64 {
        self.thickness * 10.0
    }

    pub fn water_mm(&self) -> f64 {
        self.sw * self.mm_per_unit()
    }

    pub fn set_water_mm(&mut self, mm: f64) {
        self.sw = (mm / self.mm_per_unit()).clamp(self.ll, self.sat);
    }

    /// Plant-available water above LL, mm.
    pub fn available_mm(&self) -> f64 {
        ((self.sw - self.ll) * self.mm_per_unit()).max(0.0)
    }

    /// Available water as a fraction of the LL..DUL capacity, clamped to [0, 1].
    pub fn available_fraction(&self) -> f64 {
        ((self.sw - self.ll) / (self.dul - self.ll)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoilState {
    pub layers: Vec<SoilLayer>,
    pub wtdep: f64,
    /// Cumulative nitrate leached below the profile, kg/ha.
    pub cleach: f64,
    /// Cumulative surface runoff, mm.
    pub runoff: f64,
}

impl SoilState {
    pub fn total_water_mm(&self) -> f64 {
        self.layers.iter().map(SoilLayer::water_mm).sum()
    }

    pub fn total_n(&self) -> f64 {
        self.layers.iter().map(|l| l.no3).sum()
    }

    pub fn sw(&self) -> Vec<f64> {
        self.layers.iter().map(|l| l.sw).collect()
    }

    /// Fraction of each layer's thickness occupied by roots reaching `rtdep` cm.
    pub fn root_fractions(&self, rtdep: f64) -> Vec<f64> {
        let mut top = 0.0;
        self.layers
            .iter()
            .map(|l| {
                let f = ((rtdep - top) / l.thickness).clamp(0.0, 1.0);
                top += l.thickness;
                f
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_codes_follow_maize_order() {
        let codes: Vec<u8> = Stage::PLANTED_SEQUENCE.iter().map(|s| s.code()).collect();
        assert_eq!(codes, [7, 8, 9, 1, 2, 3, 4, 5, 6]);
        for s in Stage::PLANTED_SEQUENCE {
            assert_eq!(Stage::from_code(s.code()), Some(s));
        }
        assert_eq!(Stage::from_code(0), Some(Stage::Unplanted));
        assert_eq!(Stage::from_code(10), None);
    }

    #[test]
    fn next_walks_the_sequence() {
        let mut s = Stage::Unplanted;
        let mut seen = vec![];
        while let Some(n) = s.next() {
            seen.push(n);
            s = n;
        }
        assert_eq!(seen, Stage::PLANTED_SEQUENCE);
    }

    #[test]
    fn root_fractions_partial_layers() {
        let layer = |t| SoilLayer {
            thickness: t,
            sw: 0.1,
            ll: 0.05,
            dul: 0.15,
            sat: 0.3,
            no3: 0.0,
        };
        let soil = SoilState {
            layers: vec![layer(20.0), layer(30.0), layer(50.0)],
            wtdep: 200.0,
            cleach: 0.0,
            runoff: 0.0,
        };
        assert_eq!(soil.root_fractions(0.0), vec![0.0, 0.0, 0.0]);
        assert_eq!(soil.root_fractions(10.0), vec![0.5, 0.0, 0.0]);
        assert_eq!(soil.root_fractions(35.0), vec![1.0, 0.5, 0.0]);
        assert_eq!(soil.root_fractions(500.0), vec![1.0, 1.0, 1.0]);
    }
}
