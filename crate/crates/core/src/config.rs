//! Run configuration: TOML (or JSON) with explicit unit suffixes.
//!
//! Frequencies are written as linear frequencies (`"7 GHz"`, `"0.5 MHz"`)
//! and converted to angular rad·MHz on load. Rates follow the same rule, so
//! `pump_rate = "50 MHz"` means Γ = 2π·50 MHz. A quantity without a unit is
//! rejected.

use std::fmt;
use std::marker::PhantomData;
use std::path::Path;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::circuit::{CircuitDesign, CircuitError, CouplingConvention, CrossCapacitance, ReservoirSpec};
use crate::lindblad::SolverOptions;
use crate::sweep::{linspace, logspace, HausdorffOptions, MultiresOptions};
use crate::units;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("unsupported schema_version {found} (supported: {SCHEMA_VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Design(#[from] CircuitError),
}

/// Physical dimension of a [`Quantity`] and its accepted unit suffixes with
/// their scale to the base unit.
pub trait Dimension {
    const NAME: &'static str;
    const UNITS: &'static [(&'static str, f64)];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyDim;
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacitanceDim;
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxDim;

impl Dimension for FrequencyDim {
    const NAME: &'static str = "frequency";
    // Base unit: MHz.
    const UNITS: &'static [(&'static str, f64)] = &[("GHz", 1e3), ("MHz", 1.0), ("kHz", 1e-3), ("Hz", 1e-6)];
}

impl Dimension for CapacitanceDim {
    const NAME: &'static str = "capacitance";
    // Base unit: fF.
    const UNITS: &'static [(&'static str, f64)] = &[("fF", 1.0), ("pF", 1e3)];
}

impl Dimension for FluxDim {
    const NAME: &'static str = "flux";
    const UNITS: &'static [(&'static str, f64)] = &[("phi0", 1.0)];
}

/// A number with a unit suffix, kept as written so that configs serialize
/// back unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity<D> {
    pub value: f64,
    unit: &'static str,
    scale: f64,
    dim: PhantomData<D>,
}

pub type Frequency = Quantity<FrequencyDim>;
pub type Capacitance = Quantity<CapacitanceDim>;
pub type Flux = Quantity<FluxDim>;

impl<D: Dimension> Quantity<D> {
    pub fn new(value: f64, unit: &str) -> Result<Self, String> {
        let &(unit, scale) = D::UNITS
            .iter()
            .find(|(u, _)| *u == unit)
            .ok_or_else(|| format!("unknown {} unit `{unit}` (expected one of {})", D::NAME, Self::suffixes()))?;
        if !value.is_finite() {
            return Err(format!("{} value must be finite", D::NAME));
        }
        Ok(Self { value, unit, scale, dim: PhantomData })
    }

    fn suffixes() -> String {
        D::UNITS.iter().map(|(u, _)| *u).collect::<Vec<_>>().join(", ")
    }

    pub fn unit(&self) -> &str {
        self.unit
    }

    /// Value in the base unit of the dimension.
    pub fn base(&self) -> f64 {
        self.value * self.scale
    }
}

impl<D: Dimension> std::str::FromStr for Quantity<D> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let split = s
            .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
            .or_else(|| s.find(char::is_whitespace));
        let Some(at) = split else {
            return Err(format!("`{s}` has no unit suffix (expected one of {})", Self::suffixes()));
        };
        let (number, unit) = s.split_at(at);
        let value: f64 = number.trim().parse().map_err(|_| format!("`{s}` does not start with a number"))?;
        Self::new(value, unit.trim())
    }
}

impl<D: Dimension> fmt::Display for Quantity<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

impl<D: Dimension> Serialize for Quantity<D> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de, D: Dimension> Deserialize<'de> for Quantity<D> {
    fn deserialize<De: Deserializer<'de>>(d: De) -> Result<Self, De::Error> {
        struct V<D>(PhantomData<D>);
        impl<D: Dimension> Visitor<'_> for V<D> {
            type Value = Quantity<D>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a {} with a unit suffix ({})", D::NAME, Quantity::<D>::suffixes())
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                Err(E::custom(format!("{v} has no unit suffix (expected one of {})", Quantity::<D>::suffixes())))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }
        }
        d.deserialize_any(V(PhantomData))
    }
}

impl Frequency {
    /// Angular frequency in rad·MHz.
    pub fn angular(&self) -> f64 {
        units::mhz(self.base())
    }

    /// Linear frequency in GHz (for E/h energies).
    pub fn linear_ghz(&self) -> f64 {
        self.base() * 1e-3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Evenly spaced grid; `full_points` replaces `points` under `--full-scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid<T> {
    pub start: T,
    pub stop: T,
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_points: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
}

impl<T> Grid<T> {
    fn new(start: T, stop: T, points: usize, full_points: Option<usize>, spacing: Spacing) -> Self {
        Self { start, stop, points, full_points, spacing }
    }

    fn values_with(&self, full_scale: bool, f: impl Fn(&T) -> f64) -> Vec<f64> {
        let n = if full_scale { self.full_points.unwrap_or(self.points) } else { self.points };
        match self.spacing {
            Spacing::Linear => linspace(f(&self.start), f(&self.stop), n),
            Spacing::Log => logspace(f(&self.start), f(&self.stop), n),
        }
    }

    fn check(&self, field: &str, f: impl Fn(&T) -> f64) -> Result<(), ConfigError> {
        let bad = |message: &str| Err(ConfigError::Field { field: field.into(), message: message.into() });
        if self.points == 0 || self.full_points == Some(0) {
            return bad("grid needs at least one point");
        }
        if self.spacing == Spacing::Log && (f(&self.start) <= 0.0 || f(&self.stop) <= 0.0) {
            return bad("log grid endpoints must be positive");
        }
        Ok(())
    }
}

impl Grid<f64> {
    pub fn values(&self, full_scale: bool) -> Vec<f64> {
        self.values_with(full_scale, |x| *x)
    }
}

impl Grid<Frequency> {
    /// Grid values in rad·MHz.
    pub fn angular(&self, full_scale: bool) -> Vec<f64> {
        self.values_with(full_scale, Frequency::angular)
    }
}

impl Grid<Flux> {
    pub fn values(&self, full_scale: bool) -> Vec<f64> {
        self.values_with(full_scale, Flux::base)
    }
}

fn ghz(v: f64) -> Frequency {
    Frequency::new(v, "GHz").expect("static unit")
}
fn mhz(v: f64) -> Frequency {
    Frequency::new(v, "MHz").expect("static unit")
}
fn ff(v: f64) -> Capacitance {
    Capacitance::new(v, "fF").expect("static unit")
}
fn phi0(v: f64) -> Flux {
    Flux::new(v, "phi0").expect("static unit")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirBlock {
    pub frequency: Frequency,
    pub loss_rate: Frequency,
    pub capacitance: Capacitance,
    pub coupler_capacitance: Capacitance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossCapacitanceBlock {
    pub first: usize,
    pub second: usize,
    pub capacitance: Capacitance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignBlock {
    pub source_frequency: Frequency,
    pub pump_rate: Frequency,
    pub source_capacitance: Capacitance,
    pub source_coupler_capacitance: Capacitance,
    pub coupler_ej1: Frequency,
    pub coupler_ej2: Frequency,
    pub coupler_ec: Frequency,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_relaxation: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_dephasing: Option<Frequency>,
    pub reservoirs: Vec<ReservoirBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cross_capacitances: Vec<CrossCapacitanceBlock>,
}

impl DesignBlock {
    pub fn to_design(&self) -> CircuitDesign {
        CircuitDesign {
            source_frequency: self.source_frequency.angular(),
            gamma_pump: self.pump_rate.angular(),
            source_self_capacitance: self.source_capacitance.base(),
            source_coupler_capacitance: self.source_coupler_capacitance.base(),
            coupler_ej1: self.coupler_ej1.linear_ghz(),
            coupler_ej2: self.coupler_ej2.linear_ghz(),
            coupler_ec: self.coupler_ec.linear_ghz(),
            reservoirs: self
                .reservoirs
                .iter()
                .map(|r| ReservoirSpec {
                    frequency: r.frequency.angular(),
                    loss_rate: r.loss_rate.angular(),
                    self_capacitance: r.capacitance.base(),
                    coupler_capacitance: r.coupler_capacitance.base(),
                })
                .collect(),
            cross_capacitances: self
                .cross_capacitances
                .iter()
                .map(|c| CrossCapacitance { first: c.first, second: c.second, capacitance: c.capacitance.base() })
                .collect(),
            source_relaxation: self.source_relaxation.map_or(0.0, |q| q.angular()),
            source_dephasing: self.source_dephasing.map_or(0.0, |q| q.angular()),
        }
    }

    pub fn reference() -> Self {
        Self {
            source_frequency: ghz(7.0),
            pump_rate: mhz(50.0),
            source_capacitance: ff(100.0),
            source_coupler_capacitance: ff(3.5),
            coupler_ej1: ghz(10.02),
            coupler_ej2: ghz(8.532),
            coupler_ec: mhz(200.0),
            source_relaxation: None,
            source_dephasing: None,
            reservoirs: vec![ReservoirBlock {
                frequency: ghz(7.0),
                loss_rate: mhz(0.5),
                capacitance: ff(500.0),
                coupler_capacitance: ff(3.5),
            }],
            cross_capacitances: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Conventions {
    /// Use the halved prefactor in the second-order coupling.
    pub sw_half_factor: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteadyBlock {
    pub flux: Flux,
    /// Also write the reservoir Wigner function.
    pub wigner: bool,
}

impl Default for SteadyBlock {
    fn default() -> Self {
        Self { flux: phi0(0.0), wigner: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluxSweepBlock {
    pub flux: Grid<Flux>,
    pub keep_distributions: bool,
}

impl Default for FluxSweepBlock {
    fn default() -> Self {
        Self { flux: Grid::new(phi0(0.0), phi0(0.5), 21, Some(101), Spacing::Linear), keep_distributions: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseDiagramBlock {
    pub pump_rate: Grid<Frequency>,
    pub loss_rate: Grid<Frequency>,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl Default for PhaseDiagramBlock {
    fn default() -> Self {
        Self {
            pump_rate: Grid::new(mhz(5.0), mhz(100.0), 8, Some(30), Spacing::Log),
            loss_rate: Grid::new(mhz(0.1), mhz(2.0), 8, Some(30), Spacing::Log),
            lambda_min: 0.1,
            lambda_max: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustnessBlock {
    /// Relative error range (0.2 = ±20%).
    pub range: f64,
    pub steps: usize,
    pub full_steps: usize,
}

impl Default for RobustnessBlock {
    fn default() -> Self {
        Self { range: 0.2, steps: 9, full_steps: 41 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiresBlock {
    /// Added to a single-reservoir design as the second reservoir, with the
    /// couplings of the first.
    pub second_reservoir: Frequency,
    /// Pump rate of the scaled working point; `None` keeps the design value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_rate: Option<Frequency>,
    /// Dressed source frequency axis.
    pub source: Grid<Frequency>,
    pub flux: Grid<Flux>,
    /// Truncation near the source; unset uses ⌈Γ/2κ⌉ + 10.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_truncation: Option<usize>,
    pub detuned_truncation: usize,
    /// Detuning, in linewidths, beyond which a reservoir is reduced.
    pub detuning_factor: f64,
    pub tail_tolerance: f64,
}

impl MultiresBlock {
    pub fn options(&self) -> MultiresOptions {
        MultiresOptions {
            base_truncation: self.base_truncation,
            detuned_truncation: self.detuned_truncation,
            detuning_factor: self.detuning_factor,
            tail_tolerance: self.tail_tolerance,
        }
    }
}

impl Default for MultiresBlock {
    fn default() -> Self {
        let d = MultiresOptions::default();
        Self {
            second_reservoir: ghz(7.005),
            pump_rate: Some(mhz(10.0)),
            source: Grid::new(ghz(6.998), ghz(7.009), 12, Some(56), Spacing::Linear),
            flux: Grid::new(phi0(0.0), phi0(0.5), 6, Some(51), Spacing::Linear),
            base_truncation: d.base_truncation,
            detuned_truncation: d.detuned_truncation,
            detuning_factor: d.detuning_factor,
            tail_tolerance: d.tail_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HausdorffBlock {
    pub detuning: Grid<Frequency>,
    pub alpha: Grid<f64>,
    pub flux_points: usize,
    pub retune_source: bool,
}

impl HausdorffBlock {
    pub fn options(&self) -> HausdorffOptions {
        HausdorffOptions { flux_points: self.flux_points, retune_source: self.retune_source }
    }
}

impl Default for HausdorffBlock {
    fn default() -> Self {
        Self {
            detuning: Grid::new(mhz(0.0), mhz(500.0), 11, Some(51), Spacing::Linear),
            alpha: Grid::new(0.85, 1.15, 61, Some(301), Spacing::Linear),
            flux_points: HausdorffOptions::default().flux_points,
            retune_source: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseBlock {
    pub flux: Grid<Flux>,
    pub delta_flux: Flux,
}

impl Default for NoiseBlock {
    fn default() -> Self {
        Self { flux: Grid::new(phi0(0.0), phi0(0.5), 11, Some(51), Spacing::Linear), delta_flux: phi0(1e-5) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingSweepBlock {
    /// Masing-ratio grid; each λ maps to g_eff = √(Γκ/4λ).
    pub lambda: Grid<f64>,
}

impl Default for CouplingSweepBlock {
    fn default() -> Self {
        Self { lambda: Grid::new(0.05, 10.0, 25, Some(121), Spacing::Log) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WignerBlock {
    pub fluxes: Vec<Flux>,
    pub points: usize,
}

impl Default for WignerBlock {
    fn default() -> Self {
        Self { fluxes: vec![phi0(0.0), phi0(0.3), phi0(0.4)], points: 201 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    /// Reservoir truncation; unset uses ⌈Γ/2κ⌉ + 50.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    pub steady: SteadyBlock,
    pub flux_sweep: FluxSweepBlock,
    pub phase_diagram: PhaseDiagramBlock,
    pub robustness: RobustnessBlock,
    pub multires: MultiresBlock,
    pub hausdorff: HausdorffBlock,
    pub noise: NoiseBlock,
    pub coupling_sweep: CouplingSweepBlock,
    pub wigner: WignerBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, Self::Csv | Self::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Self::Json | Self::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub directory: String,
    pub format: OutputFormat,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { directory: "out".into(), format: OutputFormat::Both }
    }
}

/// Configuration as written in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub design: DesignBlock,
    #[serde(default)]
    pub conventions: Conventions,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub sweep: SweepBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

impl ConfigFile {
    pub fn reference() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            design: DesignBlock::reference(),
            conventions: Conventions::default(),
            solver: SolverOptions::default(),
            sweep: SweepBlock::default(),
            output: OutputBlock::default(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

/// Validated configuration with the design converted to internal units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub file: ConfigFile,
    pub design: CircuitDesign,
    pub convention: CouplingConvention,
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn from_file(file: ConfigFile) -> Result<Self, ConfigError> {
        if file.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::UnsupportedVersion { found: file.schema_version });
        }
        let s = &file.sweep;
        s.flux_sweep.flux.check("sweep.flux_sweep.flux", Flux::base)?;
        s.phase_diagram.pump_rate.check("sweep.phase_diagram.pump_rate", Frequency::base)?;
        s.phase_diagram.loss_rate.check("sweep.phase_diagram.loss_rate", Frequency::base)?;
        s.multires.source.check("sweep.multires.source", Frequency::base)?;
        s.multires.flux.check("sweep.multires.flux", Flux::base)?;
        s.hausdorff.detuning.check("sweep.hausdorff.detuning", Frequency::base)?;
        s.hausdorff.alpha.check("sweep.hausdorff.alpha", |x| *x)?;
        s.noise.flux.check("sweep.noise.flux", Flux::base)?;
        s.coupling_sweep.lambda.check("sweep.coupling_sweep.lambda", |x| *x)?;
        if !(s.phase_diagram.lambda_min > 0.0 && s.phase_diagram.lambda_min <= s.phase_diagram.lambda_max) {
            return Err(ConfigError::Field {
                field: "sweep.phase_diagram".into(),
                message: "need 0 < lambda_min <= lambda_max".into(),
            });
        }
        file.solver
            .validate()
            .map_err(|e| ConfigError::Field { field: "solver".into(), message: e.to_string() })?;
        let design = file.design.to_design();
        let warnings = design.validate()?;
        let convention = CouplingConvention::from_half_factor(file.conventions.sw_half_factor);
        Ok(Self { file, design, convention, warnings })
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(format!("JSON config: {e}")))?
        } else {
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?
        };
        Self::from_file(file)
    }

    pub fn reference() -> Self {
        Self::from_file(ConfigFile::reference()).expect("reference config is valid")
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    RunConfig::parse_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantities_parse_with_units() {
        let f: Frequency = "7 GHz".parse().unwrap();
        assert_eq!(f.angular(), units::ghz(7.0));
        let f: Frequency = "200MHz".parse().unwrap();
        assert!((f.linear_ghz() - 0.2).abs() < 1e-15);
        let f: Frequency = "1e-3 GHz".parse().unwrap();
        assert_eq!(f.base(), 1.0);
        assert_eq!(f.to_string(), "0.001 GHz");
        assert!("7".parse::<Frequency>().is_err());
        assert!("7 fF".parse::<Frequency>().is_err());
        assert!("7 mhz".parse::<Frequency>().is_err());
        assert_eq!("2 pF".parse::<Capacitance>().unwrap().base(), 2000.0);
    }

    #[test]
    fn bare_number_is_rejected() {
        let mut text = ConfigFile::reference().to_toml();
        text = text.replace("source_frequency = \"7 GHz\"", "source_frequency = 7.0");
        let err = RunConfig::parse_str(&text).unwrap_err().to_string();
        assert!(err.contains("no unit suffix"), "{err}");
    }

    #[test]
    fn reference_round_trips() {
        let cfg = ConfigFile::reference();
        let text = cfg.to_toml();
        let back = RunConfig::parse_str(&text).unwrap();
        assert_eq!(back.file, cfg);
        assert_eq!(back.file.to_toml(), text);
        assert_eq!(back.design, CircuitDesign::reference());
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::parse_str(&json).unwrap().file, cfg);
    }

    #[test]
    fn unknown_keys_and_versions_are_rejected() {
        let text = ConfigFile::reference().to_toml().replace("[design]", "[design]\nbogus = \"1 MHz\"");
        assert!(RunConfig::parse_str(&text).unwrap_err().to_string().contains("bogus"));
        let text = ConfigFile::reference().to_toml().replace("schema_version = 1", "schema_version = 9");
        assert!(matches!(RunConfig::parse_str(&text), Err(ConfigError::UnsupportedVersion { found: 9 })));
    }

    #[test]
    fn empty_reservoir_list_is_rejected() {
        let mut cfg = ConfigFile::reference();
        cfg.design.reservoirs.clear();
        assert!(matches!(RunConfig::from_file(cfg), Err(ConfigError::Design(_))));
    }

    #[test]
    fn full_scale_grids() {
        let g = FluxSweepBlock::default().flux;
        assert_eq!(g.values(false).len(), 21);
        assert_eq!(g.values(true).len(), 101);
    }

    #[test]
    fn shipped_config_is_the_reference() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/reference_design.cfg");
        let cfg = parse_config(&path).unwrap();
        assert_eq!(cfg.file, ConfigFile::reference());
        assert_eq!(cfg.design, CircuitDesign::reference());
        assert_eq!(cfg.convention, CouplingConvention::Full);
        assert!(cfg.warnings.is_empty());
    }
}
