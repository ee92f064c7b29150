//! Circuit parameters, the flux-tunable transmon coupler, bare capacitive
//! couplings and the dispersive (coupler-eliminated) effective model.
//!
//! All frequencies and rates are angular, in rad·MHz. Flux is in units of the
//! flux quantum.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::units;

/// Minimum E_J/E_C for which the coupler is treated as a transmon.
pub const TRANSMON_RATIO_MIN: f64 = 20.0;
/// Dispersive ratio g/|Δ| above which a point is rejected.
pub const DISPERSIVE_RATIO_MAX: f64 = 0.3;
/// |K_r|/κ above which the reservoir can no longer be treated as harmonic.
pub const KERR_RATIO_MAX: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error("degenerate detuning: {element} is resonant with the coupler at flux {flux}")]
    DegenerateDetuning { element: String, flux: f64 },
    #[error("effective coupling vanishes, masing ratio is undefined")]
    DegenerateCoupling,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirSpec {
    /// ω_r (rad·MHz)
    pub frequency: f64,
    /// κ (rad·MHz)
    pub loss_rate: f64,
    /// C_r (fF)
    pub self_capacitance: f64,
    /// C_rc (fF)
    pub coupler_capacitance: f64,
}

/// Explicit reservoir–reservoir capacitance overriding the coupler bridge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCapacitance {
    pub first: usize,
    pub second: usize,
    /// fF
    pub capacitance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitDesign {
    /// ω_s (rad·MHz)
    pub source_frequency: f64,
    /// Counter-relaxation (pump) rate Γ (rad·MHz)
    pub gamma_pump: f64,
    /// C_s (fF)
    pub source_self_capacitance: f64,
    /// C_sc (fF)
    pub source_coupler_capacitance: f64,
    /// E_J1/h (GHz)
    pub coupler_ej1: f64,
    /// E_J2/h (GHz)
    pub coupler_ej2: f64,
    /// E_C/h (GHz)
    pub coupler_ec: f64,
    pub reservoirs: Vec<ReservoirSpec>,
    #[serde(default)]
    pub cross_capacitances: Vec<CrossCapacitance>,
    /// Optional source relaxation rate (rad·MHz), off by default.
    #[serde(default)]
    pub source_relaxation: f64,
    /// Optional source pure-dephasing rate (rad·MHz), off by default.
    #[serde(default)]
    pub source_dephasing: f64,
}

impl CircuitDesign {
    /// The reference single-reservoir device: a 7 GHz source pumped at
    /// Γ = 2π·50 MHz, a 7 GHz reservoir with κ = 2π·0.5 MHz and an asymmetric
    /// transmon coupler (E_J1 = 10.02 GHz, E_J2 = 8.532 GHz, E_C = 200 MHz).
    pub fn reference() -> Self {
        Self {
            source_frequency: units::ghz(7.0),
            gamma_pump: units::mhz(50.0),
            source_self_capacitance: 100.0,
            source_coupler_capacitance: 3.5,
            coupler_ej1: 10.02,
            coupler_ej2: 8.532,
            coupler_ec: 0.2,
            reservoirs: vec![ReservoirSpec {
                frequency: units::ghz(7.0),
                loss_rate: units::mhz(0.5),
                self_capacitance: 500.0,
                coupler_capacitance: 3.5,
            }],
            cross_capacitances: Vec::new(),
            source_relaxation: 0.0,
            source_dephasing: 0.0,
        }
    }

    /// Reference device with a second, identically coupled reservoir detuned
    /// by `detuning` (rad·MHz).
    pub fn reference_two_reservoirs(detuning: f64) -> Self {
        let mut design = Self::reference();
        let mut second = design.reservoirs[0].clone();
        second.frequency += detuning;
        design.reservoirs.push(second);
        design
    }

    /// C_c = e²/(2 E_C) in fF.
    pub fn coupler_capacitance(&self) -> f64 {
        units::capacitance_from_charging_energy(self.coupler_ec)
    }

    /// SQUID asymmetry d = (E_J1 − E_J2)/(E_J1 + E_J2).
    pub fn squid_asymmetry(&self) -> f64 {
        (self.coupler_ej1 - self.coupler_ej2) / (self.coupler_ej1 + self.coupler_ej2)
    }

    /// Checks the hard invariants and returns soft warnings.
    pub fn validate(&self) -> Result<Vec<String>, CircuitError> {
        let bad = |msg: String| Err(CircuitError::InvalidDesign(msg));
        let positive = [
            ("source_frequency", self.source_frequency),
            ("gamma_pump", self.gamma_pump),
            ("source_self_capacitance", self.source_self_capacitance),
            ("source_coupler_capacitance", self.source_coupler_capacitance),
            ("coupler_ec", self.coupler_ec),
            ("coupler_ej2", self.coupler_ej2),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return bad(format!("{name} must be positive, got {value}"));
            }
        }
        if self.coupler_ej1 < self.coupler_ej2 {
            return bad(format!(
                "coupler_ej1 ({}) must not be smaller than coupler_ej2 ({})",
                self.coupler_ej1, self.coupler_ej2
            ));
        }
        if self.source_relaxation < 0.0 || self.source_dephasing < 0.0 {
            return bad("source decoherence rates must be non-negative".into());
        }
        if self.reservoirs.is_empty() {
            return bad("at least one reservoir is required".into());
        }
        for (i, r) in self.reservoirs.iter().enumerate() {
            let fields = [
                ("frequency", r.frequency),
                ("loss_rate", r.loss_rate),
                ("self_capacitance", r.self_capacitance),
                ("coupler_capacitance", r.coupler_capacitance),
            ];
            for (name, value) in fields {
                if !(value.is_finite() && value > 0.0) {
                    return bad(format!("reservoir {i}: {name} must be positive, got {value}"));
                }
            }
            for (j, other) in self.reservoirs.iter().enumerate().skip(i + 1) {
                if r.frequency == other.frequency {
                    return bad(format!("reservoirs {i} and {j} share the same frequency"));
                }
            }
        }
        for cross in &self.cross_capacitances {
            let n = self.reservoirs.len();
            if cross.first >= n || cross.second >= n || cross.first == cross.second {
                return bad(format!(
                    "cross capacitance references invalid reservoir pair ({}, {})",
                    cross.first, cross.second
                ));
            }
            if !(cross.capacitance > 0.0) {
                return bad("cross capacitances must be positive".into());
            }
        }

        let mut warnings = Vec::new();
        let ratio = self.coupler_ej2 / self.coupler_ec;
        if ratio < TRANSMON_RATIO_MIN {
            warnings.push(format!(
                "E_J2/E_C = {ratio:.1} is below the transmon regime ({TRANSMON_RATIO_MIN})"
            ));
        }
        Ok(warnings)
    }
}

/// Coupler spectrum at one flux point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplerState {
    pub flux: f64,
    /// Effective E_J(Φ)/h in GHz.
    pub josephson_energy: f64,
    /// ω_c (rad·MHz)
    pub frequency: f64,
    /// α_c = −E_C (rad·MHz)
    pub anharmonicity: f64,
    /// E_J(Φ)/E_C
    pub transmon_ratio: f64,
    /// E_J(Φ) vanished (symmetric SQUID at half flux); ω_c is then the
    /// formal branch limit −E_C.
    pub degenerate: bool,
}

pub fn coupler_state(design: &CircuitDesign, flux: f64) -> CouplerState {
    let sum = design.coupler_ej1 + design.coupler_ej2;
    let d = design.squid_asymmetry();
    let (s, c) = (PI * flux).sin_cos();
    // |cos|·sqrt(1 + d² tan²) written without the tangent
    let ej = sum * (c * c + d * d * s * s).sqrt();
    let ec = design.coupler_ec;
    let degenerate = ej <= sum * 1e-12;
    let linear = if degenerate { -ec } else { (8.0 * ec * ej).sqrt() - ec };
    CouplerState {
        flux,
        josephson_energy: ej,
        frequency: units::ghz(linear),
        anharmonicity: -units::ghz(ec),
        transmon_ratio: ej / ec,
        degenerate,
    }
}

/// ω_c(Φ) in rad·MHz.
pub fn coupler_frequency(design: &CircuitDesign, flux: f64) -> f64 {
    coupler_state(design, flux).frequency
}

/// Bare exchange couplings and coupler detunings at one flux point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingSet {
    pub coupler_frequency: f64,
    pub coupler_anharmonicity: f64,
    pub g_sc: f64,
    pub g_rc: Vec<f64>,
    pub g_sr: Vec<f64>,
    /// Symmetric, zero diagonal.
    pub g_rr: Vec<Vec<f64>>,
    pub delta_sc: f64,
    pub delta_rc: Vec<f64>,
}

impl CouplingSet {
    pub fn max_dispersive_ratio(&self) -> f64 {
        let mut worst = ratio(self.g_sc, self.delta_sc);
        for (g, d) in self.g_rc.iter().zip(&self.delta_rc) {
            worst = worst.max(ratio(*g, *d));
        }
        worst
    }
}

fn ratio(g: f64, delta: f64) -> f64 {
    (g / delta).abs()
}

pub fn bare_couplings(design: &CircuitDesign, flux: f64) -> CouplingSet {
    let coupler = coupler_state(design, flux);
    let wc = coupler.frequency;
    let wc_pos = wc.max(0.0);
    let cc = design.coupler_capacitance();
    let ws = design.source_frequency;
    let cs = design.source_self_capacitance;
    let csc = design.source_coupler_capacitance;

    let g_sc = 0.5 * csc / (cs * cc).sqrt() * (ws * wc_pos).sqrt();
    let g_rc = design
        .reservoirs
        .iter()
        .map(|r| {
            0.5 * r.coupler_capacitance / (r.self_capacitance * cc).sqrt()
                * (r.frequency * wc_pos).sqrt()
        })
        .collect();
    let g_sr = design
        .reservoirs
        .iter()
        .map(|r| {
            0.5 * csc * r.coupler_capacitance / (cs * r.self_capacitance * cc * cc).sqrt()
                * (ws * r.frequency).sqrt()
        })
        .collect();

    let n = design.reservoirs.len();
    let mut g_rr = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (&design.reservoirs[i], &design.reservoirs[j]);
            let explicit = design.cross_capacitances.iter().find(|x| {
                (x.first == i && x.second == j) || (x.first == j && x.second == i)
            });
            let scale = match explicit {
                Some(x) => x.capacitance / (a.self_capacitance * b.self_capacitance).sqrt(),
                None => {
                    a.coupler_capacitance * b.coupler_capacitance
                        / (a.self_capacitance * b.self_capacitance * cc * cc).sqrt()
                }
            };
            let g = 0.5 * scale * (a.frequency * b.frequency).sqrt();
            g_rr[i][j] = g;
            g_rr[j][i] = g;
        }
    }

    CouplingSet {
        coupler_frequency: wc,
        coupler_anharmonicity: coupler.anharmonicity,
        g_sc,
        g_rc,
        g_sr,
        g_rr,
        delta_sc: ws - wc,
        delta_rc: design.reservoirs.iter().map(|r| r.frequency - wc).collect(),
    }
}

/// Prefactor of the coupler-mediated (virtual) exchange term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingConvention {
    /// g_eff = g_sc g_rc (1/Δ_sc + 1/Δ_rc) + g_sr
    #[default]
    Full,
    /// g_eff = ½ g_sc g_rc (1/Δ_sc + 1/Δ_rc) + g_sr
    Halved,
}

impl CouplingConvention {
    pub fn from_half_factor(half: bool) -> Self {
        if half {
            Self::Halved
        } else {
            Self::Full
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Self::Full => 1.0,
            Self::Halved => 0.5,
        }
    }
}

/// Reduced source + reservoirs model with the coupler eliminated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveModel {
    pub flux: f64,
    /// ω̃_s (rad·MHz)
    pub lamb_shifted_source: f64,
    /// ω̃_r (rad·MHz)
    pub lamb_shifted_reservoirs: Vec<f64>,
    /// g_eff per reservoir (rad·MHz)
    pub g_eff: Vec<f64>,
    /// g̃_rr, symmetric with zero diagonal (rad·MHz)
    pub cross_couplings: Vec<Vec<f64>>,
    pub pump_rate: f64,
    pub loss_rates: Vec<f64>,
    pub source_relaxation: f64,
    pub source_dephasing: f64,
}

impl EffectiveModel {
    /// Circuit-independent single-reservoir model. The reservoir sits at zero
    /// frequency and the source at `detuning`, i.e. a frame rotating with the
    /// reservoir.
    pub fn jaynes_cummings(pump_rate: f64, loss_rate: f64, g_eff: f64, detuning: f64) -> Self {
        Self {
            flux: 0.0,
            lamb_shifted_source: detuning,
            lamb_shifted_reservoirs: vec![0.0],
            g_eff: vec![g_eff],
            cross_couplings: vec![vec![0.0]],
            pump_rate,
            loss_rates: vec![loss_rate],
            source_relaxation: 0.0,
            source_dephasing: 0.0,
        }
    }

    pub fn reservoir_count(&self) -> usize {
        self.g_eff.len()
    }

    /// Shifts every frequency by −`reference`. Equivalent to subtracting
    /// `reference` times the total excitation number, which commutes with the
    /// Hamiltonian, so steady states are unchanged.
    pub fn rotating_frame(&self, reference: f64) -> Self {
        let mut out = self.clone();
        out.lamb_shifted_source -= reference;
        for w in &mut out.lamb_shifted_reservoirs {
            *w -= reference;
        }
        out
    }

    /// Retunes the dressed source onto the dressed frequency of `target`.
    pub fn tuned_to_reservoir(&self, target: usize) -> Self {
        let mut out = self.clone();
        out.lamb_shifted_source = self.lamb_shifted_reservoirs[target];
        out
    }

    pub fn with_source_frequency(&self, dressed: f64) -> Self {
        let mut out = self.clone();
        out.lamb_shifted_source = dressed;
        out
    }
}

pub fn effective_model(
    design: &CircuitDesign,
    flux: f64,
    convention: CouplingConvention,
) -> Result<EffectiveModel, CircuitError> {
    let set = bare_couplings(design, flux);
    effective_model_from_couplings(design, &set, flux, convention)
}

pub fn effective_model_from_couplings(
    design: &CircuitDesign,
    set: &CouplingSet,
    flux: f64,
    convention: CouplingConvention,
) -> Result<EffectiveModel, CircuitError> {
    if set.delta_sc == 0.0 {
        return Err(CircuitError::DegenerateDetuning { element: "source".into(), flux });
    }
    for (i, d) in set.delta_rc.iter().enumerate() {
        if *d == 0.0 {
            return Err(CircuitError::DegenerateDetuning {
                element: format!("reservoir {i}"),
                flux,
            });
        }
    }
    let worst = set.max_dispersive_ratio();
    if worst >= DISPERSIVE_RATIO_MAX {
        log::warn!("dispersive ratio {worst:.3} at flux {flux} exceeds {DISPERSIVE_RATIO_MAX}");
    }

    let factor = convention.factor();
    let n = design.reservoirs.len();
    let g_eff = (0..n)
        .map(|i| {
            factor * set.g_sc * set.g_rc[i] * (1.0 / set.delta_sc + 1.0 / set.delta_rc[i])
                + set.g_sr[i]
        })
        .collect();
    let mut cross = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let g = factor
                * set.g_rc[i]
                * set.g_rc[j]
                * (1.0 / set.delta_rc[i] + 1.0 / set.delta_rc[j])
                + set.g_rr[i][j];
            cross[i][j] = g;
            cross[j][i] = g;
        }
    }

    Ok(EffectiveModel {
        flux,
        lamb_shifted_source: design.source_frequency + set.g_sc * set.g_sc / set.delta_sc,
        lamb_shifted_reservoirs: design
            .reservoirs
            .iter()
            .zip(set.g_rc.iter().zip(&set.delta_rc))
            .map(|(r, (g, d))| r.frequency + g * g / d)
            .collect(),
        g_eff,
        cross_couplings: cross,
        pump_rate: design.gamma_pump,
        loss_rates: design.reservoirs.iter().map(|r| r.loss_rate).collect(),
        source_relaxation: design.source_relaxation,
        source_dephasing: design.source_dephasing,
    })
}

/// λ = Γκ/(4 g_eff²).
pub fn masing_ratio(gamma: f64, kappa: f64, g_eff: f64) -> Result<f64, CircuitError> {
    if g_eff == 0.0 {
        return Err(CircuitError::DegenerateCoupling);
    }
    Ok(gamma * kappa / (4.0 * g_eff * g_eff))
}

/// Mean-field steady-state photon number (Γ/2κ)(1 − λ), zero for λ ≥ 1.
pub fn analytic_photon_number(gamma: f64, kappa: f64, g_eff: f64) -> f64 {
    match masing_ratio(gamma, kappa, g_eff) {
        Ok(lambda) if lambda < 1.0 => gamma / (2.0 * kappa) * (1.0 - lambda),
        _ => 0.0,
    }
}

/// Coupling strength giving masing ratio `lambda`.
pub fn coupling_for_ratio(gamma: f64, kappa: f64, lambda: f64) -> f64 {
    (gamma * kappa / (4.0 * lambda)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Hard,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityFlag {
    pub severity: Severity,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersiveRatio {
    pub element: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub flux: f64,
    pub target: usize,
    pub g_eff: f64,
    pub lambda: f64,
    /// Γ/2κ
    pub n_ph_max: f64,
    /// (Δ_rc/2g_rc)²
    pub n_cr: f64,
    pub ratio_max_cr: f64,
    /// (Δ_min/g_sr)², infinite when g_sr vanishes.
    pub n_star: f64,
    /// χ_rc (rad·MHz)
    pub chi_rc: f64,
    /// K_r (rad·MHz)
    pub kerr: f64,
    /// |K_r|/2π in kHz
    pub kerr_khz: f64,
    /// |K_r|/κ
    pub kerr_ratio: f64,
    pub dispersive_ratios: Vec<DispersiveRatio>,
    /// max over n ≤ Γ/2κ of g_sr(√(n+1)+√n)/Δ_min
    pub dressed_correction_max: f64,
    /// Δ − α_c (rad·MHz)
    pub higher_level_gap: f64,
    pub transmon_ratio: f64,
    pub flags: Vec<ValidityFlag>,
}

impl ValidityReport {
    pub fn has_hard_flags(&self) -> bool {
        self.flags.iter().any(|f| f.severity == Severity::Hard)
    }
}

/// Diagnostics for the first reservoir.
pub fn validity_report(
    design: &CircuitDesign,
    flux: f64,
    convention: CouplingConvention,
) -> Result<ValidityReport, CircuitError> {
    validity_report_for(design, flux, convention, 0)
}

pub fn validity_report_for(
    design: &CircuitDesign,
    flux: f64,
    convention: CouplingConvention,
    target: usize,
) -> Result<ValidityReport, CircuitError> {
    if target >= design.reservoirs.len() {
        return Err(CircuitError::InvalidArgument(format!("no reservoir {target}")));
    }
    let set = bare_couplings(design, flux);
    let model = effective_model_from_couplings(design, &set, flux, convention)?;
    let coupler = coupler_state(design, flux);
    let kappa = design.reservoirs[target].loss_rate;
    let gamma = design.gamma_pump;

    let g_eff = model.g_eff[target];
    let lambda = masing_ratio(gamma, kappa, g_eff).unwrap_or(f64::INFINITY);
    let n_ph_max = gamma / (2.0 * kappa);
    let g_rc = set.g_rc[target];
    let delta_rc = set.delta_rc[target];
    let n_cr = (delta_rc / (2.0 * g_rc)).powi(2);
    let ratio_max_cr = n_ph_max / n_cr;
    let delta_min = set.delta_sc.abs().min(delta_rc.abs());
    let g_sr = set.g_sr[target];
    let n_star = if g_sr == 0.0 { f64::INFINITY } else { (delta_min / g_sr).powi(2) };

    let alpha = set.coupler_anharmonicity;
    let chi_rc = -g_rc * g_rc * alpha.abs() / (delta_rc * (delta_rc - alpha.abs()));
    let kerr = chi_rc * chi_rc / (4.0 * alpha);
    let kerr_ratio = kerr.abs() / kappa;

    let mut dispersive_ratios = vec![DispersiveRatio {
        element: "source".into(),
        ratio: ratio(set.g_sc, set.delta_sc),
    }];
    for (i, (g, d)) in set.g_rc.iter().zip(&set.delta_rc).enumerate() {
        dispersive_ratios.push(DispersiveRatio {
            element: format!("reservoir {i}"),
            ratio: ratio(*g, *d),
        });
    }

    let n_top = n_ph_max.floor().max(0.0) as usize;
    let dressed_correction_max = (0..=n_top)
        .map(|n| g_sr * (((n + 1) as f64).sqrt() + (n as f64).sqrt()) / delta_min)
        .fold(0.0_f64, f64::max);
    let higher_level_gap = delta_min - alpha;

    let mut flags = Vec::new();
    let mut flag = |severity, code: &str, message: String| {
        flags.push(ValidityFlag { severity, code: code.into(), message })
    };
    if ratio_max_cr >= 1.0 {
        flag(
            Severity::Hard,
            "critical-photon-number",
            format!("n_ph_max/n_cr = {ratio_max_cr:.3} >= 1"),
        );
    }
    if kerr_ratio >= KERR_RATIO_MAX {
        flag(Severity::Hard, "self-kerr", format!("|K_r|/kappa = {kerr_ratio:.3e} >= {KERR_RATIO_MAX}"));
    }
    for d in &dispersive_ratios {
        if d.ratio >= DISPERSIVE_RATIO_MAX {
            flag(
                Severity::Hard,
                "dispersive-ratio",
                format!("g/Delta for {} = {:.3} >= {DISPERSIVE_RATIO_MAX}", d.element, d.ratio),
            );
        }
    }
    if coupler.transmon_ratio < TRANSMON_RATIO_MIN {
        flag(
            Severity::Warning,
            "transmon-regime",
            format!("E_J(flux)/E_C = {:.1} < {TRANSMON_RATIO_MIN}", coupler.transmon_ratio),
        );
    }
    if n_star <= n_ph_max {
        flag(
            Severity::Warning,
            "dressed-splitting",
            format!("N* = {n_star:.1} does not exceed n_ph_max = {n_ph_max:.1}"),
        );
    }
    if dressed_correction_max >= 0.02 {
        flag(
            Severity::Warning,
            "dressed-correction",
            format!("dressed splitting reaches {:.2}% of the detuning", 100.0 * dressed_correction_max),
        );
    }

    Ok(ValidityReport {
        flux,
        target,
        g_eff,
        lambda,
        n_ph_max,
        n_cr,
        ratio_max_cr,
        n_star,
        chi_rc,
        kerr,
        kerr_khz: units::to_linear_mhz(kerr.abs()) * 1e3,
        kerr_ratio,
        dispersive_ratios,
        dressed_correction_max,
        higher_level_gap,
        transmon_ratio: coupler.transmon_ratio,
        flags,
    })
}

/// One photon number of the dressed-state table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DressedRow {
    pub n: usize,
    /// g_sr(√(n+1) − √n)/Δ
    pub lower_splitting_ratio: f64,
    /// g_sr(√(n+1) + √n)/Δ
    pub upper_splitting_ratio: f64,
    /// δE⁽²⁾ − δE⁽¹⁾ ≈ Δ − α_c (rad·MHz)
    pub higher_level_gap: f64,
}

/// Dressed splittings of the resonant source–reservoir ladder relative to the
/// smaller coupler detuning at `flux`, for n = 0..=n_max. Uses the first
/// reservoir.
pub fn dressed_analysis(
    design: &CircuitDesign,
    flux: f64,
    n_max: usize,
) -> Result<Vec<DressedRow>, CircuitError> {
    if n_max < 1 {
        return Err(CircuitError::InvalidArgument("n_max must be at least 1".into()));
    }
    let set = bare_couplings(design, flux);
    let delta = set.delta_sc.abs().min(set.delta_rc[0].abs());
    let g_sr = set.g_sr[0];
    let gap = delta - set.coupler_anharmonicity;
    Ok((0..=n_max)
        .map(|n| {
            let (a, b) = (((n + 1) as f64).sqrt(), (n as f64).sqrt());
            DressedRow {
                n,
                lower_splitting_ratio: g_sr * (a - b) / delta,
                upper_splitting_ratio: g_sr * (a + b) / delta,
                higher_level_gap: gap,
            }
        })
        .collect())
}
