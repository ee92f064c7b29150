use serde::{Deserialize, Serialize};

use crate::circuit::{effective_model, CircuitDesign, EffectiveModel};
use crate::maser::{solve_effective_capped, MaserState};

use super::{failed, run_points, to_mhz, Axis, PointResult, PointStatus, PointValues, SweepSettings, SweepTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiresOptions {
    /// Truncation of reservoirs near the source; `None` uses ⌈Γ/2κ⌉ + 10.
    pub base_truncation: Option<usize>,
    /// Truncation of reservoirs detuned from the source.
    pub detuned_truncation: usize,
    /// Detuning, in units of κ_j, beyond which reservoir j is truncated.
    pub detuning_factor: f64,
    /// Largest population tolerated in the top level of a reduced reservoir.
    pub tail_tolerance: f64,
}

impl Default for MultiresOptions {
    fn default() -> Self {
        Self { base_truncation: None, detuned_truncation: 6, detuning_factor: 10.0, tail_tolerance: 1e-6 }
    }
}

/// Default truncation of reservoirs near the source: ⌈Γ/2κ_min⌉ + 10.
pub fn base_truncation(design: &CircuitDesign, options: &MultiresOptions) -> usize {
    let min_kappa = design.reservoirs.iter().map(|x| x.loss_rate).fold(f64::INFINITY, f64::min);
    options
        .base_truncation
        .unwrap_or_else(|| (design.gamma_pump / (2.0 * min_kappa) - 1e-9).ceil() as usize + 10)
}

/// Joint steady state at one (dressed source frequency, flux) point.
/// Reservoirs detuned by at least `detuning_factor`·κ start at the reduced
/// truncation, which is doubled (up to the base) while their top level holds
/// more than `tail_tolerance`.
pub fn multires_point(
    design: &CircuitDesign,
    source: f64,
    flux: f64,
    options: &MultiresOptions,
    settings: &SweepSettings,
) -> Result<(EffectiveModel, Vec<usize>, MaserState), PointStatus> {
    if let Some(msg) = spacing_violation(design) {
        return Err(failed("design", msg));
    }
    let base = base_truncation(design, options);
    let model = effective_model(design, flux, settings.convention)?.with_source_frequency(source);
    let mut truncations: Vec<usize> = (0..design.reservoirs.len())
        .map(|j| {
            let detuning = (source - model.lamb_shifted_reservoirs[j]).abs();
            if detuning >= options.detuning_factor * model.loss_rates[j] {
                options.detuned_truncation.min(base)
            } else {
                base
            }
        })
        .collect();
    loop {
        let state = solve_effective_capped(&model, &truncations, &settings.solver, settings.dimension_cap)?;
        let mut grown = false;
        for (j, n) in truncations.iter_mut().enumerate() {
            if *n < base && state.reservoirs[j].tail_mass > options.tail_tolerance {
                *n = (2 * *n).min(base);
                grown = true;
            }
        }
        if !grown {
            return Ok((model, truncations, state));
        }
    }
}

/// Joint steady states of a multi-reservoir device over a grid of dressed
/// source frequency and coupler flux. One table per reservoir.
pub fn multires_map(design: &CircuitDesign, sources: &[f64], fluxes: &[f64], options: &MultiresOptions, settings: &SweepSettings) -> Vec<SweepTable> {
    let r = design.reservoirs.len();
    let base = base_truncation(design, options);
    let axes = vec![
        Axis::new("source_frequency", "MHz", sources.iter().map(|w| to_mhz(*w)).collect()),
        Axis::new("flux", "phi0", fluxes.to_vec()),
    ];
    let columns: &[(&str, &str)] = &[
        ("n_mean", ""),
        ("variance", ""),
        ("g2", ""),
        ("cross_population", ""),
        ("detuning", "MHz"),
        ("g_eff", "MHz"),
        ("truncation", ""),
        ("tail_mass", ""),
        ("tail_ok", ""),
    ];
    let pairs: Vec<(f64, f64)> = sources.iter().flat_map(|&w| fluxes.iter().map(move |&f| (w, f))).collect();
    let results: Vec<Vec<PointResult>> = run_points(&pairs, settings.threads, |&(source, flux)| {
        let solved = multires_point(design, source, flux, options, settings);
        match solved {
            Err(status) => vec![Err(status); r],
            Ok((model, truncations, state)) => (0..r)
                .map(|j| {
                    let stats = &state.reservoirs[j];
                    let cross: f64 = (0..r).filter(|&k| k != j).map(|k| state.reservoirs[k].mean).sum();
                    let reduced = truncations[j] < base;
                    let tail_ok = !reduced || stats.tail_mass < options.tail_tolerance;
                    if !tail_ok {
                        log::warn!("reservoir {j} truncated to {} levels keeps tail mass {:e}", truncations[j], stats.tail_mass);
                    }
                    Ok(PointValues::new(vec![
                        Some(stats.mean),
                        Some(stats.variance),
                        stats.g2,
                        Some(cross),
                        Some(to_mhz(source - model.lamb_shifted_reservoirs[j])),
                        Some(to_mhz(model.g_eff[j])),
                        Some(truncations[j] as f64),
                        Some(stats.tail_mass),
                        Some(if tail_ok { 1.0 } else { 0.0 }),
                    ]))
                })
                .collect(),
        }
    });
    (0..r)
        .map(|j| {
            let mut t = SweepTable::new(&format!("multires-r{}", j + 1), axes.clone(), columns);
            t.fill(results.iter().map(|per| per[j].clone()).collect());
            t
        })
        .collect()
}

/// Reservoir pairs closer than ten of the largest linewidth.
fn spacing_violation(design: &CircuitDesign) -> Option<String> {
    let max_kappa = design.reservoirs.iter().map(|x| x.loss_rate).fold(0.0, f64::max);
    let rs = &design.reservoirs;
    (0..rs.len())
        .flat_map(|i| (i + 1..rs.len()).map(move |j| (i, j)))
        .find(|&(i, j)| (rs[i].frequency - rs[j].frequency).abs() < 10.0 * max_kappa * (1.0 - 1e-9))
        .map(|(i, j)| format!("reservoirs {i} and {j} are closer than 10 kappa"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::mhz;

    #[test]
    fn far_detuned_source_leaves_both_reservoirs_empty() {
        let mut design = CircuitDesign::reference_two_reservoirs(mhz(5.0));
        design.gamma_pump = mhz(2.0);
        let model = effective_model(&design, 0.0, Default::default()).unwrap();
        let far = model.lamb_shifted_reservoirs[0] - mhz(40.0);
        let options = MultiresOptions { base_truncation: Some(30), ..Default::default() };
        let tables = multires_map(&design, &[far], &[0.0], &options, &SweepSettings::default());
        assert!(spacing_violation(&design).is_none());
        assert_eq!(tables.len(), 2);
        for t in &tables {
            assert!(t.column("n_mean")[0].unwrap() < 0.5);
            // Six levels leave a tail above tolerance; one doubling suffices.
            assert_eq!(t.column("truncation")[0], Some(12.0));
            assert!(t.column("tail_mass")[0].unwrap() < options.tail_tolerance);
        }
    }

    #[test]
    fn close_reservoirs_fail_every_point() {
        let design = CircuitDesign::reference_two_reservoirs(mhz(2.0));
        let tables = multires_map(&design, &[design.source_frequency], &[0.0], &MultiresOptions::default(), &SweepSettings::default());
        assert!(tables.iter().all(|t| t.failures().len() == 1));
    }
}
