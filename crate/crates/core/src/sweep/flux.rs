use crate::circuit::{analytic_photon_number, effective_model, masing_ratio, validity_report_for, CircuitDesign, EffectiveModel, Severity};
use crate::maser::{default_truncation, solve_effective_capped};

use super::{failed, run_points, to_mhz, Axis, PointResult, PointStatus, PointValues, SweepSettings, SweepTable};

/// Copy of `design` keeping only reservoir `target`.
pub fn single_reservoir(design: &CircuitDesign, target: usize) -> CircuitDesign {
    let mut d = design.clone();
    d.reservoirs = vec![design.reservoirs[target].clone()];
    d.cross_capacitances.clear();
    d
}

fn truncation(design: &CircuitDesign, settings: &SweepSettings) -> usize {
    settings
        .truncation
        .unwrap_or_else(|| default_truncation(design.gamma_pump, design.reservoirs[0].loss_rate))
}

/// Effective model of the single-reservoir design at `flux`, with the source
/// retuned onto the reservoir when requested.
fn point_model(design: &CircuitDesign, flux: f64, settings: &SweepSettings) -> Result<EffectiveModel, PointStatus> {
    let report = validity_report_for(design, flux, settings.convention, 0)?;
    if let Some(flag) = report.flags.iter().find(|f| f.severity == Severity::Hard) {
        return Err(failed("validity", format!("{}: {}", flag.code, flag.message)));
    }
    let model = effective_model(design, flux, settings.convention)?;
    Ok(if settings.resonant_source { model.tuned_to_reservoir(0) } else { model })
}

const FLUX_COLUMNS: &[(&str, &str)] = &[
    ("g_eff", "MHz"),
    ("lambda", ""),
    ("n_mean", ""),
    ("n_mean_eq", ""),
    ("variance", ""),
    ("g2", ""),
    ("fano", ""),
    ("tail_mass", ""),
    ("source_excited", ""),
    ("detuning", "MHz"),
    ("residual", "rad/us"),
    ("min_eigenvalue", ""),
    ("warnings", ""),
];

/// Steady-state photon statistics of the target reservoir against coupler
/// flux.
pub fn flux_sweep(design: &CircuitDesign, fluxes: &[f64], settings: &SweepSettings) -> SweepTable {
    let single = single_reservoir(design, settings.target_reservoir);
    let n = truncation(&single, settings);
    let mut table = SweepTable::new("flux-sweep", vec![Axis::new("flux", "phi0", fluxes.to_vec())], FLUX_COLUMNS);
    let results = run_points(fluxes, settings.threads, |&flux| -> PointResult {
        let model = point_model(&single, flux, settings)?;
        let report = validity_report_for(&single, flux, settings.convention, 0)?;
        let state = solve_effective_capped(&model, &[n], &settings.solver, settings.dimension_cap)?;
        let stats = &state.reservoirs[0];
        let (gamma, kappa, g) = (single.gamma_pump, single.reservoirs[0].loss_rate, model.g_eff[0]);
        Ok(PointValues {
            values: vec![
                Some(to_mhz(g)),
                masing_ratio(gamma, kappa, g).ok(),
                Some(stats.mean),
                Some(analytic_photon_number(gamma, kappa, g)),
                Some(stats.variance),
                stats.g2,
                stats.fano(),
                Some(stats.tail_mass),
                Some(state.source_excited),
                Some(to_mhz(model.lamb_shifted_source - model.lamb_shifted_reservoirs[0])),
                Some(state.solution.residual),
                Some(state.solution.min_eigenvalue),
                Some(report.flags.len() as f64),
            ],
            fock: settings.keep_distributions.then(|| stats.fock.clone()),
        })
    });
    table.fill(results);
    table
}

/// Bare source frequency that puts the dressed source on the dressed
/// reservoir at `flux`.
fn resonant_design(design: &CircuitDesign, flux: f64, settings: &SweepSettings) -> Result<CircuitDesign, PointStatus> {
    let mut d = design.clone();
    if !settings.resonant_source {
        return Ok(d);
    }
    for _ in 0..4 {
        let m = effective_model(&d, flux, settings.convention)?;
        d.source_frequency += m.lamb_shifted_reservoirs[0] - m.lamb_shifted_source;
    }
    Ok(d)
}

/// Relative change of n̄ under a flux excursion ±δΦ with the source held at
/// the frequency set for the nominal flux:
/// |n̄(Φ+δΦ) − n̄(Φ−δΦ)| / (2 n̄(Φ)).
pub fn flux_noise_sensitivity(design: &CircuitDesign, fluxes: &[f64], delta_flux: f64, settings: &SweepSettings) -> SweepTable {
    let single = single_reservoir(design, settings.target_reservoir);
    let n = truncation(&single, settings);
    let mut table = SweepTable::new(
        "noise",
        vec![Axis::new("flux", "phi0", fluxes.to_vec())],
        &[
            ("n_mean", ""),
            ("n_plus", ""),
            ("n_minus", ""),
            ("slope", "1/phi0"),
            ("relative_deviation", ""),
            ("g_eff", "MHz"),
        ],
    );
    let results = run_points(fluxes, settings.threads, |&flux| -> PointResult {
        let tuned = resonant_design(&single, flux, settings)?;
        let solve = |phi: f64| -> Result<(f64, f64), PointStatus> {
            let report = validity_report_for(&tuned, phi, settings.convention, 0)?;
            if let Some(flag) = report.flags.iter().find(|f| f.severity == Severity::Hard) {
                return Err(failed("validity", format!("{}: {}", flag.code, flag.message)));
            }
            let model = effective_model(&tuned, phi, settings.convention)?;
            let s = solve_effective_capped(&model, &[n], &settings.solver, settings.dimension_cap)?;
            Ok((s.reservoirs[0].mean, model.g_eff[0]))
        };
        let (mean, g) = solve(flux)?;
        let (plus, _) = solve(flux + delta_flux)?;
        let (minus, _) = solve(flux - delta_flux)?;
        let slope = if delta_flux == 0.0 { 0.0 } else { (plus - minus) / (2.0 * delta_flux) };
        let deviation = if mean > 0.0 { (plus - minus).abs() / (2.0 * mean) } else { 0.0 };
        Ok(PointValues::new(vec![Some(mean), Some(plus), Some(minus), Some(slope), Some(deviation), Some(to_mhz(g))]))
    });
    table.fill(results);
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_symmetric_in_flux() {
        let settings = SweepSettings { truncation: Some(20), ..Default::default() };
        let t = flux_sweep(&CircuitDesign::reference(), &[-0.3, 0.0, 0.3], &settings);
        let n = t.column("n_mean");
        assert!(t.failures().is_empty());
        assert!((n[0].unwrap() - n[2].unwrap()).abs() < 1e-9);
    }

    #[test]
    fn zero_excursion_has_zero_deviation() {
        let settings = SweepSettings { truncation: Some(20), ..Default::default() };
        let t = flux_noise_sensitivity(&CircuitDesign::reference(), &[0.2], 0.0, &settings);
        assert_eq!(t.column("relative_deviation")[0], Some(0.0));
    }
}
