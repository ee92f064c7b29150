use serde::Serialize;

use crate::circuit::{analytic_photon_number, coupling_for_ratio, masing_ratio};
use crate::maser::{default_truncation, jaynes_cummings_state};
use crate::observables::g2_variation;

use super::{failed, run_points, to_mhz, Axis, PointResult, PointStatus, PointValues, SweepSettings, SweepTable};

/// Phase-diagram points with Γ/2κ above this are not computed.
pub const MAX_PHOTON_RATIO: f64 = 100.0;

/// Circuit-independent sweep of the resonant model over g_eff at fixed
/// (Γ, κ) and truncation `n`.
pub fn effective_coupling_sweep(gamma: f64, kappa: f64, couplings: &[f64], n: usize, settings: &SweepSettings) -> SweepTable {
    let mut table = SweepTable::new(
        "coupling-sweep",
        vec![Axis::new("g_eff", "MHz", couplings.iter().map(|g| to_mhz(*g)).collect())],
        &[
            ("lambda", ""),
            ("n_mean", ""),
            ("n_mean_eq", ""),
            ("variance", ""),
            ("g2", ""),
            ("fano", ""),
            ("tail_mass", ""),
            ("residual", "rad/us"),
        ],
    );
    let results = run_points(couplings, settings.threads, |&g| -> PointResult {
        let s = jaynes_cummings_state(gamma, kappa, g, n, &settings.solver)?;
        let stats = &s.reservoirs[0];
        Ok(PointValues {
            values: vec![
                masing_ratio(gamma, kappa, g).ok(),
                Some(stats.mean),
                Some(analytic_photon_number(gamma, kappa, g)),
                Some(stats.variance),
                stats.g2,
                stats.fano(),
                Some(stats.tail_mass),
                Some(s.solution.residual),
            ],
            fock: settings.keep_distributions.then(|| stats.fock.clone()),
        })
    });
    table.fill(results);
    table
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseDiagram {
    pub table: SweepTable,
    /// Points on Γ/2κ = 50, one per κ of the grid.
    pub diagonal: SweepTable,
}

fn g2_endpoints(gamma: f64, kappa: f64, lambda_min: f64, lambda_max: f64, n: usize, settings: &SweepSettings) -> Result<(f64, f64), PointStatus> {
    let g2 = |lambda: f64| -> Result<f64, PointStatus> {
        let s = jaynes_cummings_state(gamma, kappa, coupling_for_ratio(gamma, kappa, lambda), n, &settings.solver)?;
        s.reservoirs[0].g2.ok_or_else(|| failed("observable", format!("g2 undefined at lambda = {lambda}")))
    };
    Ok((g2(lambda_min)?, g2(lambda_max)?))
}

const PHASE_COLUMNS: &[(&str, &str)] = &[
    ("photon_ratio", ""),
    ("truncation", ""),
    ("g2_at_lambda_min", ""),
    ("g2_at_lambda_max", ""),
    ("delta_g2", ""),
];

/// Δg²(0) over a (Γ, κ) grid with the coupling spanning λ ∈ [λ_min, λ_max].
pub fn phase_diagram(gammas: &[f64], kappas: &[f64], lambda_min: f64, lambda_max: f64, settings: &SweepSettings) -> PhaseDiagram {
    let point = |gamma: f64, kappa: f64| -> PointResult {
        let ratio = gamma / (2.0 * kappa);
        if ratio > MAX_PHOTON_RATIO {
            return Err(PointStatus::Excluded { reason: format!("gamma/2kappa = {ratio:.1} > {MAX_PHOTON_RATIO}") });
        }
        let n = settings.truncation.unwrap_or_else(|| default_truncation(gamma, kappa));
        let (low, high) = if lambda_min == lambda_max {
            let (a, _) = g2_endpoints(gamma, kappa, lambda_min, lambda_min, n, settings)?;
            (a, a)
        } else {
            g2_endpoints(gamma, kappa, lambda_min, lambda_max, n, settings)?
        };
        Ok(PointValues::new(vec![Some(ratio), Some(n as f64), Some(low), Some(high), Some(high - low)]))
    };

    let mut table = SweepTable::new(
        "phase-diagram",
        vec![
            Axis::new("gamma", "MHz", gammas.iter().map(|g| to_mhz(*g)).collect()),
            Axis::new("kappa", "MHz", kappas.iter().map(|k| to_mhz(*k)).collect()),
        ],
        PHASE_COLUMNS,
    );
    let pairs: Vec<(f64, f64)> = gammas.iter().flat_map(|&g| kappas.iter().map(move |&k| (g, k))).collect();
    table.fill(run_points(&pairs, settings.threads, |&(g, k)| point(g, k)));

    let mut diagonal = SweepTable::new(
        "phase-diagram-diagonal",
        vec![Axis::new("kappa", "MHz", kappas.iter().map(|k| to_mhz(*k)).collect())],
        &[("gamma", "MHz"), ("photon_ratio", ""), ("truncation", ""), ("g2_at_lambda_min", ""), ("g2_at_lambda_max", ""), ("delta_g2", "")],
    );
    diagonal.fill(run_points(kappas, settings.threads, |&k| {
        let gamma = 100.0 * k;
        point(gamma, k).map(|mut p| {
            p.values.insert(0, Some(to_mhz(gamma)));
            p
        })
    }));
    PhaseDiagram { table, diagonal }
}

/// Relative error of the emission range Δn = n̄(g_max) − n̄(g_min) when the
/// actual (Γ, κ) deviate from the reference by up to ±`range`, with the
/// coupling endpoints fixed at √(Γ_ref κ_ref/0.4) and √(Γ_ref κ_ref/8).
pub fn robustness_map(gamma_ref: f64, kappa_ref: f64, range: f64, steps: usize, settings: &SweepSettings) -> SweepTable {
    let errors = super::linspace(-range, range, steps);
    let g_max = coupling_for_ratio(gamma_ref, kappa_ref, 0.1);
    let g_min = coupling_for_ratio(gamma_ref, kappa_ref, 2.0);
    let span = |gamma: f64, kappa: f64| -> Result<(f64, f64), PointStatus> {
        let n = settings.truncation.unwrap_or_else(|| default_truncation(gamma, kappa));
        let high = jaynes_cummings_state(gamma, kappa, g_max, n, &settings.solver)?.reservoirs[0].mean;
        let low = jaynes_cummings_state(gamma, kappa, g_min, n, &settings.solver)?.reservoirs[0].mean;
        Ok((high, low))
    };
    let reference = span(gamma_ref, kappa_ref).map(|(h, l)| h - l);

    let mut table = SweepTable::new(
        "robustness",
        vec![
            Axis::new("gamma_error", "%", errors.iter().map(|e| 100.0 * e).collect()),
            Axis::new("kappa_error", "%", errors.iter().map(|e| 100.0 * e).collect()),
        ],
        &[
            ("gamma", "MHz"),
            ("kappa", "MHz"),
            ("n_at_g_max", ""),
            ("n_at_g_min", ""),
            ("delta_n", ""),
            ("relative_error", "%"),
        ],
    );
    let pairs: Vec<(f64, f64)> = errors.iter().flat_map(|&a| errors.iter().map(move |&b| (a, b))).collect();
    let results = run_points(&pairs, settings.threads, |&(eg, ek)| -> PointResult {
        let reference = reference.clone()?;
        let (gamma, kappa) = (gamma_ref * (1.0 + eg), kappa_ref * (1.0 + ek));
        let (high, low) = if eg == 0.0 && ek == 0.0 { span(gamma_ref, kappa_ref)? } else { span(gamma, kappa)? };
        let delta = high - low;
        Ok(PointValues::new(vec![
            Some(to_mhz(gamma)),
            Some(to_mhz(kappa)),
            Some(high),
            Some(low),
            Some(delta),
            Some(100.0 * (delta - reference) / reference),
        ]))
    });
    table.fill(results);
    table
}

/// Convenience wrapper used by the CLI and tests.
pub fn controllability(gamma: f64, kappa: f64, settings: &SweepSettings) -> Result<f64, crate::maser::SolveError> {
    g2_variation(gamma, kappa, 0.1, 2.0, default_truncation(gamma, kappa), &settings.solver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::mhz;

    #[test]
    fn excluded_points_are_marked() {
        let settings = SweepSettings { truncation: Some(12), ..Default::default() };
        let pd = phase_diagram(&[mhz(50.0)], &[mhz(0.2), mhz(5.0)], 0.5, 0.5, &settings);
        assert!(matches!(pd.table.rows[0].status, PointStatus::Excluded { .. }));
        assert_eq!(pd.table.rows[1].status, PointStatus::Ok);
        assert_eq!(pd.table.column("delta_g2")[1], Some(0.0));
    }

    #[test]
    fn robustness_reference_cell_is_exact() {
        let settings = SweepSettings { truncation: Some(15), ..Default::default() };
        let t = robustness_map(mhz(5.0), mhz(0.5), 0.1, 3, &settings);
        assert_eq!(t.column("relative_error")[4], Some(0.0));
    }
}
