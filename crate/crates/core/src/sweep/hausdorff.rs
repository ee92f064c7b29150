use serde::{Deserialize, Serialize};

use crate::circuit::{effective_model, CircuitDesign, CircuitError, CouplingConvention};

use super::{linspace, run_points, to_mhz, Axis, PointResult, PointValues, SweepSettings, SweepTable};

/// Two sampled curves and their Hausdorff distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveDistance {
    pub curve_a: Vec<[f64; 2]>,
    pub curve_b: Vec<[f64; 2]>,
    pub hausdorff: f64,
}

impl CurveDistance {
    pub fn new(curve_a: Vec<[f64; 2]>, curve_b: Vec<[f64; 2]>) -> Self {
        let hausdorff = hausdorff(&curve_a, &curve_b);
        Self { curve_a, curve_b, hausdorff }
    }
}

fn directed(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter()
        .map(|p| b.iter().map(|q| (p[0] - q[0]).hypot(p[1] - q[1])).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Euclidean Hausdorff distance between two point sets. Zero when both are
/// empty, infinite when exactly one is.
pub fn hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (false, false) => directed(a, b).max(directed(b, a)),
        _ => f64::INFINITY,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HausdorffOptions {
    /// Samples of the shared flux grid over [0, 1/2] Φ0.
    pub flux_points: usize,
    /// Move the source to ω_r + Δ along with the second reservoir.
    pub retune_source: bool,
}

impl Default for HausdorffOptions {
    fn default() -> Self {
        Self { flux_points: 101, retune_source: true }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HausdorffMap {
    pub table: SweepTable,
    /// Per Δ: argmin α, √(ω_r/(ω_r+Δ)) and the minimum distance.
    pub ridge: SweepTable,
}

/// Normalized (Φ/Φ0, g_eff/`scale`) curve of reservoir 0 of `design`.
fn normalized_curve(design: &CircuitDesign, fluxes: &[f64], scale: f64, convention: CouplingConvention) -> Result<Vec<[f64; 2]>, CircuitError> {
    fluxes
        .iter()
        .map(|&f| Ok([f, effective_model(design, f, convention)?.g_eff[0] / scale]))
        .collect()
}

/// Single-reservoir variant with the reservoir moved by `delta` and its
/// coupler capacitance scaled by `alpha`.
fn variant(reference: &CircuitDesign, delta: f64, alpha: f64, retune_source: bool) -> CircuitDesign {
    let mut d = super::single_reservoir(reference, 0);
    d.reservoirs[0].frequency += delta;
    d.reservoirs[0].coupler_capacitance *= alpha;
    if retune_source {
        d.source_frequency = d.reservoirs[0].frequency;
    }
    d
}

/// Hausdorff distance between the reference g_eff(Φ) curve and that of a
/// reservoir detuned by Δ with coupling capacitance α·C_rc, over a (Δ, α)
/// grid. Both curves are normalized by the reference g_eff(0).
pub fn hausdorff_map(design: &CircuitDesign, deltas: &[f64], alphas: &[f64], options: &HausdorffOptions, settings: &SweepSettings) -> HausdorffMap {
    let fluxes = linspace(0.0, 0.5, options.flux_points);
    let reference = super::single_reservoir(design, settings.target_reservoir);
    let base = effective_model(&reference, 0.0, settings.convention)
        .map(|m| m.g_eff[0])
        .and_then(|g0| Ok((g0, normalized_curve(&reference, &fluxes, g0, settings.convention)?)));

    let mut table = SweepTable::new(
        "hausdorff",
        vec![
            Axis::new("delta", "MHz", deltas.iter().map(|d| to_mhz(*d)).collect()),
            Axis::new("alpha", "", alphas.to_vec()),
        ],
        &[("distance", ""), ("g_eff_at_zero", "MHz")],
    );
    let pairs: Vec<(f64, f64)> = deltas.iter().flat_map(|&d| alphas.iter().map(move |&a| (d, a))).collect();
    let results = run_points(&pairs, settings.threads, |&(delta, alpha)| -> PointResult {
        let (g0, curve_a) = base.clone()?;
        let d = variant(&reference, delta, alpha, options.retune_source);
        let curve_b = normalized_curve(&d, &fluxes, g0, settings.convention)?;
        Ok(PointValues::new(vec![Some(hausdorff(&curve_a, &curve_b)), Some(to_mhz(curve_b[0][1] * g0))]))
    });
    table.fill(results);

    let mut ridge = SweepTable::new(
        "hausdorff-ridge",
        vec![Axis::new("delta", "MHz", deltas.iter().map(|d| to_mhz(*d)).collect())],
        &[("alpha_argmin", ""), ("alpha_theory", ""), ("distance_min", "")],
    );
    let omega_r = reference.reservoirs[0].frequency;
    let distances = table.column("distance");
    let ridge_rows: Vec<PointResult> = deltas
        .iter()
        .enumerate()
        .map(|(i, &delta)| {
            let row = &distances[i * alphas.len()..(i + 1) * alphas.len()];
            let best = row
                .iter()
                .enumerate()
                .filter_map(|(k, v)| v.map(|v| (k, v)))
                .min_by(|x, y| x.1.total_cmp(&y.1));
            match best {
                Some((k, v)) => Ok(PointValues::new(vec![Some(alphas[k]), Some((omega_r / (omega_r + delta)).sqrt()), Some(v)])),
                None => Err(super::failed("hausdorff", "no valid alpha in row")),
            }
        })
        .collect();
    ridge.fill(ridge_rows);
    HausdorffMap { table, ridge }
}
