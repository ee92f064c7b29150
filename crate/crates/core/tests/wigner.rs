use masersim::hilbert::DensityMatrix;
use masersim::lindblad::SolverOptions;
use masersim::maser::jaynes_cummings_state;
use masersim::observables::{wigner, GridSpec, WignerGrid};
use masersim::units::mhz;

/// Fock wavefunctions of the quadrature x = (a + a†)/2 at `x`, levels 0..n.
fn hermite_functions(n: usize, x: f64) -> Vec<f64> {
    let mut psi = vec![0.0; n];
    let s = std::f64::consts::SQRT_2 * x;
    psi[0] = (2.0 / std::f64::consts::PI).powf(0.25) * (-x * x).exp();
    if n > 1 {
        psi[1] = std::f64::consts::SQRT_2 * s * psi[0];
    }
    for k in 2..n {
        psi[k] = (std::f64::consts::SQRT_2 * s * psi[k - 1] - ((k - 1) as f64).sqrt() * psi[k - 2]) / (k as f64).sqrt();
    }
    psi
}

/// ⟨x|ρ|x⟩ from the Fock-basis matrix.
fn quadrature_density(rho: &DensityMatrix, x: f64) -> f64 {
    let dense = rho.to_dense();
    let psi = hermite_functions(dense.len(), x);
    let mut p = 0.0;
    for (m, row) in dense.iter().enumerate() {
        for (n, v) in row.iter().enumerate() {
            p += (v * psi[m] * psi[n]).re;
        }
    }
    p
}

/// Worst deviation of ∫W dy from ⟨x|ρ|x⟩ relative to the peak density.
fn marginal_error(rho: &DensityMatrix, grid: &WignerGrid) -> f64 {
    let step = grid.im_axis[1] - grid.im_axis[0];
    let mut worst: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for (col, &x) in grid.re_axis.iter().enumerate() {
        let marginal: f64 = grid.values.iter().map(|row| row[col]).sum::<f64>() * step;
        let exact = quadrature_density(rho, x);
        worst = worst.max((marginal - exact).abs());
        peak = peak.max(exact);
    }
    worst / peak
}

#[test]
fn marginals_reproduce_quadrature_distributions() {
    let spec = GridSpec { extent: 6.0, points: 241 };
    let states = [
        ("vacuum", DensityMatrix::fock(20, 0).unwrap()),
        ("fock-1", DensityMatrix::fock(20, 1).unwrap()),
        ("thermal-2", DensityMatrix::thermal(40, 2.0).unwrap()),
    ];
    for (name, rho) in &states {
        let grid = wigner(rho, &spec).unwrap();
        let err = marginal_error(rho, &grid);
        assert!(err < 0.01, "{name}: marginal error {err}");
        assert!((grid.normalization - 1.0).abs() < 0.01, "{name}: normalization {}", grid.normalization);
    }
}

#[test]
fn hermite_oracle_is_normalized() {
    let step = 0.01;
    for k in 0..6 {
        let norm: f64 = (-800..=800).map(|i| hermite_functions(6, i as f64 * step)[k].powi(2)).sum::<f64>() * step;
        assert!((norm - 1.0).abs() < 1e-9, "level {k}: {norm}");
    }
}

#[test]
fn maser_steady_state_is_a_phase_symmetric_ring() {
    let n = 100;
    let s = jaynes_cummings_state(mhz(50.0), mhz(0.5), mhz(8.0), n, &SolverOptions::default()).unwrap();
    let reduced = s.solution.rho.partial_trace(1).unwrap();
    let grid = wigner(&reduced, &GridSpec::for_truncation(n)).unwrap();
    let m = grid.values.len();
    let peak = grid.max_value();
    let mut anisotropy: f64 = 0.0;
    for r in 0..m {
        for c in 0..m {
            // 90° rotation on the square grid: (x, y) → (−y, x).
            anisotropy = anisotropy.max((grid.values[r][c] - grid.values[c][m - 1 - r]).abs());
        }
    }
    assert!(anisotropy < 1e-6 * peak, "anisotropy {anisotropy}");

    let centre = m / 2;
    let radial = &grid.values[centre][centre..];
    let k = radial.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    let r = grid.re_axis[centre + k];
    assert!(grid.values[centre][centre] < 0.1 * peak, "no hole at the origin");
    let mean = s.reservoirs[0].mean;
    assert!((r * r - mean).abs() < 0.1 * mean, "ring radius² {} vs n̄ {mean}", r * r);
}
