//! Wigner quasi-probability of a single mode, W(α) with α = x + iy,
//! normalized as ∫W d²α = 1 (so the vacuum has W(0) = 2/π).

use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ObservableError;
use crate::hilbert::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Half-width of the square grid in |α| units.
    pub extent: f64,
    pub points: usize,
}

impl GridSpec {
    /// 201×201 over [−1.2√N, 1.2√N]².
    pub fn for_truncation(n: usize) -> Self {
        Self { extent: 1.2 * (n as f64).sqrt(), points: 201 }
    }

    pub fn axis(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![0.0];
        }
        let step = 2.0 * self.extent / (self.points - 1) as f64;
        (0..self.points).map(|k| -self.extent + step * k as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerGrid {
    pub re_axis: Vec<f64>,
    pub im_axis: Vec<f64>,
    /// values[row][col] = W(re_axis[col] + i·im_axis[row])
    pub values: Vec<Vec<f64>>,
    /// Riemann sum of W over the grid.
    pub normalization: f64,
    pub warnings: Vec<String>,
}

impl WignerGrid {
    /// Header row is the re-axis, first column the im-axis.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["im\\re".to_string()];
        header.extend(self.re_axis.iter().map(|x| x.to_string()));
        w.write_record(&header)?;
        for (y, row) in self.im_axis.iter().zip(&self.values) {
            let mut rec = vec![y.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// W at one phase-space point from the Fock-basis Laguerre recursion.
fn wigner_point(rho: &[Vec<C64>], a: C64) -> f64 {
    let m = rho.len();
    let mut list = vec![C64::new(0.0, 0.0); m];
    list[0] = C64::new((-2.0 * a.norm_sqr()).exp() / std::f64::consts::PI, 0.0);
    let mut w = rho[0][0].re * list[0].re;
    for n in 1..m {
        list[n] = a * 2.0 * list[n - 1] / (n as f64).sqrt();
        w += 2.0 * (rho[0][n] * list[n]).re;
    }
    for mm in 1..m {
        let sm = (mm as f64).sqrt();
        let mut temp = list[mm];
        list[mm] = (a.conj() * 2.0 * temp - list[mm - 1] * sm) / sm;
        w += (rho[mm][mm] * list[mm]).re;
        for n in (mm + 1)..m {
            let next = (a * 2.0 * list[n - 1] - temp * sm) / (n as f64).sqrt();
            temp = list[n];
            list[n] = next;
            w += 2.0 * (rho[mm][n] * list[n]).re;
        }
    }
    2.0 * w
}

pub fn wigner(rho: &DensityMatrix, grid: &GridSpec) -> Result<WignerGrid, ObservableError> {
    let dims = rho.space().dims();
    if dims.len() != 1 {
        return Err(ObservableError::NotSingleMode(dims.to_vec()));
    }
    if grid.points < 2 || !(grid.extent > 0.0) {
        return Err(ObservableError::InvalidArgument("grid needs at least 2 points and positive extent".into()));
    }
    let dense = rho.to_dense();
    let axis = grid.axis();
    let values: Vec<Vec<f64>> = axis
        .par_iter()
        .map(|&y| axis.iter().map(|&x| wigner_point(&dense, C64::new(x, y))).collect())
        .collect();
    let step = axis[1] - axis[0];
    let normalization = values.iter().flatten().sum::<f64>() * step * step;

    let mut warnings = Vec::new();
    let peak = values.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let last = grid.points - 1;
    let edge = (0..grid.points)
        .flat_map(|k| [values[0][k], values[last][k], values[k][0], values[k][last]])
        .map(f64::abs)
        .fold(0.0, f64::max);
    if edge > 1e-3 * peak {
        warnings.push(format!("TruncatedSupport: |W| on the grid edge reaches {:.1e} of the peak", edge / peak));
    }
    Ok(WignerGrid { re_axis: axis.clone(), im_axis: axis, values, normalization, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn vacuum_closed_form() {
        let rho = DensityMatrix::fock(6, 0).unwrap();
        let g = wigner(&rho, &GridSpec { extent: 3.0, points: 61 }).unwrap();
        for (y, row) in g.im_axis.iter().zip(&g.values) {
            for (x, w) in g.re_axis.iter().zip(row) {
                let expect = 2.0 / PI * (-2.0 * (x * x + y * y)).exp();
                assert!((w - expect).abs() < 1e-14);
            }
        }
        assert!((g.values[30][30] - 2.0 / PI).abs() < 1e-15);
        assert!((g.normalization - 1.0).abs() < 1e-6);
        assert!(g.warnings.is_empty());
    }

    #[test]
    fn coherent_state_is_displaced_vacuum() {
        let beta = C64::new(1.1, -0.7);
        let rho = DensityMatrix::coherent(40, beta).unwrap();
        for &(x, y) in &[(0.0, 0.0), (1.1, -0.7), (0.5, 0.2), (-0.4, 1.0)] {
            let w = wigner_point(&rho.to_dense(), C64::new(x, y));
            let expect = 2.0 / PI * (-2.0 * ((x - beta.re).powi(2) + (y - beta.im).powi(2))).exp();
            assert!((w - expect).abs() < 1e-10, "({x},{y}): {w} vs {expect}");
        }
    }

    #[test]
    fn fock_one_is_negative_at_origin() {
        let w = wigner_point(&DensityMatrix::fock(3, 1).unwrap().to_dense(), C64::new(0.0, 0.0));
        assert!((w + 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn small_grid_warns() {
        let rho = DensityMatrix::coherent(30, C64::new(2.0, 0.0)).unwrap();
        let g = wigner(&rho, &GridSpec { extent: 1.0, points: 11 }).unwrap();
        assert!(!g.warnings.is_empty());
    }

    #[test]
    fn csv_layout() {
        let g = wigner(&DensityMatrix::fock(3, 0).unwrap(), &GridSpec { extent: 1.0, points: 3 }).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("im\\re,-1,0,1"));
        assert!(lines[2].starts_with("0,"));
    }
}
