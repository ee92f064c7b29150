use std::io::Write;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: &str, unit: &str, values: Vec<f64>) -> Self {
        Self { name: name.into(), unit: unit.into(), values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum PointStatus {
    Ok,
    Excluded { reason: String },
    Failed { kind: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// Grid index per axis.
    pub index: Vec<usize>,
    pub coords: Vec<f64>,
    /// One entry per column; `None` for absent values.
    pub values: Vec<Option<f64>>,
    #[serde(flatten)]
    pub status: PointStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fock: Option<Vec<f64>>,
}

/// Grid of per-point observables in row-major grid order (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub name: String,
    pub axes: Vec<Axis>,
    pub columns: Vec<Column>,
    pub rows: Vec<SweepRow>,
}

/// Outcome of one grid point.
pub type PointResult = Result<PointValues, PointStatus>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointValues {
    pub values: Vec<Option<f64>>,
    pub fock: Option<Vec<f64>>,
}

impl PointValues {
    pub fn new(values: Vec<Option<f64>>) -> Self {
        Self { values, fock: None }
    }
}

impl SweepTable {
    pub fn new(name: &str, axes: Vec<Axis>, columns: &[(&str, &str)]) -> Self {
        Self {
            name: name.into(),
            axes,
            columns: columns.iter().map(|(n, u)| Column { name: (*n).into(), unit: (*u).into() }).collect(),
            rows: Vec::new(),
        }
    }

    /// Grid indices in row-major order.
    pub fn grid_indices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..axis.values.len()).map(move |k| {
                        let mut p = prefix.clone();
                        p.push(k);
                        p
                    })
                })
                .collect();
        }
        out
    }

    pub fn coords(&self, index: &[usize]) -> Vec<f64> {
        index.iter().zip(&self.axes).map(|(k, a)| a.values[*k]).collect()
    }

    /// Fills the rows from per-point results given in grid order.
    pub fn fill(&mut self, results: Vec<PointResult>) {
        let indices = self.grid_indices();
        assert_eq!(indices.len(), results.len(), "one result per grid point");
        let width = self.columns.len();
        self.rows = indices
            .into_iter()
            .zip(results)
            .map(|(index, result)| {
                let coords = self.coords(&index);
                match result {
                    Ok(mut p) => {
                        p.values.resize(width, None);
                        SweepRow { index, coords, values: p.values, status: PointStatus::Ok, fock: p.fock }
                    }
                    Err(status) => SweepRow { index, coords, values: vec![None; width], status, fock: None },
                }
            })
            .collect();
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Column values per row; `None` on failed rows or absent values.
    pub fn column(&self, name: &str) -> Vec<Option<f64>> {
        let Some(k) = self.column_index(name) else {
            return vec![None; self.rows.len()];
        };
        self.rows.iter().map(|r| if r.status == PointStatus::Ok { r.values[k] } else { None }).collect()
    }

    pub fn failures(&self) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| matches!(r.status, PointStatus::Failed { .. })).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = self.axes.iter().map(|a| a.name.clone()).collect();
        header.extend(self.columns.iter().map(|c| c.name.clone()));
        header.push("status".into());
        header.push("error".into());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec: Vec<String> = row.coords.iter().map(|x| x.to_string()).collect();
            rec.extend(row.values.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            match &row.status {
                PointStatus::Ok => rec.extend(["ok".to_string(), String::new()]),
                PointStatus::Excluded { reason } => rec.extend(["excluded".to_string(), reason.clone()]),
                PointStatus::Failed { kind, message } => rec.extend(["failed".to_string(), format!("{kind}: {message}")]),
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_fill_and_csv() {
        let mut t = SweepTable::new(
            "demo",
            vec![Axis::new("a", "", vec![0.0, 1.0]), Axis::new("b", "", vec![10.0, 20.0, 30.0])],
            &[("x", ""), ("y", "")],
        );
        let results: Vec<PointResult> = (0..6)
            .map(|k| {
                if k == 4 {
                    Err(PointStatus::Failed { kind: "solver".into(), message: "boom".into() })
                } else {
                    Ok(PointValues::new(vec![Some(k as f64), None]))
                }
            })
            .collect();
        t.fill(results);
        assert_eq!(t.rows[4].index, vec![1, 1]);
        assert_eq!(t.rows[4].coords, vec![1.0, 20.0]);
        assert_eq!(t.failures().len(), 1);
        assert_eq!(t.column("x")[5], Some(5.0));
        assert_eq!(t.column("x")[4], None);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "a,b,x,y,status,error");
        assert_eq!(lines[1], "0,10,0,,ok,");
        assert_eq!(lines[5], "1,20,,,failed,solver: boom");
    }
}
