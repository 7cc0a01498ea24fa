//! Figure data: `Φ(ξ, w)` against `ξ` for a fan of `w` values, against `w`
//! for a fan of `ξ` values, and the three free path densities.

use std::io::Write;

use anyhow::Result;
use lorentz_core::kernels::{fpl_between, fpl_generic, fpl_lattice, phi};
use lorentz_core::trajectory::fmt_sig15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    /// Φ(ξ, w) against ξ for w = 1, 0.9, ..., 0
    Fig4,
    /// Φ(ξ, w) against w for ξ = 0.5, 0.6, ..., 2
    Fig5,
    /// Free path densities: between collisions, generic start, lattice start
    Fpl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn write<W: Write>(&self, out: &mut W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|&x| fmt_sig15(x)).collect();
                    writeln!(out, "{}", cells.join(","))?;
                }
            }
            Format::Json => {
                let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
                    .rows
                    .iter()
                    .map(|row| {
                        self.columns
                            .iter()
                            .zip(row)
                            .map(|(c, &x)| (c.clone(), serde_json::json!(x)))
                            .collect()
                    })
                    .collect();
                serde_json::to_writer_pretty(&mut *out, &rows)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

/// `w` values of the first figure, top curve first.
pub fn fig4_ws() -> Vec<f64> {
    (0..=10).rev().map(|i| i as f64 / 10.0).collect()
}

/// `ξ` values of the second figure, top curve first.
pub fn fig5_xis() -> Vec<f64> {
    (5..=20).map(|i| i as f64 / 10.0).collect()
}

/// `points` equally spaced values in `(0, xi_max]`.
pub fn xi_grid(points: usize, xi_max: f64) -> Vec<f64> {
    (1..=points).map(|i| i as f64 * xi_max / points as f64).collect()
}

pub fn tabulate(figure: Figure, points: usize, xi_max: f64) -> Result<Table> {
    Ok(match figure {
        Figure::Fig4 => {
            let ws = fig4_ws();
            let mut columns = vec!["xi".to_string()];
            columns.extend(ws.iter().map(|w| format!("w={w}")));
            let mut rows = Vec::new();
            for xi in xi_grid(points, xi_max) {
                let mut row = vec![xi];
                for &w in &ws {
                    row.push(phi(xi, w)?);
                }
                rows.push(row);
            }
            Table { columns, rows }
        }
        Figure::Fig5 => {
            let xis = fig5_xis();
            let mut columns = vec!["w".to_string()];
            columns.extend(xis.iter().map(|x| format!("xi={x}")));
            let mut rows = Vec::new();
            for i in 0..=points {
                let w = -1.0 + 2.0 * i as f64 / points as f64;
                let mut row = vec![w];
                for &xi in &xis {
                    row.push(phi(xi, w)?);
                }
                rows.push(row);
            }
            Table { columns, rows }
        }
        Figure::Fpl => {
            let columns = ["xi", "phi0_bar", "phi", "phi0"].map(String::from).to_vec();
            let mut rows = Vec::new();
            for xi in xi_grid(points, xi_max) {
                rows.push(vec![xi, fpl_between(xi)?, fpl_generic(xi)?, fpl_lattice(xi)?]);
            }
            Table { columns, rows }
        }
    })
}

/// Largest violation of the curve ordering: for the first figure each row
/// (ξ > 1/2) must be non-increasing from the `w = 1` column to `w = 0`; for
/// the second each row must be non-increasing in `ξ`.
pub fn ordering_violation(figure: Figure, table: &Table) -> f64 {
    let mut worst: f64 = 0.0;
    for row in &table.rows {
        if figure == Figure::Fig4 && row[0] <= 0.5 {
            continue;
        }
        for pair in row[1..].windows(2) {
            worst = worst.max(pair[1] - pair[0]);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig4_flat_below_half() {
        let t = tabulate(Figure::Fig4, 300, 3.0).unwrap();
        let row = t.rows.iter().find(|r| r[0] == 0.25).unwrap();
        let expect = 1.0 - 3.0 / std::f64::consts::PI.powi(2);
        assert!(row[1..].iter().all(|v| (v - expect).abs() < 1e-12));
        assert_eq!(t.columns.len(), 12);
        assert_eq!(t.columns[1], "w=1");
        assert!(ordering_violation(Figure::Fig4, &t) <= 1e-12);
    }

    #[test]
    fn fpl_lattice_column_vanishes_past_one() {
        let t = tabulate(Figure::Fpl, 300, 3.0).unwrap();
        let row = t.rows.iter().find(|r| (r[0] - 1.5).abs() < 1e-12).unwrap();
        assert_eq!(row[3], 0.0);
    }

    #[test]
    fn csv_and_json_output() {
        let t = tabulate(Figure::Fig5, 4, 0.0).unwrap();
        assert!(ordering_violation(Figure::Fig5, &t) <= 1e-12);
        let mut csv = Vec::new();
        t.write(&mut csv, Format::Csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("w,xi=0.5,xi=0.6"));
        assert_eq!(text.lines().count(), 6);
        let mut json = Vec::new();
        t.write(&mut json, Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 5);
    }
}
