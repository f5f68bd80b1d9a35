//! Least-squares convergence rates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::table::CsvRow;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    LineFit { slope, intercept, r2 }
}

/// Slope of `log err` against `log N` over the last three points.
pub fn algebraic_fit(n: &[f64], err: &[f64]) -> Result<LineFit, CliError> {
    if n.len() < 3 {
        return Err(CliError::Fit(format!("need at least 3 rows, got {}", n.len())));
    }
    let k = n.len() - 3;
    let xs: Vec<f64> = n[k..].iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = err[k..].iter().map(|v| v.ln()).collect();
    Ok(least_squares(&xs, &ys))
}

/// `log err = slope N^{1/3} + intercept` over all points.
pub fn exponential_fit(n: &[f64], err: &[f64]) -> Result<LineFit, CliError> {
    if n.len() < 3 {
        return Err(CliError::Fit(format!("need at least 3 rows, got {}", n.len())));
    }
    let xs: Vec<f64> = n.iter().map(|v| v.cbrt()).collect();
    let ys: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    Ok(least_squares(&xs, &ys))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnRates {
    pub algebraic: LineFit,
    pub exponential: LineFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub rows: usize,
    /// Keyed by column name; columns with missing or non-positive values
    /// are left out.
    pub columns: BTreeMap<String, ColumnRates>,
}

pub fn fit_rates(rows: &[CsvRow]) -> Result<RateSummary, CliError> {
    if rows.len() < 3 {
        return Err(CliError::Fit(format!("need at least 3 rows, got {}", rows.len())));
    }
    let n: Vec<f64> = rows.iter().map(|r| r.n_dofs as f64).collect();
    let columns: [(&str, fn(&CsvRow) -> Option<f64>); 5] = [
        ("EY", |r| Some(r.ey)),
        ("EN", |r| r.en),
        ("EU", |r| Some(r.eu)),
        ("EX", |r| r.ex),
        ("eta", |r| Some(r.eta)),
    ];
    let mut out = BTreeMap::new();
    for (name, get) in columns {
        let Some(vals) = rows.iter().map(get).collect::<Option<Vec<f64>>>() else {
            continue;
        };
        if vals.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            continue;
        }
        out.insert(
            name.to_string(),
            ColumnRates {
                algebraic: algebraic_fit(&n, &vals)?,
                exponential: exponential_fit(&n, &vals)?,
            },
        );
    }
    Ok(RateSummary {
        rows: rows.len(),
        columns: out,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    #[test]
    fn exact_power_law() {
        let n = [10.0, 100.0, 1000.0, 10000.0];
        let e: Vec<f64> = n.iter().map(|v| 3.0 / v).collect();
        let f = algebraic_fit(&n, &e).unwrap();
        assert_relative_eq!(f.slope, -1.0, epsilon = 1e-12);
        assert_relative_eq!(f.intercept, 3f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn only_last_three_points_count() {
        let n = [1.0, 10.0, 100.0, 1000.0];
        let e = [1.0, 1e-2, 1e-3, 1e-4];
        assert_relative_eq!(algebraic_fit(&n, &e).unwrap().slope, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_exponential_model() {
        let n: Vec<f64> = (1..8).map(|l| (40 * l * l * l) as f64).collect();
        let e: Vec<f64> = n.iter().map(|v| (-2.0 * v.cbrt()).exp()).collect();
        let f = exponential_fit(&n, &e).unwrap();
        assert!(f.r2 >= 0.999);
        assert_relative_eq!(f.slope, -2.0, epsilon = 1e-10);
    }

    #[test]
    fn r2_of_noisy_line() {
        // hand computed: x = 0, 1, 2, y = 0, 2, 1 -> slope 0.5, r2 = 0.25
        let f = least_squares(&[0.0, 1.0, 2.0], &[0.0, 2.0, 1.0]);
        assert_relative_eq!(f.slope, 0.5, epsilon = 1e-15);
        assert_relative_eq!(f.intercept, 0.5, epsilon = 1e-15);
        assert_relative_eq!(f.r2, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn too_few_rows() {
        assert!(algebraic_fit(&[1.0, 2.0], &[1.0, 0.5]).is_err());
        assert!(fit_rates(&[]).is_err());
    }
}
