//! Small least-squares fits: quadratic in `n` and exponential `a·r^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Solves `min ||A x - y||` by Householder QR. `rows` holds the rows of `A`.
/// Columns are normalised before factorisation and the scaling is undone on
/// the solution. Returns the coefficients and the residual vector.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = rows.len();
    if m == 0 || m != y.len() {
        return Err(Error::Fit("empty or mismatched system".into()));
    }
    let k = rows[0].len();
    if m < k {
        return Err(Error::Fit(format!("{m} points cannot determine {k} coefficients")));
    }
    let mut scale = vec![0.0f64; k];
    for row in rows {
        for (s, v) in scale.iter_mut().zip(row) {
            *s += v * v;
        }
    }
    for s in &mut scale {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }
    // Column-major copy of the scaled design matrix.
    let mut a: Vec<Vec<f64>> = (0..k)
        .map(|c| rows.iter().map(|r| r[c] / scale[c]).collect())
        .collect();
    let mut b = y.to_vec();

    for c in 0..k {
        let norm = a[c][c..].iter().map(|v| v * v).sum::<f64>().sqrt();
        // Columns have unit norm, so this is a relative threshold.
        if norm < 1e-10 {
            return Err(Error::Fit("rank-deficient design matrix".into()));
        }
        let alpha = if a[c][c] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[c][c..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for col in a.iter_mut().skip(c) {
                let dot: f64 = v.iter().zip(&col[c..]).map(|(p, q)| p * q).sum();
                let f = 2.0 * dot / vnorm2;
                for (x, vi) in col[c..].iter_mut().zip(&v) {
                    *x -= f * vi;
                }
            }
            let dot: f64 = v.iter().zip(&b[c..]).map(|(p, q)| p * q).sum();
            let f = 2.0 * dot / vnorm2;
            for (x, vi) in b[c..].iter_mut().zip(&v) {
                *x -= f * vi;
            }
        }
    }
    let mut x = vec![0.0f64; k];
    for r in (0..k).rev() {
        let s: f64 = ((r + 1)..k).map(|c| a[c][r] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    for (xi, s) in x.iter_mut().zip(&scale) {
        *xi /= s;
    }
    let residuals = rows
        .iter()
        .zip(y)
        .map(|(row, yi)| row.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() - yi)
        .collect();
    Ok((x, residuals))
}

/// `p(n) = a n² + b n + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub residual_norm: f64,
}

impl QuadraticFit {
    pub fn eval(&self, n: f64) -> f64 {
        (self.a * n + self.b) * n + self.c
    }
}

pub fn fit_quadratic(xs: &[f64], ys: &[f64]) -> Result<QuadraticFit> {
    let mut distinct = xs.to_vec();
    distinct.sort_by(|a, b| a.total_cmp(b));
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Fit(format!(
            "quadratic fit needs at least 3 distinct sizes, got {}",
            distinct.len()
        )));
    }
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x * x, x, 1.0]).collect();
    let (coef, res) = least_squares(&rows, ys)?;
    Ok(QuadraticFit {
        a: coef[0],
        b: coef[1],
        c: coef[2],
        residual_norm: norm(&res),
    })
}

/// `y(n) = a·r^n`, fitted on `ln y`. The residual norm is in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub a: f64,
    pub r: f64,
    pub residual_norm: f64,
}

impl ExponentialFit {
    pub fn eval(&self, n: f64) -> f64 {
        self.a * self.r.powf(n)
    }
}

pub fn fit_exponential(xs: &[f64], ys: &[f64]) -> Result<ExponentialFit> {
    if xs.len() < 3 {
        return Err(Error::Fit(format!(
            "exponential fit needs at least 3 sizes, got {}",
            xs.len()
        )));
    }
    if let Some(y) = ys.iter().find(|&&y| !(y > 0.0)) {
        return Err(Error::Fit(format!("cannot take log of non-positive value {y}")));
    }
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x]).collect();
    let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (coef, res) = least_squares(&rows, &logs)?;
    Ok(ExponentialFit {
        a: coef[0].exp(),
        r: coef[1].exp(),
        residual_norm: norm(&res),
    })
}

/// Ordinary least-squares line `y = intercept + slope·x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x]).collect();
    let (coef, _) = least_squares(&rows, ys)?;
    Ok((coef[0], coef[1]))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
