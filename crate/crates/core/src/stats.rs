//! Sample covariance, precision matrix and partial correlations.
//!
//! The sample covariance uses the `1/n` divisor. Partial correlations are
//! invariant under any positive rescaling of the covariance, so the divisor
//! never changes a selected graph.

use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, spd_inverse};

/// Observations stored as a `p x n` matrix; column `t` is observation `x(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    values: DMatrix<f64>,
}

impl SampleMatrix {
    /// Wraps a `p x n` matrix. Requires `n > p` and finite entries.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        let (p, n) = values.shape();
        if p == 0 {
            return Err(Error::InvalidParameter("sample has no variables".into()));
        }
        if n <= p {
            return Err(Error::InsufficientSamples { n, p });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Malformed(format!(
                "non-finite value at variable {}, observation {}",
                pos % p + 1,
                pos / p + 1
            )));
        }
        Ok(Self { values })
    }

    /// Builds from observation rows (each row holds one value per variable).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::Malformed(format!(
                "row {} has {} values, expected {p}",
                k + 1,
                r.len()
            )));
        }
        Self::new(DMatrix::from_fn(p, n, |i, t| rows[t][i]))
    }

    /// Reads CSV: one row per observation, one column per variable. A first
    /// row that does not parse as numbers is taken as a header.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (k, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Malformed(format!("csv: {e}")))?;
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(row) => rows.push(row),
                Err(_) if k == 0 => continue,
                Err(e) => {
                    return Err(Error::Malformed(format!("csv row {}: {e}", k + 1)));
                }
            }
        }
        if rows.is_empty() {
            return Err(Error::Malformed("csv contains no observations".into()));
        }
        Self::from_rows(&rows)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    /// Observation rows as CSV text with a `x1,..,xp` header.
    pub fn to_csv(&self) -> String {
        let mut out = (1..=self.p())
            .map(|i| format!("x{i}"))
            .collect::<Vec<_>>()
            .join(",");
        out.push('\n');
        for col in self.values.column_iter() {
            let row: Vec<String> = col.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn p(&self) -> usize {
        self.values.nrows()
    }

    pub fn n(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Moves variable `v` to position `perm[v]`.
    pub fn permute_variables(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.p(), "permutation length");
        let mut out = self.values.clone();
        for (v, &target) in perm.iter().enumerate() {
            out.set_row(target, &self.values.row(v));
        }
        Self { values: out }
    }

    /// Multiplies every observation of variable `v` by `factor`.
    pub fn scale_variable(&self, v: usize, factor: f64) -> Self {
        let mut out = self.values.clone();
        out.row_mut(v).scale_mut(factor);
        Self { values: out }
    }
}

/// Symmetric positive definite `p x p` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    values: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Accepts an exactly symmetric matrix and verifies positive definiteness.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if !values.is_square() {
            return Err(Error::DimensionMismatch {
                expected: values.nrows(),
                found: values.ncols(),
            });
        }
        if values != values.transpose() {
            return Err(Error::InvalidParameter("covariance is not symmetric".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Malformed("covariance has non-finite entries".into()));
        }
        cholesky_lower(&values)?;
        Ok(Self { values })
    }

    pub fn p(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(&self.values * factor)
    }
}

/// `1/n`-normalized centered cross products of the sample.
pub fn sample_covariance(x: &SampleMatrix) -> Result<CovarianceMatrix> {
    let (p, n) = x.values.shape();
    if n <= p {
        return Err(Error::InsufficientSamples { n, p });
    }
    let mean = x.values.column_mean();
    let mut centered = x.values.clone();
    for mut col in centered.column_iter_mut() {
        col -= &mean;
    }
    let mut s = (&centered * centered.transpose()) / n as f64;
    // the product is symmetric up to summation order; force exact symmetry
    for i in 0..p {
        for j in (i + 1)..p {
            s[(j, i)] = s[(i, j)];
        }
    }
    CovarianceMatrix::new(s)
}

/// Concentration matrix `Σ^{-1}`.
pub fn precision(c: &CovarianceMatrix) -> Result<DMatrix<f64>> {
    spd_inverse(&c.values)
}

/// Matrix of partial correlations of each pair given all other variables.
/// The diagonal is set to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialCorrelationMatrix {
    values: DMatrix<f64>,
}

impl PartialCorrelationMatrix {
    /// Builds from a precision matrix `K`: entry `(i, j)` is
    /// `-k_ij / sqrt(k_ii k_jj)`.
    pub fn from_precision(k: &DMatrix<f64>) -> Self {
        let p = k.nrows();
        let values = DMatrix::from_fn(p, p, |i, j| {
            if i == j {
                1.0
            } else {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                (-k[(a, b)] / (k[(a, a)] * k[(b, b)]).sqrt()).clamp(-1.0, 1.0)
            }
        });
        Self { values }
    }

    pub fn p(&self) -> usize {
        self.values.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }
}

pub fn partial_correlations(c: &CovarianceMatrix) -> Result<PartialCorrelationMatrix> {
    Ok(PartialCorrelationMatrix::from_precision(&precision(c)?))
}

/// Sample partial correlations `r^{ij}` of a data set.
pub fn sample_partial_correlations(x: &SampleMatrix) -> Result<PartialCorrelationMatrix> {
    partial_correlations(&sample_covariance(x)?)
}
