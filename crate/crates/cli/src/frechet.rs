//! Fréchet means of points read from CSV, with optional private release.

use std::sync::Arc;

use nalgebra::DMatrix;
use rieopt::geometry::GeometryKind;
use rieopt::ops::frechet_mean;
use rieopt::privacy::{log_euclidean_mechanism, rie_laplace_mechanism, McmcConfig, PrivacyBudget};
use rieopt::{Array, Manifold, ManifoldPoint};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mechanism {
    None,
    Laplace,
    LogEuclidean,
}

impl std::str::FromStr for Mechanism {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Mechanism> {
        match s {
            "none" => Ok(Mechanism::None),
            "laplace" => Ok(Mechanism::Laplace),
            "log-euclidean" => Ok(Mechanism::LogEuclidean),
            _ => Err(CliError::usage(format!(
                "unknown mechanism {s:?} (expected none, laplace, log-euclidean)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FrechetOptions {
    pub geometry: GeometryKind,
    /// Columns of a Grassmann point; ignored elsewhere.
    pub rank: usize,
    pub mechanism: Mechanism,
    pub sensitivity: f64,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub step: f64,
    pub iters: usize,
}

/// Shape of the point stored in a flattened row of `width` values.
fn point_shape(opts: &FrechetOptions, width: usize) -> CliResult<(usize, usize)> {
    let shape = match opts.geometry {
        GeometryKind::Grassmann => {
            if opts.rank == 0 || width % opts.rank != 0 {
                return Err(CliError::usage(format!(
                    "row width {width} is not a multiple of --rank {}",
                    opts.rank
                )));
            }
            (width / opts.rank, opts.rank)
        }
        GeometryKind::SpdAffineInvariant | GeometryKind::SpdLogEuclidean => {
            let m = (width as f64).sqrt().round() as usize;
            if m * m != width {
                return Err(CliError::usage(format!("row width {width} is not a square")));
            }
            (m, m)
        }
        _ => (width, 1),
    };
    Ok(shape)
}

fn to_point(manifold: &Arc<dyn Manifold>, row: &[f64], shape: (usize, usize)) -> CliResult<ManifoldPoint> {
    let value = DMatrix::from_row_slice(shape.0, shape.1, row);
    Ok(ManifoldPoint::new(manifold.clone(), value)?)
}

/// Row-major flattening, the inverse of the input layout.
pub fn flatten(a: &Array) -> Vec<f64> {
    (0..a.nrows())
        .flat_map(|i| a.row(i).iter().copied().collect::<Vec<_>>())
        .collect()
}

pub fn run_frechet(opts: &FrechetOptions, rows: &DMatrix<f64>) -> CliResult<ManifoldPoint> {
    if opts.mechanism == Mechanism::LogEuclidean && opts.geometry != GeometryKind::SpdLogEuclidean {
        return Err(CliError::usage("--private log-euclidean requires --geometry spd-le"));
    }
    let shape = point_shape(opts, rows.ncols())?;
    let manifold = opts.geometry.build(shape.0, shape.1)?;
    let points = (0..rows.nrows())
        .map(|i| {
            let row: Vec<f64> = rows.row(i).iter().copied().collect();
            to_point(&manifold, &row, shape)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mean = frechet_mean(&points, opts.step, opts.iters)?.point;
    Ok(match opts.mechanism {
        Mechanism::None => mean,
        Mechanism::Laplace => {
            rie_laplace_mechanism(&mean, opts.sensitivity, opts.eps, McmcConfig::default(), opts.seed)?
        }
        Mechanism::LogEuclidean => {
            let budget = PrivacyBudget::new(opts.eps, opts.delta)?;
            log_euclidean_mechanism(&mean, opts.sensitivity, &budget, opts.seed)?
        }
    })
}
