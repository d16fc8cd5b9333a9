//! Timing of exp, log, dist and transport over dimension grids.

use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rieopt::geometry::GeometryKind;
use rieopt::{Array, Manifold, ManifoldPoint};

use crate::error::{CliError, CliResult};
use crate::io::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Exp,
    Log,
    Dist,
    Pt,
}

impl Op {
    pub const ALL: [Op; 4] = [Op::Exp, Op::Log, Op::Dist, Op::Pt];

    pub fn as_str(self) -> &'static str {
        match self {
            Op::Exp => "exp",
            Op::Log => "log",
            Op::Dist => "dist",
            Op::Pt => "pt",
        }
    }
}

impl FromStr for Op {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Op> {
        Op::ALL
            .into_iter()
            .find(|op| op.as_str() == s)
            .ok_or_else(|| CliError::usage(format!("unknown op {s:?} (expected exp, log, dist, pt)")))
    }
}

/// A point in a dimension grid: `d`, `m:r` (Grassmann) or `m` (SPD).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimSpec {
    pub rows: usize,
    pub cols: usize,
}

impl DimSpec {
    pub fn parse(kind: GeometryKind, s: &str) -> CliResult<DimSpec> {
        let bad = || CliError::usage(format!("bad dimension {s:?} for {}", kind.as_str()));
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let spec = match kind {
            GeometryKind::Grassmann => {
                let (m, r) = s.split_once(':').ok_or_else(bad)?;
                DimSpec { rows: num(m)?, cols: num(r)? }
            }
            GeometryKind::SpdAffineInvariant | GeometryKind::SpdLogEuclidean => {
                let m = num(s)?;
                DimSpec { rows: m, cols: m }
            }
            _ => DimSpec { rows: num(s)?, cols: 1 },
        };
        Ok(spec)
    }

    pub fn label(&self, kind: GeometryKind) -> String {
        match kind {
            GeometryKind::Grassmann => format!("{}:{}", self.rows, self.cols),
            _ => self.rows.to_string(),
        }
    }
}

/// Default grids, truncated for a laptop.
pub fn default_dims(kind: GeometryKind) -> Vec<DimSpec> {
    let vector = |ds: &[usize]| ds.iter().map(|&d| DimSpec { rows: d, cols: 1 }).collect();
    match kind {
        GeometryKind::Hypersphere | GeometryKind::Lorentz | GeometryKind::Poincare => {
            vector(&[50, 100, 500, 1000, 5000, 10000])
        }
        GeometryKind::Grassmann => [100, 500, 750, 1000]
            .iter()
            .map(|&m| DimSpec { rows: m, cols: 10 })
            .collect(),
        GeometryKind::SpdAffineInvariant | GeometryKind::SpdLogEuclidean => [10, 50, 75, 100]
            .iter()
            .map(|&m| DimSpec { rows: m, cols: m })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub geometry: &'static str,
    pub op: Op,
    pub dim_spec: String,
    pub repeats: usize,
    pub median_seconds: f64,
    pub mad_seconds: f64,
}

pub const HEADER: [&str; 6] = [
    "geometry",
    "op",
    "dim_spec",
    "repeats",
    "median_seconds",
    "mad_seconds",
];

/// Inputs for one timed call: `x`, a tangent `v` at `x` of norm 0.5, `y = exp_x(v)`.
#[derive(Debug, Clone)]
pub struct BenchInput {
    pub x: Array,
    pub v: Array,
    pub y: Array,
}

/// Deterministic in `(seed, dim_index, repeat)`.
pub fn bench_input(
    manifold: &std::sync::Arc<dyn Manifold>,
    seed: u64,
    dim_index: usize,
    repeat: usize,
) -> CliResult<BenchInput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((dim_index as u64) << 32) | repeat as u64);
    let x = ManifoldPoint::random(manifold.clone(), &mut rng);
    let v = x.random_tangent(&mut rng)?;
    let v = v.scale(0.5 / v.norm()?);
    let y = x.exp(&v)?;
    Ok(BenchInput {
        x: x.into_value(),
        v: v.into_value(),
        y: y.into_value(),
    })
}

fn time_op(m: &dyn Manifold, op: Op, input: &BenchInput) -> CliResult<f64> {
    let (x, v, y) = (&input.x, &input.v, &input.y);
    let start = Instant::now();
    match op {
        Op::Exp => {
            black_box(m.exp(black_box(x), black_box(v))?);
        }
        Op::Log => {
            black_box(m.log(black_box(x), black_box(y))?);
        }
        Op::Dist => {
            black_box(m.dist(black_box(x), black_box(y))?);
        }
        Op::Pt => {
            black_box(m.transport(black_box(x), black_box(y), black_box(v))?);
        }
    }
    Ok(start.elapsed().as_secs_f64())
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Median and median absolute deviation.
pub fn median_mad(samples: &[f64]) -> (f64, f64) {
    let mut xs = samples.to_vec();
    let med = median(&mut xs);
    let mut dev: Vec<f64> = samples.iter().map(|s| (s - med).abs()).collect();
    (med, median(&mut dev))
}

/// Repeats are the outer loop so that every dimension sees the same machine state.
pub fn run_bench(
    kind: GeometryKind,
    dims: &[DimSpec],
    ops: &[Op],
    repeats: usize,
    seed: u64,
) -> CliResult<Vec<BenchRecord>> {
    if repeats < 3 {
        return Err(CliError::usage(format!("--repeats must be >= 3, got {repeats}")));
    }
    let manifolds = dims
        .iter()
        .map(|d| kind.build(d.rows, d.cols).map_err(CliError::from))
        .collect::<CliResult<Vec<_>>>()?;
    let mut samples = vec![vec![Vec::with_capacity(repeats); ops.len()]; dims.len()];
    for rep in 0..repeats {
        for (di, m) in manifolds.iter().enumerate() {
            let input = bench_input(m, seed, di, rep)?;
            for (oi, &op) in ops.iter().enumerate() {
                // clock granularity floor keeps medians positive
                samples[di][oi].push(time_op(m.as_ref(), op, &input)?.max(1e-9));
            }
        }
    }
    let mut out = Vec::new();
    for (oi, &op) in ops.iter().enumerate() {
        for (di, d) in dims.iter().enumerate() {
            let (median_seconds, mad_seconds) = median_mad(&samples[di][oi]);
            out.push(BenchRecord {
                geometry: kind.as_str(),
                op,
                dim_spec: d.label(kind),
                repeats,
                median_seconds,
                mad_seconds,
            });
        }
    }
    Ok(out)
}

pub fn write_records(out: impl std::io::Write, records: &[BenchRecord]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.geometry.to_string(),
            r.op.as_str().to_string(),
            r.dim_spec.clone(),
            r.repeats.to_string(),
            fmt_f64(r.median_seconds),
            fmt_f64(r.mad_seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}
