//! DOF-scaling benchmark of the twist and DH pipelines on planar snakes.

use std::cmp::Ordering;
use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, Matrix6xX};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use screwchain::dh::{
    dh_coriolis_matrix, dh_forward_kinematics, dh_gravity_vector, dh_hybrid_jacobian, dh_mass_matrix,
    snake_to_dh, DhModel,
};
use screwchain::dynamics::{coriolis_matrix, gravity_vector, mass_matrix};
use screwchain::kinematics::{forward_kinematics, hybrid_jacobian};
use screwchain::robots::make_snake;
use screwchain::{Point, RobotModel, Transform};

use crate::format::{fmt_g, quantize};

/// Minimum wall time of one timed batch; cheap evaluations are repeated
/// until a batch reaches it.
const MIN_BATCH_NS: f64 = 10_000.0;
const MAX_BATCH: usize = 1 << 20;

pub const CSV_HEADER: &str = "quantity,method,dof,reps,median_ns,p10_ns,p90_ns";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantity {
    Fk,
    HybridJacobian,
    Mass,
    Gravity,
    Coriolis,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::Fk,
        Quantity::HybridJacobian,
        Quantity::Mass,
        Quantity::Gravity,
        Quantity::Coriolis,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Fk => "fk",
            Quantity::HybridJacobian => "hybrid_jacobian",
            Quantity::Mass => "mass",
            Quantity::Gravity => "gravity",
            Quantity::Coriolis => "coriolis",
        }
    }

    /// Whether the scaling fit also tries `dof^2`.
    pub fn superlinear(self) -> bool {
        matches!(self, Quantity::Mass | Quantity::Coriolis)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quantity {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "fk" => Ok(Quantity::Fk),
            "hybrid_jacobian" | "jacobian" => Ok(Quantity::HybridJacobian),
            "mass" => Ok(Quantity::Mass),
            "gravity" => Ok(Quantity::Gravity),
            "coriolis" => Ok(Quantity::Coriolis),
            other => Err(BenchError::UnknownQuantity(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Poe,
    Dh,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Poe => "poe",
            Method::Dh => "dh",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "poe" => Ok(Method::Poe),
            "dh" => Ok(Method::Dh),
            other => Err(BenchError::UnknownMethod(other.to_string())),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("unknown quantity `{0}` (expected fk, hybrid_jacobian, mass, gravity or coriolis)")]
    UnknownQuantity(String),
    #[error("unknown method `{0}` (expected poe or dh)")]
    UnknownMethod(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Model(#[from] screwchain::Error),
    #[error("{quantity}/{method} at dof {dof}: value inside the timing loop differs from the reference")]
    ValueChanged {
        quantity: Quantity,
        method: Method,
        dof: usize,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{quantity}/{method}: scaling fit needs at least 4 distinct dof values, got {points}")]
    InsufficientPoints {
        quantity: Quantity,
        method: Method,
        points: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchResult {
    pub quantity: Quantity,
    pub method: Method,
    pub dof: usize,
    pub reps: usize,
    pub median_ns: f64,
    pub p10_ns: f64,
    pub p90_ns: f64,
}

impl BenchResult {
    fn sort_key(&self) -> (Quantity, Method, usize) {
        (self.quantity, self.method, self.dof)
    }
}

/// Output of one evaluation, compared bit for bit against a reference.
#[derive(Debug, Clone)]
enum Value {
    Pose(Transform),
    Jacobian(Matrix6xX<f64>),
    Matrix(DMatrix<f64>),
    Vector(DVector<f64>),
}

impl Value {
    fn bits(&self) -> Vec<u64> {
        let slice: Vec<f64> = match self {
            Value::Pose(h) => h.to_matrix().as_slice().to_vec(),
            Value::Jacobian(j) => j.as_slice().to_vec(),
            Value::Matrix(m) => m.as_slice().to_vec(),
            Value::Vector(v) => v.as_slice().to_vec(),
        };
        slice.iter().map(|x| x.to_bits()).collect()
    }
}

/// Snake of `dof` links in both representations, with the seeded state.
pub struct Workload {
    pub model: RobotModel,
    pub dh: DhModel,
    pub q: DVector<f64>,
    pub qdot: DVector<f64>,
}

impl Workload {
    /// Unit links and masses; `q` and `qdot` drawn from a generator seeded
    /// with `dof`.
    pub fn new(dof: usize) -> Result<Self, BenchError> {
        let mut rng = ChaCha8Rng::seed_from_u64(dof as u64);
        let q = DVector::from_fn(dof, |_, _| {
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)
        });
        let qdot = DVector::from_fn(dof, |_, _| rng.random_range(-1.0..1.0));
        Ok(Self {
            model: make_snake(dof, 1.0, 1.0)?,
            dh: snake_to_dh(dof, 1.0, 1.0)?,
            q,
            qdot,
        })
    }

    fn evaluate(&self, quantity: Quantity, method: Method) -> Result<Value, screwchain::Error> {
        let (m, dh, q, qd) = (black_box(&self.model), black_box(&self.dh), &self.q, &self.qdot);
        Ok(match (quantity, method) {
            (Quantity::Fk, Method::Poe) => Value::Pose(forward_kinematics(m, q, Point::EndEffector)?),
            (Quantity::Fk, Method::Dh) => Value::Pose(dh_forward_kinematics(dh, q)?),
            (Quantity::HybridJacobian, Method::Poe) => {
                Value::Jacobian(hybrid_jacobian(m, q, Point::EndEffector)?.matrix)
            }
            (Quantity::HybridJacobian, Method::Dh) => Value::Jacobian(dh_hybrid_jacobian(dh, q)?.matrix),
            (Quantity::Mass, Method::Poe) => Value::Matrix(mass_matrix(m, q)?),
            (Quantity::Mass, Method::Dh) => Value::Matrix(dh_mass_matrix(dh, q)?),
            (Quantity::Gravity, Method::Poe) => Value::Vector(gravity_vector(m, q)?),
            (Quantity::Gravity, Method::Dh) => Value::Vector(dh_gravity_vector(dh, q)?),
            (Quantity::Coriolis, Method::Poe) => Value::Matrix(coriolis_matrix(m, q, qd)?),
            (Quantity::Coriolis, Method::Dh) => Value::Matrix(dh_coriolis_matrix(dh, q, qd)?),
        })
    }

    /// Flattened value of `quantity` (column-major for matrices).
    pub fn values(&self, quantity: Quantity, method: Method) -> Result<Vec<f64>, screwchain::Error> {
        Ok(self
            .evaluate(quantity, method)?
            .bits()
            .into_iter()
            .map(f64::from_bits)
            .collect())
    }
}

/// Linear interpolation between closest ranks; `sorted` is non-empty.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn time_one(
    work: &Workload,
    quantity: Quantity,
    method: Method,
    reps: usize,
    warmup: usize,
) -> Result<BenchResult, BenchError> {
    let reference = work.evaluate(quantity, method)?.bits();
    let changed = BenchError::ValueChanged {
        quantity,
        method,
        dof: work.q.len(),
    };
    for _ in 0..warmup {
        black_box(work.evaluate(quantity, method)?);
    }

    let run_batch = |batch: usize| -> Result<(f64, Value), screwchain::Error> {
        let start = Instant::now();
        let mut last = work.evaluate(quantity, method)?;
        for _ in 1..batch {
            last = black_box(work.evaluate(quantity, method)?);
        }
        Ok((start.elapsed().as_nanos() as f64, last))
    };

    let mut batch = 1;
    loop {
        let (ns, _) = run_batch(batch)?;
        if ns >= MIN_BATCH_NS || batch >= MAX_BATCH {
            break;
        }
        batch *= 2;
    }

    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let (ns, last) = run_batch(batch)?;
        if last.bits() != reference {
            return Err(changed);
        }
        samples.push(ns / batch as f64);
    }
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(BenchResult {
        quantity,
        method,
        dof: work.q.len(),
        reps,
        median_ns: quantize(percentile(&samples, 0.5)),
        p10_ns: quantize(percentile(&samples, 0.1)),
        p90_ns: quantize(percentile(&samples, 0.9)),
    })
}

/// Times `quantity` for each dof. Statistics are per single evaluation and
/// rounded to the printed precision.
pub fn run_benchmark(
    quantity: Quantity,
    method: Method,
    dofs: &[usize],
    reps: usize,
    warmup: usize,
) -> Result<Vec<BenchResult>, BenchError> {
    if reps < 3 {
        return Err(BenchError::InvalidArgument(format!(
            "reps must be at least 3, got {reps}"
        )));
    }
    if dofs.contains(&0) {
        return Err(BenchError::InvalidArgument("dof must be at least 1".into()));
    }
    dofs.iter()
        .map(|&dof| time_one(&Workload::new(dof)?, quantity, method, reps, warmup))
        .collect()
}

/// CSV sorted by (quantity, method, dof).
pub fn emit_csv(results: &[BenchResult]) -> String {
    let mut sorted = results.to_vec();
    sorted.sort_by_key(BenchResult::sort_key);
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &sorted {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.quantity,
            r.method,
            r.dof,
            r.reps,
            fmt_g(r.median_ns),
            fmt_g(r.p10_ns),
            fmt_g(r.p90_ns)
        ));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<BenchResult>, BenchError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == CSV_HEADER => {}
        _ => {
            return Err(BenchError::Parse {
                line: 1,
                message: format!("expected header `{CSV_HEADER}`"),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let err = |message: String| BenchError::Parse { line: i + 1, message };
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 7 {
                return Err(err(format!("expected 7 fields, got {}", cells.len())));
            }
            let int = |s: &str| s.parse::<usize>().map_err(|e| err(format!("`{s}`: {e}")));
            let num = |s: &str| s.parse::<f64>().map_err(|e| err(format!("`{s}`: {e}")));
            Ok(BenchResult {
                quantity: cells[0].parse().map_err(|e: BenchError| err(e.to_string()))?,
                method: cells[1].parse().map_err(|e: BenchError| err(e.to_string()))?,
                dof: int(cells[2])?,
                reps: int(cells[3])?,
                median_ns: num(cells[4])?,
                p10_ns: num(cells[5])?,
                p90_ns: num(cells[6])?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// `y = a x^2 + b x + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub quantity: Quantity,
    pub method: Method,
    pub points: usize,
    pub linear: LinearFit,
    pub quadratic: Option<QuadraticFit>,
}

fn r_squared(ys: &[f64], predicted: impl Iterator<Item = f64>) -> f64 {
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = ys.iter().zip(predicted).map(|(y, p)| (y - p).powi(2)).sum();
    if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= f64::EPSILON * ys.iter().map(|y| y * y).sum::<f64>() {
        1.0
    } else {
        0.0
    }
}

fn least_squares(columns: &[Vec<f64>], ys: &[f64]) -> Vec<f64> {
    let a = DMatrix::from_fn(ys.len(), columns.len(), |r, c| columns[c][r]);
    let b = DVector::from_column_slice(ys);
    a.svd(true, true)
        .solve(&b, 1e-12)
        .expect("SVD computed with both factors")
        .as_slice()
        .to_vec()
}

pub fn fit_linear(xs: &[f64], ys: &[f64]) -> LinearFit {
    let coef = least_squares(&[xs.to_vec(), vec![1.0; xs.len()]], ys);
    let (slope, intercept) = (coef[0], coef[1]);
    LinearFit {
        slope,
        intercept,
        r2: r_squared(ys, xs.iter().map(|x| slope * x + intercept)),
    }
}

pub fn fit_quadratic(xs: &[f64], ys: &[f64]) -> QuadraticFit {
    let squares = xs.iter().map(|x| x * x).collect();
    let coef = least_squares(&[squares, xs.to_vec(), vec![1.0; xs.len()]], ys);
    let (a, b, c) = (coef[0], coef[1], coef[2]);
    QuadraticFit {
        a,
        b,
        c,
        r2: r_squared(ys, xs.iter().map(|x| a * x * x + b * x + c)),
    }
}

/// Least-squares fit of `median_ns` against dof for every (quantity, method)
/// group, plus a quadratic fit for the mass and Coriolis matrices.
pub fn emit_scaling_fit(results: &[BenchResult]) -> Result<Vec<ScalingFit>, BenchError> {
    let mut sorted = results.to_vec();
    sorted.sort_by_key(BenchResult::sort_key);
    let mut fits = Vec::new();
    for group in sorted.chunk_by(|a, b| (a.quantity, a.method) == (b.quantity, b.method)) {
        let (quantity, method) = (group[0].quantity, group[0].method);
        let mut dofs: Vec<usize> = group.iter().map(|r| r.dof).collect();
        dofs.dedup();
        if dofs.len() < 4 {
            return Err(BenchError::InsufficientPoints {
                quantity,
                method,
                points: dofs.len(),
            });
        }
        let xs: Vec<f64> = group.iter().map(|r| r.dof as f64).collect();
        let ys: Vec<f64> = group.iter().map(|r| r.median_ns).collect();
        fits.push(ScalingFit {
            quantity,
            method,
            points: group.len(),
            linear: fit_linear(&xs, &ys),
            quadratic: quantity.superlinear().then(|| fit_quadratic(&xs, &ys)),
        });
    }
    Ok(fits)
}

/// `quantity,method,points,slope,intercept,r2_linear,quad_a,quad_b,quad_c,r2_quadratic`
/// with the quadratic columns empty where no quadratic fit was made.
pub fn fits_csv(fits: &[ScalingFit]) -> String {
    let mut out =
        String::from("quantity,method,points,slope,intercept,r2_linear,quad_a,quad_b,quad_c,r2_quadratic\n");
    for f in fits {
        let quad = f.quadratic.map_or_else(
            || ",,,".to_string(),
            |q| format!("{},{},{},{}", fmt_g(q.a), fmt_g(q.b), fmt_g(q.c), fmt_g(q.r2)),
        );
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            f.quantity,
            f.method,
            f.points,
            fmt_g(f.linear.slope),
            fmt_g(f.linear.intercept),
            fmt_g(f.linear.r2),
            quad
        ));
    }
    out
}
