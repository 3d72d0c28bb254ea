//! Command-line interface. Exit codes: 0 success, 1 invalid input, 2 runtime
//! or numerical failure.

use std::ffi::OsString;
use std::fs;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DVector, Matrix3, Vector3};
use screwchain::dh::{
    dh_coriolis_matrix, dh_forward_kinematics, dh_gravity_vector, dh_hybrid_jacobian, dh_mass_matrix,
    snake_to_dh,
};
use screwchain::dynamics::{coriolis_matrix, gravity_vector, mass_matrix};
use screwchain::kinematics::{forward_kinematics, hybrid_jacobian};
use screwchain::robots::{make_cartpole, make_franka, make_snake};
use screwchain::sim::{circular_target, impedance_torque, simulate, Integrator, PointTask, SimConfig};
use screwchain::{Point, RobotModel};

use crate::bench::{self, BenchError, BenchResult, Method, Quantity};
use crate::description::{load_robot_file, save_robot, DescriptionError};
use crate::format::{matrix_rows, parse_list, transform_rows, vector_line};
use crate::{svg, trajectory};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<screwchain::Error> for CliError {
    fn from(e: screwchain::Error) -> Self {
        use screwchain::Error as E;
        match e {
            E::SingularInertia { .. } | E::NonFiniteState { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<DescriptionError> for CliError {
    fn from(e: DescriptionError) -> Self {
        CliError::Validation(format!("robot description: {e}"))
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Model(inner) => inner.into(),
            BenchError::ValueChanged { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

#[derive(Debug, Parser)]
#[command(
    name = "screwchain",
    version,
    about = "Screw-theory kinematics, dynamics, simulation and benchmarks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one kinematic or dynamic quantity.
    Compute(ComputeArgs),
    /// Time quantities over a range of snake sizes.
    Benchmark(BenchmarkArgs),
    /// Run a closed-loop simulation.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Write the description document of a robot.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ComputeQuantity {
    Fk,
    Jacobian,
    Mass,
    Gravity,
    Coriolis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Poe,
    Dh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntegratorArg {
    Rk4,
    SemiImplicitEuler,
}

#[derive(Debug, Args)]
pub struct RobotArgs {
    /// snake, cartpole, franka, or a path to a description document.
    #[arg(long, default_value = "snake")]
    pub robot: String,
    /// Number of links of the snake.
    #[arg(long)]
    pub dof: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[arg(value_enum)]
    pub quantity: ComputeQuantity,
    #[command(flatten)]
    pub robot: RobotArgs,
    /// Joint positions, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub q: String,
    /// Joint rates, comma separated (Coriolis only).
    #[arg(long, allow_hyphen_values = true)]
    pub qdot: Option<String>,
    /// Body (1-based) carrying the Jacobian or FK point.
    #[arg(long)]
    pub body_id: Option<usize>,
    /// Offset of the point from the body's COM frame, "x,y,z".
    #[arg(long, allow_hyphen_values = true)]
    pub offset: Option<String>,
    #[arg(long, value_enum, default_value = "poe")]
    pub method: MethodArg,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Comma-separated quantities, or "all".
    #[arg(long, default_value = "all")]
    pub quantity: String,
    #[arg(long, default_value = "poe,dh")]
    pub methods: String,
    /// "start:end:step", "start:end" or a comma-separated list.
    #[arg(long, default_value = "2:64:2")]
    pub dof: String,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 10)]
    pub warmup: usize,
    #[arg(long, default_value = "-")]
    pub out: String,
    #[arg(long)]
    pub svg: Option<String>,
    /// Also write least-squares scaling fits as CSV.
    #[arg(long)]
    pub fit: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Gravity-compensated end-effector impedance control.
    Impedance(ImpedanceArgs),
}

#[derive(Debug, Args)]
pub struct ImpedanceArgs {
    #[command(flatten)]
    pub robot: RobotArgs,
    #[arg(long, default_value_t = 10.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Isotropic stiffness, N/m.
    #[arg(long, default_value_t = 100.0)]
    pub stiffness: f64,
    /// Isotropic damping, N s/m.
    #[arg(long, default_value_t = 20.0)]
    pub damping: f64,
    /// "cx,cy,cz,r,period"; without it the initial end-effector position is held.
    #[arg(long, allow_hyphen_values = true)]
    pub circle: Option<String>,
    /// Initial joint positions (default 0.3 for every joint).
    #[arg(long, allow_hyphen_values = true)]
    pub q0: Option<String>,
    /// "body,ox,oy,oz": hold this point at its initial position too.
    #[arg(long, allow_hyphen_values = true)]
    pub elbow: Option<String>,
    #[arg(long, value_enum, default_value = "rk4")]
    pub integrator: IntegratorArg,
    #[arg(long, default_value_t = 1)]
    pub record_stride: usize,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub robot: RobotArgs,
    #[arg(long, default_value = "-")]
    pub out: String,
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compute(args) => compute(&args),
        Command::Benchmark(args) => benchmark(&args),
        Command::Simulate(SimulateCommand::Impedance(args)) => impedance(&args),
        Command::Export(args) => {
            let model = resolve_robot(&args.robot, None)?;
            write_out(&args.out, &save_robot(&model))
        }
    }
}

fn write_out(path: &str, text: &str) -> Result<(), CliError> {
    if path == "-" {
        print!("{text}");
        Ok(())
    } else {
        fs::write(path, text).map_err(|e| CliError::Runtime(format!("writing {path}: {e}")))
    }
}

const DEFAULT_SNAKE_DOF: usize = 2;

/// Built-in robot by name, or a description document by path. `implied_dof`
/// sizes the snake when `--dof` is absent.
fn resolve_robot(args: &RobotArgs, implied_dof: Option<usize>) -> Result<RobotModel, CliError> {
    if args.dof.is_some() && args.robot != "snake" {
        return Err(invalid("--dof only applies to --robot snake"));
    }
    Ok(match args.robot.as_str() {
        "snake" => make_snake(args.dof.or(implied_dof).unwrap_or(DEFAULT_SNAKE_DOF), 1.0, 1.0)?,
        "cartpole" => make_cartpole(1.0, 1.0, 1.0)?,
        "franka" => make_franka(),
        path => load_robot_file(path)?,
    })
}

fn vector_arg(name: &str, text: &str, len: usize) -> Result<DVector<f64>, CliError> {
    let values = parse_list(text).map_err(|e| invalid(format!("--{name}: {e}")))?;
    if values.len() != len {
        return Err(invalid(format!(
            "--{name}: expected {len} values, got {}",
            values.len()
        )));
    }
    Ok(DVector::from_vec(values))
}

fn vec3_arg(name: &str, text: &str) -> Result<Vector3<f64>, CliError> {
    let v = vector_arg(name, text, 3)?;
    Ok(Vector3::new(v[0], v[1], v[2]))
}

fn compute(args: &ComputeArgs) -> Result<(), CliError> {
    let q_len = parse_list(&args.q)
        .map_err(|e| invalid(format!("--q: {e}")))?
        .len();
    let model = resolve_robot(&args.robot, Some(q_len))?;
    let n = model.dof();
    let q = vector_arg("q", &args.q, n)?;
    let qdot = match (&args.qdot, args.quantity) {
        (Some(text), _) => Some(vector_arg("qdot", text, n)?),
        (None, ComputeQuantity::Coriolis) => return Err(invalid("coriolis needs --qdot")),
        (None, _) => None,
    };
    let offset = args
        .offset
        .as_deref()
        .map(|t| vec3_arg("offset", t))
        .transpose()?;
    if offset.is_some() && args.body_id.is_none() {
        return Err(invalid("--offset needs --body-id"));
    }
    let point = Point::from_query(n, args.body_id, offset.unwrap_or_else(Vector3::zeros));
    if let Point::OnBody { body, .. } = point {
        if body == 0 || body > n {
            return Err(invalid(format!("--body-id must be in 1..={n}, got {body}")));
        }
    }

    let text = match args.method {
        MethodArg::Poe => match args.quantity {
            ComputeQuantity::Fk => transform_rows(&forward_kinematics(&model, &q, point)?.to_matrix()),
            ComputeQuantity::Jacobian => {
                let j = hybrid_jacobian(&model, &q, point)?.matrix;
                matrix_rows(&nalgebra::DMatrix::from_fn(6, n, |r, c| j[(r, c)]))
            }
            ComputeQuantity::Mass => matrix_rows(&mass_matrix(&model, &q)?),
            ComputeQuantity::Gravity => vector_line(&gravity_vector(&model, &q)?),
            ComputeQuantity::Coriolis => matrix_rows(&coriolis_matrix(&model, &q, qdot.as_ref().unwrap())?),
        },
        MethodArg::Dh => {
            if args.robot.robot != "snake" {
                return Err(invalid("--method dh is only available for --robot snake"));
            }
            if point != Point::EndEffector {
                return Err(invalid("--method dh evaluates the end-effector only"));
            }
            let dh = snake_to_dh(n, 1.0, 1.0)?;
            match args.quantity {
                ComputeQuantity::Fk => transform_rows(&dh_forward_kinematics(&dh, &q)?.to_matrix()),
                ComputeQuantity::Jacobian => {
                    let j = dh_hybrid_jacobian(&dh, &q)?.matrix;
                    matrix_rows(&nalgebra::DMatrix::from_fn(6, n, |r, c| j[(r, c)]))
                }
                ComputeQuantity::Mass => matrix_rows(&dh_mass_matrix(&dh, &q)?),
                ComputeQuantity::Gravity => vector_line(&dh_gravity_vector(&dh, &q)?),
                ComputeQuantity::Coriolis => {
                    matrix_rows(&dh_coriolis_matrix(&dh, &q, qdot.as_ref().unwrap())?)
                }
            }
        }
    };
    write_out(&args.out, &text)
}

/// `"2:64:2"`, `"2:8"` or `"2,4,8"`.
pub fn parse_dof_range(text: &str) -> Result<Vec<usize>, String> {
    let int = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("`{s}` is not a non-negative integer"))
    };
    let dofs = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let (start, end, step) = match parts.as_slice() {
            [a, b] => (int(a)?, int(b)?, 1),
            [a, b, s] => (int(a)?, int(b)?, int(s)?),
            _ => return Err(format!("`{text}`: expected start:end[:step]")),
        };
        if step == 0 {
            return Err("step must be positive".into());
        }
        (start..=end).step_by(step).collect()
    } else {
        text.split(',').map(int).collect::<Result<Vec<_>, _>>()?
    };
    if dofs.is_empty() {
        return Err(format!("`{text}` selects no dof values"));
    }
    if dofs.contains(&0) {
        return Err("dof must be at least 1".into());
    }
    Ok(dofs)
}

fn benchmark(args: &BenchmarkArgs) -> Result<(), CliError> {
    let quantities: Vec<Quantity> = if args.quantity.trim() == "all" {
        Quantity::ALL.to_vec()
    } else {
        args.quantity
            .split(',')
            .map(str::parse)
            .collect::<Result<_, _>>()?
    };
    let methods: Vec<Method> = args
        .methods
        .split(',')
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    let dofs = parse_dof_range(&args.dof).map_err(|e| invalid(format!("--dof: {e}")))?;
    let mut results: Vec<BenchResult> = Vec::new();
    for &quantity in &quantities {
        for &method in &methods {
            results.extend(bench::run_benchmark(
                quantity,
                method,
                &dofs,
                args.reps,
                args.warmup,
            )?);
        }
    }
    write_out(&args.out, &bench::emit_csv(&results))?;
    if let Some(path) = &args.svg {
        write_out(path, &svg::line_chart(&results))?;
    }
    if let Some(path) = &args.fit {
        write_out(path, &bench::fits_csv(&bench::emit_scaling_fit(&results)?))?;
    }
    Ok(())
}

fn impedance(args: &ImpedanceArgs) -> Result<(), CliError> {
    let model = resolve_robot(&args.robot, None)?;
    let n = model.dof();
    let q0 = match &args.q0 {
        Some(text) => vector_arg("q0", text, n)?,
        None => DVector::from_element(n, 0.3),
    };
    for (name, value) in [("stiffness", args.stiffness), ("damping", args.damping)] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(invalid(format!("--{name} must be non-negative")));
        }
    }
    let k = Matrix3::identity() * args.stiffness;
    let b = Matrix3::identity() * args.damping;
    let home = forward_kinematics(&model, &q0, Point::EndEffector)?.translation;
    let circle = match &args.circle {
        Some(text) => {
            let c = vector_arg("circle", text, 5)?;
            let center = Vector3::new(c[0], c[1], c[2]);
            circular_target(&center, c[3], c[4], 0.0).map_err(|e| invalid(format!("--circle: {e}")))?;
            Some((center, c[3], c[4]))
        }
        None => None,
    };
    let elbow = match &args.elbow {
        Some(text) => {
            let e = parse_list(text).map_err(|e| invalid(format!("--elbow: {e}")))?;
            let body = match e.as_slice() {
                [body, _, _, _] if body.fract() == 0.0 && *body >= 1.0 && *body <= n as f64 => *body as usize,
                _ => {
                    return Err(invalid(format!(
                        "--elbow: expected \"body,ox,oy,oz\" with body in 1..={n}"
                    )))
                }
            };
            let point = Point::OnBody {
                body,
                offset: Vector3::new(e[1], e[2], e[3]),
            };
            Some(PointTask {
                point,
                target: forward_kinematics(&model, &q0, point)?.translation,
                stiffness: k,
                damping: b,
            })
        }
        None => None,
    };
    let config = SimConfig {
        dt: args.dt,
        duration: args.duration,
        integrator: match args.integrator {
            IntegratorArg::Rk4 => Integrator::Rk4,
            IntegratorArg::SemiImplicitEuler => Integrator::SemiImplicitEuler,
        },
        record_stride: args.record_stride,
    };
    config.validate()?;
    let controller = |t: f64, q: &DVector<f64>, qd: &DVector<f64>| {
        let target = match circle {
            Some((center, r, period)) => circular_target(&center, r, period, t)?,
            None => home,
        };
        impedance_torque(&model, q, qd, &target, &k, &b, elbow.as_ref())
    };
    let traj = simulate(&model, controller, &q0, &DVector::zeros(n), &config)?;
    let mut buf = Vec::new();
    trajectory::write_csv(&traj, &mut buf).expect("writing to memory");
    write_out(&args.out, &String::from_utf8(buf).expect("ASCII output"))
}
