//! Overhead measurement: how much more a derivative costs than the
//! function it differentiates.
//!
//! Each record compares the median wall time of a primal evaluation
//! against the median wall time of one derivative evaluation at the same
//! seeded feasible point, reporting the ratio omega. A warm-up run of
//! each side is discarded. Records whose primal time is too close to the
//! clock granularity are flagged unreliable instead of silently reported.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ad::diff;
use ad::{ADVector, Scalar};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::helmholtz::HelmholtzInstance;

/// The operations the suite can measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Primal,
    Diff,
    Diff2,
    Diffn,
    Grad,
    Gradv,
    Hessian,
    Hessianv,
    Gradhessian,
    Gradhessianv,
    Laplacian,
    Jacobian,
    JacobianT,
    Jacobianv,
    JacobianTv,
    Curl,
    Div,
    Curldiv,
}

impl Op {
    pub const ALL: [Op; 18] = [
        Op::Primal,
        Op::Diff,
        Op::Diff2,
        Op::Diffn,
        Op::Grad,
        Op::Gradv,
        Op::Hessian,
        Op::Hessianv,
        Op::Gradhessian,
        Op::Gradhessianv,
        Op::Laplacian,
        Op::Jacobian,
        Op::JacobianT,
        Op::Jacobianv,
        Op::JacobianTv,
        Op::Curl,
        Op::Div,
        Op::Curldiv,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Op::Primal => "primal",
            Op::Diff => "diff",
            Op::Diff2 => "diff2",
            Op::Diffn => "diffn",
            Op::Grad => "grad",
            Op::Gradv => "gradv",
            Op::Hessian => "hessian",
            Op::Hessianv => "hessianv",
            Op::Gradhessian => "gradhessian",
            Op::Gradhessianv => "gradhessianv",
            Op::Laplacian => "laplacian",
            Op::Jacobian => "jacobian",
            Op::JacobianT => "jacobianT",
            Op::Jacobianv => "jacobianv",
            Op::JacobianTv => "jacobianTv",
            Op::Curl => "curl",
            Op::Div => "div",
            Op::Curldiv => "curldiv",
        }
    }

    /// Fields over R^3 only.
    pub fn fixed_dimension(&self) -> Option<usize> {
        match self {
            Op::Curl | Op::Curldiv => Some(3),
            _ => None,
        }
    }
}

impl FromStr for Op {
    type Err = String;

    fn from_str(s: &str) -> Result<Op, String> {
        Op::ALL
            .iter()
            .find(|op| op.name() == s)
            .copied()
            .ok_or_else(|| {
                let names: Vec<_> = Op::ALL.iter().map(|o| o.name()).collect();
                format!("unknown operation '{s}'; valid names: {}", names.join(", "))
            })
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One overhead measurement.
#[derive(Clone, Debug)]
pub struct BenchmarkRecord {
    pub operation: String,
    pub n: usize,
    pub repetitions: usize,
    /// Median primal evaluation time, seconds.
    pub t_primal: f64,
    /// Median derivative evaluation time, seconds.
    pub t_deriv: f64,
    /// t_deriv / t_primal.
    pub omega: f64,
    /// False when the primal time is within 100x of the clock granularity.
    pub reliable: bool,
}

impl BenchmarkRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.9e},{:.9e},{:.6},{}",
            self.operation,
            self.n,
            self.repetitions,
            self.t_primal,
            self.t_deriv,
            self.omega,
            self.reliable
        )
    }
}

pub const CSV_HEADER: &str = "operation,n,repetitions,t_primal_s,t_deriv_s,omega,reliable";

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

/// Smallest positive interval the monotonic clock resolves.
pub fn clock_granularity() -> f64 {
    let mut g = f64::INFINITY;
    for _ in 0..64 {
        let t0 = Instant::now();
        let mut d = t0.elapsed();
        while d.is_zero() {
            d = t0.elapsed();
        }
        g = g.min(d.as_secs_f64());
    }
    g
}

fn time_median(reps: usize, mut body: impl FnMut()) -> f64 {
    body(); // warm-up, discarded
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t0 = Instant::now();
        body();
        times.push(t0.elapsed().as_secs_f64());
    }
    median(times)
}

// Keep optimizers from discarding the measured computation.
fn sink(v: f64) {
    std::hint::black_box(v);
}

/// A scalar composite for the R -> R rows; the argument is seeded away
/// from the function's singular points.
fn scalar_probe(t: &Scalar) -> Scalar {
    (t * (t * t).sin() + (t / 2.0).exp()).ln()
}

/// R^n -> R^n field built from the same barrier pieces as the energy.
fn vector_field<'a>(b: &'a ADVector) -> impl Fn(&ADVector) -> ADVector + 'a {
    move |x: &ADVector| {
        let btx = b.dot(x);
        x.map(|xi| xi * (xi / (1.0 - &btx)).ln())
    }
}

/// Measures one (operation, dimension) cell at a fixed seeded feasible
/// point. Panics if `reps < 3` or `n < 1`.
pub fn measure_overhead(op: Op, n: usize, reps: usize, seed: u64) -> BenchmarkRecord {
    assert!(reps >= 3, "need at least 3 repetitions, got {reps}");
    assert!(n >= 1, "need dimension at least 1, got {n}");
    let n = op.fixed_dimension().unwrap_or(n);

    // One deterministic instance per (seed, n).
    let inst = HelmholtzInstance::generate(n, seed ^ (n as u64).wrapping_mul(0x9e3779b97f4a7c15));
    let f = inst.energy();
    let x = inst.point();
    let xs = inst.x.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b = ADVector::from_f64s(&inst.b);
    let field = vector_field(&b);

    let scalar_point = 1.3_f64;

    let t_primal = match op {
        Op::Diff | Op::Diff2 | Op::Diffn => time_median(reps, || {
            sink(scalar_probe(&Scalar::Constant(scalar_point)).value())
        }),
        Op::Jacobian | Op::JacobianT | Op::Jacobianv | Op::JacobianTv | Op::Div | Op::Curl
        | Op::Curldiv => time_median(reps, || {
            sink(field(&x).values().iter().sum());
        }),
        _ => time_median(reps, || sink(f(&x).value())),
    };

    let t_deriv = match op {
        Op::Primal => time_median(reps, || sink(f(&x).value())),
        Op::Diff => time_median(reps, || sink(diff::diff(scalar_probe, scalar_point))),
        Op::Diff2 => time_median(reps, || sink(diff::diff2(scalar_probe, scalar_point))),
        Op::Diffn => time_median(reps, || sink(diff::diffn(3, scalar_probe, scalar_point))),
        Op::Grad => time_median(reps, || sink(diff::grad(&f, &xs)[0])),
        Op::Gradv => time_median(reps, || sink(diff::gradv(&f, &xs, &v))),
        Op::Hessian => time_median(reps, || sink(diff::hessian(&f, &xs)[0][0])),
        Op::Hessianv => time_median(reps, || sink(diff::hessianv(&f, &xs, &v)[0])),
        Op::Gradhessian => time_median(reps, || sink(diff::gradhessian(&f, &xs).0[0])),
        Op::Gradhessianv => time_median(reps, || sink(diff::gradhessianv(&f, &xs, &v).0)),
        Op::Laplacian => time_median(reps, || sink(diff::laplacian(&f, &xs))),
        Op::Jacobian => time_median(reps, || sink(diff::jacobian(&field, &xs)[0][0])),
        Op::JacobianT => time_median(reps, || sink(diff::jacobian_t(&field, &xs)[0][0])),
        Op::Jacobianv => time_median(reps, || sink(diff::jacobianv(&field, &xs, &v)[0])),
        Op::JacobianTv => time_median(reps, || sink(diff::jacobian_tv(&field, &xs, &v)[0])),
        Op::Curl => time_median(reps, || sink(diff::curl(&field, &xs)[0])),
        Op::Div => time_median(reps, || sink(diff::div(&field, &xs))),
        Op::Curldiv => time_median(reps, || sink(diff::curldiv(&field, &xs).1)),
    };

    // Validate the point actually evaluates to a finite value.
    assert!(
        f(&x).value().is_finite(),
        "generated instance evaluated to a non-finite value"
    );

    let reliable = t_primal >= 100.0 * clock_granularity();
    BenchmarkRecord {
        operation: op.name().to_string(),
        n,
        repetitions: reps,
        t_primal,
        t_deriv,
        omega: t_deriv / t_primal,
        reliable,
    }
}

/// Suite configuration, one record per (op, n) pair.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub ops: Vec<Op>,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub parallel: bool,
}

pub fn run_suite(cfg: &SuiteConfig) -> Vec<BenchmarkRecord> {
    let cells: Vec<(Op, usize)> = cfg
        .ops
        .iter()
        .flat_map(|&op| cfg.sizes.iter().map(move |&n| (op, n)))
        .collect();
    if cfg.parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = cells
                .iter()
                .map(|&(op, n)| scope.spawn(move || measure_overhead(op, n, cfg.reps, cfg.seed)))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    } else {
        cells
            .iter()
            .map(|&(op, n)| measure_overhead(op, n, cfg.reps, cfg.seed))
            .collect()
    }
}

pub fn write_csv(records: &[BenchmarkRecord], out: &mut impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}
