//! Derivative-overhead benchmarking for the `ad` library.
//!
//! The headline number is omega_r: the wall-time ratio of one
//! reverse-mode gradient to one primal evaluation of the Helmholtz
//! energy function. The cheap gradient principle says this ratio is a
//! small constant independent of the input dimension. [`bench`] measures
//! it (and the analogous factor for every other API operation) and
//! reports CSV; [`helmholtz`] provides the seeded test instances.

pub mod bench;
pub mod helmholtz;

pub use bench::{
    clock_granularity, measure_overhead, run_suite, write_csv, BenchmarkRecord, Op, SuiteConfig,
    CSV_HEADER,
};
pub use helmholtz::{helmholtz_energy, HelmholtzInstance};
