//! The Helmholtz energy test function.
//!
//! A standard scalar benchmark combining per-coordinate log barriers
//! with a quadratic form:
//!
//! f(x) = sum_i x_i log(x_i / (1 - b'x))
//!        - (x'Ax) / (sqrt(8) b'x) * log[(1 + (1+sqrt2) b'x) / (1 + (1-sqrt2) b'x)]
//!
//! Instances are generated reproducibly from a seed with guaranteed
//! feasibility: A = Q'Q/n with Q uniform(0,1), b uniform(0.1, 1), and x
//! scaled so that b'x = 0.5 with every x_i > 0.

use ad::{ADMatrix, ADVector, Scalar};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One feasible problem instance.
#[derive(Clone, Debug)]
pub struct HelmholtzInstance {
    pub n: usize,
    /// Row-major symmetric n x n matrix.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub x: Vec<f64>,
}

impl HelmholtzInstance {
    pub fn generate(n: usize, seed: u64) -> HelmholtzInstance {
        assert!(n >= 1, "instance dimension must be at least 1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.0;
                for k in 0..n {
                    s += q[k * n + i] * q[k * n + j];
                }
                s /= n as f64;
                a[i * n + j] = s;
                a[j * n + i] = s;
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let btu: f64 = b.iter().zip(&u).map(|(bi, ui)| bi * ui).sum();
        let s = 0.5 / btu;
        let x: Vec<f64> = u.iter().map(|ui| s * ui).collect();
        let inst = HelmholtzInstance { n, a, b, x };
        inst.check();
        inst
    }

    /// Feasibility and symmetry invariants.
    pub fn check(&self) {
        assert_eq!(self.a.len(), self.n * self.n);
        assert_eq!(self.b.len(), self.n);
        assert_eq!(self.x.len(), self.n);
        assert!(self.x.iter().all(|&v| v > 0.0), "x must be positive");
        assert!(self.b.iter().all(|&v| v > 0.0), "b must be positive");
        let btx: f64 = self.b.iter().zip(&self.x).map(|(b, x)| b * x).sum();
        assert!(btx < 1.0, "b'x = {btx} must be below 1");
        for i in 0..self.n {
            for j in 0..i {
                let d = (self.a[i * self.n + j] - self.a[j * self.n + i]).abs();
                assert!(d <= 1e-12, "A not symmetric at ({i},{j}): {d}");
            }
        }
    }

    /// The energy as a lifted function of x, differentiable in either mode.
    pub fn energy(&self) -> impl Fn(&ADVector) -> Scalar + '_ {
        let a = ADMatrix::new(
            self.n,
            self.n,
            self.a.iter().map(|&v| Scalar::Constant(v)).collect(),
        );
        let b = ADVector::from_f64s(&self.b);
        move |x: &ADVector| helmholtz_energy(&a, &b, x)
    }

    pub fn point(&self) -> ADVector {
        ADVector::from_f64s(&self.x)
    }
}

pub fn helmholtz_energy(a: &ADMatrix, b: &ADVector, x: &ADVector) -> Scalar {
    let sqrt2 = std::f64::consts::SQRT_2;
    let btx = b.dot(x);
    let barrier: Scalar = x
        .iter()
        .map(|xi| xi * (xi / (1.0 - &btx)).ln())
        .sum();
    let quad = x.dot(&a.matvec(x));
    let ratio = (1.0 + (1.0 + sqrt2) * &btx) / (1.0 + (1.0 - sqrt2) * &btx);
    barrier - quad / (8.0f64.sqrt() * &btx) * ratio.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ad::diff::grad;
    use ad::numdiff::ngrad;

    #[test]
    fn quadratic_term_vanishes_with_zero_matrix() {
        let inst = HelmholtzInstance {
            n: 1,
            a: vec![0.0],
            b: vec![1.0],
            x: vec![0.5],
        };
        inst.check();
        let f = inst.energy();
        // 0.5 * log(0.5 / 0.5) = 0
        assert_eq!(f(&inst.point()).value(), 0.0);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let inst = HelmholtzInstance::generate(17, 42);
        let f = inst.energy();
        let a = f(&inst.point()).value();
        let b = f(&inst.point()).value();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn generation_is_reproducible() {
        let a = HelmholtzInstance::generate(9, 7);
        let b = HelmholtzInstance::generate(9, 7);
        assert_eq!(a.a, b.a);
        assert_eq!(a.b, b.b);
        assert_eq!(a.x, b.x);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let inst = HelmholtzInstance::generate(8, 123);
        let f = inst.energy();
        let g = grad(&f, &inst.x);
        let ng = ngrad(
            |x: &[f64]| f(&ADVector::from_f64s(x)).value(),
            &inst.x,
        );
        for (a, b) in g.iter().zip(&ng) {
            let rel = (a - b).abs() / a.abs().max(1.0);
            assert!(rel <= 1e-5, "grad {a} vs ngrad {b} (rel {rel})");
        }
    }

    #[test]
    fn infeasible_point_yields_nan_not_panic() {
        let inst = HelmholtzInstance::generate(3, 1);
        let f = inst.energy();
        let bad = ADVector::from_f64s(&[-1.0, 1.0, 1.0]);
        assert!(f(&bad).value().is_nan());
    }
}
