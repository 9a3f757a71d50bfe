//! The functional differentiation API.
//!
//! Every operation comes in two layers:
//!
//! * plain entry points in this module take and return `f64` data and
//!   create and dispose their tags internally;
//! * the [`lifted`] module exposes the same operations over [`Scalar`]
//!   and [`ADVector`], so the API composes with itself — nesting a
//!   lifted call inside a differentiated function is the supported way
//!   to build higher-order and hyperparameter derivatives.
//!
//! Primed variants (`*_p`, and `*_pp` for doubly primed) additionally
//! return the primal value(s), always from the same evaluation as the
//! derivative, never from a second pass.
//!
//! Mode composition per operation: `diff`/`gradv`/`jacobianv`/`curl`/
//! `div` are forward; `grad`/`jacobian_tv` are reverse; `hessianv` is
//! reverse-on-forward; `hessian`/`laplacian` are forward-on-reverse;
//! `jacobian` picks forward when `n <= m` and reverse otherwise.

use crate::linalg::{ADMatrix, ADVector};
use crate::scalar::Scalar;

/// Operations over lifted values, usable inside other differentiations.
pub mod lifted {
    use super::*;
    use crate::tag::fresh_tag;
    use crate::trace::Trace;

    // ----- scalar-to-scalar -------------------------------------------

    pub fn diff_p(f: impl Fn(&Scalar) -> Scalar, x: &Scalar) -> (Scalar, Scalar) {
        let t = fresh_tag();
        let y = f(&Scalar::dual(x.clone(), Scalar::ONE, t));
        (y.primal_for(t), y.tangent_for(t))
    }

    pub fn diff(f: impl Fn(&Scalar) -> Scalar, x: &Scalar) -> Scalar {
        diff_p(f, x).1
    }

    pub fn diff2_pp(f: impl Fn(&Scalar) -> Scalar, x: &Scalar) -> (Scalar, Scalar, Scalar) {
        let t = fresh_tag();
        let xd = Scalar::dual(x.clone(), Scalar::ONE, t);
        let (fx, dfx) = diff_p(&f, &xd);
        (fx.primal_for(t), dfx.primal_for(t), dfx.tangent_for(t))
    }

    pub fn diff2_p(f: impl Fn(&Scalar) -> Scalar, x: &Scalar) -> (Scalar, Scalar) {
        let (v, _, dd) = diff2_pp(f, x);
        (v, dd)
    }

    pub fn diff2(f: impl Fn(&Scalar) -> Scalar, x: &Scalar) -> Scalar {
        diff2_pp(f, x).2
    }

    /// `n`-th derivative by iterated forward nesting: one evaluation on
    /// an `n`-level dual tower. Cost grows as `2^n`.
    pub fn diffn_p(n: u32, f: impl Fn(&Scalar) -> Scalar, x: &Scalar) -> (Scalar, Scalar) {
        let tags: Vec<_> = (0..n).map(|_| fresh_tag()).collect();
        let mut xd = x.clone();
        for &t in &tags {
            xd = Scalar::dual(xd, Scalar::ONE, t);
        }
        let y = f(&xd);
        let mut value = y.clone();
        let mut deriv = y;
        for &t in tags.iter().rev() {
            value = value.primal_for(t);
            deriv = deriv.tangent_for(t);
        }
        (value, deriv)
    }

    pub fn diffn(n: u32, f: impl Fn(&Scalar) -> Scalar, x: &Scalar) -> Scalar {
        diffn_p(n, f, x).1
    }

    // ----- vector-to-scalar -------------------------------------------

    /// Gradient by one evaluation over reverse leaves plus one sweep.
    pub fn grad_p(f: impl Fn(&ADVector) -> Scalar, x: &ADVector) -> (Scalar, ADVector) {
        let trace = Trace::new(fresh_tag());
        let leaves: ADVector = x.iter().map(|v| trace.leaf(v.clone())).collect();
        let y = f(&leaves);
        let adj = trace.sweep(&y, Scalar::ONE);
        let g = leaves.iter().map(|l| adj.adjoint(l)).collect();
        (y.primal_for(trace.tag()), g)
    }

    pub fn grad(f: impl Fn(&ADVector) -> Scalar, x: &ADVector) -> ADVector {
        grad_p(f, x).1
    }

    /// Directional derivative by one dual pass seeded with `v`; the
    /// gradient is never materialized.
    pub fn gradv_p(
        f: impl Fn(&ADVector) -> Scalar,
        x: &ADVector,
        v: &ADVector,
    ) -> (Scalar, Scalar) {
        check_len("gradv", x.len(), v.len());
        let t = fresh_tag();
        let xd: ADVector = x
            .iter()
            .zip(v.iter())
            .map(|(xi, vi)| Scalar::dual(xi.clone(), vi.clone(), t))
            .collect();
        let y = f(&xd);
        (y.primal_for(t), y.tangent_for(t))
    }

    pub fn gradv(f: impl Fn(&ADVector) -> Scalar, x: &ADVector, v: &ADVector) -> Scalar {
        gradv_p(f, x, v).1
    }

    /// Forward-on-reverse: column `i` of the Hessian is the forward
    /// directional derivative (direction `e_i`) of the reverse gradient.
    pub fn gradhessian_p(
        f: impl Fn(&ADVector) -> Scalar,
        x: &ADVector,
    ) -> (Scalar, ADVector, ADMatrix) {
        let n = x.len();
        if n == 0 {
            return (f(x), ADVector::zeros(0), ADMatrix::zeros(0, 0));
        }
        let mut value = Scalar::ZERO;
        let mut grad_out = ADVector::zeros(n);
        let mut h = ADMatrix::zeros(n, n);
        for i in 0..n {
            let t = fresh_tag();
            let xd: ADVector = x
                .iter()
                .enumerate()
                .map(|(j, xj)| {
                    let seed = if i == j { Scalar::ONE } else { Scalar::ZERO };
                    Scalar::dual(xj.clone(), seed, t)
                })
                .collect();
            let (val, g) = grad_p(&f, &xd);
            for j in 0..n {
                h[(j, i)] = g[j].tangent_for(t);
            }
            if i == 0 {
                value = val.primal_for(t);
                grad_out = g.map(|gj| gj.primal_for(t));
            }
        }
        (value, grad_out, h)
    }

    pub fn gradhessian(f: impl Fn(&ADVector) -> Scalar, x: &ADVector) -> (ADVector, ADMatrix) {
        let (_, g, h) = gradhessian_p(f, x);
        (g, h)
    }

    pub fn hessian_p(f: impl Fn(&ADVector) -> Scalar, x: &ADVector) -> (Scalar, ADMatrix) {
        let (v, _, h) = gradhessian_p(f, x);
        (v, h)
    }

    pub fn hessian(f: impl Fn(&ADVector) -> Scalar, x: &ADVector) -> ADMatrix {
        gradhessian_p(f, x).2
    }

    /// Reverse-on-forward: one reverse sweep over the forward directional
    /// evaluation yields `H v` at gradient-like cost, independent of `n`.
    pub fn gradhessianv_p(
        f: impl Fn(&ADVector) -> Scalar,
        x: &ADVector,
        v: &ADVector,
    ) -> (Scalar, Scalar, ADVector) {
        check_len("hessianv", x.len(), v.len());
        let trace = Trace::new(fresh_tag());
        let leaves: ADVector = x.iter().map(|xi| trace.leaf(xi.clone())).collect();
        let t = fresh_tag();
        let xd: ADVector = leaves
            .iter()
            .zip(v.iter())
            .map(|(li, vi)| Scalar::dual(li.clone(), vi.clone(), t))
            .collect();
        let y = f(&xd);
        let dir = y.tangent_for(t);
        let adj = trace.sweep(&dir, Scalar::ONE);
        let hv = leaves.iter().map(|l| adj.adjoint(l)).collect();
        let tag_r = trace.tag();
        (
            y.primal_for(t).primal_for(tag_r),
            dir.primal_for(tag_r),
            hv,
        )
    }

    pub fn gradhessianv(
        f: impl Fn(&ADVector) -> Scalar,
        x: &ADVector,
        v: &ADVector,
    ) -> (Scalar, ADVector) {
        let (_, gv, hv) = gradhessianv_p(f, x, v);
        (gv, hv)
    }

    pub fn hessianv_p(
        f: impl Fn(&ADVector) -> Scalar,
        x: &ADVector,
        v: &ADVector,
    ) -> (Scalar, ADVector) {
        let (val, _, hv) = gradhessianv_p(f, x, v);
        (val, hv)
    }

    pub fn hessianv(f: impl Fn(&ADVector) -> Scalar, x: &ADVector, v: &ADVector) -> ADVector {
        gradhessianv_p(f, x, v).2
    }

    /// Trace of the Hessian via `n` Hessian-vector evaluations along the
    /// coordinate directions; the Hessian is never materialized.
    pub fn laplacian_p(f: impl Fn(&ADVector) -> Scalar, x: &ADVector) -> (Scalar, Scalar) {
        let n = x.len();
        if n == 0 {
            return (f(x), Scalar::ZERO);
        }
        let mut value = Scalar::ZERO;
        let mut acc = Scalar::ZERO;
        for i in 0..n {
            let t = fresh_tag();
            let xd: ADVector = x
                .iter()
                .enumerate()
                .map(|(j, xj)| {
                    let seed = if i == j { Scalar::ONE } else { Scalar::ZERO };
                    Scalar::dual(xj.clone(), seed, t)
                })
                .collect();
            let (val, g) = grad_p(&f, &xd);
            acc = acc + g[i].tangent_for(t);
            if i == 0 {
                value = val.primal_for(t);
            }
        }
        (value, acc)
    }

    pub fn laplacian(f: impl Fn(&ADVector) -> Scalar, x: &ADVector) -> Scalar {
        laplacian_p(f, x).1
    }

    // ----- vector-to-vector -------------------------------------------

    /// Jacobian built column-by-column with `n` forward passes.
    pub fn jacobian_fwd_p(
        f: impl Fn(&ADVector) -> ADVector,
        x: &ADVector,
    ) -> (ADVector, ADMatrix) {
        let n = x.len();
        if n == 0 {
            let y = f(x);
            let m = y.len();
            return (y, ADMatrix::zeros(m, 0));
        }
        let mut value = ADVector::zeros(0);
        let mut cols: Vec<ADVector> = Vec::with_capacity(n);
        let mut m = 0;
        for i in 0..n {
            let t = fresh_tag();
            let xd: ADVector = x
                .iter()
                .enumerate()
                .map(|(j, xj)| {
                    let seed = if i == j { Scalar::ONE } else { Scalar::ZERO };
                    Scalar::dual(xj.clone(), seed, t)
                })
                .collect();
            let y = f(&xd);
            if i == 0 {
                m = y.len();
                value = y.iter().map(|yi| yi.primal_for(t)).collect();
            } else if y.len() != m {
                panic!("jacobian: f output length changed ({m} vs {})", y.len());
            }
            cols.push(y.iter().map(|yi| yi.tangent_for(t)).collect());
        }
        let mut jac = ADMatrix::zeros(m, n);
        for (i, col) in cols.iter().enumerate() {
            for j in 0..m {
                jac[(j, i)] = col[j].clone();
            }
        }
        (value, jac)
    }

    /// Jacobian built row-by-row: one recorded evaluation, `m` sweeps.
    pub fn jacobian_rev_p(
        f: impl Fn(&ADVector) -> ADVector,
        x: &ADVector,
    ) -> (ADVector, ADMatrix) {
        let trace = Trace::new(fresh_tag());
        let leaves: ADVector = x.iter().map(|v| trace.leaf(v.clone())).collect();
        let y = f(&leaves);
        let (m, n) = (y.len(), x.len());
        let value: ADVector = y.iter().map(|yi| yi.primal_for(trace.tag())).collect();
        let mut jac = ADMatrix::zeros(m, n);
        for j in 0..m {
            let adj = trace.sweep(&y[j], Scalar::ONE);
            for i in 0..n {
                jac[(j, i)] = adj.adjoint(&leaves[i]);
            }
        }
        (value, jac)
    }

    pub fn jacobian_fwd(f: impl Fn(&ADVector) -> ADVector, x: &ADVector) -> ADMatrix {
        jacobian_fwd_p(f, x).1
    }

    pub fn jacobian_rev(f: impl Fn(&ADVector) -> ADVector, x: &ADVector) -> ADMatrix {
        jacobian_rev_p(f, x).1
    }

    /// Forward mode when `n <= m`, reverse mode when `n > m`. The output
    /// length `m` is discovered from one recorded evaluation whose primal
    /// is reused as the value component either way.
    pub fn jacobian_p(f: impl Fn(&ADVector) -> ADVector, x: &ADVector) -> (ADVector, ADMatrix) {
        let n = x.len();
        let trace = Trace::new(fresh_tag());
        let leaves: ADVector = x.iter().map(|v| trace.leaf(v.clone())).collect();
        let y = f(&leaves);
        let m = y.len();
        let value: ADVector = y.iter().map(|yi| yi.primal_for(trace.tag())).collect();
        if n > m {
            let mut jac = ADMatrix::zeros(m, n);
            for j in 0..m {
                let adj = trace.sweep(&y[j], Scalar::ONE);
                for i in 0..n {
                    jac[(j, i)] = adj.adjoint(&leaves[i]);
                }
            }
            (value, jac)
        } else {
            let (v2, jac) = jacobian_fwd_p(f, x);
            if v2.len() != m {
                panic!("jacobian: f output length changed ({m} vs {})", v2.len());
            }
            (value, jac)
        }
    }

    pub fn jacobian(f: impl Fn(&ADVector) -> ADVector, x: &ADVector) -> ADMatrix {
        jacobian_p(f, x).1
    }

    pub fn jacobian_t_p(f: impl Fn(&ADVector) -> ADVector, x: &ADVector) -> (ADVector, ADMatrix) {
        let (v, j) = jacobian_p(f, x);
        (v, j.transpose())
    }

    pub fn jacobian_t(f: impl Fn(&ADVector) -> ADVector, x: &ADVector) -> ADMatrix {
        jacobian_t_p(f, x).1
    }

    /// `J v` by one dual pass seeded with `v`; matrix-free.
    pub fn jacobianv_p(
        f: impl Fn(&ADVector) -> ADVector,
        x: &ADVector,
        v: &ADVector,
    ) -> (ADVector, ADVector) {
        check_len("jacobianv", x.len(), v.len());
        let t = fresh_tag();
        let xd: ADVector = x
            .iter()
            .zip(v.iter())
            .map(|(xi, vi)| Scalar::dual(xi.clone(), vi.clone(), t))
            .collect();
        let y = f(&xd);
        (
            y.iter().map(|yi| yi.primal_for(t)).collect(),
            y.iter().map(|yi| yi.tangent_for(t)).collect(),
        )
    }

    pub fn jacobianv(f: impl Fn(&ADVector) -> ADVector, x: &ADVector, v: &ADVector) -> ADVector {
        jacobianv_p(f, x, v).1
    }

    /// `J^T v` by one recorded evaluation and one sweep seeded with `v`.
    pub fn jacobian_tv_p(
        f: impl Fn(&ADVector) -> ADVector,
        x: &ADVector,
        v: &ADVector,
    ) -> (ADVector, ADVector) {
        let (value, pullback) = jacobian_tv_pp(f, x);
        (value, pullback.call(v))
    }

    pub fn jacobian_tv(f: impl Fn(&ADVector) -> ADVector, x: &ADVector, v: &ADVector) -> ADVector {
        jacobian_tv_p(f, x, v).1
    }

    /// Evaluates `f` once and returns its value together with a reusable
    /// pull-back `v -> J^T v`; invoking the pull-back never re-runs `f`.
    pub fn jacobian_tv_pp(
        f: impl Fn(&ADVector) -> ADVector,
        x: &ADVector,
    ) -> (ADVector, Pullback) {
        let trace = Trace::new(fresh_tag());
        let leaves: ADVector = x.iter().map(|v| trace.leaf(v.clone())).collect();
        let y = f(&leaves);
        let value: ADVector = y.iter().map(|yi| yi.primal_for(trace.tag())).collect();
        (
            value,
            Pullback {
                trace,
                outputs: y,
                leaves,
            },
        )
    }

    /// A captured reverse trace: calling it runs only an adjoint sweep.
    pub struct Pullback {
        trace: Trace,
        outputs: ADVector,
        leaves: ADVector,
    }

    impl Pullback {
        pub fn output_len(&self) -> usize {
            self.outputs.len()
        }

        pub fn input_len(&self) -> usize {
            self.leaves.len()
        }

        pub fn call(&self, v: &ADVector) -> ADVector {
            check_len("pullback", self.outputs.len(), v.len());
            let seeds: Vec<(Scalar, Scalar)> = self
                .outputs
                .iter()
                .zip(v.iter())
                .map(|(o, s)| (o.clone(), s.clone()))
                .collect();
            let adj = self.trace.sweep_seeded(&seeds);
            self.leaves.iter().map(|l| adj.adjoint(l)).collect()
        }
    }

    // ----- vector calculus ----------------------------------------------

    /// Shared forward Jacobian evaluation for curl and divergence.
    pub fn curldiv_p(
        f: impl Fn(&ADVector) -> ADVector,
        x: &ADVector,
    ) -> (ADVector, ADVector, Scalar) {
        assert!(x.len() == 3, "curl: needs a 3-vector, got length {}", x.len());
        let (value, j) = jacobian_fwd_p(f, x);
        assert!(
            value.len() == 3,
            "curl: field must map into R^3, got length {}",
            value.len()
        );
        let curl = ADVector::new(vec![
            &j[(2, 1)] - &j[(1, 2)],
            &j[(0, 2)] - &j[(2, 0)],
            &j[(1, 0)] - &j[(0, 1)],
        ]);
        let div = (0..3).map(|i| j[(i, i)].clone()).sum();
        (value, curl, div)
    }

    pub fn curldiv(f: impl Fn(&ADVector) -> ADVector, x: &ADVector) -> (ADVector, Scalar) {
        let (_, c, d) = curldiv_p(f, x);
        (c, d)
    }

    pub fn curl_p(f: impl Fn(&ADVector) -> ADVector, x: &ADVector) -> (ADVector, ADVector) {
        let (v, c, _) = curldiv_p(f, x);
        (v, c)
    }

    pub fn curl(f: impl Fn(&ADVector) -> ADVector, x: &ADVector) -> ADVector {
        curldiv_p(f, x).1
    }

    pub fn div_p(f: impl Fn(&ADVector) -> ADVector, x: &ADVector) -> (ADVector, Scalar) {
        let (value, j) = jacobian_fwd_p(f, x);
        assert!(
            value.len() == x.len(),
            "div: field must map R^n to R^n, got {} -> {}",
            x.len(),
            value.len()
        );
        let d = (0..x.len()).map(|i| j[(i, i)].clone()).sum();
        (value, d)
    }

    pub fn div(f: impl Fn(&ADVector) -> ADVector, x: &ADVector) -> Scalar {
        div_p(f, x).1
    }

    fn check_len(op: &str, a: usize, b: usize) {
        assert!(a == b, "{op}: lengths differ ({a} vs {b})");
    }
}

// ----- plain (f64) entry points ---------------------------------------

fn lift_x(x: &[f64]) -> ADVector {
    ADVector::from_f64s(x)
}

pub fn diff(f: impl Fn(&Scalar) -> Scalar, x: f64) -> f64 {
    lifted::diff(f, &Scalar::Constant(x)).value()
}

pub fn diff_p(f: impl Fn(&Scalar) -> Scalar, x: f64) -> (f64, f64) {
    let (v, d) = lifted::diff_p(f, &Scalar::Constant(x));
    (v.value(), d.value())
}

pub fn diff2(f: impl Fn(&Scalar) -> Scalar, x: f64) -> f64 {
    lifted::diff2(f, &Scalar::Constant(x)).value()
}

pub fn diff2_p(f: impl Fn(&Scalar) -> Scalar, x: f64) -> (f64, f64) {
    let (v, d) = lifted::diff2_p(f, &Scalar::Constant(x));
    (v.value(), d.value())
}

pub fn diff2_pp(f: impl Fn(&Scalar) -> Scalar, x: f64) -> (f64, f64, f64) {
    let (v, d, dd) = lifted::diff2_pp(f, &Scalar::Constant(x));
    (v.value(), d.value(), dd.value())
}

pub fn diffn(n: u32, f: impl Fn(&Scalar) -> Scalar, x: f64) -> f64 {
    lifted::diffn(n, f, &Scalar::Constant(x)).value()
}

pub fn diffn_p(n: u32, f: impl Fn(&Scalar) -> Scalar, x: f64) -> (f64, f64) {
    let (v, d) = lifted::diffn_p(n, f, &Scalar::Constant(x));
    (v.value(), d.value())
}

pub fn grad(f: impl Fn(&ADVector) -> Scalar, x: &[f64]) -> Vec<f64> {
    lifted::grad(f, &lift_x(x)).values()
}

pub fn grad_p(f: impl Fn(&ADVector) -> Scalar, x: &[f64]) -> (f64, Vec<f64>) {
    let (v, g) = lifted::grad_p(f, &lift_x(x));
    (v.value(), g.values())
}

pub fn gradv(f: impl Fn(&ADVector) -> Scalar, x: &[f64], v: &[f64]) -> f64 {
    lifted::gradv(f, &lift_x(x), &lift_x(v)).value()
}

pub fn gradv_p(f: impl Fn(&ADVector) -> Scalar, x: &[f64], v: &[f64]) -> (f64, f64) {
    let (val, d) = lifted::gradv_p(f, &lift_x(x), &lift_x(v));
    (val.value(), d.value())
}

pub fn hessian(f: impl Fn(&ADVector) -> Scalar, x: &[f64]) -> Vec<Vec<f64>> {
    lifted::hessian(f, &lift_x(x)).values()
}

pub fn hessian_p(f: impl Fn(&ADVector) -> Scalar, x: &[f64]) -> (f64, Vec<Vec<f64>>) {
    let (v, h) = lifted::hessian_p(f, &lift_x(x));
    (v.value(), h.values())
}

pub fn gradhessian(f: impl Fn(&ADVector) -> Scalar, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (g, h) = lifted::gradhessian(f, &lift_x(x));
    (g.values(), h.values())
}

pub fn gradhessian_p(
    f: impl Fn(&ADVector) -> Scalar,
    x: &[f64],
) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
    let (v, g, h) = lifted::gradhessian_p(f, &lift_x(x));
    (v.value(), g.values(), h.values())
}

pub fn hessianv(f: impl Fn(&ADVector) -> Scalar, x: &[f64], v: &[f64]) -> Vec<f64> {
    lifted::hessianv(f, &lift_x(x), &lift_x(v)).values()
}

pub fn hessianv_p(f: impl Fn(&ADVector) -> Scalar, x: &[f64], v: &[f64]) -> (f64, Vec<f64>) {
    let (val, hv) = lifted::hessianv_p(f, &lift_x(x), &lift_x(v));
    (val.value(), hv.values())
}

pub fn gradhessianv(f: impl Fn(&ADVector) -> Scalar, x: &[f64], v: &[f64]) -> (f64, Vec<f64>) {
    let (gv, hv) = lifted::gradhessianv(f, &lift_x(x), &lift_x(v));
    (gv.value(), hv.values())
}

pub fn gradhessianv_p(
    f: impl Fn(&ADVector) -> Scalar,
    x: &[f64],
    v: &[f64],
) -> (f64, f64, Vec<f64>) {
    let (val, gv, hv) = lifted::gradhessianv_p(f, &lift_x(x), &lift_x(v));
    (val.value(), gv.value(), hv.values())
}

pub fn laplacian(f: impl Fn(&ADVector) -> Scalar, x: &[f64]) -> f64 {
    lifted::laplacian(f, &lift_x(x)).value()
}

pub fn laplacian_p(f: impl Fn(&ADVector) -> Scalar, x: &[f64]) -> (f64, f64) {
    let (v, l) = lifted::laplacian_p(f, &lift_x(x));
    (v.value(), l.value())
}

pub fn jacobian(f: impl Fn(&ADVector) -> ADVector, x: &[f64]) -> Vec<Vec<f64>> {
    lifted::jacobian(f, &lift_x(x)).values()
}

pub fn jacobian_p(f: impl Fn(&ADVector) -> ADVector, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (v, j) = lifted::jacobian_p(f, &lift_x(x));
    (v.values(), j.values())
}

pub fn jacobian_t(f: impl Fn(&ADVector) -> ADVector, x: &[f64]) -> Vec<Vec<f64>> {
    lifted::jacobian_t(f, &lift_x(x)).values()
}

pub fn jacobian_t_p(f: impl Fn(&ADVector) -> ADVector, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (v, j) = lifted::jacobian_t_p(f, &lift_x(x));
    (v.values(), j.values())
}

/// Forward-mode Jacobian regardless of shape; exposed for mode-agreement
/// checks and cost experiments.
pub fn jacobian_fwd(f: impl Fn(&ADVector) -> ADVector, x: &[f64]) -> Vec<Vec<f64>> {
    lifted::jacobian_fwd(f, &lift_x(x)).values()
}

/// Reverse-mode Jacobian regardless of shape.
pub fn jacobian_rev(f: impl Fn(&ADVector) -> ADVector, x: &[f64]) -> Vec<Vec<f64>> {
    lifted::jacobian_rev(f, &lift_x(x)).values()
}

pub fn jacobianv(f: impl Fn(&ADVector) -> ADVector, x: &[f64], v: &[f64]) -> Vec<f64> {
    lifted::jacobianv(f, &lift_x(x), &lift_x(v)).values()
}

pub fn jacobianv_p(
    f: impl Fn(&ADVector) -> ADVector,
    x: &[f64],
    v: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let (val, jv) = lifted::jacobianv_p(f, &lift_x(x), &lift_x(v));
    (val.values(), jv.values())
}

pub fn jacobian_tv(f: impl Fn(&ADVector) -> ADVector, x: &[f64], v: &[f64]) -> Vec<f64> {
    lifted::jacobian_tv(f, &lift_x(x), &lift_x(v)).values()
}

pub fn jacobian_tv_p(
    f: impl Fn(&ADVector) -> ADVector,
    x: &[f64],
    v: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let (val, jtv) = lifted::jacobian_tv_p(f, &lift_x(x), &lift_x(v));
    (val.values(), jtv.values())
}

/// Plain-valued pull-back `v -> J^T v` captured from one evaluation.
pub struct Pullback {
    inner: lifted::Pullback,
}

impl Pullback {
    pub fn output_len(&self) -> usize {
        self.inner.output_len()
    }

    pub fn call(&self, v: &[f64]) -> Vec<f64> {
        self.inner.call(&ADVector::from_f64s(v)).values()
    }
}

pub fn jacobian_tv_pp(f: impl Fn(&ADVector) -> ADVector, x: &[f64]) -> (Vec<f64>, Pullback) {
    let (val, inner) = lifted::jacobian_tv_pp(f, &lift_x(x));
    (val.values(), Pullback { inner })
}

pub fn curl(f: impl Fn(&ADVector) -> ADVector, x: &[f64]) -> Vec<f64> {
    lifted::curl(f, &lift_x(x)).values()
}

pub fn curl_p(f: impl Fn(&ADVector) -> ADVector, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (v, c) = lifted::curl_p(f, &lift_x(x));
    (v.values(), c.values())
}

pub fn div(f: impl Fn(&ADVector) -> ADVector, x: &[f64]) -> f64 {
    lifted::div(f, &lift_x(x)).value()
}

pub fn div_p(f: impl Fn(&ADVector) -> ADVector, x: &[f64]) -> (Vec<f64>, f64) {
    let (v, d) = lifted::div_p(f, &lift_x(x));
    (v.values(), d.value())
}

pub fn curldiv(f: impl Fn(&ADVector) -> ADVector, x: &[f64]) -> (Vec<f64>, f64) {
    let (c, d) = lifted::curldiv(f, &lift_x(x));
    (c.values(), d.value())
}

pub fn curldiv_p(f: impl Fn(&ADVector) -> ADVector, x: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
    let (v, c, d) = lifted::curldiv_p(f, &lift_x(x));
    (v.values(), c.values(), d.value())
}
