//! Central finite-difference counterparts of the differentiation API.
//!
//! These mirror the shape contracts of the exact operations and serve
//! both as a user-facing approximate API and as the independent oracle
//! in correctness tests. First derivatives use a step of cbrt(eps),
//! second derivatives a step of eps^(1/4), each scaled per coordinate by
//! `max(1, |x_i|)`. No Richardson extrapolation: the documented accuracy
//! class is about 1e-5 relative on smooth, moderately scaled functions.
//!
//! There is deliberately no `ndiffn` and no `njacobian_tv`.

/// Step sizes for the finite-difference operators.
#[derive(Clone, Copy, Debug)]
pub struct FDConfig {
    /// Base step for first derivatives.
    pub h1: f64,
    /// Base step for second derivatives.
    pub h2: f64,
}

impl Default for FDConfig {
    fn default() -> FDConfig {
        FDConfig {
            h1: f64::EPSILON.cbrt(),
            h2: f64::EPSILON.powf(0.25),
        }
    }
}

impl FDConfig {
    pub fn new(h1: f64, h2: f64) -> FDConfig {
        assert!(h1 > 0.0 && h1.is_finite(), "h1 must be positive and finite");
        assert!(h2 > 0.0 && h2.is_finite(), "h2 must be positive and finite");
        FDConfig { h1, h2 }
    }

    fn step1(&self, x: f64) -> f64 {
        self.h1 * x.abs().max(1.0)
    }

    fn step2(&self, x: f64) -> f64 {
        self.h2 * x.abs().max(1.0)
    }

    /// Directional step: relative to the point scale, normalized by the
    /// direction's magnitude.
    fn dir_step(&self, base: f64, x: &[f64], v: &[f64]) -> f64 {
        let xs = x.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        let vs = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if vs == 0.0 {
            base
        } else {
            base * xs / vs
        }
    }

    pub fn ndiff(&self, f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = self.step1(x);
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    pub fn ndiff_p(&self, f: impl Fn(f64) -> f64, x: f64) -> (f64, f64) {
        let d = self.ndiff(&f, x);
        (f(x), d)
    }

    pub fn ndiff2(&self, f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = self.step2(x);
        (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    }

    pub fn ndiff2_p(&self, f: impl Fn(f64) -> f64, x: f64) -> (f64, f64) {
        let d = self.ndiff2(&f, x);
        (f(x), d)
    }

    pub fn ndiff2_pp(&self, f: impl Fn(f64) -> f64, x: f64) -> (f64, f64, f64) {
        (f(x), self.ndiff(&f, x), self.ndiff2(&f, x))
    }

    pub fn ngrad(&self, f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
        let mut xs = x.to_vec();
        (0..x.len())
            .map(|i| {
                let h = self.step1(x[i]);
                xs[i] = x[i] + h;
                let hi = f(&xs);
                xs[i] = x[i] - h;
                let lo = f(&xs);
                xs[i] = x[i];
                (hi - lo) / (2.0 * h)
            })
            .collect()
    }

    pub fn ngrad_p(&self, f: impl Fn(&[f64]) -> f64, x: &[f64]) -> (f64, Vec<f64>) {
        let g = self.ngrad(&f, x);
        (f(x), g)
    }

    pub fn ngradv(&self, f: impl Fn(&[f64]) -> f64, x: &[f64], v: &[f64]) -> f64 {
        check_len("ngradv", x.len(), v.len());
        let h = self.dir_step(self.h1, x, v);
        (f(&shift(x, v, h)) - f(&shift(x, v, -h))) / (2.0 * h)
    }

    pub fn ngradv_p(&self, f: impl Fn(&[f64]) -> f64, x: &[f64], v: &[f64]) -> (f64, f64) {
        let d = self.ngradv(&f, x, v);
        (f(x), d)
    }

    /// Hessian as central differences of the finite-difference gradient.
    pub fn nhessian(&self, f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<Vec<f64>> {
        let n = x.len();
        let mut h = vec![vec![0.0; n]; n];
        let mut xs = x.to_vec();
        for i in 0..n {
            let step = self.step2(x[i]);
            xs[i] = x[i] + step;
            let ghi = self.ngrad(&f, &xs);
            xs[i] = x[i] - step;
            let glo = self.ngrad(&f, &xs);
            xs[i] = x[i];
            for j in 0..n {
                h[j][i] = (ghi[j] - glo[j]) / (2.0 * step);
            }
        }
        h
    }

    pub fn nhessian_p(&self, f: impl Fn(&[f64]) -> f64, x: &[f64]) -> (f64, Vec<Vec<f64>>) {
        let h = self.nhessian(&f, x);
        (f(x), h)
    }

    pub fn ngradhessian(&self, f: impl Fn(&[f64]) -> f64, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        (self.ngrad(&f, x), self.nhessian(&f, x))
    }

    pub fn ngradhessian_p(
        &self,
        f: impl Fn(&[f64]) -> f64,
        x: &[f64],
    ) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
        let (g, h) = self.ngradhessian(&f, x);
        (f(x), g, h)
    }

    pub fn nhessianv(&self, f: impl Fn(&[f64]) -> f64, x: &[f64], v: &[f64]) -> Vec<f64> {
        check_len("nhessianv", x.len(), v.len());
        let h = self.dir_step(self.h2, x, v);
        let ghi = self.ngrad(&f, &shift(x, v, h));
        let glo = self.ngrad(&f, &shift(x, v, -h));
        ghi.iter()
            .zip(&glo)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect()
    }

    pub fn nhessianv_p(
        &self,
        f: impl Fn(&[f64]) -> f64,
        x: &[f64],
        v: &[f64],
    ) -> (f64, Vec<f64>) {
        let hv = self.nhessianv(&f, x, v);
        (f(x), hv)
    }

    pub fn ngradhessianv(
        &self,
        f: impl Fn(&[f64]) -> f64,
        x: &[f64],
        v: &[f64],
    ) -> (f64, Vec<f64>) {
        (self.ngradv(&f, x, v), self.nhessianv(&f, x, v))
    }

    pub fn ngradhessianv_p(
        &self,
        f: impl Fn(&[f64]) -> f64,
        x: &[f64],
        v: &[f64],
    ) -> (f64, f64, Vec<f64>) {
        let (gv, hv) = self.ngradhessianv(&f, x, v);
        (f(x), gv, hv)
    }

    pub fn nlaplacian(&self, f: impl Fn(&[f64]) -> f64, x: &[f64]) -> f64 {
        let fx = f(x);
        let mut xs = x.to_vec();
        (0..x.len())
            .map(|i| {
                let h = self.step2(x[i]);
                xs[i] = x[i] + h;
                let hi = f(&xs);
                xs[i] = x[i] - h;
                let lo = f(&xs);
                xs[i] = x[i];
                (hi - 2.0 * fx + lo) / (h * h)
            })
            .sum()
    }

    pub fn nlaplacian_p(&self, f: impl Fn(&[f64]) -> f64, x: &[f64]) -> (f64, f64) {
        let l = self.nlaplacian(&f, x);
        (f(x), l)
    }

    pub fn njacobian(&self, f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> Vec<Vec<f64>> {
        let n = x.len();
        let mut xs = x.to_vec();
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let h = self.step1(x[i]);
            xs[i] = x[i] + h;
            let hi = f(&xs);
            xs[i] = x[i] - h;
            let lo = f(&xs);
            xs[i] = x[i];
            cols.push(
                hi.iter()
                    .zip(&lo)
                    .map(|(a, b)| (a - b) / (2.0 * h))
                    .collect(),
            );
        }
        let m = if n == 0 { f(x).len() } else { cols[0].len() };
        (0..m)
            .map(|j| (0..n).map(|i| cols[i][j]).collect())
            .collect()
    }

    pub fn njacobian_p(
        &self,
        f: impl Fn(&[f64]) -> Vec<f64>,
        x: &[f64],
    ) -> (Vec<f64>, Vec<Vec<f64>>) {
        let j = self.njacobian(&f, x);
        (f(x), j)
    }

    pub fn njacobian_t(&self, f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> Vec<Vec<f64>> {
        transpose(&self.njacobian(f, x), x.len())
    }

    pub fn njacobian_t_p(
        &self,
        f: impl Fn(&[f64]) -> Vec<f64>,
        x: &[f64],
    ) -> (Vec<f64>, Vec<Vec<f64>>) {
        let jt = self.njacobian_t(&f, x);
        (f(x), jt)
    }

    pub fn njacobianv(&self, f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], v: &[f64]) -> Vec<f64> {
        check_len("njacobianv", x.len(), v.len());
        let h = self.dir_step(self.h1, x, v);
        let hi = f(&shift(x, v, h));
        let lo = f(&shift(x, v, -h));
        hi.iter()
            .zip(&lo)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect()
    }

    pub fn njacobianv_p(
        &self,
        f: impl Fn(&[f64]) -> Vec<f64>,
        x: &[f64],
        v: &[f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let jv = self.njacobianv(&f, x, v);
        (f(x), jv)
    }

    pub fn ncurldiv(&self, f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> (Vec<f64>, f64) {
        assert!(x.len() == 3, "ncurl: needs a 3-vector, got length {}", x.len());
        let j = self.njacobian(&f, x);
        assert!(
            j.len() == 3,
            "ncurl: field must map into R^3, got length {}",
            j.len()
        );
        let curl = vec![
            j[2][1] - j[1][2],
            j[0][2] - j[2][0],
            j[1][0] - j[0][1],
        ];
        let div = j[0][0] + j[1][1] + j[2][2];
        (curl, div)
    }

    pub fn ncurldiv_p(
        &self,
        f: impl Fn(&[f64]) -> Vec<f64>,
        x: &[f64],
    ) -> (Vec<f64>, Vec<f64>, f64) {
        let (c, d) = self.ncurldiv(&f, x);
        (f(x), c, d)
    }

    pub fn ncurl(&self, f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> Vec<f64> {
        self.ncurldiv(f, x).0
    }

    pub fn ncurl_p(&self, f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let c = self.ncurl(&f, x);
        (f(x), c)
    }

    pub fn ndiv(&self, f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> f64 {
        let j = self.njacobian(&f, x);
        assert!(
            j.len() == x.len(),
            "ndiv: field must map R^n to R^n, got {} -> {}",
            x.len(),
            j.len()
        );
        (0..x.len()).map(|i| j[i][i]).sum()
    }

    pub fn ndiv_p(&self, f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> (Vec<f64>, f64) {
        let d = self.ndiv(&f, x);
        (f(x), d)
    }
}

fn shift(x: &[f64], v: &[f64], h: f64) -> Vec<f64> {
    x.iter().zip(v).map(|(a, b)| a + h * b).collect()
}

fn transpose(m: &[Vec<f64>], cols: usize) -> Vec<Vec<f64>> {
    (0..cols)
        .map(|i| m.iter().map(|row| row[i]).collect())
        .collect()
}

fn check_len(op: &str, a: usize, b: usize) {
    assert!(a == b, "{op}: lengths differ ({a} vs {b})");
}

// Default-config conveniences mirroring the exact API's free functions.

pub fn ndiff(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    FDConfig::default().ndiff(f, x)
}

pub fn ndiff_p(f: impl Fn(f64) -> f64, x: f64) -> (f64, f64) {
    FDConfig::default().ndiff_p(f, x)
}

pub fn ndiff2(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    FDConfig::default().ndiff2(f, x)
}

pub fn ndiff2_p(f: impl Fn(f64) -> f64, x: f64) -> (f64, f64) {
    FDConfig::default().ndiff2_p(f, x)
}

pub fn ndiff2_pp(f: impl Fn(f64) -> f64, x: f64) -> (f64, f64, f64) {
    FDConfig::default().ndiff2_pp(f, x)
}

pub fn ngrad(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    FDConfig::default().ngrad(f, x)
}

pub fn ngrad_p(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> (f64, Vec<f64>) {
    FDConfig::default().ngrad_p(f, x)
}

pub fn ngradv(f: impl Fn(&[f64]) -> f64, x: &[f64], v: &[f64]) -> f64 {
    FDConfig::default().ngradv(f, x, v)
}

pub fn ngradv_p(f: impl Fn(&[f64]) -> f64, x: &[f64], v: &[f64]) -> (f64, f64) {
    FDConfig::default().ngradv_p(f, x, v)
}

pub fn nhessian(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<Vec<f64>> {
    FDConfig::default().nhessian(f, x)
}

pub fn nhessian_p(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> (f64, Vec<Vec<f64>>) {
    FDConfig::default().nhessian_p(f, x)
}

pub fn ngradhessian(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    FDConfig::default().ngradhessian(f, x)
}

pub fn ngradhessian_p(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
    FDConfig::default().ngradhessian_p(f, x)
}

pub fn nhessianv(f: impl Fn(&[f64]) -> f64, x: &[f64], v: &[f64]) -> Vec<f64> {
    FDConfig::default().nhessianv(f, x, v)
}

pub fn nhessianv_p(f: impl Fn(&[f64]) -> f64, x: &[f64], v: &[f64]) -> (f64, Vec<f64>) {
    FDConfig::default().nhessianv_p(f, x, v)
}

pub fn ngradhessianv(f: impl Fn(&[f64]) -> f64, x: &[f64], v: &[f64]) -> (f64, Vec<f64>) {
    FDConfig::default().ngradhessianv(f, x, v)
}

pub fn ngradhessianv_p(f: impl Fn(&[f64]) -> f64, x: &[f64], v: &[f64]) -> (f64, f64, Vec<f64>) {
    FDConfig::default().ngradhessianv_p(f, x, v)
}

pub fn nlaplacian(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> f64 {
    FDConfig::default().nlaplacian(f, x)
}

pub fn nlaplacian_p(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> (f64, f64) {
    FDConfig::default().nlaplacian_p(f, x)
}

pub fn njacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> Vec<Vec<f64>> {
    FDConfig::default().njacobian(f, x)
}

pub fn njacobian_p(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    FDConfig::default().njacobian_p(f, x)
}

pub fn njacobian_t(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> Vec<Vec<f64>> {
    FDConfig::default().njacobian_t(f, x)
}

pub fn njacobian_t_p(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    FDConfig::default().njacobian_t_p(f, x)
}

pub fn njacobianv(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], v: &[f64]) -> Vec<f64> {
    FDConfig::default().njacobianv(f, x, v)
}

pub fn njacobianv_p(
    f: impl Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    v: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    FDConfig::default().njacobianv_p(f, x, v)
}

pub fn ncurl(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> Vec<f64> {
    FDConfig::default().ncurl(f, x)
}

pub fn ncurl_p(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    FDConfig::default().ncurl_p(f, x)
}

pub fn ndiv(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> f64 {
    FDConfig::default().ndiv(f, x)
}

pub fn ndiv_p(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> (Vec<f64>, f64) {
    FDConfig::default().ndiv_p(f, x)
}

pub fn ncurldiv(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> (Vec<f64>, f64) {
    FDConfig::default().ncurldiv(f, x)
}

pub fn ncurldiv_p(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
    FDConfig::default().ncurldiv_p(f, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ndiff_square() {
        let d = ndiff(|x| x * x, 3.0);
        assert!((d - 6.0).abs() < 1e-7);
    }

    #[test]
    fn ngrad_sum_of_squares() {
        let g = ngrad(|x| x.iter().map(|v| v * v).sum(), &[1.0, 2.0]);
        assert!((g[0] - 2.0).abs() < 1e-6);
        assert!((g[1] - 4.0).abs() < 1e-6);
    }

    #[test]
    fn ndiff2_cubic() {
        let d = ndiff2(|x| x * x * x, 2.0);
        assert!((d - 12.0).abs() < 1e-3);
    }

    #[test]
    fn step_scaling_keeps_relative_accuracy() {
        // Doubling |x| must not change the relative accuracy class.
        let f = |x: f64| x.sin();
        for &x in &[0.7, 1.4, 2.8, 5.6, 11.2, 44.8] {
            let rel = (ndiff(f, x) - x.cos()).abs() / x.cos().abs().max(1.0);
            assert!(rel < 1e-8, "rel err {rel} at x={x}");
        }
    }

    #[test]
    fn njacobian_of_polar_map() {
        let f = |x: &[f64]| vec![x[0] * x[1].cos(), x[0] * x[1].sin()];
        let j = njacobian(f, &[2.0, std::f64::consts::FRAC_PI_6]);
        let th = std::f64::consts::FRAC_PI_6;
        assert!((j[0][0] - th.cos()).abs() < 1e-6);
        assert!((j[0][1] + 2.0 * th.sin()).abs() < 1e-6);
        assert!((j[1][0] - th.sin()).abs() < 1e-6);
        assert!((j[1][1] - 2.0 * th.cos()).abs() < 1e-6);
    }
}
