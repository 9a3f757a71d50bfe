//! The differentiable scalar.
//!
//! A [`Scalar`] is either a plain constant, a forward-mode dual number
//! (primal + tangent, under a tag), or a reverse-mode node recorded on a
//! [`Trace`](crate::trace::Trace). Primals and tangents are themselves
//! scalars, so instantiations nest to arbitrary depth; the tag ordering
//! decides which perturbation an operation must treat as the outermost
//! one. When two operands carry different tags, the higher-tagged operand
//! belongs to the newest instantiation and the lower-tagged one is a
//! constant with respect to it.

use std::fmt;
use std::rc::Rc;

use crate::tag::Tag;
use crate::trace::Trace;

/// A differentiable 64-bit floating point number.
#[derive(Clone)]
pub enum Scalar {
    /// A value with no derivative structure.
    Constant(f64),
    /// Forward-mode value: primal plus tangent under a tag.
    Dual(Rc<DualPart>),
    /// Reverse-mode value: a node recorded on a trace.
    Reverse(ReverseRef),
}

/// Payload of a forward-mode dual number.
pub struct DualPart {
    pub primal: Scalar,
    pub tangent: Scalar,
    pub tag: Tag,
}

/// Handle to a node on a reverse-mode trace.
#[derive(Clone)]
pub struct ReverseRef {
    pub(crate) trace: Trace,
    pub(crate) index: u32,
}

impl ReverseRef {
    pub fn tag(&self) -> Tag {
        self.trace.tag()
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    /// The node's primal, i.e. its value with this trace's tag stripped.
    pub fn primal(&self) -> Scalar {
        self.trace.primal_of(self.index)
    }
}

impl Scalar {
    pub const ZERO: Scalar = Scalar::Constant(0.0);
    pub const ONE: Scalar = Scalar::Constant(1.0);

    pub fn constant(v: f64) -> Scalar {
        Scalar::Constant(v)
    }

    /// Builds a dual number. The primal must not already carry `tag`.
    pub fn dual(primal: Scalar, tangent: Scalar, tag: Tag) -> Scalar {
        debug_assert!(
            primal.tag().map_or(true, |t| t < tag),
            "dual primal may not carry the dual's own tag"
        );
        Scalar::Dual(Rc::new(DualPart {
            primal,
            tangent,
            tag,
        }))
    }

    /// The underlying floating point value, with all derivative
    /// structure stripped.
    pub fn value(&self) -> f64 {
        let mut cur = self.clone();
        loop {
            match cur {
                Scalar::Constant(v) => return v,
                Scalar::Dual(d) => cur = d.primal.clone(),
                Scalar::Reverse(r) => cur = r.primal(),
            }
        }
    }

    /// The outermost tag carried by this value, if any.
    pub fn tag(&self) -> Option<Tag> {
        match self {
            Scalar::Constant(_) => None,
            Scalar::Dual(d) => Some(d.tag),
            Scalar::Reverse(r) => Some(r.tag()),
        }
    }

    /// This value with the structure of instantiation `tag` stripped,
    /// when `tag` is its outermost tag. A value not carrying `tag` is
    /// its own primal (zero-tangent equivalence).
    pub fn primal_for(&self, tag: Tag) -> Scalar {
        match self {
            Scalar::Dual(d) if d.tag == tag => d.primal.clone(),
            Scalar::Reverse(r) if r.tag() == tag => r.primal(),
            _ => self.clone(),
        }
    }

    /// The tangent this value carries for instantiation `tag`; zero when
    /// the value does not participate in that instantiation.
    pub fn tangent_for(&self, tag: Tag) -> Scalar {
        match self {
            Scalar::Dual(d) if d.tag == tag => d.tangent.clone(),
            _ => Scalar::ZERO,
        }
    }

    fn is_zero_const(&self) -> bool {
        matches!(self, Scalar::Constant(v) if *v == 0.0)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Scalar {
        Scalar::Constant(v)
    }
}

impl Default for Scalar {
    fn default() -> Scalar {
        Scalar::ZERO
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Constant(v) => write!(f, "{v}"),
            Scalar::Dual(d) => write!(
                f,
                "Dual[{}]({:?} + {:?}ε)",
                d.tag.id(),
                d.primal,
                d.tangent
            ),
            Scalar::Reverse(r) => {
                write!(f, "Rev[{}]#{}({:?})", r.tag().id(), r.index, r.primal())
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Value equality on the fully stripped primal.
impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        self.value() == other.value()
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Scalar) -> Option<std::cmp::Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

// --- lifting machinery ---------------------------------------------------

fn tag_rank(t: Option<Tag>) -> u64 {
    t.map_or(0, |t| t.id())
}

/// Applies a unary primitive. `fv` is the primal rule, `df` the analytic
/// derivative evaluated on the primal (built from lifted ops so that
/// lower tags flow through it).
pub(crate) fn lift_unary<FV, DF>(x: &Scalar, fv: FV, df: DF) -> Scalar
where
    FV: Fn(f64) -> f64 + Copy,
    DF: Fn(&Scalar) -> Scalar + Copy,
{
    match x {
        Scalar::Constant(v) => Scalar::Constant(fv(*v)),
        Scalar::Dual(d) => {
            let tangent = if d.tangent.is_zero_const() {
                Scalar::ZERO
            } else {
                df(&d.primal) * &d.tangent
            };
            Scalar::dual(lift_unary(&d.primal, fv, df), tangent, d.tag)
        }
        Scalar::Reverse(r) => {
            if let Some(res) = r.trace.record_flat_unary(r.index, fv, df) {
                return res;
            }
            let p = r.primal();
            let primal = lift_unary(&p, fv, df);
            r.trace.unary_node(primal, r.index, df(&p))
        }
    }
}

/// Applies a binary primitive with partials `dfdx`, `dfdy`. The operand
/// with the higher tag is handled first; the other operand is a constant
/// with respect to that tag. This tie-break is what keeps perturbations
/// of distinct instantiations apart.
pub(crate) fn lift_binary<FV, DX, DY>(x: &Scalar, y: &Scalar, fv: FV, dfdx: DX, dfdy: DY) -> Scalar
where
    FV: Fn(f64, f64) -> f64 + Copy,
    DX: Fn(&Scalar, &Scalar) -> Scalar + Copy,
    DY: Fn(&Scalar, &Scalar) -> Scalar + Copy,
{
    if let (Scalar::Constant(a), Scalar::Constant(b)) = (x, y) {
        return Scalar::Constant(fv(*a, *b));
    }
    let tx = tag_rank(x.tag());
    let ty = tag_rank(y.tag());
    if tx > ty {
        match x {
            Scalar::Dual(d) => {
                let tangent = if d.tangent.is_zero_const() {
                    Scalar::ZERO
                } else {
                    dfdx(&d.primal, y) * &d.tangent
                };
                Scalar::dual(lift_binary(&d.primal, y, fv, dfdx, dfdy), tangent, d.tag)
            }
            Scalar::Reverse(r) => {
                if let Scalar::Constant(b) = y {
                    let b = *b;
                    if let Some(res) = r.trace.record_flat_unary(
                        r.index,
                        |a| fv(a, b),
                        |p| dfdx(p, &Scalar::Constant(b)),
                    ) {
                        return res;
                    }
                }
                let p = r.primal();
                let primal = lift_binary(&p, y, fv, dfdx, dfdy);
                r.trace.unary_node(primal, r.index, dfdx(&p, y))
            }
            Scalar::Constant(_) => unreachable!(),
        }
    } else if ty > tx {
        match y {
            Scalar::Dual(d) => {
                let tangent = if d.tangent.is_zero_const() {
                    Scalar::ZERO
                } else {
                    dfdy(x, &d.primal) * &d.tangent
                };
                Scalar::dual(lift_binary(x, &d.primal, fv, dfdx, dfdy), tangent, d.tag)
            }
            Scalar::Reverse(r) => {
                if let Scalar::Constant(a) = x {
                    let a = *a;
                    if let Some(res) = r.trace.record_flat_unary(
                        r.index,
                        |b| fv(a, b),
                        |p| dfdy(&Scalar::Constant(a), p),
                    ) {
                        return res;
                    }
                }
                let p = r.primal();
                let primal = lift_binary(x, &p, fv, dfdx, dfdy);
                r.trace.unary_node(primal, r.index, dfdy(x, &p))
            }
            Scalar::Constant(_) => unreachable!(),
        }
    } else {
        // Equal, nonzero tags: one instantiation, same mode on both sides.
        match (x, y) {
            (Scalar::Dual(a), Scalar::Dual(b)) => {
                let tangent = dfdx(&a.primal, &b.primal) * &a.tangent
                    + dfdy(&a.primal, &b.primal) * &b.tangent;
                Scalar::dual(
                    lift_binary(&a.primal, &b.primal, fv, dfdx, dfdy),
                    tangent,
                    a.tag,
                )
            }
            (Scalar::Reverse(a), Scalar::Reverse(b)) => {
                debug_assert!(
                    Trace::same(&a.trace, &b.trace),
                    "two reverse traces may not share a tag"
                );
                if let Some(res) = a.trace.record_flat_binary(a.index, b.index, fv, dfdx, dfdy)
                {
                    return res;
                }
                let (pa, pb) = (a.primal(), b.primal());
                let primal = lift_binary(&pa, &pb, fv, dfdx, dfdy);
                a.trace.binary_node(
                    primal,
                    a.index,
                    dfdx(&pa, &pb),
                    b.index,
                    dfdy(&pa, &pb),
                )
            }
            _ => panic!("tag shared between forward and reverse instantiations"),
        }
    }
}

// --- primitive set --------------------------------------------------------

fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Scalar {
    pub fn abs(&self) -> Scalar {
        // abs'(0) = 0 by convention.
        lift_unary(self, f64::abs, |p| Scalar::Constant(sign0(p.value())))
    }

    pub fn sqrt(&self) -> Scalar {
        lift_unary(self, f64::sqrt, |p| Scalar::Constant(0.5) / p.sqrt())
    }

    pub fn exp(&self) -> Scalar {
        lift_unary(self, f64::exp, |p| p.exp())
    }

    pub fn ln(&self) -> Scalar {
        lift_unary(self, f64::ln, |p| Scalar::ONE / p)
    }

    pub fn sin(&self) -> Scalar {
        lift_unary(self, f64::sin, |p| p.cos())
    }

    pub fn cos(&self) -> Scalar {
        lift_unary(self, f64::cos, |p| -p.sin())
    }

    pub fn tan(&self) -> Scalar {
        lift_unary(self, f64::tan, |p| {
            let c = p.cos();
            Scalar::ONE / (&c * &c)
        })
    }

    pub fn asin(&self) -> Scalar {
        lift_unary(self, f64::asin, |p| {
            Scalar::ONE / (Scalar::ONE - p * p).sqrt()
        })
    }

    pub fn acos(&self) -> Scalar {
        lift_unary(self, f64::acos, |p| {
            -(Scalar::ONE / (Scalar::ONE - p * p).sqrt())
        })
    }

    pub fn atan(&self) -> Scalar {
        lift_unary(self, f64::atan, |p| Scalar::ONE / (Scalar::ONE + p * p))
    }

    pub fn sinh(&self) -> Scalar {
        lift_unary(self, f64::sinh, |p| p.cosh())
    }

    pub fn cosh(&self) -> Scalar {
        lift_unary(self, f64::cosh, |p| p.sinh())
    }

    pub fn tanh(&self) -> Scalar {
        lift_unary(self, f64::tanh, |p| {
            let t = p.tanh();
            Scalar::ONE - &t * &t
        })
    }

    pub fn floor(&self) -> Scalar {
        lift_unary(self, f64::floor, |_| Scalar::ZERO)
    }

    pub fn ceil(&self) -> Scalar {
        lift_unary(self, f64::ceil, |_| Scalar::ZERO)
    }

    pub fn round(&self) -> Scalar {
        lift_unary(self, f64::round, |_| Scalar::ZERO)
    }

    pub fn pow(&self, e: &Scalar) -> Scalar {
        lift_binary(
            self,
            e,
            f64::powf,
            |x, y| y * &x.pow(&(y - 1.0)),
            |x, y| x.pow(y) * x.ln(),
        )
    }

    pub fn powf(&self, e: f64) -> Scalar {
        self.pow(&Scalar::Constant(e))
    }

    /// Four-quadrant arctangent, self as the ordinate.
    pub fn atan2(&self, x: &Scalar) -> Scalar {
        lift_binary(
            self,
            x,
            f64::atan2,
            |y, x| x / &(y * y + x * x),
            |y, x| -(y / &(y * y + x * x)),
        )
    }

    /// At exact ties the derivative is taken from `self`.
    pub fn min(&self, other: &Scalar) -> Scalar {
        lift_binary(
            self,
            other,
            |a, b| if a <= b { a } else { b },
            |x, y| Scalar::Constant(if x.value() <= y.value() { 1.0 } else { 0.0 }),
            |x, y| Scalar::Constant(if x.value() <= y.value() { 0.0 } else { 1.0 }),
        )
    }

    /// At exact ties the derivative is taken from `self`.
    pub fn max(&self, other: &Scalar) -> Scalar {
        lift_binary(
            self,
            other,
            |a, b| if a >= b { a } else { b },
            |x, y| Scalar::Constant(if x.value() >= y.value() { 1.0 } else { 0.0 }),
            |x, y| Scalar::Constant(if x.value() >= y.value() { 0.0 } else { 1.0 }),
        )
    }
}

// --- arithmetic operators --------------------------------------------------

#[inline]
fn add_impl(x: &Scalar, y: &Scalar) -> Scalar {
    lift_binary(
        x,
        y,
        |a, b| a + b,
        |_, _| Scalar::ONE,
        |_, _| Scalar::ONE,
    )
}

#[inline]
fn sub_impl(x: &Scalar, y: &Scalar) -> Scalar {
    lift_binary(
        x,
        y,
        |a, b| a - b,
        |_, _| Scalar::ONE,
        |_, _| Scalar::Constant(-1.0),
    )
}

#[inline]
fn mul_impl(x: &Scalar, y: &Scalar) -> Scalar {
    lift_binary(
        x,
        y,
        |a, b| a * b,
        |_, y| y.clone(),
        |x, _| x.clone(),
    )
}

#[inline]
fn div_impl(x: &Scalar, y: &Scalar) -> Scalar {
    lift_binary(
        x,
        y,
        |a, b| a / b,
        |_, y| Scalar::ONE / y,
        |x, y| -(x / &(y * y)),
    )
}

#[inline]
fn neg_impl(x: &Scalar) -> Scalar {
    lift_unary(x, |a| -a, |_| Scalar::Constant(-1.0))
}

macro_rules! binary_ops {
    ($trait:ident, $method:ident, $impl_fn:ident) => {
        impl std::ops::$trait<&Scalar> for &Scalar {
            type Output = Scalar;
            #[inline]
            fn $method(self, rhs: &Scalar) -> Scalar {
                $impl_fn(self, rhs)
            }
        }
        impl std::ops::$trait<Scalar> for Scalar {
            type Output = Scalar;
            #[inline]
            fn $method(self, rhs: Scalar) -> Scalar {
                $impl_fn(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Scalar> for Scalar {
            type Output = Scalar;
            #[inline]
            fn $method(self, rhs: &Scalar) -> Scalar {
                $impl_fn(&self, rhs)
            }
        }
        impl std::ops::$trait<Scalar> for &Scalar {
            type Output = Scalar;
            #[inline]
            fn $method(self, rhs: Scalar) -> Scalar {
                $impl_fn(self, &rhs)
            }
        }
        impl std::ops::$trait<f64> for &Scalar {
            type Output = Scalar;
            #[inline]
            fn $method(self, rhs: f64) -> Scalar {
                $impl_fn(self, &Scalar::Constant(rhs))
            }
        }
        impl std::ops::$trait<f64> for Scalar {
            type Output = Scalar;
            #[inline]
            fn $method(self, rhs: f64) -> Scalar {
                $impl_fn(&self, &Scalar::Constant(rhs))
            }
        }
        impl std::ops::$trait<&Scalar> for f64 {
            type Output = Scalar;
            #[inline]
            fn $method(self, rhs: &Scalar) -> Scalar {
                $impl_fn(&Scalar::Constant(self), rhs)
            }
        }
        impl std::ops::$trait<Scalar> for f64 {
            type Output = Scalar;
            #[inline]
            fn $method(self, rhs: Scalar) -> Scalar {
                $impl_fn(&Scalar::Constant(self), &rhs)
            }
        }
    };
}

binary_ops!(Add, add, add_impl);
binary_ops!(Sub, sub, sub_impl);
binary_ops!(Mul, mul, mul_impl);
binary_ops!(Div, div, div_impl);

impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    #[inline]
    fn neg(self) -> Scalar {
        neg_impl(self)
    }
}

impl std::ops::Neg for Scalar {
    type Output = Scalar;
    #[inline]
    fn neg(self) -> Scalar {
        neg_impl(&self)
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::ZERO, |acc, x| acc + x)
    }
}
