//! Reverse-mode trace and adjoint sweep.
//!
//! Each reverse instantiation owns one [`Trace`]: an append-only list of
//! nodes in evaluation order. A node stores its primal (the value with
//! this trace's tag stripped) and up to two parents with the local
//! partials taken at the primal point. Because nodes only ever point at
//! earlier nodes, walking the list backwards visits every node after all
//! of its consumers, so one backward pass accumulates exact adjoints —
//! fan-out included.
//!
//! Primals and partials are plain `f64` in the common, unnested case and
//! are stored in a compact parallel array; only nodes whose primal or
//! partials carry older-tag structure (forward-on-reverse compositions)
//! get an entry in a sparse side table. A trace without such entries is
//! swept entirely in `f64`, which is what keeps the gradient's overhead
//! factor a small constant.
//!
//! Local partials never carry the trace's own tag, so a sweep only reads
//! the trace; adjoint arithmetic is free to carry tangents of *older*
//! instantiations.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::scalar::{ReverseRef, Scalar};
use crate::tag::Tag;

const NONE: u32 = u32::MAX;

/// Compact per-node data; parent slots are `NONE` when unused.
#[derive(Clone, Copy)]
struct FlatNode {
    d0: f64,
    d1: f64,
    primal: f64,
    p0: u32,
    p1: u32,
}

/// Lifted primal/partials for nodes that carry older-tag structure.
#[derive(Default)]
struct RichNode {
    primal: Option<Scalar>,
    d0: Option<Scalar>,
    d1: Option<Scalar>,
}

#[derive(Default)]
struct Nodes {
    flat: Vec<FlatNode>,
    rich: HashMap<u32, RichNode>,
}

impl Nodes {
    fn len(&self) -> usize {
        self.flat.len()
    }

    fn partial(&self, index: usize, slot: usize) -> Scalar {
        if !self.rich.is_empty() {
            if let Some(r) = self.rich.get(&(index as u32)) {
                let s = if slot == 0 { &r.d0 } else { &r.d1 };
                if let Some(s) = s {
                    return s.clone();
                }
            }
        }
        let f = &self.flat[index];
        Scalar::Constant(if slot == 0 { f.d0 } else { f.d1 })
    }
}

// Traces and adjoint buffers for nontrivial inputs run to megabytes, and
// gradient loops create and drop one per evaluation. Recycling the
// backing storage keeps the pages warm instead of bouncing them through
// the allocator on every call.
thread_local! {
    static NODE_POOL: RefCell<Vec<Vec<FlatNode>>> = const { RefCell::new(Vec::new()) };
    static ADJOINT_POOL: RefCell<Vec<Vec<f64>>> = const { RefCell::new(Vec::new()) };
}

const POOL_CAP: usize = 4;

fn pooled_nodes() -> Vec<FlatNode> {
    NODE_POOL.with(|p| p.borrow_mut().pop()).unwrap_or_default()
}

fn pooled_adjoints(len: usize) -> Vec<f64> {
    let mut v = ADJOINT_POOL
        .with(|p| p.borrow_mut().pop())
        .unwrap_or_default();
    v.clear();
    v.resize(len, 0.0);
    v
}

fn as_const(s: &Scalar) -> Option<f64> {
    match s {
        Scalar::Constant(v) => Some(*v),
        _ => None,
    }
}

struct TraceInner {
    tag: Tag,
    nodes: RefCell<Nodes>,
}

impl Drop for TraceInner {
    fn drop(&mut self) {
        let mut flat = std::mem::take(&mut self.nodes.get_mut().flat);
        if flat.capacity() > 0 {
            flat.clear();
            NODE_POOL.with(|p| {
                let mut p = p.borrow_mut();
                if p.len() < POOL_CAP {
                    p.push(flat);
                }
            });
        }
    }
}

/// The recording of one reverse-mode instantiation.
#[derive(Clone)]
pub struct Trace {
    inner: Rc<TraceInner>,
}

impl Trace {
    pub fn new(tag: Tag) -> Trace {
        Trace {
            inner: Rc::new(TraceInner {
                tag,
                nodes: RefCell::new(Nodes {
                    flat: pooled_nodes(),
                    rich: HashMap::new(),
                }),
            }),
        }
    }

    pub fn tag(&self) -> Tag {
        self.inner.tag
    }

    pub fn len(&self) -> usize {
        self.inner.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn same(a: &Trace, b: &Trace) -> bool {
        Rc::ptr_eq(&a.inner, &b.inner)
    }

    #[inline]
    pub(crate) fn primal_of(&self, index: u32) -> Scalar {
        let nodes = self.inner.nodes.borrow();
        if !nodes.rich.is_empty() {
            if let Some(r) = nodes.rich.get(&index) {
                if let Some(p) = &r.primal {
                    return p.clone();
                }
            }
        }
        Scalar::Constant(nodes.flat[index as usize].primal)
    }

    #[inline]
    fn push(
        &self,
        primal: Scalar,
        p0: u32,
        d0: Option<Scalar>,
        p1: u32,
        d1: Option<Scalar>,
    ) -> Scalar {
        let mut nodes = self.inner.nodes.borrow_mut();
        let index = nodes.len();
        assert!(index < NONE as usize, "trace longer than u32::MAX nodes");
        let index = index as u32;
        let d0v = d0.as_ref().map_or(0.0, |s| s.value());
        let d1v = d1.as_ref().map_or(0.0, |s| s.value());
        nodes.flat.push(FlatNode {
            d0: d0v,
            d1: d1v,
            primal: primal.value(),
            p0,
            p1,
        });
        // Only nested structure needs the side table.
        let rich_primal = if as_const(&primal).is_none() {
            Some(primal)
        } else {
            None
        };
        let rich_d0 = d0.filter(|s| as_const(s).is_none());
        let rich_d1 = d1.filter(|s| as_const(s).is_none());
        if rich_primal.is_some() || rich_d0.is_some() || rich_d1.is_some() {
            nodes.rich.insert(
                index,
                RichNode {
                    primal: rich_primal,
                    d0: rich_d0,
                    d1: rich_d1,
                },
            );
        }
        Scalar::Reverse(ReverseRef {
            trace: self.clone(),
            index,
        })
    }

    /// Records an input leaf. Leaves are distinct nodes even for equal
    /// values; fan-out accumulation relies on node identity.
    pub fn leaf(&self, primal: Scalar) -> Scalar {
        debug_assert!(
            primal.tag().map_or(true, |t| t < self.inner.tag),
            "leaf primal may not carry the trace's own tag"
        );
        self.push(primal, NONE, None, NONE, None)
    }

    /// Fast path for recording a unary primitive on a trace that carries
    /// no older-tag structure: one borrow, plain `f64` throughout.
    /// Returns `None` when the general path must run instead.
    #[inline]
    pub(crate) fn record_flat_unary<FV, DF>(&self, parent: u32, fv: FV, df: DF) -> Option<Scalar>
    where
        FV: Fn(f64) -> f64,
        DF: Fn(&Scalar) -> Scalar,
    {
        let mut nodes = self.inner.nodes.borrow_mut();
        if !nodes.rich.is_empty() {
            return None;
        }
        let pv = nodes.flat[parent as usize].primal;
        let Scalar::Constant(d) = df(&Scalar::Constant(pv)) else {
            return None;
        };
        let index = nodes.len();
        assert!(index < NONE as usize, "trace longer than u32::MAX nodes");
        nodes.flat.push(FlatNode {
            d0: d,
            d1: 0.0,
            primal: fv(pv),
            p0: parent,
            p1: NONE,
        });
        drop(nodes);
        Some(Scalar::Reverse(ReverseRef {
            trace: self.clone(),
            index: index as u32,
        }))
    }

    /// Binary counterpart of [`record_flat_unary`](Trace::record_flat_unary).
    #[inline]
    pub(crate) fn record_flat_binary<FV, DX, DY>(
        &self,
        ia: u32,
        ib: u32,
        fv: FV,
        dfdx: DX,
        dfdy: DY,
    ) -> Option<Scalar>
    where
        FV: Fn(f64, f64) -> f64,
        DX: Fn(&Scalar, &Scalar) -> Scalar,
        DY: Fn(&Scalar, &Scalar) -> Scalar,
    {
        let mut nodes = self.inner.nodes.borrow_mut();
        if !nodes.rich.is_empty() {
            return None;
        }
        let pa = nodes.flat[ia as usize].primal;
        let pb = nodes.flat[ib as usize].primal;
        let (sa, sb) = (Scalar::Constant(pa), Scalar::Constant(pb));
        let (Scalar::Constant(d0), Scalar::Constant(d1)) = (dfdx(&sa, &sb), dfdy(&sa, &sb))
        else {
            return None;
        };
        let index = nodes.len();
        assert!(index < NONE as usize, "trace longer than u32::MAX nodes");
        nodes.flat.push(FlatNode {
            d0,
            d1,
            primal: fv(pa, pb),
            p0: ia,
            p1: ib,
        });
        drop(nodes);
        Some(Scalar::Reverse(ReverseRef {
            trace: self.clone(),
            index: index as u32,
        }))
    }

    pub(crate) fn unary_node(&self, primal: Scalar, parent: u32, partial: Scalar) -> Scalar {
        self.push(primal, parent, Some(partial), NONE, None)
    }

    pub(crate) fn binary_node(
        &self,
        primal: Scalar,
        p0: u32,
        d0: Scalar,
        p1: u32,
        d1: Scalar,
    ) -> Scalar {
        self.push(primal, p0, Some(d0), p1, Some(d1))
    }

    /// Runs one adjoint sweep from `root` with the given seed and returns
    /// the adjoint of every node. Values not recorded on this trace get a
    /// zero adjoint. Each sweep works on a fresh accumulator, so repeated
    /// sweeps with different seeds over one trace are independent.
    pub fn sweep(&self, root: &Scalar, seed: Scalar) -> Adjoints {
        self.sweep_seeded(&[(root.clone(), seed)])
    }

    /// As [`sweep`](Trace::sweep), seeding several output nodes at once;
    /// seeds of outputs that alias one node accumulate.
    pub fn sweep_seeded(&self, seeds: &[(Scalar, Scalar)]) -> Adjoints {
        let nodes = self.inner.nodes.borrow();
        let mut top = 0usize;
        let mut any = false;
        let mut local: Vec<(usize, &Scalar)> = Vec::with_capacity(seeds.len());
        for (out, seed) in seeds {
            if let Scalar::Reverse(r) = out {
                if Trace::same(&r.trace, self) {
                    let i = r.index as usize;
                    local.push((i, seed));
                    top = top.max(i);
                    any = true;
                }
            }
            // Outputs without a node on this trace do not depend on its
            // inputs; their adjoint contribution is zero.
        }
        if !any {
            return Adjoints {
                trace: self.clone(),
                buf: AdjointBuf::Flat(pooled_adjoints(nodes.len())),
            };
        }
        let flat_ok =
            nodes.rich.is_empty() && local.iter().all(|(_, s)| as_const(s).is_some());
        let buf = if flat_ok {
            let mut adj = pooled_adjoints(nodes.len());
            for (i, s) in &local {
                adj[*i] += s.value();
            }
            for i in (0..=top).rev() {
                let a = adj[i];
                if a == 0.0 {
                    continue;
                }
                let node = nodes.flat[i];
                if node.p0 != NONE {
                    adj[node.p0 as usize] += a * node.d0;
                }
                if node.p1 != NONE {
                    adj[node.p1 as usize] += a * node.d1;
                }
            }
            AdjointBuf::Flat(adj)
        } else {
            let mut adj = vec![Scalar::ZERO; nodes.len()];
            for (i, s) in &local {
                adj[*i] = &adj[*i] + *s;
            }
            for i in (0..=top).rev() {
                if matches!(adj[i], Scalar::Constant(v) if v == 0.0) {
                    continue;
                }
                let node = nodes.flat[i];
                if node.p0 != NONE {
                    let c = &adj[i] * nodes.partial(i, 0);
                    adj[node.p0 as usize] = &adj[node.p0 as usize] + c;
                }
                if node.p1 != NONE {
                    let c = &adj[i] * nodes.partial(i, 1);
                    adj[node.p1 as usize] = &adj[node.p1 as usize] + c;
                }
            }
            AdjointBuf::General(adj)
        };
        Adjoints {
            trace: self.clone(),
            buf,
        }
    }
}

impl std::fmt::Debug for Trace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Trace[tag {}, {} nodes]", self.tag().id(), self.len())
    }
}

enum AdjointBuf {
    Flat(Vec<f64>),
    General(Vec<Scalar>),
}

/// Result of one adjoint sweep.
pub struct Adjoints {
    trace: Trace,
    buf: AdjointBuf,
}

impl Drop for Adjoints {
    fn drop(&mut self) {
        if let AdjointBuf::Flat(v) = &mut self.buf {
            let v = std::mem::take(v);
            if v.capacity() > 0 {
                ADJOINT_POOL.with(|p| {
                    let mut p = p.borrow_mut();
                    if p.len() < POOL_CAP {
                        p.push(v);
                    }
                });
            }
        }
    }
}

impl Adjoints {
    /// The accumulated adjoint of `x`; zero for values not recorded on
    /// the swept trace.
    pub fn adjoint(&self, x: &Scalar) -> Scalar {
        match x {
            Scalar::Reverse(r) if Trace::same(&r.trace, &self.trace) => match &self.buf {
                AdjointBuf::Flat(adj) => Scalar::Constant(adj[r.index as usize]),
                AdjointBuf::General(adj) => adj[r.index as usize].clone(),
            },
            _ => Scalar::ZERO,
        }
    }
}

/// Wraps plain inputs as leaves of `trace`.
pub fn make_reverse_inputs(xs: &[f64], trace: &Trace) -> Vec<Scalar> {
    xs.iter().map(|&v| trace.leaf(Scalar::Constant(v))).collect()
}
