//! Problem description: exponent vectors, information nodes and the norm index.

use std::fmt;

use crate::error::{Error, Result};
use crate::weights::WeightFamily;

/// A point of the exponent domain: `k` nonnegative finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVec(Vec<f64>);

impl AlphaVec {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput(
                "exponent vector must be nonempty".into(),
            ));
        }
        if let Some(bad) = components.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidInput(format!(
                "exponent components must be finite and >= 0, got {bad}"
            )));
        }
        Ok(Self(components))
    }

    pub fn zeros(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }
}

impl AsRef<[f64]> for AlphaVec {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl fmt::Display for AlphaVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Whether a node carries noisy observed data or only bounds the class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    /// `‖Λⱼx − yⱼ‖ ≤ δⱼ` with `yⱼ` known to the method.
    Observed,
    /// `‖Λⱼx‖ ≤ δⱼ` is an a priori restriction on `x`.
    ClassConstraint,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::Observed => write!(f, "observed"),
            NodeKind::ClassConstraint => write!(f, "class"),
        }
    }
}

/// One constraint `(αʲ, δⱼ)` of the recovery problem.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoNode {
    pub alpha: AlphaVec,
    pub delta: f64,
    pub kind: NodeKind,
}

impl InfoNode {
    pub fn new(alpha: AlphaVec, delta: f64, kind: NodeKind) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidInput(format!(
                "error level must be positive and finite, got {delta}"
            )));
        }
        Ok(Self { alpha, delta, kind })
    }

    pub fn observed(alpha: Vec<f64>, delta: f64) -> Result<Self> {
        Self::new(AlphaVec::new(alpha)?, delta, NodeKind::Observed)
    }

    pub fn class(alpha: Vec<f64>, delta: f64) -> Result<Self> {
        Self::new(AlphaVec::new(alpha)?, delta, NodeKind::ClassConstraint)
    }
}

/// Index `p` of the `L_p` norm; infinity is a tag, never a sentinel float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormIndex {
    Finite(f64),
    Infinity,
}

impl NormIndex {
    pub fn finite(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "norm index must lie in [1, inf], got {p}"
            )));
        }
        Ok(NormIndex::Finite(p))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, NormIndex::Infinity)
    }

    /// Exponent used by the weight and multiplier formulas: `p` itself, or 1 for `p = ∞`.
    pub fn effective(self) -> f64 {
        match self {
            NormIndex::Finite(p) => p,
            NormIndex::Infinity => 1.0,
        }
    }

    /// Hölder conjugate `p'`; `None` for `p = 1` (where `p' = ∞`) and for `p = ∞`.
    pub fn conjugate(self) -> Option<f64> {
        match self {
            NormIndex::Finite(p) if p > 1.0 => Some(p / (p - 1.0)),
            _ => None,
        }
    }
}

impl fmt::Display for NormIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormIndex::Finite(p) => write!(f, "{p}"),
            NormIndex::Infinity => write!(f, "inf"),
        }
    }
}

/// A validated optimal-recovery instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryProblem {
    k: usize,
    d: usize,
    p: NormIndex,
    weight: WeightFamily,
    target: AlphaVec,
    nodes: Vec<InfoNode>,
}

impl RecoveryProblem {
    pub fn new(
        d: usize,
        p: NormIndex,
        weight: WeightFamily,
        target: AlphaVec,
        nodes: Vec<InfoNode>,
    ) -> Result<Self> {
        let k = target.len();
        if d == 0 {
            return Err(Error::InvalidInput("dimension d must be positive".into()));
        }
        if nodes.is_empty() {
            return Err(Error::InvalidInput("at least one node is required".into()));
        }
        for (j, node) in nodes.iter().enumerate() {
            if node.alpha.len() != k {
                return Err(Error::InvalidInput(format!(
                    "node {j} exponent has length {}, expected k = {k}",
                    node.alpha.len()
                )));
            }
        }
        if let NormIndex::Finite(q) = p {
            NormIndex::finite(q)?;
        }
        weight.check_dims(k, d)?;
        Ok(Self {
            k,
            d,
            p,
            weight,
            target,
            nodes,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> NormIndex {
        self.p
    }

    pub fn weight(&self) -> &WeightFamily {
        &self.weight
    }

    pub fn target(&self) -> &AlphaVec {
        &self.target
    }

    pub fn nodes(&self) -> &[InfoNode] {
        &self.nodes
    }

    /// Indices of nodes whose data is observed (the set `M` before intersecting with the active set).
    pub fn observed_indices(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind == NodeKind::Observed)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn with_p(&self, p: NormIndex) -> Result<Self> {
        Self::new(
            self.d,
            p,
            self.weight.clone(),
            self.target.clone(),
            self.nodes.clone(),
        )
    }

    pub fn with_deltas(&self, deltas: &[f64]) -> Result<Self> {
        if deltas.len() != self.nodes.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} error levels, got {}",
                self.nodes.len(),
                deltas.len()
            )));
        }
        let nodes = self
            .nodes
            .iter()
            .zip(deltas)
            .map(|(n, &d)| InfoNode::new(n.alpha.clone(), d, n.kind))
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            self.d,
            self.p,
            self.weight.clone(),
            self.target.clone(),
            nodes,
        )
    }
}
