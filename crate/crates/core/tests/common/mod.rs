#![allow(dead_code)]

use optrec_core::{AlphaVec, InfoNode, NormIndex, RecoveryProblem, WeightFamily};

pub fn line_problem(
    p: NormIndex,
    weight: WeightFamily,
    target: f64,
    nodes: Vec<InfoNode>,
) -> RecoveryProblem {
    RecoveryProblem::new(1, p, weight, AlphaVec::new(vec![target]).unwrap(), nodes)
        .expect("valid fixture")
}

/// Nodes α = 0, 1 (observed, δ = 0.1, 0.5) and α = 2 (class, δ = 0.2), target α⁰ = 1.
pub fn three_node(p: NormIndex, weight: WeightFamily) -> RecoveryProblem {
    line_problem(
        p,
        weight,
        1.0,
        vec![
            InfoNode::observed(vec![0.0], 0.1).unwrap(),
            InfoNode::observed(vec![1.0], 0.5).unwrap(),
            InfoNode::class(vec![2.0], 0.2).unwrap(),
        ],
    )
}

/// Observed α = 0 with error δ, class α = r with bound 1, target s.
pub fn two_node(p: NormIndex, weight: WeightFamily, delta: f64, r: f64, s: f64) -> RecoveryProblem {
    line_problem(
        p,
        weight,
        s,
        vec![
            InfoNode::observed(vec![0.0], delta).unwrap(),
            InfoNode::class(vec![r], 1.0).unwrap(),
        ],
    )
}

/// Three nodes with every error level equal to one.
pub fn unit_deltas(p: NormIndex, weight: WeightFamily) -> RecoveryProblem {
    line_problem(
        p,
        weight,
        1.5,
        vec![
            InfoNode::observed(vec![0.5], 1.0).unwrap(),
            InfoNode::observed(vec![1.0], 1.0).unwrap(),
            InfoNode::class(vec![3.0], 1.0).unwrap(),
        ],
    )
}

pub const NORMS: [NormIndex; 3] = [
    NormIndex::Finite(1.0),
    NormIndex::Finite(2.0),
    NormIndex::Infinity,
];
