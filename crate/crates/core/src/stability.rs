//! Stability checks and exhaustive stable-set enumeration.
//!
//! Two notions are supported. Under *pairwise* stability a link can be cut
//! unilaterally whenever the cutter strictly gains, and a link can be added
//! only when both endpoints strictly gain. Under *transfer* stability side
//! payments are possible, so a pair deviates (cutting or adding) exactly when
//! the sum of the two endpoint deltas is strictly negative. A delta of zero
//! always means the status quo prevails.

use std::io::Write;

use rayon::prelude::*;

use crate::cost::{delta_cost, social_cost, GameParams};
use crate::error::{Error, Result};
use crate::graph::{
    edge_slots, from_edge_mask, LinkAction, NodeId, Topology,
};
use crate::value::{CostDelta, CostValue, Rat};

/// Which kind of profitable deviation a witness describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    UnilateralRemoval,
    BilateralAddition,
}

/// A concrete profitable deviation from a topology: the pair involved, who
/// strictly gains, and both endpoint deltas for audit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationWitness {
    pub kind: WitnessKind,
    pub pair: (NodeId, NodeId),
    /// Nodes whose own delta is strictly negative.
    pub gainers: Vec<NodeId>,
    /// `(endpoint, delta)` for both endpoints, lower id first.
    pub endpoint_deltas: [(NodeId, CostDelta); 2],
}

impl DeviationWitness {
    pub fn summed_delta(&self) -> CostDelta {
        self.endpoint_deltas[0].1 + self.endpoint_deltas[1].1
    }
}

fn endpoint_deltas(
    topo: &Topology,
    params: &GameParams,
    pair: (NodeId, NodeId),
    action: LinkAction,
) -> [(NodeId, CostDelta); 2] {
    let d0 = delta_cost(topo, params, pair.0, pair, action).expect("link edit is valid");
    let d1 = delta_cost(topo, params, pair.1, pair, action).expect("link edit is valid");
    [(pair.0, d0), (pair.1, d1)]
}

fn gainers(deltas: &[(NodeId, CostDelta); 2]) -> Vec<NodeId> {
    deltas
        .iter()
        .filter(|(_, d)| d.is_improvement())
        .map(|(n, _)| *n)
        .collect()
}

/// First profitable deviation without transfers, or `None` if the topology is
/// pairwise stable. The scan is deterministic: removals are tried before
/// additions, each in canonical pair order.
pub fn pairwise_witness(topo: &Topology, params: &GameParams) -> Option<DeviationWitness> {
    for pair in topo.links() {
        let deltas = endpoint_deltas(topo, params, pair, LinkAction::Remove);
        let who = gainers(&deltas);
        if !who.is_empty() {
            return Some(DeviationWitness {
                kind: WitnessKind::UnilateralRemoval,
                pair,
                gainers: who,
                endpoint_deltas: deltas,
            });
        }
    }
    for pair in topo.non_links() {
        let deltas = endpoint_deltas(topo, params, pair, LinkAction::Add);
        let who = gainers(&deltas);
        if who.len() == 2 {
            return Some(DeviationWitness {
                kind: WitnessKind::BilateralAddition,
                pair,
                gainers: who,
                endpoint_deltas: deltas,
            });
        }
    }
    None
}

/// First profitable deviation when side payments are allowed: any pair whose
/// summed delta is strictly negative can move. Same scan order as
/// [`pairwise_witness`].
pub fn transfer_witness(topo: &Topology, params: &GameParams) -> Option<DeviationWitness> {
    for (pairs, action, kind) in [
        (topo.links(), LinkAction::Remove, WitnessKind::UnilateralRemoval),
        (topo.non_links(), LinkAction::Add, WitnessKind::BilateralAddition),
    ] {
        for pair in pairs {
            let deltas = endpoint_deltas(topo, params, pair, action);
            if (deltas[0].1 + deltas[1].1).is_improvement() {
                return Some(DeviationWitness {
                    kind,
                    pair,
                    gainers: gainers(&deltas),
                    endpoint_deltas: deltas,
                });
            }
        }
    }
    None
}

pub fn is_pairwise_stable(topo: &Topology, params: &GameParams) -> bool {
    pairwise_witness(topo, params).is_none()
}

pub fn is_stable_with_transfers(topo: &Topology, params: &GameParams) -> bool {
    transfer_witness(topo, params).is_none()
}

/// Cap for exhaustive stability enumeration: 7 nodes is 2^21 graphs, each
/// with a full deviation scan.
pub const STABILITY_ENUMERATION_MAX_NODES: usize = 7;

/// One stable topology found by enumeration.
#[derive(Debug, Clone)]
pub struct StableRow {
    pub topology: Topology,
    pub social_cost: CostValue,
    /// Whether the row is also stable when side payments are allowed
    /// (always true when the enumeration itself ran with transfers).
    pub stable_with_transfers: bool,
}

/// Result of scanning every labelled topology on a fixed node split.
#[derive(Debug, Clone)]
pub struct StableSetReport {
    /// Stable topologies under the requested notion, in mask order.
    pub rows: Vec<StableRow>,
    /// Cheapest social cost over all topologies (stable or not).
    pub optimum: CostValue,
    /// A topology attaining `optimum`.
    pub optimum_example: Topology,
}

impl StableSetReport {
    pub fn best_stable(&self) -> Option<CostValue> {
        self.rows.iter().map(|r| r.social_cost).min()
    }

    pub fn worst_stable(&self) -> Option<CostValue> {
        self.rows.iter().map(|r| r.social_cost).max()
    }

    /// Exact ratio best-stable / optimum when both are finite.
    pub fn price_of_stability(&self) -> Option<Rat> {
        cost_ratio(self.best_stable()?, self.optimum)
    }

    /// Exact ratio worst-stable / optimum when both are finite.
    pub fn price_of_anarchy(&self) -> Option<Rat> {
        cost_ratio(self.worst_stable()?, self.optimum)
    }
}

/// `a / b` when both are finite and `b` is nonzero.
pub fn cost_ratio(a: CostValue, b: CostValue) -> Option<Rat> {
    use num_traits::Zero;
    if a.is_finite() && b.is_finite() && !b.finite.is_zero() {
        Some(a.finite / b.finite)
    } else {
        None
    }
}

/// Scan every labelled topology with `n_a` majors and `n_b` minors and keep
/// the stable ones under the requested notion. Rows always carry the
/// transfer-stability annotation. Guarded by
/// [`STABILITY_ENUMERATION_MAX_NODES`].
pub fn enumerate_stable(
    n_a: usize,
    n_b: usize,
    params: &GameParams,
    transfers: bool,
) -> Result<StableSetReport> {
    let n = n_a + n_b;
    if n > STABILITY_ENUMERATION_MAX_NODES {
        return Err(Error::SizeGuard {
            what: "stable-set enumeration",
            max: STABILITY_ENUMERATION_MAX_NODES,
            got: n,
        });
    }
    let template = Topology::with_split(n_a, n_b);
    let slots = edge_slots(n);
    let mask_count = 1u64 << slots.len();

    struct Partial {
        rows: Vec<(u64, StableRow)>,
        optimum: Option<(CostValue, u64)>,
    }

    let merged = (0..mask_count)
        .into_par_iter()
        .fold(
            || Partial {
                rows: Vec::new(),
                optimum: None,
            },
            |mut acc, mask| {
                let topo = from_edge_mask(template.types(), &slots, mask);
                let cost = social_cost(&topo, params);
                if acc.optimum.as_ref().is_none_or(|(best, _)| cost < *best) {
                    acc.optimum = Some((cost, mask));
                }
                let stable = if transfers {
                    is_stable_with_transfers(&topo, params)
                } else {
                    is_pairwise_stable(&topo, params)
                };
                if stable {
                    let with_transfers = if transfers {
                        true
                    } else {
                        is_stable_with_transfers(&topo, params)
                    };
                    acc.rows.push((
                        mask,
                        StableRow {
                            topology: topo,
                            social_cost: cost,
                            stable_with_transfers: with_transfers,
                        },
                    ));
                }
                acc
            },
        )
        .reduce(
            || Partial {
                rows: Vec::new(),
                optimum: None,
            },
            |mut a, mut b| {
                a.rows.append(&mut b.rows);
                a.optimum = match (a.optimum, b.optimum) {
                    (None, x) | (x, None) => x,
                    (Some(x), Some(y)) => {
                        // Deterministic tie-break: lowest mask among minima.
                        if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) {
                            Some(y)
                        } else {
                            Some(x)
                        }
                    }
                };
                a
            },
        );

    let (optimum, optimum_mask) = merged
        .optimum
        .expect("at least the empty topology is scanned");
    let mut rows = merged.rows;
    rows.sort_by_key(|(mask, _)| *mask);
    Ok(StableSetReport {
        rows: rows.into_iter().map(|(_, row)| row).collect(),
        optimum,
        optimum_example: from_edge_mask(template.types(), &slots, optimum_mask),
    })
}

fn json_int(value: i128, what: &str) -> Result<i64> {
    i64::try_from(value)
        .map_err(|_| Error::Parse(format!("{what} does not fit a JSON integer: {value}")))
}

/// Write one JSON object per stable row: its edges, exact social cost and the
/// transfer-stability flag.
pub fn write_stable_rows_jsonl<W: Write>(report: &StableSetReport, mut out: W) -> Result<()> {
    for row in &report.rows {
        let edges: Vec<serde_json::Value> = row
            .topology
            .links()
            .into_iter()
            .map(|(u, v)| serde_json::json!([u, v]))
            .collect();
        let line = serde_json::json!({
            "edges": edges,
            "social_cost": {
                "num": json_int(*row.social_cost.finite.numer(), "social cost numerator")?,
                "den": json_int(*row.social_cost.finite.denom(), "social cost denominator")?,
            },
            "stable_with_transfers": row.stable_with_transfers,
        });
        writeln!(out, "{line}").map_err(Error::from)?;
    }
    Ok(())
}
