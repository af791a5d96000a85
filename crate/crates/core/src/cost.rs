//! Player cost accounting.
//!
//! A player pays per-link upkeep (priced by its own type) plus a weighted sum
//! of shortest-path distances to every other player: distances to major
//! (type-A) nodes are scaled by the importance factor, distances to minor
//! (type-B) nodes count once. Unreachable peers are tracked separately and
//! dominate every finite term.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graph::{canonical_pair, LinkAction, NodeId, PlayerType, Topology};
use crate::value::{rat, render_rational, CostDelta, CostValue, Rat};

/// Game parameters: per-link prices for each class and the importance weight
/// applied to distances toward major nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameParams {
    c_a: Rat,
    c_b: Rat,
    importance: Rat,
}

impl GameParams {
    /// `importance` must exceed 1 and prices must satisfy `0 < c_a <= c_b`;
    /// those are hard structural assumptions of the model. Softer regime
    /// conditions are reported by [`GameParams::regime_warnings`] instead.
    pub fn new(c_a: Rat, c_b: Rat, importance: Rat) -> Result<Self> {
        if importance <= Rat::from_integer(1) {
            return Err(Error::InfeasibleParams(format!(
                "importance weight must exceed 1, got {}",
                render_rational(importance)
            )));
        }
        if c_a <= Rat::zero() {
            return Err(Error::InfeasibleParams(format!(
                "link price for major nodes must be positive, got {}",
                render_rational(c_a)
            )));
        }
        if c_b < c_a {
            return Err(Error::InfeasibleParams(format!(
                "minor link price {} must be at least the major link price {}",
                render_rational(c_b),
                render_rational(c_a)
            )));
        }
        Ok(GameParams {
            c_a,
            c_b,
            importance,
        })
    }

    /// Both classes pay the same link price.
    pub fn uniform(c: Rat, importance: Rat) -> Result<Self> {
        GameParams::new(c, c, importance)
    }

    pub fn major_link_price(&self) -> Rat {
        self.c_a
    }

    pub fn minor_link_price(&self) -> Rat {
        self.c_b
    }

    pub fn importance(&self) -> Rat {
        self.importance
    }

    /// Average of the two link prices; several closed forms use it.
    pub fn mean_link_price(&self) -> Rat {
        (self.c_a + self.c_b) / rat(2, 1)
    }

    pub fn link_price(&self, t: PlayerType) -> Rat {
        match t {
            PlayerType::TypeA => self.c_a,
            PlayerType::TypeB => self.c_b,
        }
    }

    /// Weight on the distance toward a node of type `t`.
    pub fn distance_weight(&self, t: PlayerType) -> Rat {
        match t {
            PlayerType::TypeA => self.importance,
            PlayerType::TypeB => Rat::from_integer(1),
        }
    }

    /// The structural results on stable shapes assume link prices sit below
    /// the importance weight (and above 1 for major links). Outside that
    /// window the engine still runs, but outcomes may leave the catalogued
    /// territory, so callers surface these notes.
    pub fn regime_warnings(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if self.c_a <= Rat::from_integer(1) {
            notes.push(format!(
                "major link price {} is at most 1; major nodes may overbuild links",
                render_rational(self.c_a)
            ));
        }
        if self.c_a >= self.importance {
            notes.push(format!(
                "major link price {} is not below the importance weight {}; the major clique may not form",
                render_rational(self.c_a),
                render_rational(self.importance)
            ));
        }
        if self.c_b >= self.importance {
            notes.push(format!(
                "minor link price {} is not below the importance weight {}; minor nodes may refuse direct major links",
                render_rational(self.c_b),
                render_rational(self.importance)
            ));
        }
        notes
    }
}

/// Cost of one player: upkeep of its own links plus weighted distances to all
/// other players. Peers it cannot reach raise the unreachable count instead
/// of a finite term.
pub fn player_cost(topo: &Topology, params: &GameParams, node: NodeId) -> CostValue {
    let upkeep =
        Rat::from_integer(topo.degree(node) as i128) * params.link_price(topo.player_type(node));
    let table = topo.shortest_distances(node);
    let mut finite = upkeep;
    let mut unreachable = 0u32;
    for peer in topo.nodes() {
        if peer == node {
            continue;
        }
        match table.hop(peer) {
            Some(d) => {
                finite += params.distance_weight(topo.player_type(peer))
                    * Rat::from_integer(i128::from(d));
            }
            None => unreachable += 1,
        }
    }
    CostValue {
        unreachable,
        finite,
    }
}

/// Sum of every player's cost.
pub fn social_cost(topo: &Topology, params: &GameParams) -> CostValue {
    topo.nodes().map(|i| player_cost(topo, params, i)).sum()
}

/// How `node`'s cost changes if `pair` is added or removed: cost after the
/// edit minus cost before. Negative means the edit helps the node.
pub fn delta_cost(
    topo: &Topology,
    params: &GameParams,
    node: NodeId,
    pair: (NodeId, NodeId),
    action: LinkAction,
) -> Result<CostDelta> {
    let after = topo.with_change(pair, action)?;
    Ok(player_cost(&after, params, node) - player_cost(topo, params, node))
}

/// One formed link's settlement: who paid whom, how much was quoted and how
/// much actually flows per period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PaymentRecord {
    pub payer: NodeId,
    pub payee: NodeId,
    /// Payment attached to the link while it lives, negotiated once when the
    /// link formed; zero is recorded explicitly.
    pub amount: Rat,
    /// Price the payee quoted when the link was negotiated.
    pub asked: Rat,
}

/// Per-link payment book for games with monetary transfers. Keyed by
/// canonical pair; a link that was formed without any negotiated payment has
/// an explicit zero-amount record.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PaymentLedger {
    records: BTreeMap<(NodeId, NodeId), PaymentRecord>,
}

impl PaymentLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(
        &mut self,
        pair: (NodeId, NodeId),
        payer: NodeId,
        amount: Rat,
        asked: Rat,
    ) -> Result<()> {
        let key = canonical_pair(pair.0, pair.1);
        if payer != key.0 && payer != key.1 {
            return Err(Error::InconsistentLedger(format!(
                "payer {payer} is not an endpoint of ({}, {})",
                key.0, key.1
            )));
        }
        if amount < Rat::zero() || asked < Rat::zero() {
            return Err(Error::InconsistentLedger(format!(
                "negative settlement on ({}, {})",
                key.0, key.1
            )));
        }
        let payee = if payer == key.0 { key.1 } else { key.0 };
        self.records.insert(
            key,
            PaymentRecord {
                payer,
                payee,
                amount,
                asked,
            },
        );
        Ok(())
    }

    pub fn get(&self, pair: (NodeId, NodeId)) -> Option<&PaymentRecord> {
        self.records.get(&canonical_pair(pair.0, pair.1))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(NodeId, NodeId), &PaymentRecord)> {
        self.records.iter()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Payments stop when the link dies; drop its record.
    pub fn remove_pair(&mut self, pair: (NodeId, NodeId)) {
        self.records.remove(&canonical_pair(pair.0, pair.1));
    }

    /// Net per-period outflow of `node`: what it pays minus what it receives.
    pub fn net_for(&self, node: NodeId) -> Rat {
        let mut net = Rat::zero();
        for rec in self.records.values() {
            if rec.payer == node {
                net += rec.amount;
            }
            if rec.payee == node {
                net -= rec.amount;
            }
        }
        net
    }

    /// Every settled pair must be a live link.
    pub fn validate(&self, topo: &Topology) -> Result<()> {
        for (&(u, v), _) in self.records.iter() {
            if !topo.has_link(u, v) {
                return Err(Error::InconsistentLedger(format!(
                    "settlement recorded for missing link ({u}, {v})"
                )));
            }
        }
        Ok(())
    }
}

/// Cost including money: structural cost plus net payments made.
pub fn extended_cost(
    topo: &Topology,
    params: &GameParams,
    ledger: &PaymentLedger,
    node: NodeId,
) -> CostValue {
    let base = player_cost(topo, params, node);
    CostValue {
        unreachable: base.unreachable,
        finite: base.finite + ledger.net_for(node),
    }
}
