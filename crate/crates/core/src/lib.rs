//! Engine for a network-formation game with two player classes. Players pay
//! for the links they keep and for weighted distances to everyone else;
//! the crate provides exact cost accounting, stability analysis, sequential
//! best-response dynamics (with and without monetary transfers), a catalogue
//! of named topologies with closed-form costs, and structural metrics.

pub mod canonical;
pub mod cost;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod monetary;
pub mod stability;
pub mod value;

pub use canonical::{CanonicalKind, PriceMode, PriceReport, SqrtBound};
pub use cost::{
    delta_cost, extended_cost, player_cost, social_cost, GameParams, PaymentLedger, PaymentRecord,
};
pub use dynamics::{
    run_game, ActionRule, DynamicsConfig, GameTrace, PhaseRegion, PhaseSnapshot, RunOutcome,
    TraceEvent, TraceEventKind, TurnOrder,
};
pub use error::{Error, Result};
pub use graph::{LinkAction, NodeId, PlayerType, Topology};
pub use metrics::{
    coreness, k_core, k_core_components, mean_node_core_distance, preferential_attachment,
    subgraph_density, CoreDistanceReport,
};
pub use monetary::{
    payment_summary, pref1_choice, pref2_choice, pref2_quotes, run_monetary_game,
    transfer_feasible, LinkQuote, MonetaryConfig, PaymentSummary, Preference,
};
pub use stability::{DeviationWitness, StableRow, StableSetReport, WitnessKind};
pub use value::{parse_rational, rat, render_rational, CostDelta, CostValue, Rat};
