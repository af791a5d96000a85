//! Sequential link-formation dynamics.
//!
//! Players arrive one by one and then take turns. On its turn a player
//! greedily applies the best single link change available to it — additions
//! need the other endpoint's strict consent, removals are unilateral — and
//! repeats until nothing helps. Under the full-rewire rule a minor player
//! additionally weighs an alternative plan that drops all of its links and
//! reattaches from scratch, committing whichever plan leaves it strictly
//! better off.
//!
//! Every run produces a complete replayable trace plus per-turn phase
//! snapshots describing the emerging hub structure.

use std::collections::BTreeSet;
use std::io::Write;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cost::{player_cost, GameParams, PaymentLedger};
use crate::error::{Error, Result};
use crate::graph::{canonical_pair, LinkAction, NodeId, PlayerType, Topology};
use crate::value::{rat, CostDelta, CostValue, Rat};

/// How much a player may restructure in one turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionRule {
    /// Best single link changes only, applied greedily until none helps.
    SingleChange,
    /// Like [`ActionRule::SingleChange`], but a minor player also considers
    /// dropping every link it holds and rebuilding from scratch within the
    /// same turn, committing that plan when it ends strictly cheaper.
    FullRewire,
}

/// Who moves when.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurnOrder {
    /// Players move in id order, repeating.
    RoundRobin,
    /// Each turn's mover is drawn uniformly at random.
    UniformRandom { seed: u64 },
}

/// Configuration of a dynamics run without monetary transfers.
#[derive(Debug, Clone)]
pub struct DynamicsConfig {
    pub params: GameParams,
    pub rule: ActionRule,
    /// Types of the players that arrive, in order, after any initial
    /// topology. Each arrival immediately takes a turn.
    pub arrival_schedule: Vec<PlayerType>,
    pub turn_order: TurnOrder,
    /// Cap on post-arrival turns. Default: `10 * n^2` for `n` players.
    pub max_turns: Option<usize>,
    /// Cap on acts within a single turn; exceeding it is recorded as an
    /// anomaly and the run reports non-convergence. Default: `2 * n^2`.
    pub acts_cap_per_turn: Option<usize>,
}

impl DynamicsConfig {
    pub fn new(params: GameParams, rule: ActionRule, arrival_schedule: Vec<PlayerType>) -> Self {
        DynamicsConfig {
            params,
            rule,
            arrival_schedule,
            turn_order: TurnOrder::RoundRobin,
            max_turns: None,
            acts_cap_per_turn: None,
        }
    }
}

/// One trace entry: an arrival or a link change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEventKind {
    Arrive(PlayerType),
    LinkAdded,
    LinkRemoved,
}

impl TraceEventKind {
    pub fn tag(&self) -> &'static str {
        match self {
            TraceEventKind::Arrive(PlayerType::TypeA) => "arrive_a",
            TraceEventKind::Arrive(PlayerType::TypeB) => "arrive_b",
            TraceEventKind::LinkAdded => "add",
            TraceEventKind::LinkRemoved => "remove",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub turn: usize,
    /// Global act counter across the whole run.
    pub act: usize,
    pub kind: TraceEventKind,
    /// Endpoints for link events (canonical order); `None` for arrivals.
    pub pair: Option<(NodeId, NodeId)>,
    /// Whose turn produced the event (the arriving player for arrivals).
    pub actor: NodeId,
    /// Per-period payment attached to the link when it formed; zero when no
    /// money changed hands.
    pub payment: Rat,
}

/// Qualitative regime of the hub structure, read off two pressure terms:
/// whether a major gains by linking the hub, and whether the hub's leaves
/// gain by defecting to the first-linker side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseRegion {
    /// Majors stay away from the hub and its leaves want out: the run drifts
    /// toward the efficient shapes.
    OptimalAttracting,
    /// Majors profit from linking the hub and the leaves stay: the hub star
    /// consolidates.
    StarAttracting,
    /// Both pressures push at once.
    BothPressures,
    /// Neither deviation is profitable; the current shape is frozen.
    NeitherPressure,
    /// Hub or first linker missing, or a pressure term sits exactly at zero.
    Undefined,
}

impl PhaseRegion {
    pub fn tag(&self) -> &'static str {
        match self {
            PhaseRegion::OptimalAttracting => "optimal_attracting",
            PhaseRegion::StarAttracting => "star_attracting",
            PhaseRegion::BothPressures => "both_pressures",
            PhaseRegion::NeitherPressure => "neither_pressure",
            PhaseRegion::Undefined => "undefined",
        }
    }
}

/// Structure snapshot taken after a turn: the minor hub `x` (highest
/// minor-to-minor degree), the first major that ever accepted a minor link
/// (`k`), and the sizes of the sets around them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSnapshot {
    pub turn: usize,
    /// Minors adjacent to the hub.
    pub s_size: usize,
    /// Minors adjacent to the first linker.
    pub l_size: usize,
    /// Majors adjacent to the hub.
    pub d_size: usize,
    /// Majors present.
    pub m_a: usize,
    pub star_center_x: Option<NodeId>,
    pub first_linker_k: Option<NodeId>,
    pub kx_present: bool,
    pub region: PhaseRegion,
}

/// Full record of a run: enough to replay the final topology from scratch
/// and to audit every decision point.
#[derive(Debug, Clone)]
pub struct GameTrace {
    /// Topology the run started from (usually empty).
    pub initial: Topology,
    pub events: Vec<TraceEvent>,
    pub snapshots: Vec<PhaseSnapshot>,
    /// Number of turns consumed by the arrival phase.
    pub arrivals_end: usize,
    /// Turn index at which every player was simultaneously quiet.
    pub converged_at: Option<usize>,
    /// Total turns taken (arrival and post-arrival).
    pub turns_taken: usize,
    pub warnings: Vec<String>,
    pub anomalies: Vec<String>,
}

impl GameTrace {
    /// Rebuild the final topology by replaying all events over the initial
    /// one.
    pub fn replay(&self) -> Result<Topology> {
        let mut topo = self.initial.clone();
        for ev in &self.events {
            match ev.kind {
                TraceEventKind::Arrive(t) => {
                    topo.add_node(t);
                }
                TraceEventKind::LinkAdded => {
                    let (u, v) = ev.pair.ok_or_else(|| {
                        Error::Parse("link event without endpoints".into())
                    })?;
                    topo.add_link(u, v)?;
                }
                TraceEventKind::LinkRemoved => {
                    let (u, v) = ev.pair.ok_or_else(|| {
                        Error::Parse("link event without endpoints".into())
                    })?;
                    topo.remove_link(u, v)?;
                }
            }
        }
        Ok(topo)
    }

    /// Turn of the last post-arrival act, counted from the end of arrivals
    /// (1-based); 0 when no act happened after arrivals.
    pub fn settling_turns(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.turn >= self.arrivals_end)
            .map(|e| e.turn - self.arrivals_end + 1)
            .max()
            .unwrap_or(0)
    }

    /// The major endpoint of the first major-minor link ever added, if any.
    pub fn first_linker(&self, final_topo: &Topology) -> Option<NodeId> {
        for ev in &self.events {
            if ev.kind == TraceEventKind::LinkAdded {
                let (u, v) = ev.pair?;
                let tu = final_topo.player_type(u);
                let tv = final_topo.player_type(v);
                match (tu, tv) {
                    (PlayerType::TypeA, PlayerType::TypeB) => return Some(u),
                    (PlayerType::TypeB, PlayerType::TypeA) => return Some(v),
                    _ => {}
                }
            }
        }
        None
    }

    /// Serialize events and snapshots to JSON lines. Events come first
    /// within a turn, followed by that turn's snapshot.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let payment_parts = |p: Rat| -> Result<(i64, i64)> {
            let num = i64::try_from(*p.numer())
                .map_err(|_| Error::Parse("payment numerator exceeds JSON range".into()))?;
            let den = i64::try_from(*p.denom())
                .map_err(|_| Error::Parse("payment denominator exceeds JSON range".into()))?;
            Ok((num, den))
        };
        let mut snaps = self.snapshots.iter().peekable();
        let mut write_snapshots_through = |turn: Option<usize>, out: &mut W| -> Result<()> {
            while let Some(s) = snaps.peek() {
                if turn.is_some_and(|t| s.turn > t) {
                    break;
                }
                let line = serde_json::json!({
                    "turn": s.turn,
                    "snapshot": {
                        "s_size": s.s_size,
                        "l_size": s.l_size,
                        "d_size": s.d_size,
                        "m_a": s.m_a,
                        "star_center_x": s.star_center_x,
                        "first_linker_k": s.first_linker_k,
                        "kx_present": s.kx_present,
                        "region": s.region.tag(),
                    }
                });
                writeln!(out, "{line}").map_err(Error::from)?;
                snaps.next();
            }
            Ok(())
        };
        for ev in &self.events {
            // Snapshots of earlier turns go out before this event.
            if ev.turn > 0 {
                write_snapshots_through(Some(ev.turn - 1), &mut out)?;
            }
            let (num, den) = payment_parts(ev.payment)?;
            let pair = match ev.pair {
                Some((u, v)) => serde_json::json!([u, v]),
                None => serde_json::Value::Null,
            };
            let line = serde_json::json!({
                "turn": ev.turn,
                "act": ev.act,
                "kind": ev.kind.tag(),
                "pair": pair,
                "payment_num": num,
                "payment_den": den,
            });
            writeln!(out, "{line}").map_err(Error::from)?;
        }
        write_snapshots_through(None, &mut out)?;
        Ok(())
    }
}

/// Outcome of a dynamics run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub final_topology: Topology,
    pub trace: GameTrace,
    /// Payment book; empty for runs without transfers.
    pub ledger: PaymentLedger,
    pub converged: bool,
}

/// Compute the hub snapshot of a topology. `first_linker` is the major that
/// accepted the first minor link (from the trace); `monetary` selects which
/// major-links-hub pressure term applies.
pub fn phase_state(
    topo: &Topology,
    params: &GameParams,
    first_linker: Option<NodeId>,
    monetary: bool,
    turn: usize,
) -> PhaseSnapshot {
    let minor_degree = |b: NodeId| {
        topo.neighbors(b)
            .iter()
            .filter(|&&n| topo.player_type(n) == PlayerType::TypeB)
            .count()
    };
    let mut hub: Option<NodeId> = None;
    let mut best = 0usize;
    for b in topo.nodes_of_type(PlayerType::TypeB) {
        let d = minor_degree(b);
        if d > best {
            best = d;
            hub = Some(b);
        }
    }
    let m_a = topo.count_of_type(PlayerType::TypeA);
    let (s_size, d_size) = match hub {
        Some(x) => (
            minor_degree(x),
            topo.neighbors(x)
                .iter()
                .filter(|&&n| topo.player_type(n) == PlayerType::TypeA)
                .count(),
        ),
        None => (0, 0),
    };
    let l_size = match first_linker {
        Some(k) => topo
            .neighbors(k)
            .iter()
            .filter(|&&n| topo.player_type(n) == PlayerType::TypeB)
            .count(),
        None => 0,
    };
    let kx_present = match (hub, first_linker) {
        (Some(x), Some(k)) => topo.has_link(x, k),
        _ => false,
    };
    let region = match (hub, first_linker) {
        (Some(_), Some(_)) => {
            let a = params.importance();
            let one = Rat::from_integer(1);
            let s = Rat::from_integer(s_size as i128);
            let l = Rat::from_integer(l_size as i128);
            let d = Rat::from_integer(d_size as i128);
            let m = Rat::from_integer(m_a as i128);
            let hub_link_term = if monetary {
                rat(2, 1) * params.mean_link_price() - a - s - one
            } else {
                params.major_link_price() - s - one
            };
            let defect_term = if kx_present {
                -a * (one + m - d) + one + s - l
            } else {
                -a * (one + m - d) + rat(2, 1) * (one + s - l)
            };
            match (
                hub_link_term.cmp(&Rat::zero()),
                defect_term.cmp(&Rat::zero()),
            ) {
                (std::cmp::Ordering::Greater, std::cmp::Ordering::Less) => {
                    PhaseRegion::OptimalAttracting
                }
                (std::cmp::Ordering::Less, std::cmp::Ordering::Greater) => {
                    PhaseRegion::StarAttracting
                }
                (std::cmp::Ordering::Less, std::cmp::Ordering::Less) => {
                    PhaseRegion::BothPressures
                }
                (std::cmp::Ordering::Greater, std::cmp::Ordering::Greater) => {
                    PhaseRegion::NeitherPressure
                }
                _ => PhaseRegion::Undefined,
            }
        }
        _ => PhaseRegion::Undefined,
    };
    PhaseSnapshot {
        turn,
        s_size,
        l_size,
        d_size,
        m_a,
        star_center_x: hub,
        first_linker_k: first_linker,
        kx_present,
        region,
    }
}

/// Profitability term for a hub leaf defecting to the first-linker side:
/// negative means the defection pays. Defined when both hub and first linker
/// exist.
pub fn leaf_defection_term(snapshot: &PhaseSnapshot, params: &GameParams) -> Option<Rat> {
    snapshot.star_center_x?;
    snapshot.first_linker_k?;
    let a = params.importance();
    let one = Rat::from_integer(1);
    let s = Rat::from_integer(snapshot.s_size as i128);
    let l = Rat::from_integer(snapshot.l_size as i128);
    let d = Rat::from_integer(snapshot.d_size as i128);
    let m = Rat::from_integer(snapshot.m_a as i128);
    Some(a * (d - m - one) + s - l)
}

/// A resolved per-turn plan: the acts to commit and the actor's final cost.
struct TurnPlan {
    acts: Vec<((NodeId, NodeId), LinkAction)>,
    topo: Topology,
    actor_cost: CostValue,
    truncated: bool,
}

/// Best single act for `actor` on `topo`, if any: additions need strict
/// consent from the responder and strict gain for the actor, removals need
/// strict gain for the actor. Ties prefer additions, then the lowest
/// canonical pair.
fn best_single_act(
    topo: &Topology,
    params: &GameParams,
    actor: NodeId,
) -> Option<((NodeId, NodeId), LinkAction, CostDelta)> {
    let before = player_cost(topo, params, actor);
    let mut best: Option<(CostDelta, u8, (NodeId, NodeId), LinkAction)> = None;
    let mut consider = |delta: CostDelta, priority: u8, pair: (NodeId, NodeId), act: LinkAction| {
        let key = (delta, priority, pair);
        if best
            .as_ref()
            .is_none_or(|(d, p, pr, _)| key < (*d, *p, *pr))
        {
            best = Some((delta, priority, pair, act));
        }
    };
    for &j in topo.neighbors(actor) {
        let pair = canonical_pair(actor, j);
        let after = topo
            .with_change(pair, LinkAction::Remove)
            .expect("neighbor link exists");
        let delta = player_cost(&after, params, actor) - before;
        if delta.is_improvement() {
            consider(delta, 1, pair, LinkAction::Remove);
        }
    }
    for j in topo.nodes() {
        if j == actor || topo.has_link(actor, j) {
            continue;
        }
        let pair = canonical_pair(actor, j);
        let after = topo
            .with_change(pair, LinkAction::Add)
            .expect("pair is unlinked");
        let delta = player_cost(&after, params, actor) - before;
        if !delta.is_improvement() {
            continue;
        }
        let responder_delta =
            player_cost(&after, params, j) - player_cost(topo, params, j);
        if responder_delta.is_improvement() {
            consider(delta, 0, pair, LinkAction::Add);
        }
    }
    best.map(|(delta, _, pair, act)| (pair, act, delta))
}

/// Greedily apply best single acts for `actor` until none helps or the cap
/// is hit.
fn greedy_plan(topo: &Topology, params: &GameParams, actor: NodeId, cap: usize) -> TurnPlan {
    let mut work = topo.clone();
    let mut acts = Vec::new();
    let mut truncated = false;
    while let Some((pair, action, _)) = best_single_act(&work, params, actor) {
        work.apply(pair, action).expect("candidate act is valid");
        acts.push((pair, action));
        if acts.len() >= cap {
            truncated = best_single_act(&work, params, actor).is_some();
            break;
        }
    }
    let actor_cost = player_cost(&work, params, actor);
    TurnPlan {
        acts,
        topo: work,
        actor_cost,
        truncated,
    }
}

/// Drop every link of `actor`, then greedily rebuild with additions only.
fn rewire_plan(topo: &Topology, params: &GameParams, actor: NodeId, cap: usize) -> TurnPlan {
    let mut work = topo.clone();
    let mut acts = Vec::new();
    let mut truncated = false;
    let old_neighbors: Vec<NodeId> = work.neighbors(actor).iter().copied().collect();
    for j in old_neighbors {
        let pair = canonical_pair(actor, j);
        work.remove_link(pair.0, pair.1).expect("neighbor link exists");
        acts.push((pair, LinkAction::Remove));
    }
    loop {
        if acts.len() >= cap {
            truncated = true;
            break;
        }
        let before = player_cost(&work, params, actor);
        let mut best: Option<(CostDelta, (NodeId, NodeId))> = None;
        for j in work.nodes() {
            if j == actor || work.has_link(actor, j) {
                continue;
            }
            let pair = canonical_pair(actor, j);
            let after = work
                .with_change(pair, LinkAction::Add)
                .expect("pair is unlinked");
            let delta = player_cost(&after, params, actor) - before;
            if !delta.is_improvement() {
                continue;
            }
            let responder_delta =
                player_cost(&after, params, j) - player_cost(&work, params, j);
            if !responder_delta.is_improvement() {
                continue;
            }
            if best.as_ref().is_none_or(|(d, p)| (delta, pair) < (*d, *p)) {
                best = Some((delta, pair));
            }
        }
        match best {
            Some((_, pair)) => {
                work.add_link(pair.0, pair.1).expect("candidate add is valid");
                acts.push((pair, LinkAction::Add));
            }
            None => break,
        }
    }
    let actor_cost = player_cost(&work, params, actor);
    TurnPlan {
        acts,
        topo: work,
        actor_cost,
        truncated,
    }
}

pub(crate) struct EngineState {
    pub(crate) topo: Topology,
    pub(crate) events: Vec<TraceEvent>,
    pub(crate) snapshots: Vec<PhaseSnapshot>,
    pub(crate) act_counter: usize,
    pub(crate) first_linker: Option<NodeId>,
    pub(crate) anomalies: Vec<String>,
    pub(crate) capped: bool,
}

impl EngineState {
    pub(crate) fn record_act(
        &mut self,
        turn: usize,
        actor: NodeId,
        pair: (NodeId, NodeId),
        action: LinkAction,
        payment: Rat,
    ) {
        let kind = match action {
            LinkAction::Add => TraceEventKind::LinkAdded,
            LinkAction::Remove => TraceEventKind::LinkRemoved,
        };
        if action == LinkAction::Add && self.first_linker.is_none() {
            let (u, v) = pair;
            match (self.topo.player_type(u), self.topo.player_type(v)) {
                (PlayerType::TypeA, PlayerType::TypeB) => self.first_linker = Some(u),
                (PlayerType::TypeB, PlayerType::TypeA) => self.first_linker = Some(v),
                _ => {}
            }
        }
        self.events.push(TraceEvent {
            turn,
            act: self.act_counter,
            kind,
            pair: Some(pair),
            actor,
            payment,
        });
        self.act_counter += 1;
    }

    pub(crate) fn snapshot(&mut self, params: &GameParams, monetary: bool, turn: usize) {
        let snap = phase_state(&self.topo, params, self.first_linker, monetary, turn);
        self.snapshots.push(snap);
    }

    /// Run one turn for `actor` under the basic (non-monetary) rules.
    /// Returns whether any act was committed.
    fn basic_turn(
        &mut self,
        params: &GameParams,
        rule: ActionRule,
        actor: NodeId,
        turn: usize,
        cap: usize,
    ) -> bool {
        let greedy = greedy_plan(&self.topo, params, actor, cap);
        let plan = match rule {
            ActionRule::SingleChange => greedy,
            ActionRule::FullRewire => {
                if self.topo.player_type(actor) == PlayerType::TypeB
                    && self.topo.degree(actor) > 0
                {
                    let rewire = rewire_plan(&self.topo, params, actor, cap);
                    if rewire.actor_cost < greedy.actor_cost {
                        rewire
                    } else {
                        greedy
                    }
                } else {
                    greedy
                }
            }
        };
        if plan.truncated {
            self.capped = true;
            self.anomalies.push(format!(
                "turn {turn}: player {actor} hit the per-turn act cap ({cap})"
            ));
        }
        let acted = !plan.acts.is_empty();
        for &(pair, action) in &plan.acts {
            // Apply to the live topology and log; the plan already validated
            // each step on its working copy.
            self.topo.apply(pair, action).expect("plan act is valid");
            self.record_act(turn, actor, pair, action, Rat::zero());
        }
        debug_assert_eq!(self.topo, plan.topo);
        if acted {
            self.snapshot(params, false, turn);
        }
        acted
    }
}

pub(crate) fn turn_actor(
    order: &TurnOrder,
    rng: &mut Option<ChaCha8Rng>,
    main_turn: usize,
    n: usize,
) -> NodeId {
    match order {
        TurnOrder::RoundRobin => (main_turn % n) as NodeId,
        TurnOrder::UniformRandom { .. } => {
            let rng = rng.as_mut().expect("random order has an rng");
            rng.gen_range(0..n as NodeId)
        }
    }
}

/// Run the dynamics from `initial`, with arrivals appended per the schedule.
pub fn run_game(initial: &Topology, config: &DynamicsConfig) -> Result<RunOutcome> {
    let n = initial.node_count() + config.arrival_schedule.len();
    let max_turns = config.max_turns.unwrap_or(10 * n * n);
    let cap = config.acts_cap_per_turn.unwrap_or((2 * n * n).max(1));
    let mut rng = match config.turn_order {
        TurnOrder::UniformRandom { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        TurnOrder::RoundRobin => None,
    };
    let mut state = EngineState {
        topo: initial.clone(),
        events: Vec::new(),
        snapshots: Vec::new(),
        act_counter: 0,
        first_linker: None,
        anomalies: Vec::new(),
        capped: false,
    };
    let mut turn = 0usize;
    for &ptype in &config.arrival_schedule {
        let node = state.topo.add_node(ptype);
        state.events.push(TraceEvent {
            turn,
            act: state.act_counter,
            kind: TraceEventKind::Arrive(ptype),
            pair: None,
            actor: node,
            payment: Rat::zero(),
        });
        state.act_counter += 1;
        state.basic_turn(&config.params, config.rule, node, turn, cap);
        turn += 1;
    }
    let arrivals_end = turn;

    let mut converged_at = None;
    if n > 0 {
        let mut quiet: BTreeSet<NodeId> = BTreeSet::new();
        for main_turn in 0..max_turns {
            let actor = turn_actor(&config.turn_order, &mut rng, main_turn, n);
            let acted = state.basic_turn(&config.params, config.rule, actor, turn, cap);
            if acted {
                quiet.clear();
            } else {
                quiet.insert(actor);
            }
            if quiet.len() == n {
                converged_at = Some(turn);
                turn += 1;
                break;
            }
            turn += 1;
        }
    } else {
        converged_at = Some(arrivals_end);
    }
    if state.capped {
        converged_at = None;
    }

    let converged = converged_at.is_some();
    let trace = GameTrace {
        initial: initial.clone(),
        events: state.events,
        snapshots: state.snapshots,
        arrivals_end,
        converged_at,
        turns_taken: turn,
        warnings: config.params.regime_warnings(),
        anomalies: state.anomalies,
    };
    Ok(RunOutcome {
        final_topology: state.topo,
        trace,
        ledger: PaymentLedger::new(),
        converged,
    })
}

/// Tail statistics of convergence times over repeated randomized runs.
#[derive(Debug, Clone)]
pub struct TailFit {
    /// Slope of the least-squares line through `ln P(t)`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Number of `(t, ln P(t))` points used.
    pub points: usize,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub trials: usize,
    /// Per-trial settling time: last post-arrival turn with an act, counted
    /// from the end of arrivals.
    pub convergence_turns: Vec<usize>,
    /// Fraction of trials still unsettled after `t` turns, for each `t` in
    /// the fitting window.
    pub tail: Vec<(usize, f64)>,
    pub tail_fit: Option<TailFit>,
}

/// Run `trials` randomized copies of the same game (trial `i` reseeds the
/// turn order with `seed + i`), in parallel, and fit an exponential to the
/// settling-time tail over the window `[2n, 10n]`.
pub fn convergence_statistics(
    initial: &Topology,
    config: &DynamicsConfig,
    trials: usize,
) -> Result<ConvergenceReport> {
    let base_seed = match config.turn_order {
        TurnOrder::UniformRandom { seed } => seed,
        TurnOrder::RoundRobin => {
            return Err(Error::InvalidConfig(
                "convergence statistics need a randomized turn order".into(),
            ))
        }
    };
    if trials == 0 {
        return Err(Error::InvalidConfig("at least one trial is required".into()));
    }
    let n = initial.node_count() + config.arrival_schedule.len();
    let convergence_turns: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut cfg = config.clone();
            cfg.turn_order = TurnOrder::UniformRandom {
                seed: base_seed.wrapping_add(i as u64),
            };
            run_game(initial, &cfg).map(|out| out.trace.settling_turns())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut tail = Vec::new();
    for t in (2 * n)..=(10 * n) {
        let surviving = convergence_turns.iter().filter(|&&ct| ct > t).count();
        tail.push((t, surviving as f64 / trials as f64));
    }
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(t, p)| (*t as f64, p.ln()))
        .collect();
    let tail_fit = if pts.len() >= 2 {
        let n_f = pts.len() as f64;
        let sx: f64 = pts.iter().map(|(x, _)| x).sum();
        let sy: f64 = pts.iter().map(|(_, y)| y).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
        let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
        let denom = n_f * sxx - sx * sx;
        if denom.abs() < f64::EPSILON {
            None
        } else {
            let slope = (n_f * sxy - sx * sy) / denom;
            let intercept = (sy - slope * sx) / n_f;
            let mean_y = sy / n_f;
            let ss_tot: f64 = pts.iter().map(|(_, y)| (y - mean_y).powi(2)).sum();
            let ss_res: f64 = pts
                .iter()
                .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
                .sum();
            let r_squared = if ss_tot > 0.0 {
                1.0 - ss_res / ss_tot
            } else {
                1.0
            };
            Some(TailFit {
                slope,
                intercept,
                r_squared,
                points: pts.len(),
            })
        }
    } else {
        None
    };
    Ok(ConvergenceReport {
        trials,
        convergence_turns,
        tail,
        tail_fit,
    })
}

fn int(x: usize) -> Rat {
    Rat::from_integer(x as i128)
}

/// Upper bound on the social cost of any topology the full-rewire dynamics
/// can settle in, in terms of the class sizes.
pub fn rewire_outcome_cost_bound(n_a: usize, n_b: usize, params: &GameParams) -> CostValue {
    let a = params.importance();
    let c = params.mean_link_price();
    let c_b = params.minor_link_price();
    let (ta, tb) = (int(n_a), int(n_b));
    let one = Rat::from_integer(1);
    let two = rat(2, 1);
    let value = ta * (ta - one) * (c + a)
        + two * c_b * tb
        + (a + one) * (rat(3, 1) * ta * tb + tb)
        + two * (tb - one) * (tb - one);
    CostValue::finite(value)
}

/// Algebraically rearranged variant of [`rewire_outcome_cost_bound`] kept
/// for cross-checking; the two disagree by bounded lower-order terms and
/// both are reported.
pub fn rewire_outcome_cost_bound_alt(n_a: usize, n_b: usize, params: &GameParams) -> CostValue {
    let a = params.importance();
    let c_a = params.major_link_price();
    let c_b = params.minor_link_price();
    let (ta, tb) = (int(n_a), int(n_b));
    let two = rat(2, 1);
    let value = ta * ta * (c_a + a) - ta * (two * a + c_a / two)
        + two * tb * tb
        + tb * (a + two * c_b)
        + rat(3, 1) * ta * tb * (a + Rat::from_integer(1))
        + two;
    CostValue::finite(value)
}

/// Upper bound on the social cost of any topology the single-change dynamics
/// can settle in.
pub fn single_change_outcome_cost_bound(
    n_a: usize,
    n_b: usize,
    params: &GameParams,
) -> CostValue {
    let a = params.importance();
    let c_a = params.major_link_price();
    let c_b = params.minor_link_price();
    let (ta, tb) = (int(n_a), int(n_b));
    let one = Rat::from_integer(1);
    let two = rat(2, 1);
    let value = ta * (ta - one) * (c_a + a)
        + rat(3, 1) * tb * tb
        + two * c_b * tb
        + two * ta * tb * (a + one);
    CostValue::finite(value)
}

/// Label of one link relative to the hub decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LinkLabel {
    /// Major-major clique edge.
    MajorMajor,
    /// The hub's link to the first linker.
    HubFirstLinker,
    /// Hub to any other major.
    HubMajor,
    /// Hub to one of its minor leaves.
    HubLeaf,
    /// First linker to one of its minor fan members.
    FanLeaf,
    /// A minor other than the hub attached to a major other than the first
    /// linker: outside the decomposition.
    LeafMajor,
    /// Minor-minor link not involving the hub: outside the decomposition.
    LeafLeaf,
}

/// Decomposition of a topology's links around the hub and first linker.
#[derive(Debug, Clone)]
pub struct LinkClassification {
    pub labels: Vec<((NodeId, NodeId), LinkLabel)>,
    /// Minors adjacent to both the hub and the first linker.
    pub dual_members: Vec<NodeId>,
    /// Links outside the hub-star decomposition.
    pub stray: Vec<(NodeId, NodeId)>,
}

impl LinkClassification {
    pub fn count(&self, label: LinkLabel) -> usize {
        self.labels.iter().filter(|(_, l)| *l == label).count()
    }
}

/// Classify every link relative to hub `x` and first linker `k`.
pub fn classify_links(
    topo: &Topology,
    x: Option<NodeId>,
    k: Option<NodeId>,
) -> LinkClassification {
    let mut labels = Vec::new();
    let mut stray = Vec::new();
    for (u, v) in topo.links() {
        let tu = topo.player_type(u);
        let tv = topo.player_type(v);
        let label = match (tu, tv) {
            (PlayerType::TypeA, PlayerType::TypeA) => LinkLabel::MajorMajor,
            _ => {
                let (major, minor) = if tu == PlayerType::TypeA {
                    (Some(u), v)
                } else if tv == PlayerType::TypeA {
                    (Some(v), u)
                } else {
                    (None, u)
                };
                match major {
                    Some(a) => {
                        if Some(minor) == x && Some(a) == k {
                            LinkLabel::HubFirstLinker
                        } else if Some(minor) == x {
                            LinkLabel::HubMajor
                        } else if Some(a) == k {
                            LinkLabel::FanLeaf
                        } else {
                            LinkLabel::LeafMajor
                        }
                    }
                    None => {
                        if Some(u) == x || Some(v) == x {
                            LinkLabel::HubLeaf
                        } else {
                            LinkLabel::LeafLeaf
                        }
                    }
                }
            }
        };
        if matches!(label, LinkLabel::LeafMajor | LinkLabel::LeafLeaf) {
            stray.push((u, v));
        }
        labels.push(((u, v), label));
    }
    let dual_members = match (x, k) {
        (Some(x), Some(k)) => topo
            .nodes_of_type(PlayerType::TypeB)
            .filter(|&b| b != x && topo.has_link(b, x) && topo.has_link(b, k))
            .collect(),
        _ => Vec::new(),
    };
    LinkClassification {
        labels,
        dual_members,
        stray,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{build, matches_star_on_clique, CanonicalKind};
    use crate::cost::social_cost;
    use crate::value::rat;

    fn uniform(c: (i128, i128), a: (i128, i128)) -> GameParams {
        GameParams::uniform(rat(c.0, c.1), rat(a.0, a.1)).unwrap()
    }

    fn schedule(text: &str) -> Vec<PlayerType> {
        text.chars()
            .map(|ch| PlayerType::from_letter(ch).unwrap())
            .collect()
    }

    #[test]
    fn arrivals_connect_immediately_and_the_run_converges() {
        let cfg = DynamicsConfig::new(
            uniform((1, 2), (2, 1)),
            ActionRule::SingleChange,
            schedule("BBB"),
        );
        let out = run_game(&Topology::with_split(0, 0), &cfg).unwrap();
        assert!(out.converged);
        assert!(out.final_topology.is_connected());
        // Cheap links: the complete triangle forms.
        assert_eq!(out.final_topology.link_count(), 3);
        assert_eq!(out.trace.replay().unwrap(), out.final_topology);
    }

    #[test]
    fn round_robin_runs_are_reproducible() {
        let cfg = DynamicsConfig::new(
            uniform((2, 1), (4, 1)),
            ActionRule::SingleChange,
            schedule("AABBB"),
        );
        let a = run_game(&Topology::with_split(0, 0), &cfg).unwrap();
        let b = run_game(&Topology::with_split(0, 0), &cfg).unwrap();
        assert_eq!(a.trace.events, b.trace.events);
        assert_eq!(a.final_topology, b.final_topology);
    }

    #[test]
    fn majors_then_minors_settle_into_the_star_on_the_clique() {
        let cfg = DynamicsConfig::new(
            uniform((2, 1), (4, 1)),
            ActionRule::SingleChange,
            schedule("AAABBBBB"),
        );
        let out = run_game(&Topology::with_split(0, 0), &cfg).unwrap();
        assert!(out.converged);
        assert_eq!(
            out.final_topology,
            build(CanonicalKind::StarOnClique, 3, 5).unwrap()
        );
        assert_eq!(matches_star_on_clique(&out.final_topology), Some(0));
        // Identical outcome under the full-rewire rule: the star is
        // defection-proof here.
        let mut cfg2 = cfg.clone();
        cfg2.rule = ActionRule::FullRewire;
        let out2 = run_game(&Topology::with_split(0, 0), &cfg2).unwrap();
        assert_eq!(out2.final_topology, out.final_topology);
        assert!(out2.converged);
    }

    #[test]
    fn stable_input_converges_without_any_act() {
        let star = build(CanonicalKind::StarOnClique, 3, 5).unwrap();
        let cfg = DynamicsConfig::new(
            uniform((2, 1), (4, 1)),
            ActionRule::SingleChange,
            Vec::new(),
        );
        let out = run_game(&star, &cfg).unwrap();
        assert!(out.converged);
        assert!(out.trace.events.is_empty());
        assert_eq!(out.trace.settling_turns(), 0);
        assert_eq!(out.final_topology, star);
    }

    #[test]
    fn act_cap_truncation_is_an_anomaly_and_blocks_convergence() {
        let mut cfg = DynamicsConfig::new(
            uniform((1, 2), (2, 1)),
            ActionRule::SingleChange,
            schedule("BBBB"),
        );
        cfg.acts_cap_per_turn = Some(1);
        cfg.max_turns = Some(2);
        let out = run_game(&Topology::with_split(0, 0), &cfg).unwrap();
        assert!(!out.converged);
        assert!(!out.trace.anomalies.is_empty());
    }

    #[test]
    fn first_linker_is_the_major_of_the_first_cross_link() {
        let cfg = DynamicsConfig::new(
            uniform((2, 1), (4, 1)),
            ActionRule::SingleChange,
            schedule("AAB"),
        );
        let out = run_game(&Topology::with_split(0, 0), &cfg).unwrap();
        let k = out.trace.first_linker(&out.final_topology);
        assert_eq!(k, Some(0));
    }

    #[test]
    fn random_turn_order_still_reaches_a_quiet_state() {
        let mut cfg = DynamicsConfig::new(
            uniform((2, 1), (4, 1)),
            ActionRule::SingleChange,
            schedule("ABBB"),
        );
        cfg.turn_order = TurnOrder::UniformRandom { seed: 7 };
        let out = run_game(&Topology::with_split(0, 0), &cfg).unwrap();
        assert!(out.converged);
        assert_eq!(out.trace.replay().unwrap(), out.final_topology);
        // Same seed, same run.
        let again = run_game(&Topology::with_split(0, 0), &cfg).unwrap();
        assert_eq!(again.trace.events, out.trace.events);
    }

    #[test]
    fn trace_jsonl_round_trips_and_interleaves_snapshots() {
        let cfg = DynamicsConfig::new(
            uniform((2, 1), (4, 1)),
            ActionRule::SingleChange,
            schedule("AAB"),
        );
        let out = run_game(&Topology::with_split(0, 0), &cfg).unwrap();
        let mut buf = Vec::new();
        out.trace.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut event_count = 0;
        let mut snapshot_count = 0;
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            if v.get("snapshot").is_some() {
                snapshot_count += 1;
                assert!(v["snapshot"]["region"].is_string());
            } else {
                event_count += 1;
                assert!(v["kind"].is_string());
                assert!(v["payment_den"].as_i64().unwrap() > 0);
            }
        }
        assert_eq!(event_count, out.trace.events.len());
        assert_eq!(snapshot_count, out.trace.snapshots.len());
    }

    #[test]
    fn rewire_rule_lets_hub_leaves_relocate_wholesale() {
        // Hub star over two majors: each leaf is pinned under single
        // changes (majors refuse new links, leaving the hub disconnects),
        // but dropping the hub link and reattaching to a major pays.
        let p = uniform((2, 1), (4, 1));
        let hub_star = crate::canonical::build_absorbed_star(2, 4).unwrap();
        let cfg_single = DynamicsConfig {
            params: p,
            rule: ActionRule::SingleChange,
            arrival_schedule: Vec::new(),
            turn_order: TurnOrder::RoundRobin,
            max_turns: Some(100),
            acts_cap_per_turn: None,
        };
        let single = run_game(&hub_star, &cfg_single).unwrap();
        assert!(single.converged);
        // Frozen in place: not a single act fires.
        assert!(single.trace.events.is_empty());
        assert_eq!(social_cost(&single.final_topology, &p).finite, rat(120, 1));

        let mut cfg_rewire = cfg_single.clone();
        cfg_rewire.rule = ActionRule::FullRewire;
        let rewire = run_game(&hub_star, &cfg_rewire).unwrap();
        assert!(rewire.converged);
        // The leaves defect to major 0 one by one; once the hub is bare,
        // major 0 cuts it loose and it relocates too, leaving the plain
        // star over the major clique.
        assert_eq!(
            rewire.final_topology,
            build(CanonicalKind::StarOnClique, 2, 4).unwrap()
        );
        assert_eq!(social_cost(&rewire.final_topology, &p).finite, rat(112, 1));
    }

    #[test]
    fn phase_snapshot_reads_hub_geometry() {
        // Majors 0, 1; hub minor 2 linked to both majors and minors 3, 4;
        // minor 5 on major 0 only.
        let mut topo = Topology::with_split(2, 4);
        topo.add_link(0, 1).unwrap();
        topo.add_link(0, 2).unwrap();
        topo.add_link(1, 2).unwrap();
        topo.add_link(2, 3).unwrap();
        topo.add_link(2, 4).unwrap();
        topo.add_link(0, 5).unwrap();
        let p = uniform((2, 1), (4, 1));
        let snap = phase_state(&topo, &p, Some(0), false, 9);
        assert_eq!(snap.turn, 9);
        assert_eq!(snap.star_center_x, Some(2));
        assert_eq!(snap.s_size, 2);
        assert_eq!(snap.d_size, 2);
        assert_eq!(snap.m_a, 2);
        assert_eq!(snap.first_linker_k, Some(0));
        assert!(snap.kx_present);
        // Hub-link term: c_A - |S| - 1 = -1; defect term: -4(1+2-2)+1+2-2
        // = -3: both pressures.
        assert_eq!(snap.region, PhaseRegion::BothPressures);
        assert_eq!(leaf_defection_term(&snap, &p), Some(rat(-4, 1)));
    }

    #[test]
    fn phase_region_is_undefined_without_hub_or_linker() {
        let p = uniform((2, 1), (4, 1));
        let star = build(CanonicalKind::StarOnClique, 2, 3).unwrap();
        // No minor-minor links: no hub.
        let snap = phase_state(&star, &p, Some(0), false, 0);
        assert_eq!(snap.star_center_x, None);
        assert_eq!(snap.region, PhaseRegion::Undefined);
        // Hub exists but no first linker known.
        let mut two_minors = Topology::with_split(0, 3);
        two_minors.add_link(0, 1).unwrap();
        two_minors.add_link(1, 2).unwrap();
        let snap2 = phase_state(&two_minors, &p, None, false, 0);
        assert_eq!(snap2.star_center_x, Some(1));
        assert_eq!(snap2.region, PhaseRegion::Undefined);
    }

    #[test]
    fn link_classifier_decomposes_the_hub_star() {
        // Majors 0 (first linker), 1; hub 2; leaves 3, 4 on hub; fan minor 5
        // on the first linker; minor 5 also linked to hub: dual member.
        let mut topo = Topology::with_split(2, 4);
        topo.add_link(0, 1).unwrap();
        topo.add_link(0, 2).unwrap();
        topo.add_link(1, 2).unwrap();
        topo.add_link(2, 3).unwrap();
        topo.add_link(2, 4).unwrap();
        topo.add_link(0, 5).unwrap();
        topo.add_link(2, 5).unwrap();
        let cls = classify_links(&topo, Some(2), Some(0));
        assert_eq!(cls.count(LinkLabel::MajorMajor), 1);
        assert_eq!(cls.count(LinkLabel::HubFirstLinker), 1);
        assert_eq!(cls.count(LinkLabel::HubMajor), 1);
        assert_eq!(cls.count(LinkLabel::HubLeaf), 3);
        assert_eq!(cls.count(LinkLabel::FanLeaf), 1);
        assert!(cls.stray.is_empty());
        assert_eq!(cls.dual_members, vec![5]);
        // |S| + |L| + 1 counts every minor once, duals twice, and the hub
        // again when it sits in the first linker's fan.
        let snap = phase_state(&topo, &uniform((2, 1), (4, 1)), Some(0), false, 0);
        assert_eq!(
            snap.s_size + snap.l_size + 1,
            4 + cls.dual_members.len() + usize::from(snap.kx_present)
        );
    }

    #[test]
    fn convergence_statistics_aggregate_over_seeds() {
        let mut cfg = DynamicsConfig::new(
            uniform((1, 2), (2, 1)),
            ActionRule::SingleChange,
            schedule("BBB"),
        );
        cfg.turn_order = TurnOrder::UniformRandom { seed: 11 };
        let report =
            convergence_statistics(&Topology::with_split(0, 0), &cfg, 40).unwrap();
        assert_eq!(report.trials, 40);
        assert_eq!(report.convergence_turns.len(), 40);
        // Everything settles fast here; the tail over [2n, 10n] is empty of
        // positive mass, so no fit is attempted.
        assert!(report.tail.iter().all(|(_, p)| *p >= 0.0));

        let rr = DynamicsConfig::new(
            uniform((1, 2), (2, 1)),
            ActionRule::SingleChange,
            schedule("BB"),
        );
        assert!(convergence_statistics(&Topology::with_split(0, 0), &rr, 5).is_err());
    }

    #[test]
    fn outcome_bounds_evaluate_exactly() {
        let p = uniform((2, 1), (4, 1));
        // Single-change bound at one major, two minors:
        // 0 + 3*4 + 2*2*2 + 2*1*2*5 = 40.
        assert_eq!(
            single_change_outcome_cost_bound(1, 2, &p),
            CostValue::finite(rat(40, 1))
        );
        // Full-rewire bound at two majors, two minors:
        // 2*1*6 + 2*2*2 + 5*(3*2*2+2) + 2*1 = 12 + 8 + 70 + 2 = 92.
        assert_eq!(
            rewire_outcome_cost_bound(2, 2, &p),
            CostValue::finite(rat(92, 1))
        );
        // The rearranged variant stays within lower-order distance of the
        // main form on a small grid.
        for (ta, tb) in [(2usize, 2usize), (3, 5), (4, 8)] {
            let main = rewire_outcome_cost_bound(ta, tb, &p).finite;
            let alt = rewire_outcome_cost_bound_alt(ta, tb, &p).finite;
            let gap = if main > alt { main - alt } else { alt - main };
            assert!(
                gap <= rat(6, 1) * int(ta) + rat(6, 1) * int(tb) + rat(8, 1),
                "bound forms diverged at ({ta}, {tb}): {main} vs {alt}"
            );
        }
    }
}
