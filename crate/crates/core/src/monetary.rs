//! Link negotiation with side payments.
//!
//! When money may change hands, a link change goes through exactly when the
//! two endpoints' summed cost deltas improve — the winner can always pay off
//! the loser. On its turn a player shops for new links under one of two
//! partner-preference rules, pays the quoted price on each formation, then
//! drops any of its links whose joint value has turned negative; it repeats
//! until neither phase fires. Every settlement lands in a [`PaymentLedger`]
//! and on the trace event that formed the link.

use std::collections::BTreeSet;
use std::io::Write;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::{delta_cost, GameParams, PaymentLedger};
use crate::dynamics::{
    turn_actor, ActionRule, EngineState, GameTrace, RunOutcome, TraceEvent, TraceEventKind,
    TurnOrder,
};
use crate::error::{Error, Result};
use crate::graph::{canonical_pair, LinkAction, NodeId, PlayerType, Topology};
use crate::value::{CostDelta, Rat};

/// Partner-selection rule an actor uses when shopping for a new link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    /// Rank candidates by the joint score `delta(actor) + min(delta(partner), 0)`:
    /// the partner's gain counts in the candidate's favour, its loss does not
    /// (the actor would pay it off instead). The partner quotes exactly its
    /// own compensation as the price.
    JointScore,
    /// Price every candidate against the actor's least attractive option:
    /// each partner quotes the larger of its own compensation and the
    /// actor's surplus over that anchor, so equally attractive offers end up
    /// equally priced and the actor picks the cheapest.
    AnchorPriced,
}

/// A priced offer for one new link, from the shopping actor's point of view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkQuote {
    pub pair: (NodeId, NodeId),
    /// Payment the actor would hand the partner on formation.
    pub price: Rat,
    /// Structural cost change for the actor, payment excluded.
    pub buyer_delta: CostDelta,
    /// Structural cost change for the partner.
    pub seller_delta: CostDelta,
    /// The actor's all-in change: structural delta plus the price.
    pub effective_delta: CostDelta,
}

/// Whether the endpoints of `pair` would jointly agree to `action` when side
/// payments are available: the change goes through exactly when the two
/// endpoint deltas sum to a strict improvement. Returns the verdict together
/// with the summed delta.
pub fn transfer_feasible(
    topo: &Topology,
    params: &GameParams,
    pair: (NodeId, NodeId),
    action: LinkAction,
) -> Result<(bool, CostDelta)> {
    let du = delta_cost(topo, params, pair.0, pair, action)?;
    let dv = delta_cost(topo, params, pair.1, pair, action)?;
    let sum = du + dv;
    Ok((sum.is_improvement(), sum))
}

/// Offer for the partner with the best joint score
/// `delta(actor) + min(delta(partner), 0)`; the partner quotes its own
/// compensation as the price. `None` when even the best score is not an
/// improvement. Score ties go to the lowest partner id.
pub fn pref1_choice(topo: &Topology, params: &GameParams, actor: NodeId) -> Option<LinkQuote> {
    let mut best: Option<(CostDelta, LinkQuote)> = None;
    for j in topo.nodes() {
        if j == actor || topo.has_link(actor, j) {
            continue;
        }
        let pair = canonical_pair(actor, j);
        let buyer = delta_cost(topo, params, actor, pair, LinkAction::Add)
            .expect("candidate pair is unlinked");
        let seller =
            delta_cost(topo, params, j, pair, LinkAction::Add).expect("candidate pair is unlinked");
        let score = buyer + seller.min(CostDelta::zero());
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            let price = seller.compensation();
            best = Some((
                score,
                LinkQuote {
                    pair,
                    price,
                    buyer_delta: buyer,
                    seller_delta: seller,
                    effective_delta: buyer.plus_money(price),
                },
            ));
        }
    }
    match best {
        Some((score, quote)) if score.is_improvement() => Some(quote),
        _ => None,
    }
}

/// The full price board the anchored mechanism shows `actor`.
///
/// The anchor is the candidate partner whose structural delta for the actor
/// is largest (ties to the lowest id), priced at its own compensation; its
/// all-in delta is the actor's worst-case fallback. Every other candidate is
/// priced at the larger of zero, the actor's surplus relative to that
/// fallback, and the partner's own compensation — so a partner never sells
/// below cost, and better-placed partners absorb the actor's surplus.
/// A candidate that beats the fallback by a connectivity difference has no
/// finite surplus price and is left off the board.
pub fn pref2_quotes(topo: &Topology, params: &GameParams, actor: NodeId) -> Vec<LinkQuote> {
    struct Candidate {
        pair: (NodeId, NodeId),
        buyer: CostDelta,
        seller: CostDelta,
    }
    let mut candidates: Vec<Candidate> = Vec::new();
    for j in topo.nodes() {
        if j == actor || topo.has_link(actor, j) {
            continue;
        }
        let pair = canonical_pair(actor, j);
        let buyer = delta_cost(topo, params, actor, pair, LinkAction::Add)
            .expect("candidate pair is unlinked");
        let seller =
            delta_cost(topo, params, j, pair, LinkAction::Add).expect("candidate pair is unlinked");
        candidates.push(Candidate {
            pair,
            buyer,
            seller,
        });
    }
    let mut anchor: Option<&Candidate> = None;
    for c in &candidates {
        if anchor.is_none_or(|a| c.buyer > a.buyer) {
            anchor = Some(c);
        }
    }
    let Some(anchor) = anchor else {
        return Vec::new();
    };
    let fallback = anchor.buyer.plus_money(anchor.seller.compensation());
    let mut quotes = Vec::new();
    for c in &candidates {
        let surplus = CostDelta {
            unreachable: fallback.unreachable - c.buyer.unreachable,
            finite: fallback.finite - c.buyer.finite,
        };
        let floor = c.seller.compensation();
        let price = match surplus.unreachable.cmp(&0) {
            // Infinitely better than the fallback: no finite price captures
            // the surplus, so the partner does not quote.
            std::cmp::Ordering::Greater => continue,
            // Infinitely worse: the surplus term can never bind.
            std::cmp::Ordering::Less => floor,
            std::cmp::Ordering::Equal => floor.max(surplus.finite).max(Rat::zero()),
        };
        quotes.push(LinkQuote {
            pair: c.pair,
            price,
            buyer_delta: c.buyer,
            seller_delta: c.seller,
            effective_delta: c.buyer.plus_money(price),
        });
    }
    quotes
}

/// Anchored-pricing selection: the offer with the best all-in delta, price
/// as the first tie-break, any remaining tie settled uniformly by `rng`.
/// `None` when the best offer does not improve the actor even at its price.
pub fn pref2_choice(
    topo: &Topology,
    params: &GameParams,
    actor: NodeId,
    rng: &mut ChaCha8Rng,
) -> Option<LinkQuote> {
    let quotes = pref2_quotes(topo, params, actor);
    let best_key = quotes.iter().map(|q| (q.effective_delta, q.price)).min()?;
    if !best_key.0.is_improvement() {
        return None;
    }
    let ties: Vec<&LinkQuote> = quotes
        .iter()
        .filter(|q| (q.effective_delta, q.price) == best_key)
        .collect();
    let pick = if ties.len() == 1 {
        0
    } else {
        rng.gen_range(0..ties.len())
    };
    Some(ties[pick].clone())
}

/// Configuration for a negotiation run: the usual engine knobs plus the
/// preference rule and the seed behind the anchored rule's random tie-break.
#[derive(Debug, Clone)]
pub struct MonetaryConfig {
    pub params: GameParams,
    pub preference: Preference,
    /// Negotiation takes one link change at a time; the full-rewire rule is
    /// rejected at run time.
    pub rule: ActionRule,
    pub arrival_schedule: Vec<PlayerType>,
    pub turn_order: TurnOrder,
    /// Post-arrival turn budget; `None` means `10·n²`.
    pub max_turns: Option<usize>,
    /// Per-turn act budget; `None` means `max(2·n², 1)`.
    pub acts_cap_per_turn: Option<usize>,
    /// Seed for the anchored rule's uniform tie-break.
    pub selection_seed: u64,
}

impl MonetaryConfig {
    pub fn new(
        params: GameParams,
        preference: Preference,
        arrival_schedule: Vec<PlayerType>,
    ) -> Self {
        MonetaryConfig {
            params,
            preference,
            rule: ActionRule::SingleChange,
            arrival_schedule,
            turn_order: TurnOrder::RoundRobin,
            max_turns: None,
            acts_cap_per_turn: None,
            selection_seed: 0,
        }
    }
}

/// One negotiation turn for `actor`: shop for links while an acceptable
/// offer exists, then drop own links whose joint value has gone negative,
/// and repeat until neither phase fires. Returns whether anything happened.
#[allow(clippy::too_many_arguments)]
fn negotiation_turn(
    state: &mut EngineState,
    ledger: &mut PaymentLedger,
    params: &GameParams,
    preference: Preference,
    selection_rng: &mut ChaCha8Rng,
    actor: NodeId,
    turn: usize,
    cap: usize,
) -> bool {
    let mut acts_this_turn = 0usize;
    let mut acted_any = false;
    let mut capped = false;
    'outer: loop {
        let mut acted_this_pass = false;
        loop {
            let choice = match preference {
                Preference::JointScore => pref1_choice(&state.topo, params, actor),
                Preference::AnchorPriced => {
                    pref2_choice(&state.topo, params, actor, selection_rng)
                }
            };
            let Some(quote) = choice else { break };
            let accepted = match preference {
                // The joint score can look good while the actor's all-in
                // delta is not (a partner loss is only held out of the score,
                // not out of the bill), so both sides of the bargain are
                // re-checked before money moves.
                Preference::JointScore => {
                    let (feasible, _) =
                        transfer_feasible(&state.topo, params, quote.pair, LinkAction::Add)
                            .expect("quoted pair is unlinked");
                    feasible && quote.effective_delta.is_improvement()
                }
                // An anchored quote already prices the partner's loss in, so
                // a negative all-in delta implies joint feasibility.
                Preference::AnchorPriced => quote.effective_delta.is_improvement(),
            };
            if !accepted {
                break;
            }
            if acts_this_turn >= cap {
                capped = true;
                break 'outer;
            }
            debug_assert!(
                transfer_feasible(&state.topo, params, quote.pair, LinkAction::Add)
                    .expect("quoted pair is unlinked")
                    .0,
                "an accepted offer is always jointly profitable"
            );
            state
                .topo
                .add_link(quote.pair.0, quote.pair.1)
                .expect("quoted pair is unlinked");
            ledger
                .record(
                    quote.pair,
                    actor,
                    quote.price,
                    quote.seller_delta.compensation(),
                )
                .expect("negotiated prices are non-negative");
            state.record_act(turn, actor, quote.pair, LinkAction::Add, quote.price);
            acts_this_turn += 1;
            acted_this_pass = true;
            acted_any = true;
        }
        loop {
            let mut worst: Option<(CostDelta, (NodeId, NodeId))> = None;
            for &j in state.topo.neighbors(actor) {
                let pair = canonical_pair(actor, j);
                let (feasible, sum) =
                    transfer_feasible(&state.topo, params, pair, LinkAction::Remove)
                        .expect("neighbor link exists");
                if feasible && worst.as_ref().is_none_or(|(s, p)| (sum, pair) < (*s, *p)) {
                    worst = Some((sum, pair));
                }
            }
            let Some((_, pair)) = worst else { break };
            if acts_this_turn >= cap {
                capped = true;
                break 'outer;
            }
            state
                .topo
                .remove_link(pair.0, pair.1)
                .expect("neighbor link exists");
            ledger.remove_pair(pair);
            state.record_act(turn, actor, pair, LinkAction::Remove, Rat::zero());
            acts_this_turn += 1;
            acted_this_pass = true;
            acted_any = true;
        }
        if !acted_this_pass {
            break;
        }
    }
    if capped {
        state.capped = true;
        state.anomalies.push(format!(
            "turn {turn}: player {actor} hit the per-turn act cap ({cap})"
        ));
    }
    if acted_any {
        state.snapshot(params, true, turn);
    }
    acted_any
}

/// Run the negotiation dynamics from `initial`, with arrivals appended per
/// the schedule. Every formed link settles through the returned ledger; the
/// trace carries the payment on each formation event.
pub fn run_monetary_game(initial: &Topology, config: &MonetaryConfig) -> Result<RunOutcome> {
    if config.rule != ActionRule::SingleChange {
        return Err(Error::InvalidConfig(
            "negotiation takes one link change at a time; the full-rewire rule carries no prices"
                .into(),
        ));
    }
    let n = initial.node_count() + config.arrival_schedule.len();
    let max_turns = config.max_turns.unwrap_or(10 * n * n);
    let cap = config.acts_cap_per_turn.unwrap_or((2 * n * n).max(1));
    let mut order_rng = match config.turn_order {
        TurnOrder::UniformRandom { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        TurnOrder::RoundRobin => None,
    };
    let mut selection_rng = ChaCha8Rng::seed_from_u64(config.selection_seed);
    let mut ledger = PaymentLedger::new();
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
        negotiation_turn(
            &mut state,
            &mut ledger,
            &config.params,
            config.preference,
            &mut selection_rng,
            node,
            turn,
            cap,
        );
        turn += 1;
    }
    let arrivals_end = turn;

    let mut converged_at = None;
    if n > 0 {
        let mut quiet: BTreeSet<NodeId> = BTreeSet::new();
        for main_turn in 0..max_turns {
            let actor = turn_actor(&config.turn_order, &mut order_rng, main_turn, n);
            let acted = negotiation_turn(
                &mut state,
                &mut ledger,
                &config.params,
                config.preference,
                &mut selection_rng,
                actor,
                turn,
                cap,
            );
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
    ledger.validate(&state.topo)?;

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
        ledger,
        converged,
    })
}

/// Total settled payments, grouped by the classes of the paying links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaymentSummary {
    pub major_major: Rat,
    pub major_minor: Rat,
    pub minor_minor: Rat,
}

impl PaymentSummary {
    pub fn zero() -> Self {
        PaymentSummary {
            major_major: Rat::zero(),
            major_minor: Rat::zero(),
            minor_minor: Rat::zero(),
        }
    }
}

/// Sum the ledger's payments by link class.
pub fn payment_summary(topo: &Topology, ledger: &PaymentLedger) -> PaymentSummary {
    let mut summary = PaymentSummary::zero();
    for (&(u, v), record) in ledger.iter() {
        let slot = match (topo.player_type(u), topo.player_type(v)) {
            (PlayerType::TypeA, PlayerType::TypeA) => &mut summary.major_major,
            (PlayerType::TypeB, PlayerType::TypeB) => &mut summary.minor_minor,
            _ => &mut summary.major_minor,
        };
        *slot += record.amount;
    }
    summary
}

/// Write the per-class payment totals as CSV (`class,total_num,total_den`).
pub fn write_payment_summary_csv<W: Write>(summary: &PaymentSummary, mut out: W) -> Result<()> {
    writeln!(out, "class,total_num,total_den")?;
    for (class, total) in [
        ("major_major", summary.major_major),
        ("major_minor", summary.major_minor),
        ("minor_minor", summary.minor_minor),
    ] {
        writeln!(out, "{class},{},{}", total.numer(), total.denom())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::matches_full_bipartite_on_clique;
    use crate::cost::social_cost;
    use crate::value::rat;

    fn uniform(c: (i128, i128), a: (i128, i128)) -> GameParams {
        GameParams::uniform(rat(c.0, c.1), rat(a.0, a.1)).unwrap()
    }

    /// Major–minor–minor path: the far minor and the far major would jointly
    /// gain from linking at `c = 2, A = 4` but not at `c = 3`.
    fn major_minor_minor_path() -> Topology {
        let mut topo = Topology::with_split(1, 2);
        topo.add_link(0, 1).unwrap();
        topo.add_link(1, 2).unwrap();
        topo
    }

    #[test]
    fn joint_feasibility_flips_with_the_shared_upkeep() {
        let topo = major_minor_minor_path();
        let cheap = uniform((2, 1), (4, 1));
        let (ok, sum) = transfer_feasible(&topo, &cheap, (0, 2), LinkAction::Add).unwrap();
        assert!(ok);
        assert_eq!(sum, CostDelta::finite(rat(-1, 1)));

        let dear = uniform((3, 1), (4, 1));
        let (ok, sum) = transfer_feasible(&topo, &dear, (0, 2), LinkAction::Add).unwrap();
        assert!(!ok);
        assert_eq!(sum, CostDelta::finite(rat(1, 1)));
    }

    #[test]
    fn bridge_removal_is_never_jointly_feasible() {
        let topo = major_minor_minor_path();
        let p = uniform((2, 1), (4, 1));
        let (ok, sum) = transfer_feasible(&topo, &p, (1, 2), LinkAction::Remove).unwrap();
        assert!(!ok);
        assert!(sum.unreachable > 0);
    }

    #[test]
    fn joint_score_quotes_the_partner_compensation() {
        let topo = major_minor_minor_path();
        let p = uniform((2, 1), (4, 1));
        // Actor 2 shops: only candidate is major 0 at distance two. The major
        // loses 2 - 1 = 1 and quotes exactly that.
        let quote = pref1_choice(&topo, &p, 2).unwrap();
        assert_eq!(quote.pair, (0, 2));
        assert_eq!(quote.buyer_delta, CostDelta::finite(rat(-2, 1)));
        assert_eq!(quote.seller_delta, CostDelta::finite(rat(1, 1)));
        assert_eq!(quote.price, rat(1, 1));
        assert_eq!(quote.effective_delta, CostDelta::finite(rat(-1, 1)));
    }

    #[test]
    fn joint_score_prices_a_gaining_partner_at_zero() {
        // Two loose minors: linking them helps both, so the offered price is
        // an explicit zero.
        let topo = Topology::with_split(0, 2);
        let p = uniform((2, 1), (4, 1));
        let quote = pref1_choice(&topo, &p, 0).unwrap();
        assert_eq!(quote.pair, (0, 1));
        assert_eq!(quote.price, rat(0, 1));
        assert!(quote.seller_delta.is_improvement());
        assert!(quote.effective_delta.is_improvement());
    }

    /// Two majors linked, a minor on major 0, the actor minor behind it, and
    /// a stray minor hanging off major 1:
    /// `3 - 2 - 0 - 1 - 4` with the extra clique link (0, 1).
    fn pricing_playground() -> Topology {
        let mut topo = Topology::with_split(2, 3);
        topo.add_link(0, 1).unwrap();
        topo.add_link(0, 2).unwrap();
        topo.add_link(2, 3).unwrap();
        topo.add_link(1, 4).unwrap();
        topo
    }

    #[test]
    fn anchored_quotes_share_one_all_in_delta_and_respect_the_floor() {
        let topo = pricing_playground();
        let p = uniform((2, 1), (4, 1));
        let quotes = pref2_quotes(&topo, &p, 3);
        let by_partner: Vec<((NodeId, NodeId), Rat, Rat)> = quotes
            .iter()
            .map(|q| (q.pair, q.price, q.effective_delta.finite))
            .collect();
        // Candidates for actor 3 are major 0 (buyer -7), major 1 (buyer -8)
        // and minor 4 (buyer -5, the fallback, priced at its zero
        // compensation). Anchored pricing levels every all-in delta at the
        // fallback's -5.
        assert_eq!(
            by_partner,
            vec![
                ((0, 3), rat(2, 1), rat(-5, 1)),
                ((1, 3), rat(3, 1), rat(-5, 1)),
                ((3, 4), rat(0, 1), rat(-5, 1)),
            ]
        );
        for q in &quotes {
            assert!(q.price >= q.seller_delta.compensation());
        }
        // Major 0's own compensation is only 1; the anchored surcharge
        // lifts its quote to 2.
        assert_eq!(quotes[0].seller_delta.compensation(), rat(1, 1));

        // All-in deltas tie, so the cheapest offer wins without touching
        // the rng.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let choice = pref2_choice(&topo, &p, 3, &mut rng).unwrap();
        assert_eq!(choice.pair, (3, 4));
        assert_eq!(choice.price, rat(0, 1));
    }

    #[test]
    fn anchored_full_ties_are_settled_by_the_seeded_rng() {
        // Minor 0 behind minor 1 on major 2, major 3 in a clique with it:
        // both majors sit at distance two with identical deltas and prices.
        let mut topo = Topology::with_split(0, 2);
        topo.add_node(PlayerType::TypeA);
        topo.add_node(PlayerType::TypeA);
        topo.add_link(0, 1).unwrap();
        topo.add_link(1, 2).unwrap();
        topo.add_link(1, 3).unwrap();
        topo.add_link(2, 3).unwrap();
        let p = uniform((2, 1), (4, 1));
        let quotes = pref2_quotes(&topo, &p, 0);
        assert_eq!(quotes.len(), 2);
        assert_eq!(
            (quotes[0].effective_delta, quotes[0].price),
            (quotes[1].effective_delta, quotes[1].price)
        );
        let mut first = ChaCha8Rng::seed_from_u64(11);
        let mut second = ChaCha8Rng::seed_from_u64(11);
        let a = pref2_choice(&topo, &p, 0, &mut first).unwrap();
        let b = pref2_choice(&topo, &p, 0, &mut second).unwrap();
        assert_eq!(a, b, "same seed, same tie-break");
        assert!(a.pair == (0, 2) || a.pair == (0, 3));
    }

    #[test]
    fn negotiation_rejects_the_full_rewire_rule() {
        let p = uniform((2, 1), (4, 1));
        let mut cfg = MonetaryConfig::new(p, Preference::JointScore, vec![PlayerType::TypeB]);
        cfg.rule = ActionRule::FullRewire;
        let err = run_monetary_game(&Topology::with_split(0, 0), &cfg).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn joint_score_run_buys_into_the_full_bipartite_optimum() {
        // Two minors arrive first, then two majors; c = 2 < (A+1)/2 makes
        // the full bipartite structure optimal. The run gets there by the
        // minors buying their second major links for exactly c_A - 1 = 1 and
        // dissolving their now-redundant mutual link.
        let p = uniform((2, 1), (4, 1));
        let schedule = vec![
            PlayerType::TypeB,
            PlayerType::TypeB,
            PlayerType::TypeA,
            PlayerType::TypeA,
        ];
        let cfg = MonetaryConfig::new(p.clone(), Preference::JointScore, schedule);
        let run = run_monetary_game(&Topology::with_split(0, 0), &cfg).unwrap();
        assert!(run.converged);
        assert!(matches_full_bipartite_on_clique(&run.final_topology));
        assert_eq!(
            run.final_topology.links(),
            vec![(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        );
        assert_eq!(social_cost(&run.final_topology, &p).finite, rat(52, 1));

        // Minor 1 came late to both majors and paid 1 for each; minor 0's
        // links and the majors' clique link settled at zero.
        let amount = |pair| run.ledger.get(pair).unwrap().amount;
        assert_eq!(amount((1, 2)), rat(1, 1));
        assert_eq!(amount((1, 3)), rat(1, 1));
        assert_eq!(amount((0, 2)), rat(0, 1));
        assert_eq!(amount((0, 3)), rat(0, 1));
        assert_eq!(amount((2, 3)), rat(0, 1));
        assert_eq!(run.ledger.len(), 5);

        // The minors' starter link was dissolved once both sat on the
        // clique, and its ledger entry went with it.
        let removed: Vec<_> = run
            .trace
            .events
            .iter()
            .filter(|e| e.kind == TraceEventKind::LinkRemoved)
            .map(|e| e.pair.unwrap())
            .collect();
        assert_eq!(removed, vec![(0, 1)]);
        assert!(run.ledger.get((0, 1)).is_none());

        let summary = payment_summary(&run.final_topology, &run.ledger);
        assert_eq!(summary.major_major, rat(0, 1));
        assert_eq!(summary.major_minor, rat(2, 1));
        assert_eq!(summary.minor_minor, rat(0, 1));

        // The trace replays to the same final topology and carries the
        // payments on the formation events.
        assert_eq!(run.trace.replay().unwrap(), run.final_topology);
        let paid: Vec<Rat> = run
            .trace
            .events
            .iter()
            .filter(|e| e.kind == TraceEventKind::LinkAdded)
            .map(|e| e.payment)
            .collect();
        assert_eq!(paid.iter().filter(|p| **p > Rat::zero()).count(), 2);
    }

    #[test]
    fn payment_summary_csv_lists_every_class() {
        let topo = pricing_playground();
        let mut ledger = PaymentLedger::new();
        ledger.record((0, 2), 2, rat(3, 2), rat(3, 2)).unwrap();
        ledger.record((0, 1), 0, rat(0, 1), rat(0, 1)).unwrap();
        let summary = payment_summary(&topo, &ledger);
        let mut buf = Vec::new();
        write_payment_summary_csv(&summary, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "class,total_num,total_den\nmajor_major,0,1\nmajor_minor,3,2\nminor_minor,0,1\n"
        );
    }
}
