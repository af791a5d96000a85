//! The catalogue of named topologies the theory singles out: builders,
//! exact closed-form social costs, recognizers for final states, stable
//! distance bounds, and the efficiency-price report that combines them.

use num_traits::Zero;

use crate::cost::GameParams;
use crate::error::{Error, Result};
use crate::graph::{NodeId, PlayerType, Topology};
use crate::stability::{
    cost_ratio, pairwise_witness, transfer_witness, DeviationWitness,
};
use crate::value::{floor_sqrt, rat, CostValue, Rat};

/// Named topology families on `n_a` majors (ids `0..n_a`) and `n_b` minors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanonicalKind {
    /// Major clique; every minor hangs off major 0.
    StarOnClique,
    /// Major clique; every minor links to every major.
    FullBipartiteOnClique,
    /// Major clique; `lines` disjoint minor chains of length `line_len`, each
    /// rooted at major 0. Requires `n_b == lines * line_len`.
    LinesOnClique { lines: usize, line_len: usize },
    /// Major clique plus a minor chain of length `line_len` whose two ends
    /// attach to majors 0 and 1, closing a cycle. Requires `n_a >= 2` and
    /// `n_b == line_len`.
    LoopExample { line_len: usize },
    /// Every pair linked, regardless of type.
    FullClique,
}

fn add_major_clique(topo: &mut Topology, n_a: usize) -> Result<()> {
    for u in 0..n_a as NodeId {
        for v in (u + 1)..n_a as NodeId {
            topo.add_link(u, v)?;
        }
    }
    Ok(())
}

/// Build a catalogue topology.
pub fn build(kind: CanonicalKind, n_a: usize, n_b: usize) -> Result<Topology> {
    let mut topo = Topology::with_split(n_a, n_b);
    let first_minor = n_a as NodeId;
    match kind {
        CanonicalKind::StarOnClique => {
            if n_a == 0 && n_b > 0 {
                return Err(Error::InfeasibleParams(
                    "a star over the major clique needs at least one major node".into(),
                ));
            }
            add_major_clique(&mut topo, n_a)?;
            for b in 0..n_b as NodeId {
                topo.add_link(0, first_minor + b)?;
            }
        }
        CanonicalKind::FullBipartiteOnClique => {
            if n_a == 0 && n_b > 0 {
                return Err(Error::InfeasibleParams(
                    "a bipartite overlay needs at least one major node".into(),
                ));
            }
            add_major_clique(&mut topo, n_a)?;
            for a in 0..n_a as NodeId {
                for b in 0..n_b as NodeId {
                    topo.add_link(a, first_minor + b)?;
                }
            }
        }
        CanonicalKind::LinesOnClique { lines, line_len } => {
            if line_len == 0 || lines * line_len != n_b {
                return Err(Error::InfeasibleParams(format!(
                    "{lines} lines of length {line_len} cannot host {n_b} minor nodes"
                )));
            }
            if n_a == 0 && n_b > 0 {
                return Err(Error::InfeasibleParams(
                    "minor chains need a major node to root at".into(),
                ));
            }
            add_major_clique(&mut topo, n_a)?;
            for line in 0..lines {
                let base = first_minor + (line * line_len) as NodeId;
                topo.add_link(0, base)?;
                for step in 1..line_len as NodeId {
                    topo.add_link(base + step - 1, base + step)?;
                }
            }
        }
        CanonicalKind::LoopExample { line_len } => {
            if n_a < 2 || line_len == 0 || line_len != n_b {
                return Err(Error::InfeasibleParams(format!(
                    "loop construction needs two majors and a nonempty chain; \
                     got n_a={n_a}, n_b={n_b}, line_len={line_len}"
                )));
            }
            add_major_clique(&mut topo, n_a)?;
            topo.add_link(0, first_minor)?;
            for step in 1..line_len as NodeId {
                topo.add_link(first_minor + step - 1, first_minor + step)?;
            }
            topo.add_link(1, first_minor + n_b as NodeId - 1)?;
        }
        CanonicalKind::FullClique => {
            let n = n_a + n_b;
            for u in 0..n as NodeId {
                for v in (u + 1)..n as NodeId {
                    topo.add_link(u, v)?;
                }
            }
        }
    }
    Ok(topo)
}

fn int(x: usize) -> Rat {
    Rat::from_integer(x as i128)
}

/// Exact social cost of a catalogue topology, computed in closed form.
/// Matches [`social_cost`] of [`build`] term for term; the direct-count
/// equality is pinned by tests.
pub fn closed_form_cost(
    kind: CanonicalKind,
    n_a: usize,
    n_b: usize,
    params: &GameParams,
) -> Result<CostValue> {
    let a = params.importance();
    let c = params.mean_link_price();
    let c_a = params.major_link_price();
    let c_b = params.minor_link_price();
    let (ta, tb) = (int(n_a), int(n_b));
    let one = Rat::from_integer(1);
    let two = rat(2, 1);
    let clique_part = ta * (ta - one) * (c_a + a);
    let value = match kind {
        CanonicalKind::StarOnClique => {
            if n_a == 0 && n_b > 0 {
                return Err(Error::InfeasibleParams(
                    "a star over the major clique needs at least one major node".into(),
                ));
            }
            two * tb * (tb - one + c + (a + one) * (ta - rat(1, 2))) + clique_part
        }
        CanonicalKind::FullBipartiteOnClique => {
            if n_a == 0 && n_b > 0 {
                return Err(Error::InfeasibleParams(
                    "a bipartite overlay needs at least one major node".into(),
                ));
            }
            two * tb * (tb - one + ((a + one) / two + c) * ta) + clique_part
        }
        CanonicalKind::LinesOnClique { lines, line_len } => {
            if line_len == 0 || lines * line_len != n_b {
                return Err(Error::InfeasibleParams(format!(
                    "{lines} lines of length {line_len} cannot host {n_b} minor nodes"
                )));
            }
            if n_a == 0 && n_b > 0 {
                return Err(Error::InfeasibleParams(
                    "minor chains need a major node to root at".into(),
                ));
            }
            let m = int(lines);
            let k = int(line_len);
            // Upkeep: clique links, the m root links, and m(k-1) chain links.
            let upkeep = c_a * ta * (ta - one)
                + m * (c_a + c_b)
                + two * c_b * m * (k - one);
            // Major-major distances are all 1.
            let aa = a * ta * (ta - one);
            // Major-minor: a depth-l minor sits l hops from the root major
            // and l+1 from the others; both directions together weigh A+1.
            let ab = (a + one)
                * m
                * (k * (k + one) / two + (ta - one) * k * (k + rat(3, 1)) / two);
            // Minor-minor along one chain, both directions.
            let bb_same = m * (k * k * k - k) / rat(3, 1);
            // Minor-minor across chains: depths add through the root.
            let bb_cross = m * (m - one) * k * k * (k + one);
            upkeep + aa + ab + bb_same + bb_cross
        }
        CanonicalKind::LoopExample { .. } | CanonicalKind::FullClique => {
            return Err(Error::InfeasibleParams(
                "no closed form catalogued for this topology family".into(),
            ));
        }
    };
    Ok(CostValue::finite(value))
}

/// The cheaper of the two candidate optima (star vs. full bipartite over the
/// major clique) with its kind; ties go to the star.
pub fn optimal_cost(
    n_a: usize,
    n_b: usize,
    params: &GameParams,
) -> Result<(CanonicalKind, CostValue)> {
    if n_a == 0 && n_b > 0 {
        return Err(Error::InfeasibleParams(
            "the catalogued optima require at least one major node".into(),
        ));
    }
    let star = closed_form_cost(CanonicalKind::StarOnClique, n_a, n_b, params)?;
    let fb = closed_form_cost(CanonicalKind::FullBipartiteOnClique, n_a, n_b, params)?;
    Ok(if star <= fb {
        (CanonicalKind::StarOnClique, star)
    } else {
        (CanonicalKind::FullBipartiteOnClique, fb)
    })
}

/// Chain length kept stable near the root in the poor-equilibrium family:
/// `min(floor(sqrt(3 c_A)), floor(sqrt(4 c_B / 5)))`. Errors when the prices
/// are too small to sustain any chain.
pub fn poor_equilibrium_line_len(params: &GameParams) -> Result<usize> {
    let by_major = floor_sqrt(rat(3, 1) * params.major_link_price())?;
    let by_minor = floor_sqrt(rat(4, 5) * params.minor_link_price())?;
    let k = by_major.min(by_minor);
    if k < 1 {
        return Err(Error::InfeasibleParams(
            "link prices are too small to keep any minor chain stable".into(),
        ));
    }
    Ok(k as usize)
}

/// Social cost the poor-equilibrium analysis assigns to the lines-over-clique
/// family (`m` chains of length `k`), with `T_A = n_a`, `T_B = n_b = m k`.
///
/// This is the bound-side estimate the anarchy-price lower bound is built
/// from; it intentionally over-counts cross-chain congestion, so it is *not*
/// the direct count ([`closed_form_cost`] is).
pub fn lines_anarchy_cost(
    n_a: usize,
    n_b: usize,
    params: &GameParams,
) -> Result<(CostValue, usize, usize)> {
    let k = poor_equilibrium_line_len(params)?;
    if n_b == 0 || n_b % k != 0 {
        return Err(Error::InfeasibleParams(format!(
            "{n_b} minor nodes do not split into chains of length {k}"
        )));
    }
    let m = n_b / k;
    let a = params.importance();
    let c_a = params.major_link_price();
    let c_b = params.minor_link_price();
    let (ta, tb) = (int(n_a), int(n_b));
    let kk = int(k);
    let one = Rat::from_integer(1);
    let two = rat(2, 1);
    let value = ta * (ta - one) * (c_a / two + a)
        + two * c_b * tb
        + (a + one) * tb * (ta - one) * (kk + rat(3, 1)) / two
        + tb * ((a + one) * (kk + one) / two + two * kk - rat(4, 1))
        + two * tb * tb * (kk + two) * (kk + two)
        - two * int(m);
    Ok((CostValue::finite(value), k, m))
}

/// Exact social cost of the absorbed-star shape: major clique, one minor hub
/// linked to every major, all remaining minors hanging off the hub.
pub fn absorbed_star_cost(n_a: usize, n_b: usize, params: &GameParams) -> Result<CostValue> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::InfeasibleParams(
            "the absorbed-star shape needs at least one major and one minor".into(),
        ));
    }
    let a = params.importance();
    let c_a = params.major_link_price();
    let c_b = params.minor_link_price();
    let (ta, tb) = (int(n_a), int(n_b));
    let one = Rat::from_integer(1);
    let two = rat(2, 1);
    let value = ta * (ta - one) * (c_a + a)
        + ta * (c_a + c_b)
        + two * c_b * (tb - one)
        + (a + one) * ta
        + two * (a + one) * ta * (tb - one)
        + two * (tb - one)
        + two * (tb - one) * (tb - two);
    Ok(CostValue::finite(value))
}

/// Build the absorbed-star shape; the hub is the first minor node `n_a`.
pub fn build_absorbed_star(n_a: usize, n_b: usize) -> Result<Topology> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::InfeasibleParams(
            "the absorbed-star shape needs at least one major and one minor".into(),
        ));
    }
    let mut topo = Topology::with_split(n_a, n_b);
    add_major_clique(&mut topo, n_a)?;
    let hub = n_a as NodeId;
    for a in 0..n_a as NodeId {
        topo.add_link(a, hub)?;
    }
    for leaf in 1..n_b as NodeId {
        topo.add_link(hub, hub + leaf)?;
    }
    Ok(topo)
}

/// Distance saved at a chain endpoint when a `k`-node chain closes into a
/// cycle: the endpoint's summed hop count drops by `(k(k-2) + (k mod 2)) / 4`.
pub fn shortcut_gain(k: usize) -> Result<Rat> {
    if k < 2 {
        return Err(Error::InfeasibleParams(format!(
            "a chain needs at least two nodes to close, got {k}"
        )));
    }
    let k = k as i128;
    Ok(rat(k * (k - 2) + k % 2, 4))
}

/// Whether the loop construction of the given chain length sits inside its
/// stability window `(k+1)^2 < 8c < 4 (k+1)^2` (with `c` the mean link
/// price).
pub fn loop_example_feasible(line_len: usize, params: &GameParams) -> bool {
    let kp1 = int(line_len + 1);
    let eight_c = rat(8, 1) * params.mean_link_price();
    kp1 * kp1 < eight_c && eight_c < rat(4, 1) * kp1 * kp1
}

/// A bound of the form `d <= min_value  or  (d + offset)^2 <= radicand`,
/// the shape every stable-distance estimate takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SqrtBound {
    pub radicand: Rat,
    pub offset: Rat,
    pub min_value: u32,
}

impl SqrtBound {
    pub fn satisfied_by(&self, distance: u32) -> bool {
        if distance <= self.min_value {
            return true;
        }
        let shifted = Rat::from_integer(i128::from(distance)) + self.offset;
        shifted * shifted <= self.radicand
    }

    /// Largest distance the bound admits.
    pub fn max_distance(&self) -> Result<u32> {
        let root = floor_sqrt(self.radicand)?;
        let by_sqrt = Rat::from_integer(root) - self.offset;
        // floor_sqrt truncates; (root+1)^2 may still satisfy <= when the
        // radicand is a perfect square shifted by the offset's fraction, but
        // offset and radicand are exact so check the candidate directly.
        let mut best = if by_sqrt < Rat::zero() {
            0
        } else {
            by_sqrt.to_integer() as u32
        };
        while self.satisfied_by(best + 1) {
            best += 1;
        }
        Ok(best.max(self.min_value))
    }
}

/// Distance bounds every pairwise-stable topology obeys.
#[derive(Debug, Clone, Copy)]
pub struct PairwiseDistanceBounds {
    /// Between a minor node and any other node.
    pub minor_to_any: SqrtBound,
    /// Between two major nodes.
    pub major_to_major: SqrtBound,
}

pub fn pairwise_distance_bounds(params: &GameParams) -> PairwiseDistanceBounds {
    let a = params.importance();
    let one = Rat::from_integer(1);
    let two = rat(2, 1);
    PairwiseDistanceBounds {
        minor_to_any: SqrtBound {
            radicand: rat(4, 1) * params.minor_link_price(),
            offset: Rat::zero(),
            min_value: 0,
        },
        major_to_major: SqrtBound {
            radicand: (two * a - one) * (two * a - one)
                + rat(4, 1) * params.major_link_price(),
            offset: two * (a - one),
            min_value: 0,
        },
    }
}

/// Distance bounds for stable topologies when side payments are allowed.
#[derive(Debug, Clone, Copy)]
pub struct TransferDistanceBounds {
    /// Between two minor nodes.
    pub minor_to_minor: SqrtBound,
    /// From a minor node to the major clique (nearest major).
    pub minor_to_clique: SqrtBound,
}

pub fn transfer_distance_bounds(params: &GameParams, n_a: usize) -> TransferDistanceBounds {
    let a = params.importance();
    let c = params.mean_link_price();
    let an = a * int(n_a);
    TransferDistanceBounds {
        minor_to_minor: SqrtBound {
            radicand: rat(4, 1) * c,
            offset: Rat::zero(),
            min_value: 1,
        },
        minor_to_clique: SqrtBound {
            radicand: an * an + rat(4, 1) * c * an,
            offset: an,
            min_value: 2,
        },
    }
}

/// A node pair whose distance exceeds the applicable bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundViolation {
    pub pair: (NodeId, NodeId),
    pub distance: u32,
    pub which: &'static str,
}

/// Check the pairwise-stability distance bounds on a topology. Unreachable
/// pairs violate every bound.
pub fn check_pairwise_bounds(topo: &Topology, params: &GameParams) -> Vec<BoundViolation> {
    let bounds = pairwise_distance_bounds(params);
    let mut out = Vec::new();
    for u in topo.nodes() {
        let table = topo.shortest_distances(u);
        for v in topo.nodes().filter(|&v| v > u) {
            let (which, bound) = match (topo.player_type(u), topo.player_type(v)) {
                (PlayerType::TypeA, PlayerType::TypeA) => {
                    ("major-major", bounds.major_to_major)
                }
                _ => ("minor-any", bounds.minor_to_any),
            };
            match table.hop(v) {
                Some(d) if bound.satisfied_by(d) => {}
                Some(d) => out.push(BoundViolation {
                    pair: (u, v),
                    distance: d,
                    which,
                }),
                None => out.push(BoundViolation {
                    pair: (u, v),
                    distance: u32::MAX,
                    which,
                }),
            }
        }
    }
    out
}

/// Check the transfer-stability distance bounds: minor-minor distances and
/// each minor's distance to the nearest major.
pub fn check_transfer_bounds(topo: &Topology, params: &GameParams) -> Vec<BoundViolation> {
    let n_a = topo.count_of_type(PlayerType::TypeA);
    let bounds = transfer_distance_bounds(params, n_a);
    let mut out = Vec::new();
    for u in topo.nodes_of_type(PlayerType::TypeB) {
        let table = topo.shortest_distances(u);
        for v in topo.nodes_of_type(PlayerType::TypeB).filter(|&v| v > u) {
            match table.hop(v) {
                Some(d) if bounds.minor_to_minor.satisfied_by(d) => {}
                Some(d) => out.push(BoundViolation {
                    pair: (u, v),
                    distance: d,
                    which: "minor-minor",
                }),
                None => out.push(BoundViolation {
                    pair: (u, v),
                    distance: u32::MAX,
                    which: "minor-minor",
                }),
            }
        }
        if n_a > 0 {
            let nearest = topo
                .nodes_of_type(PlayerType::TypeA)
                .filter_map(|a| table.hop(a))
                .min();
            match nearest {
                Some(d) if bounds.minor_to_clique.satisfied_by(d) => {}
                Some(d) => out.push(BoundViolation {
                    pair: (u, u),
                    distance: d,
                    which: "minor-clique",
                }),
                None => out.push(BoundViolation {
                    pair: (u, u),
                    distance: u32::MAX,
                    which: "minor-clique",
                }),
            }
        }
    }
    out
}

fn major_clique_complete(topo: &Topology) -> bool {
    let majors: Vec<NodeId> = topo.nodes_of_type(PlayerType::TypeA).collect();
    majors
        .iter()
        .enumerate()
        .all(|(i, &u)| majors[i + 1..].iter().all(|&v| topo.has_link(u, v)))
}

/// Recognize the star shape: complete major clique, every minor a leaf on one
/// common major. Returns that center. With no minors, any major serves;
/// the lowest id is reported.
pub fn matches_star_on_clique(topo: &Topology) -> Option<NodeId> {
    if !major_clique_complete(topo) {
        return None;
    }
    let majors: Vec<NodeId> = topo.nodes_of_type(PlayerType::TypeA).collect();
    let minors: Vec<NodeId> = topo.nodes_of_type(PlayerType::TypeB).collect();
    let expected_clique_links = majors.len() * majors.len().saturating_sub(1) / 2;
    if topo.link_count() != expected_clique_links + minors.len() {
        return None;
    }
    if minors.is_empty() {
        return majors.first().copied();
    }
    let mut center = None;
    for &b in &minors {
        if topo.degree(b) != 1 {
            return None;
        }
        let host = *topo.neighbors(b).iter().next().expect("degree checked");
        if topo.player_type(host) != PlayerType::TypeA {
            return None;
        }
        match center {
            None => center = Some(host),
            Some(c) if c == host => {}
            Some(_) => return None,
        }
    }
    center
}

/// Recognize the bipartite overlay: complete major clique, every minor linked
/// to every major and to nothing else.
pub fn matches_full_bipartite_on_clique(topo: &Topology) -> bool {
    if !major_clique_complete(topo) {
        return false;
    }
    let n_a = topo.count_of_type(PlayerType::TypeA);
    if n_a == 0 {
        return topo.count_of_type(PlayerType::TypeB) == 0;
    }
    topo.nodes_of_type(PlayerType::TypeB).all(|b| {
        topo.degree(b) == n_a
            && topo
                .neighbors(b)
                .iter()
                .all(|&x| topo.player_type(x) == PlayerType::TypeA)
    })
}

/// Recognize the absorbed-star shape: complete major clique, one minor hub
/// linked to every major, all other minors leaves on the hub. Returns the
/// hub.
pub fn matches_absorbed_star(topo: &Topology) -> Option<NodeId> {
    if !major_clique_complete(topo) {
        return None;
    }
    let majors: Vec<NodeId> = topo.nodes_of_type(PlayerType::TypeA).collect();
    let minors: Vec<NodeId> = topo.nodes_of_type(PlayerType::TypeB).collect();
    if majors.is_empty() || minors.is_empty() {
        return None;
    }
    let hub = *minors
        .iter()
        .max_by_key(|&&b| topo.degree(b))
        .expect("minors nonempty");
    if topo.degree(hub) != majors.len() + minors.len() - 1 {
        return None;
    }
    let expected_links =
        majors.len() * (majors.len() - 1) / 2 + majors.len() + minors.len() - 1;
    if topo.link_count() != expected_links {
        return None;
    }
    for &a in &majors {
        if !topo.has_link(a, hub) {
            return None;
        }
    }
    for &b in &minors {
        if b == hub {
            continue;
        }
        if topo.degree(b) != 1 || !topo.has_link(b, hub) {
            return None;
        }
    }
    Some(hub)
}

/// How close the cheapest stable topology and the worst catalogued stable
/// topology sit to the optimum.
#[derive(Debug, Clone)]
pub struct PriceReport {
    /// Social cost of the optimum used as the denominator.
    pub optimum: CostValue,
    /// Catalogue family of that optimum, when it is one.
    pub optimum_kind: Option<CanonicalKind>,
    /// Exact best-stable / optimum ratio, when established.
    pub stability_ratio: Option<Rat>,
    /// Witness explaining why the candidate optimum is unstable, if it is.
    pub optimum_witness: Option<DeviationWitness>,
    /// Exact worst-known-stable / optimum ratio (a lower bound on the true
    /// anarchy price in closed-form mode).
    pub anarchy_ratio: Option<Rat>,
    /// Chain geometry `(line_len, lines)` behind the anarchy figure, when one
    /// applies.
    pub poor_chains: Option<(usize, usize)>,
}

/// How [`stability_prices`] establishes its ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceMode {
    /// Exhaustive enumeration; exact on small node counts.
    SmallN,
    /// Closed forms plus a direct stability check of the candidate optimum.
    ClosedForm,
}

/// Compute efficiency prices for a node split.
///
/// In `SmallN` mode every topology is enumerated, so both ratios are exact.
/// In `ClosedForm` mode the candidate optimum is checked for stability
/// directly (ratio 1 when it holds), and the anarchy ratio comes from the
/// poor-equilibrium chain family, which requires the chain length to divide
/// the minor count.
pub fn stability_prices(
    n_a: usize,
    n_b: usize,
    params: &GameParams,
    transfers: bool,
    mode: PriceMode,
) -> Result<PriceReport> {
    match mode {
        PriceMode::SmallN => {
            let report = crate::stability::enumerate_stable(n_a, n_b, params, transfers)?;
            let best = &report.optimum_example;
            let optimum_kind = if matches_star_on_clique(best).is_some() {
                Some(CanonicalKind::StarOnClique)
            } else if matches_full_bipartite_on_clique(best) {
                Some(CanonicalKind::FullBipartiteOnClique)
            } else if best.link_count() == best.node_count() * (best.node_count() - 1) / 2 {
                Some(CanonicalKind::FullClique)
            } else {
                None
            };
            Ok(PriceReport {
                optimum: report.optimum,
                optimum_kind,
                stability_ratio: report.price_of_stability(),
                optimum_witness: None,
                anarchy_ratio: report.price_of_anarchy(),
                poor_chains: None,
            })
        }
        PriceMode::ClosedForm => {
            let (kind, opt_cost) = optimal_cost(n_a, n_b, params)?;
            let built = build(kind, n_a, n_b)?;
            let witness = if transfers {
                transfer_witness(&built, params)
            } else {
                pairwise_witness(&built, params)
            };
            let stability_ratio = if witness.is_none() {
                Some(Rat::from_integer(1))
            } else {
                None
            };
            let (anarchy_ratio, poor_chains) = match lines_anarchy_cost(n_a, n_b, params) {
                Ok((poor, k, m)) => (cost_ratio(poor, opt_cost), Some((k, m))),
                Err(_) => (None, None),
            };
            Ok(PriceReport {
                optimum: opt_cost,
                optimum_kind: Some(kind),
                stability_ratio,
                optimum_witness: witness,
                anarchy_ratio,
                poor_chains,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::social_cost;

    fn params(c_a: (i128, i128), c_b: (i128, i128), a: (i128, i128)) -> GameParams {
        GameParams::new(rat(c_a.0, c_a.1), rat(c_b.0, c_b.1), rat(a.0, a.1)).unwrap()
    }

    #[test]
    fn star_closed_form_matches_direct_count() {
        let p = params((2, 1), (2, 1), (4, 1));
        let topo = build(CanonicalKind::StarOnClique, 3, 5).unwrap();
        assert_eq!(topo.link_count(), 3 + 5);
        let closed = closed_form_cost(CanonicalKind::StarOnClique, 3, 5, &p).unwrap();
        assert_eq!(closed, CostValue::finite(rat(221, 1)));
        assert_eq!(social_cost(&topo, &p), closed);
        // Degenerate star: one major, one minor, a single link.
        let p2 = params((3, 2), (5, 2), (4, 1));
        let tiny = closed_form_cost(CanonicalKind::StarOnClique, 1, 1, &p2).unwrap();
        assert_eq!(
            tiny,
            social_cost(&build(CanonicalKind::StarOnClique, 1, 1).unwrap(), &p2)
        );
        // 2c + A + 1 with c the mean price.
        assert_eq!(tiny, CostValue::finite(rat(9, 1)));
    }

    #[test]
    fn bipartite_closed_form_matches_direct_count() {
        let p = params((2, 1), (2, 1), (4, 1));
        let topo = build(CanonicalKind::FullBipartiteOnClique, 3, 5).unwrap();
        let closed =
            closed_form_cost(CanonicalKind::FullBipartiteOnClique, 3, 5, &p).unwrap();
        assert_eq!(closed, CostValue::finite(rat(211, 1)));
        assert_eq!(social_cost(&topo, &p), closed);
    }

    #[test]
    fn chain_closed_form_matches_direct_count_across_a_grid() {
        for (n_a, lines, k) in [(1, 1, 1), (2, 2, 2), (3, 2, 3), (2, 3, 1), (4, 1, 4)] {
            let p = params((3, 2), (3, 1), (4, 1));
            let kind = CanonicalKind::LinesOnClique {
                lines,
                line_len: k,
            };
            let n_b = lines * k;
            let topo = build(kind, n_a, n_b).unwrap();
            let closed = closed_form_cost(kind, n_a, n_b, &p).unwrap();
            assert_eq!(
                social_cost(&topo, &p),
                closed,
                "mismatch at n_a={n_a} lines={lines} k={k}"
            );
        }
    }

    #[test]
    fn absorbed_star_cost_matches_its_builder() {
        let p = params((3, 2), (3, 2), (2, 1));
        let topo = build_absorbed_star(2, 5).unwrap();
        let closed = absorbed_star_cost(2, 5, &p).unwrap();
        assert_eq!(closed, CostValue::finite(rat(111, 1)));
        assert_eq!(social_cost(&topo, &p), closed);
        assert_eq!(matches_absorbed_star(&topo), Some(2));
    }

    #[test]
    fn optimum_switches_from_bipartite_to_star_as_links_get_pricey() {
        // Importance 4: the threshold mean price is (A+1)/2 = 5/2.
        let cheap = params((2, 1), (2, 1), (4, 1));
        let (kind, _) = optimal_cost(3, 5, &cheap).unwrap();
        assert_eq!(kind, CanonicalKind::FullBipartiteOnClique);
        let pricey = params((3, 1), (3, 1), (4, 1));
        let (kind, cost) = optimal_cost(3, 5, &pricey).unwrap();
        assert_eq!(kind, CanonicalKind::StarOnClique);
        assert_eq!(
            cost,
            closed_form_cost(CanonicalKind::StarOnClique, 3, 5, &pricey).unwrap()
        );
    }

    #[test]
    fn poor_equilibrium_chain_length_tracks_prices() {
        // Uniform price c: the minor-side root dominates, floor(sqrt(4c/5)).
        for (c, expect) in [(4, 1), (9, 2), (16, 3), (25, 4)] {
            let p = GameParams::uniform(rat(c, 1), rat(26, 1)).unwrap();
            assert_eq!(poor_equilibrium_line_len(&p).unwrap(), expect);
        }
        // Tiny prices cannot sustain a chain.
        let tiny = GameParams::uniform(rat(1, 4), rat(2, 1)).unwrap();
        assert!(poor_equilibrium_line_len(&tiny).is_err());
    }

    #[test]
    fn shortcut_gain_matches_path_versus_cycle_hand_counts() {
        assert_eq!(shortcut_gain(2).unwrap(), rat(0, 1));
        assert_eq!(shortcut_gain(4).unwrap(), rat(2, 1));
        assert_eq!(shortcut_gain(5).unwrap(), rat(4, 1));
        assert!(shortcut_gain(1).is_err());
    }

    #[test]
    fn loop_window_accepts_the_reference_point() {
        let p = GameParams::uniform(rat(8, 1), rat(9, 1)).unwrap();
        assert!(loop_example_feasible(5, &p)); // 36 < 64 < 144
        assert!(!loop_example_feasible(2, &p)); // 8c = 64 >= 4*9
        assert!(!loop_example_feasible(8, &p)); // 81 > 64
    }

    #[test]
    fn recognizers_accept_their_builders_and_reject_perturbations() {
        let star = build(CanonicalKind::StarOnClique, 3, 4).unwrap();
        assert_eq!(matches_star_on_clique(&star), Some(0));
        assert!(!matches_full_bipartite_on_clique(&star));
        assert_eq!(matches_absorbed_star(&star), None);

        let fb = build(CanonicalKind::FullBipartiteOnClique, 3, 4).unwrap();
        assert!(matches_full_bipartite_on_clique(&fb));
        assert_eq!(matches_star_on_clique(&fb), None);

        // Move one leaf to a different major: no longer a star.
        let mut bent = star.clone();
        bent.remove_link(0, 4).unwrap();
        bent.add_link(1, 4).unwrap();
        assert_eq!(matches_star_on_clique(&bent), None);

        // A minor-minor link breaks the bipartite shape.
        let mut fb_plus = fb.clone();
        fb_plus.add_link(3, 4).unwrap();
        assert!(!matches_full_bipartite_on_clique(&fb_plus));

        // Broken clique is rejected everywhere.
        let mut cracked = star;
        cracked.remove_link(1, 2).unwrap();
        assert_eq!(matches_star_on_clique(&cracked), None);
    }

    #[test]
    fn loop_builder_closes_the_cycle() {
        let topo = build(CanonicalKind::LoopExample { line_len: 5 }, 2, 5).unwrap();
        assert_eq!(topo.link_count(), 1 + 1 + 4 + 1);
        assert!(topo.has_link(0, 2));
        assert!(topo.has_link(1, 6));
        // Every node sits on the single cycle: all degrees are 2.
        for node in topo.nodes() {
            assert_eq!(topo.degree(node), 2);
        }
    }

    #[test]
    fn minor_distance_bound_certifies_cliques_and_flags_chains() {
        let p = params((2, 1), (2, 1), (4, 1));
        let bounds = pairwise_distance_bounds(&p);
        // 4 c_B = 8: distances 1, 2 pass, 3 fails.
        assert!(bounds.minor_to_any.satisfied_by(2));
        assert!(!bounds.minor_to_any.satisfied_by(3));
        assert_eq!(bounds.minor_to_any.max_distance().unwrap(), 2);
        // Major-major at c_A < A - 1/4 forces the clique.
        assert_eq!(bounds.major_to_major.max_distance().unwrap(), 1);

        let star = build(CanonicalKind::StarOnClique, 2, 3).unwrap();
        assert!(check_pairwise_bounds(&star, &p).is_empty());

        let chain = build(
            CanonicalKind::LinesOnClique {
                lines: 1,
                line_len: 4,
            },
            1,
            4,
        )
        .unwrap();
        let violations = check_pairwise_bounds(&chain, &p);
        assert!(!violations.is_empty());
        assert!(violations.iter().all(|v| v.which == "minor-any"));
    }

    #[test]
    fn transfer_bounds_match_the_reference_example() {
        let p = GameParams::uniform(rat(3, 1), rat(2, 1)).unwrap();
        let bounds = transfer_distance_bounds(&p, 5);
        // Importance 2 with five majors: (d + 10)^2 <= 100 + 120 caps d at 4.
        assert_eq!(bounds.minor_to_clique.max_distance().unwrap(), 4);
        assert!(bounds.minor_to_clique.satisfied_by(4));
        assert!(!bounds.minor_to_clique.satisfied_by(5));
        // Minor-minor: d <= 1 or d^2 <= 12.
        assert!(bounds.minor_to_minor.satisfied_by(3));
        assert!(!bounds.minor_to_minor.satisfied_by(4));
    }

    #[test]
    fn closed_form_price_report_certifies_the_large_optimum() {
        let p = GameParams::uniform(rat(2, 1), rat(4, 1)).unwrap();
        let report = stability_prices(3, 12, &p, true, PriceMode::ClosedForm).unwrap();
        assert_eq!(report.stability_ratio, Some(rat(1, 1)));
        assert!(report.optimum_witness.is_none());
        let (k, m) = report.poor_chains.unwrap();
        assert_eq!(k, 1); // floor(sqrt(4 * 2 / 5)) = 1 at uniform price 2
        assert_eq!(m, 12);
        assert!(report.anarchy_ratio.unwrap() > rat(1, 1));
    }
}
