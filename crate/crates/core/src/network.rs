//! Relay network model: a source `s`, a destination `t` and `M` relays joined
//! by undirected links with real amplitude gains.
//!
//! Links are stored in three groups so that very large regular topologies stay
//! compact: source links `h_si`, destination links `h_it`, and relay-relay
//! links. An absent link contributes a zero gain but is distinguished from a
//! present link of gain zero, because neighbor sets (and with them the cut-set
//! bounds) depend on presence.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// A node of the relay network. Relay indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeId {
    Source,
    Relay(usize),
    Destination,
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Source => f.write_str("s"),
            NodeId::Destination => f.write_str("t"),
            NodeId::Relay(i) => write!(f, "{i}"),
        }
    }
}

/// One undirected link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub gain: f64,
}

/// How the relay-relay links are arranged. Drives the choice of path engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    /// No relay-relay links at all.
    Parallel,
    /// Every relay-relay link joins consecutive relays `j` and `j+1`.
    Chain,
    General,
}

/// Power budgets for a network.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerBudget {
    pub source: f64,
    pub relays: RelayPowers,
    pub noise_variance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RelayPowers {
    Shared(f64),
    PerRelay(Vec<f64>),
}

impl PowerBudget {
    pub fn shared(source: f64, relay: f64, noise_variance: f64) -> Self {
        PowerBudget {
            source,
            relays: RelayPowers::Shared(relay),
            noise_variance,
        }
    }

    pub fn per_relay(source: f64, relays: Vec<f64>, noise_variance: f64) -> Self {
        PowerBudget {
            source,
            relays: RelayPowers::PerRelay(relays),
            noise_variance,
        }
    }

    fn relay_vec(&self, m: usize) -> Result<Vec<f64>> {
        match &self.relays {
            RelayPowers::Shared(p) => Ok(vec![*p; m]),
            RelayPowers::PerRelay(v) if v.len() == m => Ok(v.clone()),
            RelayPowers::PerRelay(v) => Err(Error::validation(
                "relay_powers",
                format!("has {} entries, expected {m}", v.len()),
            )),
        }
    }
}

/// Gains for the canonical Type A / Type B topologies.
///
/// `chain[j-1]` is the gain of link `(j, j+1)` and is ignored by Type A.
#[derive(Clone, Debug, PartialEq)]
pub struct TopologyGains {
    pub direct: f64,
    pub source: Vec<f64>,
    pub dest: Vec<f64>,
    pub chain: Vec<f64>,
}

impl TopologyGains {
    pub fn unity(m: usize) -> Self {
        TopologyGains {
            direct: 1.0,
            source: vec![1.0; m],
            dest: vec![1.0; m],
            chain: vec![1.0; m.saturating_sub(1)],
        }
    }

    /// Every gain drawn uniformly from `[lo, hi]`.
    pub fn sampled<R: Rng + ?Sized>(m: usize, lo: f64, hi: f64, rng: &mut R) -> Self {
        let mut draw = || if hi > lo { rng.gen_range(lo..=hi) } else { lo };
        let direct = draw();
        let source = (0..m).map(|_| draw()).collect();
        let dest = (0..m).map(|_| draw()).collect();
        let chain = (0..m.saturating_sub(1)).map(|_| draw()).collect();
        TopologyGains {
            direct,
            source,
            dest,
            chain,
        }
    }

    fn check(&self, m: usize, with_chain: bool) -> Result<()> {
        if self.source.len() != m {
            return Err(Error::validation("gains.source", format!("expected {m} entries")));
        }
        if self.dest.len() != m {
            return Err(Error::validation("gains.dest", format!("expected {m} entries")));
        }
        if with_chain && self.chain.len() != m.saturating_sub(1) {
            return Err(Error::validation(
                "gains.chain",
                format!("expected {} entries", m.saturating_sub(1)),
            ));
        }
        Ok(())
    }
}

/// An `(M+2)`-node Gaussian relay network. Immutable once built.
#[derive(Clone, Debug)]
pub struct RelayNetwork {
    relays: usize,
    direct: Option<f64>,
    source_links: Vec<Option<f64>>,
    dest_links: Vec<Option<f64>>,
    /// Relay-relay links keyed by 0-based `(lo, hi)`.
    relay_links: BTreeMap<(usize, usize), f64>,
    /// 0-based relay adjacency restricted to relay-relay links.
    adjacency: Vec<Vec<(usize, f64)>>,
    topology: Topology,
    /// `chain[j]` is the link between 0-based relays `j` and `j+1`; only for
    /// `Parallel` and `Chain` topologies.
    chain: Vec<Option<f64>>,
    source_power: f64,
    relay_powers: Vec<f64>,
    noise_variance: f64,
}

impl PartialEq for RelayNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.relays == other.relays
            && self.direct == other.direct
            && self.source_links == other.source_links
            && self.dest_links == other.dest_links
            && self.relay_links == other.relay_links
            && self.source_power == other.source_power
            && self.relay_powers == other.relay_powers
            && self.noise_variance == other.noise_variance
    }
}

impl RelayNetwork {
    /// Builds a network from an undirected edge list. A pair may be listed in
    /// both orientations provided the gains agree.
    pub fn from_edges<I>(m: usize, edges: I, powers: &PowerBudget) -> Result<Self>
    where
        I: IntoIterator<Item = Edge>,
    {
        let relay_powers = powers.relay_vec(m)?;
        let mut net = RelayNetwork {
            relays: m,
            direct: None,
            source_links: vec![None; m],
            dest_links: vec![None; m],
            relay_links: BTreeMap::new(),
            adjacency: Vec::new(),
            topology: Topology::Parallel,
            chain: Vec::new(),
            source_power: powers.source,
            relay_powers,
            noise_variance: powers.noise_variance,
        };
        for edge in edges {
            net.insert(edge)?;
        }
        net.finish()
    }

    /// A network with no relays: only the direct link `s`–`t`.
    pub fn direct_link(gain: f64, source_power: f64, noise_variance: f64) -> Result<Self> {
        Self::from_edges(
            0,
            [Edge {
                a: NodeId::Source,
                b: NodeId::Destination,
                gain,
            }],
            &PowerBudget::per_relay(source_power, Vec::new(), noise_variance),
        )
    }

    fn insert(&mut self, edge: Edge) -> Result<()> {
        let Edge { a, b, gain } = edge;
        let field = format!("edges[{a}-{b}]");
        if !gain.is_finite() {
            return Err(Error::validation(field, "gain must be finite"));
        }
        for node in [a, b] {
            if let NodeId::Relay(i) = node {
                if i == 0 || i > self.relays {
                    return Err(Error::validation(
                        field,
                        format!("relay index {i} outside 1..={}", self.relays),
                    ));
                }
            }
        }
        if a == b {
            return Err(Error::validation(field, "self-loops are not allowed"));
        }
        let slot = match (a, b) {
            (NodeId::Source, NodeId::Destination) | (NodeId::Destination, NodeId::Source) => {
                &mut self.direct
            }
            (NodeId::Source, NodeId::Relay(i)) | (NodeId::Relay(i), NodeId::Source) => {
                &mut self.source_links[i - 1]
            }
            (NodeId::Destination, NodeId::Relay(i)) | (NodeId::Relay(i), NodeId::Destination) => {
                &mut self.dest_links[i - 1]
            }
            (NodeId::Relay(i), NodeId::Relay(j)) => {
                let key = (i.min(j) - 1, i.max(j) - 1);
                return match self.relay_links.insert(key, gain) {
                    Some(prev) if prev != gain => Err(Error::validation(
                        field,
                        format!("asymmetric gains {prev} and {gain}; links are bidirectional"),
                    )),
                    _ => Ok(()),
                };
            }
            _ => unreachable!("self-loops rejected above"),
        };
        match slot.replace(gain) {
            Some(prev) if prev != gain => Err(Error::validation(
                field,
                format!("asymmetric gains {prev} and {gain}; links are bidirectional"),
            )),
            _ => Ok(()),
        }
    }

    fn finish(mut self) -> Result<Self> {
        if !(self.noise_variance > 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::validation("noise_variance", "must be positive"));
        }
        if !(self.source_power > 0.0 && self.source_power.is_finite()) {
            return Err(Error::validation("source_power", "must be positive"));
        }
        if let Some(i) = self
            .relay_powers
            .iter()
            .position(|p| !(*p >= 0.0 && p.is_finite()))
        {
            return Err(Error::validation(
                format!("relay_powers[{i}]"),
                "must be non-negative",
            ));
        }

        let m = self.relays;
        self.adjacency = vec![Vec::new(); m];
        for (&(i, j), &g) in &self.relay_links {
            self.adjacency[i].push((j, g));
            self.adjacency[j].push((i, g));
        }
        self.topology = if self.relay_links.is_empty() {
            Topology::Parallel
        } else if self.relay_links.keys().all(|&(i, j)| j == i + 1) {
            Topology::Chain
        } else {
            Topology::General
        };
        if self.topology != Topology::General {
            let mut chain = vec![None; m.saturating_sub(1)];
            for (&(i, _), &g) in &self.relay_links {
                chain[i] = Some(g);
            }
            self.chain = chain;
        }
        Ok(self)
    }

    pub fn relays(&self) -> usize {
        self.relays
    }

    pub fn source_power(&self) -> f64 {
        self.source_power
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn relay_powers(&self) -> &[f64] {
        &self.relay_powers
    }

    /// `P_i` for 1-based relay `i`.
    pub fn relay_power(&self, i: usize) -> f64 {
        self.relay_powers[i - 1]
    }

    /// Source-to-noise ratio `P_s / σ²`.
    pub fn snr(&self) -> f64 {
        self.source_power / self.noise_variance
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Gain of the link `a`–`b`, zero when absent.
    pub fn gain(&self, a: NodeId, b: NodeId) -> f64 {
        self.link(a, b).unwrap_or(0.0)
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.link(a, b).is_some()
    }

    /// Gain of the link `a`–`b`, `None` when there is no such link.
    pub fn link(&self, a: NodeId, b: NodeId) -> Option<f64> {
        let in_range = |i: usize| i >= 1 && i <= self.relays;
        match (a, b) {
            (NodeId::Source, NodeId::Destination) | (NodeId::Destination, NodeId::Source) => {
                self.direct
            }
            (NodeId::Source, NodeId::Relay(i)) | (NodeId::Relay(i), NodeId::Source)
                if in_range(i) =>
            {
                self.source_links[i - 1]
            }
            (NodeId::Destination, NodeId::Relay(i)) | (NodeId::Relay(i), NodeId::Destination)
                if in_range(i) =>
            {
                self.dest_links[i - 1]
            }
            (NodeId::Relay(i), NodeId::Relay(j)) if in_range(i) && in_range(j) && i != j => self
                .relay_links
                .get(&(i.min(j) - 1, i.max(j) - 1))
                .copied(),
            _ => None,
        }
    }

    /// `h_st`, zero when there is no direct link.
    pub fn direct_gain(&self) -> f64 {
        self.direct.unwrap_or(0.0)
    }

    pub(crate) fn source_links(&self) -> &[Option<f64>] {
        &self.source_links
    }

    pub(crate) fn dest_links(&self) -> &[Option<f64>] {
        &self.dest_links
    }

    pub(crate) fn adjacency(&self) -> &[Vec<(usize, f64)>] {
        &self.adjacency
    }

    /// Chain links between consecutive 0-based relays; empty for general graphs.
    pub(crate) fn chain_links(&self) -> &[Option<f64>] {
        &self.chain
    }

    pub(crate) fn relay_link(&self, i0: usize, j0: usize) -> Option<f64> {
        self.relay_links.get(&(i0.min(j0), i0.max(j0))).copied()
    }

    /// `S_s`: relays adjacent to the source, 1-based and ascending.
    pub fn source_neighbors(&self) -> Vec<usize> {
        present(&self.source_links)
    }

    /// `S_t`: relays adjacent to the destination, 1-based and ascending.
    pub fn dest_neighbors(&self) -> Vec<usize> {
        present(&self.dest_links)
    }

    pub fn degree(&self, node: NodeId) -> usize {
        let direct = usize::from(self.direct.is_some());
        match node {
            NodeId::Source => direct + self.source_links.iter().flatten().count(),
            NodeId::Destination => direct + self.dest_links.iter().flatten().count(),
            NodeId::Relay(i) => {
                usize::from(self.source_links[i - 1].is_some())
                    + usize::from(self.dest_links[i - 1].is_some())
                    + self.adjacency[i - 1].len()
            }
        }
    }

    pub fn edge_count(&self) -> usize {
        usize::from(self.direct.is_some())
            + self.source_links.iter().flatten().count()
            + self.dest_links.iter().flatten().count()
            + self.relay_links.len()
    }

    /// All links in a canonical order: `s–t`, `s–i`, `i–t`, then relay pairs.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count());
        if let Some(g) = self.direct {
            out.push(Edge {
                a: NodeId::Source,
                b: NodeId::Destination,
                gain: g,
            });
        }
        for (i, g) in self.source_links.iter().enumerate() {
            if let Some(g) = g {
                out.push(Edge {
                    a: NodeId::Source,
                    b: NodeId::Relay(i + 1),
                    gain: *g,
                });
            }
        }
        for (i, g) in self.dest_links.iter().enumerate() {
            if let Some(g) = g {
                out.push(Edge {
                    a: NodeId::Relay(i + 1),
                    b: NodeId::Destination,
                    gain: *g,
                });
            }
        }
        for (&(i, j), &g) in &self.relay_links {
            out.push(Edge {
                a: NodeId::Relay(i + 1),
                b: NodeId::Relay(j + 1),
                gain: g,
            });
        }
        out
    }

    /// True when every gain is non-negative.
    pub fn gains_nonnegative(&self) -> bool {
        self.edges().iter().all(|e| e.gain >= 0.0)
    }
}

fn present(links: &[Option<f64>]) -> Vec<usize> {
    links
        .iter()
        .enumerate()
        .filter_map(|(i, g)| g.map(|_| i + 1))
        .collect()
}

fn star_edges(m: usize, gains: &TopologyGains) -> Vec<Edge> {
    let mut edges = Vec::with_capacity(2 * m + 1);
    edges.push(Edge {
        a: NodeId::Source,
        b: NodeId::Destination,
        gain: gains.direct,
    });
    for i in 1..=m {
        edges.push(Edge {
            a: NodeId::Source,
            b: NodeId::Relay(i),
            gain: gains.source[i - 1],
        });
        edges.push(Edge {
            a: NodeId::Relay(i),
            b: NodeId::Destination,
            gain: gains.dest[i - 1],
        });
    }
    edges
}

/// Type A: `s`–`t` plus `s`–`i`–`t` for every relay, no relay-relay links.
pub fn build_type_a(m: usize, gains: &TopologyGains, powers: &PowerBudget) -> Result<RelayNetwork> {
    if m == 0 {
        return Err(Error::NoRelays);
    }
    gains.check(m, false)?;
    RelayNetwork::from_edges(m, star_edges(m, gains), powers)
}

/// Type B: Type A plus the chain links `(j, j+1)`.
pub fn build_type_b(m: usize, gains: &TopologyGains, powers: &PowerBudget) -> Result<RelayNetwork> {
    if m == 0 {
        return Err(Error::NoRelays);
    }
    gains.check(m, true)?;
    let mut edges = star_edges(m, gains);
    edges.extend((1..m).map(|j| Edge {
        a: NodeId::Relay(j),
        b: NodeId::Relay(j + 1),
        gain: gains.chain[j - 1],
    }));
    RelayNetwork::from_edges(m, edges, powers)
}

/// Two parallel relays and no direct link.
#[allow(clippy::too_many_arguments)]
pub fn build_diamond(
    h_s1: f64,
    h_s2: f64,
    h_1t: f64,
    h_2t: f64,
    source_power: f64,
    p1: f64,
    p2: f64,
    noise_variance: f64,
) -> Result<RelayNetwork> {
    let e = |a, b, gain| Edge { a, b, gain };
    RelayNetwork::from_edges(
        2,
        [
            e(NodeId::Source, NodeId::Relay(1), h_s1),
            e(NodeId::Source, NodeId::Relay(2), h_s2),
            e(NodeId::Relay(1), NodeId::Destination, h_1t),
            e(NodeId::Relay(2), NodeId::Destination, h_2t),
        ],
        &PowerBudget::per_relay(source_power, vec![p1, p2], noise_variance),
    )
}
