//! Text formats: the JSON network file and the comma-separated lists taken by
//! the command line.
//!
//! Network file:
//!
//! ```json
//! { "M": 2, "sigma2": 0.1, "source_power": 10.0, "relay_powers": [10.0, 10.0],
//!   "edges": [ {"a": "s", "b": 1, "gain": 1.0}, {"a": 1, "b": "t", "gain": 1.0} ] }
//! ```
//!
//! Endpoints are `"s"`, `"t"` or a 1-based relay index. Unknown keys are
//! rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Edge, NodeId, PowerBudget, RelayNetwork};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    #[serde(rename = "M")]
    m: usize,
    sigma2: f64,
    source_power: f64,
    relay_powers: Vec<f64>,
    edges: Vec<EdgeEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    a: Endpoint,
    b: Endpoint,
    gain: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Endpoint {
    Relay(usize),
    Terminal(String),
}

impl Endpoint {
    fn to_node(&self, index: usize, side: &str) -> Result<NodeId> {
        match self {
            Endpoint::Relay(i) => Ok(NodeId::Relay(*i)),
            Endpoint::Terminal(s) if s == "s" => Ok(NodeId::Source),
            Endpoint::Terminal(s) if s == "t" => Ok(NodeId::Destination),
            Endpoint::Terminal(s) => Err(Error::validation(
                format!("edges[{index}].{side}"),
                format!("unknown endpoint `{s}` (expected \"s\", \"t\" or a relay index)"),
            )),
        }
    }

    fn from_node(node: NodeId) -> Self {
        match node {
            NodeId::Source => Endpoint::Terminal("s".into()),
            NodeId::Destination => Endpoint::Terminal("t".into()),
            NodeId::Relay(i) => Endpoint::Relay(i),
        }
    }
}

/// Parses and validates a JSON network description.
pub fn load_network(text: &str) -> Result<RelayNetwork> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.relay_powers.len() != file.m {
        return Err(Error::validation(
            "relay_powers",
            format!("has {} entries, expected M = {}", file.relay_powers.len(), file.m),
        ));
    }
    let mut edges = Vec::with_capacity(file.edges.len());
    for (k, e) in file.edges.iter().enumerate() {
        edges.push(Edge {
            a: e.a.to_node(k, "a")?,
            b: e.b.to_node(k, "b")?,
            gain: e.gain,
        });
    }
    RelayNetwork::from_edges(
        file.m,
        edges,
        &PowerBudget::per_relay(file.source_power, file.relay_powers, file.sigma2),
    )
}

/// Serializes a network in the format read by [`load_network`].
pub fn save_network(net: &RelayNetwork) -> String {
    let file = NetworkFile {
        m: net.relays(),
        sigma2: net.noise_variance(),
        source_power: net.source_power(),
        relay_powers: net.relay_powers().to_vec(),
        edges: net
            .edges()
            .into_iter()
            .map(|e| EdgeEntry {
                a: Endpoint::from_node(e.a),
                b: Endpoint::from_node(e.b),
                gain: e.gain,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("network serializes")
}

fn items(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
}

/// Parses an amplification vector written as numbers separated by commas
/// and/or whitespace.
pub fn parse_beta_list(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (k, item) in items(text).enumerate() {
        let v: f64 = item
            .parse()
            .map_err(|_| Error::List(format!("entry {k} `{item}` is not a number")))?;
        if !v.is_finite() {
            return Err(Error::List(format!("entry {k} `{item}` is not finite")));
        }
        out.push(v);
    }
    Ok(out)
}

/// Parses a list of relay counts. Accepts integers and integral exponent
/// forms such as `1e4`.
pub fn parse_m_list(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (k, item) in items(text).enumerate() {
        let m = match item.parse::<usize>() {
            Ok(m) => m,
            Err(_) => {
                let v: f64 = item
                    .parse()
                    .map_err(|_| Error::List(format!("entry {k} `{item}` is not a count")))?;
                if !(v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= 1e15) {
                    return Err(Error::List(format!("entry {k} `{item}` is not a count")));
                }
                v as usize
            }
        };
        if m == 0 {
            return Err(Error::List(format!("entry {k}: relay count must be positive")));
        }
        out.push(m);
    }
    if out.is_empty() {
        return Err(Error::List("empty relay-count list".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_type_a, build_type_b, TopologyGains};

    #[test]
    fn round_trip_type_a() {
        let net = build_type_a(2, &TopologyGains::unity(2), &PowerBudget::shared(1.0, 2.0, 0.5)).unwrap();
        let text = save_network(&net);
        assert_eq!(load_network(&text).unwrap(), net);
    }

    #[test]
    fn reads_example_file() {
        let text = r#"{ "M": 2, "sigma2": 0.1, "source_power": 10, "relay_powers": [10, 10],
            "edges": [ {"a": "s", "b": 1, "gain": 1}, {"a": "s", "b": 2, "gain": 0.1},
                       {"a": 1, "b": "t", "gain": 1}, {"a": 2, "b": "t", "gain": 1} ] }"#;
        let net = load_network(text).unwrap();
        assert_eq!(net.relays(), 2);
        assert_eq!(net.gain(NodeId::Relay(2), NodeId::Source), 0.1);
        assert!(!net.has_edge(NodeId::Source, NodeId::Destination));
    }

    #[test]
    fn zero_noise_rejected() {
        let text = r#"{ "M": 0, "sigma2": 0, "source_power": 1, "relay_powers": [], "edges": [] }"#;
        let err = load_network(text).unwrap_err();
        assert_eq!(err.to_string(), "invalid network: noise_variance must be positive");
    }

    #[test]
    fn asymmetric_gains_rejected() {
        let text = r#"{ "M": 2, "sigma2": 1, "source_power": 1, "relay_powers": [1, 1],
            "edges": [ {"a": 1, "b": 2, "gain": 0.5}, {"a": 2, "b": 1, "gain": 0.7} ] }"#;
        assert!(matches!(load_network(text), Err(Error::Validation { .. })));
    }

    #[test]
    fn unknown_keys_and_syntax_errors() {
        let text = r#"{ "M": 0, "sigma2": 1, "source_power": 1, "relay_powers": [], "edges": [], "extra": 1 }"#;
        assert!(matches!(load_network(text), Err(Error::Parse { .. })));
        let text = "{ \"M\": 0,\n  \"sigma2\": }";
        match load_network(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let text = r#"{ "M": 1, "sigma2": 1, "source_power": 1, "relay_powers": [1],
            "edges": [ {"a": "x", "b": 1, "gain": 1} ] }"#;
        assert!(matches!(load_network(text), Err(Error::Validation { .. })));
    }

    #[test]
    fn relay_power_count_checked() {
        let text = r#"{ "M": 2, "sigma2": 1, "source_power": 1, "relay_powers": [1], "edges": [] }"#;
        let err = load_network(text).unwrap_err();
        assert!(err.to_string().contains("relay_powers"));
    }

    #[test]
    fn lists() {
        assert_eq!(parse_beta_list("0.995,0.225").unwrap(), vec![0.995, 0.225]);
        assert_eq!(parse_beta_list(" 1, 2 3\n").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_beta_list("1,x").is_err());
        assert!(parse_beta_list("inf").is_err());
        assert_eq!(parse_m_list("10,100,1e3").unwrap(), vec![10, 100, 1000]);
        assert!(parse_m_list("").is_err());
        assert!(parse_m_list("0").is_err());
        assert!(parse_m_list("1.5").is_err());
    }

    proptest::proptest! {
        #[test]
        fn save_load_identity(m in 1usize..6, seed in 0u64..1000, chain in proptest::bool::ANY) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let gains = TopologyGains::sampled(m, -2.0, 2.0, &mut rng);
            let powers = PowerBudget::per_relay(1.5, (0..m).map(|i| i as f64 * 0.3).collect(), 0.25);
            let net = if chain { build_type_b(m, &gains, &powers) } else { build_type_a(m, &gains, &powers) }.unwrap();
            proptest::prop_assert_eq!(load_network(&save_network(&net)).unwrap(), net);
        }

        #[test]
        fn loader_never_panics(text in ".{0,200}") {
            let _ = load_network(&text);
            let _ = parse_beta_list(&text);
            let _ = parse_m_list(&text);
        }
    }
}
