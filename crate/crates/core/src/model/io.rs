//! JSON persistence for instances.

use serde::{Deserialize, Serialize};

use super::{AdversaryLedger, RigInstance, RigParams};
use crate::error::{Error, Result};
use crate::graph::Graph;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileParams {
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_up: Option<f64>,
}

/// On-disk layout of an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub params: FileParams,
    pub delta: f64,
    pub labels: Vec<Vec<u32>>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ledger: Option<AdversaryLedger>,
}

impl InstanceFile {
    pub fn from_instance(inst: &RigInstance) -> Self {
        let RigParams { n, d, p, q, seed } = inst.params;
        InstanceFile {
            version: FORMAT_VERSION,
            params: FileParams { n, d, p, q, seed, q_up: inst.q_up },
            delta: inst.delta,
            labels: inst.labels.clone(),
            edges: inst.graph.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            ledger: inst.ledger.clone(),
        }
    }

    pub fn into_instance(self) -> Result<RigInstance> {
        if self.version != FORMAT_VERSION {
            return Err(Error::Format(format!("field `version`: expected {FORMAT_VERSION}, got {}", self.version)));
        }
        let FileParams { n, d, p, q, seed, q_up } = self.params;
        if self.labels.len() != n {
            return Err(Error::Format(format!("field `labels`: expected {n} entries, got {}", self.labels.len())));
        }
        for (v, m) in self.labels.iter().enumerate() {
            if m.windows(2).any(|w| w[0] >= w[1]) || m.iter().any(|&l| l as usize >= d) {
                return Err(Error::Format(format!("field `labels[{v}]`: must be strictly increasing and below d={d}")));
            }
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, &[u, v]) in self.edges.iter().enumerate() {
            if u >= v || v >= n {
                return Err(Error::Format(format!("field `edges[{i}]`: need u < v < n, got [{u},{v}]")));
            }
            edges.push((u, v));
        }
        let graph = Graph::from_edges(n, &edges);
        if graph.edge_count() != edges.len() {
            return Err(Error::Format("field `edges`: duplicate entries".into()));
        }
        let params = RigParams { n, d, p, q, seed };
        Ok(RigInstance::new(params, q_up, self.delta, self.labels, graph, self.ledger))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("instance serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("line {} column {}: {e}", e.line(), e.column())))
    }
}

impl RigInstance {
    pub fn to_json(&self) -> String {
        InstanceFile::from_instance(self).to_json()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        InstanceFile::from_json(text)?.into_instance()
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{apply_monotone_adversary, sample_rig, MonotoneStrategy};

    #[test]
    fn roundtrip_is_bit_exact() {
        let inst = sample_rig(RigParams::new(60, 5, 0.37, 0.11, 17)).unwrap();
        let text = inst.to_json();
        let back = RigInstance::from_json(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json(), text);
        assert_eq!(back.delta.to_bits(), inst.delta.to_bits());
    }

    #[test]
    fn roundtrip_keeps_ledger() {
        let inst = sample_rig(RigParams::new(40, 3, 0.5, 0.2, 2)).unwrap();
        let (adv, _) = apply_monotone_adversary(&inst, &MonotoneStrategy::Fraction { f: 0.5 }, 4).unwrap();
        let back = RigInstance::from_json(&adv.to_json()).unwrap();
        assert_eq!(back, adv);
    }

    #[test]
    fn malformed_edge_is_reported_with_field() {
        let text = r#"{"version":1,"params":{"n":2,"d":1,"p":0.5,"q":0.1,"seed":0},"delta":0.5,"labels":[[],[]],"edges":[[1,0]]}"#;
        let err = RigInstance::from_json(text).unwrap_err().to_string();
        assert!(err.contains("edges[0]"), "{err}");
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = RigInstance::from_json("{\n\"version\": 1,\n oops").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }
}
