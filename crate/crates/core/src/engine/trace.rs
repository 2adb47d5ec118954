use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeTypeId, VertexRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReadRole {
    Target,
    Neighbor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Fp,
    Na,
    Sf,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Fp => "fp",
            Stage::Na => "na",
            Stage::Sf => "sf",
        }
    }
}

/// One logical feature-vector read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AccessRecord {
    pub vertex: VertexRef,
    pub role: ReadRole,
    pub relation: Option<EdgeTypeId>,
    pub stage: Stage,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AccessTrace {
    records: Vec<AccessRecord>,
}

impl AccessTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: Vec<AccessRecord>) -> Self {
        Self { records }
    }

    #[inline]
    pub fn push(&mut self, vertex: VertexRef, role: ReadRole, relation: Option<EdgeTypeId>, stage: Stage) {
        self.records.push(AccessRecord {
            vertex,
            role,
            relation,
            stage,
        });
    }

    pub fn records(&self) -> &[AccessRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count_role(&self, role: ReadRole, stage: Stage) -> usize {
        self.records
            .iter()
            .filter(|r| r.role == role && r.stage == stage)
            .count()
    }

    pub fn distinct_vertices(&self) -> usize {
        self.records.iter().map(|r| r.vertex).collect::<HashSet<_>>().len()
    }

    /// CSV `type,id,role,relation,stage`; an absent relation is written empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "type,id,role,relation,stage")?;
        for r in &self.records {
            let role = match r.role {
                ReadRole::Target => "target",
                ReadRole::Neighbor => "neighbor",
            };
            let rel = r.relation.map(|e| e.0.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{role},{rel},{}", r.vertex.vtype.0, r.vertex.id, r.stage.as_str())?;
        }
        Ok(())
    }
}

/// `(total reads - distinct vertices read) / total reads`.
pub fn redundancy_fraction(trace: &AccessTrace) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::UndefinedMetric("redundancy of an empty trace".into()));
    }
    let total = trace.len();
    Ok((total - trace.distinct_vertices()) as f64 / total as f64)
}
