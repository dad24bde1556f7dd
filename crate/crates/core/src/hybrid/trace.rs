use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hybrid::HybridState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Sample,
    Update,
    FlowSample,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Sample => "sample",
            EventKind::Update => "update",
            EventKind::FlowSample => "flow",
        }
    }
}

/// States immediately before and after a jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub pre: HybridState,
    pub post: HybridState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t: f64,
    /// Jump count after the event.
    pub j: u64,
    pub network: Option<usize>,
    pub kind: EventKind,
    /// `Γ` at sampling events.
    pub gamma: Option<f64>,
    /// Verdict of a sampling, or the latched verdict an update applied.
    pub triggered: Option<bool>,
    pub norm_eta: f64,
    pub norm_e: f64,
    /// `|η_i|` per network.
    pub network_eta: Vec<f64>,
    /// Certificate values, in the order of [`Trace::certificate_columns`].
    pub certificates: Vec<f64>,
    pub snapshot: Option<Box<Snapshot>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkCounts {
    pub samples: u64,
    pub triggered: u64,
    pub updates: u64,
    pub saturation_violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<EventRecord>,
    pub counts: Vec<NetworkCounts>,
    pub certificate_columns: Vec<String>,
    pub final_state: HybridState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub network: usize,
    pub samples: u64,
    pub triggered: u64,
    pub updates: u64,
    pub saturation_violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub t_end: f64,
    pub jumps: u64,
    pub networks: Vec<NetworkSummary>,
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Trace {
    pub fn networks(&self) -> usize {
        self.counts.len()
    }

    pub fn jumps(&self) -> impl Iterator<Item = &EventRecord> {
        self.records.iter().filter(|r| r.kind != EventKind::FlowSample)
    }

    pub fn flow_samples(&self) -> impl Iterator<Item = &EventRecord> {
        self.records.iter().filter(|r| r.kind == EventKind::FlowSample)
    }

    pub fn summary(&self) -> Summary {
        Summary {
            t_end: self.final_state.t,
            jumps: self.final_state.j,
            networks: self
                .counts
                .iter()
                .enumerate()
                .map(|(i, c)| NetworkSummary {
                    network: i,
                    samples: c.samples,
                    triggered: c.triggered,
                    updates: c.updates,
                    saturation_violations: c.saturation_violations,
                })
                .collect(),
        }
    }

    /// Counts recomputed from the jump records alone.
    pub fn counts_from_records(&self) -> Vec<NetworkCounts> {
        let mut out = vec![NetworkCounts::default(); self.networks()];
        for r in self.jumps() {
            let c = &mut out[r.network.expect("jump records carry a network")];
            match r.kind {
                EventKind::Sample => {
                    c.samples += 1;
                    if r.triggered == Some(true) {
                        c.triggered += 1;
                    }
                }
                EventKind::Update => c.updates += 1,
                EventKind::FlowSample => {}
            }
        }
        for (o, c) in out.iter_mut().zip(&self.counts) {
            o.saturation_violations = c.saturation_violations;
        }
        out
    }

    /// CSV with one row per record.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec![
            "t",
            "j",
            "network",
            "kind",
            "gamma",
            "triggered",
            "norm_eta",
            "norm_e",
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        header.extend(self.certificate_columns.iter().cloned());
        wr.write_record(&header).map_err(csv_err)?;
        for r in &self.records {
            let mut row = vec![
                r.t.to_string(),
                r.j.to_string(),
                r.network.map(|n| n.to_string()).unwrap_or_default(),
                r.kind.as_str().to_string(),
                opt_f64(r.gamma),
                r.triggered.map(|b| u8::from(b).to_string()).unwrap_or_default(),
                r.norm_eta.to_string(),
                r.norm_e.to_string(),
            ];
            row.extend(r.certificates.iter().map(|v| v.to_string()));
            wr.write_record(&row).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Plot data: `t` and `|η_i|` per network, flow samples only.
    pub fn write_plot_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend((0..self.networks()).map(|i| format!("eta_{i}")));
        wr.write_record(&header).map_err(csv_err)?;
        for r in self.flow_samples() {
            let mut row = vec![r.t.to_string()];
            row.extend(r.network_eta.iter().map(|v| v.to_string()));
            wr.write_record(&row).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}
