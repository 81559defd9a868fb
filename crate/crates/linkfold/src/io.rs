//! File formats: linkage JSON, motion-trace JSONL, OBJ frame export, CSV
//! tables and certificate reports. All writes go through a temp file and a
//! rename so partial output never lands at the target path.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::IoError;
use crate::geom::Point3;
use crate::linkage::{Linkage, State};
use crate::motion::{ContactSet, Frame, SampledTrace, StageMeta};

/// `{"vertices": [[x,y,z],...], "edges": [[i,j],...], "labels": [...]}`;
/// bar lengths are inferred from the vertex positions at load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkageJson {
    pub vertices: Vec<[f64; 3]>,
    pub edges: Vec<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl LinkageJson {
    pub fn from_linkage(linkage: &Linkage, state: &State) -> Self {
        let vertices = state.positions.iter().map(|p| [p.x, p.y, p.z]).collect();
        let mut edges: Vec<[usize; 2]> = linkage.edges().iter().map(|&(i, j)| [i, j]).collect();
        edges.sort();
        LinkageJson { vertices, edges, labels: linkage.labels().map(|l| l.to_vec()) }
    }

    pub fn into_linkage(self) -> Result<(Linkage, State), IoError> {
        let positions: Vec<Point3> = self
            .vertices
            .iter()
            .map(|v| Point3::new(v[0], v[1], v[2]))
            .collect();
        let lengths: Vec<f64> = self
            .edges
            .iter()
            .map(|&[i, j]| {
                positions
                    .get(i)
                    .zip(positions.get(j))
                    .map(|(a, b)| a.dist(*b))
                    .ok_or_else(|| IoError::Parse(format!("edge [{i}, {j}] out of range")))
            })
            .collect::<Result<_, _>>()?;
        let linkage = Linkage::new(
            positions.len(),
            self.edges.iter().map(|&[i, j]| (i, j)).collect(),
            lengths,
            self.labels,
        )?;
        Ok((linkage, State::new(positions)))
    }
}

pub fn write_linkage_json(
    path: &Path,
    linkage: &Linkage,
    state: &State,
) -> Result<(), IoError> {
    let doc = LinkageJson::from_linkage(linkage, state);
    atomic_write(path, (serde_json::to_string_pretty(&doc)? + "\n").as_bytes())
}

pub fn read_linkage_json(path: &Path) -> Result<(Linkage, State), IoError> {
    let text = fs::read_to_string(path)?;
    let doc: LinkageJson = serde_json::from_str(&text)?;
    doc.into_linkage()
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceHeader {
    linkage: LinkageJson,
    /// Union of the explicitly declared pairs (stage records carry the
    /// precise per-stage sets, including the blanket "all" marker).
    contacts: Vec<[usize; 2]>,
    stages: Vec<StageRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct StageRecord {
    name: String,
    t0: f64,
    t1: f64,
    contacts: ContactSet,
}

#[derive(Debug, Serialize, Deserialize)]
struct FrameRecord {
    t: f64,
    stage: usize,
    positions: Vec<[f64; 3]>,
}

/// One JSONL record per sampled frame, preceded by a header record.
pub fn write_trace_jsonl(path: &Path, sampled: &SampledTrace) -> Result<(), IoError> {
    let initial = sampled.initial();
    let mut contacts = std::collections::BTreeSet::new();
    for meta in &sampled.stages {
        if let ContactSet::Pairs(set) = &meta.contacts {
            contacts.extend(set.iter().map(|&(a, b)| [a, b]));
        }
    }
    let header = TraceHeader {
        linkage: LinkageJson::from_linkage(&sampled.linkage, &initial),
        contacts: contacts.into_iter().collect(),
        stages: sampled
            .stages
            .iter()
            .map(|m| StageRecord {
                name: m.name.clone(),
                t0: m.t0,
                t1: m.t1,
                contacts: m.contacts.clone(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string(&header)?;
    out.push('\n');
    for frame in &sampled.frames {
        let record = FrameRecord {
            t: frame.t,
            stage: frame.stage,
            positions: frame.positions.iter().map(|p| [p.x, p.y, p.z]).collect(),
        };
        out.push_str(&serde_json::to_string(&record)?);
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_trace_jsonl(path: &Path) -> Result<SampledTrace, IoError> {
    let file = fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| IoError::Parse("empty trace file".into()))??;
    let header: TraceHeader = serde_json::from_str(&header_line)?;
    let (linkage, _) = header.linkage.into_linkage()?;
    let stages: Vec<StageMeta> = header
        .stages
        .iter()
        .map(|s| StageMeta { name: s.name.clone(), t0: s.t0, t1: s.t1, contacts: s.contacts.clone() })
        .collect();
    let mut frames = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: FrameRecord = serde_json::from_str(&line)?;
        if record.stage >= stages.len() {
            return Err(IoError::Parse(format!("frame references stage {}", record.stage)));
        }
        frames.push(Frame {
            t: record.t,
            stage: record.stage,
            positions: record
                .positions
                .iter()
                .map(|v| Point3::new(v[0], v[1], v[2]))
                .collect(),
        });
    }
    if frames.is_empty() {
        return Err(IoError::Parse("trace has no frames".into()));
    }
    Ok(SampledTrace { linkage, stages, frames })
}

/// One OBJ file per frame; bars as line elements.
pub fn export_obj_frames(dir: &Path, sampled: &SampledTrace) -> Result<usize, IoError> {
    fs::create_dir_all(dir)?;
    for (k, frame) in sampled.frames.iter().enumerate() {
        let mut text = String::new();
        text.push_str(&format!("# t = {}\n", frame.t));
        for p in &frame.positions {
            text.push_str(&format!("v {} {} {}\n", p.x, p.y, p.z));
        }
        for &(i, j) in sampled.linkage.edges() {
            text.push_str(&format!("l {} {}\n", i + 1, j + 1));
        }
        atomic_write(&dir.join(format!("frame_{k:05}.obj")), text.as_bytes())?;
    }
    Ok(sampled.frames.len())
}

pub fn write_certificate_json(
    path: &Path,
    cert: &crate::certify::Certificate,
) -> Result<(), IoError> {
    atomic_write(path, (serde_json::to_string_pretty(cert)? + "\n").as_bytes())
}

/// CSV clearance timeline: `t, min_clearance, pair`.
pub fn write_clearance_csv(path: &Path, rows: &[(f64, f64, (usize, usize))]) -> Result<(), IoError> {
    let mut text = String::from("t,min_clearance,pair\n");
    for (t, d, (e, f)) in rows {
        text.push_str(&format!("{t},{d},{e}-{f}\n"));
    }
    atomic_write(path, text.as_bytes())
}

pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    if !dir.as_os_str().is_empty() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp~");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Round-trip helper: a canonical JSON string for equality tests.
pub fn canonical_linkage_json(linkage: &Linkage, state: &State) -> String {
    let doc = LinkageJson::from_linkage(linkage, state);
    json!(doc).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkage::{build_shape, ShapeSpec};

    #[test]
    fn linkage_json_roundtrip_is_canonical() {
        let built = build_shape(&ShapeSpec::Icosahedron).unwrap();
        let dir = std::env::temp_dir().join("linkfold_io_test");
        let path = dir.join("icosa.json");
        write_linkage_json(&path, &built.linkage, &built.state).unwrap();
        let (l2, s2) = read_linkage_json(&path).unwrap();
        let a = canonical_linkage_json(&built.linkage, &built.state);
        let b = canonical_linkage_json(&l2, &s2);
        assert_eq!(a, b);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn trace_jsonl_roundtrip() {
        use crate::motion::{MotionStage, MotionTrace};
        let built = build_shape(&ShapeSpec::Tetrahedron).unwrap();
        let stage = MotionStage::hold("hold", built.state.clone(), 1.0);
        let trace = MotionTrace::new(built.linkage, vec![stage]).unwrap();
        let sampled = trace.sample_per_stage(5).unwrap();
        let dir = std::env::temp_dir().join("linkfold_io_test2");
        let path = dir.join("trace.jsonl");
        write_trace_jsonl(&path, &sampled).unwrap();
        let back = read_trace_jsonl(&path).unwrap();
        assert_eq!(back.frames.len(), sampled.frames.len());
        assert_eq!(back.stages.len(), 1);
        for (a, b) in back.frames.iter().zip(&sampled.frames) {
            assert_eq!(a.t, b.t);
            for (p, q) in a.positions.iter().zip(&b.positions) {
                assert_eq!(p, q);
            }
        }
        fs::remove_dir_all(&dir).ok();
    }
}
