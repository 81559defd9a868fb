//! Continuous motions as ordered analytic stages with a shared time
//! parameterization, plus sampling, concatenation, time reversal and
//! reflection.
//!
//! A stage's evaluator is a closed-form map from local time in [0, 1] to a
//! full state; positions are never keyframe-interpolated, so bar lengths
//! hold to rounding error at every sampled time.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::MotionError;
use crate::geom::{reflect_across_plane, Plane3, Point3};
use crate::linkage::{Linkage, State};

/// Chaining tolerance between consecutive stages.
pub const CHAIN_TOL: f64 = 1e-9;
/// A sampled state whose worst bar-length error exceeds this indicates a
/// generator bug.
pub const LENGTH_GUARD: f64 = 1e-6;

/// Edge pairs (by edge index) allowed to touch during a stage.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ContactSet {
    #[default]
    None,
    /// Every non-adjacent pair may touch (e.g. while all spikes share the
    /// spiky-ball center).
    All,
    Pairs(BTreeSet<(usize, usize)>),
}

impl ContactSet {
    pub fn contains(&self, e: usize, f: usize) -> bool {
        match self {
            ContactSet::None => false,
            ContactSet::All => true,
            ContactSet::Pairs(set) => set.contains(&(e.min(f), e.max(f))),
        }
    }

    pub fn union(&self, other: &ContactSet) -> ContactSet {
        match (self, other) {
            (ContactSet::All, _) | (_, ContactSet::All) => ContactSet::All,
            (ContactSet::None, x) | (x, ContactSet::None) => x.clone(),
            (ContactSet::Pairs(a), ContactSet::Pairs(b)) => {
                ContactSet::Pairs(a.union(b).copied().collect())
            }
        }
    }
}

type Evaluator = Arc<dyn Fn(f64) -> Vec<Point3> + Send + Sync>;

/// One analytic motion stage.
#[derive(Clone)]
pub struct MotionStage {
    pub name: String,
    pub duration: f64,
    pub contacts: ContactSet,
    eval: Evaluator,
}

impl std::fmt::Debug for MotionStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MotionStage")
            .field("name", &self.name)
            .field("duration", &self.duration)
            .finish()
    }
}

impl MotionStage {
    pub fn new(
        name: impl Into<String>,
        duration: f64,
        contacts: ContactSet,
        eval: impl Fn(f64) -> Vec<Point3> + Send + Sync + 'static,
    ) -> Self {
        MotionStage { name: name.into(), duration, contacts, eval: Arc::new(eval) }
    }

    /// A stage where nothing moves.
    pub fn hold(name: impl Into<String>, state: State, duration: f64) -> Self {
        let positions = state.positions;
        MotionStage::new(name, duration, ContactSet::None, move |_| positions.clone())
    }

    pub fn state_at(&self, local_t: f64) -> State {
        State::new((self.eval)(local_t.clamp(0.0, 1.0)))
    }

    /// Evaluate a single vertex; stages are whole-state maps internally.
    pub fn vertex_at(&self, vertex: usize, local_t: f64) -> Point3 {
        (self.eval)(local_t.clamp(0.0, 1.0))[vertex]
    }

    fn reversed(&self) -> MotionStage {
        let eval = self.eval.clone();
        MotionStage {
            name: format!("{}:rev", self.name),
            duration: self.duration,
            contacts: self.contacts.clone(),
            eval: Arc::new(move |t| eval(1.0 - t)),
        }
    }

    fn reflected(&self, plane: Plane3) -> MotionStage {
        let eval = self.eval.clone();
        MotionStage {
            name: format!("{}:mirror", self.name),
            duration: self.duration,
            contacts: self.contacts.clone(),
            eval: Arc::new(move |t| {
                eval(t)
                    .into_iter()
                    .map(|p| reflect_across_plane(p, &plane))
                    .collect()
            }),
        }
    }
}

/// An ordered sequence of stages over one linkage, parameterized by a global
/// time in [0, 1] split proportionally to stage durations.
#[derive(Debug, Clone)]
pub struct MotionTrace {
    pub linkage: Linkage,
    stages: Vec<MotionStage>,
}

impl MotionTrace {
    /// Build a trace, checking that consecutive stages chain continuously.
    pub fn new(linkage: Linkage, stages: Vec<MotionStage>) -> Result<Self, MotionError> {
        if stages.is_empty() {
            return Err(MotionError::Empty);
        }
        for w in stages.windows(2) {
            let gap = max_gap(&w[0].state_at(1.0), &w[1].state_at(0.0));
            if gap > CHAIN_TOL {
                return Err(MotionError::EndpointMismatch(gap));
            }
        }
        Ok(MotionTrace { linkage, stages })
    }

    pub fn stages(&self) -> &[MotionStage] {
        &self.stages
    }

    pub fn total_duration(&self) -> f64 {
        self.stages.iter().map(|s| s.duration).sum()
    }

    pub fn initial_state(&self) -> State {
        self.stages[0].state_at(0.0)
    }

    pub fn final_state(&self) -> State {
        self.stages.last().unwrap().state_at(1.0)
    }

    /// Map a global time to (stage index, local time).
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let total = self.total_duration();
        let target = t.clamp(0.0, 1.0) * total;
        let mut acc = 0.0;
        for (k, s) in self.stages.iter().enumerate() {
            if target <= acc + s.duration || k + 1 == self.stages.len() {
                let local = if s.duration > 0.0 { (target - acc) / s.duration } else { 0.0 };
                return (k, local.clamp(0.0, 1.0));
            }
            acc += s.duration;
        }
        unreachable!("nonempty trace")
    }

    pub fn state_at(&self, t: f64) -> State {
        let (k, local) = self.locate(t);
        self.stages[k].state_at(local)
    }

    /// `n` states at uniform global times, including t = 0 and t = 1. Every
    /// state is validated against the bar lengths.
    pub fn sample(&self, n: usize) -> Result<Vec<(f64, State)>, MotionError> {
        if n < 2 {
            return Err(MotionError::TooFewSamples(n));
        }
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let t = k as f64 / (n - 1) as f64;
            let state = self.state_at(t);
            self.guard_lengths(&state, t)?;
            out.push((t, state));
        }
        Ok(out)
    }

    /// Sample each stage at `per_stage` uniform local times (both endpoints
    /// included) for certification; records the stage index per frame.
    pub fn sample_per_stage(&self, per_stage: usize) -> Result<SampledTrace, MotionError> {
        if per_stage < 2 {
            return Err(MotionError::TooFewSamples(per_stage));
        }
        let total = self.total_duration();
        let mut frames = Vec::new();
        let mut acc = 0.0;
        let mut meta = Vec::new();
        for (k, s) in self.stages.iter().enumerate() {
            let t0 = acc / total;
            acc += s.duration;
            let t1 = acc / total;
            meta.push(StageMeta {
                name: s.name.clone(),
                t0,
                t1,
                contacts: s.contacts.clone(),
            });
            for i in 0..per_stage {
                let local = i as f64 / (per_stage - 1) as f64;
                let t = t0 + (t1 - t0) * local;
                let state = s.state_at(local);
                self.guard_lengths(&state, t)?;
                frames.push(Frame { t, stage: k, positions: state.positions });
            }
        }
        Ok(SampledTrace { linkage: self.linkage.clone(), stages: meta, frames })
    }

    fn guard_lengths(&self, state: &State, t: f64) -> Result<(), MotionError> {
        for (k, &(i, j)) in self.linkage.edges().iter().enumerate() {
            let err = (state.positions[i].dist(state.positions[j]) - self.linkage.lengths()[k]).abs();
            if err > LENGTH_GUARD {
                return Err(MotionError::LengthViolation { i, j, err, t });
            }
        }
        Ok(())
    }

    /// Concatenate two traces over the same linkage; `b` must start where
    /// `a` ends.
    pub fn concat(a: MotionTrace, b: MotionTrace) -> Result<MotionTrace, MotionError> {
        if a.linkage != b.linkage {
            return Err(MotionError::LinkageMismatch);
        }
        let gap = max_gap(&a.final_state(), &b.initial_state());
        if gap > CHAIN_TOL {
            return Err(MotionError::EndpointMismatch(gap));
        }
        let mut stages = a.stages;
        stages.extend(b.stages);
        MotionTrace::new(a.linkage, stages)
    }

    /// Play the motion backwards.
    pub fn time_reverse(&self) -> MotionTrace {
        let stages = self.stages.iter().rev().map(|s| s.reversed()).collect();
        MotionTrace { linkage: self.linkage.clone(), stages }
    }

    /// Mirror every state through `plane` (an isometry, so the result is a
    /// valid motion of the same linkage).
    pub fn reflect(&self, plane: Plane3) -> MotionTrace {
        let stages = self.stages.iter().map(|s| s.reflected(plane)).collect();
        MotionTrace { linkage: self.linkage.clone(), stages }
    }
}

fn max_gap(a: &State, b: &State) -> f64 {
    a.positions
        .iter()
        .zip(&b.positions)
        .map(|(p, q)| p.dist(*q))
        .fold(0.0, f64::max)
}

/// Stage metadata carried by a sampled trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageMeta {
    pub name: String,
    pub t0: f64,
    pub t1: f64,
    pub contacts: ContactSet,
}

/// One sampled frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Frame {
    pub t: f64,
    pub stage: usize,
    pub positions: Vec<Point3>,
}

/// A motion reduced to sampled frames; the certifier's input, and what the
/// JSONL trace files carry.
#[derive(Debug, Clone)]
pub struct SampledTrace {
    pub linkage: Linkage,
    pub stages: Vec<StageMeta>,
    pub frames: Vec<Frame>,
}

impl SampledTrace {
    pub fn initial(&self) -> State {
        State::new(self.frames.first().unwrap().positions.clone())
    }

    pub fn final_state(&self) -> State {
        State::new(self.frames.last().unwrap().positions.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkage::{build_shape, ShapeSpec};

    fn hold_trace() -> MotionTrace {
        let built = build_shape(&ShapeSpec::Tetrahedron).unwrap();
        let stage = MotionStage::hold("hold", built.state.clone(), 1.0);
        MotionTrace::new(built.linkage, vec![stage]).unwrap()
    }

    #[test]
    fn sample_endpoints() {
        let trace = hold_trace();
        let samples = trace.sample(2).unwrap();
        assert_eq!(samples.len(), 2);
        assert_eq!(samples[0].0, 0.0);
        assert_eq!(samples[1].0, 1.0);
    }

    #[test]
    fn identity_stage_constant() {
        let trace = hold_trace();
        let s0 = trace.initial_state();
        for (_, s) in trace.sample(11).unwrap() {
            assert!(max_gap(&s0, &s) == 0.0);
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        let trace = hold_trace();
        assert!(matches!(trace.sample(1), Err(MotionError::TooFewSamples(1))));
    }

    #[test]
    fn time_reverse_is_involution() {
        let built = build_shape(&ShapeSpec::Tetrahedron).unwrap();
        let base = built.state.positions.clone();
        let stage = MotionStage::new("spin", 1.0, ContactSet::None, move |t| {
            base.iter()
                .map(|p| {
                    crate::geom::rotate_about_axis(
                        *p,
                        Point3::ZERO,
                        Point3::new(0.0, 0.0, 1.0),
                        t * 0.7,
                    )
                    .unwrap()
                })
                .collect()
        });
        let trace = MotionTrace::new(built.linkage, vec![stage]).unwrap();
        let double = trace.time_reverse().time_reverse();
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            assert!(max_gap(&trace.state_at(t), &double.state_at(t)) < 1e-12);
        }
        // Reversal swaps the endpoint states.
        let rev = trace.time_reverse();
        assert!(max_gap(&trace.initial_state(), &rev.final_state()) < 1e-12);
        assert!(max_gap(&trace.final_state(), &rev.initial_state()) < 1e-12);
    }

    #[test]
    fn concat_checks_endpoints() {
        let built = build_shape(&ShapeSpec::Tetrahedron).unwrap();
        let a = MotionTrace::new(
            built.linkage.clone(),
            vec![MotionStage::hold("a", built.state.clone(), 1.0)],
        )
        .unwrap();
        let shifted: Vec<Point3> = built
            .state
            .positions
            .iter()
            .map(|p| p.add(Point3::new(1.0, 0.0, 0.0)))
            .collect();
        let b = MotionTrace::new(
            built.linkage.clone(),
            vec![MotionStage::hold("b", State::new(shifted), 1.0)],
        )
        .unwrap();
        assert!(matches!(
            MotionTrace::concat(a.clone(), b),
            Err(MotionError::EndpointMismatch(_))
        ));
        let c = MotionTrace::concat(a.clone(), a.clone()).unwrap();
        assert!(max_gap(&c.state_at(0.0), &c.state_at(1.0)) == 0.0);
    }

    #[test]
    fn concat_associative_at_matched_times() {
        let built = build_shape(&ShapeSpec::Tetrahedron).unwrap();
        let mk = |name: &str, d: f64| {
            MotionTrace::new(
                built.linkage.clone(),
                vec![MotionStage::hold(name, built.state.clone(), d)],
            )
            .unwrap()
        };
        let (a, b, c) = (mk("a", 1.0), mk("b", 2.0), mk("c", 0.5));
        let left = MotionTrace::concat(MotionTrace::concat(a.clone(), b.clone()).unwrap(), c.clone())
            .unwrap();
        let right = MotionTrace::concat(a, MotionTrace::concat(b, c).unwrap()).unwrap();
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            assert!(max_gap(&left.state_at(t), &right.state_at(t)) < 1e-12);
        }
    }
}
