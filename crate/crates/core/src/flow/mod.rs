//! Generators of approximate harmonic map sequences: rational bubbles,
//! glued bubbling sequences, a leaking negative control and the harmonic
//! map heat flow.

pub mod glue;
pub mod heat;
pub mod parker;
pub mod rational;
pub mod spec;

pub use glue::{base_map, cutoff, glue_sequence, GlueInfo, Glued, PlacedBubble, RingInfo};
pub use heat::{discrete_energy, discrete_tension, heat_flow, heat_flow_with, Boundary, HeatOptions, HeatRecord, Trajectory};
pub use parker::parker_counterexample_sequence;
pub use rational::{rational_bubble, stereographic_inverse, BubbleSpec, Poly, RationalMap, NORTH};
pub use spec::{BaseMap, BubbleEntry, GlueParams, LadderSection, LeakRing, ScaleLaw, SequenceSpec};
