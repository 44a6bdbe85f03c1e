//! Negative control: a single bubble whose neck carries a fixed amount of
//! extra energy on an annulus that shrinks with the bubble. The tension
//! stays bounded in `L¹` while its `M^{1,δ}` norm blows up, and the energy
//! identity fails by the leaked amount.
//!
//! This construction is our own analogue of the classical counterexample
//! showing that `L¹` tension bounds do not suffice; it is not that example.

use super::spec::{LeakRing, SequenceSpec};

/// Fraction of one degree-1 bubble energy placed in the neck.
pub const LEAK_FRACTION: f64 = 0.6;

pub fn parker_counterexample_sequence(n_min: u32, n_max: u32) -> SequenceSpec {
    let mut s = SequenceSpec::single_bubble(n_min, n_max);
    s.sequence.name = "leaking-neck".into();
    s.sequence.identity_expected = false;
    s.sequence.note = Some(
        "implementer-designed negative control: energy leaks into a shrinking neck ring; \
         identity not expected"
            .into(),
    );
    // Keep the gluing band short of the neck at coarse indices.
    s.glue.beta = 0.25;
    s.leak = Some(LeakRing {
        energy: LEAK_FRACTION * 8.0 * std::f64::consts::PI,
        start: 2.0,
        width: 1.0,
        zeta: 0.25,
    });
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::glue::glue_sequence;
    use crate::norms::{lp, morrey, Region};

    #[test]
    fn l1_bounded_morrey_unbounded() {
        let s = parker_counterexample_sequence(3, 7);
        assert!(!s.sequence.identity_expected);
        let (mut l1, mut m) = (Vec::new(), Vec::new());
        for n in s.indices() {
            let g = glue_sequence(&s, n).unwrap();
            l1.push(lp(&g.tau, 1.0, &Region::All).unwrap().value);
            m.push(morrey(&g.tau, 1.0, 1.5, &Region::All).unwrap().value);
        }
        let hi = l1.iter().cloned().fold(0.0, f64::max);
        let lo = l1.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo < 2.0, "{l1:?}");
        assert!(m.last().unwrap() / m[0] >= 4.0, "{m:?}");
    }
}
