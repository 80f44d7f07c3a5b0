//! Session smoothing of raw scores.
//!
//! Each revision's final score is the running mean of the raw scores seen
//! so far in its session. Entity creations enter the mean as a large
//! negative sentinel, which drags the rest of their session below every
//! regular score.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;

use crate::comment::ParsedComment;

pub const CREATION_SENTINEL: f64 = -1000.0;
pub const DEFAULT_SESSION_CAPACITY: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionState {
    pub session_id: u64,
    pub running_sum: f64,
    pub count: u64,
}

impl SessionState {
    pub fn new(session_id: u64) -> Self {
        SessionState {
            session_id,
            running_sum: 0.0,
            count: 0,
        }
    }

    /// Absorbs one value and returns the mean so far.
    pub fn absorb(&mut self, value: f64) -> f64 {
        self.running_sum += value;
        self.count += 1;
        self.mean()
    }

    pub fn mean(&self) -> f64 {
        self.running_sum / self.count as f64
    }
}

/// Rolling per-session means with a bounded number of live sessions.
/// Past the cap the least recently touched session is dropped and starts
/// over if it shows up again.
#[derive(Debug, Clone)]
pub struct SilPostprocessor {
    sessions: BTreeMap<u64, (SessionState, u64)>,
    by_touch: BTreeMap<u64, u64>,
    tick: u64,
    capacity: usize,
    creation_actions: BTreeSet<String>,
}

impl Default for SilPostprocessor {
    fn default() -> Self {
        Self::new(DEFAULT_SESSION_CAPACITY)
    }
}

impl SilPostprocessor {
    pub fn new(capacity: usize) -> Self {
        SilPostprocessor {
            sessions: BTreeMap::new(),
            by_touch: BTreeMap::new(),
            tick: 0,
            capacity: capacity.max(1),
            creation_actions: ["wbeditentity-create".into()].into(),
        }
    }

    /// Replaces the set of `action-subaction` pairs (or bare actions)
    /// treated as entity creations.
    pub fn with_creation_actions<I, S>(mut self, actions: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.creation_actions = actions.into_iter().map(Into::into).collect();
        self
    }

    pub fn is_creation(&self, pc: &ParsedComment) -> bool {
        let Some(action) = pc.action.as_deref() else {
            return false;
        };
        if self.creation_actions.contains(action) {
            return true;
        }
        match pc.subaction.as_deref() {
            Some(sub) => self
                .creation_actions
                .iter()
                .any(|c| c.split_once('-') == Some((action, sub))),
            None => false,
        }
    }

    pub fn raw_or_sentinel(&self, pc: &ParsedComment, raw_score: f64) -> f64 {
        if self.is_creation(pc) {
            CREATION_SENTINEL
        } else {
            raw_score
        }
    }

    /// Folds `value` into its session and returns the session mean. Without
    /// a session id the value passes through unchanged.
    pub fn adjust(&mut self, session_id: Option<u64>, value: f64) -> f64 {
        let Some(id) = session_id else {
            return value;
        };
        self.tick += 1;
        let tick = self.tick;
        let (state, touched) = match self.sessions.remove(&id) {
            Some((state, touched)) => {
                self.by_touch.remove(&touched);
                (state, tick)
            }
            None => {
                if self.sessions.len() >= self.capacity {
                    if let Some((_, victim)) = self.by_touch.pop_first() {
                        self.sessions.remove(&victim);
                    }
                }
                (SessionState::new(id), tick)
            }
        };
        let mut state = state;
        let out = state.absorb(value);
        self.sessions.insert(id, (state, touched));
        self.by_touch.insert(touched, id);
        out
    }

    pub fn session(&self, id: u64) -> Option<&SessionState> {
        self.sessions.get(&id).map(|(s, _)| s)
    }

    /// Forgets every session; configuration is kept.
    pub fn reset(&mut self) {
        self.sessions.clear();
        self.by_touch.clear();
    }

    pub fn live_sessions(&self) -> usize {
        self.sessions.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comment::parse_comment;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn sentinel_only_for_creations() {
        let sil = SilPostprocessor::default();
        let create = parse_comment("/* wbeditentity-create:0| */");
        assert_eq!(sil.raw_or_sentinel(&create, 0.7), -1000.0);
        let label = parse_comment("/* wbsetlabel-set:1|en */ x");
        assert_eq!(sil.raw_or_sentinel(&label, 0.7), 0.7);
        let free = parse_comment("just text");
        assert_eq!(sil.raw_or_sentinel(&free, 0.2), 0.2);
        let custom = SilPostprocessor::default().with_creation_actions(["wbcreateredirect"]);
        assert!(custom.is_creation(&parse_comment("/* wbcreateredirect:0||Q1|Q2 */")));
        assert!(!custom.is_creation(&create));
    }

    #[test]
    fn rolling_means() {
        let mut sil = SilPostprocessor::default();
        assert_eq!(sil.adjust(Some(1), 0.2), 0.2);
        assert!((sil.adjust(Some(1), 0.4) - 0.3).abs() < 1e-15);
        assert_eq!(sil.adjust(Some(2), -1000.0), -1000.0);
        assert_eq!(sil.adjust(Some(2), 0.8), -499.6);
        assert_eq!(sil.adjust(Some(3), 0.9), 0.9);
        assert_eq!(sil.adjust(None, 0.9), 0.9);
    }

    #[test]
    fn eviction_restarts_oldest_session() {
        let mut sil = SilPostprocessor::new(2);
        sil.adjust(Some(1), 1.0);
        sil.adjust(Some(2), 0.0);
        sil.adjust(Some(1), 1.0);
        sil.adjust(Some(3), 0.5); // evicts 2
        assert_eq!(sil.live_sessions(), 2);
        assert!(sil.session(2).is_none());
        assert_eq!(sil.adjust(Some(2), 0.25), 0.25);
        assert_eq!(sil.session(1), None); // 1 was oldest after 3 arrived
    }

    proptest! {
        #[test]
        fn kth_output_is_prefix_mean(values in proptest::collection::vec(0.0f64..1.0, 1..30)) {
            let mut sil = SilPostprocessor::default();
            let mut sum = 0.0;
            for (k, &v) in values.iter().enumerate() {
                sum += v;
                prop_assert_eq!(sil.adjust(Some(9), v), sum / (k + 1) as f64);
            }
        }

        #[test]
        fn creation_first_keeps_session_negative(values in proptest::collection::vec(0.0f64..1.0, 0..40)) {
            let mut sil = SilPostprocessor::default();
            prop_assert!(sil.adjust(Some(1), CREATION_SENTINEL) < 0.0);
            for (i, &v) in values.iter().enumerate() {
                let k = (i + 2) as f64;
                let out = sil.adjust(Some(1), v);
                prop_assert!(out <= (k - 1.0 - 1000.0) / k + 1e-12);
                prop_assert!(out < 0.0);
            }
        }

        #[test]
        fn sessions_are_independent(
            a in proptest::collection::vec(0.0f64..1.0, 1..15),
            b in proptest::collection::vec(0.0f64..1.0, 1..15),
            picks in proptest::collection::vec(any::<bool>(), 30),
        ) {
            let alone = |vals: &[f64], id| {
                let mut sil = SilPostprocessor::default();
                vals.iter().map(|&v| sil.adjust(Some(id), v)).collect::<Vec<_>>()
            };
            let (ea, eb) = (alone(&a, 1), alone(&b, 2));
            let mut sil = SilPostprocessor::default();
            let (mut ia, mut ib) = (0, 0);
            let (mut oa, mut ob) = (Vec::new(), Vec::new());
            let mut picks = picks.into_iter().cycle();
            while ia < a.len() || ib < b.len() {
                let take_a = ib >= b.len() || (ia < a.len() && picks.next().unwrap());
                if take_a { oa.push(sil.adjust(Some(1), a[ia])); ia += 1; }
                else { ob.push(sil.adjust(Some(2), b[ib])); ib += 1; }
            }
            prop_assert_eq!(oa, ea);
            prop_assert_eq!(ob, eb);
        }
    }
}
