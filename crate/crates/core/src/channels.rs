//! Canonical flattening of a delta frame into 71 scalar channels: 19
//! keypoints x 3 axes (keypoint-major, axis-minor), then the 14 angle
//! deltas. Everything downstream (encoding, prediction, matching, CSV)
//! shares this layout.

use crate::hand::{
    DeltaFrame, HandClass, KeypointId, Vec3, ANGLE_COUNT, ANGLE_TRIPLES, KEYPOINT_COUNT,
    VECTOR_KEYPOINT_COUNT,
};

pub const VECTOR_CHANNEL_COUNT: usize = VECTOR_KEYPOINT_COUNT * 3;
pub const CHANNEL_COUNT: usize = VECTOR_CHANNEL_COUNT + ANGLE_COUNT;

/// Which family a channel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Vector,
    Angle,
}

impl ChannelKind {
    pub fn channel_range(self) -> std::ops::Range<usize> {
        match self {
            ChannelKind::Vector => 0..VECTOR_CHANNEL_COUNT,
            ChannelKind::Angle => VECTOR_CHANNEL_COUNT..CHANNEL_COUNT,
        }
    }

    pub fn channel_count(self) -> usize {
        self.channel_range().len()
    }
}

pub fn channel_kind(channel: usize) -> ChannelKind {
    if channel < VECTOR_CHANNEL_COUNT {
        ChannelKind::Vector
    } else {
        ChannelKind::Angle
    }
}

/// Channel of one axis (0 = x, 1 = y, 2 = z) of a keypoint's delta vector.
/// `None` for the elbow, which carries no vector.
pub fn vector_channel(keypoint: KeypointId, axis: usize) -> Option<usize> {
    debug_assert!(axis < 3);
    keypoint.vector_index().map(|v| v * 3 + axis)
}

pub fn angle_channel(angle_index: usize) -> usize {
    debug_assert!(angle_index < ANGLE_COUNT);
    VECTOR_CHANNEL_COUNT + angle_index
}

/// The keypoint owning a vector channel.
pub fn channel_keypoint(channel: usize) -> Option<KeypointId> {
    if channel < VECTOR_CHANNEL_COUNT {
        KeypointId::from_ordinal(channel / 3)
    } else {
        None
    }
}

/// The finger chain an angle belongs to (thumb: 2 angles, fingers: 3 each).
pub fn angle_chain(angle_index: usize) -> HandClass {
    match angle_index {
        0 | 1 => HandClass::A,
        2..=4 => HandClass::B,
        5..=7 => HandClass::C,
        8..=10 => HandClass::D,
        _ => HandClass::E,
    }
}

/// The channels fused together when predicting a given channel: same-class
/// keypoints on the same axis for vector channels, same-chain angles for
/// angle channels. The channel itself is always a member. Order follows the
/// canonical layout.
pub fn channel_group(channel: usize) -> Vec<usize> {
    if channel < VECTOR_CHANNEL_COUNT {
        let axis = channel % 3;
        let class = channel_keypoint(channel).unwrap().class();
        (0..class.size())
            .map(|i| {
                let kp = KeypointId::new(class, i as u8).unwrap();
                vector_channel(kp, axis).unwrap()
            })
            .collect()
    } else {
        let chain = angle_chain(channel - VECTOR_CHANNEL_COUNT);
        (0..ANGLE_COUNT)
            .filter(|&i| angle_chain(i) == chain)
            .map(angle_channel)
            .collect()
    }
}

/// All channels whose observability depends on a keypoint: its own vector
/// channels plus every angle whose triple touches it.
pub fn channels_of_keypoint(keypoint: KeypointId) -> Vec<usize> {
    let mut out = Vec::new();
    if keypoint.vector_index().is_some() {
        for axis in 0..3 {
            out.push(vector_channel(keypoint, axis).unwrap());
        }
    }
    let ord = keypoint.ordinal();
    for (i, &(a, b, c)) in ANGLE_TRIPLES.iter().enumerate() {
        if a == ord || b == ord || c == ord {
            out.push(angle_channel(i));
        }
    }
    out
}

pub fn flatten_delta(delta: &DeltaFrame) -> [f64; CHANNEL_COUNT] {
    let mut out = [0.0; CHANNEL_COUNT];
    for (v, vec) in delta.dvectors.iter().enumerate() {
        out[v * 3] = vec.x;
        out[v * 3 + 1] = vec.y;
        out[v * 3 + 2] = vec.z;
    }
    out[VECTOR_CHANNEL_COUNT..].copy_from_slice(&delta.dangles);
    out
}

pub fn unflatten_delta(channels: &[f64; CHANNEL_COUNT]) -> DeltaFrame {
    let mut dvectors = [Vec3::ZERO; VECTOR_KEYPOINT_COUNT];
    for (v, vec) in dvectors.iter_mut().enumerate() {
        *vec = Vec3::new(channels[v * 3], channels[v * 3 + 1], channels[v * 3 + 2]);
    }
    let mut dangles = [0.0; ANGLE_COUNT];
    dangles.copy_from_slice(&channels[VECTOR_CHANNEL_COUNT..]);
    DeltaFrame { dvectors, dangles }
}

/// Per-channel confidence from per-keypoint confidence: a vector channel
/// carries its keypoint's confidence, an angle channel the minimum over its
/// triple.
pub fn expand_confidence(kp_conf: &[f64; KEYPOINT_COUNT]) -> [f64; CHANNEL_COUNT] {
    let mut out = [0.0; CHANNEL_COUNT];
    for v in 0..VECTOR_KEYPOINT_COUNT {
        for axis in 0..3 {
            out[v * 3 + axis] = kp_conf[v];
        }
    }
    for (i, &(a, b, c)) in ANGLE_TRIPLES.iter().enumerate() {
        out[VECTOR_CHANNEL_COUNT + i] = kp_conf[a].min(kp_conf[b]).min(kp_conf[c]);
    }
    out
}

/// A delta frame as seen by the matcher: channel values, the as-observed
/// keypoint confidences, and the per-channel weights (which infill may raise
/// from 0 to 0.5 without touching the keypoint record).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedDelta {
    pub channels: [f64; CHANNEL_COUNT],
    pub kp_conf: [f64; KEYPOINT_COUNT],
    pub conf: [f64; CHANNEL_COUNT],
}

impl ObservedDelta {
    pub fn new(delta: &DeltaFrame, kp_conf: [f64; KEYPOINT_COUNT]) -> ObservedDelta {
        ObservedDelta {
            channels: flatten_delta(delta),
            conf: expand_confidence(&kp_conf),
            kp_conf,
        }
    }

    pub fn fully_observed(delta: &DeltaFrame) -> ObservedDelta {
        ObservedDelta::new(delta, [1.0; KEYPOINT_COUNT])
    }

    pub fn to_delta(&self) -> DeltaFrame {
        unflatten_delta(&self.channels)
    }

    /// Marks a keypoint unobservable: confidence 0 on the keypoint record and
    /// every channel it touches. Channel values are preserved.
    pub fn occlude_keypoint(&mut self, keypoint: KeypointId) {
        self.kp_conf[keypoint.ordinal()] = 0.0;
        for ch in channels_of_keypoint(keypoint) {
            self.conf[ch] = 0.0;
        }
    }

    /// True when no keypoint was observed at all.
    pub fn fully_occluded(&self) -> bool {
        self.kp_conf.iter().all(|&c| c == 0.0)
    }
}
