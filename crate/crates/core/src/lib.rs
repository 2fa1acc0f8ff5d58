//! Occlusion-robust dynamic hand-gesture recognition.
//!
//! The pipeline models a 20-keypoint hand as relative coordinate vectors
//! and 14 joint angles, encodes depth masks into scale-invariant frames
//! with per-keypoint confidences, amplifies seed datasets with a recurrent
//! adversarial generator, learns per-channel temporal dynamics with small
//! GRUs to infill occluded keypoints, normalizes variable-length captures
//! against symbol-encoded templates, and matches a streaming ring buffer
//! of delta frames against gesture templates with a recursive sliding
//! window fused over coordinate and angle strategies.

pub mod channels;
pub mod codec;
pub mod datagen;
pub mod depth;
pub mod gesture;
pub mod hand;
pub mod matrix;
pub mod pgm;
pub mod predictor;
pub mod recognizer;
mod rngutil;
pub mod sweep;

pub use channels::{ChannelKind, ObservedDelta, CHANNEL_COUNT};
pub use codec::{encode_sequence, encode_value, normalize_sequence, GestureTemplate};
pub use gesture::{Gesture, ALL_GESTURES, GESTURE_COUNT};
pub use hand::{
    angle_set, build_coordinate_frame, frame_delta, joint_angle, CoordinateFrame, DeltaFrame,
    HandClass, HandFrame, KeypointId, Vec3,
};
pub use recognizer::{FrameBuffer, MatchResult, Matcher, Strategy};
