//! Hand model: the 20-keypoint/6-class decomposition, the orthogonal
//! coordinate frame anchored at the elbow, per-frame relative coordinate
//! vectors with confidences, the 14 joint angles and frame-to-frame deltas.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Sub};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HandError {
    #[error("frame anchor points are collinear or coincident")]
    DegenerateFrame,
    #[error("joint angle arm has near-zero length (angle index {0})")]
    DegenerateAngle(usize),
    #[error("angle {value} out of range [0, 360) at index {index}")]
    AngleOutOfRange { index: usize, value: f64 },
    #[error("confidence {value} out of range [0, 1] for keypoint {keypoint}")]
    ConfidenceOutOfRange { keypoint: KeypointId, value: f64 },
    #[error("non-finite value in frame data")]
    NonFinite,
}

/// The six keypoint classes: `A` is the thumb, `B`-`E` the four fingers
/// (index to little), `F` the elbow anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HandClass {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl HandClass {
    pub const ALL: [HandClass; 6] = [
        HandClass::A,
        HandClass::B,
        HandClass::C,
        HandClass::D,
        HandClass::E,
        HandClass::F,
    ];

    /// Number of keypoints in the class.
    pub fn size(self) -> usize {
        match self {
            HandClass::A => 3,
            HandClass::B | HandClass::C | HandClass::D | HandClass::E => 4,
            HandClass::F => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            HandClass::A => 'A',
            HandClass::B => 'B',
            HandClass::C => 'C',
            HandClass::D => 'D',
            HandClass::E => 'E',
            HandClass::F => 'F',
        }
    }
}

pub const KEYPOINT_COUNT: usize = 20;
/// All keypoints except the elbow carry a coordinate vector.
pub const VECTOR_KEYPOINT_COUNT: usize = 19;
pub const ANGLE_COUNT: usize = 14;

/// One of the 20 tracked hand landmarks. Keypoint 0 of a finger chain is the
/// fingertip, the highest index the knuckle nearest the palm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KeypointId {
    class: HandClass,
    index: u8,
}

impl KeypointId {
    pub fn new(class: HandClass, index: u8) -> Option<KeypointId> {
        if (index as usize) < class.size() {
            Some(KeypointId { class, index })
        } else {
            None
        }
    }

    pub fn class(self) -> HandClass {
        self.class
    }

    pub fn index(self) -> u8 {
        self.index
    }

    /// Canonical position 0..20: A0..A2, B0..B3, C0..C3, D0..D3, E0..E3, F0.
    pub fn ordinal(self) -> usize {
        let base = match self.class {
            HandClass::A => 0,
            HandClass::B => 3,
            HandClass::C => 7,
            HandClass::D => 11,
            HandClass::E => 15,
            HandClass::F => 19,
        };
        base + self.index as usize
    }

    pub fn from_ordinal(ordinal: usize) -> Option<KeypointId> {
        let (class, index) = match ordinal {
            0..=2 => (HandClass::A, ordinal),
            3..=6 => (HandClass::B, ordinal - 3),
            7..=10 => (HandClass::C, ordinal - 7),
            11..=14 => (HandClass::D, ordinal - 11),
            15..=18 => (HandClass::E, ordinal - 15),
            19 => (HandClass::F, 0),
            _ => return None,
        };
        Some(KeypointId {
            class,
            index: index as u8,
        })
    }

    /// Index into the 19-entry vector table, `None` for the elbow.
    pub fn vector_index(self) -> Option<usize> {
        let ord = self.ordinal();
        if ord < VECTOR_KEYPOINT_COUNT {
            Some(ord)
        } else {
            None
        }
    }

    pub fn all() -> impl Iterator<Item = KeypointId> {
        (0..KEYPOINT_COUNT).map(|o| KeypointId::from_ordinal(o).unwrap())
    }

    pub const ELBOW: KeypointId = KeypointId {
        class: HandClass::F,
        index: 0,
    };
}

impl fmt::Display for KeypointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.class.letter(), self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        Vec3 {
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Orthogonal frame anchored at the elbow. The y axis points from the elbow
/// toward the middle-finger base, z is normal to the palm-base plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateFrame {
    pub origin: Vec3,
    pub axis_x: Vec3,
    pub axis_y: Vec3,
    pub axis_z: Vec3,
}

/// Builds the hand coordinate frame from the elbow and the two palm-base
/// keypoints (middle-finger base and index-finger base).
///
/// The z axis sign is fixed so that `axis_z` points along
/// `(middle_base - elbow) x (index_base - elbow)`, which makes
/// `(axis_x, axis_y, axis_z)` a right-handed triad.
pub fn build_coordinate_frame(
    elbow: Vec3,
    middle_base: Vec3,
    index_base: Vec3,
) -> Result<CoordinateFrame, HandError> {
    let along = middle_base - elbow;
    let side = index_base - elbow;
    let normal = along.cross(side);
    // |cross| = twice the triangle area.
    if normal.norm() <= 2e-12 {
        return Err(HandError::DegenerateFrame);
    }
    let axis_y = along.normalized();
    let axis_z = normal.normalized();
    let axis_x = axis_y.cross(axis_z);
    Ok(CoordinateFrame {
        origin: elbow,
        axis_x,
        axis_y,
        axis_z,
    })
}

/// Interaction angle at `b` between the arms `b -> a` and `b -> c`,
/// in degrees within [0, 180].
pub fn joint_angle(a: Vec3, b: Vec3, c: Vec3) -> Result<f64, HandError> {
    joint_angle_indexed(a, b, c, 0)
}

fn joint_angle_indexed(a: Vec3, b: Vec3, c: Vec3, index: usize) -> Result<f64, HandError> {
    let u = a - b;
    let v = c - b;
    let nu = u.norm();
    let nv = v.norm();
    if nu <= 1e-12 || nv <= 1e-12 {
        return Err(HandError::DegenerateAngle(index));
    }
    let cos = (u.dot(v) / (nu * nv)).clamp(-1.0, 1.0);
    Ok(cos.acos().to_degrees())
}

/// The fixed triples behind the 14 joint angles, as keypoint ordinals.
/// Thumb first (2 angles), then each finger chain with its elbow anchor
/// (3 angles each).
pub const ANGLE_TRIPLES: [(usize, usize, usize); ANGLE_COUNT] = [
    (0, 1, 2),
    (1, 2, 19),
    (3, 4, 5),
    (4, 5, 6),
    (5, 6, 19),
    (7, 8, 9),
    (8, 9, 10),
    (9, 10, 19),
    (11, 12, 13),
    (12, 13, 14),
    (13, 14, 19),
    (15, 16, 17),
    (16, 17, 18),
    (17, 18, 19),
];

/// Computes the 14 canonical joint angles from the 20 keypoint positions
/// (indexed by ordinal). A degenerate triple is reported, not zeroed.
pub fn angle_set(positions: &[Vec3; KEYPOINT_COUNT]) -> Result<[f64; ANGLE_COUNT], HandError> {
    let mut out = [0.0; ANGLE_COUNT];
    for (i, &(a, b, c)) in ANGLE_TRIPLES.iter().enumerate() {
        out[i] = joint_angle_indexed(positions[a], positions[b], positions[c], i)?;
    }
    Ok(out)
}

/// One time step of the hand: 19 relative keypoint vectors in baseline units,
/// 14 joint angles in degrees, a confidence per keypoint and a frame index.
#[derive(Debug, Clone, PartialEq)]
pub struct HandFrame {
    vectors: [Vec3; VECTOR_KEYPOINT_COUNT],
    angles: [f64; ANGLE_COUNT],
    confidence: [f64; KEYPOINT_COUNT],
    timestamp: u64,
}

impl HandFrame {
    pub fn new(
        vectors: [Vec3; VECTOR_KEYPOINT_COUNT],
        angles: [f64; ANGLE_COUNT],
        confidence: [f64; KEYPOINT_COUNT],
        timestamp: u64,
    ) -> Result<HandFrame, HandError> {
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(HandError::NonFinite);
        }
        for (index, &value) in angles.iter().enumerate() {
            if !value.is_finite() {
                return Err(HandError::NonFinite);
            }
            if !(0.0..360.0).contains(&value) {
                return Err(HandError::AngleOutOfRange { index, value });
            }
        }
        for (ord, &value) in confidence.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(HandError::ConfidenceOutOfRange {
                    keypoint: KeypointId::from_ordinal(ord).unwrap(),
                    value,
                });
            }
        }
        Ok(HandFrame {
            vectors,
            angles,
            confidence,
            timestamp,
        })
    }

    /// The relative coordinate vector of a keypoint; `None` for the elbow,
    /// which is the origin and carries no vector.
    pub fn vector(&self, keypoint: KeypointId) -> Option<Vec3> {
        keypoint.vector_index().map(|i| self.vectors[i])
    }

    pub fn vectors(&self) -> &[Vec3; VECTOR_KEYPOINT_COUNT] {
        &self.vectors
    }

    pub fn angles(&self) -> &[f64; ANGLE_COUNT] {
        &self.angles
    }

    pub fn confidence(&self, keypoint: KeypointId) -> f64 {
        self.confidence[keypoint.ordinal()]
    }

    pub fn confidences(&self) -> &[f64; KEYPOINT_COUNT] {
        &self.confidence
    }

    pub fn timestamp(&self) -> u64 {
        self.timestamp
    }
}

/// Frame-to-frame change: per-keypoint vector deltas decomposed on the three
/// axes plus the 14 angle deltas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaFrame {
    pub dvectors: [Vec3; VECTOR_KEYPOINT_COUNT],
    pub dangles: [f64; ANGLE_COUNT],
}

impl DeltaFrame {
    pub const ZERO: DeltaFrame = DeltaFrame {
        dvectors: [Vec3::ZERO; VECTOR_KEYPOINT_COUNT],
        dangles: [0.0; ANGLE_COUNT],
    };
}

/// Wraps a degree difference to (-180, 180].
pub fn wrap_angle_delta(delta: f64) -> f64 {
    let wrapped = (delta + 180.0).rem_euclid(360.0) - 180.0;
    if wrapped == -180.0 {
        180.0
    } else {
        wrapped
    }
}

/// Element-wise change from `prev` to `curr`. Angle deltas are wrapped to the
/// shortest signed change. The fixed keypoint layout guarantees matching key
/// sets by construction.
pub fn frame_delta(curr: &HandFrame, prev: &HandFrame) -> DeltaFrame {
    let mut dvectors = [Vec3::ZERO; VECTOR_KEYPOINT_COUNT];
    for i in 0..VECTOR_KEYPOINT_COUNT {
        dvectors[i] = curr.vectors[i] - prev.vectors[i];
    }
    let mut dangles = [0.0; ANGLE_COUNT];
    for i in 0..ANGLE_COUNT {
        dangles[i] = wrap_angle_delta(curr.angles[i] - prev.angles[i]);
    }
    DeltaFrame { dvectors, dangles }
}

/// Delta sequence of a frame sequence: the first delta is zero (the first
/// frame is its own reference), then consecutive differences.
pub fn delta_sequence(frames: &[HandFrame]) -> Vec<DeltaFrame> {
    let mut out = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        if i == 0 {
            out.push(DeltaFrame::ZERO);
        } else {
            out.push(frame_delta(frame, &frames[i - 1]));
        }
    }
    out
}
