//! Parametric trajectories for the eleven gestures, used to synthesize
//! keypoint streams in place of live capture. Every gesture is a smooth
//! deformation of one canonical flat hand anchored at the elbow; angles are
//! always derived geometrically from the deformed keypoint positions.

use super::NoiseSpec;
use crate::gesture::Gesture;
use crate::hand::{
    angle_set, build_coordinate_frame, HandClass, HandError, HandFrame, KeypointId, Vec3,
    KEYPOINT_COUNT, VECTOR_KEYPOINT_COUNT,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Palm-center reference of the canonical pose, in baseline units from the
/// elbow. Used to anchor skeleton fits onto a detected gravity center.
pub const PALM_CENTER: Vec3 = Vec3 {
    x: 0.0,
    y: 1.0,
    z: 0.0,
};

/// Distances of chain keypoints from the elbow, fingertip first.
const FINGER_REACH: [f64; 4] = [2.05, 1.80, 1.55, 1.30];
const THUMB_REACH: [f64; 3] = [1.45, 1.20, 0.95];

fn class_direction(class: HandClass) -> Vec3 {
    let (x, y) = match class {
        HandClass::A => (0.60, 0.80),
        HandClass::B => (0.28, 0.96),
        HandClass::C => (0.0, 1.0),
        HandClass::D => (-0.28, 0.96),
        HandClass::E => (-0.55, 0.835),
        HandClass::F => (0.0, 0.0),
    };
    if class == HandClass::F {
        Vec3::ZERO
    } else {
        Vec3::new(x, y, 0.0).normalized()
    }
}

/// The canonical flat right hand: every chain collinear with the elbow ray,
/// so all 14 joint angles start at exactly 180 degrees.
pub fn base_pose() -> [Vec3; KEYPOINT_COUNT] {
    let mut out = [Vec3::ZERO; KEYPOINT_COUNT];
    for kp in KeypointId::all() {
        if kp == KeypointId::ELBOW {
            continue;
        }
        let reach = match kp.class() {
            HandClass::A => THUMB_REACH[kp.index() as usize],
            _ => FINGER_REACH[kp.index() as usize],
        };
        out[kp.ordinal()] = class_direction(kp.class()) * reach;
    }
    out
}

/// One-way motion profile, 0 at the start, 1 at the end, zero slope at both.
fn sweep(tau: f64) -> f64 {
    (1.0 - (std::f64::consts::PI * tau).cos()) / 2.0
}

/// Out-and-back profile, 0 at both ends, 1 mid-gesture.
fn dip(tau: f64) -> f64 {
    (std::f64::consts::PI * tau).sin()
}

/// Front-loaded one-way profile: the motion starts at full speed and eases
/// out. Used for the whole-hand translations, so that a capture that misses
/// the head of the gesture genuinely loses information.
fn front(tau: f64) -> f64 {
    (std::f64::consts::PI * tau / 2.0).sin()
}

/// Pumping flexion: piecewise-linear ramps (5 frames up, 3 frames down at
/// gesture length 30), so the per-frame angle deltas are constant within
/// each ramp. The encoded symbols form clean runs that sequence alignment
/// can track and repair exactly, while a truncated or time-warped capture
/// lands its ramps out of phase and pays for it.
fn pulse(tau: f64) -> f64 {
    const KNOTS: [(f64, f64); 8] = [
        (0.0, 0.0),
        (5.0 / 29.0, 1.0),
        (8.0 / 29.0, 0.0),
        (13.0 / 29.0, 1.0),
        (16.0 / 29.0, 0.0),
        (21.0 / 29.0, 1.0),
        (24.0 / 29.0, 0.0),
        (1.0, 1.0),
    ];
    let t = tau.clamp(0.0, 1.0);
    for pair in KNOTS.windows(2) {
        let ((t0, v0), (t1, v1)) = (pair[0], pair[1]);
        if t <= t1 {
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
    }
    1.0
}

/// Whole-hand translation amplitudes, baseline units. Deliberately distinct
/// per gesture: the elbow-anchored angles swing with the travel distance,
/// so distinct amplitudes give every translation its own anchored-angle
/// range and no template can pass for a neighbor under sequence alignment.
fn translation_reach(gesture: Gesture) -> f64 {
    match gesture {
        Gesture::Push => 8.0,
        Gesture::Pull => 11.0,
        Gesture::SwipeLeft => 14.0,
        Gesture::SwipeRight => 12.5,
        Gesture::SwipeUp => 9.5,
        Gesture::SwipeDown => 10.5,
        _ => 0.0,
    }
}

/// Whole-hand rotation about the frame z axis, radians.
const ROTATION_AMPLITUDE: f64 = 6.0;

const ALL_CHAINS: [HandClass; 5] = [
    HandClass::A,
    HandClass::B,
    HandClass::C,
    HandClass::D,
    HandClass::E,
];

/// The finger articulation of a gesture: which chains flex, how deep, and
/// the flexion profile. Every moving gesture carries a distinct pattern;
/// translation alone would leave several gestures mirror-identical in angle
/// space (push/pull) or angle-flat like hold (rotations), and the bump
/// profiles keep the angle channels live through the gesture tail.
struct Grip {
    chains: &'static [HandClass],
    depth: f64,
    profile: GripProfile,
}

#[derive(Clone, Copy, PartialEq)]
enum GripProfile {
    OneWay,
    Dip,
    Pulse,
}

const DEG: f64 = std::f64::consts::PI / 180.0;

fn grip_of(gesture: Gesture) -> Option<Grip> {
    use GripProfile::*;
    use HandClass::*;
    let (chains, depth_deg, profile): (&'static [HandClass], f64, GripProfile) = match gesture {
        Gesture::Hold => return None,
        Gesture::Push => (&[A, C], 150.0, Pulse),
        Gesture::Pull => (&[B, C, D, E], 60.0, OneWay),
        Gesture::SwipeLeft => (&[D, E], 40.0, Dip),
        Gesture::SwipeRight => (&[B, C], 40.0, Dip),
        Gesture::SwipeUp => (&[C, E], 40.0, Dip),
        Gesture::SwipeDown => (&[B, D], 40.0, Dip),
        Gesture::RotateLeft => (&ALL_CHAINS[1..], 30.0, Dip),
        Gesture::RotateRight => (&ALL_CHAINS[1..], 55.0, Dip),
        Gesture::Click => (&[B], 80.0, Dip),
        Gesture::Pick => (&[A, B], 55.0, Dip),
    };
    Some(Grip {
        chains,
        depth: depth_deg * DEG,
        profile,
    })
}

/// Curls a finger chain: each segment direction rotates progressively out of
/// the palm plane (toward -z) by `flex` per joint, anchored at the chain base.
fn curl_chain(positions: &mut [Vec3; KEYPOINT_COUNT], class: HandClass, flex: f64) {
    let size = class.size();
    let base = KeypointId::new(class, (size - 1) as u8).unwrap();
    let dir = class_direction(class);
    let mut anchor = positions[base.ordinal()];
    for step in 1..size {
        let joint = KeypointId::new(class, (size - 1 - step) as u8).unwrap();
        let segment = match class {
            HandClass::A => THUMB_REACH[size - 1 - step] - THUMB_REACH[size - step],
            _ => FINGER_REACH[size - 1 - step] - FINGER_REACH[size - step],
        };
        let phi = flex * step as f64;
        let rotated = dir * phi.cos() - Vec3::new(0.0, 0.0, 1.0) * phi.sin();
        anchor = anchor + rotated * segment;
        positions[joint.ordinal()] = anchor;
    }
}

fn rotate_about_z(positions: &mut [Vec3; KEYPOINT_COUNT], theta: f64) {
    let (sin, cos) = theta.sin_cos();
    for p in positions.iter_mut() {
        *p = Vec3::new(p.x * cos - p.y * sin, p.x * sin + p.y * cos, p.z);
    }
}

fn translate(positions: &mut [Vec3; KEYPOINT_COUNT], offset: Vec3) {
    for kp in KeypointId::all() {
        if kp == KeypointId::ELBOW {
            continue;
        }
        positions[kp.ordinal()] = positions[kp.ordinal()] + offset;
    }
}

/// Keypoint positions of a gesture at frame `t` of `m`, before jitter.
pub fn pose_at(gesture: Gesture, t: usize, m: usize) -> [Vec3; KEYPOINT_COUNT] {
    let tau = if m <= 1 {
        0.0
    } else {
        t as f64 / (m - 1) as f64
    };
    let mut p = base_pose();
    if let Some(grip) = grip_of(gesture) {
        let profile = match grip.profile {
            GripProfile::OneWay => sweep(tau),
            GripProfile::Dip => dip(tau),
            GripProfile::Pulse => pulse(tau),
        };
        for &chain in grip.chains {
            curl_chain(&mut p, chain, grip.depth * profile);
        }
    }
    let reach = translation_reach(gesture);
    match gesture {
        Gesture::Hold | Gesture::Click | Gesture::Pick => {}
        Gesture::Push => translate(&mut p, Vec3::new(0.0, 0.0, reach * front(tau))),
        Gesture::Pull => translate(&mut p, Vec3::new(0.0, 0.0, -reach * front(tau))),
        Gesture::SwipeLeft => translate(&mut p, Vec3::new(-reach * front(tau), 0.0, 0.0)),
        Gesture::SwipeRight => translate(&mut p, Vec3::new(reach * front(tau), 0.0, 0.0)),
        Gesture::SwipeUp => translate(&mut p, Vec3::new(0.0, reach * front(tau), 0.0)),
        // Descends from a raised start so the chains never cross the elbow
        // anchor (which would degenerate the anchored angles).
        Gesture::SwipeDown => translate(&mut p, Vec3::new(0.0, reach * (1.0 - front(tau)), 0.0)),
        Gesture::RotateLeft => rotate_about_z(&mut p, ROTATION_AMPLITUDE * sweep(tau)),
        Gesture::RotateRight => rotate_about_z(&mut p, -ROTATION_AMPLITUDE * sweep(tau)),
    }
    p
}

/// Synthesizes one gesture performance: exactly `m` frames, deterministic in
/// `(gesture, seed)`. Optional jitter perturbs every keypoint position
/// uniformly per frame before the angles are derived.
pub fn synth_gesture(
    gesture: Gesture,
    m: usize,
    seed: u64,
    jitter: Option<&NoiseSpec>,
) -> Result<Vec<HandFrame>, HandError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frames = Vec::with_capacity(m);
    for t in 0..m {
        let mut positions = pose_at(gesture, t, m);
        if let Some(spec) = jitter {
            let a = spec.amplitude();
            for kp in KeypointId::all() {
                if kp == KeypointId::ELBOW {
                    continue;
                }
                let ord = kp.ordinal();
                positions[ord] = positions[ord]
                    + Vec3::new(
                        rng.random_range(-a..=a),
                        rng.random_range(-a..=a),
                        rng.random_range(-a..=a),
                    );
            }
        }
        let angles = angle_set(&positions)?;
        let mut vectors = [Vec3::ZERO; VECTOR_KEYPOINT_COUNT];
        vectors.copy_from_slice(&positions[..VECTOR_KEYPOINT_COUNT]);
        frames.push(HandFrame::new(
            vectors,
            angles,
            [1.0; KEYPOINT_COUNT],
            t as u64,
        )?);
    }
    Ok(frames)
}

/// The canonical coordinate frame of the base pose, built from the elbow and
/// the two palm-base keypoints.
pub fn canonical_frame() -> crate::hand::CoordinateFrame {
    let pose = base_pose();
    let middle_base = pose[KeypointId::new(HandClass::C, 3).unwrap().ordinal()];
    let index_base = pose[KeypointId::new(HandClass::B, 3).unwrap().ordinal()];
    build_coordinate_frame(Vec3::ZERO, middle_base, index_base).unwrap()
}

/// The reference template of a gesture: the clean seed-0 performance.
pub fn template(gesture: Gesture, m: usize) -> crate::codec::GestureTemplate {
    let frames = synth_gesture(gesture, m, 0, None).expect("clean trajectories are nondegenerate");
    crate::codec::GestureTemplate::from_numeric(gesture, crate::hand::delta_sequence(&frames))
}

/// Templates for the full registry, in registry order.
pub fn all_templates(m: usize) -> Vec<crate::codec::GestureTemplate> {
    crate::gesture::ALL_GESTURES
        .iter()
        .map(|&g| template(g, m))
        .collect()
}
