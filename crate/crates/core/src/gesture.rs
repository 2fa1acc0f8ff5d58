//! The eleven recognized gestures.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gesture {
    Push,
    Pull,
    Hold,
    SwipeLeft,
    SwipeRight,
    SwipeUp,
    SwipeDown,
    RotateLeft,
    RotateRight,
    Click,
    Pick,
}

pub const GESTURE_COUNT: usize = 11;

/// Registry order; also the tie-break order during recognition.
pub const ALL_GESTURES: [Gesture; GESTURE_COUNT] = [
    Gesture::Push,
    Gesture::Pull,
    Gesture::Hold,
    Gesture::SwipeLeft,
    Gesture::SwipeRight,
    Gesture::SwipeUp,
    Gesture::SwipeDown,
    Gesture::RotateLeft,
    Gesture::RotateRight,
    Gesture::Click,
    Gesture::Pick,
];

impl Gesture {
    pub fn name(self) -> &'static str {
        match self {
            Gesture::Push => "push",
            Gesture::Pull => "pull",
            Gesture::Hold => "hold",
            Gesture::SwipeLeft => "swipe-left",
            Gesture::SwipeRight => "swipe-right",
            Gesture::SwipeUp => "swipe-up",
            Gesture::SwipeDown => "swipe-down",
            Gesture::RotateLeft => "rotate-left",
            Gesture::RotateRight => "rotate-right",
            Gesture::Click => "click",
            Gesture::Pick => "pick",
        }
    }

    pub fn from_name(name: &str) -> Option<Gesture> {
        ALL_GESTURES.iter().copied().find(|g| g.name() == name)
    }

    /// Position in the registry order.
    pub fn ordinal(self) -> usize {
        ALL_GESTURES.iter().position(|g| *g == self).unwrap()
    }
}

impl fmt::Display for Gesture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
