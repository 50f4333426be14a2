use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The ten pointing gestures plus the rejection outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GestureLabel {
    Up,
    Down,
    Left,
    Right,
    Rectangle,
    Circle,
    CheckMark,
    Caret,
    X,
    Star,
    Unclassified,
}

pub const NUM_CLASSES: usize = 10;

impl GestureLabel {
    /// Trainable classes in index order.
    pub const GESTURES: [GestureLabel; NUM_CLASSES] = [
        GestureLabel::Up,
        GestureLabel::Down,
        GestureLabel::Left,
        GestureLabel::Right,
        GestureLabel::Rectangle,
        GestureLabel::Circle,
        GestureLabel::CheckMark,
        GestureLabel::Caret,
        GestureLabel::X,
        GestureLabel::Star,
    ];

    /// Class index; `Unclassified` is 10.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0..NUM_CLASSES => Some(Self::GESTURES[i]),
            NUM_CLASSES => Some(GestureLabel::Unclassified),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GestureLabel::Up => "Up",
            GestureLabel::Down => "Down",
            GestureLabel::Left => "Left",
            GestureLabel::Right => "Right",
            GestureLabel::Rectangle => "Rectangle",
            GestureLabel::Circle => "Circle",
            GestureLabel::CheckMark => "CheckMark",
            GestureLabel::Caret => "Caret",
            GestureLabel::X => "X",
            GestureLabel::Star => "Star",
            GestureLabel::Unclassified => "Unclassified",
        }
    }

    pub fn is_gesture(self) -> bool {
        self != GestureLabel::Unclassified
    }
}

impl fmt::Display for GestureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GestureLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        (0..=NUM_CLASSES)
            .filter_map(GestureLabel::from_index)
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown gesture label {s:?}")))
    }
}
