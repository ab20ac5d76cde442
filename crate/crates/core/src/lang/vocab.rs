use std::fmt;

use serde::{Deserialize, Serialize};

/// A closed word list with canonical lowercase spellings.
pub trait Vocabulary: Sized + Copy + 'static {
    /// What the word list is called in diagnostics ("joint", "verb", ...).
    const KIND: &'static str;
    const ALL: &'static [Self];

    fn as_str(self) -> &'static str;

    /// Case-insensitive lookup.
    fn parse_word(word: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|v| v.as_str().eq_ignore_ascii_case(word))
    }

    fn options() -> String {
        Self::ALL.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(", ")
    }
}

macro_rules! vocabulary {
    ($(#[$meta:meta])* $name:ident, $kind:literal { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl Vocabulary for $name {
            const KIND: &'static str = $kind;
            const ALL: &'static [Self] = &[$(Self::$variant),+];

            fn as_str(self) -> &'static str {
                match self {
                    $(Self::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

vocabulary!(
    /// Editable joints.
    Joint, "joint" {
        RightElbow => "right_elbow",
        LeftElbow => "left_elbow",
        RightHip => "right_hip",
        LeftHip => "left_hip",
        RightKnee => "right_knee",
        LeftKnee => "left_knee",
        RightShoulder => "right_shoulder",
        LeftShoulder => "left_shoulder",
        RightHand => "right_hand",
        LeftHand => "left_hand",
        RightFoot => "right_foot",
        LeftFoot => "left_foot",
        Waist => "waist",
        Head => "head",
    }
);

vocabulary!(RotationVerb, "rotation verb" {
    Adduct => "adduct",
    Abduct => "abduct",
    Flex => "flex",
    Extend => "extend",
});

vocabulary!(TranslationDir, "translation direction" {
    In => "in",
    Out => "out",
    Forward => "forward",
    Backward => "backward",
    Up => "up",
    Down => "down",
});

vocabulary!(ExplicitFrame, "explicit frame" {
    Start => "start",
    End => "end",
    Middle => "middle",
    EntireMotion => "entire_motion",
});

vocabulary!(TemporalRelation, "temporal relation" {
    Before => "before",
    After => "after",
    At => "at",
});

vocabulary!(Extremum, "extremum" {
    Highest => "highest",
    Lowest => "lowest",
    Furthest => "furthest",
    Closest => "closest",
});

/// Which side of the sagittal plane a joint sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
    Midline,
}

impl Joint {
    pub fn side(self) -> Side {
        use Joint::*;
        match self {
            RightElbow | RightHip | RightKnee | RightShoulder | RightHand | RightFoot => Side::Right,
            LeftElbow | LeftHip | LeftKnee | LeftShoulder | LeftHand | LeftFoot => Side::Left,
            Waist | Head => Side::Midline,
        }
    }

    /// The same joint on the other side of the body.
    pub fn mirrored(self) -> Joint {
        use Joint::*;
        match self {
            RightElbow => LeftElbow,
            LeftElbow => RightElbow,
            RightHip => LeftHip,
            LeftHip => RightHip,
            RightKnee => LeftKnee,
            LeftKnee => RightKnee,
            RightShoulder => LeftShoulder,
            LeftShoulder => RightShoulder,
            RightHand => LeftHand,
            LeftHand => RightHand,
            RightFoot => LeftFoot,
            LeftFoot => RightFoot,
            Waist => Waist,
            Head => Head,
        }
    }
}

impl TranslationDir {
    pub fn opposite(self) -> Self {
        use TranslationDir::*;
        match self {
            In => Out,
            Out => In,
            Forward => Backward,
            Backward => Forward,
            Up => Down,
            Down => Up,
        }
    }

    /// `in`/`out` are relative to the sagittal plane.
    pub fn is_lateral(self) -> bool {
        matches!(self, TranslationDir::In | TranslationDir::Out)
    }
}

impl RotationVerb {
    pub fn opposite(self) -> Self {
        use RotationVerb::*;
        match self {
            Adduct => Abduct,
            Abduct => Adduct,
            Flex => Extend,
            Extend => Flex,
        }
    }
}
