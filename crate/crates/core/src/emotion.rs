use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The eight expression classes, coded 0..=7 in listing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EmotionLabel {
    Neutral = 0,
    Happy = 1,
    Anger = 2,
    Disgust = 3,
    Surprise = 4,
    Fear = 5,
    Sad = 6,
    Contempt = 7,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; 8] = [
        EmotionLabel::Neutral,
        EmotionLabel::Happy,
        EmotionLabel::Anger,
        EmotionLabel::Disgust,
        EmotionLabel::Surprise,
        EmotionLabel::Fear,
        EmotionLabel::Sad,
        EmotionLabel::Contempt,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            EmotionLabel::Neutral => "neutral",
            EmotionLabel::Happy => "happy",
            EmotionLabel::Anger => "anger",
            EmotionLabel::Disgust => "disgust",
            EmotionLabel::Surprise => "surprise",
            EmotionLabel::Fear => "fear",
            EmotionLabel::Sad => "sad",
            EmotionLabel::Contempt => "contempt",
        }
    }

    /// Maps a CK/CK+ emotion code (1..=7) to a label.
    pub fn from_ck_code(code: u8) -> Option<Self> {
        Some(match code {
            1 => EmotionLabel::Anger,
            2 => EmotionLabel::Contempt,
            3 => EmotionLabel::Disgust,
            4 => EmotionLabel::Fear,
            5 => EmotionLabel::Happy,
            6 => EmotionLabel::Sad,
            7 => EmotionLabel::Surprise,
            _ => return None,
        })
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown emotion {0:?}")]
pub struct UnknownEmotion(pub String);

impl FromStr for EmotionLabel {
    type Err = UnknownEmotion;

    /// Accepts lowercase names, a few common aliases, or the numeric code.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        if let Ok(code) = t.parse::<u8>() {
            return Self::from_code(code).ok_or_else(|| UnknownEmotion(s.to_string()));
        }
        Ok(match t.as_str() {
            "neutral" => EmotionLabel::Neutral,
            "happy" | "happiness" => EmotionLabel::Happy,
            "anger" | "angry" => EmotionLabel::Anger,
            "disgust" => EmotionLabel::Disgust,
            "surprise" => EmotionLabel::Surprise,
            "fear" => EmotionLabel::Fear,
            "sad" | "sadness" => EmotionLabel::Sad,
            "contempt" => EmotionLabel::Contempt,
            _ => return Err(UnknownEmotion(s.to_string())),
        })
    }
}

impl Serialize for EmotionLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for EmotionLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
