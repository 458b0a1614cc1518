use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Benchmark family an example, dictionary or knowledge program belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dataset {
    StepGame,
    SparQA,
}

impl Dataset {
    pub fn as_str(self) -> &'static str {
        match self {
            Dataset::StepGame => "stepgame",
            Dataset::SparQA => "sparqa",
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dataset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stepgame" => Ok(Dataset::StepGame),
            "sparqa" | "spartqa" => Ok(Dataset::SparQA),
            other => Err(format!("unknown dataset '{other}'")),
        }
    }
}

/// SparQA question types: finding relation, finding block, yes/no, choose object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuestionType {
    FR,
    FB,
    YN,
    CO,
}

impl QuestionType {
    pub const ALL: [QuestionType; 4] = [
        QuestionType::FR,
        QuestionType::FB,
        QuestionType::YN,
        QuestionType::CO,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionType::FR => "FR",
            QuestionType::FB => "FB",
            QuestionType::YN => "YN",
            QuestionType::CO => "CO",
        }
    }

    /// Whether the gold answer may contain several labels.
    pub fn allows_multiple(self) -> bool {
        matches!(self, QuestionType::FR | QuestionType::CO)
    }
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuestionType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "FR" => Ok(QuestionType::FR),
            "FB" => Ok(QuestionType::FB),
            "YN" => Ok(QuestionType::YN),
            "CO" => Ok(QuestionType::CO),
            other => Err(format!("unknown question type '{other}'")),
        }
    }
}

/// Displacement on the StepGame grid; x grows to the east, y to the north.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Offset {
    pub dx: i64,
    pub dy: i64,
}

impl Offset {
    pub const fn new(dx: i64, dy: i64) -> Self {
        Offset { dx, dy }
    }

    pub fn signum(self) -> Offset {
        Offset::new(self.dx.signum(), self.dy.signum())
    }
}

impl std::ops::Add for Offset {
    type Output = Offset;
    fn add(self, o: Offset) -> Offset {
        Offset::new(self.dx + o.dx, self.dy + o.dy)
    }
}

impl std::ops::Sub for Offset {
    type Output = Offset;
    fn sub(self, o: Offset) -> Offset {
        Offset::new(self.dx - o.dx, self.dy - o.dy)
    }
}

/// The nine StepGame answer relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepGameRelation {
    Left,
    Right,
    Top,
    Down,
    TopLeft,
    TopRight,
    DownLeft,
    DownRight,
    Overlap,
}

impl StepGameRelation {
    pub const ALL: [StepGameRelation; 9] = [
        StepGameRelation::Left,
        StepGameRelation::Right,
        StepGameRelation::Top,
        StepGameRelation::Down,
        StepGameRelation::TopLeft,
        StepGameRelation::TopRight,
        StepGameRelation::DownLeft,
        StepGameRelation::DownRight,
        StepGameRelation::Overlap,
    ];

    /// Canonical answer label.
    pub fn label(self) -> &'static str {
        match self {
            StepGameRelation::Left => "left",
            StepGameRelation::Right => "right",
            StepGameRelation::Top => "top",
            StepGameRelation::Down => "down",
            StepGameRelation::TopLeft => "top-left",
            StepGameRelation::TopRight => "top-right",
            StepGameRelation::DownLeft => "down-left",
            StepGameRelation::DownRight => "down-right",
            StepGameRelation::Overlap => "overlap",
        }
    }

    /// Constant used for the relation inside ASP programs.
    pub fn asp_name(self) -> &'static str {
        match self {
            StepGameRelation::TopLeft => "top_left",
            StepGameRelation::TopRight => "top_right",
            StepGameRelation::DownLeft => "down_left",
            StepGameRelation::DownRight => "down_right",
            other => other.label(),
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.label() == s || r.asp_name() == s)
    }

    pub fn to_offset(self) -> Offset {
        match self {
            StepGameRelation::Left => Offset::new(-1, 0),
            StepGameRelation::Right => Offset::new(1, 0),
            StepGameRelation::Top => Offset::new(0, 1),
            StepGameRelation::Down => Offset::new(0, -1),
            StepGameRelation::TopLeft => Offset::new(-1, 1),
            StepGameRelation::TopRight => Offset::new(1, 1),
            StepGameRelation::DownLeft => Offset::new(-1, -1),
            StepGameRelation::DownRight => Offset::new(1, -1),
            StepGameRelation::Overlap => Offset::new(0, 0),
        }
    }

    /// Relation of a point at `relative` (any magnitude) to the origin.
    pub fn from_offset(relative: Offset) -> Self {
        let unit = relative.signum();
        Self::ALL
            .into_iter()
            .find(|r| r.to_offset() == unit)
            .expect("every sign pair has a relation")
    }

    pub fn inverse(self) -> Self {
        let o = self.to_offset();
        Self::from_offset(Offset::new(-o.dx, -o.dy))
    }
}

impl fmt::Display for StepGameRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Candidate answers of SparQA finding-relation questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SparqaRelation {
    Left,
    Right,
    Above,
    Below,
    NearTo,
    FarFrom,
    Touching,
    DontKnow,
}

impl SparqaRelation {
    pub const ALL: [SparqaRelation; 8] = [
        SparqaRelation::Left,
        SparqaRelation::Right,
        SparqaRelation::Above,
        SparqaRelation::Below,
        SparqaRelation::NearTo,
        SparqaRelation::FarFrom,
        SparqaRelation::Touching,
        SparqaRelation::DontKnow,
    ];

    /// Canonical label; also the ASP constant.
    pub fn label(self) -> &'static str {
        match self {
            SparqaRelation::Left => "left",
            SparqaRelation::Right => "right",
            SparqaRelation::Above => "above",
            SparqaRelation::Below => "below",
            SparqaRelation::NearTo => "near_to",
            SparqaRelation::FarFrom => "far_from",
            SparqaRelation::Touching => "touching",
            SparqaRelation::DontKnow => "dk",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.label() == s)
    }

    pub fn inverse(self) -> Self {
        match self {
            SparqaRelation::Left => SparqaRelation::Right,
            SparqaRelation::Right => SparqaRelation::Left,
            SparqaRelation::Above => SparqaRelation::Below,
            SparqaRelation::Below => SparqaRelation::Above,
            other => other,
        }
    }
}

impl fmt::Display for SparqaRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}
