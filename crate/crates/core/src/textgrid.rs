//! Praat TextGrid annotations.
//!
//! Only the long ("ooTextFile") text format is understood. Input may be UTF-8
//! (optionally with a BOM) or BOM-marked UTF-16 in either byte order; output
//! is always UTF-8. Point tiers (`TextTier`) are read and written but carry no
//! vowel intervals.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::labels::Vowel;

/// Slack allowed when checking interval ordering and tier bounds.
const TIME_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TextGridError {
    #[error("malformed TextGrid at line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("cannot decode TextGrid bytes: {0}")]
    Encoding(String),
    #[error("TextGrid invariant violated: {0}")]
    InvariantViolation(String),
    #[error("no tier named {0:?}")]
    UnknownTier(String),
    #[error("alias table line {line}: {message}")]
    AliasTable { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub t_start: f64,
    pub t_end: f64,
    pub label: String,
}

impl Interval {
    pub fn new(t_start: f64, t_end: f64, label: impl Into<String>) -> Self {
        Interval {
            t_start,
            t_end,
            label: label.into(),
        }
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub time: f64,
    pub mark: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TierItems {
    Intervals(Vec<Interval>),
    Points(Vec<Point>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tier {
    name: String,
    x_min: f64,
    x_max: f64,
    items: TierItems,
}

impl Tier {
    pub fn interval_tier(name: impl Into<String>, x_min: f64, x_max: f64, intervals: Vec<Interval>) -> Result<Tier, TextGridError> {
        let tier = Tier {
            name: name.into(),
            x_min,
            x_max,
            items: TierItems::Intervals(intervals),
        };
        tier.validate()?;
        Ok(tier)
    }

    pub fn point_tier(name: impl Into<String>, x_min: f64, x_max: f64, points: Vec<Point>) -> Result<Tier, TextGridError> {
        let tier = Tier {
            name: name.into(),
            x_min,
            x_max,
            items: TierItems::Points(points),
        };
        tier.validate()?;
        Ok(tier)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn items(&self) -> &TierItems {
        &self.items
    }

    /// The intervals of an interval tier; `None` for point tiers.
    pub fn intervals(&self) -> Option<&[Interval]> {
        match &self.items {
            TierItems::Intervals(v) => Some(v),
            TierItems::Points(_) => None,
        }
    }

    fn validate(&self) -> Result<(), TextGridError> {
        let bad = |msg: String| Err(TextGridError::InvariantViolation(format!("tier {:?}: {msg}", self.name)));
        if !(self.x_min.is_finite() && self.x_max.is_finite()) || self.x_min < 0.0 || self.x_min >= self.x_max {
            return bad(format!("bad tier bounds [{}, {}]", self.x_min, self.x_max));
        }
        match &self.items {
            TierItems::Intervals(intervals) => {
                let mut prev_end = f64::NEG_INFINITY;
                for (k, iv) in intervals.iter().enumerate() {
                    if !(iv.t_start.is_finite() && iv.t_end.is_finite()) || iv.t_start < 0.0 {
                        return bad(format!("interval {} has invalid times", k + 1));
                    }
                    if iv.t_start >= iv.t_end {
                        return bad(format!("interval {} has t_start >= t_end", k + 1));
                    }
                    if iv.t_start < self.x_min - TIME_SLACK || iv.t_end > self.x_max + TIME_SLACK {
                        return bad(format!("interval {} lies outside the tier", k + 1));
                    }
                    if iv.t_start < prev_end - TIME_SLACK {
                        return bad(format!("interval {} overlaps its predecessor", k + 1));
                    }
                    prev_end = iv.t_end;
                }
            }
            TierItems::Points(points) => {
                let mut prev = f64::NEG_INFINITY;
                for (k, p) in points.iter().enumerate() {
                    if !p.time.is_finite() || p.time < self.x_min - TIME_SLACK || p.time > self.x_max + TIME_SLACK {
                        return bad(format!("point {} lies outside the tier", k + 1));
                    }
                    if p.time < prev {
                        return bad(format!("point {} is out of order", k + 1));
                    }
                    prev = p.time;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextGrid {
    x_min: f64,
    x_max: f64,
    tiers: Vec<Tier>,
}

impl TextGrid {
    pub fn new(x_min: f64, x_max: f64, tiers: Vec<Tier>) -> Result<TextGrid, TextGridError> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min < 0.0 || x_min >= x_max {
            return Err(TextGridError::InvariantViolation(format!("bad grid bounds [{x_min}, {x_max}]")));
        }
        if tiers.is_empty() {
            return Err(TextGridError::InvariantViolation("a TextGrid needs at least one tier".into()));
        }
        let mut seen = HashSet::new();
        for t in &tiers {
            if !seen.insert(t.name.as_str()) {
                return Err(TextGridError::InvariantViolation(format!("duplicate tier name {:?}", t.name)));
            }
        }
        Ok(TextGrid { x_min, x_max, tiers })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn tiers(&self) -> &[Tier] {
        &self.tiers
    }

    pub fn tier(&self, name: &str) -> Option<&Tier> {
        self.tiers.iter().find(|t| t.name == name)
    }
}

/// An annotated interval whose label resolved to one of the six monophthongs.
#[derive(Debug, Clone, PartialEq)]
pub struct VowelInterval {
    pub interval: Interval,
    pub vowel: Vowel,
}

/// Maps corpus-specific transcriptions onto the six vowel symbols.
///
/// The file format is one `label=vowel` pair per line; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AliasTable {
    map: HashMap<String, Vowel>,
}

impl AliasTable {
    pub fn parse(text: &str) -> Result<AliasTable, TextGridError> {
        let mut map = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| TextGridError::AliasTable { line: n + 1, message };
            let (alias, vowel) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `label=vowel`, got {line:?}")))?;
            let alias = alias.trim();
            if alias.is_empty() {
                return Err(err("empty label".into()));
            }
            let vowel = Vowel::from_label(vowel).ok_or_else(|| err(format!("{:?} is not a monophthong", vowel.trim())))?;
            map.insert(alias.to_string(), vowel);
        }
        Ok(AliasTable { map })
    }

    pub fn insert(&mut self, alias: impl Into<String>, vowel: Vowel) {
        self.map.insert(alias.into(), vowel);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Exact match against the vowel symbols first, then the alias entries.
    pub fn resolve(&self, label: &str) -> Option<Vowel> {
        let t = label.trim();
        Vowel::from_label(t).or_else(|| self.map.get(t).copied())
    }
}

/// Vowel-labelled intervals of `tier_name`, in time order.
pub fn vowel_intervals(g: &TextGrid, tier_name: &str) -> Result<Vec<VowelInterval>, TextGridError> {
    vowel_intervals_with(g, tier_name, &AliasTable::default())
}

pub fn vowel_intervals_with(g: &TextGrid, tier_name: &str, aliases: &AliasTable) -> Result<Vec<VowelInterval>, TextGridError> {
    let tier = g.tier(tier_name).ok_or_else(|| TextGridError::UnknownTier(tier_name.to_string()))?;
    let Some(intervals) = tier.intervals() else {
        return Ok(Vec::new());
    };
    Ok(intervals
        .iter()
        .filter_map(|iv| {
            aliases.resolve(&iv.label).map(|vowel| VowelInterval {
                interval: iv.clone(),
                vowel,
            })
        })
        .collect())
}

fn decode(raw: &[u8]) -> Result<String, TextGridError> {
    let utf16 = |bytes: &[u8], from: fn([u8; 2]) -> u16| -> Result<String, TextGridError> {
        if !bytes.len().is_multiple_of(2) {
            return Err(TextGridError::Encoding("odd byte count in UTF-16 input".into()));
        }
        let units: Vec<u16> = bytes.chunks_exact(2).map(|c| from([c[0], c[1]])).collect();
        String::from_utf16(&units).map_err(|e| TextGridError::Encoding(e.to_string()))
    };
    match raw {
        [0xFF, 0xFE, rest @ ..] => utf16(rest, u16::from_le_bytes),
        [0xFE, 0xFF, rest @ ..] => utf16(rest, u16::from_be_bytes),
        [0xEF, 0xBB, 0xBF, rest @ ..] => String::from_utf8(rest.to_vec()).map_err(|e| TextGridError::Encoding(e.to_string())),
        _ => String::from_utf8(raw.to_vec()).map_err(|e| TextGridError::Encoding(e.to_string())),
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn line(&self) -> usize {
        self.text[..self.pos].matches('\n').count() + 1
    }

    fn error(&self, message: impl Into<String>) -> TextGridError {
        TextGridError::Malformed {
            line: self.line(),
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.text.len()
    }

    fn peek_word(&mut self, word: &str) -> bool {
        self.skip_ws();
        self.rest().starts_with(word)
    }

    /// Matches each token in turn, allowing whitespace between them.
    fn expect(&mut self, tokens: &[&str]) -> Result<(), TextGridError> {
        for tok in tokens {
            self.skip_ws();
            if !self.rest().starts_with(tok) {
                let found: String = self.rest().chars().take(24).collect();
                return Err(self.error(format!("expected {tok:?}, found {found:?}")));
            }
            self.pos += tok.len();
        }
        Ok(())
    }

    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let rest = self.rest();
        let end = rest.find(|c: char| c.is_whitespace() || c == ']').unwrap_or(rest.len());
        self.pos += end;
        &rest[..end]
    }

    fn number(&mut self) -> Result<f64, TextGridError> {
        let w = self.word();
        match w.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.error(format!("expected a number, found {w:?}"))),
        }
    }

    fn count(&mut self) -> Result<usize, TextGridError> {
        let w = self.word();
        w.parse::<usize>().map_err(|_| self.error(format!("expected a count, found {w:?}")))
    }

    fn string(&mut self) -> Result<String, TextGridError> {
        self.skip_ws();
        if !self.rest().starts_with('"') {
            return Err(self.error("expected a quoted string"));
        }
        self.pos += 1;
        let mut out = String::new();
        loop {
            let rest = self.rest();
            let Some(q) = rest.find('"') else {
                return Err(self.error("unterminated string"));
            };
            out.push_str(&rest[..q]);
            self.pos += q + 1;
            if self.rest().starts_with('"') {
                out.push('"');
                self.pos += 1;
            } else {
                return Ok(out);
            }
        }
    }

    fn keyed_number(&mut self, key: &str) -> Result<f64, TextGridError> {
        self.expect(&[key, "="])?;
        self.number()
    }

    fn keyed_string(&mut self, key: &str) -> Result<String, TextGridError> {
        self.expect(&[key, "="])?;
        self.string()
    }

    fn indexed_header(&mut self, key: &str, index: usize) -> Result<(), TextGridError> {
        self.expect(&[key, "["])?;
        let n = self.count()?;
        if n != index {
            return Err(self.error(format!("expected {key} [{index}], found {key} [{n}]")));
        }
        self.expect(&["]", ":"])
    }
}

pub fn parse_textgrid(raw: &[u8]) -> Result<TextGrid, TextGridError> {
    let text = decode(raw)?;
    let mut c = Cursor { text: &text, pos: 0 };

    let file_type = c.keyed_string("File type")?;
    if file_type != "ooTextFile" {
        return Err(c.error(format!("unsupported file type {file_type:?}")));
    }
    let class = c.keyed_string("Object class")?;
    if class != "TextGrid" {
        return Err(c.error(format!("object class {class:?} is not a TextGrid")));
    }
    if !c.peek_word("xmin") {
        return Err(c.error("short-format TextGrid files are not supported"));
    }
    let x_min = c.keyed_number("xmin")?;
    let x_max = c.keyed_number("xmax")?;
    c.expect(&["tiers?"])?;
    if c.peek_word("<absent>") {
        return Err(TextGridError::InvariantViolation("a TextGrid needs at least one tier".into()));
    }
    c.expect(&["<exists>", "size", "="])?;
    let n_tiers = c.count()?;
    c.expect(&["item", "[", "]", ":"])?;

    let mut tiers = Vec::with_capacity(n_tiers);
    for k in 1..=n_tiers {
        if c.at_end() {
            return Err(c.error(format!("declared {n_tiers} tiers but found {}", k - 1)));
        }
        c.indexed_header("item", k)?;
        tiers.push(parse_tier(&mut c)?);
    }
    if !c.at_end() {
        return Err(c.error(format!("content after the {n_tiers} declared tiers")));
    }
    TextGrid::new(x_min, x_max, tiers)
}

fn parse_tier(c: &mut Cursor<'_>) -> Result<Tier, TextGridError> {
    let class = c.keyed_string("class")?;
    let name = c.keyed_string("name")?;
    let x_min = c.keyed_number("xmin")?;
    let x_max = c.keyed_number("xmax")?;
    match class.as_str() {
        "IntervalTier" => {
            c.expect(&["intervals", ":", "size", "="])?;
            let n = c.count()?;
            let mut intervals = Vec::with_capacity(n);
            for k in 1..=n {
                if !c.peek_word("intervals") {
                    return Err(c.error(format!("tier {name:?} declares {n} intervals but lists {}", k - 1)));
                }
                c.indexed_header("intervals", k)?;
                let t_start = c.keyed_number("xmin")?;
                let t_end = c.keyed_number("xmax")?;
                let label = c.keyed_string("text")?;
                intervals.push(Interval { t_start, t_end, label });
            }
            if c.peek_word("intervals") {
                return Err(c.error(format!("tier {name:?} lists more than its {n} declared intervals")));
            }
            Tier::interval_tier(name, x_min, x_max, intervals)
        }
        "TextTier" => {
            c.expect(&["points", ":", "size", "="])?;
            let n = c.count()?;
            let mut points = Vec::with_capacity(n);
            for k in 1..=n {
                if !c.peek_word("points") {
                    return Err(c.error(format!("tier {name:?} declares {n} points but lists {}", k - 1)));
                }
                c.indexed_header("points", k)?;
                let time = if c.peek_word("time") {
                    c.keyed_number("time")?
                } else {
                    c.keyed_number("number")?
                };
                let mark = c.keyed_string("mark")?;
                points.push(Point { time, mark });
            }
            if c.peek_word("points") {
                return Err(c.error(format!("tier {name:?} lists more than its {n} declared points")));
            }
            Tier::point_tier(name, x_min, x_max, points)
        }
        other => Err(c.error(format!("unknown tier class {other:?}"))),
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Long-format UTF-8 text that [`parse_textgrid`] reads back to `g` exactly.
pub fn serialize_textgrid(g: &TextGrid) -> Vec<u8> {
    let mut out = String::new();
    // Writing into a String cannot fail.
    let _ = write_grid(&mut out, g);
    out.into_bytes()
}

fn write_grid(out: &mut String, g: &TextGrid) -> std::fmt::Result {
    writeln!(out, "File type = \"ooTextFile\"")?;
    writeln!(out, "Object class = \"TextGrid\"")?;
    writeln!(out)?;
    writeln!(out, "xmin = {} ", g.x_min)?;
    writeln!(out, "xmax = {} ", g.x_max)?;
    writeln!(out, "tiers? <exists> ")?;
    writeln!(out, "size = {} ", g.tiers.len())?;
    writeln!(out, "item []: ")?;
    for (k, tier) in g.tiers.iter().enumerate() {
        writeln!(out, "    item [{}]:", k + 1)?;
        let class = match tier.items {
            TierItems::Intervals(_) => "IntervalTier",
            TierItems::Points(_) => "TextTier",
        };
        writeln!(out, "        class = \"{class}\" ")?;
        writeln!(out, "        name = {} ", quote(&tier.name))?;
        writeln!(out, "        xmin = {} ", tier.x_min)?;
        writeln!(out, "        xmax = {} ", tier.x_max)?;
        match &tier.items {
            TierItems::Intervals(intervals) => {
                writeln!(out, "        intervals: size = {} ", intervals.len())?;
                for (i, iv) in intervals.iter().enumerate() {
                    writeln!(out, "        intervals [{}]:", i + 1)?;
                    writeln!(out, "            xmin = {} ", iv.t_start)?;
                    writeln!(out, "            xmax = {} ", iv.t_end)?;
                    writeln!(out, "            text = {} ", quote(&iv.label))?;
                }
            }
            TierItems::Points(points) => {
                writeln!(out, "        points: size = {} ", points.len())?;
                for (i, p) in points.iter().enumerate() {
                    writeln!(out, "        points [{}]:", i + 1)?;
                    writeln!(out, "            number = {} ", p.time)?;
                    writeln!(out, "            mark = {} ", quote(&p.mark))?;
                }
            }
        }
    }
    Ok(())
}
