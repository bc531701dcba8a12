//! Colored, oriented braid words and their plat closures.
//!
//! A braid in `B_2m` is a sequence of signed generator letters together with
//! the color and orientation of every strand at the bottom. Plat closure
//! caps strands `(2i-1, 2i)` at both ends, which forces equal colors and
//! opposite orientations within each capped pair.
//!
//! Text grammar (whitespace-tolerant, one braid per input):
//!
//! ```text
//! strands=<2m> colors=<c1,...,c_2m> word=<g1 g2 ...> [orient=<u|d>{2m}]
//! ```
//!
//! with each color an integer or `<odd>/2`, and each letter a nonzero signed
//! integer of magnitude at most `2m-1`. A JSON object with fields `strands`,
//! `colors_twice`, `word` and optional `orient` is accepted as well.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qarith::Spin;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BraidError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("generator index {letter} out of range at byte {pos}: |g| must be in 1..={max}")]
    Index { pos: usize, letter: i64, max: u32 },
    #[error("plat admissibility violated: {0}")]
    Plat(String),
    #[error("slice position {pos} out of range (word length {len})")]
    OutOfRange { pos: usize, len: usize },
}

/// Color and orientation of one strand at one horizontal level.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct StrandState {
    pub color: Spin,
    /// Orientation at this level: `true` when the strand points upward.
    pub up: bool,
}

/// Colors and orientations of all `2m` strands at one horizontal level.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LevelSlice {
    pub strands: Vec<StrandState>,
}

impl LevelSlice {
    pub fn width(&self) -> usize {
        self.strands.len()
    }

    pub fn colors(&self) -> Vec<Spin> {
        self.strands.iter().map(|s| s.color).collect()
    }

    /// Swap the full strand states at 0-based positions `i` and `i+1`.
    fn transpose(&mut self, i: usize) {
        self.strands.swap(i, i + 1);
    }

    /// Caps pair strands `(2i-1, 2i)`; each pair must carry equal colors and
    /// opposite orientations.
    pub fn plat_admissible(&self) -> Result<(), BraidError> {
        self.plat_colors_admissible()?;
        for (pair, chunk) in self.strands.chunks(2).enumerate() {
            if chunk[0].up == chunk[1].up {
                return Err(BraidError::Plat(format!(
                    "cap pair {} carries parallel orientations",
                    pair + 1
                )));
            }
        }
        Ok(())
    }

    /// The color half of plat admissibility: equal colors within each cap
    /// pair. This is all that is enforced at the top of a braid — the word's
    /// permutation fixes the top orientations, and requiring them to pair
    /// oppositely as well would reject standard presentations such as the
    /// σ₂³ trefoil plat.
    pub fn plat_colors_admissible(&self) -> Result<(), BraidError> {
        for (pair, chunk) in self.strands.chunks(2).enumerate() {
            if chunk[0].color != chunk[1].color {
                return Err(BraidError::Plat(format!(
                    "cap pair {} carries colors {} and {}",
                    pair + 1,
                    chunk[0].color,
                    chunk[1].color
                )));
            }
        }
        Ok(())
    }
}

/// A colored oriented braid word in `B_2m`, with bottom strand data.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ColoredBraidWord {
    strands: usize,
    word: Vec<i32>,
    bottom: Vec<StrandState>,
}

/// JSON form of a braid input.
#[derive(Serialize, Deserialize)]
struct BraidJson {
    strands: usize,
    colors_twice: Vec<u32>,
    word: Vec<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orient: Option<String>,
}

impl ColoredBraidWord {
    /// Assemble and validate a braid from parts. `orient` defaults to
    /// up/down alternation, the canonical antiparallel cap orientation.
    pub fn new(
        strands: usize,
        colors: Vec<Spin>,
        word: Vec<i32>,
        orient: Option<Vec<bool>>,
    ) -> Result<Self, BraidError> {
        if strands == 0 || strands % 2 != 0 {
            return Err(BraidError::Syntax {
                pos: 0,
                msg: format!("strand count must be a positive even integer, got {strands}"),
            });
        }
        if colors.len() != strands {
            return Err(BraidError::Syntax {
                pos: 0,
                msg: format!("expected {} colors, got {}", strands, colors.len()),
            });
        }
        let orient = match orient {
            Some(o) => {
                if o.len() != strands {
                    return Err(BraidError::Syntax {
                        pos: 0,
                        msg: format!("expected {} orientations, got {}", strands, o.len()),
                    });
                }
                o
            }
            None => (0..strands).map(|i| i % 2 == 0).collect(),
        };
        let max = strands as u32 - 1;
        for &g in &word {
            if g == 0 || g.unsigned_abs() > max {
                return Err(BraidError::Index { pos: 0, letter: i64::from(g), max });
            }
        }
        let bottom: Vec<StrandState> = colors
            .into_iter()
            .zip(orient)
            .map(|(color, up)| StrandState { color, up })
            .collect();
        let braid = ColoredBraidWord { strands, word, bottom };
        braid.bottom_slice().plat_admissible()?;
        braid.top_slice().plat_colors_admissible()?;
        Ok(braid)
    }

    /// Number of strands, `2m`.
    pub fn strands(&self) -> usize {
        self.strands
    }

    /// Number of cap pairs, `m`.
    pub fn pairs(&self) -> usize {
        self.strands / 2
    }

    pub fn word(&self) -> &[i32] {
        &self.word
    }

    pub fn bottom(&self) -> &[StrandState] {
        &self.bottom
    }

    pub fn bottom_slice(&self) -> LevelSlice {
        LevelSlice { strands: self.bottom.clone() }
    }

    pub fn top_slice(&self) -> LevelSlice {
        self.slice_at(self.word.len()).expect("word length is in range")
    }

    /// Colors and orientations after the first `position` letters.
    pub fn slice_at(&self, position: usize) -> Result<LevelSlice, BraidError> {
        if position > self.word.len() {
            return Err(BraidError::OutOfRange { pos: position, len: self.word.len() });
        }
        let mut slice = self.bottom_slice();
        for &g in &self.word[..position] {
            slice.transpose(g.unsigned_abs() as usize - 1);
        }
        Ok(slice)
    }

    /// Reverse the word and invert every letter.
    pub fn mirror(&self) -> ColoredBraidWord {
        ColoredBraidWord {
            strands: self.strands,
            word: self.word.iter().rev().map(|g| -g).collect(),
            bottom: self.bottom.clone(),
        }
    }

    /// Canonical text rendering; [`parse`] round-trips it.
    pub fn render(&self) -> String {
        let colors: Vec<String> = self.bottom.iter().map(|s| s.color.to_string()).collect();
        let word: Vec<String> = self.word.iter().map(|g| g.to_string()).collect();
        let orient: String = self.bottom.iter().map(|s| if s.up { 'u' } else { 'd' }).collect();
        format!(
            "strands={} colors={} word={} orient={}",
            self.strands,
            colors.join(","),
            word.join(" "),
            orient
        )
    }

    /// Serialize to the JSON input form.
    pub fn to_json(&self) -> String {
        let json = BraidJson {
            strands: self.strands,
            colors_twice: self.bottom.iter().map(|s| s.color.twice()).collect(),
            word: self.word.clone(),
            orient: Some(self.bottom.iter().map(|s| if s.up { 'u' } else { 'd' }).collect()),
        };
        serde_json::to_string(&json).expect("braid serialization cannot fail")
    }
}

/// Parse a braid from the text grammar or the JSON equivalent.
pub fn parse(text: &str) -> Result<ColoredBraidWord, BraidError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return parse_json(trimmed);
    }
    parse_text(text)
}

fn parse_json(text: &str) -> Result<ColoredBraidWord, BraidError> {
    let json: BraidJson = serde_json::from_str(text).map_err(|e| BraidError::Syntax {
        pos: e.column().saturating_sub(1),
        msg: format!("invalid braid JSON: {e}"),
    })?;
    let colors = json.colors_twice.into_iter().map(Spin::from_twice).collect();
    let orient = match json.orient {
        Some(s) => Some(parse_orient(&s, 0)?),
        None => None,
    };
    ColoredBraidWord::new(json.strands, colors, json.word, orient)
}

fn parse_orient(s: &str, pos: usize) -> Result<Vec<bool>, BraidError> {
    s.chars()
        .map(|c| match c {
            'u' => Ok(true),
            'd' => Ok(false),
            other => Err(BraidError::Syntax {
                pos,
                msg: format!("orientation characters must be 'u' or 'd', got {other:?}"),
            }),
        })
        .collect()
}

fn parse_color(token: &str, pos: usize) -> Result<Spin, BraidError> {
    let bad = |msg: String| BraidError::Syntax { pos, msg };
    if let Some(num) = token.strip_suffix("/2") {
        let n: u32 = num
            .parse()
            .map_err(|_| bad(format!("invalid color {token:?}")))?;
        Ok(Spin::from_twice(n))
    } else {
        let j: u32 = token
            .parse()
            .map_err(|_| bad(format!("invalid color {token:?} (want an integer or <odd>/2)")))?;
        Ok(Spin::from_twice(2 * j))
    }
}

fn parse_text(text: &str) -> Result<ColoredBraidWord, BraidError> {
    // Tokens carrying '=' open a section; bare tokens extend the current one.
    let mut sections: Vec<(String, usize, Vec<(String, usize)>)> = Vec::new();
    for (pos, token) in tokenize(text) {
        if let Some(eq) = token.find('=') {
            let key = token[..eq].to_string();
            let rest = &token[eq + 1..];
            let mut values = Vec::new();
            if !rest.is_empty() {
                values.push((rest.to_string(), pos + eq + 1));
            }
            sections.push((key, pos, values));
        } else if let Some(last) = sections.last_mut() {
            last.2.push((token.to_string(), pos));
        } else {
            return Err(BraidError::Syntax {
                pos,
                msg: format!("expected key=value, got {token:?}"),
            });
        }
    }

    let mut strands: Option<usize> = None;
    let mut colors: Option<Vec<Spin>> = None;
    let mut word: Option<Vec<i32>> = None;
    let mut orient: Option<Vec<bool>> = None;

    for (key, key_pos, values) in sections {
        match key.as_str() {
            "strands" => {
                let (v, pos) = single_value(&values, key_pos, "strands")?;
                strands = Some(v.parse().map_err(|_| BraidError::Syntax {
                    pos,
                    msg: format!("invalid strand count {v:?}"),
                })?);
            }
            "colors" => {
                let joined: String =
                    values.iter().map(|(v, _)| v.as_str()).collect::<Vec<_>>().join("");
                let pos = values.first().map_or(key_pos, |(_, p)| *p);
                let mut list = Vec::new();
                for piece in joined.split(',').filter(|p| !p.is_empty()) {
                    list.push(parse_color(piece, pos)?);
                }
                colors = Some(list);
            }
            "word" => {
                let mut letters = Vec::new();
                for (v, pos) in &values {
                    for piece in v.split(',').filter(|p| !p.is_empty()) {
                        let g: i64 = piece.parse().map_err(|_| BraidError::Syntax {
                            pos: *pos,
                            msg: format!("invalid generator letter {piece:?}"),
                        })?;
                        letters.push((g, *pos));
                    }
                }
                word = Some(check_letters(letters, strands)?);
            }
            "orient" => {
                let (v, pos) = single_value(&values, key_pos, "orient")?;
                orient = Some(parse_orient(&v, pos)?);
            }
            other => {
                return Err(BraidError::Syntax {
                    pos: key_pos,
                    msg: format!("unknown key {other:?}"),
                });
            }
        }
    }

    let strands = strands.ok_or_else(|| missing("strands"))?;
    let colors = colors.ok_or_else(|| missing("colors"))?;
    let word = word.ok_or_else(|| missing("word"))?;
    ColoredBraidWord::new(strands, colors, word, orient)
}

fn missing(key: &str) -> BraidError {
    BraidError::Syntax { pos: 0, msg: format!("missing required key {key:?}") }
}

fn single_value(
    values: &[(String, usize)],
    key_pos: usize,
    key: &str,
) -> Result<(String, usize), BraidError> {
    match values {
        [(v, p)] => Ok((v.clone(), *p)),
        [] => Err(BraidError::Syntax { pos: key_pos, msg: format!("empty value for {key}") }),
        _ => Err(BraidError::Syntax {
            pos: values[1].1,
            msg: format!("multiple values for {key}"),
        }),
    }
}

/// Letter validation happens at parse time so the error can carry the byte
/// position of the offending token.
fn check_letters(letters: Vec<(i64, usize)>, strands: Option<usize>) -> Result<Vec<i32>, BraidError> {
    let max = match strands {
        Some(s) if s >= 2 => s as u32 - 1,
        _ => u32::MAX, // validated again in `new`
    };
    let mut out = Vec::with_capacity(letters.len());
    for (g, pos) in letters {
        if g == 0 || g.unsigned_abs() > u64::from(max) {
            return Err(BraidError::Index { pos, letter: g, max });
        }
        out.push(g as i32);
    }
    Ok(out)
}

fn tokenize(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split_whitespace().map(move |tok| {
        // offset_from is safe: split_whitespace yields subslices of `text`
        let pos = tok.as_ptr() as usize - text.as_ptr() as usize;
        (pos, tok)
    })
}
