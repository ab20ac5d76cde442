use std::fmt;

use super::ast::{ConstraintKind, FrameRef, JointConstraint, Meo, MeoProgram};
use super::vocab::{ExplicitFrame, Extremum, Joint, RotationVerb, TemporalRelation, TranslationDir, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    /// Digits with an optional fraction, plus an optional unit suffix.
    Number { text: String, unit: String },
    LParen,
    RParen,
    Comma,
    At,
    Semi,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number { text, unit } => format!("`{text}{unit}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::At => "`@`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '@' => Some(Tok::At),
            ';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, line: l0, column: c0 });
            i += 1;
            col += 1;
            continue;
        }
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            i += 1;
            col += 1;
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                if i >= chars.len() || !chars[i].is_ascii_digit() {
                    return Err(ParseError { line: l0, column: c0 + (i - start), message: "expected digits after `.`".into() });
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let ustart = i;
            while i < chars.len() && chars[i].is_ascii_alphabetic() {
                i += 1;
            }
            let unit: String = chars[ustart..i].iter().collect();
            col += i - start;
            out.push(Spanned { tok: Tok::Number { text, unit }, line: l0, column: c0 });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), line: l0, column: c0 });
        } else {
            return Err(ParseError { line, column: col, message: format!("unexpected character `{c}`") });
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, at: &Spanned, message: String) -> ParseError {
        ParseError { line: at.line, column: at.column, message }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let t = self.bump();
        if t.tok == want {
            Ok(())
        } else {
            Err(self.error_at(&t, format!("expected {}, found {}", want.describe(), t.tok.describe())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Spanned), ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            other => Err(self.error_at(&t, format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn word<V: Vocabulary>(&mut self) -> Result<V, ParseError> {
        let (s, at) = self.ident(V::KIND)?;
        V::parse_word(&s).ok_or_else(|| {
            self.error_at(&at, format!("unknown {} `{s}`; expected one of: {}", V::KIND, V::options()))
        })
    }

    fn program(&mut self) -> Result<MeoProgram, ParseError> {
        let mut ops = Vec::new();
        while self.peek().tok != Tok::Eof {
            ops.push(self.meo()?);
            match self.peek().tok {
                Tok::Semi => {
                    self.bump();
                }
                Tok::Eof => {}
                _ => {
                    let t = self.peek().clone();
                    return Err(self.error_at(&t, format!("expected `;` or end of input, found {}", t.tok.describe())));
                }
            }
        }
        Ok(MeoProgram { ops })
    }

    fn meo(&mut self) -> Result<Meo, ParseError> {
        let constraint = self.constraint()?;
        self.expect(Tok::At)?;
        let frame = self.frame()?;
        Ok(Meo { constraint, frame })
    }

    fn magnitude(&mut self, unit: &str) -> Result<f64, ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Number { text, unit: u } if u.eq_ignore_ascii_case(unit) => {
                let v: f64 = text.parse().map_err(|_| self.error_at(&t, format!("bad number `{text}`")))?;
                if v > 0.0 && v.is_finite() {
                    Ok(v)
                } else {
                    Err(self.error_at(&t, "magnitude must be positive".into()))
                }
            }
            Tok::Number { text, unit: u } => {
                Err(self.error_at(&t, format!("expected unit `{unit}` on `{text}`, found `{u}`")))
            }
            other => Err(self.error_at(&t, format!("expected magnitude in {unit}, found {}", other.describe()))),
        }
    }

    fn constraint(&mut self) -> Result<JointConstraint, ParseError> {
        let (kw, at) = self.ident("`rotate` or `translate`")?;
        match kw.to_ascii_lowercase().as_str() {
            "rotate" => {
                self.expect(Tok::LParen)?;
                let joint = self.word::<Joint>()?;
                self.expect(Tok::Comma)?;
                let verb = self.word::<RotationVerb>()?;
                let mut magnitude_deg = None;
                if self.peek().tok == Tok::Comma {
                    self.bump();
                    magnitude_deg = Some(self.magnitude("deg")?);
                }
                self.expect(Tok::RParen)?;
                Ok(JointConstraint { joint, kind: ConstraintKind::Rotate { verb, magnitude_deg } })
            }
            "translate" => {
                self.expect(Tok::LParen)?;
                let joint = self.word::<Joint>()?;
                self.expect(Tok::Comma)?;
                let dir = self.word::<TranslationDir>()?;
                let (mut relative_to, mut magnitude_m) = (None, None);
                if self.peek().tok == Tok::Comma {
                    self.bump();
                    if matches!(self.peek().tok, Tok::Ident(_)) {
                        relative_to = Some(self.word::<Joint>()?);
                        if self.peek().tok == Tok::Comma {
                            self.bump();
                            magnitude_m = Some(self.magnitude("m")?);
                        }
                    } else {
                        magnitude_m = Some(self.magnitude("m")?);
                    }
                }
                self.expect(Tok::RParen)?;
                Ok(JointConstraint { joint, kind: ConstraintKind::Translate { dir, relative_to, magnitude_m } })
            }
            _ => Err(self.error_at(&at, format!("unknown constraint `{kw}`; expected one of: rotate, translate"))),
        }
    }

    fn frame(&mut self) -> Result<FrameRef, ParseError> {
        let (kw, at) = self.ident("frame reference")?;
        let lower = kw.to_ascii_lowercase();
        if lower == "when" {
            self.expect(Tok::LParen)?;
            let anchor = self.word::<Joint>()?;
            self.expect(Tok::Comma)?;
            let extremum = self.word::<Extremum>()?;
            self.expect(Tok::Comma)?;
            let relation = self.word::<TemporalRelation>()?;
            self.expect(Tok::RParen)?;
            return Ok(FrameRef::Implicit { relation, anchor, extremum });
        }
        if lower == "frame" {
            self.expect(Tok::LParen)?;
            let t = self.bump();
            let frame = match &t.tok {
                Tok::Number { text, unit } if unit.is_empty() && !text.contains('.') => text
                    .parse()
                    .map_err(|_| self.error_at(&t, format!("frame index `{text}` too large")))?,
                other => return Err(self.error_at(&t, format!("expected frame index, found {}", other.describe()))),
            };
            self.expect(Tok::RParen)?;
            return Ok(FrameRef::Index { frame });
        }
        ExplicitFrame::parse_word(&kw).map(|frame| FrameRef::Explicit { frame }).ok_or_else(|| {
            self.error_at(
                &at,
                format!("unknown frame reference `{kw}`; expected one of: {}, when(...), frame(N)", ExplicitFrame::options()),
            )
        })
    }
}

/// Parses MEO surface syntax into a program.
pub fn parse_meo(text: &str) -> Result<MeoProgram, ParseError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.program()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_form() {
        let p = parse_meo("translate(waist, up) @ when(waist, lowest, at)").unwrap();
        assert_eq!(
            p.ops,
            vec![Meo::new(
                JointConstraint::translate(Joint::Waist, TranslationDir::Up, None, None),
                FrameRef::when(Joint::Waist, Extremum::Lowest, TemporalRelation::At)
            )]
        );
    }

    #[test]
    fn rotation_with_magnitude() {
        let p = parse_meo("rotate(right_knee, flex, 30deg) @ start").unwrap();
        assert_eq!(p.ops[0].constraint, JointConstraint::rotate(Joint::RightKnee, RotationVerb::Flex, Some(30.0)));
        assert_eq!(p.ops[0].frame, FrameRef::explicit(ExplicitFrame::Start));
    }

    #[test]
    fn sequencing_and_relative() {
        let p = parse_meo(
            "translate(right_hand, up) @ when(left_hand, highest, before); rotate(left_hip, abduct) @ middle",
        )
        .unwrap();
        assert_eq!(p.len(), 2);
        let p = parse_meo("TRANSLATE(Right_Hand, UP, head, 0.1m) @ frame(5);").unwrap();
        assert_eq!(
            p.ops[0].constraint,
            JointConstraint::translate(Joint::RightHand, TranslationDir::Up, Some(Joint::Head), Some(0.1))
        );
        assert_eq!(p.ops[0].frame, FrameRef::Index { frame: 5 });
        assert!(parse_meo("").unwrap().is_empty());
    }

    #[test]
    fn diagnostics_carry_position_and_options() {
        let e = parse_meo("rotate(rigt_knee, flex) @ start").unwrap_err();
        assert_eq!((e.line, e.column), (1, 8));
        assert!(e.message.contains("unknown joint `rigt_knee`"));
        assert!(e.message.contains("right_knee"));

        let e = parse_meo("rotate(head, flex) @ start;\ntranslate(head, sideways) @ end").unwrap_err();
        assert_eq!((e.line, e.column), (2, 17));
        assert!(e.message.contains("unknown translation direction"), "{e}");

        let e = parse_meo("rotate(head, flex, 30m) @ start").unwrap_err();
        assert!(e.message.contains("deg"));
        assert!(parse_meo("rotate(head, flex) start").is_err());
        assert!(parse_meo("rotate(head, flex, 0deg) @ start").is_err());
        assert!(parse_meo("rotate(head, flex) @ end $").is_err());
        assert!(parse_meo("rotate(head, flex) @ whenever").is_err());
    }
}
