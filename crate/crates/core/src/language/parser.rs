//! Tokenizer and recursive-descent parser for the requirements language.

use super::ast::*;
use super::LanguageError;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    Colon,
    Percent,
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Arrow,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Percent => "`%`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Arrow => "`->`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    pos: Position,
}

fn tokenize(text: &str) -> Result<(Vec<Spanned>, Position), LanguageError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Position { line, column: col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            col += 1;
            c
        };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            '#' => {
                while matches!(chars.peek(), Some(&c) if c != '\n') {
                    bump(&mut chars);
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                out.push(Spanned {
                    tok: Tok::Ident(s),
                    pos,
                });
            }
            c if c.is_ascii_digit() || c == '-' => {
                let mut s = String::new();
                if c == '-' {
                    bump(&mut chars);
                    match chars.peek() {
                        Some('>') => {
                            bump(&mut chars);
                            out.push(Spanned {
                                tok: Tok::Arrow,
                                pos,
                            });
                            continue;
                        }
                        Some(d) if d.is_ascii_digit() => s.push('-'),
                        _ => {
                            return Err(LanguageError::syntax(pos, "unexpected `-`"));
                        }
                    }
                }
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() || c == '.' || c == '/' {
                        s.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                if s.parse::<Rational>().is_err() {
                    return Err(LanguageError::syntax(
                        pos,
                        format!("malformed number `{s}`"),
                    ));
                }
                out.push(Spanned {
                    tok: Tok::Number(s),
                    pos,
                });
            }
            _ => {
                bump(&mut chars);
                let two = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>, next: char| {
                    chars.next_if_eq(&next).is_some()
                };
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ':' => Tok::Colon,
                    '%' => Tok::Percent,
                    '=' => Tok::Eq,
                    '<' => {
                        if two(&mut chars, '=') {
                            col += 1;
                            Tok::Le
                        } else {
                            Tok::Lt
                        }
                    }
                    '>' => {
                        if two(&mut chars, '=') {
                            col += 1;
                            Tok::Ge
                        } else {
                            Tok::Gt
                        }
                    }
                    '≤' => Tok::Le,
                    '≥' => Tok::Ge,
                    other => {
                        return Err(LanguageError::syntax(
                            pos,
                            format!("unexpected character `{other}`"),
                        ))
                    }
                };
                out.push(Spanned { tok, pos });
            }
        }
    }
    Ok((out, Position { line, column: col }))
}

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    eof: Position,
}

type PResult<T> = Result<T, LanguageError>;

impl Parser {
    fn pos(&self) -> Position {
        self.toks.get(self.at).map_or(self.eof, |t| t.pos)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    fn peek_word(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Ident(s)) => Some(s),
            _ => None,
        }
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        let found = self
            .peek()
            .map_or_else(|| "end of input".to_string(), Tok::describe);
        Err(LanguageError::syntax(
            self.pos(),
            format!("expected {expected}, found {found}"),
        ))
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            self.error(&tok.describe())
        }
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if self.peek_word() == Some(word) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, word: &str) -> PResult<()> {
        if self.eat_word(word) {
            Ok(())
        } else {
            self.error(&format!("`{word}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if is_identifier(s) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            Some(Tok::Ident(s)) if RESERVED_WORDS.contains(&s.as_str()) => {
                let msg = format!("expected {what}, found reserved word `{s}`");
                Err(LanguageError::syntax(self.pos(), msg))
            }
            _ => self.error(what),
        }
    }

    fn number(&mut self) -> PResult<Rational> {
        match self.peek() {
            Some(Tok::Number(s)) => {
                let r = s
                    .parse()
                    .map_err(|e: crate::rational::ParseRationalError| {
                        LanguageError::syntax(self.pos(), e.to_string())
                    })?;
                self.at += 1;
                Ok(r)
            }
            _ => self.error("a number"),
        }
    }

    fn count(&mut self) -> PResult<u64> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Number(s)) => {
                let n = s.parse::<u64>().map_err(|_| {
                    LanguageError::syntax(pos, format!("expected a whole number, found `{s}`"))
                })?;
                self.at += 1;
                Ok(n)
            }
            _ => self.error("a whole number"),
        }
    }

    fn duration(&mut self) -> PResult<Duration> {
        let magnitude = self.count()?;
        let unit = match self.peek_word().and_then(TimeUnit::from_word) {
            Some(u) => u,
            None => return self.error("a time unit (minutes, hours, days)"),
        };
        self.at += 1;
        Ok(Duration { magnitude, unit })
    }

    fn event(&mut self) -> PResult<EventPattern> {
        let name = self.ident("an event name")?;
        self.expect(Tok::LParen)?;
        let key = if self.eat(&Tok::RParen) {
            None
        } else {
            let k = self.ident("a correlation variable")?;
            self.expect(Tok::RParen)?;
            Some(k)
        };
        Ok(EventPattern { name, key })
    }

    fn atom(&mut self) -> PResult<Atom> {
        if self.eat_word("not") {
            let variable = self.ident("a state variable")?;
            return Ok(Atom::Flag {
                variable,
                value: false,
            });
        }
        let variable = self.ident("a state variable")?;
        let comparator = match self.peek() {
            Some(Tok::Lt) => Comparator::Lt,
            Some(Tok::Le) => Comparator::Le,
            Some(Tok::Eq) => Comparator::Eq,
            Some(Tok::Ge) => Comparator::Ge,
            Some(Tok::Gt) => Comparator::Gt,
            _ => {
                return Ok(Atom::Flag {
                    variable,
                    value: true,
                })
            }
        };
        self.at += 1;
        let threshold = self.number()?;
        Ok(Atom::Compare {
            variable,
            comparator,
            threshold,
        })
    }

    fn condition(&mut self) -> PResult<StateCondition> {
        let mut conjuncts = vec![self.atom()?];
        while self.eat_word("and") {
            conjuncts.push(self.atom()?);
        }
        Ok(StateCondition { conjuncts })
    }

    fn response_form(&mut self) -> PResult<Form> {
        let trigger = self.event()?;
        self.expect_word("then")?;
        if self.eat_word("eventually") {
            let response = self.event()?;
            return Ok(Form::UnboundedResponse { trigger, response });
        }
        if let Some(qualifier) = self.peek_word().and_then(Qualifier::from_keyword) {
            self.at += 1;
            let response = self.event()?;
            return Ok(Form::VagueQualified {
                trigger,
                response,
                qualifier,
            });
        }
        let response = self.event()?;
        if !self.eat_word("within") {
            return Ok(Form::UnboundedResponse { trigger, response });
        }
        let deadline = self.duration()?;
        if !self.eat_word("in") {
            return Ok(Form::BoundedResponse {
                trigger,
                response,
                deadline,
            });
        }
        self.expect_word("at")?;
        self.expect_word("least")?;
        let percent_pos = self.pos();
        let percent = self.number()?;
        self.expect(Tok::Percent)?;
        self.expect_word("of")?;
        self.expect_word("instances")?;
        let window = if self.eat_word("per") {
            Some(self.duration()?)
        } else {
            None
        };
        let min_ratio = percent
            .checked_mul(&Rational::new(1, 100))
            .ok_or_else(|| LanguageError::syntax(percent_pos, "percentage out of range"))?;
        Ok(Form::WindowedRatio {
            trigger,
            response,
            deadline,
            min_ratio,
            window,
        })
    }

    fn form(&mut self) -> PResult<Form> {
        if self.eat_word("when") {
            self.response_form()
        } else if self.eat_word("always") {
            Ok(Form::StateInvariant {
                condition: self.condition()?,
            })
        } else if self.eat_word("at") {
            self.expect_word("every")?;
            self.expect_word("observation")?;
            let condition = self.condition()?;
            self.expect_word("implies")?;
            let consequent = self.condition()?;
            Ok(Form::Instantaneous {
                condition,
                consequent,
            })
        } else if self.eat_word("rate") {
            let event = self.event()?;
            self.expect(Tok::Ge)?;
            let min_count = self.count()?;
            self.expect_word("per")?;
            let window = self.duration()?;
            Ok(Form::RateFloor {
                event,
                min_count,
                window,
            })
        } else if self.eat_word("fifo") {
            let entry = self.event()?;
            self.expect(Tok::Arrow)?;
            let exit = self.event()?;
            Ok(Form::Fifo { entry, exit })
        } else {
            self.error("`when`, `always`, `at every observation`, `rate`, or `fifo`")
        }
    }

    fn statement(&mut self) -> PResult<(Requirement, Position)> {
        let pos = self.pos();
        self.expect_word("req")?;
        let id = self.ident("a requirement id")?;
        self.expect(Tok::Colon)?;
        let form = self.form()?;
        if self.peek().is_some() && self.peek_word() != Some("req") {
            return self.error("end of statement");
        }
        Ok((Requirement { id, form }, pos))
    }
}

pub(super) fn parse(text: &str) -> Result<RequirementSet, LanguageError> {
    let (toks, eof) = tokenize(text)?;
    let mut parser = Parser { toks, at: 0, eof };
    let mut requirements = Vec::new();
    let mut positions = Vec::new();
    while parser.peek().is_some() {
        let (r, pos) = parser.statement()?;
        requirements.push(r);
        positions.push(Some(pos));
    }
    RequirementSet::with_positions(requirements, positions).map_err(|(error, pos)| {
        LanguageError::Invalid {
            position: pos.unwrap_or_default(),
            error,
        }
    })
}
