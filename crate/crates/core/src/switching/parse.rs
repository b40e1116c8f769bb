//! Switching-system documents:
//!
//! ```text
//! vars e k
//! machine S0 S1 S2 S3          # optional; when present, pairs must use declared names
//! pair {e,!k} S1
//! mode {e} { pair {k} S0 ; pair {!k} S1 }
//! modes-reqs {e} {R1,R2}
//! ```
//!
//! `vars` and `machine` lists end at the end of their line; `mode` blocks
//! may span lines. A file holds either top-level pairs or modes, not both.
//! `#` starts a comment.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{
    build_machine_switching, build_mode_switching, Condition, Literal, MachineId,
    MachineSwitchingSystem, ModeRequirementTable, ModeSwitchingSystem, SwitchingError,
    SwitchingSystem, SwitchingWarning, Valuation,
};

const KEYWORDS: [&str; 5] = ["vars", "machine", "pair", "mode", "modes-reqs"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdaptiveSystem {
    Machine(MachineSwitchingSystem),
    Mode(ModeSwitchingSystem),
}

impl SwitchingSystem for AdaptiveSystem {
    fn vars(&self) -> &[String] {
        match self {
            AdaptiveSystem::Machine(m) => m.vars(),
            AdaptiveSystem::Mode(m) => m.vars(),
        }
    }

    fn select_bits(&self, bits: u64) -> Option<&MachineId> {
        match self {
            AdaptiveSystem::Machine(m) => m.select_bits(bits),
            AdaptiveSystem::Mode(m) => m.select_bits(bits),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchingDocument {
    pub vars: Vec<String>,
    pub system: Option<AdaptiveSystem>,
    pub table: Option<ModeRequirementTable>,
    pub warnings: Vec<SwitchingWarning>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Open,
    Close,
    Comma,
    Semi,
    Not,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Open => "`{`".into(),
            Tok::Close => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Not => "`!`".into(),
        }
    }
}

fn word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '@' | '\'')
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, SwitchingError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut chars = content.char_indices().peekable();
        while let Some((start, c)) = chars.next() {
            let tok = match c {
                c if c.is_whitespace() => continue,
                '{' => Tok::Open,
                '}' => Tok::Close,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '!' | '¬' => Tok::Not,
                c if word_char(c) => {
                    let mut end = start + c.len_utf8();
                    while let Some(&(j, d)) = chars.peek() {
                        if !word_char(d) {
                            break;
                        }
                        end = j + d.len_utf8();
                        chars.next();
                    }
                    Tok::Word(content[start..end].to_string())
                }
                other => {
                    return Err(SwitchingError::Parse {
                        line,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            };
            out.push((line, tok));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or(self.toks.last())
            .map_or(1, |(l, _)| *l)
    }

    fn err(&self, message: String) -> SwitchingError {
        SwitchingError::Parse {
            line: self.line(),
            message,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn next(&mut self, what: &str) -> Result<Tok, SwitchingError> {
        match self.toks.get(self.pos) {
            Some((_, t)) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(self.err(format!("expected {what}, found end of input"))),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SwitchingError> {
        let found = self.next(what)?;
        if found == tok {
            Ok(())
        } else {
            self.pos -= 1;
            Err(self.err(format!("expected {what}, found {}", found.describe())))
        }
    }

    fn word(&mut self, what: &str) -> Result<String, SwitchingError> {
        match self.next(what)? {
            Tok::Word(w) if !KEYWORDS.contains(&w.as_str()) => Ok(w),
            other => {
                self.pos -= 1;
                Err(self.err(format!("expected {what}, found {}", other.describe())))
            }
        }
    }

    fn at_word_on(&self, line: usize) -> bool {
        matches!(self.toks.get(self.pos), Some((l, Tok::Word(w))) if *l == line && !KEYWORDS.contains(&w.as_str()))
    }

    /// `{` item (`,` item)* `}` with possibly no items.
    fn braced<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, SwitchingError>,
    ) -> Result<Vec<T>, SwitchingError> {
        self.expect(Tok::Open, "`{`")?;
        let mut items = Vec::new();
        if self.peek() == Some(&Tok::Close) {
            self.pos += 1;
            return Ok(items);
        }
        loop {
            items.push(item(self)?);
            match self.next("`,` or `}`")? {
                Tok::Comma => {}
                Tok::Close => return Ok(items),
                other => {
                    self.pos -= 1;
                    return Err(
                        self.err(format!("expected `,` or `}}`, found {}", other.describe()))
                    );
                }
            }
        }
    }

    fn condition(&mut self) -> Result<Condition, SwitchingError> {
        let lits = self.braced(|p| {
            let positive = if p.peek() == Some(&Tok::Not) {
                p.pos += 1;
                false
            } else {
                true
            };
            Ok(Literal {
                var: p.word("a variable")?,
                positive,
            })
        })?;
        Ok(Condition::new(lits))
    }

    fn pair(&mut self) -> Result<(usize, Condition, MachineId), SwitchingError> {
        let line = self.line();
        let k = self.condition()?;
        let name = self.word("a machine id")?;
        Ok((line, k, parse_machine_id(&name)))
    }
}

fn parse_machine_id(s: &str) -> MachineId {
    let origin = s.rsplit_once('@').and_then(|(name, o)| {
        let (i, j) = o.split_once('.')?;
        Some((name, (i.parse().ok()?, j.parse().ok()?)))
    });
    match origin {
        Some((name, o)) if !name.is_empty() => MachineId {
            name: name.to_string(),
            origin: Some(o),
        },
        _ => MachineId::new(s),
    }
}

type Pairs = Vec<(usize, Condition, MachineId)>;

pub fn parse_switching(text: &str) -> Result<SwitchingDocument, SwitchingError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let mut vars: Vec<String> = Vec::new();
    let mut declared: Option<BTreeSet<String>> = None;
    let mut pairs: Pairs = Vec::new();
    let mut modes: Vec<(usize, Condition, Pairs)> = Vec::new();
    let mut rows: Vec<(Condition, BTreeSet<String>)> = Vec::new();

    while let Some(tok) = p.peek().cloned() {
        let Tok::Word(kw) = tok else {
            return Err(p.err(format!("expected a statement, found {}", tok.describe())));
        };
        let line = p.line();
        p.pos += 1;
        match kw.as_str() {
            "vars" => {
                if !p.at_word_on(line) {
                    return Err(p.err("`vars` needs at least one variable".into()));
                }
                while p.at_word_on(line) {
                    vars.push(p.word("a variable")?);
                }
            }
            "machine" => {
                let set = declared.get_or_insert_with(BTreeSet::new);
                if !p.at_word_on(line) {
                    return Err(p.err("`machine` needs at least one machine id".into()));
                }
                while p.at_word_on(line) {
                    set.insert(p.word("a machine id")?);
                }
            }
            "pair" => pairs.push(p.pair()?),
            "mode" => {
                let e = p.condition()?;
                p.expect(Tok::Open, "`{`")?;
                let mut inner = Vec::new();
                loop {
                    match p.next("`pair` or `}`")? {
                        Tok::Close => break,
                        Tok::Semi => {}
                        Tok::Word(w) if w == "pair" => inner.push(p.pair()?),
                        other => {
                            p.pos -= 1;
                            return Err(p.err(format!(
                                "expected `pair` or `}}`, found {}",
                                other.describe()
                            )));
                        }
                    }
                }
                modes.push((line, e, inner));
            }
            "modes-reqs" => {
                let e = p.condition()?;
                let ids = p.braced(|p| p.word("a requirement id"))?;
                rows.push((e, ids.into_iter().collect()));
            }
            other => {
                p.pos -= 1;
                return Err(p.err(format!("unknown statement `{other}`")));
            }
        }
    }

    if !pairs.is_empty() && !modes.is_empty() {
        return Err(SwitchingError::Parse {
            line: modes[0].0,
            message: "a file holds either top-level pairs or modes, not both".into(),
        });
    }
    if let Some(declared) = &declared {
        let all = pairs.iter().chain(modes.iter().flat_map(|(_, _, m)| m));
        for (line, _, s) in all {
            if !declared.contains(&s.to_string()) && !declared.contains(&s.name) {
                return Err(SwitchingError::Parse {
                    line: *line,
                    message: format!("machine `{s}` is not declared"),
                });
            }
        }
    }

    let mut warnings = Vec::new();
    let strip = |ps: Pairs| ps.into_iter().map(|(_, k, s)| (k, s)).collect::<Vec<_>>();
    let system = if !modes.is_empty() {
        let mut built = Vec::new();
        for (_, e, inner) in modes {
            let (m, w) = build_machine_switching(&vars, strip(inner))?;
            warnings.extend(w);
            built.push((e, m));
        }
        let (ms, w) = build_mode_switching(&vars, built)?;
        warnings.extend(w);
        Some(AdaptiveSystem::Mode(ms))
    } else if !pairs.is_empty() {
        let (m, w) = build_machine_switching(&vars, strip(pairs))?;
        warnings.extend(w);
        Some(AdaptiveSystem::Machine(m))
    } else {
        None
    };

    let table = if rows.is_empty() {
        None
    } else {
        if !vars.is_empty() {
            for (e, _) in &rows {
                if let Some(l) = e.literals().iter().find(|l| !vars.contains(&l.var)) {
                    return Err(SwitchingError::UnknownVariable(l.var.clone()));
                }
            }
        }
        Some(ModeRequirementTable::new(rows)?)
    };

    let vars = vars
        .into_iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    Ok(SwitchingDocument {
        vars,
        system,
        table,
        warnings,
    })
}

/// One total valuation per non-blank line, written as a literal set.
pub fn parse_valuations(text: &str, vars: &[String]) -> Result<Vec<Valuation>, SwitchingError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| SwitchingError::Parse { line, message };
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let mut p = Parser {
            toks: tokenize(content)?
                .into_iter()
                .map(|(_, t)| (line, t))
                .collect(),
            pos: 0,
        };
        let c = p.condition()?;
        if let Some(t) = p.peek() {
            return Err(err(format!("unexpected {} after valuation", t.describe())));
        }
        let mut v = Valuation::default();
        for l in c.literals() {
            if !vars.contains(&l.var) {
                return Err(err(format!("variable `{}` is not declared", l.var)));
            }
            if v.0.insert(l.var.clone(), l.positive).is_some() {
                return Err(err(format!("variable `{}` assigned twice", l.var)));
            }
        }
        if let Some(missing) = vars.iter().find(|x| !v.0.contains_key(*x)) {
            return Err(err(format!("valuation does not assign `{missing}`")));
        }
        out.push(v);
    }
    Ok(out)
}

fn write_pair(out: &mut String, k: &Condition, s: &MachineId) {
    let _ = write!(out, "pair {k} {s}");
}

pub fn format_machine_system(sys: &MachineSwitchingSystem) -> String {
    let mut out = format!("vars {}\n", sys.vars().join(" "));
    for (k, s) in sys.pairs() {
        write_pair(&mut out, k, s);
        out.push('\n');
    }
    out
}

pub fn format_mode_system(sys: &ModeSwitchingSystem) -> String {
    let mut out = format!("vars {}\n", sys.vars().join(" "));
    for (e, m) in sys.modes() {
        let _ = write!(out, "mode {e} {{ ");
        for (i, (k, s)) in m.pairs().iter().enumerate() {
            if i > 0 {
                out.push_str(" ; ");
            }
            write_pair(&mut out, k, s);
        }
        out.push_str(" }\n");
    }
    out
}
