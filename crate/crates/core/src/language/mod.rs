//! The requirements language: AST, parser, and canonical printer.
//!
//! ```text
//! doc  := stmt*                stmt := "req" ID ":" form
//! form := "when" event "then" [ "eventually" | qualifier ] event
//!             [ "within" NUM unit ]
//!             [ "in at least" NUM "% of instances" [ "per" NUM unit ] ]
//!       | "always" cond
//!       | "at every observation" cond "implies" cond
//!       | "rate" event ">=" NUM "per" NUM unit
//!       | "fifo" event "->" event
//! event := ID "(" [ID] ")"     cond := atom ("and" atom)*
//! atom  := ID cmp NUM | ID | "not" ID
//! ```
//!
//! `#` starts a comment that runs to the end of the line. Durations are
//! kept as written and converted to whole minutes on demand.

mod ast;
mod parser;

use std::fmt::Write as _;

pub use ast::*;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LanguageError {
    #[error("{position}: syntax error: {message}")]
    Syntax { position: Position, message: String },
    #[error("{position}: {error}")]
    Invalid {
        position: Position,
        error: ValidationError,
    },
}

impl LanguageError {
    pub(crate) fn syntax(position: Position, message: impl Into<String>) -> Self {
        LanguageError::Syntax {
            position,
            message: message.into(),
        }
    }

    pub fn position(&self) -> Position {
        match self {
            LanguageError::Syntax { position, .. } | LanguageError::Invalid { position, .. } => {
                *position
            }
        }
    }
}

pub fn parse_requirements(text: &str) -> Result<RequirementSet, LanguageError> {
    parser::parse(text)
}

fn write_event(out: &mut String, e: &EventPattern) {
    let _ = write!(out, "{}({})", e.name, e.key.as_deref().unwrap_or(""));
}

fn write_condition(out: &mut String, c: &StateCondition) {
    for (i, atom) in c.conjuncts.iter().enumerate() {
        if i > 0 {
            out.push_str(" and ");
        }
        match atom {
            Atom::Compare {
                variable,
                comparator,
                threshold,
            } => {
                let _ = write!(out, "{variable} {} {threshold}", comparator.symbol());
            }
            Atom::Flag {
                variable,
                value: true,
            } => out.push_str(variable),
            Atom::Flag {
                variable,
                value: false,
            } => {
                let _ = write!(out, "not {variable}");
            }
        }
    }
}

/// Canonical one-line rendering of a requirement.
pub fn format_requirement(r: &Requirement) -> String {
    let mut out = format!("req {}: ", r.id);
    match &r.form {
        Form::BoundedResponse {
            trigger,
            response,
            deadline,
        } => {
            out.push_str("when ");
            write_event(&mut out, trigger);
            out.push_str(" then ");
            write_event(&mut out, response);
            let _ = write!(out, " within {deadline}");
        }
        Form::UnboundedResponse { trigger, response } => {
            out.push_str("when ");
            write_event(&mut out, trigger);
            out.push_str(" then eventually ");
            write_event(&mut out, response);
        }
        Form::WindowedRatio {
            trigger,
            response,
            deadline,
            min_ratio,
            window,
        } => {
            out.push_str("when ");
            write_event(&mut out, trigger);
            out.push_str(" then ");
            write_event(&mut out, response);
            let percent = min_ratio
                .checked_mul(&crate::Rational::from_integer(100))
                .expect("ratio within (0, 1]");
            let _ = write!(
                out,
                " within {deadline} in at least {percent} % of instances"
            );
            if let Some(w) = window {
                let _ = write!(out, " per {w}");
            }
        }
        Form::Instantaneous {
            condition,
            consequent,
        } => {
            out.push_str("at every observation ");
            write_condition(&mut out, condition);
            out.push_str(" implies ");
            write_condition(&mut out, consequent);
        }
        Form::StateInvariant { condition } => {
            out.push_str("always ");
            write_condition(&mut out, condition);
        }
        Form::RateFloor {
            event,
            min_count,
            window,
        } => {
            out.push_str("rate ");
            write_event(&mut out, event);
            let _ = write!(out, " >= {min_count} per {window}");
        }
        Form::Fifo { entry, exit } => {
            out.push_str("fifo ");
            write_event(&mut out, entry);
            out.push_str(" -> ");
            write_event(&mut out, exit);
        }
        Form::VagueQualified {
            trigger,
            response,
            qualifier,
        } => {
            out.push_str("when ");
            write_event(&mut out, trigger);
            let _ = write!(out, " then {} ", qualifier.keyword());
            write_event(&mut out, response);
        }
    }
    out
}

/// One canonical statement per line.
pub fn format_requirements(set: &RequirementSet) -> String {
    set.iter().map(|r| format_requirement(r) + "\n").collect()
}
