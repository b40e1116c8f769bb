//! Line format:
//!
//! ```text
//! goal <id> [mandatory] [optional] [req <reqId>]
//! soft <id>
//! decompose <parent> AND|OR <child>+
//! contrib <goal> +|- <soft>
//! prefer {<leaf>,...}
//! ```

use std::collections::BTreeSet;

use super::{Contribution, Decomposition, DecompositionKind, Goal, GoalError, GoalModel, Sign};

fn valid_id(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '-' || c == '.')
}

pub fn parse_goal_model(text: &str) -> Result<GoalModel, GoalError> {
    let mut goals = Vec::new();
    let mut decompositions = Vec::new();
    let mut contributions = Vec::new();
    let mut preferences = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| GoalError::Parse { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        let id = |s: &str| {
            if valid_id(s) {
                Ok(s.to_string())
            } else {
                Err(err(format!("invalid goal id `{s}`")))
            }
        };
        match words[0] {
            "goal" => {
                let Some(name) = words.get(1) else {
                    return Err(err("`goal` needs an id".into()));
                };
                let mut goal = Goal::hard(&id(name)?);
                let mut rest = words[2..].iter();
                while let Some(&w) = rest.next() {
                    match w {
                        "mandatory" => goal.mandatory = true,
                        "optional" => goal.optional = true,
                        "req" => match rest.next() {
                            Some(r) if goal.requirement.is_none() => {
                                goal.requirement = Some(r.to_string())
                            }
                            Some(_) => return Err(err("duplicate `req`".into())),
                            None => return Err(err("`req` needs a requirement id".into())),
                        },
                        other => return Err(err(format!("unexpected `{other}`"))),
                    }
                }
                goals.push(goal);
            }
            "soft" => match words.as_slice() {
                [_, name] => goals.push(Goal::soft(&id(name)?)),
                _ => return Err(err("`soft` takes exactly one id".into())),
            },
            "decompose" => {
                if words.len() < 4 {
                    return Err(err(
                        "`decompose` needs a parent, AND|OR, and children".into()
                    ));
                }
                let kind = match words[2] {
                    "AND" => DecompositionKind::And,
                    "OR" => DecompositionKind::Or,
                    other => return Err(err(format!("expected AND or OR, found `{other}`"))),
                };
                decompositions.push(Decomposition {
                    parent: id(words[1])?,
                    kind,
                    children: words[3..].iter().map(|w| id(w)).collect::<Result<_, _>>()?,
                });
            }
            "contrib" => match words.as_slice() {
                [_, source, sign, target] => {
                    let sign = match *sign {
                        "+" => Sign::Plus,
                        "-" => Sign::Minus,
                        other => return Err(err(format!("expected + or -, found `{other}`"))),
                    };
                    contributions.push(Contribution {
                        source: id(source)?,
                        target: id(target)?,
                        sign,
                    });
                }
                _ => return Err(err("`contrib` takes a goal, a sign, and a soft goal".into())),
            },
            "prefer" => {
                let body = content["prefer".len()..].trim();
                let inner = body
                    .strip_prefix('{')
                    .and_then(|b| b.strip_suffix('}'))
                    .ok_or_else(|| err("`prefer` takes a set such as {a,b}".into()))?;
                let set = inner
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(id)
                    .collect::<Result<BTreeSet<_>, _>>()?;
                preferences.push(set);
            }
            other => return Err(err(format!("unknown statement `{other}`"))),
        }
    }
    GoalModel::new(goals, decompositions, contributions, preferences)
}
