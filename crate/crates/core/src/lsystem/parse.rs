use indexmap::IndexMap;

use super::turn::parse_degrees;
use super::{Entry, FractalLSystem, LSystemError, Rule, Turn};

fn is_name(token: &str) -> bool {
    let mut chars = token.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_arrow(token: &str) -> Option<f64> {
    let inner = token.strip_prefix('-')?.strip_suffix("->")?;
    if inner.is_empty() || !inner.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
        return None;
    }
    inner.parse::<f64>().ok().filter(|a| a.is_finite() && *a > 0.0)
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, tok)| (line[..byte].chars().count() + 1, tok))
        .collect()
}

/// Parses the rule language:
///
/// ```text
/// # comment
/// K -3-> K +60 K -120 K +60 K
/// axiom K
/// ```
///
/// Without an `axiom` line the first rule is the start symbol.
pub fn parse_lsystem(text: &str) -> Result<FractalLSystem, LSystemError> {
    let err = |line: usize, column: usize, reason: String| LSystemError::Parse { line, column, reason };
    let mut rules: IndexMap<String, Rule> = IndexMap::new();
    let mut references: Vec<(usize, usize, String)> = Vec::new();
    let mut axiom: Option<(usize, usize, String)> = None;

    for (number, raw) in text.lines().enumerate() {
        let line = number + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokens(content);
        let Some(&(col, head)) = toks.first() else { continue };

        if head == "axiom" {
            match toks.as_slice() {
                [_, (c, name)] if is_name(name) => {
                    if axiom.is_some() {
                        return Err(err(line, col, "duplicate axiom".into()));
                    }
                    axiom = Some((line, *c, name.to_string()));
                }
                [_, (c, other)] => return Err(err(line, *c, format!("invalid nonterminal `{other}`"))),
                [_] => return Err(err(line, col + head.len(), "axiom needs a nonterminal".into())),
                [_, _, (c, _), ..] => return Err(err(line, *c, "unexpected token after axiom".into())),
                [] => unreachable!(),
            }
            continue;
        }

        if !is_name(head) {
            return Err(err(line, col, format!("expected a nonterminal, found `{head}`")));
        }
        let Some(&(arrow_col, arrow)) = toks.get(1) else {
            return Err(err(line, col + head.chars().count(), "expected a rule arrow like -3->".into()));
        };
        let shrink =
            parse_arrow(arrow).ok_or_else(|| err(line, arrow_col, format!("invalid rule arrow `{arrow}`")))?;
        if rules.contains_key(head) {
            return Err(err(line, col, format!("duplicate rule for `{head}`")));
        }
        let mut body = Vec::with_capacity(toks.len() - 2);
        for &(c, tok) in &toks[2..] {
            if tok.starts_with('+') || tok.starts_with('-') {
                let deg = parse_degrees(tok).ok_or_else(|| err(line, c, format!("invalid angle `{tok}`")))?;
                body.push(Entry::Turn(Turn::from_degrees(deg)));
            } else if is_name(tok) {
                references.push((line, c, tok.to_string()));
                body.push(Entry::Symbol(tok.to_string()));
            } else {
                return Err(err(line, c, format!("unexpected token `{tok}`")));
            }
        }
        if body.is_empty() {
            return Err(LSystemError::EmptyBody(head.to_string()));
        }
        rules.insert(head.to_string(), Rule { shrink, body });
    }

    for (line, column, name) in references {
        if !rules.contains_key(&name) {
            return Err(LSystemError::UndeclaredNonterminal { name, line, column });
        }
    }
    let axiom = match axiom {
        Some((line, column, name)) => {
            if !rules.contains_key(&name) {
                return Err(LSystemError::UndeclaredNonterminal { name, line, column });
            }
            name
        }
        None => rules
            .keys()
            .next()
            .cloned()
            .ok_or_else(|| err(1, 1, "no rules".into()))?,
    };
    Ok(FractalLSystem { rules, axiom })
}

impl FractalLSystem {
    /// Renders the system in the rule language; [`parse_lsystem`] reads it
    /// back to an equal value.
    pub fn to_dsl(&self) -> String {
        let mut out = String::new();
        for (name, rule) in &self.rules {
            out.push_str(name);
            out.push_str(&format!(" -{}->", rule.shrink));
            for entry in &rule.body {
                out.push(' ');
                match entry {
                    Entry::Turn(t) => out.push_str(&t.to_string()),
                    Entry::Symbol(s) => out.push_str(s),
                }
            }
            out.push('\n');
        }
        out.push_str(&format!("axiom {}\n", self.axiom));
        out
    }
}
