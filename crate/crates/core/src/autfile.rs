//! Text format for labeled systems.
//!
//! ```text
//! # comment
//! name five_state
//! states 5
//! initial 0
//! secret 1 4
//! events σ_o:o σ_u:u
//! trans 0 σ_u 1
//! ```
//!
//! `o` marks an observable event, `u` an unobservable one. Every keyword
//! except `trans` may appear at most once; `states` and `events` must precede
//! any line that refers to states or events.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::automata::{Alphabet, EventId, Nfa, StateId};
use crate::error::{ParseError, ParseErrorKind, Result};
use crate::moore::{LabeledSystem, NS, S};

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut col = 0;
    let mut start_col = 0;
    for (i, ch) in line.char_indices() {
        col += 1;
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token { text: &line[s..i], column: start_col });
            }
        } else if start.is_none() {
            start = Some(i);
            start_col = col;
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &line[s..], column: start_col });
    }
    out
}

struct Parser {
    line: usize,
}

impl Parser {
    fn err(&self, kind: ParseErrorKind, column: usize, message: impl Into<String>) -> ParseError {
        ParseError { kind, line: self.line, column, message: message.into() }
    }

    fn state(&self, t: &Token<'_>, n: Option<usize>) -> std::result::Result<StateId, ParseError> {
        let n = n.ok_or_else(|| self.err(ParseErrorKind::Syntax, t.column, "`states` must come first"))?;
        let v: usize = t
            .text
            .parse()
            .map_err(|_| self.err(ParseErrorKind::Syntax, t.column, format!("expected a state index, found `{}`", t.text)))?;
        if v >= n {
            return Err(self.err(ParseErrorKind::UndefinedState, t.column, format!("state {v} (there are {n})")));
        }
        Ok(v as StateId)
    }
}

/// Parses a system; errors carry 1-based line and column.
pub fn parse_aut(text: &str) -> Result<LabeledSystem> {
    Ok(parse_inner(text)?)
}

fn parse_inner(text: &str) -> std::result::Result<LabeledSystem, ParseError> {
    let mut p = Parser { line: 0 };
    let mut name: Option<String> = None;
    let mut n: Option<usize> = None;
    let mut initial: Option<Vec<StateId>> = None;
    let mut secret: Option<Vec<StateId>> = None;
    let mut events: Option<(Alphabet, Vec<bool>)> = None;
    let mut trans: Vec<(StateId, EventId, StateId)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        p.line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokens(content);
        let Some(kw) = toks.first() else { continue };
        let args = &toks[1..];
        let dup = |p: &Parser| p.err(ParseErrorKind::DuplicateDeclaration, kw.column, format!("`{}` declared twice", kw.text));
        match kw.text {
            "name" => {
                if name.is_some() {
                    return Err(dup(&p));
                }
                if args.len() != 1 {
                    return Err(p.err(ParseErrorKind::Syntax, kw.column, "`name` takes one word"));
                }
                name = Some(args[0].text.to_string());
            }
            "states" => {
                if n.is_some() {
                    return Err(dup(&p));
                }
                let [t] = args else {
                    return Err(p.err(ParseErrorKind::Syntax, kw.column, "`states` takes one count"));
                };
                n = Some(t.text.parse().map_err(|_| {
                    p.err(ParseErrorKind::Syntax, t.column, format!("expected a count, found `{}`", t.text))
                })?);
            }
            "initial" | "secret" => {
                let slot = if kw.text == "initial" { &mut initial } else { &mut secret };
                if slot.is_some() {
                    return Err(dup(&p));
                }
                let mut v = Vec::new();
                for t in args {
                    let q = p.state(t, n)?;
                    if v.contains(&q) {
                        return Err(p.err(ParseErrorKind::DuplicateDeclaration, t.column, format!("state {q} listed twice")));
                    }
                    v.push(q);
                }
                *slot = Some(v);
            }
            "events" => {
                if events.is_some() {
                    return Err(dup(&p));
                }
                let mut alpha = Alphabet::new();
                let mut obs = Vec::new();
                for t in args {
                    let (ename, kind) = t.text.rsplit_once(':').ok_or_else(|| {
                        p.err(ParseErrorKind::Syntax, t.column, format!("expected name:o or name:u, found `{}`", t.text))
                    })?;
                    let o = match kind {
                        "o" => true,
                        "u" => false,
                        _ => return Err(p.err(ParseErrorKind::Syntax, t.column, format!("unknown event kind `{kind}`"))),
                    };
                    if ename.is_empty() {
                        return Err(p.err(ParseErrorKind::Syntax, t.column, "empty event name"));
                    }
                    if alpha.lookup(ename).is_some() {
                        return Err(p.err(ParseErrorKind::DuplicateDeclaration, t.column, format!("event `{ename}` declared twice")));
                    }
                    alpha.push(ename);
                    obs.push(o);
                }
                events = Some((alpha, obs));
            }
            "trans" => {
                let [src, ev, dst] = args else {
                    return Err(p.err(ParseErrorKind::Syntax, kw.column, "`trans` takes: source event target"));
                };
                let s = p.state(src, n)?;
                let (alpha, _) = events
                    .as_ref()
                    .ok_or_else(|| p.err(ParseErrorKind::Syntax, ev.column, "`events` must precede transitions"))?;
                let e = alpha
                    .lookup(ev.text)
                    .ok_or_else(|| p.err(ParseErrorKind::UndefinedEvent, ev.column, format!("event `{}`", ev.text)))?;
                let d = p.state(dst, n)?;
                trans.push((s, e, d));
            }
            other => {
                return Err(p.err(ParseErrorKind::Syntax, kw.column, format!("unknown keyword `{other}`")));
            }
        }
    }

    p.line = text.lines().count().max(1);
    let n = n.ok_or_else(|| p.err(ParseErrorKind::Syntax, 1, "missing `states` line"))?;
    let (alpha, observable) = events.unwrap_or_else(|| (Alphabet::new(), Vec::new()));
    let mut g = Nfa::new(alpha.into_shared(), n);
    for (s, e, d) in trans {
        g.add_transition(s, e, d);
    }
    g.set_initial(initial.unwrap_or_default());
    let mut labels = vec![NS; n];
    for q in secret.unwrap_or_default() {
        labels[q as usize] = S;
    }
    Ok(LabeledSystem {
        name: name.unwrap_or_else(|| "system".into()),
        automaton: g,
        labels,
        label_names: vec!["NS".into(), "S".into()],
        observable,
        secret_label: Some(S),
    })
}

/// Canonical text: header lines in a fixed order, transitions sorted by
/// source, event id and target.
pub fn serialize_aut(sys: &LabeledSystem) -> String {
    let a = &sys.automaton;
    let mut out = String::new();
    let join = |v: Vec<String>| v.iter().map(|s| format!(" {s}")).collect::<String>();
    let _ = writeln!(out, "name {}", sys.name);
    let _ = writeln!(out, "states {}", a.num_states());
    let _ = writeln!(out, "initial{}", join(a.initial().iter().map(|q| q.to_string()).collect()));
    let _ = writeln!(out, "secret{}", join(sys.secret_states().iter().map(|q| q.to_string()).collect()));
    let evs = a
        .alphabet()
        .ids()
        .map(|e| format!("{}:{}", a.alphabet().name(e), if sys.is_observable(e) { 'o' } else { 'u' }))
        .collect();
    let _ = writeln!(out, "events{}", join(evs));
    let mut lines: Vec<(StateId, EventId, StateId)> = Vec::new();
    for q in 0..a.num_states() as StateId {
        lines.extend(a.transitions(q).iter().map(|&(e, t)| (q, e, t)));
    }
    lines.sort();
    let mut seen = HashSet::new();
    for (q, e, t) in lines {
        if seen.insert((q, e, t)) {
            let _ = writeln!(out, "trans {q} {} {t}", a.alphabet().name(e));
        }
    }
    out
}
