//! Lexer and recursive-descent parser for `.chr` / `.achr` text.

use std::collections::BTreeSet;
use std::fmt;

use crate::builtins::Builtin;
use crate::term::{sym, Atom, Term, Var};

use super::ast::{BodyItem, Goal, GoalItem, Program, Rule, Token, TokenStore};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// All errors found in one input, in source order.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseErrors(pub Vec<ParseError>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tk {
    Ident(String),
    Var(String),
    Num(String),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tk::Ident(s) | Tk::Var(s) | Tk::Num(s) => write!(f, "`{s}`"),
            Tk::Punct(p) => write!(f, "`{p}`"),
            Tk::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tk: Tk,
    line: usize,
    col: usize,
}

// Longest match first.
const PUNCT: &[(&str, &str)] = &[
    ("<=>", "<=>"),
    ("==>", "==>"),
    ("⇔", "<=>"),
    ("⇒", "==>"),
    ("\\=", "≠"),
    ("!=", "≠"),
    ("≠", "≠"),
    (">=", ">="),
    ("=<", "=<"),
    ("<=", "=<"),
    ("≥", ">="),
    ("≤", "=<"),
    ("=", "="),
    (">", ">"),
    ("<", "<"),
    ("\\", "\\"),
    ("(", "("),
    (")", ")"),
    (",", ","),
    (".", "."),
    ("@", "@"),
    ("|", "|"),
    (";", ";"),
    ("{", "{"),
    ("}", "}"),
    ("#", "#"),
    ("+", "+"),
    ("-", "-"),
];

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut rest = src;
    while let Some(c) = rest.chars().next() {
        if c == '\n' {
            line += 1;
            col = 1;
            rest = &rest[1..];
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c == '%' {
            let end = rest.find('\n').unwrap_or(rest.len());
            rest = &rest[end..];
            continue;
        }
        if c.is_ascii_alphanumeric() || c == '_' {
            let mut end = rest
                .char_indices()
                .find(|(_, ch)| !(ch.is_ascii_alphanumeric() || *ch == '_'))
                .map(|(i, _)| i)
                .unwrap_or(rest.len());
            while rest[end..].starts_with('\'') {
                end += 1;
            }
            let word = &rest[..end];
            let tk = if c.is_ascii_digit() {
                if !word.chars().all(|ch| ch.is_ascii_digit()) {
                    return Err(ParseError { line, col, message: format!("malformed number `{word}`") });
                }
                Tk::Num(word.to_string())
            } else if c.is_ascii_uppercase() || c == '_' {
                Tk::Var(word.to_string())
            } else {
                Tk::Ident(word.to_string())
            };
            out.push(Spanned { tk, line, col });
            col += word.chars().count();
            rest = &rest[end..];
            continue;
        }
        match PUNCT.iter().find(|(p, _)| rest.starts_with(p)) {
            Some((p, canon)) => {
                out.push(Spanned { tk: Tk::Punct(canon), line, col });
                col += p.chars().count();
                rest = &rest[p.len()..];
            }
            None => return Err(ParseError { line, col, message: format!("unexpected character `{c}`") }),
        }
    }
    out.push(Spanned { tk: Tk::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    anon: usize,
}

type PResult<T> = Result<T, ParseError>;

enum Constraint {
    Chr(Atom, Option<u32>),
    Builtin(Builtin),
}

impl Parser {
    fn peek(&self) -> &Tk {
        &self.toks[self.pos].tk
    }

    fn peek_at(&self, k: usize) -> &Tk {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tk
    }

    fn bump(&mut self) -> Tk {
        let t = self.toks[self.pos].tk.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        let s = &self.toks[self.pos];
        Err(ParseError { line: s.line, col: s.col, message: message.into() })
    }

    fn is(&self, p: &str) -> bool {
        matches!(self.peek(), Tk::Punct(q) if *q == p)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> PResult<()> {
        if self.eat(p) {
            Ok(())
        } else {
            self.err(format!("expected `{p}`, found {}", self.peek()))
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let mut t = self.primary()?;
        loop {
            let op = if self.is("+") {
                "+"
            } else if self.is("-") {
                "-"
            } else {
                break;
            };
            self.bump();
            let r = self.primary()?;
            t = Term::app(op, vec![t, r]);
        }
        Ok(t)
    }

    fn primary(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tk::Var(v) => {
                self.bump();
                if v == "_" {
                    self.anon += 1;
                    Ok(Term::Var(Var::new(&format!("_{}", self.anon))))
                } else {
                    Ok(Term::Var(Var::new(&v)))
                }
            }
            Tk::Num(n) => {
                self.bump();
                Ok(Term::constant(&n))
            }
            Tk::Ident(f) => {
                self.bump();
                let mut args = Vec::new();
                if self.eat("(") {
                    loop {
                        args.push(self.term()?);
                        if !self.eat(",") {
                            break;
                        }
                    }
                    self.expect(")")?;
                }
                Ok(Term::App(sym(&f), args))
            }
            Tk::Punct("(") => {
                self.bump();
                let t = self.term()?;
                self.expect(")")?;
                Ok(t)
            }
            Tk::Punct("-") => {
                self.bump();
                match self.bump() {
                    Tk::Num(n) => Ok(Term::constant(&format!("-{n}"))),
                    other => self.err(format!("expected a number after `-`, found {other}")),
                }
            }
            other => self.err(format!("expected a term, found {other}")),
        }
    }

    fn constraint(&mut self, allow_ids: bool) -> PResult<Constraint> {
        let lhs = self.term()?;
        for rel in ["=", "≠", ">", "<", ">=", "=<"] {
            if self.is(rel) {
                self.bump();
                let rhs = self.term()?;
                return Ok(Constraint::Builtin(match rel {
                    "=" => Builtin::Eq(lhs, rhs),
                    "≠" => Builtin::Neq(lhs, rhs),
                    _ => Builtin::Opaque(Atom::new(rel, vec![lhs, rhs])),
                }));
            }
        }
        let atom = match lhs {
            Term::App(f, args) if args.is_empty() && &*f == "true" => return Ok(Constraint::Builtin(Builtin::True)),
            Term::App(f, args) if args.is_empty() && &*f == "false" => {
                return Ok(Constraint::Builtin(Builtin::False))
            }
            Term::App(f, args) if f.chars().next().is_some_and(|c| c.is_ascii_lowercase()) => Atom { pred: f, args },
            other => return self.err(format!("`{other}` is not a constraint")),
        };
        let id = if self.is("#") {
            if !allow_ids {
                return self.err("identifiers are not allowed here");
            }
            self.bump();
            match self.bump() {
                Tk::Num(n) => match n.parse::<u32>() {
                    Ok(i) if i >= 1 => Some(i),
                    _ => return self.err(format!("invalid identifier `{n}`")),
                },
                other => return self.err(format!("expected identifier number after `#`, found {other}")),
            }
        } else {
            None
        };
        Ok(Constraint::Chr(atom, id))
    }

    fn constraints(&mut self, allow_ids: bool) -> PResult<Vec<Constraint>> {
        let mut out = vec![self.constraint(allow_ids)?];
        while self.eat(",") {
            out.push(self.constraint(allow_ids)?);
        }
        Ok(out)
    }

    fn head_atoms(&mut self) -> PResult<Vec<Atom>> {
        let mut out = Vec::new();
        loop {
            match self.constraint(false)? {
                Constraint::Chr(a, _) => out.push(a),
                Constraint::Builtin(b) => return self.err(format!("built-in `{b}` cannot occur in a rule head")),
            }
            if !self.eat(",") {
                return Ok(out);
            }
        }
    }

    fn rule(&mut self, index: usize) -> PResult<Rule> {
        let start = self.pos;
        let name = match (self.peek().clone(), self.peek_at(1).clone()) {
            (Tk::Ident(n), Tk::Punct("@")) | (Tk::Var(n), Tk::Punct("@")) => {
                self.bump();
                self.bump();
                sym(&n)
            }
            _ => sym(&format!("rule{index}")),
        };
        if self.is("<=>") || self.is("==>") || self.is("\\") {
            return self.err("empty head");
        }
        let first = self.head_atoms()?;
        let (kept, removed) = if self.eat("\\") {
            let removed = self.head_atoms()?;
            self.expect("<=>")?;
            (first, removed)
        } else if self.eat("<=>") {
            (Vec::new(), first)
        } else if self.eat("==>") {
            (first, Vec::new())
        } else {
            return self.err(format!("expected `<=>`, `==>` or `\\`, found {}", self.peek()));
        };
        let items = self.constraints(true)?;
        let (guard, body_items) = if self.eat("|") {
            let mut guard = Vec::new();
            for c in items {
                match c {
                    Constraint::Builtin(b) => guard.push(b),
                    Constraint::Chr(a, _) => return self.err(format!("guard contains CHR constraint `{a}`")),
                }
            }
            (guard, self.constraints(true)?)
        } else {
            (Vec::new(), items)
        };
        let body: Vec<BodyItem> = body_items
            .into_iter()
            .map(|c| match c {
                Constraint::Chr(a, i) => BodyItem::Chr(a, i),
                Constraint::Builtin(b) => BodyItem::Builtin(b),
            })
            .collect();
        let mut tokens = TokenStore::new();
        if self.eat(";") {
            self.expect("{")?;
            if !self.is("}") {
                loop {
                    tokens.insert(self.token()?);
                    if !self.eat(",") {
                        break;
                    }
                }
            }
            self.expect("}")?;
        }
        self.expect(".")?;
        let rule = Rule { name, kept, removed, guard, body, tokens };
        self.validate(&rule, start)?;
        Ok(rule)
    }

    fn token(&mut self) -> PResult<Token> {
        let name = match self.bump() {
            Tk::Ident(n) | Tk::Var(n) => n,
            other => return self.err(format!("expected rule name in token, found {other}")),
        };
        self.expect("@")?;
        let mut ids = Vec::new();
        loop {
            match self.peek().clone() {
                Tk::Num(n) => {
                    self.bump();
                    match n.parse::<u32>() {
                        Ok(i) if i >= 1 => ids.push(i),
                        _ => return self.err(format!("invalid identifier `{n}`")),
                    }
                }
                other => return self.err(format!("expected identifier in token, found {other}")),
            }
            // `r@1,2, v@3`: a comma followed by a number continues this token.
            if self.is(",") && matches!(self.peek_at(1), Tk::Num(_)) {
                self.bump();
                continue;
            }
            break;
        }
        let distinct: BTreeSet<u32> = ids.iter().copied().collect();
        if distinct.len() != ids.len() {
            return self.err(format!("token {name}@… repeats an identifier"));
        }
        Ok(Token { rule: sym(&name), ids })
    }

    fn validate(&self, r: &Rule, start: usize) -> PResult<()> {
        let at = &self.toks[start];
        let fail = |m: String| Err(ParseError { line: at.line, col: at.col, message: m });
        let with: Vec<u32> = r.body_chr().filter_map(|(_, i)| i).collect();
        let without = r.body_chr().filter(|(_, i)| i.is_none()).count();
        if !with.is_empty() && without > 0 {
            return fail(format!("rule {}: either all or none of the body constraints carry identifiers", r.name));
        }
        let distinct: BTreeSet<u32> = with.iter().copied().collect();
        if distinct.len() != with.len() {
            return fail(format!("rule {}: duplicate body identifier", r.name));
        }
        for t in &r.tokens {
            if let Some(i) = t.ids.iter().find(|i| !distinct.contains(i)) {
                return fail(format!("rule {}: token {t} mentions identifier {i} absent from the body", r.name));
            }
        }
        Ok(())
    }

    fn recover(&mut self) {
        while !matches!(self.peek(), Tk::Eof) {
            if let Tk::Punct(".") = self.bump() {
                return;
            }
        }
    }
}

/// Parses a whole program, reporting every malformed rule.
pub fn parse_program(src: &str) -> Result<Program, ParseErrors> {
    let toks = lex(src).map_err(|e| ParseErrors(vec![e]))?;
    let mut p = Parser { toks, pos: 0, anon: 0 };
    let mut rules = Vec::new();
    let mut errors = Vec::new();
    while !matches!(p.peek(), Tk::Eof) {
        match p.rule(rules.len() + 1) {
            Ok(r) => rules.push(r),
            Err(e) => {
                errors.push(e);
                p.recover();
            }
        }
    }
    if errors.is_empty() {
        Ok(Program { rules })
    } else {
        Err(ParseErrors(errors))
    }
}

/// Parses a goal: a comma-separated conjunction, optionally parenthesised
/// and optionally terminated by `.`.
pub fn parse_goal(src: &str) -> Result<Goal, ParseErrors> {
    let toks = lex(src).map_err(|e| ParseErrors(vec![e]))?;
    let mut p = Parser { toks, pos: 0, anon: 0 };
    let wrap = |e: ParseError| ParseErrors(vec![e]);
    let n = p.toks.len();
    let last = if n >= 2 && matches!(p.toks[n - 2].tk, Tk::Punct(".")) { n - 2 } else { n - 1 };
    // Strip one pair of outer parentheses when they enclose everything.
    let mut strip = false;
    if matches!(p.toks[0].tk, Tk::Punct("(")) && last >= 1 && matches!(p.toks[last - 1].tk, Tk::Punct(")")) {
        let mut depth = 0i32;
        strip = true;
        for (i, s) in p.toks[..last].iter().enumerate() {
            match s.tk {
                Tk::Punct("(") => depth += 1,
                Tk::Punct(")") => depth -= 1,
                _ => {}
            }
            if depth == 0 && i < last - 1 {
                strip = false;
                break;
            }
        }
    }
    if strip {
        p.bump();
    }
    if matches!(p.peek(), Tk::Eof) || (p.is(".") && !strip) {
        return Ok(Goal::default());
    }
    let items = p.constraints(false).map_err(wrap)?;
    if strip {
        p.expect(")").map_err(wrap)?;
    }
    p.eat(".");
    if !matches!(p.peek(), Tk::Eof) {
        return Err(wrap(p.err::<()>(format!("unexpected {} after goal", p.peek())).unwrap_err()));
    }
    let items = items
        .into_iter()
        .map(|c| match c {
            Constraint::Chr(a, _) => GoalItem::Chr(a),
            Constraint::Builtin(b) => GoalItem::Builtin(b),
        })
        .collect();
    Ok(Goal { items })
}

/// Parses a goals file: one goal per line, `#` starts a comment, blank
/// lines ignored.  Errors carry the file line number.
pub fn parse_goals_file(src: &str) -> Result<Vec<Goal>, ParseErrors> {
    let mut goals = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match parse_goal(line) {
            Ok(g) => goals.push(g),
            Err(ParseErrors(es)) => {
                errors.extend(es.into_iter().map(|e| ParseError { line: i + 1, ..e }));
            }
        }
    }
    if errors.is_empty() {
        Ok(goals)
    } else {
        Err(ParseErrors(errors))
    }
}
