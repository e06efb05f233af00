//! Text format for PTGA models.
//!
//! ```text
//! clocks x y;
//! bound 2;
//!
//! location l0 { inv x<=2 & y<=2 }
//! location l1 { inv y>0 & y<=2 & x<=2 }
//! location l2 { }
//!
//! edge min b from l0 guard x>1 {
//!   1/2 reset x -> l1;
//!   1/2 reset x y -> l2
//! }
//!
//! target l2;
//! init l0 (x=0, y=0);
//! ```
//!
//! Probabilities and clock values are exact rationals, written `p/q`, as
//! decimals (`0.5` parses to `1/2`), or as integers. `//` and `#` start
//! line comments. `clocks` and `bound` must precede any item that uses
//! them.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num::traits::Zero;

use crate::clockalg::{
    Atom, AtomLhs, ClockConstraint, ClockId, ClockValuation, Clocks, Relation,
};
use crate::model::{
    Action, Branch, Configuration, EdgeDef, Location, LocationId, Player, Ptga,
};
use crate::rat::{self, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Decimal(Rat),
    Arrow,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Amp,
    Minus,
    Slash,
    Rel(Relation),
    Assign, // bare '=' inside init lists; also Relation::Eq in constraints
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek_char()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, message: String) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            message,
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            // Skip whitespace and comments.
            loop {
                match self.peek_char() {
                    Some(c) if c.is_whitespace() => {
                        self.bump();
                    }
                    Some('#') => {
                        while let Some(c) = self.bump() {
                            if c == '\n' {
                                break;
                            }
                        }
                    }
                    Some('/') if self.src[self.pos..].starts_with("//") => {
                        while let Some(c) = self.bump() {
                            if c == '\n' {
                                break;
                            }
                        }
                    }
                    _ => break,
                }
            }
            let (line, col) = (self.line, self.col);
            let c = match self.peek_char() {
                Some(c) => c,
                None => return Ok(out),
            };
            let tok = if c.is_ascii_digit() {
                let mut text = String::new();
                while let Some(d) = self.peek_char() {
                    if d.is_ascii_digit() {
                        text.push(d);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if self.peek_char() == Some('.') {
                    text.push('.');
                    self.bump();
                    let mut digits = false;
                    while let Some(d) = self.peek_char() {
                        if d.is_ascii_digit() {
                            text.push(d);
                            self.bump();
                            digits = true;
                        } else {
                            break;
                        }
                    }
                    if !digits {
                        return Err(self.error("expected digits after decimal point".into()));
                    }
                    Tok::Decimal(rat::parse(&text).expect("lexed decimal"))
                } else {
                    Tok::Int(text.parse().map_err(|_| {
                        self.error(format!("integer literal `{text}` out of range"))
                    })?)
                }
            } else if c.is_alphabetic() || c == '_' {
                let mut text = String::new();
                while let Some(d) = self.peek_char() {
                    if d.is_alphanumeric() || d == '_' {
                        text.push(d);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(text)
            } else {
                self.bump();
                match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ';' => Tok::Semi,
                    ',' => Tok::Comma,
                    '&' => Tok::Amp,
                    '/' => Tok::Slash,
                    '=' => Tok::Assign,
                    '<' => {
                        if self.peek_char() == Some('=') {
                            self.bump();
                            Tok::Rel(Relation::Le)
                        } else {
                            Tok::Rel(Relation::Lt)
                        }
                    }
                    '>' => {
                        if self.peek_char() == Some('=') {
                            self.bump();
                            Tok::Rel(Relation::Ge)
                        } else {
                            Tok::Rel(Relation::Gt)
                        }
                    }
                    '-' => {
                        if self.peek_char() == Some('>') {
                            self.bump();
                            Tok::Arrow
                        } else {
                            Tok::Minus
                        }
                    }
                    other => {
                        return Err(ParseError {
                            line,
                            col,
                            message: format!("unexpected character `{other}`"),
                        })
                    }
                }
            };
            out.push(Spanned { tok, line, col });
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    clocks: Option<Arc<Clocks>>,
    clock_names: Vec<String>,
    bound: Option<u32>,
    locations: Vec<Location>,
    actions: Vec<Action>,
    edges: Vec<EdgeDef>,
    target_names: Vec<(String, usize, usize)>,
    init: Option<(String, Vec<(String, Rat, usize, usize)>, usize, usize)>,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.peek()
            .map(|s| (s.line, s.col))
            .or_else(|| self.toks.last().map(|s| (s.line, s.col)))
            .unwrap_or((1, 1))
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError {
            line,
            col,
            message: message.into(),
        })
    }

    fn err_at<T>(&self, line: usize, col: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            line,
            col,
            message: message.into(),
        })
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, usize, usize), ParseError> {
        match self.next() {
            Some(Spanned {
                tok: Tok::Ident(s),
                line,
                col,
            }) => Ok((s, line, col)),
            Some(s) => self.err_at(s.line, s.col, format!("expected {what}")),
            None => self.err(format!("expected {what}, found end of input")),
        }
    }

    fn expect_tok(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        match self.next() {
            Some(s) if s.tok == tok => Ok(()),
            Some(s) => self.err_at(s.line, s.col, format!("expected {what}")),
            None => self.err(format!("expected {what}, found end of input")),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek().map(|s| &s.tok) == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn keyword(&mut self) -> Result<Option<(String, usize, usize)>, ParseError> {
        match self.next() {
            None => Ok(None),
            Some(Spanned {
                tok: Tok::Ident(s),
                line,
                col,
            }) => Ok(Some((s, line, col))),
            Some(s) => self.err_at(s.line, s.col, "expected a top-level item keyword"),
        }
    }

    fn need_clocks(&self, line: usize, col: usize) -> Result<Arc<Clocks>, ParseError> {
        match &self.clocks {
            Some(c) => Ok(c.clone()),
            None => self.err_at(line, col, "`clocks` and `bound` must be declared first"),
        }
    }

    fn lookup_clock(&self, name: &str, line: usize, col: usize) -> Result<ClockId, ParseError> {
        let clocks = self.need_clocks(line, col)?;
        clocks
            .lookup(name)
            .map_err(|_| ParseError {
                line,
                col,
                message: format!("unknown clock `{name}`"),
            })
    }

    fn parse_number(&mut self) -> Result<Rat, ParseError> {
        match self.next() {
            Some(Spanned {
                tok: Tok::Int(p), ..
            }) => {
                if self.eat(&Tok::Slash) {
                    match self.next() {
                        Some(Spanned {
                            tok: Tok::Int(q),
                            line,
                            col,
                        }) => {
                            if q == 0 {
                                return self.err_at(line, col, "division by zero");
                            }
                            Ok(rat::ratio(p, q))
                        }
                        Some(s) => self.err_at(s.line, s.col, "expected a denominator"),
                        None => self.err("expected a denominator"),
                    }
                } else {
                    Ok(rat::int(p))
                }
            }
            Some(Spanned {
                tok: Tok::Decimal(r),
                ..
            }) => Ok(r),
            Some(s) => self.err_at(s.line, s.col, "expected a number"),
            None => self.err("expected a number"),
        }
    }

    /// Constraint atoms up to (not consuming) the first token that cannot
    /// continue a conjunction.
    fn parse_constraint(&mut self) -> Result<ClockConstraint, ParseError> {
        // `true` is the empty conjunction.
        if let Some(Spanned {
            tok: Tok::Ident(s), ..
        }) = self.peek()
        {
            if s == "true" {
                self.next();
                return Ok(ClockConstraint::truth());
            }
        }
        let mut atoms = Vec::new();
        loop {
            let (name, line, col) = self.expect_ident("a clock name in a constraint")?;
            let c1 = self.lookup_clock(&name, line, col)?;
            let lhs = if self.eat(&Tok::Minus) {
                let (name2, l2, c2) = self.expect_ident("a clock name after `-`")?;
                AtomLhs::Diff(c1, self.lookup_clock(&name2, l2, c2)?)
            } else {
                AtomLhs::Clock(c1)
            };
            let rel = match self.next() {
                Some(Spanned {
                    tok: Tok::Rel(r), ..
                }) => r,
                Some(Spanned {
                    tok: Tok::Assign, ..
                }) => Relation::Eq,
                Some(s) => return self.err_at(s.line, s.col, "expected a relation"),
                None => return self.err("expected a relation"),
            };
            let constant = match self.next() {
                Some(Spanned {
                    tok: Tok::Int(k), ..
                }) => k,
                Some(s) => return self.err_at(s.line, s.col, "expected an integer bound"),
                None => return self.err("expected an integer bound"),
            };
            atoms.push(Atom { lhs, rel, constant });
            if !self.eat(&Tok::Amp) {
                break;
            }
        }
        Ok(ClockConstraint::new(atoms))
    }

    fn action_id(&mut self, name: &str, owner: Player) -> ActionRef {
        if let Some(i) = self
            .actions
            .iter()
            .position(|a| a.name == name && a.owner == owner)
        {
            return ActionRef(i);
        }
        self.actions.push(Action {
            name: name.to_string(),
            owner,
        });
        ActionRef(self.actions.len() - 1)
    }

    fn location_id(&self, name: &str, line: usize, col: usize) -> Result<LocationId, ParseError> {
        self.locations
            .iter()
            .position(|l| l.name == name)
            .map(|i| LocationId(i as u32))
            .ok_or(ParseError {
                line,
                col,
                message: format!("unknown location `{name}`"),
            })
    }
}

struct ActionRef(usize);

/// Parses a model document.
pub fn parse_model(src: &str) -> Result<Ptga, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    let mut p = Parser {
        toks,
        pos: 0,
        clocks: None,
        clock_names: Vec::new(),
        bound: None,
        locations: Vec::new(),
        actions: Vec::new(),
        edges: Vec::new(),
        target_names: Vec::new(),
        init: None,
    };

    // First pass over items; location references are resolved afterwards,
    // so forward references in edges are rejected only if never declared.
    // We therefore collect raw edges first.
    struct RawEdge {
        owner: Player,
        action: String,
        from: (String, usize, usize),
        guard: ClockConstraint,
        branches: Vec<(Rat, Vec<(String, usize, usize)>, (String, usize, usize))>,
    }
    let mut raw_edges: Vec<RawEdge> = Vec::new();

    while let Some((kw, line, col)) = p.keyword()? {
        match kw.as_str() {
            "clocks" => {
                if p.clocks.is_some() {
                    return p.err_at(line, col, "duplicate `clocks` declaration");
                }
                let mut names = Vec::new();
                while let Some(Spanned {
                    tok: Tok::Ident(_), ..
                }) = p.peek()
                {
                    let (n, l, c) = p.expect_ident("a clock name")?;
                    if names.contains(&n) {
                        return p.err_at(l, c, format!("duplicate clock `{n}`"));
                    }
                    names.push(n);
                }
                if names.is_empty() {
                    return p.err_at(line, col, "expected at least one clock name");
                }
                p.expect_tok(Tok::Semi, "`;` after clock list")?;
                p.clock_names = names;
            }
            "bound" => {
                if p.bound.is_some() {
                    return p.err_at(line, col, "duplicate `bound` declaration");
                }
                match p.next() {
                    Some(Spanned {
                        tok: Tok::Int(k),
                        line,
                        col,
                    }) => {
                        if k < 1 {
                            return p.err_at(line, col, "bound must be a positive integer");
                        }
                        p.bound = Some(k as u32);
                    }
                    Some(s) => return p.err_at(s.line, s.col, "expected an integer bound"),
                    None => return p.err("expected an integer bound"),
                }
                p.expect_tok(Tok::Semi, "`;` after bound")?;
                if p.clock_names.is_empty() && p.clocks.is_none() {
                    return p.err_at(line, col, "`clocks` must be declared before `bound`");
                }
                p.clocks = Some(Clocks::new(p.clock_names.clone(), p.bound.unwrap()));
            }
            "location" => {
                p.need_clocks(line, col)?;
                let (name, l, c) = p.expect_ident("a location name")?;
                if p.locations.iter().any(|loc| loc.name == name) {
                    return p.err_at(l, c, format!("duplicate location `{name}`"));
                }
                p.expect_tok(Tok::LBrace, "`{` after location name")?;
                let invariant = if let Some(Spanned {
                    tok: Tok::Ident(s), ..
                }) = p.peek()
                {
                    if s == "inv" {
                        p.next();
                        p.parse_constraint()?
                    } else {
                        return p.err("expected `inv` or `}`");
                    }
                } else {
                    ClockConstraint::truth()
                };
                p.expect_tok(Tok::RBrace, "`}` closing the location block")?;
                p.locations.push(Location { name, invariant });
            }
            "edge" => {
                p.need_clocks(line, col)?;
                let (owner_kw, ol, oc) = p.expect_ident("`min` or `max`")?;
                let owner = match owner_kw.as_str() {
                    "min" => Player::Min,
                    "max" => Player::Max,
                    _ => return p.err_at(ol, oc, "expected `min` or `max`"),
                };
                let (action, ..) = p.expect_ident("an action name")?;
                let (from_kw, fl, fc) = p.expect_ident("`from`")?;
                if from_kw != "from" {
                    return p.err_at(fl, fc, "expected `from`");
                }
                let from = p.expect_ident("a source location name")?;
                let guard = if let Some(Spanned {
                    tok: Tok::Ident(s), ..
                }) = p.peek()
                {
                    if s == "guard" {
                        p.next();
                        p.parse_constraint()?
                    } else {
                        ClockConstraint::truth()
                    }
                } else {
                    ClockConstraint::truth()
                };
                p.expect_tok(Tok::LBrace, "`{` opening the branch list")?;
                let mut branches = Vec::new();
                loop {
                    if p.eat(&Tok::RBrace) {
                        break;
                    }
                    let prob = p.parse_number()?;
                    let mut resets = Vec::new();
                    if let Some(Spanned {
                        tok: Tok::Ident(s), ..
                    }) = p.peek()
                    {
                        if s == "reset" {
                            p.next();
                            while let Some(Spanned {
                                tok: Tok::Ident(_), ..
                            }) = p.peek()
                            {
                                resets.push(p.expect_ident("a clock name")?);
                            }
                        }
                    }
                    p.expect_tok(Tok::Arrow, "`->` before the branch target")?;
                    let target = p.expect_ident("a target location name")?;
                    branches.push((prob, resets, target));
                    if !p.eat(&Tok::Semi) {
                        p.expect_tok(Tok::RBrace, "`;` or `}` after a branch")?;
                        break;
                    }
                }
                raw_edges.push(RawEdge {
                    owner,
                    action,
                    from,
                    guard,
                    branches,
                });
            }
            "target" => {
                p.need_clocks(line, col)?;
                let mut any = false;
                while let Some(Spanned {
                    tok: Tok::Ident(_), ..
                }) = p.peek()
                {
                    let t = p.expect_ident("a target location name")?;
                    p.target_names.push(t);
                    any = true;
                }
                if !any {
                    return p.err("expected at least one target location");
                }
                p.expect_tok(Tok::Semi, "`;` after target list")?;
            }
            "init" => {
                if p.init.is_some() {
                    return p.err_at(line, col, "duplicate `init` declaration");
                }
                let loc = p.expect_ident("a location name")?;
                p.expect_tok(Tok::LParen, "`(` opening the clock assignment")?;
                let mut assigns = Vec::new();
                if !p.eat(&Tok::RParen) {
                    loop {
                        let (cname, cl, cc) = p.expect_ident("a clock name")?;
                        p.expect_tok(Tok::Assign, "`=` in a clock assignment")?;
                        let value = p.parse_number()?;
                        assigns.push((cname, value, cl, cc));
                        if !p.eat(&Tok::Comma) {
                            p.expect_tok(Tok::RParen, "`,` or `)` in the clock assignment")?;
                            break;
                        }
                    }
                }
                p.expect_tok(Tok::Semi, "`;` after init")?;
                p.init = Some((loc.0, assigns, loc.1, loc.2));
            }
            other => {
                return p.err_at(line, col, format!("unknown item `{other}`"));
            }
        }
    }

    let clocks = match &p.clocks {
        Some(c) => c.clone(),
        None => {
            return Err(ParseError {
                line: 1,
                col: 1,
                message: "model must declare `clocks` and `bound`".into(),
            })
        }
    };
    if p.locations.is_empty() {
        return Err(ParseError {
            line: 1,
            col: 1,
            message: "model must declare at least one location".into(),
        });
    }

    // Resolve raw edges.
    for raw in raw_edges {
        let source = p.location_id(&raw.from.0, raw.from.1, raw.from.2)?;
        let action = p.action_id(&raw.action, raw.owner);
        let action = crate::model::ActionId(action.0 as u32);
        if p
            .edges
            .iter()
            .any(|e| e.source == source && e.action == action)
        {
            return p.err_at(
                raw.from.1,
                raw.from.2,
                format!(
                    "duplicate edge for action `{}` at location `{}`",
                    raw.action, raw.from.0
                ),
            );
        }
        let mut branches = Vec::new();
        for (prob, resets, target) in raw.branches {
            let mut reset_set = BTreeSet::new();
            for (rname, rl, rc) in resets {
                reset_set.insert(p.lookup_clock(&rname, rl, rc)?);
            }
            let target = p.location_id(&target.0, target.1, target.2)?;
            branches.push(Branch {
                prob,
                resets: reset_set,
                target,
            });
        }
        p.edges.push(EdgeDef {
            source,
            action,
            guard: raw.guard,
            branches,
        });
    }

    let mut targets = BTreeSet::new();
    for (name, l, c) in &p.target_names {
        targets.insert(p.location_id(name, *l, *c)?);
    }

    let init = match &p.init {
        None => None,
        Some((loc_name, assigns, l, c)) => {
            let location = p.location_id(loc_name, *l, *c)?;
            let mut vals = vec![Rat::zero(); clocks.len()];
            for (cname, value, cl, cc) in assigns {
                let id = p.lookup_clock(cname, *cl, *cc)?;
                vals[id.index()] = value.clone();
            }
            let valuation = ClockValuation::new(vals, clocks.bound()).map_err(|e| ParseError {
                line: *l,
                col: *c,
                message: e.to_string(),
            })?;
            Some(Configuration {
                location,
                valuation,
            })
        }
    };

    Ok(Ptga {
        clocks,
        locations: p.locations,
        actions: p.actions,
        edges: p.edges,
        targets,
        init,
    })
}

/// Canonical text form; `parse_model(serialize_model(m))` is structurally
/// equal to `m`, and the output is byte-deterministic.
pub fn serialize_model(model: &Ptga) -> String {
    let mut out = String::new();
    let clock_list: Vec<&str> = model
        .clocks
        .ids()
        .map(|c| model.clocks.name(c))
        .collect();
    out.push_str(&format!("clocks {};\n", clock_list.join(" ")));
    out.push_str(&format!("bound {};\n\n", model.bound()));
    for loc in &model.locations {
        if loc.invariant.atoms.is_empty() {
            out.push_str(&format!("location {} {{ }}\n", loc.name));
        } else {
            out.push_str(&format!(
                "location {} {{ inv {} }}\n",
                loc.name,
                loc.invariant.render(&model.clocks)
            ));
        }
    }
    out.push('\n');
    for edge in &model.edges {
        let owner = match model.owner(edge.action) {
            Player::Min => "min",
            Player::Max => "max",
        };
        out.push_str(&format!(
            "edge {} {} from {}",
            owner,
            model.action_name(edge.action),
            model.location_name(edge.source)
        ));
        if !edge.guard.atoms.is_empty() {
            out.push_str(&format!(" guard {}", edge.guard.render(&model.clocks)));
        }
        out.push_str(" {\n");
        for (i, b) in edge.branches.iter().enumerate() {
            out.push_str(&format!("  {}", rat::display(&b.prob)));
            if !b.resets.is_empty() {
                let names: Vec<&str> = b.resets.iter().map(|c| model.clocks.name(*c)).collect();
                out.push_str(&format!(" reset {}", names.join(" ")));
            }
            out.push_str(&format!(" -> {}", model.location_name(b.target)));
            if i + 1 < edge.branches.len() {
                out.push(';');
            }
            out.push('\n');
        }
        out.push_str("}\n");
    }
    if !model.targets.is_empty() {
        let names: Vec<&str> = model
            .targets
            .iter()
            .map(|l| model.location_name(*l))
            .collect();
        out.push_str(&format!("\ntarget {};\n", names.join(" ")));
    }
    if let Some(init) = &model.init {
        let assigns: Vec<String> = model
            .clocks
            .ids()
            .map(|c| {
                format!(
                    "{}={}",
                    model.clocks.name(c),
                    rat::display(init.valuation.get(c))
                )
            })
            .collect();
        out.push_str(&format!(
            "init {} ({});\n",
            model.location_name(init.location),
            assigns.join(", ")
        ));
    }
    out
}
