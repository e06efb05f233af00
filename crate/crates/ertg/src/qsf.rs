//! Simple and quasi-simple functions over clock valuations.
//!
//! A simple function is a constant `e` or `e − ν(c)` for a clock `c`;
//! quasi-simple functions close the simple ones under min, max, and convex
//! combination. They are non-expansive in the max norm, and they are closed
//! under the two transforms that matter for per-region value functions:
//! delaying to a boundary `c = i` and resetting a clock set. Trees are kept
//! structurally as built; no simplification is applied.

use num::traits::{One, Zero};
use thiserror::Error;

use crate::clockalg::{ClockId, ClockValuation, Clocks};
use crate::rat::{self, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QsfError {
    #[error("convex weights must be positive and sum to 1 (sum is {0})")]
    BadWeights(String),
    #[error("combine needs at least one child")]
    NoChildren,
    #[error("parse error at byte {at}: {message}")]
    Parse { at: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimpleFn {
    /// The constant function `e`.
    Const(Rat),
    /// `ν ↦ e − ν(c)`.
    Linear { offset: Rat, clock: ClockId },
}

impl SimpleFn {
    pub fn eval(&self, nu: &ClockValuation) -> Rat {
        match self {
            SimpleFn::Const(e) => e.clone(),
            SimpleFn::Linear { offset, clock } => offset - nu.get(*clock),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Qsf {
    Leaf(SimpleFn),
    Min(Vec<Qsf>),
    Max(Vec<Qsf>),
    Convex(Vec<(Rat, Qsf)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineOp {
    Min,
    Max,
}

impl Qsf {
    pub fn constant(e: Rat) -> Qsf {
        Qsf::Leaf(SimpleFn::Const(e))
    }

    pub fn linear(offset: Rat, clock: ClockId) -> Qsf {
        Qsf::Leaf(SimpleFn::Linear { offset, clock })
    }

    pub fn eval(&self, nu: &ClockValuation) -> Rat {
        match self {
            Qsf::Leaf(f) => f.eval(nu),
            Qsf::Min(children) => children
                .iter()
                .map(|c| c.eval(nu))
                .min()
                .expect("min node has children"),
            Qsf::Max(children) => children
                .iter()
                .map(|c| c.eval(nu))
                .max()
                .expect("max node has children"),
            Qsf::Convex(children) => children
                .iter()
                .map(|(w, c)| w * c.eval(nu))
                .fold(Rat::zero(), |a, b| a + b),
        }
    }

    pub fn combine(op: CombineOp, children: Vec<Qsf>) -> Result<Qsf, QsfError> {
        if children.is_empty() {
            return Err(QsfError::NoChildren);
        }
        Ok(match op {
            CombineOp::Min => Qsf::Min(children),
            CombineOp::Max => Qsf::Max(children),
        })
    }

    pub fn convex(children: Vec<(Rat, Qsf)>) -> Result<Qsf, QsfError> {
        if children.is_empty() {
            return Err(QsfError::NoChildren);
        }
        let mut sum = Rat::zero();
        for (w, _) in &children {
            if *w <= Rat::zero() {
                return Err(QsfError::BadWeights(rat::display(w)));
            }
            sum += w.clone();
        }
        if !sum.is_one() {
            return Err(QsfError::BadWeights(rat::display(&sum)));
        }
        Ok(Qsf::Convex(children))
    }

    /// The delay-to-boundary transform for the boundary `clock = i`:
    /// constant leaves `e` become `(e + i) − ν(clock)`; other leaves and
    /// the node structure are untouched. On the domain `ν(clock) ≤ i`,
    /// `result(ν) = t + self(ν + t)` with `t = i − ν(clock)`.
    pub fn elapse_transform(&self, clock: ClockId, i: i64) -> Qsf {
        match self {
            Qsf::Leaf(SimpleFn::Const(e)) => Qsf::Leaf(SimpleFn::Linear {
                offset: e + rat::int(i),
                clock,
            }),
            Qsf::Leaf(other) => Qsf::Leaf(other.clone()),
            Qsf::Min(children) => Qsf::Min(
                children
                    .iter()
                    .map(|c| c.elapse_transform(clock, i))
                    .collect(),
            ),
            Qsf::Max(children) => Qsf::Max(
                children
                    .iter()
                    .map(|c| c.elapse_transform(clock, i))
                    .collect(),
            ),
            Qsf::Convex(children) => Qsf::Convex(
                children
                    .iter()
                    .map(|(w, c)| (w.clone(), c.elapse_transform(clock, i)))
                    .collect(),
            ),
        }
    }

    /// The reset transform: leaves `e − ν(c)` with `c` in the reset set
    /// become the constant `e`; `result(ν) = self(ν_C)`.
    pub fn reset_transform(&self, resets: &std::collections::BTreeSet<ClockId>) -> Qsf {
        match self {
            Qsf::Leaf(SimpleFn::Linear { offset, clock }) if resets.contains(clock) => {
                Qsf::Leaf(SimpleFn::Const(offset.clone()))
            }
            Qsf::Leaf(other) => Qsf::Leaf(other.clone()),
            Qsf::Min(children) => {
                Qsf::Min(children.iter().map(|c| c.reset_transform(resets)).collect())
            }
            Qsf::Max(children) => {
                Qsf::Max(children.iter().map(|c| c.reset_transform(resets)).collect())
            }
            Qsf::Convex(children) => Qsf::Convex(
                children
                    .iter()
                    .map(|(w, c)| (w.clone(), c.reset_transform(resets)))
                    .collect(),
            ),
        }
    }

    /// Syntactic tree height: leaves are 0. An upper bound on the rank of
    /// the represented function.
    pub fn height(&self) -> usize {
        match self {
            Qsf::Leaf(_) => 0,
            Qsf::Min(children) | Qsf::Max(children) => {
                1 + children.iter().map(Qsf::height).max().unwrap_or(0)
            }
            Qsf::Convex(children) => {
                1 + children.iter().map(|(_, c)| c.height()).max().unwrap_or(0)
            }
        }
    }

    /// Checks the structural invariants (weights, child counts) of the
    /// whole tree.
    pub fn well_formed(&self) -> bool {
        match self {
            Qsf::Leaf(_) => true,
            Qsf::Min(children) | Qsf::Max(children) => {
                !children.is_empty() && children.iter().all(Qsf::well_formed)
            }
            Qsf::Convex(children) => {
                if children.is_empty() {
                    return false;
                }
                let mut sum = Rat::zero();
                for (w, c) in children {
                    if *w <= Rat::zero() || !c.well_formed() {
                        return false;
                    }
                    sum += w.clone();
                }
                sum.is_one()
            }
        }
    }

    /// Prefix text form: `min(c:1/2, lin(1,x))`, `cvx(1/2*c:0, 1/2*c:1)`.
    pub fn render(&self, clocks: &Clocks) -> String {
        match self {
            Qsf::Leaf(SimpleFn::Const(e)) => format!("c:{}", rat::display(e)),
            Qsf::Leaf(SimpleFn::Linear { offset, clock }) => {
                format!("lin({},{})", rat::display(offset), clocks.name(*clock))
            }
            Qsf::Min(children) => render_node("min", children, clocks),
            Qsf::Max(children) => render_node("max", children, clocks),
            Qsf::Convex(children) => {
                let parts: Vec<String> = children
                    .iter()
                    .map(|(w, c)| format!("{}*{}", rat::display(w), c.render(clocks)))
                    .collect();
                format!("cvx({})", parts.join(", "))
            }
        }
    }

    pub fn parse(text: &str, clocks: &Clocks) -> Result<Qsf, QsfError> {
        let mut p = QsfParser {
            text: text.as_bytes(),
            pos: 0,
            clocks,
        };
        let q = p.parse_tree()?;
        p.skip_ws();
        if p.pos != p.text.len() {
            return Err(QsfError::Parse {
                at: p.pos,
                message: "trailing input".into(),
            });
        }
        Ok(q)
    }
}

fn render_node(name: &str, children: &[Qsf], clocks: &Clocks) -> String {
    let parts: Vec<String> = children.iter().map(|c| c.render(clocks)).collect();
    format!("{}({})", name, parts.join(", "))
}

struct QsfParser<'a> {
    text: &'a [u8],
    pos: usize,
    clocks: &'a Clocks,
}

impl<'a> QsfParser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, QsfError> {
        Err(QsfError::Parse {
            at: self.pos,
            message: message.into(),
        })
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.pos < self.text.len() && self.text[self.pos] == c {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len()
            && (self.text[self.pos].is_ascii_alphanumeric() || self.text[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.text[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<Rat, QsfError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len()
            && (self.text[self.pos].is_ascii_digit()
                || self.text[self.pos] == b'/'
                || self.text[self.pos] == b'.')
        {
            self.pos += 1;
        }
        let s = std::str::from_utf8(&self.text[start..self.pos]).unwrap();
        rat::parse(s).ok_or(QsfError::Parse {
            at: start,
            message: format!("bad number `{s}`"),
        })
    }

    fn parse_tree(&mut self) -> Result<Qsf, QsfError> {
        self.skip_ws();
        let head = self.word();
        match head.as_str() {
            "c" => {
                if !self.eat(b':') {
                    return self.error("expected `:` after `c`");
                }
                Ok(Qsf::constant(self.number()?))
            }
            "lin" => {
                if !self.eat(b'(') {
                    return self.error("expected `(`");
                }
                let offset = self.number()?;
                if !self.eat(b',') {
                    return self.error("expected `,`");
                }
                let name = self.word();
                let clock = self
                    .clocks
                    .lookup(&name)
                    .map_err(|e| QsfError::Parse {
                        at: self.pos,
                        message: e.to_string(),
                    })?;
                if !self.eat(b')') {
                    return self.error("expected `)`");
                }
                Ok(Qsf::linear(offset, clock))
            }
            "min" | "max" => {
                if !self.eat(b'(') {
                    return self.error("expected `(`");
                }
                let mut children = vec![self.parse_tree()?];
                while self.eat(b',') {
                    children.push(self.parse_tree()?);
                }
                if !self.eat(b')') {
                    return self.error("expected `)`");
                }
                let op = if head == "min" {
                    CombineOp::Min
                } else {
                    CombineOp::Max
                };
                Qsf::combine(op, children)
            }
            "cvx" => {
                if !self.eat(b'(') {
                    return self.error("expected `(`");
                }
                let mut children = Vec::new();
                loop {
                    let w = self.number()?;
                    if !self.eat(b'*') {
                        return self.error("expected `*` after a convex weight");
                    }
                    children.push((w, self.parse_tree()?));
                    if !self.eat(b',') {
                        break;
                    }
                }
                if !self.eat(b')') {
                    return self.error("expected `)`");
                }
                Qsf::convex(children)
            }
            other => self.error(format!("unknown node `{other}`")),
        }
    }
}
