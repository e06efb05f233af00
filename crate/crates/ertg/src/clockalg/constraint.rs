use std::fmt;

use crate::rat::{int, Rat};

use super::{ClockError, ClockId, Clocks};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Relation {
    pub fn holds(self, lhs: &Rat, rhs: &Rat) -> bool {
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomLhs {
    Clock(ClockId),
    Diff(ClockId, ClockId),
}

/// A simple constraint `c ⋈ i` or `c − c' ⋈ i` with `i ∈ [0, K]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub lhs: AtomLhs,
    pub rel: Relation,
    pub constant: i64,
}

impl Atom {
    pub fn holds_in(&self, nu: &super::ClockValuation) -> bool {
        let lhs = match self.lhs {
            AtomLhs::Clock(c) => nu.get(c).clone(),
            AtomLhs::Diff(c, d) => nu.get(c) - nu.get(d),
        };
        self.rel.holds(&lhs, &int(self.constant))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lhs {
            AtomLhs::Clock(c) => write!(f, "c{}{}{}", c.0, self.rel.symbol(), self.constant),
            AtomLhs::Diff(c, d) => write!(
                f,
                "c{}-c{}{}{}",
                c.0,
                d.0,
                self.rel.symbol(),
                self.constant
            ),
        }
    }
}

/// A conjunction of simple constraints. The empty conjunction is `true`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ClockConstraint {
    pub atoms: Vec<Atom>,
}

impl ClockConstraint {
    pub fn truth() -> Self {
        ClockConstraint { atoms: Vec::new() }
    }

    pub fn new(atoms: Vec<Atom>) -> Self {
        ClockConstraint { atoms }
    }

    /// Checks that every constant lies in `[0, K]` and clock ids are valid.
    pub fn check_bounds(&self, n_clocks: usize, bound: u32) -> Result<(), ClockError> {
        for atom in &self.atoms {
            if atom.constant < 0 || atom.constant > bound as i64 {
                return Err(ClockError::ConstantExceedsBound {
                    constant: atom.constant,
                    bound,
                });
            }
            let ok = match atom.lhs {
                AtomLhs::Clock(c) => c.index() < n_clocks,
                AtomLhs::Diff(c, d) => c.index() < n_clocks && d.index() < n_clocks,
            };
            if !ok {
                return Err(ClockError::MismatchedClocks {
                    left: n_clocks,
                    right: n_clocks + 1,
                });
            }
        }
        Ok(())
    }

    /// Substitutes the valuation into every atom.
    pub fn satisfied_by(&self, nu: &super::ClockValuation) -> Result<bool, ClockError> {
        for atom in &self.atoms {
            let idx_bound = match atom.lhs {
                AtomLhs::Clock(c) => c.index(),
                AtomLhs::Diff(c, d) => c.index().max(d.index()),
            };
            if idx_bound >= nu.len() {
                return Err(ClockError::MismatchedClocks {
                    left: nu.len(),
                    right: idx_bound + 1,
                });
            }
            if !atom.holds_in(nu) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn render(&self, clocks: &Clocks) -> String {
        if self.atoms.is_empty() {
            return "true".to_string();
        }
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| {
                let lhs = match a.lhs {
                    AtomLhs::Clock(c) => clocks.name(c).to_string(),
                    AtomLhs::Diff(c, d) => format!("{}-{}", clocks.name(c), clocks.name(d)),
                };
                format!("{}{}{}", lhs, a.rel.symbol(), a.constant)
            })
            .collect();
        parts.join(" & ")
    }

    /// Parses the canonical text syntax, e.g. `x<=2 & x-y>1` or `true`.
    pub fn parse(text: &str, clocks: &Clocks) -> Result<Self, String> {
        let text = text.trim();
        if text == "true" || text.is_empty() {
            return Ok(ClockConstraint::truth());
        }
        let mut atoms = Vec::new();
        for part in text.split('&') {
            atoms.push(parse_atom(part.trim(), clocks)?);
        }
        Ok(ClockConstraint::new(atoms))
    }

    /// All simple atoms over the given clocks with constants up to `K`;
    /// the corpus behind the region canonicity tests.
    pub fn atom_corpus(n_clocks: usize, bound: u32) -> Vec<Atom> {
        let rels = [
            Relation::Lt,
            Relation::Le,
            Relation::Eq,
            Relation::Ge,
            Relation::Gt,
        ];
        let mut corpus = Vec::new();
        for c in 0..n_clocks {
            for k in 0..=bound as i64 {
                for rel in rels {
                    corpus.push(Atom {
                        lhs: AtomLhs::Clock(ClockId(c as u32)),
                        rel,
                        constant: k,
                    });
                }
            }
        }
        for c in 0..n_clocks {
            for d in 0..n_clocks {
                if c == d {
                    continue;
                }
                for k in 0..=bound as i64 {
                    for rel in rels {
                        corpus.push(Atom {
                            lhs: AtomLhs::Diff(ClockId(c as u32), ClockId(d as u32)),
                            rel,
                            constant: k,
                        });
                    }
                }
            }
        }
        corpus
    }
}

fn parse_atom(s: &str, clocks: &Clocks) -> Result<Atom, String> {
    let (rel_pos, rel, rel_len) = find_relation(s)
        .ok_or_else(|| format!("expected a relation (<, <=, =, >=, >) in constraint atom `{s}`"))?;
    let lhs_text = s[..rel_pos].trim();
    let rhs_text = s[rel_pos + rel_len..].trim();
    let constant: i64 = rhs_text
        .parse()
        .map_err(|_| format!("expected an integer bound, found `{rhs_text}`"))?;
    let lhs = if let Some((a, b)) = lhs_text.split_once('-') {
        let a = clocks.lookup(a.trim()).map_err(|e| e.to_string())?;
        let b = clocks.lookup(b.trim()).map_err(|e| e.to_string())?;
        AtomLhs::Diff(a, b)
    } else {
        AtomLhs::Clock(clocks.lookup(lhs_text).map_err(|e| e.to_string())?)
    };
    Ok(Atom { lhs, rel, constant })
}

fn find_relation(s: &str) -> Option<(usize, Relation, usize)> {
    for (pat, rel) in [
        ("<=", Relation::Le),
        (">=", Relation::Ge),
        ("<", Relation::Lt),
        (">", Relation::Gt),
        ("=", Relation::Eq),
    ] {
        if let Some(pos) = s.find(pat) {
            return Some((pos, rel, pat.len()));
        }
    }
    None
}
