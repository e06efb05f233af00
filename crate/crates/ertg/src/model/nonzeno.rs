use std::collections::BTreeSet;

use crate::clockalg::{Atom, AtomLhs, ClockConstraint, ClockId, Relation, Zone};

use super::{ActionId, LocationId, Ptga};

/// One step of a witness cycle: the branch-level edge taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonZenoWitness {
    pub cycle: Vec<(LocationId, ActionId, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZenoCheck {
    /// Every cycle of the location/action graph resets some clock that is
    /// also bounded below by 1 on the cycle.
    StructurallyNonZeno,
    /// A cycle violating the condition, as evidence.
    PossiblyZeno(NonZenoWitness),
}

impl ZenoCheck {
    pub fn is_non_zeno(&self) -> bool {
        matches!(self, ZenoCheck::StructurallyNonZeno)
    }
}

struct BranchEdge {
    from: LocationId,
    to: LocationId,
    action: ActionId,
    branch: usize,
    resets: BTreeSet<ClockId>,
    /// Clocks `c` whose guard implies `c ≥ 1`.
    lower_bounded: BTreeSet<ClockId>,
}

/// Checks the standard structural non-Zenoness condition: on every cycle,
/// some clock is both reset and bounded below by 1. A cycle violating it
/// must, for every clock, avoid all its resets or avoid all its `≥ 1`
/// guards; we search the prunings induced by each such choice for a cycle.
pub fn check(model: &Ptga) -> ZenoCheck {
    let n_clocks = model.n_clocks();
    let edges = branch_edges(model);
    let n_choices: u64 = 1 << n_clocks;
    for choice in 0..n_choices {
        // Bit c set: the cycle avoids resets of clock c;
        // unset: it avoids guards implying c >= 1.
        let keep = |e: &BranchEdge| -> bool {
            for c in 0..n_clocks {
                let id = ClockId(c as u32);
                if choice & (1 << c) != 0 {
                    if e.resets.contains(&id) {
                        return false;
                    }
                } else if e.lower_bounded.contains(&id) {
                    return false;
                }
            }
            true
        };
        let kept: Vec<&BranchEdge> = edges.iter().filter(|e| keep(e)).collect();
        if let Some(cycle) = find_cycle(model.locations.len(), &kept) {
            return ZenoCheck::PossiblyZeno(NonZenoWitness {
                cycle: cycle
                    .into_iter()
                    .map(|e| (e.from, e.action, e.branch))
                    .collect(),
            });
        }
    }
    ZenoCheck::StructurallyNonZeno
}

fn branch_edges(model: &Ptga) -> Vec<BranchEdge> {
    let n = model.n_clocks();
    let k = model.bound();
    let mut out = Vec::new();
    for edge in &model.edges {
        let guard = model.guard_zone(edge);
        let mut lower_bounded = BTreeSet::new();
        for c in 0..n {
            let id = ClockId(c as u32);
            let ge1 = Zone::from_constraint(
                &ClockConstraint::new(vec![Atom {
                    lhs: AtomLhs::Clock(id),
                    rel: Relation::Ge,
                    constant: 1,
                }]),
                n,
                k,
            )
            .expect("constant 1 within bound");
            if guard.included_in(&ge1) {
                lower_bounded.insert(id);
            }
        }
        for (bi, branch) in edge.branches.iter().enumerate() {
            out.push(BranchEdge {
                from: edge.source,
                to: branch.target,
                action: edge.action,
                branch: bi,
                resets: branch.resets.clone(),
                lower_bounded: lower_bounded.clone(),
            });
        }
    }
    out
}

/// Finds any cycle in the kept subgraph via DFS, returned as its edge list.
fn find_cycle<'a>(
    n_locations: usize,
    edges: &[&'a BranchEdge],
) -> Option<Vec<&'a BranchEdge>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Gray,
        Black,
    }
    let mut adj: Vec<Vec<&BranchEdge>> = vec![Vec::new(); n_locations];
    for e in edges {
        adj[e.from.index()].push(e);
    }
    let mut mark = vec![Mark::White; n_locations];
    let mut stack: Vec<&BranchEdge> = Vec::new();

    fn dfs<'a>(
        v: usize,
        adj: &Vec<Vec<&'a BranchEdge>>,
        mark: &mut Vec<Mark>,
        stack: &mut Vec<&'a BranchEdge>,
    ) -> Option<Vec<&'a BranchEdge>> {
        mark[v] = Mark::Gray;
        for e in &adj[v] {
            let w = e.to.index();
            match mark[w] {
                Mark::Gray => {
                    // Close the cycle: keep the suffix of the stack from w.
                    let mut cycle: Vec<&BranchEdge> = Vec::new();
                    let mut seen_start = false;
                    for s in stack.iter() {
                        if s.from.index() == w {
                            seen_start = true;
                        }
                        if seen_start {
                            cycle.push(s);
                        }
                    }
                    cycle.push(e);
                    return Some(cycle);
                }
                Mark::White => {
                    stack.push(e);
                    if let Some(c) = dfs(w, adj, mark, stack) {
                        return Some(c);
                    }
                    stack.pop();
                }
                Mark::Black => {}
            }
        }
        mark[v] = Mark::Black;
        None
    }

    for v in 0..n_locations {
        if mark[v] == Mark::White {
            if let Some(c) = dfs(v, &adj, &mut mark, &mut stack) {
                return Some(c);
            }
        }
    }
    None
}
