use num::traits::Zero;

use crate::rat::{self, Rat};

use super::{Atom, AtomLhs, ClockConstraint, ClockError, ClockId, ClockValuation, Clocks, Region, Relation};

/// A difference bound: `x_i − x_j ≤ c` (nonstrict) or `< c` (strict), or
/// unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    Inf,
    Le(i64),
    Lt(i64),
}

impl Bound {
    fn add(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::Inf, _) | (_, Bound::Inf) => Bound::Inf,
            (Bound::Le(a), Bound::Le(b)) => Bound::Le(a + b),
            (Bound::Le(a), Bound::Lt(b))
            | (Bound::Lt(a), Bound::Le(b))
            | (Bound::Lt(a), Bound::Lt(b)) => Bound::Lt(a + b),
        }
    }

    /// Tighter-than-or-equal ordering: `Lt(c)` is tighter than `Le(c)`.
    fn le(self, other: Bound) -> bool {
        match (self, other) {
            (_, Bound::Inf) => true,
            (Bound::Inf, _) => false,
            (Bound::Le(a), Bound::Le(b)) | (Bound::Lt(a), Bound::Lt(b)) => a <= b,
            (Bound::Lt(a), Bound::Le(b)) => a <= b,
            (Bound::Le(a), Bound::Lt(b)) => a < b,
        }
    }

    fn min(self, other: Bound) -> Bound {
        if self.le(other) {
            self
        } else {
            other
        }
    }

    fn max(self, other: Bound) -> Bound {
        if self.le(other) {
            other
        } else {
            self
        }
    }

    /// Does the rational difference satisfy the bound?
    fn admits(self, diff: &Rat) -> bool {
        match self {
            Bound::Inf => true,
            Bound::Le(c) => *diff <= rat::int(c),
            Bound::Lt(c) => *diff < rat::int(c),
        }
    }

    fn relax(self) -> Bound {
        match self {
            Bound::Lt(c) => Bound::Le(c),
            b => b,
        }
    }
}

/// A clock zone in canonical (tightest-bounds) difference-bound-matrix form,
/// always intersected with the box `0 ≤ c ≤ K`. Index 0 is the reference.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Zone {
    bound: u32,
    dim: usize,
    empty: bool,
    m: Vec<Bound>,
}

impl Zone {
    fn fresh(n_clocks: usize, bound: u32) -> Zone {
        let dim = n_clocks + 1;
        let mut z = Zone {
            bound,
            dim,
            empty: false,
            m: vec![Bound::Inf; dim * dim],
        };
        for i in 0..dim {
            z.set(i, i, Bound::Le(0));
        }
        for c in 1..dim {
            z.set(0, c, Bound::Le(0)); // 0 − x_c ≤ 0, i.e. x_c ≥ 0
            z.set(c, 0, Bound::Le(bound as i64)); // x_c ≤ K
        }
        z
    }

    /// The full valuation space `[0, K]^n` as a zone.
    pub fn universal(n_clocks: usize, bound: u32) -> Zone {
        let mut z = Zone::fresh(n_clocks, bound);
        z.canonicalize();
        z
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.dim + j
    }

    fn get(&self, i: usize, j: usize) -> Bound {
        self.m[self.idx(i, j)]
    }

    fn set(&mut self, i: usize, j: usize, b: Bound) {
        let k = self.idx(i, j);
        self.m[k] = b;
    }

    fn tighten(&mut self, i: usize, j: usize, b: Bound) {
        let k = self.idx(i, j);
        self.m[k] = self.m[k].min(b);
    }

    fn canonicalize(&mut self) {
        let dim = self.dim;
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    let via = self.get(i, k).add(self.get(k, j));
                    self.tighten(i, j, via);
                }
            }
        }
        for i in 0..dim {
            if !Bound::Le(0).le(self.get(i, i)) {
                self.mark_empty();
                return;
            }
        }
    }

    fn mark_empty(&mut self) {
        self.empty = true;
        self.m = vec![Bound::Le(0); self.dim * self.dim];
        for k in self.m.iter_mut() {
            *k = Bound::Lt(0);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn n_clocks(&self) -> usize {
        self.dim - 1
    }

    /// Builds the zone of a clock constraint.
    pub fn from_constraint(
        g: &ClockConstraint,
        n_clocks: usize,
        bound: u32,
    ) -> Result<Zone, ClockError> {
        g.check_bounds(n_clocks, bound)?;
        let mut z = Zone::fresh(n_clocks, bound);
        for atom in &g.atoms {
            let (i, j) = match atom.lhs {
                AtomLhs::Clock(c) => (c.index() + 1, 0),
                AtomLhs::Diff(c, d) => (c.index() + 1, d.index() + 1),
            };
            let k = atom.constant;
            match atom.rel {
                Relation::Lt => z.tighten(i, j, Bound::Lt(k)),
                Relation::Le => z.tighten(i, j, Bound::Le(k)),
                Relation::Eq => {
                    z.tighten(i, j, Bound::Le(k));
                    z.tighten(j, i, Bound::Le(-k));
                }
                Relation::Ge => z.tighten(j, i, Bound::Le(-k)),
                Relation::Gt => z.tighten(j, i, Bound::Lt(-k)),
            }
        }
        z.canonicalize();
        Ok(z)
    }

    /// Builds the (already tight) zone of a single clock region.
    pub fn from_region(r: &Region) -> Zone {
        let n = r.n_clocks();
        let mut z = Zone::fresh(n, r.bound());
        for c in 0..n {
            let id = ClockId(c as u32);
            let i = r.int_part(id) as i64;
            if r.has_zero_frac(id) {
                z.tighten(c + 1, 0, Bound::Le(i));
                z.tighten(0, c + 1, Bound::Le(-i));
            } else {
                z.tighten(c + 1, 0, Bound::Lt(i + 1));
                z.tighten(0, c + 1, Bound::Lt(-i));
            }
        }
        let block_index: Vec<usize> = (0..n)
            .map(|c| {
                r.blocks()
                    .iter()
                    .position(|b| b.contains(&ClockId(c as u32)))
                    .expect("clock in partition")
            })
            .collect();
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let d = r.int_part(ClockId(a as u32)) as i64 - r.int_part(ClockId(b as u32)) as i64;
                match block_index[a].cmp(&block_index[b]) {
                    std::cmp::Ordering::Equal => {
                        z.tighten(a + 1, b + 1, Bound::Le(d));
                    }
                    std::cmp::Ordering::Less => {
                        // frac(a) < frac(b): a − b ∈ (d−1, d)
                        z.tighten(a + 1, b + 1, Bound::Lt(d));
                    }
                    std::cmp::Ordering::Greater => {
                        z.tighten(a + 1, b + 1, Bound::Lt(d + 1));
                    }
                }
            }
        }
        z.canonicalize();
        debug_assert!(!z.empty, "region produced an empty zone");
        z
    }

    /// Topological closure: every strict bound relaxed to nonstrict.
    pub fn closure(&self) -> Zone {
        let mut z = self.clone();
        if z.empty {
            return z;
        }
        for b in z.m.iter_mut() {
            *b = b.relax();
        }
        z.canonicalize();
        z
    }

    pub fn intersect(&self, other: &Zone) -> Zone {
        assert_eq!(self.dim, other.dim);
        let mut z = self.clone();
        if z.empty || other.empty {
            z.mark_empty();
            return z;
        }
        for (a, b) in z.m.iter_mut().zip(&other.m) {
            *a = a.min(*b);
        }
        z.canonicalize();
        z
    }

    /// Entry-wise loosest bounds. This is the convex hull in DBM space; for
    /// unions of consecutive regions along a time-successor chain it is the
    /// exact union.
    pub fn hull(&self, other: &Zone) -> Zone {
        assert_eq!(self.dim, other.dim);
        if self.empty {
            return other.clone();
        }
        if other.empty {
            return self.clone();
        }
        let mut z = self.clone();
        for (a, b) in z.m.iter_mut().zip(&other.m) {
            *a = a.max(*b);
        }
        z.canonicalize();
        z
    }

    /// `self ⊆ other`, decided on canonical forms.
    pub fn included_in(&self, other: &Zone) -> bool {
        if self.empty {
            return true;
        }
        if other.empty {
            return false;
        }
        self.intersect(other) == *self
    }

    pub fn contains_valuation(&self, nu: &ClockValuation) -> bool {
        if self.empty {
            return false;
        }
        debug_assert_eq!(nu.len(), self.n_clocks());
        let zero = Rat::zero();
        let v = |i: usize| -> &Rat {
            if i == 0 {
                &zero
            } else {
                nu.get(ClockId((i - 1) as u32))
            }
        };
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i == j {
                    continue;
                }
                let diff = v(i) - v(j);
                if !self.get(i, j).admits(&diff) {
                    return false;
                }
            }
        }
        true
    }

    /// Canonical constraint text, e.g. `x>0 & x<1 & x-y=0`.
    pub fn render(&self, clocks: &Clocks) -> String {
        match self.to_constraint() {
            Some(c) => c_render(&c, clocks),
            None => "false".to_string(),
        }
    }

    /// The canonical clock constraint of the zone, or `None` when empty.
    /// Trivial bounds (`c ≥ 0` and `c ≤ K` when not tighter) are omitted.
    pub fn to_constraint(&self) -> Option<Vec<RenderAtom>> {
        if self.empty {
            return None;
        }
        let mut atoms = Vec::new();
        let n = self.n_clocks();
        for c in 0..n {
            let upper = self.get(c + 1, 0);
            let lower = self.get(0, c + 1);
            push_pair(
                &mut atoms,
                RenderLhs::Clock(ClockId(c as u32)),
                upper,
                lower,
                Some(self.bound as i64),
            );
        }
        for a in 0..n {
            for b in 0..n {
                if a >= b {
                    continue;
                }
                let upper = self.get(a + 1, b + 1);
                let lower = self.get(b + 1, a + 1);
                push_pair(
                    &mut atoms,
                    RenderLhs::Diff(ClockId(a as u32), ClockId(b as u32)),
                    upper,
                    lower,
                    None,
                );
            }
        }
        Some(atoms)
    }
}

/// One rendered (in)equality; unlike [`Atom`] the constant may be negative,
/// which the renderer flips onto the other clock.
#[derive(Debug, Clone, Copy)]
pub struct RenderAtom {
    pub lhs: RenderLhs,
    pub rel: Relation,
    pub constant: i64,
}

#[derive(Debug, Clone, Copy)]
pub enum RenderLhs {
    Clock(ClockId),
    Diff(ClockId, ClockId),
}

fn push_pair(
    atoms: &mut Vec<RenderAtom>,
    lhs: RenderLhs,
    upper: Bound,
    lower: Bound,
    trivial_upper: Option<i64>,
) {
    // x − y ≤ upper and y − x ≤ lower, i.e. x − y ≥ −lower.
    if let (Bound::Le(u), Bound::Le(l)) = (upper, lower) {
        if u == -l {
            atoms.push(RenderAtom {
                lhs,
                rel: Relation::Eq,
                constant: u,
            });
            return;
        }
    }
    match upper {
        Bound::Inf => {}
        Bound::Le(c) => {
            if trivial_upper != Some(c) {
                atoms.push(RenderAtom {
                    lhs,
                    rel: Relation::Le,
                    constant: c,
                });
            }
        }
        Bound::Lt(c) => atoms.push(RenderAtom {
            lhs,
            rel: Relation::Lt,
            constant: c,
        }),
    }
    match lower {
        Bound::Inf => {}
        Bound::Le(c) => {
            if c != 0 {
                atoms.push(RenderAtom {
                    lhs,
                    rel: Relation::Ge,
                    constant: -c,
                });
            }
        }
        Bound::Lt(c) => atoms.push(RenderAtom {
            lhs,
            rel: Relation::Gt,
            constant: -c,
        }),
    }
}

fn c_render(atoms: &[RenderAtom], clocks: &Clocks) -> String {
    if atoms.is_empty() {
        return "true".to_string();
    }
    let parts: Vec<String> = atoms
        .iter()
        .map(|a| {
            // Negative constants flip a difference onto the other clock so
            // that the printed constant stays in [0, K].
            let (lhs, rel, constant) = normalize_render(a);
            let lhs_text = match lhs {
                RenderLhs::Clock(c) => clocks.name(c).to_string(),
                RenderLhs::Diff(c, d) => format!("{}-{}", clocks.name(c), clocks.name(d)),
            };
            format!("{}{}{}", lhs_text, rel.symbol(), constant)
        })
        .collect();
    parts.join(" & ")
}

fn normalize_render(a: &RenderAtom) -> (RenderLhs, Relation, i64) {
    if a.constant >= 0 {
        return (a.lhs, a.rel, a.constant);
    }
    match a.lhs {
        RenderLhs::Diff(c, d) => {
            let rel = match a.rel {
                Relation::Lt => Relation::Gt,
                Relation::Le => Relation::Ge,
                Relation::Eq => Relation::Eq,
                Relation::Ge => Relation::Le,
                Relation::Gt => Relation::Lt,
            };
            (RenderLhs::Diff(d, c), rel, -a.constant)
        }
        RenderLhs::Clock(_) => (a.lhs, a.rel, a.constant),
    }
}

/// The zone `[ζ, ζ′]`: the union of all regions between `ζ` and `ζ′` on the
/// time-successor chain. Errors when `ζ′` is not in the future of `ζ`.
pub fn zone_between(from: &Region, to: &Region) -> Result<Zone, ClockError> {
    let mut acc = Zone::from_region(from);
    if from == to {
        return Ok(acc);
    }
    let mut cur = from.clone();
    loop {
        match cur.time_successor() {
            Some(next) => {
                acc = acc.hull(&Zone::from_region(&next));
                if next == *to {
                    return Ok(acc);
                }
                cur = next;
            }
            None => return Err(ClockError::NotInFuture),
        }
    }
}

impl Zone {
    /// Convert to a plain [`ClockConstraint`] when all constants fit in
    /// `[0, K]` after flipping differences; used for serialization.
    pub fn to_clock_constraint(&self) -> Option<ClockConstraint> {
        let atoms = self.to_constraint()?;
        let converted: Vec<Atom> = atoms
            .iter()
            .map(|a| {
                let (lhs, rel, constant) = normalize_render(a);
                let lhs = match lhs {
                    RenderLhs::Clock(c) => AtomLhs::Clock(c),
                    RenderLhs::Diff(c, d) => AtomLhs::Diff(c, d),
                };
                Atom { lhs, rel, constant }
            })
            .collect();
        Some(ClockConstraint::new(converted))
    }
}
