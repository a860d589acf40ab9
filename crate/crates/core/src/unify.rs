//! First-order unification over persistent substitutions.
//!
//! A [`Substitution`] is a persistent hash map (structural sharing), so
//! keeping an old value around is how the engine backtracks.

use std::fmt;

use imbl::HashMap;

use crate::ast::{Term, Var};

/// Bound on occurs-check descent when the check is switched off.
const SHALLOW_OCCURS_DEPTH: usize = 32;
/// Bound on term traversal; only reachable through cyclic bindings.
const TRAVERSAL_LIMIT: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OccursCheck {
    #[default]
    On,
    /// Bounded check only. Unification still terminates on cyclic input.
    Off,
}

impl From<bool> for OccursCheck {
    fn from(on: bool) -> Self {
        if on {
            OccursCheck::On
        } else {
            OccursCheck::Off
        }
    }
}

/// Triangular substitution; idempotent after [`walk`]ing.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: HashMap<Var, Term>,
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut entries: Vec<_> = self.bindings.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        f.debug_map().entries(entries).finish()
    }
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.bindings.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    /// Adds `v -> t` without any check. Callers keep the substitution acyclic.
    pub fn bind(&self, v: Var, t: Term) -> Substitution {
        Substitution {
            bindings: self.bindings.update(v, t),
        }
    }

    pub(crate) fn without(&self, v: &Var) -> Substitution {
        if self.bindings.contains_key(v) {
            Substitution {
                bindings: self.bindings.without(v),
            }
        } else {
            self.clone()
        }
    }

    pub fn walk(&self, t: &Term) -> Term {
        walk(t, self)
    }

    /// Deep application of the substitution. A variable met again while
    /// its own binding is being expanded (a cyclic store, only possible
    /// with the occurs check off) is left in place.
    pub fn resolve(&self, t: &Term) -> Term {
        self.resolve_with(t, &mut Vec::new())
    }

    fn resolve_with(&self, t: &Term, expanding: &mut Vec<Var>) -> Term {
        match t {
            Term::Var(v) => match self.bindings.get(v) {
                Some(bound) if !expanding.contains(v) => {
                    expanding.push(v.clone());
                    let r = self.resolve_with(bound, expanding);
                    expanding.pop();
                    r
                }
                _ => t.clone(),
            },
            Term::Compound(f, args) => Term::Compound(
                f.clone(),
                args.iter()
                    .map(|a| self.resolve_with(a, expanding))
                    .collect(),
            ),
            _ => t.clone(),
        }
    }
}

/// Follows variable bindings until reaching a non-variable or an unbound
/// variable. Does not descend into compound arguments.
pub fn walk(t: &Term, s: &Substitution) -> Term {
    let mut cur = t;
    let mut steps = 0;
    while let Term::Var(v) = cur {
        match s.bindings.get(v) {
            Some(next) if steps < TRAVERSAL_LIMIT => {
                cur = next;
                steps += 1;
            }
            _ => break,
        }
    }
    cur.clone()
}

/// Most general unifier of `t1` and `t2` extending `s`, or `None`.
/// `s` itself is never modified.
pub fn unify(t1: &Term, t2: &Term, s: &Substitution, occurs: OccursCheck) -> Option<Substitution> {
    let mut s = s.clone();
    let mut work = vec![(t1.clone(), t2.clone())];
    let mut steps = 0usize;
    while let Some((a, b)) = work.pop() {
        steps += 1;
        if steps > TRAVERSAL_LIMIT {
            return None;
        }
        let a = walk(&a, &s);
        let b = walk(&b, &s);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), _) => {
                if occurs_in(x, &b, &s, occurs) {
                    return None;
                }
                s = s.bind(x.clone(), b);
            }
            (_, Term::Var(y)) => {
                if occurs_in(y, &a, &s, occurs) {
                    return None;
                }
                s = s.bind(y.clone(), a);
            }
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return None;
                }
                work.extend(xs.iter().cloned().zip(ys.iter().cloned()).rev());
            }
            _ => {
                if a != b {
                    return None;
                }
            }
        }
    }
    Some(s)
}

fn occurs_in(v: &Var, t: &Term, s: &Substitution, mode: OccursCheck) -> bool {
    let limit = match mode {
        OccursCheck::On => usize::MAX,
        OccursCheck::Off => SHALLOW_OCCURS_DEPTH,
    };
    let mut stack = vec![(t.clone(), 0usize)];
    let mut steps = 0usize;
    while let Some((t, depth)) = stack.pop() {
        steps += 1;
        if steps > TRAVERSAL_LIMIT {
            // Only a cyclic store can get here; refuse to extend it.
            return true;
        }
        match walk(&t, s) {
            Term::Var(w) if &w == v => return true,
            Term::Compound(_, args) if depth < limit => {
                stack.extend(args.iter().map(|a| (a.clone(), depth + 1)));
            }
            _ => {}
        }
    }
    false
}
