//! Terms, goal formulas (G) and program formulas (D).
//!
//! Every value here is immutable and cheaply clonable: children are held
//! behind `Arc`, so the engine can copy formulas into continuation frames
//! without deep copies.

use std::sync::Arc;

use thiserror::Error;

use crate::unify::Substitution;

/// Interned-ish symbol name. Shared, immutable.
pub type Sym = Arc<str>;

pub(crate) const NIL: &str = "nil";
pub(crate) const CONS: &str = "cons";

/// A logic variable. Source-level variables carry stamp 0; variables minted
/// by [`FreshSource`] carry a stamp that is unique within one source.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Sym,
    pub stamp: u32,
}

impl Var {
    pub fn named(name: &str) -> Self {
        Var {
            name: name.into(),
            stamp: 0,
        }
    }

    pub fn is_fresh(&self) -> bool {
        self.stamp != 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Const(Sym),
    Int(i64),
    /// Functor and arguments; never zero arguments.
    Compound(Sym, Arc<[Term]>),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Var::named(name))
    }

    pub fn constant(name: &str) -> Self {
        Term::Const(name.into())
    }

    pub fn int(value: i64) -> Self {
        Term::Int(value)
    }

    /// Builds `functor(args..)`. An empty argument list yields a constant.
    pub fn compound(functor: &str, args: Vec<Term>) -> Self {
        if args.is_empty() {
            Term::Const(functor.into())
        } else {
            Term::Compound(functor.into(), args.into())
        }
    }

    pub fn nil() -> Self {
        Term::constant(NIL)
    }

    pub fn cons(head: Term, tail: Term) -> Self {
        Term::compound(CONS, vec![head, tail])
    }

    /// `[items.. | tail]`, with `tail = None` meaning `[]`.
    pub fn list(items: impl IntoIterator<Item = Term>, tail: Option<Term>) -> Self {
        let items: Vec<Term> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .fold(tail.unwrap_or_else(Term::nil), |acc, t| Term::cons(t, acc))
    }

    pub fn int_list(values: &[i64]) -> Self {
        Term::list(values.iter().map(|&v| Term::Int(v)), None)
    }

    /// Name and arity of an atom-shaped term.
    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            Term::Const(name) => Some((name, 0)),
            Term::Compound(name, args) => Some((name, args.len())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    /// Constants and compounds may stand as atomic formulas.
    pub fn is_atom_term(&self) -> bool {
        matches!(self, Term::Const(_) | Term::Compound(..))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) | Term::Int(_) => true,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Splits list sugar: the elements and the non-`cons` tail.
    pub fn as_list(&self) -> Option<(Vec<&Term>, &Term)> {
        let mut items = Vec::new();
        let mut cur = self;
        while let Term::Compound(f, args) = cur {
            if &**f != CONS || args.len() != 2 {
                break;
            }
            items.push(&args[0]);
            cur = &args[1];
        }
        if items.is_empty() {
            None
        } else {
            Some((items, cur))
        }
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Term::Const(c) if &**c == NIL)
    }

    fn collect_vars(&self, bound: &[Var], out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(bound, out)),
            Term::Const(_) | Term::Int(_) => {}
        }
    }

    fn rename(&self, map: &[(Var, Term)]) -> Term {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Term::Var(v) => map
                .iter()
                .rev()
                .find(|(k, _)| k == v)
                .map(|(_, t)| t.clone())
                .unwrap_or_else(|| self.clone()),
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| a.rename(map)).collect())
            }
            Term::Const(_) | Term::Int(_) => self.clone(),
        }
    }
}

/// Goal formulas: `A | G, G | D => G | exists x. G`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GFormula {
    Atom(Term),
    And(Arc<GFormula>, Arc<GFormula>),
    Imp(Arc<DFormula>, Arc<GFormula>),
    Exists(Var, Arc<GFormula>),
}

impl GFormula {
    pub fn atom(t: Term) -> Self {
        GFormula::Atom(t)
    }

    pub fn and(l: GFormula, r: GFormula) -> Self {
        GFormula::And(Arc::new(l), Arc::new(r))
    }

    pub fn imp(d: DFormula, g: GFormula) -> Self {
        GFormula::Imp(Arc::new(d), Arc::new(g))
    }

    pub fn exists(v: Var, g: GFormula) -> Self {
        GFormula::Exists(v, Arc::new(g))
    }

    /// Right-nested conjunction of `goals`; `None` when empty.
    pub fn conj(goals: impl IntoIterator<Item = GFormula>) -> Option<Self> {
        let goals: Vec<GFormula> = goals.into_iter().collect();
        goals
            .into_iter()
            .rev()
            .reduce(|acc, g| GFormula::and(g, acc))
    }

    fn collect_vars(&self, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
        match self {
            GFormula::Atom(t) => t.collect_vars(bound, out),
            GFormula::And(l, r) => {
                l.collect_vars(bound, out);
                r.collect_vars(bound, out);
            }
            GFormula::Imp(d, g) => {
                d.collect_vars(bound, out);
                g.collect_vars(bound, out);
            }
            GFormula::Exists(v, g) => {
                bound.push(v.clone());
                g.collect_vars(bound, out);
                bound.pop();
            }
        }
    }

    /// Substitutes free occurrences; binders shadow entries of `map`.
    pub(crate) fn rename(&self, map: &[(Var, Term)]) -> GFormula {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            GFormula::Atom(t) => GFormula::Atom(t.rename(map)),
            GFormula::And(l, r) => GFormula::and(l.rename(map), r.rename(map)),
            GFormula::Imp(d, g) => GFormula::imp(d.rename(map), g.rename(map)),
            GFormula::Exists(v, g) => {
                let inner = without(map, v);
                GFormula::exists(v.clone(), g.rename(&inner))
            }
        }
    }
}

/// Program formulas: `A | G :- D | all x. D | D & D | D, D | mod(name)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DFormula {
    Atom(Term),
    /// Body `G` implies head `D`.
    Imp(Arc<GFormula>, Arc<DFormula>),
    All(Var, Arc<DFormula>),
    /// Choice conjunction: exactly one side is used per commitment.
    Choice(Arc<DFormula>, Arc<DFormula>),
    And(Arc<DFormula>, Arc<DFormula>),
    ModRef(Sym),
}

impl DFormula {
    pub fn atom(t: Term) -> Self {
        DFormula::Atom(t)
    }

    pub fn imp(body: GFormula, head: DFormula) -> Self {
        DFormula::Imp(Arc::new(body), Arc::new(head))
    }

    pub fn all(v: Var, body: DFormula) -> Self {
        DFormula::All(v, Arc::new(body))
    }

    pub fn choice(l: DFormula, r: DFormula) -> Self {
        DFormula::Choice(Arc::new(l), Arc::new(r))
    }

    pub fn and(l: DFormula, r: DFormula) -> Self {
        DFormula::And(Arc::new(l), Arc::new(r))
    }

    pub fn modref(name: &str) -> Self {
        DFormula::ModRef(name.into())
    }

    /// Right-nested `&` chain; `None` when empty.
    pub fn choices(sides: impl IntoIterator<Item = DFormula>) -> Option<Self> {
        let sides: Vec<DFormula> = sides.into_iter().collect();
        sides
            .into_iter()
            .rev()
            .reduce(|acc, d| DFormula::choice(d, acc))
    }

    /// Right-nested `,` fold; a single element is returned unwrapped.
    pub fn conj(parts: impl IntoIterator<Item = DFormula>) -> Option<Self> {
        let parts: Vec<DFormula> = parts.into_iter().collect();
        parts
            .into_iter()
            .rev()
            .reduce(|acc, d| DFormula::and(d, acc))
    }

    fn collect_vars(&self, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
        match self {
            DFormula::Atom(t) => t.collect_vars(bound, out),
            DFormula::Imp(g, d) => {
                g.collect_vars(bound, out);
                d.collect_vars(bound, out);
            }
            DFormula::All(v, d) => {
                bound.push(v.clone());
                d.collect_vars(bound, out);
                bound.pop();
            }
            DFormula::Choice(l, r) | DFormula::And(l, r) => {
                l.collect_vars(bound, out);
                r.collect_vars(bound, out);
            }
            DFormula::ModRef(_) => {}
        }
    }

    pub(crate) fn rename(&self, map: &[(Var, Term)]) -> DFormula {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            DFormula::Atom(t) => DFormula::Atom(t.rename(map)),
            DFormula::Imp(g, d) => DFormula::imp(g.rename(map), d.rename(map)),
            DFormula::All(v, d) => {
                let inner = without(map, v);
                DFormula::all(v.clone(), d.rename(&inner))
            }
            DFormula::Choice(l, r) => DFormula::choice(l.rename(map), r.rename(map)),
            DFormula::And(l, r) => DFormula::and(l.rename(map), r.rename(map)),
            DFormula::ModRef(_) => self.clone(),
        }
    }

    /// True when the formula has no free variables.
    pub fn is_closed(&self) -> bool {
        free_vars(self).is_empty()
    }
}

fn without(map: &[(Var, Term)], v: &Var) -> Vec<(Var, Term)> {
    map.iter().filter(|(k, _)| k != v).cloned().collect()
}

/// An ordered collection of closed, reusable program clauses.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub clauses: Vec<DFormula>,
}

impl Program {
    pub fn new(clauses: Vec<DFormula>) -> Self {
        Program { clauses }
    }

    pub fn push(&mut self, clause: DFormula) {
        self.clauses.push(clause);
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

impl FromIterator<DFormula> for Program {
    fn from_iter<I: IntoIterator<Item = DFormula>>(iter: I) -> Self {
        Program::new(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ClauseError {
    #[error("malformed clause: head must be an atom or compound term, found `{0}`")]
    MalformedClause(String),
}

/// Anything that has free variables and accepts substitutions.
pub trait Formula: Sized {
    #[doc(hidden)]
    fn collect_free(&self, out: &mut Vec<Var>);
    #[doc(hidden)]
    fn apply_resolved(&self, s: &Substitution) -> Self;
}

impl Formula for Term {
    fn collect_free(&self, out: &mut Vec<Var>) {
        self.collect_vars(&[], out)
    }

    fn apply_resolved(&self, s: &Substitution) -> Self {
        s.resolve(self)
    }
}

impl Formula for GFormula {
    fn collect_free(&self, out: &mut Vec<Var>) {
        self.collect_vars(&mut Vec::new(), out)
    }

    fn apply_resolved(&self, s: &Substitution) -> Self {
        match self {
            GFormula::Atom(t) => GFormula::Atom(s.resolve(t)),
            GFormula::And(l, r) => GFormula::and(l.apply_resolved(s), r.apply_resolved(s)),
            GFormula::Imp(d, g) => GFormula::imp(d.apply_resolved(s), g.apply_resolved(s)),
            GFormula::Exists(v, g) => GFormula::exists(v.clone(), g.apply_resolved(&s.without(v))),
        }
    }
}

impl Formula for DFormula {
    fn collect_free(&self, out: &mut Vec<Var>) {
        self.collect_vars(&mut Vec::new(), out)
    }

    fn apply_resolved(&self, s: &Substitution) -> Self {
        match self {
            DFormula::Atom(t) => DFormula::Atom(s.resolve(t)),
            DFormula::Imp(g, d) => DFormula::imp(g.apply_resolved(s), d.apply_resolved(s)),
            DFormula::All(v, d) => DFormula::all(v.clone(), d.apply_resolved(&s.without(v))),
            DFormula::Choice(l, r) => DFormula::choice(l.apply_resolved(s), r.apply_resolved(s)),
            DFormula::And(l, r) => DFormula::and(l.apply_resolved(s), r.apply_resolved(s)),
            DFormula::ModRef(_) => self.clone(),
        }
    }
}

/// Variables not bound by an enclosing `all`/`exists`, in first-occurrence order.
pub fn free_vars<F: Formula>(expr: &F) -> Vec<Var> {
    let mut out = Vec::new();
    expr.collect_free(&mut out);
    out
}

/// Replaces every bound variable by its binding, to a fixpoint.
pub fn apply_subst<F: Formula>(expr: &F, s: &Substitution) -> F {
    expr.apply_resolved(s)
}

/// Turns `head :- body` into its universal closure `all x.. (body => head)`.
/// Binders appear in first-occurrence order, head before body.
pub fn desugar_clause(head: Term, body: Option<GFormula>) -> Result<DFormula, ClauseError> {
    if !head.is_atom_term() {
        return Err(ClauseError::MalformedClause(
            crate::printer::term_to_string(&head),
        ));
    }
    let mut vars = Vec::new();
    head.collect_vars(&[], &mut vars);
    if let Some(body) = &body {
        body.collect_vars(&mut Vec::new(), &mut vars);
    }
    let core = match body {
        Some(body) => DFormula::imp(body, DFormula::Atom(head)),
        None => DFormula::Atom(head),
    };
    Ok(vars
        .into_iter()
        .rev()
        .fold(core, |acc, v| DFormula::all(v, acc)))
}

/// Mints variables with strictly increasing stamps.
#[derive(Debug, Clone)]
pub struct FreshSource {
    next: u32,
}

impl Default for FreshSource {
    fn default() -> Self {
        FreshSource { next: 1 }
    }
}

impl FreshSource {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, like: &Var) -> Var {
        let stamp = self.next;
        self.next += 1;
        Var {
            name: like.name.clone(),
            stamp,
        }
    }

    /// Number of variables minted so far.
    pub fn issued(&self) -> u32 {
        self.next - 1
    }
}

/// Instantiates the binders of `d` that are reachable without entering a
/// goal (clause body) with fresh variables.
pub fn rename_fresh(d: &DFormula, fresh: &mut FreshSource) -> DFormula {
    let mut map = Vec::new();
    consume_binders(d, &mut map, fresh)
}

fn consume_binders(d: &DFormula, map: &mut Vec<(Var, Term)>, fresh: &mut FreshSource) -> DFormula {
    match d {
        DFormula::All(v, body) => {
            let nv = fresh.fresh(v);
            map.push((v.clone(), Term::Var(nv)));
            let out = consume_binders(body, map, fresh);
            map.pop();
            out
        }
        DFormula::Imp(g, head) => {
            let g = g.rename(map);
            DFormula::imp(g, consume_binders(head, map, fresh))
        }
        DFormula::Choice(l, r) => DFormula::choice(
            consume_binders(l, map, fresh),
            consume_binders(r, map, fresh),
        ),
        DFormula::And(l, r) => DFormula::and(
            consume_binders(l, map, fresh),
            consume_binders(r, map, fresh),
        ),
        DFormula::Atom(_) | DFormula::ModRef(_) => d.rename(map),
    }
}

/// Replaces the free variables of `g` with fresh ones, returning the mapping.
pub(crate) fn freshen_goal(g: &GFormula, fresh: &mut FreshSource) -> (GFormula, Vec<(Var, Var)>) {
    let vars = free_vars(g);
    let pairs: Vec<(Var, Var)> = vars.iter().map(|v| (v.clone(), fresh.fresh(v))).collect();
    let map: Vec<(Var, Term)> = pairs
        .iter()
        .map(|(v, n)| (v.clone(), Term::Var(n.clone())))
        .collect();
    (g.rename(&map), pairs)
}

/// `[t/x]g` for a single binder.
pub(crate) fn instantiate_goal(g: &GFormula, v: &Var, t: Term) -> GFormula {
    g.rename(&[(v.clone(), t)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_goal, parse_term};

    fn t(src: &str) -> Term {
        parse_term(src).unwrap()
    }

    #[test]
    fn list_sugar_is_cons_nil() {
        let expected = Term::cons(Term::int(1), Term::cons(Term::int(2), Term::nil()));
        assert_eq!(Term::int_list(&[1, 2]), expected);
        assert_eq!(t("[1,2]"), expected);
    }

    #[test]
    fn compound_without_args_is_constant() {
        assert_eq!(Term::compound("p", vec![]), Term::constant("p"));
    }

    #[test]
    fn free_vars_first_occurrence_order() {
        assert_eq!(
            free_vars(&t("p(X, f(Y), X)")),
            vec![Var::named("X"), Var::named("Y")]
        );
        let closed = DFormula::all(Var::named("X"), DFormula::atom(t("p(X)")));
        assert!(free_vars(&closed).is_empty());
        let g = GFormula::exists(Var::named("X"), GFormula::atom(t("p(X,Y)")));
        assert_eq!(free_vars(&g), vec![Var::named("Y")]);
    }

    #[test]
    fn desugar_ground_fact() {
        assert_eq!(
            desugar_clause(Term::constant("p"), None).unwrap(),
            DFormula::atom(Term::constant("p"))
        );
    }

    #[test]
    fn desugar_single_variable() {
        assert_eq!(
            desugar_clause(t("q(X)"), None).unwrap(),
            DFormula::all(Var::named("X"), DFormula::atom(t("q(X)")))
        );
    }

    #[test]
    fn desugar_append_rule_closes_in_order() {
        let head = t("append([X|L1],L2,[X|L3])");
        let body = parse_goal("append(L1,L2,L3)").unwrap();
        let got = desugar_clause(head.clone(), Some(body.clone())).unwrap();
        let core = DFormula::imp(body, DFormula::atom(head));
        let expected = ["X", "L1", "L2", "L3"]
            .iter()
            .rev()
            .fold(core, |acc, n| DFormula::all(Var::named(n), acc));
        assert_eq!(got, expected);
        assert!(got.is_closed());
    }

    #[test]
    fn desugar_rejects_var_and_int_heads() {
        assert!(desugar_clause(Term::var("X"), None).is_err());
        assert!(desugar_clause(Term::int(3), None).is_err());
    }

    #[test]
    fn rename_fresh_single_binder() {
        let mut fresh = FreshSource::new();
        let d = DFormula::all(Var::named("X"), DFormula::atom(t("p(X)")));
        let DFormula::Atom(Term::Compound(_, args)) = rename_fresh(&d, &mut fresh) else {
            panic!("binder not consumed");
        };
        match &args[0] {
            Term::Var(v) => assert!(v.is_fresh()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rename_fresh_identity_without_binders() {
        let mut fresh = FreshSource::new();
        let d = DFormula::atom(t("p(c)"));
        assert_eq!(rename_fresh(&d, &mut fresh), d);
        assert_eq!(fresh.issued(), 0);
    }

    #[test]
    fn rename_fresh_distinct_binders() {
        let mut fresh = FreshSource::new();
        let body = parse_goal("g(X,Y)").unwrap();
        let d = DFormula::all(
            Var::named("X"),
            DFormula::all(
                Var::named("Y"),
                DFormula::imp(body, DFormula::atom(t("h(X,Y)"))),
            ),
        );
        let r = rename_fresh(&d, &mut fresh);
        let fv = free_vars(&r);
        assert_eq!(fv.len(), 2);
        assert!(fv.iter().all(Var::is_fresh));
        assert_ne!(fv[0], fv[1]);
        // Repeated calls never reuse a stamp.
        let again = free_vars(&rename_fresh(&d, &mut fresh));
        assert!(again.iter().all(|v| !fv.contains(v)));
    }

    #[test]
    fn rename_respects_exists_shadowing() {
        let g = parse_goal("p(X), exists X. q(X)").unwrap();
        let renamed = g.rename(&[(Var::named("X"), Term::constant("a"))]);
        assert_eq!(renamed, parse_goal("p(a), exists X. q(X)").unwrap());
    }
}
