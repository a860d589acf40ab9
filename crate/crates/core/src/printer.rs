//! Concrete-syntax printing. Output reparses to the same structure, up to
//! fresh-variable names (stamped variables print as `_G<stamp>`).

use std::fmt::{self, Display, Formatter, Write};

use crate::ast::{DFormula, GFormula, Term, Var};
use crate::parser::ModuleFile;

pub fn print_formula<F: Display + ?Sized>(f: &F) -> String {
    f.to_string()
}

pub(crate) fn term_to_string(t: &Term) -> String {
    t.to_string()
}

impl Display for Var {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.stamp == 0 {
            f.write_str(&self.name)
        } else {
            write!(f, "_G{}", self.stamp)
        }
    }
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => v.fmt(f),
            Term::Int(i) => write!(f, "{i}"),
            Term::Const(_) if self.is_nil() => f.write_str("[]"),
            Term::Const(c) => f.write_str(c),
            Term::Compound(..) if self.as_list().is_some() => {
                let (items, tail) = self.as_list().expect("checked");
                f.write_char('[')?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_char(',')?;
                    }
                    item.fmt(f)?;
                }
                if !tail.is_nil() {
                    write!(f, "|{tail}")?;
                }
                f.write_char(']')
            }
            Term::Compound(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_char(',')?;
                    }
                    a.fmt(f)?;
                }
                f.write_char(')')
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum GLevel {
    /// Anything goes.
    Goal,
    /// Right operand of `,`.
    ConjRight,
    /// Left operand of `,`.
    ConjLeft,
}

fn write_goal(g: &GFormula, level: GLevel, f: &mut Formatter<'_>) -> fmt::Result {
    let needs_parens = match g {
        GFormula::Atom(_) => false,
        GFormula::And(..) => level == GLevel::ConjLeft,
        GFormula::Imp(..) | GFormula::Exists(..) => level > GLevel::Goal,
    };
    if needs_parens {
        f.write_char('(')?;
    }
    match g {
        GFormula::Atom(t) => t.fmt(f)?,
        GFormula::And(l, r) => {
            write_goal(l, GLevel::ConjLeft, f)?;
            f.write_str(", ")?;
            write_goal(r, GLevel::ConjRight, f)?;
        }
        GFormula::Imp(d, g) => {
            write_antecedent(d, false, f)?;
            f.write_str(" => ")?;
            write_goal(g, GLevel::Goal, f)?;
        }
        GFormula::Exists(v, g) => {
            write!(f, "exists {v}. ")?;
            write_goal(g, GLevel::Goal, f)?;
        }
    }
    if needs_parens {
        f.write_char(')')?;
    }
    Ok(())
}

fn strip_binders(d: &DFormula) -> &DFormula {
    let mut d = d;
    while let DFormula::All(_, body) = d {
        d = body;
    }
    d
}

fn write_antecedent(d: &DFormula, parens: bool, f: &mut Formatter<'_>) -> fmt::Result {
    let d = strip_binders(d);
    if parens {
        f.write_char('(')?;
    }
    match d {
        DFormula::And(l, r) => {
            let l_parens = matches!(strip_binders(l), DFormula::And(..) | DFormula::Imp(..));
            write_antecedent(l, l_parens, f)?;
            f.write_str(", ")?;
            write_antecedent(r, false, f)?;
        }
        DFormula::Choice(l, r) => {
            let l_parens = matches!(strip_binders(l), DFormula::And(..) | DFormula::Choice(..));
            let r_parens = matches!(strip_binders(r), DFormula::And(..));
            write_antecedent(l, l_parens, f)?;
            f.write_str(" & ")?;
            write_antecedent(r, r_parens, f)?;
        }
        DFormula::Imp(body, head) => {
            let h_parens = !matches!(strip_binders(head), DFormula::Atom(_));
            write_antecedent(head, h_parens, f)?;
            f.write_str(" :- ")?;
            write_goal(body, GLevel::ConjRight, f)?;
        }
        DFormula::Atom(t) => t.fmt(f)?,
        DFormula::ModRef(m) => write!(f, "mod({m})")?,
        DFormula::All(..) => unreachable!("binders stripped"),
    }
    if parens {
        f.write_char(')')?;
    }
    Ok(())
}

/// Statement syntax: binders are implicit, choices are `&`-separated.
fn write_clause(d: &DFormula, f: &mut Formatter<'_>) -> fmt::Result {
    match strip_binders(d) {
        DFormula::Choice(l, r) => {
            write_clause(l, f)?;
            f.write_str(" & ")?;
            write_clause(r, f)
        }
        DFormula::And(l, r) => {
            f.write_char('(')?;
            write_clause(l, f)?;
            f.write_str(", ")?;
            write_clause(r, f)?;
            f.write_char(')')
        }
        DFormula::Imp(body, head) => {
            write_clause(head, f)?;
            f.write_str(" :- ")?;
            write_goal(body, GLevel::Goal, f)
        }
        DFormula::Atom(t) => t.fmt(f),
        DFormula::ModRef(m) => write!(f, "mod({m})"),
        DFormula::All(..) => unreachable!("binders stripped"),
    }
}

impl Display for GFormula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_goal(self, GLevel::Goal, f)
    }
}

impl Display for DFormula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_clause(self, f)
    }
}

impl Display for ModuleFile {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if let Some(name) = &self.name {
            writeln!(f, "mod({name}).")?;
        }
        for c in &self.clauses {
            writeln!(f, "{c}.")?;
        }
        Ok(())
    }
}

/// Compact one-line rendering of a formula's head, for trace output.
pub(crate) fn d_summary(d: &DFormula) -> String {
    match strip_binders(d) {
        DFormula::Atom(t) => t.to_string(),
        DFormula::ModRef(m) => format!("mod({m})"),
        DFormula::Imp(_, head) => format!("{} :- ..", d_summary(head)),
        DFormula::Choice(l, r) => format!("{} & {}", d_summary(l), d_summary(r)),
        DFormula::And(l, _) => format!("{}, ..", d_summary(l)),
        DFormula::All(..) => unreachable!("binders stripped"),
    }
}

pub(crate) fn g_summary(g: &GFormula) -> String {
    match g {
        GFormula::Atom(t) => t.to_string(),
        GFormula::And(l, _) => format!("{}, ..", g_summary(l)),
        GFormula::Imp(d, _) => format!("{} => ..", d_summary(d)),
        GFormula::Exists(v, _) => format!("exists {v}. .."),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_goal, parse_program, parse_term};

    #[test]
    fn prints_atoms_and_lists() {
        assert_eq!(
            print_formula(&DFormula::atom(parse_term("p(c)").unwrap())),
            "p(c)"
        );
        assert_eq!(print_formula(&Term::int_list(&[1, 2])), "[1,2]");
        assert_eq!(print_formula(&parse_term("[a|T]").unwrap()), "[a|T]");
        assert_eq!(print_formula(&Term::nil()), "[]");
    }

    #[test]
    fn prints_choice_of_modules() {
        let d = DFormula::choice(DFormula::modref("a"), DFormula::modref("b"));
        assert_eq!(print_formula(&d), "mod(a) & mod(b)");
    }

    #[test]
    fn fresh_variables_print_with_stamp() {
        let v = Var {
            name: "X".into(),
            stamp: 7,
        };
        assert_eq!(Term::Var(v).to_string(), "_G7");
    }

    #[test]
    fn goal_round_trips() {
        for src in [
            "p, q, r",
            "(p, q), r",
            "mod(m) => p(X), q(X)",
            "(a => b), c",
            "a & b => c",
            "(h :- b, c) => h",
            "p, q => r",
            "exists X. p(X), q",
            "(exists X. p(X)), q",
            "p => q => r",
        ] {
            let g = parse_goal(src).unwrap();
            let printed = g.to_string();
            assert_eq!(
                parse_goal(&printed).unwrap(),
                g,
                "{src} printed as {printed}"
            );
        }
    }

    #[test]
    fn program_round_trips() {
        let src = "mod(m).\n\
                   p(X) & q(X) :- r(X), mod(n) => s(X).\n\
                   t([1,2|T]) :- u(T).\n\
                   mod(a) & mod(b).";
        let m = parse_program(src).unwrap();
        assert_eq!(parse_program(&m.to_string()).unwrap(), m);
    }
}
