use std::collections::HashSet;

use super::ast::*;
use super::error::AspError;

/// Checks that every variable of every rule is bound by a positive atom.
///
/// Direct variable arguments of positive, non-conditional body atoms bind;
/// `V = expr` binds `V` once `expr` is bound. Inside a conditional, the
/// positive condition atoms additionally bind for that element only. The
/// don't-care variable `_` may appear in positive and negated atoms, where it
/// is projected away, but not in heads or comparisons.
pub fn check_safety(program: &Program) -> Result<(), AspError> {
    program.rules.iter().try_for_each(check_rule)
}

pub fn check_rule(rule: &Rule) -> Result<(), AspError> {
    let unsafe_var = |v: &str| AspError::UnsafeVariable {
        variable: v.to_string(),
        rule: rule.to_string(),
        span: rule.span,
    };

    let plain: Vec<&Literal> = rule
        .body
        .iter()
        .filter_map(|e| match e {
            BodyElement::Literal(l) => Some(l),
            BodyElement::Conditional { .. } => None,
        })
        .collect();
    let bound = bound_by(&plain, &HashSet::new());

    if let Some(h) = &rule.head {
        if h.args.iter().any(Term::has_anonymous) {
            return Err(unsafe_var("_"));
        }
        first_unbound_in_atom(h, &bound).map_or(Ok(()), |v| Err(unsafe_var(v)))?;
    }

    for e in &rule.body {
        match e {
            BodyElement::Literal(l) => {
                check_literal(l, &bound, false).map_or(Ok(()), |v| Err(unsafe_var(v)))?
            }
            BodyElement::Conditional {
                literal,
                conditions,
            } => {
                let conds: Vec<&Literal> = conditions.iter().collect();
                let local = bound_by(&conds, &bound);
                for c in conditions {
                    check_literal(c, &local, false).map_or(Ok(()), |v| Err(unsafe_var(v)))?;
                }
                let positive_head = matches!(literal, Literal::Positive(_));
                check_literal(literal, &local, positive_head)
                    .map_or(Ok(()), |v| Err(unsafe_var(v)))?;
            }
        }
    }
    Ok(())
}

/// Variables bound by `lits` on top of `outer`.
fn bound_by<'a>(lits: &[&'a Literal], outer: &HashSet<&'a str>) -> HashSet<&'a str> {
    let mut bound = outer.clone();
    for l in lits {
        if let Literal::Positive(a) = l {
            bound.extend(a.binding_variables());
        }
    }
    // assignments can chain, so iterate to a fixpoint
    loop {
        let before = bound.len();
        for l in lits {
            if let Literal::Comparison(c) = l {
                if c.op != CompareOp::Eq {
                    continue;
                }
                for (target, source) in [(&c.lhs, &c.rhs), (&c.rhs, &c.lhs)] {
                    if let Term::Variable(v) = target {
                        if !source.has_anonymous() && all_bound(source, &bound) {
                            bound.insert(v.as_str());
                        }
                    }
                }
            }
        }
        if bound.len() == before {
            return bound;
        }
    }
}

fn all_bound(t: &Term, bound: &HashSet<&str>) -> bool {
    let mut vs = Vec::new();
    t.variables(&mut vs);
    vs.iter().all(|v| bound.contains(v))
}

fn first_unbound_in_atom<'a>(a: &'a Atom, bound: &HashSet<&str>) -> Option<&'a str> {
    let mut vs = Vec::new();
    a.variables(&mut vs);
    vs.into_iter().find(|v| !bound.contains(v))
}

/// Returns the first offending variable of a literal, if any.
fn check_literal<'a>(
    l: &'a Literal,
    bound: &HashSet<&str>,
    positive_conditional_head: bool,
) -> Option<&'a str> {
    match l {
        Literal::Positive(a) => {
            if positive_conditional_head && a.args.iter().any(Term::has_anonymous) {
                return Some("_");
            }
            if positive_conditional_head {
                return first_unbound_in_atom(a, bound);
            }
            // only arithmetic arguments need their variables bound elsewhere
            let mut vs = Vec::new();
            for t in &a.args {
                if let Term::Arith { .. } = t {
                    t.variables(&mut vs);
                }
            }
            vs.into_iter().find(|v| !bound.contains(v))
        }
        Literal::Naf(a) => first_unbound_in_atom(a, bound),
        Literal::Comparison(c) => {
            if c.lhs.has_anonymous() || c.rhs.has_anonymous() {
                return Some("_");
            }
            let mut vs = Vec::new();
            c.lhs.variables(&mut vs);
            c.rhs.variables(&mut vs);
            vs.into_iter().find(|v| !bound.contains(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asp::parse_program;

    fn check(text: &str) -> Result<(), AspError> {
        check_safety(&parse_program(text).unwrap())
    }

    fn unsafe_name(text: &str) -> String {
        match check(text) {
            Err(AspError::UnsafeVariable { variable, .. }) => variable,
            other => panic!("expected unsafe variable, got {other:?}"),
        }
    }

    #[test]
    fn bound_head_is_safe() {
        assert!(check("p(X) :- q(X).").is_ok());
    }

    #[test]
    fn unbound_head_variable() {
        assert_eq!(unsafe_name("p(X) :- q(Y)."), "X");
    }

    #[test]
    fn negation_does_not_bind() {
        // gringo reports the same rule as unsafe
        assert_eq!(unsafe_name("p(X) :- not q(X)."), "X");
    }

    #[test]
    fn message_carries_rule_text() {
        let e = check("p(X) :- q(Y).").unwrap_err();
        assert_eq!(
            e.to_string(),
            "UNSAFE: unsafe variable 'X' in rule 'p(X) :- q(Y).' @ 1:1"
        );
    }

    #[test]
    fn comparisons_need_bound_variables() {
        assert_eq!(unsafe_name("p(X) :- q(X), Y < X."), "Y");
        assert!(check("p(X) :- q(X), X < 3.").is_ok());
    }

    #[test]
    fn assignment_binds() {
        assert!(check("p(Y) :- q(X), Y = X + 1.").is_ok());
        assert!(check("p(Z) :- q(X), Z = Y + 1, Y = X.").is_ok());
        assert_eq!(unsafe_name("p(Y) :- q(X), Y < X + 1."), "Y");
    }

    #[test]
    fn arithmetic_arguments_do_not_bind() {
        assert_eq!(unsafe_name("p(X) :- q(X+1)."), "X");
        assert!(check("at(O,X+1,Y) :- at(O,X,Y), shift(O).").is_ok());
    }

    #[test]
    fn anonymous_rules() {
        assert!(check("p(X) :- q(X,_), not r(_,X).").is_ok());
        assert_eq!(unsafe_name("p(_) :- q(a)."), "_");
        assert_eq!(unsafe_name("p(a) :- q(X), X != _."), "_");
    }

    #[test]
    fn conditional_binds_locally() {
        let text = "query(Block):- block(Block), not object(_, _, black, _, OtherBlock): block(OtherBlock), OtherBlock != Block.";
        assert!(check(text).is_ok());
        // local variables do not leak to the head
        assert_eq!(unsafe_name("p(O) :- b(B), not o(O) : b(O)."), "O");
        assert_eq!(unsafe_name("p(B) :- b(B), not o(O) : c(B)."), "O");
    }

    #[test]
    fn constraints_are_checked() {
        assert_eq!(unsafe_name(":- not q(X)."), "X");
        assert!(check(":- q(X), not r(X).").is_ok());
    }
}
