//! Abstract syntax for the supported ASP fragment.
//!
//! The `Display` impls print Clingo-compatible text that the parser reads back
//! into an equal AST (source spans excluded from equality).

use std::fmt;

/// Position in the source text, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    /// Lowercase identifier such as `left` or `o1`.
    Constant(String),
    /// Double-quoted string constant, stored without the quotes.
    Quoted(String),
    Integer(i64),
    Variable(String),
    /// The `_` don't-care variable; every occurrence is distinct.
    Anonymous,
    Arith {
        op: ArithOp,
        lhs: Box<Term>,
        rhs: Box<Term>,
    },
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Constant(name.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::Variable(name.into())
    }

    pub fn arith(op: ArithOp, lhs: Term, rhs: Term) -> Self {
        Term::Arith {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    /// Named variables occurring anywhere in the term, in order of appearance.
    pub fn variables<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Variable(v) => out.push(v),
            Term::Arith { lhs, rhs, .. } => {
                lhs.variables(out);
                rhs.variables(out);
            }
            _ => {}
        }
    }

    pub fn has_anonymous(&self) -> bool {
        match self {
            Term::Anonymous => true,
            Term::Arith { lhs, rhs, .. } => lhs.has_anonymous() || rhs.has_anonymous(),
            _ => false,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Variable(_) | Term::Anonymous => false,
            Term::Arith { lhs, rhs, .. } => lhs.is_ground() && rhs.is_ground(),
            _ => true,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(c) => f.write_str(c),
            Term::Quoted(s) => write!(f, "\"{}\"", escape(s)),
            Term::Integer(i) => write!(f, "{i}"),
            Term::Variable(v) => f.write_str(v),
            Term::Anonymous => f.write_str("_"),
            Term::Arith { op, lhs, rhs } => {
                // left-associative: only the right operand needs grouping
                match rhs.as_ref() {
                    Term::Arith { .. } => write!(f, "{lhs}{}({rhs})", op.symbol()),
                    Term::Integer(i) if *i < 0 => write!(f, "{lhs}{}({rhs})", op.symbol()),
                    _ => write!(f, "{lhs}{}{rhs}", op.symbol()),
                }
            }
        }
    }
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn variables<'a>(&'a self, out: &mut Vec<&'a str>) {
        for t in &self.args {
            t.variables(out);
        }
    }

    /// Variables that appear directly as arguments, which are the ones a
    /// positive occurrence can bind.
    pub fn binding_variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Variable(v) => Some(v.as_str()),
            _ => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Comparison {
    pub lhs: Term,
    pub op: CompareOp,
    pub rhs: Term,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.lhs, self.op.symbol(), self.rhs)
    }
}

/// A literal allowed on either side of a `:` condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Positive(Atom),
    /// Negation as failure, `not a`.
    Naf(Atom),
    Comparison(Comparison),
}

impl Literal {
    pub fn variables<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Literal::Positive(a) | Literal::Naf(a) => a.variables(out),
            Literal::Comparison(c) => {
                c.lhs.variables(out);
                c.rhs.variables(out);
            }
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Positive(a) => write!(f, "{a}"),
            Literal::Naf(a) => write!(f, "not {a}"),
            Literal::Comparison(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BodyElement {
    Literal(Literal),
    /// `literal : cond1, cond2`; holds when `literal` holds for every
    /// instantiation of the local variables that satisfies the conditions.
    Conditional {
        literal: Literal,
        conditions: Vec<Literal>,
    },
}

impl BodyElement {
    pub fn positive(atom: Atom) -> Self {
        BodyElement::Literal(Literal::Positive(atom))
    }

    pub fn naf(atom: Atom) -> Self {
        BodyElement::Literal(Literal::Naf(atom))
    }

    pub fn compare(lhs: Term, op: CompareOp, rhs: Term) -> Self {
        BodyElement::Literal(Literal::Comparison(Comparison { lhs, op, rhs }))
    }
}

impl fmt::Display for BodyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyElement::Literal(l) => write!(f, "{l}"),
            BodyElement::Conditional {
                literal,
                conditions,
            } => {
                write!(f, "{literal}")?;
                // `:-` would lex as a rule separator
                let first = conditions
                    .first()
                    .map(|c| c.to_string())
                    .unwrap_or_default();
                f.write_str(if first.starts_with('-') { ": " } else { ":" })?;
                for (i, c) in conditions.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Rule {
    /// `None` for an integrity constraint.
    pub head: Option<Atom>,
    pub body: Vec<BodyElement>,
    pub span: Span,
}

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.head == other.head && self.body == other.body
    }
}

impl Eq for Rule {}

impl Rule {
    pub fn fact(atom: Atom) -> Self {
        Rule {
            head: Some(atom),
            body: Vec::new(),
            span: Span::default(),
        }
    }

    pub fn new(head: Option<Atom>, body: Vec<BodyElement>) -> Self {
        Rule {
            head,
            body,
            span: Span::default(),
        }
    }

    pub fn is_fact(&self) -> bool {
        self.head.is_some() && self.body.is_empty()
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(h) = &self.head {
            write!(f, "{h}")?;
            if self.body.is_empty() {
                return f.write_str(".");
            }
            f.write_str(" ")?;
        }
        f.write_str(":- ")?;
        // once a conditional appears, later elements must be split off with `;`
        let mut after_conditional = false;
        for (i, e) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(if after_conditional { "; " } else { ", " })?;
            }
            write!(f, "{e}")?;
            if matches!(e, BodyElement::Conditional { .. }) {
                after_conditional = true;
            }
        }
        f.write_str(".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        Program { rules }
    }

    /// Appends the rules of `other`, keeping their original spans.
    pub fn extend(&mut self, other: Program) {
        self.rules.extend(other.rules);
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
