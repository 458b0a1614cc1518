//! Instantiation of safe programs into variable-free rules.
//!
//! Positive body atoms are matched against the atoms that could possibly be
//! derived, computed as a fixpoint that treats negated and conditional
//! elements as satisfied. This yields the same ground program as naive
//! substitution over the Herbrand universe restricted to rules whose positive
//! bodies can hold. Integers are limited to `[-domain_bound, domain_bound]`
//! plus integer literals written in the program; arithmetic results outside
//! that range drop the instantiation, which keeps recursive arithmetic finite.

use std::collections::{HashMap, HashSet};
use std::fmt;

use indexmap::IndexSet;

use super::ast::*;
use super::error::AspError;

pub const DEFAULT_DOMAIN_BOUND: i64 = 100;
pub const DEFAULT_GROUND_CEILING: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundOptions {
    pub domain_bound: i64,
    /// Maximum rule instantiations enumerated in one grounding pass.
    pub ceiling: u64,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            domain_bound: DEFAULT_DOMAIN_BOUND,
            ceiling: DEFAULT_GROUND_CEILING,
        }
    }
}

/// A ground term. Ordering puts integers before symbols before strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Sym(String),
    Str(String),
}

impl Value {
    pub fn sym(s: impl Into<String>) -> Self {
        Value::Sym(s.into())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    /// Text of the value without quoting, as used for answer labels.
    pub fn text(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Sym(s) | Value::Str(s) => s.clone(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => f.write_str(s),
            Value::Str(s) => write!(f, "\"{}\"", escape(s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredKey {
    pub name: String,
    pub arity: usize,
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<Value>,
}

impl GroundAtom {
    pub fn new(predicate: impl Into<String>, args: Vec<Value>) -> Self {
        GroundAtom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn key(&self) -> PredKey {
        PredKey {
            name: self.predicate.clone(),
            arity: self.args.len(),
        }
    }
}

impl fmt::Display for GroundAtom {
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

/// An atom with `None` in projected (`_`) positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomPattern {
    pub predicate: String,
    pub args: Vec<Option<Value>>,
}

impl AtomPattern {
    pub fn key(&self) -> PredKey {
        PredKey {
            name: self.predicate.clone(),
            arity: self.args.len(),
        }
    }

    pub fn matches(&self, atom: &GroundAtom) -> bool {
        atom.predicate == self.predicate
            && atom.args.len() == self.args.len()
            && self
                .args
                .iter()
                .zip(&atom.args)
                .all(|(p, v)| p.as_ref().is_none_or(|p| p == v))
    }
}

impl fmt::Display for AtomPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                match a {
                    Some(v) => write!(f, "{v}")?,
                    None => f.write_str("_")?,
                }
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroundLiteral {
    Pos(GroundAtom),
    /// True when no atom of the model matches the pattern.
    Neg(AtomPattern),
}

impl fmt::Display for GroundLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundLiteral::Pos(a) => write!(f, "{a}"),
            GroundLiteral::Neg(p) => write!(f, "not {p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroundElement {
    Literal(GroundLiteral),
    /// One instance of an expanded conditional: if all conditions hold then
    /// the literal must hold.
    Implication {
        conditions: Vec<GroundLiteral>,
        literal: GroundLiteral,
    },
}

impl fmt::Display for GroundElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundElement::Literal(l) => write!(f, "{l}"),
            GroundElement::Implication {
                conditions,
                literal,
            } => {
                write!(f, "{literal}:")?;
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

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundRule {
    pub head: Option<GroundAtom>,
    pub body: Vec<GroundElement>,
    /// Index of the source rule in [`GroundProgram::sources`].
    pub origin: usize,
}

impl fmt::Display for GroundRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(h) = &self.head {
            write!(f, "{h}")?;
            if self.body.is_empty() {
                return f.write_str(".");
            }
            f.write_str(" ")?;
        }
        f.write_str(":- ")?;
        let mut after_conditional = false;
        for (i, e) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(if after_conditional { "; " } else { ", " })?;
            }
            write!(f, "{e}")?;
            after_conditional |= matches!(e, GroundElement::Implication { .. });
        }
        f.write_str(".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSource {
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, Default)]
pub struct GroundProgram {
    pub rules: Vec<GroundRule>,
    pub sources: Vec<RuleSource>,
}

impl GroundProgram {
    pub fn source_of(&self, rule: &GroundRule) -> &RuleSource {
        &self.sources[rule.origin]
    }

    /// Number of ground rules that came from source rule `origin`.
    pub fn count_from(&self, origin: usize) -> usize {
        self.rules.iter().filter(|r| r.origin == origin).count()
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Atoms indexed by predicate and by argument value.
#[derive(Default)]
struct AtomIndex {
    atoms: HashMap<PredKey, Vec<GroundAtom>>,
    present: HashSet<GroundAtom>,
    by_arg: HashMap<(PredKey, usize, Value), Vec<usize>>,
}

impl AtomIndex {
    fn insert(&mut self, atom: GroundAtom) -> bool {
        if self.present.contains(&atom) {
            return false;
        }
        let key = atom.key();
        let list = self.atoms.entry(key.clone()).or_default();
        let idx = list.len();
        for (pos, v) in atom.args.iter().enumerate() {
            self.by_arg
                .entry((key.clone(), pos, v.clone()))
                .or_default()
                .push(idx);
        }
        list.push(atom.clone());
        self.present.insert(atom);
        true
    }

    fn contains(&self, atom: &GroundAtom) -> bool {
        self.present.contains(atom)
    }

    /// Atoms of `key` agreeing with every `(position, value)` in `fixed`.
    fn candidates<'a>(
        &'a self,
        key: &PredKey,
        fixed: &[(usize, Value)],
    ) -> Box<dyn Iterator<Item = &'a GroundAtom> + 'a> {
        let Some(all) = self.atoms.get(key) else {
            return Box::new(std::iter::empty());
        };
        let mut best: Option<&Vec<usize>> = None;
        for (pos, v) in fixed {
            match self.by_arg.get(&(key.clone(), *pos, v.clone())) {
                None => return Box::new(std::iter::empty()),
                Some(b) => {
                    if best.is_none_or(|cur| b.len() < cur.len()) {
                        best = Some(b);
                    }
                }
            }
        }
        match best {
            Some(bucket) => Box::new(bucket.iter().map(move |&i| &all[i])),
            None => Box::new(all.iter()),
        }
    }
}

type Subst = Vec<(String, Value)>;

fn lookup<'a>(s: &'a Subst, v: &str) -> Option<&'a Value> {
    s.iter().rev().find(|(n, _)| n == v).map(|(_, val)| val)
}

struct Universe {
    bound: i64,
    literals: HashSet<i64>,
}

impl Universe {
    fn contains(&self, n: i64) -> bool {
        n.abs() <= self.bound || self.literals.contains(&n)
    }
}

#[derive(Debug)]
enum Eval {
    Value(Value),
    /// A variable is not yet bound.
    Unbound,
    /// Arithmetic on non-integers, overflow, or a result outside the universe.
    Undefined,
}

fn eval(t: &Term, s: &Subst, u: &Universe) -> Eval {
    match t {
        Term::Constant(c) => Eval::Value(Value::Sym(c.clone())),
        Term::Quoted(q) => Eval::Value(Value::Str(q.clone())),
        Term::Integer(i) => Eval::Value(Value::Int(*i)),
        Term::Variable(v) => lookup(s, v).map_or(Eval::Unbound, |x| Eval::Value(x.clone())),
        Term::Anonymous => Eval::Unbound,
        Term::Arith { op, lhs, rhs } => {
            let (l, r) = match (eval(lhs, s, u), eval(rhs, s, u)) {
                (Eval::Value(l), Eval::Value(r)) => (l, r),
                (Eval::Unbound, _) | (_, Eval::Unbound) => return Eval::Unbound,
                _ => return Eval::Undefined,
            };
            let (Some(l), Some(r)) = (l.as_int(), r.as_int()) else {
                return Eval::Undefined;
            };
            let out = match op {
                ArithOp::Add => l.checked_add(r),
                ArithOp::Sub => l.checked_sub(r),
            };
            match out {
                Some(n) if u.contains(n) => Eval::Value(Value::Int(n)),
                _ => Eval::Undefined,
            }
        }
    }
}

fn compare(op: CompareOp, l: &Value, r: &Value) -> bool {
    match op {
        CompareOp::Eq => l == r,
        CompareOp::Ne => l != r,
        CompareOp::Lt => l < r,
        CompareOp::Le => l <= r,
        CompareOp::Gt => l > r,
        CompareOp::Ge => l >= r,
    }
}

enum CmpStep {
    Pass,
    Fail,
    Bind(String, Value),
    Pending,
}

fn step_comparison(c: &Comparison, s: &Subst, u: &Universe) -> CmpStep {
    let l = eval(&c.lhs, s, u);
    let r = eval(&c.rhs, s, u);
    match (l, r) {
        (Eval::Value(l), Eval::Value(r)) => {
            if compare(c.op, &l, &r) {
                CmpStep::Pass
            } else {
                CmpStep::Fail
            }
        }
        (Eval::Undefined, _) | (_, Eval::Undefined) => CmpStep::Fail,
        (Eval::Unbound, Eval::Value(v)) if c.op == CompareOp::Eq => match &c.lhs {
            Term::Variable(name) => CmpStep::Bind(name.clone(), v),
            _ => CmpStep::Pending,
        },
        (Eval::Value(v), Eval::Unbound) if c.op == CompareOp::Eq => match &c.rhs {
            Term::Variable(name) => CmpStep::Bind(name.clone(), v),
            _ => CmpStep::Pending,
        },
        _ => CmpStep::Pending,
    }
}

/// Positive atoms to join plus comparisons to apply along the way.
struct JoinSpec<'r> {
    atoms: Vec<&'r Atom>,
    comparisons: Vec<&'r Comparison>,
}

struct JoinState<'i> {
    /// Ground atom matched by each positive atom of the spec so far.
    matched: Vec<Option<&'i GroundAtom>>,
    used_cmps: Vec<bool>,
}

impl<'i> JoinState<'i> {
    fn new(spec: &JoinSpec<'_>) -> Self {
        JoinState {
            matched: vec![None; spec.atoms.len()],
            used_cmps: vec![false; spec.comparisons.len()],
        }
    }
}

type Emit<'e, 'p> =
    dyn FnMut(&mut Grounder<'p>, &Subst, &[Option<&GroundAtom>]) -> Result<(), CeilingHit> + 'e;

struct Grounder<'p> {
    program: &'p Program,
    universe: Universe,
    ceiling: u64,
    count: u64,
}

struct CeilingHit;

impl<'p> Grounder<'p> {
    /// Enumerates every substitution extending `s` that satisfies `spec`
    /// against `index`, calling `emit` for each.
    fn join<'i>(
        &mut self,
        spec: &JoinSpec<'_>,
        index: &'i AtomIndex,
        s: &mut Subst,
        st: &mut JoinState<'i>,
        emit: &mut Emit<'_, 'p>,
    ) -> Result<(), CeilingHit> {
        // apply any comparisons that became decidable
        let mark = s.len();
        let mut applied: Vec<usize> = Vec::new();
        let mut failed = false;
        loop {
            let mut progress = false;
            for (i, c) in spec.comparisons.iter().enumerate() {
                if st.used_cmps[i] {
                    continue;
                }
                match step_comparison(c, s, &self.universe) {
                    CmpStep::Pass => {
                        st.used_cmps[i] = true;
                        applied.push(i);
                        progress = true;
                    }
                    CmpStep::Fail => {
                        failed = true;
                        break;
                    }
                    CmpStep::Bind(name, v) => {
                        s.push((name, v));
                        st.used_cmps[i] = true;
                        applied.push(i);
                        progress = true;
                    }
                    CmpStep::Pending => {}
                }
            }
            if failed || !progress {
                break;
            }
        }

        let result = if failed {
            Ok(())
        } else {
            self.join_atoms(spec, index, s, st, emit)
        };

        for i in applied {
            st.used_cmps[i] = false;
        }
        s.truncate(mark);
        result
    }

    fn join_atoms<'i>(
        &mut self,
        spec: &JoinSpec<'_>,
        index: &'i AtomIndex,
        s: &mut Subst,
        st: &mut JoinState<'i>,
        emit: &mut Emit<'_, 'p>,
    ) -> Result<(), CeilingHit> {
        // pick the remaining atom with the most fixed argument positions
        let mut choice: Option<(usize, Vec<(usize, Value)>)> = None;
        for (i, a) in spec.atoms.iter().enumerate() {
            if st.matched[i].is_some() {
                continue;
            }
            let mut fixed = Vec::new();
            let mut ready = true;
            for (pos, t) in a.args.iter().enumerate() {
                match t {
                    Term::Variable(_) | Term::Anonymous => {
                        if let Eval::Value(v) = eval(t, s, &self.universe) {
                            fixed.push((pos, v));
                        }
                    }
                    _ => match eval(t, s, &self.universe) {
                        Eval::Value(v) => fixed.push((pos, v)),
                        // an arithmetic argument with no possible value
                        Eval::Undefined => return Ok(()),
                        Eval::Unbound => ready = false,
                    },
                }
            }
            if ready && choice.as_ref().is_none_or(|(_, f)| fixed.len() > f.len()) {
                choice = Some((i, fixed));
            }
        }

        let Some((i, fixed)) = choice else {
            if st.matched.iter().all(Option::is_some) {
                if st.used_cmps.iter().all(|u| *u) {
                    self.count += 1;
                    if self.count > self.ceiling {
                        return Err(CeilingHit);
                    }
                    return emit(self, s, &st.matched);
                }
                // an undecidable comparison left over; safety rules this out
                return Ok(());
            }
            return Ok(());
        };

        let atom = spec.atoms[i];
        let key = PredKey {
            name: atom.predicate.clone(),
            arity: atom.args.len(),
        };
        let candidates: Vec<&GroundAtom> = index.candidates(&key, &fixed).collect();
        for cand in candidates {
            let mark = s.len();
            let mut ok = true;
            for (t, v) in atom.args.iter().zip(&cand.args) {
                match t {
                    Term::Anonymous => {}
                    Term::Variable(name) => match lookup(s, name) {
                        Some(b) if b != v => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => s.push((name.clone(), v.clone())),
                    },
                    other => match eval(other, s, &self.universe) {
                        Eval::Value(x) if &x == v => {}
                        _ => {
                            ok = false;
                            break;
                        }
                    },
                }
            }
            let r = if ok {
                st.matched[i] = Some(cand);
                let r = self.join(spec, index, s, st, emit);
                st.matched[i] = None;
                r
            } else {
                Ok(())
            };
            s.truncate(mark);
            r?;
        }
        Ok(())
    }

    fn ground_atom(&self, a: &Atom, s: &Subst) -> Option<GroundAtom> {
        let mut args = Vec::with_capacity(a.args.len());
        for t in &a.args {
            match eval(t, s, &self.universe) {
                Eval::Value(v) => args.push(v),
                _ => return None,
            }
        }
        Some(GroundAtom::new(a.predicate.clone(), args))
    }

    fn ground_literal(&self, l: &Literal, s: &Subst) -> Option<GroundLiteral> {
        match l {
            Literal::Positive(a) => self.ground_atom(a, s).map(GroundLiteral::Pos),
            Literal::Naf(a) => {
                let mut args = Vec::with_capacity(a.args.len());
                for t in &a.args {
                    match (t, eval(t, s, &self.universe)) {
                        (Term::Anonymous, _) => args.push(None),
                        (_, Eval::Value(v)) => args.push(Some(v)),
                        _ => return None,
                    }
                }
                Some(GroundLiteral::Neg(AtomPattern {
                    predicate: a.predicate.clone(),
                    args,
                }))
            }
            Literal::Comparison(_) => None,
        }
    }

    /// Instantiates every rule against `possible`, returning ground rules in
    /// a deterministic order.
    fn pass(&mut self, possible: &AtomIndex) -> Result<Vec<GroundRule>, AspError> {
        self.count = 0;
        let mut out: IndexSet<GroundRule> = IndexSet::new();
        for (origin, rule) in self.program.rules.iter().enumerate() {
            let mut atoms = Vec::new();
            let mut comparisons = Vec::new();
            for e in &rule.body {
                match e {
                    BodyElement::Literal(Literal::Positive(a)) => atoms.push(a),
                    BodyElement::Literal(Literal::Comparison(c)) => comparisons.push(c),
                    _ => {}
                }
            }
            let spec = JoinSpec { atoms, comparisons };
            let mut st = JoinState::new(&spec);
            let mut subst = Subst::new();
            let mut emit = |g: &mut Self,
                            s: &Subst,
                            matched: &[Option<&GroundAtom>]|
             -> Result<(), CeilingHit> {
                let head = match &rule.head {
                    Some(h) => match g.ground_atom(h, s) {
                        Some(a) => Some(a),
                        None => return Ok(()),
                    },
                    None => None,
                };
                let mut body = Vec::with_capacity(rule.body.len());
                let mut k = 0;
                for e in &rule.body {
                    match e {
                        BodyElement::Literal(Literal::Comparison(_)) => {}
                        BodyElement::Literal(Literal::Positive(_)) => {
                            let Some(a) = matched[k] else { return Ok(()) };
                            k += 1;
                            body.push(GroundElement::Literal(GroundLiteral::Pos(a.clone())));
                        }
                        BodyElement::Literal(l) => match g.ground_literal(l, s) {
                            Some(gl) => body.push(GroundElement::Literal(gl)),
                            None => return Ok(()),
                        },
                        BodyElement::Conditional {
                            literal,
                            conditions,
                        } => g.expand_conditional(literal, conditions, possible, s, &mut body)?,
                    }
                }
                out.insert(GroundRule { head, body, origin });
                Ok(())
            };
            let r = self.join(&spec, possible, &mut subst, &mut st, &mut emit);
            if r.is_err() {
                return Err(AspError::Ground {
                    message: format!(
                        "instantiation count exceeds ceiling {} in rule '{}'",
                        self.ceiling, rule
                    ),
                    span: rule.span,
                });
            }
        }
        Ok(out.into_iter().collect())
    }

    fn expand_conditional(
        &mut self,
        literal: &Literal,
        conditions: &[Literal],
        possible: &AtomIndex,
        s: &Subst,
        body: &mut Vec<GroundElement>,
    ) -> Result<(), CeilingHit> {
        let mut atoms = Vec::new();
        let mut comparisons = Vec::new();
        for c in conditions {
            match c {
                Literal::Positive(a) => atoms.push(a),
                Literal::Comparison(c) => comparisons.push(c),
                Literal::Naf(_) => {}
            }
        }
        let spec = JoinSpec { atoms, comparisons };
        let mut st = JoinState::new(&spec);
        let mut local = s.clone();
        let mut produced: Vec<GroundElement> = Vec::new();
        let mut emit = |g: &mut Self,
                        sub: &Subst,
                        matched: &[Option<&GroundAtom>]|
         -> Result<(), CeilingHit> {
            let mut conds = Vec::new();
            let mut k = 0;
            for c in conditions {
                match c {
                    Literal::Comparison(_) => {}
                    Literal::Positive(_) => {
                        let Some(a) = matched[k] else { return Ok(()) };
                        k += 1;
                        conds.push(GroundLiteral::Pos(a.clone()));
                    }
                    other => match g.ground_literal(other, sub) {
                        Some(gl) => conds.push(gl),
                        None => return Ok(()),
                    },
                }
            }
            let Some(lit) = g.ground_literal(literal, sub) else {
                return Ok(());
            };
            let el = if conds.is_empty() {
                GroundElement::Literal(lit)
            } else {
                GroundElement::Implication {
                    conditions: conds,
                    literal: lit,
                }
            };
            if !produced.contains(&el) {
                produced.push(el);
            }
            Ok(())
        };
        // the count of the enclosing instantiation stays charged
        self.join(&spec, possible, &mut local, &mut st, &mut emit)?;
        body.extend(produced);
        Ok(())
    }
}

fn collect_int_literals(t: &Term, out: &mut HashSet<i64>) {
    match t {
        Term::Integer(i) => {
            out.insert(*i);
        }
        Term::Arith { lhs, rhs, .. } => {
            collect_int_literals(lhs, out);
            collect_int_literals(rhs, out);
        }
        _ => {}
    }
}

fn literal_terms(l: &Literal) -> Vec<&Term> {
    match l {
        Literal::Positive(a) | Literal::Naf(a) => a.args.iter().collect(),
        Literal::Comparison(c) => vec![&c.lhs, &c.rhs],
    }
}

fn program_int_literals(p: &Program) -> HashSet<i64> {
    let mut out = HashSet::new();
    for r in &p.rules {
        if let Some(h) = &r.head {
            h.args
                .iter()
                .for_each(|t| collect_int_literals(t, &mut out));
        }
        for e in &r.body {
            let lits: Vec<&Literal> = match e {
                BodyElement::Literal(l) => vec![l],
                BodyElement::Conditional {
                    literal,
                    conditions,
                } => std::iter::once(literal).chain(conditions).collect(),
            };
            for l in lits {
                literal_terms(l)
                    .into_iter()
                    .for_each(|t| collect_int_literals(t, &mut out));
            }
        }
    }
    out
}

/// Grounds a program that has passed [`check_safety`](super::check_safety).
pub fn ground(program: &Program, opts: &GroundOptions) -> Result<GroundProgram, AspError> {
    let mut g = Grounder {
        program,
        universe: Universe {
            bound: opts.domain_bound,
            literals: program_int_literals(program),
        },
        ceiling: opts.ceiling,
        count: 0,
    };
    let mut possible = AtomIndex::default();
    loop {
        let rules = g.pass(&possible)?;
        let mut grew = false;
        for r in &rules {
            if let Some(h) = &r.head {
                if !possible.contains(h) {
                    grew = true;
                }
            }
        }
        if !grew {
            let sources = program
                .rules
                .iter()
                .map(|r| RuleSource {
                    text: r.to_string(),
                    span: r.span,
                })
                .collect();
            return Ok(GroundProgram { rules, sources });
        }
        // insert in rule order so later passes enumerate deterministically
        for r in rules {
            if let Some(h) = r.head {
                possible.insert(h);
            }
        }
    }
}
