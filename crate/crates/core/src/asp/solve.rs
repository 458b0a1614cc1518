//! Stratified evaluation of ground programs.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::error::AspError;
use super::ground::{
    AtomPattern, GroundAtom, GroundElement, GroundLiteral, GroundProgram, GroundRule, PredKey,
};

/// The unique stable model of a stratified program.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StableModel {
    pub atoms: BTreeSet<GroundAtom>,
}

impl StableModel {
    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn with_predicate<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a GroundAtom> {
        self.atoms.iter().filter(move |a| a.predicate == name)
    }
}

impl fmt::Display for StableModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.atoms {
            writeln!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Result of running a program through the engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverOutcome {
    Model(StableModel),
    Failed(AspError),
}

impl SolverOutcome {
    pub fn model(&self) -> Option<&StableModel> {
        match self {
            SolverOutcome::Model(m) => Some(m),
            SolverOutcome::Failed(_) => None,
        }
    }

    pub fn error(&self) -> Option<&AspError> {
        match self {
            SolverOutcome::Model(_) => None,
            SolverOutcome::Failed(e) => Some(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Sign {
    Positive,
    Negative,
}

/// Dependency edges `head -> body predicate` of a ground program.
struct DependencyGraph {
    graph: DiGraph<PredKey, Sign>,
    /// First rule carrying each negative edge, for error positions.
    negative_origin: HashMap<(NodeIndex, NodeIndex), usize>,
}

fn literal_key(l: &GroundLiteral) -> (PredKey, Sign) {
    match l {
        GroundLiteral::Pos(a) => (a.key(), Sign::Positive),
        GroundLiteral::Neg(p) => (p.key(), Sign::Negative),
    }
}

fn body_dependencies(rule: &GroundRule) -> Vec<(PredKey, Sign)> {
    let mut deps = Vec::new();
    for e in &rule.body {
        match e {
            GroundElement::Literal(l) => deps.push(literal_key(l)),
            GroundElement::Implication {
                conditions,
                literal,
            } => {
                deps.push(literal_key(literal));
                // a condition acts negatively: more condition atoms can only
                // make the element harder to satisfy
                for c in conditions {
                    let (k, _) = literal_key(c);
                    deps.push((k, Sign::Negative));
                }
            }
        }
    }
    deps
}

impl DependencyGraph {
    fn build(program: &GroundProgram) -> Self {
        let mut keys: BTreeSet<PredKey> = BTreeSet::new();
        for r in &program.rules {
            if let Some(h) = &r.head {
                keys.insert(h.key());
            }
            for (k, _) in body_dependencies(r) {
                keys.insert(k);
            }
        }
        let mut graph = DiGraph::new();
        let nodes: BTreeMap<PredKey, NodeIndex> = keys
            .into_iter()
            .map(|k| {
                let idx = graph.add_node(k.clone());
                (k, idx)
            })
            .collect();
        let mut edges: BTreeMap<(NodeIndex, NodeIndex, Sign), usize> = BTreeMap::new();
        for (i, r) in program.rules.iter().enumerate() {
            let Some(h) = &r.head else { continue };
            let from = nodes[&h.key()];
            for (k, sign) in body_dependencies(r) {
                edges.entry((from, nodes[&k], sign)).or_insert(i);
            }
        }
        let mut negative_origin = HashMap::new();
        for ((from, to, sign), rule) in edges {
            graph.add_edge(from, to, sign);
            if sign == Sign::Negative {
                negative_origin.entry((from, to)).or_insert(rule);
            }
        }
        DependencyGraph {
            graph,
            negative_origin,
        }
    }

    /// Shortest path from `from` to `to` staying inside `component`.
    fn path_within(
        &self,
        from: NodeIndex,
        to: NodeIndex,
        component: &HashSet<NodeIndex>,
    ) -> Vec<(NodeIndex, Sign)> {
        let mut prev: HashMap<NodeIndex, (NodeIndex, Sign)> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = HashSet::from([from]);
        while let Some(n) = queue.pop_front() {
            if n == to {
                break;
            }
            let mut next: Vec<_> = self
                .graph
                .edges(n)
                .map(|e| (petgraph::visit::EdgeRef::target(&e), *e.weight()))
                .filter(|(t, _)| component.contains(t))
                .collect();
            next.sort();
            for (t, s) in next {
                if seen.insert(t) {
                    prev.insert(t, (n, s));
                    queue.push_back(t);
                }
            }
        }
        let mut path = Vec::new();
        let mut cur = to;
        while cur != from {
            let (p, s) = prev[&cur];
            path.push((cur, s));
            cur = p;
        }
        path.reverse();
        path
    }
}

/// Strata of predicates in evaluation order, or the first negative cycle.
pub fn stratify(program: &GroundProgram) -> Result<Vec<Vec<PredKey>>, AspError> {
    let dg = DependencyGraph::build(program);
    // tarjan_scc lists components in reverse topological order, so
    // dependencies (edge targets) come first
    let sccs = tarjan_scc(&dg.graph);
    let mut negatives: Vec<(NodeIndex, NodeIndex, usize)> = Vec::new();
    for comp in &sccs {
        let set: HashSet<NodeIndex> = comp.iter().copied().collect();
        for &n in comp {
            for e in dg.graph.edges(n) {
                let t = petgraph::visit::EdgeRef::target(&e);
                if *e.weight() == Sign::Negative && set.contains(&t) {
                    negatives.push((n, t, dg.negative_origin[&(n, t)]));
                }
            }
        }
    }
    if let Some(&(from, to, origin)) = negatives
        .iter()
        .min_by_key(|(f, t, o)| (*o, dg.graph[*f].clone(), dg.graph[*t].clone()))
    {
        let comp: HashSet<NodeIndex> = sccs
            .iter()
            .find(|c| c.contains(&from))
            .map(|c| c.iter().copied().collect())
            .unwrap_or_default();
        let mut text = format!("{} -> not {}", dg.graph[from], dg.graph[to]);
        for (n, s) in dg.path_within(to, from, &comp) {
            match s {
                Sign::Positive => text.push_str(&format!(" -> {}", dg.graph[n])),
                Sign::Negative => text.push_str(&format!(" -> not {}", dg.graph[n])),
            }
        }
        let src = program.source_of(&program.rules[origin]);
        return Err(AspError::Unstratifiable {
            cycle: format!("predicate depends on itself through negation: {text}"),
            span: src.span,
        });
    }
    Ok(sccs
        .into_iter()
        .map(|c| {
            let mut keys: Vec<PredKey> = c.into_iter().map(|n| dg.graph[n].clone()).collect();
            keys.sort();
            keys
        })
        .collect())
}

/// Model under construction, indexed by predicate for pattern lookups.
#[derive(Default)]
struct Interpretation {
    atoms: BTreeSet<GroundAtom>,
    by_pred: HashMap<PredKey, Vec<GroundAtom>>,
}

impl Interpretation {
    fn insert(&mut self, a: GroundAtom) -> bool {
        if self.atoms.contains(&a) {
            return false;
        }
        self.by_pred.entry(a.key()).or_default().push(a.clone());
        self.atoms.insert(a);
        true
    }

    fn any_match(&self, p: &AtomPattern) -> bool {
        if p.args.iter().all(Option::is_some) {
            let atom = GroundAtom::new(
                p.predicate.clone(),
                p.args.iter().map(|a| a.clone().unwrap()).collect(),
            );
            return self.atoms.contains(&atom);
        }
        self.by_pred
            .get(&p.key())
            .is_some_and(|list| list.iter().any(|a| p.matches(a)))
    }

    fn holds(&self, l: &GroundLiteral) -> bool {
        match l {
            GroundLiteral::Pos(a) => self.atoms.contains(a),
            GroundLiteral::Neg(p) => !self.any_match(p),
        }
    }

    fn body_holds(&self, body: &[GroundElement]) -> bool {
        body.iter().all(|e| match e {
            GroundElement::Literal(l) => self.holds(l),
            GroundElement::Implication {
                conditions,
                literal,
            } => !conditions.iter().all(|c| self.holds(c)) || self.holds(literal),
        })
    }
}

/// Computes the unique stable model, or reports why there is none.
pub fn solve(program: &GroundProgram) -> SolverOutcome {
    let strata = match stratify(program) {
        Ok(s) => s,
        Err(e) => return SolverOutcome::Failed(e),
    };
    let stratum_of: HashMap<&PredKey, usize> = strata
        .iter()
        .enumerate()
        .flat_map(|(i, keys)| keys.iter().map(move |k| (k, i)))
        .collect();
    let mut by_stratum: Vec<Vec<&GroundRule>> = vec![Vec::new(); strata.len()];
    for r in &program.rules {
        if let Some(h) = &r.head {
            by_stratum[stratum_of[&h.key()]].push(r);
        }
    }

    let mut interp = Interpretation::default();
    for rules in by_stratum {
        // naive least fixpoint; lower strata are final at this point
        let mut pending: Vec<&GroundRule> = rules;
        loop {
            let mut changed = false;
            pending.retain(|r| {
                if interp.body_holds(&r.body) {
                    if interp.insert(r.head.clone().expect("stratum rules have heads")) {
                        changed = true;
                    }
                    false
                } else {
                    true
                }
            });
            if !changed {
                break;
            }
        }
    }

    for r in program.rules.iter().filter(|r| r.head.is_none()) {
        if interp.body_holds(&r.body) {
            let src = program.source_of(r);
            return SolverOutcome::Failed(AspError::Unsatisfiable {
                constraint: src.text.clone(),
                span: src.span,
            });
        }
    }
    SolverOutcome::Model(StableModel {
        atoms: interp.atoms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asp::{run_text, GroundOptions};

    fn model_of(text: &str) -> Vec<String> {
        match run_text(text, &GroundOptions::default()) {
            SolverOutcome::Model(m) => m.atoms.iter().map(|a| a.to_string()).collect(),
            SolverOutcome::Failed(e) => panic!("unexpected failure: {e}"),
        }
    }

    #[test]
    fn chain_derivation() {
        assert_eq!(model_of("a. b :- a."), vec!["a", "b"]);
    }

    #[test]
    fn self_refuting_constraint() {
        let out = run_text("a. :- a.", &GroundOptions::default());
        let e = out.error().expect("unsat");
        assert_eq!(
            e.to_string(),
            "UNSAT: integrity constraint ':- a.' is violated @ 1:4"
        );
    }

    #[test]
    fn negation_through_strata() {
        assert_eq!(
            model_of("p(1). p(2). q(2). r(X) :- p(X), not q(X)."),
            vec!["p(1)", "p(2)", "q(2)", "r(1)"]
        );
    }

    #[test]
    fn negative_cycle_is_reported() {
        let out = run_text("p :- not q. q :- not p.", &GroundOptions::default());
        let e = out.error().expect("unstratifiable");
        assert_eq!(
            e.to_string(),
            "UNSTRATIFIABLE: predicate depends on itself through negation: p/0 -> not q/0 -> not p/0 @ 1:1"
        );
    }

    #[test]
    fn quantifier_scene() {
        let text = "block(a). block(b). object(o1,small,black,circle,a). object(o2,big,black,square,a).\n\
            query(Block):- block(Block), not object(_, _, black, _, OtherBlock): block(OtherBlock), OtherBlock != Block.";
        let m = model_of(text);
        let q: Vec<&String> = m.iter().filter(|a| a.starts_with("query")).collect();
        assert_eq!(q, vec!["query(a)"]);
    }

    #[test]
    fn recursion_within_a_stratum() {
        let m = model_of("e(1,2). e(2,3). e(3,1). r(X,Y) :- e(X,Y). r(X,Z) :- r(X,Y), e(Y,Z).");
        assert_eq!(m.iter().filter(|a| a.starts_with("r(")).count(), 9);
    }

    #[test]
    fn strata_order_dependencies_first() {
        let p = crate::asp::parse_program("a. b :- not a. c :- b.").unwrap();
        let g = crate::asp::ground(&p, &GroundOptions::default()).unwrap();
        let strata = stratify(&g).unwrap();
        let pos = |n: &str| {
            strata
                .iter()
                .position(|s| s.iter().any(|k| k.name == n))
                .unwrap()
        };
        assert!(pos("a") < pos("b"));
        assert!(pos("b") < pos("c"));
    }
}
