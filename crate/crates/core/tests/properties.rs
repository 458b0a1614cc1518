use std::collections::BTreeSet;

use proptest::prelude::*;

use spatial_asp::asp::{
    check_safety, ground, parse_program, run_text, ArithOp, Atom, BodyElement, CompareOp,
    Comparison, FailureKind, GroundOptions, Literal, Program, Rule, SolverOutcome, Term,
};
use spatial_asp::eval::score;
use spatial_asp::spatial::{
    knowledge_program, Dataset, Offset, QuestionType, SparqaRelation, StepGameRelation,
    SynonymDictionary,
};

fn constant() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["a", "b", "left", "o1", "top_right", "x_2", "nott"])
        .prop_map(String::from)
}

fn variable() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["X", "Y", "Block", "O_1", "Z2"]).prop_map(String::from)
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        constant().prop_map(Term::Constant),
        "[a-z \"\\\\\n]{0,6}".prop_map(Term::Quoted),
        (-50i64..50).prop_map(Term::Integer),
        variable().prop_map(Term::Variable),
        Just(Term::Anonymous),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        (inner.clone(), prop::bool::ANY, inner).prop_map(|(l, add, r)| {
            Term::arith(if add { ArithOp::Add } else { ArithOp::Sub }, l, r)
        })
    })
}

fn atom() -> impl Strategy<Value = Atom> {
    (
        prop::sample::select(vec!["p", "is", "query", "object", "q_1"]),
        prop::collection::vec(term(), 0..4),
    )
        .prop_map(|(p, args)| Atom::new(p, args))
}

fn compare_op() -> impl Strategy<Value = CompareOp> {
    prop::sample::select(vec![
        CompareOp::Eq,
        CompareOp::Ne,
        CompareOp::Lt,
        CompareOp::Le,
        CompareOp::Gt,
        CompareOp::Ge,
    ])
}

fn literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        atom().prop_map(Literal::Positive),
        atom().prop_map(Literal::Naf),
        (term(), compare_op(), term()).prop_map(|(lhs, op, rhs)| Literal::Comparison(Comparison {
            lhs,
            op,
            rhs
        })),
    ]
}

fn body_element() -> impl Strategy<Value = BodyElement> {
    prop_oneof![
        3 => literal().prop_map(BodyElement::Literal),
        1 => (literal(), prop::collection::vec(literal(), 1..3))
            .prop_map(|(literal, conditions)| BodyElement::Conditional { literal, conditions }),
    ]
}

fn rule() -> impl Strategy<Value = Rule> {
    prop_oneof![
        atom().prop_map(Rule::fact),
        (
            prop::option::of(atom()),
            prop::collection::vec(body_element(), 1..4)
        )
            .prop_map(|(h, b)| Rule::new(h, b)),
    ]
}

proptest! {
    #[test]
    fn print_then_parse_round_trips(rules in prop::collection::vec(rule(), 0..6)) {
        let p = Program::new(rules);
        let text = p.to_string();
        let back = parse_program(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, p);
    }

    #[test]
    fn solving_is_deterministic(rules in prop::collection::vec(rule(), 0..6)) {
        let text = Program::new(rules).to_string();
        let opts = GroundOptions { domain_bound: 5, ceiling: 10_000 };
        let a = run_text(&text, &opts);
        let b = run_text(&text, &opts);
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    /// Programs that pass the safety check never fail to ground for a reason
    /// other than the instantiation ceiling.
    #[test]
    fn safe_programs_ground(rules in prop::collection::vec(safe_ish_rule(), 1..6)) {
        let mut all = vec![
            Rule::fact(Atom::new("p", vec![Term::constant("a")])),
            Rule::fact(Atom::new("r", vec![Term::constant("a"), Term::Integer(1)])),
        ];
        all.extend(rules);
        let p = Program::new(all);
        if check_safety(&p).is_ok() {
            let opts = GroundOptions { domain_bound: 5, ceiling: 100_000 };
            if let Err(e) = ground(&p, &opts) {
                prop_assert_eq!(e.kind(), FailureKind::Ground, "{}\n{}", e, p);
                prop_assert!(e.to_string().contains("ceiling"), "{}\n{}", e, p);
            }
        }
    }
}

/// Rules over `p/1` and `r/2` with small variable sets, so a fair share are safe.
fn safe_ish_rule() -> impl Strategy<Value = Rule> {
    let var = prop::sample::select(vec!["X", "Y"]).prop_map(Term::var);
    let simple = prop_oneof![
        var.clone(),
        Just(Term::constant("a")),
        (0i64..3).prop_map(Term::Integer),
    ];
    let arg = prop_oneof![
        3 => simple.clone(),
        1 => (simple.clone(), simple.clone()).prop_map(|(l, r)| Term::arith(ArithOp::Add, l, r)),
    ];
    let atom = prop_oneof![
        arg.clone().prop_map(|t| Atom::new("p", vec![t])),
        (arg.clone(), arg.clone()).prop_map(|(a, b)| Atom::new("r", vec![a, b])),
    ];
    let element = prop_oneof![
        3 => atom.clone().prop_map(BodyElement::positive),
        1 => atom.clone().prop_map(BodyElement::naf),
        1 => (arg.clone(), compare_op(), arg).prop_map(|(l, op, r)| BodyElement::compare(l, op, r)),
        1 => (atom.clone(), atom.clone()).prop_map(|(l, c)| BodyElement::Conditional {
            literal: Literal::Naf(l),
            conditions: vec![Literal::Positive(c)],
        }),
    ];
    (prop::option::of(atom), prop::collection::vec(element, 1..4))
        .prop_map(|(h, b)| Rule::new(h, b))
}

proptest! {
    #[test]
    fn relation_offsets_are_bijective(dx in -20i64..20, dy in -20i64..20) {
        let o = Offset { dx, dy };
        let r = StepGameRelation::from_offset(o);
        prop_assert_eq!(r.to_offset(), o.signum());
        prop_assert_eq!(StepGameRelation::from_offset(r.to_offset()), r);
        let back = Offset { dx: -dx, dy: -dy };
        prop_assert_eq!(StepGameRelation::from_offset(back), r.inverse());
        prop_assert_eq!(r.inverse().inverse(), r);
    }

    /// Canonical labels are fixed points of normalization, so scoring them
    /// before or after normalization gives the same result.
    #[test]
    fn scoring_is_idempotent_on_canonical_labels(
        pred in prop::collection::btree_set(prop::sample::select(SparqaRelation::ALL.to_vec()), 0..4),
        gold in prop::collection::btree_set(prop::sample::select(SparqaRelation::ALL.to_vec()), 1..4),
        qtype in prop::sample::select(QuestionType::ALL.to_vec()),
    ) {
        let dict = SynonymDictionary::builtin(Dataset::SparQA);
        let raw = |s: &BTreeSet<SparqaRelation>| -> BTreeSet<String> {
            s.iter().map(|r| r.label().to_string()).collect()
        };
        let norm = |s: &BTreeSet<String>| -> BTreeSet<String> {
            s.iter().map(|l| dict.normalize(l).into_label()).collect()
        };
        let (p, g) = (raw(&pred), raw(&gold));
        prop_assert_eq!(norm(&p), p.clone());
        prop_assert_eq!(score(&norm(&p), &norm(&g), Some(qtype)), score(&p, &g, Some(qtype)));
    }
}

#[derive(Debug, Clone)]
struct Scene {
    /// Where block `b` sits relative to block `a`.
    b_side: SparqaRelation,
    /// `(x, y, block)` per object, coordinates inside its block.
    objects: Vec<(i64, i64, usize)>,
    /// Indices into the list of true object relations that are stated.
    stated: Vec<(usize, bool)>,
}

const BLOCK_SIZE: i64 = 10;

impl Scene {
    fn block_origin(&self, block: usize) -> (i64, i64) {
        if block == 0 {
            return (0, 0);
        }
        let far = 2 * BLOCK_SIZE;
        match self.b_side {
            SparqaRelation::Left => (-far, 0),
            SparqaRelation::Right => (far, 0),
            SparqaRelation::Above => (0, far),
            _ => (0, -far),
        }
    }

    fn position(&self, o: usize) -> (i64, i64) {
        let (x, y, b) = self.objects[o];
        let (ox, oy) = self.block_origin(b);
        (ox + x, oy + y)
    }

    /// Geometric truth of a directional relation between two points.
    fn holds(a: (i64, i64), r: &str, b: (i64, i64)) -> bool {
        match r {
            "left" => a.0 < b.0,
            "right" => a.0 > b.0,
            "above" => a.1 > b.1,
            "below" => a.1 < b.1,
            _ => false,
        }
    }

    /// Block extents: every point of one block against every point of the other.
    fn blocks_hold(&self, x: usize, r: &str, y: usize) -> bool {
        let (ax, ay) = self.block_origin(x);
        let (bx, by) = self.block_origin(y);
        let a_hi = (ax + BLOCK_SIZE - 1, ay + BLOCK_SIZE - 1);
        let b_hi = (bx + BLOCK_SIZE - 1, by + BLOCK_SIZE - 1);
        match r {
            "left" => a_hi.0 < bx,
            "right" => ax > b_hi.0,
            "above" => ay > b_hi.1,
            "below" => a_hi.1 < by,
            _ => false,
        }
    }

    /// True relations between objects of the same block.
    fn true_facts(&self) -> Vec<(usize, &'static str, usize)> {
        let mut out = Vec::new();
        for i in 0..self.objects.len() {
            for j in 0..self.objects.len() {
                if i == j || self.objects[i].2 != self.objects[j].2 {
                    continue;
                }
                for r in ["left", "above"] {
                    if Self::holds(self.position(i), r, self.position(j)) {
                        out.push((i, r, j));
                    }
                }
            }
        }
        out
    }

    fn program(&self) -> String {
        let blocks = ["a", "b"];
        let mut text = String::from("block(a). block(b).\n");
        for (i, (_, _, b)) in self.objects.iter().enumerate() {
            text.push_str(&format!("object(o{i},small,blue,circle,{}).\n", blocks[*b]));
        }
        text.push_str(&format!("is(b,{},a).\n", self.b_side.label()));
        let facts = self.true_facts();
        for &(k, flip) in &self.stated {
            if facts.is_empty() {
                break;
            }
            let (i, r, j) = facts[k % facts.len()];
            if flip {
                let inv = SparqaRelation::from_label(r).unwrap().inverse();
                text.push_str(&format!("is(o{j},{},o{i}).\n", inv.label()));
            } else {
                text.push_str(&format!("is(o{i},{r},o{j}).\n"));
            }
        }
        text
    }
}

fn scene() -> impl Strategy<Value = Scene> {
    (
        prop::sample::select(vec![
            SparqaRelation::Left,
            SparqaRelation::Right,
            SparqaRelation::Above,
            SparqaRelation::Below,
        ]),
        prop::collection::vec((0..BLOCK_SIZE, 0..BLOCK_SIZE, 0usize..2), 1..=4),
        prop::collection::vec((0usize..16, prop::bool::ANY), 0..6),
    )
        .prop_map(|(b_side, objects, stated)| Scene {
            b_side,
            objects,
            stated,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sparqa_algebra_is_sound(s in scene()) {
        let text = s.program();
        let mut p = parse_program(&text).unwrap();
        p.extend(knowledge_program(Dataset::SparQA));
        let out = spatial_asp::asp::run_program(&p, &GroundOptions::default());
        let SolverOutcome::Model(m) = out else {
            return Err(TestCaseError::fail(format!("{out:?}\n{text}")));
        };
        let name = |v: &spatial_asp::asp::Value| v.text();
        let derived: BTreeSet<(String, String, String)> = m
            .with_predicate("is")
            .map(|a| (name(&a.args[0]), name(&a.args[1]), name(&a.args[2])))
            .collect();
        for (x, r, y) in &derived {
            let ok = match (x.strip_prefix('o'), y.strip_prefix('o')) {
                (Some(i), Some(j)) => {
                    let (i, j): (usize, usize) = (i.parse().unwrap(), j.parse().unwrap());
                    Scene::holds(s.position(i), r, s.position(j))
                }
                (None, None) => {
                    let idx = |b: &str| usize::from(b == "b");
                    s.blocks_hold(idx(x), r, idx(y))
                }
                _ => false,
            };
            prop_assert!(ok, "is({},{},{}) is false in the scene\n{}", x, r, y, text);
            let inverse = SparqaRelation::from_label(r).unwrap().inverse().label().to_string();
            prop_assert!(
                derived.contains(&(y.clone(), inverse, x.clone())),
                "missing inverse of is({},{},{})", x, r, y
            );
        }
    }
}
