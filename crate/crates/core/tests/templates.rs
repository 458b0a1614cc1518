use std::fs;
use std::path::PathBuf;

use spatial_asp::asp::{extract_answers, format_tuple, parse_program, run_program, GroundOptions};
use spatial_asp::llm::{fewshot, render_prompt, PromptRequest, TemplateId};
use spatial_asp::spatial::{knowledge_program, Dataset, QuestionType};

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn request(id: TemplateId) -> PromptRequest {
    let req = PromptRequest::new(id, "gpt-4o-mini");
    match id {
        TemplateId::RefineWithError => req
            .var("program", "is(a left b).\nquery(a,b).")
            .var("error", "PARSE: unexpected identifier 'left', expected ',' or ')' in the argument list of 'is' @ 1:6"),
        TemplateId::FactsRulesReason => req
            .var("facts", "is(a,left,b).\nis(b,left,c).")
            .var("rules", "left is the inverse of right")
            .var("question", "What is the relation of the agent A to the agent C?")
            .var("choices", "left, right, above, below"),
        _ => req
            .var("context", "A is to the left of B. C is above B.")
            .var("question", "What is the relation of the agent A to the agent C?")
            .var("choices", "left, right, above, below")
            .var("qtype", "FB"),
    }
}

/// Rendered templates must match the checked-in copies byte for byte. Set
/// `UPDATE_GOLDEN=1` to rewrite them after an intended template change.
#[test]
fn rendered_templates_match_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let dir = golden_dir();
    for id in TemplateId::ALL {
        let mut req = request(id);
        let wanted = id.placeholders();
        req.variables.retain(|k, _| {
            wanted.contains(&k.as_str()) || (k == "qtype" && wanted.contains(&"fewshot"))
        });
        let text = render_prompt(&req).unwrap();
        let path = dir.join(format!("{}.txt", id.as_str()));
        if update {
            fs::create_dir_all(&dir).unwrap();
            fs::write(&path, &text).unwrap();
            continue;
        }
        let expected =
            fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(text, expected, "{} changed", id.as_str());
    }
}

fn fewshot_program(q: QuestionType) -> String {
    let text = fewshot(q);
    let start = text.find("Program:\n").expect("program section") + "Program:\n".len();
    text[start..].to_string()
}

fn solve_fewshot(q: QuestionType) -> Vec<String> {
    let mut p = parse_program(&fewshot_program(q)).unwrap();
    p.extend(knowledge_program(Dataset::SparQA));
    let out = run_program(&p, &GroundOptions::default());
    let m = out.model().unwrap_or_else(|| panic!("{q}: {out:?}"));
    extract_answers(m, "query")
        .iter()
        .map(format_tuple)
        .collect()
}

#[test]
fn fewshot_programs_give_their_answers() {
    assert_eq!(solve_fewshot(QuestionType::FR), ["(left)"]);
    assert_eq!(solve_fewshot(QuestionType::FB), ["(a)"]);
    assert_eq!(solve_fewshot(QuestionType::YN), ["()"]);
    assert_eq!(solve_fewshot(QuestionType::CO), ["(big_blue_circle)"]);
}
