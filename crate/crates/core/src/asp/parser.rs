//! Hand-written lexer and recursive-descent parser for the Clingo-compatible subset.
//!
//! Body elements are separated by `,` or `;`. A `:` after a literal starts a
//! condition list that extends over following `,`-separated literals until the
//! next `;` or the closing `.`, as in Clingo.

use super::ast::*;
use super::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Anon,
    Int(i64),
    Str(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Period,
    If,
    Colon,
    Not,
    Cmp(CompareOp),
    Plus,
    Minus,
    Directive(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Var(s) => format!("variable '{s}'"),
            Tok::Anon => "'_'".into(),
            Tok::Int(i) => format!("integer '{i}'"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Semi => "';'".into(),
            Tok::Period => "'.'".into(),
            Tok::If => "':-'".into(),
            Tok::Colon => "':'".into(),
            Tok::Not => "'not'".into(),
            Tok::Cmp(op) => format!("'{}'", op.symbol()),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Directive(d) => format!("directive '#{d}'"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn here(&self) -> Span {
        Span {
            line: self.line,
            col: self.col,
        }
    }

    fn skip_trivia(&mut self) -> Result<(), ParseError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => {
                    let start = self.here();
                    self.bump();
                    if self.peek() == Some('*') {
                        self.bump();
                        let mut prev = '\0';
                        loop {
                            match self.bump() {
                                Some('%') if prev == '*' => break,
                                Some(c) => prev = c,
                                None => {
                                    return Err(ParseError::new(
                                        "unterminated block comment",
                                        start,
                                    ))
                                }
                            }
                        }
                    } else {
                        while let Some(c) = self.peek() {
                            if c == '\n' {
                                break;
                            }
                            self.bump();
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '\'' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn next_token(&mut self) -> Result<Token, ParseError> {
        self.skip_trivia()?;
        let span = self.here();
        let Some(c) = self.peek() else {
            return Ok(Token {
                tok: Tok::Eof,
                span,
            });
        };
        let tok =
            match c {
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                ';' => {
                    self.bump();
                    Tok::Semi
                }
                '+' => {
                    self.bump();
                    Tok::Plus
                }
                '-' => {
                    self.bump();
                    Tok::Minus
                }
                '.' => {
                    self.bump();
                    if self.peek() == Some('.') {
                        return Err(ParseError::new(
                            "unexpected '..': intervals are not supported",
                            span,
                        ));
                    }
                    Tok::Period
                }
                ':' => {
                    self.bump();
                    if self.peek() == Some('-') {
                        self.bump();
                        Tok::If
                    } else {
                        Tok::Colon
                    }
                }
                '=' => {
                    self.bump();
                    if self.peek() == Some('=') {
                        self.bump();
                    }
                    Tok::Cmp(CompareOp::Eq)
                }
                '!' => {
                    self.bump();
                    if self.peek() == Some('=') {
                        self.bump();
                        Tok::Cmp(CompareOp::Ne)
                    } else {
                        return Err(ParseError::new("unexpected character '!'", span));
                    }
                }
                '<' => {
                    self.bump();
                    match self.peek() {
                        Some('=') => {
                            self.bump();
                            Tok::Cmp(CompareOp::Le)
                        }
                        Some('>') => {
                            self.bump();
                            Tok::Cmp(CompareOp::Ne)
                        }
                        _ => Tok::Cmp(CompareOp::Lt),
                    }
                }
                '>' => {
                    self.bump();
                    if self.peek() == Some('=') {
                        self.bump();
                        Tok::Cmp(CompareOp::Ge)
                    } else {
                        Tok::Cmp(CompareOp::Gt)
                    }
                }
                '"' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            Some('"') => break,
                            Some('\\') => match self.bump() {
                                Some('n') => s.push('\n'),
                                Some(c) => s.push(c),
                                None => return Err(ParseError::new("unterminated string", span)),
                            },
                            Some(c) => s.push(c),
                            None => return Err(ParseError::new("unterminated string", span)),
                        }
                    }
                    Tok::Str(s)
                }
                '#' => {
                    self.bump();
                    let name = self.word();
                    if name == "show" {
                        // the signature syntax is not part of the term grammar
                        loop {
                            match self.bump() {
                                Some('.') => break,
                                Some(_) => {}
                                None => return Err(ParseError::new(
                                    "unexpected end of input, expected '.' to end the directive",
                                    span,
                                )),
                            }
                        }
                    }
                    Tok::Directive(name)
                }
                c if c.is_ascii_digit() => {
                    let mut s = String::new();
                    while let Some(d) = self.peek() {
                        if d.is_ascii_digit() {
                            s.push(d);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let n = s.parse::<i64>().map_err(|_| {
                        ParseError::new(format!("integer literal '{s}' out of range"), span)
                    })?;
                    Tok::Int(n)
                }
                '_' => {
                    let w = self.word();
                    if w == "_" {
                        Tok::Anon
                    } else {
                        Tok::Var(w)
                    }
                }
                c if c.is_uppercase() => Tok::Var(self.word()),
                c if c.is_lowercase() => {
                    let w = self.word();
                    if w == "not" {
                        Tok::Not
                    } else {
                        Tok::Ident(w)
                    }
                }
                other => {
                    self.bump();
                    return Err(ParseError::new(
                        format!("unexpected character '{other}'"),
                        span,
                    ));
                }
            };
        Ok(Token { tok, span })
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer::new(text);
    let mut out = Vec::new();
    loop {
        let t = lx.next_token()?;
        let eof = t.tok == Tok::Eof;
        out.push(t);
        if eof {
            return Ok(out);
        }
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let t = self.peek();
        ParseError::new(
            format!("unexpected {}, expected {expected}", t.tok.describe()),
            t.span,
        )
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.advance())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut rules = Vec::new();
        loop {
            match &self.peek().tok {
                Tok::Eof => break,
                Tok::Directive(d) if d == "show" => {
                    self.advance();
                }
                Tok::Directive(d) => {
                    let d = d.clone();
                    return Err(ParseError::new(
                        format!("unsupported directive '#{d}'"),
                        self.peek().span,
                    ));
                }
                _ => rules.push(self.statement()?),
            }
        }
        Ok(Program { rules })
    }

    fn statement(&mut self) -> Result<Rule, ParseError> {
        let span = self.peek().span;
        let head = match self.peek().tok {
            Tok::If => None,
            Tok::Ident(_) => Some(self.atom()?),
            _ => return Err(self.unexpected("a rule head or ':-'")),
        };
        let body = match self.peek().tok {
            Tok::Period => {
                if head.is_none() {
                    return Err(self.unexpected("a rule body"));
                }
                Vec::new()
            }
            Tok::If => {
                self.advance();
                self.body()?
            }
            _ => {
                return Err(self.unexpected(if head.is_some() {
                    "'.' or ':-'"
                } else {
                    "':-'"
                }))
            }
        };
        self.expect(Tok::Period, "'.'")?;
        Ok(Rule { head, body, span })
    }

    fn body(&mut self) -> Result<Vec<BodyElement>, ParseError> {
        let mut body = Vec::new();
        loop {
            let lit = self.literal()?;
            if self.peek().tok == Tok::Colon {
                self.advance();
                let mut conditions = vec![self.literal()?];
                while self.peek().tok == Tok::Comma {
                    self.advance();
                    conditions.push(self.literal()?);
                }
                body.push(BodyElement::Conditional {
                    literal: lit,
                    conditions,
                });
            } else {
                body.push(BodyElement::Literal(lit));
            }
            match self.peek().tok {
                Tok::Comma | Tok::Semi => {
                    self.advance();
                }
                Tok::Period => return Ok(body),
                _ => return Err(self.unexpected("',', ';' or '.'")),
            }
        }
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        if self.peek().tok == Tok::Not {
            self.advance();
            if !matches!(self.peek().tok, Tok::Ident(_)) {
                return Err(self.unexpected("an atom after 'not'"));
            }
            return Ok(Literal::Naf(self.atom()?));
        }
        // an identifier not followed by an operator is an atom
        if let Tok::Ident(_) = self.peek().tok {
            let is_comparison_lhs = match self.peek_at(1) {
                Tok::Cmp(_) | Tok::Plus | Tok::Minus => true,
                Tok::LParen => false,
                _ => false,
            };
            if !is_comparison_lhs {
                return Ok(Literal::Positive(self.atom()?));
            }
        }
        let lhs = self.term()?;
        let op = match self.peek().tok {
            Tok::Cmp(op) => {
                self.advance();
                op
            }
            _ => return Err(self.unexpected("a comparison operator")),
        };
        let rhs = self.term()?;
        Ok(Literal::Comparison(Comparison { lhs, op, rhs }))
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let name = match self.advance().tok {
            Tok::Ident(n) => n,
            _ => unreachable!("caller checked for an identifier"),
        };
        let mut args = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.advance();
            if self.peek().tok == Tok::RParen {
                return Err(self.unexpected(&format!("an argument of '{name}'")));
            }
            loop {
                args.push(self.term()?);
                match self.peek().tok {
                    Tok::Comma => {
                        self.advance();
                    }
                    Tok::RParen => {
                        self.advance();
                        break;
                    }
                    _ => {
                        return Err(self
                            .unexpected(&format!("',' or ')' in the argument list of '{name}'")))
                    }
                }
            }
        }
        Ok(Atom {
            predicate: name,
            args,
        })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = Term::arith(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.advance();
            if let Tok::Int(n) = self.peek().tok {
                self.advance();
                return Ok(Term::Integer(-n));
            }
            let inner = self.unary()?;
            return Ok(Term::arith(ArithOp::Sub, Term::Integer(0), inner));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Int(n) => {
                self.advance();
                Ok(Term::Integer(n))
            }
            Tok::Var(v) => {
                self.advance();
                Ok(Term::Variable(v))
            }
            Tok::Anon => {
                self.advance();
                Ok(Term::Anonymous)
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Term::Quoted(s))
            }
            Tok::Ident(name) => {
                self.advance();
                if self.peek().tok == Tok::LParen {
                    return Err(ParseError::new(
                        format!("function term '{name}(...)' is not supported as an argument"),
                        t.span,
                    ));
                }
                Ok(Term::Constant(name))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            _ => Err(self.unexpected("a term")),
        }
    }
}

/// Parses program text. Comments are dropped and `#show` directives ignored.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let toks = tokenize(text)?;
    Parser { toks, pos: 0 }.program()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_fact() {
        let p = parse_program("block(a).").unwrap();
        assert_eq!(p.rules.len(), 1);
        assert!(p.rules[0].is_fact());
        assert_eq!(
            p.rules[0].head,
            Some(Atom::new("block", vec![Term::constant("a")]))
        );
    }

    #[test]
    fn quantifier_rule_has_conditional_naf() {
        let text = "query(Block):- block(Block), not object(_, _, black, _, OtherBlock): block(OtherBlock), OtherBlock != Block.";
        let p = parse_program(text).unwrap();
        let r = &p.rules[0];
        assert_eq!(r.body.len(), 2);
        match &r.body[1] {
            BodyElement::Conditional {
                literal: Literal::Naf(a),
                conditions,
            } => {
                assert_eq!(a.predicate, "object");
                assert_eq!(a.args[0], Term::Anonymous);
                assert_eq!(a.args[2], Term::constant("black"));
                assert_eq!(conditions.len(), 2);
                assert!(matches!(conditions[1], Literal::Comparison(_)));
            }
            other => panic!("expected conditional, got {other:?}"),
        }
    }

    #[test]
    fn unclosed_argument_list() {
        let e = parse_program("is(a left b.").unwrap_err();
        assert_eq!(e.span, Span { line: 1, col: 6 });
        assert!(e.message.contains("argument list of 'is'"), "{}", e.message);
        assert!(e.message.contains("'left'"));
    }

    #[test]
    fn missing_period() {
        let e = parse_program("a :- b").unwrap_err();
        assert!(e.message.contains("end of input"));
    }

    #[test]
    fn unbalanced_parens() {
        assert!(parse_program("p(a)).").is_err());
        assert!(parse_program("p((a).").is_err());
    }

    #[test]
    fn comments_and_show_are_dropped() {
        let p = parse_program("% header\na. %* block\n comment *% b :- a.\n#show b/0.\n").unwrap();
        assert_eq!(p.rules.len(), 2);
    }

    #[test]
    fn arithmetic_and_negative_integers() {
        let p = parse_program("at(O,X+1,Y-(-2)) :- at(O,X,Y), shift(O), X > -3.").unwrap();
        let head = p.rules[0].head.as_ref().unwrap();
        assert_eq!(
            head.args[1],
            Term::arith(ArithOp::Add, Term::var("X"), Term::Integer(1))
        );
        assert_eq!(
            head.args[2],
            Term::arith(ArithOp::Sub, Term::var("Y"), Term::Integer(-2))
        );
    }

    #[test]
    fn constraint_and_constant_comparison() {
        let p = parse_program(":- p(X), a != X.").unwrap();
        assert!(p.rules[0].is_constraint());
        assert!(matches!(
            p.rules[0].body[1],
            BodyElement::Literal(Literal::Comparison(_))
        ));
    }

    #[test]
    fn spans_point_at_rule_start() {
        let p = parse_program("a.\n  b :- a.").unwrap();
        assert_eq!(p.rules[1].span, Span { line: 2, col: 3 });
    }

    #[test]
    fn print_then_parse_is_identity() {
        let text = "query(Block) :- block(Block), not object(_,_,black,_,O):block(O),O!=Block; x(\"q s\").\n\
                    at(O,X+1,Y) :- at(O,X,Y), shift(O), X<=3.\n:- a, not b.\nc.\n";
        let p = parse_program(text).unwrap();
        let again = parse_program(&p.to_string()).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn negative_condition_is_not_a_rule_separator() {
        let p = parse_program(":- p : -1-a = a.").unwrap();
        assert_eq!(p.to_string(), ":- p: -1-a=a.\n");
        assert_eq!(parse_program(&p.to_string()).unwrap(), p);
    }
}
