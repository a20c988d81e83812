//! Recursive-descent parser for expressions and directives.

use super::lexer::{tokenize, Tok, Token};
use super::{BindKind, BracketEnd, Directive, DirectiveKind, ParseError, Segment, Span, Term, TermKind, Theory};

const RESERVED: [&str; 3] = ["inl", "inr", "case"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str) -> PResult<Parser> {
        Ok(Parser { toks: tokenize(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError::at(self.span(), expected.iter().map(|s| s.to_string()).collect(), self.peek().to_string()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<Span> {
        if self.peek() == &t {
            Ok(self.bump().span)
        } else {
            self.error(&[&t.to_string()])
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(&["an identifier"]),
        }
    }

    fn is_ident(&self, k: usize) -> bool {
        matches!(self.peek_at(k), Tok::Ident(s) if !RESERVED.contains(&s.as_str()))
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    /// prefix := '~' prefix | postfix
    fn expr(&mut self) -> PResult<Term> {
        if self.peek() == &Tok::Tilde {
            let start = self.bump().span;
            let inner = self.expr()?;
            let span = start.to(inner.span);
            return Ok(Term { kind: TermKind::Neg(Box::new(inner)), span });
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Term> {
        let mut t = self.atom()?;
        loop {
            let kind = match self.peek() {
                Tok::Proj1 => TermKind::ProjL(Box::new(t)),
                Tok::Proj2 => TermKind::ProjR(Box::new(t)),
                _ => return Ok(t),
            };
            let end = self.bump().span;
            let span = match &kind {
                TermKind::ProjL(a) | TermKind::ProjR(a) => a.span.to(end),
                _ => unreachable!(),
            };
            t = Term { kind, span };
        }
    }

    fn atom(&mut self) -> PResult<Term> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Tau => {
                self.bump();
                Ok(Term { kind: TermKind::Tau, span: start })
            }
            Tok::Ident(s) if s == "inl" || s == "inr" || s == "case" => {
                self.bump();
                self.expect(Tok::LBrace)?;
                let a = self.expr()?;
                self.expect(Tok::Comma)?;
                let b = self.expr()?;
                let end = self.expect(Tok::RBrace)?;
                let (a, b) = (Box::new(a), Box::new(b));
                let kind = match s.as_str() {
                    "inl" => TermKind::InjL(a, b),
                    "inr" => TermKind::InjR(a, b),
                    _ => TermKind::Case(a, b),
                };
                Ok(Term { kind, span: start.to(end) })
            }
            Tok::Ident(s) => {
                self.bump();
                if self.peek() == &Tok::LBrack && self.toks[self.pos].glued {
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while self.eat(&Tok::Comma) {
                        args.push(self.expr()?);
                    }
                    let end = self.expect(Tok::RBrack)?;
                    return Ok(Term { kind: TermKind::SchemeInst(s, args), span: start.to(end) });
                }
                Ok(Term { kind: TermKind::Ident(s), span: start })
            }
            Tok::LParen => {
                self.bump();
                let mut items = vec![self.expr()?];
                while self.peek() != &Tok::RParen {
                    if self.peek() == &Tok::Eof {
                        return self.error(&["`)`", "an expression"]);
                    }
                    items.push(self.expr()?);
                }
                let end = self.bump().span;
                if items.len() == 1 {
                    let mut t = items.pop().unwrap();
                    t.span = start.to(end);
                    Ok(t)
                } else {
                    Ok(Term { kind: TermKind::App(items), span: start.to(end) })
                }
            }
            Tok::LAngle => {
                self.bump();
                let t = self.protdef_inner(start)?;
                let end = self.expect(Tok::RAngle)?;
                Ok(Term { span: start.to(end), ..t })
            }
            Tok::LBrack => {
                self.bump();
                self.bracket(start)
            }
            _ => self.error(&["an expression"]),
        }
    }

    // After the opening delimiter: x := a, c : d
    fn protdef_inner(&mut self, start: Span) -> PResult<Term> {
        let name = self.ident()?;
        self.expect(Tok::ColonEq)?;
        let witness = self.expr()?;
        self.expect(Tok::Comma)?;
        let body = self.expr()?;
        self.expect(Tok::Colon)?;
        let template = self.expr()?;
        Ok(Term {
            kind: TermKind::ProtDef { name, witness: Box::new(witness), body: Box::new(body), template: Box::new(template) },
            span: start.to(self.prev_span()),
        })
    }

    // Is a binder group `x, y : A` or `x ! A` next?
    fn at_binder_group(&self) -> bool {
        let mut k = 0;
        loop {
            if !self.is_ident(k) {
                return false;
            }
            // A scheme instance `f[..]` is an expression, not a binder name.
            match self.peek_at(k + 1) {
                Tok::Colon | Tok::Bang => return true,
                Tok::Comma => k += 2,
                _ => return false,
            }
        }
    }

    fn bracket(&mut self, start: Span) -> PResult<Term> {
        if self.is_ident(0) && self.peek_at(1) == &Tok::ColonEq {
            let t = self.protdef_inner(start)?;
            let end = self.expect(Tok::RBrack)?;
            return Ok(Term { span: start.to(end), ..t });
        }
        if self.at_binder_group() {
            return self.binder_list(start, Vec::new());
        }
        let first = self.expr()?;
        match self.peek() {
            Tok::Comma => {
                let mut items = vec![first];
                while self.eat(&Tok::Comma) {
                    items.push(self.expr()?);
                }
                let end = self.expect(Tok::RBrack)?;
                Ok(Term { kind: TermKind::Product(items), span: start.to(end) })
            }
            Tok::Plus => {
                self.bump();
                let second = self.sum_rest()?;
                let end = self.expect(Tok::RBrack)?;
                Ok(Term { kind: TermKind::Sum(Box::new(first), Box::new(second)), span: start.to(end) })
            }
            Tok::Semi | Tok::Arrow => self.binder_list(start, vec![Segment::Premise(first)]),
            _ => self.error(&["`,`", "`+`", "`;`", "`=>`"]),
        }
    }

    // Right-nested `a + b + c`.
    fn sum_rest(&mut self) -> PResult<Term> {
        let t = self.expr()?;
        if self.peek() == &Tok::Plus {
            self.bump();
            let rest = self.sum_rest()?;
            let span = t.span.to(rest.span);
            return Ok(Term { kind: TermKind::Sum(Box::new(t), Box::new(rest)), span });
        }
        Ok(t)
    }

    fn binder_list(&mut self, start: Span, mut segments: Vec<Segment>) -> PResult<Term> {
        if segments.is_empty() {
            segments.push(self.segment()?);
        }
        loop {
            match self.peek() {
                Tok::Semi => {
                    self.bump();
                    segments.push(self.segment()?);
                }
                Tok::Arrow => {
                    self.bump();
                    let result = self.expr()?;
                    let end = self.expect(Tok::RBrack)?;
                    return Ok(Term {
                        kind: TermKind::Binder { segments, end: BracketEnd::Arrow(Box::new(result)) },
                        span: start.to(end),
                    });
                }
                Tok::RBrack => {
                    if segments.iter().any(|s| matches!(s, Segment::Premise(_))) {
                        return self.error(&["`=>`"]);
                    }
                    self.bump();
                    let body = self.expr()?;
                    let span = start.to(body.span);
                    return Ok(Term { kind: TermKind::Binder { segments, end: BracketEnd::Body(Box::new(body)) }, span });
                }
                _ => return self.error(&["`;`", "`]`", "`=>`"]),
            }
        }
    }

    fn segment(&mut self) -> PResult<Segment> {
        if self.at_binder_group() {
            let mut names = vec![self.ident()?];
            while self.eat(&Tok::Comma) {
                names.push(self.ident()?);
            }
            let kind = match self.peek() {
                Tok::Colon => BindKind::Univ,
                Tok::Bang => BindKind::Exist,
                _ => return self.error(&["`:`", "`!`"]),
            };
            self.bump();
            let ty = self.expr()?;
            Ok(Segment::Bind { kind, names, ty })
        } else {
            Ok(Segment::Premise(self.expr()?))
        }
    }

    fn directive(&mut self) -> PResult<Directive> {
        let start = self.span();
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.error(&["a directive keyword"]),
        };
        self.bump();
        let kind = match kw.as_str() {
            "axiom" => {
                let mut names = vec![self.ident()?];
                while self.eat(&Tok::Comma) {
                    names.push(self.ident()?);
                }
                self.expect(Tok::Colon)?;
                DirectiveKind::Axiom { names, ty: self.expr()? }
            }
            "def" => {
                let name = self.ident()?;
                let ty = if self.eat(&Tok::Colon) { Some(self.expr()?) } else { None };
                self.expect(Tok::ColonEq)?;
                DirectiveKind::Def { name, ty, body: self.expr()? }
            }
            "scheme" => {
                let name = self.ident()?;
                self.expect(Tok::LParen)?;
                let mut params = vec![self.ident()?];
                while self.eat(&Tok::Comma) {
                    params.push(self.ident()?);
                }
                self.expect(Tok::RParen)?;
                self.expect(Tok::Colon)?;
                DirectiveKind::Scheme { name, params, ty: self.expr()? }
            }
            "check" => {
                let subject = self.expr()?;
                self.expect(Tok::Colon)?;
                DirectiveKind::Check { subject, ty: self.expr()? }
            }
            "normalize" => DirectiveKind::Normalize(self.expr()?),
            "assert" => {
                if self.keyword("invalid") && self.peek_at(1) != &Tok::EqEq {
                    self.bump();
                    let subject = self.expr()?;
                    let ty = if self.eat(&Tok::Colon) { Some(self.expr()?) } else { None };
                    DirectiveKind::AssertInvalid { subject, ty }
                } else {
                    let a = self.expr()?;
                    self.expect(Tok::EqEq)?;
                    DirectiveKind::AssertConverts(a, self.expr()?)
                }
            }
            _ => {
                self.pos -= 1;
                return self.error(&["`axiom`", "`def`", "`scheme`", "`check`", "`normalize`", "`assert`"]);
            }
        };
        let end = self.expect(Tok::Dot)?;
        Ok(Directive { kind, span: start.to(end) })
    }
}

/// Parse a theory file.
pub fn parse_theory(src: &str) -> Result<Theory, ParseError> {
    let mut p = Parser::new(src)?;
    let mut directives = Vec::new();
    while p.peek() != &Tok::Eof {
        directives.push(p.directive()?);
    }
    Ok(Theory { directives })
}

/// Parse a single surface expression.
pub fn parse_expr_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.expr()?;
    if p.peek() != &Tok::Eof {
        return p.error(&["end of input"]);
    }
    Ok(t)
}
