use super::lexer::{tokenize, Token, TokenKind};
use super::{Angle, Expr, ExprKind, FamilySpec, MapSpec, ParseError, Span};
use crate::operator::DEFAULT_SERIES_EPSILON;

const MAX_NESTING: usize = 128;

pub(crate) struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub(crate) fn new(src: &str) -> PResult<Self> {
        Ok(Parser {
            tokens: tokenize(src)?,
            pos: 0,
            depth: 0,
        })
    }

    pub(crate) fn parse_all(mut self) -> PResult<Expr> {
        let e = self.expr()?;
        if self.peek().kind != TokenKind::Eof {
            return Err(self.unexpected(&["end of input"]));
        }
        Ok(e)
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError::syntax(
            t.span.start,
            expected.iter().map(|s| s.to_string()).collect(),
            t.kind.describe(),
        )
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<Token> {
        if self.peek().kind == kind {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&[&kind.describe()]))
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if &self.peek().kind == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, word: &str) -> PResult<Token> {
        match &self.peek().kind {
            TokenKind::Ident(s) if s == word => Ok(self.bump()),
            _ => Err(self.unexpected(&[&format!("`{word}`")])),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            let at = self.peek().span.start;
            return Err(ParseError::elaboration(
                at,
                format!("nesting deeper than {MAX_NESTING}"),
            ));
        }
        let result = self.expr_inner();
        self.depth -= 1;
        result
    }

    fn expr_inner(&mut self) -> PResult<Expr> {
        const STARTS: &[&str] = &[
            "`id`",
            "`rot`",
            "`refl`",
            "`Mp`",
            "`L`",
            "`series`",
            "`compose`",
            "`unchecked`",
        ];
        let head = self.peek().clone();
        let TokenKind::Ident(name) = &head.kind else {
            return Err(self.unexpected(STARTS));
        };
        let start = head.span.start;
        let kind = match name.as_str() {
            "id" => {
                self.bump();
                ExprKind::Identity
            }
            "unchecked" => {
                self.bump();
                ExprKind::Unchecked(Box::new(self.expr()?))
            }
            "rot" | "refl" => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let angle = self.angle()?;
                self.expect(TokenKind::RParen)?;
                if name == "rot" {
                    ExprKind::Rot(angle)
                } else {
                    ExprKind::Refl(angle)
                }
            }
            "Mp" => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let p = self.number()?;
                self.expect(TokenKind::Semi)?;
                let args = self.args()?;
                ExprKind::PowerMean { p, args }
            }
            "L" => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let map = self.map()?;
                self.expect(TokenKind::Semi)?;
                let args = self.args()?;
                ExprKind::Lipschitz { map, args }
            }
            "series" => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                self.keyword("geom")?;
                self.expect(TokenKind::LParen)?;
                let c = self.number()?;
                self.expect(TokenKind::Comma)?;
                let r = self.number()?;
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::Comma)?;
                let family = self.family()?;
                let eps = if self.eat(&TokenKind::Semi) {
                    self.keyword("eps")?;
                    self.expect(TokenKind::Eq)?;
                    self.number()?
                } else {
                    DEFAULT_SERIES_EPSILON
                };
                self.expect(TokenKind::RParen)?;
                ExprKind::Series { c, r, family, eps }
            }
            "compose" => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let outer = self.expr()?;
                self.expect(TokenKind::Comma)?;
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                ExprKind::Compose(Box::new(outer), Box::new(inner))
            }
            _ => return Err(self.unexpected(STARTS)),
        };
        let end = self.tokens[self.pos.saturating_sub(1)].span.end;
        Ok(Expr {
            kind,
            span: Span::new(start, end.max(start)),
        })
    }

    /// `expr (',' expr)* ')'`
    fn args(&mut self) -> PResult<Vec<Expr>> {
        let mut out = vec![self.expr()?];
        loop {
            if self.eat(&TokenKind::Comma) {
                out.push(self.expr()?);
            } else if self.eat(&TokenKind::RParen) {
                return Ok(out);
            } else {
                return Err(self.unexpected(&["`,`", "`)`"]));
            }
        }
    }

    fn number(&mut self) -> PResult<f64> {
        let negative = self.eat(&TokenKind::Minus);
        match self.peek().kind {
            TokenKind::Number(v) => {
                self.bump();
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.unexpected(&["a number"])),
        }
    }

    fn integer(&mut self) -> PResult<u64> {
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Number(v) if v.fract() == 0.0 && v >= 0.0 && v <= u32::MAX as f64 => {
                self.bump();
                Ok(v as u64)
            }
            _ => Err(self.unexpected(&["an integer"])),
        }
    }

    fn angle(&mut self) -> PResult<Angle> {
        let negative = self.eat(&TokenKind::Minus);
        let sign = if negative { -1 } else { 1 };
        let mut num = 1i64;
        if let TokenKind::Number(_) = self.peek().kind {
            num = self.integer()? as i64;
            if num == 0
                && !matches!(&self.peek().kind, TokenKind::Ident(s) if s == "pi")
                && self.peek().kind != TokenKind::Star
            {
                return Ok(Angle { num: 0, den: 1 });
            }
            self.eat(&TokenKind::Star);
        }
        match &self.peek().kind {
            TokenKind::Ident(s) if s == "pi" => {
                self.bump();
            }
            _ => return Err(self.unexpected(&["`pi`"])),
        }
        let mut den = 1u64;
        if self.eat(&TokenKind::Slash) {
            let at = self.peek().span.start;
            den = self.integer()?;
            if den == 0 {
                return Err(ParseError::elaboration(at, "angle denominator is zero"));
            }
        }
        Ok(Angle {
            num: sign * num,
            den,
        })
    }

    fn map(&mut self) -> PResult<MapSpec> {
        let t = self.peek().clone();
        let TokenKind::Ident(name) = &t.kind else {
            return Err(self.unexpected(&["`max`", "`min`", "`proj`", "`convex`"]));
        };
        match name.as_str() {
            "max" => {
                self.bump();
                Ok(MapSpec::Max)
            }
            "min" => {
                self.bump();
                Ok(MapSpec::Min)
            }
            "proj" => {
                self.bump();
                self.expect(TokenKind::Colon)?;
                Ok(MapSpec::Proj(self.integer()? as usize))
            }
            "convex" => {
                self.bump();
                self.expect(TokenKind::Colon)?;
                let mut weights = vec![self.number()?];
                while self.eat(&TokenKind::Comma) {
                    weights.push(self.number()?);
                }
                Ok(MapSpec::Convex(weights))
            }
            _ => Err(self.unexpected(&["`max`", "`min`", "`proj`", "`convex`"])),
        }
    }

    fn family(&mut self) -> PResult<FamilySpec> {
        match &self.peek().kind {
            TokenKind::Ident(s) if s == "rot-family" => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let a = self.angle()?;
                self.expect(TokenKind::RParen)?;
                Ok(FamilySpec::Rotations(a))
            }
            TokenKind::Ident(s) if s == "const-family" => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let e = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(FamilySpec::Constant(Box::new(e)))
            }
            _ => Err(self.unexpected(&["`rot-family`", "`const-family`"])),
        }
    }
}
