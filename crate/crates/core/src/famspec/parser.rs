use super::lexer::{lex, parse_complex, parse_real, Tok};
use super::{Decl, Located, Matrix, Member, ParseDiagnostic, Pos, ProjDef, SlotSpec, MAX_DIM};
use crate::hilbert::ComplexScalar;

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

type PResult<T> = Result<T, ParseDiagnostic>;

impl Parser {
    fn pos(&self) -> Pos {
        self.toks.get(self.at).map_or(self.end, |t| t.1)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseDiagnostic::error(msg, self.pos()))
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Number(s)) => format!("number `{s}`"),
            Some(Tok::Sym(c)) => format!("`{c}`"),
        }
    }

    fn sym(&mut self, c: char) -> PResult<()> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            Ok(())
        } else {
            self.fail(format!("expected `{c}`, found {}", self.describe()))
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        let hit = self.peek() == Some(&Tok::Sym(c));
        if hit {
            self.at += 1;
        }
        hit
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        if self.is_keyword(kw) {
            self.at += 1;
            Ok(())
        } else {
            self.fail(format!("expected `{kw}`, found {}", self.describe()))
        }
    }

    fn name(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => self.fail(format!("expected a name, found {}", self.describe())),
        }
    }

    fn number(&mut self) -> PResult<(String, Pos)> {
        match self.peek() {
            Some(Tok::Number(s)) => {
                let out = (s.clone(), self.pos());
                self.at += 1;
                Ok(out)
            }
            _ => self.fail(format!("expected a number, found {}", self.describe())),
        }
    }

    fn int(&mut self) -> PResult<usize> {
        let (s, pos) = self.number()?;
        s.parse::<usize>()
            .map_err(|_| ParseDiagnostic::error(format!("expected a non-negative integer, found `{s}`"), pos))
    }

    fn real(&mut self) -> PResult<f64> {
        let (s, pos) = self.number()?;
        parse_real(&s).ok_or_else(|| ParseDiagnostic::error(format!("invalid real number `{s}`"), pos))
    }

    fn complex(&mut self) -> PResult<ComplexScalar> {
        let (s, pos) = self.number()?;
        parse_complex(&s)
            .map(|(a, b)| ComplexScalar::new(a, b))
            .ok_or_else(|| ParseDiagnostic::error(format!("invalid complex number `{s}`"), pos))
    }

    /// `open item {sep item} close`, with `sep` optional when `None`.
    fn list<T>(
        &mut self,
        open: char,
        close: char,
        sep: Option<char>,
        mut item: impl FnMut(&mut Self) -> PResult<T>,
    ) -> PResult<Vec<T>> {
        self.sym(open)?;
        let mut out = Vec::new();
        if self.eat_sym(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat_sym(close) {
                return Ok(out);
            }
            match sep {
                Some(c) => self.sym(c)?,
                None => {
                    self.eat_sym(',');
                }
            }
        }
    }

    fn matrix(&mut self) -> PResult<Matrix> {
        if self.is_keyword("sparse") {
            self.at += 1;
            let entries = self.list('{', '}', None, |p| {
                let i = p.int()?;
                let j = p.int()?;
                Ok((i, j, p.complex()?))
            })?;
            return Ok(Matrix::Sparse(entries));
        }
        let rows = self.list('[', ']', None, |p| p.list('[', ']', None, Self::complex))?;
        Ok(Matrix::Dense(rows))
    }

    fn decl(&mut self) -> PResult<Located> {
        let pos = self.pos();
        let kw = self.name()?;
        let decl = match kw.as_str() {
            "space" => {
                let name = self.name()?;
                self.keyword("dim")?;
                let dpos = self.pos();
                let dim = self.int()?;
                if dim == 0 || dim > MAX_DIM {
                    return Err(ParseDiagnostic::error(
                        format!("dimension {dim} outside 1..={MAX_DIM}"),
                        dpos,
                    ));
                }
                Decl::Space { name, dim }
            }
            "ket" => {
                let name = self.name()?;
                self.keyword("in")?;
                let space = self.name()?;
                self.sym('=')?;
                let amps = self.list('[', ']', Some(','), Self::complex)?;
                Decl::Ket { name, space, amps }
            }
            "unitary" | "density" => {
                let name = self.name()?;
                self.keyword("on")?;
                let space = self.name()?;
                self.sym('=')?;
                let matrix = self.matrix()?;
                if kw == "unitary" {
                    Decl::Unitary { name, space, matrix }
                } else {
                    Decl::Density { name, space, matrix }
                }
            }
            "proj" => {
                let name = self.name()?;
                self.keyword("on")?;
                let space = self.name()?;
                self.sym('=')?;
                let def = if self.is_keyword("span") {
                    self.at += 1;
                    ProjDef::Span(self.list('(', ')', Some(','), Self::name)?)
                } else {
                    ProjDef::Matrix(self.matrix()?)
                };
                Decl::Proj { name, space, def }
            }
            "decomp" => {
                let name = self.name()?;
                self.keyword("on")?;
                let space = self.name()?;
                self.sym('=')?;
                let members = self.list('{', '}', Some(','), |p| {
                    let proj = p.name()?;
                    let label = if p.is_keyword("as") {
                        p.at += 1;
                        Some(p.name()?)
                    } else {
                        None
                    };
                    Ok(Member { proj, label })
                })?;
                Decl::Decomp { name, space, members }
            }
            "times" => {
                let name = self.name()?;
                self.sym('=')?;
                let values = self.list('[', ']', Some(','), Self::real)?;
                Decl::Times { name, values }
            }
            "family" => {
                let name = self.name()?;
                self.keyword("times")?;
                let times = self.name()?;
                let initial = if self.is_keyword("initial") {
                    self.at += 1;
                    Some(self.name()?)
                } else {
                    None
                };
                self.sym('{')?;
                let mut slots = Vec::new();
                while !self.eat_sym('}') {
                    let spos = self.pos();
                    self.keyword("at")?;
                    let t = self.real()?;
                    self.sym(':')?;
                    let d = self.name()?;
                    let slot = if d == "identity" {
                        SlotSpec::Identity
                    } else {
                        SlotSpec::Decomp(d)
                    };
                    slots.push((t, slot, spos));
                }
                self.keyword("steps")?;
                let steps = self.list('{', '}', None, Self::name)?;
                Decl::Family {
                    name,
                    times,
                    initial,
                    slots,
                    steps,
                }
            }
            other => {
                return Err(ParseDiagnostic::error(
                    format!("expected a declaration keyword, found `{other}`"),
                    pos,
                ))
            }
        };
        Ok(Located { pos, decl })
    }
}

pub(super) fn parse_decls(text: &str) -> PResult<Vec<Located>> {
    let toks = lex(text)?;
    let end = match text.lines().count() {
        0 => Pos { line: 1, column: 1 },
        n => Pos {
            line: n,
            column: text.lines().last().map_or(0, |l| l.chars().count()) + 1,
        },
    };
    let mut p = Parser { toks, at: 0, end };
    let mut out = Vec::new();
    while p.peek().is_some() {
        if !matches!(p.peek(), Some(Tok::Ident(_))) {
            return p.fail(format!("expected a declaration, found {}", p.describe()));
        }
        out.push(p.decl()?);
    }
    Ok(out)
}
