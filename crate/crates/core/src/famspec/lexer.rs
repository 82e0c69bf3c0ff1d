use super::{ParseDiagnostic, Pos};

#[derive(Clone, Debug, PartialEq)]
pub(super) enum Tok {
    Ident(String),
    /// Raw numeric literal; interpreted as integer, real or complex by the parser.
    Number(String),
    Sym(char),
}

pub(super) fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(super) fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '\'' | '*' | '+' | '-')
}

fn is_number_char(c: char) -> bool {
    c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-' | 'i')
}

pub(super) fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseDiagnostic> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        let mut take = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().expect("peeked");
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c.is_whitespace() {
            take(&mut chars);
        } else if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                take(&mut chars);
            }
        } else if is_name_start(c) {
            let mut s = String::new();
            while chars.peek().is_some_and(|&c| is_name_char(c)) {
                s.push(take(&mut chars));
            }
            out.push((Tok::Ident(s), pos));
        } else if c.is_ascii_digit() || matches!(c, '.' | '+' | '-') {
            let mut s = String::new();
            while chars.peek().is_some_and(|&c| is_number_char(c)) {
                s.push(take(&mut chars));
            }
            out.push((Tok::Number(s), pos));
        } else if "=[]{}(),:".contains(c) {
            take(&mut chars);
            out.push((Tok::Sym(c), pos));
        } else {
            return Err(ParseDiagnostic::error(format!("unexpected character {c:?}"), pos));
        }
    }
    Ok(out)
}

pub(super) fn parse_real(s: &str) -> Option<f64> {
    if s.is_empty() || s.contains('i') {
        return None;
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// `a`, `bi`, `a+bi`, `a-bi`; a bare sign before `i` means ±1.
pub(super) fn parse_complex(s: &str) -> Option<(f64, f64)> {
    let Some(body) = s.strip_suffix('i') else {
        return parse_real(s).map(|x| (x, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| match t {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        t => parse_real(t),
    };
    match split {
        Some(k) => Some((parse_real(&body[..k])?, imag(&body[k..])?)),
        None => Some((0.0, imag(body)?)),
    }
}
