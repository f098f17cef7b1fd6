//! Tokenizer shared by the fact, theory, domain and library readers.

use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    Comma,
    Dot,
    DotDot,
    Neck,
    Colon,
    Semi,
    Arrow,
    At,
    Op(char),
    Cmp(String),
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

/// Tokenizes `src`, which starts at `line`. `#` starts a comment outside
/// string literals.
pub fn tokenize(src: &str, line: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = line;
    let mut line_start = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i - line_start + 1;
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, column });
        match c {
            '\n' => {
                line += 1;
                i += 1;
                line_start = i;
            }
            c if c.is_whitespace() => i += 1,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                push(&mut out, Tok::LParen);
                i += 1;
            }
            ')' => {
                push(&mut out, Tok::RParen);
                i += 1;
            }
            ',' => {
                push(&mut out, Tok::Comma);
                i += 1;
            }
            ';' => {
                push(&mut out, Tok::Semi);
                i += 1;
            }
            '@' => {
                push(&mut out, Tok::At);
                i += 1;
            }
            '.' => {
                if chars.get(i + 1) == Some(&'.') {
                    push(&mut out, Tok::DotDot);
                    i += 2;
                } else {
                    push(&mut out, Tok::Dot);
                    i += 1;
                }
            }
            ':' => {
                if chars.get(i + 1) == Some(&'-') {
                    push(&mut out, Tok::Neck);
                    i += 2;
                } else {
                    push(&mut out, Tok::Colon);
                    i += 1;
                }
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                push(&mut out, Tok::Arrow);
                i += 2;
            }
            '-' if chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())
                && !matches!(out.last().map(|t: &Token| &t.tok), Some(Tok::Int(_) | Tok::Ident(_) | Tok::RParen)) =>
            {
                let (n, next) = read_int(&chars, i + 1, line, column)?;
                push(&mut out, Tok::Int(-n));
                i = next;
            }
            '+' | '-' | '*' => {
                push(&mut out, Tok::Op(c));
                i += 1;
            }
            '=' | '<' | '>' | '!' => {
                let mut op = c.to_string();
                if chars.get(i + 1) == Some(&'=') {
                    op.push('=');
                    i += 1;
                }
                if op == "!" {
                    return Err(ParseError::new(line, column, "unexpected '!'"));
                }
                push(&mut out, Tok::Cmp(op));
                i += 1;
            }
            '"' | '\'' => {
                let quote = c;
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None | Some('\n') => return Err(ParseError::new(line, column, "unterminated string")),
                        Some('\\') => {
                            if let Some(&n) = chars.get(i + 1) {
                                s.push(n);
                            }
                            i += 2;
                        }
                        Some(&q) if q == quote => {
                            i += 1;
                            break;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                push(&mut out, Tok::Str(s));
            }
            c if c.is_ascii_digit() => {
                let (n, next) = read_int(&chars, i, line, column)?;
                push(&mut out, Tok::Int(n));
                i = next;
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(ParseError::new(line, column, format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

fn read_int(chars: &[char], mut i: usize, line: usize, column: usize) -> Result<(i64, usize), ParseError> {
    let start = i;
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    let text: String = chars[start..i].iter().collect();
    let n = text.parse::<i64>().map_err(|_| ParseError::new(line, column, format!("integer out of range: {text}")))?;
    Ok((n, i))
}

/// Cursor over a token slice with position-aware errors.
pub struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    eof_line: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Token], eof_line: usize) -> Self {
        Cursor { toks, pos: 0, eof_line }
    }

    pub fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek_at(&self, k: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    pub fn bump(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn position(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.column),
            None => self.toks.last().map_or((self.eof_line, 1), |t| (t.line, t.column + 1)),
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.position();
        ParseError::new(l, c, msg)
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    pub fn int(&mut self, what: &str) -> Result<i64, ParseError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(*n)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let toks = tokenize("P(a, -3, \"NW Top\"). # tail\nQ :- R", 1).unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(kinds[4], Tok::Int(-3));
        assert_eq!(kinds[6], Tok::Str("NW Top".into()));
        let q = toks.iter().find(|t| t.tok == Tok::Ident("Q".into())).unwrap();
        assert_eq!((q.line, q.column), (2, 1));
        assert!(toks.iter().any(|t| t.tok == Tok::Neck));
    }

    #[test]
    fn minus_after_identifier_is_an_operator() {
        let toks = tokenize("H-1 0..W-1", 1).unwrap();
        let kinds: Vec<_> = toks.into_iter().map(|t| t.tok).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Ident("H".into()),
                Tok::Op('-'),
                Tok::Int(1),
                Tok::Int(0),
                Tok::DotDot,
                Tok::Ident("W".into()),
                Tok::Op('-'),
                Tok::Int(1)
            ]
        );
    }

    #[test]
    fn unterminated_string() {
        let e = tokenize("P(\"abc)", 3).unwrap_err();
        assert_eq!(e.line, 3);
    }
}
