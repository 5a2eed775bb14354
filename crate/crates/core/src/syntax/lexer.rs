use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// Digits with an optional `/digits` part.
    Number(String),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: &[&str] = &["->", "\\\\", "\\", "=", ";", ".", "+", "|", "{", "}", ",", "(", ")", "'", ":", "-"];

/// Splits `text` into identifiers, numbers and symbols, dropping whitespace
/// and `#` comments.
pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut j = 0;
        while j < chars.len() {
            let c = chars[j];
            let (lno, col) = (i + 1, j + 1);
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                j += 1;
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let start = j;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[start..j].iter().collect()), line: lno, col });
                continue;
            }
            if c.is_ascii_digit() {
                let start = j;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j + 1 < chars.len() && chars[j] == '/' && chars[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && (chars[j].is_alphabetic() || chars[j] == '/') {
                    return Err(ParseError::new(lno, col, format!("malformed number `{}`", rest_of_word(&chars, start))));
                }
                out.push(Token { tok: Tok::Number(chars[start..j].iter().collect()), line: lno, col });
                continue;
            }
            let rest: String = chars[j..].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    out.push(Token { tok: Tok::Sym(s), line: lno, col });
                    j += s.chars().count();
                }
                None => return Err(ParseError::new(lno, col, format!("unexpected character `{c}`"))),
            }
        }
    }
    Ok(out)
}

fn rest_of_word(chars: &[char], start: usize) -> String {
    chars[start..].iter().take_while(|c| !c.is_whitespace() && !matches!(c, ',' | ';')).collect()
}

/// A cursor over tokens that remembers the end of input for error positions.
pub(crate) struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Cursor {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        let tokens = tokenize(text)?;
        let lines: Vec<&str> = text.lines().collect();
        let end = match lines.last() {
            Some(l) => (lines.len(), l.chars().count() + 1),
            None => (1, 1),
        };
        Ok(Cursor { tokens, pos: 0, end })
    }

    pub fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    pub fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.col)).unwrap_or(self.end)
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        let found = match self.peek() {
            Some(t) => describe(&t.tok),
            None => "end of input".into(),
        };
        ParseError::new(line, col, format!("{}, found {found}", message.into()))
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Sym(t), .. }) if *t == s)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<Token, ParseError> {
        if self.is_sym(s) {
            Ok(self.next().expect("peeked"))
        } else {
            Err(self.error(format!("expected `{s}`")))
        }
    }

    pub fn expect_ident(&mut self, what: &str) -> Result<(String, usize, usize), ParseError> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(name), line, col }) => {
                let out = (name.clone(), *line, *col);
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }
}

pub(crate) fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(s) => format!("`{s}`"),
        Tok::Sym(s) => format!("`{s}`"),
    }
}
