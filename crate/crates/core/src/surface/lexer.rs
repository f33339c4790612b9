use super::error::{ParseError, ParseErrorKind, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `#name`
    OracleName(String),
    Number(String),
    Str(String),
    Backslash,
    /// `\\`
    DoubleBackslash,
    Colon,
    Dot,
    /// `.0` / `.1`
    ProjDot(usize),
    Bang,
    LAngle,
    RAngle,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Slash,
    Arrow,
    /// `/\`
    Wedge,
    Star,
    Eq,
    Minus,
    Caret,
    Semi,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::OracleName(s) => format!("oracle `#{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Str(_) => "string literal".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Backslash => "\\",
            Tok::DoubleBackslash => "\\\\",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::ProjDot(0) => ".0",
            Tok::ProjDot(_) => ".1",
            Tok::Bang => "!",
            Tok::LAngle => "<",
            Tok::RAngle => ">",
            Tok::Comma => ",",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Slash => "/",
            Tok::Arrow => "->",
            Tok::Wedge => "/\\",
            Tok::Star => "*",
            Tok::Eq => "=",
            Tok::Minus => "-",
            Tok::Caret => "^",
            Tok::Semi => ";",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub start: Pos,
    pub end: Pos,
    /// First token of its line, starting in column 1.
    pub at_margin: bool,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let mut line_has_token = false;

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            line_has_token = false;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = Pos { line, col };
        let at_margin = !line_has_token && col == 1;
        line_has_token = true;
        let peek = |k: usize| chars.get(i + k).copied();
        let (tok, len) = if is_ident_start(c) {
            let mut j = i;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            (Tok::Number(chars[i..j].iter().collect()), j - i)
        } else if c == '#' {
            let mut j = i + 1;
            if j >= chars.len() || !is_ident_start(chars[j]) {
                return Err(ParseError::new(
                    ParseErrorKind::Lexical,
                    start,
                    "expected oracle name after `#`",
                ));
            }
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            (Tok::OracleName(chars[i + 1..j].iter().collect()), j - i)
        } else if c == '"' {
            let mut j = i + 1;
            let mut s = String::new();
            loop {
                match chars.get(j) {
                    None | Some('\n') => {
                        return Err(ParseError::new(
                            ParseErrorKind::Lexical,
                            start,
                            "unterminated string literal",
                        ))
                    }
                    Some('"') => break,
                    Some('\\') if matches!(chars.get(j + 1), Some('"') | Some('\\')) => {
                        s.push(chars[j + 1]);
                        j += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        j += 1;
                    }
                }
            }
            (Tok::Str(s), j + 1 - i)
        } else {
            match c {
                '\\' if peek(1) == Some('\\') => (Tok::DoubleBackslash, 2),
                '\\' => (Tok::Backslash, 1),
                ':' => (Tok::Colon, 1),
                '.' => match (peek(1), peek(2)) {
                    (Some(d @ ('0' | '1')), next) if !next.is_some_and(is_ident_char) => {
                        (Tok::ProjDot(if d == '0' { 0 } else { 1 }), 2)
                    }
                    _ => (Tok::Dot, 1),
                },
                '!' => (Tok::Bang, 1),
                '<' => (Tok::LAngle, 1),
                '>' => (Tok::RAngle, 1),
                ',' => (Tok::Comma, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '[' => (Tok::LBracket, 1),
                ']' => (Tok::RBracket, 1),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                '/' if peek(1) == Some('\\') => (Tok::Wedge, 2),
                '/' => (Tok::Slash, 1),
                '-' if peek(1) == Some('>') => (Tok::Arrow, 2),
                '-' => (Tok::Minus, 1),
                '*' => (Tok::Star, 1),
                '=' => (Tok::Eq, 1),
                '^' => (Tok::Caret, 1),
                ';' => (Tok::Semi, 1),
                other => {
                    return Err(ParseError::new(
                        ParseErrorKind::Lexical,
                        start,
                        format!("unexpected character `{other}`"),
                    ))
                }
            }
        };
        i += len;
        col += len;
        toks.push(Token {
            tok,
            start,
            end: Pos { line, col },
            at_margin,
        });
    }
    Ok(toks)
}
