use crate::diagnostic::{Code, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Str(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Colon,
    Comma,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("'{s}'"),
            TokenKind::Str(_) => "string".to_string(),
            TokenKind::LBrace => "'{'".to_string(),
            TokenKind::RBrace => "'}'".to_string(),
            TokenKind::LBracket => "'['".to_string(),
            TokenKind::RBracket => "']'".to_string(),
            TokenKind::Colon => "':'".to_string(),
            TokenKind::Comma => "','".to_string(),
            TokenKind::Eof => "end of file".to_string(),
        }
    }
}

/// Line/column position, both 1-based; columns count characters.
pub type Pos = (u32, u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub start: Pos,
    pub end: Pos,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn pos(&self) -> Pos {
        (self.line, self.col)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
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
}

/// Tokenizes `text`. Lexical errors are collected rather than fatal, so the
/// caller sees every bad character at once. The token list always ends with
/// `Eof`.
pub fn lex(text: &str, file: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let span = |start: Pos, end: Pos| SourceSpan::new(file, start, end);

    while let Some(c) = cur.peek() {
        let start = cur.pos();
        let simple = match c {
            '{' => Some(TokenKind::LBrace),
            '}' => Some(TokenKind::RBrace),
            '[' => Some(TokenKind::LBracket),
            ']' => Some(TokenKind::RBracket),
            ':' => Some(TokenKind::Colon),
            ',' => Some(TokenKind::Comma),
            _ => None,
        };
        if let Some(kind) = simple {
            cur.bump();
            tokens.push(Token {
                kind,
                start,
                end: cur.pos(),
            });
            continue;
        }
        if c.is_whitespace() {
            cur.bump();
        } else if c == '/' {
            cur.bump();
            if cur.peek() == Some('/') {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            } else {
                diags.push(
                    Diagnostic::error(Code::Lex, "unexpected character '/'")
                        .at_span(span(start, cur.pos())),
                );
            }
        } else if c == '"' {
            cur.bump();
            let mut value = String::new();
            let mut closed = false;
            while let Some(c) = cur.bump() {
                match c {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' => {
                        let esc_start = cur.pos();
                        match cur.bump() {
                            Some(e @ ('"' | '\\')) => value.push(e),
                            Some(other) => diags.push(
                                Diagnostic::error(
                                    Code::Lex,
                                    format!("invalid escape '\\{}'", other.escape_debug()),
                                )
                                .at_span(span(esc_start, cur.pos())),
                            ),
                            None => break,
                        }
                    }
                    other => value.push(other),
                }
            }
            if !closed {
                diags.push(
                    Diagnostic::error(Code::Lex, "unterminated string")
                        .at_span(span(start, cur.pos())),
                );
            }
            tokens.push(Token {
                kind: TokenKind::Str(value),
                start,
                end: cur.pos(),
            });
        } else if c.is_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(c) = cur.peek() {
                if c.is_alphanumeric() || c == '_' {
                    ident.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            tokens.push(Token {
                kind: TokenKind::Ident(ident),
                start,
                end: cur.pos(),
            });
        } else {
            cur.bump();
            diags.push(
                Diagnostic::error(
                    Code::Lex,
                    format!("unexpected character '{}'", c.escape_debug()),
                )
                .at_span(span(start, cur.pos())),
            );
        }
    }
    let eof = cur.pos();
    tokens.push(Token {
        kind: TokenKind::Eof,
        start: eof,
        end: eof,
    });
    (tokens, diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        let (toks, diags) = lex(src, "t.cuta");
        assert!(diags.is_empty(), "{diags:?}");
        toks.into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn punctuation_idents_and_strings() {
        assert_eq!(
            kinds("role:\"Clerk\" in [\"a\\\"b\", x_1] // trailing\n}"),
            vec![
                TokenKind::Ident("role".into()),
                TokenKind::Colon,
                TokenKind::Str("Clerk".into()),
                TokenKind::Ident("in".into()),
                TokenKind::LBracket,
                TokenKind::Str("a\"b".into()),
                TokenKind::Comma,
                TokenKind::Ident("x_1".into()),
                TokenKind::RBracket,
                TokenKind::RBrace,
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let (toks, _) = lex("a\n  {", "t");
        assert_eq!(toks[0].start, (1, 1));
        assert_eq!(toks[1].start, (2, 3));
        assert_eq!(toks[1].end, (2, 4));
    }

    #[test]
    fn errors_are_collected() {
        let (_, diags) = lex("@ \"x\\q\" \"open", "t");
        let msgs: Vec<_> = diags.iter().map(|d| d.message.as_str()).collect();
        assert_eq!(
            msgs,
            vec![
                "unexpected character '@'",
                "invalid escape '\\q'",
                "unterminated string"
            ]
        );
        assert!(diags.iter().all(|d| d.span.is_some()));
    }
}
