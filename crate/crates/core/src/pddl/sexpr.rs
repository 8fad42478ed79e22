//! S-expression reader with source positions. Symbols are lower-cased; `;` starts a comment.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Sexpr {
    Atom { text: String, line: usize, col: usize },
    List { items: Vec<Sexpr>, line: usize, col: usize },
}

impl Sexpr {
    pub fn pos(&self) -> (usize, usize) {
        match self {
            Sexpr::Atom { line, col, .. } | Sexpr::List { line, col, .. } => (*line, *col),
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom { text, .. } => Some(text),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List { items, .. } => Some(items),
            _ => None,
        }
    }

    /// Head symbol of a list, if any.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(|h| h.atom())
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.pos();
        Error::Parse { line, col, msg: msg.into() }
    }
}

/// Parse every top-level expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexpr>> {
    let mut stack: Vec<(Vec<Sexpr>, usize, usize)> = Vec::new();
    let mut top = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                stack.push((Vec::new(), line, col));
                col += 1;
            }
            ')' => {
                chars.next();
                let Some((items, l, c0)) = stack.pop() else {
                    return Err(Error::Parse { line, col, msg: "unbalanced `)`".into() });
                };
                let e = Sexpr::List { items, line: l, col: c0 };
                match stack.last_mut() {
                    Some(parent) => parent.0.push(e),
                    None => top.push(e),
                }
                col += 1;
            }
            _ => {
                let (l, c0) = (line, col);
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    chars.next();
                    col += 1;
                }
                let e = Sexpr::Atom { text: s.to_lowercase(), line: l, col: c0 };
                match stack.last_mut() {
                    Some(parent) => parent.0.push(e),
                    None => top.push(e),
                }
            }
        }
    }
    if let Some((_, l, c)) = stack.last() {
        return Err(Error::Parse { line: *l, col: *c, msg: "unclosed `(`".into() });
    }
    Ok(top)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_and_case() {
        let v = parse_all("(Define ; c\n  (Foo ?X))").unwrap();
        let items = v[0].list().unwrap();
        assert_eq!(items[0].atom(), Some("define"));
        assert_eq!(items[1].pos(), (2, 3));
        assert_eq!(items[1].list().unwrap()[1].atom(), Some("?x"));
    }

    #[test]
    fn unbalanced_reports_position() {
        match parse_all("(a\n (b)") {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (1, 1)),
            other => panic!("{other:?}"),
        }
        match parse_all("(a))") {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (1, 4)),
            other => panic!("{other:?}"),
        }
    }
}
