use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{is_valid_var_name, Atom, Formula, Rational, Term};

/// Formula trees deeper than this are rejected instead of risking the stack.
const MAX_DEPTH: usize = 400;
/// Bound on parser recursion (three frames per parenthesis level).
const MAX_NESTING: usize = 150;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{column}: expected {}, found {found}", expected.join(" | "))]
    Syntax {
        line: usize,
        column: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("{line}:{column}: relation `{symbol}` takes {expected} terms, found {found}")]
    Arity {
        line: usize,
        column: usize,
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("{line}:{column}: {message}")]
    Invalid {
        line: usize,
        column: usize,
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Forall,
    Exists,
    Dot,
    LParen,
    RParen,
    Comma,
    Arrow,
    Bar,
    Amp,
    Tilde,
    Eq,
    Rel(char),
    Ident(String),
    Number(Rational),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Forall => f.write_str("`forall`"),
            Tok::Exists => f.write_str("`exists`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Rel(c) => write!(f, "`{c}`"),
            Tok::Ident(s) => write!(f, "variable `{s}`"),
            Tok::Number(n) => write!(f, "number `{n}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(input: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut push = |tok: Tok| {
            out.push(Spanned {
                tok,
                line: start_line,
                column: start_col,
            })
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '.' => Some(Tok::Dot),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '|' => Some(Tok::Bar),
            '&' => Some(Tok::Amp),
            '~' => Some(Tok::Tilde),
            '=' => Some(Tok::Eq),
            'B' | 'D' => Some(Tok::Rel(c)),
            _ => None,
        };
        if let Some(tok) = single {
            // `B`/`D` followed by identifier characters would be a malformed name.
            if matches!(tok, Tok::Rel(_))
                && chars
                    .get(i + 1)
                    .is_some_and(|n| n.is_ascii_alphanumeric() || *n == '_' || *n == '\'')
            {
                return Err(ParseError::Invalid {
                    line,
                    column: col,
                    message: "relation symbol must be followed by whitespace".into(),
                });
            }
            push(tok);
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            push(Tok::Arrow);
            i += 2;
            col += 2;
            continue;
        }
        if c == '-' || c.is_ascii_digit() {
            let start = i;
            if c == '-' {
                i += 1;
            }
            let digits_start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i == digits_start {
                return Err(ParseError::Syntax {
                    line,
                    column: col,
                    expected: vec!["`->`".into(), "digit".into()],
                    found: format!("`{c}`"),
                });
            }
            let mut denom = None;
            if chars.get(i) == Some(&'/') {
                i += 1;
                let ds = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i == ds {
                    return Err(ParseError::Syntax {
                        line,
                        column: col + (i - start),
                        expected: vec!["digit".into()],
                        found: chars
                            .get(i)
                            .map_or("end of input".into(), |c| format!("`{c}`")),
                    });
                }
                denom = Some(chars[ds..i].iter().collect::<String>());
            }
            let numer_text: String = chars[start..digits_start + (i - digits_start)]
                .iter()
                .take_while(|c| **c != '/')
                .collect();
            let numer: BigInt = numer_text.parse().expect("lexed digits");
            let denom: BigInt = denom.map_or(BigInt::from(1), |d| d.parse().expect("lexed digits"));
            if denom.is_zero() {
                return Err(ParseError::Invalid {
                    line,
                    column: col,
                    message: "zero denominator".into(),
                });
            }
            push(Tok::Number(Rational::new(numer, denom)));
            col += i - start;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.as_str() {
                "forall" => Tok::Forall,
                "exists" => Tok::Exists,
                w if is_valid_var_name(w) => Tok::Ident(word),
                _ => {
                    return Err(ParseError::Invalid {
                        line,
                        column: col,
                        message: format!("`{word}` is not a valid variable name"),
                    })
                }
            };
            push(tok);
            col += i - start;
            continue;
        }
        return Err(ParseError::Syntax {
            line,
            column: col,
            expected: vec!["formula".into()],
            found: format!("`{c}`"),
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let here = &self.toks[self.pos];
        ParseError::Syntax {
            line: here.line,
            column: here.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: here.tok.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            let here = &self.toks[self.pos];
            return Err(ParseError::Invalid {
                line: here.line,
                column: here.column,
                message: "formula nested too deeply".into(),
            });
        }
        Ok(())
    }

    fn check_depth(&self, depth: usize) -> Result<usize, ParseError> {
        if depth > MAX_DEPTH {
            let here = &self.toks[self.pos];
            return Err(ParseError::Invalid {
                line: here.line,
                column: here.column,
                message: format!("formula nested deeper than {MAX_DEPTH} levels"),
            });
        }
        Ok(depth)
    }

    // Each production returns the tree depth of what it built so that
    // pathological inputs are rejected before a deep tree exists.
    fn formula(&mut self) -> Result<(Formula, usize), ParseError> {
        self.enter()?;
        let result = match self.peek() {
            Tok::Forall | Tok::Exists => {
                let universal = *self.peek() == Tok::Forall;
                self.bump();
                let mut vars = Vec::new();
                while let Tok::Ident(v) = self.peek() {
                    vars.push(v.clone());
                    self.check_depth(vars.len())?;
                    self.bump();
                }
                if vars.is_empty() {
                    return Err(self.error(&["variable"]));
                }
                self.expect(Tok::Dot, "`.`")?;
                let (body, d) = self.formula()?;
                let depth = self.check_depth(d + vars.len())?;
                let f = vars.into_iter().rev().fold(body, |acc, v| {
                    if universal {
                        Formula::forall(v, acc)
                    } else {
                        Formula::exists(v, acc)
                    }
                });
                Ok((f, depth))
            }
            _ => self.implication(),
        };
        self.depth -= 1;
        result
    }

    fn implication(&mut self) -> Result<(Formula, usize), ParseError> {
        self.enter()?;
        let (lhs, dl) = self.disjunction()?;
        let result = if *self.peek() == Tok::Arrow {
            self.bump();
            let (rhs, dr) = self.implication()?;
            let depth = self.check_depth(dl.max(dr) + 1)?;
            (Formula::implies(lhs, rhs), depth)
        } else {
            (lhs, dl)
        };
        self.depth -= 1;
        Ok(result)
    }

    fn disjunction(&mut self) -> Result<(Formula, usize), ParseError> {
        let mut parts = vec![self.conjunction()?];
        while *self.peek() == Tok::Bar {
            self.bump();
            parts.push(self.conjunction()?);
            self.check_depth(parts.len())?;
        }
        self.fold_right(parts, Formula::or)
    }

    fn conjunction(&mut self) -> Result<(Formula, usize), ParseError> {
        let mut parts = vec![self.negation()?];
        while *self.peek() == Tok::Amp {
            self.bump();
            parts.push(self.negation()?);
            self.check_depth(parts.len())?;
        }
        self.fold_right(parts, Formula::and)
    }

    fn fold_right(
        &self,
        mut parts: Vec<(Formula, usize)>,
        join: fn(Formula, Formula) -> Formula,
    ) -> Result<(Formula, usize), ParseError> {
        let m = parts.len();
        let depth = parts
            .iter()
            .enumerate()
            .map(|(i, (_, d))| d + (i + 1).min(m - 1))
            .max()
            .unwrap();
        self.check_depth(depth)?;
        let (last, _) = parts.pop().unwrap();
        let f = parts.into_iter().rev().fold(last, |acc, (f, _)| join(f, acc));
        Ok((f, depth))
    }

    fn negation(&mut self) -> Result<(Formula, usize), ParseError> {
        self.enter()?;
        let result = match self.peek() {
            Tok::Tilde => {
                self.bump();
                let (f, d) = self.negation()?;
                let depth = self.check_depth(d + 1)?;
                Ok((Formula::not(f), depth))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Rel(_) | Tok::Eq => Ok((self.atom()?, 0)),
            _ => Err(self.error(&["`~`", "`(`", "`B`", "`D`", "`=`"])),
        };
        self.depth -= 1;
        result
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let head = self.bump();
        let (symbol, arity) = match head.tok {
            Tok::Rel('B') => ("B", 3),
            Tok::Rel('D') => ("D", 4),
            Tok::Eq => ("=", 2),
            _ => unreachable!("atom called on non-relation token"),
        };
        let mut terms = Vec::with_capacity(arity);
        while terms.len() < arity {
            match self.peek() {
                Tok::Ident(_) | Tok::LParen => terms.push(self.term()?),
                _ => {
                    return Err(ParseError::Arity {
                        line: head.line,
                        column: head.column,
                        symbol: symbol.into(),
                        expected: arity,
                        found: terms.len(),
                    })
                }
            }
        }
        if matches!(self.peek(), Tok::Ident(_)) {
            let mut extra = 0;
            while matches!(self.toks[self.pos + extra].tok, Tok::Ident(_)) {
                extra += 1;
            }
            return Err(ParseError::Arity {
                line: head.line,
                column: head.column,
                symbol: symbol.into(),
                expected: arity,
                found: arity + extra,
            });
        }
        let mut it = terms.into_iter();
        let mut next = || it.next().unwrap();
        Ok(Formula::Atom(match symbol {
            "B" => Atom::Between(next(), next(), next()),
            "D" => Atom::Congruent(next(), next(), next(), next()),
            _ => Atom::Equal(next(), next()),
        }))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Ident(v) => {
                self.bump();
                Ok(Term::Var(v))
            }
            Tok::LParen => {
                self.bump();
                let x = self.number()?;
                self.expect(Tok::Comma, "`,`")?;
                let y = self.number()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Term::Point(x, y))
            }
            _ => Err(self.error(&["variable", "point constant"])),
        }
    }

    fn number(&mut self) -> Result<Rational, ParseError> {
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.error(&["rational"])),
        }
    }
}

pub fn parse_formula(input: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(input)?,
        pos: 0,
        depth: 0,
    };
    let (f, _) = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["`->`", "`|`", "`&`", "end of input"]));
    }
    Ok(f)
}

/// Parses a single term: a variable or a point constant such as `(1/2,-3)`.
pub fn parse_term(input: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        toks: lex(input)?,
        pos: 0,
        depth: 0,
    };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["end of input"]));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::rational;

    fn v(s: &str) -> Term {
        Term::var(s)
    }

    #[test]
    fn reflexivity_axiom() {
        let f = parse_formula("forall a b. D a b b a").unwrap();
        let expected = Formula::forall(
            "a",
            Formula::forall("b", Formula::congruent(v("a"), v("b"), v("b"), v("a"))),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn single_atom() {
        assert_eq!(
            parse_formula("B a b c").unwrap(),
            Formula::between(v("a"), v("b"), v("c"))
        );
    }

    #[test]
    fn identity_of_betweenness() {
        let f = parse_formula("forall a b. (B a b a -> = a b)").unwrap();
        let expected = Formula::forall_all(
            &["a", "b"],
            Formula::implies(
                Formula::between(v("a"), v("b"), v("a")),
                Formula::equal(v("a"), v("b")),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse_formula("~ B a b c & = a b | D a b c d -> = a a -> = b b").unwrap();
        let expected = Formula::implies(
            Formula::or(
                Formula::and(
                    Formula::not(Formula::between(v("a"), v("b"), v("c"))),
                    Formula::equal(v("a"), v("b")),
                ),
                Formula::congruent(v("a"), v("b"), v("c"), v("d")),
            ),
            Formula::implies(Formula::equal(v("a"), v("a")), Formula::equal(v("b"), v("b"))),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn quantifier_body_extends_right() {
        let f = parse_formula("exists x. B a x b & = x a").unwrap();
        assert!(matches!(f, Formula::Exists(_, ref body) if matches!(**body, Formula::And(..))));
    }

    #[test]
    fn point_constants() {
        let f = parse_formula("D (0,0) (0,0) (0,0) (0,1)").unwrap();
        let o = Term::point(rational(0, 1), rational(0, 1));
        let e = Term::point(rational(0, 1), rational(1, 1));
        assert_eq!(f, Formula::congruent(o.clone(), o.clone(), o, e));
        let t = parse_term("(-3/4, 6/8)").unwrap();
        assert_eq!(t, Term::point(rational(-3, 4), rational(3, 4)));
    }

    #[test]
    fn arity_errors() {
        match parse_formula("B a b") {
            Err(ParseError::Arity {
                symbol,
                expected,
                found,
                ..
            }) => {
                assert_eq!((symbol.as_str(), expected, found), ("B", 3, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse_formula("forall a. = a a a") {
            Err(ParseError::Arity { found, .. }) => assert_eq!(found, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_positions() {
        match parse_formula("forall a b.\n  (B a b c -> )") {
            Err(ParseError::Syntax {
                line,
                column,
                expected,
                found,
            }) => {
                assert_eq!((line, column), (2, 15));
                assert!(expected.contains(&"`(`".to_string()));
                assert_eq!(found, "`)`");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_formula("forall . B a b c").is_err());
        assert!(parse_formula("B a b c )").is_err());
        assert!(parse_formula("D (1/0,1) a b c").is_err());
        assert!(parse_formula("Bab").is_err());
        assert!(parse_formula("").is_err());
    }

    #[test]
    fn deep_nesting_is_rejected_not_overflowed() {
        let deep = format!("{}B a b c{}", "(".repeat(5000), ")".repeat(5000));
        assert!(matches!(parse_formula(&deep), Err(ParseError::Invalid { .. })));
        let negs = format!("{}B a b c", "~".repeat(5000));
        assert!(parse_formula(&negs).is_err());
        let wide = vec!["B a b c"; 5000].join(" & ");
        assert!(parse_formula(&wide).is_err());
        let binders = format!("forall {}. B a b c", vec!["a"; 5000].join(" "));
        assert!(parse_formula(&binders).is_err());
    }
}
