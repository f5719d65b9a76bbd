//! The wreath-recursion text format: `name = <s1,...,sd> (1,2)(3,4)`.
//!
//! Letters are 1-based on the surface. `e` is the identity state and is
//! added implicitly when referenced but not defined. `#` starts a comment.

use crate::error::{Error, Result};
use crate::mealy::MealyMachine;
use crate::perm::Perm;

const IDENTITY: &str = "e";

struct Line<'a> {
    line: usize,
    name: &'a str,
    name_col: usize,
    sections: Vec<(&'a str, usize)>,
    cycles: Vec<Vec<usize>>,
    cycles_col: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

fn is_name_char(c: char) -> bool {
    !(c.is_whitespace() || "<>,()=#".contains(c))
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn col(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            Some(found) if found == c => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(found) => Err(err(self.line, self.col(), format!("expected `{c}`, found `{found}`"))),
            None => Err(err(self.line, self.col(), format!("expected `{c}`, found end of line"))),
        }
    }

    fn name(&mut self) -> Result<(&'a str, usize)> {
        self.skip_ws();
        let start = self.pos;
        let col = self.col();
        while let Some(c) = self.peek() {
            if is_name_char(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(err(self.line, col, "expected a state name"));
        }
        Ok((&self.text[start..self.pos], col))
    }

    fn number(&mut self) -> Result<(usize, usize)> {
        self.skip_ws();
        let start = self.pos;
        let col = self.col();
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.text[start..self.pos]
            .parse()
            .map(|n| (n, col))
            .map_err(|_| err(self.line, col, "expected a letter number"))
    }
}

fn parse_line(line: usize, text: &str) -> Result<Line<'_>> {
    let mut cur = Cursor { text, pos: 0, line };
    let (name, name_col) = cur.name()?;
    cur.expect('=')?;
    cur.expect('<')?;
    let mut sections = Vec::new();
    loop {
        let (s, col) = cur.name()?;
        sections.push((s, col));
        cur.skip_ws();
        match cur.peek() {
            Some(',') => cur.pos += 1,
            Some('>') => {
                cur.pos += 1;
                break;
            }
            _ => return Err(err(line, cur.col(), "expected `,` or `>`")),
        }
    }
    cur.skip_ws();
    let cycles_col = cur.col();
    let mut cycles = Vec::new();
    while cur.peek() == Some('(') {
        cur.pos += 1;
        cur.skip_ws();
        let mut cycle = Vec::new();
        if cur.peek() != Some(')') {
            loop {
                let (n, col) = cur.number()?;
                if n == 0 {
                    return Err(err(line, col, "letters are numbered from 1"));
                }
                cycle.push(n - 1);
                cur.skip_ws();
                match cur.peek() {
                    Some(',') => cur.pos += 1,
                    Some(')') => break,
                    _ => return Err(err(line, cur.col(), "expected `,` or `)`")),
                }
            }
        }
        cur.pos += 1;
        if !cycle.is_empty() {
            cycles.push(cycle);
        }
        cur.skip_ws();
    }
    if cur.pos < text.len() {
        return Err(err(line, cur.col(), format!("unexpected `{}`", &text[cur.pos..])));
    }
    Ok(Line { line, name, name_col, sections, cycles, cycles_col })
}

pub fn parse_automaton(text: &str) -> Result<MealyMachine> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim_end();
        let body = body.trim_end_matches(';').trim_end_matches('.');
        if body.trim().is_empty() {
            continue;
        }
        lines.push(parse_line(i + 1, body)?);
    }
    if lines.is_empty() {
        return Err(err(1, 1, "no states defined"));
    }
    let d = lines[0].sections.len();
    let mut names: Vec<String> = Vec::new();
    for l in &lines {
        if l.sections.len() != d {
            return Err(err(l.line, l.name_col, format!("expected {d} sections, found {}", l.sections.len())));
        }
        if names.iter().any(|n| n == l.name) {
            return Err(err(l.line, l.name_col, format!("state `{}` defined twice", l.name)));
        }
        names.push(l.name.to_string());
    }
    let mut identity = names.iter().position(|n| n == IDENTITY);
    let needs_identity = lines.iter().any(|l| l.sections.iter().any(|(s, _)| *s == IDENTITY));
    if identity.is_none() && needs_identity {
        names.push(IDENTITY.to_string());
        identity = Some(names.len() - 1);
    }
    let n = names.len();
    let mut delta = vec![vec![0; d]; n];
    let mut rho = vec![vec![0; d]; n];
    for (q, l) in lines.iter().enumerate() {
        for (x, (s, col)) in l.sections.iter().enumerate() {
            delta[q][x] = names
                .iter()
                .position(|nm| nm == s)
                .ok_or_else(|| err(l.line, *col, format!("undefined state `{s}`")))?;
        }
        let perm = Perm::from_cycles(d, &l.cycles).map_err(|e| err(l.line, l.cycles_col, e.to_string()))?;
        rho[q] = perm.images().to_vec();
    }
    if let Some(e) = identity {
        if e == lines.len() {
            delta[e] = vec![e; d];
            rho[e] = (0..d).collect();
        } else {
            let trivial = delta[e].iter().all(|&t| t == e) && rho[e].iter().enumerate().all(|(x, &y)| x == y);
            if !trivial {
                let l = &lines[e];
                return Err(err(l.line, l.name_col, "state `e` is reserved for the identity"));
            }
        }
    }
    MealyMachine::new(names, d, delta, rho, identity)
}

/// Prints every state, the identity included, so that parsing gives back the
/// same machine state for state.
pub fn print_automaton(m: &MealyMachine) -> String {
    let names = m.state_names();
    let mut out = String::new();
    for q in 0..m.num_states() {
        let secs: Vec<&str> = (0..m.degree()).map(|x| names[m.delta(q, x)].as_str()).collect();
        out.push_str(&format!("{} = <{}>", names[q], secs.join(",")));
        if let Some(p) = m.perm(q) {
            let c = p.cycle_string();
            if !c.is_empty() {
                out.push(' ');
                out.push_str(&c);
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grigorchuk() {
        let m = parse_automaton("a = <e,e> (1,2)\nb = <a,c>\nc = <a,d>\nd = <e,b>").unwrap();
        assert_eq!(m.num_states(), 5);
        assert_eq!(m.degree(), 2);
        assert_eq!(m.identity_state(), Some(4));
        assert!(m.validate().is_valid());
        assert_eq!(parse_automaton(&print_automaton(&m)).unwrap(), m);
    }

    #[test]
    fn one_letter_machine() {
        let m = parse_automaton("a = <a> ()").unwrap();
        assert_eq!((m.num_states(), m.degree()), (1, 1));
        assert!(m.validate().is_valid());
    }

    #[test]
    fn errors_carry_positions() {
        match parse_automaton("a = <e,e> (1,2)\nb = <a,x>") {
            Err(Error::Parse { line: 2, column: 8, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_automaton("a = <e,e> (1,3)") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse_automaton("a = <e,e> (1,2)\nb = <a>").is_err());
        assert!(parse_automaton("a <e>").is_err());
    }
}
