//! The `.voter` netlist format.
//!
//! ```text
//! # comment
//! voter "bn" {
//! inputs X, Y, Z;
//! node N = XOR(X, Y);
//! output V = MUX(N; Y, Z);
//! }
//! ```
//!
//! Gates are `INV`/`NOT`, `AND`, `OR`, `NAND`, `NOR`, `XOR`, `XNOR` with an
//! argument list, `MUX(sel; a, b)` (sel = 0 routes `a`) and `EXPR(...)` over
//! `~`, `&`, `^`, `|` (tightest first). Keywords are case-insensitive, net
//! names are not. Nets must be declared before use and the single `output`
//! declaration comes last.

use std::collections::HashSet;
use std::fmt;

use crate::netlist::{Expr, Gate, GateKind, NetId, Netlist};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    Syntax,
    UndefinedNet,
    DuplicateNet,
    ForwardReference,
    Arity,
    NoOutput,
    MultipleOutput,
}

impl ParseErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorKind::Syntax => "syntax",
            ParseErrorKind::UndefinedNet => "undefined-net",
            ParseErrorKind::DuplicateNet => "duplicate-net",
            ParseErrorKind::ForwardReference => "forward-reference",
            ParseErrorKind::Arity => "arity",
            ParseErrorKind::NoOutput => "no-output",
            ParseErrorKind::MultipleOutput => "multiple-output",
        }
    }
}

/// First problem found in a source text. Line and column are 1-based and
/// point at the offending token.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {}: {message}", kind.as_str())]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    Punct(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Punct(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: Pos,
}

fn error(pos: Pos, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
    ParseError { line: pos.line, column: pos.column, kind, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    let advance = |c: char, line: &mut usize, column: &mut usize| {
        if c == '\n' {
            *line += 1;
            *column = 1;
        } else {
            *column += 1;
        }
    };
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        if c.is_whitespace() {
            chars.next();
            advance(c, &mut line, &mut column);
        } else if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                advance(c, &mut line, &mut column);
            }
        } else if c.is_ascii_alphabetic() {
            let mut ident = String::new();
            while let Some(&c) = chars.peek() {
                if !(c.is_ascii_alphanumeric() || c == '_') {
                    break;
                }
                ident.push(c);
                chars.next();
                advance(c, &mut line, &mut column);
            }
            tokens.push(Token { tok: Tok::Ident(ident), pos });
        } else if c == '"' {
            chars.next();
            advance(c, &mut line, &mut column);
            let mut s = String::new();
            loop {
                let Some(c) = chars.next() else {
                    return Err(error(pos, ParseErrorKind::Syntax, "unterminated string"));
                };
                let here = Pos { line, column };
                advance(c, &mut line, &mut column);
                match c {
                    '"' => break,
                    '\n' => return Err(error(pos, ParseErrorKind::Syntax, "unterminated string")),
                    '\\' => match chars.next() {
                        Some(e @ ('"' | '\\')) => {
                            advance(e, &mut line, &mut column);
                            s.push(e);
                        }
                        _ => return Err(error(here, ParseErrorKind::Syntax, "invalid escape in string")),
                    },
                    c => s.push(c),
                }
            }
            tokens.push(Token { tok: Tok::Str(s), pos });
        } else if "{}();,=&|^~".contains(c) {
            chars.next();
            advance(c, &mut line, &mut column);
            tokens.push(Token { tok: Tok::Punct(c), pos });
        } else {
            return Err(error(pos, ParseErrorKind::Syntax, format!("unexpected character {c:?}")));
        }
    }
    tokens.push(Token { tok: Tok::Eof, pos: Pos { line, column } });
    Ok(tokens)
}

fn is_keyword(tok: &Tok, kw: &str) -> bool {
    matches!(tok, Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    /// Names that appear as `node`/`output` targets anywhere in the file.
    declared_anywhere: HashSet<String>,
    defined: HashSet<String>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let t = self.peek();
        error(t.pos, ParseErrorKind::Syntax, format!("expected {expected}, found {}", t.tok))
    }

    fn punct(&mut self, c: char) -> Result<Pos, ParseError> {
        if self.peek().tok == Tok::Punct(c) {
            Ok(self.next().pos)
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Pos, ParseError> {
        if is_keyword(&self.peek().tok, kw) {
            Ok(self.next().pos)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.next().pos))
            }
            _ => Err(self.unexpected("a net name")),
        }
    }

    /// Net name being read by the declaration of `target`.
    fn reference(&mut self, target: &str) -> Result<NetId, ParseError> {
        let (name, pos) = self.ident()?;
        if !self.defined.contains(&name) {
            return Err(if name == target || self.declared_anywhere.contains(&name) {
                error(pos, ParseErrorKind::ForwardReference, format!("{name} is used before it is defined"))
            } else {
                error(pos, ParseErrorKind::UndefinedNet, format!("undefined net {name}"))
            });
        }
        Ok(NetId::new(name).expect("lexer only yields valid identifiers"))
    }

    fn define(&mut self, name: String, pos: Pos) -> Result<NetId, ParseError> {
        if !self.defined.insert(name.clone()) {
            return Err(error(pos, ParseErrorKind::DuplicateNet, format!("{name} is already defined")));
        }
        Ok(NetId::new(name).expect("lexer only yields valid identifiers"))
    }

    fn file(&mut self) -> Result<Netlist, ParseError> {
        self.keyword("voter")?;
        let name = match &self.peek().tok {
            Tok::Str(s) => {
                let s = s.clone();
                self.next();
                s
            }
            _ => return Err(self.unexpected("a quoted voter name")),
        };
        self.punct('{')?;

        self.keyword("inputs")?;
        let mut inputs = Vec::new();
        loop {
            let (n, pos) = self.ident()?;
            inputs.push(self.define(n, pos)?);
            if self.peek().tok == Tok::Punct(',') {
                self.next();
            } else {
                break;
            }
        }
        self.punct(';')?;

        let mut gates = Vec::new();
        let mut output: Option<NetId> = None;
        loop {
            let t = self.peek().clone();
            let is_output = is_keyword(&t.tok, "output");
            if t.tok == Tok::Punct('}') {
                break;
            }
            if !is_output && !is_keyword(&t.tok, "node") {
                return Err(self.unexpected("`node`, `output` or `}`"));
            }
            if let Some(out) = &output {
                return Err(if is_output {
                    error(t.pos, ParseErrorKind::MultipleOutput, format!("second output declaration (output is {out})"))
                } else {
                    error(t.pos, ParseErrorKind::Syntax, "`output` must be the last declaration")
                });
            }
            self.next();
            let (target, target_pos) = self.ident()?;
            self.punct('=')?;
            let (kind, inputs) = self.gate(&target)?;
            self.punct(';')?;
            let net = self.define(target, target_pos)?;
            if is_output {
                output = Some(net.clone());
            }
            gates.push(Gate::new(net, kind, inputs));
        }
        let close = self.punct('}')?;
        let Some(output) = output else {
            return Err(error(close, ParseErrorKind::NoOutput, "missing `output` declaration"));
        };
        if self.peek().tok != Tok::Eof {
            return Err(self.unexpected("end of input"));
        }
        let netlist = Netlist::new(name, inputs, gates, output);
        debug_assert!(netlist.is_valid(), "{:?}", netlist.validate());
        Ok(netlist)
    }

    fn gate(&mut self, target: &str) -> Result<(GateKind, Vec<NetId>), ParseError> {
        let (word, pos) = self.ident().map_err(|_| self.unexpected("a gate kind"))?;
        let kind = match word.to_ascii_uppercase().as_str() {
            "INV" | "NOT" => GateKind::Inv,
            "AND" => GateKind::And,
            "OR" => GateKind::Or,
            "NAND" => GateKind::Nand,
            "NOR" => GateKind::Nor,
            "XOR" => GateKind::Xor,
            "XNOR" => GateKind::Xnor,
            "MUX" => {
                self.punct('(')?;
                let sel = self.reference(target)?;
                self.punct(';')?;
                let a = self.reference(target)?;
                self.punct(',')?;
                let b = self.reference(target)?;
                self.punct(')')?;
                return Ok((GateKind::Mux2, vec![sel, a, b]));
            }
            "EXPR" => {
                self.punct('(')?;
                let e = self.or_expr(target)?;
                self.punct(')')?;
                let inputs = e.references();
                return Ok((GateKind::Expr(e), inputs));
            }
            _ => return Err(error(pos, ParseErrorKind::Syntax, format!("unknown gate kind `{word}`"))),
        };
        self.punct('(')?;
        let mut args = vec![self.reference(target)?];
        while self.peek().tok == Tok::Punct(',') {
            self.next();
            args.push(self.reference(target)?);
        }
        self.punct(')')?;
        if !kind.accepts_arity(args.len()) {
            return Err(error(
                pos,
                ParseErrorKind::Arity,
                format!("{} requires {}", kind.keyword(), kind.arity_text().unwrap_or_default()),
            ));
        }
        Ok((kind, args))
    }

    fn nary(
        &mut self,
        target: &str,
        op: char,
        operand: fn(&mut Self, &str) -> Result<Expr, ParseError>,
        build: fn(Vec<Expr>) -> Expr,
    ) -> Result<Expr, ParseError> {
        let mut items = vec![operand(self, target)?];
        while self.peek().tok == Tok::Punct(op) {
            self.next();
            items.push(operand(self, target)?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { build(items) })
    }

    fn or_expr(&mut self, target: &str) -> Result<Expr, ParseError> {
        self.nary(target, '|', Self::xor_expr, Expr::Or)
    }

    fn xor_expr(&mut self, target: &str) -> Result<Expr, ParseError> {
        self.nary(target, '^', Self::and_expr, Expr::Xor)
    }

    fn and_expr(&mut self, target: &str) -> Result<Expr, ParseError> {
        self.nary(target, '&', Self::unary, Expr::And)
    }

    fn unary(&mut self, target: &str) -> Result<Expr, ParseError> {
        match self.peek().tok {
            Tok::Punct('~') => {
                self.next();
                Ok(Expr::not(self.unary(target)?))
            }
            Tok::Punct('(') => {
                self.next();
                let e = self.or_expr(target)?;
                self.punct(')')?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(Expr::Net(self.reference(target)?)),
            _ => Err(self.unexpected("a net name, `~` or `(`")),
        }
    }
}

/// Parses one `.voter` source text.
pub fn parse(text: &str) -> Result<Netlist, ParseError> {
    let tokens = lex(text)?;
    let declared_anywhere = tokens
        .windows(3)
        .filter(|w| (is_keyword(&w[0].tok, "node") || is_keyword(&w[0].tok, "output")) && w[2].tok == Tok::Punct('='))
        .filter_map(|w| match &w[1].tok {
            Tok::Ident(s) => Some(s.clone()),
            _ => None,
        })
        .collect();
    let mut parser = Parser { tokens, at: 0, declared_anywhere, defined: HashSet::new() };
    parser.file()
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Or(_) => 1,
        Expr::Xor(_) => 2,
        Expr::And(_) => 3,
        Expr::Not(_) => 4,
        Expr::Net(_) => 5,
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    let child = |c: &Expr, wrap: bool, out: &mut String| {
        if wrap {
            out.push('(');
            write_expr(c, out);
            out.push(')');
        } else {
            write_expr(c, out);
        }
    };
    match e {
        Expr::Net(n) => out.push_str(n.as_str()),
        Expr::Not(c) => {
            out.push('~');
            child(c, precedence(c) < 4, out);
        }
        Expr::And(cs) | Expr::Or(cs) | Expr::Xor(cs) => {
            let sep = match e {
                Expr::And(_) => " & ",
                Expr::Or(_) => " | ",
                _ => " ^ ",
            };
            // Same-operator children keep their parentheses so that the
            // tree shape survives a round trip.
            let p = precedence(e);
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                child(c, precedence(c) <= p, out);
            }
        }
    }
}

pub fn render_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, &mut s);
    s
}

fn quote(name: &str) -> String {
    let mut s = String::from("\"");
    for c in name.chars() {
        if c == '"' || c == '\\' {
            s.push('\\');
        }
        s.push(c);
    }
    s.push('"');
    s
}

/// Canonical text: one declaration per line, single spaces, `\n` newlines.
pub fn serialize(netlist: &Netlist) -> String {
    let mut out = format!("voter {} {{\n", quote(netlist.name()));
    let inputs: Vec<&str> = netlist.primary_inputs().iter().map(NetId::as_str).collect();
    out.push_str(&format!("inputs {};\n", inputs.join(", ")));
    for g in netlist.gates() {
        let keyword = if g.output == *netlist.output() { "output" } else { "node" };
        let body = match &g.kind {
            GateKind::Mux2 => format!("MUX({}; {}, {})", g.inputs[0], g.inputs[1], g.inputs[2]),
            GateKind::Expr(e) => format!("EXPR({})", render_expr(e)),
            kind => {
                let args: Vec<&str> = g.inputs.iter().map(NetId::as_str).collect();
                format!("{}({})", kind.keyword(), args.join(", "))
            }
        };
        out.push_str(&format!("{keyword} {} = {body};\n", g.output));
    }
    out.push_str("}\n");
    out
}
