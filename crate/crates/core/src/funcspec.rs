//! Expression mini-language for coefficient and signal functions, plus
//! raw lattice sample tables.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    = term , { ("+" | "-") , term } ;
//! term    = unary , { ("*" | "/") , unary } ;
//! unary   = "-" , unary | power ;
//! power   = primary , [ "^" , unary ] ;          (* right-associative *)
//! primary = number | "x" | func , "(" , expr , ")" | "(" , expr , ")" ;
//! func    = "sqrt" | "qsin" | "qcos" ;
//! number  = digits , [ "." , [ digits ] ] , [ exponent ]
//!         | "." , digits , [ exponent ] ;
//! exponent = ("e" | "E") , [ "+" | "-" ] , digits ;
//! ```
//!
//! `-x^2` parses as `-(x^2)` and `2^3^2` as `2^(3^2)`. `qsin` and `qcos`
//! evaluate the q-trigonometric series at the lattice's `q`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{LatticeFn, QLattice, QParam};
use crate::qtrig::{q_cos_real, q_sin_real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    QSin,
    QCos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::QSin => "qsin",
            Func::QCos => "qcos",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        match name {
            "sqrt" => Some(Func::Sqrt),
            "qsin" => Some(Func::QSin),
            "qcos" => Some(Func::QCos),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Prints fully parenthesised so that the output re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::X => f.write_str("x"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

const OPERAND: &[&str] = &["number", "x", "function", "(", "-"];

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error(&self, expected: &[&str]) -> Error {
        Error::Parse {
            offset: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let op = if c == b'+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let op = if c == b'*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                if ident == "x" {
                    return Ok(Expr::X);
                }
                match Func::lookup(ident) {
                    Some(func) => {
                        self.expect(b'(')?;
                        let arg = self.expr()?;
                        self.expect(b')')?;
                        Ok(Expr::Call(func, Box::new(arg)))
                    }
                    None => {
                        self.pos = start;
                        Err(self.error(&["x", "sqrt", "qsin", "qcos"]))
                    }
                }
            }
            _ => Err(self.error(OPERAND)),
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            let s = (c as char).to_string();
            Err(self.error(&[s.as_str()]))
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.pos - start
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let mut n = self.digits();
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += self.digits();
        }
        if n == 0 {
            self.pos = start;
            return Err(self.error(&["digit"]));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                return Err(self.error(&["digit"]));
            }
            debug_assert!(mark > start);
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Num(v)),
            _ => {
                self.pos = start;
                Err(self.error(&["finite number"]))
            }
        }
    }
}

/// Evaluates `e` at `x`; `qsin`/`qcos` use base `q`.
pub fn eval_expr(e: &Expr, x: f64, q: QParam) -> Result<f64> {
    let v = match e {
        Expr::Num(v) => *v,
        Expr::X => x,
        Expr::Neg(inner) => -eval_expr(inner, x, q)?,
        Expr::Binary(op, l, r) => {
            let a = eval_expr(l, x, q)?;
            let b = eval_expr(r, x, q)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(Error::DivZero);
                    }
                    a / b
                }
                BinOp::Pow => {
                    let v = a.powf(b);
                    if v.is_nan() {
                        return Err(Error::Domain(format!("{a}^{b} is not real")));
                    }
                    v
                }
            }
        }
        Expr::Call(func, arg) => {
            let a = eval_expr(arg, x, q)?;
            match func {
                Func::Sqrt => {
                    if a < 0.0 {
                        return Err(Error::Domain(format!("sqrt of negative {a}")));
                    }
                    a.sqrt()
                }
                Func::QSin => q_sin_real(a, q)?,
                Func::QCos => q_cos_real(a, q)?,
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("expression value {v} at x = {x}")))
    }
}

/// Samples keyed by lattice index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleTable {
    values: BTreeMap<isize, Complex64>,
}

impl SampleTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, k: isize, value: Complex64) {
        self.values.insert(k, value);
    }

    pub fn get(&self, k: isize) -> Option<Complex64> {
        self.values.get(&k).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Copies every available sample of a lattice function.
    pub fn from_lattice_fn(f: &LatticeFn) -> Self {
        let mut table = Self::new();
        for k in -1..=f.lattice().depth() as isize {
            if let Ok(v) = f.get(k) {
                table.insert(k, v);
            }
        }
        table
    }

    /// Reads a two-column CSV `k,value` with a header row.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut table = Self::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Io(format!("sample table: {e}")))?;
            if record.len() != 2 {
                return Err(Error::Io(format!(
                    "sample table row {}: expected 2 columns, got {}",
                    line + 2,
                    record.len()
                )));
            }
            let k: isize = record[0].parse().map_err(|_| {
                Error::Io(format!(
                    "sample table row {}: bad index {:?}",
                    line + 2,
                    &record[0]
                ))
            })?;
            let v: f64 = record[1].parse().map_err(|_| {
                Error::Io(format!(
                    "sample table row {}: bad value {:?}",
                    line + 2,
                    &record[1]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("sample table value at k = {k}")));
            }
            table.insert(k, Complex64::new(v, 0.0));
        }
        Ok(table)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file =
            std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }
}

/// A function given by an expression or by lattice samples.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Expr(Expr),
    Samples(SampleTable),
}

impl FunctionSpec {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(FunctionSpec::Expr(parse_expr(text)?))
    }

    pub fn constant(v: f64) -> Self {
        FunctionSpec::Expr(Expr::Num(v))
    }
}

/// Evaluates or copies `fs` onto every lattice index.
///
/// Tables must cover `0..=K`; a table without `k = -1` yields a function
/// whose exterior sample is absent.
pub fn sample_to_lattice(fs: &FunctionSpec, lat: &Arc<QLattice>) -> Result<LatticeFn> {
    match fs {
        FunctionSpec::Expr(e) => {
            let q = lat.q();
            let values = lat
                .points()
                .iter()
                .map(|&x| eval_expr(e, x, q).map(|v| Complex64::new(v, 0.0)))
                .collect::<Result<Vec<_>>>()?;
            LatticeFn::from_values(lat, values)
        }
        FunctionSpec::Samples(table) => {
            let interior = (0..=lat.depth() as isize)
                .map(|k| table.get(k).ok_or(Error::MissingSample(k)))
                .collect::<Result<Vec<_>>>()?;
            match table.get(-1) {
                Some(ext) => {
                    let mut values = Vec::with_capacity(lat.len());
                    values.push(ext);
                    values.extend(interior);
                    LatticeFn::from_values(lat, values)
                }
                None => LatticeFn::from_interior(lat, interior),
            }
        }
    }
}

/// Like [`sample_to_lattice`] but only on `x_0 ..= x_K`; the exterior
/// sample is never evaluated.
pub fn sample_interior(fs: &FunctionSpec, lat: &Arc<QLattice>) -> Result<LatticeFn> {
    let depth = lat.depth() as isize;
    let interior = match fs {
        FunctionSpec::Expr(e) => {
            let q = lat.q();
            (0..=depth)
                .map(|k| eval_expr(e, lat.x(k), q).map(|v| Complex64::new(v, 0.0)))
                .collect::<Result<Vec<_>>>()?
        }
        FunctionSpec::Samples(table) => (0..=depth)
            .map(|k| table.get(k).ok_or(Error::MissingSample(k)))
            .collect::<Result<Vec<_>>>()?,
    };
    LatticeFn::from_interior(lat, interior)
}
