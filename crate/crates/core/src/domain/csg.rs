//! Constructive description of domains.
//!
//! ```text
//! expr    := primary (("minus" | "union" | "intersect") primary)*
//! primary := "box(" point "," point ")" | "disk(" point "," number ")" | "(" expr ")"
//! point   := "(" number ("," number)* ")"
//! ```
//!
//! Operators associate to the left. `box` is the open box between two
//! corners, `disk` the open Euclidean ball.

use core::fmt;
use core::str::FromStr;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::DomainRaster;
use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOp {
    Minus,
    Union,
    Intersect,
}

impl SetOp {
    fn keyword(self) -> &'static str {
        match self {
            SetOp::Minus => "minus",
            SetOp::Union => "union",
            SetOp::Intersect => "intersect",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Disk { center: Vec<f64>, radius: f64 },
    Op(SetOp, Box<DomainSpec>, Box<DomainSpec>),
}

impl DomainSpec {
    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Box { lower, .. } => lower.len(),
            DomainSpec::Disk { center, .. } => center.len(),
            DomainSpec::Op(_, a, _) => a.dim(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            DomainSpec::Box { lower, upper } => {
                lower.iter().zip(upper).zip(x).all(|((a, b), v)| a < v && v < b)
            }
            DomainSpec::Disk { center, radius } => {
                let d2: f64 = center.iter().zip(x).map(|(c, v)| (v - c) * (v - c)).sum();
                d2 < radius * radius
            }
            DomainSpec::Op(op, a, b) => match op {
                SetOp::Minus => a.contains(x) && !b.contains(x),
                SetOp::Union => a.contains(x) || b.contains(x),
                SetOp::Intersect => a.contains(x) && b.contains(x),
            },
        }
    }

    /// Cells whose center lies in the set.
    pub fn rasterize(&self, grid: Grid) -> Result<DomainRaster> {
        if self.dim() != grid.dim() {
            return Err(Error::Parameter(format!(
                "domain of dimension {} on a grid of dimension {}",
                self.dim(),
                grid.dim()
            )));
        }
        DomainRaster::from_fn(grid, |x| self.contains(x))
    }

    fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Box { lower, upper } => {
                if lower.len() != upper.len() || lower.is_empty() || lower.len() > 3 {
                    return Err(Error::Parse("box corners must share a dimension in 1..=3".into()));
                }
                if lower.iter().zip(upper).any(|(a, b)| a >= b) {
                    return Err(Error::Parse("box lower corner must be below the upper corner".into()));
                }
            }
            DomainSpec::Disk { center, radius } => {
                if center.is_empty() || center.len() > 3 {
                    return Err(Error::Parse("disk center must have 1..=3 coordinates".into()));
                }
                if !(*radius > 0.0) {
                    return Err(Error::Parse("disk radius must be positive".into()));
                }
            }
            DomainSpec::Op(_, a, b) => {
                if a.dim() != b.dim() {
                    return Err(Error::Parse("operands of different dimension".into()));
                }
            }
        }
        Ok(())
    }
}

fn write_point(f: &mut fmt::Formatter<'_>, p: &[f64]) -> fmt::Result {
    f.write_str("(")?;
    for (i, v) in p.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    f.write_str(")")
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Box { lower, upper } => {
                f.write_str("box(")?;
                write_point(f, lower)?;
                f.write_str(",")?;
                write_point(f, upper)?;
                f.write_str(")")
            }
            DomainSpec::Disk { center, radius } => {
                f.write_str("disk(")?;
                write_point(f, center)?;
                write!(f, ",{radius})")
            }
            DomainSpec::Op(op, a, b) => {
                write!(f, "{a} {} ", op.keyword())?;
                if matches!(**b, DomainSpec::Op(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

struct Parser<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn skip_ws(&mut self) {
        let r = self.rest();
        self.pos += r.len() - r.trim_start().len();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected `{tok}` at offset {} in `{}`", self.pos, self.s)))
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let r = self.rest();
        let end = r.find(|c: char| !(c.is_ascii_digit() || "+-.eE".contains(c))).unwrap_or(r.len());
        let v = crate::num::parse_f64(&r[..end])?;
        self.pos += end;
        Ok(v)
    }

    fn point(&mut self) -> Result<Vec<f64>> {
        self.expect("(")?;
        let mut out = alloc::vec![self.number()?];
        while self.eat(",") {
            out.push(self.number()?);
        }
        self.expect(")")?;
        Ok(out)
    }

    fn primary(&mut self) -> Result<DomainSpec> {
        let spec = if self.eat("box(") {
            let lower = self.point()?;
            self.expect(",")?;
            let upper = self.point()?;
            self.expect(")")?;
            DomainSpec::Box { lower, upper }
        } else if self.eat("disk(") {
            let center = self.point()?;
            self.expect(",")?;
            let radius = self.number()?;
            self.expect(")")?;
            DomainSpec::Disk { center, radius }
        } else if self.eat("(") {
            let e = self.expr()?;
            self.expect(")")?;
            return Ok(e);
        } else {
            return Err(Error::Parse(format!("expected a shape at offset {} in `{}`", self.pos, self.s)));
        };
        spec.validate()?;
        Ok(spec)
    }

    fn expr(&mut self) -> Result<DomainSpec> {
        let mut lhs = self.primary()?;
        loop {
            let op = if self.eat("minus") {
                SetOp::Minus
            } else if self.eat("union") {
                SetOp::Union
            } else if self.eat("intersect") {
                SetOp::Intersect
            } else {
                break;
            };
            let rhs = self.primary()?;
            lhs = DomainSpec::Op(op, Box::new(lhs), Box::new(rhs));
            lhs.validate()?;
        }
        Ok(lhs)
    }
}

impl FromStr for DomainSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { s, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if !p.rest().is_empty() {
            return Err(Error::Parse(format!("trailing input `{}`", p.rest())));
        }
        Ok(e)
    }
}

impl DomainSpec {
    pub fn to_spec_string(&self) -> String {
        self.to_string()
    }
}
