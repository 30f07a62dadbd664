//! Text form of an ordering:
//!
//! ```text
//! spec := identity | paley | walsh | kaczmarz | kronecker
//!       | table:PATH | matrix:PATH | subset:BITS:SEED
//!       | compose(spec,spec) | invert(spec)
//! ```
//!
//! `BITS` is a comma-separated list of bit positions (possibly empty). A
//! `PATH` runs until the next `,` or `)` or the end of the input.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use walshperm::orderings::{LinearMatrix, NamedOrdering, Ordering};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderingSpec {
    Named(NamedOrdering),
    Table(PathBuf),
    Matrix(PathBuf),
    Subset { bits: Vec<u32>, seed: u64 },
    Compose(Box<OrderingSpec>, Box<OrderingSpec>),
    Invert(Box<OrderingSpec>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecError {
    /// Byte offset into the input.
    pub position: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ordering spec, position {}: {}", self.position, self.message)
    }
}

impl std::error::Error for SpecError {}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, SpecError> {
        Err(SpecError { position: self.pos, message: message.into() })
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), SpecError> {
        if self.eat(token) {
            Ok(())
        } else {
            self.error(format!("expected '{token}'"))
        }
    }

    fn take_while(&mut self, keep: impl Fn(char) -> bool) -> &'a str {
        let rest = self.rest();
        let len = rest.find(|c| !keep(c)).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn number<T: FromStr>(&mut self, what: &str) -> Result<T, SpecError> {
        let start = self.pos;
        let digits = self.take_while(|c| c.is_ascii_digit());
        match digits.parse() {
            Ok(v) => Ok(v),
            Err(_) => Err(SpecError { position: start, message: format!("expected {what}") }),
        }
    }

    fn path(&mut self) -> Result<PathBuf, SpecError> {
        let path = self.take_while(|c| c != ',' && c != ')');
        if path.is_empty() {
            return self.error("expected a file path");
        }
        Ok(PathBuf::from(path))
    }

    fn spec(&mut self) -> Result<OrderingSpec, SpecError> {
        if self.eat("compose(") {
            let outer = self.spec()?;
            self.expect(",")?;
            let inner = self.spec()?;
            self.expect(")")?;
            return Ok(OrderingSpec::Compose(Box::new(outer), Box::new(inner)));
        }
        if self.eat("invert(") {
            let inner = self.spec()?;
            self.expect(")")?;
            return Ok(OrderingSpec::Invert(Box::new(inner)));
        }
        if self.eat("table:") {
            return Ok(OrderingSpec::Table(self.path()?));
        }
        if self.eat("matrix:") {
            return Ok(OrderingSpec::Matrix(self.path()?));
        }
        if self.eat("subset:") {
            let mut bits = Vec::new();
            while !self.eat(":") {
                if !bits.is_empty() {
                    self.expect(",")?;
                }
                bits.push(self.number("a bit position")?);
            }
            let seed = self.number("a seed")?;
            return Ok(OrderingSpec::Subset { bits, seed });
        }
        let start = self.pos;
        let word = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
        match word.parse::<NamedOrdering>() {
            Ok(name) => Ok(OrderingSpec::Named(name)),
            Err(_) if word.is_empty() => self.error("expected an ordering"),
            Err(_) => Err(SpecError { position: start, message: format!("unknown ordering '{word}'") }),
        }
    }
}

impl FromStr for OrderingSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        let mut parser = Parser { text: s, pos: 0 };
        let spec = parser.spec()?;
        if parser.pos != s.len() {
            return parser.error("unexpected trailing input");
        }
        Ok(spec)
    }
}

impl fmt::Display for OrderingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderingSpec::Named(name) => f.write_str(name.as_str()),
            OrderingSpec::Table(path) => write!(f, "table:{}", path.display()),
            OrderingSpec::Matrix(path) => write!(f, "matrix:{}", path.display()),
            OrderingSpec::Subset { bits, seed } => {
                let bits: Vec<String> = bits.iter().map(u32::to_string).collect();
                write!(f, "subset:{}:{seed}", bits.join(","))
            }
            OrderingSpec::Compose(outer, inner) => write!(f, "compose({outer},{inner})"),
            OrderingSpec::Invert(inner) => write!(f, "invert({inner})"),
        }
    }
}

impl OrderingSpec {
    /// Builds the ordering on `[2^n]`.
    pub fn build(&self, n: u32) -> anyhow::Result<Ordering> {
        Ok(match self {
            OrderingSpec::Named(name) => Ordering::named(*name, n)?,
            OrderingSpec::Table(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading table file {}", path.display()))?;
                Ordering::parse_table(&text, n).with_context(|| format!("table file {}", path.display()))?
            }
            OrderingSpec::Matrix(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading matrix file {}", path.display()))?;
                let matrix =
                    LinearMatrix::parse(&text).with_context(|| format!("matrix file {}", path.display()))?;
                if matrix.dim() != n {
                    bail!("matrix file {} is {}x{}, need {n}x{n}", path.display(), matrix.dim(), matrix.dim());
                }
                Ordering::from_matrix(matrix)?
            }
            OrderingSpec::Subset { bits, seed } => Ordering::subset_scramble(bits, n, *seed)?,
            OrderingSpec::Compose(outer, inner) => Ordering::compose(&outer.build(n)?, &inner.build(n)?)?,
            OrderingSpec::Invert(inner) => inner.build(n)?.invert(),
        })
    }

    /// True if the ordering does not depend on `n` through a file.
    pub fn is_family(&self) -> bool {
        match self {
            OrderingSpec::Named(_) => true,
            OrderingSpec::Table(_) | OrderingSpec::Matrix(_) | OrderingSpec::Subset { .. } => false,
            OrderingSpec::Compose(a, b) => a.is_family() && b.is_family(),
            OrderingSpec::Invert(a) => a.is_family(),
        }
    }
}

/// Parse and build in one step.
pub fn parse_ordering_spec(s: &str, n: u32) -> anyhow::Result<Ordering> {
    let spec: OrderingSpec = s.parse()?;
    spec.build(n)
}
