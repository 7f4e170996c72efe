//! Coloured point multisets and their text format.
//!
//! ```text
//! d Δ n_red n_blue n_plain
//! R x_1 … x_d
//! ```
//!
//! Entries keep their order, so a parse followed by a write reproduces the
//! input byte for byte.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geom::{Color, Domain, Point};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    domain: Domain,
    entries: Vec<(Color, Point)>,
}

impl PointSet {
    pub fn new(domain: Domain) -> Self {
        Self { domain, entries: Vec::new() }
    }

    pub fn from_points(domain: Domain, color: Color, points: &[Point]) -> Result<Self> {
        let mut s = Self::new(domain);
        for p in points {
            s.push(color, *p)?;
        }
        Ok(s)
    }

    pub fn colored(domain: Domain, red: &[Point], blue: &[Point]) -> Result<Self> {
        let mut s = Self::from_points(domain, Color::Red, red)?;
        for p in blue {
            s.push(Color::Blue, *p)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, color: Color, p: Point) -> Result<()> {
        self.domain.check(&p)?;
        self.entries.push((color, p));
        Ok(())
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn entries(&self) -> &[(Color, Point)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn points(&self, color: Color) -> Vec<Point> {
        self.entries.iter().filter(|(c, _)| *c == color).map(|&(_, p)| p).collect()
    }

    /// Every point regardless of colour.
    pub fn all_points(&self) -> Vec<Point> {
        self.entries.iter().map(|&(_, p)| p).collect()
    }

    pub fn count(&self, color: Color) -> usize {
        self.entries.iter().filter(|(c, _)| *c == color).count()
    }

    pub fn to_text(&self) -> String {
        let d = self.domain.dim();
        let mut s = format!(
            "{} {} {} {} {}\n",
            d,
            self.domain.delta(),
            self.count(Color::Red),
            self.count(Color::Blue),
            self.count(Color::Plain)
        );
        for (c, p) in &self.entries {
            s.push(c.tag());
            for x in p.coords(d) {
                let _ = write!(s, " {x}");
            }
            s.push('\n');
        }
        s
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::read_from(text.as_bytes())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let header = header?;
        let h: Vec<i64> = header
            .split_whitespace()
            .map(|t| t.parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
        if h.len() != 5 || h.iter().any(|&x| x < 0) {
            return Err(Error::Parse { line: 1, msg: "expected `d Δ n_red n_blue n_plain`".into() });
        }
        let domain = Domain::new(h[0] as usize, h[1])?;
        let d = domain.dim();
        let mut set = Self::new(domain);
        for (i, line) in lines {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            let color = toks
                .next()
                .and_then(Color::from_tag)
                .ok_or_else(|| Error::Parse { line: lineno, msg: "expected colour R, B or P".into() })?;
            let coords: Vec<i64> = toks
                .map(|t| t.parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
            if coords.len() != d {
                return Err(Error::Parse { line: lineno, msg: format!("expected {d} coordinates") });
            }
            set.push(color, Point::new(&coords)).map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
        }
        let declared = [h[2], h[3], h[4]];
        let actual = [set.count(Color::Red), set.count(Color::Blue), set.count(Color::Plain)];
        if declared.iter().zip(actual.iter()).any(|(&a, &b)| a as usize != b) {
            return Err(Error::Parse { line: 1, msg: format!("header counts {declared:?} but file holds {actual:?}") });
        }
        Ok(set)
    }
}
