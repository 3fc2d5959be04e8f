//! Line-oriented variety files.
//!
//! ```text
//! # comment
//! label = level two curve
//! p = 5
//! e = 1
//! vars = x1 x2 x3
//! eq x1^2 = x2*(x2 - 1)*(x2 - x3)
//! map x1          # one target coordinate per line
//! map x2 + x3     # consecutive map lines form one morphism;
//!                 # a blank line starts the next one
//! ```
//!
//! `eq lhs = rhs` stands for `lhs − rhs`.

use std::fmt;

use pzeta_core::poly::{parse_poly, ParseError};
use pzeta_core::{FieldSpec, MultiPoly, PolyMap, VarietySpec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileError {
    /// 1-based; 0 when the error is not tied to a line.
    pub line: usize,
    /// 1-based.
    pub column: usize,
    pub message: String,
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
        }
    }
}

impl std::error::Error for FileError {}

/// A source line with its position, kept for error reporting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Located {
    pub text: String,
    pub line: usize,
    /// 1-based column where `text` starts.
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VarietyFile {
    pub label: Option<String>,
    pub p: u64,
    pub e: usize,
    pub vars: Vec<String>,
    pub equations: Vec<Located>,
    pub maps: Vec<Vec<Located>>,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> FileError {
    FileError { line, column, message: message.into() }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn col_of(line: &str, sub: &str) -> usize {
    let start = sub.as_ptr() as usize - line.as_ptr() as usize;
    line[..start].chars().count() + 1
}

fn value_after_eq<'a>(raw: &str, rest: &'a str, lineno: usize, keyword: &str) -> Result<&'a str, FileError> {
    rest.trim_start()
        .strip_prefix('=')
        .map(str::trim)
        .ok_or_else(|| err(lineno, col_of(raw, rest), format!("expected '=' after '{keyword}'")))
}

impl VarietyFile {
    pub fn parse(text: &str) -> Result<Self, FileError> {
        let mut out = VarietyFile::default();
        let (mut p, mut e, mut vars) = (None, None, None);
        let mut group: Vec<Located> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = strip_comment(raw);
            let trimmed = line.trim();
            if trimmed.is_empty() {
                if !group.is_empty() {
                    out.maps.push(std::mem::take(&mut group));
                }
                continue;
            }
            let keyword_end = trimmed.find(|c: char| c.is_whitespace() || c == '=').unwrap_or(trimmed.len());
            let keyword = &trimmed[..keyword_end];
            let rest = &trimmed[keyword_end..];
            let value_of = |rest| value_after_eq(raw, rest, lineno, keyword);
            if keyword != "map" && !group.is_empty() {
                out.maps.push(std::mem::take(&mut group));
            }
            match keyword {
                "p" => {
                    let v = value_of(rest)?;
                    p = Some(v.parse::<u64>().map_err(|_| err(lineno, col_of(raw, v), format!("invalid characteristic '{v}'")))?);
                }
                "e" => {
                    let v = value_of(rest)?;
                    e = Some(v.parse::<usize>().map_err(|_| err(lineno, col_of(raw, v), format!("invalid degree '{v}'")))?);
                }
                "label" => out.label = Some(value_of(rest)?.to_string()),
                "vars" => {
                    let v = value_of(rest)?;
                    let names: Vec<String> = v.split_whitespace().map(str::to_string).collect();
                    for (i, name) in names.iter().enumerate() {
                        if *name != format!("x{}", i + 1) {
                            let at = col_of(raw, v) + v.find(name.as_str()).unwrap_or(0);
                            return Err(err(lineno, at, format!("variables must be x1..xn in order, found '{name}'")));
                        }
                    }
                    if names.is_empty() {
                        return Err(err(lineno, col_of(raw, v), "at least one variable is required"));
                    }
                    vars = Some(names);
                }
                "eq" | "map" => {
                    let body = rest.trim();
                    if body.is_empty() {
                        return Err(err(lineno, col_of(raw, rest), format!("'{keyword}' needs an expression")));
                    }
                    let loc = Located { text: body.to_string(), line: lineno, column: col_of(raw, body) };
                    if keyword == "eq" {
                        out.equations.push(loc);
                    } else {
                        group.push(loc);
                    }
                }
                other => return Err(err(lineno, col_of(raw, trimmed), format!("unknown directive '{other}'"))),
            }
        }
        if !group.is_empty() {
            out.maps.push(group);
        }
        out.p = p.ok_or_else(|| err(0, 0, "missing 'p = <prime>'"))?;
        out.e = e.unwrap_or(1);
        out.vars = vars.ok_or_else(|| err(0, 0, "missing 'vars = x1 ...'"))?;
        Ok(out)
    }

    pub fn field(&self) -> Result<FieldSpec, FileError> {
        FieldSpec::new(self.p, self.e).map_err(|e| err(0, 0, e.to_string()))
    }

    pub fn n(&self) -> usize {
        self.vars.len()
    }

    fn parse_expr(&self, loc: &Located, spec: &FieldSpec, allow_eq: bool) -> Result<MultiPoly, FileError> {
        let n = self.n();
        let at = |e: ParseError, offset: usize| {
            let msg = match &e {
                ParseError::Syntax { msg, .. } => msg.clone(),
                other => other.to_string(),
            };
            err(loc.line, loc.column + offset + e.position(), msg)
        };
        match loc.text.find('=') {
            Some(i) if allow_eq => {
                let lhs = &loc.text[..i];
                let rhs = &loc.text[i + 1..];
                let l = parse_poly(lhs, n, spec).map_err(|e| at(e, 0))?;
                let r = parse_poly(rhs, n, spec).map_err(|e| at(e, lhs.chars().count() + 1))?;
                Ok(l.sub(&r))
            }
            _ => parse_poly(&loc.text, n, spec).map_err(|e| at(e, 0)),
        }
    }

    pub fn to_variety(&self) -> Result<VarietySpec, FileError> {
        let spec = self.field()?;
        let eqs = self
            .equations
            .iter()
            .map(|loc| self.parse_expr(loc, &spec, true))
            .collect::<Result<Vec<_>, _>>()?;
        let mut maps = Vec::with_capacity(self.maps.len());
        for group in &self.maps {
            let comps = group.iter().map(|loc| self.parse_expr(loc, &spec, false)).collect::<Result<Vec<_>, _>>()?;
            maps.push(PolyMap::new(self.n(), comps).map_err(|e| err(group[0].line, group[0].column, e.to_string()))?);
        }
        let x = VarietySpec::new(spec, self.n(), eqs).map_err(|e| err(0, 0, e.to_string()))?;
        x.with_morphisms(maps).map_err(|e| err(0, 0, e.to_string()))
    }

    /// Canonical text form; parses back to the same file.
    pub fn render(&self) -> String {
        let mut s = String::new();
        if let Some(l) = &self.label {
            s.push_str(&format!("label = {l}\n"));
        }
        s.push_str(&format!("p = {}\ne = {}\nvars = {}\n", self.p, self.e, self.vars.join(" ")));
        for eq in &self.equations {
            s.push_str(&format!("eq {}\n", eq.text));
        }
        for group in &self.maps {
            s.push('\n');
            for m in group {
                s.push_str(&format!("map {}\n", m.text));
            }
        }
        s
    }

    /// Builds a file from equation strings (used by the search generator).
    pub fn from_parts(label: Option<String>, p: u64, e: usize, n: usize, equations: &[String]) -> Self {
        VarietyFile {
            label,
            p,
            e,
            vars: (1..=n).map(|i| format!("x{i}")).collect(),
            equations: equations.iter().map(|t| Located { text: t.clone(), line: 0, column: 0 }).collect(),
            maps: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SURFACE: &str = "# level two\nlabel = surface\np = 5\nvars = x1 x2 x3\neq x1^2 = x2*(x2 - 1)*(x2 - x3)\n";

    #[test]
    fn parses_surface() {
        let f = VarietyFile::parse(SURFACE).unwrap();
        assert_eq!(f.p, 5);
        assert_eq!(f.e, 1);
        assert_eq!(f.label.as_deref(), Some("surface"));
        let x = f.to_variety().unwrap();
        assert_eq!(x.n(), 3);
        assert_eq!(x.degrees(), vec![3]);
    }

    #[test]
    fn syntax_error_position() {
        let f = VarietyFile::parse("p = 3\nvars = x1 x2\neq x1 + * x2\n").unwrap();
        let e = f.to_variety().unwrap_err();
        assert_eq!((e.line, e.column), (3, 9));
        let f = VarietyFile::parse("p = 3\nvars = x1 x2\neq x1 = x2 + x3\n").unwrap();
        let e = f.to_variety().unwrap_err();
        assert_eq!((e.line, e.column), (3, 14));
        let e = VarietyFile::parse("p = 3\nvars = x1 y\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 11));
        let e = VarietyFile::parse("p = 3\nfoo 1\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn map_groups() {
        let text = "p = 2\nvars = x1 x2\neq x2 = x1^2\nmap x1 + x2\nmap x1\n\nmap x1*x2\n";
        let f = VarietyFile::parse(text).unwrap();
        assert_eq!(f.maps.len(), 2);
        assert_eq!(f.maps[0].len(), 2);
        let x = f.to_variety().unwrap();
        assert_eq!(x.morphisms()[0].target_dim(), 2);
        let again = VarietyFile::parse(&f.render()).unwrap();
        assert_eq!(again.render(), f.render());
    }
}
