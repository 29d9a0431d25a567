//! Text forms of group specs and subgroup expressions.
//!
//! ```text
//! group    = "freelex(" k ")" | "locallex(p=" P ")" | "polymod(p=" P ",n=" N ")"
//!          | "polypart(" [item {"," item}] ")"
//! item     = "(" p "," n ")" | cell ":(" p "," n ")" | "*=(" p "," n ")"
//! subgroup = convex | "sharp(" convex "," p "," s ")" | "shift(" subgroup "," p "," k ")"
//!          | "meet(" subgroup "," subgroup ")" | "join(" subgroup "," subgroup ")"
//!          | "scale(" p "," r "," subgroup ")"
//! convex   = "tail(" m ")" | "zero" | "full"
//! ```
//!
//! Unnumbered polypart items fill cells 0, 1, 2, ... in order.

use crate::error::{parse_err, Result};
use crate::group::{make_group, CellConstraint, Convex, GroupHandle, GroupSpec};
use crate::scalar::is_prime;
use crate::subgroup::SubgroupExpr;

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            parse_err(self.pos, format!("expected `{token}`"))
        }
    }

    fn word(&mut self) -> (usize, &'a str) {
        self.skip_ws();
        let start = self.pos;
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        (start, &self.src[start..self.pos])
    }

    fn nat<T: std::str::FromStr>(&mut self) -> Result<T> {
        self.skip_ws();
        let start = self.pos;
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return parse_err(start, "expected a natural number");
        }
        self.src[start..self.pos]
            .parse()
            .or_else(|_| parse_err(start, "number out of range"))
    }

    fn prime(&mut self) -> Result<u64> {
        self.skip_ws();
        let at = self.pos;
        let p = self.nat()?;
        if !is_prime(p) {
            return parse_err(at, format!("{p} is not prime"));
        }
        Ok(p)
    }

    fn finish(&mut self) -> Result<()> {
        self.skip_ws();
        if self.pos != self.src.len() {
            return parse_err(self.pos, "trailing input");
        }
        Ok(())
    }
}

/// Parses and constructs a group.
pub fn parse_group(text: &str) -> Result<GroupHandle> {
    make_group(parse_group_spec(text)?)
}

pub fn parse_group_spec(text: &str) -> Result<GroupSpec> {
    let mut c = Cursor::new(text);
    let (at, name) = c.word();
    c.expect("(")?;
    let spec = match name {
        "freelex" => GroupSpec::FreeLex { rank: c.nat()? },
        "locallex" => {
            c.expect("p=")?;
            GroupSpec::LocalLex { p: c.prime()? }
        }
        "polymod" => {
            c.expect("p=")?;
            let p = c.prime()?;
            c.expect(",")?;
            c.expect("n=")?;
            GroupSpec::PolyMod { p, n: c.nat()? }
        }
        "polypart" => {
            let mut constraints = Vec::new();
            let mut default = None;
            let mut next_cell = 0;
            c.skip_ws();
            if !c.src[c.pos..].starts_with(')') {
                loop {
                    if c.eat("*=") {
                        default = Some(pair(&mut c)?);
                    } else {
                        c.skip_ws();
                        let cell = if c.src[c.pos..].starts_with('(') {
                            next_cell
                        } else {
                            let cell = c.nat()?;
                            c.expect(":")?;
                            cell
                        };
                        let (p, n) = pair(&mut c)?;
                        constraints.push(CellConstraint { p, n, cell });
                        next_cell = cell + 1;
                    }
                    if !c.eat(",") {
                        break;
                    }
                }
            }
            GroupSpec::PolyPart {
                constraints,
                default,
            }
        }
        _ => return parse_err(at, format!("unknown group family `{name}`")),
    };
    c.expect(")")?;
    c.finish()?;
    Ok(spec)
}

fn pair(c: &mut Cursor<'_>) -> Result<(u64, u32)> {
    c.expect("(")?;
    let p = c.prime()?;
    c.expect(",")?;
    let n = c.nat()?;
    c.expect(")")?;
    Ok((p, n))
}

/// Parses a subgroup expression, checks its tail levels against the group
/// and simplifies chain meets and joins.
pub fn parse_subgroup_expr(text: &str, group: &GroupHandle) -> Result<SubgroupExpr> {
    let mut c = Cursor::new(text);
    let e = subgroup(&mut c)?;
    c.finish()?;
    e.validate(group)?;
    Ok(e.simplify(group))
}

fn convex(c: &mut Cursor<'_>) -> Result<Convex> {
    let (at, name) = c.word();
    match name {
        "zero" => Ok(Convex::Zero),
        "full" => Ok(Convex::FULL),
        "tail" => {
            c.expect("(")?;
            let m = c.nat()?;
            c.expect(")")?;
            Ok(Convex::Tail(m))
        }
        _ => parse_err(at, format!("expected a convex subgroup, found `{name}`")),
    }
}

fn subgroup(c: &mut Cursor<'_>) -> Result<SubgroupExpr> {
    let start = c.pos;
    let (at, name) = c.word();
    match name {
        "zero" | "full" | "tail" => {
            c.pos = start;
            Ok(SubgroupExpr::conv(convex(c)?))
        }
        "sharp" => {
            c.expect("(")?;
            let d = convex(c)?;
            c.expect(",")?;
            let p = c.prime()?;
            c.expect(",")?;
            let s_at = c.pos;
            let s = c.nat()?;
            if s == 0 {
                return parse_err(s_at, "sharp exponent must be at least 1");
            }
            c.expect(")")?;
            Ok(SubgroupExpr::sharp(d, p, s))
        }
        "shift" => {
            c.expect("(")?;
            let inner = subgroup(c)?;
            c.expect(",")?;
            let p = c.prime()?;
            c.expect(",")?;
            let k = c.nat()?;
            c.expect(")")?;
            Ok(inner.shift(p, k))
        }
        "meet" | "join" => {
            c.expect("(")?;
            let a = subgroup(c)?;
            c.expect(",")?;
            let b = subgroup(c)?;
            c.expect(")")?;
            Ok(if name == "meet" { a.meet(b) } else { a.join(b) })
        }
        "scale" => {
            c.expect("(")?;
            let p = c.prime()?;
            c.expect(",")?;
            let r = c.nat()?;
            c.expect(",")?;
            let inner = subgroup(c)?;
            c.expect(")")?;
            Ok(inner.scale(p, r))
        }
        _ => parse_err(at, format!("unknown subgroup form `{name}`")),
    }
}
