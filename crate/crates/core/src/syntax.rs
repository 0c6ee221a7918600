//! Element text syntax.
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := integer | atom ['^' exp]
//! exp    := integer | '{' integer ['/' integer] '}'
//! atom   := t | T | x1..x4 | e1..e9 | pflat | fflat
//! ```
//!
//! In a layer, `t^{q}` is the monomial of valuation q, so `t^{1/e}` is the
//! uniformizer and bare `t` equals p. In a tilt presentation `T` is the
//! generator. `e<i>` selects a component of a product.

use crate::arith::{q, Q};
use crate::error::{Error, Result};
use crate::layer::{LayerElem, LayerRing, Monomial, MAX_VARS};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Atom {
    T,
    Gen,
    Var(usize),
    Comp(usize),
    PFlat,
    FFlat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawTerm {
    pub coeff: i64,
    pub factors: Vec<(Atom, Q)>,
}

pub fn parse(src: &str) -> Result<Vec<RawTerm>> {
    let mut p = Parser {
        s: src.as_bytes(),
        pos: 0,
    };
    let out = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<i64> {
        self.ws();
        let start = self.pos;
        if self.pos < self.s.len() && self.s[self.pos] == b'-' {
            self.pos += 1;
        }
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        txt.parse().map_err(|_| Error::Parse {
            pos: start,
            msg: "expected integer".into(),
        })
    }

    fn expr(&mut self) -> Result<Vec<RawTerm>> {
        let mut out = Vec::new();
        let mut sign = if self.eat(b'-') { -1 } else { 1 };
        loop {
            let mut t = self.term()?;
            t.coeff = t
                .coeff
                .checked_mul(sign)
                .ok_or_else(|| self.err("overflow"))?;
            out.push(t);
            if self.eat(b'+') {
                sign = 1;
            } else if self.eat(b'-') {
                sign = -1;
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<RawTerm> {
        let mut t = RawTerm {
            coeff: 1,
            factors: Vec::new(),
        };
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() => {
                    let n = self.integer()?;
                    t.coeff = t.coeff.checked_mul(n).ok_or_else(|| self.err("overflow"))?;
                }
                Some(c) if c.is_ascii_alphabetic() => {
                    let atom = self.atom()?;
                    let exp = if self.eat(b'^') {
                        self.exponent()?
                    } else {
                        q(1, 1)
                    };
                    t.factors.push((atom, exp));
                }
                _ => return Err(self.err("expected a factor")),
            }
            if !self.eat(b'*') {
                return Ok(t);
            }
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let word = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        let bad = || Error::Parse {
            pos: start,
            msg: format!("unknown symbol {word:?}"),
        };
        Ok(match word {
            "t" => Atom::T,
            "T" => Atom::Gen,
            "pflat" => Atom::PFlat,
            "fflat" => Atom::FFlat,
            _ => {
                let (head, idx) = word.split_at(1);
                let i: usize = idx.parse().map_err(|_| bad())?;
                match head {
                    "x" if (1..=4).contains(&i) => Atom::Var(i - 1),
                    "e" if i >= 1 => Atom::Comp(i - 1),
                    _ => return Err(bad()),
                }
            }
        })
    }

    fn exponent(&mut self) -> Result<Q> {
        if self.eat(b'{') {
            let a = self.integer()?;
            let b = if self.eat(b'/') { self.integer()? } else { 1 };
            if !self.eat(b'}') {
                return Err(self.err("expected '}'"));
            }
            if b <= 0 {
                return Err(self.err("denominator must be positive"));
            }
            Ok(q(a, b))
        } else {
            Ok(q(self.integer()?, 1))
        }
    }
}

fn exp_to_int(x: Q, scale: u64, what: &str) -> Result<u64> {
    let v = x * Q::from_integer(scale as i64);
    if !v.is_integer() || v < q(0, 1) {
        return Err(Error::Parse {
            pos: 0,
            msg: format!("{what} exponent {x} is not on the lattice 1/{scale}"),
        });
    }
    Ok(*v.numer() as u64)
}

/// Monomials of one term: one per component unless a component is selected.
/// `extra` handles atoms that only make sense in a particular context.
pub fn term_monomials(
    ring: &LayerRing,
    factors: &[(Atom, Q)],
    extra: &mut dyn FnMut(Atom, Q) -> Result<u64>,
) -> Result<Vec<Monomial>> {
    let mut t = 0u64;
    let mut vars = [0u32; MAX_VARS];
    let mut comp: Option<usize> = None;
    let mut clash = false;
    for &(atom, x) in factors {
        match atom {
            Atom::T => t += exp_to_int(x, ring.e(), "t")?,
            Atom::Var(i) => {
                if i >= ring.num_vars() {
                    return Err(Error::Parse {
                        pos: 0,
                        msg: format!("ring has only {} variables", ring.num_vars()),
                    });
                }
                vars[i] += exp_to_int(x, ring.var_denominator(), "variable")? as u32;
            }
            Atom::Comp(i) => {
                if i >= ring.components() {
                    return Err(Error::Parse {
                        pos: 0,
                        msg: format!("ring has only {} components", ring.components()),
                    });
                }
                if x <= q(0, 1) || !x.is_integer() {
                    return Err(Error::Parse {
                        pos: 0,
                        msg: "component selectors take positive integer powers".into(),
                    });
                }
                if comp.is_some_and(|c| c != i) {
                    clash = true;
                }
                comp = Some(i);
            }
            other => t += extra(other, x)?,
        }
    }
    if clash {
        return Ok(Vec::new());
    }
    let comps: Vec<usize> = match comp {
        Some(c) => vec![c],
        None => (0..ring.components()).collect(),
    };
    Ok(comps
        .into_iter()
        .map(|c| Monomial {
            comp: c as u16,
            t,
            vars,
        })
        .collect())
}

/// Parse an element of a layer ring. `T^k` is accepted as the raw power `t^{k/e}`.
pub fn layer_elem(ring: &LayerRing, src: &str) -> Result<LayerElem> {
    let md = ring.modulus();
    let mut out = Vec::new();
    for term in parse(src)? {
        let c = md.reduce_i128(term.coeff as i128);
        let monos = term_monomials(ring, &term.factors, &mut |atom, x| match atom {
            Atom::Gen => exp_to_int(x, 1, "T"),
            _ => Err(Error::Parse {
                pos: 0,
                msg: "tilt symbols are not elements of a layer".into(),
            }),
        })?;
        out.extend(monos.into_iter().map(|m| (m, c)));
    }
    Ok(ring.from_terms(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_terms() {
        let t = parse("1 + 2*t^{1/5} - 3*x1^{2/25}*e2").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t[1].coeff, 2);
        assert_eq!(t[1].factors, vec![(Atom::T, q(1, 5))]);
        assert_eq!(t[2].coeff, -3);
        assert_eq!(
            t[2].factors,
            vec![(Atom::Var(0), q(2, 25)), (Atom::Comp(1), q(1, 1))]
        );
    }

    #[test]
    fn parses_tilt_atoms() {
        let t = parse("pflat^2 + T^7 + fflat").unwrap();
        assert_eq!(t[0].factors, vec![(Atom::PFlat, q(2, 1))]);
        assert_eq!(t[1].factors, vec![(Atom::Gen, q(7, 1))]);
    }

    #[test]
    fn layer_roundtrip() {
        use crate::arith::Prime;
        use crate::layer::layer_make_with_cap;
        let r = layer_make_with_cap(Prime::new(5).unwrap(), 6, 25, 1, q(1, 1), q(1, 1)).unwrap();
        for src in ["1 + 2*t^{1/25}", "3*t^{7/25}*x1^{2/25}", "0", "x1"] {
            let x = layer_elem(&r, src).unwrap();
            assert_eq!(x.to_string(), src);
        }
        assert_eq!(layer_elem(&r, "t").unwrap(), r.constant(5));
        assert_eq!(layer_elem(&r, "-1").unwrap(), r.constant(-1));
        assert!(layer_elem(&r, "t^{1/3}").is_err());
        assert!(layer_elem(&r, "pflat").is_err());
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("1 + ").is_err());
        assert!(parse("y^2").is_err());
        assert!(parse("t^{1/0}").is_err());
        assert!(parse("x5").is_err());
    }
}
