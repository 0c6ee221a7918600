//! Quotients `R/I_0` of layer rings: finite F_p-algebras with monomial bases.

use crate::arith::Modulus;
use crate::error::{Error, Result};
use crate::layer::{format_terms, LayerElem, LayerRing, Monomial, TSymbol, MAX_VARS};
use std::fmt;
use std::sync::Arc;

#[derive(Debug)]
struct SpaceInner {
    ring: LayerRing,
    fp: Modulus,
    powers: Vec<u64>,
    offsets: Vec<usize>,
    dim: usize,
}

#[derive(Clone, Debug)]
pub struct QuotSpace(Arc<SpaceInner>);

impl PartialEq for QuotSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.ring == other.0.ring
    }
}
impl Eq for QuotSpace {}

impl QuotSpace {
    /// `R/I_0`; requires `p in I_0` so that the quotient is an F_p-algebra.
    pub fn new(ring: &LayerRing) -> Result<Self> {
        let mut powers = Vec::new();
        for (i, c) in ring.ideal_powers().iter().enumerate() {
            match c {
                Some(c) if *c <= ring.t_range() && (!ring.is_mixed() || *c <= ring.e()) => {
                    powers.push(*c)
                }
                _ => {
                    return Err(Error::Invalid(format!(
                        "p is not in the ideal on component {}",
                        i + 1
                    )))
                }
            }
        }
        let nv = ring.var_monos().len();
        let mut offsets = Vec::new();
        let mut dim = 0;
        for c in &powers {
            offsets.push(dim);
            dim += *c as usize * nv;
        }
        Ok(QuotSpace(Arc::new(SpaceInner {
            ring: ring.clone(),
            fp: Modulus::new(ring.prime(), 1)?,
            powers,
            offsets,
            dim,
        })))
    }

    pub fn ring(&self) -> &LayerRing {
        &self.0.ring
    }
    pub fn dim(&self) -> usize {
        self.0.dim
    }
    pub fn fp(&self) -> Modulus {
        self.0.fp
    }
    /// Per component, the exponent c with `I_0 = (t^c)` there.
    pub fn powers(&self) -> &[u64] {
        &self.0.powers
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        let comp = m.comp as usize;
        if comp >= self.0.powers.len() || m.t >= self.0.powers[comp] {
            return None;
        }
        let vi = self.0.ring.var_index(&m.vars)?;
        let nv = self.0.ring.var_monos().len();
        Some(self.0.offsets[comp] + m.t as usize * nv + vi)
    }

    pub fn monomial_at(&self, idx: usize) -> Monomial {
        let comp = match self.0.offsets.binary_search(&idx) {
            Ok(mut i) => {
                // skip empty components sharing the same offset
                while i + 1 < self.0.offsets.len() && self.0.offsets[i + 1] == idx {
                    i += 1;
                }
                i
            }
            Err(i) => i - 1,
        };
        let nv = self.0.ring.var_monos().len();
        let rel = idx - self.0.offsets[comp];
        Monomial {
            comp: comp as u16,
            t: (rel / nv) as u64,
            vars: self.0.ring.var_monos()[rel % nv],
        }
    }

    pub fn zero(&self) -> QuotElem {
        QuotElem {
            space: self.clone(),
            coeffs: vec![0; self.dim()],
        }
    }

    pub fn one(&self) -> QuotElem {
        let mut z = self.zero();
        for comp in 0..self.0.powers.len() {
            if let Some(i) = self.index_of(&Monomial::new(comp, 0)) {
                z.coeffs[i] = 1;
            }
        }
        z
    }

    pub fn basis(&self, idx: usize) -> QuotElem {
        let mut z = self.zero();
        z.coeffs[idx] = 1;
        z
    }

    pub fn from_coeffs(&self, coeffs: Vec<u64>) -> QuotElem {
        assert_eq!(coeffs.len(), self.dim());
        let p = self.0.fp.p;
        QuotElem {
            space: self.clone(),
            coeffs: coeffs.into_iter().map(|c| c % p).collect(),
        }
    }

    /// Add `c * m` into a coefficient vector, dropping monomials that lie in I_0.
    pub fn push_monomial(&self, coeffs: &mut [u64], m: &Monomial, c: u64) {
        if let Some(i) = self.index_of(m) {
            coeffs[i] = self.0.fp.add(coeffs[i], c % self.0.fp.p);
        }
    }

    /// Image of a layer element modulo I_0.
    pub fn reduce(&self, x: &LayerElem) -> Result<QuotElem> {
        if x.ring() != self.ring() {
            return Err(Error::RingMismatch);
        }
        let mut z = self.zero();
        let p = self.0.fp.p;
        for (m, c) in x.terms() {
            if c % p != 0 {
                self.push_monomial(&mut z.coeffs, m, *c);
            }
        }
        Ok(z)
    }
}

#[derive(Clone, Debug)]
pub struct QuotElem {
    space: QuotSpace,
    coeffs: Vec<u64>,
}

impl PartialEq for QuotElem {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.coeffs == other.coeffs
    }
}
impl Eq for QuotElem {}

impl QuotElem {
    pub fn space(&self) -> &QuotSpace {
        &self.space
    }
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    pub fn terms(&self) -> Vec<(Monomial, u64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| (self.space.monomial_at(i), *c))
            .collect()
    }

    fn check(&self, other: &QuotElem) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn add(&self, other: &QuotElem) -> Result<QuotElem> {
        self.check(other)?;
        let f = self.space.fp();
        Ok(QuotElem {
            space: self.space.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f.add(*a, *b))
                .collect(),
        })
    }

    pub fn neg(&self) -> QuotElem {
        let f = self.space.fp();
        QuotElem {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|a| f.neg(*a)).collect(),
        }
    }

    pub fn sub(&self, other: &QuotElem) -> Result<QuotElem> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u64) -> QuotElem {
        let f = self.space.fp();
        QuotElem {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|a| f.mul(*a, c % f.p)).collect(),
        }
    }

    pub fn mul(&self, other: &QuotElem) -> Result<QuotElem> {
        self.check(other)?;
        let f = self.space.fp();
        let sp = &self.space;
        let ring = sp.ring();
        let nvars = ring.num_vars();
        let cap = ring.var_cap_num();
        let a = self.terms();
        let b = other.terms();
        let mut out = vec![0u64; sp.dim()];
        for (ma, ca) in &a {
            for (mb, cb) in &b {
                if ma.comp != mb.comp {
                    continue;
                }
                let t = ma.t + mb.t;
                if t >= sp.powers()[ma.comp as usize] {
                    continue;
                }
                let mut vars = [0u32; MAX_VARS];
                let mut deg = 0;
                for i in 0..nvars {
                    vars[i] = ma.vars[i] + mb.vars[i];
                    deg += vars[i] as u64;
                }
                if deg > cap {
                    continue;
                }
                let m = Monomial {
                    comp: ma.comp,
                    t,
                    vars,
                };
                let i = sp.index_of(&m).expect("in range");
                out[i] = f.add(out[i], f.mul(*ca, *cb));
            }
        }
        Ok(QuotElem {
            space: sp.clone(),
            coeffs: out,
        })
    }

    /// x -> x^p, which is additive on an F_p-algebra.
    pub fn frobenius(&self) -> QuotElem {
        let sp = &self.space;
        let p = sp.fp().p;
        let mut out = vec![0u64; sp.dim()];
        for (m, c) in self.terms() {
            let mut vars = m.vars;
            for v in vars.iter_mut() {
                *v *= p as u32;
            }
            if vars.iter().map(|v| *v as u64).sum::<u64>() > sp.ring().var_cap_num() {
                continue;
            }
            sp.push_monomial(
                &mut out,
                &Monomial {
                    comp: m.comp,
                    t: m.t * p,
                    vars,
                },
                c,
            );
        }
        QuotElem {
            space: sp.clone(),
            coeffs: out,
        }
    }

    pub fn pow(&self, k: u64) -> QuotElem {
        let mut result = self.space.one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base).expect("same space");
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base).expect("same space");
            }
        }
        result
    }

    /// Canonical lift: coefficients in {0..p-1}, monomial by monomial.
    pub fn lift(&self) -> LayerElem {
        self.space.ring().from_terms(self.terms())
    }
}

impl fmt::Display for QuotElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ring = self.space.ring();
        let sym = if ring.is_mixed() {
            TSymbol::Valuation
        } else {
            TSymbol::Generator
        };
        let terms = self.terms();
        write!(f, "{}", format_terms(ring, terms.iter(), sym))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, Prime};
    use crate::layer::layer_make;

    #[test]
    fn reduction_kills_ideal_and_p() {
        let r = layer_make(Prime::new(5).unwrap(), 6, 5, 0, q(1, 1)).unwrap();
        let sp = QuotSpace::new(&r).unwrap();
        assert_eq!(sp.dim(), 5);
        // 1 + t + t^7 where t^7 = 5 t^2
        let x = r.one().add(&r.t_pow(1)).unwrap().add(&r.t_pow(7)).unwrap();
        let z = sp.reduce(&x).unwrap();
        assert_eq!(z.to_string(), "1 + t^{1/5}");
        assert_eq!(z.lift(), r.one().add(&r.t_pow(1)).unwrap());
    }

    #[test]
    fn frobenius_is_pth_power() {
        let r = layer_make(Prime::new(3).unwrap(), 4, 27, 0, q(1, 1)).unwrap();
        let sp = QuotSpace::new(&r).unwrap();
        let x = sp.from_coeffs((0..27).map(|i| (i * 7 + 1) % 3).collect());
        assert_eq!(x.frobenius(), x.pow(3));
    }
}
