//! Truncated layer rings.
//!
//! A mixed-characteristic layer is `(Z/p^N)[t]/(t^e - p)` (one copy per
//! component), optionally tensored with monomials `x^beta` in up to four
//! auxiliary variables whose exponents live in `(1/d)Z`, truncated at total
//! degree `D`. A positive-characteristic layer is `F_p[t]/(t^K)` with the same
//! decorations; there `t` still has valuation `1/e`.

use crate::arith::{fmt_q, q, ser_q, ExpLattice, Modulus, Prime, Valuation, Q};
use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

pub const MAX_VARS: usize = 4;
pub type VarExps = [u32; MAX_VARS];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub comp: u16,
    pub t: u64,
    pub vars: VarExps,
}

impl Monomial {
    pub fn new(comp: usize, t: u64) -> Self {
        Monomial {
            comp: comp as u16,
            t,
            vars: [0; MAX_VARS],
        }
    }

    pub fn var_degree(&self) -> u64 {
        self.vars.iter().map(|&v| v as u64).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Characteristic {
    Mixed,
    Positive { top: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayerParams {
    pub prime: Prime,
    pub n_digits: u32,
    pub characteristic: Characteristic,
    pub eisen_exp: u64,
    pub components: usize,
    pub num_vars: usize,
    pub var_lattice: ExpLattice,
    #[serde(serialize_with = "ser_q")]
    pub var_degree_cap: Q,
    #[serde(serialize_with = "ser_q")]
    pub ideal_exp: Q,
    /// Per component: f_0 restricted to that component is `t^c`, or zero.
    pub ideal_powers: Vec<Option<u64>>,
}

impl LayerParams {
    /// Standard parameters: every component has ideal generator `t^(eps*e)`.
    pub fn standard(
        prime: Prime,
        n_digits: u32,
        characteristic: Characteristic,
        eisen_exp: u64,
        components: usize,
        num_vars: usize,
        var_lattice: ExpLattice,
        var_degree_cap: Q,
        ideal_exp: Q,
    ) -> Result<Self> {
        let c = ideal_power(ideal_exp, eisen_exp)?;
        Ok(LayerParams {
            prime,
            n_digits,
            characteristic,
            eisen_exp,
            components,
            num_vars,
            var_lattice,
            var_degree_cap,
            ideal_exp,
            ideal_powers: vec![Some(c); components],
        })
    }
}

/// `eps * e` as an integer, validating `eps` in (0, 1].
pub fn ideal_power(ideal_exp: Q, e: u64) -> Result<u64> {
    if ideal_exp <= q(0, 1) || ideal_exp > q(1, 1) {
        return Err(Error::BadIdealExponent(fmt_q(&ideal_exp)));
    }
    let c = ideal_exp * Q::from_integer(e as i64);
    if !c.is_integer() {
        return Err(Error::NonIntegralIdeal {
            exp: fmt_q(&ideal_exp),
            e,
        });
    }
    Ok(*c.numer() as u64)
}

#[derive(Debug)]
struct Inner {
    params: LayerParams,
    modulus: Modulus,
    t_range: u64,
    var_cap_num: u64,
    var_monos: Vec<VarExps>,
    var_index: HashMap<VarExps, usize>,
}

#[derive(Clone, Debug)]
pub struct LayerRing(Arc<Inner>);

impl PartialEq for LayerRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.params == other.0.params
    }
}
impl Eq for LayerRing {}

fn enumerate_var_monos(num_vars: usize, cap: u64) -> Vec<VarExps> {
    fn rec(i: usize, n: usize, left: u64, cur: &mut VarExps, out: &mut Vec<VarExps>) {
        if i == n {
            out.push(*cur);
            return;
        }
        for a in 0..=left {
            cur[i] = a as u32;
            rec(i + 1, n, left - a, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    rec(0, num_vars, cap, &mut [0; MAX_VARS], &mut out);
    out
}

impl LayerRing {
    /// Build a layer, enforcing `p in I` and an integral ideal generator.
    pub fn new(params: LayerParams) -> Result<Self> {
        let c = ideal_power(params.ideal_exp, params.eisen_exp)?;
        if params.ideal_powers.iter().any(|x| *x != Some(c)) {
            return Err(Error::Invalid(
                "ideal powers disagree with the ideal exponent".into(),
            ));
        }
        Self::new_unchecked(params)
    }

    /// Build a layer with arbitrary per-component ideal generators. Used for
    /// deliberately broken towers.
    pub fn new_unchecked(params: LayerParams) -> Result<Self> {
        let p = params.prime;
        if params.eisen_exp == 0 {
            return Err(Error::Invalid("ramification index must be positive".into()));
        }
        if params.components == 0 || params.components > u16::MAX as usize {
            return Err(Error::Invalid("bad component count".into()));
        }
        if params.ideal_powers.len() != params.components {
            return Err(Error::Invalid("one ideal power per component".into()));
        }
        if params.num_vars > MAX_VARS {
            return Err(Error::Invalid(format!("at most {MAX_VARS} variables")));
        }
        if !p.is_power(params.var_lattice.denominator) {
            return Err(Error::Invalid(
                "variable exponent denominators must be powers of p".into(),
            ));
        }
        if params.var_degree_cap < q(0, 1) {
            return Err(Error::BadPrecision("negative variable degree cap".into()));
        }
        let (modulus, t_range) = match params.characteristic {
            Characteristic::Mixed => (Modulus::new(p, params.n_digits)?, params.eisen_exp),
            Characteristic::Positive { top } => {
                if top == 0 {
                    return Err(Error::Invalid("truncation must be positive".into()));
                }
                (Modulus::new(p, 1)?, top)
            }
        };
        let cap = params.var_degree_cap * Q::from_integer(params.var_lattice.denominator as i64);
        let var_cap_num = if params.num_vars == 0 {
            0
        } else {
            cap.floor().to_integer() as u64
        };
        let var_monos = enumerate_var_monos(params.num_vars, var_cap_num);
        let var_index = var_monos.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        Ok(LayerRing(Arc::new(Inner {
            params,
            modulus,
            t_range,
            var_cap_num,
            var_monos,
            var_index,
        })))
    }

    pub fn params(&self) -> &LayerParams {
        &self.0.params
    }
    pub fn prime(&self) -> Prime {
        self.0.params.prime
    }
    pub fn modulus(&self) -> Modulus {
        self.0.modulus
    }
    pub fn e(&self) -> u64 {
        self.0.params.eisen_exp
    }
    pub fn components(&self) -> usize {
        self.0.params.components
    }
    pub fn num_vars(&self) -> usize {
        self.0.params.num_vars
    }
    pub fn is_mixed(&self) -> bool {
        self.0.params.characteristic == Characteristic::Mixed
    }
    /// Number of powers of `t` in the monomial basis (e, or the truncation K).
    pub fn t_range(&self) -> u64 {
        self.0.t_range
    }
    pub fn var_cap_num(&self) -> u64 {
        self.0.var_cap_num
    }
    pub fn var_monos(&self) -> &[VarExps] {
        &self.0.var_monos
    }
    pub fn var_index(&self, v: &VarExps) -> Option<usize> {
        self.0.var_index.get(v).copied()
    }
    pub fn var_denominator(&self) -> u64 {
        self.0.params.var_lattice.denominator
    }
    pub fn ideal_powers(&self) -> &[Option<u64>] {
        &self.0.params.ideal_powers
    }

    /// Valuation at which information is cut off: N, or K/e in characteristic p.
    pub fn precision(&self) -> Q {
        match self.0.params.characteristic {
            Characteristic::Mixed => Q::from_integer(self.0.params.n_digits as i64),
            Characteristic::Positive { top } => q(top as i64, self.e() as i64),
        }
    }

    /// Rank of the monomial basis (over Z/p^N or F_p).
    pub fn rank(&self) -> usize {
        self.components() * self.0.t_range as usize * self.0.var_monos.len()
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        let vi = self.var_index(&m.vars)?;
        if m.t >= self.0.t_range || m.comp as usize >= self.components() {
            return None;
        }
        Some(
            (m.comp as usize * self.0.t_range as usize + m.t as usize) * self.0.var_monos.len()
                + vi,
        )
    }

    pub fn monomial_at(&self, idx: usize) -> Monomial {
        let nv = self.0.var_monos.len();
        let vi = idx % nv;
        let rest = idx / nv;
        let t = (rest % self.0.t_range as usize) as u64;
        let comp = rest / self.0.t_range as usize;
        Monomial {
            comp: comp as u16,
            t,
            vars: self.0.var_monos[vi],
        }
    }

    /// Valuation of a basis monomial with coefficient of valuation `cv`.
    pub fn term_valuation(&self, m: &Monomial, cv: u32) -> Q {
        q(cv as i64 * self.e() as i64 + m.t as i64, self.e() as i64)
    }

    pub fn zero(&self) -> LayerElem {
        LayerElem {
            ring: self.clone(),
            terms: Vec::new(),
            lossy: false,
        }
    }

    pub fn one(&self) -> LayerElem {
        self.constant(1)
    }

    pub fn constant(&self, c: i64) -> LayerElem {
        let c = self.0.modulus.reduce_i128(c as i128);
        self.from_terms((0..self.components()).map(|i| (Monomial::new(i, 0), c)))
    }

    /// `t^k` in every component (carries through `t^e = p`).
    pub fn t_pow(&self, k: u64) -> LayerElem {
        self.from_terms((0..self.components()).map(|i| (Monomial::new(i, k), 1)))
    }

    /// The idempotent of one component.
    pub fn component_one(&self, comp: usize) -> LayerElem {
        self.from_terms([(Monomial::new(comp, 0), 1)])
    }

    /// The generator f_0 of the ideal (per component `t^c`, or zero).
    pub fn ideal_generator(&self) -> LayerElem {
        let terms: Vec<_> = self
            .ideal_powers()
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (Monomial::new(i, c), 1)))
            .collect();
        self.from_terms(terms)
    }

    /// Canonicalize arbitrary terms: `t^k` with `k >= e` carries into p, the
    /// truncation drops the rest.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, u64)>>(&self, it: I) -> LayerElem {
        let m = self.0.modulus;
        let mut acc: HashMap<Monomial, u64> = HashMap::new();
        let mut lossy = false;
        for (mut mono, c) in it {
            let c = c % m.value;
            if c == 0 {
                continue;
            }
            let mut c = c;
            if mono.var_degree() > self.0.var_cap_num || self.var_index(&mono.vars).is_none() {
                lossy = true;
                continue;
            }
            match self.0.params.characteristic {
                Characteristic::Mixed => {
                    let e = self.e();
                    let carry = mono.t / e;
                    mono.t %= e;
                    if carry >= m.digits as u64 {
                        lossy = true;
                        continue;
                    }
                    c = m.mul(c, m.p_pow(carry as u32));
                    if c == 0 {
                        lossy = true;
                        continue;
                    }
                }
                Characteristic::Positive { top } => {
                    if mono.t >= top {
                        lossy = true;
                        continue;
                    }
                }
            }
            let slot = acc.entry(mono).or_insert(0);
            *slot = m.add(*slot, c);
        }
        let mut terms: Vec<(Monomial, u64)> = acc.into_iter().filter(|(_, c)| *c != 0).collect();
        terms.sort_unstable_by_key(|a| a.0);
        LayerElem {
            ring: self.clone(),
            terms,
            lossy,
        }
    }

    pub fn from_coords(&self, coords: &[u64]) -> LayerElem {
        self.from_terms(
            coords
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0)
                .map(|(i, c)| (self.monomial_at(i), *c)),
        )
    }
}

#[derive(Clone, Debug)]
pub struct LayerElem {
    ring: LayerRing,
    terms: Vec<(Monomial, u64)>,
    lossy: bool,
}

impl PartialEq for LayerElem {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.terms == other.terms
    }
}
impl Eq for LayerElem {}

impl LayerElem {
    pub fn ring(&self) -> &LayerRing {
        &self.ring
    }
    pub fn terms(&self) -> &[(Monomial, u64)] {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    /// Set when some operation may have dropped information past the precision.
    pub fn lossy(&self) -> bool {
        self.lossy
    }
    pub fn with_lossy(mut self, lossy: bool) -> Self {
        self.lossy |= lossy;
        self
    }

    pub fn coeff(&self, m: &Monomial) -> u64 {
        match self.terms.binary_search_by(|(x, _)| x.cmp(m)) {
            Ok(i) => self.terms[i].1,
            Err(_) => 0,
        }
    }

    pub fn coords(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.ring.rank()];
        for (m, c) in &self.terms {
            v[self.ring.index_of(m).expect("canonical monomial")] = *c;
        }
        v
    }

    fn check(&self, other: &LayerElem) -> Result<()> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn add(&self, other: &LayerElem) -> Result<LayerElem> {
        self.check(other)?;
        let r = self
            .ring
            .from_terms(self.terms.iter().chain(other.terms.iter()).copied());
        Ok(r.with_lossy(self.lossy || other.lossy))
    }

    pub fn neg(&self) -> LayerElem {
        let m = self.ring.modulus();
        LayerElem {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(x, c)| (*x, m.neg(*c))).collect(),
            lossy: self.lossy,
        }
    }

    pub fn sub(&self, other: &LayerElem) -> Result<LayerElem> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: i64) -> LayerElem {
        let m = self.ring.modulus();
        let c = m.reduce_i128(c as i128);
        self.ring
            .from_terms(self.terms.iter().map(|(x, a)| (*x, m.mul(*a, c))))
            .with_lossy(self.lossy)
    }

    fn max_term_valuation(&self) -> Option<Q> {
        let m = self.ring.modulus();
        self.terms
            .iter()
            .map(|(x, c)| self.ring.term_valuation(x, m.val(*c)))
            .max()
    }

    pub fn mul(&self, other: &LayerElem) -> Result<LayerElem> {
        self.check(other)?;
        let ring = &self.ring;
        if self.is_zero() || other.is_zero() {
            return Ok(ring.zero().with_lossy(self.lossy || other.lossy));
        }
        let md = ring.modulus();
        let mixed = ring.is_mixed();
        let e = ring.e();
        let top = ring.t_range();
        let cap = ring.var_cap_num();
        let nvars = ring.num_vars();
        let mut lossy = self.lossy || other.lossy;
        if mixed {
            if let (Some(a), Some(b)) = (self.max_term_valuation(), other.max_term_valuation()) {
                if a + b >= ring.precision() {
                    lossy = true;
                }
            }
        }
        // Bound on a single contribution, to decide whether raw u128 sums are safe.
        let pf_max = if mixed { md.p as u128 } else { 1 };
        let per = (md.value as u128) * (md.value as u128) * pf_max;
        let n_pairs = (self.terms.len() * other.terms.len()) as u128;
        let raw_ok = per.checked_mul(n_pairs + 1).is_some();

        let contrib = |acc: &mut dyn FnMut(Monomial, u128),
                       a: &(Monomial, u64),
                       b: &(Monomial, u64),
                       lossy: &mut bool| {
            if a.0.comp != b.0.comp {
                return;
            }
            let mut t = a.0.t + b.0.t;
            let mut pf = 1u128;
            if mixed {
                if t >= e {
                    t -= e;
                    pf = md.p as u128;
                }
            } else if t >= top {
                *lossy = true;
                return;
            }
            let mut vars = [0u32; MAX_VARS];
            if nvars > 0 {
                let mut deg = 0u64;
                for i in 0..nvars {
                    vars[i] = a.0.vars[i] + b.0.vars[i];
                    deg += vars[i] as u64;
                }
                if deg > cap {
                    *lossy = true;
                    return;
                }
            }
            let v = if raw_ok {
                a.1 as u128 * b.1 as u128 * pf
            } else {
                (md.mul(md.mul(a.1, b.1), pf as u64)) as u128
            };
            acc(
                Monomial {
                    comp: a.0.comp,
                    t,
                    vars,
                },
                v,
            );
        };

        let rank = ring.rank();
        let dense = (self.terms.len() * other.terms.len()) >= rank / 4 && rank <= (1 << 24);
        if dense && nvars == 0 {
            let (terms, l) = self.convolve(other, raw_ok);
            return Ok(LayerElem {
                ring: ring.clone(),
                terms,
                lossy: lossy || l,
            });
        }
        let mut out_terms: Vec<(Monomial, u64)>;
        if dense {
            let mut acc = vec![0u128; rank];
            {
                let mut push = |m: Monomial, v: u128| {
                    let idx = ring.index_of(&m).expect("in range");
                    acc[idx] += v;
                };
                for a in &self.terms {
                    for b in &other.terms {
                        contrib(&mut push, a, b, &mut lossy);
                    }
                }
            }
            out_terms = Vec::new();
            let mv = md.value as u128;
            for (i, v) in acc.into_iter().enumerate() {
                let r = (v % mv) as u64;
                if r != 0 {
                    out_terms.push((ring.monomial_at(i), r));
                }
            }
        } else {
            let mut acc: HashMap<Monomial, u128> = HashMap::new();
            {
                let mut push = |m: Monomial, v: u128| {
                    let slot = acc.entry(m).or_insert(0);
                    *slot += v;
                    if !raw_ok {
                        *slot %= md.value as u128;
                    }
                };
                for a in &self.terms {
                    for b in &other.terms {
                        contrib(&mut push, a, b, &mut lossy);
                    }
                }
            }
            let mv = md.value as u128;
            out_terms = acc
                .into_iter()
                .map(|(m, v)| (m, (v % mv) as u64))
                .filter(|(_, c)| *c != 0)
                .collect();
            out_terms.sort_unstable_by_key(|a| a.0);
        }
        Ok(LayerElem {
            ring: ring.clone(),
            terms: out_terms,
            lossy,
        })
    }

    /// Dense product for rings without variables: one convolution per
    /// component, then `t^e = p` (mixed) or truncation (characteristic p).
    fn convolve(&self, other: &LayerElem, raw_ok: bool) -> (Vec<(Monomial, u64)>, bool) {
        let ring = &self.ring;
        let md = ring.modulus();
        let mv = md.value as u128;
        let range = ring.t_range() as usize;
        let mut lossy = false;
        let mut out = Vec::new();
        for comp in 0..ring.components() {
            let mut a = vec![0u64; range];
            let mut b = vec![0u64; range];
            for (m, c) in self.terms.iter().filter(|(m, _)| m.comp as usize == comp) {
                a[m.t as usize] = *c;
            }
            for (m, c) in other.terms.iter().filter(|(m, _)| m.comp as usize == comp) {
                b[m.t as usize] = *c;
            }
            let (Some(ta), Some(tb)) = (
                a.iter().rposition(|&c| c != 0),
                b.iter().rposition(|&c| c != 0),
            ) else {
                continue;
            };
            let mut acc = vec![0u128; ta + tb + 1];
            for (i, &x) in a[..=ta].iter().enumerate() {
                if x == 0 {
                    continue;
                }
                let row = &mut acc[i..=i + tb];
                if raw_ok {
                    for (slot, &y) in row.iter_mut().zip(&b[..=tb]) {
                        *slot += x as u128 * y as u128;
                    }
                } else {
                    for (slot, &y) in row.iter_mut().zip(&b[..=tb]) {
                        *slot = (*slot + (md.mul(x, y) as u128)) % mv;
                    }
                }
            }
            if ring.is_mixed() {
                let p = md.p as u128;
                for k in (range..acc.len()).rev() {
                    let v = acc[k] % mv;
                    acc[k - range] = (acc[k - range] + v * p) % mv;
                }
            } else if acc.len() > range {
                lossy = true;
            }
            for (t, v) in acc.iter().take(range).enumerate() {
                let r = (v % mv) as u64;
                if r != 0 {
                    out.push((Monomial::new(comp, t as u64), r));
                }
            }
        }
        (out, lossy)
    }

    /// Frobenius in characteristic p: additive, monomials raised to the p-th power.
    fn frobenius_charp(&self) -> LayerElem {
        let p = self.ring.prime().get();
        let r = self.ring.from_terms(self.terms.iter().map(|(m, c)| {
            let mut v = m.vars;
            for x in v.iter_mut() {
                *x *= p as u32;
            }
            (
                Monomial {
                    comp: m.comp,
                    t: m.t * p,
                    vars: v,
                },
                *c,
            )
        }));
        r.with_lossy(self.lossy)
    }

    pub fn pow(&self, mut k: u64) -> LayerElem {
        let ring = &self.ring;
        let mut base = self.clone();
        if !ring.is_mixed() {
            let p = ring.prime().get();
            while k > 0 && k.is_multiple_of(p) {
                base = base.frobenius_charp();
                k /= p;
            }
        }
        let mut result = ring.one();
        let mut first = true;
        while k > 0 {
            if k & 1 == 1 {
                result = if first {
                    base.clone()
                } else {
                    result.mul(&base).expect("same ring")
                };
                first = false;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base).expect("same ring");
            }
        }
        result
    }

    /// Minimum term valuation; ABOVE_PRECISION for zero.
    pub fn valuation(&self) -> Valuation {
        let m = self.ring.modulus();
        let mixed = self.ring.is_mixed();
        self.terms
            .iter()
            .map(|(x, c)| {
                self.ring
                    .term_valuation(x, if mixed { m.val(*c) } else { 0 })
            })
            .min()
            .map(Valuation::Finite)
            .unwrap_or(Valuation::AbovePrecision)
    }

    /// The part of `self` living in one component.
    pub fn component(&self, comp: usize) -> LayerElem {
        LayerElem {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.comp as usize == comp)
                .copied()
                .collect(),
            lossy: self.lossy,
        }
    }

    /// Multiplicative inverse, when the constant term of every component is a unit.
    pub fn inverse(&self) -> Result<LayerElem> {
        let ring = &self.ring;
        let md = ring.modulus();
        let mut u_inv_terms = Vec::new();
        for comp in 0..ring.components() {
            let c0 = self.coeff(&Monomial::new(comp, 0));
            match md.inv(c0) {
                Some(i) => u_inv_terms.push((Monomial::new(comp, 0), i)),
                None => {
                    return Err(Error::NotInvertible(format!(
                        "{self} (residue of component {} is zero)",
                        comp + 1
                    )))
                }
            }
        }
        let u_inv = ring.from_terms(u_inv_terms);
        let w = u_inv.mul(self)?.sub(&ring.one())?;
        let minus_w = w.neg();
        let mut sum = ring.one();
        let mut power = ring.one();
        let bound = ring.precision() * Q::from_integer(ring.e() as i64);
        let bound = bound.ceil().to_integer() as u64 + ring.var_cap_num() + 2;
        for _ in 0..bound {
            power = power.mul(&minus_w)?;
            if power.is_zero() {
                return Ok(sum.mul(&u_inv)?.with_lossy(self.lossy));
            }
            sum = sum.add(&power)?;
        }
        Err(Error::NotInvertible(format!(
            "{self} (series did not terminate)"
        )))
    }

    /// Exact division by `t^k` when every term allows it. In mixed
    /// characteristic the top digit of a borrowed p is unknown, so the result
    /// is flagged lossy whenever a borrow happens.
    pub fn div_t_pow(&self, comp: usize, k: u64) -> Option<LayerElem> {
        let ring = &self.ring;
        let md = ring.modulus();
        let e = ring.e();
        let mut out = Vec::new();
        let mut lossy = self.lossy;
        for (m, c) in &self.terms {
            if m.comp as usize != comp {
                out.push((*m, *c));
                continue;
            }
            if m.t >= k {
                out.push((Monomial { t: m.t - k, ..*m }, *c));
                continue;
            }
            if !ring.is_mixed() {
                return None;
            }
            let borrow = (k - m.t).div_ceil(e);
            let cv = md.val(*c) as u64;
            if cv < borrow {
                return None;
            }
            lossy = true;
            let c2 = *c / md.p.pow(borrow as u32);
            out.push((
                Monomial {
                    t: m.t + borrow * e - k,
                    ..*m
                },
                c2,
            ));
        }
        Some(ring.from_terms(out).with_lossy(lossy))
    }
}

fn fmt_exp(num: u64, den: u64) -> String {
    let r = q(num as i64, den as i64);
    if *r.denom() == 1 {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical text of one term: `c * e2 * t^{k/e} * x1^{a/d}`.
pub fn format_term(ring: &LayerRing, m: &Monomial, c: u64, t_symbol: TSymbol) -> String {
    let mut factors = Vec::new();
    if ring.components() > 1 {
        factors.push(format!("e{}", m.comp + 1));
    }
    if m.t > 0 {
        match t_symbol {
            TSymbol::Valuation => {
                let ex = fmt_exp(m.t, ring.e());
                if ex == "1" {
                    factors.push("t".into());
                } else {
                    factors.push(format!("t^{{{ex}}}"));
                }
            }
            TSymbol::Generator => {
                if m.t == 1 {
                    factors.push("T".into());
                } else {
                    factors.push(format!("T^{}", m.t));
                }
            }
        }
    }
    for i in 0..ring.num_vars() {
        if m.vars[i] > 0 {
            let ex = fmt_exp(m.vars[i] as u64, ring.var_denominator());
            if ex == "1" {
                factors.push(format!("x{}", i + 1));
            } else {
                factors.push(format!("x{}^{{{}}}", i + 1, ex));
            }
        }
    }
    if factors.is_empty() {
        return c.to_string();
    }
    if c == 1 {
        factors.join("*")
    } else {
        format!("{}*{}", c, factors.join("*"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TSymbol {
    /// `t^{q}` denotes the element of valuation q (so `t^{1/e}` is the uniformizer).
    Valuation,
    /// `T^k` for presentation generators.
    Generator,
}

pub fn format_terms<'a, I: Iterator<Item = &'a (Monomial, u64)>>(
    ring: &LayerRing,
    it: I,
    sym: TSymbol,
) -> String {
    let parts: Vec<String> = it.map(|(m, c)| format_term(ring, m, *c, sym)).collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

impl fmt::Display for LayerElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = if self.ring.is_mixed() {
            TSymbol::Valuation
        } else {
            TSymbol::Generator
        };
        write!(f, "{}", format_terms(&self.ring, self.terms.iter(), sym))
    }
}

/// Convenience constructor for a single-component layer without variables.
pub fn layer_make(
    prime: Prime,
    n_digits: u32,
    e: u64,
    num_vars: usize,
    ideal_exp: Q,
) -> Result<LayerRing> {
    layer_make_with_cap(prime, n_digits, e, num_vars, q(1, 1), ideal_exp)
}

pub fn layer_make_with_cap(
    prime: Prime,
    n_digits: u32,
    e: u64,
    num_vars: usize,
    var_degree_cap: Q,
    ideal_exp: Q,
) -> Result<LayerRing> {
    let denom = prime.pow(prime.val_u64(e));
    LayerRing::new(LayerParams::standard(
        prime,
        n_digits,
        Characteristic::Mixed,
        e,
        1,
        num_vars,
        ExpLattice { denominator: denom },
        var_degree_cap,
        ideal_exp,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p5() -> Prime {
        Prime::new(5).unwrap()
    }

    #[test]
    fn dense_product_matches_termwise_sum() {
        let r = layer_make(p5(), 4, 25, 0, q(1, 5)).unwrap();
        let x = r.from_terms((0..25).map(|i| (Monomial::new(0, i), (i * i * 7 + 3) % 625)));
        let y = r.from_terms((0..25).map(|i| (Monomial::new(0, i), (i * 31 + 11) % 625)));
        let mut termwise = r.zero();
        for t in y.terms() {
            termwise = termwise.add(&x.mul(&r.from_terms([*t])).unwrap()).unwrap();
        }
        assert_eq!(x.mul(&y).unwrap(), termwise);
    }

    #[test]
    fn uniformizer_power_is_p() {
        let r = layer_make(p5(), 6, 5, 0, q(1, 1)).unwrap();
        let pi = r.t_pow(1);
        assert_eq!(pi.pow(5), r.constant(5));
        assert_eq!(pi.pow(30), r.zero());
        assert_eq!(pi.valuation(), Valuation::Finite(q(1, 5)));
        assert_eq!(r.zero().valuation(), Valuation::AbovePrecision);
    }

    #[test]
    fn rejects_bad_ideals() {
        assert!(matches!(
            layer_make(p5(), 6, 5, 0, q(6, 5)),
            Err(Error::BadIdealExponent(_))
        ));
        assert!(matches!(
            layer_make(p5(), 6, 5, 0, q(1, 3)),
            Err(Error::NonIntegralIdeal { .. })
        ));
    }

    #[test]
    fn ring_mismatch() {
        let a = layer_make(p5(), 6, 5, 0, q(1, 1)).unwrap();
        let b = layer_make(p5(), 6, 25, 0, q(1, 1)).unwrap();
        assert_eq!(a.one().add(&b.one()), Err(Error::RingMismatch));
    }

    #[test]
    fn inverse_of_one_plus_uniformizer() {
        let r = layer_make(p5(), 6, 25, 0, q(1, 1)).unwrap();
        let x = r.one().add(&r.t_pow(1)).unwrap();
        let y = x.inverse().unwrap();
        assert_eq!(x.mul(&y).unwrap(), r.one());
        assert!(r.t_pow(3).inverse().is_err());
    }

    #[test]
    fn variables_truncate() {
        let r = layer_make_with_cap(p5(), 3, 5, 1, q(1, 1), q(1, 1)).unwrap();
        let x = r.from_terms([(
            Monomial {
                comp: 0,
                t: 0,
                vars: [3, 0, 0, 0],
            },
            1,
        )]);
        let x2 = x.mul(&x).unwrap();
        assert!(x2.is_zero());
        assert!(x2.lossy());
        assert_eq!(r.rank(), 5 * 6);
        assert_eq!(x.to_string(), "x1^{3/5}");
    }

    #[test]
    fn char_p_frobenius_matches_multiplication() {
        let params = LayerParams::standard(
            p5(),
            1,
            Characteristic::Positive { top: 40 },
            5,
            1,
            0,
            ExpLattice { denominator: 5 },
            q(0, 1),
            q(1, 1),
        )
        .unwrap();
        let r = LayerRing::new(params).unwrap();
        let x = r.from_terms([(Monomial::new(0, 0), 2), (Monomial::new(0, 3), 4)]);
        let mut slow = r.one();
        for _ in 0..5 {
            slow = slow.mul(&x).unwrap();
        }
        assert_eq!(x.pow(5), slow);
        assert_eq!(x.to_string(), "2 + 4*T^3");
    }

    #[test]
    fn exact_division_by_uniformizer_power() {
        let r = layer_make(p5(), 6, 5, 0, q(1, 1)).unwrap();
        let x = r.constant(25);
        let y = x.div_t_pow(0, 7).unwrap();
        assert_eq!(y.mul(&r.t_pow(7)).unwrap(), x);
        assert!(r.one().div_t_pow(0, 1).is_none());
    }
}
