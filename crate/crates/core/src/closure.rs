//! Decidable shadows of complete integral closedness at truncation.
//!
//! A pair is a finite ring B over `Z/p^N` (or `F_p`) together with a
//! spanning set of a subring A and an element f of A. The localization
//! `A[1/f]` is modeled by fractions `a/f^c`; a fraction is only tested when
//! `c*n*v(f)` stays within the working precision, so every verdict is
//! independent of how the truncated coefficients are lifted.

use crate::arith::{fmt_q, Modulus, Prime, Q};
use crate::error::{Error, Result};
use crate::layer::{LayerElem, LayerRing, Monomial};
use crate::linalg::{Smith, SparseMat};
use crate::report::{Check, Verdict, Witness};
use crate::tilt::small_tilt;
use crate::torsion::torsion_submodule;
use crate::tower::TowerHandle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;

/// Largest enumeration accepted by EXACT mode.
pub const EXACT_LIMIT: u64 = 1 << 20;

/// A free module with basis and structure constants.
#[derive(Clone, Debug)]
pub struct TableAlgebra {
    pub modulus: Modulus,
    pub basis: Vec<String>,
    /// `table[i][j]` is the product of basis elements i and j.
    pub table: Vec<Vec<Vec<u64>>>,
    pub one: Vec<u64>,
}

impl TableAlgebra {
    /// `(Z/p^N)[y]/(y^2 - a)`.
    pub fn quadratic(p: u64, n_digits: u32, a: i64) -> Result<Self> {
        let modulus = Modulus::new(Prime::new(p)?, n_digits)?;
        let a = modulus.reduce_i128(a as i128);
        Ok(TableAlgebra {
            modulus,
            basis: vec!["1".into(), "y".into()],
            table: vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![a, 0]]],
            one: vec![1, 0],
        })
    }
}

#[derive(Clone, Debug)]
pub enum Algebra {
    Layer(LayerRing),
    Table(TableAlgebra),
}

impl Algebra {
    pub fn dim(&self) -> usize {
        match self {
            Algebra::Layer(r) => r.rank(),
            Algebra::Table(t) => t.basis.len(),
        }
    }

    pub fn modulus(&self) -> Modulus {
        match self {
            Algebra::Layer(r) => r.modulus(),
            Algebra::Table(t) => t.modulus,
        }
    }

    /// Valuation bound below which truncated values are exact (`v(p) = 1`).
    pub fn precision(&self) -> Q {
        match self {
            Algebra::Layer(r) => r.precision(),
            Algebra::Table(t) => Q::from_integer(t.modulus.digits as i64),
        }
    }

    pub fn one(&self) -> Vec<u64> {
        match self {
            Algebra::Layer(r) => r.one().coords(),
            Algebra::Table(t) => t.one.clone(),
        }
    }

    pub fn unit(&self, i: usize) -> Vec<u64> {
        let mut v = vec![0; self.dim()];
        v[i] = 1;
        v
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let m = self.modulus();
        x.iter().zip(y).map(|(a, b)| m.add(*a, *b)).collect()
    }

    pub fn scale(&self, x: &[u64], c: u64) -> Vec<u64> {
        let m = self.modulus();
        x.iter().map(|a| m.mul(*a, c % m.value)).collect()
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> Result<Vec<u64>> {
        match self {
            Algebra::Layer(r) => Ok(r.from_coords(x).mul(&r.from_coords(y))?.coords()),
            Algebra::Table(t) => {
                let m = t.modulus;
                let mut out = vec![0u64; t.basis.len()];
                for (i, a) in x.iter().enumerate().filter(|(_, a)| **a != 0) {
                    for (j, b) in y.iter().enumerate().filter(|(_, b)| **b != 0) {
                        let ab = m.mul(*a, *b);
                        for (k, c) in t.table[i][j].iter().enumerate() {
                            out[k] = m.add(out[k], m.mul(ab, *c));
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn pow(&self, x: &[u64], k: u64) -> Result<Vec<u64>> {
        match self {
            Algebra::Layer(r) => Ok(r.from_coords(x).pow(k).coords()),
            Algebra::Table(_) => {
                let mut out = self.one();
                for _ in 0..k {
                    out = self.mul(&out, x)?;
                }
                Ok(out)
            }
        }
    }

    pub fn text(&self, x: &[u64]) -> String {
        match self {
            Algebra::Layer(r) => r.from_coords(x).to_string(),
            Algebra::Table(t) => {
                let parts: Vec<String> = x
                    .iter()
                    .zip(&t.basis)
                    .filter(|(c, _)| **c != 0)
                    .map(|(c, b)| match (c, b.as_str()) {
                        (c, "1") => c.to_string(),
                        (1, b) => b.to_string(),
                        (c, b) => format!("{c}*{b}"),
                    })
                    .collect();
                if parts.is_empty() {
                    "0".into()
                } else {
                    parts.join(" + ")
                }
            }
        }
    }
}

/// B, a subring A of B given by a spanning set, and `f` in A.
#[derive(Clone, Debug)]
pub struct RingPair {
    pub name: String,
    pub b: Algebra,
    pub a_gens: Vec<Vec<u64>>,
    pub f: Vec<u64>,
    pub f_valuation: Q,
}

fn span(alg: &Algebra, vecs: &[Vec<u64>]) -> Smith {
    let mut mat = SparseMat::new(alg.dim());
    for v in vecs {
        mat.push_dense(v);
    }
    Smith::compute(&mat, alg.modulus())
}

impl RingPair {
    /// Validates that A contains 1 and f and is closed under products.
    pub fn new(
        name: impl Into<String>,
        b: Algebra,
        a_gens: Vec<Vec<u64>>,
        f: Vec<u64>,
        f_valuation: Q,
    ) -> Result<Self> {
        let pair = RingPair {
            name: name.into(),
            b,
            a_gens,
            f,
            f_valuation,
        };
        let s = span(&pair.b, &pair.a_gens);
        if !s.contains(&pair.b.one()) || !s.contains(&pair.f) {
            return Err(Error::NotAHomomorphism(format!(
                "{}: 1 or f is not in A",
                pair.name
            )));
        }
        for x in &pair.a_gens {
            for y in &pair.a_gens {
                let xy = pair.b.mul(x, y)?;
                if !s.contains(&xy) {
                    return Err(Error::NotAHomomorphism(format!(
                        "{}: product {} leaves A",
                        pair.name,
                        pair.b.text(&xy)
                    )));
                }
            }
        }
        if pair.f_valuation <= Q::from_integer(0) {
            return Err(Error::Invalid("f must have positive valuation".into()));
        }
        Ok(pair)
    }

    /// `A = B` for a layer ring, with f its ideal generator.
    pub fn layer(name: impl Into<String>, ring: &LayerRing) -> Result<Self> {
        let f = ring.ideal_generator();
        Self::layer_with(name, ring, &f)
    }

    pub fn layer_with(name: impl Into<String>, ring: &LayerRing, f: &LayerElem) -> Result<Self> {
        let alg = Algebra::Layer(ring.clone());
        let gens = (0..alg.dim()).map(|i| alg.unit(i)).collect();
        let v = f
            .valuation()
            .finite()
            .ok_or_else(|| Error::Invalid("f vanishes at this precision".into()))?;
        Self::new(name, alg, gens, f.coords(), v)
    }

    /// `R_n` inside `R_{n+1}` along the transition, with `f = f_0`.
    pub fn transition(h: &TowerHandle, n: u32) -> Result<Self> {
        let src = h.layer(n)?;
        let dst = h.layer(n + 1)?;
        let gens = (0..src.rank())
            .map(|i| {
                Ok(h.transition(n, &src.from_terms([(src.monomial_at(i), 1)]))?
                    .coords())
            })
            .collect::<Result<Vec<_>>>()?;
        let f = h.f0(n + 1)?;
        let v = f
            .valuation()
            .finite()
            .ok_or_else(|| Error::Invalid("f vanishes at this precision".into()))?;
        Self::new(
            format!("R_{n} in R_{}", n + 1),
            Algebra::Layer(dst.clone()),
            gens,
            f.coords(),
            v,
        )
    }

    /// `Z/p^N`-span of `1, p*y` inside `(Z/p^N)[y]/(y^2 - p^2)`: y is a
    /// square root of an element of A but does not lie in A.
    pub fn non_root_closed_control(p: u64, n_digits: u32) -> Result<Self> {
        let b = TableAlgebra::quadratic(p, n_digits, (p * p) as i64)?;
        let gens = vec![vec![1, 0], vec![0, p]];
        Self::new(
            "span(1, p*y) in Z/p^N[y]/(y^2 - p^2)",
            Algebra::Table(b),
            gens,
            vec![p, 0],
            Q::from_integer(1),
        )
    }

    /// `Z/p^N`-span of `1, p*t, t^2, t^3` inside `(Z/p^N)[t]/(t^4 - p)`.
    pub fn non_normal_layer_control(p: u64, n_digits: u32) -> Result<Self> {
        let ring = crate::layer::layer_make(Prime::new(p)?, n_digits, 4, 0, Q::from_integer(1))?;
        let alg = Algebra::Layer(ring.clone());
        let mono = |k: u64, c: u64| ring.from_terms([(Monomial::new(0, k), c)]).coords();
        let gens = vec![mono(0, 1), mono(1, p), mono(2, 1), mono(3, 1)];
        Self::new(
            "span(1, p*t, t^2, t^3) in O_2",
            alg,
            gens,
            mono(0, p),
            Q::from_integer(1),
        )
    }

    /// `(Z/p^N)[y]/(y^2)` with A the image of `y -> p*y`: the reduction
    /// `A/pA -> B/pB` kills the class of `y`.
    pub fn collapse_control(p: u64, n_digits: u32) -> Result<Self> {
        let b = TableAlgebra::quadratic(p, n_digits, 0)?;
        Self::new(
            "y -> p*y on Z/p^N[y]/(y^2)",
            Algebra::Table(b),
            vec![vec![1, 0], vec![0, p]],
            vec![p, 0],
            Q::from_integer(1),
        )
    }

    /// Elements of B killed by f that are not truncation artifacts.
    fn check_torsion_free(&self) -> Result<()> {
        match &self.b {
            Algebra::Layer(r) => {
                let rep = torsion_submodule(r, &r.from_coords(&self.f))?;
                if let Some(t) = rep.genuine.first() {
                    return Err(Error::TorsionPresent(format!("{}: {t}", self.name)));
                }
            }
            Algebra::Table(_) => {
                let dim = self.b.dim();
                let cols: Vec<Vec<u64>> = (0..dim)
                    .map(|i| self.b.mul(&self.f, &self.b.unit(i)))
                    .collect::<Result<_>>()?;
                let smith = span(&self.b, &cols);
                let md = self.b.modulus();
                let floor = md
                    .digits
                    .saturating_sub(self.f_valuation.ceil().to_integer() as u32);
                for k in smith.kernel() {
                    let x: Vec<u64> = (0..dim).fold(vec![0; dim], |acc, i| {
                        self.b.add(&acc, &self.b.scale(&self.b.unit(i), k[i]))
                    });
                    if x.iter().any(|c| *c != 0 && md.val(*c) < floor) {
                        return Err(Error::TorsionPresent(format!(
                            "{}: {}",
                            self.name,
                            self.b.text(&x)
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `A/fA -> B/fB` is injective, that is `A ∩ fB = fA`.
pub fn is_cartesian_mod_f(pair: &RingPair) -> Result<Check> {
    pair.check_torsion_free()?;
    let b = &pair.b;
    let dim = b.dim();
    let k = pair.a_gens.len();
    let mut mat = SparseMat::new(dim);
    for g in &pair.a_gens {
        mat.push_dense(g);
    }
    let mut f_cols = Vec::new();
    for i in 0..dim {
        let fi = b.mul(&pair.f, &b.unit(i))?;
        mat.push_dense(&b.scale(&fi, b.modulus().value - 1));
        f_cols.push(fi);
    }
    let smith = Smith::compute(&mat, b.modulus());
    let f_a: Vec<Vec<u64>> = pair
        .a_gens
        .iter()
        .map(|g| b.mul(&pair.f, g))
        .collect::<Result<_>>()?;
    let f_a_span = span(b, &f_a);
    for kv in smith.kernel() {
        let x = (0..k).fold(vec![0; dim], |acc, i| {
            b.add(&acc, &b.scale(&pair.a_gens[i], kv[i]))
        });
        if !f_a_span.contains(&x) {
            return Ok(Check::fail(
                "CARTESIAN_MOD_F",
                Witness::new(
                    0,
                    b.text(&x),
                    format!("{}: in A and in fB but not in fA", pair.name),
                ),
            ));
        }
    }
    Ok(Check::new("CARTESIAN_MOD_F", Verdict::PassExact))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    Exact,
    Sampled(usize),
}

/// Where candidate roots are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ambient {
    /// Elements of B.
    Explicit,
    /// Fractions `a/f^c` with `a` in A and `1 <= c <= c_cap`.
    Localized { c_cap: u32 },
}

fn property(n: u64, p: u64) -> String {
    if n == p {
        "P_ROOT_CLOSED".into()
    } else {
        format!("N_ROOT_CLOSED({n})")
    }
}

/// Coefficient vectors over the generators of A, in B coordinates.
fn combination(pair: &RingPair, coeffs: &[u64]) -> Vec<u64> {
    let b = &pair.b;
    coeffs
        .iter()
        .zip(&pair.a_gens)
        .filter(|(c, _)| **c != 0)
        .fold(vec![0; b.dim()], |acc, (c, g)| b.add(&acc, &b.scale(g, *c)))
}

fn digits_of(mut idx: u64, base: u64, len: usize) -> Vec<u64> {
    (0..len)
        .map(|_| {
            let d = idx % base;
            idx /= base;
            d
        })
        .collect()
}

struct Membership<'a> {
    pair: &'a RingPair,
    cache: HashMap<u64, Smith>,
}

impl<'a> Membership<'a> {
    fn new(pair: &'a RingPair) -> Self {
        Membership {
            pair,
            cache: HashMap::new(),
        }
    }

    /// Is x in `f^k A`?
    fn contains(&mut self, k: u64, x: &[u64]) -> Result<bool> {
        if !self.cache.contains_key(&k) {
            let b = &self.pair.b;
            let fk = b.pow(&self.pair.f, k)?;
            let cols: Vec<Vec<u64>> = self
                .pair
                .a_gens
                .iter()
                .map(|g| b.mul(&fk, g))
                .collect::<Result<_>>()?;
            self.cache.insert(k, span(b, &cols));
        }
        Ok(self.cache[&k].contains(x))
    }
}

/// n-root closedness of A in B, or of A in `A[1/f]` up to `c_cap`.
pub fn check_root_closed(
    pair: &RingPair,
    n: u64,
    mode: Mode,
    ambient: Ambient,
    seed: u64,
) -> Result<Check> {
    let b = &pair.b;
    let md = b.modulus();
    let prop = property(n, md.p);
    let mut members = Membership::new(pair);
    let usable_c: Vec<u32> = match ambient {
        Ambient::Explicit => vec![0],
        Ambient::Localized { c_cap } => (1..=c_cap)
            .filter(|c| Q::from_integer((*c as u64 * n) as i64) * pair.f_valuation <= b.precision())
            .collect(),
    };
    if usable_c.is_empty() {
        return Ok(
            Check::new(prop, Verdict::UndecidedAtPrecision).note(format!(
                "no denominator f^c has c*{n}*v(f) within precision {}",
                fmt_q(&b.precision())
            )),
        );
    }
    let source_len = match ambient {
        Ambient::Explicit => b.dim(),
        Ambient::Localized { .. } => pair.a_gens.len(),
    };
    let source = |coeffs: &[u64]| -> Vec<u64> {
        match ambient {
            Ambient::Explicit => coeffs.to_vec(),
            Ambient::Localized { .. } => combination(pair, coeffs),
        }
    };
    // returns a witness text when x/f^c is a counterexample
    let mut test = |x: &[u64], c: u32| -> Result<Option<String>> {
        let c = c as u64;
        let xn = b.pow(x, n)?;
        if !members.contains(c * n, &xn)? || members.contains(c, x)? {
            return Ok(None);
        }
        Ok(Some(if c == 0 {
            b.text(x)
        } else {
            format!("({})/f^{c}", b.text(x))
        }))
    };
    let fail = |w: String| {
        Check::fail(
            prop.clone(),
            Witness::new(
                0,
                w,
                format!(
                    "{}: the {n}-th power lies in A but the element does not",
                    pair.name
                ),
            ),
        )
    };
    match mode {
        Mode::Exact => {
            let count = (md.value as u128)
                .checked_pow(source_len as u32)
                .unwrap_or(u128::MAX)
                * usable_c.len() as u128;
            if count > EXACT_LIMIT as u128 {
                return Err(Error::EnumerationTooLarge(format!(
                    "{count} candidates > {EXACT_LIMIT}"
                )));
            }
            let total = md.value.pow(source_len as u32);
            for idx in 0..total {
                let x = source(&digits_of(idx, md.value, source_len));
                for &c in &usable_c {
                    if let Some(w) = test(&x, c)? {
                        return Ok(fail(w));
                    }
                }
            }
            Ok(Check::new(prop, Verdict::PassExact).with_samples(count as usize))
        }
        Mode::Sampled(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc105);
            for _ in 0..k {
                let coeffs: Vec<u64> = (0..source_len)
                    .map(|_| rng.gen_range(0..md.value))
                    .collect();
                let c = usable_c[rng.gen_range(0..usable_c.len())];
                if let Some(w) = test(&source(&coeffs), c)? {
                    return Ok(fail(w));
                }
            }
            Ok(Check::new(prop, Verdict::PassSampled).with_samples(k))
        }
    }
}

/// Search `c <= c_cap` with `f^c b^n` in A for all `n <= n_cap`, for
/// `b = a/f^d`. Absence of a witness is UNDECIDED, never a refutation.
pub fn almost_integral_witness(
    pair: &RingPair,
    a: &[u64],
    d: u32,
    c_cap: u32,
    n_cap: u32,
) -> Result<Check> {
    let b = &pair.b;
    let mut members = Membership::new(pair);
    let id = "ALMOST_INTEGRAL_WITNESS";
    let mut frontier = Vec::new();
    for c in 0..=c_cap {
        let mut failed_at = None;
        let mut power = b.one();
        for n in 1..=n_cap as u64 {
            power = b.mul(&power, a)?;
            // f^c a^n / f^{dn} in A  <=>  f^c a^n in f^{dn} A
            let need = d as u64 * n;
            if Q::from_integer(need as i64) * pair.f_valuation > b.precision() {
                failed_at = Some(format!("c={c}: n={n} exceeds the precision"));
                break;
            }
            let lhs = b.mul(&b.pow(&pair.f, c as u64)?, &power)?;
            if !members.contains(need, &lhs)? {
                failed_at = Some(format!("c={c}: n={n}"));
                break;
            }
        }
        match failed_at {
            None => {
                return Ok(
                    Check::new(id, Verdict::Pass).note(format!("witness c = {c} for n <= {n_cap}"))
                )
            }
            Some(f) => frontier.push(f),
        }
    }
    let mut check = Check::new(id, Verdict::UndecidedAtPrecision);
    for f in frontier {
        check = check.note(f);
    }
    Ok(check)
}

#[derive(Clone, Debug, Serialize)]
pub struct LayerClosure {
    pub level: u32,
    pub side: String,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferReport {
    pub schema: u32,
    pub mode: String,
    pub layers: Vec<LayerClosure>,
}

impl TransferReport {
    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.layers.iter().flat_map(|l| l.checks.iter())
    }

    pub fn any_fail(&self) -> bool {
        self.checks().any(|c| c.verdict.is_fail())
    }
}

fn exact_fits(pair: &RingPair, c_cap: u32) -> bool {
    let md = pair.b.modulus();
    (md.value as f64).powi(pair.a_gens.len() as i32) * c_cap as f64 <= EXACT_LIMIT as f64
}

/// Cartesian criteria on consecutive layers, p-root closedness of every
/// layer in its localization, and the same on the depth-one small tilts.
pub fn transfer_suite(
    h: &TowerHandle,
    mode: Mode,
    c_cap: u32,
    seed: u64,
) -> Result<TransferReport> {
    let p = h.prime().get();
    let mut layers = Vec::new();
    let pick = |pair: &RingPair| match mode {
        Mode::Exact if exact_fits(pair, c_cap) => Mode::Exact,
        Mode::Exact => Mode::Sampled(1000),
        m => m,
    };
    for n in 0..=h.depth() {
        let mut checks = Vec::new();
        if n < h.depth() {
            checks.push(is_cartesian_mod_f(&RingPair::transition(h, n)?)?);
        }
        let pair = RingPair::layer(format!("R_{n}"), h.layer(n)?)?;
        checks.push(check_root_closed(
            &pair,
            p,
            pick(&pair),
            Ambient::Localized { c_cap },
            seed.wrapping_add(n as u64),
        )?);
        layers.push(LayerClosure {
            level: n,
            side: "layer".into(),
            checks,
        });
    }
    for j in 0..h.depth() {
        let pres = small_tilt(h, j, 1)?;
        let cj = h.quot(j)?.powers().to_vec();
        let f = pres.ring.from_terms(
            cj.iter()
                .enumerate()
                .map(|(i, c)| (Monomial::new(i, *c), 1)),
        );
        let pair = RingPair::layer_with(format!("small tilt at level {j}"), &pres.ring, &f)?;
        let check = check_root_closed(
            &pair,
            p,
            pick(&pair),
            Ambient::Localized { c_cap },
            seed.wrapping_add(100 + j as u64),
        )?;
        layers.push(LayerClosure {
            level: j,
            side: "tilt".into(),
            checks: vec![check],
        });
    }
    Ok(TransferReport {
        schema: 1,
        mode: match mode {
            Mode::Exact => "exact".into(),
            Mode::Sampled(k) => format!("sampled({k})"),
        },
        layers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;
    use crate::tower::{build_tower, TowerSpec};

    fn pure2() -> TowerHandle {
        build_tower(&TowerSpec::pure(2, 2, 2).unwrap()).unwrap()
    }

    #[test]
    fn dvr_truncation_is_root_closed() {
        let h = pure2();
        let pair = RingPair::layer("O_1", h.layer(1).unwrap()).unwrap();
        let c =
            check_root_closed(&pair, 2, Mode::Exact, Ambient::Localized { c_cap: 2 }, 0).unwrap();
        assert_eq!(c.verdict, Verdict::PassExact);
    }

    #[test]
    fn crafted_controls_fail() {
        let pair = RingPair::non_root_closed_control(2, 2).unwrap();
        let c = check_root_closed(&pair, 2, Mode::Exact, Ambient::Explicit, 0).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        assert_eq!(c.witness.unwrap().element, "y");
        let c = check_root_closed(&pair, 2, Mode::Sampled(200), Ambient::Explicit, 0).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);

        let pair = RingPair::non_normal_layer_control(2, 2).unwrap();
        let c = check_root_closed(&pair, 2, Mode::Exact, Ambient::Explicit, 0).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);

        let pair = RingPair::collapse_control(2, 2).unwrap();
        let c = is_cartesian_mod_f(&pair).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        assert_eq!(c.witness.unwrap().element, "2*y");
    }

    #[test]
    fn identity_and_transitions_are_cartesian() {
        let h = build_tower(&TowerSpec::pure(5, 6, 2).unwrap()).unwrap();
        let pair = RingPair::layer("O_1", h.layer(1).unwrap()).unwrap();
        assert_eq!(
            is_cartesian_mod_f(&pair).unwrap().verdict,
            Verdict::PassExact
        );
        let pair = RingPair::transition(&h, 1).unwrap();
        assert_eq!(
            is_cartesian_mod_f(&pair).unwrap().verdict,
            Verdict::PassExact
        );
    }

    #[test]
    fn non_subrings_are_rejected() {
        let b = TableAlgebra::quadratic(2, 2, 4).unwrap();
        let r = RingPair::new(
            "bad",
            Algebra::Table(b),
            vec![vec![1, 0], vec![0, 1], vec![0, 0]],
            vec![3, 0],
            q(1, 1),
        );
        assert!(r.is_ok());
        let b = TableAlgebra::quadratic(3, 2, 1).unwrap();
        let r = RingPair::new(
            "bad",
            Algebra::Table(b),
            vec![vec![0, 1]],
            vec![0, 1],
            q(1, 1),
        );
        assert!(matches!(r, Err(Error::NotAHomomorphism(_))));
    }

    #[test]
    fn almost_integrality() {
        let h = build_tower(&TowerSpec::pure(5, 6, 2).unwrap()).unwrap();
        let r = h.layer(1).unwrap();
        let pair = RingPair::layer("O_1", r).unwrap();
        let one = r.one().coords();
        let c = almost_integral_witness(&pair, &one, 0, 3, 5).unwrap();
        assert_eq!(c.verdict, Verdict::Pass);
        assert_eq!(c.notes[0], "witness c = 0 for n <= 5");
        let fa = r.constant(5).mul(&r.t_pow(2)).unwrap().coords();
        let c = almost_integral_witness(&pair, &fa, 1, 3, 5).unwrap();
        assert_eq!(c.notes[0], "witness c = 0 for n <= 5");
        // pi/p: valuation c + n(1/5 - 1) turns negative
        let pi = r.t_pow(1).coords();
        let c = almost_integral_witness(&pair, &pi, 1, 2, 6).unwrap();
        assert_eq!(c.verdict, Verdict::UndecidedAtPrecision);
        assert_eq!(c.notes, vec!["c=0: n=1", "c=1: n=2", "c=2: n=3"]);
    }

    #[test]
    fn transfer_suite_on_small_pure_tower() {
        let rep = transfer_suite(&pure2(), Mode::Exact, 2, 0).unwrap();
        assert!(
            rep.checks().all(|c| c.verdict == Verdict::PassExact),
            "{:?}",
            rep.layers
        );
    }
}
