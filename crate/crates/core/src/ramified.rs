//! Kummer covers `S = R[p^{1/m}]` over the pure tower: the layers `S_n`, the
//! least cokernel annihilators `delta_n`, the exponent `eps` with
//! `(S_{n+1})^p ⊆ S_n + p^eps S_{n+1}`, and the tower they assemble into.

use crate::arith::{fmt_q, q, ser_q, Modulus, Prime, Q};
use crate::axioms::{check_axioms, AxiomReport};
use crate::closure::{check_root_closed, Ambient, Mode, RingPair};
use crate::error::{Error, Result};
use crate::layer::{layer_make, LayerElem, LayerRing};
use crate::linalg::{Smith, SparseMat};
use crate::report::{Check, Verdict, Witness};
use crate::tilt::small_tilt;
use crate::tower::{build_tower, TowerHandle, TowerSpec};
use serde::Serialize;
use std::collections::BTreeSet;

/// Largest ramification index for which the elimination method is run.
pub const MAX_ELIMINATION_E: u64 = 20_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KummerCoverSpec {
    pub prime: Prime,
    pub m: u64,
    pub n_digits: u32,
    pub levels: u32,
}

impl KummerCoverSpec {
    pub fn new(p: u64, m: u64, n_digits: u32, levels: u32) -> Result<Self> {
        let prime = Prime::new(p)?;
        if m < 2 || m.is_multiple_of(p) {
            return Err(Error::Spec(format!(
                "m = {m} must be at least 2 and prime to p"
            )));
        }
        if levels == 0 {
            return Err(Error::Spec("need at least one level".into()));
        }
        if n_digits < 2 {
            return Err(Error::BadPrecision(
                "the cover computations need at least two digits".into(),
            ));
        }
        Ok(KummerCoverSpec {
            prime,
            m,
            n_digits,
            levels,
        })
    }

    /// Ramification index `e_n = m p^n` of `S_n`.
    pub fn e(&self, n: u32) -> u64 {
        self.m * self.prime.pow(n)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverLayer {
    pub level: u32,
    pub ramification: u64,
    /// Exponents of `p` in `S_n` live in `(1/lattice_denominator) Z`.
    pub lattice_denominator: u64,
    /// `p^{1/p^n}` and `p^{1/m}` both lie in the layer.
    pub contains_generators: bool,
    #[serde(skip)]
    pub ring: LayerRing,
}

/// `S_n` as the truncated valuation ring `Z_p[p^{1/(m p^n)}]`.
pub fn build_cover_layers(spec: &KummerCoverSpec) -> Result<Vec<CoverLayer>> {
    (0..spec.levels)
        .map(|n| {
            let e = spec.e(n);
            let ring = layer_make(spec.prime, spec.n_digits, e, 0, q(1, 1))?;
            let pn = spec.prime.pow(n);
            let p_elem = ring.constant(spec.prime.get() as i64);
            let root_pn = ring.t_pow(spec.m);
            let root_m = ring.t_pow(pn);
            let contains_generators = root_pn.pow(pn) == p_elem && root_m.pow(spec.m) == p_elem;
            Ok(CoverLayer {
                level: n,
                ramification: e,
                lattice_denominator: e,
                contains_generators,
                ring,
            })
        })
        .collect()
}

/// Conductor of the numerical semigroup generated by `gens`: the least c
/// with every integer `>= c` a non-negative combination. Found by marking
/// reachable values until a run as long as the smallest generator appears.
pub fn semigroup_conductor(gens: &[u64]) -> Option<u64> {
    let g_min = *gens.iter().filter(|g| **g > 0).min()?;
    let g_max = *gens.iter().max()?;
    if gens.iter().fold(0, |a, b| num_integer::gcd(a, *b)) != 1 {
        return None;
    }
    let limit = (g_min * g_max + g_max + 1) as usize;
    let mut reach = vec![false; limit];
    reach[0] = true;
    let mut run = 0u64;
    for k in 0..limit {
        if !reach[k] {
            for g in gens {
                if (k as u64) >= *g && reach[k - *g as usize] {
                    reach[k] = true;
                    break;
                }
            }
        }
        if reach[k] {
            run += 1;
            if run == g_min {
                return Some(k as u64 + 1 - g_min);
            }
        } else {
            run = 0;
        }
    }
    None
}

/// Least annihilator exponent, in units of `1/(m p^{n+k})`, of the cokernel
/// of `R_{n+k} ⊗ S_n -> S_{n+k}`, by column reduction over `Z/p^N` of the
/// inclusion of the image monomials.
pub fn elimination_exponent(p: Prime, m: u64, n: u32, k: u32, n_digits: u32) -> Result<u64> {
    let pk = p.pow(k);
    let e = m * p.pow(n + k);
    if e > MAX_ELIMINATION_E {
        return Err(Error::DimensionTooLarge(format!(
            "ramification {e} for elimination"
        )));
    }
    let modulus = Modulus::new(p, n_digits.max(2))?;
    // image monomials u^s, s = m a + p^k b with a < p^{n+k}, b < m p^n
    let mut exps = BTreeSet::new();
    for a in 0..p.pow(n + k) {
        for b in 0..m * p.pow(n) {
            let s = m * a + pk * b;
            if s < 2 * e {
                exps.insert(s);
            }
        }
    }
    let mut mat = SparseMat::new(e as usize);
    for s in &exps {
        mat.push_col(vec![((s % e) as usize, modulus.p_pow((s / e) as u32))]);
    }
    let smith = Smith::compute(&mat, modulus);
    let member = |kk: u64| {
        let mut b = vec![0u64; e as usize];
        b[(kk % e) as usize] = modulus.p_pow((kk / e) as u32);
        smith.contains(&b)
    };
    let inside: Vec<bool> = (0..2 * e).map(member).collect();
    (0..=e)
        .find(|&s| inside[s as usize..(s + e) as usize].iter().all(|x| *x))
        .ok_or_else(|| Error::Invalid(format!("no annihilator below p at level {n}")))
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaRow {
    pub n: u32,
    #[serde(serialize_with = "ser_q")]
    pub delta: Q,
    #[serde(serialize_with = "ser_q")]
    pub p_n_delta: Q,
    /// Annihilator exponent in units of `1/e_{n+1}`.
    pub annihilator_exponent: u64,
    pub semigroup_exponent: u64,
    pub elimination_exponent: u64,
    /// `delta_n <= c / p^n` for the reported constant c.
    pub within_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaTable {
    pub prime: u64,
    pub m: u64,
    pub conductor: u64,
    pub rows: Vec<DeltaRow>,
    /// The bound `c = max p^n delta_n`.
    #[serde(serialize_with = "ser_q")]
    pub c: Q,
    pub strictly_decreasing: bool,
    pub p_n_delta_constant: bool,
    /// Least common denominator of the `p^n delta_n`.
    pub p_n_delta_denominator: i64,
    /// Every `p^n delta_n` lies in `(1/m) Z`.
    pub in_m_lattice: bool,
    /// Every `p^n delta_n` is an integer (fails for this family).
    pub integral: bool,
}

fn delta_from_conductor(spec: &KummerCoverSpec, conductor: u64, n: u32) -> Q {
    q(conductor as i64, spec.e(n + 1) as i64)
}

/// Both methods for every level `n < levels`; they must agree.
pub fn delta_table(spec: &KummerCoverSpec) -> Result<DeltaTable> {
    use rayon::prelude::*;
    let p = spec.prime;
    let conductor = semigroup_conductor(&[spec.m, p.get()])
        .ok_or(Error::Invalid("generators not coprime".into()))?;
    let elim: Vec<Result<u64>> = (0..spec.levels)
        .into_par_iter()
        .map(|n| elimination_exponent(p, spec.m, n, 1, spec.n_digits))
        .collect();
    let mut rows = Vec::new();
    for (n, el) in elim.into_iter().enumerate() {
        let n = n as u32;
        let el = el?;
        if el != conductor {
            return Err(Error::MethodDisagreement {
                level: n,
                semigroup: fmt_q(&delta_from_conductor(spec, conductor, n)),
                elimination: fmt_q(&delta_from_conductor(spec, el, n)),
            });
        }
        let delta = delta_from_conductor(spec, conductor, n);
        rows.push(DeltaRow {
            n,
            delta,
            p_n_delta: delta * Q::from_integer(p.pow(n) as i64),
            annihilator_exponent: el,
            semigroup_exponent: conductor,
            elimination_exponent: el,
            within_bound: false,
        });
    }
    let c = rows.iter().map(|r| r.p_n_delta).max().unwrap_or(q(0, 1));
    for r in rows.iter_mut() {
        r.within_bound = r.delta <= c / Q::from_integer(p.pow(r.n) as i64);
    }
    let m = Q::from_integer(spec.m as i64);
    Ok(DeltaTable {
        prime: p.get(),
        m: spec.m,
        conductor,
        strictly_decreasing: rows.windows(2).all(|w| w[1].delta < w[0].delta),
        p_n_delta_constant: rows.iter().all(|r| r.p_n_delta == c),
        p_n_delta_denominator: rows
            .iter()
            .fold(1, |a, r| num_integer::lcm(a, *r.p_n_delta.denom())),
        in_m_lattice: rows.iter().all(|r| (r.p_n_delta * m).is_integer()),
        integral: rows.iter().all(|r| r.p_n_delta.is_integer()),
        rows,
        c,
    })
}

/// One membership decomposition `s^p = a + p^eps b` in `S_{n+1}`.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateEntry {
    pub level: u32,
    pub generator: String,
    pub power: String,
    pub a: String,
    pub b: String,
    #[serde(skip)]
    pub elems: Option<(LayerElem, LayerElem, LayerElem)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsilonWitness {
    #[serde(serialize_with = "ser_q")]
    pub epsilon: Q,
    /// The least N with `(1 - delta_N p^2)/p` in (0, 1).
    pub level: u32,
    #[serde(serialize_with = "ser_q")]
    pub delta_at_level: Q,
    /// `eps * e_N`: `p^eps` is this power of the level-N uniformizer.
    pub epsilon_lattice_power: u64,
    /// Least N'' with `(N''+1) eps >= c`.
    pub proof_level: u32,
    pub certificate_levels: Vec<u32>,
    pub certificate: Vec<CertificateEntry>,
    pub certificate_verified: bool,
}

/// Split `s^p` into the part coming from `S_n` (exponents divisible by p in
/// the `S_{n+1}` lattice) and `p^eps` times a remainder.
fn decompose(
    ring: &LayerRing,
    p: u64,
    c: u64,
    s: &LayerElem,
) -> Option<(LayerElem, LayerElem, LayerElem)> {
    let power = s.pow(p);
    let a = ring.from_terms(power.terms().iter().filter(|(m, _)| m.t % p == 0).copied());
    let rest = power.sub(&a).ok()?;
    let b = rest.div_t_pow(0, c)?;
    Some((power, a, b))
}

/// Independent recomputation of one certificate entry.
pub fn verify_entry(
    ring: &LayerRing,
    p: u64,
    c: u64,
    generator: &LayerElem,
    a: &LayerElem,
    b: &LayerElem,
) -> bool {
    let power = generator.pow(p);
    let a_ok = a.terms().iter().all(|(m, _)| m.t % p == 0);
    let recon = b.mul(&ring.t_pow(c)).and_then(|x| x.add(a));
    a_ok && recon.map(|x| x == power).unwrap_or(false)
}

fn certificate_for_level(
    p: Prime,
    m: u64,
    n_digits: u32,
    eps: Q,
    n: u32,
) -> Result<(Vec<CertificateEntry>, bool)> {
    let e1 = m * p.pow(n + 1);
    if e1 > MAX_ELIMINATION_E {
        return Err(Error::DimensionTooLarge(format!(
            "ramification {e1} for the certificate"
        )));
    }
    let ring = layer_make(p, n_digits, e1, 0, q(1, 1))?;
    let c = (eps * Q::from_integer(e1 as i64)).to_integer() as u64;
    let mut gens: Vec<LayerElem> = (0..e1).map(|k| ring.t_pow(k)).collect();
    gens.extend((1..e1).map(|k| ring.one().add(&ring.t_pow(k)).expect("same ring")));
    let mut ok = true;
    let mut entries = Vec::new();
    for g in gens {
        match decompose(&ring, p.get(), c, &g) {
            Some((power, a, b)) => {
                ok &= verify_entry(&ring, p.get(), c, &g, &a, &b);
                entries.push(CertificateEntry {
                    level: n,
                    generator: g.to_string(),
                    power: power.to_string(),
                    a: a.to_string(),
                    b: b.to_string(),
                    elems: Some((g, a, b)),
                });
            }
            None => {
                ok = false;
                entries.push(CertificateEntry {
                    level: n,
                    generator: g.to_string(),
                    power: g.pow(p.get()).to_string(),
                    a: String::new(),
                    b: "NOT_DIVISIBLE".into(),
                    elems: None,
                });
            }
        }
    }
    Ok((entries, ok))
}

fn epsilon_for(p: Prime, delta: Q) -> Q {
    let pp = Q::from_integer(p.get() as i64);
    (q(1, 1) - delta * pp * pp) / pp
}

/// Least N with `eps = (1 - delta_N p^2)/p` in (0, 1), given the deltas.
fn choose_epsilon(p: Prime, deltas: &[Q]) -> Option<(u32, Q)> {
    deltas.iter().enumerate().find_map(|(n, d)| {
        let eps = epsilon_for(p, *d);
        (eps > q(0, 1) && eps < q(1, 1)).then_some((n as u32, eps))
    })
}

fn build_witness(
    p: Prime,
    m: u64,
    n_digits: u32,
    level: u32,
    eps: Q,
    delta: Q,
    c: Q,
    cert_levels: &[u32],
) -> Result<EpsilonWitness> {
    let mut certificate = Vec::new();
    let mut verified = true;
    for &n in cert_levels {
        let (entries, ok) = certificate_for_level(p, m, n_digits, eps, n)?;
        certificate.extend(entries);
        verified &= ok;
    }
    let e_n = m * p.pow(level);
    let lattice = eps * Q::from_integer(e_n as i64);
    if !lattice.is_integer() {
        return Err(Error::NonIntegralIdeal {
            exp: fmt_q(&eps),
            e: e_n,
        });
    }
    let proof_level = (0..)
        .find(|n: &u32| Q::from_integer(*n as i64 + 1) * eps >= c)
        .expect("eps > 0");
    Ok(EpsilonWitness {
        epsilon: eps,
        level,
        delta_at_level: delta,
        epsilon_lattice_power: lattice.to_integer() as u64,
        proof_level,
        certificate_levels: cert_levels.to_vec(),
        certificate,
        certificate_verified: verified,
    })
}

/// The witness from a computed table; the certificate covers the levels
/// `N..levels` that fit the elimination budget (at least N itself).
pub fn find_epsilon_from_table(
    spec: &KummerCoverSpec,
    table: &DeltaTable,
) -> Result<EpsilonWitness> {
    let deltas: Vec<Q> = table.rows.iter().map(|r| r.delta).collect();
    let (level, eps) = choose_epsilon(spec.prime, &deltas).ok_or(Error::NoEpsilon(spec.levels))?;
    let mut cert_levels = vec![level];
    for n in level + 1..spec.levels {
        if spec.e(n + 1) <= MAX_ELIMINATION_E / 8 {
            cert_levels.push(n);
        }
    }
    build_witness(
        spec.prime,
        spec.m,
        spec.n_digits,
        level,
        eps,
        deltas[level as usize],
        table.c,
        &cert_levels,
    )
}

/// The witness from the semigroup formula alone, searching levels up to `max_level`.
pub fn find_epsilon(prime: Prime, m: u64, max_level: u32) -> Result<EpsilonWitness> {
    if m < 2 || m.is_multiple_of(prime.get()) {
        return Err(Error::Spec(format!(
            "m = {m} must be at least 2 and prime to p"
        )));
    }
    let conductor = semigroup_conductor(&[m, prime.get()])
        .ok_or(Error::Invalid("generators not coprime".into()))?;
    let mut deltas = Vec::new();
    for n in 0..=max_level {
        match prime
            .get()
            .checked_pow(n + 1)
            .and_then(|x| x.checked_mul(m))
        {
            Some(e) if e < i64::MAX as u64 => deltas.push(q(conductor as i64, e as i64)),
            _ => break,
        }
    }
    let (level, eps) = choose_epsilon(prime, &deltas).ok_or(Error::NoEpsilon(max_level))?;
    let c = deltas[0];
    build_witness(prime, m, 6, level, eps, deltas[level as usize], c, &[level])
}

/// Re-verify every stored decomposition from scratch.
pub fn verify_certificate(prime: Prime, m: u64, n_digits: u32, w: &EpsilonWitness) -> bool {
    w.certificate.iter().all(|entry| {
        let Some((g, a, b)) = &entry.elems else {
            return false;
        };
        let e1 = m * prime.pow(entry.level + 1);
        let Ok(ring) = layer_make(prime, n_digits, e1, 0, q(1, 1)) else {
            return false;
        };
        if g.ring() != &ring {
            return false;
        }
        let c = w.epsilon * Q::from_integer(e1 as i64);
        c.is_integer() && verify_entry(&ring, prime.get(), c.to_integer() as u64, g, a, b)
    })
}

/// Annihilators of `R_{n+k} ⊗ S_n -> S_{n+k}` against the sum of the
/// one-step constants and the limiting bound.
#[derive(Clone, Debug, Serialize)]
pub struct ColimitRow {
    pub n: u32,
    pub k: u32,
    #[serde(serialize_with = "ser_q")]
    pub exact: Q,
    #[serde(serialize_with = "ser_q")]
    pub geometric_sum: Q,
    #[serde(serialize_with = "ser_q")]
    pub limit_bound: Q,
    pub within: bool,
}

pub fn colimit_rows(
    spec: &KummerCoverSpec,
    table: &DeltaTable,
    max_k: u32,
) -> Result<Vec<ColimitRow>> {
    let p = spec.prime;
    let pp = Q::from_integer(p.get() as i64);
    let mut rows = Vec::new();
    for n in 0..spec.levels {
        for k in 1..=max_k {
            let e = spec.m * p.pow(n + k);
            if e > MAX_ELIMINATION_E / 4 {
                break;
            }
            let el = elimination_exponent(p, spec.m, n, k, spec.n_digits)?;
            let exact = q(el as i64, e as i64);
            let geometric_sum: Q = (0..k)
                .map(|i| delta_from_conductor(spec, table.conductor, n + i))
                .sum();
            let limit_bound = table.c * pp / (Q::from_integer(p.pow(n) as i64) * (pp - q(1, 1)));
            rows.push(ColimitRow {
                n,
                k,
                exact,
                geometric_sum,
                limit_bound,
                within: exact <= geometric_sum && geometric_sum <= limit_bound,
            });
        }
    }
    Ok(rows)
}

/// The same annihilator on the flat side: `F_p[u]/(u^K)` with image spanned
/// by `u^{s + j e}`, truncated at `K = 2e`.
#[derive(Clone, Debug, Serialize)]
pub struct FlatDeltaRow {
    pub n: u32,
    #[serde(serialize_with = "ser_q")]
    pub delta_flat: Q,
    pub matches: bool,
}

pub fn flat_delta_exponent(p: Prime, m: u64, n: u32) -> Result<u64> {
    let e = m * p.pow(n + 1);
    if e > MAX_ELIMINATION_E {
        return Err(Error::DimensionTooLarge(format!(
            "ramification {e} for elimination"
        )));
    }
    let top = 2 * e;
    let fp = Modulus::new(p, 1)?;
    let mut exps = BTreeSet::new();
    for a in 0..p.pow(n + 1) {
        for b in 0..m * p.pow(n) {
            let mut s = m * a + p.get() * b;
            while s < top {
                exps.insert(s);
                s += e;
            }
        }
    }
    let mut mat = SparseMat::new(top as usize);
    for s in &exps {
        mat.push_col(vec![(*s as usize, 1)]);
    }
    let smith = Smith::compute(&mat, fp);
    let inside: Vec<bool> = (0..top)
        .map(|k| {
            let mut b = vec![0u64; top as usize];
            b[k as usize] = 1;
            smith.contains(&b)
        })
        .collect();
    (0..=e)
        .find(|&s| inside[s as usize..top as usize].iter().all(|x| *x))
        .ok_or_else(|| Error::Invalid(format!("no flat annihilator at level {n}")))
}

pub fn flat_delta_rows(spec: &KummerCoverSpec, table: &DeltaTable) -> Result<Vec<FlatDeltaRow>> {
    table
        .rows
        .iter()
        .map(|r| {
            let k = flat_delta_exponent(spec.prime, spec.m, r.n)?;
            let d = q(k as i64, spec.e(r.n + 1) as i64);
            Ok(FlatDeltaRow {
                n: r.n,
                delta_flat: d,
                matches: d == r.delta,
            })
        })
        .collect()
}

/// Embedding dimension `dim m/m^2` of the monomial algebra `F_p[u^E]`
/// truncated at `u^top`, for an exponent set E containing 0.
pub fn embedding_dimension(exponents: &[u64], top: u64) -> usize {
    let set: BTreeSet<u64> = exponents.iter().copied().filter(|&k| k < top).collect();
    let positive: Vec<u64> = set.iter().copied().filter(|&k| k > 0).collect();
    positive
        .iter()
        .filter(|&&k| {
            !positive
                .iter()
                .any(|&a| a < k && set.contains(&(k - a)) && k - a > 0)
        })
        .count()
}

/// The tower `{S_n}_{n >= N'}` with `I_0 = (p^eps)` and its axiom report.
#[derive(Clone, Debug, Serialize)]
pub struct Assembly {
    #[serde(serialize_with = "ser_q")]
    pub epsilon: Q,
    pub witness_level: u32,
    pub proof_level: u32,
    /// Least start level from which every axiom passes.
    pub start_level: u32,
    pub tried: Vec<(u32, bool)>,
    pub axioms: AxiomReport,
    #[serde(skip)]
    pub tower: TowerHandle,
}

/// How many start levels past the witness level are tried.
pub const ASSEMBLY_SEARCH: u32 = 3;

fn kummer_tower(spec: &KummerCoverSpec, eps: Q, start: u32, depth: u32) -> Result<TowerHandle> {
    build_tower(&TowerSpec::kummer(
        spec.prime.get(),
        spec.m,
        spec.n_digits,
        depth,
        eps,
        start,
    )?)
}

/// Run the axiom suite on the Kummer tower from the witness level upward
/// and report the least start level that passes.
pub fn assemble_perfectoid(
    spec: &KummerCoverSpec,
    w: &EpsilonWitness,
    depth: u32,
    samples: usize,
    seed: u64,
) -> Result<Assembly> {
    let mut tried = Vec::new();
    for start in w.level..=w.level + ASSEMBLY_SEARCH {
        let h = kummer_tower(spec, w.epsilon, start, depth)?;
        let report = check_axioms(&h, samples, seed)?;
        let ok = report.all_ok();
        tried.push((start, ok));
        if ok {
            return Ok(Assembly {
                epsilon: w.epsilon,
                witness_level: w.level,
                proof_level: w.proof_level,
                start_level: start,
                tried,
                axioms: report,
                tower: h,
            });
        }
    }
    Err(Error::AssemblyFailed(w.level + ASSEMBLY_SEARCH))
}

/// Keep the pillar `f_1 = p^{eps/p}` of the witness but force the ideal
/// `I_0 = (p^{eps'})`.
pub fn forced_ideal_control(
    spec: &KummerCoverSpec,
    w: &EpsilonWitness,
    eps_prime: Q,
    depth: u32,
    samples: usize,
    seed: u64,
) -> Result<AxiomReport> {
    let h = kummer_tower(spec, eps_prime, w.level, depth)?;
    let pillar = w.epsilon * Q::from_integer(spec.e(w.level + 1) as i64)
        / Q::from_integer(spec.prime.get() as i64);
    if !pillar.is_integer() {
        return Err(Error::NonIntegralIdeal {
            exp: fmt_q(&(w.epsilon / Q::from_integer(spec.prime.get() as i64))),
            e: spec.e(w.level + 1),
        });
    }
    check_axioms(
        &h.with_pillar_exponent(pillar.to_integer() as u64)?,
        samples,
        seed,
    )
}

/// `F_p[u^E]` truncated at `u^top` is generated by one element.
pub fn presentation_check(exponents: &[u64], top: u64) -> Check {
    let dim = embedding_dimension(exponents, top);
    if dim == 1 {
        return Check::new("monogenic_presentation", Verdict::Pass);
    }
    Check::fail(
        "monogenic_presentation",
        Witness::new(
            0,
            format!(
                "exponents {:?}",
                exponents.iter().take(8).collect::<Vec<_>>()
            ),
            format!("embedding dimension {dim}"),
        ),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalityLevel {
    pub level: u32,
    pub depth: u32,
    pub presentation: String,
    pub embedding_dimension: usize,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalityReport {
    pub schema: u32,
    pub levels: Vec<NormalityLevel>,
}

impl NormalityReport {
    pub fn all_ok(&self) -> bool {
        self.levels
            .iter()
            .flat_map(|l| l.checks.iter())
            .all(|c| c.verdict.is_ok())
    }
}

/// For each level j below the depth: the full-depth small tilt is a
/// truncated monogenic ring, and it is p-root closed in its localization
/// at `f^flat` on sampled fractions.
pub fn smalltilt_normality_report(
    h: &TowerHandle,
    samples: usize,
    seed: u64,
) -> Result<NormalityReport> {
    let p = h.prime().get();
    let mut levels = Vec::new();
    for j in 0..h.depth() {
        let m = h.depth() - j;
        let pres = small_tilt(h, j, m)?;
        let mut checks = Vec::new();
        let mut dims = Vec::new();
        for (comp, &k) in pres.quotient_exponent.iter().enumerate() {
            let exps: Vec<u64> = (0..pres.ring.rank())
                .map(|i| pres.ring.monomial_at(i))
                .filter(|mono| mono.comp as usize == comp && mono.var_degree() == 0)
                .map(|mono| mono.t)
                .collect();
            dims.push(embedding_dimension(&exps, k));
            checks.push(presentation_check(&exps, k));
        }
        let cj = h.quot(j)?.powers().to_vec();
        let f = pres.ring.from_terms(
            cj.iter()
                .enumerate()
                .map(|(i, c)| (crate::layer::Monomial::new(i, *c), 1)),
        );
        let pair = RingPair::layer_with(format!("small tilt ({j}, {m})"), &pres.ring, &f)?;
        checks.push(check_root_closed(
            &pair,
            p,
            Mode::Sampled(samples),
            Ambient::Localized { c_cap: 2 },
            seed.wrapping_add(j as u64),
        )?);
        levels.push(NormalityLevel {
            level: j,
            depth: m,
            presentation: pres
                .quotient_exponent
                .iter()
                .map(|k| {
                    format!(
                        "F_{p}[T]/(T^{k}), v(T) = 1/{}",
                        pres.uniformizer_denominator
                    )
                })
                .collect::<Vec<_>>()
                .join(" x "),
            embedding_dimension: dims.into_iter().max().unwrap_or(0),
            checks,
        });
    }
    Ok(NormalityReport { schema: 1, levels })
}
