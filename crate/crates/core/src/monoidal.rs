//! The monoidal map from a small tilt back to the layers.
//!
//! For `x = (x_0, ..., x_m)` at level j, `sharp(x)` is `x̂_m^{p^m}` in
//! `R_{j+m}`, with `x̂_m` any lift of the deepest component. Its effective
//! precision is measured against the previous approximation
//! `t(x̂_{m-1}^{p^{m-1}})`, so the value certifies its own accuracy.

use crate::arith::{fmt_q, ser_q, Valuation, Q};
use crate::error::{Error, Result};
use crate::layer::{LayerElem, Monomial};
use crate::linalg::rank_fp;
use crate::quotient::{QuotElem, QuotSpace};
use crate::report::{Check, Verdict, Witness};
use crate::tilt::{
    components, f_flat_generator, p_flat, small_tilt, SmallTiltElem, TiltPresentation,
};
use crate::torsion::{torsion_submodule, TorsionReport};
use crate::tower::TowerHandle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftMode {
    Canonical,
    /// Canonical lift plus `f_0 * r` for a seeded random `r`.
    Random(u64),
}

#[derive(Clone, Debug, Serialize)]
pub struct SharpResult {
    pub layer: u32,
    pub value_layer: u32,
    pub value: String,
    #[serde(serialize_with = "ser_q")]
    pub effective_precision: Q,
    /// The two approximations agree to the full working precision.
    pub exact: bool,
    #[serde(skip)]
    pub elem: LayerElem,
}

fn lift(h: &TowerHandle, level: u32, x: &QuotElem, mode: LiftMode, salt: u64) -> Result<LayerElem> {
    let base = x.lift();
    match mode {
        LiftMode::Canonical => Ok(base),
        LiftMode::Random(seed) => {
            let ring = h.layer(level)?;
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let md = ring.modulus();
            let terms: Vec<(Monomial, u64)> = (0..rng.gen_range(1..=6))
                .map(|_| {
                    (
                        ring.monomial_at(rng.gen_range(0..ring.rank())),
                        rng.gen_range(0..md.value),
                    )
                })
                .collect();
            let r = ring.from_terms(terms);
            base.add(&h.f0(level)?.mul(&r)?)
        }
    }
}

/// `sharp(x)` in `R_{j+m}` with its self-validated precision.
pub fn sharp(h: &TowerHandle, x: &SmallTiltElem, mode: LiftMode) -> Result<SharpResult> {
    if !h.is_mixed() {
        return Err(Error::Invalid(
            "the monoidal map targets a mixed characteristic tower".into(),
        ));
    }
    let m = x.depth;
    if m == 0 {
        return Err(Error::ZeroDepth);
    }
    let j = x.layer;
    let p = h.prime().get();
    let comps = components(h, x)?;
    let top = j + m;
    let a_m = lift(h, top, &comps[m as usize], mode, top as u64)?.pow(p.pow(m));
    let prev =
        lift(h, top - 1, &comps[(m - 1) as usize], mode, (top - 1) as u64)?.pow(p.pow(m - 1));
    let a_prev = h.transition(top - 1, &prev)?;
    let precision = h.layer(top)?.precision();
    let eff = a_m.sub(&a_prev)?.valuation().capped(precision);
    Ok(SharpResult {
        layer: j,
        value_layer: top,
        value: a_m.to_string(),
        effective_precision: eff,
        exact: eff == precision,
        elem: a_m,
    })
}

/// Extend an element one step deeper by keeping its monomials; Frobenius
/// projection sends `t^k` at level n+1 to `t^k` at level n.
pub fn extend_depth(h: &TowerHandle, x: &SmallTiltElem) -> Result<SmallTiltElem> {
    let pres = small_tilt(h, x.layer, x.depth + 1)?;
    let mut coeffs = vec![0u64; pres.deepest.dim()];
    for (mono, c) in x.deepest.terms() {
        pres.deepest.push_monomial(&mut coeffs, &mono, c);
    }
    let y = pres.element(pres.deepest.from_coeffs(coeffs))?;
    if h.frob_projection(x.layer + x.depth, &y.deepest)? != x.deepest {
        return Err(Error::Invalid(
            "element does not extend by its monomials".into(),
        ));
    }
    Ok(y)
}

fn random_tilt(rng: &mut ChaCha8Rng, pres: &TiltPresentation) -> SmallTiltElem {
    let p = pres.deepest.fp().p;
    let coeffs = (0..pres.deepest.dim())
        .map(|_| rng.gen_range(0..p))
        .collect();
    pres.element(pres.deepest.from_coeffs(coeffs))
        .expect("same space")
}

fn named_samples(h: &TowerHandle, j: u32, m: u32) -> Result<Vec<SmallTiltElem>> {
    let pres = small_tilt(h, j, m)?;
    let pf = p_flat(h, j, m)?;
    Ok(vec![
        pres.one(),
        pres.zero(),
        pf.clone(),
        pres.add(&pres.one(), &pf)?,
        f_flat_generator(h, j, m)?,
        pres.generator_pow(1),
    ])
}

/// `sharp(x) mod I_0` equals `Phi_0(x)` carried to level j+m.
pub fn check_sharp_phi(
    h: &TowerHandle,
    j: u32,
    m: u32,
    samples: usize,
    seed: u64,
) -> Result<Check> {
    let pres = small_tilt(h, j, m)?;
    let top = h.quot(j + m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a4b);
    let mut elems = named_samples(h, j, m)?;
    elems.extend((0..samples).map(|_| random_tilt(&mut rng, &pres)));
    let n = elems.len();
    let bad = first_failure(&elems, |x| {
        let s = sharp(h, x, LiftMode::Canonical)?;
        let phi0 = components(h, x)?.swap_remove(0);
        Ok(top.reduce(&s.elem)? != h.quot_transition_k(j, m, &phi0)?)
    })?;
    if let Some(x) = bad {
        return Ok(Check::fail(
            "sharp_reduces_to_phi0",
            Witness::new(j, pres.text(x), "sharp(x) mod I_0 differs from Phi_0(x)"),
        ));
    }
    Ok(Check::new("sharp_reduces_to_phi0", Verdict::Pass).with_samples(n))
}

/// The first input (in order) for which `failed` holds, evaluated in parallel.
fn first_failure<T: Sync>(
    inputs: &[T],
    failed: impl Fn(&T) -> Result<bool> + Sync,
) -> Result<Option<&T>> {
    let flags: Vec<bool> = inputs.par_iter().map(&failed).collect::<Result<_>>()?;
    Ok(flags.iter().position(|f| *f).map(|i| &inputs[i]))
}

fn agrees(a: &LayerElem, b: &LayerElem, to: Q) -> Result<bool> {
    Ok(match a.sub(b)?.valuation() {
        Valuation::AbovePrecision => true,
        Valuation::Finite(v) => v >= to,
    })
}

/// `sharp(xy) = sharp(x) sharp(y)` up to the least effective precision.
pub fn check_multiplicativity(
    h: &TowerHandle,
    j: u32,
    m: u32,
    pairs: usize,
    seed: u64,
) -> Result<Check> {
    let pres = small_tilt(h, j, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3c1d);
    let inputs: Vec<_> = (0..pairs)
        .map(|_| (random_tilt(&mut rng, &pres), random_tilt(&mut rng, &pres)))
        .collect();
    let outcomes: Vec<(Q, bool)> = inputs
        .par_iter()
        .map(|(x, y)| {
            let sx = sharp(h, x, LiftMode::Canonical)?;
            let sy = sharp(h, y, LiftMode::Canonical)?;
            let sxy = sharp(h, &pres.mul(x, y)?, LiftMode::Canonical)?;
            let to = sx
                .effective_precision
                .min(sy.effective_precision)
                .min(sxy.effective_precision);
            Ok((to, agrees(&sxy.elem, &sx.elem.mul(&sy.elem)?, to)?))
        })
        .collect::<Result<_>>()?;
    if let Some(i) = outcomes.iter().position(|(_, ok)| !ok) {
        let (x, y) = &inputs[i];
        return Ok(Check::fail(
            "sharp_multiplicative",
            Witness::new(
                j,
                format!("({}) * ({})", pres.text(x), pres.text(y)),
                "sharp(xy) != sharp(x) sharp(y)",
            ),
        ));
    }
    let worst = outcomes.iter().map(|(to, _)| *to).min();
    let mut c = Check::new("sharp_multiplicative", Verdict::SampledPass).with_samples(pairs);
    if let Some(w) = worst {
        c = c.note(format!("least effective precision {}", fmt_q(&w)));
    }
    Ok(c)
}

/// Random lifts agree with the canonical lift up to the effective precision.
pub fn check_lift_independence(
    h: &TowerHandle,
    j: u32,
    m: u32,
    runs: usize,
    seed: u64,
) -> Result<Check> {
    let pres = small_tilt(h, j, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11f7);
    let inputs: Vec<_> = (0..runs)
        .map(|run| (random_tilt(&mut rng, &pres), seed.wrapping_add(run as u64)))
        .collect();
    let bad = first_failure(&inputs, |(x, lift_seed)| {
        let a = sharp(h, x, LiftMode::Canonical)?;
        let b = sharp(h, x, LiftMode::Random(*lift_seed))?;
        let to = a.effective_precision.min(b.effective_precision);
        Ok(!agrees(&a.elem, &b.elem, to)?)
    })?;
    if let Some((x, _)) = bad {
        return Ok(Check::fail(
            "sharp_lift_independent",
            Witness::new(
                j,
                pres.text(x),
                "random lift changes sharp(x) below its precision",
            ),
        ));
    }
    Ok(Check::new("sharp_lift_independent", Verdict::SampledPass).with_samples(runs))
}

/// Effective precision never drops when the same element is taken deeper.
pub fn check_stabilization(
    h: &TowerHandle,
    j: u32,
    max_depth: u32,
    samples: usize,
    seed: u64,
) -> Result<Check> {
    let pres = small_tilt(h, j, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2b2b);
    let mut elems = named_samples(h, j, 1)?;
    for _ in 0..samples {
        let terms: Vec<(Monomial, u64)> = (0..rng.gen_range(1..=4))
            .map(|_| {
                (
                    pres.deepest
                        .monomial_at(rng.gen_range(0..pres.deepest.dim())),
                    rng.gen_range(1..h.prime().get()),
                )
            })
            .collect();
        let mut coeffs = vec![0u64; pres.deepest.dim()];
        for (mono, c) in &terms {
            pres.deepest.push_monomial(&mut coeffs, mono, *c);
        }
        elems.push(pres.element(pres.deepest.from_coeffs(coeffs))?);
    }
    let n = elems.len();
    for x in elems {
        let mut cur = x;
        let mut last = sharp(h, &cur, LiftMode::Canonical)?.effective_precision;
        while cur.depth < max_depth {
            cur = extend_depth(h, &cur)?;
            let eff = sharp(h, &cur, LiftMode::Canonical)?.effective_precision;
            if eff < last {
                let pres_cur = small_tilt(h, j, cur.depth)?;
                return Ok(Check::fail(
                    "sharp_precision_monotone",
                    Witness::new(
                        j,
                        pres_cur.text(&cur),
                        format!("effective precision fell at depth {}", cur.depth),
                    ),
                ));
            }
            last = eff;
        }
    }
    Ok(Check::new("sharp_precision_monotone", Verdict::Pass).with_samples(n))
}

/// `v(sharp(T^k)) = k/e_j` for every `T^k` below the working precision.
pub fn check_monomial_valuations(h: &TowerHandle, j: u32, m: u32) -> Result<Check> {
    let pres = small_tilt(h, j, m)?;
    let e = h.shape().e(j);
    let precision = h.layer(j + m)?.precision();
    let top = pres.quotient_exponent.iter().copied().min().unwrap_or(0);
    let mut count = 0;
    for k in 0..top {
        let v = Q::new(k as i64, e as i64);
        if v >= precision {
            break;
        }
        let s = sharp(h, &pres.generator_pow(k), LiftMode::Canonical)?;
        count += 1;
        if s.elem.valuation() != Valuation::Finite(v) {
            return Ok(Check::fail(
                "sharp_monomial_valuation",
                Witness::new(
                    j,
                    format!("T^{k}"),
                    format!("valuation {} expected {}", s.elem.valuation(), fmt_q(&v)),
                ),
            ));
        }
    }
    Ok(Check::new("sharp_monomial_valuation", Verdict::Pass).with_samples(count))
}

#[derive(Clone, Debug, Serialize)]
pub struct Sharp1Report {
    pub layer: u32,
    pub depth: u32,
    pub domain: String,
    pub codomain: String,
    pub dimension: usize,
    pub generator_image: String,
    pub checks: Vec<Check>,
}

/// Pull an element of `Q_{j+m}` back along the injective `t^m: Q_j -> Q_{j+m}`.
fn pull_back(h: &TowerHandle, j: u32, m: u32, y: &QuotElem) -> Result<Option<QuotElem>> {
    let src = h.quot(j)?;
    let mut index: HashMap<Monomial, usize> = HashMap::new();
    for i in 0..src.dim() {
        let mut mono = src.monomial_at(i);
        for _ in 0..m {
            mono = h.map_monomial(&mono);
        }
        index.insert(mono, i);
    }
    let mut coeffs = vec![0u64; src.dim()];
    for (mono, c) in y.terms() {
        match index.get(&mono) {
            Some(&i) => coeffs[i] = c,
            None => return Ok(None),
        }
    }
    Ok(Some(src.from_coeffs(coeffs)))
}

/// The map `x mod (T^{c_j}) -> sharp(x) mod I_0` read in `Q_j`.
fn sharp1(h: &TowerHandle, x: &SmallTiltElem) -> Result<Option<QuotElem>> {
    let s = sharp(h, x, LiftMode::Canonical)?;
    let top = h.quot(x.layer + x.depth)?;
    pull_back(h, x.layer, x.depth, &top.reduce(&s.elem)?)
}

/// The induced map of the presentation modulo `T^{c_j}` onto `R_j/I_0`:
/// well defined, bijective, additive and multiplicative.
pub fn check_sharp1_iso(
    h: &TowerHandle,
    j: u32,
    m: u32,
    pairs: usize,
    seed: u64,
) -> Result<Sharp1Report> {
    if m == 0 {
        return Err(Error::ZeroDepth);
    }
    let pres = small_tilt(h, j, m)?;
    let qj = h.quot(j)?;
    let deep = &pres.deepest;
    let fp = qj.fp();
    let mut checks = Vec::new();

    // domain basis: monomials of Q_j read in the presentation
    let mut images = Vec::new();
    let mut defined = None;
    for i in 0..qj.dim() {
        let mono = qj.monomial_at(i);
        let mut coeffs = vec![0u64; deep.dim()];
        deep.push_monomial(&mut coeffs, &mono, 1);
        let x = pres.element(deep.from_coeffs(coeffs))?;
        match sharp1(h, &x)? {
            Some(y) => images.push(y.coeffs().to_vec()),
            None => {
                defined = Some(Witness::new(
                    j,
                    pres.text(&x),
                    "sharp(x) mod I_0 is not in the image of R_j/I_0",
                ));
                break;
            }
        }
    }
    for i in 0..deep.dim() {
        let mono = deep.monomial_at(i);
        if mono.t >= qj.powers()[mono.comp as usize]
            && qj.index_of(&Monomial { t: 0, ..mono }).is_some()
        {
            let x = pres.element(deep.basis(i))?;
            if sharp1(h, &x)?.is_none_or(|y| !y.is_zero()) {
                defined = Some(Witness::new(
                    j,
                    pres.text(&x),
                    "an element of (T^{c_j}) survives modulo I_0",
                ));
                break;
            }
        }
    }
    checks.push(match defined {
        Some(w) => Check::fail("sharp1_well_defined", w),
        None => Check::new("sharp1_well_defined", Verdict::Pass),
    });
    let full = images.len() == qj.dim() && rank_fp(fp, qj.dim(), &images) == qj.dim();
    checks.push(if full {
        Check::new("sharp1_bijective", Verdict::Pass)
    } else {
        Check::fail(
            "sharp1_bijective",
            Witness::new(
                j,
                format!("rank below {}", qj.dim()),
                "images of the basis are dependent",
            ),
        )
    });

    // products of basis monomials are monomials, so each distinct product is mapped once
    let mut basis_w = None;
    if images.len() == qj.dim() {
        let basis: Vec<SmallTiltElem> = (0..qj.dim())
            .map(|i| {
                let mut coeffs = vec![0u64; deep.dim()];
                deep.push_monomial(&mut coeffs, &qj.monomial_at(i), 1);
                pres.element(deep.from_coeffs(coeffs))
            })
            .collect::<Result<_>>()?;
        let mut cache: HashMap<Vec<u64>, Option<QuotElem>> = HashMap::new();
        'outer: for a in 0..basis.len() {
            for b in a..basis.len() {
                let prod = pres.mul(&basis[a], &basis[b])?;
                let key = prod.deepest.coeffs().to_vec();
                let got = match cache.get(&key) {
                    Some(v) => v.clone(),
                    None => {
                        let v = sharp1(h, &prod)?;
                        cache.insert(key, v.clone());
                        v
                    }
                };
                let want = qj
                    .from_coeffs(images[a].clone())
                    .mul(&qj.from_coeffs(images[b].clone()))?;
                if got != Some(want) {
                    basis_w = Some(Witness::new(
                        j,
                        pres.text(&prod),
                        "basis product not preserved",
                    ));
                    break 'outer;
                }
            }
        }
    } else {
        basis_w = Some(Witness::new(j, "basis", "images undefined"));
    }
    checks.push(match basis_w {
        Some(w) => Check::fail("sharp1_basis_multiplicative", w),
        None => Check::new("sharp1_basis_multiplicative", Verdict::Pass),
    });

    let window: Vec<usize> = (0..qj.dim())
        .filter_map(|i| deep.index_of(&qj.monomial_at(i)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5151);
    let random_window = |rng: &mut ChaCha8Rng| {
        let mut coeffs = vec![0u64; deep.dim()];
        for &i in &window {
            coeffs[i] = rng.gen_range(0..fp.p);
        }
        pres.element(deep.from_coeffs(coeffs)).expect("same space")
    };
    let mut add_w = None;
    let mut mul_w = None;
    for _ in 0..pairs {
        let x = random_window(&mut rng);
        let y = random_window(&mut rng);
        let (fx, fy) = match (sharp1(h, &x)?, sharp1(h, &y)?) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                mul_w = Some(Witness::new(j, pres.text(&x), "image outside R_j/I_0"));
                break;
            }
        };
        if add_w.is_none() && sharp1(h, &pres.add(&x, &y)?)? != Some(fx.add(&fy)?) {
            add_w = Some(Witness::new(
                j,
                format!("({}) + ({})", pres.text(&x), pres.text(&y)),
                "not additive",
            ));
        }
        if mul_w.is_none() && sharp1(h, &pres.mul(&x, &y)?)? != Some(fx.mul(&fy)?) {
            mul_w = Some(Witness::new(
                j,
                format!("({}) * ({})", pres.text(&x), pres.text(&y)),
                "not multiplicative",
            ));
        }
    }
    checks.push(match add_w {
        Some(w) => Check::fail("sharp1_additive", w),
        None => Check::new("sharp1_additive", Verdict::SampledPass).with_samples(pairs),
    });
    checks.push(match mul_w {
        Some(w) => Check::fail("sharp1_multiplicative", w),
        None => Check::new("sharp1_multiplicative", Verdict::SampledPass).with_samples(pairs),
    });

    let generator_image = sharp1(h, &pres.generator_pow(1))?
        .map(|y| y.to_string())
        .unwrap_or_else(|| "undefined".into());
    let powers = qj.powers();
    let fmt_ring = |sym: &str| {
        powers
            .iter()
            .map(|c| format!("F_{}[{sym}]/({sym}^{c})", fp.p))
            .collect::<Vec<_>>()
            .join(" x ")
    };
    Ok(Sharp1Report {
        layer: j,
        depth: m,
        domain: fmt_ring("T"),
        codomain: fmt_ring("t"),
        dimension: qj.dim(),
        generator_image,
        checks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SharpfReport {
    pub layer: u32,
    pub depth: u32,
    #[serde(serialize_with = "ser_q")]
    pub valuation_sharp: Q,
    #[serde(serialize_with = "ser_q")]
    pub valuation_f_j: Q,
    pub unit: String,
    pub check: Check,
}

/// `sharp(f^flat) = f_j * u` with u a unit and matching valuations.
pub fn check_sharpf(h: &TowerHandle, j: u32, m: u32) -> Result<SharpfReport> {
    let ff = f_flat_generator(h, j, m)?;
    let s = sharp(h, &ff, LiftMode::Canonical)?;
    let top = h.layer(j + m)?;
    let c0 = h.shape().c(0);
    let lj = h.layer(j)?;
    let f_j = lj.from_terms((0..lj.components()).map(|i| (Monomial::new(i, c0), 1)));
    let f_top = h.transition_k(j, m, &f_j)?;
    let mut u = s.elem.clone();
    let mut divisible = true;
    for comp in 0..top.components() {
        let md = top.modulus();
        let k = f_top
            .component(comp)
            .terms()
            .iter()
            .map(|(mono, c)| mono.t + top.e() * md.val(*c) as u64)
            .min()
            .unwrap_or(0);
        match u.div_t_pow(comp, k) {
            Some(v) => u = v,
            None => divisible = false,
        }
    }
    let vs = s.elem.valuation();
    let vf = f_j.valuation();
    let unit_ok = divisible && u.inverse().is_ok();
    let (valuation_sharp, valuation_f_j) = match (vs.finite(), vf.finite()) {
        (Some(a), Some(b)) => (a, b),
        _ => (top.precision(), top.precision()),
    };
    let check = if vs == vf && unit_ok {
        Check::new("sharpf_unit_multiple", Verdict::Pass)
    } else {
        Check::fail(
            "sharpf_unit_multiple",
            Witness::new(
                j,
                s.value.clone(),
                format!("valuation {vs} against {vf}, unit {unit_ok}"),
            ),
        )
    };
    Ok(SharpfReport {
        layer: j,
        depth: m,
        valuation_sharp,
        valuation_f_j,
        unit: u.to_string(),
        check,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdempotentReport {
    pub layer: u32,
    pub depth: u32,
    pub method: String,
    pub tilt_count: usize,
    pub layer_count: usize,
    pub matched: usize,
    pub tilt_idempotents: Vec<String>,
    pub check: Check,
}

/// Search budget of the exhaustive idempotent enumeration.
pub const IDEMPOTENT_NODE_LIMIT: usize = 1_000_000;

/// Every idempotent of a monomial quotient, by backtracking over the
/// coefficients in order of monomial weight. The coefficient of a monomial
/// in `e^2` only involves monomials of no larger weight, so each equation
/// is checked as soon as its monomial is assigned.
pub fn idempotents_exhaustive(sp: &QuotSpace) -> Result<Vec<QuotElem>> {
    let dim = sp.dim();
    if dim > 16 {
        return Err(Error::DimensionTooLarge(format!(
            "{dim} > 16 for exhaustive search"
        )));
    }
    let monos: Vec<Monomial> = (0..dim).map(|i| sp.monomial_at(i)).collect();
    let weight = |m: &Monomial| m.t + m.var_degree();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by_key(|&i| (weight(&monos[i]), i));
    let mut pairs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); dim];
    for a in 0..dim {
        for b in 0..dim {
            let (x, y) = (&monos[a], &monos[b]);
            if x.comp != y.comp {
                continue;
            }
            let mut vars = x.vars;
            for (v, w) in vars.iter_mut().zip(y.vars.iter()) {
                *v += w;
            }
            let prod = Monomial {
                comp: x.comp,
                t: x.t + y.t,
                vars,
            };
            if let Some(k) = sp.index_of(&prod) {
                pairs[k].push((a, b));
            }
        }
    }
    let fp = sp.fp();
    let mut coeffs = vec![0u64; dim];
    let mut found = Vec::new();
    let mut nodes = 0usize;
    fn go(
        pos: usize,
        order: &[usize],
        pairs: &[Vec<(usize, usize)>],
        fp: crate::arith::Modulus,
        coeffs: &mut Vec<u64>,
        found: &mut Vec<Vec<u64>>,
        nodes: &mut usize,
    ) -> Result<()> {
        if pos == order.len() {
            found.push(coeffs.clone());
            return Ok(());
        }
        let k = order[pos];
        for c in 0..fp.p {
            *nodes += 1;
            if *nodes > IDEMPOTENT_NODE_LIMIT {
                return Err(Error::DimensionTooLarge(
                    "idempotent search exceeded its node limit".into(),
                ));
            }
            coeffs[k] = c;
            let sq = pairs[k]
                .iter()
                .fold(0, |acc, &(a, b)| fp.add(acc, fp.mul(coeffs[a], coeffs[b])));
            if sq == c {
                go(pos + 1, order, pairs, fp, coeffs, found, nodes)?;
            }
        }
        coeffs[k] = 0;
        Ok(())
    }
    go(0, &order, &pairs, fp, &mut coeffs, &mut found, &mut nodes)?;
    Ok(found.into_iter().map(|c| sp.from_coeffs(c)).collect())
}

/// Idempotents of a monomial quotient whose components are local:
/// sums of component units over subsets of components.
pub fn idempotents_by_components(sp: &QuotSpace) -> Result<Vec<QuotElem>> {
    let comps = sp.powers().len();
    if comps > 16 {
        return Err(Error::DimensionTooLarge(format!("{comps} components")));
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << comps) {
        let mut coeffs = vec![0u64; sp.dim()];
        for c in 0..comps {
            if mask & (1 << c) != 0 {
                sp.push_monomial(&mut coeffs, &Monomial::new(c, 0), 1);
            }
        }
        let e = sp.from_coeffs(coeffs);
        if e.mul(&e)? != e {
            return Err(Error::Invalid("component unit is not idempotent".into()));
        }
        out.push(e);
    }
    Ok(out)
}

/// Newton iteration `e -> 3e^2 - 2e^3` from the canonical lift.
fn lift_idempotent(x: &QuotElem) -> Result<LayerElem> {
    let mut e = x.lift();
    for _ in 0..64 {
        let e2 = e.mul(&e)?;
        let next = e2.scale(3).sub(&e2.mul(&e)?.scale(2))?;
        if next == e {
            return Ok(e);
        }
        e = next;
    }
    Err(Error::Invalid("idempotent lift did not stabilise".into()))
}

/// `sharp` restricted to idempotents is a bijection onto the idempotents of
/// `R_{j+m}`, inverted by reading an idempotent as a constant sequence.
pub fn idempotent_transfer(h: &TowerHandle, j: u32, m: u32) -> Result<IdempotentReport> {
    if m == 0 {
        return Err(Error::ZeroDepth);
    }
    let pres = small_tilt(h, j, m)?;
    let sp = &pres.deepest;
    let (method, tilt_side) = if sp.dim() <= 16 {
        ("exhaustive", idempotents_exhaustive(sp)?)
    } else {
        ("components", idempotents_by_components(sp)?)
    };
    let layer_side: Vec<LayerElem> = idempotents_by_components(h.quot(j + m)?)?
        .iter()
        .map(lift_idempotent)
        .collect::<Result<_>>()?;
    for e in &layer_side {
        if e.mul(e)? != *e {
            return Err(Error::Invalid("lifted idempotent is not idempotent".into()));
        }
    }
    let mut matched = 0;
    let mut witness = None;
    let mut hit = vec![false; layer_side.len()];
    for eps in &tilt_side {
        let x = pres.element(eps.clone())?;
        let s = sharp(h, &x, LiftMode::Canonical)?;
        match layer_side.iter().position(|e| *e == s.elem) {
            Some(i) if !hit[i] => {
                let back = pres.element(h.quot(j + m)?.reduce(&layer_side[i])?)?;
                if back == x {
                    hit[i] = true;
                    matched += 1;
                } else {
                    witness = Some(Witness::new(
                        j,
                        pres.text(&x),
                        "constant sequence does not invert sharp",
                    ));
                }
            }
            _ => {
                witness = Some(Witness::new(
                    j,
                    pres.text(&x),
                    "sharp of an idempotent is not a layer idempotent",
                ))
            }
        }
    }
    let ok = witness.is_none() && matched == tilt_side.len() && matched == layer_side.len();
    let check = match witness {
        Some(w) => Check::fail("idempotent_bijection", w),
        None if !ok => Check::fail(
            "idempotent_bijection",
            Witness::new(
                j,
                format!("{} against {}", tilt_side.len(), layer_side.len()),
                "idempotent counts differ",
            ),
        ),
        None => Check::new("idempotent_bijection", Verdict::Pass),
    };
    Ok(IdempotentReport {
        layer: j,
        depth: m,
        method: method.into(),
        tilt_count: tilt_side.len(),
        layer_count: layer_side.len(),
        matched,
        tilt_idempotents: tilt_side
            .iter()
            .map(|e| pres.text(&pres.element(e.clone()).expect("same space")))
            .collect(),
        check,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsionTransfer {
    pub layer: u32,
    pub depth: u32,
    pub tilt: TorsionReport,
    pub mixed: TorsionReport,
    pub check: Check,
}

/// Torsion of the presentation for `T^{c_j}` at `(j, m)`.
pub fn tilt_torsion(h: &TowerHandle, j: u32, m: u32) -> Result<TorsionReport> {
    let pres = small_tilt(h, j, m)?;
    let ring = &pres.ring;
    let cj = h.quot(j)?.powers().to_vec();
    let g = ring.from_terms(
        cj.iter()
            .enumerate()
            .map(|(i, c)| (Monomial::new(i, *c), 1)),
    );
    torsion_submodule(ring, &g)
}

/// Compare the torsion of `R_j` for `f_0` with the tilt side.
pub fn compare_torsion(
    j: u32,
    m: u32,
    mixed: TorsionReport,
    tilt: TorsionReport,
) -> TorsionTransfer {
    let check = match (mixed.genuine.len(), tilt.genuine.len()) {
        (0, 0) => {
            Check::new("torsion_transfer", Verdict::TrivialCase).note("both sides are torsion free")
        }
        (a, b) if a == b => Check::new("torsion_transfer", Verdict::Pass)
            .note(format!("{a} torsion generators on each side")),
        (a, b) => Check::fail(
            "torsion_transfer",
            Witness::new(
                j,
                mixed
                    .genuine
                    .first()
                    .or(tilt.genuine.first())
                    .cloned()
                    .unwrap_or_default(),
                format!("{a} torsion generators against {b} on the tilt"),
            ),
        ),
    };
    TorsionTransfer {
        layer: j,
        depth: m,
        tilt,
        mixed,
        check,
    }
}

pub fn torsion_transfer_check(h: &TowerHandle, j: u32, m: u32) -> Result<TorsionTransfer> {
    let mixed = torsion_submodule(h.layer(j)?, &h.f0(j)?)?;
    let tilt = tilt_torsion(h, j, m)?;
    Ok(compare_torsion(j, m, mixed, tilt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;
    use crate::tower::{build_tower, TowerSpec};

    fn pure(depth: u32) -> TowerHandle {
        build_tower(&TowerSpec::pure(5, 6, depth).unwrap()).unwrap()
    }

    #[test]
    fn sharp_of_p_flat_is_p() {
        let h = pure(4);
        let s = sharp(&h, &p_flat(&h, 0, 4).unwrap(), LiftMode::Canonical).unwrap();
        assert_eq!(s.value, "5");
        assert_eq!(s.effective_precision, q(6, 1));
        let one = small_tilt(&h, 0, 3).unwrap().one();
        assert_eq!(sharp(&h, &one, LiftMode::Canonical).unwrap().value, "1");
    }

    #[test]
    fn zero_depth_is_an_error() {
        let h = pure(2);
        let x = small_tilt(&h, 0, 0).unwrap().one();
        assert!(matches!(
            sharp(&h, &x, LiftMode::Canonical),
            Err(Error::ZeroDepth)
        ));
    }

    #[test]
    fn sharp_checks_pass_on_pure_tower() {
        let h = pure(3);
        assert_eq!(
            check_sharp_phi(&h, 0, 3, 20, 1).unwrap().verdict,
            Verdict::Pass
        );
        assert!(check_multiplicativity(&h, 1, 2, 30, 1)
            .unwrap()
            .verdict
            .is_ok());
        assert!(check_lift_independence(&h, 0, 2, 30, 1)
            .unwrap()
            .verdict
            .is_ok());
        assert_eq!(
            check_stabilization(&h, 0, 3, 10, 1).unwrap().verdict,
            Verdict::Pass
        );
        assert_eq!(
            check_monomial_valuations(&h, 0, 2).unwrap().verdict,
            Verdict::Pass
        );
    }

    #[test]
    fn sharp1_is_an_isomorphism() {
        let h = pure(3);
        let r = check_sharp1_iso(&h, 1, 1, 10, 1).unwrap();
        assert_eq!(r.domain, "F_5[T]/(T^5)");
        assert_eq!(r.codomain, "F_5[t]/(t^5)");
        assert_eq!(r.generator_image, "t^{1/5}");
        assert!(r.checks.iter().all(|c| c.verdict.is_ok()), "{:?}", r.checks);
        let r = check_sharp1_iso(&h, 0, 2, 10, 1).unwrap();
        assert_eq!(r.domain, "F_5[T]/(T^1)");
    }

    #[test]
    fn sharpf_is_a_unit_multiple() {
        let h = pure(3);
        let r = check_sharpf(&h, 1, 2).unwrap();
        assert_eq!(r.valuation_sharp, q(1, 5));
        assert_eq!(r.check.verdict, Verdict::Pass);
    }

    #[test]
    fn idempotents_of_products() {
        let a = TowerSpec::pure(5, 6, 2).unwrap();
        let h = build_tower(&TowerSpec::product(vec![a.clone(), a.clone()]).unwrap()).unwrap();
        let r = idempotent_transfer(&h, 0, 1).unwrap();
        assert_eq!(r.method, "exhaustive");
        assert_eq!((r.tilt_count, r.layer_count, r.matched), (4, 4, 4));
        assert_eq!(r.check.verdict, Verdict::Pass);
        let h3 = build_tower(&TowerSpec::product(vec![a.clone(), a.clone(), a]).unwrap()).unwrap();
        let r = idempotent_transfer(&h3, 0, 1).unwrap();
        assert_eq!((r.tilt_count, r.matched), (8, 8));
        let r = idempotent_transfer(&h3, 0, 2).unwrap();
        assert_eq!(r.method, "components");
        assert_eq!(r.matched, 8);
    }

    #[test]
    fn torsion_transfer_trivial_and_crafted() {
        let h = pure(2);
        assert_eq!(
            torsion_transfer_check(&h, 0, 1).unwrap().check.verdict,
            Verdict::TrivialCase
        );
        let a = TowerSpec::pure(5, 6, 2).unwrap();
        let prod = build_tower(&TowerSpec::product(vec![a.clone(), a]).unwrap()).unwrap();
        let killed = prod.with_component_ideals(vec![Some(1), None]).unwrap();
        let mixed = torsion_submodule(killed.layer(0).unwrap(), &killed.f0(0).unwrap()).unwrap();
        let t = compare_torsion(0, 1, mixed, tilt_torsion(&prod, 0, 1).unwrap());
        assert_eq!(t.check.verdict, Verdict::Fail);
    }
}
