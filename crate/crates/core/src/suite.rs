//! The full verification battery, one entry per acceptance criterion.

use crate::arith::{fmt_q, q, Prime, Q};
use crate::axioms::check_axioms;
use crate::closure::{check_root_closed, is_cartesian_mod_f, Ambient, Mode, RingPair};
use crate::error::Result;
use crate::monoidal::{
    check_lift_independence, check_multiplicativity, check_sharp1_iso, check_sharp_phi,
    check_sharpf, idempotent_transfer, sharp, LiftMode,
};
use crate::ramified::{
    assemble_perfectoid, delta_table, find_epsilon_from_table, forced_ideal_control,
    smalltilt_normality_report, verify_certificate, KummerCoverSpec,
};
use crate::report::{Check, Verdict, Witness};
use crate::tilt::{p_flat, small_tilt};
use crate::tower::{build_tower, TowerHandle, TowerSpec};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Criterion {
    pub number: u32,
    pub title: String,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub seed: u64,
    pub criteria: Vec<Criterion>,
}

impl SuiteReport {
    pub fn all_ok(&self) -> bool {
        self.criteria.iter().all(|c| c.verdict.is_ok())
    }
}

fn criterion(number: u32, title: &str, checks: Vec<Check>) -> Criterion {
    let verdict = if checks.iter().all(|c| c.verdict.is_ok()) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Criterion {
        number,
        title: title.into(),
        verdict,
        checks,
    }
}

fn expect(id: impl Into<String>, ok: bool, got: impl Into<String>) -> Check {
    let got = got.into();
    if ok {
        Check::new(id, Verdict::Pass).note(got)
    } else {
        Check::fail(id, Witness::new(0, got, "unexpected value"))
    }
}

fn relabel(mut c: Check, prefix: &str) -> Check {
    c.id = format!("{prefix}/{}", c.id);
    c
}

pub fn pure_tower(depth: u32) -> Result<TowerHandle> {
    build_tower(&TowerSpec::pure(5, 6, depth)?)
}

/// The Kummer tower (p, m) = (5, 2) with its computed `eps` and start level.
pub fn kummer_tower(depth: u32) -> Result<TowerHandle> {
    build_tower(&TowerSpec::from_json(&format!(
        r#"{{"prime":5,"n_digits":6,"depth":{depth},"kind":"kummer","m":2}}"#
    ))?)
}

fn c1(seed: u64) -> Result<Criterion> {
    let mut checks = Vec::new();
    for v in [0usize, 1] {
        let h = build_tower(&TowerSpec::pure_with_vars(5, 6, 3, v, q(1, 1))?)?;
        let rep = check_axioms(&h, 200, seed)?;
        for c in rep.verdicts {
            let ok = match c.id.as_str() {
                "e" => c.verdict == Verdict::SampledPass && c.samples.unwrap_or(0) >= 200,
                _ => c.verdict == Verdict::Pass,
            };
            let c = if ok {
                c
            } else {
                Check {
                    verdict: Verdict::Fail,
                    ..c
                }
            };
            checks.push(relabel(c, &format!("vars={v}")));
        }
    }
    Ok(criterion(1, "pure tower axioms", checks))
}

fn c2() -> Result<Criterion> {
    let h = pure_tower(3)?;
    let pres = small_tilt(&h, 0, 3)?;
    let pf = pres.text(&p_flat(&h, 0, 3)?);
    Ok(criterion(
        2,
        "small tilt presentation",
        vec![
            expect(
                "quotient_exponent",
                pres.quotient_exponent == vec![125],
                format!("{:?}", pres.quotient_exponent),
            ),
            expect("p_flat", pf == "T", pf),
        ],
    ))
}

fn c3(seed: u64) -> Result<Criterion> {
    let h = pure_tower(4)?;
    let s = sharp(&h, &p_flat(&h, 0, 4)?, LiftMode::Canonical)?;
    let one = sharp(&h, &small_tilt(&h, 0, 4)?.one(), LiftMode::Canonical)?;
    let checks = vec![
        expect(
            "sharp_p_flat",
            s.value == "5" && s.effective_precision == q(6, 1),
            format!("{} at precision {}", s.value, fmt_q(&s.effective_precision)),
        ),
        expect("sharp_one", one.value == "1", one.value),
        check_multiplicativity(&h, 0, 3, 500, seed)?,
        check_lift_independence(&h, 0, 3, 100, seed)?,
    ];
    Ok(criterion(3, "monoidal map exactness", checks))
}

fn sharp_levels(h: &TowerHandle, name: &str, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for j in 0..h.depth() {
        let prefix = format!("{name}/j={j}");
        checks.push(relabel(check_sharp_phi(h, j, 1, samples, seed)?, &prefix));
        let iso = check_sharp1_iso(h, j, 1, 10, seed)?;
        checks.extend(iso.checks.into_iter().map(|c| relabel(c, &prefix)));
    }
    Ok(checks)
}

fn c4(seed: u64) -> Result<Criterion> {
    let mut checks = sharp_levels(&pure_tower(4)?, "pure", 50, seed)?;
    checks.extend(sharp_levels(&kummer_tower(2)?, "kummer", 20, seed)?);
    Ok(criterion(
        4,
        "reduction square and residue isomorphism",
        checks,
    ))
}

fn c5() -> Result<Criterion> {
    let mut checks = Vec::new();
    for (name, h) in [("pure", pure_tower(4)?), ("kummer", kummer_tower(2)?)] {
        for j in 0..h.depth() {
            let r = check_sharpf(&h, j, 1)?;
            let c = if r.valuation_sharp == r.valuation_f_j {
                r.check
            } else {
                Check {
                    verdict: Verdict::Fail,
                    ..r.check
                }
            };
            checks.push(relabel(
                c.note(format!("valuation {}", fmt_q(&r.valuation_sharp))),
                &format!("{name}/j={j}"),
            ));
        }
    }
    Ok(criterion(
        5,
        "valuation of the pillar under the monoidal map",
        checks,
    ))
}

fn c6() -> Result<Criterion> {
    let a = TowerSpec::pure(5, 6, 2)?;
    let mut checks = Vec::new();
    for (k, expected) in [(2usize, 4usize), (3, 8)] {
        let h = build_tower(&TowerSpec::product(vec![a.clone(); k])?)?;
        let r = idempotent_transfer(&h, 0, 1)?;
        checks.push(relabel(r.check, &format!("product{k}")));
        checks.push(expect(
            format!("product{k}/count"),
            r.matched == expected && r.method == "exhaustive",
            format!("{} matched by {} search", r.matched, r.method),
        ));
    }
    Ok(criterion(6, "idempotent bijection", checks))
}

fn c7() -> Result<Criterion> {
    let spec = KummerCoverSpec::new(5, 2, 6, 5)?;
    let table = delta_table(&spec)?;
    let mut checks = Vec::new();
    for row in &table.rows {
        let closed = kummer_delta(5, 2, row.n);
        checks.push(expect(
            format!("delta_{}", row.n),
            row.delta == closed && row.semigroup_exponent == row.elimination_exponent,
            format!(
                "{} (methods {} / {})",
                fmt_q(&row.delta),
                row.semigroup_exponent,
                row.elimination_exponent
            ),
        ));
    }
    checks.push(expect(
        "conductor",
        table.conductor == 4,
        table.conductor.to_string(),
    ));
    let constant = table.rows.iter().all(|r| r.p_n_delta == q(2, 5));
    checks.push(expect(
        "p_n_delta_constant",
        constant && table.p_n_delta_constant,
        "2/5",
    ));
    let w = find_epsilon_from_table(&spec, &table)?;
    checks.push(expect(
        "epsilon",
        w.epsilon == q(3, 25) && w.level == 2,
        format!("eps = {}, N = {}", fmt_q(&w.epsilon), w.level),
    ));
    checks.push(expect(
        "certificate",
        w.certificate_verified && verify_certificate(spec.prime, 2, 6, &w),
        format!("{} entries", w.certificate.len()),
    ));
    Ok(criterion(7, "Kummer constants", checks))
}

fn c8_9(seed: u64) -> Result<(Criterion, Criterion)> {
    let spec = KummerCoverSpec::new(5, 2, 6, 3)?;
    let w = crate::ramified::find_epsilon(Prime::new(5)?, 2, 8)?;
    let a = assemble_perfectoid(&spec, &w, 2, 200, seed)?;
    let mut checks: Vec<Check> = a
        .axioms
        .verdicts
        .iter()
        .cloned()
        .map(|c| relabel(c, "axioms"))
        .collect();
    checks.push(expect(
        "start_level",
        true,
        format!("N' = {}", a.start_level),
    ));
    let control = forced_ideal_control(&spec, &w, q(1, 2), 2, 50, seed)?;
    checks.push(expect(
        "forced_ideal_control",
        control.verdict("f-1") == Some(Verdict::Fail),
        "eps' = 1/2 fails f-1",
    ));
    let c8 = criterion(8, "assembled Kummer tower is perfectoid", checks);
    let normal = smalltilt_normality_report(&a.tower, 1000, seed)?;
    let checks = normal
        .levels
        .into_iter()
        .flat_map(|l| {
            let prefix = format!("j={}", l.level);
            l.checks.into_iter().map(move |c| relabel(c, &prefix))
        })
        .collect();
    Ok((c8, criterion(9, "small tilt normality", checks)))
}

/// A generated closure instance with its expected outcome.
pub struct ClosureCase {
    pub pair: RingPair,
    pub n: u64,
    pub ambient: Ambient,
    pub negative: bool,
}

/// Root closure instances over `p = 2, N = 2`: layers and small tilts in
/// their localizations, consecutive layers, identities and two crafted
/// non-root-closed subrings.
pub fn closure_cases() -> Result<Vec<ClosureCase>> {
    let h = build_tower(&TowerSpec::pure(2, 2, 2)?)?;
    let mut out = Vec::new();
    let loc = Ambient::Localized { c_cap: 2 };
    for lvl in 0..=2 {
        for n in [2, 3] {
            out.push(ClosureCase {
                pair: RingPair::layer(format!("R_{lvl}"), h.layer(lvl)?)?,
                n,
                ambient: loc,
                negative: false,
            });
        }
        out.push(ClosureCase {
            pair: RingPair::layer(format!("R_{lvl} itself"), h.layer(lvl)?)?,
            n: 2,
            ambient: Ambient::Explicit,
            negative: false,
        });
    }
    for j in 0..2 {
        let pres = small_tilt(&h, j, 1)?;
        let cj = h.quot(j)?.powers()[0];
        let f = pres.ring.t_pow(cj);
        for n in [2, 3] {
            out.push(ClosureCase {
                pair: RingPair::layer_with(format!("small tilt at level {j}"), &pres.ring, &f)?,
                n,
                ambient: loc,
                negative: false,
            });
        }
    }
    // t^2 = 2 and (2t)^3 = 0 lie in R_a while t and 2t do not
    for a in 0..2 {
        let mut pair = RingPair::transition(&h, a)?;
        pair.name = format!("R_{a} in R_{}", a + 1);
        for n in [2, 3] {
            out.push(ClosureCase {
                pair: pair.clone(),
                n,
                ambient: Ambient::Explicit,
                negative: true,
            });
        }
    }
    out.push(ClosureCase {
        pair: RingPair::non_root_closed_control(2, 2)?,
        n: 2,
        ambient: Ambient::Explicit,
        negative: true,
    });
    out.push(ClosureCase {
        pair: RingPair::non_normal_layer_control(2, 2)?,
        n: 2,
        ambient: Ambient::Explicit,
        negative: true,
    });
    Ok(out)
}

fn c10(seed: u64) -> Result<Criterion> {
    let mut checks = Vec::new();
    for (i, case) in closure_cases()?.into_iter().enumerate() {
        let exact = check_root_closed(&case.pair, case.n, Mode::Exact, case.ambient, seed)?;
        let sampled = check_root_closed(
            &case.pair,
            case.n,
            Mode::Sampled(1000),
            case.ambient,
            seed.wrapping_add(i as u64),
        )?;
        let agree = exact.verdict.is_fail() == sampled.verdict.is_fail();
        let detected = case.negative == exact.verdict.is_fail();
        checks.push(expect(
            format!("{}/n={}", case.pair.name, case.n),
            agree && detected,
            format!(
                "exact {:?}, sampled {:?}{}",
                exact.verdict,
                sampled.verdict,
                exact
                    .witness
                    .map(|w| format!(", witness {}", w.element))
                    .unwrap_or_default()
            ),
        ));
    }
    let collapse = is_cartesian_mod_f(&RingPair::collapse_control(2, 2)?)?;
    checks.push(expect(
        "cartesian collapse control",
        collapse.verdict.is_fail(),
        collapse.witness.map(|w| w.element).unwrap_or_default(),
    ));
    Ok(criterion(10, "closure checkers agree", checks))
}

fn c11(seed: u64) -> Result<Criterion> {
    let run = || -> Result<String> {
        let h = pure_tower(3)?;
        let a = check_multiplicativity(&h, 0, 2, 50, seed)?;
        let b = check_axioms(&h, 50, seed)?;
        Ok(serde_json::to_string(&(a, b)).expect("serializable"))
    };
    let same = run()? == run()?;
    Ok(criterion(
        11,
        "determinism",
        vec![expect("repeat_in_process", same, "identical JSON")],
    ))
}

/// Every criterion in order. Pure in `seed`.
pub fn run_suite(seed: u64) -> Result<SuiteReport> {
    let (c8, c9) = c8_9(seed)?;
    let criteria = vec![
        c1(seed)?,
        c2()?,
        c3(seed)?,
        c4(seed)?,
        c5()?,
        c6()?,
        c7()?,
        c8,
        c9,
        c10(seed)?,
        c11(seed)?,
    ];
    Ok(SuiteReport {
        schema: 1,
        seed,
        criteria,
    })
}

/// Exact rational `(m-1)(p-1)/(m p^{n+1})`.
pub fn kummer_delta(p: u64, m: u64, n: u32) -> Q {
    q(((m - 1) * (p - 1)) as i64, (m * p.pow(n + 1)) as i64)
}
