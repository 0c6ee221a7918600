//! Small tilts at finite depth.
//!
//! The depth-m small tilt at level j is the limit of
//! `Q_j <- Q_{j+1} <- ... <- Q_{j+m}` along Frobenius projections. An
//! element is stored by its deepest component. As a ring it is presented as
//! `F_p[T]/(T^K)` with `K = c_{j+m}`, `T` the deepest uniformizer, and `T`
//! of valuation `1/e_j` (so `p^flat = T^{e_j}`). Variable exponents keep the
//! numerators of level j+m over the denominator of level j.

use crate::arith::q;
use crate::error::{Error, Result};
use crate::layer::{LayerElem, LayerRing};
use crate::quotient::{QuotElem, QuotSpace};
use crate::report::{Check, Verdict, Witness};
use crate::syntax::{parse, term_monomials, Atom};
use crate::tower::TowerHandle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct TiltPresentation {
    pub layer: u32,
    pub depth: u32,
    /// K with the presentation `F_p[T]/(T^K)` on every component.
    pub quotient_exponent: Vec<u64>,
    /// `T` is the compatible system of the uniformizers of these levels.
    pub generator_map: Vec<String>,
    /// Valuation of `T` is `1/uniformizer_denominator`.
    pub uniformizer_denominator: u64,
    pub var_denominator: u64,
    #[serde(skip)]
    pub ring: LayerRing,
    #[serde(skip)]
    pub deepest: QuotSpace,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallTiltElem {
    pub layer: u32,
    pub depth: u32,
    pub deepest: QuotElem,
}

fn check_range(h: &TowerHandle, j: u32, m: u32) -> Result<()> {
    if j + m > h.depth() {
        return Err(Error::LevelOutOfRange {
            level: j + m,
            depth: h.depth(),
        });
    }
    Ok(())
}

/// The depth-m small tilt at level j.
pub fn small_tilt(h: &TowerHandle, j: u32, m: u32) -> Result<TiltPresentation> {
    check_range(h, j, m)?;
    let deepest = h.quot(j + m)?.clone();
    let shifted = h.positive_characteristic(m)?;
    let ring = shifted.layer(j)?.clone();
    let generator_map = (0..=m)
        .map(|i| {
            format!(
                "level {}: uniformizer t^{{1/{}}} mod I_0",
                j + i,
                h.shape().e(j + i)
            )
        })
        .collect();
    Ok(TiltPresentation {
        layer: j,
        depth: m,
        quotient_exponent: deepest.powers().to_vec(),
        generator_map,
        uniformizer_denominator: ring.e(),
        var_denominator: ring.var_denominator(),
        ring,
        deepest,
    })
}

impl TiltPresentation {
    pub fn element(&self, deepest: QuotElem) -> Result<SmallTiltElem> {
        if deepest.space() != &self.deepest {
            return Err(Error::RingMismatch);
        }
        Ok(SmallTiltElem {
            layer: self.layer,
            depth: self.depth,
            deepest,
        })
    }

    /// Image in the presentation ring `F_p[T]/(T^K)`.
    pub fn to_presentation(&self, x: &SmallTiltElem) -> LayerElem {
        self.ring.from_terms(x.deepest.terms())
    }

    pub fn from_presentation(&self, y: &LayerElem) -> Result<SmallTiltElem> {
        if y.ring() != &self.ring {
            return Err(Error::RingMismatch);
        }
        let mut coeffs = vec![0u64; self.deepest.dim()];
        for (m, c) in y.terms() {
            self.deepest.push_monomial(&mut coeffs, m, *c);
        }
        self.element(self.deepest.from_coeffs(coeffs))
    }

    pub fn one(&self) -> SmallTiltElem {
        self.element(self.deepest.one()).expect("same space")
    }

    pub fn zero(&self) -> SmallTiltElem {
        self.element(self.deepest.zero()).expect("same space")
    }

    pub fn mul(&self, x: &SmallTiltElem, y: &SmallTiltElem) -> Result<SmallTiltElem> {
        self.element(x.deepest.mul(&y.deepest)?)
    }

    pub fn add(&self, x: &SmallTiltElem, y: &SmallTiltElem) -> Result<SmallTiltElem> {
        self.element(x.deepest.add(&y.deepest)?)
    }

    /// `T^k`.
    pub fn generator_pow(&self, k: u64) -> SmallTiltElem {
        self.from_presentation(&self.ring.t_pow(k))
            .expect("same ring")
    }

    /// Canonical text in the presentation.
    pub fn text(&self, x: &SmallTiltElem) -> String {
        self.to_presentation(x).to_string()
    }

    /// Parse `pflat`, `fflat`, `T^k`, `t^{q}` (valuation q) and variables.
    pub fn parse(&self, h: &TowerHandle, src: &str) -> Result<SmallTiltElem> {
        let e = self.ring.e();
        let c0 = h.shape().c(0);
        let p = h.prime().get();
        let mut out = Vec::new();
        for term in parse(src)? {
            let c = (term.coeff.rem_euclid(p as i64)) as u64;
            let monos = term_monomials(&self.ring, &term.factors, &mut |atom, x| {
                let base = match atom {
                    Atom::Gen => 1,
                    Atom::PFlat => e,
                    Atom::FFlat => c0,
                    _ => unreachable!("handled by term_monomials"),
                };
                let v = x * q(base as i64, 1);
                if !v.is_integer() || v < q(0, 1) {
                    return Err(Error::Parse {
                        pos: 0,
                        msg: format!("exponent of {atom:?} must give an integral power of T"),
                    });
                }
                Ok(v.to_integer() as u64)
            })?;
            out.extend(monos.into_iter().map(|m| (m, c)));
        }
        self.from_presentation(&self.ring.from_terms(out))
    }
}

/// `(x_0, ..., x_m)` with `x_i` in `Q_{j+i}`, recovered by Frobenius projections.
pub fn components(h: &TowerHandle, x: &SmallTiltElem) -> Result<Vec<QuotElem>> {
    let mut comps = vec![x.deepest.clone()];
    for i in (0..x.depth).rev() {
        let next = h.frob_projection(x.layer + i, comps.last().expect("nonempty"))?;
        comps.push(next);
    }
    comps.reverse();
    Ok(comps)
}

/// `p^flat = (p, p^{1/p}, ..., p^{1/p^m})` above level j; `T^{e_j}` in the presentation.
pub fn p_flat(h: &TowerHandle, j: u32, m: u32) -> Result<SmallTiltElem> {
    let pres = small_tilt(h, j, m)?;
    Ok(pres.generator_pow(h.shape().e(j)))
}

/// The pillar generator `f_j^flat`, of valuation `eps/p^j`: `T^{c_0}`.
pub fn f_flat_generator(h: &TowerHandle, j: u32, m: u32) -> Result<SmallTiltElem> {
    let pres = small_tilt(h, j, m)?;
    let c0 = h.shape().c(0);
    let terms: Vec<_> = (0..h.shape().components())
        .map(|i| (crate::layer::Monomial::new(i, c0), 1))
        .collect();
    pres.from_presentation(&pres.ring.from_terms(terms))
}

/// Transition of small tilts from level j to j+1 at equal depth.
pub fn tilt_transition(h: &TowerHandle, x: &SmallTiltElem) -> Result<SmallTiltElem> {
    check_range(h, x.layer + 1, x.depth)?;
    Ok(SmallTiltElem {
        layer: x.layer + 1,
        depth: x.depth,
        deepest: h.quot_transition(x.layer + x.depth, &x.deepest)?,
    })
}

/// The tilted tower truncated m Frobenius steps deep.
pub fn tilt_tower(h: &TowerHandle, m: u32) -> Result<TowerHandle> {
    if h.depth() < m + 2 {
        return Err(Error::InsufficientDepth(format!(
            "tilting {m} steps deep leaves depth {} < 2",
            h.depth() as i64 - m as i64
        )));
    }
    h.positive_characteristic(m)?.with_depth(h.depth() - m)
}

fn random_elem(rng: &mut ChaCha8Rng, pres: &TiltPresentation) -> SmallTiltElem {
    let p = pres.deepest.fp().p;
    let coeffs = (0..pres.deepest.dim())
        .map(|_| rng.gen_range(0..p))
        .collect();
    pres.element(pres.deepest.from_coeffs(coeffs))
        .expect("same space")
}

/// Structural checks of one small tilt: basis bijection and
/// multiplicativity of the presentation, Frobenius compatibility of
/// recovered components, and `ker(Phi_0) = (T^{c_j})`.
pub fn check_presentation(
    h: &TowerHandle,
    j: u32,
    m: u32,
    pairs: usize,
    seed: u64,
) -> Result<Vec<Check>> {
    let pres = small_tilt(h, j, m)?;
    let mut checks = Vec::new();

    let ring = &pres.ring;
    let sp = &pres.deepest;
    let mut bij = None;
    let monos_in_ring: usize = (0..ring.rank())
        .filter(|&i| sp.index_of(&ring.monomial_at(i)).is_some())
        .count();
    if monos_in_ring != sp.dim() || ring.rank() != sp.dim() {
        bij = Some(Witness::new(
            j,
            format!("rank {} vs dimension {}", ring.rank(), sp.dim()),
            "presentation basis mismatch",
        ));
    }
    for i in 0..sp.dim() {
        let x = pres.element(sp.basis(i))?;
        if pres.from_presentation(&pres.to_presentation(&x))? != x {
            bij = Some(Witness::new(j, pres.text(&x), "presentation round trip"));
            break;
        }
    }
    checks.push(match bij {
        Some(w) => Check::fail("presentation_bijective", w),
        None => Check::new("presentation_bijective", Verdict::Pass),
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7117);
    let mut mult = None;
    for _ in 0..pairs {
        let x = random_elem(&mut rng, &pres);
        let y = random_elem(&mut rng, &pres);
        let lhs = pres.to_presentation(&pres.mul(&x, &y)?);
        let rhs = pres.to_presentation(&x).mul(&pres.to_presentation(&y))?;
        if lhs != rhs {
            mult = Some(Witness::new(
                j,
                format!("({}) * ({})", pres.text(&x), pres.text(&y)),
                "presentation is not multiplicative",
            ));
            break;
        }
    }
    checks.push(match mult {
        Some(w) => Check::fail("presentation_multiplicative", w),
        None => Check::new("presentation_multiplicative", Verdict::Pass).with_samples(pairs),
    });

    let mut compat = None;
    for _ in 0..pairs.min(50) {
        let x = random_elem(&mut rng, &pres);
        let comps = components(h, &x)?;
        for i in 0..m {
            let lhs = h.frob_projection(j + i, &comps[(i + 1) as usize])?;
            let power = h.quot_transition(j + i, &comps[i as usize])?;
            if lhs != comps[i as usize] || power != comps[(i + 1) as usize].pow(h.prime().get()) {
                compat = Some(Witness::new(
                    j + i,
                    pres.text(&x),
                    "component sequence is not Frobenius compatible",
                ));
            }
        }
    }
    checks.push(match compat {
        Some(w) => Check::fail("frobenius_compatible", w),
        None => Check::new("frobenius_compatible", Verdict::Pass),
    });

    // kernel of the projection to Q_j against (T^{c_j})
    let mut kernel_ok = None;
    for i in 0..sp.dim() {
        let x = pres.element(sp.basis(i))?;
        let mono = sp.monomial_at(i);
        let in_ideal = mono.t >= h.quot(j)?.powers()[mono.comp as usize];
        let projected = h.frob_projection_k(j, m, &x.deepest)?;
        if projected.is_zero() != in_ideal && h.shape().num_vars == 0 {
            kernel_ok = Some(Witness::new(
                j,
                pres.text(&x),
                "kernel of the projection to Q_j differs from (T^{c_j})",
            ));
            break;
        }
    }
    checks.push(match kernel_ok {
        Some(w) => Check::fail("ideal_is_projection_kernel", w),
        None => Check::new("ideal_is_projection_kernel", Verdict::Pass),
    });
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::check_axioms;
    use crate::tower::{build_tower, TowerSpec};

    fn pure(depth: u32) -> TowerHandle {
        build_tower(&TowerSpec::pure(5, 6, depth).unwrap()).unwrap()
    }

    #[test]
    fn pure_tilt_shape() {
        let h = pure(3);
        let pres = small_tilt(&h, 0, 3).unwrap();
        assert_eq!(pres.quotient_exponent, vec![125]);
        assert_eq!(pres.text(&p_flat(&h, 0, 3).unwrap()), "T");
        let pres = small_tilt(&h, 0, 2).unwrap();
        assert_eq!(pres.quotient_exponent, vec![25]);
        let pres = small_tilt(&h, 1, 1).unwrap();
        assert_eq!(pres.quotient_exponent, vec![25]);
        assert_eq!(pres.text(&p_flat(&h, 1, 1).unwrap()), "T^5");
        assert_eq!(pres.text(&f_flat_generator(&h, 1, 1).unwrap()), "T");
    }

    #[test]
    fn zero_depth_is_the_bare_quotient() {
        let h = pure(2);
        let pres = small_tilt(&h, 1, 0).unwrap();
        assert_eq!(pres.deepest, *h.quot(1).unwrap());
        assert_eq!(pres.quotient_exponent, vec![5]);
    }

    #[test]
    fn components_are_p_power_roots() {
        let h = pure(3);
        let x = p_flat(&h, 0, 2).unwrap();
        let comps = components(&h, &x).unwrap();
        // p = 0 at level 0 mod I_0, then p^{1/5} = t^{1/5}, p^{1/25}
        assert_eq!(comps[0].to_string(), "0");
        assert_eq!(comps[1].to_string(), "t^{1/5}");
        assert_eq!(comps[2].to_string(), "t^{1/25}");
    }

    #[test]
    fn tilt_transition_raises_generator() {
        let h = pure(3);
        let x = p_flat(&h, 0, 1).unwrap();
        let y = tilt_transition(&h, &x).unwrap();
        let pres1 = small_tilt(&h, 1, 1).unwrap();
        assert_eq!(pres1.text(&y), "T^5");
        assert_eq!(y, p_flat(&h, 1, 1).unwrap());
    }

    #[test]
    fn parse_tilt_elements() {
        let h = pure(3);
        let pres = small_tilt(&h, 1, 2).unwrap();
        let x = pres.parse(&h, "pflat + 2*fflat^3 + T^7").unwrap();
        assert_eq!(pres.text(&x), "2*T^3 + T^5 + T^7");
        assert!(pres.parse(&h, "t^{1/7}").is_err());
    }

    #[test]
    fn structural_checks_pass() {
        let h = pure(3);
        for (j, m) in [(0, 3), (1, 2), (0, 1)] {
            for c in check_presentation(&h, j, m, 50, 3).unwrap() {
                assert_eq!(c.verdict, Verdict::Pass, "{j} {m} {:?}", c);
            }
        }
    }

    #[test]
    fn tilted_tower_is_perfectoid() {
        let h = pure(4);
        let t = tilt_tower(&h, 1).unwrap();
        let a = check_axioms(&h.with_depth(3).unwrap(), 20, 1).unwrap();
        let b = check_axioms(&t, 20, 1).unwrap();
        assert_eq!(a.profile(), b.profile());
        assert!(tilt_tower(&h, 3).is_err());
    }

    #[test]
    fn tilt_of_tilt_is_the_same_presentation() {
        let h = pure(4);
        let t1 = tilt_tower(&h, 1).unwrap();
        let tt = tilt_tower(&t1, 1).unwrap();
        let t = tilt_tower(&h, 1).unwrap();
        for j in 0..=tt.depth() {
            assert_eq!(tt.layer(j).unwrap().params(), t.layer(j).unwrap().params());
        }
    }

    #[test]
    fn tilt_of_product_is_product_of_tilts() {
        let a = TowerSpec::pure(5, 6, 3).unwrap();
        let h = build_tower(&TowerSpec::product(vec![a.clone(), a.clone()]).unwrap()).unwrap();
        let single = tilt_tower(&build_tower(&a).unwrap(), 1).unwrap();
        let t = tilt_tower(&h, 1).unwrap();
        for j in 0..=t.depth() {
            let lp = t.layer(j).unwrap();
            let ls = single.layer(j).unwrap();
            assert_eq!(lp.components(), 2);
            assert_eq!(lp.rank(), 2 * ls.rank());
        }
    }
}
