//! f-power torsion of a layer ring, separated from truncation artifacts.
//!
//! In `Z/p^N` every element of valuation at least `N - v(f)` is killed by f
//! just because digits run out. Such kernel elements are reported as
//! artifacts; only the remainder counts as genuine torsion.

use crate::arith::{Valuation, Q};
use crate::error::{Error, Result};
use crate::layer::{LayerElem, LayerRing};
use crate::linalg::{Smith, SparseMat};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct TorsionReport {
    /// Generators of the genuine torsion, in canonical text.
    pub genuine: Vec<String>,
    /// Rank of the raw kernel of multiplication by `f^power_used`.
    pub raw_kernel_generators: usize,
    pub power_used: u64,
    /// The raw kernel was nonzero but consisted of truncation artifacts only.
    pub precision_artifact: bool,
    #[serde(skip)]
    pub genuine_elems: Vec<LayerElem>,
}

impl TorsionReport {
    pub fn is_torsion_free(&self) -> bool {
        self.genuine_elems.is_empty()
    }
}

/// Matrix of multiplication by `g` in the monomial basis.
pub fn mult_matrix(ring: &LayerRing, g: &LayerElem) -> Result<SparseMat> {
    let mut mat = SparseMat::new(ring.rank());
    for i in 0..ring.rank() {
        let b = ring.from_terms([(ring.monomial_at(i), 1)]);
        let col = g.mul(&b)?;
        mat.push_col(
            col.terms()
                .iter()
                .map(|(m, c)| (ring.index_of(m).expect("canonical"), *c))
                .collect(),
        );
    }
    Ok(mat)
}

pub fn torsion_submodule(ring: &LayerRing, f: &LayerElem) -> Result<TorsionReport> {
    if f.ring() != ring {
        return Err(Error::RingMismatch);
    }
    let precision = ring.precision();
    let weights: Vec<Option<Q>> = (0..ring.components())
        .map(|c| f.component(c).valuation().finite())
        .collect();
    let w_min = weights
        .iter()
        .flatten()
        .filter(|w| **w > Q::from_integer(0))
        .min()
        .copied();
    let power = match w_min {
        Some(w) => {
            let k = (precision / w).ceil().to_integer() - 1;
            k.max(1) as u64
        }
        None => 1,
    };
    let g = f.pow(power);
    let mat = mult_matrix(ring, &g)?;
    let smith = Smith::compute(&mat, ring.modulus());
    let kernel = smith.kernel_sparse();
    let pw = Q::from_integer(power as i64);
    let mut genuine_elems: Vec<LayerElem> = Vec::new();
    for gen in &kernel {
        let x = ring.from_terms(gen.iter().map(|(i, c)| (ring.monomial_at(*i), *c)));
        let mut part = ring.zero();
        for (c, w) in weights.iter().enumerate() {
            let xc = x.component(c);
            let keep = match (xc.valuation(), w) {
                (Valuation::AbovePrecision, _) => false,
                (_, None) => true,
                (Valuation::Finite(v), Some(w)) => v + pw * *w < precision,
            };
            if keep {
                part = part.add(&xc)?;
            }
        }
        if !part.is_zero() && !genuine_elems.contains(&part) {
            genuine_elems.push(part);
        }
    }
    Ok(TorsionReport {
        genuine: genuine_elems.iter().map(|x| x.to_string()).collect(),
        raw_kernel_generators: kernel.len(),
        power_used: power,
        precision_artifact: !kernel.is_empty() && genuine_elems.is_empty(),
        genuine_elems,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, ExpLattice, Prime};
    use crate::layer::{layer_make, Characteristic, LayerParams, Monomial};

    fn p5() -> Prime {
        Prime::new(5).unwrap()
    }

    #[test]
    fn uniformizer_layer_is_torsion_free() {
        let r = layer_make(p5(), 6, 5, 0, q(1, 5)).unwrap();
        let rep = torsion_submodule(&r, &r.t_pow(1)).unwrap();
        assert!(rep.is_torsion_free());
        assert!(rep.precision_artifact);
    }

    #[test]
    fn p_in_zp_is_an_artifact() {
        let r = layer_make(p5(), 6, 1, 0, q(1, 1)).unwrap();
        let rep = torsion_submodule(&r, &r.constant(5)).unwrap();
        assert!(rep.is_torsion_free());
        assert!(rep.precision_artifact);
        assert_eq!(rep.power_used, 5);
    }

    #[test]
    fn killed_factor_is_genuine() {
        let params = LayerParams::standard(
            p5(),
            6,
            Characteristic::Mixed,
            1,
            2,
            0,
            ExpLattice { denominator: 1 },
            q(0, 1),
            q(1, 1),
        )
        .unwrap();
        let r = LayerRing::new(params).unwrap();
        let f = r.from_terms([(Monomial::new(0, 0), 5)]);
        let rep = torsion_submodule(&r, &f).unwrap();
        assert_eq!(rep.genuine, vec!["e2".to_string()]);
        assert!(!rep.precision_artifact);
    }
}
