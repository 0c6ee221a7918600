//! Towers of layer rings `R_0 -> R_1 -> ... -> R_depth` with their reductions
//! modulo `I_0` and the Frobenius projections between those reductions.

use crate::arith::{fmt_q, parse_q, q, ser_q, ExpLattice, PrecisionBudget, Prime, Q};
use crate::error::{Error, Result};
use crate::layer::{Characteristic, LayerElem, LayerParams, LayerRing, Monomial};
use crate::quotient::{QuotElem, QuotSpace};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub enum TowerKind {
    /// `Z_p[p^{1/p^n}]`, possibly with auxiliary variables.
    Pure,
    /// `Z_p[p^{1/(m p^n)}]` with `gcd(m, p) = 1`.
    Kummer { m: u64 },
    /// Product of towers of identical shape.
    Product(Vec<TowerSpec>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TowerSpec {
    pub prime: Prime,
    pub precision: PrecisionBudget,
    pub kind: TowerKind,
    pub num_vars: usize,
    pub ideal_exp: Q,
    pub start_level: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum NumOrText {
    Num(u64),
    Text(String),
}

impl NumOrText {
    fn to_q(&self) -> Result<Q> {
        match self {
            NumOrText::Num(n) => Ok(Q::from_integer(*n as i64)),
            NumOrText::Text(s) => parse_q(s),
        }
    }
}

/// On-disk JSON form of a tower spec.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub prime: u64,
    pub n_digits: u32,
    pub depth: u32,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(default)]
    pub num_vars: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    var_degree_cap: Option<NumOrText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ideal_exp: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<SpecFile>>,
}

impl TowerSpec {
    pub fn pure(p: u64, n_digits: u32, depth: u32) -> Result<Self> {
        Ok(TowerSpec {
            prime: Prime::new(p)?,
            precision: PrecisionBudget::new(n_digits, depth, q(0, 1))?,
            kind: TowerKind::Pure,
            num_vars: 0,
            ideal_exp: q(1, 1),
            start_level: 0,
        })
    }

    pub fn pure_with_vars(
        p: u64,
        n_digits: u32,
        depth: u32,
        num_vars: usize,
        cap: Q,
    ) -> Result<Self> {
        let mut s = Self::pure(p, n_digits, depth)?;
        s.num_vars = num_vars;
        s.precision.var_degree_cap = cap;
        Ok(s)
    }

    pub fn kummer(
        p: u64,
        m: u64,
        n_digits: u32,
        depth: u32,
        ideal_exp: Q,
        start_level: u32,
    ) -> Result<Self> {
        Ok(TowerSpec {
            prime: Prime::new(p)?,
            precision: PrecisionBudget::new(n_digits, depth, q(0, 1))?,
            kind: TowerKind::Kummer { m },
            num_vars: 0,
            ideal_exp,
            start_level,
        })
    }

    pub fn product(factors: Vec<TowerSpec>) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| Error::Spec("a product needs at least one factor".into()))?
            .clone();
        Ok(TowerSpec {
            kind: TowerKind::Product(factors),
            ..first
        })
    }

    pub fn depth(&self) -> u32 {
        self.precision.depth
    }

    pub fn with_depth(mut self, depth: u32) -> Self {
        self.precision.depth = depth;
        if let TowerKind::Product(fs) = &mut self.kind {
            for f in fs.iter_mut() {
                f.precision.depth = depth;
            }
        }
        self
    }

    pub fn with_digits(mut self, n: u32) -> Self {
        self.precision.n_digits = n;
        if let TowerKind::Product(fs) = &mut self.kind {
            for f in fs.iter_mut() {
                f.precision.n_digits = n;
            }
        }
        self
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let file: SpecFile = serde_json::from_str(src).map_err(|e| Error::Spec(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn from_file(f: &SpecFile) -> Result<Self> {
        let prime = Prime::new(f.prime)?;
        let cap = match &f.var_degree_cap {
            Some(c) => c.to_q()?,
            None => q(if f.num_vars > 0 { 1 } else { 0 }, 1),
        };
        let precision = PrecisionBudget::new(f.n_digits, f.depth, cap)?;
        let ideal = f.ideal_exp.as_deref().map(parse_q).transpose()?;
        let (kind, ideal_exp, start) = match f.kind.as_str() {
            "pure" => (
                TowerKind::Pure,
                ideal.unwrap_or(q(1, 1)),
                f.start_level.unwrap_or(0),
            ),
            "kummer" => {
                let m =
                    f.m.ok_or_else(|| Error::Spec("kummer towers need m".into()))?;
                match ideal {
                    Some(eps) => (TowerKind::Kummer { m }, eps, f.start_level.unwrap_or(0)),
                    None => {
                        let w = crate::ramified::find_epsilon(prime, m, 16)?;
                        (
                            TowerKind::Kummer { m },
                            w.epsilon,
                            f.start_level.unwrap_or(w.level),
                        )
                    }
                }
            }
            "product" => {
                let fs = f
                    .factors
                    .as_ref()
                    .ok_or_else(|| Error::Spec("product towers need factors".into()))?;
                let factors = fs.iter().map(Self::from_file).collect::<Result<Vec<_>>>()?;
                return Self::product(factors);
            }
            other => return Err(Error::Spec(format!("unknown kind {other:?}"))),
        };
        Ok(TowerSpec {
            prime,
            precision,
            kind,
            num_vars: f.num_vars,
            ideal_exp,
            start_level: start,
        })
    }

    pub fn to_file(&self) -> SpecFile {
        let (kind, m, factors) = match &self.kind {
            TowerKind::Pure => ("pure", None, None),
            TowerKind::Kummer { m } => ("kummer", Some(*m), None),
            TowerKind::Product(fs) => (
                "product",
                None,
                Some(fs.iter().map(|f| f.to_file()).collect()),
            ),
        };
        SpecFile {
            prime: self.prime.get(),
            n_digits: self.precision.n_digits,
            depth: self.precision.depth,
            kind: kind.into(),
            m,
            num_vars: self.num_vars,
            var_degree_cap: Some(NumOrText::Text(fmt_q(&self.precision.var_degree_cap))),
            ideal_exp: Some(fmt_q(&self.ideal_exp)),
            start_level: Some(self.start_level),
            factors,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TowerChar {
    Mixed,
    /// Tilted tower truncated `shift` Frobenius steps deep: level n is `F_p[T]/(T^{c_n p^shift})`.
    Positive {
        shift: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TowerShape {
    pub prime: Prime,
    pub n_digits: u32,
    pub depth: u32,
    pub base_e: u64,
    pub base_ideal: Vec<Option<u64>>,
    #[serde(serialize_with = "ser_q")]
    pub ideal_exp: Q,
    pub start_level: u32,
    pub num_vars: usize,
    #[serde(serialize_with = "ser_q")]
    pub var_degree_cap: Q,
    pub characteristic: TowerChar,
    pub transition_exp: u64,
    /// Level-n ideal generators are `t^{c g^n}` for this growth factor g.
    pub ideal_growth: u64,
    pub pillar: Vec<Option<u64>>,
}

impl TowerShape {
    pub fn components(&self) -> usize {
        self.base_ideal.len()
    }

    pub fn p(&self) -> u64 {
        self.prime.get()
    }

    pub fn e(&self, n: u32) -> u64 {
        self.base_e * self.p().pow(n)
    }

    /// Standard ideal exponent `c_n = eps * e_n`.
    pub fn c(&self, n: u32) -> u64 {
        let c0 = (self.ideal_exp * Q::from_integer(self.base_e as i64)).to_integer() as u64;
        c0 * self.p().pow(n)
    }

    pub fn layer_params(&self, n: u32) -> LayerParams {
        let p = self.p();
        let gn = self.ideal_growth.pow(n);
        let (characteristic, cap) = match self.characteristic {
            TowerChar::Mixed => (Characteristic::Mixed, self.var_degree_cap),
            TowerChar::Positive { shift } => (
                Characteristic::Positive {
                    top: self.c(n) * p.pow(shift),
                },
                self.var_degree_cap * Q::from_integer(p.pow(shift) as i64),
            ),
        };
        LayerParams {
            prime: self.prime,
            n_digits: match self.characteristic {
                TowerChar::Mixed => self.n_digits,
                TowerChar::Positive { .. } => 1,
            },
            characteristic,
            eisen_exp: self.e(n),
            components: self.components(),
            num_vars: self.num_vars,
            var_lattice: ExpLattice {
                denominator: p.pow(self.start_level + n),
            },
            var_degree_cap: cap,
            ideal_exp: self.ideal_exp,
            ideal_powers: self.base_ideal.iter().map(|c| c.map(|c| c * gn)).collect(),
        }
    }

    fn standard(&self) -> bool {
        let c0 = self.c(0);
        self.transition_exp == self.p()
            && self.ideal_growth == self.p()
            && self.base_ideal.iter().all(|c| *c == Some(c0))
            && self.pillar.iter().all(|c| *c == Some(c0))
            && self.ideal_exp > q(0, 1)
            && self.ideal_exp <= q(1, 1)
    }
}

#[derive(Clone, Debug)]
pub struct TowerHandle {
    spec: TowerSpec,
    shape: TowerShape,
    layers: Vec<LayerRing>,
    quots: Vec<Option<QuotSpace>>,
}

pub fn build_tower(spec: &TowerSpec) -> Result<TowerHandle> {
    let p = spec.prime;
    if spec.depth() == 0 {
        return Err(Error::Spec("depth must be at least 1".into()));
    }
    let (base_e, components) = match &spec.kind {
        TowerKind::Pure => {
            if spec.ideal_exp != q(1, 1) {
                return Err(Error::Spec("pure towers use ideal exponent 1".into()));
            }
            (p.pow(spec.start_level), 1)
        }
        TowerKind::Kummer { m } => {
            if *m < 2 || m % p.get() == 0 {
                return Err(Error::Spec(format!(
                    "m = {m} must be at least 2 and prime to p"
                )));
            }
            (m * p.pow(spec.start_level), 1)
        }
        TowerKind::Product(factors) => {
            let mut shapes = Vec::new();
            for f in factors {
                if matches!(f.kind, TowerKind::Product(_)) {
                    return Err(Error::Spec("nested products are not supported".into()));
                }
                shapes.push(build_tower(f)?.shape);
            }
            let first = shapes[0].clone();
            if shapes.iter().any(|s| *s != first) {
                return Err(Error::Spec(
                    "product factors must have identical shapes".into(),
                ));
            }
            let n = shapes.len();
            let shape = TowerShape {
                base_ideal: vec![first.base_ideal[0]; n],
                pillar: vec![first.pillar[0]; n],
                ..first
            };
            return TowerHandle::from_shape(spec.clone(), shape, true);
        }
    };
    let c0 = crate::layer::ideal_power(spec.ideal_exp, base_e)?;
    let shape = TowerShape {
        prime: p,
        n_digits: spec.precision.n_digits,
        depth: spec.depth(),
        base_e,
        base_ideal: vec![Some(c0); components],
        ideal_exp: spec.ideal_exp,
        start_level: spec.start_level,
        num_vars: spec.num_vars,
        var_degree_cap: spec.precision.var_degree_cap,
        characteristic: TowerChar::Mixed,
        transition_exp: p.get(),
        ideal_growth: p.get(),
        pillar: vec![Some(c0); components],
    };
    TowerHandle::from_shape(spec.clone(), shape, true)
}

impl TowerHandle {
    pub fn from_shape(spec: TowerSpec, shape: TowerShape, checked: bool) -> Result<Self> {
        let mut layers = Vec::new();
        let mut quots = Vec::new();
        for n in 0..=shape.depth {
            let params = shape.layer_params(n);
            let ring = if checked && shape.standard() {
                LayerRing::new(params)?
            } else {
                LayerRing::new_unchecked(params)?
            };
            quots.push(QuotSpace::new(&ring).ok());
            layers.push(ring);
        }
        Ok(TowerHandle {
            spec,
            shape,
            layers,
            quots,
        })
    }

    fn rebuild(&self, shape: TowerShape) -> Result<Self> {
        Self::from_shape(self.spec.clone(), shape, false)
    }

    /// Same tower with the transition `t_n -> t_{n+1}^r` instead of `r = p`.
    pub fn with_transition_exponent(&self, r: u64) -> Result<Self> {
        self.rebuild(TowerShape {
            transition_exp: r,
            ..self.shape.clone()
        })
    }

    /// Same tower with level-n ideal generators `t^{c g^n}`.
    pub fn with_ideal_growth(&self, g: u64) -> Result<Self> {
        self.rebuild(TowerShape {
            ideal_growth: g,
            ..self.shape.clone()
        })
    }

    /// Same tower with `f_1 = t_1^c` in every component.
    pub fn with_pillar_exponent(&self, c: u64) -> Result<Self> {
        self.rebuild(TowerShape {
            pillar: vec![Some(c); self.shape.components()],
            ..self.shape.clone()
        })
    }

    /// Same tower with per-component ideal generators `t_0^c` (None: zero).
    pub fn with_component_ideals(&self, ideals: Vec<Option<u64>>) -> Result<Self> {
        if ideals.len() != self.shape.components() {
            return Err(Error::Invalid("one ideal per component".into()));
        }
        self.rebuild(TowerShape {
            base_ideal: ideals,
            ..self.shape.clone()
        })
    }

    /// Same tower with an ideal exponent that is not validated (may exceed 1).
    pub fn with_ideal_exp_unchecked(&self, eps: Q) -> Result<Self> {
        let c = eps * Q::from_integer(self.shape.base_e as i64);
        if !c.is_integer() || c < q(0, 1) {
            return Err(Error::NonIntegralIdeal {
                exp: fmt_q(&eps),
                e: self.shape.base_e,
            });
        }
        let c = Some(c.to_integer() as u64);
        let n = self.shape.components();
        self.rebuild(TowerShape {
            ideal_exp: eps,
            base_ideal: vec![c; n],
            pillar: vec![c; n],
            ..self.shape.clone()
        })
    }

    /// Positive-characteristic companion tower, truncated `shift` steps deep.
    pub fn positive_characteristic(&self, shift: u32) -> Result<Self> {
        let characteristic = match self.shape.characteristic {
            TowerChar::Mixed => TowerChar::Positive { shift },
            TowerChar::Positive { .. } => TowerChar::Positive { shift },
        };
        Self::from_shape(
            self.spec.clone(),
            TowerShape {
                characteristic,
                depth: self.shape.depth,
                ..self.shape.clone()
            },
            true,
        )
    }

    pub fn with_depth(&self, depth: u32) -> Result<Self> {
        Self::from_shape(
            self.spec.clone().with_depth(depth),
            TowerShape {
                depth,
                ..self.shape.clone()
            },
            self.shape.standard(),
        )
    }

    pub fn spec(&self) -> &TowerSpec {
        &self.spec
    }
    pub fn shape(&self) -> &TowerShape {
        &self.shape
    }
    pub fn depth(&self) -> u32 {
        self.shape.depth
    }
    pub fn prime(&self) -> Prime {
        self.shape.prime
    }
    pub fn is_mixed(&self) -> bool {
        self.shape.characteristic == TowerChar::Mixed
    }
    pub fn is_standard(&self) -> bool {
        self.shape.standard()
    }

    fn check_level(&self, n: u32) -> Result<()> {
        if n > self.depth() {
            Err(Error::LevelOutOfRange {
                level: n,
                depth: self.depth(),
            })
        } else {
            Ok(())
        }
    }

    pub fn layer(&self, n: u32) -> Result<&LayerRing> {
        self.check_level(n)?;
        Ok(&self.layers[n as usize])
    }

    pub fn layers(&self) -> &[LayerRing] {
        &self.layers
    }

    pub fn quot(&self, n: u32) -> Result<&QuotSpace> {
        self.check_level(n)?;
        self.quots[n as usize]
            .as_ref()
            .ok_or_else(|| Error::Invalid(format!("R_{n}/I_0 is not an F_p-algebra")))
    }

    /// Image of f_0 in `R_n`.
    pub fn f0(&self, n: u32) -> Result<LayerElem> {
        Ok(self.layer(n)?.ideal_generator())
    }

    /// The element `f_1` of `R_1` with `f_1^p` meant to equal the image of `f_0`.
    pub fn f1(&self) -> Result<LayerElem> {
        let r = self.layer(1)?;
        Ok(r.from_terms(
            self.shape
                .pillar
                .iter()
                .enumerate()
                .filter_map(|(i, c)| c.map(|c| (Monomial::new(i, c), 1))),
        ))
    }

    /// Image of a monomial under the transition `R_n -> R_{n+1}`.
    pub fn map_monomial(&self, m: &Monomial) -> Monomial {
        let p = self.shape.p() as u32;
        let mut vars = m.vars;
        for v in vars.iter_mut() {
            *v *= p;
        }
        Monomial {
            comp: m.comp,
            t: m.t * self.shape.transition_exp,
            vars,
        }
    }

    /// The ring map `R_n -> R_{n+1}`.
    pub fn transition(&self, n: u32, x: &LayerElem) -> Result<LayerElem> {
        let src = self.layer(n)?;
        let dst = self.layer(n + 1)?;
        if x.ring() != src {
            return Err(Error::RingMismatch);
        }
        Ok(dst
            .from_terms(x.terms().iter().map(|(m, c)| (self.map_monomial(m), *c)))
            .with_lossy(x.lossy()))
    }

    /// Iterated transition `R_n -> R_{n+k}`.
    pub fn transition_k(&self, n: u32, k: u32, x: &LayerElem) -> Result<LayerElem> {
        let mut y = x.clone();
        for i in 0..k {
            y = self.transition(n + i, &y)?;
        }
        Ok(y)
    }

    /// The induced map `R_n/I_0 -> R_{n+1}/I_0`.
    pub fn quot_transition(&self, n: u32, x: &QuotElem) -> Result<QuotElem> {
        let src = self.quot(n)?;
        let dst = self.quot(n + 1)?;
        if x.space() != src {
            return Err(Error::RingMismatch);
        }
        let mut out = vec![0u64; dst.dim()];
        for (m, c) in x.terms() {
            dst.push_monomial(&mut out, &self.map_monomial(&m), c);
        }
        Ok(dst.from_coeffs(out))
    }

    pub fn quot_transition_k(&self, n: u32, k: u32, x: &QuotElem) -> Result<QuotElem> {
        let mut y = x.clone();
        for i in 0..k {
            y = self.quot_transition(n + i, &y)?;
        }
        Ok(y)
    }

    /// Frobenius projection `F_n : R_{n+1}/I_0 -> R_n/I_0`, the unique map
    /// with `t_n(F_n(y)) = y^p`, in closed form on monomials.
    pub fn frob_projection(&self, n: u32, y: &QuotElem) -> Result<QuotElem> {
        let dst = self.quot(n)?;
        let src = self.quot(n + 1)?;
        if y.space() != src {
            return Err(Error::RingMismatch);
        }
        let p = self.shape.p();
        let r = self.shape.transition_exp;
        let mut out = vec![0u64; dst.dim()];
        for (m, c) in y.terms() {
            let power_t = m.t * p;
            let mut vars_p = m.vars;
            for v in vars_p.iter_mut() {
                *v *= p as u32;
            }
            let image = Monomial {
                comp: m.comp,
                t: power_t,
                vars: vars_p,
            };
            if src.index_of(&image).is_none() {
                continue;
            }
            if !power_t.is_multiple_of(r) {
                let w = src.from_coeffs({
                    let mut v = vec![0; src.dim()];
                    v[src.index_of(&m).expect("basis")] = 1;
                    v
                });
                return Err(Error::NoFrobeniusFactorization {
                    level: n,
                    witness: w.to_string(),
                });
            }
            let pre = Monomial {
                comp: m.comp,
                t: power_t / r,
                vars: m.vars,
            };
            dst.push_monomial(&mut out, &pre, c);
        }
        Ok(dst.from_coeffs(out))
    }

    /// `F_n ∘ ... ∘ F_{n+k-1}`: from level n+k down to level n.
    pub fn frob_projection_k(&self, n: u32, k: u32, y: &QuotElem) -> Result<QuotElem> {
        let mut x = y.clone();
        for i in (0..k).rev() {
            x = self.frob_projection(n + i, &x)?;
        }
        Ok(x)
    }

    pub fn summary(&self) -> TowerSummary {
        TowerSummary {
            kind: match &self.spec.kind {
                TowerKind::Pure => "pure".into(),
                TowerKind::Kummer { m } => format!("kummer(m={m})"),
                TowerKind::Product(fs) => format!("product({})", fs.len()),
            },
            prime: self.shape.p(),
            n_digits: self.shape.n_digits,
            depth: self.depth(),
            start_level: self.shape.start_level,
            ideal_exp: fmt_q(&self.shape.ideal_exp),
            ramification: (0..=self.depth()).map(|n| self.shape.e(n)).collect(),
            components: self.shape.components(),
            num_vars: self.shape.num_vars,
            var_degree_cap: fmt_q(&self.shape.var_degree_cap),
            characteristic: match self.shape.characteristic {
                TowerChar::Mixed => "mixed".into(),
                TowerChar::Positive { shift } => format!("positive(shift={shift})"),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TowerSummary {
    pub kind: String,
    pub prime: u64,
    pub n_digits: u32,
    pub depth: u32,
    pub start_level: u32,
    pub ideal_exp: String,
    pub ramification: Vec<u64>,
    pub components: usize,
    pub num_vars: usize,
    pub var_degree_cap: String,
    pub characteristic: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::layer_elem;

    #[test]
    fn pure_tower_shapes() {
        let h = build_tower(&TowerSpec::pure(5, 6, 3).unwrap()).unwrap();
        assert_eq!(h.layer(2).unwrap().e(), 25);
        assert_eq!(h.quot(3).unwrap().dim(), 125);
        assert!(h.layer(4).is_err());
    }

    #[test]
    fn transition_is_multiplicative() {
        let h = build_tower(&TowerSpec::pure(5, 6, 2).unwrap()).unwrap();
        let r0 = h.layer(0).unwrap();
        let r1 = h.layer(1).unwrap();
        let x = layer_elem(r1, "1 + 2*t^{1/5}").unwrap();
        let y = layer_elem(r1, "3 + t^{3/5}").unwrap();
        let hx = h.transition(1, &x).unwrap();
        let hy = h.transition(1, &y).unwrap();
        assert_eq!(
            h.transition(1, &x.mul(&y).unwrap()).unwrap(),
            hx.mul(&hy).unwrap()
        );
        assert_eq!(h.transition(0, &r0.constant(5)).unwrap(), r1.constant(5));
        // the uniformizer goes to the p-th power of the next one
        assert_eq!(h.transition(0, &r0.t_pow(1)).unwrap(), r1.t_pow(1).pow(5));
    }

    #[test]
    fn frobenius_projection_closed_form() {
        let h = build_tower(&TowerSpec::pure(5, 6, 2).unwrap()).unwrap();
        let q1 = h.quot(1).unwrap();
        let y = q1
            .reduce(&layer_elem(h.layer(1).unwrap(), "1 + 2*t^{1/5} + t^{7/5}").unwrap())
            .unwrap();
        assert_eq!(h.frob_projection(0, &y).unwrap().to_string(), "1");
        let q2 = h.quot(2).unwrap();
        let y = q2
            .reduce(&layer_elem(h.layer(2).unwrap(), "3 + t^{4/25}").unwrap())
            .unwrap();
        let x = h.frob_projection(1, &y).unwrap();
        assert_eq!(x.to_string(), "3 + t^{4/5}");
        assert_eq!(h.quot_transition(1, &x).unwrap(), y.pow(5));
    }

    #[test]
    fn spec_json_roundtrip() {
        let src = r#"{"prime":5,"n_digits":6,"depth":3,"kind":"pure","num_vars":1,"var_degree_cap":1,"start_level":0}"#;
        let s = TowerSpec::from_json(src).unwrap();
        assert_eq!(s.num_vars, 1);
        let back = serde_json::to_string(&s.to_file()).unwrap();
        assert_eq!(TowerSpec::from_json(&back).unwrap(), s);
        assert!(
            TowerSpec::from_json(r#"{"prime":6,"n_digits":6,"depth":3,"kind":"pure"}"#).is_err()
        );
        assert!(TowerSpec::from_json(
            r#"{"prime":5,"n_digits":6,"depth":3,"kind":"kummer","m":5,"ideal_exp":"1/5"}"#
        )
        .and_then(|s| build_tower(&s))
        .is_err());
    }

    #[test]
    fn products_need_identical_factors() {
        let a = TowerSpec::pure(5, 6, 2).unwrap();
        let b = TowerSpec::pure(5, 6, 3).unwrap();
        assert!(build_tower(&TowerSpec::product(vec![a.clone(), b]).unwrap()).is_err());
        let h = build_tower(&TowerSpec::product(vec![a.clone(), a]).unwrap()).unwrap();
        assert_eq!(h.layer(1).unwrap().components(), 2);
        assert_eq!(h.quot(1).unwrap().dim(), 10);
    }
}
