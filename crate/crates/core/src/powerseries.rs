//! Truncated power series over `Z_p` or `R_1 = Z_p[zeta_p]`, Weierstrass
//! preparation, and specialization of `R[[Z]]_𝔪`-sections at points of the
//! open disc.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{CycloElement, Tower, TowerLevel, Valuation};
use crate::error::{Error, Result};
use crate::padics::{PAdicDoc, PAdicNumber};

/// Coefficient ring of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoeffRing {
    /// `Z_p`, uniformizer `p`.
    Zp,
    /// `Z_p[zeta_p]`, uniformizer `λ_1 = zeta_p - 1`.
    R1,
}

impl CoeffRing {
    /// Tower level holding the coefficients.
    pub fn level(self) -> u32 {
        match self {
            CoeffRing::Zp => 0,
            CoeffRing::R1 => 1,
        }
    }

    /// `ν_m(ϖ)` for the ring's uniformizer seen in level `m`.
    pub fn varpi_valuation(self, tower: &Tower, m: u32) -> i64 {
        let p = tower.prime().get() as i64;
        match (self, m) {
            (_, 0) => 1,
            (CoeffRing::Zp, m) => p.pow(m - 1) * (p - 1),
            (CoeffRing::R1, m) => p.pow(m - 1),
        }
    }

    /// The uniformizer `ϖ` as an element of level `m >= self.level()`.
    pub fn varpi(self, tower: &Tower, m: u32) -> Result<CycloElement> {
        let lv = tower.level(m)?;
        match self {
            CoeffRing::Zp => Ok(CycloElement::from_int(&lv, tower.prime().get() as i64)),
            CoeffRing::R1 => CycloElement::lambda(&tower.level(1)?).embed_up(tower, m),
        }
    }
}

impl fmt::Display for CoeffRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffRing::Zp => write!(f, "Zp"),
            CoeffRing::R1 => write!(f, "R1"),
        }
    }
}

/// How much of a series is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truncation {
    /// A polynomial: all coefficients past the stored ones vanish.
    Exact,
    /// Known modulo `Z^(M+1)`.
    Order(usize),
}

impl Truncation {
    fn meet(self, other: Self) -> Self {
        match (self, other) {
            (Truncation::Exact, t) | (t, Truncation::Exact) => t,
            (Truncation::Order(a), Truncation::Order(b)) => Truncation::Order(a.min(b)),
        }
    }
}

/// An element of `R[[Z]]` known up to its [`Truncation`].
#[derive(Clone)]
pub struct PowerSeriesElt {
    tower: Tower,
    ring: CoeffRing,
    coeffs: Vec<CycloElement>,
    trunc: Truncation,
}

impl fmt::Debug for PowerSeriesElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PowerSeriesElt")
            .field("ring", &self.ring)
            .field("trunc", &self.trunc)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for PowerSeriesElt {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.trunc == other.trunc && self.coeffs == other.coeffs
    }
}

impl PowerSeriesElt {
    pub fn new(tower: &Tower, ring: CoeffRing, coeffs: Vec<CycloElement>, trunc: Truncation) -> Result<Self> {
        let m = ring.level();
        for c in &coeffs {
            if c.m() != m || c.prime() != tower.prime() {
                return Err(Error::LevelMismatch(format!(
                    "coefficient of level {} in a series over {ring}",
                    c.m()
                )));
            }
            if !c.is_zero() && c.val().lower_bound() < 0 {
                return Err(Error::InvalidInput("series coefficients must be integral".into()));
            }
        }
        Ok(Self::build(tower, ring, coeffs, trunc))
    }

    fn build(tower: &Tower, ring: CoeffRing, mut coeffs: Vec<CycloElement>, trunc: Truncation) -> Self {
        let lv = tower.level(ring.level()).expect("coefficient level");
        match trunc {
            Truncation::Order(n) => coeffs.resize(n + 1, CycloElement::zero(&lv)),
            Truncation::Exact => {
                while coeffs.last().is_some_and(|c| c.is_exact_zero()) {
                    coeffs.pop();
                }
            }
        }
        PowerSeriesElt {
            tower: tower.clone(),
            ring,
            coeffs,
            trunc,
        }
    }

    /// Integer coefficients at the tower precision (`R1` gets them in its
    /// constant coordinate).
    pub fn from_ints(tower: &Tower, ring: CoeffRing, coeffs: &[i64], trunc: Truncation) -> Result<Self> {
        let lv = tower.level(ring.level())?;
        let v = coeffs.iter().map(|&a| CycloElement::from_int(&lv, a)).collect();
        Self::new(tower, ring, v, trunc)
    }

    pub fn zero(tower: &Tower, ring: CoeffRing) -> Self {
        Self::build(tower, ring, Vec::new(), Truncation::Exact)
    }

    pub fn one(tower: &Tower, ring: CoeffRing) -> Self {
        Self::monomial(tower, ring, 0)
    }

    /// `Z^k`.
    pub fn monomial(tower: &Tower, ring: CoeffRing, k: usize) -> Self {
        let lv = tower.level(ring.level()).expect("coefficient level");
        let mut v = vec![CycloElement::zero(&lv); k];
        v.push(CycloElement::one(&lv));
        Self::build(tower, ring, v, Truncation::Exact)
    }

    pub fn ring(&self) -> CoeffRing {
        self.ring
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    /// Coefficient level handle.
    pub fn level(&self) -> Arc<TowerLevel> {
        self.tower.level(self.ring.level()).expect("coefficient level")
    }

    pub fn coeffs(&self) -> &[CycloElement] {
        &self.coeffs
    }

    /// `a_i`; exact zero past the end of a polynomial, `None` past the
    /// truncation order.
    pub fn coeff(&self, i: usize) -> Option<CycloElement> {
        match self.coeffs.get(i) {
            Some(c) => Some(c.clone()),
            None if self.trunc == Truncation::Exact => Some(CycloElement::zero(&self.level())),
            None => None,
        }
    }

    /// Degree of a polynomial, `None` for a truncated series or for zero.
    pub fn degree(&self) -> Option<usize> {
        match self.trunc {
            Truncation::Exact => self.coeffs.len().checked_sub(1),
            Truncation::Order(_) => None,
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring || self.tower.prime() != other.tower.prime() {
            return Err(Error::LevelMismatch(format!(
                "series over {} against {}",
                self.ring, other.ring
            )));
        }
        Ok(())
    }

    /// Coefficientwise agreement at the precision both sides carry, up to
    /// the common truncation order.
    pub fn agrees_with(&self, other: &Self) -> Result<bool> {
        self.check(other)?;
        let n = match self.trunc.meet(other.trunc) {
            Truncation::Exact => self.coeffs.len().max(other.coeffs.len()),
            Truncation::Order(m) => m + 1,
        };
        for i in 0..n {
            let (a, b) = (self.coeff(i).unwrap(), other.coeff(i).unwrap());
            let k = a.abs_prec().min(b.abs_prec());
            if !a.congruent(&b, k)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Least absolute precision among the coefficients, in `ν` units of
    /// the coefficient ring.
    pub fn min_abs_prec(&self) -> i64 {
        self.coeffs.iter().map(CycloElement::abs_prec).min().unwrap_or(i64::MAX)
    }

    /// Truncates to order `n`.
    pub fn truncate(&self, n: usize) -> Self {
        let trunc = self.trunc.meet(Truncation::Order(n));
        let v = self.coeffs.iter().take(n + 1).cloned().collect();
        Self::build(&self.tower, self.ring, v, trunc)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let trunc = self.trunc.meet(other.trunc);
        let n = match trunc {
            Truncation::Exact => self.coeffs.len().max(other.coeffs.len()),
            Truncation::Order(m) => m + 1,
        };
        let lv = self.level();
        let z = CycloElement::zero(&lv);
        let v = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).unwrap_or(&z);
                let b = other.coeffs.get(i).unwrap_or(&z);
                a.add(b)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::build(&self.tower, self.ring, v, trunc))
    }

    pub fn neg(&self) -> Self {
        let v = self.coeffs.iter().map(CycloElement::neg).collect();
        Self::build(&self.tower, self.ring, v, self.trunc)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        // a product is known up to the smaller of the two orders
        let trunc = self.trunc.meet(other.trunc);
        let (a, b) = (&self.coeffs, &other.coeffs);
        if a.is_empty() || b.is_empty() {
            return Ok(Self::build(&self.tower, self.ring, Vec::new(), trunc));
        }
        let full = a.len() + b.len() - 1;
        let n = match trunc {
            Truncation::Exact => full,
            Truncation::Order(m) => full.min(m + 1),
        };
        let lv = self.level();
        let v = crate::par::map_range(n, |k| {
            let mut acc = CycloElement::zero(&lv);
            for i in k.saturating_sub(b.len() - 1)..=k.min(a.len() - 1) {
                acc = acc.add(&a[i].mul(&b[k - i])?)?;
            }
            Ok(acc)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(Self::build(&self.tower, self.ring, v, trunc))
    }

    /// Multiplies every coefficient by `s` (same level as the coefficients).
    pub fn scale(&self, s: &CycloElement) -> Result<Self> {
        let v = self.coeffs.iter().map(|c| c.mul(s)).collect::<Result<Vec<_>>>()?;
        Self::new(&self.tower, self.ring, v, self.trunc)
    }

    /// `Σ_{i<d} a_i Z^i`.
    fn low(&self, d: usize) -> Self {
        let v = self.coeffs.iter().take(d).cloned().collect();
        Self::build(&self.tower, self.ring, v, Truncation::Exact)
    }

    /// `Σ_{i>=d} a_i Z^(i-d)`.
    fn high(&self, d: usize) -> Self {
        let v = self.coeffs.iter().skip(d).cloned().collect();
        let trunc = match self.trunc {
            Truncation::Exact => Truncation::Exact,
            Truncation::Order(m) => Truncation::Order(m.saturating_sub(d)),
        };
        Self::build(&self.tower, self.ring, v, trunc)
    }

    /// Inverse of a unit series modulo `Z^(n+1)`.
    pub fn inv_to(&self, n: usize) -> Result<Self> {
        let a0 = self.coeffs.first().ok_or(Error::DivisionByApparentZero)?;
        if a0.val() != Valuation::Finite(0) {
            return Err(Error::InvalidInput(
                "only series with unit constant term are invertible".into(),
            ));
        }
        let n = match self.trunc {
            Truncation::Order(m) => n.min(m),
            Truncation::Exact => n,
        };
        let inv0 = a0.inv()?;
        let mut b: Vec<CycloElement> = vec![inv0.clone()];
        for k in 1..=n {
            let mut acc = CycloElement::zero(&self.level());
            for i in 1..=k.min(self.coeffs.len().saturating_sub(1)) {
                acc = acc.add(&self.coeffs[i].mul(&b[k - i])?)?;
            }
            b.push(acc.neg().mul(&inv0)?);
        }
        Ok(Self::build(&self.tower, self.ring, b, Truncation::Order(n)))
    }

    /// `min_i ν(a_i)` in units of `ν(ϖ)`.
    pub fn varpi_content(&self) -> Result<i64> {
        let mut best: Option<i64> = None;
        for c in &self.coeffs {
            match c.val() {
                Valuation::Finite(v) => best = Some(best.map_or(v, |b| b.min(v))),
                Valuation::AtLeast(_) => {}
            }
        }
        best.ok_or_else(|| Error::PrecisionExhausted("every coefficient is zero at its precision".into()))
    }

    /// Divides by `ϖ^k`; every coefficient must be divisible.
    pub fn divide_varpi(&self, k: i64) -> Result<Self> {
        if k == 0 {
            return Ok(self.clone());
        }
        let v = match self.ring {
            CoeffRing::Zp => self.coeffs.iter().map(|c| c.scale_p(-k)).collect(),
            CoeffRing::R1 => {
                let s = CycloElement::lambda(&self.level()).pow(-k)?;
                self.coeffs.iter().map(|c| c.mul(&s)).collect::<Result<Vec<_>>>()?
            }
        };
        Self::new(&self.tower, self.ring, v, self.trunc)
    }

    /// Order of vanishing of the reduction mod `𝔪`: the first index whose
    /// coefficient is a unit.
    pub fn weierstrass_degree(&self) -> Result<usize> {
        for (i, c) in self.coeffs.iter().enumerate() {
            match c.val() {
                Valuation::Finite(0) => return Ok(i),
                Valuation::AtLeast(k) if k < 1 => {
                    return Err(Error::PrecisionExhausted(format!(
                        "coefficient {i} is not known modulo 𝔪"
                    )))
                }
                _ => {}
            }
        }
        Err(Error::ReducesToZero)
    }

    /// `g = ϖ^c f U` with `f` distinguished of the Weierstrass degree and
    /// `U` a unit. The stored coefficients are treated as a polynomial, so
    /// `f U` reproduces them exactly at coefficient precision; a truncated
    /// input gives a `U` carrying the same truncation.
    pub fn weierstrass_prepare(&self) -> Result<WeierstrassFactorization> {
        let c = self.varpi_content()?;
        let g = self.divide_varpi(c)?;
        let d = g.weierstrass_degree()?;
        let poly = Self::build(&self.tower, self.ring, g.coeffs.clone(), Truncation::Exact);
        let p_low = poly.low(d);
        let h = poly.high(d);
        // g = P + Z^d H and g = (Z^d + r) U give U = H - τ_d(r U) with
        // r = [P U^{-1}]_{<d}; r ∈ 𝔪 so each pass gains a digit of 𝔪.
        let lv = self.level();
        let bound = (lv.precision() as usize + 2) * lv.degree() + 4;
        let mut u = h.clone();
        let mut r = Self::zero(&self.tower, self.ring);
        let mut settled = false;
        for _ in 0..bound {
            r = if d == 0 {
                r
            } else {
                p_low.mul(&u.inv_to(d - 1)?)?.low(d)
            };
            let next = h.sub(&r.mul(&u)?.high(d))?;
            let delta = next.sub(&u)?;
            u = next;
            if delta.coeffs.iter().all(CycloElement::is_zero) {
                settled = true;
                break;
            }
        }
        if !settled {
            return Err(Error::PrecisionExhausted("Weierstrass iteration did not settle".into()));
        }
        let mut fc: Vec<CycloElement> = r.coeffs.clone();
        fc.resize(d, CycloElement::zero(&lv));
        let f = DistinguishedPoly::new(&self.tower, self.ring, fc)?;
        let u = Self::build(&self.tower, self.ring, u.coeffs, self.trunc);
        Ok(WeierstrassFactorization { c, f, u })
    }

    /// Value at a point `α` of the open disc, in `α`'s level. For a
    /// truncated series the result is clamped to the tail bound
    /// `(M+1) ν(α)`.
    pub fn eval(&self, alpha: &CycloElement) -> Result<CycloElement> {
        let m = alpha.m();
        if m < self.ring.level() {
            return Err(Error::LevelMismatch(format!(
                "point of level {m} for a series over {}",
                self.ring
            )));
        }
        let lower = alpha.val().lower_bound();
        if lower <= 0 {
            return Err(Error::OutsideDisc(lower));
        }
        let up = self
            .coeffs
            .iter()
            .map(|c| c.embed_up(&self.tower, m))
            .collect::<Result<Vec<_>>>()?;
        let v = crate::cyclotomic::eval_poly(&up, alpha)?;
        Ok(match self.trunc {
            Truncation::Exact => v,
            Truncation::Order(n) => v.clamp_prec((n as i64 + 1).saturating_mul(lower)),
        })
    }

    pub fn to_doc(&self) -> SeriesDoc {
        SeriesDoc {
            ring: self.ring,
            p: self.tower.prime().as_u64(),
            order: match self.trunc {
                Truncation::Exact => None,
                Truncation::Order(n) => Some(n),
            },
            coeffs: self.coeffs.iter().map(|c| coeff_doc(self.ring, c)).collect(),
        }
    }

    pub fn from_doc(tower: &Tower, doc: &SeriesDoc) -> Result<Self> {
        if doc.p != tower.prime().as_u64() {
            return Err(Error::InvalidInput(format!(
                "series over p = {} read with p = {}",
                doc.p,
                tower.prime()
            )));
        }
        let lv = tower.level(doc.ring.level())?;
        let coeffs = doc
            .coeffs
            .iter()
            .map(|c| read_coeff(&lv, doc.ring, c))
            .collect::<Result<Vec<_>>>()?;
        let trunc = match doc.order {
            None => Truncation::Exact,
            Some(n) => {
                if coeffs.len() > n + 1 {
                    return Err(Error::InvalidInput(format!(
                        "{} coefficients for order {n}",
                        coeffs.len()
                    )));
                }
                Truncation::Order(n)
            }
        };
        Self::new(tower, doc.ring, coeffs, trunc)
    }
}

/// Coefficient as read from a document: an integer, a p-adic number in
/// text or structured form, or (over `R1`) a list of coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffDoc {
    Int(i64),
    Text(String),
    PAdic(PAdicDoc),
    Coords(Vec<CoeffDoc>),
}

/// Series document `{ring, p, M, coeffs}`; `M` absent means a polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesDoc {
    pub ring: CoeffRing,
    pub p: u64,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    pub coeffs: Vec<CoeffDoc>,
}

fn coeff_doc(ring: CoeffRing, c: &CycloElement) -> CoeffDoc {
    match ring {
        CoeffRing::Zp => CoeffDoc::PAdic(c.coeff(0).to_doc()),
        CoeffRing::R1 => CoeffDoc::Coords(c.coeffs().iter().map(|x| CoeffDoc::PAdic(x.to_doc())).collect()),
    }
}

fn read_padic(lv: &Arc<TowerLevel>, doc: &CoeffDoc) -> Result<PAdicNumber> {
    let p = lv.prime();
    let x = match doc {
        CoeffDoc::Int(n) => PAdicNumber::from_bigint(p, &BigInt::from(*n), lv.precision()),
        CoeffDoc::Text(s) => s.parse::<PAdicNumber>()?,
        CoeffDoc::PAdic(d) => PAdicNumber::from_doc(d)?,
        CoeffDoc::Coords(_) => return Err(Error::InvalidInput("nested coordinate list".into())),
    };
    if x.prime() != p {
        return Err(Error::InvalidInput(format!("coefficient over p = {}", x.prime())));
    }
    if x.relprec() > lv.precision() {
        return Ok(x.with_relprec(lv.precision()));
    }
    Ok(x)
}

fn read_coeff(lv: &Arc<TowerLevel>, ring: CoeffRing, doc: &CoeffDoc) -> Result<CycloElement> {
    match (ring, doc) {
        (CoeffRing::R1, CoeffDoc::Coords(v)) => {
            if v.len() > lv.degree() {
                return Err(Error::InvalidInput(format!(
                    "{} coordinates for degree {}",
                    v.len(),
                    lv.degree()
                )));
            }
            let mut xs = v.iter().map(|d| read_padic(lv, d)).collect::<Result<Vec<_>>>()?;
            xs.resize(lv.degree(), PAdicNumber::zero(lv.prime()));
            CycloElement::from_padic_coeffs(lv, &xs)
        }
        (CoeffRing::Zp, CoeffDoc::Coords(_)) => Err(Error::InvalidInput("coordinate list in a Zp series".into())),
        (_, d) => Ok(CycloElement::from_padic(lv, &read_padic(lv, d)?)),
    }
}

/// Monic `Z^d + a_{d-1} Z^(d-1) + ... + a_0` with every `a_i ∈ 𝔪`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistinguishedPoly {
    series: PowerSeriesElt,
    degree: usize,
}

impl DistinguishedPoly {
    /// From the non-leading coefficients `a_0 .. a_{d-1}`.
    pub fn new(tower: &Tower, ring: CoeffRing, lower: Vec<CycloElement>) -> Result<Self> {
        for (i, a) in lower.iter().enumerate() {
            if !a.is_zero() && a.val().lower_bound() < 1 {
                return Err(Error::InvalidInput(format!(
                    "coefficient {i} of a distinguished polynomial is a unit"
                )));
            }
        }
        let degree = lower.len();
        let lv = tower.level(ring.level())?;
        let mut v = lower;
        v.push(CycloElement::one(&lv));
        let series = PowerSeriesElt::new(tower, ring, v, Truncation::Exact)?;
        Ok(DistinguishedPoly { series, degree })
    }

    pub fn one(tower: &Tower, ring: CoeffRing) -> Self {
        Self::new(tower, ring, Vec::new()).unwrap()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `a_0 .. a_{d-1}`.
    pub fn lower_coeffs(&self) -> &[CycloElement] {
        &self.series.coeffs[..self.degree]
    }

    pub fn as_series(&self) -> &PowerSeriesElt {
        &self.series
    }

    pub fn eval(&self, alpha: &CycloElement) -> Result<CycloElement> {
        self.series.eval(alpha)
    }
}

/// `g = ϖ^c f U`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeierstrassFactorization {
    pub c: i64,
    pub f: DistinguishedPoly,
    pub u: PowerSeriesElt,
}

impl WeierstrassFactorization {
    /// `ϖ^c f U`, multiplied out.
    pub fn reconstruct(&self) -> Result<PowerSeriesElt> {
        let s = &self.f.series;
        let prod = s.mul(&self.u)?;
        let lv = s.level();
        let vc = match s.ring {
            CoeffRing::Zp => CycloElement::one(&lv).scale_p(self.c),
            CoeffRing::R1 => CycloElement::lambda(&lv).pow(self.c)?,
        };
        prod.scale(&vc)
    }
}

/// `A = ϖ^c f_1 U / (f_2 V)`, an element of `R[[Z]]_𝔪` kept in factored
/// form. `V` is a second unit, one unless the section was built from a
/// quotient of series; keeping it apart lets polynomial data specialize
/// without a truncation loss.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalSection {
    pub c: i64,
    pub f1: DistinguishedPoly,
    pub u: PowerSeriesElt,
    pub f2: DistinguishedPoly,
    pub v: PowerSeriesElt,
}

fn has_unit_constant(u: &PowerSeriesElt) -> bool {
    u.coeffs.first().map(CycloElement::val) == Some(Valuation::Finite(0))
}

impl RationalSection {
    pub fn new(c: i64, f1: DistinguishedPoly, u: PowerSeriesElt, f2: DistinguishedPoly) -> Result<Self> {
        let v = PowerSeriesElt::one(&u.tower, u.ring);
        Self::with_unit_denominator(c, f1, u, f2, v)
    }

    pub fn with_unit_denominator(
        c: i64,
        f1: DistinguishedPoly,
        u: PowerSeriesElt,
        f2: DistinguishedPoly,
        v: PowerSeriesElt,
    ) -> Result<Self> {
        if c < 0 {
            return Err(Error::InvalidInput(
                "the ϖ-exponent of a section must be nonnegative".into(),
            ));
        }
        if !has_unit_constant(&u) || !has_unit_constant(&v) {
            return Err(Error::InvalidInput("U and V must have unit constant terms".into()));
        }
        let ring = u.ring;
        if f1.series.ring != ring || f2.series.ring != ring || v.ring != ring {
            return Err(Error::LevelMismatch("section parts over different rings".into()));
        }
        Ok(RationalSection { c, f1, u, f2, v })
    }

    /// `num / den`, both prepared; `den` must not be divisible by `ϖ`.
    pub fn from_series(num: &PowerSeriesElt, den: &PowerSeriesElt) -> Result<Self> {
        let n = num.weierstrass_prepare()?;
        let d = den.weierstrass_prepare()?;
        if d.c != 0 {
            return Err(Error::InvalidInput("denominator divisible by the uniformizer".into()));
        }
        Self::with_unit_denominator(n.c, n.f, n.u, d.f, d.u)
    }

    pub fn d1(&self) -> usize {
        self.f1.degree
    }

    pub fn d2(&self) -> usize {
        self.f2.degree
    }

    pub fn ring(&self) -> CoeffRing {
        self.u.ring
    }

    /// `A(α)`; the truncation of `U` bounds the precision of the result.
    pub fn specialize(&self, alpha: &CycloElement) -> Result<CycloElement> {
        let lower = alpha.val().lower_bound();
        if lower <= 0 {
            return Err(Error::OutsideDisc(lower));
        }
        let den = self.f2.eval(alpha)?;
        if den.is_zero() {
            return Err(Error::DenominatorVanishes);
        }
        let tower = &self.u.tower;
        let vc = self.ring().varpi(tower, alpha.m())?.pow(self.c)?;
        let num = vc.mul(&self.f1.eval(alpha)?)?.mul(&self.u.eval(alpha)?)?;
        num.div(&den.mul(&self.v.eval(alpha)?)?)
    }

    /// `ν_m(A(π_m)) = c ν_m(ϖ) + d_1 - d_2`, valid once every
    /// non-leading term of `f_1`, `f_2` is dominated, i.e. `ν_m(ϖ) > d_1 + d_2`.
    pub fn specialization_valuation(&self, m: u32) -> Result<i64> {
        let tower = &self.u.tower;
        if m < self.ring().level().max(1) {
            return Err(Error::LevelTooSmall {
                level: m,
                reason: "the disc points start at level 1".into(),
            });
        }
        let w = self.ring().varpi_valuation(tower, m);
        let (d1, d2) = (self.d1() as i64, self.d2() as i64);
        if w <= d1 + d2 {
            return Err(Error::LevelTooSmall {
                level: m,
                reason: format!("ν_m(ϖ) = {w} does not exceed d1 + d2 = {}", d1 + d2),
            });
        }
        Ok(self.c * w + d1 - d2)
    }
}

/// Eisenstein test for a monic polynomial (constant term first) over one
/// tower level: every lower coefficient in `𝔪`, constant term of valuation 1.
pub fn is_eisenstein(q: &[CycloElement]) -> Result<bool> {
    let (lead, lower) = q
        .split_last()
        .ok_or_else(|| Error::InvalidInput("empty polynomial".into()))?;
    if lower.is_empty() {
        return Ok(false);
    }
    if lead != &CycloElement::one(lead.level()) {
        return Err(Error::InvalidInput("polynomial is not monic".into()));
    }
    match lower[0].val() {
        Valuation::Finite(1) => {}
        Valuation::Finite(_) => return Ok(false),
        Valuation::AtLeast(k) if k >= 2 => return Ok(false),
        Valuation::AtLeast(_) => {
            return Err(Error::PrecisionExhausted("constant term not resolved".into()));
        }
    }
    for a in &lower[1..] {
        match a.val() {
            Valuation::Finite(v) if v < 1 => return Ok(false),
            Valuation::AtLeast(k) if k < 1 => {
                return Err(Error::PrecisionExhausted("coefficient not resolved modulo 𝔪".into()))
            }
            _ => {}
        }
    }
    Ok(true)
}
