use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{taylor_shift, Tower, TowerLevel};
use crate::error::{Error, Result};
use crate::padics::{split_p_power, PAdicDoc, PAdicNumber, Prime};
use crate::par;

/// Marker shift for the exact zero.
const EXACT_ZERO: i64 = i64::MAX / 8;

/// Valuation of a tower element in units of `ν_m(λ_m) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(i64),
    /// The element is zero at its precision; it lies in `𝔪^k`.
    AtLeast(i64),
}

impl Valuation {
    /// Either the exact value or the certified lower bound.
    pub fn lower_bound(self) -> i64 {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => v,
        }
    }

    /// `ν > k`, certified.
    pub fn exceeds(self, k: i64) -> bool {
        self.lower_bound() > k
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) if *v >= EXACT_ZERO / 2 => write!(f, "inf"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

/// An element `p^shift * Σ c_i λ^i` of a tower level, with every `c_i`
/// an integer known modulo `p^rel`. Normalized so that some `c_i` is a
/// unit whenever `rel > 0`; `rel == 0` is a zero known modulo `p^shift`.
#[derive(Clone)]
pub struct CycloElement {
    level: Arc<TowerLevel>,
    shift: i64,
    rel: u32,
    coeffs: Vec<BigUint>,
}

impl fmt::Debug for CycloElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CycloElement")
            .field("p", &self.level.prime().get())
            .field("m", &self.level.m())
            .field("shift", &self.shift)
            .field("rel", &self.rel)
            .field("coeffs", &self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>())
            .finish()
    }
}

impl PartialEq for CycloElement {
    fn eq(&self, other: &Self) -> bool {
        self.level.same(&other.level)
            && self.shift == other.shift
            && self.rel == other.rel
            && self.coeffs == other.coeffs
    }
}

impl Eq for CycloElement {}

fn first_unit_index(coeffs: &[BigUint], p: Prime) -> Option<usize> {
    let pb = p.big();
    coeffs.iter().position(|c| !(c % &pb).is_zero())
}

impl CycloElement {
    /// Builds `p^shift * Σ coeffs[i] λ^i` with coefficients read modulo
    /// `p^rel` and normalizes the p-content.
    pub(crate) fn from_raw(level: Arc<TowerLevel>, shift: i64, mut coeffs: Vec<BigUint>, rel: u32) -> Self {
        let e = level.degree();
        debug_assert_eq!(coeffs.len(), e);
        if rel == 0 {
            return Self::approx_zero(&level, shift);
        }
        let modulus = level.p_pow(rel);
        for c in coeffs.iter_mut() {
            if &*c >= modulus {
                *c %= modulus;
            }
        }
        let p = level.prime();
        let t = coeffs
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| split_p_power(p, c).0)
            .min();
        match t {
            None => Self::approx_zero(&level, shift + rel as i64),
            Some(0) => CycloElement {
                level,
                shift,
                rel,
                coeffs,
            },
            Some(t) => {
                let d = level.p_pow(t).clone();
                for c in coeffs.iter_mut() {
                    *c /= &d;
                }
                CycloElement {
                    level,
                    shift: shift + t as i64,
                    rel: rel - t,
                    coeffs,
                }
            }
        }
    }

    /// Signed integer coordinates, read modulo `p^rel`.
    pub fn from_signed(level: &Arc<TowerLevel>, shift: i64, coeffs: &[BigInt], rel: u32) -> Result<Self> {
        if coeffs.len() > level.degree() {
            return Err(Error::InvalidInput(format!(
                "{} coordinates for a level of degree {}",
                coeffs.len(),
                level.degree()
            )));
        }
        let rel = rel.min(level.precision());
        let modulus = BigInt::from(level.p_pow(rel).clone());
        let mut v: Vec<BigUint> = coeffs
            .iter()
            .map(|c| {
                let r = c % &modulus;
                let r = if r.sign() == Sign::Minus { r + &modulus } else { r };
                r.to_biguint().unwrap()
            })
            .collect();
        v.resize(level.degree(), BigUint::zero());
        Ok(Self::from_raw(level.clone(), shift, v, rel))
    }

    pub fn zero(level: &Arc<TowerLevel>) -> Self {
        Self::approx_zero(level, EXACT_ZERO)
    }

    /// Zero known modulo `p^digits`.
    pub fn approx_zero(level: &Arc<TowerLevel>, digits: i64) -> Self {
        CycloElement {
            level: level.clone(),
            shift: digits,
            rel: 0,
            coeffs: vec![BigUint::zero(); level.degree()],
        }
    }

    pub fn from_int(level: &Arc<TowerLevel>, n: i64) -> Self {
        Self::from_bigint(level, &BigInt::from(n))
    }

    pub fn from_bigint(level: &Arc<TowerLevel>, n: &BigInt) -> Self {
        if n.is_zero() {
            return Self::zero(level);
        }
        Self::from_signed(level, 0, std::slice::from_ref(n), level.precision()).unwrap()
    }

    /// An element of `Q_p` placed in this level.
    pub fn from_padic(level: &Arc<TowerLevel>, x: &PAdicNumber) -> Self {
        let mut coeffs = vec![PAdicNumber::zero(level.prime()); level.degree()];
        coeffs[0] = x.clone();
        Self::from_padic_coeffs(level, &coeffs).unwrap()
    }

    pub fn one(level: &Arc<TowerLevel>) -> Self {
        Self::from_int(level, 1)
    }

    /// `λ^i` for `i < e`.
    pub fn basis(level: &Arc<TowerLevel>, i: usize) -> Self {
        let mut coeffs = vec![BigUint::zero(); level.degree()];
        coeffs[i] = BigUint::one();
        Self::from_raw(level.clone(), 0, coeffs, level.precision())
    }

    /// The uniformizer `λ_m = zeta_{p^m} - 1` (zero on the base level).
    pub fn lambda(level: &Arc<TowerLevel>) -> Self {
        if level.degree() == 1 {
            return Self::zero(level);
        }
        Self::basis(level, 1)
    }

    /// Coordinates given as p-adic numbers; the common absolute precision
    /// is the least one among them.
    pub fn from_padic_coeffs(level: &Arc<TowerLevel>, coeffs: &[PAdicNumber]) -> Result<Self> {
        let p = level.prime();
        if coeffs.len() != level.degree() {
            return Err(Error::InvalidInput(format!(
                "{} coordinates for a level of degree {}",
                coeffs.len(),
                level.degree()
            )));
        }
        if coeffs.iter().any(|c| c.prime() != p) {
            return Err(Error::InvalidInput("coordinate over a different prime".into()));
        }
        if coeffs.iter().all(|c| c.is_exact_zero()) {
            return Ok(Self::zero(level));
        }
        let abs = coeffs.iter().filter_map(|c| c.abs_prec()).min().unwrap();
        let base = coeffs
            .iter()
            .filter(|c| !c.is_zero())
            .filter_map(|c| c.valuation())
            .min()
            .unwrap_or(abs)
            .min(abs);
        let width = abs - base;
        if width > level.precision() as i64 {
            return Err(Error::InvalidInput(format!(
                "coordinates carry {width} digits, more than the level precision {}",
                level.precision()
            )));
        }
        let width = width as u32;
        let v = coeffs
            .iter()
            .map(|c| match c.valuation() {
                Some(val) if !c.is_zero() && val - base < width as i64 => c.unit() * level.p_pow((val - base) as u32),
                _ => BigUint::zero(),
            })
            .collect();
        Ok(Self::from_raw(level.clone(), base, v, width))
    }

    pub fn level(&self) -> &Arc<TowerLevel> {
        &self.level
    }

    pub fn m(&self) -> u32 {
        self.level.m()
    }

    pub fn prime(&self) -> Prime {
        self.level.prime()
    }

    pub fn degree(&self) -> usize {
        self.level.degree()
    }

    pub(crate) fn shift(&self) -> i64 {
        self.shift
    }

    pub(crate) fn rel(&self) -> u32 {
        self.rel
    }

    pub fn is_exact_zero(&self) -> bool {
        self.rel == 0 && self.shift >= EXACT_ZERO / 2
    }

    /// Zero at its precision.
    pub fn is_zero(&self) -> bool {
        self.rel == 0
    }

    /// Absolute precision in p-adic digits: the element is known modulo `p^k`.
    pub fn prec_digits(&self) -> i64 {
        self.shift + self.rel as i64
    }

    /// Absolute precision in units of `ν_m`: known modulo `𝔪_m^k`.
    pub fn abs_prec(&self) -> i64 {
        if self.is_exact_zero() {
            return EXACT_ZERO;
        }
        self.level.degree() as i64 * self.prec_digits()
    }

    /// Coordinate `i` as a p-adic number.
    pub fn coeff(&self, i: usize) -> PAdicNumber {
        let p = self.prime();
        if self.is_exact_zero() {
            return PAdicNumber::zero(p);
        }
        PAdicNumber::from_scaled(p, self.shift, &self.coeffs[i], self.prec_digits())
    }

    pub fn coeffs(&self) -> Vec<PAdicNumber> {
        (0..self.degree()).map(|i| self.coeff(i)).collect()
    }

    pub fn val(&self) -> Valuation {
        if self.rel == 0 {
            return Valuation::AtLeast(self.abs_prec());
        }
        let i = first_unit_index(&self.coeffs, self.prime()).expect("normalized");
        Valuation::Finite(self.level.degree() as i64 * self.shift + i as i64)
    }

    /// `ν_m(self)`; an element that is zero at its precision has no
    /// certified valuation.
    pub fn valuation(&self) -> Result<i64> {
        match self.val() {
            Valuation::Finite(v) => Ok(v),
            Valuation::AtLeast(k) => Err(Error::PrecisionExhausted(format!(
                "valuation of an element that is zero modulo 𝔪^{k}"
            ))),
        }
    }

    fn check_level(&self, other: &Self) -> Result<()> {
        if !self.level.same(&other.level) {
            return Err(Error::LevelMismatch(format!(
                "level {} (p={}, prec {}) against level {} (p={}, prec {})",
                self.m(),
                self.prime(),
                self.level.precision(),
                other.m(),
                other.prime(),
                other.level.precision()
            )));
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        if self.rel == 0 {
            return self.clone();
        }
        let m = self.level.p_pow(self.rel);
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| if c.is_zero() { BigUint::zero() } else { m - c })
            .collect();
        CycloElement { coeffs, ..self.clone() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        if self.is_exact_zero() {
            return Ok(other.clone());
        }
        if other.is_exact_zero() {
            return Ok(self.clone());
        }
        let abs = self.prec_digits().min(other.prec_digits());
        let base = self.shift.min(other.shift);
        if abs <= base {
            return Ok(Self::approx_zero(&self.level, abs));
        }
        let width = (abs - base) as u32;
        let mut out = vec![BigUint::zero(); self.degree()];
        for x in [self, other] {
            if x.rel == 0 {
                continue;
            }
            let gap = x.shift - base;
            if gap >= width as i64 {
                continue;
            }
            let scale = self.level.p_pow(gap as u32);
            for (o, c) in out.iter_mut().zip(&x.coeffs) {
                if !c.is_zero() {
                    *o += c * scale;
                }
            }
        }
        Ok(Self::from_raw(self.level.clone(), base, out, width))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_level(other)?;
        if self.is_exact_zero() || other.is_exact_zero() {
            return Ok(Self::zero(&self.level));
        }
        let shift = self.shift + other.shift;
        if self.rel == 0 || other.rel == 0 {
            return Ok(Self::approx_zero(&self.level, shift));
        }
        let rel = self.rel.min(other.rel);
        let coeffs = mul_vectors(&self.level, &self.coeffs, &other.coeffs, rel);
        Ok(Self::from_raw(self.level.clone(), shift, coeffs, rel))
    }

    /// Multiplication by `p^k`, which is exact.
    pub fn scale_p(&self, k: i64) -> Self {
        if self.is_exact_zero() {
            return self.clone();
        }
        CycloElement {
            shift: self.shift + k,
            ..self.clone()
        }
    }

    pub fn mul_int(&self, n: i64) -> Self {
        self.mul(&Self::from_int(&self.level, n)).unwrap()
    }

    /// Inverse of an element with unit zeroth coordinate (shift ignored).
    fn unit_inverse_vector(&self) -> Result<Vec<BigUint>> {
        let rel = self.rel;
        let modulus = self.level.p_pow(rel);
        let c0inv = self.coeffs[0].modinv(modulus).ok_or(Error::DivisionByApparentZero)?;
        let u = CycloElement {
            shift: 0,
            ..self.clone()
        };
        let mut z = {
            let mut v = vec![BigUint::zero(); self.degree()];
            v[0] = c0inv;
            CycloElement::from_raw(self.level.clone(), 0, v, rel)
        };
        let one = CycloElement::from_raw(
            self.level.clone(),
            0,
            {
                let mut v = vec![BigUint::zero(); self.degree()];
                v[0] = BigUint::one();
                v
            },
            rel,
        );
        let two = one.add(&one)?;
        let bound = self.degree() as u64 * rel as u64;
        let rounds = 64 - bound.leading_zeros() + 2;
        for _ in 0..=rounds {
            let t = u.mul(&z)?;
            if t == one {
                return Ok(z.coeffs);
            }
            z = z.mul(&two.sub(&t)?)?;
        }
        let t = u.mul(&z)?;
        if t == one {
            Ok(z.coeffs)
        } else {
            Err(Error::PrecisionExhausted("Newton inversion did not settle".into()))
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.rel == 0 {
            return Err(Error::DivisionByApparentZero);
        }
        let e = self.degree();
        let t = first_unit_index(&self.coeffs, self.prime()).unwrap();
        if t == 0 {
            let v = self.unit_inverse_vector()?;
            return Ok(Self::from_raw(self.level.clone(), -self.shift, v, self.rel));
        }
        // v λ^(e-t) has valuation exactly e, so it is p times a unit.
        let lam = Self::basis(&self.level, e - t);
        let y = CycloElement {
            shift: 0,
            ..self.clone()
        }
        .mul(&lam)?;
        debug_assert_eq!(y.val(), Valuation::Finite(e as i64));
        if y.rel == 0 {
            return Err(Error::DivisionByApparentZero);
        }
        let yinv = Self::from_raw(self.level.clone(), -y.shift, y.unit_inverse_vector()?, y.rel);
        Ok(yinv.mul(&lam)?.scale_p(-self.shift))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.inv()?)
    }

    pub fn pow(&self, n: i64) -> Result<Self> {
        if n < 0 {
            return self.inv()?.pow(-n);
        }
        let mut result = Self::one(&self.level);
        let mut base = self.clone();
        let mut n = n as u64;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Forgets digits: keeps the element modulo `𝔪^k` (`k` in `ν_m` units,
    /// rounded down to whole p-adic digits).
    pub fn clamp_prec(&self, k: i64) -> Self {
        let digits = k.div_euclid(self.level.degree() as i64);
        self.clamp_digits(digits)
    }

    /// Keeps the element modulo `p^digits`.
    pub fn clamp_digits(&self, digits: i64) -> Self {
        if digits >= self.prec_digits() {
            return self.clone();
        }
        if digits <= self.shift {
            return Self::approx_zero(&self.level, digits);
        }
        let rel = (digits - self.shift) as u32;
        Self::from_raw(self.level.clone(), self.shift, self.coeffs.clone(), rel)
    }

    /// Certified congruence `self ≡ other mod 𝔪^k`.
    pub fn congruent(&self, other: &Self, k: i64) -> Result<bool> {
        self.check_level(other)?;
        let avail = self.abs_prec().min(other.abs_prec());
        if k > avail {
            return Err(Error::PrecisionExhausted(format!(
                "congruence modulo 𝔪^{k} asked of elements known modulo 𝔪^{avail}"
            )));
        }
        let d = self.sub(other)?;
        Ok(d.val().lower_bound() >= k)
    }

    /// Residue modulo `𝔪` of `self / λ^ν(self)`, i.e. the leading digit of
    /// the λ-adic expansion. Uses `p ≡ -λ^e mod 𝔪^(e+1)`.
    pub fn leading_residue(&self) -> Result<u32> {
        let v = self.valuation()?;
        let p = self.prime();
        let e = self.degree() as i64;
        let i = (v - e * self.shift) as usize;
        let r = (&self.coeffs[i] % p.big()).to_u32().unwrap();
        // on level 0, p itself is the uniformizer and no sign appears
        if e > 1 && self.shift.rem_euclid(2) == 1 {
            Ok((p.get() - r) % p.get())
        } else {
            Ok(r)
        }
    }

    /// Coordinates in the basis of powers of `zeta_{p^m}`, modulo `p^rel`.
    pub(crate) fn zeta_coords(&self) -> Vec<BigUint> {
        let mut v = self.coeffs.clone();
        if self.rel > 0 {
            taylor_shift(&mut v, false, self.level.p_pow(self.rel));
        }
        v
    }

    /// Inverse of [`Self::zeta_coords`].
    pub(crate) fn from_zeta_coords(level: &Arc<TowerLevel>, shift: i64, mut v: Vec<BigUint>, rel: u32) -> Self {
        if rel == 0 {
            return Self::approx_zero(level, shift);
        }
        taylor_shift(&mut v, true, level.p_pow(rel));
        Self::from_raw(level.clone(), shift, v, rel)
    }

    pub fn to_doc(&self) -> CycloDoc {
        CycloDoc {
            p: self.prime().as_u64(),
            m: self.m(),
            coeffs: self.coeffs().iter().map(PAdicNumber::to_doc).collect(),
        }
    }

    pub fn from_doc(tower: &Tower, doc: &CycloDoc) -> Result<Self> {
        if doc.p != tower.prime().as_u64() {
            return Err(Error::InvalidInput(format!(
                "element over p = {} read into a tower over p = {}",
                doc.p,
                tower.prime()
            )));
        }
        let level = tower.level(doc.m)?;
        let coeffs = doc
            .coeffs
            .iter()
            .map(PAdicNumber::from_doc)
            .collect::<Result<Vec<_>>>()?;
        Self::from_padic_coeffs(&level, &coeffs)
    }
}

/// Product of two coordinate vectors modulo the minimal polynomial and
/// modulo `p^rel`.
fn mul_vectors(level: &TowerLevel, a: &[BigUint], b: &[BigUint], rel: u32) -> Vec<BigUint> {
    let e = level.degree();
    let modulus = level.p_pow(rel);
    let nz_a: Vec<usize> = (0..e).filter(|&i| !a[i].is_zero()).collect();
    let nz_b: Vec<usize> = (0..e).filter(|&i| !b[i].is_zero()).collect();
    // sparse operands (basis vectors, constants) are common
    let (outer, inner, x, y) = if nz_a.len() <= nz_b.len() {
        (nz_a, nz_b, a, b)
    } else {
        (nz_b, nz_a, b, a)
    };
    let prod: Vec<BigUint> = if outer.len() * 4 < e {
        let mut prod = vec![BigUint::zero(); 2 * e - 1];
        for &i in &outer {
            for &j in &inner {
                prod[i + j] += &x[i] * &y[j];
            }
        }
        prod.into_iter().map(|c| c % modulus).collect()
    } else {
        par::map_range(2 * e - 1, |k| {
            let lo = k.saturating_sub(e - 1);
            let hi = k.min(e - 1);
            let mut acc = BigUint::zero();
            for i in lo..=hi {
                let (u, v) = (&x[i], &y[k - i]);
                if !u.is_zero() && !v.is_zero() {
                    acc += u * v;
                }
            }
            acc % modulus
        })
    };
    if e == 1 {
        return prod;
    }
    let high = &prod[e..];
    if high.iter().all(|c| c.is_zero()) {
        return prod[..e].to_vec();
    }
    let rows = level.reduction_rows();
    let nz_high: Vec<usize> = (0..high.len()).filter(|&k| !high[k].is_zero()).collect();
    par::map_range(e, |j| {
        let mut acc = prod[j].clone();
        for &k in &nz_high {
            acc += &high[k] * &rows[k][j];
        }
        acc % modulus
    })
}

/// Structured form: `{p, m, coeffs: [p-adic numbers]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycloDoc {
    pub p: u64,
    pub m: u32,
    pub coeffs: Vec<PAdicDoc>,
}
