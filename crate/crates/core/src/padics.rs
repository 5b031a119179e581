//! Elements of `Q_p` carried at an explicit relative precision.
//!
//! A nonzero element is `p^val * unit` with `unit` a residue modulo
//! `p^relprec` coprime to `p`. Zero comes in two flavours: the exact zero,
//! and a zero known only modulo `p^abs` (what cancellation produces). The
//! checked arithmetic methods refuse to hand back the latter.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An odd prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u32);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || p > u32::MAX as u64 || p.is_multiple_of(2) {
            return Err(Error::InvalidPrime(p));
        }
        let mut d = 3u64;
        while d * d <= p {
            if p.is_multiple_of(d) {
                return Err(Error::InvalidPrime(p));
            }
            d += 2;
        }
        Ok(Prime(p as u32))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_u64(self) -> u64 {
        self.0 as u64
    }

    pub fn big(self) -> BigUint {
        BigUint::from(self.0)
    }

    pub fn pow(self, k: u32) -> BigUint {
        self.big().pow(k)
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;
    fn try_from(p: u64) -> Result<Self> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.as_u64()
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// p-adic valuation of a nonzero big integer, together with the cofactor.
pub(crate) fn split_p_power(p: Prime, n: &BigUint) -> (u32, BigUint) {
    debug_assert!(!n.is_zero());
    let pb = p.big();
    let mut k = 0;
    let mut n = n.clone();
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return (k, n);
        }
        n = q;
        k += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PAdicNumber {
    p: Prime,
    /// `None` is the exact zero. For an approximate zero this is the
    /// absolute precision and `relprec == 0`.
    val: Option<i64>,
    unit: BigUint,
    relprec: u32,
}

impl PAdicNumber {
    pub fn zero(p: Prime) -> Self {
        PAdicNumber {
            p,
            val: None,
            unit: BigUint::zero(),
            relprec: 0,
        }
    }

    /// Zero known only modulo `p^abs`.
    pub fn approx_zero(p: Prime, abs: i64) -> Self {
        PAdicNumber {
            p,
            val: Some(abs),
            unit: BigUint::zero(),
            relprec: 0,
        }
    }

    pub fn one(p: Prime, relprec: u32) -> Self {
        Self::from_i64(p, 1, relprec)
    }

    pub fn from_i64(p: Prime, n: i64, relprec: u32) -> Self {
        Self::from_bigint(p, &BigInt::from(n), relprec)
    }

    /// `n` read at relative precision `relprec`. Zero maps to the exact zero.
    pub fn from_bigint(p: Prime, n: &BigInt, relprec: u32) -> Self {
        if n.is_zero() {
            return Self::zero(p);
        }
        let (v, cof) = split_p_power(p, n.magnitude());
        let modulus = p.pow(relprec);
        let mut unit = cof % &modulus;
        if n.sign() == Sign::Minus {
            unit = (&modulus - unit) % &modulus;
        }
        Self::from_parts(p, v as i64, unit, relprec)
    }

    /// `p^val * unit` with `unit` read modulo `p^relprec`. `unit` must be
    /// coprime to `p`; a zero `relprec` gives an approximate zero.
    pub fn from_parts(p: Prime, val: i64, unit: BigUint, relprec: u32) -> Self {
        if relprec == 0 {
            return Self::approx_zero(p, val);
        }
        let unit = unit % p.pow(relprec);
        debug_assert!(!(&unit % p.big()).is_zero(), "unit divisible by p");
        PAdicNumber {
            p,
            val: Some(val),
            unit,
            relprec,
        }
    }

    /// Element `p^shift * n` known modulo `p^abs`, normalizing the p-content of `n`.
    pub(crate) fn from_scaled(p: Prime, shift: i64, n: &BigUint, abs: i64) -> Self {
        if abs <= shift {
            return Self::approx_zero(p, abs);
        }
        let width = (abs - shift) as u32;
        let n = n % p.pow(width);
        if n.is_zero() {
            return Self::approx_zero(p, abs);
        }
        let (k, cof) = split_p_power(p, &n);
        Self::from_parts(p, shift + k as i64, cof, width - k)
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    /// Valuation; `None` for the exact zero. An approximate zero reports
    /// its absolute precision as a lower bound through [`Self::abs_prec`]
    /// and `None` here would be misleading, so callers should check
    /// [`Self::is_approx_zero`] first.
    pub fn valuation(&self) -> Option<i64> {
        self.val
    }

    pub fn relprec(&self) -> u32 {
        self.relprec
    }

    pub fn unit(&self) -> &BigUint {
        &self.unit
    }

    /// Absolute precision; `None` for the exact zero.
    pub fn abs_prec(&self) -> Option<i64> {
        self.val.map(|v| v + self.relprec as i64)
    }

    pub fn is_exact_zero(&self) -> bool {
        self.val.is_none()
    }

    pub fn is_approx_zero(&self) -> bool {
        self.val.is_some() && self.relprec == 0
    }

    /// Zero at its own precision (exact or approximate).
    pub fn is_zero(&self) -> bool {
        self.relprec == 0
    }

    pub fn is_integral(&self) -> bool {
        self.is_zero() || self.val.unwrap() >= 0
    }

    /// Base-p digits of the unit, least significant first.
    pub fn digits(&self) -> Vec<u32> {
        let pb = self.p.big();
        let mut out = Vec::with_capacity(self.relprec as usize);
        let mut n = self.unit.clone();
        for _ in 0..self.relprec {
            let (q, r) = n.div_rem(&pb);
            out.push(r.to_u32().unwrap());
            n = q;
        }
        out
    }

    fn check_same_prime(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::InvalidInput(format!("mixing primes {} and {}", self.p, other.p)));
        }
        Ok(())
    }

    fn checked(self) -> Result<Self> {
        if self.is_approx_zero() {
            Err(Error::PrecisionExhausted(format!(
                "result has no significant digits (known mod {}^{})",
                self.p,
                self.val.unwrap()
            )))
        } else {
            Ok(self)
        }
    }

    /// Integer representative `p^(val - base) * unit` for `val >= base`.
    fn scaled_to(&self, base: i64) -> BigUint {
        match self.val {
            Some(v) if self.relprec > 0 => &self.unit * self.p.pow((v - base) as u32),
            _ => BigUint::zero(),
        }
    }

    pub(crate) fn add_raw(&self, other: &Self) -> Self {
        let p = self.p;
        if self.is_exact_zero() {
            return other.clone();
        }
        if other.is_exact_zero() {
            return self.clone();
        }
        let abs = self.abs_prec().unwrap().min(other.abs_prec().unwrap());
        let base = self.val.unwrap().min(other.val.unwrap());
        if abs <= base {
            return Self::approx_zero(p, abs);
        }
        let sum = self.scaled_to(base) + other.scaled_to(base);
        Self::from_scaled(p, base, &sum, abs)
    }

    pub(crate) fn neg_raw(&self) -> Self {
        if self.relprec == 0 {
            return self.clone();
        }
        let m = self.p.pow(self.relprec);
        PAdicNumber {
            unit: (&m - &self.unit) % &m,
            ..self.clone()
        }
    }

    pub(crate) fn mul_raw(&self, other: &Self) -> Self {
        let p = self.p;
        if self.is_exact_zero() || other.is_exact_zero() {
            return Self::zero(p);
        }
        let v = self.val.unwrap() + other.val.unwrap();
        if self.is_approx_zero() || other.is_approx_zero() {
            return Self::approx_zero(p, v);
        }
        let rel = self.relprec.min(other.relprec);
        Self::from_parts(p, v, &self.unit * &other.unit, rel)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        self.add_raw(other).checked()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        self.add_raw(&other.neg_raw()).checked()
    }

    pub fn neg(&self) -> Self {
        self.neg_raw()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        self.mul_raw(other).checked()
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByApparentZero);
        }
        let m = self.p.pow(self.relprec);
        let unit = self.unit.modinv(&m).expect("unit is coprime to p by construction");
        Ok(Self::from_parts(self.p, -self.val.unwrap(), unit, self.relprec))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        let inv = other.inv()?;
        self.mul_raw(&inv).checked()
    }

    pub fn pow(&self, n: i64) -> Result<Self> {
        if n < 0 {
            return self.inv()?.pow(-n);
        }
        if self.is_exact_zero() {
            return Ok(if n == 0 {
                Self::one(self.p, crate::DEFAULT_PRECISION)
            } else {
                self.clone()
            });
        }
        if self.is_approx_zero() {
            return Err(Error::PrecisionExhausted("power of an approximate zero".into()));
        }
        let m = self.p.pow(self.relprec);
        let unit = self.unit.modpow(&BigUint::from(n as u64), &m);
        Ok(Self::from_parts(self.p, self.val.unwrap() * n, unit, self.relprec))
    }

    /// The same element read at a different relative precision. Raising the
    /// precision pads with zero digits, i.e. treats the stored unit as exact.
    pub fn with_relprec(&self, relprec: u32) -> Self {
        match self.val {
            None => self.clone(),
            Some(v) if self.relprec == 0 => Self::approx_zero(self.p, v),
            Some(v) => Self::from_parts(self.p, v, self.unit.clone(), relprec),
        }
    }

    /// Congruence modulo `p^k`. `k` may not exceed the absolute precision
    /// of either operand.
    pub fn congruent(&self, other: &Self, k: i64) -> Result<bool> {
        self.check_same_prime(other)?;
        for x in [self, other] {
            if let Some(a) = x.abs_prec() {
                if k > a {
                    return Err(Error::PrecisionExhausted(format!(
                        "congruence mod {}^{k} asked of an element known mod {}^{a}",
                        self.p, self.p
                    )));
                }
            }
        }
        let d = self.add_raw(&other.neg_raw());
        Ok(match d.val {
            None => true,
            Some(v) => d.relprec == 0 || v >= k,
        })
    }

    /// Residue modulo p of an integral element.
    pub fn residue(&self) -> Result<u32> {
        match self.val {
            None => Ok(0),
            Some(v) if v > 0 => Ok(0),
            Some(v) if self.relprec == 0 => {
                Err(Error::PrecisionExhausted(format!("residue of a zero known mod p^{v}")))
            }
            Some(0) => Ok((&self.unit % self.p.big()).to_u32().unwrap()),
            Some(_) => Err(Error::InvalidInput("residue of a non-integral element".into())),
        }
    }

    /// Integer representative in `[0, p^abs)` for integral elements with a
    /// finite absolute precision.
    pub fn to_biguint(&self) -> Option<BigUint> {
        match self.val {
            None => Some(BigUint::zero()),
            Some(v) if v < 0 => None,
            Some(_) if self.relprec == 0 => Some(BigUint::zero()),
            Some(v) => Some(&self.unit * self.p.pow(v as u32)),
        }
    }

    /// Signed representative of smallest absolute value, when integral.
    pub fn to_bigint_centered(&self) -> Option<BigInt> {
        let n = self.to_biguint()?;
        let abs = match self.abs_prec() {
            None => return Some(BigInt::zero()),
            Some(a) => a,
        };
        let m = BigInt::from(self.p.pow(abs as u32));
        let n = BigInt::from(n);
        Some(if &n + &n > m { n - m } else { n })
    }

    pub fn to_doc(&self) -> PAdicDoc {
        PAdicDoc {
            p: self.p.as_u64(),
            val: self.val,
            digits: self.digits(),
            relprec: self.relprec,
        }
    }

    pub fn from_doc(doc: &PAdicDoc) -> Result<Self> {
        let p = Prime::new(doc.p)?;
        match doc.val {
            None => {
                if doc.relprec != 0 || !doc.digits.is_empty() {
                    return Err(Error::Parse("exact zero carries digits".into()));
                }
                Ok(Self::zero(p))
            }
            Some(v) => {
                if doc.digits.len() != doc.relprec as usize {
                    return Err(Error::Parse(format!(
                        "{} digits for relative precision {}",
                        doc.digits.len(),
                        doc.relprec
                    )));
                }
                if doc.relprec == 0 {
                    return Ok(Self::approx_zero(p, v));
                }
                let unit = digits_to_biguint(p, &doc.digits)?;
                if doc.digits[0] == 0 {
                    return Err(Error::Parse("leading digit of a unit must be nonzero".into()));
                }
                Ok(Self::from_parts(p, v, unit, doc.relprec))
            }
        }
    }
}

fn digits_to_biguint(p: Prime, digits: &[u32]) -> Result<BigUint> {
    let pb = p.big();
    let mut n = BigUint::zero();
    for &d in digits.iter().rev() {
        if d >= p.get() {
            return Err(Error::Parse(format!("digit {d} out of range for p = {p}")));
        }
        n = n * &pb + BigUint::from(d);
    }
    Ok(n)
}

/// Structured form of a [`PAdicNumber`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PAdicDoc {
    pub p: u64,
    pub val: Option<i64>,
    pub digits: Vec<u32>,
    pub relprec: u32,
}

/// Renders as `p^v * (d0 + d1*p + d2*p^2 + ...) [relprec]`; the exact zero
/// is `p^inf * (0) [0]` and a zero known mod `p^k` is `p^k * (0) [0]`.
impl fmt::Display for PAdicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.p;
        match self.val {
            None => write!(f, "{p}^inf * (0) [0]"),
            Some(v) if self.relprec == 0 => write!(f, "{p}^{v} * (0) [0]"),
            Some(v) => {
                write!(f, "{p}^{v} * (")?;
                for (i, d) in self.digits().iter().enumerate() {
                    match i {
                        0 => write!(f, "{d}")?,
                        1 => write!(f, " + {d}*{p}")?,
                        _ => write!(f, " + {d}*{p}^{i}")?,
                    }
                }
                write!(f, ") [{}]", self.relprec)
            }
        }
    }
}

impl FromStr for PAdicNumber {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("{what} in {s:?}"));
        let s = s.trim();
        let (head, rest) = s.split_once('*').ok_or_else(|| bad("missing '*'"))?;
        let (pstr, vstr) = head.trim().split_once('^').ok_or_else(|| bad("missing '^'"))?;
        let p = Prime::new(pstr.trim().parse().map_err(|_| bad("bad prime"))?)?;
        let rest = rest.trim();
        let open = rest.find('(').ok_or_else(|| bad("missing '('"))?;
        let close = rest.rfind(')').ok_or_else(|| bad("missing ')'"))?;
        let body = &rest[open + 1..close];
        let tail = rest[close + 1..].trim();
        let relprec: u32 = tail
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| bad("missing precision"))?
            .trim()
            .parse()
            .map_err(|_| bad("bad precision"))?;
        let vstr = vstr.trim();
        if vstr == "inf" {
            if relprec != 0 || body.trim() != "0" {
                return Err(bad("malformed exact zero"));
            }
            return Ok(Self::zero(p));
        }
        let v: i64 = vstr.parse().map_err(|_| bad("bad valuation"))?;
        if relprec == 0 {
            if body.trim() != "0" {
                return Err(bad("approximate zero with digits"));
            }
            return Ok(Self::approx_zero(p, v));
        }
        let mut digits = Vec::new();
        for (i, term) in body.split('+').enumerate() {
            let term = term.trim();
            let d = match i {
                0 => term,
                _ => {
                    let (d, power) = term.split_once('*').ok_or_else(|| bad("bad term"))?;
                    let expect = if i == 1 { format!("{p}") } else { format!("{p}^{i}") };
                    if power.trim() != expect {
                        return Err(bad("digit out of place"));
                    }
                    d
                }
            };
            digits.push(d.trim().parse::<u32>().map_err(|_| bad("bad digit"))?);
        }
        Self::from_doc(&PAdicDoc {
            p: p.as_u64(),
            val: Some(v),
            digits,
            relprec,
        })
    }
}

/// Horner evaluation of `coeffs[0] + coeffs[1] x + ...` without precision checks.
fn eval_poly(coeffs: &[PAdicNumber], x: &PAdicNumber) -> PAdicNumber {
    let p = x.prime();
    let mut acc = PAdicNumber::zero(p);
    for c in coeffs.iter().rev() {
        acc = acc.mul_raw(x).add_raw(c);
    }
    acc
}

fn derivative(coeffs: &[PAdicNumber]) -> Vec<PAdicNumber> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| {
            let k = PAdicNumber::from_i64(c.prime(), i as i64, c.relprec().max(1) + 64);
            c.mul_raw(&k)
        })
        .collect()
}

/// Newton lifting of a simple approximate root of `f` (coefficients from
/// the constant term up) to absolute precision `prec`.
pub fn hensel_lift(f: &[PAdicNumber], x0: &PAdicNumber, prec: u32) -> Result<PAdicNumber> {
    if f.is_empty() {
        return Err(Error::InvalidInput("empty polynomial".into()));
    }
    let p = x0.prime();
    let df = derivative(f);
    let fx = eval_poly(f, x0);
    let dfx = eval_poly(&df, x0);
    if dfx.is_zero() {
        return Err(Error::HenselHypothesisFailed {
            value_val: fx.valuation().unwrap_or(i64::MAX),
            deriv_val: dfx.valuation().unwrap_or(i64::MAX),
        });
    }
    let dv = dfx.valuation().unwrap();
    if !fx.is_zero() {
        let fv = fx.valuation().unwrap();
        if fv <= 2 * dv {
            return Err(Error::HenselHypothesisFailed {
                value_val: fv,
                deriv_val: dv,
            });
        }
    }
    // Quadratic convergence: every step at least doubles the agreement
    // beyond 2 v(f'), so a logarithmic number of rounds suffices.
    let target = prec as i64;
    let mut x = match x0.valuation() {
        Some(v) if !x0.is_zero() => x0.with_relprec((target - v).max(1) as u32),
        _ => x0.clone(),
    };
    for _ in 0..(2 * (64 - (prec as u64).leading_zeros()) + 8) {
        let fx = eval_poly(f, &x);
        if fx.is_zero() || fx.valuation().unwrap() >= target + dv {
            return Ok(x);
        }
        let dfx = eval_poly(&df, &x);
        let step = fx.mul_raw(&dfx.inv()?);
        x = x.add_raw(&step.neg_raw());
        if let Some(v) = x.valuation() {
            if !x.is_zero() {
                x = x.with_relprec((target - v).max(1) as u32);
            }
        }
    }
    Err(Error::PrecisionExhausted(format!(
        "Newton iteration did not settle to {p}^{prec}"
    )))
}

/// Teichmüller representative of a nonzero residue `r` modulo `p`, to
/// absolute precision `prec`: the root of `x^(p-1) - 1` congruent to `r`.
pub fn teichmuller(p: Prime, r: u64, prec: u32) -> Result<PAdicNumber> {
    let r = r % p.as_u64();
    if r == 0 {
        return Err(Error::InvalidInput("Teichmüller lift of zero residue".into()));
    }
    let work = prec + 2;
    let mut f = vec![PAdicNumber::zero(p); p.get() as usize - 1];
    f[0] = PAdicNumber::from_i64(p, -1, work);
    f.push(PAdicNumber::one(p, work));
    let x0 = PAdicNumber::from_i64(p, r as i64, work);
    Ok(hensel_lift(&f, &x0, prec)?.with_relprec(prec))
}

/// Teichmüller lift of `r` as an integer in `[0, p^prec)`; zero maps to zero.
pub fn teichmuller_int(p: Prime, r: u64, prec: u32) -> BigUint {
    let r = r % p.as_u64();
    if r == 0 {
        return BigUint::zero();
    }
    // x -> x^p converges to the lift; p^(prec) iterations of digits suffice
    // after `prec` rounds since each round gains a digit.
    let m = p.pow(prec);
    let mut x = BigUint::from(r);
    let pe = BigUint::from(p.get());
    for _ in 0..prec {
        x = x.modpow(&pe, &m);
    }
    x
}
