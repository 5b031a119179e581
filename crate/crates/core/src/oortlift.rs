//! Lifting the `Z/p` cover `T^p = 1 + λ^p W(Z) / Z^c` of the disc along
//! the tower: the generic different over `R1`, the specialized Kummer
//! units `u_m`, their conductors, and the p-th power relation between
//! consecutive levels that makes the specializations norm-compatible.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::cyclotomic::{CycloElement, Tower, Valuation, MAX_LEVEL};
use crate::error::{Error, Result};
use crate::padics::{teichmuller, Prime};
use crate::powerseries::{is_eisenstein, CoeffRing, PowerSeriesElt, Truncation};
use crate::ramification::{r_closed_form, r_of_level, Jumps};

/// Deepest level at which [`verify`] runs the explicit cross-check (p = 3).
pub const CROSS_CHECK_LEVEL: u32 = 2;

/// Safety margin, in p-adic digits, demanded on top of the bound of the
/// p-th power check.
pub const PTH_POWER_MARGIN: i64 = 5;

/// Deepest level whose `r(m)` is computed from the filtration rather
/// than from the closed form.
const R_FILTRATION_LEVEL: u32 = 3;

/// The cover `T^p = 1 + λ^p W(Z) / Z^c` with `W ∈ Z_p[Z]`.
#[derive(Debug, Clone)]
pub struct KummerCoverSpec {
    tower: Tower,
    c: i64,
    w: PowerSeriesElt,
}

impl KummerCoverSpec {
    /// Requires `gcd(c, p) = 1`, `W(0) = 1`, Teichmüller coefficients and
    /// no terms of degree `1..2c` (index at least `2c`).
    pub fn new(tower: &Tower, c: i64, w: PowerSeriesElt) -> Result<Self> {
        let p = tower.prime().get() as i64;
        if c < 1 || c.gcd(&p) != 1 {
            return Err(Error::InvalidInput(format!(
                "c = {c} must be positive and prime to p = {p}"
            )));
        }
        if w.ring() != CoeffRing::Zp || w.truncation() != Truncation::Exact {
            return Err(Error::InvalidInput("W must be a polynomial over Z_p".into()));
        }
        let one = CycloElement::one(&tower.level(0)?);
        let w0 = w.coeff(0).unwrap_or_else(|| CycloElement::zero(&one.level().clone()));
        if !w0.congruent(&one, w0.abs_prec().min(one.abs_prec()))? {
            return Err(Error::InvalidInput("W must have constant term 1".into()));
        }
        for (k, b) in w.coeffs().iter().enumerate().skip(1) {
            if b.is_zero() {
                continue;
            }
            if (k as i64) < 2 * c {
                return Err(Error::InvalidInput(format!(
                    "W has a term of degree {k}; its index must be at least 2c = {}",
                    2 * c
                )));
            }
            let bp = b.pow(p)?;
            if !bp.congruent(b, b.abs_prec().min(bp.abs_prec()))? || b.valuation()? != 0 {
                return Err(Error::InvalidInput(format!(
                    "coefficient of Z^{k} is not a Teichmüller unit"
                )));
            }
        }
        Ok(KummerCoverSpec {
            tower: tower.clone(),
            c,
            w,
        })
    }

    /// No validation; lets tests feed degenerate covers to the checks.
    pub fn unchecked(tower: &Tower, c: i64, w: PowerSeriesElt) -> Self {
        KummerCoverSpec {
            tower: tower.clone(),
            c,
            w,
        }
    }

    /// `W = Σ τ(r_k) Z^k` from residues.
    pub fn from_residues(tower: &Tower, c: i64, terms: &[(usize, i64)]) -> Result<Self> {
        let p = tower.prime();
        let lv = tower.level(0)?;
        let deg = terms.iter().map(|&(k, _)| k).max().unwrap_or(0);
        let mut coeffs = vec![CycloElement::zero(&lv); deg + 1];
        for &(k, r) in terms {
            let r = r.rem_euclid(p.get() as i64) as u64;
            if r != 0 {
                let t = teichmuller(p, r, tower.precision())?;
                coeffs[k] = coeffs[k].add(&CycloElement::from_padic(&lv, &t))?;
            }
        }
        let w = PowerSeriesElt::new(tower, CoeffRing::Zp, coeffs, Truncation::Exact)?;
        Self::new(tower, c, w)
    }

    /// Parses `W` from text such as `1 + Z^4` or `1 - 2*Z^6`.
    pub fn from_text(tower: &Tower, c: i64, text: &str) -> Result<Self> {
        Self::from_residues(tower, c, &parse_w(text)?)
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn prime(&self) -> Prime {
        self.tower.prime()
    }

    pub fn c(&self) -> i64 {
        self.c
    }

    pub fn w(&self) -> &PowerSeriesElt {
        &self.w
    }

    fn p(&self) -> i64 {
        self.tower.prime().get() as i64
    }
}

impl fmt::Display for KummerCoverSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, b) in self.w.coeffs().iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            let r = b.leading_residue().unwrap_or(0);
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (k, r) {
                (0, r) => write!(f, "{r}")?,
                (k, 1) => write!(f, "Z^{k}")?,
                (k, r) => write!(f, "{r}*Z^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Parses a polynomial in `Z` with integer coefficients into
/// `(degree, coefficient)` pairs, merged and sorted by degree.
pub fn parse_w(text: &str) -> Result<Vec<(usize, i64)>> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let mut terms: BTreeMap<usize, i64> = BTreeMap::new();
    let mut rest = s.as_str();
    while !rest.is_empty() {
        let (sign, body) = match rest.as_bytes()[0] {
            b'+' => (1, &rest[1..]),
            b'-' => (-1, &rest[1..]),
            _ => (1, rest),
        };
        let end = body.find(['+', '-']).unwrap_or(body.len());
        let term = &body[..end];
        rest = &body[end..];
        let (coef, deg) = parse_term(term)?;
        *terms.entry(deg).or_insert(0) += sign * coef;
    }
    Ok(terms.into_iter().filter(|&(_, a)| a != 0).collect())
}

fn parse_term(term: &str) -> Result<(i64, usize)> {
    let bad = || Error::Parse(format!("cannot read term '{term}'"));
    if term.is_empty() {
        return Err(bad());
    }
    let Some(zpos) = term.find(['Z', 'z']) else {
        return Ok((term.parse().map_err(|_| bad())?, 0));
    };
    let coef = match term[..zpos].trim_end_matches('*') {
        "" => 1,
        c => c.parse().map_err(|_| bad())?,
    };
    let deg = match &term[zpos + 1..] {
        "" => 1,
        d => d.strip_prefix('^').ok_or_else(bad)?.parse().map_err(|_| bad())?,
    };
    Ok((coef, deg))
}

/// Ramification of the generic cover over `R1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenericDifferent {
    pub weierstrass_degree: usize,
    pub branch_count: usize,
    pub different: i64,
}

/// Degree of the branch divisor `Z^c + W λ^p` over `R1` (it must be `c`),
/// plus the branch point at `Z = 0`, each with different exponent `p - 1`.
pub fn generic_different(spec: &KummerCoverSpec) -> Result<GenericDifferent> {
    let tower = &spec.tower;
    let lam = CycloElement::lambda(&tower.level(1)?);
    let lam_p = lam.pow(spec.p())?;
    let w1 = lift_to_r1(spec)?;
    let g = PowerSeriesElt::monomial(tower, CoeffRing::R1, spec.c as usize).add(&w1.scale(&lam_p)?)?;
    let d = g.weierstrass_degree()?;
    if d as i64 != spec.c {
        return Err(Error::WeierstrassDegreeMismatch {
            expected: spec.c as usize,
            found: d,
        });
    }
    let branch_count = d + 1;
    Ok(GenericDifferent {
        weierstrass_degree: d,
        branch_count,
        different: branch_count as i64 * (spec.p() - 1),
    })
}

fn lift_to_r1(spec: &KummerCoverSpec) -> Result<PowerSeriesElt> {
    let coeffs = spec
        .w
        .coeffs()
        .iter()
        .map(|b| b.embed_up(&spec.tower, 1))
        .collect::<Result<Vec<_>>>()?;
    PowerSeriesElt::new(&spec.tower, CoeffRing::R1, coeffs, Truncation::Exact)
}

/// `p^m`, the valuation of `λ^p` in level `m`.
fn lambda_p_index(p: i64, m: u32) -> i64 {
    p.pow(m)
}

fn check_level(spec: &KummerCoverSpec, m: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::LevelTooSmall {
            level: 0,
            reason: "specializations live in levels >= 1".into(),
        });
    }
    if lambda_p_index(spec.p(), m) <= spec.c {
        return Err(Error::LevelTooSmall {
            level: m,
            reason: format!("ν_m(λ^p) = {} does not exceed c = {}", spec.p().pow(m), spec.c),
        });
    }
    Ok(())
}

/// `A_m = 1 + λ^p W(π) / π^c` at `π = λ_m`.
fn a_unit(spec: &KummerCoverSpec, m: u32) -> Result<CycloElement> {
    let tower = &spec.tower;
    let lv = tower.level(m)?;
    let pi = CycloElement::lambda(&lv);
    let lam_p = CycloElement::lambda(&tower.level(1)?)
        .pow(spec.p())?
        .embed_up(tower, m)?;
    let w = spec.w.eval(&pi)?;
    CycloElement::one(&lv).add(&lam_p.mul(&w)?.mul(&pi.pow(-spec.c)?)?)
}

/// `u_m = 1 + λ^p W(π_m) π_m^{-c}`, a principal unit of index
/// `p^m - c` when `W(0)` is a unit.
pub fn specialize_unit(spec: &KummerCoverSpec, m: u32) -> Result<CycloElement> {
    check_level(spec, m)?;
    a_unit(spec, m)
}

/// Conductor of `L^m(u^{1/p}) | L^m`. Raises the index of `u - 1` by
/// multiplying with p-th powers `(1 - τ λ^s)^p` until it is prime to `p`.
pub fn kummer_conductor(u: &CycloElement) -> Result<i64> {
    let lv = u.level().clone();
    let p = u.prime();
    let bound = lambda_p_index(p.get() as i64, u.m());
    let one = CycloElement::one(&lv);
    let lam = CycloElement::lambda(&lv);
    let mut u = u.clone();
    loop {
        let d = u.sub(&one)?;
        let t = match d.val() {
            Valuation::AtLeast(k) if k > bound => return Err(Error::IsPthPower),
            Valuation::AtLeast(k) => {
                return Err(Error::PrecisionExhausted(format!("u - 1 vanishes modulo 𝔪^{k} only")))
            }
            Valuation::Finite(t) => t,
        };
        if t <= 0 {
            return Err(Error::InvalidInput("not a principal unit".into()));
        }
        if t > bound {
            return Err(Error::IsPthPower);
        }
        if t == bound {
            return Err(Error::ReductionStuck(t));
        }
        if t % p.get() as i64 != 0 {
            return Ok(bound - t + 1);
        }
        let r = d.leading_residue()?;
        let tau = CycloElement::from_padic(&lv, &teichmuller(p, r as u64, lv.precision())?);
        let w = one.sub(&tau.mul(&lam.pow(t / p.get() as i64)?)?)?;
        u = u.mul(&w.pow(p.get() as i64)?)?;
    }
}

/// Ramification of the specialized cover at level `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpecialDifferent {
    pub m: u32,
    pub unit_index: i64,
    pub conductor: i64,
    pub different: i64,
}

pub fn special_different(spec: &KummerCoverSpec, m: u32) -> Result<SpecialDifferent> {
    let u = specialize_unit(spec, m)?;
    let one = CycloElement::one(u.level());
    let unit_index = u.sub(&one)?.valuation()?;
    let conductor = kummer_conductor(&u)?;
    Ok(SpecialDifferent {
        m,
        unit_index,
        conductor,
        different: conductor * (spec.p() - 1),
    })
}

/// Shape of the equation for `X = λ / (T - 1)` at level `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EisensteinCheck {
    pub m: u32,
    pub constant_valuation: i64,
    pub single_slope: bool,
    pub eisenstein: bool,
    pub ok: bool,
}

/// Substitutes `T = 1 + λ/X` into `T^p = u_m`, giving the monic
/// `X^p + Σ_{j<p} C(p,j) λ^{p-j} / (1 - u) X^j`. The specialization is a
/// totally ramified degree `p` extension when the Newton polygon is one
/// segment of slope `-ν(a_0)/p` with `ν(a_0)` prime to `p`; for `c = 1`
/// the polynomial is Eisenstein.
pub fn eisenstein_specialization_check(spec: &KummerCoverSpec, m: u32) -> Result<EisensteinCheck> {
    let u = specialize_unit(spec, m)?;
    let tower = &spec.tower;
    let lv = u.level().clone();
    let p = spec.p();
    let lam = CycloElement::lambda(&tower.level(1)?).embed_up(tower, m)?;
    let one = CycloElement::one(&lv);
    let denom = one.sub(&u)?;
    let dinv = match denom.val() {
        Valuation::Finite(_) => denom.inv()?,
        Valuation::AtLeast(_) => return Err(Error::IsPthPower),
    };
    let mut q = Vec::with_capacity(p as usize + 1);
    let mut binom = 1i64;
    for j in 0..p {
        // binom = C(p, j)
        q.push(lam.pow(p - j)?.mul(&dinv)?.mul_int(binom));
        binom = binom * (p - j) / (j + 1);
    }
    q.push(one);
    let v0 = q[0].valuation()?;
    let single_slope = v0 > 0
        && q[1..p as usize]
            .iter()
            .enumerate()
            .all(|(k, a)| p * a.val().lower_bound() >= (p - 1 - k as i64) * v0);
    let eisenstein = is_eisenstein(&q)?;
    let mut ok = single_slope && v0.gcd(&p) == 1;
    if spec.c == 1 {
        ok &= eisenstein;
    }
    Ok(EisensteinCheck {
        m,
        constant_valuation: v0,
        single_slope,
        eisenstein,
        ok,
    })
}

/// Outcome of a p-th power check: `ν(Q - 1)` against the bound `p^top`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PthPowerCheck {
    pub m: u32,
    pub top: u32,
    /// `ν(Q - 1)`, or its certified lower bound when `exact` is false.
    pub index: i64,
    pub exact: bool,
    pub bound: i64,
    pub ok: bool,
}

fn c_factor(spec: &KummerCoverSpec, m: u32) -> Result<CycloElement> {
    let tower = &spec.tower;
    let lv = tower.level(m)?;
    let lam = CycloElement::lambda(&tower.level(1)?).embed_up(tower, m)?;
    let pi = CycloElement::lambda(&lv);
    CycloElement::one(&lv).sub(&lam.mul(&pi.pow(-spec.c)?)?)
}

fn ensure_margin(spec: &KummerCoverSpec, top: u32) -> Result<i64> {
    let lv = spec.tower.level(top)?;
    let e = lv.degree() as i64;
    let bound = lambda_p_index(spec.p(), top);
    let digits = spec.tower.precision() as i64;
    if digits * e <= bound + PTH_POWER_MARGIN * e {
        return Err(Error::PrecisionExhausted(format!(
            "{digits} digits do not clear ν = {bound} by {PTH_POWER_MARGIN} digits at level {top}"
        )));
    }
    Ok(bound)
}

fn judge(m: u32, top: u32, q: &CycloElement, bound: i64) -> Result<PthPowerCheck> {
    let d = q.sub(&CycloElement::one(q.level()))?;
    let (index, exact) = match d.val() {
        Valuation::Finite(v) => (v, true),
        Valuation::AtLeast(k) => (k.min(d.abs_prec()), false),
    };
    if !exact && index <= bound {
        return Err(Error::PrecisionExhausted(format!(
            "Q - 1 vanishes modulo 𝔪^{index} only"
        )));
    }
    Ok(PthPowerCheck {
        m,
        top,
        index,
        exact,
        bound,
        ok: index > bound,
    })
}

/// `Q = A_m B_{m+1}^{-1} (1 - λ π_{m+1}^{-c})^p` in level `m + 1`; the
/// cover at level `m` descends from `m + 1` when `ν(Q - 1) > p^{m+1}`.
pub fn pth_power_lemma_check(spec: &KummerCoverSpec, m: u32) -> Result<PthPowerCheck> {
    pth_power_lemma_check_with_exponent(spec, m, spec.p())
}

/// The same check with the last factor raised to `exponent`; anything
/// other than `p` should fail.
pub fn pth_power_lemma_check_with_exponent(spec: &KummerCoverSpec, m: u32, exponent: i64) -> Result<PthPowerCheck> {
    check_level(spec, m)?;
    let top = m + 1;
    let bound = ensure_margin(spec, top)?;
    let a = a_unit(spec, m)?.embed_up(&spec.tower, top)?;
    let b = a_unit(spec, top)?;
    let q = a.div(&b)?.mul(&c_factor(spec, top)?.pow(exponent)?)?;
    judge(m, top, &q, bound)
}

/// Two steps at once: `A_m B_{m+2}^{-1} (C_{m+1} C_{m+2})^p` in level `m + 2`.
pub fn pth_power_transitivity_check(spec: &KummerCoverSpec, m: u32) -> Result<PthPowerCheck> {
    check_level(spec, m)?;
    let top = m + 2;
    let bound = ensure_margin(spec, top)?;
    let tower = &spec.tower;
    let a = a_unit(spec, m)?.embed_up(tower, top)?;
    let b = a_unit(spec, top)?;
    let c1 = c_factor(spec, m + 1)?.embed_up(tower, top)?;
    let c2 = c_factor(spec, top)?;
    let q = a.div(&b)?.mul(&c1.mul(&c2)?.pow(spec.p())?)?;
    judge(m, top, &q, bound)
}

/// Ramification of `M = L^m[θ]/(θ^p - u_m)` computed inside `M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossCheck {
    pub m: u32,
    /// `i_M(σ_k)` for `σ_k: θ -> ζ^k θ`, `k = 1..p-1`.
    pub i_values: Vec<i64>,
    pub conductor: i64,
    pub different: i64,
}

/// `L^m[θ]/(θ^p - u)`, elements stored by their `θ`-coordinates.
struct KummerAlgebra {
    p: usize,
    u: CycloElement,
    zeta: CycloElement,
}

impl KummerAlgebra {
    fn mul(&self, a: &[CycloElement], b: &[CycloElement]) -> Result<Vec<CycloElement>> {
        let lv = self.u.level();
        let mut out = vec![CycloElement::zero(lv); self.p];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let mut t = x.mul(y)?;
                let k = i + j;
                if k >= self.p {
                    t = t.mul(&self.u)?;
                }
                out[k % self.p] = out[k % self.p].add(&t)?;
            }
        }
        Ok(out)
    }

    /// `σ_k`: `θ -> ζ^k θ`.
    fn conj(&self, a: &[CycloElement], k: usize) -> Result<Vec<CycloElement>> {
        let zk = self.zeta.pow(k as i64)?;
        let mut f = CycloElement::one(self.u.level());
        a.iter()
            .map(|x| {
                let y = x.mul(&f)?;
                f = f.mul(&zk)?;
                Ok(y)
            })
            .collect()
    }

    fn norm(&self, a: &[CycloElement]) -> Result<CycloElement> {
        let mut acc = a.to_vec();
        for k in 1..self.p {
            acc = self.mul(&acc, &self.conj(a, k)?)?;
        }
        Ok(acc.swap_remove(0))
    }

    fn scalar(&self, x: CycloElement) -> Vec<CycloElement> {
        let mut v = vec![CycloElement::zero(self.u.level()); self.p];
        v[0] = x;
        v
    }

    /// `ζ^k θ - 1`.
    fn shifted_theta_minus_one(&self, k: usize) -> Result<Vec<CycloElement>> {
        let lv = self.u.level();
        let mut v = self.scalar(CycloElement::one(lv).neg());
        v[1] = self.zeta.pow(k as i64)?;
        Ok(v)
    }
}

/// Builds `M` for `u_m` and reads off `i_M(σ)` as `ν_M(σΠ/Π - 1)` with
/// the uniformizer `Π = ((θ - 1)/λ)^a π^b`, valuations via `ν_m ∘ N_{M|L^m}`.
pub fn kummer_cross_check(spec: &KummerCoverSpec, m: u32) -> Result<CrossCheck> {
    let u = specialize_unit(spec, m)?;
    let tower = &spec.tower;
    let lv = u.level().clone();
    let p = spec.p();
    let one = CycloElement::one(&lv);
    let t = u.sub(&one)?.valuation()?;
    let cprime = lambda_p_index(p, m) - t;
    if cprime <= 0 || cprime % p == 0 {
        return Err(Error::InvalidInput(format!("u_{m} is not in reduced form (index {t})")));
    }
    // a c' ≡ -1 mod p
    let a = (1..p).find(|a| (a * cprime + 1) % p == 0).unwrap();
    let zeta = one.add(&CycloElement::lambda(&tower.level(1)?).embed_up(tower, m)?)?;
    let alg = KummerAlgebra {
        p: p as usize,
        u: u.clone(),
        zeta,
    };

    // (θ - 1)^{-1} = Π_{k≥1} (ζ^k θ - 1) / (u - 1)
    let mut inv = alg.scalar(u.sub(&one)?.inv()?);
    for k in 1..alg.p {
        inv = alg.mul(&inv, &alg.shifted_theta_minus_one(k)?)?;
    }
    let i_values = crate::par::map_tasks((1..alg.p).collect(), |k| -> Result<i64> {
        let ratio = alg.mul(&alg.shifted_theta_minus_one(k)?, &inv)?;
        let mut z = alg.scalar(one.clone());
        for _ in 0..a {
            z = alg.mul(&z, &ratio)?;
        }
        z[0] = z[0].sub(&one)?;
        alg.norm(&z)?.valuation()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let j = Jumps::from_i_values(&i_values)?;
    Ok(CrossCheck {
        m,
        i_values,
        conductor: j.conductor,
        different: j.different_degree,
    })
}

/// `r(m)`, from the filtration on shallow levels.
fn r_at(tower: &Tower, m: u32) -> Result<i64> {
    if m <= R_FILTRATION_LEVEL {
        r_of_level(tower, m)
    } else {
        Ok(r_closed_form(tower.prime().get(), m))
    }
}

/// Least `m` with `min(r(m), e_m/(p-1)) > 2c`.
pub fn minimal_level(tower: &Tower, c: i64) -> Result<u32> {
    let p = tower.prime().get() as i64;
    for m in 1..=MAX_LEVEL {
        if r_at(tower, m)?.min(p.pow(m - 1)) > 2 * c {
            return Ok(m);
        }
    }
    Err(Error::LevelTooSmall {
        level: MAX_LEVEL,
        reason: format!("no level up to {MAX_LEVEL} serves c = {c}"),
    })
}

/// Which levels [`verify`] visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelRange {
    /// `m_0 ..= m_0 + extra`.
    Auto {
        extra: u32,
    },
    Explicit {
        lo: u32,
        hi: u32,
    },
}

impl std::str::FromStr for LevelRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("level range '{s}' is neither auto[+k] nor a..b"));
        if let Some(rest) = s.strip_prefix("auto") {
            let extra = match rest {
                "" => 0,
                r => r.strip_prefix('+').ok_or_else(bad)?.parse().map_err(|_| bad())?,
            };
            return Ok(LevelRange::Auto { extra });
        }
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (
                a.parse().map_err(|_| bad())?,
                b.trim_start_matches('=').parse().map_err(|_| bad())?,
            ),
            None => {
                let m = s.parse().map_err(|_| bad())?;
                (m, m)
            }
        };
        if lo > hi {
            return Err(bad());
        }
        Ok(LevelRange::Explicit { lo, hi })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelRecord {
    pub m: u32,
    pub unit_index: i64,
    pub expected_unit_index: i64,
    pub conductor: i64,
    pub different: i64,
    pub eisenstein: EisensteinCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OortReport {
    pub p: u32,
    pub c: i64,
    pub w: String,
    pub precision: u32,
    pub m0: u32,
    pub levels: [u32; 2],
    pub generic: GenericDifferent,
    pub level_records: Vec<LevelRecord>,
    pub pth_power: Vec<PthPowerCheck>,
    pub transitivity: Vec<PthPowerCheck>,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Runs every check on the chosen levels. The report is a pure function
/// of the inputs.
pub fn verify(spec: &KummerCoverSpec, levels: LevelRange, max_level: u32, cross_check: bool) -> Result<OortReport> {
    let tower = &spec.tower;
    let m0 = minimal_level(tower, spec.c)?;
    let (lo, hi) = match levels {
        LevelRange::Auto { extra } => (m0, m0 + extra),
        LevelRange::Explicit { lo, hi } => (lo, hi),
    };
    let cap = max_level.min(MAX_LEVEL);
    if hi > cap {
        return Err(Error::InvalidInput(format!("level {hi} exceeds the maximum {cap}")));
    }
    for m in lo..=hi {
        check_level(spec, m)?;
    }
    let generic = generic_different(spec)?;
    let p = spec.p();

    let level_records = crate::par::map_tasks((lo..=hi).collect(), |m| -> Result<LevelRecord> {
        let sd = special_different(spec, m)?;
        let eisenstein = eisenstein_specialization_check(spec, m)?;
        let cross_check = if cross_check && p == 3 && m <= CROSS_CHECK_LEVEL {
            Some(kummer_cross_check(spec, m)?)
        } else {
            None
        };
        Ok(LevelRecord {
            m,
            unit_index: sd.unit_index,
            expected_unit_index: lambda_p_index(p, m) - spec.c,
            conductor: sd.conductor,
            different: sd.different,
            eisenstein,
            cross_check,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let pth_power = crate::par::map_tasks((lo..hi).collect(), |m| pth_power_lemma_check(spec, m))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let transitivity = crate::par::map_tasks((lo..hi.saturating_sub(1)).collect(), |m| {
        pth_power_transitivity_check(spec, m)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut failures = Vec::new();
    for r in &level_records {
        if r.unit_index != r.expected_unit_index {
            failures.push(format!(
                "level {}: ν(u - 1) = {}, expected {}",
                r.m, r.unit_index, r.expected_unit_index
            ));
        }
        if r.different != generic.different {
            failures.push(format!(
                "level {}: different {} != generic {}",
                r.m, r.different, generic.different
            ));
        }
        if !r.eisenstein.ok {
            failures.push(format!("level {}: specialized equation is not of Eisenstein type", r.m));
        }
        if let Some(x) = &r.cross_check {
            if x.different != r.different {
                failures.push(format!(
                    "level {}: cross-check different {} != {}",
                    r.m, x.different, r.different
                ));
            }
        }
    }
    for q in pth_power.iter().chain(&transitivity) {
        if !q.ok {
            failures.push(format!(
                "levels {}..{}: ν(Q - 1) = {} <= {}",
                q.m, q.top, q.index, q.bound
            ));
        }
    }
    Ok(OortReport {
        p: p as u32,
        c: spec.c,
        w: spec.to_string(),
        precision: tower.precision(),
        m0,
        levels: [lo, hi],
        generic,
        level_records,
        pth_power,
        transitivity,
        pass: failures.is_empty(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tower(p: u64) -> Tower {
        Tower::new(Prime::new(p).unwrap(), 40).unwrap()
    }

    fn spec(t: &Tower, c: i64, w: &str) -> KummerCoverSpec {
        KummerCoverSpec::from_text(t, c, w).unwrap()
    }

    #[test]
    fn parses_polynomials() {
        assert_eq!(parse_w("1 + Z^4").unwrap(), vec![(0, 1), (4, 1)]);
        assert_eq!(parse_w("1-2*Z^6+z").unwrap(), vec![(0, 1), (1, 1), (6, -2)]);
        assert_eq!(parse_w("1 + Z^2 - Z^2").unwrap(), vec![(0, 1)]);
        assert!(parse_w("1 + Y").is_err());
        assert!(parse_w("").is_err());
        assert_eq!("auto+2".parse::<LevelRange>().unwrap(), LevelRange::Auto { extra: 2 });
        assert_eq!(
            "2..4".parse::<LevelRange>().unwrap(),
            LevelRange::Explicit { lo: 2, hi: 4 }
        );
        assert!("4..2".parse::<LevelRange>().is_err());
    }

    #[test]
    fn rejects_bad_covers() {
        let t = tower(3);
        assert!(KummerCoverSpec::from_text(&t, 3, "1").is_err());
        assert!(KummerCoverSpec::from_text(&t, 0, "1").is_err());
        assert!(KummerCoverSpec::from_text(&t, 2, "2 + Z^4").is_err());
        assert!(KummerCoverSpec::from_text(&t, 2, "1 + Z").is_err());
        let s = spec(&t, 2, "1 - Z^4");
        assert_eq!(s.to_string(), "1 + 2*Z^4");
        // 3 is not a Teichmüller coefficient
        let w = PowerSeriesElt::from_ints(&t, CoeffRing::Zp, &[1, 0, 0, 0, 4], Truncation::Exact).unwrap();
        assert!(KummerCoverSpec::new(&t, 2, w).is_err());
    }

    #[test]
    fn generic_ramification() {
        let t = tower(3);
        let g = generic_different(&spec(&t, 2, "1")).unwrap();
        assert_eq!(
            g,
            GenericDifferent {
                weierstrass_degree: 2,
                branch_count: 3,
                different: 6
            }
        );
        let g = generic_different(&spec(&tower(5), 1, "1")).unwrap();
        assert_eq!(g.different, 8);
    }

    #[test]
    fn specialized_units_and_conductors() {
        let t = tower(3);
        let one = |u: &CycloElement| CycloElement::one(u.level());
        let u = specialize_unit(&spec(&t, 1, "1"), 1).unwrap();
        assert_eq!(u.sub(&one(&u)).unwrap().valuation().unwrap(), 2);
        let s2 = spec(&t, 2, "1");
        let u = specialize_unit(&s2, 2).unwrap();
        assert_eq!(u.sub(&one(&u)).unwrap().valuation().unwrap(), 7);
        assert_eq!(kummer_conductor(&u).unwrap(), 3);
        assert_eq!(special_different(&spec(&t, 4, "1"), 2).unwrap().different, 10);
        assert!(matches!(specialize_unit(&s2, 0), Err(Error::LevelTooSmall { .. })));
        assert!(matches!(
            specialize_unit(&spec(&t, 4, "1"), 1),
            Err(Error::LevelTooSmall { .. })
        ));
    }

    #[test]
    fn pth_powers_are_detected() {
        let t = tower(3);
        let lv = t.level(2).unwrap();
        let u = CycloElement::one(&lv)
            .add(&CycloElement::lambda(&lv))
            .unwrap()
            .pow(3)
            .unwrap();
        assert_eq!(kummer_conductor(&u), Err(Error::IsPthPower));
        // 1 + λ^p · unit: the bound itself
        let lam_p = CycloElement::lambda(&t.level(1).unwrap())
            .pow(3)
            .unwrap()
            .embed_up(&t, 2)
            .unwrap();
        let u = CycloElement::one(&lv).add(&lam_p).unwrap();
        assert!(matches!(kummer_conductor(&u), Err(Error::ReductionStuck(9))));
    }

    #[test]
    fn conductor_ignores_pth_power_factors() {
        let t = tower(3);
        let s = spec(&t, 2, "1 + Z^4");
        let u = specialize_unit(&s, 2).unwrap();
        let base = kummer_conductor(&u).unwrap();
        let lv = u.level().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let coords: Vec<num_bigint::BigInt> = (0..lv.degree()).map(|_| rng.gen_range(-40i64..40).into()).collect();
            let x = CycloElement::from_signed(&lv, 0, &coords, lv.precision()).unwrap();
            let w = CycloElement::one(&lv)
                .add(&CycloElement::lambda(&lv).mul(&x).unwrap())
                .unwrap();
            let v = u.mul(&w.pow(3).unwrap()).unwrap();
            assert_eq!(kummer_conductor(&v).unwrap(), base);
        }
    }

    #[test]
    fn eisenstein_shape() {
        let t = tower(3);
        let e = eisenstein_specialization_check(&spec(&t, 1, "1"), 2).unwrap();
        assert!(e.ok && e.eisenstein);
        assert_eq!(e.constant_valuation, 1);
        let e = eisenstein_specialization_check(&spec(&t, 2, "1 + Z^4"), 2).unwrap();
        assert!(e.ok && !e.eisenstein);
        assert_eq!(e.constant_valuation, 2);
        // W = Z^c makes u - 1 = λ^p
        let w = PowerSeriesElt::monomial(&t, CoeffRing::Zp, 1);
        let bad = KummerCoverSpec::unchecked(&t, 1, w);
        assert!(!eisenstein_specialization_check(&bad, 2).unwrap().ok);
    }

    #[test]
    fn pth_power_relation() {
        let t = tower(3);
        for (c, w) in [(1, "1"), (1, "1 + Z^2"), (2, "1")] {
            let s = spec(&t, c, w);
            let m0 = minimal_level(&t, c).unwrap();
            let q = pth_power_lemma_check(&s, m0).unwrap();
            assert!(q.ok, "{q:?}");
            assert_eq!(q.bound, 3i64.pow(m0 + 1));
            let bad = pth_power_lemma_check_with_exponent(&s, m0, 2).unwrap();
            assert!(!bad.ok);
        }
        let s = spec(&t, 1, "1");
        assert!(pth_power_transitivity_check(&s, 2).unwrap().ok);
    }

    #[test]
    fn minimal_levels() {
        let t = tower(3);
        assert_eq!(minimal_level(&t, 1).unwrap(), 2);
        assert_eq!(minimal_level(&t, 2).unwrap(), 3);
        assert_eq!(minimal_level(&t, 4).unwrap(), 3);
        assert_eq!(minimal_level(&tower(5), 1).unwrap(), 2);
    }

    #[test]
    fn cross_check_agrees() {
        let t = tower(3);
        for (c, m) in [(1, 1), (1, 2), (2, 2)] {
            let s = spec(&t, c, "1");
            let x = kummer_cross_check(&s, m).unwrap();
            let sd = special_different(&s, m).unwrap();
            assert_eq!(x.different, sd.different, "c = {c}, m = {m}: {x:?}");
            assert!(x.i_values.iter().all(|&i| i == c));
        }
    }

    #[test]
    fn verify_small_case() {
        let t = tower(3);
        let r = verify(&spec(&t, 1, "1"), LevelRange::Auto { extra: 1 }, 5, true).unwrap();
        assert!(r.pass, "{:?}", r.failures);
        assert_eq!(r.m0, 2);
        assert_eq!(r.levels, [2, 3]);
        assert_eq!(r.pth_power.len(), 1);
        assert!(r.level_records.iter().all(|l| l.different == 4));
    }
}
