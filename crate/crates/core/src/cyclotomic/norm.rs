use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use super::{CycloElement, GaloisElement, Tower, COERCION_MARGIN};
use crate::error::{Error, Result};

impl CycloElement {
    /// Image under the inclusion `L^m ⊂ L^target`, i.e.
    /// `λ_m -> (1 + λ_target)^(p^(target - m)) - 1`.
    pub fn embed_up(&self, tower: &Tower, target: u32) -> Result<CycloElement> {
        let m = self.m();
        if target < m {
            return Err(Error::LevelMismatch(format!(
                "cannot embed level {m} into level {target}"
            )));
        }
        if target == m {
            return Ok(self.clone());
        }
        let dest = tower.level(target)?;
        if !self.level().same(&*tower.level(m)?) {
            return Err(Error::LevelMismatch("element does not belong to this tower".into()));
        }
        if self.is_zero() {
            return Ok(CycloElement::approx_zero(&dest, self.shift()));
        }
        let stride = (self.prime().get() as usize).pow(target - m);
        let w = self.zeta_coords();
        let mut t = vec![BigUint::zero(); dest.degree()];
        // level 0 has the single basis vector zeta_1^0 = 1
        for (j, c) in w.into_iter().enumerate() {
            t[j * stride] = c;
        }
        Ok(CycloElement::from_zeta_coords(&dest, self.shift(), t, self.rel()))
    }

    /// Recognizes an element of level `m+1` as an element of level `m`:
    /// in the `zeta_{p^(m+1)}` basis the subfield is spanned by the powers
    /// with exponent divisible by `p`.
    pub fn restrict_down(&self, tower: &Tower) -> Result<CycloElement> {
        let m = self.m();
        if m == 0 {
            return Err(Error::LevelMismatch("level 0 has no subfield below it".into()));
        }
        let dest = tower.level(m - 1)?;
        if self.is_zero() {
            return Ok(CycloElement::approx_zero(&dest, self.shift()));
        }
        if self.rel() < COERCION_MARGIN.min(self.level().precision()) {
            return Err(Error::CoercionFailure { level: m - 1 });
        }
        let p = self.prime().get() as usize;
        let w = self.zeta_coords();
        let (mut kept, mut stray) = (vec![BigUint::zero(); dest.degree()], false);
        for (j, c) in w.into_iter().enumerate() {
            if j % p == 0 && j / p < dest.degree() {
                kept[j / p] = c;
            } else if !c.is_zero() {
                stray = true;
            }
        }
        if stray {
            return Err(Error::CoercionFailure { level: m - 1 });
        }
        Ok(CycloElement::from_zeta_coords(&dest, self.shift(), kept, self.rel()))
    }

    /// Restriction through several levels.
    pub fn restrict_to(&self, tower: &Tower, target: u32) -> Result<CycloElement> {
        let mut x = self.clone();
        while x.m() > target {
            x = x.restrict_down(tower)?;
        }
        Ok(x)
    }

    /// `N_{L^(m+1) | L^m}`: the product of the conjugates over `L^m`,
    /// recognized as an element of level `m`.
    pub fn norm_down(&self, tower: &Tower) -> Result<CycloElement> {
        let m = self.m();
        if m == 0 {
            return Err(Error::LevelMismatch("level 0 has no subfield below it".into()));
        }
        let p = self.prime();
        let group: Vec<GaloisElement> = GaloisElement::group(p, m - 1, m)?
            .into_iter()
            .filter(|g| !g.is_identity())
            .collect();
        let conj = crate::par::map_tasks(group, |g| g.apply(self));
        let mut prod = self.clone();
        for c in conj {
            prod = prod.mul(&c?)?;
        }
        prod.restrict_down(tower)
    }

    /// `N_{L^m | L^target}` for `target <= m`.
    pub fn norm_to(&self, tower: &Tower, target: u32) -> Result<CycloElement> {
        if target > self.m() {
            return Err(Error::LevelMismatch(format!(
                "cannot take a norm from level {} up to {target}",
                self.m()
            )));
        }
        let mut x = self.clone();
        while x.m() > target {
            x = x.norm_down(tower)?;
        }
        Ok(x)
    }
}

/// Horner evaluation of a polynomial with coefficients (constant term first)
/// in the same level as `x`.
pub fn eval_poly(coeffs: &[CycloElement], x: &CycloElement) -> Result<CycloElement> {
    let mut acc = CycloElement::zero(x.level());
    for c in coeffs.iter().rev() {
        acc = acc.mul(x)?.add(c)?;
    }
    Ok(acc)
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut r = BigInt::from(1u32);
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Minimal polynomial of `λ_top` over level `base`, constant term first,
/// coefficients in level `base`. Over `Q_p` this is `Φ_{p^top}(1+X)`;
/// over `L^base` with `base >= 1` it is `(X+1)^(p^(top-base)) - (1 + λ_base)`.
pub fn minimal_polynomial_over(tower: &Tower, base: u32, top: u32) -> Result<Vec<CycloElement>> {
    if top <= base {
        return Err(Error::LevelMismatch(format!("top {top} must exceed base {base}")));
    }
    let lb = tower.level(base)?;
    if base == 0 {
        let lt = tower.level(top)?;
        return Ok(lt
            .minpoly()
            .iter()
            .map(|c| CycloElement::from_bigint(&lb, &BigInt::from(c.clone())))
            .collect());
    }
    let deg = (tower.prime().as_u64()).pow(top - base);
    let mut coeffs: Vec<CycloElement> = (0..=deg)
        .map(|k| CycloElement::from_bigint(&lb, &binomial(deg, k)))
        .collect();
    coeffs[0] = CycloElement::lambda(&lb).neg();
    Ok(coeffs)
}

/// Minimal polynomial of `π_(m+1) = λ_(m+1)` over `L^m`: the monic
/// degree-p polynomial `(X+1)^p - (1 + λ_m)`.
pub fn minimal_polynomial(tower: &Tower, m: u32) -> Result<Vec<CycloElement>> {
    if m == 0 {
        return Err(Error::InvalidInput("the uniformizer net starts at level 1".into()));
    }
    minimal_polynomial_over(tower, m, m + 1)
}

/// Formal derivative of a polynomial over a tower level.
pub fn derivative(coeffs: &[CycloElement]) -> Vec<CycloElement> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.mul_int(i as i64))
        .collect()
}
