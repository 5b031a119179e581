use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::CycloElement;
use crate::error::{Error, Result};
use crate::padics::Prime;

/// The automorphism `zeta_{p^m} -> zeta_{p^m}^a` of level `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GaloisElement {
    p: Prime,
    m: u32,
    a: u64,
}

impl GaloisElement {
    pub fn new(p: Prime, m: u32, a: i64) -> Result<Self> {
        let order = (p.as_u64()).pow(m) as i64;
        let a = a.rem_euclid(order.max(1)) as u64;
        if m > 0 && a.is_multiple_of(p.as_u64()) {
            return Err(Error::InvalidInput(format!("{a} is not a unit modulo {p}^{m}")));
        }
        Ok(GaloisElement {
            p,
            m,
            a: if m == 0 { 1 } else { a },
        })
    }

    pub fn identity(p: Prime, m: u32) -> Self {
        GaloisElement { p, m, a: 1 }
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn is_identity(&self) -> bool {
        self.a == 1
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.p != other.p || self.m != other.m {
            return Err(Error::LevelMismatch(
                "composing automorphisms of different levels".into(),
            ));
        }
        let order = self.p.as_u64().pow(self.m).max(1);
        Ok(GaloisElement {
            a: (self.a * other.a) % order,
            ..*self
        })
    }

    /// Restriction to level `m' <= m`.
    pub fn restrict(&self, m: u32) -> Result<Self> {
        if m > self.m {
            return Err(Error::LevelMismatch(format!("cannot restrict level {} to {m}", self.m)));
        }
        GaloisElement::new(self.p, m, self.a as i64)
    }

    /// All of `Gal(L^top | L^base)`, in increasing order of `a`.
    pub fn group(p: Prime, base: u32, top: u32) -> Result<Vec<Self>> {
        if base > top {
            return Err(Error::LevelMismatch(format!("base {base} above top {top}")));
        }
        if top == 0 {
            return Ok(vec![GaloisElement::identity(p, 0)]);
        }
        let order = p.as_u64().pow(top);
        let modb = p.as_u64().pow(base);
        Ok((1..order)
            .filter(|a| a % p.as_u64() != 0)
            .filter(|a| base == 0 || a % modb == 1)
            .map(|a| GaloisElement { p, m: top, a })
            .collect())
    }

    /// Applies the automorphism. The `λ`-coordinates are moved to the
    /// `zeta`-basis, permuted, reduced by the sparse cyclotomic relation and
    /// moved back.
    pub fn apply(&self, x: &CycloElement) -> Result<CycloElement> {
        if x.m() != self.m || x.prime() != self.p {
            return Err(Error::LevelMismatch(format!(
                "automorphism of level {} applied to an element of level {}",
                self.m,
                x.m()
            )));
        }
        if self.is_identity() || x.is_zero() || self.m == 0 {
            return Ok(x.clone());
        }
        let level = x.level().clone();
        let e = level.degree();
        let order = level.order();
        let rel = x.rel();
        let modulus = level.p_pow(rel);
        let w = x.zeta_coords();
        let mut t = vec![BigUint::zero(); order];
        for (j, c) in w.into_iter().enumerate() {
            if !c.is_zero() {
                let idx = ((j as u64 * self.a) % order as u64) as usize;
                t[idx] = c;
            }
        }
        reduce_cyclotomic(&mut t, e, order, modulus);
        t.truncate(e);
        Ok(CycloElement::from_zeta_coords(&level, x.shift(), t, rel))
    }
}

/// Folds the coefficients at indices `e..order` back below `e` using
/// `zeta^((p-1)q + r) = -Σ_{s<p-1} zeta^(s q + r)` with `q = order / p`.
pub(crate) fn reduce_cyclotomic(t: &mut [BigUint], e: usize, order: usize, modulus: &BigUint) {
    let q = order - e;
    for k in e..order {
        if t[k].is_zero() {
            continue;
        }
        let c = std::mem::take(&mut t[k]);
        let r = k - e;
        let neg = (modulus - (&c % modulus)) % modulus;
        let mut s = 0;
        while s * q + r < e {
            let idx = s * q + r;
            t[idx] += &neg;
            if &t[idx] >= modulus {
                t[idx] = t[idx].mod_floor(modulus);
            }
            s += 1;
        }
    }
}
