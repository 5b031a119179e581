//! The tower `L^m = Q_p(zeta_{p^m})` over `Q_p`.
//!
//! Level `m` has degree `e_m = p^(m-1)(p-1)` (and level 0 is `Q_p` itself).
//! Elements are stored in the integral basis `1, λ_m, ..., λ_m^(e_m - 1)`
//! with `λ_m = zeta_{p^m} - 1`; the basis of powers of `zeta_{p^m}` spans
//! the same lattice and is used for the Galois action, for embeddings and
//! for recognizing subfield elements.

mod element;
mod galois;
mod norm;

use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::padics::Prime;

pub use element::{CycloDoc, CycloElement, Valuation};
pub use galois::GaloisElement;
pub use norm::{derivative, eval_poly, minimal_polynomial, minimal_polynomial_over};

/// Highest level a [`Tower`] will construct.
pub const MAX_LEVEL: u32 = 8;

/// Stray coordinates must be certified at this many digits before an
/// element is accepted as lying in a smaller level.
pub const COERCION_MARGIN: u32 = 5;

/// One field `L^m` of the tower, at a fixed coefficient precision.
#[derive(Debug)]
pub struct TowerLevel {
    p: Prime,
    m: u32,
    degree: usize,
    /// order of the root of unity, `p^m`
    order: usize,
    precision: u32,
    pow: Arc<Vec<BigUint>>,
    /// Coefficients of `Φ_{p^m}(1+X)`, constant term first, monic term omitted.
    minpoly: Vec<BigUint>,
    /// `X^(e+k) mod minpoly` for `k = 0..e-1`, reduced mod `p^precision`.
    reduction: OnceLock<Vec<Vec<BigUint>>>,
}

impl TowerLevel {
    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `e_m = [L^m : Q_p]`, also the ramification index.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `p^k` for `k <= precision`.
    pub(crate) fn p_pow(&self, k: u32) -> &BigUint {
        &self.pow[k as usize]
    }

    /// Minimal polynomial of `λ_m` over `Q_p`, i.e. `Φ_{p^m}(1+X)`, as
    /// integers modulo `p^precision`, constant term first, leading 1 included.
    pub fn minpoly(&self) -> Vec<BigUint> {
        let mut v = self.minpoly.clone();
        v.push(BigUint::from(1u32));
        v
    }

    fn reduction_rows(&self) -> &[Vec<BigUint>] {
        self.reduction.get_or_init(|| {
            let e = self.degree;
            let modulus = self.p_pow(self.precision);
            let neg: Vec<BigUint> = self.minpoly.iter().map(|a| (modulus - a) % modulus).collect();
            let mut rows = Vec::with_capacity(e.saturating_sub(1));
            let mut cur = neg.clone();
            for _ in 0..e.saturating_sub(1) {
                rows.push(cur.clone());
                // multiply by X: shift up and fold the overflow back in
                let top = cur[e - 1].clone();
                let mut next = vec![BigUint::zero(); e];
                for j in (1..e).rev() {
                    next[j] = cur[j - 1].clone();
                }
                if !top.is_zero() {
                    for j in 0..e {
                        next[j] = (&next[j] + &top * &neg[j]) % modulus;
                    }
                }
                cur = next;
            }
            rows
        })
    }

    /// Same field and precision.
    pub fn same(&self, other: &TowerLevel) -> bool {
        self.p == other.p && self.m == other.m && self.precision == other.precision
    }

    /// `ν_m(λ_1^p) = p e_m / (p-1) = p^m`, meaningful for `m >= 1`.
    pub fn lambda_p_valuation(&self) -> i64 {
        self.order as i64
    }

    /// Order `p^m` of the root of unity generating the level.
    pub fn order(&self) -> usize {
        self.order
    }
}

/// Degree `e_m` of level `m`.
pub fn level_degree(p: Prime, m: u32) -> usize {
    if m == 0 {
        1
    } else {
        (p.get() as usize).pow(m - 1) * (p.get() as usize - 1)
    }
}

/// Taylor shift `a(x) -> a(x + s)` for `s = ±1`, in place, modulo `modulus`.
pub(crate) fn taylor_shift(a: &mut [BigUint], plus: bool, modulus: &BigUint) {
    let n = a.len();
    for i in 0..n.saturating_sub(1) {
        for j in (i..n - 1).rev() {
            let (lo, hi) = a.split_at_mut(j + 1);
            let next = &hi[0];
            if next.is_zero() {
                continue;
            }
            let cur = &mut lo[j];
            if plus {
                *cur += next;
                if &*cur >= modulus {
                    *cur -= modulus;
                }
            } else if &*cur >= next {
                *cur -= next;
            } else {
                *cur += modulus;
                *cur -= next;
            }
        }
    }
}

/// A tower of cyclotomic levels for one prime at one coefficient precision.
/// Cloning is cheap; levels are built lazily and shared.
#[derive(Debug, Clone)]
pub struct Tower {
    inner: Arc<TowerInner>,
}

#[derive(Debug)]
struct TowerInner {
    p: Prime,
    precision: u32,
    pow: Arc<Vec<BigUint>>,
    levels: Vec<OnceLock<Arc<TowerLevel>>>,
}

impl Tower {
    pub fn new(p: Prime, precision: u32) -> Result<Self> {
        if precision == 0 {
            return Err(Error::InvalidInput("precision must be positive".into()));
        }
        let pb = p.big();
        let mut pow = Vec::with_capacity(precision as usize + 1);
        pow.push(BigUint::from(1u32));
        for k in 0..precision as usize {
            pow.push(&pow[k] * &pb);
        }
        Ok(Tower {
            inner: Arc::new(TowerInner {
                p,
                precision,
                pow: Arc::new(pow),
                levels: (0..=MAX_LEVEL).map(|_| OnceLock::new()).collect(),
            }),
        })
    }

    pub fn prime(&self) -> Prime {
        self.inner.p
    }

    pub fn precision(&self) -> u32 {
        self.inner.precision
    }

    pub fn level(&self, m: u32) -> Result<Arc<TowerLevel>> {
        let slot = self
            .inner
            .levels
            .get(m as usize)
            .ok_or_else(|| Error::InvalidInput(format!("level {m} exceeds the maximum {MAX_LEVEL}")))?;
        Ok(slot.get_or_init(|| Arc::new(self.build_level(m))).clone())
    }

    fn build_level(&self, m: u32) -> TowerLevel {
        let p = self.inner.p;
        let e = level_degree(p, m);
        let order = (p.get() as usize).pow(m);
        let modulus = &self.inner.pow[self.inner.precision as usize];
        // Φ_{p^m}(x) = sum_{t<p} x^{t p^(m-1)}; for m = 0 it is x - 1.
        let mut phi = vec![BigUint::zero(); e + 1];
        if m == 0 {
            phi[0] = modulus - 1u32;
            phi[1] = BigUint::from(1u32);
        } else {
            let step = order / p.get() as usize;
            for t in 0..p.get() as usize {
                phi[t * step] = BigUint::from(1u32);
            }
        }
        taylor_shift(&mut phi, true, modulus);
        debug_assert_eq!(phi[e], BigUint::from(1u32));
        phi.pop();
        TowerLevel {
            p,
            m,
            degree: e,
            order,
            precision: self.inner.precision,
            pow: self.inner.pow.clone(),
            minpoly: phi,
            reduction: OnceLock::new(),
        }
    }
}

#[cfg(test)]
mod level_tests {
    use super::*;

    #[test]
    fn minpoly_is_eisenstein() {
        for p in [3u64, 5, 7] {
            let tower = Tower::new(Prime::new(p).unwrap(), 20).unwrap();
            for m in 1..=3 {
                let lv = tower.level(m).unwrap();
                assert_eq!(lv.degree(), level_degree(lv.prime(), m));
                let f = lv.minpoly();
                assert_eq!(f.len(), lv.degree() + 1);
                assert_eq!(f[0], BigUint::from(p));
                for c in &f[1..lv.degree()] {
                    assert!((c % p).is_zero());
                }
            }
        }
    }

    #[test]
    fn taylor_shift_round_trip() {
        let m = BigUint::from(3u32).pow(10);
        let orig: Vec<BigUint> = (0..9u32).map(|i| BigUint::from(i * 7 + 1)).collect();
        let mut a = orig.clone();
        taylor_shift(&mut a, true, &m);
        taylor_shift(&mut a, false, &m);
        assert_eq!(a, orig);
    }

    #[test]
    fn level_zero_is_the_base() {
        let tower = Tower::new(Prime::new(3).unwrap(), 10).unwrap();
        let lv = tower.level(0).unwrap();
        assert_eq!(lv.degree(), 1);
        assert_eq!(lv.minpoly(), vec![BigUint::zero(), BigUint::from(1u32)]);
    }
}
