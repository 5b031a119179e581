//! Ramification of the steps `L^top | L^base` of the cyclotomic tower:
//! the `i_L` table, lower and upper filtrations, Herbrand's functions,
//! conductor and different, and the APF quantities `i(L|L^m)`, `r(m)`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{derivative, eval_poly, minimal_polynomial_over, CycloElement, GaloisElement, Tower};
use crate::error::{Error, Result};

/// A continuous, strictly increasing piecewise-linear function on
/// `[-1, ∞)`, stored by its breakpoints and the slope after the last one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseLinearFn {
    points: Vec<(Rational64, Rational64)>,
    tail_slope: Rational64,
}

impl PiecewiseLinearFn {
    pub fn new(points: Vec<(Rational64, Rational64)>, tail_slope: Rational64) -> Result<Self> {
        if points.is_empty() || !tail_slope.is_positive() {
            return Err(Error::InvalidInput(
                "need a breakpoint and a positive final slope".into(),
            ));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
                return Err(Error::InvalidInput(
                    "breakpoints must increase in both coordinates".into(),
                ));
            }
        }
        Ok(PiecewiseLinearFn { points, tail_slope })
    }

    pub fn breakpoints(&self) -> &[(Rational64, Rational64)] {
        &self.points
    }

    pub fn tail_slope(&self) -> Rational64 {
        self.tail_slope
    }

    /// Slope on the segment to the right of breakpoint `k`.
    pub fn slope_after(&self, k: usize) -> Rational64 {
        match self.points.get(k + 1) {
            Some(&(x1, y1)) => {
                let (x0, y0) = self.points[k];
                (y1 - y0) / (x1 - x0)
            }
            None => self.tail_slope,
        }
    }

    pub fn eval(&self, x: Rational64) -> Result<Rational64> {
        let (x0, _) = self.points[0];
        if x < x0 {
            return Err(Error::InvalidInput(format!("{x} lies left of the domain start {x0}")));
        }
        let k = self.points.iter().rposition(|&(px, _)| px <= x).unwrap();
        let (px, py) = self.points[k];
        Ok(py + self.slope_after(k) * (x - px))
    }

    /// The inverse function.
    pub fn inverse(&self) -> Self {
        PiecewiseLinearFn {
            points: self.points.iter().map(|&(x, y)| (y, x)).collect(),
            tail_slope: self.tail_slope.recip(),
        }
    }
}

/// Ramification data of `Gal(L^top | L^base)`.
#[derive(Debug, Clone)]
pub struct RamificationProfile {
    pub p: u32,
    pub base: u32,
    pub top: u32,
    /// `i_L(σ)` for every nontrivial `σ`, ordered by `a`.
    pub i_table: Vec<(GaloisElement, i64)>,
    pub lower_jumps: Vec<i64>,
    pub upper_jumps: Vec<Rational64>,
    pub phi: PiecewiseLinearFn,
    pub psi: PiecewiseLinearFn,
    pub conductor: i64,
    pub different_degree: i64,
}

/// `i_L(σ) = ν_top(σ(λ_top) - λ_top) - 1`, in the convention where the
/// inertia group is `G_0`.
pub fn i_value(tower: &Tower, sigma: &GaloisElement, base: u32) -> Result<i64> {
    let top = sigma.m();
    if base > top {
        return Err(Error::LevelMismatch(format!("base {base} above top {top}")));
    }
    let q = tower.prime().as_u64().pow(base);
    if base > 0 && sigma.a() % q != 1 {
        return Err(Error::InvalidInput(format!(
            "σ_{} does not fix level {base}",
            sigma.a()
        )));
    }
    if sigma.is_identity() {
        return Err(Error::TrivialElement);
    }
    let lam = CycloElement::lambda(&tower.level(top)?);
    let d = sigma.apply(&lam)?.sub(&lam)?;
    Ok(d.valuation()? - 1)
}

/// `#G_t` for real `t`, with `G_t = G_{⌈t⌉}`.
fn group_size(i_values: &[i64], t: Rational64) -> usize {
    let k = t.ceil().to_integer();
    1 + i_values.iter().filter(|&&i| i >= k).count()
}

/// Computes the full profile of `L^top | L^base` (`base = 0` is `Q_p`).
pub fn filtration(tower: &Tower, base: u32, top: u32) -> Result<RamificationProfile> {
    if top <= base {
        return Err(Error::LevelMismatch(format!("top {top} must exceed base {base}")));
    }
    let p = tower.prime();
    let group: Vec<GaloisElement> = GaloisElement::group(p, base, top)?
        .into_iter()
        .filter(|g| !g.is_identity())
        .collect();
    let values = crate::par::map_tasks(group.clone(), |g| i_value(tower, &g, base));
    let i_table: Vec<(GaloisElement, i64)> = group
        .into_iter()
        .zip(values)
        .map(|(g, v)| v.map(|v| (g, v)))
        .collect::<Result<_>>()?;
    let is: Vec<i64> = i_table.iter().map(|&(_, i)| i).collect();
    let j = Jumps::from_i_values(&is)?;
    // the tower is abelian
    assert!(j.upper_jumps_integral(), "non-integral upper jump {:?}", j.upper_jumps);
    Ok(RamificationProfile {
        p: p.get(),
        base,
        top,
        i_table,
        lower_jumps: j.lower_jumps,
        upper_jumps: j.upper_jumps,
        phi: j.phi,
        psi: j.psi,
        conductor: j.conductor,
        different_degree: j.different_degree,
    })
}

/// Filtration data of a totally ramified Galois extension, determined by
/// the multiset of `i_L(σ)` over the nontrivial `σ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Jumps {
    pub lower_jumps: Vec<i64>,
    pub upper_jumps: Vec<Rational64>,
    pub phi: PiecewiseLinearFn,
    pub psi: PiecewiseLinearFn,
    pub conductor: i64,
    pub different_degree: i64,
}

impl Jumps {
    pub fn from_i_values(is: &[i64]) -> Result<Self> {
        if is.iter().any(|&i| i < 0) {
            return Err(Error::InvalidInput(
                "i_L values of a totally ramified extension are >= 0".into(),
            ));
        }
        let mut lower_jumps = is.to_vec();
        lower_jumps.sort_unstable();
        lower_jumps.dedup();

        let g0 = (is.len() + 1) as i64;
        let one = Rational64::one();
        let mut points = vec![(-one, -one), (Rational64::zero(), Rational64::zero())];
        let mut prev = 0i64;
        for &j in lower_jumps.iter().filter(|&&j| j > 0) {
            let slope = Rational64::new(group_size(is, Rational64::from_integer(j)) as i64, g0);
            let (_, y) = *points.last().unwrap();
            points.push((
                Rational64::from_integer(j),
                y + slope * Rational64::from_integer(j - prev),
            ));
            prev = j;
        }
        let phi = PiecewiseLinearFn::new(points, Rational64::new(1, g0))?;
        let psi = phi.inverse();
        let upper_jumps = lower_jumps
            .iter()
            .map(|&j| phi.eval(Rational64::from_integer(j)))
            .collect::<Result<Vec<_>>>()?;
        let conductor = upper_jumps.last().map_or(0, |u| u.ceil().to_integer() + 1);
        let different_degree = is.iter().map(|i| i + 1).sum();
        Ok(Jumps {
            lower_jumps,
            upper_jumps,
            phi,
            psi,
            conductor,
            different_degree,
        })
    }

    /// Hasse-Arf for abelian groups.
    pub fn upper_jumps_integral(&self) -> bool {
        self.upper_jumps.iter().all(|u| u.is_integer())
    }
}

impl RamificationProfile {
    pub fn order(&self) -> usize {
        self.i_table.len() + 1
    }

    /// `G_t` (lower numbering) as the sorted list of `a`, identity included.
    pub fn lower_group(&self, t: Rational64) -> Vec<u64> {
        let k = t.ceil().to_integer();
        let mut v: Vec<u64> = std::iter::once(1)
            .chain(self.i_table.iter().filter(|&&(_, i)| i >= k).map(|(g, _)| g.a()))
            .collect();
        v.sort_unstable();
        v
    }

    /// `G^s = G_{ψ(s)}`.
    pub fn upper_group(&self, s: Rational64) -> Result<Vec<u64>> {
        Ok(self.lower_group(self.psi.eval(s)?))
    }

    /// Image of `G^s` in `Gal(L^mid | L^base)`: reduction of `a` mod `p^mid`.
    pub fn upper_group_in_quotient(&self, s: Rational64, mid: u32) -> Result<Vec<u64>> {
        let q = (self.p as u64).pow(mid);
        let mut v: Vec<u64> = self.upper_group(s)?.into_iter().map(|a| a % q.max(1)).collect();
        if mid == 0 {
            v = vec![1];
        }
        v.sort_unstable();
        v.dedup();
        Ok(v)
    }

    /// Sample points covering every segment of `φ` and `ψ`: breakpoints,
    /// midpoints and a stretch past the last jump.
    pub fn grid(&self, count: usize) -> Vec<Rational64> {
        let last = self.lower_jumps.last().copied().unwrap_or(0).max(1) + 2;
        let span = Rational64::from_integer(last + 1);
        (0..count)
            .map(|k| -Rational64::one() + span * Rational64::new(k as i64, count as i64 - 1))
            .collect()
    }

    pub fn to_doc(&self) -> ProfileDoc {
        ProfileDoc {
            p: self.p,
            base: self.base,
            top: self.top,
            i_table: self.i_table.iter().map(|(g, i)| (g.a().to_string(), *i)).collect(),
            lower_jumps: self.lower_jumps.clone(),
            upper_jumps: self.upper_jumps.iter().map(|u| RationalDoc(*u)).collect(),
            phi_breakpoints: self
                .phi
                .breakpoints()
                .iter()
                .map(|&(x, y)| [RationalDoc(x), RationalDoc(y)])
                .collect(),
            phi_tail_slope: RationalDoc(self.phi.tail_slope()),
            conductor: self.conductor,
            different_degree: self.different_degree,
        }
    }
}

/// A rational rendered as `"n"` or `"n/d"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RationalDoc(pub Rational64);

impl fmt::Display for RationalDoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for RationalDoc {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            s.serialize_i64(self.0.to_integer())
        } else {
            s.serialize_str(&self.0.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for RationalDoc {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(RationalDoc(Rational64::from_integer(n))),
            Raw::Text(s) => s.parse().map(RationalDoc).map_err(serde::de::Error::custom),
        }
    }
}

/// Structured profile report. `i_table` is keyed by `a` (of `σ_a`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileDoc {
    pub p: u32,
    pub base: u32,
    pub top: u32,
    pub i_table: BTreeMap<String, i64>,
    pub lower_jumps: Vec<i64>,
    pub upper_jumps: Vec<RationalDoc>,
    pub phi_breakpoints: Vec<[RationalDoc; 2]>,
    pub phi_tail_slope: RationalDoc,
    pub conductor: i64,
    pub different_degree: i64,
}

/// `ν_top(f'(λ_top))` with `f` the minimal polynomial of `λ_top` over
/// level `base`: the different exponent computed without the group.
pub fn different_from_minpoly(tower: &Tower, base: u32, top: u32) -> Result<i64> {
    let f = minimal_polynomial_over(tower, base, top)?;
    let up = f.iter().map(|c| c.embed_up(tower, top)).collect::<Result<Vec<_>>>()?;
    let lam = CycloElement::lambda(&tower.level(top)?);
    eval_poly(&derivative(&up), &lam)?.valuation()
}

/// `i(L|L^m)`: the first upper jump of `L^(m+1) | L^m`.
pub fn apf_first_jump(tower: &Tower, m: u32) -> Result<Rational64> {
    if m == 0 {
        return Err(Error::InvalidInput("the APF quantities start at level 1".into()));
    }
    let prof = filtration(tower, m, m + 1)?;
    Ok(prof.upper_jumps[0])
}

/// `r(m) = ⌈(p-1)/p · i(L|L^m)⌉`.
pub fn r_of_level(tower: &Tower, m: u32) -> Result<i64> {
    let p = tower.prime().get() as i64;
    let i = apf_first_jump(tower, m)?;
    Ok((Rational64::new(p - 1, p) * i).ceil().to_integer())
}

/// `r(m)` from the closed form `i(L|L^m) = p^m - 1`, for levels too deep
/// to build. Agrees with [`r_of_level`] wherever both run.
pub fn r_closed_form(p: u32, m: u32) -> i64 {
    let p = p as i64;
    let i = p.pow(m) - 1;
    ((p - 1) * i + p - 1) / p
}
