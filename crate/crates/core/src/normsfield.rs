//! Norm-compatible sequences `(α_m)` over the cyclotomic tower: elements of
//! the field of norms `X_K(L)` truncated to a finite range of levels.

use serde::{Deserialize, Serialize};

use crate::cyclotomic::{CycloDoc, CycloElement, Tower, Valuation};
use crate::error::{Error, Result};
use crate::padics::teichmuller_int;
use crate::ramification::r_of_level;

/// `(α_lo, ..., α_hi)` with `N(α_{m+1}) ≡ α_m` verified at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSequence {
    lo: u32,
    components: Vec<CycloElement>,
    /// `witnesses[k]`: verified precision (in `ν_m` units, `m = lo + k`) of
    /// the congruence `N(α_{m+1}) ≡ α_m`.
    witnesses: Vec<i64>,
}

/// Outcome of checking one adjacent pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCheck {
    pub lower: u32,
    /// The congruence holds modulo `𝔪^verified`.
    pub verified: i64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub pairs: Vec<PairCheck>,
    pub common_valuation: Option<i64>,
    pub pass: bool,
    pub first_failure: Option<u32>,
}

/// How far apart the results at probe depths `M` and `M-1` are.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub probe: u32,
    pub previous: Option<u32>,
    /// `(m, k, r(m))`: the two results agree modulo `𝔪_m^k`.
    pub levels: Vec<(u32, i64, i64)>,
}

fn pair_agreement(upper_norm: &CycloElement, lower: &CycloElement) -> Result<(i64, bool)> {
    let avail = upper_norm.abs_prec().min(lower.abs_prec());
    let d = upper_norm.sub(lower)?;
    Ok(match d.val() {
        Valuation::AtLeast(k) => (k.min(avail), true),
        Valuation::Finite(v) => (v, false),
    })
}

impl NormSequence {
    /// Builds and verifies a sequence starting at level `lo`.
    pub fn new(tower: &Tower, lo: u32, components: Vec<CycloElement>) -> Result<Self> {
        if lo == 0 || components.is_empty() {
            return Err(Error::InvalidInput("a sequence needs levels m >= 1".into()));
        }
        for (k, c) in components.iter().enumerate() {
            if c.m() != lo + k as u32 || c.prime() != tower.prime() {
                return Err(Error::LevelMismatch(format!("component {k} has level {}", c.m())));
            }
        }
        let seq = NormSequence {
            lo,
            components,
            witnesses: Vec::new(),
        };
        let report = seq.check(tower, None)?;
        if let Some(m) = report.first_failure {
            return Err(Error::CompatibilityFailure { lower: m, upper: m + 1 });
        }
        Ok(NormSequence {
            witnesses: report.pairs.iter().map(|c| c.verified).collect(),
            ..seq
        })
    }

    /// Norm cascade from a single top component: compatible by construction.
    fn cascade(tower: &Tower, lo: u32, top: CycloElement) -> Result<Self> {
        let hi = top.m();
        let mut comps = vec![top];
        for _ in lo..hi {
            let next = comps.last().unwrap().norm_down(tower)?;
            comps.push(next);
        }
        comps.reverse();
        let witnesses = comps[..comps.len() - 1].iter().map(CycloElement::abs_prec).collect();
        Ok(NormSequence {
            lo,
            components: comps,
            witnesses,
        })
    }

    pub fn lo(&self) -> u32 {
        self.lo
    }

    pub fn hi(&self) -> u32 {
        self.lo + self.components.len() as u32 - 1
    }

    pub fn components(&self) -> &[CycloElement] {
        &self.components
    }

    pub fn witnesses(&self) -> &[i64] {
        &self.witnesses
    }

    pub fn component(&self, m: u32) -> Result<&CycloElement> {
        if m < self.lo || m > self.hi() {
            return Err(Error::RangeMismatch(format!(
                "level {m} outside [{}, {}]",
                self.lo,
                self.hi()
            )));
        }
        Ok(&self.components[(m - self.lo) as usize])
    }

    /// Restriction to `[lo, hi]`.
    pub fn restrict(&self, lo: u32, hi: u32) -> Result<Self> {
        if lo < self.lo || hi > self.hi() || lo > hi {
            return Err(Error::RangeMismatch(format!(
                "[{lo}, {hi}] is not inside [{}, {}]",
                self.lo,
                self.hi()
            )));
        }
        let (a, b) = ((lo - self.lo) as usize, (hi - self.lo) as usize);
        Ok(NormSequence {
            lo,
            components: self.components[a..=b].to_vec(),
            witnesses: self.witnesses[a..b].to_vec(),
        })
    }

    /// `ν(α)`, the common valuation of the components.
    pub fn valuation(&self) -> Result<i64> {
        self.components[0].valuation()
    }

    /// Verifies every adjacent pair. With `required = Some(k)` a pair passes
    /// when the congruence is certified modulo `𝔪^k`; otherwise it must hold
    /// at the full precision carried by the components.
    pub fn check(&self, tower: &Tower, required: Option<i64>) -> Result<CompatibilityReport> {
        let pairs = crate::par::map_tasks((0..self.components.len() - 1).collect(), |k: usize| {
            let n = self.components[k + 1].norm_down(tower)?;
            let (verified, exact) = pair_agreement(&n, &self.components[k])?;
            let ok = match required {
                Some(r) => verified >= r,
                None => exact,
            };
            Ok(PairCheck {
                lower: self.lo + k as u32,
                verified,
                ok,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let vals: Vec<Valuation> = self.components.iter().map(CycloElement::val).collect();
        let common = match vals[0] {
            Valuation::Finite(v) if vals.iter().all(|&w| w == Valuation::Finite(v)) => Some(v),
            _ => None,
        };
        let val_ok = common.is_some() || vals.iter().all(|v| matches!(v, Valuation::AtLeast(_)));
        let first_failure = pairs
            .iter()
            .find(|c| !c.ok)
            .map(|c| c.lower)
            .or(if val_ok { None } else { Some(self.lo) });
        Ok(CompatibilityReport {
            pass: first_failure.is_none(),
            pairs,
            common_valuation: common,
            first_failure,
        })
    }

    pub fn to_doc(&self) -> SequenceDoc {
        SequenceDoc {
            p: self.components[0].prime().as_u64(),
            range: [self.lo, self.hi()],
            components: self.components.iter().map(CycloElement::to_doc).collect(),
            witnesses: self.witnesses.clone(),
        }
    }

    /// Reads a document and re-verifies it; stored witnesses are ignored.
    pub fn from_doc(tower: &Tower, doc: &SequenceDoc) -> Result<Self> {
        let (lo, comps) = read_components(tower, doc)?;
        Self::new(tower, lo, comps)
    }

    /// Checks a document without requiring it to pass.
    pub fn check_doc(tower: &Tower, doc: &SequenceDoc, required: Option<i64>) -> Result<CompatibilityReport> {
        let (lo, components) = read_components(tower, doc)?;
        if lo == 0 {
            return Err(Error::InvalidInput("a sequence needs levels m >= 1".into()));
        }
        NormSequence {
            lo,
            components,
            witnesses: Vec::new(),
        }
        .check(tower, required)
    }
}

fn read_components(tower: &Tower, doc: &SequenceDoc) -> Result<(u32, Vec<CycloElement>)> {
    let [lo, hi] = doc.range;
    if hi < lo || doc.components.len() != (hi - lo + 1) as usize {
        return Err(Error::InvalidInput(format!(
            "range [{lo}, {hi}] with {} components",
            doc.components.len()
        )));
    }
    if doc.p != tower.prime().as_u64() {
        return Err(Error::InvalidInput(format!("document is for p = {}", doc.p)));
    }
    let comps = doc
        .components
        .iter()
        .map(|c| CycloElement::from_doc(tower, c))
        .collect::<Result<Vec<_>>>()?;
    for (k, c) in comps.iter().enumerate() {
        if c.m() != lo + k as u32 {
            return Err(Error::LevelMismatch(format!("component {k} has level {}", c.m())));
        }
    }
    Ok((lo, comps))
}

/// Document form `{p, range, components, witnesses}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceDoc {
    pub p: u64,
    pub range: [u32; 2],
    pub components: Vec<CycloDoc>,
    pub witnesses: Vec<i64>,
}

/// `π = (λ_m)_m` on `[lo, hi]`.
pub fn uniformizer_sequence(tower: &Tower, lo: u32, hi: u32) -> Result<NormSequence> {
    if lo == 0 || hi < lo {
        return Err(Error::InvalidInput(format!("bad range [{lo}, {hi}]")));
    }
    let comps = (lo..=hi)
        .map(|m| Ok(CycloElement::lambda(&tower.level(m)?)))
        .collect::<Result<Vec<_>>>()?;
    NormSequence::new(tower, lo, comps)
}

/// The constant sequence `τ(r)`.
pub fn teichmuller_embed(tower: &Tower, r: u64, lo: u32, hi: u32) -> Result<NormSequence> {
    if lo == 0 || hi < lo {
        return Err(Error::InvalidInput(format!("bad range [{lo}, {hi}]")));
    }
    let p = tower.prime();
    let t = num_bigint::BigInt::from(teichmuller_int(p, r, tower.precision()));
    let comps = (lo..=hi)
        .map(|m| Ok(CycloElement::from_bigint(&tower.level(m)?, &t)))
        .collect::<Result<Vec<_>>>()?;
    NormSequence::new(tower, lo, comps)
}

fn common_range(a: &NormSequence, b: &NormSequence) -> Result<(u32, u32)> {
    let (lo, hi) = (a.lo.max(b.lo), a.hi().min(b.hi()));
    if lo > hi {
        return Err(Error::RangeMismatch(format!(
            "[{}, {}] and [{}, {}] do not overlap",
            a.lo,
            a.hi(),
            b.lo,
            b.hi()
        )));
    }
    Ok((lo, hi))
}

/// Componentwise product on the common range.
pub fn fon_mul(tower: &Tower, a: &NormSequence, b: &NormSequence) -> Result<NormSequence> {
    let (lo, hi) = common_range(a, b)?;
    let comps = (lo..=hi)
        .map(|m| a.component(m)?.mul(b.component(m)?))
        .collect::<Result<Vec<_>>>()?;
    NormSequence::new(tower, lo, comps)
}

/// `γ_m = N_{L^M | L^m}(α_M + β_M)` on `[lo, M]`, together with a comparison
/// against probe depth `M - 1`.
pub fn fon_add(
    tower: &Tower,
    a: &NormSequence,
    b: &NormSequence,
    probe: u32,
) -> Result<(NormSequence, StabilityReport)> {
    let (lo, hi) = common_range(a, b)?;
    if probe > hi || probe < lo {
        return Err(Error::RangeMismatch(format!(
            "probe depth {probe} outside the common range [{lo}, {hi}]"
        )));
    }
    let top = |m: u32| -> Result<NormSequence> {
        let s = a.component(m)?.add(b.component(m)?)?;
        NormSequence::cascade(tower, lo, s)
    };
    let sum = top(probe)?;
    let mut report = StabilityReport {
        probe,
        previous: None,
        levels: Vec::new(),
    };
    if probe > lo {
        let prev = top(probe - 1)?;
        report.previous = Some(probe - 1);
        for m in lo..probe {
            let (x, y) = (sum.component(m)?, prev.component(m)?);
            let (k, _) = pair_agreement(x, y)?;
            report.levels.push((m, k, r_of_level(tower, m)?));
        }
    }
    Ok((sum, report))
}

/// `Σ τ(a_i) π^i` on `[lo, probe]`, built by `fon_mul` and `fon_add` at the
/// given probe depth. `g` holds residues mod p, constant term first.
pub fn series_to_sequence(tower: &Tower, g: &[u64], lo: u32, probe: u32) -> Result<NormSequence> {
    let p = tower.prime().as_u64();
    let pi = uniformizer_sequence(tower, lo, probe)?;
    let mut power = teichmuller_embed(tower, 1, lo, probe)?;
    let mut acc: Option<NormSequence> = None;
    for (i, &a) in g.iter().enumerate() {
        if i > 0 {
            power = fon_mul(tower, &power, &pi)?;
        }
        if a % p == 0 {
            continue;
        }
        let term = fon_mul(tower, &teichmuller_embed(tower, a, lo, probe)?, &power)?;
        acc = Some(match acc {
            None => term,
            Some(s) => fon_add(tower, &s, &term, probe)?.0,
        });
    }
    match acc {
        Some(s) => Ok(s),
        None => {
            let comps = (lo..=probe)
                .map(|m| Ok(CycloElement::zero(&tower.level(m)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(NormSequence {
                lo,
                witnesses: vec![i64::MAX; comps.len() - 1],
                components: comps,
            })
        }
    }
}

/// `g_m(π_m) = Σ τ(a_i) λ_m^i` at level `m`.
pub fn naive_component(tower: &Tower, g: &[u64], m: u32) -> Result<CycloElement> {
    let lv = tower.level(m)?;
    let p = tower.prime();
    let lam = CycloElement::lambda(&lv);
    let mut acc = CycloElement::zero(&lv);
    for &a in g.iter().rev() {
        let t = num_bigint::BigInt::from(teichmuller_int(p, a, tower.precision()));
        acc = acc.mul(&lam)?.add(&CycloElement::from_bigint(&lv, &t))?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padics::Prime;

    fn t(p: u64) -> Tower {
        Tower::new(Prime::new(p).unwrap(), 40).unwrap()
    }

    #[test]
    fn uniformizer_is_compatible() {
        let tw = t(3);
        let pi = uniformizer_sequence(&tw, 1, 3).unwrap();
        assert_eq!(pi.valuation().unwrap(), 1);
        let rep = pi.check(&tw, None).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.common_valuation, Some(1));
        let t5 = t(5);
        assert!(uniformizer_sequence(&t5, 1, 2).unwrap().check(&t5, None).unwrap().pass);
    }

    #[test]
    fn corrupted_component_is_located() {
        let tw = t(3);
        let pi = uniformizer_sequence(&tw, 1, 3).unwrap();
        let mut comps = pi.components().to_vec();
        let l2 = tw.level(2).unwrap();
        comps[1] = comps[1]
            .mul(&CycloElement::one(&l2).add(&CycloElement::lambda(&l2)).unwrap())
            .unwrap();
        let bad = NormSequence {
            lo: 1,
            components: comps.clone(),
            witnesses: vec![0, 0],
        };
        let rep = bad.check(&tw, None).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.first_failure, Some(1));
        assert_eq!(
            NormSequence::new(&tw, 1, comps),
            Err(Error::CompatibilityFailure { lower: 1, upper: 2 })
        );
    }

    #[test]
    fn products_and_teichmuller() {
        let tw = t(3);
        let pi = uniformizer_sequence(&tw, 1, 3).unwrap();
        let sq = fon_mul(&tw, &pi, &pi).unwrap();
        assert_eq!(sq.valuation().unwrap(), 2);
        let one = teichmuller_embed(&tw, 1, 1, 3).unwrap();
        assert_eq!(fon_mul(&tw, &pi, &one).unwrap(), pi);
        let m1 = teichmuller_embed(&tw, 2, 1, 3).unwrap();
        assert_eq!(
            m1.component(2).unwrap(),
            &CycloElement::from_int(&tw.level(2).unwrap(), -1)
        );
        let t5 = t(5);
        let two = teichmuller_embed(&t5, 2, 1, 2).unwrap();
        assert_eq!(
            fon_mul(&t5, &two, &two).unwrap(),
            teichmuller_embed(&t5, 4, 1, 2).unwrap()
        );
    }

    #[test]
    fn addition_of_uniformizers() {
        let tw = t(3);
        let pi = uniformizer_sequence(&tw, 1, 4).unwrap();
        let zero = series_to_sequence(&tw, &[], 1, 4).unwrap();
        let (s, _) = fon_add(&tw, &pi, &zero, 4).unwrap();
        assert_eq!(s, pi);
        let (s, stab) = fon_add(&tw, &pi, &pi, 4).unwrap();
        let l1 = tw.level(1).unwrap();
        let two_l = CycloElement::lambda(&l1).mul_int(2);
        assert!(s.component(1).unwrap().congruent(&two_l, 2).unwrap());
        assert!(s.check(&tw, None).unwrap().pass);
        // γ_1 = 2^27 λ_1 against 2^9 λ_1: ν_1(2^9 (2^18 - 1) λ_1) = 1 + 2·3
        assert_eq!(stab.levels[0], (1, 7, 2));
        for &(_, k, r) in &stab.levels {
            assert!(k >= r);
        }
    }

    #[test]
    fn series_components_match_naive_evaluation() {
        let tw = t(3);
        let s = series_to_sequence(&tw, &[0, 1], 1, 4).unwrap();
        assert_eq!(s, uniformizer_sequence(&tw, 1, 4).unwrap());
        let c = series_to_sequence(&tw, &[2], 1, 4).unwrap();
        assert_eq!(c, teichmuller_embed(&tw, 2, 1, 4).unwrap());
        let g = [0, 1, 1];
        let s = series_to_sequence(&tw, &g, 1, 4).unwrap();
        for m in 1..=3 {
            let r = r_of_level(&tw, m).unwrap();
            assert!(s
                .component(m)
                .unwrap()
                .congruent(&naive_component(&tw, &g, m).unwrap(), r)
                .unwrap());
        }
    }

    #[test]
    fn doc_round_trip() {
        let tw = t(3);
        let s = series_to_sequence(&tw, &[1, 2, 0, 1], 1, 3).unwrap();
        let back = NormSequence::from_doc(&tw, &s.to_doc()).unwrap();
        assert_eq!(back.components(), s.components());
    }
}
