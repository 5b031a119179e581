//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use norms_lab::cyclotomic::{minimal_polynomial, CycloElement, Tower};
use norms_lab::normsfield::{fon_add, naive_component, series_to_sequence, uniformizer_sequence};
use norms_lab::oortlift::{generic_different, verify, KummerCoverSpec, LevelRange};
use norms_lab::padics::Prime;
use norms_lab::powerseries::{CoeffRing, DistinguishedPoly, PowerSeriesElt, RationalSection, Truncation};
use norms_lab::ramification::{different_from_minpoly, filtration, r_of_level};
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn tower(p: u64, precision: u32) -> Tower {
    Tower::new(Prime::new(p).unwrap(), precision).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

fn e(x: impl std::fmt::Debug) -> String {
    format!("{x:?}")
}

fn uniformizer_norms() -> Check {
    let start = Instant::now();
    for (p, hi) in [(3, 4), (5, 2)] {
        let t = tower(p, 60);
        for m in 1..hi {
            let lam = CycloElement::lambda(&t.level(m + 1).map_err(e)?);
            let n = lam.norm_down(&t).map_err(e)?;
            let below = CycloElement::lambda(&t.level(m).map_err(e)?);
            ensure(n == below, || format!("p = {p}: N(λ_{}) != λ_{m}", m + 1))?;
        }
        let seq = uniformizer_sequence(&t, 1, hi).map_err(e)?;
        ensure(seq.check(&t, None).map_err(e)?.pass, || {
            format!("p = {p}: sequence check failed")
        })?;
    }
    within(start, Duration::from_secs(5))?;
    Ok(format!(
        "p=3 levels 1..4, p=5 levels 1..2 exact ({:.2?})",
        start.elapsed()
    ))
}

fn weierstrass_round_trip() -> Check {
    let start = Instant::now();
    let t = tower(3, 20);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let q = 3i64.pow(20);
    let mut degrees = [0usize; 31];
    for k in 0..200 {
        let content = [0u32, 0, 0, 1, 2][k % 5];
        let low = rng.gen_range(0..8usize);
        let v: Vec<i64> = (0..=30)
            .map(|i| {
                let x = rng.gen_range(0..q / 9);
                let x = if i < low { 3 * x } else { x };
                x * 3i64.pow(content)
            })
            .collect();
        let g = PowerSeriesElt::from_ints(&t, CoeffRing::Zp, &v, Truncation::Order(30)).map_err(e)?;
        let vals: Vec<u32> = v
            .iter()
            .map(|&a| if a == 0 { u32::MAX } else { a.trailing_zeros_base3() })
            .collect();
        let c = *vals.iter().min().unwrap();
        let d = vals.iter().position(|&x| x == c).unwrap();
        let w = g.weierstrass_prepare().map_err(e)?;
        ensure(w.c == c as i64 && w.f.degree() == d, || {
            format!(
                "series {k}: got (c, d) = ({}, {}), expected ({c}, {d})",
                w.c,
                w.f.degree()
            )
        })?;
        if c == 0 {
            let wd = g.weierstrass_degree().map_err(e)?;
            ensure(wd == d, || {
                format!("series {k}: Weierstrass degree {wd}, first unit index {d}")
            })?;
        }
        ensure(w.reconstruct().map_err(e)?.agrees_with(&g).map_err(e)?, || {
            format!("series {k}: ϖ^c f U != g")
        })?;
        degrees[d] += 1;
    }
    within(start, Duration::from_secs(10))?;
    let spread = degrees.iter().filter(|&&n| n > 0).count();
    Ok(format!(
        "200 series, {spread} distinct degrees ({:.2?})",
        start.elapsed()
    ))
}

trait Base3 {
    fn trailing_zeros_base3(self) -> u32;
}

impl Base3 for i64 {
    fn trailing_zeros_base3(mut self) -> u32 {
        let mut k = 0;
        while self % 3 == 0 {
            self /= 3;
            k += 1;
        }
        k
    }
}

fn two_way_different() -> Check {
    let t = tower(3, 60);
    let mut got = Vec::new();
    for (base, top) in [(0, 1), (0, 2), (1, 2)] {
        let prof = filtration(&t, base, top).map_err(e)?;
        let via_poly = different_from_minpoly(&t, base, top).map_err(e)?;
        ensure(prof.different_degree == via_poly, || {
            format!(
                "L^{top}|L^{base}: group {} vs polynomial {via_poly}",
                prof.different_degree
            )
        })?;
        got.push(via_poly);
    }
    ensure(got[0] == 1, || format!("L^1|Q_3 different {}", got[0]))?;
    // d(L²|Q) = d(L²|L¹) + e(L²|L¹) d(L¹|Q)
    ensure(got[1] == got[2] + 3 * got[0], || {
        format!("tower formula fails: {got:?}")
    })?;
    Ok(format!("differents L1|Q3, L2|Q3, L2|L1 = {got:?}"))
}

fn herbrand() -> Check {
    let t = tower(3, 60);
    let prof = filtration(&t, 0, 2).map_err(e)?;
    let r = Rational64::from_integer;
    ensure(prof.lower_jumps == vec![0, 2], || {
        format!("lower jumps {:?}", prof.lower_jumps)
    })?;
    ensure(prof.upper_jumps == vec![r(0), r(1)], || {
        format!("upper jumps {:?}", prof.upper_jumps)
    })?;
    let grid = prof.grid(100);
    for &x in &grid {
        let back = prof.phi.eval(prof.psi.eval(x).map_err(e)?).map_err(e)?;
        ensure(back == x, || format!("φ(ψ({x})) = {back}"))?;
    }
    let l1 = filtration(&t, 0, 1).map_err(e)?;
    for &s in &grid {
        let q = prof.upper_group_in_quotient(s, 1).map_err(e)?;
        ensure(q == l1.upper_group(s).map_err(e)?, || {
            format!("quotient mismatch at s = {s}")
        })?;
    }
    Ok("jumps {0,2} / {0,1}, φ∘ψ = id and quotient on 100 points".into())
}

fn random_distinguished(t: &Tower, rng: &mut ChaCha8Rng, d: usize) -> DistinguishedPoly {
    let lv = t.level(0).unwrap();
    let lower = (0..d)
        .map(|_| CycloElement::from_int(&lv, 3 * rng.gen_range(-200i64..200)))
        .collect();
    DistinguishedPoly::new(t, CoeffRing::Zp, lower).unwrap()
}

fn random_unit(t: &Tower, rng: &mut ChaCha8Rng) -> PowerSeriesElt {
    let mut v: Vec<i64> = (0..5).map(|_| rng.gen_range(-500i64..500)).collect();
    v[0] = 3 * v[0] + rng.gen_range(1..3);
    PowerSeriesElt::from_ints(t, CoeffRing::Zp, &v, Truncation::Exact).unwrap()
}

fn ramification_argument() -> Check {
    let t = tower(3, 60);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut tried = 0;
    for k in 0..50 {
        let (d1, d2) = (rng.gen_range(0..=4usize), rng.gen_range(0..=4usize));
        let c = rng.gen_range(0..3i64);
        let f1 = random_distinguished(&t, &mut rng, d1);
        let f2 = random_distinguished(&t, &mut rng, d2);
        let a = RationalSection::with_unit_denominator(c, f1, random_unit(&t, &mut rng), f2, random_unit(&t, &mut rng))
            .map_err(e)?;
        let m0 = (1..)
            .find(|&m| CoeffRing::Zp.varpi_valuation(&t, m) > (d1 + d2) as i64)
            .unwrap();
        for m in m0..=m0 + 1 {
            let pi = CycloElement::lambda(&t.level(m).map_err(e)?);
            let predicted = a.specialization_valuation(m).map_err(e)?;
            let actual = a.specialize(&pi).map_err(e)?.valuation().map_err(e)?;
            ensure(predicted == actual, || {
                format!("section {k} at m = {m}: {predicted} vs {actual}")
            })?;
            ensure(actual >= -(d2 as i64), || {
                format!("section {k}: valuation {actual} < -d2")
            })?;
            tried += 1;
        }
    }
    Ok(format!("50 sections, {tried} specializations exact"))
}

fn random_g(rng: &mut ChaCha8Rng, deg: usize) -> Vec<u64> {
    (0..=rng.gen_range(0..=deg)).map(|_| rng.gen_range(0..3u64)).collect()
}

fn approx_apf() -> Check {
    let start = Instant::now();
    let t = tower(3, 60);
    let r: Vec<i64> = (1..=3)
        .map(|m| r_of_level(&t, m))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    ensure(r[0] == 2, || format!("r(1) = {}", r[0]))?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let inputs: Vec<(Vec<u64>, Vec<u64>)> = (0..50)
        .map(|_| (random_g(&mut rng, 4), random_g(&mut rng, 4)))
        .collect();
    let results = norms_lab::par::map_tasks(inputs, |(g, h)| -> Result<(), String> {
        let a = series_to_sequence(&t, &g, 1, 4).map_err(e)?;
        let b = series_to_sequence(&t, &h, 1, 4).map_err(e)?;
        let (s, _) = fon_add(&t, &a, &b, 4).map_err(e)?;
        for m in 1..=3u32 {
            let naive = a.component(m).map_err(e)?.add(b.component(m).map_err(e)?).map_err(e)?;
            let ok = s
                .component(m)
                .map_err(e)?
                .congruent(&naive, r[m as usize - 1])
                .map_err(e)?;
            ensure(ok, || format!("g = {g:?}, h = {h:?}: level {m} differs modulo 𝔪^r"))?;
        }
        Ok(())
    });
    results.into_iter().collect::<Result<Vec<_>, _>>()?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("50 pairs at probe 4, r = {r:?} ({:.2?})", start.elapsed()))
}

fn special_congruence() -> Check {
    let t = tower(3, 60);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let g = random_g(&mut rng, 6);
        let s = series_to_sequence(&t, &g, 1, 4).map_err(e)?;
        for m in 1..=3 {
            let r = r_of_level(&t, m).map_err(e)?;
            let naive = naive_component(&t, &g, m).map_err(e)?;
            let ok = s.component(m).map_err(e)?.congruent(&naive, r).map_err(e)?;
            ensure(ok, || format!("g = {g:?}: level {m} differs from g(π_m) modulo 𝔪^{r}"))?;
        }
    }
    Ok("20 series, levels 1..3".into())
}

fn oort() -> Check {
    let mut lines = Vec::new();
    for (p, c) in [(3u64, 1i64), (3, 2), (3, 4), (5, 1)] {
        let start = Instant::now();
        let t = tower(p, 60);
        for w in ["1".to_string(), format!("1 + Z^{}", 2 * c)] {
            let spec = KummerCoverSpec::from_text(&t, c, &w).map_err(e)?;
            let expect = (c + 1) * (p as i64 - 1);
            let g = generic_different(&spec).map_err(e)?;
            ensure(g.different == expect, || {
                format!("({p},{c}) W = {w}: d_eta = {}", g.different)
            })?;
            let rep = verify(&spec, LevelRange::Auto { extra: 2 }, 8, false).map_err(e)?;
            ensure(rep.pass, || format!("({p},{c}) W = {w}: {:?}", rep.failures))?;
            for l in &rep.level_records {
                ensure(l.different == expect && l.eisenstein.ok, || {
                    format!("({p},{c}) level {}", l.m)
                })?;
            }
            ensure(
                rep.pth_power.len() == 2 && rep.pth_power.iter().all(|q| q.ok && q.index > q.bound),
                || format!("({p},{c}): p-th power checks {:?}", rep.pth_power),
            )?;
        }
        within(start, Duration::from_secs(120))?;
        lines.push(format!("({p},{c}) {:.1?}", start.elapsed()));
    }
    Ok(lines.join(", "))
}

fn minpoly_growth() -> Check {
    let t = tower(3, 60);
    let mut mins = Vec::new();
    for m in 1..=3u32 {
        let f = minimal_polynomial(&t, m).map_err(e)?;
        let em = 2 * 3i64.pow(m - 1);
        let middle = &f[1..f.len() - 1];
        let vmin = middle.iter().map(|a| a.val().lower_bound()).min().unwrap();
        ensure(vmin >= em, || {
            format!("m = {m}: middle coefficient of valuation {vmin} < e_m = {em}")
        })?;
        mins.push(vmin);
    }
    ensure(mins.windows(2).all(|w| w[0] < w[1]), || {
        format!("not increasing: {mins:?}")
    })?;
    Ok(format!("min middle valuations {mins:?}"))
}

/// The CLI binary next to this test executable, if the workspace built it.
fn cli_binary() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?;
    let bin = dir.join(format!("norms-lab{}", std::env::consts::EXE_SUFFIX));
    bin.exists().then_some(bin)
}

fn determinism() -> Check {
    let Some(bin) = cli_binary() else {
        return Err("CLI binary not built; run the workspace tests".into());
    };
    let invocations: [&[&str]; 6] = [
        &[
            "oort", "verify", "--p", "3", "--c", "2", "--w", "1", "--levels", "auto+2",
        ],
        &[
            "oort",
            "verify",
            "--p",
            "3",
            "--c",
            "1",
            "--w",
            "1 + Z^2",
            "--levels",
            "1..2",
            "--cross-check",
        ],
        &["ram", "profile", "--p", "3", "--base", "0", "--top", "2"],
        &["ram", "profile", "--p", "3", "--base", "0", "--top", "1"],
        &["fon", "from-series", "--p", "3", "--g", "1,0,2", "--probe", "4"],
        &["padic", "teichmuller", "--p", "5", "--r", "3"],
    ];
    for args in invocations {
        let run = || {
            Command::new(&bin)
                .args(args)
                .env_remove("NORMS_LAB_PRECISION")
                .output()
                .map_err(|x| x.to_string())
        };
        let (a, b) = (run()?, run()?);
        ensure(a.status.success(), || format!("{args:?} exited with {}", a.status))?;
        ensure(a.stdout == b.stdout, || format!("{args:?} differs between runs"))?;
    }
    Ok(format!("{} invocations byte-identical", invocations.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("norm-compatible uniformizer", uniformizer_norms),
        ("Weierstrass round trip", weierstrass_round_trip),
        ("two-way different", two_way_different),
        ("Herbrand functions and Hasse-Arf", herbrand),
        ("specialization valuations", ramification_argument),
        ("approximate APF addition", approx_apf),
        ("series components", special_congruence),
        ("p-cyclic lift verification", oort),
        ("minimal polynomial growth", minpoly_growth),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
