use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};
use norms_lab::cyclotomic::Tower;
use norms_lab::normsfield::{fon_add, series_to_sequence, NormSequence, SequenceDoc};
use norms_lab::oortlift::{verify, KummerCoverSpec, LevelRange};
use norms_lab::padics::{teichmuller, PAdicNumber, Prime};
use norms_lab::powerseries::{PowerSeriesElt, SeriesDoc};
use norms_lab::ramification::filtration;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::{ArithOp, Cli, Command, FonCmd, OortCmd, PadicCmd, RamCmd, WeierstrassCmd};

pub const EXIT_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_PRECISION: u8 = 3;

pub struct Outcome {
    pub doc: Value,
    pub passed: bool,
}

impl Outcome {
    fn ok(doc: Value) -> Self {
        Outcome { doc, passed: true }
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn canonical(doc: &Value) -> String {
    // serde_json's map is a BTreeMap, so keys come out sorted
    let mut s = serde_json::to_string_pretty(doc).expect("serializable");
    s.push('\n');
    s
}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<norms_lab::Error>() {
        Some(norms_lab::Error::PrecisionExhausted(_)) => EXIT_PRECISION,
        _ => EXIT_INPUT,
    }
}

fn tower(p: u64, cli: &Cli) -> Result<Tower> {
    Ok(Tower::new(Prime::new(p)?, cli.precision)?)
}

fn check_level(m: u32, cli: &Cli) -> Result<()> {
    if m > cli.max_level {
        bail!(norms_lab::Error::InvalidInput(format!(
            "level {m} exceeds --max-level {}",
            cli.max_level
        )));
    }
    Ok(())
}

fn read_doc<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Weierstrass(WeierstrassCmd::Prep { file }) => {
            let doc: SeriesDoc = read_doc(file)?;
            let t = tower(doc.p, cli)?;
            let g = PowerSeriesElt::from_doc(&t, &doc)?;
            let w = g.weierstrass_prepare()?;
            Ok(Outcome::ok(json!({
                "c": w.c,
                "f": to_value(&w.f.as_series().to_doc()),
                "U": to_value(&w.u.to_doc()),
                "weierstrass_degree": w.f.degree(),
            })))
        }
        Command::Ram(RamCmd::Profile { p, base, top }) => {
            check_level(*top, cli)?;
            let t = tower(*p, cli)?;
            Ok(Outcome::ok(to_value(&filtration(&t, *base, *top)?.to_doc())))
        }
        Command::Fon(cmd) => fon(cmd, cli),
        Command::Oort(OortCmd::Verify(a)) => {
            let t = tower(a.p, cli)?;
            let spec = KummerCoverSpec::from_text(&t, a.c, &a.w)?;
            let levels: LevelRange = a.levels.parse()?;
            let report = verify(&spec, levels, cli.max_level, a.cross_check)?;
            Ok(Outcome {
                passed: report.pass,
                doc: to_value(&report),
            })
        }
        Command::Padic(cmd) => padic(cmd, cli),
    }
}

fn fon(cmd: &FonCmd, cli: &Cli) -> Result<Outcome> {
    match cmd {
        FonCmd::Check { file, required } => {
            let doc: SequenceDoc = read_doc(file)?;
            check_level(doc.range[1], cli)?;
            let t = tower(doc.p, cli)?;
            let report = NormSequence::check_doc(&t, &doc, *required)?;
            Ok(Outcome {
                passed: report.pass,
                doc: to_value(&report),
            })
        }
        FonCmd::Add { a, b, probe } => {
            let (da, db): (SequenceDoc, SequenceDoc) = (read_doc(a)?, read_doc(b)?);
            if da.p != db.p {
                bail!(norms_lab::Error::InvalidInput("sequences over different primes".into()));
            }
            check_level(da.range[1].max(db.range[1]), cli)?;
            let t = tower(da.p, cli)?;
            let x = NormSequence::from_doc(&t, &da)?;
            let y = NormSequence::from_doc(&t, &db)?;
            let (sum, stability) = fon_add(&t, &x, &y, *probe)?;
            Ok(Outcome::ok(
                json!({ "sum": to_value(&sum.to_doc()), "stability": to_value(&stability) }),
            ))
        }
        FonCmd::FromSeries(a) => {
            check_level(a.probe, cli)?;
            let t = tower(a.p, cli)?;
            let seq = series_to_sequence(&t, &a.g, a.lo, a.probe)?;
            Ok(Outcome::ok(to_value(&seq.to_doc())))
        }
    }
}

fn number(text: &str, p: Option<u64>, precision: u32) -> Result<PAdicNumber> {
    if let Ok(n) = text.trim().parse::<i64>() {
        let Some(p) = p else {
            bail!(norms_lab::Error::InvalidInput(format!("integer {n} needs --p")));
        };
        return Ok(PAdicNumber::from_i64(Prime::new(p)?, n, precision));
    }
    let x: PAdicNumber = text.parse()?;
    if let Some(p) = p {
        if x.prime().as_u64() != p {
            bail!(norms_lab::Error::InvalidInput(format!(
                "{text} is not a {p}-adic number"
            )));
        }
    }
    Ok(x)
}

fn number_doc(x: &PAdicNumber) -> Value {
    json!({ "doc": to_value(&x.to_doc()), "text": x.to_string(), "valuation": x.valuation() })
}

fn padic(cmd: &PadicCmd, cli: &Cli) -> Result<Outcome> {
    let x = match cmd {
        PadicCmd::Show { p, value } => number(value, *p, cli.precision)?,
        PadicCmd::Teichmuller { p, r } => teichmuller(Prime::new(*p)?, *r, cli.precision)?,
        PadicCmd::Arith { op, a, b, p } => {
            let a = number(a, *p, cli.precision)?;
            let b = number(b, *p, cli.precision)?;
            match op {
                ArithOp::Add => a.add(&b)?,
                ArithOp::Sub => a.sub(&b)?,
                ArithOp::Mul => a.mul(&b)?,
                ArithOp::Div => a.div(&b)?,
            }
        }
    };
    Ok(Outcome::ok(number_doc(&x)))
}
