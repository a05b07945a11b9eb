//! Fault masking ratio, TMR reliability and the fault-tolerance figure of
//! merit.
//!
//! FMR pools every faulty scenario over all input vectors (uniform input
//! distribution): `p` counts non-Actual rows, `q` counts the Correct ones and
//! FMR is `q / p`, kept as an exact fraction.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fault::{tally, InjectionSemantics, InputTally, MaxFaults};
use crate::netlist::Netlist;
use crate::voters::{builtin, VoterName};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FmrReport {
    pub voter: String,
    pub semantics: InjectionSemantics,
    pub max_faults: MaxFaults,
    pub input_width: usize,
    /// `p`: all non-Actual scenarios.
    pub faulty: u64,
    /// `q`: scenarios whose output stays correct.
    pub masked: u64,
    pub per_input: Vec<InputTally>,
    /// Externally published FMR for this voter, as printed.
    pub published: Option<String>,
}

impl FmrReport {
    pub fn fmr(&self) -> Ratio<u64> {
        Ratio::new(self.masked, self.faulty)
    }

    pub fn exposure(&self) -> Ratio<u64> {
        Ratio::new(self.faulty - self.masked, self.faulty)
    }

    /// FMR rounded half-to-even to 4 decimal places.
    pub fn fmr_decimal(&self) -> String {
        fixed_decimal(&BigRational::new(self.masked.into(), self.faulty.into()), 4)
    }

    pub fn exposure_decimal(&self) -> String {
        fixed_decimal(&BigRational::new((self.faulty - self.masked).into(), self.faulty.into()), 4)
    }

    pub fn with_published(mut self, value: impl Into<String>) -> Self {
        self.published = Some(value.into());
        self
    }

    /// Whether the computed FMR, rounded to the published value's number of
    /// decimal places, equals the published value.
    pub fn agrees_with_published(&self) -> Option<bool> {
        let published = self.published.as_deref()?;
        let places = published.split_once('.').map_or(0, |(_, f)| f.len());
        let computed = fixed_decimal(&BigRational::new(self.masked.into(), self.faulty.into()), places);
        Some(computed == published)
    }
}

pub fn fmr(netlist: &Netlist, semantics: InjectionSemantics, max: MaxFaults) -> Result<FmrReport> {
    let t = tally(netlist, semantics, max)?;
    let faulty = t.faulty();
    if faulty == 0 {
        return Err(Error::NoFaultSites(netlist.name().to_string()));
    }
    Ok(FmrReport {
        voter: netlist.name().to_string(),
        semantics,
        max_faults: max,
        input_width: t.width,
        faulty,
        masked: t.masked(),
        per_input: t.per_input,
        published: None,
    })
}

/// [`fmr`] for a built-in voter, carrying its published value.
pub fn fmr_builtin(voter: VoterName, semantics: InjectionSemantics, max: MaxFaults) -> Result<FmrReport> {
    Ok(fmr(&builtin(voter), semantics, max)?.with_published(voter.published_fmr()))
}

/// One point of the simplex vs. TMR reliability comparison. The voter is
/// assumed perfect (`r_voter` is always 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReliabilityPoint {
    pub r_m: f64,
    pub r_simplex: f64,
    pub r_tmr: f64,
    pub r_voter: f64,
}

pub fn tmr_reliability(r_m: f64) -> Result<ReliabilityPoint> {
    if !(0.0..=1.0).contains(&r_m) {
        return Err(Error::OutOfRange { what: "module reliability", value: r_m });
    }
    // all three modules working, or exactly one failed
    let r_tmr = r_m.powi(3) + 3.0 * (1.0 - r_m) * r_m.powi(2);
    Ok(ReliabilityPoint { r_m, r_simplex: r_m, r_tmr, r_voter: 1.0 })
}

/// Points at `0, step, 2*step, ..., 1`. `1 / step` must be an integer.
pub fn reliability_curve(step: f64) -> Result<Vec<ReliabilityPoint>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::OutOfRange { what: "step", value: step });
    }
    let intervals = (1.0 / step).round();
    if (intervals * step - 1.0).abs() > 1e-9 || intervals > 1e7 {
        return Err(Error::NonIntegralGrid(step));
    }
    let n = intervals as u32;
    (0..=n).map(|i| tmr_reliability(f64::from(i) / f64::from(n))).collect()
}

/// Power, delay, area and FMR of one voter, held as exact decimals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricsEntry {
    pub voter: String,
    /// Microwatts.
    pub power_uw: BigRational,
    /// Nanoseconds.
    pub delay_ns: BigRational,
    /// Square micrometres.
    pub area_um2: BigRational,
    /// Percent.
    pub fmr_percent: BigRational,
}

impl MetricsEntry {
    /// Builds an entry from decimal strings such as `"3.52"`.
    pub fn from_decimals(voter: &str, power: &str, delay: &str, area: &str, fmr_percent: &str) -> Result<MetricsEntry> {
        let field = |name: &str, s: &str| {
            parse_decimal(s).ok_or_else(|| Error::Metrics(format!("{voter}: {name} `{s}` is not a decimal number")))
        };
        Ok(MetricsEntry {
            voter: voter.to_string(),
            power_uw: field("power_uw", power)?,
            delay_ns: field("delay_ns", delay)?,
            area_um2: field("area_um2", area)?,
            fmr_percent: field("fmr_percent", fmr_percent)?,
        })
    }

    fn check(&self) -> Result<()> {
        for (field, v) in [("power_uw", &self.power_uw), ("delay_ns", &self.delay_ns), ("area_um2", &self.area_um2)] {
            if !v.is_positive() {
                return Err(Error::NonPositiveMetric { voter: self.voter.clone(), field });
            }
        }
        if self.fmr_percent.is_negative() || self.fmr_percent > BigRational::from_integer(100.into()) {
            return Err(Error::FmrPercentRange(self.voter.clone()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FtFomEntry {
    pub voter: String,
    /// power * delay * area
    pub pdap: BigRational,
    /// 1 / pdap, in (uW * ns * um^2)^-1
    pub fom: BigRational,
    /// fmr_percent * fom
    pub ft_fom: BigRational,
}

impl FtFomEntry {
    pub fn ft_fom_f64(&self) -> f64 {
        self.ft_fom.to_f64().unwrap_or(f64::NAN)
    }
}

pub fn ft_fom(entry: &MetricsEntry) -> Result<FtFomEntry> {
    entry.check()?;
    let pdap = &entry.power_uw * &entry.delay_ns * &entry.area_um2;
    let fom = pdap.recip();
    let ft_fom = &entry.fmr_percent * &fom;
    Ok(FtFomEntry { voter: entry.voter.clone(), pdap, fom, ft_fom })
}

/// A published "A beats B by this factor" statement about FT-FOM.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PublishedClaim {
    pub higher: &'static str,
    pub lower: &'static str,
    /// Factor as printed, e.g. `"1.306"` for a 30.6 % improvement.
    pub factor: &'static str,
    pub wording: &'static str,
}

pub const PUBLISHED_FT_FOM_CLAIMS: [PublishedClaim; 5] = [
    PublishedClaim { higher: "classical", lower: "bn", factor: "1.306", wording: "improved FT-FOM of 30.6%" },
    PublishedClaim { higher: "classical", lower: "kp", factor: "3.5", wording: "greater by 3.5x" },
    PublishedClaim { higher: "proposed", lower: "classical", factor: "2.9", wording: "higher by 2.9x" },
    PublishedClaim { higher: "proposed", lower: "kp", factor: "16.9", wording: "higher by 16.9x" },
    PublishedClaim { higher: "proposed", lower: "bn", factor: "4.1", wording: "higher by 4.1x" },
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClaimCheck {
    pub claim: PublishedClaim,
    pub computed: BigRational,
}

/// FT-FOM entries sorted best first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranking {
    pub entries: Vec<FtFomEntry>,
}

impl Ranking {
    pub fn best(&self) -> &FtFomEntry {
        &self.entries[0]
    }

    pub fn ratio_to_best(&self, i: usize) -> BigRational {
        &self.entries[i].ft_fom / &self.best().ft_fom
    }

    /// `ft_fom(a) / ft_fom(b)`.
    pub fn ratio(&self, a: &str, b: &str) -> Option<BigRational> {
        let find = |v: &str| self.entries.iter().find(|e| e.voter == v);
        Some(&find(a)?.ft_fom / &find(b)?.ft_fom)
    }

    /// Published claims whose two voters are both present, with the ratio
    /// recomputed from the entries.
    pub fn claim_checks(&self) -> Vec<ClaimCheck> {
        PUBLISHED_FT_FOM_CLAIMS
            .iter()
            .filter_map(|c| Some(ClaimCheck { claim: *c, computed: self.ratio(c.higher, c.lower)? }))
            .collect()
    }
}

pub fn rank(entries: &[MetricsEntry]) -> Result<Ranking> {
    if entries.is_empty() {
        return Err(Error::Empty("metrics entry list"));
    }
    let mut seen = HashSet::new();
    for e in entries {
        if !seen.insert(e.voter.as_str()) {
            return Err(Error::DuplicateVoter(e.voter.clone()));
        }
    }
    let mut ranked = entries.iter().map(ft_fom).collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| b.ft_fom.cmp(&a.ft_fom).then_with(|| a.voter.cmp(&b.voter)));
    Ok(Ranking { entries: ranked })
}

pub const METRICS_HEADER: [&str; 5] = ["voter", "power_uw", "delay_ns", "area_um2", "fmr_percent"];

/// Reads a metrics CSV with header `voter,power_uw,delay_ns,area_um2,fmr_percent`.
pub fn read_metrics_csv(text: &str) -> Result<Vec<MetricsEntry>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Metrics(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != METRICS_HEADER {
        return Err(Error::Metrics(format!(
            "expected header `{}`, found `{}`",
            METRICS_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Metrics(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let entry = MetricsEntry::from_decimals(&record[0], &record[1], &record[2], &record[3], &record[4])
            .map_err(|e| Error::Metrics(format!("line {line}: {e}")))?;
        entry.check().map_err(|e| Error::Metrics(format!("line {line}: {e}")))?;
        entries.push(entry);
    }
    if entries.is_empty() {
        return Err(Error::Metrics("no data rows".into()));
    }
    Ok(entries)
}

/// Parses `[-+]digits[.digits][e[-+]digits]` exactly.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let n: BigInt = format!("{int}{frac}").parse().ok()?;
    let value = BigRational::new(n, BigInt::one()) * pow10(exponent - frac.len() as i32);
    Some(if negative { -value } else { value })
}

fn pow10(e: i32) -> BigRational {
    let p = BigRational::from_integer(BigInt::from(10).pow(e.unsigned_abs()));
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

/// Nearest integer, ties to even.
fn round_half_even(x: &BigRational) -> BigInt {
    let floor = x.floor();
    let frac = x - &floor;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let base = floor.to_integer();
    match frac.cmp(&half) {
        std::cmp::Ordering::Less => base,
        std::cmp::Ordering::Greater => base + 1,
        std::cmp::Ordering::Equal => {
            if base.is_even() {
                base
            } else {
                base + 1
            }
        }
    }
}

/// `x` with exactly `places` decimals, rounded half to even.
pub fn fixed_decimal(x: &BigRational, places: usize) -> String {
    let scaled = round_half_even(&(x * pow10(places as i32)));
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int, frac) = digits.split_at(digits.len() - places);
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// `x` rounded half to even to `sig` significant figures, in plain
/// (non-exponent) notation.
pub fn significant(x: &BigRational, sig: u32) -> String {
    assert!(sig >= 1);
    if x.is_zero() {
        return "0".into();
    }
    let sign = if x.is_negative() { "-" } else { "" };
    let x = x.abs();
    let mut e = x.to_f64().map_or(0, |f| f.log10().floor() as i32);
    while pow10(e) > x {
        e -= 1;
    }
    while pow10(e + 1) <= x {
        e += 1;
    }
    let sig_i = sig as i32;
    let mut m = round_half_even(&(&x * pow10(sig_i - 1 - e)));
    if m == BigInt::from(10).pow(sig) {
        m = BigInt::from(10).pow(sig - 1);
        e += 1;
    }
    let digits = m.to_string();
    let body = if e >= sig_i - 1 {
        format!("{digits}{}", "0".repeat((e - (sig_i - 1)) as usize))
    } else if e >= 0 {
        let (a, b) = digits.split_at(e as usize + 1);
        format!("{a}.{b}")
    } else {
        format!("0.{}{digits}", "0".repeat((-e - 1) as usize))
    };
    format!("{sign}{body}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dec(s: &str) -> BigRational {
        parse_decimal(s).unwrap()
    }

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(dec("3.52"), BigRational::new(352.into(), 100.into()));
        assert_eq!(dec("50"), BigRational::from_integer(50.into()));
        assert_eq!(dec("-0.5"), BigRational::new((-1).into(), 2.into()));
        assert_eq!(dec("1.5e2"), BigRational::from_integer(150.into()));
        assert_eq!(dec(".25"), BigRational::new(1.into(), 4.into()));
        for bad in ["", ".", "abc", "1.2.3", "1e", "--1", "1,5"] {
            assert!(parse_decimal(bad).is_none(), "{bad}");
        }
    }

    #[test]
    fn fixed_rounding_is_half_even() {
        assert_eq!(fixed_decimal(&BigRational::new(24.into(), 56.into()), 4), "0.4286");
        assert_eq!(fixed_decimal(&dec("0.00005"), 4), "0.0000");
        assert_eq!(fixed_decimal(&dec("0.00015"), 4), "0.0002");
        assert_eq!(fixed_decimal(&dec("0.75"), 4), "0.7500");
        assert_eq!(fixed_decimal(&dec("2.5"), 0), "2");
        assert_eq!(fixed_decimal(&dec("-1.25"), 1), "-1.2");
    }

    #[test]
    fn significant_figures() {
        assert_eq!(significant(&dec("11.1634"), 3), "11.2");
        assert_eq!(significant(&dec("1.30625"), 3), "1.31");
        assert_eq!(significant(&dec("999.6"), 3), "1000");
        assert_eq!(significant(&dec("0.0012345"), 3), "0.00123");
        assert_eq!(significant(&dec("12345"), 3), "12300");
        assert_eq!(significant(&dec("1"), 3), "1.00");
        assert_eq!(significant(&dec("0.125"), 2), "0.12");
        assert_eq!(significant(&dec("0"), 3), "0");
    }

    #[test]
    fn reliability_examples() {
        assert_eq!(tmr_reliability(1.0).unwrap().r_tmr, 1.0);
        assert_eq!(tmr_reliability(0.5).unwrap().r_tmr, 0.5);
        assert_eq!(tmr_reliability(0.0).unwrap().r_tmr, 0.0);
        assert!((tmr_reliability(0.9).unwrap().r_tmr - 0.972).abs() < 1e-12);
        assert!(tmr_reliability(1.1).unwrap_err().is_usage());
        assert!(tmr_reliability(f64::NAN).is_err());
    }

    #[test]
    fn curve_grids() {
        let c = reliability_curve(0.5).unwrap();
        assert_eq!(c.iter().map(|p| p.r_tmr).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
        let c = reliability_curve(0.1).unwrap();
        assert_eq!(c.len(), 11);
        assert_eq!(c[10].r_m, 1.0);
        assert!((c[9].r_tmr - 0.972).abs() < 1e-12);
        let c = reliability_curve(0.25).unwrap();
        assert_eq!(c[3].r_tmr, 0.84375);
        assert!(matches!(reliability_curve(0.3), Err(Error::NonIntegralGrid(_))));
        assert!(reliability_curve(0.0).is_err());
        assert!(reliability_curve(1.5).is_err());
    }

    #[test]
    fn ft_fom_examples() {
        let classical = MetricsEntry::from_decimals("classical", "3.52", "0.13", "8.39", "42.86").unwrap();
        let bn = MetricsEntry::from_decimals("bn", "3.49", "0.22", "7.62", "50").unwrap();
        let c = ft_fom(&classical).unwrap();
        let b = ft_fom(&bn).unwrap();
        assert!((c.ft_fom_f64() - 11.16).abs() < 0.005, "{}", c.ft_fom_f64());
        assert!((b.ft_fom_f64() - 8.55).abs() < 0.005, "{}", b.ft_fom_f64());
        assert_eq!(c.ft_fom, &classical.fmr_percent / &c.pdap);
        assert_eq!(c.fom * &c.pdap, BigRational::one());
        let ratio = (&c.ft_fom / &b.ft_fom).to_f64().unwrap();
        assert!((ratio - 1.306).abs() < 0.005, "{ratio}");
    }

    #[test]
    fn ft_fom_rejects_nonpositive() {
        let e = MetricsEntry::from_decimals("x", "0", "1", "1", "50").unwrap();
        assert!(matches!(ft_fom(&e), Err(Error::NonPositiveMetric { field: "power_uw", .. })));
        let e = MetricsEntry::from_decimals("x", "1", "1", "1", "101").unwrap();
        assert!(matches!(ft_fom(&e), Err(Error::FmrPercentRange(_))));
    }

    #[test]
    fn rank_edge_cases() {
        let a = MetricsEntry::from_decimals("a", "1", "1", "1", "50").unwrap();
        let r = rank(std::slice::from_ref(&a)).unwrap();
        assert_eq!(r.ratio_to_best(0), BigRational::one());
        assert!(matches!(rank(&[a.clone(), a.clone()]), Err(Error::DuplicateVoter(_))));
        assert!(matches!(rank(&[]), Err(Error::Empty(_))));
        // ties resolved by name
        let b = MetricsEntry { voter: "b".into(), ..a.clone() };
        let r = rank(&[b, a]).unwrap();
        assert_eq!(r.entries[0].voter, "a");
    }

    #[test]
    fn metrics_csv() {
        let text = "voter,power_uw,delay_ns,area_um2,fmr_percent\nclassical,3.52,0.13,8.39,42.86\n";
        let e = read_metrics_csv(text).unwrap();
        assert_eq!(e[0].voter, "classical");
        assert_eq!(e[0].area_um2, dec("8.39"));
        assert!(read_metrics_csv("voter,power\nx,1\n").is_err());
        assert!(read_metrics_csv("voter,power_uw,delay_ns,area_um2,fmr_percent\n").is_err());
        let e = read_metrics_csv("voter,power_uw,delay_ns,area_um2,fmr_percent\nx,1,abc,1,1\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(read_metrics_csv("voter,power_uw,delay_ns,area_um2,fmr_percent\nx,1,-1,1,1\n").is_err());
    }
}
