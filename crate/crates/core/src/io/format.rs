//! Plain-text instance files.
//!
//! ```text
//! tesp-instance 1
//! [meta]
//! name = tri3
//! intervals = 4
//!
//! [buses]
//! # id demand max_generation curtailment_cost storage_unit_cost max_storage
//! 0 0 150 18000 2000 0
//! 1 20,35,60,30 0 18000 2000 80
//! 2 profile=long_peak:40 0 18000 2000 80
//!
//! [rights_of_way]
//! # from to existing max_new cost susceptance flow_limit
//! 0 1 1 2 120000 2 40
//! ```
//!
//! Fields are separated by whitespace; `#` starts a comment; blank lines are
//! ignored. A series field (demand, curtailment cost) is one number
//! (constant over all intervals), a comma-separated list of `intervals`
//! numbers, or `profile=<name>:<peak>`. Numbers are written in Rust's
//! shortest round-trip form, which makes [`InstanceFile::to_text`] the
//! canonical spelling of a file.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::io::profiles::DemandProfile;
use crate::model::{Bus, Instance, RightOfWay};
use crate::scalar::Scalar;

pub const HEADER: &str = "tesp-instance 1";
const BUS_COLUMNS: &str = "# id demand max_generation curtailment_cost storage_unit_cost max_storage";
const ROW_COLUMNS: &str = "# from to existing max_new cost susceptance flow_limit";

/// A per-interval quantity as written in the file.
#[derive(Clone, Debug, PartialEq)]
pub enum SeriesSpec {
    Constant(f64),
    Values(Vec<f64>),
    Profile { profile: DemandProfile, peak: f64 },
}

impl SeriesSpec {
    pub fn expand(&self, intervals: usize) -> Vec<f64> {
        match self {
            SeriesSpec::Constant(v) => vec![*v; intervals],
            SeriesSpec::Values(v) => v.clone(),
            SeriesSpec::Profile { profile, peak } => profile.demand(*peak, intervals),
        }
    }

    /// Compact spelling of a plain series.
    pub fn from_values(values: Vec<f64>) -> Self {
        match values.first() {
            Some(&first) if values.iter().all(|&v| v == first) => SeriesSpec::Constant(first),
            _ => SeriesSpec::Values(values),
        }
    }

    fn write(&self, out: &mut String) {
        match self {
            SeriesSpec::Constant(v) => write!(out, "{v}").unwrap(),
            SeriesSpec::Values(values) => {
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write!(out, "{v}").unwrap();
                }
            }
            SeriesSpec::Profile { profile, peak } => write!(out, "profile={profile}:{peak}").unwrap(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BusRecord {
    pub id: usize,
    pub demand: SeriesSpec,
    pub max_generation: f64,
    pub curtailment_cost: SeriesSpec,
    pub storage_unit_cost: f64,
    pub max_storage: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RightOfWayRecord {
    pub from: usize,
    pub to: usize,
    pub existing: usize,
    pub max_new: usize,
    pub cost: f64,
    pub susceptance: f64,
    pub flow_limit: f64,
}

/// Parsed instance file. Keeps the way series were written so that
/// serialization reproduces the file.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceFile {
    pub name: String,
    pub intervals: usize,
    pub buses: Vec<BusRecord>,
    pub rights_of_way: Vec<RightOfWayRecord>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Header,
    Meta,
    Buses,
    RightsOfWay,
}

impl Section {
    fn name(self) -> &'static str {
        match self {
            Section::Header => "header",
            Section::Meta => "meta",
            Section::Buses => "buses",
            Section::RightsOfWay => "rights_of_way",
        }
    }
}

struct Cursor {
    line: usize,
    section: Section,
}

impl Cursor {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            section: self.section.name().to_string(),
            message: message.into(),
        }
    }
}

fn number(cur: &Cursor, what: &str, token: &str) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|_| cur.err(format!("{what}: '{token}' is not a number")))
}

fn count(cur: &Cursor, what: &str, token: &str) -> Result<usize> {
    token
        .parse::<usize>()
        .map_err(|_| cur.err(format!("{what}: '{token}' is not a non-negative integer")))
}

fn series(cur: &Cursor, what: &str, token: &str, intervals: usize) -> Result<SeriesSpec> {
    if let Some(rest) = token.strip_prefix("profile=") {
        let (name, peak) = rest
            .split_once(':')
            .ok_or_else(|| cur.err(format!("{what}: expected profile=<name>:<peak>, found '{token}'")))?;
        let profile = name
            .parse::<DemandProfile>()
            .map_err(|e| cur.err(format!("{what}: {e}")))?;
        return Ok(SeriesSpec::Profile {
            profile,
            peak: number(cur, what, peak)?,
        });
    }
    if token.contains(',') {
        let values = token
            .split(',')
            .map(|v| number(cur, what, v))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != intervals {
            return Err(cur.err(format!("{what}: {} values for {intervals} intervals", values.len())));
        }
        return Ok(SeriesSpec::Values(values));
    }
    Ok(SeriesSpec::Constant(number(cur, what, token)?))
}

fn fields<'a>(cur: &Cursor, entity: &str, line: &'a str, names: &[&str]) -> Result<Vec<&'a str>> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() < names.len() {
        return Err(cur.err(format!(
            "{entity}: missing {} (found {} of {} fields)",
            names[tokens.len()],
            tokens.len(),
            names.len()
        )));
    }
    if tokens.len() > names.len() {
        return Err(cur.err(format!("{entity}: {} fields, expected {}", tokens.len(), names.len())));
    }
    Ok(tokens)
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cur = Cursor {
            line: 0,
            section: Section::Header,
        };
        let mut name: Option<String> = None;
        let mut intervals: Option<usize> = None;
        let mut buses = Vec::new();
        let mut rights_of_way = Vec::new();
        let mut seen_header = false;

        for (i, raw) in text.lines().enumerate() {
            cur.line = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if !seen_header {
                if line != HEADER {
                    return Err(cur.err(format!("expected '{HEADER}', found '{line}'")));
                }
                seen_header = true;
                continue;
            }
            if line.starts_with('[') {
                cur.section = match line {
                    "[meta]" => Section::Meta,
                    "[buses]" => Section::Buses,
                    "[rights_of_way]" => Section::RightsOfWay,
                    other => return Err(cur.err(format!("unknown section {other}"))),
                };
                if cur.section != Section::Meta && intervals.is_none() {
                    return Err(cur.err("[meta] with 'intervals' must come first"));
                }
                continue;
            }
            match cur.section {
                Section::Header => return Err(cur.err("data before the first section")),
                Section::Meta => {
                    let (key, value) = line
                        .split_once('=')
                        .ok_or_else(|| cur.err(format!("expected key = value, found '{line}'")))?;
                    match key.trim() {
                        "name" => name = Some(value.trim().to_string()),
                        "intervals" => {
                            let t = count(&cur, "intervals", value.trim())?;
                            if t == 0 {
                                return Err(cur.err("intervals must be at least 1"));
                            }
                            intervals = Some(t);
                        }
                        other => return Err(cur.err(format!("unknown key '{other}'"))),
                    }
                }
                Section::Buses => {
                    let t = intervals.expect("checked on section entry");
                    let entity = format!("bus {}", buses.len());
                    let f = fields(
                        &cur,
                        &entity,
                        line,
                        &[
                            "id",
                            "demand",
                            "max_generation",
                            "curtailment_cost",
                            "storage_unit_cost",
                            "max_storage",
                        ],
                    )?;
                    buses.push(BusRecord {
                        id: count(&cur, &format!("{entity} id"), f[0])?,
                        demand: series(&cur, &format!("{entity} demand"), f[1], t)?,
                        max_generation: number(&cur, &format!("{entity} max_generation"), f[2])?,
                        curtailment_cost: series(&cur, &format!("{entity} curtailment_cost"), f[3], t)?,
                        storage_unit_cost: number(&cur, &format!("{entity} storage_unit_cost"), f[4])?,
                        max_storage: number(&cur, &format!("{entity} max_storage"), f[5])?,
                    });
                }
                Section::RightsOfWay => {
                    let entity = format!("right of way {}", rights_of_way.len());
                    let f = fields(
                        &cur,
                        &entity,
                        line,
                        &["from", "to", "existing", "max_new", "cost", "susceptance", "flow_limit"],
                    )?;
                    rights_of_way.push(RightOfWayRecord {
                        from: count(&cur, &format!("{entity} from"), f[0])?,
                        to: count(&cur, &format!("{entity} to"), f[1])?,
                        existing: count(&cur, &format!("{entity} existing"), f[2])?,
                        max_new: count(&cur, &format!("{entity} max_new"), f[3])?,
                        cost: number(&cur, &format!("{entity} cost"), f[4])?,
                        susceptance: number(&cur, &format!("{entity} susceptance"), f[5])?,
                        flow_limit: number(&cur, &format!("{entity} flow_limit"), f[6])?,
                    });
                }
            }
        }
        cur.section = Section::Meta;
        if !seen_header {
            return Err(cur.err(format!("empty document, expected '{HEADER}'")));
        }
        Ok(Self {
            name: name.ok_or_else(|| cur.err("missing 'name'"))?,
            intervals: intervals.ok_or_else(|| cur.err("missing 'intervals'"))?,
            buses,
            rights_of_way,
        })
    }

    /// Canonical text. `parse(to_text(f)) == f` for every file.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{HEADER}").unwrap();
        writeln!(out, "[meta]").unwrap();
        writeln!(out, "name = {}", self.name).unwrap();
        writeln!(out, "intervals = {}", self.intervals).unwrap();
        writeln!(out).unwrap();
        writeln!(out, "[buses]").unwrap();
        writeln!(out, "{BUS_COLUMNS}").unwrap();
        for b in &self.buses {
            write!(out, "{} ", b.id).unwrap();
            b.demand.write(&mut out);
            write!(out, " {} ", b.max_generation).unwrap();
            b.curtailment_cost.write(&mut out);
            writeln!(out, " {} {}", b.storage_unit_cost, b.max_storage).unwrap();
        }
        writeln!(out).unwrap();
        writeln!(out, "[rights_of_way]").unwrap();
        writeln!(out, "{ROW_COLUMNS}").unwrap();
        for r in &self.rights_of_way {
            writeln!(
                out,
                "{} {} {} {} {} {} {}",
                r.from, r.to, r.existing, r.max_new, r.cost, r.susceptance, r.flow_limit
            )
            .unwrap();
        }
        out
    }

    pub fn to_instance<S: Scalar>(&self) -> Instance<S> {
        let t = self.intervals;
        let buses = self
            .buses
            .iter()
            .map(|b| Bus {
                id: b.id,
                demand: b.demand.expand(t).into_iter().map(S::of).collect(),
                max_generation: S::of(b.max_generation),
                curtailment_cost: b.curtailment_cost.expand(t).into_iter().map(S::of).collect(),
                storage_unit_cost: S::of(b.storage_unit_cost),
                max_storage: S::of(b.max_storage),
            })
            .collect();
        let rows = self
            .rights_of_way
            .iter()
            .map(|r| {
                RightOfWay::new(
                    r.from,
                    r.to,
                    r.existing,
                    r.max_new,
                    S::of(r.cost),
                    S::of(r.susceptance),
                    S::of(r.flow_limit),
                )
            })
            .collect();
        Instance::new(self.name.clone(), t, buses, rows)
    }

    /// File spelling of an instance; series become constants where possible.
    pub fn from_instance<S: Scalar>(inst: &Instance<S>) -> Self {
        let f = |v: &[S]| SeriesSpec::from_values(v.iter().map(|x| x.as_f64()).collect());
        Self {
            name: inst.name().to_string(),
            intervals: inst.num_intervals(),
            buses: inst
                .buses()
                .iter()
                .map(|b| BusRecord {
                    id: b.id,
                    demand: f(&b.demand),
                    max_generation: b.max_generation.as_f64(),
                    curtailment_cost: f(&b.curtailment_cost),
                    storage_unit_cost: b.storage_unit_cost.as_f64(),
                    max_storage: b.max_storage.as_f64(),
                })
                .collect(),
            rights_of_way: inst
                .rights_of_way()
                .iter()
                .map(|r| RightOfWayRecord {
                    from: r.from_bus,
                    to: r.to_bus,
                    existing: r.existing_circuits,
                    max_new: r.max_new_circuits,
                    cost: r.circuit_cost.as_f64(),
                    susceptance: r.susceptance.as_f64(),
                    flow_limit: r.flow_limit.as_f64(),
                })
                .collect(),
        }
    }
}

/// Parses a document straight into an instance.
pub fn parse_instance<S: Scalar>(text: &str) -> Result<Instance<S>> {
    Ok(InstanceFile::parse(text)?.to_instance())
}

/// Canonical text of an instance.
pub fn serialize_instance<S: Scalar>(inst: &Instance<S>) -> String {
    InstanceFile::from_instance(inst).to_text()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "tesp-instance 1
[meta]
name = small
intervals = 2

[buses]
# id demand max_generation curtailment_cost storage_unit_cost max_storage
0 0 10 100 2000 0
1 3.5,4 0 100,120 2000 5
2 profile=flat:2 0 100 2000 0

[rights_of_way]
# from to existing max_new cost susceptance flow_limit
0 1 1 2 50 1.5 4
1 2 0 1 20 2 3
";

    #[test]
    fn canonical_text_round_trips() {
        let f = InstanceFile::parse(SMALL).unwrap();
        assert_eq!(f.to_text(), SMALL);
        assert_eq!(InstanceFile::parse(&f.to_text()).unwrap(), f);
        let inst: Instance = f.to_instance();
        assert_eq!(inst.buses()[2].demand, vec![2.0, 2.0]);
        assert_eq!(inst.buses()[1].curtailment_cost, vec![100.0, 120.0]);
    }

    #[test]
    fn missing_susceptance_names_the_row() {
        let broken = SMALL.replace("1 2 0 1 20 2 3", "1 2 0 1 20 3");
        let err = InstanceFile::parse(&broken).unwrap_err().to_string();
        assert!(err.contains("right of way 1"), "{err}");
        assert!(err.contains("flow_limit") || err.contains("susceptance"), "{err}");
        assert!(err.contains("line 15"), "{err}");
    }

    #[test]
    fn positional_errors() {
        let e = InstanceFile::parse("tesp-instance 2\n").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
        let e = InstanceFile::parse(&SMALL.replace("3.5,4", "3.5,4,1"))
            .unwrap_err()
            .to_string();
        assert!(e.contains("bus 1 demand") && e.contains("3 values"), "{e}");
        let e = InstanceFile::parse(&SMALL.replace("profile=flat", "profile=spiky"))
            .unwrap_err()
            .to_string();
        assert!(e.contains("unknown profile"), "{e}");
        let e = InstanceFile::parse(&SMALL.replace("[buses]", "[nodes]"))
            .unwrap_err()
            .to_string();
        assert!(e.contains("unknown section"), "{e}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let noisy = SMALL.replace("[buses]", "\n# network\n[buses]   # nodes");
        assert_eq!(
            InstanceFile::parse(&noisy).unwrap(),
            InstanceFile::parse(SMALL).unwrap()
        );
    }
}
