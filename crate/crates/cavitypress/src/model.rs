//! Plain-text model descriptions for batch runs: indented key-value
//! blocks naming a group, a subshift, a potential, a schedule, measures,
//! and run settings. Parsing is total with line-numbered errors, and
//! unknown keys are rejected so that no tolerance defaults silently.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gibbs::markov::MarkovOracle;
use crate::gibbs::oracle::{MeasureOracle, PointSource};
use crate::group::{FiniteRegion, FolnerSchedule, GroupDescriptor, GroupPoint};
use crate::potential::{Interaction, InteractionTerm};
use crate::subshift::{Alphabet, SftSpec};

/// One named measure block, instantiated lazily against the model.
#[derive(Clone, Debug)]
pub enum MeasureDef {
    /// Dirac mass at the constant configuration of one symbol.
    Atomic { symbol: u8 },
    /// The exact Gibbs chain of the model itself (rank-one only).
    Gibbs,
    /// I.i.d. coin with the given probability of symbol 1.
    Bernoulli { p: f64 },
    /// Uniform measure on the orbit of a periodic point.
    Periodic { periods: Vec<i64>, values: BTreeMap<GroupPoint, u8> },
}

/// Settings of the `run` block.
#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Name of the measure to integrate against.
    pub measure: Option<String>,
    /// Name of the point source evaluated by `smb` (defaults to `measure`).
    pub point: Option<String>,
    pub tol: f64,
    pub seed: u64,
}

/// A parsed model description.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub desc: GroupDescriptor,
    pub sft: SftSpec,
    pub phi: Interaction,
    pub sched: FolnerSchedule,
    pub n_max: usize,
    pub depth: usize,
    pub entropy_depth: usize,
    pub collar: usize,
    pub budget: usize,
    pub widths: Vec<usize>,
    pub measures: BTreeMap<String, MeasureDef>,
    pub run: RunConfig,
}

struct Line {
    number: usize,
    indented: bool,
    key: String,
    rest: String,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn lex(text: &str) -> Result<Vec<Line>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let trimmed_end = raw.trim_end();
        if trimmed_end.trim_start().is_empty() || trimmed_end.trim_start().starts_with('#') {
            continue;
        }
        let indented = trimmed_end.starts_with(' ') || trimmed_end.starts_with('\t');
        let body = trimmed_end.trim_start();
        let (key, rest) = match body.split_once(char::is_whitespace) {
            Some((k, r)) => (k.to_string(), r.trim().to_string()),
            None => (body.to_string(), String::new()),
        };
        out.push(Line { number, indented, key, rest });
    }
    Ok(out)
}

fn parse_usize(line: usize, key: &str, s: &str) -> Result<usize> {
    s.parse().map_err(|_| err(line, format!("{key}: expected a nonnegative integer, got {s:?}")))
}

fn parse_u64(line: usize, key: &str, s: &str) -> Result<u64> {
    s.parse().map_err(|_| err(line, format!("{key}: expected an unsigned integer, got {s:?}")))
}

fn parse_f64(line: usize, key: &str, s: &str) -> Result<f64> {
    s.parse().map_err(|_| err(line, format!("{key}: expected a number, got {s:?}")))
}

fn parse_i64(line: usize, key: &str, s: &str) -> Result<i64> {
    s.parse().map_err(|_| err(line, format!("{key}: expected an integer, got {s:?}")))
}

fn parse_u8(line: usize, key: &str, s: &str) -> Result<u8> {
    s.parse().map_err(|_| err(line, format!("{key}: expected a symbol index, got {s:?}")))
}

/// `a,b` or `a` -> lattice coordinates of a point (coset given separately
/// with a `@c` suffix, default coset 0).
fn parse_point(line: usize, s: &str) -> Result<GroupPoint> {
    let (coords, coset) = match s.split_once('@') {
        Some((c, k)) => (c, parse_usize(line, "point", k)?),
        None => (s, 0),
    };
    let lattice = coords
        .split(',')
        .map(|c| parse_i64(line, "point", c.trim()))
        .collect::<Result<Vec<i64>>>()?;
    Ok(GroupPoint::new(coset, lattice))
}

type Block = (usize, String, Vec<Line>);

fn blocks(lines: Vec<Line>) -> Result<Vec<Block>> {
    let mut out: Vec<Block> = Vec::new();
    for line in lines {
        if line.indented {
            match out.last_mut() {
                Some((_, _, body)) => body.push(line),
                None => {
                    return Err(err(line.number, "indented line before any block header"))
                }
            }
        } else {
            out.push((line.number, format!("{} {}", line.key, line.rest).trim().to_string(), Vec::new()));
        }
    }
    Ok(out)
}

fn parse_group(header_line: usize, body: &[Line]) -> Result<GroupDescriptor> {
    let mut preset: Option<(usize, String)> = None;
    let mut rank: Option<usize> = None;
    let mut partition: Option<Vec<Vec<usize>>> = None;
    for l in body {
        match l.key.as_str() {
            "preset" => preset = Some((l.number, l.rest.clone())),
            "rank" => rank = Some(parse_usize(l.number, "rank", &l.rest)?),
            "partition" => {
                let mut blocks = Vec::new();
                for part in l.rest.split('|') {
                    let ids = part
                        .split_whitespace()
                        .map(|t| parse_usize(l.number, "partition", t))
                        .collect::<Result<Vec<usize>>>()?;
                    if ids.is_empty() {
                        return Err(err(l.number, "partition: empty block"));
                    }
                    blocks.push(ids);
                }
                partition = Some(blocks);
            }
            other => return Err(err(l.number, format!("unknown group key {other:?}"))),
        }
    }
    let (pline, preset) =
        preset.ok_or_else(|| err(header_line, "group block needs a preset"))?;
    let desc = match preset.as_str() {
        "z" => GroupDescriptor::zd(1),
        "zd" => GroupDescriptor::zd(
            rank.ok_or_else(|| err(pline, "preset zd needs a rank key"))?,
        ),
        "z_cross_z2" => GroupDescriptor::z_cross_z2(),
        other => return Err(err(pline, format!("unknown group preset {other:?}"))),
    };
    match partition {
        Some(p) => desc.with_partition(p).map_err(|e| err(pline, e.to_string())),
        None => Ok(desc),
    }
}

fn parse_subshift(header_line: usize, body: &[Line], desc: &GroupDescriptor) -> Result<SftSpec> {
    let mut preset: Option<(usize, String)> = None;
    let mut symbols: Option<usize> = None;
    let mut window: Option<(usize, Vec<GroupPoint>)> = None;
    let mut forbidden: Vec<(usize, Vec<u8>)> = Vec::new();
    for l in body {
        match l.key.as_str() {
            "preset" => preset = Some((l.number, l.rest.clone())),
            "symbols" => symbols = Some(parse_usize(l.number, "symbols", &l.rest)?),
            "window" => {
                let pts = l
                    .rest
                    .split_whitespace()
                    .map(|t| parse_point(l.number, t))
                    .collect::<Result<Vec<GroupPoint>>>()?;
                window = Some((l.number, pts));
            }
            "forbid" => {
                let row = l
                    .rest
                    .split_whitespace()
                    .map(|t| parse_u8(l.number, "forbid", t))
                    .collect::<Result<Vec<u8>>>()?;
                forbidden.push((l.number, row));
            }
            other => return Err(err(l.number, format!("unknown subshift key {other:?}"))),
        }
    }
    if let Some((pline, preset)) = preset {
        if window.is_some() || !forbidden.is_empty() {
            return Err(err(pline, "a subshift preset excludes window/forbid keys"));
        }
        return match preset.as_str() {
            "full" => {
                let s = symbols.unwrap_or(2);
                let labels = (0..s).map(|i| i.to_string()).collect();
                Ok(SftSpec::full(desc, Alphabet::new(labels).map_err(|e| err(pline, e.to_string()))?))
            }
            "golden_mean" => Ok(SftSpec::golden_mean(desc)),
            "no01" => Ok(SftSpec::no01_1d()),
            other => Err(err(pline, format!("unknown subshift preset {other:?}"))),
        };
    }
    let (wline, window) =
        window.ok_or_else(|| err(header_line, "subshift needs a preset or a window"))?;
    let s = symbols.ok_or_else(|| err(wline, "an inline subshift needs a symbols key"))?;
    let labels = (0..s).map(|i| i.to_string()).collect();
    let alphabet = Alphabet::new(labels).map_err(|e| err(wline, e.to_string()))?;
    // Forbid rows address the window sites in sorted order.
    let region = FiniteRegion::from_points(window);
    let rows = forbidden
        .into_iter()
        .map(|(line, row)| {
            if row.len() != region.len() {
                return Err(err(line, "forbid row length must match the window size"));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    SftSpec::new(alphabet, region, rows).map_err(|e| err(wline, e.to_string()))
}

fn parse_potential(header_line: usize, body: &[Line], desc: &GroupDescriptor, alphabet: usize) -> Result<Interaction> {
    let mut preset: Option<(usize, String)> = None;
    let mut lambda: Option<f64> = None;
    let mut beta: Option<f64> = None;
    let mut field: Option<f64> = None;
    let mut singleton: Option<(usize, Vec<f64>)> = None;
    for l in body {
        match l.key.as_str() {
            "preset" => preset = Some((l.number, l.rest.clone())),
            "lambda" => lambda = Some(parse_f64(l.number, "lambda", &l.rest)?),
            "beta" => beta = Some(parse_f64(l.number, "beta", &l.rest)?),
            "field" => field = Some(parse_f64(l.number, "field", &l.rest)?),
            "singleton" => {
                let table = l
                    .rest
                    .split_whitespace()
                    .map(|t| parse_f64(l.number, "singleton", t))
                    .collect::<Result<Vec<f64>>>()?;
                singleton = Some((l.number, table));
            }
            other => return Err(err(l.number, format!("unknown potential key {other:?}"))),
        }
    }
    if let Some((sline, table)) = singleton {
        if preset.is_some() {
            return Err(err(sline, "singleton excludes a preset"));
        }
        if table.len() != alphabet {
            return Err(err(sline, "singleton table must list one energy per symbol"));
        }
        let term = InteractionTerm::new(
            FiniteRegion::from_points([desc.identity()]),
            table,
            alphabet,
        )
        .map_err(|e| err(sline, e.to_string()))?;
        return Interaction::new(alphabet, vec![term]).map_err(|e| err(sline, e.to_string()));
    }
    let (pline, preset) =
        preset.ok_or_else(|| err(header_line, "potential needs a preset or a singleton table"))?;
    match preset.as_str() {
        "zero" => Ok(Interaction::zero(alphabet)),
        "hardcore" => Interaction::hardcore(
            desc,
            lambda.ok_or_else(|| err(pline, "preset hardcore needs lambda"))?,
        )
        .map_err(|e| err(pline, e.to_string())),
        "ising" => Interaction::ising(
            desc,
            beta.ok_or_else(|| err(pline, "preset ising needs beta"))?,
            field.unwrap_or(0.0),
        )
        .map_err(|e| err(pline, e.to_string())),
        other => Err(err(pline, format!("unknown potential preset {other:?}"))),
    }
}

struct ScheduleBlock {
    sched: FolnerSchedule,
    n_max: usize,
    depth: usize,
    entropy_depth: usize,
    collar: usize,
    budget: usize,
    widths: Vec<usize>,
}

fn parse_schedule(body: &[Line]) -> Result<ScheduleBlock> {
    let mut out = ScheduleBlock {
        sched: FolnerSchedule::centered(),
        n_max: 8,
        depth: 12,
        entropy_depth: 2,
        collar: 2,
        budget: 1 << 22,
        widths: vec![2, 4, 6, 8],
    };
    for l in body {
        match l.key.as_str() {
            "shape" => {
                out.sched = match l.rest.as_str() {
                    "centered" => FolnerSchedule::centered(),
                    "half_open" => FolnerSchedule::half_open(),
                    other => return Err(err(l.number, format!("unknown shape {other:?}"))),
                }
            }
            "n_max" => out.n_max = parse_usize(l.number, "n_max", &l.rest)?,
            "depth" => out.depth = parse_usize(l.number, "depth", &l.rest)?,
            "entropy_depth" => {
                out.entropy_depth = parse_usize(l.number, "entropy_depth", &l.rest)?
            }
            "collar" => out.collar = parse_usize(l.number, "collar", &l.rest)?,
            "budget" => out.budget = parse_usize(l.number, "budget", &l.rest)?,
            "widths" => {
                out.widths = l
                    .rest
                    .split_whitespace()
                    .map(|t| parse_usize(l.number, "widths", t))
                    .collect::<Result<Vec<usize>>>()?;
            }
            other => return Err(err(l.number, format!("unknown schedule key {other:?}"))),
        }
    }
    Ok(out)
}

fn parse_measure(header_line: usize, body: &[Line]) -> Result<MeasureDef> {
    let mut kind: Option<(usize, String)> = None;
    let mut symbol: Option<u8> = None;
    let mut p: Option<f64> = None;
    let mut periods: Option<Vec<i64>> = None;
    let mut values: BTreeMap<GroupPoint, u8> = BTreeMap::new();
    for l in body {
        match l.key.as_str() {
            "kind" => kind = Some((l.number, l.rest.clone())),
            "symbol" => symbol = Some(parse_u8(l.number, "symbol", &l.rest)?),
            "p" => p = Some(parse_f64(l.number, "p", &l.rest)?),
            "periods" => {
                periods = Some(
                    l.rest
                        .split_whitespace()
                        .map(|t| parse_i64(l.number, "periods", t))
                        .collect::<Result<Vec<i64>>>()?,
                )
            }
            "value" => {
                let (at, v) = l
                    .rest
                    .rsplit_once(char::is_whitespace)
                    .ok_or_else(|| err(l.number, "value needs a point and a symbol"))?;
                values.insert(parse_point(l.number, at.trim())?, parse_u8(l.number, "value", v)?);
            }
            other => return Err(err(l.number, format!("unknown measure key {other:?}"))),
        }
    }
    let (kline, kind) = kind.ok_or_else(|| err(header_line, "measure block needs a kind"))?;
    match kind.as_str() {
        "atomic" => Ok(MeasureDef::Atomic {
            symbol: symbol.ok_or_else(|| err(kline, "kind atomic needs a symbol"))?,
        }),
        "gibbs" => Ok(MeasureDef::Gibbs),
        "bernoulli" => Ok(MeasureDef::Bernoulli {
            p: p.ok_or_else(|| err(kline, "kind bernoulli needs p"))?,
        }),
        "periodic" => {
            let periods = periods.ok_or_else(|| err(kline, "kind periodic needs periods"))?;
            if values.is_empty() {
                return Err(err(kline, "kind periodic needs value lines"));
            }
            Ok(MeasureDef::Periodic { periods, values })
        }
        other => Err(err(kline, format!("unknown measure kind {other:?}"))),
    }
}

fn parse_run(body: &[Line]) -> Result<RunConfig> {
    let mut out = RunConfig { measure: None, point: None, tol: 1e-6, seed: 0 };
    for l in body {
        match l.key.as_str() {
            "measure" => out.measure = Some(l.rest.clone()),
            "point" => out.point = Some(l.rest.clone()),
            "tol" => out.tol = parse_f64(l.number, "tol", &l.rest)?,
            "seed" => out.seed = parse_u64(l.number, "seed", &l.rest)?,
            other => return Err(err(l.number, format!("unknown run key {other:?}"))),
        }
    }
    Ok(out)
}

impl ModelSpec {
    pub fn parse(text: &str) -> Result<ModelSpec> {
        let mut group: Option<GroupDescriptor> = None;
        let mut subshift_block: Option<(usize, Vec<Line>)> = None;
        let mut potential_block: Option<(usize, Vec<Line>)> = None;
        let mut schedule = ScheduleBlock {
            sched: FolnerSchedule::centered(),
            n_max: 8,
            depth: 12,
            entropy_depth: 2,
            collar: 2,
            budget: 1 << 22,
            widths: vec![2, 4, 6, 8],
        };
        let mut measures = BTreeMap::new();
        let mut run = RunConfig { measure: None, point: None, tol: 1e-6, seed: 0 };
        for (line, header, body) in blocks(lex(text)?)? {
            let mut words = header.split_whitespace();
            match (words.next().unwrap_or(""), words.next()) {
                ("group", None) => group = Some(parse_group(line, &body)?),
                ("subshift", None) => subshift_block = Some((line, body)),
                ("potential", None) => potential_block = Some((line, body)),
                ("schedule", None) => schedule = parse_schedule(&body)?,
                ("measure", Some(name)) => {
                    let def = parse_measure(line, &body)?;
                    if measures.insert(name.to_string(), def).is_some() {
                        return Err(err(line, format!("duplicate measure {name:?}")));
                    }
                }
                ("run", None) => run = parse_run(&body)?,
                (other, _) => {
                    return Err(err(line, format!("unknown block header {other:?}")))
                }
            }
        }
        let desc = group.ok_or_else(|| err(1, "missing group block"))?;
        let (sline, sbody) =
            subshift_block.ok_or_else(|| err(1, "missing subshift block"))?;
        let sft = parse_subshift(sline, &sbody, &desc)?;
        let phi = match potential_block {
            Some((pline, pbody)) => {
                parse_potential(pline, &pbody, &desc, sft.alphabet.size())?
            }
            None => Interaction::zero(sft.alphabet.size()),
        };
        if phi.alphabet_size() != sft.alphabet.size() {
            return Err(err(1, "potential alphabet does not match the subshift"));
        }
        Ok(ModelSpec {
            desc,
            sft,
            phi,
            sched: schedule.sched,
            n_max: schedule.n_max,
            depth: schedule.depth,
            entropy_depth: schedule.entropy_depth,
            collar: schedule.collar,
            budget: schedule.budget,
            widths: schedule.widths,
            measures,
            run,
        })
    }

    /// Instantiate a named measure against this model.
    pub fn measure(&self, name: &str) -> Result<MeasureOracle> {
        let def = self.measures.get(name).ok_or_else(|| {
            Error::precondition(format!("no measure named {name:?} in the model description"))
        })?;
        match def {
            MeasureDef::Atomic { symbol } => {
                Ok(MeasureOracle::Atomic(PointSource::Constant(*symbol)))
            }
            MeasureDef::Gibbs => {
                let chain =
                    MarkovOracle::from_nearest_neighbor(&self.desc, &self.sft, &self.phi)?;
                Ok(MeasureOracle::Markov(chain))
            }
            MeasureDef::Bernoulli { p } => {
                let chain = MarkovOracle::from_chain(
                    vec![1.0 - p, *p],
                    vec![vec![1.0 - p, *p], vec![1.0 - p, *p]],
                )?;
                Ok(MeasureOracle::Markov(chain))
            }
            MeasureDef::Periodic { periods, values } => Ok(MeasureOracle::PeriodicOrbit(
                self.desc.clone(),
                PointSource::Periodic { periods: periods.clone(), values: values.clone() },
            )),
        }
    }

    /// The point source a pointwise estimator walks over.
    pub fn point_source(&self, name: &str) -> Result<PointSource> {
        let def = self.measures.get(name).ok_or_else(|| {
            Error::precondition(format!("no measure named {name:?} in the model description"))
        })?;
        match def {
            MeasureDef::Atomic { symbol } => Ok(PointSource::Constant(*symbol)),
            MeasureDef::Periodic { periods, values } => {
                Ok(PointSource::Periodic { periods: periods.clone(), values: values.clone() })
            }
            _ => Err(Error::precondition(format!(
                "measure {name:?} is not supported by a single point"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = "\
group
  preset z
subshift
  preset golden_mean
potential
  preset hardcore
  lambda 1.0
schedule
  n_max 10
  depth 20
measure delta_zero
  kind atomic
  symbol 0
measure mu
  kind gibbs
run
  measure mu
  point delta_zero
  tol 1e-6
  seed 7
";

    #[test]
    fn golden_mean_description_round_trips() {
        let spec = ModelSpec::parse(GOLDEN).unwrap();
        assert_eq!(spec.desc.rank(), 1);
        assert_eq!(spec.sft.alphabet.size(), 2);
        assert_eq!(spec.n_max, 10);
        assert_eq!(spec.depth, 20);
        assert_eq!(spec.run.seed, 7);
        assert!(matches!(spec.measure("mu").unwrap(), MeasureOracle::Markov(_)));
        assert!(matches!(spec.measure("delta_zero").unwrap(), MeasureOracle::Atomic(_)));
        assert!(spec.measure("nope").is_err());
    }

    #[test]
    fn unknown_keys_are_line_numbered_errors() {
        let bad = "group\n  preset z\n  frobnicate 3\n";
        let e = ModelSpec::parse(bad).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("line 3"), "{e}");
        let bad = "group\n  preset z\nsubshift\n  preset golden_mean\nrun\n  tol zero\n";
        let e = ModelSpec::parse(bad).unwrap_err();
        assert!(e.to_string().contains("line 6"), "{e}");
    }

    #[test]
    fn inline_subshift_and_singleton_potential() {
        let text = "\
group
  preset z
subshift
  symbols 2
  window 0 1
  forbid 1 1
potential
  singleton 0.0 -0.5
";
        let spec = ModelSpec::parse(text).unwrap();
        assert_eq!(spec.sft.forbidden().len(), 1);
        assert_eq!(spec.phi.terms().len(), 1);
    }

    #[test]
    fn product_group_with_partition() {
        let text = "\
group
  preset z_cross_z2
  partition 0 1
subshift
  preset golden_mean
";
        let spec = ModelSpec::parse(text).unwrap();
        assert_eq!(spec.desc.block_count(), 1);
        let default = ModelSpec::parse("group\n  preset z_cross_z2\nsubshift\n  preset golden_mean\n").unwrap();
        assert_eq!(default.desc.block_count(), 2);
    }

    #[test]
    fn periodic_measure_parses_points() {
        let text = "\
group
  preset z
subshift
  preset golden_mean
measure orbit
  kind periodic
  periods 2
  value 0 1
  value 1 0
";
        let spec = ModelSpec::parse(text).unwrap();
        match spec.measure("orbit").unwrap() {
            MeasureOracle::PeriodicOrbit(_, PointSource::Periodic { periods, values }) => {
                assert_eq!(periods, vec![2]);
                assert_eq!(values.len(), 2);
            }
            other => panic!("unexpected oracle {other:?}"),
        }
    }

    #[test]
    fn indentation_before_any_block_is_an_error() {
        let e = ModelSpec::parse("  preset z\n").unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }
}
