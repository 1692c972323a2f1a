//! Text instance files and JSON solution files.
//!
//! Instance files are line oriented:
//!
//! ```text
//! # comment
//! NAME square
//! SIZE 4
//! FLEET
//! 0 3 6 inf        # class capacity distance-bound [multiplicity|inf]
//! DEMANDS
//! 0 1 1 1
//! COORDS           # depot first; or MATRIX with the strict lower triangle
//! 0 0
//! 1 0
//! 0 1
//! 1 1
//! EOF
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Error;
use crate::instance::{
    euclidean_instance, validate_instance, FleetSpec, MetricInstance, Multiplicity, VehicleClass, ViolationKind,
};
use crate::solvers::{AssignedTour, BalancedPaths, RoutingSolution, SolutionMeta};
use crate::tree::Tour;
use crate::EPS;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Pos {
    line: usize,
    column: usize,
}

impl Pos {
    fn err(self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Fleet,
    Demands,
    Coords,
    Matrix,
}

impl Section {
    fn keyword(self) -> &'static str {
        match self {
            Section::Fleet => "FLEET",
            Section::Demands => "DEMANDS",
            Section::Coords => "COORDS",
            Section::Matrix => "MATRIX",
        }
    }
}

#[derive(Default)]
struct Raw<'a> {
    name: Option<String>,
    size: Option<(usize, Pos)>,
    headers: Vec<(Section, Pos)>,
    fleet_lines: Vec<Vec<(&'a str, Pos)>>,
    demands: Vec<(&'a str, Pos)>,
    coords: Vec<(&'a str, Pos)>,
    matrix: Vec<(&'a str, Pos)>,
    end: Pos,
}

impl Raw<'_> {
    fn header(&self, s: Section) -> Option<Pos> {
        self.headers.iter().find(|(h, _)| *h == s).map(|(_, p)| *p)
    }
}

fn tokens(line: &str, lineno: usize) -> Vec<(&str, Pos)> {
    let body = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((
                    &body[s..i],
                    Pos {
                        line: lineno,
                        column: s + 1,
                    },
                ));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((
            &body[s..],
            Pos {
                line: lineno,
                column: s + 1,
            },
        ));
    }
    out
}

fn number((tok, pos): (&str, Pos)) -> Result<f64, ParseError> {
    match tok.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(pos.err(format!("expected a number, found `{tok}`"))),
    }
}

fn scan(text: &str) -> Result<Raw<'_>, ParseError> {
    let mut raw = Raw::default();
    let mut current: Option<Section> = None;
    let mut last_line = 0;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let toks = tokens(line, lineno);
        let Some(&(first, pos)) = toks.first() else {
            continue;
        };
        let starts_alpha = first.starts_with(|c: char| c.is_ascii_alphabetic());
        let is_number = first.parse::<f64>().is_ok();
        let mut data = &toks[..];
        if starts_alpha && !is_number {
            let section = match first {
                "EOF" => break,
                "NAME" => {
                    let rest = line.split('#').next().unwrap_or("").trim_start();
                    let name = rest["NAME".len()..].trim();
                    raw.name = Some(if name.is_empty() { "unnamed".into() } else { name.into() });
                    current = None;
                    continue;
                }
                "SIZE" => {
                    let &(tok, p) = toks.get(1).ok_or_else(|| pos.err("SIZE needs a value"))?;
                    let n = tok
                        .parse::<usize>()
                        .map_err(|_| p.err(format!("expected a vertex count, found `{tok}`")))?;
                    if raw.size.is_some() {
                        return Err(pos.err("duplicate SIZE"));
                    }
                    raw.size = Some((n, pos));
                    current = None;
                    continue;
                }
                "FLEET" => Section::Fleet,
                "DEMANDS" => Section::Demands,
                "COORDS" => Section::Coords,
                "MATRIX" => Section::Matrix,
                other => return Err(pos.err(format!("unknown section `{other}`"))),
            };
            if raw.header(section).is_some() {
                return Err(pos.err(format!("duplicate {} section", section.keyword())));
            }
            raw.headers.push((section, pos));
            current = Some(section);
            data = &toks[1..];
            if data.is_empty() {
                continue;
            }
        }
        match current {
            None => return Err(pos.err("data outside of any section")),
            Some(Section::Fleet) => raw.fleet_lines.push(data.to_vec()),
            Some(Section::Demands) => raw.demands.extend_from_slice(data),
            Some(Section::Coords) => raw.coords.extend_from_slice(data),
            Some(Section::Matrix) => raw.matrix.extend_from_slice(data),
        }
    }
    raw.end = Pos {
        line: last_line + 1,
        column: 1,
    };
    Ok(raw)
}

fn parse_fleet(raw: &Raw<'_>, at: Pos) -> Result<FleetSpec, ParseError> {
    let mut classes: Vec<(usize, VehicleClass, Pos)> = Vec::new();
    for line in &raw.fleet_lines {
        let pos = line[0].1;
        if !(3..=4).contains(&line.len()) {
            return Err(pos.err("fleet line needs `class capacity bound [multiplicity|inf]`"));
        }
        let id = line[0]
            .0
            .parse::<usize>()
            .map_err(|_| pos.err(format!("expected a class index, found `{}`", line[0].0)))?;
        let capacity = number(line[1])?;
        let bound = number(line[2])?;
        let multiplicity = match line.get(3) {
            None => Multiplicity::Unbounded,
            Some(&("inf", _)) => Multiplicity::Unbounded,
            Some(&(tok, p)) => Multiplicity::Limited(
                tok.parse::<u32>()
                    .map_err(|_| p.err(format!("expected a multiplicity or `inf`, found `{tok}`")))?,
            ),
        };
        classes.push((
            id,
            VehicleClass::new(capacity, bound).with_multiplicity(multiplicity),
            pos,
        ));
    }
    classes.sort_by_key(|c| c.0);
    for (expect, (id, _, pos)) in classes.iter().enumerate() {
        if *id != expect {
            return Err(pos.err(format!("class indices must be 0..{}, found {id}", classes.len())));
        }
    }
    FleetSpec::new(classes.into_iter().map(|c| c.1).collect()).map_err(|e| at.err(e.to_string()))
}

/// Parses an instance file without checking metric properties.
pub fn parse_instance_unchecked(text: &str) -> Result<MetricInstance, ParseError> {
    parse_with_positions(text).map(|(inst, _)| inst)
}

struct Positions {
    matrix: Vec<Pos>,
    demands: Vec<Pos>,
    fleet: Pos,
    geometry: Pos,
}

fn parse_with_positions(text: &str) -> Result<(MetricInstance, Positions), ParseError> {
    let raw = scan(text)?;
    let (n, size_pos) = raw.size.ok_or_else(|| raw.end.err("missing SIZE"))?;
    if n == 0 {
        return Err(size_pos.err("SIZE must be at least 1"));
    }
    let fleet_pos = raw
        .header(Section::Fleet)
        .ok_or_else(|| raw.end.err("missing FLEET section"))?;
    let demand_pos = raw
        .header(Section::Demands)
        .ok_or_else(|| raw.end.err("missing DEMANDS section"))?;
    let fleet = parse_fleet(&raw, fleet_pos)?;

    if raw.demands.len() != n {
        let at = raw.demands.get(n).map_or(demand_pos, |t| t.1);
        return Err(at.err(format!("expected {n} demands, found {}", raw.demands.len())));
    }
    let demands = raw.demands.iter().map(|&t| number(t)).collect::<Result<Vec<_>, _>>()?;

    let (inst, geometry, matrix_pos) = match (raw.header(Section::Coords), raw.header(Section::Matrix)) {
        (Some(_), Some(p)) => return Err(p.err("give exactly one of COORDS and MATRIX")),
        (None, None) => return Err(raw.end.err("missing COORDS or MATRIX section")),
        (Some(at), None) => {
            if raw.coords.len() != 2 * n {
                let p = raw.coords.get(2 * n).map_or(at, |t| t.1);
                return Err(p.err(format!("expected {} coordinates, found {}", 2 * n, raw.coords.len())));
            }
            let vals = raw.coords.iter().map(|&t| number(t)).collect::<Result<Vec<_>, _>>()?;
            let points: Vec<_> = vals.chunks(2).map(|c| (c[0], c[1])).collect();
            let inst = euclidean_instance(&points, &demands, fleet).map_err(|e| at.err(e.to_string()))?;
            (inst, at, Vec::new())
        }
        (None, Some(at)) => {
            let want = n * (n - 1) / 2;
            if raw.matrix.len() != want {
                let p = raw.matrix.get(want).map_or(at, |t| t.1);
                return Err(p.err(format!(
                    "expected {want} lower-triangle entries, found {}",
                    raw.matrix.len()
                )));
            }
            let vals = raw.matrix.iter().map(|&t| number(t)).collect::<Result<Vec<_>, _>>()?;
            let mut it = vals.into_iter();
            let lower: Vec<Vec<f64>> = (0..n).map(|i| it.by_ref().take(i).collect()).collect();
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| match i.cmp(&j) {
                            std::cmp::Ordering::Greater => lower[i][j],
                            std::cmp::Ordering::Less => lower[j][i],
                            std::cmp::Ordering::Equal => 0.0,
                        })
                        .collect()
                })
                .collect();
            let inst =
                MetricInstance::from_matrix("unnamed", rows, demands, fleet).map_err(|e| at.err(e.to_string()))?;
            (inst, at, raw.matrix.iter().map(|t| t.1).collect())
        }
    };
    let inst = inst.with_name(raw.name.clone().unwrap_or_else(|| "unnamed".into()));
    Ok((
        inst,
        Positions {
            matrix: matrix_pos,
            demands: raw.demands.iter().map(|t| t.1).collect(),
            fleet: fleet_pos,
            geometry,
        },
    ))
}

/// Parses and validates an instance file. The first validation failure is
/// reported at the offending entry where it can be pinpointed.
pub fn parse_instance(text: &str) -> Result<MetricInstance, ParseError> {
    let (inst, pos) = parse_with_positions(text)?;
    let report = validate_instance(&inst, EPS);
    let Some(v) = report.first() else {
        return Ok(inst);
    };
    let matrix_entry = |i: usize, j: usize| {
        let (hi, lo) = if i > j { (i, j) } else { (j, i) };
        pos.matrix.get(hi * (hi - 1) / 2 + lo).copied().unwrap_or(pos.geometry)
    };
    let at = match v.kind {
        ViolationKind::Triangle => matrix_entry(v.witness[0], v.witness[2]),
        ViolationKind::NegativeDistance | ViolationKind::NonFinite if v.witness[0] != v.witness[1] => {
            matrix_entry(v.witness[0], v.witness[1])
        }
        ViolationKind::DemandSign | ViolationKind::DepotDemand => pos.demands[v.witness[0]],
        ViolationKind::Radius => pos.fleet,
        _ => pos.geometry,
    };
    Err(at.err(format!("invalid instance: {v}")))
}

/// Renders an instance in the text format. Instances built from points are
/// written as COORDS, all others as MATRIX. Numbers use the shortest
/// representation that parses back to the same value.
pub fn write_instance(inst: &MetricInstance) -> String {
    let mut s = String::new();
    let n = inst.n();
    writeln!(s, "NAME {}", inst.name()).unwrap();
    writeln!(s, "SIZE {n}").unwrap();
    s.push_str("FLEET\n");
    for (i, c) in inst.fleet().classes().iter().enumerate() {
        writeln!(s, "{i} {} {} {}", c.capacity, c.distance_bound, c.multiplicity).unwrap();
    }
    s.push_str("DEMANDS\n");
    let demands: Vec<String> = inst.demands().iter().map(f64::to_string).collect();
    writeln!(s, "{}", demands.join(" ")).unwrap();
    match inst.coords() {
        Some(points) => {
            s.push_str("COORDS\n");
            for (x, y) in points {
                writeln!(s, "{x} {y}").unwrap();
            }
        }
        None => {
            s.push_str("MATRIX\n");
            for i in 1..n {
                let row: Vec<String> = (0..i).map(|j| inst.dist(i, j).to_string()).collect();
                writeln!(s, "{}", row.join(" ")).unwrap();
            }
        }
    }
    s.push_str("EOF\n");
    s
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(num) if !(num.is_i64() || num.is_u64()) => num
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round12(x)))
            .map_or(Value::Number(num), Value::Number),
        Value::Array(xs) => Value::Array(xs.into_iter().map(round_value).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourRecord {
    pub class: usize,
    pub sequence: Vec<usize>,
    pub length: f64,
    pub load: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub algorithm: String,
    pub parameters: BTreeMap<String, f64>,
    pub tours: Vec<TourRecord>,
    pub pi: usize,
    pub alpha: f64,
    pub meta: BTreeMap<String, Value>,
}

pub const PATHS_ALGORITHM: &str = "min-nht";

impl SolutionFile {
    pub fn from_solution(sol: &RoutingSolution, inst: &MetricInstance) -> Self {
        let tours = sol
            .tours
            .iter()
            .map(|t| {
                let fresh = Tour::from_seq(inst, t.tour.seq.clone());
                TourRecord {
                    class: t.class_id,
                    sequence: fresh.seq,
                    length: round12(fresh.length),
                    load: round12(fresh.load),
                }
            })
            .collect();
        SolutionFile {
            algorithm: sol.meta.algorithm.clone(),
            parameters: sol
                .meta
                .parameters
                .iter()
                .map(|(k, &v)| (k.clone(), round12(v)))
                .collect(),
            tours,
            pi: sol.pi,
            alpha: round12(sol.alpha),
            meta: sol
                .meta
                .notes
                .iter()
                .map(|(k, v)| (k.clone(), round_value(v.clone())))
                .collect(),
        }
    }

    /// Balanced-peeling output: each path becomes a record with class 0.
    pub fn from_paths(bp: &BalancedPaths, inst: &MetricInstance) -> Self {
        let tours = bp
            .paths
            .iter()
            .map(|p| TourRecord {
                class: 0,
                sequence: p.seq.clone(),
                length: round12(inst.walk_length(&p.seq)),
                load: round12(p.seq.iter().filter(|&&v| v != 0).map(|&v| inst.demand(v)).sum()),
            })
            .collect();
        let mut meta = BTreeMap::new();
        meta.insert("kind".into(), Value::from("paths"));
        meta.insert("length_bound".into(), Value::from(round12(bp.length_bound)));
        meta.insert("strict".into(), Value::from(bp.strict));
        meta.insert("peels".into(), Value::from(bp.peels));
        meta.insert("max_len".into(), Value::from(round12(bp.max_len)));
        meta.insert("min_len".into(), Value::from(round12(bp.min_len)));
        meta.insert("repeats".into(), Value::from(bp.repeats.clone()));
        let mut parameters = BTreeMap::new();
        parameters.insert("lambda".into(), round12(bp.lambda));
        SolutionFile {
            algorithm: PATHS_ALGORITHM.into(),
            parameters,
            tours,
            pi: bp.k,
            alpha: round12(bp.alpha),
            meta,
        }
    }

    pub fn is_paths(&self) -> bool {
        self.algorithm == PATHS_ALGORITHM
    }

    /// Rebuilds the solution against `inst`, recomputing lengths and loads.
    pub fn to_solution(&self, inst: &MetricInstance) -> Result<RoutingSolution, Error> {
        let mut tours = Vec::with_capacity(self.tours.len());
        for rec in &self.tours {
            if let Some(&bad) = rec.sequence.iter().find(|&&v| v >= inst.n()) {
                return Err(Error::VertexOutOfRange(bad));
            }
            tours.push(AssignedTour {
                class_id: rec.class,
                tour: Tour::from_seq(inst, rec.sequence.clone()),
            });
        }
        let meta = SolutionMeta {
            algorithm: self.algorithm.clone(),
            parameters: self.parameters.clone(),
            notes: self.meta.clone(),
        };
        Ok(RoutingSolution::new(tours, meta))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("solution serialises");
        s.push('\n');
        s
    }
}

/// JSON document for a solution: fixed field order, numbers rounded to 12
/// significant digits, lengths and loads recomputed from `inst`.
pub fn write_solution(sol: &RoutingSolution, inst: &MetricInstance) -> String {
    SolutionFile::from_solution(sol, inst).to_json()
}

pub fn read_solution(text: &str) -> Result<SolutionFile, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::solve_min_nt;

    const SQUARE: &str = "NAME square\nSIZE 4\nFLEET\n0 3 6 inf\nDEMANDS\n0 1 1 1\nCOORDS\n0 0\n1 0\n0 1\n1 1\nEOF\n";

    #[test]
    fn minimal_matrix_file() {
        let inst = parse_instance("SIZE 2\nMATRIX 1\nDEMANDS 0 1\nFLEET\n0 1 4 inf\n").unwrap();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.dist(0, 1), 1.0);
        assert_eq!(inst.dist(1, 0), 1.0);
        assert_eq!(inst.fleet().classes()[0].distance_bound, 4.0);
    }

    #[test]
    fn coords_file() {
        let inst = parse_instance(SQUARE).unwrap();
        assert_eq!(inst.name(), "square");
        assert!((inst.dist(0, 3) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(parse_instance(&write_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn triangle_violation_located() {
        let text = "SIZE 3\nFLEET\n0 10 100\nDEMANDS\n0 1 1\nMATRIX\n1\n1 5\n";
        let err = parse_instance(text).unwrap_err();
        assert_eq!((err.line, err.column), (8, 3));
        assert!(err.message.contains("triangle"), "{err}");
        assert!(parse_instance_unchecked(text).is_ok());
    }

    #[test]
    fn structural_errors() {
        let err = parse_instance("SIZE 2\nBOGUS\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 1));
        assert!(err.message.contains("unknown section"));

        let err = parse_instance("SIZE 3\nFLEET\n0 1 4\nDEMANDS 0 1 1\nMATRIX 1 1\n").unwrap_err();
        assert!(err.message.contains("expected 3 lower-triangle entries"), "{err}");

        let err = parse_instance("SIZE 2\nFLEET\n0 1 4\nDEMANDS 0 x\nMATRIX 1\n").unwrap_err();
        assert_eq!((err.line, err.column), (4, 11));

        let err = parse_instance("SIZE 2\nFLEET\n0 1 4\nDEMANDS 0 1\n").unwrap_err();
        assert!(err.message.contains("COORDS or MATRIX"));

        let err = parse_instance("SIZE 2\nFLEET\n1 1 4\nDEMANDS 0 1\nMATRIX 1\n").unwrap_err();
        assert!(err.message.contains("class indices"));
    }

    #[test]
    fn matrix_instances_round_trip() {
        let text = "NAME m\nSIZE 3\nFLEET\n0 2 10 3\n1 1 8 inf\nDEMANDS\n0 1 0.5\nMATRIX\n1\n1.5 0.75\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.fleet().classes()[0].multiplicity, Multiplicity::Limited(3));
        assert_eq!(parse_instance(&write_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn solution_documents() {
        let inst = parse_instance(SQUARE).unwrap();
        let sol = solve_min_nt(&inst).unwrap();
        let first = write_solution(&sol, &inst);
        let file = read_solution(&first).unwrap();
        assert_eq!(file.pi, 1);
        assert_eq!(file.alpha, 1.0);
        let again = write_solution(&file.to_solution(&inst).unwrap(), &inst);
        assert_eq!(first, again);

        let empty = RoutingSolution::new(Vec::new(), SolutionMeta::new("none"));
        let file = read_solution(&write_solution(&empty, &inst)).unwrap();
        assert_eq!(file.pi, 0);
        assert!(file.tours.is_empty());
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(round12(2.0 / 3.0), 0.666666666667);
        assert_eq!(round12(round12(std::f64::consts::PI)), round12(std::f64::consts::PI));
        assert_eq!(round12(0.0), 0.0);
    }
}
