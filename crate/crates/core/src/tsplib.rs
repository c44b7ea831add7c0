//! TSPLIB reader and writer, plus seeded random Euclidean instances.
//!
//! Supported: `TYPE: TSP` with `EDGE_WEIGHT_TYPE` `EXPLICIT` (formats
//! `FULL_MATRIX`, `UPPER_ROW`, `LOWER_ROW`, `UPPER_DIAG_ROW`,
//! `LOWER_DIAG_ROW`), `EUC_2D` and `GEO`. Vertex 1 of the file becomes the
//! base station (index 0).

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Instance, Weight};
use crate::rng::{stream_rng, Phase, StreamKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeWeightType {
    Explicit,
    Euc2d,
    Geo,
}

impl FromStr for EdgeWeightType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "EXPLICIT" => Ok(Self::Explicit),
            "EUC_2D" => Ok(Self::Euc2d),
            "GEO" => Ok(Self::Geo),
            other => Err(unsupported("EDGE_WEIGHT_TYPE", other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeWeightFormat {
    FullMatrix,
    UpperRow,
    LowerRow,
    UpperDiagRow,
    LowerDiagRow,
}

impl EdgeWeightFormat {
    fn keyword(self) -> &'static str {
        match self {
            Self::FullMatrix => "FULL_MATRIX",
            Self::UpperRow => "UPPER_ROW",
            Self::LowerRow => "LOWER_ROW",
            Self::UpperDiagRow => "UPPER_DIAG_ROW",
            Self::LowerDiagRow => "LOWER_DIAG_ROW",
        }
    }

    fn value_count(self, n: usize) -> usize {
        match self {
            Self::FullMatrix => n * n,
            Self::UpperRow | Self::LowerRow => n * (n - 1) / 2,
            Self::UpperDiagRow | Self::LowerDiagRow => n * (n + 1) / 2,
        }
    }

    /// Matrix cells in the order the format lists them.
    fn cells(self, n: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.value_count(n));
        for i in 0..n {
            let cols = match self {
                Self::FullMatrix => 0..n,
                Self::UpperRow => i + 1..n,
                Self::LowerRow => 0..i,
                Self::UpperDiagRow => i..n,
                Self::LowerDiagRow => 0..i + 1,
            };
            out.extend(cols.map(|j| (i, j)));
        }
        out
    }
}

impl FromStr for EdgeWeightFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "FULL_MATRIX" => Ok(Self::FullMatrix),
            "UPPER_ROW" => Ok(Self::UpperRow),
            "LOWER_ROW" => Ok(Self::LowerRow),
            "UPPER_DIAG_ROW" => Ok(Self::UpperDiagRow),
            "LOWER_DIAG_ROW" => Ok(Self::LowerDiagRow),
            other => Err(unsupported("EDGE_WEIGHT_FORMAT", other)),
        }
    }
}

impl fmt::Display for EdgeWeightFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsplibHeader {
    pub name: String,
    pub problem_type: String,
    pub dimension: usize,
    pub edge_weight_type: EdgeWeightType,
    pub edge_weight_format: Option<EdgeWeightFormat>,
}

fn unsupported(keyword: &str, value: &str) -> Error {
    Error::Unsupported {
        keyword: keyword.to_string(),
        value: value.to_string(),
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn is_data_line(line: &str) -> bool {
    line.trim_start()
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_digit() || matches!(c, '-' | '+' | '.'))
}

/// Numeric tokens of a data section with the line each came from.
struct Section<'a> {
    tokens: Vec<(usize, &'a str)>,
    header_line: usize,
}

impl Section<'_> {
    fn last_line(&self) -> usize {
        self.tokens.last().map_or(self.header_line, |t| t.0)
    }
}

#[derive(Default)]
struct RawFile<'a> {
    name: Option<String>,
    problem_type: Option<String>,
    dimension: Option<(usize, usize)>,
    edge_weight_type: Option<EdgeWeightType>,
    edge_weight_format: Option<EdgeWeightFormat>,
    edge_weights: Option<Section<'a>>,
    node_coords: Option<Section<'a>>,
}

fn scan(text: &str) -> Result<RawFile<'_>> {
    let mut raw = RawFile::default();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
    while let Some((lineno, line)) = lines.next() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (key, value) = match trimmed.split_once(':') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (trimmed, ""),
        };
        match key {
            "NAME" => raw.name = Some(value.to_string()),
            "TYPE" => {
                if value != "TSP" {
                    return Err(unsupported("TYPE", value));
                }
                raw.problem_type = Some(value.to_string());
            }
            "COMMENT" | "DISPLAY_DATA_TYPE" | "NODE_COORD_TYPE" => {}
            "DIMENSION" => {
                let d = value
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad DIMENSION {value:?}")))?;
                raw.dimension = Some((d, lineno));
            }
            "EDGE_WEIGHT_TYPE" => raw.edge_weight_type = Some(value.parse()?),
            "EDGE_WEIGHT_FORMAT" => raw.edge_weight_format = Some(value.parse()?),
            "EOF" => break,
            "EDGE_WEIGHT_SECTION" | "NODE_COORD_SECTION" | "DISPLAY_DATA_SECTION" => {
                let mut tokens = Vec::new();
                while let Some(&(l, next)) = lines.peek() {
                    if next.trim().is_empty() {
                        lines.next();
                        continue;
                    }
                    if !is_data_line(next) {
                        break;
                    }
                    tokens.extend(next.split_whitespace().map(|t| (l, t)));
                    lines.next();
                }
                let section = Section {
                    tokens,
                    header_line: lineno,
                };
                match key {
                    "EDGE_WEIGHT_SECTION" => raw.edge_weights = Some(section),
                    "NODE_COORD_SECTION" => raw.node_coords = Some(section),
                    _ => {}
                }
            }
            other if other.ends_with("_SECTION") => return Err(unsupported("section", other)),
            other => return Err(parse_err(lineno, format!("unknown keyword {other:?}"))),
        }
    }
    Ok(raw)
}

/// Parses a TSPLIB file into its header and a full symmetric instance.
pub fn parse_tsplib_with_header(text: &str) -> Result<(TsplibHeader, Instance)> {
    let raw = scan(text)?;
    let (dimension, dim_line) = raw
        .dimension
        .ok_or_else(|| parse_err(0, "missing DIMENSION"))?;
    if dimension < 2 {
        return Err(parse_err(dim_line, format!("DIMENSION {dimension} below 2")));
    }
    let edge_weight_type = raw
        .edge_weight_type
        .ok_or_else(|| parse_err(0, "missing EDGE_WEIGHT_TYPE"))?;
    let name = raw.name.unwrap_or_default();
    let n = dimension;

    let weights = match edge_weight_type {
        EdgeWeightType::Explicit => {
            let format = raw
                .edge_weight_format
                .ok_or_else(|| parse_err(0, "EXPLICIT weights need EDGE_WEIGHT_FORMAT"))?;
            let section = raw
                .edge_weights
                .ok_or_else(|| parse_err(0, "missing EDGE_WEIGHT_SECTION"))?;
            explicit_matrix(n, format, &section)?
        }
        EdgeWeightType::Euc2d | EdgeWeightType::Geo => {
            if let Some(f) = raw.edge_weight_format {
                return Err(unsupported(
                    "EDGE_WEIGHT_FORMAT",
                    &format!("{f} with a coordinate EDGE_WEIGHT_TYPE"),
                ));
            }
            let section = raw
                .node_coords
                .ok_or_else(|| parse_err(0, "missing NODE_COORD_SECTION"))?;
            let coords = node_coords(n, &section)?;
            let dist: fn((f64, f64), (f64, f64)) -> Weight = match edge_weight_type {
                EdgeWeightType::Euc2d => euc_2d,
                _ => geo,
            };
            let mut w = vec![0; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = dist(coords[i], coords[j]);
                    w[i * n + j] = d;
                    w[j * n + i] = d;
                }
            }
            w
        }
    };

    let header = TsplibHeader {
        name: name.clone(),
        problem_type: raw.problem_type.unwrap_or_else(|| "TSP".into()),
        dimension,
        edge_weight_type,
        edge_weight_format: raw.edge_weight_format,
    };
    Ok((header, Instance::from_flat(name, n, weights)?))
}

pub fn parse_tsplib(text: &str) -> Result<Instance> {
    parse_tsplib_with_header(text).map(|(_, inst)| inst)
}

pub fn read_tsplib(path: impl AsRef<Path>) -> Result<Instance> {
    parse_tsplib(&std::fs::read_to_string(path)?)
}

fn explicit_matrix(n: usize, format: EdgeWeightFormat, section: &Section<'_>) -> Result<Vec<Weight>> {
    let expected = format.value_count(n);
    let found = section.tokens.len();
    if found < expected {
        return Err(parse_err(
            section.last_line(),
            format!("EDGE_WEIGHT_SECTION truncated: {format} of dimension {n} needs {expected} values, found {found}"),
        ));
    }
    if found > expected {
        let (line, _) = section.tokens[expected];
        return Err(parse_err(
            line,
            format!("EDGE_WEIGHT_SECTION has {found} values, {format} of dimension {n} needs {expected}"),
        ));
    }
    let mut w = vec![0; n * n];
    let mut full = vec![None; if format == EdgeWeightFormat::FullMatrix { n * n } else { 0 }];
    for ((i, j), &(line, tok)) in format.cells(n).into_iter().zip(&section.tokens) {
        let v: Weight = tok
            .parse()
            .map_err(|_| parse_err(line, format!("bad edge weight {tok:?}")))?;
        // Diagonal entries never enter a tour; some files store placeholders there.
        if i == j {
            continue;
        }
        if format == EdgeWeightFormat::FullMatrix {
            full[i * n + j] = Some((v, line));
        }
        w[i * n + j] = v;
        w[j * n + i] = v;
    }
    if format == EdgeWeightFormat::FullMatrix {
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, _) = full[i * n + j].expect("filled");
                let (b, line) = full[j * n + i].expect("filled");
                if a != b {
                    return Err(parse_err(
                        line,
                        format!("FULL_MATRIX is asymmetric at ({}, {}): {a} vs {b}", i + 1, j + 1),
                    ));
                }
            }
        }
    }
    Ok(w)
}

fn node_coords(n: usize, section: &Section<'_>) -> Result<Vec<(f64, f64)>> {
    let mut coords = vec![None; n];
    let mut rows = section.tokens.chunks_exact(3);
    for row in rows.by_ref() {
        let line = row[0].0;
        let id: usize = row[0]
            .1
            .parse()
            .map_err(|_| parse_err(line, format!("bad node id {:?}", row[0].1)))?;
        if id == 0 || id > n {
            return Err(parse_err(line, format!("node id {id} outside 1..={n}")));
        }
        let coord = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| parse_err(line, format!("bad coordinate {t:?}")))
        };
        coords[id - 1] = Some((coord(row[1].1)?, coord(row[2].1)?));
    }
    if !rows.remainder().is_empty() {
        return Err(parse_err(
            section.last_line(),
            "NODE_COORD_SECTION truncated: incomplete node record",
        ));
    }
    coords
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            c.ok_or_else(|| {
                parse_err(
                    section.last_line(),
                    format!("NODE_COORD_SECTION truncated: node {} missing", i + 1),
                )
            })
        })
        .collect()
}

/// TSPLIB `nint`: round half up.
fn nint(x: f64) -> Weight {
    (x + 0.5) as Weight
}

pub fn euc_2d(a: (f64, f64), b: (f64, f64)) -> Weight {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    nint((dx * dx + dy * dy).sqrt())
}

/// TSPLIB geographical distance in kilometres; coordinates are DDD.MM.
pub fn geo(a: (f64, f64), b: (f64, f64)) -> Weight {
    const PI: f64 = 3.141592;
    const RRR: f64 = 6378.388;
    let radians = |x: f64| {
        let deg = x.trunc();
        let min = x - deg;
        PI * (deg + 5.0 * min / 3.0) / 180.0
    };
    let (lat_a, lon_a) = (radians(a.0), radians(a.1));
    let (lat_b, lon_b) = (radians(b.0), radians(b.1));
    let q1 = (lon_a - lon_b).cos();
    let q2 = (lat_a - lat_b).cos();
    let q3 = (lat_a + lat_b).cos();
    (RRR * (0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)).acos() + 1.0) as Weight
}

/// Writes `inst` as an `EXPLICIT` TSPLIB file in the given packed format.
pub fn write_explicit(inst: &Instance, format: EdgeWeightFormat) -> String {
    let n = inst.n();
    let mut out = String::new();
    let _ = writeln!(out, "NAME: {}", inst.name());
    let _ = writeln!(out, "TYPE: TSP");
    let _ = writeln!(out, "DIMENSION: {n}");
    let _ = writeln!(out, "EDGE_WEIGHT_TYPE: EXPLICIT");
    let _ = writeln!(out, "EDGE_WEIGHT_FORMAT: {format}");
    let _ = writeln!(out, "EDGE_WEIGHT_SECTION");
    let mut row = None;
    for (i, j) in format.cells(n) {
        if row.is_some_and(|r| r != i) {
            out.push('\n');
        } else if row.is_some() {
            out.push(' ');
        }
        row = Some(i);
        let _ = write!(out, "{}", inst.weight(i, j));
    }
    out.push_str("\nEOF\n");
    out
}

/// Writes integer points as an `EUC_2D` TSPLIB file.
pub fn write_euc_2d(name: &str, comment: &str, points: &[(i64, i64)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME: {name}");
    let _ = writeln!(out, "TYPE: TSP");
    if !comment.is_empty() {
        let _ = writeln!(out, "COMMENT: {comment}");
    }
    let _ = writeln!(out, "DIMENSION: {}", points.len());
    let _ = writeln!(out, "EDGE_WEIGHT_TYPE: EUC_2D");
    let _ = writeln!(out, "NODE_COORD_SECTION");
    for (i, (x, y)) in points.iter().enumerate() {
        let _ = writeln!(out, "{} {x} {y}", i + 1);
    }
    out.push_str("EOF\n");
    out
}

/// Uniform integer points in `[0, coord_bound]²`, reproducible from `seed`.
pub fn random_points(num_vertices: usize, seed: u64, coord_bound: i64) -> Vec<(i64, i64)> {
    let mut rng = stream_rng(seed, StreamKey::new(0, 0, Phase::Instance, num_vertices));
    (0..num_vertices)
        .map(|_| (rng.gen_range(0..=coord_bound), rng.gen_range(0..=coord_bound)))
        .collect()
}

pub fn euc_2d_instance(name: impl Into<String>, points: &[(i64, i64)]) -> Result<Instance> {
    let p: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x as f64, y as f64)).collect();
    Instance::from_fn(name, p.len(), |i, j| euc_2d(p[i], p[j]))
}

pub fn random_instance_name(num_vertices: usize, seed: u64) -> String {
    format!("rand{num_vertices}-s{seed}")
}

/// Random Euclidean instance with rounded (`EUC_2D`) distances.
pub fn generate_random_instance(num_vertices: usize, seed: u64, coord_bound: i64) -> Result<Instance> {
    if num_vertices < 2 {
        return Err(Error::InvalidParam(format!(
            "random instance needs at least 2 vertices, got {num_vertices}"
        )));
    }
    if coord_bound < 1 {
        return Err(Error::InvalidParam(format!(
            "coordinate bound must be positive, got {coord_bound}"
        )));
    }
    let points = random_points(num_vertices, seed, coord_bound);
    euc_2d_instance(random_instance_name(num_vertices, seed), &points)
}
