//! Readers and writers for the on-disk formats.
//!
//! * OFF (vertices + polygonal faces, polygons fan-triangulated)
//! * ASCII PLY (`vertex` element with x/y/z, optional `face` list element)
//! * XYZ (one `x y z` per line, extra columns ignored)
//! * ASCII PLY writer with per-vertex RGB
//! * ground-truth maps and per-vertex label files (one integer per line)

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{GroundTruthMap, Point3, Shape, ShapeKind, DEFAULT_KNN};
use crate::error::{Error, Result};

/// Raw geometry as read from a file, before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawGeometry {
    pub positions: Vec<Point3>,
    pub triangles: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Off,
    Ply,
    Xyz,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "off" => Some(Format::Off),
            "ply" => Some(Format::Ply),
            "xyz" | "pts" | "txt" => Some(Format::Xyz),
            _ => None,
        }
    }
}

/// Loads and validates a shape. Files without faces, or any file loaded with
/// `kind_hint = Some(PointCloud)`, become point clouds.
pub fn load_shape(path: impl AsRef<Path>, kind_hint: Option<ShapeKind>) -> Result<Shape> {
    let path = path.as_ref();
    let raw = read_geometry(path)?;
    let as_cloud = kind_hint == Some(ShapeKind::PointCloud) || raw.triangles.is_empty();
    if as_cloud {
        if kind_hint == Some(ShapeKind::Mesh) {
            return Err(Error::NoTriangles);
        }
        Shape::point_cloud(raw.positions, DEFAULT_KNN)
    } else {
        Shape::mesh(raw.positions, raw.triangles)
    }
}

pub fn read_geometry(path: &Path) -> Result<RawGeometry> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let format = match Format::from_path(path) {
        Some(f) => f,
        None => sniff_format(&mut reader).map_err(|e| Error::io(path, e))?,
    };
    match format {
        Format::Off => read_off(reader, path),
        Format::Ply => read_ply(reader, path),
        Format::Xyz => read_xyz(reader, path),
    }
}

fn sniff_format(reader: &mut BufReader<File>) -> std::io::Result<Format> {
    let head = reader.fill_buf()?;
    let text = String::from_utf8_lossy(&head[..head.len().min(16)]).to_ascii_lowercase();
    Ok(if text.starts_with("ply") {
        Format::Ply
    } else if text.trim_start().starts_with("off") {
        Format::Off
    } else {
        Format::Xyz
    })
}

/// Non-empty, comment-free lines with their 1-based line numbers.
struct Lines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn new(reader: R) -> Self {
        Lines {
            inner: reader.lines(),
            line_no: 0,
        }
    }

    fn next_content(&mut self, path: &Path) -> Result<Option<(usize, String)>> {
        for line in self.inner.by_ref() {
            self.line_no += 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            let content = line.split('#').next().unwrap_or("").trim();
            if !content.is_empty() {
                return Ok(Some((self.line_no, content.to_string())));
            }
        }
        Ok(None)
    }

    fn expect_content(&mut self, path: &Path, what: &str) -> Result<(usize, String)> {
        self.next_content(path)?
            .ok_or_else(|| Error::parse(path, self.line_no, format!("unexpected end of file, expected {what}")))
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, path: &Path, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(path, line, format!("invalid number '{tok}'")))
}

fn parse_point(tokens: &[&str], path: &Path, line: usize) -> Result<Point3> {
    if tokens.len() < 3 {
        return Err(Error::parse(path, line, "expected three coordinates"));
    }
    Ok([
        parse_num(tokens[0], path, line)?,
        parse_num(tokens[1], path, line)?,
        parse_num(tokens[2], path, line)?,
    ])
}

fn push_polygon(out: &mut Vec<[usize; 3]>, poly: &[usize]) {
    for i in 1..poly.len().saturating_sub(1) {
        out.push([poly[0], poly[i], poly[i + 1]]);
    }
}

pub fn read_off<R: BufRead>(reader: R, path: &Path) -> Result<RawGeometry> {
    let mut lines = Lines::new(reader);
    let (line, header) = lines.expect_content(path, "OFF header")?;
    let mut tokens: Vec<&str> = header.split_whitespace().collect();
    let keyword = tokens.remove(0);
    if !keyword.eq_ignore_ascii_case("OFF") {
        return Err(Error::parse(path, line, format!("expected OFF header, found '{keyword}'")));
    }
    let counts_line;
    let (line, counts) = if tokens.is_empty() {
        counts_line = lines.expect_content(path, "element counts")?;
        (counts_line.0, counts_line.1.split_whitespace().collect::<Vec<_>>())
    } else {
        (line, tokens)
    };
    if counts.len() < 2 {
        return Err(Error::parse(path, line, "expected vertex and face counts"));
    }
    let nv: usize = parse_num(counts[0], path, line)?;
    let nf: usize = parse_num(counts[1], path, line)?;

    let mut raw = RawGeometry::default();
    raw.positions.reserve(nv);
    for _ in 0..nv {
        let (line, text) = lines.expect_content(path, "vertex")?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        raw.positions.push(parse_point(&tokens, path, line)?);
    }
    raw.triangles.reserve(nf);
    let mut poly = Vec::new();
    for _ in 0..nf {
        let (line, text) = lines.expect_content(path, "face")?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let count: usize = parse_num(tokens[0], path, line)?;
        if tokens.len() < count + 1 {
            return Err(Error::parse(path, line, "face has fewer indices than declared"));
        }
        poly.clear();
        for tok in &tokens[1..=count] {
            let v: usize = parse_num(tok, path, line)?;
            if v >= nv {
                return Err(Error::parse(path, line, format!("vertex index {v} out of range")));
            }
            poly.push(v);
        }
        push_polygon(&mut raw.triangles, &poly);
    }
    Ok(raw)
}

struct PlyElement {
    name: String,
    count: usize,
    /// (property name, is_list)
    properties: Vec<(String, bool)>,
}

pub fn read_ply<R: BufRead>(reader: R, path: &Path) -> Result<RawGeometry> {
    let mut lines = Lines::new(reader);
    let (line, magic) = lines.expect_content(path, "ply magic")?;
    if magic != "ply" {
        return Err(Error::parse(path, line, "missing 'ply' magic"));
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    loop {
        let (line, text) = lines.expect_content(path, "end_header")?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        match tokens[0] {
            "format" => {
                if tokens.get(1) != Some(&"ascii") {
                    return Err(Error::parse(path, line, "only ASCII PLY is supported"));
                }
            }
            "comment" | "obj_info" => {}
            "element" => {
                if tokens.len() < 3 {
                    return Err(Error::parse(path, line, "malformed element line"));
                }
                elements.push(PlyElement {
                    name: tokens[1].to_string(),
                    count: parse_num(tokens[2], path, line)?,
                    properties: Vec::new(),
                });
            }
            "property" => {
                let elem = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(path, line, "property before element"))?;
                let is_list = tokens.get(1) == Some(&"list");
                let name = tokens.last().copied().unwrap_or_default().to_string();
                elem.properties.push((name, is_list));
            }
            "end_header" => break,
            other => {
                return Err(Error::parse(path, line, format!("unknown header keyword '{other}'")))
            }
        }
    }

    let mut raw = RawGeometry::default();
    for elem in &elements {
        match elem.name.as_str() {
            "vertex" => {
                let col = |name: &str| elem.properties.iter().position(|(p, _)| p == name);
                let (Some(ix), Some(iy), Some(iz)) = (col("x"), col("y"), col("z")) else {
                    return Err(Error::parse(path, lines.line_no, "vertex element lacks x/y/z"));
                };
                if elem.properties.iter().any(|(_, list)| *list) {
                    return Err(Error::parse(path, lines.line_no, "list property on vertex"));
                }
                for _ in 0..elem.count {
                    let (line, text) = lines.expect_content(path, "vertex")?;
                    let tokens: Vec<&str> = text.split_whitespace().collect();
                    if tokens.len() < elem.properties.len() {
                        return Err(Error::parse(path, line, "short vertex line"));
                    }
                    raw.positions.push([
                        parse_num(tokens[ix], path, line)?,
                        parse_num(tokens[iy], path, line)?,
                        parse_num(tokens[iz], path, line)?,
                    ]);
                }
            }
            "face" => {
                let mut poly = Vec::new();
                for _ in 0..elem.count {
                    let (line, text) = lines.expect_content(path, "face")?;
                    let tokens: Vec<&str> = text.split_whitespace().collect();
                    // the index list is taken to be the first property
                    let count: usize = parse_num(tokens[0], path, line)?;
                    if tokens.len() < count + 1 {
                        return Err(Error::parse(path, line, "short face line"));
                    }
                    poly.clear();
                    for tok in &tokens[1..=count] {
                        poly.push(parse_num(tok, path, line)?);
                    }
                    push_polygon(&mut raw.triangles, &poly);
                }
            }
            _ => {
                for _ in 0..elem.count {
                    lines.expect_content(path, &elem.name)?;
                }
            }
        }
    }
    let n = raw.positions.len();
    if let Some(t) = raw.triangles.iter().find(|t| t.iter().any(|&v| v >= n)) {
        return Err(Error::parse(path, 0, format!("face {t:?} references a missing vertex")));
    }
    Ok(raw)
}

pub fn read_xyz<R: BufRead>(reader: R, path: &Path) -> Result<RawGeometry> {
    let mut lines = Lines::new(reader);
    let mut raw = RawGeometry::default();
    while let Some((line, text)) = lines.next_content(path)? {
        let tokens: Vec<&str> = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        raw.positions.push(parse_point(&tokens, path, line)?);
    }
    Ok(raw)
}

pub fn write_xyz(path: &Path, points: &[Point3]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for p in points {
        writeln!(w, "{} {} {}", p[0], p[1], p[2]).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_off(path: &Path, positions: &[Point3], triangles: &[[usize; 3]]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "OFF\n{} {} 0", positions.len(), triangles.len()).map_err(io)?;
    for p in positions {
        writeln!(w, "{} {} {}", p[0], p[1], p[2]).map_err(io)?;
    }
    for t in triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2]).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// ASCII PLY with a `uchar` RGB color per vertex; faces are written when given.
pub fn write_colored_ply(
    path: &Path,
    positions: &[Point3],
    triangles: &[[usize; 3]],
    colors: &[[u8; 3]],
) -> Result<()> {
    assert_eq!(positions.len(), colors.len(), "one color per vertex");
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "ply\nformat ascii 1.0").map_err(io)?;
    writeln!(w, "element vertex {}", positions.len()).map_err(io)?;
    writeln!(w, "property float x\nproperty float y\nproperty float z").map_err(io)?;
    writeln!(w, "property uchar red\nproperty uchar green\nproperty uchar blue").map_err(io)?;
    if !triangles.is_empty() {
        writeln!(w, "element face {}", triangles.len()).map_err(io)?;
        writeln!(w, "property list uchar int vertex_indices").map_err(io)?;
    }
    writeln!(w, "end_header").map_err(io)?;
    for (p, c) in positions.iter().zip(colors) {
        writeln!(w, "{} {} {} {} {} {}", p[0], p[1], p[2], c[0], c[1], c[2]).map_err(io)?;
    }
    for t in triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2]).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads one non-negative integer per line.
pub fn read_index_file(path: &Path) -> Result<Vec<usize>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Lines::new(BufReader::new(file));
    let mut out = Vec::new();
    while let Some((line, text)) = lines.next_content(path)? {
        out.push(parse_num(&text, path, line)?);
    }
    Ok(out)
}

pub fn write_index_file(path: &Path, values: &[usize]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for v in values {
        writeln!(w, "{v}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Ground-truth map: line `i` holds the 0-based target vertex of source vertex `i`.
pub fn read_ground_truth(path: &Path) -> Result<GroundTruthMap> {
    Ok(GroundTruthMap {
        target_index: read_index_file(path)?,
    })
}
