//! Mesh import and export.
//!
//! * `native_json`: `{"dim": d, "vertices": [[x, …], …], "elements": [[i0, …], …], "version": 1}`
//!   with 0-based indices; export writes every coordinate with 17
//!   significant digits.
//! * `triangle_node_ele`: the `.node` / `.ele` pair read and written by
//!   Triangle and TetGen. Both 0- and 1-based numbering are accepted.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use super::SimplicialMesh;
use crate::error::{Error, Result};

pub const NATIVE_JSON_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    NativeJson,
    TriangleNodeEle,
}

impl FromStr for MeshFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "native_json" | "json" => Ok(MeshFormat::NativeJson),
            "triangle_node_ele" | "triangle" | "tetgen" => Ok(MeshFormat::TriangleNodeEle),
            _ => Err(Error::InvalidParameter(format!(
                "unknown mesh format `{s}`"
            ))),
        }
    }
}

impl MeshFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("node") | Some("ele") => MeshFormat::TriangleNodeEle,
            _ => MeshFormat::NativeJson,
        }
    }
}

#[derive(Deserialize)]
struct NativeMesh {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    elements: Vec<Vec<usize>>,
    version: u32,
}

pub fn import_mesh(path: &Path, format: MeshFormat) -> Result<SimplicialMesh> {
    match format {
        MeshFormat::NativeJson => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            mesh_from_json(&text).map_err(|e| match e {
                Error::Json(j) => Error::parse(path, j.line(), j.to_string()),
                other => other,
            })
        }
        MeshFormat::TriangleNodeEle => import_triangle(path),
    }
}

pub fn mesh_from_json(text: &str) -> Result<SimplicialMesh> {
    let raw: NativeMesh = serde_json::from_str(text)?;
    if raw.version != NATIVE_JSON_VERSION {
        return Err(Error::InvalidParameter(format!(
            "unsupported native_json version {}",
            raw.version
        )));
    }
    let dim = raw.dim;
    if !(1..=3).contains(&dim) {
        return Err(Error::Dimension(dim));
    }
    let mut coords = Vec::with_capacity(raw.vertices.len() * dim);
    for (i, v) in raw.vertices.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::Mismatch(format!(
                "vertex {i} has {} coordinates, expected {dim}",
                v.len()
            )));
        }
        coords.extend_from_slice(v);
    }
    let mut cells = Vec::with_capacity(raw.elements.len() * (dim + 1));
    for (k, e) in raw.elements.iter().enumerate() {
        if e.len() != dim + 1 {
            return Err(Error::Mismatch(format!(
                "element {k} has {} vertices, expected {}",
                e.len(),
                dim + 1
            )));
        }
        cells.extend_from_slice(e);
    }
    SimplicialMesh::new(dim, coords, cells)
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn mesh_to_json(mesh: &SimplicialMesh) -> String {
    let mut s = String::new();
    let _ = write!(s, "{{\"dim\": {}, \"vertices\": [", mesh.dim());
    for v in 0..mesh.num_vertices() {
        if v > 0 {
            s.push_str(", ");
        }
        s.push('[');
        let parts: Vec<String> = mesh.vertex(v).iter().map(|&x| fmt_f64(x)).collect();
        s.push_str(&parts.join(", "));
        s.push(']');
    }
    s.push_str("], \"elements\": [");
    for (k, el) in mesh.elements().enumerate() {
        if k > 0 {
            s.push_str(", ");
        }
        let parts: Vec<String> = el.iter().map(|i| i.to_string()).collect();
        let _ = write!(s, "[{}]", parts.join(", "));
    }
    let _ = writeln!(s, "], \"version\": {NATIVE_JSON_VERSION}}}");
    s
}

pub fn export_native_json(mesh: &SimplicialMesh, path: &Path) -> Result<()> {
    fs::write(path, mesh_to_json(mesh)).map_err(|e| Error::io(path, e))
}

/// Writes `<stem>.node` and `<stem>.ele` next to `path` with 1-based ids and
/// boundary markers.
pub fn export_triangle(mesh: &SimplicialMesh, path: &Path) -> Result<(PathBuf, PathBuf)> {
    let node_path = path.with_extension("node");
    let ele_path = path.with_extension("ele");
    let dim = mesh.dim();
    let mut node = format!("{} {dim} 0 1\n", mesh.num_vertices());
    for v in 0..mesh.num_vertices() {
        let coords: Vec<String> = mesh.vertex(v).iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(
            node,
            "{} {} {}",
            v + 1,
            coords.join(" "),
            u8::from(mesh.is_boundary(v))
        );
    }
    let mut ele = format!("{} {} 0\n", mesh.num_elements(), dim + 1);
    for (k, el) in mesh.elements().enumerate() {
        let ids: Vec<String> = el.iter().map(|i| (i + 1).to_string()).collect();
        let _ = writeln!(ele, "{} {}", k + 1, ids.join(" "));
    }
    fs::write(&node_path, node).map_err(|e| Error::io(&node_path, e))?;
    fs::write(&ele_path, ele).map_err(|e| Error::io(&ele_path, e))?;
    Ok((node_path, ele_path))
}

/// Non-empty, comment-stripped lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn parse_tok<T: FromStr>(path: &Path, line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(path, line, format!("invalid {what} `{tok}`")))
}

fn import_triangle(path: &Path) -> Result<SimplicialMesh> {
    let node_path = path.with_extension("node");
    let ele_path = path.with_extension("ele");
    let node_text = fs::read_to_string(&node_path).map_err(|e| Error::io(&node_path, e))?;
    let ele_text = fs::read_to_string(&ele_path).map_err(|e| Error::io(&ele_path, e))?;

    let mut lines = data_lines(&node_text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| Error::parse(&node_path, 1, "missing .node header"))?;
    if header.len() < 2 {
        return Err(Error::parse(
            &node_path,
            hl,
            "header needs `<count> <dim> ...`",
        ));
    }
    let count: usize = parse_tok(&node_path, hl, header[0], "vertex count")?;
    let dim: usize = parse_tok(&node_path, hl, header[1], "dimension")?;
    if !(1..=3).contains(&dim) {
        return Err(Error::parse(
            &node_path,
            hl,
            format!("unsupported dimension {dim}"),
        ));
    }
    let mut ids: HashMap<i64, usize> = HashMap::with_capacity(count);
    let mut coords = Vec::with_capacity(count * dim);
    for (ln, toks) in lines.by_ref().take(count) {
        if toks.len() < dim + 1 {
            return Err(Error::parse(
                &node_path,
                ln,
                "too few columns in vertex row",
            ));
        }
        let id: i64 = parse_tok(&node_path, ln, toks[0], "vertex id")?;
        for t in &toks[1..=dim] {
            coords.push(parse_tok(&node_path, ln, t, "coordinate")?);
        }
        if ids.insert(id, ids.len()).is_some() {
            return Err(Error::parse(
                &node_path,
                ln,
                format!("duplicate vertex id {id}"),
            ));
        }
    }
    if ids.len() != count {
        return Err(Error::parse(
            &node_path,
            node_text.lines().count(),
            format!("expected {count} vertices, found {}", ids.len()),
        ));
    }

    let mut lines = data_lines(&ele_text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| Error::parse(&ele_path, 1, "missing .ele header"))?;
    let n_el: usize = parse_tok(&ele_path, hl, header[0], "element count")?;
    let per: usize = match header.get(1) {
        Some(t) => parse_tok(&ele_path, hl, t, "nodes per element")?,
        None => dim + 1,
    };
    if per != dim + 1 {
        return Err(Error::parse(
            &ele_path,
            hl,
            format!(
                "{per} nodes per element; only linear simplices ({}) supported",
                dim + 1
            ),
        ));
    }
    let mut cells = Vec::with_capacity(n_el * per);
    let mut seen = 0;
    for (ln, toks) in lines.take(n_el) {
        if toks.len() < per + 1 {
            return Err(Error::parse(
                &ele_path,
                ln,
                "too few columns in element row",
            ));
        }
        for t in &toks[1..=per] {
            let id: i64 = parse_tok(&ele_path, ln, t, "vertex id")?;
            let v = *ids
                .get(&id)
                .ok_or_else(|| Error::parse(&ele_path, ln, format!("unknown vertex id {id}")))?;
            cells.push(v);
        }
        seen += 1;
    }
    if seen != n_el {
        return Err(Error::parse(
            &ele_path,
            ele_text.lines().count(),
            format!("expected {n_el} elements, found {seen}"),
        ));
    }
    SimplicialMesh::new(dim, coords, cells)
}
