//! Plain-text mesh files:
//!
//! ```text
//! $nodes N
//! x y            (N lines)
//! $triangles T
//! i j k          (T lines, 0-based)
//! $boundary E
//! i j            (E lines, oriented boundary edges)
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use cwave_core::fem::Mesh;

use crate::error::{Result, StudyError};

/// Writes `mesh` with shortest round-trip coordinates.
pub fn write_mesh(mesh: &Mesh, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "$nodes {}", mesh.node_count())?;
    for [x, y] in mesh.nodes() {
        writeln!(out, "{x:?} {y:?}")?;
    }
    writeln!(out, "$triangles {}", mesh.triangles().len())?;
    for [i, j, k] in mesh.triangles() {
        writeln!(out, "{i} {j} {k}")?;
    }
    let edges = mesh.boundary_edges();
    writeln!(out, "$boundary {}", edges.len())?;
    for [i, j] in edges {
        writeln!(out, "{i} {j}")?;
    }
    Ok(())
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_mesh(mesh, &mut buf).expect("writing to memory");
    fs::write(path, buf).map_err(|e| StudyError::io(path, e))
}

pub fn load_mesh(path: &Path) -> Result<Mesh> {
    let text = fs::read_to_string(path).map_err(|e| StudyError::io(path, e))?;
    parse_mesh(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line and its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            self.last = i + 1;
            let l = l.trim();
            if !l.is_empty() {
                return Some((i + 1, l));
            }
        }
        None
    }

    fn header(&mut self, section: &str) -> Result<usize> {
        let (line, text) = self
            .next()
            .ok_or_else(|| StudyError::parse(self.last + 1, format!("missing `${section}` section")))?;
        let mut parts = text.split_whitespace();
        if parts.next() != Some(&format!("${section}")[..]) {
            return Err(StudyError::parse(line, format!("expected `${section} <count>`, found `{text}`")));
        }
        let count = parts
            .next()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| StudyError::parse(line, format!("`${section}` needs a count")))?;
        Ok(count)
    }

    fn record<T: std::str::FromStr, const K: usize>(&mut self, section: &str, index: usize, count: usize) -> Result<[T; K]> {
        let (line, text) = self.next().ok_or_else(|| {
            StudyError::parse(
                self.last + 1,
                format!("section `${section}` truncated: {index} of {count} entries present"),
            )
        })?;
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != K {
            return Err(StudyError::parse(
                line,
                format!("section `${section}`: expected {K} fields, found {}", fields.len()),
            ));
        }
        let mut out = Vec::with_capacity(K);
        for f in fields {
            out.push(
                f.parse()
                    .map_err(|_| StudyError::parse(line, format!("section `${section}`: cannot parse `{f}`")))?,
            );
        }
        Ok(out.try_into().ok().expect("length checked"))
    }
}

/// Parses and validates a mesh; clockwise triangles are reoriented.
pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let n = lines.header("nodes")?;
    let nodes = (0..n)
        .map(|i| lines.record::<f64, 2>("nodes", i, n))
        .collect::<Result<Vec<_>>>()?;
    let t = lines.header("triangles")?;
    let triangles = (0..t)
        .map(|i| lines.record::<usize, 3>("triangles", i, t))
        .collect::<Result<Vec<_>>>()?;
    let e = lines.header("boundary")?;
    let edges = (0..e)
        .map(|i| lines.record::<usize, 2>("boundary", i, e))
        .collect::<Result<Vec<_>>>()?;
    if let Some((line, text)) = lines.next() {
        return Err(StudyError::parse(line, format!("unexpected trailing content `{text}`")));
    }
    Ok(Mesh::new(nodes, triangles, &edges)?)
}
