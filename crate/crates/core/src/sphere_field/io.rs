//! OFF meshes and `vertex_index,value` CSV fields.

use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};

use super::{ScalarField, SphereMesh};

pub fn write_off<W: Write>(mesh: &SphereMesh, mut out: W) -> Result<()> {
    writeln!(out, "OFF")?;
    writeln!(out, "{} {} {}", mesh.num_vertices(), mesh.triangles().len(), mesh.num_edges())?;
    for v in mesh.vertices() {
        writeln!(out, "{:.17e} {:.17e} {:.17e}", v[0], v[1], v[2])?;
    }
    for t in mesh.triangles() {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

fn content_lines<R: BufRead>(input: R) -> impl Iterator<Item = Result<String>> {
    input.lines().filter_map(|l| match l {
        Ok(s) => {
            let s = s.split('#').next().unwrap_or("").trim().to_string();
            (!s.is_empty()).then_some(Ok(s))
        }
        Err(e) => Some(Err(e.into())),
    })
}

fn parse_nums<T: std::str::FromStr>(line: &str) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| Error::Parse(format!("bad number `{t}`"))))
        .collect()
}

pub fn read_off<R: BufRead>(input: R) -> Result<SphereMesh> {
    let mut lines = content_lines(input);
    let mut next = || lines.next().unwrap_or_else(|| Err(Error::Parse("unexpected end of OFF".into())));
    let header = next()?;
    let counts_line = if header == "OFF" {
        next()?
    } else if let Some(rest) = header.strip_prefix("OFF") {
        rest.trim().to_string()
    } else {
        return Err(Error::Parse("missing OFF header".into()));
    };
    let counts: Vec<usize> = parse_nums(&counts_line)?;
    if counts.len() < 2 {
        return Err(Error::Parse("OFF counts line needs vertex and face counts".into()));
    }
    let mut vertices = Vec::with_capacity(counts[0]);
    for _ in 0..counts[0] {
        let v: Vec<f64> = parse_nums(&next()?)?;
        if v.len() < 3 {
            return Err(Error::Parse("vertex needs three coordinates".into()));
        }
        vertices.push([v[0], v[1], v[2]]);
    }
    let mut triangles = Vec::with_capacity(counts[1]);
    for _ in 0..counts[1] {
        let f: Vec<usize> = parse_nums(&next()?)?;
        if f.len() != 4 || f[0] != 3 {
            return Err(Error::Parse("only triangular faces are supported".into()));
        }
        triangles.push([f[1], f[2], f[3]]);
    }
    SphereMesh::from_parts(vertices, triangles)
}

pub fn write_field_csv<W: Write>(field: &ScalarField, mut out: W) -> Result<()> {
    writeln!(out, "vertex_index,value")?;
    for (i, v) in field.values().iter().enumerate() {
        writeln!(out, "{i},{v:.17e}")?;
    }
    Ok(())
}

/// Reads a CSV field. Rows may come in any order but must cover every vertex.
pub fn read_field_csv<R: BufRead>(mesh: &Arc<SphereMesh>, input: R) -> Result<ScalarField> {
    let n = mesh.num_vertices();
    let mut values = vec![f64::NAN; n];
    for line in content_lines(input) {
        let line = line?;
        if line.starts_with("vertex_index") {
            continue;
        }
        let (i, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("bad CSV row `{line}`")))?;
        let i: usize = i.trim().parse().map_err(|_| Error::Parse(format!("bad index `{i}`")))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("bad value `{v}`")))?;
        if i >= n {
            return Err(Error::FieldLength { expected: n, got: i + 1 });
        }
        values[i] = v;
    }
    ScalarField::new(mesh, values)
}
