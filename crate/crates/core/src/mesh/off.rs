use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{Surface, TriMesh};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Scalar;

/// Reads an ASCII OFF triangle mesh. Loaded meshes carry no surface tag.
pub fn load_off<T: Scalar>(path: impl AsRef<Path>) -> Result<TriMesh<T>> {
    read_off(std::fs::File::open(path)?)
}

pub fn save_off<T: Scalar>(mesh: &TriMesh<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_off(mesh, &mut f)?;
    f.flush()?;
    Ok(())
}

/// Coordinates are written with 17 significant digits, which round-trips
/// `f64` exactly.
pub fn write_off<T: Scalar, W: Write>(mesh: &TriMesh<T>, mut w: W) -> Result<()> {
    let mut s = String::with_capacity(64 * (mesh.num_vertices() + mesh.num_triangles()));
    s.push_str("OFF\n");
    let _ = writeln!(s, "{} {} 0", mesh.num_vertices(), mesh.num_triangles());
    for v in mesh.vertices() {
        let [x, y, z] = v.to_f64();
        let _ = writeln!(s, "{x:.16e} {y:.16e} {z:.16e}");
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub fn read_off<T: Scalar, R: Read>(r: R) -> Result<TriMesh<T>> {
    let reader = BufReader::new(r);
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter_map(|(i, l)| match l {
            Ok(l) => {
                let content = l.split('#').next().unwrap_or("").trim().to_string();
                (!content.is_empty()).then_some(Ok((i, content)))
            }
            Err(e) => Some(Err(e)),
        });
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some(Ok(x)) => Ok(x),
            Some(Err(e)) => Err(e.into()),
            None => Err(Error::OffFormat {
                line: 0,
                msg: format!("unexpected end of file while reading {what}"),
            }),
        }
    };

    let (line, header) = next("header")?;
    // The counts may share the header line ("OFF 4 4 0").
    let rest = header.strip_prefix("OFF").ok_or_else(|| Error::OffFormat {
        line,
        msg: format!("expected 'OFF' header, found '{header}'"),
    })?;
    let (count_line, counts) = if rest.trim().is_empty() {
        next("counts")?
    } else {
        (line, rest.trim().to_string())
    };
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::OffFormat {
            line: count_line,
            msg: format!("malformed counts line '{counts}'"),
        })?;
    if counts.len() < 2 {
        return Err(Error::OffFormat {
            line: count_line,
            msg: "counts line needs vertex and face counts".into(),
        });
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = next("vertex")?;
        let c: Vec<f64> = l
            .split_whitespace()
            .take(3)
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::OffFormat {
                line,
                msg: format!("malformed vertex '{l}'"),
            })?;
        if c.len() != 3 {
            return Err(Error::OffFormat {
                line,
                msg: "vertex needs three coordinates".into(),
            });
        }
        vertices.push(Vec3::from_f64([c[0], c[1], c[2]]));
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, l) = next("face")?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::OffFormat {
                line,
                msg: format!("malformed face '{l}'"),
            })?;
        match idx.first() {
            Some(3) if idx.len() >= 4 => {}
            Some(&k) => {
                return Err(Error::OffFormat {
                    line,
                    msg: format!("only triangles are supported, found a {k}-gon"),
                })
            }
            None => unreachable!("blank lines are filtered"),
        }
        let tri = [idx[1], idx[2], idx[3]];
        if let Some(&bad) = tri.iter().find(|&&k| k >= nv) {
            return Err(Error::OffFormat {
                line,
                msg: format!("vertex index {bad} out of range (V = {nv})"),
            });
        }
        triangles.push(tri);
    }
    TriMesh::new(vertices, triangles, Surface::Polyhedral)
}
