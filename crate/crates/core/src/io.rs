//! Plain-text readers and writers for clouds, flows, masks and partitions.
//!
//! Every writer emits one record per line using the shortest decimal form
//! that parses back to the identical `f64`, so save/load is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::types::{FlowField, PointCloud, SupervoxelPartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    PlyAscii,
    XyzText,
}

impl CloudFormat {
    /// `.ply` selects PLY; everything else is whitespace XYZ text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("ply") => CloudFormat::PlyAscii,
            _ => CloudFormat::XyzText,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| parse_error(line, format!("cannot parse '{token}' as a number")))?;
    if !v.is_finite() {
        return Err(Error::NonFiniteRecord { line });
    }
    Ok(v)
}

/// Parses exactly three finite numbers from a whitespace-separated line.
fn parse_triple(text: &str, line: usize) -> Result<Vector3<f64>> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() != 3 {
        return Err(parse_error(
            line,
            format!("expected 3 values, found {}", tokens.len()),
        ));
    }
    let mut v = Vector3::zeros();
    for (slot, tok) in v.iter_mut().zip(&tokens) {
        *slot = parse_f64(tok, line)?;
    }
    Ok(v)
}

/// Triples from a text body, skipping blank and `#` comment lines.
fn parse_triples(text: &str) -> Result<Vec<Vector3<f64>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| parse_triple(l, i + 1))
        .collect()
}

pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    PointCloud::new(parse_triples(text)?)
}

pub fn parse_ply(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(parse_error(1, "missing 'ply' magic")),
    }

    // Properties of the vertex element and the number of lines preceding it.
    let mut vertex_count: Option<usize> = None;
    let mut skip_before = 0usize;
    let mut in_vertex = false;
    let mut properties: Vec<String> = Vec::new();
    let mut header_done = false;

    for (line, l) in lines.by_ref() {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        match tokens.as_slice() {
            ["format", "ascii", _] => {}
            ["format", other, ..] => {
                return Err(parse_error(line, format!("unsupported format '{other}'")))
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let count: usize = count
                    .parse()
                    .map_err(|_| parse_error(line, "bad element count"))?;
                in_vertex = *name == "vertex";
                if in_vertex {
                    vertex_count = Some(count);
                } else if vertex_count.is_none() {
                    skip_before += count;
                }
            }
            ["property", "list", ..] => {
                if in_vertex {
                    return Err(parse_error(line, "list properties on vertices unsupported"));
                }
            }
            ["property", _ty, name] => {
                if in_vertex {
                    properties.push((*name).to_string());
                }
            }
            ["end_header"] => {
                header_done = true;
                break;
            }
            _ => return Err(parse_error(line, format!("unexpected header line '{l}'"))),
        }
    }
    if !header_done {
        return Err(parse_error(0, "missing end_header"));
    }
    let count = vertex_count.ok_or_else(|| parse_error(0, "no vertex element"))?;
    let column = |axis: &str| {
        properties
            .iter()
            .position(|p| p == axis)
            .ok_or_else(|| parse_error(0, format!("vertex element has no '{axis}' property")))
    };
    let cols = [column("x")?, column("y")?, column("z")?];

    let mut body = lines.filter(|(_, l)| !l.is_empty()).skip(skip_before);
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let (line, l) = body
            .next()
            .ok_or_else(|| parse_error(0, format!("expected {count} vertices")))?;
        let tokens: Vec<&str> = l.split_whitespace().collect();
        if tokens.len() != properties.len() {
            return Err(parse_error(
                line,
                format!(
                    "expected {} values, found {}",
                    properties.len(),
                    tokens.len()
                ),
            ));
        }
        let mut p = Vector3::zeros();
        for (slot, &c) in p.iter_mut().zip(&cols) {
            *slot = parse_f64(tokens[c], line)?;
        }
        points.push(p);
    }
    PointCloud::new(points)
}

pub fn load_point_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud> {
    let text = read(path)?;
    match format {
        CloudFormat::PlyAscii => parse_ply(&text),
        CloudFormat::XyzText => parse_xyz(&text),
    }
}

fn push_triple(out: &mut String, v: &Vector3<f64>) {
    let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
}

pub fn format_point_cloud(cloud: &PointCloud, format: CloudFormat) -> String {
    let mut out = String::new();
    if format == CloudFormat::PlyAscii {
        let _ = write!(
            out,
            "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
            cloud.len()
        );
    }
    for p in cloud.points() {
        push_triple(&mut out, p);
    }
    out
}

pub fn save_point_cloud(cloud: &PointCloud, path: &Path, format: CloudFormat) -> Result<()> {
    write(path, &format_point_cloud(cloud, format))
}

pub fn format_flow(flow: &FlowField) -> String {
    let mut out = String::new();
    for v in flow.vectors() {
        push_triple(&mut out, v);
    }
    out
}

pub fn parse_flow(text: &str) -> Result<FlowField> {
    FlowField::new(parse_triples(text)?)
}

pub fn save_flow(flow: &FlowField, path: &Path) -> Result<()> {
    write(path, &format_flow(flow))
}

pub fn load_flow(path: &Path) -> Result<FlowField> {
    parse_flow(&read(path)?)
}

pub fn format_mask(mask: &[bool]) -> String {
    let mut out = String::with_capacity(mask.len() * 2);
    for &m in mask {
        out.push(if m { '1' } else { '0' });
        out.push('\n');
    }
    out
}

pub fn parse_mask(text: &str) -> Result<Vec<bool>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| match l.trim() {
            "1" => Ok(true),
            "0" => Ok(false),
            other => Err(parse_error(
                i + 1,
                format!("mask value '{other}' is not 0 or 1"),
            )),
        })
        .collect()
}

pub fn save_mask(mask: &[bool], path: &Path) -> Result<()> {
    write(path, &format_mask(mask))
}

pub fn load_mask(path: &Path) -> Result<Vec<bool>> {
    parse_mask(&read(path)?)
}

pub fn format_partition(partition: &SupervoxelPartition) -> String {
    let mut out = String::new();
    for l in partition.labels() {
        let _ = writeln!(out, "{l}");
    }
    out
}

pub fn save_partition(partition: &SupervoxelPartition, path: &Path) -> Result<()> {
    write(path, &format_partition(partition))
}

/// Region labels, one per line. The region count is taken as `max + 1`.
pub fn parse_partition(text: &str) -> Result<SupervoxelPartition> {
    let labels = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<usize>()
                .map_err(|_| parse_error(i + 1, format!("bad region index '{}'", l.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    let count = labels.iter().max().map_or(0, |m| m + 1);
    SupervoxelPartition::new(labels, count)
}

pub fn load_partition(path: &Path) -> Result<SupervoxelPartition> {
    parse_partition(&read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xyz_two_points() {
        let c = parse_xyz("0 0 0\n1 2 3\n").unwrap();
        assert_eq!(
            c.points(),
            &[Vector3::new(0.0, 0.0, 0.0), Vector3::new(1.0, 2.0, 3.0)]
        );
    }

    #[test]
    fn xyz_comments_skipped() {
        let c = parse_xyz("# header\n1 1 1\n\n# more\n2 2 2").unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn xyz_nan_reports_line() {
        let err = parse_xyz("1 nan 0").unwrap_err();
        assert_eq!(err.to_string(), "non-finite coordinate at line 1");
        let err = parse_xyz("0 0 0\n# c\n1 inf 0").unwrap_err();
        assert_eq!(err.to_string(), "non-finite coordinate at line 3");
    }

    #[test]
    fn xyz_malformed_reports_line() {
        let err = parse_xyz("0 0 0\n1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_xyz("0 0 zero").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn xyz_empty_is_error() {
        assert!(matches!(parse_xyz("# nothing\n"), Err(Error::EmptyCloud)));
    }

    #[test]
    fn ply_single_vertex() {
        let text = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n0.5 0.5 0.5\n";
        let c = parse_ply(text).unwrap();
        assert_eq!(c.points(), &[Vector3::new(0.5, 0.5, 0.5)]);
    }

    #[test]
    fn ply_skips_faces_and_extra_properties() {
        let text = "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 2\nproperty float z\nproperty float x\nproperty float y\nproperty uchar red\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n3 1 2 255\n6 4 5 0\n3 0 1 1\n";
        let c = parse_ply(text).unwrap();
        assert_eq!(
            c.points(),
            &[Vector3::new(1.0, 2.0, 3.0), Vector3::new(4.0, 5.0, 6.0)]
        );
    }

    #[test]
    fn ply_rejects_binary_and_short_body() {
        let bin = "ply\nformat binary_little_endian 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
        assert!(parse_ply(bin).is_err());
        let short = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 2 3\n";
        assert!(parse_ply(short).is_err());
        let nan = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 nan 3\n";
        assert!(matches!(
            parse_ply(nan),
            Err(Error::NonFiniteRecord { line: 8 })
        ));
    }

    #[test]
    fn ply_roundtrip() {
        let c = PointCloud::new(vec![
            Vector3::new(0.1, -2.5, 1e-9),
            Vector3::new(3.0, 4.0, 5.0),
        ])
        .unwrap();
        let back = parse_ply(&format_point_cloud(&c, CloudFormat::PlyAscii)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn zero_flow_text() {
        let f = FlowField::new(vec![Vector3::zeros()]).unwrap();
        assert_eq!(format_flow(&f), "0 0 0\n");
    }

    #[test]
    fn mask_text() {
        let text = format_mask(&[true, false, true]);
        assert_eq!(text.lines().collect::<Vec<_>>(), ["1", "0", "1"]);
        assert_eq!(parse_mask("1\n0\n1").unwrap(), vec![true, false, true]);
        assert!(parse_mask("1\n2\n").is_err());
    }

    #[test]
    fn partition_text() {
        let p = SupervoxelPartition::new(vec![0, 1, 0], 2).unwrap();
        assert_eq!(parse_partition(&format_partition(&p)).unwrap(), p);
    }

    #[test]
    fn format_detection() {
        assert_eq!(
            CloudFormat::from_path(Path::new("a.PLY")),
            CloudFormat::PlyAscii
        );
        assert_eq!(
            CloudFormat::from_path(Path::new("a.xyz")),
            CloudFormat::XyzText
        );
        assert_eq!(CloudFormat::from_path(Path::new("a")), CloudFormat::XyzText);
    }
}
