use std::io::{self, Write};

use super::{Distance, DistanceMatrix};
use crate::error::{Error, Result};
use crate::fmt_real;

/// Square PHYLIP matrix of distances; infinite entries are written `Inf`.
pub fn write_phylip<W: Write>(d: &DistanceMatrix, mut out: W) -> io::Result<()> {
    let n = d.n();
    writeln!(out, "{n}")?;
    for i in 0..n {
        write!(out, "{}", d.names()[i])?;
        for j in 0..n {
            match d.distance(i, j) {
                Distance::Finite(x) => write!(out, " {}", fmt_real(x))?,
                Distance::Infinite => write!(out, " Inf")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads a square PHYLIP matrix. Distances become closenesses `exp(-d)`;
/// `Inf` becomes closeness 0, which maps back to infinite. Rows may wrap
/// over several lines.
pub fn read_phylip(text: &str) -> Result<DistanceMatrix> {
    let mut tokens = text
        .lines()
        .enumerate()
        .flat_map(|(i, line)| line.split_whitespace().map(move |t| (i + 1, t)));
    let parse = |line: usize, message: String| Error::Parse { line, message };

    let (line, first) = tokens.next().ok_or_else(|| parse(1, "empty matrix file".into()))?;
    let n: usize = first.parse().map_err(|_| parse(line, format!("bad taxon count {first:?}")))?;
    let mut names = Vec::with_capacity(n);
    let mut closeness = Vec::with_capacity(n * n);
    for _ in 0..n {
        let (_, name) = tokens.next().ok_or_else(|| parse(line, "missing row".into()))?;
        names.push(name.to_string());
        for _ in 0..n {
            let (line, tok) = tokens.next().ok_or_else(|| parse(line, "short row".into()))?;
            let c = if tok.eq_ignore_ascii_case("inf") {
                0.0
            } else {
                let d: f64 = tok.parse().map_err(|_| parse(line, format!("bad distance {tok:?}")))?;
                if !(d >= 0.0) || !d.is_finite() {
                    return Err(parse(line, format!("distance {tok} is not a nonnegative number")));
                }
                (-d).exp()
            };
            closeness.push(c);
        }
    }
    if let Some((line, tok)) = tokens.next() {
        return Err(parse(line, format!("unexpected trailing token {tok:?}")));
    }
    DistanceMatrix::from_closeness(names, closeness)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_entries_round_trip() {
        let names = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let c = vec![1.0, 0.5, -0.2, 0.5, 1.0, 0.25, -0.2, 0.25, 1.0];
        let d = DistanceMatrix::from_closeness(names, c).unwrap();
        let mut buf = vec![];
        write_phylip(&d, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("3"));
        assert!(text.lines().nth(1).unwrap().ends_with(" Inf"));
        let back = read_phylip(&text).unwrap();
        assert_eq!(back.distance(0, 2), Distance::Infinite);
        assert!((back.closeness(0, 1) - 0.5).abs() < 1e-15);
        let d01 = d.distance(0, 1).finite().unwrap();
        assert_eq!(back.distance(0, 1).finite().unwrap(), d01);
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(read_phylip("2\na 0 1\nb 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(read_phylip("2\na 0 x\nb 1 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(read_phylip("2\na 0 1\nb 2 0\n").is_err());
    }
}
