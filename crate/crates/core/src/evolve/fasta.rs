use std::io::{self, Write};

use super::{Alphabet, SequenceSet};
use crate::error::{Error, Result};

const LINE: usize = 70;

pub fn write_fasta<W: Write>(set: &SequenceSet, mut out: W) -> io::Result<()> {
    let alphabet = set.alphabet();
    for (name, seq) in set.names().iter().zip(set.seqs()) {
        writeln!(out, ">{name}")?;
        for chunk in seq.chunks(LINE) {
            let line: Vec<u8> = chunk.iter().map(|&i| alphabet.symbol(i)).collect();
            out.write_all(&line)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Reads FASTA over the default alphabet of size `m`. Record headers are
/// taken up to the first whitespace.
pub fn read_fasta(text: &str, m: usize) -> Result<SequenceSet> {
    let alphabet = Alphabet::for_size(m)?;
    let mut names = vec![];
    let mut seqs: Vec<Vec<u8>> = vec![];
    for (lineno, line) in text.lines().enumerate() {
        let parse = |message: String| Error::Parse { line: lineno + 1, message };
        let line = line.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            let name = header.split_whitespace().next().unwrap_or("");
            if name.is_empty() {
                return Err(parse("empty record name".into()));
            }
            names.push(name.to_string());
            seqs.push(vec![]);
            continue;
        }
        let Some(seq) = seqs.last_mut() else {
            return Err(parse("sequence data before the first header".into()));
        };
        for b in line.bytes().filter(|b| !b.is_ascii_whitespace()) {
            let idx = alphabet
                .index_of(b)
                .ok_or_else(|| parse(format!("symbol {:?} not in alphabet", b as char)))?;
            seq.push(idx);
        }
    }
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
        return Err(Error::DuplicateLeaf(dup.clone()));
    }
    SequenceSet::new(names, alphabet, seqs)
}
