//! One text line per shuffle:
//! `shuffle=<n> range=<r> heads=<h0,h1,..> fill=<f0,f1,..>`.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DumpRecord {
    pub shuffle: u64,
    pub range: usize,
    pub heads: Vec<usize>,
    pub fill: Vec<usize>,
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub(super) fn format_line(n: u64, range: usize, heads: &[usize], fill: &[usize]) -> String {
    format!("shuffle={n} range={range} heads={} fill={}", join(heads), join(fill))
}

pub fn parse_dump_line(line: &str) -> Result<DumpRecord, String> {
    let mut shuffle = None;
    let mut range = None;
    let mut heads = None;
    let mut fill = None;
    let list = |v: &str| -> Result<Vec<usize>, String> {
        v.split(',')
            .map(|x| x.parse().map_err(|e| format!("bad index '{x}': {e}")))
            .collect()
    };
    for field in line.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| format!("malformed field '{field}'"))?;
        match k {
            "shuffle" => shuffle = Some(v.parse().map_err(|e| format!("bad shuffle: {e}"))?),
            "range" => range = Some(v.parse().map_err(|e| format!("bad range: {e}"))?),
            "heads" => heads = Some(list(v)?),
            "fill" => fill = Some(list(v)?),
            _ => return Err(format!("unknown field '{k}'")),
        }
    }
    Ok(DumpRecord {
        shuffle: shuffle.ok_or("missing shuffle")?,
        range: range.ok_or("missing range")?,
        heads: heads.ok_or("missing heads")?,
        fill: fill.ok_or("missing fill")?,
    })
}

/// Checks a dump: consecutive shuffle numbers, constant range, heads inside
/// the ring and pairwise distinct, and every head either fixed or advancing
/// by exactly one slot per shuffle.
pub fn validate_dump(lines: &[String]) -> Result<Vec<DumpRecord>, String> {
    let records = lines
        .iter()
        .map(|l| parse_dump_line(l))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, r) in records.iter().enumerate() {
        if r.heads.iter().any(|&h| h >= r.range) {
            return Err(format!("shuffle {}: head outside range {}", r.shuffle, r.range));
        }
        for (a, ha) in r.heads.iter().enumerate() {
            if r.heads[..a].contains(ha) {
                return Err(format!("shuffle {}: duplicate head {ha}", r.shuffle));
            }
        }
        let Some(prev) = i.checked_sub(1).map(|j| &records[j]) else {
            continue;
        };
        if r.shuffle != prev.shuffle + 1 || r.range != prev.range || r.heads.len() != prev.heads.len() {
            return Err(format!("shuffle {}: inconsistent with previous line", r.shuffle));
        }
        let fixed = r.heads == prev.heads;
        let advanced = r.heads.iter().zip(&prev.heads).all(|(&h, &p)| h == (p + 1) % r.range);
        if !fixed && !advanced {
            return Err(format!("shuffle {}: heads moved irregularly", r.shuffle));
        }
    }
    Ok(records)
}
