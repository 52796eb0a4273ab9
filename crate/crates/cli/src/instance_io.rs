//! On-disk instance format: `manifest.json` with the norm index,
//! threshold and block layout, plus `basis.triplets` holding the kernel
//! basis as sorted `row col value` lines. All rationals are exact
//! `num/den` strings.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::str::FromStr;
use svpforge_core::lattice::{BlockSpec, KernelBasis, ScaledKernelInstance};
use svpforge_core::{Error, Rat, Result};

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    p: u32,
    threshold_pow: String,
    blocks: Vec<BlockFile>,
}

#[derive(Serialize, Deserialize)]
struct BlockFile {
    id: String,
    n: u64,
    m: u64,
    weight_pow: String,
}

pub fn rat_to_string(r: &Rat) -> String {
    svpforge_core::rat_string(r)
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num.trim())
        .map_err(|e| Error::BadParams(format!("bad rational numerator {num:?}: {e}")))?;
    let den = BigInt::from_str(den.trim())
        .map_err(|e| Error::BadParams(format!("bad rational denominator {den:?}: {e}")))?;
    if den == BigInt::from(0) {
        return Err(Error::BadParams("zero denominator".into()));
    }
    Ok(Rat::new(num, den))
}

pub fn write_instance(dir: &Path, inst: &ScaledKernelInstance) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let file = InstanceFile {
        p: inst.p(),
        threshold_pow: rat_to_string(inst.threshold_pow()),
        blocks: inst
            .blocks()
            .iter()
            .map(|b| BlockFile {
                id: b.id.clone(),
                n: b.n,
                m: b.n.next_power_of_two(),
                weight_pow: rat_to_string(&b.weight_pow),
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&file).expect("instance serializes");
    json.push('\n');
    std::fs::write(dir.join("manifest.json"), json)?;
    let mut lines: Vec<String> = Vec::new();
    for (col, column) in inst.basis().columns().iter().enumerate() {
        for (row, v) in column.iter().enumerate() {
            if !num_traits::Zero::is_zero(v) {
                lines.push(format!("{row} {col} {v}"));
            }
        }
    }
    lines.sort_by_key(|l| {
        let mut it = l.split_whitespace();
        let r: u64 = it.next().unwrap().parse().unwrap();
        let c: u64 = it.next().unwrap().parse().unwrap();
        (r, c)
    });
    let mut body = format!(
        "# ambient {} rank {}\n",
        inst.basis().ambient(),
        inst.basis().rank()
    );
    body.push_str(&lines.join("\n"));
    body.push('\n');
    std::fs::write(dir.join("basis.triplets"), body)
}

pub fn read_instance(dir: &Path) -> Result<ScaledKernelInstance> {
    let manifest = std::fs::read_to_string(dir.join("manifest.json"))
        .map_err(|e| Error::BadParams(format!("cannot read instance manifest: {e}")))?;
    let file: InstanceFile = serde_json::from_str(&manifest)
        .map_err(|e| Error::BadParams(format!("bad instance manifest: {e}")))?;
    let blocks: Vec<BlockSpec> = file
        .blocks
        .iter()
        .map(|b| -> Result<BlockSpec> {
            if b.m != b.n.next_power_of_two() {
                return Err(Error::BadParams(format!(
                    "block {} declares m = {} but n = {} rounds to {}",
                    b.id,
                    b.m,
                    b.n,
                    b.n.next_power_of_two()
                )));
            }
            Ok(BlockSpec {
                id: b.id.clone(),
                n: b.n,
                weight_pow: parse_rat(&b.weight_pow)?,
            })
        })
        .collect::<Result<_>>()?;
    let triplets = std::fs::read_to_string(dir.join("basis.triplets"))
        .map_err(|e| Error::BadParams(format!("cannot read basis triplets: {e}")))?;
    let mut ambient: Option<usize> = None;
    let mut rank: Option<usize> = None;
    let mut entries: Vec<(usize, usize, BigInt)> = Vec::new();
    for raw in triplets.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() == 4 && toks[0] == "ambient" && toks[2] == "rank" {
                ambient = toks[1].parse().ok();
                rank = toks[3].parse().ok();
            }
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::BadParams(format!("bad triplet line: {line}")));
        }
        let row: usize = toks[0]
            .parse()
            .map_err(|_| Error::BadParams(format!("bad row: {}", toks[0])))?;
        let col: usize = toks[1]
            .parse()
            .map_err(|_| Error::BadParams(format!("bad col: {}", toks[1])))?;
        let val = BigInt::from_str(toks[2])
            .map_err(|_| Error::BadParams(format!("bad value: {}", toks[2])))?;
        entries.push((row, col, val));
    }
    let ambient = ambient
        .or_else(|| entries.iter().map(|&(r, _, _)| r + 1).max())
        .unwrap_or(0);
    let rank = rank
        .or_else(|| entries.iter().map(|&(_, c, _)| c + 1).max())
        .unwrap_or(0);
    let mut columns = vec![vec![BigInt::from(0); ambient]; rank];
    for (row, col, val) in entries {
        if row >= ambient || col >= rank {
            return Err(Error::BadParams(format!(
                "triplet ({row}, {col}) outside declared ambient {ambient} x rank {rank}"
            )));
        }
        columns[col][row] = val;
    }
    let basis = KernelBasis::from_columns(ambient, columns)?;
    ScaledKernelInstance::new(file.p, parse_rat(&file.threshold_pow)?, blocks, basis)
}

/// Writes a plain ℓp instance for an explicit basis (each coordinate
/// its own unit-weight block).
pub fn plain_instance(p: u32, threshold_pow: Rat, basis: KernelBasis) -> Result<ScaledKernelInstance> {
    let _ = Rat::one();
    ScaledKernelInstance::plain(p, threshold_pow, basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use svpforge_core::lattice::KernelBasis;

    #[test]
    fn roundtrip_plain_instance() {
        let dir = tempfile::tempdir().unwrap();
        let inst =
            ScaledKernelInstance::plain(3, Rat::one(), KernelBasis::identity(4)).unwrap();
        write_instance(dir.path(), &inst).unwrap();
        let back = read_instance(dir.path()).unwrap();
        assert_eq!(back.p(), 3);
        assert_eq!(back.blocks().len(), 4);
        assert_eq!(back.basis().rank(), 4);
        assert_eq!(back.basis().columns(), inst.basis().columns());
    }

    #[test]
    fn rationals_parse_exactly() {
        assert_eq!(rat_to_string(&parse_rat("3/6").unwrap()), "1/2");
        assert_eq!(rat_to_string(&parse_rat("7").unwrap()), "7/1");
        assert!(parse_rat("1/0").is_err());
        assert_eq!(rat_to_string(&parse_rat("-5/10").unwrap()), "-1/2");
    }
}
