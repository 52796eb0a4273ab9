//! Desk-scale caps, overridable through `SVPFORGE_CAPS`
//! (comma-separated `key=value` pairs).

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Max materialized variable count for gen-* in materialize mode.
    pub materialize: u64,
    /// Max planes per enumerated plane family.
    pub planes: u64,
    /// Max global candidate space for decompose.
    pub candidates: u64,
    /// Max lattice rank for the enumeration oracles.
    pub enum_rank: usize,
    /// Node budget for one enumeration run.
    pub nodes: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            materialize: 1 << 16,
            planes: 1 << 22,
            candidates: 1 << 22,
            enum_rank: 20,
            nodes: 1 << 26,
        }
    }
}

impl Caps {
    /// Applies `SVPFORGE_CAPS` on top of the defaults.
    pub fn from_env() -> Result<Self, String> {
        let mut caps = Caps::default();
        let Ok(spec) = std::env::var("SVPFORGE_CAPS") else {
            return Ok(caps);
        };
        for part in spec.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("bad cap entry {part:?}, want key=value"))?;
            let parse = |v: &str| -> Result<u64, String> {
                v.trim()
                    .parse()
                    .map_err(|e| format!("bad cap value {v:?}: {e}"))
            };
            match key.trim() {
                "materialize" => caps.materialize = parse(value)?,
                "planes" => caps.planes = parse(value)?,
                "candidates" => caps.candidates = parse(value)?,
                "enum_rank" => caps.enum_rank = parse(value)? as usize,
                "nodes" => caps.nodes = parse(value)?,
                other => return Err(format!("unknown cap {other:?}")),
            }
        }
        Ok(caps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_parsing() {
        let d = Caps::default();
        assert_eq!(d.enum_rank, 20);
        // from_env reads the process environment; exercise the parser
        // via a scoped variable
        std::env::set_var("SVPFORGE_CAPS", "enum_rank=8, nodes=1024");
        let c = Caps::from_env().unwrap();
        assert_eq!(c.enum_rank, 8);
        assert_eq!(c.nodes, 1024);
        assert_eq!(c.planes, Caps::default().planes);
        std::env::set_var("SVPFORGE_CAPS", "bogus=1");
        assert!(Caps::from_env().is_err());
        std::env::remove_var("SVPFORGE_CAPS");
    }
}
