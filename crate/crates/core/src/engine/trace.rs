use serde::{Deserialize, Serialize};

use super::params::Scheme;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnchipAccesses {
    pub register: u64,
    pub shared: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncCounts {
    pub block: u64,
    pub device: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    pub tag: String,
    pub cells: u64,
}

impl Phase {
    pub fn new(tag: &str, cells: u64) -> Self {
        Self {
            tag: tag.to_string(),
            cells,
        }
    }
}

/// Counters gathered while a tiled run executes.
///
/// `cells_computed` counts every stencil update including redundant halo
/// work, summed over time steps. `cells_valid` counts the updates of cells a
/// tile owns, i.e. output cells times depth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub scheme: Scheme,
    pub t: usize,
    pub gm_loads: u64,
    pub gm_stores: u64,
    pub halo_pushes: u64,
    pub halo_pulls: u64,
    /// Coalesced-transaction estimate for halo traffic (32 cells each).
    pub halo_transactions: u64,
    pub onchip_accesses: OnchipAccesses,
    pub syncs: SyncCounts,
    pub cells_computed: u64,
    pub cells_valid: u64,
    pub blocks: u64,
    pub device_tiles: u64,
    pub wall_phases: Vec<Phase>,
}

impl ExecutionTrace {
    pub(crate) fn new(scheme: Scheme, t: usize) -> Self {
        Self {
            scheme,
            t,
            gm_loads: 0,
            gm_stores: 0,
            halo_pushes: 0,
            halo_pulls: 0,
            halo_transactions: 0,
            onchip_accesses: OnchipAccesses::default(),
            syncs: SyncCounts::default(),
            cells_computed: 0,
            cells_valid: 0,
            blocks: 0,
            device_tiles: 0,
            wall_phases: Vec::new(),
        }
    }

    pub fn valid_proportion(&self) -> f64 {
        self.cells_valid as f64 / self.cells_computed as f64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn phases_csv(&self) -> String {
        let mut out = String::from("phase,cells\n");
        for p in &self.wall_phases {
            out.push_str(&format!("{},{}\n", p.tag, p.cells));
        }
        out
    }
}

/// Concatenates per-unit phase lists whose first entry is the unit's load.
/// With prefetch, each unit's load is issued before the previous unit's
/// remaining phases.
pub(crate) fn assemble_phases(units: Vec<Vec<Phase>>, prefetch: bool) -> Vec<Phase> {
    if !prefetch {
        return units.into_iter().flatten().collect();
    }
    let mut loads = Vec::with_capacity(units.len());
    let mut bodies = Vec::with_capacity(units.len());
    for mut u in units {
        let rest = u.split_off(1);
        loads.push(u.pop());
        bodies.push(rest);
    }
    let mut out: Vec<Phase> = Vec::new();
    let n = bodies.len();
    let mut loads = loads.into_iter();
    if let Some(Some(l)) = loads.next() {
        out.push(l);
    }
    for (i, body) in bodies.into_iter().enumerate() {
        if i + 1 < n {
            if let Some(Some(l)) = loads.next() {
                out.push(l);
            }
        }
        out.extend(body);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefetch_hoists_next_load() {
        let unit = |i: u64| vec![Phase::new("load", i), Phase::new("compute", i)];
        let plain = assemble_phases(vec![unit(0), unit(1)], false);
        let pre = assemble_phases(vec![unit(0), unit(1)], true);
        let tags = |v: &[Phase]| v.iter().map(|p| (p.tag.clone(), p.cells)).collect::<Vec<_>>();
        assert_eq!(
            tags(&plain),
            vec![
                ("load".into(), 0),
                ("compute".into(), 0),
                ("load".into(), 1),
                ("compute".into(), 1)
            ]
        );
        assert_eq!(
            tags(&pre),
            vec![
                ("load".into(), 0),
                ("load".into(), 1),
                ("compute".into(), 0),
                ("compute".into(), 1)
            ]
        );
    }
}
