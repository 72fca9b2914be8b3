use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Throughput and capacity figures of one GPU.
///
/// Bandwidths are bytes/s for the whole device; `op_latencies` are cycles
/// and `op_throughputs` operations per cycle per SM, used only by the
/// Little's-law check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareSpec {
    #[serde(default = "unnamed")]
    pub name: String,
    pub gm_bandwidth_bytes_per_s: f64,
    pub sm_bandwidth_bytes_per_s: f64,
    pub compute_flops_per_s: f64,
    pub cell_bytes: f64,
    pub onchip_capacity_bytes: f64,
    pub sm_count: u32,
    pub device_sync_latency_s: f64,
    pub max_threads_per_sm: u32,
    pub op_latencies: BTreeMap<String, f64>,
    pub op_throughputs: BTreeMap<String, f64>,
}

fn unnamed() -> String {
    "custom".to_string()
}

pub const PRESETS: [&str; 1] = ["a100"];

impl HardwareSpec {
    /// NVIDIA A100 (40 GB), double precision. The FP64 (non-tensor-core)
    /// peak and the per-op latencies other than the FMA are vendor figures,
    /// not measured here.
    pub fn a100() -> Self {
        let ops = |v: [(&str, f64); 3]| v.iter().map(|(k, x)| (k.to_string(), *x)).collect();
        Self {
            name: "a100".into(),
            gm_bandwidth_bytes_per_s: 1555e9,
            sm_bandwidth_bytes_per_s: 19.49e12,
            compute_flops_per_s: 9.7e12,
            cell_bytes: 8.0,
            onchip_capacity_bytes: 164.0 * 1024.0,
            sm_count: 108,
            device_sync_latency_s: 1.2e-6,
            max_threads_per_sm: 2048,
            op_latencies: ops([("dfma", 4.0), ("gm_load", 470.0), ("sm_load", 29.0)]),
            // 1555 GB/s over 108 SMs at 1.41 GHz is about 1.28 doubles/cycle/SM.
            op_throughputs: ops([("dfma", 32.0), ("gm_load", 1.28), ("sm_load", 16.0)]),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "a100" => Some(Self::a100()),
            _ => None,
        }
    }

    /// Preset name or a `.toml` / `.json` file.
    pub fn resolve(spec: &str) -> Result<Self, ModelError> {
        if let Some(hw) = Self::preset(spec) {
            return Ok(hw);
        }
        Self::from_file(Path::new(spec))
    }

    pub fn from_file(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Config {
            source_name: path.display().to_string(),
            message: format!("cannot read: {e}"),
        })?;
        let is_json = path.extension().is_some_and(|e| e == "json");
        let mut hw = if is_json {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
        .map_err(|e| match e {
            ModelError::Config { message, .. } => ModelError::Config {
                source_name: path.display().to_string(),
                message,
            },
            other => other,
        })?;
        if hw.name == "custom" {
            if let Some(stem) = path.file_stem() {
                hw.name = stem.to_string_lossy().into_owned();
            }
        }
        Ok(hw)
    }

    pub fn from_toml(text: &str) -> Result<Self, ModelError> {
        let hw: Self = toml::from_str(text).map_err(|e| ModelError::Config {
            source_name: "<toml>".into(),
            message: e.to_string(),
        })?;
        hw.validate()?;
        Ok(hw)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let hw: Self = serde_json::from_str(text).map_err(|e| ModelError::Config {
            source_name: "<json>".into(),
            message: e.to_string(),
        })?;
        hw.validate()?;
        Ok(hw)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("hardware spec serializes")
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let scalars = [
            ("gm_bandwidth_bytes_per_s", self.gm_bandwidth_bytes_per_s),
            ("sm_bandwidth_bytes_per_s", self.sm_bandwidth_bytes_per_s),
            ("compute_flops_per_s", self.compute_flops_per_s),
            ("cell_bytes", self.cell_bytes),
            ("onchip_capacity_bytes", self.onchip_capacity_bytes),
            ("sm_count", self.sm_count as f64),
            ("device_sync_latency_s", self.device_sync_latency_s),
            ("max_threads_per_sm", self.max_threads_per_sm as f64),
        ];
        for (k, v) in scalars {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ModelError::NonPositive(k.to_string()));
            }
        }
        for (map, name) in [
            (&self.op_latencies, "op_latencies"),
            (&self.op_throughputs, "op_throughputs"),
        ] {
            for (op, v) in map {
                if !(*v > 0.0) || !v.is_finite() {
                    return Err(ModelError::NonPositive(format!("{name}.{op}")));
                }
            }
        }
        Ok(())
    }

    /// Copy with all three throughputs multiplied by `k` and the barrier
    /// latency divided by it: the same machine on a faster clock.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            gm_bandwidth_bytes_per_s: self.gm_bandwidth_bytes_per_s * k,
            sm_bandwidth_bytes_per_s: self.sm_bandwidth_bytes_per_s * k,
            compute_flops_per_s: self.compute_flops_per_s * k,
            device_sync_latency_s: self.device_sync_latency_s / k,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_round_trips_through_toml() {
        let hw = HardwareSpec::a100();
        let back = HardwareSpec::from_toml(&hw.to_toml()).unwrap();
        assert_eq!(back, hw);
    }

    #[test]
    fn rejects_non_positive_fields() {
        let mut hw = HardwareSpec::a100();
        hw.cell_bytes = 0.0;
        assert!(matches!(hw.validate(), Err(ModelError::NonPositive(k)) if k == "cell_bytes"));
        let mut hw = HardwareSpec::a100();
        hw.op_latencies.insert("x".into(), -1.0);
        assert!(hw.validate().is_err());
    }

    #[test]
    fn missing_key_is_a_config_error() {
        let err = HardwareSpec::from_toml("gm_bandwidth_bytes_per_s = 1.0").unwrap_err();
        assert!(matches!(err, ModelError::Config { .. }));
        assert!(err.to_string().contains("missing field"));
    }

    #[test]
    fn unknown_preset_reads_a_file_and_fails_cleanly() {
        assert!(matches!(
            HardwareSpec::resolve("/nonexistent/hw.toml"),
            Err(ModelError::Config { .. })
        ));
    }
}
