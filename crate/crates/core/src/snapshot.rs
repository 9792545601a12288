//! Snapshot dumps: raw row-major little-endian f64 data plus a JSON sidecar.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{GyroError, Result};
use crate::grid::{GridSpec, ReducedDensity, ReducedGrid, AXIS_NAMES};
use crate::physics::PlasmaParams;

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub format_version: u32,
    pub dtype: String,
    pub byte_order: String,
    /// Axis names, slowest varying first.
    pub axes: Vec<String>,
    pub dims: [usize; 5],
    /// Node coordinates per axis.
    pub coords: Vec<Vec<f64>>,
    pub grid: GridSpec,
    pub time: f64,
    pub params: PlasmaParams,
}

/// Paths of the data file and sidecar for a stem such as `out/snapshot_0003`.
pub fn snapshot_paths(stem: &Path) -> (PathBuf, PathBuf) {
    let s = stem.as_os_str().to_owned();
    let mut bin = s.clone();
    bin.push(".bin");
    let mut meta = s;
    meta.push(".meta.json");
    (PathBuf::from(bin), PathBuf::from(meta))
}

pub fn encode(data: &[f64]) -> Vec<u8> {
    data.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() % 8 != 0 {
        return Err(GyroError::Snapshot(format!("data length {} is not a multiple of 8", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn dump(stem: &Path, g: &ReducedDensity, time: f64, params: &PlasmaParams) -> Result<()> {
    let grid = &g.grid;
    let meta = SnapshotMeta {
        format_version: SNAPSHOT_VERSION,
        dtype: "f64".into(),
        byte_order: "little".into(),
        axes: AXIS_NAMES.iter().map(|s| s.to_string()).collect(),
        dims: grid.dims(),
        coords: (0..5).map(|a| grid.coords(a).to_vec()).collect(),
        grid: *grid.spec(),
        time,
        params: *params,
    };
    let (bin, side) = snapshot_paths(stem);
    std::fs::write(&bin, encode(&g.data))?;
    std::fs::write(&side, serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn load(stem: &Path) -> Result<(ReducedDensity, SnapshotMeta)> {
    let (bin, side) = snapshot_paths(stem);
    let meta: SnapshotMeta = serde_json::from_str(&std::fs::read_to_string(&side)?)?;
    if meta.format_version != SNAPSHOT_VERSION {
        return Err(GyroError::Snapshot(format!("unsupported format_version {}", meta.format_version)));
    }
    if meta.dtype != "f64" || meta.byte_order != "little" {
        return Err(GyroError::Snapshot(format!("unsupported encoding {} {}", meta.dtype, meta.byte_order)));
    }
    let grid = ReducedGrid::new(meta.grid)?;
    if grid.dims() != meta.dims {
        return Err(GyroError::Snapshot(format!("dims {:?} disagree with grid {:?}", meta.dims, grid.dims())));
    }
    let data = decode(&std::fs::read(&bin)?)?;
    if data.len() != grid.len() {
        return Err(GyroError::Snapshot(format!("expected {} values, found {}", grid.len(), data.len())));
    }
    Ok((ReducedDensity { grid, data }, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: [usize; 5]) -> ReducedGrid {
        ReducedGrid::new(GridSpec {
            length_y: 7.3,
            length_x3: 1.1,
            r_max: 4.0,
            v_max: 3.7,
            n,
        })
        .unwrap()
    }

    #[test]
    fn sidecar_describes_layout() {
        let dir = tempdir();
        let g = ReducedDensity::maxwellian(&grid([2, 3, 1, 4, 5]), &PlasmaParams::default(), 1.0);
        let stem = dir.join("snapshot_0000");
        dump(&stem, &g, 0.25, &PlasmaParams::default()).unwrap();
        let (bin, side) = snapshot_paths(&stem);
        assert_eq!(std::fs::metadata(bin).unwrap().len(), 8 * 120);
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(side).unwrap()).unwrap();
        assert_eq!(v["format_version"], 1);
        assert_eq!(v["dims"], serde_json::json!([2, 3, 1, 4, 5]));
        assert_eq!(v["coords"][4].as_array().unwrap().len(), 5);
        assert_eq!(v["params"]["B"], 1.0);
    }

    #[test]
    fn truncated_data_is_rejected() {
        let dir = tempdir();
        let g = ReducedDensity::maxwellian(&grid([2, 2, 1, 3, 3]), &PlasmaParams::default(), 1.0);
        let stem = dir.join("s");
        dump(&stem, &g, 0.0, &PlasmaParams::default()).unwrap();
        let (bin, _) = snapshot_paths(&stem);
        std::fs::write(&bin, vec![0u8; 16]).unwrap();
        assert!(matches!(load(&stem), Err(GyroError::Snapshot(_))));
    }

    fn tempdir() -> PathBuf {
        use std::sync::atomic::{AtomicUsize, Ordering};
        static N: AtomicUsize = AtomicUsize::new(0);
        let d = std::env::temp_dir().join(format!("gyrokin-snap-{}-{}", std::process::id(), N.fetch_add(1, Ordering::Relaxed)));
        std::fs::create_dir_all(&d).unwrap();
        d
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_is_bit_exact(
            bits in proptest::collection::vec(any::<u64>(), 54),
            time in -1e300f64..1e300,
        ) {
            let dir = tempdir();
            let gr = grid([3, 2, 1, 3, 3]);
            // Arbitrary bit patterns, including NaN payloads, subnormals and infinities.
            let data: Vec<f64> = bits.iter().map(|&b| f64::from_bits(b)).collect();
            let g = ReducedDensity { grid: gr, data };
            let stem = dir.join("p");
            dump(&stem, &g, time, &PlasmaParams::default()).unwrap();
            let (back, meta) = load(&stem).unwrap();
            let a: Vec<u64> = g.data.iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = back.data.iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(a, b);
            prop_assert_eq!(back.grid, g.grid);
            prop_assert_eq!(meta.time.to_bits(), time.to_bits());
            std::fs::remove_dir_all(dir).ok();
        }
    }
}
