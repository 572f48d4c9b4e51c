//! Dataset files and manifests.
//!
//! Billboards are CSV with header `id,lat,lng,panel_size[,cost]`; trajectories
//! are JSON lines, one `{"id": .., "points": [[lat, lng], ..]}` per line. A
//! JSON manifest ties the two together with counts, a checksum and the
//! projection reference.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::geo::Projection;
use crate::error::{Error, Result};
use crate::model::{Billboard, ProbabilityModel, ProblemInstance, Trajectory};

pub const MANIFEST_VERSION: u32 = 1;
pub const BILLBOARD_FILE: &str = "billboards.csv";
pub const TRAJECTORY_FILE: &str = "trajectories.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    /// Relative paths resolve against the manifest's directory.
    pub billboards: PathBuf,
    pub trajectories: PathBuf,
    pub ref_lat: f64,
    pub ref_lng: f64,
    pub billboard_count: usize,
    pub trajectory_count: usize,
    /// SHA-256 over the billboard file followed by the trajectory file.
    pub checksum: String,
    /// Which trajectories the cost model's standalone influence was computed on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_reference: Option<String>,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: DatasetManifest = serde_json::from_str(&text)?;
        if manifest.version != MANIFEST_VERSION {
            return Err(Error::Manifest(format!(
                "unsupported manifest version {}",
                manifest.version
            )));
        }
        manifest.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(manifest)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn billboard_path(&self) -> PathBuf {
        self.base_dir.join(&self.billboards)
    }

    pub fn trajectory_path(&self) -> PathBuf {
        self.base_dir.join(&self.trajectories)
    }

    pub fn projection(&self) -> Projection {
        Projection::new(self.ref_lat, self.ref_lng)
    }
}

/// A loaded dataset: dense ids `0..n` in file order, with the file's ids kept
/// alongside.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub billboards: Vec<Billboard>,
    pub trajectories: Vec<Trajectory>,
    pub billboard_source_ids: Vec<u64>,
    pub trajectory_source_ids: Vec<u64>,
    pub projection: Projection,
    pub has_costs: bool,
}

impl Dataset {
    pub fn instance(
        &self,
        lambda: f64,
        model: ProbabilityModel,
        budget: u64,
    ) -> Result<ProblemInstance> {
        ProblemInstance::new(
            self.billboards.clone(),
            self.trajectories.clone(),
            lambda,
            model,
            budget,
        )
    }

    pub fn source_billboard_id(&self, dense: u32) -> u64 {
        self.billboard_source_ids[dense as usize]
    }

    pub fn dense_billboard_id(&self, source: u64) -> Option<u32> {
        self.billboard_source_ids
            .iter()
            .position(|&s| s == source)
            .map(|p| p as u32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawBillboard {
    pub id: u64,
    pub lat: f64,
    pub lng: f64,
    pub panel_size: f64,
    pub cost: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTrajectory {
    pub id: u64,
    pub points: Vec<[f64; 2]>,
}

pub fn read_billboards(path: &Path) -> Result<Vec<RawBillboard>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let (Some(c_id), Some(c_lat), Some(c_lng), Some(c_size)) = (
        column("id"),
        column("lat"),
        column("lng"),
        column("panel_size"),
    ) else {
        return Err(parse_err(1, "header must contain id,lat,lng,panel_size".into()));
    };
    let c_cost = column("cost");

    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |c: usize, what: &str| {
            record
                .get(c)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| parse_err(line, format!("missing {what}")))
        };
        let num = |c: usize, what: &str| -> Result<f64> {
            let v: f64 = field(c, what)?
                .parse()
                .map_err(|_| parse_err(line, format!("bad {what}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(line, format!("non-finite {what}")))
            }
        };
        let id: u64 = field(c_id, "id")?
            .parse()
            .map_err(|_| parse_err(line, "id must be a non-negative integer".into()))?;
        if !seen.insert(id) {
            return Err(parse_err(line, format!("duplicate billboard id {id}")));
        }
        let panel_size = num(c_size, "panel_size")?;
        if panel_size <= 0.0 {
            return Err(parse_err(line, "panel_size must be positive".into()));
        }
        let cost = match c_cost {
            Some(c) => Some(
                field(c, "cost")?
                    .parse()
                    .map_err(|_| parse_err(line, "cost must be a non-negative integer".into()))?,
            ),
            None => None,
        };
        out.push(RawBillboard {
            id,
            lat: num(c_lat, "lat")?,
            lng: num(c_lng, "lng")?,
            panel_size,
            cost,
        });
    }
    if out.is_empty() {
        return Err(parse_err(1, "no billboards".into()));
    }
    Ok(out)
}

pub fn read_trajectories(path: &Path) -> Result<Vec<RawTrajectory>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let lineno = i as u64 + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message,
        };
        let t: RawTrajectory =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if t.points.is_empty() {
            return Err(parse_err(format!("trajectory {} has no points", t.id)));
        }
        if t.points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(parse_err(format!("trajectory {} has a non-finite point", t.id)));
        }
        if !seen.insert(t.id) {
            return Err(parse_err(format!("duplicate trajectory id {}", t.id)));
        }
        out.push(t);
    }
    Ok(out)
}

fn checksum(billboards: &Path, trajectories: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    for p in [billboards, trajectories] {
        hasher.update(fs::read(p).map_err(|e| Error::io(p, e))?);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Validates two raw files and describes them in a manifest. Without an
/// explicit reference the projection centers on the mean billboard location.
pub fn ingest(
    billboards: &Path,
    trajectories: &Path,
    reference: Option<(f64, f64)>,
) -> Result<DatasetManifest> {
    let raw_b = read_billboards(billboards)?;
    let raw_t = read_trajectories(trajectories)?;
    let (ref_lat, ref_lng) = reference.unwrap_or_else(|| {
        let n = raw_b.len() as f64;
        (
            raw_b.iter().map(|b| b.lat).sum::<f64>() / n,
            raw_b.iter().map(|b| b.lng).sum::<f64>() / n,
        )
    });
    Ok(DatasetManifest {
        version: MANIFEST_VERSION,
        billboards: billboards.to_path_buf(),
        trajectories: trajectories.to_path_buf(),
        ref_lat,
        ref_lng,
        billboard_count: raw_b.len(),
        trajectory_count: raw_t.len(),
        checksum: checksum(billboards, trajectories)?,
        cost_reference: None,
        base_dir: PathBuf::new(),
    })
}

/// Loads and projects a dataset, checking counts and checksum against the
/// manifest.
pub fn load_instance(manifest: &DatasetManifest) -> Result<Dataset> {
    let (bpath, tpath) = (manifest.billboard_path(), manifest.trajectory_path());
    let raw_b = read_billboards(&bpath)?;
    let raw_t = read_trajectories(&tpath)?;
    if raw_b.len() != manifest.billboard_count || raw_t.len() != manifest.trajectory_count {
        return Err(Error::Manifest(format!(
            "counts differ from files: manifest {}/{}, files {}/{}",
            manifest.billboard_count,
            manifest.trajectory_count,
            raw_b.len(),
            raw_t.len()
        )));
    }
    let sum = checksum(&bpath, &tpath)?;
    if sum != manifest.checksum {
        return Err(Error::Manifest("checksum mismatch".into()));
    }
    let projection = manifest.projection();
    let has_costs = raw_b.iter().all(|b| b.cost.is_some());
    let billboards = raw_b
        .iter()
        .enumerate()
        .map(|(i, b)| Billboard {
            id: i as u32,
            location: projection.to_plane(b.lat, b.lng),
            panel_size: b.panel_size,
            cost: b.cost.unwrap_or(0),
        })
        .collect();
    let trajectories = raw_t
        .iter()
        .enumerate()
        .map(|(i, t)| Trajectory {
            id: i as u32,
            points: t
                .points
                .iter()
                .map(|&[lat, lng]| projection.to_plane(lat, lng))
                .collect(),
        })
        .collect();
    Ok(Dataset {
        billboards,
        trajectories,
        billboard_source_ids: raw_b.iter().map(|b| b.id).collect(),
        trajectory_source_ids: raw_t.iter().map(|t| t.id).collect(),
        projection,
        has_costs,
    })
}

pub fn billboards_csv(
    billboards: &[Billboard],
    projection: &Projection,
    with_costs: bool,
    source_ids: Option<&[u64]>,
) -> String {
    let mut out = String::from(if with_costs {
        "id,lat,lng,panel_size,cost\n"
    } else {
        "id,lat,lng,panel_size\n"
    });
    for (i, b) in billboards.iter().enumerate() {
        let id = source_ids.map_or(b.id as u64, |s| s[i]);
        let (lat, lng) = projection.to_geo(b.location);
        let _ = write!(out, "{id},{lat},{lng},{}", b.panel_size);
        if with_costs {
            let _ = write!(out, ",{}", b.cost);
        }
        out.push('\n');
    }
    out
}

pub fn trajectories_jsonl(
    trajectories: &[Trajectory],
    projection: &Projection,
    source_ids: Option<&[u64]>,
) -> Result<String> {
    let mut out = String::new();
    for (i, t) in trajectories.iter().enumerate() {
        let raw = RawTrajectory {
            id: source_ids.map_or(t.id as u64, |s| s[i]),
            points: t
                .points
                .iter()
                .map(|&p| {
                    let (lat, lng) = projection.to_geo(p);
                    [lat, lng]
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&raw)?);
        out.push('\n');
    }
    Ok(out)
}

/// Writes a planar dataset back out as geographic files plus manifest.
pub fn write_dataset(
    out_dir: &Path,
    billboards: &[Billboard],
    trajectories: &[Trajectory],
    projection: &Projection,
    with_costs: bool,
    source_ids: Option<(&[u64], &[u64])>,
    cost_reference: Option<String>,
) -> Result<DatasetManifest> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let bpath = out_dir.join(BILLBOARD_FILE);
    let tpath = out_dir.join(TRAJECTORY_FILE);
    let csv = billboards_csv(billboards, projection, with_costs, source_ids.map(|s| s.0));
    fs::write(&bpath, csv).map_err(|e| Error::io(&bpath, e))?;
    let jsonl = trajectories_jsonl(trajectories, projection, source_ids.map(|s| s.1))?;
    fs::write(&tpath, jsonl).map_err(|e| Error::io(&tpath, e))?;
    let manifest = DatasetManifest {
        version: MANIFEST_VERSION,
        billboards: PathBuf::from(BILLBOARD_FILE),
        trajectories: PathBuf::from(TRAJECTORY_FILE),
        ref_lat: projection.ref_lat,
        ref_lng: projection.ref_lng,
        billboard_count: billboards.len(),
        trajectory_count: trajectories.len(),
        checksum: checksum(&bpath, &tpath)?,
        cost_reference,
        base_dir: out_dir.to_path_buf(),
    };
    manifest.write(&out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Writes a loaded dataset (possibly with updated costs) back out, keeping
/// the source ids.
pub fn save_dataset(
    out_dir: &Path,
    dataset: &Dataset,
    cost_reference: Option<String>,
) -> Result<DatasetManifest> {
    write_dataset(
        out_dir,
        &dataset.billboards,
        &dataset.trajectories,
        &dataset.projection,
        dataset.has_costs,
        Some((&dataset.billboard_source_ids, &dataset.trajectory_source_ids)),
        cost_reference,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn empty_billboard_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let b = write(dir.path(), "b.csv", "id,lat,lng,panel_size\n");
        assert!(matches!(read_billboards(&b), Err(Error::Parse { .. })));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let b = write(
            dir.path(),
            "b.csv",
            "id,lat,lng,panel_size\n1,40.7,-73.9,5\n2,forty,-73.9,5\n",
        );
        match read_billboards(&b) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let b = write(dir.path(), "dup.csv", "id,lat,lng,panel_size\n1,0,0,5\n1,0,0,5\n");
        assert!(matches!(read_billboards(&b), Err(Error::Parse { line: 3, .. })));

        let t = write(
            dir.path(),
            "t.jsonl",
            "{\"id\":1,\"points\":[[40.7,-73.9]]}\n{\"id\":2,\"points\":[]}\n",
        );
        assert!(matches!(read_trajectories(&t), Err(Error::Parse { line: 2, .. })));
        let t = write(dir.path(), "t2.jsonl", "{\"id\":1,\"points\":[[1,2]]}\n{oops\n");
        assert!(matches!(read_trajectories(&t), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn single_trajectory_file() {
        let dir = tempfile::tempdir().unwrap();
        let b = write(dir.path(), "b.csv", "id,lat,lng,panel_size,cost\n7,40.75,-73.99,5,1000\n");
        let t = write(
            dir.path(),
            "t.jsonl",
            "{\"id\":3,\"points\":[[40.75,-73.99],[40.751,-73.99]]}\n",
        );
        let manifest = ingest(&b, &t, None).unwrap();
        let data = load_instance(&manifest).unwrap();
        assert_eq!(data.trajectories.len(), 1);
        assert_eq!(data.trajectories[0].points.len(), 2);
        assert_eq!(data.billboard_source_ids, vec![7]);
        assert_eq!(data.billboards[0].id, 0);
        assert_eq!(data.billboards[0].cost, 1000);
        assert!(data.has_costs);
        // reference defaults to the mean billboard position
        assert!(data.billboards[0].location.x.abs() < 1e-9);
    }

    #[test]
    fn tampered_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let b = write(dir.path(), "b.csv", "id,lat,lng,panel_size\n1,40.75,-73.99,5\n");
        let t = write(dir.path(), "t.jsonl", "{\"id\":1,\"points\":[[40.75,-73.99]]}\n");
        let manifest = ingest(&b, &t, Some((40.75, -73.99))).unwrap();
        write(dir.path(), "b.csv", "id,lat,lng,panel_size\n1,40.75,-73.98,5\n");
        assert!(matches!(load_instance(&manifest), Err(Error::Manifest(_))));
    }
}
