//! JSON-lines dataset files, response ingestion and stratified sampling.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use multipath_core::dag::Tier;
use multipath_core::eval::RawResponse;
use multipath_core::instance::BenchmarkInstance;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("tier {tier} has {available} instances, {requested} requested")]
pub struct InsufficientPool {
    pub tier: Tier,
    pub available: usize,
    pub requested: usize,
}

/// One JSON document per line.
pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for it in items {
        out.push_str(&serde_json::to_string(it).expect("serializable record"));
        out.push('\n');
    }
    out
}

pub fn from_jsonl<T: DeserializeOwned>(text: &str, path: &Path) -> Result<Vec<T>, DatasetError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| DatasetError::Parse {
                path: path.into(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), DatasetError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| DatasetError::Io {
            path: dir.into(),
            source,
        })?;
    }
    fs::write(path, to_jsonl(items)).map_err(|source| DatasetError::Io {
        path: path.into(),
        source,
    })
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.into(),
        source,
    })?;
    from_jsonl(&text, path)
}

pub fn read_instances(path: &Path) -> Result<Vec<BenchmarkInstance>, DatasetError> {
    read_jsonl(path)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.into(),
        source,
    }
}

/// Responses from a JSON-lines file, or from `<dir>/<instance_id>/<model>.txt`.
pub fn read_responses(path: &Path) -> Result<Vec<RawResponse>, DatasetError> {
    if path.is_file() {
        return read_jsonl(path);
    }
    let mut out = Vec::new();
    let mut dirs: Vec<PathBuf> = fs::read_dir(path)
        .map_err(io_err(path))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    for dir in dirs {
        let instance_id = dir
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        let mut files: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(io_err(&dir))?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        files.sort();
        for f in files {
            let model_name = f
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            let text = fs::read_to_string(&f).map_err(io_err(&f))?;
            out.push(RawResponse {
                instance_id: instance_id.clone(),
                model_name,
                text,
                completion_tokens: None,
            });
        }
    }
    Ok(out)
}

/// Uniform sample without replacement of `per_tier` instances from each
/// tier, keeping pool order.
pub fn stratified_sample(
    pool: &[BenchmarkInstance],
    per_tier: usize,
    seed: u64,
) -> Result<Vec<BenchmarkInstance>, InsufficientPool> {
    if per_tier == 0 {
        return Ok(Vec::new());
    }
    let mut by_tier: BTreeMap<Tier, Vec<usize>> =
        Tier::ALL.iter().map(|t| (*t, Vec::new())).collect();
    for (i, inst) in pool.iter().enumerate() {
        if let Some(t) = inst.tier {
            by_tier.entry(t).or_default().push(i);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(per_tier * by_tier.len());
    for (tier, idx) in &by_tier {
        if idx.len() < per_tier {
            return Err(InsufficientPool {
                tier: *tier,
                available: idx.len(),
                requested: per_tier,
            });
        }
        chosen.extend(
            sample(&mut rng, idx.len(), per_tier)
                .into_iter()
                .map(|k| idx[k]),
        );
    }
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(|i| pool[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_pool(counts: [usize; 3]) -> Vec<BenchmarkInstance> {
        let base = multipath_core::instance::BenchmarkInstance::generate_offline(
            "x".into(),
            &Default::default(),
            &multipath_core::catalog::builtin_profiles()[0],
            &multipath_core::catalog::EntityCatalog::builtin(),
            "h".into(),
            "t",
        )
        .unwrap();
        let mut out = Vec::new();
        for (t, n) in Tier::ALL.into_iter().zip(counts) {
            for i in 0..n {
                let mut b = base.clone();
                b.tier = Some(t);
                b.instance_id = format!("{t}-{i}");
                out.push(b);
            }
        }
        out
    }

    #[test]
    fn samples_per_tier() {
        let pool = fake_pool([40, 40, 40]);
        let s = stratified_sample(&pool, 30, 1).unwrap();
        for t in Tier::ALL {
            assert_eq!(s.iter().filter(|i| i.tier == Some(t)).count(), 30);
        }
        let mut ids: Vec<&str> = s.iter().map(|i| i.instance_id.as_str()).collect();
        ids.dedup();
        assert_eq!(ids.len(), 90);
        assert_eq!(s, stratified_sample(&pool, 30, 1).unwrap());
        assert!(stratified_sample(&pool, 0, 1).unwrap().is_empty());
    }

    #[test]
    fn names_the_short_tier() {
        let pool = fake_pool([5, 2, 5]);
        assert_eq!(
            stratified_sample(&pool, 3, 0),
            Err(InsufficientPool {
                tier: Tier::Medium,
                available: 2,
                requested: 3
            })
        );
    }

    #[test]
    fn jsonl_round_trip() {
        let pool = fake_pool([1, 1, 0]);
        let text = to_jsonl(&pool);
        assert_eq!(text.lines().count(), 2);
        let back: Vec<BenchmarkInstance> = from_jsonl(&text, Path::new("mem")).unwrap();
        assert_eq!(back, pool);
        let err = from_jsonl::<BenchmarkInstance>("{}\n", Path::new("mem")).unwrap_err();
        assert!(matches!(err, DatasetError::Parse { line: 1, .. }));
    }

    #[test]
    fn reads_response_directories() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("small-0001")).unwrap();
        fs::write(
            dir.path().join("small-0001/model-a.txt"),
            "### Solution 1\n",
        )
        .unwrap();
        fs::write(dir.path().join("small-0001/notes.md"), "ignored").unwrap();
        let rs = read_responses(dir.path()).unwrap();
        assert_eq!(rs.len(), 1);
        assert_eq!(
            (rs[0].instance_id.as_str(), rs[0].model_name.as_str()),
            ("small-0001", "model-a")
        );
    }
}
