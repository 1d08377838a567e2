//! Catalog of center families: loading, sampling and instantiation.
//!
//! Each `.sys` file in a catalog directory is a [`SystemFile`]: a system
//! template with free coefficients, center conditions, the perturbation to
//! use, and expected-result metadata. Instantiating an entry at a sample
//! satisfying its conditions yields a concrete [`SystemSpec`] whose origin
//! is a center on the local center manifold.

use crate::rational::Rational;
use crate::system::{parse_system, Condition, ParseError, SystemFile, SystemSpec};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("{path}: {err}")]
    Io {
        path: PathBuf,
        err: std::io::Error,
    },
    #[error("{path}: {err}")]
    Parse { path: PathBuf, err: ParseError },
    #[error("no catalog entry named `{0}`")]
    NotFound(String),
    #[error("sampling failed for `{id}` after {attempts} attempts: {last}")]
    Sampling {
        id: String,
        attempts: usize,
        last: String,
    },
}

pub struct Catalog {
    pub entries: Vec<(String, SystemFile)>,
}

impl Catalog {
    /// Load every `*.sys` file of a directory, sorted by file name.
    pub fn load_dir(dir: &Path) -> Result<Catalog, CatalogError> {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|err| CatalogError::Io {
                path: dir.to_path_buf(),
                err,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "sys"))
            .collect();
        paths.sort();
        let mut entries = Vec::new();
        for path in paths {
            let text = std::fs::read_to_string(&path).map_err(|err| CatalogError::Io {
                path: path.clone(),
                err,
            })?;
            let file = parse_system(&text).map_err(|err| CatalogError::Parse {
                path: path.clone(),
                err,
            })?;
            let id = if file.id.is_empty() {
                path.file_stem().unwrap().to_string_lossy().to_string()
            } else {
                file.id.clone()
            };
            entries.push((id, file));
        }
        Ok(Catalog { entries })
    }

    pub fn find(&self, id: &str) -> Result<&SystemFile, CatalogError> {
        self.entries
            .iter()
            .find(|(eid, _)| eid == id)
            .map(|(_, f)| f)
            .ok_or_else(|| CatalogError::NotFound(id.to_string()))
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num = loop {
        let v: i64 = rng.gen_range(-20..=20);
        if v != 0 {
            break v;
        }
    };
    let den: i64 = rng.gen_range(1..=20);
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Draw a seeded sample of the independent free coefficients and complete it
/// through the entry's conditions. Retries (advancing the stream) until the
/// conditions evaluate; the returned map contains exactly the names a caller
/// must fix to reproduce the run.
pub fn sample_assignment(
    file: &SystemFile,
    id: &str,
    seed: u64,
) -> Result<BTreeMap<String, Rational>, CatalogError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let independents = file.independent_names();
    let mut last = String::from("no attempt made");
    const ATTEMPTS: usize = 64;
    for _ in 0..ATTEMPTS {
        let mut sample: BTreeMap<String, Rational> = independents
            .iter()
            .map(|n| (n.clone(), random_rational(&mut rng)))
            .collect();
        if let Some(solve_name) = &file.solve_for {
            match solve_constraint(file, solve_name, &sample) {
                Ok(v) => {
                    sample.insert(solve_name.clone(), v);
                }
                Err(e) => {
                    last = e;
                    continue;
                }
            }
        }
        match file.instantiate(&sample) {
            Ok(_) => return Ok(sample),
            Err(e) => last = e.to_string(),
        }
    }
    Err(CatalogError::Sampling {
        id: id.to_string(),
        attempts: ATTEMPTS,
        last,
    })
}

/// Solve the entry's (single) polynomial constraint for the designated name,
/// which must occur linearly.
fn solve_constraint(
    file: &SystemFile,
    name: &str,
    sample: &BTreeMap<String, Rational>,
) -> Result<Rational, String> {
    let idx = file
        .free_names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| format!("`{name}` is not a free coefficient"))?;
    let constraint = file
        .conditions
        .iter()
        .find_map(|c| match c {
            Condition::Constraint { poly, .. } if poly.degree_in(idx).unwrap_or(0) >= 1 => {
                Some(poly)
            }
            _ => None,
        })
        .ok_or_else(|| format!("no constraint mentions `{name}`"))?;
    if constraint.degree_in(idx) != Some(1) {
        return Err(format!("constraint is not linear in `{name}`"));
    }
    let point: Vec<Rational> = file
        .free_names
        .iter()
        .map(|n| sample.get(n).cloned().unwrap_or_else(Rational::zero))
        .collect();
    // A·name + B = 0 with the sampled values substituted elsewhere
    let coeffs = constraint.as_univariate_in(idx);
    let a = coeffs[1].eval(&point);
    if a.is_zero() {
        return Err(format!("linear coefficient of `{name}` vanished at the sample"));
    }
    let b = coeffs[0].eval(&point);
    Ok(-b / a)
}

/// Instantiate a catalog entry at a seeded sample, returning the sample used.
pub fn instantiate_sampled(
    file: &SystemFile,
    id: &str,
    seed: u64,
) -> Result<(SystemSpec, BTreeMap<String, Rational>), CatalogError> {
    if file.is_numeric() {
        let spec = file.instantiate(&BTreeMap::new()).map_err(|err| {
            CatalogError::Parse {
                path: PathBuf::from(id),
                err,
            }
        })?;
        return Ok((spec, BTreeMap::new()));
    }
    let sample = sample_assignment(file, id, seed)?;
    let spec = file
        .instantiate(&sample)
        .expect("sample was validated during sampling");
    Ok((spec, sample))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../catalog")
    }

    #[test]
    fn load_and_list_catalog() {
        let cat = Catalog::load_dir(&catalog_dir()).unwrap();
        assert!(cat.entries.len() >= 16, "got {}", cat.entries.len());
        // the headline example is present and numeric
        let quad13 = cat.find("quad13").unwrap();
        assert!(quad13.is_numeric());
        assert_eq!(quad13.expected_rank, Some(9));
        assert_eq!(quad13.rank_k, Some(13));
        assert!(cat.find("no-such-entry").is_err());
    }

    #[test]
    fn every_entry_samples_and_instantiates() {
        let cat = Catalog::load_dir(&catalog_dir()).unwrap();
        for (id, file) in &cat.entries {
            for seed in [1u64, 2, 3] {
                let (spec, _sample) = instantiate_sampled(file, id, seed)
                    .unwrap_or_else(|e| panic!("{id} seed {seed}: {e}"));
                spec.validate().unwrap();
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let cat = Catalog::load_dir(&catalog_dir()).unwrap();
        let (id, file) = cat
            .entries
            .iter()
            .find(|(_, f)| !f.is_numeric())
            .expect("catalog has template entries");
        let a = sample_assignment(file, id, 7).unwrap();
        let b = sample_assignment(file, id, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_assignment(file, id, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn constraint_entry_solves_linearly() {
        let cat = Catalog::load_dir(&catalog_dir()).unwrap();
        let file = cat.find("f1r2_c5").unwrap();
        assert_eq!(file.solve_for.as_deref(), Some("r110"));
        let sample = sample_assignment(file, "f1r2_c5", 11).unwrap();
        assert!(sample.contains_key("r110"));
        file.instantiate(&sample).unwrap();
    }
}
