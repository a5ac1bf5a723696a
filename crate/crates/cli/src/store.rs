//! On-disk layout of a construction: `level_{j}.txt` for `j = 0..=j_max`
//! plus `manifest.json`.

use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::Path;

use salem_core::level::{read_level, write_level, LevelHeader};
use salem_core::{Construction, LevelSet};

use crate::error::CliError;
use crate::manifest::{RunManifest, MANIFEST_FILE};

pub fn level_file_name(j: usize) -> String {
    format!("level_{j}.txt")
}

/// Writes to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| CliError::input(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Level files of a construction; returns their names.
pub fn save_levels(dir: &Path, construction: &Construction) -> Result<Vec<String>, CliError> {
    fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    for level in &construction.levels {
        let header = LevelHeader::for_params(&construction.params, level.j);
        let mut bytes = Vec::new();
        write_level(&mut bytes, &header, level)?;
        let name = level_file_name(level.j);
        write_atomic(&dir.join(&name), &bytes)?;
        names.push(name);
    }
    Ok(names)
}

pub struct LoadedRun {
    pub manifest: RunManifest,
    pub levels: Vec<LevelSet>,
}

impl LoadedRun {
    /// Wraps the levels without checking invariants.
    pub fn unchecked(&self) -> Construction {
        Construction {
            params: self.manifest.params.clone(),
            progression: self.levels.get(1).map(|l| l.structured.clone()).unwrap_or_default(),
            levels: self.levels.clone(),
            blocks: Vec::new(),
            rotations: Vec::new(),
            audit: Vec::new(),
        }
    }

    pub fn construction(&self) -> Result<Construction, CliError> {
        Construction::from_levels(self.manifest.params.clone(), self.levels.clone())
            .map_err(|e| CliError::from(e).context("inconsistent construction"))
    }
}

/// Reads the manifest and every level file, checking each header against
/// the recorded parameters.
pub fn load(dir: &Path) -> Result<LoadedRun, CliError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(CliError::input(format!(
            "{} does not hold a construction (no {MANIFEST_FILE}); run `salem construct` first",
            dir.display()
        )));
    }
    let manifest: RunManifest = serde_json::from_reader(BufReader::new(File::open(&manifest_path)?))
        .map_err(|e| CliError::input(format!("{}: {e}", manifest_path.display())))?;
    let params = &manifest.params;
    let mut levels = Vec::with_capacity(params.j_max + 1);
    for j in 0..=params.j_max {
        let path = dir.join(level_file_name(j));
        let file = File::open(&path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let (header, level) = read_level(BufReader::new(file))
            .map_err(|e| CliError::from(e).context(&path.display().to_string()))?;
        let expected = LevelHeader::for_params(params, j);
        if header != expected {
            return Err(CliError::input(format!(
                "{}: header {header:?} does not match the manifest (expected {expected:?})",
                path.display()
            )));
        }
        levels.push(level);
    }
    Ok(LoadedRun {
        manifest,
        levels,
    })
}
