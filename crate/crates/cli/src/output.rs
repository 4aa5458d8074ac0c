use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ibi_core::spaces::{sidecar_path, RadialFunction, RadialSidecar};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Output directory staged next to its final location and renamed into
/// place when the run succeeds, so a failed run leaves nothing behind.
pub struct OutDir {
    stage: PathBuf,
    target: PathBuf,
    overwrite: bool,
}

impl OutDir {
    pub fn create(target: &Path, overwrite: bool) -> Result<Self> {
        if target.exists() && !overwrite {
            anyhow::bail!("output directory {} exists; pass --overwrite to replace it", target.display());
        }
        let name = target
            .file_name()
            .with_context(|| format!("output path {} has no final component", target.display()))?;
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).with_context(|| format!("creating {}", parent.display()))?;
        let mut stage_name = name.to_owned();
        stage_name.push(format!(".partial-{}", std::process::id()));
        let stage = parent.join(stage_name);
        if stage.exists() {
            fs::remove_dir_all(&stage)?;
        }
        fs::create_dir(&stage).with_context(|| format!("creating {}", stage.display()))?;
        Ok(Self {
            stage,
            target: target.to_path_buf(),
            overwrite,
        })
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.stage.join(file)
    }

    pub fn write_json<T: Serialize>(&self, file: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        fs::write(self.path(file), s)?;
        Ok(())
    }

    pub fn commit(self) -> Result<PathBuf> {
        if self.overwrite && self.target.exists() {
            fs::remove_dir_all(&self.target).with_context(|| format!("removing {}", self.target.display()))?;
        }
        fs::rename(&self.stage, &self.target)
            .with_context(|| format!("moving {} to {}", self.stage.display(), self.target.display()))?;
        Ok(self.target.clone())
    }
}

impl Drop for OutDir {
    fn drop(&mut self) {
        if self.stage.exists() {
            let _ = fs::remove_dir_all(&self.stage);
        }
    }
}

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

pub fn input_file(role: &str, path: &Path) -> Result<InputFile> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(InputFile {
        role: role.into(),
        path: path.display().to_string(),
        sha256: format!("{:x}", Sha256::digest(&bytes)),
    })
}

/// Record of a run. It holds no timestamps, so identical runs write
/// identical manifests.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub threads: usize,
    pub seed: Option<u64>,
    pub inputs: Vec<InputFile>,
    pub config: Value,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(subcommand: &'static str, config: Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            threads: rayon::current_num_threads(),
            seed: None,
            inputs: Vec::new(),
            config,
            outputs: Vec::new(),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.17e}")
}

/// `r,value[,stderr][,missing]` at the nodes of `f`, plus a radial sidecar.
pub fn write_radial(
    path: &Path,
    f: &RadialFunction,
    stderr: Option<&RadialFunction>,
    missing: Option<&[bool]>,
    alpha: f64,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["r", "value"];
    if stderr.is_some() {
        header.push("stderr");
    }
    if missing.is_some() {
        header.push("missing");
    }
    w.write_record(&header)?;
    for (i, (&r, &v)) in f.nodes().iter().zip(f.values()).enumerate() {
        let mut rec = vec![num(r), num(v)];
        if let Some(s) = stderr {
            rec.push(num(s.values()[i]));
        }
        if let Some(m) = missing {
            rec.push(u8::from(m[i]).to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    let side = RadialSidecar {
        alpha,
        tail_exponent: f.tail_exponent(),
        r_max: f.grid().r_max(),
    };
    let mut file = fs::File::create(sidecar_path(path))?;
    file.write_all(serde_json::to_string_pretty(&side)?.as_bytes())?;
    Ok(())
}

/// Optional `missing` column of a CSV written by [`write_radial`].
pub fn read_missing(path: &Path) -> Result<Option<Vec<bool>>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let Some(col) = rdr.headers()?.iter().position(|h| h.trim() == "missing") else {
        return Ok(None);
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        out.push(rec.get(col).map(str::trim) == Some("1"));
    }
    Ok(Some(out))
}
