//! On-disk cache of solved eigenbases.
//!
//! File layout: an 8-byte little-endian header length, a JSON header, then
//! the energies, residuals, fields and fluxes as little-endian `f64`.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use billiard_core::geometry::sample_boundary;
use billiard_core::helmholtz::{default_density, solve, validate_rellich, FluxOperator, Grid};
use billiard_core::{EigenBasis, NumericEigenstate, Shape, SolverSettings};
use log::info;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const FORMAT: u32 = 1;

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "BILLIARD_THERMO_CACHE";

#[derive(Serialize, Deserialize)]
struct Header {
    format: u32,
    shape: Shape,
    settings: SolverSettings,
    density: f64,
    unknowns: usize,
    samples: usize,
    states: usize,
}

#[derive(Debug, Clone)]
pub struct Archive {
    pub dir: PathBuf,
}

impl Archive {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// `$BILLIARD_THERMO_CACHE`, else a directory under the system temp dir.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::new(d),
            _ => Self::new(std::env::temp_dir().join("billiard-thermo-cache")),
        }
    }

    pub fn key(shape: &Shape, settings: &SolverSettings) -> String {
        let text =
            serde_json::to_string(&(FORMAT, shape, settings)).expect("plain data serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn path(&self, shape: &Shape, settings: &SolverSettings) -> PathBuf {
        self.dir.join(format!(
            "{}-{}.eig",
            shape.kind(),
            &Self::key(shape, settings)[..16]
        ))
    }

    /// Loads the basis for `(shape, settings)` or solves and stores it.
    pub fn load_or_solve(&self, shape: &Shape, settings: &SolverSettings) -> Result<EigenBasis> {
        let path = self.path(shape, settings);
        if path.exists() {
            match read(&path, shape, settings) {
                Ok(b) => {
                    info!("loaded {} states from {}", b.len(), path.display());
                    return Ok(b);
                }
                Err(e) => log::warn!("ignoring unreadable archive {}: {e:#}", path.display()),
            }
        }
        let basis = solve(shape, settings)?;
        fs::create_dir_all(&self.dir)
            .with_context(|| format!("creating {}", self.dir.display()))?;
        // write then rename so a concurrent reader never sees a partial file
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        write(&tmp, &basis)?;
        fs::rename(&tmp, &path)?;
        info!("stored {} states in {}", basis.len(), path.display());
        Ok(basis)
    }
}

fn density_of(basis: &EigenBasis) -> f64 {
    let k_top = basis
        .states
        .last()
        .map_or(1.0, |s| s.energy.max(1.0).sqrt());
    basis
        .settings
        .boundary_density
        .unwrap_or_else(|| default_density(k_top, basis.settings.h))
}

fn put(w: &mut impl Write, xs: &[f64]) -> Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn write(path: &Path, basis: &EigenBasis) -> Result<()> {
    let header = Header {
        format: FORMAT,
        shape: basis.shape,
        settings: basis.settings,
        density: density_of(basis),
        unknowns: basis.grid.len(),
        samples: basis.samples.len(),
        states: basis.len(),
    };
    let json = serde_json::to_vec(&header)?;
    let mut w = BufWriter::new(
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    put(
        &mut w,
        &basis.states.iter().map(|s| s.energy).collect::<Vec<_>>(),
    )?;
    put(
        &mut w,
        &basis.states.iter().map(|s| s.residual).collect::<Vec<_>>(),
    )?;
    for s in &basis.states {
        put(&mut w, &s.field)?;
    }
    for s in &basis.states {
        put(&mut w, &s.flux)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read(path: &Path, shape: &Shape, settings: &SolverSettings) -> Result<EigenBasis> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 8 {
        bail!("truncated archive");
    }
    let hlen = u64::from_le_bytes(bytes[..8].try_into()?) as usize;
    let header: Header =
        serde_json::from_slice(bytes.get(8..8 + hlen).context("truncated header")?)?;
    if header.format != FORMAT || header.shape != *shape || header.settings != *settings {
        bail!("archive was written for a different problem");
    }
    let mut floats = bytes[8 + hlen..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let n = header.states;
    let want = 2 * n + n * header.unknowns + n * header.samples;
    if (bytes.len() - 8 - hlen) != 8 * want {
        bail!("archive size does not match its header");
    }
    let mut take = |k: usize| -> Vec<f64> { floats.by_ref().take(k).collect() };
    let energies = take(n);
    let residuals = take(n);
    let fields: Vec<Vec<f64>> = (0..n).map(|_| take(header.unknowns)).collect();
    let fluxes: Vec<Vec<f64>> = (0..n).map(|_| take(header.samples)).collect();

    let grid = Grid::new(shape, settings.h)?;
    let samples = sample_boundary(shape, header.density)?;
    if grid.len() != header.unknowns || samples.len() != header.samples {
        bail!("archive geometry does not match this build");
    }
    let flags = FluxOperator::build(&grid, &samples, settings.flux_method).flags();
    let states = energies
        .into_iter()
        .zip(residuals)
        .zip(fields.into_iter().zip(fluxes))
        .enumerate()
        .map(|(index, ((energy, residual), (field, flux)))| {
            let rellich_dev = validate_rellich(energy, &flux, &samples);
            NumericEigenstate {
                index,
                energy,
                field,
                flux,
                residual,
                rellich_dev,
            }
        })
        .collect();
    Ok(EigenBasis {
        shape: *shape,
        settings: *settings,
        grid,
        samples,
        flux_flags: flags,
        states,
    })
}
