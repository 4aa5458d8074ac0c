//! Binary checkpoint of a [`GcmcRun`].
//!
//! All integers and floats are little-endian. Field order:
//!
//! ```text
//! magic            8 bytes  "IBIGCMC\0"
//! version          u32
//! config_len       u32
//! config           config_len bytes of UTF-8 JSON (GCMCConfig)
//! n_chains         u32
//! per chain:
//!   index          u64
//!   seed           u64      master seed (must match config)
//!   stream         u64      generator stream
//!   word_pos       u128     generator position
//!   moves_done     u64
//!   box_side       f64
//!   n              u64      particle count
//!   positions      n x 3 f64
//!   n_blocks       u32
//!   per block:
//!     samples      u64
//!     n_sum        u64
//!     n_sq_sum     u64
//!     bins         u32
//!     pairs        bins x u64
//!   n_hist_len     u32
//!   n_hist         n_hist_len x u64
//!   insert         u64 attempted, u64 accepted
//!   delete         u64 attempted, u64 accepted
//!   displace       u64 attempted, u64 accepted
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::chain::{chain_rng, Block, Chain, MoveCounter};
use super::{GCMCConfig, GcmcRun};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"IBIGCMC\0";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint(path: &Path, run: &GcmcRun) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_to(&mut w, run)?;
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<GcmcRun> {
    read_from(&mut BufReader::new(File::open(path)?))
}

fn write_to(w: &mut impl Write, run: &GcmcRun) -> Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_u32::<LE>(CHECKPOINT_VERSION)?;
    let cfg = serde_json::to_vec(&run.config)?;
    w.write_u32::<LE>(cfg.len() as u32)?;
    w.write_all(&cfg)?;
    w.write_u32::<LE>(run.chains.len() as u32)?;
    for c in &run.chains {
        w.write_u64::<LE>(c.index)?;
        w.write_u64::<LE>(run.config.seed)?;
        w.write_u64::<LE>(c.rng.get_stream())?;
        w.write_u128::<LE>(c.rng.get_word_pos())?;
        w.write_u64::<LE>(c.moves_done)?;
        w.write_f64::<LE>(run.config.box_side)?;
        w.write_u64::<LE>(c.positions.len() as u64)?;
        for p in &c.positions {
            for x in p {
                w.write_f64::<LE>(*x)?;
            }
        }
        w.write_u32::<LE>(c.blocks.len() as u32)?;
        for b in &c.blocks {
            w.write_u64::<LE>(b.samples)?;
            w.write_u64::<LE>(b.n_sum)?;
            w.write_u64::<LE>(b.n_sq_sum)?;
            w.write_u32::<LE>(b.pairs.len() as u32)?;
            for &p in &b.pairs {
                w.write_u64::<LE>(p)?;
            }
        }
        w.write_u32::<LE>(c.n_hist.len() as u32)?;
        for &h in &c.n_hist {
            w.write_u64::<LE>(h)?;
        }
        for m in [c.insert, c.delete, c.displace] {
            w.write_u64::<LE>(m.attempted)?;
            w.write_u64::<LE>(m.accepted)?;
        }
    }
    Ok(())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

fn read_from(r: &mut impl Read) -> Result<GcmcRun> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(bad("not a simulation checkpoint (bad magic)"));
    }
    let version = r.read_u32::<LE>()?;
    if version != CHECKPOINT_VERSION {
        return Err(bad(format!("unsupported checkpoint version {version}, expected {CHECKPOINT_VERSION}")));
    }
    let len = r.read_u32::<LE>()? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    let config: GCMCConfig = serde_json::from_slice(&buf)?;
    config.validate()?;
    let n_chains = r.read_u32::<LE>()? as usize;
    if n_chains != config.n_chains {
        return Err(bad(format!("{n_chains} chains stored, config declares {}", config.n_chains)));
    }
    let mut chains = Vec::with_capacity(n_chains);
    for _ in 0..n_chains {
        let index = r.read_u64::<LE>()?;
        let seed = r.read_u64::<LE>()?;
        if seed != config.seed {
            return Err(bad("chain seed does not match the configuration"));
        }
        let stream = r.read_u64::<LE>()?;
        let word_pos = r.read_u128::<LE>()?;
        let moves_done = r.read_u64::<LE>()?;
        let box_side = r.read_f64::<LE>()?;
        if box_side != config.box_side {
            return Err(bad("box side does not match the configuration"));
        }
        let n = r.read_u64::<LE>()? as usize;
        let mut positions = Vec::with_capacity(n);
        for _ in 0..n {
            positions.push([r.read_f64::<LE>()?, r.read_f64::<LE>()?, r.read_f64::<LE>()?]);
        }
        let n_blocks = r.read_u32::<LE>()? as usize;
        if n_blocks != config.n_blocks {
            return Err(bad("block count does not match the configuration"));
        }
        let mut blocks = Vec::with_capacity(n_blocks);
        for _ in 0..n_blocks {
            let mut b = Block::new(0);
            b.samples = r.read_u64::<LE>()?;
            b.n_sum = r.read_u64::<LE>()?;
            b.n_sq_sum = r.read_u64::<LE>()?;
            let bins = r.read_u32::<LE>()? as usize;
            if bins != config.n_bins() {
                return Err(bad("histogram size does not match the configuration"));
            }
            b.pairs = (0..bins).map(|_| r.read_u64::<LE>()).collect::<std::io::Result<_>>()?;
            blocks.push(b);
        }
        let h = r.read_u32::<LE>()? as usize;
        let n_hist = (0..h).map(|_| r.read_u64::<LE>()).collect::<std::io::Result<_>>()?;
        let mut counters = [MoveCounter::default(); 3];
        for m in &mut counters {
            m.attempted = r.read_u64::<LE>()?;
            m.accepted = r.read_u64::<LE>()?;
        }
        let mut rng = chain_rng(seed, stream);
        rng.set_word_pos(word_pos);
        chains.push(Chain {
            index,
            rng,
            moves_done,
            positions,
            blocks,
            n_hist,
            insert: counters[0],
            delete: counters[1],
            displace: counters[2],
        });
    }
    Ok(GcmcRun { config, chains })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Potential;

    fn cfg() -> GCMCConfig {
        GCMCConfig {
            box_side: 6.0,
            beta: 0.5,
            z: 0.05,
            n_equilibrate: 1_000,
            n_sample: 8_000,
            sample_interval: 10,
            bin_width: 0.1,
            r_cut: 3.0,
            n_chains: 2,
            n_blocks: 4,
            ..GCMCConfig::default()
        }
    }

    #[test]
    fn resumed_run_is_bit_identical() {
        let u = Potential::reference_lj();
        let mut straight = GcmcRun::new(cfg()).unwrap();
        straight.advance(&u, u64::MAX);
        let mut first = GcmcRun::new(cfg()).unwrap();
        first.advance(&u, 4_321);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chk.bin");
        write_checkpoint(&path, &first).unwrap();
        let mut resumed = read_checkpoint(&path).unwrap();
        resumed.advance(&u, u64::MAX);
        let (a, b) = (straight.finish().unwrap(), resumed.finish().unwrap());
        assert_eq!(a.g_hist.values(), b.g_hist.values());
        assert_eq!(a.n_distribution, b.n_distribution);
        assert_eq!(a.rho0_mean, b.rho0_mean);
    }

    #[test]
    fn rejects_foreign_and_future_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.bin");
        std::fs::write(&path, b"NOTACHKP\x01\0\0\0").unwrap();
        assert!(matches!(read_checkpoint(&path), Err(Error::Checkpoint(_))));
        let mut bytes = CHECKPOINT_MAGIC.to_vec();
        bytes.extend_from_slice(&99u32.to_le_bytes());
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(read_checkpoint(&path), Err(Error::Checkpoint(_))));
        let run = GcmcRun::new(cfg()).unwrap();
        write_checkpoint(&path, &run).unwrap();
        let raw = std::fs::read(&path).unwrap();
        assert_eq!(&raw[..8], CHECKPOINT_MAGIC);
        assert_eq!(u32::from_le_bytes(raw[8..12].try_into().unwrap()), CHECKPOINT_VERSION);
    }
}
