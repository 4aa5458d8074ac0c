use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{delete_acceptance, displace_acceptance, insert_acceptance, GCMCConfig};
use crate::potentials::Potential;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoveCounter {
    pub attempted: u64,
    pub accepted: u64,
}

impl MoveCounter {
    fn record(&mut self, accepted: bool) {
        self.attempted += 1;
        self.accepted += u64::from(accepted);
    }

    pub fn rate(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.accepted as f64 / self.attempted as f64
        }
    }
}

/// Sampling accumulators for one block of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub samples: u64,
    pub n_sum: u64,
    pub n_sq_sum: u64,
    pub pairs: Vec<u64>,
}

impl Block {
    pub(crate) fn new(bins: usize) -> Self {
        Self {
            samples: 0,
            n_sum: 0,
            n_sq_sum: 0,
            pairs: vec![0; bins],
        }
    }
}

/// State of one Markov chain: configuration, generator position and
/// accumulators.
#[derive(Debug, Clone)]
pub struct Chain {
    pub index: u64,
    pub(crate) rng: ChaCha8Rng,
    pub moves_done: u64,
    pub positions: Vec<[f64; 3]>,
    pub blocks: Vec<Block>,
    /// Visits of each particle number, indexed by `N`.
    pub n_hist: Vec<u64>,
    pub insert: MoveCounter,
    pub delete: MoveCounter,
    pub displace: MoveCounter,
}

impl Chain {
    pub(crate) fn new(cfg: &GCMCConfig, index: u64) -> Self {
        Self {
            index,
            rng: chain_rng(cfg.seed, index),
            moves_done: 0,
            positions: Vec::new(),
            blocks: vec![Block::new(cfg.n_bins()); cfg.n_blocks],
            n_hist: Vec::new(),
            insert: MoveCounter::default(),
            delete: MoveCounter::default(),
            displace: MoveCounter::default(),
        }
    }

    pub fn total_moves(cfg: &GCMCConfig) -> u64 {
        cfg.n_equilibrate + cfg.n_sample
    }

    pub fn is_done(&self, cfg: &GCMCConfig) -> bool {
        self.moves_done >= Self::total_moves(cfg)
    }

    /// Runs moves until `moves_done` reaches `until` (capped at the total
    /// budget).
    pub(crate) fn advance(&mut self, u: &Potential, cfg: &GCMCConfig, until: u64) {
        let until = until.min(Self::total_moves(cfg));
        let volume = cfg.volume();
        let beta = cfg.beta;
        let (p_ins, p_del) = (cfg.move_mix.insert, cfg.move_mix.delete);
        while self.moves_done < until {
            let x: f64 = self.rng.gen();
            if x < p_ins {
                let p = [
                    self.rng.gen::<f64>() * cfg.box_side,
                    self.rng.gen::<f64>() * cfg.box_side,
                    self.rng.gen::<f64>() * cfg.box_side,
                ];
                let du = self.energy_with(u, cfg, &p, None);
                let a = insert_acceptance(cfg.z, volume, self.positions.len(), beta, du);
                let ok = self.rng.gen::<f64>() < a;
                if ok {
                    self.positions.push(p);
                }
                self.insert.record(ok);
            } else if x < p_ins + p_del {
                let n = self.positions.len();
                if n == 0 {
                    self.delete.record(false);
                } else {
                    let i = self.rng.gen_range(0..n);
                    let du = -self.energy_with(u, cfg, &self.positions[i], Some(i));
                    let a = delete_acceptance(cfg.z, volume, n, beta, du);
                    let ok = self.rng.gen::<f64>() < a;
                    if ok {
                        self.positions.swap_remove(i);
                    }
                    self.delete.record(ok);
                }
            } else {
                let n = self.positions.len();
                if n == 0 {
                    self.displace.record(false);
                } else {
                    let i = self.rng.gen_range(0..n);
                    let old = self.positions[i];
                    let mut new = old;
                    for c in &mut new {
                        *c = (*c + cfg.max_displacement * (2.0 * self.rng.gen::<f64>() - 1.0)).rem_euclid(cfg.box_side);
                    }
                    let du = self.energy_with(u, cfg, &new, Some(i)) - self.energy_with(u, cfg, &old, Some(i));
                    let a = displace_acceptance(beta, du);
                    let ok = self.rng.gen::<f64>() < a;
                    if ok {
                        self.positions[i] = new;
                    }
                    self.displace.record(ok);
                }
            }
            self.moves_done += 1;
            if self.moves_done > cfg.n_equilibrate && (self.moves_done - cfg.n_equilibrate).is_multiple_of(cfg.sample_interval) {
                self.sample(cfg);
            }
        }
    }

    /// Interaction of a particle at `p` with every particle except `skip`.
    fn energy_with(&self, u: &Potential, cfg: &GCMCConfig, p: &[f64; 3], skip: Option<usize>) -> f64 {
        let mut e = 0.0;
        for (j, q) in self.positions.iter().enumerate() {
            if Some(j) == skip {
                continue;
            }
            let r = min_image_dist(p, q, cfg.box_side);
            if r < cfg.r_cut {
                e += u.eval(r);
            }
        }
        e
    }

    fn sample(&mut self, cfg: &GCMCConfig) {
        let k = ((self.moves_done - cfg.n_equilibrate - 1) * cfg.n_blocks as u64 / cfg.n_sample) as usize;
        let n = self.positions.len();
        if self.n_hist.len() <= n {
            self.n_hist.resize(n + 1, 0);
        }
        self.n_hist[n] += 1;
        let r_max = cfg.histogram_range();
        let block = &mut self.blocks[k.min(cfg.n_blocks - 1)];
        block.samples += 1;
        block.n_sum += n as u64;
        block.n_sq_sum += (n * n) as u64;
        let bins = block.pairs.len();
        for i in 0..n {
            for j in i + 1..n {
                let r = min_image_dist(&self.positions[i], &self.positions[j], cfg.box_side);
                if r < r_max {
                    let b = ((r / cfg.bin_width) as usize).min(bins - 1);
                    block.pairs[b] += 1;
                }
            }
        }
    }
}

pub(crate) fn chain_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[inline]
pub(crate) fn min_image_dist(a: &[f64; 3], b: &[f64; 3], side: f64) -> f64 {
    let mut s = 0.0;
    for k in 0..3 {
        let mut d = a[k] - b[k];
        d -= side * (d / side).round();
        s += d * d;
    }
    s.sqrt()
}
