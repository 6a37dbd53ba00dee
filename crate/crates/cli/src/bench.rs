use crate::error::{CliError, Result};
use plflow_core::hdfilter::{brute_force_filter, lattice_filter, SignalSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy)]
pub struct BenchTiming {
    pub n: usize,
    pub d: usize,
    pub lattice: Duration,
    pub brute_force: Duration,
}

/// `n` points uniform in a cube of side `n^(1/d)` (one point per unit volume),
/// carrying three random channels and a homogeneous 1.
pub fn random_signals(n: usize, d: usize, seed: u64) -> Result<SignalSet> {
    if n == 0 {
        return Err(CliError::Param("bench needs n >= 1".into()));
    }
    if d == 0 {
        return Err(CliError::Param("bench needs d >= 1".into()));
    }
    let side = (n as f64).powf(1.0 / d as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = (0..n * d).map(|_| rng.gen_range(0.0..side)).collect();
    let mut values = Vec::with_capacity(n * 4);
    for _ in 0..n {
        values.extend([rng.gen::<f64>(), rng.gen(), rng.gen(), 1.0]);
    }
    Ok(SignalSet::new(d, 4, positions, values)?)
}

/// Runs both filters once on the current rayon pool.
pub fn run(n: usize, d: usize, seed: u64) -> Result<BenchTiming> {
    let signals = random_signals(n, d, seed)?;
    let start = Instant::now();
    let lat = lattice_filter(&signals)?;
    let lattice = start.elapsed();
    let start = Instant::now();
    let exact = brute_force_filter(&signals)?;
    let brute_force = start.elapsed();
    std::hint::black_box((lat, exact));
    Ok(BenchTiming {
        n,
        d,
        lattice,
        brute_force,
    })
}

impl BenchTiming {
    pub fn table(&self, seed: u64, threads: usize) -> String {
        format!(
            "# n={} d={} seed={} threads={}\nmethod       seconds\nlattice      {:.6}\nbrute-force  {:.6}\n",
            self.n,
            self.d,
            seed,
            threads,
            self.lattice.as_secs_f64(),
            self.brute_force.as_secs_f64()
        )
    }
}
