use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Named substreams spawned from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Cure = 1,
    Infect = 2,
    Observe = 3,
    Policy = 4,
}

impl Stream {
    pub fn rng(self, seed: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(self as u64);
        rng
    }
}

/// The independent random streams owned by one run. A strategy drawing
/// from `policy` cannot shift the cure, infection or flag draws.
#[derive(Debug, Clone)]
pub struct RunStreams {
    pub cure: ChaCha8Rng,
    pub infect: ChaCha8Rng,
    pub observe: ChaCha8Rng,
    pub policy: ChaCha8Rng,
}

impl RunStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            cure: Stream::Cure.rng(seed),
            infect: Stream::Infect.rng(seed),
            observe: Stream::Observe.rng(seed),
            policy: Stream::Policy.rng(seed),
        }
    }
}

/// Seed of replication `k` in a batch started from `base`.
pub fn replication_seed(base: u64, k: u64) -> u64 {
    base ^ k
}

/// One Bernoulli draw. `p >= 1` always succeeds and `p <= 0` never does.
#[inline]
pub fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    rng.random::<f64>() < p
}
