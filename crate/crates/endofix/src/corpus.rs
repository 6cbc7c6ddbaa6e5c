//! Deterministic random fixtures: injective endomorphisms obtained by
//! rejection sampling, reproducible from the seed alone.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::stallings::is_injective;
use crate::words::{Endomorphism, Letter, Word};

#[derive(Clone, Copy, Debug)]
pub struct CorpusParams {
    pub seed: u64,
    pub count: usize,
    pub rank: usize,
    pub max_image_len: usize,
}

fn random_reduced_word(rng: &mut ChaCha8Rng, rank: usize, max_len: usize) -> Word {
    let len = rng.gen_range(1..=max_len);
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    for _ in 0..len {
        loop {
            let g = rng.gen_range(1..=rank as i32);
            let l = if rng.gen_bool(0.5) { g } else { -g };
            if letters.last() != Some(&-l) {
                letters.push(l);
                break;
            }
        }
    }
    Word::from_letters(&letters)
}

/// Next injective endomorphism of exact rank, by rejection. Rank 1 is
/// the family a -> a^m with m != 0, where injectivity is automatic.
pub fn random_injective(rng: &mut ChaCha8Rng, rank: usize, max_image_len: usize) -> Endomorphism {
    if rank == 1 {
        let mut m = 0i32;
        while m == 0 {
            m = rng.gen_range(-(max_image_len as i32)..=max_image_len as i32);
        }
        let letters: Vec<Letter> = std::iter::repeat(m.signum()).take(m.unsigned_abs() as usize).collect();
        return Endomorphism::new(1, vec![Word::from_letters(&letters)]).unwrap();
    }
    loop {
        let images: Vec<Word> =
            (0..rank).map(|_| random_reduced_word(rng, rank, max_image_len)).collect();
        let phi = Endomorphism::new(rank, images).unwrap();
        if is_injective(&phi) {
            return phi;
        }
    }
}

/// `count` injective endomorphisms of exact rank `rank`.
pub fn generate(params: &CorpusParams) -> Vec<Endomorphism> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    (0..params.count)
        .map(|_| random_injective(&mut rng, params.rank, params.max_image_len))
        .collect()
}

/// `count` injective endomorphisms with rank drawn uniformly from
/// `1..=max_rank`, for cross-rank verification runs.
pub fn generate_mixed(seed: u64, count: usize, max_rank: usize, max_image_len: usize) -> Vec<Endomorphism> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let rank = rng.gen_range(1..=max_rank);
            random_injective(&mut rng, rank, max_image_len)
        })
        .collect()
}

/// Fixture file body with a provenance header sufficient to regenerate
/// the whole batch.
pub fn fixture_text(phi: &Endomorphism, params: &CorpusParams, index: usize) -> String {
    format!(
        "# endofix {} corpus fixture {index} of {} (seed {}, rank {}, max image length {})\n\
         # injective by rejection sampling; regenerate with:\n\
         #   endofix corpus --seed {} --count {} --rank {} --max-image-len {}\n{}",
        env!("CARGO_PKG_VERSION"),
        params.count,
        params.seed,
        params.rank,
        params.max_image_len,
        params.seed,
        params.count,
        params.rank,
        params.max_image_len,
        phi.to_text(),
    )
}
