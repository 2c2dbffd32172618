//! Metropolis acceptance shared by both annealing loops.

use rand::Rng;

use crate::scalar::Scalar;

/// Accepts improvements and ties outright; a worse candidate is accepted
/// with probability `exp(-(candidate - current) / temperature)`.
pub fn accept_new<F: Scalar, R: Rng + ?Sized>(
    current_cost: F,
    candidate_cost: F,
    temperature: F,
    rng: &mut R,
) -> bool {
    if candidate_cost <= current_cost {
        return true;
    }
    let p = (-(candidate_cost - current_cost) / temperature).exp();
    rng.gen::<f64>() < p.to_f64_lossy()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn improvements_and_ties_always_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            assert!(accept_new(5.0, 4.0, 1e-9, &mut rng));
            assert!(accept_new(5.0, 5.0, 1e-9, &mut rng));
        }
    }

    #[test]
    fn acceptance_frequency_matches_boltzmann_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let trials = 10_000;
        let hits = (0..trials)
            .filter(|_| accept_new(10.0, 12.5, 2.5, &mut rng))
            .count();
        let freq = hits as f64 / trials as f64;
        assert!((freq - (-1.0f64).exp()).abs() < 0.02, "{freq}");
        let hits = (0..trials)
            .filter(|_| accept_new(10.0f32, 12.5, 2.5, &mut rng))
            .count();
        assert!((hits as f64 / trials as f64 - 0.3679).abs() < 0.02);
    }
}
