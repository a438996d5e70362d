use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::Action;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable hash of a word sequence; used to derive independent seeds.
pub fn mix(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x51_7cc1_b727_220a_u64, |h, &w| splitmix(h ^ splitmix(w)))
}

pub fn rng_for(words: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(words))
}

pub fn action_word(a: &Action) -> u64 {
    let (x, y) = match *a {
        Action::PickUp(b) | Action::PutDown(b) => (b.0, 0xff),
        Action::Unstack(b, t) | Action::Stack(b, t) => (b.0, t.0),
    };
    ((a.kind() as u64) << 16) | ((x as u64) << 8) | y as u64
}

/// `ln σ(x)` without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    log_sigmoid(x).exp()
}

/// Log-softmax of `logits`. `-inf` logits stay `-inf`.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        let k = logits.len() as f64;
        return logits.iter().map(|_| -k.ln()).collect();
    }
    let lse = max + logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&l| (l - lse).min(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sigmoid_values() {
        assert!((log_sigmoid(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-9);
        assert_eq!(log_sigmoid(800.0), 0.0);
    }

    #[test]
    fn log_softmax_normalizes() {
        let v = log_softmax(&[1.0, 2.0, 3.0]);
        let total: f64 = v.iter().map(|x| x.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(v.iter().all(|&x| x <= 0.0));
        let sharp = log_softmax(&[-1e6, -2e6]);
        assert_eq!(sharp[0], 0.0);
        assert!(sharp[1] < -1e5);
    }

    #[test]
    fn mix_is_order_sensitive() {
        assert_ne!(mix(&[1, 2]), mix(&[2, 1]));
        assert_eq!(mix(&[7, 9]), mix(&[7, 9]));
    }
}
