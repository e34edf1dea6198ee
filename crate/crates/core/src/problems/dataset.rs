use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ProblemError;

/// Squared radius of the decision circle centred at `(0.5, 0.5)`.
pub const CIRCLE_RADIUS_SQ: f64 = 0.15;
pub const DEFAULT_TRAIN: usize = 200;
pub const DEFAULT_TEST: usize = 100;
const MIN_SPLIT: usize = 10;
const BALANCE: (f64, f64) = (0.4, 0.6);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: [f64; 2],
    pub label: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationDataset {
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    pub seed: u64,
}

impl ClassificationDataset {
    pub fn split(&self, split: Split) -> &[Sample] {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
        }
    }
}

/// 1 outside the circle, 0 inside.
pub fn circle_label(x: [f64; 2]) -> u8 {
    let r2 = (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2);
    u8::from(r2 > CIRCLE_RADIUS_SQ)
}

/// Uniform points in the unit square labelled by [`circle_label`]; each split
/// is rebalanced so that either class makes up 40-60% of it.
pub fn generate_vqc_dataset(seed: u64, n_train: usize, n_test: usize) -> Result<ClassificationDataset, ProblemError> {
    if n_train < MIN_SPLIT || n_test < MIN_SPLIT {
        return Err(ProblemError::DatasetSize { n_train, n_test });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let train = balanced_split(&mut rng, n_train);
    let test = balanced_split(&mut rng, n_test);
    Ok(ClassificationDataset { train, test, seed })
}

fn draw(rng: &mut ChaCha8Rng) -> Sample {
    let x = [rng.random::<f64>(), rng.random::<f64>()];
    Sample { x, label: circle_label(x) }
}

fn balanced_split(rng: &mut ChaCha8Rng, n: usize) -> Vec<Sample> {
    let mut out: Vec<Sample> = (0..n).map(|_| draw(rng)).collect();
    loop {
        let ones = out.iter().filter(|s| s.label == 1).count();
        let frac = ones as f64 / n as f64;
        let (minority, majority) = if frac < BALANCE.0 {
            (1, 0)
        } else if frac > BALANCE.1 {
            (0, 1)
        } else {
            return out;
        };
        // replace the first majority sample with a fresh minority draw
        let slot = out.iter().position(|s| s.label == majority).expect("majority class present");
        out[slot] = loop {
            let s = draw(rng);
            if s.label == minority {
                break s;
            }
        };
    }
}
