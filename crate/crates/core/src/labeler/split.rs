use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Shuffles `items` and cuts them into train/validation/test parts.
///
/// The first two sizes are `floor(fraction * n)`; the test part takes the
/// remainder.
pub fn split_dataset<T, R: Rng + ?Sized>(
    mut items: Vec<T>,
    fractions: (f64, f64, f64),
    rng: &mut R,
) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    if items.is_empty() {
        return Err(Error::invalid("cannot split an empty dataset"));
    }
    let (a, b, c) = fractions;
    if [a, b, c].iter().any(|f| !(0.0..=1.0).contains(f)) || (a + b + c - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("split fractions {fractions:?} must sum to 1")));
    }
    let n = items.len();
    let n_train = floor_count(a, n);
    let n_val = floor_count(b, n).min(n - n_train);
    items.shuffle(rng);
    let test = items.split_off(n_train + n_val);
    let validation = items.split_off(n_train);
    Ok((items, validation, test))
}

/// `floor(fraction * n)` tolerant of representation error (0.1 * 10 == 1).
pub(crate) fn floor_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64) + 1e-9).floor() as usize
}
