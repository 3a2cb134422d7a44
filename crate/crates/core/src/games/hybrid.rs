//! The hybrid sequence between the two sides of a static challenge.
//!
//! Hybrid `j` for `0 ≤ j ≤ q` takes `min(m_i^L, m_i^R)` in positions
//! `i ≤ j` and `m_i^L` elsewhere; for `q < j ≤ 2q` it takes `m_i^R` in
//! positions `i > 2q − j` and the minimum elsewhere. Hybrid 0 is the left
//! sequence, hybrid `q` the pointwise minimum and hybrid `2q` the right one.

use super::ChallengePair;
use crate::error::Result;

/// The `2q + 1` hybrids of a valid pair.
pub fn hybrid_schedule(pair: &ChallengePair, ell: u8) -> Result<Vec<Vec<u64>>> {
    pair.validate(ell)?;
    let q = pair.q();
    let lo: Vec<u64> = pair
        .left
        .iter()
        .zip(&pair.right)
        .map(|(a, b)| *a.min(b))
        .collect();
    let hybrid = |j: usize| -> Vec<u64> {
        (1..=q)
            .map(|i| {
                let k = i - 1;
                if j <= q {
                    if i <= j {
                        lo[k]
                    } else {
                        pair.left[k]
                    }
                } else if i > 2 * q - j {
                    pair.right[k]
                } else {
                    lo[k]
                }
            })
            .collect()
    };
    Ok((0..=2 * q).map(hybrid).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_expansion() {
        let pair = ChallengePair::new(vec![1, 5, 9], vec![2, 5, 8]);
        let h = hybrid_schedule(&pair, 4).unwrap();
        let expect: Vec<Vec<u64>> = vec![
            vec![1, 5, 9],
            vec![1, 5, 9],
            vec![1, 5, 9],
            vec![1, 5, 8],
            vec![1, 5, 8],
            vec![1, 5, 8],
            vec![2, 5, 8],
        ];
        assert_eq!(h, expect);
    }

    #[test]
    fn single_position() {
        let h = hybrid_schedule(&ChallengePair::new(vec![3], vec![7]), 4).unwrap();
        assert_eq!(h, vec![vec![3], vec![3], vec![7]]);
    }

    #[test]
    fn identical_sides() {
        let h = hybrid_schedule(&ChallengePair::new(vec![2, 4], vec![2, 4]), 4).unwrap();
        assert_eq!(h.len(), 5);
        assert!(h.iter().all(|v| v == &vec![2, 4]));
    }
}
