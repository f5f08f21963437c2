//! Entropy, information gain, and gain ratio for categorical splits.

use crate::scalar::Scalar;

/// Shannon entropy in bits of a count histogram; zero counts contribute
/// nothing and an all-zero histogram has entropy 0.
pub fn entropy<F: Scalar>(counts: &[usize]) -> F {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return F::zero();
    }
    let mut h = F::zero();
    for &c in counts {
        if c > 0 {
            let p = F::ratio(c, total);
            h -= p * p.log2();
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitEvaluation<F: Scalar> {
    pub gain: F,
    pub split_info: F,
    /// gain / split_info, or 0 when split_info is 0 (at most one non-empty
    /// child — such a split is never usable).
    pub gain_ratio: F,
}

/// Score a candidate multiway split from its per-child class histograms
/// `[short_lived, extended]`. The parent histogram is the column sum.
pub fn evaluate_split<F: Scalar>(children: &[[usize; 2]]) -> SplitEvaluation<F> {
    let parent = [
        children.iter().map(|c| c[0]).sum::<usize>(),
        children.iter().map(|c| c[1]).sum::<usize>(),
    ];
    let total = parent[0] + parent[1];
    if total == 0 {
        return SplitEvaluation {
            gain: F::zero(),
            split_info: F::zero(),
            gain_ratio: F::zero(),
        };
    }
    let mut conditional = F::zero();
    let mut split_info = F::zero();
    for child in children {
        let size = child[0] + child[1];
        if size == 0 {
            continue;
        }
        let weight = F::ratio(size, total);
        conditional += weight * entropy(child);
        split_info -= weight * weight.log2();
    }
    let gain = entropy::<F>(&parent) - conditional;
    let gain_ratio = if split_info > F::zero() {
        gain / split_info
    } else {
        F::zero()
    };
    SplitEvaluation {
        gain,
        split_info,
        gain_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn entropy_reference_values() {
        assert_eq!(entropy::<f64>(&[4, 0]), 0.0);
        assert_eq!(entropy::<f64>(&[0, 0]), 0.0);
        assert_abs_diff_eq!(entropy::<f64>(&[2, 2]), 1.0, epsilon = 1e-15);
        // H(1/4, 3/4) = 2 - 0.75·log2(3)
        assert_abs_diff_eq!(entropy::<f64>(&[1, 3]), 0.811278124459133, epsilon = 1e-12);
        // H(1/3, 2/3) = log2(3) - 2/3
        assert_abs_diff_eq!(entropy::<f64>(&[2, 4]), 0.918295834054490, epsilon = 1e-12);
    }

    #[test]
    fn perfect_split_scores_one() {
        let eval = evaluate_split::<f64>(&[[2, 0], [0, 2]]);
        assert_abs_diff_eq!(eval.gain, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eval.split_info, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eval.gain_ratio, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn half_pure_split_matches_hand_entropy() {
        // Parent (3,1): H = 0.811278…; children (2,0) pure and (1,1) at 1 bit.
        let eval = evaluate_split::<f64>(&[[2, 0], [1, 1]]);
        assert_abs_diff_eq!(eval.gain, 0.811278124459133 - 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(eval.split_info, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eval.gain_ratio, 0.311278124459133, epsilon = 1e-12);
    }

    #[test]
    fn uninformative_split_has_zero_gain() {
        let eval = evaluate_split::<f64>(&[[1, 1], [1, 1]]);
        assert_abs_diff_eq!(eval.gain, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eval.split_info, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn single_child_split_is_unusable() {
        let eval = evaluate_split::<f64>(&[[3, 2]]);
        assert_eq!(eval.split_info, 0.0);
        assert_eq!(eval.gain_ratio, 0.0);
    }

    #[test]
    fn uneven_three_way_split() {
        // Parent (4,2), children (2,0), (1,1), (1,1):
        // gain = H(1/3) - (2/6)·0 - (4/6)·1 = 0.918296… - 0.666667…
        let eval = evaluate_split::<f64>(&[[2, 0], [1, 1], [1, 1]]);
        assert_abs_diff_eq!(eval.gain, 0.918295834054490 - 2.0 / 3.0, epsilon = 1e-12);
        // split_info = H(2/6, 2/6, 2/6) = log2(3)
        assert_abs_diff_eq!(eval.split_info, 1.584962500721156, epsilon = 1e-12);
    }
}
