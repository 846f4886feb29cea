//! Mutual-information clustering loss, pairwise KL loss and their weighted sum.
//!
//! Every loss returns its value together with the exact gradient with respect
//! to the batch probabilities, ready to be fed to [`MlpModel::backward`].
//! Entropies use the natural logarithm.
//!
//! [`MlpModel::backward`]: crate::net::MlpModel::backward

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::net::BatchProbabilities;
use crate::pairing::PairConstraint;

/// Floor applied to probabilities inside logarithms.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub grad: Array2<f64>,
}

impl LossValue {
    fn zero(shape: (usize, usize)) -> Self {
        Self {
            value: 0.0,
            grad: Array2::zeros(shape),
        }
    }

    fn combine(self, wa: f64, other: LossValue, wb: f64) -> Self {
        Self {
            value: wa * self.value + wb * other.value,
            grad: self.grad * wa + other.grad * wb,
        }
    }
}

fn ln_floor(p: f64) -> f64 {
    p.max(PROB_FLOOR).ln()
}

/// `-p ln p` with `0 ln 0 = 0`.
fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * ln_floor(p)
    }
}

/// H(Y|X): mean per-row entropy.
pub fn conditional_entropy(probs: &BatchProbabilities) -> LossValue {
    let p = probs.as_array();
    let n = p.nrows() as f64;
    let value = -p.iter().map(|&v| plogp(v)).sum::<f64>() / n;
    let grad = p.mapv(|v| -(ln_floor(v) + 1.0) / n);
    LossValue { value, grad }
}

/// H(Y): entropy of the batch-mean distribution.
pub fn marginal_entropy(probs: &BatchProbabilities) -> LossValue {
    let p = probs.as_array();
    let n = p.nrows() as f64;
    let mean = p.mean_axis(Axis(0)).expect("non-empty batch");
    let value = -mean.iter().map(|&v| plogp(v)).sum::<f64>();
    let col_grad = mean.mapv(|v| -(ln_floor(v) + 1.0) / n);
    let grad = Array2::from_shape_fn(p.dim(), |(_, k)| col_grad[k]);
    LossValue { value, grad }
}

/// H(Y|X) - H(Y), the negated mutual-information estimate.
pub fn mi_loss(probs: &BatchProbabilities) -> LossValue {
    conditional_entropy(probs).combine(1.0, marginal_entropy(probs), -1.0)
}

/// Mean over pairs of KL(p_anchor || p_partner); gradients reach both rows.
pub fn pairwise_kl_loss(probs: &BatchProbabilities, pairs: &[PairConstraint]) -> Result<LossValue> {
    let p = probs.as_array();
    let n = p.nrows();
    let mut out = LossValue::zero(p.dim());
    if pairs.is_empty() {
        return Ok(out);
    }
    for pair in pairs {
        for index in [pair.anchor, pair.partner] {
            if index >= n {
                return Err(Error::IndexOutOfRange { index, len: n });
            }
        }
    }
    let scale = 1.0 / pairs.len() as f64;
    for &PairConstraint { anchor, partner } in pairs {
        for k in 0..p.ncols() {
            let a = p[[anchor, k]];
            let b = p[[partner, k]];
            let log_b = ln_floor(b);
            out.value += scale * (plogp(a) - a * log_b);
            out.grad[[anchor, k]] += scale * (ln_floor(a) + 1.0 - log_b);
            if b > PROB_FLOOR {
                out.grad[[partner, k]] -= scale * a / b;
            }
        }
    }
    Ok(out)
}

/// `lambda * pairwise_kl_loss + mi_loss`.
pub fn overall_loss(
    probs: &BatchProbabilities,
    pairs: &[PairConstraint],
    lambda: f64,
) -> Result<LossValue> {
    let mi = mi_loss(probs);
    if lambda == 0.0 || pairs.is_empty() {
        return Ok(mi);
    }
    let pair = pairwise_kl_loss(probs, pairs)?;
    Ok(mi.combine(1.0, pair, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn bp(a: Array2<f64>) -> BatchProbabilities {
        BatchProbabilities::new(a).unwrap()
    }

    fn pair(anchor: usize, partner: usize) -> PairConstraint {
        PairConstraint { anchor, partner }
    }

    /// Central differences on the probability entries; rows are not
    /// renormalized, matching the unconstrained gradient.
    fn fd_grad(f: impl Fn(&BatchProbabilities) -> f64, p: &Array2<f64>, h: f64) -> Array2<f64> {
        let mut g = Array2::zeros(p.dim());
        for idx in 0..p.len() {
            let (i, k) = (idx / p.ncols(), idx % p.ncols());
            let mut up = p.clone();
            up[[i, k]] += h;
            let mut down = p.clone();
            down[[i, k]] -= h;
            g[[i, k]] = (f(&BatchProbabilities::new_unchecked(up))
                - f(&BatchProbabilities::new_unchecked(down)))
                / (2.0 * h);
        }
        g
    }

    fn rel_err(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        let diff = (a - b).mapv(|v| v * v).sum().sqrt();
        let scale = a.mapv(|v| v * v).sum().sqrt().max(b.mapv(|v| v * v).sum().sqrt());
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }

    fn interior_probs() -> Array2<f64> {
        array![[0.2, 0.5, 0.3], [0.6, 0.1, 0.3], [0.25, 0.25, 0.5], [0.05, 0.15, 0.8]]
    }

    #[test]
    fn conditional_entropy_cases() {
        let onehot = bp(array![[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(conditional_entropy(&onehot).value, 0.0);
        let uniform = bp(Array2::from_elem((3, 4), 0.25));
        assert!((conditional_entropy(&uniform).value - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn marginal_entropy_cases() {
        let split = bp(array![[1.0, 0.0], [0.0, 1.0]]);
        assert!((marginal_entropy(&split).value - 2f64.ln()).abs() < 1e-12);
        let collapsed = bp(array![[0.0, 1.0], [0.0, 1.0]]);
        assert_eq!(marginal_entropy(&collapsed).value, 0.0);
    }

    #[test]
    fn mi_loss_cases() {
        let balanced = bp(array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!((mi_loss(&balanced).value + 3f64.ln()).abs() < 1e-12);
        let uniform = bp(Array2::from_elem((5, 3), 1.0 / 3.0));
        assert!(mi_loss(&uniform).value.abs() < 1e-12);
        let collapsed = bp(array![[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]]);
        assert_eq!(mi_loss(&collapsed).value, 0.0);
    }

    #[test]
    fn entropy_gradients_match_finite_differences() {
        let p = interior_probs();
        let probs = bp(p.clone());
        let h = 1e-6;
        let checks: [(fn(&BatchProbabilities) -> LossValue, &str); 3] = [
            (conditional_entropy, "conditional"),
            (marginal_entropy, "marginal"),
            (mi_loss, "mi"),
        ];
        for (f, name) in checks {
            let num = fd_grad(|q| f(q).value, &p, h);
            let err = rel_err(&f(&probs).grad, &num);
            assert!(err < 1e-6, "{name}: {err}");
        }
    }

    #[test]
    fn pairwise_kl_cases() {
        let same = bp(array![[0.3, 0.7], [0.3, 0.7]]);
        assert_eq!(pairwise_kl_loss(&same, &[pair(0, 1)]).unwrap().value, 0.0);

        let p = bp(array![[1.0, 0.0], [0.5, 0.5]]);
        let v = pairwise_kl_loss(&p, &[pair(0, 1)]).unwrap().value;
        assert!((v - 2f64.ln()).abs() < 1e-12);

        let empty = pairwise_kl_loss(&p, &[]).unwrap();
        assert_eq!(empty.value, 0.0);
        assert!(empty.grad.iter().all(|&g| g == 0.0));

        assert!(matches!(
            pairwise_kl_loss(&p, &[pair(0, 2)]),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn pairwise_kl_gradient_matches_finite_differences() {
        let p = interior_probs();
        let pairs = [pair(0, 1), pair(1, 3), pair(2, 0), pair(3, 2), pair(0, 3)];
        let analytic = pairwise_kl_loss(&bp(p.clone()), &pairs).unwrap().grad;
        let num = fd_grad(|q| pairwise_kl_loss(q, &pairs).unwrap().value, &p, 1e-6);
        let err = rel_err(&analytic, &num);
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn overall_loss_composition() {
        let probs = bp(interior_probs());
        let pairs = [pair(0, 1), pair(2, 3)];
        let mi = mi_loss(&probs);
        assert_eq!(overall_loss(&probs, &pairs, 0.0).unwrap(), mi);
        assert_eq!(overall_loss(&probs, &[], 3.0).unwrap(), mi);

        let combined = overall_loss(&probs, &pairs, 2.0).unwrap();
        let kl = pairwise_kl_loss(&probs, &pairs).unwrap();
        assert!((combined.value - (mi.value + 2.0 * kl.value)).abs() < 1e-12);

        let uniform = bp(Array2::from_elem((4, 3), 1.0 / 3.0));
        assert!(overall_loss(&uniform, &pairs, 1.0).unwrap().value.abs() < 1e-12);
    }

    fn prob_batch() -> impl Strategy<Value = Array2<f64>> {
        (1usize..7, 1usize..6).prop_flat_map(|(n, k)| {
            proptest::collection::vec(0.0f64..1.0, n * k).prop_map(move |raw| {
                let mut a = Array2::from_shape_vec((n, k), raw).unwrap();
                for mut row in a.rows_mut() {
                    let s = row.sum();
                    if s <= 0.0 {
                        row.fill(1.0 / k as f64);
                    } else {
                        row /= s;
                    }
                }
                a
            })
        })
    }

    proptest! {
        #[test]
        fn entropy_bounds(p in prob_batch()) {
            let probs = bp(p);
            let ln_k = (probs.k() as f64).ln();
            let tol = 1e-12;
            let c = conditional_entropy(&probs).value;
            let m = marginal_entropy(&probs).value;
            prop_assert!(c >= -tol && c <= ln_k + tol);
            prop_assert!(m >= -tol && m <= ln_k + tol);
            let mi = mi_loss(&probs).value;
            prop_assert!(mi >= -ln_k - tol && mi <= ln_k + tol);
        }

        #[test]
        fn loss_invariant_under_row_permutation(p in prob_batch(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let n = p.nrows();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let pairs: Vec<_> = (0..n).map(|i| pair(i, (i + 1) % n)).collect();
            // row r of the permuted batch is row perm[r] of the original
            let mut inv = vec![0; n];
            for (r, &o) in perm.iter().enumerate() { inv[o] = r; }
            let permuted = p.select(Axis(0), &perm);
            let ppairs: Vec<_> = pairs.iter().map(|q| pair(inv[q.anchor], inv[q.partner])).collect();
            let a = overall_loss(&bp(p), &pairs, 1.0).unwrap().value;
            let b = overall_loss(&bp(permuted), &ppairs, 1.0).unwrap().value;
            prop_assert!((a - b).abs() < 1e-10);
        }

        #[test]
        fn pairwise_kl_non_negative(p in prob_batch()) {
            let n = p.nrows();
            let pairs: Vec<_> = (0..n).flat_map(|i| (0..n).map(move |j| pair(i, j))).collect();
            prop_assert!(pairwise_kl_loss(&bp(p), &pairs).unwrap().value >= -1e-12);
        }
    }
}
