use ndarray::{Array1, ArrayView1, ArrayView2};

use super::FusionError;

/// Softmax of `keys · query / sqrt(width)`.
pub fn attention_weights(query: ArrayView1<f64>, keys: ArrayView2<f64>) -> Result<Array1<f64>, FusionError> {
    if keys.ncols() != query.len() {
        return Err(FusionError::ShapeMismatch(format!("query width {} != key width {}", query.len(), keys.ncols())));
    }
    if keys.nrows() == 0 {
        return Ok(Array1::zeros(0));
    }
    let scale = 1.0 / (query.len().max(1) as f64).sqrt();
    let logits = keys.dot(&query) * scale;
    let max = logits.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let exp = logits.mapv(|x| (x - max).exp());
    let total = exp.sum();
    Ok(exp / total)
}

/// Single-query scaled dot-product attention over keyword keys/values.
/// No keys gives a zero vector as wide as `values`.
pub fn keyword_attention(
    query: ArrayView1<f64>,
    keys: ArrayView2<f64>,
    values: ArrayView2<f64>,
) -> Result<Array1<f64>, FusionError> {
    if keys.nrows() != values.nrows() {
        return Err(FusionError::ShapeMismatch(format!("{} keys but {} values", keys.nrows(), values.nrows())));
    }
    let weights = attention_weights(query, keys)?;
    if weights.is_empty() {
        return Ok(Array1::zeros(values.ncols()));
    }
    Ok(values.t().dot(&weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use proptest::prelude::*;

    #[test]
    fn singleton_returns_its_value() {
        let q = array![0.3, -0.7];
        let k = array![[0.3, -0.7]];
        let v = array![[1.0, 2.0, 3.0]];
        assert_eq!(keyword_attention(q.view(), k.view(), v.view()).unwrap(), array![1.0, 2.0, 3.0]);
    }

    #[test]
    fn aligned_query_selects_first_value() {
        let q = array![20.0, 0.0];
        let k = array![[1.0, 0.0], [0.0, 1.0]];
        let v = array![[1.0, 0.0], [0.0, 1.0]];
        let w = attention_weights(q.view(), k.view()).unwrap();
        // logit gap 20/sqrt(2) ≈ 14.1, so w0 = 1/(1+e^-14.1) > 0.99
        assert!(w[0] > 0.99);
        let out = keyword_attention(q.view(), k.view(), v.view()).unwrap();
        assert!((out[0] - w[0]).abs() < 1e-15 && out[0] > 0.99);
    }

    #[test]
    fn empty_and_mismatch() {
        let q = array![1.0, 2.0];
        let k = Array2::<f64>::zeros((0, 2));
        let v = Array2::<f64>::zeros((0, 5));
        assert_eq!(keyword_attention(q.view(), k.view(), v.view()).unwrap(), Array1::<f64>::zeros(5));
        let bad = array![[1.0, 2.0, 3.0]];
        assert!(keyword_attention(q.view(), bad.view(), array![[1.0]].view()).is_err());
        let k1 = array![[1.0, 2.0]];
        assert!(keyword_attention(q.view(), k1.view(), Array2::<f64>::zeros((2, 1)).view()).is_err());
    }

    proptest! {
        #[test]
        fn weights_sum_to_one_and_shift_invariant(
            rows in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 3), 1..10),
            q in proptest::collection::vec(-5.0f64..5.0, 3),
        ) {
            let n = rows.len();
            let k = Array2::from_shape_vec((n, 3), rows.concat()).unwrap();
            let q = Array1::from(q);
            let w = attention_weights(q.view(), k.view()).unwrap();
            prop_assert!((w.sum() - 1.0).abs() < 1e-9);
            // a coordinate shared by every key adds the same constant to all logits
            let mut k2 = Array2::zeros((n, 4));
            k2.slice_mut(ndarray::s![.., ..3]).assign(&k);
            k2.column_mut(3).fill(1.0);
            let mut q2 = Array1::zeros(4);
            q2.slice_mut(ndarray::s![..3]).assign(&q);
            q2[3] = 7.5;
            let w2 = attention_weights(q2.view(), k2.view()).unwrap();
            let logits = k.dot(&q) / 2.0 + 7.5 / 2.0;
            let base = logits.mapv(|x| (x - logits[0]).exp());
            let expect = &base / base.sum();
            for (a, b) in w2.iter().zip(expect.iter()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
