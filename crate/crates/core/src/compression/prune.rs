use super::Tensor2D;
use crate::error::{Error, Result};

/// Zeroes exactly `floor(sparsity * n)` elements of smallest magnitude.
/// Equal magnitudes are pruned in ascending flat-index order; surviving
/// elements are left untouched.
pub fn prune_magnitude(t: &Tensor2D, sparsity: f64) -> Result<Tensor2D> {
    if !(0.0..=1.0).contains(&sparsity) {
        return Err(Error::OutOfRange {
            what: "sparsity",
            value: sparsity,
            min: 0.0,
            max: 1.0,
        });
    }
    let n = t.len();
    let k = ((sparsity * n as f64).floor() as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let data = t.data();
    order.sort_by(|&a, &b| data[a].abs().total_cmp(&data[b].abs()).then(a.cmp(&b)));

    let mut out = t.clone();
    let out_data = out.data_mut();
    for &idx in &order[..k] {
        out_data[idx] = 0.0;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vec_t(v: &[f32]) -> Tensor2D {
        Tensor2D::new(1, v.len(), v.to_vec()).unwrap()
    }

    #[test]
    fn halves_smallest() {
        let out = prune_magnitude(&vec_t(&[1.0, -4.0, 2.0, 3.0]), 0.5).unwrap();
        assert_eq!(out.data(), &[0.0, -4.0, 0.0, 3.0]);
    }

    #[test]
    fn extremes() {
        let t = vec_t(&[0.5, -0.25, 7.0]);
        assert!(prune_magnitude(&t, 0.0).unwrap().bit_eq(&t));
        assert!(prune_magnitude(&t, 1.0)
            .unwrap()
            .data()
            .iter()
            .all(|&x| x == 0.0));
        assert!(prune_magnitude(&t, 1.5).is_err());
        assert!(prune_magnitude(&t, -0.1).is_err());
    }

    #[test]
    fn ties_prune_lower_index_first() {
        let out = prune_magnitude(&vec_t(&[2.0, -1.0, 1.0, 3.0]), 0.25).unwrap();
        assert_eq!(out.data(), &[2.0, 0.0, 1.0, 3.0]);
    }

    proptest! {
        #[test]
        fn matches_sort_oracle(
            v in proptest::collection::vec(-5.0f32..5.0, 1..64),
            s in 0.0f64..=1.0,
        ) {
            let out = prune_magnitude(&vec_t(&v), s).unwrap();
            let k = (s * v.len() as f64).floor() as usize;
            let mut ranked: Vec<(f32, usize)> = v.iter().map(|x| x.abs()).zip(0..).collect();
            ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let mut expected = v.clone();
            for &(_, i) in &ranked[..k] {
                expected[i] = 0.0;
            }
            prop_assert_eq!(out.data(), &expected[..]);
        }
    }
}
