use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PartitionedCounts;

/// One measured pruning configuration: embedding and transformer sparsity
/// with the accuracy the pruned model reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityPoint {
    pub s_embd: f64,
    pub s_tf: f64,
    pub accuracy: f64,
}

impl SparsityPoint {
    pub fn new(s_embd: f64, s_tf: f64, accuracy: f64) -> Result<Self> {
        for (what, v) in [("s_embd", s_embd), ("s_tf", s_tf)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    what,
                    value: v,
                    min: 0.0,
                    max: 1.0,
                });
            }
        }
        Ok(Self {
            s_embd,
            s_tf,
            accuracy,
        })
    }
}

/// Whole-model sparsity `s_embd * P_embd + s_tf * P_tf`, with the partition
/// shares taken from `p`.
pub fn cumulative_sparsity(s_embd: f64, s_tf: f64, p: &PartitionedCounts) -> f64 {
    s_embd * p.p_embd() + s_tf * p.p_tf()
}

/// Highest sparsity on a 1-D pruning curve whose accuracy still meets
/// `baseline`; 0 when no point does.
pub fn find_csp_1d(curve: &[(f64, f64)], baseline: f64) -> Result<f64> {
    if curve.is_empty() {
        return Err(Error::Empty("pruning curve"));
    }
    Ok(curve
        .iter()
        .filter(|(_, acc)| *acc >= baseline)
        .map(|(s, _)| *s)
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CspOutcome {
    pub point: SparsityPoint,
    pub cumulative: f64,
    /// True when no grid point met the baseline and the un-pruned point was
    /// returned instead.
    pub fallback: bool,
}

/// Grid search for the combined critical sparsity point: the qualifying
/// point with the highest cumulative sparsity, ties resolved towards higher
/// accuracy and then lower embedding sparsity.
pub fn find_csp_2d(
    grid: &[SparsityPoint],
    baseline: f64,
    p: &PartitionedCounts,
) -> Result<CspOutcome> {
    if grid.is_empty() {
        return Err(Error::Empty("sparsity grid"));
    }
    let rank = |a: &SparsityPoint, b: &SparsityPoint| -> Ordering {
        cumulative_sparsity(a.s_embd, a.s_tf, p)
            .total_cmp(&cumulative_sparsity(b.s_embd, b.s_tf, p))
            .then(a.accuracy.total_cmp(&b.accuracy))
            .then(b.s_embd.total_cmp(&a.s_embd))
    };
    let best = grid
        .iter()
        .filter(|pt| pt.accuracy >= baseline)
        .max_by(|a, b| rank(a, b));

    Ok(match best {
        Some(pt) => CspOutcome {
            point: *pt,
            cumulative: cumulative_sparsity(pt.s_embd, pt.s_tf, p),
            fallback: false,
        },
        None => {
            let accuracy = grid
                .iter()
                .find(|pt| pt.s_embd == 0.0 && pt.s_tf == 0.0)
                .map_or(baseline, |pt| pt.accuracy);
            CspOutcome {
                point: SparsityPoint {
                    s_embd: 0.0,
                    s_tf: 0.0,
                    accuracy,
                },
                cumulative: 0.0,
                fallback: true,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shares(p_embd: f64, p_tf: f64) -> PartitionedCounts {
        // 1e6-parameter model with the requested shares
        let e = (p_embd * 1e6).round() as u64;
        let t = (p_tf * 1e6).round() as u64;
        PartitionedCounts {
            word_embeddings: e,
            attention: t,
            classifier: 1_000_000 - e - t,
            ..Default::default()
        }
    }

    #[test]
    fn equal_sparsity_collapses() {
        let p = shares(0.4, 0.6);
        assert!((cumulative_sparsity(0.5, 0.5, &p) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn direct_arithmetic() {
        let p = shares(0.4, 0.6);
        assert!((cumulative_sparsity(0.3, 0.7, &p) - 0.54).abs() < 1e-12);
        let p = shares(0.399, 0.6);
        let sc = cumulative_sparsity(0.471, 0.0, &p);
        assert!((sc - 0.188).abs() < 1e-3, "{sc}");
    }

    #[test]
    fn csp_1d() {
        let curve = [(0.1, 91.0), (0.2, 90.5), (0.3, 89.0)];
        assert_eq!(find_csp_1d(&curve, 90.0).unwrap(), 0.2);
        assert_eq!(find_csp_1d(&curve, 80.0).unwrap(), 0.3);
        assert_eq!(find_csp_1d(&curve, 95.0).unwrap(), 0.0);
        assert!(find_csp_1d(&[], 90.0).is_err());
    }

    #[test]
    fn csp_2d_corner() {
        let p = shares(0.4, 0.6);
        let levels = [0.0, 0.3, 0.6];
        let mut grid = Vec::new();
        for &se in &levels {
            for &st in &levels {
                // only the (0.6, 0.6) corner and the origin meet the baseline
                let acc = if (se == 0.6 && st == 0.6) || (se == 0.0 && st == 0.0) {
                    90.0
                } else {
                    80.0
                };
                grid.push(SparsityPoint::new(se, st, acc).unwrap());
            }
        }
        let out = find_csp_2d(&grid, 85.0, &p).unwrap();
        assert_eq!((out.point.s_embd, out.point.s_tf), (0.6, 0.6));
        assert!(!out.fallback);
    }

    #[test]
    fn csp_2d_singleton_and_fallback() {
        let p = shares(0.4, 0.6);
        let origin = [SparsityPoint::new(0.0, 0.0, 91.0).unwrap()];
        let out = find_csp_2d(&origin, 90.0, &p).unwrap();
        assert_eq!(out.point, origin[0]);
        assert!(!out.fallback);

        let miss = [SparsityPoint::new(0.5, 0.5, 70.0).unwrap()];
        let out = find_csp_2d(&miss, 90.0, &p).unwrap();
        assert!(out.fallback);
        assert_eq!(
            (out.point.s_embd, out.point.s_tf, out.cumulative),
            (0.0, 0.0, 0.0)
        );
        assert!(find_csp_2d(&[], 90.0, &p).is_err());
    }

    #[test]
    fn csp_2d_tie_breaks() {
        let p = shares(0.5, 0.5);
        let grid = [
            SparsityPoint::new(0.2, 0.4, 90.0).unwrap(),
            SparsityPoint::new(0.4, 0.2, 90.0).unwrap(),
            SparsityPoint::new(0.3, 0.3, 89.0).unwrap(),
        ];
        let out = find_csp_2d(&grid, 85.0, &p).unwrap();
        assert_eq!(out.point.s_embd, 0.2);
    }

    #[test]
    fn point_range_checked() {
        assert!(SparsityPoint::new(1.2, 0.0, 0.0).is_err());
        assert!(SparsityPoint::new(0.0, -0.1, 0.0).is_err());
    }
}
