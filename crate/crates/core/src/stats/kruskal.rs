use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::TestResult;
use crate::error::{Error, Result};

/// Kruskal-Wallis H test with the usual tie correction. When every
/// observation is identical the result is `H = 0`, `p = 1`.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::InvalidArgument(
            "Kruskal-Wallis needs at least two groups".into(),
        ));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::InvalidArgument(
            "Kruskal-Wallis groups must be non-empty".into(),
        ));
    }
    let total: usize = groups.iter().map(Vec::len).sum();
    if total < 5 {
        return Err(Error::InvalidArgument(format!(
            "Kruskal-Wallis needs at least 5 observations, got {total}"
        )));
    }
    if groups.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("observations must be finite".into()));
    }

    let mut pooled: Vec<(f64, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, vals)| vals.iter().map(move |&v| (v, g)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut rank_sums = vec![0.0; groups.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // ranks are 1-based; the tied block i..j shares their mean
        let rank = (i + j + 1) as f64 / 2.0;
        for &(_, g) in &pooled[i..j] {
            rank_sums[g] += rank;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }

    let n = total as f64;
    let correction = 1.0 - tie_term / (n * n * n - n);
    let df = groups.len() - 1;
    if correction <= 0.0 {
        let mut out = TestResult::from_p(0.0, 1.0);
        out.df = Some(df);
        return Ok(out);
    }
    let sum: f64 = rank_sums
        .iter()
        .zip(groups)
        .map(|(r, g)| r * r / g.len() as f64)
        .sum();
    let h = ((12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction).max(0.0);
    let p = ChiSquared::new(df as f64)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?
        .sf(h);
    let mut out = TestResult::from_p(h, p);
    out.df = Some(df);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_groups() {
        let r = kruskal_wallis(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        assert!((r.p_value.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_equal_is_h_zero() {
        let r = kruskal_wallis(&[vec![2.0; 3], vec![2.0; 4]]).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, Some(1.0)));
        assert!(!r.reject_at_05);
    }

    #[test]
    fn preconditions() {
        assert!(kruskal_wallis(&[vec![1.0, 2.0, 3.0, 4.0, 5.0]]).is_err());
        assert!(kruskal_wallis(&[vec![1.0, 2.0, 3.0, 4.0], vec![]]).is_err());
        assert!(kruskal_wallis(&[vec![1.0, 2.0], vec![3.0, 4.0]]).is_err());
    }

    #[test]
    fn separated_groups_reject() {
        let a: Vec<f64> = (0..50).map(|i| (i as f64 * 0.618).fract()).collect();
        let b: Vec<f64> = a.iter().map(|v| v + 5.0).collect();
        let r = kruskal_wallis(&[a, b]).unwrap();
        assert!(r.p_value.unwrap() < 1e-3);
    }

    proptest! {
        #[test]
        fn monotone_transform_invariant(
            a in proptest::collection::vec(-10.0f64..10.0, 2..15),
            b in proptest::collection::vec(-10.0f64..10.0, 3..15),
        ) {
            let r1 = kruskal_wallis(&[a.clone(), b.clone()]).unwrap();
            let f = |v: &Vec<f64>| v.iter().map(|x| x.exp() * 3.0 + 1.0).collect::<Vec<_>>();
            let r2 = kruskal_wallis(&[f(&a), f(&b)]).unwrap();
            prop_assert!((r1.statistic - r2.statistic).abs() < 1e-9 * r1.statistic.max(1.0));
        }
    }
}
