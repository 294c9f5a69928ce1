//! Empirical size and power of the hypothesis tests on seeded simulations.

mod common;

use common::{cumsum, ts, Lcg};
use mycosig_core::stats::{adf_test, anderson_darling, granger_causality, kruskal_wallis};
use mycosig_core::timeseries::difference;

const TRIALS: usize = 200;

fn rate(mut trial: impl FnMut(u64) -> bool) -> f64 {
    (0..TRIALS as u64).filter(|&s| trial(s)).count() as f64 / TRIALS as f64
}

fn assert_size(name: &str, r: f64) {
    assert!(
        (0.02..=0.10).contains(&r),
        "{name}: null rejection rate {r}"
    );
}

fn ar1(rng: &mut Lcg, n: usize, a: f64) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for k in 1..n {
        y[k] = a * y[k - 1] + rng.normal();
    }
    y
}

#[test]
fn adf_size_and_power() {
    let size = rate(|s| {
        let mut rng = Lcg::new(1000 + s);
        let y = cumsum(&rng.normals(500));
        adf_test(&ts(y, 1.0), None).unwrap().reject_at_05
    });
    assert_size("adf", size);
    let power = rate(|s| {
        let mut rng = Lcg::new(2000 + s);
        adf_test(&ts(rng.normals(500), 1.0), None)
            .unwrap()
            .reject_at_05
    });
    assert!(power >= 0.93, "adf power {power}");
}

#[test]
fn differenced_random_walk_is_stationary() {
    let passed = (0..100u64)
        .filter(|s| {
            let mut rng = Lcg::new(3000 + s);
            let walk = ts(cumsum(&rng.normals(1000)), 1.0);
            adf_test(&difference(&walk, 1).unwrap(), None)
                .unwrap()
                .reject_at_05
        })
        .count();
    assert!(passed >= 95, "{passed}/100");
}

#[test]
fn granger_size_and_power() {
    let size = rate(|s| {
        let mut rng = Lcg::new(4000 + s);
        let x = ar1(&mut rng, 500, 0.5);
        let y = ar1(&mut rng, 500, 0.5);
        granger_causality(&ts(x, 1.0), &ts(y, 1.0), 2)
            .unwrap()
            .reject_at_05
    });
    assert_size("granger", size);
    let power = rate(|s| {
        let mut rng = Lcg::new(5000 + s);
        let x = rng.normals(500);
        let e = rng.normals(500);
        let mut y = vec![0.0; 500];
        for k in 1..500 {
            y[k] = 0.3 * y[k - 1] + 0.3 * x[k - 1] + e[k];
        }
        granger_causality(&ts(x, 1.0), &ts(y, 1.0), 2)
            .unwrap()
            .reject_at_05
    });
    assert!(power >= 0.93, "granger power {power}");
}

#[test]
fn kruskal_size_and_power() {
    let size = rate(|s| {
        let mut rng = Lcg::new(6000 + s);
        let g: Vec<Vec<f64>> = (0..3).map(|_| rng.normals(30)).collect();
        kruskal_wallis(&g).unwrap().reject_at_05
    });
    assert_size("kruskal", size);
    let power = rate(|s| {
        let mut rng = Lcg::new(7000 + s);
        let g: Vec<Vec<f64>> = (0..3)
            .map(|i| rng.normals(30).into_iter().map(|v| v + i as f64).collect())
            .collect();
        kruskal_wallis(&g).unwrap().reject_at_05
    });
    assert!(power >= 0.93, "kruskal power {power}");
}

#[test]
fn anderson_size_and_power() {
    let size = rate(|s| {
        let mut rng = Lcg::new(8000 + s);
        anderson_darling(&ts(rng.normals(200), 1.0))
            .unwrap()
            .reject_at_05
    });
    assert_size("anderson-darling", size);
    let power = rate(|s| {
        let mut rng = Lcg::new(9000 + s);
        let expo: Vec<f64> = (0..200)
            .map(|_| -(rng.uniform().max(1e-300)).ln())
            .collect();
        anderson_darling(&ts(expo, 1.0)).unwrap().reject_at_05
    });
    assert!(power >= 0.93, "anderson-darling power {power}");
}
