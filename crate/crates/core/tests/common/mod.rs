#![allow(dead_code)]

use mycosig_core::TimeSeries;

/// 64-bit LCG shared with `fixtures/reference_values.py`.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn uniform(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn normals(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    pub fn uniforms(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform()).collect()
    }
}

pub fn ts(v: Vec<f64>, fs: f64) -> TimeSeries {
    TimeSeries::new(v, fs).unwrap()
}

pub fn cumsum(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

pub fn assert_rel(got: f64, want: f64, rel: f64, what: &str) {
    let err = (got - want).abs();
    assert!(
        err <= rel * want.abs().max(f64::MIN_POSITIVE),
        "{what}: got {got:e}, want {want:e} (rel err {:e})",
        err / want.abs()
    );
}

/// Random sparse ARX systems drawn from the degree-1 polynomial candidate
/// space, used by the structure-recovery checks.
pub mod arx {
    use super::Lcg;
    use mycosig_core::narx::{Factor, RegressorTerm};

    pub const MAX_LAG: usize = 10;

    pub struct System {
        pub terms: Vec<RegressorTerm>,
        pub coefficients: Vec<f64>,
    }

    impl System {
        /// One to three distinct lagged terms, at least one of them an input
        /// lag, with coefficients of magnitude 0.2 to 0.6. Output-lag
        /// coefficients are rescaled so their absolute sum stays below 0.9,
        /// which keeps the recursion stable.
        pub fn draw(seed: u64) -> Self {
            let mut rng = Lcg::new(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xA5A5);
            let count = 1 + (rng.uniform() * 3.0) as usize;
            let mut factors: Vec<Factor> = Vec::new();
            while factors.len() < count {
                let lag = 1 + (rng.uniform() * MAX_LAG as f64) as usize;
                let f = if factors.is_empty() || rng.uniform() < 0.5 {
                    Factor::input(lag)
                } else {
                    Factor::output(lag)
                };
                if !factors.contains(&f) {
                    factors.push(f);
                }
            }
            let mut coefficients: Vec<f64> = factors
                .iter()
                .map(|_| {
                    let mag = 0.2 + 0.4 * rng.uniform();
                    if rng.uniform() < 0.5 {
                        -mag
                    } else {
                        mag
                    }
                })
                .collect();
            let ar_sum: f64 = factors
                .iter()
                .zip(&coefficients)
                .filter(|(f, _)| f.variable == mycosig_core::narx::Variable::OutputLag)
                .map(|(_, c)| c.abs())
                .sum();
            if ar_sum > 0.9 {
                for (f, c) in factors.iter().zip(coefficients.iter_mut()) {
                    if f.variable == mycosig_core::narx::Variable::OutputLag {
                        *c *= 0.9 / ar_sum;
                    }
                }
            }
            let terms = factors
                .into_iter()
                .map(|f| RegressorTerm::new(vec![f]))
                .collect();
            Self {
                terms,
                coefficients,
            }
        }

        /// Simulates `n` samples driven by uniform(-1, 1) input; `noise`
        /// scales a Gaussian equation error relative to the clean output's
        /// standard deviation.
        pub fn simulate(&self, n: usize, seed: u64, noise_to_signal: f64) -> (Vec<f64>, Vec<f64>) {
            let mut rng = Lcg::new(seed);
            let x: Vec<f64> = (0..n).map(|_| 2.0 * rng.uniform() - 1.0).collect();
            let run = |e: &[f64]| {
                let mut y = vec![0.0; n];
                for k in MAX_LAG..n {
                    let mut v = e[k];
                    for (t, c) in self.terms.iter().zip(&self.coefficients) {
                        let f = t.factors[0];
                        let src = match f.variable {
                            mycosig_core::narx::Variable::OutputLag => &y,
                            _ => &x,
                        };
                        v += c * src[k - f.lag];
                    }
                    y[k] = v;
                }
                y
            };
            let clean = run(&vec![0.0; n]);
            if noise_to_signal == 0.0 {
                return (x.clone(), clean);
            }
            let m = clean.iter().sum::<f64>() / n as f64;
            let sd = (clean.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt();
            let e: Vec<f64> = (0..n)
                .map(|_| noise_to_signal * sd * rng.normal())
                .collect();
            let y = run(&e);
            (x.clone(), y)
        }

        pub fn names(&self) -> Vec<String> {
            let mut v: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
            v.sort();
            v
        }
    }
}
