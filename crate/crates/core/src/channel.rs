//! Simulated transmission channel: a NARX model driven by a stimulus, with
//! optional input coupling and additive Gaussian measurement noise.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::narx::{free_run, BasisSpec, Factor, NarxModel, RegressorTerm, Transform, Variable};
use crate::timeseries::{make_square_wave, RecordingPair, StimulusSpec, TimeSeries};

/// The reference output-only channel model:
/// `y(k) = 0.33 y(k-1) + 0.21 y(k-2) - 0.15 y(k-27) + 0.20 y(k-9) + 0.21`,
/// with the reported coefficient half-widths attached as metadata.
pub fn eq2_default() -> NarxModel {
    let terms = vec![
        RegressorTerm::new(vec![Factor::output(1)]),
        RegressorTerm::new(vec![Factor::output(2)]),
        RegressorTerm::new(vec![Factor::output(27)]),
        RegressorTerm::new(vec![Factor::output(9)]),
        RegressorTerm::constant(),
    ];
    let mut model = NarxModel::new(
        BasisSpec::polynomial(1),
        terms,
        vec![0.33, 0.21, -0.15, 0.20, 0.21],
    )
    .expect("term and coefficient counts agree");
    model.uncertainties = Some(vec![0.99, 5.5e-4, 9.2e-4, 1.3e-3, 4.2e-3]);
    model
}

/// Output-lag coefficients `a_1..a_p` and the constant of a model that is
/// linear in lagged outputs, or `None` if any term is nonlinear or involves
/// other variables.
fn linear_ar_form(model: &NarxModel) -> Option<(Vec<f64>, f64)> {
    let mut a = vec![0.0; model.max_lags.output];
    let mut c = 0.0;
    for (t, coef) in model.terms.iter().zip(&model.coefficients) {
        match t.factors.as_slice() {
            [] => c += coef,
            [f] if f.variable == Variable::OutputLag && f.transform == Transform::Identity => {
                a[f.lag - 1] += coef
            }
            _ => return None,
        }
    }
    Some((a, c))
}

/// Steady state `c / (1 - Σ a_i)` of a linear autoregression with constant.
pub fn fixed_point(model: &NarxModel) -> Option<f64> {
    let (a, c) = linear_ar_form(model)?;
    let gain = 1.0 - a.iter().sum::<f64>();
    (gain.abs() > 1e-12).then(|| c / gain)
}

/// Spectral radius of the companion matrix of a linear autoregression; below
/// one means the recursion is stable. `None` for non-linear models.
pub fn spectral_radius(model: &NarxModel) -> Option<f64> {
    let (a, _) = linear_ar_form(model)?;
    let p = a.len();
    if p == 0 {
        return Some(0.0);
    }
    let mut m = DMatrix::<f64>::zeros(p, p);
    for (j, v) in a.iter().enumerate() {
        m[(0, j)] = *v;
    }
    for i in 1..p {
        m[(i, i - 1)] = 1.0;
    }
    Some(
        m.complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max),
    )
}

/// Channel configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub model: NarxModel,
    /// `(lag, gain)` pairs added to the model as input terms.
    pub input_coupling: Vec<(usize, f64)>,
    pub noise_sigma_v: f64,
    pub seed: u64,
    pub initial_output_v: f64,
}

impl Default for ChannelSpec {
    /// The reference model, coupled to the input at lag 1 with gain 0.05,
    /// noise-free and started from its fixed point.
    fn default() -> Self {
        let model = eq2_default();
        let initial = fixed_point(&model).unwrap_or(0.0);
        Self {
            model,
            input_coupling: vec![(1, 0.05)],
            noise_sigma_v: 0.0,
            seed: 0,
            initial_output_v: initial,
        }
    }
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma_v >= 0.0 && self.noise_sigma_v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise sigma must be finite and non-negative, got {}",
                self.noise_sigma_v
            )));
        }
        if !self.initial_output_v.is_finite() {
            return Err(Error::InvalidArgument(
                "initial output must be finite".into(),
            ));
        }
        if self
            .input_coupling
            .iter()
            .any(|&(lag, g)| lag == 0 || !g.is_finite())
        {
            return Err(Error::InvalidArgument(
                "coupling lags must be positive with finite gains".into(),
            ));
        }
        self.model.validate()
    }

    /// The model with the coupling terms appended.
    pub fn coupled_model(&self) -> NarxModel {
        let mut m = self.model.clone();
        for &(lag, gain) in &self.input_coupling {
            m.terms.push(RegressorTerm::new(vec![Factor::input(lag)]));
            m.coefficients.push(gain);
            m.err.push(0.0);
            m.max_lags.input = m.max_lags.input.max(lag);
            if let Some(u) = m.uncertainties.as_mut() {
                u.push(0.0);
            }
        }
        m
    }

    /// Empirical stability check: a noise-free, input-free run must not
    /// diverge over ten times the model's history (and at least 10 000 steps,
    /// so slowly growing modes of short models are caught too).
    pub fn check_stability(&self) -> Result<()> {
        let model = self.coupled_model();
        let h = model.max_lags.history().max(1);
        let zeros = TimeSeries::new(vec![0.0; h + (10 * h).max(10_000)], 1.0)?;
        free_run(&model, &zeros, &vec![self.initial_output_v; h])
            .map(|_| ())
            .map_err(|e| match e {
                Error::Diverged { step } => Error::UnstableChannel { step },
                other => other,
            })
    }
}

/// Drives the channel with `input` and returns the aligned recording.
///
/// The first `history` output samples hold the initial value; Gaussian noise
/// of standard deviation `noise_sigma_v` is then added to every output sample
/// from a generator seeded with `spec.seed`.
pub fn simulate_channel(
    spec: &ChannelSpec,
    input: &TimeSeries,
    input_frequency_hz: f64,
    replicate_id: impl Into<String>,
) -> Result<RecordingPair> {
    spec.validate()?;
    let model = spec.coupled_model();
    let h = model.max_lags.history();
    if input.len() <= h {
        return Err(Error::InsufficientHistory {
            required: h + 1,
            available: input.len(),
        });
    }
    let clean = free_run(&model, input, &vec![spec.initial_output_v; h]).map_err(|e| match e {
        Error::Diverged { step } => Error::UnstableChannel { step },
        other => other,
    })?;
    let mut out = clean.into_samples();
    if spec.noise_sigma_v > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let normal = Normal::new(0.0, spec.noise_sigma_v)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for v in &mut out {
            *v += normal.sample(&mut rng);
        }
    }
    let output = TimeSeries::with_label(out, input.sample_rate_hz(), "output_v")?;
    RecordingPair::new(input.clone(), output, input_frequency_hz, replicate_id)
}

/// Layout of a synthetic corpus: every frequency gets `replicates`
/// recordings driven by a square wave.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub frequencies_hz: Vec<f64>,
    pub replicates: usize,
    pub template: ChannelSpec,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub amplitude_v: f64,
    /// Recording `i` (frequency-major order) is seeded with `seed_base + i`.
    pub seed_base: u64,
}

impl CorpusSpec {
    pub fn new(frequencies_hz: Vec<f64>, replicates: usize, template: ChannelSpec) -> Self {
        Self {
            frequencies_hz,
            replicates,
            template,
            duration_s: 2.0,
            sample_rate_hz: crate::DEFAULT_SAMPLE_RATE_HZ,
            amplitude_v: 5.0,
            seed_base: 0,
        }
    }
}

/// Replicate identifier such as `900hz_r03`.
pub fn replicate_id(frequency_hz: f64, replicate: usize) -> String {
    if frequency_hz.fract() == 0.0 {
        format!("{}hz_r{replicate:02}", frequency_hz as u64)
    } else {
        format!("{frequency_hz}hz_r{replicate:02}")
    }
}

/// Generates the corpus in frequency-major order. Cells are simulated in
/// parallel but each owns its seed, so the result does not depend on
/// scheduling.
pub fn make_corpus(spec: &CorpusSpec) -> Result<Vec<RecordingPair>> {
    if spec.frequencies_hz.is_empty() || spec.replicates == 0 {
        return Err(Error::InvalidArgument(
            "corpus needs frequencies and replicates".into(),
        ));
    }
    let stimuli: Vec<TimeSeries> = spec
        .frequencies_hz
        .iter()
        .map(|&f| {
            make_square_wave(&StimulusSpec {
                frequency_hz: f,
                amplitude_v: spec.amplitude_v,
                duration_s: spec.duration_s,
                sample_rate_hz: spec.sample_rate_hz,
            })
        })
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..spec.frequencies_hz.len())
        .flat_map(|fi| (0..spec.replicates).map(move |r| (fi, r)))
        .collect();
    cells
        .par_iter()
        .enumerate()
        .map(|(i, &(fi, r))| {
            let mut channel = spec.template.clone();
            channel.seed = spec.seed_base.wrapping_add(i as u64);
            let f = spec.frequencies_hz[fi];
            simulate_channel(&channel, &stimuli[fi], f, replicate_id(f, r))
        })
        .collect()
}
