//! Diffusive (homodyne) stochastic Schrödinger trajectories.
//!
//! Euler–Maruyama integration of
//!
//!   d|ψ⟩ = [−iH_eff dt + Σ_k γ_k (⟨X_k⟩/2)(o_k − ⟨X_k⟩/4) dt
//!           + Σ_k √γ_k (o_k − ⟨X_k⟩/2) dW_k] |ψ⟩,
//!
//! with H_eff = H − (i/2)Σ_k γ_k o_k†o_k, X_k = o_k + o_k†, and independent
//! Wiener increments dW_k ~ Normal(0, dt). The scalar terms act as multiples
//! of the identity, exactly as the printed increment equations expand.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::collision::{sample_noise, NoiseSpec};
use crate::error::{Error, Result};
use crate::lindblad::LindbladModel;
use crate::math;
use crate::qops::{Operator, PureState, C64};
use crate::rng;
use crate::series::{ObservableSeries, Record};

const SSE_STREAM: u64 = 0x7373_6531;

/// Configuration for one trajectory (or an ensemble seeded from it).
#[derive(Debug, Clone)]
pub struct SseConfig {
    pub model: LindbladModel,
    pub dt: f64,
    pub n_steps: u64,
    pub seed: u64,
    /// Renormalize after every step (default on).
    pub renormalize: bool,
    /// Keep every k-th step in the trajectory record (step 0 always kept).
    pub record_every: u64,
    /// Optional piecewise-constant stochastic field resampled every `tau`,
    /// aligned with the collision grid.
    pub noise: Option<(NoiseSpec, f64)>,
    /// Global time of step 0; noise windows and recorded times are offset
    /// by this, so runs can be chained across quench segments.
    pub t_offset: f64,
    /// Extra salt mixed into the RNG stream derivation; chained segments
    /// use distinct salts so increments do not repeat.
    pub stream_salt: u64,
}

impl SseConfig {
    pub fn new(model: LindbladModel, dt: f64, n_steps: u64, seed: u64) -> Result<Self> {
        let cfg = Self {
            model,
            dt,
            n_steps,
            seed,
            renormalize: true,
            record_every: 1,
            noise: None,
            t_offset: 0.0,
            stream_salt: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Invalid("dt must be > 0".into()));
        }
        let gamma_max =
            self.model.jumps().iter().map(|(g, _)| *g).fold(0.0f64, f64::max);
        if self.dt * gamma_max > 1e-2 {
            return Err(Error::Invalid("dt * gamma_max must be <= 1e-2".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Invalid("record_every must be >= 1".into()));
        }
        if let Some((_, tau)) = &self.noise {
            if !(*tau > 0.0) {
                return Err(Error::Invalid("noise tau must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Precomputed pieces of the increment: H_eff and the jump channels.
struct Stepper {
    h_eff: Operator,
    channels: Vec<(f64, Operator, Operator)>, // (γ, o, X = o + o†)
}

impl Stepper {
    fn new(model: &LindbladModel, extra_h: Option<&Operator>) -> Self {
        let mut h = model.hamiltonian().clone();
        if let Some(add) = extra_h {
            h = &h + add;
        }
        let mut anti = Operator::zeros(model.dim());
        let mut channels = Vec::new();
        for (gamma, o) in model.jumps() {
            let od_o = o.dagger().matmul(o);
            anti = &anti + &od_o.scale(C64::new(*gamma / 2.0, 0.0));
            channels.push((*gamma, o.clone(), &o.clone() + &o.dagger()));
        }
        let h_eff = &h + &anti.scale(C64::new(0.0, -1.0));
        Self { h_eff, channels }
    }

    /// One Euler–Maruyama update with explicit increments `dw` (one per
    /// channel). Returns the un-normalized amplitudes.
    fn step_raw(&self, amps: &[C64], dt: f64, dw: &[f64]) -> Result<Vec<C64>> {
        debug_assert_eq!(dw.len(), self.channels.len());
        let dim = amps.len();
        let h_psi = self.h_eff.mul_vec(amps);
        let mut next: Vec<C64> = amps.to_vec();
        for i in 0..dim {
            next[i] += C64::new(0.0, -dt) * h_psi[i];
        }
        for (k, (gamma, o, x)) in self.channels.iter().enumerate() {
            let x_psi = x.mul_vec(amps);
            let x_exp: f64 = amps
                .iter()
                .zip(&x_psi)
                .map(|(a, b)| (a.conj() * b).re)
                .sum();
            let o_psi = o.mul_vec(amps);
            let drift = C64::new(gamma * x_exp / 2.0 * dt, 0.0);
            let drift_id = C64::new(x_exp / 4.0, 0.0);
            let diff = C64::new(math::sqrt(*gamma) * dw[k], 0.0);
            let diff_id = C64::new(x_exp / 2.0, 0.0);
            for i in 0..dim {
                next[i] += drift * (o_psi[i] - drift_id * amps[i]);
                next[i] += diff * (o_psi[i] - diff_id * amps[i]);
            }
        }
        for z in &next {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Numerical("sse step produced a non-finite amplitude"));
            }
        }
        Ok(next)
    }
}

/// A single Euler–Maruyama step with increments drawn from `rng`.
pub fn sse_step(
    psi: &PureState,
    model: &LindbladModel,
    dt: f64,
    renormalize: bool,
    rng: &mut ChaCha12Rng,
) -> Result<PureState> {
    let stepper = Stepper::new(model, None);
    let dw = draw_increments(rng, stepper.channels.len(), dt);
    finish_step(&stepper, psi.amplitudes(), dt, &dw, renormalize)
}

/// Deterministic variant with caller-supplied increments; exposed for
/// verification against the expanded component formulas.
pub fn sse_step_with_increments(
    psi: &PureState,
    model: &LindbladModel,
    dt: f64,
    dw: &[f64],
    renormalize: bool,
) -> Result<PureState> {
    let stepper = Stepper::new(model, None);
    if dw.len() != stepper.channels.len() {
        return Err(Error::DimensionMismatch {
            expected: stepper.channels.len(),
            got: dw.len(),
            context: "sse increments",
        });
    }
    finish_step(&stepper, psi.amplitudes(), dt, dw, renormalize)
}

fn finish_step(
    stepper: &Stepper,
    amps: &[C64],
    dt: f64,
    dw: &[f64],
    renormalize: bool,
) -> Result<PureState> {
    let raw = stepper.step_raw(amps, dt, dw)?;
    if renormalize {
        PureState::new(raw)
    } else {
        Ok(PureState::from_raw(raw))
    }
}

fn draw_increments(rng: &mut ChaCha12Rng, channels: usize, dt: f64) -> Vec<f64> {
    let scale = math::sqrt(dt);
    (0..channels)
        .map(|_| {
            let g: f64 = rng.sample(StandardNormal);
            g * scale
        })
        .collect()
}

/// One stochastic trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PureState>,
    /// ⟨X_k⟩ per recorded step, one inner entry per jump channel.
    pub measured_x: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Run one trajectory; deterministic for a fixed config (the RNG stream is
/// derived from `cfg.seed` and `traj_index`).
pub fn run_trajectory(cfg: &SseConfig, psi0: &PureState, traj_index: u64) -> Result<Trajectory> {
    cfg.validate()?;
    if psi0.dim() != cfg.model.dim() {
        return Err(Error::DimensionMismatch {
            expected: cfg.model.dim(),
            got: psi0.dim(),
            context: "run_trajectory psi0",
        });
    }
    let mut rng = rng::stream(cfg.seed, traj_index, SSE_STREAM ^ cfg.stream_salt);
    let mut stepper = Stepper::new(&cfg.model, None);
    let mut noise_window: Option<u64> = None;

    let mut amps: Vec<C64> = psi0.amplitudes().to_vec();
    let mut traj = Trajectory { times: Vec::new(), states: Vec::new(), measured_x: Vec::new() };
    let record = |traj: &mut Trajectory, stepper: &Stepper, amps: &[C64], t: f64| {
        let xs: Vec<f64> = stepper
            .channels
            .iter()
            .map(|(_, _, x)| {
                let x_psi = x.mul_vec(amps);
                amps.iter().zip(&x_psi).map(|(a, b)| (a.conj() * b).re).sum()
            })
            .collect();
        traj.times.push(t);
        traj.states.push(PureState::from_raw(amps.to_vec()));
        traj.measured_x.push(xs);
    };

    record(&mut traj, &stepper, &amps, cfg.t_offset);
    for step in 0..cfg.n_steps {
        let t = cfg.t_offset + step as f64 * cfg.dt;
        if let Some((spec, tau)) = &cfg.noise {
            let window = (t / tau) as u64;
            if noise_window != Some(window) {
                let sample = sample_noise(spec, window);
                let h_noise = crate::collision::noise_hamiltonian_of(&sample);
                stepper = Stepper::new(&cfg.model, Some(&h_noise));
                noise_window = Some(window);
            }
        }
        let dw = draw_increments(&mut rng, stepper.channels.len(), cfg.dt);
        amps = stepper.step_raw(&amps, cfg.dt, &dw)?;
        if cfg.renormalize {
            let norm = math::sqrt(amps.iter().map(|z| z.norm_sqr()).sum());
            if norm < 1e-14 {
                return Err(Error::Numerical("sse state norm collapsed"));
            }
            for z in &mut amps {
                *z /= norm;
            }
        }
        if (step + 1) % cfg.record_every == 0 {
            record(&mut traj, &stepper, &amps, cfg.t_offset + (step + 1) as f64 * cfg.dt);
        }
    }
    Ok(traj)
}

/// Ensemble mean and standard error of the requested observables, recorded
/// on the trajectory grid. With `n_traj = 1` the standard errors are
/// reported as 0.
pub fn ensemble_average(
    cfg: &SseConfig,
    psi0: &PureState,
    n_traj: u64,
    observables: &[(alloc::string::String, Operator)],
) -> Result<ObservableSeries> {
    if n_traj < 1 {
        return Err(Error::Invalid("n_traj must be >= 1".into()));
    }
    let mut labels = Vec::with_capacity(observables.len() * 2);
    for (l, _) in observables {
        labels.push(l.clone());
        let mut se = l.clone();
        se.push_str("_se");
        labels.push(se);
    }
    let mut series = ObservableSeries::new(labels);

    // Welford accumulation per (record, observable).
    let mut times: Vec<f64> = Vec::new();
    let mut means: Vec<Vec<f64>> = Vec::new();
    let mut m2s: Vec<Vec<f64>> = Vec::new();

    for traj_idx in 0..n_traj {
        let traj = run_trajectory(cfg, psi0, traj_idx)?;
        if traj_idx == 0 {
            times = traj.times.clone();
            means = vec![vec![0.0; observables.len()]; times.len()];
            m2s = vec![vec![0.0; observables.len()]; times.len()];
        }
        for (rec, state) in traj.states.iter().enumerate() {
            for (obs_idx, (_, op)) in observables.iter().enumerate() {
                let v = state.expectation(op).re;
                let count = traj_idx as f64 + 1.0;
                let delta = v - means[rec][obs_idx];
                means[rec][obs_idx] += delta / count;
                let delta2 = v - means[rec][obs_idx];
                m2s[rec][obs_idx] += delta * delta2;
            }
        }
    }

    for (rec, &t) in times.iter().enumerate() {
        let mut values = Vec::with_capacity(observables.len() * 2);
        for obs_idx in 0..observables.len() {
            let mean = means[rec][obs_idx];
            let se = if n_traj > 1 {
                let var = m2s[rec][obs_idx] / (n_traj as f64 - 1.0);
                math::sqrt(var / n_traj as f64)
            } else {
                0.0
            };
            values.push(mean);
            values.push(se);
        }
        series.push(Record {
            n: rec as u64,
            t,
            values,
            phase: alloc::string::String::new(),
        })?;
    }
    Ok(series)
}
