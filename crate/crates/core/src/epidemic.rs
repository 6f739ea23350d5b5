//! SIR epidemic model with distancing-awareness terms.
//!
//! The susceptible-to-infected transition rate `beta * S * I / N` is scaled
//! by an awareness factor `a` in [0, 1]: long-term awareness decays with the
//! cumulative affected fraction, `a = (1 - (I + R)/N)^k`, short-term
//! awareness with the currently infected fraction, `a = (1 - I/N)^k`. Higher
//! `k` means a population more sensitive to disease prevalence, which lowers
//! and delays the infection peak.
//!
//! Trajectories come from a fixed-step classical Runge-Kutta (RK4)
//! integrator with conservation of S + I + R monitored by the test suite.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EpidemicError {
    #[error("invalid parameters: beta must be non-negative, delta positive, population positive, k non-negative (beta={beta}, delta={delta}, population={population}, k={k})")]
    InvalidParams {
        beta: f64,
        delta: f64,
        population: f64,
        k: f64,
    },
    #[error("invalid initial state: compartments must be non-negative and finite (S={susceptible}, I={infected}, R={recovered})")]
    InvalidState {
        susceptible: f64,
        infected: f64,
        recovered: f64,
    },
    #[error("step size must be positive and step count at least 1 (dt={dt}, steps={steps})")]
    InvalidStep { dt: f64, steps: usize },
    #[error("integration became unstable at t={time} (S={susceptible}, I={infected}, R={recovered}); use a smaller dt")]
    Unstable {
        time: f64,
        susceptible: f64,
        infected: f64,
        recovered: f64,
    },
}

/// Which awareness factor scales the infection term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AwarenessMode {
    /// No behavioral response: a = 1.
    None,
    /// Response to the cumulative affected fraction (I + R)/N.
    LongTerm,
    /// Response to the currently infected fraction I/N.
    ShortTerm,
}

/// Population compartments at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpidemicState {
    pub susceptible: f64,
    pub infected: f64,
    pub recovered: f64,
    pub time: f64,
}

impl EpidemicState {
    pub fn population(&self) -> f64 {
        self.susceptible + self.infected + self.recovered
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpidemicParams {
    /// Infection rate beta (1/time).
    pub infection_rate: f64,
    /// Recovery rate delta (1/time).
    pub recovery_rate: f64,
    /// Total population N.
    pub population: f64,
    /// Awareness behavior exponent k >= 0; 0 disables the response.
    pub awareness_exponent: f64,
    pub awareness: AwarenessMode,
    /// Compatibility switch: use the self-quadratic infected gain
    /// `beta * I * (I/N) * a` instead of the susceptible-depletion form.
    /// The self-quadratic form does not conserve S + I + R; it exists only
    /// for comparison runs and is excluded from conservation guarantees.
    pub quadratic_infected_gain: bool,
}

impl EpidemicParams {
    pub fn new(
        infection_rate: f64,
        recovery_rate: f64,
        population: f64,
        awareness_exponent: f64,
        awareness: AwarenessMode,
    ) -> Result<Self, EpidemicError> {
        let params = Self {
            infection_rate,
            recovery_rate,
            population,
            awareness_exponent,
            awareness,
            quadratic_infected_gain: false,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), EpidemicError> {
        // beta = 0 is allowed: it isolates the recovery dynamics
        let ok = self.infection_rate >= 0.0
            && self.infection_rate.is_finite()
            && self.recovery_rate > 0.0
            && self.recovery_rate.is_finite()
            && self.population > 0.0
            && self.population.is_finite()
            && self.awareness_exponent >= 0.0
            && self.awareness_exponent.is_finite();
        if ok {
            Ok(())
        } else {
            Err(EpidemicError::InvalidParams {
                beta: self.infection_rate,
                delta: self.recovery_rate,
                population: self.population,
                k: self.awareness_exponent,
            })
        }
    }
}

/// Awareness factor in [0, 1] for the given state.
pub fn awareness(state: &EpidemicState, params: &EpidemicParams) -> f64 {
    let base = match params.awareness {
        AwarenessMode::None => return 1.0,
        AwarenessMode::LongTerm => 1.0 - (state.infected + state.recovered) / params.population,
        AwarenessMode::ShortTerm => 1.0 - state.infected / params.population,
    };
    base.clamp(0.0, 1.0).powf(params.awareness_exponent)
}

/// Time derivatives (dS, dI, dR).
///
/// The default infected gain mirrors the susceptible loss, so
/// `(dS + dR) + dI == 0` holds exactly in floating point.
pub fn derivative(state: &EpidemicState, params: &EpidemicParams) -> (f64, f64, f64) {
    let a = awareness(state, params);
    let infection =
        params.infection_rate * state.susceptible * (state.infected / params.population) * a;
    let recovery = params.recovery_rate * state.infected;
    let gain = if params.quadratic_infected_gain {
        params.infection_rate * state.infected * (state.infected / params.population) * a
    } else {
        infection
    };
    (-infection, gain - recovery, recovery)
}

/// Fixed-step RK4 trajectory of `steps` steps from `initial`; the returned
/// vector holds `steps + 1` states including the initial one.
///
/// Fails fast if any compartment drops below -1e-9, which indicates the step
/// size is too large for the chosen rates.
pub fn integrate(
    initial: &EpidemicState,
    params: &EpidemicParams,
    dt: f64,
    steps: usize,
) -> Result<Vec<EpidemicState>, EpidemicError> {
    params.validate()?;
    if !(dt > 0.0 && dt.is_finite()) || steps == 0 {
        return Err(EpidemicError::InvalidStep { dt, steps });
    }
    let state_ok = initial.susceptible >= 0.0
        && initial.infected >= 0.0
        && initial.recovered >= 0.0
        && initial.population().is_finite();
    if !state_ok {
        return Err(EpidemicError::InvalidState {
            susceptible: initial.susceptible,
            infected: initial.infected,
            recovered: initial.recovered,
        });
    }

    let f = |s: f64, i: f64, r: f64| {
        derivative(
            &EpidemicState {
                susceptible: s,
                infected: i,
                recovered: r,
                time: 0.0, // derivatives are autonomous in time
            },
            params,
        )
    };

    let mut trajectory = Vec::with_capacity(steps + 1);
    trajectory.push(*initial);
    let (mut s, mut i, mut r) = (initial.susceptible, initial.infected, initial.recovered);

    for step in 1..=steps {
        let k1 = f(s, i, r);
        let k2 = f(
            s + 0.5 * dt * k1.0,
            i + 0.5 * dt * k1.1,
            r + 0.5 * dt * k1.2,
        );
        let k3 = f(
            s + 0.5 * dt * k2.0,
            i + 0.5 * dt * k2.1,
            r + 0.5 * dt * k2.2,
        );
        let k4 = f(s + dt * k3.0, i + dt * k3.1, r + dt * k3.2);

        s += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        i += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        r += dt / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2);
        let time = initial.time + step as f64 * dt;

        if s < -1e-9 || i < -1e-9 || r < -1e-9 {
            return Err(EpidemicError::Unstable {
                time,
                susceptible: s,
                infected: i,
                recovered: r,
            });
        }

        trajectory.push(EpidemicState {
            susceptible: s,
            infected: i,
            recovered: r,
            time,
        });
    }
    Ok(trajectory)
}

/// Maximum infected count and the first time it is attained; `None` for an
/// empty trajectory.
pub fn peak_infected(trajectory: &[EpidemicState]) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for state in trajectory {
        match best {
            Some((peak, _)) if state.infected <= peak => {}
            _ => best = Some((state.infected, state.time)),
        }
    }
    best
}
