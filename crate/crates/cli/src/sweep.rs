use std::io::Write;

use anyhow::bail;
use kerr_qfi::qfi::number_state_qfi_continuous;
use kerr_qfi::{protocol_qfi, solve_params, TruncationPolicy};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::output::{self, Format};
use crate::states::StateChoice;

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub states: Vec<StateChoice>,
    pub n_min: f64,
    pub n_max: f64,
    pub n_steps: usize,
    pub policy: TruncationPolicy,
}

impl SweepConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.n_min > 0.0 && self.n_min <= self.n_max && self.n_max.is_finite()) {
            bail!("need 0 < n-min <= n-max, got {} and {}", self.n_min, self.n_max);
        }
        if self.n_steps == 0 {
            bail!("n-steps must be at least 1");
        }
        if self.n_min < 1.0 && self.states.iter().any(StateChoice::is_odd_cat) {
            bail!("odd cat states need n-min >= 1");
        }
        self.policy.validate()?;
        Ok(())
    }

    /// `n_steps` evenly spaced points from `n_min` to `n_max` inclusive.
    pub fn grid(&self) -> Vec<f64> {
        if self.n_steps == 1 {
            return vec![self.n_min];
        }
        let step = (self.n_max - self.n_min) / (self.n_steps - 1) as f64;
        (0..self.n_steps)
            .map(|i| {
                if i + 1 == self.n_steps {
                    self.n_max
                } else {
                    self.n_min + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: f64,
    pub family: String,
    pub n_th: Option<f64>,
    pub alpha_mag: Option<f64>,
    pub alpha_phase: Option<f64>,
    pub r: Option<f64>,
    pub m: Option<u32>,
    pub delta: Option<f64>,
    pub qfi: Option<f64>,
    pub sensitivity: Option<f64>,
    pub cutoff: Option<usize>,
    pub fidelity: Option<f64>,
    pub converged: Option<bool>,
    pub error: Option<String>,
}

impl SweepRow {
    fn empty(n: f64, family: &str) -> Self {
        Self {
            n,
            family: family.to_string(),
            n_th: None,
            alpha_mag: None,
            alpha_phase: None,
            r: None,
            m: None,
            delta: None,
            qfi: None,
            sensitivity: None,
            cutoff: None,
            fidelity: None,
            converged: None,
            error: None,
        }
    }
}

fn compute_row(n: f64, choice: &StateChoice, policy: &TruncationPolicy) -> SweepRow {
    let mut row = SweepRow::empty(n, choice.label());
    let request = match choice {
        StateChoice::NumberState => {
            let qfi = number_state_qfi_continuous(n);
            row.qfi = Some(qfi);
            row.sensitivity = Some(1.0 / qfi.sqrt());
            return row;
        }
        StateChoice::Solved { request, .. } => *request,
    };
    let spec = match solve_params(request, n) {
        Ok(spec) => spec,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.n_th = Some(spec.n_th);
    row.alpha_mag = Some(spec.alpha_mag);
    row.alpha_phase = Some(spec.alpha_phase);
    row.r = Some(spec.r);
    row.m = Some(spec.m);
    row.delta = Some(spec.delta);
    match protocol_qfi(&spec, policy) {
        Ok(result) => {
            row.qfi = Some(result.qfi);
            row.sensitivity = Some(result.sensitivity);
            row.cutoff = Some(result.cutoff);
            row.fidelity = Some(result.fidelity);
            row.converged = Some(result.converged);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Rows ordered by grid point, then by the order states were given.
pub fn run(config: &SweepConfig) -> anyhow::Result<Vec<SweepRow>> {
    config.validate()?;
    let tasks: Vec<(f64, &StateChoice)> = config
        .grid()
        .into_iter()
        .flat_map(|n| config.states.iter().map(move |s| (n, s)))
        .collect();
    Ok(tasks
        .par_iter()
        .map(|(n, choice)| compute_row(*n, choice, &config.policy))
        .collect())
}

pub fn write(out: &mut dyn Write, rows: &[SweepRow], format: Format) -> anyhow::Result<()> {
    match format {
        Format::Csv => output::write_csv(out, rows),
        Format::Json => output::write_json(out, rows),
    }
}
