use std::io::Write;

use anyhow::bail;
use kerr_qfi::states::distribution_to_cutoff;
use kerr_qfi::{build_distribution, solve_params, PhotonDistribution, TruncationPolicy};
use serde::{Deserialize, Serialize};

use crate::output::{self, Format};
use crate::states::StateChoice;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistRow {
    pub n: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistReport {
    pub state: String,
    #[serde(rename = "N")]
    pub n: f64,
    pub rows: Vec<DistRow>,
    pub captured_mass: f64,
}

/// Photon-number distribution of `choice` at mean photon number `mean`, up to
/// `cutoff` if given, otherwise to wherever `policy` stops the QFI series.
pub fn run(
    choice: &StateChoice,
    mean: f64,
    cutoff: Option<usize>,
    policy: &TruncationPolicy,
) -> anyhow::Result<DistReport> {
    let dist = match choice {
        StateChoice::NumberState => {
            if !(mean >= 0.0 && mean.fract() == 0.0) {
                bail!("a number state needs an integer photon number, got {mean}");
            }
            let n = mean as usize;
            let mut probabilities = vec![0.0; cutoff.unwrap_or(n).max(n) + 1];
            probabilities[n] = 1.0;
            if let Some(c) = cutoff {
                probabilities.truncate(c + 1);
            }
            PhotonDistribution::from_probabilities(probabilities)?
        }
        StateChoice::Solved { request, .. } => {
            let spec = solve_params(*request, mean)?;
            match cutoff {
                Some(c) => distribution_to_cutoff(&spec, c)?,
                None => build_distribution(&spec, policy)?,
            }
        }
    };
    Ok(DistReport {
        state: choice.label().to_string(),
        n: mean,
        rows: dist
            .probabilities
            .iter()
            .enumerate()
            .map(|(n, &p)| DistRow { n, p })
            .collect(),
        captured_mass: dist.captured_mass,
    })
}

/// CSV: `n,p` rows followed by a `captured_mass,<value>` footer line.
pub fn write(out: &mut dyn Write, report: &DistReport, format: Format) -> anyhow::Result<()> {
    match format {
        Format::Csv => {
            output::write_csv(out, &report.rows)?;
            let mut footer = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out);
            footer.write_record(["captured_mass", &report.captured_mass.to_string()])?;
            footer.flush()?;
            Ok(())
        }
        Format::Json => output::write_json(out, report),
    }
}
