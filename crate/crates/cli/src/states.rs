use std::f64::consts::{FRAC_PI_2, PI};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use kerr_qfi::StateRequest;

/// Defaults for auxiliary parameters not given inline in a state token.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxDefaults {
    pub z: f64,
    pub phi: f64,
    pub m: u32,
    pub delta: f64,
}

impl Default for AuxDefaults {
    fn default() -> Self {
        Self {
            z: 0.5,
            phi: 0.0,
            m: 1,
            delta: 0.0,
        }
    }
}

/// One entry of `--states`.
#[derive(Debug, Clone, PartialEq)]
pub enum StateChoice {
    Solved { label: String, request: StateRequest },
    /// Number-state reference curve, `n(n+1)(2n-1)/2` at real `n = N`.
    NumberState,
}

impl StateChoice {
    pub fn label(&self) -> &str {
        match self {
            StateChoice::Solved { label, .. } => label,
            StateChoice::NumberState => "ns",
        }
    }

    /// Parses tokens such as `svs`, `scs:z=0.3:phi=1.57`, `sn:m=2`, `cat:delta=3.14159`.
    pub fn parse(token: &str, defaults: &AuxDefaults) -> anyhow::Result<Self> {
        let mut parts = token.trim().split(':');
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        let mut aux = *defaults;
        let mut given = Vec::new();
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| anyhow!("expected key=value in state token {token:?}, got {part:?}"))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            match key.as_str() {
                "z" => aux.z = parse_num(value, token)?,
                "phi" => aux.phi = parse_num(value, token)?,
                "m" => aux.m = parse_num(value, token)?,
                "delta" => aux.delta = parse_num(value, token)?,
                _ => bail!("unknown parameter {key:?} in state token {token:?}"),
            }
            given.push(key);
        }

        let allowed: &[&str] = match name.as_str() {
            "scs" => &["z", "phi"],
            "sn" => &["m"],
            "cat" => &["delta"],
            _ => &[],
        };
        if let Some(extra) = given.iter().find(|k| !allowed.contains(&k.as_str())) {
            bail!("state {name:?} takes no parameter {extra:?}");
        }

        let request = match name.as_str() {
            "ns" => return Ok(StateChoice::NumberState),
            "ts" | "thermal" => StateRequest::Thermal,
            "cs" | "coherent" => StateRequest::Coherent,
            "svs" => StateRequest::SqueezedVacuum,
            "scs" => StateRequest::SqueezedCoherent { z: aux.z, phi: aux.phi },
            "sn" => StateRequest::SqueezedNumber { m: aux.m },
            "ecs" => StateRequest::Cat { delta: 0.0 },
            "ocs" => StateRequest::Cat { delta: PI },
            "yscs" => StateRequest::Cat { delta: FRAC_PI_2 },
            "cat" => StateRequest::Cat { delta: aux.delta },
            _ => bail!("unknown state {name:?}; expected one of ts, cs, svs, scs, sn, ecs, ocs, yscs, cat, ns"),
        };
        let label = if given.is_empty() { name } else { token.trim().to_ascii_lowercase() };
        Ok(StateChoice::Solved { label, request })
    }

    pub fn parse_list(list: &str, defaults: &AuxDefaults) -> anyhow::Result<Vec<Self>> {
        let choices = list
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| Self::parse(t, defaults))
            .collect::<anyhow::Result<Vec<_>>>()?;
        if choices.is_empty() {
            bail!("no states given");
        }
        Ok(choices)
    }

    pub fn is_odd_cat(&self) -> bool {
        matches!(self, StateChoice::Solved { request: StateRequest::Cat { delta }, .. } if (*delta - PI).abs() <= 1e-9)
    }
}

fn parse_num<T: FromStr>(value: &str, token: &str) -> anyhow::Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    value
        .parse()
        .with_context(|| format!("bad number {value:?} in state token {token:?}"))
}
