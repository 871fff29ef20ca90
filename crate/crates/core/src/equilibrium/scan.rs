use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{attacker_lower_uniform, GameConfig};

const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanSign {
    Pos,
    Zero,
    Neg,
}

impl ScanSign {
    pub fn as_str(self) -> &'static str {
        match self {
            ScanSign::Pos => "pos",
            ScanSign::Zero => "zero",
            ScanSign::Neg => "neg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub delta: f64,
    pub rounds: f64,
    pub sign: ScanSign,
    pub value: f64,
}

/// Signs of the attacker's lower-bound payoff over a (delta, rounds) grid,
/// with every defender protecting at the same extent. Cells are emitted
/// row-major: the delta grid is the outer loop.
pub fn region_scan(
    cfg: &GameConfig,
    delta_grid: &[f64],
    rounds_grid: &[f64],
) -> Result<Vec<ScanCell>> {
    for &d in delta_grid {
        if !(0.0..=cfg.d).contains(&d) {
            return Err(Error::Domain(format!("scan delta {d} outside [0, {}]", cfg.d)));
        }
    }
    for &r in rounds_grid {
        if !(0.0..=cfg.round_cap as f64).contains(&r) {
            return Err(Error::Domain(format!(
                "scan rounds {r} outside [0, {}]",
                cfg.round_cap
            )));
        }
    }
    let rows: Vec<Vec<ScanCell>> = delta_grid
        .par_iter()
        .map(|&delta| {
            rounds_grid
                .iter()
                .map(|&rounds| {
                    let value = attacker_lower_uniform(cfg, delta, rounds);
                    let sign = if value.abs() < ZERO_TOL {
                        ScanSign::Zero
                    } else if value > 0.0 {
                        ScanSign::Pos
                    } else {
                        ScanSign::Neg
                    };
                    ScanCell { delta, rounds, sign, value }
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Uniform grid of `steps` points spanning [0, hi] inclusive. Values are
/// clamped so rounding cannot push the last point past `hi`.
pub fn linspace(hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![0.0];
    }
    (0..steps)
        .map(|i| (hi * i as f64 / (steps - 1) as f64).min(hi))
        .collect()
}

/// CSV emission: header `delta,rounds,sign,value`, payoff values with nine
/// significant digits.
pub fn scan_csv(cells: &[ScanCell]) -> String {
    let mut out = String::with_capacity(cells.len() * 32 + 32);
    out.push_str("delta,rounds,sign,value\n");
    for cell in cells {
        out.push_str(&format!(
            "{},{},{},{:.8e}\n",
            cell.delta,
            cell.rounds,
            cell.sign.as_str(),
            cell.value
        ));
    }
    out
}
