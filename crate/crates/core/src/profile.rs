//! Initial-data profiles sampled at cell centers.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Anything that can be sampled at a position.
pub trait Profile {
    fn at(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64> Profile for F {
    fn at(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Profile description as it appears in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileConfig {
    Constant { value: f64 },
    /// `left` for x < x0, `right` otherwise.
    Riemann { left: f64, right: f64, x0: f64 },
    /// mean + amp·sin(2π·freq·x)
    Sine { mean: f64, amp: f64, freq: f64 },
    /// Piecewise-linear interpolation of column `column` against column `x`
    /// of a CSV file (relative paths resolve against the scenario file).
    Table { path: PathBuf, column: String },
    /// `inside` on [a, b), `outside` elsewhere.
    Box { a: f64, b: f64, inside: f64, outside: f64 },
}

/// A profile ready to be sampled (tables already loaded).
#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    Constant(f64),
    Riemann { left: f64, right: f64, x0: f64 },
    Sine { mean: f64, amp: f64, freq: f64 },
    Tabulated { xs: Vec<f64>, values: Vec<f64> },
    Box { a: f64, b: f64, inside: f64, outside: f64 },
}

impl ProfileConfig {
    pub fn resolve(&self, base_dir: &Path) -> Result<InitialProfile> {
        Ok(match self {
            ProfileConfig::Constant { value } => InitialProfile::Constant(*value),
            ProfileConfig::Riemann { left, right, x0 } => InitialProfile::Riemann {
                left: *left,
                right: *right,
                x0: *x0,
            },
            ProfileConfig::Sine { mean, amp, freq } => InitialProfile::Sine {
                mean: *mean,
                amp: *amp,
                freq: *freq,
            },
            ProfileConfig::Box { a, b, inside, outside } => InitialProfile::Box {
                a: *a,
                b: *b,
                inside: *inside,
                outside: *outside,
            },
            ProfileConfig::Table { path, column } => {
                let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                load_table(&full, column)?
            }
        })
    }

    /// Value when the profile is spatially constant.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            ProfileConfig::Constant { value } => Some(*value),
            ProfileConfig::Riemann { left, right, .. } if left == right => Some(*left),
            ProfileConfig::Sine { mean, amp, .. } if *amp == 0.0 => Some(*mean),
            ProfileConfig::Box { inside, outside, .. } if inside == outside => Some(*inside),
            _ => None,
        }
    }
}

fn load_table(path: &Path, column: &str) -> Result<InitialProfile> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Input(format!("{}: missing column '{name}'", path.display())))
    };
    let ix = find("x")?;
    let iv = find(column)?;
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let parse = |k: usize| {
            record[k]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Input(format!("{}: bad number '{}': {e}", path.display(), &record[k])))
        };
        xs.push(parse(ix)?);
        values.push(parse(iv)?);
    }
    if xs.is_empty() {
        return Err(Error::Input(format!("{}: table has no rows", path.display())));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input(format!("{}: x column must be strictly increasing", path.display())));
    }
    Ok(InitialProfile::Tabulated { xs, values })
}

impl Profile for InitialProfile {
    fn at(&self, x: f64) -> f64 {
        match self {
            InitialProfile::Constant(v) => *v,
            InitialProfile::Riemann { left, right, x0 } => {
                if x < *x0 {
                    *left
                } else {
                    *right
                }
            }
            InitialProfile::Sine { mean, amp, freq } => mean + amp * (2.0 * PI * freq * x).sin(),
            InitialProfile::Box { a, b, inside, outside } => {
                if x >= *a && x < *b {
                    *inside
                } else {
                    *outside
                }
            }
            InitialProfile::Tabulated { xs, values } => {
                if x <= xs[0] {
                    return values[0];
                }
                let n = xs.len();
                if x >= xs[n - 1] {
                    return values[n - 1];
                }
                let k = xs.partition_point(|&xi| xi <= x);
                let (x0, x1) = (xs[k - 1], xs[k]);
                let (v0, v1) = (values[k - 1], values[k]);
                v0 + (v1 - v0) * (x - x0) / (x1 - x0)
            }
        }
    }
}
