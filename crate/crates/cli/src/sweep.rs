//! Parameter grids and sweeps.

use std::str::FromStr;

use qheat_core::{CycleKind, CycleReport, OperationMode};
use rayon::prelude::*;
use serde::Serialize;

use crate::scenario::{run_cycle, Param, Scenario};
use crate::{CliError, Result};

pub const MAX_POINTS: usize = 10_000_000;
pub const MAX_AXES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

/// `min:max:steps[:linear|log]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub scale: Scale,
}

impl Grid {
    pub fn linear(min: f64, max: f64, steps: usize) -> Self {
        Grid {
            min,
            max,
            steps,
            scale: Scale::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(CliError::usage("grid bounds must be finite"));
        }
        if self.steps < 1 {
            return Err(CliError::usage("grid needs at least one step"));
        }
        if self.min >= self.max {
            return Err(CliError::usage(format!("grid min {} is not below max {}", self.min, self.max)));
        }
        if self.scale == Scale::Log && self.min * self.max <= 0.0 {
            return Err(CliError::usage("log grid bounds must be nonzero and of one sign"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    return self.max;
                }
                let f = k as f64 / last;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * f,
                    Scale::Log => self.min * (self.max / self.min).powf(f),
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("`{s}`: expected min:max:steps[:linear|log]"));
        }
        let num = |x: &str| x.parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
        let scale = match parts.get(3) {
            None | Some(&"linear") => Scale::Linear,
            Some(&"log") => Scale::Log,
            Some(other) => return Err(format!("unknown scale `{other}` (linear|log)")),
        };
        Ok(Grid {
            min: num(parts[0])?,
            max: num(parts[1])?,
            steps: parts[2].parse().map_err(|e| format!("`{}`: {e}", parts[2]))?,
            scale,
        })
    }
}

/// `name:min:max:steps[:linear|log]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub grid: Grid,
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (name, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("`{s}`: expected name:min:max:steps[:scale]"))?;
        Ok(Axis {
            param: name.trim().parse()?,
            grid: rest.parse()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub cycle: CycleKind,
    pub base: Scenario,
    pub axes: Vec<Axis>,
    pub epsilon: Option<f64>,
}

impl SweepSpec {
    pub fn points(&self) -> usize {
        self.axes.iter().map(|a| a.grid.steps).product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.len() > MAX_AXES {
            return Err(CliError::usage(format!("at most {MAX_AXES} axes, got {}", self.axes.len())));
        }
        for (k, axis) in self.axes.iter().enumerate() {
            axis.grid.validate()?;
            if !self.base.uses(axis.param) {
                return Err(CliError::usage(format!("{} does not enter this model", axis.param)));
            }
            if self.axes[..k].iter().any(|a| a.param == axis.param) {
                return Err(CliError::usage(format!("{} swept twice", axis.param)));
            }
        }
        let total = self
            .axes
            .iter()
            .try_fold(1usize, |n, a| n.checked_mul(a.grid.steps))
            .filter(|n| *n <= MAX_POINTS);
        if total.is_none() {
            return Err(CliError::usage(format!("grid exceeds {MAX_POINTS} points")));
        }
        if let Some(eps) = self.epsilon {
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(CliError::usage("epsilon must be finite and non-negative"));
            }
        }
        // Every point shares the model shape, so the first one stands for all.
        let probe = self.scenario_at(&vec![0; self.axes.len()]);
        probe.model_a()?;
        probe.model_b()?;
        probe.baths()?;
        Ok(())
    }

    fn scenario_at(&self, coords: &[usize]) -> Scenario {
        let mut s = self.base.clone();
        for (axis, &k) in self.axes.iter().zip(coords) {
            s.set(axis.param, axis.grid.values()[k]);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub i: usize,
    pub j: Option<usize>,
    pub cycle: CycleKind,
    #[serde(rename = "J_a")]
    pub j_a: Option<f64>,
    #[serde(rename = "J_b")]
    pub j_b: Option<f64>,
    pub b_a: Option<f64>,
    pub b_b: Option<f64>,
    pub t_hot: Option<f64>,
    pub t_cold: Option<f64>,
    pub mode: Option<OperationMode>,
    pub w_net: Option<f64>,
    pub q_in: Option<f64>,
    pub q_out: Option<f64>,
    pub figure_of_merit: Option<f64>,
    pub efficiency: Option<f64>,
    pub first_law_residual: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn new(
        index: usize,
        coords: &[usize],
        cycle: CycleKind,
        scenario: &Scenario,
        outcome: Result<CycleReport>,
    ) -> Self {
        let param = |p: Param| scenario.uses(p).then(|| scenario.get(p)).flatten();
        let mut row = SweepRow {
            index,
            i: coords.first().copied().unwrap_or(0),
            j: coords.get(1).copied(),
            cycle,
            j_a: param(Param::JA),
            j_b: param(Param::JB),
            b_a: param(Param::BA),
            b_b: param(Param::BB),
            t_hot: scenario.t_hot,
            t_cold: scenario.t_cold,
            mode: None,
            w_net: None,
            q_in: None,
            q_out: None,
            figure_of_merit: None,
            efficiency: None,
            first_law_residual: None,
            error: None,
        };
        match outcome {
            Ok(r) => {
                row.mode = Some(r.mode);
                row.w_net = Some(r.w_net);
                row.q_in = Some(r.q_in);
                row.q_out = Some(r.q_out);
                row.figure_of_merit = r.figure_of_merit;
                row.efficiency = r.efficiency;
                row.first_law_residual = Some(r.first_law_residual);
            }
            Err(e) => row.error = Some(error_code(&e).to_string()),
        }
        row
    }
}

fn error_code(e: &CliError) -> &'static str {
    match e {
        CliError::Core(e) => e.code(),
        CliError::Usage(_) => "usage",
        CliError::Numerical(_) => "numerical",
        CliError::Io(_) => "io",
    }
}

/// Evaluates the grid in row-major order (first axis outermost) on a pool of
/// `jobs` workers. Row order never depends on the schedule.
pub fn run_sweep(spec: &SweepSpec, jobs: Option<usize>) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let values: Vec<Vec<f64>> = spec.axes.iter().map(|a| a.grid.values()).collect();
    let shape: Vec<usize> = values.iter().map(Vec::len).collect();
    let coords_of = |index: usize| -> Vec<usize> {
        let mut rest = index;
        let mut coords = vec![0; shape.len()];
        for (k, n) in shape.iter().enumerate().rev() {
            coords[k] = rest % n;
            rest /= n;
        }
        coords
    };
    let evaluate = |index: usize| -> SweepRow {
        let coords = coords_of(index);
        let mut scenario = spec.base.clone();
        for (k, axis) in spec.axes.iter().enumerate() {
            scenario.set(axis.param, values[k][coords[k]]);
        }
        let outcome = run_cycle(spec.cycle, &scenario, spec.epsilon);
        SweepRow::new(index, &coords, spec.cycle, &scenario, outcome)
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::usage("jobs must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Numerical(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..spec.points()).into_par_iter().map(evaluate).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values() {
        assert_eq!(Grid::linear(0.0, 1.0, 3).values(), vec![0.0, 0.5, 1.0]);
        let g: Grid = "1:100:3:log".parse().unwrap();
        let v = g.values();
        assert!((v[1] - 10.0).abs() < 1e-12 && v[2] == 100.0);
        let neg: Grid = "-42:-32:2:log".parse().unwrap();
        assert!(neg.validate().is_ok());
        assert!("-1:1:3:log".parse::<Grid>().unwrap().validate().is_err());
        assert!("1:0:3".parse::<Grid>().unwrap().validate().is_err());
        assert!("0:1:0".parse::<Grid>().unwrap().validate().is_err());
        assert!("0:1".parse::<Grid>().is_err());
        assert!("0:1:2:cubic".parse::<Grid>().is_err());
    }

    #[test]
    fn row_major_order() {
        let spec = SweepSpec {
            cycle: CycleKind::Stirling,
            base: Scenario::dimer(-42.0, -32.0, 40.0, 20.0),
            axes: vec!["t-hot:30:50:2".parse().unwrap(), "J-b:-30:-20:3".parse().unwrap()],
            epsilon: None,
        };
        let rows = run_sweep(&spec, Some(2)).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!((rows[4].i, rows[4].j), (1, Some(1)));
        assert_eq!(rows[4].t_hot, Some(50.0));
        assert_eq!(rows[4].j_b, Some(-25.0));
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = SweepSpec {
            cycle: CycleKind::Otto,
            base: Scenario::dimer(-42.0, -32.0, 40.0, 20.0),
            axes: vec!["t-hot:30:50:2".parse().unwrap(); 3],
            epsilon: None,
        };
        assert!(spec.validate().is_err());
        spec.axes.truncate(2);
        assert!(spec.validate().is_err());
        spec.axes = vec!["J-a:-50:-10:5000".parse().unwrap(), "J-b:-50:-10:5000".parse().unwrap()];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn point_errors_stay_in_row() {
        let spec = SweepSpec {
            cycle: CycleKind::Stirling,
            base: Scenario::dimer(-42.0, -32.0, 40.0, 20.0),
            axes: vec!["t-hot:10:30:3".parse().unwrap()],
            epsilon: None,
        };
        let rows = run_sweep(&spec, Some(1)).unwrap();
        assert_eq!(rows[0].error.as_deref(), Some("temperature-ordering"));
        assert_eq!(rows[1].error.as_deref(), Some("temperature-ordering"));
        assert!(rows[2].error.is_none());
    }
}
