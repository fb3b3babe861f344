//! Model and bath parameters shared by every subcommand.

use std::fmt;
use std::str::FromStr;

use qheat_core::{
    build_spectrum, run_carnot_model, run_otto, run_stirling, Bond, CycleKind, CycleReport, ModelSpec,
};
use serde::Serialize;

use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelKind {
    Single,
    #[default]
    Dimer,
    Cluster,
    Levels,
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "single" => Ok(ModelKind::Single),
            "dimer" => Ok(ModelKind::Dimer),
            "cluster" => Ok(ModelKind::Cluster),
            "levels" => Ok(ModelKind::Levels),
            _ => Err(format!("unknown model `{s}` (single|dimer|cluster|levels)")),
        }
    }
}

pub fn parse_cycle(s: &str) -> std::result::Result<CycleKind, String> {
    match s {
        "carnot" => Ok(CycleKind::Carnot),
        "stirling" => Ok(CycleKind::Stirling),
        "otto" => Ok(CycleKind::Otto),
        _ => Err(format!("unknown cycle `{s}` (carnot|stirling|otto)")),
    }
}

/// Scalar parameters a sweep axis may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Param {
    #[serde(rename = "J-a")]
    JA,
    #[serde(rename = "J-b")]
    JB,
    #[serde(rename = "b-a")]
    BA,
    #[serde(rename = "b-b")]
    BB,
    #[serde(rename = "t-hot")]
    THot,
    #[serde(rename = "t-cold")]
    TCold,
}

impl Param {
    pub const ALL: [Param; 6] = [Param::JA, Param::JB, Param::BA, Param::BB, Param::THot, Param::TCold];

    pub fn name(self) -> &'static str {
        match self {
            Param::JA => "J-a",
            Param::JB => "J-b",
            Param::BA => "b-a",
            Param::BB => "b-b",
            Param::THot => "t-hot",
            Param::TCold => "t-cold",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Param::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown parameter `{s}` (J-a|J-b|b-a|b-b|t-hot|t-cold)"))
    }
}

/// `0-1,1-2,...`
pub fn parse_bonds(s: &str) -> std::result::Result<Vec<(usize, usize)>, String> {
    s.split(',')
        .map(|pair| {
            let (i, j) = pair
                .trim()
                .split_once('-')
                .ok_or_else(|| format!("bond `{pair}` is not of the form i-j"))?;
            let site = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bond `{pair}`: {e}"));
            Ok((site(i)?, site(j)?))
        })
        .collect()
}

pub fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
        .collect()
}

/// Two model states A and B plus the bath pair.
///
/// `J-b` and `b-b` default to their `A` counterparts, `b-a` to zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scenario {
    pub model: ModelKind,
    pub j_a: Option<f64>,
    pub j_b: Option<f64>,
    pub b_a: Option<f64>,
    pub b_b: Option<f64>,
    pub t_hot: Option<f64>,
    pub t_cold: Option<f64>,
    pub sites: Option<usize>,
    pub bonds: Option<Vec<(usize, usize)>>,
    pub periodic: bool,
    pub levels_a: Option<Vec<f64>>,
    pub levels_b: Option<Vec<f64>>,
}

impl Scenario {
    pub fn dimer(j_a: f64, j_b: f64, t_hot: f64, t_cold: f64) -> Self {
        Scenario {
            j_a: Some(j_a),
            j_b: Some(j_b),
            t_hot: Some(t_hot),
            t_cold: Some(t_cold),
            ..Default::default()
        }
    }

    pub fn get(&self, p: Param) -> Option<f64> {
        match p {
            Param::JA => self.j_a,
            Param::JB => self.j_b.or(self.j_a),
            Param::BA => Some(self.b_a.unwrap_or(0.0)),
            Param::BB => Some(self.b_b.or(self.b_a).unwrap_or(0.0)),
            Param::THot => self.t_hot,
            Param::TCold => self.t_cold,
        }
    }

    pub fn set(&mut self, p: Param, v: f64) {
        let slot = match p {
            Param::JA => &mut self.j_a,
            Param::JB => &mut self.j_b,
            Param::BA => &mut self.b_a,
            Param::BB => &mut self.b_b,
            Param::THot => &mut self.t_hot,
            Param::TCold => &mut self.t_cold,
        };
        *slot = Some(v);
    }

    /// Whether `p` enters the model built for this scenario.
    pub fn uses(&self, p: Param) -> bool {
        match p {
            Param::JA | Param::JB => matches!(self.model, ModelKind::Dimer | ModelKind::Cluster),
            Param::BA | Param::BB => self.model != ModelKind::Levels,
            Param::THot | Param::TCold => true,
        }
    }

    pub fn model_a(&self) -> Result<ModelSpec> {
        self.build(Param::JA, Param::BA, self.levels_a.as_ref())
    }

    pub fn model_b(&self) -> Result<ModelSpec> {
        self.build(Param::JB, Param::BB, self.levels_b.as_ref().or(self.levels_a.as_ref()))
    }

    /// Same scenario with a different coupling for A.
    pub fn model_with_coupling(&self, j: f64) -> Result<ModelSpec> {
        let mut s = self.clone();
        s.j_a = Some(j);
        s.model_a()
    }

    fn build(&self, j: Param, b: Param, levels: Option<&Vec<f64>>) -> Result<ModelSpec> {
        let coupling = || self.get(j).ok_or_else(|| CliError::usage(format!("missing {j}")));
        let field = self.get(b).unwrap_or(0.0);
        let model = match self.model {
            ModelKind::Single => ModelSpec::SingleSpin { field },
            ModelKind::Dimer => ModelSpec::dimer(coupling()?, field),
            ModelKind::Cluster => {
                let coupling = coupling()?;
                match &self.bonds {
                    Some(bonds) => {
                        let inferred = bonds.iter().map(|(i, j)| i.max(j) + 1).max().unwrap_or(1);
                        let n_sites = self.sites.unwrap_or(inferred);
                        ModelSpec::HeisenbergCluster {
                            n_sites,
                            bonds: bonds.iter().map(|&(i, j)| Bond::new(i, j, coupling)).collect(),
                            fields: vec![field; n_sites],
                        }
                    }
                    None => ModelSpec::chain(self.sites.unwrap_or(2), coupling, field, self.periodic),
                }
            }
            ModelKind::Levels => ModelSpec::levels(
                levels.cloned().ok_or_else(|| CliError::usage("missing levels-a"))?,
            ),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn baths(&self) -> Result<(f64, f64)> {
        let t_hot = self.t_hot.ok_or_else(|| CliError::usage("missing t-hot"))?;
        let t_cold = self.t_cold.ok_or_else(|| CliError::usage("missing t-cold"))?;
        Ok((t_hot, t_cold))
    }
}

/// Runs one cycle. Carnot closes inside the model family, so only zero-field
/// models (or explicit levels) have a solution.
pub fn run_cycle(kind: CycleKind, scenario: &Scenario, epsilon: Option<f64>) -> Result<CycleReport> {
    let (a, b) = (scenario.model_a()?, scenario.model_b()?);
    let (t_hot, t_cold) = scenario.baths()?;
    let report = match kind {
        CycleKind::Carnot => run_carnot_model(&a, &b, t_hot, t_cold)?,
        CycleKind::Stirling => run_stirling(&build_spectrum(&a)?, &build_spectrum(&b)?, t_hot, t_cold)?,
        CycleKind::Otto => run_otto(&build_spectrum(&a)?, &build_spectrum(&b)?, t_hot, t_cold)?,
    };
    Ok(match epsilon {
        Some(eps) => report.with_epsilon(eps),
        None => report,
    })
}

/// Short human label such as `dimer J=-32 b=0`.
pub fn describe(model: &ModelSpec) -> String {
    match model {
        ModelSpec::SingleSpin { field } => format!("single b={field}"),
        ModelSpec::HeisenbergDimer { coupling, field } => format!("dimer J={coupling} b={field}"),
        ModelSpec::HeisenbergCluster { n_sites, bonds, fields } => format!(
            "cluster N={n_sites} J={} b={}",
            bonds.first().map_or(0.0, |b| b.coupling),
            fields.first().copied().unwrap_or(0.0)
        ),
        ModelSpec::ExplicitLevels { levels } => format!("levels d={}", levels.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_model_a() {
        let s = Scenario {
            j_a: Some(-32.0),
            b_a: Some(2.0),
            ..Default::default()
        };
        assert_eq!(s.model_b().unwrap(), ModelSpec::dimer(-32.0, 2.0));
        assert!(Scenario::default().model_a().is_err());
    }

    #[test]
    fn cluster_from_bonds() {
        let s = Scenario {
            model: ModelKind::Cluster,
            j_a: Some(-10.0),
            bonds: Some(parse_bonds("0-1, 1-2").unwrap()),
            ..Default::default()
        };
        match s.model_a().unwrap() {
            ModelSpec::HeisenbergCluster { n_sites, bonds, .. } => {
                assert_eq!(n_sites, 3);
                assert_eq!(bonds.len(), 2);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_bonds("0-1,2").is_err());
    }

    #[test]
    fn params_round_trip() {
        for p in Param::ALL {
            assert_eq!(p.name().parse::<Param>().unwrap(), p);
        }
        assert!("J".parse::<Param>().is_err());
    }
}
