//! Classical-model multi-machine swing-equation simulator that produces
//! labeled transient stability datasets.
//!
//! Each machine obeys `M dω/dt = Pm - Pe - D ω`, `dδ/dt = ω` with
//! `Pe_i = Σ_j E_i E_j (G_ij cos δ_ij + B_ij sin δ_ij)` over a reduced
//! admittance matrix that switches at fault inception and clearing.

use std::f64::consts::TAU;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::seed;

const NEWTON_MAX_ITER: usize = 200;
const NEWTON_TOL: f64 = 1e-12;
const MAX_REDRAWS: usize = 20;
const BUNDLED: &str = include_str!("../fixtures/three_machine.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MachineParams {
    /// Inertia coefficient.
    pub m: f64,
    /// Damping coefficient.
    pub d: f64,
    /// Internal EMF magnitude.
    pub e: f64,
    /// Mechanical power.
    pub pm: f64,
}

/// Reduced conductance and susceptance matrices of one network phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admittance {
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
}

impl Admittance {
    fn validate(&self, n: usize, phase: &str) -> Result<()> {
        for (name, m) in [("G", &self.g), ("B", &self.b)] {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidConfig(format!("{phase}.{name} must be {n}x{n}")));
            }
            if m.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("network matrix"));
            }
            for (i, row) in m.iter().enumerate() {
                for (j, v) in row.iter().enumerate().take(i) {
                    if (v - m[j][i]).abs() > 1e-12 {
                        return Err(Error::InvalidConfig(format!("{phase}.{name} is not symmetric")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedNetwork {
    pub prefault: Admittance,
    pub fault_on: Admittance,
    /// Defaults to the prefault network (successful reclosure).
    pub postfault: Admittance,
}

impl ReducedNetwork {
    pub fn validate(&self, n: usize) -> Result<()> {
        self.prefault.validate(n, "prefault")?;
        self.fault_on.validate(n, "fault_on")?;
        self.postfault.validate(n, "postfault")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineArrays {
    #[serde(rename = "M")]
    m: Vec<f64>,
    #[serde(rename = "D")]
    d: Vec<f64>,
    #[serde(rename = "E")]
    e: Vec<f64>,
    #[serde(rename = "Pm")]
    pm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(Admittance),
    Many(Vec<Admittance>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    prefault: Admittance,
    /// One fault-on network, or a list of alternative fault locations.
    fault_on: OneOrMany,
    #[serde(default)]
    postfault: Option<Admittance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureFile {
    machines: MachineArrays,
    networks: NetworkFile,
}

/// Machines plus one network per fault location, as read from a fixture
/// JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FixtureFile", into = "FixtureFile")]
pub struct Fixture {
    pub machines: Vec<MachineParams>,
    /// Never empty; all entries share the prefault and postfault phases.
    pub contingencies: Vec<ReducedNetwork>,
}

impl TryFrom<FixtureFile> for Fixture {
    type Error = Error;

    fn try_from(f: FixtureFile) -> Result<Fixture> {
        let a = f.machines;
        let n = a.m.len();
        if n < 2 || a.d.len() != n || a.e.len() != n || a.pm.len() != n {
            return Err(Error::InvalidConfig(
                "machines.M, D, E and Pm must have the same length >= 2".into(),
            ));
        }
        let machines = (0..n)
            .map(|i| MachineParams {
                m: a.m[i],
                d: a.d[i],
                e: a.e[i],
                pm: a.pm[i],
            })
            .collect();
        let postfault = f.networks.postfault.unwrap_or_else(|| f.networks.prefault.clone());
        let faults = match f.networks.fault_on {
            OneOrMany::One(a) => vec![a],
            OneOrMany::Many(v) => v,
        };
        let contingencies = faults
            .into_iter()
            .map(|fault_on| ReducedNetwork {
                prefault: f.networks.prefault.clone(),
                fault_on,
                postfault: postfault.clone(),
            })
            .collect();
        let fx = Fixture { machines, contingencies };
        fx.validate()?;
        Ok(fx)
    }
}

impl From<Fixture> for FixtureFile {
    fn from(f: Fixture) -> FixtureFile {
        let col = |g: fn(&MachineParams) -> f64| f.machines.iter().map(g).collect();
        let first = &f.contingencies[0];
        FixtureFile {
            machines: MachineArrays {
                m: col(|m| m.m),
                d: col(|m| m.d),
                e: col(|m| m.e),
                pm: col(|m| m.pm),
            },
            networks: NetworkFile {
                prefault: first.prefault.clone(),
                fault_on: OneOrMany::Many(f.contingencies.iter().map(|c| c.fault_on.clone()).collect()),
                postfault: Some(first.postfault.clone()),
            },
        }
    }
}

impl Fixture {
    /// The bundled three-machine case.
    pub fn bundled() -> Fixture {
        Fixture::from_json(BUNDLED).expect("bundled fixture is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Fixture> {
        Fixture::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_json(text: &str) -> Result<Fixture> {
        let f: FixtureFile = serde_json::from_str(text)?;
        Fixture::try_from(f)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, m) in self.machines.iter().enumerate() {
            let ok = m.m > 0.0 && m.d >= 0.0 && m.e > 0.0 && m.pm.is_finite();
            if !ok {
                return Err(Error::InvalidConfig(format!(
                    "machine {} needs M > 0, D >= 0, E > 0 and finite Pm",
                    i + 1
                )));
            }
        }
        if self.contingencies.is_empty() {
            return Err(Error::InvalidConfig("fixture needs at least one fault_on network".into()));
        }
        self.contingencies
            .iter()
            .try_for_each(|c| c.validate(self.machines.len()))
    }

    /// The first fault location.
    pub fn network(&self) -> &ReducedNetwork {
        &self.contingencies[0]
    }
}

/// Timing of one fault case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Fault inception time.
    pub t0: f64,
    /// Fault clearing time.
    pub tcl: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Nominal cycle length used for the feature instants.
    pub cycle: f64,
    /// Scales every `Pm` by `s` and every `E` by `sqrt(s)`.
    pub load_scale: f64,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            t0: 0.1,
            tcl: 0.2,
            t_end: 3.0,
            dt: 1e-3,
            cycle: 0.02,
            load_scale: 1.0,
            seed: 0,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dt > 0.0
            && self.cycle > 0.0
            && self.load_scale > 0.0
            && 0.0 <= self.t0
            && self.t0 <= self.tcl
            && self.tcl <= self.t_end;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "scenario needs dt, cycle, load_scale > 0 and 0 <= t0 <= tcl <= t_end".into(),
            ))
        }
    }

    fn index(&self, t: f64) -> usize {
        (t / self.dt).round() as usize
    }
}

/// Machines after applying the scenario's load scale.
pub fn scale_machines(machines: &[MachineParams], load_scale: f64) -> Vec<MachineParams> {
    let k = load_scale.sqrt();
    machines
        .iter()
        .map(|m| MachineParams {
            pm: m.pm * load_scale,
            e: m.e * k,
            ..*m
        })
        .collect()
}

/// Rotor angles and speed deviations on a uniform grid, indexed `[step][machine]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub delta: Vec<Vec<f64>>,
    pub omega: Vec<Vec<f64>>,
    /// Inertia coefficients, for the centre-of-inertia series.
    pub inertia: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    fn weighted(&self, v: &[f64]) -> f64 {
        let total: f64 = self.inertia.iter().sum();
        v.iter().zip(&self.inertia).map(|(x, m)| x * m).sum::<f64>() / total
    }

    pub fn coi_angle(&self, k: usize) -> f64 {
        self.weighted(&self.delta[k])
    }

    pub fn coi_speed(&self, k: usize) -> f64 {
        self.weighted(&self.omega[k])
    }

    pub fn max_pairwise_difference(&self, k: usize) -> f64 {
        let d = &self.delta[k];
        let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

fn electrical_power(mac: &[MachineParams], y: &Admittance, delta: &[f64], out: &mut [f64]) {
    for (i, p) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for j in 0..mac.len() {
            let dij = delta[i] - delta[j];
            s += mac[j].e * (y.g[i][j] * dij.cos() + y.b[i][j] * dij.sin());
        }
        *p = mac[i].e * s;
    }
}

/// Electrical power of every machine at angles `delta`.
pub fn power_injections(machines: &[MachineParams], y: &Admittance, delta: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; machines.len()];
    electrical_power(machines, y, delta, &mut out);
    out
}

/// Prefault equilibrium angles with machine 1 as reference and slack.
///
/// Solves `Pe_i(δ) = Pm_i` for machines 2..n by damped Newton iteration with
/// `δ_1 = 0`; the returned machines have `Pm_1` set to `Pe_1` so the state is
/// an exact equilibrium.
pub fn equilibrium(machines: &[MachineParams], y: &Admittance) -> Result<(Vec<MachineParams>, Vec<f64>)> {
    let n = machines.len();
    let mut delta = vec![0.0; n];
    let mismatch = |d: &[f64]| -> Vec<f64> {
        let pe = power_injections(machines, y, d);
        (1..n).map(|i| machines[i].pm - pe[i]).collect()
    };
    let norm = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut f = mismatch(&delta);
    let mut converged = norm(&f) < NEWTON_TOL;
    let mut it = 0;
    while !converged && it < NEWTON_MAX_ITER {
        it += 1;
        let mut jac = DMatrix::zeros(n - 1, n - 1);
        for i in 1..n {
            for k in 1..n {
                let v = if i == k {
                    (0..n)
                        .filter(|&j| j != i)
                        .map(|j| {
                            let dij = delta[i] - delta[j];
                            machines[i].e * machines[j].e * (-y.g[i][j] * dij.sin() + y.b[i][j] * dij.cos())
                        })
                        .sum()
                } else {
                    let dik = delta[i] - delta[k];
                    machines[i].e * machines[k].e * (y.g[i][k] * dik.sin() - y.b[i][k] * dik.cos())
                };
                jac[(i - 1, k - 1)] = v;
            }
        }
        let Some(step) = jac.lu().solve(&DVector::from_vec(f.clone())) else {
            break;
        };
        let current = norm(&f);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = (0..n)
                .map(|i| if i == 0 { 0.0 } else { delta[i] + lambda * step[i - 1] })
                .collect();
            let ft = mismatch(&trial);
            if norm(&ft) < current || lambda < 1e-6 {
                delta = trial;
                f = ft;
                break;
            }
            lambda /= 2.0;
        }
        converged = norm(&f) < NEWTON_TOL;
    }
    if !converged || delta.iter().any(|d| !d.is_finite()) {
        return Err(Error::NoEquilibrium { iterations: it });
    }
    let pe = power_injections(machines, y, &delta);
    let mut balanced = machines.to_vec();
    balanced[0].pm = pe[0];
    Ok((balanced, delta))
}

struct Rhs<'a> {
    mac: &'a [MachineParams],
    pe: Vec<f64>,
}

impl Rhs<'_> {
    fn eval(&mut self, y: &Admittance, delta: &[f64], omega: &[f64], dd: &mut [f64], dw: &mut [f64]) {
        electrical_power(self.mac, y, delta, &mut self.pe);
        for i in 0..self.mac.len() {
            let m = &self.mac[i];
            dd[i] = omega[i];
            dw[i] = (m.pm - self.pe[i] - m.d * omega[i]) / m.m;
        }
    }
}

/// Integrates from `(delta0, 0)` with fixed-step RK4. The network for the
/// step starting at grid index `k` is fault-on when `t0 <= t_k < tcl`.
pub fn simulate_from(
    machines: &[MachineParams],
    network: &ReducedNetwork,
    scenario: &Scenario,
    delta0: &[f64],
) -> Result<Trajectory> {
    scenario.validate()?;
    network.validate(machines.len())?;
    let n = machines.len();
    let (i0, icl, steps) = (scenario.index(scenario.t0), scenario.index(scenario.tcl), scenario.index(scenario.t_end));
    let h = scenario.dt;
    let mut rhs = Rhs { mac: machines, pe: vec![0.0; n] };
    let mut delta = Vec::with_capacity(steps + 1);
    let mut omega = Vec::with_capacity(steps + 1);
    let (mut d, mut w) = (delta0.to_vec(), vec![0.0; n]);
    delta.push(d.clone());
    omega.push(w.clone());
    let mut k = [(vec![0.0; n], vec![0.0; n]), (vec![0.0; n], vec![0.0; n]), (vec![0.0; n], vec![0.0; n]), (vec![0.0; n], vec![0.0; n])];
    let (mut td, mut tw) = (vec![0.0; n], vec![0.0; n]);
    for step in 0..steps {
        let y = if step < i0 {
            &network.prefault
        } else if step < icl {
            &network.fault_on
        } else {
            &network.postfault
        };
        for stage in 0..4 {
            let c = [0.0, 0.5, 0.5, 1.0][stage];
            if stage == 0 {
                td.copy_from_slice(&d);
                tw.copy_from_slice(&w);
            } else {
                let (pd, pw) = &k[stage - 1];
                for i in 0..n {
                    td[i] = d[i] + c * h * pd[i];
                    tw[i] = w[i] + c * h * pw[i];
                }
            }
            let (kd, kw) = &mut k[stage];
            rhs.eval(y, &td, &tw, kd, kw);
        }
        for i in 0..n {
            d[i] += h / 6.0 * (k[0].0[i] + 2.0 * k[1].0[i] + 2.0 * k[2].0[i] + k[3].0[i]);
            w[i] += h / 6.0 * (k[0].1[i] + 2.0 * k[1].1[i] + 2.0 * k[2].1[i] + k[3].1[i]);
        }
        if d.iter().chain(&w).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trajectory"));
        }
        delta.push(d.clone());
        omega.push(w.clone());
    }
    Ok(Trajectory {
        dt: h,
        delta,
        omega,
        inertia: machines.iter().map(|m| m.m).collect(),
    })
}

/// Scales the machines, finds the prefault equilibrium and integrates.
/// Returns the balanced machines alongside the trajectory.
pub fn simulate(
    machines: &[MachineParams],
    network: &ReducedNetwork,
    scenario: &Scenario,
) -> Result<(Vec<MachineParams>, Trajectory)> {
    scenario.validate()?;
    network.validate(machines.len())?;
    let scaled = scale_machines(machines, scenario.load_scale);
    let (balanced, delta0) = equilibrium(&scaled, &network.prefault)?;
    let traj = simulate_from(&balanced, network, scenario, &delta0)?;
    Ok((balanced, traj))
}

/// How instability is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityCriterion {
    /// Largest pairwise rotor angle difference.
    #[default]
    Pairwise,
    /// Largest deviation of any machine from the centre of inertia.
    CoiRelative,
}

/// `-1` when the criterion exceeds 360 degrees at any instant, else `+1`.
pub fn label(traj: &Trajectory, criterion: StabilityCriterion) -> Label {
    let exceeded = (0..traj.len()).any(|k| {
        let dev = match criterion {
            StabilityCriterion::Pairwise => traj.max_pairwise_difference(k),
            StabilityCriterion::CoiRelative => {
                let c = traj.coi_angle(k);
                traj.delta[k].iter().fold(0.0f64, |a, d| a.max((d - c).abs()))
            }
        };
        dev > TAU
    });
    if exceeded {
        Label::Negative
    } else {
        Label::Positive
    }
}

/// One computable feature. Offsets count cycles after fault clearing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "cycles")]
pub enum FeatureKind {
    /// Mean mechanical power before the fault.
    MeanMechanicalPower,
    /// Mean of `Pm - Pe` just after fault inception.
    MeanAccelerationPower,
    /// COI-relative angle of the machine farthest from the COI.
    CoiAngle(u32),
    /// COI-relative speed of the machine farthest from the COI.
    CoiSpeed(u32),
    /// Largest pairwise rotor angle difference.
    MaxAngleDifference(u32),
    /// Largest `M ω² / 2` over machines.
    MaxKineticEnergy(u32),
    /// `M ω² / 2` of the machine with the largest rotor angle.
    KineticEnergyOfLeading(u32),
}

impl FeatureKind {
    fn offset(self) -> u32 {
        match self {
            FeatureKind::MeanMechanicalPower | FeatureKind::MeanAccelerationPower => 0,
            FeatureKind::CoiAngle(c)
            | FeatureKind::CoiSpeed(c)
            | FeatureKind::MaxAngleDifference(c)
            | FeatureKind::MaxKineticEnergy(c)
            | FeatureKind::KineticEnergyOfLeading(c) => c,
        }
    }
}

/// Named feature list emitted by the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureCatalog {
    /// Seven features: power means and COI-relative angle/speed.
    #[default]
    Compact,
    /// Eleven features adding angle spreads and kinetic energies.
    Extended,
}

impl FeatureCatalog {
    pub fn kinds(self) -> Vec<FeatureKind> {
        use FeatureKind::*;
        match self {
            FeatureCatalog::Compact => vec![
                MeanMechanicalPower,
                MeanAccelerationPower,
                CoiSpeed(3),
                CoiAngle(6),
                CoiSpeed(6),
                CoiAngle(9),
                CoiSpeed(9),
            ],
            FeatureCatalog::Extended => vec![
                MeanAccelerationPower,
                MaxKineticEnergy(0),
                CoiAngle(3),
                MaxAngleDifference(3),
                KineticEnergyOfLeading(3),
                CoiAngle(6),
                MaxAngleDifference(6),
                CoiSpeed(6),
                CoiAngle(9),
                MaxAngleDifference(9),
                CoiSpeed(9),
            ],
        }
    }

    pub fn names(self) -> Vec<String> {
        (1..=self.kinds().len()).map(|i| format!("Tz{i}")).collect()
    }
}

fn farthest_from_coi(traj: &Trajectory, k: usize) -> usize {
    let c = traj.coi_angle(k);
    let mut best = 0;
    for (i, d) in traj.delta[k].iter().enumerate() {
        if (d - c).abs() > (traj.delta[k][best] - c).abs() {
            best = i;
        }
    }
    best
}

/// Evaluates `kinds` on a trajectory produced by [`simulate`]; `machines`
/// are the balanced machines it returned.
pub fn coi_features(
    traj: &Trajectory,
    machines: &[MachineParams],
    network: &ReducedNetwork,
    scenario: &Scenario,
    kinds: &[FeatureKind],
) -> Result<Vec<f64>> {
    let needed = scenario.tcl + kinds.iter().map(|k| k.offset()).max().unwrap_or(0) as f64 * scenario.cycle;
    let last = scenario.index(needed);
    if last >= traj.len() {
        return Err(Error::HorizonTooShort {
            t_end: traj.time(traj.len().saturating_sub(1)),
            needed,
        });
    }
    let n = machines.len() as f64;
    let at = |c: u32| scenario.index(scenario.tcl + c as f64 * scenario.cycle);
    let ke = |k: usize, i: usize| 0.5 * machines[i].m * traj.omega[k][i].powi(2);
    Ok(kinds
        .iter()
        .map(|&kind| match kind {
            FeatureKind::MeanMechanicalPower => machines.iter().map(|m| m.pm).sum::<f64>() / n,
            FeatureKind::MeanAccelerationPower => {
                let k0 = scenario.index(scenario.t0);
                let pe = power_injections(machines, &network.fault_on, &traj.delta[k0]);
                machines.iter().zip(&pe).map(|(m, p)| m.pm - p).sum::<f64>() / n
            }
            FeatureKind::CoiAngle(c) => {
                let k = at(c);
                traj.delta[k][farthest_from_coi(traj, k)] - traj.coi_angle(k)
            }
            FeatureKind::CoiSpeed(c) => {
                let k = at(c);
                traj.omega[k][farthest_from_coi(traj, k)] - traj.coi_speed(k)
            }
            FeatureKind::MaxAngleDifference(c) => traj.max_pairwise_difference(at(c)),
            FeatureKind::MaxKineticEnergy(c) => {
                let k = at(c);
                (0..machines.len()).map(|i| ke(k, i)).fold(0.0, f64::max)
            }
            FeatureKind::KineticEnergyOfLeading(c) => {
                let k = at(c);
                let lead = (0..machines.len())
                    .max_by(|&a, &b| traj.delta[k][a].total_cmp(&traj.delta[k][b]))
                    .unwrap_or(0);
                ke(k, lead)
            }
        })
        .collect())
}

/// Scenario space sampled by [`generate_dataset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n_samples: usize,
    /// Uniform range of the load scale.
    pub load_range: (f64, f64),
    /// Uniform range of the clearing time, in seconds.
    pub tcl_range: (f64, f64),
    /// Relative half-width of the per-machine `Pm` perturbation.
    pub pm_perturbation: f64,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub cycle: f64,
    pub catalog: FeatureCatalog,
    pub criterion: StabilityCriterion,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_samples: 2000,
            load_range: (0.75, 1.30),
            tcl_range: (0.2, 0.3),
            pm_perturbation: 0.1,
            t0: 0.1,
            t_end: 3.0,
            dt: 1e-3,
            cycle: 0.02,
            catalog: FeatureCatalog::Compact,
            criterion: StabilityCriterion::Pairwise,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let (l0, l1) = self.load_range;
        let (c0, c1) = self.tcl_range;
        if !(l0 > 0.0 && l0 <= l1 && l1.is_finite()) {
            return Err(Error::InvalidConfig("load_range must satisfy 0 < lo <= hi".into()));
        }
        if !(self.t0 <= c0 && c0 <= c1 && c1 <= self.t_end) {
            return Err(Error::InvalidConfig("tcl_range must satisfy t0 <= lo <= hi <= t_end".into()));
        }
        if !(0.0..1.0).contains(&self.pm_perturbation) {
            return Err(Error::InvalidConfig("pm_perturbation must lie in [0, 1)".into()));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidConfig("n_samples must be >= 1".into()));
        }
        let needed = c1 + 9.0 * self.cycle;
        if needed > self.t_end + 1e-12 {
            return Err(Error::HorizonTooShort {
                t_end: self.t_end,
                needed,
            });
        }
        Scenario {
            t0: self.t0,
            tcl: c0,
            t_end: self.t_end,
            dt: self.dt,
            cycle: self.cycle,
            load_scale: l0,
            seed: 0,
        }
        .validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub dataset: Dataset,
    pub attempts: usize,
    pub rejected: usize,
}

fn draw(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// One labeled sample from scenario index `i`, redrawing scenarios without
/// an equilibrium. Returns the features, label and number of rejections.
fn sample(fixture: &Fixture, cfg: &GeneratorConfig, kinds: &[FeatureKind], seed: u64, i: usize) -> Result<(Vec<f64>, Label, usize)> {
    for attempt in 0..MAX_REDRAWS {
        let mut rng = seed::rng_for(seed, &[i as u64, attempt as u64]);
        let scenario = Scenario {
            t0: cfg.t0,
            tcl: draw(&mut rng, cfg.tcl_range.0, cfg.tcl_range.1),
            t_end: cfg.t_end,
            dt: cfg.dt,
            cycle: cfg.cycle,
            load_scale: draw(&mut rng, cfg.load_range.0, cfg.load_range.1),
            seed: rng.gen(),
        };
        let network = &fixture.contingencies[rng.gen_range(0..fixture.contingencies.len())];
        let p = cfg.pm_perturbation;
        let machines: Vec<MachineParams> = fixture
            .machines
            .iter()
            .map(|m| MachineParams {
                pm: m.pm * draw(&mut rng, 1.0 - p, 1.0 + p),
                ..*m
            })
            .collect();
        match simulate(&machines, network, &scenario) {
            Ok((balanced, traj)) => {
                let x = coi_features(&traj, &balanced, network, &scenario, kinds)?;
                return Ok((x, label(&traj, cfg.criterion), attempt));
            }
            Err(Error::NoEquilibrium { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::BadScenarioSpace {
        rejected: MAX_REDRAWS,
        attempts: MAX_REDRAWS,
    })
}

/// Simulates `cfg.n_samples` random scenarios on `fixture`. Sample `i`
/// depends only on `(seed, i)`, so the output is independent of thread count.
pub fn generate_dataset(fixture: &Fixture, cfg: &GeneratorConfig, seed: u64) -> Result<Generated> {
    cfg.validate()?;
    fixture.validate()?;
    let kinds = cfg.catalog.kinds();
    let out = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| sample(fixture, cfg, &kinds, seed, i))
        .collect::<Result<Vec<_>>>()?;
    let rejected: usize = out.iter().map(|o| o.2).sum();
    let attempts = rejected + out.len();
    if 2 * rejected > attempts {
        return Err(Error::BadScenarioSpace { rejected, attempts });
    }
    let (rows, labels): (Vec<Vec<f64>>, Vec<Label>) = out.into_iter().map(|(x, l, _)| (x, l)).unzip();
    Ok(Generated {
        dataset: Dataset::new(cfg.catalog.names(), rows, labels)?,
        attempts,
        rejected,
    })
}
