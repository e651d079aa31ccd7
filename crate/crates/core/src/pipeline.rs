//! One-trial driver: instance description -> oracle -> division set ->
//! hierarchy -> path -> protocol run -> samples -> verified verdict.
//!
//! [`InstanceSpec`] doubles as the on-disk instance format: the family tag,
//! its parameters, and a seed. Oracle tables are always rebuilt from these
//! fields and never serialized.

use nalgebra::DVector;
use num_complex::Complex;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{DivisionMode, DivisionSet, Family, HidingOracle, MarkedHierarchy, Spectrum};
use crate::path::{build_path, PathSpec};
use crate::postproc::{
    conclude_dihedral, conclude_dlog, conclude_generic, conclude_gip, conclude_order,
    conclude_simon, Verdict,
};
use crate::problems::{
    build_dihedral, build_dlog, build_factoring, build_gip, build_period, build_simon, EdgeList,
    TargetPolicy,
};
use crate::qrt::{measure_register, Backend, Engine, PathFailure, RunPolicy};
use crate::rng::stream;
use crate::trace::RunTrace;

fn default_pad() -> u32 {
    1
}

/// Reproducible description of an instance: family, parameters, seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum InstanceSpec {
    Simon {
        n: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<u64>,
        seed: u64,
        #[serde(default)]
        target: TargetPolicy,
    },
    Factoring {
        z: u64,
        a: u64,
        #[serde(default = "default_pad")]
        pad: u32,
        seed: u64,
    },
    /// Order-finding: the factoring table for `y` mod `modulus`, without
    /// factor extraction.
    Order {
        modulus: u64,
        y: u64,
        #[serde(default = "default_pad")]
        pad: u32,
        seed: u64,
    },
    Dlog {
        modulus: u64,
        a: u64,
        s: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        range: Option<usize>,
        seed: u64,
    },
    Dihedral {
        n_rot: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        l: Option<u64>,
        seed: u64,
        #[serde(default)]
        target: TargetPolicy,
    },
    Gip {
        n: usize,
        /// 1-indexed vertex pairs.
        edges_1: Vec<[usize; 2]>,
        edges_2: Vec<[usize; 2]>,
        seed: u64,
    },
    Period {
        r: u64,
        bits: u32,
        seed: u64,
        #[serde(default)]
        target: TargetPolicy,
    },
    Generic {
        values: Vec<u64>,
        seed: u64,
    },
}

impl InstanceSpec {
    pub fn family(&self) -> Family {
        match self {
            InstanceSpec::Simon { .. } => Family::Simon,
            InstanceSpec::Factoring { .. } | InstanceSpec::Order { .. } => Family::Factoring,
            InstanceSpec::Dlog { .. } => Family::Dlog,
            InstanceSpec::Dihedral { .. } => Family::Dihedral,
            InstanceSpec::Gip { .. } => Family::Gip,
            InstanceSpec::Period { .. } => Family::Period,
            InstanceSpec::Generic { .. } => Family::Generic,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            InstanceSpec::Simon { seed, .. }
            | InstanceSpec::Factoring { seed, .. }
            | InstanceSpec::Order { seed, .. }
            | InstanceSpec::Dlog { seed, .. }
            | InstanceSpec::Dihedral { seed, .. }
            | InstanceSpec::Gip { seed, .. }
            | InstanceSpec::Period { seed, .. }
            | InstanceSpec::Generic { seed, .. } => *seed,
        }
    }

    /// Same description with a different seed (per-trial reseeding).
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            InstanceSpec::Simon { seed: s, .. }
            | InstanceSpec::Factoring { seed: s, .. }
            | InstanceSpec::Order { seed: s, .. }
            | InstanceSpec::Dlog { seed: s, .. }
            | InstanceSpec::Dihedral { seed: s, .. }
            | InstanceSpec::Gip { seed: s, .. }
            | InstanceSpec::Period { seed: s, .. }
            | InstanceSpec::Generic { seed: s, .. } => *s = seed,
        }
        out
    }

    /// Compile the oracle table, drawing hidden parameters from `rng`.
    pub fn build_with(&self, rng: &mut ChaCha8Rng) -> Result<ProblemInstance> {
        match self {
            InstanceSpec::Simon { n, a, target, .. } => Ok(ProblemInstance::Simon(build_simon(
                *n, *a, *target, rng,
            )?)),
            InstanceSpec::Factoring { z, a, pad, .. } => Ok(ProblemInstance::Factoring {
                inst: build_factoring(*z, *a, *pad)?,
                want_factors: true,
            }),
            InstanceSpec::Order { modulus, y, pad, .. } => Ok(ProblemInstance::Factoring {
                inst: build_factoring(*modulus, *y, *pad)?,
                want_factors: false,
            }),
            InstanceSpec::Dlog {
                modulus, a, s, range, ..
            } => Ok(ProblemInstance::Dlog(build_dlog(*modulus, *a, *s, *range)?)),
            InstanceSpec::Dihedral { n_rot, l, target, .. } => Ok(ProblemInstance::Dihedral(
                build_dihedral(*n_rot, *l, *target, rng)?,
            )),
            InstanceSpec::Gip { n, edges_1, edges_2, .. } => {
                let convert = |edges: &Vec<[usize; 2]>| -> Result<EdgeList> {
                    edges
                        .iter()
                        .map(|&[u, v]| {
                            if u == 0 || v == 0 {
                                Err(Error::InvalidInstance(format!(
                                    "vertices are 1-indexed, got ({u},{v})"
                                )))
                            } else {
                                Ok((u - 1, v - 1))
                            }
                        })
                        .collect()
                };
                Ok(ProblemInstance::Gip(build_gip(
                    *n,
                    &convert(edges_1)?,
                    &convert(edges_2)?,
                )?))
            }
            InstanceSpec::Period { r, bits, target, .. } => Ok(ProblemInstance::Period(
                build_period(*r, *bits, *target, rng)?,
            )),
            InstanceSpec::Generic { values, .. } => Ok(ProblemInstance::Generic(
                HidingOracle::new(values.clone(), Family::Generic)?,
            )),
        }
    }

    pub fn build(&self) -> Result<ProblemInstance> {
        self.build_with(&mut stream(self.seed()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance spec serializes")
    }
}

/// A compiled instance with its verification data.
#[derive(Debug, Clone)]
pub enum ProblemInstance {
    Simon(crate::problems::SimonInstance),
    Factoring {
        inst: crate::problems::FactoringInstance,
        want_factors: bool,
    },
    Dlog(crate::problems::DlogInstance),
    Dihedral(crate::problems::DihedralInstance),
    Gip(crate::problems::GraphPair),
    Period(crate::problems::PeriodicInstance),
    Generic(HidingOracle),
}

impl ProblemInstance {
    pub fn oracle(&self) -> &HidingOracle {
        match self {
            ProblemInstance::Simon(i) => i.oracle(),
            ProblemInstance::Factoring { inst, .. } => inst.oracle(),
            ProblemInstance::Dlog(i) => i.oracle(),
            ProblemInstance::Dihedral(i) => i.oracle(),
            ProblemInstance::Gip(i) => i.oracle(),
            ProblemInstance::Period(i) => i.oracle(),
            ProblemInstance::Generic(o) => o,
        }
    }

    pub fn family(&self) -> Family {
        self.oracle().family()
    }

    /// Division set in the family's default mode, or an explicit override.
    ///
    /// Rank bisection is the default everywhere: its thresholds land on the
    /// spectrum and terminate at the minimum-value coset. Value bisection
    /// (halving from the family's value-range bound down to 1) is the
    /// default for graph pairs, whose ids start at 1, and is available for
    /// the other modular families with min value 1.
    pub fn division_set(&self, mode: Option<DivisionMode>, spectrum: &Spectrum) -> Result<DivisionSet> {
        let default_mode = match self {
            ProblemInstance::Gip(_) => DivisionMode::Value,
            _ => DivisionMode::Rank,
        };
        match mode.unwrap_or(default_mode) {
            DivisionMode::Rank => DivisionSet::by_rank(spectrum),
            DivisionMode::Value => {
                let min = spectrum.distinct_values()[0];
                if min < 1 {
                    return Err(Error::InvalidInstance(
                        "value bisection ends at 1 and misses the minimum-value coset of this \
                         table; use rank bisection"
                            .into(),
                    ));
                }
                let start = match self {
                    ProblemInstance::Factoring { inst, .. } => inst.modulus(),
                    ProblemInstance::Dlog(i) => i.modulus(),
                    // |Y| = 2 (n!)^2, the top of the id range.
                    ProblemInstance::Gip(i) => i.y_size() as u64,
                    _ => spectrum.distinct_values()[spectrum.coset_count() - 1] + 1,
                };
                DivisionSet::by_value(start, 1)
            }
        }
    }

    /// Extract and verify the answer from measured register indices.
    pub fn conclude(&self, samples: &[usize], gip_budget: usize) -> Result<Verdict> {
        match self {
            ProblemInstance::Simon(i) => conclude_simon(i, samples),
            ProblemInstance::Factoring { inst, want_factors } => {
                conclude_order(inst, samples, *want_factors)
            }
            ProblemInstance::Dlog(i) => conclude_dlog(i, samples),
            ProblemInstance::Dihedral(i) => conclude_dihedral(i, samples),
            ProblemInstance::Gip(i) => conclude_gip(i, samples, gip_budget),
            ProblemInstance::Period(i) => {
                crate::postproc::conclude_period(i, samples)
            }
            ProblemInstance::Generic(o) => conclude_generic(o, samples),
        }
    }
}

/// Everything derived from the oracle before dynamics run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub spectrum: Spectrum,
    pub division: DivisionSet,
    pub hierarchy: MarkedHierarchy,
    pub path: PathSpec<f64>,
}

/// Analyze an instance: spectrum, division set, hierarchy, path.
pub fn prepare(instance: &ProblemInstance, mode: Option<DivisionMode>) -> Result<Prepared> {
    let spectrum = instance.oracle().spectrum();
    let division = instance.division_set(mode, &spectrum)?;
    let hierarchy = MarkedHierarchy::build(instance.oracle(), &division)?;
    let path = build_path::<f64>(&hierarchy)?;
    Ok(Prepared {
        spectrum,
        division,
        hierarchy,
        path,
    })
}

/// Per-trial run settings.
#[derive(Debug, Clone, Copy)]
pub struct TrialSettings {
    pub backend: Backend,
    pub policy: RunPolicy,
    /// Register measurement budget.
    pub shots: usize,
    /// Valid-sample budget for the isomorphism vote.
    pub gip_budget: usize,
    pub division: Option<DivisionMode>,
}

impl Default for TrialSettings {
    fn default() -> Self {
        Self {
            backend: Backend::Collapsed,
            policy: RunPolicy::default(),
            shots: 32,
            gip_budget: 24,
            division: None,
        }
    }
}

/// Completed trial with all artifacts.
#[derive(Debug)]
pub struct Trial {
    pub instance: ProblemInstance,
    pub prepared: Prepared,
    pub trace: RunTrace,
    /// Final register amplitudes in the backend's own basis.
    pub register: DVector<Complex<f64>>,
    pub samples: Vec<usize>,
    pub verdict: Verdict,
}

/// Trial failures distinguish setup problems from aborted runs.
#[derive(Debug)]
pub enum TrialError {
    Setup(Error),
    Run { error: Error, partial: RunTrace },
}

impl std::fmt::Display for TrialError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrialError::Setup(e) => write!(f, "setup: {e}"),
            TrialError::Run { error, .. } => write!(f, "run: {error}"),
        }
    }
}

impl std::error::Error for TrialError {}

impl From<Error> for TrialError {
    fn from(e: Error) -> Self {
        TrialError::Setup(e)
    }
}

impl From<PathFailure> for TrialError {
    fn from(f: PathFailure) -> Self {
        TrialError::Run {
            error: f.error,
            partial: f.partial,
        }
    }
}

/// Run one trial end to end. A single stream seeded by the spec's seed
/// covers instance construction, probe measurements, and register sampling.
pub fn run_trial(spec: &InstanceSpec, settings: &TrialSettings) -> std::result::Result<Trial, TrialError> {
    let seed = spec.seed();
    let mut rng = stream(seed);
    let instance = spec.build_with(&mut rng)?;
    let prepared = prepare(&instance, settings.division)?;
    let engine = Engine::<f64>::new(&prepared.path, settings.backend)?;
    let outcome = engine.run_with(&settings.policy, seed, &mut rng)?;
    let samples = measure_register(&outcome.register, &engine.sampler(), settings.shots, &mut rng);
    let verdict = instance.conclude(&samples, settings.gip_budget)?;
    Ok(Trial {
        instance,
        prepared,
        trace: outcome.trace,
        register: outcome.register,
        samples,
        verdict,
    })
}
