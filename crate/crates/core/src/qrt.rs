//! Probe-qubit resonant-transition engine.
//!
//! One step transfers the register from the ground state of the previous
//! path operator to that of the current one. The probe qubit is prepared
//! excited, the joint system evolves under a conditional Hamiltonian
//!
//! `H = omega/2 * sz ⊗ I  +  |1><1| ⊗ H_prev  +  |0><0| ⊗ H_cur  +  c * sx ⊗ I`
//!
//! (probe excited = |1>, decay = measuring |0>), and the probe is measured.
//! At resonance `omega = E0_cur - E0_prev` the two dressed levels line up
//! and the transfer completes in time `t = pi / (2 c d0)` with decay
//! probability `sin^2(c t d0)`. A failed measurement leaves the register in
//! the protected previous ground state (up to quantifiable leakage) and the
//! evolution is simply repeated.
//!
//! Propagators are exact: the conditional Hamiltonian is eigendecomposed
//! once per step and `exp(-iHt)` applied through its spectrum.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::oracle::Atom;
use crate::path::{expand_to_dense, PathSpec};
use crate::scalar::Scalar;
use crate::trace::{RunTrace, StepRecord};

/// Hard cap on the joint probe-register dimension for the dense backend.
pub const DENSE_EVOLVE_BUDGET: usize = 4096;

/// State-vector representation backing a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Atom-basis amplitudes; exact and logarithmically small.
    Collapsed,
    /// Full register amplitudes; the cross-check reference.
    Dense,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Collapsed => f.write_str("collapsed"),
            Backend::Dense => f.write_str("dense"),
        }
    }
}

/// `sin^2(c t d0)`, the resonant decay probability.
pub fn rabi_probability<S: Scalar>(c: S, t: S, d0: S) -> S {
    let x = (c * t * d0).sin();
    x * x
}

/// Resonance condition: the probe frequency matching the ground-energy
/// difference of the two step operators.
pub fn resonance_omega<S: Scalar>(e0_prev: S, e0_cur: S) -> S {
    e0_cur - e0_prev
}

/// Parameters of one resonant-transition step.
#[derive(Debug, Clone, Copy)]
pub struct StepParams<S: Scalar> {
    pub omega: S,
    pub coupling: S,
    pub time: S,
    pub d0_expected: S,
}

impl<S: Scalar> StepParams<S> {
    /// Evolution time `pi / (2 c d0)` for given coupling and overlap.
    pub fn quarter_period(coupling: S, d0: S) -> S {
        S::pi() / (S::from_count(2) * coupling * d0)
    }
}

/// How the per-step coupling strength is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingRule {
    /// `c = min(c_max, gap / 20)` using the smaller gap of the two step
    /// operators; degenerate transitions use `c_max` outright.
    Auto { c_max: f64 },
    /// Fixed coupling for ablations.
    Fixed { c: f64 },
}

impl Default for CouplingRule {
    fn default() -> Self {
        CouplingRule::Auto { c_max: 0.02 }
    }
}

/// Run policy: coupling rule, repeat budget, and the optional projection of
/// the register onto the exact ground state after each decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunPolicy {
    pub coupling: CouplingRule,
    pub max_repeats: usize,
    pub purify: bool,
    /// Multiplier on the quarter-period evolution time; 1 is the protocol
    /// value, other values exist for failure-path tests.
    pub time_scale: f64,
}

impl Default for RunPolicy {
    fn default() -> Self {
        Self {
            coupling: CouplingRule::default(),
            max_repeats: 50,
            purify: false,
            time_scale: 1.0,
        }
    }
}

/// Probe ⊗ register amplitudes, excited block first.
#[derive(Debug, Clone)]
pub struct ProbeRegisterState<S: Scalar> {
    amps: DVector<Complex<S>>,
    dim: usize,
}

impl<S: Scalar> ProbeRegisterState<S> {
    /// Probe excited, register in the given (real, unit) state.
    pub fn from_excited_register(register: &DVector<Complex<S>>) -> Self {
        let dim = register.len();
        let mut amps = DVector::zeros(2 * dim);
        for j in 0..dim {
            amps[j] = register[j];
        }
        Self { amps, dim }
    }

    /// Explicit excited and ground blocks of equal dimension.
    pub fn from_blocks(excited: &DVector<Complex<S>>, ground: &DVector<Complex<S>>) -> Self {
        assert_eq!(excited.len(), ground.len());
        let dim = excited.len();
        let mut amps = DVector::zeros(2 * dim);
        for j in 0..dim {
            amps[j] = excited[j];
            amps[dim + j] = ground[j];
        }
        Self { amps, dim }
    }

    pub fn register_dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &DVector<Complex<S>> {
        &self.amps
    }

    pub fn excited_block(&self) -> DVector<Complex<S>> {
        self.amps.rows(0, self.dim).into_owned()
    }

    pub fn ground_block(&self) -> DVector<Complex<S>> {
        self.amps.rows(self.dim, self.dim).into_owned()
    }

    /// Squared norm of the probe-ground block.
    pub fn decay_probability(&self) -> S {
        self.amps
            .rows(self.dim, self.dim)
            .iter()
            .fold(S::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn norm(&self) -> S {
        self.amps
            .iter()
            .fold(S::zero(), |acc, a| acc + a.norm_sqr())
            .sqrt()
    }
}

/// Conditional step Hamiltonian with its spectral decomposition.
pub struct StepOperator<S: Scalar> {
    dim: usize,
    eigenvalues: DVector<S>,
    eigenvectors: DMatrix<S>,
}

impl<S: Scalar> StepOperator<S> {
    /// Assemble the 2d x 2d conditional matrix.
    pub fn assemble(
        h_prev: &DMatrix<S>,
        h_cur: &DMatrix<S>,
        omega: S,
        coupling: S,
    ) -> Result<DMatrix<S>> {
        let d = h_prev.nrows();
        if h_cur.nrows() != d || !h_prev.is_square() || !h_cur.is_square() {
            return Err(Error::InvalidInstance(
                "step operators live in different bases".into(),
            ));
        }
        let half = S::from_f64(0.5).unwrap();
        let mut h = DMatrix::zeros(2 * d, 2 * d);
        for r in 0..d {
            for c in 0..d {
                h[(r, c)] = h_prev[(r, c)];
                h[(d + r, d + c)] = h_cur[(r, c)];
            }
            h[(r, r)] += half * omega;
            h[(d + r, d + r)] -= half * omega;
            h[(r, d + r)] = coupling;
            h[(d + r, r)] = coupling;
        }
        Ok(h)
    }

    /// Assemble and eigendecompose; the decomposition is reused across the
    /// repeat loop.
    pub fn new(h_prev: &DMatrix<S>, h_cur: &DMatrix<S>, omega: S, coupling: S) -> Result<Self> {
        let h = Self::assemble(h_prev, h_cur, omega, coupling)?;
        let dim = h.nrows() / 2;
        if 2 * dim > DENSE_EVOLVE_BUDGET {
            return Err(Error::DimensionBudget {
                dim: 2 * dim,
                budget: DENSE_EVOLVE_BUDGET,
            });
        }
        let (eigenvalues, eigenvectors) = symmetric_eigen(h);
        Ok(Self {
            dim,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn register_dim(&self) -> usize {
        self.dim
    }

    /// Apply `exp(-iHt)` through the eigenbasis.
    fn propagate(&self, amps: &mut DVector<Complex<S>>, t: S) {
        let n = amps.len();
        let mut re = DVector::zeros(n);
        let mut im = DVector::zeros(n);
        for j in 0..n {
            re[j] = amps[j].re;
            im[j] = amps[j].im;
        }
        let mut yre = self.eigenvectors.tr_mul(&re);
        let mut yim = self.eigenvectors.tr_mul(&im);
        for j in 0..n {
            let phase = self.eigenvalues[j] * t;
            let (c, s) = (phase.cos(), phase.sin());
            // (yre + i yim) * (cos - i sin)
            let r = yre[j] * c + yim[j] * s;
            let i = yim[j] * c - yre[j] * s;
            yre[j] = r;
            yim[j] = i;
        }
        let out_re = &self.eigenvectors * yre;
        let out_im = &self.eigenvectors * yim;
        for j in 0..n {
            amps[j] = Complex::new(out_re[j], out_im[j]);
        }
    }
}

/// Unitary evolution for time `t`; renormalizes on drift beyond 1e-9 and
/// reports whether it had to.
pub fn evolve<S: Scalar>(
    state: &mut ProbeRegisterState<S>,
    op: &StepOperator<S>,
    t: S,
) -> Result<bool> {
    if op.register_dim() != state.register_dim() {
        return Err(Error::InvalidInstance(
            "state and operator bases differ".into(),
        ));
    }
    op.propagate(&mut state.amps, t);
    let norm = state.norm();
    if !norm.is_finite() {
        return Err(Error::NumericalFailure(
            "non-finite amplitudes after evolution".into(),
        ));
    }
    let drift = (norm - S::one()).abs();
    if drift > S::from_f64(1e-9).unwrap() {
        state.amps /= Complex::new(norm, S::zero());
        return Ok(true);
    }
    Ok(false)
}

/// Measure the probe. On decay the register collapses to the ground block,
/// otherwise it stays in the excited block; either way it is renormalized.
pub fn measure_probe<S: Scalar, R: Rng>(
    state: &ProbeRegisterState<S>,
    rng: &mut R,
) -> Result<(bool, DVector<Complex<S>>)> {
    let p_decay = state.decay_probability().as_f64();
    let decayed = rng.gen::<f64>() < p_decay;
    let block = if decayed {
        state.ground_block()
    } else {
        state.excited_block()
    };
    let norm = block.norm();
    if norm < S::from_f64(1e-12).unwrap() {
        return Err(Error::NumericalFailure(
            "measured block has vanishing norm".into(),
        ));
    }
    Ok((decayed, block / Complex::new(norm, S::zero())))
}

/// Squared overlap of a complex register with a real reference vector.
pub fn fidelity<S: Scalar>(register: &DVector<Complex<S>>, reference: &DVector<S>) -> f64 {
    let mut acc = Complex::new(S::zero(), S::zero());
    for j in 0..register.len() {
        acc += register[j] * reference[j];
    }
    acc.norm_sqr().as_f64()
}

/// Outcome of one step.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub repeats: usize,
    pub p_theory: f64,
    pub p_model: f64,
    pub post_fidelity: f64,
    pub renormalizations: usize,
}

/// Repeat-until-decay loop for one transition. The register is mutated in
/// place: to the next ground state on success, or left renormalized in the
/// excited branch on failure.
pub fn run_step<S: Scalar, R: Rng>(
    register: &mut DVector<Complex<S>>,
    op: &StepOperator<S>,
    ground_cur: &DVector<S>,
    params: &StepParams<S>,
    max_repeats: usize,
    rng: &mut R,
) -> Result<StepOutcome> {
    let p_theory = rabi_probability(params.coupling, params.time, params.d0_expected).as_f64();
    let mut p_model = None;
    let mut renormalizations = 0;
    for attempt in 1..=max_repeats.max(1) {
        let mut state = ProbeRegisterState::from_excited_register(register);
        if evolve(&mut state, op, params.time)? {
            renormalizations += 1;
        }
        if p_model.is_none() {
            p_model = Some(state.decay_probability().as_f64());
        }
        let (decayed, block) = measure_probe(&state, rng)?;
        *register = block;
        if decayed {
            return Ok(StepOutcome {
                repeats: attempt,
                p_theory,
                p_model: p_model.unwrap(),
                post_fidelity: fidelity(register, ground_cur),
                renormalizations,
            });
        }
    }
    Err(Error::StepFailed {
        step: 0,
        attempts: max_repeats,
    })
}

/// Sampling rule for register measurements.
pub enum RegisterSampler<'a> {
    /// Atom-basis amplitudes: sample an atom, then an element uniformly
    /// inside it.
    Atoms(&'a [Atom]),
    /// Amplitudes indexed directly by register басis states.
    Direct,
}

/// Draw `shots` independent basis-state indices from the register.
pub fn measure_register<S: Scalar, R: Rng>(
    register: &DVector<Complex<S>>,
    sampler: &RegisterSampler<'_>,
    shots: usize,
    rng: &mut R,
) -> Vec<usize> {
    let weights: Vec<f64> = register.iter().map(|a| a.norm_sqr().as_f64()).collect();
    let total: f64 = weights.iter().sum();
    let mut out = Vec::with_capacity(shots);
    for _ in 0..shots {
        let mut u = rng.gen::<f64>() * total;
        let mut slot = weights.len() - 1;
        for (i, &w) in weights.iter().enumerate() {
            if u < w {
                slot = i;
                break;
            }
            u -= w;
        }
        let index = match sampler {
            RegisterSampler::Direct => slot,
            RegisterSampler::Atoms(atoms) => {
                let members = atoms[slot].indices();
                members[rng.gen_range(0..members.len())]
            }
        };
        out.push(index);
    }
    out
}

/// A failed run carries the trace of the steps that did complete.
#[derive(Debug)]
pub struct PathFailure {
    pub error: Error,
    pub partial: RunTrace,
}

impl std::fmt::Display for PathFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.error)
    }
}

impl std::error::Error for PathFailure {}

/// Completed run: final register state plus the full trace.
#[derive(Debug)]
pub struct RunOutcome<S: Scalar> {
    pub register: DVector<Complex<S>>,
    pub trace: RunTrace,
}

/// Precomputed per-backend representation of a path: step matrices, ground
/// vectors, and the measurement sampler.
pub struct Engine<S: Scalar> {
    backend: Backend,
    path: PathSpec<S>,
    matrices: Vec<DMatrix<S>>,
    grounds: Vec<DVector<S>>,
}

impl<S: Scalar> Engine<S> {
    pub fn new(path: &PathSpec<S>, backend: Backend) -> Result<Self> {
        let hier = path.hierarchy();
        if backend == Backend::Dense && 2 * hier.domain_size() > DENSE_EVOLVE_BUDGET {
            return Err(Error::DimensionBudget {
                dim: 2 * hier.domain_size(),
                budget: DENSE_EVOLVE_BUDGET,
            });
        }
        let mut matrices = Vec::with_capacity(path.steps().len());
        let mut grounds = Vec::with_capacity(path.steps().len());
        for (i, step) in path.steps().iter().enumerate() {
            match backend {
                Backend::Collapsed => {
                    matrices.push(crate::path::collapsed_matrix(hier, step));
                    grounds.push(path.eigen(i).ground().clone());
                }
                Backend::Dense => {
                    matrices.push(crate::path::dense_matrix(hier, step));
                    grounds.push(expand_to_dense(hier, path.eigen(i).ground()));
                }
            }
        }
        Ok(Self {
            backend,
            path: path.clone(),
            matrices,
            grounds,
        })
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn path(&self) -> &PathSpec<S> {
        &self.path
    }

    /// The register started in the uniform state (the i = 0 ground state).
    pub fn initial_register(&self) -> DVector<Complex<S>> {
        self.grounds[0].map(|x| Complex::new(x, S::zero()))
    }

    /// Target state of the path in this backend's representation.
    pub fn target(&self) -> &DVector<S> {
        self.grounds.last().unwrap()
    }

    pub fn sampler(&self) -> RegisterSampler<'_> {
        match self.backend {
            Backend::Collapsed => RegisterSampler::Atoms(self.path.hierarchy().atoms()),
            Backend::Dense => RegisterSampler::Direct,
        }
    }

    /// Coupling strength for transition `t` under a rule.
    fn coupling_for(&self, t: usize, rule: CouplingRule) -> S {
        match rule {
            CouplingRule::Fixed { c } => S::from_f64(c).unwrap(),
            CouplingRule::Auto { c_max } => {
                let c_max = S::from_f64(c_max).unwrap();
                if self.path.is_degenerate_transition(t) {
                    return c_max;
                }
                let gap_prev = self.path.eigen(t - 1).gap();
                let gap_cur = self.path.eigen(t).gap();
                let gap = if gap_prev < gap_cur { gap_prev } else { gap_cur };
                if gap <= S::zero() {
                    c_max
                } else {
                    let candidate = gap / S::from_count(20);
                    if candidate < c_max {
                        candidate
                    } else {
                        c_max
                    }
                }
            }
        }
    }

    /// Execute every transition of the path starting from the uniform
    /// state, with a self-contained stream derived from `seed`.
    pub fn run(&self, policy: &RunPolicy, seed: u64) -> std::result::Result<RunOutcome<S>, PathFailure> {
        let mut rng = crate::rng::stream(seed);
        self.run_with(policy, seed, &mut rng)
    }

    /// Execute every transition using an external generator; `seed` is only
    /// stamped into the trace. Step failures abort and return the partial
    /// trace.
    pub fn run_with<R: Rng>(
        &self,
        policy: &RunPolicy,
        seed: u64,
        rng: &mut R,
    ) -> std::result::Result<RunOutcome<S>, PathFailure> {
        let mut register = self.initial_register();
        let m = self.path.transitions();
        let mut steps = Vec::with_capacity(m);
        let mut total_time = 0.0f64;

        for t in 1..=m {
            let e0_prev = self.path.eigen(t - 1).e0();
            let e0_cur = self.path.eigen(t).e0();
            let omega = resonance_omega(e0_prev, e0_cur);
            let coupling = self.coupling_for(t, policy.coupling);
            let d0 = self.path.overlap_for(t);
            let time =
                StepParams::quarter_period(coupling, d0) * S::from_f64(policy.time_scale).unwrap();
            let params = StepParams {
                omega,
                coupling,
                time,
                d0_expected: d0,
            };

            let record_base = |outcome: &StepOutcome| StepRecord {
                i: t,
                n_i: self.path.steps()[t].n_marked(),
                e0: e0_cur.as_f64(),
                gap: self.path.eigen(t).gap().as_f64(),
                d0: d0.as_f64(),
                omega: omega.as_f64(),
                c: coupling.as_f64(),
                t: time.as_f64(),
                repeats: outcome.repeats,
                p_theory: outcome.p_theory,
                p_model: outcome.p_model,
                post_fidelity: outcome.post_fidelity,
            };

            let op = match StepOperator::new(&self.matrices[t - 1], &self.matrices[t], omega, coupling)
            {
                Ok(op) => op,
                Err(error) => {
                    return Err(PathFailure {
                        error,
                        partial: RunTrace::new(steps, 0.0, total_time, seed, self.backend),
                    })
                }
            };

            match run_step(
                &mut register,
                &op,
                &self.grounds[t],
                &params,
                policy.max_repeats,
                rng,
            ) {
                Ok(outcome) => {
                    total_time += outcome.repeats as f64 * params.time.as_f64();
                    steps.push(record_base(&outcome));
                    if policy.purify {
                        register = self.grounds[t].map(|x| Complex::new(x, S::zero()));
                    }
                }
                Err(Error::StepFailed { attempts, .. }) => {
                    return Err(PathFailure {
                        error: Error::StepFailed { step: t, attempts },
                        partial: RunTrace::new(steps, 0.0, total_time, seed, self.backend),
                    });
                }
                Err(error) => {
                    return Err(PathFailure {
                        error,
                        partial: RunTrace::new(steps, 0.0, total_time, seed, self.backend),
                    });
                }
            }
        }

        let final_fidelity = fidelity(&register, self.target());
        let trace = RunTrace::new(steps, final_fidelity, total_time, seed, self.backend);
        Ok(RunOutcome { register, trace })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{build_path, eigen_collapsed, StepHamiltonianSpec};
    use crate::rng::stream;
    use crate::testutil::hierarchy_with_counts;

    #[test]
    fn rabi_examples() {
        let c = 0.3f64;
        let d0 = 0.8;
        let t = StepParams::quarter_period(c, d0);
        assert!((rabi_probability(c, t, d0) - 1.0).abs() < 1e-12);
        assert_eq!(rabi_probability(c, 0.0, d0), 0.0);
        let p = rabi_probability(0.01, 10.0, 0.5);
        assert!((p - 0.05f64.sin().powi(2)).abs() < 1e-15);
        assert!((p - 0.002498).abs() < 1e-6);
    }

    #[test]
    fn resonance_examples() {
        assert_eq!(resonance_omega(-0.5, -0.5), 0.0);
        let h = hierarchy_with_counts(4, &[1]);
        let step = StepHamiltonianSpec::<f64>::interior(&h, 1);
        let e0 = eigen_collapsed(&h, &step).e0();
        let omega = resonance_omega(-1.0, e0);
        assert!((omega - 0.16928108611692616).abs() < 1e-12);
        assert_eq!(resonance_omega(e0, -1.0), -omega);
    }

    #[test]
    fn conditional_hamiltonian_is_hermitian_and_resonant() {
        let h = hierarchy_with_counts(8, &[4, 2]);
        let path = build_path::<f64>(&h).unwrap();
        let hp = crate::path::collapsed_matrix(&h, &path.steps()[0]);
        let hc = crate::path::collapsed_matrix(&h, &path.steps()[1]);
        let omega = resonance_omega(path.eigen(0).e0(), path.eigen(1).e0());
        let c = 0.01;
        let full = StepOperator::assemble(&hp, &hc, omega, c).unwrap();
        assert_eq!(full.clone(), full.transpose());

        // Dressed energies of |1>|phi_prev> and |0>|phi_cur> coincide.
        let d = hp.nrows();
        let g_prev = path.eigen(0).ground();
        let g_cur = path.eigen(1).ground();
        let mut up = DVector::zeros(2 * d);
        let mut down = DVector::zeros(2 * d);
        for j in 0..d {
            up[j] = g_prev[j];
            down[d + j] = g_cur[j];
        }
        let e_up = (up.transpose() * &full * &up)[(0, 0)];
        let e_down = (down.transpose() * &full * &down)[(0, 0)];
        assert!((e_up - e_down).abs() < 1e-12, "{e_up} vs {e_down}");

        // The coupling matrix element between the two dressed states is c*d0.
        let cross = (up.transpose() * &full * &down)[(0, 0)];
        assert!((cross - c * path.overlap_for(1)).abs() < 1e-12);
    }

    #[test]
    fn uncoupled_probe_never_decays() {
        let h = hierarchy_with_counts(8, &[4]);
        let path = build_path::<f64>(&h).unwrap();
        let hp = crate::path::collapsed_matrix(&h, &path.steps()[0]);
        let hc = crate::path::collapsed_matrix(&h, &path.steps()[1]);
        let omega = resonance_omega(path.eigen(0).e0(), path.eigen(1).e0());
        let op = StepOperator::new(&hp, &hc, omega, 0.0).unwrap();
        let mut register = path.eigen(0).ground().map(|x| Complex::new(x, 0.0));
        let params = StepParams {
            omega,
            coupling: 0.0,
            time: 7.3,
            d0_expected: path.overlap_for(1),
        };
        let mut rng = stream(5);
        let err = run_step(&mut register, &op, path.eigen(1).ground(), &params, 8, &mut rng);
        match err {
            Err(Error::StepFailed { attempts, .. }) => assert_eq!(attempts, 8),
            other => panic!("expected step failure, got {other:?}"),
        }
    }

    #[test]
    fn evolve_identity_at_zero_time() {
        let h = hierarchy_with_counts(8, &[4, 2]);
        let path = build_path::<f64>(&h).unwrap();
        let hp = crate::path::collapsed_matrix(&h, &path.steps()[0]);
        let hc = crate::path::collapsed_matrix(&h, &path.steps()[1]);
        let op = StepOperator::new(&hp, &hc, 0.1, 0.02).unwrap();
        let register = path.eigen(0).ground().map(|x| Complex::new(x, 0.0));
        let mut state = ProbeRegisterState::from_excited_register(&register);
        let before = state.amplitudes().clone();
        evolve(&mut state, &op, 0.0).unwrap();
        assert!((state.amplitudes() - before).norm() < 1e-14);
    }

    #[test]
    fn evolution_preserves_norm() {
        use rand::Rng;
        let h = hierarchy_with_counts(16, &[8, 4, 2]);
        let path = build_path::<f64>(&h).unwrap();
        let hp = crate::path::collapsed_matrix(&h, &path.steps()[1]);
        let hc = crate::path::collapsed_matrix(&h, &path.steps()[2]);
        let op = StepOperator::new(&hp, &hc, 0.05, 0.01).unwrap();
        let dim = hp.nrows();
        let mut rng = stream(77);
        for _ in 0..1000 {
            let mut reg: DVector<Complex<f64>> = DVector::from_fn(dim, |_, _| {
                Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            reg /= Complex::new(reg.norm(), 0.0);
            let mut state = ProbeRegisterState::from_excited_register(&reg);
            let t: f64 = rng.gen::<f64>() * 50.0;
            evolve(&mut state, &op, t).unwrap();
            assert!((state.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn probe_measurement_collapses_blocks() {
        // State sqrt(1-p)|1>|a> + sqrt(p)|0>|b| decays with probability p
        // and leaves |b> on decay.
        let p = 0.37f64;
        let dim = 3;
        let mut excited: DVector<Complex<f64>> = DVector::zeros(dim);
        let mut ground: DVector<Complex<f64>> = DVector::zeros(dim);
        excited[0] = Complex::new((1.0 - p).sqrt(), 0.0);
        ground[1] = Complex::new(p.sqrt(), 0.0);
        let state = ProbeRegisterState::from_blocks(&excited, &ground);
        assert!((state.decay_probability() - p).abs() < 1e-15);

        let mut decays = 0;
        let trials = 20_000;
        let mut rng = stream(123);
        for _ in 0..trials {
            let (decayed, block) = measure_probe(&state, &mut rng).unwrap();
            if decayed {
                decays += 1;
                assert!((block[1].re - 1.0).abs() < 1e-12);
            } else {
                assert!((block[0].re - 1.0).abs() < 1e-12);
            }
        }
        let freq = decays as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((freq - p).abs() < 5.0 * sigma, "freq {freq}");

        // Same seed, same outcomes.
        let mut r1 = stream(9);
        let mut r2 = stream(9);
        for _ in 0..50 {
            let a = measure_probe(&state, &mut r1).unwrap().0;
            let b = measure_probe(&state, &mut r2).unwrap().0;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn excited_only_state_never_decays() {
        let dim = 2;
        let mut excited: DVector<Complex<f64>> = DVector::zeros(dim);
        excited[0] = Complex::new(1.0, 0.0);
        let state = ProbeRegisterState::from_blocks(&excited, &DVector::zeros(dim));
        let mut rng = stream(1);
        for _ in 0..100 {
            let (decayed, _) = measure_probe(&state, &mut rng).unwrap();
            assert!(!decayed);
        }
    }

    #[test]
    fn degenerate_step_is_exact_rabi() {
        // Identical previous and current operators: the probe dynamics is a
        // pure two-level Rabi oscillation with frequency c.
        let h = hierarchy_with_counts(8, &[4]);
        let path = build_path::<f64>(&h).unwrap();
        let hm = crate::path::collapsed_matrix(&h, &path.steps()[1]);
        let c = 0.05f64;
        let op = StepOperator::new(&hm, &hm, 0.0, c).unwrap();
        let ground = eigen_collapsed(&h, &path.steps()[1]).ground().clone();

        for t in [0.3, 2.0, 11.0, 31.0] {
            let register = ground.map(|x| Complex::new(x, 0.0));
            let mut state = ProbeRegisterState::from_excited_register(&register);
            evolve(&mut state, &op, t).unwrap();
            let p = state.decay_probability();
            let expected = rabi_probability(c, t, 1.0);
            assert!((p - expected).abs() < 1e-9, "t {t}: {p} vs {expected}");
        }

        // At the quarter period the decay happens on the first attempt.
        let mut register = ground.map(|x| Complex::new(x, 0.0));
        let params = StepParams {
            omega: 0.0,
            coupling: c,
            time: StepParams::quarter_period(c, 1.0),
            d0_expected: 1.0,
        };
        let mut rng = stream(3);
        let outcome = run_step(&mut register, &op, &ground, &params, 50, &mut rng).unwrap();
        assert_eq!(outcome.repeats, 1);
        assert!((outcome.p_model - 1.0).abs() < 1e-9);
        assert!(outcome.post_fidelity > 1.0 - 1e-9);
    }

    #[test]
    fn perturbative_step_decays_cleanly() {
        let h = hierarchy_with_counts(4, &[1]);
        let path = build_path::<f64>(&h).unwrap();
        let hp = crate::path::collapsed_matrix(&h, &path.steps()[0]);
        let hc = crate::path::collapsed_matrix(&h, &path.steps()[1]);
        let gap = path.eigen(1).gap().min(path.eigen(0).gap());
        let c = gap / 20.0;
        let d0 = path.overlap_for(1);
        let omega = resonance_omega(path.eigen(0).e0(), path.eigen(1).e0());
        let op = StepOperator::new(&hp, &hc, omega, c).unwrap();
        let mut register = path.eigen(0).ground().map(|x| Complex::new(x, 0.0));
        let params = StepParams {
            omega,
            coupling: c,
            time: StepParams::quarter_period(c, d0),
            d0_expected: d0,
        };
        let mut rng = stream(11);
        let outcome = run_step(&mut register, &op, path.eigen(1).ground(), &params, 50, &mut rng)
            .unwrap();
        let ratio = c / gap;
        assert!(
            outcome.p_model > 1.0 - 20.0 * ratio * ratio,
            "p_model {}",
            outcome.p_model
        );
        assert!((outcome.p_model - outcome.p_theory).abs() <= 0.05);
        assert!(outcome.post_fidelity >= 0.99);
    }

    #[test]
    fn failed_measurement_restores_previous_ground() {
        // Evolve for a half period so non-decay outcomes are common, then
        // check the excited branch stays close to the previous ground state.
        let h = hierarchy_with_counts(16, &[8, 2]);
        let path = build_path::<f64>(&h).unwrap();
        for t in 1..=path.transitions() {
            let hp = crate::path::collapsed_matrix(&h, &path.steps()[t - 1]);
            let hc = crate::path::collapsed_matrix(&h, &path.steps()[t]);
            let gap = path.eigen(t).gap().min(path.eigen(t - 1).gap());
            let c = (gap / 20.0).min(0.02);
            let omega = resonance_omega(path.eigen(t - 1).e0(), path.eigen(t).e0());
            let op = StepOperator::new(&hp, &hc, omega, c).unwrap();
            let ground_prev = path.eigen(t - 1).ground().clone();
            let half = StepParams::quarter_period(c, path.overlap_for(t)) * 0.5;

            let mut rng = stream(41 + t as u64);
            let mut restored = 0;
            for _ in 0..40 {
                let register = ground_prev.map(|x| Complex::new(x, 0.0));
                let mut state = ProbeRegisterState::from_excited_register(&register);
                evolve(&mut state, &op, half).unwrap();
                let (decayed, block) = measure_probe(&state, &mut rng).unwrap();
                if !decayed {
                    restored += 1;
                    let fid = fidelity(&block, &ground_prev);
                    let bound = 1.0 - 10.0 * (c / gap) * (c / gap);
                    assert!(fid >= bound, "transition {t}: fidelity {fid} < {bound}");
                }
            }
            assert!(restored > 0, "no non-decay outcomes at transition {t}");
        }
    }

    #[test]
    fn register_sampling_statistics() {
        // Uniform state over two indices: both appear with frequencies
        // within five sigma of 1/2.
        let amps = DVector::from_vec(vec![
            Complex::new(1.0 / 2f64.sqrt(), 0.0),
            Complex::new(1.0 / 2f64.sqrt(), 0.0),
        ]);
        let mut rng = stream(17);
        let samples = measure_register(&amps, &RegisterSampler::Direct, 100, &mut rng);
        let ones = samples.iter().filter(|&&s| s == 1).count();
        let sigma = (0.25f64 / 100.0).sqrt();
        assert!(((ones as f64 / 100.0) - 0.5).abs() < 5.0 * sigma);

        // A deterministic state always yields its index.
        let point = DVector::from_vec(vec![Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)]);
        let samples = measure_register(&point, &RegisterSampler::Direct, 20, &mut rng);
        assert!(samples.iter().all(|&s| s == 1));
    }

    #[test]
    fn run_path_on_synthetic_hierarchy() {
        let h = hierarchy_with_counts(8, &[4, 2, 1]);
        let path = build_path::<f64>(&h).unwrap();
        let engine = Engine::new(&path, Backend::Collapsed).unwrap();
        let out = engine.run(&RunPolicy::default(), 99).unwrap();
        assert_eq!(out.trace.steps.len(), 3);
        assert!(out.trace.final_fidelity >= 0.99);
        // Step records carry the protocol quantities.
        for rec in &out.trace.steps {
            assert!(rec.repeats >= 1);
            assert!(rec.p_theory > 0.99);
            assert!((rec.t - std::f64::consts::PI / (2.0 * rec.c * rec.d0)).abs() < 1e-9);
        }
    }

    #[test]
    fn single_transition_path_runs_one_step() {
        let h = hierarchy_with_counts(4, &[2]);
        let path = build_path::<f64>(&h).unwrap();
        let engine = Engine::new(&path, Backend::Collapsed).unwrap();
        let out = engine.run(&RunPolicy::default(), 1).unwrap();
        assert_eq!(out.trace.steps.len(), 1);
    }

    #[test]
    fn zero_time_policy_fails_with_partial_trace() {
        let h = hierarchy_with_counts(8, &[4, 2]);
        let path = build_path::<f64>(&h).unwrap();
        let engine = Engine::new(&path, Backend::Collapsed).unwrap();
        let policy = RunPolicy {
            time_scale: 0.0,
            max_repeats: 5,
            ..RunPolicy::default()
        };
        let err = engine.run(&policy, 4).unwrap_err();
        match err.error {
            Error::StepFailed { step, attempts } => {
                assert_eq!(step, 1);
                assert_eq!(attempts, 5);
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(err.partial.steps.is_empty());
    }

    #[test]
    fn purify_projects_register() {
        let h = hierarchy_with_counts(8, &[4, 2]);
        let path = build_path::<f64>(&h).unwrap();
        let engine = Engine::new(&path, Backend::Collapsed).unwrap();
        let policy = RunPolicy {
            purify: true,
            ..RunPolicy::default()
        };
        let out = engine.run(&policy, 2).unwrap();
        assert!((out.trace.final_fidelity - 1.0).abs() < 1e-12);
    }
}
