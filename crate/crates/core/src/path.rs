//! Interpolated Hamiltonian path over a marked hierarchy.
//!
//! Every operator on the path has the form
//! `H = -c_mix |psi_0><psi_0| - (1 - c_mix) P_M`
//! with `|psi_0>` the uniform state and `P_M` the projector onto a marked
//! set. Interior steps use `c_mix = N_i / N` with marked set `M_i`; the
//! terminal step is the bare projector onto the deepest set. All such
//! operators preserve the span of the atom-uniform vectors, so ground
//! states, overlaps, and the later dynamics are computed exactly in that
//! small shared basis. A full-matrix eigensolver provides an independent
//! reference route.

use nalgebra::{DMatrix, DVector};

use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::oracle::MarkedHierarchy;
use crate::scalar::Scalar;

/// Hard cap for explicit matrix assembly.
pub const DENSE_EIGEN_BUDGET: usize = 4096;

/// One operator on the path: mixing coefficient plus marked level.
#[derive(Debug, Clone, Copy)]
pub struct StepHamiltonianSpec<S: Scalar> {
    index: usize,
    c_mix: S,
    marked_level: usize,
    n_marked: usize,
    n_total: usize,
}

impl<S: Scalar> StepHamiltonianSpec<S> {
    /// Interior step `i` (level `i` marked set, `c_mix = N_i / N`); `i = 0`
    /// is the bare uniform-state Hamiltonian.
    pub fn interior(hier: &MarkedHierarchy, i: usize) -> Self {
        let n = hier.domain_size();
        let n_marked = hier.count(i);
        Self {
            index: i,
            c_mix: S::from_count(n_marked) / S::from_count(n),
            marked_level: i,
            n_marked,
            n_total: n,
        }
    }

    /// Terminal projector onto the deepest marked set.
    pub fn terminal(hier: &MarkedHierarchy) -> Self {
        let m = hier.depth();
        Self {
            index: m,
            c_mix: S::zero(),
            marked_level: m,
            n_marked: hier.count(m),
            n_total: hier.domain_size(),
        }
    }

    /// Step with an explicit mixing coefficient, for off-path analysis.
    pub fn with_mix(hier: &MarkedHierarchy, marked_level: usize, c_mix: S) -> Self {
        Self {
            index: marked_level,
            c_mix,
            marked_level,
            n_marked: hier.count(marked_level),
            n_total: hier.domain_size(),
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn c_mix(&self) -> S {
        self.c_mix
    }

    pub fn marked_level(&self) -> usize {
        self.marked_level
    }

    pub fn n_marked(&self) -> usize {
        self.n_marked
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }
}

/// Ground data of one step, with the ground vector over atoms.
#[derive(Debug, Clone)]
pub struct EigenData<S: Scalar> {
    e0: S,
    e1: Option<S>,
    ground: DVector<S>,
}

impl<S: Scalar> EigenData<S> {
    pub fn e0(&self) -> S {
        self.e0
    }

    /// Lowest energy strictly above the ground energy, when one exists.
    pub fn e1(&self) -> Option<S> {
        self.e1
    }

    /// `E1 - E0`, or zero for a fully degenerate spectrum.
    pub fn gap(&self) -> S {
        self.e1.map_or(S::zero(), |e1| e1 - self.e0)
    }

    /// Ground amplitudes over the atom basis, sign-fixed non-negative on
    /// the deepest atom.
    pub fn ground(&self) -> &DVector<S> {
        &self.ground
    }
}

fn level_tolerance<S: Scalar>() -> S {
    // Distinguishes genuinely distinct levels from numerical degeneracy.
    S::default_epsilon().sqrt() * S::from_f64(1e-4).unwrap()
}

/// Atom weights `|a| / N`.
fn atom_weights<S: Scalar>(hier: &MarkedHierarchy) -> Vec<S> {
    let n = S::from_count(hier.domain_size());
    hier.atoms()
        .iter()
        .map(|a| S::from_count(a.len()) / n)
        .collect()
}

/// The uniform state over atoms: amplitude `sqrt(|a| / N)` per atom.
pub fn uniform_state<S: Scalar>(hier: &MarkedHierarchy) -> DVector<S> {
    DVector::from_iterator(
        hier.atoms().len(),
        atom_weights::<S>(hier).into_iter().map(|w| w.sqrt()),
    )
}

/// Expand an atom-basis vector to the full register basis.
pub fn expand_to_dense<S: Scalar>(hier: &MarkedHierarchy, atom_vec: &DVector<S>) -> DVector<S> {
    let mut out = DVector::zeros(hier.domain_size());
    for (a, atom) in hier.atoms().iter().enumerate() {
        let amp = atom_vec[a] / S::from_count(atom.len()).sqrt();
        for &j in atom.indices() {
            out[j] = amp;
        }
    }
    out
}

/// Collapsed matrix of a step over the atom basis:
/// `H_ab = -c_mix sqrt(w_a w_b) - (1 - c_mix) [a in M] delta_ab`.
pub fn collapsed_matrix<S: Scalar>(
    hier: &MarkedHierarchy,
    step: &StepHamiltonianSpec<S>,
) -> DMatrix<S> {
    let w = atom_weights::<S>(hier);
    let k = w.len();
    let prefix = hier.marked_prefix(step.marked_level());
    let lam = step.c_mix();
    let penalty = S::one() - lam;
    let mut h = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            h[(a, b)] = -lam * (w[a] * w[b]).sqrt();
        }
        if a < prefix {
            h[(a, a)] -= penalty;
        }
    }
    h
}

/// Full-register matrix of a step:
/// `-c_mix / N` everywhere, minus `(1 - c_mix)` on marked diagonal entries.
pub fn dense_matrix<S: Scalar>(
    hier: &MarkedHierarchy,
    step: &StepHamiltonianSpec<S>,
) -> DMatrix<S> {
    let n = hier.domain_size();
    let lam = step.c_mix();
    let off = -lam / S::from_count(n);
    let penalty = S::one() - lam;
    let mut h = DMatrix::from_element(n, n, off);
    for &j in hier.marked_indices(step.marked_level()).iter() {
        h[(j, j)] -= penalty;
    }
    h
}

/// Exact ground data from the two-dimensional invariant block spanned by
/// the uniform-over-marked and uniform-over-complement vectors.
pub fn eigen_collapsed<S: Scalar>(
    hier: &MarkedHierarchy,
    step: &StepHamiltonianSpec<S>,
) -> EigenData<S> {
    let n = step.n_total();
    let n_marked = step.n_marked();
    let lam = step.c_mix();
    let penalty = S::one() - lam;
    let s = S::from_count(n_marked) / S::from_count(n);
    let tol = level_tolerance::<S>();

    let (e0, e1, alpha, beta) = if n_marked == n {
        // Marked set is the whole domain: ground is the uniform state at
        // energy -1; everything else sits at -(1 - c_mix).
        let e1 = (n > 1 && -penalty > -S::one() + tol).then_some(-penalty);
        (-S::one(), e1, S::one(), S::zero())
    } else {
        let d1 = -lam * s - penalty;
        let d2 = -lam * (S::one() - s);
        let off = -lam * (s * (S::one() - s)).sqrt();
        let half = S::from_f64(0.5).unwrap();
        let disc = ((d1 - d2) * (d1 - d2) + S::from_count(4) * off * off).sqrt();
        let e_lo = (d1 + d2 - disc) * half;
        let e_hi = (d1 + d2 + disc) * half;

        let (alpha, beta) = if off == S::zero() {
            // Decoupled block (c_mix = 0): ground is uniform over the
            // marked set.
            if d1 <= d2 {
                (S::one(), S::zero())
            } else {
                (S::zero(), S::one())
            }
        } else {
            // (off, e - d1) solves the 2x2 eigenproblem; both components
            // come out non-positive for the ground branch.
            let v0 = -off;
            let v1 = d1 - e_lo;
            let norm = (v0 * v0 + v1 * v1).sqrt();
            (v0 / norm, v1 / norm)
        };

        let mut candidates = vec![e_hi];
        if n_marked > 1 {
            candidates.push(-penalty);
        }
        if n - n_marked > 1 {
            candidates.push(S::zero());
        }
        let e1 = candidates
            .into_iter()
            .filter(|&c| c > e_lo + tol)
            .fold(None, |acc: Option<S>, c| {
                Some(acc.map_or(c, |best| if c < best { c } else { best }))
            });
        (e_lo, e1, alpha, beta)
    };

    // Embed (alpha over marked, beta over complement) into the atom basis.
    let w = atom_weights::<S>(hier);
    let prefix = hier.marked_prefix(step.marked_level());
    let s_marked = S::from_count(n_marked) / S::from_count(n);
    let mut ground = DVector::zeros(w.len());
    for a in 0..w.len() {
        ground[a] = if a < prefix {
            alpha * (w[a] / s_marked).sqrt()
        } else {
            beta * (w[a] / (S::one() - s_marked)).sqrt()
        };
    }

    EigenData { e0, e1, ground }
}

/// Reference route: full symmetric eigensolve of the assembled matrix.
///
/// The ground vector is recovered as the ground-eigenspace projection of
/// the uniform state, which also resolves the degenerate terminal case to
/// the symmetric representative.
pub fn eigen_dense<S: Scalar>(
    hier: &MarkedHierarchy,
    step: &StepHamiltonianSpec<S>,
) -> Result<EigenData<S>> {
    let n = hier.domain_size();
    if n > DENSE_EIGEN_BUDGET {
        return Err(Error::DimensionBudget {
            dim: n,
            budget: DENSE_EIGEN_BUDGET,
        });
    }

    let h = dense_matrix(hier, step);
    let (values, vectors) = symmetric_eigen(h);
    let tol = level_tolerance::<S>();

    let e0 = values[0];
    let e1 = values.iter().copied().find(|&e| e > e0 + tol);

    // Project the uniform state onto the ground eigenspace.
    let root_n = S::from_count(n).sqrt();
    let mut dense_ground: DVector<S> = DVector::zeros(n);
    for i in 0..n {
        let e = values[i];
        if e > e0 + tol {
            break;
        }
        let col = vectors.column(i);
        let coeff = col.iter().fold(S::zero(), |acc, &x| acc + x) / root_n;
        dense_ground.axpy(coeff, &col.into_owned(), S::one());
    }
    let norm = dense_ground.norm();
    if norm < S::from_f64(1e-12).unwrap() {
        return Err(Error::NumericalFailure(
            "uniform state orthogonal to ground eigenspace".into(),
        ));
    }
    dense_ground /= norm;

    // Contract back to atoms.
    let k = hier.atoms().len();
    let mut ground = DVector::zeros(k);
    for (a, atom) in hier.atoms().iter().enumerate() {
        let mut acc = S::zero();
        for &j in atom.indices() {
            acc += dense_ground[j];
        }
        ground[a] = acc / S::from_count(atom.len()).sqrt();
    }
    // Sign fix on the deepest atom.
    if ground[0] < S::zero() {
        ground.neg_mut();
    }

    Ok(EigenData { e0, e1, ground })
}

/// Inner product of consecutive ground states over the shared atom basis.
pub fn overlap<S: Scalar>(prev: &EigenData<S>, cur: &EigenData<S>, step: usize) -> Result<S> {
    let d0 = prev.ground().dot(cur.ground());
    let d0 = d0.abs();
    if d0 < S::from_f64(1e-12).unwrap() {
        return Err(Error::PathDisconnected { step });
    }
    Ok(d0)
}

/// The full path: interior steps, terminal projector, per-step ground data,
/// and consecutive overlaps.
#[derive(Debug, Clone)]
pub struct PathSpec<S: Scalar> {
    hierarchy: MarkedHierarchy,
    steps: Vec<StepHamiltonianSpec<S>>,
    eigs: Vec<EigenData<S>>,
    overlaps: Vec<S>,
}

impl<S: Scalar> PathSpec<S> {
    /// Number of transitions `m` (the path holds `m + 1` operators).
    pub fn transitions(&self) -> usize {
        self.overlaps.len()
    }

    pub fn hierarchy(&self) -> &MarkedHierarchy {
        &self.hierarchy
    }

    pub fn steps(&self) -> &[StepHamiltonianSpec<S>] {
        &self.steps
    }

    pub fn eigen(&self, entry: usize) -> &EigenData<S> {
        &self.eigs[entry]
    }

    /// Overlap `d0` for transition `t` (1-based, `1..=m`).
    pub fn overlap_for(&self, t: usize) -> S {
        self.overlaps[t - 1]
    }

    /// A transition is degenerate when the two operators share their ground
    /// state exactly; the probe then sees a pure two-level system.
    pub fn is_degenerate_transition(&self, t: usize) -> bool {
        self.overlaps[t - 1] >= S::one() - S::from_f64(1e-12).unwrap()
    }

    /// The terminal ground state over atoms (uniform over the deepest set).
    pub fn target(&self) -> &DVector<S> {
        self.eigs.last().unwrap().ground()
    }

    /// Report CSV, one row per path operator.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,N_i,c_mix,E0,E1,gap,d0\n");
        for (i, (step, eig)) in self.steps.iter().zip(&self.eigs).enumerate() {
            let d0 = if i == 0 {
                S::one()
            } else {
                self.overlaps[i - 1]
            };
            let e1 = eig
                .e1()
                .map(|e| format!("{}", e.as_f64()))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                step.index(),
                step.n_marked(),
                step.c_mix().as_f64(),
                eig.e0().as_f64(),
                e1,
                eig.gap().as_f64(),
                d0.as_f64(),
            ));
        }
        out
    }
}

/// Build the path for a hierarchy: operators `i = 0 .. m-1` plus the
/// terminal projector, with exact ground data and overlaps.
pub fn build_path<S: Scalar>(hier: &MarkedHierarchy) -> Result<PathSpec<S>> {
    let m = hier.depth();
    let mut steps = Vec::with_capacity(m + 1);
    for i in 0..m {
        steps.push(StepHamiltonianSpec::interior(hier, i));
    }
    steps.push(StepHamiltonianSpec::terminal(hier));

    let eigs: Vec<EigenData<S>> = steps.iter().map(|s| eigen_collapsed(hier, s)).collect();

    let mut overlaps = Vec::with_capacity(m);
    for t in 1..=m {
        overlaps.push(overlap(&eigs[t - 1], &eigs[t], t)?);
    }

    Ok(PathSpec {
        hierarchy: hier.clone(),
        steps,
        eigs,
        overlaps,
    })
}
