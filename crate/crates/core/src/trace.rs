//! Run traces: the machine-readable record of one protocol execution.

use serde::{Deserialize, Serialize};

use crate::qrt::Backend;

/// Per-transition record. Field names are the stable JSON schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub i: usize,
    #[serde(rename = "N_i")]
    pub n_i: usize,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub gap: f64,
    pub d0: f64,
    pub omega: f64,
    pub c: f64,
    pub t: f64,
    pub repeats: usize,
    pub p_theory: f64,
    pub p_model: f64,
    pub post_fidelity: f64,
}

/// Full record of a run, serializable deterministically for a fixed seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub steps: Vec<StepRecord>,
    pub final_fidelity: f64,
    pub total_time: f64,
    pub seed: u64,
    pub backend: Backend,
}

impl RunTrace {
    pub fn new(
        steps: Vec<StepRecord>,
        final_fidelity: f64,
        total_time: f64,
        seed: u64,
        backend: Backend,
    ) -> Self {
        Self {
            steps,
            final_fidelity,
            total_time,
            seed,
            backend,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// Compare против another trace field by field. Floats must agree to
    /// `tol` relative to `max(1, |value|)`; counters must match exactly.
    pub fn agrees_with(&self, other: &RunTrace, tol: f64) -> std::result::Result<(), String> {
        fn close(name: &str, a: f64, b: f64, tol: f64) -> std::result::Result<(), String> {
            let scale = 1.0f64.max(a.abs()).max(b.abs());
            if (a - b).abs() <= tol * scale {
                Ok(())
            } else {
                Err(format!("{name}: {a} vs {b}"))
            }
        }

        if self.steps.len() != other.steps.len() {
            return Err(format!(
                "step counts differ: {} vs {}",
                self.steps.len(),
                other.steps.len()
            ));
        }
        for (a, b) in self.steps.iter().zip(&other.steps) {
            if a.i != b.i || a.n_i != b.n_i {
                return Err(format!("step identity differs at i = {}", a.i));
            }
            if a.repeats != b.repeats {
                return Err(format!("repeats differ at i = {}: {} vs {}", a.i, a.repeats, b.repeats));
            }
            close("E0", a.e0, b.e0, tol)?;
            close("gap", a.gap, b.gap, tol)?;
            close("d0", a.d0, b.d0, tol)?;
            close("omega", a.omega, b.omega, tol)?;
            close("c", a.c, b.c, tol)?;
            close("t", a.t, b.t, tol)?;
            close("p_theory", a.p_theory, b.p_theory, tol)?;
            close("p_model", a.p_model, b.p_model, tol)?;
            close("post_fidelity", a.post_fidelity, b.post_fidelity, tol)?;
        }
        close("final_fidelity", self.final_fidelity, other.final_fidelity, tol)?;
        close("total_time", self.total_time, other.total_time, tol)
    }
}
