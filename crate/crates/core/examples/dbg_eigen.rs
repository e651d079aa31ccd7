use hsq_core::pipeline::{InstanceSpec, prepare};
use hsq_core::problems::TargetPolicy;
use hsq_core::path::collapsed_matrix;
use hsq_core::qrt::*;
use num_complex::Complex;
use rand::Rng;

fn main() {
    let spec = InstanceSpec::Simon { n: 5, a: None, seed: 5002, target: TargetPolicy::ForceMin };
    let mut rng = hsq_core::rng::stream(5002);
    let inst = spec.build_with(&mut rng).unwrap();
    let prep = prepare(&inst, None).unwrap();
    let path = &prep.path;
    let hier = path.hierarchy();
    let mut register = path.eigen(0).ground().map(|x| Complex::new(x, 0.0));
    for t in 1..=path.transitions() {
        let e0p = path.eigen(t-1).e0(); let e0c = path.eigen(t).e0();
        let gp = path.eigen(t-1).gap(); let gc = path.eigen(t).gap();
        let d0 = path.overlap_for(t);
        let omega = resonance_omega(e0p, e0c);
        let c = (gp.min(gc)/20.0).min(0.02);
        let time = StepParams::quarter_period(c, d0);
        let hp = collapsed_matrix(hier, &path.steps()[t-1]);
        let hc = collapsed_matrix(hier, &path.steps()[t]);
        let op = StepOperator::new(&hp, &hc, omega, c).unwrap();
        let pre_fid = fidelity(&register, path.eigen(t-1).ground());
        for attempt in 1..=6 {
            let mut state = ProbeRegisterState::from_excited_register(&register);
            evolve(&mut state, &op, time).unwrap();
            let p = state.decay_probability();
            let u = rng.gen::<f64>();
            let decayed = u < p;
            if attempt <= 3 || t == 4 {
                println!("t={t} attempt {attempt}: pre_fid={pre_fid:.9} p={p:.9} u={u:.6} decayed={decayed}");
            }
            let (d, block) = measure_probe_replay(&state, decayed);
            register = block;
            if d { break; }
        }
    }
}

fn measure_probe_replay(state: &ProbeRegisterState<f64>, decayed: bool) -> (bool, nalgebra::DVector<Complex<f64>>) {
    let block = if decayed { state.ground_block() } else { state.excited_block() };
    let n = block.norm();
    (decayed, block / Complex::new(n, 0.0))
}
