//! scratch: weak-field intensity-scaling slopes with a sample-band window

use attostm_core::config::{GridConfig, JunctionConfig, PulseConfig, SfaConfig};
use attostm_core::flux::direct_spectrum;
use attostm_core::junction::solve_initial_state;
use attostm_core::pulse::Waveform;
use attostm_core::sfa::sfa_spectrum;
use attostm_core::units;

fn main() {
    let omega = PulseConfig::omega_from_wavelength_nm(830.0);
    let gc = GridConfig::new(
        units::nm_to_au(0.01),
        units::as_to_au(2.2),
        units::nm_to_au(150.0),
    )
    .unwrap();
    let quad = SfaConfig::default_au();
    let e0 = units::ev_to_au(-5.0);
    for d_nm in [0.5, 1.0] {
        let j = JunctionConfig::gold(d_nm);
        let state = solve_initial_state(&j, e0).unwrap();
        let energies: Vec<f64> = (0..40)
            .map(|i| j.sample_floor() + units::ev_to_au(0.5 + 19.0 * i as f64 / 39.0))
            .collect();
        let mut yt = Vec::new();
        let mut ys = Vec::new();
        for f in [0.25, 0.5, 1.0, 2.0] {
            let p = PulseConfig::new(
                units::vnm_to_au(f),
                0.0,
                omega,
                units::fs_to_au(3.0),
                0.0,
                None,
            )
            .unwrap();
            let wf = Waveform::gaussian(&p);
            let st = direct_spectrum(&j, &gc, &wf, e0, &energies).unwrap();
            let ss = sfa_spectrum(&energies, &state, &j, &wf, &quad).unwrap();
            yt.push(st.integral());
            ys.push(ss.integral());
        }
        let slopes = |y: &[f64]| -> Vec<f64> {
            y.windows(2).map(|w| (w[1] / w[0]).ln() / 4.0f64.ln()).collect()
        };
        let fmt = |y: &[f64]| -> String {
            y.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(" ")
        };
        println!("d={d_nm}: tdse yields {} slopes {:.3?}", fmt(&yt), slopes(&yt));
        println!("d={d_nm}: sfa  yields {} slopes {:.3?}", fmt(&ys), slopes(&ys));
    }
}
