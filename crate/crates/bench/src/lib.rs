//! Shared fixtures for the benchmarks.

use et6_core::{GasSpec, InitialCondition, Scenario, State6};

pub fn gas() -> GasSpec {
    GasSpec::with_dof(5.0).expect("valid gas")
}

/// Moving state with `Pi/p = z`.
pub fn state(gas: &GasSpec, z: f64) -> State6 {
    State6::from_pressure(1.0, [0.3, -0.2, 0.1], 1.0, z, gas).expect("admissible state")
}

/// Periodic acoustic wave on `cells` cells.
pub fn acoustic(cells: usize, tau: f64) -> Scenario {
    let g = gas().with_tau(tau).expect("valid relaxation time");
    let background = State6::from_pressure(1.0, [0.0; 3], 1.0, 0.0, &g).expect("admissible state");
    Scenario::new(
        g,
        InitialCondition::AcousticWave {
            background,
            amplitude: 1e-3,
            modes: 1,
        },
        cells,
    )
}
